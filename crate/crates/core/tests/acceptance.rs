//! The eight acceptance criteria, one test each. Every test writes a single
//! `[PASS]`/`[FAIL]` line straight to stderr so the summary survives output
//! capture.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use mid_core::estimate::{distance_matrix, ncd_pair, NormScheme, PairScheme};
use mid_core::harness::{
    additivity_demo, chain_suite, fixture_corpus, metric_check, normalization_violation_demo, Sampler,
};
use mid_core::overlap::{build, random_instance};
use mid_core::toylab::{
    anchors, candidate_family, coding_suite, density_check, dominance_check, emax_table, kraft_sum, monotonicity_check,
    prefix_free_check, soi_suite, toy_universe, Budget, OutputFilter,
};
use mid_core::{ByteString, Compressor, ExternalCommand, SizeCache};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest `|soi_residual|` over strings of at most 8 bits at `L = 20`,
/// `S = 10^4`; measured 3.
const C_SOI: f64 = 3.0;
/// Largest `|coding residual|` on the same grid; measured 1.7279.
const C_CODING: f64 = 1.75;

const XZ: &str = "xz -c -6 -T1";

fn report(n: u32, name: &str, pass: bool, elapsed: Duration, limit: Option<Duration>, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let limit = limit.map_or(String::new(), |l| format!(" (limit {:.0?})", l));
    let line = format!("[{status}] {n}/8 {name}: {detail}; {elapsed:.2?}{limit}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

#[test]
fn criterion_1_normalization_counterexample() {
    let limit = Duration::from_secs(10);
    let src = Compressor::builtin();
    let t = Instant::now();
    let main = normalization_violation_demo(10_000, NormScheme::MaxSublist, 1, &src).unwrap();
    let flagged: Vec<(NormScheme, bool)> = NormScheme::ALL
        .into_iter()
        .map(|s| (s, normalization_violation_demo(10_000, s, 1, &src).unwrap().violation))
        .collect();
    let elapsed = t.elapsed();
    let values_ok = main.e_xy >= 0.8
        && (0.35..=0.65).contains(&main.e_xz)
        && main.e_zy <= 0.15
        && main.e_xy > main.e_xz + main.e_zy;
    let all_flag = flagged.iter().all(|&(_, v)| v);
    let pass = values_ok && all_flag && within(elapsed, limit);
    report(
        1,
        "normalization counterexample",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "e(XY)={:.4} e(XZ)={:.4} e(ZY)={:.4}, schemes flagged {}/{}",
            main.e_xy,
            main.e_xz,
            main.e_zy,
            flagged.iter().filter(|f| f.1).count(),
            flagged.len()
        ),
    );
    assert!(values_ok, "{main:#?}");
    assert!(all_flag, "{flagged:?}");
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_2_triangle_suite() {
    let limit = Duration::from_secs(120);
    let src = Compressor::builtin();
    let seed = 2;
    let mut sampler = Sampler::new(seed, 1024, 50 * 1024);
    let t = Instant::now();
    let r = metric_check(&mut sampler, seed, 100, &src).unwrap();
    let elapsed = t.elapsed();
    let symmetry_exact = r.symmetry.records.iter().all(|rec| rec.slack == 0.0);
    let pass = r.triangle.violations() == 0 && symmetry_exact && r.definiteness.pass && within(elapsed, limit);
    report(
        2,
        "triangle suite",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "triangle violations {}/{} (worst slack {:.1} vs {:.1}), symmetry max {:.1}, definiteness worst {:.1}",
            r.triangle.violations(),
            r.triangle.trials,
            r.triangle.worst_slack,
            r.triangle.allowance,
            r.symmetry.worst_slack,
            r.definiteness.worst_slack
        ),
    );
    assert_eq!(r.triangle.violations(), 0, "{:#?}", r.triangle);
    assert!(symmetry_exact, "{:#?}", r.symmetry);
    assert!(r.definiteness.pass, "{:#?}", r.definiteness);
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_3_additivity_both_directions() {
    let limit = Duration::from_secs(5);
    let src = Compressor::builtin();
    let t = Instant::now();
    let r = additivity_demo(8000, 1, &src).unwrap();
    let elapsed = t.elapsed();
    let pass = r.pass && within(elapsed, limit);
    report(
        3,
        "additivity",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "(a) {:.0} <= {:.0}, (b) {:.0} >= {:.0}",
            r.subadditive.emax_xy, r.subadditive.threshold, r.superadditive.emax_xy, r.superadditive.threshold
        ),
    );
    assert!(r.pass, "{r:#?}");
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_4_inequality_chain() {
    let limit = Duration::from_secs(120);
    let src = Compressor::builtin();
    let seed = 4;
    let mut sampler = Sampler::new(seed, 256, 16 * 1024);
    let t = Instant::now();
    let r = chain_suite(&mut sampler, seed, 100, &src).unwrap();
    let elapsed = t.elapsed();
    let ordered = r.records.iter().all(|rec| rec.values["emin"] <= rec.values["emax"]);
    let pass = r.pass && ordered && r.trials == 100 && within(elapsed, limit);
    report(
        4,
        "inequality chain",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "{} lists, violations {}, worst slack {:.1} vs {:.1}",
            r.trials,
            r.violations(),
            r.worst_slack,
            r.allowance
        ),
    );
    assert!(ordered && r.pass, "{r:#?}");
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_5_toylab_exact_suite() {
    let limit = Duration::from_secs(120);
    let budget = Budget::new(20, 10_000);
    let empty = ByteString::empty();
    let t = Instant::now();
    let prefix = prefix_free_check(&empty, budget).unwrap();
    let kraft = kraft_sum(&empty, budget).unwrap();
    let kraft_cond = kraft_sum(&ByteString::from_bits("0110").unwrap(), budget).unwrap();
    let soi = soi_suite(8, budget).unwrap();
    let coding = coding_suite(8, budget).unwrap();
    let filter = OutputFilter::strings(8);
    let mut mono_violations = 0;
    for cond in ["", "1", "0110"] {
        let c = ByteString::from_bits(cond).unwrap();
        mono_violations += monotonicity_check(&c, Budget::new(16, 10_000), budget, filter)
            .unwrap()
            .violations
            .len();
        mono_violations += monotonicity_check(&c, Budget::new(20, 100), budget, filter)
            .unwrap()
            .violations
            .len();
    }
    let elapsed = t.elapsed();
    let pass = prefix.violations == 0
        && kraft <= 1.0
        && kraft_cond <= 1.0
        && soi.max_abs <= C_SOI
        && coding.max_abs <= C_CODING
        && mono_violations == 0
        && within(elapsed, limit);
    report(
        5,
        "toylab exact suite",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "prefix violations {} of {} halting, kraft {kraft:.6}/{kraft_cond:.6}, soi {} <= {C_SOI}, coding {:.4} <= {C_CODING}, monotonicity violations {mono_violations}",
            prefix.violations, prefix.halting, soi.max_abs, coding.max_abs
        ),
    );
    assert_eq!(prefix.violations, 0);
    assert!(kraft <= 1.0 && kraft_cond <= 1.0);
    assert!(soi.max_abs <= C_SOI, "{soi:?}");
    assert!(coding.max_abs <= C_CODING, "{coding:?}");
    assert_eq!(mono_violations, 0);
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_6_overlap_construction() {
    let limit = Duration::from_secs(30);
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut round_trips = 0usize;
    let mut vectors = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=8);
        let k1 = rng.gen_range(1..=6);
        let k2 = rng.gen_range(k1..=10);
        let count = rng.gen_range(5..=40);
        let inst = random_instance(&mut rng, m, k1, k2, count).unwrap();
        vectors += inst.vectors.len();
        let g = match build(&inst) {
            Ok(g) => g,
            Err(e) => {
                failures.push(format!("seed {seed}: build failed: {e}"));
                continue;
            }
        };
        if g.stats().max_degree > 1 << k1 {
            failures.push(format!("seed {seed}: degree {}", g.stats().max_degree));
        }
        let width = (k1 + mid_core::overlap::ceil_log2(m)) as usize;
        if g.edges().iter().any(|e| e.color.len() != width) {
            failures.push(format!("seed {seed}: color width differs from {width}"));
        }
        for v in &inst.vectors {
            for i in 0..m {
                for k in 0..m {
                    let side = g.encode(v, i, k).unwrap();
                    let side = mid_core::overlap::SideInfo::from_bits(&side.to_bits(&inst), &inst).unwrap();
                    match g.decode(v.get(i), &side) {
                        Ok((w, y)) if w == v && y == v.get(k) => round_trips += 1,
                        other => failures.push(format!("seed {seed}: ({i},{k}) decoded to {other:?}")),
                    }
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = failures.is_empty() && within(elapsed, limit);
    report(
        6,
        "overlap construction",
        pass,
        elapsed,
        Some(limit),
        &format!(
            "50 instances, {vectors} vectors, {round_trips} round trips, {} failures",
            failures.len()
        ),
    );
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(within(elapsed, limit), "took {elapsed:?}");
}

#[test]
fn criterion_7_density_and_minimality() {
    let t = Instant::now();
    let universe = toy_universe(3, 5);
    let emax = emax_table(&universe, Budget::new(24, 10_000)).unwrap();
    let failing: Vec<ByteString> = anchors(&universe)
        .into_iter()
        .filter(|x| !density_check(&emax, x, &universe).pass)
        .collect();
    let reports: Vec<_> = candidate_family(&universe, &emax)
        .iter()
        .map(|d| dominance_check(d, &universe, &emax, u32::MAX))
        .collect();
    let elapsed = t.elapsed();
    let finite = reports.iter().all(|r| !r.admissible || r.c.is_some());
    let all_admissible = reports.iter().all(|r| r.admissible);
    let emax_zero = reports[0].distance == "emax" && reports[0].c == Some(0);
    let pass = failing.is_empty() && finite && all_admissible && emax_zero;
    let cs: Vec<String> = reports
        .iter()
        .map(|r| format!("{}:c={}", r.distance, r.c.map_or("none".into(), |c| c.to_string())))
        .collect();
    report(
        7,
        "density and minimality",
        pass,
        elapsed,
        None,
        &format!(
            "{} lists ({} resolved), density failures {}, {}",
            universe.len(),
            reports[0].resolved,
            failing.len(),
            cs.join(" ")
        ),
    );
    assert!(failing.is_empty(), "{failing:?}");
    assert!(all_admissible && finite, "{reports:#?}");
    assert!(emax_zero, "{:#?}", reports[0]);
}

#[test]
fn criterion_8_external_compressor_sanity() {
    let t = Instant::now();
    let cmd = ExternalCommand::parse(XZ).unwrap();
    let plain = Compressor::external(cmd.clone()).expect("xz must be on PATH");
    let cache = Arc::new(SizeCache::new());
    let cached = Compressor::external(cmd).unwrap().with_cache(cache.clone());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut bytes = vec![0u8; 100 * 1024];
    rng.fill_bytes(&mut bytes);
    let x = ByteString::new(bytes);
    let self_ncd = ncd_pair(&x, &x, &plain).unwrap().value;

    let corpus = fixture_corpus();
    let fresh = distance_matrix(&corpus, PairScheme::Ncd, &plain).unwrap();
    let first = distance_matrix(&corpus, PairScheme::Ncd, &cached).unwrap();
    let filled = cache.len();
    let second = distance_matrix(&corpus, PairScheme::Ncd, &cached).unwrap();
    let elapsed = t.elapsed();

    let n = fresh.size();
    let values: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| fresh.get(i, j))
        .collect();
    let in_range = values.iter().all(|v| (0.0..=1.1).contains(v));
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let identical = fresh.entries == first.entries && first.entries == second.entries && cache.len() == filled;
    let pass = self_ncd <= 0.05 && in_range && identical;
    report(
        8,
        "external compressor sanity",
        pass,
        elapsed,
        None,
        &format!(
            "{XZ}: NCD(x,x)={self_ncd:.4}, corpus NCD in [{lo:.4}, {hi:.4}], cache entries {filled}, cached == recomputed: {identical}"
        ),
    );
    assert!(self_ncd <= 0.05, "{self_ncd}");
    assert!(in_range, "{values:?}");
    assert!(identical);
}
