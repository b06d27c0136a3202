use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use mid_core::estimate::{
    distance_matrix, list_distance, DistanceMatrix, DistanceReport, ListScheme, NormScheme, PairScheme,
};
use mid_core::harness::{
    additivity_demo, chain_suite, cluster, metric_check, minimal_overlap_demo, normalization_violation_demo, Linkage,
    Sampler,
};
use mid_core::overlap::{build, random_instance, BuildStats, SideInfo};
use mid_core::toylab::{
    anchors, apriori_probability, bounded_complexity, candidate_family, coding_suite, density_check, dominance_check,
    emax_table, soi_suite, toy_universe, Budget, MACHINE_ID,
};
use mid_core::{canonicalize, ByteString, Compressor, ExternalCommand, SizeCache};

use crate::args::{Cli, Command, Format, LabArgs, LabOp, LinkageArg, Suite};
use crate::output::{emit, Envelope};
use crate::Usage;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

struct RunContext {
    compressor: Compressor,
    cache: Option<(PathBuf, Arc<SizeCache>)>,
    seed: u64,
    format: Option<Format>,
    out: Option<PathBuf>,
}

impl RunContext {
    fn envelope<T: Serialize>(&self, command: &str, budgets: BTreeMap<String, Value>, result: T) -> Envelope<T> {
        Envelope {
            tool: "mid",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            compressor: self.compressor.profile().id.clone(),
            seed: self.seed,
            budgets,
            result,
        }
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        emit(self.out.as_deref(), text)
    }

    fn emit_json<T: Serialize>(&self, env: &Envelope<T>) -> anyhow::Result<()> {
        if self.format(Format::Json) == Format::Csv {
            return Err(usage(format!(
                "csv output is only available for `matrix`, not `{}`",
                env.command
            )));
        }
        self.emit(&env.to_json()?)
    }
}

fn budgets<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

fn compressor(choice: &str, timeout_ms: u64) -> anyhow::Result<Compressor> {
    if choice == "builtin" {
        return Ok(Compressor::builtin());
    }
    let Some(cmd) = choice.strip_prefix("ext:") else {
        return Err(usage(format!(
            "unknown compressor `{choice}`; use `builtin` or `ext:<command>`"
        )));
    };
    let cmd = ExternalCommand::parse(cmd)?.with_timeout(timeout_ms);
    Ok(Compressor::external(cmd)?)
}

pub fn run(cli: Cli) -> anyhow::Result<u8> {
    let g = cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let mut comp = compressor(&g.compressor, g.timeout_ms)?;
    let cache = match &g.cache {
        Some(path) => {
            let cache = Arc::new(SizeCache::load(path).with_context(|| format!("reading cache {}", path.display()))?);
            comp = comp.with_cache(cache.clone());
            Some((path.clone(), cache))
        }
        None => None,
    };
    let ctx = RunContext {
        compressor: comp,
        cache,
        seed: g.seed,
        format: g.format,
        out: g.out,
    };
    let code = match cli.command {
        Command::Matrix { paths, scheme } => matrix(&ctx, &paths, &scheme)?,
        Command::List { paths, scheme } => list(&ctx, &paths, &scheme)?,
        Command::Check {
            suite,
            trials,
            n,
            scheme,
            min_len,
            max_len,
        } => check(&ctx, suite, trials, n, &scheme, min_len, max_len)?,
        Command::Lab(args) => lab(&ctx, &args)?,
        Command::Cluster { paths, linkage, scheme } => cluster_cmd(&ctx, &paths, linkage, &scheme)?,
    };
    if let Some((path, cache)) = &ctx.cache {
        cache
            .save(path)
            .with_context(|| format!("writing cache {}", path.display()))?;
    }
    Ok(code)
}

fn read_files(paths: &[PathBuf]) -> anyhow::Result<Vec<(String, ByteString)>> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            Ok((p.display().to_string(), ByteString::new(bytes)))
        })
        .collect()
}

fn pair_scheme(s: &str) -> anyhow::Result<PairScheme> {
    s.parse().map_err(|e: mid_core::Error| usage(e.to_string()))
}

fn build_matrix(ctx: &RunContext, paths: &[PathBuf], scheme: &str) -> anyhow::Result<DistanceMatrix> {
    if paths.len() < 2 {
        return Err(usage(format!("need at least 2 files, got {}", paths.len())));
    }
    let scheme = pair_scheme(scheme)?;
    let corpus = read_files(paths)?;
    Ok(distance_matrix(&corpus, scheme, &ctx.compressor)?)
}

fn matrix(ctx: &RunContext, paths: &[PathBuf], scheme: &str) -> anyhow::Result<u8> {
    let m = build_matrix(ctx, paths, scheme)?;
    let env = ctx.envelope("matrix", budgets([("files", json!(paths.len()))]), &m);
    match ctx.format(Format::Json) {
        Format::Json => ctx.emit(&env.to_json()?)?,
        Format::Csv => ctx.emit(&(env.header() + &m.to_csv()?))?,
        Format::Text => {
            let width = m.labels.iter().map(String::len).max().unwrap_or(0);
            let mut s = env.header();
            for (i, label) in m.labels.iter().enumerate() {
                s.push_str(&format!("{label:<width$}"));
                for j in 0..m.size() {
                    s.push_str(&format!(" {:>10.6}", m.get(i, j)));
                }
                s.push('\n');
            }
            ctx.emit(&s)?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ListResult {
    /// Input labels in canonical order; `per_element` indices refer to it.
    elements: Vec<String>,
    report: DistanceReport,
}

fn list(ctx: &RunContext, paths: &[PathBuf], scheme: &str) -> anyhow::Result<u8> {
    let scheme: ListScheme = scheme.parse().map_err(|e: mid_core::Error| usage(e.to_string()))?;
    let mut files = read_files(paths)?;
    files.sort_by(|a, b| a.1.cmp(&b.1));
    let list = canonicalize(files.iter().map(|f| f.1.clone()))?;
    let report = list_distance(&list, scheme, &ctx.compressor)?;
    let result = ListResult {
        elements: files.into_iter().map(|f| f.0).collect(),
        report,
    };
    let env = ctx.envelope("list", budgets([("m", json!(list.m()))]), result);
    if ctx.format(Format::Json) == Format::Text {
        let r = &env.result.report;
        let mut s = env.header();
        s.push_str(&format!("{} {}\n", r.scheme, r.value));
        for e in &r.per_element {
            s.push_str(&format!("  {} {}\n", env.result.elements[e.index], e.bits));
        }
        return ctx.emit(&s).map(|_| 0);
    }
    ctx.emit_json(&env)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn check(
    ctx: &RunContext,
    suite: Suite,
    trials: usize,
    n: Option<usize>,
    scheme: &str,
    min_len: usize,
    max_len: usize,
) -> anyhow::Result<u8> {
    let src = &ctx.compressor;
    let seed = ctx.seed;
    let (name, pass, result, budget): (&str, bool, Value, BTreeMap<String, Value>) = match suite {
        Suite::Metric => {
            let mut sampler = Sampler::new(seed, min_len, max_len);
            let r = metric_check(&mut sampler, seed, trials, src)?;
            let b = budgets([
                ("trials", json!(trials)),
                ("min_len", json!(min_len)),
                ("max_len", json!(max_len)),
            ]);
            ("metric", r.pass(), serde_json::to_value(&r)?, b)
        }
        Suite::Chain => {
            let mut sampler = Sampler::new(seed, min_len, max_len);
            let r = chain_suite(&mut sampler, seed, trials, src)?;
            let b = budgets([
                ("trials", json!(trials)),
                ("min_len", json!(min_len)),
                ("max_len", json!(max_len)),
            ]);
            ("chain", r.pass, serde_json::to_value(&r)?, b)
        }
        Suite::Additivity => {
            let n = n.unwrap_or(8000);
            let r = additivity_demo(n, seed, src)?;
            (
                "additivity",
                r.pass,
                serde_json::to_value(&r)?,
                budgets([("n", json!(n))]),
            )
        }
        Suite::Normalization => {
            let n = n.unwrap_or(10_000);
            let s = match scheme.parse().map_err(|e: mid_core::Error| usage(e.to_string()))? {
                ListScheme::Normalized(s) => s,
                other => return Err(usage(format!("`{other}` is not a normalized scheme"))),
            };
            let r = normalization_violation_demo(n, s, seed, src)?;
            let b = budgets([("n", json!(n)), ("scheme", json!(NormScheme::id(s)))]);
            ("normalization", r.violation, serde_json::to_value(&r)?, b)
        }
        Suite::MinimalOverlap => {
            let n = n.unwrap_or(8000);
            let r = minimal_overlap_demo(n, seed, src)?;
            (
                "minimal-overlap",
                r.pass,
                serde_json::to_value(&r)?,
                budgets([("n", json!(n))]),
            )
        }
    };
    let env = ctx.envelope(
        &format!("check {name}"),
        budget,
        json!({ "pass": pass, "report": result }),
    );
    if ctx.format(Format::Json) == Format::Text {
        let verdict = if pass { "pass" } else { "FAIL" };
        ctx.emit(&format!("{}{name}: {verdict}\n", env.header()))?;
    } else {
        ctx.emit_json(&env)?;
    }
    Ok(if pass { 0 } else { 1 })
}

fn bits_arg(name: &str, s: &str) -> anyhow::Result<ByteString> {
    ByteString::from_bits(s).map_err(|e| usage(format!("--{name}: {e}")))
}

#[derive(Serialize)]
struct OverlapRun {
    seed: u64,
    vectors: usize,
    stats: Option<BuildStats>,
    error: Option<String>,
    round_trips: usize,
    failures: usize,
}

fn lab(ctx: &RunContext, a: &LabArgs) -> anyhow::Result<u8> {
    let budget = Budget::new(a.l, a.s);
    let mut b = budgets([("machine", json!(MACHINE_ID)), ("L", json!(a.l)), ("S", json!(a.s))]);
    let (name, result, pass): (&str, Value, bool) = match a.op {
        LabOp::Complexity | LabOp::Apriori => {
            budget.validate()?;
            let target = a.target.as_deref().ok_or_else(|| usage("--target is required"))?;
            let x = bits_arg("target", target)?;
            let y = bits_arg("condition", &a.condition)?;
            b.insert("target".into(), json!(target));
            b.insert("condition".into(), json!(a.condition));
            if a.op == LabOp::Complexity {
                let c = bounded_complexity(&x, &y, budget)?;
                ("complexity", json!({ "complexity": c, "absent": c.is_none() }), true)
            } else {
                let p = apriori_probability(&x, &y, budget)?;
                ("apriori", json!({ "probability": p }), true)
            }
        }
        LabOp::Soi | LabOp::Coding => {
            let max_len = a.max_len.unwrap_or(8);
            b.insert("max_len".into(), json!(max_len));
            let (name, r) = if a.op == LabOp::Soi {
                ("soi", soi_suite(max_len, budget)?)
            } else {
                ("coding", coding_suite(max_len, budget)?)
            };
            (name, serde_json::to_value(&r)?, true)
        }
        LabOp::Density | LabOp::Dominance => {
            let max_len = a.max_len.unwrap_or(5);
            let m = a.m.unwrap_or(3);
            b.insert("max_len".into(), json!(max_len));
            b.insert("m".into(), json!(m));
            budget.validate()?;
            let universe = toy_universe(m, max_len);
            let emax = emax_table(&universe, budget)?;
            let resolved = emax.values.values().filter(|v| v.is_some()).count();
            if a.op == LabOp::Density {
                let reports: Vec<_> = anchors(&universe)
                    .iter()
                    .map(|x| density_check(&emax, x, &universe))
                    .collect();
                let pass = reports.iter().all(|r| r.pass);
                let v = json!({ "universe": universe.len(), "resolved": resolved, "pass": pass, "anchors": reports });
                ("density", v, pass)
            } else {
                let reports: Vec<_> = candidate_family(&universe, &emax)
                    .iter()
                    .map(|d| dominance_check(d, &universe, &emax, u32::MAX))
                    .collect();
                let pass = reports.iter().all(|r| r.pass);
                let v =
                    json!({ "universe": universe.len(), "resolved": resolved, "pass": pass, "candidates": reports });
                ("dominance", v, pass)
            }
        }
        LabOp::Overlap => {
            let m = a.m.unwrap_or(2);
            for (k, v) in [
                ("m", json!(m)),
                ("k1", json!(a.k1)),
                ("k2", json!(a.k2)),
                ("instances", json!(a.instances)),
                ("vectors", json!(a.vectors)),
            ] {
                b.insert(k.into(), v);
            }
            b.remove("L");
            b.remove("S");
            b.remove("machine");
            let runs = overlap_runs(ctx.seed, m, a)?;
            let pass = runs.iter().all(|r| r.error.is_none() && r.failures == 0);
            let total: usize = runs.iter().map(|r| r.round_trips).sum();
            (
                "overlap",
                json!({ "pass": pass, "round_trips": total, "instances": runs }),
                pass,
            )
        }
    };
    let env = ctx.envelope(&format!("lab {name}"), b, result);
    if ctx.format(Format::Json) == Format::Text {
        ctx.emit(&format!("{}{}\n", env.header(), serde_json::to_string(&env.result)?))?;
    } else {
        ctx.emit_json(&env)?;
    }
    Ok(if pass { 0 } else { 1 })
}

fn overlap_runs(seed: u64, m: usize, a: &LabArgs) -> anyhow::Result<Vec<OverlapRun>> {
    let mut runs = Vec::with_capacity(a.instances);
    for i in 0..a.instances as u64 {
        let s = seed.wrapping_add(i);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let inst = random_instance(&mut rng, m, a.k1, a.k2, a.vectors)?;
        let mut run = OverlapRun {
            seed: s,
            vectors: inst.vectors.len(),
            stats: None,
            error: None,
            round_trips: 0,
            failures: 0,
        };
        match build(&inst) {
            Err(e) => run.error = Some(e.to_string()),
            Ok(g) => {
                for v in &inst.vectors {
                    for i in 0..m {
                        for k in 0..m {
                            let side = g.encode(v, i, k)?;
                            let side = SideInfo::from_bits(&side.to_bits(&inst), &inst)?;
                            match g.decode(v.get(i), &side) {
                                Ok((w, y)) if w == v && y == v.get(k) => run.round_trips += 1,
                                _ => run.failures += 1,
                            }
                        }
                    }
                }
                run.stats = Some(g.stats().clone());
            }
        }
        runs.push(run);
    }
    Ok(runs)
}

fn cluster_cmd(ctx: &RunContext, paths: &[PathBuf], linkage: LinkageArg, scheme: &str) -> anyhow::Result<u8> {
    let m = build_matrix(ctx, paths, scheme)?;
    let linkage = match linkage {
        LinkageArg::Single => Linkage::Single,
        LinkageArg::Average => Linkage::Average,
        LinkageArg::Complete => Linkage::Complete,
    };
    let d = cluster(&m, linkage)?;
    match ctx.format(Format::Text) {
        Format::Text => ctx.emit(&format!("{}\n", d.newick))?,
        _ => {
            let env = ctx.envelope(
                "cluster",
                budgets([("files", json!(paths.len())), ("scheme", json!(m.scheme.id()))]),
                &d,
            );
            ctx.emit_json(&env)?
        }
    }
    Ok(0)
}
