//! Exact bounded Kolmogorov complexity on a small fixed prefix machine.

mod machine;
mod oracle;
mod source;
mod universe;

pub use machine::{enumerate_programs, run, Instr, Outcome, Programs, COPY_PROGRAM, MACHINE_ID, MAX_ENUMERATION_BITS};
pub use oracle::{
    all_bit_strings, apriori_probability, bounded_complexity, coding_check, coding_suite, for_each_halting, kraft_sum,
    monotonicity_check, prefix_free_check, soi_residual, soi_suite, Budget, MonotonicityReport, OracleTable,
    OutputFilter, PrefixReport, ResidualReport, SoiResidual, TableEntry,
};
pub use source::ToyOracle;
pub use universe::{
    adjacent_hamming, admissible, anchors, candidate_family, density_check, dominance_check, emax_table, minimal_shift,
    toy_universe, DensityReport, DistanceTable, DominanceReport,
};
