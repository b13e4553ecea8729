//! Sheaf cohomology of presented modules via graded local duality.

mod engine;
mod table;

pub use engine::{
    default_bound, low_local_cohomology, sheaf_cohomology, sheaf_cohomology_many, sheaf_cohomology_with, table_at_bound,
    EngineConfig,
};
pub use table::{euler_char, kunneth_table, line_bundle_table, serre_dual_table, CohTable, Entry};

#[cfg(test)]
mod tests;
