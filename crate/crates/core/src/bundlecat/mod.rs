//! Concrete bundles on quadrics as graded modules.

mod catalog;
mod expr;
mod mf;
mod schur;
mod ses;

pub use catalog::{
    carter_lusztig_ses, carter_lusztig_ses_for, koszul_map, psi_module, subsets, tautological_ses, tautological_ses_for, validity_bound, PsiData,
};
pub use expr::BundleExpr;
pub use mf::{matrix_factorization, spinor_modules, u_bundle, ustar, MatrixFactorization};
pub use schur::{schur_dim, SchurSpec};
pub use ses::{ModuleMap, PieceRanks, ShortExactSequenceSpec};

#[cfg(test)]
mod tests;
