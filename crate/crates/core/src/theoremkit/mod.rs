//! Two routes to `H^i(Q_n, D_1) = 0` for `i > 0`: a direct computation of
//! `Ext^i(F_*O, F_*O)` and a replayable certificate for the vanishing
//! argument.

mod certificate;
mod complex;
mod derivation;
mod interval;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use certificate::{
    apply, concludes, frobenius_complex_name, frobenius_sheaf, replay, AxiomRef, Certificate, Failure, Node,
    NodeKind, Rule, RuleFailure, Statement, Status, Target,
};
pub use complex::{
    box_table, hyper_vanish, hyper_vanish_above, scale_table, sum_tables, truncation_triangle, ComplexSpec,
    ComplexTerm, Sheaf, TriangleVerdict, Verdict,
};
pub use derivation::{paper_certificate, paper_certificate_with, TARGET};
pub use interval::{kunneth_interval, les_bounds, les_bounds_with, serre_interval, Feasibility, LesMap, LesOutcome, RankHint};

use crate::cohomeng::{sheaf_cohomology_with, CohTable, EngineConfig};
use crate::error::{QdError, Result};
use crate::grmod::pushforward::pushforward_module;
use crate::polyring::RingSpec;

pub const ENGINE_VERSION: &str = concat!("qd-core ", env!("CARGO_PKG_VERSION"));

/// Default resource guard: largest prime per dimension.
pub fn within_budget(n: usize, p: u32) -> bool {
    match n {
        1 | 2 => p <= 13,
        3 => p <= 5,
        4 => p <= 3,
        _ => false,
    }
}

fn check_budget(n: usize, p: u32, force: bool) -> Result<()> {
    RingSpec::quadric(n, p)?;
    if force || within_budget(n, p) {
        Ok(())
    } else {
        Err(QdError::BudgetExceeded { n, p })
    }
}

/// `h^i(Q_n, F^*F_*O ⊗ ω^{1-p})`, which is `Ext^i(F_*O, F_*O)`.
pub fn oracle_ext_table(n: usize, p: u32) -> Result<CohTable> {
    check_budget(n, p, false)?;
    oracle_ext_table_with(n, p, &EngineConfig::from_env())
}

/// As [`oracle_ext_table`] without the budget guard.
pub fn oracle_ext_table_with(n: usize, p: u32, cfg: &EngineConfig) -> Result<CohTable> {
    let ring = RingSpec::quadric(n, p)?;
    let m = pushforward_module(&ring)?.frobenius_pullback();
    sheaf_cohomology_with(&m, (n as i32) * (p as i32 - 1), cfg)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Oracle,
    Paper,
    #[default]
    Both,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub route: Route,
    pub engine: EngineConfig,
    /// Run outside the budget table.
    pub force: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<CohTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The failure was an exhausted bound.
    #[serde(default)]
    pub bound_exhausted: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateResult {
    pub certificate: Certificate,
    /// Rule nodes replayed by the verifier, or the replay error.
    pub replay: std::result::Result<usize, String>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub n: usize,
    pub p: u32,
    pub route: Route,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateResult>,
    /// Both routes ran and neither contradicts the other.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    pub pass: bool,
    pub diagnostics: Vec<String>,
    pub engine_version: String,
}

impl TheoremReport {
    pub fn oracle_table(&self) -> Option<&CohTable> {
        self.oracle.as_ref()?.table.as_ref()
    }

    pub fn oracle_vanishes(&self) -> Option<bool> {
        self.oracle_table().map(CohTable::higher_vanish)
    }

    pub fn status(&self) -> Option<Status> {
        self.certificate.as_ref().map(|c| c.certificate.status)
    }

    pub fn bound_exhausted(&self) -> bool {
        self.oracle.as_ref().is_some_and(|o| o.bound_exhausted)
    }
}

/// Both routes with the default options.
pub fn verify_theorem(n: usize, p: u32) -> Result<TheoremReport> {
    verify_theorem_with(
        n,
        p,
        &VerifyOptions {
            engine: EngineConfig::from_env(),
            ..Default::default()
        },
    )
}

pub fn verify_theorem_with(n: usize, p: u32, opts: &VerifyOptions) -> Result<TheoremReport> {
    check_budget(n, p, opts.force)?;
    let mut diagnostics = vec![];
    let run_oracle = opts.route != Route::Paper;
    let run_paper = opts.route != Route::Oracle;

    let oracle = run_oracle.then(|| {
        let t = Instant::now();
        let r = oracle_ext_table_with(n, p, &opts.engine);
        let seconds = t.elapsed().as_secs_f64();
        match r {
            Ok(table) => OracleResult {
                table: Some(table),
                error: None,
                bound_exhausted: false,
                seconds,
            },
            Err(e) => OracleResult {
                table: None,
                bound_exhausted: matches!(e, QdError::BoundExhausted(_)),
                error: Some(e.to_string()),
                seconds,
            },
        }
    });
    let certificate = if run_paper {
        let t = Instant::now();
        let cert = paper_certificate_with(n, p, &opts.engine)?;
        let seconds = t.elapsed().as_secs_f64();
        let replay = replay(&cert).map_err(|e| e.to_string());
        Some(CertificateResult {
            certificate: cert,
            replay,
            seconds,
        })
    } else {
        None
    };

    let oracle_ok = oracle.as_ref().and_then(|o| o.table.as_ref()).map(CohTable::higher_vanish);
    if let Some(o) = &oracle {
        match (&o.table, &o.error) {
            (Some(t), _) if !t.higher_vanish() => diagnostics.push(format!("oracle table {} has higher cohomology", t.to_json())),
            (_, Some(e)) => diagnostics.push(format!("oracle failed: {e}")),
            _ => {}
        }
    }
    let proved = certificate.as_ref().map(|c| {
        if let Some(f) = &c.certificate.failure {
            diagnostics.push(format!("certificate stopped at {}: {}", f.node, f.reason));
        }
        if let Err(e) = &c.replay {
            diagnostics.push(format!("replay: {e}"));
        }
        c.certificate.status == Status::Proved && c.replay.is_ok()
    });
    let agree = match (&certificate, oracle_ok) {
        (Some(c), Some(v)) => Some(match c.certificate.status {
            Status::Proved => v,
            Status::Contradicted => false,
            Status::Inconclusive => true,
        }),
        _ => None,
    };
    if agree == Some(false) {
        diagnostics.push("the two routes disagree".into());
    }
    let pass = oracle_ok.unwrap_or(run_oracle == false) && proved.unwrap_or(!run_paper) && agree != Some(false);
    Ok(TheoremReport {
        n,
        p,
        route: opts.route,
        oracle,
        certificate,
        agree,
        pass,
        diagnostics,
        engine_version: ENGINE_VERSION.into(),
    })
}

#[cfg(test)]
mod tests;
