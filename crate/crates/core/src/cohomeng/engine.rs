use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::table::CohTable;
use crate::error::{QdError, Result};
use crate::grmod::resolution::{ResolutionData, Resolver};
use crate::grmod::{GradedMap, GradedModulePresentation};
use crate::grmod::{weights_in_degree, Block};

/// Bound controls for the stabilization loop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineConfig {
    /// Starting internal bound; the default is derived from the module.
    pub start_bound: Option<i32>,
    /// Hard cap on escalation.
    pub max_bound: Option<i32>,
}

impl EngineConfig {
    /// Reads `QD_MAX_BOUND` from the environment.
    pub fn from_env() -> Self {
        Self {
            start_bound: None,
            max_bound: std::env::var("QD_MAX_BOUND").ok().and_then(|s| s.trim().parse().ok()),
        }
    }
}

/// `3p + 2n + 6`, raised so that the window covers the presentation's own
/// generator and relation degrees.
pub fn default_bound(m: &GradedModulePresentation) -> i32 {
    let ring = m.ring();
    let base = 3 * ring.modulus() as i32 + 2 * ring.variety_dim() as i32 + 6;
    let top = m
        .relations()
        .source
        .iter()
        .chain(m.generators())
        .map(|g| g.degree)
        .max()
        .unwrap_or(0);
    base.max(top + ring.nvars() as i32 + 2)
}

type Shared = Arc<Mutex<Resolver>>;

fn resolver_cache() -> &'static Mutex<HashMap<u64, (GradedModulePresentation, Shared)>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, (GradedModulePresentation, Shared)>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared incremental resolver, keyed by the presentation.
fn resolver_for(m: &GradedModulePresentation) -> Shared {
    let key = m.fingerprint();
    let mut cache = resolver_cache().lock().expect("cache lock");
    if let Some((stored, r)) = cache.get(&key) {
        if stored == m {
            return r.clone();
        }
    }
    let r = Arc::new(Mutex::new(Resolver::new(m, m.ring().nvars())));
    cache.insert(key, (m.clone(), r.clone()));
    r
}

/// Dimension of `Ext^j_S(M, S(-N))` in degree `t` for `j = 0..=N`.
fn ext_dims(res: &ResolutionData, nvars: usize, p: u32, t: i32) -> Vec<usize> {
    let n = nvars as i32;
    let len = res.maps.len();
    // duals[j] : F_j^* -> F_{j+1}^*
    let duals: Vec<GradedMap> = res.maps.iter().map(|d| d.dual(n)).collect();
    let dual_gens = |j: usize| -> Vec<crate::grmod::Generator> {
        res.free_module(j)
            .iter()
            .map(|g| crate::grmod::Generator::new(n - g.degree, crate::polyring::scale_weight(g.weight, -1)))
            .collect()
    };
    (0..=nvars)
        .map(|j| {
            if j > len {
                return 0;
            }
            let gens = dual_gens(j);
            weights_in_degree(&gens, t, nvars, 1)
                .par_iter()
                .map(|w| {
                    let here = Block::new(&gens, t, *w, nvars, 1);
                    if here.len == 0 {
                        return 0;
                    }
                    let out_rank = if j < len {
                        let next = Block::new(&duals[j].target, t, *w, nvars, 1);
                        duals[j].evaluate_on(&here, &next, p).rank()
                    } else {
                        0
                    };
                    let in_rank = if j >= 1 {
                        let prev = Block::new(&duals[j - 1].source, t, *w, nvars, 1);
                        duals[j - 1].evaluate_on(&prev, &here, p).rank()
                    } else {
                        0
                    };
                    here.len - out_rank - in_rank
                })
                .sum()
        })
        .collect()
}

/// Table from a resolution via graded local duality.
fn table_from(res: &ResolutionData, m: &GradedModulePresentation, d: i32) -> Result<CohTable> {
    let ring = m.ring();
    let nvars = ring.nvars();
    let n = ring.variety_dim();
    let ext = ext_dims(res, nvars, ring.modulus(), -d);
    let mut h = vec![0u64; n + 1];
    let md = m.hilbert(d) as i64;
    let h0 = md - ext[nvars] as i64 + ext[nvars - 1] as i64;
    if h0 < 0 {
        return Err(QdError::NotExact(format!("negative h0 at twist {d}")));
    }
    h[0] = h0 as u64;
    for (i, slot) in h.iter_mut().enumerate().skip(1) {
        *slot = ext[nvars - 1 - i] as u64;
    }
    // local cohomology above the variety dimension must vanish
    if nvars >= n + 2 && ext[..nvars - 1 - n].iter().any(|&v| v != 0) {
        return Err(QdError::NotExact(format!(
            "nonzero Ext below degree {} at twist {d}; module not supported on the variety",
            nvars - 1 - n
        )));
    }
    let mut t = CohTable::exact(n, &h)?;
    t.twist = Some(d);
    t.bound_used = Some(res.bound);
    Ok(t)
}

/// Tables of `M~(d)` at a fixed internal bound, without escalation.
pub fn table_at_bound(m: &GradedModulePresentation, d: i32, bound: i32) -> Result<CohTable> {
    let shared = resolver_for(m);
    let mut r = shared.lock().expect("resolver lock");
    if r.bound() < bound {
        r.extend_to(bound);
    }
    if r.bound() == bound {
        return table_from(r.data(), m, d);
    }
    // a larger bound is cached; rebuild at the requested one
    let mut fresh = Resolver::new(m, m.ring().nvars());
    fresh.extend_to(bound);
    table_from(fresh.data(), m, d)
}

/// `h^i(M~(d))` for every `d` in `twists`, sharing one resolution and one
/// stabilization run.
pub fn sheaf_cohomology_many(
    m: &GradedModulePresentation,
    twists: &[i32],
    cfg: &EngineConfig,
) -> Result<Vec<CohTable>> {
    let mut bound = cfg.start_bound.unwrap_or_else(|| default_bound(m));
    let cap = cfg.max_bound.unwrap_or(bound + 24);
    let shared = resolver_for(m);
    let mut r = shared.lock().expect("resolver lock");
    r.extend_to(bound);
    let mut prev = twists
        .iter()
        .map(|&d| table_from(r.data(), m, d))
        .collect::<Result<Vec<_>>>()?;
    loop {
        let next_bound = bound + 2;
        if next_bound > cap {
            return Err(QdError::BoundExhausted(format!(
                "no stable answer up to internal degree {cap}"
            )));
        }
        r.extend_to(next_bound);
        let cur = twists
            .iter()
            .map(|&d| table_from(r.data(), m, d))
            .collect::<Result<Vec<_>>>()?;
        let same = prev.iter().zip(&cur).all(|(a, b)| a.h == b.h);
        let quiet = r.last_new_degree().is_none_or(|e| e <= bound);
        if same && quiet {
            return Ok(prev
                .into_iter()
                .map(|mut t| {
                    t.bound_used = Some(bound);
                    t
                })
                .collect());
        }
        bound = next_bound;
        prev = cur;
    }
}

pub fn sheaf_cohomology_with(m: &GradedModulePresentation, d: i32, cfg: &EngineConfig) -> Result<CohTable> {
    Ok(sheaf_cohomology_many(m, &[d], cfg)?.remove(0))
}

/// `h^i(M~(d))` with the bound cap taken from `QD_MAX_BOUND`.
pub fn sheaf_cohomology(m: &GradedModulePresentation, d: i32) -> Result<CohTable> {
    sheaf_cohomology_with(m, d, &EngineConfig::from_env())
}

/// Dimensions of `H^0_m(M)_d` and `H^1_m(M)_d`. Both vanish exactly when the
/// degree `d` piece of `M` maps isomorphically onto `H^0(M~(d))`.
pub fn low_local_cohomology(m: &GradedModulePresentation, d: i32, cfg: &EngineConfig) -> Result<[u64; 2]> {
    let bound = sheaf_cohomology_with(m, d, cfg)?.bound_used.unwrap_or_else(|| default_bound(m));
    let shared = resolver_for(m);
    let r = shared.lock().expect("resolver lock");
    let data = if r.bound() == bound {
        r.data().clone()
    } else {
        let mut fresh = Resolver::new(m, m.ring().nvars());
        fresh.extend_to(bound);
        fresh.data().clone()
    };
    let nvars = m.ring().nvars();
    let ext = ext_dims(&data, nvars, m.ring().modulus(), -d);
    Ok([ext[nvars] as u64, ext[nvars - 1] as u64])
}
