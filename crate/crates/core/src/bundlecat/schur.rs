use std::collections::HashMap;

use crate::error::{QdError, Result};

/// A partition `λ` and the rank `r` of the underlying space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SchurSpec {
    pub lambda: Vec<usize>,
    pub rank: usize,
}

impl SchurSpec {
    pub fn new(lambda: Vec<usize>, rank: usize) -> Result<Self> {
        let trimmed: Vec<usize> = lambda.iter().copied().filter(|&x| x > 0).collect();
        let decreasing = lambda.windows(2).all(|w| w[0] >= w[1]);
        if !decreasing || trimmed.len() > rank {
            return Err(QdError::InvalidPartition(lambda, rank));
        }
        Ok(Self { lambda: trimmed, rank })
    }

    pub fn dim(&self) -> u64 {
        let mut memo = HashMap::new();
        count(&self.lambda, self.rank, &mut memo)
    }
}

/// Semistandard tableaux of shape `λ` with entries in `1..=r`: the entries
/// equal to `r` form a horizontal strip `λ/μ`.
fn count(lambda: &[usize], r: usize, memo: &mut HashMap<(Vec<usize>, usize), u64>) -> u64 {
    if lambda.is_empty() {
        return 1;
    }
    if r == 0 || lambda.len() > r {
        return 0;
    }
    let key = (lambda.to_vec(), r);
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let mut total = 0;
    let mut mu = vec![0usize; lambda.len()];
    strips(lambda, 0, &mut mu, r, memo, &mut total);
    memo.insert(key, total);
    total
}

fn strips(
    lambda: &[usize],
    row: usize,
    mu: &mut Vec<usize>,
    r: usize,
    memo: &mut HashMap<(Vec<usize>, usize), u64>,
    total: &mut u64,
) {
    if row == lambda.len() {
        let inner: Vec<usize> = mu.iter().copied().filter(|&x| x > 0).collect();
        *total += count(&inner, r - 1, memo);
        return;
    }
    // μ_row ranges over [λ_{row+1}, λ_row] so that λ/μ is a horizontal strip
    let lo = lambda.get(row + 1).copied().unwrap_or(0);
    for m in lo..=lambda[row] {
        mu[row] = m;
        strips(lambda, row + 1, mu, r, memo, total);
    }
}

pub fn schur_dim(lambda: &[usize], r: usize) -> Result<u64> {
    Ok(SchurSpec::new(lambda.to_vec(), r)?.dim())
}
