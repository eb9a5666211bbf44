//! Exact maximum-weight perfect matching on the complete agent-item graph.
//!
//! Among all maximum-weight matchings the lexicographically smallest
//! assignment vector is returned. The tie-break is folded into the weights:
//! with `L` the common denominator of the weights, `B = n` and
//! `key(mu) = sum_i mu_i * B^(n-1-i)` (the assignment read as a base-`B`
//! number), maximizing the integer objective
//!
//! ```text
//!     B^n * L * W(mu) - key(mu)
//! ```
//!
//! picks the max-welfare matching with the smallest key. Distinct welfare
//! values differ by at least `1/L` and keys lie in `[0, B^n)`, so the
//! tie-break can never override a welfare difference. The objective is solved
//! with the Hungarian method over exact integers.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::ops::{Add, Sub};

use crate::profile::Matching;
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Hungarian method (shortest augmenting paths with potentials) for a square
/// cost matrix. Returns `assignment[row] = column` minimizing total cost.
fn hungarian_min<T>(cost: &[Vec<T>]) -> Vec<usize>
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
{
    let n = cost.len();
    // 1-based rows and columns; index 0 is the virtual root.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        let mut minv: Vec<Option<T>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<T> = None;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1].clone() - u[i0].clone() - v[j].clone();
                if minv[j].as_ref().is_none_or(|m| cur < *m) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("just set");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    let o = owner[j];
                    u[o] = u[o].clone() + delta.clone();
                    v[j] = v[j].clone() - delta.clone();
                } else if let Some(m) = minv[j].as_mut() {
                    *m = m.clone() - delta.clone();
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// Lexicographically smallest maximum-weight perfect matching.
pub fn max_weight_matching(weights: &[Vec<Rational>]) -> Result<Matching> {
    let n = weights.len();
    if n == 0 {
        return Err(Error::Shape("empty weight matrix".into()));
    }
    if let Some(row) = weights.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    let den = rational::common_denominator(weights.iter().flatten());
    let base = BigInt::from(n);
    let big_b = num_traits::pow(base.clone(), n);
    // Minimize the negated objective: cost_ij = j * B^(n-1-i) - B^n * L * w_ij.
    let cost: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let place = num_traits::pow(base.clone(), n - 1 - i);
            (0..n)
                .map(|j| {
                    let scaled = (&weights[i][j] * Rational::from_integer(den.clone())).to_integer();
                    BigInt::from(j) * &place - &big_b * scaled
                })
                .collect()
        })
        .collect();
    // Path sums stay within 2n * max|cost|; use i128 when that fits.
    let max_abs = cost.iter().flatten().map(|c| c.abs()).max().unwrap_or_default();
    let bound = max_abs * BigInt::from(4 * n + 4);
    let assignment = if bound.to_i128().is_some() {
        let small: Vec<Vec<i128>> = cost
            .iter()
            .map(|r| r.iter().map(|c| c.to_i128().expect("bounded")).collect())
            .collect();
        hungarian_min(&small)
    } else {
        hungarian_min(&cost)
    };
    Ok(Matching::new_unchecked(assignment))
}
