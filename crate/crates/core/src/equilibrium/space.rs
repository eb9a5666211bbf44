use std::fmt;

use num_bigint::BigInt;

use crate::mechanisms::Report;
use crate::perm::{factorial, next_permutation};
use crate::profile::PreferenceOrder;
use crate::rational::Rational;
use crate::{Error, Result};

/// The set of reports searched for one agent's deviations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeviationSpace<S> {
    /// All `n!` strict orders.
    AllStrictOrders,
    /// Permutations of the first `m` positions of the current order; the
    /// tail stays fixed.
    TopM(usize),
    /// Valuation rows with entries in `{0, 1/D, ..., 1}` summing to 1.
    ValueGrid(u32),
    Explicit(Vec<S>),
}

pub const DEFAULT_GRID: u32 = 8;

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).try_fold(1u128, |acc, i| acc.checked_mul(n - i).map(|v| v / (i + 1))).unwrap_or(u128::MAX)
}

impl<S: Report> DeviationSpace<S> {
    /// Number of reports per agent for `n` items.
    pub fn size(&self, n: usize) -> u128 {
        match self {
            DeviationSpace::AllStrictOrders => factorial(n),
            DeviationSpace::TopM(m) => factorial((*m).min(n)),
            DeviationSpace::ValueGrid(d) => {
                if n == 0 {
                    0
                } else {
                    binomial(*d as u128 + n as u128 - 1, n as u128 - 1)
                }
            }
            DeviationSpace::Explicit(list) => list.len() as u128,
        }
    }

    /// Whether the space is the whole strategy set of an agent.
    pub fn is_exhaustive<T: Report>(&self) -> bool {
        matches!(self, DeviationSpace::AllStrictOrders) && T::KIND == "ordinal"
    }

    /// Every report in the space given the agent's current one.
    pub fn candidates(&self, current: &S, n: usize, mechanism: &str) -> Result<Vec<S>> {
        let kind_err = |expected| Error::StrategyKind {
            mechanism: mechanism.to_string(),
            expected,
        };
        match self {
            DeviationSpace::AllStrictOrders => {
                let mut out = Vec::new();
                let mut v: Vec<usize> = (0..n).collect();
                loop {
                    out.push(
                        S::from_order(PreferenceOrder::new_unchecked(v.clone()))
                            .ok_or_else(|| kind_err("ordinal"))?,
                    );
                    if !next_permutation(&mut v) {
                        break;
                    }
                }
                Ok(out)
            }
            DeviationSpace::TopM(m) => {
                let order = current.as_order().ok_or_else(|| kind_err("ordinal"))?;
                let m = (*m).min(n);
                let ranking = order.ranking();
                let mut head: Vec<usize> = ranking[..m].to_vec();
                head.sort_unstable();
                let mut out = Vec::new();
                loop {
                    let mut r = head.clone();
                    r.extend_from_slice(&ranking[m..]);
                    out.push(
                        S::from_order(PreferenceOrder::new_unchecked(r))
                            .ok_or_else(|| kind_err("ordinal"))?,
                    );
                    if !next_permutation(&mut head) {
                        break;
                    }
                }
                Ok(out)
            }
            DeviationSpace::ValueGrid(d) => {
                if *d == 0 {
                    return Err(Error::InvalidParameter("grid denominator must be positive".into()));
                }
                let mut out = Vec::new();
                let mut parts = Vec::with_capacity(n);
                compositions(*d, n, &mut parts, &mut |c| {
                    let row = c
                        .iter()
                        .map(|&k| Rational::new(BigInt::from(k), BigInt::from(*d)))
                        .collect();
                    out.push(row);
                });
                out.into_iter()
                    .map(|row| S::from_values(row).ok_or_else(|| kind_err("cardinal")))
                    .collect()
            }
            DeviationSpace::Explicit(list) => Ok(list.clone()),
        }
    }
}

/// Calls `f` on every way to write `total` as `slots` nonnegative parts, in
/// lexicographic order.
fn compositions(total: u32, slots: usize, parts: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if slots == 0 {
        return;
    }
    if slots == 1 {
        parts.push(total);
        f(parts);
        parts.pop();
        return;
    }
    for k in 0..=total {
        parts.push(k);
        compositions(total - k, slots - 1, parts, f);
        parts.pop();
    }
}

impl<S> fmt::Display for DeviationSpace<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviationSpace::AllStrictOrders => f.write_str("all strict orders"),
            DeviationSpace::TopM(m) => write!(f, "top-{m} permutations"),
            DeviationSpace::ValueGrid(d) => write!(f, "unit-sum value grid with step 1/{d}"),
            DeviationSpace::Explicit(list) => write!(f, "explicit list of {} strategies", list.len()),
        }
    }
}
