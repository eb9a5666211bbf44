//! Social welfare, optimal matchings and anarchy/stability ratios.

use num_traits::{Signed, Zero};

use crate::matching::max_weight_matching;
use crate::mechanisms::dot;
use crate::profile::{AssignmentMatrix, Matching, ValuationProfile};
use crate::rational::Rational;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WelfareReport {
    pub sw: Rational,
    pub opt: Rational,
    /// `opt / sw`; `None` when `sw` is zero.
    pub ratio: Option<Rational>,
}

impl WelfareReport {
    pub fn new(sw: Rational, opt: Rational) -> Self {
        let ratio = (!sw.is_zero()).then(|| &opt / &sw);
        WelfareReport { sw, opt, ratio }
    }
}

/// Expected welfare `sum_ij p_ij * u_ij` of a lottery under true values.
pub fn social_welfare(truth: &ValuationProfile, p: &AssignmentMatrix) -> Result<Rational> {
    if truth.n() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            found: p.n(),
        });
    }
    Ok(truth
        .rows()
        .iter()
        .zip(p.rows())
        .fold(Rational::zero(), |acc, (u, row)| acc + dot(row, u)))
}

/// Welfare-maximizing matching (lexicographically smallest among optima)
/// and its welfare.
pub fn optimal_matching(truth: &ValuationProfile) -> Result<(Matching, Rational)> {
    let m = max_weight_matching(truth.rows())?;
    let w = m.value(truth);
    Ok((m, w))
}

/// `(PoA, PoS)` on one instance: `opt / min` and `opt / max` over the
/// equilibrium welfares.
pub fn anarchy_ratios(opt: &Rational, equilibrium_welfares: &[Rational]) -> Result<(Rational, Rational)> {
    let (Some(min), Some(max)) = (equilibrium_welfares.iter().min(), equilibrium_welfares.iter().max()) else {
        return Err(Error::UndefinedRatio("no equilibrium welfares given".into()));
    };
    if !min.is_positive() {
        return Err(Error::UndefinedRatio(format!(
            "equilibrium welfare {min} is not positive"
        )));
    }
    Ok((opt / min, opt / max))
}
