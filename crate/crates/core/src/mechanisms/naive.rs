use super::{Mechanism, MechanismId};
use crate::matching::max_weight_matching;
use crate::profile::{AssignmentMatrix, Matching, ValuationProfile};
use crate::rational::Rational;
use crate::Result;

/// Matching that maximizes the sum of reported values, lexicographically
/// smallest among maximizers.
pub fn naive_max_welfare(reports: &ValuationProfile) -> Result<Matching> {
    max_weight_matching(reports.rows())
}

/// Cardinal mechanism: each strategy is a reported valuation row.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveMaxWelfare;

impl Mechanism for NaiveMaxWelfare {
    type Strategy = Vec<Rational>;

    fn id(&self) -> MechanismId {
        MechanismId::NaiveMaxWelfare
    }

    fn allocate(&self, profile: &[Vec<Rational>]) -> Result<AssignmentMatrix> {
        Ok(max_weight_matching(profile)?.to_matrix())
    }
}
