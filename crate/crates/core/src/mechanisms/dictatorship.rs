use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Mechanism, MechanismId};
use crate::mechanisms::rp::{check_orders, serial_pick};
use crate::profile::{AssignmentMatrix, Matching, PreferenceOrder, PreferenceProfile, Provenance};
use crate::rational::Rational;
use crate::{Error, Result};

/// Agents pick in `priority` order, each taking her top remaining item.
pub fn serial_dictatorship(prefs: &PreferenceProfile, priority: &[usize]) -> Result<Matching> {
    sd_orders(prefs.orders(), priority)
}

fn sd_orders(prefs: &[PreferenceOrder], priority: &[usize]) -> Result<Matching> {
    check_orders(prefs)?;
    if priority.len() != prefs.len() || !crate::perm::is_permutation(priority) {
        return Err(Error::Shape(format!(
            "priority {priority:?} is not a permutation of the {} agents",
            prefs.len()
        )));
    }
    let rankings: Vec<Vec<usize>> = prefs.iter().map(|o| o.ranking().to_vec()).collect();
    Ok(Matching::new_unchecked(serial_pick(&rankings, priority)))
}

/// Matching chosen when `dictator` dictates: she takes her top item and the
/// other agents, in ascending index, take the remaining items in the order
/// they appear in her ranking.
fn dictated(prefs: &[PreferenceOrder], dictator: usize) -> Vec<usize> {
    let ranking = prefs[dictator].ranking();
    let mut got = vec![0; prefs.len()];
    got[dictator] = ranking[0];
    let others = (0..prefs.len()).filter(|&a| a != dictator);
    for (agent, &item) in others.zip(&ranking[1..]) {
        got[agent] = item;
    }
    got
}

/// Uniform mixture over the `n` dictated matchings.
pub fn random_dictatorial(prefs: &PreferenceProfile) -> AssignmentMatrix {
    rd_orders(prefs.orders())
}

fn rd_orders(prefs: &[PreferenceOrder]) -> AssignmentMatrix {
    let n = prefs.len();
    let share = Rational::new(BigInt::one(), BigInt::from(n));
    let mut p = vec![vec![Rational::zero(); n]; n];
    for d in 0..n {
        for (agent, item) in dictated(prefs, d).into_iter().enumerate() {
            p[agent][item] += &share;
        }
    }
    AssignmentMatrix::new_unchecked(p, Provenance::Exact)
}

/// Serial dictatorship with a fixed priority order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerialDictatorship {
    pub priority: Vec<usize>,
}

impl Mechanism for SerialDictatorship {
    type Strategy = PreferenceOrder;

    fn id(&self) -> MechanismId {
        MechanismId::SerialDictatorship(self.priority.clone())
    }

    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix> {
        Ok(sd_orders(profile, &self.priority)?.to_matrix())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomDictatorial;

impl Mechanism for RandomDictatorial {
    type Strategy = PreferenceOrder;

    fn id(&self) -> MechanismId {
        MechanismId::RandomDictatorial
    }

    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix> {
        check_orders(profile)?;
        Ok(rd_orders(profile))
    }

    /// Her report matters only when she dictates, and then only its top item:
    /// the best reply puts a most valuable item first (smallest index among
    /// ties) and the rest ascending.
    fn best_strict_order(
        &self,
        profile: &[PreferenceOrder],
        agent: usize,
        truth: &[Rational],
    ) -> Option<Result<(PreferenceOrder, Rational)>> {
        if let Err(e) = check_orders(profile) {
            return Some(Err(e));
        }
        let n = profile.len();
        let best_item = (0..n).fold(0, |b, j| if truth[j] > truth[b] { j } else { b });
        let order = PreferenceOrder::identity(n).with_top(best_item);
        let mut prefs = profile.to_vec();
        prefs[agent] = order.clone();
        let row = rd_orders(&prefs).row(agent).to_vec();
        Some(Ok((order, super::dot(&row, truth))))
    }
}
