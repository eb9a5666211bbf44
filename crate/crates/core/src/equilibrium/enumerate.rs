use num_traits::{Signed, Zero};

use super::{check_profile, Budget, DeviationSpace, EquilibriumReport};
use crate::mechanisms::{dot, Mechanism};
use crate::profile::ValuationProfile;
use crate::rational::Rational;
use crate::welfare::social_welfare;
use crate::{Error, Result};

/// Mixed-radix index of the profile with agent `skip`'s digit removed.
fn context(digits: &[usize], k: usize, skip: usize) -> usize {
    digits
        .iter()
        .enumerate()
        .filter(|&(a, _)| a != skip)
        .fold(0, |acc, (_, &d)| acc * k + d)
}

fn advance(digits: &mut [usize], k: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < k {
            return true;
        }
        *d = 0;
    }
    false
}

/// Every `epsilon`-approximate pure Nash equilibrium with each agent drawing
/// from `space`, in lexicographic profile order.
///
/// Two sweeps over the profiles: the first records, for every agent and
/// every fixed choice of the others, her best attainable utility; the second
/// keeps the profiles where every agent is within `epsilon` of it.
pub fn enumerate_pure_nash<M: Mechanism>(
    mech: &M,
    truth: &ValuationProfile,
    space: &DeviationSpace<M::Strategy>,
    epsilon: &Rational,
    budget: &Budget,
) -> Result<Vec<EquilibriumReport<M::Strategy>>> {
    let n = truth.n();
    if matches!(space, DeviationSpace::TopM(_)) {
        return Err(Error::InvalidParameter(
            "enumeration needs a space that does not depend on the current strategy".into(),
        ));
    }
    if epsilon.is_negative() {
        return Err(Error::InvalidParameter("epsilon must be nonnegative".into()));
    }
    let k = space.size(n);
    let total = crate::perm::checked_pow(k, n);
    if total > budget.profiles {
        return Err(Error::Capacity {
            what: format!("pure Nash enumeration over ({space})^{n}"),
            needed: total,
            cap: budget.profiles,
            hint: "use best-response dynamics with verification instead".into(),
        });
    }
    let id = mech.id().to_string();
    let mut strategies = match space {
        DeviationSpace::Explicit(list) => list.clone(),
        _ => {
            // Spaces other than top-m ignore the current strategy.
            let seed = space.candidates_seed(n, &id)?;
            space.candidates(&seed, n, &id)?
        }
    };
    strategies.sort();
    strategies.dedup();
    let k = strategies.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let contexts = k.pow(n as u32 - 1);
    let mut best: Vec<Vec<Option<Rational>>> = vec![vec![None; contexts]; n];
    let mut digits = vec![0usize; n];
    let profile_at = |digits: &[usize]| -> Vec<M::Strategy> {
        digits.iter().map(|&d| strategies[d].clone()).collect()
    };

    loop {
        let profile = profile_at(&digits);
        check_profile(truth, &profile)?;
        let p = mech.allocate(&profile)?;
        for (agent, slot) in best.iter_mut().enumerate() {
            let u = dot(p.row(agent), truth.row(agent));
            let b = &mut slot[context(&digits, k, agent)];
            if b.as_ref().is_none_or(|b| u > *b) {
                *b = Some(u);
            }
        }
        if !advance(&mut digits, k) {
            break;
        }
    }

    let mut found = Vec::new();
    let evaluations = 2 * total;
    loop {
        let profile = profile_at(&digits);
        let p = mech.allocate(&profile)?;
        let mut gains = Vec::with_capacity(n);
        for (agent, slot) in best.iter().enumerate() {
            let u = dot(p.row(agent), truth.row(agent));
            let b = slot[context(&digits, k, agent)].as_ref().expect("filled by first sweep");
            let g = b - &u;
            if g > *epsilon {
                break;
            }
            gains.push(if g.is_positive() { g } else { Rational::zero() });
        }
        if gains.len() == n {
            found.push(EquilibriumReport {
                welfare: social_welfare(truth, &p)?,
                max_gain: gains.iter().max().cloned().unwrap_or_else(Rational::zero),
                gains,
                profile,
                verified: true,
                space: space.to_string(),
                exhaustive: space.is_exhaustive::<M::Strategy>(),
                epsilon: epsilon.clone(),
                witness: None,
                evaluations,
            });
        }
        if !advance(&mut digits, k) {
            break;
        }
    }
    Ok(found)
}

impl<S: crate::mechanisms::Report> DeviationSpace<S> {
    /// A placeholder current strategy for spaces that ignore it.
    fn candidates_seed(&self, n: usize, mechanism: &str) -> Result<S> {
        let from_order = S::from_order(crate::profile::PreferenceOrder::identity(n));
        let from_values = || S::from_values(vec![Rational::zero(); n]);
        from_order.or_else(from_values).ok_or_else(|| Error::StrategyKind {
            mechanism: mechanism.to_string(),
            expected: "ordinal or cardinal",
        })
    }
}
