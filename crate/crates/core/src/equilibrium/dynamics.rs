use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{best_response, check_profile, verify_pure_nash, Budget, DeviationSpace, EquilibriumReport};
use crate::mechanisms::{dot, Mechanism};
use crate::profile::ValuationProfile;
use crate::rational::Rational;
use crate::Result;

/// Order in which agents get to move within a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentOrder {
    RoundRobin,
    /// A fresh shuffle of the agents for every pass.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrdOutcome<S> {
    pub profile: Vec<S>,
    /// A full pass changed nothing.
    pub converged: bool,
    /// Passes run.
    pub iterations: usize,
    /// Strategy replacements made.
    pub moves: usize,
    /// Exact re-verification of the final profile, present when converged.
    pub report: Option<EquilibriumReport<S>>,
}

/// Lets agents switch to a best response whenever it strictly improves on
/// their current utility, for at most `max_iters` passes.
pub fn best_response_dynamics<M: Mechanism>(
    mech: &M,
    truth: &ValuationProfile,
    init: &[M::Strategy],
    space: &DeviationSpace<M::Strategy>,
    max_iters: usize,
    order: AgentOrder,
    budget: &Budget,
) -> Result<BrdOutcome<M::Strategy>> {
    check_profile(truth, init)?;
    let n = init.len();
    let mut profile = init.to_vec();
    let mut agents: Vec<usize> = (0..n).collect();
    let mut rng = match order {
        AgentOrder::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        AgentOrder::RoundRobin => None,
    };
    let mut converged = false;
    let mut iterations = 0;
    let mut moves = 0;
    while iterations < max_iters {
        iterations += 1;
        if let Some(rng) = rng.as_mut() {
            agents.shuffle(rng);
        }
        let mut changed = false;
        for &agent in &agents {
            let current = dot(&mech.agent_row(&profile, agent)?, truth.row(agent));
            let br = best_response(mech, truth.row(agent), &profile, agent, space, budget)?;
            if br.utility > current {
                profile[agent] = br.strategy;
                changed = true;
                moves += 1;
            }
        }
        if !changed {
            converged = true;
            break;
        }
    }
    let report = if converged {
        Some(verify_pure_nash(mech, truth, &profile, space, &Rational::zero(), budget)?)
    } else {
        None
    };
    Ok(BrdOutcome {
        profile,
        converged,
        iterations,
        moves,
        report,
    })
}
