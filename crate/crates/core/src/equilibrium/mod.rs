//! Expected utilities, best responses, pure Nash verification and search,
//! and no-regret learning.
//!
//! Every search is exact: utilities are rationals and comparisons never use
//! tolerances. For cardinal mechanisms the strategy space is continuous, so
//! certificates are relative to the searched [`DeviationSpace`] and reports
//! say so.

mod dynamics;
mod enumerate;
mod learning;
mod space;

use std::fmt;

use num_traits::{Signed, Zero};

pub use dynamics::{best_response_dynamics, AgentOrder, BrdOutcome};
pub use enumerate::enumerate_pure_nash;
pub use learning::{
    no_regret_dynamics, no_regret_with_table, Checkpoint, LearnConfig, LearnedDistribution, Learner,
    PayoffTable, DEFAULT_LEARN_MAX_AGENTS,
};
pub use space::{DeviationSpace, DEFAULT_GRID};

use crate::mechanisms::{dot, Mechanism, Report};
use crate::profile::ValuationProfile;
use crate::rational::Rational;
use crate::welfare::social_welfare;
use crate::{Error, Result};

/// Caps on exhaustive work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Deviations evaluated by one best-response search.
    pub evaluations: u128,
    /// Strategy profiles visited by enumeration or tabulated for learning.
    pub profiles: u128,
}

pub const DEFAULT_EVALUATION_BUDGET: u128 = 1_000_000;
/// `(4!)^4`: full enumeration up to four agents.
pub const DEFAULT_PROFILE_BUDGET: u128 = 331_776;

impl Default for Budget {
    fn default() -> Self {
        Budget {
            evaluations: DEFAULT_EVALUATION_BUDGET,
            profiles: DEFAULT_PROFILE_BUDGET,
        }
    }
}

/// `E[u_i(M_i(s))]` under the agent's true values.
pub fn expected_utility<M: Mechanism>(
    mech: &M,
    truth_row: &[Rational],
    profile: &[M::Strategy],
    agent: usize,
) -> Result<Rational> {
    if truth_row.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: profile.len(),
            found: truth_row.len(),
        });
    }
    if agent >= profile.len() {
        return Err(Error::InvalidParameter(format!(
            "agent {} out of range for {} agents",
            agent + 1,
            profile.len()
        )));
    }
    Ok(dot(&mech.agent_row(profile, agent)?, truth_row))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponse<S> {
    pub strategy: S,
    pub utility: Rational,
    /// Size of the space searched.
    pub evaluations: u128,
}

/// Argmax of the agent's expected utility over `space`, holding the other
/// reports fixed. Ties go to the smallest strategy.
pub fn best_response<M: Mechanism>(
    mech: &M,
    truth_row: &[Rational],
    profile: &[M::Strategy],
    agent: usize,
    space: &DeviationSpace<M::Strategy>,
    budget: &Budget,
) -> Result<BestResponse<M::Strategy>> {
    let n = profile.len();
    let size = space.size(n);
    if size > budget.evaluations {
        return Err(Error::Capacity {
            what: format!("best response over {space}"),
            needed: size,
            cap: budget.evaluations,
            hint: "narrow the deviation space or raise the evaluation budget".into(),
        });
    }
    if truth_row.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: truth_row.len(),
        });
    }
    if matches!(space, DeviationSpace::AllStrictOrders) {
        if let Some(fast) = mech.best_strict_order(profile, agent, truth_row) {
            let (strategy, utility) = fast?;
            return Ok(BestResponse {
                strategy,
                utility,
                evaluations: size,
            });
        }
    }
    let mut candidates = space.candidates(&profile[agent], n, &mech.id().to_string())?;
    candidates.sort();
    candidates.dedup();
    let mut trial = profile.to_vec();
    let mut best: Option<(Rational, M::Strategy)> = None;
    for c in candidates {
        trial[agent] = c;
        let u = expected_utility(mech, truth_row, &trial, agent)?;
        if best.as_ref().is_none_or(|(b, _)| u > *b) {
            best = Some((u, trial[agent].clone()));
        }
    }
    let (utility, strategy) = best.ok_or_else(|| {
        Error::InvalidParameter(format!("deviation space {space} is empty"))
    })?;
    Ok(BestResponse {
        strategy,
        utility,
        evaluations: size,
    })
}

/// A profitable unilateral deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation<S> {
    pub agent: usize,
    pub strategy: S,
    pub gain: Rational,
}

/// A strategy profile with the evidence for (or against) it being an
/// `epsilon`-approximate pure Nash equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumReport<S> {
    pub profile: Vec<S>,
    pub verified: bool,
    /// Description of the per-agent deviation space searched.
    pub space: String,
    /// True when the space is the agent's full strategy set.
    pub exhaustive: bool,
    /// Largest improvement any single agent can get; never negative.
    pub max_gain: Rational,
    pub gains: Vec<Rational>,
    pub epsilon: Rational,
    pub welfare: Rational,
    pub witness: Option<Deviation<S>>,
    pub evaluations: u128,
}

impl<S: Report> EquilibriumReport<S> {
    /// One line saying what the certificate covers.
    pub fn certification(&self) -> String {
        let scope = if self.exhaustive {
            format!("exact over {}", self.space)
        } else {
            format!("relative to {} only", self.space)
        };
        if self.epsilon.is_zero() {
            scope
        } else {
            format!("{scope}, epsilon {}", crate::rational::format_rational(&self.epsilon))
        }
    }
}

impl<S: Report> fmt::Display for EquilibriumReport<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.profile.iter().map(Report::label).collect();
        write!(
            f,
            "profile [{}] verified={} max_gain={} welfare={} ({})",
            labels.join(" "),
            self.verified,
            self.max_gain,
            self.welfare,
            self.certification()
        )?;
        if let Some(w) = &self.witness {
            write!(
                f,
                "; agent {} gains {} by {}",
                w.agent + 1,
                w.gain,
                w.strategy.label()
            )?;
        }
        Ok(())
    }
}

pub(crate) fn check_profile<S>(truth: &ValuationProfile, profile: &[S]) -> Result<()> {
    if truth.n() != profile.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.n(),
            found: profile.len(),
        });
    }
    Ok(())
}

/// Runs a best-response search for every agent. Verified iff no agent gains
/// more than `epsilon`; the witness is the first agent with the largest gain.
pub fn verify_pure_nash<M: Mechanism>(
    mech: &M,
    truth: &ValuationProfile,
    profile: &[M::Strategy],
    space: &DeviationSpace<M::Strategy>,
    epsilon: &Rational,
    budget: &Budget,
) -> Result<EquilibriumReport<M::Strategy>> {
    check_profile(truth, profile)?;
    if epsilon.is_negative() {
        return Err(Error::InvalidParameter("epsilon must be nonnegative".into()));
    }
    let p = mech.allocate(profile)?;
    let welfare = social_welfare(truth, &p)?;
    let mut gains = Vec::with_capacity(profile.len());
    let mut witness: Option<Deviation<M::Strategy>> = None;
    let mut evaluations = 0;
    for agent in 0..profile.len() {
        let current = dot(p.row(agent), truth.row(agent));
        let br = best_response(mech, truth.row(agent), profile, agent, space, budget)?;
        evaluations += br.evaluations;
        let gain = &br.utility - &current;
        let gain = if gain.is_positive() { gain } else { Rational::zero() };
        if gain.is_positive() && witness.as_ref().is_none_or(|w| gain > w.gain) {
            witness = Some(Deviation {
                agent,
                strategy: br.strategy,
                gain: gain.clone(),
            });
        }
        gains.push(gain);
    }
    let max_gain = gains.iter().max().cloned().unwrap_or_else(Rational::zero);
    let verified = max_gain <= *epsilon;
    Ok(EquilibriumReport {
        profile: profile.to_vec(),
        verified,
        space: space.to_string(),
        exhaustive: space.is_exhaustive::<M::Strategy>(),
        max_gain,
        gains,
        epsilon: epsilon.clone(),
        welfare,
        witness: if verified { None } else { witness },
        evaluations,
    })
}
