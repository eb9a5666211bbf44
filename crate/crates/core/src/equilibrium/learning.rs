use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Budget;
use crate::mechanisms::{Mechanism, Report};
use crate::perm::{checked_pow, factorial, next_permutation};
use crate::profile::{PreferenceOrder, ValuationProfile};
use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Learner {
    /// Play each strategy with probability proportional to its positive
    /// cumulative regret.
    RegretMatching,
    /// Hedge with learning rate `eta` on cumulative payoffs.
    MultiplicativeWeights { eta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnConfig {
    pub rounds: u64,
    pub seed: u64,
    pub learner: Learner,
    /// Largest number of agents accepted.
    pub max_agents: usize,
}

pub const DEFAULT_LEARN_MAX_AGENTS: usize = 5;

impl LearnConfig {
    pub fn new(rounds: u64, seed: u64, learner: Learner) -> Self {
        LearnConfig {
            rounds,
            seed,
            learner,
            max_agents: DEFAULT_LEARN_MAX_AGENTS,
        }
    }
}

/// Mechanism output for every profile of strict orders, as integers over a
/// common denominator. Independent of valuations, so one table serves many
/// instances of the same size.
#[derive(Debug, Clone)]
pub struct PayoffTable<S> {
    n: usize,
    strategies: Vec<S>,
    scale: i64,
    /// `rows[(profile * n + agent) * n + item] / scale`.
    rows: Vec<i64>,
}

impl<S: Report> PayoffTable<S> {
    pub fn build<M: Mechanism<Strategy = S>>(mech: &M, n: usize, budget: &Budget) -> Result<Self> {
        let k = factorial(n);
        let total = checked_pow(k, n);
        if total > budget.profiles {
            return Err(Error::Capacity {
                what: format!("payoff table over (n!)^n profiles for n = {n}"),
                needed: total,
                cap: budget.profiles,
                hint: "learning with full-information feedback tabulates every profile; use fewer agents"
                    .into(),
            });
        }
        let mut strategies = Vec::with_capacity(k as usize);
        let mut v: Vec<usize> = (0..n).collect();
        loop {
            strategies.push(S::from_order(PreferenceOrder::new_unchecked(v.clone())).ok_or_else(
                || Error::StrategyKind {
                    mechanism: mech.id().to_string(),
                    expected: "ordinal",
                },
            )?);
            if !next_permutation(&mut v) {
                break;
            }
        }
        let k = k as usize;
        let total = total as usize;
        let mut scale: i64 = 1;
        let mut rows: Vec<i64> = Vec::with_capacity(total * n * n);
        let mut digits = vec![0usize; n];
        for _ in 0..total {
            let profile: Vec<S> = digits.iter().map(|&d| strategies[d].clone()).collect();
            let p = mech.allocate(&profile)?;
            let mut den = BigInt::from(1);
            for row in p.rows() {
                den = den.lcm(&rational::common_denominator(row));
            }
            let den = den.to_i64().ok_or_else(too_fine)?;
            if scale % den != 0 {
                let grown = scale.lcm(&den);
                let factor = grown / scale;
                for x in rows.iter_mut() {
                    *x = x.checked_mul(factor).ok_or_else(too_fine)?;
                }
                scale = grown;
            }
            for row in p.rows() {
                for v in row {
                    let scaled = (v * Rational::from_integer(scale.into())).to_integer();
                    rows.push(scaled.to_i64().ok_or_else(too_fine)?);
                }
            }
            for d in digits.iter_mut().rev() {
                *d += 1;
                if *d < k {
                    break;
                }
                *d = 0;
            }
        }
        Ok(PayoffTable {
            n,
            strategies,
            scale,
            rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strategies(&self) -> &[S] {
        &self.strategies
    }

    /// Agent's assignment row at the profile with the given strategy indices.
    pub fn row(&self, indices: &[usize]) -> impl Fn(usize) -> Vec<Rational> + '_ {
        let k = self.strategies.len();
        let idx = indices.iter().fold(0, |acc, &d| acc * k + d);
        move |agent| {
            let base = (idx * self.n + agent) * self.n;
            self.rows[base..base + self.n]
                .iter()
                .map(|&x| Rational::new(x.into(), self.scale.into()))
                .collect()
        }
    }
}

fn too_fine() -> Error {
    Error::InvalidParameter("assignment probabilities too fine for the payoff table".into())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub round: u64,
    /// Largest per-agent average regret so far.
    pub max_regret: f64,
    pub average_welfare: f64,
}

/// What the learners played, and how close it is to a coarse correlated
/// equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedDistribution<S> {
    pub strategies: Vec<S>,
    pub rounds: u64,
    /// Each agent's mixed strategy after the last round.
    pub final_weights: Vec<Vec<f64>>,
    /// Empirical frequency of each strategy, per agent.
    pub marginals: Vec<Vec<f64>>,
    /// Play counts of joint profiles, keyed by per-agent strategy index.
    pub joint: BTreeMap<Vec<usize>, u64>,
    /// Best fixed deviation's average advantage over realized play, floored
    /// at 0, per agent.
    pub average_regret: Vec<Rational>,
    pub average_regret_f64: Vec<f64>,
    pub average_welfare: Rational,
    pub checkpoints: Vec<Checkpoint>,
}

impl<S> LearnedDistribution<S> {
    pub fn max_regret(&self) -> Rational {
        self.average_regret.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

/// Tabulates the mechanism and runs [`no_regret_with_table`].
pub fn no_regret_dynamics<M: Mechanism>(
    mech: &M,
    truth: &ValuationProfile,
    config: &LearnConfig,
    budget: &Budget,
) -> Result<LearnedDistribution<M::Strategy>> {
    check_agents(truth.n(), config)?;
    let table = PayoffTable::build(mech, truth.n(), budget)?;
    no_regret_with_table(&table, truth, config)
}

fn check_agents(n: usize, config: &LearnConfig) -> Result<()> {
    if n > config.max_agents {
        return Err(Error::Capacity {
            what: "no-regret learning agents".into(),
            needed: n as u128,
            cap: config.max_agents as u128,
            hint: "raise the agent cap".into(),
        });
    }
    Ok(())
}

fn checkpoint_due(t: u64, rounds: u64) -> bool {
    let mut p = 10;
    while p < t {
        p *= 10;
    }
    t == rounds || t == p
}

/// Every agent learns independently with full-information feedback: after
/// each round she sees the exact payoff of each of her strategies against
/// the realized opponents.
pub fn no_regret_with_table<S: Report>(
    table: &PayoffTable<S>,
    truth: &ValuationProfile,
    config: &LearnConfig,
) -> Result<LearnedDistribution<S>> {
    let n = table.n;
    if truth.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: truth.n(),
        });
    }
    check_agents(n, config)?;
    if config.rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be positive".into()));
    }
    if let Learner::MultiplicativeWeights { eta } = config.learner {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter("eta must be positive and finite".into()));
        }
    }
    let k = table.strategies.len();
    let profiles = table.rows.len() / (n * n);

    // Agent i's utility at profile x is util[x * n + i] / (scale * den[i]).
    let mut den = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for row in truth.rows() {
        let d = rational::common_denominator(row);
        let w: Option<Vec<i128>> = row
            .iter()
            .map(|u| (u * Rational::from_integer(d.clone())).to_integer().to_i128())
            .collect();
        let w = w.filter(|w| w.iter().all(|x| x.unsigned_abs() < 1u128 << 60)).ok_or_else(|| {
            Error::InvalidParameter("valuations too fine for exact regret tracking".into())
        })?;
        den.push(d);
        weights.push(w);
    }
    let mut util = vec![0i128; profiles * n];
    for x in 0..profiles {
        for i in 0..n {
            let base = (x * n + i) * n;
            util[x * n + i] = (0..n).map(|j| table.rows[base + j] as i128 * weights[i][j]).sum();
        }
    }
    let bound = util.iter().map(|u| u.unsigned_abs()).max().unwrap_or(0);
    if bound.checked_mul(config.rounds as u128 * 2).is_none_or(|b| b > i128::MAX as u128) {
        return Err(Error::InvalidParameter("too many rounds for exact regret tracking".into()));
    }
    let unit: Vec<f64> = den
        .iter()
        .map(|d| 1.0 / (table.scale as f64 * d.to_f64().unwrap_or(f64::INFINITY)))
        .collect();
    let stride: Vec<usize> = (0..n).map(|i| k.pow((n - 1 - i) as u32)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut mixed = vec![vec![1.0 / k as f64; k]; n];
    let mut counterfactual = vec![vec![0i128; k]; n];
    let mut realized = vec![0i128; n];
    let mut plays = vec![vec![0u64; k]; n];
    let mut joint: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut checkpoints = Vec::new();
    let mut choice = vec![0usize; n];

    for t in 1..=config.rounds {
        for i in 0..n {
            let r: f64 = rng.gen();
            let mut acc = 0.0;
            choice[i] = k - 1;
            for (s, &p) in mixed[i].iter().enumerate() {
                acc += p;
                if r < acc {
                    choice[i] = s;
                    break;
                }
            }
            plays[i][choice[i]] += 1;
        }
        *joint.entry(choice.clone()).or_insert(0) += 1;
        let x: usize = choice.iter().zip(&stride).map(|(c, s)| c * s).sum();
        for i in 0..n {
            realized[i] += util[x * n + i];
            let others = x - choice[i] * stride[i];
            for (s, cf) in counterfactual[i].iter_mut().enumerate() {
                *cf += util[(others + s * stride[i]) * n + i];
            }
        }
        for i in 0..n {
            match config.learner {
                Learner::RegretMatching => {
                    let pos: Vec<f64> = counterfactual[i]
                        .iter()
                        .map(|&cf| ((cf - realized[i]).max(0)) as f64)
                        .collect();
                    let total: f64 = pos.iter().sum();
                    if total > 0.0 {
                        for (m, p) in mixed[i].iter_mut().zip(&pos) {
                            *m = p / total;
                        }
                    } else {
                        mixed[i].iter_mut().for_each(|m| *m = 1.0 / k as f64);
                    }
                }
                Learner::MultiplicativeWeights { eta } => {
                    let scores: Vec<f64> =
                        counterfactual[i].iter().map(|&cf| eta * cf as f64 * unit[i]).collect();
                    let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let exps: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
                    let total: f64 = exps.iter().sum();
                    for (m, e) in mixed[i].iter_mut().zip(&exps) {
                        *m = e / total;
                    }
                }
            }
        }
        if checkpoint_due(t, config.rounds) {
            let max_regret = (0..n)
                .map(|i| {
                    let best = counterfactual[i].iter().max().copied().unwrap_or(0);
                    (best - realized[i]).max(0) as f64 * unit[i] / t as f64
                })
                .fold(0.0, f64::max);
            let welfare: f64 = (0..n).map(|i| realized[i] as f64 * unit[i]).sum::<f64>() / t as f64;
            checkpoints.push(Checkpoint {
                round: t,
                max_regret,
                average_welfare: welfare,
            });
        }
    }

    let rounds = config.rounds;
    let scale = BigInt::from(table.scale);
    let average_regret: Vec<Rational> = (0..n)
        .map(|i| {
            let best = counterfactual[i].iter().max().copied().unwrap_or(0);
            Rational::new(
                BigInt::from((best - realized[i]).max(0)),
                &scale * &den[i] * BigInt::from(rounds),
            )
        })
        .collect();
    let average_welfare = (0..n).fold(Rational::zero(), |acc, i| {
        acc + Rational::new(BigInt::from(realized[i]), &scale * &den[i] * BigInt::from(rounds))
    });
    Ok(LearnedDistribution {
        strategies: table.strategies.clone(),
        rounds,
        final_weights: mixed,
        marginals: plays
            .iter()
            .map(|p| p.iter().map(|&c| c as f64 / rounds as f64).collect())
            .collect(),
        joint,
        average_regret_f64: average_regret.iter().map(rational::to_f64).collect(),
        average_regret,
        average_welfare,
        checkpoints,
    })
}
