//! Checkers for stochastic dominance, envy-freeness, safe strategies and the
//! Probabilistic Serial inequality suite.
//!
//! Every comparison is exact. Reports record how instances were produced so
//! that sampled evidence is never mistaken for an exhaustive proof.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{best_response_dynamics, AgentOrder, Budget, DeviationSpace};
use crate::mechanisms::{dot, probabilistic_serial, Mechanism, ProbabilisticSerial};
use crate::perm::{checked_pow, factorial, next_permutation};
use crate::profile::{Normalization, PreferenceOrder, PreferenceProfile, ValuationProfile};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Default upper bound for integer-grid valuations.
pub const DEFAULT_GRID_MAX: u32 = 1000;

/// A named check and what it found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: String,
    pub instances: usize,
    /// "exhaustive", "explicit" or "sampled".
    pub mode: &'static str,
    pub seed: Option<u64>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub instance: usize,
    pub witness: String,
}

impl PropertyReport {
    fn new(property: impl Into<String>, mode: &'static str, seed: Option<u64>) -> Self {
        PropertyReport {
            property: property.into(),
            instances: 0,
            mode,
            seed,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when the instances cover the whole space checked.
    pub fn is_proof(&self) -> bool {
        self.mode == "exhaustive"
    }

    fn flag(&mut self, instance: usize, witness: String) {
        self.violations.push(Violation { instance, witness });
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} instances ({}), {} violations",
            self.property,
            self.instances,
            self.mode,
            self.violations.len()
        )?;
        if let Some(seed) = self.seed {
            write!(f, ", seed {seed}")?;
        }
        Ok(())
    }
}

fn check_distribution(v: &[Rational], what: &str) -> Result<()> {
    if let Some(x) = v.iter().find(|x| x.is_negative()) {
        return Err(Error::NotADistribution(format!("{what} has negative entry {x}")));
    }
    let s = rational::sum(v);
    if !s.is_one() {
        return Err(Error::NotADistribution(format!("{what} sums to {s}")));
    }
    Ok(())
}

/// First prefix length `k` (1-based) at which `p` falls below `q` along
/// `order`, if any.
fn first_shortfall(order: &PreferenceOrder, p: &[Rational], q: &[Rational]) -> Option<usize> {
    let (mut sp, mut sq) = (Rational::zero(), Rational::zero());
    for (k, &item) in order.ranking().iter().enumerate() {
        sp += &p[item];
        sq += &q[item];
        if sp < sq {
            return Some(k + 1);
        }
    }
    None
}

/// Whether `p` stochastically dominates `q` with respect to `order`: every
/// prefix sum of `p` is at least the matching prefix sum of `q`.
pub fn sd_dominates(order: &PreferenceOrder, p: &[Rational], q: &[Rational]) -> Result<bool> {
    if p.len() != order.len() || q.len() != order.len() {
        return Err(Error::DimensionMismatch {
            expected: order.len(),
            found: if p.len() != order.len() { p.len() } else { q.len() },
        });
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    Ok(first_shortfall(order, p, q).is_none())
}

fn uniform(n: usize) -> Vec<Rational> {
    vec![Rational::new(BigInt::one(), BigInt::from(n)); n]
}

/// Where ordinal strategy profiles come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProfileSource {
    Explicit(Vec<PreferenceProfile>),
    /// `count` profiles of independent uniform strict orders.
    Random { n: usize, count: usize, seed: u64 },
    /// All `(n!)^n` profiles.
    Exhaustive { n: usize },
}

impl ProfileSource {
    fn mode(&self) -> &'static str {
        match self {
            ProfileSource::Explicit(_) => "explicit",
            ProfileSource::Random { .. } => "sampled",
            ProfileSource::Exhaustive { .. } => "exhaustive",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            ProfileSource::Random { seed, .. } => Some(*seed),
            _ => None,
        }
    }

    fn for_each(&self, budget: &Budget, mut f: impl FnMut(usize, &[PreferenceOrder]) -> Result<()>) -> Result<()> {
        match self {
            ProfileSource::Explicit(list) => {
                for (id, p) in list.iter().enumerate() {
                    f(id, p.orders())?;
                }
            }
            ProfileSource::Random { n, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for id in 0..*count {
                    f(id, &random_orders(*n, &mut rng))?;
                }
            }
            ProfileSource::Exhaustive { n } => {
                let orders = all_orders(*n);
                let total = checked_pow(orders.len() as u128, *n);
                if total > budget.profiles {
                    return Err(Error::Capacity {
                        what: format!("exhaustive sweep over {n}-agent profiles"),
                        needed: total,
                        cap: budget.profiles,
                        hint: "use a random profile source".into(),
                    });
                }
                let mut digits = vec![0usize; *n];
                let mut id = 0;
                loop {
                    let profile: Vec<PreferenceOrder> = digits.iter().map(|&d| orders[d].clone()).collect();
                    f(id, &profile)?;
                    id += 1;
                    if !advance(&mut digits, orders.len()) {
                        break;
                    }
                }
            }
        }
        Ok(())
    }
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

fn all_orders(n: usize) -> Vec<PreferenceOrder> {
    let mut out = Vec::new();
    let mut v: Vec<usize> = (0..n).collect();
    loop {
        out.push(PreferenceOrder::new_unchecked(v.clone()));
        if !next_permutation(&mut v) {
            break;
        }
    }
    out
}

/// A uniform strict order over `n` items.
pub fn random_order(n: usize, rng: &mut impl Rng) -> PreferenceOrder {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    PreferenceOrder::new_unchecked(v)
}

pub fn random_orders(n: usize, rng: &mut impl Rng) -> Vec<PreferenceOrder> {
    (0..n).map(|_| random_order(n, rng)).collect()
}

/// Unit-sum valuations: each row draws integers uniformly from `1..=grid`
/// and divides by their sum.
pub fn random_valuations(n: usize, grid: u32, rng: &mut impl Rng) -> ValuationProfile {
    let rows = (0..n)
        .map(|_| {
            let draws: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=grid.max(1))).collect();
            let total: u64 = draws.iter().map(|&d| d as u64).sum();
            draws
                .iter()
                .map(|&d| Rational::new(BigInt::from(d), BigInt::from(total)))
                .collect()
        })
        .collect();
    ValuationProfile::new(rows, Normalization::UnitSum).expect("square by construction")
}

fn labels(profile: &[PreferenceOrder]) -> String {
    profile.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ")
}

/// Ex-ante envy-freeness in stochastic-dominance form: under every profile,
/// each agent's row dominates every other row with respect to her report.
pub fn check_envy_free<M: Mechanism<Strategy = PreferenceOrder>>(
    mech: &M,
    source: &ProfileSource,
    budget: &Budget,
) -> Result<PropertyReport> {
    let mut report = PropertyReport::new(format!("envy-free:{}", mech.id().key()), source.mode(), source.seed());
    source.for_each(budget, |id, profile| {
        report.instances += 1;
        let p = mech.allocate(profile)?;
        for (i, order) in profile.iter().enumerate() {
            for r in (0..profile.len()).filter(|&r| r != i) {
                if let Some(k) = first_shortfall(order, p.row(i), p.row(r)) {
                    report.flag(
                        id,
                        format!("profile [{}]: agent {} envies agent {} at prefix {k}", labels(profile), i + 1, r + 1),
                    );
                }
            }
        }
        Ok(())
    })?;
    Ok(report)
}

/// Opponent profiles searched by [`check_safe_strategy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpponentSpace {
    /// Every combination of strict orders for the other agents.
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

/// Whether playing `strategy` guarantees `agent` a lottery that dominates the
/// uniform one with respect to `true_order`, whatever the others report.
pub fn check_safe_strategy<M: Mechanism<Strategy = PreferenceOrder>>(
    mech: &M,
    agent: usize,
    strategy: &PreferenceOrder,
    true_order: &PreferenceOrder,
    opponents: OpponentSpace,
    budget: &Budget,
) -> Result<PropertyReport> {
    let n = strategy.len();
    if true_order.len() != n || agent >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: true_order.len(),
        });
    }
    let (mode, seed) = match opponents {
        OpponentSpace::Exhaustive => ("exhaustive", None),
        OpponentSpace::Sampled { seed, .. } => ("sampled", Some(seed)),
    };
    let mut report = PropertyReport::new(format!("safe-strategy:{}", mech.id().key()), mode, seed);
    let floor = uniform(n);
    let check = |id: usize, profile: &[PreferenceOrder], report: &mut PropertyReport| -> Result<()> {
        report.instances += 1;
        let row = mech.agent_row(profile, agent)?;
        if let Some(k) = first_shortfall(true_order, &row, &floor) {
            report.flag(
                id,
                format!(
                    "agent {} playing {strategy} against [{}]: prefix {k} below {k}/{n}",
                    agent + 1,
                    labels(profile)
                ),
            );
        }
        Ok(())
    };
    match opponents {
        OpponentSpace::Exhaustive => {
            let orders = all_orders(n);
            let total = checked_pow(factorial(n), n - 1);
            if total > budget.profiles {
                return Err(Error::Capacity {
                    what: "exhaustive opponent profiles".into(),
                    needed: total,
                    cap: budget.profiles,
                    hint: "use sampled opponents".into(),
                });
            }
            let mut digits = vec![0usize; n - 1];
            let mut id = 0;
            loop {
                let mut profile: Vec<PreferenceOrder> = digits.iter().map(|&d| orders[d].clone()).collect();
                profile.insert(agent, strategy.clone());
                check(id, &profile, &mut report)?;
                id += 1;
                if !advance(&mut digits, orders.len()) {
                    break;
                }
            }
        }
        OpponentSpace::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for id in 0..count {
                let mut profile = random_orders(n, &mut rng);
                profile[agent] = strategy.clone();
                check(id, &profile, &mut report)?;
            }
        }
    }
    Ok(report)
}

/// Truthful reporting checked as a safe strategy for every agent and every
/// true order at size `n`.
pub fn check_truthful_safety<M: Mechanism<Strategy = PreferenceOrder>>(
    mech: &M,
    n: usize,
    opponents: OpponentSpace,
    budget: &Budget,
) -> Result<PropertyReport> {
    let mode = match opponents {
        OpponentSpace::Exhaustive => "exhaustive",
        OpponentSpace::Sampled { .. } => "sampled",
    };
    let seed = match opponents {
        OpponentSpace::Sampled { seed, .. } => Some(seed),
        OpponentSpace::Exhaustive => None,
    };
    let mut report = PropertyReport::new(format!("truthful-safe:{}", mech.id().key()), mode, seed);
    for agent in 0..n {
        for order in all_orders(n) {
            let r = check_safe_strategy(mech, agent, &order, &order, opponents, budget)?;
            let base = report.instances;
            report.instances += r.instances;
            report
                .violations
                .extend(r.violations.into_iter().map(|v| Violation { instance: base + v.instance, ..v }));
        }
    }
    Ok(report)
}

/// Exhaustion-time inequality: when `agent` moves `item` to the top of her
/// report, the item's exhaustion time does not drop below a quarter of
/// what it was. Returns the two times when the inequality fails.
pub fn top_move_shortfall(
    profile: &[PreferenceOrder],
    agent: usize,
    deviation: &PreferenceOrder,
) -> Result<Option<(Rational, Rational)>> {
    let item = deviation.top();
    let prefs = PreferenceProfile::new(profile.to_vec())?;
    let (_, t) = probabilistic_serial(&prefs);
    let (_, t_star) = probabilistic_serial(&prefs.with_order(agent, deviation.clone()));
    let before = t.get(item).clone();
    let after = t_star.get(item).clone();
    Ok((after * Rational::from_integer(4.into()) < before).then_some((before, t_star.get(item).clone())))
}

/// Agent-item pairs at a Probabilistic Serial profile where the agent's
/// utility falls below a quarter of `t_j * u_ij`, with both sides.
pub fn equilibrium_floor_shortfalls(
    truth: &ValuationProfile,
    profile: &[PreferenceOrder],
) -> Result<Vec<(usize, usize, Rational, Rational)>> {
    let prefs = PreferenceProfile::new(profile.to_vec())?;
    let (p, t) = probabilistic_serial(&prefs);
    let quarter = Rational::new(BigInt::one(), BigInt::from(4));
    let mut out = Vec::new();
    for i in 0..truth.n() {
        let u = dot(p.row(i), truth.row(i));
        for j in 0..truth.n() {
            let floor = &quarter * t.get(j) * truth.value(i, j);
            if u < floor {
                out.push((i, j, u.clone(), floor));
            }
        }
    }
    Ok(out)
}

/// Positions `j` (1-based) where the `j`-th smallest exhaustion time is
/// below `j/n`.
pub fn exhaustion_floor_shortfalls(profile: &[PreferenceOrder]) -> Result<Vec<usize>> {
    let prefs = PreferenceProfile::new(profile.to_vec())?;
    let n = profile.len();
    let (_, t) = probabilistic_serial(&prefs);
    Ok(t.sorted()
        .iter()
        .enumerate()
        .filter(|(k, tk)| **tk < Rational::new(BigInt::from(k + 1), BigInt::from(n)))
        .map(|(k, _)| k + 1)
        .collect())
}

/// Where the suite draws its instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuiteSource {
    /// Each instance: uniform valuations on the integer grid, an independent
    /// profile of strict orders and one sampled (agent, top-moving
    /// deviation) pair, with `n` uniform in `nmin..=nmax`.
    Random {
        count: usize,
        seed: u64,
        nmin: usize,
        nmax: usize,
    },
    /// Valuations with a strategy profile; the deviation checks run over
    /// every agent and item.
    Explicit(Vec<(ValuationProfile, PreferenceProfile)>),
}

/// Outcome of [`ps_bounds_suite`], one report per check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    /// Exhaustion time after a top move is at least a quarter of before.
    pub top_move: PropertyReport,
    /// Utility floor at verified equilibria.
    pub equilibrium_floor: PropertyReport,
    /// Sorted exhaustion times dominate `j/n`.
    pub exhaustion_floor: PropertyReport,
    /// A truthful report's lottery dominates the uniform one.
    pub uniform_dominance: PropertyReport,
    /// Instances whose dynamics produced a verified equilibrium.
    pub equilibria_checked: usize,
}

impl SuiteReport {
    pub fn checks(&self) -> [&PropertyReport; 4] {
        [&self.top_move, &self.equilibrium_floor, &self.exhaustion_floor, &self.uniform_dominance]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|r| r.passed())
    }
}

/// Iterations allowed to dynamics that look for equilibria in the suite.
pub const SUITE_BRD_PASSES: usize = 50;

/// Runs the four Probabilistic Serial checks on every instance.
///
/// The equilibrium check needs verified equilibria: for each instance the
/// suite runs best-response dynamics from the truthful profile and checks
/// the floor only when the result is re-verified as an exact equilibrium.
pub fn ps_bounds_suite(source: &SuiteSource, budget: &Budget) -> Result<SuiteReport> {
    let (mode, seed) = match source {
        SuiteSource::Random { seed, .. } => ("sampled", Some(*seed)),
        SuiteSource::Explicit(_) => ("explicit", None),
    };
    let mut report = SuiteReport {
        top_move: PropertyReport::new("top-move-exhaustion", mode, seed),
        equilibrium_floor: PropertyReport::new("equilibrium-utility-floor", mode, seed),
        exhaustion_floor: PropertyReport::new("exhaustion-time-floor", mode, seed),
        uniform_dominance: PropertyReport::new("truthful-uniform-dominance", mode, seed),
        equilibria_checked: 0,
    };
    let run = |id: usize,
                   truth: &ValuationProfile,
                   profile: &[PreferenceOrder],
                   pairs: &[(usize, PreferenceOrder)],
                   report: &mut SuiteReport|
     -> Result<()> {
        let n = profile.len();
        let prefs = PreferenceProfile::new(profile.to_vec())?;
        let (p, _) = probabilistic_serial(&prefs);

        report.top_move.instances += 1;
        for (agent, dev) in pairs {
            if let Some((before, after)) = top_move_shortfall(profile, *agent, dev)? {
                report.top_move.flag(
                    id,
                    format!(
                        "profile [{}], agent {} plays {dev}: time of item {} drops {before} -> {after}",
                        labels(profile),
                        agent + 1,
                        dev.top() + 1
                    ),
                );
            }
        }

        report.exhaustion_floor.instances += 1;
        for j in exhaustion_floor_shortfalls(profile)? {
            report
                .exhaustion_floor
                .flag(id, format!("profile [{}]: sorted time {j} below {j}/{n}", labels(profile)));
        }

        report.uniform_dominance.instances += 1;
        let floor = uniform(n);
        for (i, order) in profile.iter().enumerate() {
            if let Some(k) = first_shortfall(order, p.row(i), &floor) {
                report.uniform_dominance.flag(
                    id,
                    format!("profile [{}]: agent {} prefix {k} below {k}/{n}", labels(profile), i + 1),
                );
            }
        }

        report.equilibrium_floor.instances += 1;
        let start = truth.induced_profile().into_orders();
        let brd = best_response_dynamics(
            &ProbabilisticSerial,
            truth,
            &start,
            &DeviationSpace::AllStrictOrders,
            SUITE_BRD_PASSES,
            AgentOrder::RoundRobin,
            budget,
        )?;
        if let Some(eq) = brd.report.filter(|r| r.verified) {
            report.equilibria_checked += 1;
            for (i, j, u, floor) in equilibrium_floor_shortfalls(truth, &eq.profile)? {
                report.equilibrium_floor.flag(
                    id,
                    format!(
                        "equilibrium [{}]: agent {} utility {u} below {floor} for item {}",
                        labels(&eq.profile),
                        i + 1,
                        j + 1
                    ),
                );
            }
        }
        Ok(())
    };

    match source {
        SuiteSource::Random { count, seed, nmin, nmax } => {
            if *nmin == 0 || nmin > nmax {
                return Err(Error::InvalidParameter(format!("bad size range {nmin}..={nmax}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for id in 0..*count {
                let n = rng.gen_range(*nmin..=*nmax);
                let truth = random_valuations(n, DEFAULT_GRID_MAX, &mut rng);
                let profile = random_orders(n, &mut rng);
                let agent = rng.gen_range(0..n);
                let item = rng.gen_range(0..n);
                let dev = random_order(n, &mut rng).with_top(item);
                run(id, &truth, &profile, &[(agent, dev)], &mut report)?;
            }
        }
        SuiteSource::Explicit(list) => {
            for (id, (truth, prefs)) in list.iter().enumerate() {
                if truth.n() != prefs.n() {
                    return Err(Error::DimensionMismatch {
                        expected: truth.n(),
                        found: prefs.n(),
                    });
                }
                let n = prefs.n();
                let pairs: Vec<(usize, PreferenceOrder)> = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| (i, prefs.order(i).with_top(j)))
                    .collect();
                run(id, truth, prefs.orders(), &pairs, &mut report)?;
            }
        }
    }
    Ok(report)
}
