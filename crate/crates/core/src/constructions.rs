//! Adversarial instance families and pipelines that run each lower-bound
//! argument against a concrete mechanism.
//!
//! Four families:
//!
//! * **grouped**: `k` groups of `k` agents; group `j` slightly prefers item
//!   `j` and is otherwise near-uniform. After an equilibrium is found, one
//!   member per group who rarely gets her item is switched to caring only
//!   about it. Welfare at the same profile stays at most 3 while the
//!   optimum is at least `k`.
//! * **deterministic**: identical strictly decreasing rows, then a profile
//!   where agent `i` almost only wants item `i - 1`. A deterministic
//!   mechanism stuck at the identity matching loses a factor `n(n-2)/2`.
//! * **stability**: `k` agents want only their own item; the rest split their
//!   value over the first `k` items. Any mechanism with a safe strategy has
//!   every equilibrium welfare at most `1 + k^2/n` against an optimum of `k`.
//! * **unit-range**: everyone values item 1 at 1, and items `2..=k+1` at
//!   `delta^2` (a set of `k` agents) or `delta^3` (everyone else).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::equilibrium::{
    best_response_dynamics, enumerate_pure_nash, verify_pure_nash, AgentOrder, Budget, DeviationSpace,
    EquilibriumReport, DEFAULT_GRID,
};
use crate::mechanisms::{
    Mechanism, MechanismId, NaiveMaxWelfare, ProbabilisticSerial, RandomDictatorial, RandomPriority, Report,
    SerialDictatorship,
};
use crate::profile::{validate_profile, AssignmentMatrix, Normalization, PreferenceOrder, ValuationProfile};
use crate::rational::{format_rational, Rational};
use crate::welfare::{optimal_matching, social_welfare};
use crate::{Error, Result};

fn r(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

fn pow(base: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * base)
}

fn square_root(n: usize) -> Option<usize> {
    let k = (n as f64).sqrt().round() as usize;
    (k * k == n).then_some(k)
}

/// `k^2` agents in `k` groups; members of group `j` value item `j` at
/// `1/n + alpha` and every other item at `1/n - alpha/(n-1)`.
pub fn gen_grouped(k: usize, alpha: &Rational) -> Result<ValuationProfile> {
    if k < 2 {
        return Err(Error::InvalidParameter("need at least 2 groups".into()));
    }
    let n = k * k;
    let ceiling = r(1, (n as u64).pow(3));
    if !alpha.is_positive() || *alpha >= ceiling {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie strictly between 0 and 1/n^3 = {ceiling}, got {alpha}"
        )));
    }
    let base = r(1, n);
    let high = &base + alpha;
    let low = &base - alpha / Rational::from_integer(BigInt::from(n - 1));
    let rows = (0..n)
        .map(|i| (0..n).map(|j| if j == i / k { high.clone() } else { low.clone() }).collect())
        .collect();
    ValuationProfile::new(rows, Normalization::UnitSum)
}

/// Default `alpha = 1/n^4`.
pub fn default_alpha(k: usize) -> Rational {
    r(1, (k as u64 * k as u64).pow(4))
}

/// Swaps in the indicator row of item `j` for the member of group `j` with
/// the smallest probability of item `j` (smallest index on ties). Returns
/// the new profile and the chosen agents.
pub fn derive_grouped_prime(
    u: &ValuationProfile,
    p: &AssignmentMatrix,
) -> Result<(ValuationProfile, Vec<usize>)> {
    let n = u.n();
    let k = square_root(n).ok_or_else(|| Error::InvalidParameter(format!("{n} agents is not a square")))?;
    if p.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.n() });
    }
    let mut rows = u.rows().to_vec();
    let mut chosen = Vec::with_capacity(k);
    for j in 0..k {
        let members = j * k..(j + 1) * k;
        let pick = members.fold(j * k, |b, i| if p.get(i, j) < p.get(b, j) { i } else { b });
        rows[pick] = (0..n).map(|x| if x == j { Rational::one() } else { Rational::zero() }).collect();
        chosen.push(pick);
    }
    Ok((ValuationProfile::new(rows, Normalization::UnitSum)?, chosen))
}

/// How the small values of the deterministic family are laid out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsSchedule {
    /// Step between consecutive tail values of the common row.
    pub step: Rational,
    /// Mass each switched agent spreads over her unwanted items; at most
    /// `1/n^3`.
    pub total: Rational,
}

impl EpsSchedule {
    /// Step `1/n^4`, total `1/n^3`.
    pub fn default_for(n: usize) -> Self {
        let n = n as u64;
        EpsSchedule {
            step: r(1, n.pow(4)),
            total: r(1, n.pow(3)),
        }
    }
}

/// The common row `u` (first entry `1/n + 1/n^3`, rest strictly decreasing
/// in arithmetic steps) and the switched profile `u'`, where agent `i >= 2`
/// values item `i - 1` at `1 - total` and spreads `total` over the other
/// items in strictly decreasing arithmetic steps.
pub fn gen_deterministic(n: usize, schedule: &EpsSchedule) -> Result<(ValuationProfile, ValuationProfile)> {
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 agents".into()));
    }
    let nb = n as u64;
    let cube = r(1, nb.pow(3));
    if !schedule.total.is_positive() || schedule.total > cube {
        return Err(Error::InvalidParameter(format!("total must lie in (0, {cube}]")));
    }
    if !schedule.step.is_positive() {
        return Err(Error::InvalidParameter("step must be positive".into()));
    }
    let first = r(1, nb) + &cube;
    let rest = Rational::one() - &first;
    let m = Rational::from_integer(BigInt::from(n - 1));
    // Tail values c, c - d, ..., c - (n-2)d summing to `rest`.
    let c = &rest / &m + &schedule.step * r(n as u64 - 2, 2);
    let mut row = vec![first.clone()];
    row.extend((0..n - 1).map(|t| &c - &schedule.step * Rational::from_integer(BigInt::from(t))));
    if !(row.windows(2).all(|w| w[0] > w[1]) && row[n - 1].is_positive()) {
        return Err(Error::InvalidParameter(format!(
            "step {} does not give a strictly decreasing positive row",
            schedule.step
        )));
    }
    let u = ValuationProfile::new(vec![row.clone(); n], Normalization::UnitSum)?;

    // Unwanted items get e*(n-1), ..., e*1 with e*(n-1)n/2 = total.
    let e = &schedule.total * r(2, (n as u64 - 1) * nb);
    let mut rows = vec![row];
    for i in 1..n {
        let wanted = i - 1;
        let mut out = Vec::with_capacity(n);
        let mut rank = 0u64;
        for j in 0..n {
            if j == wanted {
                out.push(Rational::one() - &schedule.total);
            } else {
                out.push(&e * Rational::from_integer(BigInt::from(n as u64 - 1 - rank)));
                rank += 1;
            }
        }
        rows.push(out);
    }
    let u_prime = ValuationProfile::new(rows, Normalization::UnitSum)?;
    Ok((u, u_prime))
}

/// Agents `1..=k` value only their own item; agents `k+1..=n` value each of
/// items `1..=k` at `1/k`.
pub fn gen_stability(n: usize, k: usize) -> Result<ValuationProfile> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let share = r(1, k);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < k {
                        if i == j { Rational::one() } else { Rational::zero() }
                    } else if j < k {
                        share.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    ValuationProfile::new(rows, Normalization::UnitSum)
}

/// Default `k = floor(sqrt(n))`, lowered to `n - 1` when needed.
pub fn default_stability_k(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Unit-range profile with `n = k^2`: item 1 is worth 1 to everyone; items
/// `2..=k+1` are worth `delta^2` to agents `1..=k` and `delta^3` to the rest.
pub fn gen_unit_range(k: usize, delta: &Rational) -> Result<ValuationProfile> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let n = k * k;
    if !delta.is_positive() || *delta >= Rational::one() {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if Rational::from_integer(BigInt::from(n)) * pow(delta, 4) <= Rational::one() {
        return Err(Error::InvalidParameter(format!("need n > 1/delta^4 for n = {n}, delta = {delta}")));
    }
    if k + 1 >= n {
        return Err(Error::InvalidParameter("need k + 1 < n so some item is worth 0".into()));
    }
    let d2 = pow(delta, 2);
    let d3 = pow(delta, 3);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match j {
                    0 => Rational::one(),
                    j if j <= k => if i < k { d2.clone() } else { d3.clone() },
                    _ => Rational::zero(),
                })
                .collect()
        })
        .collect();
    ValuationProfile::new(rows, Normalization::UnitRange)
}

/// Smallest `a/10` with `n > 1/delta^4`.
pub fn default_delta(k: usize) -> Option<Rational> {
    let n = Rational::from_integer(BigInt::from(k * k));
    (1..10).map(|a| r(a, 10)).find(|d| &n * pow(d, 4) > Rational::one())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    Grouped { k: usize, alpha: Rational },
    Deterministic { n: usize, schedule: EpsSchedule },
    Stability { n: usize, k: usize },
    UnitRange { k: usize, delta: Rational },
}

impl Family {
    pub fn key(&self) -> &'static str {
        match self {
            Family::Grouped { .. } => "grouped",
            Family::Deterministic { .. } => "deterministic",
            Family::Stability { .. } => "stability",
            Family::UnitRange { .. } => "unit-range",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Family::Grouped { k, .. } | Family::UnitRange { k, .. } => k * k,
            Family::Deterministic { n, .. } | Family::Stability { n, .. } => *n,
        }
    }

    /// The family's profiles: `u` and, where the argument swaps values, `u'`.
    pub fn generate(&self) -> Result<Vec<(String, ValuationProfile)>> {
        Ok(match self {
            Family::Grouped { k, alpha } => vec![("u".into(), gen_grouped(*k, alpha)?)],
            Family::Deterministic { n, schedule } => {
                let (u, up) = gen_deterministic(*n, schedule)?;
                vec![("u".into(), u), ("u'".into(), up)]
            }
            Family::Stability { n, k } => vec![("u".into(), gen_stability(*n, *k)?)],
            Family::UnitRange { k, delta } => vec![("u".into(), gen_unit_range(*k, delta)?)],
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Grouped { k, alpha } => write!(f, "grouped k={k} alpha={alpha}"),
            Family::Deterministic { n, schedule } => {
                write!(f, "deterministic n={n} step={} total={}", schedule.step, schedule.total)
            }
            Family::Stability { n, k } => write!(f, "stability n={n} k={k}"),
            Family::UnitRange { k, delta } => write!(f, "unit-range k={k} delta={delta}"),
        }
    }
}

/// How the pipeline obtains its equilibrium.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Candidate {
    /// Truthful (induced) orders; for cardinal mechanisms, the
    /// construction's own report profile.
    Truthful,
    /// Best-response dynamics from the truthful profile.
    Brd { max_iters: usize, order: AgentOrder },
    /// Every pure equilibrium, by enumeration.
    Enumerate,
    Orders(Vec<PreferenceOrder>),
    Reports(Vec<Vec<Rational>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// Every applicable check holds at a verified equilibrium.
    Confirmed,
    /// Some check failed at a verified equilibrium.
    Violated,
    /// No equilibrium could be certified; nothing is concluded.
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub holds: bool,
}

/// Equilibrium evidence with the strategies rendered as text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquilibriumSummary {
    /// Which valuation profile it was verified under.
    pub under: String,
    pub profile: Vec<String>,
    pub verified: bool,
    pub certification: String,
    pub max_gain: Rational,
    pub welfare: Rational,
}

impl EquilibriumSummary {
    fn from_report<S: Report>(under: &str, r: &EquilibriumReport<S>) -> Self {
        EquilibriumSummary {
            under: under.into(),
            profile: r.profile.iter().map(Report::label).collect(),
            verified: r.verified,
            certification: r.certification(),
            max_gain: r.max_gain.clone(),
            welfare: r.welfare.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionReport {
    pub family: Family,
    pub mechanism: MechanismId,
    pub profiles: Vec<(String, ValuationProfile)>,
    pub equilibria: Vec<EquilibriumSummary>,
    /// Equilibrium welfare under the profile the bound is about; the worst
    /// one when several equilibria were found.
    pub welfare: Option<Rational>,
    /// Best equilibrium welfare, when several were found.
    pub best_welfare: Option<Rational>,
    pub opt: Rational,
    /// `opt / welfare`.
    pub ratio: Option<Rational>,
    /// Lower bound on the ratio implied by the argument, if it applies.
    pub predicted: Option<Rational>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub outcome: Outcome,
}

impl ConstructionReport {
    fn check(&mut self, name: impl Into<String>, holds: bool) {
        self.checks.push(Check { name: name.into(), holds });
    }

    fn settle(mut self) -> Self {
        if self.outcome == Outcome::Confirmed && self.checks.iter().any(|c| !c.holds) {
            self.outcome = Outcome::Violated;
        }
        self
    }

    fn inconclusive(mut self, why: impl Into<String>) -> Self {
        self.outcome = Outcome::Inconclusive(why.into());
        self
    }
}

fn to_inconclusive<T>(res: Result<T>) -> std::result::Result<T, String> {
    res.map_err(|e| match e {
        Error::Capacity { .. } => format!("budget exhausted: {e}"),
        other => other.to_string(),
    })
}

/// Generates the family's profiles, finds and certifies an equilibrium of
/// `mech` on them, and measures welfare, optimum and ratio against the
/// argument's bound. Configuration errors are returned as `Err`; failures to
/// certify an equilibrium produce an inconclusive report.
pub fn verify_construction(
    mech: &MechanismId,
    family: &Family,
    candidate: &Candidate,
    budget: &Budget,
) -> Result<ConstructionReport> {
    let profiles = family.generate()?;
    for (name, p) in &profiles {
        if let Err(v) = validate_profile(p) {
            return Err(Error::InvalidParameter(format!("generated profile {name} is invalid: {v}")));
        }
    }
    let mut report = ConstructionReport {
        family: family.clone(),
        mechanism: mech.clone(),
        opt: Rational::zero(),
        profiles,
        equilibria: Vec::new(),
        welfare: None,
        best_welfare: None,
        ratio: None,
        predicted: None,
        checks: Vec::new(),
        notes: vec![format!("mechanism audited: {mech}")],
        outcome: Outcome::Confirmed,
    };
    report.check("generated profiles pass validation", true);
    match mech {
        MechanismId::ProbabilisticSerial => ordinal(&ProbabilisticSerial, report, candidate, budget),
        MechanismId::RandomPriority => ordinal(&RandomPriority::default(), report, candidate, budget),
        MechanismId::RandomDictatorial => ordinal(&RandomDictatorial, report, candidate, budget),
        MechanismId::SerialDictatorship(priority) => ordinal(
            &SerialDictatorship {
                priority: priority.clone(),
            },
            report,
            candidate,
            budget,
        ),
        MechanismId::NaiveMaxWelfare => cardinal(report, candidate, budget),
    }
}

/// One or more certified equilibria under `u`, or the reason there are none.
fn find_equilibria<M: Mechanism<Strategy = PreferenceOrder>>(
    mech: &M,
    u: &ValuationProfile,
    candidate: &Candidate,
    epsilon: &Rational,
    budget: &Budget,
) -> std::result::Result<Vec<EquilibriumReport<PreferenceOrder>>, String> {
    let all = DeviationSpace::AllStrictOrders;
    let start = |c: &Candidate| -> std::result::Result<Vec<PreferenceOrder>, String> {
        match c {
            Candidate::Orders(o) => Ok(o.clone()),
            _ => Ok(u.induced_profile().into_orders()),
        }
    };
    let found = match candidate {
        Candidate::Reports(_) => return Err("cardinal reports given to an ordinal mechanism".into()),
        Candidate::Enumerate => {
            let list = to_inconclusive(enumerate_pure_nash(mech, u, &all, epsilon, budget))?;
            if list.is_empty() {
                return Err("no pure equilibrium exists in the enumerated space".into());
            }
            list
        }
        Candidate::Brd { max_iters, order } => {
            let init = start(candidate)?;
            let out = to_inconclusive(best_response_dynamics(mech, u, &init, &all, *max_iters, *order, budget))?;
            if !out.converged {
                return Err(format!("best-response dynamics did not converge in {max_iters} passes"));
            }
            match out.report {
                Some(r) if epsilon.is_zero() => vec![r],
                _ => vec![to_inconclusive(verify_pure_nash(mech, u, &out.profile, &all, epsilon, budget))?],
            }
        }
        Candidate::Truthful | Candidate::Orders(_) => {
            let s = start(candidate)?;
            vec![to_inconclusive(verify_pure_nash(mech, u, &s, &all, epsilon, budget))?]
        }
    };
    if let Some(bad) = found.iter().find(|r| !r.verified) {
        return Err(format!(
            "candidate is not an equilibrium: an agent gains {}",
            format_rational(&bad.max_gain)
        ));
    }
    Ok(found)
}

fn ordinal<M: Mechanism<Strategy = PreferenceOrder>>(
    mech: &M,
    mut report: ConstructionReport,
    candidate: &Candidate,
    budget: &Budget,
) -> Result<ConstructionReport> {
    let u = report.profiles[0].1.clone();
    let n = u.n();
    let zero = Rational::zero();
    match report.family.clone() {
        Family::Grouped { k, .. } => {
            let eqs = match find_equilibria(mech, &u, candidate, &zero, budget) {
                Ok(e) => e,
                Err(why) => return Ok(report.inconclusive(why)),
            };
            let s = eqs[0].profile.clone();
            report.equilibria.push(EquilibriumSummary::from_report("u", &eqs[0]));
            let p = mech.allocate(&s)?;
            let (u_prime, chosen) = derive_grouped_prime(&u, &p)?;
            let cap = r(1, k);
            let ok = chosen.iter().enumerate().all(|(j, &i)| *p.get(i, j) <= cap);
            report.check(format!("chosen agents get their group item with probability <= 1/{k}"), ok);
            report.profiles.push(("u'".into(), u_prime.clone()));
            let again = match to_inconclusive(verify_pure_nash(
                mech,
                &u_prime,
                &s,
                &DeviationSpace::AllStrictOrders,
                &zero,
                budget,
            )) {
                Ok(r) => r,
                Err(why) => return Ok(report.inconclusive(why)),
            };
            report.equilibria.push(EquilibriumSummary::from_report("u'", &again));
            if !again.verified {
                return Ok(report.inconclusive("the same profile is not an equilibrium under u'"));
            }
            let w = social_welfare(&u_prime, &p)?;
            let (_, opt) = optimal_matching(&u_prime)?;
            report.check("equilibrium welfare under u' is at most 3", w <= Rational::from_integer(3.into()));
            report.check(format!("optimal welfare under u' is at least {k}"), opt >= Rational::from_integer(k.into()));
            let predicted = r(k, 3);
            finish(&mut report, w, opt, Some(predicted));
        }
        Family::Stability { k, .. } => {
            let eqs = match find_equilibria(mech, &u, candidate, &zero, budget) {
                Ok(e) => e,
                Err(why) => return Ok(report.inconclusive(why)),
            };
            let safe = matches!(mech.id(), MechanismId::ProbabilisticSerial | MechanismId::RandomPriority);
            let ceiling = Rational::one() + r(k * k, n);
            let floor = r(k, n);
            let mut welfare_ok = true;
            let mut share_ok = true;
            for e in &eqs {
                let p = mech.allocate(&e.profile)?;
                welfare_ok &= e.welfare <= ceiling;
                for i in k..n {
                    let share: Rational = (0..k).map(|j| p.get(i, j).clone()).sum();
                    share_ok &= share >= floor;
                }
            }
            report.equilibria.extend(eqs.iter().map(|e| EquilibriumSummary::from_report("u", e)));
            if eqs.len() > 1 {
                report.notes.push(format!("{} pure equilibria enumerated", eqs.len()));
            }
            let (_, opt) = optimal_matching(&u)?;
            report.check(format!("optimal welfare is {k}"), opt == Rational::from_integer(k.into()));
            let worst = eqs.iter().map(|e| e.welfare.clone()).min().expect("nonempty");
            let best = eqs.iter().map(|e| e.welfare.clone()).max().expect("nonempty");
            let predicted = if safe {
                report.check(format!("every equilibrium welfare is at most 1 + {k}^2/{n}"), welfare_ok);
                report.check(format!("agents {}..{n} hold at least {k}/{n} of items 1..{k}", k + 1), share_ok);
                Some(Rational::from_integer(k.into()) / &ceiling)
            } else {
                report
                    .notes
                    .push("mechanism has no safe strategy; the welfare ceiling does not apply".into());
                None
            };
            report.best_welfare = Some(best.clone());
            finish(&mut report, worst, opt.clone(), None);
            // The stability ratio uses the best equilibrium.
            report.predicted = predicted;
            if let Some(p) = &report.predicted {
                let pos = if best.is_positive() { Some(&opt / &best) } else { None };
                report.check("stability ratio meets the predicted bound", pos.is_some_and(|x| x >= *p));
            }
        }
        Family::UnitRange { k, delta } => {
            let eqs = match find_equilibria(mech, &u, candidate, &delta, budget) {
                Ok(e) => e,
                Err(why) => return Ok(report.inconclusive(why)),
            };
            report.equilibria.extend(eqs.iter().map(|e| EquilibriumSummary::from_report("u", e)));
            report.notes.push(format!("equilibria certified up to epsilon = delta = {delta}"));
            let (_, opt) = optimal_matching(&u)?;
            let expected = Rational::from_integer(k.into()) * pow(&delta, 2) + Rational::one();
            report.check("optimal welfare is k*delta^2 + 1", opt == expected);
            let worst = eqs.iter().map(|e| e.welfare.clone()).min().expect("nonempty");
            finish(&mut report, worst, opt, None);
        }
        Family::Deterministic { .. } => {
            return Err(Error::StrategyKind {
                mechanism: mech.id().to_string(),
                expected: "cardinal",
            })
        }
    }
    Ok(report.settle())
}

fn finish(report: &mut ConstructionReport, welfare: Rational, opt: Rational, predicted: Option<Rational>) {
    report.ratio = welfare.is_positive().then(|| &opt / &welfare);
    if let Some(p) = &predicted {
        let meets = report.ratio.as_ref().is_some_and(|x| x >= p);
        report.check(format!("ratio is at least {}", format_rational(p)), meets);
    }
    report.welfare = Some(welfare);
    report.opt = opt;
    report.predicted = predicted;
}

fn cardinal(mut report: ConstructionReport, candidate: &Candidate, budget: &Budget) -> Result<ConstructionReport> {
    let Family::Deterministic { n, .. } = report.family.clone() else {
        return Err(Error::StrategyKind {
            mechanism: MechanismId::NaiveMaxWelfare.to_string(),
            expected: "ordinal",
        });
    };
    let u = report.profiles[0].1.clone();
    let u_prime = report.profiles[1].1.clone();
    let s: Vec<Vec<Rational>> = match candidate {
        Candidate::Reports(rows) => rows.clone(),
        Candidate::Truthful => (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect(),
        _ => return Err(Error::InvalidParameter("cardinal pipelines take explicit or constructed reports".into())),
    };
    let space = DeviationSpace::ValueGrid(DEFAULT_GRID);
    let zero = Rational::zero();
    for (name, truth) in [("u", &u), ("u'", &u_prime)] {
        let r = match to_inconclusive(verify_pure_nash(&NaiveMaxWelfare, truth, &s, &space, &zero, budget)) {
            Ok(r) => r,
            Err(why) => return Ok(report.inconclusive(why)),
        };
        report.equilibria.push(EquilibriumSummary::from_report(name, &r));
        if !r.verified {
            return Ok(report.inconclusive(format!("reports are not an equilibrium under {name} within {space}")));
        }
    }
    report.notes.push(format!(
        "certified only against deviations in the {space}; the cardinal strategy space is continuous"
    ));
    let p = NaiveMaxWelfare.allocate(&s)?;
    let w = social_welfare(&u_prime, &p)?;
    let (_, opt) = optimal_matching(&u_prime)?;
    report.check(format!("equilibrium welfare under u' is at most 2/{n}"), w <= r(2, n));
    report.check(format!("optimal welfare under u' is at least {}", n - 2), opt >= Rational::from_integer((n - 2).into()));
    let predicted = r(n * (n - 2), 2);
    finish(&mut report, w, opt, Some(predicted));
    Ok(report.settle())
}
