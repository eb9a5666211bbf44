//! Random Priority (random serial dictatorship).
//!
//! Exact mode averages serial dictatorship over all `n!` priority orders.
//! Orders are not enumerated one by one: a dynamic program over
//! `(agents who already picked, items already taken)` counts how many order
//! prefixes reach each state, and each prefix extends to `(n - m)!` full
//! orders. Counts are integers over the common denominator `n!`.

use std::collections::HashMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Mechanism, MechanismId};
use crate::perm::factorial;
use crate::profile::{AssignmentMatrix, PreferenceOrder, PreferenceProfile, Provenance};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Largest `n` accepted by exact mode unless configured otherwise.
pub const DEFAULT_RP_EXACT_CAP: usize = 10;

/// Orders drawn per generator stream in sample mode.
const SAMPLE_BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RpMode {
    Exact { cap: usize },
    Sample { seed: u64, trials: u64 },
}

impl RpMode {
    pub fn exact() -> Self {
        RpMode::Exact {
            cap: DEFAULT_RP_EXACT_CAP,
        }
    }
}

pub(crate) fn check_orders(prefs: &[PreferenceOrder]) -> Result<()> {
    let n = prefs.len();
    if n == 0 {
        return Err(Error::Shape("profile has no agents".into()));
    }
    match prefs.iter().position(|o| o.len() != n) {
        Some(a) => Err(Error::Shape(format!(
            "agent {} ranks {} items, expected {n}",
            a + 1,
            prefs[a].len()
        ))),
        None => Ok(()),
    }
}

/// Bit masks limit exact mode to 64 agents; the cap is far lower in practice.
fn check_exact_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 64 {
        return Err(Error::Capacity {
            what: "exact random priority".into(),
            needed: n as u128,
            cap: cap.min(64) as u128,
            hint: "use sample mode (--trials, --seed) for larger instances".into(),
        });
    }
    Ok(())
}

fn top_available(ranking: &[usize], taken: u64) -> usize {
    *ranking
        .iter()
        .find(|&&j| taken & (1u64 << j) == 0)
        .expect("an item is left for every agent")
}

/// `count[i][j]` = number of priority orders in which agent `i` receives `j`.
fn exact_counts(rankings: &[Vec<usize>]) -> Vec<Vec<u128>> {
    let n = rankings.len();
    let mut counts = vec![vec![0u128; n]; n];
    let mut layer: HashMap<(u64, u64), u128> = HashMap::from([((0, 0), 1)]);
    for m in 0..n {
        let completions = factorial(n - m - 1);
        let mut next: HashMap<(u64, u64), u128> = HashMap::with_capacity(layer.len() * 2);
        for (&(done, taken), &ways) in &layer {
            for a in (0..n).filter(|a| done & (1 << a) == 0) {
                let item = top_available(&rankings[a], taken);
                counts[a][item] += ways * completions;
                *next.entry((done | 1 << a, taken | 1 << item)).or_insert(0) += ways;
            }
        }
        layer = next;
    }
    counts
}

fn to_matrix(counts: &[Vec<u128>], total: u128, provenance: Provenance) -> AssignmentMatrix {
    let den = BigInt::from(total);
    let p = counts
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| Rational::new(BigInt::from(c), den.clone()))
                .collect()
        })
        .collect();
    AssignmentMatrix::new_unchecked(p, provenance)
}

fn rankings(prefs: &[PreferenceOrder]) -> Vec<Vec<usize>> {
    prefs.iter().map(|o| o.ranking().to_vec()).collect()
}

pub(crate) fn serial_pick(rankings: &[Vec<usize>], priority: &[usize]) -> Vec<usize> {
    let mut taken = 0u64;
    let mut got = vec![0; rankings.len()];
    for &a in priority {
        let item = top_available(&rankings[a], taken);
        taken |= 1 << item;
        got[a] = item;
    }
    got
}

fn sample_counts(rankings: &[Vec<usize>], seed: u64, trials: u64) -> Vec<Vec<u128>> {
    let n = rankings.len();
    let mut counts = vec![vec![0u128; n]; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut drawn = 0u64;
    let mut stream = 0u64;
    while drawn < trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let batch = SAMPLE_BATCH.min(trials - drawn);
        for _ in 0..batch {
            order.shuffle(&mut rng);
            for (a, item) in serial_pick(rankings, &order).into_iter().enumerate() {
                counts[a][item] += 1;
            }
        }
        drawn += batch;
        stream += 1;
    }
    counts
}

/// Random Priority in exact or sampled mode.
pub fn random_priority(prefs: &PreferenceProfile, mode: RpMode) -> Result<AssignmentMatrix> {
    rp_orders(prefs.orders(), mode)
}

pub(crate) fn rp_orders(prefs: &[PreferenceOrder], mode: RpMode) -> Result<AssignmentMatrix> {
    check_orders(prefs)?;
    let n = prefs.len();
    let r = rankings(prefs);
    match mode {
        RpMode::Exact { cap } => {
            check_exact_cap(n, cap)?;
            Ok(to_matrix(&exact_counts(&r), factorial(n), Provenance::Exact))
        }
        RpMode::Sample { seed, trials } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("sample mode needs trials >= 1".into()));
            }
            if n > 64 {
                return Err(Error::Capacity {
                    what: "random priority".into(),
                    needed: n as u128,
                    cap: 64,
                    hint: "instances above 64 agents are not supported".into(),
                });
            }
            Ok(to_matrix(
                &sample_counts(&r, seed, trials),
                trials as u128,
                Provenance::Sampled { seed, trials },
            ))
        }
    }
}

/// For `agent`, the number of priority orders under which the set of items
/// already taken at her turn equals each mask. Independent of her own report.
fn pre_turn_weights(rankings: &[Vec<usize>], agent: usize) -> Vec<(u64, u128)> {
    let n = rankings.len();
    let mut out: HashMap<u64, u128> = HashMap::new();
    let mut layer: HashMap<(u64, u64), u128> = HashMap::from([((1u64 << agent, 0u64), 1)]);
    for m in 0..n {
        // `m` other agents have picked; she goes next in (n - 1 - m)! orders.
        let after = factorial(n - 1 - m);
        let mut next: HashMap<(u64, u64), u128> = HashMap::new();
        for (&(done, taken), &ways) in &layer {
            *out.entry(taken).or_insert(0) += ways * after;
            if m + 1 == n {
                continue;
            }
            for a in (0..n).filter(|a| done & (1 << a) == 0) {
                let item = top_available(&rankings[a], taken);
                *next.entry((done | 1 << a, taken | 1 << item)).or_insert(0) += ways;
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    let mut v: Vec<(u64, u128)> = out.into_iter().collect();
    v.sort_unstable();
    v
}

/// Exhaustive best reply using the pre-turn distribution. `None` when the
/// scaled utilities do not fit in `i128`.
fn rp_best_reply(
    prefs: &[PreferenceOrder],
    agent: usize,
    truth: &[Rational],
) -> Option<(PreferenceOrder, Rational)> {
    let n = prefs.len();
    let r = rankings(prefs);
    let weights = pre_turn_weights(&r, agent);
    let den = rational::common_denominator(truth);
    let scaled: Option<Vec<i128>> = truth
        .iter()
        .map(|u| i128::try_from((u * Rational::from_integer(den.clone())).to_integer()).ok())
        .collect();
    let scaled = scaled?;
    let max_abs = scaled.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    // Sum of weights is n!, so |utility| <= n! * max_abs.
    factorial(n).checked_mul(max_abs).filter(|&m| m < i128::MAX as u128)?;

    let mut best: Option<(i128, Vec<usize>)> = None;
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        let mut value = 0i128;
        for &(taken, w) in &weights {
            value += w as i128 * scaled[top_available(&order, taken)];
        }
        // Lexicographic enumeration: keep only strict improvements.
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, order.clone()));
        }
        if !crate::perm::next_permutation(&mut order) {
            break;
        }
    }
    let (value, ranking) = best.expect("n >= 1");
    let utility = Rational::new(BigInt::from(value), BigInt::from(factorial(n)) * den);
    Some((PreferenceOrder::new_unchecked(ranking), utility))
}

/// Random Priority as a [`Mechanism`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomPriority {
    pub mode: RpMode,
}

impl Default for RandomPriority {
    fn default() -> Self {
        RandomPriority {
            mode: RpMode::exact(),
        }
    }
}

impl Mechanism for RandomPriority {
    type Strategy = PreferenceOrder;

    fn id(&self) -> MechanismId {
        MechanismId::RandomPriority
    }

    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix> {
        rp_orders(profile, self.mode)
    }

    fn agent_row(&self, profile: &[PreferenceOrder], agent: usize) -> Result<Vec<Rational>> {
        let RpMode::Exact { cap } = self.mode else {
            return Ok(self.allocate(profile)?.row(agent).to_vec());
        };
        check_orders(profile)?;
        let n = profile.len();
        check_exact_cap(n, cap)?;
        let r = rankings(profile);
        let mut counts = vec![0u128; n];
        for (taken, w) in pre_turn_weights(&r, agent) {
            counts[top_available(&r[agent], taken)] += w;
        }
        let den = BigInt::from(factorial(n));
        Ok(counts
            .into_iter()
            .map(|c| Rational::new(BigInt::from(c), den.clone()))
            .collect())
    }

    fn best_strict_order(
        &self,
        profile: &[PreferenceOrder],
        agent: usize,
        truth: &[Rational],
    ) -> Option<Result<(PreferenceOrder, Rational)>> {
        let RpMode::Exact { cap } = self.mode else {
            return None;
        };
        if let Err(e) = check_orders(profile).and_then(|_| check_exact_cap(profile.len(), cap)) {
            return Some(Err(e));
        }
        rp_best_reply(profile, agent, truth).map(Ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn prefs(rows: &[&[usize]]) -> PreferenceProfile {
        PreferenceProfile::from_one_based(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn symmetric_two_agents() {
        let p = random_priority(&prefs(&[&[1, 2], &[1, 2]]), RpMode::exact()).unwrap();
        let h = ratio(1, 2);
        assert_eq!(p.rows(), &[vec![h.clone(), h.clone()], vec![h.clone(), h]]);
    }

    #[test]
    fn identical_three_agents_uniform() {
        let p = random_priority(&prefs(&[&[1, 2, 3], &[1, 2, 3], &[1, 2, 3]]), RpMode::exact()).unwrap();
        assert_eq!(p, AssignmentMatrix::uniform(3));
    }

    #[test]
    fn three_agent_example() {
        let p = random_priority(&prefs(&[&[1, 2, 3], &[1, 3, 2], &[2, 1, 3]]), RpMode::exact())
            .unwrap();
        assert_eq!(p.row(0), &[ratio(1, 2), ratio(1, 6), ratio(1, 3)]);
        assert_eq!(p.row(1), &[ratio(1, 2), ratio(0, 1), ratio(1, 2)]);
        assert_eq!(p.row(2), &[ratio(0, 1), ratio(5, 6), ratio(1, 6)]);
    }

    #[test]
    fn cap_is_enforced() {
        let n = 5;
        let p = PreferenceProfile::new(vec![PreferenceOrder::identity(n); n]).unwrap();
        let err = random_priority(&p, RpMode::Exact { cap: 4 }).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        assert!(random_priority(&p, RpMode::Sample { seed: 1, trials: 0 }).is_err());
    }

    #[test]
    fn sampled_rows_sum_to_one_and_are_reproducible() {
        let p = prefs(&[&[1, 2, 3], &[1, 3, 2], &[2, 1, 3]]);
        let mode = RpMode::Sample { seed: 9, trials: 10_000 };
        let a = random_priority(&p, mode).unwrap();
        let b = random_priority(&p, mode).unwrap();
        assert_eq!(a, b);
        assert!(a.row_sums().iter().all(num_traits::One::is_one));
        assert_eq!(a.provenance(), Provenance::Sampled { seed: 9, trials: 10_000 });
    }

    #[test]
    fn agent_row_matches_full_matrix() {
        let p = prefs(&[&[1, 2, 3, 4], &[2, 1, 4, 3], &[1, 3, 2, 4], &[1, 2, 4, 3]]);
        let full = random_priority(&p, RpMode::exact()).unwrap();
        let mech = RandomPriority::default();
        for a in 0..4 {
            assert_eq!(mech.agent_row(p.orders(), a).unwrap(), full.row(a));
        }
    }
}
