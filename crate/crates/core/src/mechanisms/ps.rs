//! Probabilistic Serial (simultaneous eating).
//!
//! Every agent eats her highest-ranked item that is not yet exhausted at unit
//! speed; the share of item `j` eaten by agent `i` is `p[i][j]`. The
//! simulation jumps from one exhaustion event to the next.
//!
//! Arithmetic is fixed-point: with `L = lcm(1..=n)`, every event time and
//! every consumed share is an integer multiple of `1 / L^n`. Each event
//! multiplies the running denominator by the eater count of the item that
//! runs out (a divisor of `L`), and there are at most `n` events. So all
//! divisions below are exact. For `n <= 10` the scale fits in `i128`;
//! larger instances use `BigInt`.

use std::collections::HashMap;
use std::fmt::Debug;

use num_bigint::{BigInt, ToBigInt};
use num_integer::Integer;
use num_traits::{FromPrimitive, NumAssign, Zero};

use super::{Mechanism, MechanismId};
use crate::profile::{AssignmentMatrix, PreferenceOrder, PreferenceProfile, Provenance};
use crate::rational::{self, Rational};
use crate::Result;

/// `t[j]` is the time at which item `j` is fully consumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExhaustionTimes(pub Vec<Rational>);

impl ExhaustionTimes {
    pub fn get(&self, item: usize) -> &Rational {
        &self.0[item]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn sorted(&self) -> Vec<Rational> {
        let mut v = self.0.clone();
        v.sort();
        v
    }
}

pub(crate) trait Fixed:
    Clone + Ord + Debug + Integer + NumAssign + FromPrimitive + ToBigInt
{
}
impl Fixed for i128 {}
impl Fixed for BigInt {}

const I128_MAX_N: usize = 10;

fn scale<T: Fixed>(n: usize) -> T {
    let l = (1..=n as u64).fold(1u64, |acc, k| acc.lcm(&k));
    let l = T::from_u64(l).expect("lcm fits");
    (0..n).fold(T::one(), |acc, _| acc * l.clone())
}

/// Event-driven eating state. One agent may be "steered": her current item is
/// supplied by the caller instead of read from a ranking.
#[derive(Clone)]
struct Eating<'a, T> {
    orders: &'a [Vec<usize>],
    remaining: Vec<T>,
    time: T,
    exhausted_at: Vec<Option<T>>,
    cursor: Vec<usize>,
    live: usize,
}

impl<'a, T: Fixed> Eating<'a, T> {
    fn new(orders: &'a [Vec<usize>], unit: &T) -> Self {
        let n = orders.len();
        Eating {
            orders,
            remaining: vec![unit.clone(); n],
            time: T::zero(),
            exhausted_at: vec![None; n],
            cursor: vec![0; n],
            live: n,
        }
    }

    fn done(&self) -> bool {
        self.live == 0
    }

    fn is_live(&self, item: usize) -> bool {
        self.exhausted_at[item].is_none()
    }

    fn current(&mut self, agent: usize) -> usize {
        let order = &self.orders[agent];
        while self.exhausted_at[order[self.cursor[agent]]].is_some() {
            self.cursor[agent] += 1;
        }
        order[self.cursor[agent]]
    }

    /// Advances to the next exhaustion event. `steer` overrides one agent's
    /// current item. `eat(agent, item, amount)` is called for each agent.
    #[allow(clippy::needless_range_loop)]
    fn step(&mut self, steer: Option<(usize, usize)>, mut eat: impl FnMut(usize, usize, &T)) {
        debug_assert!(!self.done());
        let n = self.orders.len();
        let mut eating = vec![0usize; n];
        let mut eaters = vec![0u64; n];
        for (a, slot) in eating.iter_mut().enumerate() {
            let item = match steer {
                Some((s, item)) if s == a => item,
                _ => self.current(a),
            };
            debug_assert!(self.is_live(item));
            *slot = item;
            eaters[item] += 1;
        }
        let mut delta: Option<T> = None;
        for j in 0..n {
            if eaters[j] == 0 {
                continue;
            }
            let k = T::from_u64(eaters[j]).expect("small");
            let (q, r) = self.remaining[j].div_rem(&k);
            assert!(r.is_zero(), "eating schedule left the fixed-point grid");
            if delta.as_ref().is_none_or(|d| q < *d) {
                delta = Some(q);
            }
        }
        let delta = delta.expect("some item is being eaten");
        self.time += delta.clone();
        for (a, &item) in eating.iter().enumerate() {
            self.remaining[item] -= delta.clone();
            eat(a, item, &delta);
        }
        for j in 0..n {
            if eaters[j] > 0 && self.remaining[j].is_zero() {
                self.exhausted_at[j] = Some(self.time.clone());
                self.live -= 1;
            }
        }
    }
}

fn run<T: Fixed>(orders: &[Vec<usize>]) -> (AssignmentMatrix, ExhaustionTimes) {
    let n = orders.len();
    let unit: T = scale(n);
    let mut state = Eating::new(orders, &unit);
    let mut consumed = vec![vec![T::zero(); n]; n];
    while !state.done() {
        state.step(None, |a, j, d| consumed[a][j] += d.clone());
    }
    let den = unit.to_bigint().expect("integer");
    let frac = |v: &T| Rational::new(v.to_bigint().expect("integer"), den.clone());
    let p = consumed.iter().map(|row| row.iter().map(frac).collect()).collect();
    let t = state
        .exhausted_at
        .iter()
        .map(|t| frac(t.as_ref().expect("all items exhausted")))
        .collect();
    (
        AssignmentMatrix::new_unchecked(p, Provenance::Exact),
        ExhaustionTimes(t),
    )
}

fn rankings(prefs: &[PreferenceOrder]) -> Vec<Vec<usize>> {
    prefs.iter().map(|o| o.ranking().to_vec()).collect()
}

/// Runs Probabilistic Serial on strict orders.
pub fn probabilistic_serial(prefs: &PreferenceProfile) -> (AssignmentMatrix, ExhaustionTimes) {
    ps_orders(prefs.orders())
}

pub(crate) fn ps_orders(prefs: &[PreferenceOrder]) -> (AssignmentMatrix, ExhaustionTimes) {
    let orders = rankings(prefs);
    if orders.len() <= I128_MAX_N {
        run::<i128>(&orders)
    } else {
        run::<BigInt>(&orders)
    }
}

/// Best reply of `agent` against fixed opponents, over all strict orders.
///
/// Only the agent's *effective* eating sequence matters: when her current
/// item runs out she moves to some live item, and the position of already
/// exhausted items in her ranking is irrelevant. The search branches over
/// live items at each of her decision points, then rebuilds the
/// lexicographically smallest full ranking reaching the optimum.
pub(crate) fn ps_best_reply(
    prefs: &[PreferenceOrder],
    agent: usize,
    truth: &[Rational],
) -> (PreferenceOrder, Rational) {
    let orders = rankings(prefs);
    if orders.len() <= I128_MAX_N {
        best_reply::<i128>(&orders, agent, truth)
    } else {
        best_reply::<BigInt>(&orders, agent, truth)
    }
}

struct Search<'a, T> {
    agent: usize,
    weights: Vec<BigInt>,
    memo: HashMap<Vec<usize>, BigInt>,
    _marker: std::marker::PhantomData<&'a T>,
}

impl<'a, T: Fixed> Search<'a, T> {
    /// Lets the agent eat `item` until it runs out; returns her scaled gain.
    fn advance(&self, state: &mut Eating<'a, T>, item: usize) -> BigInt {
        let mut eaten = T::zero();
        let agent = self.agent;
        while state.is_live(item) {
            state.step(Some((agent, item)), |a, _, d| {
                if a == agent {
                    eaten += d.clone();
                }
            });
        }
        eaten.to_bigint().expect("integer") * &self.weights[item]
    }

    fn solve(&mut self, state: &Eating<'a, T>, seq: &mut Vec<usize>) -> BigInt {
        let n = state.orders.len();
        let mut best: Option<BigInt> = None;
        for item in 0..n {
            if !state.is_live(item) {
                continue;
            }
            let mut child = state.clone();
            let gain = self.advance(&mut child, item);
            seq.push(item);
            let value = gain + self.solve(&child, seq);
            seq.pop();
            if best.as_ref().is_none_or(|b| value > *b) {
                best = Some(value);
            }
        }
        let best = best.unwrap_or_else(BigInt::zero);
        self.memo.insert(seq.clone(), best.clone());
        best
    }
}

fn best_reply<T: Fixed>(
    orders: &[Vec<usize>],
    agent: usize,
    truth: &[Rational],
) -> (PreferenceOrder, Rational) {
    let n = orders.len();
    let unit: T = scale(n);
    let den = rational::common_denominator(truth);
    let weights: Vec<BigInt> = truth
        .iter()
        .map(|u| (u * Rational::from_integer(den.clone())).to_integer())
        .collect();
    let mut search = Search::<T> {
        agent,
        weights,
        memo: HashMap::new(),
        _marker: std::marker::PhantomData,
    };
    let root = Eating::new(orders, &unit);
    let total = search.solve(&root, &mut Vec::new());

    // Rebuild the smallest ranking whose subtree still reaches `total`.
    let mut ranking = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut state = root;
    let mut seq = Vec::new();
    let mut need = total.clone();
    while ranking.len() < n {
        let mut chosen = None;
        for item in (0..n).filter(|&x| !used[x]) {
            if !state.is_live(item) {
                chosen = Some(item);
                break;
            }
            let mut child = state.clone();
            let gain = search.advance(&mut child, item);
            seq.push(item);
            let rest = search.memo.get(&seq).expect("visited by solve").clone();
            if gain.clone() + rest == need {
                need -= gain;
                state = child;
                chosen = Some(item);
                break;
            }
            seq.pop();
        }
        let item = chosen.expect("some continuation attains the optimum");
        used[item] = true;
        ranking.push(item);
    }
    let scale = unit.to_bigint().expect("integer") * den;
    (
        PreferenceOrder::new_unchecked(ranking),
        Rational::new(total, scale),
    )
}

/// Probabilistic Serial as a [`Mechanism`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ProbabilisticSerial;

impl Mechanism for ProbabilisticSerial {
    type Strategy = PreferenceOrder;

    fn id(&self) -> MechanismId {
        MechanismId::ProbabilisticSerial
    }

    fn allocate(&self, profile: &[PreferenceOrder]) -> Result<AssignmentMatrix> {
        crate::mechanisms::rp::check_orders(profile)?;
        Ok(ps_orders(profile).0)
    }

    fn best_strict_order(
        &self,
        profile: &[PreferenceOrder],
        agent: usize,
        truth: &[Rational],
    ) -> Option<Result<(PreferenceOrder, Rational)>> {
        Some(crate::mechanisms::rp::check_orders(profile).map(|_| ps_best_reply(profile, agent, truth)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn prefs(rows: &[&[usize]]) -> PreferenceProfile {
        PreferenceProfile::from_one_based(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn identical_rankings_split_evenly() {
        let (p, t) = probabilistic_serial(&prefs(&[&[1, 2], &[1, 2]]));
        let half = ratio(1, 2);
        assert_eq!(p.rows(), &[vec![half.clone(), half.clone()], vec![half.clone(), half.clone()]]);
        assert_eq!(t.0, vec![half, int(1)]);
    }

    #[test]
    fn disjoint_demand_is_identity() {
        let (p, t) = probabilistic_serial(&prefs(&[&[1, 2], &[2, 1]]));
        assert_eq!(p, crate::profile::Matching::identity(2).to_matrix());
        assert_eq!(t.0, vec![int(1), int(1)]);
    }

    #[test]
    fn three_agent_example() {
        let (p, t) = probabilistic_serial(&prefs(&[&[1, 2, 3], &[1, 2, 3], &[2, 1, 3]]));
        let row12 = vec![ratio(1, 2), ratio(1, 6), ratio(1, 3)];
        assert_eq!(p.row(0), row12.as_slice());
        assert_eq!(p.row(1), row12.as_slice());
        assert_eq!(p.row(2), &[int(0), ratio(2, 3), ratio(1, 3)]);
        assert_eq!(t.0, vec![ratio(1, 2), ratio(2, 3), int(1)]);
        assert!(p.is_bistochastic());
    }

    #[test]
    fn big_int_path_matches_i128_path() {
        let orders: Vec<Vec<usize>> = vec![vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![0, 2, 1, 3], vec![3, 2, 1, 0]];
        assert_eq!(run::<i128>(&orders), run::<BigInt>(&orders));
    }

    #[test]
    fn large_instance_uses_big_ints() {
        let n = 12;
        let orders: Vec<PreferenceOrder> = (0..n)
            .map(|i| PreferenceOrder::new((0..n).map(|j| (i * 5 + j) % n).collect::<Vec<_>>().into_iter().rev().collect()).unwrap())
            .collect();
        let (p, t) = ps_orders(&orders);
        assert!(p.is_bistochastic());
        assert!(t.0.iter().all(|x| *x > int(0) && *x <= int(1)));
    }
}
