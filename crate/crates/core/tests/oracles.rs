//! Library output against brute-force reimplementations.

use matchpoa::equilibrium::{best_response, verify_pure_nash, Budget, DeviationSpace};
use matchpoa::matching::max_weight_matching;
use matchpoa::mechanisms::{
    probabilistic_serial, Mechanism, ProbabilisticSerial, RandomDictatorial, RandomPriority, SerialDictatorship,
};
use matchpoa::rational::Rational;
use matchpoa::{Normalization, PreferenceOrder, PreferenceProfile, ValuationProfile};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn all_orders(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut v: Vec<usize> = (0..n).collect();
    loop {
        out.push(v.clone());
        let Some(i) = (1..n).rev().find(|&i| v[i - 1] < v[i]) else { break };
        let j = (i..n).rev().find(|&j| v[j] > v[i - 1]).unwrap();
        v.swap(i - 1, j);
        v[i..].reverse();
    }
    out
}

fn eat(orders: &[Vec<usize>]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = orders.len();
    let mut left = vec![Rational::one(); n];
    let mut p = vec![vec![Rational::zero(); n]; n];
    let mut times = vec![Rational::zero(); n];
    let mut clock = Rational::zero();
    while left.iter().any(|l| !l.is_zero()) {
        let tops: Vec<usize> = orders.iter().map(|o| *o.iter().find(|&&j| !left[j].is_zero()).unwrap()).collect();
        let mut count = vec![0i64; n];
        for &j in &tops {
            count[j] += 1;
        }
        let dt = (0..n)
            .filter(|&j| count[j] > 0)
            .map(|j| &left[j] / Rational::from_integer(count[j].into()))
            .min()
            .unwrap();
        clock += &dt;
        for (i, &j) in tops.iter().enumerate() {
            p[i][j] += &dt;
        }
        for j in 0..n {
            if count[j] > 0 {
                left[j] -= &dt * Rational::from_integer(count[j].into());
                if left[j].is_zero() {
                    times[j] = clock.clone();
                }
            }
        }
    }
    (p, times)
}

fn serial(orders: &[Vec<usize>], priority: &[usize]) -> Vec<usize> {
    let mut taken = vec![false; orders.len()];
    let mut got = vec![0; orders.len()];
    for &a in priority {
        let j = *orders[a].iter().find(|&&j| !taken[j]).unwrap();
        taken[j] = true;
        got[a] = j;
    }
    got
}

fn rp_brute(orders: &[Vec<usize>]) -> Vec<Vec<Rational>> {
    let n = orders.len();
    let pris = all_orders(n);
    let mut p = vec![vec![Rational::zero(); n]; n];
    let share = Rational::new(1.into(), pris.len().into());
    for pri in &pris {
        for (a, j) in serial(orders, pri).into_iter().enumerate() {
            p[a][j] += &share;
        }
    }
    p
}

fn to_orders(raw: &[Vec<usize>]) -> Vec<PreferenceOrder> {
    raw.iter().map(|r| PreferenceOrder::new(r.clone()).unwrap()).collect()
}

fn utility(row: &[Rational], truth: &[Rational]) -> Rational {
    row.iter().zip(truth).map(|(a, b)| a * b).sum()
}

fn orders_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1..=max_n).prop_flat_map(|n| prop::collection::vec(Just((0..n).collect::<Vec<_>>()).prop_shuffle(), n))
}

fn valuations(n: usize) -> impl Strategy<Value = ValuationProfile> {
    prop::collection::vec(prop::collection::vec(1i64..=20, n), n).prop_map(|rows| {
        let rows = rows
            .into_iter()
            .map(|r| {
                let total: i64 = r.iter().sum();
                r.into_iter().map(|x| Rational::new(x.into(), total.into())).collect()
            })
            .collect();
        ValuationProfile::new(rows, Normalization::UnitSum).unwrap()
    })
}

fn game(max_n: usize) -> impl Strategy<Value = (ValuationProfile, Vec<Vec<usize>>)> {
    (1..=max_n).prop_flat_map(|n| {
        (
            valuations(n),
            prop::collection::vec(Just((0..n).collect::<Vec<_>>()).prop_shuffle(), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ps_matches_eating_oracle(raw in orders_strategy(6)) {
        let (p, t) = probabilistic_serial(&PreferenceProfile::new(to_orders(&raw)).unwrap());
        let (op, ot) = eat(&raw);
        prop_assert_eq!(p.rows(), op.as_slice());
        prop_assert_eq!(t.as_slice(), ot.as_slice());
        prop_assert!(p.is_bistochastic());
    }

    #[test]
    fn rp_matches_priority_enumeration(raw in orders_strategy(6)) {
        let p = RandomPriority::default().allocate(&to_orders(&raw)).unwrap();
        let brute = rp_brute(&raw);
        prop_assert_eq!(p.rows(), brute.as_slice());
        let orders = to_orders(&raw);
        for a in 0..raw.len() {
            prop_assert_eq!(RandomPriority::default().agent_row(&orders, a).unwrap(), p.row(a).to_vec());
        }
    }

    #[test]
    fn serial_dictatorship_matches(raw in orders_strategy(6)) {
        let n = raw.len();
        let pri: Vec<usize> = (0..n).rev().collect();
        let p = SerialDictatorship { priority: pri.clone() }.allocate(&to_orders(&raw)).unwrap();
        for (a, j) in serial(&raw, &pri).into_iter().enumerate() {
            prop_assert!(p.get(a, j).is_one());
        }
    }

    #[test]
    fn matching_matches_permutation_search(w in (1usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0i64..=6, n), n))) {
        let n = w.len();
        let weights: Vec<Vec<Rational>> = w.iter().map(|r| r.iter().map(|&x| Rational::new(x.into(), 3.into())).collect()).collect();
        let mut best: Option<(i64, Vec<usize>)> = None;
        for perm in all_orders(n) {
            let v: i64 = (0..n).map(|i| w[i][perm[i]]).sum();
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, perm));
            }
        }
        let (value, perm) = best.unwrap();
        let m = max_weight_matching(&weights).unwrap();
        prop_assert_eq!(m.assignment(), perm.as_slice());
        let got: Rational = (0..n).map(|i| weights[i][m.item_of(i)].clone()).sum();
        prop_assert_eq!(got, Rational::new(value.into(), 3.into()));
    }

    #[test]
    fn fast_best_replies_match_brute_force((u, raw) in game(5)) {
        let n = u.n();
        let profile = to_orders(&raw);
        let every: Vec<PreferenceOrder> = to_orders(&all_orders(n));
        let explicit = DeviationSpace::Explicit(every.clone());
        let b = Budget::default();
        fn check<M: Mechanism<Strategy = PreferenceOrder>>(
            m: &M, u: &ValuationProfile, profile: &[PreferenceOrder], every: &[PreferenceOrder],
            explicit: &DeviationSpace<PreferenceOrder>, b: &Budget,
        ) -> Result<(), TestCaseError> {
            for a in 0..u.n() {
                let fast = best_response(m, u.row(a), profile, a, &DeviationSpace::AllStrictOrders, b).unwrap();
                let slow = best_response(m, u.row(a), profile, a, explicit, b).unwrap();
                prop_assert_eq!(&fast.utility, &slow.utility);
                prop_assert_eq!(&fast.strategy, &slow.strategy);
                // Independent scan for the smallest maximizer.
                let mut best: Option<(Rational, &PreferenceOrder)> = None;
                for s in every {
                    let mut dev = profile.to_vec();
                    dev[a] = s.clone();
                    let v = utility(m.allocate(&dev).unwrap().row(a), u.row(a));
                    if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                        best = Some((v, s));
                    }
                }
                let (v, s) = best.unwrap();
                prop_assert_eq!(fast.utility, v);
                prop_assert_eq!(&fast.strategy, s);
            }
            Ok(())
        }
        check(&ProbabilisticSerial, &u, &profile, &every, &explicit, &b)?;
        check(&RandomPriority::default(), &u, &profile, &every, &explicit, &b)?;
        check(&RandomDictatorial, &u, &profile, &every, &explicit, &b)?;
    }

    #[test]
    fn verification_matches_double_loop((u, raw) in game(3)) {
        let n = u.n();
        let profile = to_orders(&raw);
        let every = to_orders(&all_orders(n));
        let m = ProbabilisticSerial;
        let here = m.allocate(&profile).unwrap();
        let mut max_gain = Rational::zero();
        for a in 0..n {
            let current = utility(here.row(a), u.row(a));
            for s in &every {
                let mut dev = profile.clone();
                dev[a] = s.clone();
                let gain = utility(m.allocate(&dev).unwrap().row(a), u.row(a)) - &current;
                if gain > max_gain {
                    max_gain = gain;
                }
            }
        }
        let rep = verify_pure_nash(&m, &u, &profile, &DeviationSpace::AllStrictOrders, &Rational::zero(), &Budget::default()).unwrap();
        prop_assert_eq!(&rep.max_gain, &max_gain);
        prop_assert_eq!(rep.verified, max_gain.is_zero());
        prop_assert!(rep.exhaustive);
    }
}
