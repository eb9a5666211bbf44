//! Valuation and preference profiles, matchings and assignment matrices.
//!
//! Agents and items are indexed from 0 in memory. Text formats and
//! human-facing output use 1-based indices.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Rows are nonnegative and sum to 1.
    UnitSum,
    /// Rows have maximum exactly 1 and minimum exactly 0.
    UnitRange,
    Unchecked,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::UnitSum => "unit-sum",
            Normalization::UnitRange => "unit-range",
            Normalization::Unchecked => "unchecked",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// n agents by n items; row `i` is agent `i`'s valuation vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValuationProfile {
    values: Vec<Vec<Rational>>,
    normalization: Normalization,
}

impl ValuationProfile {
    pub fn new(values: Vec<Vec<Rational>>, normalization: Normalization) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Shape("profile has no agents".into()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "row {} has {} entries, expected {n} (matrix must be square)",
                    i + 1,
                    row.len()
                )));
            }
        }
        Ok(ValuationProfile {
            values,
            normalization,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.values[agent]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.values[agent][item]
    }

    /// Same profile with agent `agent`'s row replaced.
    pub fn with_row(&self, agent: usize, row: Vec<Rational>) -> Result<Self> {
        let mut values = self.values.clone();
        values[agent] = row;
        ValuationProfile::new(values, self.normalization)
    }

    /// Truthful ordinal reports, ties broken toward the smaller item index.
    pub fn induced_profile(&self) -> PreferenceProfile {
        PreferenceProfile::new_unchecked(self.values.iter().map(|r| induced_order(r)).collect())
    }
}

/// Why a profile failed [`validate_profile`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFailure {
    NegativeEntry {
        agent: usize,
        item: usize,
        value: Rational,
    },
    RowSum {
        agent: usize,
        sum: Rational,
    },
    RowMax {
        agent: usize,
        max: Rational,
    },
    RowMin {
        agent: usize,
        min: Rational,
    },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::NegativeEntry { agent, item, value } => write!(
                f,
                "agent {} has negative value {value} for item {}",
                agent + 1,
                item + 1
            ),
            ValidationFailure::RowSum { agent, sum } => {
                write!(f, "agent {} row sums to {sum}, expected 1", agent + 1)
            }
            ValidationFailure::RowMax { agent, max } => {
                write!(f, "agent {} row maximum is {max}, expected 1", agent + 1)
            }
            ValidationFailure::RowMin { agent, min } => {
                write!(f, "agent {} row minimum is {min}, expected 0", agent + 1)
            }
        }
    }
}

/// Checks the declared normalization exactly. Reports the first offending row.
pub fn validate_profile(profile: &ValuationProfile) -> std::result::Result<(), ValidationFailure> {
    match profile.normalization {
        Normalization::Unchecked => Ok(()),
        Normalization::UnitSum => {
            for (agent, row) in profile.values.iter().enumerate() {
                if let Some(item) = row.iter().position(|v| v.is_negative()) {
                    return Err(ValidationFailure::NegativeEntry {
                        agent,
                        item,
                        value: row[item].clone(),
                    });
                }
                let sum = rational::sum(row);
                if !sum.is_one() {
                    return Err(ValidationFailure::RowSum { agent, sum });
                }
            }
            Ok(())
        }
        Normalization::UnitRange => {
            for (agent, row) in profile.values.iter().enumerate() {
                let max = row.iter().max().expect("rows are nonempty");
                if !max.is_one() {
                    return Err(ValidationFailure::RowMax {
                        agent,
                        max: max.clone(),
                    });
                }
                let min = row.iter().min().expect("rows are nonempty");
                if !min.is_zero() {
                    return Err(ValidationFailure::RowMin {
                        agent,
                        min: min.clone(),
                    });
                }
            }
            Ok(())
        }
    }
}

/// A strict ranking of items, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PreferenceOrder(Vec<usize>);

impl PreferenceOrder {
    /// `ranking` must be a permutation of `0..ranking.len()`.
    pub fn new(ranking: Vec<usize>) -> Result<Self> {
        if !crate::perm::is_permutation(&ranking) {
            return Err(Error::Shape(format!(
                "ranking {ranking:?} is not a permutation of 0..{}",
                ranking.len()
            )));
        }
        Ok(PreferenceOrder(ranking))
    }

    /// Builds from 1-based item labels.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let ranking = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::Shape("item labels start at 1".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        PreferenceOrder::new(ranking)
    }

    pub(crate) fn new_unchecked(ranking: Vec<usize>) -> Self {
        debug_assert!(crate::perm::is_permutation(&ranking));
        PreferenceOrder(ranking)
    }

    pub fn identity(n: usize) -> Self {
        PreferenceOrder((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ranking(&self) -> &[usize] {
        &self.0
    }

    pub fn top(&self) -> usize {
        self.0[0]
    }

    /// `rank[item]` is the item's position in the ranking.
    pub fn ranks(&self) -> Vec<usize> {
        let mut rank = vec![0; self.0.len()];
        for (pos, &item) in self.0.iter().enumerate() {
            rank[item] = pos;
        }
        rank
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn reversed(&self) -> Self {
        PreferenceOrder(self.0.iter().rev().copied().collect())
    }

    /// The same ranking with `item` moved to the front.
    pub fn with_top(&self, item: usize) -> Self {
        let mut r = Vec::with_capacity(self.0.len());
        r.push(item);
        r.extend(self.0.iter().copied().filter(|&x| x != item));
        PreferenceOrder(r)
    }
}

impl fmt::Display for PreferenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, item) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", item + 1)?;
        }
        write!(f, ")")
    }
}

/// Items sorted by value, highest first; equal values keep ascending index order.
pub fn induced_order(values: &[Rational]) -> PreferenceOrder {
    let mut ranking: Vec<usize> = (0..values.len()).collect();
    // sort_by is stable, so equal values stay in index order.
    ranking.sort_by(|&a, &b| values[b].cmp(&values[a]));
    PreferenceOrder(ranking)
}

/// One strict order per agent.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PreferenceProfile(Vec<PreferenceOrder>);

impl PreferenceProfile {
    pub fn new(orders: Vec<PreferenceOrder>) -> Result<Self> {
        let n = orders.len();
        if n == 0 {
            return Err(Error::Shape("profile has no agents".into()));
        }
        if let Some(bad) = orders.iter().position(|o| o.len() != n) {
            return Err(Error::Shape(format!(
                "agent {} ranks {} items, expected {n}",
                bad + 1,
                orders[bad].len()
            )));
        }
        Ok(PreferenceProfile(orders))
    }

    pub(crate) fn new_unchecked(orders: Vec<PreferenceOrder>) -> Self {
        PreferenceProfile(orders)
    }

    /// Profile from 1-based rankings, e.g. `[[1,2,3],[2,1,3],[1,3,2]]`.
    pub fn from_one_based(rows: &[Vec<usize>]) -> Result<Self> {
        PreferenceProfile::new(
            rows.iter()
                .map(|r| PreferenceOrder::from_one_based(r))
                .collect::<Result<_>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn orders(&self) -> &[PreferenceOrder] {
        &self.0
    }

    pub fn order(&self, agent: usize) -> &PreferenceOrder {
        &self.0[agent]
    }

    pub fn with_order(&self, agent: usize, order: PreferenceOrder) -> Self {
        let mut orders = self.0.clone();
        orders[agent] = order;
        PreferenceProfile(orders)
    }

    pub fn into_orders(self) -> Vec<PreferenceOrder> {
        self.0
    }
}

impl fmt::Display for PreferenceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

/// A deterministic allocation: agent `i` receives item `assignment[i]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching(Vec<usize>);

impl Matching {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if !crate::perm::is_permutation(&assignment) {
            return Err(Error::Shape(format!(
                "assignment {assignment:?} is not a bijection"
            )));
        }
        Ok(Matching(assignment))
    }

    pub(crate) fn new_unchecked(assignment: Vec<usize>) -> Self {
        debug_assert!(crate::perm::is_permutation(&assignment));
        Matching(assignment)
    }

    pub fn identity(n: usize) -> Self {
        Matching((0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn item_of(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    /// Total value of the matching under `values`.
    pub fn value(&self, values: &ValuationProfile) -> Rational {
        self.0
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (i, &j)| acc + values.value(i, j))
    }

    pub fn to_matrix(&self) -> AssignmentMatrix {
        let n = self.0.len();
        let mut p = vec![vec![Rational::zero(); n]; n];
        for (i, &j) in self.0.iter().enumerate() {
            p[i][j] = Rational::one();
        }
        AssignmentMatrix {
            p,
            provenance: Provenance::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Exact,
    Sampled { seed: u64, trials: u64 },
}

/// `p[i][j]` is the probability that agent `i` receives item `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentMatrix {
    p: Vec<Vec<Rational>>,
    provenance: Provenance,
}

impl AssignmentMatrix {
    pub fn new(p: Vec<Vec<Rational>>, provenance: Provenance) -> Result<Self> {
        let n = p.len();
        if n == 0 || p.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("assignment matrix must be square".into()));
        }
        Ok(AssignmentMatrix { p, provenance })
    }

    pub(crate) fn new_unchecked(p: Vec<Vec<Rational>>, provenance: Provenance) -> Self {
        AssignmentMatrix { p, provenance }
    }

    /// Uniform lottery, every entry 1/n.
    pub fn uniform(n: usize) -> Self {
        let v = rational::ratio(1, n as i64);
        AssignmentMatrix {
            p: vec![vec![v; n]; n],
            provenance: Provenance::Exact,
        }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.p[agent]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.p
    }

    pub fn get(&self, agent: usize, item: usize) -> &Rational {
        &self.p[agent][item]
    }

    pub fn into_rows(self) -> Vec<Vec<Rational>> {
        self.p
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.p.iter().map(rational::sum).collect()
    }

    pub fn column_sums(&self) -> Vec<Rational> {
        let n = self.n();
        (0..n)
            .map(|j| rational::sum(self.p.iter().map(|r| &r[j])))
            .collect()
    }

    pub fn entries_in_unit_interval(&self) -> bool {
        self.p
            .iter()
            .flatten()
            .all(|v| !v.is_negative() && *v <= Rational::one())
    }

    /// Every entry in [0,1] and every row and column summing to exactly 1.
    pub fn is_bistochastic(&self) -> bool {
        self.entries_in_unit_interval()
            && self.row_sums().iter().all(One::is_one)
            && self.column_sums().iter().all(One::is_one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn order(v: &[usize]) -> Vec<usize> {
        v.to_vec()
    }

    #[test]
    fn induced_order_breaks_ties_by_index() {
        let o = induced_order(&[ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
        assert_eq!(o.one_based(), order(&[2, 1, 3]));
        let o = induced_order(&[int(3), int(2), int(1)]);
        assert_eq!(o, PreferenceOrder::identity(3));
        let o = induced_order(&vec![ratio(1, 5); 5]);
        assert_eq!(o, PreferenceOrder::identity(5));
    }

    #[test]
    fn validate_unit_sum() {
        let ok = ValuationProfile::new(
            vec![vec![ratio(1, 2), ratio(1, 2)], vec![ratio(1, 4), ratio(3, 4)]],
            Normalization::UnitSum,
        )
        .unwrap();
        assert!(validate_profile(&ok).is_ok());

        let bad = ValuationProfile::new(
            vec![vec![ratio(1, 2), ratio(1, 4)], vec![ratio(1, 4), ratio(3, 4)]],
            Normalization::UnitSum,
        )
        .unwrap();
        assert_eq!(
            validate_profile(&bad),
            Err(ValidationFailure::RowSum {
                agent: 0,
                sum: ratio(3, 4)
            })
        );

        let neg = ValuationProfile::new(
            vec![vec![ratio(3, 2), ratio(-1, 2)], vec![ratio(1, 4), ratio(3, 4)]],
            Normalization::UnitSum,
        )
        .unwrap();
        assert!(matches!(
            validate_profile(&neg),
            Err(ValidationFailure::NegativeEntry { agent: 0, item: 1, .. })
        ));
    }

    #[test]
    fn validate_unit_range() {
        let ok = ValuationProfile::new(
            vec![
                vec![int(1), ratio(1, 2), int(0)],
                vec![int(0), int(1), int(0)],
                vec![int(0), int(0), int(1)],
            ],
            Normalization::UnitRange,
        )
        .unwrap();
        assert!(validate_profile(&ok).is_ok());

        let bad = ok.with_row(1, vec![ratio(1, 3), int(1), ratio(1, 2)]).unwrap();
        assert_eq!(
            validate_profile(&bad),
            Err(ValidationFailure::RowMin {
                agent: 1,
                min: ratio(1, 3)
            })
        );
        let bad = ok.with_row(2, vec![int(0), ratio(9, 10), int(0)]).unwrap();
        assert_eq!(
            validate_profile(&bad),
            Err(ValidationFailure::RowMax {
                agent: 2,
                max: ratio(9, 10)
            })
        );
    }

    #[test]
    fn non_square_is_shape_error() {
        let e = ValuationProfile::new(
            vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]],
            Normalization::Unchecked,
        );
        assert!(matches!(e, Err(Error::Shape(_))));
    }

    #[test]
    fn preference_order_helpers() {
        let o = PreferenceOrder::from_one_based(&[3, 1, 2]).unwrap();
        assert_eq!(o.ranks(), vec![1, 2, 0]);
        assert_eq!(o.with_top(1).one_based(), vec![2, 3, 1]);
        assert_eq!(o.to_string(), "(3,1,2)");
        assert!(PreferenceOrder::from_one_based(&[1, 1, 2]).is_err());
        assert!(PreferenceOrder::from_one_based(&[0, 1]).is_err());
    }
}
