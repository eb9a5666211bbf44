//! Allocation mechanisms.
//!
//! Ordinal mechanisms take one [`PreferenceOrder`] per agent; the cardinal
//! [`NaiveMaxWelfare`] takes one reported valuation row per agent. Every
//! mechanism produces an exact [`AssignmentMatrix`].

mod dictatorship;
mod naive;
mod ps;
mod rp;

use std::fmt;
use std::hash::Hash;

pub use dictatorship::{random_dictatorial, serial_dictatorship, RandomDictatorial, SerialDictatorship};
pub use naive::{naive_max_welfare, NaiveMaxWelfare};
pub use ps::{probabilistic_serial, ExhaustionTimes, ProbabilisticSerial};
pub use rp::{random_priority, RandomPriority, RpMode, DEFAULT_RP_EXACT_CAP};

use crate::profile::{AssignmentMatrix, PreferenceOrder};
use crate::rational::Rational;
use crate::Result;

/// Whether a mechanism reads orders or numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    Ordinal,
    Cardinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputKind {
    Randomized,
    Deterministic,
}

/// Names the runnable mechanisms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MechanismId {
    ProbabilisticSerial,
    RandomPriority,
    /// Fixed priority order of agents (0-based).
    SerialDictatorship(Vec<usize>),
    RandomDictatorial,
    NaiveMaxWelfare,
}

impl MechanismId {
    pub fn input_kind(&self) -> InputKind {
        match self {
            MechanismId::NaiveMaxWelfare => InputKind::Cardinal,
            _ => InputKind::Ordinal,
        }
    }

    pub fn output_kind(&self) -> OutputKind {
        match self {
            MechanismId::SerialDictatorship(_) | MechanismId::NaiveMaxWelfare => {
                OutputKind::Deterministic
            }
            _ => OutputKind::Randomized,
        }
    }

    /// Short name used on the command line and in reports.
    pub fn key(&self) -> &'static str {
        match self {
            MechanismId::ProbabilisticSerial => "ps",
            MechanismId::RandomPriority => "rp",
            MechanismId::SerialDictatorship(_) => "sd",
            MechanismId::RandomDictatorial => "rd",
            MechanismId::NaiveMaxWelfare => "naive",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismId::ProbabilisticSerial => f.write_str("probabilistic-serial"),
            MechanismId::RandomPriority => f.write_str("random-priority"),
            MechanismId::SerialDictatorship(order) => {
                let o: Vec<String> = order.iter().map(|a| (a + 1).to_string()).collect();
                write!(f, "serial-dictatorship({})", o.join(","))
            }
            MechanismId::RandomDictatorial => f.write_str("random-dictatorial"),
            MechanismId::NaiveMaxWelfare => f.write_str("naive-max-welfare"),
        }
    }
}

/// A single agent's report: a strict order or a valuation row.
pub trait Report: Clone + Ord + Hash + fmt::Debug + Send + Sync {
    /// "ordinal" or "cardinal".
    const KIND: &'static str;

    fn as_order(&self) -> Option<&PreferenceOrder>;

    fn from_order(order: PreferenceOrder) -> Option<Self>;

    fn from_values(row: Vec<Rational>) -> Option<Self>;

    /// Human-facing form with 1-based item labels where relevant.
    fn label(&self) -> String;
}

impl Report for PreferenceOrder {
    const KIND: &'static str = "ordinal";

    fn as_order(&self) -> Option<&PreferenceOrder> {
        Some(self)
    }

    fn from_order(order: PreferenceOrder) -> Option<Self> {
        Some(order)
    }

    fn from_values(_row: Vec<Rational>) -> Option<Self> {
        None
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl Report for Vec<Rational> {
    const KIND: &'static str = "cardinal";

    fn as_order(&self) -> Option<&PreferenceOrder> {
        None
    }

    fn from_order(_order: PreferenceOrder) -> Option<Self> {
        None
    }

    fn from_values(row: Vec<Rational>) -> Option<Self> {
        Some(row)
    }

    fn label(&self) -> String {
        let parts: Vec<String> = self.iter().map(crate::rational::format_rational).collect();
        format!("({})", parts.join(","))
    }
}

/// A direct-revelation mechanism over a fixed strategy type.
pub trait Mechanism: Sync {
    /// One agent's report.
    type Strategy: Report;

    fn id(&self) -> MechanismId;

    fn allocate(&self, profile: &[Self::Strategy]) -> Result<AssignmentMatrix>;

    /// Agent's row of the assignment matrix.
    fn agent_row(&self, profile: &[Self::Strategy], agent: usize) -> Result<Vec<Rational>> {
        Ok(self.allocate(profile)?.row(agent).to_vec())
    }

    /// Exact best reply of `agent` over every strict order, as
    /// `(lexicographically smallest maximizer, utility)`.
    ///
    /// Mechanisms with structure to exploit override this; `None` tells the
    /// caller to fall back to brute-force enumeration.
    fn best_strict_order(
        &self,
        _profile: &[Self::Strategy],
        _agent: usize,
        _truth: &[Rational],
    ) -> Option<Result<(Self::Strategy, Rational)>> {
        None
    }
}

/// Utility of a lottery row under a valuation row.
pub fn dot(row: &[Rational], values: &[Rational]) -> Rational {
    row.iter()
        .zip(values)
        .fold(Rational::from_integer(0.into()), |acc, (p, u)| acc + p * u)
}
