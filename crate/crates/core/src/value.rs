//! Value functions, exact values, and thresholds.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{add, Error, Result};

/// Value functions for finite (slave) and infinite (master) runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueFn {
    Sum,
    SumPlus,
    LimAvg,
}

impl ValueFn {
    pub fn is_finite_word(self) -> bool {
        matches!(self, ValueFn::Sum | ValueFn::SumPlus)
    }
}

/// Value of a word under an automaton.
///
/// The derived order is `NegInfinity < Finite(_) < PlusInfinity < Bottom`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueResult {
    NegInfinity,
    Finite(BigRational),
    PlusInfinity,
    Bottom,
}

impl ValueResult {
    pub fn finite(numer: i64, denom: i64) -> Self {
        ValueResult::Finite(BigRational::new(numer.into(), denom.into()))
    }

    pub fn integer(n: i64) -> Self {
        ValueResult::Finite(BigRational::from_integer(n.into()))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            ValueResult::Finite(r) => Some(r),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            ValueResult::NegInfinity => "neg-infinity",
            ValueResult::Finite(_) => "finite",
            ValueResult::PlusInfinity => "plus-infinity",
            ValueResult::Bottom => "bottom",
        }
    }
}

impl fmt::Display for ValueResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueResult::NegInfinity => write!(f, "-inf"),
            ValueResult::Finite(r) => write!(f, "{}", r),
            ValueResult::PlusInfinity => write!(f, "+inf"),
            ValueResult::Bottom => write!(f, "bottom"),
        }
    }
}

/// Threshold `≤ value` (non-strict) or `< value` (strict).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Threshold {
    pub value: BigRational,
    pub strict: bool,
}

impl Threshold {
    pub fn le(value: BigRational) -> Self {
        Threshold { value, strict: false }
    }

    pub fn lt(value: BigRational) -> Self {
        Threshold { value, strict: true }
    }

    pub fn le_int(n: i64) -> Self {
        Threshold::le(BigRational::from_integer(n.into()))
    }

    pub fn lt_int(n: i64) -> Self {
        Threshold::lt(BigRational::from_integer(n.into()))
    }

    /// Whether a word with value `v` witnesses the threshold.
    pub fn admits(&self, v: &ValueResult) -> bool {
        match v {
            ValueResult::NegInfinity => true,
            ValueResult::Finite(r) => {
                if self.strict {
                    r < &self.value
                } else {
                    r <= &self.value
                }
            }
            ValueResult::PlusInfinity | ValueResult::Bottom => false,
        }
    }

    /// `-t` with flipped strictness, used to decide universality on the mirrored automaton.
    pub fn mirrored(&self) -> Threshold {
        Threshold { value: -self.value.clone(), strict: !self.strict }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", if self.strict { "<" } else { "<=" }, self.value)
    }
}

/// Value of a finite weight sequence under `Sum` or `Sum⁺`; the empty sequence has value 0.
pub fn finite_value(value_fn: ValueFn, weights: &[i64]) -> Result<i64> {
    let mut total = 0i64;
    for &w in weights {
        let w = match value_fn {
            ValueFn::Sum => w,
            ValueFn::SumPlus => w.checked_abs().ok_or(Error::Overflow)?,
            ValueFn::LimAvg => {
                return Err(Error::Precondition("LimAvg is not a finite-word value function".into()))
            }
        };
        total = add(total, w)?;
    }
    Ok(total)
}

/// Limit average of the ultimately periodic sequence `prefix · period^ω` after removing silent (`None`) entries.
pub fn limavg_periodic(prefix: &[Option<i64>], period: &[Option<i64>]) -> Result<ValueResult> {
    if period.is_empty() {
        return Err(Error::Precondition("period must be nonempty".into()));
    }
    let _ = prefix;
    let values: Vec<i64> = period.iter().flatten().copied().collect();
    Ok(mean(&values))
}

/// Mean of a nonempty sequence, `PlusInfinity` for the empty one.
pub(crate) fn mean(values: &[i64]) -> ValueResult {
    if values.is_empty() {
        return ValueResult::PlusInfinity;
    }
    let total: BigInt = values.iter().map(|&v| BigInt::from(v)).sum();
    ValueResult::Finite(BigRational::new(total, BigInt::from(values.len())))
}

/// Parses `p/q` or an integer into a rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim().parse::<BigInt>().ok()?, q.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}
