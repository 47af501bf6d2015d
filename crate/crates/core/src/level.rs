//! Weight levels: exact rationals extended by `-inf`.
//!
//! Log-norms of series and truncation cutoffs both live in the totally
//! ordered set `Q ∪ {-inf}`. The zero series has log-norm `-inf`, and a
//! series with cutoff `-inf` is exact. Addition treats `-inf` as absorbing,
//! matching the convention `-inf + x = -inf` used by every cutoff rule.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::{Rational, Result};

/// A rational weight level or `-inf`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    /// Below every rational; the log-norm of zero and the cutoff of an exact series.
    NegInf,
    /// An exact rational level.
    Finite(Rational),
}

impl Level {
    /// Level at an integer value.
    pub fn from_int(n: i64) -> Self {
        Level::Finite(Rational::from(BigInt::from(n)))
    }

    /// Level at an exact rational.
    pub fn finite(q: Rational) -> Self {
        Level::Finite(q)
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Level::NegInf)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Level::NegInf => None,
            Level::Finite(q) => Some(q),
        }
    }

    /// Sum of levels, with `-inf` absorbing.
    pub fn plus(&self, other: &Level) -> Level {
        match (self, other) {
            (Level::Finite(a), Level::Finite(b)) => Level::Finite(a + b),
            _ => Level::NegInf,
        }
    }

    /// The larger of two levels. (Named to stay clear of `Ord::max`, which
    /// would otherwise capture by-value receivers.)
    pub fn join(&self, other: &Level) -> Level {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// True when the level lies strictly below zero (so `-inf` qualifies).
    pub fn is_negative(&self) -> bool {
        match self {
            Level::NegInf => true,
            Level::Finite(q) => q.is_negative(),
        }
    }

    /// Compare against a finite rational.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        match self {
            Level::NegInf => Ordering::Less,
            Level::Finite(p) => p.cmp(q),
        }
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Level::NegInf, Level::NegInf) => Ordering::Equal,
            (Level::NegInf, Level::Finite(_)) => Ordering::Less,
            (Level::Finite(_), Level::NegInf) => Ordering::Greater,
            (Level::Finite(a), Level::Finite(b)) => a.cmp(b),
        }
    }
}

impl From<Rational> for Level {
    fn from(q: Rational) -> Self {
        Level::Finite(q)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::NegInf => write!(f, "-inf"),
            Level::Finite(q) => write!(f, "{}", format_rational(q)),
        }
    }
}

/// Parse an exact rational from `p` or `p/q` form (optional leading sign).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::BadRational {
        text: text.to_string(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let (numer, denom) = match s.split_once('/') {
        None => (s, "1"),
        Some((n, d)) => (n, d),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

/// Canonical form: reduced, `p` when the denominator is one, else `p/q`.
pub fn format_rational(q: &Rational) -> String {
    use num_traits::One;
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse a level: `-inf` or a rational literal.
pub fn parse_level(text: &str) -> Result<Level> {
    if text.trim() == "-inf" {
        Ok(Level::NegInf)
    } else {
        parse_rational(text).map(Level::Finite)
    }
}

/// Exact rational from an integer.
pub fn rational_int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}
