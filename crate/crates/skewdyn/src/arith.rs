//! Rational helpers shared by every module.
//!
//! Exponents, radii and invariants are all exact [`Q`] values; `ExtQ` adds a
//! `+∞` that sorts above every finite value.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Denominator of a rational as `u64`; saturates on absurd sizes.
pub fn denom(x: &Q) -> u64 {
    x.denom().to_u64().unwrap_or(u64::MAX)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a.max(b);
    }
    let g = a.gcd(&b);
    (a / g).saturating_mul(b)
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Formats as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q, Error> {
    let s = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("invalid rational '{s}'"),
    };
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// A rational or `+∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtQ {
    Fin(Q),
    Inf,
}

impl ExtQ {
    pub fn zero() -> Self {
        ExtQ::Fin(Q::zero())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ExtQ::Inf)
    }

    pub fn fin(&self) -> Option<&Q> {
        match self {
            ExtQ::Fin(x) => Some(x),
            ExtQ::Inf => None,
        }
    }

    pub fn add(&self, other: &ExtQ) -> ExtQ {
        match (self, other) {
            (ExtQ::Fin(a), ExtQ::Fin(b)) => ExtQ::Fin(a + b),
            _ => ExtQ::Inf,
        }
    }

    pub fn add_q(&self, other: &Q) -> ExtQ {
        match self {
            ExtQ::Fin(a) => ExtQ::Fin(a + other),
            ExtQ::Inf => ExtQ::Inf,
        }
    }

    /// Multiplication by a positive rational.
    pub fn scale(&self, k: &Q) -> ExtQ {
        match self {
            ExtQ::Fin(a) => ExtQ::Fin(a * k),
            ExtQ::Inf => ExtQ::Inf,
        }
    }

    pub fn min_with(self, other: ExtQ) -> ExtQ {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtQ::Fin(x) => q_to_f64(x),
            ExtQ::Inf => f64::INFINITY,
        }
    }
}

impl From<Q> for ExtQ {
    fn from(x: Q) -> Self {
        ExtQ::Fin(x)
    }
}

impl PartialOrd for ExtQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtQ {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtQ::Fin(a), ExtQ::Fin(b)) => a.cmp(b),
            (ExtQ::Fin(_), ExtQ::Inf) => Ordering::Less,
            (ExtQ::Inf, ExtQ::Fin(_)) => Ordering::Greater,
            (ExtQ::Inf, ExtQ::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtQ::Fin(x) => f.write_str(&fmt_q(x)),
            ExtQ::Inf => f.write_str("inf"),
        }
    }
}

pub fn parse_extq(s: &str) -> Result<ExtQ, Error> {
    match s.trim() {
        "inf" | "+inf" | "∞" => Ok(ExtQ::Inf),
        other => parse_q(other).map(ExtQ::Fin),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_order() {
        assert!(ExtQ::Fin(qi(5)) < ExtQ::Inf);
        assert!(ExtQ::Fin(q(1, 2)) < ExtQ::Fin(q(2, 3)));
        assert_eq!(ExtQ::Fin(qi(1)).add(&ExtQ::Inf), ExtQ::Inf);
    }

    #[test]
    fn rational_text() {
        assert_eq!(fmt_q(&q(-6, 4)), "-3/2");
        assert_eq!(parse_q("-3/2").unwrap(), q(-3, 2));
        assert_eq!(parse_extq("inf").unwrap(), ExtQ::Inf);
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn small_helpers() {
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(denom(&q(3, 12)), 4);
    }
}
