//! The non-Archimedean Green function g_na, with g_na ∘ f_⋄ = (c/d) g_na.

use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{fmt_q, qi, Q};
use crate::berk::BerkPoint;
use crate::cover::{classify_point, Classification};
use crate::error::Result;
use crate::par;
use crate::skew::SkewMap;

#[derive(Clone, Debug, PartialEq)]
pub enum GreenValue {
    /// Exact value, reached after `steps` iterations.
    Finite { value: Q, steps: usize },
    /// The point is certified in 𝒦.
    MinusInfinity { preperiod: usize, period: usize },
    /// No escape and no certificate after `steps` iterations.
    Unresolved { steps: usize },
}

impl GreenValue {
    pub fn value(&self) -> Option<&Q> {
        match self {
            GreenValue::Finite { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn steps(&self) -> usize {
        match self {
            GreenValue::Finite { steps, .. } | GreenValue::Unresolved { steps } => *steps,
            GreenValue::MinusInfinity { preperiod, period } => preperiod + period,
        }
    }

    pub fn to_json(&self, x: &BerkPoint) -> Value {
        let value = match self {
            GreenValue::Finite { value, .. } => fmt_q(value),
            GreenValue::MinusInfinity { .. } => "-inf".into(),
            GreenValue::Unresolved { .. } => "unresolved".into(),
        };
        json!({"point": x.to_string(), "value": value, "steps": self.steps()})
    }
}

impl fmt::Display for GreenValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GreenValue::Finite { value, .. } => write!(f, "{}", fmt_q(value)),
            GreenValue::MinusInfinity { .. } => write!(f, "-inf"),
            GreenValue::Unresolved { steps } => write!(f, "unresolved after {steps} steps"),
        }
    }
}

/// g_na(x) = −(d/c)^n · (norm exponent of f_⋄^n x) at the first n where
/// that exponent drops below t_ρ.
pub fn g_na(f: &SkewMap, x: &BerkPoint, budget: usize) -> Result<GreenValue> {
    Ok(match classify_point(f, x, budget)? {
        Classification::Escapes { n, exit } => {
            let ratio = qi(f.d() as i64) / qi(f.c() as i64);
            let mut v = -exit;
            for _ in 0..n {
                v *= &ratio;
            }
            GreenValue::Finite { value: v, steps: n }
        }
        Classification::CertifiedInK { preperiod, period } => {
            GreenValue::MinusInfinity { preperiod, period }
        }
        Classification::InCoverAtDepth(steps) => GreenValue::Unresolved { steps },
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FunctionalEquationReport {
    pub checked: usize,
    pub unresolved: usize,
    /// Points where g(f x) ≠ (c/d) g(x).
    pub violations: Vec<BerkPoint>,
}

/// Checks g_na(f_⋄x) = (c/d)·g_na(x) on every sample where both sides resolve.
pub fn functional_equation_check(
    f: &SkewMap,
    samples: &[BerkPoint],
    budget: usize,
) -> Result<FunctionalEquationReport> {
    let ratio = qi(f.c() as i64) / qi(f.d() as i64);
    let outcomes = par::try_map(samples, |x| -> Result<Option<bool>> {
        let gx = g_na(f, x, budget)?;
        let gy = g_na(f, &f.apply_point(x)?, budget)?;
        Ok(match (&gx, &gy) {
            (GreenValue::Finite { value: a, .. }, GreenValue::Finite { value: b, .. }) => {
                Some(*b == &ratio * a)
            }
            (GreenValue::MinusInfinity { .. }, GreenValue::MinusInfinity { .. }) => Some(true),
            (GreenValue::Unresolved { .. }, _) | (_, GreenValue::Unresolved { .. }) => None,
            _ => Some(false),
        })
    })?;
    let mut rep = FunctionalEquationReport::default();
    for (x, o) in samples.iter().zip(outcomes) {
        match o {
            Some(true) => rep.checked += 1,
            Some(false) => {
                rep.checked += 1;
                rep.violations.push(x.clone());
            }
            None => rep.unresolved += 1,
        }
    }
    Ok(rep)
}

/// True when g is ≤ 0, as it must be on the closed unit ball.
pub fn is_nonpositive(g: &GreenValue) -> bool {
    g.value().is_none_or(|v| v <= &Q::zero())
}
