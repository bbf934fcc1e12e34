//! Points ζ(φ, e^{-t}) of the Berkovich closed unit ball.
//!
//! A point stores its center truncated at t, so two type-2 points are equal
//! exactly when their stored data agree. Type 1 keeps the full center; a
//! finite truncation there means the point is known only approximately.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{denom, fmt_q, lcm, parse_extq, qi, ExtQ, Q};
use crate::coeff::Mode;
use crate::error::{Error, Result};
use crate::series::{newton_puiseux, PuiseuxSeries as PS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FieldView {
    /// Points over the Puiseux field: conjugate centers are distinct.
    #[default]
    OverL,
    /// Points over Laurent series: Galois-conjugate centers are identified.
    OverLaurent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerkPoint {
    center: PS,
    t: ExtQ,
    view: FieldView,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointOrder {
    Less,
    Greater,
    Equal,
    Incomparable,
}

/// Piecewise data on [0, t]: interval n is (breaks[n], breaks[n+1]] with
/// multiplicity mults[n]; the first interval is closed at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentProfile {
    pub breaks: Vec<ExtQ>,
    pub mults: Vec<u64>,
}

/// −log|P(x)| together with whether it came from an exact factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyNorm {
    pub value: Q,
    pub exact: bool,
}

impl BerkPoint {
    pub fn new(center: PS, t: ExtQ) -> Result<Self> {
        Self::with_view(center, t, FieldView::OverL)
    }

    pub fn with_view(center: PS, t: ExtQ, view: FieldView) -> Result<Self> {
        if let ExtQ::Fin(tq) = &t {
            if tq.is_negative() {
                return Err(Error::NotInUnitBall);
            }
        }
        if !center.is_in_unit_ball() {
            return Err(Error::NotInUnitBall);
        }
        // a type-1 point may carry a truncated center
        if !t.is_inf() && center.trunc() < &t {
            return Err(Error::InsufficientPrecision(format!(
                "center known modulo z^{} but radius exponent is {}",
                center.trunc(),
                t
            )));
        }
        let center = if t.is_inf() {
            center
        } else {
            center.with_trunc(t.clone())
        };
        let mut p = BerkPoint { center, t, view };
        if view == FieldView::OverLaurent {
            p.center = p.canonical_conjugate()?;
        }
        Ok(p)
    }

    pub fn gauss() -> Self {
        BerkPoint {
            center: PS::zero_mod(Q::zero()),
            t: ExtQ::zero(),
            view: FieldView::OverL,
        }
    }

    pub fn rigid(center: PS) -> Self {
        BerkPoint {
            center,
            t: ExtQ::Inf,
            view: FieldView::OverL,
        }
    }

    /// ζ(φ, e^{-t}) with t finite.
    pub fn type2(center: &PS, t: Q) -> Result<Self> {
        Self::new(center.clone(), ExtQ::Fin(t))
    }

    pub fn center(&self) -> &PS {
        &self.center
    }

    pub fn t(&self) -> &ExtQ {
        &self.t
    }

    pub fn t_fin(&self) -> Option<&Q> {
        self.t.fin()
    }

    pub fn view(&self) -> FieldView {
        self.view
    }

    pub fn in_view(&self, view: FieldView) -> Result<Self> {
        Self::with_view(self.center.clone(), self.t.clone(), view)
    }

    pub fn is_type1(&self) -> bool {
        self.t.is_inf()
    }

    pub fn is_type2(&self) -> bool {
        !self.t.is_inf()
    }

    /// True for a type-1 point whose center is an exact Puiseux polynomial.
    pub fn is_certified_rigid(&self) -> bool {
        self.t.is_inf() && self.center.is_exact()
    }

    fn canonical_conjugate(&self) -> Result<PS> {
        let conj = self.center.galois_conjugates_mode(self.center.mode())?;
        Ok(conj
            .into_iter()
            .min_by(|a, b| a.cmp_canonical(b))
            .unwrap_or_else(|| self.center.clone()))
    }

    /// −log|x| = min(ord(center), t).
    pub fn norm_exponent(&self) -> Result<ExtQ> {
        match self.center.leading() {
            Some((e, _)) => Ok(ExtQ::Fin(e.clone()).min_with(self.t.clone())),
            None if !self.t.is_inf() => Ok(self.t.clone()),
            None => self.center.ord(),
        }
    }

    /// A(x) = 1 − log diam(x) = 1 + t.
    pub fn a_value(&self) -> ExtQ {
        self.t.add_q(&qi(1))
    }

    pub fn approx_sequence(&self) -> SegmentProfile {
        let mut breaks = vec![ExtQ::zero()];
        let mut mults = vec![1u64];
        let mut m = 1u64;
        for e in self.center.terms().keys() {
            if ExtQ::Fin(e.clone()) >= self.t {
                break;
            }
            let next = lcm(m, denom(e));
            if next != m {
                let at = ExtQ::Fin(e.clone().max(Q::zero()));
                if *breaks.last().unwrap() == at {
                    *mults.last_mut().unwrap() = next;
                } else {
                    breaks.push(at);
                    mults.push(next);
                }
                m = next;
            }
        }
        breaks.push(self.t.clone());
        if breaks.len() >= 2 && breaks[breaks.len() - 1] == breaks[breaks.len() - 2] {
            // t sits exactly on a breakpoint: drop the empty last interval
            breaks.pop();
            if mults.len() >= breaks.len() {
                mults.pop();
            }
        }
        if mults.is_empty() {
            mults.push(1);
            breaks.push(self.t.clone());
        }
        SegmentProfile { breaks, mults }
    }

    /// Capacity α(x) = Σ (min(t, t_{n+1}) − t_n) / m_n.
    pub fn alpha(&self) -> ExtQ {
        if self.t.is_inf() {
            return ExtQ::Inf;
        }
        let prof = self.approx_sequence();
        let mut acc = Q::zero();
        for (n, m) in prof.mults.iter().enumerate() {
            let (a, b) = (prof.breaks[n].fin().unwrap(), prof.breaks[n + 1].fin().unwrap());
            acc += (b - a) / Q::from_integer((*m).into());
        }
        ExtQ::Fin(acc)
    }

    /// m(x): lcm of exponent denominators of the center below t.
    pub fn multiplicity(&self) -> u64 {
        self.center.ram_below(&self.t)
    }

    /// b(x) = lcm(m(x), q(A(x))).
    pub fn generic_multiplicity(&self) -> Result<u64> {
        match &self.t {
            ExtQ::Fin(t) => Ok(lcm(self.multiplicity(), denom(t))),
            ExtQ::Inf => Err(Error::NotType2),
        }
    }

    /// Lower bound for ord(center_x − center_y), exact when both are exact.
    fn diff_order(&self, other: &Self) -> ExtQ {
        self.center.sub(&other.center).ord_lb()
    }

    fn le_over_l(&self, y: &Self) -> bool {
        self.t >= y.t && (self.diff_order(y) >= y.t || (self.t == y.t && self.center == y.center))
    }

    fn conjugates(&self) -> Vec<Self> {
        match self.center.galois_conjugates_mode(self.center.mode()) {
            Ok(cs) => cs
                .into_iter()
                .map(|c| BerkPoint {
                    center: c,
                    t: self.t.clone(),
                    view: FieldView::OverL,
                })
                .collect(),
            Err(_) => vec![self.clone()],
        }
    }

    fn le(&self, y: &Self) -> bool {
        match self.view {
            FieldView::OverL => self.le_over_l(y),
            FieldView::OverLaurent => self.conjugates().iter().any(|c| c.le_over_l(y)),
        }
    }

    pub fn compare(&self, y: &Self) -> PointOrder {
        match (self.le(y), y.le(self)) {
            (true, true) => PointOrder::Equal,
            (true, false) => PointOrder::Less,
            (false, true) => PointOrder::Greater,
            (false, false) => PointOrder::Incomparable,
        }
    }

    /// x ≤ y: x lies in the closed ball bounded by y.
    pub fn is_below(&self, y: &Self) -> bool {
        self.le(y)
    }

    /// x ∧ y, the smallest point above both.
    pub fn wedge(&self, y: &Self) -> Self {
        let t = self
            .t
            .clone()
            .min_with(y.t.clone())
            .min_with(self.diff_order(y));
        let t = if self.center == y.center && self.t == y.t {
            self.t.clone()
        } else {
            t
        };
        BerkPoint::with_view(self.center.clone(), t, self.view)
            .expect("wedge of unit-ball points lies in the unit ball")
    }

    /// −log|P(x)| by the product rule over the roots of P, or a monomial
    /// lower bound (flagged inexact) when the roots cannot be resolved.
    pub fn poly_norm(&self, p: &[PS]) -> Result<PolyNorm> {
        let lead = p
            .iter()
            .rev()
            .find(|a| !a.is_exact_zero())
            .ok_or(Error::Invalid("zero polynomial".into()))?;
        let lead_ord = match lead.ord()? {
            ExtQ::Fin(o) => o,
            ExtQ::Inf => unreachable!(),
        };
        let t = match &self.t {
            ExtQ::Fin(t) => t.clone(),
            ExtQ::Inf => return self.poly_norm_bound(p).map(|v| PolyNorm { value: v, exact: false }),
        };
        let prec = &t + qi(1);
        let mode = if p.iter().all(PS::is_exact_mode) && self.center.is_exact_mode() {
            Mode::Exact
        } else {
            Mode::Numeric
        };
        match newton_puiseux(p, &prec, mode) {
            Ok(roots) => {
                let mut acc = lead_ord;
                for r in roots {
                    let d = self.center.as_exact().sub(&r.series).ord_lb();
                    let v = d.min_with(ExtQ::Fin(t.clone()));
                    acc += v.fin().unwrap() * Q::from_integer(r.mult.into());
                }
                Ok(PolyNorm {
                    value: acc,
                    exact: true,
                })
            }
            Err(_) => self
                .poly_norm_bound(p)
                .map(|v| PolyNorm { value: v, exact: false }),
        }
    }

    /// min_j (ord a_j + j·|x|-exponent): a lower bound for −log|P(x)|.
    fn poly_norm_bound(&self, p: &[PS]) -> Result<Q> {
        let nx = self.norm_exponent()?;
        let mut best: Option<Q> = None;
        for (j, a) in p.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            let v = a.ord_lb().add(&nx.scale(&qi(j as i64)));
            if let ExtQ::Fin(v) = v {
                best = Some(best.map_or(v.clone(), |b: Q| b.min(v)));
            }
        }
        best.ok_or(Error::IndeterminateOrder)
    }

    pub fn to_json(&self) -> Value {
        json!({"center": self.center.as_exact().to_string(), "t": fmt_extq(&self.t)})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let c = v
            .get("center")
            .and_then(Value::as_str)
            .ok_or(Error::Invalid("point needs a \"center\" string".into()))?;
        let t = v
            .get("t")
            .and_then(Value::as_str)
            .ok_or(Error::Invalid("point needs a \"t\" string".into()))?;
        let t = parse_extq(t)?;
        let c: PS = c.parse()?;
        Self::new(c.as_exact(), t)
    }
}

pub fn fmt_extq(t: &ExtQ) -> String {
    match t {
        ExtQ::Fin(q) => fmt_q(q),
        ExtQ::Inf => "inf".into(),
    }
}

impl fmt::Display for BerkPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "zeta({}, {})", self.center.as_exact(), fmt_extq(&self.t))
    }
}

impl std::str::FromStr for BerkPoint {
    type Err = Error;

    /// Parses `zeta(<series>, <t>)` or a bare series (a rigid point).
    fn from_str(s: &str) -> Result<Self> {
        let st = s.trim();
        if let Some(inner) = st.strip_prefix("zeta(").and_then(|r| r.strip_suffix(')')) {
            let (c, t) = inner.rsplit_once(',').ok_or(Error::Parse {
                pos: 5,
                msg: "expected 'zeta(<series>, <t>)'".into(),
            })?;
            let t = parse_extq(t)?;
            let c: PS = c.parse().map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse { pos: pos + 5, msg },
                other => other,
            })?;
            return Self::new(c.as_exact(), t);
        }
        let c: PS = st.parse()?;
        Ok(Self::rigid(c))
    }
}

impl PartialOrd for BerkPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.compare(other) {
            PointOrder::Less => Some(Ordering::Less),
            PointOrder::Greater => Some(Ordering::Greater),
            PointOrder::Equal => Some(Ordering::Equal),
            PointOrder::Incomparable => None,
        }
    }
}
