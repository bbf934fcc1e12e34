//! Nested ball covers B_0 ⊃ f_⋄^{-1}(B_0) ⊃ … of the invariant set 𝒦,
//! point classification and the choice of the Markov level.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::arith::{qi, ExtQ, Q};
use crate::berk::BerkPoint;
use crate::error::{Error, Result};
use crate::par;
use crate::series::PuiseuxSeries as PS;
use crate::skew::{EscapeStatus, SkewMap, DEFAULT_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BallKind {
    Open,
    Closed,
}

impl BallKind {
    pub fn name(self) -> &'static str {
        match self {
            BallKind::Open => "open",
            BallKind::Closed => "closed",
        }
    }
}

/// {ord(x − center) > t} (open) or {ord(x − center) ≥ t} (closed).
///
/// The center is exact and canonical: an open ball keeps the terms of
/// exponent ≤ t (they pin the tangent direction at the boundary), a closed
/// ball keeps those < t.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: PS,
    pub t: Q,
    pub kind: BallKind,
    pub contains_critical: bool,
    pub level: usize,
    /// Index of the containing ball one level up.
    pub parent: Option<usize>,
    /// Index of the ball one level up that f_⋄ maps this ball onto.
    pub image: Option<usize>,
}

impl Ball {
    pub fn new(center: &PS, t: Q, kind: BallKind, contains_critical: bool) -> Result<Self> {
        let enough = match kind {
            BallKind::Open => center.trunc() > &ExtQ::Fin(t.clone()),
            BallKind::Closed => center.trunc() >= &ExtQ::Fin(t.clone()),
        };
        if !enough {
            return Err(Error::InsufficientPrecision(format!(
                "ball center known modulo z^{} for radius exponent {t}",
                center.trunc()
            )));
        }
        if t < Q::zero() {
            return Err(Error::NotInUnitBall);
        }
        let terms = center.terms().iter().filter(|(e, _)| match kind {
            BallKind::Open => *e <= &t,
            BallKind::Closed => *e < &t,
        });
        let center = PS::new(terms.map(|(e, c)| (e.clone(), c.clone())), ExtQ::Inf);
        Ok(Ball {
            center,
            t,
            kind,
            contains_critical,
            level: 0,
            parent: None,
            image: None,
        })
    }

    pub fn boundary(&self) -> BerkPoint {
        BerkPoint::type2(&self.center, self.t.clone()).expect("ball data is canonical")
    }

    fn holds(&self, o: &ExtQ) -> bool {
        match self.kind {
            BallKind::Open => o > &ExtQ::Fin(self.t.clone()),
            BallKind::Closed => o >= &ExtQ::Fin(self.t.clone()),
        }
    }

    /// Membership of a rigid series, using only its certified terms.
    pub fn contains_series(&self, phi: &PS) -> bool {
        self.holds(&phi.sub(&self.center).ord_lb())
    }

    /// Membership of a Berkovich point.
    pub fn contains_point(&self, x: &BerkPoint) -> bool {
        self.holds(x.t()) && self.holds(&x.center().as_exact().sub(&self.center).ord_lb())
    }

    pub fn contains_ball(&self, b: &Ball) -> bool {
        let o = b.center.sub(&self.center).ord_lb();
        let t = ExtQ::Fin(self.t.clone());
        match (self.kind, b.kind) {
            (BallKind::Closed, _) => b.t >= self.t && o >= t,
            (BallKind::Open, BallKind::Closed) => b.t > self.t && o > t,
            (BallKind::Open, BallKind::Open) => b.t >= self.t && o > t,
        }
    }

    pub fn same_ball(&self, b: &Ball) -> bool {
        self.kind == b.kind && self.t == b.t && self.contains_ball(b)
    }

    pub fn is_disjoint(&self, b: &Ball) -> bool {
        !self.contains_ball(b) && !b.contains_ball(self)
    }

    /// Whether some critical branch of `f` lies in the ball.
    pub fn meets_critical(&self, f: &SkewMap) -> Result<bool> {
        let roots = f.critical_roots(&(&self.t + qi(1)))?;
        Ok(roots.iter().any(|r| self.contains_series(&r.series)))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "boundary": self.boundary().to_json(),
            "direction": self.center.to_string(),
            "kind": self.kind.name(),
            "parent": self.parent,
            "image": self.image,
            "critical": self.contains_critical,
        })
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = match self.kind {
            BallKind::Open => ("B", ">"),
            BallKind::Closed => ("B̄", "≥"),
        };
        write!(f, "{l}({}, ord {r} {})", self.center, crate::arith::fmt_q(&self.t))
    }
}

/// Default open root ball B(0, t_ρ/2), or B(0, t0) after validation.
pub fn root_ball(f: &SkewMap, t0: Option<Q>) -> Result<Ball> {
    f.require_small_degree()?;
    let rho = match f.rho0() {
        ExtQ::Fin(r) => r,
        ExtQ::Inf => return Err(Error::NoCover),
    };
    let t0 = t0.unwrap_or_else(|| &rho / qi(2));
    let bad = |why: &str| Error::InvalidRoot(format!("t0 = {t0}: {why}"));
    if t0 <= Q::zero() || t0 >= rho {
        return Err(bad("need 0 < t0 < t_rho so that B_0 contains the invariant set"));
    }
    let mut b = Ball::new(&PS::zero(), t0.clone(), BallKind::Open, false)?;
    let img = f.image_ball(&b)?;
    if !(img.contains_ball(&b) && !img.same_ball(&b)) {
        return Err(bad("the image of B_0 does not strictly contain B_0"));
    }
    b.contains_critical = b.meets_critical(f)?;
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct Cover {
    map: SkewMap,
    levels: Vec<Vec<Ball>>,
}

impl Cover {
    pub fn new(f: &SkewMap, t0: Option<Q>) -> Result<Self> {
        let root = root_ball(f, t0)?;
        Ok(Cover {
            map: f.clone(),
            levels: vec![vec![root]],
        })
    }

    /// Cover refined down to `depth` (level `depth` is the deepest).
    pub fn build(f: &SkewMap, t0: Option<Q>, depth: usize) -> Result<Self> {
        let mut c = Self::new(f, t0)?;
        while c.depth() < depth {
            c.refine()?;
        }
        Ok(c)
    }

    pub fn map(&self) -> &SkewMap {
        &self.map
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> &Ball {
        &self.levels[0][0]
    }

    pub fn level(&self, n: usize) -> &[Ball] {
        &self.levels[n]
    }

    pub fn levels(&self) -> &[Vec<Ball>] {
        &self.levels
    }

    /// Adds level n+1 from preimages of the level-n balls.
    pub fn refine(&mut self) -> Result<()> {
        let n = self.depth();
        let cur = &self.levels[n];
        let f = &self.map;
        let pre = par::try_map(cur, |b| f.preimage_ball(b))?;
        let mut next: Vec<Ball> = Vec::new();
        for (k, balls) in pre.into_iter().enumerate() {
            for mut b in balls {
                b.level = n + 1;
                b.image = Some(k);
                b.parent = cur.iter().position(|p| p.contains_ball(&b));
                if b.parent.is_none() {
                    return Err(Error::InvalidRoot(format!(
                        "preimage {b} escapes the level-{n} cover"
                    )));
                }
                next.push(b);
            }
        }
        // sort by containing ball, then canonically, and fix indices
        let mut order: Vec<usize> = (0..next.len()).collect();
        order.sort_by(|&i, &j| {
            let (a, b) = (&next[i], &next[j]);
            a.parent
                .cmp(&b.parent)
                .then_with(|| a.center.cmp_canonical(&b.center))
                .then_with(|| a.t.cmp(&b.t))
        });
        let next: Vec<Ball> = order.into_iter().map(|i| next[i].clone()).collect();
        for i in 0..next.len() {
            for j in i + 1..next.len() {
                if !next[i].is_disjoint(&next[j]) {
                    return Err(Error::InvalidRoot(format!(
                        "level-{} balls {} and {} overlap",
                        n + 1,
                        next[i],
                        next[j]
                    )));
                }
            }
        }
        self.levels.push(next);
        Ok(())
    }

    /// Index of the level-n ball containing x.
    pub fn locate(&self, n: usize, x: &BerkPoint) -> Option<usize> {
        self.levels[n].iter().position(|b| b.contains_point(x))
    }

    /// Index of the level-n ball containing a rigid series.
    pub fn locate_series(&self, n: usize, phi: &PS) -> Option<usize> {
        self.levels[n].iter().position(|b| b.contains_series(phi))
    }

    /// Level-n ball indices visited by x, f_⋄x, … while they stay in the cover.
    pub fn itinerary(&self, n: usize, x: &BerkPoint, len: usize) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        let mut y = x.clone();
        for step in 0..len {
            match self.locate(n, &y) {
                Some(i) => out.push(i),
                None => break,
            }
            if step + 1 < len {
                y = self.map.apply_point(&y)?;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| Value::Array(l.iter().map(Ball::to_json).collect()))
            .collect();
        json!({"map": self.map.to_json(), "t0": crate::arith::fmt_q(&self.root().t), "levels": levels})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classification {
    /// The n-th iterate has norm exponent `exit` < t_ρ.
    Escapes { n: usize, exit: Q },
    /// The orbit stayed out of the escape region for `depth` steps; when
    /// `depth` is below the budget the point data ran out of precision.
    InCoverAtDepth(usize),
    CertifiedInK { preperiod: usize, period: usize },
}

/// Orbit test of x against the escape region {|x| > e^{-t_ρ}}.
pub fn classify_point(f: &SkewMap, x: &BerkPoint, budget: usize) -> Result<Classification> {
    let n0 = x.norm_exponent()?;
    if n0 <= ExtQ::zero() {
        return Err(Error::NotInUnitBall);
    }
    let rho = f.rho0();
    let mut orbit: Vec<BerkPoint> = Vec::new();
    let mut y = x.clone();
    for n in 0..=budget {
        let e = match y.norm_exponent() {
            Ok(e) => e,
            Err(Error::IndeterminateOrder) => return Ok(Classification::InCoverAtDepth(n)),
            Err(e) => return Err(e),
        };
        if e < rho {
            let exit = e.fin().cloned().expect("finite below t_rho");
            return Ok(Classification::Escapes { n, exit });
        }
        let certified = y.is_type2() || y.is_certified_rigid();
        if certified {
            if let Some(k) = orbit.iter().position(|p| p == &y) {
                return Ok(Classification::CertifiedInK {
                    preperiod: k,
                    period: n - k,
                });
            }
        }
        if n == budget {
            break;
        }
        orbit.push(y.clone());
        y = match f.apply_point(&y) {
            Ok(v) => v,
            Err(Error::InsufficientPrecision(_)) | Err(Error::IndeterminateOrder) => {
                return Ok(Classification::InCoverAtDepth(n + 1))
            }
            Err(e) => return Err(e),
        };
    }
    Ok(Classification::InCoverAtDepth(budget))
}

/// Smallest N ≤ max_level whose level-(N−1) balls avoid every critical
/// branch, together with the cover refined to level N.
pub fn choose_markov_level(f: &SkewMap, t0: Option<Q>, max_level: usize) -> Result<(usize, Cover)> {
    let mut cover = Cover::new(f, t0)?;
    let crit = f.critical_data(&qi(crate::skew::CRIT_PREC), DEFAULT_BUDGET)?;
    for c in &crit {
        match c.escape {
            EscapeStatus::Escapes(_) => {}
            EscapeStatus::InK { .. } => return Err(Error::CriticalInK),
            EscapeStatus::Unresolved(n) => {
                return Err(Error::BudgetExceeded(format!(
                    "critical orbit of {} unresolved after {n} steps",
                    c.series
                )))
            }
        }
    }
    for n in 1..=max_level.max(1) {
        while cover.depth() < n {
            cover.refine()?;
        }
        let prev = cover.level(n - 1);
        let mut clean = true;
        for b in prev {
            if b.contains_critical || b.meets_critical(f)? {
                clean = false;
                break;
            }
        }
        if clean {
            return Ok((n, cover));
        }
    }
    Err(Error::BudgetExceeded(format!(
        "critical branches still meet the level-{} cover",
        max_level.max(1) - 1
    )))
}

/// Sort helper used by reports: canonical order of balls.
pub fn cmp_balls(a: &Ball, b: &Ball) -> Ordering {
    a.center.cmp_canonical(&b.center).then_with(|| a.t.cmp(&b.t))
}
