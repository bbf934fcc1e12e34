//! Multiplicity bounds on 𝒦 and the unbounded-multiplicity witness.
//!
//! The bound is an lcm of generic multiplicities b(y), b(f_⋄y) over
//! cover boundary points; it is an upper bound, not a sharp one.

use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{denom, fmt_q, lcm, qi, ExtQ, Q};
use crate::berk::BerkPoint;
use crate::cover::{root_ball, Cover};
use crate::error::{Error, Result};
use crate::series::PuiseuxSeries as PS;
use crate::skew::{EscapeStatus, SkewMap, CRIT_PREC, DEFAULT_BUDGET};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MultBound {
    Finite(u64),
    Unbounded,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEvidence {
    pub level: usize,
    pub point: BerkPoint,
    pub m: u64,
    pub b: u64,
    pub b_image: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityReport {
    pub bound: MultBound,
    pub evidence: Vec<BoundaryEvidence>,
    /// L^N factor applied when non-Crit⁺ branches meet the cover.
    pub correction: Option<u64>,
    /// (n, A(ĉ_n)) for the witness.
    pub trace: Vec<(usize, Q)>,
    /// First index from which the recurrence was used.
    pub regime_start: Option<usize>,
}

impl MultiplicityReport {
    fn new(bound: MultBound) -> Self {
        MultiplicityReport {
            bound,
            evidence: Vec::new(),
            correction: None,
            trace: Vec::new(),
            regime_start: None,
        }
    }

    /// Denominators q(A(ĉ_n)) along the witness trace.
    pub fn trace_denominators(&self) -> Vec<u64> {
        self.trace.iter().map(|(_, a)| denom(a)).collect()
    }

    pub fn to_json(&self) -> Value {
        let bound = match &self.bound {
            MultBound::Finite(b) => json!(b),
            MultBound::Unbounded => json!("unbounded"),
            MultBound::Unresolved => json!("unresolved"),
        };
        let evidence: Vec<Value> = self
            .evidence
            .iter()
            .map(|e| {
                json!({"level": e.level, "point": e.point.to_string(), "m": e.m, "b": e.b, "b_image": e.b_image})
            })
            .collect();
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|(n, a)| json!({"n": n, "A": fmt_q(a), "q": denom(a)}))
            .collect();
        json!({
            "bound": bound,
            "upper_bound_only": matches!(self.bound, MultBound::Finite(_)),
            "correction": self.correction,
            "evidence": evidence,
            "trace": trace,
            "regime_start": self.regime_start,
        })
    }
}

/// q(d/(1+j)).
pub fn nu(d: u64, j: u64) -> u64 {
    (1 + j) / d.gcd(&(1 + j))
}

/// Upper bound on the multiplicity of points of 𝒦 from the level-N cover.
pub fn bound_multiplicity(f: &SkewMap, cover: &Cover, n: usize) -> Result<MultiplicityReport> {
    if f.is_product() {
        // 𝒦 is the single smooth curve w = 0
        return Ok(MultiplicityReport::new(MultBound::Finite(1)));
    }
    let crit = f.critical_data(&qi(CRIT_PREC), DEFAULT_BUDGET)?;
    for c in crit.iter().filter(|c| c.in_crit_plus) {
        if !matches!(c.escape, EscapeStatus::Escapes(_)) {
            return Err(Error::HypothesisFailed(format!(
                "critical branch {} has nu = {} and does not escape ({:?})",
                c.series, c.nu, c.escape
            )));
        }
    }
    if n == 0 || n > cover.depth() {
        return Err(Error::Invalid(format!("cover has no level {n}")));
    }
    let mut rep = MultiplicityReport::new(MultBound::Unresolved);
    let mut q = 1u64;
    for level in [n - 1, n] {
        for b in cover.level(level) {
            let y = b.boundary();
            let fy = f.apply_point(&y)?;
            let ev = BoundaryEvidence {
                level,
                m: y.multiplicity(),
                b: y.generic_multiplicity()?,
                b_image: fy.generic_multiplicity()?,
                point: y,
            };
            q = lcm(q, lcm(ev.b, ev.b_image));
            rep.evidence.push(ev);
        }
    }
    let mut meets = false;
    for c in crit.iter().filter(|c| !c.in_crit_plus) {
        for level in [n - 1, n] {
            if cover.level(level).iter().any(|b| b.contains_series(&c.series)) {
                meets = true;
            }
        }
    }
    if meets {
        let l = (0..f.c()).fold(1, |acc, j| lcm(acc, nu(f.d(), j)));
        let ln = l.pow(n as u32);
        rep.correction = Some(ln);
        q *= ln;
    }
    rep.bound = MultBound::Finite(q);
    Ok(rep)
}

/// Denominator growth of A(ĉ_n) along the nested balls shrinking to a
/// periodic Crit⁺ branch c0.
pub fn unbounded_witness(f: &SkewMap, c0: &PS, n_max: usize) -> Result<MultiplicityReport> {
    if f.rho0().is_inf() {
        return Err(Error::HypothesisFailed("the invariant set is a single point".into()));
    }
    let c0 = c0.as_exact();
    let crit = f.critical_data(&qi(CRIT_PREC), DEFAULT_BUDGET)?;
    let br = crit
        .iter()
        .find(|c| c.series == c0)
        .ok_or_else(|| Error::HypothesisFailed(format!("{c0} is not a critical branch")))?;
    if br.nu < 2 {
        return Err(Error::HypothesisFailed(format!("nu({c0}) = 1")));
    }
    let period = match br.escape {
        EscapeStatus::InK { preperiod: 0, period } => period,
        _ => {
            return Err(Error::HypothesisFailed(format!(
                "{c0} is not periodic ({:?})",
                br.escape
            )))
        }
    };
    let g = if period == 1 { f.clone() } else { f.iterate_map(period as u32)? };
    let d = g.d();
    let roots = g.critical_roots(&qi(CRIT_PREC))?;
    let j0 = roots
        .iter()
        .find(|r| r.series == c0)
        .map(|r| r.mult)
        .ok_or_else(|| Error::HypothesisFailed("branch lost under iteration".into()))?;
    let orders: Vec<(ExtQ, usize)> = roots
        .iter()
        .map(|r| (c0.sub(&r.series).ord_lb(), r.mult))
        .collect();
    // slope is J0 below every other branch's separation point
    let sep = orders
        .iter()
        .filter_map(|(o, _)| o.fin().cloned())
        .max()
        .unwrap_or_else(Q::zero);
    let ratio = Q::new(d.into(), ((j0 + 1) as u64).into());

    let mut rep = MultiplicityReport::new(MultBound::Unresolved);
    let b0 = root_ball(&g, None)?;
    if !b0.contains_series(&c0) {
        return Err(Error::HypothesisFailed(format!("{c0} is outside the root ball")));
    }
    let mut ts: Vec<Q> = vec![b0.t.clone()];
    if n_max >= 1 {
        let cover = Cover::build(&g, None, 1)?;
        let b1 = cover
            .level(1)
            .iter()
            .find(|b| b.contains_series(&c0))
            .ok_or_else(|| Error::HypothesisFailed("no level-1 ball contains c0".into()))?;
        ts.push(b1.t.clone());
    }
    let mut regime: Option<usize> = None;
    while ts.len() <= n_max {
        let n = ts.len() - 1;
        if regime.is_none() && ts[n] >= sep && n >= 1 {
            regime = Some(n);
        }
        let next = match regime {
            // A(ĉ_{n+1}) = A(ĉ_n) + d/(J+1)·(A(ĉ_n) − A(ĉ_{n−1}))
            Some(_) => &ts[n] + &ratio * (&ts[n] - &ts[n - 1]),
            None => g.solve_radius(&orders, &ts[n]),
        };
        ts.push(next);
    }
    rep.regime_start = regime;
    rep.trace = ts.iter().enumerate().map(|(n, t)| (n, t + Q::one())).collect();

    let qs = rep.trace_denominators();
    let nu_g = br.nu.max(nu(d, j0 as u64));
    if let Some(n0) = regime {
        // every step of the tail multiplies the denominator by at least ν
        let tail = &qs[n0..];
        let grows = tail.len() >= 3 && tail.windows(2).all(|w| w[1] >= nu_g * w[0]);
        let prior = qs[..=n0].iter().copied().max().unwrap_or(1);
        if grows && *qs.last().unwrap() > prior {
            rep.bound = MultBound::Unbounded;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::q;
    use crate::cover::choose_markov_level;
    use crate::skew::map_from_strs;

    #[test]
    fn quartic_bound_is_one() {
        let f = map_from_strs(4, 2, &["-z^4"]).unwrap();
        let (n, cover) = choose_markov_level(&f, None, 5).unwrap();
        let rep = bound_multiplicity(&f, &cover, n).unwrap();
        assert_eq!(rep.bound, MultBound::Finite(1));
        assert!(rep.evidence.iter().all(|e| e.b % e.m == 0));
        let product = map_from_strs(3, 2, &[]).unwrap();
        let c = Cover::build(&f, None, 1).unwrap();
        assert_eq!(bound_multiplicity(&product, &c, 1).unwrap().bound, MultBound::Finite(1));
    }

    #[test]
    fn cubic_witness() {
        let f = map_from_strs(5, 3, &["0", "0", "-3*z"]).unwrap();
        let c = Cover::build(&f, None, 1).unwrap();
        assert!(matches!(bound_multiplicity(&f, &c, 1), Err(Error::HypothesisFailed(_))));
        let rep = unbounded_witness(&f, &PS::zero(), 12).unwrap();
        let ts: Vec<Q> = rep.trace.iter().map(|(_, a)| a - Q::one()).collect();
        assert_eq!(&ts[..4], &[q(1, 2), q(5, 6), q(19, 12), q(83, 24)]);
        assert_eq!(rep.regime_start, Some(2));
        assert_eq!(rep.bound, MultBound::Unbounded);
        let short = unbounded_witness(&f, &PS::zero(), 1).unwrap();
        assert_eq!(short.bound, MultBound::Unresolved);
        let quartic = map_from_strs(4, 2, &["-z^4"]).unwrap();
        assert!(matches!(
            unbounded_witness(&quartic, &PS::zero(), 5),
            Err(Error::HypothesisFailed(_))
        ));
    }
}
