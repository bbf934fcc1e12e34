//! The skew product f(z, w) = (z^d, w^c + Σ h_j(z) w^j) and its action f_⋄.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{qi, ExtQ, Q};
use crate::berk::BerkPoint;
use crate::coeff::{Coeff, Mode};
use crate::cover::{Ball, BallKind};
use crate::error::{Error, Result};
use crate::series::{newton_puiseux, poly_eval, PuiseuxSeries as PS, Root};

/// Precision used for critical branches unless a caller needs more.
pub const CRIT_PREC: i64 = 24;
pub const DEFAULT_BUDGET: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EscapeStatus {
    /// The n-th iterate has norm exponent below t_ρ.
    Escapes(usize),
    /// Exact recurrence of the iterated series.
    InK { preperiod: usize, period: usize },
    Unresolved(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalBranch {
    pub series: PS,
    /// Order of jac_w along the branch.
    pub j: usize,
    /// ν = q(d/(1+J)).
    pub nu: u64,
    pub in_crit_plus: bool,
    pub escape: EscapeStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidPreimage {
    pub root: PS,
    /// Local degree r = multiplicity of the root.
    pub r: usize,
    /// e = d·m(root)/m(ψ).
    pub e: Q,
}

type RootCache = Arc<Mutex<Option<(ExtQ, Arc<Vec<Root>>)>>>;

#[derive(Clone)]
pub struct SkewMap {
    d: u64,
    c: u64,
    h: Vec<PS>,
    mode: Mode,
    permissive: bool,
    crit: RootCache,
}

impl PartialEq for SkewMap {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.c == o.c && self.h == o.h && self.mode == o.mode
    }
}

impl fmt::Debug for SkewMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SkewMap({self})")
    }
}

impl fmt::Display for SkewMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(z^{}, w^{}", self.d, self.c)?;
        for j in (0..self.c as usize).rev() {
            let h = &self.h[j];
            if h.is_exact_zero() {
                continue;
            }
            let w = match j {
                0 => String::new(),
                1 => "*w".to_string(),
                _ => format!("*w^{j}"),
            };
            write!(f, " + ({h}){w}")?;
        }
        write!(f, ")")
    }
}

fn ext_to_q(e: &ExtQ) -> Q {
    e.fin().cloned().expect("finite value")
}

impl SkewMap {
    /// `h[j]` is the coefficient of w^j, j < c.
    pub fn new(d: u64, c: u64, h: Vec<PS>) -> Result<Self> {
        Self::build(d, c, h, Mode::Exact, false)
    }

    pub fn build(d: u64, c: u64, mut h: Vec<PS>, mode: Mode, permissive: bool) -> Result<Self> {
        if d < 2 || c < 2 {
            return Err(Error::InvalidMap("need d ≥ 2 and c ≥ 2".into()));
        }
        if c >= d && !permissive {
            return Err(Error::InvalidMap(format!(
                "small relative degree requires c < d (got c = {c}, d = {d})"
            )));
        }
        if h.len() > c as usize {
            return Err(Error::InvalidMap("h_j given for j ≥ c".into()));
        }
        h.resize(c as usize, PS::zero());
        for (j, hj) in h.iter().enumerate() {
            if let Some((e, _)) = hj.leading() {
                if e < &Q::one() {
                    return Err(Error::InvalidMap(format!("h_{j} must vanish at z = 0")));
                }
            }
            if hj.terms().keys().any(|e| !e.is_integer()) {
                return Err(Error::InvalidMap(format!("h_{j} must be a power series in z")));
            }
        }
        if mode == Mode::Numeric {
            h = h.iter().map(PS::to_numeric).collect();
        }
        Ok(SkewMap {
            d,
            c,
            h,
            mode,
            permissive,
            crit: Arc::new(Mutex::new(None)),
        })
    }

    /// Parses `{"d": 4, "c": 2, "h": {"0": "-z^4"}, "mode": "exact"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let get_u = |k: &str| {
            v.get(k)
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Invalid(format!("map needs integer \"{k}\"")))
        };
        let d = get_u("d")?;
        let c = get_u("c")?;
        let mut h = vec![PS::zero(); c as usize];
        if let Some(obj) = v.get("h") {
            let obj = obj
                .as_object()
                .ok_or_else(|| Error::Invalid("\"h\" must be an object".into()))?;
            for (k, s) in obj {
                let j: usize = k
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad h index '{k}'")))?;
                if j >= c as usize {
                    return Err(Error::InvalidMap(format!("h_{j} with j ≥ c")));
                }
                let s = s
                    .as_str()
                    .ok_or_else(|| Error::Invalid(format!("h_{j} must be a series string")))?;
                h[j] = s.parse()?;
            }
        }
        let mode = match v.get("mode").and_then(Value::as_str) {
            None | Some("exact") => Mode::Exact,
            Some("numeric") => Mode::Numeric,
            Some(other) => return Err(Error::Invalid(format!("unknown mode '{other}'"))),
        };
        let permissive = v.get("permissive").and_then(Value::as_bool).unwrap_or(false);
        Self::build(d, c, h, mode, permissive)
    }

    pub fn to_json(&self) -> Value {
        let h: serde_json::Map<String, Value> = self
            .h
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_exact_zero())
            .map(|(j, s)| (j.to_string(), Value::String(s.to_string())))
            .collect();
        json!({"d": self.d, "c": self.c, "h": h, "mode": self.mode.name()})
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn c(&self) -> u64 {
        self.c
    }

    pub fn h(&self) -> &[PS] {
        &self.h
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self> {
        Self::build(self.d, self.c, self.h.clone(), mode, self.permissive)
    }

    pub fn is_small_degree(&self) -> bool {
        self.c < self.d
    }

    /// Guard for routines whose theory needs c < d.
    pub fn require_small_degree(&self) -> Result<()> {
        if self.is_small_degree() {
            Ok(())
        } else {
            Err(Error::InvalidMap("routine requires c < d".into()))
        }
    }

    pub fn is_product(&self) -> bool {
        self.h.iter().all(PS::is_exact_zero)
    }

    /// Coefficients of w ↦ w^c + Σ h_j w^j, index = power of w.
    pub fn fiber_poly(&self) -> Vec<PS> {
        let mut p = self.h.clone();
        p.push(PS::one());
        p
    }

    /// Coefficients of jac_w(f) = c w^{c−1} + Σ j h_j w^{j−1}.
    pub fn jac_poly(&self) -> Vec<PS> {
        let mut p: Vec<PS> = (1..self.c as usize)
            .map(|j| self.h[j].scale(&Coeff::from_int(j as i64)))
            .collect();
        p.push(PS::constant(Coeff::from_int(self.c as i64)));
        p
    }

    /// f_⋄(φ) = φ(z^{1/d})^c + Σ h_j(z^{1/d}) φ(z^{1/d})^j.
    pub fn apply_rigid(&self, phi: &PS) -> PS {
        let psi = phi.ramify(self.d);
        let coeffs: Vec<PS> = self.fiber_poly().iter().map(|a| a.ramify(self.d)).collect();
        poly_eval(&coeffs, &psi)
    }

    /// t_ρ = min_j ord(h_j)/(c − j) over nonzero h_j.
    pub fn rho0(&self) -> ExtQ {
        let mut best = ExtQ::Inf;
        for (j, hj) in self.h.iter().enumerate() {
            if let Some((e, _)) = hj.leading() {
                let v = e / qi(self.c as i64 - j as i64);
                best = best.min_with(ExtQ::Fin(v));
            } else if let ExtQ::Fin(t) = hj.trunc() {
                // only a lower bound is known for this coefficient
                let v = t / qi(self.c as i64 - j as i64);
                best = best.min_with(ExtQ::Fin(v));
            }
        }
        best
    }

    /// Roots of jac_w, each correct at least modulo z^prec.
    pub fn critical_roots(&self, prec: &Q) -> Result<Arc<Vec<Root>>> {
        let want = ExtQ::Fin(prec.clone().max(qi(CRIT_PREC)));
        let mut cache = self.crit.lock().unwrap();
        if let Some((have, roots)) = cache.as_ref() {
            if *have >= want || roots.iter().all(|r| r.series.is_exact()) {
                return Ok(roots.clone());
            }
        }
        let roots = Arc::new(newton_puiseux(&self.jac_poly(), want.fin().unwrap(), self.mode)?);
        *cache = Some((want, roots.clone()));
        Ok(roots)
    }

    /// (d − 1) + Σ_i J_i min(ord(center − c_i), t).
    pub fn jac_exponent(&self, x: &BerkPoint) -> Result<ExtQ> {
        let s = self.crit_sum(x)?;
        Ok(s.add_q(&qi(self.d as i64 - 1)))
    }

    fn crit_sum(&self, x: &BerkPoint) -> Result<ExtQ> {
        let need = match x.t() {
            ExtQ::Fin(t) => t.clone(),
            ExtQ::Inf => qi(CRIT_PREC),
        };
        let roots = self.critical_roots(&(need + qi(1)))?;
        let center = x.center().as_exact();
        let mut acc = ExtQ::zero();
        for r in roots.iter() {
            let o = center.sub(&r.series).ord_lb();
            let v = o.min_with(x.t().clone());
            if x.t().is_inf() && !v.is_inf() && v >= *r.series.trunc() {
                return Err(Error::InsufficientPrecision(
                    "critical branch agrees with the point beyond its precision".into(),
                ));
            }
            acc = acc.add(&v.scale(&qi(r.mult as i64)));
        }
        Ok(acc)
    }

    /// f_⋄ on a point, via the Jacobian formula for the radius.
    pub fn apply_point(&self, x: &BerkPoint) -> Result<BerkPoint> {
        match x.t() {
            ExtQ::Inf => {
                let img = self.apply_rigid(x.center());
                BerkPoint::with_view(img, ExtQ::Inf, x.view())
            }
            ExtQ::Fin(t) => {
                let s = ext_to_q(&self.crit_sum(x)?);
                let t_new = (t + s) / qi(self.d as i64);
                let img = self.apply_rigid(&x.center().as_exact());
                BerkPoint::with_view(img, ExtQ::Fin(t_new), x.view())
            }
        }
    }

    /// Iterates apply_point `n` times.
    pub fn iterate_point(&self, x: &BerkPoint, n: usize) -> Result<BerkPoint> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply_point(&y)?;
        }
        Ok(y)
    }

    fn escape_status(&self, branch: &PS, budget: usize) -> EscapeStatus {
        let t_rho = self.rho0();
        let mut orbit: Vec<PS> = vec![branch.clone()];
        let mut cur = branch.clone();
        for n in 0..=budget {
            match cur.ord() {
                Ok(o) if o < t_rho => return EscapeStatus::Escapes(n),
                Ok(_) => {}
                Err(_) => return EscapeStatus::Unresolved(n),
            }
            if n == budget {
                break;
            }
            cur = self.apply_rigid(&cur);
            if cur.is_exact() {
                if let Some(k) = orbit.iter().position(|p| p.is_exact() && *p == cur) {
                    return EscapeStatus::InK {
                        preperiod: k,
                        period: n + 1 - k,
                    };
                }
            }
            orbit.push(cur.clone());
        }
        EscapeStatus::Unresolved(budget)
    }

    pub fn critical_data(&self, prec: &Q, budget: usize) -> Result<Vec<CriticalBranch>> {
        let roots = self.critical_roots(prec)?;
        Ok(roots
            .iter()
            .map(|r| {
                let one_j = (r.mult + 1) as u64;
                let nu = one_j / self.d.gcd(&one_j);
                let series = if r.series.is_exact() {
                    r.series.clone()
                } else {
                    r.series.truncate_q(prec)
                };
                CriticalBranch {
                    escape: self.escape_status(&series, budget),
                    series,
                    j: r.mult,
                    nu,
                    in_crit_plus: nu >= 2,
                }
            })
            .collect())
    }

    /// Roots of w^c + Σ h_j w^j = ψ(z^d) with local degrees.
    pub fn preimages_rigid(&self, psi: &PS, prec: &Q) -> Result<Vec<RigidPreimage>> {
        let mut p = self.fiber_poly();
        p[0] = p[0].sub(&psi.unramify(self.d));
        let m_psi = psi.ram();
        let roots = newton_puiseux(&p, prec, self.mode)?;
        Ok(roots
            .into_iter()
            .map(|r| {
                let m = r.series.ram();
                RigidPreimage {
                    e: Q::new((self.d * m).into(), m_psi.into()),
                    root: r.series,
                    r: r.mult,
                }
            })
            .collect())
    }

    /// Σ r_i e_i over Galois orbits of preimages of all conjugates of ψ.
    /// Equals c·d for every ψ in the unit ball.
    pub fn preimage_budget(&self, psi: &PS, prec: &Q) -> Result<Q> {
        let mode = self.mode;
        let conj = psi.galois_conjugates_mode(mode)?;
        let m = conj.len() as u64;
        let cut = ExtQ::Fin(prec.clone());
        // numeric conjugates only agree up to rounding, so orbits are
        // matched by a chopped difference rather than by key
        let same = |a: &PS, b: &PS| {
            let diff = a.sub(b).truncate(&cut);
            match mode {
                Mode::Exact => diff.is_empty(),
                Mode::Numeric => {
                    let size = a.terms().values().map(Coeff::norm_f64).fold(1.0, f64::max);
                    diff.chop(1e-8 * size).is_empty()
                }
            }
        };
        let mut orbits: Vec<(Vec<PS>, usize, u64)> = Vec::new();
        for phi in &conj {
            for pre in self.preimages_rigid(phi, prec)? {
                let root = pre.root.truncate(&cut);
                if orbits.iter().any(|(o, _, _)| o.iter().any(|s| same(s, &root))) {
                    continue;
                }
                let members = pre.root.galois_conjugates_mode(mode)?.iter().map(|s| s.truncate(&cut)).collect();
                orbits.push((members, pre.r, pre.root.ram()));
            }
        }
        let mut total = Q::zero();
        for (_, r, mi) in &orbits {
            total += qi(*r as i64) * Q::new((self.d * mi).into(), m.into());
        }
        Ok(total)
    }

    /// Solves (t + Σ_j J_j min(o_j, t))/d = target for t.
    pub(crate) fn solve_radius(&self, orders: &[(ExtQ, usize)], target: &Q) -> Q {
        let goal = target * qi(self.d as i64);
        let mut bps: Vec<Q> = orders.iter().filter_map(|(o, _)| o.fin().cloned()).collect();
        bps.sort();
        bps.dedup();
        let mut a = Q::zero();
        let mut val = Q::zero();
        loop {
            let slope: i64 = 1 + orders
                .iter()
                .filter(|(o, _)| *o > ExtQ::Fin(a.clone()))
                .map(|(_, j)| *j as i64)
                .sum::<i64>();
            let next = bps.iter().find(|b| **b > a).cloned();
            let slope_q = qi(slope);
            match next {
                Some(b) if &val + &slope_q * (&b - &a) < goal => {
                    val += &slope_q * (&b - &a);
                    a = b;
                }
                _ => return &a + (&goal - &val) / slope_q,
            }
        }
    }

    /// Connected components of f_⋄^{-1}(B), each mapping onto B.
    pub fn preimage_ball(&self, b: &Ball) -> Result<Vec<Ball>> {
        let prec = &b.t * qi(self.d as i64) + qi(1);
        let pre = self.preimages_rigid(&b.center, &prec)?;
        let crit = self.critical_roots(&prec)?;
        let mut out: Vec<Ball> = Vec::new();
        for p in pre {
            let orders: Vec<(ExtQ, usize)> = crit
                .iter()
                .map(|c| (p.root.sub(&c.series).ord_lb(), c.mult))
                .collect();
            let t = self.solve_radius(&orders, &b.t);
            let contains_critical = orders.iter().any(|(o, _)| match b.kind {
                BallKind::Closed => *o >= ExtQ::Fin(t.clone()),
                BallKind::Open => *o > ExtQ::Fin(t.clone()),
            });
            let cand = Ball::new(&p.root, t, b.kind, contains_critical)?;
            if !out.iter().any(|o| o.same_ball(&cand)) {
                out.push(cand);
            }
        }
        out.sort_by(|x, y| x.center.cmp_canonical(&y.center));
        Ok(out)
    }

    /// The image f_⋄(B) of a ball.
    pub fn image_ball(&self, b: &Ball) -> Result<Ball> {
        let y = self.apply_point(&b.boundary())?;
        let t = ext_to_q(y.t());
        let center = self.apply_rigid(&b.center);
        Ball::new(&center, t, b.kind, false)
    }

    /// f^p as a skew product of degrees (d^p, c^p).
    pub fn iterate_map(&self, p: u32) -> Result<SkewMap> {
        let mut g = self.clone();
        for _ in 1..p {
            g = self.compose_after(&g)?;
        }
        Ok(g)
    }

    /// self ∘ g.
    pub fn compose_after(&self, g: &SkewMap) -> Result<SkewMap> {
        // second component: F_self(z^{d_g}, F_g(z, w)) as a polynomial in w
        let inner = g.fiber_poly();
        let outer: Vec<PS> = self.fiber_poly().iter().map(|a| a.unramify(g.d)).collect();
        let mut acc: Vec<PS> = vec![PS::zero()];
        for a in outer.iter().rev() {
            acc = poly_mul(&acc, &inner);
            acc[0] = acc[0].add(a);
        }
        let c = self.c * g.c;
        acc.truncate(c as usize);
        Self::build(self.d * g.d, c, acc, self.mode, true).map(|mut m| {
            m.permissive = self.permissive && g.permissive;
            m
        })
    }

    /// f_k = (z^d, w^c + Σ h_j(z^k) w^j), semi-conjugate to f by z ↦ z^k.
    pub fn base_change(&self, k: u64) -> Result<SkewMap> {
        let h = self.h.iter().map(|s| s.unramify(k)).collect();
        Self::build(self.d, self.c, h, self.mode, self.permissive)
    }
}

fn poly_mul(a: &[PS], b: &[PS]) -> Vec<PS> {
    let mut out = vec![PS::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// Convenience constructor from series strings, `h[j]` for w^j.
pub fn map_from_strs(d: u64, c: u64, h: &[&str]) -> Result<SkewMap> {
    let h = h.iter().map(|s| s.parse()).collect::<Result<Vec<PS>>>()?;
    SkewMap::new(d, c, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PS {
        s.parse().unwrap()
    }

    fn pt(s: &str) -> BerkPoint {
        s.parse().unwrap()
    }

    fn quartic() -> SkewMap {
        map_from_strs(4, 2, &["-z^4"]).unwrap()
    }

    fn cubic() -> SkewMap {
        map_from_strs(5, 3, &["0", "0", "-3*z"]).unwrap()
    }

    #[test]
    fn rigid_action() {
        assert_eq!(quartic().apply_rigid(&PS::zero()), ps("-z"));
        let f = cubic();
        let a = f.apply_rigid(&ps("2*z"));
        assert_eq!(a, ps("-4*z^(3/5)"));
        assert_eq!(f.apply_rigid(&a), ps("-64*z^(9/25) - 48*z^(11/25)"));
    }

    #[test]
    fn radii() {
        assert_eq!(quartic().rho0(), ExtQ::Fin(qi(2)));
        assert_eq!(cubic().rho0(), ExtQ::Fin(qi(1)));
        assert_eq!(map_from_strs(3, 2, &[]).unwrap().rho0(), ExtQ::Inf);
    }

    #[test]
    fn jacobian_exponents() {
        assert_eq!(quartic().jac_exponent(&pt("zeta(z^2, 3)")).unwrap(), ExtQ::Fin(qi(5)));
        assert_eq!(cubic().jac_exponent(&BerkPoint::gauss()).unwrap(), ExtQ::Fin(qi(4)));
        assert_eq!(cubic().jac_exponent(&pt("zeta(0, 2)")).unwrap(), ExtQ::Fin(qi(7)));
    }

    #[test]
    fn point_action() {
        let f = quartic();
        assert_eq!(f.apply_point(&pt("zeta(z^2, 3)")).unwrap(), pt("zeta(0, 5/4)"));
        assert_eq!(f.apply_point(&BerkPoint::gauss()).unwrap(), BerkPoint::gauss());
        assert_eq!(f.apply_point(&pt("zeta(0, 1)")).unwrap(), pt("zeta(0, 1/2)"));
    }

    #[test]
    fn critical_branches() {
        let cd = quartic().critical_data(&qi(10), 8).unwrap();
        assert_eq!(cd.len(), 1);
        assert_eq!((cd[0].j, cd[0].nu, cd[0].in_crit_plus), (1, 1, false));
        assert_eq!(cd[0].escape, EscapeStatus::Escapes(1));
        let cd = cubic().critical_data(&qi(10), 8).unwrap();
        assert_eq!(cd[0].series, PS::zero());
        assert_eq!(cd[0].escape, EscapeStatus::InK { preperiod: 0, period: 1 });
        assert!(cd[0].in_crit_plus && cd[0].nu == 2);
        assert_eq!(cd[1].series, ps("2*z"));
        assert_eq!(cd[1].escape, EscapeStatus::Escapes(1));
        let cd = map_from_strs(3, 2, &[]).unwrap().critical_data(&qi(10), 8).unwrap();
        assert_eq!(cd[0].nu, 2);
        assert_eq!(cd[0].escape, EscapeStatus::InK { preperiod: 0, period: 1 });
    }

    #[test]
    fn rigid_preimages() {
        let f = quartic();
        let pre = f.preimages_rigid(&PS::zero(), &qi(10)).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(pre.iter().all(|p| p.r == 1 && p.e == qi(4)));
        let pre = f.preimages_rigid(&ps("-z"), &qi(10)).unwrap();
        assert_eq!(pre.len(), 1);
        assert_eq!((pre[0].r, pre[0].e.clone()), (2, qi(4)));
        assert_eq!(f.preimage_budget(&ps("z^(1/2)"), &qi(10)).unwrap(), qi(8));
    }

    #[test]
    fn ball_preimages() {
        let f = quartic();
        let closed = Ball::new(&PS::zero(), qi(2), BallKind::Closed, false).unwrap();
        let pre = f.preimage_ball(&closed).unwrap();
        assert_eq!(pre.len(), 2);
        assert!(pre.iter().all(|b| b.t == qi(6)));
        let open = Ball::new(&PS::zero(), qi(1), BallKind::Open, false).unwrap();
        let pre = f.preimage_ball(&open).unwrap();
        assert_eq!(pre.len(), 2);
        assert_eq!(pre[0].center, ps("-z^2"));
        assert_eq!(pre[1].center, ps("z^2"));
        assert!(pre.iter().all(|b| b.t == qi(2)));
        let unit = Ball::new(&PS::zero(), qi(0), BallKind::Open, false).unwrap();
        let pre = f.preimage_ball(&unit).unwrap();
        assert_eq!(pre.len(), 1);
        assert!(pre[0].contains_critical);
    }

    #[test]
    fn composition_and_base_change() {
        let f = quartic();
        let f2 = f.iterate_map(2).unwrap();
        assert_eq!((f2.d(), f2.c()), (16, 4));
        let phi = ps("z^3 + 2*z^5");
        assert_eq!(f2.apply_rigid(&phi), f.apply_rigid(&f.apply_rigid(&phi)));
        let fk = f.base_change(2).unwrap();
        assert_eq!(fk.h()[0], ps("-z^8"));
        let phi = ps("z^2 - z^3");
        assert_eq!(
            fk.apply_rigid(&phi).ramify(2),
            f.apply_rigid(&phi.ramify(2))
        );
    }
}
