//! Numeric complex orbits near the superattracting point, kept in
//! log-magnitude form so that super-exponential contraction never
//! underflows.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use twofloat::TwoFloat;

use crate::arith::q_to_f64;
use crate::curves::CurveGerm;
use crate::error::{Error, Result};
use crate::par;
use crate::skew::SkewMap;

/// Normalized sums below this magnitude count as cancellation.
pub const CANCEL_TOL: f64 = 1e-12;
/// Width of the undecided band around (log c + log d)/2.
pub const GUARD_BAND: f64 = 0.2;
pub const DEFAULT_STEPS: usize = 25;
pub const MIN_RATE_STEPS: usize = 10;

/// Complex number stored as (log|x|, arg x); zero has logmag −∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub logmag: f64,
    pub phase: f64,
}

fn wrap(phase: f64) -> f64 {
    let p = (phase + PI).rem_euclid(TAU) - PI;
    if p <= -PI {
        PI
    } else {
        p
    }
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { logmag: f64::NEG_INFINITY, phase: 0.0 };

    pub fn new(logmag: f64, phase: f64) -> Self {
        LogComplex { logmag, phase: wrap(phase) }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            Self::ZERO
        } else {
            Self::new(z.norm().ln(), z.arg())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.logmag == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.logmag.exp(), self.phase)
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.logmag + o.logmag, self.phase + o.phase)
    }

    pub fn powi(&self, k: u64) -> Self {
        if k == 0 {
            return Self::new(0.0, 0.0);
        }
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.logmag * k as f64, wrap(self.phase * k as f64))
    }

    /// x^e for a real exponent, principal branch.
    pub fn powf(&self, e: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.logmag * e, self.phase * e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SumQuality {
    Clean,
    /// Recomputed in double-double after a cancellation in f64.
    Recovered,
    /// Cancellation survived the double-double retry.
    Lost,
}

/// Σ terms by factoring out the dominant magnitude.
pub fn log_sum(terms: &[LogComplex]) -> (LogComplex, SumQuality) {
    let top = terms.iter().map(|t| t.logmag).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return (LogComplex::ZERO, SumQuality::Clean);
    }
    let live: Vec<&LogComplex> = terms.iter().filter(|t| !t.is_zero()).collect();
    let s: Complex64 = live.iter().map(|t| Complex64::from_polar((t.logmag - top).exp(), t.phase)).sum();
    if s.norm() >= CANCEL_TOL || live.len() == 1 {
        return (LogComplex::new(top + s.norm().ln(), s.arg()), SumQuality::Clean);
    }
    let (mut re, mut im) = (TwoFloat::from(0.0), TwoFloat::from(0.0));
    for t in &live {
        let r = (TwoFloat::from(t.logmag) - TwoFloat::from(top)).exp();
        let ph = TwoFloat::from(t.phase);
        re += r * ph.cos();
        im += r * ph.sin();
    }
    let (re, im) = (f64::from(re), f64::from(im));
    let n = re.hypot(im);
    if n < CANCEL_TOL {
        (LogComplex::new(top + n.max(f64::MIN_POSITIVE).ln(), im.atan2(re)), SumQuality::Lost)
    } else {
        (LogComplex::new(top + n.ln(), im.atan2(re)), SumQuality::Recovered)
    }
}

/// f with h_j as lists of (exponent, coefficient), on the polydisk
/// of radius `radius` where ‖h‖ ≤ 1/2.
#[derive(Clone, Debug)]
pub struct NumericMap {
    pub d: u64,
    pub c: u64,
    pub h: Vec<Vec<(f64, LogComplex)>>,
    pub radius: f64,
}

impl NumericMap {
    pub fn new(f: &SkewMap) -> Self {
        let h: Vec<Vec<(f64, LogComplex)>> = f
            .h()
            .iter()
            .map(|s| {
                s.terms()
                    .iter()
                    .map(|(e, a)| (q_to_f64(e), LogComplex::from_complex(a.to_complex())))
                    .collect()
            })
            .collect();
        let mut m = NumericMap { d: f.d(), c: f.c(), h, radius: 0.5 };
        while m.h_bound(m.radius) > 0.5 && m.radius > 1e-6 {
            m.radius *= 0.5;
        }
        m
    }

    /// sup |h| on the r-polydisk, where z·h(z, w) = Σ h_j(z) w^j.
    pub fn h_bound(&self, r: f64) -> f64 {
        self.h
            .iter()
            .enumerate()
            .flat_map(|(j, terms)| {
                terms.iter().map(move |(e, a)| a.logmag.exp() * r.powf(e - 1.0 + j as f64))
            })
            .sum()
    }

    pub fn in_domain(&self, z: Complex64, w: Complex64) -> bool {
        z.norm() <= self.radius && w.norm() <= self.radius
    }

    /// w^c + Σ h_j(z) w^j.
    pub fn step_w(&self, z: &LogComplex, w: &LogComplex) -> (LogComplex, SumQuality) {
        let mut terms = vec![w.powi(self.c)];
        for (j, hj) in self.h.iter().enumerate() {
            let wj = w.powi(j as u64);
            for (e, a) in hj {
                terms.push(a.mul(&z.powf(*e)).mul(&wj));
            }
        }
        log_sum(&terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitStep {
    pub z: LogComplex,
    pub w: LogComplex,
    pub in_omega0: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    Budget,
    /// Cancellation survived the double-double retry at this step.
    Cancellation(usize),
    /// w_n = 0 exactly.
    Collapsed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// Iterating f directly.
    Direct,
    /// w_n read off the curve of the n-th shifted itinerary.
    Curve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub steps: Vec<OrbitStep>,
    pub stop: StopReason,
    pub channel: Channel,
    /// Steps where the double-double retry was needed.
    pub recovered: Vec<usize>,
    /// First step that left Ω_0 after having entered it.
    pub omega0_violation: Option<usize>,
    pub c: u64,
    pub d: u64,
}

impl OrbitRecord {
    fn new(channel: Channel, c: u64, d: u64) -> Self {
        OrbitRecord {
            steps: Vec::new(),
            stop: StopReason::Budget,
            channel,
            recovered: Vec::new(),
            omega0_violation: None,
            c,
            d,
        }
    }

    fn push(&mut self, z: LogComplex, w: LogComplex) {
        // Ω_0 = {|z| < |w|^c}
        let in_omega0 = z.logmag < self.c as f64 * w.logmag;
        let n = self.steps.len();
        if self.omega0_violation.is_none() && !in_omega0 && self.steps.iter().any(|s| s.in_omega0) {
            self.omega0_violation = Some(n);
        }
        self.steps.push(OrbitStep { z, w, in_omega0 });
    }

    /// First iterate inside Ω_0.
    pub fn omega0_entry(&self) -> Option<usize> {
        self.steps.iter().position(|s| s.in_omega0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,logmag_z,logmag_w,in_omega0\n");
        for (n, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{n},{:e},{:e},{}\n", s.z.logmag, s.w.logmag, s.in_omega0 as u8));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let stop = match self.stop {
            StopReason::Budget => json!("budget"),
            StopReason::Cancellation(n) => json!({"cancellation": n}),
            StopReason::Collapsed(n) => json!({"collapsed": n}),
        };
        json!({
            "channel": format!("{:?}", self.channel).to_lowercase(),
            "steps": self.steps.len(),
            "stop": stop,
            "omega0_entry": self.omega0_entry(),
            "omega0_violation": self.omega0_violation,
            "recovered": self.recovered,
            "logmag_z": self.steps.iter().map(|s| s.z.logmag).collect::<Vec<_>>(),
            "logmag_w": self.steps.iter().map(|s| s.w.logmag).collect::<Vec<_>>(),
        })
    }
}

/// n steps of f from p = (z, w).
pub fn iterate_orbit(f: &NumericMap, z: Complex64, w: Complex64, n: usize) -> Result<OrbitRecord> {
    if !f.in_domain(z, w) {
        return Err(Error::Invalid(format!(
            "({z}, {w}) lies outside the working polydisk of radius {}",
            f.radius
        )));
    }
    let z0 = LogComplex::from_complex(z);
    let mut rec = OrbitRecord::new(Channel::Direct, f.c, f.d);
    let mut wl = LogComplex::from_complex(w);
    rec.push(z0, wl);
    let mut dn = 1.0f64;
    for k in 1..=n {
        let zl = z_iterate(&z0, dn);
        let (next, q) = f.step_w(&zl, &wl);
        dn *= f.d as f64;
        match q {
            SumQuality::Lost => {
                rec.stop = StopReason::Cancellation(k);
                return Ok(rec);
            }
            SumQuality::Recovered => rec.recovered.push(k),
            SumQuality::Clean => {}
        }
        wl = next;
        rec.push(z_iterate(&z0, dn), wl);
        if wl.is_zero() {
            rec.stop = StopReason::Collapsed(k);
            return Ok(rec);
        }
    }
    Ok(rec)
}

/// z_n = z_0^{d^n}: the magnitude channel is a single multiplication.
fn z_iterate(z0: &LogComplex, dn: f64) -> LogComplex {
    if z0.is_zero() {
        return LogComplex::ZERO;
    }
    LogComplex::new(z0.logmag * dn, wrap(z0.phase * dn))
}

/// Orbit of (t^m, φ(t^m)) read along the curves of the shifted words:
/// `family[k]` is the curve of σ^k of the itinerary (the last one is
/// reused once the family runs out).
pub fn iterate_curve_orbit(f: &NumericMap, family: &[CurveGerm], t: Complex64, n: usize) -> Result<OrbitRecord> {
    let first = family.first().ok_or_else(|| Error::Invalid("empty curve family".into()))?;
    let z = t.powi(first.m as i32);
    let w = first.series.eval_param(t, first.m);
    if !f.in_domain(z, w) {
        return Err(Error::Invalid(format!(
            "curve point ({z}, {w}) lies outside the working polydisk of radius {}",
            f.radius
        )));
    }
    let z0 = LogComplex::from_complex(z);
    let mut rec = OrbitRecord::new(Channel::Curve, f.c, f.d);
    let mut dn = 1.0f64;
    for k in 0..=n {
        let zl = z_iterate(&z0, dn);
        let germ = &family[k.min(family.len() - 1)];
        let terms: Vec<LogComplex> = germ
            .series
            .terms()
            .iter()
            .map(|(e, a)| LogComplex::from_complex(a.to_complex()).mul(&zl.powf(q_to_f64(e))))
            .collect();
        let (wl, q) = log_sum(&terms);
        if q == SumQuality::Lost {
            rec.stop = StopReason::Cancellation(k);
            return Ok(rec);
        }
        rec.push(zl, wl);
        dn *= f.d as f64;
    }
    Ok(rec)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateVerdict {
    RateC,
    RateD,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub verdict: RateVerdict,
    /// (1/n)·log|log|f^n(p)||, NaN when unavailable.
    pub estimate: f64,
    pub n: usize,
}

impl RateEstimate {
    pub fn to_json(&self) -> Value {
        let verdict = match self.verdict {
            RateVerdict::RateC => "c",
            RateVerdict::RateD => "d",
            RateVerdict::Undecided => "undecided",
        };
        json!({"verdict": verdict, "estimate": self.estimate, "n": self.n})
    }
}

pub fn attraction_rate(rec: &OrbitRecord) -> RateEstimate {
    let n = rec.steps.len().saturating_sub(1);
    let undecided = RateEstimate { verdict: RateVerdict::Undecided, estimate: f64::NAN, n };
    if n < MIN_RATE_STEPS || rec.stop != StopReason::Budget {
        return undecided;
    }
    let last = rec.steps[n];
    let lm = last.z.logmag.max(last.w.logmag);
    if !lm.is_finite() || lm >= 0.0 {
        return undecided;
    }
    let estimate = lm.abs().ln() / n as f64;
    let (lc, ld) = ((rec.c as f64).ln(), (rec.d as f64).ln());
    let mid = (lc + ld) / 2.0;
    let verdict = if (estimate - mid).abs() < GUARD_BAND / 2.0 {
        RateVerdict::Undecided
    } else if estimate < mid {
        RateVerdict::RateC
    } else {
        RateVerdict::RateD
    };
    RateEstimate { verdict, estimate, n }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GreenComplex {
    Value { g: f64, steps: usize, tail_bound: f64 },
    /// The orbit stayed outside Ω_0 for the whole budget.
    MinusInfinity { steps: usize },
    /// Cancellation made the orbit unreliable.
    Undecided { step: usize },
}

impl GreenComplex {
    pub fn value(&self) -> Option<f64> {
        match self {
            GreenComplex::Value { g, .. } => Some(*g),
            GreenComplex::MinusInfinity { .. } => Some(f64::NEG_INFINITY),
            GreenComplex::Undecided { .. } => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            GreenComplex::Value { g, steps, tail_bound } => {
                json!({"g": g, "steps": steps, "tail_bound": tail_bound})
            }
            GreenComplex::MinusInfinity { steps } => json!({"g": "-inf", "steps": steps}),
            GreenComplex::Undecided { step } => json!({"g": "undecided", "cancellation_step": step}),
        }
    }
}

/// g_n = c^{-n} log|w_n|, stopped inside Ω_0 once the geometric tail
/// Σ_{q≥n} log 2 / c^q drops below `tol`.
pub fn green_complex(f: &NumericMap, z: Complex64, w: Complex64, tol: f64, budget: usize) -> Result<GreenComplex> {
    if !f.in_domain(z, w) {
        return Err(Error::Invalid(format!("({z}, {w}) lies outside the working polydisk")));
    }
    let c = f.c as f64;
    let tail = |n: usize| LN_2 * c.powi(1 - n as i32) / (c - 1.0);
    let z0 = LogComplex::from_complex(z);
    let mut wl = LogComplex::from_complex(w);
    let mut dn = 1.0f64;
    let mut cn = 1.0f64;
    for n in 0..=budget {
        let zl = z_iterate(&z0, dn);
        if wl.is_zero() {
            return Ok(GreenComplex::MinusInfinity { steps: n });
        }
        if zl.logmag < c * wl.logmag && tail(n) <= tol {
            return Ok(GreenComplex::Value { g: wl.logmag / cn, steps: n, tail_bound: tail(n) });
        }
        if n == budget {
            break;
        }
        let (next, q) = f.step_w(&zl, &wl);
        if q == SumQuality::Lost {
            return Ok(GreenComplex::Undecided { step: n + 1 });
        }
        wl = next;
        dn *= f.d as f64;
        cn *= c;
    }
    let zl = z_iterate(&z0, dn);
    if zl.logmag < c * wl.logmag {
        // inside Ω_0 but the tail is still above tol: report what we have
        return Ok(GreenComplex::Value { g: wl.logmag / cn, steps: budget, tail_bound: tail(budget) });
    }
    Ok(GreenComplex::MinusInfinity { steps: budget })
}

/// Seeded random points with |z| ≤ r and 0.05 ≤ |w| ≤ r, r the working radius.
pub fn generic_points(f: &NumericMap, count: usize, seed: u64) -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = f.radius;
    let lo = 0.05f64.min(r / 2.0);
    (0..count)
        .map(|_| {
            let z = Complex64::from_polar(r * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            let w = Complex64::from_polar(lo + (r - lo) * rng.random::<f64>(), TAU * rng.random::<f64>());
            (z, w)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Disagreement {
    pub point: (Complex64, Complex64),
    pub on_curve: bool,
    pub rate: RateEstimate,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrosscheckReport {
    pub curve_points: usize,
    pub generic_points: usize,
    pub agree: usize,
    pub disagreements: Vec<Disagreement>,
}

impl CrosscheckReport {
    pub fn to_json(&self) -> Value {
        let dis: Vec<Value> = self
            .disagreements
            .iter()
            .map(|d| {
                json!({
                    "z": [d.point.0.re, d.point.0.im],
                    "w": [d.point.1.re, d.point.1.im],
                    "on_curve": d.on_curve,
                    "rate": d.rate.to_json(),
                })
            })
            .collect();
        json!({
            "curve_points": self.curve_points,
            "generic_points": self.generic_points,
            "agree": self.agree,
            "disagreements": dis,
        })
    }
}

/// Curve points must contract at rate d, generic points at rate c.
pub fn crosscheck(
    f: &NumericMap,
    curve_points: &[(Vec<CurveGerm>, Complex64)],
    generic: &[(Complex64, Complex64)],
    n: usize,
) -> Result<CrosscheckReport> {
    let on = par::try_map(curve_points, |(fam, t)| -> Result<(Disagreement, bool)> {
        let rec = iterate_curve_orbit(f, fam, *t, n)?;
        let rate = attraction_rate(&rec);
        let p = rec.steps[0];
        let point = (p.z.to_complex(), p.w.to_complex());
        Ok((Disagreement { point, on_curve: true, rate }, rate.verdict == RateVerdict::RateD))
    })?;
    let off = par::try_map(generic, |&(z, w)| -> Result<(Disagreement, bool)> {
        let rate = attraction_rate(&iterate_orbit(f, z, w, n)?);
        Ok((Disagreement { point: (z, w), on_curve: false, rate }, rate.verdict == RateVerdict::RateC))
    })?;
    let mut rep = CrosscheckReport {
        curve_points: curve_points.len(),
        generic_points: generic.len(),
        ..Default::default()
    };
    for (d, ok) in on.into_iter().chain(off) {
        if ok {
            rep.agree += 1;
        } else {
            rep.disagreements.push(d);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qi;
    use crate::cover::choose_markov_level;
    use crate::curves::itinerary_to_curve;
    use crate::markov::build_graph;
    use crate::skew::map_from_strs;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_arithmetic() {
        let a = LogComplex::from_complex(c(3.0, 4.0));
        assert!((a.to_complex() - c(3.0, 4.0)).norm() < 1e-12);
        let tiny = LogComplex::new(-1e6, 0.3);
        assert_eq!(tiny.mul(&tiny).logmag, -2e6);
        let (s, q) = log_sum(&[a, LogComplex::from_complex(c(-3.0, -4.0))]);
        assert_eq!(q, SumQuality::Lost);
        assert!(s.logmag < 0.0);
        let (s, q) = log_sum(&[LogComplex::new(-1e9, 0.0), LogComplex::new(-1e9 - 1.0, PI)]);
        assert_eq!(q, SumQuality::Clean);
        assert!((s.logmag - (-1e9 + (1.0 - (-1.0f64).exp()).ln())).abs() < 1e-6);
    }

    #[test]
    fn invariant_line() {
        let f = NumericMap::new(&map_from_strs(4, 2, &["-z^4"]).unwrap());
        let rec = iterate_orbit(&f, c(0.0, 0.0), c(0.5, 0.0), 25).unwrap();
        for (n, s) in rec.steps.iter().enumerate() {
            assert_eq!(s.w.logmag, 2f64.powi(n as i32) * 0.5f64.ln());
        }
        let r = attraction_rate(&rec);
        assert_eq!(r.verdict, RateVerdict::RateC);
        assert!((r.estimate - LN_2).abs() < 0.05);
        let short = iterate_orbit(&f, c(0.0, 0.0), c(0.5, 0.0), 5).unwrap();
        assert_eq!(attraction_rate(&short).verdict, RateVerdict::Undecided);
        let g = green_complex(&f, c(0.0, 0.0), c(0.3, 0.1), 1e-9, 60).unwrap();
        assert!((g.value().unwrap() - c(0.3, 0.1).norm().ln()).abs() < 1e-12);
    }

    #[test]
    fn omega0_is_forward_invariant() {
        let f = NumericMap::new(&map_from_strs(4, 2, &["-z^4"]).unwrap());
        let rec = iterate_orbit(&f, c(0.1, 0.0), c(0.5, 0.0), 25).unwrap();
        assert_eq!(rec.omega0_entry(), Some(0));
        assert_eq!(rec.omega0_violation, None);
        // starts outside Ω_0, enters later
        let late = iterate_orbit(&f, c(0.1, 0.0), c(0.2, 0.0), 25).unwrap();
        assert!(late.omega0_entry().unwrap() > 0);
        assert_eq!(attraction_rate(&late).verdict, RateVerdict::RateC);
    }

    #[test]
    fn curve_points_contract_at_rate_d() {
        let f = map_from_strs(4, 2, &["-z^4"]).unwrap();
        let (n, cover) = choose_markov_level(&f, None, 4).unwrap();
        let g = build_graph(&cover, n).unwrap();
        let v = (0..g.len())
            .find(|&v| g.adj[v][v] == 1 && g.vertices[v].center.coeff(&qi(2)).to_complex().re > 0.0)
            .unwrap();
        let curve = itinerary_to_curve(&f, &g, &[v, v, v], &qi(40)).unwrap();
        let nf = NumericMap::new(&f);
        let rec = iterate_curve_orbit(&nf, std::slice::from_ref(&curve), c(0.05, 0.0), 25).unwrap();
        assert_eq!(rec.omega0_entry(), None);
        let r = attraction_rate(&rec);
        assert_eq!(r.verdict, RateVerdict::RateD);
        assert!((r.estimate - 4f64.ln()).abs() < 0.1);
        // the direct orbit of the same point loses w to cancellation
        let p = rec.steps[0];
        let direct = iterate_orbit(&nf, p.z.to_complex(), p.w.to_complex(), 25).unwrap();
        assert_ne!(attraction_rate(&direct).verdict, RateVerdict::RateD);
        let rep = crosscheck(&nf, &[(vec![curve], c(0.05, 0.0))], &[(c(0.1, 0.0), c(0.4, 0.1))], 25).unwrap();
        assert_eq!(rep.agree, 2);
        assert!(crosscheck(&nf, &[], &[], 25).unwrap().disagreements.is_empty());
    }
}
