//! Curves of the super-stable set from itineraries: ball-constrained
//! pullback, invariance and laminarity checks, weighted plaques.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::arith::{fmt_q, lcm, q_to_f64, qi, ExtQ, Q};
use crate::berk::{fmt_extq, BerkPoint};
use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::markov::{MarkovGraph, ParryData};
use crate::par;
use crate::series::PuiseuxSeries as PS;
use crate::skew::SkewMap;

/// Numeric points emitted per plaque.
pub const PLAQUE_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveGerm {
    /// φ known modulo z^certified_order.
    pub series: PS,
    pub itinerary: Vec<usize>,
    pub m: u64,
    pub certified_order: Q,
    /// Valuation gained at each pullback step, last letter first.
    pub gains: Vec<Q>,
}

impl CurveGerm {
    pub fn to_json(&self) -> Value {
        json!({
            "itinerary": self.itinerary,
            "series": self.series.to_string(),
            "m": self.m,
            "certified_order": fmt_q(&self.certified_order),
            "gains": self.gains.iter().map(fmt_q).collect::<Vec<_>>(),
        })
    }

    /// 0.5 / max |a_e|^{1/e} over the upper half of the known terms, as a
    /// radius in z.
    pub fn heuristic_radius(&self) -> f64 {
        let terms: Vec<(&Q, &Coeff)> = self.series.terms().iter().collect();
        let tail = &terms[terms.len() / 2..];
        let growth = tail
            .iter()
            .filter(|(e, _)| **e > Q::zero())
            .map(|(e, a)| a.norm_f64().powf(1.0 / q_to_f64(e)))
            .fold(0.0, f64::max);
        if growth <= 1.0 {
            0.5
        } else {
            0.5 / growth
        }
    }

    /// Point (t, z, w) = (t, t^m, φ(t^m)) of the parameterized curve.
    pub fn point(&self, t: Complex64) -> (Complex64, Complex64, Complex64) {
        let z = t.powi(self.m as i32);
        (t, z, self.series.eval_param(t, self.m))
    }
}

/// Curve with the given itinerary, pulled back from the center of the
/// last ball and checked against a second run from a perturbed seed.
pub fn itinerary_to_curve(
    f: &SkewMap,
    graph: &MarkovGraph,
    word: &[usize],
    precision: &Q,
) -> Result<CurveGerm> {
    check_word(graph, word)?;
    // ball membership is undecidable at or below the ball radius
    let tmax = word.iter().map(|&v| &graph.vertices[v].t).max().unwrap();
    if precision <= tmax {
        return Err(Error::InsufficientPrecision(format!(
            "precision {} must exceed the ball exponent {}",
            fmt_q(precision),
            fmt_q(tmax)
        )));
    }
    let last = &graph.vertices[*word.last().unwrap()];
    let a = pullback(f, graph, word, &last.center, precision)?;
    let bump = PS::monomial(Coeff::one(), &last.t + Q::one());
    let b = pullback(f, graph, word, &last.center.add(&bump), precision)?;
    let cert = a.1.clone().min(b.1.clone());
    let cut = ExtQ::Fin(cert.clone());
    let series = a.0.truncate(&cut);
    if series != b.0.truncate(&cut) {
        return Err(Error::Invalid(format!(
            "pullback along {word:?} depends on the seed below order {}",
            fmt_q(&cert)
        )));
    }
    Ok(CurveGerm {
        m: series.ram(),
        series,
        itinerary: word.to_vec(),
        certified_order: cert,
        gains: a.2,
    })
}

/// Curves for several words, computed in parallel.
pub fn curves_for_words(
    f: &SkewMap,
    graph: &MarkovGraph,
    words: &[Vec<usize>],
    precision: &Q,
) -> Result<Vec<CurveGerm>> {
    par::try_map(words, |w| itinerary_to_curve(f, graph, w, precision))
}

/// Curves of every suffix of `word`, in shift order, as used by the
/// curve channel of complex orbits.
pub fn shift_family(
    f: &SkewMap,
    graph: &MarkovGraph,
    word: &[usize],
    precision: &Q,
) -> Result<Vec<CurveGerm>> {
    let suffixes: Vec<Vec<usize>> = (0..word.len()).map(|k| word[k..].to_vec()).collect();
    curves_for_words(f, graph, &suffixes, precision)
}

fn check_word(graph: &MarkovGraph, word: &[usize]) -> Result<()> {
    if word.is_empty() {
        return Err(Error::Inadmissible("empty word".into()));
    }
    if graph.vertices.len() != graph.len() {
        return Err(Error::Invalid("graph carries no balls".into()));
    }
    if let Some(v) = word.iter().find(|&&v| v >= graph.len()) {
        return Err(Error::UnknownVertex(*v));
    }
    if !graph.is_admissible(word) {
        return Err(Error::Inadmissible(format!("{word:?}")));
    }
    if word.iter().any(|&v| graph.vertices[v].contains_critical) {
        return Err(Error::CriticalInK);
    }
    Ok(())
}

fn pullback(
    f: &SkewMap,
    graph: &MarkovGraph,
    word: &[usize],
    seed: &PS,
    prec: &Q,
) -> Result<(PS, Q, Vec<Q>)> {
    let crit = f.critical_roots(prec)?;
    let mut psi = seed.clone();
    let mut s = graph.vertices[*word.last().unwrap()].t.clone().min(prec.clone());
    let mut gains = Vec::new();
    for &v in word.iter().rev().skip(1) {
        let ball = &graph.vertices[v];
        let root = f
            .preimages_rigid(&psi, prec)?
            .into_iter()
            .map(|p| p.root)
            .find(|r| ball.contains_series(r))
            .ok_or(Error::NoPreimageInBall(v))?;
        let orders: Vec<(ExtQ, usize)> = crit
            .iter()
            .map(|c| (root.sub(&c.series).ord_lb(), c.mult))
            .collect();
        let next = f.solve_radius(&orders, &s).min(prec.clone());
        gains.push(&next - &s);
        s = next;
        psi = root;
    }
    Ok((psi, s, gains))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceEntry {
    pub word: Vec<usize>,
    pub shifted: Vec<usize>,
    /// ord(f_⋄(φ_w) − φ_σw).
    pub residual: ExtQ,
    /// Order both sides are known to.
    pub expected: Q,
    pub ok: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvarianceReport {
    pub entries: Vec<InvarianceEntry>,
}

impl InvarianceReport {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    pub fn min_residual(&self) -> Option<ExtQ> {
        self.entries.iter().map(|e| e.residual.clone()).min()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "word": e.word,
                    "shifted": e.shifted,
                    "residual": fmt_extq(&e.residual),
                    "expected": fmt_q(&e.expected),
                    "ok": e.ok,
                })
            })
            .collect();
        json!({"entries": entries, "all_ok": self.all_ok()})
    }
}

fn compatible(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x == y)
}

/// Compares f_⋄(φ_w) with the curve of the longest compatible shifted word.
pub fn verify_invariance(f: &SkewMap, curves: &[CurveGerm]) -> Result<InvarianceReport> {
    let mut rep = InvarianceReport::default();
    for cw in curves {
        let tail = &cw.itinerary[1..];
        let Some(cu) = curves
            .iter()
            .filter(|u| compatible(tail, &u.itinerary))
            .max_by_key(|u| u.itinerary.len().min(tail.len().max(1)))
        else {
            continue;
        };
        let ball = BerkPoint::type2(&cw.series.as_exact(), cw.certified_order.clone())?;
        let image_cert = f.apply_point(&ball)?.t().fin().cloned().unwrap_or_else(Q::zero);
        let expected = image_cert.min(cu.certified_order.clone());
        let residual = f.apply_rigid(&cw.series).sub(&cu.series).ord_lb();
        rep.entries.push(InvarianceEntry {
            word: cw.itinerary.clone(),
            shifted: cu.itinerary.clone(),
            ok: residual >= ExtQ::Fin(expected.clone()),
            residual,
            expected,
        });
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSeparation {
    pub a: usize,
    pub b: usize,
    /// ord(φ_a − φ_b).
    pub separation: ExtQ,
    /// The two series differ below both certified orders.
    pub symbolic_ok: bool,
    /// Smallest |w_a − w_b| over the sampled annulus.
    pub gap: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DisjointnessReport {
    pub pairs: Vec<PairSeparation>,
    pub skipped: usize,
}

impl DisjointnessReport {
    pub fn min_gap(&self) -> Option<f64> {
        self.pairs.iter().map(|p| p.gap).reduce(f64::min)
    }

    pub fn all_symbolic(&self) -> bool {
        self.pairs.iter().all(|p| p.symbolic_ok)
    }

    pub fn to_json(&self) -> Value {
        let pairs: Vec<Value> = self
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "a": p.a, "b": p.b,
                    "separation": fmt_extq(&p.separation),
                    "symbolic_ok": p.symbolic_ok,
                    "gap": p.gap,
                })
            })
            .collect();
        json!({"pairs": pairs, "skipped": self.skipped, "min_gap": self.min_gap()})
    }
}

/// Deterministic sample of the annulus r_min ≤ |t| ≤ r_max.
pub fn annulus_samples(r_min: f64, r_max: f64, n: usize) -> Vec<Complex64> {
    let golden = TAU * (1.0 - 1.0 / 1.618_033_988_749_895);
    (0..n)
        .map(|i| {
            let s = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let r = r_min * (r_max / r_min).powf(s);
            Complex64::from_polar(r, golden * i as f64)
        })
        .collect()
}

pub fn disjointness_check(
    curves: &[CurveGerm],
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> Result<DisjointnessReport> {
    if !(0.0 < r_min && r_min <= r_max) {
        return Err(Error::Invalid(format!("bad annulus [{r_min}, {r_max}]")));
    }
    let ts = annulus_samples(r_min, r_max, samples);
    let mut todo = Vec::new();
    let mut rep = DisjointnessReport::default();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            if curves[i].itinerary == curves[j].itinerary {
                rep.skipped += 1;
            } else {
                todo.push((i, j));
            }
        }
    }
    rep.pairs = par::map(&todo, |&(i, j)| {
        let (a, b) = (&curves[i], &curves[j]);
        let separation = a.series.sub(&b.series).ord_lb();
        let cert = ExtQ::Fin(a.certified_order.clone().min(b.certified_order.clone()));
        let m = lcm(a.m, b.m);
        let roots: Vec<Complex64> =
            (0..m).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64)).collect();
        let gap = ts
            .iter()
            .map(|&t| {
                let wa = a.series.eval_param(t, m);
                roots
                    .iter()
                    .map(|u| (wa - b.series.eval_param(u * t, m)).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        PairSeparation { a: i, b: j, symbolic_ok: separation < cert, separation, gap }
    });
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaqueSample {
    pub itinerary: Vec<usize>,
    /// Cylinder mass divided by m.
    pub weight: Q,
    pub m: u64,
    pub certified_order: Q,
    /// Sampling radius in t.
    pub radius: f64,
    pub heuristic_radius: f64,
    pub beyond_heuristic: bool,
    pub points: Vec<(Complex64, Complex64, Complex64)>,
}

/// Parry-sampled plaques of distinct itineraries; deterministic per seed.
#[allow(clippy::too_many_arguments)]
pub fn emit_plaques(
    f: &SkewMap,
    graph: &MarkovGraph,
    parry: &ParryData,
    count: usize,
    depth: usize,
    radius: Option<f64>,
    precision: &Q,
    seed: u64,
) -> Result<Vec<PlaqueSample>> {
    if depth == 0 {
        return Err(Error::Invalid("plaque depth must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut words = Vec::new();
    for _ in 0..count.saturating_mul(100) {
        if words.len() == count {
            break;
        }
        let w = parry.sample_with(&mut rng, depth);
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let curves = curves_for_words(f, graph, &words, precision)?;
    curves
        .into_iter()
        .map(|cv| {
            let mass = parry.cylinder_mass(&cv.itinerary)?;
            let heur = cv.heuristic_radius().powf(1.0 / cv.m as f64);
            let r = radius.unwrap_or(heur);
            let points = (0..PLAQUE_POINTS)
                .map(|k| {
                    let ring = (k / 4 + 1) as f64 / 4.0;
                    let t = Complex64::from_polar(r * ring, TAU * (k % 4) as f64 / 4.0 + ring);
                    cv.point(t)
                })
                .collect();
            Ok(PlaqueSample {
                weight: mass / qi(cv.m as i64),
                m: cv.m,
                certified_order: cv.certified_order.clone(),
                radius: r,
                heuristic_radius: heur,
                beyond_heuristic: r > heur,
                itinerary: cv.itinerary,
                points,
            })
        })
        .collect()
}

pub const PLAQUE_CSV_HEADER: &str = "itinerary,weight_num,weight_den,t_re,t_im,z_re,z_im,w_re,w_im";

pub fn plaques_to_csv(plaques: &[PlaqueSample]) -> String {
    let mut out = String::from(PLAQUE_CSV_HEADER);
    out.push('\n');
    for p in plaques {
        let word: Vec<String> = p.itinerary.iter().map(|v| v.to_string()).collect();
        for (t, z, w) in &p.points {
            out.push_str(&format!(
                "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                word.join("-"),
                p.weight.numer(),
                p.weight.denom(),
                t.re,
                t.im,
                z.re,
                z.im,
                w.re,
                w.im
            ));
        }
    }
    out
}

/// f_k = (z^d, w^c + Σ h_j(z^k) w^j), with β_k ∘ f_k = f ∘ β_k.
pub fn base_change_map(f: &SkewMap, k: u64) -> Result<SkewMap> {
    if k == 0 {
        return Err(Error::Invalid("base change order must be positive".into()));
    }
    f.base_change(k)
}
