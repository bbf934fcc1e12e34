//! Formal normal form of a superattracting germ
//! (z^d(1+ε), w^c + z h) → (z^d, w^c + Σ_{j<c} h_j(z) w^j), to a finite
//! total degree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::arith::{fmt_q, parse_q, qi, ExtQ, Q};
use crate::coeff::{Coeff, GaussQ, Mode};
use crate::error::{Error, Result};
use crate::series::PuiseuxSeries as PS;
use crate::skew::SkewMap;

/// Truncation standing in for "exact polynomial".
pub const POLY_TRUNC: u32 = 1 << 20;

/// Σ a_{ij} z^i w^j known modulo total degree `trunc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariateSeries {
    terms: BTreeMap<(u32, u32), GaussQ>,
    trunc: u32,
}

impl BivariateSeries {
    pub fn new<I: IntoIterator<Item = ((u32, u32), GaussQ)>>(terms: I, trunc: u32) -> Self {
        let mut map: BTreeMap<(u32, u32), GaussQ> = BTreeMap::new();
        for ((i, j), a) in terms {
            if i + j >= trunc {
                continue;
            }
            let e = map.entry((i, j)).or_insert_with(GaussQ::zero);
            *e = &*e + &a;
        }
        map.retain(|_, a| !a.is_zero());
        BivariateSeries { terms: map, trunc }
    }

    pub fn zero(trunc: u32) -> Self {
        Self::new([], trunc)
    }

    pub fn one(trunc: u32) -> Self {
        Self::monomial(GaussQ::one(), 0, 0, trunc)
    }

    pub fn z(trunc: u32) -> Self {
        Self::monomial(GaussQ::one(), 1, 0, trunc)
    }

    pub fn w(trunc: u32) -> Self {
        Self::monomial(GaussQ::one(), 0, 1, trunc)
    }

    pub fn monomial(a: GaussQ, i: u32, j: u32, trunc: u32) -> Self {
        Self::new([((i, j), a)], trunc)
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), GaussQ> {
        &self.terms
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeff(&self, i: u32, j: u32) -> GaussQ {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(GaussQ::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest total degree of a known term; `trunc` when none is known.
    pub fn ord(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).min().unwrap_or(self.trunc)
    }

    pub fn with_trunc(&self, trunc: u32) -> Self {
        Self::new(self.terms.clone(), trunc.min(self.trunc))
    }

    /// Same terms, now treated as known to total degree `trunc`.
    fn exact_to(&self, trunc: u32) -> Self {
        Self::new(self.terms.clone(), trunc)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.terms.iter().chain(o.terms.iter()).map(|(k, a)| (*k, a.clone())),
            self.trunc.min(o.trunc),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.terms.iter().map(|(k, a)| (*k, -a)), self.trunc)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &GaussQ) -> Self {
        Self::new(self.terms.iter().map(|(e, a)| (*e, a * k)), self.trunc)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let trunc = (self.ord() + o.trunc).min(o.ord() + self.trunc);
        let mut out: BTreeMap<(u32, u32), GaussQ> = BTreeMap::new();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                if i + j + k + l >= trunc {
                    continue;
                }
                let e = out.entry((i + k, j + l)).or_insert_with(GaussQ::zero);
                *e = &*e + &(a * b);
            }
        }
        Self::new(out, trunc)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(POLY_TRUNC);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc.with_trunc(self.trunc)
    }

    /// s(a, b); both substituted series must vanish at the origin.
    pub fn compose(&self, a: &Self, b: &Self) -> Result<Self> {
        if !a.coeff(0, 0).is_zero() || !b.coeff(0, 0).is_zero() {
            return Err(Error::Invalid("substituted series must vanish at 0".into()));
        }
        let o = a.ord().min(b.ord()).max(1);
        let trunc = a.trunc.min(b.trunc).min(self.trunc.saturating_mul(o));
        let max_i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let powers = |s: &Self, n: u32| {
            let mut v = vec![Self::one(trunc)];
            for k in 1..=n {
                let next = v[k as usize - 1].mul(&s.with_trunc(trunc));
                v.push(next);
            }
            v
        };
        let (pa, pb) = (powers(a, max_i), powers(b, max_j));
        let mut acc = Self::zero(trunc);
        for (&(i, j), c) in &self.terms {
            acc = acc.add(&pa[i as usize].mul(&pb[j as usize]).scale(c));
        }
        Ok(acc.with_trunc(trunc))
    }

    /// Exact quotient by z^k w^l.
    pub fn div_monomial(&self, k: u32, l: u32) -> Result<Self> {
        if self.terms.keys().any(|&(i, j)| i < k || j < l) {
            return Err(Error::DivisionObstruction);
        }
        Ok(Self::new(
            self.terms.iter().map(|(&(i, j), a)| ((i - k, j - l), a.clone())),
            self.trunc.saturating_sub(k + l),
        ))
    }

    /// 1/u for u(0) = 1.
    pub fn inv_unit(&self) -> Result<Self> {
        if !self.coeff(0, 0).is_one() {
            return Err(Error::Invalid("not a unit with constant term 1".into()));
        }
        let u = self.sub(&Self::one(self.trunc));
        let mut acc = Self::one(self.trunc);
        let mut p = Self::one(self.trunc);
        while p.ord() < self.trunc {
            p = p.mul(&u).neg();
            acc = acc.add(&p);
        }
        Ok(acc)
    }

    /// (1+u)^α by the binomial series, for u(0) = 0.
    pub fn binomial_pow(u: &Self, alpha: &Q) -> Self {
        let mut acc = Self::one(u.trunc);
        let mut p = Self::one(u.trunc);
        let mut binom = GaussQ::one();
        let o = u.ord().max(1);
        let mut k = 1u32;
        while k * o < u.trunc {
            binom = &binom * &GaussQ::real((alpha - qi(k as i64 - 1)) / qi(k as i64));
            p = p.mul(u);
            acc = acc.add(&p.scale(&binom));
            k += 1;
        }
        acc
    }

    /// Terms with no z, as a series in w.
    pub fn restrict_z0(&self) -> Self {
        Self::new(
            self.terms.iter().filter(|((i, _), _)| *i == 0).map(|(k, a)| (*k, a.clone())),
            self.trunc,
        )
    }

    /// Coefficient of w^j as a power series in z known mod z^{trunc−j}.
    pub fn w_coeff(&self, j: u32) -> PS {
        let terms = self
            .terms
            .iter()
            .filter(|((_, l), _)| *l == j)
            .map(|((i, _), a)| (qi(*i as i64), Coeff::Exact(a.clone())));
        PS::new(terms, ExtQ::Fin(qi(self.trunc.saturating_sub(j) as i64)))
    }

    /// Coefficient of z^n as a series in w.
    pub fn z_coeff(&self, n: u32) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|((i, _), _)| *i == n)
                .map(|((_, j), a)| ((0, *j), a.clone())),
            self.trunc.saturating_sub(n),
        )
    }
}

fn fmt_gauss(a: &GaussQ) -> (bool, String) {
    if a.im.is_zero() {
        (a.re.is_negative(), fmt_q(&a.re.abs()))
    } else if a.re.is_zero() {
        (false, format!("({}*i)", fmt_q(&a.im)))
    } else {
        (false, format!("({}+{}*i)", fmt_q(&a.re), fmt_q(&a.im)).replace("+-", "-"))
    }
}

impl fmt::Display for BivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&(i, j), a) in &self.terms {
            let (neg, body) = fmt_gauss(a);
            match (first, neg) {
                (true, true) => write!(f, "-")?,
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
                _ => {}
            }
            first = false;
            let mut parts = Vec::new();
            if body != "1" || (i == 0 && j == 0) {
                parts.push(body);
            }
            for (v, e) in [("z", i), ("w", j)] {
                match e {
                    0 => {}
                    1 => parts.push(v.into()),
                    _ => parts.push(format!("{v}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(deg {})", self.trunc)
    }
}

fn parse_factor(s: &str, pos: usize) -> Result<((u32, u32), GaussQ)> {
    let err = |msg: &str| Error::Parse { pos, msg: msg.into() };
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        // (a+b*i) or (b*i)
        let inner = inner.replace(' ', "");
        let split = inner[1..].rfind(['+', '-']).map(|k| k + 1);
        let (re, im) = match split {
            Some(k) => (&inner[..k], &inner[k..]),
            None => ("0", inner.as_str()),
        };
        let im = im.strip_suffix("*i").ok_or_else(|| err("expected imaginary part"))?;
        let im = im.strip_prefix('+').unwrap_or(im);
        let re = parse_q(re).map_err(|_| err("bad real part"))?;
        let im = parse_q(im).map_err(|_| err("bad imaginary part"))?;
        return Ok(((0, 0), GaussQ::new(re, im)));
    }
    if s == "i" {
        return Ok(((0, 0), GaussQ::i()));
    }
    for (v, idx) in [("z", 0), ("w", 1)] {
        if let Some(rest) = s.strip_prefix(v) {
            let e: u32 = match rest.strip_prefix('^') {
                Some(n) => n.parse().map_err(|_| err("bad exponent"))?,
                None if rest.is_empty() => 1,
                None => return Err(err("unexpected text after variable")),
            };
            let key = if idx == 0 { (e, 0) } else { (0, e) };
            return Ok((key, GaussQ::one()));
        }
    }
    let x = parse_q(s).map_err(|_| err("bad coefficient"))?;
    Ok(((0, 0), GaussQ::real(x)))
}

/// Splits on `sep` outside parentheses.
fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut depth = 0;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(String::new());
        } else {
            out.last_mut().unwrap().push(ch);
        }
    }
    out
}

impl FromStr for BivariateSeries {
    type Err = Error;

    /// Terms `c*z^i*w^j` joined by `+`/`-`; an optional `+ O(deg M)`
    /// suffix sets the truncation, otherwise the series is a polynomial.
    fn from_str(s: &str) -> Result<Self> {
        let (body, trunc) = match s.find("O(deg") {
            Some(k) => {
                let rest = s[k + 5..].trim_start();
                let n = rest
                    .strip_suffix(')')
                    .and_then(|r| r.trim().parse::<u32>().ok())
                    .ok_or(Error::Parse { pos: k, msg: "bad O(deg M)".into() })?;
                let body = s[..k].trim_end();
                let body = body.strip_suffix('+').unwrap_or(body);
                (body, Some(n))
            }
            None => (s, None),
        };
        let mut terms = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        let bytes: Vec<char> = body.chars().collect();
        let mut chunks: Vec<(usize, String)> = Vec::new();
        for (k, ch) in bytes.iter().enumerate() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && k > 0 && bytes[k - 1] != '^' => {
                    chunks.push((start, bytes[start..k].iter().collect()));
                    start = k;
                }
                _ => {}
            }
        }
        chunks.push((start, bytes[start..].iter().collect()));
        for (pos, chunk) in chunks {
            let t = chunk.trim();
            if t.is_empty() {
                continue;
            }
            let (neg, t) = match t.strip_prefix('-') {
                Some(r) => (true, r),
                None => (false, t.strip_prefix('+').unwrap_or(t)),
            };
            if t.trim().is_empty() {
                return Err(Error::Parse { pos, msg: "empty term".into() });
            }
            let mut key = (0, 0);
            let mut a = GaussQ::one();
            for f in split_top(t, '*') {
                let ((i, j), c) = parse_factor(&f, pos)?;
                key = (key.0 + i, key.1 + j);
                a = &a * &c;
            }
            if neg {
                a = -&a;
            }
            terms.push((key, a));
        }
        Ok(BivariateSeries::new(terms, trunc.unwrap_or(POLY_TRUNC)))
    }
}

/// A pair of components (z∘F, w∘F).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Map2 {
    pub fz: BivariateSeries,
    pub fw: BivariateSeries,
}

impl Map2 {
    pub fn identity(trunc: u32) -> Self {
        Map2 { fz: BivariateSeries::z(trunc), fw: BivariateSeries::w(trunc) }
    }

    /// self ∘ inner.
    pub fn after(&self, inner: &Map2) -> Result<Map2> {
        Ok(Map2 {
            fz: self.fz.compose(&inner.fz, &inner.fw)?,
            fw: self.fw.compose(&inner.fz, &inner.fw)?,
        })
    }

    pub fn with_trunc(&self, t: u32) -> Map2 {
        Map2 { fz: self.fz.with_trunc(t), fw: self.fw.with_trunc(t) }
    }

    /// Lowest degree where self and o differ (their common trunc if none).
    pub fn agreement(&self, o: &Map2) -> u32 {
        self.fz.sub(&o.fz).ord().min(self.fw.sub(&o.fw).ord())
    }

    pub fn is_identity(&self) -> bool {
        let t = self.fz.trunc().min(self.fw.trunc());
        self.agreement(&Self::identity(t)) >= t
    }

    pub fn to_json(&self) -> Value {
        json!({"fz": self.fz.to_string(), "fw": self.fw.to_string()})
    }
}

/// A germ (z^d·unit, w^c + …) with its declared degrees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GermMap {
    pub map: Map2,
    pub d: u32,
    pub c: u32,
}

impl GermMap {
    /// Reads d from z∘f = z^d·(1+ε) and c from w∘f(0, w) = w^c + …
    pub fn new(fz: BivariateSeries, fw: BivariateSeries) -> Result<Self> {
        let d = fz
            .terms()
            .keys()
            .filter(|(_, j)| *j == 0)
            .map(|(i, _)| *i)
            .min()
            .ok_or_else(|| Error::Invalid("z∘f has no pure z term".into()))?;
        if fz.terms().keys().any(|&(i, _)| i < d) {
            return Err(Error::Invalid("z∘f is not divisible by z^d".into()));
        }
        if !fz.coeff(d, 0).is_one() {
            return Err(Error::Invalid("z∘f must be z^d(1 + ε) with ε(0) = 0".into()));
        }
        let r = fw.restrict_z0();
        let c = r.terms().keys().map(|(_, j)| *j).min().ok_or_else(|| {
            Error::Invalid("w ↦ w∘f(0, w) vanishes identically".into())
        })?;
        if !r.coeff(0, c).is_one() {
            return Err(Error::HypothesisFailed("restriction must be w^c + O(w^{c+1})".into()));
        }
        if d < 2 || c < 2 {
            return Err(Error::HypothesisFailed(format!("need d, c ≥ 2 (d = {d}, c = {c})")));
        }
        Ok(GermMap { map: Map2 { fz, fw }, d, c })
    }

    pub fn from_json(v: &Value) -> Result<(Self, u32)> {
        let get = |k: &str| {
            v.get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Invalid(format!("germ JSON needs string field {k:?}")))
        };
        let m = v
            .get("M")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Invalid("germ JSON needs integer field \"M\"".into()))?;
        let g = GermMap::new(get("fz")?.parse()?, get("fw")?.parse()?)?;
        Ok((g, m as u32))
    }

    fn at(&self, trunc: u32) -> Map2 {
        let t = |s: &BivariateSeries| {
            if s.trunc() >= trunc {
                s.exact_to(trunc)
            } else {
                s.clone()
            }
        };
        Map2 { fz: t(&self.map.fz), fw: t(&self.map.fw) }
    }
}

/// (z(1+φ), w) ↦ its inverse by fixed point.
fn invert_z_change(phi: &BivariateSeries) -> Result<Map2> {
    let t = phi.trunc();
    let one = BivariateSeries::one(t);
    let mut zeta = BivariateSeries::z(t);
    let w = BivariateSeries::w(t);
    for _ in 0..t {
        let u = one.add(&phi.compose(&zeta, &w)?).inv_unit()?;
        zeta = BivariateSeries::z(t).mul(&u);
    }
    Ok(Map2 { fz: zeta, fw: w })
}

/// (z, w + δ(z, w)) ↦ its inverse by fixed point.
fn invert_w_change(delta: &BivariateSeries) -> Result<Map2> {
    let t = delta.trunc();
    let z = BivariateSeries::z(t);
    let mut v = BivariateSeries::w(t);
    for _ in 0..t {
        v = BivariateSeries::w(t).sub(&delta.compose(&z, &v)?);
    }
    Ok(Map2 { fz: z, fw: v })
}

/// Φ = (z(1+φ), w) with z∘Φ∘f = (z∘Φ)^d, and Φ∘f∘Φ^{-1}.
pub fn straighten_z(g: &GermMap, m: u32) -> Result<(BivariateSeries, GermMap)> {
    let work = m + g.d;
    let f = g.at(work);
    let eps = f.fz.div_monomial(g.d, 0)?.sub(&BivariateSeries::one(work));
    let d = qi(g.d as i64);
    let mut one_plus = BivariateSeries::one(work);
    let mut iter = Map2::identity(work);
    let mut scale = Q::one();
    loop {
        let e = eps.compose(&iter.fz, &iter.fw)?;
        if e.ord() >= e.trunc() {
            break;
        }
        scale /= &d;
        one_plus = one_plus.mul(&BivariateSeries::binomial_pow(&e, &scale));
        iter = f.after(&iter)?;
    }
    let phi = one_plus.sub(&BivariateSeries::one(work)).with_trunc(m);
    let conj = Map2 {
        fz: BivariateSeries::z(work).mul(&BivariateSeries::one(work).add(&phi.exact_to(work))),
        fw: BivariateSeries::w(work),
    };
    let inv = invert_z_change(&phi.exact_to(work))?;
    let out = conj.after(&f)?.after(&inv)?;
    Ok((phi, GermMap { map: out, d: g.d, c: g.c }))
}

/// β = w + O(w²) with β∘p = β^c mod w^m, for p = w^c + O(w^{c+1}).
pub fn bottcher_1d(p: &BivariateSeries, c: u32, m: u32) -> Result<BivariateSeries> {
    if p.terms().keys().any(|(i, _)| *i != 0) {
        return Err(Error::Invalid("expected a series in w alone".into()));
    }
    if p.terms().keys().next().map(|k| k.1) != Some(c) || !p.coeff(0, c).is_one() {
        return Err(Error::HypothesisFailed("leading term must be exactly w^c".into()));
    }
    let z = BivariateSeries::zero(m);
    let p = p.exact_to(m.max(p.trunc().min(m)));
    let inv_c = GaussQ::from_int(c as i64).inv().unwrap();
    let mut beta = BivariateSeries::w(m);
    // b_k first appears at degree k + c − 1, as c·b_k
    for k in 2..m {
        let deg = k + c - 1;
        if deg >= m {
            break;
        }
        let lhs = beta.compose(&z, &p)?;
        let rhs = beta.pow(c);
        let b = &(&lhs.coeff(0, deg) - &rhs.coeff(0, deg)) * &inv_c;
        beta = beta.add(&BivariateSeries::monomial(b, 0, k, m));
    }
    Ok(beta.with_trunc(m.saturating_sub(c - 1)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    /// (z(1+φ), w).
    StraightenZ(BivariateSeries),
    /// (z, β(w)).
    Bottcher(BivariateSeries),
    /// (z, w + z^m φ_m(w)).
    Eliminate { m: u32, phi: BivariateSeries },
}

impl Stage {
    pub fn to_json(&self) -> Value {
        match self {
            Stage::StraightenZ(p) => json!({"stage": "straighten_z", "phi": p.to_string()}),
            Stage::Bottcher(b) => json!({"stage": "bottcher", "beta": b.to_string()}),
            Stage::Eliminate { m, phi } => {
                json!({"stage": "eliminate", "m": m, "phi": phi.to_string()})
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub d: u32,
    pub c: u32,
    pub m: u32,
    /// Non-identity conjugacies, in the order applied.
    pub ledger: Vec<Stage>,
    /// Ψ with f∘Ψ = Ψ∘f̃, mod total degree m.
    pub psi: Map2,
    pub normal: Map2,
    /// h_j known mod z^{m−j}.
    pub h: Vec<PS>,
    /// Degree to which f∘Ψ and Ψ∘f̃ agree.
    pub conjugacy_order: u32,
}

impl NormalForm {
    /// The normal form as a skew product; c ≥ d is allowed but flagged
    /// as permissive.
    pub fn skew_map(&self) -> Result<SkewMap> {
        SkewMap::build(self.d as u64, self.c as u64, self.h.clone(), Mode::Exact, self.c >= self.d)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "c": self.c,
            "M": self.m,
            "ledger": self.ledger.iter().map(Stage::to_json).collect::<Vec<_>>(),
            "normal_form": self.normal.to_json(),
            "h": self.h.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "conjugacy_order": self.conjugacy_order,
        })
    }
}

/// Straightening, Böttcher step and elimination of g_1^+, …, g_{M−1}^+.
pub fn normalize(g: &GermMap, m: u32) -> Result<NormalForm> {
    let work = m + g.d;
    let mut ledger = Vec::new();
    let (phi, g1) = straighten_z(g, m)?;
    // Ψ accumulates the inverses: Ψ = Φ_1^{-1} ∘ Φ_2^{-1} ∘ …
    let mut psi = Map2::identity(work);
    if !phi.is_zero() {
        psi = invert_z_change(&phi.exact_to(work))?;
        ledger.push(Stage::StraightenZ(phi));
    }
    let mut f = g1.map.with_trunc(work);

    let p = f.fw.restrict_z0();
    let beta = bottcher_1d(&p.with_trunc(work), g.c, work)?;
    if !beta.sub(&BivariateSeries::w(beta.trunc())).is_zero() {
        let b = beta.exact_to(work);
        let rev = invert_w_change(&b.sub(&BivariateSeries::w(work)))?;
        let fwd = Map2 { fz: BivariateSeries::z(work), fw: b };
        f = fwd.after(&f)?.after(&rev)?;
        psi = psi.after(&rev)?;
        ledger.push(Stage::Bottcher(beta));
    }

    let cq = GaussQ::from_int(g.c as i64).inv().unwrap();
    for step in 1..m {
        let gm = f.fw.z_coeff(step);
        let plus = BivariateSeries::new(
            gm.terms().iter().filter(|((_, j), _)| *j >= g.c).map(|(k, a)| (*k, a.clone())),
            gm.trunc(),
        );
        if plus.is_zero() {
            continue;
        }
        let phi_m = plus.div_monomial(0, g.c - 1)?.scale(&cq);
        let delta = BivariateSeries::monomial(GaussQ::one(), step, 0, work).mul(&phi_m.exact_to(work));
        let fwd = Map2 { fz: BivariateSeries::z(work), fw: BivariateSeries::w(work).add(&delta) };
        let rev = invert_w_change(&delta)?;
        f = fwd.after(&f)?.after(&rev)?;
        psi = psi.after(&rev)?;
        ledger.push(Stage::Eliminate { m: step, phi: phi_m });
    }

    let normal = f.with_trunc(m);
    let psi = psi.with_trunc(m);
    let orig = g.at(m);
    let conjugacy_order = orig.after(&psi)?.agreement(&psi.after(&normal)?).min(m);
    let h = (0..g.c).map(|j| normal.fw.w_coeff(j)).collect();
    Ok(NormalForm { d: g.d, c: g.c, m, ledger, psi, normal, h, conjugacy_order })
}
