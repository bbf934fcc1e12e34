//! Roots of univariate characteristic polynomials.
//!
//! Exact mode works over Q(i): squarefree decomposition, then linear and
//! quadratic factors in closed form and higher degrees by numeric isolation
//! followed by rational reconstruction and exact verification.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::Q;
use crate::coeff::{Coeff, GaussQ, Mode};
use crate::error::{Error, Result};

/// Dense polynomial over Q(i), index = degree.
pub type GPoly = Vec<GaussQ>;

fn trim(p: &mut GPoly) {
    while p.last().is_some_and(GaussQ::is_zero) {
        p.pop();
    }
}

fn deg(p: &GPoly) -> usize {
    p.len().saturating_sub(1)
}

fn derivative(p: &GPoly) -> GPoly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * &GaussQ::from_int(k as i64))
        .collect()
}

/// Quotient and remainder.
fn divrem(a: &GPoly, b: &GPoly) -> (GPoly, GPoly) {
    let mut r = a.clone();
    trim(&mut r);
    let lb = b.last().expect("division by zero polynomial");
    let inv = lb.inv().expect("nonzero leading coefficient");
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut qt = vec![GaussQ::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let k = r.last().unwrap() * &inv;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&k * bc);
        }
        qt[shift] = k;
        r.pop();
        trim(&mut r);
    }
    (qt, r)
}

fn monic(p: &GPoly) -> GPoly {
    let inv = p.last().unwrap().inv().unwrap();
    p.iter().map(|c| c * &inv).collect()
}

fn gcd(a: &GPoly, b: &GPoly) -> GPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    if a.is_empty() {
        a
    } else {
        monic(&a)
    }
}

fn eval_g(p: &GPoly, y: &GaussQ) -> GaussQ {
    p.iter()
        .rev()
        .fold(GaussQ::zero(), |acc, c| &(&acc * y) + c)
}

/// Yun's algorithm: returns (squarefree factor, multiplicity) pairs.
fn squarefree(p: &GPoly) -> Vec<(GPoly, usize)> {
    let p = monic(p);
    let dp = derivative(&p);
    let mut a = gcd(&p, &dp);
    let mut b = divrem(&p, &a).0;
    let mut c = divrem(&dp, &a).0;
    let mut d: GPoly = {
        let db = derivative(&b);
        let mut t: GPoly = (0..c.len().max(db.len()))
            .map(|i| {
                let x = c.get(i).cloned().unwrap_or_else(GaussQ::zero);
                let y = db.get(i).cloned().unwrap_or_else(GaussQ::zero);
                &x - &y
            })
            .collect();
        trim(&mut t);
        t
    };
    let mut out = Vec::new();
    let mut k = 1;
    while deg(&b) > 0 {
        a = gcd(&b, &d);
        if deg(&a) > 0 {
            out.push((a.clone(), k));
        }
        b = divrem(&b, &a).0;
        c = divrem(&d, &a).0;
        let db = derivative(&b);
        d = (0..c.len().max(db.len()))
            .map(|i| {
                let x = c.get(i).cloned().unwrap_or_else(GaussQ::zero);
                let y = db.get(i).cloned().unwrap_or_else(GaussQ::zero);
                &x - &y
            })
            .collect();
        trim(&mut d);
        k += 1;
    }
    out
}

fn q_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Square root in Q(i) when it exists.
pub fn gauss_sqrt(z: &GaussQ) -> Option<GaussQ> {
    if z.is_zero() {
        return Some(GaussQ::zero());
    }
    let modulus = q_sqrt(&z.norm2())?;
    let two = Q::from_integer(2.into());
    let x2 = (&modulus + &z.re) / &two;
    if let Some(x) = q_sqrt(&x2) {
        if !x.is_zero() {
            let y = &z.im / (&two * &x);
            return Some(GaussQ::new(x, y));
        }
    }
    let y2 = (&modulus - &z.re) / &two;
    let y = q_sqrt(&y2)?;
    if y.is_zero() {
        return None;
    }
    let x = &z.im / (&two * &y);
    Some(GaussQ::new(x, y))
}

/// Best rational approximation with denominator ≤ `max_den`.
fn reconstruct(x: f64, max_den: i64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    if k1 == 0 {
        return None;
    }
    Some(Q::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Aberth–Ehrlich simultaneous iteration on a complex polynomial.
pub fn aberth(p: &[Complex64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let a: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    // Cauchy bound for the initial circle.
    let radius = 1.0
        + a[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(
                radius * 0.5,
                2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4,
            )
        })
        .collect();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::zero();
        let mut dv = Complex64::zero();
        for c in a.iter().rev() {
            dv = dv * x + v;
            v = v * x + c;
        }
        (v, dv)
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (v, dv) = eval(z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z[i] - z[j];
                    if diff.norm() == 0.0 {
                        Complex64::zero()
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let denom = Complex64::one() - ratio * s;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] -= step;
            moved = moved.max(step.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn roots_squarefree_exact(p: &GPoly) -> Result<Vec<GaussQ>> {
    let mut p = monic(p);
    let mut out = Vec::new();
    loop {
        match deg(&p) {
            0 => return Ok(out),
            1 => {
                out.push(-&p[0]);
                return Ok(out);
            }
            2 => {
                // y = (−b ± √(b² − 4c)) / 2
                let b = &p[1];
                let c = &p[0];
                let disc = &(b * b) - &(&GaussQ::from_int(4) * c);
                let s = gauss_sqrt(&disc).ok_or(Error::SplittingFieldRequired)?;
                let half = GaussQ::real(Q::new(1.into(), 2.into()));
                out.push(&(&(-b) + &s) * &half);
                out.push(&(&(-b) - &s) * &half);
                return Ok(out);
            }
            _ => {
                let cp: Vec<Complex64> = p.iter().map(GaussQ::to_complex).collect();
                let mut found = None;
                'cand: for r in aberth(&cp) {
                    for max_den in [1i64, 16, 1 << 12, 1 << 24] {
                        let (Some(re), Some(im)) =
                            (reconstruct(r.re, max_den), reconstruct(r.im, max_den))
                        else {
                            continue;
                        };
                        let y = GaussQ::new(re, im);
                        if eval_g(&p, &y).is_zero() {
                            found = Some(y);
                            break 'cand;
                        }
                    }
                }
                let y = found.ok_or(Error::SplittingFieldRequired)?;
                let lin = vec![-&y, GaussQ::one()];
                p = divrem(&p, &lin).0;
                out.push(y);
            }
        }
    }
}

/// Nonzero-leading polynomial roots with multiplicities, canonically ordered.
pub fn poly_roots(p: &[Coeff], mode: Mode) -> Result<Vec<(Coeff, usize)>> {
    let exact = mode == Mode::Exact && p.iter().all(Coeff::is_exact);
    let mut out: Vec<(Coeff, usize)> = Vec::new();
    if exact {
        let gp: GPoly = p.iter().map(|c| c.exact().unwrap().clone()).collect();
        for (factor, mult) in squarefree(&gp) {
            for y in roots_squarefree_exact(&factor)? {
                out.push((Coeff::Exact(y), mult));
            }
        }
    } else {
        let cp: Vec<Complex64> = p.iter().map(Coeff::to_complex).collect();
        let scale = cp.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1.0);
        let mut rs = aberth(&cp);
        rs.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        // cluster approximations of multiple roots
        let tol = 1e-4 * scale.sqrt();
        let mut clusters: Vec<(Complex64, usize)> = Vec::new();
        for r in rs {
            match clusters
                .iter_mut()
                .find(|(c, n)| (*c / *n as f64 - r).norm() < tol * (1.0 + r.norm()))
            {
                Some((c, n)) => {
                    *c += r;
                    *n += 1;
                }
                None => clusters.push((r, 1)),
            }
        }
        for (sum, n) in clusters {
            out.push((Coeff::Num(sum / n as f64), n));
        }
    }
    out.sort_by(|a, b| a.0.cmp_canonical(&b.0));
    Ok(out)
}

/// Integer-valued helper used by tests: true when f64 is close to an integer.
pub fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r.to_i64()
    } else {
        None
    }
}
