//! Newton–Puiseux root finding over truncated Puiseux coefficients.
//!
//! The lower Newton polygon is built from the points (j, ord a_j). A
//! coefficient known only modulo z^T (no stored terms) enters at height T;
//! it may sit strictly above the polygon but never on a segment that still
//! matters at the requested precision.

use num_traits::Zero;

use super::roots::poly_roots;
use super::PuiseuxSeries as PS;
use crate::arith::{ExtQ, Q};
use crate::coeff::{Coeff, Mode, NUMERIC_ZERO};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub series: PS,
    pub mult: usize,
}

pub fn poly_eval(p: &[PS], w: &PS) -> PS {
    let mut acc = PS::zero();
    for c in p.iter().rev() {
        acc = acc.mul(w).add(c);
    }
    acc
}

pub fn poly_eval_deriv(p: &[PS], w: &PS) -> PS {
    let mut acc = PS::zero();
    for (j, c) in p.iter().enumerate().skip(1).rev() {
        acc = acc.mul(w).add(&c.scale(&Coeff::from_int(j as i64)));
    }
    acc
}

/// P(w) ↦ P(s + w) for a monomial s.
fn taylor_shift(p: &[PS], s: &PS) -> Vec<PS> {
    let (e, c) = s.leading().map(|(e, c)| (e.clone(), c.clone())).unwrap();
    let mut b = p.to_vec();
    let n = b.len() - 1;
    for k in 0..n {
        for j in (k..n).rev() {
            let t = b[j + 1].mul_monomial(&c, &e);
            b[j] = b[j].add(&t);
        }
    }
    b
}

#[derive(Clone, Debug)]
enum Pt {
    Known(Q, Coeff),
    Uncertain(Q),
}

impl Pt {
    fn height(&self) -> &Q {
        match self {
            Pt::Known(v, _) | Pt::Uncertain(v) => v,
        }
    }
}

fn insufficient(what: &str) -> Error {
    Error::InsufficientPrecision(what.to_string())
}

/// Lower convex hull vertices (indices into `pts`, which is sorted by j).
fn lower_hull(pts: &[(usize, Pt)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while hull.len() >= 2 {
            let o = &pts[hull[hull.len() - 2]];
            let a = &pts[hull[hull.len() - 1]];
            let b = &pts[i];
            let (oj, aj, bj) = (o.0 as i64, a.0 as i64, b.0 as i64);
            let cross = Q::from_integer((aj - oj).into()) * (b.1.height() - o.1.height())
                - (a.1.height() - o.1.height()) * Q::from_integer((bj - oj).into());
            if cross <= Q::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// After a numeric shift by a term of order `l`, the exact polygon has no
/// point on or below the line of slope `l` through the pivot `p[count]`;
/// whatever rounding left there is removed.
fn denoise(p: &mut [PS], count: usize, l: &Q) {
    let Some((h, _)) = p[count].leading() else { return };
    let scale = p.iter().flat_map(|a| a.terms().values()).map(Coeff::norm_f64).fold(1.0, f64::max);
    let base = h + l * Q::from_integer((count as i64).into());
    for (j, a) in p.iter_mut().enumerate().take(count) {
        let floor = &base - l * Q::from_integer((j as i64).into());
        let kept: Vec<(Q, Coeff)> = a
            .terms()
            .iter()
            .filter(|(e, c)| **e > floor && c.norm_f64() >= NUMERIC_ZERO * scale)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        if kept.len() < a.len() {
            *a = PS::new(kept, a.trunc().clone());
        }
    }
}

struct Ctx<'a> {
    prec: &'a Q,
    mode: Mode,
    out: Vec<Root>,
}

impl Ctx<'_> {
    fn solve(&mut self, mut p: Vec<PS>, prefix: PS, lower: Option<Q>, mut count: usize) -> Result<()> {
        if self.mode == Mode::Numeric {
            if let Some(l) = &lower {
                denoise(&mut p, count, l);
            }
        }
        let zeros = p[..count].iter().take_while(|a| a.is_exact_zero()).count();
        if zeros > 0 {
            self.out.push(Root {
                series: prefix.clone(),
                mult: zeros,
            });
            p.drain(..zeros);
            count -= zeros;
        }
        match count {
            0 => return Ok(()),
            1 => return self.tail(&p, prefix, lower.as_ref()),
            _ => {}
        }
        let mut pts: Vec<(usize, Pt)> = Vec::new();
        for (j, a) in p.iter().enumerate().take(count + 1) {
            match a.leading() {
                Some((e, c)) => pts.push((j, Pt::Known(e.clone(), c.clone()))),
                None => match a.trunc() {
                    ExtQ::Inf => {}
                    ExtQ::Fin(t) => pts.push((j, Pt::Uncertain(t.clone()))),
                },
            }
        }
        if !matches!(pts.last(), Some((j, Pt::Known(..))) if *j == count) {
            return Err(insufficient("order of a pivot coefficient is unknown"));
        }
        let hull = lower_hull(&pts);
        let segments: Vec<(usize, usize, Q)> = hull
            .windows(2)
            .map(|w| {
                let (ja, pa) = &pts[w[0]];
                let (jb, pb) = &pts[w[1]];
                let width = Q::from_integer(((jb - ja) as i64).into());
                (w[0], w[1], (pa.height() - pb.height()) / width)
            })
            .collect();
        // Steeper edges come first; those at or beyond the precision form one cluster.
        let cluster: usize = segments
            .iter()
            .filter(|s| &s.2 >= self.prec)
            .map(|s| pts[s.1].0 - pts[s.0].0)
            .sum();
        if cluster > 0 {
            self.out.push(Root {
                series: prefix.with_trunc(ExtQ::Fin(self.prec.clone())),
                mult: cluster,
            });
        }
        for (ia, ib, gamma) in segments.into_iter().filter(|s| &s.2 < self.prec) {
            let (ja, pa) = &pts[ia];
            let jb = pts[ib].0;
            if lower.as_ref().is_some_and(|l| &gamma <= l) {
                return Err(insufficient("polygon slope below the previous term"));
            }
            let mut chi = vec![Coeff::zero(); jb - ja + 1];
            for (j, pt) in &pts[ia..=ib] {
                let on_line = pt.height() + &gamma * Q::from_integer(((j - ja) as i64).into())
                    == *pa.height();
                if !on_line {
                    continue;
                }
                match pt {
                    Pt::Known(_, c) => chi[j - ja] = c.clone(),
                    Pt::Uncertain(_) => {
                        return Err(insufficient("truncated coefficient on a polygon edge"))
                    }
                }
            }
            for (y, mu) in poly_roots(&chi, self.mode)? {
                let s = PS::monomial(y, gamma.clone());
                let shifted = taylor_shift(&p, &s);
                self.solve(shifted, prefix.add(&s), Some(gamma.clone()), mu)?;
            }
        }
        Ok(())
    }

    /// The single root of `p` with order above `lower`, term by term.
    fn tail(&mut self, p: &[PS], prefix: PS, lower: Option<&Q>) -> Result<()> {
        let (e1, c1) = match p[1].leading() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(insufficient("linear coefficient has unknown order")),
        };
        let target = ExtQ::Fin(self.prec.clone());
        let first = match p[0].leading() {
            Some((e, _)) => e - &e1,
            None => {
                return match p[0].trunc() {
                    ExtQ::Inf => unreachable!("exact zeros are stripped"),
                    ExtQ::Fin(t) if &(t - &e1) >= self.prec => {
                        self.out.push(Root {
                            series: prefix.with_trunc(target),
                            mult: 1,
                        });
                        Ok(())
                    }
                    ExtQ::Fin(_) => Err(insufficient("constant coefficient too coarse")),
                };
            }
        };
        if lower.is_some_and(|l| &first <= l) {
            return Err(insufficient("inconsistent simple-root step"));
        }
        // a_0 is only needed modulo z^(prec + e1); every w has ord ≥ first.
        let need = self.prec + &e1;
        let q: Vec<PS> = p
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let lim = &need - &first * Q::from_integer((j as i64).into());
                a.truncate_q(&lim)
            })
            .collect();
        let inv1 = c1.inv().expect("leading coefficient is nonzero");
        let mut w = PS::zero();
        let scale = q.iter().flat_map(|a| a.terms().values()).map(Coeff::norm_f64).fold(1.0, f64::max);
        let mut last: Option<Q> = None;
        loop {
            let mut a0 = poly_eval(&q, &w);
            if self.mode == Mode::Numeric {
                // rounding leaves residue at orders already solved for
                let floor = last.as_ref().map(|l| l + &e1);
                let kept = a0
                    .terms()
                    .iter()
                    .filter(|(e, c)| floor.as_ref().is_none_or(|f| *e > f) && c.norm_f64() >= NUMERIC_ZERO * scale)
                    .map(|(e, c)| (e.clone(), c.clone()));
                a0 = PS::new(kept, a0.trunc().clone());
            }
            if a0.is_exact_zero() {
                self.out.push(Root {
                    series: prefix.add(&w),
                    mult: 1,
                });
                return Ok(());
            }
            match a0.leading() {
                Some((o0, c0)) if &(o0 - &e1) < self.prec => {
                    let y = -(c0 * &inv1);
                    last = Some(o0 - &e1);
                    w = w.add(&PS::monomial(y, o0 - &e1));
                }
                Some(_) => break,
                None => match a0.trunc() {
                    ExtQ::Fin(t) if &(t - &e1) >= self.prec => break,
                    _ => return Err(insufficient("evaluation lost precision")),
                },
            }
        }
        let exact = p.iter().all(PS::is_exact);
        let series = if exact && poly_eval(p, &w).is_exact_zero() {
            prefix.add(&w)
        } else {
            prefix.add(&w).with_trunc(target)
        };
        self.out.push(Root { series, mult: 1 });
        Ok(())
    }
}

/// All roots of Σ p_j w^j, counted with multiplicity, each correct modulo z^prec.
///
/// Exact roots are returned with infinite truncation. The leading
/// coefficient must have a known order.
pub fn newton_puiseux(p: &[PS], prec: &Q, mode: Mode) -> Result<Vec<Root>> {
    let mut p: Vec<PS> = p.to_vec();
    while p.last().is_some_and(PS::is_exact_zero) {
        p.pop();
    }
    if p.len() < 2 {
        return Err(Error::Invalid("polynomial must have degree at least 1".into()));
    }
    if p.last().unwrap().leading().is_none() {
        return Err(insufficient("leading coefficient has unknown order"));
    }
    if mode == Mode::Numeric {
        p = p.iter().map(PS::to_numeric).collect();
    }
    let n = p.len() - 1;
    let mut ctx = Ctx {
        prec,
        mode,
        out: Vec::new(),
    };
    ctx.solve(p, PS::zero(), None, n)?;
    Ok(ctx.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qi;

    fn ps(s: &str) -> PS {
        s.parse().unwrap()
    }

    fn roots(p: &[&str], prec: i64) -> Vec<(String, usize)> {
        let p: Vec<PS> = p.iter().map(|s| ps(s)).collect();
        newton_puiseux(&p, &qi(prec), Mode::Exact)
            .unwrap()
            .into_iter()
            .map(|r| (r.series.to_string(), r.mult))
            .collect()
    }

    #[test]
    fn square_roots_of_z4() {
        let r = roots(&["-z^4", "0", "1"], 10);
        assert_eq!(r, vec![("-z^2".into(), 1), ("z^2".into(), 1)]);
    }

    #[test]
    fn critical_branches_of_cubic_example() {
        // jac_w of w³ − 3zw² is 3w² − 6zw
        let r = roots(&["0", "-6*z", "3"], 10);
        assert_eq!(r, vec![("0".into(), 1), ("2*z".into(), 1)]);
    }

    #[test]
    fn ramified_pair() {
        let r = roots(&["z^4 - z^5", "-2*z^2", "1"], 10);
        assert_eq!(
            r,
            vec![
                ("z^2 - z^(5/2)".into(), 1),
                ("z^2 + z^(5/2)".into(), 1)
            ]
        );
    }

    #[test]
    fn infinite_root_truncated() {
        // w² − z⁴ − z⁵ = 0 gives w = ±z²(1+z)^{1/2}
        let r = roots(&["-z^4 - z^5", "0", "1"], 6);
        assert_eq!(r[1].0, "z^2 + 1/2*z^3 - 1/8*z^4 + 1/16*z^5 + O(z^6)");
    }

    #[test]
    fn coarse_coefficients_are_detected() {
        let p = vec![ps("z^4 + O(z^5)"), ps("-2*z^2"), ps("1")];
        let r = newton_puiseux(&p, &qi(10), Mode::Exact);
        assert!(matches!(r, Err(Error::InsufficientPrecision(_))));
        let r = newton_puiseux(&p, &qi(2), Mode::Exact).unwrap();
        assert_eq!(r, vec![Root { series: ps("O(z^2)"), mult: 2 }]);
    }
}
