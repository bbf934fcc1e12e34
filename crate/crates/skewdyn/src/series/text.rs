//! Text form: `z^2 - 3*z^(1/2) + (1/2+3*i)*z + O(z^5)`.
//!
//! Complex and floating coefficients are always parenthesized, so the
//! printer output parses back to the same series.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::PuiseuxSeries;
use crate::arith::{fmt_q, ExtQ, Q};
use crate::coeff::{Coeff, GaussQ};
use crate::error::{Error, Result};

fn fmt_exp(e: &Q) -> String {
    if e.is_one() {
        "z".to_string()
    } else if e.is_integer() && !e.is_negative() {
        format!("z^{}", e.numer())
    } else {
        format!("z^({})", fmt_q(e))
    }
}

fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_complex(g: &GaussQ) -> String {
    if g.re.is_zero() {
        format!("({}*i)", fmt_q(&g.im))
    } else if g.im.is_negative() {
        format!("({}-{}*i)", fmt_q(&g.re), fmt_q(&-g.im.clone()))
    } else {
        format!("({}+{}*i)", fmt_q(&g.re), fmt_q(&g.im))
    }
}

/// Returns (negative, body) where body is the unsigned coefficient text,
/// or `None` for a unit coefficient that is omitted before `z`.
fn fmt_coeff(c: &Coeff) -> (bool, Option<String>) {
    match c {
        Coeff::Exact(g) if g.is_real() => {
            let neg = g.re.is_negative();
            let abs = g.re.abs();
            if abs.is_one() {
                (neg, None)
            } else {
                (neg, Some(fmt_q(&abs)))
            }
        }
        Coeff::Exact(g) => (false, Some(fmt_complex(g))),
        Coeff::Num(z) => {
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            (
                false,
                Some(format!(
                    "({}{}{}*i)",
                    fmt_float(z.re),
                    sign,
                    fmt_float(z.im.abs())
                )),
            )
        }
    }
}

pub(super) fn format_series(s: &PuiseuxSeries) -> String {
    let mut out = String::new();
    for (idx, (e, c)) in s.terms().iter().enumerate() {
        let (neg, body) = fmt_coeff(c);
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let zpart = if e.is_zero() { None } else { Some(fmt_exp(e)) };
        match (body, zpart) {
            (Some(b), Some(z)) => {
                out.push_str(&b);
                out.push('*');
                out.push_str(&z);
            }
            (Some(b), None) => out.push_str(&b),
            (None, Some(z)) => out.push_str(&z),
            (None, None) => out.push('1'),
        }
    }
    if let ExtQ::Fin(t) = s.trunc() {
        let o = if t.is_zero() {
            "O(1)".to_string()
        } else {
            format!("O({})", fmt_exp(t))
        };
        if out.is_empty() {
            out = o;
        } else {
            out.push_str(" + ");
            out.push_str(&o);
        }
    } else if out.is_empty() {
        out.push('0');
    }
    out
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

enum Item {
    Term(Q, Coeff),
    Trunc(Q),
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", ch as char))
        }
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse().unwrap())
    }

    /// Unsigned number: `A`, `A/B` or a float literal.
    fn number(&mut self) -> Result<Coeff> {
        self.skip_ws();
        let start = self.pos;
        let n = self.digits()?;
        let is_float = matches!(self.src.get(self.pos), Some(b'.' | b'e' | b'E'));
        if is_float {
            while self.pos < self.src.len()
                && matches!(self.src[self.pos], b'0'..=b'9' | b'.' | b'e' | b'E' | b'-' | b'+')
            {
                // a sign only belongs to the literal right after an exponent marker
                if matches!(self.src[self.pos], b'-' | b'+')
                    && !matches!(self.src[self.pos - 1], b'e' | b'E')
                {
                    break;
                }
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return match s.parse::<f64>() {
                Ok(x) => Ok(Coeff::Num(Complex64::new(x, 0.0))),
                Err(_) => {
                    self.pos = start;
                    self.err(format!("invalid float '{s}'"))
                }
            };
        }
        if self.peek() == Some(b'/') {
            self.pos += 1;
            let d = self.digits()?;
            if d.is_zero() {
                return self.err("zero denominator");
            }
            return Ok(Coeff::from_q(Q::new(n, d)));
        }
        Ok(Coeff::from_bigint(n))
    }

    /// Exponent after `^`: `P`, `-P`, `(P/Q)`, `(-P/Q)`.
    fn exponent(&mut self) -> Result<Q> {
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let n = self.digits()?;
        // a bare z^6/2 would be ambiguous, so fractions need parentheses
        let d = if paren && self.eat(b'/') {
            self.digits()?
        } else {
            BigInt::one()
        };
        if d.is_zero() {
            return self.err("zero denominator in exponent");
        }
        if paren {
            self.expect(b')')?;
        }
        let e = Q::new(n, d);
        Ok(if neg { -e } else { e })
    }

    fn z_power(&mut self) -> Result<Q> {
        if self.eat(b'^') {
            self.exponent()
        } else {
            Ok(Q::one())
        }
    }

    /// Parenthesized complex literal: `(a+b*i)`, `(b*i)`, `(0.5-0.25*i)`.
    fn complex(&mut self) -> Result<Coeff> {
        let mut acc = Coeff::zero();
        let mut first = true;
        loop {
            let neg = if self.eat(b'-') {
                true
            } else if first {
                self.eat(b'+');
                false
            } else if self.eat(b'+') {
                false
            } else {
                break;
            };
            first = false;
            let mut c = if self.peek() == Some(b'i') {
                self.pos += 1;
                Coeff::Exact(GaussQ::i())
            } else {
                let c = self.number()?;
                if self.eat(b'*') {
                    if !self.eat(b'i') {
                        return self.err("expected 'i'");
                    }
                    &c * &Coeff::Exact(GaussQ::i())
                } else if self.peek() == Some(b'i') {
                    self.pos += 1;
                    &c * &Coeff::Exact(GaussQ::i())
                } else {
                    c
                }
            };
            if neg {
                c = -c;
            }
            acc = &acc + &c;
        }
        if first {
            return self.err("empty coefficient");
        }
        self.expect(b')')?;
        Ok(acc)
    }

    fn item(&mut self) -> Result<Item> {
        if self.peek() == Some(b'O') {
            self.pos += 1;
            self.expect(b'(')?;
            let t = if self.eat(b'z') {
                self.z_power()?
            } else {
                let n = self.digits()?;
                if !n.is_one() {
                    return self.err("expected O(1) or O(z^...)");
                }
                Q::zero()
            };
            self.expect(b')')?;
            return Ok(Item::Trunc(t));
        }
        let mut coeff = Coeff::one();
        let mut exp = Q::zero();
        loop {
            match self.peek() {
                Some(b'z') => {
                    self.pos += 1;
                    exp += self.z_power()?;
                }
                Some(b'i') => {
                    self.pos += 1;
                    coeff = &coeff * &Coeff::Exact(GaussQ::i());
                }
                Some(b'(') => {
                    self.pos += 1;
                    coeff = &coeff * &self.complex()?;
                }
                Some(b'0'..=b'9') => coeff = &coeff * &self.number()?,
                Some(ch) => return self.err(format!("unexpected '{}'", ch as char)),
                None => return self.err("unexpected end of input"),
            }
            if !self.eat(b'*') {
                break;
            }
        }
        Ok(Item::Term(exp, coeff))
    }
}

pub(super) fn parse_series(src: &str) -> Result<PuiseuxSeries> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut terms = Vec::new();
    let mut trunc = ExtQ::Inf;
    let mut first = true;
    loop {
        let neg = if p.eat(b'-') {
            true
        } else if p.eat(b'+') || first {
            false
        } else {
            break;
        };
        if p.peek().is_none() {
            return p.err("dangling sign");
        }
        match p.item()? {
            Item::Term(e, c) => {
                // a lone literal "0" is the zero series
                terms.push((e, if neg { -c } else { c }));
            }
            Item::Trunc(t) => {
                if neg {
                    return p.err("O-term cannot be negated");
                }
                trunc = trunc.min_with(ExtQ::Fin(t));
            }
        }
        first = false;
    }
    if p.peek().is_some() {
        return p.err("trailing characters");
    }
    Ok(PuiseuxSeries::new(terms, trunc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(s: &str) {
        let p = parse_series(s).unwrap();
        assert_eq!(format_series(&p), s, "printer mismatch for {s}");
        assert_eq!(parse_series(&format_series(&p)).unwrap(), p);
    }

    #[test]
    fn canonical_round_trips() {
        for s in [
            "0",
            "1",
            "z",
            "-z^2 + 1/2*z^6 - 1/8*z^10",
            "-64*z^(9/25) - 48*z^(11/25)",
            "z^(-3) + 2",
            "(1/2+3*i)*z + (-1*i)*z^(3/2) + O(z^5)",
            "(2-1*i)",
            "O(1)",
            "O(z^(7/5))",
            "z + O(z^3)",
            "(0.5-0.25*i)*z^2",
        ] {
            round(s);
        }
    }

    #[test]
    fn loose_inputs() {
        let a = parse_series("3*i*z^2").unwrap();
        let b = parse_series("(3*i)*z^2").unwrap();
        assert_eq!(a, b);
        assert_eq!(parse_series("  -  z^ 2").unwrap(), parse_series("-z^2").unwrap());
        assert_eq!(parse_series("2*z*z").unwrap(), parse_series("2*z^2").unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        match parse_series("z^2 + 3*q") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_series("z^(1/0)").is_err());
        assert!(parse_series("z +").is_err());
        assert!(parse_series("").is_err());
        assert!(parse_series("z^6/2").is_err());
    }
}
