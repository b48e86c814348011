//! Text grammars for series, symmetric-algebra and enveloping-algebra
//! expressions.
//!
//! - series: `"1 - 1/2*t + 1/12*t^2"`, with the named constructors
//!   `phi(c)`, `phi0`, `theta(c)` usable as atoms;
//! - S(𝔤) elements: products of basis labels, e.g. `"x*y + 1/2*z"`;
//! - U(𝔤) elements: noncommutative words, e.g. `"j(x)*j(y) - 1/2*j(z)"`.
//!
//! Coefficients are integers or fractions `p/q` interpreted in the ambient
//! ring (the denominator must be invertible).

use std::sync::Arc;

use crate::coeff::{RingSpec, Scalar};
use crate::envelope::EnvElement;
use crate::series::{phi_c, phi_zero, theta_c, TruncSeries};
use crate::superlie::SuperLieAlgebra;
use crate::symcoalg::SymElement;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' => {
                chars.next();
            }
            '0'..='9' => {
                let mut num = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        num.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Num(num));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut ident = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        ident.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(ident));
            }
            '+' => {
                chars.next();
                out.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                out.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                out.push(Tok::Star);
            }
            '/' => {
                chars.next();
                out.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                out.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                out.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                out.push(Tok::RParen);
            }
            other => {
                return Err(Error::Parse(format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        match self.next() {
            Some(t) if t == tok => Ok(()),
            other => Err(Error::Parse(format!("expected {tok:?}, found {other:?}"))),
        }
    }

    /// Integer or fraction, optionally negated, mapped into the ring.
    fn scalar(&mut self, ring: &RingSpec) -> Result<Scalar> {
        let negate = matches!(self.peek(), Some(Tok::Minus));
        if negate {
            self.next();
        }
        let Some(Tok::Num(num)) = self.next() else {
            return Err(Error::Parse("expected a number".into()));
        };
        let mut text = num;
        if matches!(self.peek(), Some(Tok::Slash)) {
            self.next();
            let Some(Tok::Num(den)) = self.next() else {
                return Err(Error::Parse("expected a denominator".into()));
            };
            text = format!("{text}/{den}");
        }
        let value = ring.parse_scalar(&text)?;
        Ok(if negate { value.neg() } else { value })
    }

    fn exponent(&mut self) -> Result<usize> {
        match self.next() {
            Some(Tok::Num(n)) => n
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent `{n}`"))),
            other => Err(Error::Parse(format!(
                "expected an exponent, found {other:?}"
            ))),
        }
    }
}

/// Shared expression walker: sums of products of powered atoms.
trait Ops: Sized + Clone {
    fn ring(&self) -> RingSpec;
    fn scalar_value(&self, c: Scalar) -> Self;
    fn add_val(&self, other: &Self) -> Self;
    fn neg_val(&self) -> Self;
    fn mul_val(&self, other: &Self) -> Result<Self>;
    fn atom(&self, cur: &mut Cursor) -> Result<Self>;
}

fn parse_expr<V: Ops>(ctx: &V, cur: &mut Cursor) -> Result<V> {
    let mut negate = false;
    if matches!(cur.peek(), Some(Tok::Minus)) {
        cur.next();
        negate = true;
    }
    let mut acc = parse_term(ctx, cur)?;
    if negate {
        acc = acc.neg_val();
    }
    loop {
        match cur.peek() {
            Some(Tok::Plus) => {
                cur.next();
                acc = acc.add_val(&parse_term(ctx, cur)?);
            }
            Some(Tok::Minus) => {
                cur.next();
                acc = acc.add_val(&parse_term(ctx, cur)?.neg_val());
            }
            _ => break,
        }
    }
    Ok(acc)
}

fn parse_term<V: Ops>(ctx: &V, cur: &mut Cursor) -> Result<V> {
    let mut acc = parse_factor(ctx, cur)?;
    while matches!(cur.peek(), Some(Tok::Star)) {
        cur.next();
        acc = acc.mul_val(&parse_factor(ctx, cur)?)?;
    }
    Ok(acc)
}

fn parse_factor<V: Ops>(ctx: &V, cur: &mut Cursor) -> Result<V> {
    let base = match cur.peek() {
        Some(Tok::Num(_)) => {
            let c = cur.scalar(&ctx.ring())?;
            ctx.scalar_value(c)
        }
        Some(Tok::LParen) => {
            cur.next();
            let inner = parse_expr(ctx, cur)?;
            cur.expect(Tok::RParen)?;
            inner
        }
        _ => ctx.atom(cur)?,
    };
    if matches!(cur.peek(), Some(Tok::Caret)) {
        cur.next();
        let e = cur.exponent()?;
        let mut acc = ctx.scalar_value(ctx.ring().one());
        for _ in 0..e {
            acc = acc.mul_val(&base)?;
        }
        return Ok(acc);
    }
    Ok(base)
}

#[derive(Clone)]
struct SeriesCtx {
    ring: RingSpec,
    cap: usize,
    value: TruncSeries,
}

impl Ops for SeriesCtx {
    fn ring(&self) -> RingSpec {
        self.ring.clone()
    }

    fn scalar_value(&self, c: Scalar) -> Self {
        SeriesCtx {
            ring: self.ring.clone(),
            cap: self.cap,
            value: TruncSeries::constant(&c, self.cap),
        }
    }

    fn add_val(&self, other: &Self) -> Self {
        SeriesCtx {
            value: self.value.add(&other.value),
            ..self.clone()
        }
    }

    fn neg_val(&self) -> Self {
        SeriesCtx {
            value: self.value.neg(),
            ..self.clone()
        }
    }

    fn mul_val(&self, other: &Self) -> Result<Self> {
        Ok(SeriesCtx {
            value: self.value.mul(&other.value),
            ..self.clone()
        })
    }

    fn atom(&self, cur: &mut Cursor) -> Result<Self> {
        match cur.next() {
            Some(Tok::Ident(name)) => {
                let value = match name.as_str() {
                    "t" => TruncSeries::t(&self.ring, self.cap),
                    "phi0" => phi_zero(&self.ring, self.cap),
                    "phi" => {
                        cur.expect(Tok::LParen)?;
                        let c = cur.scalar(&self.ring)?;
                        cur.expect(Tok::RParen)?;
                        phi_c(&c, self.cap)?
                    }
                    "theta" => {
                        cur.expect(Tok::LParen)?;
                        let c = cur.scalar(&self.ring)?;
                        cur.expect(Tok::RParen)?;
                        theta_c(&c, self.cap)?
                    }
                    other => {
                        return Err(Error::Parse(format!(
                            "unknown series name `{other}` (expected t, phi0, phi(c), theta(c))"
                        )))
                    }
                };
                Ok(SeriesCtx {
                    ring: self.ring.clone(),
                    cap: self.cap,
                    value,
                })
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse a series expression at the given ring and truncation cap.
pub fn parse_series(text: &str, ring: &RingSpec, cap: usize) -> Result<TruncSeries> {
    let mut cur = Cursor {
        toks: tokenize(text)?,
        pos: 0,
    };
    let ctx = SeriesCtx {
        ring: ring.clone(),
        cap,
        value: TruncSeries::zero(ring, cap),
    };
    let out = parse_expr(&ctx, &mut cur)?;
    if cur.peek().is_some() {
        return Err(Error::Parse(
            "trailing input after series expression".into(),
        ));
    }
    Ok(out.value)
}

#[derive(Clone)]
struct SymCtx {
    algebra: Arc<SuperLieAlgebra>,
    value: SymElement,
}

impl Ops for SymCtx {
    fn ring(&self) -> RingSpec {
        self.algebra.ring().clone()
    }

    fn scalar_value(&self, c: Scalar) -> Self {
        SymCtx {
            algebra: self.algebra.clone(),
            value: SymElement::from_scalar(&self.algebra, c),
        }
    }

    fn add_val(&self, other: &Self) -> Self {
        SymCtx {
            algebra: self.algebra.clone(),
            value: self.value.add(&other.value),
        }
    }

    fn neg_val(&self) -> Self {
        SymCtx {
            algebra: self.algebra.clone(),
            value: self.value.neg(),
        }
    }

    fn mul_val(&self, other: &Self) -> Result<Self> {
        Ok(SymCtx {
            algebra: self.algebra.clone(),
            value: self.value.mul(&other.value),
        })
    }

    fn atom(&self, cur: &mut Cursor) -> Result<Self> {
        match cur.next() {
            Some(Tok::Ident(label)) => {
                let i = self
                    .algebra
                    .index_of(&label)
                    .ok_or_else(|| Error::Parse(format!("unknown basis label `{label}`")))?;
                Ok(SymCtx {
                    algebra: self.algebra.clone(),
                    value: SymElement::from_lie(&self.algebra.basis_element(i)),
                })
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parse an S(𝔤) expression over the given algebra.
pub fn parse_sym(text: &str, algebra: &Arc<SuperLieAlgebra>) -> Result<SymElement> {
    let mut cur = Cursor {
        toks: tokenize(text)?,
        pos: 0,
    };
    let ctx = SymCtx {
        algebra: algebra.clone(),
        value: SymElement::zero(algebra),
    };
    let out = parse_expr(&ctx, &mut cur)?;
    if cur.peek().is_some() {
        return Err(Error::Parse(
            "trailing input after element expression".into(),
        ));
    }
    Ok(out.value)
}

#[derive(Clone)]
struct EnvCtx {
    algebra: Arc<SuperLieAlgebra>,
    value: EnvElement,
}

impl Ops for EnvCtx {
    fn ring(&self) -> RingSpec {
        self.algebra.ring().clone()
    }

    fn scalar_value(&self, c: Scalar) -> Self {
        EnvCtx {
            algebra: self.algebra.clone(),
            value: EnvElement::from_scalar(&self.algebra, c),
        }
    }

    fn add_val(&self, other: &Self) -> Self {
        EnvCtx {
            algebra: self.algebra.clone(),
            value: self.value.add(&other.value),
        }
    }

    fn neg_val(&self) -> Self {
        EnvCtx {
            algebra: self.algebra.clone(),
            value: self.value.neg(),
        }
    }

    fn mul_val(&self, other: &Self) -> Result<Self> {
        Ok(EnvCtx {
            algebra: self.algebra.clone(),
            value: self.value.mul(&other.value)?,
        })
    }

    fn atom(&self, cur: &mut Cursor) -> Result<Self> {
        match cur.next() {
            Some(Tok::Ident(name)) if name == "j" => {
                cur.expect(Tok::LParen)?;
                let Some(Tok::Ident(label)) = cur.next() else {
                    return Err(Error::Parse("expected a basis label inside j(...)".into()));
                };
                cur.expect(Tok::RParen)?;
                let i = self
                    .algebra
                    .index_of(&label)
                    .ok_or_else(|| Error::Parse(format!("unknown basis label `{label}`")))?;
                Ok(EnvCtx {
                    algebra: self.algebra.clone(),
                    value: EnvElement::from_lie(&self.algebra.basis_element(i)),
                })
            }
            other => Err(Error::Parse(format!(
                "unexpected token {other:?} (U(g) atoms are j(label))"
            ))),
        }
    }
}

/// Parse a U(𝔤) expression over the given algebra; the result is always in
/// normal form.
pub fn parse_env(text: &str, algebra: &Arc<SuperLieAlgebra>) -> Result<EnvElement> {
    let mut cur = Cursor {
        toks: tokenize(text)?,
        pos: 0,
    };
    let ctx = EnvCtx {
        algebra: algebra.clone(),
        value: EnvElement::zero(algebra),
    };
    let out = parse_expr(&ctx, &mut cur)?;
    if cur.peek().is_some() {
        return Err(Error::Parse(
            "trailing input after element expression".into(),
        ));
    }
    Ok(out.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::defect_rep;

    fn q() -> RingSpec {
        RingSpec::Rationals
    }

    #[test]
    fn series_literals_round_trip() {
        let s = parse_series("1 - 1/2*t + 1/12*t^2", &q(), 2).unwrap();
        assert_eq!(s, phi_c(&q().one(), 2).unwrap());
        assert_eq!(parse_series(&s.to_string(), &q(), 2).unwrap(), s);
        // named constructors
        assert_eq!(
            parse_series("phi(1)", &q(), 6).unwrap(),
            phi_c(&q().one(), 6).unwrap()
        );
        assert_eq!(parse_series("phi0", &q(), 3).unwrap(), phi_zero(&q(), 3));
        let theta = parse_series("theta(1/4)", &q(), 6).unwrap();
        assert_eq!(theta, theta_c(&q().fraction(1, 4).unwrap(), 6).unwrap());
        // arithmetic on atoms
        let sum = parse_series("phi(2) + phi(-2)", &q(), 8).unwrap();
        assert_eq!(sum, phi_zero(&q(), 8));
        let mix = parse_series("2*theta(1) - t^2", &q(), 4).unwrap();
        assert!(defect_rep(&parse_series("phi(1)", &q(), 4).unwrap()).is_zero());
        assert_eq!(mix.coeff(2), &q().fraction(-1, 3).unwrap());
    }

    #[test]
    fn series_parse_errors() {
        assert!(parse_series("1 +", &q(), 2).is_err());
        assert!(parse_series("w", &q(), 2).is_err());
        assert!(parse_series("1 $ 2", &q(), 2).is_err());
        assert!(parse_series("phi(1) extra", &q(), 2).is_err());
        // phi over Z blocks at 2
        let err = parse_series("phi(1)", &RingSpec::Integers, 3).unwrap_err();
        assert_eq!(err.blocking_integer(), Some(2));
    }

    #[test]
    fn sym_expressions() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let w = parse_sym("x*y + 1/2*z", &hei).unwrap();
        assert_eq!(w.to_string(), "1/2*z + x*y");
        let swapped = parse_sym("y*x + 1/2*z", &hei).unwrap();
        assert_eq!(w, swapped);
        assert!(parse_sym("x*q", &hei).is_err());
    }

    #[test]
    fn env_expressions() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let u = parse_env("j(x)*j(y) - 1/2*j(z)", &hei).unwrap();
        assert_eq!(u.to_string(), "-1/2*j(z) + j(x)*j(y)");
        // straightening happens during parsing: j(y)j(x) = j(x)j(y) - j(z)
        let v = parse_env("j(y)*j(x) + 1/2*j(z)", &hei).unwrap();
        assert_eq!(u, v);
        assert!(parse_env("x*y", &hei).is_err());
    }
}
