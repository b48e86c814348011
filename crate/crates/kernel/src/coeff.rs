//! Exact coefficient arithmetic over ℚ, ℤ and ℤ/nℤ.
//!
//! A [`RingSpec`] designates the ambient coefficient ring and a [`Scalar`]
//! is one of its elements in canonical form:
//!
//! - rationals are kept in lowest terms with positive denominator
//!   (delegated to `num_rational::BigRational`),
//! - integers are arbitrary precision,
//! - residues mod n are kept in `[0, n)`.
//!
//! Only purely even coefficient rings are supported. Arithmetic between
//! scalars of different rings panics; the data-dependent failure mode is
//! [`Error::NotInvertible`], raised by [`Scalar::inv`] and by everything
//! built on top of it.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Designation of the ambient coefficient ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingSpec {
    /// The rational numbers ℚ.
    Rationals,
    /// The ring of integers ℤ.
    Integers,
    /// The ring ℤ/nℤ with modulus `n ≥ 2` (not necessarily prime).
    Mod(u64),
}

impl RingSpec {
    /// Parse a ring designation: `"Q"`, `"Z"`, or `"Z/<n>"` (e.g. `"Z/3"`).
    pub fn parse(text: &str) -> Result<RingSpec> {
        let t = text.trim();
        match t {
            "Q" => Ok(RingSpec::Rationals),
            "Z" => Ok(RingSpec::Integers),
            _ => {
                if let Some(rest) = t.strip_prefix("Z/") {
                    let n: u64 = rest
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad modulus in ring `{t}`")))?;
                    if n < 2 {
                        return Err(Error::Parse(format!("modulus must be ≥ 2, got {n}")));
                    }
                    Ok(RingSpec::Mod(n))
                } else {
                    Err(Error::Parse(format!(
                        "unknown ring `{t}` (expected Q, Z, or Z/<n>)"
                    )))
                }
            }
        }
    }

    /// True iff the integer `k ≥ 1` has a multiplicative inverse in the ring.
    pub fn invertible(&self, k: i64) -> bool {
        assert!(k >= 1, "invertible is defined for k ≥ 1, got {k}");
        match self {
            RingSpec::Rationals => true,
            RingSpec::Integers => k == 1,
            RingSpec::Mod(n) => (k as u64).gcd(n) == 1,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_integer(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_integer(1)
    }

    /// The canonical image of an integer in the ring.
    pub fn from_integer(&self, n: i64) -> Scalar {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        match self {
            RingSpec::Rationals => Scalar::Rat(BigRational::from_integer(n.clone())),
            RingSpec::Integers => Scalar::Int(n.clone()),
            RingSpec::Mod(m) => {
                let modulus = BigInt::from(*m);
                let mut r = n % &modulus;
                if r.is_negative() {
                    r += &modulus;
                }
                Scalar::Mod {
                    residue: u64::try_from(r).expect("reduced residue fits in u64"),
                    modulus: *m,
                }
            }
        }
    }

    /// The image of the fraction `num/den`, when `den` is invertible.
    pub fn fraction(&self, num: i64, den: i64) -> Result<Scalar> {
        assert!(den != 0, "zero denominator");
        let d = self.from_integer(den);
        Ok(self.from_integer(num).mul(&d.inv()?))
    }

    /// Parse a scalar literal: an integer `"p"` or a fraction `"p/q"`.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let t = text.trim();
        let (num, den) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), Some(q.trim())),
            None => (t, None),
        };
        let p: BigInt = num
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in scalar `{t}`")))?;
        match den {
            None => Ok(self.from_bigint(&p)),
            Some(q) => {
                let q: BigInt = q
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad denominator in scalar `{t}`")))?;
                if q.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in `{t}`")));
                }
                let d = self.from_bigint(&q).inv()?;
                Ok(self.from_bigint(&p).mul(&d))
            }
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Rationals => write!(f, "Q"),
            RingSpec::Integers => write!(f, "Z"),
            RingSpec::Mod(n) => write!(f, "Z/{n}"),
        }
    }
}

/// An exact element of one of the supported rings, in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Rat(BigRational),
    Int(BigInt),
    Mod { residue: u64, modulus: u64 },
}

impl Scalar {
    pub fn ring(&self) -> RingSpec {
        match self {
            Scalar::Rat(_) => RingSpec::Rationals,
            Scalar::Int(_) => RingSpec::Integers,
            Scalar::Mod { modulus, .. } => RingSpec::Mod(*modulus),
        }
    }

    fn check_ring(&self, other: &Scalar, op: &str) {
        assert!(
            self.ring() == other.ring(),
            "scalar ring mismatch in {op}: {} vs {}",
            self.ring(),
            other.ring()
        );
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Int(n) => n.is_zero(),
            Scalar::Mod { residue, .. } => *residue == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Int(n) => n.is_one(),
            Scalar::Mod { residue, .. } => *residue == 1,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.check_ring(other, "add");
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            (Scalar::Int(a), Scalar::Int(b)) => Scalar::Int(a + b),
            (
                Scalar::Mod {
                    residue: a,
                    modulus,
                },
                Scalar::Mod { residue: b, .. },
            ) => Scalar::Mod {
                residue: ((*a as u128 + *b as u128) % (*modulus as u128)) as u64,
                modulus: *modulus,
            },
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.check_ring(other, "mul");
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            (Scalar::Int(a), Scalar::Int(b)) => Scalar::Int(a * b),
            (
                Scalar::Mod {
                    residue: a,
                    modulus,
                },
                Scalar::Mod { residue: b, .. },
            ) => Scalar::Mod {
                residue: ((*a as u128 * *b as u128) % (*modulus as u128)) as u64,
                modulus: *modulus,
            },
            _ => unreachable!(),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Int(a) => Scalar::Int(-a),
            Scalar::Mod { residue, modulus } => Scalar::Mod {
                residue: if *residue == 0 { 0 } else { modulus - residue },
                modulus: *modulus,
            },
        }
    }

    /// The multiplicative inverse, when it exists.
    pub fn inv(&self) -> Result<Scalar> {
        match self {
            Scalar::Rat(a) => {
                if a.is_zero() {
                    Err(Error::NotInvertible {
                        ring: self.ring(),
                        value: "0".into(),
                    })
                } else {
                    Ok(Scalar::Rat(a.recip()))
                }
            }
            Scalar::Int(a) => {
                if a.is_one() || (-a).is_one() {
                    Ok(Scalar::Int(a.clone()))
                } else {
                    Err(Error::NotInvertible {
                        ring: self.ring(),
                        value: a.to_string(),
                    })
                }
            }
            Scalar::Mod { residue, modulus } => {
                let (g, x, _) = ext_gcd(*residue as i128, *modulus as i128);
                if g != 1 {
                    Err(Error::NotInvertible {
                        ring: self.ring(),
                        value: residue.to_string(),
                    })
                } else {
                    let m = *modulus as i128;
                    let r = ((x % m) + m) % m;
                    Ok(Scalar::Mod {
                        residue: r as u64,
                        modulus: *modulus,
                    })
                }
            }
        }
    }

    /// `self * other⁻¹`.
    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, mut n: u32) -> Scalar {
        let mut acc = self.ring().one();
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }
}

/// Extended Euclid: returns `(gcd, x, y)` with `a*x + b*y = gcd`.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Int(n) => write!(f, "{n}"),
            Scalar::Mod { residue, .. } => write!(f, "{residue}"),
        }
    }
}
