//! Truncated formal power series in one and two variables.
//!
//! A [`TruncSeries`] stores the coefficients of degrees `0..=cap` densely; a
//! [`BiTruncSeries`] stores a triangular table of coefficients `c[i][j]` for
//! `i + j <= cap`. Truncation caps are explicit and mixing caps (or rings) in
//! arithmetic panics: an identity claimed at cap D was actually computed to
//! total degree D.
//!
//! On top of the arithmetic this module builds
//!
//! - Bernoulli numbers, by exact inversion of `(e^z - 1)/z`,
//! - the canonical series `phi_c(t) = t/(e^{t/c} - 1)` and `phi_0 = -t`,
//! - the even series `theta_c(t) = sqrt(c)·t·coth(sqrt(c)·t)`, generated from
//!   its differential recurrence so no square roots are needed,
//! - the defects of the one- and two-series functional equations that
//!   characterise representation-inducing series, and a coefficient-wise
//!   solver for the one-series equation,
//! - the exponential reduction `f = (phi + t)/phi`,
//! - the pole-order-one defect of the divided-difference equation for pairs
//!   `p, q ∈ (1/t)·K + K[[t]]`.

use std::fmt;

use num_bigint::BigInt;

use crate::coeff::{RingSpec, Scalar};
use crate::{Error, Result};

/// A formal power series truncated at total degree `cap` (inclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    ring: RingSpec,
    cap: usize,
    /// `coeffs[k]` is the coefficient of `t^k`; length is exactly `cap + 1`.
    coeffs: Vec<Scalar>,
}

impl TruncSeries {
    pub fn zero(ring: &RingSpec, cap: usize) -> Self {
        TruncSeries {
            ring: ring.clone(),
            cap,
            coeffs: vec![ring.zero(); cap + 1],
        }
    }

    pub fn constant(value: &Scalar, cap: usize) -> Self {
        let mut s = TruncSeries::zero(&value.ring(), cap);
        s.coeffs[0] = value.clone();
        s
    }

    /// The monomial `t`.
    pub fn t(ring: &RingSpec, cap: usize) -> Self {
        let mut s = TruncSeries::zero(ring, cap);
        if cap >= 1 {
            s.coeffs[1] = ring.one();
        }
        s
    }

    /// Build from explicit coefficients `c_0, c_1, ...`; missing entries are
    /// zero, entries beyond the cap must not be supplied.
    pub fn from_coeffs(ring: &RingSpec, cap: usize, coeffs: &[Scalar]) -> Self {
        assert!(
            coeffs.len() <= cap + 1,
            "more coefficients than the cap admits"
        );
        let mut s = TruncSeries::zero(ring, cap);
        for (k, c) in coeffs.iter().enumerate() {
            assert!(c.ring() == *ring, "coefficient ring mismatch");
            s.coeffs[k] = c.clone();
        }
        s
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, k: usize) -> &Scalar {
        assert!(k <= self.cap, "coefficient {k} beyond cap {}", self.cap);
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, value: Scalar) {
        assert!(k <= self.cap, "coefficient {k} beyond cap {}", self.cap);
        assert!(value.ring() == self.ring, "coefficient ring mismatch");
        self.coeffs[k] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    fn check_compatible(&self, other: &TruncSeries, op: &str) {
        assert!(
            self.ring == other.ring,
            "series ring mismatch in {op}: {} vs {}",
            self.ring,
            other.ring
        );
        assert!(
            self.cap == other.cap,
            "series cap mismatch in {op}: {} vs {}",
            self.cap,
            other.cap
        );
    }

    pub fn add(&self, other: &TruncSeries) -> TruncSeries {
        self.check_compatible(other, "add");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        TruncSeries {
            ring: self.ring.clone(),
            cap: self.cap,
            coeffs,
        }
    }

    pub fn sub(&self, other: &TruncSeries) -> TruncSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TruncSeries {
        TruncSeries {
            ring: self.ring.clone(),
            cap: self.cap,
            coeffs: self.coeffs.iter().map(Scalar::neg).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &Scalar) -> TruncSeries {
        assert!(c.ring() == self.ring, "scalar ring mismatch");
        TruncSeries {
            ring: self.ring.clone(),
            cap: self.cap,
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &TruncSeries) -> TruncSeries {
        self.check_compatible(other, "mul");
        let mut out = TruncSeries::zero(&self.ring, self.cap);
        for i in 0..=self.cap {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(self.cap - i) {
                if other.coeffs[j].is_zero() {
                    continue;
                }
                let prod = self.coeffs[i].mul(&other.coeffs[j]);
                out.coeffs[i + j] = out.coeffs[i + j].add(&prod);
            }
        }
        out
    }

    /// Formal derivative; the result is known one degree less far.
    pub fn derivative(&self) -> TruncSeries {
        assert!(self.cap >= 1, "cannot differentiate a cap-0 series");
        let mut out = TruncSeries::zero(&self.ring, self.cap - 1);
        for k in 1..=self.cap {
            let factor = self.ring.from_integer(k as i64);
            out.coeffs[k - 1] = self.coeffs[k].mul(&factor);
        }
        out
    }

    /// Re-truncate to a smaller cap.
    pub fn truncate(&self, cap: usize) -> TruncSeries {
        assert!(cap <= self.cap, "truncate cannot extend a series");
        TruncSeries {
            ring: self.ring.clone(),
            cap,
            coeffs: self.coeffs[..=cap].to_vec(),
        }
    }

    /// Multiplicative inverse; requires the constant term to be invertible.
    pub fn invert(&self) -> Result<TruncSeries> {
        let c0_inv = self.coeffs[0].inv()?;
        let mut out = TruncSeries::zero(&self.ring, self.cap);
        out.coeffs[0] = c0_inv.clone();
        for n in 1..=self.cap {
            let mut acc = self.ring.zero();
            for k in 1..=n {
                acc = acc.add(&self.coeffs[k].mul(&out.coeffs[n - k]));
            }
            out.coeffs[n] = acc.mul(&c0_inv).neg();
        }
        Ok(out)
    }

    /// The substitution `t -> t + u`, as an exact bivariate series of the
    /// same cap: the coefficient of `t^i u^j` is `C(i+j, i)·c_{i+j}`.
    pub fn compose_shift(&self) -> BiTruncSeries {
        let mut out = BiTruncSeries::zero(&self.ring, self.cap);
        for i in 0..=self.cap {
            for j in 0..=(self.cap - i) {
                let b = binomial_in(&self.ring, i + j, i);
                out.set(i, j, self.coeffs[i + j].mul(&b));
            }
        }
        out
    }

    /// Embed as a bivariate series in the variable `t` alone.
    pub fn as_bivariate_t(&self, cap: usize) -> BiTruncSeries {
        assert!(cap <= self.cap, "not enough coefficients for requested cap");
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=cap {
            out.set(i, 0, self.coeffs[i].clone());
        }
        out
    }

    /// Embed as a bivariate series in the variable `u` alone.
    pub fn as_bivariate_u(&self, cap: usize) -> BiTruncSeries {
        assert!(cap <= self.cap, "not enough coefficients for requested cap");
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for j in 0..=cap {
            out.set(0, j, self.coeffs[j].clone());
        }
        out
    }

    /// Exact divided difference `(q(t+u) - q(u))/t` (or `/u`), one cap less.
    ///
    /// The numerator vanishes at `t = 0` so the division is exact; the
    /// coefficient of `t^i u^j` is `C(i+j+1, i+1)·q_{i+j+1}` for `by_t`
    /// and `C(i+j+1, j+1)·q_{i+j+1}` for `by_u`.
    pub fn divided_difference(&self, which: DividedBy) -> BiTruncSeries {
        assert!(self.cap >= 1, "divided difference needs cap ≥ 1");
        let cap = self.cap - 1;
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=cap {
            for j in 0..=(cap - i) {
                let b = match which {
                    DividedBy::T => binomial_in(&self.ring, i + j + 1, i + 1),
                    DividedBy::U => binomial_in(&self.ring, i + j + 1, j + 1),
                };
                out.set(i, j, self.coeffs[i + j + 1].mul(&b));
            }
        }
        out
    }
}

/// Which variable a divided difference divides by.
///
/// `T` is `(q(t+u) - q(u))/t`; `U` is `(q(t+u) - q(t))/u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DividedBy {
    T,
    U,
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let rendered = c.to_string();
            let (sign, magnitude) = match rendered.strip_prefix('-') {
                Some(rest) => ("-", rest.to_string()),
                None => ("+", rendered),
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let var = match k {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{k}"),
            };
            if var.is_empty() {
                write!(f, "{magnitude}")?;
            } else if magnitude == "1" {
                write!(f, "{var}")?;
            } else {
                write!(f, "{magnitude}*{var}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A bivariate series in `t, u` truncated at total degree `cap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiTruncSeries {
    ring: RingSpec,
    cap: usize,
    /// `rows[i][j]` is the coefficient of `t^i u^j`; row `i` has `cap+1-i`
    /// entries, so entries with `i + j > cap` do not exist.
    rows: Vec<Vec<Scalar>>,
}

impl BiTruncSeries {
    pub fn zero(ring: &RingSpec, cap: usize) -> Self {
        let rows = (0..=cap).map(|i| vec![ring.zero(); cap + 1 - i]).collect();
        BiTruncSeries {
            ring: ring.clone(),
            cap,
            rows,
        }
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn coeff(&self, i: usize, j: usize) -> &Scalar {
        assert!(i + j <= self.cap, "({i},{j}) beyond cap {}", self.cap);
        &self.rows[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        assert!(i + j <= self.cap, "({i},{j}) beyond cap {}", self.cap);
        assert!(value.ring() == self.ring, "coefficient ring mismatch");
        self.rows[i][j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(Scalar::is_zero))
    }

    fn check_compatible(&self, other: &BiTruncSeries, op: &str) {
        assert!(self.ring == other.ring, "bivariate ring mismatch in {op}");
        assert!(
            self.cap == other.cap,
            "bivariate cap mismatch in {op}: {} vs {}",
            self.cap,
            other.cap
        );
    }

    pub fn add(&self, other: &BiTruncSeries) -> BiTruncSeries {
        self.check_compatible(other, "add");
        let mut out = self.clone();
        for i in 0..=self.cap {
            for j in 0..=(self.cap - i) {
                out.rows[i][j] = out.rows[i][j].add(&other.rows[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, other: &BiTruncSeries) -> BiTruncSeries {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BiTruncSeries {
        let mut out = self.clone();
        for row in &mut out.rows {
            for c in row.iter_mut() {
                *c = c.neg();
            }
        }
        out
    }

    pub fn scalar_mul(&self, c: &Scalar) -> BiTruncSeries {
        assert!(c.ring() == self.ring, "scalar ring mismatch");
        let mut out = self.clone();
        for row in &mut out.rows {
            for v in row.iter_mut() {
                *v = v.mul(c);
            }
        }
        out
    }

    pub fn mul(&self, other: &BiTruncSeries) -> BiTruncSeries {
        self.check_compatible(other, "mul");
        let mut out = BiTruncSeries::zero(&self.ring, self.cap);
        for i1 in 0..=self.cap {
            for j1 in 0..=(self.cap - i1) {
                if self.rows[i1][j1].is_zero() {
                    continue;
                }
                for i2 in 0..=(self.cap - i1 - j1) {
                    for j2 in 0..=(self.cap - i1 - j1 - i2) {
                        if other.rows[i2][j2].is_zero() {
                            continue;
                        }
                        let prod = self.rows[i1][j1].mul(&other.rows[i2][j2]);
                        out.rows[i1 + i2][j1 + j2] = out.rows[i1 + i2][j1 + j2].add(&prod);
                    }
                }
            }
        }
        out
    }

    pub fn truncate(&self, cap: usize) -> BiTruncSeries {
        assert!(cap <= self.cap, "truncate cannot extend a series");
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=cap {
            for j in 0..=(cap - i) {
                out.rows[i][j] = self.rows[i][j].clone();
            }
        }
        out
    }

    /// Exact division by `u`: requires every `(i, 0)` entry to vanish.
    /// The result is known one cap less.
    pub fn div_exact_u(&self) -> BiTruncSeries {
        assert!(self.cap >= 1);
        for i in 0..=self.cap {
            assert!(
                self.rows[i][0].is_zero(),
                "division by u is not exact: t^{i} term present"
            );
        }
        let cap = self.cap - 1;
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=cap {
            for j in 0..=(cap - i) {
                out.rows[i][j] = self.rows[i][j + 1].clone();
            }
        }
        out
    }

    /// Exact division by `t`.
    pub fn div_exact_t(&self) -> BiTruncSeries {
        assert!(self.cap >= 1);
        for j in 0..=self.cap {
            assert!(
                self.rows[0][j].is_zero(),
                "division by t is not exact: u^{j} term present"
            );
        }
        let cap = self.cap - 1;
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=cap {
            for j in 0..=(cap - i) {
                out.rows[i][j] = self.rows[i + 1][j].clone();
            }
        }
        out
    }

    /// Multiply by the monomial `t^a u^b`, raising the cap accordingly.
    pub fn mul_monomial(&self, a: usize, b: usize) -> BiTruncSeries {
        let cap = self.cap + a + b;
        let mut out = BiTruncSeries::zero(&self.ring, cap);
        for i in 0..=self.cap {
            for j in 0..=(self.cap - i) {
                out.rows[i + a][j + b] = self.rows[i][j].clone();
            }
        }
        out
    }

    /// The restriction `u -> 0`: the univariate series `f(t, 0)`.
    pub fn at_u_zero(&self) -> TruncSeries {
        let mut out = TruncSeries::zero(&self.ring, self.cap);
        for i in 0..=self.cap {
            out.set_coeff(i, self.rows[i][0].clone());
        }
        out
    }

    /// The restriction `t -> 0`: the univariate series `f(0, u)`.
    pub fn at_t_zero(&self) -> TruncSeries {
        let mut out = TruncSeries::zero(&self.ring, self.cap);
        for j in 0..=self.cap {
            out.set_coeff(j, self.rows[0][j].clone());
        }
        out
    }
}

impl fmt::Display for BiTruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for d in 0..=self.cap {
            for i in (0..=d).rev() {
                let j = d - i;
                let c = &self.rows[i][j];
                if c.is_zero() {
                    continue;
                }
                let rendered = c.to_string();
                let (sign, magnitude) = match rendered.strip_prefix('-') {
                    Some(rest) => ("-", rest.to_string()),
                    None => ("+", rendered),
                };
                if first {
                    if sign == "-" {
                        write!(f, "-")?;
                    }
                    first = false;
                } else {
                    write!(f, " {sign} ")?;
                }
                let mut var = String::new();
                if i == 1 {
                    var.push('t');
                } else if i > 1 {
                    var.push_str(&format!("t^{i}"));
                }
                if j >= 1 {
                    if !var.is_empty() {
                        var.push('*');
                    }
                    if j == 1 {
                        var.push('u');
                    } else {
                        var.push_str(&format!("u^{j}"));
                    }
                }
                if var.is_empty() {
                    write!(f, "{magnitude}")?;
                } else if magnitude == "1" {
                    write!(f, "{var}")?;
                } else {
                    write!(f, "{magnitude}*{var}")?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// An element of `(1/t)·K + K[[t]]`: a simple pole plus a regular part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSlot {
    /// Coefficient of `t^{-1}`.
    pub principal: Scalar,
    /// The regular power-series part.
    pub regular: TruncSeries,
}

impl LaurentSlot {
    pub fn new(principal: Scalar, regular: TruncSeries) -> Self {
        assert!(principal.ring() == *regular.ring(), "slot ring mismatch");
        LaurentSlot { principal, regular }
    }

    /// The slot `phi(t)/t` for a power series `phi`: principal part `phi(0)`,
    /// regular part `(phi - phi(0))/t` (known one cap less).
    pub fn from_series_over_t(phi: &TruncSeries) -> Self {
        assert!(phi.cap() >= 1, "need cap ≥ 1 to shift down");
        let mut regular = TruncSeries::zero(phi.ring(), phi.cap() - 1);
        for k in 1..=phi.cap() {
            regular.set_coeff(k - 1, phi.coeff(k).clone());
        }
        LaurentSlot {
            principal: phi.coeff(0).clone(),
            regular,
        }
    }

    /// `t·p(t)` as a polynomial-like series: degree-0 term is the principal
    /// part, degree k+1 is regular coefficient k.
    fn numerator(&self) -> TruncSeries {
        let cap = self.regular.cap() + 1;
        let mut out = TruncSeries::zero(self.regular.ring(), cap);
        out.set_coeff(0, self.principal.clone());
        for k in 0..=self.regular.cap() {
            out.set_coeff(k + 1, self.regular.coeff(k).clone());
        }
        out
    }
}

/// Binomial coefficient as a ring element.
fn binomial_in(ring: &RingSpec, n: usize, k: usize) -> Scalar {
    ring.from_bigint(&binomial_big(n, k))
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bernoulli numbers `b_0..=b_n` over ℚ, via exact inversion of the series
/// `(e^z - 1)/z = Σ z^k/(k+1)!`. The generating identity is
/// `Σ b_k z^k / k! = z/(e^z - 1)`.
pub fn bernoulli_numbers(n: usize) -> Vec<Scalar> {
    let ring = RingSpec::Rationals;
    let mut g = TruncSeries::zero(&ring, n);
    let mut fact = BigInt::from(1);
    for k in 0..=n {
        fact *= BigInt::from((k + 1) as u64);
        // (k+1)! after the update; coefficient of z^k is 1/(k+1)!
        g.set_coeff(
            k,
            ring.from_bigint(&fact)
                .inv()
                .expect("factorial invertible over Q"),
        );
    }
    let inv = g.invert().expect("constant term 1");
    let mut out = Vec::with_capacity(n + 1);
    let mut fact = BigInt::from(1);
    for k in 0..=n {
        if k > 0 {
            fact *= BigInt::from(k as u64);
        }
        out.push(inv.coeff(k).mul(&ring.from_bigint(&fact)));
    }
    out
}

/// Checks that every integer in `2..=bound` is invertible, reporting the
/// first blocking one.
fn require_integers_invertible(ring: &RingSpec, bound: usize) -> Result<()> {
    for k in 2..=bound {
        if !ring.invertible(k as i64) {
            return Err(Error::not_invertible_int(ring, k as i64));
        }
    }
    Ok(())
}

/// The series `phi_c(t) = t/(e^{t/c} - 1)`, truncated at `cap`.
///
/// Computed inside the ring: `phi_c` is the inverse of
/// `g(t) = Σ t^k / ((k+1)!·c^{k+1})`, so the construction needs `c` and every
/// integer `2..=cap+1` to be invertible. The coefficient of `t^k` equals
/// `b_k/(k!·c^{k-1})`.
pub fn phi_c(c: &Scalar, cap: usize) -> Result<TruncSeries> {
    let ring = c.ring();
    let c_inv = c.inv()?;
    require_integers_invertible(&ring, cap + 1)?;
    let mut g = TruncSeries::zero(&ring, cap);
    let mut fact_inv = ring.one();
    let mut c_pow_inv = c_inv.clone();
    for k in 0..=cap {
        // fact_inv = 1/(k+1)! ; c_pow_inv = 1/c^{k+1}
        fact_inv = fact_inv.mul(&ring.from_integer((k + 1) as i64).inv()?);
        g.set_coeff(k, fact_inv.mul(&c_pow_inv));
        c_pow_inv = c_pow_inv.mul(&c_inv);
    }
    g.invert()
}

/// The series `phi_0(t) = -t`.
pub fn phi_zero(ring: &RingSpec, cap: usize) -> TruncSeries {
    TruncSeries::t(ring, cap).neg()
}

/// The even series `theta_c(t) = sqrt(c)·t·coth(sqrt(c)·t)`, square-root
/// free: it is the unique solution of the second-order relation
/// `-t²·θ''/2 = t·θ'·(θ-1) - θ·(θ-1)` with `θ(0) = 1`, `θ'(0) = 0` and
/// `θ''(0) = 2c/3`, which yields the coefficient recurrence
/// `θ_m = -2·Σ_{p=1}^{m-1} (p-1)·θ_p·θ_{m-p} / ((m-2)(m+1))` for `m ≥ 3`.
pub fn theta_c(c: &Scalar, cap: usize) -> Result<TruncSeries> {
    let ring = c.ring();
    let mut out = TruncSeries::zero(&ring, cap);
    out.set_coeff(0, ring.one());
    if cap >= 2 {
        let third = ring.from_integer(3).inv()?;
        out.set_coeff(2, c.mul(&third));
    }
    for m in 3..=cap {
        let mut acc = ring.zero();
        for p in 1..m {
            let w = ring.from_integer(p as i64 - 1);
            acc = acc.add(&w.mul(&out.coeff(p).mul(out.coeff(m - p))));
        }
        let denom = ((m - 2) * (m + 1)) as i64;
        let denom_inv = ring
            .from_integer(denom)
            .inv()
            .map_err(|_| Error::NotInvertible {
                ring: ring.clone(),
                value: denom.to_string(),
            })?;
        let value = acc.mul(&ring.from_integer(-2)).mul(&denom_inv);
        out.set_coeff(m, value);
    }
    Ok(out)
}

/// Left-hand side minus right-hand side of the two-series equation
///
/// `phi(t)·(psi(t+u)-psi(u))/t + (phi(t+u)-phi(t))/u·psi(u) = rho(t+u)`,
///
/// truncated one cap below the inputs. The triple solves the equation to
/// that order iff the defect is zero.
pub fn defect_general(phi: &TruncSeries, psi: &TruncSeries, rho: &TruncSeries) -> BiTruncSeries {
    assert!(phi.cap() >= 1, "defect needs cap ≥ 1");
    let cap = phi.cap() - 1;
    let term1 = phi
        .as_bivariate_t(cap)
        .mul(&psi.divided_difference(DividedBy::T));
    let term2 = phi
        .divided_difference(DividedBy::U)
        .mul(&psi.as_bivariate_u(cap));
    let shifted_rho = rho.compose_shift().truncate(cap);
    term1.add(&term2).sub(&shifted_rho)
}

/// Defect of the one-series equation satisfied exactly by the
/// representation-inducing series: with
/// `omega := -(phi(t+u)-phi(t))/u·phi(u) - phi(t)·(phi(t+u)-phi(u))/t - phi(t+u)`,
/// the series induces a representation iff `omega = 0`. The constant term of
/// the defect is `-2·c_0·c_1 - c_0`.
pub fn defect_rep(phi: &TruncSeries) -> BiTruncSeries {
    defect_general(phi, phi, &phi.neg()).neg()
}

/// Coefficient-by-coefficient solution of the one-series equation with
/// prescribed invertible constant term `c0`.
///
/// At each total degree `p` the `(p, 0)` coefficient of the defect is
/// `c0·(p+2)·c_{p+1} + (lower terms)`, so solving degree `p` requires `p+2`
/// to be invertible; the first blocking integer is reported. When it
/// succeeds the result equals `phi_c(c0, cap)`.
pub fn solve_rep(c0: &Scalar, cap: usize) -> Result<TruncSeries> {
    let ring = c0.ring();
    let c0_inv = c0.inv()?;
    let mut phi = TruncSeries::zero(&ring, cap);
    phi.set_coeff(0, c0.clone());
    for p in 0..cap {
        // The unknown c_{p+1} is still zero here, so the (p,0) coefficient of
        // the defect is exactly the lower-order contribution L.
        let defect = defect_rep(&phi.truncate(p + 1));
        let lower = defect.coeff(p, 0).clone();
        let factor = ring.from_integer((p + 2) as i64);
        let factor_inv = factor
            .inv()
            .map_err(|_| Error::not_invertible_int(&ring, (p + 2) as i64))?;
        // defect_rep carries the sign convention with constant term
        // -2 c0 c1 - c0, in which the unknown appears as -c0 (p+2) c_{p+1}.
        let value = lower.mul(&factor_inv).mul(&c0_inv);
        phi.set_coeff(p + 1, value);
    }
    debug_assert!(defect_rep(&phi).is_zero(), "solver left a nonzero defect");
    Ok(phi)
}

/// The exponential reduction `f(t) = (phi(t) + t)/phi(t) = 1 + t/phi(t)`.
/// Requires `phi(0)` invertible. When `phi` solves the one-series equation,
/// `f` satisfies `f(t)·f(u) = f(t+u)`.
pub fn exp_reduction(phi: &TruncSeries) -> Result<TruncSeries> {
    let inv = phi.invert()?;
    let mut shifted = TruncSeries::zero(phi.ring(), phi.cap());
    for k in 1..=phi.cap() {
        shifted.set_coeff(k, inv.coeff(k - 1).clone());
    }
    let mut one = TruncSeries::zero(phi.ring(), phi.cap());
    one.set_coeff(0, phi.ring().one());
    Ok(one.add(&shifted))
}

/// Bivariate defect of the multiplicativity law `f(t)·f(u) = f(t+u)`.
pub fn exp_law_defect(f: &TruncSeries) -> BiTruncSeries {
    let cap = f.cap();
    f.as_bivariate_t(cap)
        .mul(&f.as_bivariate_u(cap))
        .sub(&f.compose_shift())
}

/// Pole-cleared defect of the divided-difference equation
///
/// `q'(u)·{p(t+u) - p(t)} = p'(t)·{q(t+u) - q(u)}`
///
/// for slots `p, q ∈ (1/t)·K + K[[t]]`. The raw defect lives in the
/// localization at `t`, `u` and `t+u`; multiplying through by `t·u·(t+u)`
/// clears every pole, and with `P = t·p` and `Q = u·q` the cleared defect is
///
/// `C = (u·Q'(u) - Q(u))·M_p - (t·P'(t) - P(t))·M_q`,
///
/// where `M_p = (t·P(t+u) - (t+u)·P(t))/u` and
/// `M_q = (u·Q(t+u) - (t+u)·Q(u))/t` (both divisions exact). `C` vanishes
/// iff the equation holds to the computed order. With regular parts of cap D
/// the result is exact to total degree D+1.
pub fn impl_defect(p: &LaurentSlot, q: &LaurentSlot) -> BiTruncSeries {
    assert!(
        p.regular.ring() == q.regular.ring() && p.regular.cap() == q.regular.cap(),
        "slots must share ring and cap"
    );
    let ring = p.regular.ring().clone();
    let cap = p.regular.cap() + 1; // degree of the numerator polynomials
    let big_p = p.numerator();
    let big_q = q.numerator();

    // M_p = (t·P(t+u) - (t+u)·P(t))/u, exact to total degree cap.
    let m_p = {
        let shifted = big_p.compose_shift().mul_monomial(1, 0); // t·P(t+u), cap+1
        let t_plus_u = {
            let in_t = big_p.as_bivariate_t(cap).mul_monomial(1, 0);
            let in_u = big_p.as_bivariate_t(cap).mul_monomial(0, 1);
            in_t.add(&in_u)
        };
        shifted.sub(&t_plus_u).div_exact_u()
    };
    // M_q = (u·Q(t+u) - (t+u)·Q(u))/t.
    let m_q = {
        let shifted = big_q.compose_shift().mul_monomial(0, 1); // u·Q(t+u)
        let t_plus_u = {
            let in_t = big_q.as_bivariate_u(cap).mul_monomial(1, 0);
            let in_u = big_q.as_bivariate_u(cap).mul_monomial(0, 1);
            in_t.add(&in_u)
        };
        shifted.sub(&t_plus_u).div_exact_t()
    };

    // u·Q'(u) - Q(u) has u^k coefficient (k-1)·Q_k; likewise for P in t.
    let mut uq = BiTruncSeries::zero(&ring, cap);
    let mut tp = BiTruncSeries::zero(&ring, cap);
    for k in 0..=cap {
        let w = ring.from_integer(k as i64 - 1);
        uq.set(0, k, big_q.coeff(k).mul(&w));
        tp.set(k, 0, big_p.coeff(k).mul(&w));
    }

    uq.mul(&m_p).sub(&tp.mul(&m_q))
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> RingSpec {
        RingSpec::Rationals
    }

    prop_compose! {
        fn arb_series(cap: usize)
                     (coeffs in proptest::collection::vec((-20i64..20, 1i64..6), cap + 1))
                     -> TruncSeries {
            let ring = q();
            let scalars: Vec<Scalar> =
                coeffs.iter().map(|&(n, d)| ring.fraction(n, d).unwrap()).collect();
            TruncSeries::from_coeffs(&ring, cap, &scalars)
        }
    }

    proptest! {
        #[test]
        fn ring_laws(f in arb_series(6), g in arb_series(6), h in arb_series(6)) {
            prop_assert_eq!(f.add(&g), g.add(&f));
            prop_assert_eq!(f.mul(&g), g.mul(&f));
            prop_assert_eq!(f.add(&g).add(&h), f.add(&g.add(&h)));
            prop_assert_eq!(f.mul(&g).mul(&h), f.mul(&g.mul(&h)));
            prop_assert_eq!(f.mul(&g.add(&h)), f.mul(&g).add(&f.mul(&h)));
        }

        #[test]
        fn derivative_satisfies_leibniz(f in arb_series(6), g in arb_series(6)) {
            let product = f.mul(&g).derivative();
            let rule = f.derivative().mul(&g.truncate(5)).add(&f.truncate(5).mul(&g.derivative()));
            prop_assert_eq!(product, rule);
        }

        #[test]
        fn inversion_is_two_sided(f in arb_series(6)) {
            prop_assume!(!f.coeff(0).is_zero());
            let inv = f.invert().unwrap();
            let mut one = TruncSeries::zero(&q(), 6);
            one.set_coeff(0, q().one());
            prop_assert_eq!(f.mul(&inv), one);
        }

        #[test]
        fn shift_is_a_ring_morphism(f in arb_series(5), g in arb_series(5)) {
            prop_assert_eq!(
                f.add(&g).compose_shift(),
                f.compose_shift().add(&g.compose_shift())
            );
            prop_assert_eq!(
                f.mul(&g).compose_shift(),
                f.compose_shift().mul(&g.compose_shift())
            );
        }

        #[test]
        fn divided_difference_recovers_numerator(f in arb_series(6)) {
            // t·(q(t+u) - q(u))/t == q(t+u) - q(u), both at cap 5
            let dd = f.divided_difference(DividedBy::T);
            let lhs = dd.mul_monomial(1, 0).truncate(5);
            let rhs = f
                .compose_shift()
                .sub(&f.as_bivariate_u(f.cap()))
                .truncate(5);
            prop_assert_eq!(lhs, rhs);
            // and the u-variant
            let dd = f.divided_difference(DividedBy::U);
            let lhs = dd.mul_monomial(0, 1).truncate(5);
            let rhs = f
                .compose_shift()
                .sub(&f.as_bivariate_t(f.cap()))
                .truncate(5);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn general_defect_is_linear_in_rho(
            phi in arb_series(5),
            psi in arb_series(5),
            r1 in arb_series(5),
            r2 in arb_series(5),
        ) {
            let d1 = defect_general(&phi, &psi, &r1);
            let d2 = defect_general(&phi, &psi, &r2);
            let sum = defect_general(&phi, &psi, &r1.add(&r2));
            let zero = defect_general(&phi, &psi, &TruncSeries::zero(&q(), 5));
            prop_assert_eq!(sum.add(&zero), d1.add(&d2));
        }
    }
}
