//! Exact-arithmetic kernel for representations of Lie superalgebras on their
//! symmetric algebras.
//!
//! The crate is organised around five layers:
//!
//! - [`coeff`]: exact scalars over ℚ, ℤ and ℤ/nℤ, with invertibility queries.
//! - [`series`]: truncated formal power series in one and two variables,
//!   Bernoulli numbers, the canonical solutions `phi_c` / `theta_c`, and the
//!   defects of the functional equations they satisfy.
//! - [`superlie`]: finite-rank Lie superalgebras given by structure constants,
//!   axiom validation, Koszul signs, and free nilpotent algebras on a Lyndon
//!   word basis.
//! - [`symcoalg`]: the symmetric coalgebra S(𝔤) with its coproduct, counit,
//!   antipode and convolution, generic-point vector fields, bracket pairings,
//!   and the coderivations they generate.
//! - [`envelope`]: the enveloping algebra U(𝔤) in normal form, its coproduct,
//!   the symbol map σ, the symmetrization β = σ⁻¹, and the regular-action
//!   conjugation identities.
//!
//! Everything is exact: there is no floating point anywhere in the crate.

pub mod coeff;
pub mod envelope;
pub mod expr;
pub mod lyndon;
pub mod rng;
pub mod series;
pub mod superlie;
pub mod symcoalg;

use thiserror::Error;

use crate::coeff::RingSpec;

/// Errors surfaced by fallible kernel operations.
///
/// Structural misuse (mixing rings or truncation caps in arithmetic) panics
/// instead: those are programming errors, not data-dependent conditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A required multiplicative inverse does not exist in the ring.
    /// `value` names the blocking element, normally an integer.
    #[error("{value} is not invertible in {ring}")]
    NotInvertible { ring: RingSpec, value: String },

    /// A vector field was evaluated on a monomial whose degree exceeds the
    /// truncation cap of its generating series, and the corresponding
    /// adjoint-operator sums do not vanish.
    #[error("degree {degree} exceeds series cap {cap} and the algebra is not nilpotent enough")]
    DegreeBeyondCap { degree: usize, cap: usize },

    /// Requested construction is outside the supported fragment.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A textual expression or file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn not_invertible_int(ring: &RingSpec, n: i64) -> Self {
        Error::NotInvertible {
            ring: ring.clone(),
            value: n.to_string(),
        }
    }

    /// The blocking integer for `NotInvertible` errors raised on integers,
    /// if that is what this error carries.
    pub fn blocking_integer(&self) -> Option<i64> {
        match self {
            Error::NotInvertible { value, .. } => value.parse().ok(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// One failed identity instance inside a [`CheckReport`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckFailure {
    /// What was being evaluated (a monomial, a basis pair, ...).
    pub witness: String,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of verifying an identity over a family of inputs: empty iff the
/// identity held everywhere it was evaluated.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct CheckReport {
    pub checked: usize,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn record(&mut self, witness: String, lhs: String, rhs: String, equal: bool) {
        self.checked += 1;
        if !equal {
            self.failures.push(CheckFailure { witness, lhs, rhs });
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failures.extend(other.failures);
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed() {
            write!(f, "pass ({} cases)", self.checked)
        } else {
            writeln!(
                f,
                "FAIL ({} of {} cases):",
                self.failures.len(),
                self.checked
            )?;
            for fail in &self.failures {
                writeln!(f, "  at {}: {} != {}", fail.witness, fail.lhs, fail.rhs)?;
            }
            Ok(())
        }
    }
}
