//! The universal enveloping algebra U(𝔤) in normal form, the symbol map σ
//! and the symmetrization β = σ⁻¹.
//!
//! Elements are combinations of nondecreasing words in the basis (odd
//! indices at most once); multiplication concatenates and straightens with
//! the defining relation `x_j·x_i = (-1)^{p_i p_j} x_i·x_j + [x_j, x_i]` and,
//! for odd repeats, `e·e = ½[e,e]`. The odd-square rewrite needs ½ in the
//! ring: without it the normal-form words do not span U(𝔤) (the associated
//! graded fails to be commutative) and multiplication refuses with
//! `NotInvertible(2)` rather than miscompute.
//!
//! The symbol map is `σ(j(a₁)···j(aₙ)) = Φ^{a₁} ∘ ... ∘ Φ^{aₙ}(1)` for the
//! coderivations of a representation-inducing series with constant term 1;
//! since `σ(word) = (word as monomial) + lower degree`, β is computed by
//! triangular back-substitution, which works in every ring covered by the
//! nilpotency/invertibility hypothesis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::coeff::{RingSpec, Scalar};
use crate::series::{defect_rep, phi_c, phi_zero, TruncSeries};
use crate::superlie::{LieElement, LieMorphism, SuperLieAlgebra};
use crate::symcoalg::{coproduct_monomial, monomials_up_to, Coderivation, SymElement, SymMonomial};
use crate::{CheckReport, Error, Result};

/// A normal-form word of U(𝔤): nondecreasing basis indices, odd indices at
/// most once.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EnvMonomial(Vec<usize>);

impl EnvMonomial {
    pub fn one() -> EnvMonomial {
        EnvMonomial(Vec::new())
    }

    pub fn word(indices: Vec<usize>) -> EnvMonomial {
        EnvMonomial(indices)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn parity(&self, algebra: &SuperLieAlgebra) -> u8 {
        self.0.iter().map(|&i| algebra.parity_of(i)).sum::<u8>() & 1
    }

    fn is_normal(&self, algebra: &SuperLieAlgebra) -> bool {
        self.0
            .windows(2)
            .all(|w| w[0] < w[1] || (w[0] == w[1] && algebra.parity_of(w[0]) == 0))
    }

    pub fn label(&self, algebra: &SuperLieAlgebra) -> String {
        if self.0.is_empty() {
            "1".to_string()
        } else {
            self.0
                .iter()
                .map(|&i| format!("j({})", algebra.label(i)))
                .collect::<Vec<_>>()
                .join("*")
        }
    }
}

impl PartialOrd for EnvMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EnvMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// An element of U(𝔤): a combination of normal-form words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvElement {
    algebra: Arc<SuperLieAlgebra>,
    terms: BTreeMap<EnvMonomial, Scalar>,
}

impl EnvElement {
    pub fn zero(algebra: &Arc<SuperLieAlgebra>) -> EnvElement {
        EnvElement {
            algebra: algebra.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(algebra: &Arc<SuperLieAlgebra>) -> EnvElement {
        EnvElement::from_scalar(algebra, algebra.ring().one())
    }

    pub fn from_scalar(algebra: &Arc<SuperLieAlgebra>, c: Scalar) -> EnvElement {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(EnvMonomial::one(), c);
        }
        EnvElement {
            algebra: algebra.clone(),
            terms,
        }
    }

    pub fn monomial(algebra: &Arc<SuperLieAlgebra>, m: EnvMonomial) -> EnvElement {
        assert!(m.is_normal(algebra), "word is not in normal form");
        let mut terms = BTreeMap::new();
        terms.insert(m, algebra.ring().one());
        EnvElement {
            algebra: algebra.clone(),
            terms,
        }
    }

    /// The canonical map `j: 𝔤 → U(𝔤)`.
    pub fn from_lie(a: &LieElement) -> EnvElement {
        let algebra = a.algebra().clone();
        let terms = a
            .coords()
            .iter()
            .map(|(i, c)| (EnvMonomial(vec![*i]), c.clone()))
            .collect();
        EnvElement { algebra, terms }
    }

    pub fn algebra(&self) -> &Arc<SuperLieAlgebra> {
        &self.algebra
    }

    pub fn terms(&self) -> impl Iterator<Item = (&EnvMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &EnvMonomial) -> Scalar {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.algebra.ring().zero())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The filtration degree: the maximal word length.
    pub fn filtration_degree(&self) -> Option<usize> {
        self.terms.keys().map(EnvMonomial::degree).max()
    }

    fn add_term(&mut self, m: EnvMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let ring = self.algebra.ring().clone();
        let entry = self.terms.entry(m).or_insert_with(|| ring.zero());
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &EnvElement) -> EnvElement {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &EnvElement) -> EnvElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> EnvElement {
        EnvElement {
            algebra: self.algebra.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scalar_mul(&self, c: &Scalar) -> EnvElement {
        let mut out = EnvElement::zero(&self.algebra);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.mul(c));
        }
        out
    }

    /// Product in U(𝔤): concatenate and straighten into normal form.
    pub fn mul(&self, other: &EnvElement) -> Result<EnvElement> {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra,
            "algebra mismatch in env mul"
        );
        let mut out = EnvElement::zero(&self.algebra);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut word = m1.0.clone();
                word.extend_from_slice(&m2.0);
                straighten_into(&self.algebra, word, c1.mul(c2), &mut out)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: usize) -> Result<EnvElement> {
        let mut acc = EnvElement::one(&self.algebra);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}

/// Rewrites an arbitrary word into normal form, accumulating into `out`.
///
/// Each step either fixes one adjacent inversion (strictly fewer inversions,
/// same length) or shortens the word, so the rewriting terminates.
fn straighten_into(
    algebra: &Arc<SuperLieAlgebra>,
    word: Vec<usize>,
    coeff: Scalar,
    out: &mut EnvElement,
) -> Result<()> {
    let ring = algebra.ring().clone();
    let mut stack: Vec<(Vec<usize>, Scalar)> = vec![(word, coeff)];
    while let Some((w, c)) = stack.pop() {
        if c.is_zero() {
            continue;
        }
        let violation = w
            .windows(2)
            .position(|p| p[0] > p[1] || (p[0] == p[1] && algebra.parity_of(p[0]) == 1));
        let Some(k) = violation else {
            out.add_term(EnvMonomial(w), c);
            continue;
        };
        let (a, b) = (w[k], w[k + 1]);
        if a == b {
            // odd square: e·e = ½[e,e]
            let half = ring
                .from_integer(2)
                .inv()
                .map_err(|_| Error::not_invertible_int(&ring, 2))?;
            let bracket = algebra.basis_bracket(a, a);
            for (idx, v) in bracket.coords() {
                let mut nw = w[..k].to_vec();
                nw.push(*idx);
                nw.extend_from_slice(&w[k + 2..]);
                stack.push((nw, c.mul(v).mul(&half)));
            }
        } else {
            // x_a·x_b = (-1)^{p_a p_b} x_b·x_a + [x_a, x_b] with a > b
            let mut swapped = w.clone();
            swapped.swap(k, k + 1);
            let sign_c = if algebra.parity_of(a) & algebra.parity_of(b) == 1 {
                c.neg()
            } else {
                c.clone()
            };
            stack.push((swapped, sign_c));
            let bracket = algebra.basis_bracket(a, b);
            for (idx, v) in bracket.coords() {
                let mut nw = w[..k].to_vec();
                nw.push(*idx);
                nw.extend_from_slice(&w[k + 2..]);
                stack.push((nw, c.mul(v)));
            }
        }
    }
    Ok(())
}

impl fmt::Display for EnvElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
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
            let label = m.label(&self.algebra);
            if m.degree() == 0 {
                write!(f, "{magnitude}")?;
            } else if magnitude == "1" {
                write!(f, "{label}")?;
            } else {
                write!(f, "{magnitude}*{label}")?;
            }
        }
        Ok(())
    }
}

/// A finite combination of simple tensors in U(𝔤) ⊗ U(𝔤).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvTensor {
    algebra: Arc<SuperLieAlgebra>,
    terms: BTreeMap<(EnvMonomial, EnvMonomial), Scalar>,
}

impl EnvTensor {
    pub fn zero(algebra: &Arc<SuperLieAlgebra>) -> EnvTensor {
        EnvTensor {
            algebra: algebra.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn unit(algebra: &Arc<SuperLieAlgebra>) -> EnvTensor {
        let mut t = EnvTensor::zero(algebra);
        t.add_term(EnvMonomial::one(), EnvMonomial::one(), algebra.ring().one());
        t
    }

    pub fn add_term(&mut self, left: EnvMonomial, right: EnvMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let ring = self.algebra.ring().clone();
        let entry = self
            .terms
            .entry((left, right))
            .or_insert_with(|| ring.zero());
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(EnvMonomial, EnvMonomial), &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, left: &EnvMonomial, right: &EnvMonomial) -> Scalar {
        self.terms
            .get(&(left.clone(), right.clone()))
            .cloned()
            .unwrap_or_else(|| self.algebra.ring().zero())
    }

    pub fn sub(&self, other: &EnvTensor) -> EnvTensor {
        let mut out = self.clone();
        for ((l, r), c) in &other.terms {
            out.add_term(l.clone(), r.clone(), c.neg());
        }
        out
    }

    /// Right-multiply by `j(a) ⊗ 1 + 1 ⊗ j(a)` for a basis index, with the
    /// super sign `(u₁⊗u₂)(v₁⊗v₂) = (-1)^{p(u₂)p(v₁)} u₁v₁ ⊗ u₂v₂`.
    fn extend_by_letter(&self, letter: usize) -> Result<EnvTensor> {
        let algebra = &self.algebra;
        let j = EnvElement::monomial(algebra, EnvMonomial(vec![letter]));
        let p_letter = algebra.parity_of(letter);
        let mut out = EnvTensor::zero(algebra);
        for ((l, r), c) in &self.terms {
            // (l ⊗ r)·(j ⊗ 1): sign from j moving past r
            let sign = p_letter & r.parity(algebra);
            let lj = EnvElement::monomial(algebra, l.clone()).mul(&j)?;
            for (m, v) in lj.terms() {
                let coeff = if sign == 1 { c.neg() } else { c.clone() };
                out.add_term(m.clone(), r.clone(), coeff.mul(v));
            }
            // (l ⊗ r)·(1 ⊗ j): no sign
            let rj = EnvElement::monomial(algebra, r.clone()).mul(&j)?;
            for (m, v) in rj.terms() {
                out.add_term(l.clone(), m.clone(), c.mul(v));
            }
        }
        Ok(out)
    }
}

/// The coproduct `Δ'` of U(𝔤): the algebra-morphism extension of
/// `Δ'(j(a)) = j(a) ⊗ 1 + 1 ⊗ j(a)`.
pub fn env_coproduct(u: &EnvElement) -> Result<EnvTensor> {
    let algebra = u.algebra().clone();
    let mut out = EnvTensor::zero(&algebra);
    for (word, c) in u.terms() {
        let mut acc = EnvTensor::unit(&algebra);
        for &letter in word.indices() {
            acc = acc.extend_by_letter(letter)?;
        }
        for ((l, r), v) in acc.terms() {
            out.add_term(l.clone(), r.clone(), v.mul(c));
        }
    }
    Ok(out)
}

/// Left multiplication `j(a)·u`.
pub fn left_mul(a: &LieElement, u: &EnvElement) -> Result<EnvElement> {
    EnvElement::from_lie(a).mul(u)
}

/// Signed right multiplication: `a^R(u) = (-1)^{p(a)p(u)} u·j(a)`.
pub fn right_mul(a: &LieElement, u: &EnvElement) -> Result<EnvElement> {
    let algebra = u.algebra().clone();
    let pa = a.parity().unwrap_or(0);
    let ja = EnvElement::from_lie(a);
    let mut out = EnvElement::zero(&algebra);
    for (w, c) in u.terms() {
        let term = EnvElement::monomial(&algebra, w.clone()).mul(&ja)?;
        let coeff = if pa & w.parity(&algebra) == 1 {
            c.neg()
        } else {
            c.clone()
        };
        out = out.add(&term.scalar_mul(&coeff));
    }
    Ok(out)
}

/// The inner derivation `ad j(a) = j(a)^L - j(a)^R`.
pub fn adjoint_action(a: &LieElement, u: &EnvElement) -> Result<EnvElement> {
    Ok(left_mul(a, u)?.sub(&right_mul(a, u)?))
}

/// The symbol map σ and its triangular inverse β for one algebra and one
/// representation-inducing series φ with φ(0) = 1 (default `phi_c(1, ·)`).
pub struct PbwMap {
    algebra: Arc<SuperLieAlgebra>,
    phi: TruncSeries,
    coderivs: Vec<Coderivation>,
    sigma_memo: Mutex<HashMap<EnvMonomial, SymElement>>,
    beta_memo: Mutex<HashMap<SymMonomial, EnvElement>>,
}

/// How far the enveloping-algebra machinery may be driven for an algebra:
/// over ℚ any degree works; otherwise the algebra must be N-nilpotent with
/// 2..=N invertible (and ½ present when there are odd basis elements).
/// Returns the cap for the canonical series.
pub fn admissible_series_cap(
    algebra: &Arc<SuperLieAlgebra>,
    degree_budget: usize,
) -> Result<usize> {
    let ring = algebra.ring().clone();
    if algebra.has_odd_basis() && !ring.invertible(2) {
        return Err(Error::not_invertible_int(&ring, 2));
    }
    if ring == RingSpec::Rationals {
        return Ok(degree_budget + 2);
    }
    let class = algebra.nilpotency_class(algebra.dim() + 1).ok_or_else(|| {
        Error::Unsupported(format!(
            "U(g) machinery over {ring} needs a nilpotent algebra"
        ))
    })?;
    for k in 2..=class {
        if !ring.invertible(k as i64) {
            return Err(Error::not_invertible_int(&ring, k as i64));
        }
    }
    Ok(class.saturating_sub(1))
}

impl PbwMap {
    /// Build with an explicit series; φ must have constant term 1 and zero
    /// representation defect at its cap.
    pub fn new(algebra: Arc<SuperLieAlgebra>, phi: TruncSeries) -> Result<PbwMap> {
        assert!(phi.ring() == algebra.ring(), "series ring mismatch");
        assert!(phi.coeff(0).is_one(), "symbol map needs phi(0) = 1");
        if phi.cap() >= 1 {
            assert!(
                defect_rep(&phi).is_zero(),
                "series does not induce a representation at its cap"
            );
        }
        let coderivs = (0..algebra.dim())
            .map(|i| Coderivation::generic(&phi, &algebra.basis_element(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PbwMap {
            algebra,
            phi,
            coderivs,
            sigma_memo: Mutex::new(HashMap::new()),
            beta_memo: Mutex::new(HashMap::new()),
        })
    }

    /// Build with the canonical series at an admissible cap for checks up to
    /// `degree_budget`.
    pub fn for_algebra(algebra: &Arc<SuperLieAlgebra>, degree_budget: usize) -> Result<PbwMap> {
        let cap = admissible_series_cap(algebra, degree_budget)?;
        let phi = phi_c(&algebra.ring().one(), cap)?;
        PbwMap::new(algebra.clone(), phi)
    }

    pub fn algebra(&self) -> &Arc<SuperLieAlgebra> {
        &self.algebra
    }

    pub fn phi(&self) -> &TruncSeries {
        &self.phi
    }

    /// σ on a normal-form word: `Φ^{a₁} ∘ ... ∘ Φ^{aₙ}(1)`.
    pub fn symbol_word(&self, w: &EnvMonomial) -> Result<SymElement> {
        if let Some(hit) = self.sigma_memo.lock().unwrap().get(w) {
            return Ok(hit.clone());
        }
        let mut acc = SymElement::one(&self.algebra);
        for &i in w.indices().iter().rev() {
            acc = self.coderivs[i].apply(&acc)?;
        }
        self.sigma_memo
            .lock()
            .unwrap()
            .insert(w.clone(), acc.clone());
        Ok(acc)
    }

    pub fn symbol(&self, u: &EnvElement) -> Result<SymElement> {
        let mut out = SymElement::zero(&self.algebra);
        for (w, c) in u.terms() {
            out = out.add(&self.symbol_word(w)?.scalar_mul(c));
        }
        Ok(out)
    }

    /// β on a monomial by degree-descending triangular solve:
    /// `β(m) = lift(m) - β(σ(lift(m)) - m)`.
    pub fn symmetrize_monomial(&self, m: &SymMonomial) -> Result<EnvElement> {
        if m.degree() == 0 {
            return Ok(EnvElement::one(&self.algebra));
        }
        if let Some(hit) = self.beta_memo.lock().unwrap().get(m) {
            return Ok(hit.clone());
        }
        let lift = EnvMonomial(m.indices().to_vec());
        let sigma = self.symbol_word(&lift)?;
        let remainder = sigma.sub(&SymElement::monomial(&self.algebra, m.clone()));
        assert!(
            remainder.degree().is_none_or(|d| d < m.degree()),
            "symbol map is not unitriangular at {}",
            m.label(&self.algebra)
        );
        let value = EnvElement::monomial(&self.algebra, lift).sub(&self.symmetrize(&remainder)?);
        self.beta_memo
            .lock()
            .unwrap()
            .insert(m.clone(), value.clone());
        Ok(value)
    }

    pub fn symmetrize(&self, w: &SymElement) -> Result<EnvElement> {
        let mut out = EnvElement::zero(&self.algebra);
        for (m, c) in w.terms() {
            out = out.add(&self.symmetrize_monomial(m)?.scalar_mul(c));
        }
        Ok(out)
    }
}

/// Which regular action is conjugated back to S(𝔤) by β.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionKind {
    /// `β⁻¹ ∘ ad j(a) ∘ β = Φ^a_0`
    Adjoint,
    /// `β⁻¹ ∘ j(a)^L ∘ β = Φ^a_1`
    Left,
    /// `β⁻¹ ∘ j(a)^R ∘ β = -Φ^a_{-1}`
    Right,
}

impl ActionKind {
    pub fn parse(text: &str) -> Result<ActionKind> {
        match text {
            "adjoint" => Ok(ActionKind::Adjoint),
            "left" => Ok(ActionKind::Left),
            "right" => Ok(ActionKind::Right),
            other => Err(Error::Parse(format!("unknown action kind `{other}`"))),
        }
    }
}

/// Verify the conjugation identity for `kind` on all monomials of degree
/// ≤ max_degree, with σ standing in for β⁻¹.
pub fn conjugation_check(
    pbw: &PbwMap,
    kind: ActionKind,
    a: &LieElement,
    max_degree: usize,
) -> Result<CheckReport> {
    let algebra = pbw.algebra().clone();
    let ring = algebra.ring().clone();
    let cap = pbw.phi().cap();
    let target = match kind {
        ActionKind::Adjoint => Coderivation::generic(&phi_zero(&ring, cap), a)?,
        ActionKind::Left => Coderivation::generic(pbw.phi(), a)?,
        ActionKind::Right => Coderivation::generic(&phi_c(&ring.one().neg(), cap)?.neg(), a)?,
    };
    let mut report = CheckReport::default();
    for m in monomials_up_to(&algebra, max_degree) {
        let beta = pbw.symmetrize_monomial(&m)?;
        let acted = match kind {
            ActionKind::Adjoint => adjoint_action(a, &beta)?,
            ActionKind::Left => left_mul(a, &beta)?,
            ActionKind::Right => right_mul(a, &beta)?,
        };
        let lhs = pbw.symbol(&acted)?;
        let rhs = target.apply(&SymElement::monomial(&algebra, m.clone()))?;
        report.record(
            m.label(&algebra),
            lhs.to_string(),
            rhs.to_string(),
            lhs == rhs,
        );
    }
    Ok(report)
}

/// Verify `Δ' ∘ β = (β ⊗ β) ∘ Δ` on monomials of degree ≤ max_degree.
pub fn compatibility_check(pbw: &PbwMap, max_degree: usize) -> Result<CheckReport> {
    let algebra = pbw.algebra().clone();
    let mut report = CheckReport::default();
    for m in monomials_up_to(&algebra, max_degree) {
        let lhs = env_coproduct(&pbw.symmetrize_monomial(&m)?)?;
        let mut rhs = EnvTensor::zero(&algebra);
        for ((l, r), c) in coproduct_monomial(&algebra, &m).terms() {
            let bl = pbw.symmetrize_monomial(l)?;
            let br = pbw.symmetrize_monomial(r)?;
            for (wl, cl) in bl.terms() {
                for (wr, cr) in br.terms() {
                    rhs.add_term(wl.clone(), wr.clone(), c.mul(cl).mul(cr));
                }
            }
        }
        let diff = lhs.sub(&rhs);
        report.record(
            m.label(&algebra),
            format!("{} terms", lhs.terms().count()),
            format!("{} terms", rhs.terms().count()),
            diff.is_zero(),
        );
    }
    Ok(report)
}

/// The algebra morphism U(𝔤) → U(𝔥) induced by a Lie morphism.
pub fn induced_env_morphism(f: &LieMorphism, u: &EnvElement) -> Result<EnvElement> {
    let target = f.target().clone();
    let mut out = EnvElement::zero(&target);
    for (w, c) in u.terms() {
        let mut acc = EnvElement::one(&target);
        for &i in w.indices() {
            acc = acc.mul(&EnvElement::from_lie(
                &f.apply(&f.source().basis_element(i)),
            ))?;
        }
        out = out.add(&acc.scalar_mul(c));
    }
    Ok(out)
}

/// The strong form of the normal-form theorem for β, checked to a degree:
/// (i) β respects the filtration, (ii) its graded map is the canonical one,
/// (iii) β intertwines inner derivations (via [`conjugation_check`]) and the
/// supplied automorphisms.
pub fn strong_pbw_check(
    pbw: &PbwMap,
    automorphisms: &[LieMorphism],
    max_degree: usize,
) -> Result<CheckReport> {
    let algebra = pbw.algebra().clone();
    let mut report = CheckReport::default();
    for m in monomials_up_to(&algebra, max_degree) {
        let beta = pbw.symmetrize_monomial(&m)?;
        // (i) filtration: deg β(m) ≤ deg m
        let fdeg = beta.filtration_degree().unwrap_or(0);
        report.record(
            format!("filtration at {}", m.label(&algebra)),
            fdeg.to_string(),
            format!("<= {}", m.degree()),
            fdeg <= m.degree(),
        );
        // (ii) graded part: β(m) - lift(m) lies strictly below
        let top = EnvMonomial(m.indices().to_vec());
        let rest = beta.sub(&EnvElement::monomial(&algebra, top));
        let ok = rest.filtration_degree().is_none_or(|d| d < m.degree());
        report.record(
            format!("graded part at {}", m.label(&algebra)),
            beta.to_string(),
            "lift + lower filtration".to_string(),
            ok,
        );
    }
    // (iii) inner derivations
    for i in 0..algebra.dim() {
        let a = algebra.basis_element(i);
        report.merge(conjugation_check(pbw, ActionKind::Adjoint, &a, max_degree)?);
    }
    // (iii) automorphisms: σ ∘ f̄ ∘ β = f̃
    for f in automorphisms {
        for m in monomials_up_to(&algebra, max_degree) {
            let lhs = pbw.symbol(&induced_env_morphism(f, &pbw.symmetrize_monomial(&m)?)?)?;
            let rhs = crate::symcoalg::induced_sym_morphism(
                f,
                &SymElement::monomial(&algebra, m.clone()),
            );
            report.record(
                format!("automorphism at {}", m.label(&algebra)),
                lhs.to_string(),
                rhs.to_string(),
                lhs == rhs,
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::superlie::koszul_sign;

    fn q() -> RingSpec {
        RingSpec::Rationals
    }

    fn qs(n: i64, d: i64) -> Scalar {
        q().fraction(n, d).unwrap()
    }

    #[test]
    fn straightening_examples() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let x = EnvElement::from_lie(&hei.basis_element(0));
        let y = EnvElement::from_lie(&hei.basis_element(1));
        let z = EnvElement::from_lie(&hei.basis_element(2));
        // y·x = x·y - z
        let yx = y.mul(&x).unwrap();
        let expected = x.mul(&y).unwrap().sub(&z);
        assert_eq!(yx, expected);
        // central elements commute: z·x = x·z
        assert_eq!(z.mul(&x).unwrap(), x.mul(&z).unwrap());
    }

    #[test]
    fn odd_squares_rewrite_with_half() {
        // e·e = ½[e,e] = h on the Heisenberg superalgebra ([e,e] = 2h)
        let sh = SuperLieAlgebra::super_heisenberg(q());
        let e = EnvElement::from_lie(&sh.basis_element(1));
        let h = EnvElement::from_lie(&sh.basis_element(0));
        assert_eq!(e.mul(&e).unwrap(), h);
        // over Z the rewrite refuses even when [e,e] = 0
        let odd = SuperLieAlgebra::odd_line(RingSpec::Integers);
        let e = EnvElement::from_lie(&odd.basis_element(0));
        let err = e.mul(&e).unwrap_err();
        assert_eq!(err.blocking_integer(), Some(2));
        // over Q the same square is simply zero
        let odd_q = SuperLieAlgebra::odd_line(q());
        let e = EnvElement::from_lie(&odd_q.basis_element(0));
        assert!(e.mul(&e).unwrap().is_zero());
    }

    #[test]
    fn multiplication_is_associative() {
        let algebras = [
            SuperLieAlgebra::sl2(q()),
            SuperLieAlgebra::super_heisenberg(q()),
            SuperLieAlgebra::free_nilpotent(&[("x".into(), 0), ("y".into(), 0)], 3, q()).unwrap(),
        ];
        let mut rng = SplitMix64::new(0xabcde);
        for alg in &algebras {
            for _ in 0..40 {
                let rand_word = |rng: &mut SplitMix64| {
                    let len = rng.below(4) as usize;
                    let word: Vec<usize> = (0..len)
                        .map(|_| rng.below(alg.dim() as u64) as usize)
                        .collect();
                    let mut out = EnvElement::zero(alg);
                    straighten_into(alg, word, alg.ring().one(), &mut out).unwrap();
                    out
                };
                let a = rand_word(&mut rng);
                let b = rand_word(&mut rng);
                let c = rand_word(&mut rng);
                let left = a.mul(&b).unwrap().mul(&c).unwrap();
                let right = a.mul(&b.mul(&c).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn coproduct_examples() {
        let hei = SuperLieAlgebra::heisenberg(q());
        // Δ'(1) = 1⊗1
        let one = EnvElement::one(&hei);
        let d = env_coproduct(&one).unwrap();
        assert_eq!(d, EnvTensor::unit(&hei));
        // Δ'(j(x)) = j(x)⊗1 + 1⊗j(x)
        let jx = EnvElement::from_lie(&hei.basis_element(0));
        let d = env_coproduct(&jx).unwrap();
        let wx = EnvMonomial::word(vec![0]);
        assert_eq!(d.coeff(&wx, &EnvMonomial::one()), qs(1, 1));
        assert_eq!(d.coeff(&EnvMonomial::one(), &wx), qs(1, 1));
        assert_eq!(d.terms().count(), 2);
        // Δ'(j(x)j(y)) expands to four terms
        let jy = EnvElement::from_lie(&hei.basis_element(1));
        let d = env_coproduct(&jx.mul(&jy).unwrap()).unwrap();
        let wy = EnvMonomial::word(vec![1]);
        let wxy = EnvMonomial::word(vec![0, 1]);
        assert_eq!(d.coeff(&wxy, &EnvMonomial::one()), qs(1, 1));
        assert_eq!(d.coeff(&EnvMonomial::one(), &wxy), qs(1, 1));
        assert_eq!(d.coeff(&wx, &wy), qs(1, 1));
        assert_eq!(d.coeff(&wy, &wx), qs(1, 1));
        assert_eq!(d.terms().count(), 4);
    }

    #[test]
    fn symbol_examples() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 4).unwrap();
        // σ(1) = 1; σ(j(a)) = a
        assert_eq!(
            pbw.symbol(&EnvElement::one(&hei)).unwrap(),
            SymElement::one(&hei)
        );
        let x = hei.basis_element(0);
        assert_eq!(
            pbw.symbol(&EnvElement::from_lie(&x)).unwrap(),
            SymElement::from_lie(&x)
        );
        // σ(j(x)j(y)) = x·y + ½[x,y] = x·y + ½z
        let sigma = pbw.symbol_word(&EnvMonomial::word(vec![0, 1])).unwrap();
        let xy = SymElement::from_lie(&x).mul(&SymElement::from_lie(&hei.basis_element(1)));
        let expected = xy.add(&SymElement::from_lie(&hei.basis_element(2)).scalar_mul(&qs(1, 2)));
        assert_eq!(sigma, expected);
        assert_eq!(sigma.to_string(), "1/2*z + x*y");
    }

    #[test]
    fn symmetrize_examples() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 5).unwrap();
        // β(x·y) = j(x)j(y) - ½j(z)
        let x = hei.basis_element(0);
        let y = hei.basis_element(1);
        let z = hei.basis_element(2);
        let xy = SymElement::from_lie(&x).mul(&SymElement::from_lie(&y));
        let beta = pbw.symmetrize(&xy).unwrap();
        let expected = EnvElement::from_lie(&x)
            .mul(&EnvElement::from_lie(&y))
            .unwrap()
            .sub(&EnvElement::from_lie(&z).scalar_mul(&qs(1, 2)));
        assert_eq!(beta, expected);
        // β(aⁿ) = j(a)ⁿ for even a
        let sl2 = SuperLieAlgebra::sl2(q());
        let pbw = PbwMap::for_algebra(&sl2, 6).unwrap();
        for gen in 0..sl2.dim() {
            let a = sl2.basis_element(gen);
            for n in 0..=5usize {
                let mut power = SymElement::one(&sl2);
                for _ in 0..n {
                    power = power.mul(&SymElement::from_lie(&a));
                }
                let beta = pbw.symmetrize(&power).unwrap();
                assert_eq!(
                    beta,
                    EnvElement::from_lie(&a).pow(n).unwrap(),
                    "gen {gen} n {n}"
                );
            }
        }
    }

    #[test]
    fn sigma_beta_inverse_to_degree_three() {
        let algebras = [
            SuperLieAlgebra::heisenberg(q()),
            SuperLieAlgebra::super_heisenberg(q()),
        ];
        for alg in &algebras {
            let pbw = PbwMap::for_algebra(alg, 3).unwrap();
            for m in monomials_up_to(alg, 3) {
                let w = SymElement::monomial(alg, m.clone());
                let back = pbw.symbol(&pbw.symmetrize(&w).unwrap()).unwrap();
                assert_eq!(back, w, "sigma∘beta at {}", m.label(alg));
            }
            // β∘σ = id on normal-form words
            for m in monomials_up_to(alg, 3) {
                let lift = EnvMonomial::word(m.indices().to_vec());
                let u = EnvElement::monomial(alg, lift);
                let back = pbw.symmetrize(&pbw.symbol(&u).unwrap()).unwrap();
                assert_eq!(back, u);
            }
        }
    }

    #[test]
    fn regular_action_examples() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let x = hei.basis_element(0);
        let y = hei.basis_element(1);
        let z = hei.basis_element(2);
        // adjoint(x)(j(y)) = j([x,y]) = j(z)
        let jy = EnvElement::from_lie(&y);
        assert_eq!(adjoint_action(&x, &jy).unwrap(), EnvElement::from_lie(&z));
        // left_mul(a)(1) = j(a) and right_mul(a)(1) = j(a)
        let one = EnvElement::one(&hei);
        assert_eq!(left_mul(&x, &one).unwrap(), EnvElement::from_lie(&x));
        assert_eq!(right_mul(&x, &one).unwrap(), EnvElement::from_lie(&x));
    }

    #[test]
    fn conjugation_identities_quick() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 3).unwrap();
        for gen in 0..hei.dim() {
            let a = hei.basis_element(gen);
            for kind in [ActionKind::Adjoint, ActionKind::Left, ActionKind::Right] {
                let report = conjugation_check(&pbw, kind, &a, 2).unwrap();
                assert!(report.passed(), "{kind:?} on gen {gen}: {report}");
            }
        }
    }

    #[test]
    fn coproduct_compatibility_quick() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 3).unwrap();
        let report = compatibility_check(&pbw, 2).unwrap();
        assert!(report.passed(), "{report}");
        // degree 3 on the free 3-nilpotent algebra
        let free =
            SuperLieAlgebra::free_nilpotent(&[("x".into(), 0), ("y".into(), 0)], 3, q()).unwrap();
        let pbw = PbwMap::for_algebra(&free, 3).unwrap();
        let report = compatibility_check(&pbw, 3).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn straightening_works_integrally() {
        // no division is needed on purely even algebras, so U(g) over Z works
        let hei = SuperLieAlgebra::heisenberg(RingSpec::Integers);
        let x = EnvElement::from_lie(&hei.basis_element(0));
        let y = EnvElement::from_lie(&hei.basis_element(1));
        let z = EnvElement::from_lie(&hei.basis_element(2));
        assert_eq!(y.mul(&x).unwrap(), x.mul(&y).unwrap().sub(&z));
        let long = y.mul(&y).unwrap().mul(&x).unwrap();
        let expected = x.mul(&y).unwrap().mul(&y).unwrap().sub(
            &y.mul(&z)
                .unwrap()
                .scalar_mul(&RingSpec::Integers.from_integer(2)),
        );
        assert_eq!(long, expected);
    }

    #[test]
    fn truncated_representation_in_characteristic_seven() {
        // 4-nilpotent with 2, 3, 4 invertible mod 7: the truncated series
        // drives sigma/beta to any degree
        let ring = RingSpec::Mod(7);
        let free =
            SuperLieAlgebra::free_nilpotent(&[("x".into(), 0), ("y".into(), 0)], 4, ring.clone())
                .unwrap();
        assert_eq!(free.dim(), 8);
        let pbw = PbwMap::for_algebra(&free, 3).unwrap();
        assert_eq!(pbw.phi().cap(), 3);
        for m in monomials_up_to(&free, 3) {
            let w = SymElement::monomial(&free, m.clone());
            let round = pbw.symbol(&pbw.symmetrize(&w).unwrap()).unwrap();
            assert_eq!(round, w);
        }
    }

    #[test]
    fn conjugated_representations_are_coderivations_of_u() {
        // beta ∘ Phi_c^a ∘ sigma is a coderivation of U(g):
        // Δ' ∘ F = (F⊗id + id⊗F) ∘ Δ' with the super tensor signs
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 4).unwrap();
        for c in [qs(1, 1), qs(-1, 1), qs(2, 1)] {
            let phi = phi_c(&c, pbw.phi().cap()).unwrap();
            for gen in 0..hei.dim() {
                let a = hei.basis_element(gen);
                let cd = Coderivation::generic(&phi, &a).unwrap();
                let conj = |u: &EnvElement| -> EnvElement {
                    pbw.symmetrize(&cd.apply(&pbw.symbol(u).unwrap()).unwrap())
                        .unwrap()
                };
                for m in monomials_up_to(&hei, 3) {
                    let u = EnvElement::monomial(&hei, EnvMonomial(m.indices().to_vec()));
                    let lhs = env_coproduct(&conj(&u)).unwrap();
                    let mut rhs = EnvTensor::zero(&hei);
                    for ((l, r), v) in env_coproduct(&u).unwrap().terms() {
                        let fl = conj(&EnvElement::monomial(&hei, l.clone()));
                        for (w, cw) in fl.terms() {
                            rhs.add_term(w.clone(), r.clone(), v.mul(cw));
                        }
                        // even generator here, so no sign on id⊗F
                        let fr = conj(&EnvElement::monomial(&hei, r.clone()));
                        for (w, cw) in fr.terms() {
                            rhs.add_term(l.clone(), w.clone(), v.mul(cw));
                        }
                    }
                    assert!(
                        lhs.sub(&rhs).is_zero(),
                        "c = {c}, gen {gen}, m = {}",
                        m.label(&hei)
                    );
                }
            }
        }
    }

    #[test]
    fn factorial_symmetrization_cross_check() {
        // n!·β(a₁···aₙ) = Σ_s α(s)·j(a_{s(1)})···j(a_{s(n)}) over Q, n ≤ 3
        let sh = SuperLieAlgebra::super_heisenberg(q());
        let pbw = PbwMap::for_algebra(&sh, 4).unwrap();
        for m in monomials_up_to(&sh, 3) {
            let n = m.degree();
            if n == 0 {
                continue;
            }
            let word = m.indices().to_vec();
            let parities: Vec<u8> = word.iter().map(|&i| sh.parity_of(i)).collect();
            let mut sum = EnvElement::zero(&sh);
            let mut perm: Vec<usize> = (0..n).collect();
            loop {
                let sign = koszul_sign(&parities, &perm);
                let mut prod = EnvElement::one(&sh);
                for &p in &perm {
                    prod = prod
                        .mul(&EnvElement::from_lie(&sh.basis_element(word[p])))
                        .unwrap();
                }
                sum = if sign < 0 {
                    sum.sub(&prod)
                } else {
                    sum.add(&prod)
                };
                // lexicographic successor of the permutation
                let mut i = n.wrapping_sub(1);
                loop {
                    if i == 0 {
                        i = usize::MAX;
                        break;
                    }
                    if perm[i - 1] < perm[i] {
                        i -= 1;
                        break;
                    }
                    i -= 1;
                }
                if i == usize::MAX {
                    break;
                }
                let mut j = n - 1;
                while perm[j] <= perm[i] {
                    j -= 1;
                }
                perm.swap(i, j);
                perm[i + 1..].reverse();
            }
            let mut factorial = qs(1, 1);
            for k in 1..=n {
                factorial = factorial.mul(&qs(k as i64, 1));
            }
            let beta = pbw
                .symmetrize(&SymElement::monomial(&sh, m.clone()))
                .unwrap()
                .scalar_mul(&factorial);
            assert_eq!(beta, sum, "at {}", m.label(&sh));
        }
    }

    #[test]
    fn strong_pbw_quick() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let pbw = PbwMap::for_algebra(&hei, 3).unwrap();
        // the rescaling x ↦ 2x, y ↦ 3y, z ↦ 6z is an automorphism
        let auto = LieMorphism::new(
            hei.clone(),
            hei.clone(),
            vec![
                hei.basis_element(0).scalar_mul(&qs(2, 1)),
                hei.basis_element(1).scalar_mul(&qs(3, 1)),
                hei.basis_element(2).scalar_mul(&qs(6, 1)),
            ],
        )
        .unwrap();
        let report = strong_pbw_check(&pbw, &[auto], 2).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn display_format() {
        let hei = SuperLieAlgebra::heisenberg(q());
        let u = EnvElement::from_lie(&hei.basis_element(0))
            .mul(&EnvElement::from_lie(&hei.basis_element(1)))
            .unwrap()
            .sub(&EnvElement::from_lie(&hei.basis_element(2)).scalar_mul(&qs(1, 2)));
        assert_eq!(u.to_string(), "-1/2*j(z) + j(x)*j(y)");
    }
}
