//! Finite-rank Lie superalgebras presented by basis, parity and structure
//! constants.
//!
//! An algebra is built from bracket entries for pairs `(i, j)` with `i <= j`;
//! the transposed entries are inferred from graded antisymmetry. Validation
//! checks the four axioms — graded antisymmetry, `[X,X] = 0` for even `X`,
//! the graded Jacobi identity, and `[Y,[Y,Y]] = 0` for odd `Y` — reporting a
//! witness for every violation. The square axioms are implied by the others
//! when 2 (respectively 3) is invertible and are then only checked on basis
//! elements; otherwise they are also checked on seeded random combinations.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{RingSpec, Scalar};
use crate::lyndon;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A finite free-module Lie superalgebra over an exact coefficient ring.
#[derive(Debug, PartialEq, Eq)]
pub struct SuperLieAlgebra {
    ring: RingSpec,
    labels: Vec<String>,
    parity: Vec<u8>,
    /// Complete table: `brackets[(i, j)]` holds the coordinates of
    /// `[e_i, e_j]`, for both orders of each pair. Missing entries are zero.
    brackets: HashMap<(usize, usize), Vec<(usize, Scalar)>>,
}

/// One explicit bracket entry `[e_left, e_right] = value`.
#[derive(Clone, Debug)]
pub struct BracketEntry {
    pub left: usize,
    pub right: usize,
    pub value: Vec<(usize, Scalar)>,
}

fn normalize_coords(ring: &RingSpec, coords: Vec<(usize, Scalar)>) -> Vec<(usize, Scalar)> {
    let mut map: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (k, c) in coords {
        let entry = map.entry(k).or_insert_with(|| ring.zero());
        *entry = entry.add(&c);
    }
    map.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl SuperLieAlgebra {
    /// Build an algebra from explicit entries. Entries may name any ordered
    /// pair; pairs whose transpose was not given are completed by graded
    /// antisymmetry `[e_j, e_i] = -(-1)^{p_i p_j} [e_i, e_j]`.
    pub fn new(
        ring: RingSpec,
        basis: Vec<(String, u8)>,
        entries: Vec<BracketEntry>,
    ) -> Arc<SuperLieAlgebra> {
        let labels: Vec<String> = basis.iter().map(|(l, _)| l.clone()).collect();
        let parity: Vec<u8> = basis.iter().map(|(_, p)| p & 1).collect();
        let mut brackets = HashMap::new();
        for e in &entries {
            assert!(
                e.left < labels.len() && e.right < labels.len(),
                "basis index out of range"
            );
            let value = normalize_coords(&ring, e.value.clone());
            let prev = brackets.insert((e.left, e.right), value);
            assert!(
                prev.is_none(),
                "duplicate bracket entry ({}, {})",
                e.left,
                e.right
            );
        }
        let explicit: Vec<(usize, usize)> = brackets.keys().cloned().collect();
        for (i, j) in explicit {
            if i == j || brackets.contains_key(&(j, i)) {
                continue;
            }
            let sign = if parity[i] & parity[j] == 1 { 1 } else { -1 };
            // [e_j, e_i] = -(-1)^{p_i p_j} [e_i, e_j]; for odd-odd the two
            // signs cancel and the entry is copied as is.
            let transposed: Vec<(usize, Scalar)> = brackets[&(i, j)]
                .iter()
                .map(|(k, c)| (*k, if sign == 1 { c.clone() } else { c.neg() }))
                .collect();
            brackets.insert((j, i), transposed);
        }
        brackets.retain(|_, v| !v.is_empty());
        Arc::new(SuperLieAlgebra {
            ring,
            labels,
            parity,
            brackets,
        })
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn parity_of(&self, i: usize) -> u8 {
        self.parity[i]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parity
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn has_odd_basis(&self) -> bool {
        self.parity.contains(&1)
    }

    /// Raw bracket of two basis elements.
    pub fn basis_bracket(self: &Arc<Self>, i: usize, j: usize) -> LieElement {
        let coords = self
            .brackets
            .get(&(i, j))
            .map(|v| v.to_vec())
            .unwrap_or_default();
        LieElement {
            algebra: self.clone(),
            coords,
        }
    }

    // ----- built-in algebras -----

    pub fn abelian(ring: RingSpec, n: usize) -> Arc<SuperLieAlgebra> {
        let basis = (0..n).map(|i| (format!("x{}", i + 1), 0)).collect();
        SuperLieAlgebra::new(ring, basis, vec![])
    }

    /// Heisenberg: even x, y, z with `[x, y] = z` and z central.
    pub fn heisenberg(ring: RingSpec) -> Arc<SuperLieAlgebra> {
        let one = ring.one();
        SuperLieAlgebra::new(
            ring,
            vec![("x".into(), 0), ("y".into(), 0), ("z".into(), 0)],
            vec![BracketEntry {
                left: 0,
                right: 1,
                value: vec![(2, one)],
            }],
        )
    }

    /// sl2 with basis e, f, h: `[e,f] = h`, `[h,e] = 2e`, `[h,f] = -2f`.
    pub fn sl2(ring: RingSpec) -> Arc<SuperLieAlgebra> {
        let one = ring.one();
        let two = ring.from_integer(2);
        let minus_two = ring.from_integer(-2);
        SuperLieAlgebra::new(
            ring,
            vec![("e".into(), 0), ("f".into(), 0), ("h".into(), 0)],
            vec![
                BracketEntry {
                    left: 0,
                    right: 1,
                    value: vec![(2, one)],
                },
                BracketEntry {
                    left: 0,
                    right: 2,
                    value: vec![(0, minus_two)],
                },
                BracketEntry {
                    left: 1,
                    right: 2,
                    value: vec![(1, two)],
                },
            ],
        )
    }

    /// The super example with even h and odd e, f, and the single relation
    /// `[e, f] = h` (h central, odd squares zero).
    pub fn super_hef(ring: RingSpec) -> Arc<SuperLieAlgebra> {
        let one = ring.one();
        SuperLieAlgebra::new(
            ring,
            vec![("h".into(), 0), ("e".into(), 1), ("f".into(), 1)],
            vec![BracketEntry {
                left: 1,
                right: 2,
                value: vec![(0, one)],
            }],
        )
    }

    /// Heisenberg superalgebra: even central h, odd e, f with
    /// `[e,f] = h`, `[e,e] = 2h`, `[f,f] = -2h`.
    pub fn super_heisenberg(ring: RingSpec) -> Arc<SuperLieAlgebra> {
        let one = ring.one();
        let two = ring.from_integer(2);
        let minus_two = ring.from_integer(-2);
        SuperLieAlgebra::new(
            ring,
            vec![("h".into(), 0), ("e".into(), 1), ("f".into(), 1)],
            vec![
                BracketEntry {
                    left: 1,
                    right: 2,
                    value: vec![(0, one)],
                },
                BracketEntry {
                    left: 1,
                    right: 1,
                    value: vec![(0, two)],
                },
                BracketEntry {
                    left: 2,
                    right: 2,
                    value: vec![(0, minus_two)],
                },
            ],
        )
    }

    /// A single odd generator e with `[e, e] = 0`.
    pub fn odd_line(ring: RingSpec) -> Arc<SuperLieAlgebra> {
        SuperLieAlgebra::new(ring, vec![("e".into(), 1)], vec![])
    }

    /// The free N-nilpotent Lie algebra on the given generators, with basis
    /// the standard bracketings of Lyndon words of length at most N in
    /// lexicographic order. Only even generators are supported.
    pub fn free_nilpotent(
        generators: &[(String, u8)],
        class: usize,
        ring: RingSpec,
    ) -> Result<Arc<SuperLieAlgebra>> {
        if generators.iter().any(|(_, p)| p & 1 == 1) {
            return Err(Error::Unsupported(
                "free nilpotent algebras are only built on even generators".into(),
            ));
        }
        assert!(class >= 1, "nilpotency class must be ≥ 1");
        assert!(!generators.is_empty() && generators.len() <= u8::MAX as usize);
        let g = generators.len() as u8;
        let words = lyndon::lyndon_words(g, class);
        let index: HashMap<lyndon::Word, usize> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let basis: Vec<(String, u8)> = words
            .iter()
            .map(|w| {
                let label = bracket_label(w, generators);
                (label, 0)
            })
            .collect();
        let mut entries = Vec::new();
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                let coords = lyndon::bracket_in_basis(&words[i], &words[j], class);
                if coords.is_empty() {
                    continue;
                }
                let value: Vec<(usize, Scalar)> = coords
                    .into_iter()
                    .map(|(w, c)| (index[&w], ring.from_bigint(&c)))
                    .collect();
                entries.push(BracketEntry {
                    left: i,
                    right: j,
                    value,
                });
            }
        }
        Ok(SuperLieAlgebra::new(ring, basis, entries))
    }

    // ----- elements -----

    pub fn zero_element(self: &Arc<Self>) -> LieElement {
        LieElement {
            algebra: self.clone(),
            coords: vec![],
        }
    }

    pub fn basis_element(self: &Arc<Self>, i: usize) -> LieElement {
        assert!(i < self.dim(), "basis index out of range");
        LieElement {
            algebra: self.clone(),
            coords: vec![(i, self.ring.one())],
        }
    }

    pub fn element(self: &Arc<Self>, coords: Vec<(usize, Scalar)>) -> LieElement {
        LieElement {
            algebra: self.clone(),
            coords: normalize_coords(&self.ring, coords),
        }
    }

    // ----- validation -----

    /// Check the algebra against the superalgebra axioms with the default
    /// seed for the randomized square checks.
    pub fn validate(self: &Arc<Self>) -> ValidationReport {
        self.validate_with_seed(0x517e_c0de)
    }

    pub fn validate_with_seed(self: &Arc<Self>, seed: u64) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.dim();

        // parity homogeneity of the table
        for ((i, j), value) in &self.brackets {
            let expect = (self.parity[*i] + self.parity[*j]) & 1;
            for (k, c) in value {
                if !c.is_zero() && self.parity[*k] != expect {
                    violations.push(Violation {
                        axiom: Axiom::ParityHomogeneity,
                        witness: format!(
                            "[{}, {}] has a component on {} of wrong parity",
                            self.labels[*i], self.labels[*j], self.labels[*k]
                        ),
                    });
                }
            }
        }

        // graded antisymmetry on basis pairs
        for i in 0..n {
            for j in 0..n {
                let lhs = self.basis_bracket(i, j);
                let mut rhs = self.basis_bracket(j, i).neg();
                if self.parity[i] & self.parity[j] == 1 {
                    rhs = rhs.neg();
                }
                if lhs != rhs {
                    violations.push(Violation {
                        axiom: Axiom::Antisymmetry,
                        witness: format!(
                            "[{}, {}] = {} but -(-1)^(pq)[{}, {}] = {}",
                            self.labels[i],
                            self.labels[j],
                            lhs,
                            self.labels[j],
                            self.labels[i],
                            rhs
                        ),
                    });
                }
            }
        }

        // [X, X] = 0 for even X: basis always, random even combinations when
        // 2 is not invertible (otherwise implied by antisymmetry)
        let even_indices: Vec<usize> = (0..n).filter(|&i| self.parity[i] == 0).collect();
        let mut even_square_witnesses: Vec<LieElement> = even_indices
            .iter()
            .map(|&i| self.basis_element(i))
            .collect();
        let mut rng = SplitMix64::new(seed);
        if !self.ring.invertible(2) && !even_indices.is_empty() {
            for _ in 0..100 {
                let coords = even_indices
                    .iter()
                    .map(|&i| (i, self.ring.from_integer(rng.small_int(5))))
                    .collect();
                even_square_witnesses.push(self.element(coords));
            }
        }
        for x in &even_square_witnesses {
            let sq = x.bracket(x);
            if !sq.is_zero() {
                violations.push(Violation {
                    axiom: Axiom::EvenSquare,
                    witness: format!("[X, X] = {sq} for even X = {x}"),
                });
            }
        }

        // graded Jacobi on basis triples:
        // [[X,Y],Z] = [X,[Y,Z]] - (-1)^{p(X)p(Y)} [Y,[X,Z]]
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = self.basis_element(i);
                    let y = self.basis_element(j);
                    let z = self.basis_element(k);
                    let lhs = x.bracket(&y).bracket(&z);
                    let mut second = y.bracket(&x.bracket(&z));
                    if self.parity[i] & self.parity[j] == 0 {
                        second = second.neg();
                    }
                    let rhs = x.bracket(&y.bracket(&z)).add(&second);
                    if lhs != rhs {
                        violations.push(Violation {
                            axiom: Axiom::Jacobi,
                            witness: format!(
                                "Jacobi fails on ({}, {}, {})",
                                self.labels[i], self.labels[j], self.labels[k]
                            ),
                        });
                    }
                }
            }
        }

        // [Y, [Y, Y]] = 0 for odd Y: basis always, random odd combinations
        // when 3 is not invertible
        let odd_indices: Vec<usize> = (0..n).filter(|&i| self.parity[i] == 1).collect();
        let mut odd_witnesses: Vec<LieElement> =
            odd_indices.iter().map(|&i| self.basis_element(i)).collect();
        if !self.ring.invertible(3) && !odd_indices.is_empty() {
            for _ in 0..100 {
                let coords = odd_indices
                    .iter()
                    .map(|&i| (i, self.ring.from_integer(rng.small_int(5))))
                    .collect();
                odd_witnesses.push(self.element(coords));
            }
        }
        for y in &odd_witnesses {
            let cube = y.bracket(&y.bracket(y));
            if !cube.is_zero() {
                violations.push(Violation {
                    axiom: Axiom::OddCube,
                    witness: format!("[Y, [Y, Y]] = {cube} for odd Y = {y}"),
                });
            }
        }

        violations.sort_by(|a, b| a.witness.cmp(&b.witness));
        violations.dedup();
        ValidationReport { violations }
    }

    /// True iff every composition of N adjoint operators on basis elements
    /// vanishes (sufficient by multilinearity).
    pub fn is_nilpotent(self: &Arc<Self>, class: usize) -> bool {
        assert!(class >= 1);
        let mut frontier: BTreeSet<Vec<(usize, Scalar)>> = (0..self.dim())
            .map(|i| self.basis_element(i).coords)
            .collect();
        for _ in 0..class {
            let mut next = BTreeSet::new();
            for coords in &frontier {
                let v = LieElement {
                    algebra: self.clone(),
                    coords: coords.clone(),
                };
                for i in 0..self.dim() {
                    let b = self.basis_element(i).bracket(&v);
                    if !b.is_zero() {
                        next.insert(b.coords);
                    }
                }
            }
            if next.is_empty() {
                return true;
            }
            frontier = next;
        }
        false
    }

    /// The least N within `bound` for which the algebra is N-nilpotent.
    pub fn nilpotency_class(self: &Arc<Self>, bound: usize) -> Option<usize> {
        (1..=bound).find(|&n| self.is_nilpotent(n))
    }
}

fn bracket_label(word: &[u8], generators: &[(String, u8)]) -> String {
    if word.len() == 1 {
        return generators[word[0] as usize].0.clone();
    }
    let (u, v) = lyndon::standard_factorization(word);
    format!(
        "[{},{}]",
        bracket_label(&u, generators),
        bracket_label(&v, generators)
    )
}

/// The Koszul sign α with `X_{s(1)}···X_{s(n)} = α·X_1···X_n` in S(M):
/// -1 for every inversion of two odd factors.
pub fn koszul_sign(parities: &[u8], permutation: &[usize]) -> i32 {
    let n = permutation.len();
    debug_assert!({
        let mut seen = vec![false; n];
        permutation.iter().all(|&i| {
            let fresh = !seen[i];
            seen[i] = true;
            fresh && i < n
        })
    });
    let mut sign = 1;
    for a in 0..n {
        for b in (a + 1)..n {
            if permutation[a] > permutation[b]
                && parities[permutation[a]] == 1
                && parities[permutation[b]] == 1
            {
                sign = -sign;
            }
        }
    }
    sign
}

/// An element of the algebra: sparse coordinates over the basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    algebra: Arc<SuperLieAlgebra>,
    /// Sorted by basis index; no zero coefficients.
    coords: Vec<(usize, Scalar)>,
}

impl LieElement {
    pub fn algebra(&self) -> &Arc<SuperLieAlgebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[(usize, Scalar)] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// The parity of a homogeneous element; `None` when the support mixes
    /// parities (or for zero, which is homogeneous of either parity).
    pub fn parity(&self) -> Option<u8> {
        let mut parity = None;
        for (i, _) in &self.coords {
            let p = self.algebra.parity_of(*i);
            match parity {
                None => parity = Some(p),
                Some(q) if q != p => return None,
                _ => {}
            }
        }
        Some(parity.unwrap_or(0))
    }

    fn check_same(&self, other: &LieElement, op: &str) {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra,
            "algebra mismatch in {op}"
        );
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        self.check_same(other, "add");
        let mut coords = self.coords.clone();
        coords.extend(other.coords.iter().cloned());
        LieElement {
            algebra: self.algebra.clone(),
            coords: normalize_coords(self.algebra.ring(), coords),
        }
    }

    pub fn sub(&self, other: &LieElement) -> LieElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LieElement {
        LieElement {
            algebra: self.algebra.clone(),
            coords: self.coords.iter().map(|(i, c)| (*i, c.neg())).collect(),
        }
    }

    pub fn scalar_mul(&self, c: &Scalar) -> LieElement {
        let coords = self
            .coords
            .iter()
            .map(|(i, v)| (*i, v.mul(c)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        LieElement {
            algebra: self.algebra.clone(),
            coords,
        }
    }

    /// Bilinear extension of the structure-constant table.
    pub fn bracket(&self, other: &LieElement) -> LieElement {
        self.check_same(other, "bracket");
        let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
        for (i, a) in &self.coords {
            for (j, b) in &other.coords {
                if let Some(value) = self.algebra.brackets.get(&(*i, *j)) {
                    let factor = a.mul(b);
                    for (k, c) in value {
                        let entry = acc.entry(*k).or_insert_with(|| self.algebra.ring().zero());
                        *entry = entry.add(&c.mul(&factor));
                    }
                }
            }
        }
        LieElement {
            algebra: self.algebra.clone(),
            coords: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// `ad X_1 ∘ ... ∘ ad X_r` applied to `self`.
    pub fn ad_chain(&self, operators: &[LieElement]) -> LieElement {
        let mut acc = self.clone();
        for x in operators.iter().rev() {
            acc = x.bracket(&acc);
        }
        acc
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in &self.coords {
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
            let label = self.algebra.label(*i);
            if magnitude == "1" {
                write!(f, "{label}")?;
            } else {
                write!(f, "{magnitude}*{label}")?;
            }
        }
        Ok(())
    }
}

/// Axioms named in validation reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Axiom {
    ParityHomogeneity,
    Antisymmetry,
    EvenSquare,
    Jacobi,
    OddCube,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::ParityHomogeneity => "parity homogeneity",
            Axiom::Antisymmetry => "graded antisymmetry",
            Axiom::EvenSquare => "[X,X] = 0 for even X",
            Axiom::Jacobi => "graded Jacobi identity",
            Axiom::OddCube => "[Y,[Y,Y]] = 0 for odd Y",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "violated {}: {}", v.axiom, v.witness)?;
            }
            Ok(())
        }
    }
}

/// A parity- and bracket-preserving linear map between algebras.
#[derive(Clone, Debug)]
pub struct LieMorphism {
    source: Arc<SuperLieAlgebra>,
    target: Arc<SuperLieAlgebra>,
    /// Image of each source basis element.
    images: Vec<LieElement>,
}

impl LieMorphism {
    /// Build and check a morphism from the images of the source basis.
    pub fn new(
        source: Arc<SuperLieAlgebra>,
        target: Arc<SuperLieAlgebra>,
        images: Vec<LieElement>,
    ) -> Result<LieMorphism> {
        assert_eq!(images.len(), source.dim(), "one image per basis element");
        for (i, img) in images.iter().enumerate() {
            assert!(
                Arc::ptr_eq(img.algebra(), &target) || *img.algebra() == target,
                "image {i} lives in the wrong algebra"
            );
            for (k, c) in img.coords() {
                if !c.is_zero() && target.parity_of(*k) != source.parity_of(i) {
                    return Err(Error::Unsupported(format!(
                        "morphism does not preserve parity on {}",
                        source.label(i)
                    )));
                }
            }
        }
        let morphism = LieMorphism {
            source: source.clone(),
            target,
            images,
        };
        for i in 0..source.dim() {
            for j in 0..source.dim() {
                let lhs = morphism.apply(&source.basis_bracket(i, j));
                let rhs = morphism.images[i].bracket(&morphism.images[j]);
                if lhs != rhs {
                    return Err(Error::Unsupported(format!(
                        "morphism does not preserve [{}, {}]",
                        source.label(i),
                        source.label(j)
                    )));
                }
            }
        }
        Ok(morphism)
    }

    pub fn identity(algebra: &Arc<SuperLieAlgebra>) -> LieMorphism {
        let images = (0..algebra.dim())
            .map(|i| algebra.basis_element(i))
            .collect();
        LieMorphism {
            source: algebra.clone(),
            target: algebra.clone(),
            images,
        }
    }

    pub fn source(&self) -> &Arc<SuperLieAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SuperLieAlgebra> {
        &self.target
    }

    pub fn image_of_basis(&self, i: usize) -> &LieElement {
        &self.images[i]
    }

    pub fn apply(&self, a: &LieElement) -> LieElement {
        assert!(
            Arc::ptr_eq(a.algebra(), &self.source) || *a.algebra() == self.source,
            "element not in the morphism source"
        );
        let mut acc = self.target.zero_element();
        for (i, c) in a.coords() {
            acc = acc.add(&self.images[*i].scalar_mul(c));
        }
        acc
    }
}

// ----- JSON file format -----

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    ring: String,
    basis: Vec<BasisFileEntry>,
    #[serde(default)]
    brackets: Vec<BracketFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct BasisFileEntry {
    label: String,
    parity: u8,
}

#[derive(Serialize, Deserialize)]
struct BracketFileEntry {
    left: String,
    right: String,
    value: Vec<CoeffFileEntry>,
}

#[derive(Serialize, Deserialize)]
struct CoeffFileEntry {
    basis: String,
    coeff: String,
}

/// Parse the JSON algebra format. Only pairs with `left` index ≤ `right`
/// index may be listed; the rest are inferred by antisymmetry.
pub fn algebra_from_json(text: &str) -> Result<Arc<SuperLieAlgebra>> {
    let file: AlgebraFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("algebra file: {e}")))?;
    let ring = RingSpec::parse(&file.ring)?;
    let mut labels = Vec::new();
    for b in &file.basis {
        if labels.contains(&b.label) {
            return Err(Error::Parse(format!("duplicate basis label `{}`", b.label)));
        }
        if b.parity > 1 {
            return Err(Error::Parse(format!(
                "parity of `{}` must be 0 or 1",
                b.label
            )));
        }
        labels.push(b.label.clone());
    }
    let find = |label: &str| -> Result<usize> {
        labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Parse(format!("unknown basis label `{label}`")))
    };
    let mut entries = Vec::new();
    for entry in &file.brackets {
        let left = find(&entry.left)?;
        let right = find(&entry.right)?;
        if left > right {
            return Err(Error::Parse(format!(
                "bracket ({}, {}) out of order: list only left ≤ right",
                entry.left, entry.right
            )));
        }
        let mut value = Vec::new();
        for c in &entry.value {
            value.push((find(&c.basis)?, ring.parse_scalar(&c.coeff)?));
        }
        entries.push(BracketEntry { left, right, value });
    }
    let basis = file
        .basis
        .iter()
        .map(|b| (b.label.clone(), b.parity))
        .collect();
    Ok(SuperLieAlgebra::new(ring, basis, entries))
}

#[derive(Serialize, Deserialize)]
struct MorphismFile {
    /// The target algebra, inline in the same format as an algebra file.
    target: serde_json::Value,
    /// Images of source basis elements; omitted basis elements map to zero.
    images: Vec<MorphismImageEntry>,
}

#[derive(Serialize, Deserialize)]
struct MorphismImageEntry {
    basis: String,
    value: Vec<CoeffFileEntry>,
}

/// Parse a morphism file against a known source algebra. The file holds the
/// target algebra inline plus the images of source basis elements; the
/// morphism axioms are checked on construction.
pub fn morphism_from_json(text: &str, source: &Arc<SuperLieAlgebra>) -> Result<LieMorphism> {
    let file: MorphismFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("morphism file: {e}")))?;
    let target = algebra_from_json(&file.target.to_string())?;
    let mut images: Vec<LieElement> = (0..source.dim()).map(|_| target.zero_element()).collect();
    for entry in &file.images {
        let i = source
            .index_of(&entry.basis)
            .ok_or_else(|| Error::Parse(format!("unknown source label `{}`", entry.basis)))?;
        let mut coords = Vec::new();
        for c in &entry.value {
            let k = target
                .index_of(&c.basis)
                .ok_or_else(|| Error::Parse(format!("unknown target label `{}`", c.basis)))?;
            coords.push((k, target.ring().parse_scalar(&c.coeff)?));
        }
        images[i] = target.element(coords);
    }
    LieMorphism::new(source.clone(), target, images)
}

/// Serialize an algebra into the JSON file format.
pub fn algebra_to_json(algebra: &SuperLieAlgebra) -> String {
    let mut brackets = Vec::new();
    let mut keys: Vec<(usize, usize)> = algebra
        .brackets
        .keys()
        .filter(|(i, j)| i <= j)
        .cloned()
        .collect();
    keys.sort();
    for (i, j) in keys {
        let value = algebra.brackets[&(i, j)]
            .iter()
            .map(|(k, c)| CoeffFileEntry {
                basis: algebra.labels[*k].clone(),
                coeff: c.to_string(),
            })
            .collect();
        brackets.push(BracketFileEntry {
            left: algebra.labels[i].clone(),
            right: algebra.labels[j].clone(),
            value,
        });
    }
    let file = AlgebraFile {
        ring: algebra.ring.to_string(),
        basis: algebra
            .labels
            .iter()
            .zip(&algebra.parity)
            .map(|(l, p)| BasisFileEntry {
                label: l.clone(),
                parity: *p,
            })
            .collect(),
        brackets,
    };
    serde_json::to_string_pretty(&file).expect("serialization cannot fail")
}
