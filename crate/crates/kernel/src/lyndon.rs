//! Lyndon words and the standard basis of a free Lie algebra.
//!
//! A Lyndon word is a nonempty word strictly smaller than all of its proper
//! rotations. Standard bracketing turns the set of Lyndon words of length
//! `<= N` on `g` letters into a basis of the free N-nilpotent Lie algebra,
//! and the bracket of two basis elements is rewritten into that basis by
//! working inside the free associative algebra: the expansion of a standard
//! bracketing `b(w)` is `w` plus lexicographically larger words, so repeated
//! extraction of the smallest word of a homogeneous Lie element terminates.
//!
//! Everything here is over ℤ; structure constants are mapped into the target
//! coefficient ring by the caller.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

pub type Word = Vec<u8>;

/// All Lyndon words over `letters` symbols with length in `1..=max_len`,
/// in lexicographic order (Duval's generation).
pub fn lyndon_words(letters: u8, max_len: usize) -> Vec<Word> {
    assert!(letters >= 1);
    let mut out = Vec::new();
    let mut w: Word = vec![0];
    loop {
        if w.len() <= max_len {
            out.push(w.clone());
        }
        // extend periodically to max_len, then trim and increment
        let mut next = Vec::with_capacity(max_len);
        while next.len() < max_len {
            next.push(w[next.len() % w.len()]);
        }
        while let Some(&last) = next.last() {
            if last == letters - 1 {
                next.pop();
            } else {
                break;
            }
        }
        if next.is_empty() {
            break;
        }
        *next.last_mut().unwrap() += 1;
        w = next;
    }
    out.sort();
    out
}

pub fn is_lyndon(w: &[u8]) -> bool {
    if w.is_empty() {
        return false;
    }
    for k in 1..w.len() {
        if w[k..] <= w[..] {
            return false;
        }
    }
    true
}

/// Standard factorization of a Lyndon word of length ≥ 2: `w = u·v` with `v`
/// the longest proper suffix of `w` that is Lyndon; `u` is then Lyndon too.
pub fn standard_factorization(w: &[u8]) -> (Word, Word) {
    assert!(w.len() >= 2, "factorization needs length ≥ 2");
    for start in 1..w.len() {
        if is_lyndon(&w[start..]) {
            return (w[..start].to_vec(), w[start..].to_vec());
        }
    }
    unreachable!("every Lyndon word of length ≥ 2 has a proper Lyndon suffix");
}

/// Associative polynomial over ℤ with words as monomials.
pub type AssocPoly = BTreeMap<Word, BigInt>;

fn poly_add_term(poly: &mut AssocPoly, word: Word, coeff: BigInt) {
    let entry = poly.entry(word).or_insert_with(BigInt::zero);
    *entry += coeff;
    if entry.is_zero() {
        poly.retain(|_, c| !c.is_zero());
    }
}

fn poly_concat(a: &AssocPoly, b: &AssocPoly) -> AssocPoly {
    let mut out = AssocPoly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            poly_add_term(&mut out, w, ca * cb);
        }
    }
    out
}

fn poly_sub(a: &AssocPoly, b: &AssocPoly) -> AssocPoly {
    let mut out = a.clone();
    for (w, c) in b {
        poly_add_term(&mut out, w.clone(), -c);
    }
    out
}

/// Expansion of the standard bracketing `b(w)` in the free associative
/// algebra: `b(letter) = letter`, `b(w) = b(u)·b(v) - b(v)·b(u)` for the
/// standard factorization `w = u·v`.
pub fn expand_bracketing(w: &[u8]) -> AssocPoly {
    if w.len() == 1 {
        let mut p = AssocPoly::new();
        p.insert(w.to_vec(), BigInt::from(1));
        return p;
    }
    let (u, v) = standard_factorization(w);
    let pu = expand_bracketing(&u);
    let pv = expand_bracketing(&v);
    poly_sub(&poly_concat(&pu, &pv), &poly_concat(&pv, &pu))
}

/// Rewrite a homogeneous Lie element (given by its associative expansion)
/// as a ℤ-combination of standard bracketings of Lyndon words.
///
/// Relies on the triangularity `b(w) = w + (lex-larger words)`: the smallest
/// surviving word is always Lyndon and its coefficient is the coordinate.
pub fn rewrite_into_lyndon_basis(mut poly: AssocPoly) -> Vec<(Word, BigInt)> {
    let mut out = Vec::new();
    while let Some((word, coeff)) = poly.iter().next().map(|(w, c)| (w.clone(), c.clone())) {
        assert!(
            is_lyndon(&word),
            "leading word {word:?} of a Lie element must be Lyndon"
        );
        let expansion = expand_bracketing(&word);
        for (w, c) in &expansion {
            poly_add_term(&mut poly, w.clone(), -(c * &coeff));
        }
        poly.retain(|_, c| !c.is_zero());
        out.push((word, coeff));
    }
    out
}

/// Structure constants of the free N-nilpotent Lie algebra on `letters`
/// generators: for basis words `a < b` (in the chosen basis order) returns
/// the coordinates of `[b(a), b(b)]` in the Lyndon basis.
pub fn bracket_in_basis(a: &[u8], b: &[u8], max_len: usize) -> Vec<(Word, BigInt)> {
    if a.len() + b.len() > max_len {
        return Vec::new();
    }
    let pa = expand_bracketing(a);
    let pb = expand_bracketing(b);
    let commutator = poly_sub(&poly_concat(&pa, &pb), &poly_concat(&pb, &pa));
    rewrite_into_lyndon_basis(commutator)
}
