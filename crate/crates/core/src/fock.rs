//! The Fock space `⊕ₙ H*(X^[n], Q)`: a free super-symmetric algebra on the
//! creation operators `q_m(α)`, `m > 0`, acting on the vacuum.

use crate::frobenius::{SurfaceClass, SurfaceModel};
use crate::rational::{is_zero, qi, zero, Q};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::fmt;

const MAX_M: u32 = 0xFFFF;

/// A canonical product of creation operators applied to the vacuum.
///
/// Factors are stored as packed codes whose ascending order is the canonical
/// order: weight descending, then basis index ascending.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NakajimaMonomial(SmallVec<[u32; 6]>);

#[inline]
fn code(m: u32, idx: usize) -> u32 {
    ((MAX_M - m) << 16) | idx as u32
}

#[inline]
fn decode(c: u32) -> (u32, usize) {
    (MAX_M - (c >> 16), (c & 0xFFFF) as usize)
}

impl NakajimaMonomial {
    pub fn vacuum() -> Self {
        NakajimaMonomial::default()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    /// Factors `(m, idx)` in canonical order.
    pub fn factors(&self) -> impl ExactSizeIterator<Item = (u32, usize)> + '_ {
        self.0.iter().map(|&c| decode(c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.factors().map(|(m, _)| m as usize).sum()
    }

    pub fn degree(&self, model: &SurfaceModel) -> usize {
        self.factors().map(|(m, i)| model.degree(i) + 2 * (m as usize - 1)).sum()
    }

    pub fn is_odd(&self, model: &SurfaceModel) -> bool {
        self.factors().filter(|(_, i)| model.is_odd(*i)).count() % 2 == 1
    }

    /// Canonicalizes a word of creations `q_{m1}(e_{i1}) ⋯ q_{mk}(e_{ik})|0⟩`.
    /// Returns `None` when an odd factor repeats.
    pub fn from_word(model: &SurfaceModel, word: &[(u32, usize)]) -> Option<(bool, NakajimaMonomial)> {
        let mut mono = NakajimaMonomial::vacuum();
        let mut negative = false;
        for &(m, idx) in word.iter().rev() {
            let (s, next) = mono.insert(model, m, idx)?;
            negative ^= s;
            mono = next;
        }
        Some((negative, mono))
    }

    /// `q_m(e_idx)` applied on the left; returns the Koszul sign and the result.
    #[inline]
    pub fn insert(&self, model: &SurfaceModel, m: u32, idx: usize) -> Option<(bool, NakajimaMonomial)> {
        debug_assert!((1..MAX_M).contains(&m));
        let c = code(m, idx);
        let odd = model.is_odd(idx);
        let pos = match self.0.binary_search(&c) {
            Ok(p) => {
                if odd {
                    return None;
                }
                p
            }
            Err(p) => p,
        };
        let mut negative = false;
        if odd {
            for &f in &self.0[..pos] {
                negative ^= model.is_odd(decode(f).1);
            }
        }
        let mut v = self.0.clone();
        v.insert(pos, c);
        Some((negative, NakajimaMonomial(v)))
    }

    /// Removes the factor at `pos`; returns the parity of the factors before it.
    #[inline]
    pub fn remove(&self, model: &SurfaceModel, pos: usize) -> (bool, NakajimaMonomial) {
        let mut odd_before = false;
        for &f in &self.0[..pos] {
            odd_before ^= model.is_odd(decode(f).1);
        }
        let mut v = self.0.clone();
        v.remove(pos);
        (odd_before, NakajimaMonomial(v))
    }

    /// Renders as `q2(h) q1(1)`; the vacuum renders as `|0>`.
    pub fn display(&self, model: &SurfaceModel) -> String {
        if self.is_vacuum() {
            return "|0>".to_string();
        }
        self.factors()
            .map(|(m, i)| format!("q{}({})", m, model.basis()[i].name))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for NakajimaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors().map(|(m, i)| format!("q{m}[{i}]")).collect();
        write!(f, "<{}>", parts.join(" "))
    }
}

/// A finite rational combination of canonical monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FockVector {
    terms: FxHashMap<NakajimaMonomial, Q>,
}

impl FockVector {
    pub fn zero() -> Self {
        FockVector::default()
    }

    pub fn vacuum() -> Self {
        FockVector::monomial(NakajimaMonomial::vacuum(), qi(1))
    }

    pub fn monomial(m: NakajimaMonomial, c: Q) -> Self {
        let mut v = FockVector::zero();
        v.add_term(m, c);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &NakajimaMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NakajimaMonomial, &Q)> {
        self.terms.iter()
    }

    /// Terms in canonical monomial order.
    pub fn sorted(&self) -> Vec<(NakajimaMonomial, Q)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    #[inline]
    pub fn add_term(&mut self, m: NakajimaMonomial, c: Q) {
        if is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::hash_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if is_zero(e.get()) {
                    e.remove();
                }
            }
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockVector, c: &Q) {
        if is_zero(c) {
            return;
        }
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }

    pub fn add(&mut self, other: &FockVector) {
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x.clone());
        }
    }

    pub fn sub(&mut self, other: &FockVector) {
        for (m, x) in &other.terms {
            self.add_term(m.clone(), -x.clone());
        }
    }

    pub fn scaled(&self, c: &Q) -> FockVector {
        let mut v = FockVector::zero();
        v.add_scaled(self, c);
        v
    }

    pub fn into_terms(self) -> FxHashMap<NakajimaMonomial, Q> {
        self.terms
    }

    /// Every term has this (weight, degree), if the vector is homogeneous.
    pub fn bidegree(&self, model: &SurfaceModel) -> Option<(usize, usize)> {
        let mut it = self.terms.keys().map(|m| (m.weight(), m.degree(model)));
        let first = it.next()?;
        it.all(|x| x == first).then_some(first)
    }
}

impl FromIterator<(NakajimaMonomial, Q)> for FockVector {
    fn from_iter<T: IntoIterator<Item = (NakajimaMonomial, Q)>>(iter: T) -> Self {
        let mut v = FockVector::zero();
        for (m, c) in iter {
            v.add_term(m, c);
        }
        v
    }
}

/// Canonical form of a word of creations `q_{m1}(α1) ⋯ q_{mk}(αk)|0⟩`.
pub fn normalize(model: &SurfaceModel, word: &[(u32, SurfaceClass)]) -> FockVector {
    let mut v = FockVector::vacuum();
    for (m, a) in word.iter().rev() {
        v = create(model, *m, a, &v);
    }
    v
}

/// `q_m(e_idx)` on a single monomial, accumulated into `out` with coefficient `c`.
#[inline]
pub fn create_basis_into(model: &SurfaceModel, m: u32, idx: usize, mono: &NakajimaMonomial, c: &Q, out: &mut FockVector) {
    if let Some((neg, r)) = mono.insert(model, m, idx) {
        out.add_term(r, if neg { -c.clone() } else { c.clone() });
    }
}

/// The creation operator `q_m(α)`, `m ≥ 1`.
pub fn create(model: &SurfaceModel, m: u32, a: &SurfaceClass, v: &FockVector) -> FockVector {
    assert!(m >= 1, "creation weight must be positive");
    let mut out = FockVector::zero();
    for (mono, c) in v.iter() {
        for (i, x) in a.terms() {
            create_basis_into(model, m, *i, mono, &(c * x), &mut out);
        }
    }
    out
}

/// `q_{-m}(e_idx)` on a single monomial: each factor `q_m(β)` contributes
/// `-m ∫(e_idx β)` with the Koszul sign of the factors in front of it.
#[inline]
pub fn annihilate_basis_into(model: &SurfaceModel, m: u32, idx: usize, mono: &NakajimaMonomial, c: &Q, out: &mut FockVector) {
    let odd = model.is_odd(idx);
    for (pos, &f) in mono.0.iter().enumerate() {
        let (fm, fi) = decode(f);
        if fm != m {
            continue;
        }
        let p = model.pair(idx, fi);
        if is_zero(p) {
            continue;
        }
        let (odd_before, rest) = mono.remove(model, pos);
        let mut coef = c * p * qi(-(m as i64));
        if odd && odd_before {
            coef = -coef;
        }
        out.add_term(rest, coef);
    }
}

/// The annihilation operator `q_{-m}(α)`, `m ≥ 1`.
pub fn annihilate(model: &SurfaceModel, m: u32, a: &SurfaceClass, v: &FockVector) -> FockVector {
    assert!(m >= 1, "annihilation weight must be positive");
    let mut out = FockVector::zero();
    for (mono, c) in v.iter() {
        for (i, x) in a.terms() {
            annihilate_basis_into(model, m, *i, mono, &(c * x), &mut out);
        }
    }
    out
}

/// `q_n(α)` for any integer `n`; `q_0 = 0`.
pub fn apply_q(model: &SurfaceModel, n: i32, a: &SurfaceClass, v: &FockVector) -> FockVector {
    match n.cmp(&0) {
        std::cmp::Ordering::Greater => create(model, n as u32, a, v),
        std::cmp::Ordering::Less => annihilate(model, n.unsigned_abs(), a, v),
        std::cmp::Ordering::Equal => FockVector::zero(),
    }
}

/// `q_n(e_idx)` on one monomial, accumulated into `out`.
#[inline]
pub fn apply_q_basis_into(model: &SurfaceModel, n: i32, idx: usize, mono: &NakajimaMonomial, c: &Q, out: &mut FockVector) {
    match n.cmp(&0) {
        std::cmp::Ordering::Greater => create_basis_into(model, n as u32, idx, mono, c, out),
        std::cmp::Ordering::Less => annihilate_basis_into(model, n.unsigned_abs(), idx, mono, c, out),
        std::cmp::Ordering::Equal => {}
    }
}

/// All canonical monomials of weight `n`, ordered by degree and then canonically.
pub fn basis(model: &SurfaceModel, n: usize) -> Vec<NakajimaMonomial> {
    fn rec(model: &SurfaceModel, remaining: usize, min_code: u32, cur: &mut Vec<u32>, out: &mut Vec<NakajimaMonomial>) {
        if remaining == 0 {
            out.push(NakajimaMonomial(cur.iter().cloned().collect()));
            return;
        }
        for m in (1..=remaining as u32).rev() {
            for idx in 0..model.dim() {
                let c = code(m, idx);
                if c < min_code {
                    continue;
                }
                let odd = model.is_odd(idx);
                if odd && cur.last() == Some(&c) {
                    continue;
                }
                cur.push(c);
                rec(model, remaining - m as usize, c, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(model, n, 0, &mut Vec::new(), &mut out);
    out.sort_by_cached_key(|m| (m.degree(model), m.clone()));
    out
}

/// Number of weight-`n` monomials of degree `d`.
pub fn block_dim(model: &SurfaceModel, n: usize, d: usize) -> usize {
    basis(model, n).iter().filter(|m| m.degree(model) == d).count()
}

/// Dimensions of all degree slices of the weight-`n` block (`0..=4n`).
pub fn block_dims(model: &SurfaceModel, n: usize) -> Vec<usize> {
    let mut dims = vec![0; 4 * n + 1];
    for m in basis(model, n) {
        dims[m.degree(model)] += 1;
    }
    dims
}

/// Indexed bases of all weights up to a bound.
#[derive(Clone, Debug)]
pub struct FockSpace {
    pub max_weight: usize,
    blocks: Vec<Vec<NakajimaMonomial>>,
    index: FxHashMap<NakajimaMonomial, usize>,
}

impl FockSpace {
    pub fn new(model: &SurfaceModel, max_weight: usize) -> Self {
        let blocks: Vec<Vec<NakajimaMonomial>> = (0..=max_weight).map(|n| basis(model, n)).collect();
        let mut index = FxHashMap::default();
        for b in &blocks {
            for (i, m) in b.iter().enumerate() {
                index.insert(m.clone(), i);
            }
        }
        FockSpace {
            max_weight,
            blocks,
            index,
        }
    }

    pub fn block(&self, n: usize) -> &[NakajimaMonomial] {
        &self.blocks[n]
    }

    /// Position of a monomial inside its weight block.
    pub fn position(&self, m: &NakajimaMonomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of a homogeneous-weight vector in its block basis.
    pub fn coords(&self, v: &FockVector) -> Vec<(usize, Q)> {
        let mut out: Vec<(usize, Q)> = v
            .iter()
            .map(|(m, c)| (self.position(m).expect("monomial within the truncation"), c.clone()))
            .collect();
        out.sort_by_key(|(i, _)| *i);
        out
    }

    pub fn vector(&self, n: usize, coords: &[(usize, Q)]) -> FockVector {
        coords.iter().map(|(i, c)| (self.blocks[n][*i].clone(), c.clone())).collect()
    }
}
