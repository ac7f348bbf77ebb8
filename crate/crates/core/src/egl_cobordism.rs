//! Chern numbers of `X^[n]` by recursion over nested Hilbert schemes.
//!
//! An integrand on `X^[N] × X^m` is a polynomial in formal classes: Chern
//! classes of the Hilbert factor, incidence classes `μ_i` on `(0, k)`,
//! diagonal classes `d_i` on `(k, l)`, `c_i(X)` on factor `k` and the
//! exceptional class `l`. One step pulls the integrand back to
//! `X^[N, N-1] × X^m`, pushes it down to `X^[N-1] × X^{m+1}` and divides by
//! `N`. At `N = 0` only diagonal and surface classes remain and the integral
//! over `X^m` is evaluated.

use crate::error::{HilbError, Result};
use crate::frobenius::{SurfaceModel, TensorClass};
use crate::heisenberg::Budget;
use crate::linalg::solve;
use crate::rational::{factorial, is_zero, one, parse_q, q, qi, sign_q, zero, Q};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// A formal generator. Factor 0 is the Hilbert scheme, factors `1..=m` are
/// copies of `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// `c_i` of the Hilbert factor.
    Hilb(u8),
    /// `μ_i` on `(0, k)`.
    Mu(u8, u8),
    /// `d_i` on `(k, l)` with `k < l`.
    Diag(u8, u8, u8),
    /// `c_i(X)` on factor `k`.
    Surf(u8, u8),
    /// The exceptional class `l`.
    L,
}

impl Var {
    pub fn diag(i: u8, k: u8, l: u8) -> Var {
        if k < l {
            Var::Diag(i, k, l)
        } else {
            Var::Diag(i, l, k)
        }
    }

    /// Cohomological degree.
    pub fn degree(self) -> u32 {
        match self {
            Var::Hilb(i) | Var::Mu(i, _) | Var::Diag(i, _, _) | Var::Surf(i, _) => 2 * i as u32,
            Var::L => 2,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Hilb(i) => write!(f, "c{i}"),
            Var::Mu(i, k) => write!(f, "mu{i}[0,{k}]"),
            Var::Diag(i, k, l) => write!(f, "d{i}[{k},{l}]"),
            Var::Surf(i, k) => write!(f, "cX{i}[{k}]"),
            Var::L => write!(f, "l"),
        }
    }
}

/// Sorted `(generator, exponent)` pairs.
pub type Monomial = SmallVec<[(Var, u32); 6]>;

fn mono_degree(m: &Monomial) -> u32 {
    m.iter().map(|(v, e)| v.degree() * e).sum()
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Monomial::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Which monomials are dropped as identically zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    /// Monomials of larger cohomological degree vanish.
    pub max_degree: u32,
    /// Also drop monomials whose classes pulled back from a single surface
    /// factor, or a pair of them, exceed that factor's dimension.
    pub per_factor: bool,
}

impl Truncation {
    pub fn new(max_degree: u32) -> Self {
        Truncation {
            max_degree,
            per_factor: true,
        }
    }

    pub fn vanishes(&self, m: &Monomial) -> bool {
        if mono_degree(m) > self.max_degree {
            return true;
        }
        if !self.per_factor {
            return false;
        }
        let mut single: SmallVec<[(u8, u32); 4]> = SmallVec::new();
        for (v, e) in m {
            if let Var::Surf(_, k) = v {
                match single.iter_mut().find(|(f, _)| f == k) {
                    Some((_, d)) => *d += v.degree() * e,
                    None => single.push((*k, v.degree() * e)),
                }
            }
        }
        if single.iter().any(|(_, d)| *d > 4) {
            return true;
        }
        let on = |k: u8| single.iter().find(|(f, _)| *f == k).map_or(0, |(_, d)| *d);
        let mut pairs: SmallVec<[((u8, u8), u32); 4]> = SmallVec::new();
        for (v, e) in m {
            if let Var::Diag(_, k, l) = v {
                match pairs.iter_mut().find(|(p, _)| *p == (*k, *l)) {
                    Some((_, d)) => *d += v.degree() * e,
                    None => pairs.push(((*k, *l), v.degree() * e)),
                }
            }
        }
        pairs.iter().any(|((k, l), d)| d + on(*k) + on(*l) > 8)
    }
}

/// A polynomial with rational coefficients in the formal generators.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymbolicClass {
    terms: FxHashMap<Monomial, Q>,
}

impl SymbolicClass {
    pub fn zero() -> Self {
        SymbolicClass::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut s = SymbolicClass::zero();
        s.add_term(Monomial::new(), c);
        s
    }

    pub fn one() -> Self {
        SymbolicClass::constant(one())
    }

    pub fn var(v: Var) -> Self {
        let mut s = SymbolicClass::zero();
        let mut m = Monomial::new();
        m.push((v, 1));
        s.add_term(m, one());
        s
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

    pub fn add_term(&mut self, m: Monomial, c: Q) {
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

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    /// Terms in a canonical order.
    pub fn sorted_terms(&self) -> Vec<(Monomial, Q)> {
        let mut v: Vec<(Monomial, Q)> = self.terms.iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn coeff(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(zero)
    }

    pub fn add_scaled(&mut self, other: &SymbolicClass, c: &Q) {
        if is_zero(c) {
            return;
        }
        for (m, x) in &other.terms {
            self.add_term(m.clone(), x * c);
        }
    }

    pub fn add(&self, other: &SymbolicClass) -> SymbolicClass {
        let mut out = self.clone();
        out.add_scaled(other, &one());
        out
    }

    pub fn sub(&self, other: &SymbolicClass) -> SymbolicClass {
        let mut out = self.clone();
        out.add_scaled(other, &qi(-1));
        out
    }

    pub fn scaled(&self, c: &Q) -> SymbolicClass {
        let mut out = SymbolicClass::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn mul(&self, other: &SymbolicClass, t: &Truncation) -> SymbolicClass {
        let mut out = SymbolicClass::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let m = mono_mul(a, b);
                if !t.vanishes(&m) {
                    out.add_term(m, x * y);
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32, t: &Truncation) -> SymbolicClass {
        (0..e).fold(SymbolicClass::one(), |acc, _| acc.mul(self, t))
    }

    pub fn truncated(&self, t: &Truncation) -> SymbolicClass {
        let mut out = SymbolicClass::zero();
        for (m, c) in &self.terms {
            if !t.vanishes(m) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// The part of cohomological degree `d`.
    pub fn part(&self, d: u32) -> SymbolicClass {
        let mut out = SymbolicClass::zero();
        for (m, c) in &self.terms {
            if mono_degree(m) == d {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).max()
    }
}

impl fmt::Display for SymbolicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for (v, e) in m {
                if *e == 1 {
                    write!(f, "*{v}")?;
                } else {
                    write!(f, "*{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Direction of [`ch_chern_convert`].
#[derive(Clone, Debug, PartialEq)]
pub enum Direction {
    /// Input `(c_0, c_1, …)`, output `(ch_0, ch_1, …)` with `ch_0` the given rank.
    ChernToCh { rank: Q },
    /// Input `(ch_0, ch_1, …)`, output `(c_0 = 1, c_1, …)`.
    ChToChern,
}

/// Newton's identities between Chern classes and the Chern character,
/// truncated at index `top` (cohomological degree `2·top`).
pub fn ch_chern_convert(direction: &Direction, top: usize, input: &[SymbolicClass], t: &Truncation) -> Vec<SymbolicClass> {
    let get = |i: usize| input.get(i).cloned().unwrap_or_default();
    match direction {
        Direction::ChernToCh { rank } => {
            let mut p: Vec<SymbolicClass> = vec![SymbolicClass::zero(); top + 1];
            let mut ch = vec![SymbolicClass::constant(rank.clone())];
            for k in 1..=top {
                let mut pk = get(k).scaled(&(sign_q(k % 2 == 0) * qi(k as i64)));
                for i in 1..k {
                    let ci = get(i);
                    if !ci.is_zero() && !p[k - i].is_zero() {
                        pk.add_scaled(&ci.mul(&p[k - i], t), &sign_q(i % 2 == 0));
                    }
                }
                ch.push(pk.scaled(&(one() / factorial(k as u32))));
                p[k] = pk;
            }
            ch
        }
        Direction::ChToChern => {
            let p: Vec<SymbolicClass> = (0..=top).map(|i| get(i).scaled(&factorial(i as u32))).collect();
            let mut c = vec![SymbolicClass::one()];
            for k in 1..=top {
                let mut ck = SymbolicClass::zero();
                for i in 1..=k {
                    if !p[i].is_zero() && !c[k - i].is_zero() {
                        ck.add_scaled(&c[k - i].mul(&p[i], t), &sign_q(i % 2 == 0));
                    }
                }
                c.push(ck.scaled(&(one() / qi(k as i64))));
            }
            c
        }
    }
}

/// A formal K-theory element stored as its Chern character `(ch_0, …, ch_top)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KSymbol {
    pub ch: Vec<SymbolicClass>,
}

impl KSymbol {
    pub fn zero(top: usize) -> Self {
        KSymbol {
            ch: vec![SymbolicClass::zero(); top + 1],
        }
    }

    pub fn rank(r: i64, top: usize) -> Self {
        let mut k = KSymbol::zero(top);
        k.ch[0] = SymbolicClass::constant(qi(r));
        k
    }

    pub fn top(&self) -> usize {
        self.ch.len() - 1
    }

    /// The line element with first Chern class `x`: `ch = exp(x)`.
    pub fn line(x: &SymbolicClass, top: usize, t: &Truncation) -> Self {
        let mut ch = vec![SymbolicClass::one()];
        let mut power = SymbolicClass::one();
        for k in 1..=top {
            power = power.mul(x, t);
            ch.push(power.scaled(&(one() / factorial(k as u32))));
        }
        KSymbol { ch }
    }

    /// The element with the given rank and Chern classes `(1, c_1, …)`.
    pub fn from_chern(rank: i64, c: &[SymbolicClass], top: usize, t: &Truncation) -> Self {
        KSymbol {
            ch: ch_chern_convert(&Direction::ChernToCh { rank: qi(rank) }, top, c, t),
        }
    }

    /// Total Chern class `(1, c_1, …, c_top)`.
    pub fn chern(&self, t: &Truncation) -> Vec<SymbolicClass> {
        ch_chern_convert(&Direction::ChToChern, self.top(), &self.ch, t)
    }

    pub fn add(&self, o: &KSymbol) -> KSymbol {
        KSymbol {
            ch: self.ch.iter().zip(&o.ch).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &KSymbol) -> KSymbol {
        KSymbol {
            ch: self.ch.iter().zip(&o.ch).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn mul(&self, o: &KSymbol, t: &Truncation) -> KSymbol {
        let top = self.top().min(o.top());
        let mut ch = vec![SymbolicClass::zero(); top + 1];
        for i in 0..=top {
            if self.ch[i].is_zero() {
                continue;
            }
            for j in 0..=top - i {
                if !o.ch[j].is_zero() {
                    ch[i + j].add_scaled(&self.ch[i].mul(&o.ch[j], t), &one());
                }
            }
        }
        KSymbol { ch }
    }

    /// The derived dual: `ch_k ↦ (-1)^k ch_k`.
    pub fn dual(&self) -> KSymbol {
        KSymbol {
            ch: self
                .ch
                .iter()
                .enumerate()
                .map(|(k, c)| c.scaled(&sign_q(k % 2 == 1)))
                .collect(),
        }
    }
}

/// Classes `d_i = c_i(𝒪_Δ)` as formal pushforwards `δ_*(p_i(c_1, c_2))`.
/// Returns `p_i` as coefficients of `(1, c1, c1², c2)`, or `None` when
/// `d_i = 0`. `d_0 = 1` is not a pushforward and is handled by callers.
pub fn formal_diagonal(i: u8) -> Option<SurfPoly> {
    match i {
        2 => Some(SurfPoly([qi(-1), zero(), zero(), zero()])),
        3 => Some(SurfPoly([zero(), qi(-1), zero(), zero()])),
        4 => Some(SurfPoly([zero(), zero(), qi(-1), one()])),
        _ => None,
    }
}

/// A class `x_0 + x_1 c_1 + x_2 c_1² + x_3 c_2` on a surface.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfPoly(pub [Q; 4]);

impl SurfPoly {
    pub fn one() -> Self {
        SurfPoly([one(), zero(), zero(), zero()])
    }

    pub fn c(i: u8) -> Self {
        match i {
            0 => SurfPoly::one(),
            1 => SurfPoly([zero(), one(), zero(), zero()]),
            2 => SurfPoly([zero(), zero(), zero(), one()]),
            _ => SurfPoly([zero(), zero(), zero(), zero()]),
        }
    }

    pub fn mul(&self, o: &SurfPoly) -> SurfPoly {
        let [a0, a1, a2, a3] = &self.0;
        let [b0, b1, b2, b3] = &o.0;
        SurfPoly([a0 * b0, a0 * b1 + a1 * b0, a0 * b2 + a1 * b1 + a2 * b0, a0 * b3 + a3 * b0])
    }

    /// `∫_X` as a linear form in `A = ∫c₁²`, `B = ∫c₂`.
    pub fn integral(&self) -> UniversalPolynomial {
        let mut u = UniversalPolynomial::zero(0);
        u.add_term(1, 0, self.0[2].clone());
        u.add_term(0, 1, self.0[3].clone());
        u
    }
}

/// `Σ coeff · A^a B^b` with `A = ∫c₁²` and `B = ∫c₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalPolynomial {
    pub n: usize,
    terms: BTreeMap<(u32, u32), Q>,
}

impl UniversalPolynomial {
    pub fn zero(n: usize) -> Self {
        UniversalPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Q) -> Self {
        let mut u = UniversalPolynomial::zero(n);
        u.add_term(0, 0, c);
        u
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Q) {
        if is_zero(&c) {
            return;
        }
        let e = self.terms.entry((a, b)).or_insert_with(zero);
        *e += c;
        if is_zero(e) {
            self.terms.remove(&(a, b));
        }
    }

    /// Terms `((a, b), coeff)` in increasing `(a, b)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, a: u32, b: u32) -> Q {
        self.terms.get(&(a, b)).cloned().unwrap_or_else(zero)
    }

    pub fn mul(&self, o: &UniversalPolynomial) -> UniversalPolynomial {
        let mut out = UniversalPolynomial::zero(self.n);
        for ((a, b), x) in &self.terms {
            for ((c, d), y) in &o.terms {
                out.add_term(a + c, b + d, x * y);
            }
        }
        out
    }

    pub fn add_scaled(&mut self, o: &UniversalPolynomial, c: &Q) {
        for ((a, b), x) in &o.terms {
            self.add_term(*a, *b, x * c);
        }
    }

    pub fn eval(&self, a: &Q, b: &Q) -> Q {
        let pow = |x: &Q, e: u32| (0..e).fold(one(), |acc, _| acc * x);
        self.terms
            .iter()
            .fold(zero(), |acc, ((i, j), c)| acc + c * pow(a, *i) * pow(b, *j))
    }

    pub fn evaluate(&self, model: &SurfaceModel) -> Q {
        let (a, b) = intersection_numbers(model);
        self.eval(&a, &b)
    }
}

impl fmt::Display for UniversalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((a, b), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            match a {
                0 => {}
                1 => write!(f, "*c1^2")?,
                _ => write!(f, "*(c1^2)^{a}")?,
            }
            match b {
                0 => {}
                1 => write!(f, "*c2")?,
                _ => write!(f, "*c2^{b}")?,
            }
        }
        Ok(())
    }
}

/// `(∫c₁², ∫c₂)` of a model.
pub fn intersection_numbers(model: &SurfaceModel) -> (Q, Q) {
    let c1 = model.c1();
    (model.integrate(&model.cup(c1, c1)), model.integrate(model.c2()))
}

/// A weighted polynomial in `T_1, T_2, …` with `deg T_k = 2k`; `T_k` stands
/// for `c_k` of the Hilbert scheme.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChernPolynomial {
    terms: BTreeMap<Vec<u32>, Q>,
}

impl ChernPolynomial {
    pub fn zero() -> Self {
        ChernPolynomial::default()
    }

    /// `T_k`.
    pub fn t(k: usize) -> Self {
        let mut p = ChernPolynomial::zero();
        p.add_term(&[(k, 1)], one());
        p
    }

    /// Adds `c · Π T_k^{e}` for the given `(k, e)` pairs.
    pub fn add_term(&mut self, factors: &[(usize, u32)], c: Q) {
        if is_zero(&c) {
            return;
        }
        let len = factors.iter().map(|(k, _)| *k).max().unwrap_or(0);
        let mut exps = vec![0u32; len];
        for (k, e) in factors {
            assert!(*k >= 1, "Chern classes are indexed from 1");
            exps[k - 1] += e;
        }
        while exps.last() == Some(&0) {
            exps.pop();
        }
        let e = self.terms.entry(exps.clone()).or_insert_with(zero);
        *e += c;
        if is_zero(e) {
            self.terms.remove(&exps);
        }
    }

    /// Exponent vectors (entry `k-1` is the exponent of `T_k`) and coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &ChernPolynomial) -> ChernPolynomial {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            let f: Vec<(usize, u32)> = e.iter().enumerate().map(|(i, x)| (i + 1, *x)).collect();
            out.add_term(&f, c.clone());
        }
        out
    }

    pub fn mul(&self, o: &ChernPolynomial) -> ChernPolynomial {
        let mut out = ChernPolynomial::zero();
        for (e, c) in &self.terms {
            for (g, d) in &o.terms {
                let mut f: Vec<(usize, u32)> = e.iter().enumerate().map(|(i, x)| (i + 1, *x)).collect();
                f.extend(g.iter().enumerate().map(|(i, x)| (i + 1, *x)));
                out.add_term(&f, c * d);
            }
        }
        out
    }

    pub fn scaled(&self, c: &Q) -> ChernPolynomial {
        let mut out = ChernPolynomial::zero();
        for (e, x) in &self.terms {
            let f: Vec<(usize, u32)> = e.iter().enumerate().map(|(i, y)| (i + 1, *y)).collect();
            out.add_term(&f, x * c);
        }
        out
    }

    /// Weighted (cohomological) degrees of the monomials.
    pub fn degrees(&self) -> Vec<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().enumerate().map(|(i, x)| 2 * (i as u32 + 1) * x).sum())
            .collect()
    }

    /// Fails unless every monomial has degree `4n`.
    pub fn check_degree(&self, n: usize) -> Result<()> {
        let expected = 4 * n;
        match self.degrees().into_iter().find(|d| *d as usize != expected) {
            Some(d) => Err(HilbError::DegreeMismatch {
                expected,
                got: d as usize,
            }),
            None => Ok(()),
        }
    }

    fn to_symbolic(&self) -> SymbolicClass {
        let mut s = SymbolicClass::zero();
        for (e, c) in &self.terms {
            let m: Monomial = e
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0)
                .map(|(i, x)| (Var::Hilb(i as u8 + 1), *x))
                .collect();
            s.add_term(m, c.clone());
        }
        s
    }

    /// Evaluates with `T_k ↦ values[k-1]` (missing values are zero).
    pub fn eval(&self, values: &[Q]) -> Q {
        self.terms.iter().fold(zero(), |acc, (e, c)| {
            acc + e.iter().enumerate().fold(c.clone(), |p, (i, x)| {
                let v = values.get(i).cloned().unwrap_or_else(zero);
                (0..*x).fold(p, |p, _| p * &v)
            })
        })
    }
}

impl fmt::Display for ChernPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let factors: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0)
                .map(|(k, x)| {
                    if *x == 1 {
                        format!("c{}", k + 1)
                    } else {
                        format!("c{}^{x}", k + 1)
                    }
                })
                .collect();
            let magnitude = if crate::rational::is_negative(c) {
                -c.clone()
            } else {
                c.clone()
            };
            match (i, crate::rational::is_negative(c)) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if factors.is_empty() {
                write!(f, "{magnitude}")?;
            } else if magnitude == 1 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{magnitude}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl FromStr for ChernPolynomial {
    type Err = HilbError;

    /// Sums of products such as `c1^2*c2 + 3/2*c4 - c2^2`; `T` may be used
    /// in place of `c`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |m: &str| HilbError::Parse(format!("{m} in polynomial {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let mut start = 0;
        let mut negative = false;
        let bytes = compact.as_bytes();
        for (i, b) in bytes.iter().enumerate() {
            if (*b == b'+' || *b == b'-') && i > 0 && !b"^*/+-".contains(&bytes[i - 1]) {
                terms.push((negative, &compact[start..i]));
                negative = *b == b'-';
                start = i + 1;
            } else if (*b == b'+' || *b == b'-') && i == 0 {
                negative = *b == b'-';
                start = 1;
            }
        }
        terms.push((negative, &compact[start..]));
        let mut out = ChernPolynomial::zero();
        for (neg, term) in terms {
            let (neg, term) = match term.strip_prefix('-') {
                Some(rest) => (!neg, rest),
                None => (neg, term.strip_prefix('+').unwrap_or(term)),
            };
            if term.is_empty() {
                return Err(err("empty term"));
            }
            let mut coeff = sign_q(neg);
            let mut factors = Vec::new();
            for factor in term.split('*') {
                let lower = factor.to_ascii_lowercase();
                if let Some(rest) = lower.strip_prefix('c').or_else(|| lower.strip_prefix('t')) {
                    let (idx, exp) = match rest.split_once('^') {
                        Some((i, e)) => (i, e.parse::<u32>().map_err(|_| err("bad exponent"))?),
                        None => (rest, 1),
                    };
                    let k: usize = idx.parse().map_err(|_| err("bad Chern class index"))?;
                    if k == 0 {
                        return Err(err("Chern class index 0"));
                    }
                    factors.push((k, exp));
                } else {
                    coeff *= parse_q(factor).ok_or_else(|| err("bad coefficient"))?;
                }
            }
            out.add_term(&factors, coeff);
        }
        Ok(out)
    }
}

/// How `μ_{i,N}` on `(0, k)` is rewritten on the nested Hilbert scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MuTransfer {
    /// From the exact sequence `0 → 𝕃 ⊗ 𝒪_Δ → 𝒪_N → 𝒪_{N-1} → 0`: the
    /// Chern characters add and Chern classes are recomputed.
    ChernCharacter,
    /// `μ_{i,N} = μ_{i,N-1} + Σ_{j ≤ i} l^j d_{i-j}`.
    Additive,
}

/// How `∫_{X^m}` of diagonal and surface classes is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagonalMode {
    /// `d_i` as formal pushforwards with `δ_*u · δ_*v = δ_*(u v c₂)`; the
    /// answer depends only on `∫c₁²` and `∫c₂`.
    Formal,
    /// `d_i` as Künneth classes of the model ([`diagonal_classes`]).
    Kunneth,
}

#[derive(Clone, Debug)]
pub struct ChernOptions {
    pub mu_transfer: MuTransfer,
    pub diagonal: DiagonalMode,
    /// `σ_*(l^j) = (-1)^j μ_j` when true, `μ_j` otherwise.
    pub signed_pushforward: bool,
    pub prune: bool,
    /// When set, the factors of each monomial are rewritten in an order
    /// derived from this seed instead of the canonical one.
    pub order_seed: Option<u64>,
}

impl Default for ChernOptions {
    fn default() -> Self {
        ChernOptions {
            mu_transfer: MuTransfer::ChernCharacter,
            diagonal: DiagonalMode::Formal,
            signed_pushforward: !cfg!(feature = "unsigned-pushforward"),
            prune: true,
            order_seed: None,
        }
    }
}

fn truncation_for(n: usize, opts: &ChernOptions) -> Truncation {
    if opts.prune {
        Truncation::new(4 * n as u32)
    } else {
        Truncation {
            max_degree: 4 * n as u32 + 4,
            per_factor: false,
        }
    }
}

fn diag_chern(i: usize, a: u8, b: u8) -> SymbolicClass {
    match i {
        0 => SymbolicClass::one(),
        2..=4 => SymbolicClass::var(Var::diag(i as u8, a, b)),
        _ => SymbolicClass::zero(),
    }
}

/// Rules for one step `X^[n+1] ← X^[n+1, n] → X^[n] × X`, with the new
/// surface factor numbered `factor`.
#[derive(Clone, Debug)]
pub struct ComparisonRules {
    /// `ψ^!κ_{n+1} - φ^!κ_n` as a Chern character.
    pub difference: KSymbol,
    /// Total Chern class of `difference`.
    pub difference_chern: Vec<SymbolicClass>,
    /// `ψ^* c_i(X^[n+1])` for `i = 0..=top`, in `φ^* c_j(X^[n])`, `l`,
    /// `ρ^* c_j(X)` and `σ^* μ_{j,n}`.
    pub hilb: Vec<SymbolicClass>,
}

/// Comparison of tangent classes along the nested Hilbert scheme:
/// `ψ^!κ_{n+1} = φ^!κ_n + 𝕃 + 𝕃^∨ K^∨ - (𝒪 - T + K^∨) - 𝕃·𝒪_n^∨ - 𝕃^∨ K^∨·𝒪_n`.
pub fn comparison_classes(n: usize, factor: u8, top: usize, t: &Truncation) -> ComparisonRules {
    let l = SymbolicClass::var(Var::L);
    let c1 = SymbolicClass::var(Var::Surf(1, factor));
    let c2 = SymbolicClass::var(Var::Surf(2, factor));
    let line = KSymbol::line(&l, top, t);
    let line_dual = line.dual();
    let kdual = KSymbol::line(&c1, top, t);
    let tangent = KSymbol::from_chern(2, &[SymbolicClass::one(), c1, c2], top, t);
    let incidence = if n == 0 {
        KSymbol::zero(top)
    } else {
        let mu: Vec<SymbolicClass> = (0..=top)
            .map(|i| {
                if i == 0 {
                    SymbolicClass::one()
                } else {
                    SymbolicClass::var(Var::Mu(i as u8, factor))
                }
            })
            .collect();
        KSymbol::from_chern(0, &mu, top, t)
    };
    let lk = line_dual.mul(&kdual, t);
    let difference = line
        .add(&lk)
        .sub(&KSymbol::rank(1, top).sub(&tangent).add(&kdual))
        .sub(&line.mul(&incidence.dual(), t))
        .sub(&lk.mul(&incidence, t));
    let difference_chern = difference.chern(t);
    let hilb = (0..=top)
        .map(|i| {
            let mut acc = SymbolicClass::zero();
            for j in 0..=i.min(2 * n) {
                let h = if j == 0 {
                    SymbolicClass::one()
                } else {
                    SymbolicClass::var(Var::Hilb(j as u8))
                };
                acc.add_scaled(&h.mul(&difference_chern[i - j], t), &one());
            }
            acc
        })
        .collect();
    ComparisonRules {
        difference,
        difference_chern,
        hilb,
    }
}

/// Images of `μ_{i,n+1}` on `(0, k)` in terms of level-`n` classes, `l` and
/// `d(new, k)`.
pub fn mu_transfer(n: usize, k: u8, new: u8, top: usize, rule: MuTransfer, t: &Truncation) -> Vec<SymbolicClass> {
    let old = |i: usize| {
        if n == 0 {
            SymbolicClass::zero()
        } else if i == 0 {
            SymbolicClass::one()
        } else {
            SymbolicClass::var(Var::Mu(i as u8, k))
        }
    };
    match rule {
        MuTransfer::ChernCharacter => {
            let l = SymbolicClass::var(Var::L);
            let diag: Vec<SymbolicClass> = (0..=top).map(|i| diag_chern(i, new, k)).collect();
            let twisted = KSymbol::line(&l, top, t).mul(&KSymbol::from_chern(0, &diag, top, t), t);
            let old_c: Vec<SymbolicClass> = (0..=top).map(old).collect();
            let total = if n == 0 {
                twisted
            } else {
                KSymbol::from_chern(0, &old_c, top, t).add(&twisted)
            };
            total.chern(t)
        }
        MuTransfer::Additive => (0..=top)
            .map(|i| {
                if i == 0 {
                    return SymbolicClass::one();
                }
                let mut acc = old(i);
                let lpow = SymbolicClass::var(Var::L);
                for j in 0..=i {
                    let d = diag_chern(i - j, new, k);
                    if !d.is_zero() {
                        acc.add_scaled(&lpow.pow(j as u32, t).mul(&d, t), &one());
                    }
                }
                acc
            })
            .collect(),
    }
}

fn mix(seed: u64, v: &Var) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    let tag: u64 = match v {
        Var::Hilb(i) => *i as u64,
        Var::Mu(i, k) => 0x100 | (*i as u64) << 8 | (*k as u64) << 16,
        Var::Diag(i, k, l) => 0x200 | (*i as u64) << 8 | (*k as u64) << 16 | (*l as u64) << 24,
        Var::Surf(i, k) => 0x300 | (*i as u64) << 8 | (*k as u64) << 16,
        Var::L => 0x400,
    };
    h ^= tag.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 31)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 29)
}

/// Reduces `∫_{X^[level] × X^m} integrand` by one step.
fn reduce_step(
    integrand: &SymbolicClass,
    level: usize,
    m: usize,
    opts: &ChernOptions,
    t: &Truncation,
    budget: &Budget,
) -> Result<SymbolicClass> {
    let lower = level - 1;
    let new = (m + 1) as u8;
    let top = (t.max_degree / 2) as usize;
    let rules = comparison_classes(lower, new, top, t);
    let mut images: FxHashMap<Var, SymbolicClass> = FxHashMap::default();
    for (i, h) in rules.hilb.iter().enumerate().skip(1) {
        images.insert(Var::Hilb(i as u8), h.clone());
    }
    for k in 1..=m as u8 {
        let mu = mu_transfer(lower, k, new, top, opts.mu_transfer, t);
        for (i, c) in mu.into_iter().enumerate().skip(1) {
            images.insert(Var::Mu(i as u8, k), c);
        }
    }
    let mut powers: FxHashMap<(Var, u32), SymbolicClass> = FxHashMap::default();
    let mut pulled = SymbolicClass::zero();
    let mut terms = integrand.sorted_terms();
    if let Some(seed) = opts.order_seed {
        terms.sort_by_key(|(mono, _)| mono.iter().fold(seed, |h, (v, _)| mix(h, v)));
    }
    for (mono, c) in terms {
        budget.check()?;
        let mut factors: Vec<(Var, u32)> = mono.to_vec();
        if let Some(seed) = opts.order_seed {
            factors.sort_by_key(|(v, _)| mix(seed, v));
        }
        let mut acc = SymbolicClass::constant(c);
        for (v, e) in factors {
            let img = match images.get(&v) {
                Some(img) => powers.entry((v, e)).or_insert_with(|| img.pow(e, t)).clone(),
                None => SymbolicClass::var(v).pow(e, t),
            };
            acc = acc.mul(&img, t);
            if acc.is_zero() {
                break;
            }
        }
        pulled.add_scaled(&acc, &one());
    }
    let mut pushed = SymbolicClass::zero();
    let scale = one() / qi(level as i64);
    for (mono, c) in pulled.iter() {
        let j = mono.iter().find(|(v, _)| *v == Var::L).map_or(0, |(_, e)| *e);
        let mut rest: Monomial = mono.iter().filter(|(v, _)| *v != Var::L).cloned().collect();
        let mut coeff = c * &scale;
        if j > 0 {
            if lower == 0 {
                continue;
            }
            if opts.signed_pushforward && j % 2 == 1 {
                coeff = -coeff;
            }
            rest = mono_mul(&rest, &SmallVec::from_elem((Var::Mu(j as u8, new), 1), 1));
        }
        if !t.vanishes(&rest) {
            pushed.add_term(rest, coeff);
        }
    }
    Ok(pushed)
}

/// Rewrites `∫_{X^[n]} P` as an integral over `X^n` of a polynomial in
/// diagonal and surface classes.
pub fn reduce_to_surfaces(n: usize, p: &ChernPolynomial, opts: &ChernOptions, budget: &Budget) -> Result<SymbolicClass> {
    p.check_degree(n)?;
    let t = truncation_for(n, opts);
    let mut integrand = p.to_symbolic();
    for level in (1..=n).rev() {
        integrand = reduce_step(&integrand, level, n - level, opts, &t, budget)?;
    }
    Ok(integrand)
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

/// `∫_{X^m}` of a monomial in `d_i` and `c_i(X)` by the formal diagonal calculus.
fn formal_monomial_integral(m: usize, mono: &Monomial) -> UniversalPolynomial {
    let mut parent: Vec<usize> = (0..=m).collect();
    let mut edges = vec![0usize; m + 1];
    let mut classes: Vec<SurfPoly> = vec![SurfPoly::one(); m + 1];
    let mut pending: Vec<(usize, SurfPoly)> = Vec::new();
    for (v, e) in mono {
        match v {
            Var::Diag(i, k, l) => {
                let Some(p) = formal_diagonal(*i) else {
                    return UniversalPolynomial::zero(m);
                };
                for _ in 0..*e {
                    let (a, b) = (find(&mut parent, *k as usize), find(&mut parent, *l as usize));
                    if a != b {
                        parent[b] = a;
                    }
                    pending.push((*k as usize, p.clone()));
                }
            }
            Var::Surf(i, k) => {
                for _ in 0..*e {
                    classes[*k as usize] = classes[*k as usize].mul(&SurfPoly::c(*i));
                }
            }
            _ => return UniversalPolynomial::zero(m),
        }
    }
    for (k, p) in pending {
        let r = find(&mut parent, k);
        edges[r] += 1;
        classes[k] = classes[k].mul(&p);
    }
    let mut roots: BTreeMap<usize, (usize, SurfPoly)> = BTreeMap::new();
    for k in 1..=m {
        let r = find(&mut parent, k);
        let entry = roots.entry(r).or_insert((0, SurfPoly::one()));
        entry.0 += 1;
        entry.1 = entry.1.mul(&classes[k]);
    }
    let mut out = UniversalPolynomial::constant(m, one());
    for (r, (vertices, mut poly)) in roots {
        let excess = (edges[r] + 1).saturating_sub(vertices);
        for _ in 0..excess {
            poly = poly.mul(&SurfPoly::c(2));
        }
        out = out.mul(&poly.integral());
    }
    out
}

/// The Künneth classes `d_0, …, d_4` of `c(𝒪_Δ)` in `H*(X × X)`, from
/// `ch(𝒪_Δ) = Δ_*(td X) / (td X ⊗ td X)`.
pub fn diagonal_classes(model: &SurfaceModel) -> Result<Vec<TensorClass>> {
    let c1 = model.c1();
    let c2 = model.c2();
    let c1sq = model.cup(c1, c1);
    let td = model.unit().add(&c1.scale(&q(1, 2))).add(&c1sq.add(c2).scale(&q(1, 12)));
    let td_inv = model
        .unit()
        .add(&c1.scale(&q(-1, 2)))
        .add(&c1sq.scale(&q(1, 6)).add(&c2.scale(&q(-1, 12))));
    let pushed = model.coproduct(2, &td)?;
    let ch_total = model.tensor_mul(&pushed, &model.tensor(&[&td_inv, &td_inv]));
    let mut ch: Vec<TensorClass> = vec![TensorClass::zero(2); 5];
    for (key, c) in ch_total.iter() {
        let d: usize = key.iter().map(|i| model.degree(*i)).sum();
        if d.is_multiple_of(2) && d / 2 <= 4 {
            ch[d / 2].add_term(key.clone(), c.clone());
        }
    }
    let scale = |x: &TensorClass, c: &Q| {
        let mut out = TensorClass::zero(2);
        for (k, y) in x.iter() {
            out.add_term(k.clone(), y * c);
        }
        out
    };
    let add_into = |acc: &mut TensorClass, x: &TensorClass| {
        for (k, y) in x.iter() {
            acc.add_term(k.clone(), y.clone());
        }
    };
    let p: Vec<TensorClass> = ch.iter().enumerate().map(|(i, x)| scale(x, &factorial(i as u32))).collect();
    let mut out = vec![model.tensor(&[&model.unit(), &model.unit()])];
    for k in 1..=4 {
        let mut ck = TensorClass::zero(2);
        for i in 1..=k {
            let prod = model.tensor_mul(&out[k - i], &p[i]);
            add_into(&mut ck, &scale(&prod, &sign_q(i % 2 == 0)));
        }
        out.push(scale(&ck, &(one() / qi(k as i64))));
    }
    Ok(out)
}

/// `pr^*` of a tensor class whose factors go to the given positions of `X^m`.
/// The remaining positions carry the (even) unit, so no Koszul sign arises.
fn embed(model: &SurfaceModel, m: usize, positions: &[usize], t: &TensorClass) -> TensorClass {
    let mut out = TensorClass::zero(m);
    for (key, x) in t.iter() {
        let mut kk = vec![model.unit_index(); m];
        for (pos, idx) in positions.iter().zip(key) {
            kk[*pos] = *idx;
        }
        out.add_term(kk, x.clone());
    }
    out
}

fn kunneth_integral(model: &SurfaceModel, m: usize, reduced: &SymbolicClass, budget: &Budget) -> Result<Q> {
    let diag = diagonal_classes(model)?;
    let surf = [model.unit(), model.c1().clone(), model.c2().clone()];
    let units = vec![model.unit_index(); m];
    let mut total = zero();
    for (mono, c) in reduced.sorted_terms() {
        budget.check()?;
        let mut acc = TensorClass::zero(m);
        acc.add_term(units.clone(), one());
        for (v, e) in &mono {
            let factor = match v {
                Var::Diag(i, k, l) => match diag.get(*i as usize) {
                    Some(d) => embed(model, m, &[*k as usize - 1, *l as usize - 1], d),
                    None => TensorClass::zero(m),
                },
                Var::Surf(i, k) => {
                    let cls = surf.get(*i as usize).cloned().unwrap_or_default();
                    embed(model, m, &[*k as usize - 1], &model.tensor(&[&cls]))
                }
                _ => TensorClass::zero(m),
            };
            for _ in 0..*e {
                acc = model.tensor_mul(&acc, &factor);
            }
        }
        total += c * model.integrate_tensor(&acc);
    }
    Ok(total)
}

/// `∫_{X^[n]} P` as a polynomial in `∫c₁²` and `∫c₂`, read off directly
/// from the formal reduction.
pub fn symbolic_chern_number(n: usize, p: &ChernPolynomial, opts: &ChernOptions, budget: &Budget) -> Result<UniversalPolynomial> {
    let reduced = reduce_to_surfaces(n, p, opts, budget)?;
    let mut out = UniversalPolynomial::zero(n);
    for (mono, c) in reduced.sorted_terms() {
        out.add_scaled(&formal_monomial_integral(n, &mono), &c);
    }
    Ok(out)
}

/// `∫_{X^[n]} P(c_1(X^[n]), c_2(X^[n]), …)`.
pub fn chern_number(model: &SurfaceModel, n: usize, p: &ChernPolynomial) -> Result<Q> {
    chern_number_with(model, n, p, &ChernOptions::default(), &Budget::unlimited())
}

pub fn chern_number_with(model: &SurfaceModel, n: usize, p: &ChernPolynomial, opts: &ChernOptions, budget: &Budget) -> Result<Q> {
    match opts.diagonal {
        DiagonalMode::Formal => Ok(symbolic_chern_number(n, p, opts, budget)?.evaluate(model)),
        DiagonalMode::Kunneth => {
            let reduced = reduce_to_surfaces(n, p, opts, budget)?;
            kunneth_integral(model, n, &reduced, budget)
        }
    }
}

/// The interpolation grid: `synthetic(2, k·(e₁+f₁), e)` has `∫c₁² = 2k²`
/// and `∫c₂ = e`. A triangular grid with distinct abscissae and ordinates
/// is unisolvent for polynomials of total degree ≤ n.
fn interpolation_samples(n: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            out.push((i as i64, j as i64));
        }
    }
    out
}

fn held_out_samples(n: usize) -> Vec<(i64, i64)> {
    let n = n as i64;
    vec![(n + 1, 24), (1, n + 3), (2, -3)]
}

fn sample_model(k: i64, e: i64) -> Result<SurfaceModel> {
    crate::frobenius::synthetic(2, &[k, k], e)
}

/// Fits the polynomial `P̃` with `∫_{X^[n]} P = P̃(∫c₁², ∫c₂)` from
/// evaluations on synthetic models, and checks it on held-out models.
pub fn universal_polynomial(n: usize, p: &ChernPolynomial) -> Result<UniversalPolynomial> {
    universal_polynomial_with(n, p, &ChernOptions::default(), &Budget::unlimited())
}

pub fn universal_polynomial_with(
    n: usize,
    p: &ChernPolynomial,
    opts: &ChernOptions,
    budget: &Budget,
) -> Result<UniversalPolynomial> {
    p.check_degree(n)?;
    let exps: Vec<(u32, u32)> = (0..=n as u32).flat_map(|a| (0..=n as u32 - a).map(move |b| (a, b))).collect();
    let samples = interpolation_samples(n);
    let values: Vec<Q> = samples
        .par_iter()
        .map(|(k, e)| chern_number_with(&sample_model(*k, *e)?, n, p, opts, budget))
        .collect::<Result<_>>()?;
    let pow = |x: &Q, e: u32| (0..e).fold(one(), |acc, _| acc * x);
    let rows: Vec<Vec<Q>> = samples
        .iter()
        .map(|(k, e)| {
            let (a, b) = (qi(2 * k * k), qi(*e));
            exps.iter().map(|(i, j)| pow(&a, *i) * pow(&b, *j)).collect()
        })
        .collect();
    let coeffs =
        solve(&rows, &values).ok_or_else(|| HilbError::InterpolationInconsistent("interpolation system is singular".into()))?;
    let mut out = UniversalPolynomial::zero(n);
    for ((a, b), c) in exps.iter().zip(coeffs) {
        out.add_term(*a, *b, c);
    }
    let checks: Vec<(String, Q, Q)> = held_out_samples(n)
        .par_iter()
        .map(|(k, e)| {
            let model = sample_model(*k, *e)?;
            let direct = chern_number_with(&model, n, p, opts, budget)?;
            Ok((model.name().to_string(), direct, out.evaluate(&model)))
        })
        .collect::<Result<_>>()?;
    for (name, direct, fitted) in checks {
        if direct != fitted {
            return Err(HilbError::InterpolationInconsistent(format!(
                "{name}: direct {direct}, fitted {fitted}"
            )));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::{k3, p1xp1, p2, synthetic, t4, SurfaceClass};

    fn poly(s: &str) -> ChernPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn newton_examples() {
        let t = Truncation::new(40);
        let x = SymbolicClass::var(Var::Hilb(1));
        let line = KSymbol::line(&x, 4, &t);
        let c = line.chern(&t);
        assert_eq!(c[1], x);
        assert!(c[2].is_zero() && c[3].is_zero());
        let c2 = SymbolicClass::var(Var::Hilb(2));
        let ch = ch_chern_convert(
            &Direction::ChernToCh { rank: zero() },
            2,
            &[SymbolicClass::one(), SymbolicClass::zero(), c2.clone()],
            &t,
        );
        assert_eq!(ch[2], c2.scaled(&qi(-1)));
    }

    #[test]
    fn parses_polynomials() {
        let p = poly("c1^2*c2 + 3/2*c4 - c2^2");
        assert_eq!(p.degrees().len(), 3);
        assert_eq!(p.to_string(), poly(&p.to_string()).to_string());
        assert!("c0".parse::<ChernPolynomial>().is_err());
        assert!("c1^".parse::<ChernPolynomial>().is_err());
    }

    #[test]
    fn degree_mismatch() {
        assert!(matches!(
            chern_number(&p2(), 2, &poly("c2")),
            Err(HilbError::DegreeMismatch { expected: 8, got: 4 })
        ));
    }

    #[test]
    fn surfaces() {
        assert_eq!(chern_number(&p2(), 1, &poly("c2")).unwrap(), qi(3));
        assert_eq!(chern_number(&p2(), 1, &poly("c1^2")).unwrap(), qi(9));
        assert_eq!(chern_number(&p1xp1(), 1, &poly("c1^2 + c2")).unwrap(), qi(12));
    }

    #[test]
    fn euler_numbers_at_two() {
        for e in [0, 4, 24] {
            let m = synthetic(2, &[0, 0], e).unwrap();
            assert_eq!(chern_number(&m, 2, &poly("c4")).unwrap(), qi(e * (e + 3) / 2));
        }
        assert_eq!(chern_number(&k3(), 2, &poly("c4")).unwrap(), qi(324));
        assert_eq!(chern_number(&k3(), 2, &poly("c2^2")).unwrap(), qi(828));
        assert_eq!(chern_number(&t4(), 2, &poly("c4")).unwrap(), zero());
    }

    const TD4: &str = "-1/720*c1^4 + 1/180*c1^2*c2 + 1/720*c1*c3 + 1/240*c2^2 - 1/720*c4";
    const TD6: &str = "1/30240*c1^6 - 1/5040*c1^4*c2 + 1/12096*c1^3*c3 + 11/60480*c1^2*c2^2 \
        - 1/12096*c1^2*c4 + 11/60480*c1*c2*c3 - 1/30240*c1*c5 + 1/6048*c2^3 - 1/6720*c2*c4 \
        - 1/60480*c3^2 + 1/30240*c6";

    /// `χ(𝒪_{X^[n]}) = binom(χ(𝒪_X) + n - 1, n)` with `χ(𝒪_X) = (c₁² + c₂)/12`.
    fn todd_oracle(m: &SurfaceModel, n: i64) -> Q {
        let (a, b) = intersection_numbers(m);
        let chi = (a + b) / qi(12);
        (0..n).fold(one(), |acc, i| acc * (chi.clone() + qi(i)) / qi(i + 1))
    }

    fn models() -> Vec<SurfaceModel> {
        vec![
            p2(),
            p1xp1(),
            k3(),
            synthetic(2, &[1, 1], 5).unwrap(),
            synthetic(2, &[2, 2], 7).unwrap(),
        ]
    }

    #[test]
    fn pushforward_sign_is_pinned_by_todd_genus() {
        let budget = Budget::unlimited();
        for signed in [true, false] {
            let opts = ChernOptions {
                signed_pushforward: signed,
                ..Default::default()
            };
            let all = models()
                .iter()
                .all(|m| chern_number_with(m, 2, &poly(TD4), &opts, &budget).unwrap() == todd_oracle(m, 2));
            assert_eq!(all, signed);
        }
    }

    #[test]
    fn three_points() {
        for m in models() {
            let e = intersection_numbers(&m).1;
            let euler = e.clone() + e.clone() * e.clone() + e.clone() * (e.clone() + qi(1)) * (e + qi(2)) / qi(6);
            assert_eq!(chern_number(&m, 3, &poly("c6")).unwrap(), euler);
            assert_eq!(chern_number(&m, 3, &poly(TD6)).unwrap(), todd_oracle(&m, 3));
        }
        assert_eq!(chern_number(&k3(), 3, &poly("c6")).unwrap(), qi(3200));
    }

    #[test]
    fn additive_mu_rule_breaks_at_three_points() {
        let opts = ChernOptions {
            mu_transfer: MuTransfer::Additive,
            ..Default::default()
        };
        let budget = Budget::unlimited();
        assert_eq!(chern_number_with(&k3(), 2, &poly("c4"), &opts, &budget).unwrap(), qi(324));
        assert_ne!(chern_number_with(&k3(), 3, &poly("c6"), &opts, &budget).unwrap(), qi(3200));
    }

    #[test]
    fn additive_rule_is_the_stated_sum() {
        let t = Truncation::new(40);
        let mu = mu_transfer(1, 1, 2, 4, MuTransfer::Additive, &t);
        let l = SymbolicClass::var(Var::L);
        let d = |i: u8| SymbolicClass::var(Var::diag(i, 2, 1));
        let expected = SymbolicClass::var(Var::Mu(3, 1))
            .add(&d(3))
            .add(&l.mul(&d(2), &t))
            .add(&l.pow(3, &t));
        assert_eq!(mu[3], expected);
    }

    #[test]
    fn comparison_rank_and_base_case() {
        let t = Truncation::new(16);
        for n in 0..3 {
            let rules = comparison_classes(n, 1, 4, &t);
            assert_eq!(rules.difference.ch[0], SymbolicClass::constant(qi(2)));
        }
        let base = comparison_classes(0, 1, 4, &t);
        let no_l = |s: &SymbolicClass| {
            let mut out = SymbolicClass::zero();
            for (m, c) in s.iter() {
                if m.iter().all(|(v, _)| *v != Var::L) {
                    out.add_term(m.clone(), c.clone());
                }
            }
            out
        };
        assert_eq!(no_l(&base.hilb[1]), SymbolicClass::var(Var::Surf(1, 1)));
        assert_eq!(no_l(&base.hilb[2]), SymbolicClass::var(Var::Surf(2, 1)));
        assert!(no_l(&base.hilb[3]).is_zero());
    }

    #[test]
    fn dual_is_an_involution() {
        let t = Truncation::new(20);
        let mu: Vec<SymbolicClass> = (0..6)
            .map(|i| {
                if i == 0 {
                    SymbolicClass::one()
                } else {
                    SymbolicClass::var(Var::Mu(i as u8, 1))
                }
            })
            .collect();
        let k = KSymbol::from_chern(0, &mu, 5, &t).mul(&KSymbol::line(&SymbolicClass::var(Var::L), 5, &t), &t);
        assert_eq!(k.dual().dual(), k);
        assert_ne!(k.dual(), k);
    }

    #[test]
    fn kunneth_diagonal() {
        for m in [p2(), p1xp1(), k3(), t4()] {
            let d = diagonal_classes(&m).unwrap();
            assert!(d[1].is_zero());
            let delta = m.coproduct(2, &m.unit()).unwrap();
            let mut neg = TensorClass::zero(2);
            for (k, c) in delta.iter() {
                neg.add_term(k.clone(), -c.clone());
            }
            assert_eq!(d[2], neg);
            for a in 0..m.dim() {
                for b in 0..m.dim() {
                    let ab = m.tensor(&[&SurfaceClass::basis(a), &SurfaceClass::basis(b)]);
                    let lhs = m.integrate_tensor(&m.tensor_mul(&delta, &ab));
                    let rhs = m.integrate(&m.cup(&SurfaceClass::basis(a), &SurfaceClass::basis(b)));
                    assert_eq!(lhs, rhs, "{} {a} {b}", m.name());
                }
            }
        }
    }

    #[test]
    fn kunneth_agrees_with_formal_on_geometric_models() {
        let budget = Budget::unlimited();
        let opts = ChernOptions {
            diagonal: DiagonalMode::Kunneth,
            ..Default::default()
        };
        for m in [p2(), p1xp1(), k3(), t4()] {
            for p in ["c4", "c2^2", "c1^2*c2", "c1*c3", "c1^4", TD4] {
                assert_eq!(
                    chern_number_with(&m, 2, &poly(p), &opts, &budget).unwrap(),
                    chern_number(&m, 2, &poly(p)).unwrap(),
                    "{} {p}",
                    m.name()
                );
            }
        }
        let m = p2();
        assert_eq!(chern_number_with(&m, 3, &poly("c6"), &opts, &budget).unwrap(), qi(22));
        let fake = synthetic(2, &[0, 0], 24).unwrap();
        assert_ne!(chern_number_with(&fake, 2, &poly("c4"), &opts, &budget).unwrap(), qi(324));
    }

    #[test]
    fn pruning_is_sound() {
        let budget = Budget::unlimited();
        let loose = ChernOptions {
            prune: false,
            ..Default::default()
        };
        for (n, p) in [(2, "c4"), (2, TD4), (3, "c6"), (3, "c1^2*c4")] {
            assert_eq!(
                symbolic_chern_number(n, &poly(p), &loose, &budget).unwrap(),
                symbolic_chern_number(n, &poly(p), &ChernOptions::default(), &budget).unwrap()
            );
        }
    }

    #[test]
    fn universal_polynomials() {
        let u = universal_polynomial(1, &poly("c2")).unwrap();
        assert_eq!(u.to_string(), "1*c2");
        let u = universal_polynomial(1, &poly("c1^2")).unwrap();
        assert_eq!(u.to_string(), "1*c1^2");
        let u = universal_polynomial(2, &poly("c4")).unwrap();
        let mut expected = UniversalPolynomial::zero(2);
        expected.add_term(0, 2, q(1, 2));
        expected.add_term(0, 1, q(3, 2));
        assert_eq!(u, expected);
        assert_eq!(u.evaluate(&k3()), qi(324));
        assert_eq!(
            u,
            symbolic_chern_number(2, &poly("c4"), &ChernOptions::default(), &Budget::unlimited()).unwrap()
        );
    }
}
