//! Tautological classes `G_k(α, n)`, their multiplication operators `𝔖ₖ(α)`,
//! and the cup product on `H*(X^[n], Q)` in the Nakajima basis.

use crate::error::{HilbError, Result};
use crate::fock::{apply_q, basis, create, create_basis_into, FockSpace, FockVector, NakajimaMonomial};
use crate::frobenius::{SurfaceClass, SurfaceModel};
use crate::heisenberg::{iterated_derivative_apply, Boundary, Budget, OperatorBlock};
use crate::linalg::{Echelon, SparseVec};
use crate::rational::{factorial, is_zero, one, q, qi, sign_q, zero, Q};
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

/// Shared tables for operator computations on weights `0..=max_weight`.
#[derive(Clone, Debug)]
pub struct Calculus<'a> {
    pub model: &'a SurfaceModel,
    pub max_weight: usize,
    pub space: FockSpace,
    pub boundary: Boundary,
}

impl<'a> Calculus<'a> {
    pub fn new(model: &'a SurfaceModel, max_weight: usize) -> Self {
        Calculus {
            model,
            max_weight,
            space: FockSpace::new(model, max_weight),
            boundary: Boundary::new(model, max_weight),
        }
    }

    /// `q₁^{(k)}(γ) v`.
    pub fn q1_derivative(&self, k: usize, gamma: &SurfaceClass, v: &FockVector) -> FockVector {
        if gamma.is_zero() {
            return FockVector::zero();
        }
        iterated_derivative_apply(self.model, &self.boundary, k, 1, gamma, v)
    }

    /// The unit `1ₙ = (1/n!) q₁(1)ⁿ|0⟩`.
    pub fn unit(&self, n: usize) -> FockVector {
        unit_vector(self.model, n)
    }
}

pub fn unit_vector(model: &SurfaceModel, n: usize) -> FockVector {
    let mut v = FockVector::vacuum();
    for _ in 0..n {
        v = create(model, 1, &model.unit(), &v);
    }
    v.scaled(&(one() / factorial(n as u32)))
}

/// The operator `𝔖ₖ(α)` of cup product with `G_k(α, ·)`, tabulated on every
/// monomial of weight at most the calculus bound.
#[derive(Clone, Debug)]
pub struct MultOperator {
    pub k: usize,
    pub alpha: usize,
    pub odd: bool,
    /// Degree shift `|α| + 2k`.
    pub shift: usize,
    columns: FxHashMap<NakajimaMonomial, FockVector>,
}

impl MultOperator {
    /// Builds the table through `𝔖(q_m(β) u) = [𝔖, q_m(β)] u ± q_m(β) 𝔖 u`, where
    /// `[𝔖, q₁(β)] = (1/k!) q₁^{(k)}(αβ)` and higher commutators follow from
    /// `q_{m+1}(β) = -(1/m) [q₁'(β), q_m(1)]`.
    pub fn new(calc: &Calculus, k: usize, alpha: usize) -> Self {
        let model = calc.model;
        let odd = model.is_odd(alpha);
        let mut op = MultOperator {
            k,
            alpha,
            odd,
            shift: model.degree(alpha) + 2 * k,
            columns: FxHashMap::default(),
        };
        op.columns.insert(NakajimaMonomial::vacuum(), FockVector::zero());
        for w in 1..=calc.max_weight {
            for mono in basis(model, w) {
                let (m, b) = mono.factors().next().expect("nonempty");
                let (_, rest) = mono.remove(model, 0);
                let u = FockVector::monomial(rest.clone(), qi(1));
                let mut out = op.commutator(calc, m as usize, b, &u);
                let s_rest = &op.columns[&rest];
                let c = sign_q(odd && model.is_odd(b));
                for (x, y) in s_rest.iter() {
                    create_basis_into(model, m, b, x, &(y * &c), &mut out);
                }
                op.columns.insert(mono, out);
            }
        }
        op
    }

    /// `[𝔖ₖ(α), q_m(e_b)] u`.
    fn commutator(&self, calc: &Calculus, m: usize, b: usize, u: &FockVector) -> FockVector {
        let model = calc.model;
        let inv_kf = one() / factorial(self.k as u32);
        let ab = model.cup(&SurfaceClass::basis(self.alpha), &SurfaceClass::basis(b));
        if m == 1 {
            return calc.q1_derivative(self.k, &ab, u).scaled(&inv_kf);
        }
        let mm = m - 1;
        let one_class = model.unit();
        let eb = SurfaceClass::basis(b);
        // [(1/k!) q₁^{(k+1)}(αβ), q_{mm}(1)] u
        let mut first = calc.q1_derivative(self.k + 1, &ab, &create(model, mm as u32, &one_class, u));
        first.sub(&create(model, mm as u32, &one_class, &calc.q1_derivative(self.k + 1, &ab, u)));
        let first = first.scaled(&inv_kf);
        // [q₁'(β), C_{mm}(1)] u, a super-commutator of parities |β| and |α|
        let sign = sign_q(self.odd && model.is_odd(b));
        let unit = model.unit_index();
        let c_u = self.commutator(calc, mm, unit, u);
        let mut second = calc.q1_derivative(1, &eb, &c_u);
        let d_u = calc.q1_derivative(1, &eb, u);
        second.add_scaled(&self.commutator(calc, mm, unit, &d_u), &-sign.clone());
        let mut out = first;
        out.add_scaled(&second, &sign);
        out.scaled(&q(-1, mm as i64))
    }

    pub fn column(&self, m: &NakajimaMonomial) -> &FockVector {
        self.columns.get(m).expect("monomial within the operator table")
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.iter() {
            out.add_scaled(self.column(m), c);
        }
        out
    }

    /// Matrix on the weight-`n` block.
    pub fn block(&self, calc: &Calculus, n: usize) -> OperatorBlock {
        OperatorBlock::build(calc.model, &calc.space, n, None, 0, self.odd, |v| self.apply(v))
    }
}

/// Matrix of `𝔖ₖ(α)` on the weight-`n` block.
pub fn mult_operator(model: &SurfaceModel, k: usize, alpha: usize, n: usize) -> OperatorBlock {
    let calc = Calculus::new(model, n);
    MultOperator::new(&calc, k, alpha).block(&calc, n)
}

/// The operator `O_k(α) = k! 𝔖ₖ(α)` on the weight-`n` block.
pub fn o_operator(model: &SurfaceModel, k: usize, alpha: usize, n: usize) -> OperatorBlock {
    let mut blk = mult_operator(model, k, alpha, n);
    let kf = factorial(k as u32);
    for col in &mut blk.columns {
        for (_, c) in col.iter_mut() {
            *c *= &kf;
        }
    }
    blk
}

/// `G_k(α, n) = 𝔖ₖ(α) 1ₙ`; `G_k(α, 0) = 0`.
pub fn g_class(model: &SurfaceModel, k: usize, alpha: usize, n: usize) -> FockVector {
    if n == 0 {
        return FockVector::zero();
    }
    let calc = Calculus::new(model, n);
    MultOperator::new(&calc, k, alpha).apply(&calc.unit(n))
}

/// A letter of a generator word: the boundary `𝔡` or the creation `q₁(e_b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    D,
    Q(usize),
}

/// A word `L₁ L₂ ⋯ L_r |0⟩`, read right to left.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorWord(pub Vec<Letter>);

impl GeneratorWord {
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|l| matches!(l, Letter::Q(_))).count()
    }

    pub fn degree(&self, model: &SurfaceModel) -> usize {
        self.0
            .iter()
            .map(|l| match l {
                Letter::D => 2,
                Letter::Q(b) => model.degree(*b),
            })
            .sum()
    }

    pub fn display(&self, model: &SurfaceModel) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| match l {
                Letter::D => "D".to_string(),
                Letter::Q(b) => format!("Q({})", model.basis()[*b].name),
            })
            .collect();
        parts.join(" ")
    }

    pub fn vector(&self, model: &SurfaceModel, bd: &Boundary) -> FockVector {
        let mut v = FockVector::vacuum();
        for l in self.0.iter().rev() {
            v = match l {
                Letter::D => bd.apply(&v),
                Letter::Q(b) => create(model, 1, &SurfaceClass::basis(*b), &v),
            };
        }
        v
    }
}

/// Independent words spanning the weight-`n` block, with a solver.
#[derive(Clone, Debug)]
pub struct WordBasis {
    pub n: usize,
    pub words: Vec<GeneratorWord>,
    pub vectors: Vec<FockVector>,
    echelon: Echelon,
    space: FockSpace,
}

impl WordBasis {
    /// Coefficients of `v` (weight `n`) on the spanning words.
    pub fn express(&self, v: &FockVector) -> Option<SparseVec> {
        self.echelon.express(&self.space.coords(v))
    }
}

/// Enumerates words with `n` creation letters by increasing `D`-count (then
/// lexicographically) until they span the weight-`n` block.
pub fn word_basis(model: &SurfaceModel, n: usize) -> Result<WordBasis> {
    let bd = Boundary::new(model, n);
    let space = FockSpace::new(model, n);
    let target = space.block(n).len();
    let mut echelon = Echelon::new(true);
    let mut words = Vec::new();
    let mut vectors = Vec::new();
    'outer: for t in 0..=2 * n {
        let mut batch = Vec::new();
        letters_rec(model, n, t, 4 * n, &mut Vec::new(), &mut batch);
        batch.sort();
        for w in batch {
            let word = GeneratorWord(w);
            let v = word.vector(model, &bd);
            if !v.is_zero() && echelon.insert(&space.coords(&v)) {
                words.push(word);
                vectors.push(v);
                if echelon.rank() == target {
                    break 'outer;
                }
            }
        }
    }
    if echelon.rank() < target {
        let mut spanned = vec![0usize; 4 * n + 1];
        for v in &vectors {
            if let Some((_, d)) = v.bidegree(model) {
                spanned[d] += 1;
            }
        }
        let dims = crate::fock::block_dims(model, n);
        let d = (0..dims.len()).find(|&d| spanned[d] < dims[d]).unwrap_or(0);
        return Err(HilbError::SpanFailure { n, d });
    }
    Ok(WordBasis {
        n,
        words,
        vectors,
        echelon,
        space,
    })
}

fn letters_rec(
    model: &SurfaceModel,
    q_left: usize,
    d_left: usize,
    deg_left: usize,
    cur: &mut Vec<Letter>,
    out: &mut Vec<Vec<Letter>>,
) {
    if q_left == 0 && d_left == 0 {
        out.push(cur.clone());
        return;
    }
    if d_left > 0 && deg_left >= 2 {
        cur.push(Letter::D);
        letters_rec(model, q_left, d_left - 1, deg_left - 2, cur, out);
        cur.pop();
    }
    if q_left > 0 {
        for b in 0..model.dim() {
            let db = model.degree(b);
            if db <= deg_left {
                cur.push(Letter::Q(b));
                letters_rec(model, q_left - 1, d_left, deg_left - db, cur, out);
                cur.pop();
            }
        }
    }
}

/// `𝔖ₖ(α)` on the weight-`n` block computed by pushing through spanning
/// words: `𝔖·D = D·𝔖`, `𝔖·Q(β) = ±Q(β)·𝔖 + (1/k!) q₁^{(k)}(αβ)`, `𝔖|0⟩ = 0`.
pub fn mult_operator_by_words(model: &SurfaceModel, k: usize, alpha: usize, n: usize) -> Result<OperatorBlock> {
    let wb = word_basis(model, n)?;
    let calc = Calculus::new(model, n);
    let inv_kf = one() / factorial(k as u32);
    let odd = model.is_odd(alpha);
    let mut memo: FxHashMap<Vec<Letter>, (FockVector, FockVector)> = FxHashMap::default();
    fn push(
        calc: &Calculus,
        letters: &[Letter],
        k: usize,
        alpha: usize,
        odd: bool,
        inv_kf: &Q,
        memo: &mut FxHashMap<Vec<Letter>, (FockVector, FockVector)>,
    ) -> (FockVector, FockVector) {
        if letters.is_empty() {
            return (FockVector::vacuum(), FockVector::zero());
        }
        if let Some(r) = memo.get(letters) {
            return r.clone();
        }
        let (vec_rest, s_rest) = push(calc, &letters[1..], k, alpha, odd, inv_kf, memo);
        let model = calc.model;
        let r = match letters[0] {
            Letter::D => (calc.boundary.apply(&vec_rest), calc.boundary.apply(&s_rest)),
            Letter::Q(b) => {
                let eb = SurfaceClass::basis(b);
                let v = create(model, 1, &eb, &vec_rest);
                let mut s = create(model, 1, &eb, &s_rest).scaled(&sign_q(odd && model.is_odd(b)));
                let ab = model.cup(&SurfaceClass::basis(alpha), &eb);
                s.add_scaled(&calc.q1_derivative(k, &ab, &vec_rest), inv_kf);
                (v, s)
            }
        };
        memo.insert(letters.to_vec(), r.clone());
        r
    }
    let images: Vec<FockVector> = wb
        .words
        .iter()
        .map(|w| push(&calc, &w.0, k, alpha, odd, &inv_kf, &mut memo).1)
        .collect();
    Ok(OperatorBlock::build(model, &calc.space, n, None, 0, odd, |v| {
        let coeffs = wb.express(v).expect("words span the block");
        let mut out = FockVector::zero();
        for (i, c) in coeffs {
            out.add_scaled(&images[i], &c);
        }
        out
    }))
}

/// A chosen basis vector of one degree slice: `G_gen ∪ parent`.
#[derive(Clone, Debug)]
struct Chosen {
    generator: Option<usize>,
    parent: usize,
    degree: usize,
}

/// `H*(X^[n], Q)` presented through products of tautological generators.
#[derive(Clone, Debug)]
pub struct TautRing<'a> {
    pub calc: Calculus<'a>,
    pub n: usize,
    pub generators: Vec<MultOperator>,
    chosen: Vec<Chosen>,
    slices: BTreeMap<usize, Echelon>,
    /// Chosen vector indices per degree, in acceptance order.
    by_degree: BTreeMap<usize, Vec<usize>>,
    /// Generator pairs `(k, α)` that exceeded the `k < n` bound.
    pub fallback_used: Vec<(usize, usize)>,
}

impl<'a> TautRing<'a> {
    pub fn new(model: &'a SurfaceModel, n: usize) -> Result<Self> {
        Self::with_options(model, n, false, &Budget::unlimited())
    }

    /// `reverse` visits generators in the opposite order, which yields a
    /// different (equally valid) choice of monomials in the generators.
    pub fn with_options(model: &'a SurfaceModel, n: usize, reverse: bool, budget: &Budget) -> Result<Self> {
        let calc = Calculus::new(model, n);
        let mut specs: Vec<(usize, usize)> = Vec::new();
        for k in 0..n {
            for a in 0..model.dim() {
                if model.degree(a) + 2 * k > 0 {
                    specs.push((k, a));
                }
            }
        }
        if reverse {
            specs.reverse();
        }
        let generators: Vec<MultOperator> = specs.iter().map(|&(k, a)| MultOperator::new(&calc, k, a)).collect();
        let mut ring = TautRing {
            calc,
            n,
            generators,
            chosen: Vec::new(),
            slices: BTreeMap::new(),
            by_degree: BTreeMap::new(),
            fallback_used: Vec::new(),
        };
        ring.span(budget)?;
        Ok(ring)
    }

    fn slice_dim(&self, d: usize) -> usize {
        self.calc
            .space
            .block(self.n)
            .iter()
            .filter(|m| m.degree(self.calc.model) == d)
            .count()
    }

    fn chosen_vector(&self, c: usize) -> FockVector {
        let ch = &self.chosen[c];
        match ch.generator {
            None => self.calc.unit(self.n),
            Some(g) => self.generators[g].apply(&self.chosen_vector(ch.parent)),
        }
    }

    fn span(&mut self, budget: &Budget) -> Result<()> {
        let model = self.calc.model;
        let n = self.n;
        let mut vectors: Vec<FockVector> = Vec::new();
        for d in 0..=4 * n {
            let target = self.slice_dim(d);
            let mut ech = Echelon::new(true);
            let mut ids = Vec::new();
            if d == 0 {
                let u = self.calc.unit(n);
                if target > 0 && ech.insert(&self.calc.space.coords(&u)) {
                    self.chosen.push(Chosen {
                        generator: None,
                        parent: 0,
                        degree: 0,
                    });
                    ids.push(0);
                    vectors.push(u);
                }
            }
            let mut pass = 0;
            while ech.rank() < target {
                if pass == 1 {
                    // Fallback generators with k ≥ n.
                    let start = self.generators.len();
                    for k in n..=2 * n {
                        for a in 0..model.dim() {
                            let shift = model.degree(a) + 2 * k;
                            if shift > 0 && shift <= d && !self.generators.iter().any(|g| g.k == k && g.alpha == a) {
                                self.generators.push(MultOperator::new(&self.calc, k, a));
                                self.fallback_used.push((k, a));
                            }
                        }
                    }
                    if self.generators.len() == start {
                        break;
                    }
                } else if pass > 1 {
                    break;
                }
                'gens: for g in 0..self.generators.len() {
                    let shift = self.generators[g].shift;
                    if shift == 0 || shift > d {
                        continue;
                    }
                    let parents: Vec<usize> = self.by_degree.get(&(d - shift)).cloned().unwrap_or_default();
                    for p in parents {
                        budget.check()?;
                        let v = self.generators[g].apply(&vectors[p]);
                        if v.is_zero() {
                            continue;
                        }
                        if ech.insert(&self.calc.space.coords(&v)) {
                            let id = self.chosen.len();
                            self.chosen.push(Chosen {
                                generator: Some(g),
                                parent: p,
                                degree: d,
                            });
                            ids.push(id);
                            vectors.push(v);
                            if ech.rank() == target {
                                break 'gens;
                            }
                        }
                    }
                }
                pass += 1;
            }
            if ech.rank() < target {
                return Err(HilbError::GenerationFailure { n, d });
            }
            self.slices.insert(d, ech);
            self.by_degree.insert(d, ids);
        }
        debug_assert!(self.chosen.iter().all(|c| c.degree <= 4 * n));
        Ok(())
    }

    /// `Σ_c x_c·chosen_c = v`, split by degree.
    fn express(&self, v: &FockVector) -> Vec<(usize, Q)> {
        let model = self.calc.model;
        let mut parts: BTreeMap<usize, FockVector> = BTreeMap::new();
        for (m, c) in v.iter() {
            assert_eq!(m.weight(), self.n, "cup expects weight-n vectors");
            parts.entry(m.degree(model)).or_default().add_term(m.clone(), c.clone());
        }
        let mut out = Vec::new();
        for (d, part) in parts {
            let coeffs = self.slices[&d]
                .express(&self.calc.space.coords(&part))
                .expect("chosen vectors span the slice");
            let ids = &self.by_degree[&d];
            out.extend(coeffs.into_iter().map(|(i, c)| (ids[i], c)));
        }
        out
    }

    /// Multiplication by a chosen basis vector.
    fn mult_chosen(&self, c: usize, w: &FockVector) -> FockVector {
        let ch = &self.chosen[c];
        match ch.generator {
            None => w.clone(),
            Some(g) => self.generators[g].apply(&self.mult_chosen(ch.parent, w)),
        }
    }

    /// `v ∪ w` for weight-`n` vectors.
    pub fn cup(&self, v: &FockVector, w: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (c, x) in self.express(v) {
            out.add_scaled(&self.mult_chosen(c, w), &x);
        }
        out
    }

    /// Each chosen vector recomputed from its generator chain; used by tests.
    pub fn chosen_vectors(&self) -> Vec<FockVector> {
        (0..self.chosen.len()).map(|c| self.chosen_vector(c)).collect()
    }

    /// Full structure constants in the Nakajima basis.
    pub fn table(&self, budget: &Budget) -> Result<RingTable> {
        let model = self.calc.model;
        let n = self.n;
        let basis: Vec<NakajimaMonomial> = self.calc.space.block(n).to_vec();
        let dim = basis.len();
        let degrees: Vec<usize> = basis.iter().map(|m| m.degree(model)).collect();
        // Mult_c applied to every basis vector, built along generator chains.
        let mut mult: Vec<Vec<FockVector>> = Vec::with_capacity(self.chosen.len());
        for c in 0..self.chosen.len() {
            budget.check()?;
            let ch = &self.chosen[c];
            let row: Vec<FockVector> = match ch.generator {
                None => basis.iter().map(|m| FockVector::monomial(m.clone(), qi(1))).collect(),
                Some(g) => mult[ch.parent].iter().map(|v| self.generators[g].apply(v)).collect(),
            };
            mult.push(row);
        }
        let mut constants: BTreeMap<(usize, usize), SparseVec> = BTreeMap::new();
        for i in 0..dim {
            budget.check()?;
            let expr = self.express(&FockVector::monomial(basis[i].clone(), qi(1)));
            for j in 0..dim {
                if degrees[i] + degrees[j] > 4 * n {
                    continue;
                }
                let mut acc = FockVector::zero();
                for (c, x) in &expr {
                    acc.add_scaled(&mult[*c][j], x);
                }
                if !acc.is_zero() {
                    constants.insert((i, j), self.calc.space.coords(&acc));
                }
            }
        }
        let mut form = BTreeMap::new();
        for i in 0..dim {
            for j in 0..dim {
                if degrees[i] + degrees[j] == 4 * n {
                    let b = pairing_monomials(model, &basis[i], &basis[j]);
                    if !is_zero(&b) {
                        form.insert((i, j), b);
                    }
                }
            }
        }
        let unit = self.calc.space.position(&unit_monomial(model, n)).expect("unit monomial");
        Ok(RingTable {
            n,
            basis,
            degrees,
            odd: vec![],
            constants,
            form,
            unit,
            unit_scale: one() / factorial(n as u32),
        }
        .with_parities(model))
    }
}

fn unit_monomial(model: &SurfaceModel, n: usize) -> NakajimaMonomial {
    NakajimaMonomial::from_word(model, &vec![(1, model.unit_index()); n])
        .expect("even")
        .1
}

/// `B(v, w)`: apply the adjoint annihilation word of each monomial of `v` to
/// `w`, read the vacuum coefficient and multiply by `(-1)ⁿ`. The adjoint word
/// reverses the factors, which for `k` odd factors adds `(-1)^{k(k-1)/2}`.
pub fn intersection_form(model: &SurfaceModel, n: usize, v: &FockVector, w: &FockVector) -> Q {
    let mut total = zero();
    for (m, c) in v.iter() {
        debug_assert_eq!(m.weight(), n);
        total += c * pairing_monomial_vector(model, m, w);
    }
    total
}

fn pairing_monomial_vector(model: &SurfaceModel, m: &NakajimaMonomial, w: &FockVector) -> Q {
    let mut x = w.clone();
    for (mm, a) in m.factors() {
        x = apply_q(model, -(mm as i32), &SurfaceClass::basis(a), &x);
        if x.is_zero() {
            return zero();
        }
    }
    let c = x.coeff(&NakajimaMonomial::vacuum());
    // Reversing the order of the odd factors of the adjoint word.
    let k = m.factors().filter(|(_, a)| model.is_odd(*a)).count();
    if (m.weight() + k * k.saturating_sub(1) / 2) % 2 == 1 {
        -c
    } else {
        c
    }
}

fn pairing_monomials(model: &SurfaceModel, a: &NakajimaMonomial, b: &NakajimaMonomial) -> Q {
    pairing_monomial_vector(model, a, &FockVector::monomial(b.clone(), qi(1)))
}

/// Structure constants of `H*(X^[n], Q)` in the Nakajima basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingTable {
    pub n: usize,
    pub basis: Vec<NakajimaMonomial>,
    pub degrees: Vec<usize>,
    pub odd: Vec<bool>,
    /// `e_i ∪ e_j = Σ_k c_{ij}^k e_k`, nonzero pairs only.
    pub constants: BTreeMap<(usize, usize), SparseVec>,
    /// Nonzero entries of the intersection form.
    pub form: BTreeMap<(usize, usize), Q>,
    /// Index of `q₁(1)ⁿ|0⟩`; the unit is `unit_scale` times this vector.
    pub unit: usize,
    pub unit_scale: Q,
}

/// Outcome of the ring-axiom checks; each entry is `None` on success or a
/// description of the first failure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RingCheck {
    pub associativity: Option<String>,
    pub commutativity: Option<String>,
    pub unit: Option<String>,
    pub frobenius: Option<String>,
    pub nondegeneracy: Option<String>,
}

impl RingCheck {
    pub fn pass(&self) -> bool {
        self.associativity.is_none()
            && self.commutativity.is_none()
            && self.unit.is_none()
            && self.frobenius.is_none()
            && self.nondegeneracy.is_none()
    }
}

impl RingTable {
    fn with_parities(mut self, model: &SurfaceModel) -> Self {
        self.odd = self.basis.iter().map(|m| m.is_odd(model)).collect();
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn product(&self, i: usize, j: usize) -> &[(usize, Q)] {
        self.constants.get(&(i, j)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Product of two coordinate vectors.
    pub fn multiply(&self, x: &[(usize, Q)], y: &[(usize, Q)]) -> SparseVec {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (i, a) in x {
            for (j, b) in y {
                let ab = a * b;
                for (k, c) in self.product(*i, *j) {
                    *acc.entry(*k).or_insert_with(zero) += &ab * c;
                }
            }
        }
        acc.into_iter().filter(|(_, c)| !is_zero(c)).collect()
    }

    pub fn pair(&self, x: &[(usize, Q)], y: &[(usize, Q)]) -> Q {
        let mut s = zero();
        for (i, a) in x {
            for (j, b) in y {
                if let Some(f) = self.form.get(&(*i, *j)) {
                    s += a * b * f;
                }
            }
        }
        s
    }

    fn name(&self, model: Option<&SurfaceModel>, i: usize) -> String {
        match model {
            Some(m) => self.basis[i].display(m),
            None => format!("#{i}"),
        }
    }

    /// Exhaustive checks of the ring axioms and of the Frobenius form.
    pub fn check(&self, model: Option<&SurfaceModel>, budget: &Budget) -> Result<RingCheck> {
        let mut report = self.check_algebra(model, budget)?;
        let dim = self.dim();
        let top = 4 * self.n;
        let e = |i: usize| vec![(i, one())];
        // Frobenius compatibility B(u ∪ v, w) = B(u, v ∪ w).
        'frob: for i in 0..dim {
            budget.check()?;
            for j in 0..dim {
                if self.degrees[i] + self.degrees[j] > top {
                    continue;
                }
                let ij = self.product(i, j);
                for k in 0..dim {
                    if self.degrees[i] + self.degrees[j] + self.degrees[k] != top {
                        continue;
                    }
                    let lhs = self.pair(ij, &e(k));
                    let rhs = self.pair(&e(i), self.product(j, k));
                    if lhs != rhs {
                        report.frobenius = Some(format!(
                            "({} , {} , {})",
                            self.name(model, i),
                            self.name(model, j),
                            self.name(model, k)
                        ));
                        break 'frob;
                    }
                }
            }
        }
        let rows: Vec<SparseVec> = (0..dim)
            .map(|i| {
                (0..dim)
                    .filter_map(|j| self.form.get(&(i, j)).map(|c| (j, c.clone())))
                    .collect()
            })
            .collect();
        let r = crate::linalg::rank(&rows);
        if r < dim {
            report.nondegeneracy = Some(format!("rank {r} < {dim}"));
        }
        Ok(report)
    }

    /// Unit, graded commutativity and associativity, exhaustively.
    pub fn check_algebra(&self, model: Option<&SurfaceModel>, budget: &Budget) -> Result<RingCheck> {
        let dim = self.dim();
        let top = 4 * self.n;
        let mut report = RingCheck::default();
        let e = |i: usize| vec![(i, one())];
        // Unit.
        let unit = vec![(self.unit, self.unit_scale.clone())];
        for i in 0..dim {
            if self.multiply(&unit, &e(i)) != e(i) || self.multiply(&e(i), &unit) != e(i) {
                report.unit = Some(format!("1 ∪ {} ≠ {}", self.name(model, i), self.name(model, i)));
                break;
            }
        }
        // Graded commutativity.
        'comm: for i in 0..dim {
            for j in 0..dim {
                let sign = sign_q(self.odd[i] && self.odd[j]);
                let lhs = self.product(i, j);
                let rhs: SparseVec = self.product(j, i).iter().map(|(k, c)| (*k, c * &sign)).collect();
                if lhs != rhs.as_slice() {
                    report.commutativity = Some(format!("{} , {}", self.name(model, i), self.name(model, j)));
                    break 'comm;
                }
            }
        }
        // Associativity on all triples of total degree within range.
        'assoc: for i in 0..dim {
            budget.check()?;
            for j in 0..dim {
                if self.degrees[i] + self.degrees[j] > top {
                    continue;
                }
                let ij = self.product(i, j).to_vec();
                for k in 0..dim {
                    if self.degrees[i] + self.degrees[j] + self.degrees[k] > top {
                        continue;
                    }
                    let lhs = self.multiply(&ij, &e(k));
                    let rhs = self.multiply(&e(i), self.product(j, k));
                    if lhs != rhs {
                        report.associativity = Some(format!(
                            "({} , {} , {})",
                            self.name(model, i),
                            self.name(model, j),
                            self.name(model, k)
                        ));
                        break 'assoc;
                    }
                }
            }
        }
        Ok(report)
    }
}

/// The full ring table of `H*(X^[n], Q)`.
pub fn ring_table(model: &SurfaceModel, n: usize) -> Result<RingTable> {
    ring_table_with(model, n, &Budget::unlimited())
}

pub fn ring_table_with(model: &SurfaceModel, n: usize, budget: &Budget) -> Result<RingTable> {
    TautRing::with_options(model, n, false, budget)?.table(budget)
}

/// `v ∪ w` in `H*(X^[n], Q)`.
pub fn cup(model: &SurfaceModel, n: usize, v: &FockVector, w: &FockVector) -> Result<FockVector> {
    Ok(TautRing::new(model, n)?.cup(v, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::normalize;
    use crate::frobenius::{k3, p1xp1, p2, t4};

    #[test]
    fn s11_is_boundary() {
        for model in [p2(), t4(), p1xp1()] {
            let calc = Calculus::new(&model, 3);
            let s = MultOperator::new(&calc, 1, model.unit_index());
            for w in 0..=3 {
                for m in calc.space.block(w) {
                    assert_eq!(s.column(m), calc.boundary.column(m), "{}", m.display(&model));
                }
            }
        }
    }

    #[test]
    fn recursive_matches_word_push_through() {
        for model in [p2(), t4()] {
            for n in 1..=3 {
                if model.has_odd_classes() && n == 3 {
                    continue;
                }
                for k in 0..=2 {
                    for a in 0..model.dim() {
                        let rec = mult_operator(&model, k, a, n);
                        let words = mult_operator_by_words(&model, k, a, n).unwrap();
                        assert_eq!(rec, words, "{} n={n} k={k} a={a}", model.name());
                    }
                }
            }
        }
    }

    #[test]
    fn word_basis_ranks() {
        assert_eq!(word_basis(&p2(), 2).unwrap().words.len(), 9);
        assert_eq!(
            word_basis(&p2(), 1)
                .unwrap()
                .words
                .iter()
                .filter(|w| w.0.contains(&Letter::D))
                .count(),
            0
        );
        let wb = word_basis(&t4(), 2).unwrap();
        assert_eq!(wb.words.len(), FockSpace::new(&t4(), 2).block(2).len());
    }

    #[test]
    fn g_class_examples() {
        let model = p2();
        let h = 1;
        for n in 1..=3 {
            let mut expected = normalize(&model, &[(1, SurfaceClass::basis(h))]);
            for _ in 1..n {
                expected = create(&model, 1, &model.unit(), &expected);
            }
            let expected = expected.scaled(&(one() / factorial(n as u32 - 1)));
            assert_eq!(g_class(&model, 0, h, n), expected);
        }
        let one2 = g_class(&model, 1, model.unit_index(), 2);
        assert_eq!(one2, normalize(&model, &[(2, model.unit())]).scaled(&q(-1, 2)));
        for a in 0..model.dim() {
            for k in 0..=2 {
                let g = g_class(&model, k, a, 1);
                if k == 0 {
                    assert_eq!(g, normalize(&model, &[(1, SurfaceClass::basis(a))]));
                } else {
                    assert!(g.is_zero());
                }
            }
        }
        assert!(g_class(&model, 0, h, 0).is_zero());
    }

    #[test]
    fn mult_operators_super_commute() {
        let model = t4();
        let calc = Calculus::new(&model, 2);
        let ops: Vec<MultOperator> = (0..2)
            .flat_map(|k| (0..model.dim()).map(move |a| (k, a)))
            .map(|(k, a)| MultOperator::new(&calc, k, a))
            .collect();
        for x in &ops {
            for y in &ops {
                for m in calc.space.block(2) {
                    let v = FockVector::monomial(m.clone(), qi(1));
                    let mut d = x.apply(&y.apply(&v));
                    d.add_scaled(&y.apply(&x.apply(&v)), &-sign_q(x.odd && y.odd));
                    assert!(d.is_zero());
                }
            }
        }
    }

    #[test]
    fn n1_table_is_the_surface() {
        for model in [p2(), t4(), k3()] {
            let t = ring_table(&model, 1).unwrap();
            assert!(t.check(Some(&model), &Budget::unlimited()).unwrap().pass());
            let idx: Vec<usize> = (0..model.dim())
                .map(|a| t.basis.iter().position(|m| m.factors().next().unwrap().1 == a).unwrap())
                .collect();
            for a in 0..model.dim() {
                for b in 0..model.dim() {
                    let prod = model.basis_product(a, b);
                    let expected: BTreeMap<usize, Q> = prod.terms().iter().map(|(c, x)| (idx[*c], x.clone())).collect();
                    let got: BTreeMap<usize, Q> = t.product(idx[a], idx[b]).iter().cloned().collect();
                    assert_eq!(got, expected);
                    let f = t.form.get(&(idx[a], idx[b])).cloned().unwrap_or_else(zero);
                    assert_eq!(&f, model.pair(a, b));
                }
            }
        }
    }

    #[test]
    fn small_tables_satisfy_axioms() {
        for (model, n) in [(p2(), 2), (t4(), 2), (p1xp1(), 2), (p2(), 3)] {
            let t = ring_table(&model, n).unwrap();
            let r = t.check(Some(&model), &Budget::unlimited()).unwrap();
            assert!(r.pass(), "{} n={n}: {r:?}", model.name());
        }
    }

    #[test]
    fn cup_is_independent_of_generator_choice() {
        let model = p2();
        let a = TautRing::with_options(&model, 2, false, &Budget::unlimited()).unwrap();
        let b = TautRing::with_options(&model, 2, true, &Budget::unlimited()).unwrap();
        let basis = a.calc.space.block(2).to_vec();
        for x in &basis {
            for y in &basis {
                let v = FockVector::monomial(x.clone(), qi(1));
                let w = FockVector::monomial(y.clone(), qi(1));
                assert_eq!(a.cup(&v, &w), b.cup(&v, &w));
            }
        }
        let u = unit_vector(&model, 2);
        let g = g_class(&model, 0, 1, 2);
        assert_eq!(a.cup(&u, &g), g);
        let gg = a.cup(&g, &g);
        assert_eq!(gg, a.cup(&g, &g));
        for z in &basis {
            let w = FockVector::monomial(z.clone(), qi(1));
            assert_eq!(a.cup(&gg, &w), a.cup(&g, &a.cup(&g, &w)));
        }
    }
}
