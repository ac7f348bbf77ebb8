//! Operator calculus on the Fock space: normal-ordered products, Virasoro
//! operators, the boundary operator `𝔡`, derivatives, vertex operators and a
//! harness checking the commutation relations blockwise.

use crate::error::{HilbError, Result};
use crate::fock::{apply_q, apply_q_basis_into, basis, create, FockSpace, FockVector, NakajimaMonomial};
use crate::frobenius::{SurfaceClass, SurfaceModel, TensorClass};
use crate::linalg::SparseVec;
use crate::rational::{binomial, is_zero, q, qi, zero, Q};
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::time::Instant;

type Labels = SmallVec<[usize; 3]>;

/// `:q_{l_1} ⋯ q_{l_k}:(T)` for a tensor `T` of arity `k`, with creations moved
/// to the left (Koszul signs from reordering odd labels).
#[derive(Clone, Debug)]
pub struct NormalOrdered {
    /// Weights after reordering: creations first, then annihilations.
    weights: Vec<i32>,
    n_create: usize,
    terms: Vec<(Labels, Q)>,
    /// Contraction of the rightmost annihilation slot with each basis class:
    /// `Σ c·∫(x_last · e_a)` keyed by `a`, remaining labels kept.
    contracted: Vec<Vec<(Labels, Q)>>,
    vanishes: bool,
}

impl NormalOrdered {
    pub fn new(model: &SurfaceModel, weights: &[i32], tensor: &TensorClass) -> Result<Self> {
        if weights.len() != tensor.arity {
            return Err(HilbError::ArityMismatch {
                expected: weights.len(),
                got: tensor.arity,
            });
        }
        let k = weights.len();
        let vanishes = weights.contains(&0) || tensor.is_zero();
        if vanishes {
            return Ok(NormalOrdered {
                weights: weights.to_vec(),
                n_create: k,
                terms: Vec::new(),
                contracted: Vec::new(),
                vanishes,
            });
        }
        let mut order: Vec<usize> = (0..k).filter(|&i| weights[i] > 0).collect();
        let n_create = order.len();
        order.extend((0..k).filter(|&i| weights[i] < 0));
        let new_weights: Vec<i32> = order.iter().map(|&i| weights[i]).collect();
        let mut terms = Vec::with_capacity(tensor.terms.len());
        for (key, c) in tensor.iter() {
            let mut negative = false;
            for a in 0..k {
                for b in a + 1..k {
                    // Pair (order[a], order[b]) is inverted relative to the input.
                    if order[a] > order[b] && model.is_odd(key[order[a]]) && model.is_odd(key[order[b]]) {
                        negative = !negative;
                    }
                }
            }
            let labels: Labels = order.iter().map(|&i| key[i]).collect();
            terms.push((labels, if negative { -c.clone() } else { c.clone() }));
        }
        let mut contracted = Vec::new();
        if n_create < k {
            for a in 0..model.dim() {
                let mut acc: FxHashMap<Labels, Q> = FxHashMap::default();
                for (labels, c) in &terms {
                    let p = model.pair(labels[k - 1], a);
                    if is_zero(p) {
                        continue;
                    }
                    let rest: Labels = labels[..k - 1].iter().cloned().collect();
                    *acc.entry(rest).or_insert_with(zero) += c * p;
                }
                let mut v: Vec<(Labels, Q)> = acc.into_iter().filter(|(_, c)| !is_zero(c)).collect();
                v.sort_by(|x, y| x.0.cmp(&y.0));
                contracted.push(v);
            }
        }
        Ok(NormalOrdered {
            weights: new_weights,
            n_create,
            terms,
            contracted,
            vanishes: false,
        })
    }

    /// Annihilates with the last of the `remaining` slots against each matching
    /// factor of `mono`, then continues leftwards.
    fn annihilate_rec(
        &self,
        model: &SurfaceModel,
        remaining: usize,
        tensor: &[(Labels, Q)],
        mono: &NakajimaMonomial,
        coef: &Q,
        out: &mut FockVector,
    ) {
        if remaining == self.n_create {
            self.create_all(model, tensor, mono, coef, out);
            return;
        }
        let slot = remaining - 1;
        let m = self.weights[slot].unsigned_abs();
        let mut last: Option<(u32, usize)> = None;
        for (pos, (fm, fi)) in mono.factors().enumerate() {
            if fm != m || last == Some((fm, fi)) {
                continue;
            }
            last = Some((fm, fi));
            // Equal even factors give identical terms; count them once with multiplicity.
            let mult = mono.factors().filter(|&f| f == (fm, fi)).count() as i64;
            let (odd_before, rest) = mono.remove(model, pos);
            let mut c = coef * qi(-(m as i64) * mult);
            if odd_before && model.is_odd(fi) {
                c = -c;
            }
            if slot + 1 == self.weights.len() {
                self.annihilate_rec(model, slot, &self.contracted[fi], &rest, &c, out);
            } else {
                let mut acc: FxHashMap<Labels, Q> = FxHashMap::default();
                for (labels, x) in tensor {
                    let p = model.pair(labels[slot], fi);
                    if is_zero(p) {
                        continue;
                    }
                    let r: Labels = labels[..slot].iter().cloned().collect();
                    *acc.entry(r).or_insert_with(zero) += x * p;
                }
                let reduced: Vec<(Labels, Q)> = acc.into_iter().filter(|(_, c)| !is_zero(c)).collect();
                if !reduced.is_empty() {
                    self.annihilate_rec(model, slot, &reduced, &rest, &c, out);
                }
            }
        }
    }

    fn create_all(&self, model: &SurfaceModel, tensor: &[(Labels, Q)], mono: &NakajimaMonomial, coef: &Q, out: &mut FockVector) {
        for (labels, x) in tensor {
            let mut cur = mono.clone();
            let mut negative = false;
            let mut alive = true;
            for s in (0..self.n_create).rev() {
                match cur.insert(model, self.weights[s] as u32, labels[s]) {
                    Some((neg, next)) => {
                        negative ^= neg;
                        cur = next;
                    }
                    None => {
                        alive = false;
                        break;
                    }
                }
            }
            if alive {
                let c = coef * x;
                out.add_term(cur, if negative { -c } else { c });
            }
        }
    }

    pub fn apply_mono_into(&self, model: &SurfaceModel, mono: &NakajimaMonomial, coef: &Q, out: &mut FockVector) {
        if self.vanishes {
            return;
        }
        let k = self.weights.len();
        let ann: u32 = self.weights[self.n_create..].iter().map(|w| w.unsigned_abs()).sum();
        if ann as usize > mono.weight() {
            return;
        }
        if self.n_create == k {
            self.create_all(model, &self.terms, mono, coef, out);
        } else {
            self.annihilate_rec(model, k, &self.terms, mono, coef, out);
        }
    }

    pub fn apply(&self, model: &SurfaceModel, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.iter() {
            self.apply_mono_into(model, m, c, &mut out);
        }
        out
    }
}

/// One-shot `:q_{l_1} ⋯ q_{l_k}:(coeffs) v`.
pub fn normal_ordered_apply(model: &SurfaceModel, weights: &[i32], coeffs: &TensorClass, v: &FockVector) -> Result<FockVector> {
    Ok(NormalOrdered::new(model, weights, coeffs)?.apply(model, v))
}

/// `𝔏_n(α) = ½ Σ_ν :q_ν q_{n-ν}:(τ₂*α)`, prepared for vectors of weight at most `max_weight`.
#[derive(Clone, Debug)]
pub struct Virasoro {
    pub n: i32,
    parts: Vec<NormalOrdered>,
}

impl Virasoro {
    pub fn new(model: &SurfaceModel, n: i32, alpha: &SurfaceClass, max_weight: usize) -> Self {
        let w = max_weight as i32;
        let tau = model.coproduct(2, alpha).expect("arity 2");
        let parts = (n.min(0) - w..=n.max(0) + w)
            .filter(|&nu| nu != 0 && nu != n)
            .map(|nu| NormalOrdered::new(model, &[nu, n - nu], &tau).expect("arity 2"))
            .collect();
        Virasoro { n, parts }
    }

    pub fn apply_mono_into(&self, model: &SurfaceModel, mono: &NakajimaMonomial, coef: &Q, out: &mut FockVector) {
        let half = coef * q(1, 2);
        for p in &self.parts {
            p.apply_mono_into(model, mono, &half, out);
        }
    }

    pub fn apply(&self, model: &SurfaceModel, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.iter() {
            self.apply_mono_into(model, m, c, &mut out);
        }
        out
    }
}

fn max_weight_of(v: &FockVector) -> usize {
    v.iter().map(|(m, _)| m.weight()).max().unwrap_or(0)
}

/// `𝔏_n(α) v`.
pub fn virasoro(model: &SurfaceModel, n: i32, alpha: &SurfaceClass, v: &FockVector) -> FockVector {
    Virasoro::new(model, n, alpha, max_weight_of(v)).apply(model, v)
}

/// The excess class `e_n = ½ n² (|n| - 1) c₁(X)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcessClass {
    pub n: i32,
    pub value: SurfaceClass,
}

impl ExcessClass {
    pub fn new(model: &SurfaceModel, n: i32) -> Self {
        let n64 = n as i64;
        let c = q(n64 * n64 * (n64.abs() - 1), 2);
        ExcessClass {
            n,
            value: model.c1().scale(&c),
        }
    }
}

/// Closed form `q'_n(α) = n 𝔏_n(α) - ½ n (|n| - 1) q_n(c₁ α)`.
#[derive(Clone, Debug)]
pub struct QPrime {
    pub n: i32,
    vir: Virasoro,
    c1_alpha: SurfaceClass,
    c1_coef: Q,
}

impl QPrime {
    pub fn new(model: &SurfaceModel, n: i32, alpha: &SurfaceClass, max_weight: usize) -> Self {
        assert!(n != 0, "q' is defined for nonzero n");
        let n64 = n as i64;
        QPrime {
            n,
            vir: Virasoro::new(model, n, alpha, max_weight),
            c1_alpha: model.cup(model.c1(), alpha),
            c1_coef: q(-n64 * (n64.abs() - 1), 2),
        }
    }

    pub fn apply_mono_into(&self, model: &SurfaceModel, mono: &NakajimaMonomial, coef: &Q, out: &mut FockVector) {
        self.vir.apply_mono_into(model, mono, &(coef * qi(self.n as i64)), out);
        if !is_zero(&self.c1_coef) {
            let c = coef * &self.c1_coef;
            for (i, x) in self.c1_alpha.terms() {
                apply_q_basis_into(model, self.n, *i, mono, &(&c * x), out);
            }
        }
    }

    pub fn apply(&self, model: &SurfaceModel, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.iter() {
            self.apply_mono_into(model, m, c, &mut out);
        }
        out
    }
}

/// `q'_n(α) v`.
pub fn q_prime(model: &SurfaceModel, n: i32, alpha: &SurfaceClass, v: &FockVector) -> FockVector {
    QPrime::new(model, n, alpha, max_weight_of(v)).apply(model, v)
}

/// The boundary operator `𝔡`, tabulated on all monomials up to a weight bound
/// through `𝔡(q_m(α) w) = q'_m(α) w + q_m(α) 𝔡 w`.
#[derive(Clone, Debug)]
pub struct Boundary {
    pub max_weight: usize,
    columns: FxHashMap<NakajimaMonomial, FockVector>,
}

impl Boundary {
    pub fn new(model: &SurfaceModel, max_weight: usize) -> Self {
        let mut primes: FxHashMap<(u32, usize), QPrime> = FxHashMap::default();
        let mut columns: FxHashMap<NakajimaMonomial, FockVector> = FxHashMap::default();
        columns.insert(NakajimaMonomial::vacuum(), FockVector::zero());
        for w in 1..=max_weight {
            for mono in basis(model, w) {
                let (m, a) = mono.factors().next().expect("nonempty");
                let (_, rest) = mono.remove(model, 0);
                let qp = primes
                    .entry((m, a))
                    .or_insert_with(|| QPrime::new(model, m as i32, &SurfaceClass::basis(a), max_weight));
                let mut out = FockVector::zero();
                qp.apply_mono_into(model, &rest, &qi(1), &mut out);
                let d_rest = &columns[&rest];
                for (u, c) in d_rest.iter() {
                    crate::fock::create_basis_into(model, m, a, u, c, &mut out);
                }
                columns.insert(mono, out);
            }
        }
        Boundary { max_weight, columns }
    }

    pub fn column(&self, m: &NakajimaMonomial) -> &FockVector {
        self.columns.get(m).expect("monomial within the boundary table")
    }

    pub fn apply(&self, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        for (m, c) in v.iter() {
            out.add_scaled(self.column(m), c);
        }
        out
    }

    pub fn apply_power(&self, k: usize, v: &FockVector) -> FockVector {
        let mut cur = v.clone();
        for _ in 0..k {
            cur = self.apply(&cur);
        }
        cur
    }
}

/// `𝔡 v`, tabulating the boundary on the fly.
pub fn boundary(model: &SurfaceModel, v: &FockVector) -> FockVector {
    Boundary::new(model, max_weight_of(v)).apply(v)
}

/// `q_m^{(k)}(α) v = Σ_j (-1)^j C(k,j) 𝔡^{k-j} q_m(α) 𝔡^j v`; negative `m`
/// gives the annihilation analogue.
pub fn iterated_derivative_apply(
    model: &SurfaceModel,
    bd: &Boundary,
    k: usize,
    m: i32,
    alpha: &SurfaceClass,
    v: &FockVector,
) -> FockVector {
    let mut out = FockVector::zero();
    let mut dj = v.clone();
    for j in 0..=k {
        let inner = apply_q(model, m, alpha, &dj);
        let term = bd.apply_power(k - j, &inner);
        let c = binomial(k as i64, j as i64) * if j % 2 == 1 { qi(-1) } else { qi(1) };
        out.add_scaled(&term, &c);
        if j < k {
            dj = bd.apply(&dj);
        }
    }
    out
}

/// A linear operator restricted to one block, in the canonical monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorBlock {
    pub source: (usize, Option<usize>),
    pub target: (usize, Option<usize>),
    pub rows: usize,
    pub cols: usize,
    /// Column `j` is the image of the `j`-th source monomial.
    pub columns: Vec<SparseVec>,
    pub odd: bool,
}

impl OperatorBlock {
    /// Matrix of `f` from weight block `n` (optionally one degree slice) to weight `n + shift`.
    pub fn build(
        model: &SurfaceModel,
        space: &FockSpace,
        n: usize,
        degree: Option<usize>,
        shift: i32,
        odd: bool,
        f: impl Fn(&FockVector) -> FockVector,
    ) -> OperatorBlock {
        let target_n = (n as i32 + shift) as usize;
        let sources: Vec<&NakajimaMonomial> = space
            .block(n)
            .iter()
            .filter(|m| degree.is_none_or(|d| m.degree(model) == d))
            .collect();
        let columns = sources
            .iter()
            .map(|m| space.coords(&f(&FockVector::monomial((*m).clone(), qi(1)))))
            .collect();
        OperatorBlock {
            source: (n, degree),
            target: (target_n, None),
            rows: space.block(target_n).len(),
            cols: sources.len(),
            columns,
            odd,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }
}

/// Matrix of `q_m^{(k)}(α)` on the weight-`n` block.
pub fn iterated_derivative(model: &SurfaceModel, k: usize, m: u32, alpha: &SurfaceClass, n: usize) -> OperatorBlock {
    let top = n + m as usize;
    let space = FockSpace::new(model, top);
    let bd = Boundary::new(model, top);
    OperatorBlock::build(model, &space, n, None, m as i32, model.parity(alpha), |v| {
        iterated_derivative_apply(model, &bd, k, m as i32, alpha, v)
    })
}

/// `S_m(γ) v`, the `t^m` coefficient of `exp(Σ_{n>0} ((-1)^{n-1}/n) q_n(γ) tⁿ)` applied to `v`.
pub fn vertex_apply(model: &SurfaceModel, m: usize, gamma: &SurfaceClass, v: &FockVector) -> Result<FockVector> {
    if model.parity(gamma) || model.homogeneous_degree(gamma).is_some_and(|d| d % 2 == 1) {
        return Err(HilbError::OddClassRejected("vertex operators need an even class".into()));
    }
    let mut s: Vec<FockVector> = vec![v.clone()];
    for k in 1..=m {
        let mut acc = FockVector::zero();
        for n in 1..=k {
            let term = create(model, n as u32, gamma, &s[k - n]);
            let sign = if (n - 1) % 2 == 1 { qi(-1) } else { qi(1) };
            acc.add_scaled(&term, &sign);
        }
        s.push(acc.scaled(&q(1, k as i64)));
    }
    Ok(s.pop().expect("nonempty"))
}

/// `S_m(γ)|0⟩`.
pub fn vertex(model: &SurfaceModel, m: usize, gamma: &SurfaceClass) -> Result<FockVector> {
    vertex_apply(model, m, gamma, &FockVector::vacuum())
}

/// Matrix of `S_m(γ)` on the weight-`n` block.
pub fn vertex_block(model: &SurfaceModel, m: usize, gamma: &SurfaceClass, n: usize) -> Result<OperatorBlock> {
    vertex(model, 0, gamma)?;
    let space = FockSpace::new(model, n + m);
    Ok(OperatorBlock::build(model, &space, n, None, m as i32, false, |v| {
        vertex_apply(model, m, gamma, v).expect("even class")
    }))
}

/// The relations understood by [`check_relation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Heisenberg,
    Derivative,
    VirasoroQ,
    CubicBoundary,
    SuperJacobi,
}

impl Relation {
    pub const ALL: [Relation; 5] = [
        Relation::Heisenberg,
        Relation::Derivative,
        Relation::VirasoroQ,
        Relation::CubicBoundary,
        Relation::SuperJacobi,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Relation::Heisenberg => "heisenberg",
            Relation::Derivative => "derivative",
            Relation::VirasoroQ => "virasoro-q",
            Relation::CubicBoundary => "cubic-boundary",
            Relation::SuperJacobi => "super-jacobi",
        }
    }

    pub fn parse(s: &str) -> Result<Relation> {
        Relation::ALL
            .iter()
            .copied()
            .find(|r| r.id() == s.trim())
            .ok_or_else(|| HilbError::Parse(format!("unknown relation '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub relation: Relation,
    pub pass: bool,
    /// Number of (operator arguments, source monomial) instances checked.
    pub checked: usize,
    /// Description of the first nonzero residual entry.
    pub residual: Option<String>,
}

/// Wall-clock limit for long checks.
#[derive(Clone, Copy, Debug)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None }
    }

    pub fn seconds(s: u64) -> Self {
        Budget {
            deadline: Some(Instant::now() + std::time::Duration::from_secs(s)),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(HilbError::Resource("time budget exhausted".into())),
            _ => Ok(()),
        }
    }
}

struct Residual<'a> {
    model: &'a SurfaceModel,
    checked: usize,
    first: Option<String>,
}

impl Residual<'_> {
    fn record(&mut self, what: impl FnOnce() -> String, mono: &NakajimaMonomial, diff: &FockVector) {
        self.checked += 1;
        if self.first.is_none() && !diff.is_zero() {
            let (m, c) = diff.sorted().into_iter().next().expect("nonzero");
            self.first = Some(format!(
                "{} on {}: coefficient {} at {}",
                what(),
                mono.display(self.model),
                c,
                m.display(self.model)
            ));
        }
    }
}

fn in_range(w: usize, shifts: &[i32], max: usize) -> bool {
    shifts.iter().all(|s| {
        let t = w as i32 + s;
        t >= 0 && t as usize <= max
    })
}

fn nonzero_range(max: usize) -> Vec<i32> {
    let m = max as i32;
    (-m..=m).filter(|&i| i != 0).collect()
}

/// Super-commutator `[A, B] v = A B v - (-1)^{|A||B|} B A v`.
fn bracket(
    a: impl Fn(&FockVector) -> FockVector,
    b: impl Fn(&FockVector) -> FockVector,
    odd: bool,
    v: &FockVector,
) -> FockVector {
    let mut out = a(&b(v));
    let ba = b(&a(v));
    if odd {
        out.add(&ba);
    } else {
        out.sub(&ba);
    }
    out
}

/// Verifies a relation as exact matrix identities on every block whose
/// source, intermediate and target weights lie in `0..=max_weight`, for all
/// basis-class arguments and all nonzero operator indices.
pub fn check_relation(relation: Relation, model: &SurfaceModel, max_weight: usize) -> Result<RelationReport> {
    check_relation_with(relation, model, max_weight, &Budget::unlimited())
}

pub fn check_relation_with(
    relation: Relation,
    model: &SurfaceModel,
    max_weight: usize,
    budget: &Budget,
) -> Result<RelationReport> {
    let space = FockSpace::new(model, max_weight);
    let dim = model.dim();
    let mut res = Residual {
        model,
        checked: 0,
        first: None,
    };
    let idx = nonzero_range(max_weight);
    match relation {
        Relation::Heisenberg => {
            for &i in &idx {
                for &j in &idx {
                    for a in 0..dim {
                        for b in 0..dim {
                            budget.check()?;
                            let (ea, eb) = (SurfaceClass::basis(a), SurfaceClass::basis(b));
                            let odd = model.is_odd(a) && model.is_odd(b);
                            let scalar = if i + j == 0 { qi(i as i64) * model.pair(a, b) } else { zero() };
                            for w in 0..=max_weight {
                                if !in_range(w, &[i, j, i + j], max_weight) {
                                    continue;
                                }
                                for mono in space.block(w) {
                                    let v = FockVector::monomial(mono.clone(), qi(1));
                                    let mut diff = bracket(|x| apply_q(model, i, &ea, x), |x| apply_q(model, j, &eb, x), odd, &v);
                                    diff.add_term(mono.clone(), -scalar.clone());
                                    res.record(
                                        || format!("[q{i}({}), q{j}({})]", name(model, a), name(model, b)),
                                        mono,
                                        &diff,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        Relation::Derivative => {
            for &n in &idx {
                for a in 0..dim {
                    let ea = SurfaceClass::basis(a);
                    let qp = QPrime::new(model, n, &ea, max_weight);
                    let excess = ExcessClass::new(model, n.abs()).value;
                    for &m in &idx {
                        for b in 0..dim {
                            budget.check()?;
                            let eb = SurfaceClass::basis(b);
                            let odd = model.is_odd(a) && model.is_odd(b);
                            let ab = model.cup(&ea, &eb);
                            let scalar = if n + m == 0 {
                                -model.integrate(&model.cup(&excess, &ab))
                            } else {
                                zero()
                            };
                            let nm = qi(-(n as i64) * (m as i64));
                            for w in 0..=max_weight {
                                if !in_range(w, &[n, m, n + m], max_weight) {
                                    continue;
                                }
                                for mono in space.block(w) {
                                    let v = FockVector::monomial(mono.clone(), qi(1));
                                    let mut diff = bracket(|x| qp.apply(model, x), |x| apply_q(model, m, &eb, x), odd, &v);
                                    let rhs = apply_q(model, n + m, &ab, &v);
                                    diff.add_scaled(&rhs, &-nm.clone());
                                    diff.add_term(mono.clone(), -scalar.clone());
                                    res.record(
                                        || format!("[q'{n}({}), q{m}({})]", name(model, a), name(model, b)),
                                        mono,
                                        &diff,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        Relation::VirasoroQ => {
            let bd = Boundary::new(model, max_weight);
            for &n in &idx {
                for a in 0..dim {
                    budget.check()?;
                    let ea = SurfaceClass::basis(a);
                    let qp = QPrime::new(model, n, &ea, max_weight);
                    for w in 0..=max_weight {
                        if !in_range(w, &[n], max_weight) {
                            continue;
                        }
                        for mono in space.block(w) {
                            let v = FockVector::monomial(mono.clone(), qi(1));
                            let mut diff = bracket(|x| bd.apply(x), |x| apply_q(model, n, &ea, x), false, &v);
                            diff.sub(&qp.apply(model, &v));
                            res.record(|| format!("[d, q{n}({})] - q'{n}", name(model, a)), mono, &diff);
                        }
                    }
                }
            }
        }
        Relation::CubicBoundary => {
            let cubic = CubicBoundary::new(model, max_weight);
            let bd = Boundary::new(model, max_weight);
            for w in 0..=max_weight {
                budget.check()?;
                for mono in space.block(w) {
                    let v = FockVector::monomial(mono.clone(), qi(1));
                    let mut diff = cubic.apply(model, &v);
                    diff.sub(&bd.apply(&v));
                    res.record(|| "-(1/6) Σ :qqq:(δ) - d".to_string(), mono, &diff);
                }
            }
        }
        Relation::SuperJacobi => {
            // [d, [q_n(α), q_m(β)]] = [[d, q_n(α)], q_m(β)] + [q_n(α), [d, q_m(β)]],
            // where the left side vanishes because the inner bracket is central.
            for &n in &idx {
                for a in 0..dim {
                    let ea = SurfaceClass::basis(a);
                    let qn = QPrime::new(model, n, &ea, max_weight);
                    for &m in &idx {
                        for b in 0..dim {
                            budget.check()?;
                            let eb = SurfaceClass::basis(b);
                            let qm = QPrime::new(model, m, &eb, max_weight);
                            let odd = model.is_odd(a) && model.is_odd(b);
                            for w in 0..=max_weight {
                                if !in_range(w, &[n, m, n + m], max_weight) {
                                    continue;
                                }
                                for mono in space.block(w) {
                                    let v = FockVector::monomial(mono.clone(), qi(1));
                                    let mut diff = bracket(|x| qn.apply(model, x), |x| apply_q(model, m, &eb, x), odd, &v);
                                    let second = bracket(|x| apply_q(model, n, &ea, x), |x| qm.apply(model, x), odd, &v);
                                    diff.add(&second);
                                    res.record(
                                        || format!("jacobi(d, q{n}({}), q{m}({}))", name(model, a), name(model, b)),
                                        mono,
                                        &diff,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(RelationReport {
        relation,
        pass: res.first.is_none(),
        checked: res.checked,
        residual: res.first,
    })
}

fn name(model: &SurfaceModel, i: usize) -> &str {
    &model.basis()[i].name
}

/// `-(1/6) Σ_{l₁+l₂+l₃=0} :q_{l₁} q_{l₂} q_{l₃}:(δ_X)` with `δ_X = τ₃*(1)`.
#[derive(Clone, Debug)]
pub struct CubicBoundary {
    parts: Vec<NormalOrdered>,
}

impl CubicBoundary {
    pub fn new(model: &SurfaceModel, max_weight: usize) -> Self {
        let delta = model.coproduct(3, &model.unit()).expect("arity 3");
        let w = max_weight as i32;
        let mut parts = Vec::new();
        for l1 in -w..=w {
            for l2 in -w..=w {
                let l3 = -l1 - l2;
                if l1 == 0 || l2 == 0 || l3 == 0 || l3.abs() > w {
                    continue;
                }
                let ann: i32 = [l1, l2, l3].iter().filter(|&&l| l < 0).map(|l| -l).sum();
                if ann > w {
                    continue;
                }
                parts.push(NormalOrdered::new(model, &[l1, l2, l3], &delta).expect("arity 3"));
            }
        }
        CubicBoundary { parts }
    }

    pub fn apply(&self, model: &SurfaceModel, v: &FockVector) -> FockVector {
        let mut out = FockVector::zero();
        let c = q(-1, 6);
        for (m, x) in v.iter() {
            let cx = x * &c;
            for p in &self.parts {
                p.apply_mono_into(model, m, &cx, &mut out);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilate, normalize};
    use crate::frobenius::{k3, p1xp1, p2, t4};

    fn one_q1(model: &SurfaceModel) -> FockVector {
        create(model, 1, &model.unit(), &FockVector::vacuum())
    }

    #[test]
    fn normal_ordering_examples() {
        for model in [p2(), t4(), k3()] {
            let tau = model.coproduct(2, &model.unit()).unwrap();
            let got = normal_ordered_apply(&model, &[2, -1], &tau, &one_q1(&model)).unwrap();
            let expected = create(&model, 2, &model.unit(), &FockVector::vacuum()).scaled(&qi(-1));
            assert_eq!(got, expected);
            let swapped = normal_ordered_apply(&model, &[-1, 2], &tau, &one_q1(&model)).unwrap();
            assert_eq!(swapped, expected);
            assert!(normal_ordered_apply(&model, &[0, 1], &tau, &one_q1(&model))
                .unwrap()
                .is_zero());
            assert!(matches!(
                normal_ordered_apply(&model, &[1, 1, 1], &tau, &one_q1(&model)),
                Err(HilbError::ArityMismatch { .. })
            ));
        }
    }

    #[test]
    fn virasoro_examples() {
        for model in [p2(), k3(), t4()] {
            assert!(virasoro(&model, 1, &model.unit(), &FockVector::vacuum()).is_zero());
            let expected = create(&model, 2, &model.unit(), &FockVector::vacuum()).scaled(&qi(-1));
            assert_eq!(virasoro(&model, 1, &model.unit(), &one_q1(&model)), expected);
        }
    }

    #[test]
    fn virasoro_commutator_with_creation() {
        let model = p2();
        let space = FockSpace::new(&model, 3);
        for n in -2i32..=2 {
            for m in -2i32..=2 {
                if m == 0 || n + m == 0 {
                    continue;
                }
                for a in 0..model.dim() {
                    for b in 0..model.dim() {
                        let (ea, eb) = (SurfaceClass::basis(a), SurfaceClass::basis(b));
                        let ab = model.cup(&ea, &eb);
                        for w in 0..=3usize {
                            if !in_range(w, &[n, m, n + m], 3) {
                                continue;
                            }
                            for mono in space.block(w) {
                                let v = FockVector::monomial(mono.clone(), qi(1));
                                let mut diff =
                                    bracket(|x| virasoro(&model, n, &ea, x), |x| apply_q(&model, m, &eb, x), false, &v);
                                diff.add_scaled(&apply_q(&model, n + m, &ab, &v), &qi(m as i64));
                                assert!(diff.is_zero(), "n={n} m={m} a={a} b={b}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn q_prime_examples() {
        let model = p2();
        let space = FockSpace::new(&model, 3);
        let h = SurfaceClass::basis(1);
        for mono in space.block(1) {
            let v = FockVector::monomial(mono.clone(), qi(1));
            let mut expected = virasoro(&model, 2, &h, &v).scaled(&qi(2));
            expected.sub(&create(&model, 2, &model.cup(model.c1(), &h), &v));
            assert_eq!(q_prime(&model, 2, &h, &v), expected);
        }
        // [q'_1(α), q_m(1)] = -m q_{m+1}(α)
        for m in 1..=2u32 {
            for w in 0..=(3 - m as usize - 1) {
                for mono in space.block(w) {
                    let v = FockVector::monomial(mono.clone(), qi(1));
                    let lhs = bracket(
                        |x| q_prime(&model, 1, &h, x),
                        |x| create(&model, m, &model.unit(), x),
                        false,
                        &v,
                    );
                    let rhs = create(&model, m + 1, &h, &v).scaled(&-qi(m as i64));
                    assert_eq!(lhs, rhs);
                }
            }
        }
        // Excess: [q'_2(α), q_{-2}(β)] = -∫ e_2 αβ with e_2 = 2 c_1.
        assert_eq!(ExcessClass::new(&model, 2).value, model.c1().scale(&qi(2)));
        let pt = SurfaceClass::basis(2);
        let scalar = -model.integrate(&model.cup(&model.c1().scale(&qi(2)), &h));
        assert_eq!(scalar, qi(-6));
        for v in [FockVector::vacuum(), create(&model, 2, &pt, &FockVector::vacuum())] {
            let lhs = bracket(
                |x| q_prime(&model, 2, &model.unit(), x),
                |x| annihilate(&model, 2, &h, x),
                false,
                &v,
            );
            assert_eq!(lhs, v.scaled(&scalar));
        }
    }

    #[test]
    fn boundary_examples() {
        for model in [p2(), k3(), t4(), p1xp1()] {
            assert!(boundary(&model, &FockVector::vacuum()).is_zero());
            assert!(boundary(&model, &one_q1(&model)).is_zero());
            let one2 = normalize(&model, &[(1, model.unit()), (1, model.unit())]).scaled(&q(1, 2));
            let expected = create(&model, 2, &model.unit(), &FockVector::vacuum()).scaled(&q(-1, 2));
            assert_eq!(boundary(&model, &one2), expected);
        }
    }

    #[test]
    fn boundary_is_independent_of_factorization() {
        for model in [p2(), t4()] {
            let bd = Boundary::new(&model, 3);
            for w in 1..=3 {
                for mono in basis(&model, w) {
                    for pos in 0..mono.len() {
                        let (m, a) = mono.factors().nth(pos).unwrap();
                        let (odd_before, rest) = mono.remove(&model, pos);
                        let sign = if odd_before && model.is_odd(a) { qi(-1) } else { qi(1) };
                        let ea = SurfaceClass::basis(a);
                        let r = FockVector::monomial(rest, qi(1));
                        let mut alt = q_prime(&model, m as i32, &ea, &r);
                        alt.add(&create(&model, m, &ea, &bd.apply(&r)));
                        assert_eq!(alt.scaled(&sign), *bd.column(&mono), "{}", mono.display(&model));
                    }
                }
            }
        }
    }

    #[test]
    fn iterated_derivative_two_ways() {
        let model = k3();
        let k0 = iterated_derivative(&model, 0, 1, &model.unit(), 1);
        let space = FockSpace::new(&model, 2);
        let direct = OperatorBlock::build(&model, &space, 1, None, 1, false, |v| create(&model, 1, &model.unit(), v));
        assert_eq!(k0, direct);
        let k1 = iterated_derivative(&model, 1, 1, &model.unit(), 1);
        let via_prime = OperatorBlock::build(&model, &space, 1, None, 1, false, |v| q_prime(&model, 1, &model.unit(), v));
        assert_eq!(k1, via_prime);
        // Second derivative on q1(1)|0>: ad(d)^2 vs. q' of the Virasoro expansion.
        let bd = Boundary::new(&model, 2);
        let v = one_q1(&model);
        let two = iterated_derivative_apply(&model, &bd, 2, 1, &model.unit(), &v);
        let mut alt = bd.apply(&q_prime(&model, 1, &model.unit(), &v));
        alt.sub(&q_prime(&model, 1, &model.unit(), &bd.apply(&v)));
        assert_eq!(two, alt);
    }

    #[test]
    fn vertex_examples() {
        let model = p2();
        let h = SurfaceClass::basis(1);
        assert_eq!(vertex(&model, 0, &h).unwrap(), FockVector::vacuum());
        assert_eq!(vertex(&model, 1, &h).unwrap(), create(&model, 1, &h, &FockVector::vacuum()));
        let mut s2 = normalize(&model, &[(1, h.clone()), (1, h.clone())]).scaled(&q(1, 2));
        s2.add_scaled(&create(&model, 2, &h, &FockVector::vacuum()), &q(-1, 2));
        assert_eq!(vertex(&model, 2, &h).unwrap(), s2);
        let t = t4();
        let a1 = SurfaceClass::basis(1);
        assert!(matches!(vertex(&t, 1, &a1), Err(HilbError::OddClassRejected(_))));
        let blk = vertex_block(&model, 1, &h, 1).unwrap();
        assert_eq!((blk.rows, blk.cols), (9, 3));
    }

    #[test]
    fn small_relation_suites_pass() {
        for model in [p2(), t4()] {
            for r in [
                Relation::Heisenberg,
                Relation::Derivative,
                Relation::VirasoroQ,
                Relation::SuperJacobi,
            ] {
                let rep = check_relation(r, &model, 2).unwrap();
                assert!(rep.pass, "{:?} {:?}", r, rep.residual);
                assert!(rep.checked > 0);
            }
        }
        assert!(check_relation(Relation::CubicBoundary, &t4(), 2).unwrap().pass);
        let p = check_relation(Relation::CubicBoundary, &p2(), 2).unwrap();
        assert!(!p.pass && p.residual.is_some());
    }
}
