//! The Chen–Ruan cohomology ring of the symmetric product `SⁿX` as the
//! `Sₙ`-invariant part of the twisted group algebra `A{Sₙ}`, and its
//! comparison with the Hilbert-scheme ring.

use crate::error::{HilbError, Result};
use crate::fock::{FockSpace, NakajimaMonomial};
use crate::frobenius::{SurfaceClass, SurfaceModel, TensorClass};
use crate::heisenberg::Budget;
use crate::linalg::SparseVec;
use crate::rational::{factorial, is_zero, one, zero, Q};
use crate::taut_ring::{ring_table_with, RingTable};
use malachite_base::num::arithmetic::traits::{Abs, CheckedRoot, Pow};
use malachite_q::gaussian_rational::GaussianRational;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::collections::BTreeMap;

type Perm = SmallVec<[u8; 8]>;
type Labels = SmallVec<[usize; 8]>;

/// Cycles of a permutation, each starting at its minimum, ordered by minimum.
fn cycles(p: &[u8]) -> Vec<Vec<usize>> {
    let n = p.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x);
            x = p[x] as usize;
        }
        out.push(c);
    }
    out
}

fn compose(s: &[u8], t: &[u8]) -> Perm {
    t.iter().map(|&x| s[x as usize]).collect()
}

fn all_perms(n: usize) -> Vec<Perm> {
    fn rec(cur: &mut Vec<u8>, used: &mut Vec<bool>, out: &mut Vec<Perm>) {
        if cur.len() == used.len() {
            out.push(cur.iter().cloned().collect());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i as u8);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// An element `(σ, ⊗_c a_c)` of the `σ`-sector, one class per cycle of `σ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorElement {
    /// `perm[i]` is the image of `i`.
    pub perm: Vec<usize>,
    /// Labels of the cycles of `perm`, ordered by their minimal element.
    pub labels: Vec<SurfaceClass>,
}

impl SectorElement {
    pub fn new(perm: Vec<usize>, labels: Vec<SurfaceClass>) -> Result<Self> {
        let p: Perm = perm.iter().map(|&x| x as u8).collect();
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (0..perm.len()).collect::<Vec<_>>() {
            return Err(HilbError::PreconditionFailed("not a permutation".into()));
        }
        if cycles(&p).len() != labels.len() {
            return Err(HilbError::PreconditionFailed("labels must cover the cycles exactly".into()));
        }
        Ok(SectorElement { perm, labels })
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        cycles(&self.perm.iter().map(|&x| x as u8).collect::<Perm>())
    }

    /// `Σ (|c| - 1)` over the cycles.
    pub fn age(&self) -> usize {
        self.perm.len() - self.labels.len()
    }

    /// `2·age + Σ deg(label)` for homogeneous labels.
    pub fn cr_degree(&self, model: &SurfaceModel) -> Option<usize> {
        let mut d = 2 * self.age();
        for l in &self.labels {
            d += model.homogeneous_degree(l)?;
        }
        Some(d)
    }

    fn expand(&self) -> Vec<((Perm, Labels), Q)> {
        let p: Perm = self.perm.iter().map(|&x| x as u8).collect();
        let mut out: Vec<(Labels, Q)> = vec![(Labels::new(), one())];
        for l in &self.labels {
            let mut next = Vec::new();
            for (ls, c) in &out {
                for (i, x) in l.terms() {
                    let mut ls2 = ls.clone();
                    ls2.push(*i);
                    next.push((ls2, c * x));
                }
            }
            out = next;
        }
        out.into_iter().map(|(ls, c)| ((p.clone(), ls), c)).collect()
    }
}

/// Product engine with cached coproducts and Euler-class powers.
struct Engine<'a> {
    model: &'a SurfaceModel,
    coproducts: FxHashMap<(usize, usize), TensorClass>,
    euler: SurfaceClass,
}

impl<'a> Engine<'a> {
    fn new(model: &'a SurfaceModel) -> Result<Self> {
        if model.has_odd_classes() {
            return Err(HilbError::OddCohomologyUnsupported);
        }
        Ok(Engine {
            model,
            coproducts: FxHashMap::default(),
            euler: model.euler_class(),
        })
    }

    fn coproduct(&mut self, r: usize, i: usize) -> &TensorClass {
        let model = self.model;
        self.coproducts
            .entry((r, i))
            .or_insert_with(|| model.coproduct(r, &SurfaceClass::basis(i)).expect("arity ≥ 1"))
    }

    /// `(σ, a)·(τ, b)` on basis labels, accumulated into `out` with weight `coef`.
    fn product_into(&mut self, s: &[u8], a: &[usize], t: &[u8], b: &[usize], coef: &Q, out: &mut FxHashMap<(Perm, Labels), Q>) {
        let model = self.model;
        let n = s.len();
        let st = compose(s, t);
        let (cs, ct, cst) = (cycles(s), cycles(t), cycles(&st));
        // Orbits of ⟨σ, τ⟩ via union-find.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for i in 0..n {
            for j in [s[i] as usize, t[i] as usize] {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let mut orbit_ids: Vec<usize> = roots.clone();
        orbit_ids.sort_unstable();
        orbit_ids.dedup();
        let orbit_of = |x: usize| orbit_ids.binary_search(&roots[x]).expect("root");
        let k = orbit_ids.len();
        let mut size = vec![0usize; k];
        for &r in &roots {
            size[orbit_ids.binary_search(&r).expect("root")] += 1;
        }
        let mut class: Vec<SurfaceClass> = vec![model.unit(); k];
        let (mut r_s, mut r_t, mut r_st) = (vec![0usize; k], vec![0usize; k], vec![0usize; k]);
        for (c, &l) in cs.iter().zip(a) {
            let o = orbit_of(c[0]);
            r_s[o] += 1;
            class[o] = model.cup(&class[o], &SurfaceClass::basis(l));
        }
        for (c, &l) in ct.iter().zip(b) {
            let o = orbit_of(c[0]);
            r_t[o] += 1;
            class[o] = model.cup(&class[o], &SurfaceClass::basis(l));
        }
        let mut st_cycles_of: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (ci, c) in cst.iter().enumerate() {
            let o = orbit_of(c[0]);
            r_st[o] += 1;
            st_cycles_of[o].push(ci);
        }
        for o in 0..k {
            let twice = size[o] + 2 - r_s[o] - r_t[o];
            let twice = twice as i64 - r_st[o] as i64;
            debug_assert!(twice >= 0 && twice % 2 == 0);
            for _ in 0..twice / 2 {
                class[o] = model.cup(&class[o], &self.euler);
            }
            if class[o].is_zero() {
                return;
            }
        }
        // Distribute each orbit class over its στ-cycles.
        let mut partial: Vec<(Labels, Q)> = vec![(SmallVec::from_elem(usize::MAX, cst.len()), coef.clone())];
        for o in 0..k {
            let r = st_cycles_of[o].len();
            let mut terms: Vec<(Vec<usize>, Q)> = Vec::new();
            for (i, x) in class[o].terms() {
                if r == 1 {
                    terms.push((vec![*i], x.clone()));
                } else {
                    for (key, y) in self.coproduct(r, *i).iter() {
                        terms.push((key.clone(), x * y));
                    }
                }
            }
            let mut next = Vec::with_capacity(partial.len() * terms.len());
            for (ls, c) in &partial {
                for (key, y) in &terms {
                    let mut ls2 = ls.clone();
                    for (slot, &ci) in st_cycles_of[o].iter().enumerate() {
                        ls2[ci] = key[slot];
                    }
                    next.push((ls2, c * y));
                }
            }
            partial = next;
        }
        for (ls, c) in partial {
            if is_zero(&c) {
                continue;
            }
            let e = out.entry((st.clone(), ls)).or_insert_with(zero);
            *e += c;
        }
    }
}

/// `h·(σ, a) = (hσh⁻¹, a moved along h)`.
fn conjugate(h: &[u8], s: &[u8], labels: &[usize]) -> (Perm, Labels) {
    let n = s.len();
    let mut hinv = vec![0u8; n];
    for (i, &x) in h.iter().enumerate() {
        hinv[x as usize] = i as u8;
    }
    let p: Perm = (0..n).map(|i| h[s[hinv[i] as usize] as usize]).collect();
    let old = cycles(s);
    let new = cycles(&p);
    let mut ls: Labels = SmallVec::from_elem(0, new.len());
    for (c, &l) in old.iter().zip(labels) {
        let img = h[c[0]] as usize;
        let pos = new.iter().position(|d| d.contains(&img)).expect("cycle image");
        ls[pos] = l;
    }
    (p, ls)
}

/// The Nakajima monomial with the same cycle type and labels.
fn canonical(model: &SurfaceModel, p: &[u8], labels: &[usize]) -> NakajimaMonomial {
    let word: Vec<(u32, usize)> = cycles(p).iter().zip(labels).map(|(c, &l)| (c.len() as u32, l)).collect();
    NakajimaMonomial::from_word(model, &word).expect("even classes").1
}

/// Representative of the symmetrized basis element attached to a monomial:
/// consecutive cycles in canonical factor order.
fn representative(mono: &NakajimaMonomial) -> (Perm, Labels) {
    let mut p: Perm = SmallVec::new();
    let mut labels = Labels::new();
    let mut start = 0u8;
    for (m, a) in mono.factors() {
        for j in 0..m as u8 {
            p.push(if j + 1 == m as u8 { start } else { start + j + 1 });
        }
        labels.push(a);
        start += m as u8;
    }
    (p, labels)
}

/// The `Sₙ`-invariant basis: one symmetrized representative per Nakajima monomial.
pub fn cr_basis(model: &SurfaceModel, n: usize) -> Result<Vec<SectorElement>> {
    if model.has_odd_classes() {
        return Err(HilbError::OddCohomologyUnsupported);
    }
    Ok(crate::fock::basis(model, n)
        .iter()
        .map(|m| {
            let (p, ls) = representative(m);
            SectorElement {
                perm: p.iter().map(|&x| x as usize).collect(),
                labels: ls.iter().map(|&l| SurfaceClass::basis(l)).collect(),
            }
        })
        .collect())
}

/// The product in `A{Sₙ}` of two sector elements.
pub fn cr_product(model: &SurfaceModel, x: &SectorElement, y: &SectorElement) -> Result<Vec<(SectorElement, Q)>> {
    if x.perm.len() != y.perm.len() {
        return Err(HilbError::PreconditionFailed("sector elements of different n".into()));
    }
    let mut eng = Engine::new(model)?;
    let mut acc: FxHashMap<(Perm, Labels), Q> = FxHashMap::default();
    for ((s, a), c) in x.expand() {
        for ((t, b), d) in y.expand() {
            eng.product_into(&s, &a, &t, &b, &(&c * &d), &mut acc);
        }
    }
    let mut grouped: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Q>> = BTreeMap::new();
    for ((p, ls), c) in acc {
        if !is_zero(&c) {
            grouped
                .entry(p.iter().map(|&x| x as usize).collect())
                .or_default()
                .insert(ls.to_vec(), c);
        }
    }
    // One output element per sector and label tuple.
    let mut out = Vec::new();
    for (perm, terms) in grouped {
        for (ls, c) in terms {
            out.push((
                SectorElement {
                    perm: perm.clone(),
                    labels: ls.iter().map(|&l| SurfaceClass::basis(l)).collect(),
                },
                c,
            ));
        }
    }
    Ok(out)
}

/// Structure constants of `H*_CR(SⁿX)` in the symmetrized basis indexed like
/// the Nakajima basis of the weight-`n` block.
pub fn cr_ring(model: &SurfaceModel, n: usize, budget: &Budget) -> Result<RingTable> {
    let mut eng = Engine::new(model)?;
    let space = FockSpace::new(model, n);
    let basis: Vec<NakajimaMonomial> = space.block(n).to_vec();
    let reps: Vec<(Perm, Labels)> = basis.iter().map(representative).collect();
    let degrees: Vec<usize> = basis.iter().map(|m| m.degree(model)).collect();
    let perms = all_perms(n);
    let mut constants: BTreeMap<(usize, usize), SparseVec> = BTreeMap::new();
    for i in 0..basis.len() {
        budget.check()?;
        for j in 0..basis.len() {
            if degrees[i] + degrees[j] > 4 * n {
                continue;
            }
            let mut acc: FxHashMap<(Perm, Labels), Q> = FxHashMap::default();
            for h in &perms {
                let (t, b) = conjugate(h, &reps[j].0, &reps[j].1);
                eng.product_into(&reps[i].0, &reps[i].1, &t, &b, &one(), &mut acc);
            }
            let mut row: BTreeMap<usize, Q> = BTreeMap::new();
            for ((p, ls), c) in acc {
                let k = space.position(&canonical(model, &p, &ls)).expect("weight-n monomial");
                *row.entry(k).or_insert_with(zero) += c;
            }
            let row: SparseVec = row.into_iter().filter(|(_, c)| !is_zero(c)).collect();
            if !row.is_empty() {
                constants.insert((i, j), row);
            }
        }
    }
    let unit_mono = NakajimaMonomial::from_word(model, &vec![(1, model.unit_index()); n])
        .expect("even")
        .1;
    Ok(RingTable {
        n,
        odd: vec![false; basis.len()],
        unit: space.position(&unit_mono).expect("unit"),
        basis,
        degrees,
        constants,
        form: BTreeMap::new(),
        unit_scale: one() / factorial(n as u32),
    })
}

/// Outcome of [`compare_rings`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub n: usize,
    /// `c_1, …, c_n`, scalars attached to cycles of each length.
    pub cycle_scalars: Vec<GaussianRational>,
    /// `Σ |Re| + |Im|` of the homomorphism defects over all structure constants.
    pub residual: Q,
    pub iso_found: bool,
    /// Whether every scalar is rational; otherwise they need `√-1`.
    pub rational: bool,
    /// Some scalar was not determined by a solvable equation.
    pub inconclusive: bool,
    pub equations: usize,
}

pub fn format_gaussian(z: &GaussianRational) -> String {
    let (re, im) = (&z.real, &z.imaginary);
    match (is_zero(re), is_zero(im)) {
        (_, true) => re.to_string(),
        (true, false) if *im == one() => "i".to_string(),
        (true, false) if *im == -one() => "-i".to_string(),
        (true, false) => format!("{im}*i"),
        (false, false) => format!("{re}{}{}*i", if *im > 0 { "+" } else { "" }, im),
    }
}

struct Equation {
    exps: Vec<i64>,
    cr: Q,
    hilb: Q,
}

fn cycle_counts(mono: &NakajimaMonomial, n: usize) -> Vec<i64> {
    let mut k = vec![0i64; n + 1];
    for (m, _) in mono.factors() {
        k[m as usize] += 1;
    }
    k
}

fn gq(x: &Q) -> GaussianRational {
    GaussianRational {
        real: x.clone(),
        imaginary: zero(),
    }
}

fn roots_of_unity(k: u64) -> Vec<GaussianRational> {
    let units = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    units
        .iter()
        .map(|&(a, b)| GaussianRational {
            real: Q::from(a),
            imaginary: Q::from(b),
        })
        .filter(|u| {
            u.clone().pow(k)
                == GaussianRational {
                    real: one(),
                    imaginary: zero(),
                }
        })
        .collect()
}

fn monomial_value(c: &[GaussianRational], exps: &[i64], upto: usize) -> GaussianRational {
    let mut v = GaussianRational {
        real: one(),
        imaginary: zero(),
    };
    for m in 1..=upto {
        if exps[m] != 0 {
            v *= c[m].clone().pow(exps[m]);
        }
    }
    v
}

fn residual(c: &[GaussianRational], eqs: &[Equation], n: usize) -> Q {
    let mut total = zero();
    for e in eqs {
        let lhs = monomial_value(c, &e.exps, n) * gq(&e.cr);
        let d = lhs - gq(&e.hilb);
        total += d.real.abs() + d.imaginary.abs();
    }
    total
}

/// Searches the family `q_λ(α) ↦ Π c_{m_i} · Sym(σ_λ, α)` for a ring
/// isomorphism `H*(X^[n]) → H*_CR(SⁿX)`, with `c_m` in `Q(√-1)`.
pub fn compare_rings(model: &SurfaceModel, n: usize) -> Result<CompareReport> {
    compare_rings_with(model, n, false, &Budget::unlimited())
}

pub fn compare_rings_with(model: &SurfaceModel, n: usize, allow_nonzero_c1: bool, budget: &Budget) -> Result<CompareReport> {
    if model.has_odd_classes() {
        return Err(HilbError::OddCohomologyUnsupported);
    }
    if !allow_nonzero_c1 && !model.c1().is_zero() {
        return Err(HilbError::PreconditionFailed("the comparison requires c1 = 0".into()));
    }
    let hilb = ring_table_with(model, n, budget)?;
    let cr = cr_ring(model, n, budget)?;
    let counts: Vec<Vec<i64>> = hilb.basis.iter().map(|m| cycle_counts(m, n)).collect();
    let mut eqs = Vec::new();
    let empty: SparseVec = Vec::new();
    let keys: std::collections::BTreeSet<(usize, usize)> = hilb.constants.keys().chain(cr.constants.keys()).cloned().collect();
    for (i, j) in keys {
        let h: BTreeMap<usize, Q> = hilb.constants.get(&(i, j)).unwrap_or(&empty).iter().cloned().collect();
        let x: BTreeMap<usize, Q> = cr.constants.get(&(i, j)).unwrap_or(&empty).iter().cloned().collect();
        let ks: std::collections::BTreeSet<usize> = h.keys().chain(x.keys()).cloned().collect();
        for k in ks {
            let exps: Vec<i64> = (0..=n).map(|m| counts[i][m] + counts[j][m] - counts[k][m]).collect();
            eqs.push(Equation {
                exps,
                cr: x.get(&k).cloned().unwrap_or_else(zero),
                hilb: h.get(&k).cloned().unwrap_or_else(zero),
            });
        }
    }
    // Depth-first over root choices, scalar by scalar.
    let mut best: Option<(Q, Vec<GaussianRational>, bool)> = None;
    let mut cur = vec![
        GaussianRational {
            real: one(),
            imaginary: zero()
        };
        n + 1
    ];
    search(1, n, &eqs, &mut cur, false, &mut best);
    let (res, c, inconclusive) = best.expect("at least one assignment");
    let rational = c[1..].iter().all(|z| is_zero(&z.imaginary));
    Ok(CompareReport {
        n,
        cycle_scalars: c[1..].to_vec(),
        iso_found: is_zero(&res),
        residual: res,
        rational,
        inconclusive,
        equations: eqs.len(),
    })
}

fn search(
    m: usize,
    n: usize,
    eqs: &[Equation],
    cur: &mut Vec<GaussianRational>,
    inconclusive: bool,
    best: &mut Option<(Q, Vec<GaussianRational>, bool)>,
) {
    if best.as_ref().is_some_and(|b| is_zero(&b.0)) {
        return;
    }
    if m > n {
        let r = residual(cur, eqs, n);
        if best.as_ref().is_none_or(|b| r < b.0) {
            *best = Some((r, cur.clone(), inconclusive));
        }
        return;
    }
    // The determining equation with the smallest exponent on c_m.
    let det = eqs
        .iter()
        .filter(|e| e.exps[m] != 0 && e.exps[m + 1..].iter().all(|&x| x == 0) && !is_zero(&e.cr) && !is_zero(&e.hilb))
        .min_by_key(|e| e.exps[m].abs());
    let candidates: Vec<GaussianRational> = match det {
        None => vec![GaussianRational {
            real: one(),
            imaginary: zero(),
        }],
        Some(e) => {
            let known = monomial_value(cur, &e.exps, m - 1) * gq(&e.cr);
            let mut value = gq(&e.hilb) / known;
            if e.exps[m] < 0 {
                value = GaussianRational {
                    real: one(),
                    imaginary: zero(),
                } / value;
            }
            let k = e.exps[m].unsigned_abs();
            match (&value).checked_root(k) {
                Some(r) => roots_of_unity(k).into_iter().map(|u| &r * u).collect(),
                None => Vec::new(),
            }
        }
    };
    if candidates.is_empty() {
        cur[m] = GaussianRational {
            real: one(),
            imaginary: zero(),
        };
        search(m + 1, n, eqs, cur, true, best);
        return;
    }
    for c in candidates {
        cur[m] = c;
        search(m + 1, n, eqs, cur, inconclusive, best);
    }
}
