//! Finite graded Frobenius algebras modelling `H*(X, Q)` of a closed
//! four-manifold, together with the Chern data `c1`, `c2` and the Künneth
//! diagonal coproducts.

use crate::error::{HilbError, Result};
use crate::linalg::{inverse, normalize, SparseVec};
use crate::rational::{is_zero, one, qi, sign_q, zero, Q};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElement {
    pub name: String,
    pub degree: u8,
}

/// A sparse rational combination of basis elements.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct SurfaceClass {
    terms: SparseVec,
}

impl SurfaceClass {
    pub fn zero() -> Self {
        SurfaceClass::default()
    }

    pub fn basis(i: usize) -> Self {
        SurfaceClass { terms: vec![(i, one())] }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Q)>) -> Self {
        SurfaceClass {
            terms: normalize(terms.into_iter().collect()),
        }
    }

    pub fn terms(&self) -> &[(usize, Q)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.terms
            .iter()
            .find(|(j, _)| *j == i)
            .map(|(_, x)| x.clone())
            .unwrap_or_else(zero)
    }

    pub fn add(&self, other: &SurfaceClass) -> SurfaceClass {
        SurfaceClass::from_terms(self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn scale(&self, c: &Q) -> SurfaceClass {
        if is_zero(c) {
            return SurfaceClass::zero();
        }
        SurfaceClass {
            terms: self.terms.iter().map(|(i, x)| (*i, x * c)).collect(),
        }
    }

    pub fn neg(&self) -> SurfaceClass {
        self.scale(&qi(-1))
    }
}

/// An element of `H*(X)^{⊗ arity}` written in the tensor basis. Terms are
/// keyed by basis indices in factor order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorClass {
    pub arity: usize,
    pub terms: BTreeMap<Vec<usize>, Q>,
}

impl TensorClass {
    pub fn zero(arity: usize) -> Self {
        TensorClass {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, key: Vec<usize>, c: Q) {
        debug_assert_eq!(key.len(), self.arity);
        let e = self.terms.entry(key.clone()).or_insert_with(zero);
        *e += c;
        if is_zero(e) {
            self.terms.remove(&key);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Raw description of a model, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceData {
    pub name: String,
    pub basis: Vec<BasisElement>,
    pub unit: usize,
    /// Sparse products `e_i · e_j`; missing pairs are zero.
    pub products: Vec<(usize, usize, SurfaceClass)>,
    pub integral: SurfaceClass,
    pub c1: SurfaceClass,
    pub c2: SurfaceClass,
}

#[derive(Clone, Debug)]
pub struct SurfaceModel {
    name: String,
    basis: Vec<BasisElement>,
    unit: usize,
    mult: Vec<Vec<SurfaceClass>>,
    integral: Vec<Q>,
    c1: SurfaceClass,
    c2: SurfaceClass,
    dual: Vec<SurfaceClass>,
    pair: Vec<Vec<Q>>,
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (b = {:?})", self.name, self.betti())
    }
}

fn check_class(c: &SurfaceClass, n: usize, what: &str) -> Result<()> {
    match c.terms().iter().find(|(i, _)| *i >= n) {
        Some((i, _)) => Err(HilbError::Schema(format!("{what} references basis index {i} out of range"))),
        None => Ok(()),
    }
}

/// Validates a model description and precomputes the dual basis.
pub fn load_surface(data: SurfaceData) -> Result<SurfaceModel> {
    let n = data.basis.len();
    let names = |i: usize| data.basis[i].name.clone();
    if n == 0 {
        return Err(HilbError::Schema("empty basis".into()));
    }
    if let Some(b) = data.basis.iter().find(|b| b.degree > 4) {
        return Err(HilbError::GradingViolation(format!("{} has degree {} > 4", b.name, b.degree)));
    }
    for i in 0..n {
        for j in 0..i {
            if data.basis[i].name == data.basis[j].name {
                return Err(HilbError::Schema(format!("duplicate basis name {}", data.basis[i].name)));
            }
        }
    }
    if data.unit >= n {
        return Err(HilbError::Schema(format!("unit index {} out of range", data.unit)));
    }
    let deg0: Vec<usize> = (0..n).filter(|&i| data.basis[i].degree == 0).collect();
    if deg0 != vec![data.unit] {
        return Err(HilbError::GradingViolation(format!(
            "expected exactly one degree-0 element (the unit), found {deg0:?}"
        )));
    }
    let mut mult = vec![vec![SurfaceClass::zero(); n]; n];
    for (i, j, c) in &data.products {
        if *i >= n || *j >= n {
            return Err(HilbError::Schema(format!("product entry ({i}, {j}) out of range")));
        }
        check_class(c, n, "product")?;
        mult[*i][*j] = mult[*i][*j].add(c);
    }
    check_class(&data.integral, n, "integral")?;
    check_class(&data.c1, n, "c1")?;
    check_class(&data.c2, n, "c2")?;
    let deg = |i: usize| data.basis[i].degree as usize;
    for i in 0..n {
        for j in 0..n {
            for (k, _) in mult[i][j].terms() {
                if deg(*k) != deg(i) + deg(j) {
                    return Err(HilbError::GradingViolation(format!(
                        "{}·{} has a component {} of the wrong degree",
                        names(i),
                        names(j),
                        names(*k)
                    )));
                }
            }
        }
    }
    for (k, _) in data.integral.terms() {
        if deg(*k) != 4 {
            return Err(HilbError::GradingViolation(format!(
                "integral is nonzero on {} of degree {}",
                names(*k),
                deg(*k)
            )));
        }
    }
    if data.c1.terms().iter().any(|(k, _)| deg(*k) != 2) {
        return Err(HilbError::GradingViolation("c1 must have degree 2".into()));
    }
    if data.c2.terms().iter().any(|(k, _)| deg(*k) != 4) {
        return Err(HilbError::GradingViolation("c2 must have degree 4".into()));
    }
    let u = data.unit;
    for i in 0..n {
        let e = SurfaceClass::basis(i);
        if mult[u][i] != e || mult[i][u] != e {
            return Err(HilbError::NonUnital(format!("{}·{} ≠ {}", names(u), names(i), names(i))));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let s = sign_q(deg(i) * deg(j) % 2 == 1);
            if mult[i][j] != mult[j][i].scale(&s) {
                return Err(HilbError::NonCommutative(names(i), names(j)));
            }
        }
    }
    let mul = |a: &SurfaceClass, b: &SurfaceClass| -> SurfaceClass {
        let mut acc = Vec::new();
        for (i, x) in a.terms() {
            for (j, y) in b.terms() {
                for (k, z) in mult[*i][*j].terms() {
                    acc.push((*k, x * y * z));
                }
            }
        }
        SurfaceClass::from_terms(acc)
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let left = mul(&mult[i][j], &SurfaceClass::basis(k));
                let right = mul(&SurfaceClass::basis(i), &mult[j][k]);
                if left != right {
                    return Err(HilbError::NonAssociative(names(i), names(j), names(k)));
                }
            }
        }
    }
    let integral: Vec<Q> = (0..n).map(|i| data.integral.coeff(i)).collect();
    let pairing: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| mult[i][j].terms().iter().fold(zero(), |acc, (k, x)| acc + x * &integral[*k]))
                .collect()
        })
        .collect();
    let inv =
        inverse(&pairing).ok_or_else(|| HilbError::DegeneratePairing(format!("pairing matrix of {} is singular", data.name)))?;
    // Dual basis e^i with ∫(e^i · e_j) = δ_ij, i.e. e^i = Σ_k (P^{-1})_{ik} e_k.
    let dual = inv
        .iter()
        .map(|row| SurfaceClass::from_terms(row.iter().cloned().enumerate()))
        .collect();
    Ok(SurfaceModel {
        name: data.name,
        basis: data.basis,
        unit: data.unit,
        mult,
        integral,
        c1: data.c1,
        c2: data.c2,
        dual,
        pair: pairing,
    })
}

impl SurfaceModel {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn basis(&self) -> &[BasisElement] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn unit_index(&self) -> usize {
        self.unit
    }

    pub fn unit(&self) -> SurfaceClass {
        SurfaceClass::basis(self.unit)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.basis[i].degree as usize
    }

    pub fn is_odd(&self, i: usize) -> bool {
        self.basis[i].degree % 2 == 1
    }

    pub fn has_odd_classes(&self) -> bool {
        self.basis.iter().any(|b| b.degree % 2 == 1)
    }

    pub fn c1(&self) -> &SurfaceClass {
        &self.c1
    }

    pub fn c2(&self) -> &SurfaceClass {
        &self.c2
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn betti(&self) -> [i64; 5] {
        let mut b = [0; 5];
        for e in &self.basis {
            b[e.degree as usize] += 1;
        }
        b
    }

    /// Signed dimension `Σ (-1)^{deg e_i}`.
    pub fn euler_characteristic(&self) -> i64 {
        let b = self.betti();
        b[0] - b[1] + b[2] - b[3] + b[4]
    }

    /// The common degree of all terms, if there is one.
    pub fn homogeneous_degree(&self, a: &SurfaceClass) -> Option<usize> {
        let mut it = a.terms().iter().map(|(i, _)| self.degree(*i));
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Parity of a homogeneous class; the zero class counts as even.
    pub fn parity(&self, a: &SurfaceClass) -> bool {
        a.terms().first().map(|(i, _)| self.is_odd(*i)).unwrap_or(false)
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &SurfaceClass {
        &self.mult[i][j]
    }

    pub fn cup(&self, a: &SurfaceClass, b: &SurfaceClass) -> SurfaceClass {
        let mut acc = Vec::new();
        for (i, x) in a.terms() {
            for (j, y) in b.terms() {
                for (k, z) in self.mult[*i][*j].terms() {
                    acc.push((*k, x * y * z));
                }
            }
        }
        SurfaceClass::from_terms(acc)
    }

    pub fn integrate(&self, a: &SurfaceClass) -> Q {
        a.terms().iter().fold(zero(), |acc, (i, x)| acc + x * &self.integral[*i])
    }

    pub fn pairing(&self, a: &SurfaceClass, b: &SurfaceClass) -> Q {
        self.integrate(&self.cup(a, b))
    }

    pub fn pairing_matrix(&self) -> Vec<Vec<Q>> {
        self.pair.clone()
    }

    /// `∫ e_i · e_j`.
    pub fn pair(&self, i: usize, j: usize) -> &Q {
        &self.pair[i][j]
    }

    /// The dual basis element `e^i`, characterised by `∫ e^i e_j = δ_ij`.
    pub fn dual(&self, i: usize) -> &SurfaceClass {
        &self.dual[i]
    }

    /// The iterated coproduct: `τ₁*(a) = a` and
    /// `τₖ*(a) = Σ_i τₖ₋₁*(a·e_i) ⊗ e^i`, so `τ₂*(a) = Σ_i (a·e_i) ⊗ e^i`.
    pub fn coproduct(&self, arity: usize, a: &SurfaceClass) -> Result<TensorClass> {
        let mut out = TensorClass::zero(arity);
        match arity {
            0 => return Err(HilbError::ArityMismatch { expected: 1, got: 0 }),
            1 => {
                for (i, x) in a.terms() {
                    out.add_term(vec![*i], x.clone());
                }
            }
            _ => {
                for i in 0..self.dim() {
                    let left = self.coproduct(arity - 1, &self.cup(a, &SurfaceClass::basis(i)))?;
                    for (key, x) in left.iter() {
                        for (r, y) in self.dual[i].terms() {
                            let mut k = key.clone();
                            k.push(*r);
                            out.add_term(k, x * y);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Koszul sign for bringing the tensor `x_1 ⊗ … ⊗ x_k` times `y_1 ⊗ … ⊗ y_k`
    /// into the form `x_1 y_1 ⊗ … ⊗ x_k y_k`.
    fn tensor_mul_sign(&self, x: &[usize], y: &[usize]) -> bool {
        let mut odd = false;
        for j in 0..y.len() {
            for xi in &x[j + 1..] {
                odd ^= self.is_odd(y[j]) && self.is_odd(*xi);
            }
        }
        odd
    }

    /// Product in the graded tensor algebra.
    pub fn tensor_mul(&self, a: &TensorClass, b: &TensorClass) -> TensorClass {
        assert_eq!(a.arity, b.arity);
        let mut out = TensorClass::zero(a.arity);
        for (x, cx) in a.iter() {
            for (y, cy) in b.iter() {
                let s = sign_q(self.tensor_mul_sign(x, y));
                let mut terms: Vec<(Vec<usize>, Q)> = vec![(Vec::new(), cx * cy * s)];
                for k in 0..a.arity {
                    let prod = &self.mult[x[k]][y[k]];
                    let mut next = Vec::new();
                    for (key, c) in &terms {
                        for (p, z) in prod.terms() {
                            let mut kk = key.clone();
                            kk.push(*p);
                            next.push((kk, c * z));
                        }
                    }
                    terms = next;
                }
                for (k, c) in terms {
                    out.add_term(k, c);
                }
            }
        }
        out
    }

    /// Multiplies out all tensor factors in order.
    pub fn multiply_out(&self, t: &TensorClass) -> SurfaceClass {
        let mut acc = SurfaceClass::zero();
        for (key, c) in t.iter() {
            let mut prod = self.unit().scale(c);
            for k in key {
                prod = self.cup(&prod, &SurfaceClass::basis(*k));
            }
            acc = acc.add(&prod);
        }
        acc
    }

    /// `∫ ⊗ … ⊗ ∫`.
    pub fn integrate_tensor(&self, t: &TensorClass) -> Q {
        t.iter().fold(zero(), |acc, (key, c)| {
            acc + key.iter().fold(c.clone(), |p, k| p * &self.integral[*k])
        })
    }

    /// Tensor product of classes.
    pub fn tensor(&self, parts: &[&SurfaceClass]) -> TensorClass {
        let mut terms: Vec<(Vec<usize>, Q)> = vec![(Vec::new(), one())];
        for part in parts {
            let mut next = Vec::new();
            for (key, c) in &terms {
                for (p, z) in part.terms() {
                    let mut kk = key.clone();
                    kk.push(*p);
                    next.push((kk, c * z));
                }
            }
            terms = next;
        }
        let mut out = TensorClass::zero(parts.len());
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// Swaps two adjacent tensor factors with the Koszul sign.
    pub fn swap_adjacent(&self, t: &TensorClass, pos: usize) -> TensorClass {
        let mut out = TensorClass::zero(t.arity);
        for (key, c) in t.iter() {
            let mut k = key.clone();
            let s = sign_q(self.is_odd(k[pos]) && self.is_odd(k[pos + 1]));
            k.swap(pos, pos + 1);
            out.add_term(k, c * s);
        }
        out
    }

    /// Applies a linear map to the tensor factor at `pos`, with the Koszul
    /// sign from moving a map of parity `odd_map` past the earlier factors.
    pub fn apply_on_factor(&self, t: &TensorClass, pos: usize, odd_map: bool, f: impl Fn(usize) -> TensorClass) -> TensorClass {
        let mut out_arity = None;
        let mut terms = Vec::new();
        for (key, c) in t.iter() {
            let passed = key[..pos].iter().filter(|&&i| self.is_odd(i)).count();
            let s = sign_q(odd_map && passed % 2 == 1);
            let image = f(key[pos]);
            out_arity.get_or_insert(t.arity - 1 + image.arity);
            for (ik, ic) in image.iter() {
                let mut k: Vec<usize> = key[..pos].to_vec();
                k.extend(ik);
                k.extend(&key[pos + 1..]);
                terms.push((k, c * ic * &s));
            }
        }
        let mut out = TensorClass::zero(out_arity.unwrap_or(t.arity));
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// The class `m(τ₂*(1))`.
    pub fn euler_class(&self) -> SurfaceClass {
        self.multiply_out(&self.coproduct(2, &self.unit()).expect("arity 2"))
    }

    /// The surface description this model was built from.
    pub fn to_data(&self) -> SurfaceData {
        let n = self.dim();
        let mut products = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if !self.mult[i][j].is_zero() {
                    products.push((i, j, self.mult[i][j].clone()));
                }
            }
        }
        SurfaceData {
            name: self.name.clone(),
            basis: self.basis.clone(),
            unit: self.unit,
            products,
            integral: SurfaceClass::from_terms(self.integral.iter().cloned().enumerate()),
            c1: self.c1.clone(),
            c2: self.c2.clone(),
        }
    }

    /// Relabels the basis along a permutation: basis element `i` of `self`
    /// becomes element `perm[i]` of the result.
    pub fn permuted(&self, perm: &[usize]) -> Result<SurfaceModel> {
        let n = self.dim();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(HilbError::Schema("not a permutation of the basis".into()));
        }
        let map = |c: &SurfaceClass| SurfaceClass::from_terms(c.terms().iter().map(|(i, x)| (perm[*i], x.clone())));
        let data = self.to_data();
        let mut basis = data.basis.clone();
        for (i, b) in data.basis.iter().enumerate() {
            basis[perm[i]] = b.clone();
        }
        load_surface(SurfaceData {
            name: format!("{}*", self.name),
            basis,
            unit: perm[data.unit],
            products: data.products.iter().map(|(i, j, c)| (perm[*i], perm[*j], map(c))).collect(),
            integral: map(&data.integral),
            c1: map(&data.c1),
            c2: map(&data.c2),
        })
    }
}

fn elem(name: &str, degree: u8) -> BasisElement {
    BasisElement {
        name: name.to_string(),
        degree,
    }
}

/// Builds a model whose middle cohomology carries the symmetric form `gram`
/// and which has no odd classes.
fn even_model(name: &str, h2: &[&str], gram: &[Vec<i64>], c1: Vec<i64>, c2: i64) -> Result<SurfaceModel> {
    let k = h2.len();
    let mut basis = vec![elem("1", 0)];
    basis.extend(h2.iter().map(|s| elem(s, 2)));
    basis.push(elem("pt", 4));
    let pt = k + 1;
    let mut products = Vec::new();
    for i in 0..basis.len() {
        products.push((0, i, SurfaceClass::basis(i)));
        if i != 0 {
            products.push((i, 0, SurfaceClass::basis(i)));
        }
    }
    for i in 0..k {
        for j in 0..k {
            if gram[i][j] != 0 {
                products.push((i + 1, j + 1, SurfaceClass::basis(pt).scale(&qi(gram[i][j]))));
            }
        }
    }
    load_surface(SurfaceData {
        name: name.to_string(),
        basis,
        unit: 0,
        products,
        integral: SurfaceClass::basis(pt),
        c1: SurfaceClass::from_terms(c1.into_iter().enumerate().map(|(i, x)| (i + 1, qi(x)))),
        c2: SurfaceClass::basis(pt).scale(&qi(c2)),
    })
}

fn hyperbolic_gram(b2: usize) -> (Vec<String>, Vec<Vec<i64>>) {
    let mut names = Vec::new();
    let mut gram = vec![vec![0; b2]; b2];
    for p in 0..b2 / 2 {
        names.push(format!("e{}", p + 1));
        names.push(format!("f{}", p + 1));
        gram[2 * p][2 * p + 1] = 1;
        gram[2 * p + 1][2 * p] = 1;
    }
    if b2 % 2 == 1 {
        names.push("g".to_string());
        gram[b2 - 1][b2 - 1] = 1;
    }
    (names, gram)
}

pub fn p2() -> SurfaceModel {
    even_model("p2", &["h"], &[vec![1]], vec![3], 3).expect("valid builtin")
}

pub fn p1xp1() -> SurfaceModel {
    even_model("p1xp1", &["a", "b"], &[vec![0, 1], vec![1, 0]], vec![2, 2], 4).expect("valid builtin")
}

/// K3: `H²` is three hyperbolic planes plus two copies of `E₈(-1)`.
pub fn k3() -> SurfaceModel {
    let (mut names, hyp) = hyperbolic_gram(6);
    let mut gram = vec![vec![0i64; 22]; 22];
    for i in 0..6 {
        gram[i][..6].copy_from_slice(&hyp[i]);
    }
    let e8_edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    for (copy, prefix) in ["u", "v"].iter().enumerate() {
        let off = 6 + 8 * copy;
        for i in 0..8 {
            names.push(format!("{prefix}{}", i + 1));
            gram[off + i][off + i] = -2;
        }
        for (a, b) in e8_edges {
            gram[off + a][off + b] = 1;
            gram[off + b][off + a] = 1;
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    even_model("k3", &refs, &gram, vec![0; 22], 24).expect("valid builtin")
}

/// The four-torus: exterior algebra on four odd generators.
pub fn t4() -> SurfaceModel {
    let subsets: Vec<Vec<usize>> = {
        let mut v: Vec<Vec<usize>> = (0u32..16).map(|m| (0..4).filter(|i| m & (1 << i) != 0).collect()).collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        v
    };
    let name = |s: &Vec<usize>| match s.len() {
        0 => "1".to_string(),
        4 => "pt".to_string(),
        _ => format!("a{}", s.iter().map(|i| (i + 1).to_string()).collect::<String>()),
    };
    let basis: Vec<BasisElement> = subsets.iter().map(|s| elem(&name(s), s.len() as u8)).collect();
    let mut products = Vec::new();
    for (i, s) in subsets.iter().enumerate() {
        for (j, t) in subsets.iter().enumerate() {
            if s.iter().any(|x| t.contains(x)) {
                continue;
            }
            let inversions = s.iter().map(|x| t.iter().filter(|y| *y < x).count()).sum::<usize>();
            let mut u: Vec<usize> = s.iter().chain(t).cloned().collect();
            u.sort();
            let k = subsets.iter().position(|w| *w == u).expect("subset");
            products.push((i, j, SurfaceClass::basis(k).scale(&sign_q(inversions % 2 == 1))));
        }
    }
    load_surface(SurfaceData {
        name: "t4".into(),
        basis,
        unit: 0,
        products,
        integral: SurfaceClass::basis(15),
        c1: SurfaceClass::zero(),
        c2: SurfaceClass::zero(),
    })
    .expect("valid builtin")
}

/// `b2` classes forming hyperbolic planes (plus one class of square 1 when
/// `b2` is odd), first Chern class `c1` and `c2 = e·pt`.
pub fn synthetic(b2: usize, c1: &[i64], e: i64) -> Result<SurfaceModel> {
    if c1.len() != b2 {
        return Err(HilbError::Schema(format!("c1 has {} entries, expected {b2}", c1.len())));
    }
    let (names, gram) = hyperbolic_gram(b2);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let c1s = c1.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    even_model(&format!("synthetic({b2},[{c1s}],{e})"), &refs, &gram, c1.to_vec(), e)
}

/// Resolves a builtin model name: `k3`, `t4`, `p2`, `p1xp1`, or
/// `synthetic(b2, c1, e)` where `c1` is either a bracketed list of `b2`
/// integers or a single integer `k` standing for `k·(e1 + f1)`.
pub fn builtin(name: &str) -> Result<SurfaceModel> {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    match compact.as_str() {
        "k3" => return Ok(k3()),
        "t4" => return Ok(t4()),
        "p2" => return Ok(p2()),
        "p1xp1" => return Ok(p1xp1()),
        _ => {}
    }
    let unknown = || HilbError::UnknownName(name.to_string());
    let inner = compact
        .strip_prefix("synthetic(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(unknown)?;
    let (b2s, rest) = inner.split_once(',').ok_or_else(unknown)?;
    let (c1s, es) = rest.rsplit_once(',').ok_or_else(unknown)?;
    let b2: usize = b2s.parse().map_err(|_| unknown())?;
    let e: i64 = es.parse().map_err(|_| unknown())?;
    let c1: Vec<i64> = if let Some(list) = c1s.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        if list.is_empty() {
            Vec::new()
        } else {
            list.split(',')
                .map(|x| x.parse().map_err(|_| unknown()))
                .collect::<Result<_>>()?
        }
    } else {
        let k: i64 = c1s.parse().map_err(|_| unknown())?;
        let mut v = vec![0; b2];
        if k != 0 {
            if b2 < 2 {
                return Err(HilbError::Schema("scalar c1 needs a hyperbolic pair".into()));
            }
            v[0] = k;
            v[1] = k;
        }
        v
    };
    synthetic(b2, &c1, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn all_builtins() -> Vec<SurfaceModel> {
        vec![
            p2(),
            p1xp1(),
            k3(),
            t4(),
            synthetic(2, &[1, 1], 7).unwrap(),
            synthetic(3, &[0, 0, 1], 0).unwrap(),
        ]
    }

    #[test]
    fn p2_data() {
        let m = p2();
        let h = SurfaceClass::basis(1);
        assert_eq!(m.cup(&h, &h), SurfaceClass::basis(2));
        assert_eq!(m.integrate(&SurfaceClass::basis(2)), qi(1));
        assert_eq!(m.integrate(&h), qi(0));
        assert_eq!(m.betti(), [1, 0, 1, 0, 1]);
    }

    #[test]
    fn degenerate_integral_is_rejected() {
        let mut d = p2().to_data();
        d.integral = SurfaceClass::zero();
        assert!(matches!(load_surface(d), Err(HilbError::DegeneratePairing(_))));
    }

    #[test]
    fn k3_pairing_determinant_is_nonzero() {
        // Independent check: eliminate the pairing matrix and count pivots.
        let m = k3();
        let rows: Vec<SparseVec> = m
            .pairing_matrix()
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(_, x)| !is_zero(x)).collect())
            .collect();
        assert_eq!(crate::linalg::rank(&rows), 24);
        assert_eq!(m.integrate(m.c2()), qi(24));
        assert_eq!(m.betti(), [1, 0, 22, 0, 1]);
        let e = SurfaceClass::basis(m.index_of("e1").unwrap());
        let f = SurfaceClass::basis(m.index_of("f1").unwrap());
        assert_eq!(m.cup(&e, &f), SurfaceClass::basis(m.index_of("pt").unwrap()));
    }

    #[test]
    fn t4_and_p1xp1() {
        let t = t4();
        assert_eq!(t.betti(), [1, 4, 6, 4, 1]);
        assert!(t.c1().is_zero() && t.c2().is_zero());
        let a1 = SurfaceClass::basis(t.index_of("a1").unwrap());
        assert!(t.cup(&a1, &a1).is_zero());
        let p = p1xp1();
        assert_eq!(p.betti(), [1, 0, 2, 0, 1]);
        assert_eq!(p.integrate(&p.cup(p.c1(), p.c1())), qi(8));
        assert_eq!(p.integrate(p.c2()), qi(4));
    }

    #[test]
    fn p2_coproduct_by_dual_basis() {
        let m = p2();
        let t = m.coproduct(2, &m.unit()).unwrap();
        let mut expected = TensorClass::zero(2);
        expected.add_term(vec![0, 2], qi(1));
        expected.add_term(vec![1, 1], qi(1));
        expected.add_term(vec![2, 0], qi(1));
        assert_eq!(t, expected);
    }

    #[test]
    fn frobenius_identities_on_builtins() {
        for m in all_builtins() {
            let n = m.dim();
            // m(τ₂*1) integrates to the signed dimension.
            assert_eq!(m.integrate(&m.euler_class()), qi(m.euler_characteristic()), "{m}");
            for a in 0..n {
                let ea = SurfaceClass::basis(a);
                let t = m.coproduct(2, &ea).unwrap();
                // (∫ ⊗ id) τ₂*(a) = a.
                let mut back = SurfaceClass::zero();
                for (key, c) in t.iter() {
                    let w = c * m.integrate(&SurfaceClass::basis(key[0]));
                    back = back.add(&SurfaceClass::basis(key[1]).scale(&w));
                }
                assert_eq!(back, ea, "{m}");
                // Coassociativity.
                let left = m.apply_on_factor(&t, 0, false, |i| m.coproduct(2, &SurfaceClass::basis(i)).unwrap());
                let right = m.apply_on_factor(&t, 1, false, |i| m.coproduct(2, &SurfaceClass::basis(i)).unwrap());
                assert_eq!(left, right, "{m}");
                assert_eq!(left, m.coproduct(3, &ea).unwrap(), "{m}");
                // Duality (∫⊗∫)((x⊗y)·τ₂*(a)) = ∫ x y a.
                for x in 0..n {
                    for y in 0..n {
                        let (ex, ey) = (SurfaceClass::basis(x), SurfaceClass::basis(y));
                        let lhs = m.integrate_tensor(&m.tensor_mul(&m.tensor(&[&ex, &ey]), &t));
                        let rhs = m.integrate(&m.cup(&m.cup(&ex, &ey), &ea));
                        assert_eq!(lhs, rhs, "{m} {x} {y} {a}");
                    }
                }
            }
        }
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin("k3").unwrap().dim(), 24);
        let s = builtin("synthetic(2, 3, 24)").unwrap();
        assert_eq!(s.integrate(&s.cup(s.c1(), s.c1())), qi(18));
        assert_eq!(s.integrate(s.c2()), qi(24));
        assert!(builtin("synthetic(2,[1,0],5)").is_ok());
        assert!(matches!(builtin("nosuch"), Err(HilbError::UnknownName(_))));
    }

    #[test]
    fn permutation_preserves_structure() {
        let m = p1xp1();
        let p = m.permuted(&[0, 2, 1, 3]).unwrap();
        assert_eq!(p.basis()[1].name, "b");
        assert_eq!(p.integrate(&p.cup(p.c1(), p.c1())), qi(8));
        assert_eq!(p.dual(1), &SurfaceClass::basis(2));
        let _ = q(1, 2);
    }
}
