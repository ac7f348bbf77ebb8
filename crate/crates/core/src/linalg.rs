//! Exact sparse linear algebra over the rationals.
//!
//! Vectors are sorted `(index, value)` lists without explicit zeros.

use crate::rational::{is_zero, one, zero, Q};
use rustc_hash::FxHashMap;
use std::collections::BTreeMap;

pub type SparseVec = Vec<(usize, Q)>;

/// Sorts, merges duplicate indices and drops zeros.
pub fn normalize(mut v: SparseVec) -> SparseVec {
    v.sort_by_key(|(i, _)| *i);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (i, x) in v {
        match out.last_mut() {
            Some((j, y)) if *j == i => *y += x,
            _ => out.push((i, x)),
        }
    }
    out.retain(|(_, x)| !is_zero(x));
    out
}

pub fn axpy(y: &mut BTreeMap<usize, Q>, a: &Q, x: &[(usize, Q)]) {
    for (i, v) in x {
        let e = y.entry(*i).or_insert_with(zero);
        *e += a * v;
        if is_zero(e) {
            y.remove(i);
        }
    }
}

/// An incrementally built row-echelon basis.
///
/// Each stored row has a distinct leading index with coefficient one. When
/// `track` is set, every row also remembers its expression in terms of the
/// vectors that were accepted by [`Echelon::insert`], which makes
/// [`Echelon::express`] possible.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<SparseVec>,
    pivot_row: FxHashMap<usize, usize>,
    combos: Vec<SparseVec>,
    track: bool,
    accepted: usize,
}

impl Echelon {
    pub fn new(track: bool) -> Self {
        Echelon {
            track,
            ..Default::default()
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows. Returns the remainder and the
    /// multipliers used (row index, coefficient).
    fn reduce(&self, v: &[(usize, Q)]) -> (BTreeMap<usize, Q>, Vec<(usize, Q)>) {
        let mut w: BTreeMap<usize, Q> = v.iter().cloned().collect();
        let mut used = Vec::new();
        let mut cursor = 0usize;
        loop {
            let next = w.range(cursor..).next().map(|(k, c)| (*k, c.clone()));
            let Some((k, c)) = next else { break };
            if let Some(&r) = self.pivot_row.get(&k) {
                let a = -c.clone();
                axpy(&mut w, &a, &self.rows[r]);
                used.push((r, c));
            }
            cursor = k + 1;
        }
        (w, used)
    }

    pub fn is_independent(&self, v: &[(usize, Q)]) -> bool {
        !self.reduce(v).0.is_empty()
    }

    /// Adds `v` if it is independent of the current rows; returns whether it was added.
    pub fn insert(&mut self, v: &[(usize, Q)]) -> bool {
        let (w, used) = self.reduce(v);
        let Some((&lead, lc)) = w.iter().next() else { return false };
        let inv = one() / lc;
        let row: SparseVec = w.iter().map(|(k, x)| (*k, x * &inv)).collect();
        if self.track {
            let mut combo: BTreeMap<usize, Q> = BTreeMap::new();
            combo.insert(self.accepted, one());
            for (r, c) in &used {
                let a = -c.clone();
                axpy(&mut combo, &a, &self.combos[*r]);
            }
            self.combos.push(combo.into_iter().map(|(k, x)| (k, x * &inv)).collect());
        }
        self.accepted += 1;
        self.pivot_row.insert(lead, self.rows.len());
        self.rows.push(row);
        true
    }

    /// Writes `v` as a combination of the accepted vectors, if it lies in their span.
    pub fn express(&self, v: &[(usize, Q)]) -> Option<SparseVec> {
        assert!(self.track, "express requires a tracking echelon");
        let (w, used) = self.reduce(v);
        if !w.is_empty() {
            return None;
        }
        let mut out: BTreeMap<usize, Q> = BTreeMap::new();
        for (r, c) in &used {
            axpy(&mut out, c, &self.combos[*r]);
        }
        Some(out.into_iter().collect())
    }
}

/// Rank of a list of sparse vectors.
pub fn rank(vectors: &[SparseVec]) -> usize {
    let mut e = Echelon::new(false);
    for v in vectors {
        e.insert(v);
    }
    e.rank()
}

/// Inverse of a dense square matrix, or `None` if it is singular.
pub fn inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { one() } else { zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !is_zero(&a[r][col]))?;
        a.swap(col, piv);
        let inv = one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || is_zero(&row[col]) {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves the dense system `m x = b`; `None` if `m` is singular.
pub fn solve(m: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let inv = inverse(m)?;
    Some(
        inv.iter()
            .map(|row| row.iter().zip(b).fold(zero(), |acc, (x, y)| acc + x * y))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    #[test]
    fn inverse_of_small_matrix() {
        let m = vec![vec![qi(2), qi(1)], vec![qi(1), qi(1)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![qi(1), qi(-1)], vec![qi(-1), qi(2)]]);
        assert!(inverse(&[vec![qi(1), qi(2)], vec![qi(2), qi(4)]]).is_none());
    }

    #[test]
    fn echelon_expresses_accepted_combinations() {
        let mut e = Echelon::new(true);
        assert!(e.insert(&[(0, qi(1)), (2, qi(1))]));
        assert!(e.insert(&[(1, qi(3))]));
        assert!(!e.insert(&[(0, qi(2)), (1, qi(3)), (2, qi(2))]));
        let c = e.express(&[(0, qi(1)), (1, qi(1)), (2, qi(1))]).unwrap();
        assert_eq!(c, vec![(0, qi(1)), (1, q(1, 3))]);
        assert!(e.express(&[(3, qi(1))]).is_none());
    }

    proptest! {
        #[test]
        fn express_reconstructs(rows in proptest::collection::vec(
            proptest::collection::vec((0usize..6, -3i64..4), 1..5), 1..6)) {
            let vecs: Vec<SparseVec> = rows.iter()
                .map(|r| normalize(r.iter().map(|(i, x)| (*i, qi(*x))).collect()))
                .collect();
            let mut e = Echelon::new(true);
            let mut accepted = Vec::new();
            for v in &vecs {
                if e.insert(v) { accepted.push(v.clone()); }
            }
            prop_assert_eq!(e.rank(), rank(&vecs));
            for v in &vecs {
                let c = e.express(v).expect("in span");
                let mut acc = BTreeMap::new();
                for (j, x) in &c { axpy(&mut acc, x, &accepted[*j]); }
                let got: SparseVec = acc.into_iter().collect();
                prop_assert_eq!(got, v.clone());
            }
        }
    }
}
