//! Generating functions for Betti numbers and Euler characteristics of
//! `X^[n]`.

use crate::error::{HilbError, Result};
use std::fmt::Write as _;

/// A power series in `(t, q)` truncated after `q^{n_max}`. Row `n` holds the
/// coefficients of `t^0 … t^{4n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariateSeries {
    pub n_max: usize,
    coeffs: Vec<Vec<i128>>,
}

impl BivariateSeries {
    fn one(n_max: usize) -> Self {
        let mut coeffs: Vec<Vec<i128>> = (0..=n_max).map(|n| vec![0; 4 * n + 1]).collect();
        coeffs[0][0] = 1;
        BivariateSeries { n_max, coeffs }
    }

    pub fn coeff(&self, n: usize, d: usize) -> i128 {
        self.coeffs.get(n).and_then(|r| r.get(d)).copied().unwrap_or(0)
    }

    /// `b_0 … b_{4n}` of `X^[n]`.
    pub fn row(&self, n: usize) -> &[i128] {
        &self.coeffs[n]
    }

    /// Sum of the Betti numbers of `X^[n]`.
    pub fn total(&self, n: usize) -> i128 {
        self.coeffs[n].iter().sum()
    }

    /// The specialisation `t = -1`.
    pub fn at_minus_one(&self) -> Vec<i128> {
        self.coeffs
            .iter()
            .map(|r| r.iter().enumerate().map(|(d, b)| if d % 2 == 0 { *b } else { -b }).sum())
            .collect()
    }

    /// Multiplies by `Σ_k c_k (t^a q^m)^k`.
    fn mul_power_series(&mut self, a: usize, m: usize, c: &[i128]) -> Result<()> {
        let mut out = BivariateSeries {
            n_max: self.n_max,
            coeffs: self.coeffs.iter().map(|r| vec![0; r.len()]).collect(),
        };
        for n in 0..=self.n_max {
            for d in 0..self.coeffs[n].len() {
                let x = self.coeffs[n][d];
                if x == 0 {
                    continue;
                }
                for (k, ck) in c.iter().enumerate() {
                    let (nn, dd) = (n + k * m, d + k * a);
                    if nn > self.n_max {
                        break;
                    }
                    let term = x.checked_mul(*ck).ok_or_else(overflow)?;
                    let slot = &mut out.coeffs[nn][dd];
                    *slot = slot.checked_add(term).ok_or_else(overflow)?;
                }
            }
        }
        *self = out;
        Ok(())
    }

    /// CSV with header `n,d,b`, rows sorted by `(n, d)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,d,b\n");
        for (n, row) in self.coeffs.iter().enumerate() {
            for (d, b) in row.iter().enumerate() {
                let _ = writeln!(s, "{n},{d},{b}");
            }
        }
        s
    }
}

fn overflow() -> HilbError {
    HilbError::Resource("series coefficient overflow".into())
}

/// Generalised binomial coefficient `binom(a, k)` for any integer `a`.
fn binomial(a: i128, k: usize) -> Result<i128> {
    let mut acc: i128 = 1;
    for i in 0..k as i128 {
        acc = acc.checked_mul(a - i).ok_or_else(overflow)? / (i + 1);
    }
    Ok(acc)
}

/// Coefficients of `(1 + x)^b` (`sign = 1`) or `(1 - x)^{-b}` (`sign = -1`)
/// up to `x^len`.
fn factor_coeffs(b: i128, sign: i32, len: usize) -> Result<Vec<i128>> {
    (0..=len)
        .map(|k| {
            if sign > 0 {
                binomial(b, k)
            } else {
                binomial(b + k as i128 - 1, k)
            }
        })
        .collect()
}

/// Betti numbers of `X^[n]` for `n ≤ n_max` from those of `X`:
/// `Π_m (1+t^{2m-1}q^m)^{b₁}(1+t^{2m+1}q^m)^{b₃} / ((1-t^{2m-2}q^m)^{b₀}(1-t^{2m}q^m)^{b₂}(1-t^{2m+2}q^m)^{b₄})`.
pub fn poincare_series(betti: [i64; 5], n_max: usize) -> Result<BivariateSeries> {
    let [b0, b1, b2, b3, b4] = betti;
    if b0 != 1 || b4 != 1 {
        return Err(HilbError::InvalidBetti(format!("b0 = {b0} and b4 = {b4} must both be 1")));
    }
    if b1 != b3 {
        return Err(HilbError::InvalidBetti(format!("b1 = {b1} differs from b3 = {b3}")));
    }
    if betti.iter().any(|b| *b < 0) {
        return Err(HilbError::InvalidBetti("negative Betti number".into()));
    }
    let mut s = BivariateSeries::one(n_max);
    for m in 1..=n_max {
        let len = n_max / m;
        let factors = [
            (2 * m - 1, b1, 1),
            (2 * m + 1, b3, 1),
            (2 * m - 2, b0, -1),
            (2 * m, b2, -1),
            (2 * m + 2, b4, -1),
        ];
        for (a, b, sign) in factors {
            if b != 0 {
                s.mul_power_series(a, m, &factor_coeffs(b as i128, sign, len)?)?;
            }
        }
    }
    Ok(s)
}

/// `χ(X^[n])` for `n ≤ n_max`: the coefficients of `Π_m (1-q^m)^{-e}`,
/// computed by `n a_n = e Σ_{k=1}^n σ(k) a_{n-k}` with `σ` the divisor sum.
pub fn euler_series(e: i64, n_max: usize) -> Result<Vec<i128>> {
    let sigma = |k: usize| (1..=k).filter(|d| k.is_multiple_of(*d)).sum::<usize>() as i128;
    let mut a: Vec<i128> = vec![1];
    for n in 1..=n_max {
        let mut acc: i128 = 0;
        for k in 1..=n {
            acc = acc
                .checked_add(sigma(k).checked_mul(a[n - k]).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        a.push(acc.checked_mul(e as i128).ok_or_else(overflow)? / n as i128);
    }
    Ok(a)
}
