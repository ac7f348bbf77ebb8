//! Exact rational scalars.

use malachite_base::num::arithmetic::traits::Sign;
use malachite_q::Rational;
use std::cmp::Ordering;
use std::str::FromStr;

/// The scalar type used throughout the crate.
pub type Q = Rational;

pub fn q(num: i64, den: i64) -> Q {
    Q::from_signeds(num, den)
}

pub fn qi(n: i64) -> Q {
    Q::from(n)
}

pub fn zero() -> Q {
    Q::from(0u32)
}

pub fn one() -> Q {
    Q::from(1u32)
}

pub fn is_zero(x: &Q) -> bool {
    x.sign() == Ordering::Equal
}

pub fn is_negative(x: &Q) -> bool {
    x.sign() == Ordering::Less
}

/// `(-1)^k` as a rational.
pub fn sign_q(negative: bool) -> Q {
    if negative {
        qi(-1)
    } else {
        one()
    }
}

/// Numerator and denominator as decimal strings; the sign lives on the numerator.
pub fn num_den_strings(x: &Q) -> (String, String) {
    let num = x.numerator_ref().to_string();
    let den = x.denominator_ref().to_string();
    if is_negative(x) {
        (format!("-{num}"), den)
    } else {
        (num, den)
    }
}

/// Numerator and denominator as machine integers when they fit.
pub fn num_den_i64(x: &Q) -> Option<(i64, i64)> {
    let (n, d) = num_den_strings(x);
    Some((n.parse().ok()?, d.parse().ok()?))
}

/// Builds `num/den` from decimal strings; `None` on syntax errors or a zero denominator.
pub fn from_num_den_str(num: &str, den: &str) -> Option<Q> {
    let n = Q::from_str(num.trim()).ok()?;
    let d = Q::from_str(den.trim()).ok()?;
    if is_zero(&d) || *n.denominator_ref() != 1u32 || *d.denominator_ref() != 1u32 {
        return None;
    }
    Some(n / d)
}

/// Parses `a`, `-a`, or `a/b`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => from_num_den_str(n, d),
        None => from_num_den_str(s, "1"),
    }
}

pub fn factorial(n: u32) -> Q {
    let mut acc = one();
    for k in 2..=n {
        acc *= Q::from(k);
    }
    acc
}

pub fn binomial(n: i64, k: i64) -> Q {
    if k < 0 || k > n {
        return zero();
    }
    let mut acc = one();
    for i in 0..k {
        acc *= qi(n - i);
        acc /= qi(i + 1);
    }
    acc
}
