//! Benchmark fixtures shared by the criterion targets.

use hilb_core::egl_cobordism::ChernPolynomial;
use hilb_core::{builtin, SurfaceModel};

pub fn model(name: &str) -> SurfaceModel {
    builtin(name).expect("builtin surface")
}

pub fn poly(text: &str) -> ChernPolynomial {
    text.parse().expect("valid polynomial")
}
