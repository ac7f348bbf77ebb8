//! Exact cohomology computations for Hilbert schemes of points on closed
//! four-manifolds, driven by a finite Frobenius-algebra model of `H*(X, Q)`.

pub mod cr_orbifold;
pub mod egl_cobordism;
pub mod error;
pub mod fock;
pub mod frobenius;
pub mod goettsche;
pub mod heisenberg;
pub mod io;
pub mod linalg;
pub mod rational;
pub mod taut_ring;

pub use error::{HilbError, Result};
pub use fock::{FockSpace, FockVector, NakajimaMonomial};
pub use frobenius::{builtin, load_surface, BasisElement, SurfaceClass, SurfaceData, SurfaceModel, TensorClass};
pub use rational::Q;
