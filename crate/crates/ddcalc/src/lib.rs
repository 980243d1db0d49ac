//! Numerical calculus of confluent divided differences, the modular special
//! functions derived from them, and a multi-slot functional calculus for
//! finite Hermitian matrices.
//!
//! The crate is organized bottom-up:
//!
//! * [`quad`] — shared quadrature and numerical differentiation utilities,
//! * [`ddcore`] — divided differences (recursive, confluent tableau,
//!   Genocchi–Hermite and contour oracles, Leibniz and substitution rules),
//! * [`funcs`] — the special-function families `M(s,m)`, `H(s,m)`, modified
//!   logarithms and the explicit two-variable closed forms,
//! * [`matcalc`] — Hermitian spectral data and contraction kernels,
//! * [`rearrange`] — operator substitution and rearrangement verification,
//! * [`expand`] — expansional / noncommutative Taylor machinery,
//! * [`verify`] — seeded fuzz suites with machine-readable reports.

pub mod ddcore;
pub mod error;
pub mod expand;
pub mod funcs;
pub mod fuzz;
pub mod matcalc;
pub mod quad;
pub mod rearrange;
pub mod verify;

pub use error::{DdError, Result};
