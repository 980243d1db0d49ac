//! Divided differences: node systems with multiplicities, the smooth-function
//! catalog, and the evaluation rules (recursion, confluent tableau,
//! Genocchi–Hermite and contour oracles, Leibniz, substitution).

mod functions;
mod nodes;
mod ops;

pub use functions::{
    BernoulliEven, Cosh, Exp, ExpScaled, Gaussian, IdmLog, LZeroExp, Log, ModLog, Poly, Product,
    ScalarFunction, Shifted,
};
pub use nodes::NodeSystem;
pub(crate) use functions::{bernoulli_scaled, mod_log_value};
pub use ops::{
    dd_confluent, dd_contour, dd_explicit_sum, dd_flat, dd_hermite_genocchi, dd_recursive,
    dd_substitute, leibniz_rhs, SubstituteFn,
};

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
