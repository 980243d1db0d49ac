use num_complex::Complex64;

use super::factorial;
use super::nodes::NodeSystem;
use crate::error::{DdError, Result};

/// A smooth function descriptor supplying values and exact k-th derivatives
/// on a stated open domain.
///
/// Exact derivatives are what make the confluent tableau exact; numerical
/// differentiation never happens inside divided-difference kernels.
pub trait ScalarFunction {
    fn eval(&self, x: f64) -> f64;

    /// Value of f^{(k)}(x); `deriv(0, x)` must equal `eval(x)`.
    fn deriv(&self, k: usize, x: f64) -> f64;

    /// Open real interval on which the function is defined.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    /// Largest supported derivative order (`None` = unbounded).
    fn max_order(&self) -> Option<usize> {
        None
    }

    /// Complex evaluation for analytic functions (contour oracle).
    fn eval_complex(&self, _z: Complex64) -> Option<Complex64> {
        None
    }

    /// Whether the function is analytic on and inside the given circle.
    /// Defaults to "wherever complex evaluation is available" (entire).
    fn analytic_on_circle(&self, _center: f64, _radius: f64) -> bool {
        true
    }
}

pub(crate) fn check_domain(f: &dyn ScalarFunction, nodes: &NodeSystem) -> Result<()> {
    let (lo, hi) = f.domain();
    for &(v, _) in nodes.entries() {
        if v <= lo || v >= hi {
            return Err(DdError::Domain(format!(
                "node {v} outside function domain ({lo}, {hi})"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_order(f: &dyn ScalarFunction, needed: usize) -> Result<()> {
    if let Some(max) = f.max_order() {
        if needed > max {
            return Err(DdError::Capability(format!(
                "derivative order {needed} exceeds supported maximum {max}"
            )));
        }
    }
    Ok(())
}

/// Falling factorial m(m-1)…(m-k+1) for integer m, as f64 (0 when k > m).
fn ffall(m: usize, k: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    ((m - k + 1)..=m).map(|j| j as f64).product()
}

// ---------------------------------------------------------------------------
// exp family
// ---------------------------------------------------------------------------

/// The exponential function.
#[derive(Debug, Clone, Copy)]
pub struct Exp;

impl ScalarFunction for Exp {
    fn eval(&self, x: f64) -> f64 {
        x.exp()
    }
    fn deriv(&self, _k: usize, x: f64) -> f64 {
        x.exp()
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z.exp())
    }
}

/// x ↦ e^{c x}.
#[derive(Debug, Clone, Copy)]
pub struct ExpScaled(pub f64);

impl ScalarFunction for ExpScaled {
    fn eval(&self, x: f64) -> f64 {
        (self.0 * x).exp()
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.0.powi(k as i32) * (self.0 * x).exp()
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some((z * self.0).exp())
    }
}

/// cosh, an even entire function.
#[derive(Debug, Clone, Copy)]
pub struct Cosh;

impl ScalarFunction for Cosh {
    fn eval(&self, x: f64) -> f64 {
        x.cosh()
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k % 2 == 0 {
            x.cosh()
        } else {
            x.sinh()
        }
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z.cosh())
    }
}

/// e^{-x²}, the Gaussian test function.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian;

impl ScalarFunction for Gaussian {
    fn eval(&self, x: f64) -> f64 {
        (-x * x).exp()
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        // d^k/dx^k e^{-x²} = (-1)^k H_k(x) e^{-x²} with physicists' Hermite
        // polynomials H_{k+1} = 2x H_k - 2k H_{k-1}.
        let mut h0 = 1.0;
        let mut h1 = 2.0 * x;
        let h = match k {
            0 => 1.0,
            1 => h1,
            _ => {
                for j in 1..k {
                    let h2 = 2.0 * x * h1 - 2.0 * j as f64 * h0;
                    h0 = h1;
                    h1 = h2;
                }
                h1
            }
        };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * h * (-x * x).exp()
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some((-z * z).exp())
    }
}

// ---------------------------------------------------------------------------
// log family
// ---------------------------------------------------------------------------

/// The natural logarithm on (0, ∞); principal branch for complex arguments.
#[derive(Debug, Clone, Copy)]
pub struct Log;

impl ScalarFunction for Log {
    fn eval(&self, x: f64) -> f64 {
        x.ln()
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return x.ln();
        }
        // (-1)^{k-1} (k-1)! x^{-k}
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * factorial(k - 1) * x.powi(-(k as i32))
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z.ln())
    }
    fn analytic_on_circle(&self, center: f64, radius: f64) -> bool {
        // Must not encircle or touch the branch point at 0.
        center - radius > 1e-9 * f64::max(1.0, center.abs())
    }
}

/// x ↦ x^m log x on (0, ∞).
///
/// k-th derivative from the closed form m^{(k)} x^{m-k} log x + c_{m,k} x^{m-k}
/// with c_{m,0} = 0, c_{m,k+1} = (m-k) c_{m,k} + m^{(k)}.
#[derive(Debug, Clone, Copy)]
pub struct IdmLog(pub usize);

impl ScalarFunction for IdmLog {
    fn eval(&self, x: f64) -> f64 {
        x.powi(self.0 as i32) * x.ln()
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let m = self.0;
        let mut c = 0.0;
        for j in 0..k {
            c = (m as f64 - j as f64) * c + ffall(m, j);
        }
        let power = x.powi(m as i32 - k as i32);
        ffall(m, k) * power * x.ln() + c * power
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z.powu(self.0 as u32) * z.ln())
    }
    fn analytic_on_circle(&self, center: f64, radius: f64) -> bool {
        center - radius > 1e-9 * f64::max(1.0, center.abs())
    }
}

/// The modified logarithm L_m(s) = (−1)^m [1^{m+1}, s] log on (0, ∞).
///
/// Evaluated by the closed form away from s = 1 and by the power series in
/// (s − 1) inside the switchover radius 0.1; the two agree to roundoff at the
/// boundary. Derivatives route through the confluent tableau of log.
#[derive(Debug, Clone, Copy)]
pub struct ModLog(pub usize);

pub(crate) fn mod_log_value(m: usize, s: f64) -> Result<f64> {
    if s <= 0.0 {
        return Err(DdError::Domain(format!("modified logarithm needs s > 0, got {s}")));
    }
    let w = s - 1.0;
    if w.abs() < 0.1 {
        // L_m(s) = Σ_{k≥0} (−1)^k w^k / (m+1+k), truncated at |term| < 1e-16.
        let mut sum = 0.0;
        let mut pw = 1.0;
        for k in 0..200 {
            let term = pw / (m as f64 + 1.0 + k as f64);
            sum += term;
            if term.abs() < 1e-16 {
                break;
            }
            pw *= -w;
        }
        Ok(sum)
    } else {
        let mut tail = 0.0;
        let mut pw = w;
        for j in 1..=m {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            tail += sign * pw / j as f64;
            pw *= w;
        }
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * (s.ln() - tail) / w.powi(m as i32 + 1))
    }
}

impl ScalarFunction for ModLog {
    fn eval(&self, x: f64) -> f64 {
        mod_log_value(self.0, x).unwrap_or(f64::NAN)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.eval(x);
        }
        // L_m^{(k)}(s) = (−1)^m k! [1^{m+1}, s^{k+1}] log.
        let nodes = match NodeSystem::new(&[(1.0, self.0 + 1), (x, k + 1)]) {
            Ok(ns) => ns,
            Err(_) => return f64::NAN,
        };
        let dd = super::ops::dd_confluent(&nodes, &Log).unwrap_or(f64::NAN);
        let sign = if self.0 % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial(k) * dd
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

// ---------------------------------------------------------------------------
// polynomials and combinators
// ---------------------------------------------------------------------------

/// Polynomial c_0 + c_1 x + … + c_d x^d.
#[derive(Debug, Clone)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn identity() -> Self {
        Poly(vec![0.0, 1.0])
    }

    pub fn monomial(degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = 1.0;
        Poly(c)
    }
}

impl ScalarFunction for Poly {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        if k >= self.0.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for (j, &c) in self.0.iter().enumerate().skip(k).rev() {
            acc = acc * x + c * ffall(j, k);
        }
        acc
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(
            self.0
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c),
        )
    }
}

/// Pointwise product f·g, with Leibniz derivatives.
pub struct Product<F, G>(pub F, pub G);

impl<F: ScalarFunction, G: ScalarFunction> ScalarFunction for Product<F, G> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x) * self.1.eval(x)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let mut binom = 1.0;
        let mut sum = 0.0;
        for j in 0..=k {
            sum += binom * self.0.deriv(j, x) * self.1.deriv(k - j, x);
            binom *= (k - j) as f64 / (j + 1) as f64;
        }
        sum
    }
    fn domain(&self) -> (f64, f64) {
        let (a0, b0) = self.0.domain();
        let (a1, b1) = self.1.domain();
        (a0.max(a1), b0.min(b1))
    }
    fn max_order(&self) -> Option<usize> {
        match (self.0.max_order(), self.1.max_order()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(self.0.eval_complex(z)? * self.1.eval_complex(z)?)
    }
    fn analytic_on_circle(&self, center: f64, radius: f64) -> bool {
        self.0.analytic_on_circle(center, radius) && self.1.analytic_on_circle(center, radius)
    }
}

/// x ↦ f(x + c), for the translation identity.
pub struct Shifted<F>(pub F, pub f64);

impl<F: ScalarFunction> ScalarFunction for Shifted<F> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x + self.1)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        self.0.deriv(k, x + self.1)
    }
    fn domain(&self) -> (f64, f64) {
        let (a, b) = self.0.domain();
        (a - self.1, b - self.1)
    }
    fn max_order(&self) -> Option<usize> {
        self.0.max_order()
    }
    fn eval_complex(&self, z: Complex64) -> Option<Complex64> {
        self.0.eval_complex(z + self.1)
    }
    fn analytic_on_circle(&self, center: f64, radius: f64) -> bool {
        self.0.analytic_on_circle(center + self.1, radius)
    }
}

// ---------------------------------------------------------------------------
// Bernoulli generating function
// ---------------------------------------------------------------------------

const BERNOULLI_TERMS: usize = 140;

/// B_j / j! for j = 0..=n, from the defining recurrence divided by (n+1)!:
/// b_n = −Σ_{k<n} b_k / (n+1−k)!.
pub(crate) fn bernoulli_scaled(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut sum = 0.0;
        for k in 0..m {
            sum += b[k] / factorial(m + 1 - k);
        }
        b[m] = -sum;
    }
    b
}

fn bernoulli_table() -> &'static [f64] {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| bernoulli_scaled(BERNOULLI_TERMS))
}

/// f(x) = x/(e^x − 1) = L_0(e^x), the Bernoulli generating function, with the
/// removable singularity at 0 giving 1. Evaluated by its power series on
/// (−4, 4), so derivatives of every order are available term by term.
#[derive(Debug, Clone, Copy)]
pub struct LZeroExp;

fn bernoulli_series_deriv(k: usize, x: f64) -> f64 {
    let table = bernoulli_table();
    let mut sum = 0.0;
    // Odd coefficients past j = 1 are exactly zero, so termination requires
    // two consecutive negligible terms.
    let mut small_run = 0;
    for (j, &bj) in table.iter().enumerate().skip(k) {
        let term = bj * ffall(j, k) * x.powi((j - k) as i32);
        sum += term;
        if j > k + 8 && term.abs() < 1e-18 * (1.0 + sum.abs()) {
            small_run += 1;
            if small_run >= 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    sum
}

impl ScalarFunction for LZeroExp {
    fn eval(&self, x: f64) -> f64 {
        bernoulli_series_deriv(0, x)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        bernoulli_series_deriv(k, x)
    }
    fn domain(&self) -> (f64, f64) {
        (-4.0, 4.0)
    }
}

/// The even part of the Bernoulli generating function:
/// x/(e^x − 1) + x/2 = (x/2) coth(x/2).
#[derive(Debug, Clone, Copy)]
pub struct BernoulliEven;

impl ScalarFunction for BernoulliEven {
    fn eval(&self, x: f64) -> f64 {
        bernoulli_series_deriv(0, x) + 0.5 * x
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let extra = match k {
            0 => 0.5 * x,
            1 => 0.5,
            _ => 0.0,
        };
        bernoulli_series_deriv(k, x) + extra
    }
    fn domain(&self) -> (f64, f64) {
        (-4.0, 4.0)
    }
}
