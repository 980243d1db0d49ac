use num_complex::Complex64;

use super::factorial;
use super::functions::{check_domain, check_order, ScalarFunction};
use super::nodes::NodeSystem;
use crate::error::{DdError, Result};
use crate::quad::{gauss_legendre, QuadratureSpec};

/// Divided difference over a flat tuple with all copies of a value adjacent.
///
/// Sorts a copy of the tuple first, so the result is bit-exact under
/// permutation of the input. Repeated values are seeded with f^{(j)}(x)/j! on
/// the tableau diagonals.
pub fn dd_flat(xs: &[f64], f: &dyn ScalarFunction) -> Result<f64> {
    if xs.is_empty() {
        return Err(DdError::Precondition("empty node tuple".into()));
    }
    let mut z = xs.to_vec();
    z.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = z.len() - 1;
    let mut table: Vec<f64> = z.iter().map(|&x| f.eval(x)).collect();
    for j in 1..=n {
        for i in (j..=n).rev() {
            if z[i] == z[i - j] {
                table[i] = f.deriv(j, z[i]) / factorial(j);
            } else {
                table[i] = (table[i] - table[i - 1]) / (z[i] - z[i - j]);
            }
        }
    }
    Ok(table[n])
}

/// [x_0, …, x_n]f by the two-term recursion; all multiplicities must be one.
pub fn dd_recursive(nodes: &NodeSystem, f: &dyn ScalarFunction) -> Result<f64> {
    if !nodes.is_simple() {
        return Err(DdError::Precondition(
            "dd_recursive requires pairwise distinct nodes; use dd_confluent".into(),
        ));
    }
    check_domain(f, nodes)?;
    let z = nodes.flat();
    let n = z.len() - 1;
    // Column-by-column realization of the recursion.
    let mut table: Vec<f64> = z.iter().map(|&x| f.eval(x)).collect();
    for j in 1..=n {
        for i in (j..=n).rev() {
            table[i] = (table[i] - table[i - 1]) / (z[i] - z[i - j]);
        }
    }
    Ok(table[n])
}

/// [x_0^{m_0}, …, x_k^{m_k}]f via the Hermite–Newton tableau with derivative
/// seeding; reduces to `dd_recursive` when all multiplicities are one.
pub fn dd_confluent(nodes: &NodeSystem, f: &dyn ScalarFunction) -> Result<f64> {
    check_domain(f, nodes)?;
    check_order(f, nodes.max_multiplicity() - 1)?;
    dd_flat(&nodes.flat(), f)
}

/// The explicit sum Σ f(x_k) Π (x_k − x_j)^{-1}.
///
/// Test oracle for well-separated simple nodes only; catastrophic
/// cancellation makes it useless for clustered nodes.
pub fn dd_explicit_sum(nodes: &NodeSystem, f: &dyn ScalarFunction) -> Result<f64> {
    if !nodes.is_simple() {
        return Err(DdError::Precondition(
            "explicit sum formula requires simple nodes".into(),
        ));
    }
    check_domain(f, nodes)?;
    let z = nodes.flat();
    let mut sum = 0.0;
    for (k, &xk) in z.iter().enumerate() {
        let mut denom = 1.0;
        for (j, &xj) in z.iter().enumerate() {
            if j != k {
                denom *= xk - xj;
            }
        }
        sum += f.eval(xk) / denom;
    }
    Ok(sum)
}

// ---------------------------------------------------------------------------
// Genocchi-Hermite simplex oracle
// ---------------------------------------------------------------------------

/// Tensorized Gauss–Legendre evaluation of the ordered-simplex integral after
/// the corner (Duffy) substitution t_1 = v_1, t_k = t_{k-1} v_k, which has
/// Jacobian t_1 ⋯ t_{n-1}. `v_1` runs over [a, b] so the outer axis can be
/// bisected adaptively.
fn simplex_tensor(
    z: &[f64],
    f: &dyn ScalarFunction,
    order: usize,
    a: f64,
    b: f64,
) -> f64 {
    let n = z.len() - 1;
    let rule = gauss_legendre(order);

    fn rec(
        level: usize,
        n: usize,
        t_prev: f64,
        arg: f64,
        z: &[f64],
        f: &dyn ScalarFunction,
        nodes: &[f64],
        weights: &[f64],
        a: f64,
        b: f64,
    ) -> f64 {
        let (lo, hi) = if level == 1 { (a, b) } else { (0.0, 1.0) };
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut sum = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            let v = c + h * x;
            let t = if level == 1 { v } else { t_prev * v };
            let arg2 = arg + t * (z[level] - z[level - 1]);
            let inner = if level == n {
                f.deriv(n, arg2)
            } else {
                // Jacobian factor t_level for level < n.
                t * rec(level + 1, n, t, arg2, z, f, nodes, weights, a, b)
            };
            sum += w * inner;
        }
        sum * h
    }

    rec(1, n, 0.0, z[0], z, f, &rule.0, &rule.1, a, b)
}

/// The Genocchi–Hermite integral of f^{(n)} over the ordered unit simplex —
/// an oracle for the confluent tableau, valid for repeated nodes too.
///
/// Adaptive bisection happens along the outermost simplex variable; the error
/// estimate per segment is the difference of two tensor orders.
pub fn dd_hermite_genocchi(
    nodes: &NodeSystem,
    f: &dyn ScalarFunction,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_domain(f, nodes)?;
    let z = nodes.flat();
    let n = z.len() - 1;
    check_order(f, n)?;
    if n == 0 {
        return Ok(f.eval(z[0]));
    }
    let (lo_order, hi_order) = match n {
        1..=3 => (16, 24),
        4 => (10, 14),
        _ => (9, 13),
    };
    // Queue of v_1 segments, refined worst-first.
    let mut segments: Vec<(f64, f64, f64, f64)> = Vec::new(); // (a, b, value, err)
    let estimate = |a: f64, b: f64| -> (f64, f64) {
        let lo = simplex_tensor(&z, f, lo_order, a, b);
        let hi = simplex_tensor(&z, f, hi_order, a, b);
        (hi, (hi - lo).abs())
    };
    let (v, e) = estimate(0.0, 1.0);
    segments.push((0.0, 1.0, v, e));
    let mut splits = 0usize;
    let max_splits = 64;
    loop {
        let total_err: f64 = segments.iter().map(|s| s.3).sum();
        if total_err <= spec.tolerance {
            break;
        }
        if splits >= max_splits {
            let best: f64 = segments.iter().map(|s| s.2).sum();
            return Err(DdError::ToleranceNotMet {
                best,
                error: total_err,
            });
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.3.partial_cmp(&y.3).unwrap())
            .unwrap();
        let (a, b, _, _) = segments.swap_remove(idx);
        let mid = 0.5 * (a + b);
        let (v1, e1) = estimate(a, mid);
        let (v2, e2) = estimate(mid, b);
        segments.push((a, mid, v1, e1));
        segments.push((mid, b, v2, e2));
        splits += 1;
    }
    segments.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    Ok(segments.iter().map(|s| s.2).sum())
}

// ---------------------------------------------------------------------------
// Contour oracle
// ---------------------------------------------------------------------------

/// Trapezoidal evaluation of (2πi)^{-1} ∮ f(ζ) Π (ζ − x_j)^{-1} dζ over the
/// circle (center, radius) — the second independent oracle, spectrally
/// accurate in `points` and valid for confluent nodes.
pub fn dd_contour(
    nodes: &NodeSystem,
    f: &dyn ScalarFunction,
    center: f64,
    radius: f64,
    points: usize,
) -> Result<f64> {
    if radius <= 0.0 || points < 4 {
        return Err(DdError::Precondition(
            "radius must be positive and points >= 4".into(),
        ));
    }
    if f.eval_complex(Complex64::new(center, 0.0)).is_none() {
        return Err(DdError::Capability(
            "function does not support complex evaluation".into(),
        ));
    }
    if !f.analytic_on_circle(center, radius) {
        return Err(DdError::Geometry(
            "circle leaves the analyticity domain of the function".into(),
        ));
    }
    let margin = 1e-9 * f64::max(1.0, radius);
    for &(x, _) in nodes.entries() {
        let d = (x - center).abs();
        if d >= radius - margin {
            return Err(DdError::Geometry(format!(
                "node {x} not strictly inside the circle (center {center}, radius {radius})"
            )));
        }
    }
    let z = nodes.flat();
    let n = points;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let e = Complex64::new(0.0, theta).exp();
        let zeta = Complex64::new(center, 0.0) + radius * e;
        let mut denom = Complex64::new(1.0, 0.0);
        for &x in &z {
            denom *= zeta - x;
        }
        let fv = f.eval_complex(zeta).unwrap();
        sum += fv * e / denom;
    }
    let value = sum * radius / n as f64;
    Ok(value.re)
}

// ---------------------------------------------------------------------------
// Leibniz and substitution rules
// ---------------------------------------------------------------------------

/// Σ_{j=0}^n [x_0,…,x_j]f · [x_j,…,x_n]g over the flat node tuple; equals
/// the divided difference of the product f·g.
pub fn leibniz_rhs(
    nodes: &NodeSystem,
    f: &dyn ScalarFunction,
    g: &dyn ScalarFunction,
) -> Result<f64> {
    check_domain(f, nodes)?;
    check_domain(g, nodes)?;
    let needed = nodes.max_multiplicity().saturating_sub(1);
    check_order(f, needed)?;
    check_order(g, needed)?;
    let z = nodes.flat();
    let n = z.len() - 1;
    let mut sum = 0.0;
    for j in 0..=n {
        sum += dd_flat(&z[..=j], f)? * dd_flat(&z[j..], g)?;
    }
    Ok(sum)
}

/// g(x) := [y_0, …, y_p, x]f as a function of x, with exact derivatives
/// g^{(k)}(x) = k! · [y_0, …, y_p, x^{k+1}]f.
pub struct SubstituteFn<'a> {
    prefix: &'a NodeSystem,
    f: &'a dyn ScalarFunction,
}

impl<'a> SubstituteFn<'a> {
    pub fn new(prefix: &'a NodeSystem, f: &'a dyn ScalarFunction) -> Self {
        SubstituteFn { prefix, f }
    }
}

impl ScalarFunction for SubstituteFn<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.deriv(0, x)
    }
    fn deriv(&self, k: usize, x: f64) -> f64 {
        let merged = match self.prefix.merge(&NodeSystem::new(&[(x, k + 1)]).unwrap()) {
            Ok(m) => m,
            Err(_) => return f64::NAN,
        };
        match dd_confluent(&merged, self.f) {
            Ok(v) => factorial(k) * v,
            Err(_) => f64::NAN,
        }
    }
    fn domain(&self) -> (f64, f64) {
        self.f.domain()
    }
}

/// [x_0, …, x_q]g with g(x) = [y_0, …, y_p, x]f. Both the nested evaluation
/// and the merged node system are computed; the merged-form value is
/// returned (the nested path is exposed through [`SubstituteFn`]).
pub fn dd_substitute(
    prefix: &NodeSystem,
    nodes: &NodeSystem,
    f: &dyn ScalarFunction,
) -> Result<f64> {
    let merged = prefix.merge(nodes)?;
    dd_confluent(&merged, f)
}
