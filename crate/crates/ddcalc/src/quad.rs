//! Shared numerical utilities: Gauss–Legendre rules, adaptive quadrature on
//! finite intervals and on `(0, ∞)`, matrix-valued quadrature with a shared
//! subdivision tree, and Richardson-extrapolated directional derivatives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{DdError, Result};

/// Configuration for adaptive quadrature.
///
/// The error estimate on every segment is the difference between the
/// `base_order` and `2 * base_order` Gauss–Legendre results; segments are
/// bisected until the local estimate falls below the proportional share of
/// `tolerance`.
#[derive(Debug, Clone)]
pub struct QuadratureSpec {
    pub base_order: usize,
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            base_order: 12,
            tolerance: 1e-10,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(tol: f64) -> Self {
        QuadratureSpec {
            tolerance: tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.base_order < 2 {
            return Err(DdError::Precondition("base_order must be >= 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(DdError::Precondition("tolerance must be positive".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(DdError::Precondition("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Configuration for Richardson-extrapolated finite differences.
#[derive(Debug, Clone)]
pub struct DiffSpec {
    pub base_step: f64,
    pub richardson_levels: usize,
}

impl Default for DiffSpec {
    fn default() -> Self {
        DiffSpec {
            base_step: 0.05,
            richardson_levels: 4,
        }
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes and weights
// ---------------------------------------------------------------------------

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn rule_cache() -> &'static Mutex<HashMap<usize, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre polynomial and cached.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    if let Some(r) = rule_cache().lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let rule: Rule = Arc::new((nodes, weights));
    rule_cache().lock().unwrap().insert(n, rule.clone());
    rule
}

/// Gauss–Legendre approximation of `∫_a^b g` with `n` points.
pub fn gl_interval<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        sum += w * g(c + h * x);
    }
    sum * h
}

// ---------------------------------------------------------------------------
// Adaptive scalar quadrature
// ---------------------------------------------------------------------------

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn segment_estimate<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64, p: usize) -> Segment {
    let lo = gl_interval(g, a, b, p);
    let hi = gl_interval(g, a, b, 2 * p);
    // For algebraically convergent (endpoint-singular) segments the
    // comparison sits right at the true error of `hi`, so pad it a little;
    // floor at machine epsilon relative to the segment value, which the
    // comparison cannot see.
    let error = f64::max(1.25 * (hi - lo).abs(), f64::EPSILON * hi.abs());
    Segment {
        a,
        b,
        value: hi,
        error,
    }
}

/// Adaptive Gauss–Legendre quadrature of `g` over `[a, b]`.
///
/// Returns the integral and the accumulated error estimate. The subdivision
/// order is deterministic (worst segment first, ties by interval position).
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    g: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    spec.validate()?;
    let p = spec.base_order;
    let mut segments = vec![segment_estimate(g, a, b, p)];
    let mut splits = 0usize;
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= spec.tolerance {
            break;
        }
        // Pick the segment with the largest error estimate; break ties by
        // the left endpoint so the refinement order is reproducible.
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|(i, x), (j, y)| {
                x.error
                    .total_cmp(&y.error)
                    .then_with(|| y.a.total_cmp(&x.a))
                    .then_with(|| j.cmp(i))
            })
            .unwrap();
        if splits >= spec.max_subdivisions {
            let best: f64 = segments.iter().map(|s| s.value).sum();
            return Err(DdError::ToleranceNotMet {
                best,
                error: total_err,
            });
        }
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval exhausted at machine precision; accept as is.
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        segments.push(segment_estimate(g, seg.a, mid, p));
        segments.push(segment_estimate(g, mid, seg.b, p));
        splits += 1;
    }
    // Deterministic reduction order for the final sum.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok((value, error))
}

/// Adaptive quadrature of `g` over `(0, ∞)`.
///
/// The integral is split at 1 and the tail is pulled back by `u = 1/v`, so
/// both pieces live on `[0, 1]` with any algebraic singularity sitting at the
/// endpoint 0, where bisection is numerically well conditioned. The caller
/// guarantees absolute integrability.
pub fn integrate_halfline<F: FnMut(f64) -> f64>(
    g: &mut F,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let (head, e1) = integrate_interval(g, 0.0, 1.0, spec)?;
    let mut tail_integrand = |v: f64| g(1.0 / v) / (v * v);
    let (tail, e2) = integrate_interval(&mut tail_integrand, 0.0, 1.0, spec)?;
    Ok((head + tail, e1 + e2))
}

// ---------------------------------------------------------------------------
// Matrix-valued quadrature (one shared subdivision tree, max-entry error)
// ---------------------------------------------------------------------------

struct MatSegment {
    a: f64,
    b: f64,
    value: DMatrix<Complex64>,
    error: f64,
}

fn gl_interval_matrix<F: FnMut(f64) -> DMatrix<Complex64>>(
    g: &mut F,
    a: f64,
    b: f64,
    n: usize,
) -> DMatrix<Complex64> {
    let rule = gauss_legendre(n);
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum: Option<DMatrix<Complex64>> = None;
    for (x, w) in rule.0.iter().zip(rule.1.iter()) {
        let v = g(c + h * x) * Complex64::new(*w, 0.0);
        sum = Some(match sum {
            None => v,
            Some(s) => s + v,
        });
    }
    sum.unwrap() * Complex64::new(h, 0.0)
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn mat_segment_estimate<F: FnMut(f64) -> DMatrix<Complex64>>(
    g: &mut F,
    a: f64,
    b: f64,
    p: usize,
) -> MatSegment {
    let lo = gl_interval_matrix(g, a, b, p);
    let hi = gl_interval_matrix(g, a, b, 2 * p);
    let error = max_entry(&(&hi - &lo));
    MatSegment {
        a,
        b,
        value: hi,
        error,
    }
}

/// Bochner-style matrix quadrature over `[a, b]`: all entries share one
/// subdivision tree driven by the max-entry error estimate.
pub fn integrate_interval_matrix<F: FnMut(f64) -> DMatrix<Complex64>>(
    g: &mut F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<(DMatrix<Complex64>, f64)> {
    spec.validate()?;
    let p = spec.base_order;
    let mut segments = vec![mat_segment_estimate(g, a, b, p)];
    let mut splits = 0usize;
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if total_err <= spec.tolerance {
            break;
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|(i, x), (j, y)| {
                x.error
                    .total_cmp(&y.error)
                    .then_with(|| y.a.total_cmp(&x.a))
                    .then_with(|| j.cmp(i))
            })
            .unwrap();
        if splits >= spec.max_subdivisions {
            let mut best = segments[0].value.clone();
            for s in &segments[1..] {
                best += &s.value;
            }
            return Err(DdError::ToleranceNotMet {
                best: max_entry(&best),
                error: total_err,
            });
        }
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            segments.push(MatSegment { error: 0.0, ..seg });
            continue;
        }
        segments.push(mat_segment_estimate(g, seg.a, mid, p));
        segments.push(mat_segment_estimate(g, mid, seg.b, p));
        splits += 1;
    }
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = segments[0].value.clone();
    for s in &segments[1..] {
        value += &s.value;
    }
    let error = segments.iter().map(|s| s.error).sum();
    Ok((value, error))
}

/// Matrix-valued half-line quadrature, split at 1 with the tail pulled back
/// by `u = 1/v` as in [`integrate_halfline`].
pub fn integrate_halfline_matrix<F: FnMut(f64) -> DMatrix<Complex64>>(
    g: &mut F,
    spec: &QuadratureSpec,
) -> Result<(DMatrix<Complex64>, f64)> {
    let (head, e1) = integrate_interval_matrix(g, 0.0, 1.0, spec)?;
    let mut tail_integrand = |v: f64| g(1.0 / v) * Complex64::new(1.0 / (v * v), 0.0);
    let (tail, e2) = integrate_interval_matrix(&mut tail_integrand, 0.0, 1.0, spec)?;
    Ok((head + tail, e1 + e2))
}

// ---------------------------------------------------------------------------
// Richardson-extrapolated directional derivatives
// ---------------------------------------------------------------------------

/// `order`-th derivative of `F` at `point` along `direction`, by central
/// finite differences with Richardson extrapolation over step halvings.
///
/// Supported orders: 1, 2, 3.
pub fn directional_derivative<F: FnMut(&[f64]) -> f64>(
    mut func: F,
    point: &[f64],
    direction: &[f64],
    order: usize,
    spec: &DiffSpec,
) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(DdError::Precondition(format!(
            "derivative order {order} not supported (1..=3)"
        )));
    }
    if point.len() != direction.len() {
        return Err(DdError::Precondition(
            "point and direction dimension mismatch".into(),
        ));
    }
    let mut line = |t: f64| -> f64 {
        let x: Vec<f64> = point
            .iter()
            .zip(direction.iter())
            .map(|(p, d)| p + t * d)
            .collect();
        func(&x)
    };
    let stencil = |line: &mut dyn FnMut(f64) -> f64, h: f64| -> f64 {
        match order {
            1 => (line(h) - line(-h)) / (2.0 * h),
            2 => (line(h) - 2.0 * line(0.0) + line(-h)) / (h * h),
            _ => (line(2.0 * h) - 2.0 * line(h) + 2.0 * line(-h) - line(-2.0 * h))
                / (2.0 * h * h * h),
        }
    };
    let levels = spec.richardson_levels.max(1);
    // Richardson table; central stencils have an error series in h^2.
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels + 1);
    let mut h = spec.base_step;
    for i in 0..=levels {
        let d0 = stencil(&mut line, h);
        if !d0.is_finite() {
            return Err(DdError::Domain(
                "non-finite sample in finite difference".into(),
            ));
        }
        let mut row = vec![d0];
        for j in 1..=i {
            let factor = 4f64.powi(j as i32);
            let prev = table[i - 1][j - 1];
            let cur = row[j - 1];
            row.push((factor * cur - prev) / (factor - 1.0));
        }
        table.push(row);
        h *= 0.5;
    }
    Ok(*table.last().unwrap().last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        // n-point rule is exact to degree 2n-1.
        let mut g = |x: f64| x.powi(7) - 3.0 * x.powi(4) + x;
        let v = gl_interval(&mut g, 0.0, 1.0, 4);
        let exact = 1.0 / 8.0 - 3.0 / 5.0 + 0.5;
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn halfline_basic() {
        let spec = QuadratureSpec::with_tolerance(1e-10);
        let (v, _) = integrate_halfline(&mut |x| (1.0 + x).powi(-2), &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "got {v}");
    }

    #[test]
    fn halfline_mellin_half() {
        // ∫ x^{-1/2}/(1+x) dx = π/sin(π/2) = π.
        let spec = QuadratureSpec::with_tolerance(1e-10);
        let (v, _) = integrate_halfline(&mut |x| x.powf(-0.5) / (1.0 + x), &spec).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn halfline_map_invariance() {
        // ∫ g(λu) λ du = ∫ g du, the scalar heart of the substitution lemma.
        let spec = QuadratureSpec::with_tolerance(1e-11);
        let g = |x: f64| x / ((x + 1.0) * (x + 2.0) * (x + 3.0));
        let (base, _) = integrate_halfline(&mut { g }, &spec).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let (v, _) = integrate_halfline(&mut |u| g(lambda * u) * lambda, &spec).unwrap();
            assert!((v - base).abs() < 1e-9, "lambda={lambda}: {v} vs {base}");
        }
    }

    #[test]
    fn subdivision_budget_error() {
        let spec = QuadratureSpec {
            base_order: 2,
            tolerance: 1e-14,
            max_subdivisions: 3,
        };
        let r = integrate_halfline(&mut |x| x.powf(-0.5) / (1.0 + x), &spec);
        match r {
            Err(DdError::ToleranceNotMet { best, error }) => {
                assert!(best.is_finite() && error > 0.0);
            }
            other => panic!("expected ToleranceNotMet, got {other:?}"),
        }
    }

    #[test]
    fn directional_derivative_orders() {
        let spec = DiffSpec::default();
        let d1 = directional_derivative(|x| x[0] * x[0], &[3.0], &[1.0], 1, &spec).unwrap();
        assert!((d1 - 6.0).abs() < 1e-9);
        // s ∂_s log s = 1.
        let d = directional_derivative(|x| x[0].ln(), &[2.0], &[2.0], 1, &spec).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let d2 = directional_derivative(|x| x[0].exp(), &[0.0], &[1.0], 2, &spec).unwrap();
        assert!((d2 - 1.0).abs() < 1e-8);
        let d3 = directional_derivative(|x| x[0].exp(), &[0.0], &[1.0], 3, &spec).unwrap();
        assert!((d3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn richardson_levels_improve() {
        let f = |x: &[f64]| (x[0]).sin() * (x[0]).exp();
        let exact = |x: f64| x.cos() * x.exp() + x.sin() * x.exp();
        let coarse = DiffSpec {
            base_step: 0.2,
            richardson_levels: 1,
        };
        let fine = DiffSpec {
            base_step: 0.2,
            richardson_levels: 4,
        };
        let e1 = (directional_derivative(f, &[1.1], &[1.0], 1, &coarse).unwrap() - exact(1.1)).abs();
        let e2 = (directional_derivative(f, &[1.1], &[1.0], 1, &fine).unwrap() - exact(1.1)).abs();
        assert!(e2 < e1);
    }

    #[test]
    fn error_estimate_honesty() {
        // Catalog of integrands with known antiderivatives on (0, ∞).
        let cases: Vec<(Box<dyn Fn(f64) -> f64>, f64)> = vec![
            (Box::new(|x| (1.0 + x).powi(-2)), 1.0),
            (Box::new(|x| (-x).exp()), 1.0),
            (Box::new(|x| 1.0 / ((1.0 + x) * (2.0 + x))), 2f64.ln()),
            (Box::new(|x| x * (1.0 + x).powi(-3)), 0.5),
            (Box::new(|x| (1.0 + x).powf(-1.5)), 2.0),
        ];
        let spec = QuadratureSpec::with_tolerance(1e-9);
        let mut honest = 0;
        let mut total = 0;
        for (g, exact) in &cases {
            for lambda in [0.3, 0.7, 1.0, 1.9, 4.2] {
                let (v, est) =
                    integrate_halfline(&mut |u| g(lambda * u) * lambda, &spec).unwrap();
                let true_err = (v - exact).abs();
                total += 1;
                if est >= true_err {
                    honest += 1;
                }
            }
        }
        assert!(
            honest as f64 >= 0.95 * total as f64,
            "honest {honest}/{total}"
        );
    }
}
