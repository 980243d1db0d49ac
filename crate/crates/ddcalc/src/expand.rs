//! Noncommutative Taylor machinery: the divided-difference expansion of
//! e^{a+b}, the general f(a+b) expansion, parametric derivative formulas, the
//! second-order expansion of f(∇_{a+b})(x), and the tracial derivative
//! identity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ddcore::{dd_flat, Exp, ScalarFunction};
use crate::error::{DdError, Result};
use crate::matcalc::{contract, eigh, HermitianMatrix};
use crate::quad::gauss_legendre;

/// Default cap on the expansion order; each term costs O(dim^{n+1}) kernel
/// evaluations.
pub const ORDER_CAP: usize = 6;

/// One truncated expansion of a target matrix: terms 0…N, their running
/// partial sums, and the Frobenius distance from each partial sum to the
/// target.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub order: usize,
    pub terms: Vec<DMatrix<Complex64>>,
    pub partial_sums: Vec<DMatrix<Complex64>>,
    pub target: DMatrix<Complex64>,
    pub remainders: Vec<f64>,
}

fn frob(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_cap(n: usize) -> Result<()> {
    if n > ORDER_CAP {
        return Err(DdError::Capability(format!(
            "expansion order {n} exceeds the cap {ORDER_CAP}"
        )));
    }
    Ok(())
}

/// Term n of e^{a+b} = Σ_n ([a^(0),…,a^(n)]exp)(b·…·b): the (n+1)-slot
/// contraction over a with the confluent exponential divided difference and n
/// copies of b.
pub fn exp_expansion_term(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    check_cap(n)?;
    let kernel = |lambda: &[f64]| dd_flat(lambda, &Exp);
    contract(a, &kernel, &vec![b.matrix().clone(); n])
}

/// The same term written through the functional equation of exp and its
/// homogeneity: e^a · ([0, ∇^(1), ∇^(1)+∇^(2), …]exp)(b·…·b), realized with
/// the slot kernel [0, λ_{i_1}−λ_{i_0}, …, λ_{i_n}−λ_{i_0}]exp.
pub fn exp_expansion_variant_nabla(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    check_cap(n)?;
    let spectral = eigh(a)?;
    let kernel = |lambda: &[f64]| {
        let mut nodes = Vec::with_capacity(lambda.len());
        nodes.push(0.0);
        nodes.extend(lambda[1..].iter().map(|&l| l - lambda[0]));
        dd_flat(&nodes, &Exp)
    };
    let inner = contract(a, &kernel, &vec![b.matrix().clone(); n])?;
    Ok(spectral.apply(f64::exp) * inner)
}

/// Term n as the iterated integral over the ordered simplex
/// 1 ≥ s_1 ≥ … ≥ s_n ≥ 0 of e^{(1−s_1)a} b e^{(s_1−s_2)a} b ⋯ e^{s_n a},
/// by tensorized Gauss–Legendre quadrature (n ≤ 2; the integrand is entire,
/// so a fixed high-order rule converges well past 1e-7).
pub fn exp_expansion_simplex(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    if n > 2 {
        return Err(DdError::Capability(
            "simplex quadrature is implemented for orders 0, 1, 2".into(),
        ));
    }
    let spectral = eigh(a)?;
    let exp_t = |t: f64| spectral.apply(|l| (t * l).exp());
    if n == 0 {
        return Ok(exp_t(1.0));
    }
    let rule = gauss_legendre(32);
    let d = a.dim();
    let mut acc = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    if n == 1 {
        for (x1, w1) in rule.0.iter().zip(rule.1.iter()) {
            let s1 = 0.5 * (x1 + 1.0);
            acc += (exp_t(1.0 - s1) * b.matrix() * exp_t(s1)) * Complex64::new(0.5 * w1, 0.0);
        }
    } else {
        for (x1, w1) in rule.0.iter().zip(rule.1.iter()) {
            let s1 = 0.5 * (x1 + 1.0);
            for (x2, w2) in rule.0.iter().zip(rule.1.iter()) {
                // Inner variable on [0, s1].
                let s2 = 0.5 * s1 * (x2 + 1.0);
                let w = 0.5 * w1 * 0.5 * s1 * w2;
                acc += (exp_t(1.0 - s1)
                    * b.matrix()
                    * exp_t(s1 - s2)
                    * b.matrix()
                    * exp_t(s2))
                    * Complex64::new(w, 0.0);
            }
        }
    }
    Ok(acc)
}

/// Terms 0…N of the expansion of e^{a+b} together with partial sums and
/// remainders against the directly computed target.
pub fn exp_expansion_report(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    order: usize,
) -> Result<ExpansionReport> {
    check_cap(order)?;
    let sum_h = HermitianMatrix::new(a.matrix() + b.matrix())?;
    let target = eigh(&sum_h)?.apply(f64::exp);
    let mut terms = Vec::with_capacity(order + 1);
    let mut partial_sums = Vec::with_capacity(order + 1);
    let mut remainders = Vec::with_capacity(order + 1);
    let d = a.dim();
    let mut running = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for n in 0..=order {
        let t = exp_expansion_term(a, b, n)?;
        running += &t;
        terms.push(t);
        partial_sums.push(running.clone());
        remainders.push(frob(&(&target - &running)));
    }
    Ok(ExpansionReport {
        order,
        terms,
        partial_sums,
        target,
        remainders,
    })
}

/// Term n of the expansion of f(a+b): the (n+1)-slot contraction over a with
/// the confluent divided difference of f and n copies of b.
pub fn taylor_term(
    a: &HermitianMatrix,
    b: &DMatrix<Complex64>,
    f: &dyn ScalarFunction,
    n: usize,
) -> Result<DMatrix<Complex64>> {
    check_cap(n)?;
    let kernel = |lambda: &[f64]| dd_flat(lambda, f);
    contract(a, &kernel, &vec![b.clone(); n])
}

/// Derivatives of a two-parameter family f(a(s,t)) at (0,0), given
/// a, δ_1a, δ_2a, δ_1δ_2a:
///
/// first = ([λ_0,λ_1]f)(δ_1a),
/// mixed = ([λ_0,λ_1]f)(δ_1δ_2a)
///       + ([λ_0,λ_1,λ_2]f)(δ_1a·δ_2a) + ([λ_0,λ_1,λ_2]f)(δ_2a·δ_1a).
pub fn parametric_derivatives(
    a: &HermitianMatrix,
    d1: &DMatrix<Complex64>,
    d2: &DMatrix<Complex64>,
    d12: &DMatrix<Complex64>,
    f: &dyn ScalarFunction,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let d = a.dim();
    if [d1, d2, d12].iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(DdError::Precondition(
            "all direction matrices must share the dimension of a".into(),
        ));
    }
    let kernel = |lambda: &[f64]| dd_flat(lambda, f);
    let first = contract(a, &kernel, &[d1.clone()])?;
    let mixed = contract(a, &kernel, &[d12.clone()])?
        + contract(a, &kernel, &[d1.clone(), d2.clone()])?
        + contract(a, &kernel, &[d2.clone(), d1.clone()])?;
    Ok((first, mixed))
}

/// The seven-term second-order expansion of f(∇_{a+b})(x): in the forward
/// differences μ_j = λ_{i_j} − λ_{i_{j−1}},
///
///   f(∇_a)(x)
///   − ([μ_1+μ_2, μ_2]f)(b·x) + ([μ_1+μ_2, μ_1]f)(x·b)
///   + ([μ_1+μ_2+μ_3, μ_2+μ_3, μ_3]f)(b·b·x)
///   + ([μ_1, μ_1+μ_2, μ_1+μ_2+μ_3]f)(x·b·b)
///   − ([μ_2, μ_1+μ_2, μ_1+μ_2+μ_3]f)(b·x·b)
///   − ([μ_2, μ_2+μ_3, μ_1+μ_2+μ_3]f)(b·x·b).
///
/// The signs of the two mixed b·x·b terms follow from the cross terms of
/// (−b⊗1 + 1⊗b)², each of which picks up exactly one minus sign; a central
/// finite difference in ε of f(∇_{a+εb})(x) confirms them.
///
/// The kernels are evaluated directly in the slot eigenvalues so that every
/// divided-difference node is a single subtraction λ_j − λ_i. Accumulating
/// the forward differences instead can leave mathematically coincident nodes
/// one rounding error apart, and the confluent tableau then takes a secant
/// across that gap rather than the derivative, destroying all accuracy.
pub fn nabla_expansion_order2(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    x: &DMatrix<Complex64>,
    f: &dyn ScalarFunction,
) -> Result<DMatrix<Complex64>> {
    let bm = b.matrix().clone();
    let point = |l: &[f64]| Ok(f.eval(l[1] - l[0]));
    let k_lin_left = |l: &[f64]| dd_flat(&[l[2] - l[0], l[2] - l[1]], f);
    let k_lin_right = |l: &[f64]| dd_flat(&[l[2] - l[0], l[1] - l[0]], f);
    let k_bbx = |l: &[f64]| dd_flat(&[l[3] - l[2], l[3] - l[1], l[3] - l[0]], f);
    let k_xbb = |l: &[f64]| dd_flat(&[l[1] - l[0], l[2] - l[0], l[3] - l[0]], f);
    let k_bxb_1 = |l: &[f64]| dd_flat(&[l[2] - l[1], l[2] - l[0], l[3] - l[0]], f);
    let k_bxb_2 = |l: &[f64]| dd_flat(&[l[2] - l[1], l[3] - l[1], l[3] - l[0]], f);

    let mut total = contract(a, &point, &[x.clone()])?;
    total -= contract(a, &k_lin_left, &[bm.clone(), x.clone()])?;
    total += contract(a, &k_lin_right, &[x.clone(), bm.clone()])?;
    total += contract(a, &k_bbx, &[bm.clone(), bm.clone(), x.clone()])?;
    total += contract(a, &k_xbb, &[x.clone(), bm.clone(), bm.clone()])?;
    total -= contract(a, &k_bxb_1, &[bm.clone(), x.clone(), bm.clone()])?;
    total -= contract(a, &k_bxb_2, &[bm.clone(), x.clone(), bm])?;
    Ok(total)
}

/// Both sides of the tracial derivative identity, with φ = tr/dim:
///
/// lhs = (d/dε)|_0 φ(f(∇_{a+εb})(x)·y), evaluated through the two linear
/// expansion terms; rhs = −φ(b·([μ_1, −μ_2]f)(x·y)) + φ(b·([−μ_1, μ_2]f)(y·x)).
pub fn trace_derivative_identity(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    x: &HermitianMatrix,
    y: &HermitianMatrix,
    f: &dyn ScalarFunction,
) -> Result<(f64, f64)> {
    let d = a.dim() as f64;
    let phi = |m: &DMatrix<Complex64>| m.trace().re / d;
    let bm = b.matrix().clone();
    let xm = x.matrix().clone();
    let ym = y.matrix().clone();

    let k_lin_left = |l: &[f64]| dd_flat(&[l[2] - l[0], l[2] - l[1]], f);
    let k_lin_right = |l: &[f64]| dd_flat(&[l[2] - l[0], l[1] - l[0]], f);
    let linear = contract(a, &k_lin_right, &[xm.clone(), bm.clone()])?
        - contract(a, &k_lin_left, &[bm.clone(), xm.clone()])?;
    let lhs = phi(&(linear * &ym));

    let k_pos_neg = |l: &[f64]| dd_flat(&[l[1] - l[0], l[1] - l[2]], f);
    let k_neg_pos = |l: &[f64]| dd_flat(&[l[0] - l[1], l[2] - l[1]], f);
    let t1 = contract(a, &k_pos_neg, &[xm.clone(), ym.clone()])?;
    let t2 = contract(a, &k_neg_pos, &[ym, xm])?;
    let rhs = -phi(&(&bm * t1)) + phi(&(bm * t2));
    Ok((lhs, rhs))
}
