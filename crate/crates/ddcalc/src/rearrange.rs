//! Verification harnesses for the rearrangement identity and its two
//! supporting lemmas: the spectral Fubini interchange and operator
//! substitution for commuting positive families.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{DdError, Result};
use crate::funcs::{h_func, m_func_general_z, MultiIndex};
use crate::matcalc::{contract_modular, eigh, HermitianMatrix, SpectralData};
use crate::quad::{integrate_halfline, integrate_halfline_matrix, QuadratureSpec};

/// One instance of the rearrangement identity: the integrand family
/// f_0(x) = x^ν (1+x)^{−α_0−1}, f_j(x) = (1+x)^{−α_j−1} paired with
/// A = e^a and contraction arguments b_1, …, b_p.
#[derive(Debug, Clone)]
pub struct RearrangementCase {
    pub alpha: MultiIndex,
    pub nu: f64,
    pub a: HermitianMatrix,
    pub b: Vec<DMatrix<Complex64>>,
    pub quad: QuadratureSpec,
}

impl RearrangementCase {
    pub fn new(
        alpha: MultiIndex,
        nu: f64,
        a: HermitianMatrix,
        b: Vec<DMatrix<Complex64>>,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        let p = alpha.p();
        if b.len() != p {
            return Err(DdError::Precondition(format!(
                "{} contraction arguments supplied, expected p = {p}",
                b.len()
            )));
        }
        let strip_top = (alpha.total() + p) as f64;
        if !(-1.0 < nu && nu < strip_top) {
            return Err(DdError::Domain(format!(
                "nu = {nu} outside the convergence strip (-1, {strip_top})"
            )));
        }
        let d = a.dim();
        if b.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(DdError::Precondition(
                "contraction arguments must share the dimension of a".into(),
            ));
        }
        Ok(RearrangementCase {
            alpha,
            nu,
            a,
            b,
            quad,
        })
    }

    /// m = |α| + p − 1 − ν when ν is an admissible integer.
    pub fn integer_m(&self) -> Option<usize> {
        let top = self.alpha.total() + self.alpha.p() - 1;
        if (self.nu - self.nu.round()).abs() < 1e-12 && self.nu >= -1e-12 {
            let nu = self.nu.round() as i64;
            if nu <= top as i64 {
                return Some((top as i64 - nu) as usize);
            }
        }
        None
    }

    fn factor(&self, j: usize, x: f64) -> f64 {
        let power = (1.0 + x).powi(-(self.alpha.parts()[j] as i32) - 1);
        if j == 0 {
            x.powf(self.nu) * power
        } else {
            power
        }
    }
}

/// ∫_0^∞ f_0(uA) b_1 f_1(uA) ⋯ b_p f_p(uA) du as a Bochner matrix integral,
/// with A = e^a.
pub fn rearrangement_lhs(case: &RearrangementCase) -> Result<DMatrix<Complex64>> {
    let spectral = eigh(&case.a)?;
    let p = case.alpha.p();
    let mut integrand = |u: f64| -> DMatrix<Complex64> {
        let mut acc = spectral.apply(|l| case.factor(0, u * l.exp()));
        for j in 1..=p {
            acc = acc * &case.b[j - 1] * spectral.apply(|l| case.factor(j, u * l.exp()));
        }
        acc
    };
    let (value, _) = integrate_halfline_matrix(&mut integrand, &case.quad)?;
    Ok(value)
}

/// The rearranged closed form A^{−1} · F(Δ-variables)(b_1·…·b_p) with
/// F = H(·, m) for admissible integer ν; for p = 1, α = (0, 0) a non-integer
/// ν in (−1, 1) is supported through the general-exponent formula (distinct
/// eigenvalue ratios required).
pub fn rearrangement_rhs(case: &RearrangementCase) -> Result<DMatrix<Complex64>> {
    let spectral = eigh(&case.a)?;
    let exp_a = HermitianMatrix::new(spectral.apply(f64::exp))?;
    let alpha = case.alpha.clone();
    let contracted = if let Some(m) = case.integer_m() {
        let kernel = move |s: &[f64]| h_func(&alpha, s, m);
        contract_modular(&exp_a, &kernel, &case.b)?
    } else {
        if alpha.p() != 1 || alpha.total() != 0 {
            return Err(DdError::Capability(
                "non-integer nu is only supported for p = 1 with zero multi-index".into(),
            ));
        }
        let z = -case.nu;
        let kernel = move |s: &[f64]| -> Result<f64> {
            let pi = std::f64::consts::PI;
            if (s[0] - 1.0).abs() < 1e-9 {
                // Confluent limit of the two-node value: z · t^{z−1} at t = 1.
                Ok(pi / (pi * z).sin() * z)
            } else {
                m_func_general_z(&[1.0, s[0]], z)
            }
        };
        contract_modular(&exp_a, &kernel, &case.b)?
    };
    let inv = spectral.apply(|l| (-l).exp());
    Ok(inv * contracted)
}

// ---------------------------------------------------------------------------
// Commuting families
// ---------------------------------------------------------------------------

fn commutator_defect(r: &[HermitianMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..r.len() {
        for j in (i + 1)..r.len() {
            let c = r[i].matrix() * r[j].matrix() - r[j].matrix() * r[i].matrix();
            worst = worst.max(c.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Joint diagonalization of a commuting Hermitian family: diagonalize a
/// generic linear combination, then read each member's spectrum off its
/// rotated diagonal. Fails if the family does not commute within 1e-10 or if
/// the combination was degenerate.
fn joint_diagonalize(r: &[HermitianMatrix]) -> Result<(SpectralData, Vec<Vec<f64>>)> {
    if r.is_empty() {
        return Err(DdError::Precondition("empty family".into()));
    }
    let d = r[0].dim();
    if r.iter().any(|m| m.dim() != d) {
        return Err(DdError::Precondition("family members differ in dimension".into()));
    }
    let scale = r
        .iter()
        .flat_map(|m| m.matrix().iter())
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    if commutator_defect(r) > 1e-10 * scale {
        return Err(DdError::Precondition("family does not commute".into()));
    }
    // Generic combination with irrational weight ratios.
    let mut combo = r[0].matrix().clone();
    for (j, m) in r.iter().enumerate().skip(1) {
        combo += m.matrix() * Complex64::new((j as f64 + 2.0).sqrt(), 0.0);
    }
    let spectral = eigh(&HermitianMatrix::new(combo)?)?;
    let u = spectral.unitary();
    let mut spectra = Vec::with_capacity(r.len());
    for m in r {
        let rotated = u.adjoint() * m.matrix() * u;
        let mut off = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    off = off.max(rotated[(i, j)].norm());
                }
            }
        }
        if off > 1e-8 * scale {
            return Err(DdError::Numeric(format!(
                "joint diagonalization failed (off-diagonal {off:.3e})"
            )));
        }
        spectra.push((0..d).map(|i| rotated[(i, i)].re).collect());
    }
    Ok((spectral, spectra))
}

/// Both sides of the substitution identity for a commuting positive family
/// R_0, …, R_n:
///
/// lhs = ∫_0^∞ f(uR_0, …, uR_n) du (scalar quadrature per joint eigenvalue
/// tuple), rhs = R_0^{−1} G(R_0^{−1}R_1, …, R_0^{−1}R_n) with
/// G(μ) = ∫ f(u, uμ_1, …, uμ_n) du.
pub fn operator_substitution_check(
    r: &[HermitianMatrix],
    f: &dyn Fn(&[f64]) -> f64,
    quad: &QuadratureSpec,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let (spectral, spectra) = joint_diagonalize(r)?;
    if spectra.iter().flatten().any(|&l| l <= 0.0) {
        return Err(DdError::Domain("family must be positive definite".into()));
    }
    let d = r[0].dim();
    let mut lhs_diag = Vec::with_capacity(d);
    let mut rhs_diag = Vec::with_capacity(d);
    for k in 0..d {
        let tuple: Vec<f64> = spectra.iter().map(|s| s[k]).collect();
        let mut g_lhs = |u: f64| {
            let args: Vec<f64> = tuple.iter().map(|&l| u * l).collect();
            f(&args)
        };
        let (v, _) = integrate_halfline(&mut g_lhs, quad)?;
        lhs_diag.push(v);

        let ratios: Vec<f64> = tuple.iter().map(|&l| l / tuple[0]).collect();
        let mut g_rhs = |u: f64| {
            let args: Vec<f64> = ratios.iter().map(|&mu| u * mu).collect();
            f(&args)
        };
        let (g, _) = integrate_halfline(&mut g_rhs, quad)?;
        rhs_diag.push(g / tuple[0]);
    }
    let assemble = |diag: &[f64]| {
        let dm = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        spectral.unitary() * dm * spectral.unitary().adjoint()
    };
    Ok((assemble(&lhs_diag), assemble(&rhs_diag)))
}

/// Both sides of the integral/functional-calculus interchange:
///
/// lhs = matrix quadrature of u ↦ f(u, R_0, …, R_n) (joint calculus per u),
/// rhs = F(R_0, …, R_n) with F(λ) = ∫ f(u, λ) du per joint eigenvalue tuple.
pub fn spectral_fubini_check(
    r: &[HermitianMatrix],
    f: &dyn Fn(f64, &[f64]) -> f64,
    quad: &QuadratureSpec,
) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let (spectral, spectra) = joint_diagonalize(r)?;
    let d = r[0].dim();
    let tuples: Vec<Vec<f64>> = (0..d)
        .map(|k| spectra.iter().map(|s| s[k]).collect())
        .collect();
    let u_mat = spectral.unitary().clone();
    let mut integrand = |u: f64| -> DMatrix<Complex64> {
        let dm = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(f(u, &tuples[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &u_mat * dm * u_mat.adjoint()
    };
    let (lhs, _) = integrate_halfline_matrix(&mut integrand, quad)?;

    let mut rhs_diag = Vec::with_capacity(d);
    for tuple in &tuples {
        let mut g = |u: f64| f(u, tuple);
        let (v, _) = integrate_halfline(&mut g, quad)?;
        rhs_diag.push(v);
    }
    let dm = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(rhs_diag[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let rhs = &u_mat * dm * u_mat.adjoint();
    Ok((lhs, rhs))
}
