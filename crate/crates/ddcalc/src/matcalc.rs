//! Finite-dimensional multi-slot functional calculus: Hermitian spectral
//! data, the eigen-kernel contraction `f(a^(0),…,a^(n))(b_1·…·b_n)`, and the
//! ∇-, modular- and doubled-variable conventions layered on top of it.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ddcore::NodeSystem;
use crate::error::{DdError, Result};

/// A square complex matrix asserted Hermitian at construction.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl HermitianMatrix {
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(DdError::Precondition("matrix must be square".into()));
        }
        let defect = max_abs(&(&data - data.adjoint()));
        if defect > 1e-12 * f64::max(1.0, max_abs(&data)) {
            return Err(DdError::Precondition(format!(
                "matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        Ok(HermitianMatrix { data })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let data = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        HermitianMatrix { data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let data = DMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }
}

/// Eigendecomposition a = U diag(λ) U* with λ ascending.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    unitary: DMatrix<Complex64>,
}

impl SpectralData {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unitary(&self) -> &DMatrix<Complex64> {
        &self.unitary
    }

    /// The ordinary matrix function g(a) = U diag(g(λ)) U*.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let d = self.eigenvalues.len();
        let diag = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(g(self.eigenvalues[i]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &self.unitary * diag * self.unitary.adjoint()
    }

    /// Same, for complex-valued g (e.g. λ ↦ e^{iξλ}).
    pub fn apply_complex(&self, g: impl Fn(f64) -> Complex64) -> DMatrix<Complex64> {
        let d = self.eigenvalues.len();
        let diag = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                g(self.eigenvalues[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        &self.unitary * diag * self.unitary.adjoint()
    }
}

/// Deterministic eigendecomposition of a Hermitian matrix by cyclic complex
/// Jacobi sweeps.
///
/// Eigenvalues are returned ascending; each eigenvector column is normalized
/// so its first component of modulus > 1e-12 is real and positive, making
/// the output a pure function of the input.
pub fn eigh(a: &HermitianMatrix) -> Result<SpectralData> {
    let d = a.dim();
    let mut m = a.data.clone();
    let mut u = DMatrix::<Complex64>::identity(d, d);
    let scale = f64::max(1.0, max_abs(&m));
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(m[(p, q)].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = m[(p, q)];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                // Unitary 2x2 rotation annihilating the (p,q) entry.
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(app - aqq);
                let c = Complex64::new(theta.cos(), 0.0);
                let s = phase * theta.sin();
                // Columns p, q of m and u.
                for i in 0..d {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c + miq * s.conj();
                    m[(i, q)] = -mip * s + miq * c;
                    let uip = u[(i, p)];
                    let uiq = u[(i, q)];
                    u[(i, p)] = uip * c + uiq * s.conj();
                    u[(i, q)] = -uip * s + uiq * c;
                }
                // Rows p, q of m (left multiplication by the adjoint).
                for j in 0..d {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = c.conj() * mpj + s * mqj;
                    m[(q, j)] = -s.conj() * mpj + c.conj() * mqj;
                }
            }
        }
    }
    let mut off = 0.0f64;
    for p in 0..d {
        for q in (p + 1)..d {
            off = off.max(m[(p, q)].norm());
        }
    }
    if off > 1e-10 * scale {
        return Err(DdError::Numeric(format!(
            "Jacobi sweeps did not converge (off-diagonal {off:.3e})"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut unitary = DMatrix::<Complex64>::zeros(d, d);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Phase convention: first component of modulus > 1e-12 real positive.
        let mut phase = Complex64::new(1.0, 0.0);
        for i in 0..d {
            let z = u[(i, old_col)];
            if z.norm() > 1e-12 {
                phase = z.conj() / z.norm();
                break;
            }
        }
        for i in 0..d {
            unitary[(i, new_col)] = u[(i, old_col)] * phase;
        }
    }
    Ok(SpectralData {
        eigenvalues,
        unitary,
    })
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

/// Groups near-coincident eigenvalues (relative tolerance as in
/// [`NodeSystem`]) so divided-difference kernels see exactly-confluent
/// tuples; returns (group index per eigenvalue, representative values).
fn eigenvalue_groups(eigenvalues: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let entries: Vec<(f64, usize)> = eigenvalues.iter().map(|&v| (v, 1)).collect();
    // Eigenvalues are ascending, so the grouped representatives line up.
    let ns = NodeSystem::new(&entries).expect("non-empty eigenvalue list");
    let reps: Vec<f64> = ns.entries().iter().map(|e| e.0).collect();
    let mut groups = Vec::with_capacity(eigenvalues.len());
    let mut g = 0usize;
    let mut used = 0usize;
    for _ in eigenvalues {
        if used == ns.entries()[g].1 {
            g += 1;
            used = 0;
        }
        groups.push(g);
        used += 1;
    }
    (groups, reps)
}

/// The contraction f(a^(0),…,a^(n))(b_1·…·b_n):
/// with B_k = U* b_k U, the core matrix is
/// C̃_{i_0,i_n} = Σ kernel(λ_{i_0},…,λ_{i_n}) B_1[i_0,i_1] ⋯ B_n[i_{n−1},i_n],
/// and the result is U C̃ U*. For n = 0 this is the matrix function f(a).
///
/// Kernel values are memoized per eigenvalue-group tuple, with groups formed
/// by the coalescing tolerance, so confluent kernels are only evaluated once
/// per genuinely distinct tuple.
pub fn contract(
    a: &HermitianMatrix,
    kernel: &dyn Fn(&[f64]) -> Result<f64>,
    b: &[DMatrix<Complex64>],
) -> Result<DMatrix<Complex64>> {
    let spectral = eigh(a)?;
    contract_with_spectral(&spectral, kernel, b)
}

/// As [`contract`], reusing an existing eigendecomposition.
pub fn contract_with_spectral(
    spectral: &SpectralData,
    kernel: &dyn Fn(&[f64]) -> Result<f64>,
    b: &[DMatrix<Complex64>],
) -> Result<DMatrix<Complex64>> {
    let d = spectral.eigenvalues.len();
    for (k, bk) in b.iter().enumerate() {
        if bk.nrows() != d || bk.ncols() != d {
            return Err(DdError::Precondition(format!(
                "argument {k} has dimension {}x{}, expected {d}x{d}",
                bk.nrows(),
                bk.ncols()
            )));
        }
    }
    let n = b.len();
    let u = &spectral.unitary;
    let rotated: Vec<DMatrix<Complex64>> = b.iter().map(|bk| u.adjoint() * bk * u).collect();

    let (groups, reps) = eigenvalue_groups(&spectral.eigenvalues);
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut kernel_at = |idx: &[usize]| -> Result<f64> {
        let key: Vec<usize> = idx.iter().map(|&i| groups[i]).collect();
        if let Some(&v) = memo.get(&key) {
            return Ok(v);
        }
        let args: Vec<f64> = key.iter().map(|&g| reps[g]).collect();
        let v = kernel(&args)?;
        if !v.is_finite() {
            return Err(DdError::KernelSingularity(args));
        }
        memo.insert(key, v);
        Ok(v)
    };

    let mut core = DMatrix::<Complex64>::zeros(d, d);
    if n == 0 {
        for i in 0..d {
            core[(i, i)] = Complex64::new(kernel_at(&[i])?, 0.0);
        }
    } else {
        // Odometer over the inner indices i_1..i_{n-1} for each (i_0, i_n).
        let mut idx = vec![0usize; n + 1];
        loop {
            let mut weight = rotated[0][(idx[0], idx[1])];
            for k in 1..n {
                weight *= rotated[k][(idx[k], idx[k + 1])];
            }
            if weight.norm_sqr() != 0.0 {
                core[(idx[0], idx[n])] += weight * kernel_at(&idx)?;
            }
            // Advance the odometer.
            let mut pos = n + 1;
            while pos > 0 {
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < d {
                    break;
                }
                idx[pos] = 0;
            }
            if pos == 0 && idx[0] == 0 {
                break;
            }
        }
    }
    Ok(u * core * u.adjoint())
}

/// Contraction in the ∇-variables: the kernel takes the n forward
/// differences (λ_1−λ_0, …, λ_n−λ_{n−1}).
pub fn contract_nabla(
    a: &HermitianMatrix,
    kernel: &dyn Fn(&[f64]) -> Result<f64>,
    b: &[DMatrix<Complex64>],
) -> Result<DMatrix<Complex64>> {
    let composed = |lambda: &[f64]| -> Result<f64> {
        let diffs: Vec<f64> = lambda.windows(2).map(|w| w[1] - w[0]).collect();
        kernel(&diffs)
    };
    contract(a, &composed, b)
}

/// Contraction in the modular variables of a positive matrix A: the kernel
/// takes the ratios (λ_1/λ_0, …, λ_p/λ_0), realizing
/// F(Δ^(1), Δ^(1)Δ^(2), …, Δ^(1)⋯Δ^(p)).
pub fn contract_modular(
    a: &HermitianMatrix,
    kernel: &dyn Fn(&[f64]) -> Result<f64>,
    b: &[DMatrix<Complex64>],
) -> Result<DMatrix<Complex64>> {
    let spectral = eigh(a)?;
    if spectral.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(DdError::Domain(
            "modular contraction needs a positive definite matrix".into(),
        ));
    }
    let composed = |lambda: &[f64]| -> Result<f64> {
        let ratios: Vec<f64> = lambda[1..].iter().map(|&l| l / lambda[0]).collect();
        kernel(&ratios)
    };
    contract_with_spectral(&spectral, &composed, b)
}

/// The doubled-algebra contraction
/// f(∇̃^(0)_a,…,∇̃^(n)_a)(b′_1⊗b″_1 · … · b′_n⊗b″_n)(x),
/// reduced to a (2n+2)-slot contraction over a with kernel arguments
/// (−λ_{i_0}+λ_{i_{n+1}}, …, −λ_{i_n}+λ_{i_{2n+1}}) and operand order
/// b′_1, …, b′_n, x, b″_1, …, b″_n.
pub fn doubled_contract(
    a: &HermitianMatrix,
    kernel: &dyn Fn(&[f64]) -> Result<f64>,
    b_pairs: &[(DMatrix<Complex64>, DMatrix<Complex64>)],
    x: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = b_pairs.len();
    let mut operands: Vec<DMatrix<Complex64>> = Vec::with_capacity(2 * n + 1);
    for (bp, _) in b_pairs {
        operands.push(bp.clone());
    }
    operands.push(x.clone());
    for (_, bpp) in b_pairs {
        operands.push(bpp.clone());
    }
    let composed = |lambda: &[f64]| -> Result<f64> {
        let args: Vec<f64> = (0..=n).map(|j| lambda[n + 1 + j] - lambda[j]).collect();
        kernel(&args)
    };
    contract(a, &composed, &operands)
}
