//! Dense complex linear algebra shared by every other module.
//!
//! Decompositions are delegated to `nalgebra`; this module fixes the
//! conventions the rest of the crate relies on: spectra are sorted in
//! descending order, SVD factors are square (full) unitaries, and ranks are
//! decided by one relative threshold.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex matrix, row/column indexed as usual.
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative singular value threshold for numerical rank.
    pub rank_rel_tol: f64,
    pub hermiticity_tol: f64,
    pub psd_tol: f64,
    pub trace_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            hermiticity_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("hermiticity_tol", self.hermiticity_tol),
            ("psd_tol", self.psd_tol),
            ("trace_tol", self.trace_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

/// Full singular value decomposition `M = U diag(sigma) V^dagger`.
///
/// `u` is `rows x rows`, `v` is `cols x cols`, and `sigma` has
/// `min(rows, cols)` descending entries.
#[derive(Debug, Clone)]
pub struct FullSvd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_eigendecomposition(m: &CMatrix, tol: &ToleranceConfig) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > tol.hermiticity_tol * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()).map(|z| z * 0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Extends an orthonormal set of columns to a full unitary basis of the
/// ambient space. The given columns are kept verbatim as the leading block.
pub fn complete_basis(q: &CMatrix) -> CMatrix {
    let (rows, p) = q.shape();
    if p >= rows {
        return q.clone();
    }
    let mut aug = CMatrix::zeros(rows, p + rows);
    aug.view_mut((0, 0), (rows, p)).copy_from(q);
    for i in 0..rows {
        aug[(i, p + i)] = ONE;
    }
    let full = aug.qr().q();
    let mut out = CMatrix::zeros(rows, rows);
    out.view_mut((0, 0), (rows, p)).copy_from(q);
    out.view_mut((0, p), (rows, rows - p))
        .copy_from(&full.view((0, p), (rows, rows - p)));
    out
}

pub fn full_svd(m: &CMatrix) -> FullSvd {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return FullSvd {
            u: CMatrix::identity(rows, rows),
            sigma: Vec::new(),
            v: CMatrix::identity(cols, cols),
        };
    }
    let svd = m.clone().svd(true, true);
    let u_thin = svd.u.expect("left vectors requested");
    let v_t = svd.v_t.expect("right vectors requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMatrix::from_fn(rows, k, |r, c| u_thin[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(cols, k, |r, c| v_t[(order[c], r)].conj());
    FullSvd {
        u: complete_basis(&u_sorted),
        sigma,
        v: complete_basis(&v_sorted),
    }
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Threshold below which a singular value counts as zero.
pub fn rank_threshold(sigma_max: f64, rows: usize, cols: usize, tol: &ToleranceConfig) -> f64 {
    tol.rank_rel_tol * sigma_max * rows.max(cols) as f64
}

pub fn rank_from_singular_values(
    sigma: &[f64],
    rows: usize,
    cols: usize,
    tol: &ToleranceConfig,
) -> usize {
    let Some(&smax) = sigma.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    let thr = rank_threshold(smax, rows, cols, tol);
    sigma.iter().filter(|&&s| s > thr).count()
}

/// Rank measured against an external scale instead of the matrix's own
/// largest singular value, for matrices that are a point value of a family
/// (a pencil evaluated at a unit vector) and may be entirely negligible.
pub fn numerical_rank_at_scale(m: &CMatrix, scale: f64, tol: &ToleranceConfig) -> usize {
    let sigma = singular_values(m);
    let reference = sigma.first().copied().unwrap_or(0.0).max(scale);
    if reference == 0.0 {
        return 0;
    }
    let thr = rank_threshold(reference, m.nrows(), m.ncols(), tol);
    sigma.iter().filter(|&&s| s > thr).count()
}

pub fn numerical_rank(m: &CMatrix, tol: &ToleranceConfig) -> usize {
    rank_from_singular_values(&singular_values(m), m.nrows(), m.ncols(), tol)
}

/// Orthonormal basis (as columns) of the numerical null space of `m`.
pub fn kernel_basis(m: &CMatrix, tol: &ToleranceConfig) -> CMatrix {
    let cols = m.ncols();
    let svd = full_svd(m);
    let rank = rank_from_singular_values(&svd.sigma, m.nrows(), cols, tol);
    svd.v.columns(rank, cols - rank).into_owned()
}

/// Conjugate-linear inner product `<a|b>`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
