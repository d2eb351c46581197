//! Linear matrix pencils `M(r) = sum_i r_i B_i` whose rank-`<= k` locus is
//! the variety `V^k` of a bipartite state.
//!
//! Given an `mn x s` matrix whose columns span the range of the state, the
//! A-side block `B_w` is the `n x s` slab of rows `|w1>..|wn>`, and the B-side
//! block `C_w` gathers the `m` rows `|1w>..|mw>`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecomposition, rank_threshold, CMatrix, ToleranceConfig, ZERO};
use crate::state::{DensityMatrix, Ensemble};
use crate::symbolic::gaussian::{ExactMatrix, GaussianRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::A => "A",
            Side::B => "B",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPencil {
    side: Side,
    blocks: Vec<CMatrix>,
}

impl MatrixPencil {
    pub fn new(side: Side, blocks: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidParameter(
                "pencil needs at least one block".into(),
            ));
        };
        let shape = first.shape();
        if shape.1 == 0 {
            return Err(Error::InvalidParameter(
                "pencil blocks need at least one column".into(),
            ));
        }
        if let Some(bad) = blocks.iter().find(|b| b.shape() != shape) {
            return Err(Error::DimMismatch {
                expected: format!("{}x{}", shape.0, shape.1),
                found: format!("{}x{}", bad.nrows(), bad.ncols()),
            });
        }
        Ok(Self { side, blocks })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn num_params(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_rows(&self) -> usize {
        self.blocks[0].nrows()
    }

    /// Number of columns `s`.
    pub fn cols(&self) -> usize {
        self.blocks[0].ncols()
    }

    /// Levels `k` for which `V^k` is a proper question: `0 <= k < min(rows, s)`.
    pub fn level_bound(&self) -> usize {
        self.block_rows().min(self.cols())
    }

    pub fn evaluate(&self, r: &[Complex64]) -> Result<CMatrix> {
        if r.len() != self.num_params() {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                found: r.len(),
            });
        }
        let mut out = CMatrix::zeros(self.block_rows(), self.cols());
        for (b, &ri) in self.blocks.iter().zip(r) {
            if ri != ZERO {
                out.zip_apply(b, |o, x| *o += ri * x);
            }
        }
        Ok(out)
    }

    /// The `(rows*s) x num_params` matrix whose `i`-th column is the
    /// vectorized block `i`; `M(r)` vanishes exactly on its kernel.
    pub fn stacked_blocks(&self) -> CMatrix {
        let (rows, cols) = (self.block_rows(), self.cols());
        CMatrix::from_fn(rows * cols, self.num_params(), |k, i| {
            self.blocks[i][(k / cols, k % cols)]
        })
    }
}

/// Orthonormal eigenvectors of `rho` with eigenvalue above the rank threshold.
pub fn range_basis(rho: &DensityMatrix, tol: &ToleranceConfig) -> Result<CMatrix> {
    let eig = hermitian_eigendecomposition(rho.matrix(), tol)?;
    let d = rho.matrix().nrows();
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    let thr = rank_threshold(lmax, d, d, tol);
    let s = eig.values.iter().filter(|&&l| l > thr).count();
    Ok(eig.vectors.columns(0, s).into_owned())
}

/// Splits the coordinate columns (`mn x s`) into pencil blocks.
pub fn pencil_from_columns(
    coords: &CMatrix,
    m: usize,
    n: usize,
    side: Side,
) -> Result<MatrixPencil> {
    if coords.nrows() != m * n {
        return Err(Error::DimMismatch {
            expected: format!("{} rows", m * n),
            found: format!("{} rows", coords.nrows()),
        });
    }
    let s = coords.ncols();
    let blocks = match side {
        Side::A => (0..m)
            .map(|w| coords.view((w * n, 0), (n, s)).into_owned())
            .collect(),
        Side::B => (0..n)
            .map(|w| CMatrix::from_fn(m, s, |i, c| coords[(i * n + w, c)]))
            .collect(),
    };
    MatrixPencil::new(side, blocks)
}

pub fn build_pencil(
    rho: &DensityMatrix,
    side: Side,
    tol: &ToleranceConfig,
) -> Result<MatrixPencil> {
    let basis = range_basis(rho, tol)?;
    pencil_from_columns(&basis, rho.dim_a(), rho.dim_b(), side)
}

/// Pencil whose columns are the (unweighted) ensemble vectors.
pub fn pencil_from_ensemble(e: &Ensemble, side: Side) -> Result<MatrixPencil> {
    pencil_from_columns(&e.coordinate_matrix(), e.dim_a(), e.dim_b(), side)
}

/// The same construction over `Q(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrixPencil {
    side: Side,
    blocks: Vec<ExactMatrix>,
}

impl ExactMatrixPencil {
    pub fn new(side: Side, blocks: Vec<ExactMatrix>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::InvalidParameter(
                "pencil needs at least one block".into(),
            ));
        };
        let shape = (first.nrows(), first.ncols());
        if shape.1 == 0 {
            return Err(Error::InvalidParameter(
                "pencil blocks need at least one column".into(),
            ));
        }
        if let Some(bad) = blocks.iter().find(|b| (b.nrows(), b.ncols()) != shape) {
            return Err(Error::DimMismatch {
                expected: format!("{}x{}", shape.0, shape.1),
                found: format!("{}x{}", bad.nrows(), bad.ncols()),
            });
        }
        Ok(Self { side, blocks })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn blocks(&self) -> &[ExactMatrix] {
        &self.blocks
    }

    pub fn num_params(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_rows(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn cols(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn level_bound(&self) -> usize {
        self.block_rows().min(self.cols())
    }

    /// Coefficients of the linear form at entry `(row, col)`.
    pub fn entry_coefficients(&self, row: usize, col: usize) -> Vec<GaussianRational> {
        self.blocks
            .iter()
            .map(|b| b.get(row, col).clone())
            .collect()
    }

    pub fn to_numeric(&self) -> MatrixPencil {
        MatrixPencil {
            side: self.side,
            blocks: self.blocks.iter().map(ExactMatrix::to_complex).collect(),
        }
    }
}

pub fn exact_pencil_from_columns(
    coords: &ExactMatrix,
    m: usize,
    n: usize,
    side: Side,
) -> Result<ExactMatrixPencil> {
    if coords.nrows() != m * n {
        return Err(Error::DimMismatch {
            expected: format!("{} rows", m * n),
            found: format!("{} rows", coords.nrows()),
        });
    }
    let s = coords.ncols();
    let (count, rows) = match side {
        Side::A => (m, n),
        Side::B => (n, m),
    };
    let mut blocks = Vec::with_capacity(count);
    for w in 0..count {
        let mut b = ExactMatrix::zeros(rows, s);
        for i in 0..rows {
            let src = match side {
                Side::A => w * n + i,
                Side::B => i * n + w,
            };
            for c in 0..s {
                b.set(i, c, coords.get(src, c).clone());
            }
        }
        blocks.push(b);
    }
    ExactMatrixPencil::new(side, blocks)
}

/// Exact range basis of a density matrix given over `Q(i)`: its pivot columns.
pub fn exact_range_columns(rho: &ExactMatrix) -> ExactMatrix {
    let pivots = rho.pivot_columns();
    let mut out = ExactMatrix::zeros(rho.nrows(), pivots.len());
    for (c, &p) in pivots.iter().enumerate() {
        for r in 0..rho.nrows() {
            out.set(r, c, rho.get(r, p).clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, numerical_rank, ONE};
    use crate::random::{complex_gaussian_matrix, complex_gaussian_vector, rng_from_seed};
    use crate::state::{random_mixed, validate_density, PureState};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn product_state_pencil() {
        let tol = ToleranceConfig::default();
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = ONE;
        let rho = PureState::new(a).unwrap().projector();
        let p = build_pencil(&rho, Side::A, &tol).unwrap();
        assert_eq!(p.num_params(), 2);
        assert_eq!(p.blocks()[0].shape(), (2, 1));
        assert!((p.blocks()[0][(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(p.blocks()[0][(1, 0)].norm() < 1e-14);
        assert!(frobenius_norm(&p.blocks()[1]) < 1e-14);
    }

    #[test]
    fn evaluate_basics() {
        let tol = ToleranceConfig::default();
        let rho = random_mixed(2, 3, 3, 1).unwrap();
        let p = build_pencil(&rho, Side::A, &tol).unwrap();
        assert!(frobenius_norm(&p.evaluate(&[ZERO, ZERO]).unwrap()) == 0.0);
        assert_eq!(p.evaluate(&[ONE, ZERO]).unwrap(), p.blocks()[0]);
        assert!(matches!(
            p.evaluate(&[ONE]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn range_basis_examples() {
        let tol = ToleranceConfig::default();
        let v = crate::state::random_pure(2, 3, 3).unwrap();
        let b = range_basis(&v.projector(), &tol).unwrap();
        assert_eq!(b.ncols(), 1);
        let overlap: Complex64 = b
            .column(0)
            .iter()
            .zip(v.to_vector())
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let mm = validate_density(CMatrix::identity(4, 4) / c(4.0), 2, 2, &tol).unwrap();
        let b = range_basis(&mm, &tol).unwrap();
        assert_eq!(b.ncols(), 4);
        assert!(frobenius_norm(&(b.adjoint() * &b - CMatrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn b_side_gathers_strided_rows() {
        let coords = CMatrix::from_fn(6, 1, |k, _| c(k as f64));
        let p = pencil_from_columns(&coords, 2, 3, Side::B).unwrap();
        assert_eq!(p.num_params(), 3);
        // C_2 holds |12>, |22> -> indices 1 and 4.
        assert_eq!(p.blocks()[1][(0, 0)], c(1.0));
        assert_eq!(p.blocks()[1][(1, 0)], c(4.0));
    }

    #[test]
    fn exact_and_numeric_construction_agree() {
        let data: Vec<GaussianRational> = (0..12)
            .map(|k| GaussianRational::from_integers(k, -k))
            .collect();
        let coords = ExactMatrix::from_row_major(6, 2, data).unwrap();
        for side in [Side::A, Side::B] {
            let exact = exact_pencil_from_columns(&coords, 2, 3, side)
                .unwrap()
                .to_numeric();
            let numeric = pencil_from_columns(&coords.to_complex(), 2, 3, side).unwrap();
            assert_eq!(exact, numeric);
        }
    }

    #[test]
    fn rank_matches_hermitian_form() {
        let tol = ToleranceConfig::default();
        let mut rng = rng_from_seed(17);
        for seed in 0..40u64 {
            let (m, n) = (2 + seed as usize % 3, 2 + (seed as usize / 3) % 3);
            let r = 1 + seed as usize % (m * n);
            let rho = random_mixed(m, n, r, seed).unwrap();
            let p = build_pencil(&rho, Side::A, &tol).unwrap();
            let x = complex_gaussian_vector(m, &mut rng);
            let form = rho.hermitian_form(&x).unwrap();
            assert_eq!(
                numerical_rank(&form, &tol),
                numerical_rank(&p.evaluate(&x).unwrap(), &tol)
            );
        }
    }

    #[test]
    fn rank_profile_is_basis_independent() {
        let tol = ToleranceConfig::default();
        let mut rng = rng_from_seed(4);
        let rho = random_mixed(3, 3, 4, 2).unwrap();
        let basis = range_basis(&rho, &tol).unwrap();
        let mix = complex_gaussian_matrix(4, 4, &mut rng).qr().q();
        let p1 = pencil_from_columns(&basis, 3, 3, Side::A).unwrap();
        let p2 = pencil_from_columns(&(&basis * mix), 3, 3, Side::A).unwrap();
        for _ in 0..20 {
            let x = complex_gaussian_vector(3, &mut rng);
            assert_eq!(
                numerical_rank(&p1.evaluate(&x).unwrap(), &tol),
                numerical_rank(&p2.evaluate(&x).unwrap(), &tol)
            );
        }
        let sa = crate::linalg::singular_values(&p1.evaluate(&[ONE, ZERO, ZERO]).unwrap());
        let sb = crate::linalg::singular_values(&p2.evaluate(&[ONE, ZERO, ZERO]).unwrap());
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_exchanges_pencil_sides() {
        let tol = ToleranceConfig::default();
        let mut rng = rng_from_seed(9);
        let rho = random_mixed(2, 3, 2, 6).unwrap();
        let pb = build_pencil(&rho, Side::B, &tol).unwrap();
        let pa_swapped = build_pencil(&rho.swap(), Side::A, &tol).unwrap();
        for _ in 0..20 {
            let x = complex_gaussian_vector(3, &mut rng);
            let s1 = crate::linalg::singular_values(&pb.evaluate(&x).unwrap());
            let s2 = crate::linalg::singular_values(&pa_swapped.evaluate(&x).unwrap());
            for (a, b) in s1.iter().zip(&s2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn evaluate_is_linear(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let blocks = (0..3).map(|_| complex_gaussian_matrix(2, 4, &mut rng)).collect();
            let p = MatrixPencil::new(Side::A, blocks).unwrap();
            let x = complex_gaussian_vector(3, &mut rng);
            let y = complex_gaussian_vector(3, &mut rng);
            let (al, be) = (complex_gaussian_vector(1, &mut rng)[0], complex_gaussian_vector(1, &mut rng)[0]);
            let z: Vec<Complex64> = x.iter().zip(&y).map(|(a, b)| al * a + be * b).collect();
            let lhs = p.evaluate(&z).unwrap();
            let rhs = p.evaluate(&x).unwrap() * al + p.evaluate(&y).unwrap() * be;
            let scale = 1.0 + frobenius_norm(&lhs);
            proptest::prop_assert!(frobenius_norm(&(lhs - rhs)) <= 1e-14 * scale);
        }
    }
}
