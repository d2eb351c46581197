//! Bipartite states on `C^m (x) C^n`.
//!
//! Product basis vectors are ordered `|11>, ..., |1n>, ..., |m1>, ..., |mn>`,
//! so the coordinate of `|ij>` (1-based) sits at index `(i-1)*n + (j-1)`.
//! Block slicing in [`crate::pencil`] depends on this single convention.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};
use crate::linalg::{
    self, hermitian_deviation, hermitian_eigendecomposition, numerical_rank, CMatrix,
    ToleranceConfig, ZERO,
};
use crate::random::{complex_gaussian_matrix, rng_from_seed};

const PURE_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn rank(&self, tol: &ToleranceConfig) -> usize {
        numerical_rank(&self.matrix, tol)
    }

    /// The `n x n` block `rho_{ij}` (0-based), rows `|i1>..|in>` and columns `|j1>..|jn>`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let n = self.dim_b;
        self.matrix.view((i * n, j * n), (n, n)).into_owned()
    }

    /// The Hermitian form `sum_{i,j} r_i conj(r_j) rho_{ij}` on system B.
    pub fn hermitian_form(&self, r: &[Complex64]) -> Result<CMatrix> {
        if r.len() != self.dim_a {
            return Err(Error::LengthMismatch {
                expected: self.dim_a,
                found: r.len(),
            });
        }
        let n = self.dim_b;
        let mut out = CMatrix::zeros(n, n);
        for i in 0..self.dim_a {
            for j in 0..self.dim_a {
                let w = r[i] * r[j].conj();
                if w != ZERO {
                    out += self.block(i, j) * w;
                }
            }
        }
        Ok(out)
    }

    /// The same state with the two subsystems exchanged.
    pub fn swap(&self) -> DensityMatrix {
        let (m, n) = (self.dim_a, self.dim_b);
        let mut out = CMatrix::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..n {
                for k in 0..m {
                    for l in 0..n {
                        out[(j * m + i, l * m + k)] = self.matrix[(i * n + j, k * n + l)];
                    }
                }
            }
        }
        DensityMatrix {
            dim_a: n,
            dim_b: m,
            matrix: out,
        }
    }
}

/// Checks every density-matrix invariant and reports all violations at once.
pub fn validate_density(
    matrix: CMatrix,
    m: usize,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<DensityMatrix> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "subsystem dimensions must be at least 2, got ({m}, {n})"
        )));
    }
    if matrix.shape() != (m * n, m * n) {
        return Err(Error::DimMismatch {
            expected: format!("{0}x{0}", m * n),
            found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
        });
    }
    if !linalg::all_finite(&matrix) {
        return Err(Error::InvalidParameter(
            "matrix has non-finite entries".into(),
        ));
    }
    let mut violations = Vec::new();
    let scale = matrix.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let deviation = hermitian_deviation(&matrix);
    if deviation > tol.hermiticity_tol * scale {
        violations.push(DensityViolation::NotHermitian(deviation));
    }
    let sym = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
    let eig = hermitian_eigendecomposition(&sym, tol)?;
    let min_eig = eig.values.last().copied().unwrap_or(0.0);
    if min_eig < -tol.psd_tol {
        violations.push(DensityViolation::NotPsd(min_eig));
    }
    let trace: f64 = (0..m * n).map(|i| matrix[(i, i)].re).sum();
    if (trace - 1.0).abs() > tol.trace_tol {
        violations.push(DensityViolation::TraceNotOne((trace - 1.0).abs()));
    }
    if !violations.is_empty() {
        return Err(Error::InvalidDensity(violations));
    }
    Ok(DensityMatrix {
        dim_a: m,
        dim_b: n,
        matrix: sym,
    })
}

/// Unit vector `sum a_ij |ij>` stored as its `m x n` coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    coefficients: CMatrix,
}

impl PureState {
    pub fn new(coefficients: CMatrix) -> Result<Self> {
        let (m, n) = coefficients.shape();
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter("empty coefficient matrix".into()));
        }
        let norm = linalg::frobenius_norm(&coefficients);
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::NotNormalized { index: 0, norm });
        }
        Ok(Self { coefficients })
    }

    /// Rescales a nonzero coefficient matrix to unit norm.
    pub fn normalized(coefficients: CMatrix) -> Result<Self> {
        let norm = linalg::frobenius_norm(&coefficients);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Self::new(coefficients / Complex64::new(norm, 0.0))
    }

    pub fn from_vector(m: usize, n: usize, v: &[Complex64]) -> Result<Self> {
        if v.len() != m * n {
            return Err(Error::LengthMismatch {
                expected: m * n,
                found: v.len(),
            });
        }
        Self::new(CMatrix::from_row_slice(m, n, v))
    }

    pub fn dim_a(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn coefficients(&self) -> &CMatrix {
        &self.coefficients
    }

    /// Coordinates in the product basis.
    pub fn to_vector(&self) -> Vec<Complex64> {
        let (m, n) = self.coefficients.shape();
        (0..m * n)
            .map(|k| self.coefficients[(k / n, k % n)])
            .collect()
    }

    pub fn projector(&self) -> DensityMatrix {
        let v = CMatrix::from_column_slice(self.dim_a() * self.dim_b(), 1, &self.to_vector());
        DensityMatrix {
            dim_a: self.dim_a(),
            dim_b: self.dim_b(),
            matrix: &v * v.adjoint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    weights: Vec<f64>,
    states: Vec<PureState>,
}

impl Ensemble {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>, tol: &ToleranceConfig) -> Result<Self> {
        check_weights(&weights, states.len())?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol.trace_tol {
            return Err(Error::WeightSum { sum });
        }
        let (m, n) = (states[0].dim_a(), states[0].dim_b());
        if let Some(bad) = states.iter().find(|s| (s.dim_a(), s.dim_b()) != (m, n)) {
            return Err(Error::DimMismatch {
                expected: format!("{m}x{n}"),
                found: format!("{}x{}", bad.dim_a(), bad.dim_b()),
            });
        }
        Ok(Self { weights, states })
    }

    /// Normalizes the weights to sum one and each coefficient matrix to unit norm.
    pub fn normalized(
        weights: Vec<f64>,
        coefficients: Vec<CMatrix>,
        tol: &ToleranceConfig,
    ) -> Result<Self> {
        check_weights(&weights, coefficients.len())?;
        let sum: f64 = weights.iter().sum();
        let states = coefficients
            .into_iter()
            .map(PureState::normalized)
            .collect::<Result<Vec<_>>>()?;
        Self::new(weights.iter().map(|w| w / sum).collect(), states, tol)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn dim_a(&self) -> usize {
        self.states[0].dim_a()
    }

    pub fn dim_b(&self) -> usize {
        self.states[0].dim_b()
    }

    /// The `mn x t` matrix whose columns are the state coordinates.
    pub fn coordinate_matrix(&self) -> CMatrix {
        let d = self.dim_a() * self.dim_b();
        let mut a = CMatrix::zeros(d, self.states.len());
        for (l, s) in self.states.iter().enumerate() {
            for (k, z) in s.to_vector().into_iter().enumerate() {
                a[(k, l)] = z;
            }
        }
        a
    }
}

fn check_weights(weights: &[f64], count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if weights.len() != count {
        return Err(Error::DimMismatch {
            expected: format!("{count} weights"),
            found: format!("{} weights", weights.len()),
        });
    }
    if let Some((index, &weight)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w <= 0.0)
    {
        return Err(Error::NegativeWeight { index, weight });
    }
    Ok(())
}

/// `rho = A P A^dagger` for the coordinate matrix `A` and `P = diag(p)`.
pub fn from_ensemble(e: &Ensemble, tol: &ToleranceConfig) -> Result<DensityMatrix> {
    let a = e.coordinate_matrix();
    let mut ap = a.clone();
    for (l, &p) in e.weights().iter().enumerate() {
        ap.column_mut(l).scale_mut(p);
    }
    let rho = &ap * a.adjoint();
    validate_density(rho, e.dim_a(), e.dim_b(), tol)
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending Schmidt coefficients above the rank threshold.
    pub coefficients: Vec<f64>,
    /// `m x d`, orthonormal columns.
    pub left_basis: CMatrix,
    /// `n x d`, orthonormal columns.
    pub right_basis: CMatrix,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// `sum a_i e_i e'_i^T` as an `m x n` coefficient matrix.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.rank();
        let mut out = CMatrix::zeros(self.left_basis.nrows(), self.right_basis.nrows());
        for i in 0..d {
            out += self.left_basis.column(i)
                * self.right_basis.column(i).transpose()
                * Complex64::new(self.coefficients[i], 0.0);
        }
        out
    }
}

pub fn schmidt_decomposition(v: &PureState, tol: &ToleranceConfig) -> SchmidtDecomposition {
    let a = v.coefficients();
    let svd = linalg::full_svd(a);
    let d = linalg::rank_from_singular_values(&svd.sigma, a.nrows(), a.ncols(), tol);
    // a = U S V^dagger, so the right Schmidt vectors are conj(V) columns.
    SchmidtDecomposition {
        coefficients: svd.sigma[..d].to_vec(),
        left_basis: svd.u.columns(0, d).into_owned(),
        right_basis: svd.v.columns(0, d).map(|z| z.conj()),
    }
}

pub fn schmidt_rank(v: &PureState, tol: &ToleranceConfig) -> usize {
    numerical_rank(v.coefficients(), tol)
}

/// Partial transpose on subsystem B: `<ij|rho^PT|kl> = <il|rho|kj>`.
pub fn partial_transpose(rho: &DensityMatrix) -> CMatrix {
    partial_transpose_matrix(&rho.matrix, rho.dim_a, rho.dim_b)
}

/// [`partial_transpose`] on any `mn x mn` matrix, positive or not.
pub fn partial_transpose_matrix(src: &CMatrix, m: usize, n: usize) -> CMatrix {
    assert_eq!(src.shape(), (m * n, m * n), "matrix must be mn x mn");
    CMatrix::from_fn(m * n, m * n, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / n, col % n);
        src[(i * n + l, k * n + j)]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptResult {
    pub is_ppt: bool,
    pub min_eigenvalue: f64,
}

pub fn ppt_check(rho: &DensityMatrix, tol: &ToleranceConfig) -> Result<PptResult> {
    let pt = partial_transpose(rho);
    let eig = hermitian_eigendecomposition(&pt, tol)?;
    let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    Ok(PptResult {
        is_ppt: min_eigenvalue >= -tol.psd_tol,
        min_eigenvalue,
    })
}

/// Coefficients drawn i.i.d. complex Gaussian, then normalized.
pub fn random_pure(m: usize, n: usize, seed: u64) -> Result<PureState> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "subsystem dimensions must be at least 2, got ({m}, {n})"
        )));
    }
    let g = complex_gaussian_matrix(m, n, &mut rng_from_seed(seed));
    PureState::normalized(g)
}

/// Coefficient matrix `G1 G2` with Gaussian `G1` (`m x d`) and `G2` (`d x n`),
/// normalized; Schmidt rank `d` almost surely.
pub fn random_pure_with_rank(m: usize, n: usize, d: usize, seed: u64) -> Result<PureState> {
    if d == 0 || d > m.min(n) {
        return Err(Error::InvalidRank {
            rank: d,
            max: m.min(n),
        });
    }
    let mut rng = rng_from_seed(seed);
    let g1 = complex_gaussian_matrix(m, d, &mut rng);
    let g2 = complex_gaussian_matrix(d, n, &mut rng);
    PureState::normalized(g1 * g2)
}

/// Ginibre sample `G G^dagger / tr(G G^dagger)` with `G` of shape `mn x r`.
pub fn random_mixed(m: usize, n: usize, r: usize, seed: u64) -> Result<DensityMatrix> {
    let d = m * n;
    if r == 0 || r > d {
        return Err(Error::InvalidRank { rank: r, max: d });
    }
    let tol = ToleranceConfig::default();
    let g = complex_gaussian_matrix(d, r, &mut rng_from_seed(seed));
    let mut rho = &g * g.adjoint();
    let trace: f64 = (0..d).map(|i| rho[(i, i)].re).sum();
    rho /= Complex64::new(trace, 0.0);
    let rho = validate_density(rho, m, n, &tol)?;
    let found = rho.rank(&tol);
    if found != r {
        return Err(Error::RankDeficientSample { expected: r, found });
    }
    Ok(rho)
}

/// Extracts the state vector of a rank-one density matrix.
pub fn pure_state_of(rho: &DensityMatrix, tol: &ToleranceConfig) -> Result<PureState> {
    if rho.rank(tol) != 1 {
        return Err(Error::NotPure);
    }
    let eig = hermitian_eigendecomposition(rho.matrix(), tol)?;
    let v: Vec<Complex64> = eig.vectors.column(0).iter().copied().collect();
    PureState::normalized(CMatrix::from_row_slice(rho.dim_a(), rho.dim_b(), &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm, ONE};

    fn basis_state(m: usize, n: usize, terms: &[(usize, usize)]) -> PureState {
        let mut a = CMatrix::zeros(m, n);
        for &(i, j) in terms {
            a[(i - 1, j - 1)] = ONE;
        }
        PureState::normalized(a).unwrap()
    }

    fn bell() -> PureState {
        basis_state(2, 2, &[(1, 1), (2, 2)])
    }

    #[test]
    fn validate_accepts_maximally_mixed_and_product() {
        let tol = ToleranceConfig::default();
        let mm = validate_density(
            CMatrix::identity(4, 4) / Complex64::new(4.0, 0.0),
            2,
            2,
            &tol,
        )
        .unwrap();
        assert_eq!(mm.rank(&tol), 4);
        let p = basis_state(2, 2, &[(1, 1)]).projector();
        let p = validate_density(p.into_matrix(), 2, 2, &tol).unwrap();
        assert_eq!(p.rank(&tol), 1);
    }

    #[test]
    fn validate_reports_trace_and_psd_violations() {
        let tol = ToleranceConfig::default();
        let m = CMatrix::identity(4, 4) * Complex64::new(0.225, 0.0);
        match validate_density(m, 2, 2, &tol) {
            Err(Error::InvalidDensity(v)) => {
                assert_eq!(v.len(), 1);
                match v[0] {
                    DensityViolation::TraceNotOne(d) => assert!((d - 0.1).abs() < 1e-12),
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut m = CMatrix::identity(4, 4) * Complex64::new(0.5, 0.0);
        m[(3, 3)] = Complex64::new(-0.5, 0.0);
        m[(0, 1)] = ONE;
        match validate_density(m, 2, 2, &tol) {
            Err(Error::InvalidDensity(v)) => {
                assert!(v
                    .iter()
                    .any(|x| matches!(x, DensityViolation::NotHermitian(_))));
                assert!(v
                    .iter()
                    .any(|x| matches!(x, DensityViolation::NotPsd(l) if *l < -0.4)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            validate_density(CMatrix::identity(3, 3), 2, 2, &tol),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn ensemble_matches_sum_of_projectors() {
        let tol = ToleranceConfig::default();
        let s1 = bell();
        let s2 = basis_state(2, 2, &[(1, 2)]);
        let e = Ensemble::new(vec![0.25, 0.75], vec![s1.clone(), s2.clone()], &tol).unwrap();
        let rho = from_ensemble(&e, &tol).unwrap();
        let direct = s1.projector().into_matrix() * Complex64::new(0.25, 0.0)
            + s2.projector().into_matrix() * Complex64::new(0.75, 0.0);
        assert!(frobenius_norm(&(rho.matrix() - direct)) < 1e-12);
        assert_eq!(rho.rank(&tol), 2);
    }

    #[test]
    fn ensemble_rejects_bad_weights() {
        let tol = ToleranceConfig::default();
        assert!(matches!(
            Ensemble::new(vec![-0.1, 1.1], vec![bell(), bell()], &tol),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
        assert!(matches!(
            Ensemble::new(vec![0.0, 1.0], vec![bell(), bell()], &tol),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
        assert!(matches!(
            Ensemble::new(vec![0.5, 0.6], vec![bell(), bell()], &tol),
            Err(Error::WeightSum { .. })
        ));
    }

    #[test]
    fn schmidt_examples() {
        let tol = ToleranceConfig::default();
        let prod = basis_state(2, 2, &[(1, 1)]);
        let d = schmidt_decomposition(&prod, &tol);
        assert_eq!(d.rank(), 1);
        assert!((d.coefficients[0] - 1.0).abs() < 1e-14);

        let d = schmidt_decomposition(&bell(), &tol);
        assert_eq!(d.rank(), 2);
        for a in &d.coefficients {
            assert!((a - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        }
        assert!(frobenius_norm(&(d.reconstruct() - bell().coefficients())) < 1e-12);
    }

    #[test]
    fn schmidt_rank_of_fixture_vectors() {
        let tol = ToleranceConfig::default();
        // (|33>+|44>+|55>+|45>)/2 has coefficient rows e3, e4 + e5 and e5.
        let v2 = basis_state(5, 5, &[(3, 3), (4, 4), (5, 5), (4, 5)]);
        let direct = singular_oracle(v2.coefficients());
        assert_eq!(direct, 3);
        assert_eq!(schmidt_rank(&v2, &tol), direct);
        let seven: Vec<(usize, usize)> = (1..=7).map(|i| (i, i)).collect();
        assert_eq!(schmidt_rank(&basis_state(7, 7, &seven), &tol), 7);
        assert_eq!(schmidt_rank(&random_pure(4, 4, 9).unwrap(), &tol), 4);
    }

    /// Rank by fraction-free elimination on the (real, 0/1) fixture matrices.
    fn singular_oracle(a: &CMatrix) -> usize {
        let mut rows: Vec<Vec<f64>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)].re).collect())
            .collect();
        let mut rank = 0;
        for col in 0..a.ncols() {
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r][col].abs() > 1e-12) {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank {
                        let f = rows[r][col] / rows[rank][col];
                        let pivot = rows[rank].clone();
                        for (x, y) in rows[r].iter_mut().zip(&pivot) {
                            *x -= f * y;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    #[test]
    fn partial_transpose_examples() {
        let tol = ToleranceConfig::default();
        let prod = basis_state(2, 2, &[(1, 1)]).projector();
        assert!(frobenius_norm(&(partial_transpose(&prod) - prod.matrix())) == 0.0);

        let bell_rho = bell().projector();
        let pt = partial_transpose(&bell_rho);
        // Oracle: the PT of the Bell projector is (1/2) SWAP, spectrum {1/2,1/2,1/2,-1/2}.
        let eig = hermitian_eigendecomposition(&pt, &tol).unwrap();
        assert!((eig.values[3] + 0.5).abs() < 1e-12);
        let r = ppt_check(&bell_rho, &tol).unwrap();
        assert!(!r.is_ppt);
        assert!((r.min_eigenvalue + 0.5).abs() < 1e-10);

        let mm = validate_density(
            CMatrix::identity(9, 9) / Complex64::new(9.0, 0.0),
            3,
            3,
            &tol,
        )
        .unwrap();
        let r = ppt_check(&mm, &tol).unwrap();
        assert!(r.is_ppt);
        assert!((r.min_eigenvalue - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn random_states_are_deterministic() {
        let a = random_pure(3, 2, 42).unwrap();
        assert_eq!(a, random_pure(3, 2, 42).unwrap());
        assert!((frobenius_norm(a.coefficients()) - 1.0).abs() < 1e-12);
        let r = random_mixed(3, 3, 2, 5).unwrap();
        assert_eq!(r, random_mixed(3, 3, 2, 5).unwrap());
    }

    #[test]
    fn random_mixed_rank_contract() {
        let tol = ToleranceConfig::default();
        assert!(matches!(
            random_mixed(2, 2, 0, 1),
            Err(Error::InvalidRank { .. })
        ));
        assert!(matches!(
            random_mixed(2, 2, 5, 1),
            Err(Error::InvalidRank { .. })
        ));
        assert_eq!(random_mixed(2, 2, 1, 1).unwrap().rank(&tol), 1);
        assert_eq!(random_mixed(2, 3, 6, 1).unwrap().rank(&tol), 6);
        for (m, n) in [(2, 2), (2, 3), (3, 3)] {
            for r in 1..=m * n {
                for seed in 0..100 {
                    assert_eq!(random_mixed(m, n, r, seed).unwrap().rank(&tol), r);
                }
            }
        }
    }

    #[test]
    fn forced_schmidt_rank() {
        let tol = ToleranceConfig::default();
        for d in 1..=4 {
            for seed in 0..20 {
                assert_eq!(
                    schmidt_rank(&random_pure_with_rank(4, 5, d, seed).unwrap(), &tol),
                    d
                );
            }
        }
        assert!(random_pure_with_rank(3, 3, 4, 0).is_err());
    }

    #[test]
    fn random_pure_is_full_rank_on_average() {
        let tol = ToleranceConfig::default();
        let total: usize = (0..10_000)
            .map(|s| schmidt_rank(&random_pure(2, 2, s).unwrap(), &tol))
            .sum();
        assert!(total as f64 / 10_000.0 >= 1.99);
    }

    #[test]
    fn swap_exchanges_subsystems() {
        let tol = ToleranceConfig::default();
        let rho = random_mixed(2, 3, 2, 8).unwrap();
        let s = rho.swap();
        assert_eq!((s.dim_a(), s.dim_b()), (3, 2));
        assert!(frobenius_norm(&(s.swap().matrix() - rho.matrix())) == 0.0);
        assert!(validate_density(s.into_matrix(), 3, 2, &tol).is_ok());
    }

    #[test]
    fn pure_state_extraction() {
        let tol = ToleranceConfig::default();
        let v = random_pure(3, 2, 4).unwrap();
        let back = pure_state_of(&v.projector(), &tol).unwrap();
        let overlap = linalg::inner(&v.to_vector(), &back.to_vector()).norm();
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!(matches!(
            pure_state_of(&random_mixed(2, 2, 2, 1).unwrap(), &tol),
            Err(Error::NotPure)
        ));
    }

    proptest::proptest! {
        #[test]
        fn pt_is_trace_preserving_involution(m in 2usize..4, n in 2usize..4, seed in 0u64..500) {
            let r = 1 + (seed as usize % (m * n));
            let rho = random_mixed(m, n, r, seed).unwrap();
            let pt = partial_transpose(&rho);
            let pt_state = DensityMatrix { dim_a: m, dim_b: n, matrix: pt.clone() };
            let back = partial_transpose(&pt_state);
            proptest::prop_assert!(frobenius_norm(&(back - rho.matrix())) <= 1e-15);
            let tr: Complex64 = (0..m * n).map(|i| pt[(i, i)]).sum();
            let tr0: Complex64 = (0..m * n).map(|i| rho.matrix()[(i, i)]).sum();
            proptest::prop_assert!((tr - tr0).norm() <= 1e-15);
            proptest::prop_assert!(hermitian_deviation(&pt) <= 1e-15);
        }

        #[test]
        fn schmidt_rank_matches_decomposition(m in 2usize..5, n in 2usize..5, d in 1usize..5, seed in 0u64..1000) {
            let tol = ToleranceConfig::default();
            let mut rng = rng_from_seed(seed);
            let k = d.min(m).min(n);
            let a = complex_gaussian_matrix(m, k, &mut rng) * complex_gaussian_matrix(k, n, &mut rng);
            let v = PureState::normalized(a).unwrap();
            let dec = schmidt_decomposition(&v, &tol);
            proptest::prop_assert_eq!(dec.rank(), schmidt_rank(&v, &tol));
            proptest::prop_assert_eq!(dec.rank(), k);
            let s: f64 = dec.coefficients.iter().map(|a| a * a).sum();
            proptest::prop_assert!((s - 1.0).abs() < 1e-9);
            proptest::prop_assert!(frobenius_norm(&(dec.reconstruct() - v.coefficients())) < 1e-9);
        }

        #[test]
        fn ensembles_always_validate(t in 1usize..5, seed in 0u64..500) {
            let tol = ToleranceConfig::default();
            let states: Vec<_> = (0..t).map(|i| random_pure(2, 3, seed * 10 + i as u64).unwrap()).collect();
            let w: Vec<f64> = (1..=t).map(|i| i as f64).collect();
            let total: f64 = w.iter().sum();
            let e = Ensemble::new(w.iter().map(|x| x / total).collect(), states, &tol).unwrap();
            proptest::prop_assert!(from_ensemble(&e, &tol).is_ok());
        }
    }
}
