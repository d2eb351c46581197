//! Numerical emptiness test for `V^k = { r != 0 : rank M(r) <= k }`.
//!
//! Level 0 is a linear question and is answered by a rank test on the
//! stacked blocks. Higher levels minimize `sigma_{k+1}(M(r))` over the unit
//! sphere from many random starts. Each local search combines Gauss-Newton
//! steps on the trailing singular block (quadratically convergent at a
//! transversal point of the variety) with alternating-projection steps that
//! monotonically decrease the trailing energy `sum_{i>k} sigma_i^2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, full_svd, kernel_basis, numerical_rank_at_scale, singular_values, CMatrix,
    ToleranceConfig, ZERO,
};
use crate::pencil::MatrixPencil;
use crate::random::{substream, unit_sphere_point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub num_starts: usize,
    pub max_iters: usize,
    /// Relative energy decrease below which a local search stops.
    pub stall_tol: f64,
    /// Accept a rank-drop witness when `sigma_{k+1}` is at most this.
    pub witness_tol: f64,
    /// Claim emptiness when the best `sigma_{k+1}` exceeds this.
    pub evidence_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            num_starts: 64,
            max_iters: 500,
            stall_tol: 1e-12,
            witness_tol: 1e-8,
            evidence_tol: 1e-4,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_starts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "num_starts and max_iters must be positive".into(),
            ));
        }
        if !(self.witness_tol > 0.0 && self.witness_tol < self.evidence_tol) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < witness_tol ({}) < evidence_tol ({})",
                self.witness_tol, self.evidence_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    NonEmptyWitness,
    EmptyEvidence,
    EmptyCertified,
    Inconclusive,
}

impl VerdictStatus {
    pub fn is_empty(self) -> bool {
        matches!(self, Self::EmptyEvidence | Self::EmptyCertified)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    Numeric,
    ExactLinear,
    Symbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarietyVerdict {
    pub level: usize,
    pub status: VerdictStatus,
    /// Unit vector `r` with `rank M(r) <= level`.
    pub witness: Option<Vec<Complex64>>,
    /// Best `sigma_{level+1}` found, when an optimization or rank test ran.
    pub achieved_sigma: Option<f64>,
    pub engine: Engine,
    /// Set by the symbolic engine when the ideal is not zero-dimensional,
    /// which proves nonemptiness even without a witness point.
    #[serde(default)]
    pub certified_nonempty: bool,
}

impl VarietyVerdict {
    pub fn is_nonempty(&self) -> bool {
        self.status == VerdictStatus::NonEmptyWitness || self.certified_nonempty
    }
}

fn normalize(r: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm = linalg::vector_norm(r);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(r.iter().map(|z| z / norm).collect())
}

/// `sigma_{k+1}(M(r/|r|))`, or 0 when `M` has fewer than `k+1` singular values.
pub fn sigma_objective(p: &MatrixPencil, k: usize, r: &[Complex64]) -> Result<f64> {
    let r = normalize(r)?;
    let s = singular_values(&p.evaluate(&r)?);
    Ok(s.get(k).copied().unwrap_or(0.0))
}

/// Operator scale of `r -> M(r)` on unit vectors, used as the reference for
/// witness rank checks.
pub fn pencil_scale(p: &MatrixPencil) -> f64 {
    singular_values(&p.stacked_blocks())
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// Whether `rank M(w) <= k` under the rank tolerance, measured at the pencil's scale.
pub fn verify_witness(p: &MatrixPencil, k: usize, w: &[Complex64], tol: &ToleranceConfig) -> bool {
    let Ok(w) = normalize(w) else { return false };
    let Ok(m) = p.evaluate(&w) else { return false };
    numerical_rank_at_scale(&m, pencil_scale(p), tol) <= k
}

/// `V^0` is empty iff the stacked-block matrix has full column rank.
pub fn exact_empty_level0(p: &MatrixPencil, tol: &ToleranceConfig) -> bool {
    linalg::numerical_rank(&p.stacked_blocks(), tol) == p.num_params()
}

fn trailing_energy(sigma: &[f64], k: usize) -> f64 {
    sigma.iter().skip(k).map(|s| s * s).sum()
}

struct Probe {
    r: Vec<Complex64>,
    energy: f64,
    sigma_next: f64,
}

fn probe(p: &MatrixPencil, k: usize, r: Vec<Complex64>) -> Probe {
    let s = singular_values(&p.evaluate(&r).expect("length checked"));
    Probe {
        energy: trailing_energy(&s, k),
        sigma_next: s.get(k).copied().unwrap_or(0.0),
        r,
    }
}

/// Orthonormal basis of the complement of the unit vector `r`.
fn tangent_basis(r: &[Complex64]) -> CMatrix {
    let col = CMatrix::from_column_slice(r.len(), 1, r);
    linalg::complete_basis(&col)
        .columns(1, r.len() - 1)
        .into_owned()
}

/// Least-squares solution of `J z = -f` via a truncated pseudo-inverse.
fn least_squares(j: &CMatrix, f: &[Complex64]) -> Vec<Complex64> {
    let svd = full_svd(j);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let mut z = vec![ZERO; j.ncols()];
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s <= 1e-12 * smax || s == 0.0 {
            break;
        }
        let ui_f: Complex64 = (0..j.nrows())
            .map(|row| svd.u[(row, i)].conj() * f[row])
            .sum();
        let coef = -ui_f / s;
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += svd.v[(c, i)] * coef;
        }
    }
    z
}

fn gauss_newton_direction(
    p: &MatrixPencil,
    k: usize,
    r: &[Complex64],
    m_svd: &linalg::FullSvd,
) -> Vec<Complex64> {
    let (rows, cols) = (p.block_rows(), p.cols());
    let u_perp = m_svd.u.columns(k, rows - k);
    let v_perp = m_svd.v.columns(k, cols - k);
    let tb = tangent_basis(r);
    let eq = (rows - k) * (cols - k);
    let compressed: Vec<CMatrix> = p
        .blocks()
        .iter()
        .map(|b| u_perp.adjoint() * b * v_perp)
        .collect();
    let m = p.evaluate(r).expect("length checked");
    let f_mat = u_perp.adjoint() * m * v_perp;
    let f: Vec<Complex64> = f_mat.iter().copied().collect();
    let mut jac = CMatrix::zeros(eq, tb.ncols());
    for t in 0..tb.ncols() {
        for (i, c) in compressed.iter().enumerate() {
            let w = tb[(i, t)];
            if w != ZERO {
                for (e, x) in c.iter().enumerate() {
                    jac[(e, t)] += w * x;
                }
            }
        }
    }
    let z = least_squares(&jac, &f);
    (0..r.len())
        .map(|i| (0..tb.ncols()).map(|t| tb[(i, t)] * z[t]).sum())
        .collect()
}

/// Minimizer of `|U_perp^dagger M(r)|_F` over unit `r` for frozen `U_perp`.
fn alternating_point(p: &MatrixPencil, k: usize, m_svd: &linalg::FullSvd) -> Vec<Complex64> {
    let rows = p.block_rows();
    let u_perp = m_svd.u.columns(k, rows - k);
    let pieces: Vec<CMatrix> = p.blocks().iter().map(|b| u_perp.adjoint() * b).collect();
    let len = pieces[0].len();
    let stacked = CMatrix::from_fn(len, p.num_params(), |e, i| pieces[i][e]);
    let svd = full_svd(&stacked);
    svd.v.column(p.num_params() - 1).iter().copied().collect()
}

fn local_search(p: &MatrixPencil, k: usize, start: Vec<Complex64>, cfg: &OptimizerConfig) -> Probe {
    let mut cur = probe(p, k, start);
    let mut stalls = 0;
    for _ in 0..cfg.max_iters {
        let m = p.evaluate(&cur.r).expect("length checked");
        let m_svd = full_svd(&m);
        let smax = m_svd.sigma.first().copied().unwrap_or(0.0);
        if cur.sigma_next <= 1e-15 * smax.max(1e-300) {
            break;
        }
        let dir = gauss_newton_direction(p, k, &cur.r, &m_svd);
        let mut next = None;
        let mut step = 1.0;
        for _ in 0..8 {
            let cand: Vec<Complex64> = cur.r.iter().zip(&dir).map(|(a, d)| a + d * step).collect();
            if let Ok(cand) = normalize(&cand) {
                let pr = probe(p, k, cand);
                if pr.energy < cur.energy {
                    next = Some(pr);
                    break;
                }
            }
            step *= 0.5;
        }
        let next = match next {
            Some(n) => n,
            None => {
                let alt = probe(p, k, alternating_point(p, k, &m_svd));
                if alt.energy < cur.energy {
                    alt
                } else {
                    break;
                }
            }
        };
        let gain = (cur.energy - next.energy) / cur.energy.max(f64::MIN_POSITIVE);
        cur = next;
        if gain < cfg.stall_tol {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    cur
}

const BATCH: usize = 8;

/// Multistart minimization of `sigma_{k+1}` over the unit sphere.
///
/// Starts are processed in fixed batches; after each batch the search stops
/// early if a witness below `witness_tol` has been found. The batch layout
/// and per-start random streams make the result independent of scheduling.
pub fn minimize_sigma(
    p: &MatrixPencil,
    k: usize,
    cfg: &OptimizerConfig,
) -> Result<(Vec<Complex64>, f64)> {
    cfg.validate()?;
    if k >= p.level_bound() {
        return Err(Error::LevelOutOfRange {
            level: k,
            bound: p.level_bound(),
        });
    }
    let mut best: Option<(usize, Probe)> = None;
    let mut start = 0;
    while start < cfg.num_starts {
        let end = (start + BATCH).min(cfg.num_starts);
        let results: Vec<(usize, Probe)> = (start..end)
            .into_par_iter()
            .map(|idx| {
                let mut rng = substream(cfg.seed, idx as u64);
                let r0 = unit_sphere_point(p.num_params(), &mut rng);
                (idx, local_search(p, k, r0, cfg))
            })
            .collect();
        for (idx, pr) in results {
            let better = match &best {
                None => true,
                Some((bi, b)) => {
                    pr.sigma_next < b.sigma_next || (pr.sigma_next == b.sigma_next && idx < *bi)
                }
            };
            if better {
                best = Some((idx, pr));
            }
        }
        if best
            .as_ref()
            .is_some_and(|(_, b)| b.sigma_next <= cfg.witness_tol * 1e-3)
        {
            break;
        }
        start = end;
    }
    let (_, b) = best.expect("at least one start");
    Ok((b.r, b.sigma_next))
}

pub fn check_emptiness(
    p: &MatrixPencil,
    k: usize,
    cfg: &OptimizerConfig,
    tol: &ToleranceConfig,
) -> Result<VarietyVerdict> {
    if k >= p.level_bound() {
        return Err(Error::LevelOutOfRange {
            level: k,
            bound: p.level_bound(),
        });
    }
    if k == 0 {
        return Ok(level0_verdict(p, tol));
    }
    let (r, sigma) = minimize_sigma(p, k, cfg)?;
    let status = if sigma <= cfg.witness_tol {
        if verify_witness(p, k, &r, tol) {
            VerdictStatus::NonEmptyWitness
        } else {
            VerdictStatus::Inconclusive
        }
    } else if sigma > cfg.evidence_tol {
        VerdictStatus::EmptyEvidence
    } else {
        VerdictStatus::Inconclusive
    };
    Ok(VarietyVerdict {
        level: k,
        witness: (status == VerdictStatus::NonEmptyWitness).then_some(r),
        status,
        achieved_sigma: Some(sigma),
        engine: Engine::Numeric,
        certified_nonempty: false,
    })
}

fn level0_verdict(p: &MatrixPencil, tol: &ToleranceConfig) -> VarietyVerdict {
    let stacked = p.stacked_blocks();
    let smin = singular_values(&stacked).last().copied().unwrap_or(0.0);
    let smin = if stacked.nrows() < stacked.ncols() {
        0.0
    } else {
        smin
    };
    if exact_empty_level0(p, tol) {
        return VarietyVerdict {
            level: 0,
            status: VerdictStatus::EmptyCertified,
            witness: None,
            achieved_sigma: Some(smin),
            engine: Engine::ExactLinear,
            certified_nonempty: false,
        };
    }
    let kernel = kernel_basis(&stacked, tol);
    let w: Vec<Complex64> = kernel.column(0).iter().copied().collect();
    let status = if verify_witness(p, 0, &w, tol) {
        VerdictStatus::NonEmptyWitness
    } else {
        VerdictStatus::Inconclusive
    };
    VarietyVerdict {
        level: 0,
        status,
        witness: Some(w),
        achieved_sigma: Some(smin),
        engine: Engine::ExactLinear,
        certified_nonempty: false,
    }
}

/// Sentinel for "no empty level".
pub const NO_EMPTY_LEVEL: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScan {
    /// Largest `h` with `V^h` empty, or [`NO_EMPTY_LEVEL`].
    pub best_level: i64,
    /// Verdicts in scan order (top level first).
    pub verdicts: Vec<VarietyVerdict>,
}

/// Scans levels from `top - 1` downward and stops at the first empty one;
/// `V^{h-1}` is contained in `V^h`, so every lower level is empty as well.
pub fn scan_levels<F>(top: usize, mut check: F) -> Result<LevelScan>
where
    F: FnMut(usize) -> Result<VarietyVerdict>,
{
    let mut verdicts = Vec::new();
    for k in (0..top).rev() {
        let v = check(k)?;
        let empty = v.status.is_empty();
        verdicts.push(v);
        if empty {
            return Ok(LevelScan {
                best_level: k as i64,
                verdicts,
            });
        }
    }
    Ok(LevelScan {
        best_level: NO_EMPTY_LEVEL,
        verdicts,
    })
}

pub fn best_empty_level(
    p: &MatrixPencil,
    cfg: &OptimizerConfig,
    tol: &ToleranceConfig,
) -> Result<LevelScan> {
    scan_levels(p.level_bound(), |k| check_emptiness(p, k, cfg, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::pencil::{build_pencil, pencil_from_columns, Side};
    use crate::random::{complex_gaussian_matrix, complex_gaussian_vector, rng_from_seed};
    use crate::state::{random_mixed, validate_density, PureState};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn product_pencil() -> MatrixPencil {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = ONE;
        let rho = PureState::new(a).unwrap().projector();
        build_pencil(&rho, Side::A, &ToleranceConfig::default()).unwrap()
    }

    /// The pencil with rows (r1,r2,r3), (0,r1,r2), (r3,0,r1).
    fn circulant_like() -> MatrixPencil {
        let mut blocks = vec![CMatrix::zeros(3, 3); 3];
        for (i, j, v) in [
            (0, 0, 0),
            (0, 1, 1),
            (0, 2, 2),
            (1, 1, 0),
            (1, 2, 1),
            (2, 0, 2),
            (2, 2, 0),
        ] {
            blocks[v][(i, j)] = ONE;
        }
        MatrixPencil::new(Side::A, blocks).unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = circulant_like();
        assert!((sigma_objective(&p, 1, &[ONE, ZERO, ZERO]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(sigma_objective(&p, 3, &[ONE, ONE, ZERO]).unwrap(), 0.0);
        assert!(matches!(
            sigma_objective(&p, 1, &[ZERO; 3]),
            Err(Error::ZeroVector)
        ));
        let q = product_pencil();
        assert!(sigma_objective(&q, 0, &[ZERO, ONE]).unwrap() < 1e-15);
    }

    #[test]
    fn objective_is_scale_invariant() {
        let mut rng = rng_from_seed(2);
        let p = circulant_like();
        for _ in 0..20 {
            let r = complex_gaussian_vector(3, &mut rng);
            let alpha = complex_gaussian_vector(1, &mut rng)[0] * 7.0;
            let scaled: Vec<Complex64> = r.iter().map(|z| z * alpha).collect();
            let a = sigma_objective(&p, 1, &r).unwrap();
            let b = sigma_objective(&p, 1, &scaled).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_minimum_is_zero() {
        let p = product_pencil();
        // k = 0 is below level_bound = min(2, 1) = 1.
        let v = check_emptiness(
            &p,
            0,
            &OptimizerConfig::default(),
            &ToleranceConfig::default(),
        )
        .unwrap();
        assert_eq!(v.status, VerdictStatus::NonEmptyWitness);
        let w = v.witness.unwrap();
        assert!(w[0].norm() < 1e-12 && (w[1].norm() - 1.0).abs() < 1e-12);
        assert!(!exact_empty_level0(&p, &ToleranceConfig::default()));
    }

    #[test]
    fn circulant_like_levels() {
        let cfg = OptimizerConfig::default();
        let tol = ToleranceConfig::default();
        let p = circulant_like();
        let (_, best) = minimize_sigma(&p, 1, &cfg).unwrap();
        assert!(best > cfg.evidence_tol);
        let v1 = check_emptiness(&p, 1, &cfg, &tol).unwrap();
        assert_eq!(v1.status, VerdictStatus::EmptyEvidence);
        let v2 = check_emptiness(&p, 2, &cfg, &tol).unwrap();
        assert_eq!(v2.status, VerdictStatus::NonEmptyWitness);
        let w = v2.witness.unwrap();
        assert!(sigma_objective(&p, 2, &w).unwrap() <= cfg.witness_tol);
        let scan = best_empty_level(&p, &cfg, &tol).unwrap();
        assert_eq!(scan.best_level, 1);
        assert_eq!(scan.verdicts.len(), 2);
    }

    #[test]
    fn determinant_zero_found_by_root_oracle() {
        // det M(r1, 0, 1) = r1^3 - r1
        let p = circulant_like();
        let det = |r1: Complex64| {
            let m = p.evaluate(&[r1, ZERO, ONE]).unwrap();
            m.determinant()
        };
        for root in [c(-1.0), c(0.0), c(1.0)] {
            assert!(det(root).norm() < 1e-12);
            assert!(verify_witness(
                &p,
                2,
                &[root, ZERO, ONE],
                &ToleranceConfig::default()
            ));
        }
    }

    #[test]
    fn maximally_mixed_levels() {
        let tol = ToleranceConfig::default();
        let cfg = OptimizerConfig::default();
        for (m, n) in [(2, 2), (3, 3), (2, 3)] {
            let d = m * n;
            let rho = validate_density(CMatrix::identity(d, d) / c(d as f64), m, n, &tol).unwrap();
            let p = build_pencil(&rho, Side::A, &tol).unwrap();
            // M(r) = [r1 I_n, ..., rm I_n] up to a unitary column mix, so its
            // rank is n for all r != 0 and every level below n is empty.
            let scan = best_empty_level(&p, &cfg, &tol).unwrap();
            assert_eq!(scan.best_level, n as i64 - 1);
            assert!(exact_empty_level0(&p, &tol));
        }
    }

    #[test]
    fn random_rank_two_level0_is_certified() {
        let tol = ToleranceConfig::default();
        for seed in 0..20 {
            let rho = random_mixed(3, 3, 2, seed).unwrap();
            let p = build_pencil(&rho, Side::A, &tol).unwrap();
            let v = check_emptiness(&p, 0, &OptimizerConfig::default(), &tol).unwrap();
            assert_eq!(v.status, VerdictStatus::EmptyCertified);
            assert_eq!(v.engine, Engine::ExactLinear);
        }
    }

    #[test]
    fn level_out_of_range() {
        let p = circulant_like();
        assert!(matches!(
            check_emptiness(
                &p,
                3,
                &OptimizerConfig::default(),
                &ToleranceConfig::default()
            ),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn witnesses_are_sound_and_verdicts_monotone() {
        let tol = ToleranceConfig::default();
        let cfg = OptimizerConfig::default();
        let mut rng = rng_from_seed(99);
        for _ in 0..6 {
            let blocks: Vec<CMatrix> = (0..3)
                .map(|_| complex_gaussian_matrix(3, 4, &mut rng))
                .collect();
            let p = pencil_from_columns(
                &CMatrix::from_fn(9, 4, |r, col| blocks[r / 3][(r % 3, col)]),
                3,
                3,
                Side::A,
            )
            .unwrap();
            let verdicts: Vec<_> = (0..3)
                .map(|k| check_emptiness(&p, k, &cfg, &tol).unwrap())
                .collect();
            for v in &verdicts {
                if let Some(w) = &v.witness {
                    assert!(verify_witness(&p, v.level, w, &tol));
                }
            }
            for k in 1..3 {
                if verdicts[k].status.is_empty() {
                    assert!(verdicts[k - 1].status.is_empty());
                }
            }
        }
    }

    #[test]
    fn multistart_is_deterministic() {
        let p = circulant_like();
        let cfg = OptimizerConfig {
            seed: 5,
            ..Default::default()
        };
        assert_eq!(
            minimize_sigma(&p, 1, &cfg).unwrap(),
            minimize_sigma(&p, 1, &cfg).unwrap()
        );
    }

    #[test]
    fn config_validation() {
        let bad = OptimizerConfig {
            witness_tol: 1e-3,
            evidence_tol: 1e-4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
