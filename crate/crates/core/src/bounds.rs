//! Schmidt-number lower bounds from empty rank-drop levels, generic
//! predictions for random states, and the per-state analysis report.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ToleranceConfig};
use crate::numeric::{
    self, LevelScan, OptimizerConfig, VarietyVerdict, VerdictStatus, NO_EMPTY_LEVEL,
};
use crate::pencil::{
    build_pencil, exact_pencil_from_columns, ExactMatrixPencil, MatrixPencil, Side,
};
use crate::state::{
    from_ensemble, ppt_check, schmidt_rank, DensityMatrix, Ensemble, PptResult, PureState,
};
use crate::symbolic::{self, gaussian::ExactMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: usize,
    /// `r <= h`: the level cannot be empty, so the value is capped at `dim`.
    pub degenerate: bool,
}

/// `ceil(dim / (r - h))`, with `h = -1` meaning no empty level is known.
pub fn schmidt_lower_bound(dim: usize, rank: usize, h: i64) -> LowerBound {
    if h < 0 {
        return LowerBound {
            value: 1,
            degenerate: false,
        };
    }
    let h = h as usize;
    if rank <= h {
        return LowerBound {
            value: dim,
            degenerate: true,
        };
    }
    LowerBound {
        value: dim.div_ceil(rank - h),
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    /// Symbolic when exact input is available, numeric otherwise.
    #[default]
    Auto,
    Numeric,
    Symbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideChoice {
    A,
    B,
    #[default]
    Both,
}

impl SideChoice {
    pub fn sides(self) -> &'static [Side] {
        match self {
            Self::A => &[Side::A],
            Self::B => &[Side::B],
            Self::Both => &[Side::A, Side::B],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub engine: EngineChoice,
    pub side: SideChoice,
    pub optimizer: OptimizerConfig,
    pub tolerances: ToleranceConfig,
}

/// A validated state plus, optionally, exact vectors spanning its range.
#[derive(Debug, Clone)]
pub struct AnalysisInput {
    density: DensityMatrix,
    exact_range: Option<ExactMatrix>,
    rescaled_integers: bool,
}

impl AnalysisInput {
    pub fn from_density(density: DensityMatrix) -> Self {
        Self {
            density,
            exact_range: None,
            rescaled_integers: false,
        }
    }

    pub fn from_ensemble(e: &Ensemble, tol: &ToleranceConfig) -> Result<Self> {
        Ok(Self::from_density(from_ensemble(e, tol)?))
    }

    /// Attaches exact spanning vectors (columns, `mn` rows). Dependent
    /// columns are dropped. `rescaled_integers` records that the columns are
    /// integer multiples of the normalized states.
    pub fn with_exact_range(
        mut self,
        columns: &ExactMatrix,
        rescaled_integers: bool,
    ) -> Result<Self> {
        let d = self.density.dim_a() * self.density.dim_b();
        if columns.nrows() != d {
            return Err(Error::DimMismatch {
                expected: format!("{d} rows"),
                found: format!("{} rows", columns.nrows()),
            });
        }
        let pivots = columns.pivot_columns();
        let mut independent = ExactMatrix::zeros(d, pivots.len());
        for (c, &p) in pivots.iter().enumerate() {
            for r in 0..d {
                independent.set(r, c, columns.get(r, p).clone());
            }
        }
        self.exact_range = Some(independent);
        self.rescaled_integers = rescaled_integers;
        Ok(self)
    }

    pub fn density(&self) -> &DensityMatrix {
        &self.density
    }

    pub fn exact_range(&self) -> Option<&ExactMatrix> {
        self.exact_range.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_range.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideAnalysis {
    pub side: Side,
    /// `m` for side A, `n` for side B.
    pub dim: usize,
    pub rank: usize,
    pub best_empty_level: i64,
    pub bound: LowerBound,
    /// The emptiness fact behind the bound is exact (or the bound is trivial).
    pub certified: bool,
    pub verdicts: Vec<VarietyVerdict>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certification {
    Certified,
    NumericalEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundProvenance {
    pub side: Side,
    pub level: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtBoundReport {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub side_a: Option<SideAnalysis>,
    pub side_b: Option<SideAnalysis>,
    pub schmidt_lower_bound: usize,
    pub provenance: BoundProvenance,
    pub certification: Certification,
    pub entangled: bool,
    pub entangled_by_bound: bool,
    pub entangled_by_ppt: bool,
    pub ppt: PptResult,
    pub exact_input: bool,
    /// The exact engine ran on integer rescalings of normalized states.
    pub rescaled_integers: bool,
    pub config: AnalysisConfig,
}

impl SchmidtBoundReport {
    pub fn side(&self, side: Side) -> Option<&SideAnalysis> {
        match side {
            Side::A => self.side_a.as_ref(),
            Side::B => self.side_b.as_ref(),
        }
    }
}

fn scan_side(input: &AnalysisInput, side: Side, cfg: &AnalysisConfig) -> Result<SideAnalysis> {
    let rho = input.density();
    let tol = &cfg.tolerances;
    let (m, n) = (rho.dim_a(), rho.dim_b());
    let dim = match side {
        Side::A => m,
        Side::B => n,
    };
    let use_exact = match cfg.engine {
        EngineChoice::Numeric => false,
        EngineChoice::Auto => input.is_exact(),
        EngineChoice::Symbolic => {
            if !input.is_exact() {
                return Err(Error::InexactInput);
            }
            true
        }
    };
    let (scan, rank) = if use_exact {
        let columns = input.exact_range().expect("checked above");
        let exact = exact_pencil_from_columns(columns, m, n, side)?;
        let numeric = exact.to_numeric();
        let scan = numeric::scan_levels(exact.level_bound(), |k| {
            exact_level(&exact, &numeric, k, cfg)
        })?;
        (scan, exact.cols())
    } else {
        let p = build_pencil(rho, side, tol)?;
        let scan = numeric::best_empty_level(&p, &cfg.optimizer, tol)?;
        (scan, p.cols())
    };
    Ok(side_result(side, dim, rank, scan))
}

fn side_result(side: Side, dim: usize, rank: usize, scan: LevelScan) -> SideAnalysis {
    let bound = schmidt_lower_bound(dim, rank, scan.best_level);
    let certified = scan.best_level == NO_EMPTY_LEVEL
        || scan
            .verdicts
            .last()
            .is_some_and(|v| v.status == VerdictStatus::EmptyCertified);
    SideAnalysis {
        side,
        dim,
        rank,
        best_empty_level: scan.best_level,
        bound,
        certified,
        verdicts: scan.verdicts,
    }
}

/// Exact decision at level `k`, with a numeric witness hunt when the
/// variety is nonempty and a numeric fallback when the exact engine
/// exceeds its resource limits.
fn exact_level(
    exact: &ExactMatrixPencil,
    numeric: &MatrixPencil,
    k: usize,
    cfg: &AnalysisConfig,
) -> Result<VarietyVerdict> {
    match symbolic::check_emptiness_exact(exact, k) {
        Ok(v) if v.certified_nonempty => {
            let hunt = numeric::check_emptiness(numeric, k, &cfg.optimizer, &cfg.tolerances)?;
            if hunt.status == VerdictStatus::NonEmptyWitness {
                Ok(VarietyVerdict {
                    status: VerdictStatus::NonEmptyWitness,
                    witness: hunt.witness,
                    achieved_sigma: hunt.achieved_sigma,
                    ..v
                })
            } else {
                Ok(VarietyVerdict {
                    achieved_sigma: hunt.achieved_sigma,
                    ..v
                })
            }
        }
        Ok(v) => Ok(v),
        Err(Error::EngineOverflow(_)) => {
            numeric::check_emptiness(numeric, k, &cfg.optimizer, &cfg.tolerances)
        }
        Err(e) => Err(e),
    }
}

/// Best empty level on each requested side, the resulting bound, and PPT.
pub fn analyze(input: &AnalysisInput, cfg: &AnalysisConfig) -> Result<SchmidtBoundReport> {
    cfg.tolerances.validate()?;
    cfg.optimizer.validate()?;
    let rho = input.density();
    let tol = &cfg.tolerances;
    let rank = rho.rank(tol);
    if let Some(cols) = input.exact_range() {
        if cols.ncols() != rank {
            return Err(Error::InvalidParameter(format!(
                "exact range has dimension {} but the state has rank {rank}",
                cols.ncols()
            )));
        }
    }

    let run = |side: Side| -> Result<Option<SideAnalysis>> {
        if cfg.side.sides().contains(&side) {
            scan_side(input, side, cfg).map(Some)
        } else {
            Ok(None)
        }
    };
    let (side_a, side_b) = rayon::join(|| run(Side::A), || run(Side::B));
    let (side_a, side_b) = (side_a?, side_b?);

    // Largest bound wins; ties prefer a certified side, then side A.
    let winner = [side_a.as_ref(), side_b.as_ref()]
        .into_iter()
        .flatten()
        .max_by(|x, y| {
            (x.bound.value, x.certified, x.side == Side::A).cmp(&(
                y.bound.value,
                y.certified,
                y.side == Side::A,
            ))
        })
        .expect("at least one side");

    let ppt = ppt_check(rho, tol)?;
    let bound = winner.bound.value;
    Ok(SchmidtBoundReport {
        m: rho.dim_a(),
        n: rho.dim_b(),
        rank,
        schmidt_lower_bound: bound,
        provenance: BoundProvenance {
            side: winner.side,
            level: winner.best_empty_level,
        },
        certification: if winner.certified {
            Certification::Certified
        } else {
            Certification::NumericalEvidence
        },
        entangled: bound >= 2 || !ppt.is_ppt,
        entangled_by_bound: bound >= 2,
        entangled_by_ppt: !ppt.is_ppt,
        ppt,
        exact_input: input.is_exact(),
        rescaled_integers: input.rescaled_integers,
        config: *cfg,
        side_a,
        side_b,
    })
}

/// Generic emptiness of `V^k` on one side: the determinantal variety has
/// codimension `(rows - k)(rank - k)` and must exceed the projective
/// dimension `dim - 1`. Only meaningful for `k < min(rows, rank)`.
pub fn generic_emptiness_prediction(m: usize, n: usize, rank: usize, k: usize, side: Side) -> bool {
    let (dim, rows) = match side {
        Side::A => (m, n),
        Side::B => (n, m),
    };
    k < rows.min(rank) && (rows - k) * (rank - k) >= dim
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseValue {
    /// Case label, 1 to 4.
    pub case: u8,
    /// Which dimension the formula uses; `None` for the symmetric case 4.
    pub side: Option<Side>,
    pub value: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenericPrediction {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub level_a: i64,
    pub level_b: i64,
    pub bound: usize,
    pub cases: Vec<CaseValue>,
}

fn isqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

fn predicted_level(m: usize, n: usize, rank: usize, side: Side) -> i64 {
    let rows = match side {
        Side::A => n,
        Side::B => m,
    };
    (0..rows.min(rank))
        .rev()
        .find(|&k| generic_emptiness_prediction(m, n, rank, k, side))
        .map_or(NO_EMPTY_LEVEL, |k| k as i64)
}

fn case_values(dim: usize, rank: usize, side: Side, out: &mut Vec<CaseValue>) {
    let root = isqrt(dim);
    if rank <= dim {
        out.push(CaseValue {
            case: 1,
            side: Some(side),
            value: root.saturating_sub(1),
        });
    } else {
        out.push(CaseValue {
            case: 2,
            side: Some(side),
            value: dim.div_ceil(rank - dim + root + 1),
        });
        // 3m/2 - 5 >= r, kept in integers as 3m - 10 >= 2r.
        if dim >= 169 && 3 * dim >= 10 + 2 * rank {
            out.push(CaseValue {
                case: 3,
                side: Some(side),
                value: 3,
            });
        }
    }
}

/// Direct search for the largest generically empty level on both sides,
/// together with every applicable closed-form case value.
pub fn theorem2_bound(m: usize, n: usize, rank: usize) -> Result<GenericPrediction> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must be at least 2, got {m}x{n}"
        )));
    }
    if rank == 0 || rank > m * n {
        return Err(Error::InvalidRank { rank, max: m * n });
    }
    let level_a = predicted_level(m, n, rank, Side::A);
    let level_b = predicted_level(m, n, rank, Side::B);
    let bound = schmidt_lower_bound(m, rank, level_a)
        .value
        .max(schmidt_lower_bound(n, rank, level_b).value);
    let mut cases = Vec::new();
    case_values(m, rank, Side::A, &mut cases);
    case_values(n, rank, Side::B, &mut cases);
    if rank + 3 <= m + n {
        cases.push(CaseValue {
            case: 4,
            side: None,
            value: 2,
        });
    }
    Ok(GenericPrediction {
        m,
        n,
        rank,
        level_a,
        level_b,
        bound,
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example5Check {
    pub pass: bool,
    pub schmidt_ranks: [usize; 3],
    pub independent: bool,
    /// `|sum_i w_i v_i|` for each constructed vector.
    pub orthogonality_residuals: [f64; 3],
}

pub const EXAMPLE5_RESIDUAL_TOL: f64 = 1e-12;

/// Checks the three product vectors annihilated by the bilinear pairing with
/// `a|11> + b|12> + c|21> + d|22>`.
pub fn verify_example5(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> Result<Example5Check> {
    let scale = [a, b, c, d].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if d == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateParameters("d = 0".into()));
    }
    if (a * d - b * c).norm() <= 1e-12 * scale * scale {
        return Err(Error::DegenerateParameters("ad = bc".into()));
    }
    let z = Complex64::new(0.0, 0.0);
    let w = [a, b, c, d];
    let vs = [
        [-c, z, a, z],
        [z, -d, z, b],
        [-(c + d), -(c + d), a + b, a + b],
    ];
    let tol = ToleranceConfig::default();
    let mut schmidt_ranks = [0; 3];
    let mut orthogonality_residuals = [0.0; 3];
    for (i, v) in vs.iter().enumerate() {
        let norm = linalg::vector_norm(v);
        let unit: Vec<Complex64> = v.iter().map(|x| x / norm).collect();
        schmidt_ranks[i] = schmidt_rank(&PureState::from_vector(2, 2, &unit)?, &tol);
        orthogonality_residuals[i] = w
            .iter()
            .zip(v)
            .map(|(x, y)| x * y)
            .sum::<Complex64>()
            .norm();
    }
    let stacked = CMatrix::from_fn(4, 3, |r, col| vs[col][r]);
    let independent = linalg::numerical_rank(&stacked, &tol) == 3;
    let pass = independent
        && schmidt_ranks.iter().all(|&r| r == 1)
        && orthogonality_residuals
            .iter()
            .all(|&r| r < EXAMPLE5_RESIDUAL_TOL);
    Ok(Example5Check {
        pass,
        schmidt_ranks,
        independent,
        orthogonality_residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::random::{complex_gaussian, rng_from_seed};
    use crate::state::{random_mixed, validate_density};
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn bound_examples() {
        assert_eq!(schmidt_lower_bound(3, 3, 1).value, 2);
        assert_eq!(schmidt_lower_bound(4, 5, 2).value, 2);
        assert_eq!(schmidt_lower_bound(5, 2, 0).value, 3);
        assert_eq!(schmidt_lower_bound(7, 3, 0).value, 3);
        assert_eq!(schmidt_lower_bound(7, 3, -1).value, 1);
        let deg = schmidt_lower_bound(4, 2, 3);
        assert!(deg.degenerate && deg.value == 4);
    }

    proptest! {
        #[test]
        fn bound_monotone_in_level(dim in 1usize..20, rank in 1usize..30, h in -1i64..29) {
            let a = schmidt_lower_bound(dim, rank, h).value;
            let b = schmidt_lower_bound(dim, rank, h + 1).value;
            prop_assert!(a <= b);
            prop_assert!(a >= 1 && a <= dim.max(1));
        }
    }

    #[test]
    fn generic_prediction_examples() {
        assert!(generic_emptiness_prediction(3, 3, 3, 1, Side::A));
        assert!(generic_emptiness_prediction(4, 4, 5, 2, Side::A));
        assert!(!generic_emptiness_prediction(3, 3, 9, 3, Side::A));
        // rectangular: side B swaps the roles of m and n
        assert!(generic_emptiness_prediction(2, 5, 2, 0, Side::A));
        assert!(!generic_emptiness_prediction(5, 2, 2, 1, Side::A));
        assert!(generic_emptiness_prediction(5, 2, 3, 0, Side::B));
    }

    #[test]
    fn theorem2_examples() {
        let p = theorem2_bound(4, 4, 5).unwrap();
        assert!(p.cases.contains(&CaseValue {
            case: 4,
            side: None,
            value: 2
        }));
        assert!(p.bound >= 2);
        let p = theorem2_bound(9, 9, 9).unwrap();
        assert!(p.cases.contains(&CaseValue {
            case: 1,
            side: Some(Side::A),
            value: 2
        }));
        let p = theorem2_bound(9, 9, 10).unwrap();
        assert!(p.cases.contains(&CaseValue {
            case: 2,
            side: Some(Side::A),
            value: 2
        }));
        assert!(theorem2_bound(1, 3, 1).is_err());
        assert!(theorem2_bound(3, 3, 10).is_err());
    }

    #[test]
    fn case_three_needs_large_dimension() {
        let p = theorem2_bound(169, 169, 200).unwrap();
        assert!(p.cases.iter().any(|cv| cv.case == 3 && cv.value == 3));
        assert!(p.bound >= 3);
        let q = theorem2_bound(100, 100, 120).unwrap();
        assert!(!q.cases.iter().any(|cv| cv.case == 3));
    }

    #[test]
    fn isqrt_exact() {
        for x in 0..2000 {
            let r = isqrt(x);
            assert!(r * r <= x && (r + 1) * (r + 1) > x);
        }
    }

    #[test]
    fn example5_cases() {
        assert!(verify_example5(ONE, c(0.0), c(0.0), ONE).unwrap().pass);
        assert!(matches!(
            verify_example5(c(0.0), ONE, ONE, c(0.0)),
            Err(Error::DegenerateParameters(_))
        ));
        assert!(matches!(
            verify_example5(ONE, c(2.0), c(2.0), c(4.0)),
            Err(Error::DegenerateParameters(_))
        ));
        let mut rng = rng_from_seed(5);
        for _ in 0..100 {
            let q: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
            let chk = verify_example5(q[0], q[1], q[2], q[3]).unwrap();
            assert!(chk.pass, "{chk:?}");
        }
    }

    #[test]
    fn product_state_report() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = ONE;
        let rho = PureState::new(a).unwrap().projector();
        let r = analyze(
            &AnalysisInput::from_density(rho),
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.schmidt_lower_bound, 1);
        assert!(r.ppt.is_ppt);
        assert!(!r.entangled);
        assert_eq!(r.certification, Certification::Certified);
    }

    #[test]
    fn maximally_mixed_report() {
        let tol = ToleranceConfig::default();
        let rho = validate_density(CMatrix::identity(9, 9) / c(9.0), 3, 3, &tol).unwrap();
        let r = analyze(
            &AnalysisInput::from_density(rho),
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert_eq!(r.schmidt_lower_bound, 1);
        assert!(!r.entangled);
        assert_eq!(r.side_a.as_ref().unwrap().best_empty_level, 2);
        assert_eq!(r.side_b.as_ref().unwrap().best_empty_level, 2);
    }

    #[test]
    fn symbolic_requires_exact_input() {
        let rho = random_mixed(2, 2, 2, 1).unwrap();
        let cfg = AnalysisConfig {
            engine: EngineChoice::Symbolic,
            ..Default::default()
        };
        assert!(matches!(
            analyze(&AnalysisInput::from_density(rho), &cfg),
            Err(Error::InexactInput)
        ));
    }

    #[test]
    fn single_side_reports() {
        let rho = random_mixed(3, 3, 2, 4).unwrap();
        let cfg = AnalysisConfig {
            side: SideChoice::B,
            ..Default::default()
        };
        let r = analyze(&AnalysisInput::from_density(rho), &cfg).unwrap();
        assert!(r.side_a.is_none());
        assert_eq!(r.provenance.side, Side::B);
        assert_eq!(r.schmidt_lower_bound, 2);
    }
}
