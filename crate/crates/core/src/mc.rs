//! Monte Carlo comparison of analyzed random states against the generic
//! prediction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    analyze, theorem2_bound, AnalysisConfig, AnalysisInput, Certification, EngineChoice,
    GenericPrediction,
};
use crate::error::{Error, Result};
use crate::numeric::NO_EMPTY_LEVEL;
use crate::random::derive_seed;
use crate::state::random_mixed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub index: usize,
    pub seed: u64,
    pub level_a: i64,
    pub level_b: i64,
    pub bound: usize,
    pub certification: Certification,
    pub level_at_least_predicted: bool,
    pub bound_at_least_predicted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStats {
    pub m: usize,
    pub n: usize,
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    pub prediction: GenericPrediction,
    pub fraction_level_at_least_predicted: f64,
    pub fraction_bound_at_least_predicted: f64,
    pub verdicts: Vec<SampleVerdict>,
}

impl McStats {
    /// Samples that fell short of the predicted bound.
    pub fn failures(&self) -> impl Iterator<Item = &SampleVerdict> {
        self.verdicts.iter().filter(|v| !v.bound_at_least_predicted)
    }
}

/// Draws `samples` random rank-`rank` states and analyzes each with the
/// numeric engine. Sample `i` uses seed `derive_seed(seed, i)` for both the
/// state and the optimizer, so results do not depend on scheduling.
pub fn mc_theorem2(
    m: usize,
    n: usize,
    rank: usize,
    samples: usize,
    seed: u64,
    cfg: &AnalysisConfig,
) -> Result<McStats> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let prediction = theorem2_bound(m, n, rank)?;
    let verdicts = (0..samples)
        .into_par_iter()
        .map(|index| {
            let s = derive_seed(seed, index as u64);
            let rho = random_mixed(m, n, rank, s)?;
            let mut sample_cfg = *cfg;
            sample_cfg.engine = EngineChoice::Numeric;
            sample_cfg.optimizer.seed = s;
            let r = analyze(&AnalysisInput::from_density(rho), &sample_cfg)?;
            let level_a = r
                .side_a
                .as_ref()
                .map_or(NO_EMPTY_LEVEL, |x| x.best_empty_level);
            let level_b = r
                .side_b
                .as_ref()
                .map_or(NO_EMPTY_LEVEL, |x| x.best_empty_level);
            let level_ok = (r.side_a.is_none() || level_a >= prediction.level_a)
                && (r.side_b.is_none() || level_b >= prediction.level_b);
            Ok(SampleVerdict {
                index,
                seed: s,
                level_a,
                level_b,
                bound: r.schmidt_lower_bound,
                certification: r.certification,
                level_at_least_predicted: level_ok,
                bound_at_least_predicted: r.schmidt_lower_bound >= prediction.bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let frac = |f: fn(&SampleVerdict) -> bool| {
        verdicts.iter().filter(|v| f(v)).count() as f64 / samples as f64
    };
    Ok(McStats {
        m,
        n,
        rank,
        samples,
        seed,
        fraction_level_at_least_predicted: frac(|v| v.level_at_least_predicted),
        fraction_bound_at_least_predicted: frac(|v| v.bound_at_least_predicted),
        prediction,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_rejected() {
        assert!(mc_theorem2(3, 3, 2, 0, 1, &AnalysisConfig::default()).is_err());
    }

    #[test]
    fn small_run_is_consistent() {
        let cfg = AnalysisConfig::default();
        let s = mc_theorem2(3, 3, 2, 8, 42, &cfg).unwrap();
        assert_eq!(s.verdicts.len(), 8);
        assert_eq!(s.prediction.bound, 2);
        assert!((0.0..=1.0).contains(&s.fraction_bound_at_least_predicted));
        assert_eq!(s.fraction_bound_at_least_predicted, 1.0);
        assert_eq!(s, mc_theorem2(3, 3, 2, 8, 42, &cfg).unwrap());
    }
}
