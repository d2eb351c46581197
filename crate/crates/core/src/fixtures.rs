//! Built-in reproduction cases: four exact example states, the three-vector
//! product construction, and randomized checks of the pure-state and
//! low-rank corollary statements.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    analyze, verify_example5, AnalysisConfig, AnalysisInput, Certification, EngineChoice,
};
use crate::error::{Error, Result};
use crate::io::parse_state;
use crate::linalg::{kernel_basis, ToleranceConfig};
use crate::numeric::exact_empty_level0;
use crate::pencil::{build_pencil, Side};
use crate::random::{complex_gaussian, derive_seed, rng_from_seed};
use crate::state::{
    from_ensemble, random_mixed, random_pure, random_pure_with_rank, schmidt_rank, Ensemble,
    PureState,
};

pub const EXAMPLE1: &str = include_str!("../fixtures/example1.json");
pub const EXAMPLE2: &str = include_str!("../fixtures/example2.json");
pub const EXAMPLE3: &str = include_str!("../fixtures/example3.json");
pub const EXAMPLE4: &str = include_str!("../fixtures/example4.json");

pub const FIXTURE_NAMES: [&str; 8] = [
    "example1",
    "example2",
    "example3",
    "example4",
    "example5",
    "corollary1",
    "corollary2",
    "proposition1",
];

/// State file text of a built-in example.
pub fn fixture_text(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "example2" => Some(EXAMPLE2),
        "example3" => Some(EXAMPLE3),
        "example4" => Some(EXAMPLE4),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub expected: String,
    pub obtained: String,
    pub certification: Option<Certification>,
    pub pass: bool,
}

fn outcome(
    name: &str,
    expected: String,
    obtained: String,
    certification: Option<Certification>,
    pass: bool,
) -> FixtureOutcome {
    FixtureOutcome {
        name: name.to_string(),
        expected,
        obtained,
        certification,
        pass,
    }
}

fn example_state(name: &str, cfg: &AnalysisConfig) -> Result<FixtureOutcome> {
    let text = fixture_text(name).expect("known example");
    let input = parse_state(text, &cfg.tolerances)?.into_analysis_input(&cfg.tolerances)?;
    let r = analyze(&input, cfg)?;
    let level_a = r.side_a.as_ref().map(|s| s.best_empty_level);
    let level_b = r.side_b.as_ref().map(|s| s.best_empty_level);
    let obtained = format!(
        "bound {} (side {} level {}), A level {}, B level {}",
        r.schmidt_lower_bound,
        r.provenance.side.label(),
        r.provenance.level,
        level_a.map_or("-".into(), |h| h.to_string()),
        level_b.map_or("-".into(), |h| h.to_string()),
    );
    let a_ok = |want: fn(i64) -> bool| level_a.is_none_or(want);
    let (expected, pass) = match name {
        "example1" => (
            "bound 3, A level 0",
            r.schmidt_lower_bound == 3 && a_ok(|h| h == 0),
        ),
        "example2" => (
            "bound >= 3, A level >= 0",
            r.schmidt_lower_bound >= 3 && a_ok(|h| h >= 0),
        ),
        "example3" => (
            "bound 2, A level 1",
            r.schmidt_lower_bound == 2 && a_ok(|h| h == 1),
        ),
        "example4" => (
            "bound 2, A level 2",
            r.schmidt_lower_bound == 2 && a_ok(|h| h == 2),
        ),
        _ => unreachable!(),
    };
    Ok(outcome(
        name,
        expected.into(),
        obtained,
        Some(r.certification),
        pass && r.entangled,
    ))
}

fn example5(seed: u64) -> Result<FixtureOutcome> {
    let mut rng = rng_from_seed(seed);
    let mut passed = 0;
    let mut tried = 0;
    while tried < 100 {
        let q: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
        match verify_example5(q[0], q[1], q[2], q[3]) {
            Ok(chk) => {
                tried += 1;
                passed += chk.pass as usize;
            }
            Err(Error::DegenerateParameters(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(outcome(
        "example5",
        "100/100 quadruples pass".into(),
        format!("{passed}/{tried} quadruples pass"),
        None,
        passed == tried,
    ))
}

fn numeric(cfg: &AnalysisConfig) -> AnalysisConfig {
    AnalysisConfig {
        engine: EngineChoice::Numeric,
        ..*cfg
    }
}

/// Random rank-2 states on 6x6: level 0 empty and bound at least 3.
fn corollary1(cfg: &AnalysisConfig) -> Result<FixtureOutcome> {
    let samples = 10;
    let mut ok = 0;
    for i in 0..samples {
        let rho = random_mixed(6, 6, 2, derive_seed(cfg.optimizer.seed, i))?;
        let r = analyze(&AnalysisInput::from_density(rho), &numeric(cfg))?;
        let level0 = r.side_a.as_ref().is_none_or(|s| s.best_empty_level >= 0);
        ok += (level0 && r.schmidt_lower_bound >= 3) as usize;
    }
    Ok(outcome(
        "corollary1",
        format!("{samples}/{samples} with bound >= 3"),
        format!("{ok}/{samples} with bound >= 3"),
        None,
        ok == samples as usize,
    ))
}

/// Rank-3 states on 7x7 containing a Schmidt-rank-7 vector: bound at least 3.
fn corollary2(cfg: &AnalysisConfig) -> Result<FixtureOutcome> {
    let samples = 10;
    let tol = &cfg.tolerances;
    let mut ok = 0;
    for i in 0..samples {
        let seed = derive_seed(cfg.optimizer.seed, i);
        let states = vec![
            random_pure_with_rank(7, 7, 7, derive_seed(seed, 0))?,
            random_pure(7, 7, derive_seed(seed, 1))?,
            random_pure(7, 7, derive_seed(seed, 2))?,
        ];
        let e = Ensemble::new(vec![0.5, 0.25, 0.25], states, tol)?;
        let r = analyze(
            &AnalysisInput::from_density(from_ensemble(&e, tol)?),
            &numeric(cfg),
        )?;
        ok += (r.schmidt_lower_bound >= 3) as usize;
    }
    Ok(outcome(
        "corollary2",
        format!("{samples}/{samples} with bound >= 3"),
        format!("{ok}/{samples} with bound >= 3"),
        None,
        ok == samples as usize,
    ))
}

/// Pure states of each Schmidt rank on 4x4: level-0 emptiness iff full
/// rank, and kernel dimension `m - d` otherwise.
pub fn proposition1_holds(v: &PureState, tol: &ToleranceConfig) -> Result<bool> {
    let m = v.dim_a();
    let d = schmidt_rank(v, tol);
    let p = build_pencil(&v.projector(), Side::A, tol)?;
    let empty = exact_empty_level0(&p, tol);
    let kernel = kernel_basis(&p.stacked_blocks(), tol).ncols();
    Ok((d == m) == empty && (d == m || kernel == m - d))
}

fn proposition1(cfg: &AnalysisConfig) -> Result<FixtureOutcome> {
    let m = 4;
    let per_rank = 20;
    let mut ok = 0;
    for d in 1..=m {
        for i in 0..per_rank {
            let v = random_pure_with_rank(
                m,
                m,
                d,
                derive_seed(cfg.optimizer.seed, (d * per_rank + i) as u64),
            )?;
            ok += (schmidt_rank(&v, &cfg.tolerances) == d
                && proposition1_holds(&v, &cfg.tolerances)?) as usize;
        }
    }
    let total = m * per_rank;
    Ok(outcome(
        "proposition1",
        format!("{total}/{total} consistent"),
        format!("{ok}/{total} consistent"),
        None,
        ok == total,
    ))
}

/// Runs one named fixture. The randomized fixtures always use the numeric
/// engine since their states are not exact.
pub fn run_fixture(name: &str, cfg: &AnalysisConfig) -> Result<FixtureOutcome> {
    match name {
        "example1" | "example2" | "example3" | "example4" => example_state(name, cfg),
        "example5" => example5(cfg.optimizer.seed),
        "corollary1" => corollary1(cfg),
        "corollary2" => corollary2(cfg),
        "proposition1" => proposition1(cfg),
        _ => Err(Error::InvalidParameter(format!(
            "unknown fixture `{name}` (known: {})",
            FIXTURE_NAMES.join(", ")
        ))),
    }
}

pub fn run_fixtures(only: Option<&str>, cfg: &AnalysisConfig) -> Result<Vec<FixtureOutcome>> {
    match only {
        Some(name) => Ok(vec![run_fixture(name, cfg)?]),
        None => FIXTURE_NAMES.iter().map(|n| run_fixture(n, cfg)).collect(),
    }
}

/// Aligned plain-text table of outcomes.
pub fn format_table(outcomes: &[FixtureOutcome]) -> String {
    let headers = ["fixture", "expected", "obtained", "certification", "status"];
    let rows: Vec<[String; 5]> = outcomes
        .iter()
        .map(|o| {
            [
                o.name.clone(),
                o.expected.clone(),
                o.obtained.clone(),
                o.certification.map_or("-".into(), |c| format!("{c:?}")),
                if o.pass {
                    "ok".into()
                } else {
                    "MISMATCH".into()
                },
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&headers.map(String::from));
    out.push('\n');
    for row in &rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}
