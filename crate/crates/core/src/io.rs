//! JSON state files and report files.
//!
//! A state file holds either a density matrix or an ensemble:
//!
//! ```json
//! {"m": 2, "n": 2, "density": [[0.5, 0], [0, 0], ...]}
//! {"m": 2, "n": 2, "ensemble": [{"p": 1, "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}],
//!  "normalize": true}
//! ```
//!
//! Entries are `[re, im]` pairs or bare reals. With `"exact": true` every
//! entry and weight is a string such as `"1/2"` or `"1/2+3/4i"`, and the
//! exact values are kept for the symbolic engine. With `"normalize": true`
//! each ensemble matrix is scaled to unit norm and the weights to unit sum.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::AnalysisInput;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ToleranceConfig};
use crate::pencil::exact_range_columns;
use crate::state::{
    from_ensemble, pure_state_of, validate_density, DensityMatrix, Ensemble, PureState,
};
use crate::symbolic::gaussian::{ExactMatrix, GaussianRational};

#[derive(Debug, Clone)]
pub enum LoadedState {
    Density(DensityMatrix),
    Ensemble(Ensemble),
}

#[derive(Debug, Clone)]
pub struct StateFile {
    pub state: LoadedState,
    /// Exact spanning vectors of the range, when the file is exact.
    pub exact_range: Option<ExactMatrix>,
    pub normalize: bool,
}

impl StateFile {
    pub fn density(&self, tol: &ToleranceConfig) -> Result<DensityMatrix> {
        match &self.state {
            LoadedState::Density(d) => Ok(d.clone()),
            LoadedState::Ensemble(e) => from_ensemble(e, tol),
        }
    }

    /// The single pure state described by the file.
    pub fn pure_state(&self, tol: &ToleranceConfig) -> Result<PureState> {
        match &self.state {
            LoadedState::Ensemble(e) if e.states().len() == 1 => Ok(e.states()[0].clone()),
            _ => pure_state_of(&self.density(tol)?, tol),
        }
    }

    pub fn into_analysis_input(self, tol: &ToleranceConfig) -> Result<AnalysisInput> {
        let input = AnalysisInput::from_density(self.density(tol)?);
        match &self.exact_range {
            Some(cols) => input.with_exact_range(cols, self.normalize),
            None => Ok(input),
        }
    }
}

struct Cursor<'a> {
    value: &'a Value,
    path: String,
}

impl<'a> Cursor<'a> {
    fn root(value: &'a Value) -> Self {
        Self {
            value,
            path: String::new(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let loc = if self.path.is_empty() {
            "<root>".to_string()
        } else {
            self.path.clone()
        };
        Error::parse(loc, msg)
    }

    fn field(&self, name: &str) -> Result<Cursor<'a>> {
        self.opt_field(name)?
            .ok_or_else(|| self.err(format!("missing field `{name}`")))
    }

    fn opt_field(&self, name: &str) -> Result<Option<Cursor<'a>>> {
        let obj = self
            .value
            .as_object()
            .ok_or_else(|| self.err("expected an object"))?;
        let path = if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.path)
        };
        Ok(obj.get(name).map(|value| Cursor { value, path }))
    }

    fn items(&self) -> Result<Vec<Cursor<'a>>> {
        let arr = self
            .value
            .as_array()
            .ok_or_else(|| self.err("expected an array"))?;
        Ok(arr
            .iter()
            .enumerate()
            .map(|(i, value)| Cursor {
                value,
                path: format!("{}[{i}]", self.path),
            })
            .collect())
    }

    fn dimension(&self) -> Result<usize> {
        let d = self
            .value
            .as_u64()
            .ok_or_else(|| self.err("expected a positive integer"))?;
        if d < 2 {
            return Err(self.err(format!("dimension must be at least 2, got {d}")));
        }
        Ok(d as usize)
    }

    fn flag(&self) -> Result<bool> {
        self.value
            .as_bool()
            .ok_or_else(|| self.err("expected true or false"))
    }

    fn real(&self) -> Result<f64> {
        let x = self
            .value
            .as_f64()
            .ok_or_else(|| self.err("expected a number"))?;
        if !x.is_finite() {
            return Err(self.err("number is not finite"));
        }
        Ok(x)
    }

    fn complex(&self) -> Result<Complex64> {
        match self.value {
            Value::Number(_) => Ok(Complex64::new(self.real()?, 0.0)),
            Value::Array(a) if a.len() == 2 => {
                let parts = self.items()?;
                Ok(Complex64::new(parts[0].real()?, parts[1].real()?))
            }
            Value::String(_) => Err(self.err("string entries require \"exact\": true")),
            _ => Err(self.err("expected [re, im] or a number")),
        }
    }

    fn exact(&self) -> Result<GaussianRational> {
        let s = self
            .value
            .as_str()
            .ok_or_else(|| self.err("exact entries must be strings like \"1/2+3/4i\""))?;
        s.parse()
            .map_err(|_| self.err(format!("invalid exact number `{s}`")))
    }
}

/// Entry reader returning both a float and, in exact mode, the exact value.
fn entry(c: &Cursor, exact: bool) -> Result<(Complex64, Option<GaussianRational>)> {
    if exact {
        let q = c.exact()?;
        Ok((q.to_complex(), Some(q)))
    } else {
        Ok((c.complex()?, None))
    }
}

fn weight(c: &Cursor, exact: bool) -> Result<f64> {
    if exact {
        let q = c.exact()?;
        if !q.im.is_zero() {
            return Err(c.err("weight must be real"));
        }
        Ok(q.to_complex().re)
    } else {
        c.real()
    }
}

pub fn parse_state(text: &str, tol: &ToleranceConfig) -> Result<StateFile> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let root = Cursor::root(&value);
    let m = root.field("m")?.dimension()?;
    let n = root.field("n")?.dimension()?;
    let exact = root
        .opt_field("exact")?
        .map(|c| c.flag())
        .transpose()?
        .unwrap_or(false);
    let normalize = root
        .opt_field("normalize")?
        .map(|c| c.flag())
        .transpose()?
        .unwrap_or(false);
    let d = m * n;

    match (root.opt_field("density")?, root.opt_field("ensemble")?) {
        (Some(_), Some(_)) => Err(root.err("give either `density` or `ensemble`, not both")),
        (None, None) => Err(root.err("missing field `density` or `ensemble`")),
        (Some(dc), None) => {
            let items = dc.items()?;
            if items.len() != d * d {
                return Err(dc.err(format!(
                    "expected {} entries ({d}x{d} row-major), found {}",
                    d * d,
                    items.len()
                )));
            }
            let mut mat = CMatrix::zeros(d, d);
            let mut ex = exact.then(|| ExactMatrix::zeros(d, d));
            for (k, c) in items.iter().enumerate() {
                let (z, q) = entry(c, exact)?;
                mat[(k / d, k % d)] = z;
                if let (Some(ex), Some(q)) = (ex.as_mut(), q) {
                    ex.set(k / d, k % d, q);
                }
            }
            let rho = validate_density(mat, m, n, tol)?;
            Ok(StateFile {
                state: LoadedState::Density(rho),
                exact_range: ex.as_ref().map(exact_range_columns),
                normalize,
            })
        }
        (None, Some(ec)) => {
            let members = ec.items()?;
            if members.is_empty() {
                return Err(Error::EmptyEnsemble);
            }
            let mut weights = Vec::with_capacity(members.len());
            let mut mats = Vec::with_capacity(members.len());
            let mut ex = exact.then(|| ExactMatrix::zeros(d, members.len()));
            for (l, member) in members.iter().enumerate() {
                weights.push(weight(&member.field("p")?, exact)?);
                let mc = member.field("matrix")?;
                let rows = mc.items()?;
                if rows.len() != m {
                    return Err(mc.err(format!("expected {m} rows, found {}", rows.len())));
                }
                let mut a = CMatrix::zeros(m, n);
                for (i, row) in rows.iter().enumerate() {
                    let cols = row.items()?;
                    if cols.len() != n {
                        return Err(row.err(format!("expected {n} columns, found {}", cols.len())));
                    }
                    for (j, c) in cols.iter().enumerate() {
                        let (z, q) = entry(c, exact)?;
                        a[(i, j)] = z;
                        if let (Some(ex), Some(q)) = (ex.as_mut(), q) {
                            ex.set(i * n + j, l, q);
                        }
                    }
                }
                mats.push(a);
            }
            let e = if normalize {
                Ensemble::normalized(weights, mats, tol)?
            } else {
                let states = mats
                    .into_iter()
                    .enumerate()
                    .map(|(index, a)| {
                        let norm = a.norm();
                        PureState::new(a).map_err(|_| Error::NotNormalized { index, norm })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ensemble::new(weights, states, tol)?
            };
            Ok(StateFile {
                state: LoadedState::Ensemble(e),
                exact_range: ex,
                normalize,
            })
        }
    }
}

pub fn load_state(path: impl AsRef<Path>, tol: &ToleranceConfig) -> Result<StateFile> {
    parse_state(&fs::read_to_string(path)?, tol)
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Density-matrix state file text (non-exact).
pub fn density_to_json(rho: &DensityMatrix) -> String {
    let mat = rho.matrix();
    let d = mat.nrows();
    let entries: Vec<Value> = (0..d * d)
        .map(|k| complex_json(mat[(k / d, k % d)]))
        .collect();
    let mut obj = Map::new();
    obj.insert("m".into(), json!(rho.dim_a()));
    obj.insert("n".into(), json!(rho.dim_b()));
    obj.insert("density".into(), Value::Array(entries));
    serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize")
}

pub fn save_state(rho: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, density_to_json(rho) + "\n")?;
    Ok(())
}

/// Wall-clock data kept apart from the payload so payloads stay comparable
/// across runs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

pub fn report_to_json<T: Serialize>(payload: &T, timing: Option<Timing>) -> Result<String> {
    let mut obj = Map::new();
    obj.insert(
        "report".into(),
        serde_json::to_value(payload).map_err(|e| Error::InvalidParameter(e.to_string()))?,
    );
    if let Some(t) = timing {
        obj.insert("timing".into(), json!(t));
    }
    Ok(serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize"))
}

pub fn save_report<T: Serialize>(
    payload: &T,
    timing: Option<Timing>,
    path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(path, report_to_json(payload, timing)? + "\n")?;
    Ok(())
}

/// The payload part of a saved report file.
pub fn report_payload(text: &str) -> Result<Value> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    v.get("report")
        .cloned()
        .ok_or_else(|| Error::parse("<root>", "missing field `report`"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random_mixed;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn density_round_trip() {
        let rho = random_mixed(3, 3, 2, 11).unwrap();
        let back = parse_state(&density_to_json(&rho), &tol())
            .unwrap()
            .density(&tol())
            .unwrap();
        let diff = (rho.matrix() - back.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-15);
    }

    #[test]
    fn ensemble_with_normalization() {
        let text = r#"{"m": 2, "n": 2, "normalize": true,
            "ensemble": [{"p": 1, "matrix": [[1, 0], [0, 1]]}]}"#;
        let f = parse_state(text, &tol()).unwrap();
        let v = f.pure_state(&tol()).unwrap();
        assert!((v.coefficients()[(0, 0)].re - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_ensemble_keeps_integers() {
        let text = r#"{"m": 2, "n": 2, "exact": true, "normalize": true,
            "ensemble": [{"p": "1/2", "matrix": [["1", "0"], ["0", "1"]]},
                         {"p": "1/2", "matrix": [["0", "1"], ["i", "0"]]}]}"#;
        let f = parse_state(text, &tol()).unwrap();
        let ex = f.exact_range.as_ref().unwrap();
        assert_eq!((ex.nrows(), ex.ncols()), (4, 2));
        assert!(ex.get(3, 0).is_one());
        assert_eq!(ex.get(2, 1), &GaussianRational::from_integers(0, 1));
        let input = f.into_analysis_input(&tol()).unwrap();
        assert!(input.is_exact());
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            (r#"{"n": 2, "density": []}"#, "<root>"),
            (r#"{"m": 2, "n": 2, "density": [1, 2]}"#, "density"),
            (
                r#"{"m": 2, "n": 2, "ensemble": [{"p": 1, "matrix": [[1, 0], [0, "x"]]}]}"#,
                "ensemble[0].matrix[1][1]",
            ),
            (
                r#"{"m": 2, "n": 2, "ensemble": [{"matrix": [[1, 0], [0, 0]]}]}"#,
                "ensemble[0]",
            ),
            (r#"{"m": 1, "n": 2, "density": []}"#, "m"),
            (
                r#"{"m": 2, "n": 2, "exact": true, "ensemble": [{"p": "1", "matrix": [["1", "0"], ["0", "q"]]}]}"#,
                "ensemble[0].matrix[1][1]",
            ),
        ];
        for (text, loc) in cases {
            match parse_state(text, &tol()) {
                Err(Error::Parse { location, .. }) => assert_eq!(location, loc, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(
            parse_state("{\"m\": 2,\n \"n\": }", &tol()),
            Err(Error::Parse { location, .. }) if location.starts_with("line 2")
        ));
    }

    #[test]
    fn negative_weight_is_rejected() {
        let text = r#"{"m": 2, "n": 2, "ensemble": [
            {"p": -0.1, "matrix": [[1, 0], [0, 0]]},
            {"p": 1.1, "matrix": [[0, 0], [0, 1]]}]}"#;
        assert!(matches!(
            parse_state(text, &tol()),
            Err(Error::NegativeWeight { index: 0, .. })
        ));
    }

    #[test]
    fn unnormalized_without_flag_is_rejected() {
        let text = r#"{"m": 2, "n": 2, "ensemble": [{"p": 1, "matrix": [[1, 0], [0, 1]]}]}"#;
        assert!(matches!(
            parse_state(text, &tol()),
            Err(Error::NotNormalized { index: 0, .. })
        ));
    }

    #[test]
    fn report_payload_is_separate_from_timing() {
        let text =
            report_to_json(&json!({"bound": 2}), Some(Timing { wall_seconds: 1.5 })).unwrap();
        assert_eq!(report_payload(&text).unwrap(), json!({"bound": 2}));
    }
}
