//! Job configuration: one JSON document describing the operator, the
//! weight sequence, the truncation, and the analysis grids.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;
use shubin_spectra::operators::ShubinOperator;
use shubin_spectra::weights::{WeightSequence, WeightSpec};

use crate::CliError;

fn default_schema_version() -> u32 {
    1
}

fn default_lambda_grid() -> Vec<f64> {
    (-4..=4).map(|k| 2f64.powi(k)).collect()
}

fn default_h_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

fn default_seed() -> u64 {
    42
}

fn default_quad_extra() -> usize {
    8
}

const TOTAL_BUDGET: usize = 1 << 22;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Truncation {
    pub per_axis: usize,
    pub pad: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestFunction {
    Named(String),
    Csv { csv: String },
}

impl Default for TestFunction {
    fn default() -> Self {
        TestFunction::Named("gaussian".to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// iterate-norm depth (applications of P)
    pub p_cap: usize,
    /// seminorm total-order cap for the norm families
    pub s_cap: usize,
    /// |alpha|+|beta| cap in the eigenfunction-bound witness
    pub bound_cap: usize,
    /// first index of the eigenvalue-growth fit
    pub j_min: usize,
    /// optional hard cap on the trusted eigenvalue count
    pub trust_cap: Option<usize>,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            p_cap: 3,
            s_cap: 6,
            bound_cap: 3,
            j_min: 20,
            trust_cap: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Checks {
    pub weights: bool,
    pub ellipticity: bool,
    pub normality: bool,
    pub spectrum: bool,
    pub classify: bool,
    pub norms: bool,
    pub bounds: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            weights: true,
            ellipticity: true,
            normality: true,
            spectrum: true,
            classify: true,
            norms: true,
            bounds: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub operator: serde_json::Value,
    pub weights: WeightSpec,
    pub truncation: Truncation,
    #[serde(default)]
    pub quad_order: Option<usize>,
    #[serde(default)]
    pub test_function: TestFunction,
    #[serde(default = "default_lambda_grid")]
    pub lambda_grid: Vec<f64>,
    #[serde(default = "default_h_grid")]
    pub h_grid: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub sphere_samples: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub checks: Checks,
}

impl JobConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let job: JobConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("job config {}: {e}", path.display())))?;
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != 1 {
            return Err(CliError::config(format!(
                "field `schema_version`: unsupported version {}",
                self.schema_version
            )));
        }
        if self.truncation.per_axis == 0 {
            return Err(CliError::config(
                "field `truncation.per_axis`: must be positive".to_string(),
            ));
        }
        if self.lambda_grid.is_empty() {
            return Err(CliError::config(
                "field `lambda_grid`: must be nonempty".to_string(),
            ));
        }
        if self.lambda_grid.windows(2).any(|p| p[1] <= p[0])
            || self.lambda_grid.iter().any(|&l| l <= 0.0)
        {
            return Err(CliError::config(
                "field `lambda_grid`: must be positive and strictly increasing".to_string(),
            ));
        }
        if self.h_grid.is_empty() || self.h_grid.iter().any(|&h| h <= 0.0) {
            return Err(CliError::config(
                "field `h_grid`: must be nonempty and positive".to_string(),
            ));
        }
        let op = self.operator()?;
        let dim = op.dim();
        let per_axis = self.truncation.per_axis;
        let padded = per_axis + self.truncation.pad.max(2 * self.caps.p_cap.max(1));
        let total = padded.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total > TOTAL_BUDGET {
            return Err(CliError::config(format!(
                "field `truncation`: padded basis size {padded}^{dim} exceeds the resource budget"
            )));
        }
        if let TestFunction::Csv { csv } = &self.test_function {
            if !std::path::Path::new(csv).exists() {
                return Err(CliError::config(format!(
                    "field `test_function.csv`: file {csv} does not exist"
                )));
            }
        }
        Ok(())
    }

    pub fn operator(&self) -> Result<ShubinOperator, CliError> {
        ShubinOperator::from_json_str(&self.operator.to_string())
            .map_err(|e| CliError::config(format!("field `operator`: {e}")))
    }

    pub fn weight_sequence(&self) -> Result<WeightSequence, CliError> {
        WeightSequence::from_spec(&self.weights)
            .map_err(|e| CliError::config(format!("field `weights`: {e}")))
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
            .unwrap_or(self.truncation.per_axis + default_quad_extra())
    }

    pub fn sphere_samples(&self) -> usize {
        self.sphere_samples.unwrap_or(512)
    }
}

/// Resolve a named test function to a callable.
pub fn named_function(
    name: &str,
) -> Result<Box<dyn Fn(&[f64]) -> Complex64 + Sync + Send>, CliError> {
    let norm_sq = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    match name {
        "gaussian" => Ok(Box::new(move |x| {
            Complex64::new((-0.5 * norm_sq(x)).exp(), 0.0)
        })),
        "gaussian_wide" => Ok(Box::new(move |x| {
            Complex64::new((-0.25 * norm_sq(x)).exp(), 0.0)
        })),
        "gevrey_bump" => Ok(Box::new(move |x| {
            Complex64::new((-(1.0 + norm_sq(x)).sqrt()).exp(), 0.0)
        })),
        _ => {
            if let Some(k_str) = name.strip_prefix("hermite_") {
                let k: usize = k_str.parse().map_err(|_| {
                    CliError::config(format!(
                        "field `test_function`: bad hermite degree in {name}"
                    ))
                })?;
                Ok(Box::new(move |x: &[f64]| {
                    let mut acc = 1.0;
                    for &xi in x {
                        acc *=
                            shubin_spectra::hermite::hermite_eval(k, xi).expect("degree in range");
                    }
                    Complex64::new(acc, 0.0)
                }))
            } else {
                Err(CliError::config(format!(
                    "field `test_function`: unknown name {name}"
                )))
            }
        }
    }
}

/// Read "re,im" lines (grid samples in row-major quadrature order).
pub fn read_sample_csv(path: &str) -> Result<Vec<Complex64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && parts.iter().any(|p| p.parse::<f64>().is_err()) {
            continue; // header row
        }
        if parts.len() != 2 {
            return Err(CliError::config(format!(
                "{path}:{}: expected `re,im`",
                lineno + 1
            )));
        }
        let re: f64 = parts[0]
            .parse()
            .map_err(|_| CliError::config(format!("{path}:{}: bad real part", lineno + 1)))?;
        let im: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::config(format!("{path}:{}: bad imaginary part", lineno + 1)))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

/// Read "j,re,im" coefficient lines (j is 1-based and must be contiguous).
pub fn read_coefficient_csv(path: &str) -> Result<Vec<Complex64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {path}: {e}")))?;
    let mut rows: Vec<(usize, Complex64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && parts.first().is_some_and(|p| p.parse::<usize>().is_err()) {
            continue; // header row
        }
        if parts.len() != 3 {
            return Err(CliError::config(format!(
                "{path}:{}: expected `j,re,im`",
                lineno + 1
            )));
        }
        let j: usize = parts[0]
            .parse()
            .map_err(|_| CliError::config(format!("{path}:{}: bad index", lineno + 1)))?;
        let re: f64 = parts[1]
            .parse()
            .map_err(|_| CliError::config(format!("{path}:{}: bad real part", lineno + 1)))?;
        let im: f64 = parts[2]
            .parse()
            .map_err(|_| CliError::config(format!("{path}:{}: bad imaginary part", lineno + 1)))?;
        rows.push((j, Complex64::new(re, im)));
    }
    rows.sort_by_key(|(j, _)| *j);
    for (pos, (j, _)) in rows.iter().enumerate() {
        if *j != pos + 1 {
            return Err(CliError::config(format!(
                "{path}: coefficient indices must be contiguous from 1, found {j} at row {pos}"
            )));
        }
    }
    Ok(rows.into_iter().map(|(_, c)| c).collect())
}
