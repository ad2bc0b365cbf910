//! report.json structure. Field order is fixed by the struct layout and
//! no timestamps or absolute paths are recorded, so identical jobs give
//! byte-identical reports.

use num_complex::Complex64;
use serde::Serialize;

use shubin_spectra::analysis::{DecayFit, IterateNormTable, SeminormTable};
use shubin_spectra::operators::EllipticityReport;
use shubin_spectra::spectral::{EigenBoundWitness, SpectralDecomposition, WeylFit};
use shubin_spectra::weights::{ConditionReport, GrowthWitness, StabilityWitness};

use crate::job::{Caps, Checks, TestFunction, Truncation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct JobEcho {
    pub operator: serde_json::Value,
    pub weights: shubin_spectra::weights::WeightSpec,
    pub truncation: Truncation,
    pub quad_order: usize,
    pub test_function: TestFunction,
    pub lambda_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub caps: Caps,
    pub checks: Checks,
}

/// Scalar view of a ConditionReport (the full ratio table stays in the
/// library type; the report keeps a prefix).
#[derive(Debug, Serialize)]
pub struct WeightsSection {
    pub m1_ok: bool,
    pub m1_first_violation: Option<usize>,
    pub m2prime_ok: bool,
    pub m2prime: Option<StabilityWitness>,
    pub m2_ok: bool,
    pub m2: Option<StabilityWitness>,
    pub assumption_roumieu: bool,
    pub roumieu: Option<GrowthWitness>,
    pub assumption_beurling: bool,
    pub finite_range: bool,
    pub lemma_ratios_head: Vec<f64>,
}

impl WeightsSection {
    pub fn from_report(rep: &ConditionReport) -> Self {
        WeightsSection {
            m1_ok: rep.m1_ok,
            m1_first_violation: rep.m1_first_violation,
            m2prime_ok: rep.m2prime_ok,
            m2prime: rep.m2prime,
            m2_ok: rep.m2_ok,
            m2: rep.m2,
            assumption_roumieu: rep.assumption_roumieu,
            roumieu: rep.roumieu,
            assumption_beurling: rep.assumption_beurling,
            finite_range: rep.finite_range,
            lemma_ratios_head: rep.lemma_ratios.iter().take(32).copied().collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NormalitySection {
    pub is_normal: bool,
    pub discrepancy: f64,
    pub tol: f64,
}

#[derive(Debug, Serialize)]
pub struct EigenvalueRow {
    pub j: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

#[derive(Debug, Serialize)]
pub struct SpectrumSection {
    pub total: usize,
    pub trusted: usize,
    pub matrix_norm: f64,
    pub head: Vec<EigenvalueRow>,
}

impl SpectrumSection {
    pub fn from_decomposition(d: &SpectralDecomposition) -> Self {
        let head = d
            .eigenvalues
            .iter()
            .take(16)
            .enumerate()
            .map(|(idx, lam)| EigenvalueRow {
                j: idx + 1,
                re: lam.re,
                im: lam.im,
                residual: d.residuals[idx],
            })
            .collect();
        SpectrumSection {
            total: d.total(),
            trusted: d.trusted,
            matrix_norm: d.matrix_norm,
            head,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct NormsSection {
    pub iterate: IterateNormTable,
    pub seminorms: SeminormTable,
}

#[derive(Debug, Serialize)]
pub struct SolveSection {
    pub policy: String,
    pub dropped_mass: f64,
    pub kernel_indices: Vec<usize>,
    pub input_classify: DecayFit,
    pub output_classify: DecayFit,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub job: JobEcho,
    pub weights: Option<WeightsSection>,
    pub ellipticity: Option<EllipticityReport>,
    pub normality: Option<NormalitySection>,
    pub hypothesis_failure: Option<String>,
    pub spectrum: Option<SpectrumSection>,
    pub weyl: Option<WeylFit>,
    pub classify: Option<DecayFit>,
    pub norms: Option<NormsSection>,
    pub bounds: Option<EigenBoundWitness>,
    pub solve: Option<SolveSection>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}

/// Moduli of expansion coefficients for the decay plot.
pub fn coefficient_moduli(a: &[Complex64]) -> Vec<(f64, f64)> {
    a.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 0.0)
        .map(|(idx, z)| ((idx + 1) as f64, z.norm().log10()))
        .collect()
}
