//! Stage orchestration: conditions, ellipticity, normality, matrix,
//! spectrum, expansion, classification, norm tables, bound witnesses,
//! and the report/plot files.

use std::path::Path;

use num_complex::Complex64;
use shubin_spectra::analysis::{
    classify_decay, expand, iterate_norms, seminorm_family, solve_eigen_division, DecayFit,
    ExpansionCoefficients, KernelPolicy,
};
use shubin_spectra::hermite::{
    hermite_transform, hermite_transform_sampled, operator_matrix_padded, BasisTruncation,
};
use shubin_spectra::operators::{adjoint, ellipticity_test, is_normal, ShubinOperator};
use shubin_spectra::spectral::{
    decompose_opts, eigen_bound_fit, weyl_fit, DecomposeOptions, SpectralDecomposition, WeylFit,
};
use shubin_spectra::weights::{
    check_conditions, AssociatedFunction, AssociatedKind, WeightSequence,
};
use shubin_spectra::Error as CoreError;

use crate::job::{named_function, read_sample_csv, JobConfig, TestFunction};
use crate::report::{
    coefficient_moduli, NormalitySection, NormsSection, Report, SolveSection, SpectrumSection,
    WeightsSection, SCHEMA_VERSION,
};
use crate::svg::Plot;
use crate::{output, CliError};

const NORMALITY_TOL: f64 = 1e-10;
const DECOMPOSE_TOL: f64 = 1e-10;

pub struct Pipeline {
    pub job: JobConfig,
    pub op: ShubinOperator,
    pub weights: WeightSequence,
    pub trunc: BasisTruncation,
}

pub struct SpectrumStage {
    pub decomposition: SpectralDecomposition,
    pub weyl: Option<WeylFit>,
    pub weyl_note: Option<String>,
}

impl Pipeline {
    pub fn new(job: JobConfig) -> Result<Self, CliError> {
        let op = job.operator()?;
        let weights = job.weight_sequence()?;
        let trunc = BasisTruncation::new(op.dim(), job.truncation.per_axis)
            .map_err(|e| CliError::config(format!("field `truncation`: {e}")))?;
        Ok(Pipeline {
            job,
            op,
            weights,
            trunc,
        })
    }

    fn empty_report(&self) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            seed: self.job.seed,
            job: crate::report::JobEcho {
                operator: self.job.operator.clone(),
                weights: self.job.weights.clone(),
                truncation: self.job.truncation.clone(),
                quad_order: self.job.quad_order(),
                test_function: self.job.test_function.clone(),
                lambda_grid: self.job.lambda_grid.clone(),
                h_grid: self.job.h_grid.clone(),
                caps: self.job.caps.clone(),
                checks: self.job.checks.clone(),
            },
            weights: None,
            ellipticity: None,
            normality: None,
            hypothesis_failure: None,
            spectrum: None,
            weyl: None,
            classify: None,
            norms: None,
            bounds: None,
            solve: None,
            notes: Vec::new(),
        }
    }

    pub fn condition_report(&self) -> WeightsSection {
        WeightsSection::from_report(&check_conditions(&self.weights))
    }

    /// Ellipticity + normality; on failure returns the hypothesis name.
    pub fn hypothesis_checks(&self, report: &mut Report) -> Result<(), String> {
        if self.job.checks.ellipticity {
            match ellipticity_test(&self.op, self.job.sphere_samples(), self.job.seed) {
                Ok(rep) => {
                    let verdict = rep.verdict;
                    report.ellipticity = Some(rep);
                    if !verdict {
                        return Err("ellipticity".to_string());
                    }
                }
                Err(e) => {
                    report.notes.push(format!("ellipticity test skipped: {e}"));
                }
            }
        }
        if self.job.checks.normality {
            let scale = self.op.max_coefficient_modulus().max(1.0);
            let tol = NORMALITY_TOL * scale * scale;
            let (ok, discrepancy) = is_normal(&self.op, tol).expect("dimensions agree");
            report.normality = Some(NormalitySection {
                is_normal: ok,
                discrepancy,
                tol,
            });
            if !ok {
                return Err("normality".to_string());
            }
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Result<SpectrumStage, CliError> {
        let pad = self.job.truncation.pad.max(self.op.order());
        let matrix =
            operator_matrix_padded(&self.op, &self.trunc, pad).map_err(CliError::from_core)?;
        let selfadjoint = adjoint(&self.op) == self.op;
        let decomposition = decompose_opts(
            &matrix,
            selfadjoint,
            DecomposeOptions {
                tol: DECOMPOSE_TOL,
                trust_cap: self.job.caps.trust_cap,
                ..DecomposeOptions::default()
            },
        )
        .map_err(CliError::from_core)?;
        let (weyl, weyl_note) = match weyl_fit(
            &decomposition,
            self.op.order().max(1),
            self.op.dim(),
            self.job.caps.j_min,
        ) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (
                None,
                Some(format!("eigenvalue-growth fit unavailable: {e}")),
            ),
        };
        Ok(SpectrumStage {
            decomposition,
            weyl,
            weyl_note,
        })
    }

    pub fn hermite_coefficients(&self) -> Result<Vec<Complex64>, CliError> {
        let quad = self.job.quad_order();
        match &self.job.test_function {
            TestFunction::Named(name) => {
                let f = named_function(name)?;
                hermite_transform(move |x| f(x), &self.trunc, quad).map_err(CliError::from_core)
            }
            TestFunction::Csv { csv } => {
                let samples = read_sample_csv(csv)?;
                hermite_transform_sampled(&samples, &self.trunc, quad).map_err(CliError::from_core)
            }
        }
    }

    pub fn classify(&self, coeffs: &ExpansionCoefficients) -> Result<DecayFit, CliError> {
        classify_decay(coeffs, &self.weights, self.op.dim(), &self.job.lambda_grid)
            .map_err(CliError::from_core)
    }

    pub fn norm_tables(&self, f: &[Complex64]) -> Result<NormsSection, CliError> {
        let m = self.op.order().max(1);
        let p_cap = self.job.caps.p_cap;
        let matrix =
            operator_matrix_padded(&self.op, &self.trunc, (p_cap * m).max(self.op.order()))
                .map_err(CliError::from_core)?;
        let iterate = iterate_norms(&matrix, f, &self.weights, m, &self.job.h_grid, p_cap)
            .map_err(CliError::from_core)?;
        let seminorms = seminorm_family(
            f,
            &self.trunc,
            &self.weights,
            &self.job.h_grid,
            self.job.caps.s_cap,
            m,
        )
        .map_err(CliError::from_core)?;
        Ok(NormsSection { iterate, seminorms })
    }

    fn decay_plot(&self, a: &ExpansionCoefficients, fit: &DecayFit) -> String {
        let points = coefficient_moduli(&a.a);
        let mut all = points.clone();
        let assoc = AssociatedFunction::new(&self.weights, AssociatedKind::Plain).ok();
        let mut envelopes: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        if let Some(assoc) = &assoc {
            let ln10 = std::f64::consts::LN_10;
            let exponent = 1.0 / (2.0 * self.op.dim() as f64);
            for row in fit.rows.iter().filter(|r| r.passes) {
                let c_log10 = row.log_sup.unwrap_or(0.0) / ln10;
                let mut curve = Vec::new();
                for j in 1..=a.len() {
                    let t = row.lambda * (j as f64).powf(exponent);
                    if let Ok(v) = assoc.eval(t) {
                        if !v.saturated {
                            curve.push((j as f64, c_log10 - v.value / ln10));
                        }
                    }
                }
                all.extend(curve.iter().copied());
                envelopes.push((row.lambda, curve));
            }
        }
        let mut plot = Plot::new(
            "coefficient decay against weight envelopes",
            "j",
            "log10 |a_j|",
        )
        .with_ranges(&all);
        plot.points(&points, "#1f4e9c");
        let palette = ["#c23b22", "#2e8540", "#8a4fbe", "#b8860b"];
        for (idx, (lambda, curve)) in envelopes.iter().enumerate() {
            plot.polyline(
                curve,
                palette[idx % palette.len()],
                Some(&format!("lambda = {lambda}")),
            );
        }
        plot.render()
    }

    fn weyl_plot(&self, d: &SpectralDecomposition, weyl: Option<&WeylFit>) -> String {
        let points: Vec<(f64, f64)> = d
            .eigenvalues
            .iter()
            .take(d.trusted)
            .enumerate()
            .filter(|(_, lam)| lam.norm() > 0.0)
            .map(|(idx, lam)| ((idx + 1) as f64, lam.norm()))
            .map(|(j, lam)| (j.log10(), lam.log10()))
            .collect();
        let mut all = points.clone();
        let fit_line: Vec<(f64, f64)> = if let Some(fit) = weyl {
            let ln10 = std::f64::consts::LN_10;
            points
                .iter()
                .map(|&(lx, _)| {
                    let logj = lx * ln10;
                    ((fit.b.ln() + fit.exponent * logj) / ln10, lx)
                })
                .map(|(ly, lx)| (lx, ly))
                .collect()
        } else {
            Vec::new()
        };
        all.extend(fit_line.iter().copied());
        let mut plot = Plot::new(
            "eigenvalue growth and power-law fit",
            "log10 j",
            "log10 |lambda_j|",
        )
        .with_ranges(&all);
        plot.points(&points, "#1f4e9c");
        if let Some(fit) = weyl {
            plot.polyline(
                &fit_line,
                "#c23b22",
                Some(&format!("B j^{:.3}", fit.exponent)),
            );
        }
        plot.render()
    }

    /// Full job: run every enabled stage and write the report files.
    /// Returns the hypothesis-failure flag (exit 2 when set).
    pub fn run(&self, out_dir: &Path) -> Result<bool, CliError> {
        let mut report = self.empty_report();
        if self.job.checks.weights {
            report.weights = Some(self.condition_report());
        }
        if let Err(which) = self.hypothesis_checks(&mut report) {
            report.hypothesis_failure = Some(which);
            output::write_atomic(out_dir, "report.json", &report.to_json())?;
            return Ok(true);
        }

        let mut decomposition = None;
        if self.job.checks.spectrum {
            match self.spectrum() {
                Ok(stage) => {
                    if let Some(note) = &stage.weyl_note {
                        report.notes.push(note.clone());
                    }
                    report.spectrum =
                        Some(SpectrumSection::from_decomposition(&stage.decomposition));
                    report.weyl = stage.weyl.clone();
                    decomposition = Some(stage);
                }
                Err(CliError::Hypothesis(msg)) => {
                    report.hypothesis_failure = Some(msg);
                    output::write_atomic(out_dir, "report.json", &report.to_json())?;
                    return Ok(true);
                }
                Err(e) => return Err(e),
            }
        }

        let mut hermite_coeffs = None;
        if self.job.checks.classify || self.job.checks.norms {
            let coeffs = self.hermite_coefficients()?;
            if let (true, Some(stage)) = (self.job.checks.classify, &decomposition) {
                let a = expand(&coeffs, &stage.decomposition).map_err(CliError::from_core)?;
                let fit = self.classify(&a)?;
                output::write_atomic(out_dir, "decay.svg", &self.decay_plot(&a, &fit))?;
                output::write_atomic(out_dir, "decay.csv", &output::decay_csv(&fit))?;
                report.classify = Some(fit);
            }
            if self.job.checks.norms {
                let tables = self.norm_tables(&coeffs)?;
                output::write_atomic(out_dir, "norms.csv", &output::norms_csv(&tables))?;
                report.norms = Some(tables);
            }
            hermite_coeffs = Some(coeffs);
        }

        if let (true, Some(stage)) = (self.job.checks.bounds, &decomposition) {
            if let Some(weyl) = &stage.weyl {
                let witness = eigen_bound_fit(&stage.decomposition, weyl, self.job.caps.bound_cap)
                    .map_err(CliError::from_core)?;
                report.bounds = Some(witness);
            } else {
                report
                    .notes
                    .push("bound witness skipped: no eigenvalue-growth fit".to_string());
            }
        }

        if let Some(stage) = &decomposition {
            output::write_atomic(
                out_dir,
                "spectrum.csv",
                &output::spectrum_csv(&stage.decomposition),
            )?;
            output::write_atomic(
                out_dir,
                "weyl.svg",
                &self.weyl_plot(&stage.decomposition, stage.weyl.as_ref()),
            )?;
        }
        if let Some(coeffs) = &hermite_coeffs {
            output::write_atomic(
                out_dir,
                "coefficients.csv",
                &output::coefficients_csv(coeffs, &self.trunc),
            )?;
        }
        output::write_atomic(out_dir, "report.json", &report.to_json())?;
        Ok(false)
    }

    /// Eigen-division stage for the solve subcommand.
    pub fn solve(&self, policy: KernelPolicy) -> Result<SolveSection, CliError> {
        let stage = self.spectrum()?;
        let coeffs = self.hermite_coefficients()?;
        let a = expand(&coeffs, &stage.decomposition).map_err(CliError::from_core)?;
        let input_classify = self.classify(&a)?;
        let division = solve_eigen_division(&stage.decomposition, &a, policy, DECOMPOSE_TOL)
            .map_err(CliError::from_core)?;
        let output_classify = self.classify(&division.coeffs)?;
        Ok(SolveSection {
            policy: match policy {
                KernelPolicy::Reject => "reject".to_string(),
                KernelPolicy::Project => "project".to_string(),
            },
            dropped_mass: division.dropped_mass,
            kernel_indices: division.kernel_indices,
            input_classify,
            output_classify,
        })
    }
}

impl CliError {
    pub fn from_core(e: CoreError) -> Self {
        match e {
            CoreError::NotNormal { discrepancy, tol } => CliError::Hypothesis(format!(
                "normality (matrix level): discrepancy {discrepancy:.6e} exceeds {tol:.6e}"
            )),
            other => CliError::Internal(other.to_string()),
        }
    }
}
