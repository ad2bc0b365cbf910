//! Report serialization: atomic file writes and the CSV encoders.

use std::path::Path;

use num_complex::Complex64;
use shubin_spectra::hermite::BasisTruncation;
use shubin_spectra::spectral::SpectralDecomposition;

use crate::CliError;

/// Write via a temporary sibling then rename, so readers never observe a
/// partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::internal(format!("create {}: {e}", dir.display())))?;
    let tmp = dir.join(format!(".tmp.{name}"));
    let target = dir.join(name);
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::internal(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &target)
        .map_err(|e| CliError::internal(format!("rename to {}: {e}", target.display())))?;
    Ok(())
}

/// spectrum.csv: one row per eigenvalue.
pub fn spectrum_csv(d: &SpectralDecomposition) -> String {
    let mut out = String::from("j,re_lambda,im_lambda,residual\n");
    for (idx, lam) in d.eigenvalues.iter().enumerate() {
        out.push_str(&format!(
            "{},{:.17e},{:.17e},{:.17e}\n",
            idx + 1,
            lam.re,
            lam.im,
            d.residuals[idx]
        ));
    }
    out
}

/// coefficients.csv: Hermite coefficient vector in graded order; the
/// multi-index entries are joined with ';'.
pub fn coefficients_csv(coeffs: &[Complex64], trunc: &BasisTruncation) -> String {
    let mut out = String::from("index,multi_index,re,im\n");
    for (g, c) in coeffs.iter().enumerate() {
        let k = trunc
            .multi_index(g)
            .0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!("{},{},{:.17e},{:.17e}\n", g, k, c.re, c.im));
    }
    out
}

/// Per-h norm tables as CSV for plotting.
pub fn norms_csv(section: &crate::report::NormsSection) -> String {
    let mut out = String::from(
        "h,iterate_norm,iterate_maximizer,iterate_saturated,ultra_norm,ultra_maximizer,ultra_saturated,derived_norm,derived_maximizer,derived_saturated\n",
    );
    let it = &section.iterate;
    let sm = &section.seminorms;
    for (idx, &h) in it.h_grid.iter().enumerate() {
        out.push_str(&format!(
            "{:.17e},{:.17e},{},{},{:.17e},{},{},{:.17e},{},{}\n",
            h,
            it.norms[idx].value,
            it.norms[idx].maximizer,
            it.norms[idx].saturated,
            sm.ultra[idx].value,
            sm.ultra[idx].maximizer,
            sm.ultra[idx].saturated,
            sm.derived[idx].value,
            sm.derived[idx].maximizer,
            sm.derived[idx].saturated,
        ));
    }
    out
}

/// Per-lambda table rows as CSV for plotting.
pub fn decay_csv(fit: &shubin_spectra::analysis::DecayFit) -> String {
    let mut out = String::from("lambda,log_sup,argmax_j,excluded,saturated,passes\n");
    for row in &fit.rows {
        out.push_str(&format!(
            "{:.17e},{},{},{},{},{}\n",
            row.lambda,
            row.log_sup
                .map_or("nan".to_string(), |v| format!("{v:.17e}")),
            row.argmax_j.map_or("-".to_string(), |j| j.to_string()),
            row.excluded,
            row.saturated,
            row.passes
        ));
    }
    out
}
