use num_complex::Complex64;
use shubin_spectra::analysis::{classify_decay, expand};
use shubin_spectra::hermite::{hermite_transform, operator_matrix, BasisTruncation};
use shubin_spectra::operators::ShubinOperator;
use shubin_spectra::spectral::decompose;
use shubin_spectra::weights::WeightSequence;

fn main() -> shubin_spectra::Result<()> {
    let trunc = BasisTruncation::new(1, 64)?;
    let op = ShubinOperator::harmonic_oscillator(1);
    let matrix = operator_matrix(&op, &trunc)?;
    let spectrum = decompose(&matrix, true, 1e-10)?;
    let coeffs = hermite_transform(
        |x| Complex64::new((-x[0] * x[0]).exp(), 0.0),
        &trunc,
        96,
    )?;
    let a = expand(&coeffs, &spectrum)?;
    let weights = WeightSequence::gevrey(0.5, 4096)?;
    let grid: Vec<f64> = (-4..=4).map(|k| 2f64.powi(k)).collect();
    let fit = classify_decay(&a, &weights, 1, &grid)?;
    println!("roumieu: {}, lambda_star: {:?}", fit.verdict_roumieu, fit.lambda_star);
    Ok(())
}
