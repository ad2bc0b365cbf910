//! Bitwise determinism across thread counts: every parallel kernel must
//! produce identical output in a single-thread pool and a wide pool.

#![cfg(feature = "parallel")]

use num_complex::Complex64;
use shubin_spectra::analysis::{classify_decay, ExpansionCoefficients};
use shubin_spectra::hermite::{hermite_transform, operator_matrix, BasisTruncation};
use shubin_spectra::operators::{ellipticity_test, MultiIndex, ShubinOperator};
use shubin_spectra::spectral::decompose;
use shubin_spectra::weights::WeightSequence;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool")
}

#[test]
fn kernels_are_thread_count_independent() {
    let trunc = BasisTruncation::new(1, 48).unwrap();
    let raw = ShubinOperator::new(
        1,
        vec![
            (MultiIndex(vec![0]), MultiIndex(vec![2]), Complex64::ONE),
            (
                MultiIndex(vec![2]),
                MultiIndex(vec![0]),
                Complex64::new(4.0, 0.0),
            ),
            (
                MultiIndex(vec![1]),
                MultiIndex(vec![1]),
                Complex64::new(0.5, 0.0),
            ),
        ],
    )
    .unwrap();
    // symmetrize the cross term so the self-adjoint path applies
    let p = raw
        .add(&shubin_spectra::operators::adjoint(&raw))
        .unwrap()
        .scale(Complex64::new(0.5, 0.0));
    let w = WeightSequence::gevrey(0.5, 1024).unwrap();
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];

    let run = |threads: usize| {
        pool(threads).install(|| {
            let m = operator_matrix(&p, &trunc).unwrap();
            let d = decompose(&m, true, 1e-10).unwrap();
            let coeffs =
                hermite_transform(|x| Complex64::new((-x[0] * x[0]).exp(), 0.0), &trunc, 64)
                    .unwrap();
            let a = shubin_spectra::analysis::expand(&coeffs, &d).unwrap();
            let fit = classify_decay(&a, &w, 1, &grid).unwrap();
            let ell = ellipticity_test(&p, 512, 1234).unwrap();
            (
                m.entries.data().to_vec(),
                d.eigenvalues,
                d.vectors.data().to_vec(),
                a.a,
                fit.rows.iter().map(|r| r.log_sup).collect::<Vec<_>>(),
                ell.min_modulus,
                ell.argmin_x,
            )
        })
    };

    let single = run(1);
    let wide = run(8);
    assert_eq!(single.0, wide.0, "matrix assembly changed across pools");
    assert_eq!(single.1, wide.1, "eigenvalues changed across pools");
    assert_eq!(single.2, wide.2, "eigenvectors changed across pools");
    assert_eq!(single.3, wide.3, "expansion changed across pools");
    assert_eq!(single.4, wide.4, "classification changed across pools");
    assert_eq!(single.5, wide.5, "ellipticity min changed across pools");
    assert_eq!(single.6, wide.6, "ellipticity argmin changed across pools");

    // uncapped classification on the flat sequence must also agree
    let flat = ExpansionCoefficients::new(vec![Complex64::ONE; 64], "flat").unwrap();
    let f1 = pool(1).install(|| classify_decay(&flat, &w, 1, &grid).unwrap());
    let f8 = pool(8).install(|| classify_decay(&flat, &w, 1, &grid).unwrap());
    assert_eq!(f1.verdict_roumieu, f8.verdict_roumieu);
    assert_eq!(
        f1.rows.iter().map(|r| r.log_sup).collect::<Vec<_>>(),
        f8.rows.iter().map(|r| r.log_sup).collect::<Vec<_>>()
    );
}
