//! Matrix and seminorm entries checked against exact Gaussian-moment
//! inner products, independently of the ladder recurrences that produce
//! them in the library.

mod common;

use common::{GaussProd, GaussSum};
use num_complex::Complex64;
use shubin_spectra::hermite::{ladder_matrix, operator_matrix, BasisTruncation, LadderKind};
use shubin_spectra::operators::{compose, MultiIndex, ShubinOperator};
use shubin_spectra::spectral::{coeff_seminorm, sobolev_seminorm};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn ladder_entries_match_exact_inner_products() {
    let n = 7usize;
    let t = BasisTruncation::new(1, n).unwrap();
    let x_mat = ladder_matrix(0, LadderKind::Position, &t).unwrap();
    let d_mat = ladder_matrix(0, LadderKind::Derivative, &t).unwrap();
    for j in 0..n {
        for k in 0..n {
            let hj = GaussSum::single(GaussProd::hermite(&[j]));
            let hk = GaussSum::single(GaussProd::hermite(&[k]));
            // <x h_k, h_j>
            let x_op = ShubinOperator::position(1, 0);
            let expect = hk.apply(&x_op).inner(&hj);
            assert!(
                (x_mat.entries[(j, k)] - expect).norm() < 1e-12,
                "X[{j},{k}]"
            );
            // <D h_k, h_j>
            let d_op = ShubinOperator::derivative(1, 0);
            let expect = hk.apply(&d_op).inner(&hj);
            assert!(
                (d_mat.entries[(j, k)] - expect).norm() < 1e-12,
                "D[{j},{k}]"
            );
        }
    }
}

#[test]
fn operator_matrix_entries_match_exact_inner_products() {
    let n = 6usize;
    let t = BasisTruncation::new(1, n).unwrap();
    let p = ShubinOperator::new(
        1,
        vec![
            (MultiIndex(vec![1]), MultiIndex(vec![1]), c(0.5, -1.0)),
            (MultiIndex(vec![0]), MultiIndex(vec![2]), c(1.0, 0.0)),
            (MultiIndex(vec![2]), MultiIndex(vec![0]), c(0.0, 2.0)),
        ],
    )
    .unwrap();
    let m = operator_matrix(&p, &t).unwrap();
    for j in 0..n {
        for k in 0..n {
            let hj = GaussSum::single(GaussProd::hermite(&[j]));
            let hk = GaussSum::single(GaussProd::hermite(&[k]));
            let expect = hk.apply(&p).inner(&hj);
            assert!(
                (m.entries[(j, k)] - expect).norm() < 1e-11,
                "P[{j},{k}]: {} vs {}",
                m.entries[(j, k)],
                expect
            );
        }
    }
}

#[test]
fn operator_matrix_entries_match_in_two_dimensions() {
    let t = BasisTruncation::new(2, 3).unwrap();
    let p = ShubinOperator::new(
        2,
        vec![
            (MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1]), c(1.0, 0.25)),
            (MultiIndex(vec![0, 2]), MultiIndex(vec![0, 0]), c(-0.5, 0.0)),
        ],
    )
    .unwrap();
    let m = operator_matrix(&p, &t).unwrap();
    for row in 0..t.total() {
        for col in 0..t.total() {
            let kj = t.multi_index(row);
            let kk = t.multi_index(col);
            let hj = GaussSum::single(GaussProd::hermite(&kj.0));
            let hk = GaussSum::single(GaussProd::hermite(&kk.0));
            let expect = hk.apply(&p).inner(&hj);
            assert!(
                (m.entries[(row, col)] - expect).norm() < 1e-11,
                "entry ({row},{col})"
            );
        }
    }
}

#[test]
fn matrix_of_composition_agrees_on_interior_block() {
    let n = 12usize;
    let t = BasisTruncation::new(1, n).unwrap();
    let p = ShubinOperator::new(
        1,
        vec![
            (MultiIndex(vec![0]), MultiIndex(vec![2]), c(1.0, 0.0)),
            (MultiIndex(vec![1]), MultiIndex(vec![0]), c(0.0, 1.0)),
        ],
    )
    .unwrap();
    let q = ShubinOperator::new(
        1,
        vec![
            (MultiIndex(vec![2]), MultiIndex(vec![0]), c(1.0, 0.0)),
            (MultiIndex(vec![0]), MultiIndex(vec![1]), c(0.5, 0.0)),
        ],
    )
    .unwrap();
    let pq = compose(&p, &q).unwrap();
    let m_pq = operator_matrix(&pq, &t).unwrap();
    let prod = operator_matrix(&p, &t)
        .unwrap()
        .entries
        .mul(&operator_matrix(&q, &t).unwrap().entries);
    // agreement on columns whose image stays inside the truncation
    let interior = n - p.order() - q.order();
    for row in 0..interior {
        for col in 0..interior {
            assert!(
                (m_pq.entries[(row, col)] - prod[(row, col)]).norm() < 1e-10,
                "block entry ({row},{col})"
            );
        }
    }
}

#[test]
fn seminorms_match_exact_function_norms() {
    let n = 10usize;
    let t = BasisTruncation::new(1, n).unwrap();
    // f = h_2 - (0.3 + 0.4i) h_5
    let mut f = vec![Complex64::ZERO; n];
    f[2] = Complex64::ONE;
    f[5] = c(-0.3, -0.4);
    let f_fn = GaussSum {
        terms: vec![
            (Complex64::ONE, GaussProd::hermite(&[2])),
            (c(-0.3, -0.4), GaussProd::hermite(&[5])),
        ],
    };
    for (adeg, bdeg) in [
        (0usize, 0usize),
        (1, 0),
        (0, 1),
        (1, 1),
        (2, 0),
        (0, 2),
        (2, 1),
    ] {
        let got = coeff_seminorm(&f, &MultiIndex(vec![adeg]), &MultiIndex(vec![bdeg]), &t).unwrap();
        // x^b (d/dx)^a as an operator: (iD)^a has unit modulus factor
        let op = ShubinOperator::new(
            1,
            vec![(
                MultiIndex(vec![bdeg]),
                MultiIndex(vec![adeg]),
                Complex64::new(0.0, 1.0).powu(adeg as u32),
            )],
        )
        .unwrap();
        let expect = f_fn.apply(&op).norm();
        assert!(
            (got - expect).abs() <= 1e-11 * (1.0 + expect),
            "(a,b) = ({adeg},{bdeg}): {got} vs {expect}"
        );
    }
}

#[test]
fn ground_state_sobolev_two_matches_oracle() {
    // |h_0|_2 = ||d^2 h_0|| + ||x d h_0|| + ||x^2 h_0|| = 3 sqrt(3)/2
    let t = BasisTruncation::new(1, 8).unwrap();
    let mut e0 = vec![Complex64::ZERO; 8];
    e0[0] = Complex64::ONE;
    let got = sobolev_seminorm(&e0, 2, &t).unwrap();

    let h0 = GaussSum::single(GaussProd::hermite(&[0]));
    let mut expect = 0.0;
    for (adeg, bdeg) in [(2usize, 0usize), (1, 1), (0, 2)] {
        let op = ShubinOperator::new(
            1,
            vec![(
                MultiIndex(vec![bdeg]),
                MultiIndex(vec![adeg]),
                Complex64::new(0.0, 1.0).powu(adeg as u32),
            )],
        )
        .unwrap();
        expect += h0.apply(&op).norm();
    }
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    assert!((got - 2.598076211353316).abs() < 1e-12);
}

#[test]
fn hermite_oracle_is_orthonormal() {
    // sanity for the oracle itself
    for j in 0..8usize {
        for k in 0..8usize {
            let hj = GaussPolyWrap(j).sum();
            let hk = GaussPolyWrap(k).sum();
            let ip = hj.inner(&hk);
            let expect = if j == k { 1.0 } else { 0.0 };
            assert!((ip.re - expect).abs() < 1e-12);
            assert!(ip.im.abs() < 1e-14);
        }
    }
}

struct GaussPolyWrap(usize);

impl GaussPolyWrap {
    fn sum(&self) -> GaussSum {
        GaussSum::single(GaussProd::hermite(&[self.0]))
    }
}
