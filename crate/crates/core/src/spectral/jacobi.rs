//! Cyclic Jacobi diagonalization for complex Hermitian matrices.
//!
//! Rotations are scheduled in round-robin rounds of pairwise-disjoint
//! index pairs. Within a round every rotation angle is computed from the
//! same snapshot, then all row updates run, then all column updates; the
//! result is therefore bitwise identical for any thread count, and the
//! round as a whole equals the simultaneous similarity transform by the
//! (commuting) product of its disjoint rotations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::par;

const MAX_SWEEPS: usize = 60;
const OFF_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
struct Rotation {
    i: usize,
    j: usize,
    c: f64,
    s: Complex64,
}

/// Disjoint pairs for one round of the circle schedule on `n_padded`
/// (even) players.
fn round_pairs(n_padded: usize, round: usize, n: usize) -> Vec<(usize, usize)> {
    let m = n_padded - 1;
    let mut pairs = Vec::with_capacity(n_padded / 2);
    let fix = n_padded - 1;
    let other = round % m;
    if fix < n && other < n {
        pairs.push((fix.min(other), fix.max(other)));
    }
    for k in 1..n_padded / 2 {
        let a = (round + k) % m;
        let b = (round + m - k) % m;
        if a < n && b < n && a != b {
            pairs.push((a.min(b), a.max(b)));
        }
    }
    pairs
}

fn make_rotation(a: &CMat, i: usize, j: usize) -> Option<Rotation> {
    let b = a[(i, j)];
    let babs = b.norm();
    if babs < 1e-300 {
        return None;
    }
    let theta = (a[(i, i)].re - a[(j, j)].re) / (2.0 * babs);
    let hyp = theta.hypot(1.0);
    let t = if theta >= 0.0 {
        -1.0 / (theta + hyp)
    } else {
        1.0 / (hyp - theta)
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let sigma = t * c;
    let phase = b / babs;
    Some(Rotation {
        i,
        j,
        c,
        s: sigma * phase,
    })
}

/// Raw-cell view used by the disjoint row/column phases.
struct MatCells {
    ptr: *mut Complex64,
    cols: usize,
}

unsafe impl Sync for MatCells {}

impl MatCells {
    #[inline]
    unsafe fn get(&self, r: usize, c: usize) -> Complex64 {
        *self.ptr.add(r * self.cols + c)
    }

    #[inline]
    unsafe fn set(&self, r: usize, c: usize, v: Complex64) {
        *self.ptr.add(r * self.cols + c) = v;
    }
}

/// rows i and j of `a`: (row_i, row_j) <- (c row_i - s row_j, s' row_i + c row_j)
fn apply_row_phase(a: &mut CMat, rots: &[Rotation]) {
    let n = a.cols();
    let cells = MatCells {
        ptr: a.as_mut_ptr(),
        cols: n,
    };
    par::for_each_indexed(rots.len(), |ri| {
        let r = rots[ri];
        let sc = r.s.conj();
        // safety: rotations in a round have pairwise disjoint {i, j}
        unsafe {
            for k in 0..n {
                let vi = cells.get(r.i, k);
                let vj = cells.get(r.j, k);
                cells.set(r.i, k, r.c * vi - r.s * vj);
                cells.set(r.j, k, sc * vi + r.c * vj);
            }
        }
    });
}

/// cols i and j of `a`: (col_i, col_j) <- (c col_i - s' col_j, s col_i + c col_j)
fn apply_col_phase(a: &mut CMat, rots: &[Rotation]) {
    let n = a.rows();
    let cells = MatCells {
        ptr: a.as_mut_ptr(),
        cols: a.cols(),
    };
    par::for_each_indexed(rots.len(), |ri| {
        let r = rots[ri];
        let sc = r.s.conj();
        unsafe {
            for k in 0..n {
                let vi = cells.get(k, r.i);
                let vj = cells.get(k, r.j);
                cells.set(k, r.i, r.c * vi - sc * vj);
                cells.set(k, r.j, r.s * vi + r.c * vj);
            }
        }
    });
}

/// Eigen-decomposition of a Hermitian matrix: returns the (unsorted)
/// real diagonal and the accumulated unitary whose columns are the
/// eigenvectors.
pub(crate) fn hermitian_jacobi(mut a: CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::invalid_argument("jacobi needs a square matrix"));
    }
    let mut v = CMat::identity(n);
    if n <= 1 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok((vals, v));
    }
    let fro = a.frobenius_norm();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let n_padded = if n % 2 == 0 { n } else { n + 1 };
    let rounds = n_padded - 1;
    let target = OFF_TOL * fro;

    for _sweep in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= target {
            let vals = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((vals, v));
        }
        for round in 0..rounds {
            let rots: Vec<Rotation> = round_pairs(n_padded, round, n)
                .into_iter()
                .filter_map(|(i, j)| make_rotation(&a, i, j))
                .collect();
            if rots.is_empty() {
                continue;
            }
            apply_row_phase(&mut a, &rots);
            apply_col_phase(&mut a, &rots);
            apply_col_phase(&mut v, &rots);
            for r in &rots {
                a[(r.i, r.j)] = Complex64::ZERO;
                a[(r.j, r.i)] = Complex64::ZERO;
                a[(r.i, r.i)] = Complex64::new(a[(r.i, r.i)].re, 0.0);
                a[(r.j, r.j)] = Complex64::new(a[(r.j, r.j)].re, 0.0);
            }
        }
    }
    if a.off_diagonal_norm() <= target * 10.0 {
        let vals = (0..n).map(|i| a[(i, i)].re).collect();
        return Ok((vals, v));
    }
    Err(Error::NoConvergence(format!(
        "jacobi off-diagonal {:.3e} after {MAX_SWEEPS} sweeps (target {:.3e})",
        a.off_diagonal_norm(),
        target
    )))
}
