//! Gauss-Hermite nodes and weights via the Golub-Welsch connection:
//! the nodes are eigenvalues of the symmetric tridiagonal recurrence
//! matrix and the weights come from the first eigenvector components.

use crate::error::{Error, Result};

/// Implicit-shift QL for a symmetric tridiagonal matrix, tracking only the
/// first row of the accumulated eigenvector matrix (all that quadrature
/// weights need). `d` holds the diagonal, `e[i]` the coupling between
/// rows i-1 and i (e[0] unused).
fn tql_first_row(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence(
                    "tridiagonal QL exceeded 60 iterations".to_string(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss-Hermite rule for the weight e^{-x^2}.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// w_i e^{x_i^2}, assembled in log space so that nothing underflows
    /// before the exponential is taken.
    pub folded_weights: Vec<f64>,
}

pub fn gauss_hermite(order: usize) -> Result<GaussHermite> {
    if order == 0 {
        return Err(Error::invalid_argument(
            "quadrature order must be positive".to_string(),
        ));
    }
    let mut d = vec![0.0f64; order];
    let mut e = vec![0.0f64; order];
    for i in 1..order {
        e[i] = (i as f64 / 2.0).sqrt();
    }
    let mut z = vec![0.0f64; order];
    z[0] = 1.0;
    tql_first_row(&mut d, &mut e, &mut z)?;

    let mut idx: Vec<usize> = (0..order).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));

    let log_sqrt_pi = 0.5 * std::f64::consts::PI.ln();
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    let mut folded = Vec::with_capacity(order);
    for &i in &idx {
        let x = d[i];
        let log_w = log_sqrt_pi + 2.0 * z[i].abs().max(f64::MIN_POSITIVE).ln();
        nodes.push(x);
        weights.push(log_w.exp());
        folded.push((log_w + x * x).exp());
    }
    Ok(GaussHermite {
        nodes,
        weights,
        folded_weights: folded,
    })
}
