//! Eigen-decomposition of truncated operator matrices, eigenvalue-growth
//! fits, coefficient-space seminorms, and eigenfunction bound witnesses.

mod jacobi;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{
    apply_xbeta_partial_alpha, position_sum_matrix, BasisTruncation, OperatorMatrix,
};
use crate::mat::{vec_norm, CMat};
use crate::operators::{multi_indices_with_sum, MultiIndex};

pub const DEFAULT_SEMINORM_CAP: usize = 32;

/// Options for `decompose_opts`.
#[derive(Debug, Clone, Copy)]
pub struct DecomposeOptions {
    /// Residual / normality tolerance, relative to the Frobenius norm.
    pub tol: f64,
    /// Fraction of the spectrum trusted before truncation pollution; the
    /// top of the spectrum is always discarded.
    pub trust_fraction: f64,
    /// Optional hard cap on the trusted count.
    pub trust_cap: Option<usize>,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            tol: 1e-10,
            trust_fraction: 0.75,
            trust_cap: None,
        }
    }
}

/// Sorted eigen-decomposition with per-pair residuals.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// lambda_j sorted by modulus ascending (ties by argument, then by
    /// pre-sort position).
    pub eigenvalues: Vec<Complex64>,
    /// Orthonormal eigenvector columns aligned with `eigenvalues`.
    pub vectors: CMat,
    /// ||A u_j - lambda_j u_j|| against the cropped matrix.
    pub residuals: Vec<f64>,
    /// Leading count whose residuals pass the tolerance (after the
    /// truncation-pollution cut).
    pub trusted: usize,
    pub trunc: BasisTruncation,
    pub matrix_norm: f64,
    pub tol: f64,
}

impl SpectralDecomposition {
    pub fn total(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvector j (1-based, in sorted order) as a coefficient vector.
    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        self.vectors.column(j - 1)
    }
}

fn sort_eigenpairs(vals: Vec<Complex64>, vecs: CMat) -> (Vec<Complex64>, CMat) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        vals[a]
            .norm()
            .total_cmp(&vals[b].norm())
            .then(vals[a].arg().total_cmp(&vals[b].arg()))
            .then(a.cmp(&b))
    });
    let sorted_vals: Vec<Complex64> = order.iter().map(|&i| vals[i]).collect();
    let cols: Vec<Vec<Complex64>> = order.iter().map(|&i| vecs.column(i)).collect();
    (sorted_vals, CMat::from_columns(vecs.rows(), &cols))
}

/// Rotate each group of (numerically) equal eigenvalues into the basis
/// that diagonalizes the compressed position operator, order the group by
/// that auxiliary eigenvalue, then fix every column's phase by making its
/// first significant coefficient real positive.
fn canonicalize(
    vals: &[Complex64],
    vecs: &mut CMat,
    trunc: &BasisTruncation,
    tie_tol: f64,
) -> Result<()> {
    let n = vals.len();
    let mut xsum: Option<CMat> = None;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end] - vals[start]).norm() <= tie_tol {
            end += 1;
        }
        if end - start > 1 {
            let x = xsum.get_or_insert_with(|| position_sum_matrix(trunc));
            let cols: Vec<Vec<Complex64>> = (start..end).map(|k| vecs.column(k)).collect();
            let g = end - start;
            // Gram block B[p,q] = <x u_q, u_p>
            let mut block = CMat::zeros(g, g);
            let xcols: Vec<Vec<Complex64>> = cols.iter().map(|c| x.mul_vec(c)).collect();
            for p in 0..g {
                for q in 0..g {
                    let mut acc = Complex64::ZERO;
                    for r in 0..vecs.rows() {
                        acc += cols[p][r].conj() * xcols[q][r];
                    }
                    block[(p, q)] = acc;
                }
            }
            // hermitize against roundoff
            let herm = block.adjoint();
            for p in 0..g {
                for q in 0..g {
                    block[(p, q)] = 0.5 * (block[(p, q)] + herm[(p, q)]);
                }
            }
            let (bvals, bvecs) = jacobi::hermitian_jacobi(block)?;
            let mut order: Vec<usize> = (0..g).collect();
            order.sort_by(|&a, &b| bvals[a].total_cmp(&bvals[b]));
            for (slot, &w) in order.iter().enumerate() {
                let mut newcol = vec![Complex64::ZERO; vecs.rows()];
                for p in 0..g {
                    let coef = bvecs[(p, w)];
                    for r in 0..vecs.rows() {
                        newcol[r] += coef * cols[p][r];
                    }
                }
                vecs.set_column(start + slot, &newcol);
            }
        }
        start = end;
    }
    // global phase fixing
    for k in 0..n {
        let col = vecs.column(k);
        if let Some(lead) = col.iter().find(|z| z.norm() > 1e-8) {
            let phase = lead.conj() / lead.norm();
            let fixed: Vec<Complex64> = col.iter().map(|z| z * phase).collect();
            vecs.set_column(k, &fixed);
        }
    }
    Ok(())
}

/// Eigen-decomposition of a truncated operator matrix.
///
/// The self-adjoint path feeds the (symmetrized) matrix to the Hermitian
/// solver directly. The general path diagonalizes the Hermitian part,
/// finishes degenerate blocks with the skew part, and certifies the result
/// by the off-diagonal norm of U* A U; failure signals a matrix that is
/// not normal within tolerance (the crop is granted a pad/N allowance).
pub fn decompose_opts(
    a: &OperatorMatrix,
    selfadjoint: bool,
    opts: DecomposeOptions,
) -> Result<SpectralDecomposition> {
    let n = a.total();
    let fro = a.entries.frobenius_norm();
    let scale = fro.max(1e-300);

    let (vals, mut vecs): (Vec<Complex64>, CMat) = if selfadjoint {
        let defect = a.entries.hermitian_defect();
        if defect > 1e-8 * scale {
            return Err(Error::invalid_argument(format!(
                "matrix declared self-adjoint but hermitian defect is {defect:.3e}"
            )));
        }
        let mut sym = a.entries.clone();
        let adj = a.entries.adjoint();
        for r in 0..n {
            for c in 0..n {
                sym[(r, c)] = 0.5 * (sym[(r, c)] + adj[(r, c)]);
            }
        }
        let (mu, v) = jacobi::hermitian_jacobi(sym)?;
        (mu.into_iter().map(|m| Complex64::new(m, 0.0)).collect(), v)
    } else {
        // Hermitian part first
        let adj = a.entries.adjoint();
        let mut h = a.entries.clone();
        for r in 0..n {
            for c in 0..n {
                h[(r, c)] = 0.5 * (h[(r, c)] + adj[(r, c)]);
            }
        }
        let (mu, mut v) = jacobi::hermitian_jacobi(h)?;
        // sort by the Hermitian eigenvalue so clusters are contiguous
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| mu[x].total_cmp(&mu[y]).then(x.cmp(&y)));
        let cols: Vec<Vec<Complex64>> = order.iter().map(|&i| v.column(i)).collect();
        v = CMat::from_columns(n, &cols);
        let mu_sorted: Vec<f64> = order.iter().map(|&i| mu[i]).collect();

        let cluster_tol = 1e-10 * scale;
        let t = v.adjoint().mul(&a.entries.mul(&v));
        let mut start = 0usize;
        while start < n {
            let mut end = start + 1;
            while end < n && (mu_sorted[end] - mu_sorted[start]).abs() <= cluster_tol {
                end += 1;
            }
            let g = end - start;
            if g > 1 {
                // finish the block with the skew part: i * skew is Hermitian
                let mut skew = CMat::zeros(g, g);
                for p in 0..g {
                    for q in 0..g {
                        let bpq = t[(start + p, start + q)];
                        let bqp = t[(start + q, start + p)];
                        skew[(p, q)] = Complex64::new(0.0, 1.0) * 0.5 * (bpq - bqp.conj());
                    }
                }
                let (_, w) = jacobi::hermitian_jacobi(skew)?;
                let cols: Vec<Vec<Complex64>> = (start..end).map(|k| v.column(k)).collect();
                for slot in 0..g {
                    let mut newcol = vec![Complex64::ZERO; n];
                    for p in 0..g {
                        let coef = w[(p, slot)];
                        for r in 0..n {
                            newcol[r] += coef * cols[p][r];
                        }
                    }
                    v.set_column(start + slot, &newcol);
                }
            }
            start = end;
        }
        let t = v.adjoint().mul(&a.entries.mul(&v));
        let off = t.off_diagonal_norm();
        let crop_allowance = 1.0 + a.pad as f64 / a.trunc.per_axis() as f64;
        let ntol = opts.tol * scale * crop_allowance;
        if off > ntol {
            return Err(Error::NotNormal {
                discrepancy: off,
                tol: ntol,
            });
        }
        ((0..n).map(|i| t[(i, i)]).collect(), v)
    };

    let (vals, sorted_vecs) = sort_eigenpairs(vals, vecs);
    vecs = sorted_vecs;
    let tie_tol = 1e-10 * scale;
    canonicalize(&vals, &mut vecs, &a.trunc, tie_tol)?;

    let residuals: Vec<f64> = crate::par::map_indexed(n, |k| {
        let col = vecs.column(k);
        let av = a.entries.mul_vec(&col);
        let mut acc = 0.0f64;
        for r in 0..n {
            acc += (av[r] - vals[k] * col[r]).norm_sqr();
        }
        acc.sqrt()
    });

    let res_tol = opts.tol * scale;
    let mut trusted = residuals.iter().take_while(|&&r| r <= res_tol).count();
    trusted = trusted.min((opts.trust_fraction * n as f64).floor() as usize);
    if let Some(cap) = opts.trust_cap {
        trusted = trusted.min(cap);
    }

    Ok(SpectralDecomposition {
        eigenvalues: vals,
        vectors: vecs,
        residuals,
        trusted,
        trunc: a.trunc.clone(),
        matrix_norm: fro,
        tol: opts.tol,
    })
}

pub fn decompose(a: &OperatorMatrix, selfadjoint: bool, tol: f64) -> Result<SpectralDecomposition> {
    decompose_opts(
        a,
        selfadjoint,
        DecomposeOptions {
            tol,
            ..DecomposeOptions::default()
        },
    )
}

/// Power-law fit of the eigenvalue growth |lambda_j| ~ B j^e.
#[derive(Debug, Clone, Serialize)]
pub struct WeylFit {
    pub b: f64,
    pub exponent: f64,
    pub exponent_expected: f64,
    pub r_squared: f64,
    pub j_min: usize,
    pub j_max: usize,
    pub m: usize,
    pub n: usize,
}

/// Least-squares fit of log |lambda_j| = log B + e log j over the trusted
/// indices j >= j_min (1-based).
pub fn weyl_fit(s: &SpectralDecomposition, m: usize, n: usize, j_min: usize) -> Result<WeylFit> {
    if m == 0 || n == 0 || j_min == 0 {
        return Err(Error::invalid_argument(
            "weyl fit needs m, n, j_min >= 1".to_string(),
        ));
    }
    if s.trusted < j_min || s.trusted - j_min < 20 {
        return Err(Error::ResourceLimit(format!(
            "need at least 20 trusted eigenvalues above j_min = {j_min}, trusted = {}",
            s.trusted
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in j_min..=s.trusted {
        let lam = s.eigenvalues[j - 1].norm();
        if lam <= 0.0 {
            continue;
        }
        xs.push((j as f64).ln());
        ys.push(lam.ln());
    }
    if xs.len() < 20 {
        return Err(Error::ResourceLimit(
            "fewer than 20 nonzero eigenvalues in the fit range".to_string(),
        ));
    }
    let count = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
    let intercept = (sy - slope * sx) / count;
    let mean_y = sy / count;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let pred = intercept + slope * x;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(WeylFit {
        b: intercept.exp(),
        exponent: slope,
        exponent_expected: m as f64 / (2.0 * n as f64),
        r_squared,
        j_min,
        j_max: s.trusted,
        m,
        n,
    })
}

/// || x^beta (d/dx)^alpha f || for a coefficient vector over `trunc`,
/// computed at padding |alpha| + |beta| so the value is exact for any f
/// supported inside the truncation.
pub fn coeff_seminorm(
    u: &[Complex64],
    alpha: &MultiIndex,
    beta: &MultiIndex,
    trunc: &BasisTruncation,
) -> Result<f64> {
    let s = alpha.order() + beta.order();
    if s > DEFAULT_SEMINORM_CAP {
        return Err(Error::invalid_argument(format!(
            "seminorm order {s} exceeds cap {DEFAULT_SEMINORM_CAP}"
        )));
    }
    if u.len() != trunc.total() {
        return Err(Error::invalid_argument(
            "coefficient length does not match truncation".to_string(),
        ));
    }
    let padded = BasisTruncation::new(trunc.dim(), trunc.per_axis() + s)?;
    let mut embedded = vec![Complex64::ZERO; padded.total()];
    for g in 0..trunc.total() {
        let pos = padded
            .position(trunc.multi_index(g))
            .expect("truncation embeds in padding");
        embedded[pos] = u[g];
    }
    let image = apply_xbeta_partial_alpha(&embedded, alpha, beta, &padded)?;
    Ok(vec_norm(&image))
}

/// |f|_s = sum over |alpha|+|beta| = s of ||x^beta d^alpha f||.
pub fn sobolev_seminorm(u: &[Complex64], s: usize, trunc: &BasisTruncation) -> Result<f64> {
    let n = trunc.dim();
    let mut total = 0.0;
    for adeg in 0..=s {
        for alpha in multi_indices_with_sum(n, adeg) {
            for beta in multi_indices_with_sum(n, s - adeg) {
                total += coeff_seminorm(u, &alpha, &beta, trunc)?;
            }
        }
    }
    Ok(total)
}

/// Normalized eigenfunction-bound witness.
#[derive(Debug, Clone, Serialize)]
pub struct EigenBoundWitness {
    /// max over trusted j and 1 <= |alpha|+|beta| <= cap of
    /// (||x^beta d^alpha u_j|| / (j^{(m+s)/(2n)} sqrt(alpha! beta!)))^{1/s}.
    pub ell: f64,
    /// per-j maxima, 1-based alongside the trusted range
    pub per_j: Vec<f64>,
    /// running maxima of `per_j`
    pub running_max: Vec<f64>,
    /// spread max/min of the running max over the top decade of j
    pub top_decade_spread: f64,
    pub cap: usize,
}

/// Witness for the eigenfunction seminorm growth bound; stabilization of
/// the running max across j is the testable form of the bound.
pub fn eigen_bound_fit(
    s: &SpectralDecomposition,
    weyl: &WeylFit,
    cap: usize,
) -> Result<EigenBoundWitness> {
    if cap > DEFAULT_SEMINORM_CAP {
        return Err(Error::invalid_argument(format!(
            "cap {cap} exceeds the padding budget {DEFAULT_SEMINORM_CAP}"
        )));
    }
    if cap == 0 {
        return Ok(EigenBoundWitness {
            ell: 0.0,
            per_j: Vec::new(),
            running_max: Vec::new(),
            top_decade_spread: 0.0,
            cap,
        });
    }
    let n = s.trunc.dim();
    let two_n = 2.0 * weyl.n as f64;
    // (alpha, beta, s) with 1 <= s <= cap; the trivial pair (0, 0) is skipped
    let mut pairs = Vec::new();
    for deg in 1..=cap {
        for adeg in 0..=deg {
            for alpha in multi_indices_with_sum(n, adeg) {
                for beta in multi_indices_with_sum(n, deg - adeg) {
                    pairs.push((alpha.clone(), beta, deg));
                }
            }
        }
    }
    let per_j: Vec<f64> = crate::par::map_indexed(s.trusted, |idx| {
        let j = idx + 1;
        let u = s.vectors.column(idx);
        let mut best = 0.0f64;
        for (alpha, beta, deg) in &pairs {
            let semi = coeff_seminorm(&u, alpha, beta, &s.trunc).expect("cap checked");
            let denom = (j as f64).powf((weyl.m as f64 + *deg as f64) / two_n)
                * (alpha.factorial() * beta.factorial()).sqrt();
            let ratio = (semi / denom).powf(1.0 / *deg as f64);
            best = best.max(ratio);
        }
        best
    });
    let mut running_max = Vec::with_capacity(per_j.len());
    let mut acc = 0.0f64;
    for &v in &per_j {
        acc = acc.max(v);
        running_max.push(acc);
    }
    let ell = acc;
    let top_decade_spread = if running_max.is_empty() {
        0.0
    } else {
        let lo_idx = (running_max.len() / 10).max(1) - 1;
        let window = &running_max[lo_idx..];
        let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = window.iter().cloned().fold(0.0f64, f64::max);
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    };
    Ok(EigenBoundWitness {
        ell,
        per_j,
        running_max,
        top_decade_spread,
        cap,
    })
}
