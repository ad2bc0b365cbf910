//! Truncated tensor Hermite basis: stable function evaluation, ladder
//! actions, operator-to-matrix assembly, and the quadrature transform.

mod quadrature;

pub use quadrature::{gauss_hermite, GaussHermite};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mat::CMat;
use crate::operators::{MultiIndex, ShubinOperator};
use crate::par;

pub const MAX_HERMITE_DEGREE: usize = 100_000;

/// Truncated tensor basis {h_k : k in {0..N-1}^n}, enumerated by total
/// degree ascending with lexicographic tie-break. For the harmonic
/// oscillator this makes matrix index order coincide with eigenvalue order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisTruncation {
    dim: usize,
    per_axis: usize,
    #[serde(skip)]
    index_order: Vec<MultiIndex>,
    #[serde(skip)]
    rowmajor_of_graded: Vec<usize>,
    #[serde(skip)]
    graded_of_rowmajor: Vec<usize>,
    total: usize,
}

impl BasisTruncation {
    pub fn new(dim: usize, per_axis: usize) -> Result<Self> {
        if dim == 0 || per_axis == 0 {
            return Err(Error::invalid_argument(
                "truncation needs dim >= 1 and per_axis >= 1".to_string(),
            ));
        }
        let total = per_axis
            .checked_pow(dim as u32)
            .filter(|&t| t <= 1 << 22)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("truncation {per_axis}^{dim} is out of budget"))
            })?;
        let mut index_order: Vec<MultiIndex> = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        loop {
            index_order.push(MultiIndex(idx.clone()));
            // row-major increment, last axis fastest
            let mut axis = dim;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < per_axis {
                    break;
                }
                idx[axis] = 0;
            }
            if idx.iter().all(|&v| v == 0) {
                break;
            }
        }
        // at this point index_order is in row-major order
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| {
            let (ka, kb) = (&index_order[a], &index_order[b]);
            ka.order().cmp(&kb.order()).then_with(|| ka.0.cmp(&kb.0))
        });
        let rowmajor_of_graded: Vec<usize> = order.clone();
        let mut graded_of_rowmajor = vec![0usize; total];
        for (g, &rm) in order.iter().enumerate() {
            graded_of_rowmajor[rm] = g;
        }
        let index_order = order.iter().map(|&rm| index_order[rm].clone()).collect();
        Ok(BasisTruncation {
            dim,
            per_axis,
            index_order,
            rowmajor_of_graded,
            graded_of_rowmajor,
            total,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Multi-index of basis element `g` in graded order.
    pub fn multi_index(&self, g: usize) -> &MultiIndex {
        &self.index_order[g]
    }

    pub fn index_order(&self) -> &[MultiIndex] {
        &self.index_order
    }

    /// Graded position of a multi-index, if inside the truncation.
    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        if k.len() != self.dim || k.0.iter().any(|&v| v >= self.per_axis) {
            return None;
        }
        let rm = self.rowmajor_index(k);
        Some(self.graded_of_rowmajor[rm])
    }

    fn rowmajor_index(&self, k: &MultiIndex) -> usize {
        let mut idx = 0usize;
        for &v in &k.0 {
            idx = idx * self.per_axis + v;
        }
        idx
    }

    fn rowmajor_of_graded(&self, g: usize) -> usize {
        self.rowmajor_of_graded[g]
    }

    #[allow(dead_code)]
    fn graded_of_rowmajor(&self, rm: usize) -> usize {
        self.graded_of_rowmajor[rm]
    }
}

/// Which single-axis ladder to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LadderKind {
    /// Multiplication by x.
    Position,
    /// D = -i d/dx.
    Derivative,
}

/// One ladder application along `axis` on a row-major coefficient tensor.
/// Couplings that would leave the truncation are dropped.
///
/// With f = sum_k c_k h_k:
///   (x f)_j = sqrt((j+1)/2) c_{j+1} + sqrt(j/2) c_{j-1}
///   (d/dx f)_j = sqrt((j+1)/2) c_{j+1} - sqrt(j/2) c_{j-1}
/// and D = -i d/dx.
fn ladder_once_rowmajor(
    kind: LadderKind,
    axis: usize,
    dim: usize,
    per_axis: usize,
    src: &[Complex64],
) -> Vec<Complex64> {
    let stride: usize = per_axis.pow((dim - 1 - axis) as u32);
    let mut out = vec![Complex64::ZERO; src.len()];
    for idx in 0..src.len() {
        let digit = (idx / stride) % per_axis;
        let up = if digit + 1 < per_axis {
            (((digit + 1) as f64) / 2.0).sqrt() * src[idx + stride]
        } else {
            Complex64::ZERO
        };
        let down = if digit > 0 {
            ((digit as f64) / 2.0).sqrt() * src[idx - stride]
        } else {
            Complex64::ZERO
        };
        out[idx] = match kind {
            LadderKind::Position => up + down,
            LadderKind::Derivative => Complex64::new(0.0, -1.0) * (up - down),
        };
    }
    out
}

/// Apply d/dx (not D) `times` along an axis; used by the seminorm code.
fn partial_once_rowmajor(
    axis: usize,
    dim: usize,
    per_axis: usize,
    src: &[Complex64],
) -> Vec<Complex64> {
    let stride: usize = per_axis.pow((dim - 1 - axis) as u32);
    let mut out = vec![Complex64::ZERO; src.len()];
    for idx in 0..src.len() {
        let digit = (idx / stride) % per_axis;
        let up = if digit + 1 < per_axis {
            (((digit + 1) as f64) / 2.0).sqrt() * src[idx + stride]
        } else {
            Complex64::ZERO
        };
        let down = if digit > 0 {
            ((digit as f64) / 2.0).sqrt() * src[idx - stride]
        } else {
            Complex64::ZERO
        };
        out[idx] = up - down;
    }
    out
}

/// Apply a full operator term x^beta D^alpha (derivatives first) on a
/// row-major tensor.
fn apply_term_rowmajor(
    beta: &MultiIndex,
    alpha: &MultiIndex,
    dim: usize,
    per_axis: usize,
    src: &[Complex64],
) -> Vec<Complex64> {
    let mut v = src.to_vec();
    for axis in 0..dim {
        for _ in 0..alpha.0[axis] {
            v = ladder_once_rowmajor(LadderKind::Derivative, axis, dim, per_axis, &v);
        }
    }
    for axis in 0..dim {
        for _ in 0..beta.0[axis] {
            v = ladder_once_rowmajor(LadderKind::Position, axis, dim, per_axis, &v);
        }
    }
    v
}

fn apply_operator_rowmajor(
    op: &ShubinOperator,
    dim: usize,
    per_axis: usize,
    src: &[Complex64],
) -> Vec<Complex64> {
    let mut acc = vec![Complex64::ZERO; src.len()];
    for (beta, alpha, c) in op.terms() {
        let v = apply_term_rowmajor(beta, alpha, dim, per_axis, src);
        for (a, b) in acc.iter_mut().zip(v) {
            *a += c * b;
        }
    }
    acc
}

/// Apply x^beta (d/dx)^alpha on a graded coefficient vector over `trunc`.
/// Exact as long as the support plus |alpha| + |beta| stays inside the
/// truncation.
pub fn apply_xbeta_partial_alpha(
    coeffs: &[Complex64],
    alpha: &MultiIndex,
    beta: &MultiIndex,
    trunc: &BasisTruncation,
) -> Result<Vec<Complex64>> {
    if coeffs.len() != trunc.total() {
        return Err(Error::invalid_argument(format!(
            "coefficient length {} does not match truncation {}",
            coeffs.len(),
            trunc.total()
        )));
    }
    if alpha.len() != trunc.dim() || beta.len() != trunc.dim() {
        return Err(Error::invalid_argument(
            "multi-index dimension mismatch".to_string(),
        ));
    }
    let mut rm = vec![Complex64::ZERO; trunc.total()];
    for g in 0..trunc.total() {
        rm[trunc.rowmajor_of_graded(g)] = coeffs[g];
    }
    for axis in 0..trunc.dim() {
        for _ in 0..alpha.0[axis] {
            rm = partial_once_rowmajor(axis, trunc.dim(), trunc.per_axis(), &rm);
        }
    }
    for axis in 0..trunc.dim() {
        for _ in 0..beta.0[axis] {
            rm = ladder_once_rowmajor(
                LadderKind::Position,
                axis,
                trunc.dim(),
                trunc.per_axis(),
                &rm,
            );
        }
    }
    Ok((0..trunc.total())
        .map(|g| rm[trunc.rowmajor_of_graded(g)])
        .collect())
}

/// A truncated operator matrix, kept together with the padded assembly it
/// was cropped from so that repeated applications can stay exact.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub trunc: BasisTruncation,
    pub entries: CMat,
    pub pad: usize,
    padded_trunc: BasisTruncation,
    padded: CMat,
    crop: Vec<usize>,
}

impl OperatorMatrix {
    pub fn total(&self) -> usize {
        self.trunc.total()
    }

    pub fn padded_trunc(&self) -> &BasisTruncation {
        &self.padded_trunc
    }

    /// Apply the padded matrix to a padded graded vector.
    pub fn apply_padded(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.padded.mul_vec(v)
    }

    /// Embed a truncated graded vector into the padded basis.
    pub fn embed(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::ZERO; self.padded_trunc.total()];
        for (t, &p) in self.crop.iter().enumerate() {
            out[p] = v[t];
        }
        out
    }

    /// Restrict a padded graded vector back to the truncation.
    pub fn restrict(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.crop.iter().map(|&p| v[p]).collect()
    }

    /// Build directly from entries (pad 0); used for synthetic matrices.
    pub fn from_entries(trunc: BasisTruncation, entries: CMat) -> Result<Self> {
        if entries.rows() != trunc.total() || entries.cols() != trunc.total() {
            return Err(Error::invalid_argument(
                "entry matrix does not match truncation".to_string(),
            ));
        }
        let crop = (0..trunc.total()).collect();
        Ok(OperatorMatrix {
            padded_trunc: trunc.clone(),
            padded: entries.clone(),
            trunc,
            entries,
            pad: 0,
            crop,
        })
    }
}

/// Matrix of a single ladder along `axis` at the bare truncation (pad 0);
/// couplings beyond the top basis element are dropped.
pub fn ladder_matrix(
    axis: usize,
    kind: LadderKind,
    trunc: &BasisTruncation,
) -> Result<OperatorMatrix> {
    if axis >= trunc.dim() {
        return Err(Error::invalid_argument(format!(
            "axis {axis} out of range for dimension {}",
            trunc.dim()
        )));
    }
    let total = trunc.total();
    let columns: Vec<Vec<Complex64>> = par::map_indexed(total, |g| {
        let mut unit = vec![Complex64::ZERO; total];
        unit[trunc.rowmajor_of_graded(g)] = Complex64::ONE;
        let out = ladder_once_rowmajor(kind, axis, trunc.dim(), trunc.per_axis(), &unit);
        (0..total)
            .map(|g2| out[trunc.rowmajor_of_graded(g2)])
            .collect()
    });
    let entries = CMat::from_columns(total, &columns);
    OperatorMatrix::from_entries(trunc.clone(), entries)
}

/// Matrix of the summed position operator x_1 + ... + x_n at the bare
/// truncation; used to canonicalize degenerate eigenspaces.
pub fn position_sum_matrix(trunc: &BasisTruncation) -> CMat {
    let total = trunc.total();
    let columns: Vec<Vec<Complex64>> = par::map_indexed(total, |g| {
        let mut unit = vec![Complex64::ZERO; total];
        unit[trunc.rowmajor_of_graded(g)] = Complex64::ONE;
        let mut acc = vec![Complex64::ZERO; total];
        for axis in 0..trunc.dim() {
            let v = ladder_once_rowmajor(
                LadderKind::Position,
                axis,
                trunc.dim(),
                trunc.per_axis(),
                &unit,
            );
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b;
            }
        }
        (0..total)
            .map(|g2| acc[trunc.rowmajor_of_graded(g2)])
            .collect()
    });
    CMat::from_columns(total, &columns)
}

/// Assemble the matrix of an operator at padded per-axis size
/// `per_axis + pad` and crop to the truncation. Padding at least the
/// operator order keeps the retained block free of boundary contamination.
pub fn operator_matrix_padded(
    p: &ShubinOperator,
    trunc: &BasisTruncation,
    pad: usize,
) -> Result<OperatorMatrix> {
    if p.dim() != trunc.dim() {
        return Err(Error::invalid_argument(format!(
            "operator dimension {} does not match truncation dimension {}",
            p.dim(),
            trunc.dim()
        )));
    }
    if pad < p.order() {
        return Err(Error::invalid_argument(format!(
            "padding {pad} is below the operator order {}",
            p.order()
        )));
    }
    let padded_trunc = BasisTruncation::new(trunc.dim(), trunc.per_axis() + pad)?;
    let ptotal = padded_trunc.total();
    let columns: Vec<Vec<Complex64>> = par::map_indexed(ptotal, |g| {
        let mut unit = vec![Complex64::ZERO; ptotal];
        unit[padded_trunc.rowmajor_of_graded(g)] = Complex64::ONE;
        let out = apply_operator_rowmajor(p, padded_trunc.dim(), padded_trunc.per_axis(), &unit);
        (0..ptotal)
            .map(|g2| out[padded_trunc.rowmajor_of_graded(g2)])
            .collect()
    });
    let padded = CMat::from_columns(ptotal, &columns);

    let crop: Vec<usize> = (0..trunc.total())
        .map(|t| {
            padded_trunc
                .position(trunc.multi_index(t))
                .expect("truncation embeds in its padding")
        })
        .collect();
    let total = trunc.total();
    let mut entries = CMat::zeros(total, total);
    for (r, &pr) in crop.iter().enumerate() {
        for (c, &pc) in crop.iter().enumerate() {
            entries[(r, c)] = padded[(pr, pc)];
        }
    }
    Ok(OperatorMatrix {
        trunc: trunc.clone(),
        entries,
        pad,
        padded_trunc,
        padded,
        crop,
    })
}

/// Matrix assembly with the default padding (the operator order).
pub fn operator_matrix(p: &ShubinOperator, trunc: &BasisTruncation) -> Result<OperatorMatrix> {
    operator_matrix_padded(p, trunc, p.order())
}

/// L^2-normalized Hermite function h_k(x) by the stable normalized
/// three-term recurrence seeded at h_0 = pi^{-1/4} e^{-x^2/2}. Underflow
/// of the seed propagates as zero.
pub fn hermite_eval(k: usize, x: f64) -> Result<f64> {
    if k > MAX_HERMITE_DEGREE {
        return Err(Error::invalid_argument(format!(
            "hermite degree {k} exceeds {MAX_HERMITE_DEGREE}"
        )));
    }
    let mut prev = 0.0f64;
    let mut cur = (std::f64::consts::PI).powf(-0.25) * (-0.5 * x * x).exp();
    for j in 0..k {
        let next =
            x * (2.0 / (j + 1) as f64).sqrt() * cur - ((j as f64) / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// h_0(x)..h_max(x) in one pass.
pub fn hermite_eval_batch(max_degree: usize, x: f64) -> Result<Vec<f64>> {
    if max_degree > MAX_HERMITE_DEGREE {
        return Err(Error::invalid_argument(format!(
            "hermite degree {max_degree} exceeds {MAX_HERMITE_DEGREE}"
        )));
    }
    let mut out = Vec::with_capacity(max_degree + 1);
    let mut prev = 0.0f64;
    let mut cur = (std::f64::consts::PI).powf(-0.25) * (-0.5 * x * x).exp();
    out.push(cur);
    for j in 0..max_degree {
        let next =
            x * (2.0 / (j + 1) as f64).sqrt() * cur - ((j as f64) / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(cur);
    }
    Ok(out)
}

/// Tensor quadrature grid in row-major order (axis 0 slowest).
pub fn quadrature_grid(dim: usize, rule: &GaussHermite) -> Vec<Vec<f64>> {
    let q = rule.nodes.len();
    let total = q.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut pt = vec![0.0; dim];
            for axis in (0..dim).rev() {
                pt[axis] = rule.nodes[idx % q];
                idx /= q;
            }
            pt
        })
        .collect()
}

fn transform_from_grid_values(
    mut values: Vec<Complex64>,
    trunc: &BasisTruncation,
    rule: &GaussHermite,
) -> Result<Vec<Complex64>> {
    let dim = trunc.dim();
    let n = trunc.per_axis();
    let q = rule.nodes.len();

    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidInput(
            "non-finite sample in transform input".to_string(),
        ));
    }

    // fold the Gaussian kernel into the sample values once per point
    for (idx, v) in values.iter_mut().enumerate() {
        let mut rest = idx;
        let mut w = 1.0f64;
        for _ in 0..dim {
            w *= rule.folded_weights[rest % q];
            rest /= q;
        }
        *v *= w;
    }

    // h_k(x_i) table
    let mut hmat = vec![0.0f64; n * q];
    for (i, &x) in rule.nodes.iter().enumerate() {
        let col = hermite_eval_batch(n - 1, x)?;
        for k in 0..n {
            hmat[k * q + i] = col[k];
        }
    }

    // contract the last axis, then roll the new coefficient axis to the
    // front; after `dim` passes the layout is row-major in k
    let mut data = values;
    for pass in 0..dim {
        let lead = n.pow(pass as u32) * q.pow((dim - 1 - pass) as u32);
        let contracted = par::map_indexed(n, |k| {
            let hrow = &hmat[k * q..(k + 1) * q];
            let mut out = vec![Complex64::ZERO; lead];
            for (l, slot) in out.iter_mut().enumerate() {
                let base = l * q;
                let mut acc = Complex64::ZERO;
                for i in 0..q {
                    acc += data[base + i] * hrow[i];
                }
                *slot = acc;
            }
            out
        });
        let mut next = Vec::with_capacity(n * lead);
        for block in contracted {
            next.extend(block);
        }
        data = next;
    }

    Ok((0..trunc.total())
        .map(|g| data[trunc.rowmajor_of_graded(g)])
        .collect())
}

/// Hermite coefficients c_k = integral of f h_k over R^n by tensor
/// Gauss-Hermite quadrature, returned in graded order.
pub fn hermite_transform<F>(
    f: F,
    trunc: &BasisTruncation,
    quad_order: usize,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    if quad_order < trunc.per_axis() + 8 {
        return Err(Error::invalid_argument(format!(
            "quadrature order {quad_order} is below per-axis size {} + 8",
            trunc.per_axis()
        )));
    }
    let rule = gauss_hermite(quad_order)?;
    let grid = quadrature_grid(trunc.dim(), &rule);
    let values = par::map_indexed(grid.len(), |i| f(&grid[i]));
    transform_from_grid_values(values, trunc, &rule)
}

/// Same transform from samples given on the tensor quadrature grid in
/// row-major order (see `quadrature_grid`).
pub fn hermite_transform_sampled(
    values: &[Complex64],
    trunc: &BasisTruncation,
    quad_order: usize,
) -> Result<Vec<Complex64>> {
    if quad_order < trunc.per_axis() + 8 {
        return Err(Error::invalid_argument(format!(
            "quadrature order {quad_order} is below per-axis size {} + 8",
            trunc.per_axis()
        )));
    }
    let rule = gauss_hermite(quad_order)?;
    let expect = quad_order.pow(trunc.dim() as u32);
    if values.len() != expect {
        return Err(Error::InvalidInput(format!(
            "expected {expect} grid samples, got {}",
            values.len()
        )));
    }
    transform_from_grid_values(values.to_vec(), trunc, &rule)
}

/// Pointwise partial sums sum_k c_k h_k(x) at the given points.
pub fn synthesize(
    coeffs: &[Complex64],
    trunc: &BasisTruncation,
    points: &[Vec<f64>],
) -> Result<Vec<Complex64>> {
    if coeffs.len() != trunc.total() {
        return Err(Error::invalid_argument(format!(
            "coefficient length {} does not match truncation {}",
            coeffs.len(),
            trunc.total()
        )));
    }
    let values = par::map_indexed(points.len(), |pi| {
        let pt = &points[pi];
        let tables: Vec<Vec<f64>> = (0..trunc.dim())
            .map(|axis| {
                hermite_eval_batch(trunc.per_axis() - 1, pt[axis]).expect("degree in range")
            })
            .collect();
        let mut acc = Complex64::ZERO;
        for (g, c) in coeffs.iter().enumerate() {
            if *c == Complex64::ZERO {
                continue;
            }
            let k = trunc.multi_index(g);
            let mut basis = 1.0;
            for axis in 0..trunc.dim() {
                basis *= tables[axis][k.0[axis]];
            }
            acc += c * basis;
        }
        acc
    });
    Ok(values)
}
