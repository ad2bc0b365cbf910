//! Exact symbolic calculus for differential operators with polynomial
//! coefficients, written in the normal-ordered form
//!
//! ```text
//! P = sum_{|alpha|+|beta| <= m} c_{alpha beta} x^beta D^alpha,
//! D = -i d/dx (componentwise).
//! ```
//!
//! Canonical form keeps every multiplication to the left of every
//! differentiation; composition re-normalizes products with the single
//! commutation D_j x_j = x_j D_j - i applied one degree at a time.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ITERATE_CAP: usize = 16;

/// Verdict threshold for the global-ellipticity test. The underlying
/// condition is open (no quantitative margin exists), so the cutoff is an
/// artifact choice and is echoed in reports.
pub const ELLIPTICITY_THRESHOLD: f64 = 1e-9;

/// A multi-index in n variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, axis: usize) -> Self {
        let mut v = vec![0; n];
        v[axis] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |mu| = sum of entries.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// mu! as f64 (entries stay small at desk scale).
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k).map(|i| i as f64).product::<f64>())
            .product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// All multi-indices of length n with |mu| = total, lexicographically sorted.
pub fn multi_indices_with_sum(n: usize, total: usize) -> Vec<MultiIndex> {
    fn rec(n: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if n == 1 {
            prefix.push(total);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for head in 0..=total {
            prefix.push(head);
            rec(n - 1, total - head, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, total, &mut Vec::new(), &mut out);
    out
}

type TermKey = (MultiIndex, MultiIndex); // (beta, alpha)

/// Differential operator with polynomial coefficients in canonical
/// normal-ordered form. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ShubinOperator {
    dim: usize,
    terms: BTreeMap<TermKey, Complex64>,
    order: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermJson {
    beta: Vec<usize>,
    alpha: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl ShubinOperator {
    pub fn new(
        dim: usize,
        raw: impl IntoIterator<Item = (MultiIndex, MultiIndex, Complex64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid_argument("dimension must be positive"));
        }
        let mut terms = BTreeMap::new();
        for (beta, alpha, c) in raw {
            if beta.len() != dim || alpha.len() != dim {
                return Err(Error::invalid_argument(format!(
                    "multi-index length mismatch: dim = {dim}, beta = {:?}, alpha = {:?}",
                    beta.0, alpha.0
                )));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::invalid_argument("non-finite coefficient"));
            }
            *terms.entry((beta, alpha)).or_insert(Complex64::ZERO) += c;
        }
        terms.retain(|_, c| *c != Complex64::ZERO);
        let order = Self::max_order(&terms);
        Ok(ShubinOperator { dim, terms, order })
    }

    fn from_map(dim: usize, mut terms: BTreeMap<TermKey, Complex64>) -> Self {
        terms.retain(|_, c| *c != Complex64::ZERO);
        let order = Self::max_order(&terms);
        ShubinOperator { dim, terms, order }
    }

    fn max_order(terms: &BTreeMap<TermKey, Complex64>) -> usize {
        terms
            .keys()
            .map(|(b, a)| b.order() + a.order())
            .max()
            .unwrap_or(0)
    }

    pub fn identity(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (MultiIndex::zeros(dim), MultiIndex::zeros(dim)),
            Complex64::ONE,
        );
        Self::from_map(dim, terms)
    }

    /// Multiplication by x_axis.
    pub fn position(dim: usize, axis: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (MultiIndex::unit(dim, axis), MultiIndex::zeros(dim)),
            Complex64::ONE,
        );
        Self::from_map(dim, terms)
    }

    /// D_axis = -i d/dx_axis.
    pub fn derivative(dim: usize, axis: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            (MultiIndex::zeros(dim), MultiIndex::unit(dim, axis)),
            Complex64::ONE,
        );
        Self::from_map(dim, terms)
    }

    /// sum_j D_j^2 + x_j^2 (eigenvalues 2|k| + n on the Hermite basis).
    pub fn harmonic_oscillator(dim: usize) -> Self {
        let mut terms = BTreeMap::new();
        for axis in 0..dim {
            let mut two = vec![0; dim];
            two[axis] = 2;
            terms.insert(
                (MultiIndex::zeros(dim), MultiIndex(two.clone())),
                Complex64::ONE,
            );
            terms.insert((MultiIndex(two), MultiIndex::zeros(dim)), Complex64::ONE);
        }
        Self::from_map(dim, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex64)> {
        self.terms.iter().map(|((b, a), c)| (b, a, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, beta: &MultiIndex, alpha: &MultiIndex) -> Complex64 {
        self.terms
            .get(&(beta.clone(), alpha.clone()))
            .copied()
            .unwrap_or(Complex64::ZERO)
    }

    pub fn max_coefficient_modulus(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Self::from_map(self.dim, terms)
    }

    pub fn add(&self, other: &ShubinOperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::invalid_argument("dimension mismatch in add"));
        }
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            *terms.entry(k.clone()).or_insert(Complex64::ZERO) += v;
        }
        Ok(Self::from_map(self.dim, terms))
    }

    pub fn sub(&self, other: &ShubinOperator) -> Result<Self> {
        self.add(&other.scale(-Complex64::ONE))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let parsed: OperatorJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("operator JSON: {e}")))?;
        ShubinOperator::new(
            parsed.dim,
            parsed.terms.into_iter().map(|t| {
                (
                    MultiIndex(t.beta),
                    MultiIndex(t.alpha),
                    Complex64::new(t.re, t.im),
                )
            }),
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let terms: Vec<TermJson> = self
            .terms
            .iter()
            .map(|((b, a), c)| TermJson {
                beta: b.0.clone(),
                alpha: a.0.clone(),
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_value(OperatorJson {
            dim: self.dim,
            terms,
        })
        .expect("operator serialization cannot fail")
    }
}

/// Normal form of D^a x^d in one variable as sum_{(s,t)} c x^s D^t.
/// Built by pulling one D at a time through the x block; each pull uses
/// D x^s = x^s D - i s x^{s-1}, i.e. the single commutation applied s times.
fn normal_order_1d(a: usize, d: usize) -> Vec<(usize, usize, Complex64)> {
    let mut cur: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
    cur.insert((d, 0), Complex64::ONE);
    for _ in 0..a {
        let mut next: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (&(s, t), &c) in &cur {
            *next.entry((s, t + 1)).or_insert(Complex64::ZERO) += c;
            if s > 0 {
                *next.entry((s - 1, t)).or_insert(Complex64::ZERO) +=
                    c * Complex64::new(0.0, -(s as f64));
            }
        }
        cur = next;
    }
    cur.into_iter().map(|((s, t), c)| (s, t, c)).collect()
}

/// Normal form of D^alpha x^delta across all axes (axes commute).
fn normal_order(
    alpha: &MultiIndex,
    delta: &MultiIndex,
) -> Vec<(MultiIndex, MultiIndex, Complex64)> {
    let n = alpha.len();
    let mut acc: Vec<(Vec<usize>, Vec<usize>, Complex64)> =
        vec![(Vec::new(), Vec::new(), Complex64::ONE)];
    for j in 0..n {
        let table = normal_order_1d(alpha.0[j], delta.0[j]);
        let mut next = Vec::with_capacity(acc.len() * table.len());
        for (xs, ds, c) in &acc {
            for &(s, t, c1) in &table {
                let mut xs2 = xs.clone();
                let mut ds2 = ds.clone();
                xs2.push(s);
                ds2.push(t);
                next.push((xs2, ds2, c * c1));
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|(xs, ds, c)| (MultiIndex(xs), MultiIndex(ds), c))
        .collect()
}

/// Operator composition f -> p(q(f)) in canonical form.
pub fn compose(p: &ShubinOperator, q: &ShubinOperator) -> Result<ShubinOperator> {
    if p.dim != q.dim {
        return Err(Error::invalid_argument(format!(
            "dimension mismatch in compose: {} vs {}",
            p.dim, q.dim
        )));
    }
    let mut terms: BTreeMap<TermKey, Complex64> = BTreeMap::new();
    for ((b1, a1), c1) in &p.terms {
        for ((b2, a2), c2) in &q.terms {
            let c = c1 * c2;
            // x^{b1} [D^{a1} x^{b2}] D^{a2}
            for (s, t, cc) in normal_order(a1, b2) {
                let beta = b1.add(&s);
                let alpha = t.add(a2);
                *terms.entry((beta, alpha)).or_insert(Complex64::ZERO) += c * cc;
            }
        }
    }
    Ok(ShubinOperator::from_map(p.dim, terms))
}

/// Formal L^2 adjoint. D is formally self-adjoint, so each term
/// c x^beta D^alpha maps to conj(c) times the normal ordering of
/// D^alpha x^beta.
pub fn adjoint(p: &ShubinOperator) -> ShubinOperator {
    let mut terms: BTreeMap<TermKey, Complex64> = BTreeMap::new();
    for ((beta, alpha), c) in &p.terms {
        for (s, t, cc) in normal_order(alpha, beta) {
            *terms.entry((s, t)).or_insert(Complex64::ZERO) += c.conj() * cc;
        }
    }
    ShubinOperator::from_map(p.dim, terms)
}

/// Symbolic normality check: computes P P* - P* P and reports the largest
/// coefficient modulus of the difference.
pub fn is_normal(p: &ShubinOperator, tol: f64) -> Result<(bool, f64)> {
    let star = adjoint(p);
    let lhs = compose(p, &star)?;
    let rhs = compose(&star, p)?;
    let discrepancy = lhs.sub(&rhs)?.max_coefficient_modulus();
    Ok((discrepancy <= tol, discrepancy))
}

/// P^k by repeated composition; P^0 is the identity.
pub fn iterate(p: &ShubinOperator, k: usize, cap: usize) -> Result<ShubinOperator> {
    if k > cap {
        return Err(Error::ResourceLimit(format!(
            "operator power {k} exceeds cap {cap}"
        )));
    }
    let mut acc = ShubinOperator::identity(p.dim);
    for _ in 0..k {
        acc = compose(&acc, p)?;
    }
    Ok(acc)
}

/// Principal symbol sum_{|alpha|+|beta| = m} c x^beta xi^alpha at (x, xi).
pub fn principal_symbol(p: &ShubinOperator, x: &[f64], xi: &[f64]) -> Complex64 {
    let m = p.order;
    let mut acc = Complex64::ZERO;
    for ((beta, alpha), c) in &p.terms {
        if beta.order() + alpha.order() != m {
            continue;
        }
        let mut v = *c;
        for j in 0..p.dim {
            v *= x[j].powi(beta.0[j] as i32) * xi[j].powi(alpha.0[j] as i32);
        }
        acc += v;
    }
    acc
}

/// Gradient of |p_m|^2 with respect to (x, xi) stacked as 2n reals.
fn symbol_sq_gradient(p: &ShubinOperator, z: &[f64]) -> Vec<f64> {
    let n = p.dim;
    let (x, xi) = z.split_at(n);
    let m = p.order;
    let val = principal_symbol(p, x, xi);
    let mut grad = vec![0.0; 2 * n];
    for ((beta, alpha), c) in &p.terms {
        if beta.order() + alpha.order() != m {
            continue;
        }
        for l in 0..2 * n {
            let (pow, axis, on_x) = if l < n {
                (beta.0[l], l, true)
            } else {
                (alpha.0[l - n], l - n, false)
            };
            if pow == 0 {
                continue;
            }
            let mut d = c * pow as f64;
            for j in 0..n {
                let bx = if on_x && j == axis {
                    beta.0[j] - 1
                } else {
                    beta.0[j]
                };
                let ax = if !on_x && j == axis {
                    alpha.0[j] - 1
                } else {
                    alpha.0[j]
                };
                d *= x[j].powi(bx as i32) * xi[j].powi(ax as i32);
            }
            // d/dz |sigma|^2 = 2 Re(conj(sigma) dsigma/dz)
            grad[l] += 2.0 * (val.conj() * d).re;
        }
    }
    grad
}

/// Deterministic splittable generator for sphere sampling.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_f64().max(1e-300);
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        (r * th.cos(), r * th.sin())
    }
}

fn unit_sphere_point(rng: &mut SplitMix64, dim: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(dim);
        while v.len() < dim {
            let (a, b) = rng.next_gaussian_pair();
            v.push(a);
            if v.len() < dim {
                v.push(b);
            }
        }
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for t in &mut v {
                *t /= norm;
            }
            return v;
        }
    }
}

/// Outcome of the global-ellipticity test.
#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    pub verdict: bool,
    /// Minimum of |p_m| on the unit sphere of phase space (after refinement).
    pub min_modulus: f64,
    pub argmin_x: Vec<f64>,
    pub argmin_xi: Vec<f64>,
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Samples |p_m| on the unit sphere of R^{2n} (fixed-seed deterministic
/// sampling), then refines around the minimizing sample with projected
/// gradient descent and step halving. Degree-m homogeneity makes the
/// sphere restriction sufficient.
pub fn ellipticity_test(
    p: &ShubinOperator,
    sphere_samples: usize,
    seed: u64,
) -> Result<EllipticityReport> {
    if p.order == 0 {
        return Err(Error::invalid_argument(
            "ellipticity test needs order m >= 1".to_string(),
        ));
    }
    if sphere_samples == 0 {
        return Err(Error::invalid_argument(
            "need at least one sphere sample".to_string(),
        ));
    }
    let dim2 = 2 * p.dim;
    let mut rng = SplitMix64(seed);
    let points: Vec<Vec<f64>> = (0..sphere_samples)
        .map(|_| unit_sphere_point(&mut rng, dim2))
        .collect();
    let values = crate::par::map_indexed(points.len(), |i| {
        let (x, xi) = points[i].split_at(p.dim);
        principal_symbol(p, x, xi).norm()
    });
    let mut best = 0usize;
    for i in 1..values.len() {
        if values[i] < values[best] {
            best = i;
        }
    }

    // local refinement: projected descent along the normalized tangential
    // gradient, growing the step on acceptance and halving on rejection
    // (plain gradient steps stall on flat zeros such as xi^2)
    let mut z = points[best].clone();
    let mut val = values[best];
    let mut step = 0.1;
    for _ in 0..200 {
        let mut g = symbol_sq_gradient(p, &z);
        let radial: f64 = g.iter().zip(&z).map(|(gi, zi)| gi * zi).sum();
        for (gi, zi) in g.iter_mut().zip(&z) {
            *gi -= radial * zi;
        }
        let gnorm = g.iter().map(|t| t * t).sum::<f64>().sqrt();
        if gnorm < 1e-300 || step < 1e-18 {
            break;
        }
        let mut cand: Vec<f64> = z
            .iter()
            .zip(&g)
            .map(|(zi, gi)| zi - step * gi / gnorm)
            .collect();
        let cn = cand.iter().map(|t| t * t).sum::<f64>().sqrt();
        for t in &mut cand {
            *t /= cn;
        }
        let (cx, cxi) = cand.split_at(p.dim);
        let cval = principal_symbol(p, cx, cxi).norm();
        if cval < val {
            z = cand;
            val = cval;
            step = (step * 1.2).min(0.3);
        } else {
            step *= 0.5;
        }
    }

    let (x, xi) = z.split_at(p.dim);
    Ok(EllipticityReport {
        verdict: val >= ELLIPTICITY_THRESHOLD,
        min_modulus: val,
        argmin_x: x.to_vec(),
        argmin_xi: xi.to_vec(),
        threshold: ELLIPTICITY_THRESHOLD,
        samples: sphere_samples,
        seed,
    })
}
