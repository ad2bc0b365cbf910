#![allow(dead_code)]

//! Test oracle: exact symbolic calculus on functions of the form
//! q(x) e^{-|x|^2/2} with polynomial q. Multiplication by x, partial
//! derivatives, pointwise evaluation, and L^2 inner products (via exact
//! Gaussian moments) are all closed-form here, giving an independent
//! check on the operator algebra and the ladder/matrix code paths.

use num_complex::Complex64;
use shubin_spectra::operators::ShubinOperator;

/// One-variable q(x) e^{-x^2/2} with complex polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPoly {
    /// coefficients of q, degree = index
    pub coeffs: Vec<Complex64>,
}

impl GaussPoly {
    pub fn constant(c: Complex64) -> Self {
        GaussPoly { coeffs: vec![c] }
    }

    /// Normalized Hermite function h_k as a GaussPoly, by the same
    /// normalized recurrence acting on polynomial parts.
    pub fn hermite(k: usize) -> Self {
        let mut prev = GaussPoly { coeffs: vec![] };
        let mut cur = GaussPoly::constant(Complex64::new(std::f64::consts::PI.powf(-0.25), 0.0));
        for j in 0..k {
            let up = cur
                .mul_x()
                .scale(Complex64::new((2.0 / (j + 1) as f64).sqrt(), 0.0));
            let down = prev.scale(Complex64::new((j as f64 / (j + 1) as f64).sqrt(), 0.0));
            let next = up.sub(&down);
            prev = cur;
            cur = next;
        }
        cur
    }

    pub fn scale(&self, c: Complex64) -> Self {
        GaussPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &GaussPoly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::ZERO; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        GaussPoly { coeffs: out }
    }

    pub fn sub(&self, other: &GaussPoly) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// x * (q e^{-x^2/2})
    pub fn mul_x(&self) -> Self {
        let mut out = vec![Complex64::ZERO; self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] = *c;
        }
        GaussPoly { coeffs: out }
    }

    /// d/dx (q e^{-x^2/2}) = (q' - x q) e^{-x^2/2}
    pub fn diff(&self) -> Self {
        let mut dq = vec![Complex64::ZERO; self.coeffs.len().saturating_sub(1).max(1)];
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            dq[i - 1] = c * i as f64;
        }
        let dq = GaussPoly { coeffs: dq };
        dq.sub(&self.mul_x())
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc * (-0.5 * x * x).exp()
    }

    /// <self, other> = integral of q1 conj(q2) e^{-x^2} dx via exact
    /// Gaussian moments.
    pub fn inner(&self, other: &GaussPoly) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                acc += a * b.conj() * gaussian_moment(i + j);
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
}

/// integral of x^k e^{-x^2} dx; zero for odd k, sqrt(pi) (k-1)!!/2^{k/2}
/// for even k.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut v = std::f64::consts::PI.sqrt();
    let mut m = 1.0f64;
    let mut denom = 1.0f64;
    let half = k / 2;
    for i in 0..half {
        m *= (2 * i + 1) as f64;
        denom *= 2.0;
    }
    v *= m / denom;
    v
}

/// Product function over axes: f(x) = prod_j g_j(x_j).
#[derive(Debug, Clone)]
pub struct GaussProd {
    pub axes: Vec<GaussPoly>,
}

impl GaussProd {
    pub fn hermite(k: &[usize]) -> Self {
        GaussProd {
            axes: k.iter().map(|&kj| GaussPoly::hermite(kj)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.axes.iter().zip(x).map(|(g, &xi)| g.eval(xi)).product()
    }

    pub fn inner(&self, other: &GaussProd) -> Complex64 {
        self.axes
            .iter()
            .zip(&other.axes)
            .map(|(a, b)| a.inner(b))
            .product()
    }
}

/// Sum of product functions; closed under every operator term.
#[derive(Debug, Clone)]
pub struct GaussSum {
    pub terms: Vec<(Complex64, GaussProd)>,
}

impl GaussSum {
    pub fn single(p: GaussProd) -> Self {
        GaussSum {
            terms: vec![(Complex64::ONE, p)],
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.terms.iter().map(|(c, p)| c * p.eval(x)).sum()
    }

    pub fn inner(&self, other: &GaussSum) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (c1, p1) in &self.terms {
            for (c2, p2) in &other.terms {
                acc += c1 * c2.conj() * p1.inner(p2);
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// Apply a full operator: each term x^beta D^alpha acts per axis,
    /// D = -i d/dx.
    pub fn apply(&self, op: &ShubinOperator) -> GaussSum {
        let mut out = Vec::new();
        for (beta, alpha, c) in op.terms() {
            for (c0, prod) in &self.terms {
                let mut axes = Vec::with_capacity(prod.axes.len());
                let mut coef = c0 * c;
                for (axis, g) in prod.axes.iter().enumerate() {
                    let mut cur = g.clone();
                    for _ in 0..alpha.0[axis] {
                        // D = -i d/dx
                        cur = cur.diff().scale(Complex64::new(0.0, -1.0));
                    }
                    for _ in 0..beta.0[axis] {
                        cur = cur.mul_x();
                    }
                    axes.push(cur);
                }
                let _ = &mut coef;
                out.push((coef, GaussProd { axes }));
            }
        }
        GaussSum { terms: out }
    }
}

#[allow(dead_code)]
pub fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}
