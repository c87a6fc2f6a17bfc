//! Gauss–Legendre and Gauss–Hermite rules.
//!
//! The Hermite rule is built for large node counts (thousands), so both the
//! normalized Hermite functions and the weights are carried with a separate
//! logarithmic scale.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::spectral::tridiagonal_eigenvalues;
use crate::{Error, Result};

/// A number stored as `mantissa · exp(ln_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    /// `ln |value|`, `-inf` for zero.
    pub fn ln_abs(self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }
}

const RESCALE: f64 = 1e100;

/// Normalized Hermite function `ψ_n(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} H_n(x)`.
///
/// Uses the two-term recurrence
/// `ψ_{j+1} = x √(2/(j+1)) ψ_j − √(j/(j+1)) ψ_{j−1}` with rescaling, so
/// no raw Hermite polynomial is ever formed.
pub fn hermite_function_scaled(n: usize, x: f64) -> Scaled {
    let mut ln_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..n {
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    Scaled {
        mantissa: cur,
        ln_scale,
    }
}

pub fn hermite_function(n: usize, x: f64) -> f64 {
    hermite_function_scaled(n, x).value()
}

/// `ψ_{n-1}(x)`, `ψ_n(x)` on a common scale, plus `ln Σ_{j<n} ψ_j(x)²`.
fn hermite_tail(n: usize, x: f64) -> (f64, f64, f64, f64) {
    let mut ln_scale = -0.5 * x * x - 0.25 * PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum_sq = 0.0;
    for j in 0..n {
        sum_sq += cur * cur;
        let jf = j as f64;
        let next = x * (2.0 / (jf + 1.0)).sqrt() * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            sum_sq /= RESCALE * RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    (prev, cur, ln_scale, sum_sq.ln() + 2.0 * ln_scale)
}

/// Gauss–Hermite rule for `∫ e^{-x²} f(x) dx`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    /// `ln(w_i e^{x_i²}) = -ln Σ_{j<n} ψ_j(x_i)²`.
    ln_scaled_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Quadrature("Gauss-Hermite rule needs at least one node".into()));
        }
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n).map(|j| (j as f64 / 2.0).sqrt()).collect();
        let mut nodes = tridiagonal_eigenvalues(&diag, &off)?;
        nodes.sort_by(f64::total_cmp);

        let nf = n as f64;
        let mut ln_scaled_weights = Vec::with_capacity(n);
        for x in nodes.iter_mut() {
            // Newton polish on ψ_n; the ratio ψ_n/ψ_n' is scale free.
            for _ in 0..3 {
                let (pm1, p, _, _) = hermite_tail(n, *x);
                let dp = (2.0 * nf).sqrt() * pm1 - *x * p;
                if dp != 0.0 {
                    *x -= p / dp;
                }
            }
            let (_, _, _, ln_sum) = hermite_tail(n, *x);
            ln_scaled_weights.push(-ln_sum);
        }
        Ok(Self {
            nodes,
            ln_scaled_weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn ln_scaled_weights(&self) -> &[f64] {
        &self.ln_scaled_weights
    }

    /// Standard weights `w_i` for the `e^{-x²}` measure (may underflow at the edges).
    pub fn weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.ln_scaled_weights)
            .map(|(x, lw)| (lw - x * x).exp())
            .collect()
    }

    /// `∫ e^{-x²} f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights())
            .map(|(&x, w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// The 16-point rule used by the Bessel quadrature, built once.
    pub fn order16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}
