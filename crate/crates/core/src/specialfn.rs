//! Special-function kernels: generalized Laguerre polynomials, Bessel
//! functions of the first kind, factorial ratios, the `F` prefactor and the
//! `A_j` recurrence of the Bessel-series matrix-element expansion.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use crate::error::precondition;
use crate::quadrature::{GaussLegendre, Scaled};
use crate::{Error, Result};

/// Largest Bessel order accepted by [`bessel_j`].
pub const BESSEL_MAX_ORDER: u64 = 1_000_000;
/// Largest Bessel argument accepted by [`bessel_j`]; beyond this the phase
/// `x sin θ` cannot be formed to the 1e-12 absolute target.
pub const BESSEL_MAX_ARG: f64 = 1.0e4;

const RESCALE: f64 = 1e100;

/// Forward degree recurrence for `L_k^{(m)}(x)` at fixed `m` and `x`.
///
/// Yields `L_0, L_1, …` as [`Scaled`] values; the mantissa is renormalized
/// whenever it leaves `[-1e100, 1e100]`, so arbitrarily high degrees are
/// representable.
#[derive(Clone, Debug)]
pub struct LaguerreSweep {
    m: f64,
    x: f64,
    degree: usize,
    prev: f64,
    cur: f64,
    ln_scale: f64,
}

impl LaguerreSweep {
    pub fn new(m: usize, x: f64) -> Self {
        Self {
            m: m as f64,
            x,
            degree: 0,
            prev: 0.0,
            cur: 1.0,
            ln_scale: 0.0,
        }
    }

    /// Current degree `k` of [`Self::value`].
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> Scaled {
        Scaled {
            mantissa: self.cur,
            ln_scale: self.ln_scale,
        }
    }

    pub fn advance(&mut self) {
        let j = self.degree as f64;
        let next = ((2.0 * j + 1.0 + self.m - self.x) * self.cur - (j + self.m) * self.prev) / (j + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.degree += 1;
        if self.cur.abs() > RESCALE {
            self.cur /= RESCALE;
            self.prev /= RESCALE;
            self.ln_scale += RESCALE.ln();
        }
    }
}

/// `L_k^{(m)}(x)` with a separate logarithmic scale.
pub fn laguerre_scaled(k: usize, m: usize, x: f64) -> Scaled {
    let mut sweep = LaguerreSweep::new(m, x);
    for _ in 0..k {
        sweep.advance();
    }
    sweep.value()
}

/// Generalized Laguerre polynomial `L_k^{(m)}(x)` by the three-term recurrence in degree.
pub fn laguerre(k: usize, m: usize, x: f64) -> f64 {
    laguerre_scaled(k, m, x).value()
}

/// Bessel function of the first kind `J_n(x)`, `x ≥ 0`, from
/// `J_n(x) = (1/π) ∫_0^π cos(x sin θ − nθ) dθ` by composite 16-point
/// Gauss–Legendre quadrature on `⌈x⌉ + n + 16` panels.
pub fn bessel_j(n: u64, x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j needs finite x >= 0, got {x}")));
    }
    if n > BESSEL_MAX_ORDER {
        return Err(Error::Domain(format!("bessel_j order {n} above {BESSEL_MAX_ORDER}")));
    }
    if x > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!("bessel_j argument {x} above {BESSEL_MAX_ARG}")));
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let panels = x.ceil() as u64 + n + 16;
    let h = PI / panels as f64;
    let gl = GaussLegendre::order16();
    let nf = n as f64;
    let mut total = 0.0;
    for p in 0..panels {
        // nθ = π (n p mod 2P)/P + n h t, with the integer part reduced exactly.
        let base_phase = ((n as u128 * p as u128) % (2 * panels as u128)) as f64 * h;
        let mut panel = 0.0;
        for (node, w) in gl.nodes.iter().zip(&gl.weights) {
            let t = 0.5 * (node + 1.0);
            let theta = (p as f64 + t) * h;
            panel += w * (x * theta.sin() - base_phase - nf * h * t).cos();
        }
        total += panel;
    }
    Ok((0.5 * h * total / PI).clamp(-1.0, 1.0))
}

/// `ln √(k!/k'!) = −½ Σ_{j=k+1}^{k'} ln j` for `k ≤ k'`.
pub fn log_factorial_ratio(k: usize, k_prime: usize) -> Result<f64> {
    if k > k_prime {
        return Err(precondition(format!("log_factorial_ratio needs k <= k', got ({k}, {k_prime})")));
    }
    Ok(-0.5 * (k + 1..=k_prime).map(|j| (j as f64).ln()).sum::<f64>())
}

/// Prefix sums of `ln j` in double-double precision, for O(1) factorial ratios.
#[derive(Clone, Debug)]
pub struct LnFactorials {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl LnFactorials {
    /// Table covering `ln k!` for `k ≤ max`.
    pub fn new(max: usize) -> Self {
        let mut hi = Vec::with_capacity(max + 1);
        let mut lo = Vec::with_capacity(max + 1);
        let (mut h, mut l) = (0.0, 0.0);
        hi.push(h);
        lo.push(l);
        for j in 1..=max {
            let (s, e) = two_sum(h, (j as f64).ln());
            l += e;
            let (s2, e2) = two_sum(s, l);
            h = s2;
            l = e2;
            hi.push(h);
            lo.push(l);
        }
        Self { hi, lo }
    }

    pub fn max(&self) -> usize {
        self.hi.len() - 1
    }

    /// `ln k! − ln k'!` halved, i.e. `ln √(k!/k'!)`.
    pub fn ln_sqrt_ratio(&self, k: usize, k_prime: usize) -> f64 {
        let (d, e) = two_sum(self.hi[k], -self.hi[k_prime]);
        0.5 * (d + (e + (self.lo[k] - self.lo[k_prime])))
    }
}

/// `F_{k',k} = (k'!/k!) (2/(k'+k+1))^{k'−k}` for `k ≤ k'`.
///
/// The `k'−k` factors `j/c`, `c = (k'+k+1)/2`, are paired as
/// `(j/c)((2c−j)/c) = 1 − ((c−j)/c)²` and summed as `ln_1p` terms, each
/// non-positive, so the result lies in `(0, 1]` in floating point too.
pub fn f_factor(k: usize, k_prime: usize) -> Result<f64> {
    if k > k_prime {
        return Err(precondition(format!("f_factor needs k <= k', got ({k}, {k_prime})")));
    }
    let c = (k_prime + k + 1) as f64 / 2.0;
    let count = k_prime - k;
    let mut ln_f = 0.0;
    for i in 0..count / 2 {
        let j = (k + 1 + i) as f64;
        let d = (c - j) / c;
        ln_f += (-d * d).ln_1p();
    }
    Ok(ln_f.exp())
}

/// Coefficients `A_0, …, A_jmax` of the Bessel-series expansion for a pair `k ≤ k'`.
#[derive(Clone, Debug, PartialEq)]
pub struct AjSequence {
    pub k: usize,
    pub k_prime: usize,
    pub values: Vec<f64>,
}

impl AjSequence {
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `A_0 = 1`, `A_1 = 0`, `A_2 = (k'−k+1)/2` and for `j ≥ 2`
/// `(j+1) A_{j+1} = (j+k'−k) A_{j−1} − (k'+k+1) A_{j−2}`.
pub fn a_coefficients(k: usize, k_prime: usize, jmax: usize) -> Result<AjSequence> {
    if k > k_prime {
        return Err(precondition(format!("a_coefficients needs k <= k', got ({k}, {k_prime})")));
    }
    let m = (k_prime - k) as f64;
    let n = (k_prime + k + 1) as f64;
    let mut values = Vec::with_capacity(jmax + 1);
    values.push(1.0);
    if jmax >= 1 {
        values.push(0.0);
    }
    if jmax >= 2 {
        values.push(0.5 * (m + 1.0));
    }
    for j in 2..jmax {
        let jf = j as f64;
        let next = ((jf + m) * values[j - 1] - n * values[j - 2]) / (jf + 1.0);
        values.push(next);
    }
    Ok(AjSequence {
        k,
        k_prime,
        values,
    })
}
