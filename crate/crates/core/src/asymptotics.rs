//! First-order eigenvalue asymptotics `α(2n+1) + c_0 + W(√n) n^{−1/4}` with
//! `W(λ) = 2^{1/4}/√π Σ_{a∈Λ'} c_a |||a|||^{−1/2} cos(√2 |||a||| λ − π/4)`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::precondition;
use crate::matelem::v_element;
use crate::model::{metric_norm, Potential};
use crate::{Error, Result};

/// Largest imaginary part tolerated in quantities that are real in theory.
pub const IMAG_TOL: f64 = 1e-12;

/// One `(a, −a)` pair of `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaveTerm {
    /// `c_a + c_{−a}`; its imaginary part is zero up to the conjugacy tolerance.
    pub amplitude: Complex64,
    /// `|c_a| + |c_{−a}|`.
    pub magnitude: f64,
    /// `√2 |||a|||`.
    pub frequency: f64,
    /// `|||a|||^{−1/2}`.
    pub inverse_root: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub alpha: f64,
    pub c0: f64,
    pub wave_terms: Vec<WaveTerm>,
}

fn w_prefactor() -> f64 {
    2f64.powf(0.25) / PI.sqrt()
}

impl AsymptoticModel {
    pub fn from_potential(v: &Potential) -> Self {
        let alpha = v.alpha();
        let mut wave_terms = Vec::with_capacity(v.terms().len() / 2);
        for (a, c) in v.terms() {
            let mirror = -*a;
            // one representative per pair
            if (a.a_x, a.a_xi) < (mirror.a_x, mirror.a_xi) {
                continue;
            }
            let c_mirror = v
                .terms()
                .iter()
                .find(|(b, _)| *b == mirror)
                .map(|(_, c)| *c)
                .expect("validated potential has mirrors");
            let norm = metric_norm(*a, alpha).expect("validated alpha");
            wave_terms.push(WaveTerm {
                amplitude: c + c_mirror,
                magnitude: c.norm() + c_mirror.norm(),
                frequency: 2f64.sqrt() * norm,
                inverse_root: norm.powf(-0.5),
            });
        }
        Self {
            alpha,
            c0: v.c0(),
            wave_terms,
        }
    }

    /// `2^{1/4}/√π Σ |c_a| |||a|||^{−1/2}`, a bound for `|W|`.
    pub fn w_envelope(&self) -> f64 {
        w_prefactor() * self.wave_terms.iter().map(|t| t.magnitude * t.inverse_root).sum::<f64>()
    }

    /// `W(√n) n^{−1/4}`, zero at `n = 0`.
    pub fn w_term(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        w_value(self, nf.sqrt()) * nf.powf(-0.25)
    }
}

/// `W(λ)`, real by construction.
pub fn w_value(model: &AsymptoticModel, lambda: f64) -> f64 {
    w_prefactor()
        * model
            .wave_terms
            .iter()
            .map(|t| t.amplitude.re * t.inverse_root * (t.frequency * lambda - FRAC_PI_4).cos())
            .sum::<f64>()
}

/// `α(2n+1) + c_0 + W(√n) n^{−1/4}`.
pub fn predict(model: &AsymptoticModel, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(precondition("predict needs n >= 1"));
    }
    Ok(model.alpha * (2 * n + 1) as f64 + model.c0 + model.w_term(n))
}

/// `⟨V φ_n, φ_n⟩` as a real number.
pub fn first_order_diagonal(v: &Potential, n: usize) -> Result<f64> {
    let z = v_element(v, n, n)?;
    if z.im.abs() > IMAG_TOL {
        return Err(Error::Domain(format!("diagonal element {n} has imaginary part {}", z.im)));
    }
    Ok(z.re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    pub lambda_numeric: f64,
    pub lambda_unperturbed: f64,
    pub c0: f64,
    pub w_term: f64,
    /// `lambda_numeric − lambda_unperturbed − c0 − w_term`.
    pub residual: f64,
    /// `r_n n^{1/2} / ln n`, for `n ≥ 3`.
    pub scaled_residual: Option<f64>,
    /// `r_n n^{3/4}`, for `n ≥ 3`.
    pub alt_scaled: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
}

impl ResidualReport {
    /// Largest `|scaled_residual|` over rows with `lo ≤ n ≤ hi`.
    pub fn max_scaled(&self, lo: usize, hi: usize) -> f64 {
        self.max_over(lo, hi, |r| r.scaled_residual)
    }

    /// Largest `|alt_scaled|` over rows with `lo ≤ n ≤ hi`.
    pub fn max_alt_scaled(&self, lo: usize, hi: usize) -> f64 {
        self.max_over(lo, hi, |r| r.alt_scaled)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    fn max_over(&self, lo: usize, hi: usize, col: impl Fn(&ResidualRow) -> Option<f64>) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.n >= lo && r.n <= hi)
            .filter_map(col)
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// One row per `(n, λ_n)` of `spectrum`.
pub fn residual_report(model: &AsymptoticModel, spectrum: &[(usize, f64)]) -> Result<ResidualReport> {
    if spectrum.windows(2).any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1) {
        return Err(precondition("residual_report needs eigenvalues indexed ascending"));
    }
    let rows = spectrum
        .iter()
        .map(|&(n, lambda)| {
            let unperturbed = model.alpha * (2 * n + 1) as f64;
            let w = model.w_term(n);
            let residual = lambda - unperturbed - model.c0 - w;
            let nf = n as f64;
            let (scaled, alt) = if n >= 3 {
                (Some(residual * nf.sqrt() / nf.ln()), Some(residual * nf.powf(0.75)))
            } else {
                (None, None)
            };
            ResidualRow {
                n,
                lambda_numeric: lambda,
                lambda_unperturbed: unperturbed,
                c0: model.c0,
                w_term: w,
                residual,
                scaled_residual: scaled,
                alt_scaled: alt,
            }
        })
        .collect();
    Ok(ResidualReport { rows })
}
