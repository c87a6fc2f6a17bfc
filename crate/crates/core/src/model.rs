//! The oscillator parameter `α` and the perturbation `V = Σ_{a∈Λ} c_a U_a`,
//! with `U_a φ(x) = e^{i a_x a_ξ/2} e^{i a_x x} φ(x + a_ξ)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::precondition;
use crate::{Error, Result};

/// Absolute tolerance for `c_{−a} = conj(c_a)` and `Im c_0 = 0`.
pub const CONJUGACY_TOL: f64 = 1e-12;

/// A point `a = (a_x, a_ξ)` of phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub a_x: f64,
    pub a_xi: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint { a_x: 0.0, a_xi: 0.0 };

    pub fn new(a_x: f64, a_xi: f64) -> Self {
        Self { a_x, a_xi }
    }

    pub fn is_origin(&self) -> bool {
        self.a_x == 0.0 && self.a_xi == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.a_x.is_finite() && self.a_xi.is_finite()
    }
}

impl std::ops::Neg for PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        PhasePoint::new(-self.a_x, -self.a_xi)
    }
}

impl std::fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.a_x, self.a_xi)
    }
}

/// `|||a||| = (a_x²/α + α a_ξ²)^{1/2}`.
pub fn metric_norm(a: PhasePoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(precondition(format!("alpha must be positive, got {alpha}")));
    }
    Ok((a.a_x * a.a_x / alpha + alpha * a.a_xi * a.a_xi).sqrt())
}

/// `ρ = |||a||| / 2`.
pub fn rho(a: PhasePoint, alpha: f64) -> Result<f64> {
    Ok(0.5 * metric_norm(a, alpha)?)
}

/// Constants derived from a valid potential.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `min_{a∈Λ'} |||a|||`, absent when `Λ'` is empty.
    pub gamma: Option<f64>,
    /// `min{1/3, γ/(2√3)}`, or `1/3` for empty `Λ'`.
    pub kappa: f64,
    /// `Σ_{a∈Λ'} |||a|||^{-3/2} |c_a|`.
    pub norm_m3_2: f64,
    /// `Σ_{a∈Λ'} |c_a|`.
    pub norm_0: f64,
    /// `Σ_{a∈Λ'} |||a|||³ |c_a|`.
    pub norm_3: f64,
    /// `Σ_{a∈Λ} |c_a|`, an upper bound for `‖V‖`.
    pub operator_bound: f64,
}

/// Checks every structural condition on `(α, c_0, Λ')` and returns the derived
/// constants, or an [`Error::Validation`] listing all violations.
pub fn validate(alpha: f64, c0: Complex64, terms: &[(PhasePoint, Complex64)]) -> Result<ValidationReport> {
    let mut problems = Vec::new();
    if !(alpha > 0.0) || !alpha.is_finite() {
        problems.push(format!("alpha must be a finite positive number, got {alpha}"));
    }
    if !c0.re.is_finite() || !c0.im.is_finite() {
        problems.push("c0 must be finite".to_string());
    } else if c0.im.abs() > CONJUGACY_TOL {
        problems.push(format!("c0 must be real, imaginary part {}", c0.im));
    }
    for (i, (a, c)) in terms.iter().enumerate() {
        if !a.is_finite() || !c.re.is_finite() || !c.im.is_finite() {
            problems.push(format!("term {i} at {a} is not finite"));
            continue;
        }
        if a.is_origin() {
            problems.push(format!("term {i} sits at the origin; use c0 for the constant shift"));
        }
        if terms[..i].iter().any(|(b, _)| b == a) {
            problems.push(format!("duplicate phase point {a}"));
        }
        match terms.iter().find(|(b, _)| *b == -*a) {
            None => problems.push(format!("phase point {a} has no mirror {}", -*a)),
            Some((_, c_neg)) => {
                let mismatch = (c_neg - c.conj()).norm();
                // report each offending pair once
                if mismatch > CONJUGACY_TOL && (a.a_x, a.a_xi) > (-a.a_x, -a.a_xi) {
                    problems.push(format!(
                        "coefficients at {a} and {} are not conjugate (|c_-a - conj(c_a)| = {mismatch:e})",
                        -*a
                    ));
                }
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    let norms: Vec<(f64, f64)> = terms
        .iter()
        .map(|(a, c)| (metric_norm(*a, alpha).expect("alpha checked"), c.norm()))
        .collect();
    let gamma = norms.iter().map(|&(r, _)| r).min_by(f64::total_cmp);
    let kappa = match gamma {
        Some(g) => (1.0 / 3.0f64).min(g / (2.0 * 3f64.sqrt())),
        None => 1.0 / 3.0,
    };
    let norm_0: f64 = norms.iter().map(|&(_, c)| c).sum();
    Ok(ValidationReport {
        gamma,
        kappa,
        norm_m3_2: norms.iter().map(|&(r, c)| r.powf(-1.5) * c).sum(),
        norm_0,
        norm_3: norms.iter().map(|&(r, c)| r.powi(3) * c).sum(),
        operator_bound: norm_0 + c0.norm(),
    })
}

/// A validated perturbation together with the oscillator parameter `α`.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    alpha: f64,
    c0: f64,
    terms: Vec<(PhasePoint, Complex64)>,
    report: ValidationReport,
}

impl Potential {
    /// Builds a potential from the non-zero phase points `Λ'` and the shift `c_0`.
    pub fn new(alpha: f64, c0: f64, terms: Vec<(PhasePoint, Complex64)>) -> Result<Self> {
        let report = validate(alpha, Complex64::new(c0, 0.0), &terms)?;
        Ok(Self {
            alpha,
            c0,
            terms,
            report,
        })
    }

    /// `V = 0`.
    pub fn zero(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, Vec::new())
    }

    /// Multiplication by `Σ_i b_i cos(ω_i x)`, i.e. `c_{(±ω_i, 0)} = b_i/2`.
    pub fn cosine_series(alpha: f64, modes: &[(f64, f64)]) -> Result<Self> {
        let mut terms = Vec::with_capacity(2 * modes.len());
        for &(omega, b) in modes {
            let c = Complex64::new(0.5 * b, 0.0);
            terms.push((PhasePoint::new(omega, 0.0), c));
            terms.push((PhasePoint::new(-omega, 0.0), c));
        }
        Self::new(alpha, 0.0, terms)
    }

    /// Multiplication by `cos x`.
    pub fn cos_x(alpha: f64) -> Result<Self> {
        Self::cosine_series(alpha, &[(1.0, 1.0)])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// The terms of `Λ'` (the origin is carried by [`Self::c0`]).
    pub fn terms(&self) -> &[(PhasePoint, Complex64)] {
        &self.terms
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    pub fn kappa(&self) -> f64 {
        self.report.kappa
    }

    /// `Σ_{a∈Λ'} |c_a|`.
    pub fn perturbation_bound(&self) -> f64 {
        self.report.norm_0
    }

    /// `Σ_{a∈Λ} |c_a|`.
    pub fn operator_bound(&self) -> f64 {
        self.report.operator_bound
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.c0 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn metric_norm_examples() {
        assert_eq!(metric_norm(PhasePoint::ORIGIN, 3.0).unwrap(), 0.0);
        assert_eq!(metric_norm(PhasePoint::new(3.0, 4.0), 1.0).unwrap(), 5.0);
        assert!((metric_norm(PhasePoint::new(2.0, 1.0), 4.0).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        assert!(metric_norm(PhasePoint::new(1.0, 1.0), 0.0).is_err());
        assert!(metric_norm(PhasePoint::new(1.0, 1.0), -2.0).is_err());
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(PhasePoint::ORIGIN, 1.0).unwrap(), 0.0);
        assert_eq!(rho(PhasePoint::new(1.0, 0.0), 1.0).unwrap(), 0.5);
        assert!((rho(PhasePoint::new(0.0, 1.0), 2.0).unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cos_x_is_valid() {
        let v = Potential::cos_x(1.0).unwrap();
        let r = v.report();
        assert_eq!(r.gamma, Some(1.0));
        assert!((r.kappa - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        assert_eq!(r.operator_bound, 1.0);
    }

    #[test]
    fn missing_mirror_is_rejected() {
        let err = validate(1.0, c(0.0, 0.0), &[(PhasePoint::new(1.0, 0.0), c(0.5, 0.0))]).unwrap_err();
        match err {
            Error::Validation(list) => assert!(list[0].contains("mirror")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_potential() {
        let v = Potential::zero(2.0).unwrap();
        assert_eq!(v.kappa(), 1.0 / 3.0);
        assert_eq!(v.operator_bound(), 0.0);
        assert!(v.report().gamma.is_none());
    }

    #[test]
    fn every_violation_is_listed() {
        let terms = [
            (PhasePoint::new(1.0, 0.0), c(0.5, 0.1)),
            (PhasePoint::new(-1.0, 0.0), c(0.5, 0.1)),
            (PhasePoint::new(2.0, 3.0), c(1.0, 0.0)),
            (PhasePoint::new(2.0, 3.0), c(1.0, 0.0)),
        ];
        let Err(Error::Validation(list)) = validate(-1.0, c(0.0, 1.0), &terms) else {
            panic!("expected validation error")
        };
        assert!(list.iter().any(|m| m.contains("alpha")));
        assert!(list.iter().any(|m| m.contains("c0")));
        assert!(list.iter().any(|m| m.contains("conjugate")));
        assert!(list.iter().any(|m| m.contains("duplicate")));
        assert!(list.iter().any(|m| m.contains("mirror")));
    }

    #[test]
    fn conjugacy_tolerance() {
        let a = PhasePoint::new(0.3, -0.7);
        let ok = [(a, c(0.2, 0.4)), (-a, c(0.2, -0.4 + 5e-13))];
        assert!(validate(1.0, c(0.0, 0.0), &ok).is_ok());
        let bad = [(a, c(0.2, 0.4)), (-a, c(0.2, -0.4 + 5e-12))];
        assert!(validate(1.0, c(0.0, 0.0), &bad).is_err());
    }

    #[test]
    fn origin_term_rejected() {
        assert!(validate(1.0, c(0.0, 0.0), &[(PhasePoint::ORIGIN, c(1.0, 0.0))]).is_err());
    }

    fn point() -> impl Strategy<Value = PhasePoint> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| PhasePoint::new(x, y))
    }

    proptest! {
        #[test]
        fn metric_norm_is_a_norm(a in point(), b in point(), t in -5.0..5.0f64, alpha in 0.05..20.0f64) {
            let na = metric_norm(a, alpha).unwrap();
            let nb = metric_norm(b, alpha).unwrap();
            let sum = PhasePoint::new(a.a_x + b.a_x, a.a_xi + b.a_xi);
            prop_assert!(metric_norm(sum, alpha).unwrap() <= (na + nb) * (1.0 + 1e-14));
            let scaled = metric_norm(PhasePoint::new(t * a.a_x, t * a.a_xi), alpha).unwrap();
            prop_assert!((scaled - t.abs() * na).abs() <= 1e-12 * na.max(1.0));
            prop_assert_eq!(na == 0.0, a.is_origin());
        }

        #[test]
        fn cosine_families_validate_and_mutations_fail(
            modes in proptest::collection::vec((0.1..6.0f64, -2.0..2.0f64), 1..5),
            which in 0usize..64,
            kick in 1e-9..1.0f64,
            drop in any::<bool>(),
        ) {
            let mut seen = Vec::new();
            let modes: Vec<(f64, f64)> = modes.into_iter().filter(|(w, _)| {
                let fresh = !seen.contains(w);
                seen.push(*w);
                fresh
            }).collect();
            let v = Potential::cosine_series(1.3, &modes).unwrap();
            let mut terms = v.terms().to_vec();
            let i = which % terms.len();
            if drop {
                terms.remove(i);
            } else {
                terms[i].1 += Complex64::new(0.0, kick);
            }
            prop_assert!(validate(1.3, c(0.0, 0.0), &terms).is_err());
        }
    }
}
