//! Matrix elements `⟨U_a φ_k, φ_{k'}⟩` and `⟨V φ_k, φ_{k'}⟩` in the normalized
//! Hermite eigenbasis `φ_k(x) = α^{1/4} ψ_k(√α x)` of `H`, by three routes:
//! the Laguerre closed form, the Bessel series and Gauss–Hermite quadrature.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::precondition;
use crate::model::{rho, PhasePoint, Potential};
use crate::par::Execution;
use crate::quadrature::{hermite_function_scaled, GaussHermite};
use crate::spectral::HermitianMatrix;
use crate::specialfn::{a_coefficients, bessel_j, f_factor, log_factorial_ratio, LaguerreSweep, LnFactorials};
use crate::{Error, Result};

/// Largest basis size [`build_matrix`] accepts.
pub const MAX_BASIS: usize = 12_000;

/// Largest index the quadrature oracle accepts.
pub const ORACLE_MAX_INDEX: usize = 200;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(−ω/ρ)` with `ω = √α a_ξ/2 − i a_x/(2√α)`; `|ω| = ρ`.
fn unit_phase(a: PhasePoint, alpha: f64, rho: f64) -> Complex64 {
    let s = alpha.sqrt();
    Complex64::new(-0.5 * s * a.a_xi / rho, 0.5 * a.a_x / (s * rho))
}

/// `e^{ln_mag} · L`, with the Laguerre mantissa folded into the exponent.
fn assemble(ln_mag: f64, laguerre: crate::quadrature::Scaled) -> Result<f64> {
    if laguerre.mantissa == 0.0 {
        return Ok(0.0);
    }
    let ln = ln_mag + laguerre.ln_abs();
    // |u| ≤ 1, so anything far above 0 means a broken recurrence
    if !ln.is_finite() || ln > 1.0 {
        return Err(Error::Overflow(ln));
    }
    Ok(ln.exp().copysign(laguerre.mantissa))
}

/// `⟨U_a φ_k, φ_{k'}⟩` from the Laguerre closed form.
///
/// For `k ≤ k'` this is
/// `√(k!/k'!) 2^{m/2} (−ω)^m e^{−ρ²} L_k^{(m)}(2ρ²)`, `m = k' − k`; for
/// `k > k'` it is `conj(u_element(−a, α, k', k))`.
pub fn u_element(a: PhasePoint, alpha: f64, k: usize, k_prime: usize) -> Result<Complex64> {
    if k > k_prime {
        return Ok(u_element(-a, alpha, k_prime, k)?.conj());
    }
    let r = rho(a, alpha)?;
    if r == 0.0 {
        return Ok(if k == k_prime { Complex64::new(1.0, 0.0) } else { ZERO });
    }
    let m = k_prime - k;
    let ln_mag = log_factorial_ratio(k, k_prime)? + m as f64 * (2f64.sqrt() * r).ln() - r * r;
    let mut sweep = LaguerreSweep::new(m, 2.0 * r * r);
    for _ in 0..k {
        sweep.advance();
    }
    let mag = assemble(ln_mag, sweep.value())?;
    Ok(unit_phase(a, alpha, r).powu(m as u32) * mag)
}

fn oracle_rule(k: usize, k_prime: usize) -> Result<Arc<GaussHermite>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
    let nodes = (4 * (k + k_prime) + 200).div_ceil(64) * 64;
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("oracle cache poisoned").get(&nodes) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(GaussHermite::new(nodes)?);
    cache
        .lock()
        .expect("oracle cache poisoned")
        .insert(nodes, Arc::clone(&rule));
    Ok(rule)
}

/// `⟨U_a φ_k, φ_{k'}⟩` by direct quadrature of the defining integral.
///
/// With `b = √α a_ξ`, `c = a_x/√α` the element is
/// `e^{i a_x a_ξ/2} ∫ e^{icy} ψ_k(y+b) ψ_{k'}(y) dy`; the substitution
/// `y = t − b/2` centres the Gaussian envelope before applying the rule.
pub fn u_element_oracle(a: PhasePoint, alpha: f64, k: usize, k_prime: usize) -> Result<Complex64> {
    if !(alpha > 0.0) {
        return Err(precondition(format!("alpha must be positive, got {alpha}")));
    }
    if k > ORACLE_MAX_INDEX || k_prime > ORACLE_MAX_INDEX {
        return Err(Error::Quadrature(format!(
            "oracle indices ({k}, {k_prime}) above {ORACLE_MAX_INDEX}"
        )));
    }
    let rule = oracle_rule(k, k_prime)?;
    let s = alpha.sqrt();
    let (b, c) = (s * a.a_xi, a.a_x / s);
    let mut re = 0.0;
    let mut im = 0.0;
    for (&t, &lw) in rule.nodes().iter().zip(rule.ln_scaled_weights()) {
        let p = hermite_function_scaled(k, t + 0.5 * b);
        let q = hermite_function_scaled(k_prime, t - 0.5 * b);
        let w = (lw + p.ln_scale + q.ln_scale).exp() * p.mantissa * q.mantissa;
        let (sin, cos) = (c * (t - 0.5 * b)).sin_cos();
        re += w * cos;
        im += w * sin;
    }
    Ok(Complex64::from_polar(1.0, 0.5 * a.a_x * a.a_xi) * Complex64::new(re, im))
}

/// Partial sum through `jmax` of the Bessel-series expansion
/// `e^{imθ} √F Σ_j A_j (ρ/√n)^j J_{m+j}(2ρ√n)`, `n = k'+k+1`, `k ≤ k'`.
///
/// Converges to [`u_element`] for `2ρ ≤ n^{1/6}`.
pub fn u_element_bessel(a: PhasePoint, alpha: f64, k: usize, k_prime: usize, jmax: usize) -> Result<Complex64> {
    if k > k_prime {
        return Err(precondition(format!("u_element_bessel needs k <= k', got ({k}, {k_prime})")));
    }
    let r = rho(a, alpha)?;
    if r == 0.0 {
        return Ok(if k == k_prime { Complex64::new(1.0, 0.0) } else { ZERO });
    }
    let m = k_prime - k;
    let n = (k_prime + k + 1) as f64;
    let coeffs = a_coefficients(k, k_prime, jmax)?;
    let ratio = r / n.sqrt();
    let arg = 2.0 * r * n.sqrt();
    let mut sum = 0.0;
    let mut pow = 1.0;
    for j in 0..=jmax {
        let aj = coeffs.get(j);
        if aj != 0.0 {
            sum += aj * pow * bessel_j((m + j) as u64, arg)?;
        }
        pow *= ratio;
    }
    Ok(unit_phase(a, alpha, r).powu(m as u32) * (f_factor(k, k_prime)?.sqrt() * sum))
}

/// `⟨V φ_k, φ_{k'}⟩ = c_0 δ_{kk'} + Σ_{a∈Λ'} c_a ⟨U_a φ_k, φ_{k'}⟩`.
pub fn v_element(v: &Potential, k: usize, k_prime: usize) -> Result<Complex64> {
    let mut sum = if k == k_prime { Complex64::new(v.c0(), 0.0) } else { ZERO };
    for (a, c) in v.terms() {
        sum += c * u_element(*a, v.alpha(), k, k_prime)?;
    }
    Ok(sum)
}

/// Truncation of `H + V` to `span{φ_0, …, φ_{N−1}}`:
/// `M[k,k'] = α(2k+1)δ_{kk'} + ⟨V φ_k, φ_{k'}⟩`.
#[derive(Clone, Debug)]
pub struct MatrixElementTable {
    alpha: f64,
    matrix: HermitianMatrix,
}

impl MatrixElementTable {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, k: usize, k_prime: usize) -> Complex64 {
        self.matrix.get(k, k_prime)
    }

    /// `⟨V φ_k, φ_{k'}⟩`, i.e. the entry without the oscillator diagonal.
    pub fn v_entry(&self, k: usize, k_prime: usize) -> Complex64 {
        let z = self.matrix.get(k, k_prime);
        if k == k_prime {
            z - self.alpha * (2 * k + 1) as f64
        } else {
            z
        }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    /// The matrix of `V` alone, i.e. with `α(2k+1)` removed from the diagonal.
    pub fn v_matrix(&self) -> HermitianMatrix {
        let mut m = self.matrix.clone();
        for k in 0..m.dim() {
            m.set(k, k, self.v_entry(k, k));
        }
        m
    }
}

/// Terms sharing one `ρ` share the Laguerre factor and differ only in phase.
struct RhoGroup {
    rho: f64,
    members: Vec<(Complex64, Complex64)>,
}

fn rho_groups(v: &Potential) -> Vec<RhoGroup> {
    let mut groups: Vec<RhoGroup> = Vec::new();
    for (a, c) in v.terms() {
        let r = rho(*a, v.alpha()).expect("validated potential");
        let phase = unit_phase(*a, v.alpha(), r);
        match groups.iter_mut().find(|g| g.rho == r) {
            Some(g) => g.members.push((*c, phase)),
            None => groups.push(RhoGroup {
                rho: r,
                members: vec![(*c, phase)],
            }),
        }
    }
    groups
}

/// `⟨V φ_k, φ_{k+m}⟩` for `k = 0 … len−1`.
fn v_diagonal(groups: &[RhoGroup], lnf: &LnFactorials, m: usize, len: usize) -> Result<Vec<Complex64>> {
    let mut out = vec![ZERO; len];
    for g in groups {
        let coeff: Complex64 = g.members.iter().map(|(c, p)| c * p.powu(m as u32)).sum();
        if coeff == ZERO {
            continue;
        }
        let ln_base = m as f64 * (2f64.sqrt() * g.rho).ln() - g.rho * g.rho;
        let mut sweep = LaguerreSweep::new(m, 2.0 * g.rho * g.rho);
        for (k, slot) in out.iter_mut().enumerate() {
            let mag = assemble(ln_base + lnf.ln_sqrt_ratio(k, k + m), sweep.value())?;
            *slot += coeff * mag;
            sweep.advance();
        }
    }
    Ok(out)
}

/// [`build_matrix_with`] at the default cap and execution policy.
pub fn build_matrix(v: &Potential, n: usize) -> Result<MatrixElementTable> {
    build_matrix_with(v, n, MAX_BASIS, Execution::default())
}

/// Assembles the `N×N` truncation of `H + V`.
///
/// The upper triangle is filled diagonal by diagonal: along `k' − k = m`
/// the Laguerre factors `L_k^{(m)}(2ρ²)` follow the degree recurrence and
/// `√(k!/k'!)` comes from a prefix table. The lower triangle is the
/// conjugate, so the result is Hermitian exactly.
pub fn build_matrix_with(v: &Potential, n: usize, max_basis: usize, exec: Execution) -> Result<MatrixElementTable> {
    if n == 0 {
        return Err(precondition("basis size must be at least 1"));
    }
    if n > max_basis {
        return Err(Error::Resource {
            requested: n,
            max: max_basis,
        });
    }
    let groups = rho_groups(v);
    let lnf = LnFactorials::new(n);
    let alpha = v.alpha();
    let mut matrix = HermitianMatrix::zeros(n);
    for k in 0..n {
        matrix.set(k, k, Complex64::new(alpha * (2 * k + 1) as f64 + v.c0(), 0.0));
    }
    if !groups.is_empty() {
        // bounded batches keep the temporary diagonals small next to the matrix
        const BATCH: usize = 256;
        for start in (0..n).step_by(BATCH) {
            let count = BATCH.min(n - start);
            let diagonals = exec.map(count, |i| {
                let m = start + i;
                v_diagonal(&groups, &lnf, m, n - m)
            });
            for (i, diag) in diagonals.into_iter().enumerate() {
                let m = start + i;
                for (k, z) in diag?.into_iter().enumerate() {
                    if m == 0 {
                        let d = matrix.get(k, k);
                        matrix.set(k, k, Complex64::new(d.re + z.re, 0.0));
                    } else {
                        matrix.set(k, k + m, z);
                        matrix.set(k + m, k, z.conj());
                    }
                }
            }
        }
    }
    Ok(MatrixElementTable { alpha, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::metric_norm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn origin_is_identity() {
        for (k, kp) in [(0, 0), (3, 3), (3, 7), (9, 2)] {
            let want = if k == kp { 1.0 } else { 0.0 };
            assert_eq!(u_element(PhasePoint::ORIGIN, 1.3, k, kp).unwrap(), Complex64::new(want, 0.0));
        }
        assert!(u_element_oracle(PhasePoint::ORIGIN, 1.0, 3, 7).unwrap().norm() < 1e-12);
    }

    #[test]
    fn gaussian_integral_values() {
        let e = (-0.25f64).exp();
        for a in [PhasePoint::new(1.0, 0.0), PhasePoint::new(0.0, 1.0)] {
            let u = u_element(a, 1.0, 0, 0).unwrap();
            assert!(close(u, Complex64::new(e, 0.0), 1e-15), "{a}: {u}");
            let o = u_element_oracle(a, 1.0, 0, 0).unwrap();
            assert!(close(o, Complex64::new(e, 0.0), 1e-13), "{a}: {o}");
        }
    }

    #[test]
    fn first_off_diagonal_phase() {
        // ω = −i/2: u = (i/2)√2 e^{−1/4}
        let a = PhasePoint::new(1.0, 0.0);
        let want = Complex64::new(0.0, 0.5 * 2f64.sqrt() * (-0.25f64).exp());
        assert!(close(u_element(a, 1.0, 0, 1).unwrap(), want, 1e-15));
        assert!(close(u_element_oracle(a, 1.0, 0, 1).unwrap(), want, 1e-13));
        // and the reverse order through U_a* = U_{−a}
        let back = u_element(a, 1.0, 1, 0).unwrap();
        assert!(close(back, u_element_oracle(a, 1.0, 1, 0).unwrap(), 1e-13));
    }

    #[test]
    fn closed_form_matches_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let alpha: f64 = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
            let norm = rng.gen_range(0.0..5.0);
            let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            // |||a||| = norm exactly
            let a = PhasePoint::new(norm * t.cos() * alpha.sqrt(), norm * t.sin() / alpha.sqrt());
            let (k, kp) = (rng.gen_range(0..=50), rng.gen_range(0..=50));
            let u = u_element(a, alpha, k, kp).unwrap();
            let o = u_element_oracle(a, alpha, k, kp).unwrap();
            assert!(close(u, o, 1e-10), "a={a} α={alpha} k={k} k'={kp}: {u} vs {o}");
        }
    }

    #[test]
    fn bessel_series_leading_term() {
        let a = PhasePoint::new(0.3, 0.1);
        let (k, kp) = (20, 23);
        let r = rho(a, 1.0).unwrap();
        let n = (k + kp + 1) as f64;
        let want = f_factor(k, kp).unwrap().sqrt() * bessel_j(3, 2.0 * r * n.sqrt()).unwrap();
        let got = u_element_bessel(a, 1.0, k, kp, 0).unwrap();
        assert!((got.norm() - want.abs()).abs() < 1e-15);
    }

    #[test]
    fn bessel_series_matches_closed_form() {
        let a = PhasePoint::new(1.0, 0.0);
        let u = u_element(a, 1.0, 400, 400).unwrap();
        let b = u_element_bessel(a, 1.0, 400, 400, 48).unwrap();
        assert!((u.norm() - b.norm()).abs() < 1e-8, "{u} vs {b}");
        assert!(close(u, b, 1e-8), "{u} vs {b}");
        let u = u_element(a, 1.0, 300, 310).unwrap();
        let b = u_element_bessel(a, 1.0, 300, 310, 48).unwrap();
        assert!(close(u, b, 1e-8), "{u} vs {b}");
    }

    #[test]
    fn cos_x_diagonal_entry() {
        let v = Potential::cos_x(1.0).unwrap();
        let e = (-0.25f64).exp();
        assert!(close(v_element(&v, 0, 0).unwrap(), Complex64::new(e, 0.0), 1e-15));
        let t = build_matrix(&v, 8).unwrap();
        assert!(close(t.get(0, 0), Complex64::new(1.0 + e, 0.0), 1e-15));
        assert!(close(t.v_entry(0, 0), Complex64::new(e, 0.0), 1e-15));
    }

    #[test]
    fn zero_potential_matrix() {
        let v = Potential::zero(1.0).unwrap();
        let t = build_matrix(&v, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { (2 * i + 1) as f64 } else { 0.0 };
                assert_eq!(t.get(i, j), Complex64::new(want, 0.0));
            }
        }
        assert_eq!(v_element(&v, 2, 5).unwrap(), ZERO);
    }

    #[test]
    fn build_matrix_guards() {
        let v = Potential::cos_x(1.0).unwrap();
        assert!(matches!(build_matrix(&v, 0), Err(Error::Precondition(_))));
        assert!(matches!(
            build_matrix_with(&v, 50, 40, Execution::Sequential),
            Err(Error::Resource { requested: 50, max: 40 })
        ));
    }

    fn mixed_potential() -> Potential {
        let c = Complex64::new(0.2, -0.15);
        Potential::new(
            1.3,
            0.4,
            vec![
                (PhasePoint::new(0.7, -0.4), c),
                (PhasePoint::new(-0.7, 0.4), c.conj()),
                (PhasePoint::new(0.0, 1.1), Complex64::new(0.1, 0.0)),
                (PhasePoint::new(0.0, -1.1), Complex64::new(0.1, 0.0)),
                (PhasePoint::new(1.1, 0.0), Complex64::new(0.0, 0.05)),
                (PhasePoint::new(-1.1, 0.0), Complex64::new(0.0, -0.05)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sweep_assembly_matches_elementwise() {
        let v = mixed_potential();
        let t = build_matrix_with(&v, 120, MAX_BASIS, Execution::Sequential).unwrap();
        assert_eq!(t.matrix().hermiticity_defect(), 0.0);
        let bound = v.perturbation_bound();
        for k in (0..120).step_by(7) {
            for kp in (0..120).step_by(5) {
                let e = v_element(&v, k, kp).unwrap();
                assert!(close(t.v_entry(k, kp), e, 1e-12), "({k},{kp})");
                if k != kp {
                    assert!(e.norm() <= bound + 1e-12);
                }
            }
        }
    }

    #[test]
    fn policies_build_identical_tables() {
        let v = mixed_potential();
        let s = build_matrix_with(&v, 300, MAX_BASIS, Execution::Sequential).unwrap();
        let p = build_matrix_with(&v, 300, MAX_BASIS, Execution::Parallel).unwrap();
        assert_eq!(s.matrix(), p.matrix());
    }

    #[test]
    fn cos_x_parity_entries_vanish_exactly() {
        let t = build_matrix(&Potential::cos_x(1.0).unwrap(), 40).unwrap();
        for k in 0..40 {
            for kp in 0..40 {
                let z = t.v_entry(k, kp);
                if (k + kp) % 2 == 1 {
                    assert_eq!(z, ZERO);
                } else {
                    assert_eq!(z.im, 0.0);
                }
            }
        }
    }

    #[test]
    fn unitarity_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = PhasePoint::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let alpha = rng.gen_range(0.5..2.0);
            let k = rng.gen_range(0..=100);
            let norm = metric_norm(a, alpha).unwrap();
            let n = k + (40.0 * (1.0 + norm * (k as f64).sqrt())).ceil() as usize;
            let total: f64 = (0..n).map(|kp| u_element(a, alpha, k, kp).unwrap().norm_sqr()).sum();
            assert!(total >= 1.0 - 1e-6 && total <= 1.0 + 1e-9, "k={k} a={a}: {total}");
        }
    }

    #[test]
    fn small_amplitude_bound() {
        // |u| ≤ (4(2ρ)^{−1/2} + ½(2ρ)²)(k'+k+1)^{−1/4} in the admissible regime
        let mut checked = 0;
        for kp in (2..=2000).step_by(37) {
            let n = (2 * kp + 1) as f64;
            for &two_rho in &[0.2, 0.7, 1.0, 1.6, 2.5] {
                if two_rho > n.powf(1.0 / 6.0) {
                    continue;
                }
                let r = 0.5 * two_rho;
                let a = PhasePoint::new(2.0 * r, 0.0);
                for k in (0..=kp).rev().step_by(3) {
                    let m = (kp - k) as f64;
                    if m > r * ((kp + k + 1) as f64).sqrt() {
                        break;
                    }
                    let u = u_element(a, 1.0, k, kp).unwrap().norm();
                    let bound = (4.0 / two_rho.sqrt() + 0.5 * two_rho * two_rho) * ((kp + k + 1) as f64).powf(-0.25);
                    assert!(u <= bound, "k={k} k'={kp} 2ρ={two_rho}: {u} > {bound}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 1000);
    }

    fn hermite_poly(n: usize, x: f64) -> f64 {
        let (mut prev, mut cur) = (0.0, 1.0);
        for j in 0..n {
            let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    #[test]
    fn hermite_shift_identity() {
        let rule = GaussHermite::new(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..150 {
            let kp = rng.gen_range(0..=30);
            let k = rng.gen_range(0..=kp);
            let y: f64 = rng.gen_range(-2.0..2.0);
            let mut z: f64 = rng.gen_range(-2.0..2.0);
            if z.abs() < 1e-3 {
                z = 0.5;
            }
            let lhs = rule.integrate(|x| hermite_poly(k, x + y) * hermite_poly(kp, x + z));
            let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
            let rhs = 2f64.powi(kp as i32)
                * std::f64::consts::PI.sqrt()
                * ln_fact.exp()
                * z.powi((kp - k) as i32)
                * crate::specialfn::laguerre(k, kp - k, -2.0 * y * z);
            // rounding floor: the integrand reaches the Cauchy-Schwarz scale ‖H_k‖‖H_k'‖
            let ln_kp_fact: f64 = (1..=kp).map(|j| (j as f64).ln()).sum();
            let cs = (std::f64::consts::PI.sqrt() * 2f64.powf(0.5 * (k + kp) as f64)) * (0.5 * (ln_fact + ln_kp_fact)).exp();
            assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs() + 1e-12 * cs, "k={k} k'={kp} y={y} z={z}: {lhs} vs {rhs}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn magnitude_at_most_one(
            ax in -40.0..40.0f64, axi in -40.0..40.0f64, alpha in 0.05..20.0f64,
            k in 0usize..3000, kp in 0usize..3000,
        ) {
            let u = u_element(PhasePoint::new(ax, axi), alpha, k, kp).unwrap();
            prop_assert!(u.norm() <= 1.0 + 1e-10);
        }

        #[test]
        fn adjoint_symmetry(ax in -3.0..3.0f64, axi in -3.0..3.0f64, k in 0usize..60, kp in 0usize..60) {
            let a = PhasePoint::new(ax, axi);
            let u = u_element(a, 1.0, k, kp).unwrap();
            let w = u_element(-a, 1.0, kp, k).unwrap();
            prop_assert!((u - w.conj()).norm() <= 1e-14);
        }
    }
}
