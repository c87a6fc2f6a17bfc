//! Eigenvalues of truncated `H + V`.
//!
//! The solver reduces a dense Hermitian matrix to real symmetric tridiagonal
//! form with Householder reflections and then runs implicit-shift QL. Before
//! reduction the matrix is split into the irreducible diagonal blocks of its
//! exact-zero pattern (even potentials decouple even and odd states), and
//! blocks whose entries are all real take a real-arithmetic path.

use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::precondition;
use crate::matelem::{build_matrix_with, MatrixElementTable, MAX_BASIS};
use crate::model::Potential;
use crate::par::Execution;
use crate::{Error, Result};

/// Tolerance of the Hermiticity check performed before solving.
pub const HERMITIAN_TOL: f64 = 1e-12;

const QL_MAX_SWEEPS: usize = 60;

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Largest `|M[j,i] − conj(M[i,j])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(j, i) - self.get(i, j).conj()).norm());
            }
        }
        worst
    }

    /// Frobenius norm, an upper bound for the spectral norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self
                .row(i)
                .iter()
                .zip(x)
                .fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b);
        }
    }
}

/// Field operations needed by the Householder reduction.
trait Scalar:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + AddAssign + SubAssign
{
    fn zero() -> Self;
    fn conj(self) -> Self;
    fn norm_sqr(self) -> f64;
    fn re(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn from_re(x: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn re(self) -> f64 {
        self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn from_re(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Reduces the Hermitian matrix held in the upper triangle of `a` (row-major,
/// `n×n`) to a real symmetric tridiagonal matrix `(diag, |offdiag|)` with the
/// same eigenvalues. `a` is overwritten.
fn householder_tridiagonalize<T: Scalar>(a: &mut [T], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    for j in 0..n {
        diag[j] = a[j * n + j].re();
        if j + 1 >= n {
            break;
        }
        let len = n - j - 1;
        let start = j + 1;
        // column j below the diagonal is the conjugate of row j right of it
        let mut xnorm2 = 0.0;
        for i in 0..len {
            let x = a[j * n + start + i].conj();
            v[i] = x;
            xnorm2 += x.norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        off[j] = xnorm;
        if len == 1 || xnorm == 0.0 {
            continue;
        }
        let x0 = v[0];
        let x0_abs = x0.norm_sqr().sqrt();
        let phase = if x0_abs == 0.0 { T::from_re(1.0) } else { x0.scale(1.0 / x0_abs) };
        v[0] += phase.scale(xnorm);
        let tau = 1.0 / (xnorm * (xnorm + x0_abs));

        // p = τ A22 v over the upper triangle of the trailing block
        for pi in p[..len].iter_mut() {
            *pi = T::zero();
        }
        for i in 0..len {
            let row = &a[(start + i) * n + start + i..(start + i + 1) * n];
            let vi = v[i];
            let mut acc = row[0] * vi;
            let (_, p_tail) = p[..len].split_at_mut(i + 1);
            for ((aij, vl), pl) in row[1..].iter().zip(&v[i + 1..len]).zip(p_tail.iter_mut()) {
                acc += *aij * *vl;
                *pl += aij.conj() * vi;
            }
            p[i] += acc;
        }
        let mut vp = T::zero();
        for i in 0..len {
            p[i] = p[i].scale(tau);
            vp += v[i].conj() * p[i];
        }
        let k = vp.scale(0.5 * tau);
        for i in 0..len {
            p[i] -= k * v[i];
        }
        // A22 -= v q* + q v*
        for i in 0..len {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut a[(start + i) * n + start + i..(start + i + 1) * n];
            for ((aij, ql), vl) in row.iter_mut().zip(&p[i..len]).zip(&v[i..len]) {
                *aij -= vi * ql.conj() + qi * vl.conj();
            }
        }
    }
    (diag, off)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// sub-diagonal `off` (`off.len() == diag.len() − 1`), by implicit-shift QL.
/// Returned unsorted.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(precondition("tridiagonal off-diagonal must have length n - 1"));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut sweeps = 0;
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
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::NonConvergence(format!(
                    "QL iteration for eigenvalue {l} exceeded {QL_MAX_SWEEPS} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Groups of indices forming the irreducible blocks of the exact-zero pattern.
fn irreducible_blocks(m: &HermitianMatrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        let row = m.row(i);
        for (j, z) in row.iter().enumerate().skip(i + 1) {
            if z.re != 0.0 || z.im != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

fn block_eigenvalues(m: &HermitianMatrix, idx: &[usize]) -> Result<Vec<f64>> {
    let k = idx.len();
    if k == 1 {
        return Ok(vec![m.get(idx[0], idx[0]).re]);
    }
    let real = idx
        .iter()
        .all(|&i| idx.iter().all(|&j| j < i || m.get(i, j).im == 0.0));
    let (d, e) = if real {
        let mut a = vec![0.0; k * k];
        for (r, &i) in idx.iter().enumerate() {
            let row = m.row(i);
            for (c, &j) in idx.iter().enumerate().skip(r) {
                a[r * k + c] = row[j].re;
            }
        }
        householder_tridiagonalize(&mut a, k)
    } else {
        let mut a = vec![Complex64::new(0.0, 0.0); k * k];
        for (r, &i) in idx.iter().enumerate() {
            let row = m.row(i);
            for (c, &j) in idx.iter().enumerate().skip(r) {
                a[r * k + c] = row[j];
            }
        }
        householder_tridiagonalize(&mut a, k)
    };
    tridiagonal_eigenvalues(&d, &e)
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(precondition(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    let mut out = Vec::with_capacity(m.dim());
    for block in irreducible_blocks(m) {
        out.extend(block_eigenvalues(m, &block)?);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// All eigenvalues of the truncated `H + V`, ascending.
pub fn eigensolve(table: &MatrixElementTable) -> Result<Vec<f64>> {
    hermitian_eigenvalues(table.matrix())
}

/// `2·nmax + ⌈8√nmax⌉ + 64`, the first basis size tried for `nmax`.
pub fn basis_size_for(nmax: usize) -> usize {
    2 * nmax + (8.0 * (nmax as f64).sqrt()).ceil() as usize + 64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceSample {
    pub index: usize,
    /// `|λ_index(2N) − λ_index(N)|`.
    pub change: f64,
}

/// A spectrum certified by a basis-doubling check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub alpha: f64,
    pub basis_size: usize,
    /// Largest index up to which every sampled eigenvalue moved by at most
    /// `convergence_tol` when the basis was doubled.
    pub trusted_max: usize,
    pub convergence_tol: f64,
    /// All `basis_size` eigenvalues, ascending; only `0..=trusted_max` are certified.
    pub eigenvalues: Vec<f64>,
    pub samples: Vec<ConvergenceSample>,
    pub warnings: Vec<String>,
}

impl Spectrum {
    pub fn trusted(&self) -> &[f64] {
        &self.eigenvalues[..=self.trusted_max]
    }

    /// `(n, λ_n)` for `n ≤ upto` (clamped to the trusted window).
    pub fn indexed(&self, upto: usize) -> Vec<(usize, f64)> {
        self.eigenvalues[..=upto.min(self.trusted_max)]
            .iter()
            .copied()
            .enumerate()
            .collect()
    }

    pub fn max_sample_change(&self) -> f64 {
        self.samples.iter().map(|s| s.change).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub max_basis: usize,
    pub execution: Execution,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            max_basis: MAX_BASIS,
            execution: Execution::default(),
        }
    }
}

/// Converged eigenvalues `λ_0 … λ_nmax` of `H + V`.
pub fn spectrum(v: &Potential, nmax: usize, convergence_tol: f64) -> Result<Spectrum> {
    spectrum_with(v, nmax, convergence_tol, &SpectrumOptions::default())
}

pub fn spectrum_with(v: &Potential, nmax: usize, convergence_tol: f64, opts: &SpectrumOptions) -> Result<Spectrum> {
    if nmax == 0 {
        return Err(precondition("spectrum needs nmax >= 1"));
    }
    if !(convergence_tol > 0.0) {
        return Err(precondition(format!("convergence tolerance must be positive, got {convergence_tol}")));
    }
    let mut warnings = Vec::new();
    if v.perturbation_bound() >= v.alpha() {
        let msg = format!(
            "sum |c_a| = {} >= alpha = {}: low-index labels by sort order may differ from perturbative labels",
            v.perturbation_bound(),
            v.alpha()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let step = nmax.div_ceil(32);
    let mut basis = basis_size_for(nmax);
    if basis > opts.max_basis {
        return Err(Error::Resource {
            requested: basis,
            max: opts.max_basis,
        });
    }
    let mut current = eigensolve(&build_matrix_with(v, basis, opts.max_basis, opts.execution)?)?;
    loop {
        let doubled = 2 * basis;
        if doubled > opts.max_basis {
            return Err(Error::Truncation(format!(
                "index {nmax} not converged to {convergence_tol:e} before the doubled basis {doubled} exceeded {}",
                opts.max_basis
            )));
        }
        let finer = eigensolve(&build_matrix_with(v, doubled, opts.max_basis, opts.execution)?)?;
        let mut indices: Vec<usize> = (0..basis).step_by(step).collect();
        indices.push(nmax.min(basis - 1));
        indices.push(basis - 1);
        indices.sort_unstable();
        indices.dedup();
        let samples: Vec<ConvergenceSample> = indices
            .iter()
            .map(|&i| ConvergenceSample {
                index: i,
                change: (finer[i] - current[i]).abs(),
            })
            .collect();
        let mut trusted = None;
        for s in &samples {
            if s.change <= convergence_tol {
                trusted = Some(s.index);
            } else {
                break;
            }
        }
        if let Some(t) = trusted.filter(|&t| t >= nmax) {
            return Ok(Spectrum {
                alpha: v.alpha(),
                basis_size: basis,
                trusted_max: t,
                convergence_tol,
                eigenvalues: current,
                samples,
                warnings,
            });
        }
        log::info!("basis {basis} insufficient for nmax {nmax}; doubling");
        basis = doubled;
        current = finer;
    }
}
