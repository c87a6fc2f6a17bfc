//! Resolvent `R(λ) = (H − λ)^{−1}` on circles around `λ_n = α(2n+1)`:
//! resolvent sums, norms of `R V R`, contour traces and Neumann-series
//! extraction of individual eigenvalues.
//!
//! Everything is realized on the truncated basis `φ_0 … φ_{N−1}`, where `R`
//! is diagonal with entries `1/(λ_k − λ)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::precondition;
use crate::matelem::{build_matrix_with, MatrixElementTable, MAX_BASIS};
use crate::model::Potential;
use crate::par::Execution;
use crate::spectral::{hermitian_eigenvalues, HermitianMatrix};
use crate::{Error, Result};

/// Node count used unless the caller asks otherwise.
pub const DEFAULT_NODES: usize = 128;
/// Largest node count the doubling loop of [`trace_orders_converged`] tries.
pub const MAX_NODES: usize = 1024;
/// Largest change of a trace order tolerated between `M/2` and `M` nodes.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Relative size of the Hilbert–Schmidt tail bound that triggers a warning.
pub const TAIL_WARN_FRACTION: f64 = 0.01;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `M` equally spaced nodes `λ_n + ε e^{iθ_m}`, `θ_m = 2πm/M`, traversed anticlockwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contour {
    pub alpha: f64,
    pub n: usize,
    pub epsilon: f64,
    pub nodes: Vec<Complex64>,
}

impl Contour {
    pub fn new(alpha: f64, n: usize, epsilon: f64, node_count: usize) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(precondition(format!("alpha must be positive, got {alpha}")));
        }
        if !(epsilon > 0.0 && epsilon < alpha) {
            return Err(precondition(format!("epsilon must lie in (0, {alpha}), got {epsilon}")));
        }
        if node_count < 32 || node_count % 2 != 0 {
            return Err(precondition(format!("node count must be even and >= 32, got {node_count}")));
        }
        let center = alpha * (2 * n + 1) as f64;
        let nodes = (0..node_count)
            .map(|m| center + Complex64::from_polar(epsilon, TAU * m as f64 / node_count as f64))
            .collect();
        Ok(Self {
            alpha,
            n,
            epsilon,
            nodes,
        })
    }

    pub fn center(&self) -> f64 {
        self.alpha * (2 * self.n + 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `λ_m − λ_n = ε e^{iθ_m}`; the trapezoid rule for `(1/2πi)∮ f dλ` is the mean of `f · offset`.
    pub fn offset(&self, m: usize) -> Complex64 {
        self.nodes[m] - self.center()
    }

    /// Nodes `0 ..= M/2`; the rest are their conjugates.
    pub fn upper_half(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.nodes.len() / 2
    }
}

/// `I = {k < N : |k − n| ≤ κ√n}` and its complement `J` in `[0, N)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowPartition {
    pub n: usize,
    pub basis: usize,
    pub lo: usize,
    pub hi: usize,
}

impl WindowPartition {
    pub fn new(n: usize, kappa: f64, basis: usize) -> Result<Self> {
        if n >= basis {
            return Err(precondition(format!("index {n} outside basis of size {basis}")));
        }
        let half = kappa * (n as f64).sqrt();
        let inside = |k: usize| (k as f64 - n as f64).abs() <= half;
        let mut lo = n;
        while lo > 0 && inside(lo - 1) {
            lo -= 1;
        }
        let mut hi = n;
        while hi + 1 < basis && inside(hi + 1) {
            hi += 1;
        }
        Ok(Self { n, basis, lo, hi })
    }

    pub fn contains(&self, k: usize) -> bool {
        k >= self.lo && k <= self.hi
    }

    /// `|I|`.
    pub fn inner_len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn inner(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }

    pub fn outer(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lo).chain(self.hi + 1..self.basis)
    }
}

/// `Σ_{k≥N} |λ − λ_k|^{−2}` bounded through `|λ − λ_k| ≥ 2α(k − n) − ε`.
fn inverse_square_tail(alpha: f64, n: usize, epsilon: f64, basis: usize) -> f64 {
    let d = 2.0 * alpha * (basis as f64 - 1.0 - n as f64) - epsilon;
    if d <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * alpha * d)
    }
}

/// Resolvent sums maximized over the contour nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolventSums {
    /// `Σ_{k∈I} |λ − λ_k|^{−1}`.
    pub s1: f64,
    /// `Σ_k |λ − λ_k|^{−2}` over the basis.
    pub s2a: f64,
    /// `Σ_{k∈J} |λ − λ_k|^{−2}` over the basis.
    pub s2: f64,
    /// `min_{k∈J} |λ − λ_k|`, `+inf` for empty `J`.
    pub gap: f64,
    /// Bound on the omitted `k ≥ N` part of both squared sums.
    pub tail: f64,
}

pub fn resolvent_sums(contour: &Contour, window: &WindowPartition) -> Result<ResolventSums> {
    if contour.n != window.n {
        return Err(precondition("contour and window are centred at different indices"));
    }
    let alpha = contour.alpha;
    let mut out = ResolventSums {
        s1: 0.0,
        s2a: 0.0,
        s2: 0.0,
        gap: f64::INFINITY,
        tail: inverse_square_tail(alpha, contour.n, contour.epsilon, window.basis),
    };
    for m in contour.upper_half() {
        let lambda = contour.nodes[m];
        let dist = |k: usize| (lambda - alpha * (2 * k + 1) as f64).norm();
        let s1: f64 = window.inner().map(|k| 1.0 / dist(k)).sum();
        let s2a: f64 = (0..window.basis).map(|k| dist(k).powi(-2)).sum();
        let s2: f64 = window.outer().map(|k| dist(k).powi(-2)).sum();
        let gap = window.outer().map(dist).fold(f64::INFINITY, f64::min);
        out.s1 = out.s1.max(s1);
        out.s2a = out.s2a.max(s2a);
        out.s2 = out.s2.max(s2);
        out.gap = out.gap.min(gap);
    }
    Ok(out)
}

/// Norms of `R(λ) V R(λ)` maximized over the contour nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RvrNorms {
    pub operator_norm: f64,
    pub hilbert_schmidt: f64,
    pub trace_norm: f64,
    /// Bound on the Hilbert–Schmidt norm of the part outside the basis.
    pub hs_tail: f64,
    pub warnings: Vec<String>,
}

/// Singular values of `R V R` are the `|eigenvalues|` of the Hermitian
/// `|R| V |R|`, since `R = |R|·(diagonal unitary)`. Conjugate nodes share
/// `|R|`, so only half the contour is evaluated.
pub fn rvr_norms(table: &MatrixElementTable, contour: &Contour, bound: f64, exec: Execution) -> Result<RvrNorms> {
    let n = table.dim();
    let alpha = table.alpha();
    if contour.n >= n {
        return Err(precondition(format!("index {} outside basis of size {n}", contour.n)));
    }
    let v = table.v_matrix();
    let half: Vec<usize> = contour.upper_half().collect();
    let per_node = exec.map(half.len(), |i| -> Result<(f64, f64, f64)> {
        let lambda = contour.nodes[half[i]];
        let scale: Vec<f64> = (0..n)
            .map(|k| 1.0 / (lambda - alpha * (2 * k + 1) as f64).norm())
            .collect();
        let mut hs2 = 0.0;
        let a = HermitianMatrix::from_fn(n, |k, kp| {
            let z = v.get(k, kp) * (scale[k] * scale[kp]);
            z
        });
        for z in a.as_slice() {
            hs2 += z.norm_sqr();
        }
        let ev = hermitian_eigenvalues(&a)?;
        let op = ev.iter().map(|e| e.abs()).fold(0.0, f64::max);
        let tr: f64 = ev.iter().map(|e| e.abs()).sum();
        Ok((op, hs2.sqrt(), tr))
    });
    let mut out = RvrNorms {
        operator_norm: 0.0,
        hilbert_schmidt: 0.0,
        trace_norm: 0.0,
        hs_tail: 0.0,
        warnings: Vec::new(),
    };
    for r in per_node {
        let (op, hs, tr) = r?;
        out.operator_norm = out.operator_norm.max(op);
        out.hilbert_schmidt = out.hilbert_schmidt.max(hs);
        out.trace_norm = out.trace_norm.max(tr);
    }
    // rows of V have squared norm ≤ ‖V‖², and |R| ≤ 1/ε on the rest
    let tail = inverse_square_tail(alpha, contour.n, contour.epsilon, n);
    out.hs_tail = (2.0 * bound * bound * tail).sqrt() / contour.epsilon;
    if out.hs_tail > TAIL_WARN_FRACTION * out.hilbert_schmidt && out.hilbert_schmidt > 0.0 {
        let msg = format!(
            "Hilbert-Schmidt tail bound {:e} exceeds {}% of the computed norm {:e} at basis {n}",
            out.hs_tail,
            100.0 * TAIL_WARN_FRACTION,
            out.hilbert_schmidt
        );
        log::warn!("{msg}");
        out.warnings.push(msg);
    }
    Ok(out)
}

/// Contour traces `T_j = (1/2πi)∮ λ Tr(R (V R)^j) dλ`, `j = 1 … jmax`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceOrders {
    pub node_count: usize,
    /// `T_1 … T_jmax` with all `M` nodes.
    pub values: Vec<Complex64>,
    /// The same with the even-indexed `M/2` nodes.
    pub coarse: Vec<Complex64>,
    /// `max_nodes Σ_{m<jmax} |s_m| / ε`, the convergence ratio of the pole-part series.
    pub neumann_ratio: f64,
}

impl TraceOrders {
    /// `max_j |T_j(M) − T_j(M/2)|`.
    pub fn quadrature_change(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.coarse)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j - 1].re
    }
}

/// Coefficients `[z^j] Σ_{p≥1} x(z)^p / p`, `j = 1 … jmax`, for a series `x` with `x_0 = 0`.
fn log_series(x: &[Complex64], jmax: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; jmax + 1];
    let mut power = vec![ZERO; jmax + 1];
    power[0] = Complex64::new(1.0, 0.0);
    for p in 1..=jmax {
        let mut next = vec![ZERO; jmax + 1];
        for (i, &a) in power.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (l, &b) in x.iter().enumerate().take(jmax + 1 - i) {
                next[i + l] += a * b;
            }
        }
        power = next;
        for (o, q) in out.iter_mut().zip(&power) {
            *o += q / p as f64;
        }
    }
    out
}

/// Pole-part evaluation of `T_1 … T_jmax`.
///
/// With `T_j = −(1/2πi)∮ (1/j) Tr((VR)^j) dλ`, only terms that pass through
/// the pole `t P_n` of `R = R_rest + t P_n`, `t = 1/(λ_n − λ)`, contribute.
/// They are generated by `x(z) = Σ_m t s_m z^{m+1}` with
/// `s_m = ⟨e_n, (V R_rest)^m V e_n⟩`, so each node costs `jmax` products
/// with `V` instead of matrix powers.
pub fn trace_orders(table: &MatrixElementTable, contour: &Contour, jmax: usize, exec: Execution) -> Result<TraceOrders> {
    if jmax == 0 {
        return Err(precondition("trace orders need jmax >= 1"));
    }
    let dim = table.dim();
    let n = contour.n;
    if n >= dim {
        return Err(precondition(format!("index {n} outside basis of size {dim}")));
    }
    let alpha = table.alpha();
    let v = table.v_matrix();
    let column: Vec<Complex64> = (0..dim).map(|k| v.get(k, n)).collect();
    let center = contour.center();
    let per_node = exec.map(contour.len(), |m| {
        let lambda = contour.nodes[m];
        let r_rest: Vec<Complex64> = (0..dim)
            .map(|k| if k == n { ZERO } else { 1.0 / (alpha * (2 * k + 1) as f64 - lambda) })
            .collect();
        let t = 1.0 / (center - lambda);
        let mut x = vec![ZERO; jmax + 1];
        let mut w = column.clone();
        let mut rw = vec![ZERO; dim];
        let mut ratio = 0.0;
        for step in 0..jmax {
            x[step + 1] = t * w[n];
            ratio += w[n].norm() * t.norm();
            if step + 1 < jmax {
                for ((o, a), b) in rw.iter_mut().zip(&r_rest).zip(&w) {
                    *o = a * b;
                }
                v.mul_vec(&rw, &mut w);
            }
        }
        let offset = contour.offset(m);
        let c = log_series(&x, jmax);
        (c.into_iter().skip(1).map(|cj| -cj * offset).collect::<Vec<_>>(), ratio)
    });
    let big_m = contour.len() as f64;
    let mut values = vec![ZERO; jmax];
    let mut coarse = vec![ZERO; jmax];
    let mut neumann_ratio: f64 = 0.0;
    for (m, (terms, ratio)) in per_node.into_iter().enumerate() {
        neumann_ratio = neumann_ratio.max(ratio);
        for (j, z) in terms.into_iter().enumerate() {
            values[j] += z;
            if m % 2 == 0 {
                coarse[j] += z;
            }
        }
    }
    for (a, b) in values.iter_mut().zip(coarse.iter_mut()) {
        *a /= big_m;
        *b /= big_m / 2.0;
    }
    Ok(TraceOrders {
        node_count: contour.len(),
        values,
        coarse,
        neumann_ratio,
    })
}

/// [`trace_orders`] with the node count doubled from [`DEFAULT_NODES`] until
/// halving it changes no order by more than [`QUADRATURE_TOL`].
pub fn trace_orders_converged(
    table: &MatrixElementTable,
    n: usize,
    epsilon: f64,
    jmax: usize,
    exec: Execution,
) -> Result<TraceOrders> {
    let mut nodes = DEFAULT_NODES;
    loop {
        let contour = Contour::new(table.alpha(), n, epsilon, nodes)?;
        let orders = trace_orders(table, &contour, jmax, exec)?;
        let change = orders.quadrature_change();
        if change <= QUADRATURE_TOL {
            return Ok(orders);
        }
        if 2 * nodes > MAX_NODES {
            return Err(Error::Quadrature(format!(
                "contour traces at n = {n} still move by {change:e} at {nodes} nodes"
            )));
        }
        nodes *= 2;
    }
}

/// `T_j` by explicit matrix products `Tr(R (V R)^j)` at every node; `O(j N³)`
/// per node, meant for small bases.
pub fn trace_order_dense(table: &MatrixElementTable, contour: &Contour, j: usize) -> Result<Complex64> {
    if j == 0 {
        return Err(precondition("trace order needs j >= 1"));
    }
    let dim = table.dim();
    let alpha = table.alpha();
    let v = table.v_matrix();
    let mut total = ZERO;
    for (m, &lambda) in contour.nodes.iter().enumerate() {
        let r: Vec<Complex64> = (0..dim).map(|k| 1.0 / (alpha * (2 * k + 1) as f64 - lambda)).collect();
        // (V R) and its powers
        let vr: Vec<Complex64> = (0..dim * dim).map(|idx| v.as_slice()[idx] * r[idx % dim]).collect();
        let mut power = vr.clone();
        for _ in 1..j {
            let mut next = vec![ZERO; dim * dim];
            for i in 0..dim {
                for l in 0..dim {
                    let a = power[i * dim + l];
                    if a == ZERO {
                        continue;
                    }
                    for c in 0..dim {
                        next[i * dim + c] += a * vr[l * dim + c];
                    }
                }
            }
            power = next;
        }
        let tr: Complex64 = (0..dim).map(|k| r[k] * power[k * dim + k]).sum();
        total += lambda * tr * contour.offset(m);
    }
    Ok(total / contour.len() as f64)
}

/// Eigenvalue of `H + V` near `α(2n+1)` from the Neumann series of the contour trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEigenvalue {
    pub n: usize,
    pub epsilon: f64,
    pub basis: usize,
    pub value: f64,
    /// Real parts of `T_1 … T_jmax`.
    pub orders: Vec<f64>,
    /// `α(2n+1) + Σ_{i≤j} (−1)^{i+1} T_i` for `j = 1 … jmax`.
    pub partial_sums: Vec<f64>,
    pub max_imaginary: f64,
    pub quadrature_change: f64,
    pub node_count: usize,
    pub neumann_ratio: f64,
}

/// `α(2n+1) + Σ_{j=1}^{jmax} (−1)^{j+1} T_j` for a prebuilt table.
///
/// The series is accepted only if `‖V‖/(2α − ε) < 1`, which makes
/// `(I + V R_rest)^{−1}` a convergent Neumann series on the whole contour, and
/// the pole-part ratio `Σ |s_m|/ε` stays below one at every node.
pub fn trace_eigenvalue_with(
    table: &MatrixElementTable,
    v: &Potential,
    n: usize,
    epsilon: f64,
    jmax: usize,
    exec: Execution,
) -> Result<TraceEigenvalue> {
    let alpha = v.alpha();
    let bound = v.operator_bound();
    let rest = bound / (2.0 * alpha - epsilon);
    if rest >= 1.0 {
        return Err(Error::NeumannDivergence(format!(
            "‖V‖ bound {bound} over the distance 2α − ε = {} to the other eigenvalues is {rest} >= 1",
            2.0 * alpha - epsilon
        )));
    }
    let orders = trace_orders_converged(table, n, epsilon, jmax, exec)?;
    if orders.neumann_ratio >= 1.0 {
        return Err(Error::NeumannDivergence(format!(
            "pole-part ratio {} >= 1 on the contour around n = {n}",
            orders.neumann_ratio
        )));
    }
    let mut partial_sums = Vec::with_capacity(jmax);
    let mut acc = alpha * (2 * n + 1) as f64;
    for (j, t) in orders.values.iter().enumerate() {
        // the j-th term carries (−1)^{j+1}, j counted from one
        if j % 2 == 0 {
            acc += t.re;
        } else {
            acc -= t.re;
        }
        partial_sums.push(acc);
    }
    Ok(TraceEigenvalue {
        n,
        epsilon,
        basis: table.dim(),
        value: acc,
        orders: orders.values.iter().map(|z| z.re).collect(),
        partial_sums,
        max_imaginary: orders.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max),
        quadrature_change: orders.quadrature_change(),
        node_count: orders.node_count,
        neumann_ratio: orders.neumann_ratio,
    })
}

fn table_for(v: &Potential, n: usize, basis: usize, exec: Execution) -> Result<MatrixElementTable> {
    if n >= basis {
        return Err(precondition(format!("index {n} outside basis of size {basis}")));
    }
    build_matrix_with(v, basis, MAX_BASIS, exec)
}

/// `T_j` at index `n` on a basis of size `basis`.
pub fn trace_order_j(v: &Potential, n: usize, epsilon: f64, basis: usize, j: usize) -> Result<f64> {
    if j == 0 {
        return Err(precondition("trace order needs j >= 1"));
    }
    let exec = Execution::default();
    let table = table_for(v, n, basis, exec)?;
    Ok(trace_orders_converged(&table, n, epsilon, j, exec)?.get(j))
}

/// Neumann-series eigenvalue at index `n` on a basis of size `basis`.
pub fn trace_eigenvalue(v: &Potential, n: usize, epsilon: f64, basis: usize, jmax: usize) -> Result<TraceEigenvalue> {
    let exec = Execution::default();
    let table = table_for(v, n, basis, exec)?;
    trace_eigenvalue_with(&table, v, n, epsilon, jmax, exec)
}

/// [`rvr_norms`] at index `n` on a basis of size `basis`.
pub fn rvr_norms_for(v: &Potential, n: usize, epsilon: f64, basis: usize, node_count: usize) -> Result<RvrNorms> {
    let exec = Execution::default();
    let table = table_for(v, n, basis, exec)?;
    let contour = Contour::new(v.alpha(), n, epsilon, node_count)?;
    rvr_norms(&table, &contour, v.operator_bound(), exec)
}
