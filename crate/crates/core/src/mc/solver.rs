//! Spectral norm and smallest singular value.
//!
//! A symmetric matrix is split into the connected components of its
//! nonzero pattern; the norm is the largest component norm. Components of
//! size one are read off directly, small ones go to a dense symmetric
//! eigensolver, and large ones to Lanczos with full reorthogonalisation.
//! Ritz extremes come from Sturm bisection on the tridiagonal matrix, and
//! their residuals `β_k |y_k|` from inverse iteration, so the stopping rule
//! bounds the eigenvalue error directly.

use nalgebra::{DMatrix, DVector};
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::SymmetricSupport;
use crate::rng::{stream, Domain};

/// Components with at most this many nodes use the dense eigensolver.
pub const DENSE_CUTOFF: usize = 64;
/// Default Lanczos iteration cap.
pub const DEFAULT_MAX_ITER: usize = 500;
const LANCZOS_START_SEED: u64 = 0x5eed_1a2c_705e_ed00;
/// Above this fill ratio the Lanczos operator is stored densely.
const DENSE_FILL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance in `(0, 1e-3]`.
    pub tol: f64,
    /// Lanczos iteration cap; `None` means [`DEFAULT_MAX_ITER`].
    pub max_iter: Option<usize>,
    pub method: Method,
}

impl SolverOptions {
    pub fn new(tol: f64) -> Result<Self> {
        check_tolerance(tol)?;
        Ok(SolverOptions {
            tol,
            max_iter: None,
            method: Method::Auto,
        })
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = Some(max_iter.max(1));
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }
}

pub fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(Error::parameter(
            "tolerance",
            format!("must lie in (0, 1e-3], got {tol}"),
        ))
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c || r == 0 {
        return Err(Error::Shape(format!(
            "spectral_norm expects a nonempty square matrix, got {r}x{c}"
        )));
    }
    if let Some(x) = m.iter().find(|x| !x.is_finite()) {
        return Err(Error::Validation(format!(
            "matrix contains non-finite entry {x}"
        )));
    }
    for j in 0..r {
        for i in (j + 1)..r {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::Shape(format!(
                    "matrix is not symmetric: M[{i}][{j}] = {} but M[{j}][{i}] = {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(r)
}

/// Largest absolute eigenvalue of an exactly symmetric matrix.
pub fn spectral_norm(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    spectral_norm_with(m, &SolverOptions::new(tol)?)
}

pub fn spectral_norm_with(m: &DMatrix<f64>, opts: &SolverOptions) -> Result<f64> {
    check_tolerance(opts.tol)?;
    let n = check_symmetric(m)?;
    let support = SymmetricSupport::from_lower(n, |i, j| m[(i, j)]);
    let mut best = 0.0f64;
    let mut local = Vec::new();
    for comp in &support.components {
        local.clear();
        local.extend(
            comp.entries
                .iter()
                .map(|&(li, lj, gi, gj, _)| (li, lj, m[(gi, gj)])),
        );
        best = best.max(component_norm(comp.nodes.len(), &local, opts)?);
    }
    Ok(best)
}

/// Norm of one symmetric block given by its lower-triangular entries
/// `(i, j, value)` with `i >= j` in local coordinates.
pub fn component_norm(
    dim: usize,
    lower: &[(usize, usize, f64)],
    opts: &SolverOptions,
) -> Result<f64> {
    if dim == 1 {
        return Ok(lower.iter().map(|e| e.2.abs()).fold(0.0, f64::max));
    }
    let dense = match opts.method {
        Method::Dense => true,
        Method::Lanczos => false,
        Method::Auto => dim <= DENSE_CUTOFF,
    };
    if dense {
        let mut a = DMatrix::zeros(dim, dim);
        for &(i, j, v) in lower {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        return Ok(a
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs())));
    }
    lanczos_norm(&Operator::build(dim, lower), opts)
}

enum Operator {
    Dense(DMatrix<f64>),
    Sparse {
        dim: usize,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
}

impl Operator {
    fn build(dim: usize, lower: &[(usize, usize, f64)]) -> Self {
        let stored = lower
            .iter()
            .map(|&(i, j, _)| if i == j { 1 } else { 2 })
            .sum::<usize>();
        if stored as f64 > DENSE_FILL * (dim * dim) as f64 {
            let mut a = DMatrix::zeros(dim, dim);
            for &(i, j, v) in lower {
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
            return Operator::Dense(a);
        }
        let mut counts = vec![0usize; dim + 1];
        for &(i, j, _) in lower {
            counts[i + 1] += 1;
            if i != j {
                counts[j + 1] += 1;
            }
        }
        for r in 0..dim {
            counts[r + 1] += counts[r];
        }
        let row_ptr = counts.clone();
        let mut fill = counts;
        let mut cols = vec![0; stored];
        let mut vals = vec![0.0; stored];
        let mut put = |r: usize, c: usize, v: f64| {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        };
        for &(i, j, v) in lower {
            put(i, j, v);
            if i != j {
                put(j, i, v);
            }
        }
        Operator::Sparse {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Operator::Dense(a) => a.nrows(),
            Operator::Sparse { dim, .. } => *dim,
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            // symmetric, so row i equals column i, which is contiguous
            Operator::Dense(a) => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = dot(a.column(i).as_slice(), x);
                }
            }
            Operator::Sparse {
                row_ptr,
                cols,
                vals,
                ..
            } => {
                for (r, yi) in y.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for k in row_ptr[r]..row_ptr[r + 1] {
                        s += vals[k] * x[cols[k]];
                    }
                    *yi = s;
                }
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn start_vector(dim: usize) -> Vec<f64> {
    let mut rng = stream(LANCZOS_START_SEED, Domain::Lanczos, &[dim as u64]);
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

fn lanczos_norm(op: &Operator, opts: &SolverOptions) -> Result<f64> {
    let dim = op.dim();
    let cap = opts.max_iter.unwrap_or(DEFAULT_MAX_ITER).min(dim);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    let mut w = vec![0.0; dim];
    basis.push(start_vector(dim));
    let mut best = 0.0f64;
    let mut residual = f64::INFINITY;
    for k in 0..cap {
        op.apply(&basis[k], &mut w);
        let a = dot(&basis[k], &w);
        alpha.push(a);
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
            }
        }
        let b = dot(&w, &w).sqrt();
        let (lo, hi) = tridiagonal_extremes(&alpha, &beta);
        let scale = lo.abs().max(hi.abs());
        best = scale;
        let r_hi = b * last_component(&alpha, &beta, hi).abs();
        let r_lo = b * last_component(&alpha, &beta, lo).abs();
        residual = r_hi.max(r_lo);
        let breakdown = b <= 64.0 * f64::EPSILON * scale.max(alpha_scale(&alpha, &beta));
        if breakdown || residual <= opts.tol * scale || k + 1 == dim {
            return Ok(best);
        }
        beta.push(b);
        if k + 1 < cap {
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
    Err(Error::Convergence {
        best_estimate: best,
        residual: if best > 0.0 {
            residual / best
        } else {
            residual
        },
        iterations: cap,
    })
}

fn alpha_scale(alpha: &[f64], beta: &[f64]) -> f64 {
    alpha.iter().chain(beta).fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let mut count = 0;
    let mut d = 1.0;
    for (i, &a) in alpha.iter().enumerate() {
        let off = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1] / d
        };
        d = a - x - off;
        if d == 0.0 {
            d = -tiny;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest and largest eigenvalues of the leading `alpha.len()` block.
fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let off = |i: usize| beta.get(i).copied().unwrap_or(0.0).abs();
    let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, &a) in alpha.iter().enumerate() {
        let r = if i > 0 { off(i - 1) } else { 0.0 } + if i + 1 < k { off(i) } else { 0.0 };
        glo = glo.min(a - r);
        ghi = ghi.max(a + r);
    }
    let pad =
        (ghi - glo).abs().max(ghi.abs()).max(glo.abs()) * 4.0 * f64::EPSILON + f64::MIN_POSITIVE;
    let (glo, ghi) = (glo - pad, ghi + pad);
    let bisect = |target: usize| {
        // smallest x with sturm_count(x) >= target
        let (mut lo, mut hi) = (glo, ghi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(alpha, &beta[..k - 1], mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (bisect(1), bisect(k))
}

/// Last component of the unit eigenvector of the tridiagonal for the
/// eigenvalue `theta`, by inverse iteration.
fn last_component(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let k = alpha.len();
    if k == 1 {
        return 1.0;
    }
    let scale = alpha_scale(alpha, &beta[..k - 1]).max(f64::MIN_POSITIVE);
    let shift = theta + scale * 1e3 * f64::EPSILON * if theta >= 0.0 { 1.0 } else { -1.0 };
    let mut y = vec![1.0 / (k as f64).sqrt(); k];
    for _ in 0..3 {
        y = solve_shifted_tridiagonal(alpha, &beta[..k - 1], shift, &y);
        let n = dot(&y, &y).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return 1.0;
        }
        y.iter_mut().for_each(|v| *v /= n);
    }
    y[k - 1]
}

/// Solves `(T − s I) x = rhs` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting.
fn solve_shifted_tridiagonal(alpha: &[f64], beta: &[f64], s: f64, rhs: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let tiny = f64::MIN_POSITIVE.sqrt();
    // row i holds (d[i], u[i], u2[i]) on columns (i, i+1, i+2) after elimination
    let mut d: Vec<f64> = alpha.iter().map(|a| a - s).collect();
    let mut u: Vec<f64> = beta.to_vec();
    u.push(0.0);
    let mut u2 = vec![0.0; n];
    let mut l: Vec<f64> = beta.to_vec();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if l[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (di, ui, bi) = (d[i], u[i], b[i]);
            d[i] = l[i];
            u[i] = d[i + 1];
            u2[i] = u[i + 1];
            b[i] = b[i + 1];
            let m = di / d[i];
            d[i + 1] = ui - m * u[i];
            u[i + 1] = -m * u2[i];
            b[i + 1] = bi - m * b[i];
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let m = l[i] / d[i];
            d[i + 1] -= m * u[i];
            b[i + 1] -= m * b[i];
            u2[i] = 0.0;
        }
        l[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        if i + 1 < n {
            v -= u[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        x[i] = v / d[i];
    }
    x
}

/// Smallest singular value `s_n(A)` of an `N × n` matrix with `N ≥ n`.
pub fn smallest_singular(a: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = a.shape();
    if rows < cols || cols == 0 {
        return Err(Error::Shape(format!(
            "smallest_singular expects N >= n >= 1, got {rows}x{cols}"
        )));
    }
    if let Some(x) = a.iter().find(|x| !x.is_finite()) {
        return Err(Error::Validation(format!(
            "matrix contains non-finite entry {x}"
        )));
    }
    Ok(a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Largest singular value.
pub fn largest_singular(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadformCheck {
    /// `max |xᵀMx|` over the random directions and the top eigenvector.
    pub value: f64,
    /// Maximum over the random directions alone.
    pub random_only: f64,
    pub spectral_norm: f64,
    pub directions: usize,
}

/// Lower estimate of `‖M‖ = sup_{‖x‖=1} |xᵀMx|` from `directions` uniform
/// unit vectors plus the eigenvector of the extreme eigenvalue.
pub fn quadform_sup_check(
    m: &DMatrix<f64>,
    directions: usize,
    seed: u64,
    tol: f64,
) -> Result<QuadformCheck> {
    check_tolerance(tol)?;
    let n = check_symmetric(m)?;
    if directions == 0 {
        return Err(Error::parameter("directions", "must be >= 1"));
    }
    let quad = |x: &DVector<f64>| x.dot(&(m * x)).abs();
    let mut random_only = 0.0f64;
    for d in 0..directions {
        let mut rng = stream(seed, Domain::Direction, &[d as u64]);
        let x: DVector<f64> = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let norm = x.norm();
        if norm > 0.0 {
            random_only = random_only.max(quad(&(x / norm)));
        }
    }
    let eig = m.clone().symmetric_eigen();
    let top = eig.eigenvalues.iamax();
    let v = eig.eigenvectors.column(top).into_owned();
    let norm = spectral_norm(m, tol)?;
    Ok(QuadformCheck {
        value: random_only.max(quad(&v)),
        random_only,
        spectral_norm: norm,
        directions,
    })
}
