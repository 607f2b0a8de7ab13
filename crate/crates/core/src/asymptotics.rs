//! Large-`E` analysis of the exact wiring measure.
//!
//! `H(α; e) = Σ_kj e^{α⁻_j + α⁺_k} Q_kj − α·e` is convex in the double vector
//! `α = (α⁻, α⁺)` and constant along `1̃ = 1⁻ − 1⁺`. Its gauge-fixed minimiser
//! `α*` drives a Laplace approximation of the partition integral and the
//! limiting edge-type frequencies.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree_model::EdgeTypeDist;
use crate::exact_kernel::{log_tilted_partition, EnumerationCaps, ExactError, Margins};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("Newton solve did not converge in {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },
    #[error("margin {side}{index} = {value} is incompatible with the support of Q's margins")]
    UnsupportedMargin {
        side: char,
        index: usize,
        value: f64,
    },
    #[error("margins must satisfy Σx⁻ = Σx⁺ = 1 (got {minus} and {plus})")]
    BadMargin { minus: f64, plus: f64 },
    #[error("projected Hessian is singular (det = {0:e})")]
    SingularHessian(f64),
    #[error("double vector has K = {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A `2K`-component vector `(v⁻_1..v⁻_K, v⁺_1..v⁺_K)`. Degree 0 is excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleVector {
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
}

impl DoubleVector {
    pub fn zeros(max_degree: usize) -> Self {
        Self {
            minus: vec![0.0; max_degree],
            plus: vec![0.0; max_degree],
        }
    }

    pub fn new(minus: Vec<f64>, plus: Vec<f64>) -> Result<Self, AsymptoticsError> {
        if minus.len() != plus.len() || minus.is_empty() {
            return Err(AsymptoticsError::Dimension {
                got: plus.len(),
                expected: minus.len(),
            });
        }
        Ok(Self { minus, plus })
    }

    /// `1 = 1⁻ + 1⁺`.
    pub fn ones(max_degree: usize) -> Self {
        Self {
            minus: vec![1.0; max_degree],
            plus: vec![1.0; max_degree],
        }
    }

    /// `1̃ = 1⁻ − 1⁺`.
    pub fn one_tilde(max_degree: usize) -> Self {
        Self {
            minus: vec![1.0; max_degree],
            plus: vec![-1.0; max_degree],
        }
    }

    /// `δ_jk = δ⁻_j + δ⁺_k`.
    pub fn delta_jk(max_degree: usize, j: usize, k: usize) -> Self {
        let mut v = Self::zeros(max_degree);
        v.minus[j - 1] = 1.0;
        v.plus[k - 1] = 1.0;
        v
    }

    /// Stub margins as a double vector (degree 0 dropped).
    pub fn from_margins(m: &Margins) -> Self {
        Self {
            minus: m.minus[1..].iter().map(|&v| v as f64).collect(),
            plus: m.plus[1..].iter().map(|&v| v as f64).collect(),
        }
    }

    /// `e / E`.
    pub fn normalized_margins(m: &Margins) -> Result<Self, AsymptoticsError> {
        let e = m.edges()? as f64;
        Ok(Self::from_margins(m).scale(1.0 / e))
    }

    /// `(Q⁻, Q⁺)`.
    pub fn q_margins(q: &EdgeTypeDist) -> Self {
        Self {
            minus: q.minus()[1..].to_vec(),
            plus: q.plus()[1..].to_vec(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.minus.len()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.minus
            .iter()
            .zip(&other.minus)
            .chain(self.plus.iter().zip(&other.plus))
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            minus: self.minus.iter().map(|v| v * s).collect(),
            plus: self.plus.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            minus: self
                .minus
                .iter()
                .zip(&other.minus)
                .map(|(a, b)| a + b)
                .collect(),
            plus: self
                .plus
                .iter()
                .zip(&other.plus)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Flat layout: minus part then plus part.
    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_iterator(
            2 * self.max_degree(),
            self.minus.iter().chain(&self.plus).copied(),
        )
    }

    pub fn from_dvector(v: &DVector<f64>) -> Self {
        let k = v.len() / 2;
        Self {
            minus: v.iter().take(k).copied().collect(),
            plus: v.iter().skip(k).copied().collect(),
        }
    }

    /// `α⁻_j + α⁺_k = α·δ_jk`.
    fn pair(&self, j: usize, k: usize) -> f64 {
        self.minus[j - 1] + self.plus[k - 1]
    }
}

fn check_dim(v: &DoubleVector, q: &EdgeTypeDist) -> Result<(), AsymptoticsError> {
    let kmax = q.support().max_degree();
    if v.max_degree() != kmax || v.plus.len() != kmax {
        return Err(AsymptoticsError::Dimension {
            got: v.max_degree(),
            expected: kmax,
        });
    }
    Ok(())
}

/// `H(α; e)`.
pub fn h_value(alpha: &DoubleVector, e: &DoubleVector, q: &EdgeTypeDist) -> f64 {
    let kmax = q.support().max_degree();
    let mut s = 0.0;
    for k in 1..=kmax {
        for j in 1..=kmax {
            let qkj = q.prob(k, j);
            if qkj > 0.0 {
                s += alpha.pair(j, k).exp() * qkj;
            }
        }
    }
    s - alpha.dot(e)
}

/// `∇H = Σ_kj δ_jk e^{α·δ_jk} Q_kj − e`.
pub fn h_gradient(alpha: &DoubleVector, e: &DoubleVector, q: &EdgeTypeDist) -> DoubleVector {
    let kmax = q.support().max_degree();
    let mut g = e.scale(-1.0);
    for k in 1..=kmax {
        for j in 1..=kmax {
            let qkj = q.prob(k, j);
            if qkj > 0.0 {
                let w = alpha.pair(j, k).exp() * qkj;
                g.minus[j - 1] += w;
                g.plus[k - 1] += w;
            }
        }
    }
    g
}

/// `∇²H = Σ_kj δ_jk δ_jkᵀ e^{α·δ_jk} Q_kj`, in the flat layout. Independent of `e`.
pub fn h_hessian(alpha: &DoubleVector, q: &EdgeTypeDist) -> DMatrix<f64> {
    let kmax = q.support().max_degree();
    let mut h = DMatrix::zeros(2 * kmax, 2 * kmax);
    for k in 1..=kmax {
        for j in 1..=kmax {
            let qkj = q.prob(k, j);
            if qkj > 0.0 {
                let w = alpha.pair(j, k).exp() * qkj;
                let (a, b) = (j - 1, kmax + k - 1);
                h[(a, a)] += w;
                h[(b, b)] += w;
                h[(a, b)] += w;
                h[(b, a)] += w;
            }
        }
    }
    h
}

/// `H(−iu; e)` for real `u`, the exponent of the Fourier integrand.
pub fn h_complex(u: &DoubleVector, e: &DoubleVector, q: &EdgeTypeDist) -> Complex64 {
    let kmax = q.support().max_degree();
    let mut s = Complex64::new(0.0, 0.0);
    for k in 1..=kmax {
        for j in 1..=kmax {
            let qkj = q.prob(k, j);
            if qkj > 0.0 {
                s += Complex64::from_polar(qkj, -u.pair(j, k));
            }
        }
    }
    s + Complex64::new(0.0, u.dot(e))
}

/// `exp H(−iu; e)`; its integral over `[0, 2π)^{2K}` is `(2π)^{2K} Z_0(e)`.
pub fn integrand(u: &DoubleVector, e: &DoubleVector, q: &EdgeTypeDist) -> Complex64 {
    h_complex(u, e, q).exp()
}

/// Coordinates with positive `Q` margin, as flat indices.
fn active_indices(q: &EdgeTypeDist) -> Vec<usize> {
    let kmax = q.support().max_degree();
    let mut idx = Vec::new();
    for j in 1..=kmax {
        if q.minus()[j] > 0.0 {
            idx.push(j - 1);
        }
    }
    for k in 1..=kmax {
        if q.plus()[k] > 0.0 {
            idx.push(kmax + k - 1);
        }
    }
    idx
}

/// Orthonormal basis (as columns) of the complement of `1̃` restricted to
/// `active` coordinates of a `2K` layout: columns `2..n` of the Householder
/// reflection taking the normalised `1̃` to the first unit vector.
pub fn gauge_basis_for(max_degree: usize, active: &[usize]) -> DMatrix<f64> {
    let n = active.len();
    let mut u = DVector::from_iterator(
        n,
        active
            .iter()
            .map(|&i| if i < max_degree { 1.0 } else { -1.0 }),
    );
    u /= u.norm();
    let mut v = u.clone();
    v[0] -= 1.0;
    let h = if v.norm() < 1e-14 {
        DMatrix::identity(n, n)
    } else {
        let vn = v.norm_squared();
        DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vn)
    };
    h.columns(1, n - 1).into_owned()
}

/// Orthonormal basis of `1̃⊥` in the full `2K` layout.
pub fn gauge_basis(max_degree: usize) -> DMatrix<f64> {
    let all: Vec<usize> = (0..2 * max_degree).collect();
    gauge_basis_for(max_degree, &all)
}

fn restrict(h: &DMatrix<f64>, active: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(active.len(), active.len(), |r, c| h[(active[r], active[c])])
}

/// `det(Bᵀ ∇²H B)` for an orthonormal basis `B` of `1̃⊥` over the active coordinates.
pub fn det0_hessian(alpha: &DoubleVector, q: &EdgeTypeDist) -> Result<f64, AsymptoticsError> {
    check_dim(alpha, q)?;
    let active = active_indices(q);
    let b = gauge_basis_for(q.support().max_degree(), &active);
    det0_hessian_with_basis(alpha, q, &b)
}

/// As [`det0_hessian`] with a caller-supplied basis of the active `1̃⊥`.
pub fn det0_hessian_with_basis(
    alpha: &DoubleVector,
    q: &EdgeTypeDist,
    basis: &DMatrix<f64>,
) -> Result<f64, AsymptoticsError> {
    let active = active_indices(q);
    let h = restrict(&h_hessian(alpha, q), &active);
    let d = (basis.transpose() * h * basis).determinant();
    if !(d.is_finite() && d > 0.0) {
        return Err(AsymptoticsError::SingularHessian(d));
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointResult {
    pub alpha: DoubleVector,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub h_at_min: f64,
    pub hessian_projected_det: f64,
}

const MARGIN_TOL: f64 = 1e-9;

fn check_margins(x: &DoubleVector, q: &EdgeTypeDist) -> Result<(), AsymptoticsError> {
    check_dim(x, q)?;
    let (sm, sp): (f64, f64) = (x.minus.iter().sum(), x.plus.iter().sum());
    if (sm - 1.0).abs() > MARGIN_TOL || (sp - 1.0).abs() > MARGIN_TOL {
        return Err(AsymptoticsError::BadMargin {
            minus: sm,
            plus: sp,
        });
    }
    let kmax = q.support().max_degree();
    for i in 1..=kmax {
        for (side, v, qm) in [
            ('-', x.minus[i - 1], q.minus()[i]),
            ('+', x.plus[i - 1], q.plus()[i]),
        ] {
            let bad = !v.is_finite() || v < 0.0 || (qm > 0.0) != (v > 0.0);
            if bad {
                return Err(AsymptoticsError::UnsupportedMargin {
                    side,
                    index: i,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Gauge-fixed minimiser of `H(·; x)` by damped Newton on `1̃⊥`, started at 0.
pub fn solve_critical_point(
    x: &DoubleVector,
    q: &EdgeTypeDist,
    opts: SolverOptions,
) -> Result<CriticalPointResult, AsymptoticsError> {
    solve_critical_point_from(x, q, opts, &DoubleVector::zeros(q.support().max_degree()))
}

/// As [`solve_critical_point`] from an arbitrary start; the start is projected
/// onto the gauge plane `1̃·α = 0` first.
pub fn solve_critical_point_from(
    x: &DoubleVector,
    q: &EdgeTypeDist,
    opts: SolverOptions,
    start: &DoubleVector,
) -> Result<CriticalPointResult, AsymptoticsError> {
    check_margins(x, q)?;
    check_dim(start, q)?;
    let kmax = q.support().max_degree();
    let active = active_indices(q);
    let b = gauge_basis_for(kmax, &active);
    let embed = |beta: &DVector<f64>| {
        let a = &b * beta;
        let mut full = DVector::zeros(2 * kmax);
        for (r, &i) in active.iter().enumerate() {
            full[i] = a[r];
        }
        DoubleVector::from_dvector(&full)
    };
    let start_v = start.to_dvector();
    let start_active = DVector::from_iterator(active.len(), active.iter().map(|&i| start_v[i]));
    let mut beta = b.transpose() * start_active;
    let reduced_grad = |alpha: &DoubleVector| {
        let g = h_gradient(alpha, x, q).to_dvector();
        let ga = DVector::from_iterator(active.len(), active.iter().map(|&i| g[i]));
        (b.transpose() * &ga, g.norm())
    };

    let mut alpha = embed(&beta);
    let mut f = h_value(&alpha, x, q);
    let (mut g, mut gnorm) = reduced_grad(&alpha);
    let mut iterations = 0;
    while gnorm > opts.tol {
        if iterations >= opts.max_iter {
            return Err(AsymptoticsError::NoConvergence {
                iterations,
                gradient_norm: gnorm,
            });
        }
        iterations += 1;
        let h = b.transpose() * restrict(&h_hessian(&alpha, q), &active) * &b;
        let step = match h.clone().cholesky() {
            Some(c) => -c.solve(&g),
            None => -&g,
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        loop {
            let cand = &beta + &step * t;
            let a = embed(&cand);
            let fc = h_value(&a, x, q);
            let (gc, gn) = reduced_grad(&a);
            if fc <= f + 1e-4 * t * slope || (gn < gnorm && fc <= f + 1e-12 * f.abs()) {
                beta = cand;
                alpha = a;
                f = fc;
                g = gc;
                gnorm = gn;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(AsymptoticsError::NoConvergence {
                    iterations,
                    gradient_norm: gnorm,
                });
            }
        }
    }
    let det = det0_hessian(&alpha, q)?;
    Ok(CriticalPointResult {
        alpha,
        gradient_norm: gnorm,
        iterations,
        h_at_min: f,
        hessian_projected_det: det,
    })
}

/// Number of active coordinates `n` (equal to `2K` when `Q` has full margins).
fn active_dim(q: &EdgeTypeDist) -> usize {
    active_indices(q).len()
}

/// `log ℐ(e) = 2K log 2π + log Z_0(e)`.
pub fn log_exact_i(
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, AsymptoticsError> {
    let kmax = q.support().max_degree() as f64;
    Ok(2.0 * kmax * (2.0 * PI).ln() + log_tilted_partition(margins, q, None, caps)?)
}

/// `ℐ(e) = (2π)^{2K} Z_0(e)`.
pub fn exact_i(
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, AsymptoticsError> {
    Ok(log_exact_i(margins, q, caps)?.exp())
}

/// Log of `(2π)^{K+1/2} E^{1/2−K} e^{−E log E + E H(α*(x); x)} [det_0 ∇²H]^{−1/2}`
/// with `x = e/E`. When some `Q` margins vanish, `2K` is replaced by the number
/// of active coordinates.
pub fn log_laplace_i_approx(margins: &Margins, q: &EdgeTypeDist) -> Result<f64, AsymptoticsError> {
    let e = margins.edges()? as f64;
    let x = DoubleVector::normalized_margins(margins)?;
    let cp = solve_critical_point(&x, q, SolverOptions::default())?;
    let n = active_dim(q) as f64;
    Ok(
        (n + 1.0) / 2.0 * (2.0 * PI).ln() + (1.0 - n) / 2.0 * e.ln() - e * e.ln() + e * cp.h_at_min
            - 0.5 * cp.hessian_projected_det.ln(),
    )
}

pub fn laplace_i_approx(margins: &Margins, q: &EdgeTypeDist) -> Result<f64, AsymptoticsError> {
    Ok(log_laplace_i_approx(margins, q)?.exp())
}

/// Limiting `E⁻¹ e_kj` at normalised margins `x`: `Q_kj exp(α*(x)·δ_jk)`.
pub fn asymptotic_edge_mean(
    x: &DoubleVector,
    q: &EdgeTypeDist,
    k: usize,
    j: usize,
) -> Result<f64, AsymptoticsError> {
    let cp = solve_critical_point(x, q, SolverOptions::default())?;
    Ok(edge_mean_at(&cp.alpha, q, k, j))
}

/// All limiting frequencies, indexed `[k][j]` over `0..=K`.
pub fn asymptotic_edge_means(
    x: &DoubleVector,
    q: &EdgeTypeDist,
) -> Result<Vec<Vec<f64>>, AsymptoticsError> {
    let cp = solve_critical_point(x, q, SolverOptions::default())?;
    let dim = q.support().dim();
    Ok((0..dim)
        .map(|k| {
            (0..dim)
                .map(|j| {
                    if k == 0 || j == 0 {
                        0.0
                    } else {
                        edge_mean_at(&cp.alpha, q, k, j)
                    }
                })
                .collect()
        })
        .collect())
}

fn edge_mean_at(alpha: &DoubleVector, q: &EdgeTypeDist, k: usize, j: usize) -> f64 {
    let qkj = q.prob(k, j);
    if qkj == 0.0 {
        0.0
    } else {
        qkj * alpha.pair(j, k).exp()
    }
}
