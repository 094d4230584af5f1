//! Smallest eigenpairs of symmetric positive-definite operators.
//!
//! Two routes:
//!
//! * **dense**: full symmetric eigendecomposition, used up to
//!   [`SolverOptions::dense_limit`] unknowns;
//! * **krylov**: block Lanczos on the inverse operator with full
//!   reorthogonalization and explicit restarts. The inverse is applied
//!   through a banded (or dense) Cholesky factor, so the smallest eigenvalues
//!   of `A` become the best-separated ones of `A⁻¹`. The block size exceeds
//!   `k`, so repeated eigenvalues (the square's `5π²` pair) are all found.
//!
//! Residuals are measured on the inverse problem, `‖λ A⁻¹ v - v‖` for unit
//! `v`. The forward residual `‖A v - λ v‖ / λ` cannot drop below roughly
//! `ε ‖A‖ / λ` in floating point, which for high-order stencils on fine grids
//! is far above any useful tolerance.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::banded::BandedCholesky;
use crate::domain::Grid;
use crate::operators::{DiscreteOperator, OperatorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("requested k = {k} eigenpairs but operator dimension is {dim}")]
    TooMany { k: usize, dim: usize },
    #[error("k must be at least 1")]
    ZeroCount,
    #[error("operator is not symmetric positive definite")]
    NotSpd,
    #[error("no convergence after {iterations} block steps; best residuals {best_residuals:?}")]
    NotConverged {
        iterations: usize,
        best_residuals: Vec<f64>,
    },
    #[error("zero vector")]
    ZeroVector,
    #[error("vector has length {got}, operator dimension is {dim}")]
    DimensionMismatch { got: usize, dim: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Dense up to `dense_limit`, Krylov above.
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Dense,
    /// Dense decomposition refined by Krylov steps.
    DenseRefined,
    Krylov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    pub strategy: Strategy,
    pub dense_limit: usize,
    pub max_restarts: usize,
    pub keep_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 0,
            strategy: Strategy::Auto,
            dense_limit: 4000,
            max_restarts: 25,
            keep_vectors: true,
        }
    }
}

/// Ascending eigenvalues with optional unit eigenvectors and per-pair residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub residuals: Vec<f64>,
    pub method: SolveMethod,
}

impl Spectrum {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Applies `A⁻¹` for an SPD operator.
enum Inverse {
    Banded(BandedCholesky),
    Dense(Cholesky<f64, Dyn>),
    Power(Box<Inverse>, u32),
}

impl Inverse {
    fn new(op: &DiscreteOperator) -> Result<Self, EigenError> {
        if let Some((base, exponent)) = op.power_parts() {
            return Ok(Inverse::Power(Box::new(Inverse::new(base)?), exponent));
        }
        if let Some(m) = op.dense_matrix() {
            return Cholesky::new(m.clone()).map(Inverse::Dense).ok_or(EigenError::NotSpd);
        }
        let band = op.to_banded().ok_or(EigenError::NotSpd)?;
        band.cholesky().map(Inverse::Banded).ok_or(EigenError::NotSpd)
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        match self {
            Inverse::Banded(c) => c.solve_in_place(x),
            Inverse::Dense(c) => {
                let mut v = nalgebra::DVectorViewMut::from_slice(x, x.len());
                c.solve_mut(&mut v);
            }
            Inverse::Power(base, e) => {
                for _ in 0..*e {
                    base.solve_in_place(x);
                }
            }
        }
    }

    fn solve(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.solve_in_place(&mut y);
        y
    }
}

fn inverse_residual(inv: &Inverse, lambda: f64, v: &[f64]) -> f64 {
    let y = inv.solve(v);
    let r: Vec<f64> = y.iter().zip(v).map(|(a, b)| lambda * a - b).collect();
    Grid::norm(&r) / Grid::norm(v)
}

/// The `k` smallest eigenpairs of a symmetric positive-definite operator.
pub fn smallest_eigenpairs(
    op: &DiscreteOperator,
    k: usize,
    opts: &SolverOptions,
) -> Result<Spectrum, EigenError> {
    let dim = op.dim();
    if k == 0 {
        return Err(EigenError::ZeroCount);
    }
    if k > dim {
        return Err(EigenError::TooMany { k, dim });
    }
    if !op.is_symmetric() || !op.is_positive_definite() {
        return Err(EigenError::NotSpd);
    }
    let inv = Inverse::new(op)?;
    let use_dense = match opts.strategy {
        Strategy::Dense => true,
        Strategy::Krylov => false,
        Strategy::Auto => dim <= opts.dense_limit,
    };

    let spectrum = if use_dense {
        let dense = op.to_dense(dim)?;
        let eig = SymmetricEigen::new(dense);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let block = block_size(k, dim);
        let vectors: Vec<Vec<f64>> = order[..block]
            .iter()
            .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
            .collect();
        let values: Vec<f64> = order[..k].iter().map(|&j| eig.eigenvalues[j]).collect();
        if values[0] <= 0.0 {
            return Err(EigenError::NotSpd);
        }
        let residuals: Vec<f64> = (0..k).map(|i| inverse_residual(&inv, values[i], &vectors[i])).collect();
        if residuals.iter().all(|r| *r <= opts.tol) {
            Spectrum {
                eigenvalues: values,
                eigenvectors: Some(vectors.into_iter().take(k).collect()),
                residuals,
                method: SolveMethod::Dense,
            }
        } else {
            let mut s = block_krylov(&inv, dim, k, opts, Some(vectors))?;
            s.method = SolveMethod::DenseRefined;
            s
        }
    } else {
        block_krylov(&inv, dim, k, opts, None)?
    };

    Ok(if opts.keep_vectors {
        spectrum
    } else {
        Spectrum {
            eigenvectors: None,
            ..spectrum
        }
    })
}

fn block_size(k: usize, dim: usize) -> usize {
    (k + 2).min(dim)
}

/// Orthogonalizes `z` against `basis` (two classical Gram–Schmidt passes)
/// and normalizes it; `None` if nothing significant is left.
fn orthonormalize_against(basis: &[Vec<f64>], mut z: Vec<f64>) -> Option<Vec<f64>> {
    let original = Grid::norm(&z);
    if original == 0.0 {
        return None;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| Grid::dot(q, &z)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            for (zi, qi) in z.iter_mut().zip(q) {
                *zi -= c * qi;
            }
        }
    }
    let norm = Grid::norm(&z);
    if norm <= 1e-10 * original {
        return None;
    }
    z.iter_mut().for_each(|v| *v /= norm);
    Some(z)
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn block_krylov(
    inv: &Inverse,
    dim: usize,
    k: usize,
    opts: &SolverOptions,
    start: Option<Vec<Vec<f64>>>,
) -> Result<Spectrum, EigenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let block = block_size(k, dim);
    let max_basis = dim.min((20 * block).max(60));
    let mut seeds = start.unwrap_or_default();
    let mut best_residuals = vec![f64::INFINITY; k];
    let mut steps = 0;

    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
        let mut pending: Vec<Vec<f64>> = std::mem::take(&mut seeds);
        let mut attempts = 0;
        while pending.len() < block && attempts < 4 * block {
            pending.push(random_vector(&mut rng, dim));
            attempts += 1;
        }

        loop {
            // orthonormalize the pending block against the basis
            let before = basis.len();
            for z in pending.drain(..) {
                if basis.len() >= max_basis {
                    break;
                }
                if let Some(q) = orthonormalize_against(&basis, z) {
                    basis.push(q);
                }
            }
            if basis.len() == before && basis.len() < max_basis {
                // invariant subspace: continue with random directions
                for _ in 0..4 {
                    if let Some(q) = orthonormalize_against(&basis, random_vector(&mut rng, dim)) {
                        basis.push(q);
                        break;
                    }
                }
            }
            let fresh: Vec<Vec<f64>> = basis.drain(before..).collect();
            let added = fresh.len();
            for q in fresh {
                images.push(inv.solve(&q));
                basis.push(q);
            }
            steps += 1;

            let ritz = rayleigh_ritz(&basis, &images, k);
            if ritz.residuals.iter().sum::<f64>() < best_residuals.iter().sum::<f64>() {
                best_residuals = ritz.residuals.clone();
            }
            let complete = basis.len() >= dim;
            if complete || ritz.residuals.iter().all(|r| *r <= 0.5 * opts.tol) {
                let spectrum = finish(inv, ritz, k);
                if spectrum.residuals.iter().all(|r| *r <= opts.tol) {
                    return Ok(spectrum);
                }
                seeds = spectrum.eigenvectors.unwrap_or_default();
                break;
            }
            if added == 0 || basis.len() >= max_basis {
                seeds = ritz.vectors;
                break;
            }
            pending = images[images.len() - added..].to_vec();
        }
    }
    Err(EigenError::NotConverged {
        iterations: steps,
        best_residuals,
    })
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

/// Rayleigh–Ritz for `A⁻¹` on the basis; returns the `block` largest Ritz
/// values of `A⁻¹` as eigenvalue estimates of `A` (ascending) with the
/// vectors of all of them and the residuals of the first `k`.
fn rayleigh_ritz(basis: &[Vec<f64>], images: &[Vec<f64>], k: usize) -> Ritz {
    let m = basis.len();
    let mut h = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = 0.5 * (Grid::dot(&basis[i], &images[j]) + Grid::dot(&basis[j], &images[i]));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let keep = block_size(k, m).min(m);
    let dim = basis[0].len();
    let mut values = Vec::with_capacity(keep);
    let mut vectors = Vec::with_capacity(keep);
    let mut residuals = Vec::with_capacity(k);
    for (rank, &col) in order.iter().take(keep).enumerate() {
        let theta = eig.eigenvalues[col];
        let s = eig.eigenvectors.column(col);
        let mut y = vec![0.0; dim];
        let mut w = vec![0.0; dim];
        for (j, sj) in s.iter().enumerate() {
            for t in 0..dim {
                y[t] += sj * basis[j][t];
                w[t] += sj * images[j][t];
            }
        }
        if rank < k {
            let r: Vec<f64> = w.iter().zip(&y).map(|(a, b)| a - theta * b).collect();
            residuals.push(if theta > 0.0 { Grid::norm(&r) / theta } else { f64::INFINITY });
        }
        values.push(1.0 / theta);
        vectors.push(y);
    }
    while residuals.len() < k {
        residuals.push(f64::INFINITY);
    }
    Ritz { values, vectors, residuals }
}

fn finish(inv: &Inverse, ritz: Ritz, k: usize) -> Spectrum {
    let mut pairs: Vec<(f64, Vec<f64>)> = ritz.values.into_iter().zip(ritz.vectors).take(k).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let residuals = pairs.iter().map(|(l, v)| inverse_residual(inv, *l, v)).collect();
    let (eigenvalues, vectors): (Vec<f64>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    Spectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
        residuals,
        method: SolveMethod::Krylov,
    }
}

/// `⟨Op u, u⟩ / ⟨u, u⟩`.
pub fn rayleigh_quotient(op: &DiscreteOperator, u: &[f64]) -> Result<f64, EigenError> {
    if u.len() != op.dim() {
        return Err(EigenError::DimensionMismatch { got: u.len(), dim: op.dim() });
    }
    let uu = Grid::dot(u, u);
    if uu == 0.0 {
        return Err(EigenError::ZeroVector);
    }
    Ok(Grid::dot(&op.apply(u), u) / uu)
}
