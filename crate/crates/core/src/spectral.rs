//! Largest adjacency eigenvalue (spectral radius) and small dense spectra.

use nalgebra::{DMatrix, RealField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::CollaborationNetwork;
use crate::scalar::{dot, norm2, Scalar};

/// Default node limit for the dense eigensolve.
pub const DEFAULT_DENSE_LIMIT: usize = 2_000;
pub const DEFAULT_MAX_ITER: usize = 100_000;

const START_SEED: u64 = 0x5eed;
const START_JITTER: f64 = 1e-2;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e}, estimate {estimate}); raise max_iter")]
    NotConverged {
        iterations: usize,
        residual: f64,
        estimate: f64,
    },
    #[error("dense spectrum refused for {n} nodes (limit {limit}); use largest_eigenvalue instead")]
    TooLarge { n: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult<T> {
    pub kappa1: T,
    pub iterations: usize,
    /// `‖A v − κ₁ v‖₂` for the returned unit vector `v`.
    pub residual: T,
}

/// Spectral radius of the adjacency matrix by power iteration.
///
/// Iterates on `A + I` so that bipartite graphs, whose spectrum is symmetric
/// about zero, still have a strictly dominant eigenvalue. The eigenvalue
/// estimate is the Rayleigh quotient of `A`; iteration stops once the residual
/// `‖A v − κ v‖₂` drops to `tol`. The start vector is all-ones with a fixed
/// seeded perturbation, so results are deterministic.
pub fn largest_eigenvalue<T: Scalar>(
    net: &CollaborationNetwork,
    tol: T,
    max_iter: usize,
) -> Result<SpectralResult<T>, SpectralError> {
    let n = net.node_count();
    if n == 0 {
        return Err(SpectralError::EmptyNetwork);
    }
    if !(tol > T::zero()) {
        return Err(SpectralError::InvalidTolerance(tol.as_f64()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<T> = (0..n)
        .map(|_| T::cast(1.0 + START_JITTER * rng.random::<f64>()))
        .collect();
    normalize(&mut v);

    let mut w = vec![T::zero(); n];
    let mut estimate = T::zero();
    let mut residual = T::infinity();
    for iteration in 1..=max_iter {
        net.apply_adjacency_into(&v, &mut w);
        estimate = dot(&v, &w);
        residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| {
                let r = *wi - estimate * *vi;
                r * r
            })
            .sum::<T>()
            .sqrt();
        if residual <= tol {
            return Ok(SpectralResult {
                kappa1: estimate.max(T::zero()),
                iterations: iteration,
                residual,
            });
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi += *wi;
        }
        normalize(&mut v);
    }
    Err(SpectralError::NotConverged {
        iterations: max_iter,
        residual: residual.as_f64(),
        estimate: estimate.as_f64(),
    })
}

/// [`largest_eigenvalue`] with the type's default tolerance and iteration cap.
pub fn spectral_radius<T: Scalar>(net: &CollaborationNetwork) -> Result<SpectralResult<T>, SpectralError> {
    largest_eigenvalue(net, T::default_tolerance(), DEFAULT_MAX_ITER)
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let norm = norm2(v);
    if norm > T::zero() {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// All adjacency eigenvalues in descending order via a dense symmetric
/// eigensolve. Refuses networks with more than `n_limit` nodes.
pub fn full_spectrum_small<T>(net: &CollaborationNetwork, n_limit: usize) -> Result<Vec<T>, SpectralError>
where
    T: Scalar + RealField,
{
    let n = net.node_count();
    if n == 0 {
        return Err(SpectralError::EmptyNetwork);
    }
    if n > n_limit {
        return Err(SpectralError::TooLarge { n, limit: n_limit });
    }
    let mut dense = DMatrix::<T>::zeros(n, n);
    for &(a, b) in net.edges() {
        dense[(a, b)] = <T as num_traits::One>::one();
        dense[(b, a)] = <T as num_traits::One>::one();
    }
    let mut values: Vec<T> = dense.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(values)
}
