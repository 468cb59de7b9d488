//! Target distributions `pi ∝ exp(-U)` used by the benchmarks.

mod crossed;
mod data;
mod double_well;
mod linear;
mod logistic;
pub mod quadrature;
mod truth;

pub use crossed::CrossedEffects;
pub use data::{ar1_covariance, synthesize_data, DataKind, SyntheticDataset, LINEAR_NOISE_VAR};
pub use double_well::DoubleWell;
pub use linear::LinearRegression;
pub use logistic::LogisticRegression;
pub use truth::{
    closed_form_posterior, double_well_truth, reference_truth, GroundTruth, Provenance,
    ReferenceSpec, TestFamily,
};

use crate::scalar::Real;

/// Smoothness `L` and strong-convexity `M` of a potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants<T> {
    pub smoothness: T,
    pub convexity: T,
}

impl<T: Real> Constants<T> {
    /// Largest step for which the LMC map is a contraction, `2/(L+M)`.
    pub fn max_step(&self) -> T {
        T::lit(2.0) / (self.smoothness + self.convexity)
    }

    /// Contraction factor `1 - hM`.
    pub fn rho(&self, h: T) -> T {
        T::one() - h * self.convexity
    }
}

/// Negative log-density of a target.
pub trait Potential<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, theta: &[T]) -> T;

    /// Writes `grad U(theta)` into `grad`.
    fn gradient(&self, theta: &[T], grad: &mut [T]);

    fn constants(&self) -> Option<Constants<T>> {
        None
    }

    /// Per-datum decomposition for stochastic gradients, when available.
    fn minibatch(&self) -> Option<&dyn MinibatchGradient<T>> {
        None
    }
}

/// `U = prior(theta) + sum_i loss_i(theta)`.
pub trait MinibatchGradient<T: Real>: Send + Sync {
    fn data_len(&self) -> usize;

    /// Writes the prior gradient into `grad`.
    fn prior_gradient(&self, theta: &[T], grad: &mut [T]);

    /// Adds `scale * grad loss_i(theta)` to `grad`.
    fn add_datum_gradient(&self, i: usize, theta: &[T], scale: T, grad: &mut [T]);
}

/// `U(theta) = |theta|^2 / 2`, the standard normal target (`L = M = 1`).
#[derive(Clone, Copy, Debug)]
pub struct StandardNormal {
    pub dim: usize,
}

impl<T: Real> Potential<T> for StandardNormal {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, theta: &[T]) -> T {
        theta.iter().map(|&t| t * t).sum::<T>() * T::lit(0.5)
    }
    fn gradient(&self, theta: &[T], grad: &mut [T]) {
        grad.copy_from_slice(theta);
    }
    fn constants(&self) -> Option<Constants<T>> {
        Some(Constants {
            smoothness: T::one(),
            convexity: T::one(),
        })
    }
}
