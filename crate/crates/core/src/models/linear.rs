use nalgebra::{DMatrix, SymmetricEigen};

use super::data::{DataKind, SyntheticDataset};
use super::{Constants, MinibatchGradient, Potential};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bayesian linear regression, `y ~ N(X beta, s2)`, `beta ~ N(0, I)`:
/// `U(beta) = |y - X beta|^2 / (2 s2) + |beta|^2 / 2`.
#[derive(Clone, Debug)]
pub struct LinearRegression<T> {
    n: usize,
    d: usize,
    x: Vec<T>,
    y: Vec<T>,
    inv_noise: T,
    constants: Constants<T>,
}

/// `X^T X / s2 + I` in `f64`.
pub(crate) fn precision_matrix(data: &SyntheticDataset, noise_var: f64) -> DMatrix<f64> {
    let x = DMatrix::from_row_slice(data.n, data.d, &data.x);
    x.transpose() * &x / noise_var + DMatrix::identity(data.d, data.d)
}

impl<T: Real> LinearRegression<T> {
    pub fn new(data: &SyntheticDataset, noise_var: f64) -> Result<Self> {
        if data.kind == DataKind::Crossed {
            return Err(Error::Data("linear regression needs a design matrix".into()));
        }
        if !(noise_var > 0.0) {
            return Err(Error::Domain(format!("noise variance {noise_var} must be positive")));
        }
        let eig = SymmetricEigen::new(precision_matrix(data, noise_var)).eigenvalues;
        let constants = Constants {
            smoothness: T::lit(eig.max()),
            convexity: T::lit(eig.min()),
        };
        Ok(Self {
            n: data.n,
            d: data.d,
            x: data.x.iter().map(|&v| T::lit(v)).collect(),
            y: data.y.iter().map(|&v| T::lit(v)).collect(),
            inv_noise: T::lit(noise_var.recip()),
            constants,
        })
    }

    #[inline]
    fn residual(&self, i: usize, beta: &[T]) -> T {
        let row = &self.x[i * self.d..(i + 1) * self.d];
        row.iter().zip(beta).map(|(&a, &b)| a * b).sum::<T>() - self.y[i]
    }
}

impl<T: Real> Potential<T> for LinearRegression<T> {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, beta: &[T]) -> T {
        let sse: T = (0..self.n).map(|i| self.residual(i, beta).powi(2)).sum();
        let prior: T = beta.iter().map(|&b| b * b).sum();
        T::lit(0.5) * (sse * self.inv_noise + prior)
    }

    fn gradient(&self, beta: &[T], grad: &mut [T]) {
        grad.copy_from_slice(beta);
        for i in 0..self.n {
            self.add_datum_gradient(i, beta, T::one(), grad);
        }
    }

    fn constants(&self) -> Option<Constants<T>> {
        Some(self.constants)
    }

    fn minibatch(&self) -> Option<&dyn MinibatchGradient<T>> {
        Some(self)
    }
}

impl<T: Real> MinibatchGradient<T> for LinearRegression<T> {
    fn data_len(&self) -> usize {
        self.n
    }
    fn prior_gradient(&self, beta: &[T], grad: &mut [T]) {
        grad.copy_from_slice(beta);
    }
    fn add_datum_gradient(&self, i: usize, beta: &[T], scale: T, grad: &mut [T]) {
        let r = self.residual(i, beta) * self.inv_noise * scale;
        let row = &self.x[i * self.d..(i + 1) * self.d];
        for (g, &a) in grad.iter_mut().zip(row) {
            *g = *g + r * a;
        }
    }
}
