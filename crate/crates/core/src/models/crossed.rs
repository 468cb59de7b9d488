use super::data::{DataKind, SyntheticDataset};
use super::Potential;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Crossed random effects, `Y_ij ~ N(mu + a_i + b_j, 1)`, over the
/// unconstrained state `(mu, a_1..a_I, b_1..b_J, lambda_a, lambda_b)` with
/// `lambda = log sigma^2 ~ N(0, 1)`:
///
/// ```text
/// U = sum_ij r_ij^2 / 2 + mu^2 / 2
///   + sum_i a_i^2 e^{-lambda_a} / 2 + (I/2) lambda_a + lambda_a^2 / 2
///   + sum_j b_j^2 e^{-lambda_b} / 2 + (J/2) lambda_b + lambda_b^2 / 2
/// ```
/// where `r_ij = Y_ij - mu - a_i - b_j`.
#[derive(Clone, Debug)]
pub struct CrossedEffects<T> {
    rows: usize,
    cols: usize,
    y: Vec<T>,
}

impl<T: Real> CrossedEffects<T> {
    /// `y` is `rows x cols`, row-major.
    pub fn new(rows: usize, cols: usize, y: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Data("crossed design needs I, J >= 1".into()));
        }
        if y.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: y.len(),
            });
        }
        Ok(Self { rows, cols, y })
    }

    pub fn from_dataset(data: &SyntheticDataset) -> Result<Self> {
        if data.kind != DataKind::Crossed {
            return Err(Error::Data(format!("expected crossed data, got {}", data.kind)));
        }
        Self::new(data.n, data.d, data.y.iter().map(|&v| T::lit(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn residual(&self, theta: &[T], i: usize, j: usize) -> T {
        let (mu, a, b) = (theta[0], theta[1 + i], theta[1 + self.rows + j]);
        self.y[i * self.cols + j] - mu - a - b
    }
}

impl<T: Real> Potential<T> for CrossedEffects<T> {
    fn dim(&self) -> usize {
        self.rows + self.cols + 3
    }

    fn value(&self, theta: &[T]) -> T {
        let (ni, nj) = (self.rows, self.cols);
        let half = T::lit(0.5);
        let la = theta[ni + nj + 1];
        let lb = theta[ni + nj + 2];
        let mut u = half * theta[0] * theta[0];
        for i in 0..ni {
            for j in 0..nj {
                u = u + half * self.residual(theta, i, j).powi(2);
            }
        }
        let sa: T = theta[1..=ni].iter().map(|&a| a * a).sum();
        let sb: T = theta[1 + ni..1 + ni + nj].iter().map(|&b| b * b).sum();
        u + half * sa * (-la).exp()
            + half * T::lit(ni as f64) * la
            + half * la * la
            + half * sb * (-lb).exp()
            + half * T::lit(nj as f64) * lb
            + half * lb * lb
    }

    fn gradient(&self, theta: &[T], grad: &mut [T]) {
        let (ni, nj) = (self.rows, self.cols);
        let half = T::lit(0.5);
        let la = theta[ni + nj + 1];
        let lb = theta[ni + nj + 2];
        let (ea, eb) = ((-la).exp(), (-lb).exp());
        grad.iter_mut().for_each(|g| *g = T::zero());
        grad[0] = theta[0];
        for i in 1..=ni {
            grad[i] = theta[i] * ea;
        }
        for j in 1 + ni..1 + ni + nj {
            grad[j] = theta[j] * eb;
        }
        for i in 0..ni {
            for j in 0..nj {
                let r = self.residual(theta, i, j);
                grad[0] = grad[0] - r;
                grad[1 + i] = grad[1 + i] - r;
                grad[1 + ni + j] = grad[1 + ni + j] - r;
            }
        }
        let sa: T = theta[1..=ni].iter().map(|&a| a * a).sum();
        let sb: T = theta[1 + ni..1 + ni + nj].iter().map(|&b| b * b).sum();
        grad[ni + nj + 1] = -half * sa * ea + half * T::lit(ni as f64) + la;
        grad[ni + nj + 2] = -half * sb * eb + half * T::lit(nj as f64) + lb;
    }
}
