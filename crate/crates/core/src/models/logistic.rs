use nalgebra::{DMatrix, SymmetricEigen};

use super::data::{DataKind, SyntheticDataset};
use super::{Constants, MinibatchGradient, Potential};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bayesian logistic regression with labels in `{0, 1}` and a standard
/// normal prior:
/// `U(beta) = sum_i [log(1 + e^{x_i beta}) - y_i x_i beta] + |beta|^2 / 2`.
#[derive(Clone, Debug)]
pub struct LogisticRegression<T> {
    n: usize,
    d: usize,
    x: Vec<T>,
    y: Vec<T>,
    constants: Constants<T>,
}

#[inline]
fn softplus<T: Real>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        (T::one() + (-z).exp()).recip()
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Real> LogisticRegression<T> {
    pub fn new(data: &SyntheticDataset) -> Result<Self> {
        if data.kind == DataKind::Crossed {
            return Err(Error::Data("logistic regression needs a design matrix".into()));
        }
        if let Some(bad) = data.y.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(Error::Data(format!("label {bad} is not in {{0, 1}}")));
        }
        // Hessian lies between I and I + X^T X / 4
        let x = DMatrix::from_row_slice(data.n, data.d, &data.x);
        let top = if data.n == 0 {
            0.0
        } else {
            SymmetricEigen::new(x.transpose() * &x).eigenvalues.max()
        };
        Ok(Self {
            n: data.n,
            d: data.d,
            x: data.x.iter().map(|&v| T::lit(v)).collect(),
            y: data.y.iter().map(|&v| T::lit(v)).collect(),
            constants: Constants {
                smoothness: T::lit(1.0 + 0.25 * top),
                convexity: T::one(),
            },
        })
    }

    #[inline]
    fn eta(&self, i: usize, beta: &[T]) -> T {
        let row = &self.x[i * self.d..(i + 1) * self.d];
        row.iter().zip(beta).map(|(&a, &b)| a * b).sum()
    }
}

impl<T: Real> Potential<T> for LogisticRegression<T> {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, beta: &[T]) -> T {
        let nll: T = (0..self.n)
            .map(|i| {
                let z = self.eta(i, beta);
                softplus(z) - self.y[i] * z
            })
            .sum();
        nll + T::lit(0.5) * beta.iter().map(|&b| b * b).sum::<T>()
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

impl<T: Real> MinibatchGradient<T> for LogisticRegression<T> {
    fn data_len(&self) -> usize {
        self.n
    }
    fn prior_gradient(&self, beta: &[T], grad: &mut [T]) {
        grad.copy_from_slice(beta);
    }
    fn add_datum_gradient(&self, i: usize, beta: &[T], scale: T, grad: &mut [T]) {
        let r = (sigmoid(self.eta(i, beta)) - self.y[i]) * scale;
        let row = &self.x[i * self.d..(i + 1) * self.d];
        for (g, &a) in grad.iter_mut().zip(row) {
            *g = *g + r * a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::synthesize_data;
    use crate::models::testing::max_fd_error;

    #[test]
    fn gradient_at_zero() {
        let ds = synthesize_data(DataKind::Logistic, 20, 10, 3).unwrap();
        let p = LogisticRegression::<f64>::new(&ds).unwrap();
        let mut g = vec![0.0; 10];
        p.gradient(&[0.0; 10], &mut g);
        for j in 0..10 {
            let expect: f64 = (0..20).map(|i| ds.row(i)[j] * (0.5 - ds.y[i])).sum();
            assert!((g[j] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn no_data_is_gaussian_prior() {
        let ds = SyntheticDataset {
            kind: DataKind::Logistic,
            n: 0,
            d: 3,
            seed: 0,
            x: vec![],
            y: vec![],
            beta: vec![],
        };
        let p = LogisticRegression::<f64>::new(&ds).unwrap();
        assert_eq!(p.value(&[1.0, 2.0, 2.0]), 4.5);
    }

    #[test]
    fn extreme_linear_predictor_is_finite() {
        let ds = SyntheticDataset {
            kind: DataKind::Logistic,
            n: 1,
            d: 1,
            seed: 0,
            x: vec![1.0],
            y: vec![1.0],
            beta: vec![0.0],
        };
        let p = LogisticRegression::<f64>::new(&ds).unwrap();
        for b in [-800.0, 800.0] {
            assert!(p.value(&[b]).is_finite());
            let mut g = [0.0];
            p.gradient(&[b], &mut g);
            assert!(g[0].is_finite());
        }
    }

    #[test]
    fn rejects_bad_labels() {
        let mut ds = synthesize_data(DataKind::Logistic, 4, 2, 1).unwrap();
        ds.y[0] = 2.0;
        assert!(matches!(LogisticRegression::<f64>::new(&ds), Err(Error::Data(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ds = synthesize_data(DataKind::Logistic, 20, 10, 5).unwrap();
        let p = LogisticRegression::<f64>::new(&ds).unwrap();
        assert!(max_fd_error(&p, 20, 1.0, 2) < 1e-5);
    }
}
