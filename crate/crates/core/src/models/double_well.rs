use super::Potential;
use crate::scalar::Real;

/// `U(x) = x^2/4 - log(1 + x^2)/2`: wells at `x = ±1`, a local maximum at 0.
#[derive(Clone, Copy, Debug, Default)]
pub struct DoubleWell;

impl<T: Real> Potential<T> for DoubleWell {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[T]) -> T {
        let x = x[0];
        T::lit(0.25) * x * x - T::lit(0.5) * (x * x).ln_1p()
    }
    fn gradient(&self, x: &[T], grad: &mut [T]) {
        let x = x[0];
        grad[0] = T::lit(0.5) * x - x / (T::one() + x * x);
    }
}
