//! Per-iteration uniforms from a full-period sequence, randomised by a
//! Cranley-Patterson shift and pushed through the inverse normal CDF.

use std::io::Write;

use crate::cud::{gcd, CudSequence};
use crate::error::{Error, Result};
use crate::prng::BaselinePrng;
use crate::scalar::Real;

/// Smallest `w >= d` with `gcd(n, w) = 1`.
pub fn coprime_width(n: usize, d: usize) -> usize {
    (d.max(1)..)
        .find(|&w| gcd(n as u64, w as u64) == 1)
        .expect("some width is coprime")
}

/// Row-major arrangement of one sequence period repeated `d'` times.
///
/// Row `r` (iteration `r + 1`) holds `v_{r d'}, ..., v_{r d' + d' - 1}`
/// with indices taken modulo `n`; only the first `d` columns are exposed.
#[derive(Clone, Debug)]
pub struct DriveMatrix<T> {
    seq: CudSequence,
    dim: usize,
    width: usize,
    shift: Vec<T>,
    scale: T,
}

impl<T: Real> DriveMatrix<T> {
    /// Matrix with the zero shift.
    pub fn unshifted(seq: CudSequence, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("drive dimension must be positive".into()));
        }
        let digits = 1 - T::epsilon().log2().as_f64() as i64;
        if seq.order() as i64 >= digits {
            return Err(Error::Config(format!(
                "order {} exceeds the scalar precision",
                seq.order()
            )));
        }
        let width = coprime_width(seq.len(), dim);
        Ok(Self {
            scale: T::lit((1u64 << seq.order()) as f64).recip(),
            shift: vec![T::zero(); width],
            seq,
            dim,
            width,
        })
    }

    /// Replaces the shift vector; it must have one entry per stored column.
    pub fn with_shift(mut self, shift: Vec<T>) -> Result<Self> {
        if shift.len() != self.width {
            return Err(Error::DimensionMismatch {
                expected: self.width,
                got: shift.len(),
            });
        }
        if let Some(bad) = shift.iter().find(|&&s| !(s >= T::zero() && s < T::one())) {
            return Err(Error::Domain(format!("shift component {bad} outside [0,1)")));
        }
        self.shift = shift;
        Ok(self)
    }

    /// Draws a shift uniformly from the grid `epsilon * {0, 1, ...}` in
    /// `[0,1)^{d'}`. On that grid the rotation and its inverse are exact.
    pub fn with_random_shift(self, prng: &mut BaselinePrng) -> Self {
        let eps = T::epsilon();
        let shift = (0..self.width)
            .map(|_| {
                let u: T = prng.uniform();
                (u / eps).floor() * eps
            })
            .collect();
        self.with_shift(shift).expect("grid shift is in range")
    }

    /// The inverse rotation `-shift mod 1`.
    pub fn inverse_shift(&self) -> Vec<T> {
        self.shift
            .iter()
            .map(|&s| if s == T::zero() { s } else { T::one() - s })
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.seq.len()
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Number of stored columns `d'`.
    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn shift(&self) -> &[T] {
        &self.shift
    }
    pub fn sequence(&self) -> &CudSequence {
        &self.seq
    }

    /// Unshifted entry of stored column `c`.
    #[inline]
    pub fn raw(&self, row: usize, col: usize) -> T {
        let i = (row * self.width + col) % self.seq.len();
        T::lit(self.seq.numerator(i) as f64) * self.scale
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> T {
        rotate(self.raw(row, col), self.shift[col])
    }

    /// Shifted uniforms `u_{row+1}` (first `d` columns).
    pub fn row(&self, row: usize, out: &mut [T]) {
        for (c, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = self.entry(row, c);
        }
    }

    /// Stored column `c` (pre-shift when `shifted` is false).
    pub fn column(&self, col: usize, shifted: bool) -> Vec<T> {
        (0..self.rows())
            .map(|r| {
                if shifted {
                    self.entry(r, col)
                } else {
                    self.raw(r, col)
                }
            })
            .collect()
    }

    /// Gaussian perturbation for row `row`: clamped inverse CDF of `u`.
    #[inline]
    pub fn gaussian_row(&self, row: usize, out: &mut [T]) {
        for (c, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = clamped_inverse_normal_cdf(self.entry(row, c));
        }
    }

    /// One line per row, `d` comma-separated values with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = vec![T::zero(); self.dim];
        for r in 0..self.rows() {
            self.row(r, &mut buf);
            let line = buf
                .iter()
                .map(|x| format!("{:.16e}", x.as_f64()))
                .collect::<Vec<_>>()
                .join(",");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Builds the drive matrix; without an explicit shift one is drawn from
/// `prng`.
pub fn build_drive_matrix<T: Real>(
    seq: CudSequence,
    dim: usize,
    shift: Option<Vec<T>>,
    prng: &mut BaselinePrng,
) -> Result<DriveMatrix<T>> {
    let m = DriveMatrix::unshifted(seq, dim)?;
    match shift {
        Some(s) => m.with_shift(s),
        None => Ok(m.with_random_shift(prng)),
    }
}

/// `u + shift mod 1`.
#[inline]
pub fn rotate<T: Real>(u: T, shift: T) -> T {
    let x = u + shift;
    if x >= T::one() {
        x - T::one()
    } else {
        x
    }
}

/// Precomputed Gaussian perturbations `xi_k`, row-major `n x d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDrive<T> {
    dim: usize,
    values: Vec<T>,
}

impl<T: Real> GaussianDrive<T> {
    pub fn new(dim: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 || values.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("gaussian drive entry".into()));
        }
        Ok(Self { dim, values })
    }
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }
    #[inline]
    pub fn rows(&self) -> usize {
        self.values.len() / self.dim
    }
    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }
}

/// `xi_k = Phi^{-1}(u_k)` for every row, inputs clamped to
/// `[eps/2, 1 - eps/2]`.
pub fn gaussian_rows<T: Real>(matrix: &DriveMatrix<T>) -> GaussianDrive<T> {
    let d = matrix.dim();
    let mut values = vec![T::zero(); matrix.rows() * d];
    for (r, chunk) in values.chunks_exact_mut(d).enumerate() {
        matrix.gaussian_row(r, chunk);
    }
    GaussianDrive { dim: d, values }
}

/// Standard normal CDF via `erfc`, accurate in both tails.
#[inline]
pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).erfc()
}

/// Inverse CDF with inputs clamped to `[eps/2, 1 - eps/2]` (`2^-53` for
/// `f64`), so `|result| <= 8.3`.
#[inline]
pub fn clamped_inverse_normal_cdf<T: Real>(u: T) -> T {
    let lo = T::epsilon() * T::lit(0.5);
    let u = u.max(lo).min(T::one() - lo);
    inverse_normal_cdf(u).expect("clamped input is inside (0,1)")
}

/// Quantile of the standard normal distribution.
///
/// Rational approximation (Acklam, relative error about `1.2e-9`) followed
/// by one Halley step against [`normal_cdf`]. Computed on the lower half
/// and reflected, so `inverse(1 - u) == -inverse(u)` whenever `1 - u` is
/// exact.
pub fn inverse_normal_cdf<T: Real>(u: T) -> Result<T> {
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::Domain(format!(
            "inverse normal CDF needs 0 < u < 1, got {u}"
        )));
    }
    let half = T::lit(0.5);
    if u == half {
        return Ok(T::zero());
    }
    if u > half {
        return Ok(-lower_quantile(T::one() - u));
    }
    Ok(lower_quantile(u))
}

const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];
const P_LOW: f64 = 0.024_25;

#[inline]
fn horner<T: Real>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

/// Quantile for `0 < u <= 1/2`.
fn lower_quantile<T: Real>(u: T) -> T {
    let x = if u < T::lit(P_LOW) {
        let q = (T::lit(-2.0) * u.ln()).sqrt();
        horner(&C, q) / (horner(&D, q) * q + T::one())
    } else {
        let q = u - T::lit(0.5);
        let r = q * q;
        horner(&A, r) * q / (horner(&B, r) * r + T::one())
    };
    // Halley step on Phi(x) - u
    let e = normal_cdf(x) - u;
    let t = e * T::lit(std::f64::consts::TAU).sqrt() * (x * x * T::lit(0.5)).exp();
    let refined = x - t / (T::one() + x * t * T::lit(0.5));
    if refined.is_finite() {
        refined
    } else {
        x
    }
}
