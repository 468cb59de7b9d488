//! Reference values `E_pi[f]` for the benchmark test functions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{DataKind, SyntheticDataset};
use super::linear::precision_matrix;
use super::quadrature::integrate;
use super::Potential;
use crate::drive::normal_cdf;
use crate::error::{Error, Result};
use crate::prng::streams;
use crate::samplers::{drive_chain, ChainConfig, Drive, StepSchedule};

/// `f(x) = x_j`, `x_j^2` or `1{x_j > 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFamily {
    Coordinate,
    Square,
    Indicator,
}

impl TestFamily {
    pub const ALL: [TestFamily; 3] = [TestFamily::Coordinate, TestFamily::Square, TestFamily::Indicator];

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            TestFamily::Coordinate => x,
            TestFamily::Square => x * x,
            TestFamily::Indicator => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TestFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestFamily::Coordinate => "coordinate",
            TestFamily::Square => "square",
            TestFamily::Indicator => "indicator",
        })
    }
}

impl FromStr for TestFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coordinate" => Ok(TestFamily::Coordinate),
            "square" => Ok(TestFamily::Square),
            "indicator" => Ok(TestFamily::Indicator),
            other => Err(Error::Config(format!("unknown test function {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Quadrature { abs_err: f64 },
    ReferenceRun { step: f64, iterations: usize, burn_in: usize, seeds: usize },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::ClosedForm => f.write_str("closed-form"),
            Provenance::Quadrature { abs_err } => write!(f, "quadrature (abs err {abs_err:.1e})"),
            Provenance::ReferenceRun { step, iterations, seeds, .. } => {
                write!(f, "reference run (h={step:e}, n={iterations}, {seeds} seeds)")
            }
        }
    }
}

/// Per-coordinate expectations of each test family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    dim: usize,
    values: [Vec<f64>; 3],
    stderr: Option<[Vec<f64>; 3]>,
    pub provenance: Provenance,
}

impl GroundTruth {
    pub fn new(values: [Vec<f64>; 3], stderr: Option<[Vec<f64>; 3]>, provenance: Provenance) -> Result<Self> {
        let dim = values[0].len();
        let lens_ok = values.iter().all(|v| v.len() == dim)
            && stderr.as_ref().is_none_or(|s| s.iter().all(|v| v.len() == dim));
        if dim == 0 || !lens_ok {
            return Err(Error::Size("ground truth vectors must share a positive length".into()));
        }
        Ok(Self {
            dim,
            values,
            stderr,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `E[f(x_j)]`, `j` 0-based.
    pub fn value(&self, family: TestFamily, j: usize) -> f64 {
        self.values[family.index()][j]
    }

    pub fn values(&self, family: TestFamily) -> &[f64] {
        &self.values[family.index()]
    }

    /// Standard error of the value (0 for exact values).
    pub fn stderr(&self, family: TestFamily, j: usize) -> f64 {
        self.stderr.as_ref().map_or(0.0, |s| s[family.index()][j])
    }
}

/// Exact Gaussian posterior of Bayesian linear regression.
pub fn closed_form_posterior(data: &SyntheticDataset, noise_var: f64) -> Result<GroundTruth> {
    if data.kind == DataKind::Crossed {
        return Err(Error::Data("closed form needs a regression dataset".into()));
    }
    if !(noise_var > 0.0) {
        return Err(Error::Domain(format!("noise variance {noise_var} must be positive")));
    }
    let d = data.d;
    let chol = Cholesky::new(precision_matrix(data, noise_var))
        .ok_or_else(|| Error::Numeric("posterior precision is not positive definite".into()))?;
    let x = DMatrix::from_row_slice(data.n, d, &data.x);
    let rhs = x.transpose() * DVector::from_column_slice(&data.y) / noise_var;
    let mean = chol.solve(&rhs);
    let cov = chol.inverse();
    let mut out: [Vec<f64>; 3] = Default::default();
    for j in 0..d {
        let (m, v) = (mean[j], cov[(j, j)]);
        out[0].push(m);
        out[1].push(m * m + v);
        out[2].push(normal_cdf(m / v.sqrt()));
    }
    GroundTruth::new(out, None, Provenance::ClosedForm)
}

/// Unnormalized double-well density `exp(-U)`.
pub(crate) fn double_well_density(x: f64) -> f64 {
    (-0.25 * x * x).exp() * (1.0 + x * x).sqrt()
}

/// Smallest integer radius whose two-sided tail of `x^2 exp(-U)` is below
/// `tol`, using `x^2 sqrt(1+x^2) <= 2 x^3` for `x >= 2` and
/// `int_R^inf x^3 e^{-x^2/4} = 2 (R^2 + 4) e^{-R^2/4}`.
pub(crate) fn double_well_radius(tol: f64) -> f64 {
    let mut r: f64 = 2.0;
    while 8.0 * (r * r + 4.0) * (-0.25 * r * r).exp() >= tol {
        r += 1.0;
    }
    r
}

/// `E[x] = 0`, `E[1{x>0}] = 1/2` by symmetry; `E[x^2]` by adaptive
/// Gauss-Kronrod quadrature.
pub fn double_well_truth() -> Result<GroundTruth> {
    let r = double_well_radius(1e-12);
    let (z, ez) = integrate(double_well_density, -r, r, 1e-12, 10_000);
    let (m2, em2) = integrate(|x| x * x * double_well_density(x), -r, r, 1e-12, 10_000);
    let second = m2 / z;
    // first-order propagation of both quadrature errors
    let abs_err = em2 / z + second * ez / z;
    if !(abs_err < 1e-10) {
        return Err(Error::Numeric(format!("quadrature error {abs_err:e} too large")));
    }
    GroundTruth::new(
        [vec![0.0], vec![second], vec![0.5]],
        None,
        Provenance::Quadrature { abs_err },
    )
}

/// Long pseudo-random chains whose averages serve as ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub step: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub initial: Vec<f64>,
}

impl ReferenceSpec {
    pub fn new(step: f64, iterations: usize, seeds: usize, initial: Vec<f64>) -> Self {
        Self {
            step,
            iterations,
            burn_in: iterations / 16,
            seeds,
            base_seed: 0x5EED,
            initial,
        }
    }
}

/// Averages test functions over `seeds` independent chains; the standard
/// error is the between-chain standard deviation over `sqrt(seeds)`.
pub fn reference_truth<P: Potential<f64> + ?Sized>(potential: &P, spec: &ReferenceSpec) -> Result<GroundTruth> {
    if spec.seeds < 2 {
        return Err(Error::Config("a reference run needs at least two seeds".into()));
    }
    if spec.burn_in >= spec.iterations {
        return Err(Error::Config("burn-in must be shorter than the run".into()));
    }
    let d = potential.dim();
    let per_seed: Vec<[Vec<f64>; 3]> = (0..spec.seeds)
        .into_par_iter()
        .map(|s| {
            let cfg = ChainConfig::new(
                spec.initial.clone(),
                spec.iterations,
                StepSchedule::Constant(spec.step),
                Drive::PseudoRandom {
                    seed: spec.base_seed,
                    stream: streams::tagged(streams::REFERENCE, s as u64),
                },
            );
            let mut sums: [Vec<f64>; 3] = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
            drive_chain(potential, &cfg, 1, |k, theta| {
                if k >= spec.burn_in {
                    for (j, &x) in theta.iter().enumerate() {
                        for f in TestFamily::ALL {
                            sums[f.index()][j] += f.apply(x);
                        }
                    }
                }
            })?;
            let kept = (spec.iterations - spec.burn_in) as f64;
            sums.iter_mut().flatten().for_each(|v| *v /= kept);
            Ok(sums)
        })
        .collect::<Result<_>>()?;
    let r = spec.seeds as f64;
    let mut values: [Vec<f64>; 3] = Default::default();
    let mut errors: [Vec<f64>; 3] = Default::default();
    for f in 0..3 {
        for j in 0..d {
            let mean = per_seed.iter().map(|s| s[f][j]).sum::<f64>() / r;
            let var = per_seed.iter().map(|s| (s[f][j] - mean).powi(2)).sum::<f64>() / (r - 1.0);
            values[f].push(mean);
            errors[f].push((var / r).sqrt());
        }
    }
    GroundTruth::new(
        values,
        Some(errors),
        Provenance::ReferenceRun {
            step: spec.step,
            iterations: spec.iterations,
            burn_in: spec.burn_in,
            seeds: spec.seeds,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LinearRegression, StandardNormal};

    fn tiny(x: Vec<f64>, y: Vec<f64>, n: usize, d: usize) -> SyntheticDataset {
        SyntheticDataset {
            kind: DataKind::Linear,
            n,
            d,
            seed: 0,
            x,
            y,
            beta: vec![0.0; d],
        }
    }

    #[test]
    fn conjugate_one_dimensional() {
        let t = closed_form_posterior(&tiny(vec![1.0], vec![1.0], 1, 1), 1.0).unwrap();
        assert!((t.value(TestFamily::Coordinate, 0) - 0.5).abs() < 1e-15);
        assert!((t.value(TestFamily::Square, 0) - 0.75).abs() < 1e-15);
        assert_eq!(t.provenance, Provenance::ClosedForm);
        assert_eq!(t.stderr(TestFamily::Square, 0), 0.0);
    }

    #[test]
    fn zero_design_is_prior() {
        let t = closed_form_posterior(&tiny(vec![0.0; 6], vec![1.0, -2.0], 2, 3), 0.25).unwrap();
        for j in 0..3 {
            assert_eq!(t.value(TestFamily::Coordinate, j), 0.0);
            assert!((t.value(TestFamily::Square, j) - 1.0).abs() < 1e-15);
            assert!((t.value(TestFamily::Indicator, j) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn posterior_mean_is_the_mode() {
        let data = crate::models::synthesize_data(DataKind::Linear, 20, 100, 5).unwrap();
        let t = closed_form_posterior(&data, 0.25).unwrap();
        let p = LinearRegression::<f64>::new(&data, 0.25).unwrap();
        let mut g = vec![0.0; 100];
        p.gradient(t.values(TestFamily::Coordinate), &mut g);
        assert!(g.iter().all(|v| v.abs() < 1e-10));
    }

    fn trapezoid(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
        let n = (2.0 * r / h).round() as i64;
        let inner: f64 = (1..n).map(|k| f(-r + k as f64 * h)).sum();
        h * (inner + 0.5 * (f(-r) + f(r)))
    }

    #[test]
    fn double_well_two_schemes_agree() {
        let t = double_well_truth().unwrap();
        assert_eq!(t.value(TestFamily::Coordinate, 0), 0.0);
        assert_eq!(t.value(TestFamily::Indicator, 0), 0.5);
        let Provenance::Quadrature { abs_err } = t.provenance else { panic!() };
        assert!(abs_err < 1e-10);
        // trapezoid rule on a wider interval: spectrally accurate here
        let z_t = trapezoid(double_well_density, 20.0, 1e-2);
        let m_t = trapezoid(|x| x * x * double_well_density(x), 20.0, 1e-2);
        let r = double_well_radius(1e-12);
        let (z_g, _) = integrate(double_well_density, -r, r, 1e-12, 10_000);
        assert!((z_t - z_g).abs() < 1e-9, "{z_t} {z_g}");
        assert!((m_t / z_t - t.value(TestFamily::Square, 0)).abs() < 1e-8);
    }

    #[test]
    fn reference_run_recovers_standard_normal() {
        let spec = ReferenceSpec::new(0.05, 40_000, 4, vec![0.0, 0.0]);
        let t = reference_truth(&StandardNormal { dim: 2 }, &spec).unwrap();
        for j in 0..2 {
            let se = t.stderr(TestFamily::Coordinate, j);
            assert!(se > 0.0 && se < 0.05);
            assert!(t.value(TestFamily::Coordinate, j).abs() < 6.0 * se + 1e-3);
            // the h = 0.05 chain has stationary variance 1/(1 - h/2)
            assert!((t.value(TestFamily::Square, j) - 1.0 / 0.975).abs() < 0.1);
        }
        let again = reference_truth(&StandardNormal { dim: 2 }, &spec).unwrap();
        assert_eq!(t, again);
        assert!(reference_truth(&StandardNormal { dim: 2 }, &ReferenceSpec { seeds: 1, ..spec }).is_err());
    }

    #[test]
    fn families_parse() {
        for f in TestFamily::ALL {
            assert_eq!(f.to_string().parse::<TestFamily>().unwrap(), f);
        }
        assert_eq!(TestFamily::Indicator.apply(0.0), 0.0);
    }
}
