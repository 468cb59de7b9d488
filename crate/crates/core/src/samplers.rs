//! Langevin chains: the update map, drives, step schedules, continuation
//! and the synchronous-coupling contraction diagnostic.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::drive::{DriveMatrix, GaussianDrive};
use crate::error::{Error, Result};
use crate::models::Potential;
use crate::prng::BaselinePrng;
use crate::scalar::{dist, norm, Real};

/// Chains whose state norm exceeds this abort with [`Error::Divergence`].
pub const DIVERGENCE_NORM: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule<T> {
    Constant(T),
    /// `h_k = c0 (c1 + k)^exponent`, `k = 1, 2, ...`
    Polynomial { c0: T, c1: T, exponent: T },
}

impl<T: Real> StepSchedule<T> {
    /// Polynomial schedule with `h_1 = first` and `h_n = last`.
    pub fn from_endpoints(first: T, last: T, n: usize, exponent: T) -> Result<Self> {
        if !(first > T::zero() && last > T::zero()) || exponent == T::zero() || n < 2 {
            return Err(Error::Config(
                "endpoint schedule needs positive steps, a nonzero exponent and n >= 2".into(),
            ));
        }
        // (c1 + 1)/(c1 + n) = (first/last)^(1/exponent) =: q
        let q = (first / last).powf(exponent.recip());
        if !(q > T::zero() && q < T::one()) {
            return Err(Error::Config(
                "endpoints are inconsistent with the exponent's monotonicity".into(),
            ));
        }
        let nf = T::from_usize(n).unwrap();
        let c1 = q * (nf - T::one()) / (T::one() - q) - T::one();
        let c0 = last / (c1 + nf).powf(exponent);
        let s = StepSchedule::Polynomial { c0, c1, exponent };
        // a very steep start puts c1 within a few ulps of -1, where h_1 is lost
        let tol = T::epsilon().sqrt();
        if s.validate(n).is_err() || (s.step(1) / first - T::one()).abs() > tol {
            return Err(Error::Config(format!(
                "endpoint schedule {first}..{last} over {n} steps is too steep for exponent {exponent}"
            )));
        }
        Ok(s)
    }

    /// Step size at iteration `k` (1-based).
    #[inline]
    pub fn step(&self, k: usize) -> T {
        match *self {
            StepSchedule::Constant(h) => h,
            StepSchedule::Polynomial { c0, c1, exponent } => {
                c0 * (c1 + T::from_usize(k).unwrap()).powf(exponent)
            }
        }
    }

    /// Checks `h_k > 0` for `k = 1..=n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = match *self {
            StepSchedule::Constant(h) => h > T::zero() && h.is_finite(),
            StepSchedule::Polynomial { c0, c1, .. } => {
                c0 > T::zero() && c1 + T::one() > T::zero() && self.step(1).is_finite()
                    && self.step(n.max(1)) > T::zero()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("step schedule {self:?} is not positive")))
        }
    }
}

/// Source of the Gaussian perturbations `xi_k`.
#[derive(Clone, Debug)]
pub enum Drive<T> {
    /// i.i.d. normals from the baseline generator.
    PseudoRandom { seed: u64, stream: u64 },
    /// Inverse-CDF rows of a shifted drive matrix.
    Cud(Arc<DriveMatrix<T>>),
    /// Precomputed perturbations.
    Explicit(Arc<GaussianDrive<T>>),
    /// `xi_k = 0`: plain gradient descent.
    Zero,
}

impl<T: Real> Drive<T> {
    /// Rows available, `None` if unbounded.
    pub fn capacity(&self) -> Option<usize> {
        match self {
            Drive::Cud(m) => Some(m.rows()),
            Drive::Explicit(g) => Some(g.rows()),
            _ => None,
        }
    }

    fn check(&self, dim: usize, iterations: usize) -> Result<()> {
        let got = match self {
            Drive::Cud(m) => Some(m.dim()),
            Drive::Explicit(g) => Some(g.dim()),
            _ => None,
        };
        if let Some(got) = got {
            if got != dim {
                return Err(Error::DimensionMismatch { expected: dim, got });
            }
        }
        if let Some(rows) = self.capacity() {
            if rows < iterations {
                return Err(Error::Config(format!(
                    "drive has {rows} rows but {iterations} iterations were requested"
                )));
            }
        }
        Ok(())
    }

    fn noise(&self) -> Noise<'_, T> {
        match self {
            Drive::PseudoRandom { seed, stream } => Noise::Prng(BaselinePrng::new(*seed, *stream)),
            Drive::Cud(m) => Noise::Matrix(m),
            Drive::Explicit(g) => Noise::Explicit(g),
            Drive::Zero => Noise::Zero,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Drive::PseudoRandom { .. } => "lmc",
            Drive::Cud(_) => "lqmc",
            Drive::Explicit(_) => "explicit",
            Drive::Zero => "zero",
        }
    }
}

enum Noise<'a, T> {
    Prng(BaselinePrng),
    Matrix(&'a DriveMatrix<T>),
    Explicit(&'a GaussianDrive<T>),
    Zero,
}

impl<T: Real> Noise<'_, T> {
    /// Writes `xi` for 0-based row `r`.
    #[inline]
    fn fill(&mut self, r: usize, out: &mut [T]) {
        match self {
            Noise::Prng(rng) => rng.fill_normal(out),
            Noise::Matrix(m) => m.gaussian_row(r, out),
            Noise::Explicit(g) => out.copy_from_slice(g.row(r)),
            Noise::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
        }
    }
}

/// Minibatch size and the generator stream that picks the batches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Minibatch {
    pub size: usize,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug)]
pub struct ChainConfig<T> {
    pub initial: Vec<T>,
    pub iterations: usize,
    pub schedule: StepSchedule<T>,
    pub drive: Drive<T>,
    pub minibatch: Option<Minibatch>,
}

impl<T: Real> ChainConfig<T> {
    pub fn new(initial: Vec<T>, iterations: usize, schedule: StepSchedule<T>, drive: Drive<T>) -> Self {
        Self {
            initial,
            iterations,
            schedule,
            drive,
            minibatch: None,
        }
    }

    pub fn with_minibatch(mut self, minibatch: Minibatch) -> Self {
        self.minibatch = Some(minibatch);
        self
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    fn validate<P: Potential<T> + ?Sized>(&self, potential: &P) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("a chain needs at least one iteration".into()));
        }
        if self.dim() != potential.dim() {
            return Err(Error::DimensionMismatch {
                expected: potential.dim(),
                got: self.dim(),
            });
        }
        if self.initial.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("initial point".into()));
        }
        self.schedule.validate(self.iterations)?;
        self.drive.check(self.dim(), self.iterations)?;
        if let Some(mb) = self.minibatch {
            let src = potential
                .minibatch()
                .ok_or_else(|| Error::Config("potential has no per-datum gradients".into()))?;
            if mb.size == 0 || mb.size > src.data_len() {
                return Err(Error::Config(format!(
                    "minibatch size {} not in 1..={}",
                    mb.size,
                    src.data_len()
                )));
            }
        }
        Ok(())
    }
}

/// Trajectory `theta_1 .. theta_n` (row-major) with its provenance.
#[derive(Clone, Debug)]
pub struct ChainRun<T> {
    pub config: ChainConfig<T>,
    trajectory: Vec<T>,
    dim: usize,
    /// Lengths of the consecutive segments (one per drive).
    pub segments: Vec<usize>,
    pub elapsed: Duration,
}

impl<T: Real> ChainRun<T> {
    pub fn len(&self) -> usize {
        self.trajectory.len() / self.dim
    }
    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// `theta_{k+1}` for 0-based `k`.
    pub fn sample(&self, k: usize) -> &[T] {
        &self.trajectory[k * self.dim..(k + 1) * self.dim]
    }
    pub fn samples(&self) -> impl Iterator<Item = &[T]> {
        self.trajectory.chunks_exact(self.dim)
    }
    pub fn last(&self) -> &[T] {
        self.sample(self.len() - 1)
    }

    /// CSV with columns `iteration, theta_1, ..., theta_d`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let head: Vec<String> = (1..=self.dim).map(|j| format!("theta_{j}")).collect();
        writeln!(w, "iteration,{}", head.join(","))?;
        for (k, s) in self.samples().enumerate() {
            let row: Vec<String> = s.iter().map(|x| format!("{:.16e}", x.as_f64())).collect();
            writeln!(w, "{},{}", k + 1, row.join(","))?;
        }
        Ok(())
    }
}

/// One update `theta - h grad + sqrt(2h) xi`.
pub fn lmc_step<T: Real>(theta: &[T], grad: &[T], h: T, xi: &[T]) -> Result<Vec<T>> {
    let d = theta.len();
    for len in [grad.len(), xi.len()] {
        if len != d {
            return Err(Error::DimensionMismatch { expected: d, got: len });
        }
    }
    if !(h > T::zero()) {
        return Err(Error::Domain(format!("step size {h} must be positive")));
    }
    let mut out = theta.to_vec();
    step_in_place(&mut out, grad, h, xi);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("LMC step produced a non-finite state".into()));
    }
    Ok(out)
}

#[inline]
fn step_in_place<T: Real>(theta: &mut [T], grad: &[T], h: T, xi: &[T]) {
    let s = (h + h).sqrt();
    for ((t, &g), &x) in theta.iter_mut().zip(grad).zip(xi) {
        *t = *t - h * g + s * x;
    }
}

/// Gradient or minibatch estimate `prior + (N/|B|) sum_{i in B} loss_i`.
struct GradientOracle<'a, T: Real, P: ?Sized> {
    potential: &'a P,
    batch: Option<(Minibatch, BaselinePrng)>,
    _t: std::marker::PhantomData<T>,
}

impl<'a, T: Real, P: Potential<T> + ?Sized> GradientOracle<'a, T, P> {
    fn new(potential: &'a P, minibatch: Option<Minibatch>) -> Self {
        Self {
            potential,
            batch: minibatch.map(|mb| (mb, BaselinePrng::new(mb.seed, mb.stream))),
            _t: std::marker::PhantomData,
        }
    }

    #[inline]
    fn eval(&mut self, theta: &[T], grad: &mut [T]) {
        match &mut self.batch {
            None => self.potential.gradient(theta, grad),
            Some((mb, rng)) => {
                let src = self.potential.minibatch().expect("validated");
                let n = src.data_len();
                let scale = T::lit(n as f64 / mb.size as f64);
                src.prior_gradient(theta, grad);
                for i in rng.sample_indices(n, mb.size) {
                    src.add_datum_gradient(i, theta, scale, grad);
                }
            }
        }
    }
}

/// Runs `iterations` steps from `start`, numbering steps from
/// `first_step` (1-based) for the schedule, and hands every new state to
/// `visit(k, theta_k)` with `k` 0-based within this segment. Returns the
/// final state.
pub fn drive_chain<T, P, F>(
    potential: &P,
    config: &ChainConfig<T>,
    first_step: usize,
    mut visit: F,
) -> Result<Vec<T>>
where
    T: Real,
    P: Potential<T> + ?Sized,
    F: FnMut(usize, &[T]),
{
    config.validate(potential)?;
    let d = config.dim();
    let mut theta = config.initial.clone();
    let mut grad = vec![T::zero(); d];
    let mut xi = vec![T::zero(); d];
    let mut noise = config.drive.noise();
    let mut oracle = GradientOracle::new(potential, config.minibatch);
    let limit = T::lit(DIVERGENCE_NORM);
    for k in 0..config.iterations {
        oracle.eval(&theta, &mut grad);
        noise.fill(k, &mut xi);
        let h = config.schedule.step(first_step + k);
        step_in_place(&mut theta, &grad, h, &xi);
        let r = norm(&theta);
        if !(r <= limit) {
            return Err(Error::Divergence {
                iteration: first_step + k,
                norm: r.as_f64(),
            });
        }
        visit(k, &theta);
    }
    Ok(theta)
}

/// Runs a chain and keeps the whole trajectory.
pub fn run_chain<T, P>(potential: &P, config: ChainConfig<T>) -> Result<ChainRun<T>>
where
    T: Real,
    P: Potential<T> + ?Sized,
{
    let start = Instant::now();
    let d = config.dim();
    let mut trajectory = Vec::with_capacity(config.iterations * d);
    drive_chain(potential, &config, 1, |_, theta| trajectory.extend_from_slice(theta))?;
    Ok(ChainRun {
        segments: vec![config.iterations],
        config,
        trajectory,
        dim: d,
        elapsed: start.elapsed(),
    })
}

/// Appends `extra` iterations driven by `next_drive`, starting from the
/// last state of `run` and continuing its step numbering.
pub fn continue_chain<T, P>(
    potential: &P,
    mut run: ChainRun<T>,
    next_drive: Drive<T>,
    extra: usize,
) -> Result<ChainRun<T>>
where
    T: Real,
    P: Potential<T> + ?Sized,
{
    if extra == 0 {
        return Ok(run);
    }
    let start = Instant::now();
    let mut cfg = run.config.clone();
    cfg.initial = run.last().to_vec();
    cfg.iterations = extra;
    cfg.drive = next_drive;
    if let Some(mb) = cfg.minibatch.as_mut() {
        // fresh batches for the new segment
        mb.stream = mb.stream.wrapping_add(run.segments.len() as u64 * (1 << 40));
    }
    let first = run.len() + 1;
    drive_chain(potential, &cfg, first, |_, theta| run.trajectory.extend_from_slice(theta))?;
    run.segments.push(extra);
    run.elapsed += start.elapsed();
    Ok(run)
}

/// Distances of two synchronously coupled chains and the contraction bound.
#[derive(Clone, Debug)]
pub struct CouplingReport<T> {
    /// `|theta_k - theta'_k|` for `k = 0..=steps`.
    pub distances: Vec<T>,
    /// `1 - hM` when constants are declared.
    pub rho: Option<T>,
    /// `|theta_0 - theta'_0| rho^k`.
    pub envelope: Option<Vec<T>>,
    /// Whether `h <= 2/(L+M)`.
    pub step_within_bound: Option<bool>,
    /// `ceil(log_rho(h) / 2)`, the memory length in the error analysis.
    pub memory: Option<usize>,
}

impl<T: Real> CouplingReport<T> {
    /// Successive ratios `d_{k+1}/d_k` (skipping zero distances).
    pub fn ratios(&self) -> Vec<T> {
        self.distances
            .windows(2)
            .filter(|w| w[0] > T::zero())
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// `ceil(log_rho(h) / 2)` for `0 < rho < 1`.
pub fn memory_length<T: Real>(rho: T, h: T) -> Option<usize> {
    if !(rho > T::zero() && rho < T::one() && h > T::zero() && h < T::one()) {
        return None;
    }
    Some((T::lit(0.5) * h.ln() / rho.ln()).ceil().to_usize().unwrap_or(usize::MAX))
}

/// Runs chains from `a` and `b` with identical perturbations at every step.
pub fn coupling_diagnostic<T, P>(
    potential: &P,
    a: &[T],
    b: &[T],
    h: T,
    steps: usize,
    drive: &Drive<T>,
) -> Result<CouplingReport<T>>
where
    T: Real,
    P: Potential<T> + ?Sized,
{
    let d = potential.dim();
    for v in [a, b] {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    if !(h > T::zero()) {
        return Err(Error::Domain(format!("step size {h} must be positive")));
    }
    drive.check(d, steps)?;
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    let (mut gx, mut gy) = (vec![T::zero(); d], vec![T::zero(); d]);
    let mut xi = vec![T::zero(); d];
    let mut noise = drive.noise();
    let mut distances = Vec::with_capacity(steps + 1);
    distances.push(dist(&x, &y));
    for k in 0..steps {
        potential.gradient(&x, &mut gx);
        potential.gradient(&y, &mut gy);
        noise.fill(k, &mut xi);
        step_in_place(&mut x, &gx, h, &xi);
        step_in_place(&mut y, &gy, h, &xi);
        let dk = dist(&x, &y);
        if !dk.is_finite() {
            return Err(Error::Divergence {
                iteration: k + 1,
                norm: f64::INFINITY,
            });
        }
        distances.push(dk);
    }
    let constants = potential.constants();
    let rho = constants.map(|c| c.rho(h));
    let envelope = rho.map(|r| {
        let d0 = distances[0];
        (0..=steps).map(|k| d0 * r.powi(k as i32)).collect()
    });
    Ok(CouplingReport {
        distances,
        rho,
        envelope,
        step_within_bound: constants.map(|c| h <= c.max_step()),
        memory: rho.and_then(|r| memory_length(r, h)),
    })
}
