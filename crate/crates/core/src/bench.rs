//! Paired LMC / LQMC replicate experiments and their MSE reports.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cud::{builtin_config, gcd, generate_cud, CudSequence, PointSet};
use crate::drive::DriveMatrix;
use crate::error::{Error, Result};
use crate::models::{
    closed_form_posterior, double_well_truth, reference_truth, synthesize_data, CrossedEffects,
    DataKind, DoubleWell, GroundTruth, LinearRegression, LogisticRegression, Potential, Provenance,
    ReferenceSpec, StandardNormal, SyntheticDataset, TestFamily,
};
use crate::prng::{streams, BaselinePrng};
use crate::samplers::{drive_chain, memory_length, ChainConfig, ChainRun, Drive, Minibatch, StepSchedule};
use crate::scalar::Real;

/// `f(x) = family(x_j)` with a 0-based coordinate `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestFunction {
    pub family: TestFamily,
    pub coordinate: usize,
}

impl TestFunction {
    pub fn new(family: TestFamily, coordinate: usize) -> Self {
        Self { family, coordinate }
    }

    #[inline]
    pub fn eval<T: Real>(&self, theta: &[T]) -> f64 {
        self.family.apply(theta[self.coordinate].as_f64())
    }
}

/// Mean of `f` over the samples after the first `discard`.
pub fn estimate<T: Real>(run: &ChainRun<T>, f: TestFunction, discard: usize) -> Result<f64> {
    if discard >= run.len() {
        return Err(Error::Domain(format!(
            "discarding {discard} of {} samples leaves nothing to average",
            run.len()
        )));
    }
    if f.coordinate >= run.dim() {
        return Err(Error::DimensionMismatch {
            expected: run.dim(),
            got: f.coordinate + 1,
        });
    }
    let kept = run.len() - discard;
    Ok(run.samples().skip(discard).map(|s| f.eval(s)).sum::<f64>() / kept as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lmc,
    Lqmc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lmc => "lmc",
            Method::Lqmc => "lqmc",
        })
    }
}

/// Target of an experiment; data-backed models are synthesized from
/// `data_seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Linear {
        n: usize,
        d: usize,
        #[serde(default = "default_noise_var")]
        noise_var: f64,
        data_seed: u64,
    },
    Logistic {
        n: usize,
        d: usize,
        data_seed: u64,
    },
    Crossed {
        rows: usize,
        cols: usize,
        data_seed: u64,
    },
    DoubleWell,
    StandardNormal {
        dim: usize,
    },
}

fn default_noise_var() -> f64 {
    crate::models::LINEAR_NOISE_VAR
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Linear { .. } => "linear",
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::Crossed { .. } => "crossed",
            ModelSpec::DoubleWell => "double_well",
            ModelSpec::StandardNormal { .. } => "standard_normal",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::Linear { d, .. } | ModelSpec::Logistic { d, .. } => d,
            ModelSpec::Crossed { rows, cols, .. } => rows + cols + 3,
            ModelSpec::DoubleWell => 1,
            ModelSpec::StandardNormal { dim } => dim,
        }
    }

    pub fn dataset(&self) -> Result<Option<SyntheticDataset>> {
        Ok(match *self {
            ModelSpec::Linear { n, d, data_seed, .. } => Some(synthesize_data(DataKind::Linear, n, d, data_seed)?),
            ModelSpec::Logistic { n, d, data_seed } => Some(synthesize_data(DataKind::Logistic, n, d, data_seed)?),
            ModelSpec::Crossed { rows, cols, data_seed } => {
                Some(synthesize_data(DataKind::Crossed, rows, cols, data_seed)?)
            }
            _ => None,
        })
    }

    /// Builds the potential (synthesizing its data if needed).
    pub fn build(&self) -> Result<Box<dyn Potential<f64>>> {
        let data = self.dataset()?;
        Ok(match (self, data.as_ref()) {
            (ModelSpec::Linear { noise_var, .. }, Some(ds)) => Box::new(LinearRegression::new(ds, *noise_var)?),
            (ModelSpec::Logistic { .. }, Some(ds)) => Box::new(LogisticRegression::new(ds)?),
            (ModelSpec::Crossed { .. }, Some(ds)) => Box::new(CrossedEffects::from_dataset(ds)?),
            (ModelSpec::DoubleWell, _) => Box::new(DoubleWell),
            (ModelSpec::StandardNormal { dim }, _) => Box::new(StandardNormal { dim: *dim }),
            _ => unreachable!("data-backed models always synthesize a dataset"),
        })
    }

    fn validate(&self) -> Result<()> {
        let bad = match *self {
            ModelSpec::Linear { n, d, noise_var, .. } => n == 0 || d == 0 || !(noise_var > 0.0),
            ModelSpec::Logistic { n, d, .. } => n == 0 || d == 0,
            ModelSpec::Crossed { rows, cols, .. } => rows == 0 || cols == 0,
            ModelSpec::DoubleWell => false,
            ModelSpec::StandardNormal { dim } => dim == 0,
        };
        if bad {
            return Err(Error::Config(format!("invalid {} model sizes", self.name())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    Constant { step: f64 },
    /// `h_k = c0 (c1 + k)^exponent` with `h_1 = first` and `h_n = last`
    /// over the full chain length.
    Decreasing { first: f64, last: f64, exponent: f64 },
}

impl ScheduleSpec {
    pub fn resolve(&self, n: usize) -> Result<StepSchedule<f64>> {
        match *self {
            ScheduleSpec::Constant { step } => {
                let s = StepSchedule::Constant(step);
                s.validate(n)?;
                Ok(s)
            }
            ScheduleSpec::Decreasing { first, last, exponent } => {
                StepSchedule::from_endpoints(first, last, n, exponent)
            }
        }
    }

    /// First step size (the one used for contraction diagnostics).
    pub fn initial_step(&self) -> f64 {
        match *self {
            ScheduleSpec::Constant { step } => step,
            ScheduleSpec::Decreasing { first, .. } => first,
        }
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Constant { step } => write!(f, "h={step:e}"),
            ScheduleSpec::Decreasing { first, last, exponent } => {
                write!(f, "h={first:e}..{last:e};e={exponent}")
            }
        }
    }
}

/// Where the ground truth comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TruthSpec {
    /// Closed form or quadrature, when the model has one.
    Exact,
    /// Long pseudo-random reference chains started at the chain start.
    Reference {
        step: f64,
        iterations: usize,
        seeds: usize,
    },
}

/// Chain starting point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Zero,
    /// Gradient descent to the mode with step `1/L` (or `step`).
    Mode { step: f64, iterations: usize },
    Point { value: Vec<f64> },
}

/// A full experiment: for every order `m`, `replicates` LQMC chains of
/// length `2^m - 1` with independent random shifts, paired with as many
/// pseudo-random LMC chains of the same length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub seed: u64,
    pub model: ModelSpec,
    pub schedule: ScheduleSpec,
    pub orders: Vec<u32>,
    pub replicates: usize,
    pub families: Vec<TestFamily>,
    pub truth: TruthSpec,
    pub initial: InitialSpec,
    /// Order of the LFSR used for a burn-in prefix (LMC burns in for the
    /// same number of steps); the prefix is excluded from estimates.
    #[serde(default)]
    pub burn_in_order: Option<u32>,
    #[serde(default)]
    pub offset: Option<u64>,
    #[serde(default)]
    pub minibatch: Option<usize>,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.orders.is_empty() {
            return Err(Error::Config("no LFSR orders given".into()));
        }
        for &m in self.orders.iter().chain(self.burn_in_order.iter()) {
            builtin_config(m, self.offset)?;
            if m > 24 {
                return Err(Error::Size(format!("order {m} is too long to run")));
            }
        }
        if self.replicates < 2 {
            return Err(Error::Config("at least two replicates are needed for standard errors".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("no test functions given".into()));
        }
        let longest = self.orders.iter().map(|&m| (1usize << m) - 1).max().unwrap_or(1);
        self.schedule.resolve(longest + self.burn_in_len())?;
        match &self.truth {
            TruthSpec::Exact => {
                if matches!(self.model, ModelSpec::Logistic { .. } | ModelSpec::Crossed { .. }) {
                    return Err(Error::Config(format!(
                        "no exact ground truth for the {} model; use a reference run",
                        self.model.name()
                    )));
                }
            }
            TruthSpec::Reference { step, iterations, seeds } => {
                if !(*step > 0.0) || *iterations < 16 || *seeds < 2 {
                    return Err(Error::Config("reference run needs h > 0, >= 16 steps and >= 2 seeds".into()));
                }
            }
        }
        if let InitialSpec::Point { value } = &self.initial {
            if value.len() != self.model.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.model.dim(),
                    got: value.len(),
                });
            }
        }
        if let (Some(b), ModelSpec::Linear { n, .. } | ModelSpec::Logistic { n, .. }) = (self.minibatch, &self.model) {
            if b == 0 || b > *n {
                return Err(Error::Config(format!("minibatch size {b} not in 1..={n}")));
            }
        } else if self.minibatch.is_some() {
            return Err(Error::Config(format!("the {} model has no minibatch gradients", self.model.name())));
        }
        Ok(())
    }

    fn burn_in_len(&self) -> usize {
        self.burn_in_order.map_or(0, |m| (1usize << m) - 1)
    }
}

/// Ground truth for an experiment's model.
pub fn resolve_truth(exp: &Experiment, potential: &dyn Potential<f64>, start: &[f64]) -> Result<GroundTruth> {
    match (&exp.truth, &exp.model) {
        (TruthSpec::Exact, ModelSpec::Linear { noise_var, .. }) => {
            closed_form_posterior(&exp.model.dataset()?.expect("linear data"), *noise_var)
        }
        (TruthSpec::Exact, ModelSpec::DoubleWell) => double_well_truth(),
        (TruthSpec::Exact, ModelSpec::StandardNormal { dim }) => GroundTruth::new(
            [vec![0.0; *dim], vec![1.0; *dim], vec![0.5; *dim]],
            None,
            Provenance::ClosedForm,
        ),
        (TruthSpec::Exact, m) => Err(Error::Config(format!("no exact ground truth for the {} model", m.name()))),
        (TruthSpec::Reference { step, iterations, seeds }, _) => {
            let mut spec = ReferenceSpec::new(*step, *iterations, *seeds, start.to_vec());
            spec.base_seed = exp.seed;
            reference_truth(potential, &spec)
        }
    }
}

/// Starting point of every chain.
pub fn resolve_initial(spec: &InitialSpec, potential: &dyn Potential<f64>) -> Result<Vec<f64>> {
    let d = potential.dim();
    match spec {
        InitialSpec::Zero => Ok(vec![0.0; d]),
        InitialSpec::Point { value } => {
            if value.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: value.len() });
            }
            Ok(value.clone())
        }
        InitialSpec::Mode { step, iterations } => {
            let h = potential.constants().map_or(*step, |c| c.smoothness.recip());
            let cfg = ChainConfig::new(vec![0.0; d], *iterations, StepSchedule::Constant(h), Drive::Zero);
            drive_chain(potential, &cfg, 1, |_, _| {})
        }
    }
}

/// One aggregated report line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MseRow {
    pub model: String,
    pub method: Method,
    pub m: u32,
    pub n: usize,
    pub schedule: String,
    pub test_fn: TestFamily,
    pub mse: f64,
    pub stderr: f64,
    pub replicates: usize,
}

/// Coordinate averages of one replicate's estimates and squared errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicateRow {
    pub method: Method,
    pub m: u32,
    pub replicate: usize,
    pub test_fn: TestFamily,
    pub estimate: f64,
    pub squared_error: f64,
}

/// Resolved configuration of one order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderInfo {
    pub m: u32,
    pub n: usize,
    pub polynomial: String,
    pub offset: u64,
    pub width: usize,
    pub schedule: String,
    /// `(ell, gcd(d ell, n))` when the model declares its constants.
    pub memory: Option<(usize, u64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub experiment: String,
    pub seed: u64,
    pub dim: usize,
    pub truth: String,
    pub burn_in: usize,
    pub initial: Vec<f64>,
    pub smoothness: Option<f64>,
    pub convexity: Option<f64>,
    pub orders: Vec<OrderInfo>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
    pub replicates: Vec<ReplicateRow>,
    pub metadata: RunMetadata,
    pub truth: GroundTruth,
}

impl MseReport {
    pub fn row(&self, method: Method, m: u32, family: TestFamily) -> Option<&MseRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.m == m && r.test_fn == family)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "model,method,m,n,schedule,test_fn,mse,stderr,replicates")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.10e},{:.10e},{}",
                r.model, r.method, r.m, r.n, r.schedule, r.test_fn, r.mse, r.stderr, r.replicates
            )?;
        }
        Ok(())
    }

    pub fn write_replicates_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "method,m,replicate,test_fn,estimate,squared_error")?;
        for r in &self.replicates {
            writeln!(
                w,
                "{},{},{},{},{:.17e},{:.17e}",
                r.method, r.m, r.replicate, r.test_fn, r.estimate, r.squared_error
            )?;
        }
        Ok(())
    }
}

struct Job {
    order_index: usize,
    method: Method,
    replicate: usize,
}

fn replicate_stream(tag: u64, m: u32, replicate: usize, method: Method, prefix: bool) -> u64 {
    let idx = ((replicate as u64) << 8) | ((m as u64) << 2) | ((method as u64) << 1) | prefix as u64;
    streams::tagged(tag, idx)
}

fn shifted_drive(seq: &CudSequence, dim: usize, seed: u64, stream: u64) -> Result<Drive<f64>> {
    let mut rng = BaselinePrng::new(seed, stream);
    Ok(Drive::Cud(Arc::new(
        DriveMatrix::unshifted(seq.clone(), dim)?.with_random_shift(&mut rng),
    )))
}

/// Runs every (order, method, replicate) chain and aggregates MSE rows.
/// Results do not depend on the thread count.
pub fn run_comparison(exp: &Experiment) -> Result<MseReport> {
    exp.validate()?;
    let potential = exp.model.build()?;
    let potential: &dyn Potential<f64> = potential.as_ref();
    let d = potential.dim();
    let start = resolve_initial(&exp.initial, potential)?;
    let truth = resolve_truth(exp, potential, &start)?;
    let burn = exp.burn_in_len();

    let mut sequences = Vec::new();
    let mut orders = Vec::new();
    for &m in &exp.orders {
        let cfg = builtin_config(m, exp.offset)?;
        let seq = generate_cud(&cfg)?;
        let n = seq.len();
        let schedule = exp.schedule.resolve(burn + n)?;
        let memory = potential.constants().and_then(|c| {
            let h = exp.schedule.initial_step();
            memory_length(c.rho(h), h).map(|l| (l, gcd((d * l) as u64, n as u64)))
        });
        orders.push(OrderInfo {
            m,
            n,
            polynomial: cfg.poly().to_string(),
            offset: cfg.offset(),
            width: crate::drive::coprime_width(n, d),
            schedule: format!("{schedule:?}"),
            memory,
        });
        sequences.push((seq, schedule));
    }
    let prefix_seq = match exp.burn_in_order {
        Some(m) => Some(generate_cud(&builtin_config(m, exp.offset)?)?),
        None => None,
    };

    let jobs: Vec<Job> = (0..exp.orders.len())
        .flat_map(|order_index| {
            [Method::Lmc, Method::Lqmc].into_iter().flat_map(move |method| {
                (0..exp.replicates).map(move |replicate| Job {
                    order_index,
                    method,
                    replicate,
                })
            })
        })
        .collect();

    // per family: (mean estimate, mean squared error) over coordinates
    let per_job: Vec<Vec<(f64, f64)>> = jobs
        .par_iter()
        .map(|job| {
            let m = exp.orders[job.order_index];
            let (seq, schedule) = &sequences[job.order_index];
            let n = seq.len();
            let drive_for = |prefix: bool, seq: &CudSequence| -> Result<Drive<f64>> {
                match job.method {
                    Method::Lmc => Ok(Drive::PseudoRandom {
                        seed: exp.seed,
                        stream: replicate_stream(streams::LMC_DRIVE, m, job.replicate, job.method, prefix),
                    }),
                    Method::Lqmc => shifted_drive(
                        seq,
                        d,
                        exp.seed,
                        replicate_stream(streams::SHIFT, m, job.replicate, job.method, prefix),
                    ),
                }
            };
            let minibatch = |prefix: bool| {
                exp.minibatch.map(|size| Minibatch {
                    size,
                    seed: exp.seed,
                    stream: replicate_stream(streams::MINIBATCH, m, job.replicate, job.method, prefix),
                })
            };
            let mut theta = start.clone();
            if let Some(pseq) = &prefix_seq {
                let mut cfg = ChainConfig::new(theta, burn, *schedule, drive_for(true, pseq)?);
                cfg.minibatch = minibatch(true);
                theta = drive_chain(potential, &cfg, 1, |_, _| {})?;
            }
            let mut cfg = ChainConfig::new(theta, n, *schedule, drive_for(false, seq)?);
            cfg.minibatch = minibatch(false);
            let mut sums = vec![0.0; exp.families.len() * d];
            drive_chain(potential, &cfg, burn + 1, |_, theta| {
                for (fi, f) in exp.families.iter().enumerate() {
                    let row = &mut sums[fi * d..(fi + 1) * d];
                    for (acc, &x) in row.iter_mut().zip(theta) {
                        *acc += f.apply(x);
                    }
                }
            })?;
            Ok(exp
                .families
                .iter()
                .enumerate()
                .map(|(fi, &f)| {
                    let est = |j: usize| sums[fi * d + j] / n as f64;
                    let mean = (0..d).map(est).sum::<f64>() / d as f64;
                    let sq = (0..d).map(|j| (est(j) - truth.value(f, j)).powi(2)).sum::<f64>() / d as f64;
                    (mean, sq)
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for (job, errs) in jobs.iter().zip(&per_job) {
        for (fi, &f) in exp.families.iter().enumerate() {
            replicates.push(ReplicateRow {
                method: job.method,
                m: exp.orders[job.order_index],
                replicate: job.replicate,
                test_fn: f,
                estimate: errs[fi].0,
                squared_error: errs[fi].1,
            });
        }
    }
    let r = exp.replicates as f64;
    for (oi, info) in orders.iter().enumerate() {
        for method in [Method::Lmc, Method::Lqmc] {
            for (fi, &f) in exp.families.iter().enumerate() {
                let errs: Vec<f64> = jobs
                    .iter()
                    .zip(&per_job)
                    .filter(|(j, _)| j.order_index == oi && j.method == method)
                    .map(|(_, e)| e[fi].1)
                    .collect();
                let mse = errs.iter().sum::<f64>() / r;
                let var = errs.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / (r - 1.0);
                rows.push(MseRow {
                    model: exp.model.name().to_string(),
                    method,
                    m: info.m,
                    n: info.n,
                    schedule: exp.schedule.to_string(),
                    test_fn: f,
                    mse,
                    stderr: (var / r).sqrt(),
                    replicates: exp.replicates,
                });
            }
        }
    }
    let constants = potential.constants();
    Ok(MseReport {
        rows,
        replicates,
        metadata: RunMetadata {
            experiment: exp.name.clone(),
            seed: exp.seed,
            dim: d,
            truth: truth.provenance.to_string(),
            burn_in: burn,
            initial: start,
            smoothness: constants.map(|c| c.smoothness),
            convexity: constants.map(|c| c.convexity),
            orders,
        },
        truth,
    })
}

/// Least-squares slope of `log mse` against `log n`.
pub fn log_log_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(n, v)| n == 0 || !(v > 0.0)) {
        return Err(Error::Domain("slope needs two or more positive points".into()));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Multiplicative order of `a` modulo `p`.
fn multiplicative_order(a: u64, p: u64) -> u64 {
    let mut x = a % p;
    let mut k = 1;
    while x != 1 && k < p {
        x = x * a % p;
        k += 1;
    }
    k
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|q| q * q <= p).all(|q| p % q != 0)
}

/// Smallest primitive root modulo a prime `p`.
pub fn smallest_primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    Ok((1..p).find(|&a| multiplicative_order(a, p) == p - 1).unwrap_or(1))
}

/// Full-period multiplicative LCG `x_{i+1} = a x_i mod p` and its
/// `p - 1` cyclic overlapping pairs `(x_i/p, x_{i+1}/p)`.
pub fn lcg_demo(p: u64, a: u64, seed: u64) -> Result<PointSet<f64>> {
    if !is_prime(p) || p > 1 << 20 {
        return Err(Error::Domain(format!("modulus {p} must be a prime below 2^20")));
    }
    let order = multiplicative_order(a, p);
    if a % p == 0 || order != p - 1 {
        return Err(Error::Domain(format!(
            "{a} has order {order} modulo {p}, not {}",
            p - 1
        )));
    }
    if seed % p == 0 {
        return Err(Error::Domain("seed must be nonzero modulo p".into()));
    }
    let mut xs = Vec::with_capacity((p - 1) as usize);
    let mut x = seed % p;
    for _ in 0..p - 1 {
        xs.push(x as f64 / p as f64);
        x = x * a % p;
    }
    crate::cud::overlapping_pairs(&xs)
}

/// i.i.d. uniform point set of `len` points in `[0,1)^dim`.
pub fn iid_points(len: usize, dim: usize, seed: u64, index: u64) -> Result<PointSet<f64>> {
    let mut rng = BaselinePrng::new(seed, streams::tagged(streams::IID_POINTS, index));
    PointSet::new(dim, (0..len * dim).map(|_| rng.uniform()).collect())
}

/// Median exact star discrepancy over `sets` i.i.d. point sets.
pub fn iid_median_discrepancy(len: usize, dim: usize, sets: usize, seed: u64) -> Result<f64> {
    if sets == 0 {
        return Err(Error::Config("need at least one i.i.d. set".into()));
    }
    let mut ds: Vec<f64> = (0..sets as u64)
        .into_par_iter()
        .map(|i| crate::cud::star_discrepancy(&iid_points(len, dim, seed, i)?))
        .collect::<Result<_>>()?;
    ds.sort_by(f64::total_cmp);
    let k = ds.len();
    Ok(if k % 2 == 1 {
        ds[k / 2]
    } else {
        0.5 * (ds[k / 2 - 1] + ds[k / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cud::star_discrepancy_2d;
    use crate::samplers::run_chain;

    fn small_linear() -> Experiment {
        Experiment {
            name: "t".into(),
            seed: 7,
            model: ModelSpec::Linear {
                n: 5,
                d: 3,
                noise_var: 0.25,
                data_seed: 1,
            },
            schedule: ScheduleSpec::Constant { step: 0.01 },
            orders: vec![6, 8],
            replicates: 4,
            families: TestFamily::ALL.to_vec(),
            truth: TruthSpec::Exact,
            initial: InitialSpec::Zero,
            burn_in_order: None,
            offset: None,
            minibatch: None,
        }
    }

    #[test]
    fn estimate_examples() {
        let p = StandardNormal { dim: 2 };
        let cfg = ChainConfig::new(vec![3.0, -1.0], 5, StepSchedule::Constant(0.5), Drive::Zero);
        let run = run_chain(&p, cfg).unwrap();
        let f = TestFunction::new(TestFamily::Coordinate, 0);
        let want = [1.5, 0.75, 0.375, 0.1875, 0.09375].iter().sum::<f64>() / 5.0;
        assert!((estimate(&run, f, 0).unwrap() - want).abs() < 1e-15);
        assert!((estimate(&run, f, 4).unwrap() - 0.09375).abs() < 1e-15);
        assert!(estimate(&run, f, 5).is_err());
        assert!(estimate(&run, TestFunction::new(TestFamily::Square, 2), 0).is_err());

        let g = crate::drive::GaussianDrive::new(1, vec![-1.0, 1.0]).unwrap();
        let cfg = ChainConfig::new(vec![0.0], 2, StepSchedule::Constant(0.5), Drive::Explicit(Arc::new(g)));
        let run = run_chain(&StandardNormal { dim: 1 }, cfg).unwrap();
        assert_eq!(run.sample(0), &[-1.0]);
        assert_eq!(run.sample(1), &[0.5]);
        assert_eq!(estimate(&run, TestFunction::new(TestFamily::Indicator, 0), 0).unwrap(), 0.5);
    }

    #[test]
    fn report_is_deterministic_and_consistent() {
        let exp = small_linear();
        let a = run_comparison(&exp).unwrap();
        let b = run_comparison(&exp).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(a.rows.len(), 2 * 2 * 3);
        for row in &a.rows {
            assert!(row.mse >= 0.0 && row.stderr >= 0.0);
            let errs: Vec<f64> = a
                .replicates
                .iter()
                .filter(|r| r.method == row.method && r.m == row.m && r.test_fn == row.test_fn)
                .map(|r| r.squared_error)
                .collect();
            assert_eq!(errs.len(), 4);
            assert!((errs.iter().sum::<f64>() / 4.0 - row.mse).abs() <= 1e-15 * row.mse.max(1e-300));
        }
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with("model,method,m,n,schedule,test_fn,mse,stderr,replicates\n"));
        assert_eq!(a.metadata.orders[0].n, 63);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let exp = small_linear();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| run_comparison(&exp)).unwrap();
        let b = run_comparison(&exp).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn validation_errors() {
        let mut e = small_linear();
        e.replicates = 1;
        assert!(run_comparison(&e).is_err());
        let mut e = small_linear();
        e.model = ModelSpec::Logistic {
            n: 5,
            d: 3,
            data_seed: 0,
        };
        assert!(matches!(run_comparison(&e), Err(Error::Config(_))));
        let mut e = small_linear();
        e.orders = vec![2];
        assert!(run_comparison(&e).is_err());
        let mut e = small_linear();
        e.minibatch = Some(6);
        assert!(run_comparison(&e).is_err());
    }

    #[test]
    fn burn_in_and_minibatch_run() {
        let mut e = small_linear();
        e.burn_in_order = Some(5);
        e.minibatch = Some(2);
        let r = run_comparison(&e).unwrap();
        assert_eq!(r.metadata.burn_in, 31);
        assert!(r.rows.iter().all(|row| row.mse.is_finite()));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(usize, f64)> = (4..10).map(|m| (1usize << m, 1.0 / (3.0 * (1u64 << m) as f64))).collect();
        assert!((log_log_slope(&pts).unwrap() + 1.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_err());
    }

    #[test]
    fn lcg_small_cases() {
        let pts = lcg_demo(5, 2, 1).unwrap();
        let xs: Vec<f64> = pts.points().map(|p| p[0] * 5.0).collect();
        assert_eq!(xs, vec![1.0, 2.0, 4.0, 3.0]);
        assert!(lcg_demo(5, 4, 1).is_err());
        assert!(lcg_demo(6, 5, 1).is_err());
        assert_eq!(smallest_primitive_root(5).unwrap(), 2);
        assert_eq!(smallest_primitive_root(251).unwrap(), 6);
        let lcg = lcg_demo(251, 6, 1).unwrap();
        assert_eq!(lcg.len(), 250);
        let d = star_discrepancy_2d(&lcg).unwrap();
        assert!(d < iid_median_discrepancy(250, 2, 25, 3).unwrap());
    }
}
