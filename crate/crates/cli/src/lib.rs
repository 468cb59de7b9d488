//! `lqmc` subcommands: sequence generation, exact discrepancy, experiment
//! runs and contraction diagnostics.

pub mod error;
pub mod spec;

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lqmc::bench::{iid_median_discrepancy, run_comparison, ModelSpec};
use lqmc::cud::{builtin_config, gcd, generate_cud, overlapping_pairs, star_discrepancy, PointSet};
use lqmc::drive::{coprime_width, DriveMatrix};
use lqmc::prng::{streams, BaselinePrng};
use lqmc::samplers::{coupling_diagnostic, Drive};

pub use error::{CliError, Failure};
pub use spec::ExperimentSpec;

#[derive(Parser, Debug)]
#[command(name = "lqmc", version, about = "LFSR-driven Langevin Monte Carlo experiments")]
pub struct Cli {
    /// Seed for random shifts, i.i.d. comparisons and experiment overrides.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit an LFSR sequence, its overlapping pairs or a drive matrix as CSV.
    Gen(GenArgs),
    /// Exact star discrepancy of a CSV point set.
    Discrepancy(DiscrepancyArgs),
    /// Run an experiment file and write the MSE report.
    Run(RunArgs),
    /// Synchronous-coupling distances and the contraction envelope.
    Diagnose(DiagnoseArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenForm {
    /// `index,numerator,value` per sequence element.
    Sequence,
    /// Cyclic overlapping pairs `v_i, v_{i+1}`.
    Pairs,
    /// Drive matrix rows (needs `--dim`).
    Matrix,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// LFSR order (3..=32; sequences are generated up to 28).
    #[arg(short, long)]
    pub m: u32,
    /// Offset between successive outputs (default: the table entry).
    #[arg(short, long)]
    pub s: Option<u64>,
    /// Emit only the first `count` rows.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_enum, default_value = "sequence")]
    pub form: GenForm,
    /// Drive matrix dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Apply a random shift drawn from `--seed` to the matrix.
    #[arg(long)]
    pub shifted: bool,
}

#[derive(Args, Debug)]
pub struct DiscrepancyArgs {
    /// CSV with one point per line (an optional non-numeric header is skipped).
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Also report the median over this many i.i.d. sets of the same size.
    #[arg(long)]
    pub compare_iid: Option<usize>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Experiment file.
    pub spec: PathBuf,
    /// Also write per-replicate squared errors here.
    #[arg(long)]
    pub replicates: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Quadratic,
    Linear,
    Logistic,
    Crossed,
    DoubleWell,
}

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Take the model from this experiment file instead of `--model`.
    #[arg(long, conflicts_with = "model")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "quadratic")]
    pub model: ModelName,
    /// Dimension of the quadratic model.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Step size (default: 1/(L+M) when the constants are known).
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::io("output", e).context(&p.display().to_string()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Diagnostics go to stdout when data goes to a file, else to stderr.
fn note(to_file: bool, line: &str) {
    if to_file {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

pub fn cmd_gen(args: &GenArgs, seed: u64, output: Option<&Path>) -> Result<(), CliError> {
    let cfg = builtin_config(args.m, args.s).map_err(|e| CliError::from_core("gen", e))?;
    let seq = generate_cud(&cfg).map_err(|e| CliError::from_core("gen", e))?;
    let n = seq.len();
    let to_file = output.is_some();
    note(to_file, &format!("polynomial {} offset {}", cfg.poly(), cfg.offset()));
    note(
        to_file,
        &format!("period {n} = 2^{} - 1, gcd(s, n) = {}", args.m, gcd(cfg.offset(), n as u64)),
    );
    let limit = args.count.unwrap_or(usize::MAX);
    let mut w = open_output(output)?;
    let io_err = |e| CliError::io("write", e);
    match args.form {
        GenForm::Sequence => {
            writeln!(w, "index,numerator,value").map_err(io_err)?;
            for i in 0..n.min(limit) {
                writeln!(w, "{i},{},{:.16e}", seq.numerator(i), seq.value::<f64>(i)).map_err(io_err)?;
            }
        }
        GenForm::Pairs => {
            let pts = overlapping_pairs(&seq.values::<f64>()).map_err(|e| CliError::from_core("gen", e))?;
            writeln!(w, "x,y").map_err(io_err)?;
            for p in pts.points().take(limit) {
                writeln!(w, "{:.16e},{:.16e}", p[0], p[1]).map_err(io_err)?;
            }
        }
        GenForm::Matrix => {
            let dim = args
                .dim
                .ok_or_else(|| CliError::validation("gen", "--form matrix needs --dim"))?;
            let width = coprime_width(n, dim);
            note(to_file, &format!("width {width} (requested {dim}), gcd(width, n) = {}", gcd(width as u64, n as u64)));
            let mut mat = DriveMatrix::<f64>::unshifted(seq, dim).map_err(|e| CliError::from_core("gen", e))?;
            if args.shifted {
                mat = mat.with_random_shift(&mut BaselinePrng::new(seed, streams::SHIFT));
            }
            let mut row = vec![0.0; dim];
            for r in 0..mat.rows().min(limit) {
                mat.row(r, &mut row);
                let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
                writeln!(w, "{}", line.join(",")).map_err(io_err)?;
            }
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a point CSV; blank lines and `#` comments are skipped, as is a
/// first line without any number.
pub fn read_points<R: BufRead>(r: R, dim: usize) -> Result<PointSet<f64>, CliError> {
    let mut coords = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CliError::io("read", e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split(',').map(str::trim).collect();
        if i == 0 && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if fields.len() != dim {
            return Err(CliError::validation(
                "parse",
                format!("line {}: expected {dim} values, found {}", i + 1, fields.len()),
            ));
        }
        for f in fields {
            coords.push(
                f.parse::<f64>()
                    .map_err(|e| CliError::validation("parse", format!("line {}: {f:?}: {e}", i + 1)))?,
            );
        }
    }
    if coords.is_empty() {
        return Err(CliError::validation("parse", "no points in input"));
    }
    PointSet::new(dim, coords).map_err(|e| CliError::from_core("parse", e))
}

pub fn cmd_discrepancy(args: &DiscrepancyArgs, seed: u64, output: Option<&Path>) -> Result<(), CliError> {
    if !(1..=2).contains(&args.dim) {
        return Err(CliError::validation("discrepancy", "dimension must be 1 or 2"));
    }
    let file = File::open(&args.input)
        .map_err(|e| CliError::validation("read", format!("{}: {e}", args.input.display())))?;
    let pts = read_points(BufReader::new(file), args.dim)?;
    let d = star_discrepancy(&pts).map_err(|e| CliError::from_core("discrepancy", e))?;
    let mut w = open_output(output)?;
    let io_err = |e| CliError::io("write", e);
    writeln!(w, "points {}", pts.len()).map_err(io_err)?;
    writeln!(w, "star_discrepancy {d:.12e}").map_err(io_err)?;
    if let Some(sets) = args.compare_iid {
        let med = iid_median_discrepancy(pts.len(), args.dim, sets, seed)
            .map_err(|e| CliError::from_core("i.i.d. comparison", e))?;
        writeln!(w, "iid_median {med:.12e} over {sets} sets").map_err(io_err)?;
        writeln!(w, "ratio {:.6}", d / med).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Path of the metadata file written next to a report.
pub fn sidecar_path(report: &Path) -> PathBuf {
    let mut s = report.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

pub fn cmd_run(args: &RunArgs, seed: Option<u64>, output: Option<&Path>) -> Result<(), CliError> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let out = output.map(Path::to_path_buf).or_else(|| {
        spec.output.as_ref().map(|p| match args.spec.parent() {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.clone(),
        })
    });
    let exp = spec.experiment();
    eprintln!(
        "running {}: model {}, orders {:?}, {} replicates",
        exp.name,
        exp.model.name(),
        exp.orders,
        exp.replicates
    );
    let report = run_comparison(&exp).map_err(|e| CliError::from_core("run", e))?;
    let io_err = |e| CliError::io("write", e);
    let mut w = open_output(out.as_deref())?;
    report.write_csv(&mut w).map_err(|e| CliError::from_core("write", e))?;
    w.flush().map_err(io_err)?;
    if let Some(path) = &out {
        let meta = toml::to_string(&Sidecar {
            spec: &spec,
            resolved: &report.metadata,
        })
        .map_err(|e| CliError::runtime("metadata", e.to_string()))?;
        std::fs::write(sidecar_path(path), meta).map_err(io_err)?;
        eprintln!("wrote {} and {}", path.display(), sidecar_path(path).display());
    }
    if let Some(p) = &args.replicates {
        let mut w = open_output(Some(p))?;
        report.write_replicates_csv(&mut w).map_err(|e| CliError::from_core("write", e))?;
        w.flush().map_err(io_err)?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    resolved: &'a lqmc::bench::RunMetadata,
}

fn diagnose_model(args: &DiagnoseArgs) -> Result<ModelSpec, CliError> {
    if let Some(p) = &args.spec {
        return Ok(ExperimentSpec::load(p)?.model);
    }
    Ok(match args.model {
        ModelName::Quadratic => ModelSpec::StandardNormal { dim: args.dim },
        ModelName::Linear => ModelSpec::Linear {
            n: 20,
            d: 100,
            noise_var: lqmc::models::LINEAR_NOISE_VAR,
            data_seed: 1,
        },
        ModelName::Logistic => ModelSpec::Logistic {
            n: 20,
            d: 10,
            data_seed: 1,
        },
        ModelName::Crossed => ModelSpec::Crossed {
            rows: 3,
            cols: 5,
            data_seed: 1,
        },
        ModelName::DoubleWell => ModelSpec::DoubleWell,
    })
}

pub fn cmd_diagnose(args: &DiagnoseArgs, seed: u64, output: Option<&Path>) -> Result<(), CliError> {
    let model = diagnose_model(args)?;
    let potential = model.build().map_err(|e| CliError::from_core("model", e))?;
    let d = potential.dim();
    let constants = potential.constants();
    let h = match (args.step, constants) {
        (Some(h), _) => h,
        (None, Some(c)) => 1.0 / (c.smoothness + c.convexity),
        (None, None) => return Err(CliError::validation("diagnose", "model has no declared constants; pass --step")),
    };
    if let Some(c) = constants {
        if h > c.max_step() {
            eprintln!(
                "warning: h = {h:e} exceeds 2/(L+M) = {:e}; the contraction bound does not apply",
                c.max_step()
            );
        }
    }
    let a = vec![1.0; d];
    let b = vec![-1.0; d];
    let drive = Drive::PseudoRandom {
        seed,
        stream: streams::LMC_DRIVE,
    };
    let rep = coupling_diagnostic(potential.as_ref(), &a, &b, h, args.steps, &drive)
        .map_err(|e| CliError::from_core("diagnose", e))?;
    let to_file = output.is_some();
    note(to_file, &format!("model {} (d = {d}), h = {h:e}, {} steps", model.name(), args.steps));
    match (constants, rep.rho) {
        (Some(c), Some(rho)) => {
            note(
                to_file,
                &format!("L = {:e}, M = {:e}, 1 - hM = {rho:.12}", c.smoothness, c.convexity),
            );
            if let Some(l) = rep.memory {
                note(to_file, &format!("memory length {l}"));
            }
            let worst = rep.ratios().into_iter().fold(0.0, f64::max);
            note(to_file, &format!("max ratio {worst:.12} (bound {rho:.12})"));
        }
        _ => note(to_file, "constants not declared: no envelope"),
    }
    let mut w = open_output(output)?;
    let io_err = |e| CliError::io("write", e);
    let with_env = rep.envelope.is_some();
    writeln!(w, "{}", if with_env { "k,distance,ratio,envelope" } else { "k,distance,ratio" }).map_err(io_err)?;
    for (k, dk) in rep.distances.iter().enumerate() {
        let ratio = if k > 0 && rep.distances[k - 1] > 0.0 {
            format!("{:.12e}", dk / rep.distances[k - 1])
        } else {
            String::new()
        };
        match &rep.envelope {
            Some(env) => writeln!(w, "{k},{dk:.12e},{ratio},{:.12e}", env[k]),
            None => writeln!(w, "{k},{dk:.12e},{ratio}"),
        }
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::validation("arguments", "--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::runtime("threads", e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(0);
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Gen(a) => cmd_gen(a, seed, out),
        Command::Discrepancy(a) => cmd_discrepancy(a, seed, out),
        Command::Run(a) => cmd_run(a, cli.seed, out),
        Command::Diagnose(a) => cmd_diagnose(a, seed, out),
    }
}
