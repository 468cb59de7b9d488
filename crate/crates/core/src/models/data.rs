use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prng::{streams, BaselinePrng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Logistic,
    Linear,
    Crossed,
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataKind::Logistic => "logistic",
            DataKind::Linear => "linear",
            DataKind::Crossed => "crossed",
        })
    }
}

impl FromStr for DataKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(DataKind::Logistic),
            "linear" => Ok(DataKind::Linear),
            "crossed" => Ok(DataKind::Crossed),
            other => Err(Error::Data(format!("unknown dataset kind {other:?}"))),
        }
    }
}

/// Synthetic regression data, or a crossed-effects table.
///
/// For `Logistic`/`Linear`, `x` is `n x d` row-major and `y` has `n`
/// entries. For `Crossed`, `n = I` rows and `d = J` columns of `y`, `x` is
/// empty and `beta` holds `(mu, a, b, log var_a, log var_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    pub kind: DataKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Noise variance of the linear model.
pub const LINEAR_NOISE_VAR: f64 = 0.25;

/// `Sigma_ij = 2^{-|i-j|}`.
pub fn ar1_covariance(d: usize) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| 0.5f64.powi((i as i32 - j as i32).abs())).collect())
        .collect()
}

/// Draws `x ~ N(0, Sigma)` through the lower Cholesky factor of the AR(1)
/// covariance: `x_1 = z_1`, `x_j = x_{j-1}/2 + (sqrt 3 / 2) z_j`.
fn correlated_row(rng: &mut BaselinePrng, d: usize, out: &mut Vec<f64>) {
    let c = 0.75f64.sqrt();
    let mut prev = 0.0;
    for j in 0..d {
        let z: f64 = rng.standard_normal();
        let x = if j == 0 { z } else { 0.5 * prev + c * z };
        out.push(x);
        prev = x;
    }
}

pub fn synthesize_data(kind: DataKind, n: usize, d: usize, seed: u64) -> Result<SyntheticDataset> {
    if n == 0 || d == 0 {
        return Err(Error::Data("dataset sizes must be positive".into()));
    }
    let mut rng = BaselinePrng::new(seed, streams::DATA);
    let mut x = Vec::new();
    let mut y = Vec::with_capacity(n);
    let beta: Vec<f64>;
    match kind {
        DataKind::Logistic | DataKind::Linear => {
            beta = (0..d).map(|_| rng.standard_normal()).collect();
            x.reserve(n * d);
            for i in 0..n {
                correlated_row(&mut rng, d, &mut x);
                let eta: f64 = x[i * d..(i + 1) * d]
                    .iter()
                    .zip(&beta)
                    .map(|(a, b)| a * b)
                    .sum();
                let yi = match kind {
                    DataKind::Logistic => {
                        let p = 1.0 / (1.0 + (-eta).exp());
                        let u: f64 = rng.uniform();
                        if u < p {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    _ => eta + LINEAR_NOISE_VAR.sqrt() * rng.standard_normal::<f64>(),
                };
                y.push(yi);
            }
        }
        DataKind::Crossed => {
            let mu: f64 = rng.standard_normal();
            let log_va: f64 = rng.standard_normal();
            let log_vb: f64 = rng.standard_normal();
            let a: Vec<f64> = (0..n)
                .map(|_| (0.5 * log_va).exp() * rng.standard_normal::<f64>())
                .collect();
            let b: Vec<f64> = (0..d)
                .map(|_| (0.5 * log_vb).exp() * rng.standard_normal::<f64>())
                .collect();
            for ai in &a {
                for bj in &b {
                    y.push(mu + ai + bj + rng.standard_normal::<f64>());
                }
            }
            beta = std::iter::once(mu)
                .chain(a)
                .chain(b)
                .chain([log_va, log_vb])
                .collect();
        }
    }
    Ok(SyntheticDataset {
        kind,
        n,
        d,
        seed,
        x,
        y,
        beta,
    })
}

impl SyntheticDataset {
    /// Feature row `i` (regression kinds).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    /// CSV with a `kind,n,d,seed` header line, a `beta` line, then one line
    /// per observation (`y,x_1..x_d`, or the `J` entries of a crossed row).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kind,n,d,seed")?;
        writeln!(w, "{},{},{},{}", self.kind, self.n, self.d, self.seed)?;
        writeln!(w, "beta,{}", join(&self.beta))?;
        for i in 0..self.n {
            match self.kind {
                DataKind::Crossed => writeln!(w, "{}", join(&self.y[i * self.d..(i + 1) * self.d]))?,
                _ => writeln!(w, "{},{}", self.y[i], join(self.row(i)))?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
        let parse_err = |line: usize, message: String| Error::Parse { line, message };
        let get = |i: usize| {
            lines
                .get(i)
                .map(|s| s.trim())
                .ok_or_else(|| parse_err(i + 1, "unexpected end of file".into()))
        };
        if get(0)? != "kind,n,d,seed" {
            return Err(parse_err(1, "expected header kind,n,d,seed".into()));
        }
        let meta: Vec<&str> = get(1)?.split(',').collect();
        if meta.len() != 4 {
            return Err(parse_err(2, "expected 4 metadata fields".into()));
        }
        let kind: DataKind = meta[0].parse().map_err(|e: Error| parse_err(2, e.to_string()))?;
        let int = |s: &str| s.parse::<u64>().map_err(|e| parse_err(2, e.to_string()));
        let (n, d, seed) = (int(meta[1])? as usize, int(meta[2])? as usize, int(meta[3])?);
        let beta_line = get(2)?;
        let beta = parse_floats(
            beta_line
                .strip_prefix("beta,")
                .ok_or_else(|| parse_err(3, "expected beta line".into()))?,
            3,
        )?;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let vals = parse_floats(get(3 + i)?, 4 + i)?;
            match kind {
                DataKind::Crossed => {
                    if vals.len() != d {
                        return Err(parse_err(4 + i, format!("expected {d} values")));
                    }
                    y.extend(vals);
                }
                _ => {
                    if vals.len() != d + 1 {
                        return Err(parse_err(4 + i, format!("expected {} values", d + 1)));
                    }
                    y.push(vals[0]);
                    x.extend(&vals[1..]);
                }
            }
        }
        Ok(Self {
            kind,
            n,
            d,
            seed,
            x,
            y,
            beta,
        })
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_floats(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("{t:?}: {e}"),
            })
        })
        .collect()
}
