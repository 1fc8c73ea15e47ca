//! Run configuration: flat `key = value` files merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

/// Configuration or usage problem; maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Thresholds,
    Kernels,
    Positivity,
    Bounds,
    Potential,
    VerifyAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Sweep values: `2`, `0.1,1,10`, `a:b:n` (linear) or `log:a:b:n` (geometric).
#[derive(Parser, Debug)]
#[command(name = "stm-reg", version, about = "Threshold tables, positivity scans and bound suites")]
pub struct Cli {
    pub command: Command,
    /// Number of bosons (sweep of integers).
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Impurity-to-boson mass ratio (sweep).
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Three-body coupling (sweep); defaults to gamma_c + 0.05 per cell.
    #[arg(long)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "ell-max")]
    pub ell_max: Option<u32>,
    #[arg(long = "p-max")]
    pub p_max: Option<f64>,
    /// Points on the momentum grid.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(rename = "N")]
    pub n: Vec<u32>,
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    /// None means gamma_c + 0.05 in every cell.
    pub gamma: Option<Vec<f64>>,
    pub alpha: f64,
    pub b: f64,
    pub lambda: f64,
    pub ell_max: u32,
    pub p_max: f64,
    pub grid: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const GAMMA_OFFSET: f64 = 0.05;

const KEYS: [&str; 12] = ["N", "M", "gamma", "alpha", "b", "lambda", "ell-max", "p-max", "grid", "seed", "out", "format"];

pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key = value", i + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return usage(format!("config line {}: unknown key '{k}'", i + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return usage(format!("config line {}: duplicate key '{k}'", i + 1));
        }
    }
    Ok(map)
}

fn number(key: &str, s: &str) -> Result<f64, UsageError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => usage(format!("{key}: '{s}' is not a finite number")),
    }
}

fn count(key: &str, s: &str) -> Result<usize, UsageError> {
    s.trim().parse().or_else(|_| usage(format!("{key}: '{s}' is not a count")))
}

pub fn parse_sweep(key: &str, spec: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(|s| number(key, s)).collect::<Result<Vec<_>, _>>()?,
        ["log", a, b, n] => {
            let (a, b, n) = (number(key, a)?, number(key, b)?, count(key, n)?);
            if !(a > 0.0 && b > 0.0) {
                return usage(format!("{key}: log sweep endpoints must be positive"));
            }
            spaced(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
        }
        [a, b, n] => spaced(number(key, a)?, number(key, b)?, count(key, n)?),
        _ => return usage(format!("{key}: cannot parse sweep '{spec}'")),
    };
    if values.is_empty() {
        return usage(format!("{key}: empty sweep"));
    }
    Ok(values)
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl RunConfig {
    /// Merge `--config` file entries with flags (flags win) and validate ranges.
    pub fn from_cli(cli: &Cli) -> Result<Self, UsageError> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .or_else(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let pick = |key: &str, flag: Option<String>| flag.or_else(|| file.get(key).cloned());

        let n = parse_sweep("N", &pick("N", cli.n.clone()).unwrap_or_else(|| "2".into()))?
            .into_iter()
            .map(|v| {
                if v.fract() == 0.0 && v >= 2.0 && v <= u32::MAX as f64 {
                    Ok(v as u32)
                } else {
                    usage(format!("N: {v} is not an integer >= 2"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let m = parse_sweep("M", &pick("M", cli.m.clone()).unwrap_or_else(|| "1".into()))?;
        let gamma = pick("gamma", cli.gamma.clone()).map(|s| parse_sweep("gamma", &s)).transpose()?;
        let scalar = |key: &str, flag: Option<f64>, default: f64| -> Result<f64, UsageError> {
            match flag {
                Some(v) => Ok(v),
                None => file.get(key).map(|s| number(key, s)).unwrap_or(Ok(default)),
            }
        };
        let alpha = scalar("alpha", cli.alpha, 0.0)?;
        let b = scalar("b", cli.b, 1.0)?;
        let lambda = scalar("lambda", cli.lambda, 1.0)?;
        let p_max = scalar("p-max", cli.p_max, 40.0)?;
        let ell_max = match cli.ell_max {
            Some(v) => v,
            None => file.get("ell-max").map(|s| count("ell-max", s)).transpose()?.unwrap_or(8) as u32,
        };
        let grid = match cli.grid {
            Some(v) => v,
            None => file.get("grid").map(|s| count("grid", s)).transpose()?.unwrap_or(400),
        };
        let seed = match cli.seed {
            Some(v) => v,
            None => file
                .get("seed")
                .map(|s| s.parse::<u64>().or_else(|_| usage(format!("seed: '{s}' is not an integer"))))
                .transpose()?
                .unwrap_or(7),
        };
        let out = cli.out.clone().or_else(|| file.get("out").map(PathBuf::from));
        let format = match cli.format {
            Some(f) => f,
            None => match file.get("format").map(String::as_str) {
                None | Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => return usage(format!("format: '{other}' is not csv or json")),
            },
        };

        if m.iter().any(|&v| v <= 0.0) {
            return usage("M must be positive");
        }
        if let Some(g) = &gamma {
            if g.iter().any(|&v| v <= 0.0) {
                return usage("gamma must be positive");
            }
        }
        if !(b > 0.0 && lambda > 0.0) {
            return usage("b and lambda must be positive");
        }
        if !(p_max > 1e-3) {
            return usage("p-max must exceed 1e-3");
        }
        if grid < 2 {
            return usage("grid needs at least 2 points");
        }
        Ok(RunConfig { command: cli.command, n, m, gamma, alpha, b, lambda, ell_max, p_max, grid, seed, out, format })
    }

    /// (N, M, gamma) sweep cells in row-major order; gamma may be unset.
    pub fn cells(&self) -> Vec<(u32, f64, Option<f64>)> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                match &self.gamma {
                    Some(gs) => out.extend(gs.iter().map(|&g| (n, m, Some(g)))),
                    None => out.push((n, m, None)),
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("M", "0.1,1,10").unwrap(), vec![0.1, 1.0, 10.0]);
        assert_eq!(parse_sweep("M", "0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let l = parse_sweep("M", "log:0.01:100:5").unwrap();
        assert!((l[2] - 1.0).abs() < 1e-14 && (l[4] - 100.0).abs() < 1e-12);
        assert!(parse_sweep("M", "1:2:0").is_err());
        assert!(parse_sweep("M", "log:0:1:3").is_err());
        assert!(parse_sweep("M", "a,b").is_err());
    }

    #[test]
    fn config_file() {
        let m = parse_config_file("# run\nN = 3\nM=0.5 # light\n\n").unwrap();
        assert_eq!(m["N"], "3");
        assert_eq!(m["M"], "0.5");
        assert!(parse_config_file("N 3").is_err());
        assert!(parse_config_file("zeta = 1").is_err());
        assert!(parse_config_file("N = 2\nN = 3").is_err());
    }
}
