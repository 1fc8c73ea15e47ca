use std::io::Write;

use serde::{Deserialize, Serialize};
use stm_reg::thresholds::ThresholdSet;
use stm_reg::BoundReport;

use crate::config::{Format, RunConfig};

pub const COLUMNS: [&str; 8] = ["N", "M", "gamma", "gamma_c", "lambda_big", "lambda_prime", "lambda_zero", "s_star_lo"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "M")]
    pub m: f64,
    pub gamma: f64,
    pub gamma_c: f64,
    pub lambda_big: f64,
    pub lambda_prime: f64,
    pub lambda_zero: f64,
    pub s_star_lo: f64,
}

impl ThresholdRow {
    pub fn new(n: u32, m: f64, gamma: f64, t: &ThresholdSet) -> Self {
        ThresholdRow {
            n,
            m,
            gamma,
            gamma_c: t.gamma_c,
            lambda_big: t.lambda_big,
            lambda_prime: t.lambda_prime,
            lambda_zero: t.lambda_zero,
            s_star_lo: t.s_star_lo,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut v = vec![self.n.to_string()];
        v.extend(
            [self.m, self.gamma, self.gamma_c, self.lambda_big, self.lambda_prime, self.lambda_zero, self.s_star_lo]
                .iter()
                .map(|&x| sig12(x)),
        );
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub ell: u32,
    pub p: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub gamma: f64,
    pub s_off_closed: f64,
    pub s_off_quadrature: f64,
    pub s_reg_closed: f64,
    pub s_reg_quadrature: f64,
}

const KERNEL_COLUMNS: [&str; 8] =
    ["ell", "p", "M", "gamma", "s_off_closed", "s_off_quadrature", "s_reg_closed", "s_reg_quadrature"];
const CHECK_COLUMNS: [&str; 7] = ["name", "lhs", "rhs", "margin", "tolerance", "passed", "context"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rows {
    Thresholds(Vec<ThresholdRow>),
    Kernels(Vec<KernelRow>),
    None,
}

/// Everything one run produces.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub rows: Rows,
    pub checks: Vec<BoundReport>,
    pub passed: bool,
}

impl Report {
    pub fn new(config: RunConfig, rows: Rows, checks: Vec<BoundReport>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Report { tool: "stm-reg", version: env!("CARGO_PKG_VERSION"), config, rows, checks, passed }
    }

    pub fn write(&self, w: &mut dyn Write) -> anyhow::Result<()> {
        match self.config.format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, self)?;
                writeln!(w)?;
            }
            Format::Csv => {
                let mut out = csv::Writer::from_writer(w);
                match &self.rows {
                    Rows::Thresholds(rows) => {
                        out.write_record(COLUMNS)?;
                        for r in rows {
                            out.write_record(r.fields())?;
                        }
                    }
                    Rows::Kernels(rows) => {
                        out.write_record(KERNEL_COLUMNS)?;
                        for r in rows {
                            let mut rec = vec![r.ell.to_string()];
                            rec.extend(
                                [r.p, r.m, r.gamma, r.s_off_closed, r.s_off_quadrature, r.s_reg_closed, r.s_reg_quadrature]
                                    .iter()
                                    .map(|&x| sig12(x)),
                            );
                            out.write_record(rec)?;
                        }
                    }
                    Rows::None => {
                        out.write_record(CHECK_COLUMNS)?;
                        for c in &self.checks {
                            out.write_record([
                                c.name.clone(),
                                sig12(c.lhs),
                                sig12(c.rhs),
                                sig12(c.margin),
                                sig12(c.tolerance),
                                c.passed.to_string(),
                                c.context.clone(),
                            ])?;
                        }
                    }
                }
                out.flush()?;
            }
        }
        Ok(())
    }
}

/// Round to 12 significant digits and print the shortest form of the result.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let r: f64 = format!("{x:.11e}").parse().expect("rounded float parses");
    if r == 0.0 {
        "0".into()
    } else if (1e-4..1e12).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.11533777124487454), "0.115337771245");
        assert_eq!(sig12(2.0), "2");
        assert_eq!(sig12(-1.0 / 3.0), "-0.333333333333");
        assert_eq!(sig12(1.234567890123456e-7), "1.23456789012e-7");
        assert_eq!(sig12(0.0), "0");
    }
}
