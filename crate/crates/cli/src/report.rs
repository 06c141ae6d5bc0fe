//! Output records and their JSON / CSV serialization.

use std::collections::BTreeMap;
use std::io::Write;

use painleve_tau::numerics::Cplx;
use painleve_tau::Certified;
use rug::{Float, Rational};
use serde::Serialize;

use crate::args::Format;

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub name: String,
    pub value: String,
    pub method: String,
    pub bits: u32,
    pub tol_achieved: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub results: Vec<Record>,
    pub checks: Vec<Check>,
    pub version: &'static str,
}

impl Report {
    pub fn new(command: &str, inputs: BTreeMap<String, String>) -> Self {
        Report {
            command: command.to_string(),
            inputs,
            results: Vec::new(),
            checks: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn push(
        &mut self,
        name: impl Into<String>,
        value: String,
        method: impl Into<String>,
        bits: u32,
        tol: f64,
    ) {
        self.results.push(Record {
            name: name.into(),
            value,
            method: method.into(),
            bits,
            tol_achieved: tol,
        });
    }

    pub fn float(
        &mut self,
        name: impl Into<String>,
        c: &Certified<Float>,
        method: impl Into<String>,
    ) {
        self.push(name, fmt_float(&c.value), method, c.bits, c.tol_achieved);
    }

    /// Exact value: no precision involved.
    pub fn exact(&mut self, name: impl Into<String>, q: &Rational, method: impl Into<String>) {
        self.push(name, q.to_string(), method, 0, 0.0);
    }

    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(["command", "name", "value", "method", "bits", "tol_achieved"])?;
                for r in &self.results {
                    w.write_record([
                        self.command.as_str(),
                        &r.name,
                        &r.value,
                        &r.method,
                        &r.bits.to_string(),
                        &r.tol_achieved.to_string(),
                    ])?;
                }
                for c in &self.checks {
                    w.write_record([
                        self.command.as_str(),
                        &format!("check:{}", c.name),
                        if c.pass { "pass" } else { "fail" },
                        &c.detail,
                        "",
                        "",
                    ])?;
                }
                w.flush()
            }
        }
    }
}

/// All digits of the binary value, in decimal.
pub fn fmt_float(x: &Float) -> String {
    x.to_string_radix(10, None)
}

/// `re`, or `re+imi` / `re-imi` when the imaginary part is non-zero.
pub fn fmt_cplx(z: &Cplx) -> String {
    if z.im.is_zero() {
        return fmt_float(&z.re);
    }
    let im = fmt_float(&z.im);
    if im.starts_with('-') {
        format!("{}{}i", fmt_float(&z.re), im)
    } else {
        format!("{}+{}i", fmt_float(&z.re), im)
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}
