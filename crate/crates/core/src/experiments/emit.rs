use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::Exponent;
use crate::measures::GENERATOR_NAME;

use super::config::{ExperimentConfig, OutputFormat};
use super::sweep::{SalemRow, SweepReport};

pub const CSV_HEADER: &str =
    "p,n,alpha,beta,q,A_size,E_size,AE_overlap,bohr_size,alpha_eff,beta_eff,rstar_lb,witness_kind,seed";

pub const SALEM_CSV_HEADER: &str = "p,n,alpha,seed,E_size,max_offzero,bound,pass";

/// Formats `x` with 12 significant digits, `%g` style.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn fmt_exp(e: Exponent) -> String {
    match e {
        Exponent::Finite(v) => fmt_sig(v),
        Exponent::Infinite => "inf".into(),
    }
}

/// CSV text for a sweep, rows ordered by `(q, seed, p)` as stored.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for res in &report.results {
        for r in &res.rows {
            let fields = [
                r.p.to_string(),
                r.n.to_string(),
                fmt_sig(r.alpha),
                fmt_sig(r.beta),
                fmt_exp(r.q),
                r.a_size.to_string(),
                r.e_size.to_string(),
                r.ae_overlap.to_string(),
                r.bohr_size.to_string(),
                fmt_sig(r.alpha_eff),
                fmt_exp(r.beta_eff),
                fmt_sig(r.rstar_lb),
                r.witness_kind.as_str().to_string(),
                r.seed.to_string(),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn salem_csv(rows: &[SalemRow]) -> String {
    let mut out = String::new();
    out.push_str(SALEM_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.p,
            r.n,
            fmt_sig(r.alpha),
            r.seed,
            r.e_size,
            fmt_sig(r.max_offzero),
            fmt_sig(r.bound),
            r.pass
        ));
    }
    out
}

/// JSON document written next to (or instead of) the CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub config: ExperimentConfig,
    pub generator: String,
    pub library_version: String,
    pub wall_clock_seconds: f64,
    pub report: SweepReport,
}

impl ResultsDocument {
    pub fn new(config: &ExperimentConfig, report: SweepReport, wall_clock_seconds: f64) -> Self {
        ResultsDocument {
            config: config.clone(),
            generator: GENERATOR_NAME.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds,
            report,
        }
    }
}

/// Writes a sweep as CSV or JSON.
pub fn emit_results(doc: &ResultsDocument, path: &Path, format: OutputFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        OutputFormat::Csv => w.write_all(sweep_csv(&doc.report).as_bytes())?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, doc)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn parse_results(text: &str) -> Result<ResultsDocument> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Mode;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.0), "123456");
        assert_eq!(fmt_sig(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_sig(f64::INFINITY), "inf");
        assert_eq!(fmt_sig(1.23456789012345), "1.23456789012");
    }

    #[test]
    fn empty_csv_is_header_only() {
        let r = SweepReport {
            mode: Mode::Sharpness,
            primes: vec![],
            results: vec![],
        };
        assert_eq!(sweep_csv(&r), format!("{CSV_HEADER}\n"));
        assert_eq!(CSV_HEADER.split(',').count(), 14);
    }
}
