use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ensemble::{SweepConfig, SweepPoint};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "figure_id,N,N_A,N_D,model,p,quantity,analytic,mean,stderr,K,seed";

/// One output line. Sweep rows leave `figure_id` empty; figure rows carry
/// only the analytic value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub figure_id: Option<u8>,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_A")]
    pub n_a: usize,
    #[serde(rename = "N_D")]
    pub n_d: usize,
    pub model: String,
    pub p: f64,
    pub quantity: String,
    pub analytic: Option<f64>,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

pub fn sweep_rows(cfg: &SweepConfig, points: &[SweepPoint]) -> Vec<Row> {
    points
        .iter()
        .flat_map(|pt| {
            pt.stats.iter().map(move |s| Row {
                figure_id: None,
                n: pt.n,
                n_a: pt.n_a,
                n_d: pt.n_d,
                model: pt.model.name().to_string(),
                p: pt.p,
                quantity: s.quantity.clone(),
                analytic: s.analytic,
                mean: Some(s.mean),
                stderr: Some(s.stderr),
                k: s.samples,
                seed: Some(cfg.seed),
            })
        })
        .collect()
}

/// CSV with the fixed header, or a JSON array of objects with the same keys.
pub fn write_table<W: Write>(rows: &[Row], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut out);
            w.write_record(CSV_HEADER.split(','))?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}
