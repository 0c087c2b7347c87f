//! Result tables: one row per (scenario cell, method), written as CSV for
//! machines and as an aligned text pivot (error law × tau rows, method
//! columns) for reading.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Method;
use crate::simgen::{ErrorDist, MeanKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub mean_kind: MeanKind,
    pub error_dist: ErrorDist,
    pub tau: f64,
    pub n_train: usize,
    pub method: Method,
    pub replicates: usize,
    pub mean_mse: f64,
    pub sd_mse: f64,
    pub mean_c_index: f64,
    pub sd_c_index: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultsTable {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
}

fn error_label(e: ErrorDist) -> &'static str {
    match e {
        ErrorDist::Gaussian => "gaussian",
        ErrorDist::Gumbel => "gumbel",
        ErrorDist::Laplace => "laplace",
        ErrorDist::T3 => "t3",
    }
}

fn mean_label(m: MeanKind) -> &'static str {
    match m {
        MeanKind::Interaction => "interaction",
        MeanKind::Gam => "gam",
        MeanKind::Linear => "linear",
    }
}

/// Writes the flat CSV form; every row carries the config hash and seed so
/// the file is self-describing.
pub fn write_results_csv(path: &Path, table: &ResultsTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "config_hash",
        "seed",
        "mean_kind",
        "error_dist",
        "tau",
        "n_train",
        "method",
        "replicates",
        "mean_mse",
        "sd_mse",
        "mean_c_index",
        "sd_c_index",
    ])?;
    for row in &table.rows {
        writer.write_record([
            table.config_hash.clone(),
            table.seed.to_string(),
            mean_label(row.mean_kind).to_string(),
            error_label(row.error_dist).to_string(),
            format!("{}", row.tau),
            row.n_train.to_string(),
            row.method.label().to_string(),
            row.replicates.to_string(),
            format!("{:.17e}", row.mean_mse),
            format!("{:.17e}", row.sd_mse),
            format!("{:.17e}", row.mean_c_index),
            format!("{:.17e}", row.sd_c_index),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn parse_mean(s: &str) -> Result<MeanKind> {
    match s {
        "interaction" => Ok(MeanKind::Interaction),
        "gam" => Ok(MeanKind::Gam),
        "linear" => Ok(MeanKind::Linear),
        other => Err(Error::Schema(format!("unknown mean kind '{other}'"))),
    }
}

fn parse_error_dist(s: &str) -> Result<ErrorDist> {
    match s {
        "gaussian" => Ok(ErrorDist::Gaussian),
        "gumbel" => Ok(ErrorDist::Gumbel),
        "laplace" => Ok(ErrorDist::Laplace),
        "t3" => Ok(ErrorDist::T3),
        other => Err(Error::Schema(format!("unknown error law '{other}'"))),
    }
}

/// Reads a CSV written by [`write_results_csv`].
pub fn read_results_csv(path: &Path) -> Result<ResultsTable> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    let mut config_hash = String::new();
    let mut seed = 0u64;
    for record in reader.records() {
        let record = record?;
        let field = |k: usize| -> Result<&str> {
            record
                .get(k)
                .ok_or_else(|| Error::Schema(format!("missing field {k}")))
        };
        let parse_f = |k: usize| -> Result<f64> {
            field(k)?
                .parse()
                .map_err(|_| Error::Schema(format!("bad float in field {k}")))
        };
        let parse_u = |k: usize| -> Result<usize> {
            field(k)?
                .parse()
                .map_err(|_| Error::Schema(format!("bad integer in field {k}")))
        };
        config_hash = field(0)?.to_string();
        seed = field(1)?
            .parse()
            .map_err(|_| Error::Schema("bad seed".into()))?;
        rows.push(ResultRow {
            mean_kind: parse_mean(field(2)?)?,
            error_dist: parse_error_dist(field(3)?)?,
            tau: parse_f(4)?,
            n_train: parse_u(5)?,
            method: Method::parse(field(6)?)?,
            replicates: parse_u(7)?,
            mean_mse: parse_f(8)?,
            sd_mse: parse_f(9)?,
            mean_c_index: parse_f(10)?,
            sd_c_index: parse_f(11)?,
        });
    }
    Ok(ResultsTable { config_hash, seed, rows })
}

/// Renders the aligned pivot: one block per mean kind, rows are error law ×
/// tau, columns are method × n_train, each cell "MSE (C-index)".
pub fn render_results_text(table: &ResultsTable) -> String {
    let mut out = String::new();
    writeln!(out, "config {}  seed {}", table.config_hash, table.seed).unwrap();

    let kinds: BTreeSet<&str> = table.rows.iter().map(|r| mean_label(r.mean_kind)).collect();
    for kind in kinds {
        let rows: Vec<&ResultRow> = table
            .rows
            .iter()
            .filter(|r| mean_label(r.mean_kind) == kind)
            .collect();
        let mut columns: Vec<(Method, usize)> = Vec::new();
        for r in &rows {
            if !columns.contains(&(r.method, r.n_train)) {
                columns.push((r.method, r.n_train));
            }
        }
        let mut cells: Vec<(String, f64)> = Vec::new();
        for r in &rows {
            let key = format!("{}|{}", error_label(r.error_dist), r.tau);
            if !cells.iter().any(|(k, _)| *k == key) {
                cells.push((key, r.tau));
            }
        }

        writeln!(out, "\nmean function: {kind}").unwrap();
        write!(out, "{:<16}", "error / tau").unwrap();
        for (m, n) in &columns {
            write!(out, "{:>24}", format!("{} (n={})", m.label(), n)).unwrap();
        }
        out.push('\n');
        for (key, _) in &cells {
            let mut parts = key.split('|');
            let err = parts.next().unwrap_or_default();
            let tau = parts.next().unwrap_or_default();
            write!(out, "{:<16}", format!("{err} tau={tau}")).unwrap();
            for (m, n) in &columns {
                let cell = rows.iter().find(|r| {
                    r.method == *m
                        && r.n_train == *n
                        && error_label(r.error_dist) == err
                        && format!("{}", r.tau) == tau
                });
                match cell {
                    Some(r) => write!(
                        out,
                        "{:>24}",
                        format!("{:.3} ({:.3})", r.mean_mse, r.mean_c_index)
                    )
                    .unwrap(),
                    None => write!(out, "{:>24}", "-").unwrap(),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Writes the aligned text form.
pub fn write_results_text(path: &Path, table: &ResultsTable) -> Result<()> {
    std::fs::write(path, render_results_text(table))?;
    Ok(())
}
