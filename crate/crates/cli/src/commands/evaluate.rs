//! `rankaft evaluate`: C-index of a saved model on a CSV dataset.

use std::io::Read;
use std::path::PathBuf;

use rankaft::io::{load_csv, load_linear_fit, load_network, ColumnSpec, Standardizer};
use rankaft::metrics::c_index;
use rankaft::net::predict;
use rankaft::{Error, Result};

#[derive(clap::Args)]
pub struct Args {
    /// Saved model: a network container or a linear-fit TOML.
    #[arg(long)]
    model: PathBuf,

    /// CSV dataset with a header row.
    #[arg(long)]
    data: PathBuf,

    /// Column-spec TOML, or a built-in schema name (flchain, nwtg).
    #[arg(long)]
    schema: String,

    /// Standardizer TOML saved at fit time (defaults to
    /// `<model>.scaler.toml` when that file exists).
    #[arg(long)]
    standardizer: Option<PathBuf>,
}

fn resolve_schema(name: &str) -> Result<ColumnSpec> {
    match name {
        "flchain" => Ok(ColumnSpec::flchain()),
        "nwtg" => Ok(ColumnSpec::nwtg()),
        path => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

fn is_network_container(path: &PathBuf) -> Result<bool> {
    let mut head = [0u8; 11];
    let mut f = std::fs::File::open(path)?;
    let n = f.read(&mut head)?;
    Ok(&head[..n] == b"rankaft-net")
}

pub fn run(args: Args) -> Result<()> {
    let spec = resolve_schema(&args.schema)?;
    let loaded = load_csv(&args.data, &spec)?;
    eprintln!(
        "loaded {} rows ({} events)",
        loaded.dataset.n(),
        loaded.dataset.n_events()
    );

    let scaler_path = args
        .standardizer
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.scaler.toml", args.model.display())));
    let dataset = if scaler_path.exists() {
        let text = std::fs::read_to_string(&scaler_path)?;
        let scaler: Standardizer =
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        eprintln!("applying standardizer from {}", scaler_path.display());
        scaler.transform(&loaded.dataset)?
    } else {
        loaded.dataset
    };

    let predictions = if is_network_container(&args.model)? {
        let params = load_network(&args.model)?;
        predict(&params, dataset.covariates())?
    } else {
        let fit = load_linear_fit(&args.model)?;
        fit.predict(dataset.covariates())?
    };
    let c = c_index(dataset.times(), dataset.events(), &predictions)?;
    println!("c-index: {c:.4}");
    Ok(())
}
