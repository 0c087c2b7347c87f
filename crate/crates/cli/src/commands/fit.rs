//! `rankaft fit`: train one of the fitters on a CSV dataset.

use std::path::PathBuf;

use rankaft::baselines::{fit_paft_lognormal, fit_saft_gehan};
use rankaft::data::SurvivalDataset;
use rankaft::experiment::Method;
use rankaft::io::{
    load_csv, save_linear_fit, save_network, split_train_test, standardize_split, ColumnSpec,
    LoadedCsv, Standardizer,
};
use rankaft::metrics::c_index;
use rankaft::net::{predict, train, LayerSpec, OptimizerKind, TrainConfig};
use rankaft::{Error, Result};

#[derive(clap::Args)]
pub struct Args {
    /// CSV dataset with a header row.
    #[arg(long)]
    data: PathBuf,

    /// Column-spec TOML (time/event/covariate columns and categorical
    /// level orderings). Built-in schemas: "flchain", "nwtg".
    #[arg(long)]
    schema: String,

    /// Fitter: deep, paft or saft.
    #[arg(long)]
    method: String,

    /// Standardize continuous covariates to zero mean / unit variance
    /// (parameters learned on the training rows only).
    #[arg(long, default_value_t = false)]
    standardize: bool,

    /// Hold out 1 − split of the rows for testing (e.g. 0.6667).
    #[arg(long)]
    split: Option<f64>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Architecture preset for the deep fitter: simulation,
    /// simulation-linear or real-data.
    #[arg(long, default_value = "real-data")]
    arch: String,

    #[arg(long)]
    epochs: Option<usize>,

    #[arg(long)]
    learning_rate: Option<f64>,

    #[arg(long)]
    batch_size: Option<usize>,

    /// Partners sampled per event subject.
    #[arg(long)]
    pairs_per_event: Option<usize>,

    /// Optimizer for the deep fitter: sgd or adam.
    #[arg(long, default_value = "sgd")]
    optimizer: String,

    /// Where to write the fitted model.
    #[arg(long)]
    model_out: PathBuf,
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

fn resolve_arch(name: &str) -> Result<Vec<LayerSpec>> {
    match name {
        "simulation" => Ok(LayerSpec::simulation_stack()),
        "simulation-linear" => Ok(LayerSpec::simulation_linear_stack()),
        "real-data" => Ok(LayerSpec::real_data_stack()),
        other => Err(Error::InvalidArgument(format!(
            "unknown architecture preset '{other}'"
        ))),
    }
}

pub fn scaler_path(model_out: &std::path::Path) -> PathBuf {
    PathBuf::from(format!("{}.scaler.toml", model_out.display()))
}

pub fn run(args: Args) -> Result<()> {
    let spec = resolve_schema(&args.schema)?;
    let method = Method::parse(&args.method)?;
    let LoadedCsv { dataset, report, feature_names, continuous_features } =
        load_csv(&args.data, &spec)?;
    eprintln!(
        "loaded {} rows ({} raw; dropped {} missing, {} non-positive time); {} features: {}",
        report.loaded_rows,
        report.raw_rows,
        report.dropped_missing,
        report.dropped_nonpositive_time,
        feature_names.len(),
        feature_names.join(", ")
    );

    // Assemble train/test (and the standardizer, if requested).
    let mut scaler: Option<Standardizer> = None;
    let (train_data, test_data): (SurvivalDataset, Option<SurvivalDataset>) =
        match args.split {
            Some(fraction) => {
                let out = split_train_test(&dataset, fraction, args.seed)?;
                if out.attempts > 1 {
                    eprintln!("split resampled {} times to place events on both sides", out.attempts);
                }
                if args.standardize {
                    let (tr, te, sc) =
                        standardize_split(&out.train, &out.test, &continuous_features)?;
                    scaler = Some(sc);
                    (tr, Some(te))
                } else {
                    (out.train, Some(out.test))
                }
            }
            None => {
                if args.standardize {
                    let sc = Standardizer::fit(&dataset, &continuous_features)?;
                    let tr = sc.transform(&dataset)?;
                    scaler = Some(sc);
                    (tr, None)
                } else {
                    (dataset.clone(), None)
                }
            }
        };
    eprintln!(
        "training on {} rows ({} events){}",
        train_data.n(),
        train_data.n_events(),
        test_data
            .as_ref()
            .map(|t| format!(", holding out {} rows", t.n()))
            .unwrap_or_default()
    );

    let predictions_on = |fit_pred: &dyn Fn(&SurvivalDataset) -> Result<Vec<f64>>| -> Result<()> {
        let train_pred = fit_pred(&train_data)?;
        let train_c = c_index(train_data.times(), train_data.events(), &train_pred)?;
        eprintln!("train c-index: {train_c:.4}");
        if let Some(test) = &test_data {
            let test_pred = fit_pred(test)?;
            let test_c = c_index(test.times(), test.events(), &test_pred)?;
            println!("test c-index: {test_c:.4}");
        } else {
            println!("train c-index: {train_c:.4}");
        }
        Ok(())
    };

    match method {
        Method::Paft => {
            let fit = fit_paft_lognormal(&train_data)?;
            eprintln!(
                "paft: beta {:?}, sigma {:.4}, converged {} in {} iterations",
                fit.beta,
                fit.sigma.unwrap_or(f64::NAN),
                fit.converged,
                fit.iterations
            );
            save_linear_fit(&args.model_out, &fit)?;
            predictions_on(&|d| fit.predict(d.covariates()))?;
        }
        Method::Saft => {
            let fit = fit_saft_gehan(&train_data)?;
            eprintln!(
                "saft: beta {:?}, converged {} in {} iterations",
                fit.beta, fit.converged, fit.iterations
            );
            save_linear_fit(&args.model_out, &fit)?;
            predictions_on(&|d| fit.predict(d.covariates()))?;
        }
        Method::Deep => {
            let layers = resolve_arch(&args.arch)?;
            let mut cfg = TrainConfig { seed: args.seed, ..TrainConfig::default() };
            if let Some(v) = args.epochs {
                cfg.epochs = v;
            }
            if let Some(v) = args.learning_rate {
                cfg.learning_rate = v;
            }
            if let Some(v) = args.batch_size {
                cfg.batch_size = v;
            }
            if let Some(v) = args.pairs_per_event {
                cfg.pairs_per_event = v;
            }
            cfg.optimizer = match args.optimizer.as_str() {
                "sgd" => OptimizerKind::Sgd,
                "adam" => OptimizerKind::Adam,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown optimizer '{other}'"
                    )))
                }
            };
            let params = train(&train_data, &layers, &cfg)?;
            save_network(&args.model_out, &params)?;
            predictions_on(&|d| predict(&params, d.covariates()))?;
        }
    }

    if let Some(sc) = &scaler {
        let path = scaler_path(&args.model_out);
        let text = toml::to_string_pretty(sc).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(&path, text)?;
        eprintln!("wrote standardizer to {}", path.display());
    }
    eprintln!("wrote model to {}", args.model_out.display());
    Ok(())
}
