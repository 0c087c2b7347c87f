//! Dataset ingestion, train/test splitting, covariate standardization,
//! experiment configuration files, model persistence and result tables.

mod config;
mod model_store;
mod results;

pub use config::{config_hash, load_experiment_config, save_experiment_config, ExperimentConfig};
pub use model_store::{load_linear_fit, load_network, save_linear_fit, save_network};
pub use results::{
    read_results_csv, render_results_text, write_results_csv, write_results_text, ResultRow,
    ResultsTable,
};

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};

/// Maps CSV columns onto the dataset: which column is the observed time,
/// which the event indicator, and which covariates enter in what order.
/// Categorical columns carry an explicit level ordering (the first level is
/// the dropped reference) so encodings are deterministic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub time_column: String,
    pub event_column: String,
    pub covariate_columns: Vec<String>,
    #[serde(default)]
    pub categorical: BTreeMap<String, Vec<String>>,
}

impl ColumnSpec {
    pub fn validate(&self) -> Result<()> {
        for c in &self.covariate_columns {
            if *c == self.time_column || *c == self.event_column {
                return Err(Error::Schema(format!(
                    "column '{c}' cannot be both outcome and covariate"
                )));
            }
        }
        if self.time_column == self.event_column {
            return Err(Error::Schema("time and event columns must differ".into()));
        }
        for (col, levels) in &self.categorical {
            if !self.covariate_columns.contains(col) {
                return Err(Error::Schema(format!(
                    "categorical column '{col}' is not a covariate"
                )));
            }
            if levels.len() < 2 {
                return Err(Error::Schema(format!(
                    "categorical column '{col}' needs at least 2 declared levels"
                )));
            }
        }
        Ok(())
    }

    /// Schema for the serum free light chain study export (as shipped by the
    /// R `survival` package). Encodings are this crate's own documented
    /// choice: `sex` one-hot with F as reference, `mgus` numeric 0/1,
    /// `sample.yr` kept continuous.
    pub fn flchain() -> Self {
        Self {
            time_column: "futime".into(),
            event_column: "death".into(),
            covariate_columns: vec![
                "age".into(),
                "sex".into(),
                "sample.yr".into(),
                "kappa".into(),
                "lambda".into(),
                "flc.grp".into(),
                "creatinine".into(),
                "mgus".into(),
            ],
            categorical: BTreeMap::from([("sex".into(), vec!["F".into(), "M".into()])]),
        }
    }

    /// Schema for the Wilms' tumor study export (R `addhazard::nwtsco`):
    /// central/institutional histology and study wave are 0/1 numerics,
    /// `stage` is one-hot with stage I as reference.
    pub fn nwtg() -> Self {
        Self {
            time_column: "trel".into(),
            event_column: "relaps".into(),
            covariate_columns: vec![
                "histol".into(),
                "instit".into(),
                "stage".into(),
                "age".into(),
                "study".into(),
            ],
            categorical: BTreeMap::from([(
                "stage".into(),
                vec!["1".into(), "2".into(), "3".into(), "4".into()],
            )]),
        }
    }
}

/// Row bookkeeping from [`load_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadReport {
    pub raw_rows: usize,
    pub loaded_rows: usize,
    pub dropped_nonpositive_time: usize,
    pub dropped_missing: usize,
}

/// A loaded dataset plus the names of the encoded feature columns and the
/// indices of the continuous ones (candidates for standardization).
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: SurvivalDataset,
    pub report: LoadReport,
    pub feature_names: Vec<String>,
    pub continuous_features: Vec<usize>,
}

fn is_missing(field: &str) -> bool {
    let t = field.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") || t == "."
}

fn parse_event(field: &str) -> Option<bool> {
    match field.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Loads a headered CSV according to the column spec. Rows with a
/// non-positive time or a missing/unparseable value in any selected column
/// are dropped and counted. Categorical columns are one-hot encoded by their
/// declared level ordering with the first level as reference; an undeclared
/// level is a schema error.
pub fn load_csv(path: &Path, spec: &ColumnSpec) -> Result<LoadedCsv> {
    spec.validate()?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found in header")))
    };
    let time_idx = col_index(&spec.time_column)?;
    let event_idx = col_index(&spec.event_column)?;
    let cov_idx: Vec<usize> = spec
        .covariate_columns
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_>>()?;

    // Encoded layout: per covariate, either one continuous column or
    // level-count − 1 indicator columns.
    let mut feature_names = Vec::new();
    let mut continuous_features = Vec::new();
    for name in &spec.covariate_columns {
        match spec.categorical.get(name) {
            Some(levels) => {
                for level in &levels[1..] {
                    feature_names.push(format!("{name}={level}"));
                }
            }
            None => {
                continuous_features.push(feature_names.len());
                feature_names.push(name.clone());
            }
        }
    }
    let width = feature_names.len();

    let mut times = Vec::new();
    let mut events = Vec::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut report = LoadReport {
        raw_rows: 0,
        loaded_rows: 0,
        dropped_nonpositive_time: 0,
        dropped_missing: 0,
    };

    'rows: for record in reader.records() {
        let record = record?;
        report.raw_rows += 1;

        let selected: Vec<&str> = std::iter::once(record.get(time_idx))
            .chain(std::iter::once(record.get(event_idx)))
            .chain(cov_idx.iter().map(|&k| record.get(k)))
            .map(|f| f.unwrap_or(""))
            .collect();
        if selected.iter().any(|f| is_missing(f)) {
            report.dropped_missing += 1;
            continue;
        }

        let time: f64 = match selected[0].trim().parse() {
            Ok(v) => v,
            Err(_) => {
                report.dropped_missing += 1;
                continue;
            }
        };
        let event = match parse_event(selected[1]) {
            Some(v) => v,
            None => {
                report.dropped_missing += 1;
                continue;
            }
        };
        if !(time > 0.0) || !time.is_finite() {
            report.dropped_nonpositive_time += 1;
            continue;
        }

        let mut encoded = Vec::with_capacity(width);
        for (name, raw) in spec.covariate_columns.iter().zip(&selected[2..]) {
            match spec.categorical.get(name) {
                Some(levels) => {
                    let value = raw.trim();
                    let pos = levels.iter().position(|l| l == value).ok_or_else(|| {
                        Error::Schema(format!(
                            "column '{name}': undeclared level '{value}'"
                        ))
                    })?;
                    for k in 1..levels.len() {
                        encoded.push(if pos == k { 1.0 } else { 0.0 });
                    }
                }
                None => match raw.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => encoded.push(v),
                    _ => {
                        report.dropped_missing += 1;
                        continue 'rows;
                    }
                },
            }
        }

        times.push(time);
        events.push(event);
        rows.extend(encoded);
        report.loaded_rows += 1;
    }

    if times.is_empty() {
        return Err(Error::EmptyData(format!(
            "no usable rows in {} ({} raw rows)",
            path.display(),
            report.raw_rows
        )));
    }
    let covariates = Array2::from_shape_vec((times.len(), width), rows)
        .map_err(|e| Error::Schema(format!("ragged covariate rows: {e}")))?;
    Ok(LoadedCsv {
        dataset: SurvivalDataset::new(times, events, covariates)?,
        report,
        feature_names,
        continuous_features,
    })
}

/// Writes a dataset as CSV (`time,status,<features…>`), full `f64`
/// precision, so generated data can be cross-checked with external tools.
/// Column names default to `x1..xp`.
pub fn write_dataset_csv(
    path: &Path,
    dataset: &SurvivalDataset,
    feature_names: Option<&[String]>,
) -> Result<()> {
    let p = dataset.p();
    if let Some(names) = feature_names {
        if names.len() != p {
            return Err(Error::Dimension(format!(
                "{} feature names for {} covariate columns",
                names.len(),
                p
            )));
        }
    }
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string(), "status".to_string()];
    match feature_names {
        Some(names) => header.extend(names.iter().cloned()),
        None => header.extend((1..=p).map(|k| format!("x{k}"))),
    }
    writer.write_record(&header)?;
    for i in 0..dataset.n() {
        let mut record = vec![
            format!("{:.17e}", dataset.times()[i]),
            if dataset.events()[i] { "1".into() } else { "0".into() },
        ];
        record.extend(dataset.covariate_row(i).iter().map(|v| format!("{v:.17e}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Outcome of [`split_train_test`].
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: SurvivalDataset,
    pub test: SurvivalDataset,
    /// Number of shuffles tried before both sides held an event.
    pub attempts: usize,
}

/// Uniform row split without replacement, deterministic per seed. If a
/// shuffle leaves either side without an event subject it is retried (up to
/// 10 times) before failing.
pub fn split_train_test(
    dataset: &SurvivalDataset,
    fraction: f64,
    seed: u64,
) -> Result<SplitOutcome> {
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = dataset.n();
    let n_train = ((n as f64) * fraction).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} leaves an empty side for n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    for attempt in 1..=10 {
        indices.shuffle(&mut rng);
        let train = dataset.subset(&indices[..n_train])?;
        let test = dataset.subset(&indices[n_train..])?;
        if train.n_events() > 0 && test.n_events() > 0 {
            return Ok(SplitOutcome { train, test, attempts: attempt });
        }
    }
    Err(Error::DegenerateSplit(
        "no split with events on both sides after 10 attempts".into(),
    ))
}

/// Per-column affine transform to zero mean and unit variance, fit on
/// training rows only and replayed on test rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardizer {
    pub columns: Vec<usize>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardizer {
    /// Learns the transform for the given columns. Columns with zero
    /// variance are left unscaled (sd treated as 1).
    pub fn fit(dataset: &SurvivalDataset, columns: &[usize]) -> Result<Self> {
        let x = dataset.covariates();
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(columns.len());
        let mut sds = Vec::with_capacity(columns.len());
        for &c in columns {
            if c >= x.ncols() {
                return Err(Error::IndexOutOfRange { index: c, len: x.ncols() });
            }
            let col = x.column(c);
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            means.push(mean);
            sds.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Ok(Self { columns: columns.to_vec(), means, sds })
    }

    /// Returns a copy of the dataset with the learned transform applied.
    pub fn transform(&self, dataset: &SurvivalDataset) -> Result<SurvivalDataset> {
        let mut x = dataset.covariates().clone();
        for (k, &c) in self.columns.iter().enumerate() {
            if c >= x.ncols() {
                return Err(Error::IndexOutOfRange { index: c, len: x.ncols() });
            }
            let mut col = x.column_mut(c);
            col.mapv_inplace(|v| (v - self.means[k]) / self.sds[k]);
        }
        dataset.with_covariates(x)
    }
}

/// Fits the standardizer on `train`, applies it to both sides.
pub fn standardize_split(
    train: &SurvivalDataset,
    test: &SurvivalDataset,
    columns: &[usize],
) -> Result<(SurvivalDataset, SurvivalDataset, Standardizer)> {
    let standardizer = Standardizer::fit(train, columns)?;
    Ok((
        standardizer.transform(train)?,
        standardizer.transform(test)?,
        standardizer,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn toy_spec() -> ColumnSpec {
        ColumnSpec {
            time_column: "time".into(),
            event_column: "status".into(),
            covariate_columns: vec!["age".into(), "group".into()],
            categorical: BTreeMap::from([(
                "group".into(),
                vec!["a".into(), "b".into(), "c".into()],
            )]),
        }
    }

    #[test]
    fn loads_and_encodes_a_toy_file() {
        let f = write_csv(
            "time,status,age,group,junk\n\
             2.0,1,50,a,x\n\
             3.5,0,61,b,y\n\
             1.2,1,44,c,z\n",
        );
        let loaded = load_csv(f.path(), &toy_spec()).unwrap();
        assert_eq!(loaded.report.loaded_rows, 3);
        assert_eq!(loaded.feature_names, vec!["age", "group=b", "group=c"]);
        assert_eq!(loaded.continuous_features, vec![0]);
        let x = loaded.dataset.covariates();
        assert_eq!(x.row(0).to_vec(), vec![50.0, 0.0, 0.0]); // reference level
        assert_eq!(x.row(1).to_vec(), vec![61.0, 1.0, 0.0]);
        assert_eq!(x.row(2).to_vec(), vec![44.0, 0.0, 1.0]);
        assert_eq!(loaded.dataset.events(), &[true, false, true]);
    }

    #[test]
    fn drops_zero_time_and_missing_rows_with_counts() {
        let f = write_csv(
            "time,status,age,group\n\
             0.0,1,50,a\n\
             2.0,1,NA,a\n\
             3.0,0,70,b\n",
        );
        let loaded = load_csv(f.path(), &toy_spec()).unwrap();
        assert_eq!(loaded.report.raw_rows, 3);
        assert_eq!(loaded.report.loaded_rows, 1);
        assert_eq!(loaded.report.dropped_nonpositive_time, 1);
        assert_eq!(loaded.report.dropped_missing, 1);
        assert_eq!(
            loaded.report.loaded_rows
                + loaded.report.dropped_missing
                + loaded.report.dropped_nonpositive_time,
            loaded.report.raw_rows
        );
    }

    #[test]
    fn schema_errors_are_loud() {
        let f = write_csv("time,status,age\n1.0,1,50\n");
        let mut spec = toy_spec();
        spec.categorical.clear();
        spec.covariate_columns = vec!["age".into(), "weight".into()];
        assert!(matches!(load_csv(f.path(), &spec), Err(Error::Schema(_))));

        // Undeclared categorical level.
        let f = write_csv("time,status,age,group\n1.0,1,50,zz\n");
        assert!(matches!(load_csv(f.path(), &toy_spec()), Err(Error::Schema(_))));

        // Outcome column reused as covariate.
        let mut spec = toy_spec();
        spec.covariate_columns.push("time".into());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn empty_after_filtering_is_an_error() {
        let f = write_csv("time,status,age,group\n0.0,1,50,a\n");
        assert!(matches!(load_csv(f.path(), &toy_spec()), Err(Error::EmptyData(_))));
    }

    fn sized_dataset(n: usize) -> SurvivalDataset {
        let events = (0..n).map(|i| i % 2 == 0).collect();
        SurvivalDataset::new(vec![1.0; n], events, Array2::zeros((n, 1))).unwrap()
    }

    #[test]
    fn split_sizes_match_floor_arithmetic() {
        let d = sized_dataset(6521);
        let out = split_train_test(&d, 2.0 / 3.0, 1).unwrap();
        assert_eq!(out.train.n(), 4347);
        assert_eq!(out.test.n(), 6521 - 4347);
    }

    #[test]
    fn split_is_deterministic_and_partitions() {
        let d = sized_dataset(100);
        let a = split_train_test(&d, 0.7, 9).unwrap();
        let b = split_train_test(&d, 0.7, 9).unwrap();
        assert_eq!(a.train.times(), b.train.times());
        assert_eq!(a.train.events(), b.train.events());
        assert_eq!(a.train.n() + a.test.n(), 100);
    }

    #[test]
    fn split_partition_covers_all_rows() {
        // Distinct times make rows identifiable.
        let n = 57;
        let times: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let events = vec![true; n];
        let d = SurvivalDataset::new(times, events, Array2::zeros((n, 1))).unwrap();
        let out = split_train_test(&d, 0.4, 3).unwrap();
        let mut seen: Vec<f64> = out
            .train
            .times()
            .iter()
            .chain(out.test.times())
            .cloned()
            .collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn split_retries_until_events_on_both_sides() {
        // One event among 8: most shuffles put it on a single side.
        let mut events = vec![false; 8];
        events[0] = true;
        let d = SurvivalDataset::new(vec![1.0; 8], events, Array2::zeros((8, 1))).unwrap();
        // Either it finds a valid-looking split or fails after 10 attempts;
        // with one event a valid split is impossible: the event lands on
        // exactly one side.
        assert!(matches!(
            split_train_test(&d, 0.5, 0),
            Err(Error::DegenerateSplit(_))
        ));
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let d = sized_dataset(10);
        assert!(split_train_test(&d, 0.0, 0).is_err());
        assert!(split_train_test(&d, 1.0, 0).is_err());
        assert!(split_train_test(&d, 0.01, 0).is_err());
    }

    #[test]
    fn dataset_csv_round_trip_is_exact() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 40;
        let times: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 7.0 + 0.001).collect();
        let events: Vec<bool> = (0..n).map(|i| i % 3 != 0).collect();
        let x = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>() * 4.0 - 2.0);
        let d = SurvivalDataset::new(times, events, x).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gen.csv");
        write_dataset_csv(&path, &d, None).unwrap();

        let spec = ColumnSpec {
            time_column: "time".into(),
            event_column: "status".into(),
            covariate_columns: vec!["x1".into(), "x2".into()],
            categorical: BTreeMap::new(),
        };
        let back = load_csv(&path, &spec).unwrap();
        assert_eq!(back.dataset.n(), d.n());
        for i in 0..n {
            assert!((back.dataset.times()[i] - d.times()[i]).abs() < 1e-12);
            assert_eq!(back.dataset.events()[i], d.events()[i]);
            for c in 0..2 {
                let a = back.dataset.covariates()[(i, c)];
                let b = d.covariates()[(i, c)];
                assert!((a - b).abs() < 1e-12, "({i},{c}): {a} vs {b}");
            }
        }
        // And a second write of the re-loaded data is byte-identical.
        let path2 = dir.path().join("gen2.csv");
        write_dataset_csv(&path2, &back.dataset, None).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn standardizer_fits_on_train_and_replays_on_test() {
        use ndarray::arr2;
        let train = SurvivalDataset::new(
            vec![1.0, 2.0, 3.0],
            vec![true, true, false],
            arr2(&[[2.0, 7.0], [4.0, 7.0], [6.0, 7.0]]),
        )
        .unwrap();
        let test = SurvivalDataset::new(
            vec![1.5],
            vec![true],
            arr2(&[[8.0, 7.0]]),
        )
        .unwrap();
        let (tr, te, sc) = standardize_split(&train, &test, &[0, 1]).unwrap();
        let col0: Vec<f64> = tr.covariates().column(0).to_vec();
        let mean: f64 = col0.iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-12);
        // Test rows use the train mean/sd, not their own.
        let expected = (8.0 - 4.0) / sc.sds[0];
        assert!((te.covariates()[(0, 0)] - expected).abs() < 1e-12);
        // Constant column passes through unscaled.
        assert_eq!(tr.covariates()[(0, 1)], 0.0);
        assert_eq!(sc.sds[1], 1.0);
    }
}
