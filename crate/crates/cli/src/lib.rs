//! Pipeline commands behind the `uwb-nlos` binary.
//!
//! Each command validates its inputs and computes every output in memory
//! before touching the filesystem; files are written to a temporary sibling
//! and renamed into place.

pub mod config;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;
use uwb_nlos::classify::{Method, Selector};
use uwb_nlos::dataset_io::dataset_sha256;
use uwb_nlos::eval::{accuracy, default_joint_pairs, observe_all};
use uwb_nlos::export::{feature_table, joint_grid, pdf_curve};
use uwb_nlos::generator::{derive_seed, DEFAULTS_VERSION};
use uwb_nlos::{
    evaluate, extract_all, fit_model, generate_dataset, load_dataset, split, write_dataset,
    AccuracyReport64, Dataset64, FeatureVector64, FitConfig, FittedModel64, Label,
};

pub use config::RunConfig;

/// Tag for the sub-seed used by the train/test split.
const SPLIT_SEED_TAG: u64 = 0x5350_4C49_54;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] uwb_nlos::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 usage, 3 data/format, 4 degenerate signal.
    pub fn exit_code(&self) -> i32 {
        use uwb_nlos::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Parameter(_) | E::Unsupported(_)) => 2,
            CliError::Core(E::Degenerate(_)) => 4,
            CliError::Core(_) | CliError::Io { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io_err(path))?;
    }
    tmp.flush().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

fn read_dataset_file(path: &Path) -> Result<Dataset64> {
    if !path.is_file() {
        return Err(CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
        });
    }
    Ok(load_dataset(path)?)
}

pub fn read_model(path: &Path) -> Result<FittedModel64> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(FittedModel64::from_json(&text)?)
}

/// Training and evaluation subsets for a run.
fn partition(ds: &Dataset64, cfg: &RunConfig) -> Result<(Dataset64, Dataset64)> {
    if cfg.in_sample {
        Ok((ds.clone(), ds.clone()))
    } else {
        Ok(split(
            ds,
            cfg.train_fraction,
            derive_seed(cfg.seed, SPLIT_SEED_TAG),
        )?)
    }
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<String> {
    cfg.validate()?;
    let ds = generate_dataset(&cfg.generator_params(), cfg.n_per_class, &cfg.grid)?;
    let mut buf = Vec::new();
    write_dataset(&ds, &mut buf)?;
    write_atomic(out, &buf)?;
    Ok(format!(
        "wrote {}: {} LOS + {} NLOS records, grid t_start={} dt={} n={}\n",
        out.display(),
        ds.count(Label::Los),
        ds.count(Label::Nlos),
        ds.grid().t_start,
        ds.grid().dt,
        ds.grid().n
    ))
}

pub fn cmd_extract(
    cfg: &RunConfig,
    dataset: &Path,
    out: &Path,
    skip_degenerate: bool,
) -> Result<String> {
    cfg.validate()?;
    let ds = read_dataset_file(dataset)?;
    let mut rows: Vec<(Label, FeatureVector64)> = Vec::with_capacity(ds.len());
    let mut notes = String::new();
    for (i, rec) in ds.records().iter().enumerate() {
        match extract_all(&rec.cir, cfg.rel_eps) {
            Ok(fv) => rows.push((rec.label, fv)),
            Err(e @ uwb_nlos::Error::Degenerate(_)) if skip_degenerate => {
                let _ = writeln!(notes, "skipped record {i}: {e}");
            }
            Err(e) => return Err(e.in_context(format!("record {i}")).into()),
        }
    }
    let table = feature_table(rows.iter().map(|(l, fv)| (*l, fv)));
    write_atomic(out, table.as_bytes())?;
    let _ = writeln!(
        notes,
        "wrote {}: {} feature rows",
        out.display(),
        rows.len()
    );
    Ok(notes)
}

pub fn fit_config(cfg: &RunConfig, ds: &Dataset64) -> FitConfig<f64> {
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("dataset_sha256".into(), dataset_sha256(ds));
    metadata.insert(
        "generator_defaults_version".into(),
        DEFAULTS_VERSION.to_string(),
    );
    metadata.insert("in_sample".into(), cfg.in_sample.to_string());
    metadata.insert("seed".into(), cfg.seed.to_string());
    metadata.insert("train_fraction".into(), cfg.train_fraction.to_string());
    FitConfig {
        bins: cfg.bins,
        floor: cfg.floor,
        rel_eps: cfg.rel_eps,
        joint: default_joint_pairs(),
        metadata,
    }
}

pub fn cmd_fit(cfg: &RunConfig, dataset: &Path, out: &Path) -> Result<String> {
    cfg.validate()?;
    let ds = read_dataset_file(dataset)?;
    let (train, _) = partition(&ds, cfg)?;
    let model = fit_model(&train, &fit_config(cfg, &ds))?;
    write_atomic(out, model.to_json()?.as_bytes())?;
    Ok(format!(
        "wrote {}: {} marginal densities, {} joint sets, fitted on {} records\n",
        out.display(),
        model.features.len(),
        model.joint.len(),
        train.len()
    ))
}

pub fn cmd_classify(
    model: &Path,
    dataset: &Path,
    selector: &str,
    method: &str,
    out: &Path,
) -> Result<String> {
    let selector: Selector = selector
        .parse()
        .map_err(|e: uwb_nlos::Error| CliError::Usage(e.to_string()))?;
    let method: Method = method
        .parse()
        .map_err(|e: uwb_nlos::Error| CliError::Usage(e.to_string()))?;
    let model = read_model(model)?;
    model.check(&selector, method)?;
    let ds = read_dataset_file(dataset)?;
    let obs = observe_all(&model, &ds)?;
    let mut text = String::from("index,label,predicted\n");
    let mut correct = 0;
    for (i, (rec, o)) in ds.records().iter().zip(&obs).enumerate() {
        let predicted = model.decide(o, method, &selector)?;
        correct += usize::from(predicted == rec.label);
        let _ = writeln!(text, "{i},{},{predicted}", rec.label);
    }
    write_atomic(out, text.as_bytes())?;
    Ok(format!(
        "wrote {}: {} decisions ({selector}, {method}), {correct} match the stored labels\n",
        out.display(),
        ds.len()
    ))
}

/// Every file `cmd_report` writes, by file name.
pub fn report_files(
    model: &FittedModel64,
    report: &AccuracyReport64,
) -> Result<Vec<(String, String)>> {
    let mut files = vec![
        ("report.txt".to_string(), report.render_table()),
        ("report.csv".to_string(), report.render_csv()),
    ];
    for fm in &model.features {
        let cd = &fm.densities;
        for (label, pdf) in [(Label::Los, &cd.los), (Label::Nlos, &cd.nlos)] {
            files.push((
                format!("pdf_{}_{label}.csv", cd.feature),
                pdf_curve(cd.feature, label, pdf),
            ));
        }
    }
    for set in &model.joint {
        if let [a, b] = set.as_slice() {
            for label in Label::ALL {
                files.push((
                    format!("joint_{a}_{b}_{label}.csv"),
                    joint_grid(model, *a, *b, label)?,
                ));
            }
        }
    }
    Ok(files)
}

pub fn cmd_report(cfg: &RunConfig, model: &Path, dataset: &Path, out_dir: &Path) -> Result<String> {
    cfg.validate()?;
    let model = read_model(model)?;
    let ds = read_dataset_file(dataset)?;
    let (_, test) = partition(&ds, cfg)?;
    let report = evaluate(&model, &test)?;
    let files = report_files(&model, &report)?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    for (name, body) in &files {
        write_atomic(&out_dir.join(name), body.as_bytes())?;
    }
    let mut msg = report.render_table();
    let _ = writeln!(
        msg,
        "\nwrote {} files to {}",
        files.len(),
        out_dir.display()
    );
    Ok(msg)
}

/// Accuracy of one selector and method, for scripting.
pub fn selector_accuracy(
    model: &FittedModel64,
    ds: &Dataset64,
    selector: &Selector,
    method: Method,
) -> Result<uwb_nlos::eval::ClassAccuracy> {
    Ok(accuracy(model, ds, selector, method)?)
}
