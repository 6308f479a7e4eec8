//! Fitting, accuracy evaluation and the accuracy table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::cir::{Dataset, Label, DEFAULT_REL_EPS};
use crate::classify::{
    select_threshold, CovarianceModel, FeatureModel, FittedModel, Method, Observation, Selector,
    MODEL_FORMAT, MODEL_VERSION,
};
use crate::density::{ClassDensities, DEFAULT_BINS, DEFAULT_FLOOR};
use crate::error::{Error, Result};
use crate::features::{CovarianceReference, Feature};
use crate::scalar::Scalar;

/// Stratified split; each class contributes `round(train_fraction * count)`
/// records to the training half. Both halves keep dataset order.
pub fn split<T: Scalar>(
    ds: &Dataset<T>,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset<T>, Dataset<T>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::param(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.records()[i].label == label)
            .collect();
        let k = (train_fraction * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<T> {
    pub bins: usize,
    pub floor: T,
    pub rel_eps: T,
    pub joint: Vec<Vec<Feature>>,
    pub metadata: BTreeMap<String, String>,
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            floor: T::lit(DEFAULT_FLOOR),
            rel_eps: T::lit(DEFAULT_REL_EPS),
            joint: default_joint_pairs(),
            metadata: BTreeMap::new(),
        }
    }
}

/// `rds + med` and `amp_mean + med`.
pub fn default_joint_pairs() -> Vec<Vec<Feature>> {
    vec![
        vec![Feature::Rds, Feature::Med],
        vec![Feature::AmpMean, Feature::Med],
    ]
}

fn reference_hash<T: Scalar>(ds: &Dataset<T>) -> String {
    let mut h = Sha256::new();
    for cir in ds.of_class(Label::Los) {
        for &v in cir.taps() {
            h.update(v.to_full_precision().as_bytes());
            h.update(b",");
        }
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

pub fn fit_model<T: Scalar>(train: &Dataset<T>, config: &FitConfig<T>) -> Result<FittedModel<T>> {
    for label in Label::ALL {
        if train.count(label) == 0 {
            return Err(Error::param(format!("training set has no {label} records")));
        }
    }
    let vectors = train
        .records()
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            crate::features::extract_all(&r.cir, config.rel_eps)
                .map_err(|e| e.in_context(format!("record {i}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let by_class = |label: Label, f: Feature| -> Vec<T> {
        train
            .records()
            .iter()
            .zip(&vectors)
            .filter(|(r, _)| r.label == label)
            .map(|(_, v)| v.get(f))
            .collect()
    };

    let features = Feature::ALL
        .iter()
        .map(|&f| {
            let (los, nlos) = (by_class(Label::Los, f), by_class(Label::Nlos, f));
            Ok(FeatureModel {
                densities: ClassDensities::fit(f, &los, &nlos, config.bins, config.floor)?,
                rule: select_threshold(&los, &nlos)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let reference = CovarianceReference::new(train.of_class(Label::Los))?;
    let stats = train
        .records()
        .par_iter()
        .map(|r| reference.statistic(&r.cir))
        .collect::<Result<Vec<_>>>()?;
    let pick = |label: Label| -> Vec<T> {
        train
            .records()
            .iter()
            .zip(&stats)
            .filter(|(r, _)| r.label == label)
            .map(|(_, &s)| s)
            .collect()
    };
    let cov_rule = select_threshold(&pick(Label::Los), &pick(Label::Nlos))?;

    let model = FittedModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        rel_eps: config.rel_eps,
        bins: config.bins,
        floor: config.floor,
        features,
        joint: config.joint.clone(),
        covariance: CovarianceModel {
            reference,
            reference_sha256: reference_hash(train),
            rule: cov_rule,
        },
        metadata: config.metadata.clone(),
    };
    model.validate()?;
    Ok(model)
}

/// Percent of LOS and NLOS records classified correctly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassAccuracy {
    pub los: Option<f64>,
    pub nlos: Option<f64>,
}

impl ClassAccuracy {
    pub fn get(&self, label: Label) -> Option<f64> {
        match label {
            Label::Los => self.los,
            Label::Nlos => self.nlos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub selector: Selector,
    pub ratio: Option<ClassAccuracy>,
    pub hypothesis: Option<ClassAccuracy>,
    pub threshold: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport<T> {
    pub rows: Vec<ReportRow<T>>,
}

/// Report rows with their display names and which tests are tabulated.
pub fn table_layout() -> Vec<(Selector, &'static str, bool, bool)> {
    use Feature::*;
    vec![
        (Selector::Feature(Skewness), "Skewness", true, true),
        (Selector::Feature(Kurtosis), "Kurtosis", true, true),
        (Selector::Feature(Energy), "Energy", true, true),
        (Selector::Feature(EnergyRatio), "Energy Ratio", false, true),
        (Selector::Feature(Rds), "RMS delay", true, true),
        (Selector::Feature(Med), "MED", true, true),
        (
            Selector::Covariance,
            "Mean of Covariance Matrix",
            false,
            true,
        ),
        (
            Selector::Joint(vec![Rds, Med]),
            "τ_rms & τ_med",
            true,
            false,
        ),
        (
            Selector::Joint(vec![AmpMean, Med]),
            "Mean & τ_med",
            true,
            false,
        ),
    ]
}

pub fn observe_all<T: Scalar>(
    model: &FittedModel<T>,
    ds: &Dataset<T>,
) -> Result<Vec<Observation<T>>> {
    ds.records()
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            model
                .observe(&r.cir)
                .map_err(|e| e.in_context(format!("record {i}")))
        })
        .collect()
}

fn percent(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * correct as f64 / total as f64)
}

/// Per-class accuracy of one selector/method over precomputed observations.
pub fn accuracy_of<T: Scalar>(
    model: &FittedModel<T>,
    labels: &[Label],
    observations: &[Observation<T>],
    selector: &Selector,
    method: Method,
) -> Result<ClassAccuracy> {
    model.check(selector, method)?;
    let mut correct = [0usize; 2];
    let mut total = [0usize; 2];
    for (&label, obs) in labels.iter().zip(observations) {
        let k = label as usize;
        total[k] += 1;
        if model.decide(obs, method, selector)? == label {
            correct[k] += 1;
        }
    }
    Ok(ClassAccuracy {
        los: percent(correct[0], total[0]),
        nlos: percent(correct[1], total[1]),
    })
}

pub fn accuracy<T: Scalar>(
    model: &FittedModel<T>,
    test: &Dataset<T>,
    selector: &Selector,
    method: Method,
) -> Result<ClassAccuracy> {
    let obs = observe_all(model, test)?;
    let labels: Vec<Label> = test.records().iter().map(|r| r.label).collect();
    accuracy_of(model, &labels, &obs, selector, method)
}

pub fn evaluate<T: Scalar>(model: &FittedModel<T>, test: &Dataset<T>) -> Result<AccuracyReport<T>> {
    if test.is_empty() {
        return Err(Error::param("test set is empty"));
    }
    let obs = observe_all(model, test)?;
    let labels: Vec<Label> = test.records().iter().map(|r| r.label).collect();
    let rows = table_layout()
        .into_iter()
        .map(|(selector, _, ratio, hyp)| {
            let run = |on: bool, m: Method| -> Result<Option<ClassAccuracy>> {
                if on {
                    accuracy_of(model, &labels, &obs, &selector, m).map(Some)
                } else {
                    Ok(None)
                }
            };
            Ok(ReportRow {
                ratio: run(ratio, Method::Ratio)?,
                hypothesis: run(hyp, Method::Hypothesis)?,
                threshold: if hyp {
                    model.threshold(&selector)
                } else {
                    None
                },
                selector,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyReport { rows })
}

pub const REPORT_CSV_HEADER: &str = "selector,method,class,accuracy_pct,threshold";

fn pct_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |p| format!("{p:.1}"))
}

fn threshold_cell<T: Scalar>(t: Option<T>) -> String {
    t.map_or_else(|| "-".to_string(), |t| format!("{t:.4e}"))
}

impl<T: Scalar> AccuracyReport<T> {
    /// Fixed-width table, one line per parameter, `-` for cells not run.
    pub fn render_table(&self) -> String {
        let names: BTreeMap<Selector, &str> = table_layout()
            .into_iter()
            .map(|(s, name, _, _)| (s, name))
            .collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<27} | {:^15} | {:^15} |",
            "Parameter", "Ratio Test", "Hypothesis test"
        );
        let _ = writeln!(
            out,
            "{:<27} | {:>7} {:>7} | {:>7} {:>7} | {:>11}",
            "", "LOS", "NLOS", "LOS", "NLOS", "Threshold"
        );
        let _ = writeln!(out, "{}", "-".repeat(27 + 3 + 15 + 3 + 15 + 3 + 11));
        for row in &self.rows {
            let name = names
                .get(&row.selector)
                .map(|s| s.to_string())
                .unwrap_or_else(|| row.selector.to_string());
            let cells = |a: Option<ClassAccuracy>| match a {
                Some(a) => (pct_cell(a.los), pct_cell(a.nlos)),
                None => ("-".into(), "-".into()),
            };
            let (rl, rn) = cells(row.ratio);
            let (hl, hn) = cells(row.hypothesis);
            let _ = writeln!(
                out,
                "{:<27} | {:>7} {:>7} | {:>7} {:>7} | {:>11}",
                name,
                rl,
                rn,
                hl,
                hn,
                threshold_cell(row.threshold)
            );
        }
        out
    }

    /// One CSV line per (selector, method, class) that was run.
    pub fn render_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_CSV_HEADER}");
        for row in &self.rows {
            for (method, acc) in [
                (Method::Ratio, row.ratio),
                (Method::Hypothesis, row.hypothesis),
            ] {
                let Some(acc) = acc else { continue };
                let threshold = match method {
                    Method::Hypothesis => row.threshold.map_or("-".to_string(), |t| t.to_string()),
                    Method::Ratio => "-".to_string(),
                };
                for label in Label::ALL {
                    if let Some(p) = acc.get(label) {
                        let _ = writeln!(
                            out,
                            "{},{},{},{:.1},{}",
                            row.selector, method, label, p, threshold
                        );
                    }
                }
            }
        }
        out
    }
}
