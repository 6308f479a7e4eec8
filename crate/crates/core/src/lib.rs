//! Line-of-sight / non-line-of-sight classification of ultra-wideband channel
//! impulse responses from delay, moment and energy statistics.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom of this file name the `f64` instantiations used by the
//! command-line pipeline.

pub mod cir;
pub mod classify;
pub mod dataset_io;
pub mod density;
pub mod error;
pub mod eval;
pub mod export;
pub mod features;
pub mod generator;
pub mod scalar;

pub use cir::{
    first_significant_index, Cir, Dataset, Label, LabeledCir, TimeGrid, DEFAULT_REL_EPS,
};
pub use classify::{
    classify_record, hypothesis_classify, ratio_classify, select_threshold, Direction, FittedModel,
    Method, Selector, ThresholdRule,
};
pub use dataset_io::{load_dataset, read_dataset, save_dataset, write_dataset};
pub use density::{
    fit_histogram, joint_likelihood_ratio, likelihood_ratio, pdf_eval, ClassDensities, HistogramPdf,
};
pub use error::{Error, Result};
pub use eval::{evaluate, fit_model, split, AccuracyReport, FitConfig};
pub use features::{
    amp_mean, cov_mean_statistic, energy, energy_ratio, extract_all, kurtosis, mean_excess_delay,
    rms_delay_spread, skewness, CovarianceReference, Feature, FeatureVector,
};
pub use generator::{generate_dataset, GeneratorParams};
pub use scalar::Scalar;

pub type TimeGrid64 = TimeGrid<f64>;
pub type Cir64 = Cir<f64>;
pub type Dataset64 = Dataset<f64>;
pub type FeatureVector64 = FeatureVector<f64>;
pub type HistogramPdf64 = HistogramPdf<f64>;
pub type FittedModel64 = FittedModel<f64>;
pub type AccuracyReport64 = AccuracyReport<f64>;

pub type TimeGrid32 = TimeGrid<f32>;
pub type Cir32 = Cir<f32>;
pub type Dataset32 = Dataset<f32>;
pub type FeatureVector32 = FeatureVector<f32>;
pub type FittedModel32 = FittedModel<f32>;
