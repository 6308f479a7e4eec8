//! Scalar statistics of an impulse response.
//!
//! Integrals over the time axis are `dt`-weighted sums over the grid and all
//! moments use population (1/N) normalization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cir::{first_significant_index, Cir};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One of the per-record statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    Skewness,
    Kurtosis,
    Med,
    Rds,
    Energy,
    EnergyRatio,
    AmpMean,
}

impl Feature {
    /// Column order of the feature table.
    pub const ALL: [Feature; 7] = [
        Feature::Skewness,
        Feature::Kurtosis,
        Feature::Med,
        Feature::Rds,
        Feature::Energy,
        Feature::EnergyRatio,
        Feature::AmpMean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Skewness => "skewness",
            Feature::Kurtosis => "kurtosis",
            Feature::Med => "med",
            Feature::Rds => "rds",
            Feature::Energy => "energy",
            Feature::EnergyRatio => "energy_ratio",
            Feature::AmpMean => "amp_mean",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::param(format!("unknown feature {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub skewness: T,
    pub kurtosis: T,
    pub med: T,
    pub rds: T,
    pub energy: T,
    pub energy_ratio: T,
    pub amp_mean: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn get(&self, f: Feature) -> T {
        match f {
            Feature::Skewness => self.skewness,
            Feature::Kurtosis => self.kurtosis,
            Feature::Med => self.med,
            Feature::Rds => self.rds,
            Feature::Energy => self.energy,
            Feature::EnergyRatio => self.energy_ratio,
            Feature::AmpMean => self.amp_mean,
        }
    }
}

fn mean<T: Scalar>(xs: impl Iterator<Item = T> + Clone) -> T {
    let n = T::from_index(xs.clone().count());
    xs.sum::<T>() / n
}

/// Central moments of order 2, 3 and 4 (population normalization).
fn central_moments<T: Scalar>(xs: impl Iterator<Item = T> + Clone) -> (T, T, T) {
    let n = T::from_index(xs.clone().count());
    let mu = mean(xs.clone());
    let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
    for x in xs {
        let d = x - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Third standardized moment of the signed taps.
pub fn skewness<T: Scalar>(cir: &Cir<T>) -> Result<T> {
    let (m2, m3, _) = central_moments(cir.taps().iter().copied());
    if !(m2 > T::zero()) {
        return Err(Error::degenerate("taps have zero variance"));
    }
    Ok(m3 / (m2 * m2.sqrt()))
}

/// Fourth standardized moment of the tap magnitudes, without excess offset.
pub fn kurtosis<T: Scalar>(cir: &Cir<T>) -> Result<T> {
    let (m2, _, m4) = central_moments(cir.taps().iter().map(|t| t.abs()));
    if !(m2 > T::zero()) {
        return Err(Error::degenerate("tap magnitudes have zero variance"));
    }
    Ok(m4 / (m2 * m2))
}

/// `|x_i|^2 dt` normalized to unit sum.
fn power_weights<T: Scalar>(cir: &Cir<T>) -> Result<Vec<T>> {
    let dt = cir.grid().dt;
    let w: Vec<T> = cir.taps().iter().map(|&x| x * x * dt).collect();
    let total: T = w.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::degenerate("signal has zero energy"));
    }
    Ok(w.into_iter().map(|v| v / total).collect())
}

fn weighted_delay<T: Scalar>(cir: &Cir<T>, weights: &[T]) -> T {
    cir.grid().times().zip(weights).map(|(t, &p)| t * p).sum()
}

/// Power-weighted mean arrival time.
pub fn mean_excess_delay<T: Scalar>(cir: &Cir<T>) -> Result<T> {
    let p = power_weights(cir)?;
    Ok(weighted_delay(cir, &p))
}

/// Power-weighted standard deviation of arrival times about the mean excess delay.
pub fn rms_delay_spread<T: Scalar>(cir: &Cir<T>) -> Result<T> {
    let p = power_weights(cir)?;
    let med = weighted_delay(cir, &p);
    let var: T = cir
        .grid()
        .times()
        .zip(&p)
        .map(|(t, &w)| {
            let d = t - med;
            d * d * w
        })
        .sum();
    Ok(var.sqrt())
}

pub fn energy<T: Scalar>(cir: &Cir<T>) -> T {
    let dt = cir.grid().dt;
    cir.taps().iter().map(|&x| x * x * dt).sum()
}

/// Energy of the first significant tap over total energy.
pub fn energy_ratio<T: Scalar>(cir: &Cir<T>, rel_eps: T) -> Result<T> {
    let total = energy(cir);
    if !(total > T::zero()) {
        return Err(Error::degenerate("signal has zero energy"));
    }
    let first = cir.taps()[first_significant_index(cir, rel_eps)?];
    Ok(first * first * cir.grid().dt / total)
}

/// Mean tap magnitude.
pub fn amp_mean<T: Scalar>(cir: &Cir<T>) -> T {
    mean(cir.taps().iter().map(|t| t.abs()))
}

fn check_reference<'a, T: Scalar>(
    test: &Cir<T>,
    reference: impl IntoIterator<Item = &'a Cir<T>>,
) -> Result<usize> {
    let mut count = 0;
    for (j, r) in reference.into_iter().enumerate() {
        if r.grid() != test.grid() {
            return Err(Error::Shape(format!(
                "reference record {j} is on a different grid"
            )));
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::param("reference set is empty"));
    }
    Ok(count)
}

/// Mean over the reference records of the population cross-covariance
/// between `test` and each reference, taken over the sample index.
pub fn cov_mean_statistic<'a, T: Scalar>(
    test: &Cir<T>,
    reference: impl IntoIterator<Item = &'a Cir<T>> + Clone,
) -> Result<T> {
    let m = check_reference(test, reference.clone())?;
    let n = T::from_index(test.len());
    let mx = mean(test.taps().iter().copied());
    let mut acc = T::zero();
    for r in reference {
        let mr = mean(r.taps().iter().copied());
        let c: T = test
            .taps()
            .iter()
            .zip(r.taps())
            .map(|(&x, &y)| (x - mx) * (y - mr))
            .sum();
        acc += c / n;
    }
    Ok(acc / T::from_index(m))
}

/// Mean reference waveform, a sufficient summary for [`cov_mean_statistic`].
///
/// Cross-covariance is linear in the reference signal, so averaging the
/// per-record covariances equals the covariance against the averaged
/// waveform. Evaluating against this summary costs O(n) instead of O(n·m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CovarianceReference<T> {
    pub grid: crate::cir::TimeGrid<T>,
    pub records: usize,
    pub mean_taps: Vec<T>,
}

impl<T: Scalar> CovarianceReference<T> {
    pub fn new<'a>(reference: impl IntoIterator<Item = &'a Cir<T>>) -> Result<Self> {
        let mut it = reference.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::param("reference set is empty"))?;
        let grid = *first.grid();
        let mut sum = first.taps().to_vec();
        let mut records = 1;
        for (j, r) in it.enumerate() {
            if *r.grid() != grid {
                return Err(Error::Shape(format!(
                    "reference record {} is on a different grid",
                    j + 1
                )));
            }
            for (s, &v) in sum.iter_mut().zip(r.taps()) {
                *s += v;
            }
            records += 1;
        }
        let m = T::from_index(records);
        let mean_taps = sum.into_iter().map(|s| s / m).collect();
        Ok(Self {
            grid,
            records,
            mean_taps,
        })
    }

    pub fn statistic(&self, test: &Cir<T>) -> Result<T> {
        if *test.grid() != self.grid {
            return Err(Error::Shape(
                "test record is on a different grid than the reference".into(),
            ));
        }
        let n = T::from_index(test.len());
        let mx = mean(test.taps().iter().copied());
        let mr = mean(self.mean_taps.iter().copied());
        let c: T = test
            .taps()
            .iter()
            .zip(&self.mean_taps)
            .map(|(&x, &y)| (x - mx) * (y - mr))
            .sum();
        Ok(c / n)
    }
}

/// All seven statistics; a degenerate signal error names the failing feature.
pub fn extract_all<T: Scalar>(cir: &Cir<T>, rel_eps: T) -> Result<FeatureVector<T>> {
    let tag = |f: Feature| move |e: Error| e.in_context(f);
    Ok(FeatureVector {
        skewness: skewness(cir).map_err(tag(Feature::Skewness))?,
        kurtosis: kurtosis(cir).map_err(tag(Feature::Kurtosis))?,
        med: mean_excess_delay(cir).map_err(tag(Feature::Med))?,
        rds: rms_delay_spread(cir).map_err(tag(Feature::Rds))?,
        energy: energy(cir),
        energy_ratio: energy_ratio(cir, rel_eps).map_err(tag(Feature::EnergyRatio))?,
        amp_mean: amp_mean(cir),
    })
}
