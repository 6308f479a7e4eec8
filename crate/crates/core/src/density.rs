//! Histogram density estimates and likelihood ratios.
//!
//! Bins are uniform. An interior edge belongs to the bin on its right and
//! the last bin is closed on the right. Every density is clamped up to a
//! positive floor so ratios stay finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Feature;
use crate::scalar::Scalar;

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HistogramPdf<T> {
    edges: Vec<T>,
    densities: Vec<T>,
    floor: T,
}

/// `bins + 1` evenly spaced edges; the last one is exactly `hi`.
pub fn uniform_edges<T: Scalar>(bins: usize, lo: T, hi: T) -> Result<Vec<T>> {
    if bins < 2 {
        return Err(Error::param(format!("need at least 2 bins, got {bins}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::param(format!("invalid range [{lo}, {hi}]")));
    }
    let width = (hi - lo) / T::from_index(bins);
    let mut edges: Vec<T> = (0..bins).map(|i| lo + T::from_index(i) * width).collect();
    edges.push(hi);
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(format!(
            "range [{lo}, {hi}] too narrow for {bins} bins"
        )));
    }
    Ok(edges)
}

/// Bin holding `x`, clamping values outside the edges to the end bins.
fn clamped_bin<T: Scalar>(edges: &[T], x: T) -> usize {
    let bins = edges.len() - 1;
    // number of edges <= x, minus one
    edges
        .partition_point(|&e| e <= x)
        .saturating_sub(1)
        .min(bins - 1)
}

/// Per-bin sample counts over `edges`, clamping out-of-range samples.
pub fn bin_counts<T: Scalar>(edges: &[T], samples: &[T]) -> Vec<u64> {
    let mut counts = vec![0u64; edges.len() - 1];
    for &x in samples {
        counts[clamped_bin(edges, x)] += 1;
    }
    counts
}

/// Counts normalized to unit mass.
pub fn normalized_densities<T: Scalar>(edges: &[T], counts: &[u64]) -> Vec<T> {
    let total = T::from_u64(counts.iter().sum()).expect("count fits");
    counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| T::from_u64(c).expect("count fits") / (total * (w[1] - w[0])))
        .collect()
}

pub fn fit_histogram<T: Scalar>(
    samples: &[T],
    bins: usize,
    lo: T,
    hi: T,
    floor: T,
) -> Result<HistogramPdf<T>> {
    let edges = uniform_edges(bins, lo, hi)?;
    fit_histogram_on_edges(samples, edges, floor)
}

pub fn fit_histogram_on_edges<T: Scalar>(
    samples: &[T],
    edges: Vec<T>,
    floor: T,
) -> Result<HistogramPdf<T>> {
    if samples.is_empty() {
        return Err(Error::param("no samples to fit"));
    }
    if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::param(format!("non-finite sample {x}")));
    }
    if !(floor.is_finite() && floor > T::zero()) {
        return Err(Error::param(format!(
            "density floor must be positive, got {floor}"
        )));
    }
    if edges.len() < 3 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param(
            "edges must be strictly increasing with at least 2 bins",
        ));
    }
    let counts = bin_counts(&edges, samples);
    let densities = normalized_densities(&edges, &counts)
        .into_iter()
        .map(|d| d.max(floor))
        .collect();
    Ok(HistogramPdf {
        edges,
        densities,
        floor,
    })
}

impl<T: Scalar> HistogramPdf<T> {
    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    pub fn floor(&self) -> T {
        self.floor
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn bin_centers(&self) -> impl Iterator<Item = T> + '_ {
        let half = T::lit(0.5);
        self.edges
            .windows(2)
            .map(move |w| w[0] + half * (w[1] - w[0]))
    }

    /// Integral of the (floored) density.
    pub fn mass(&self) -> T {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&d, w)| d * (w[1] - w[0]))
            .sum()
    }

    /// Bin index of `x`, or `None` outside the edges.
    pub fn bin_of(&self, x: T) -> Option<usize> {
        let (first, last) = (self.edges[0], *self.edges.last().unwrap());
        if !(x >= first && x <= last) {
            return None;
        }
        Some(clamped_bin(&self.edges, x))
    }

    pub fn eval(&self, x: T) -> T {
        self.bin_of(x).map_or(self.floor, |i| self.densities[i])
    }

    /// Same edges with every density multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            edges: self.edges.clone(),
            densities: self.densities.iter().map(|&d| d * k).collect(),
            floor: self.floor * k,
        }
    }

    /// Builds a histogram from explicit densities, flooring them.
    pub fn from_parts(edges: Vec<T>, densities: Vec<T>, floor: T) -> Result<Self> {
        if edges.len() != densities.len() + 1 || densities.len() < 2 {
            return Err(Error::param("need b+1 edges for b >= 2 densities"));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("edges must be strictly increasing"));
        }
        if !(floor.is_finite() && floor > T::zero()) {
            return Err(Error::param("density floor must be positive"));
        }
        if densities
            .iter()
            .any(|d| !(d.is_finite() && *d >= T::zero()))
        {
            return Err(Error::param("densities must be finite and non-negative"));
        }
        let densities = densities.into_iter().map(|d| d.max(floor)).collect();
        Ok(Self {
            edges,
            densities,
            floor,
        })
    }
}

pub fn pdf_eval<T: Scalar>(pdf: &HistogramPdf<T>, x: T) -> T {
    pdf.eval(x)
}

/// Edges spanning the pooled sample range padded by 1% on each side.
pub fn padded_range<T: Scalar>(samples: impl IntoIterator<Item = T>) -> Result<(T, T)> {
    let mut it = samples.into_iter();
    let first = it.next().ok_or_else(|| Error::param("no samples"))?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::param("non-finite sample"));
    }
    let range = hi - lo;
    let pad = if range > T::zero() {
        T::lit(0.01) * range
    } else if lo != T::zero() {
        T::lit(0.01) * lo.abs()
    } else {
        T::one()
    };
    Ok((lo - pad, hi + pad))
}

/// LOS and NLOS densities of one feature over shared edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassDensities<T> {
    pub feature: Feature,
    pub los: HistogramPdf<T>,
    pub nlos: HistogramPdf<T>,
}

impl<T: Scalar> ClassDensities<T> {
    pub fn new(feature: Feature, los: HistogramPdf<T>, nlos: HistogramPdf<T>) -> Result<Self> {
        if los.edges != nlos.edges {
            return Err(Error::Shape(format!(
                "{feature}: class densities use different edges"
            )));
        }
        Ok(Self { feature, los, nlos })
    }

    /// Fits both classes on edges covering the pooled samples.
    pub fn fit(feature: Feature, los: &[T], nlos: &[T], bins: usize, floor: T) -> Result<Self> {
        if los.is_empty() || nlos.is_empty() {
            return Err(Error::param(format!(
                "{feature}: both classes need samples"
            )));
        }
        let (lo, hi) = padded_range(los.iter().chain(nlos).copied())?;
        let edges = uniform_edges(bins, lo, hi)?;
        Self::new(
            feature,
            fit_histogram_on_edges(los, edges.clone(), floor)?,
            fit_histogram_on_edges(nlos, edges, floor)?,
        )
    }

    pub fn ratio(&self, x: T) -> T {
        likelihood_ratio(self, x)
    }
}

pub fn likelihood_ratio<T: Scalar>(cd: &ClassDensities<T>, x: T) -> T {
    cd.los.eval(x) / cd.nlos.eval(x)
}

/// Product of per-feature ratios, treating features as independent.
pub fn joint_likelihood_ratio<T: Scalar>(cds: &[&ClassDensities<T>], xs: &[T]) -> Result<T> {
    if cds.len() != xs.len() {
        return Err(Error::param(format!(
            "{} densities but {} values",
            cds.len(),
            xs.len()
        )));
    }
    if cds.is_empty() {
        return Err(Error::param("joint ratio needs at least one feature"));
    }
    Ok(cds
        .iter()
        .zip(xs)
        .fold(T::one(), |acc, (cd, &x)| acc * likelihood_ratio(cd, x)))
}
