//! Channel impulse response data model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default relative threshold for locating the first significant tap.
pub const DEFAULT_REL_EPS: f64 = 0.01;

/// Uniform sampling grid: sample `i` sits at `t_start + i * dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TimeGrid<T> {
    pub t_start: T,
    pub dt: T,
    pub n: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t_start: T, dt: T, n: usize) -> Result<Self> {
        if !t_start.is_finite() {
            return Err(Error::param("t_start must be finite"));
        }
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::param(format!("dt must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(Error::param("grid needs at least one sample"));
        }
        Ok(Self { t_start, dt, n })
    }

    #[inline]
    pub fn time_at(&self, i: usize) -> T {
        self.t_start + T::from_index(i) * self.dt
    }

    /// `n * dt`, the integration window of the grid.
    pub fn duration(&self) -> T {
        T::from_index(self.n) * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.n).map(move |i| self.time_at(i))
    }
}

impl<T: Scalar> Default for TimeGrid<T> {
    /// 500 samples at 0.02 spacing, covering 0 to 10.
    fn default() -> Self {
        Self {
            t_start: T::zero(),
            dt: T::lit(0.02),
            n: 500,
        }
    }
}

/// A sampled, real-valued impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Cir<T> {
    grid: TimeGrid<T>,
    taps: Vec<T>,
}

impl<T: Scalar> Cir<T> {
    pub fn new(grid: TimeGrid<T>, taps: Vec<T>) -> Result<Self> {
        if taps.len() != grid.n {
            return Err(Error::Shape(format!(
                "{} taps on a {}-sample grid",
                taps.len(),
                grid.n
            )));
        }
        if let Some(i) = taps.iter().position(|t| !t.is_finite()) {
            return Err(Error::param(format!("tap {i} is not finite")));
        }
        Ok(Self { grid, taps })
    }

    /// Taps on a grid starting at zero with step `dt`.
    pub fn from_taps(dt: T, taps: Vec<T>) -> Result<Self> {
        let grid = TimeGrid::new(T::zero(), dt, taps.len())?;
        Self::new(grid, taps)
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.taps.iter().fold(T::zero(), |m, t| m.max(t.abs()))
    }

    pub fn scaled(&self, a: T) -> Self {
        Self {
            grid: self.grid,
            taps: self.taps.iter().map(|&t| t * a).collect(),
        }
    }

    pub fn with_grid(&self, grid: TimeGrid<T>) -> Result<Self> {
        Self::new(grid, self.taps.clone())
    }
}

/// Smallest index whose magnitude exceeds `rel_eps` times the peak magnitude.
pub fn first_significant_index<T: Scalar>(cir: &Cir<T>, rel_eps: T) -> Result<usize> {
    if !(rel_eps >= T::zero() && rel_eps < T::one()) {
        return Err(Error::param(format!(
            "rel_eps must lie in [0, 1), got {rel_eps}"
        )));
    }
    let peak = cir.max_abs();
    if peak == T::zero() {
        return Err(Error::degenerate("all taps are zero"));
    }
    let level = rel_eps * peak;
    Ok(cir
        .taps
        .iter()
        .position(|t| t.abs() > level)
        .expect("the peak tap exceeds any level below it"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Los, Label::Nlos];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Los => "LOS",
            Label::Nlos => "NLOS",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LOS" => Ok(Label::Los),
            "NLOS" => Ok(Label::Nlos),
            other => Err(Error::param(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LabeledCir<T> {
    pub cir: Cir<T>,
    pub label: Label,
}

/// Labeled records sharing one sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    grid: TimeGrid<T>,
    records: Vec<LabeledCir<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(grid: TimeGrid<T>, records: Vec<LabeledCir<T>>) -> Result<Self> {
        if let Some(i) = records.iter().position(|r| r.cir.grid != grid) {
            return Err(Error::Shape(format!(
                "record {i} is not on the dataset grid"
            )));
        }
        Ok(Self { grid, records })
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn records(&self) -> &[LabeledCir<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn of_class(&self, label: Label) -> impl Iterator<Item = &Cir<T>> + '_ {
        self.records
            .iter()
            .filter(move |r| r.label == label)
            .map(|r| &r.cir)
    }

    /// New dataset holding the records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            grid: self.grid,
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cir(taps: &[f64]) -> Cir<f64> {
        Cir::from_taps(1.0, taps.to_vec()).unwrap()
    }

    #[test]
    fn first_significant_picks_first_nonzero() {
        assert_eq!(
            first_significant_index(&cir(&[0.0, 0.0, 5.0, 1.0]), 0.01).unwrap(),
            2
        );
    }

    #[test]
    fn first_significant_skips_sub_threshold_lead() {
        assert_eq!(
            first_significant_index(&cir(&[0.001, 0.0, 1.0]), 0.01).unwrap(),
            2
        );
    }

    #[test]
    fn first_significant_rejects_zero_signal() {
        let err = first_significant_index(&cir(&[0.0, 0.0, 0.0]), 0.01).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn first_significant_rejects_bad_eps() {
        assert!(first_significant_index(&cir(&[1.0]), 1.0).is_err());
        assert!(first_significant_index(&cir(&[1.0]), -0.1).is_err());
    }

    #[test]
    fn default_grid_spans_zero_to_ten() {
        let g = TimeGrid::<f64>::default();
        assert_eq!(g.n, 500);
        assert_eq!(g.dt, 0.02);
        assert!((g.duration() - 10.0).abs() < 1e-12);
        assert!((g.time_at(499) - 9.98).abs() < 1e-12);
    }

    #[test]
    fn cir_rejects_length_mismatch_and_nan() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        assert!(matches!(Cir::new(g, vec![1.0, 2.0]), Err(Error::Shape(_))));
        assert!(Cir::new(g, vec![1.0, f64::NAN, 0.0]).is_err());
        assert!(TimeGrid::new(0.0, 0.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn label_parses_only_known_tokens() {
        assert_eq!("LOS".parse::<Label>().unwrap(), Label::Los);
        assert_eq!("NLOS".parse::<Label>().unwrap(), Label::Nlos);
        assert!("los".parse::<Label>().is_err());
    }

    #[test]
    fn dataset_requires_shared_grid() {
        let a = cir(&[1.0, 2.0]);
        let b = Cir::from_taps(0.5, vec![1.0, 2.0]).unwrap();
        let recs = vec![
            LabeledCir {
                cir: a.clone(),
                label: Label::Los,
            },
            LabeledCir {
                cir: b,
                label: Label::Nlos,
            },
        ];
        assert!(Dataset::new(*a.grid(), recs).is_err());
    }
}
