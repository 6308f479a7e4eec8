//! Likelihood-ratio and threshold decision rules.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cir::{Cir, Label};
use crate::density::{joint_likelihood_ratio, ClassDensities};
use crate::error::{Error, Result};
use crate::features::{extract_all, CovarianceReference, Feature, FeatureVector};
use crate::scalar::Scalar;

pub const MODEL_FORMAT: &str = "uwb-nlos-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// `value > T` is LOS; a value equal to `T` is NLOS.
    GreaterIsLos,
    /// `value <= T` is LOS.
    LessOrEqualIsLos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ThresholdRule<T> {
    pub threshold: T,
    pub direction: Direction,
}

impl<T: Scalar> ThresholdRule<T> {
    pub fn new(threshold: T, direction: Direction) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::param("threshold must be finite"));
        }
        Ok(Self {
            threshold,
            direction,
        })
    }

    pub fn classify(&self, value: T) -> Label {
        hypothesis_classify(value, self)
    }

    /// Misclassified training samples under this rule.
    pub fn errors(&self, los: &[T], nlos: &[T]) -> usize {
        los.iter()
            .filter(|&&v| self.classify(v) != Label::Los)
            .count()
            + nlos
                .iter()
                .filter(|&&v| self.classify(v) != Label::Nlos)
                .count()
    }
}

/// LOS when the ratio is at least one.
pub fn ratio_classify<T: Scalar>(ratio: T) -> Result<Label> {
    if !(ratio > T::zero()) {
        return Err(Error::param(format!(
            "likelihood ratio must be positive, got {ratio}"
        )));
    }
    Ok(if ratio >= T::one() {
        Label::Los
    } else {
        Label::Nlos
    })
}

pub fn hypothesis_classify<T: Scalar>(value: T, rule: &ThresholdRule<T>) -> Label {
    let los = match rule.direction {
        Direction::GreaterIsLos => value > rule.threshold,
        Direction::LessOrEqualIsLos => value <= rule.threshold,
    };
    if los {
        Label::Los
    } else {
        Label::Nlos
    }
}

/// Threshold and direction with the fewest training errors.
///
/// Candidates are the midpoints between adjacent pooled sorted values plus one
/// value strictly below and one strictly above the data, so the constant
/// classifiers are always available. Ties go to the smaller threshold, then
/// to `LessOrEqualIsLos`.
pub fn select_threshold<T: Scalar>(los: &[T], nlos: &[T]) -> Result<ThresholdRule<T>> {
    if los.is_empty() || nlos.is_empty() {
        return Err(Error::param(
            "threshold selection needs samples of both classes",
        ));
    }
    if los.iter().chain(nlos).any(|v| !v.is_finite()) {
        return Err(Error::param("threshold selection needs finite values"));
    }
    let sorted = |xs: &[T]| {
        let mut v = xs.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        v
    };
    let (los_sorted, nlos_sorted) = (sorted(los), sorted(nlos));
    let mut pooled: Vec<T> = los_sorted.iter().chain(&nlos_sorted).copied().collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).expect("finite"));

    let (min, max) = (pooled[0], pooled[pooled.len() - 1]);
    let below = min - min.abs().max(T::one());
    let above = max + max.abs().max(T::one());
    let half = T::lit(0.5);
    let candidates = std::iter::once(below)
        .chain(pooled.windows(2).map(|w| (w[0] + w[1]) * half))
        .chain(std::iter::once(above));

    let (n_los, n_nlos) = (los.len(), nlos.len());
    let mut best: Option<(usize, ThresholdRule<T>)> = None;
    for t in candidates {
        let los_le = los_sorted.partition_point(|&v| v <= t);
        let nlos_le = nlos_sorted.partition_point(|&v| v <= t);
        let le_errors = (n_los - los_le) + nlos_le;
        let gt_errors = los_le + (n_nlos - nlos_le);
        for (errors, direction) in [
            (le_errors, Direction::LessOrEqualIsLos),
            (gt_errors, Direction::GreaterIsLos),
        ] {
            // candidates arrive in ascending order, so strict improvement keeps the smallest T
            if best.as_ref().is_none_or(|(e, _)| errors < *e) {
                best = Some((
                    errors,
                    ThresholdRule {
                        threshold: t,
                        direction,
                    },
                ));
            }
        }
    }
    Ok(best.expect("at least two candidates").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ratio,
    Hypothesis,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ratio => "ratio",
            Method::Hypothesis => "hypothesis",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(Method::Ratio),
            "hypothesis" => Ok(Method::Hypothesis),
            other => Err(Error::param(format!("unknown method {other:?}"))),
        }
    }
}

/// What a decision is based on: one feature, a product of features, or the
/// covariance-mean statistic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Selector {
    Feature(Feature),
    Joint(Vec<Feature>),
    Covariance,
}

impl Selector {
    pub const COVARIANCE_NAME: &'static str = "cov_mean";
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Feature(feat) => write!(f, "{feat}"),
            Selector::Joint(feats) => {
                let names: Vec<_> = feats.iter().map(|x| x.name()).collect();
                f.write_str(&names.join("+"))
            }
            Selector::Covariance => f.write_str(Self::COVARIANCE_NAME),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// `skewness`, `cov_mean`, or features joined by `+` such as `rds+med`.
    fn from_str(s: &str) -> Result<Self> {
        if s == Self::COVARIANCE_NAME {
            return Ok(Selector::Covariance);
        }
        if s.contains('+') {
            let feats = s
                .split('+')
                .map(str::parse)
                .collect::<Result<Vec<Feature>>>()
                .map_err(|_| Error::param(format!("unknown selector {s:?}")))?;
            return Ok(Selector::Joint(feats));
        }
        s.parse()
            .map(Selector::Feature)
            .map_err(|_| Error::param(format!("unknown selector {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureModel<T> {
    pub densities: ClassDensities<T>,
    pub rule: ThresholdRule<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CovarianceModel<T> {
    /// Averaged LOS training waveform.
    pub reference: CovarianceReference<T>,
    /// SHA-256 over the reference records' taps, in order.
    pub reference_sha256: String,
    pub rule: ThresholdRule<T>,
}

/// Everything needed to classify a new impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct FittedModel<T> {
    pub format: String,
    pub version: u32,
    pub rel_eps: T,
    pub bins: usize,
    pub floor: T,
    pub features: Vec<FeatureModel<T>>,
    pub joint: Vec<Vec<Feature>>,
    pub covariance: CovarianceModel<T>,
    pub metadata: BTreeMap<String, String>,
}

/// Statistics of one record that the decision rules read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub features: FeatureVector<T>,
    pub cov_mean: T,
}

impl<T: Scalar> FittedModel<T> {
    pub fn feature(&self, f: Feature) -> Result<&FeatureModel<T>> {
        self.features
            .iter()
            .find(|m| m.densities.feature == f)
            .ok_or_else(|| Error::param(format!("feature {f} is not in the model")))
    }

    /// Structural checks for a model read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::param(format!(
                "not a model document: format {:?}",
                self.format
            )));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::param(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        for pair in &self.joint {
            if pair.is_empty() {
                return Err(Error::param("empty joint feature set"));
            }
            for &f in pair {
                self.feature(f)?;
            }
        }
        Ok(())
    }

    pub fn selectors(&self) -> Vec<Selector> {
        self.features
            .iter()
            .map(|m| Selector::Feature(m.densities.feature))
            .chain(self.joint.iter().cloned().map(Selector::Joint))
            .chain(std::iter::once(Selector::Covariance))
            .collect()
    }

    pub fn observe(&self, cir: &Cir<T>) -> Result<Observation<T>> {
        Ok(Observation {
            features: extract_all(cir, self.rel_eps)?,
            cov_mean: self.covariance.reference.statistic(cir)?,
        })
    }

    /// Checks that `method` applies to `selector` and the features exist.
    pub fn check(&self, selector: &Selector, method: Method) -> Result<()> {
        match (selector, method) {
            (Selector::Covariance, Method::Ratio) => Err(Error::Unsupported(
                "the covariance statistic has only a threshold test".into(),
            )),
            (Selector::Joint(_), Method::Hypothesis) => Err(Error::Unsupported(
                "joint selectors have only a ratio test".into(),
            )),
            (Selector::Feature(f), _) => self.feature(*f).map(|_| ()),
            (Selector::Joint(fs), Method::Ratio) => {
                if fs.is_empty() {
                    return Err(Error::param("empty joint selector"));
                }
                fs.iter().try_for_each(|&f| self.feature(f).map(|_| ()))
            }
            (Selector::Covariance, Method::Hypothesis) => Ok(()),
        }
    }

    /// Likelihood ratio behind a ratio-test decision.
    pub fn ratio(&self, obs: &Observation<T>, selector: &Selector) -> Result<T> {
        self.check(selector, Method::Ratio)?;
        let feats = match selector {
            Selector::Feature(f) => std::slice::from_ref(f),
            Selector::Joint(fs) => fs.as_slice(),
            Selector::Covariance => unreachable!("rejected by check"),
        };
        let cds = feats
            .iter()
            .map(|&f| self.feature(f).map(|m| &m.densities))
            .collect::<Result<Vec<_>>>()?;
        let xs: Vec<T> = feats.iter().map(|&f| obs.features.get(f)).collect();
        joint_likelihood_ratio(&cds, &xs)
    }

    pub fn decide(
        &self,
        obs: &Observation<T>,
        method: Method,
        selector: &Selector,
    ) -> Result<Label> {
        match method {
            Method::Ratio => ratio_classify(self.ratio(obs, selector)?),
            Method::Hypothesis => {
                self.check(selector, method)?;
                Ok(match selector {
                    Selector::Feature(f) => self.feature(*f)?.rule.classify(obs.features.get(*f)),
                    Selector::Covariance => self.covariance.rule.classify(obs.cov_mean),
                    Selector::Joint(_) => unreachable!("rejected by check"),
                })
            }
        }
    }

    /// Threshold a hypothesis test on `selector` uses, if it has one.
    pub fn threshold(&self, selector: &Selector) -> Option<T> {
        match selector {
            Selector::Feature(f) => self.feature(*f).ok().map(|m| m.rule.threshold),
            Selector::Covariance => Some(self.covariance.rule.threshold),
            Selector::Joint(_) => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }
}

pub fn classify_record<T: Scalar>(
    model: &FittedModel<T>,
    cir: &Cir<T>,
    method: Method,
    selector: &Selector,
) -> Result<Label> {
    model.check(selector, method)?;
    let obs = model.observe(cir)?;
    model.decide(&obs, method, selector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ratio_rule() {
        assert_eq!(ratio_classify(3.0).unwrap(), Label::Los);
        assert_eq!(ratio_classify(0.2).unwrap(), Label::Nlos);
        assert_eq!(ratio_classify(1.0).unwrap(), Label::Los);
        assert!(ratio_classify(0.0).is_err());
        assert!(ratio_classify(-1.0).is_err());
        assert!(ratio_classify(f64::NAN).is_err());
    }

    #[test]
    fn threshold_rule() {
        let gt = ThresholdRule::new(3.0, Direction::GreaterIsLos).unwrap();
        let le = ThresholdRule::new(3.0, Direction::LessOrEqualIsLos).unwrap();
        assert_eq!(hypothesis_classify(5.0, &gt), Label::Los);
        assert_eq!(hypothesis_classify(3.0, &le), Label::Los);
        assert_eq!(hypothesis_classify(2.0, &gt), Label::Nlos);
        assert_eq!(hypothesis_classify(3.0, &gt), Label::Nlos);
        assert!(ThresholdRule::new(f64::INFINITY, Direction::GreaterIsLos).is_err());
    }

    #[test]
    fn separated_classes_pick_smallest_midpoint() {
        let r = select_threshold(&[1.0, 2.0], &[10.0, 11.0]).unwrap();
        assert_eq!(r.threshold, 6.0);
        assert_eq!(r.direction, Direction::LessOrEqualIsLos);
        assert_eq!(r.errors(&[1.0, 2.0], &[10.0, 11.0]), 0);

        let r = select_threshold(&[10.0, 11.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.threshold, 6.0);
        assert_eq!(r.direction, Direction::GreaterIsLos);
    }

    #[test]
    fn identical_singletons_cost_one_error() {
        let r = select_threshold(&[5.0], &[5.0]).unwrap();
        assert_eq!(r.errors(&[5.0], &[5.0]), 1);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(select_threshold::<f64>(&[], &[1.0]).is_err());
        assert!(select_threshold::<f64>(&[1.0], &[]).is_err());
    }

    #[test]
    fn selector_parsing() {
        assert_eq!(
            "med".parse::<Selector>().unwrap(),
            Selector::Feature(Feature::Med)
        );
        assert_eq!(
            "cov_mean".parse::<Selector>().unwrap(),
            Selector::Covariance
        );
        let j: Selector = "rds+med".parse().unwrap();
        assert_eq!(j, Selector::Joint(vec![Feature::Rds, Feature::Med]));
        assert_eq!(j.to_string(), "rds+med");
        assert!("pld".parse::<Selector>().is_err());
        assert!("rds+pld".parse::<Selector>().is_err());
    }

    fn brute_min_errors(los: &[f64], nlos: &[f64]) -> usize {
        let mut cands: Vec<f64> = los.iter().chain(nlos).copied().collect();
        cands.push(f64::NEG_INFINITY);
        cands.push(f64::INFINITY);
        let mut best = usize::MAX;
        for &t in &cands {
            for dir in [Direction::GreaterIsLos, Direction::LessOrEqualIsLos] {
                let los_ok = |v: f64| match dir {
                    Direction::GreaterIsLos => v > t,
                    Direction::LessOrEqualIsLos => v <= t,
                };
                let e = los.iter().filter(|&&v| !los_ok(v)).count()
                    + nlos.iter().filter(|&&v| los_ok(v)).count();
                best = best.min(e);
            }
        }
        best
    }

    proptest! {
        #[test]
        fn threshold_is_optimal(
            los in prop::collection::vec(-20i32..20, 1..30),
            nlos in prop::collection::vec(-20i32..20, 1..30),
        ) {
            let los: Vec<f64> = los.into_iter().map(|v| v as f64 * 0.5).collect();
            let nlos: Vec<f64> = nlos.into_iter().map(|v| v as f64 * 0.5).collect();
            let rule = select_threshold(&los, &nlos).unwrap();
            prop_assert_eq!(rule.errors(&los, &nlos), brute_min_errors(&los, &nlos));
        }

        #[test]
        fn raising_threshold_never_adds_los(v in -1e3f64..1e3, t in -1e3f64..1e3, dt in 0f64..1e3) {
            let lo = ThresholdRule { threshold: t, direction: Direction::GreaterIsLos };
            let hi = ThresholdRule { threshold: t + dt, direction: Direction::GreaterIsLos };
            if lo.classify(v) == Label::Nlos {
                prop_assert_eq!(hi.classify(v), Label::Nlos);
            }
        }
    }
}
