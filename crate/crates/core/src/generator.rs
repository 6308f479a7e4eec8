//! Seeded synthetic LOS/NLOS impulse responses.
//!
//! Multipath follows a double-Poisson cluster/ray process with exponentially
//! decaying mean power and Rayleigh-distributed ray magnitudes with random
//! sign. LOS records add a deterministic direct tap at the first arrival.
//! NLOS records start after a random excess delay and carry no direct tap.
//! Every record draws from its own ChaCha stream keyed by `(seed, class,
//! index)`, so generation order does not affect the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cir::{Cir, Dataset, Label, LabeledCir, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bumped whenever a default below changes.
pub const DEFAULTS_VERSION: u32 = 1;

/// Rays whose mean power falls below this fraction of the first ray are not drawn.
const MIN_RELATIVE_POWER: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorParams {
    /// Cluster arrivals per time unit.
    pub cluster_arrival_rate: f64,
    /// Ray arrivals per time unit within a cluster.
    pub ray_arrival_rate: f64,
    /// Power decay constant across clusters.
    pub cluster_decay_constant: f64,
    /// Power decay constant across rays within a cluster.
    pub ray_decay_constant: f64,
    /// Amplitude of the LOS direct tap.
    pub los_direct_gain: f64,
    /// Mean of the exponential excess delay before the first NLOS arrival.
    pub nlos_first_path_delay_mean: f64,
    /// Standard deviation of the additive Gaussian floor on every tap.
    pub noise_floor_sigma: f64,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            cluster_arrival_rate: 0.5,
            ray_arrival_rate: 5.0,
            cluster_decay_constant: 2.0,
            ray_decay_constant: 0.5,
            los_direct_gain: 4.0,
            nlos_first_path_delay_mean: 1.0,
            noise_floor_sigma: 1e-4,
            seed: 2023,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cluster_arrival_rate", self.cluster_arrival_rate),
            ("ray_arrival_rate", self.ray_arrival_rate),
            ("cluster_decay_constant", self.cluster_decay_constant),
            ("ray_decay_constant", self.ray_decay_constant),
            ("los_direct_gain", self.los_direct_gain),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let non_negative = [
            (
                "nlos_first_path_delay_mean",
                self.nlos_first_path_delay_mean,
            ),
            ("noise_floor_sigma", self.noise_floor_sigma),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed for a named purpose (for example a train/test split).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag))
}

/// Seed for one record's random stream.
pub fn record_seed(seed: u64, label: Label, index: u64) -> u64 {
    let class_tag = match label {
        Label::Los => 0x4C4F_53,
        Label::Nlos => 0x4E4C_4F53,
    };
    splitmix64(splitmix64(splitmix64(seed) ^ class_tag) ^ index)
}

/// Draws one impulse response of the given class.
pub fn generate_record<T: Scalar>(
    params: &GeneratorParams,
    grid: &TimeGrid<T>,
    label: Label,
    index: u64,
) -> Result<Cir<T>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(record_seed(params.seed, label, index));
    let dt = grid.dt.to_f64().expect("finite dt");
    let span = grid.duration().to_f64().expect("finite duration");
    let mut taps = vec![0.0f64; grid.n];

    let place = |taps: &mut [f64], t: f64, amp: f64| {
        let idx = (t / dt).round();
        if idx >= 0.0 && (idx as usize) < taps.len() {
            taps[idx as usize] += amp;
        }
    };

    let onset = match label {
        Label::Los => 0.0,
        Label::Nlos if params.nlos_first_path_delay_mean > 0.0 => {
            let excess: f64 = Exp::new(1.0 / params.nlos_first_path_delay_mean)
                .expect("validated rate")
                .sample(&mut rng);
            // keep the first arrival well inside the window
            excess.min(0.5 * span)
        }
        Label::Nlos => 0.0,
    };

    if label == Label::Los {
        place(&mut taps, onset, params.los_direct_gain);
    }

    let cluster_gap = Exp::new(params.cluster_arrival_rate).expect("validated rate");
    let ray_gap = Exp::new(params.ray_arrival_rate).expect("validated rate");
    let mut cluster_t = 0.0;
    while onset + cluster_t < span {
        let cluster_power = (-cluster_t / params.cluster_decay_constant).exp();
        if cluster_power < MIN_RELATIVE_POWER {
            break;
        }
        let mut ray_t = 0.0;
        while onset + cluster_t + ray_t < span {
            let mean_power = cluster_power * (-ray_t / params.ray_decay_constant).exp();
            if mean_power < MIN_RELATIVE_POWER {
                break;
            }
            let power: f64 = Exp1.sample(&mut rng);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            place(
                &mut taps,
                onset + cluster_t + ray_t,
                sign * (mean_power * power).sqrt(),
            );
            ray_t += ray_gap.sample(&mut rng);
        }
        cluster_t += cluster_gap.sample(&mut rng);
    }

    if params.noise_floor_sigma > 0.0 {
        let noise = Normal::new(0.0, params.noise_floor_sigma).expect("validated sigma");
        for tap in &mut taps {
            *tap += noise.sample(&mut rng);
        }
    }

    Cir::new(*grid, taps.into_iter().map(T::lit).collect())
}

/// `n_per_class` LOS records followed by `n_per_class` NLOS records.
pub fn generate_dataset<T: Scalar>(
    params: &GeneratorParams,
    n_per_class: usize,
    grid: &TimeGrid<T>,
) -> Result<Dataset<T>> {
    params.validate()?;
    if n_per_class == 0 {
        return Err(Error::param("n_per_class must be at least 1"));
    }
    let records = Label::ALL
        .iter()
        .flat_map(|&label| (0..n_per_class).map(move |i| (label, i as u64)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(label, i)| {
            generate_record(params, grid, label, i).map(|cir| LabeledCir { cir, label })
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(*grid, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cir::first_significant_index;

    #[test]
    fn default_shape() {
        let grid = TimeGrid::<f64>::default();
        let ds = generate_dataset(&GeneratorParams::default(), 1000, &grid).unwrap();
        assert_eq!(ds.len(), 2000);
        assert_eq!(ds.count(Label::Los), 1000);
        assert!(ds.records().iter().all(|r| r.cir.len() == 500));
        assert!(ds.records().iter().all(|r| r.cir.max_abs() > 0.0));
    }

    #[test]
    fn repeat_calls_match() {
        let grid = TimeGrid::<f64>::default();
        let p = GeneratorParams::default();
        assert_eq!(
            generate_dataset(&p, 20, &grid).unwrap(),
            generate_dataset(&p, 20, &grid).unwrap()
        );
    }

    #[test]
    fn records_do_not_depend_on_dataset_size() {
        let grid = TimeGrid::<f64>::default();
        let p = GeneratorParams::default();
        let small = generate_dataset(&p, 5, &grid).unwrap();
        let big = generate_dataset(&p, 50, &grid).unwrap();
        assert_eq!(small.records()[3], big.records()[3]);
        assert_eq!(
            generate_record(&p, &grid, Label::Nlos, 4).unwrap(),
            small.records()[9].cir
        );
    }

    #[test]
    fn seed_changes_output() {
        let grid = TimeGrid::<f64>::default();
        let a = generate_dataset(&GeneratorParams::default(), 3, &grid).unwrap();
        let p = GeneratorParams {
            seed: 7,
            ..Default::default()
        };
        let b = generate_dataset(&p, 3, &grid).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn strong_direct_path_is_first_and_largest() {
        let grid = TimeGrid::<f64>::default();
        let p = GeneratorParams {
            noise_floor_sigma: 0.0,
            los_direct_gain: 1e6,
            ..Default::default()
        };
        let ds = generate_dataset(&p, 200, &grid).unwrap();
        for cir in ds.of_class(Label::Los) {
            let first = first_significant_index(cir, 0.01).unwrap();
            let peak = cir
                .taps()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap()
                .0;
            assert_eq!(first, peak);
        }
    }

    #[test]
    fn nlos_has_no_tap_before_onset_noiseless() {
        let grid = TimeGrid::<f64>::default();
        let p = GeneratorParams {
            noise_floor_sigma: 0.0,
            ..Default::default()
        };
        let ds = generate_dataset(&p, 200, &grid).unwrap();
        let delayed = ds
            .of_class(Label::Nlos)
            .filter(|c| c.taps()[0] == 0.0)
            .count();
        // an exponential excess delay of mean 1 exceeds half a sample almost always
        assert!(delayed > 190, "{delayed}");
    }

    #[test]
    fn invalid_params_rejected() {
        let grid = TimeGrid::<f64>::default();
        let bad = GeneratorParams {
            ray_decay_constant: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            generate_dataset(&bad, 1, &grid),
            Err(Error::Parameter(_))
        ));
        let bad = GeneratorParams {
            noise_floor_sigma: -1.0,
            ..Default::default()
        };
        assert!(generate_dataset(&bad, 1, &grid).is_err());
        assert!(generate_dataset(&GeneratorParams::default(), 0, &grid).is_err());
    }

    #[test]
    fn f32_generation_matches_f64_after_rounding() {
        let p = GeneratorParams::default();
        let a = generate_record(&p, &TimeGrid::<f64>::default(), Label::Los, 1).unwrap();
        let b = generate_record(&p, &TimeGrid::<f32>::default(), Label::Los, 1).unwrap();
        for (x, y) in a.taps().iter().zip(b.taps()) {
            assert_eq!(*x as f32, *y);
        }
    }
}
