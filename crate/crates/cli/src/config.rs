//! Run configuration: defaults, `key = value` files, and flag overrides.

use std::path::Path;

use uwb_nlos::density::{DEFAULT_BINS, DEFAULT_FLOOR};
use uwb_nlos::{GeneratorParams, TimeGrid64, DEFAULT_REL_EPS};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub generator: GeneratorParams,
    pub grid: TimeGrid64,
    pub n_per_class: usize,
    pub bins: usize,
    pub floor: f64,
    pub rel_eps: f64,
    pub train_fraction: f64,
    pub seed: u64,
    /// Fit and report on the full dataset instead of a stratified split.
    pub in_sample: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let generator = GeneratorParams::default();
        Self {
            seed: generator.seed,
            generator,
            grid: TimeGrid64::default(),
            n_per_class: 1000,
            bins: DEFAULT_BINS,
            floor: DEFAULT_FLOOR,
            rel_eps: DEFAULT_REL_EPS,
            train_fraction: 0.5,
            in_sample: true,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config key {key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let g = &mut self.generator;
        match key {
            "cluster_arrival_rate" => g.cluster_arrival_rate = parse(key, value)?,
            "ray_arrival_rate" => g.ray_arrival_rate = parse(key, value)?,
            "cluster_decay_constant" => g.cluster_decay_constant = parse(key, value)?,
            "ray_decay_constant" => g.ray_decay_constant = parse(key, value)?,
            "los_direct_gain" => g.los_direct_gain = parse(key, value)?,
            "nlos_first_path_delay_mean" => g.nlos_first_path_delay_mean = parse(key, value)?,
            "noise_floor_sigma" => g.noise_floor_sigma = parse(key, value)?,
            "t_start" => self.grid.t_start = parse(key, value)?,
            "dt" => self.grid.dt = parse(key, value)?,
            "n" => self.grid.n = parse(key, value)?,
            "n_per_class" => self.n_per_class = parse(key, value)?,
            "bins" => self.bins = parse(key, value)?,
            "floor" => self.floor = parse(key, value)?,
            "rel_eps" => self.rel_eps = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "in_sample" => self.in_sample = parse(key, value)?,
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", i + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Numeric constraints of the owning modules, checked before any side effect.
    pub fn validate(&self) -> Result<(), CliError> {
        let params = self.generator_params();
        params.validate()?;
        TimeGrid64::new(self.grid.t_start, self.grid.dt, self.grid.n)?;
        if self.n_per_class == 0 {
            return Err(uwb_nlos::Error::Parameter("n_per_class must be at least 1".into()).into());
        }
        if self.bins < 2 {
            return Err(uwb_nlos::Error::Parameter("bins must be at least 2".into()).into());
        }
        if !(self.floor.is_finite() && self.floor > 0.0) {
            return Err(uwb_nlos::Error::Parameter("floor must be positive".into()).into());
        }
        if !(0.0..1.0).contains(&self.rel_eps) {
            return Err(uwb_nlos::Error::Parameter("rel_eps must lie in [0, 1)".into()).into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(
                uwb_nlos::Error::Parameter("train_fraction must lie in (0, 1)".into()).into(),
            );
        }
        Ok(())
    }

    /// Generator parameters with the run seed.
    pub fn generator_params(&self) -> GeneratorParams {
        GeneratorParams {
            seed: self.seed,
            ..self.generator
        }
    }
}
