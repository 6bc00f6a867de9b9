use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::{is_prime, MAX_GRID_ENTRIES};
use crate::restriction::{critical_q, sharpness_tau, IterOptions};

/// Smallest predicted growth rate a sharpness sweep accepts by default.
pub const MIN_TAU: f64 = 0.05;
/// Smallest `prime_max / prime_min` a sharpness sweep accepts by default.
pub const MIN_PRIME_SPAN: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Sharpness,
    Boundedness,
    Salem,
    Diagnose,
    Rstar,
    TransformSelftest,
}

/// Which measure a sweep is run on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureChoice {
    /// `(1_E + 1_A)/(|E| + |A|)`.
    #[default]
    Combined,
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q_list: Vec<Exponent>,
    pub prime_min: u64,
    pub prime_max: u64,
    pub prime_count: usize,
    pub seeds: Vec<u64>,
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Lift `α' = α + ε`, `β' = α` applied when `α = β`.
    pub epsilon: f64,
    pub measure: MeasureChoice,
    /// Also run the power iteration in sharpness sweeps.
    pub iterate: bool,
    /// Skip the `τ ≥ 0.05` and prime-span gates of sharpness sweeps.
    pub allow_weak_signal: bool,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let iter = IterOptions::default();
        ExperimentConfig {
            mode: Mode::Sharpness,
            n: 1,
            alpha: 0.6,
            beta: 0.4,
            q_list: vec![Exponent::Finite(3.0)],
            prime_min: 200,
            prime_max: 5000,
            prime_count: 8,
            seeds: vec![1, 2, 3],
            restarts: iter.restarts,
            max_iterations: iter.max_iterations,
            tolerance: iter.tolerance,
            epsilon: 0.05,
            measure: MeasureChoice::Combined,
            iterate: false,
            allow_weak_signal: false,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// `(α, β)` actually used to build the measure: the `α = β` case is
    /// lifted to `(α + ε, α)`.
    pub fn construction_params(&self) -> (f64, f64) {
        if self.alpha == self.beta {
            (self.alpha + self.epsilon, self.alpha)
        } else {
            (self.alpha, self.beta)
        }
    }

    pub fn iter_options(&self, seed: u64) -> IterOptions {
        IterOptions {
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            restarts: self.restarts,
            seed,
        }
    }

    fn validate_common(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.prime_min < 3 {
            return Err(Error::Config(format!("prime_min must be >= 3, got {}", self.prime_min)));
        }
        if self.prime_min > self.prime_max {
            return Err(Error::Config(format!(
                "prime_min {} exceeds prime_max {}",
                self.prime_min, self.prime_max
            )));
        }
        if self.prime_count == 0 {
            return Err(Error::Config("prime_count must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut top = self.prime_max;
        while top >= self.prime_min && !is_prime(top) {
            top -= 1;
        }
        let entries = (top as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX);
        if entries > MAX_GRID_ENTRIES as u128 {
            return Err(Error::Config(format!(
                "grid {top}^{} exceeds the cap of {MAX_GRID_ENTRIES} entries; lower prime_max or n",
                self.n
            )));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::Config("tolerance and max_iterations must be positive".into()));
        }
        Ok(())
    }

    fn validate_construction(&self) -> Result<(f64, f64)> {
        let (a, b) = self.construction_params();
        let n = self.n as f64;
        if !(self.beta > 0.0 && self.beta <= self.alpha && self.alpha < n) {
            return Err(Error::Config(format!(
                "need 0 < beta <= alpha < n, got alpha = {}, beta = {}, n = {}",
                self.alpha, self.beta, self.n
            )));
        }
        if !(a < n) {
            return Err(Error::Config(format!(
                "lifted alpha {a} = alpha + epsilon must stay below n = {}; lower epsilon",
                self.n
            )));
        }
        if self.alpha == self.beta && !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive when alpha = beta".into()));
        }
        Ok((a, b))
    }

    fn finite_qs(&self) -> Result<Vec<f64>> {
        if self.q_list.is_empty() {
            return Err(Error::Config("q_list is empty".into()));
        }
        self.q_list
            .iter()
            .map(|q| {
                q.finite()
                    .ok_or_else(|| Error::Config("q = inf is not a scaling exponent".into()))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        match self.mode {
            Mode::Sharpness => {
                let (a, b) = self.validate_construction()?;
                if self.measure != MeasureChoice::Combined {
                    return Err(Error::Config("sharpness sweeps need the combined measure".into()));
                }
                let qc = critical_q(self.n, a, b)?;
                for q in self.finite_qs()? {
                    if q > qc {
                        return Err(Error::Config(format!(
                            "q = {q} exceeds the critical exponent {qc}; use the boundedness mode"
                        )));
                    }
                    let tau = sharpness_tau(self.n, a, b, q)?;
                    if tau < MIN_TAU && !self.allow_weak_signal {
                        return Err(Error::Config(format!(
                            "predicted tau = {tau:.4} < {MIN_TAU}: the slope would be lost in log factors; \
                             lower q or pass --allow-weak-signal"
                        )));
                    }
                }
                let span = self.prime_max as f64 / self.prime_min as f64;
                if span < MIN_PRIME_SPAN && !self.allow_weak_signal {
                    return Err(Error::Config(format!(
                        "primes span only {span:.2}x (< {MIN_PRIME_SPAN}x); widen the range or pass --allow-weak-signal"
                    )));
                }
                if self.prime_count < 2 {
                    return Err(Error::Config("a slope needs at least 2 primes".into()));
                }
            }
            Mode::Boundedness => {
                let qs = self.finite_qs()?;
                if self.measure == MeasureChoice::Combined {
                    let (a, b) = self.validate_construction()?;
                    let qc = critical_q(self.n, a, b)?;
                    if let Some(q) = qs.iter().find(|&&q| q < qc) {
                        return Err(Error::Config(format!(
                            "q = {q} is below the critical exponent {qc}; use the sharpness mode"
                        )));
                    }
                }
                if let Some(q) = qs.iter().find(|&&q| q <= 2.0) {
                    return Err(Error::Config(format!("boundedness needs q > 2, got {q}")));
                }
                if self.prime_count < 2 {
                    return Err(Error::Config("a slope needs at least 2 primes".into()));
                }
            }
            Mode::Salem => {
                if !(self.alpha > 0.0 && self.alpha <= self.n as f64) {
                    return Err(Error::Config(format!("salem needs 0 < alpha <= n, got {}", self.alpha)));
                }
            }
            Mode::Diagnose | Mode::Rstar => {
                self.validate_construction()?;
            }
            Mode::TransformSelftest => {}
        }
        Ok(())
    }
}
