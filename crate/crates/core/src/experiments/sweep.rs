use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::{is_prime, Field};
use crate::measures::{
    bohr_box_count, bohr_set, combined_measure, cube_set, max_offzero_indicator_coeff, random_set,
    spectral_report, uniform_measure, Measure, SetMeta, DEFAULT_BOHR_RATIO,
};
use crate::restriction::{
    critical_q, rstar_lower_iterate_with, rstar_witness_cube, sharpness_tau, EstimateKind,
};
use crate::stein_tomas::effective_critical_q;

use super::config::{ExperimentConfig, MeasureChoice, Mode};

/// Constant in the random-set spectral check `max |1̂_E| ≤ C √|E| √(ln p^n)`.
pub const SALEM_CONSTANT: f64 = 4.0;

/// `count` primes spread geometrically over `[lo, hi]`: the first prime at or
/// above each grid point `lo·(hi/lo)^{i/(count-1)}`, falling back to the
/// largest prime `≤ hi` past the end, deduplicated and sorted.
pub fn primes_in_range(lo: u64, hi: u64, count: usize) -> Result<Vec<u64>> {
    if lo < 3 || lo > hi || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 3 <= lo <= hi and count >= 1, got lo = {lo}, hi = {hi}, count = {count}"
        )));
    }
    let last_prime = (lo..=hi).rev().find(|&m| is_prime(m));
    let Some(last_prime) = last_prime else {
        return Err(Error::NotEnoughPrimes { lo, hi, wanted: count, found: 0 });
    };
    let ratio = hi as f64 / lo as f64;
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let target = if i == 0 {
                lo
            } else if i + 1 == count {
                hi
            } else {
                let g = lo as f64 * ratio.powf(i as f64 / (count - 1) as f64);
                (g.ceil() as u64).clamp(lo, hi)
            };
            let mut m = target;
            while m <= hi && !is_prime(m) {
                m += 1;
            }
            if m > hi {
                last_prime
            } else {
                m
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    if out.len() < count {
        return Err(Error::NotEnoughPrimes {
            lo,
            hi,
            wanted: count,
            found: out.len(),
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares fit of `ln value = slope · ln p + intercept`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter("a fit needs at least 2 points".into()));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidParameter(format!("nonpositive point ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if syy <= f64::EPSILON * m {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Seed for the random set at prime `p`, derived from the user seed so that
/// every `(prime, seed)` pair draws independently of scheduling.
pub fn derive_seed(seed: u64, p: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(seed ^ splitmix(p))
}

/// One prime of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: u64,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q: Exponent,
    pub a_size: usize,
    pub e_size: usize,
    pub ae_overlap: usize,
    pub bohr_size: usize,
    pub alpha_eff: f64,
    pub beta_eff: Exponent,
    pub rstar_lb: f64,
    pub witness_kind: EstimateKind,
    pub seed: u64,
    pub derived_seed: u64,
    pub bohr_box_count: usize,
    pub witness_value: Option<f64>,
    pub iterated_value: Option<f64>,
    pub iterated_converged: Option<bool>,
    /// `q_{n,α_eff,β_eff}` at this prime.
    pub effective_q_crit: f64,
    pub overlap_warning: bool,
}

/// Rows for one `(q, seed)` plus the fitted slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub q: f64,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `τ` at the construction exponents.
    pub tau_predicted: f64,
    /// Slope the theory predicts: `τ` for sharpness sweeps, 0 for boundedness.
    pub slope_predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub mode: Mode,
    pub primes: Vec<u64>,
    pub results: Vec<ScalingResult>,
}

struct Built {
    mu: Measure,
    a_size: usize,
    e_size: usize,
    overlap: usize,
    bohr_size: usize,
    box_count: usize,
    derived_seed: u64,
}

fn build(config: &ExperimentConfig, p: u64, seed: u64) -> Result<Built> {
    let field = Field::new(p)?;
    let n = config.n;
    let derived_seed = derive_seed(seed, p);
    match config.measure {
        MeasureChoice::Uniform => Ok(Built {
            mu: uniform_measure(&field, n)?,
            a_size: 0,
            e_size: 0,
            overlap: 0,
            bohr_size: 0,
            box_count: 0,
            derived_seed,
        }),
        MeasureChoice::Combined => {
            let (alpha, beta) = config.construction_params();
            let a = cube_set(&field, n, alpha, beta)?;
            let e = random_set(&field, n, alpha, derived_seed)?;
            let mu = combined_measure(&a, &e)?;
            let SetMeta::Cube { side, .. } = *a.meta() else {
                unreachable!("cube_set records cube metadata")
            };
            let star = bohr_set(&a, DEFAULT_BOHR_RATIO)?;
            let box_count = bohr_box_count(p, n, side);
            if star.len() < box_count {
                return Err(Error::Invariant(format!(
                    "p = {p}: |A*| = {} is below the box count {box_count}",
                    star.len()
                )));
            }
            Ok(Built {
                overlap: mu.meta().overlap.unwrap_or(0),
                mu,
                a_size: a.len(),
                e_size: e.len(),
                bohr_size: star.len(),
                box_count,
                derived_seed,
            })
        }
    }
}

fn sweep(config: &ExperimentConfig, use_iteration: bool, witness_primary: bool) -> Result<SweepReport> {
    let primes = primes_in_range(config.prime_min, config.prime_max, config.prime_count)?;
    let qs: Vec<f64> = config
        .q_list
        .iter()
        .map(|q| q.finite().ok_or_else(|| Error::Config("q = inf in a sweep".into())))
        .collect::<Result<_>>()?;
    let (alpha, beta) = match config.measure {
        MeasureChoice::Combined => config.construction_params(),
        MeasureChoice::Uniform => (config.n as f64, config.n as f64),
    };

    let jobs: Vec<(u64, u64)> = config
        .seeds
        .iter()
        .flat_map(|&s| primes.iter().map(move |&p| (s, p)))
        .collect();

    // rows[job][q]
    let per_job: Vec<Vec<SweepRow>> = jobs
        .par_iter()
        .map(|&(seed, p)| -> Result<Vec<SweepRow>> {
            let built = build(config, p, seed)?;
            let report = spectral_report(&built.mu)?;
            let q_eff = effective_critical_q(config.n, &report)?;
            qs.iter()
                .map(|&q| {
                    let q_exp = Exponent::Finite(q);
                    let witness = if config.measure == MeasureChoice::Combined {
                        let w = rstar_witness_cube(&built.mu, q_exp)?;
                        if !(w.value > 0.0) {
                            return Err(Error::Invariant(format!(
                                "p = {p}: cube witness ratio {} is not positive",
                                w.value
                            )));
                        }
                        Some(w.value)
                    } else {
                        None
                    };
                    let iterated = if use_iteration {
                        Some(rstar_lower_iterate_with(
                            &built.mu,
                            q_exp,
                            &config.iter_options(built.derived_seed),
                        )?)
                    } else {
                        None
                    };
                    let (rstar_lb, witness_kind) = match (witness_primary, witness, &iterated) {
                        (true, Some(w), _) => (w, EstimateKind::Witness),
                        (_, _, Some(it)) => (it.value, EstimateKind::Iterated),
                        (_, Some(w), None) => (w, EstimateKind::Witness),
                        (_, None, None) => unreachable!("sweeps compute at least one estimate"),
                    };
                    Ok(SweepRow {
                        p,
                        n: config.n,
                        alpha,
                        beta,
                        q: q_exp,
                        a_size: built.a_size,
                        e_size: built.e_size,
                        ae_overlap: built.overlap,
                        bohr_size: built.bohr_size,
                        alpha_eff: report.alpha_eff,
                        beta_eff: report.beta_eff,
                        rstar_lb,
                        witness_kind,
                        seed,
                        derived_seed: built.derived_seed,
                        bohr_box_count: built.box_count,
                        witness_value: witness,
                        iterated_value: iterated.as_ref().map(|it| it.value),
                        iterated_converged: iterated.as_ref().map(|it| it.converged),
                        effective_q_crit: q_eff,
                        overlap_warning: built.mu.meta().overlap_warning,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut results = Vec::new();
    for (qi, &q) in qs.iter().enumerate() {
        for &seed in &config.seeds {
            let mut rows: Vec<SweepRow> = jobs
                .iter()
                .zip(&per_job)
                .filter(|((s, _), _)| *s == seed)
                .map(|(_, rows)| rows[qi].clone())
                .collect();
            rows.sort_by_key(|r| r.p);
            let fit = fit_loglog_slope(
                &rows.iter().map(|r| (r.p as f64, r.rstar_lb)).collect::<Vec<_>>(),
            )?;
            let tau = sharpness_tau(config.n, alpha, beta, q)?;
            results.push(ScalingResult {
                q,
                seed,
                rows,
                slope: fit.slope,
                intercept: fit.intercept,
                r_squared: fit.r_squared,
                tau_predicted: tau,
                slope_predicted: if witness_primary { tau } else { 0.0 },
            });
        }
    }
    Ok(SweepReport {
        mode: config.mode,
        primes,
        results,
    })
}

/// Builds the combined measure at each prime and fits the growth of the
/// cube-witness lower bound for `R*(2→q)` against `τ`.
pub fn run_sharpness(config: &ExperimentConfig) -> Result<SweepReport> {
    let mut config = config.clone();
    config.mode = Mode::Sharpness;
    config.validate()?;
    sweep(&config, config.iterate, true)
}

/// Same pipeline at `q ≥ q_{n,α,β}`, recording power-iteration lower bounds;
/// a bounded operator shows up as a slope near zero.
pub fn run_boundedness(config: &ExperimentConfig) -> Result<SweepReport> {
    let mut config = config.clone();
    config.mode = Mode::Boundedness;
    config.validate()?;
    sweep(&config, true, false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SalemRow {
    pub p: u64,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub e_size: usize,
    pub max_offzero: f64,
    /// `C √|E| √(ln p^n)`.
    pub bound: f64,
    pub pass: bool,
}

/// Spectral flatness of one random set.
pub fn salem_check(field: &Field, n: usize, alpha: f64, seed: u64) -> Result<SalemRow> {
    let e = random_set(field, n, alpha, seed)?;
    let max_offzero = max_offzero_indicator_coeff(&e);
    let ln_grid = n as f64 * (field.p() as f64).ln();
    let bound = SALEM_CONSTANT * (e.len().max(1) as f64).sqrt() * ln_grid.sqrt();
    Ok(SalemRow {
        p: field.p(),
        n,
        alpha,
        seed,
        e_size: e.len(),
        max_offzero,
        bound,
        pass: max_offzero <= bound,
    })
}

/// Salem checks over the configured primes and seeds.
pub fn run_salem(config: &ExperimentConfig) -> Result<Vec<SalemRow>> {
    let mut config = config.clone();
    config.mode = Mode::Salem;
    config.validate()?;
    let primes = primes_in_range(config.prime_min, config.prime_max, config.prime_count)?;
    let jobs: Vec<(u64, u64)> = primes
        .iter()
        .flat_map(|&p| config.seeds.iter().map(move |&s| (p, s)))
        .collect();
    jobs.par_iter()
        .map(|&(p, seed)| salem_check(&Field::new(p)?, config.n, config.alpha, seed))
        .collect()
}

/// Critical exponent at the construction parameters of a config.
pub fn config_critical_q(config: &ExperimentConfig) -> Result<f64> {
    let (a, b) = config.construction_params();
    critical_q(config.n, a, b)
}
