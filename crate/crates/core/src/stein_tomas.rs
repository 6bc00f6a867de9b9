//! Executable form of the `L²` extension argument: the kernel
//! `K = μ^∨ - δ_0`, its two endpoint bounds, and the interpolated
//! convolution inequality `‖f∗K‖_q ≤ C ‖f‖_{q'}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fourier::{convolve, lq_norm, GridFn};
use crate::measures::{Measure, SpectralReport};
use crate::restriction::critical_q;

/// `K = μ^∨ - δ_0`.
pub fn kernel_k(mu: &Measure) -> Result<GridFn> {
    let mut k = mu.to_grid().idft();
    k.values_mut()[0] -= Complex64::new(1.0, 0.0);
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    /// `max_x |K(x)|`, the `ℓ¹ → ℓ^∞` norm of `f ↦ f∗K`.
    pub sup_k: f64,
    /// `max_ξ |K̂(ξ)|`, the `ℓ² → ℓ²` norm of `f ↦ f∗K`.
    pub sup_k_hat: f64,
    /// `sup_k · p^{β_eff/2}`; zero when `K` vanishes.
    pub c_infty: f64,
    /// `sup_k_hat · p^{α_eff - n}`.
    pub c_two: f64,
}

pub fn kernel_bounds(mu: &Measure, report: &SpectralReport) -> Result<KernelReport> {
    let k = kernel_k(mu)?;
    let k_hat = k.dft();
    let sup_k = k.max_abs();
    let sup_k_hat = k_hat.max_abs();
    let p = mu.p() as f64;
    let c_infty = match report.beta_eff {
        Exponent::Finite(b) => sup_k * p.powf(b / 2.0),
        // flat spectrum: K is zero up to roundoff
        Exponent::Infinite => 0.0,
    };
    let c_two = sup_k_hat * p.powf(report.alpha_eff - mu.dim() as f64);
    Ok(KernelReport {
        sup_k,
        sup_k_hat,
        c_infty,
        c_two,
    })
}

/// `q_{n,α,β}` at the measured exponents; tends to 2 as `β → ∞`.
pub fn effective_critical_q(n: usize, report: &SpectralReport) -> Result<f64> {
    match report.beta_eff {
        Exponent::Infinite => Ok(2.0),
        Exponent::Finite(b) if b > 0.0 => critical_q(n, report.alpha_eff, b),
        Exponent::Finite(_) => Ok(f64::INFINITY),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub q: f64,
    pub trials: usize,
    pub seed: u64,
    /// Interpolation parameter with `1/q = (1-θ)/2`.
    pub theta: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// `‖K‖_∞`.
    pub c_infty_endpoint: f64,
    /// `max |K̂|`, the exact `ℓ²` operator norm.
    pub c_two_endpoint: f64,
    /// Largest `‖f∗K‖_2/‖f‖_2` seen over the trials.
    pub c_two_empirical: f64,
    /// `C_∞^θ · C_2^{1-θ}`.
    pub ceiling: f64,
    /// Worst relative error of `‖f∗K‖₂² = p^{-n} Σ |f̂|²|K̂|²` over the trials.
    pub max_plancherel_error: f64,
    /// Largest `‖f∗K‖_∞ / (‖K‖_∞ ‖f‖_1)`, at most one.
    pub max_endpoint_ratio: f64,
    pub ratios: Vec<f64>,
}

/// Random-trial probe of `‖f∗K‖_q / ‖f‖_{q'}` against the Riesz–Thorin
/// ceiling built from the two endpoint constants.
pub fn convolution_inequality_probe(
    mu: &Measure,
    report: &SpectralReport,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<ProbeStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let q_crit = effective_critical_q(mu.dim(), report)?;
    if !(q >= q_crit) {
        return Err(Error::InvalidExponent(format!(
            "q = {q} is below the effective critical exponent {q_crit}"
        )));
    }
    let k = kernel_k(mu)?;
    let k_hat = k.dft();
    let c_inf = k.max_abs();
    let c_two = k_hat.max_abs();
    let theta = 1.0 - 2.0 / q;
    let ceiling = c_inf.powf(theta) * c_two.powf(1.0 - theta);
    let q_exp = Exponent::Finite(q);
    let q_dual = q_exp.dual();
    let inv_len = 1.0 / mu.len() as f64;

    struct Trial {
        ratio: f64,
        ratio_two: f64,
        plancherel_err: f64,
        endpoint: f64,
    }

    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Trial> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
            let f = GridFn::from_values(
                mu.field(),
                mu.dim(),
                (0..mu.len())
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )?;
            let conv = convolve(&f, &k)?;
            let ratio = lq_norm(&conv, q_exp)? / lq_norm(&f, q_dual)?;
            let l2 = lq_norm(&conv, Exponent::Finite(2.0))?;
            let ratio_two = l2 / lq_norm(&f, Exponent::Finite(2.0))?;
            let f_hat = f.dft();
            let spectral: f64 = f_hat
                .values()
                .iter()
                .zip(k_hat.values())
                .map(|(a, b)| a.norm_sqr() * b.norm_sqr())
                .sum::<f64>()
                * inv_len;
            let lhs = l2 * l2;
            let plancherel_err = if spectral == 0.0 {
                lhs
            } else {
                (lhs - spectral).abs() / spectral
            };
            let bound = c_inf * lq_norm(&f, Exponent::Finite(1.0))?;
            let endpoint = if bound == 0.0 {
                0.0
            } else {
                lq_norm(&conv, Exponent::Infinite)? / bound
            };
            Ok(Trial {
                ratio,
                ratio_two,
                plancherel_err,
                endpoint,
            })
        })
        .collect::<Result<_>>()?;

    let ratios: Vec<f64> = results.iter().map(|t| t.ratio).collect();
    Ok(ProbeStats {
        q,
        trials,
        seed,
        theta,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        mean_ratio: ratios.iter().sum::<f64>() / trials as f64,
        c_infty_endpoint: c_inf,
        c_two_endpoint: c_two,
        c_two_empirical: results.iter().map(|t| t.ratio_two).fold(0.0, f64::max),
        ceiling,
        max_plancherel_error: results.iter().map(|t| t.plancherel_err).fold(0.0, f64::max),
        max_endpoint_ratio: results.iter().map(|t| t.endpoint).fold(0.0, f64::max),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{negate_index, Field};
    use crate::measures::{atom_measure, combined_measure, cube_set, random_set, spectral_report, uniform_measure};

    fn combined(p: u64) -> Measure {
        let f = Field::new(p).unwrap();
        let a = cube_set(&f, 1, 0.6, 0.4).unwrap();
        let e = random_set(&f, 1, 0.6, 2024).unwrap();
        combined_measure(&a, &e).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let f = Field::new(7).unwrap();
        let k = kernel_k(&uniform_measure(&f, 2).unwrap()).unwrap();
        assert!(k.max_abs() < 1e-14);
        let k = kernel_k(&atom_measure(&f, 2, 0).unwrap()).unwrap();
        assert!(k.values()[0].norm() < 1e-15);
        assert!(k.values()[1..].iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn kernel_matches_spectrum() {
        let mu = combined(211);
        let k = kernel_k(&mu).unwrap();
        assert!(k.values()[0].norm() < 1e-12);
        let hat = mu.fourier();
        for x in 1..mu.len() {
            let want = hat.values()[negate_index(x, 1, 211)].norm();
            assert!((k.values()[x].norm() - want).abs() < 1e-12);
        }
        let report = spectral_report(&mu).unwrap();
        assert!((k.max_abs() - report.max_offzero_coeff).abs() < 1e-12);
    }

    #[test]
    fn kernel_bound_examples() {
        let f = Field::new(11).unwrap();
        let uni = uniform_measure(&f, 1).unwrap();
        let kb = kernel_bounds(&uni, &spectral_report(&uni).unwrap()).unwrap();
        assert!(kb.sup_k < 1e-14);
        assert_eq!(kb.c_infty, 0.0);

        let atom = atom_measure(&f, 2, 0).unwrap();
        let kb = kernel_bounds(&atom, &spectral_report(&atom).unwrap()).unwrap();
        assert!((kb.sup_k_hat - 120.0).abs() < 1e-10);

        let mu = combined(401);
        let kb = kernel_bounds(&mu, &spectral_report(&mu).unwrap()).unwrap();
        assert!(kb.c_infty <= 1.01 && kb.c_two <= 1.01, "{kb:?}");
    }

    #[test]
    fn probe_on_uniform_is_zero() {
        let f = Field::new(13).unwrap();
        let uni = uniform_measure(&f, 1).unwrap();
        let r = spectral_report(&uni).unwrap();
        let stats = convolution_inequality_probe(&uni, &r, 4.0, 5, 0).unwrap();
        assert!(stats.max_ratio < 1e-13);
    }

    #[test]
    fn probe_rejects_subcritical_q() {
        let mu = combined(401);
        let r = spectral_report(&mu).unwrap();
        let qc = effective_critical_q(1, &r).unwrap();
        assert!(convolution_inequality_probe(&mu, &r, qc * 0.9, 3, 0).is_err());
        assert!(convolution_inequality_probe(&mu, &r, qc.ceil(), 0, 0).is_err());
    }
}
