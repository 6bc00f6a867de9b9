//! Randomized checks of the transform identities on a single grid:
//! Plancherel, inversion, the convolution theorem, symmetry, and agreement of
//! every transform method with the direct double sum.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::Field;
use crate::fourier::{convolve, convolve_naive, dft_with, idft_with, GridFn, TransformMethod};

/// Largest grid on which methods are compared against the double sum.
pub const NAIVE_COMPARE_MAX: usize = 10_000;

/// Budget (in `len²` units) for direct convolution sums per grid.
const NAIVE_CONV_BUDGET: usize = 200_000_000;

/// Worst relative errors seen over all trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub p: u64,
    pub n: usize,
    pub trials: usize,
    pub plancherel: f64,
    pub inversion: f64,
    pub convolution: f64,
    pub symmetry: f64,
    /// Trials whose convolution came from the direct sum rather than the transform.
    pub direct_convolution_trials: usize,
    /// Worst relative `ℓ²` gap between any method and the double sum, when compared.
    pub method_agreement: Option<f64>,
}

impl IdentityReport {
    pub fn max_error(&self) -> f64 {
        [self.plancherel, self.inversion, self.convolution, self.symmetry]
            .into_iter()
            .chain(self.method_agreement)
            .fold(0.0, f64::max)
    }
}

pub fn random_grid(field: &Field, n: usize, rng: &mut ChaCha8Rng) -> Result<GridFn> {
    let len = field.grid_len(n)?;
    GridFn::from_values(
        field,
        n,
        (0..len)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    )
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let scale = l2(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn rel_sup(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|y| y.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn fourier_identities(p: u64, n: usize, trials: usize, seed: u64) -> Result<IdentityReport> {
    let field = Field::new(p)?;
    let len = field.grid_len(n)?;
    let scale = len as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direct_conv = (NAIVE_CONV_BUDGET / (len * len)).clamp(1, trials.max(1));
    let mut rep = IdentityReport {
        p,
        n,
        trials,
        plancherel: 0.0,
        inversion: 0.0,
        convolution: 0.0,
        symmetry: 0.0,
        direct_convolution_trials: 0,
        method_agreement: None,
    };
    for t in 0..trials {
        let f = random_grid(&field, n, &mut rng)?;
        let g = random_grid(&field, n, &mut rng)?;
        let f_hat = f.dft();
        let g_hat = g.dft();

        let lhs: f64 = f_hat.values().iter().map(|v| v.norm_sqr()).sum();
        let rhs = scale * f.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
        rep.plancherel = rep.plancherel.max((lhs - rhs).abs() / rhs);

        let target: Vec<Complex64> = f.values().iter().map(|v| v * scale).collect();
        rep.inversion = rep
            .inversion
            .max(rel_l2(f_hat.idft().values(), &target))
            .max(rel_l2(f.idft().dft().values(), &target));

        let conv = if t < direct_conv {
            rep.direct_convolution_trials += 1;
            convolve_naive(&f, &g)?
        } else {
            convolve(&f, &g)?
        };
        let product = f_hat.mul(&g_hat)?;
        rep.convolution = rep.convolution.max(rel_sup(conv.dft().values(), product.values()));

        let a: Complex64 = f_hat.values().iter().zip(g.values()).map(|(x, y)| x * y).sum();
        let b: Complex64 = f.values().iter().zip(g_hat.values()).map(|(x, y)| x * y).sum();
        let sym_scale: f64 = f_hat
            .values()
            .iter()
            .zip(g.values())
            .map(|(x, y)| x.norm() * y.norm())
            .sum();
        rep.symmetry = rep.symmetry.max((a - b).norm() / sym_scale);
    }
    if len <= NAIVE_COMPARE_MAX {
        rep.method_agreement = Some(method_agreement(&field, n, 2, seed ^ 0xA5A5)?);
    }
    Ok(rep)
}

/// Worst relative `ℓ²` distance between the sweep methods and the double sum,
/// forward and inverse, over `trials` random inputs.
pub fn method_agreement(field: &Field, n: usize, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_grid(field, n, &mut rng)?;
        let fwd = dft_with(&f, TransformMethod::Naive);
        let inv = idft_with(&f, TransformMethod::Naive);
        for m in [TransformMethod::Direct, TransformMethod::Fft, TransformMethod::Auto] {
            worst = worst
                .max(rel_l2(dft_with(&f, m).values(), fwd.values()))
                .max(rel_l2(idft_with(&f, m).values(), inv.values()));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_on_small_grids() {
        for (p, n) in [(3u64, 1usize), (5, 2), (7, 2), (13, 1)] {
            let rep = fourier_identities(p, n, 10, 1).unwrap();
            assert!(rep.max_error() < 1e-10, "{rep:?}");
            assert!(rep.method_agreement.is_some());
        }
    }
}
