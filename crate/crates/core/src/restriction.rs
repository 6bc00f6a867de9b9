//! The extension operator `f ↦ (fμ)^`, lower bounds for its `L^p(μ) → ℓ^q`
//! norm `R*(p→q)`, and the exponent formulas that go with them.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fourier::{check_grid, lq_norm_slice, weighted_norm, GridFn};
use crate::measures::{bohr_set, cube_of, Measure, DEFAULT_BOHR_RATIO};

const L2: Exponent = Exponent::Finite(2.0);

/// How an [`RStarEstimate`] value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateKind {
    /// Closed form, exact.
    Exact,
    /// Ratio for one explicit test function.
    Witness,
    /// Best ratio found by nonlinear power iteration.
    Iterated,
}

impl EstimateKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateKind::Exact => "exact",
            EstimateKind::Witness => "witness",
            EstimateKind::Iterated => "iterated",
        }
    }
}

/// The two sides of the cube-witness ratio, kept for inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeWitnessDetail {
    /// `‖(1_A μ)^‖_q`.
    pub extension_norm: f64,
    /// `‖1_A‖_{L²(μ)}` as computed.
    pub witness_norm: f64,
    /// `√(|A| + |A∩E|) / √(|E| + |A|)`.
    pub witness_norm_formula: f64,
    pub a_size: usize,
    pub e_size: usize,
    pub overlap: usize,
    pub bohr_size: usize,
    /// `min_{ξ∈A*} |(1_A μ)^(ξ)|`.
    pub min_on_bohr: f64,
    /// `(|A|/10 - |A∩E|)/(|E|+|A|)`, the pointwise lower bound on `A*`.
    pub pointwise_lower_bound: f64,
    /// `pointwise_lower_bound · |A*|^{1/q}`, a lower bound for `extension_norm`.
    pub extension_lower_bound: f64,
}

/// A lower bound (or exact value) for `R*(p→q)` with the function attaining it.
#[derive(Clone, Debug)]
pub struct RStarEstimate {
    pub p_exp: Exponent,
    pub q: Exponent,
    pub value: f64,
    pub kind: EstimateKind,
    pub witness: GridFn,
    pub iterations: usize,
    pub converged: bool,
    pub seed: Option<u64>,
    /// Power-iteration value recorded next to a closed form.
    pub cross_check: Option<f64>,
    /// Best-so-far ratio after each iteration of the winning start.
    pub history: Vec<f64>,
    pub cube_detail: Option<CubeWitnessDetail>,
}

/// JSON form of an estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RStarSummary {
    pub p_exp: Exponent,
    pub q: Exponent,
    pub value: f64,
    pub kind: EstimateKind,
    pub iterations: usize,
    pub converged: bool,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cube_detail: Option<CubeWitnessDetail>,
}

impl RStarEstimate {
    pub fn summary(&self) -> RStarSummary {
        RStarSummary {
            p_exp: self.p_exp,
            q: self.q,
            value: self.value,
            kind: self.kind,
            iterations: self.iterations,
            converged: self.converged,
            seed: self.seed,
            cross_check: self.cross_check,
            cube_detail: self.cube_detail.clone(),
        }
    }

    /// Recomputes `‖(fμ)^‖_q / ‖f‖_{L^p(μ)}` from the stored witness.
    pub fn recompute(&self, mu: &Measure) -> Result<f64> {
        extension_ratio(&self.witness, mu, self.p_exp, self.q)
    }
}

/// `(fμ)^(ξ) = Σ_x e(-x·ξ) f(x) μ(x)`.
pub fn extension(f: &GridFn, mu: &Measure) -> Result<GridFn> {
    check_grid(f.p(), f.dim(), mu.p(), mu.dim())?;
    Ok(weighted(f, mu).dft())
}

fn weighted(f: &GridFn, mu: &Measure) -> GridFn {
    let mut g = f.clone();
    for (v, &w) in g.values_mut().iter_mut().zip(mu.weights()) {
        *v *= w;
    }
    g
}

/// `‖(fμ)^‖_{ℓ^q} / ‖f‖_{L^p(μ)}`.
pub fn extension_ratio(f: &GridFn, mu: &Measure, p_exp: Exponent, q: Exponent) -> Result<f64> {
    let denom = weighted_norm(f.values(), mu.weights(), p_exp)?;
    if denom == 0.0 {
        return Err(Error::ZeroInput);
    }
    let ext = extension(f, mu)?;
    Ok(lq_norm_slice(ext.values(), q)? / denom)
}

/// Restriction-side ratio `‖ĝ‖_{L^{p'}(μ)} / ‖g‖_{ℓ^{q'}}`.
pub fn restriction_ratio(g: &GridFn, mu: &Measure, p_exp: Exponent, q: Exponent) -> Result<f64> {
    check_grid(g.p(), g.dim(), mu.p(), mu.dim())?;
    let denom = lq_norm_slice(g.values(), q.dual())?;
    if denom == 0.0 {
        return Err(Error::ZeroInput);
    }
    let hat = g.dft();
    Ok(weighted_norm(hat.values(), mu.weights(), p_exp.dual())? / denom)
}

/// `R*(2→2) = √(p^n · max μ)`, cross-checked by power iteration.
pub fn rstar_2_2_exact(mu: &Measure) -> Result<RStarEstimate> {
    if mu.support_size() == 0 {
        return Err(Error::ZeroInput);
    }
    let (argmax, max_w) = mu
        .weights()
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, w)| if w > best.1 { (i, w) } else { best });
    let value = (mu.len() as f64 * max_w).sqrt();
    let witness = GridFn::delta(mu.field(), mu.dim(), argmax)?;
    let check = power_iterate(mu, L2, &IterOptions { restarts: 0, ..IterOptions::default() })?;
    Ok(RStarEstimate {
        p_exp: L2,
        q: L2,
        value,
        kind: EstimateKind::Exact,
        witness,
        iterations: check.iterations,
        converged: check.converged,
        seed: None,
        cross_check: Some(check.value),
        history: Vec::new(),
        cube_detail: None,
    })
}

/// Knobs for [`rstar_lower_iterate_with`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterOptions {
    pub max_iterations: usize,
    /// Stop once `|v_k - v_{k-1}| / v_k` drops below this.
    pub tolerance: f64,
    /// Random starts in addition to the deterministic ones.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IterOptions {
    fn default() -> Self {
        IterOptions {
            max_iterations: 500,
            tolerance: 1e-10,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Lower bound for `R*(2→q)`, `q > 2`, by nonlinear power iteration.
pub fn rstar_lower_iterate(mu: &Measure, q: Exponent, restarts: usize, seed: u64) -> Result<RStarEstimate> {
    rstar_lower_iterate_with(
        mu,
        q,
        &IterOptions {
            restarts,
            seed,
            ..IterOptions::default()
        },
    )
}

pub fn rstar_lower_iterate_with(mu: &Measure, q: Exponent, opts: &IterOptions) -> Result<RStarEstimate> {
    if let Exponent::Finite(v) = q {
        if v <= 2.0 {
            return Err(Error::InvalidExponent(format!(
                "q = {v}: iteration needs q > 2, use rstar_2_2_exact for q = 2"
            )));
        }
    }
    power_iterate(mu, q, opts)
}

/// Power iteration for `sup ‖(fμ)^‖_q / ‖f‖_{L²(μ)}` with any `q ≥ 2`
/// (`q = 2` is accepted as a validation mode).
///
/// Each step maps `f ↦ g = (fμ)^`, applies the `ℓ^q` duality map
/// `|g|^{q-1} sgn g`, pulls back with the adjoint `h ↦ h^∨` restricted to the
/// support, and renormalizes in `L²(μ)`.
pub fn power_iterate(mu: &Measure, q: Exponent, opts: &IterOptions) -> Result<RStarEstimate> {
    if let Exponent::Finite(v) = q {
        if v < 2.0 {
            return Err(Error::InvalidExponent(format!("q = {v} < 2")));
        }
    }
    let support = mu.support();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }

    let mut starts: Vec<(Vec<Complex64>, Option<u64>)> = Vec::new();
    let mut ones = vec![Complex64::new(0.0, 0.0); mu.len()];
    for &i in &support {
        ones[i] = Complex64::new(1.0, 0.0);
    }
    starts.push((ones, None));
    if let Ok(cube) = cube_of(mu) {
        starts.push((cube.indicator().values().to_vec(), None));
    }
    for r in 0..opts.restarts {
        let s = opts.seed.wrapping_add(r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut v = vec![Complex64::new(0.0, 0.0); mu.len()];
        for &i in &support {
            v[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        starts.push((v, Some(s)));
    }

    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|(start, _)| iterate_from(mu, &support, q, start, opts))
        .collect::<Result<_>>()?;

    // ties go to the earliest start
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one start");
    Ok(RStarEstimate {
        p_exp: L2,
        q,
        value: best.value,
        kind: EstimateKind::Iterated,
        witness: GridFn::from_values(mu.field(), mu.dim(), best.witness)?,
        iterations: best.iterations,
        converged: best.converged,
        seed: Some(opts.seed),
        cross_check: None,
        history: best.history,
        cube_detail: None,
    })
}

struct Run {
    value: f64,
    witness: Vec<Complex64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn iterate_from(
    mu: &Measure,
    support: &[usize],
    q: Exponent,
    start: Vec<Complex64>,
    opts: &IterOptions,
) -> Result<Run> {
    let field = mu.field();
    let n = mu.dim();
    let weights = mu.weights();
    let mut f = GridFn::from_values(field, n, start)?;
    let mut best = Run {
        value: 0.0,
        witness: f.values().to_vec(),
        iterations: 0,
        converged: false,
        history: Vec::with_capacity(64),
    };
    let mut prev: Option<f64> = None;
    for it in 1..=opts.max_iterations {
        let norm = weighted_norm(f.values(), weights, L2)?;
        if norm == 0.0 || !norm.is_finite() {
            break;
        }
        let ext = weighted(&f, mu).dft();
        let value = lq_norm_slice(ext.values(), q)? / norm;
        if value > best.value {
            best.value = value;
            best.witness = f.values().to_vec();
        }
        best.history.push(best.value);
        best.iterations = it;
        if let Some(prev) = prev {
            if (value - prev).abs() <= opts.tolerance * value {
                best.converged = true;
                break;
            }
        }
        prev = Some(value);

        let dual = duality_map(ext, q);
        let pulled = dual.idft();
        let mut next = vec![Complex64::new(0.0, 0.0); mu.len()];
        for &i in support {
            next[i] = pulled.values()[i];
        }
        let next_norm = weighted_norm(&next, weights, L2)?;
        if next_norm == 0.0 {
            break;
        }
        for v in next.iter_mut() {
            *v /= next_norm;
        }
        f = GridFn::from_values(field, n, next)?;
    }
    Ok(best)
}

/// `|g|^{q-1} sgn g`, scaled so the largest entry has modulus one. For
/// `q = ∞` this is the phase at the first maximizer.
fn duality_map(g: GridFn, q: Exponent) -> GridFn {
    let m = g.max_abs();
    let mut g = g;
    if m == 0.0 {
        return g;
    }
    match q {
        Exponent::Infinite => {
            let (arg, _) = g
                .values()
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (i, v)| {
                    let a = v.norm();
                    if a > best.1 {
                        (i, a)
                    } else {
                        best
                    }
                });
            let phase = g.values()[arg] / g.values()[arg].norm();
            for v in g.values_mut() {
                *v = Complex64::new(0.0, 0.0);
            }
            g.values_mut()[arg] = phase;
            g
        }
        Exponent::Finite(q) => {
            for v in g.values_mut() {
                let a = v.norm();
                *v = if a == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    *v / a * (a / m).powf(q - 1.0)
                };
            }
            g
        }
    }
}

/// `R*(2→q) ≥ ‖(1_A μ)^‖_q / ‖1_A‖_{L²(μ)}` for the cube a combined measure
/// was built from.
pub fn rstar_witness_cube(mu: &Measure, q: Exponent) -> Result<RStarEstimate> {
    let cube = cube_of(mu)?;
    let f = cube.indicator().clone();
    let meta = mu.meta();
    let a_size = cube.len();
    let e_size = meta.e_size.unwrap_or(0);
    let overlap = meta.overlap.unwrap_or(0);

    let ext = extension(&f, mu)?;
    let extension_norm = lq_norm_slice(ext.values(), q)?;
    let witness_norm = weighted_norm(f.values(), mu.weights(), L2)?;
    let total = (a_size + e_size) as f64;
    let witness_norm_formula = ((a_size + overlap) as f64).sqrt() / total.sqrt();

    let star = bohr_set(&cube, DEFAULT_BOHR_RATIO)?;
    let min_on_bohr = star
        .members()
        .iter()
        .map(|&i| ext.values()[i].norm())
        .fold(f64::INFINITY, f64::min);
    let pointwise_lower_bound = (a_size as f64 / 10.0 - overlap as f64) / total;
    let extension_lower_bound = pointwise_lower_bound * (star.len() as f64).powf(q.reciprocal());

    Ok(RStarEstimate {
        p_exp: L2,
        q,
        value: extension_norm / witness_norm,
        kind: EstimateKind::Witness,
        witness: f,
        iterations: 0,
        converged: true,
        seed: meta.seed,
        cross_check: None,
        history: Vec::new(),
        cube_detail: Some(CubeWitnessDetail {
            extension_norm,
            witness_norm,
            witness_norm_formula,
            a_size,
            e_size,
            overlap,
            bohr_size: star.len(),
            min_on_bohr,
            pointwise_lower_bound,
            extension_lower_bound,
        }),
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// `q_{n,α,β} = (4n - 4α + 2β)/β`.
pub fn critical_q(n: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok((4.0 * n as f64 - 4.0 * alpha + 2.0 * beta) / beta)
}

/// Growth rate `τ = (4n - 4α + 2β - qβ)/(4q)` of the cube-witness lower bound.
pub fn sharpness_tau(n: usize, alpha: f64, beta: f64, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::InvalidExponent(format!("q must be positive, got {q}")));
    }
    Ok((4.0 * n as f64 - 4.0 * alpha + 2.0 * beta - q * beta) / (4.0 * q))
}

/// Threshold below which `R*(p→q) ≲ 1` must fail for the combined measure.
pub fn necessary_q(p_exp: Exponent, n: usize, alpha: f64, beta: f64) -> Result<Exponent> {
    check_beta(beta)?;
    let core = 2.0 * n as f64 - 2.0 * alpha + beta;
    match p_exp {
        Exponent::Infinite => Ok(Exponent::Finite(core / beta)),
        Exponent::Finite(p) if p == 1.0 => Ok(Exponent::Infinite),
        Exponent::Finite(p) if p > 1.0 => Ok(Exponent::Finite(p * core / ((p - 1.0) * beta))),
        Exponent::Finite(p) => Err(Error::InvalidExponent(format!("p = {p} < 1"))),
    }
}

/// `4n/β`: the sufficient exponent when only Fourier decay is known.
pub fn corollary_q_bound(beta: f64, n: usize) -> Result<f64> {
    check_beta(beta)?;
    Ok(4.0 * n as f64 / beta)
}

/// Exponents attached to one `(n, α, β)` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q_crit: f64,
}

impl ExponentSet {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        Ok(ExponentSet {
            n,
            alpha,
            beta,
            q_crit: critical_q(n, alpha, beta)?,
        })
    }

    pub fn tau(&self, q: f64) -> Result<f64> {
        sharpness_tau(self.n, self.alpha, self.beta, q)
    }
}
