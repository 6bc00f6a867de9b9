//! Measures and point sets on `F_p^n`: the uniform measure, the cube
//! `A = {1..N}^n`, its Bohr neighbourhood, Bernoulli random sets, the
//! combined measure `(1_E + 1_A)/(|E| + |A|)` and the discrete paraboloid.

use std::io::{BufRead, Write};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::{index_to_point, point_to_index, Field, Point};
use crate::fourier::{check_grid, GridFn};

/// Name of the generator used by [`random_set`], recorded in metadata.
pub const GENERATOR_NAME: &str = "ChaCha8Rng/seed_from_u64 (rand_chacha 0.3)";

/// Default Bohr threshold `|1̂_A(ξ)| ≥ |A|/10`.
pub const DEFAULT_BOHR_RATIO: f64 = 0.1;

/// Overlap fraction `|A∩E|/|A|` above which the combined measure is flagged.
pub const OVERLAP_WARN_FRACTION: f64 = 0.01;

/// Off-zero Fourier coefficients at or below this modulus count as zero
/// when reporting the decay exponent.
pub const SPECTRUM_ZERO_TOL: f64 = 1e-12;

const MAX_EMPTY_RETRIES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Uniform,
    Atom,
    Indicator,
    Combined,
    Custom,
}

/// Construction record carried by a [`Measure`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureMeta {
    pub kind: MeasureKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub beta: Option<f64>,
    /// Side length `N` of the cube `{1..N}^n`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cube_side: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Seed actually used after retries on empty draws.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub effective_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub e_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub overlap: Option<usize>,
    #[serde(default)]
    pub overlap_warning: bool,
}

impl MeasureMeta {
    pub fn of_kind(kind: MeasureKind) -> Self {
        MeasureMeta {
            kind,
            alpha: None,
            beta: None,
            cube_side: None,
            delta: None,
            seed: None,
            effective_seed: None,
            generator: None,
            a_size: None,
            e_size: None,
            overlap: None,
            overlap_warning: false,
        }
    }
}

/// A nonnegative function on `F_p^n`.
#[derive(Clone, Debug)]
pub struct Measure {
    field: Field,
    dim: usize,
    weights: Vec<f64>,
    support_size: usize,
    total_mass: f64,
    meta: MeasureMeta,
}

impl Measure {
    pub fn from_weights(field: &Field, dim: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_meta(field, dim, weights, MeasureMeta::of_kind(MeasureKind::Custom))
    }

    pub fn with_meta(field: &Field, dim: usize, weights: Vec<f64>, meta: MeasureMeta) -> Result<Self> {
        let len = field.grid_len(dim)?;
        if weights.len() != len {
            return Err(Error::InvalidParameter(format!(
                "expected {len} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid weight {w}")));
        }
        let support_size = weights.iter().filter(|&&w| w > 0.0).count();
        let total_mass = weights.iter().sum();
        Ok(Measure {
            field: field.clone(),
            dim,
            weights,
            support_size,
            total_mass,
            meta,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }

    pub fn support_size(&self) -> usize {
        self.support_size
    }

    /// Indices with positive weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass - 1.0).abs() < 1e-12
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn meta(&self) -> &MeasureMeta {
        &self.meta
    }

    pub fn to_grid(&self) -> GridFn {
        GridFn::from_values(
            &self.field,
            self.dim,
            self.weights.iter().map(|&w| Complex64::new(w, 0.0)).collect(),
        )
        .expect("measure weights always form a valid grid")
    }

    /// `μ̂`.
    pub fn fourier(&self) -> GridFn {
        self.to_grid().dft()
    }
}

/// What produced a [`PointSet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetMeta {
    Explicit,
    Cube {
        alpha: f64,
        beta: f64,
        side: usize,
    },
    Random {
        alpha: f64,
        delta: f64,
        seed: u64,
        effective_seed: u64,
        generator: String,
    },
    Bohr {
        threshold_ratio: f64,
        source_size: usize,
    },
    Paraboloid,
}

/// A subset of `F_p^n` stored as sorted grid indices.
#[derive(Clone, Debug)]
pub struct PointSet {
    field: Field,
    dim: usize,
    members: Vec<usize>,
    meta: SetMeta,
    indicator: OnceLock<GridFn>,
}

impl PointSet {
    pub fn new(field: &Field, dim: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        Self::with_meta(field, dim, members, SetMeta::Explicit)
    }

    pub fn with_meta(
        field: &Field,
        dim: usize,
        members: impl IntoIterator<Item = usize>,
        meta: SetMeta,
    ) -> Result<Self> {
        let len = field.grid_len(dim)?;
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&i| i >= len) {
            return Err(Error::IndexOutOfRange { index: bad, len });
        }
        Ok(PointSet {
            field: field.clone(),
            dim,
            members,
            meta,
            indicator: OnceLock::new(),
        })
    }

    pub fn whole_space(field: &Field, dim: usize) -> Result<Self> {
        let len = field.grid_len(dim)?;
        Self::new(field, dim, 0..len)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn meta(&self) -> &SetMeta {
        &self.meta
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    pub fn contains_point(&self, x: &Point) -> Result<bool> {
        Ok(self.contains(point_to_index(x, &self.field)?))
    }

    /// `1_S`, built on first use.
    pub fn indicator(&self) -> &GridFn {
        self.indicator.get_or_init(|| {
            let mut g = GridFn::zeros(&self.field, self.dim).expect("validated at construction");
            let vals = g.values_mut();
            for &i in &self.members {
                vals[i] = Complex64::new(1.0, 0.0);
            }
            g
        })
    }

    pub fn intersection_size(&self, other: &PointSet) -> Result<usize> {
        check_grid(self.p(), self.dim, other.p(), other.dim)?;
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(small.members.iter().filter(|&&i| big.contains(i)).count())
    }

    /// Text form: header `p n |S|`, then one canonical index per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {} {}", self.p(), self.dim, self.len())?;
        for i in &self.members {
            writeln!(w, "{i}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<PointSet> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        let nums: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(format!("header: {e}"))))
            .collect::<Result<_>>()?;
        let [p, n, count] = nums[..] else {
            return Err(Error::Parse(format!("header must be `p n |S|`, got {header:?}")));
        };
        let field = Field::new(p)?;
        let mut members = Vec::with_capacity(count as usize);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            members.push(
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("index {t:?}: {e}")))?,
            );
        }
        if members.len() as u64 != count {
            return Err(Error::Parse(format!(
                "header declares {count} members, found {}",
                members.len()
            )));
        }
        let set = PointSet::new(&field, n as usize, members)?;
        if set.len() as u64 != count {
            return Err(Error::Parse("duplicate indices".into()));
        }
        Ok(set)
    }
}

/// `μ(x) = p^{-n}`.
pub fn uniform_measure(field: &Field, n: usize) -> Result<Measure> {
    let len = field.grid_len(n)?;
    Measure::with_meta(
        field,
        n,
        vec![1.0 / len as f64; len],
        MeasureMeta::of_kind(MeasureKind::Uniform),
    )
}

/// Unit point mass at grid index `a`.
pub fn atom_measure(field: &Field, n: usize, a: usize) -> Result<Measure> {
    let len = field.grid_len(n)?;
    if a >= len {
        return Err(Error::IndexOutOfRange { index: a, len });
    }
    let mut w = vec![0.0; len];
    w[a] = 1.0;
    Measure::with_meta(field, n, w, MeasureMeta::of_kind(MeasureKind::Atom))
}

/// Normalized indicator `1_S / |S|`.
pub fn indicator_measure(set: &PointSet) -> Result<Measure> {
    if set.is_empty() {
        return Err(Error::EmptySupport);
    }
    let len = set.field().grid_len(set.dim())?;
    let mut w = vec![0.0; len];
    let mass = 1.0 / set.len() as f64;
    for &i in set.members() {
        w[i] = mass;
    }
    Measure::with_meta(set.field(), set.dim(), w, MeasureMeta::of_kind(MeasureKind::Indicator))
}

/// Side length `N = max(1, round(p^{(α-β/2)/n}))` of the cube.
pub fn cube_side(p: u64, n: usize, alpha: f64, beta: f64) -> usize {
    let side = (p as f64).powf((alpha - beta / 2.0) / n as f64).round();
    (side as usize).max(1)
}

/// The cube `A = {1, …, N}^n` with `N^n ≈ p^{α-β/2}`.
pub fn cube_set(field: &Field, n: usize, alpha: f64, beta: f64) -> Result<PointSet> {
    if !(beta > 0.0 && beta <= alpha && alpha < n as f64) {
        return Err(Error::InvalidParameter(format!(
            "cube needs 0 < beta <= alpha < n, got alpha = {alpha}, beta = {beta}, n = {n}"
        )));
    }
    field.grid_len(n)?;
    let side = cube_side(field.p(), n, alpha, beta);
    if side as u64 > field.p() {
        return Err(Error::InvalidParameter(format!(
            "cube side {side} exceeds p = {}",
            field.p()
        )));
    }
    let p = field.p() as usize;
    let count = side.pow(n as u32);
    let mut members = Vec::with_capacity(count);
    for t in 0..count {
        let mut rest = t;
        let mut index = 0usize;
        let mut radix = 1usize;
        for _ in 0..n {
            let coord = (rest % side + 1) % p;
            rest /= side;
            index += coord * radix;
            radix *= p;
        }
        members.push(index);
    }
    PointSet::with_meta(field, n, members, SetMeta::Cube { alpha, beta, side })
}

/// `A* = {ξ : |1̂_A(ξ)| ≥ ratio·|A|}`.
pub fn bohr_set(a: &PointSet, threshold_ratio: f64) -> Result<PointSet> {
    if a.is_empty() {
        return Err(Error::InvalidParameter("Bohr set of an empty set".into()));
    }
    let spectrum = a.indicator().dft();
    let size = a.len() as f64;
    // small slack for transform roundoff at the exact threshold
    let threshold = threshold_ratio * size - 1e-9 * size;
    let members = spectrum
        .values()
        .iter()
        .enumerate()
        .filter(|(i, v)| *i == 0 || v.norm() >= threshold)
        .map(|(i, _)| i);
    PointSet::with_meta(
        a.field(),
        a.dim(),
        members,
        SetMeta::Bohr {
            threshold_ratio,
            source_size: a.len(),
        },
    )
}

/// Explicit box `{ξ : |ξ_j| ≤ p/(10·n·N) for all j}` in balanced coordinates,
/// the part of `A*` guaranteed by the cube estimate.
pub fn bohr_box(field: &Field, n: usize, side: usize) -> Result<PointSet> {
    let radius = bohr_box_radius(field.p(), n, side);
    let width = 2 * radius + 1;
    let count = (width as usize).pow(n as u32);
    let mut members = Vec::with_capacity(count);
    for t in 0..count {
        let mut rest = t;
        let coords: Vec<i64> = (0..n)
            .map(|_| {
                let c = (rest % width as usize) as i64 - radius as i64;
                rest /= width as usize;
                c
            })
            .collect();
        members.push(point_to_index(&Point::reduced(&coords, field), field)?);
    }
    PointSet::new(field, n, members)
}

/// `floor(p / (10·n·N))`.
pub fn bohr_box_radius(p: u64, n: usize, side: usize) -> u64 {
    p / (10 * n as u64 * side as u64)
}

/// `(2·floor(p/(10nN)) + 1)^n`, the explicit lower bound for `|A*|`.
pub fn bohr_box_count(p: u64, n: usize, side: usize) -> usize {
    let r = bohr_box_radius(p, n, side);
    ((2 * r + 1).min(p) as usize).pow(n as u32)
}

/// Includes each point independently with probability `δ = p^{α-n}`,
/// drawing in canonical index order. An empty draw is retried with `seed+1`.
pub fn random_set(field: &Field, n: usize, alpha: f64, seed: u64) -> Result<PointSet> {
    if !(alpha > 0.0 && alpha <= n as f64) {
        return Err(Error::InvalidParameter(format!(
            "random set needs 0 < alpha <= n, got {alpha}"
        )));
    }
    let len = field.grid_len(n)?;
    let delta = (field.p() as f64).powf(alpha - n as f64).min(1.0);
    let mut effective_seed = seed;
    for _ in 0..MAX_EMPTY_RETRIES {
        let members = bernoulli_draw(len, delta, effective_seed);
        if !members.is_empty() {
            return PointSet::with_meta(
                field,
                n,
                members,
                SetMeta::Random {
                    alpha,
                    delta,
                    seed,
                    effective_seed,
                    generator: GENERATOR_NAME.to_string(),
                },
            );
        }
        effective_seed = effective_seed.wrapping_add(1);
    }
    Err(Error::InvalidParameter(format!(
        "random set stayed empty after {MAX_EMPTY_RETRIES} draws (delta = {delta})"
    )))
}

fn bernoulli_draw(len: usize, delta: f64, seed: u64) -> Vec<usize> {
    if delta >= 1.0 {
        return (0..len).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).filter(|_| rng.gen::<f64>() < delta).collect()
}

/// `μ = (1_E + 1_A)/(|E| + |A|)`.
pub fn combined_measure(a: &PointSet, e: &PointSet) -> Result<Measure> {
    check_grid(a.p(), a.dim(), e.p(), e.dim())?;
    let total = a.len() + e.len();
    if total == 0 {
        return Err(Error::EmptySupport);
    }
    let len = a.field().grid_len(a.dim())?;
    let unit = 1.0 / total as f64;
    let mut w = vec![0.0; len];
    for &i in a.members().iter().chain(e.members()) {
        w[i] += unit;
    }
    let overlap = a.intersection_size(e)?;
    let mut meta = MeasureMeta::of_kind(MeasureKind::Combined);
    meta.a_size = Some(a.len());
    meta.e_size = Some(e.len());
    meta.overlap = Some(overlap);
    meta.overlap_warning = overlap as f64 > OVERLAP_WARN_FRACTION * a.len() as f64;
    if let SetMeta::Cube { alpha, beta, side } = *a.meta() {
        meta.alpha = Some(alpha);
        meta.beta = Some(beta);
        meta.cube_side = Some(side);
    }
    if let SetMeta::Random {
        delta,
        seed,
        effective_seed,
        ref generator,
        ..
    } = *e.meta()
    {
        meta.delta = Some(delta);
        meta.seed = Some(seed);
        meta.effective_seed = Some(effective_seed);
        meta.generator = Some(generator.clone());
    }
    Measure::with_meta(a.field(), a.dim(), w, meta)
}

/// The cube that a combined measure was built from, reconstructed from its
/// metadata.
pub fn cube_of(mu: &Measure) -> Result<PointSet> {
    let meta = mu.meta();
    let (Some(side), Some(alpha), Some(beta)) = (meta.cube_side, meta.alpha, meta.beta) else {
        return Err(Error::MissingCubeMetadata);
    };
    let cube = cube_set(mu.field(), mu.dim(), alpha, beta)?;
    if let SetMeta::Cube { side: s, .. } = cube.meta() {
        if *s != side {
            return Err(Error::Invariant(format!(
                "cube side {s} rebuilt from metadata differs from recorded {side}"
            )));
        }
    }
    Ok(cube)
}

/// `P = {(x, x·x) : x ∈ F^{n-1}}`.
pub fn paraboloid_set(field: &Field, n: usize) -> Result<PointSet> {
    if n < 2 {
        return Err(Error::InvalidParameter("paraboloid needs n >= 2".into()));
    }
    if field.p() == 2 {
        return Err(Error::InvalidParameter("paraboloid needs odd p".into()));
    }
    let base = field.grid_len(n - 1)?;
    field.grid_len(n)?;
    let p = field.p();
    let top_radix = base;
    let members = (0..base).map(|i| {
        let x = index_to_point(i, n - 1, field).expect("in range");
        let norm = x
            .coords()
            .iter()
            .fold(0u64, |acc, &c| (acc + c * c % p) % p);
        i + norm as usize * top_radix
    });
    PointSet::with_meta(field, n, members, SetMeta::Paraboloid)
}

/// Measured regularity and decay exponents of a probability measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `-log_p max_x μ(x)`.
    pub alpha_eff: f64,
    /// `-2 log_p max_{ξ≠0} |μ̂(ξ)|`; infinite when the off-zero spectrum vanishes.
    pub beta_eff: Exponent,
    pub max_offzero_coeff: f64,
    pub max_weight: f64,
    pub support_size: usize,
    /// `|μ̂(0) - 1|`.
    pub mass_check: f64,
}

pub fn spectral_report(mu: &Measure) -> Result<SpectralReport> {
    if mu.total_mass() <= 0.0 {
        return Err(Error::ZeroInput);
    }
    let spectrum = mu.fourier();
    let vals = spectrum.values();
    let max_offzero = vals[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let ln_p = (mu.p() as f64).ln();
    let max_weight = mu.max_weight();
    let beta_eff = if max_offzero <= SPECTRUM_ZERO_TOL {
        Exponent::Infinite
    } else {
        Exponent::Finite(-2.0 * max_offzero.ln() / ln_p)
    };
    Ok(SpectralReport {
        alpha_eff: -max_weight.ln() / ln_p,
        beta_eff,
        max_offzero_coeff: max_offzero,
        max_weight,
        support_size: mu.support_size(),
        mass_check: (vals[0] - Complex64::new(1.0, 0.0)).norm(),
    })
}

/// Support size and pointwise bounds implied by the measured decay.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    /// Decay exponent actually used; an infinite `beta_eff` is capped at `n`.
    pub beta_used: f64,
    /// `|Supp μ| / p^β`, should be at least 1/2.
    pub support_ratio: f64,
    /// `max μ · p^{β/2}`, should be at most 2.
    pub decay_ratio: f64,
    pub support_ok: bool,
    pub decay_ok: bool,
}

impl DecayCheck {
    pub fn passed(&self) -> bool {
        self.support_ok && self.decay_ok
    }
}

pub fn support_decay_check(report: &SpectralReport, mu: &Measure) -> DecayCheck {
    let n = mu.dim() as f64;
    let beta = match report.beta_eff {
        Exponent::Finite(b) => b.min(n),
        Exponent::Infinite => n,
    };
    let p = mu.p() as f64;
    let support_ratio = mu.support_size() as f64 / p.powf(beta);
    let decay_ratio = mu.max_weight() * p.powf(beta / 2.0);
    DecayCheck {
        beta_used: beta,
        support_ratio,
        decay_ratio,
        support_ok: support_ratio >= 0.5,
        decay_ok: decay_ratio <= 2.0,
    }
}

/// Largest off-zero modulus of `1̂_S`.
pub fn max_offzero_indicator_coeff(set: &PointSet) -> f64 {
    let spectrum = set.indicator().dft();
    spectrum.values()[1..]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}
