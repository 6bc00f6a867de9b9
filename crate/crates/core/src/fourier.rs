//! Discrete Fourier analysis on `F_p^n`.
//!
//! Conventions: `f̂(ξ) = Σ_x e(-x·ξ) f(x)` and `f^∨(ξ) = Σ_x e(x·ξ) f(x)`,
//! both unnormalized, so `(f̂)^∨ = p^n f`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::Field;
use crate::measures::Measure;

/// Line length above which [`TransformMethod::Auto`] switches to the FFT.
const AUTO_FFT_THRESHOLD: u64 = 32;

/// How a transform is evaluated. All methods compute the same sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TransformMethod {
    /// Direct `O(p^{2n})` double sum. Reference only.
    Naive,
    /// Axis sweep with direct `O(p²)` line transforms.
    Direct,
    /// Axis sweep with a prime-length FFT per line.
    Fft,
    /// `Direct` for small `p`, `Fft` otherwise.
    #[default]
    Auto,
}

impl TransformMethod {
    fn resolve(self, p: u64) -> TransformMethod {
        match self {
            TransformMethod::Auto if p > AUTO_FFT_THRESHOLD => TransformMethod::Fft,
            TransformMethod::Auto => TransformMethod::Direct,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    /// `e(-x·ξ)`, the forward transform.
    Forward,
    /// `e(x·ξ)`, the inverse transform.
    Inverse,
}

/// A dense complex function on `F_p^n`, indexed by [`crate::field::point_to_index`].
#[derive(Clone, Debug)]
pub struct GridFn {
    field: Field,
    dim: usize,
    values: Vec<Complex64>,
}

impl GridFn {
    pub fn zeros(field: &Field, dim: usize) -> Result<Self> {
        let len = field.grid_len(dim)?;
        Ok(GridFn {
            field: field.clone(),
            dim,
            values: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_values(field: &Field, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        let len = field.grid_len(dim)?;
        if values.len() != len {
            return Err(Error::InvalidParameter(format!(
                "expected {len} values for p = {}, n = {dim}, got {}",
                field.p(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite grid value".into()));
        }
        Ok(GridFn {
            field: field.clone(),
            dim,
            values,
        })
    }

    pub fn from_real(field: &Field, dim: usize, values: &[f64]) -> Result<Self> {
        Self::from_values(
            field,
            dim,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// `δ_a`: one at grid index `a`, zero elsewhere.
    pub fn delta(field: &Field, dim: usize, a: usize) -> Result<Self> {
        let mut g = Self::zeros(field, dim)?;
        let len = g.len();
        *g.values
            .get_mut(a)
            .ok_or(Error::IndexOutOfRange { index: a, len })? = Complex64::new(1.0, 0.0);
        Ok(g)
    }

    pub fn constant(field: &Field, dim: usize, c: Complex64) -> Result<Self> {
        let len = field.grid_len(dim)?;
        Ok(GridFn {
            field: field.clone(),
            dim,
            values: vec![c; len],
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
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFn) -> Result<()> {
        check_grid(self.p(), self.dim, other.p(), other.dim)
    }

    /// Pointwise map producing a new function on the same grid.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridFn {
        GridFn {
            field: self.field.clone(),
            dim: self.dim,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> GridFn {
        self.map(|v| v * s)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFn) -> Result<GridFn> {
        self.same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        self.same_grid(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &GridFn, f: impl Fn(Complex64, Complex64) -> Complex64) -> GridFn {
        GridFn {
            field: self.field.clone(),
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `f̂` with the default method.
    pub fn dft(&self) -> GridFn {
        dft_with(self, TransformMethod::default())
    }

    /// `f^∨` with the default method.
    pub fn idft(&self) -> GridFn {
        idft_with(self, TransformMethod::default())
    }

    /// Largest `|f(x)|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Writes the text form: a header line `p n`, then one `re im` pair per line
    /// in canonical index order.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.p(), self.dim)?;
        for v in &self.values {
            writeln!(w, "{:e} {:e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() * 48);
        let _ = writeln!(s, "{} {}", self.p(), self.dim);
        for v in &self.values {
            let _ = writeln!(s, "{:e} {:e}", v.re, v.im);
        }
        s
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<GridFn> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))??;
        let mut parts = header.split_whitespace();
        let p: u64 = parse_field(parts.next(), "p")?;
        let n: usize = parse_field(parts.next(), "n")?;
        let field = Field::new(p)?;
        let len = field.grid_len(n)?;
        let mut values = Vec::with_capacity(len);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let re: f64 = parse_field(parts.next(), "re")?;
            let im: f64 = parse_field(parts.next(), "im")?;
            values.push(Complex64::new(re, im));
        }
        GridFn::from_values(&field, n, values)
    }
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    tok.ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
}

pub(crate) fn check_grid(p1: u64, n1: usize, p2: u64, n2: usize) -> Result<()> {
    if p1 != p2 || n1 != n2 {
        return Err(Error::GridMismatch {
            p_left: p1,
            n_left: n1,
            p_right: p2,
            n_right: n2,
        });
    }
    Ok(())
}

/// `f̂(ξ) = Σ_x e(-x·ξ) f(x)`.
pub fn dft(f: &GridFn) -> GridFn {
    f.dft()
}

/// `f^∨(ξ) = Σ_x e(x·ξ) f(x)`.
pub fn idft(f: &GridFn) -> GridFn {
    f.idft()
}

pub fn dft_with(f: &GridFn, method: TransformMethod) -> GridFn {
    transform(f, Sign::Forward, method)
}

pub fn idft_with(f: &GridFn, method: TransformMethod) -> GridFn {
    transform(f, Sign::Inverse, method)
}

fn transform(f: &GridFn, sign: Sign, method: TransformMethod) -> GridFn {
    let values = match method.resolve(f.p()) {
        TransformMethod::Naive => naive_transform(f, sign),
        TransformMethod::Fft => {
            let plan = fft_plan(f.p() as usize, sign);
            axis_sweep(f, |line, scratch| {
                plan.process_with_scratch(line, scratch);
            }, plan.get_inplace_scratch_len())
        }
        _ => {
            let field = f.field.clone();
            axis_sweep(f, move |line, scratch| {
                direct_line(&field, sign, line, scratch);
            }, f.p() as usize)
        }
    };
    GridFn {
        field: f.field.clone(),
        dim: f.dim,
        values,
    }
}

/// Double sum over all `(x, ξ)`. The phase `x·ξ` is carried incrementally
/// through the mixed-radix walk over `x`.
fn naive_transform(f: &GridFn, sign: Sign) -> Vec<Complex64> {
    let p = f.p();
    let n = f.dim;
    let pu = p as usize;
    let len = f.len();
    let field = &f.field;
    (0..len)
        .into_par_iter()
        .map(|xi| {
            let mut xi_coords = vec![0u64; n];
            let mut rest = xi;
            for c in xi_coords.iter_mut() {
                *c = (rest % pu) as u64;
                rest /= pu;
            }
            let mut x = vec![0u64; n];
            let mut phase = 0u64;
            let mut acc = Complex64::new(0.0, 0.0);
            for &v in f.values.iter() {
                let w = match sign {
                    Sign::Forward => field.omega_neg(phase),
                    Sign::Inverse => field.omega(phase),
                };
                acc += w * v;
                // advance x by one in little-endian order
                for d in 0..n {
                    x[d] += 1;
                    phase = (phase + xi_coords[d]) % p;
                    if x[d] < p {
                        break;
                    }
                    // wrapped: x[d] went p -> 0, phase already advanced by p·ξ_d ≡ 0
                    x[d] = 0;
                }
            }
            acc
        })
        .collect()
}

fn direct_line(field: &Field, sign: Sign, line: &mut [Complex64], scratch: &mut [Complex64]) {
    let p = field.p();
    scratch[..line.len()].copy_from_slice(line);
    for (k, out) in line.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut phase = 0u64;
        for v in scratch[..field.p() as usize].iter() {
            let w = match sign {
                Sign::Forward => field.omega_neg(phase),
                Sign::Inverse => field.omega(phase),
            };
            acc += w * v;
            phase += k as u64;
            if phase >= p {
                phase -= p;
            }
        }
        *out = acc;
    }
}

fn fft_plan(len: usize, sign: Sign) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let planner = PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()));
    let mut guard = planner.lock().unwrap_or_else(|e| e.into_inner());
    let direction = match sign {
        Sign::Forward => FftDirection::Forward,
        Sign::Inverse => FftDirection::Inverse,
    };
    guard.plan_fft(len, direction)
}

/// Applies a length-`p` line transform along every axis in turn. Blocks of
/// `p^{axis+1}` entries are independent, so they are processed in parallel;
/// each line is transformed by exactly the same sequence of operations
/// regardless of the worker count.
fn axis_sweep<F>(f: &GridFn, line_op: F, scratch_len: usize) -> Vec<Complex64>
where
    F: Fn(&mut [Complex64], &mut [Complex64]) + Sync,
{
    let pu = f.p() as usize;
    let mut values = f.values.clone();
    let mut stride = 1usize;
    for _axis in 0..f.dim {
        let block = stride * pu;
        values.par_chunks_mut(block).for_each(|chunk| {
            let mut line = vec![Complex64::new(0.0, 0.0); pu];
            let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len.max(pu)];
            for inner in 0..stride {
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = chunk[inner + j * stride];
                }
                line_op(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    chunk[inner + j * stride] = *v;
                }
            }
        });
        stride = block;
    }
    values
}

/// `(f∗g)(x) = Σ_y f(x-y) g(y)`, evaluated through the transform:
/// `p^{-n} (f̂ ĝ)^∨`.
pub fn convolve(f: &GridFn, g: &GridFn) -> Result<GridFn> {
    f.same_grid(g)?;
    let scale = 1.0 / f.len() as f64;
    let prod = f.dft().mul(&g.dft())?;
    Ok(prod.idft().scale(scale))
}

/// Direct `O(p^{2n})` convolution sum.
pub fn convolve_naive(f: &GridFn, g: &GridFn) -> Result<GridFn> {
    f.same_grid(g)?;
    let n = f.dim;
    let pu = f.p() as usize;
    let radix: Vec<usize> = (0..n).map(|d| pu.pow(d as u32)).collect();
    let values = (0..f.len())
        .into_par_iter()
        .map(|x| {
            // walk y in index order, keeping the coordinates and index of x - y
            let mut diff: Vec<usize> = (0..n).map(|d| (x / radix[d]) % pu).collect();
            let mut y = vec![0usize; n];
            let mut idx = x;
            let mut acc = Complex64::new(0.0, 0.0);
            for &gy in g.values.iter() {
                acc += f.values[idx] * gy;
                for d in 0..n {
                    y[d] += 1;
                    if diff[d] == 0 {
                        diff[d] = pu - 1;
                        idx += (pu - 1) * radix[d];
                    } else {
                        diff[d] -= 1;
                        idx -= radix[d];
                    }
                    if y[d] < pu {
                        break;
                    }
                    y[d] = 0;
                }
            }
            acc
        })
        .collect();
    Ok(GridFn {
        field: f.field.clone(),
        dim: n,
        values,
    })
}

/// `‖f‖_{ℓ^q}` with respect to counting measure; `q = ∞` is the max modulus.
pub fn lq_norm(f: &GridFn, q: Exponent) -> Result<f64> {
    lq_norm_slice(&f.values, q)
}

pub(crate) fn lq_norm_slice(values: &[Complex64], q: Exponent) -> Result<f64> {
    match q {
        Exponent::Infinite => Ok(values.iter().map(|v| v.norm()).fold(0.0, f64::max)),
        Exponent::Finite(q) if q >= 1.0 => {
            let m = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if m == 0.0 {
                return Ok(0.0);
            }
            // scale by the max to keep |v|^q in range for large q
            let s: f64 = values.iter().map(|v| (v.norm() / m).powf(q)).sum();
            Ok(m * s.powf(1.0 / q))
        }
        Exponent::Finite(q) => Err(Error::InvalidExponent(format!("q = {q} < 1"))),
    }
}

/// `‖f‖_{L^p(μ)} = (Σ_x |f(x)|^p μ(x))^{1/p}`; `p = ∞` is the sup over the support.
pub fn lp_mu_norm(f: &GridFn, mu: &Measure, p_exp: Exponent) -> Result<f64> {
    check_grid(f.p(), f.dim, mu.field().p(), mu.dim())?;
    weighted_norm(&f.values, mu.weights(), p_exp)
}

pub(crate) fn weighted_norm(values: &[Complex64], weights: &[f64], p_exp: Exponent) -> Result<f64> {
    match p_exp {
        Exponent::Infinite => Ok(values
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)),
        Exponent::Finite(p) if p >= 1.0 => {
            let m = values
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(v, _)| v.norm())
                .fold(0.0, f64::max);
            if m == 0.0 {
                return Ok(0.0);
            }
            let s: f64 = values
                .iter()
                .zip(weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(v, &w)| (v.norm() / m).powf(p) * w)
                .sum();
            Ok(m * s.powf(1.0 / p))
        }
        Exponent::Finite(p) => Err(Error::InvalidExponent(format!("p = {p} < 1"))),
    }
}
