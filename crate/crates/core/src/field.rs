//! Prime-field arithmetic on `F_p^n`.
//!
//! Points are stored with canonical coordinates in `0..p` and flattened to a
//! grid index with little-endian mixed radix: `index = Σ x_i p^i`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dense grid (number of entries `p^n`) any constructor accepts.
pub const MAX_GRID_ENTRIES: usize = 1 << 26;

const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for every `u64`.
///
/// Miller–Rabin with the first twelve primes as witnesses, which is exact
/// below 3.3 * 10^24.
pub fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &w in &MR_WITNESSES {
        if m == w {
            return true;
        }
        if m % w == 0 {
            return false;
        }
    }
    let mut d = m - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime field `F_p` together with its table of characters `e(k) = exp(2πik/p)`.
#[derive(Clone)]
pub struct Field {
    p: u64,
    omega: Arc<[Complex64]>,
}

impl Field {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p as u128 > MAX_GRID_ENTRIES as u128 {
            return Err(Error::GridTooLarge {
                entries: p as u128,
                cap: MAX_GRID_ENTRIES,
            });
        }
        let len = p as usize;
        let mut omega = vec![Complex64::new(1.0, 0.0); len];
        // Evaluate on the reduced angle 2πk/p with k <= p/2 and fill the other
        // half by conjugation, so ω[p-k] = conj(ω[k]) holds exactly.
        for k in 1..=len / 2 {
            let theta = 2.0 * PI * (k as f64) / (p as f64);
            let (s, c) = theta.sin_cos();
            omega[k] = Complex64::new(c, s);
            omega[len - k] = Complex64::new(c, -s);
        }
        Ok(Field {
            p,
            omega: omega.into(),
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    /// `e(k) = exp(2πik/p)` for `k` in `0..p`.
    #[inline]
    pub fn omega(&self, k: u64) -> Complex64 {
        self.omega[k as usize]
    }

    pub fn omega_table(&self) -> &[Complex64] {
        &self.omega
    }

    /// `e(-k)`, i.e. the conjugate character.
    #[inline]
    pub fn omega_neg(&self, k: u64) -> Complex64 {
        let k = k % self.p;
        if k == 0 {
            self.omega[0]
        } else {
            self.omega[(self.p - k) as usize]
        }
    }

    /// Number of points of `F_p^n`, or an error if it exceeds [`MAX_GRID_ENTRIES`].
    pub fn grid_len(&self, n: usize) -> Result<usize> {
        let entries = (self.p as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if entries > MAX_GRID_ENTRIES as u128 {
            return Err(Error::GridTooLarge {
                entries,
                cap: MAX_GRID_ENTRIES,
            });
        }
        Ok(entries as usize)
    }

    /// Distance from `v` to zero in `Z/pZ`: `min(v, p - v)`.
    pub fn balanced_abs(&self, v: u64) -> u64 {
        balanced_abs(v, self.p)
    }

    /// Signed representative of `v` in `(-p/2, p/2]`.
    pub fn balanced(&self, v: u64) -> i64 {
        let v = v % self.p;
        if 2 * v > self.p {
            v as i64 - self.p as i64
        } else {
            v as i64
        }
    }

    pub fn point_to_index(&self, x: &Point) -> Result<usize> {
        point_to_index(x, self)
    }

    pub fn index_to_point(&self, index: usize, n: usize) -> Result<Point> {
        index_to_point(index, n, self)
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field").field("p", &self.p).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl Eq for Field {}

/// `min(v, p - v)` for `v` in `0..p`.
pub fn balanced_abs(v: u64, p: u64) -> u64 {
    let v = v % p;
    v.min(p - v)
}

/// A point of `F_p^n` in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    coords: Vec<u64>,
}

impl Point {
    /// Builds a point, checking every coordinate against `p`.
    pub fn new(coords: Vec<u64>, field: &Field) -> Result<Self> {
        if let Some(&bad) = coords.iter().find(|&&c| c >= field.p()) {
            return Err(Error::CoordinateOutOfRange {
                value: bad,
                p: field.p(),
            });
        }
        Ok(Point { coords })
    }

    /// Reduces arbitrary integer coordinates mod `p`.
    pub fn reduced(coords: &[i64], field: &Field) -> Self {
        let p = field.p() as i64;
        Point {
            coords: coords.iter().map(|c| c.rem_euclid(p) as u64).collect(),
        }
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Little-endian mixed-radix index `Σ x_i p^i`.
pub fn point_to_index(x: &Point, field: &Field) -> Result<usize> {
    let p = field.p();
    let mut index: u128 = 0;
    let mut radix: u128 = 1;
    for &c in x.coords() {
        if c >= p {
            return Err(Error::CoordinateOutOfRange { value: c, p });
        }
        index += c as u128 * radix;
        radix *= p as u128;
    }
    usize::try_from(index).map_err(|_| Error::GridTooLarge {
        entries: radix,
        cap: MAX_GRID_ENTRIES,
    })
}

pub fn index_to_point(index: usize, n: usize, field: &Field) -> Result<Point> {
    let len = field.grid_len(n)?;
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let p = field.p() as usize;
    let mut rest = index;
    let coords = (0..n)
        .map(|_| {
            let c = rest % p;
            rest /= p;
            c as u64
        })
        .collect();
    Ok(Point { coords })
}

/// `x · ξ mod p`.
pub fn dot_mod(x: &Point, xi: &Point, field: &Field) -> Result<u64> {
    if x.dim() != xi.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: xi.dim(),
        });
    }
    let p = field.p() as u128;
    let acc = x
        .coords()
        .iter()
        .zip(xi.coords())
        .fold(0u128, |acc, (&a, &b)| (acc + a as u128 * b as u128) % p);
    Ok(acc as u64)
}

/// Dot product of two grid indices, decoding the coordinates on the fly.
#[cfg(test)]
pub(crate) fn dot_index(mut a: usize, mut b: usize, n: usize, p: u64) -> u64 {
    let pu = p as usize;
    let mut acc = 0u64;
    for _ in 0..n {
        let ai = (a % pu) as u64;
        let bi = (b % pu) as u64;
        acc = (acc + ai * bi) % p;
        a /= pu;
        b /= pu;
    }
    acc
}

/// Index of `-x` for the point with index `index`.
#[cfg(test)]
pub(crate) fn negate_index(mut index: usize, n: usize, p: u64) -> usize {
    let pu = p as usize;
    let mut out = 0usize;
    let mut radix = 1usize;
    for _ in 0..n {
        let c = index % pu;
        index /= pu;
        out += ((pu - c) % pu) * radix;
        radix *= pu;
    }
    out
}

/// Index of `a + b` coordinate-wise mod `p`.
#[cfg(test)]
pub(crate) fn add_index(mut a: usize, mut b: usize, n: usize, p: u64) -> usize {
    let pu = p as usize;
    let mut out = 0usize;
    let mut radix = 1usize;
    for _ in 0..n {
        let c = (a % pu + b % pu) % pu;
        a /= pu;
        b /= pu;
        out += c * radix;
        radix *= pu;
    }
    out
}

/// Index of `a - b` coordinate-wise mod `p`.
#[cfg(test)]
pub(crate) fn sub_index(a: usize, b: usize, n: usize, p: u64) -> usize {
    add_index(a, negate_index(b, n, p), n, p)
}
