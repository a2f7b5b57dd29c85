//! Dense samples on the uniform tensor grid of `T^N`.
//!
//! Grid point `k = (k_1, ..., k_N)` sits at angles `theta_j = 2 pi k_j / res`
//! and is stored at flat index `((k_1 res + k_2) res + ...) res + k_N`, so
//! `k_1` varies slowest. A function of the first `j` coordinates only lives
//! on the `res^j` prefix grid, indexed by `flat / res^(N - j)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::trigpoly::TrigPoly;

/// Modulus of a sampled value.
pub trait Magnitude: Copy + Send + Sync {
    fn magnitude(self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T = Complex64> {
    dim: usize,
    res: usize,
    values: Vec<T>,
}

impl<T> GridFunction<T> {
    pub fn from_values(dim: usize, res: usize, values: Vec<T>) -> Result<Self> {
        if dim == 0 || res == 0 {
            return Err(Error::InvalidParameter(
                "grid needs positive dimension and resolution".into(),
            ));
        }
        let expected = grid_len(res, dim)?;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: expected,
            });
        }
        Ok(GridFunction { dim, res, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Multi-index `(k_1, ..., k_N)` of a flat position.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.res;
            flat /= self.res;
        }
        idx
    }

    /// Angles `(theta_1, ..., theta_N)` of a flat position.
    pub fn angles(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .into_iter()
            .map(|k| TAU * k as f64 / self.res as f64)
            .collect()
    }

    pub fn map<U, F: Fn(T) -> U>(&self, f: F) -> GridFunction<U>
    where
        T: Copy,
    {
        GridFunction {
            dim: self.dim,
            res: self.res,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T: Magnitude> GridFunction<T> {
    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }
}

impl GridFunction<Complex64> {
    /// Samples `p` on the `res^N` grid.
    pub fn sample(p: &TrigPoly, res: usize) -> Result<Self> {
        let values = synthesize(p, res, |_, row, out: &mut [Complex64]| out.copy_from_slice(row))?;
        GridFunction::from_values(p.dim(), res, values)
    }

    /// Normalized inner product `mean(a * conj(b))`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim != other.dim || self.res != other.res {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let sum: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(sum / self.len() as f64)
    }
}

impl GridFunction<f64> {
    /// Samples the real part of `p` on the `res^N` grid.
    pub fn sample_real(p: &TrigPoly, res: usize) -> Result<Self> {
        let values = synthesize(p, res, |_, row, out: &mut [f64]| {
            for (o, z) in out.iter_mut().zip(row) {
                *o = z.re;
            }
        })?;
        GridFunction::from_values(p.dim(), res, values)
    }
}

pub(crate) fn grid_len(res: usize, dim: usize) -> Result<usize> {
    u32::try_from(dim)
        .ok()
        .and_then(|d| res.checked_pow(d))
        .ok_or_else(|| Error::InvalidParameter(format!("grid {res}^{dim} is too large")))
}

/// `e^{2 pi i r / res}` for `r in 0..res`, indexed by `(m k) mod res`.
struct Twiddles {
    res: usize,
    base: Vec<Complex64>,
}

impl Twiddles {
    fn new(res: usize) -> Self {
        let base = (0..res)
            .map(|r| Complex64::cis(TAU * r as f64 / res as f64))
            .collect();
        Twiddles { res, base }
    }

    fn row(&self, m: i32) -> Vec<Complex64> {
        let res = self.res as i64;
        (0..res)
            .map(|k| self.base[(m as i64 * k).rem_euclid(res) as usize])
            .collect()
    }
}

type TermRef<'a> = (&'a [i32], Complex64);

/// Groups terms by their component at `axis`.
fn group_by_axis<'a>(terms: &[TermRef<'a>], axis: usize) -> BTreeMap<i32, Vec<TermRef<'a>>> {
    let mut groups: BTreeMap<i32, Vec<TermRef<'a>>> = BTreeMap::new();
    for &(m, c) in terms {
        groups.entry(m[axis]).or_default().push((m, c));
    }
    groups
}

/// Values on the `res^j` grid of a sum of terms that only involve the first
/// `j` coordinates.
fn synth_prefix(terms: &[TermRef<'_>], j: usize, tw: &Twiddles) -> Vec<Complex64> {
    if j == 0 {
        return vec![terms.iter().map(|t| t.1).sum()];
    }
    let res = tw.res;
    let parts: Vec<(Vec<Complex64>, Vec<Complex64>)> = group_by_axis(terms, j - 1)
        .into_iter()
        .map(|(m, group)| (synth_prefix(&group, j - 1, tw), tw.row(m)))
        .collect();
    let outer = res.pow(j as u32 - 1);
    let mut out = vec![Complex64::new(0.0, 0.0); outer * res];
    for (pre, chunk) in out.chunks_mut(res).enumerate() {
        for (lower, row) in &parts {
            let a = lower[pre];
            for (o, w) in chunk.iter_mut().zip(row) {
                *o += a * w;
            }
        }
    }
    out
}

/// Evaluates the part of `p` living on the first `j` coordinates on the
/// `res^j` grid. Terms involving later coordinates must be absent.
pub(crate) fn prefix_values(p: &TrigPoly, j: usize, res: usize) -> Vec<Complex64> {
    let terms: Vec<TermRef<'_>> = p.terms().map(|(m, c)| (m.as_slice(), *c)).collect();
    debug_assert!(terms.iter().all(|(m, _)| m[j..].iter().all(|&x| x == 0)));
    synth_prefix(&terms, j, &Twiddles::new(res))
}

/// Streams `p` over the full `res^N` grid one last-axis row at a time.
///
/// `fill(pre, row, out)` receives the prefix index `pre` (over the first
/// `N - 1` coordinates), the `res` values of `p` along the last axis, and the
/// matching output slice. Rows are independent, so the result does not
/// depend on scheduling.
pub(crate) fn synthesize<T, F>(p: &TrigPoly, res: usize, fill: F) -> Result<Vec<T>>
where
    T: Default + Clone + Send,
    F: Fn(usize, &[Complex64], &mut [T]) + Sync,
{
    if res == 0 {
        return Err(Error::InvalidParameter("resolution must be positive".into()));
    }
    let n = p.dim();
    let len = grid_len(res, n)?;
    let tw = Twiddles::new(res);
    let terms: Vec<TermRef<'_>> = p.terms().map(|(m, c)| (m.as_slice(), *c)).collect();
    let parts: Vec<(Vec<Complex64>, Vec<Complex64>)> = group_by_axis(&terms, n - 1)
        .into_iter()
        .map(|(m, group)| (synth_prefix(&group, n - 1, &tw), tw.row(m)))
        .collect();
    let mut out = vec![T::default(); len];
    out.par_chunks_mut(res).enumerate().for_each_init(
        || vec![Complex64::new(0.0, 0.0); res],
        |row, (pre, chunk)| {
            row.fill(Complex64::new(0.0, 0.0));
            for (lower, twiddle) in &parts {
                let a = lower[pre];
                for (o, w) in row.iter_mut().zip(twiddle) {
                    *o += a * w;
                }
            }
            fill(pre, row, chunk);
        },
    );
    Ok(out)
}

/// Pointwise reduction over "prefix pieces" `q_1, ..., q_N`, where `q_j`
/// depends only on `theta_1..theta_j`.
///
/// `reduce` sees the `N` piece values at each grid point in order.
pub(crate) fn reduce_pieces<F>(pieces: &[TrigPoly], res: usize, reduce: F) -> Result<Vec<f64>>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let n = pieces.len();
    let Some(last) = pieces.last() else {
        return Err(Error::InvalidParameter("no pieces to reduce".into()));
    };
    let tables: Vec<Vec<Complex64>> = pieces[..n - 1]
        .iter()
        .enumerate()
        .map(|(i, q)| prefix_values(q, i + 1, res))
        .collect();
    // divisor turning a last-axis row index into the prefix index of piece j
    let divisors: Vec<usize> = (1..n).map(|j| res.pow((n - 1 - j) as u32)).collect();
    synthesize(last, res, |pre, row, out: &mut [f64]| {
        let mut vals: Vec<Complex64> = tables.iter().zip(&divisors).map(|(t, div)| t[pre / div]).collect();
        vals.push(Complex64::new(0.0, 0.0));
        for (o, z) in out.iter_mut().zip(row) {
            vals[n - 1] = *z;
            *o = reduce(&vals);
        }
    })
}
