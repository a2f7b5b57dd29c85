//! Dense-grid reference implementations of the coefficient operators.
//!
//! Everything here works on sampled values only: naive per-axis DFTs,
//! explicit averaging, and a sign rule derived from DFT bin numbers. Nothing
//! is shared with the sparse code paths in [`crate::operators`], so agreement
//! between the two is evidence that both are right.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::trigpoly::{FreqVector, TrigPoly};

/// Grid geometry with axis 0 varying slowest.
struct Layout {
    dim: usize,
    res: usize,
    len: usize,
}

impl Layout {
    fn of(g: &GridFunction<Complex64>) -> Self {
        Layout {
            dim: g.dim(),
            res: g.res(),
            len: g.len(),
        }
    }

    fn stride(&self, axis: usize) -> usize {
        let mut s = 1;
        for _ in axis + 1..self.dim {
            s *= self.res;
        }
        s
    }

    /// Flat offsets of the first element of every line running along `axis`.
    fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.stride(axis);
        (0..self.len)
            .filter(|&i| (i / stride).is_multiple_of(self.res))
            .collect()
    }

    /// Signed frequency carried by DFT bin `k`; the Nyquist bin of an even
    /// resolution is ambiguous and reported as `None`.
    fn bin_frequency(&self, k: usize) -> Option<i64> {
        let (k, res) = (k as i64, self.res as i64);
        if 2 * k < res {
            Some(k)
        } else if 2 * k > res {
            Some(k - res)
        } else {
            None
        }
    }
}

/// One-dimensional DFT of every line along `axis`.
/// `sign = -1` is the forward (analysis) direction and divides by `res`.
fn axis_dft(values: &[Complex64], layout: &Layout, axis: usize, sign: f64) -> Vec<Complex64> {
    let res = layout.res;
    let stride = layout.stride(axis);
    let roots: Vec<Complex64> = (0..res)
        .map(|r| Complex64::cis(sign * TAU * r as f64 / res as f64))
        .collect();
    let scale = if sign < 0.0 { 1.0 / res as f64 } else { 1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    for start in layout.line_starts(axis) {
        for k in 0..res {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..res {
                acc += values[start + x * stride] * roots[(k * x) % res];
            }
            out[start + k * stride] = acc * scale;
        }
    }
    out
}

/// Recovers the Fourier coefficients of a sampled trigonometric polynomial
/// of degree at most `max_degree` in every variable.
pub fn dft_coeffs(g: &GridFunction<Complex64>, max_degree: u32) -> Result<TrigPoly> {
    let floor = 2 * max_degree as usize + 2;
    if g.res() < floor {
        return Err(Error::ResolutionTooLow {
            res: g.res(),
            floor,
        });
    }
    let layout = Layout::of(g);
    let mut spectrum = g.values().to_vec();
    for axis in 0..layout.dim {
        spectrum = axis_dft(&spectrum, &layout, axis, -1.0);
    }
    let deg = max_degree as i64;
    let mut terms = Vec::new();
    'bins: for (flat, &c) in spectrum.iter().enumerate() {
        let mut freq = Vec::with_capacity(layout.dim);
        let mut rest = flat;
        for axis in 0..layout.dim {
            let stride = layout.stride(axis);
            let k = rest / stride;
            rest %= stride;
            match layout.bin_frequency(k) {
                Some(m) if m.abs() <= deg => freq.push(m as i32),
                _ => continue 'bins,
            }
        }
        terms.push((FreqVector::new(freq), c));
    }
    TrigPoly::new(layout.dim, terms)
}

/// Conjugation in variable `j` (1-based): forward DFT along that axis,
/// multiply by `-i sgn(frequency)`, inverse DFT.
pub fn conjugate_via_dft(g: &GridFunction<Complex64>, j: usize) -> Result<GridFunction<Complex64>> {
    if j < 1 || j > g.dim() {
        return Err(Error::OutOfRange {
            what: "axis",
            value: j,
            min: 1,
            max: g.dim(),
        });
    }
    let layout = Layout::of(g);
    let axis = j - 1;
    let stride = layout.stride(axis);
    let mut spectrum = axis_dft(g.values(), &layout, axis, -1.0);
    for (flat, v) in spectrum.iter_mut().enumerate() {
        let k = (flat / stride) % layout.res;
        let sign = layout.bin_frequency(k).map_or(0.0, |m| m.signum() as f64);
        *v *= Complex64::new(0.0, -sign);
    }
    GridFunction::from_values(g.dim(), g.res(), axis_dft(&spectrum, &layout, axis, 1.0))
}

/// Conditional expectation onto the first `n` coordinates by averaging out
/// the remaining ones.
pub fn cond_expect_via_avg(g: &GridFunction<Complex64>, n: usize) -> Result<GridFunction<Complex64>> {
    if n > g.dim() {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            min: 0,
            max: g.dim(),
        });
    }
    let layout = Layout::of(g);
    // the trailing dim - n axes form contiguous blocks of this size
    let block = layout.len / layout.res.pow(n as u32);
    let mut out = Vec::with_capacity(layout.len);
    for chunk in g.values().chunks(block) {
        let mean = chunk.iter().sum::<Complex64>() / block as f64;
        out.extend(std::iter::repeat_n(mean, block));
    }
    GridFunction::from_values(g.dim(), g.res(), out)
}

/// `H g = sum_j H_j (E(g | F_j) - E(g | F_{j-1}))` from grid averages and
/// per-axis transforms.
pub fn conjugate_h_via_dft(g: &GridFunction<Complex64>) -> Result<GridFunction<Complex64>> {
    let mut acc = vec![Complex64::new(0.0, 0.0); g.len()];
    let mut prev = cond_expect_via_avg(g, 0)?;
    for j in 1..=g.dim() {
        let next = cond_expect_via_avg(g, j)?;
        let diff: Vec<Complex64> = next.values().iter().zip(prev.values()).map(|(a, b)| a - b).collect();
        let dj = GridFunction::from_values(g.dim(), g.res(), diff)?;
        for (a, v) in acc.iter_mut().zip(conjugate_via_dft(&dj, j)?.values()) {
            *a += v;
        }
        prev = next;
    }
    GridFunction::from_values(g.dim(), g.res(), acc)
}
