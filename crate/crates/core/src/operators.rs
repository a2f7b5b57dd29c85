//! Filtration and conjugation operators on trigonometric polynomials.
//!
//! `F_n` is the sigma-algebra generated by the first `n` coordinates. In
//! Fourier terms:
//!
//! * `E(f | F_n)` keeps the terms with `m_{n+1} = ... = m_N = 0`;
//! * `d_j f` keeps the terms whose last nonzero frequency is `m_j` (and
//!   `d_0 f` is the mean);
//! * `H_j` multiplies the coefficient at `m` by `-i sgn(m_j)`;
//! * `H f = sum_j H_j d_j f` multiplies each term by `-i sgn` of its last
//!   nonzero frequency.
//!
//! The maximal functions `D`, `M` and the square function `S` are pointwise
//! objects and are only available as grid samples.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{reduce_pieces, GridFunction};
use crate::trigpoly::{FreqVector, TrigPoly};

/// `-i sgn(s) a`, computed by exact component swaps.
fn conj_multiplier(a: Complex64, s: i32) -> Option<Complex64> {
    match s.signum() {
        1 => Some(Complex64::new(a.im, -a.re)),
        -1 => Some(Complex64::new(-a.im, a.re)),
        _ => None,
    }
}

fn check_index(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}

/// `E(p | F_n)` for `0 <= n <= N`.
pub fn cond_expect(p: &TrigPoly, n: usize) -> Result<TrigPoly> {
    check_index("n", n, 0, p.dim())?;
    Ok(p.filter_terms(|m| m.as_slice()[n..].iter().all(|&x| x == 0)))
}

/// The martingale difference `d_j p` for `0 <= j <= N`.
pub fn mart_diff(p: &TrigPoly, j: usize) -> Result<TrigPoly> {
    check_index("j", j, 0, p.dim())?;
    Ok(p.filter_terms(|m| match m.last_nonzero() {
        None => j == 0,
        Some(l) => l + 1 == j,
    }))
}

/// The one-variable conjugate operator `H_j`, `1 <= j <= N`.
pub fn conjugate_j(p: &TrigPoly, j: usize) -> Result<TrigPoly> {
    check_index("j", j, 1, p.dim())?;
    let terms = p
        .terms()
        .filter_map(|(m, c)| conj_multiplier(*c, m.as_slice()[j - 1]).map(|v| (m.clone(), v)))
        .collect();
    Ok(TrigPoly::from_nonzero_terms(p.dim(), terms))
}

/// `H p = sum_{j=1}^N H_j d_j p`.
pub fn conjugate_h(p: &TrigPoly) -> TrigPoly {
    let terms = p
        .terms()
        .filter_map(|(m, c)| {
            let last = m.last_nonzero()?;
            conj_multiplier(*c, m.as_slice()[last]).map(|v| (m.clone(), v))
        })
        .collect();
    TrigPoly::from_nonzero_terms(p.dim(), terms)
}

/// Membership in the half-space `O = {0} u { m : m_j > 0, m_{j+1..N} = 0 }`.
pub fn in_half_space(m: &FreqVector) -> bool {
    match m.last_nonzero() {
        None => true,
        Some(l) => m.as_slice()[l] > 0,
    }
}

/// Spectrum contained in `O`.
pub fn is_analytic(p: &TrigPoly) -> bool {
    p.terms().all(|(m, _)| in_half_space(m))
}

/// `p + i H p`.
pub fn analytic_completion(p: &TrigPoly) -> TrigPoly {
    TrigPoly::linear_combine(
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)],
        &[p.clone(), conjugate_h(p)],
    )
    .expect("same dimension")
}

/// Smallest grid resolution accepted by the maximal-function samplers.
pub fn nyquist_floor(p: &TrigPoly) -> usize {
    4 * (p.max_degree() as usize + 1)
}

fn check_resolution(p: &TrigPoly, res: usize) -> Result<()> {
    let floor = nyquist_floor(p);
    if res < floor {
        return Err(Error::ResolutionTooLow { res, floor });
    }
    Ok(())
}

fn running_max_abs(vals: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut best = 0.0f64;
    for v in vals {
        acc += v;
        best = best.max(acc.norm_sqr());
    }
    best.sqrt()
}

/// `D p = sup_{1 <= n <= N} |E(p | F_n)|` sampled on the `res^N` grid.
pub fn doob_max_grid(p: &TrigPoly, res: usize) -> Result<GridFunction<f64>> {
    check_resolution(p, res)?;
    let n = p.dim();
    // first piece is d_0 + d_1 = E(p | F_1); the sup starts at n = 1
    let mut pieces = vec![cond_expect(p, 1)?];
    for j in 2..=n {
        pieces.push(mart_diff(p, j)?);
    }
    let values = reduce_pieces(&pieces, res, running_max_abs)?;
    GridFunction::from_values(n, res, values)
}

fn conjugated_differences(p: &TrigPoly) -> Result<Vec<TrigPoly>> {
    (1..=p.dim())
        .map(|j| conjugate_j(&mart_diff(p, j)?, j))
        .collect()
}

/// `M p = sup_{1 <= n <= N} |sum_{j=1}^n d_j(H_j p)|` sampled on the grid.
pub fn maximal_conj_grid(p: &TrigPoly, res: usize) -> Result<GridFunction<f64>> {
    check_resolution(p, res)?;
    let values = reduce_pieces(&conjugated_differences(p)?, res, running_max_abs)?;
    GridFunction::from_values(p.dim(), res, values)
}

/// `S p = (sum_j |H_j d_j p|^2)^{1/2}` sampled on the grid.
pub fn square_fn_grid(p: &TrigPoly, res: usize) -> Result<GridFunction<f64>> {
    check_resolution(p, res)?;
    let values = reduce_pieces(&conjugated_differences(p)?, res, |vals| {
        vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    })?;
    GridFunction::from_values(p.dim(), res, values)
}
