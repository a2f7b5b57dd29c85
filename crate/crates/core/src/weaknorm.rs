//! Distribution functions, `L^1`/`L^2` norms and weak-`L^1` norms of sampled
//! functions.
//!
//! The weak norm `||g||*_1 = sup_{y > 0} y P(|g| > y)` of a step function is
//! attained at its own values with the `>=` convention, so it is computed
//! exactly as `max_v v * P(|g| >= v)` over the observed magnitudes `v`.

use crate::csvout::CsvTable;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, Magnitude};
use crate::operators::maximal_conj_grid;
use crate::trigpoly::TrigPoly;

/// Exponent of a Lebesgue norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lp {
    L1,
    L2,
}

/// Fraction of grid points with `|g| > y`.
pub fn distribution<T: Magnitude>(g: &GridFunction<T>, y: f64) -> Result<f64> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::InvalidParameter(format!("level must be positive, got {y}")));
    }
    let above = g.values().iter().filter(|v| v.magnitude() > y).count();
    Ok(above as f64 / g.len() as f64)
}

/// Rectangle-rule `(mean |g|^p)^{1/p}`.
pub fn norm<T: Magnitude>(g: &GridFunction<T>, p: Lp) -> f64 {
    let n = g.len() as f64;
    match p {
        Lp::L1 => g.values().iter().map(|v| v.magnitude()).sum::<f64>() / n,
        Lp::L2 => {
            let s: f64 = g.values().iter().map(|v| v.magnitude().powi(2)).sum();
            (s / n).sqrt()
        }
    }
}

/// Where the weak-`L^1` supremum of a sample is attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakLevel {
    /// `max_v v * P(|g| >= v)`
    pub value: f64,
    /// the maximizing magnitude `v`
    pub level: f64,
    /// `P(|g| >= level)`
    pub fraction: f64,
}

/// Weak-`L^1` norm of an empirical sample of magnitudes (any order, all
/// entries must be nonnegative).
pub fn weak_l1_level(magnitudes: &[f64]) -> WeakLevel {
    weak_level_of(magnitudes.iter().copied())
}

fn weak_level_of<I: Iterator<Item = f64> + Clone>(magnitudes: I) -> WeakLevel {
    let empty = WeakLevel {
        value: 0.0,
        level: 0.0,
        fraction: 0.0,
    };
    let (n, top) = magnitudes.clone().fold((0usize, 0.0f64), |(n, t), v| (n + 1, t.max(v)));
    if n == 0 || !top.is_normal() {
        return sorted_scan(&magnitudes.collect::<Vec<_>>(), empty);
    }

    // Bucket by magnitude, bound each bucket's best value from above, and
    // sort only the buckets that can still beat the best lower bound.
    const BUCKETS: usize = 4096;
    const PAD: f64 = 1e-9;
    let scale = BUCKETS as f64 / top;
    let bucket = |v: f64| ((v * scale) as usize).min(BUCKETS - 1);
    let mut count = vec![0usize; BUCKETS];
    for v in magnitudes.clone() {
        count[bucket(v)] += 1;
    }
    let mut at_least = vec![0usize; BUCKETS + 1];
    for b in (0..BUCKETS).rev() {
        at_least[b] = at_least[b + 1] + count[b];
    }
    let frac = |k: usize| k as f64 / n as f64;
    let floor = (0..BUCKETS)
        .filter(|&b| count[b] > 0)
        .map(|b| b as f64 / scale * frac(at_least[b]) * (1.0 - PAD))
        .fold(0.0, f64::max);
    let keep: Vec<bool> = (0..BUCKETS)
        .map(|b| {
            let ceil = if b + 1 == BUCKETS { top } else { (b + 1) as f64 / scale };
            count[b] > 0 && ceil * frac(at_least[b]) * (1.0 + PAD) >= floor
        })
        .collect();

    let mut members: Vec<Vec<f64>> = vec![Vec::new(); BUCKETS];
    for v in magnitudes {
        let b = bucket(v);
        if keep[b] {
            members[b].push(v);
        }
    }
    let mut best = empty;
    for (b, vals) in members.iter_mut().enumerate() {
        vals.sort_unstable_by(f64::total_cmp);
        for i in 0..vals.len() {
            if i > 0 && vals[i] == vals[i - 1] {
                continue;
            }
            let fraction = frac(at_least[b] - i);
            let value = vals[i] * fraction;
            if value > best.value {
                best = WeakLevel {
                    value,
                    level: vals[i],
                    fraction,
                };
            }
        }
    }
    best
}

fn sorted_scan(magnitudes: &[f64], mut best: WeakLevel) -> WeakLevel {
    let n = magnitudes.len();
    let mut sorted = magnitudes.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    for i in 0..n {
        if i > 0 && sorted[i] == sorted[i - 1] {
            continue;
        }
        let fraction = (n - i) as f64 / n as f64;
        let value = sorted[i] * fraction;
        if value > best.value {
            best = WeakLevel {
                value,
                level: sorted[i],
                fraction,
            };
        }
    }
    best
}

/// `||g||*_1` of a grid function.
pub fn weak_l1<T: Magnitude>(g: &GridFunction<T>) -> f64 {
    weak_level_of(g.values().iter().map(|v| v.magnitude())).value
}

/// One empirical sample of the weak-type ratio `||M f||*_1 / ||f||_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakRatioRecord {
    pub dim: usize,
    pub res: usize,
    pub seed: u64,
    pub l1: f64,
    pub weak_l1_of_m: f64,
    pub ratio: f64,
}

impl WeakRatioRecord {
    pub const CSV_HEADER: [&'static str; 6] = ["dim", "res", "seed", "l1", "weakM", "ratio"];

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn push_to(&self, table: &mut CsvTable) {
        table.push_row([
            self.dim.to_string(),
            self.res.to_string(),
            self.seed.to_string(),
            self.l1.to_string(),
            self.weak_l1_of_m.to_string(),
            self.ratio.to_string(),
        ]);
    }
}

/// `||M p||*_1 / ||p||_1` on the `res^N` grid. `p` must be real and nonzero.
pub fn weak_type_ratio(p: &TrigPoly, res: usize) -> Result<WeakRatioRecord> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_real() {
        return Err(Error::NotReal);
    }
    let m = maximal_conj_grid(p, res)?;
    let weak_l1_of_m = weak_l1(&m);
    drop(m);
    let l1 = norm(&GridFunction::sample_real(p, res)?, Lp::L1);
    Ok(WeakRatioRecord {
        dim: p.dim(),
        res,
        seed: 0,
        l1,
        weak_l1_of_m,
        ratio: if l1 > 0.0 { weak_l1_of_m / l1 } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::doob_max_grid;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn grid1(values: Vec<f64>) -> GridFunction<f64> {
        let n = values.len();
        GridFunction::from_values(1, n, values).unwrap()
    }

    fn cos_samples(res: usize) -> GridFunction<f64> {
        grid1((0..res).map(|k| (TAU * k as f64 / res as f64).cos()).collect())
    }

    #[test]
    fn distribution_examples() {
        let two = grid1(vec![2.0; 8]);
        assert_eq!(distribution(&two, 1.0).unwrap(), 1.0);
        assert_eq!(distribution(&two, 3.0).unwrap(), 0.0);
        // brute count: {3, 4} exceed 2.5
        assert_eq!(distribution(&grid1(vec![1.0, 2.0, 3.0, 4.0]), 2.5).unwrap(), 0.5);
        assert!(distribution(&two, 0.0).is_err());
    }

    #[test]
    fn norm_examples() {
        let c = grid1(vec![-1.5; 16]);
        assert_eq!(norm(&c, Lp::L1), 1.5);
        assert!((norm(&c, Lp::L2) - 1.5).abs() < 1e-15);
        assert!((norm(&cos_samples(64), Lp::L2) - FRAC_1_SQRT_2).abs() < 1e-12);
        // int |cos| / 2pi = 2 / pi
        assert!((norm(&cos_samples(256), Lp::L1) - 2.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn weak_l1_examples() {
        assert_eq!(weak_l1(&grid1(vec![2.0; 4])), 2.0);
        // levels: 1*1, 2*3/4, 3*1/2, 4*1/4
        let brute = [1.0 * 1.0, 2.0 * 0.75, 3.0 * 0.5, 4.0 * 0.25]
            .into_iter()
            .fold(0.0, f64::max);
        assert_eq!(brute, 1.5);
        assert_eq!(weak_l1(&grid1(vec![3.0, 1.0, 4.0, 2.0])), brute);
        assert_eq!(weak_l1(&grid1(vec![0.0; 4])), 0.0);
    }

    #[test]
    fn weak_type_ratio_examples() {
        let cos1 = TrigPoly::new(
            1,
            [([1].into(), Complex64::new(0.5, 0.0)), ([-1].into(), Complex64::new(0.5, 0.0))],
        )
        .unwrap();
        let rec = weak_type_ratio(&cos1, 256).unwrap();
        // M cos = |sin|; closed forms: ||cos||_1 = 2/pi and
        // sup_y y P(|sin| > y) = max_y y (1 - 2 asin(y) / pi)
        assert!((rec.l1 - 2.0 / PI).abs() < 1e-4);
        let closed_weak = (0..=100_000)
            .map(|i| {
                let y = i as f64 / 100_000.0;
                y * (1.0 - 2.0 * y.asin() / PI)
            })
            .fold(0.0, f64::max);
        assert!((rec.weak_l1_of_m - closed_weak).abs() < 1e-2);
        let sin_grid = grid1((0..256).map(|k| (TAU * k as f64 / 256.0).sin().abs()).collect());
        let direct = weak_l1(&sin_grid) / norm(&cos_samples(256), Lp::L1);
        assert!((rec.ratio - direct).abs() < 1e-12);

        let constant = TrigPoly::constant(2, Complex64::new(3.0, 0.0));
        let rec = weak_type_ratio(&constant, 8).unwrap();
        assert_eq!(rec.ratio, 0.0);
        assert_eq!(rec.l1, 3.0);

        assert_eq!(weak_type_ratio(&TrigPoly::zero(1), 8), Err(Error::ZeroPolynomial));
        let complex = TrigPoly::monomial([1], Complex64::new(1.0, 0.0));
        assert_eq!(weak_type_ratio(&complex, 8), Err(Error::NotReal));
    }

    fn arb_grid() -> impl Strategy<Value = GridFunction<f64>> {
        (1usize..64).prop_flat_map(|n| {
            prop::collection::vec(-10.0..10.0f64, n).prop_map(grid1)
        })
    }

    proptest! {
        #[test]
        fn bucketed_level_matches_full_sort(
            vals in prop::collection::vec(0.0f64..10.0, 1..3000),
            ties in 0usize..4,
        ) {
            // coarse rounding forces repeated magnitudes
            let vals: Vec<f64> = if ties == 0 { vals } else {
                let s = [0.0, 1.0, 8.0, 64.0][ties];
                vals.iter().map(|v| (v * s).round() / s).collect()
            };
            let empty = WeakLevel { value: 0.0, level: 0.0, fraction: 0.0 };
            prop_assert_eq!(weak_l1_level(&vals), sorted_scan(&vals, empty));
        }

        #[test]
        fn distribution_is_nonincreasing(g in arb_grid(), mut levels in prop::collection::vec(1e-6..12.0f64, 20)) {
            levels.sort_by(f64::total_cmp);
            let values: Vec<f64> = levels.iter().map(|&y| distribution(&g, y).unwrap()).collect();
            prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
            prop_assert_eq!(distribution(&g, g.max_magnitude().max(1e-9)).unwrap(), 0.0);
        }

        #[test]
        fn chebyshev_and_scaling(g in arb_grid(), c in 1e-3..1e3f64) {
            prop_assert!(weak_l1(&g) <= norm(&g, Lp::L1) + 1e-12);
            // scaling by a power of two is exact in floating point
            let k = c.log2().round();
            let s = 2f64.powf(k);
            prop_assert_eq!(weak_l1(&g.map(|v| s * v)), s * weak_l1(&g));
        }
    }

    #[test]
    fn doob_inequality_with_constant_one() {
        for seed in 0..40 {
            let dim = 1 + (seed as usize % 3);
            let f = TrigPoly::random_real(dim, 3, seed, seed % 2 == 0).unwrap();
            let res = 32;
            let d = doob_max_grid(&f, res).unwrap();
            let l1 = norm(&GridFunction::sample_real(&f, res).unwrap(), Lp::L1);
            assert!(weak_l1(&d) <= 1.02 * l1, "seed {seed}");
        }
    }
}
