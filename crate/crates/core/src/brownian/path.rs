use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::stats::EnsembleStats;
use crate::error::{Error, Result};

/// Exit before this time is certain for all practical purposes
/// (`P(tau > 50)` is of order `e^{-144}`).
pub const DEFAULT_T_CAP: f64 = 50.0;

const MAX_DT: f64 = 1e-2;

/// One complex Brownian motion stopped on the unit circle.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinatePath {
    pub seed: u64,
    pub dt: f64,
    /// `(t, c_t)` at `t = 0, dt, 2 dt, ...` while inside the disk, followed by
    /// `(tau, exit_point)`.
    pub samples: Vec<(f64, Complex64)>,
    pub tau: f64,
    pub exit_point: Complex64,
}

impl CoordinatePath {
    /// `c_{s ^ tau}` read off the sampled path (last sample at or before `s`).
    pub fn position_at(&self, s: f64) -> Complex64 {
        if s >= self.tau {
            return self.exit_point;
        }
        let k = ((s / self.dt) + 1e-9).floor().max(0.0) as usize;
        self.samples[k.min(self.samples.len() - 1)].1
    }

    pub fn exit_angle(&self) -> f64 {
        self.exit_point.arg()
    }
}

/// Simulates one path from the origin until it leaves the unit disk.
pub fn simulate_exit(seed: u64, dt: f64, t_cap: f64) -> Result<CoordinatePath> {
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::InvalidParameter(format!(
            "time step must lie in (0, {MAX_DT}], got {dt}"
        )));
    }
    if t_cap.is_nan() || t_cap <= 0.0 {
        return Err(Error::InvalidParameter(format!("t_cap must be positive, got {t_cap}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = dt.sqrt();
    let mut z = Complex64::new(0.0, 0.0);
    let mut samples = Vec::with_capacity((0.6 / dt) as usize);
    samples.push((0.0, z));
    let mut step: u64 = 0;
    loop {
        let t = step as f64 * dt;
        if t + dt > t_cap {
            return Err(Error::CapHit { seed, t_cap });
        }
        let dx: f64 = StandardNormal.sample(&mut rng);
        let dy: f64 = StandardNormal.sample(&mut rng);
        let d = Complex64::new(sd * dx, sd * dy);
        let w = z + d;
        if w.norm_sqr() >= 1.0 {
            // smallest s in (0, 1] with |z + s d| = 1
            let a = d.norm_sqr();
            let b = 2.0 * (z.conj() * d).re;
            let c = z.norm_sqr() - 1.0;
            let s = ((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
            let crossing = z + d * s;
            let exit_point = Complex64::from_polar(1.0, crossing.arg());
            let tau = t + s * dt;
            samples.push((tau, exit_point));
            return Ok(CoordinatePath {
                seed,
                dt,
                samples,
                tau,
                exit_point,
            });
        }
        z = w;
        step += 1;
        samples.push((step as f64 * dt, z));
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of path `path` for coordinate `coord` under `master`.
pub fn path_seed(master: u64, coord: usize, path: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ coord as u64) ^ path as u64)
}

/// Parameters of a Monte Carlo ensemble of independent path tuples.
///
/// Coordinate `n` of path `k` is always seeded with `path_seed(seed, n, k)`,
/// so ensembles of different dimensions share their leading coordinates and
/// results do not depend on thread count.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub t_cap: f64,
}

impl EnsembleConfig {
    pub fn new(n_paths: usize, dt: f64, seed: u64) -> Self {
        EnsembleConfig {
            n_paths,
            dt,
            seed,
            t_cap: DEFAULT_T_CAP,
        }
    }

    /// The `dim` coordinate paths of path tuple `k`.
    pub fn path_tuple(&self, dim: usize, k: usize) -> Result<Vec<CoordinatePath>> {
        (1..=dim)
            .map(|n| simulate_exit(path_seed(self.seed, n, k), self.dt, self.t_cap))
            .collect()
    }

    /// Applies `f` to every path tuple; results come back in path order.
    pub fn map_paths<T, F>(&self, dim: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &[CoordinatePath]) -> Result<T> + Sync,
    {
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one path".into()));
        }
        (0..self.n_paths)
            .into_par_iter()
            .map(|k| {
                let paths = self.path_tuple(dim, k)?;
                f(k, &paths)
            })
            .collect()
    }
}

/// Empirical law of the first exit from the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitLaw {
    pub tau: EnsembleStats,
    /// Kolmogorov-Smirnov distance of the exit angles from the uniform law
    pub ks_uniform: f64,
}

/// Exit times and angles of the first coordinate over the ensemble.
pub fn exit_law(cfg: &EnsembleConfig) -> Result<ExitLaw> {
    let exits = cfg.map_paths(1, |_, paths| Ok((paths[0].tau, paths[0].exit_angle())))?;
    let taus: Vec<f64> = exits.iter().map(|e| e.0).collect();
    let mut u: Vec<f64> = exits.iter().map(|e| (e.1 + PI) / TAU).collect();
    u.sort_unstable_by(f64::total_cmp);
    let n = u.len() as f64;
    let ks = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max);
    Ok(ExitLaw {
        tau: EnsembleStats::from_samples(&taus),
        ks_uniform: ks,
    })
}
