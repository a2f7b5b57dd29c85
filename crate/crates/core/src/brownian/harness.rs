//! Monte Carlo checks of the martingale construction.
//!
//! For real `f` with zero mean, `g = f + iHf` is analytic and its trace is
//! `G = F + i F~`, where `F` and `F~` are the traces of `f` and `Hf`. The
//! harnesses below therefore run a single trace of `g` per path and read
//! `F = Re G`, `F~ = Im G` off it.

use std::fmt;

use num_complex::Complex64;

use super::path::{CoordinatePath, EnsembleConfig};
use super::stats::{ComplexStats, EnsembleStats, StatRow};
use super::time::TimeIndex;
use super::trace::{build_trace, TraceEvaluator};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operators::{analytic_completion, maximal_conj_grid};
use crate::trigpoly::TrigPoly;
use crate::weaknorm::{norm, weak_l1, weak_l1_level, Lp};

/// Probe constants tried for the conclusion of the good-lambda inequality.
pub const PROBE_CONSTANTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

fn require_real_centered(f: &TrigPoly) -> Result<()> {
    if !f.is_real() {
        return Err(Error::NotReal);
    }
    if f.mean().norm() > 1e-12 {
        return Err(Error::InvalidParameter(
            "polynomial must have zero mean".into(),
        ));
    }
    Ok(())
}

/// Maxima of `|G|`, `|F|`, `|F~|` and the terminal `|F_inf|` on one path tuple.
#[derive(Clone, Copy, Debug, Default)]
struct PathSummary {
    abs_terminal: f64,
    f_star: f64,
    ft_star: f64,
    g_star: f64,
}

fn summarize(eval_g: &TraceEvaluator, paths: &[CoordinatePath]) -> Result<PathSummary> {
    let mut s = PathSummary::default();
    let terminal = eval_g.walk(&paths[..eval_g.dim()], |_, v| {
        s.f_star = s.f_star.max(v.re.abs());
        s.ft_star = s.ft_star.max(v.im.abs());
        s.g_star = s.g_star.max(v.norm());
    })?;
    s.abs_terminal = terminal.re.abs();
    Ok(s)
}

/// Per-polynomial summaries over one shared ensemble.
fn summarize_batch(fs: &[TrigPoly], cfg: &EnsembleConfig) -> Result<Vec<Vec<PathSummary>>> {
    for f in fs {
        require_real_centered(f)?;
    }
    let evals: Vec<TraceEvaluator> = fs
        .iter()
        .map(|f| TraceEvaluator::new(&analytic_completion(f)))
        .collect();
    let dim = fs.iter().map(TrigPoly::dim).max().unwrap_or(1);
    let per_path = cfg.map_paths(dim, |_, paths| {
        evals.iter().map(|e| summarize(e, paths)).collect::<Result<Vec<_>>>()
    })?;
    Ok((0..fs.len())
        .map(|i| per_path.iter().map(|row| row[i]).collect())
        .collect())
}

/// Weak-`L^1` norm of a sample with the binomial standard error of the
/// level set at the maximizing level.
fn weak_estimate(samples: &[f64]) -> EnsembleStats {
    let n = samples.len();
    let w = weak_l1_level(samples);
    let se = w.level * (w.fraction * (1.0 - w.fraction) / n as f64).sqrt();
    EnsembleStats::estimate(n, w.value, se).with_extra("level", w.level)
}

/// The chain linking `M f` to the Brownian maximal function:
/// `E|F_inf| = ||f||_1` (step 1), `||F*||*_1 <= ||F_inf||_1` (step 2) and
/// `||M f||*_1 <= ||F~*||*_1` (step 4).
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    /// `||f||_1` by grid quadrature
    pub l1_f: f64,
    /// `E |F_inf|`
    pub terminal_l1: EnsembleStats,
    /// `||F*||*_1`
    pub weak_f_star: EnsembleStats,
    /// `||M f||*_1` on the grid
    pub weak_m_grid: f64,
    /// `||F~*||*_1`
    pub weak_ft_star: EnsembleStats,
}

impl StepReport {
    /// `E|F_inf| = ||f||_1`
    pub fn step1_holds(&self, k_se: f64) -> bool {
        self.terminal_l1.consistent_with(self.l1_f, k_se)
    }

    /// `||F*||*_1 <= ||F_inf||_1`
    pub fn step2_holds(&self, k_se: f64) -> bool {
        self.weak_f_star.mean <= self.terminal_l1.mean + k_se * self.terminal_l1.std_error + 1e-12
    }

    /// `||M f||*_1 <= ||F~*||*_1`, allowing `slack * ||f||_1` for grid sampling.
    pub fn step4_holds(&self, k_se: f64, slack: f64) -> bool {
        self.weak_m_grid
            <= self.weak_ft_star.mean + k_se * self.weak_ft_star.std_error + slack * self.l1_f + 1e-12
    }

    pub fn rows(&self, prefix: &str) -> Vec<StatRow> {
        let mut rows = vec![StatRow::exact(format!("{prefix}l1_f"), self.l1_f)];
        rows.extend(StatRow::from_stats(format!("{prefix}step1.mean_abs_terminal"), &self.terminal_l1));
        rows.extend(StatRow::from_stats(format!("{prefix}step2.weak_f_star"), &self.weak_f_star));
        rows.push(StatRow::exact(format!("{prefix}step4.weak_m_grid"), self.weak_m_grid));
        rows.extend(StatRow::from_stats(format!("{prefix}step4.weak_ft_star"), &self.weak_ft_star));
        rows
    }
}

/// The `M f` to `F~*` chain for one real, zero-mean polynomial.
pub fn verify_steps(f: &TrigPoly, cfg: &EnsembleConfig, res: usize) -> Result<StepReport> {
    Ok(verify_steps_batch(std::slice::from_ref(f), cfg, res)?.remove(0))
}

/// The `M f` to `F~*` chain for several polynomials driven by one shared ensemble.
pub fn verify_steps_batch(fs: &[TrigPoly], cfg: &EnsembleConfig, res: usize) -> Result<Vec<StepReport>> {
    let summaries = summarize_batch(fs, cfg)?;
    fs.iter()
        .zip(summaries)
        .map(|(f, s)| {
            let terminal: Vec<f64> = s.iter().map(|x| x.abs_terminal).collect();
            let f_star: Vec<f64> = s.iter().map(|x| x.f_star).collect();
            let ft_star: Vec<f64> = s.iter().map(|x| x.ft_star).collect();
            Ok(StepReport {
                l1_f: norm(&GridFunction::sample_real(f, res)?, Lp::L1),
                terminal_l1: EnsembleStats::from_samples(&terminal),
                weak_f_star: weak_estimate(&f_star),
                weak_m_grid: weak_l1(&maximal_conj_grid(f, res)?),
                weak_ft_star: weak_estimate(&ft_star),
            })
        })
        .collect()
}

/// Bounded functionals of the path up to a time index, used as test
/// functions for the martingale property.
#[derive(Clone, Debug, PartialEq)]
pub enum Functional {
    Const(f64),
    /// `Re c_{coord, t}` (stopped at the exit time)
    Re { coord: usize, t: f64 },
    /// `Im c_{coord, t}` (stopped at the exit time)
    Im { coord: usize, t: f64 },
    Product(Box<Functional>, Box<Functional>),
    /// `sgn` with `sgn(0) = 0`
    Sign(Box<Functional>),
}

impl Functional {
    /// Latest time index the functional reads.
    pub fn latest(&self) -> Option<TimeIndex> {
        match self {
            Functional::Const(_) => None,
            Functional::Re { coord, t } | Functional::Im { coord, t } => Some(TimeIndex::at(*coord, *t)),
            Functional::Product(a, b) => a.latest().max(b.latest()),
            Functional::Sign(a) => a.latest(),
        }
    }

    fn max_coord(&self) -> usize {
        match self {
            Functional::Const(_) => 0,
            Functional::Re { coord, .. } | Functional::Im { coord, .. } => *coord,
            Functional::Product(a, b) => a.max_coord().max(b.max_coord()),
            Functional::Sign(a) => a.max_coord(),
        }
    }

    /// Rejects functionals that look past `checkpoint` or outside `1..=dim`.
    pub fn check(&self, checkpoint: TimeIndex, dim: usize) -> Result<()> {
        if self.max_coord() > dim {
            return Err(Error::OutOfRange {
                what: "functional coordinate",
                value: self.max_coord(),
                min: 1,
                max: dim,
            });
        }
        if let Some(latest) = self.latest() {
            if latest > checkpoint {
                return Err(Error::NotPastMeasurable {
                    referenced: latest.to_string(),
                    checkpoint: checkpoint.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, paths: &[CoordinatePath]) -> f64 {
        match self {
            Functional::Const(c) => *c,
            Functional::Re { coord, t } => paths[coord - 1].position_at(*t).re,
            Functional::Im { coord, t } => paths[coord - 1].position_at(*t).im,
            Functional::Product(a, b) => a.eval(paths) * b.eval(paths),
            Functional::Sign(a) => {
                let v = a.eval(paths);
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The built-in test functionals for a checkpoint `(n, t)`: a constant,
    /// `Re`/`Im` of `c_{n, t/2}`, their product, a sign, and for `n > 1` a
    /// product reaching back into coordinate `n - 1`.
    pub fn catalogue(checkpoint: TimeIndex, dim: usize) -> Vec<Functional> {
        let (n, t) = match checkpoint {
            TimeIndex::At { coord, t } => (coord, t),
            TimeIndex::Infinity => (dim, 1.0),
        };
        let s = t / 2.0;
        let re = Functional::Re { coord: n, t: s };
        let im = Functional::Im { coord: n, t: s };
        let mut out = vec![
            Functional::Const(1.0),
            re.clone(),
            im.clone(),
            Functional::Product(Box::new(re.clone()), Box::new(im)),
            Functional::Sign(Box::new(re.clone())),
        ];
        if n > 1 {
            let back = Functional::Re { coord: n - 1, t: 0.25 };
            out.push(Functional::Product(Box::new(back), Box::new(re)));
        }
        out
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Const(c) => write!(f, "{c}"),
            Functional::Re { coord, t } => write!(f, "re_c{coord}({t})"),
            Functional::Im { coord, t } => write!(f, "im_c{coord}({t})"),
            Functional::Product(a, b) => write!(f, "{a}*{b}"),
            Functional::Sign(a) => write!(f, "sgn({a})"),
        }
    }
}

/// Mean of `(F_inf - F_checkpoint) * w` with its standard error.
pub fn increment_orthogonality(
    f: &TrigPoly,
    checkpoint: TimeIndex,
    functional: &Functional,
    cfg: &EnsembleConfig,
) -> Result<ComplexStats> {
    Ok(increment_orthogonality_batch(f, &[(checkpoint, functional.clone())], cfg)?.remove(0))
}

/// [`increment_orthogonality`] for several (checkpoint, functional) pairs
/// over one ensemble.
pub fn increment_orthogonality_batch(
    f: &TrigPoly,
    tests: &[(TimeIndex, Functional)],
    cfg: &EnsembleConfig,
) -> Result<Vec<ComplexStats>> {
    let dim = f.dim();
    for (cp, w) in tests {
        if let TimeIndex::At { coord, .. } = cp {
            if *coord == 0 || *coord > dim {
                return Err(Error::OutOfRange {
                    what: "checkpoint coordinate",
                    value: *coord,
                    min: 1,
                    max: dim,
                });
            }
        }
        w.check(*cp, dim)?;
    }
    let per_path = cfg.map_paths(dim, |_, paths| {
        let trace = build_trace(f, paths)?;
        Ok(tests
            .iter()
            .map(|(cp, w)| (trace.terminal - trace.value_at(*cp)) * w.eval(paths))
            .collect::<Vec<Complex64>>())
    })?;
    Ok((0..tests.len())
        .map(|i| {
            let re: Vec<f64> = per_path.iter().map(|row| row[i].re).collect();
            let im: Vec<f64> = per_path.iter().map(|row| row[i].im).collect();
            ComplexStats {
                re: EnsembleStats::from_samples(&re),
                im: EnsembleStats::from_samples(&im),
            }
        })
        .collect())
}

/// Outcome of comparing the traces of `h = g^2` and `g^2` pathwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareCheck {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `max |H_{n,t} - G_{n,t}^2|` over every sampled index of the ensemble.
pub fn analytic_square_check(f: &TrigPoly, cfg: &EnsembleConfig, tolerance: f64) -> Result<SquareCheck> {
    require_real_centered(f)?;
    let g = analytic_completion(f);
    let h = g.multiply(&g)?;
    let devs = cfg.map_paths(f.dim(), |_, paths| {
        let tg = build_trace(&g, paths)?;
        let th = build_trace(&h, paths)?;
        Ok(tg
            .values
            .iter()
            .zip(&th.values)
            .map(|((_, a), (_, b))| (b - a * a).norm())
            .fold(0.0, f64::max))
    })?;
    let max_deviation = devs.into_iter().fold(0.0, f64::max);
    Ok(SquareCheck {
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    })
}

/// `||F_nu - F_mu||_2` against `||F~_nu - F~_mu||_2` for first passages of `|G|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lemma23Report {
    pub level_lo: f64,
    pub level_hi: f64,
    pub norm_f: EnsembleStats,
    pub norm_ft: EnsembleStats,
    /// per-path `|dF~|^2 - |dF|^2`
    pub paired_difference: EnsembleStats,
}

impl Lemma23Report {
    /// The two norms agree within `k` combined standard errors.
    pub fn agrees(&self, k: f64) -> bool {
        let se = self.norm_f.std_error.hypot(self.norm_ft.std_error);
        (self.norm_f.mean - self.norm_ft.mean).abs() <= k * se + 1e-12
    }

    pub fn rows(&self, prefix: &str) -> Vec<StatRow> {
        let mut rows = vec![
            StatRow::exact(format!("{prefix}level_lo"), self.level_lo),
            StatRow::exact(format!("{prefix}level_hi"), self.level_hi),
        ];
        rows.extend(StatRow::from_stats(format!("{prefix}norm_f"), &self.norm_f));
        rows.extend(StatRow::from_stats(format!("{prefix}norm_ft"), &self.norm_ft));
        rows.extend(StatRow::from_stats(format!("{prefix}paired_difference"), &self.paired_difference));
        rows
    }
}

/// An `L^2` norm `sqrt(E X)` from squared samples `X`, with the delta-method
/// standard error.
fn l2_from_squares(squares: &[f64]) -> EnsembleStats {
    let s = EnsembleStats::from_samples(squares);
    let norm = s.mean.sqrt();
    let se = if norm > 0.0 { s.std_error / (2.0 * norm) } else { 0.0 };
    EnsembleStats::estimate(s.n_paths, norm, se)
        .with_extra("mean_square", s.mean)
        .with_extra("mean_square_se", s.std_error)
}

/// Stopped-increment `L^2` norms of `F` and `F~` between the first passages
/// of `|G|` above `level_lo` and above `level_hi`.
pub fn lemma23_stats(f: &TrigPoly, level_lo: f64, level_hi: f64, cfg: &EnsembleConfig) -> Result<Lemma23Report> {
    Ok(lemma23_batch(&[(f.clone(), level_lo, level_hi)], cfg)?.remove(0))
}

/// [`lemma23_stats`] for several `(f, level_lo, level_hi)` cases over one ensemble.
pub fn lemma23_batch(cases: &[(TrigPoly, f64, f64)], cfg: &EnsembleConfig) -> Result<Vec<Lemma23Report>> {
    for (f, lo, hi) in cases {
        if !(*lo > 0.0 && *hi > *lo) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < level_lo < level_hi, got ({lo}, {hi})"
            )));
        }
        require_real_centered(f)?;
    }
    let evals: Vec<TraceEvaluator> = cases
        .iter()
        .map(|(f, _, _)| TraceEvaluator::new(&analytic_completion(f)))
        .collect();
    let dim = cases.iter().map(|c| c.0.dim()).max().unwrap_or(1);
    let per_path = cfg.map_paths(dim, |_, paths| {
        evals
            .iter()
            .zip(cases)
            .map(|(e, (_, lo, hi))| {
                let (mut g_mu, mut g_nu) = (None, None);
                let terminal = e.walk(&paths[..e.dim()], |_, v| {
                    let r = v.norm();
                    if g_mu.is_none() && r > *lo {
                        g_mu = Some(v);
                    }
                    if g_nu.is_none() && r > *hi {
                        g_nu = Some(v);
                    }
                })?;
                let (mu_hit, nu_hit) = (g_mu.is_some(), g_nu.is_some());
                let d = g_nu.unwrap_or(terminal) - g_mu.unwrap_or(terminal);
                Ok((d.re * d.re, d.im * d.im, mu_hit, nu_hit))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(cases
        .iter()
        .enumerate()
        .map(|(i, (_, lo, hi))| {
            let col: Vec<_> = per_path.iter().map(|row| row[i]).collect();
            let n = col.len() as f64;
            let xs: Vec<f64> = col.iter().map(|r| r.0).collect();
            let ys: Vec<f64> = col.iter().map(|r| r.1).collect();
            let diffs: Vec<f64> = col.iter().map(|r| r.1 - r.0).collect();
            let hit_lo = col.iter().filter(|r| r.2).count() as f64 / n;
            let hit_hi = col.iter().filter(|r| r.3).count() as f64 / n;
            Lemma23Report {
                level_lo: *lo,
                level_hi: *hi,
                norm_f: l2_from_squares(&xs).with_extra("p_mu_finite", hit_lo),
                norm_ft: l2_from_squares(&ys).with_extra("p_nu_finite", hit_hi),
                paired_difference: EnsembleStats::from_samples(&diffs),
            }
        })
        .collect())
}

/// Per-path maxima `G*` and `F*` for good-lambda sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct GoodLambdaSamples {
    pub g_star: Vec<f64>,
    pub f_star: Vec<f64>,
}

/// One probe constant `c` of the conclusion `P(G* > l) <= c P(c F* > l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub c: f64,
    pub p_cf: EnsembleStats,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodLambdaReport {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `P(G* > lambda)`
    pub p_g: EnsembleStats,
    /// `P(G* > beta lambda)`
    pub p_g_beta: EnsembleStats,
    /// `P(G* > lambda) <= alpha P(G* > beta lambda)`
    pub hypothesis: bool,
    pub probes: Vec<ProbeResult>,
    pub smallest_probe: Option<f64>,
}

impl GoodLambdaReport {
    pub fn rows(&self, prefix: &str) -> Vec<StatRow> {
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let mut rows = vec![
            StatRow::exact(format!("{prefix}lambda"), self.lambda),
            StatRow::exact(format!("{prefix}alpha"), self.alpha),
            StatRow::exact(format!("{prefix}beta"), self.beta),
        ];
        rows.extend(StatRow::from_stats(format!("{prefix}p_gstar_gt_lambda"), &self.p_g));
        rows.extend(StatRow::from_stats(format!("{prefix}p_gstar_gt_beta_lambda"), &self.p_g_beta));
        rows.push(StatRow::exact(format!("{prefix}hypothesis"), flag(self.hypothesis)));
        for p in &self.probes {
            rows.extend(StatRow::from_stats(format!("{prefix}probe{}.p_c_fstar_gt_lambda", p.c), &p.p_cf));
            rows.push(StatRow::exact(format!("{prefix}probe{}.holds", p.c), flag(p.holds)));
        }
        rows.push(StatRow::exact(
            format!("{prefix}smallest_probe"),
            self.smallest_probe.unwrap_or(f64::NAN),
        ));
        rows
    }
}

impl GoodLambdaSamples {
    pub fn collect(f: &TrigPoly, cfg: &EnsembleConfig) -> Result<Self> {
        Ok(Self::collect_batch(std::slice::from_ref(f), cfg)?.remove(0))
    }

    pub fn collect_batch(fs: &[TrigPoly], cfg: &EnsembleConfig) -> Result<Vec<Self>> {
        Ok(summarize_batch(fs, cfg)?
            .into_iter()
            .map(|s| GoodLambdaSamples {
                g_star: s.iter().map(|x| x.g_star).collect(),
                f_star: s.iter().map(|x| x.f_star).collect(),
            })
            .collect())
    }

    pub fn n_paths(&self) -> usize {
        self.g_star.len()
    }

    /// A level `l0` with `2 l0 P(G* > 2 l0) >= ||G*||*_1 / 2`, or `None`
    /// when `G*` vanishes identically.
    pub fn lambda0(&self) -> Option<f64> {
        let w = weak_l1_level(&self.g_star);
        if w.value <= 0.0 {
            return None;
        }
        // just below the maximizing level, P(G* > 2 l0) = P(G* >= level)
        let l0 = 0.5 * w.level * (1.0 - 1e-9);
        let n = self.g_star.len() as f64;
        let tail = self.g_star.iter().filter(|&&v| v > 2.0 * l0).count() as f64 / n;
        debug_assert!(2.0 * l0 * tail >= 0.5 * w.value);
        Some(l0)
    }

    pub fn report(&self, lambda: f64, alpha: f64, beta: f64) -> Result<GoodLambdaReport> {
        if !(lambda > 0.0 && alpha >= 1.0 && beta > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need lambda > 0, alpha >= 1, beta > 1; got ({lambda}, {alpha}, {beta})"
            )));
        }
        let n = self.n_paths();
        let count = |xs: &[f64], scale: f64, level: f64| xs.iter().filter(|&&v| scale * v > level).count();
        let p_g = EnsembleStats::proportion(count(&self.g_star, 1.0, lambda), n);
        let p_g_beta = EnsembleStats::proportion(count(&self.g_star, 1.0, beta * lambda), n);
        let hypothesis = p_g.mean <= alpha * p_g_beta.mean;
        let probes: Vec<ProbeResult> = PROBE_CONSTANTS
            .iter()
            .map(|&c| {
                let p_cf = EnsembleStats::proportion(count(&self.f_star, c, lambda), n);
                let holds = p_g.mean <= c * p_cf.mean;
                ProbeResult { c, p_cf, holds }
            })
            .collect();
        let smallest_probe = probes.iter().find(|p| p.holds).map(|p| p.c);
        Ok(GoodLambdaReport {
            lambda,
            alpha,
            beta,
            p_g,
            p_g_beta,
            hypothesis,
            probes,
            smallest_probe,
        })
    }
}

/// Good-lambda probe sweep at one level.
pub fn goodlambda_stats(
    f: &TrigPoly,
    lambda: f64,
    alpha: f64,
    beta: f64,
    cfg: &EnsembleConfig,
) -> Result<GoodLambdaReport> {
    GoodLambdaSamples::collect(f, cfg)?.report(lambda, alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::trace::first_passage;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos1() -> TrigPoly {
        TrigPoly::new(1, [([1].into(), c(0.5, 0.0)), ([-1].into(), c(0.5, 0.0))]).unwrap()
    }

    #[test]
    fn zero_polynomial_reports_zeros() {
        let cfg = EnsembleConfig::new(50, 1e-3, 1);
        let z = TrigPoly::zero(2);
        let r = verify_steps(&z, &cfg, 16).unwrap();
        assert_eq!(r.l1_f, 0.0);
        assert_eq!(r.terminal_l1.mean, 0.0);
        assert_eq!(r.weak_f_star.mean, 0.0);
        assert_eq!(r.weak_m_grid, 0.0);
        assert!(r.step1_holds(3.0) && r.step2_holds(3.0) && r.step4_holds(3.0, 0.05));

        let l = lemma23_stats(&z, 0.3, 0.6, &cfg).unwrap();
        assert_eq!((l.norm_f.mean, l.norm_ft.mean), (0.0, 0.0));
        assert!(l.agrees(3.0));

        let g = goodlambda_stats(&z, 0.5, 4.0, 2.0, &cfg).unwrap();
        assert_eq!(g.p_g.mean, 0.0);
        assert!(g.hypothesis);
        assert_eq!(g.smallest_probe, Some(1.0));

        assert_eq!(analytic_square_check(&z, &cfg, 1e-9).unwrap().max_deviation, 0.0);
    }

    #[test]
    fn cosine_square_identity_is_exact() {
        let cfg = EnsembleConfig::new(20, 1e-3, 2);
        let chk = analytic_square_check(&cos1(), &cfg, 1e-12).unwrap();
        assert!(chk.passed, "{}", chk.max_deviation);
    }

    #[test]
    fn step1_for_cosine() {
        // exit angle uniform => E|cos U| = 2/pi
        let cfg = EnsembleConfig::new(2000, 1e-3, 5);
        let r = verify_steps(&cos1(), &cfg, 64).unwrap();
        assert!((r.l1_f - 2.0 / PI).abs() < 1e-3);
        assert!(r.terminal_l1.consistent_with(2.0 / PI, 3.0), "{:?}", r.terminal_l1);
        assert!(r.step2_holds(3.0));
    }

    #[test]
    fn functional_contract() {
        let cp = TimeIndex::at(1, 0.1);
        let late = Functional::Re { coord: 2, t: 0.0 };
        assert!(matches!(late.check(cp, 2), Err(Error::NotPastMeasurable { .. })));
        let too_late = Functional::Sign(Box::new(Functional::Im { coord: 1, t: 0.2 }));
        assert!(too_late.check(cp, 1).is_err());
        for w in Functional::catalogue(TimeIndex::at(2, 0.1), 2) {
            w.check(TimeIndex::at(2, 0.1), 2).unwrap();
        }
        let f = TrigPoly::monomial([1], c(1.0, 0.0));
        let cfg = EnsembleConfig::new(10, 1e-3, 1);
        assert!(increment_orthogonality(&f, TimeIndex::at(1, 0.1), &late, &cfg).is_err());
    }

    #[test]
    fn preconditions_are_enforced() {
        let cfg = EnsembleConfig::new(10, 1e-3, 1);
        let with_mean = TrigPoly::constant(1, c(1.0, 0.0));
        assert!(verify_steps(&with_mean, &cfg, 16).is_err());
        assert_eq!(
            verify_steps(&TrigPoly::monomial([1], c(1.0, 0.0)), &cfg, 16),
            Err(Error::NotReal)
        );
        assert!(lemma23_stats(&cos1(), 0.6, 0.3, &cfg).is_err());
        let s = GoodLambdaSamples::collect(&cos1(), &cfg).unwrap();
        assert!(s.report(0.5, 0.5, 2.0).is_err());
        assert!(s.report(0.5, 4.0, 1.0).is_err());
    }

    #[test]
    fn passage_increments_match_stored_traces() {
        let f = TrigPoly::random_real(2, 2, 8, true).unwrap();
        let cfg = EnsembleConfig::new(40, 1e-3, 6);
        let (lo, hi) = (0.4, 0.9);
        let r = lemma23_stats(&f, lo, hi, &cfg).unwrap();
        let g = analytic_completion(&f);
        let sq = cfg
            .map_paths(2, |_, paths| {
                let tr = build_trace(&g, paths)?;
                let d = tr.value_at(first_passage(&tr, hi)) - tr.value_at(first_passage(&tr, lo));
                Ok(d.re * d.re)
            })
            .unwrap();
        let want = EnsembleStats::from_samples(&sq).mean.sqrt();
        assert!((r.norm_f.mean - want).abs() < 1e-12);
    }

    #[test]
    fn level_above_every_maximum_gives_zero_probabilities() {
        let cfg = EnsembleConfig::new(200, 1e-3, 3);
        let s = GoodLambdaSamples::collect(&cos1(), &cfg).unwrap();
        // |g| = |e^{i theta}| <= 1 along the whole trace
        let r = s.report(1.5, 4.0, 2.0).unwrap();
        assert_eq!(r.p_g.mean, 0.0);
        assert!(r.probes.iter().all(|p| p.holds));
        let l0 = s.lambda0().unwrap();
        let r0 = s.report(l0, 4.0, 2.0).unwrap();
        assert!(r0.hypothesis);
    }
}
