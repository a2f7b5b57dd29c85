//! Command-line experiment runner.
//!
//! Every command generates its random test polynomials from `--seed`, runs
//! one harness, and emits a CSV table whose first lines are `#` comments
//! echoing the effective configuration. Internal assertions that fail are
//! reported on stderr by name and turn the exit code to 1.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand};
use num_complex::Complex64;

use crate::brownian::{
    exit_law, increment_orthogonality_batch, lemma23_batch, path_seed, verify_steps_batch,
    EnsembleConfig, Functional, GoodLambdaSamples, StatsTable, TimeIndex, PROBE_CONSTANTS,
};
use crate::csvout::CsvTable;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operators::{
    analytic_completion, conjugate_h, conjugate_j, cond_expect, doob_max_grid, mart_diff, square_fn_grid,
};
use crate::oracle::{cond_expect_via_avg, conjugate_h_via_dft, conjugate_via_dft, dft_coeffs};
use crate::trigpoly::TrigPoly;
use crate::weaknorm::{norm, weak_l1, weak_type_ratio, Lp, WeakRatioRecord};

const ORACLE_TOL: f64 = 1e-9;
const K_SE: f64 = 3.0;

#[derive(Parser, Debug, Clone)]
#[command(name = "conjmax", version, about = "Experiments on martingale conjugate functions on the N-torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Round-trip f = d_0 f + d_1 f + ... + d_N f.
    ///
    /// CSV columns: N,poly,seed,n_terms,piece_terms,max_coeff_error
    /// (piece_terms lists the term counts of d_0..d_N separated by ';').
    Decompose(Opts),
    /// Conjugate operators H_1..H_N and H against the dense-grid oracle.
    ///
    /// CSV columns: N,poly,seed,operator,sup_error,l2_ratio
    /// (l2_ratio is ||op f||_2 / ||f||_2 from coefficients).
    Conjugate(Opts),
    /// Doob maximal function D f and square function S f on the grid.
    ///
    /// CSV columns: N,poly,seed,l1,weak_d,weak_s,l2_f,l2_s
    Maximal(Opts),
    /// Weak-L1 norm of the maximal conjugate function M f against ||f||_1.
    ///
    /// CSV columns: dim,res,seed,l1,weakM,ratio
    WeakNorm(Opts),
    /// Brownian martingale: exit law, E|F_inf| = ||f||_1, and the weak-type chain F*, M f, F~*.
    ///
    /// CSV columns: name,value,std_error,n_paths,seed,dt
    Simulate(Opts),
    /// Increment orthogonality E[(F_inf - F_s) w] = 0 for past functionals w.
    ///
    /// CSV columns: name,value,std_error,n_paths,seed,dt
    MartingaleTest(Opts),
    /// Stopped L2 increments of F and F~ between first passages of |G|.
    ///
    /// CSV columns: name,value,std_error,n_paths,seed,dt
    Lemma23(Opts),
    /// Good-lambda probe sweep P(G* > l) against c P(c F* > l).
    ///
    /// CSV columns: N,poly,lambda,alpha,beta,p_g,p_g_beta,hypothesis,
    /// p_cf_1,p_cf_2,p_cf_4,p_cf_8,p_cf_16,smallest_probe
    /// (smallest_probe is empty when no probe constant works).
    GoodLambda(Opts),
    /// Empirical weak-type constant ||M f||*_1 / ||f||_1 across dimensions.
    ///
    /// CSV columns: N,n_polys,max_ratio,median_ratio
    ConstantSweep(Opts),
    /// Sparse operators and coefficients against the dense-grid oracle.
    ///
    /// CSV columns: N,poly,seed,check,sup_error
    OracleCheck(Opts),
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Comma-separated list of dimensions N
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub dims: Vec<usize>,
    /// Largest |m_j| in random polynomials
    #[arg(long, default_value_t = 3)]
    pub degree: u32,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random polynomials per dimension
    #[arg(long)]
    pub n_polys: Option<usize>,
    /// Monte Carlo path tuples
    #[arg(long)]
    pub paths: Option<usize>,
    /// Brownian time step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Grid points per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Good-lambda level (default: a sweep around the extremal level)
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 4.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// Passage levels `lo,hi` for lemma23 (default: fractions of sup |g|)
    #[arg(long, value_parser = parse_levels)]
    pub levels: Option<(f64, f64)>,
    /// Output file (written atomically); stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_levels(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if !(lo > 0.0 && hi > lo) {
        return Err("need 0 < lo < hi".into());
    }
    Ok((lo, hi))
}

/// CSV output and the names of failed assertions.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: CsvTable,
    pub failures: Vec<String>,
}

impl Outcome {
    fn new(table: CsvTable) -> Self {
        Outcome {
            table,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, name: &str, detail: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(format!("{name}: {}", detail()));
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Decompose(_) => "decompose",
            Command::Conjugate(_) => "conjugate",
            Command::Maximal(_) => "maximal",
            Command::WeakNorm(_) => "weak-norm",
            Command::Simulate(_) => "simulate",
            Command::MartingaleTest(_) => "martingale-test",
            Command::Lemma23(_) => "lemma23",
            Command::GoodLambda(_) => "good-lambda",
            Command::ConstantSweep(_) => "constant-sweep",
            Command::OracleCheck(_) => "oracle-check",
        }
    }

    pub fn opts(&self) -> &Opts {
        match self {
            Command::Decompose(o)
            | Command::Conjugate(o)
            | Command::Maximal(o)
            | Command::WeakNorm(o)
            | Command::Simulate(o)
            | Command::MartingaleTest(o)
            | Command::Lemma23(o)
            | Command::GoodLambda(o)
            | Command::ConstantSweep(o)
            | Command::OracleCheck(o) => o,
        }
    }

    fn default_polys(&self) -> usize {
        match self {
            Command::ConstantSweep(_) => 50,
            Command::Simulate(_) | Command::MartingaleTest(_) | Command::Lemma23(_) | Command::GoodLambda(_) => 3,
            _ => 20,
        }
    }

    fn default_paths(&self) -> usize {
        match self {
            Command::GoodLambda(_) | Command::Lemma23(_) => 20_000,
            _ => 10_000,
        }
    }

    fn default_grid(&self) -> usize {
        match self {
            Command::Conjugate(_) | Command::OracleCheck(_) => 32,
            _ => 64,
        }
    }
}

/// Flags after defaults have been filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub dims: Vec<usize>,
    pub degree: u32,
    pub seed: u64,
    pub n_polys: usize,
    pub n_paths: usize,
    pub dt: f64,
    pub res: usize,
    pub lambda: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub levels: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_command(cmd: &Command) -> Result<Self> {
        let o = cmd.opts();
        if o.dims.is_empty() || o.dims.contains(&0) {
            return Err(Error::InvalidParameter("--dims must list positive dimensions".into()));
        }
        Ok(ExperimentConfig {
            command: cmd.name(),
            dims: o.dims.clone(),
            degree: o.degree,
            seed: o.seed,
            n_polys: o.n_polys.unwrap_or_else(|| cmd.default_polys()),
            n_paths: o.paths.unwrap_or_else(|| cmd.default_paths()),
            dt: o.dt,
            res: o.grid.unwrap_or_else(|| cmd.default_grid()),
            lambda: o.lambda,
            alpha: o.alpha,
            beta: o.beta,
            levels: o.levels,
            out: o.out.clone(),
        })
    }

    /// The configuration as one `key=value` line.
    pub fn describe(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(ToString::to_string).collect();
        let lambda = self.lambda.map_or("sweep".to_string(), |l| l.to_string());
        let levels = self.levels.map_or("auto".to_string(), |(a, b)| format!("{a},{b}"));
        format!(
            "command={} dims={} degree={} seed={} n_polys={} paths={} dt={} grid={} lambda={} alpha={} beta={} levels={}",
            self.command,
            dims.join(","),
            self.degree,
            self.seed,
            self.n_polys,
            self.n_paths,
            self.dt,
            self.res,
            lambda,
            self.alpha,
            self.beta,
            levels
        )
    }

    fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig::new(self.n_paths, self.dt, self.seed)
    }

    /// Seed of test polynomial `i` in dimension `dim`.
    pub fn poly_seed(&self, dim: usize, i: usize) -> u64 {
        path_seed(self.seed ^ 0x5EED_5EED_5EED_5EED, dim, i)
    }

    /// The real test polynomials for `dim`, paired with their seeds.
    pub fn polys(&self, dim: usize, zero_mean: bool) -> Result<Vec<(u64, TrigPoly)>> {
        (0..self.n_polys)
            .map(|i| {
                let s = self.poly_seed(dim, i);
                Ok((s, TrigPoly::random_real(dim, self.degree, s, zero_mean)?))
            })
            .collect()
    }
}

/// Runs one parsed command without touching stdout or the file system.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    let cfg = ExperimentConfig::from_command(cmd)?;
    let mut out = match cmd {
        Command::Decompose(_) => decompose(&cfg)?,
        Command::Conjugate(_) => conjugate(&cfg)?,
        Command::Maximal(_) => maximal(&cfg)?,
        Command::WeakNorm(_) => weak_norm(&cfg)?,
        Command::Simulate(_) => simulate(&cfg)?,
        Command::MartingaleTest(_) => martingale_test(&cfg)?,
        Command::Lemma23(_) => lemma23(&cfg)?,
        Command::GoodLambda(_) => good_lambda(&cfg)?,
        Command::ConstantSweep(_) => constant_sweep(&cfg)?,
        Command::OracleCheck(_) => oracle_check(&cfg)?,
    };
    out.table
        .prepend_comments([format!("conjmax {}", env!("CARGO_PKG_VERSION")), cfg.describe()]);
    Ok(out)
}

/// Parses `args` (including the program name), runs the command, writes the
/// CSV and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() && !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return e.exit_code();
        }
    };
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &cli.command.opts().out {
        Some(path) => outcome.table.write_atomic(path),
        None => std::io::stdout().lock().write_all(outcome.table.render().as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    if outcome.failures.is_empty() {
        0
    } else {
        for f in &outcome.failures {
            eprintln!("assertion failed: {f}");
        }
        1
    }
}

fn sup_distance(a: &GridFunction<Complex64>, b: &GridFunction<Complex64>) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn max_coeff_distance(a: &TrigPoly, b: &TrigPoly) -> Result<f64> {
    let diff = TrigPoly::linear_combine(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], &[a.clone(), b.clone()])?;
    Ok(diff.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max))
}

/// Largest coefficient of `f - sum_j d_j f` before any small-term dropping.
fn reconstruction_error(f: &TrigPoly) -> Result<f64> {
    let pieces: Vec<TrigPoly> = (0..=f.dim()).map(|j| mart_diff(f, j)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (m, c) in f.terms() {
        let sum: Complex64 = pieces.iter().map(|p| p.coeff(m.as_slice())).sum();
        worst = worst.max((sum - c).norm());
    }
    let total: usize = pieces.iter().map(TrigPoly::num_terms).sum();
    Ok(if total == f.num_terms() { worst } else { f64::INFINITY })
}

fn decompose(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(CsvTable::new(["N", "poly", "seed", "n_terms", "piece_terms", "max_coeff_error"]));
    for &dim in &cfg.dims {
        for (i, (seed, f)) in cfg.polys(dim, false)?.into_iter().enumerate() {
            let counts: Vec<String> = (0..=dim)
                .map(|j| mart_diff(&f, j).map(|p| p.num_terms().to_string()))
                .collect::<Result<_>>()?;
            let err = reconstruction_error(&f)?;
            out.table.push_row([
                dim.to_string(),
                i.to_string(),
                seed.to_string(),
                f.num_terms().to_string(),
                counts.join(";"),
                err.to_string(),
            ]);
            out.check(err <= 1e-12, "decomposition_exact", || format!("N={dim} poly {i} error {err:e}"));
        }
    }
    Ok(out)
}

fn conjugate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(CsvTable::new(["N", "poly", "seed", "operator", "sup_error", "l2_ratio"]));
    for &dim in &cfg.dims {
        for (i, (seed, f)) in cfg.polys(dim, true)?.into_iter().enumerate() {
            let g = GridFunction::sample(&f, cfg.res)?;
            let l2 = f.l2_coeff_norm();
            let mut ops: Vec<(String, TrigPoly, GridFunction<Complex64>)> = Vec::new();
            for j in 1..=dim {
                ops.push((format!("H{j}"), conjugate_j(&f, j)?, conjugate_via_dft(&g, j)?));
            }
            ops.push(("H".into(), conjugate_h(&f), conjugate_h_via_dft(&g)?));
            for (name, sparse, dense) in ops {
                let err = sup_distance(&GridFunction::sample(&sparse, cfg.res)?, &dense);
                let ratio = sparse.l2_coeff_norm() / l2;
                out.table.push_row([
                    dim.to_string(),
                    i.to_string(),
                    seed.to_string(),
                    name.clone(),
                    err.to_string(),
                    ratio.to_string(),
                ]);
                out.check(err <= ORACLE_TOL, "conjugate_matches_oracle", || {
                    format!("N={dim} poly {i} {name} error {err:e}")
                });
                if name == "H" {
                    out.check((ratio - 1.0).abs() <= 1e-10, "conjugate_l2_isometry", || {
                        format!("N={dim} poly {i} ratio {ratio}")
                    });
                }
            }
        }
    }
    Ok(out)
}

fn maximal(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(CsvTable::new(["N", "poly", "seed", "l1", "weak_d", "weak_s", "l2_f", "l2_s"]));
    for &dim in &cfg.dims {
        for (i, (seed, f)) in cfg.polys(dim, true)?.into_iter().enumerate() {
            let l1 = norm(&GridFunction::sample_real(&f, cfg.res)?, Lp::L1);
            let weak_d = weak_l1(&doob_max_grid(&f, cfg.res)?);
            let s = square_fn_grid(&f, cfg.res)?;
            let (weak_s, l2_s) = (weak_l1(&s), norm(&s, Lp::L2));
            let l2_f = f.l2_coeff_norm();
            out.table.push_row([
                dim.to_string(),
                i.to_string(),
                seed.to_string(),
                l1.to_string(),
                weak_d.to_string(),
                weak_s.to_string(),
                l2_f.to_string(),
                l2_s.to_string(),
            ]);
            out.check(weak_d <= 1.02 * l1, "doob_weak_bound", || {
                format!("N={dim} poly {i}: weak D {weak_d} > 1.02 * {l1}")
            });
            out.check((l2_s - l2_f).abs() <= 1e-9 * l2_f, "square_function_l2_identity", || {
                format!("N={dim} poly {i}: {l2_s} vs {l2_f}")
            });
        }
    }
    Ok(out)
}

fn weak_norm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(CsvTable::new(WeakRatioRecord::CSV_HEADER));
    for &dim in &cfg.dims {
        for (seed, f) in cfg.polys(dim, true)? {
            let rec = weak_type_ratio(&f, cfg.res)?.with_seed(seed);
            rec.push_to(&mut out.table);
            out.check(rec.ratio.is_finite(), "weak_ratio_finite", || format!("N={dim} seed {seed}"));
        }
    }
    Ok(out)
}

fn stats_outcome(cfg: &ExperimentConfig, stats: StatsTable) -> Outcome {
    let mut table = stats.to_csv();
    table.comment(format!("n_paths={} seed={} dt={}", cfg.n_paths, cfg.seed, cfg.dt));
    Outcome::new(table)
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ens = cfg.ensemble();
    let mut stats = StatsTable::new(cfg.n_paths, cfg.seed, cfg.dt);
    let law = exit_law(&ens)?;
    stats.extend(crate::brownian::StatRow::from_stats("exit.tau", &law.tau));
    stats.extend([crate::brownian::StatRow::exact("exit.ks_uniform", law.ks_uniform)]);
    let mut checks = Vec::new();
    let ks_limit = 0.02f64.max(1.63 / (cfg.n_paths as f64).sqrt());
    checks.push((law.ks_uniform <= ks_limit, "exit_angle_uniform", format!("KS {} > {ks_limit}", law.ks_uniform)));
    checks.push((
        law.tau.consistent_with(0.5, K_SE) || (law.tau.mean - 0.5).abs() <= 0.025,
        "exit_mean_time",
        format!("mean tau {}", law.tau.mean),
    ));
    for &dim in &cfg.dims {
        let polys = cfg.polys(dim, true)?;
        let fs: Vec<TrigPoly> = polys.iter().map(|(_, f)| f.clone()).collect();
        for (i, r) in verify_steps_batch(&fs, &ens, cfg.res)?.into_iter().enumerate() {
            let tag = format!("N{dim}.poly{i}");
            stats.extend(r.rows(&format!("{tag}.")));
            checks.push((r.step1_holds(K_SE), "step1_terminal_l1", format!("{tag}: {} vs {}", r.terminal_l1.mean, r.l1_f)));
            checks.push((
                r.step2_holds(K_SE),
                "step2_weak_fstar",
                format!("{tag}: {} vs {}", r.weak_f_star.mean, r.terminal_l1.mean),
            ));
            checks.push((
                r.step4_holds(K_SE, 0.05),
                "step4_weak_ftilde_star",
                format!("{tag}: {} vs {}", r.weak_m_grid, r.weak_ft_star.mean),
            ));
        }
    }
    let mut out = stats_outcome(cfg, stats);
    for (ok, name, detail) in checks {
        out.check(ok, name, || detail);
    }
    Ok(out)
}

/// Three checkpoints spread over the coordinates of a `dim`-tuple.
pub fn default_checkpoints(dim: usize) -> [TimeIndex; 3] {
    [
        TimeIndex::at(1, 0.05),
        TimeIndex::at(dim.div_ceil(2), 0.2),
        TimeIndex::at(dim, 0.1),
    ]
}

fn martingale_test(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ens = cfg.ensemble();
    let mut stats = StatsTable::new(cfg.n_paths, cfg.seed, cfg.dt);
    let mut failures = Vec::new();
    for &dim in &cfg.dims {
        let tests: Vec<(TimeIndex, Functional)> = default_checkpoints(dim)
            .into_iter()
            .flat_map(|cp| Functional::catalogue(cp, dim).into_iter().map(move |w| (cp, w)))
            .collect();
        for (i, (_, f)) in cfg.polys(dim, true)?.into_iter().enumerate() {
            let results = increment_orthogonality_batch(&f, &tests, &ens)?;
            for ((cp, w), r) in tests.iter().zip(results) {
                let tag = format!("N{dim}.poly{i}.{cp}.{w}");
                stats.extend(crate::brownian::StatRow::from_stats(format!("{tag}.re"), &r.re));
                stats.extend(crate::brownian::StatRow::from_stats(format!("{tag}.im"), &r.im));
                if !r.centered_within(K_SE) {
                    failures.push(format!("increment_orthogonality: {tag} re {} im {}", r.re.mean, r.im.mean));
                }
            }
        }
    }
    let mut out = stats_outcome(cfg, stats);
    out.failures = failures;
    Ok(out)
}

fn lemma23(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ens = cfg.ensemble();
    let mut stats = StatsTable::new(cfg.n_paths, cfg.seed, cfg.dt);
    let mut failures = Vec::new();
    let mut tags = Vec::new();
    let mut cases = Vec::new();
    for &dim in &cfg.dims {
        for (i, (_, f)) in cfg.polys(dim, true)?.into_iter().enumerate() {
            let levels = cfg.levels.unwrap_or_else(|| default_levels(&f));
            tags.push(format!("N{dim}.poly{i}"));
            cases.push((f, levels.0, levels.1));
        }
    }
    for (tag, r) in tags.iter().zip(lemma23_batch(&cases, &ens)?) {
        stats.extend(r.rows(&format!("{tag}.")));
        if !r.agrees(K_SE) {
            failures.push(format!("stopped_l2_norms_agree: {tag} {} vs {}", r.norm_f.mean, r.norm_ft.mean));
        }
    }
    let mut out = stats_outcome(cfg, stats);
    out.failures = failures;
    Ok(out)
}

/// Passage levels at a quarter and a half of the coefficient mass of
/// `f + iHf`, which bounds `|G|`.
pub fn default_levels(f: &TrigPoly) -> (f64, f64) {
    let scale = analytic_completion(f).coefficient_mass();
    (0.25 * scale, 0.5 * scale)
}

fn good_lambda(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut header: Vec<String> = ["N", "poly", "lambda", "alpha", "beta", "p_g", "p_g_beta", "hypothesis"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(PROBE_CONSTANTS.iter().map(|c| format!("p_cf_{c}")));
    header.push("smallest_probe".into());
    let mut out = Outcome::new(CsvTable::new(header));
    out.table.comment(format!("n_paths={} seed={} dt={}", cfg.n_paths, cfg.seed, cfg.dt));
    let ens = cfg.ensemble();
    for &dim in &cfg.dims {
        let polys = cfg.polys(dim, true)?;
        let fs: Vec<TrigPoly> = polys.iter().map(|(_, f)| f.clone()).collect();
        for (i, samples) in GoodLambdaSamples::collect_batch(&fs, &ens)?.into_iter().enumerate() {
            let lambdas: Vec<f64> = match (cfg.lambda, samples.lambda0()) {
                (Some(l), _) => vec![l],
                (None, Some(l0)) => [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|k| k * l0).collect(),
                (None, None) => Vec::new(),
            };
            for lambda in lambdas {
                let r = samples.report(lambda, cfg.alpha, cfg.beta)?;
                let mut row = vec![
                    dim.to_string(),
                    i.to_string(),
                    lambda.to_string(),
                    cfg.alpha.to_string(),
                    cfg.beta.to_string(),
                    r.p_g.mean.to_string(),
                    r.p_g_beta.mean.to_string(),
                    u8::from(r.hypothesis).to_string(),
                ];
                row.extend(r.probes.iter().map(|p| p.p_cf.mean.to_string()));
                row.push(r.smallest_probe.map_or(String::new(), |c| c.to_string()));
                out.table.push_row(row);
                out.check(!r.hypothesis || r.smallest_probe.is_some(), "good_lambda_conclusion", || {
                    format!("N={dim} poly {i} lambda {lambda}: no probe constant up to 16")
                });
            }
        }
    }
    Ok(out)
}

/// `(max, median)` of the weak-type ratios of `n_polys` random polynomials.
pub fn ratio_summary(cfg: &ExperimentConfig, dim: usize) -> Result<(f64, f64)> {
    let mut ratios = Vec::with_capacity(cfg.n_polys);
    for (_, f) in cfg.polys(dim, true)? {
        ratios.push(weak_type_ratio(&f, cfg.res)?.ratio);
    }
    ratios.sort_unstable_by(f64::total_cmp);
    let n = ratios.len();
    let median = if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    };
    Ok((ratios[n - 1], median))
}

fn constant_sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.n_polys == 0 {
        return Err(Error::InvalidParameter("--n-polys must be positive".into()));
    }
    let mut out = Outcome::new(CsvTable::new(["N", "n_polys", "max_ratio", "median_ratio"]));
    let mut maxima = Vec::new();
    for &dim in &cfg.dims {
        let (max, median) = ratio_summary(cfg, dim)?;
        maxima.push(max);
        out.table
            .push_row([dim.to_string(), cfg.n_polys.to_string(), max.to_string(), median.to_string()]);
    }
    if let (Some(&first), Some(&last)) = (maxima.first(), maxima.last()) {
        out.check(last <= 3.0 * first, "constant_flat_in_dimension", || {
            format!("max ratio {last} at N={} exceeds 3 x {first}", cfg.dims[cfg.dims.len() - 1])
        });
    }
    Ok(out)
}

fn oracle_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(CsvTable::new(["N", "poly", "seed", "check", "sup_error"]));
    for &dim in &cfg.dims {
        for (i, (seed, f)) in cfg.polys(dim, false)?.into_iter().enumerate() {
            let g = GridFunction::sample(&f, cfg.res)?;
            let mut rows: Vec<(String, f64)> = Vec::new();
            rows.push(("coefficients".into(), max_coeff_distance(&dft_coeffs(&g, cfg.degree)?, &f)?));
            for n in 0..=dim {
                let sparse = GridFunction::sample(&cond_expect(&f, n)?, cfg.res)?;
                rows.push((format!("E{n}"), sup_distance(&sparse, &cond_expect_via_avg(&g, n)?)));
            }
            for j in 1..=dim {
                let sparse = GridFunction::sample(&conjugate_j(&f, j)?, cfg.res)?;
                rows.push((format!("H{j}"), sup_distance(&sparse, &conjugate_via_dft(&g, j)?)));
            }
            let sparse = GridFunction::sample(&conjugate_h(&f), cfg.res)?;
            rows.push(("H".into(), sup_distance(&sparse, &conjugate_h_via_dft(&g)?)));
            for (check, err) in rows {
                out.table
                    .push_row([dim.to_string(), i.to_string(), seed.to_string(), check.clone(), err.to_string()]);
                out.check(err <= ORACLE_TOL, "oracle_agreement", || {
                    format!("N={dim} poly {i} {check} error {err:e}")
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("conjmax").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn defaults_and_flags() {
        let cmd = parse(&["good-lambda", "--dims", "1,2", "--levels", "0.5,1"]);
        let cfg = ExperimentConfig::from_command(&cmd).unwrap();
        assert_eq!(cfg.dims, vec![1, 2]);
        assert_eq!((cfg.alpha, cfg.beta), (4.0, 2.0));
        assert_eq!(cfg.levels, Some((0.5, 1.0)));
        assert_eq!(cfg.n_paths, 20_000);
        assert!(cfg.describe().starts_with("command=good-lambda dims=1,2"));
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        for args in [
            vec!["conjmax", "frobnicate"],
            vec!["conjmax", "decompose", "--degree", "x"],
            vec!["conjmax", "lemma23", "--levels", "2,1"],
            vec!["conjmax", "decompose", "--bogus"],
        ] {
            let e = Cli::try_parse_from(args).unwrap_err();
            assert_eq!(e.exit_code(), 2);
        }
    }

    #[test]
    fn decompose_is_exact() {
        let out = execute(&parse(&["decompose", "--dims", "1,3", "--n-polys", "4"])).unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        assert_eq!(out.table.rows().len(), 8);
        assert_eq!(out.table.comments().len(), 2);
    }

    #[test]
    fn poly_seeds_depend_on_dimension_and_index() {
        let cfg = ExperimentConfig::from_command(&parse(&["decompose"])).unwrap();
        assert_ne!(cfg.poly_seed(1, 0), cfg.poly_seed(2, 0));
        assert_ne!(cfg.poly_seed(1, 0), cfg.poly_seed(1, 1));
    }
}
