//! The semi-discrete Brownian martingale over the time set
//! `{1..N} x [0, inf) u {inf}`.
//!
//! Coordinate `n` runs its own planar Brownian motion `c_{n,t}` from 0 until
//! it leaves the unit disk at `tau_n`; only then does coordinate `n + 1`
//! start. For a trigonometric polynomial `f` the process
//!
//! ```text
//! F_{n,t} = f(c_{1,tau_1}, ..., c_{n-1,tau_{n-1}}, c_{n, t ^ tau_n}, 0, ..., 0)
//! ```
//!
//! (harmonic extension in every variable) is a martingale whose terminal value
//! `F_inf = f(exit points)` is distributed like `f` on the torus.
//!
//! Paths are simulated with Gaussian steps of variance `dt` per component;
//! the first step that lands outside the disk is replaced by the linearly
//! interpolated crossing, projected onto the circle.

mod harness;
mod path;
mod stats;
mod time;
mod trace;

pub use harness::{
    analytic_square_check, goodlambda_stats, increment_orthogonality, increment_orthogonality_batch,
    lemma23_batch, lemma23_stats, verify_steps, verify_steps_batch, Functional, GoodLambdaReport, GoodLambdaSamples,
    Lemma23Report, ProbeResult, SquareCheck, StepReport, PROBE_CONSTANTS,
};
pub use path::{exit_law, path_seed, simulate_exit, ExitLaw, CoordinatePath, EnsembleConfig, DEFAULT_T_CAP};
pub use stats::{ComplexStats, EnsembleStats, StatRow, StatsTable};
pub use time::TimeIndex;
pub use trace::{build_trace, first_passage, ProcessTrace, TraceEvaluator};
