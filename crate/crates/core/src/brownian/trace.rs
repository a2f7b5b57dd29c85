use num_complex::Complex64;

use super::path::CoordinatePath;
use super::time::TimeIndex;
use crate::error::{Error, Result};
use crate::trigpoly::{power_table, TrigPoly};

/// Precomputed martingale-difference blocks of a polynomial, ready to be
/// run along path tuples.
///
/// During block `n` the earlier coordinates are frozen at their exit points
/// and the later ones at 0, so `F_{n,t} = P_n + d_n f(e_1, .., e_{n-1}, c)`
/// where `P_n = E(f | F_{n-1})(e_1, .., e_{n-1})` and `d_n f` restricts to
/// a one-variable harmonic polynomial in `c`.
#[derive(Clone, Debug)]
pub struct TraceEvaluator {
    dim: usize,
    mean: Complex64,
    /// `blocks[n - 1]` holds the terms of `d_n f`
    blocks: Vec<Vec<(Vec<i32>, Complex64)>>,
    deg: usize,
}

impl TraceEvaluator {
    pub fn new(p: &TrigPoly) -> Self {
        let dim = p.dim();
        let mut blocks = vec![Vec::new(); dim];
        for (m, c) in p.terms() {
            if let Some(last) = m.last_nonzero() {
                blocks[last].push((m.as_slice().to_vec(), *c));
            }
        }
        TraceEvaluator {
            dim,
            mean: p.mean(),
            blocks,
            deg: p.max_degree() as usize,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Visits `(index, F_index)` for every sampled index in increasing order
    /// and returns the terminal value `F_inf`.
    pub fn walk<F>(&self, paths: &[CoordinatePath], mut visit: F) -> Result<Complex64>
    where
        F: FnMut(TimeIndex, Complex64),
    {
        if paths.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: paths.len(),
            });
        }
        let mut prefix = self.mean;
        let mut exit_pos: Vec<Vec<Complex64>> = Vec::with_capacity(self.dim);
        let mut exit_neg: Vec<Vec<Complex64>> = Vec::with_capacity(self.dim);
        for (n, path) in paths.iter().enumerate() {
            let mut pos = vec![Complex64::new(0.0, 0.0); self.deg + 1];
            let mut neg = vec![Complex64::new(0.0, 0.0); self.deg + 1];
            for (m, a) in &self.blocks[n] {
                let mut v = *a;
                for (k, &mk) in m[..n].iter().enumerate() {
                    if mk > 0 {
                        v *= exit_pos[k][mk as usize];
                    } else if mk < 0 {
                        v *= exit_neg[k][(-mk) as usize];
                    }
                }
                let e = m[n];
                if e > 0 {
                    pos[e as usize] += v;
                } else {
                    neg[(-e) as usize] += v;
                }
            }
            let top_pos = pos.iter().rposition(|b| *b != Complex64::new(0.0, 0.0)).unwrap_or(0);
            let top_neg = neg.iter().rposition(|b| *b != Complex64::new(0.0, 0.0)).unwrap_or(0);
            let (pos, neg) = (&pos[..=top_pos], &neg[..=top_neg]);

            let mut last = prefix;
            for &(t, c) in &path.samples {
                let mut v = prefix + horner(pos, c);
                if top_neg > 0 {
                    v += horner(neg, c.conj());
                }
                visit(TimeIndex::at(n + 1, t), v);
                last = v;
            }
            prefix = last;
            exit_pos.push(power_table(path.exit_point, self.deg));
            exit_neg.push(power_table(path.exit_point.conj(), self.deg));
        }
        Ok(prefix)
    }
}

/// `sum_{e >= 1} b[e] z^e`
#[inline]
fn horner(b: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for coef in b[1..].iter().rev() {
        acc = (acc + coef) * z;
    }
    acc
}

/// A sampled realization of `F_{n,t}` along one path tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessTrace {
    pub dim: usize,
    pub values: Vec<(TimeIndex, Complex64)>,
    /// `F_inf`
    pub terminal: Complex64,
    /// `F* = max |F|` over the sampled indices
    pub running_max: f64,
}

impl ProcessTrace {
    /// `F` at the last sampled index not after `at`.
    pub fn value_at(&self, at: TimeIndex) -> Complex64 {
        if at.is_infinite() {
            return self.terminal;
        }
        let i = self.values.partition_point(|(idx, _)| *idx <= at);
        self.values[i.saturating_sub(1)].1
    }
}

pub fn build_trace(p: &TrigPoly, paths: &[CoordinatePath]) -> Result<ProcessTrace> {
    let eval = TraceEvaluator::new(p);
    let mut values = Vec::with_capacity(paths.iter().map(|q| q.samples.len()).sum());
    let mut running_max = 0.0f64;
    let terminal = eval.walk(paths, |idx, v| {
        running_max = running_max.max(v.norm());
        values.push((idx, v));
    })?;
    Ok(ProcessTrace {
        dim: p.dim(),
        values,
        terminal,
        running_max,
    })
}

/// First sampled index with `|F| > level`, or `inf`.
pub fn first_passage(trace: &ProcessTrace, level: f64) -> TimeIndex {
    trace
        .values
        .iter()
        .find(|(_, v)| v.norm() > level)
        .map_or(TimeIndex::Infinity, |(idx, _)| *idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::path::{simulate_exit, EnsembleConfig};
    use crate::operators::cond_expect;
    use crate::trigpoly::PolydiskPoint;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tuple(dim: usize, k: usize) -> Vec<CoordinatePath> {
        EnsembleConfig::new(1, 1e-3, 11).path_tuple(dim, k).unwrap()
    }

    #[test]
    fn zero_polynomial_trace() {
        let paths = tuple(2, 0);
        let tr = build_trace(&TrigPoly::zero(2), &paths).unwrap();
        assert!(tr.values.iter().all(|(_, v)| *v == c(0.0, 0.0)));
        assert_eq!(tr.running_max, 0.0);
        assert_eq!(tr.terminal, c(0.0, 0.0));
    }

    #[test]
    fn identity_monomial_follows_the_path() {
        let paths = tuple(1, 3);
        let tr = build_trace(&TrigPoly::monomial([1], c(1.0, 0.0)), &paths).unwrap();
        for ((idx, v), (t, z)) in tr.values.iter().zip(&paths[0].samples) {
            assert_eq!(*idx, TimeIndex::at(1, *t));
            assert_eq!(v, z);
        }
        assert_eq!(tr.terminal, paths[0].exit_point);
        assert!((tr.terminal.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_coordinate_cosine() {
        let paths = tuple(2, 5);
        let cos2 = TrigPoly::new(2, [([0, 1].into(), c(0.5, 0.0)), ([0, -1].into(), c(0.5, 0.0))]).unwrap();
        let tr = build_trace(&cos2, &paths).unwrap();
        for (idx, v) in &tr.values {
            let TimeIndex::At { coord, t } = *idx else { unreachable!() };
            if coord == 1 {
                assert_eq!(*v, c(0.0, 0.0));
            } else {
                let z = paths[1].position_at(t);
                assert!((v - c(z.re, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matches_direct_harmonic_evaluation() {
        for seed in 0..6 {
            let dim = 1 + seed as usize % 3;
            let f = TrigPoly::random_real(dim, 3, seed, seed % 2 == 0).unwrap();
            let paths = tuple(dim, seed as usize);
            let tr = build_trace(&f, &paths).unwrap();
            let exits: Vec<Complex64> = paths.iter().map(|p| p.exit_point).collect();
            // check a thinned subset of indices against the definition
            for (i, (idx, v)) in tr.values.iter().enumerate().step_by(37) {
                let TimeIndex::At { coord, t } = *idx else { unreachable!() };
                let partial = cond_expect(&f, coord).unwrap();
                let mut z = vec![c(0.0, 0.0); dim];
                z[..coord - 1].copy_from_slice(&exits[..coord - 1]);
                z[coord - 1] = if i + 1 == tr.values.len() || t >= paths[coord - 1].tau {
                    paths[coord - 1].exit_point
                } else {
                    paths[coord - 1].position_at(t)
                };
                let want = partial.evaluate_at(&z).unwrap();
                assert!((v - want).norm() < 1e-12, "at {idx}");
            }
            let want = f.evaluate(&PolydiskPoint::new(exits).unwrap()).unwrap();
            assert!((tr.terminal - want).norm() < 1e-12);
            assert_eq!(tr.terminal, tr.values.last().unwrap().1);
            assert!(tr.running_max >= tr.terminal.norm());
        }
    }

    #[test]
    fn continuous_across_blocks_and_constant_after_exit() {
        let f = TrigPoly::random_real(3, 2, 99, true).unwrap();
        let paths = tuple(3, 1);
        let tr = build_trace(&f, &paths).unwrap();
        for n in 1..3 {
            let end = tr.value_at(TimeIndex::at(n, paths[n - 1].tau));
            let start = tr.value_at(TimeIndex::at(n + 1, 0.0));
            assert!((end - start).norm() < 1e-15);
            let later = tr.value_at(TimeIndex::at(n, paths[n - 1].tau + 10.0));
            assert_eq!(end, later);
        }
        let phis: Vec<f64> = tr.values.iter().map(|(i, _)| i.phi(3)).collect();
        assert!(phis.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn first_passage_examples() {
        let paths = tuple(1, 0);
        let tr = build_trace(&TrigPoly::monomial([1], c(1.0, 0.0)), &paths).unwrap();
        assert_eq!(first_passage(&tr, tr.running_max + 0.1), TimeIndex::Infinity);
        assert_eq!(first_passage(&tr, 0.0), tr.values[1].0);

        // scripted trace with |F_{1,t}| = t
        let values: Vec<(TimeIndex, Complex64)> = (0..=100)
            .map(|k| {
                let t = k as f64 / 100.0;
                (TimeIndex::at(1, t), c(t, 0.0))
            })
            .collect();
        let scripted = ProcessTrace {
            dim: 1,
            terminal: values.last().unwrap().1,
            running_max: 1.0,
            values,
        };
        assert_eq!(first_passage(&scripted, 0.375), TimeIndex::at(1, 0.38));
    }

    #[test]
    fn rejects_wrong_path_count() {
        let p = simulate_exit(1, 1e-3, 50.0).unwrap();
        assert!(matches!(
            build_trace(&TrigPoly::zero(2), &[p]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }
}
