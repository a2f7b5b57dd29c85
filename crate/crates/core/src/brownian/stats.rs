use std::collections::BTreeMap;

use crate::csvout::CsvTable;

/// Mean and standard error of a per-path statistic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnsembleStats {
    pub n_paths: usize,
    pub mean: f64,
    /// sample standard deviation over `sqrt(n_paths)`
    pub std_error: f64,
    pub extra: BTreeMap<String, f64>,
}

impl EnsembleStats {
    /// Sums are taken in sample order, so equal inputs give bitwise-equal output.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return EnsembleStats::default();
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        EnsembleStats {
            n_paths: n,
            mean,
            std_error: (var / n as f64).sqrt(),
            extra: BTreeMap::new(),
        }
    }

    /// A point estimate with an externally derived standard error.
    pub fn estimate(n_paths: usize, mean: f64, std_error: f64) -> Self {
        EnsembleStats {
            n_paths,
            mean,
            std_error,
            extra: BTreeMap::new(),
        }
    }

    /// Empirical probability with its binomial standard error.
    pub fn proportion(hits: usize, n_paths: usize) -> Self {
        let p = hits as f64 / n_paths as f64;
        Self::estimate(n_paths, p, (p * (1.0 - p) / n_paths as f64).sqrt())
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    /// `|mean - target| <= k * std_error` (with a rounding allowance for
    /// degenerate ensembles whose standard error is zero).
    pub fn consistent_with(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-12
    }
}

/// Real and imaginary parts of a complex per-path statistic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexStats {
    pub re: EnsembleStats,
    pub im: EnsembleStats,
}

impl ComplexStats {
    /// Both parts within `k` standard errors of zero.
    pub fn centered_within(&self, k: f64) -> bool {
        self.re.consistent_with(0.0, k) && self.im.consistent_with(0.0, k)
    }
}

/// One `name,value,std_error` line of an ensemble report.
#[derive(Clone, Debug, PartialEq)]
pub struct StatRow {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
}

impl StatRow {
    pub fn new(name: impl Into<String>, value: f64, std_error: f64) -> Self {
        StatRow {
            name: name.into(),
            value,
            std_error,
        }
    }

    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, 0.0)
    }

    pub fn from_stats(name: impl Into<String>, s: &EnsembleStats) -> Vec<StatRow> {
        let name = name.into();
        let mut rows = vec![StatRow::new(name.clone(), s.mean, s.std_error)];
        for (k, v) in &s.extra {
            rows.push(StatRow::exact(format!("{name}.{k}"), *v));
        }
        rows
    }
}

/// Ensemble results in the `name,value,std_error,n_paths,seed,dt` layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsTable {
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub rows: Vec<StatRow>,
}

impl StatsTable {
    pub const CSV_HEADER: [&'static str; 6] = ["name", "value", "std_error", "n_paths", "seed", "dt"];

    pub fn new(n_paths: usize, seed: u64, dt: f64) -> Self {
        StatsTable {
            n_paths,
            seed,
            dt,
            rows: Vec::new(),
        }
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = StatRow>) {
        self.rows.extend(rows);
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(Self::CSV_HEADER);
        for r in &self.rows {
            t.push_row([
                r.name.clone(),
                r.value.to_string(),
                r.std_error.to_string(),
                self.n_paths.to_string(),
                self.seed.to_string(),
                self.dt.to_string(),
            ]);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_error_definition() {
        let s = EnsembleStats::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s.std_error - sd / 2.0).abs() < 1e-15);
        assert!(s.consistent_with(2.5 + 2.9 * s.std_error, 3.0));
        assert!(!s.consistent_with(2.5 + 3.1 * s.std_error, 3.0));
    }

    #[test]
    fn csv_layout() {
        let mut t = StatsTable::new(10, 7, 1e-4);
        t.extend(StatRow::from_stats("x", &EnsembleStats::estimate(10, 0.5, 0.1).with_extra("k", 2.0)));
        assert_eq!(
            t.to_csv().render(),
            "name,value,std_error,n_paths,seed,dt\nx,0.5,0.1,10,7,0.0001\nx.k,2,0,10,7,0.0001\n"
        );
    }
}
