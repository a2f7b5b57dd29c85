use std::cmp::Ordering;
use std::fmt;

/// A point of `{1..N} x [0, inf)` in lexicographic order, or the terminal
/// time `inf`, which is larger than every other index.
#[derive(Clone, Copy, Debug)]
pub enum TimeIndex {
    /// `coord` is 1-based.
    At { coord: usize, t: f64 },
    Infinity,
}

impl TimeIndex {
    pub fn at(coord: usize, t: f64) -> Self {
        TimeIndex::At { coord, t }
    }

    /// The order-preserving map onto `[0, N]`: `(n, t) -> n - 1 + t / (t + 1)`
    /// and `inf -> N`.
    pub fn phi(&self, dim: usize) -> f64 {
        match *self {
            TimeIndex::At { coord, t } => (coord - 1) as f64 + t / (t + 1.0),
            TimeIndex::Infinity => dim as f64,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TimeIndex::Infinity)
    }
}

impl PartialEq for TimeIndex {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TimeIndex {}

impl PartialOrd for TimeIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        use TimeIndex::*;
        match (self, other) {
            (Infinity, Infinity) => Ordering::Equal,
            (Infinity, _) => Ordering::Greater,
            (_, Infinity) => Ordering::Less,
            (At { coord: m, t: s }, At { coord: n, t }) => m.cmp(n).then(s.total_cmp(t)),
        }
    }
}

impl fmt::Display for TimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeIndex::At { coord, t } => write!(f, "({coord},{t})"),
            TimeIndex::Infinity => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let a = TimeIndex::at(1, 5.0);
        let b = TimeIndex::at(2, 0.0);
        let c = TimeIndex::at(2, 0.5);
        assert!(a < b && b < c && c < TimeIndex::Infinity);
        assert_eq!(TimeIndex::Infinity, TimeIndex::Infinity);
        assert_eq!(TimeIndex::at(1, 0.25), TimeIndex::at(1, 0.25));
    }

    #[test]
    fn phi_values() {
        assert_eq!(TimeIndex::at(1, 0.0).phi(3), 0.0);
        assert_eq!(TimeIndex::at(2, 1.0).phi(3), 1.5);
        assert_eq!(TimeIndex::Infinity.phi(3), 3.0);
        let big = TimeIndex::at(2, 1e9).phi(3);
        assert!((1.0..2.0).contains(&big));
    }
}
