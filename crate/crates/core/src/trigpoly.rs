//! Sparse trigonometric polynomials on `T^N`.
//!
//! A polynomial is a finite map from frequency vectors `m in Z^N` to complex
//! coefficients, kept in lexicographic order. Evaluation uses the harmonic
//! (polydisk) extension: the character `e^{i m theta}` becomes `z^m` for
//! `m >= 0` and `conj(z)^{|m|}` for `m < 0` in every coordinate, so values on
//! the distinguished boundary `|z_j| = 1` are the ordinary values on the torus.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Coefficients with modulus at or below this are dropped by [`TrigPoly::new`].
pub const DROP_THRESHOLD: f64 = 1e-12;

/// Points with a coordinate of modulus above `1 + POLYDISK_SLACK` are rejected.
pub const POLYDISK_SLACK: f64 = 1e-12;

/// A frequency `(m_1, ..., m_N)` in `Z^N`. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreqVector(Vec<i32>);

impl FreqVector {
    pub fn new(components: Vec<i32>) -> Self {
        FreqVector(components)
    }

    pub fn zero(dim: usize) -> Self {
        FreqVector(vec![0; dim])
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    /// Index (0-based) of the last nonzero component, if any.
    pub fn last_nonzero(&self) -> Option<usize> {
        self.0.iter().rposition(|&m| m != 0)
    }

    pub fn negated(&self) -> Self {
        FreqVector(self.0.iter().map(|&m| -m).collect())
    }

    fn sum(&self, other: &Self) -> Self {
        FreqVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<i32>> for FreqVector {
    fn from(v: Vec<i32>) -> Self {
        FreqVector(v)
    }
}

impl From<&[i32]> for FreqVector {
    fn from(v: &[i32]) -> Self {
        FreqVector(v.to_vec())
    }
}

impl<const K: usize> From<[i32; K]> for FreqVector {
    fn from(v: [i32; K]) -> Self {
        FreqVector(v.to_vec())
    }
}

/// A point of the closed polydisk `{ |z_j| <= 1 }`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolydiskPoint(Vec<Complex64>);

impl PolydiskPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if let Some((index, z)) = coords
            .iter()
            .enumerate()
            .find(|(_, z)| z.norm().is_nan() || z.norm() > 1.0 + POLYDISK_SLACK)
        {
            return Err(Error::OutsidePolydisk {
                index,
                modulus: z.norm(),
            });
        }
        Ok(PolydiskPoint(coords))
    }

    /// The boundary point `(e^{i theta_1}, ..., e^{i theta_N})`.
    pub fn from_angles(angles: &[f64]) -> Self {
        PolydiskPoint(angles.iter().map(|&t| Complex64::cis(t)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A trigonometric polynomial in canonical sparse form.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    terms: BTreeMap<FreqVector, Complex64>,
}

impl TrigPoly {
    /// Builds a polynomial from a term list. Duplicate frequencies are summed
    /// and coefficients of modulus `<= DROP_THRESHOLD` are dropped.
    pub fn new<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FreqVector, Complex64)>,
    {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let mut map: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
        for (index, (freq, c)) in terms.into_iter().enumerate() {
            if freq.dim() != dim {
                return Err(Error::FrequencyLength {
                    index,
                    expected: dim,
                    found: freq.dim(),
                });
            }
            *map.entry(freq).or_default() += c;
        }
        Ok(Self::canonical(dim, map))
    }

    fn canonical(dim: usize, mut terms: BTreeMap<FreqVector, Complex64>) -> Self {
        terms.retain(|_, c| c.norm() > DROP_THRESHOLD);
        TrigPoly { dim, terms }
    }

    /// Wraps a term map whose entries are already nonzero with keys of length `dim`.
    pub(crate) fn from_nonzero_terms(dim: usize, terms: BTreeMap<FreqVector, Complex64>) -> Self {
        debug_assert!(terms.iter().all(|(m, c)| m.dim() == dim && *c != Complex64::new(0.0, 0.0)));
        TrigPoly { dim, terms }
    }

    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::canonical(dim, BTreeMap::from([(FreqVector::zero(dim), c)]))
    }

    /// `c * e^{i <m, theta>}`.
    pub fn monomial(freq: impl Into<FreqVector>, c: Complex64) -> Self {
        let freq = freq.into();
        let dim = freq.dim();
        Self::canonical(dim, BTreeMap::from([(freq, c)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic frequency order.
    pub fn terms(&self) -> impl ExactSizeIterator<Item = (&FreqVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, freq: &[i32]) -> Complex64 {
        self.terms
            .get(&FreqVector::from(freq))
            .copied()
            .unwrap_or_default()
    }

    /// The mean `a_0`.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&vec![0; self.dim])
    }

    /// Largest `|m_j|` over all terms and coordinates.
    pub fn max_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.as_slice().iter().map(|x| x.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// Sum of coefficient moduli; bounds the sup-norm on the torus.
    pub fn coefficient_mass(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Euclidean norm of the coefficient vector, i.e. the `L^2(T^N)` norm.
    pub fn l2_coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Keeps the terms accepted by `keep`.
    pub fn filter_terms(&self, mut keep: impl FnMut(&FreqVector) -> bool) -> TrigPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, c)| (m.clone(), *c))
            .collect();
        TrigPoly::from_nonzero_terms(self.dim, terms)
    }

    /// `a_{-m} = conj(a_m)` for every `m`, up to `tol * (1 + max |a_m|)`.
    pub fn is_real_within(&self, tol: f64) -> bool {
        let scale = 1.0 + self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        self.terms.iter().all(|(m, c)| {
            let partner = self.terms.get(&m.negated()).copied().unwrap_or_default();
            (partner - c.conj()).norm() <= tol * scale
        })
    }

    pub fn is_real(&self) -> bool {
        self.is_real_within(1e-12)
    }

    /// Harmonic-extension value at a polydisk point.
    pub fn evaluate(&self, z: &PolydiskPoint) -> Result<Complex64> {
        self.evaluate_at(z.coords())
    }

    /// Harmonic-extension value at an arbitrary point of `C^N`.
    pub fn evaluate_at(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        let deg = self.max_degree() as usize;
        // powers[k][e] = z_k^e, conj_powers[k][e] = conj(z_k)^e
        let powers: Vec<Vec<Complex64>> = z.iter().map(|&w| power_table(w, deg)).collect();
        let conj_powers: Vec<Vec<Complex64>> =
            z.iter().map(|&w| power_table(w.conj(), deg)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = *c;
            for (k, &mk) in m.as_slice().iter().enumerate() {
                if mk > 0 {
                    v *= powers[k][mk as usize];
                } else if mk < 0 {
                    v *= conj_powers[k][(-mk) as usize];
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Coefficient convolution; the product of the two functions on `T^N`.
    pub fn multiply(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check_dim(other.dim)?;
        let mut out: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
        for (m, a) in &self.terms {
            for (k, b) in &other.terms {
                *out.entry(m.sum(k)).or_default() += a * b;
            }
        }
        Ok(Self::canonical(self.dim, out))
    }

    /// `sum_i coeffs[i] * polys[i]`.
    pub fn linear_combine(coeffs: &[Complex64], polys: &[TrigPoly]) -> Result<TrigPoly> {
        if coeffs.len() != polys.len() {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: polys.len(),
            });
        }
        let Some(first) = polys.first() else {
            return Err(Error::InvalidParameter(
                "linear combination of an empty list".into(),
            ));
        };
        let dim = first.dim;
        let mut out: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
        for (w, p) in coeffs.iter().zip(polys) {
            first.check_dim(p.dim)?;
            for (m, c) in &p.terms {
                *out.entry(m.clone()).or_default() += w * c;
            }
        }
        Ok(Self::canonical(dim, out))
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if other != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other,
            });
        }
        Ok(())
    }

    /// Random real-valued polynomial with `|m_j| <= max_degree`.
    ///
    /// Draws `4 * dim` frequencies uniformly from `[-max_degree, max_degree]^dim`
    /// with coefficients uniform in the square `[-1, 1)^2`, then symmetrizes
    /// `a_m <- (a_m + conj(a_{-m})) / 2`. Never returns the zero polynomial.
    pub fn random_real(dim: usize, max_degree: u32, seed: u64, zero_mean: bool) -> Result<TrigPoly> {
        if dim == 0 || max_degree == 0 {
            return Err(Error::InvalidParameter(
                "random polynomial needs positive dimension and degree".into(),
            ));
        }
        let deg = max_degree as i32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let mut raw: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
            for _ in 0..4 * dim {
                let m: Vec<i32> = (0..dim).map(|_| rng.random_range(-deg..=deg)).collect();
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                *raw.entry(FreqVector(m)).or_default() += c;
            }
            let mut sym: BTreeMap<FreqVector, Complex64> = BTreeMap::new();
            for m in raw.keys() {
                for key in [m.clone(), m.negated()] {
                    if sym.contains_key(&key) {
                        continue;
                    }
                    let a = raw.get(&key).copied().unwrap_or_default();
                    let b = raw.get(&key.negated()).copied().unwrap_or_default();
                    sym.insert(key, (a + b.conj()) * 0.5);
                }
            }
            if zero_mean {
                sym.remove(&FreqVector::zero(dim));
            }
            let p = Self::canonical(dim, sym);
            if !p.is_zero() {
                return Ok(p);
            }
        }
    }
}

/// `[1, w, w^2, ..., w^deg]`
pub(crate) fn power_table(w: Complex64, deg: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(deg + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    out.push(acc);
    for _ in 0..deg {
        acc *= w;
        out.push(acc);
    }
    out
}

/// Text form: a `dim N` header then one `m_1 ... m_N re im` line per term,
/// in lexicographic frequency order.
impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        for (m, c) in &self.terms {
            for k in m.as_slice() {
                write!(f, "{k} ")?;
            }
            writeln!(f, "{} {}", c.re, c.im)?;
        }
        Ok(())
    }
}

impl FromStr for TrigPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing `dim N` header".into(),
        })?;
        let dim: usize = header
            .strip_prefix("dim")
            .and_then(|rest| rest.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: hline,
                msg: format!("expected `dim N`, found `{header}`"),
            })?;
        let mut terms = Vec::new();
        for (line, text) in lines {
            let fields: Vec<&str> = text.split_whitespace().collect();
            if fields.len() != dim + 2 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", dim + 2, fields.len()),
                });
            }
            let bad = |what: &str| Error::Parse {
                line,
                msg: format!("invalid {what}"),
            };
            let m = fields[..dim]
                .iter()
                .map(|x| x.parse::<i32>().map_err(|_| bad("frequency")))
                .collect::<Result<Vec<i32>>>()?;
            let re: f64 = fields[dim].parse().map_err(|_| bad("real part"))?;
            let im: f64 = fields[dim + 1].parse().map_err(|_| bad("imaginary part"))?;
            terms.push((FreqVector(m), Complex64::new(re, im)));
        }
        TrigPoly::new(dim, terms).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos1(dim: usize) -> TrigPoly {
        let mut plus = vec![0; dim];
        plus[0] = 1;
        let minus: Vec<i32> = plus.iter().map(|x| -x).collect();
        TrigPoly::new(dim, [(plus.into(), c(0.5, 0.0)), (minus.into(), c(0.5, 0.0))]).unwrap()
    }

    #[test]
    fn new_poly_examples() {
        let p = cos1(2);
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coeff(&[1, 0]), c(0.5, 0.0));
        assert_eq!(p.coeff(&[-1, 0]), c(0.5, 0.0));

        let z = TrigPoly::new(1, [([3].into(), c(1.0, 0.0)), ([3].into(), c(-1.0, 0.0))]).unwrap();
        assert!(z.is_zero());

        let err = TrigPoly::new(2, [([1].into(), c(1.0, 0.0))]).unwrap_err();
        assert_eq!(
            err,
            Error::FrequencyLength {
                index: 0,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn evaluate_examples() {
        let theta1 = TrigPoly::monomial([1, 0], c(1.0, 0.0));
        let z = PolydiskPoint::new(vec![c(0.5, 0.0), Complex64::cis(1.234)]).unwrap();
        assert!((theta1.evaluate(&z).unwrap() - c(0.5, 0.0)).norm() < 1e-15);

        let inv = TrigPoly::monomial([-1, 0], c(1.0, 0.0));
        let z = PolydiskPoint::new(vec![c(0.0, 0.5), c(1.0, 0.0)]).unwrap();
        assert!((inv.evaluate(&z).unwrap() - c(0.0, -0.5)).norm() < 1e-15);

        let z = PolydiskPoint::new(vec![Complex64::cis(PI / 3.0)]).unwrap();
        assert!((cos1(1).evaluate(&z).unwrap() - c(0.5, 0.0)).norm() < 1e-15);

        assert!(matches!(
            cos1(2).evaluate(&z),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(PolydiskPoint::new(vec![c(1.1, 0.0)]).is_err());
    }

    #[test]
    fn multiply_examples() {
        let t = TrigPoly::monomial([1], c(1.0, 0.0));
        assert_eq!(t.multiply(&t).unwrap(), TrigPoly::monomial([2], c(1.0, 0.0)));

        let sq = cos1(1).multiply(&cos1(1)).unwrap();
        let expected = TrigPoly::new(
            1,
            [
                ([0].into(), c(0.5, 0.0)),
                ([2].into(), c(0.25, 0.0)),
                ([-2].into(), c(0.25, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(sq, expected);

        let e1 = TrigPoly::monomial([1, 0], c(1.0, 0.0));
        let e2 = TrigPoly::monomial([0, 1], c(1.0, 0.0));
        assert_eq!(e1.multiply(&e2).unwrap(), TrigPoly::monomial([1, 1], c(1.0, 0.0)));

        assert!(e1.multiply(&cos1(1)).is_err());
    }

    #[test]
    fn linear_combine_examples() {
        let p = cos1(1);
        let zero = TrigPoly::linear_combine(&[c(1.0, 0.0), c(-1.0, 0.0)], &[p.clone(), p.clone()]).unwrap();
        assert!(zero.is_zero());
        let twice = TrigPoly::linear_combine(&[c(2.0, 0.0)], std::slice::from_ref(&p)).unwrap();
        assert_eq!(twice.coeff(&[1]), c(1.0, 0.0));
        assert!(matches!(
            TrigPoly::linear_combine(&[c(1.0, 0.0)], &[p.clone(), p.clone()]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            TrigPoly::linear_combine(&[c(1.0, 0.0), c(1.0, 0.0)], &[p, cos1(2)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_real_contract() {
        let a = TrigPoly::random_real(2, 3, 42, true).unwrap();
        let b = TrigPoly::random_real(2, 3, 42, true).unwrap();
        assert_eq!(a, b);
        assert!(a.is_real_within(0.0));
        assert_eq!(a.mean(), c(0.0, 0.0));
        assert!(a.max_degree() <= 3);

        for seed in 0..20 {
            let p = TrigPoly::random_real(1, 1, seed, true).unwrap();
            assert!(p.terms().all(|(m, _)| m.as_slice()[0].abs() == 1));
            let q = TrigPoly::random_real(3, 2, seed, false).unwrap();
            assert_eq!(q.mean().im, 0.0);
            assert!(q.is_real_within(0.0));
        }
    }

    #[test]
    fn text_format() {
        let p = TrigPoly::new(
            2,
            [
                ([1, -2].into(), c(0.25, -1.5)),
                ([-1, 0].into(), c(3.0, 0.0)),
            ],
        )
        .unwrap();
        let text = p.to_string();
        assert_eq!(text, "dim 2\n-1 0 3 0\n1 -2 0.25 -1.5\n");
        assert_eq!(text.parse::<TrigPoly>().unwrap(), p);

        let err = "dim 2\n1 0.5 0\n".parse::<TrigPoly>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!("dum 2\n".parse::<TrigPoly>().is_err());
    }

    fn arb_poly(max_dim: usize, max_deg: u32) -> impl Strategy<Value = TrigPoly> {
        (1..=max_dim).prop_flat_map(move |dim| {
            prop::collection::vec(
                (
                    prop::collection::vec(-(max_deg as i32)..=max_deg as i32, dim),
                    -1.0..1.0f64,
                    -1.0..1.0f64,
                ),
                0..8,
            )
            .prop_map(move |terms| {
                TrigPoly::new(
                    dim,
                    terms.into_iter().map(|(m, re, im)| (FreqVector(m), c(re, im))),
                )
                .unwrap()
            })
        })
    }

    fn boundary_point(dim: usize, seed: u64) -> PolydiskPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angles: Vec<f64> = (0..dim).map(|_| rand::Rng::random_range(&mut rng, 0.0..2.0 * PI)).collect();
        PolydiskPoint::from_angles(&angles)
    }

    proptest! {
        #[test]
        fn evaluation_is_a_homomorphism(
            (p, q) in (1usize..=3).prop_flat_map(|d| (arb_poly(d, 4), arb_poly(d, 4)))
                .prop_filter("same dim", |(p, q)| p.dim() == q.dim()),
            seed in any::<u64>(),
        ) {
            let pq = p.multiply(&q).unwrap();
            let tol = 1e-10 * (1.0 + p.coefficient_mass() * q.coefficient_mass());
            for k in 0..100 {
                let z = boundary_point(p.dim(), seed.wrapping_add(k));
                let lhs = pq.evaluate(&z).unwrap();
                let rhs = p.evaluate(&z).unwrap() * q.evaluate(&z).unwrap();
                prop_assert!((lhs - rhs).norm() <= tol);
            }
        }

        #[test]
        fn real_predicate_matches_values(p in arb_poly(3, 4), seed in any::<u64>()) {
            let sym = TrigPoly::linear_combine(
                &[c(0.5, 0.0), c(0.5, 0.0)],
                &[p.clone(), conj_reflect(&p)],
            ).unwrap();
            prop_assert!(sym.is_real());
            for k in 0..200 {
                let z = boundary_point(p.dim(), seed.wrapping_add(k));
                prop_assert!(sym.evaluate(&z).unwrap().im.abs() <= 1e-10);
            }
            if !p.is_real() {
                let worst = (0..200)
                    .map(|k| p.evaluate(&boundary_point(p.dim(), seed.wrapping_add(k))).unwrap().im.abs())
                    .fold(0.0, f64::max);
                prop_assert!(worst > 1e-10);
            }
        }

        #[test]
        fn zero_in_last_coordinate_deletes_its_terms(p in arb_poly(3, 4), seed in any::<u64>()) {
            let n = p.dim();
            let mut z = boundary_point(n, seed).coords().to_vec();
            z[n - 1] = c(0.0, 0.0);
            let kept = p.filter_terms(|m| m.as_slice()[n - 1] == 0);
            let lhs = p.evaluate_at(&z).unwrap();
            let rhs = kept.evaluate_at(&z).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }

        #[test]
        fn canonical_form_round_trips(p in arb_poly(4, 5)) {
            let dumped: Vec<_> = p.terms().map(|(m, c)| (m.clone(), *c)).collect();
            prop_assert_eq!(TrigPoly::new(p.dim(), dumped).unwrap(), p.clone());
            prop_assert_eq!(p.to_string().parse::<TrigPoly>().unwrap(), p);
        }
    }

    /// `conj(p(theta))` as a polynomial: `a_m -> conj(a_{-m})`.
    fn conj_reflect(p: &TrigPoly) -> TrigPoly {
        TrigPoly::new(p.dim(), p.terms().map(|(m, c)| (m.negated(), c.conj()))).unwrap()
    }
}
