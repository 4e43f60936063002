//! In-degree sequences and their summary statistics.
//!
//! A degree sequence `d` over `n` vertices is valid when every entry is
//! non-negative and the entries sum to `n`, so that at least one mapping
//! `[n] -> [n]` realises it. Vertices are 0-indexed in this API; text and
//! CSV formats use 1-indexed vertex ids.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    /// Validates a raw integer sequence.
    pub fn new(raw: &[i64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((vertex, &degree)) = raw.iter().enumerate().find(|(_, &d)| d < 0) {
            return Err(Error::NegativeDegree { vertex, degree });
        }
        let sum: i128 = raw.iter().map(|&d| d as i128).sum();
        if sum != raw.len() as i128 {
            return Err(Error::SumMismatch { sum, n: raw.len() });
        }
        Ok(Self {
            degrees: raw.iter().map(|&d| d as u32).collect(),
        })
    }

    pub fn from_degrees(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Empty);
        }
        let sum: i128 = degrees.iter().map(|&d| d as i128).sum();
        if sum != degrees.len() as i128 {
            return Err(Error::SumMismatch {
                sum,
                n: degrees.len(),
            });
        }
        Ok(Self { degrees })
    }

    /// The all-ones sequence: every mapping with these degrees is a permutation.
    pub fn permutation(n: usize) -> Result<Self> {
        Self::from_degrees(vec![1; n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    #[inline]
    pub fn as_slice(&self) -> &[u32] {
        &self.degrees
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n() })
        }
    }

    /// The slot list: vertex `i` repeated `d_i` times, in vertex order.
    pub fn slots(&self) -> Vec<u32> {
        let mut slots = Vec::with_capacity(self.n());
        for (v, &d) in self.degrees.iter().enumerate() {
            slots.extend(std::iter::repeat_n(v as u32, d as usize));
        }
        slots
    }

    /// Degree value -> number of vertices with that degree.
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut hist = BTreeMap::new();
        for &d in &self.degrees {
            *hist.entry(d).or_insert(0) += 1;
        }
        hist
    }

    pub fn max_degree_vertex(&self) -> usize {
        // first vertex attaining the maximum
        let delta = *self.degrees.iter().max().expect("non-empty");
        self.degrees.iter().position(|&d| d == delta).unwrap()
    }

    pub fn zero_degree_vertex(&self) -> Option<usize> {
        self.degrees.iter().position(|&d| d == 0)
    }

    pub fn stats(&self) -> DegreeStats {
        DegreeStats::of(self)
    }

    pub fn check_assumptions(&self) -> AssumptionReport {
        AssumptionReport::of(&self.stats())
    }

    /// Parses one integer per line. Blank lines and `#` comments are skipped;
    /// if the first data line is `vertex,degree` the input is read as CSV and
    /// the `degree` column is used.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let mut column = None;
        if let Some(first) = lines.peek() {
            if first.contains(',') {
                let header: Vec<&str> = first.split(',').map(str::trim).collect();
                column = Some(
                    header
                        .iter()
                        .position(|&h| h == "degree")
                        .ok_or_else(|| Error::Parse("CSV input needs a `degree` column".into()))?,
                );
                lines.next();
            }
        }
        let mut raw = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let field = match column {
                Some(c) => line
                    .split(',')
                    .nth(c)
                    .ok_or_else(|| Error::Parse(format!("row {} is missing the degree column", lineno + 1)))?
                    .trim(),
                None => line,
            };
            let d: i64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("not an integer: {field:?}")))?;
            raw.push(d);
        }
        Self::new(&raw)
    }

    /// One integer per line.
    pub fn to_lines(&self) -> String {
        let mut out = String::with_capacity(self.n() * 2);
        for d in &self.degrees {
            let _ = writeln!(out, "{d}");
        }
        out
    }

    /// `vertex,degree` with 1-indexed vertices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,degree\n");
        for (v, d) in self.degrees.iter().enumerate() {
            let _ = writeln!(out, "{},{}", v + 1, d);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub n: usize,
    pub delta: u32,
    pub m2: u128,
    pub m3: u128,
    /// `n * sigma^2 = m2 - n = sum_j (d_j - 1)^2`, always an integer.
    pub n_sigma2: u128,
    #[serde(skip)]
    pub sigma2: Ratio<u128>,
    pub num_deg0: usize,
    pub num_deg1: usize,
}

impl DegreeStats {
    pub fn of(ds: &DegreeSequence) -> Self {
        let n = ds.n();
        let (mut delta, mut m2, mut m3) = (0u32, 0u128, 0u128);
        let (mut num_deg0, mut num_deg1) = (0, 0);
        for &d in ds.as_slice() {
            let d128 = d as u128;
            delta = delta.max(d);
            m2 += d128 * d128;
            m3 += d128 * d128 * d128;
            match d {
                0 => num_deg0 += 1,
                1 => num_deg1 += 1,
                _ => {}
            }
        }
        // m2 >= sum(d) = n for integer degrees
        let n_sigma2 = m2 - n as u128;
        Self {
            n,
            delta,
            m2,
            m3,
            n_sigma2,
            sigma2: Ratio::new(n_sigma2, n as u128),
            num_deg0,
            num_deg1,
        }
    }

    pub fn sigma2_f64(&self) -> f64 {
        self.n_sigma2 as f64 / self.n as f64
    }

    /// `sqrt(n / sigma^2)`, the natural length scale of the six-length.
    /// Infinite for permutation sequences.
    pub fn scale(&self) -> f64 {
        (self.n as f64 / self.sigma2_f64()).sqrt()
    }

    pub fn is_permutation(&self) -> bool {
        self.n_sigma2 == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// sigma^2 = o(n)
    A1Upper,
    /// sigma^2 = omega(1/n)
    A1Lower,
    /// Delta = o(sqrt(n sigma^2))
    A2,
    /// sigma^2 = o(n / log^3 n)
    B1Upper,
    /// Delta = o(sqrt(n sigma^2 / log^3 n))
    B2,
    /// sigma^2 = omega(log n / n^(1/3))
    APlus,
    /// sigma^2 = O(n^(-1/3) log^2 n)
    AMinus,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::A1Upper => "A1_upper",
            Condition::A1Lower => "A1_lower",
            Condition::A2 => "A2",
            Condition::B1Upper => "B1_upper",
            Condition::B2 => "B2",
            Condition::APlus => "A+",
            Condition::AMinus => "A-",
        }
    }
}

/// Which way the ratio has to go along a family for the condition to hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Wants {
    /// `o(.)` / `O(.)`: ratio should tend to zero (or stay bounded).
    Small,
    /// `omega(.)`: ratio should tend to infinity.
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub condition: Condition,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub wants: Wants,
    /// Set when the ratio is not meaningful, e.g. sigma^2 = 0.
    pub degenerate: bool,
}

/// Finite-n diagnostics for the asymptotic conditions. The conditions are
/// statements about families of sequences, so nothing here is a pass/fail
/// verdict and no computation is ever gated on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub n: usize,
    pub sigma2: f64,
    pub delta: u32,
    pub comparisons: Vec<Comparison>,
}

impl AssumptionReport {
    pub fn of(stats: &DegreeStats) -> Self {
        let n = stats.n as f64;
        let s2 = stats.sigma2_f64();
        let delta = stats.delta as f64;
        let ln = n.ln();
        let degenerate = stats.n_sigma2 == 0;
        let cmp = |condition, lhs: f64, rhs: f64, wants| Comparison {
            condition,
            lhs,
            rhs,
            ratio: lhs / rhs,
            wants,
            degenerate,
        };
        let comparisons = vec![
            cmp(Condition::A1Upper, s2, n, Wants::Small),
            cmp(Condition::A1Lower, s2, 1.0 / n, Wants::Large),
            cmp(Condition::A2, delta, (n * s2).sqrt(), Wants::Small),
            cmp(Condition::B1Upper, s2, n / ln.powi(3), Wants::Small),
            cmp(Condition::B2, delta, (n * s2 / ln.powi(3)).sqrt(), Wants::Small),
            cmp(Condition::APlus, s2, ln / n.cbrt(), Wants::Large),
            cmp(Condition::AMinus, s2, ln * ln / n.cbrt(), Wants::Small),
        ];
        Self {
            n: stats.n,
            sigma2: s2,
            delta: stats.delta,
            comparisons,
        }
    }

    pub fn get(&self, condition: Condition) -> &Comparison {
        self.comparisons
            .iter()
            .find(|c| c.condition == condition)
            .expect("every condition is reported")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,lhs,rhs,ratio,wants,degenerate\n");
        for c in &self.comparisons {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.condition.label(),
                c.lhs,
                c.rhs,
                c.ratio,
                match c.wants {
                    Wants::Small => "small",
                    Wants::Large => "large",
                },
                c.degenerate
            );
        }
        out
    }
}

/// Fixture generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorKind {
    /// n/2 vertices of degree 2 followed by n/2 of degree 0. Odd n gets a
    /// single degree-1 vertex in the middle.
    TwoZero,
    Permutation,
    /// Counts of vertices with degree 0, 1, 2, 3 (n is their sum).
    BinaryMix { counts: [usize; 4] },
    /// In-degrees of a uniform random mapping: n balls into n boxes.
    Multinomial,
    Custom(Vec<i64>),
}

impl GeneratorKind {
    /// Parses `two_zero`, `permutation`, `multinomial`,
    /// `binary_mix:c0,c1,c2,c3` and `custom:d1,d2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, params) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (spec.trim(), None),
        };
        let ints = |p: Option<&str>| -> Result<Vec<i64>> {
            p.ok_or_else(|| Error::Parse(format!("generator `{name}` needs parameters")))?
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad generator parameter {s:?}")))
                })
                .collect()
        };
        match name {
            "two_zero" => Ok(GeneratorKind::TwoZero),
            "permutation" => Ok(GeneratorKind::Permutation),
            "multinomial" => Ok(GeneratorKind::Multinomial),
            "binary_mix" => {
                let v = ints(params)?;
                if v.len() != 4 || v.iter().any(|&c| c < 0) {
                    return Err(Error::Parse("binary_mix needs four non-negative counts".into()));
                }
                Ok(GeneratorKind::BinaryMix {
                    counts: [v[0] as usize, v[1] as usize, v[2] as usize, v[3] as usize],
                })
            }
            "custom" => Ok(GeneratorKind::Custom(ints(params)?)),
            other => Err(Error::Parse(format!("unknown generator `{other}`"))),
        }
    }
}

/// Builds a degree sequence. `n` is ignored for `BinaryMix` and `Custom`,
/// whose size is implied by their parameters.
pub fn generate<R: Rng + ?Sized>(kind: &GeneratorKind, n: usize, rng: &mut R) -> Result<DegreeSequence> {
    match kind {
        GeneratorKind::TwoZero => {
            if n == 0 {
                return Err(Error::InfeasibleParams("n must be positive".into()));
            }
            let half = n / 2;
            let mut d = vec![2u32; half];
            if n % 2 == 1 {
                d.push(1);
            }
            d.extend(std::iter::repeat_n(0, half));
            DegreeSequence::from_degrees(d)
        }
        GeneratorKind::Permutation => {
            if n == 0 {
                return Err(Error::InfeasibleParams("n must be positive".into()));
            }
            DegreeSequence::permutation(n)
        }
        GeneratorKind::BinaryMix { counts } => {
            let [c0, c1, c2, c3] = *counts;
            let total = c0 + c1 + c2 + c3;
            if total == 0 || c1 + 2 * c2 + 3 * c3 != total {
                return Err(Error::InfeasibleParams(format!(
                    "counts {counts:?} give degree sum {} over {total} vertices",
                    c1 + 2 * c2 + 3 * c3
                )));
            }
            let mut d = Vec::with_capacity(total);
            for (deg, &c) in counts.iter().enumerate().rev() {
                d.extend(std::iter::repeat_n(deg as u32, c));
            }
            DegreeSequence::from_degrees(d)
        }
        GeneratorKind::Multinomial => {
            if n == 0 {
                return Err(Error::InfeasibleParams("n must be positive".into()));
            }
            let mut d = vec![0u32; n];
            for _ in 0..n {
                d[rng.gen_range(0..n)] += 1;
            }
            DegreeSequence::from_degrees(d)
        }
        GeneratorKind::Custom(raw) => DegreeSequence::new(raw),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_mod_five_is_valid() {
        let ds = DegreeSequence::new(&[1, 2, 0, 0, 2]).unwrap();
        assert_eq!(ds.n(), 5);
        assert!(DegreeSequence::new(&[1, 1, 1, 1]).is_ok());
    }

    #[test]
    fn rejects_bad_sequences() {
        assert_eq!(
            DegreeSequence::new(&[2, 2, 0]),
            Err(Error::SumMismatch { sum: 4, n: 3 })
        );
        assert_eq!(
            DegreeSequence::new(&[3, -1, 1]),
            Err(Error::NegativeDegree { vertex: 1, degree: -1 })
        );
        assert_eq!(DegreeSequence::new(&[]), Err(Error::Empty));
    }

    #[test]
    fn stats_of_small_sequences() {
        let s = DegreeSequence::new(&[1, 2, 0, 0, 2]).unwrap().stats();
        assert_eq!(s.delta, 2);
        assert_eq!(s.m2, 9);
        assert_eq!(s.m3, 17);
        assert_eq!(s.sigma2, Ratio::new(4, 5));

        let s = DegreeSequence::permutation(17).unwrap().stats();
        assert_eq!((s.delta, s.n_sigma2), (1, 0));
        assert!(s.is_permutation());

        let mut d = vec![2i64; 100];
        d.extend(vec![0; 100]);
        let s = DegreeSequence::new(&d).unwrap().stats();
        assert_eq!(s.m2, 400);
        assert_eq!(s.sigma2, Ratio::from_integer(1));
    }

    #[test]
    fn assumption_ratios() {
        let r = DegreeSequence::permutation(10).unwrap().check_assumptions();
        let a1 = r.get(Condition::A1Lower);
        assert_eq!(a1.lhs, 0.0);
        assert!(a1.degenerate);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = generate(&GeneratorKind::TwoZero, 200, &mut rng)
            .unwrap()
            .check_assumptions();
        let ap = r.get(Condition::APlus).ratio;
        assert!((ap - 200f64.cbrt() / 200f64.ln()).abs() < 1e-12);
        assert!((ap - 1.10).abs() < 0.01);
        let a2 = r.get(Condition::A2).ratio;
        assert!((a2 - 2.0 / 200f64.sqrt()).abs() < 1e-12);
        assert!((a2 - 0.141).abs() < 1e-3);
    }

    #[test]
    fn generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = generate(&GeneratorKind::TwoZero, 6, &mut rng).unwrap();
        let mut sorted = d.as_slice().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 0, 0, 2, 2, 2]);
        assert_eq!(
            generate(&GeneratorKind::TwoZero, 7, &mut rng).unwrap().as_slice(),
            &[2, 2, 2, 1, 0, 0, 0]
        );
        assert_eq!(
            generate(&GeneratorKind::Permutation, 4, &mut rng).unwrap().as_slice(),
            &[1, 1, 1, 1]
        );
        let m = generate(&GeneratorKind::Multinomial, 5, &mut rng).unwrap();
        assert_eq!(m.as_slice().iter().sum::<u32>(), 5);
        let mix = generate(&GeneratorKind::BinaryMix { counts: [2, 3, 0, 1] }, 0, &mut rng).unwrap();
        assert_eq!(mix.as_slice(), &[3, 1, 1, 1, 0, 0]);
        assert!(matches!(
            generate(&GeneratorKind::BinaryMix { counts: [1, 1, 1, 1] }, 0, &mut rng),
            Err(Error::InfeasibleParams(_))
        ));
    }

    #[test]
    fn generator_spec_parsing() {
        assert_eq!(GeneratorKind::parse("two_zero").unwrap(), GeneratorKind::TwoZero);
        assert_eq!(
            GeneratorKind::parse("binary_mix:2,3,0,1").unwrap(),
            GeneratorKind::BinaryMix { counts: [2, 3, 0, 1] }
        );
        assert_eq!(
            GeneratorKind::parse("custom:1,2,0,0,2").unwrap(),
            GeneratorKind::Custom(vec![1, 2, 0, 0, 2])
        );
        assert!(GeneratorKind::parse("nope").is_err());
    }

    #[test]
    fn text_formats() {
        let ds = DegreeSequence::new(&[1, 2, 0, 0, 2]).unwrap();
        assert_eq!(DegreeSequence::parse(&ds.to_lines()).unwrap(), ds);
        assert_eq!(DegreeSequence::parse(&ds.to_csv()).unwrap(), ds);
        assert_eq!(DegreeSequence::parse("# c\n1\n\n1\n").unwrap().n(), 2);
        assert!(DegreeSequence::parse("1\nx\n").is_err());
    }

    fn valid_sequence() -> impl Strategy<Value = DegreeSequence> {
        (1usize..60, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            generate(&GeneratorKind::Multinomial, n, &mut rng).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn n_sigma2_is_sum_of_squared_excess(ds in valid_sequence()) {
            let s = ds.stats();
            let direct: i128 = ds.as_slice().iter().map(|&d| (d as i128 - 1).pow(2)).sum();
            prop_assert_eq!(s.n_sigma2 as i128, direct);
            prop_assert_eq!(s.sigma2 * Ratio::from_integer(s.n as u128), Ratio::from_integer(s.n_sigma2));
            prop_assert_eq!(s.sigma2 + Ratio::from_integer(1), Ratio::new(s.m2, s.n as u128));
        }

        #[test]
        fn degree_one_count_bound(ds in valid_sequence()) {
            let s = ds.stats();
            prop_assert!(s.num_deg1 as i128 >= s.n as i128 - s.n_sigma2 as i128);
            prop_assert!(s.delta as usize <= s.n);
            prop_assert!(s.m3 <= s.delta as u128 * s.m2);
        }

        #[test]
        fn stats_are_permutation_invariant(ds in valid_sequence(), seed in any::<u64>()) {
            let mut d = ds.as_slice().to_vec();
            d.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let shuffled = DegreeSequence::from_degrees(d).unwrap();
            prop_assert_eq!(ds.stats(), shuffled.stats());
        }
    }
}
