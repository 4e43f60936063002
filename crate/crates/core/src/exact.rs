//! Exact law of the six-length and of the joint (six, tail) pair.
//!
//! For a start vertex `v` the survival function has the closed form
//!
//! ```text
//! P(SL > k) = k! e_k(d without v) / <n>_k
//! ```
//!
//! where `e_k` is the k-th elementary symmetric polynomial of the degrees
//! and `<n>_k` the falling factorial. Writing `g(k) = k! e_k(d) / <n>_k`,
//! the same quantity satisfies `P(SL > k) = g(k) - k d_v / (n-k+1) P(SL > k-1)`.
//!
//! Two backends are offered. The rational backend keeps integers and
//! rationals exact and uses the `g` recursion. The floating backend never
//! subtracts: it runs the elementary-symmetric recurrence on the scaled
//! quantities `k! e_k / <n>_k`, which stay in `[0, 1]`, with `v` left out.
//! The recursion itself amplifies rounding error by roughly
//! `prod_k k d_v / (n-k+1)`, which is astronomically large past `k = n/2`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::degrees::{DegreeSequence, DegreeStats};
use crate::error::{Error, Result};

pub const DEFAULT_RATIONAL_LIMIT: usize = 200;
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Backend {
    Rational,
    Float,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Backend::Rational),
            "float" => Ok(Backend::Float),
            other => Err(Error::Parse(format!("unknown backend `{other}`"))),
        }
    }
}

/// `ceil(8 sqrt(n / sigma^2))` capped at `n - 1`; `n - 1` when sigma^2 = 0.
pub fn default_k_max(stats: &DegreeStats) -> usize {
    let cap = stats.n.saturating_sub(1);
    if stats.n_sigma2 == 0 {
        return cap;
    }
    let k = (8.0 * stats.scale()).ceil();
    if k >= cap as f64 {
        cap
    } else {
        k as usize
    }
}

pub fn falling_factorial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, j| acc * BigUint::from(n - j))
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, j| acc * BigUint::from(j))
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn ratio_u64(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_k(ds: &DegreeSequence, k_max: usize) -> Result<()> {
    if k_max > ds.n() {
        Err(Error::Domain(format!("k_max = {k_max} exceeds n = {}", ds.n())))
    } else {
        Ok(())
    }
}

/// `e[k] = sum_{i_1 < ... < i_k} prod d_{i_j}` for `k = 0..=k_max`, exactly.
pub fn elementary_symmetric_prefix(ds: &DegreeSequence, k_max: usize) -> Result<Vec<BigUint>> {
    check_k(ds, k_max)?;
    Ok(exact_prefix(ds.as_slice().iter().copied(), k_max))
}

fn exact_prefix(degrees: impl Iterator<Item = u32>, k_max: usize) -> Vec<BigUint> {
    let mut e = vec![BigUint::zero(); k_max + 1];
    e[0] = BigUint::one();
    let mut seen = 0usize;
    for d in degrees.filter(|&d| d > 0) {
        seen += 1;
        for k in (1..=k_max.min(seen)).rev() {
            let add = &e[k - 1] * d;
            e[k] += add;
        }
    }
    e
}

/// `log e[k]` accumulated with log-sum-exp; `-inf` where `e[k] = 0`.
pub fn log_elementary_symmetric_prefix(ds: &DegreeSequence, k_max: usize) -> Result<Vec<f64>> {
    check_k(ds, k_max)?;
    let mut le = vec![f64::NEG_INFINITY; k_max + 1];
    le[0] = 0.0;
    let mut seen = 0usize;
    for &d in ds.as_slice().iter().filter(|&&d| d > 0) {
        seen += 1;
        let ld = (d as f64).ln();
        for k in (1..=k_max.min(seen)).rev() {
            le[k] = log_add_exp(le[k], ld + le[k - 1]);
        }
    }
    Ok(le)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `s[k] = k! e_k / <n>_k` over the given degrees, with `n` the full vertex
/// count. All terms are non-negative and every entry lies in `[0, 1]`.
fn scaled_prefix(degrees: impl Iterator<Item = u32>, n: usize, k_max: usize) -> Vec<f64> {
    // step[k] = k / (n - k + 1) turns k!/<n>_k into (k-1)!/<n>_{k-1}
    let step: Vec<f64> = (0..=k_max)
        .map(|k| if k == 0 { 0.0 } else { k as f64 / (n - k + 1) as f64 })
        .collect();
    let mut s = vec![0.0f64; k_max + 1];
    s[0] = 1.0;
    let mut seen = 0usize;
    for d in degrees.filter(|&d| d > 0) {
        seen += 1;
        let d = d as f64;
        for k in (1..=k_max.min(seen)).rev() {
            s[k] += d * step[k] * s[k - 1];
        }
    }
    s
}

/// `g[k] = k! e[k] / <n>_k`, exactly.
pub fn g_table(ds: &DegreeSequence, k_max: usize) -> Result<Vec<BigRational>> {
    let e = elementary_symmetric_prefix(ds, k_max)?;
    let n = ds.n();
    Ok(e
        .into_iter()
        .enumerate()
        .map(|(k, ek)| ratio(factorial(k) * ek, falling_factorial(n, k)))
        .collect())
}

/// Floating `g[k]`.
pub fn g_table_f64(ds: &DegreeSequence, k_max: usize) -> Result<Vec<f64>> {
    check_k(ds, k_max)?;
    Ok(scaled_prefix(ds.as_slice().iter().copied(), ds.n(), k_max))
}

/// Bounds on `P(SL > k)` that follow from the `g` recursion:
/// `(n-k)/(n-k+(k+1)d_v) g[k+1] <= P(SL > k) <= (n-k+1)/(n-k+1+k d_v) g[k]`.
pub fn sandwich_bounds(ds: &DegreeSequence, v: usize, k: usize) -> Result<(BigRational, BigRational)> {
    ds.check_vertex(v)?;
    let n = ds.n();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("sandwich bounds need 1 <= k <= n-1, got k = {k}")));
    }
    let g = g_table(ds, k + 1)?;
    let dv = ds.degree(v) as u64;
    let (n64, k64) = (n as u64, k as u64);
    let lower = ratio_u64(n64 - k64, n64 - k64 + (k64 + 1) * dv) * &g[k + 1];
    let upper = ratio_u64(n64 - k64 + 1, n64 - k64 + 1 + k64 * dv) * &g[k];
    Ok((lower, upper))
}

pub fn sandwich_bounds_f64(ds: &DegreeSequence, v: usize, k: usize) -> Result<(f64, f64)> {
    ds.check_vertex(v)?;
    let n = ds.n();
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("sandwich bounds need 1 <= k <= n-1, got k = {k}")));
    }
    let g = g_table_f64(ds, k + 1)?;
    let dv = ds.degree(v) as f64;
    let (nf, kf) = (n as f64, k as f64);
    let lower = (nf - kf) / (nf - kf + (kf + 1.0) * dv) * g[k + 1];
    let upper = (nf - kf + 1.0) / (nf - kf + 1.0 + kf * dv) * g[k];
    Ok((lower, upper))
}

/// `surv[k] = P(SL_n(v) > k)` for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalTable {
    pub v: usize,
    pub n: usize,
    pub backend: Backend,
    pub surv: Vec<f64>,
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
    /// Floating values pushed back into `[0, 1]`.
    pub clamped: usize,
}

impl SurvivalTable {
    pub fn k_max(&self) -> usize {
        self.surv.len() - 1
    }

    /// `P(SL > k)`, zero past the table when the table reaches `n - 1`.
    pub fn get(&self, k: usize) -> f64 {
        self.surv.get(k).copied().unwrap_or(0.0)
    }

    pub fn pmf(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.get(k - 1) - self.get(k)
        }
    }

    pub fn cdf(&self, k: usize) -> f64 {
        1.0 - self.get(k)
    }

    /// `sum_k P(SL > k)`; equals `E[SL]` when the table covers the support.
    pub fn mean(&self) -> f64 {
        let mut acc = crate::stats::NeumaierSum::default();
        for &s in &self.surv {
            acc.add(s);
        }
        acc.value()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,surv\n");
        for (k, s) in self.surv.iter().enumerate() {
            let _ = writeln!(out, "{k},{s:e}");
        }
        out
    }

    /// `k,p/q` rows; `None` for the floating backend.
    pub fn to_exact_text(&self) -> Option<String> {
        let exact = self.exact.as_ref()?;
        let mut out = String::from("k,surv\n");
        for (k, s) in exact.iter().enumerate() {
            let _ = writeln!(out, "{k},{}/{}", s.numer(), s.denom());
        }
        Some(out)
    }
}

/// `p[k][j] = P(SL = k, TL = j)` for `1 <= k <= k_max`, `0 <= j < k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointLaw<T> {
    pub v: usize,
    pub n: usize,
    /// `p[0]` is empty.
    pub p: Vec<Vec<T>>,
}

impl<T> JointLaw<T> {
    pub fn k_max(&self) -> usize {
        self.p.len() - 1
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.p[k]
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.p
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().enumerate().map(move |(j, x)| (k, j, x)))
    }
}

impl JointLaw<BigRational> {
    pub fn total(&self) -> BigRational {
        self.cells().fold(BigRational::zero(), |acc, (_, _, x)| acc + x)
    }

    /// Every row `k >= 2` has `p[k][1] == ... == p[k][k-1]`.
    pub fn tail_is_conditionally_uniform(&self) -> bool {
        self.p.iter().skip(2).all(|row| row[1..].iter().all(|x| *x == row[1]))
    }

    pub fn to_f64(&self) -> JointLaw<f64> {
        JointLaw {
            v: self.v,
            n: self.n,
            p: self.p.iter().map(|row| row.iter().map(rational_to_f64).collect()).collect(),
        }
    }

    pub fn to_exact_text(&self) -> String {
        let mut out = String::from("k,j,p\n");
        for (k, j, x) in self.cells() {
            let _ = writeln!(out, "{k},{j},{}/{}", x.numer(), x.denom());
        }
        out
    }
}

impl JointLaw<f64> {
    pub fn total(&self) -> f64 {
        let mut acc = crate::stats::NeumaierSum::default();
        for (_, _, &x) in self.cells() {
            acc.add(x);
        }
        acc.value()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,j,p\n");
        for (k, j, x) in self.cells() {
            let _ = writeln!(out, "{k},{j},{x:e}");
        }
        out
    }
}

/// Configured limits for the exact engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactEngine {
    pub rational_limit: usize,
    pub enumeration_budget: u64,
}

impl Default for ExactEngine {
    fn default() -> Self {
        Self {
            rational_limit: DEFAULT_RATIONAL_LIMIT,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }
}

impl ExactEngine {
    pub fn survival(&self, ds: &DegreeSequence, v: usize, k_max: usize, backend: Backend) -> Result<SurvivalTable> {
        ds.check_vertex(v)?;
        check_k(ds, k_max)?;
        match backend {
            Backend::Rational => {
                let exact = self.survival_exact(ds, v, k_max)?;
                Ok(SurvivalTable {
                    v,
                    n: ds.n(),
                    backend,
                    surv: exact.iter().map(rational_to_f64).collect(),
                    exact: Some(exact),
                    clamped: 0,
                })
            }
            Backend::Float => {
                let mut surv = scaled_prefix(
                    ds.as_slice()
                        .iter()
                        .enumerate()
                        .map(|(j, &d)| if j == v { 0 } else { d }),
                    ds.n(),
                    k_max,
                );
                let mut clamped = 0;
                for s in surv.iter_mut() {
                    if !(0.0..=1.0).contains(s) {
                        *s = s.clamp(0.0, 1.0);
                        clamped += 1;
                    }
                }
                Ok(SurvivalTable {
                    v,
                    n: ds.n(),
                    backend,
                    surv,
                    exact: None,
                    clamped,
                })
            }
        }
    }

    /// Seeded with `surv[0] = 1`; the first step of the recursion then gives
    /// `surv[1] = 1 - d_v / n`, the probability that `f(v) != v`.
    fn survival_exact(&self, ds: &DegreeSequence, v: usize, k_max: usize) -> Result<Vec<BigRational>> {
        let n = ds.n();
        if n > self.rational_limit {
            return Err(Error::OracleLimitExceeded {
                n,
                limit: self.rational_limit,
            });
        }
        let g = g_table(ds, k_max)?;
        let dv = ds.degree(v) as u64;
        let mut surv = Vec::with_capacity(k_max + 1);
        surv.push(BigRational::one());
        for k in 1..=k_max {
            let coef = ratio_u64(k as u64 * dv, (n - k + 1) as u64);
            let next = &g[k] - coef * &surv[k - 1];
            surv.push(next);
        }
        Ok(surv)
    }

    pub fn joint_law_exact(&self, ds: &DegreeSequence, v: usize, k_max: usize) -> Result<JointLaw<BigRational>> {
        ds.check_vertex(v)?;
        let surv = self.survival_exact(ds, v, k_max)?;
        let n = ds.n() as u64;
        let dv = ds.degree(v) as u64;
        let mut p = vec![Vec::new()];
        for k in 1..=k_max {
            let six = &surv[k - 1] - &surv[k];
            let tail0 = ratio_u64(dv, n - k as u64 + 1) * &surv[k - 1];
            let mut row = Vec::with_capacity(k);
            if k >= 2 {
                let rest = (&six - &tail0) / BigRational::from_integer(BigInt::from(k - 1));
                row.push(tail0);
                row.extend(std::iter::repeat_n(rest, k - 1));
            } else {
                row.push(tail0);
            }
            p.push(row);
        }
        Ok(JointLaw { v, n: ds.n(), p })
    }

    pub fn joint_law_f64(&self, ds: &DegreeSequence, v: usize, k_max: usize) -> Result<JointLaw<f64>> {
        let table = self.survival(ds, v, k_max, Backend::Float)?;
        let n = ds.n() as f64;
        let dv = ds.degree(v) as f64;
        let mut p = vec![Vec::new()];
        for k in 1..=k_max {
            let six = table.get(k - 1) - table.get(k);
            let tail0 = dv / (n - k as f64 + 1.0) * table.get(k - 1);
            let mut row = vec![tail0];
            if k >= 2 {
                let rest = ((six - tail0) / (k - 1) as f64).max(0.0);
                row.extend(std::iter::repeat_n(rest, k - 1));
            }
            p.push(row);
        }
        Ok(JointLaw { v, n: ds.n(), p })
    }

    /// Exhaustive enumeration of every mapping with degree sequence `ds`.
    pub fn brute_force_oracle(&self, ds: &DegreeSequence, v: usize) -> Result<JointLaw<BigRational>> {
        ds.check_vertex(v)?;
        let mut all = self.brute_force_all(ds)?;
        Ok(all.swap_remove(v))
    }

    /// Oracle laws for every start vertex from a single enumeration pass.
    pub fn brute_force_all(&self, ds: &DegreeSequence) -> Result<Vec<JointLaw<BigRational>>> {
        let total = multinomial(ds);
        if total > BigUint::from(self.enumeration_budget) {
            return Err(Error::BudgetExceeded {
                count: total.to_string(),
                budget: self.enumeration_budget,
            });
        }
        let n = ds.n();
        let mut tallies: Vec<HashMap<(u64, u64), u64>> = vec![HashMap::new(); n];
        let mut visited = vec![u32::MAX; n];
        let mut count = 0u64;
        for_each_multiset_permutation(ds.slots(), |image| {
            count += 1;
            for (v, tally) in tallies.iter_mut().enumerate() {
                let w = walk_small(image, v, &mut visited);
                *tally.entry(w).or_insert(0) += 1;
            }
        });
        debug_assert_eq!(BigUint::from(count), total);
        Ok(tallies
            .into_iter()
            .enumerate()
            .map(|(v, tally)| {
                let mut p: Vec<Vec<BigRational>> = (0..=n).map(|k| vec![BigRational::zero(); k]).collect();
                for ((six, tail), c) in tally {
                    p[six as usize][tail as usize] = ratio_u64(c, count);
                }
                JointLaw { v, n, p }
            })
            .collect())
    }
}

/// `n! / prod d_i!`, the number of mappings with the given degrees.
pub fn multinomial(ds: &DegreeSequence) -> BigUint {
    let denom = ds
        .as_slice()
        .iter()
        .fold(BigUint::one(), |acc, &d| acc * factorial(d as usize));
    factorial(ds.n()) / denom
}

fn walk_small(image: &[u32], v: usize, visited: &mut [u32]) -> (u64, u64) {
    let mut x = v;
    let mut step = 0u32;
    let result = loop {
        if visited[x] != u32::MAX {
            break (step as u64, visited[x] as u64);
        }
        visited[x] = step;
        x = image[x] as usize;
        step += 1;
    };
    let mut x = v;
    while visited[x] != u32::MAX {
        visited[x] = u32::MAX;
        x = image[x] as usize;
    }
    result
}

/// Visits every distinct arrangement of `items` in lexicographic order.
pub fn for_each_multiset_permutation<F: FnMut(&[u32])>(mut items: Vec<u32>, mut visit: F) {
    items.sort_unstable();
    loop {
        visit(&items);
        if !next_permutation(&mut items) {
            return;
        }
    }
}

fn next_permutation(a: &mut [u32]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}
