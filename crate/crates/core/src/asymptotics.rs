//! Closed-form approximations of `g(k) = k! e_k(d) / <n>_k` and the
//! limiting Rayleigh reference law.
//!
//! With `alpha = k/n` and `lambda = sum_j alpha d_j / (alpha d_j + 1)`:
//!
//! * `Product`:  `(1-alpha)^(n-k) prod_j (alpha d_j + 1)`
//! * `Refined`:  `Product * e^(k-lambda) (lambda/k)^k`
//! * `Rayleigh`: `exp(-k^2 sigma^2 / 2n)`
//!
//! Products are evaluated as compensated sums of logs over the degree
//! histogram, never formed directly.

use std::fmt::Write as _;

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::degrees::{DegreeSequence, DegreeStats};
use crate::error::{Error, Result};
use crate::stats::NeumaierSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ApproxLevel {
    Rayleigh,
    Refined,
    Product,
}

impl ApproxLevel {
    pub const ALL: [ApproxLevel; 3] = [ApproxLevel::Rayleigh, ApproxLevel::Refined, ApproxLevel::Product];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Approximation {
    pub value: f64,
    pub log_value: f64,
    /// sigma^2 = 0: the sequence is a permutation and the Rayleigh scale is
    /// infinite.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lambda {
    pub lambda: f64,
    /// `k - k^2 m2 / n^2`
    pub second_order: f64,
}

/// Degree histogram view used by every closed form here.
struct Histogram {
    n: f64,
    sigma2: f64,
    m2: f64,
    groups: Vec<(f64, f64)>,
}

impl Histogram {
    fn of(ds: &DegreeSequence) -> Self {
        let stats = ds.stats();
        Self {
            n: ds.n() as f64,
            sigma2: stats.sigma2_f64(),
            m2: stats.m2 as f64,
            groups: ds
                .histogram()
                .into_iter()
                .filter(|&(d, _)| d > 0)
                .map(|(d, c)| (d as f64, c as f64))
                .collect(),
        }
    }

    fn lambda(&self, alpha: f64) -> f64 {
        self.groups
            .iter()
            .map(|&(d, c)| c * (alpha * d / (alpha * d + 1.0)))
            .collect::<NeumaierSum>()
            .value()
    }

    fn log_product(&self, k: f64) -> f64 {
        let alpha = k / self.n;
        let mut acc: NeumaierSum = self.groups.iter().map(|&(d, c)| c * (alpha * d).ln_1p()).collect();
        acc.add((self.n - k) * (-alpha).ln_1p());
        acc.value()
    }
}

fn check_k(ds: &DegreeSequence, k: usize, allow_n: bool) -> Result<()> {
    let n = ds.n();
    let ok = if allow_n { k <= n } else { k >= 1 && k < n };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("k = {k} outside the admissible range for n = {n}")))
    }
}

pub fn lambda_of(ds: &DegreeSequence, k: usize) -> Result<Lambda> {
    check_k(ds, k, true)?;
    let h = Histogram::of(ds);
    let kf = k as f64;
    Ok(Lambda {
        lambda: h.lambda(kf / h.n),
        second_order: kf - kf * kf * h.m2 / (h.n * h.n),
    })
}

pub fn g_approx(ds: &DegreeSequence, k: usize, level: ApproxLevel) -> Result<Approximation> {
    check_k(ds, k, false)?;
    let h = Histogram::of(ds);
    Ok(g_approx_with(&h, k, level))
}

fn g_approx_with(h: &Histogram, k: usize, level: ApproxLevel) -> Approximation {
    let kf = k as f64;
    let log_value = match level {
        ApproxLevel::Rayleigh => -kf * kf * h.sigma2 / (2.0 * h.n),
        ApproxLevel::Product => h.log_product(kf),
        ApproxLevel::Refined => {
            let lambda = h.lambda(kf / h.n);
            h.log_product(kf) + (kf - lambda) + kf * (lambda / kf).ln()
        }
    };
    Approximation {
        value: log_value.exp(),
        log_value,
        degenerate: h.sigma2 == 0.0,
    }
}

/// `k / (n^2/m2)^(2/3)`; the refined form is justified while this is small.
pub fn refined_range_ratio(stats: &DegreeStats, k: usize) -> f64 {
    let n = stats.n as f64;
    k as f64 / (n * n / stats.m2 as f64).powf(2.0 / 3.0)
}

/// Standard Rayleigh law: `P(X > x) = exp(-x^2/2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rayleigh;

impl Rayleigh {
    pub fn cdf(x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("Rayleigh CDF needs x >= 0, got {x}")));
        }
        Ok(-(-x * x / 2.0).exp_m1())
    }

    pub fn sf(x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::Domain(format!("Rayleigh survival needs x >= 0, got {x}")));
        }
        Ok((-x * x / 2.0).exp())
    }

    pub fn quantile(p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("Rayleigh quantile needs 0 < p < 1, got {p}")));
        }
        Ok((-2.0 * (-p).ln_1p()).sqrt())
    }

    /// `E[X^p] = 2^(p/2) Gamma(1 + p/2)`.
    pub fn moment(p: f64) -> Result<f64> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("Rayleigh moment needs order >= 1, got {p}")));
        }
        Ok(2f64.powf(p / 2.0) * gamma(1.0 + p / 2.0))
    }

    pub fn mean() -> f64 {
        (std::f64::consts::PI / 2.0).sqrt()
    }

    pub fn variance() -> f64 {
        (4.0 - std::f64::consts::PI) / 2.0
    }

    /// `E[U X]` for `U ~ Uniform(0,1)` independent of `X`.
    pub fn uniform_product_mean() -> f64 {
        (std::f64::consts::PI / 8.0).sqrt()
    }
}

/// Limiting predictions for a given sequence, in units of steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPredictions {
    pub scale: f64,
    /// `sqrt(pi n / 2 sigma^2)`
    pub six_mean: f64,
    /// `(4 - pi) n / (2 sigma^2)`
    pub six_variance: f64,
    /// `sqrt(pi n / 8 sigma^2)`, also the cycle-length mean
    pub tail_mean: f64,
}

impl LimitPredictions {
    pub fn of(stats: &DegreeStats) -> Option<Self> {
        if stats.n_sigma2 == 0 {
            return None;
        }
        let scale = stats.scale();
        Some(Self {
            scale,
            six_mean: Rayleigh::mean() * scale,
            six_variance: Rayleigh::variance() * scale * scale,
            tail_mean: Rayleigh::uniform_product_mean() * scale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct M3Check {
    pub m3: u128,
    /// `(Delta + 2) n sigma^2 + n`
    pub bound: u128,
    pub holds: bool,
    /// `m3 / (n sigma^2)^(3/2)`, absent when sigma^2 = 0.
    pub ratio: Option<f64>,
}

pub fn m3_bound_check(ds: &DegreeSequence) -> M3Check {
    let s = ds.stats();
    let bound = (s.delta as u128 + 2) * s.n_sigma2 + s.n as u128;
    M3Check {
        m3: s.m3,
        bound,
        holds: s.m3 <= bound,
        ratio: (s.n_sigma2 > 0).then(|| s.m3 as f64 / (s.n_sigma2 as f64).powf(1.5)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub k: usize,
    pub exact: f64,
    pub rayleigh: f64,
    pub refined: f64,
    pub product: f64,
}

impl LadderRow {
    fn rel(&self, approx: f64) -> f64 {
        (approx - self.exact).abs() / self.exact
    }

    pub fn rel_err(&self, level: ApproxLevel) -> f64 {
        match level {
            ApproxLevel::Rayleigh => self.rel(self.rayleigh),
            ApproxLevel::Refined => self.rel(self.refined),
            ApproxLevel::Product => self.rel(self.product),
        }
    }

    pub fn abs_err(&self, level: ApproxLevel) -> f64 {
        let a = match level {
            ApproxLevel::Rayleigh => self.rayleigh,
            ApproxLevel::Refined => self.refined,
            ApproxLevel::Product => self.product,
        };
        (a - self.exact).abs()
    }
}

/// Exact `g[k]` (floating backend) next to every approximation level.
pub fn ladder(ds: &DegreeSequence, ks: &[usize]) -> Result<Vec<LadderRow>> {
    let k_top = ks.iter().copied().max().unwrap_or(0);
    for &k in ks {
        check_k(ds, k, false)?;
    }
    let exact = crate::exact::g_table_f64(ds, k_top)?;
    let h = Histogram::of(ds);
    Ok(ks
        .iter()
        .map(|&k| LadderRow {
            k,
            exact: exact[k],
            rayleigh: g_approx_with(&h, k, ApproxLevel::Rayleigh).value,
            refined: g_approx_with(&h, k, ApproxLevel::Refined).value,
            product: g_approx_with(&h, k, ApproxLevel::Product).value,
        })
        .collect())
}

pub fn ladder_csv(rows: &[LadderRow]) -> String {
    let mut out =
        String::from("k,exact,rayleigh,refined,product,rel_err_rayleigh,rel_err_refined,rel_err_product\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.k,
            r.exact,
            r.rayleigh,
            r.refined,
            r.product,
            r.rel_err(ApproxLevel::Rayleigh),
            r.rel_err(ApproxLevel::Refined),
            r.rel_err(ApproxLevel::Product)
        );
    }
    out
}
