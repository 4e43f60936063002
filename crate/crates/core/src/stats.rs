//! Goodness-of-fit statistics and summary moments.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Minimum expected count per chi-square bin after merging.
pub const MIN_EXPECTED: f64 = 5.0;

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of the mean.
    pub std_error: f64,
}

impl Moments {
    pub fn of<I: IntoIterator<Item = f64>>(values: I) -> Self {
        // Welford
        let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
        for x in values {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
        let variance = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
        Self {
            count,
            mean,
            variance,
            std_error: (variance / count.max(1) as f64).sqrt(),
        }
    }
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS distance needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// KS distance between integer samples and a discrete law given by its CDF
/// at each integer (`cdf[k] = P(X <= k)`, taken as 1 past the end).
pub fn ks_distance_discrete(samples: &[u64], cdf: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS distance needs at least one sample".into()));
    }
    let max = samples.iter().copied().max().unwrap() as usize;
    let top = max.max(cdf.len().saturating_sub(1));
    let mut counts = vec![0u64; top + 1];
    for &s in samples {
        counts[s as usize] += 1;
    }
    let n = samples.len() as f64;
    let mut acc = 0u64;
    let mut d = 0.0f64;
    for (k, &c) in counts.iter().enumerate() {
        acc += c;
        let f = cdf.get(k).copied().unwrap_or(1.0);
        d = d.max((acc as f64 / n - f).abs());
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of bins after merging.
    pub bins: usize,
}

pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if statistic <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64)
        .map(|c| c.sf(statistic))
        .unwrap_or(f64::NAN)
}

/// Merges adjacent bins left to right until each holds at least
/// `MIN_EXPECTED` expected mass; a short final group joins its neighbour.
fn merge_bins(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut o, mut e) = (0.0, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected) {
        o += oi;
        e += ei;
        if e >= MIN_EXPECTED {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        if let (Some(lo), Some(le)) = (obs.last_mut(), exp.last_mut()) {
            *lo += o;
            *le += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    (obs, exp)
}

/// Pearson statistic of already-merged bins; the caller sets the degrees of
/// freedom.
pub(crate) fn pearson(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .collect::<NeumaierSum>()
        .value()
}

/// Goodness of fit of observed counts against expected counts for a fully
/// specified law (`dof = bins - 1`).
pub fn chi_square(observed: &[f64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() {
        return Err(Error::Domain("observed and expected lengths differ".into()));
    }
    if let Some((i, _)) = observed
        .iter()
        .zip(expected)
        .enumerate()
        .find(|(_, (&o, &e))| o > 0.0 && e <= 0.0)
    {
        return Err(Error::DegenerateBins(format!(
            "bin {i} has observations but zero expected mass"
        )));
    }
    let (obs, exp) = merge_bins(observed, expected);
    if obs.len() < 2 {
        return Err(Error::DegenerateBins(format!(
            "only {} bin(s) with expected count >= {MIN_EXPECTED}",
            obs.len()
        )));
    }
    let statistic = pearson(&obs, &exp);
    let dof = obs.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        bins: obs.len(),
    })
}

/// Observed integer counts against a probability vector.
pub fn chi_square_counts(counts: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    let total: u64 = counts.iter().sum();
    let len = counts.len().max(probs.len());
    let observed: Vec<f64> = (0..len).map(|i| counts.get(i).copied().unwrap_or(0) as f64).collect();
    let expected: Vec<f64> = (0..len)
        .map(|i| probs.get(i).copied().unwrap_or(0.0) * total as f64)
        .collect();
    chi_square(&observed, &expected)
}

/// Two-sample homogeneity test on binned counts.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    let len = a.len().max(b.len());
    let get = |x: &[u64], i: usize| x.get(i).copied().unwrap_or(0) as f64;
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateBins("empty sample".into()));
    }
    let share = na.min(nb) / (na + nb);
    // merge on pooled counts so that the smaller expected count reaches the minimum
    let pooled: Vec<f64> = (0..len).map(|i| (get(a, i) + get(b, i)) * share).collect();
    let (mut groups, mut acc, mut start) = (Vec::new(), 0.0, 0usize);
    for (i, &p) in pooled.iter().enumerate() {
        acc += p;
        if acc >= MIN_EXPECTED {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < len {
        match groups.last_mut() {
            Some(last) => last.end = len,
            None => groups.push(start..len),
        }
    }
    if groups.len() < 2 {
        return Err(Error::DegenerateBins("fewer than two populated bins".into()));
    }
    let mut stat = NeumaierSum::default();
    for g in &groups {
        let oa: f64 = g.clone().map(|i| get(a, i)).sum();
        let ob: f64 = g.clone().map(|i| get(b, i)).sum();
        let ea = (oa + ob) * na / (na + nb);
        let eb = (oa + ob) * nb / (na + nb);
        stat.add((oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb);
    }
    let statistic = stat.value();
    let dof = groups.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
        bins: groups.len(),
    })
}

/// Histogram of non-negative integer samples.
pub fn counts_of(samples: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut counts = Vec::new();
    for s in samples {
        let s = s as usize;
        if s >= counts.len() {
            counts.resize(s + 1, 0);
        }
        counts[s] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn neumaier_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let s: NeumaierSum = xs.iter().copied().collect();
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.count, 4);
    }

    #[test]
    fn ks_null_calibration() {
        // 95% null quantile of sqrt(N) D is about 1.36
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 4000;
        let mut exceed = 0;
        for _ in 0..200 {
            let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
            if d > 1.36 / (n as f64).sqrt() {
                exceed += 1;
            }
        }
        // about 10 of 200 expected
        assert!(exceed < 25, "exceedances {exceed}");
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn ks_discrete_of_exact_frequencies_is_zero() {
        let samples = [0, 1, 1, 2];
        let cdf = [0.25, 0.75, 1.0];
        assert_eq!(ks_distance_discrete(&samples, &cdf).unwrap(), 0.0);
        let d = ks_distance_discrete(&[0, 0, 0, 0], &cdf).unwrap();
        assert!((d - 0.75).abs() < 1e-15);
    }

    #[test]
    fn chi_square_identity() {
        let obs = [10.0, 20.0, 30.0];
        let r = chi_square(&obs, &obs).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.dof, 2);
    }

    #[test]
    fn chi_square_known_value() {
        // fair die, 60 rolls: stat = (4+1+0+1+4+0)/10 = 1.0, dof 5
        let r = chi_square(&[8.0, 9.0, 10.0, 11.0, 12.0, 10.0], &[10.0; 6]).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 0.962_565_773_9).abs() < 1e-8);
    }

    #[test]
    fn chi_square_merges_sparse_tails() {
        let r = chi_square(&[50.0, 45.0, 3.0, 1.0, 1.0], &[50.0, 44.0, 4.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.bins, 3);
        let r = chi_square(&[50.0, 45.0, 3.0, 2.0], &[50.0, 46.0, 2.0, 2.0]).unwrap();
        assert_eq!(r.bins, 2);
        assert!(matches!(chi_square(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::DegenerateBins(_))));
        assert!(matches!(chi_square(&[1.0, 9.0], &[0.0, 10.0]), Err(Error::DegenerateBins(_))));
    }

    #[test]
    fn two_sample_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draw = |rng: &mut ChaCha8Rng| counts_of((0..20_000).map(|_| rng.gen_range(0..10u64)));
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        assert!(chi_square_two_sample(&a, &b).unwrap().p_value > 0.001);
        let shifted = counts_of((0..20_000).map(|_| rng.gen_range(1..11u64)));
        assert!(chi_square_two_sample(&a, &shifted).unwrap().p_value < 1e-6);
    }
}
