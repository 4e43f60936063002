//! Monte-Carlo harness.
//!
//! Trial `i` draws from its own ChaCha stream (`seed`, stream `i`), so the
//! records, and everything computed from them, do not depend on the number
//! of worker threads or on scheduling.

use std::fmt::Write as _;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{LimitPredictions, Rayleigh};
use crate::degrees::{generate, DegreeSequence, GeneratorKind};
use crate::error::{Error, Result};
use crate::exact::{default_k_max, Backend, ExactEngine};
use crate::graph::{FunctionalGraph, LazyWalker};
use crate::reduction::Coupler;
use crate::stats::{
    chi_square_counts, chi_square_sf, counts_of, ks_distance, ks_distance_discrete, ChiSquare, Moments,
    MIN_EXPECTED,
};

/// Minimum sample size for the joint uniformity test.
pub const MIN_JOINT_SAMPLES: f64 = 1e4;

/// Work budget (nonzero degrees times table length) for attaching the
/// exact law to a report.
pub const EXACT_WORK_LIMIT: f64 = 1e9;

/// Deterministic RNG for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DegreeSource {
    Generator { kind: String, n: usize },
    File(PathBuf),
    Explicit(DegreeSequence),
}

impl DegreeSource {
    /// `generator:<kind>[:params]` or `file:<path>`.
    pub fn parse(spec: &str, n: Option<usize>) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("generator:") {
            let needs_n = matches!(
                GeneratorKind::parse(rest)?,
                GeneratorKind::TwoZero | GeneratorKind::Permutation | GeneratorKind::Multinomial
            );
            let n = match (n, needs_n) {
                (Some(n), _) => n,
                (None, false) => 0,
                (None, true) => return Err(Error::Config(format!("generator `{rest}` needs --n"))),
            };
            Ok(DegreeSource::Generator { kind: rest.to_string(), n })
        } else if let Some(path) = spec.strip_prefix("file:") {
            Ok(DegreeSource::File(PathBuf::from(path)))
        } else {
            Err(Error::Config(format!(
                "degree spec must start with `generator:` or `file:`, got {spec:?}"
            )))
        }
    }

    /// Random generators draw from a stream reserved for the degree sequence.
    pub fn resolve(&self, seed: u64) -> Result<DegreeSequence> {
        match self {
            DegreeSource::Generator { kind, n } => {
                let mut rng = trial_rng(seed, u64::MAX);
                generate(&GeneratorKind::parse(kind)?, *n, &mut rng)
            }
            DegreeSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                DegreeSequence::parse(&text)
            }
            DegreeSource::Explicit(ds) => Ok(ds.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VertexRule {
    /// 0-indexed vertex id.
    Fixed(usize),
    MaxDegree,
    ZeroDegree,
}

impl VertexRule {
    /// `max-degree`, `zero-degree`, or a 1-indexed vertex id.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "max-degree" => Ok(VertexRule::MaxDegree),
            "zero-degree" => Ok(VertexRule::ZeroDegree),
            id => match id.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(VertexRule::Fixed(v - 1)),
                _ => Err(Error::Config(format!("bad vertex {id:?} (ids are 1-indexed)"))),
            },
        }
    }

    pub fn resolve(self, ds: &DegreeSequence) -> Result<usize> {
        match self {
            VertexRule::Fixed(v) => ds.check_vertex(v).map(|_| v),
            VertexRule::MaxDegree => Ok(ds.max_degree_vertex()),
            VertexRule::ZeroDegree => ds
                .zero_degree_vertex()
                .ok_or_else(|| Error::Config("sequence has no zero-degree vertex".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SamplerKind {
    Full,
    Lazy,
    /// Reduction + urn; yields the six-length only.
    Coupled,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SamplerKind::Full),
            "lazy" => Ok(SamplerKind::Lazy),
            "coupled" => Ok(SamplerKind::Coupled),
            other => Err(Error::Config(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistic {
    Moments,
    Ecdf,
    KsRayleigh,
    ExactLaw,
    JointUniformity,
}

impl Statistic {
    pub const ALL: [Statistic; 5] = [
        Statistic::Moments,
        Statistic::Ecdf,
        Statistic::KsRayleigh,
        Statistic::ExactLaw,
        Statistic::JointUniformity,
    ];

    /// Name accepted by `FromStr`.
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Moments => "moments",
            Statistic::Ecdf => "ecdf",
            Statistic::KsRayleigh => "ks_rayleigh",
            Statistic::ExactLaw => "exact",
            Statistic::JointUniformity => "joint",
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Statistic::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown statistic `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub degrees: DegreeSource,
    pub vertex: VertexRule,
    pub trials: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    /// `None` uses the global rayon pool. Results never depend on it.
    pub workers: Option<usize>,
    pub outputs: Vec<Statistic>,
    pub ecdf_points: usize,
}

impl ExperimentConfig {
    pub fn new(degrees: DegreeSource, trials: usize, seed: u64) -> Self {
        Self {
            degrees,
            vertex: VertexRule::Fixed(0),
            trials,
            seed,
            sampler: SamplerKind::Lazy,
            workers: None,
            outputs: Statistic::ALL.to_vec(),
            ecdf_points: 50,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn wants(&self, s: Statistic) -> bool {
        self.outputs.contains(&s)
    }
}

/// One trial: the six-length and, unless the sampler is coupled, the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub six: u64,
    pub tail: Option<u64>,
}

/// A resolved experiment: degree sequence, start vertex and sampler.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub degrees: DegreeSequence,
    pub vertex: usize,
    sampler: Sampler,
}

enum Sampler {
    Full,
    Lazy(LazyWalker),
    Coupled(Coupler),
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let degrees = config.degrees.resolve(config.seed)?;
        let vertex = config.vertex.resolve(&degrees)?;
        let sampler = match config.sampler {
            SamplerKind::Full => Sampler::Full,
            SamplerKind::Lazy => Sampler::Lazy(LazyWalker::new(&degrees)),
            SamplerKind::Coupled => Sampler::Coupled(Coupler::new(&degrees, vertex)?),
        };
        Ok(Self {
            config,
            degrees,
            vertex,
            sampler,
        })
    }

    fn trial(&self, i: u64) -> TrialRecord {
        let mut rng = trial_rng(self.config.seed, i);
        match &self.sampler {
            Sampler::Full => {
                let w = FunctionalGraph::sample_uniform(&self.degrees, &mut rng).walk_lengths(self.vertex);
                TrialRecord {
                    six: w.six,
                    tail: Some(w.tail),
                }
            }
            Sampler::Lazy(walker) => {
                let w = walker.walk(self.vertex, &mut rng);
                TrialRecord {
                    six: w.six,
                    tail: Some(w.tail),
                }
            }
            Sampler::Coupled(c) => TrialRecord {
                six: c.sample(&mut rng),
                tail: None,
            },
        }
    }

    /// Runs every trial; records are in trial order.
    pub fn sample(&self) -> Result<Vec<TrialRecord>> {
        let run = || {
            (0..self.config.trials as u64)
                .into_par_iter()
                .map(|i| self.trial(i))
                .collect::<Vec<_>>()
        };
        match self.config.workers {
            Some(w) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(pool.install(run))
            }
            None => Ok(run()),
        }
    }

    pub fn summarize(&self, records: &[TrialRecord]) -> Result<StatReport> {
        summarize(self, records)
    }
}

pub fn run_experiment(config: ExperimentConfig) -> Result<StatReport> {
    let exp = Experiment::prepare(config)?;
    let records = exp.sample()?;
    exp.summarize(&records)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactComparison {
    pub k_max: usize,
    /// `sum_k P(SL > k)` over the table.
    pub mean: f64,
    pub ks: f64,
    pub chi_square: Option<ChiSquare>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRatios {
    /// sample mean of SL over `sqrt(pi n / 2 sigma^2)`
    pub six_mean: f64,
    /// sample variance of SL over `(4 - pi) n / 2 sigma^2`
    pub six_variance: f64,
    /// sample mean of TL over `sqrt(pi n / 8 sigma^2)`
    pub tail_mean: Option<f64>,
    pub cycle_mean: Option<f64>,
    /// mean(TL) / mean(SL)
    pub tail_over_six: Option<f64>,
    /// mean(TL) / mean(CL)
    pub tail_over_cycle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatReport {
    pub n: usize,
    /// 0-indexed
    pub vertex: usize,
    pub vertex_degree: u32,
    pub sigma2: f64,
    pub scale: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub sampler: SamplerKind,
    pub six: Moments,
    pub tail: Option<Moments>,
    pub cycle: Option<Moments>,
    pub tail_zero_fraction: Option<f64>,
    /// `(x, P_hat(SL / scale <= x))`, or unscaled when sigma^2 = 0.
    pub ecdf: Vec<(f64, f64)>,
    pub ks_rayleigh: Option<f64>,
    pub exact: Option<ExactComparison>,
    pub predictions: Option<LimitPredictions>,
    pub ratios: Option<MomentRatios>,
    pub joint: Option<JointUniformity>,
    /// sigma^2 = 0: no Rayleigh scale, no tails.
    pub degenerate: bool,
    /// Statistics that were requested but skipped, with the reason.
    pub notes: Vec<String>,
}

fn summarize(exp: &Experiment, records: &[TrialRecord]) -> Result<StatReport> {
    let cfg = &exp.config;
    let ds = &exp.degrees;
    let stats = ds.stats();
    let degenerate = stats.is_permutation();
    let scale = (!degenerate).then(|| stats.scale());
    let mut notes = Vec::new();

    let six = Moments::of(records.iter().map(|r| r.six as f64));
    let tails: Option<Vec<u64>> = records.iter().map(|r| r.tail).collect();
    let tail = tails.as_ref().map(|t| Moments::of(t.iter().map(|&x| x as f64)));
    let cycle = tails
        .as_ref()
        .map(|t| Moments::of(records.iter().zip(t).map(|(r, &x)| (r.six - x) as f64)));
    let tail_zero_fraction = tails
        .as_ref()
        .map(|t| t.iter().filter(|&&x| x == 0).count() as f64 / t.len() as f64);

    let scaled: Vec<f64> = records
        .iter()
        .map(|r| r.six as f64 / scale.unwrap_or(1.0))
        .collect();

    let ecdf = if cfg.wants(Statistic::Ecdf) {
        ecdf_grid(&scaled, cfg.ecdf_points)
    } else {
        Vec::new()
    };

    let ks_rayleigh = if cfg.wants(Statistic::KsRayleigh) {
        match scale {
            Some(_) => Some(ks_distance(&scaled, |x| Rayleigh::cdf(x.max(0.0)).unwrap())?),
            None => {
                notes.push("ks_rayleigh skipped: sigma^2 = 0".into());
                None
            }
        }
    } else {
        None
    };

    let exact = if cfg.wants(Statistic::ExactLaw) {
        let k_max = default_k_max(&stats);
        let work = (ds.n() - stats.num_deg0) as f64 * k_max as f64;
        if work <= EXACT_WORK_LIMIT {
            Some(compare_with_exact(ds, exp.vertex, k_max, records)?)
        } else {
            notes.push(format!("exact law skipped: work {work:.2e} exceeds {EXACT_WORK_LIMIT:.0e}"));
            None
        }
    } else {
        None
    };

    let predictions = LimitPredictions::of(&stats);
    let ratios = if cfg.wants(Statistic::Moments) {
        predictions.map(|p| MomentRatios {
            six_mean: six.mean / p.six_mean,
            six_variance: six.variance / p.six_variance,
            tail_mean: tail.map(|t| t.mean / p.tail_mean),
            cycle_mean: cycle.map(|c| c.mean / p.tail_mean),
            tail_over_six: tail.map(|t| t.mean / six.mean),
            tail_over_cycle: tail.zip(cycle).map(|(t, c)| t.mean / c.mean),
        })
    } else {
        None
    };

    let joint = if cfg.wants(Statistic::JointUniformity) {
        match &tails {
            None => {
                notes.push("joint uniformity skipped: sampler yields no tail lengths".into());
                None
            }
            Some(t) => {
                let pairs: Vec<(u64, u64)> = records.iter().zip(t).map(|(r, &x)| (r.six, x)).collect();
                match joint_uniformity_test(&pairs, BucketRule::default()) {
                    Ok(j) => Some(j),
                    Err(e) => {
                        notes.push(format!("joint uniformity skipped: {e}"));
                        None
                    }
                }
            }
        }
    } else {
        None
    };

    Ok(StatReport {
        n: ds.n(),
        vertex: exp.vertex,
        vertex_degree: ds.degree(exp.vertex),
        sigma2: stats.sigma2_f64(),
        scale,
        trials: records.len(),
        seed: cfg.seed,
        sampler: cfg.sampler,
        six,
        tail,
        cycle,
        tail_zero_fraction,
        ecdf,
        ks_rayleigh,
        exact,
        predictions,
        ratios,
        joint,
        degenerate,
        notes,
    })
}

fn ecdf_grid(values: &[f64], points: usize) -> Vec<(f64, f64)> {
    if values.is_empty() || points == 0 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let top = *sorted.last().unwrap();
    (1..=points)
        .map(|i| {
            let x = top * i as f64 / points as f64;
            let below = sorted.partition_point(|&v| v <= x);
            (x, below as f64 / sorted.len() as f64)
        })
        .collect()
}

/// KS distance and chi-square of the sampled six-lengths against the exact
/// law (floating backend) truncated at `k_max`; mass beyond the table is
/// pooled into one final bin.
pub fn compare_with_exact(
    ds: &DegreeSequence,
    v: usize,
    k_max: usize,
    records: &[TrialRecord],
) -> Result<ExactComparison> {
    let table = ExactEngine::default().survival(ds, v, k_max, Backend::Float)?;
    let cdf: Vec<f64> = (0..=k_max).map(|k| table.cdf(k)).collect();
    let sixes: Vec<u64> = records.iter().map(|r| r.six).collect();
    let ks = ks_distance_discrete(&sixes, &cdf)?;
    let mut counts = counts_of(sixes.iter().map(|&s| s.min(k_max as u64 + 1)));
    counts.resize(k_max + 2, 0);
    let mut probs: Vec<f64> = (0..=k_max).map(|k| table.pmf(k)).collect();
    probs.push(table.get(k_max));
    let chi_square = chi_square_counts(&counts, &probs).ok();
    Ok(ExactComparison {
        k_max,
        mean: table.mean(),
        ks,
        chi_square,
    })
}

/// How `(SL, TL)` pairs are pooled for the uniformity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BucketRule {
    /// Relative-position bins for `TL` within `1..SL`.
    pub tail_bins: usize,
    /// Pairs with the same `SL / width` share a bucket.
    pub six_bucket_width: u64,
}

impl Default for BucketRule {
    fn default() -> Self {
        Self {
            tail_bins: 10,
            six_bucket_width: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointUniformity {
    /// Pooled over buckets: statistics and degrees of freedom add up.
    pub chi_square: ChiSquare,
    /// KS distance of `TL / SL` to Uniform(0, 1), all pairs.
    pub ks_ratio: f64,
    pub buckets_used: usize,
    /// Weight of pairs with `TL > 0`, the ones the chi-square sees.
    pub tail_weight: f64,
}

pub fn joint_uniformity_test(samples: &[(u64, u64)], rule: BucketRule) -> Result<JointUniformity> {
    let weighted: Vec<((u64, u64), f64)> = samples.iter().map(|&p| (p, 1.0)).collect();
    joint_uniformity_test_weighted(&weighted, rule)
}

/// Given `SL = k` and `TL > 0`, `TL` should be uniform on `1..k`. Within
/// each `SL` bucket the relative tail position is binned and compared with
/// the exactly computed uniform expectation for every pair's own `k`.
pub fn joint_uniformity_test_weighted(samples: &[((u64, u64), f64)], rule: BucketRule) -> Result<JointUniformity> {
    if rule.tail_bins < 2 || rule.six_bucket_width == 0 {
        return Err(Error::Config("bucket rule needs >= 2 tail bins and a positive width".into()));
    }
    let total: f64 = samples.iter().map(|&(_, w)| w).sum();
    if total < MIN_JOINT_SAMPLES {
        return Err(Error::DegenerateBins(format!(
            "joint test needs at least {MIN_JOINT_SAMPLES} samples, got {total}"
        )));
    }
    let bins = rule.tail_bins;
    let mut buckets: std::collections::BTreeMap<u64, (Vec<f64>, Vec<f64>)> = Default::default();
    let mut tail_weight = 0.0;
    for &((six, tail), w) in samples {
        if tail == 0 || six < 2 {
            continue;
        }
        tail_weight += w;
        let span = six - 1;
        let (obs, exp) = buckets
            .entry(six / rule.six_bucket_width)
            .or_insert_with(|| (vec![0.0; bins], vec![0.0; bins]));
        obs[((tail - 1) * bins as u64 / span) as usize] += w;
        // |{i in 0..span : floor(i * bins / span) = b}|
        let first = |b: u64| (b * span).div_ceil(bins as u64);
        for b in 0..bins as u64 {
            let count = first(b + 1) - first(b);
            exp[b as usize] += w * count as f64 / span as f64;
        }
    }
    if tail_weight == 0.0 {
        return Err(Error::DegenerateBins("no pair has a positive tail".into()));
    }

    let (mut statistic, mut dof, mut used, mut cells) = (0.0, 0usize, 0usize, 0usize);
    for (obs, exp) in buckets.values() {
        // merge bins left to right to the minimum expected count
        let (mut o_acc, mut e_acc) = (0.0, 0.0);
        let (mut o_m, mut e_m) = (Vec::new(), Vec::new());
        for (&o, &e) in obs.iter().zip(exp) {
            o_acc += o;
            e_acc += e;
            if e_acc >= MIN_EXPECTED {
                o_m.push(o_acc);
                e_m.push(e_acc);
                o_acc = 0.0;
                e_acc = 0.0;
            }
        }
        if let (Some(lo), Some(le)) = (o_m.last_mut(), e_m.last_mut()) {
            *lo += o_acc;
            *le += e_acc;
        }
        if o_m.len() < 2 {
            continue;
        }
        statistic += crate::stats::pearson(&o_m, &e_m);
        dof += o_m.len() - 1;
        cells += o_m.len();
        used += 1;
    }
    if dof == 0 {
        return Err(Error::DegenerateBins("no bucket has two populated bins".into()));
    }

    let mut ratios: Vec<(f64, f64)> = samples
        .iter()
        .map(|&((six, tail), w)| (tail as f64 / six as f64, w))
        .collect();
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut ks = 0.0f64;
    for &(x, w) in &ratios {
        let before = acc / total;
        acc += w;
        let after = acc / total;
        let f = x.clamp(0.0, 1.0);
        ks = ks.max((after - f).abs()).max((f - before).abs());
    }

    Ok(JointUniformity {
        chi_square: ChiSquare {
            statistic,
            dof,
            p_value: chi_square_sf(statistic, dof),
            bins: cells,
        },
        ks_ratio: ks,
        buckets_used: used,
        tail_weight,
    })
}

impl StatReport {
    /// One `statistic,value` row per scalar.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("n".into(), self.n.to_string()),
            ("vertex".into(), (self.vertex + 1).to_string()),
            ("vertex_degree".into(), self.vertex_degree.to_string()),
            ("sigma2".into(), self.sigma2.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("sampler".into(), format!("{:?}", self.sampler).to_lowercase()),
            ("degenerate".into(), self.degenerate.to_string()),
        ];
        let mut push = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                rows.push((name.to_string(), v.to_string()));
            }
        };
        push("scale", self.scale);
        push("six_mean", Some(self.six.mean));
        push("six_variance", Some(self.six.variance));
        push("six_std_error", Some(self.six.std_error));
        push("tail_mean", self.tail.map(|m| m.mean));
        push("tail_variance", self.tail.map(|m| m.variance));
        push("cycle_mean", self.cycle.map(|m| m.mean));
        push("cycle_variance", self.cycle.map(|m| m.variance));
        push("tail_zero_fraction", self.tail_zero_fraction);
        push("ks_rayleigh", self.ks_rayleigh);
        if let Some(e) = &self.exact {
            push("exact_mean", Some(e.mean));
            push("ks_exact", Some(e.ks));
            push("chi_square_exact", e.chi_square.as_ref().map(|c| c.statistic));
            push("chi_square_exact_dof", e.chi_square.as_ref().map(|c| c.dof as f64));
            push("chi_square_exact_p", e.chi_square.as_ref().map(|c| c.p_value));
        }
        if let Some(p) = &self.predictions {
            push("predicted_six_mean", Some(p.six_mean));
            push("predicted_six_variance", Some(p.six_variance));
            push("predicted_tail_mean", Some(p.tail_mean));
        }
        if let Some(r) = &self.ratios {
            push("ratio_six_mean", Some(r.six_mean));
            push("ratio_six_variance", Some(r.six_variance));
            push("ratio_tail_mean", r.tail_mean);
            push("ratio_cycle_mean", r.cycle_mean);
            push("tail_over_six", r.tail_over_six);
            push("tail_over_cycle", r.tail_over_cycle);
        }
        if let Some(j) = &self.joint {
            push("joint_chi_square", Some(j.chi_square.statistic));
            push("joint_chi_square_dof", Some(j.chi_square.dof as f64));
            push("joint_chi_square_p", Some(j.chi_square.p_value));
            push("ks_tail_ratio_uniform", Some(j.ks_ratio));
        }
        for (i, (x, f)) in self.ecdf.iter().enumerate() {
            push(&format!("ecdf_x_{i}"), Some(*x));
            push(&format!("ecdf_f_{i}"), Some(*f));
        }
        let mut out = String::from("statistic,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "note,\"{}\"", note.replace('"', "'"));
        }
        out
    }
}
