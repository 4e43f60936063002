//! `rhomap`: sampling, exact laws, asymptotics, reduction and experiments
//! for random mappings with a prescribed in-degree sequence.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rhomap::asymptotics::{ladder, LimitPredictions};
use rhomap::exact::{default_k_max, Backend, ExactEngine, DEFAULT_RATIONAL_LIMIT};
use rhomap::experiments::{
    trial_rng, DegreeSource, Experiment, ExperimentConfig, SamplerKind, Statistic, VertexRule,
};
use rhomap::reduction::{n_extend, urn_mean, urn_run, w_reduce, Coupler, LabeledGraph};
use rhomap::{DegreeSequence, Error, FunctionalGraph, LazyWalker};

use output::{render, Body, Format, Header, Output, Table};

#[derive(Parser)]
#[command(name = "rhomap", version, about = "Random mappings with a prescribed in-degree sequence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of vertices (generators), urn steps (`urn`) or target size (`extend`).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// `generator:<two_zero|permutation|multinomial|binary_mix:c0,c1,c2,c3|custom:d1,d2,...>` or `file:<path>`.
    #[arg(long, global = true)]
    degrees: Option<String>,
    /// Start vertex: a 1-indexed id, `max-degree` or `zero-degree`.
    #[arg(long, global = true)]
    vertex: Option<String>,
    /// Seed for all randomness; drawn from OS entropy when omitted and echoed in the header.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Largest k of a table.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Exact backend; defaults to rational up to n = 200, float beyond.
    #[arg(long, global = true)]
    backend: Option<Backend>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for `experiment`; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one uniform mapping. Columns: v,f_v (1-indexed).
    Sample,
    /// Six, tail and cycle length from a vertex of a graph file, or of
    /// `--trials` lazily sampled mappings. Columns: [trial,]six,tail,cycle.
    Walk {
        /// Graph file of `v,f_v` lines, 1-indexed.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Exact survival law P(SL > k). Columns: k,surv[,surv_exact].
    Exact,
    /// Exact joint law P(SL = k, TL = j). Columns: k,j,p[,p_exact].
    Joint,
    /// Exact g(k) against its approximations. Columns: k,exact,rayleigh,refined,product.
    Approx,
    /// Reduce a graph at `--vertex`. Columns: v,f_v in original labels.
    Reduce {
        /// Graph file; a uniform mapping on `--degrees` is sampled when omitted.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Also write the `original_id,reduced_id` map here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Extend a reduced graph (original labels) to `--n` vertices. Columns: v,f_v.
    Extend {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Pólya urn: red balls after `--n` draws. Columns: trial,red.
    Urn {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
    },
    /// Six-lengths through the reduction and urn coupling. Columns: trial,six.
    Couple,
    /// Monte-Carlo experiment. CSV: statistic,value; JSON: one report record.
    Experiment {
        #[arg(long, default_value = "lazy")]
        sampler: SamplerKind,
        /// Comma-separated subset of moments,ecdf,ks_rayleigh,exact,joint.
        #[arg(long, value_delimiter = ',')]
        stats: Option<Vec<Statistic>>,
        /// Also write raw `six,tail` pairs here.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Degree statistics against the asymptotic conditions.
    /// Columns: condition,lhs,rhs,ratio,wants,degenerate.
    Check,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn runtime(msg: impl Into<String>) -> CliError {
    CliError::Runtime(msg.into())
}

/// Resolves shared flags and records them for the header.
struct Ctx {
    common: Common,
    seed: u64,
    flags: Vec<(String, String)>,
}

impl Ctx {
    fn record(&mut self, key: &str, value: impl ToString) {
        self.flags.push((key.to_string(), value.to_string()));
    }

    fn degrees(&mut self) -> CliResult<DegreeSequence> {
        let spec = self
            .common
            .degrees
            .clone()
            .ok_or_else(|| usage("--degrees is required"))?;
        let source = DegreeSource::parse(&spec, self.common.n)?;
        let ds = source.resolve(self.seed)?;
        self.record("degrees", &spec);
        self.record("n", ds.n());
        Ok(ds)
    }

    fn vertex_rule(&mut self) -> CliResult<VertexRule> {
        let raw = self.common.vertex.clone().unwrap_or_else(|| "1".into());
        self.record("vertex", &raw);
        Ok(VertexRule::parse(&raw)?)
    }

    fn vertex(&mut self, ds: &DegreeSequence) -> CliResult<usize> {
        Ok(self.vertex_rule()?.resolve(ds)?)
    }

    fn trials(&mut self, default: usize) -> CliResult<usize> {
        let t = self.common.trials.unwrap_or(default);
        if t == 0 {
            return Err(usage("--trials must be at least 1"));
        }
        self.record("trials", t);
        Ok(t)
    }

    fn backend(&mut self, n: usize) -> Backend {
        let b = self.common.backend.unwrap_or(if n <= DEFAULT_RATIONAL_LIMIT {
            Backend::Rational
        } else {
            Backend::Float
        });
        self.record("backend", format!("{b:?}").to_lowercase());
        b
    }

    fn kmax(&mut self, default: usize) -> usize {
        let k = self.common.kmax.unwrap_or(default);
        self.record("kmax", k);
        k
    }
}

fn read(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn graph_table(image: impl Iterator<Item = (usize, usize)>) -> Table {
    let mut t = Table::new(&["v", "f_v"]);
    for (v, y) in image {
        t.push(vec![json!(v + 1), json!(y + 1)]);
    }
    t
}

fn run(command: &Command, ctx: &mut Ctx) -> CliResult<(&'static str, Output)> {
    match command {
        Command::Sample => {
            let ds = ctx.degrees()?;
            let g = FunctionalGraph::sample_uniform(&ds, &mut trial_rng(ctx.seed, 0));
            Ok(("sample", Output::table(graph_table(g.image().enumerate()))))
        }
        Command::Walk { graph } => {
            if let Some(path) = graph {
                ctx.record("graph", path.display());
                let g = FunctionalGraph::parse_csv(&read(path)?)?;
                let ds = g.degree_sequence();
                let v = ctx.vertex(&ds)?;
                let w = g.walk_lengths(v);
                let mut t = Table::new(&["six", "tail", "cycle"]);
                t.push(vec![json!(w.six), json!(w.tail), json!(w.cycle)]);
                return Ok(("walk", Output::table(t)));
            }
            let ds = ctx.degrees()?;
            let v = ctx.vertex(&ds)?;
            let trials = ctx.trials(1)?;
            let walker = LazyWalker::new(&ds);
            let mut t = Table::new(&["trial", "six", "tail", "cycle"]);
            for i in 0..trials {
                let w = walker.walk(v, &mut trial_rng(ctx.seed, i as u64));
                t.push(vec![json!(i + 1), json!(w.six), json!(w.tail), json!(w.cycle)]);
            }
            Ok(("walk", Output::table(t)))
        }
        Command::Exact => {
            let ds = ctx.degrees()?;
            let v = ctx.vertex(&ds)?;
            let backend = ctx.backend(ds.n());
            let k_max = ctx.kmax(default_k_max(&ds.stats()));
            let table = ExactEngine::default().survival(&ds, v, k_max, backend)?;
            let exact = table.exact.as_ref();
            let mut t = Table::new(if exact.is_some() {
                &["k", "surv", "surv_exact"]
            } else {
                &["k", "surv"]
            });
            for (k, s) in table.surv.iter().enumerate() {
                let mut row = vec![json!(k), json!(s)];
                if let Some(e) = exact {
                    row.push(json!(e[k].to_string()));
                }
                t.push(row);
            }
            Ok((
                "exact",
                Output::table(t)
                    .note(format!("mean_over_table: {}", table.mean()))
                    .note(format!("clamped: {}", table.clamped)),
            ))
        }
        Command::Joint => {
            let ds = ctx.degrees()?;
            let v = ctx.vertex(&ds)?;
            let backend = ctx.backend(ds.n());
            let k_max = ctx.kmax(default_k_max(&ds.stats()).max(1));
            let engine = ExactEngine::default();
            let mut t;
            match backend {
                Backend::Rational => {
                    let law = engine.joint_law_exact(&ds, v, k_max)?;
                    t = Table::new(&["k", "j", "p", "p_exact"]);
                    for (k, j, p) in law.cells() {
                        t.push(vec![
                            json!(k),
                            json!(j),
                            json!(rhomap::exact::rational_to_f64(p)),
                            json!(p.to_string()),
                        ]);
                    }
                }
                Backend::Float => {
                    let law = engine.joint_law_f64(&ds, v, k_max)?;
                    t = Table::new(&["k", "j", "p"]);
                    for (k, j, p) in law.cells() {
                        t.push(vec![json!(k), json!(j), json!(p)]);
                    }
                }
            }
            Ok(("joint", Output::table(t)))
        }
        Command::Approx => {
            let ds = ctx.degrees()?;
            let stats = ds.stats();
            let cap = ds.n().saturating_sub(1);
            let default = if stats.is_permutation() {
                cap
            } else {
                ((4.0 * stats.scale()).ceil() as usize).min(cap)
            };
            let k_max = ctx.kmax(default);
            let ks: Vec<usize> = (1..=k_max).collect();
            let rows = ladder(&ds, &ks)?;
            let mut t = Table::new(&["k", "exact", "rayleigh", "refined", "product"]);
            for r in rows {
                t.push(vec![json!(r.k), json!(r.exact), json!(r.rayleigh), json!(r.refined), json!(r.product)]);
            }
            Ok(("approx", Output::table(t)))
        }
        Command::Reduce { graph, map } => {
            let (g, ds) = match graph {
                Some(path) => {
                    ctx.record("graph", path.display());
                    let g = FunctionalGraph::parse_csv(&read(path)?)?;
                    let ds = g.degree_sequence();
                    (g, ds)
                }
                None => {
                    let ds = ctx.degrees()?;
                    (FunctionalGraph::sample_uniform(&ds, &mut trial_rng(ctx.seed, 0)), ds)
                }
            };
            let w = ctx.vertex(&ds)?;
            let r = w_reduce(&g, &ds, w)?;
            if let Some(path) = map {
                ctx.record("map", path.display());
                std::fs::write(path, r.label_map_csv())
                    .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
            }
            let labels = &r.reduced.labels;
            let t = graph_table(
                labels
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, labels[r.reduced.graph.apply(i)])),
            );
            Ok((
                "reduce",
                Output::table(t)
                    .note(format!("n_hat: {}", r.n_hat()))
                    .note(format!("active: {}", r.plan.active))
                    .note(format!("kept: {}", labels.len())),
            ))
        }
        Command::Extend { graph } => {
            ctx.record("graph", graph.display());
            let lg = LabeledGraph::parse_csv(&read(graph)?)?;
            let n = ctx.common.n.ok_or_else(|| usage("--n (target size) is required"))?;
            ctx.record("n", n);
            let g = n_extend(&lg, n, &mut trial_rng(ctx.seed, 0))?;
            Ok(("extend", Output::table(graph_table(g.image().enumerate()))))
        }
        Command::Urn { a, b } => {
            let steps = ctx.common.n.ok_or_else(|| usage("--n (number of draws) is required"))?;
            ctx.record("n", steps);
            ctx.record("a", a);
            ctx.record("b", b);
            let trials = ctx.trials(1)?;
            let mut t = Table::new(&["trial", "red"]);
            for i in 0..trials {
                let red = urn_run(steps as u64, *a, *b, &mut trial_rng(ctx.seed, i as u64))?;
                t.push(vec![json!(i + 1), json!(red)]);
            }
            Ok((
                "urn",
                Output::table(t).note(format!("mean: {}", urn_mean(steps as u64, *a, *b))),
            ))
        }
        Command::Couple => {
            let ds = ctx.degrees()?;
            let w = ctx.vertex(&ds)?;
            let trials = ctx.trials(1)?;
            let coupler = Coupler::new(&ds, w)?;
            let mut t = Table::new(&["trial", "six"]);
            for i in 0..trials {
                t.push(vec![json!(i + 1), json!(coupler.sample(&mut trial_rng(ctx.seed, i as u64)))]);
            }
            let plan = coupler.plan();
            Ok((
                "couple",
                Output::table(t)
                    .note(format!("n_hat: {}", plan.n_hat))
                    .note(format!("active: {}", plan.active)),
            ))
        }
        Command::Experiment {
            sampler,
            stats,
            samples,
        } => {
            let spec = ctx
                .common
                .degrees
                .clone()
                .ok_or_else(|| usage("--degrees is required"))?;
            let source = DegreeSource::parse(&spec, ctx.common.n)?;
            ctx.record("degrees", &spec);
            if let Some(n) = ctx.common.n {
                ctx.record("n", n);
            }
            let vertex = ctx.vertex_rule()?;
            let trials = ctx.trials(1000)?;
            ctx.record("sampler", format!("{sampler:?}").to_lowercase());
            let mut config = ExperimentConfig::new(source, trials, ctx.seed);
            config.vertex = vertex;
            config.sampler = *sampler;
            config.workers = ctx.common.workers;
            if let Some(w) = config.workers {
                ctx.record("workers", w);
            }
            if let Some(s) = stats {
                config.outputs = s.clone();
                let names: Vec<&str> = s.iter().map(|x| x.name()).collect();
                ctx.record("stats", names.join(","));
            }
            let exp = Experiment::prepare(config)?;
            let loud = trials >= 10_000;
            if loud {
                eprintln!("rhomap: running {trials} trials on n = {}", exp.degrees.n());
            }
            let records = exp.sample()?;
            if loud {
                eprintln!("rhomap: sampling done, summarizing");
            }
            let report = exp.summarize(&records)?;
            if let Some(path) = samples {
                ctx.record("samples", path.display());
                let mut text = String::from("six,tail\n");
                for r in &records {
                    text.push_str(&format!(
                        "{},{}\n",
                        r.six,
                        r.tail.map(|t| t.to_string()).unwrap_or_default()
                    ));
                }
                std::fs::write(path, text).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
            }
            let json = serde_json::to_value(&report).map_err(|e| runtime(e.to_string()))?;
            Ok((
                "experiment",
                Output {
                    body: Body::Record {
                        json,
                        csv: report.to_csv(),
                    },
                    notes: Vec::new(),
                },
            ))
        }
        Command::Check => {
            let ds = ctx.degrees()?;
            let stats = ds.stats();
            let report = ds.check_assumptions();
            let mut t = Table::new(&["condition", "lhs", "rhs", "ratio", "wants", "degenerate"]);
            for c in &report.comparisons {
                let wants = serde_json::to_value(c.wants).unwrap_or(Value::Null);
                t.push(vec![
                    json!(c.condition.label()),
                    json!(c.lhs),
                    json!(c.rhs),
                    json!(c.ratio),
                    json!(wants.as_str().map(str::to_lowercase)),
                    json!(c.degenerate),
                ]);
            }
            let mut out = Output::table(t)
                .note(format!("n: {}", stats.n))
                .note(format!("sigma2: {}", stats.sigma2_f64()))
                .note(format!("n_sigma2: {}", stats.n_sigma2))
                .note(format!("delta: {}", stats.delta))
                .note(format!("degree_one: {}", stats.num_deg1))
                .note(format!("degree_zero: {}", stats.num_deg0));
            if let Some(p) = LimitPredictions::of(&stats) {
                out = out
                    .note(format!("predicted_six_mean: {}", p.six_mean))
                    .note(format!("predicted_six_variance: {}", p.six_variance))
                    .note(format!("predicted_tail_mean: {}", p.tail_mean));
            }
            Ok(("check", out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.common.seed.unwrap_or_else(rand::random);
    let mut ctx = Ctx {
        common: cli.common.clone(),
        seed,
        flags: Vec::new(),
    };
    let result = run(&cli.command, &mut ctx).and_then(|(command, output)| {
        ctx.record("format", format!("{:?}", ctx.common.format).to_lowercase());
        let header = Header {
            command,
            flags: std::mem::take(&mut ctx.flags),
            seed,
        };
        let text = render(&header, &output, ctx.common.format);
        match &ctx.common.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| runtime(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
