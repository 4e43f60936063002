//! Contraction of degree-1 vertices, its randomised inverse, and the Pólya
//! urn coupling for the six-length.
//!
//! For a sequence with `m = n sigma^2 = sum (d_j - 1)^2`, the `w`-reduction
//! keeps `n_hat = floor(m^(4/3))` vertices: it bypasses `n - n_hat`
//! degree-1 vertices other than `w` (lowest ids first), so every kept
//! vertex retains its in-degree and `m` is unchanged. The `n`-extension
//! re-inserts the missing labels in increasing order, each one either as a
//! fresh loop (probability `1/(|E|+1)`) or by subdividing a uniformly chosen
//! edge `x -> y` into `x -> w -> y`. Applied to a uniform reduced graph it
//! yields a uniform graph with the original degrees.
//!
//! Each extension step is a draw from an urn holding one ball per edge plus
//! one for the loop option; the edges on the rho of `w` are red, and drawing
//! one lengthens the six-length by one. Hence
//! `SL_n(w) = R(n - n_hat, SL_red, n_hat + 1 - SL_red)` in law.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::degrees::DegreeSequence;
use crate::error::{Error, Result};
use crate::graph::{parse_edge_list, FunctionalGraph, LazyWalker};

/// `floor(m^(4/3))`, exact in integer arithmetic. Saturates for huge `m`.
pub fn n_hat(n_sigma2: u128) -> u128 {
    if n_sigma2 >= 1 << 32 {
        return u128::MAX;
    }
    let m4 = n_sigma2.pow(4);
    let mut x = (m4 as f64).cbrt() as u128;
    let cube = |x: u128| x.checked_pow(3);
    while cube(x + 1).is_some_and(|c| c <= m4) {
        x += 1;
    }
    while cube(x).is_none_or(|c| c > m4) {
        x -= 1;
    }
    x
}

/// Which vertices a `w`-reduction keeps. Depends only on the degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionPlan {
    pub n: usize,
    pub w: usize,
    pub n_hat: u128,
    /// `n_hat < n`; otherwise the reduction is the identity.
    pub active: bool,
    /// Bypassed vertices, ascending.
    pub contracted: Vec<usize>,
    /// Kept vertices `V_w`, ascending; index in this list is the reduced id.
    pub kept: Vec<usize>,
    pub reduced_degrees: DegreeSequence,
}

impl ReductionPlan {
    pub fn new(ds: &DegreeSequence, w: usize) -> Result<Self> {
        ds.check_vertex(w)?;
        let n = ds.n();
        let n_hat = n_hat(ds.stats().n_sigma2);
        if n_hat >= n as u128 {
            return Ok(Self {
                n,
                w,
                n_hat,
                active: false,
                contracted: Vec::new(),
                kept: (0..n).collect(),
                reduced_degrees: ds.clone(),
            });
        }
        let needed = n - n_hat as usize;
        let contracted: Vec<usize> = (0..n)
            .filter(|&v| v != w && ds.degree(v) == 1)
            .take(needed)
            .collect();
        if contracted.len() < needed {
            return Err(Error::NotEnoughDegreeOneVertices {
                needed,
                available: contracted.len(),
            });
        }
        let mut is_contracted = vec![false; n];
        for &v in &contracted {
            is_contracted[v] = true;
        }
        let kept: Vec<usize> = (0..n).filter(|&v| !is_contracted[v]).collect();
        let reduced_degrees = DegreeSequence::from_degrees(kept.iter().map(|&v| ds.degree(v)).collect())?;
        Ok(Self {
            n,
            w,
            n_hat,
            active: true,
            contracted,
            kept,
            reduced_degrees,
        })
    }

    /// Position of `w` among the kept vertices.
    pub fn reduced_w(&self) -> usize {
        self.kept.binary_search(&self.w).expect("w is always kept")
    }
}

/// A functional graph on a subset of `[n]`: `graph` is over `0..labels.len()`
/// and `labels[i]` is the original id of reduced vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub labels: Vec<usize>,
    pub graph: FunctionalGraph,
}

impl LabeledGraph {
    pub fn new(labels: Vec<usize>, graph: FunctionalGraph) -> Result<Self> {
        if labels.len() != graph.n() {
            return Err(Error::Domain("label count differs from vertex count".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("labels must be strictly increasing".into()));
        }
        Ok(Self { labels, graph })
    }

    /// Original-label edge list `v,f(v)`, 1-indexed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,f_v\n");
        for (i, &v) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "{},{}", v + 1, self.labels[self.graph.apply(i)] + 1);
        }
        out
    }

    /// Reads an original-label edge list; the sources form the vertex set
    /// and every target must be one of them.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut edges = parse_edge_list(text)?;
        edges.sort_unstable();
        let labels: Vec<usize> = edges.iter().map(|&(v, _)| v).collect();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse("a vertex has two images".into()));
        }
        let image = edges
            .iter()
            .map(|&(_, y)| {
                labels
                    .binary_search(&y)
                    .map_err(|_| Error::Parse(format!("target {} is not a vertex of the graph", y + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, FunctionalGraph::new(image)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionResult {
    pub plan: ReductionPlan,
    pub reduced: LabeledGraph,
}

impl ReductionResult {
    pub fn kept(&self) -> &[usize] {
        &self.plan.kept
    }

    pub fn n_hat(&self) -> u128 {
        self.plan.n_hat
    }

    pub fn reduced_degrees(&self) -> &DegreeSequence {
        &self.plan.reduced_degrees
    }

    /// `original_id,reduced_id`, both 1-indexed.
    pub fn label_map_csv(&self) -> String {
        let mut out = String::from("original_id,reduced_id\n");
        for (i, &v) in self.plan.kept.iter().enumerate() {
            let _ = writeln!(out, "{},{}", v + 1, i + 1);
        }
        out
    }
}

/// Contracts `n - n_hat` degree-1 vertices of `g` (which must have degree
/// sequence `ds`), keeping `w`.
pub fn w_reduce(g: &FunctionalGraph, ds: &DegreeSequence, w: usize) -> Result<ReductionResult> {
    if g.n() != ds.n() || g.in_degrees() != ds.as_slice() {
        return Err(Error::Domain("graph does not have the given degree sequence".into()));
    }
    let plan = ReductionPlan::new(ds, w)?;
    let n = g.n();
    let mut image: Vec<usize> = g.image().collect();
    // unique predecessor of every degree-1 vertex
    let mut pred = vec![usize::MAX; n];
    for (x, &y) in image.iter().enumerate() {
        if ds.degree(y) == 1 {
            pred[y] = x;
        }
    }
    for &v in &plan.contracted {
        let x = pred[v];
        if x == v {
            // v -> v: the loop is deleted along with v
            continue;
        }
        let y = image[v];
        image[x] = y;
        if pred[y] == v {
            pred[y] = x;
        }
    }
    let mut relabel = vec![usize::MAX; n];
    for (i, &v) in plan.kept.iter().enumerate() {
        relabel[v] = i;
    }
    let reduced_image: Vec<usize> = plan.kept.iter().map(|&v| relabel[image[v]]).collect();
    debug_assert!(reduced_image.iter().all(|&y| y != usize::MAX));
    let graph = FunctionalGraph::new(reduced_image)?;
    debug_assert_eq!(graph.in_degrees(), plan.reduced_degrees.as_slice());
    let reduced = LabeledGraph::new(plan.kept.clone(), graph)?;
    Ok(ReductionResult { plan, reduced })
}

/// `n`-extension driven by an explicit choice function. At each step
/// `choose(m)` must return a value in `0..m`, where `m = |E| + 1`; the
/// value `m - 1` adds a loop, any other value `c` subdivides the edge
/// leaving the `c`-th vertex in insertion order (kept labels ascending, then
/// added vertices).
pub fn n_extend_with<F: FnMut(usize) -> usize>(g: &LabeledGraph, n: usize, mut choose: F) -> Result<FunctionalGraph> {
    if g.labels.last().is_some_and(|&v| v >= n) {
        return Err(Error::Domain(format!("graph labels exceed the target size {n}")));
    }
    let mut image = vec![u32::MAX; n];
    for (i, &v) in g.labels.iter().enumerate() {
        image[v] = g.labels[g.graph.apply(i)] as u32;
    }
    let mut sources: Vec<u32> = g.labels.iter().map(|&v| v as u32).collect();
    sources.reserve(n - g.labels.len());
    for w in 0..n {
        if image[w] != u32::MAX {
            continue;
        }
        let options = sources.len() + 1;
        let c = choose(options);
        if c >= options {
            return Err(Error::Domain(format!("choice {c} out of range 0..{options}")));
        }
        if c == sources.len() {
            image[w] = w as u32;
        } else {
            let x = sources[c] as usize;
            image[w] = image[x];
            image[x] = w as u32;
        }
        sources.push(w as u32);
    }
    Ok(FunctionalGraph::from_raw(image))
}

pub fn n_extend<R: Rng + ?Sized>(g: &LabeledGraph, n: usize, rng: &mut R) -> Result<FunctionalGraph> {
    n_extend_with(g, n, |m| rng.gen_range(0..m))
}

/// Classical Pólya urn: draw a ball, return it with another of its colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct UrnState {
    pub red: u64,
    pub blue: u64,
    pub steps: u64,
}

impl UrnState {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a + b == 0 {
            return Err(Error::Domain("urn needs at least one ball".into()));
        }
        Ok(Self { red: a, blue: b, steps: 0 })
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if rng.gen_range(0..self.red + self.blue) < self.red {
            self.red += 1;
        } else {
            self.blue += 1;
        }
        self.steps += 1;
    }
}

/// `R(n, a, b)`: red balls after `n` draws.
pub fn urn_run<R: Rng + ?Sized>(n: u64, a: u64, b: u64, rng: &mut R) -> Result<u64> {
    let mut urn = UrnState::new(a, b)?;
    for _ in 0..n {
        urn.step(rng);
    }
    Ok(urn.red)
}

/// `mu(n, a, b) = a (1 + n / (a + b))`.
pub fn urn_mean(n: u64, a: u64, b: u64) -> f64 {
    a as f64 * (1.0 + n as f64 / (a + b) as f64)
}

/// `min(1, 2 exp(-t^2 a^2 / (8 (a + b))))`, an upper bound on
/// `P(|R(n,a,b) - mu| >= t mu)`.
pub fn urn_tail_bound(_n: u64, a: u64, b: u64, t: f64) -> Result<f64> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
    if !(t > 0.0) {
        return Err(Error::Domain(format!("tail bound needs t > 0, got {t}")));
    }
    if a + b == 0 {
        return Err(Error::Domain("urn needs at least one ball".into()));
    }
    let (a, b) = (a as f64, b as f64);
    Ok((2.0 * (-t * t * a * a / (8.0 * (a + b))).exp()).min(1.0))
}

/// Samples `SL_n(w)` through the reduced graph and the urn, reusing the
/// reduction plan and the lazy walker across draws.
#[derive(Debug, Clone)]
pub struct Coupler {
    plan: ReductionPlan,
    walker: LazyWalker,
    start: usize,
}

impl Coupler {
    pub fn new(ds: &DegreeSequence, w: usize) -> Result<Self> {
        ds.check_vertex(w)?;
        if ds.stats().n_sigma2 == 0 {
            return Err(Error::RegimeNotApplicable(
                "the urn coupling needs sigma^2 > 0".into(),
            ));
        }
        let plan = ReductionPlan::new(ds, w)?;
        let start = plan.reduced_w();
        let walker = LazyWalker::new(&plan.reduced_degrees);
        Ok(Self { plan, walker, start })
    }

    pub fn plan(&self) -> &ReductionPlan {
        &self.plan
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let six = self.walker.walk(self.start, rng).six;
        if !self.plan.active {
            return six;
        }
        let kept = self.plan.n_hat as u64;
        let steps = (self.plan.n - self.plan.kept.len()) as u64;
        urn_run(steps, six, kept + 1 - six, rng).expect("urn is non-empty")
    }
}

pub fn coupled_six_length<R: Rng + ?Sized>(ds: &DegreeSequence, w: usize, rng: &mut R) -> Result<u64> {
    Ok(Coupler::new(ds, w)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture_64() -> DegreeSequence {
        // two vertices of degree 2, two of degree 0: n sigma^2 = 4
        let mut d = vec![2i64, 2, 0, 0];
        d.extend(vec![1; 60]);
        DegreeSequence::new(&d).unwrap()
    }

    #[test]
    fn n_hat_values() {
        assert_eq!(n_hat(0), 0);
        assert_eq!(n_hat(2), 2);
        assert_eq!(n_hat(3), 4);
        assert_eq!(n_hat(4), 6);
        assert_eq!(n_hat(8), 16);
        assert_eq!(n_hat(27), 81);
        for m in 1..2000u128 {
            let x = n_hat(m);
            assert!(x.pow(3) <= m.pow(4) && (x + 1).pow(3) > m.pow(4));
        }
    }

    #[test]
    fn reduction_of_fixture() {
        let ds = fixture_64();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = FunctionalGraph::sample_uniform(&ds, &mut rng);
        let r = w_reduce(&g, &ds, 0).unwrap();
        assert_eq!(r.n_hat(), 6);
        assert_eq!(r.plan.contracted.len(), 58);
        assert_eq!(r.kept(), &[0, 1, 2, 3, 62, 63]);
        assert_eq!(r.reduced_degrees().as_slice(), &[2, 2, 0, 0, 1, 1]);
        assert_eq!(r.reduced.graph.in_degrees(), vec![2, 2, 0, 0, 1, 1]);
        assert_eq!(r.reduced_degrees().stats().n_sigma2, 4);
        assert!(r.label_map_csv().starts_with("original_id,reduced_id\n1,1\n"));
    }

    #[test]
    fn inactive_reduction_is_identity() {
        let mut d = vec![3i64, 0, 0];
        d.extend(vec![1; 3]);
        let ds = DegreeSequence::new(&d).unwrap();
        // n sigma^2 = 4 + 1 + 1 = 6, n_hat = 10 >= 6
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = FunctionalGraph::sample_uniform(&ds, &mut rng);
        let r = w_reduce(&g, &ds, 4).unwrap();
        assert!(!r.plan.active);
        assert_eq!(r.reduced.graph, g);
        assert_eq!(r.kept(), &[0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn contraction_by_hand() {
        // 0 -> 2 -> 3 -> 0 cycle through degree-1 vertices, 1 -> 1 loop, 4 -> 0
        // degrees: 0:2, 1:1, 2:1, 3:1, 4:0 ; n sigma^2 = 2, n_hat = 2
        let g = FunctionalGraph::new(vec![2, 1, 3, 0, 0]).unwrap();
        let ds = g.degree_sequence();
        let r = w_reduce(&g, &ds, 0).unwrap();
        assert_eq!(r.plan.contracted, vec![1, 2, 3]);
        assert_eq!(r.kept(), &[0, 4]);
        // 0 -> 0 after bypassing 2 and 3; the loop at 1 is deleted
        assert_eq!(r.reduced.graph.image().collect::<Vec<_>>(), vec![0, 0]);
    }

    #[test]
    fn not_enough_degree_one_vertices() {
        // n sigma^2 = 2 gives n_hat = 2; with w of degree 1 only two
        // degree-1 vertices remain for three contractions
        let ds = DegreeSequence::new(&[2, 0, 1, 1, 1]).unwrap();
        assert_eq!(
            ReductionPlan::new(&ds, 2),
            Err(Error::NotEnoughDegreeOneVertices { needed: 3, available: 2 })
        );
        assert!(ReductionPlan::new(&ds, 0).is_ok());
    }

    #[test]
    fn extension_of_single_loop() {
        let g = LabeledGraph::new(vec![0], FunctionalGraph::new(vec![0]).unwrap()).unwrap();
        let loop_ = n_extend_with(&g, 2, |m| {
            assert_eq!(m, 2);
            1
        })
        .unwrap();
        assert_eq!(loop_.image().collect::<Vec<_>>(), vec![0, 1]);
        let swap = n_extend_with(&g, 2, |_| 0).unwrap();
        assert_eq!(swap.image().collect::<Vec<_>>(), vec![1, 0]);
        let same = n_extend_with(&g, 1, |_| unreachable!()).unwrap();
        assert_eq!(same, g.graph);
    }

    #[test]
    fn extension_restores_degree_sequence() {
        let ds = fixture_64();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = FunctionalGraph::sample_uniform(&ds, &mut rng);
            let r = w_reduce(&g, &ds, 1).unwrap();
            let h = n_extend(&r.reduced, 64, &mut rng).unwrap();
            assert_eq!(h.in_degrees(), ds.as_slice());
            // the extension of a reduction reduces back to the same graph
            assert_eq!(w_reduce(&h, &ds, 1).unwrap().reduced, r.reduced);
        }
    }

    #[test]
    fn labeled_graph_csv_round_trip() {
        let g = LabeledGraph::new(vec![1, 4, 6], FunctionalGraph::new(vec![1, 2, 2]).unwrap()).unwrap();
        let back = LabeledGraph::parse_csv(&g.to_csv()).unwrap();
        assert_eq!(back, g);
        assert!(LabeledGraph::parse_csv("1,2\n").is_err());
    }

    #[test]
    fn urn_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(urn_run(0, 3, 4, &mut rng).unwrap(), 3);
        assert_eq!(urn_run(50, 0, 2, &mut rng).unwrap(), 0);
        assert!(urn_run(5, 0, 0, &mut rng).is_err());
        for _ in 0..100 {
            let r = urn_run(1, 1, 1, &mut rng).unwrap();
            assert!(r == 1 || r == 2);
        }
        let mut u = UrnState::new(2, 3).unwrap();
        for _ in 0..40 {
            let before = u.red;
            u.step(&mut rng);
            assert!(u.red >= before && u.red >= 2);
            assert_eq!(u.red + u.blue, 5 + u.steps);
        }
        assert_eq!(urn_mean(2, 1, 1), 2.0);
        assert_eq!(urn_mean(100, 3, 5), 40.5);
        assert_eq!(urn_tail_bound(10, 0, 5, 1.0).unwrap(), 1.0);
        assert!(urn_tail_bound(10, 1, 1, 0.0).is_err());
        // 2 exp(-0.28125) > 1
        assert_eq!(urn_tail_bound(1000, 30, 70, 0.5).unwrap(), 1.0);
        let b = urn_tail_bound(1000, 30, 70, 2.0).unwrap();
        assert!((b - 2.0 * (-4.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn coupler_regimes() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let perm = DegreeSequence::permutation(10).unwrap();
        assert!(matches!(
            coupled_six_length(&perm, 0, &mut rng),
            Err(Error::RegimeNotApplicable(_))
        ));
        // inactive reduction: plain lazy walk
        let ds = DegreeSequence::new(&[3, 0, 0, 1, 1, 1]).unwrap();
        let c = Coupler::new(&ds, 0).unwrap();
        assert!(!c.plan().active);
        for _ in 0..100 {
            let s = c.sample(&mut rng);
            assert!((1..=6).contains(&s));
        }
        let c = Coupler::new(&fixture_64(), 0).unwrap();
        for _ in 0..1000 {
            let s = c.sample(&mut rng);
            assert!((1..=64).contains(&s));
        }
    }
}
