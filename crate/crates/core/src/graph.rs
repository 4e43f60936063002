//! Functional graphs, uniform sampling with a fixed in-degree sequence, and
//! six/tail/cycle lengths of the trajectory from a start vertex.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::degrees::DegreeSequence;
use crate::error::{Error, Result};

/// A mapping `f: [n] -> [n]` stored as its image array, 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionalGraph {
    image: Vec<u32>,
}

/// Lengths of the rho-shaped trajectory `v, f(v), f^2(v), ...`.
///
/// `six` is the number of distinct vertices visited, `tail` the number of
/// steps before the cycle is entered and `cycle = six - tail`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct WalkLengths {
    pub six: u64,
    pub tail: u64,
    pub cycle: u64,
}

impl WalkLengths {
    pub fn new(six: u64, tail: u64) -> Self {
        debug_assert!(tail < six);
        Self {
            six,
            tail,
            cycle: six - tail,
        }
    }
}

impl FunctionalGraph {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if let Some(&bad) = image.iter().find(|&&y| y >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, n });
        }
        Ok(Self {
            image: image.into_iter().map(|y| y as u32).collect(),
        })
    }

    pub(crate) fn from_raw(image: Vec<u32>) -> Self {
        Self { image }
    }

    /// Draws `f` uniformly from all mappings with in-degree sequence `ds`.
    ///
    /// Every such mapping corresponds to exactly one arrangement of the slot
    /// multiset (vertex `i` repeated `d_i` times), and a uniform shuffle is
    /// uniform over the distinct arrangements.
    pub fn sample_uniform<R: Rng + ?Sized>(ds: &DegreeSequence, rng: &mut R) -> Self {
        let mut slots = ds.slots();
        slots.shuffle(rng);
        Self { image: slots }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.image[v] as usize
    }

    pub fn image(&self) -> impl Iterator<Item = usize> + '_ {
        self.image.iter().map(|&y| y as usize)
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n()];
        for &y in &self.image {
            d[y as usize] += 1;
        }
        d
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence::from_degrees(self.in_degrees()).expect("in-degrees of a mapping always sum to n")
    }

    /// `f^k(v)`; `k = 0` gives `v`.
    pub fn iterate(&self, v: usize, k: u64) -> usize {
        let mut x = v;
        for _ in 0..k {
            x = self.apply(x);
        }
        x
    }

    /// Walks from `v` until a vertex repeats, keeping a vertex -> position map.
    pub fn walk_lengths(&self, v: usize) -> WalkLengths {
        let mut seen: HashMap<u32, u64> = HashMap::new();
        let mut x = v as u32;
        let mut step = 0u64;
        loop {
            if let Some(&pos) = seen.get(&x) {
                return WalkLengths::new(step, pos);
            }
            seen.insert(x, step);
            x = self.image[x as usize];
            step += 1;
        }
    }

    /// `v,f(v)` lines, 1-indexed, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,f_v\n");
        for (v, &y) in self.image.iter().enumerate() {
            let _ = writeln!(out, "{},{}", v + 1, y + 1);
        }
        out
    }

    /// Reads `v,f(v)` lines (1-indexed). A header row and `#` comments are
    /// skipped; every vertex in `1..=n` must appear exactly once as a source.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let edges = parse_edge_list(text)?;
        let n = edges.len();
        let mut image = vec![usize::MAX; n];
        for (v, y) in edges {
            if v >= n || y >= n {
                return Err(Error::Parse(format!("edge {}->{} outside 1..={n}", v + 1, y + 1)));
            }
            if image[v] != usize::MAX {
                return Err(Error::Parse(format!("vertex {} has two images", v + 1)));
            }
            image[v] = y;
        }
        Self::new(image)
    }
}

/// Parses 1-indexed `v,f(v)` lines into 0-indexed pairs.
pub(crate) fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (a, b) = match (it.next(), it.next()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse(format!("expected `v,f(v)`, got {line:?}"))),
        };
        match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(a), Ok(b)) if a >= 1 && b >= 1 => edges.push((a - 1, b - 1)),
            (Ok(_), Ok(_)) => return Err(Error::Parse("vertex ids are 1-indexed".into())),
            // header row
            _ if edges.is_empty() => continue,
            _ => return Err(Error::Parse(format!("bad edge {line:?}"))),
        }
    }
    Ok(edges)
}

/// Samples the walk from a start vertex without materialising the mapping.
///
/// The images of path vertices are drawn one at a time from the slot list
/// without replacement, i.e. a lazy Fisher-Yates shuffle over the virtual
/// slot array. Swapped positions live in a sparse overlay, so a walk costs
/// `O(six)` expected time after the `O(n)` setup, which is shared across
/// walks.
#[derive(Debug, Clone)]
pub struct LazyWalker {
    n: u64,
    /// vertices with positive degree
    vertices: Vec<u32>,
    /// `starts[i]` is the first slot owned by `vertices[i]`
    starts: Vec<u64>,
}

impl LazyWalker {
    pub fn new(ds: &DegreeSequence) -> Self {
        let mut vertices = Vec::new();
        let mut starts = Vec::new();
        let mut acc = 0u64;
        for (v, &d) in ds.as_slice().iter().enumerate() {
            if d > 0 {
                vertices.push(v as u32);
                starts.push(acc);
                acc += d as u64;
            }
        }
        Self {
            n: ds.n() as u64,
            vertices,
            starts,
        }
    }

    #[inline]
    fn slot_owner(&self, slot: u64) -> u32 {
        let i = self.starts.partition_point(|&s| s <= slot) - 1;
        self.vertices[i]
    }

    pub fn walk<R: Rng + ?Sized>(&self, v: usize, rng: &mut R) -> WalkLengths {
        let mut overlay: HashMap<u64, u64> = HashMap::new();
        let mut path: HashMap<u32, u64> = HashMap::new();
        path.insert(v as u32, 0);
        let mut drawn = 0u64;
        loop {
            // slots drawn..n are still unconsumed
            let r = rng.gen_range(drawn..self.n);
            let picked = *overlay.get(&r).unwrap_or(&r);
            if r != drawn {
                let front = *overlay.get(&drawn).unwrap_or(&drawn);
                overlay.insert(r, front);
            }
            drawn += 1;
            let y = self.slot_owner(picked);
            if let Some(&pos) = path.get(&y) {
                return WalkLengths::new(drawn, pos);
            }
            path.insert(y, drawn);
        }
    }
}

/// One lazy walk; builds the slot index on every call.
pub fn sample_walk_lazy<R: Rng + ?Sized>(ds: &DegreeSequence, v: usize, rng: &mut R) -> Result<WalkLengths> {
    ds.check_vertex(v)?;
    Ok(LazyWalker::new(ds).walk(v, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square_mod_five() -> FunctionalGraph {
        FunctionalGraph::new((0..5).map(|x| x * x % 5).collect()).unwrap()
    }

    /// The example rho: tail a->b->c, an 8-cycle 1..8, plus hanging trees.
    fn rho_figure() -> (FunctionalGraph, usize) {
        // 0,1,2 = a,b,c; 3..=10 = cycle 1..8; 11..=18 = v1..v8
        let mut f = vec![0usize; 19];
        f[0] = 1;
        f[1] = 2;
        f[2] = 3;
        for i in 3..10 {
            f[i] = i + 1;
        }
        f[10] = 3;
        f[11] = 0; // v1 -> a
        f[12] = 1; // v2 -> b
        f[13] = 1; // v3 -> b
        f[14] = 9; // v4 -> cycle 7
        f[15] = 14; // v5 -> v4
        f[16] = 14; // v6 -> v4
        f[17] = 7; // v7 -> cycle 5
        f[18] = 17; // v8 -> v7
        (FunctionalGraph::new(f).unwrap(), 0)
    }

    #[test]
    fn iterate_examples() {
        let g = square_mod_five();
        assert_eq!(g.iterate(2, 2), 1);
        assert_eq!(g.iterate(3, 0), 3);
        assert_eq!(g.iterate(1, 1000), 1);
        assert_eq!(g.in_degrees(), vec![1, 2, 0, 0, 2]);
    }

    #[test]
    fn walk_examples() {
        let (g, v) = rho_figure();
        assert_eq!(g.walk_lengths(v), WalkLengths { six: 11, tail: 3, cycle: 8 });
        assert_eq!(square_mod_five().walk_lengths(2), WalkLengths { six: 3, tail: 2, cycle: 1 });
        assert_eq!(square_mod_five().walk_lengths(0), WalkLengths { six: 1, tail: 0, cycle: 1 });
    }

    #[test]
    fn walk_matches_iterate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ds = crate::degrees::generate(&crate::degrees::GeneratorKind::Multinomial, 300, &mut rng).unwrap();
        for _ in 0..20 {
            let g = FunctionalGraph::sample_uniform(&ds, &mut rng);
            for v in [0, 7, 299] {
                let w = g.walk_lengths(v);
                assert_eq!(w.six, w.tail + w.cycle);
                assert_eq!(g.iterate(v, w.six), g.iterate(v, w.tail));
                assert_eq!(g.iterate(v, w.tail + w.cycle * 3), g.iterate(v, w.tail));
            }
        }
    }

    #[test]
    fn sampler_preserves_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = DegreeSequence::new(&[1, 2, 0, 0, 2]).unwrap();
        for _ in 0..100 {
            let g = FunctionalGraph::sample_uniform(&ds, &mut rng);
            assert_eq!(g.in_degrees(), ds.as_slice());
        }
        let all_to_one = DegreeSequence::new(&[0, 4, 0, 0]).unwrap();
        let g = FunctionalGraph::sample_uniform(&all_to_one, &mut rng);
        assert!(g.image().all(|y| y == 1));
    }

    #[test]
    fn two_vertex_permutations_are_equally_likely() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ds = DegreeSequence::permutation(2).unwrap();
        let trials = 20_000;
        let identity = (0..trials)
            .filter(|_| FunctionalGraph::sample_uniform(&ds, &mut rng).apply(0) == 0)
            .count();
        // 0.5 +- 4 s.e.
        assert!((identity as f64 / trials as f64 - 0.5).abs() < 4.0 * 0.5 / (trials as f64).sqrt());
    }

    #[test]
    fn lazy_walk_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let star = DegreeSequence::new(&[0, 0, 3]).unwrap();
        for _ in 0..50 {
            assert_eq!(sample_walk_lazy(&star, 2, &mut rng).unwrap(), WalkLengths::new(1, 0));
        }
        let perm = DegreeSequence::permutation(50).unwrap();
        let walker = LazyWalker::new(&perm);
        for _ in 0..500 {
            assert_eq!(walker.walk(17, &mut rng).tail, 0);
        }
        assert!(sample_walk_lazy(&perm, 50, &mut rng).is_err());
    }

    #[test]
    fn lazy_walk_two_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ds = DegreeSequence::permutation(2).unwrap();
        let walker = LazyWalker::new(&ds);
        let trials = 20_000;
        let mut loops = 0;
        for _ in 0..trials {
            match walker.walk(0, &mut rng) {
                WalkLengths { six: 1, tail: 0, .. } => loops += 1,
                WalkLengths { six: 2, tail: 0, .. } => {}
                other => panic!("impossible walk {other:?}"),
            }
        }
        assert!((loops as f64 / trials as f64 - 0.5).abs() < 4.0 * 0.5 / (trials as f64).sqrt());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = square_mod_five();
        assert_eq!(FunctionalGraph::parse_csv(&g.to_csv()).unwrap(), g);
        assert!(FunctionalGraph::parse_csv("1,1\n1,2\n").is_err());
        assert!(FunctionalGraph::parse_csv("1,3\n2,1\n").is_err());
    }
}
