//! Samplers against exact laws and against each other.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rhomap::degrees::{generate, GeneratorKind};
use rhomap::exact::{rational_to_f64, Backend, ExactEngine};
use rhomap::experiments::{trial_rng, DegreeSource, Experiment, ExperimentConfig, SamplerKind, VertexRule};
use rhomap::reduction::Coupler;
use rhomap::stats::{chi_square_counts, chi_square_two_sample, counts_of};
use rhomap::{DegreeSequence, FunctionalGraph, LazyWalker};

const MIN_P: f64 = 1e-3;

/// Index of the cell `(six, tail)`, rows of increasing length.
fn cell(six: u64, tail: u64) -> usize {
    let k = six as usize;
    k * (k - 1) / 2 + tail as usize
}

fn joint_probs(ds: &DegreeSequence, v: usize) -> Vec<f64> {
    let law = ExactEngine::default().brute_force_oracle(ds, v).unwrap();
    let n = ds.n();
    let mut probs = vec![0.0; cell(n as u64 + 1, 0)];
    for (k, j, p) in law.cells() {
        probs[cell(k as u64, j as u64)] = rational_to_f64(p);
    }
    probs
}

#[test]
fn lazy_and_full_walks_follow_the_enumerated_joint_law() {
    let ds = DegreeSequence::new(&[3, 0, 1, 0, 2, 1, 0]).unwrap();
    let walker = LazyWalker::new(&ds);
    for v in [0, 1, 4] {
        let probs = joint_probs(&ds, v);
        let mut rng = ChaCha8Rng::seed_from_u64(v as u64);
        let lazy = counts_of((0..100_000).map(|_| {
            let w = walker.walk(v, &mut rng);
            cell(w.six, w.tail) as u64
        }));
        let full = counts_of((0..100_000).map(|_| {
            let w = FunctionalGraph::sample_uniform(&ds, &mut rng).walk_lengths(v);
            cell(w.six, w.tail) as u64
        }));
        let p_lazy = chi_square_counts(&lazy, &probs).unwrap().p_value;
        let p_full = chi_square_counts(&full, &probs).unwrap().p_value;
        assert!(p_lazy > MIN_P && p_full > MIN_P, "v = {v}: lazy p = {p_lazy}, full p = {p_full}");
    }
}

#[test]
fn sample_mean_matches_exact_mean_within_four_standard_errors() {
    for (kind, n, v) in [
        (GeneratorKind::TwoZero, 200, VertexRule::Fixed(0)),
        (GeneratorKind::TwoZero, 150, VertexRule::ZeroDegree),
        (GeneratorKind::Multinomial, 120, VertexRule::MaxDegree),
        (GeneratorKind::Permutation, 80, VertexRule::Fixed(3)),
    ] {
        let ds = generate(&kind, n, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let mut cfg = ExperimentConfig::new(DegreeSource::Explicit(ds), 20_000, 21);
        cfg.vertex = v;
        let exp = Experiment::prepare(cfg).unwrap();
        let report = exp.summarize(&exp.sample().unwrap()).unwrap();
        let exact = report.exact.unwrap().mean;
        let gap = (report.six.mean - exact).abs() / report.six.std_error;
        assert!(gap < 4.0, "{kind:?}: sample {} vs exact {exact} ({gap:.2} s.e.)", report.six.mean);
    }
}

#[test]
fn coupled_and_direct_six_lengths_agree_on_a_mixed_sequence() {
    let ds = generate(
        &GeneratorKind::BinaryMix { counts: [6, 200, 4, 1] },
        0,
        &mut ChaCha8Rng::seed_from_u64(0),
    )
    .unwrap();
    let coupler = Coupler::new(&ds, 0).unwrap();
    assert!(coupler.plan().active);
    let walker = LazyWalker::new(&ds);
    let coupled = counts_of((0..50_000u64).map(|i| coupler.sample(&mut trial_rng(1, i))));
    let direct = counts_of((0..50_000u64).map(|i| walker.walk(0, &mut trial_rng(2, i)).six));
    let p = chi_square_two_sample(&coupled, &direct).unwrap().p_value;
    assert!(p > MIN_P, "p = {p}");
}

#[test]
fn full_and_coupled_experiments_report_consistent_means() {
    let ds = generate(&GeneratorKind::BinaryMix { counts: [3, 100, 3, 0] }, 0, &mut ChaCha8Rng::seed_from_u64(0))
        .unwrap();
    let mut cfg = ExperimentConfig::new(DegreeSource::Explicit(ds), 20_000, 8);
    cfg.sampler = SamplerKind::Coupled;
    let exp = Experiment::prepare(cfg).unwrap();
    let report = exp.summarize(&exp.sample().unwrap()).unwrap();
    assert!(report.tail.is_none() && report.joint.is_none());
    let exact = report.exact.unwrap().mean;
    assert!((report.six.mean - exact).abs() < 4.0 * report.six.std_error);
}

fn small_sequence() -> impl Strategy<Value = DegreeSequence> {
    (3usize..=9)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(0usize..n, n)))
        .prop_map(|(n, targets)| {
            let mut d = vec![0u32; n];
            for t in targets {
                d[t] += 1;
            }
            DegreeSequence::from_degrees(d).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn float_backend_tracks_rational_backend(ds in small_sequence(), v_seed in 0usize..100) {
        let v = v_seed % ds.n();
        let engine = ExactEngine::default();
        let k_max = ds.n() - 1;
        let exact = engine.survival(&ds, v, k_max, Backend::Rational).unwrap();
        let float = engine.survival(&ds, v, k_max, Backend::Float).unwrap();
        for k in 0..=k_max {
            prop_assert!((exact.get(k) - float.get(k)).abs() < 1e-12);
        }
        prop_assert_eq!(float.clamped, 0);
    }

    #[test]
    fn joint_law_has_unit_mass_and_matches_survival(ds in small_sequence(), v_seed in 0usize..100) {
        let v = v_seed % ds.n();
        let engine = ExactEngine::default();
        let law = engine.joint_law_exact(&ds, v, ds.n()).unwrap();
        prop_assert!(num_traits::One::is_one(&law.total()));
        let surv = engine.survival(&ds, v, ds.n() - 1, Backend::Rational).unwrap();
        for k in 1..ds.n() {
            let row: f64 = law.row(k).iter().map(rational_to_f64).sum();
            prop_assert!((row - surv.pmf(k)).abs() < 1e-12);
        }
    }
}
