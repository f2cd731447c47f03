use ctx2vec::linalg::Matrix;
use ctx2vec::retrofit::{
    c_nu, edge_weight, objective, retrofit, EdgeWeights, Kernel, Lexicon, RetrofitMode, Schedule,
};
use ctx2vec::{Embeddings, RetrofitConfig, SynonymGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_embeddings(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Embeddings {
    let data = (0..rows * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    Embeddings::new(
        (0..rows).map(|i| format!("w{i}")).collect(),
        Matrix::from_vec(rows, dim, data).unwrap(),
    )
    .unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, rows: usize, edges: usize) -> SynonymGraph {
    let pairs: Vec<(usize, usize)> = (0..edges)
        .map(|_| (rng.random_range(0..rows), rng.random_range(0..rows)))
        .collect();
    SynonymGraph::from_edges(rows, &pairs).unwrap()
}

#[test]
fn c_nu_increases_towards_one() {
    let grid = [0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];
    let values: Vec<f64> = grid.iter().map(|&n| c_nu(n).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
    assert!(values.iter().all(|&c| c > 0.0 && c <= 1.0));
    assert!((values[6] - 1.0).abs() < 1e-3);
}

#[test]
fn exact_minimizer_objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for trial in 0..20 {
        let emb = random_embeddings(&mut rng, 50, 6);
        let graph = random_graph(&mut rng, 50, 80);
        let config = RetrofitConfig {
            mode: RetrofitMode::ExactMinimizer,
            iterations: 30,
            nu: rng.random_range(0.5..5.0),
            sigma: rng.random_range(0.2..3.0),
            ..RetrofitConfig::default()
        };
        let weights = EdgeWeights::compute(&graph, emb.matrix(), &config.kernel().unwrap());
        let start = objective(emb.matrix(), emb.matrix(), &graph, &weights, &config);
        let refined = retrofit(&emb, &graph, &config).unwrap();
        let mut prev = start;
        for s in &refined.report.sweeps {
            assert!(s.objective <= prev + 1e-12 * prev.abs().max(1.0), "trial {trial}: {} > {prev}", s.objective);
            prev = s.objective;
        }
    }
}

#[test]
fn exact_minimizer_converges_on_large_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let emb = random_embeddings(&mut rng, 1000, 8);
    let graph = random_graph(&mut rng, 1000, 3000);
    let config = RetrofitConfig {
        mode: RetrofitMode::ExactMinimizer,
        iterations: 100,
        tolerance: Some(1e-6),
        ..RetrofitConfig::default()
    };
    let r = retrofit(&emb, &graph, &config).unwrap();
    assert!(r.report.converged, "last sweep {:?}", r.report.sweeps.last());

    // one more sweep at the fixpoint changes nothing
    let more = retrofit(&emb, &graph, &RetrofitConfig { iterations: r.report.sweeps.len() + 1, tolerance: None, ..config }).unwrap();
    let diff = r
        .refined
        .matrix()
        .as_slice()
        .iter()
        .zip(more.refined.matrix().as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-5, "{diff}");
}

#[test]
fn jacobi_and_gauss_seidel_reach_the_same_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let emb = random_embeddings(&mut rng, 30, 4);
    let graph = random_graph(&mut rng, 30, 40);
    let run = |schedule| {
        retrofit(
            &emb,
            &graph,
            &RetrofitConfig {
                mode: RetrofitMode::ExactMinimizer,
                schedule,
                iterations: 400,
                ..RetrofitConfig::default()
            },
        )
        .unwrap()
        .refined
    };
    let (gs, jac) = (run(Schedule::GaussSeidel), run(Schedule::Jacobi));
    for (a, b) in gs.matrix().as_slice().iter().zip(jac.matrix().as_slice()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn dynamic_weights_differ_from_frozen() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let emb = random_embeddings(&mut rng, 10, 3);
    let graph = random_graph(&mut rng, 10, 15);
    let base = RetrofitConfig {
        iterations: 3,
        ..RetrofitConfig::default()
    };
    let frozen = retrofit(&emb, &graph, &base).unwrap();
    let dynamic = retrofit(&emb, &graph, &RetrofitConfig { dynamic_weights: true, ..base }).unwrap();
    assert_ne!(frozen.refined, dynamic.refined);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_outside_the_lexicon_are_untouched(
        seed in any::<u64>(),
        rows in 2usize..40,
        dim in 1usize..6,
        lexicon_lines in 0usize..15,
        mode in prop_oneof![Just(RetrofitMode::PaperUpdate), Just(RetrofitMode::ExactMinimizer)],
        jacobi in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let emb = random_embeddings(&mut rng, rows, dim);
        let entries = (0..lexicon_lines)
            .map(|_| {
                let head = format!("w{}", rng.random_range(0..rows + 5));
                let syns = (0..rng.random_range(0..4)).map(|_| format!("w{}", rng.random_range(0..rows + 5))).collect();
                (head, syns)
            })
            .collect();
        let (graph, _) = SynonymGraph::from_lexicon(&Lexicon { entries }, &emb);
        let config = RetrofitConfig {
            mode,
            schedule: if jacobi { Schedule::Jacobi } else { Schedule::GaussSeidel },
            ..RetrofitConfig::default()
        };
        let out = retrofit(&emb, &graph, &config).unwrap();
        for i in 0..rows {
            if graph.degree(i) == 0 {
                let a: Vec<u64> = out.refined.row(i).iter().map(|x| x.to_bits()).collect();
                let b: Vec<u64> = emb.row(i).iter().map(|x| x.to_bits()).collect();
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn kernel_is_symmetric_bounded_and_decreasing(
        a in prop::collection::vec(-3.0f64..3.0, 4),
        b in prop::collection::vec(-3.0f64..3.0, 4),
        nu in 0.1f64..50.0,
        sigma in 0.1f64..10.0,
        stretch in 1.01f64..3.0,
    ) {
        let config = RetrofitConfig { nu, sigma, ..RetrofitConfig::default() };
        let g_ab = edge_weight(&a, &b, &config).unwrap();
        let g_ba = edge_weight(&b, &a, &config).unwrap();
        prop_assert_eq!(g_ab.to_bits(), g_ba.to_bits());
        let c = c_nu(nu).unwrap();
        prop_assert!(g_ab > 0.0 && g_ab <= c);
        let kernel = Kernel::new(nu, sigma).unwrap();
        let d2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        if d2 > 0.0 {
            prop_assert!(kernel.weight_sq(d2 * stretch) < kernel.weight_sq(d2));
        }
    }
}
