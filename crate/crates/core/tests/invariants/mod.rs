//! Randomized invariants for every core module, written as plain functions
//! over a proptest runner so more than one test target can drive them.

use lcae_core::baselines::{ista, ista_objective, omp, IstaConfig};
use lcae_core::metrics::{class_metrics, nmse, Confusion};
use lcae_core::model::{classify_sequence, classify_windows, ClassScores};
use lcae_core::numkit::{
    logit_scalar, ridge_lstsq_left, sigmoid, sigmoid_scalar, stacked_ridge_solve, Block,
};
use lcae_core::rng::SeededRng;
use lcae_core::sensing::SensingMatrix;
use lcae_core::signal::{assemble, one_hot, NormStats, WindowSet};
use lcae_core::trainer::{
    init_state, objective, solve_weight_block, solve_z, solve_z1, solve_z2, train, TrainConfig,
    TrainData, TrainState, WeightBlock,
};
use lcae_core::{LayerSizes, LcaeModel, Mat};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const CASES: u32 = 128;

pub type Property = fn(&mut TestRunner) -> Result<(), String>;

/// Fixed-seed runner: the same cases on every run, no regression files.
pub fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// `(module, property, check)` for every invariant.
pub const ALL: &[(&str, &str, Property)] = &[
    (
        "numkit",
        "ridge_satisfies_normal_equations",
        ridge_satisfies_normal_equations,
    ),
    (
        "numkit",
        "stacked_satisfies_normal_equations",
        stacked_satisfies_normal_equations,
    ),
    ("numkit", "logit_inverts_sigmoid", logit_inverts_sigmoid),
    (
        "numkit",
        "single_block_ignores_weight",
        single_block_ignores_weight,
    ),
    (
        "numkit",
        "solvers_are_deterministic",
        solvers_are_deterministic,
    ),
    ("sensing", "compress_is_linear", compress_is_linear),
    ("sensing", "adjoint_identity", adjoint_identity),
    ("sensing", "generation_is_pure", generation_is_pure),
    (
        "baselines",
        "omp_residual_orthogonal_and_support_fresh",
        omp_residual_orthogonal_and_support_fresh,
    ),
    (
        "baselines",
        "ista_objective_never_increases",
        ista_objective_never_increases,
    ),
    (
        "model",
        "sequence_class_ignores_window_order_and_shift",
        sequence_class_ignores_window_order_and_shift,
    ),
    (
        "model",
        "agreeing_windows_match_sequence",
        agreeing_windows_match_sequence,
    ),
    (
        "model",
        "reconstruct_is_four_products_after_adjoint",
        reconstruct_is_four_products_after_adjoint,
    ),
    (
        "trainer",
        "proxy_solves_do_not_increase_local_quadratic",
        proxy_solves_do_not_increase_local_quadratic,
    ),
    (
        "trainer",
        "weight_solves_do_not_increase_local_quadratic",
        weight_solves_do_not_increase_local_quadratic,
    ),
    (
        "trainer",
        "z2_label_block_vanishes_with_zero_lambda",
        z2_label_block_vanishes_with_zero_lambda,
    ),
    (
        "trainer",
        "objective_invariant_under_partition_preserving_permutation",
        objective_invariant_under_partition_preserving_permutation,
    ),
    (
        "trainer",
        "train_is_bitwise_reproducible",
        train_is_bitwise_reproducible,
    ),
    (
        "signal",
        "assemble_preserves_window_label_pairs",
        assemble_preserves_window_label_pairs,
    ),
    (
        "signal",
        "assemble_shapes_match_under_compression",
        assemble_shapes_match_under_compression,
    ),
    (
        "signal",
        "one_hot_columns_sum_to_one",
        one_hot_columns_sum_to_one,
    ),
    (
        "signal",
        "normalizer_round_trip_and_moments",
        normalizer_round_trip_and_moments,
    ),
    (
        "metrics",
        "nmse_permutation_invariant",
        nmse_permutation_invariant,
    ),
    (
        "metrics",
        "nmse_of_perturbation_is_relative_error",
        nmse_of_perturbation_is_relative_error,
    ),
    (
        "metrics",
        "accuracy_is_trace_over_total",
        accuracy_is_trace_over_total,
    ),
];

fn random_mat(rng: &mut SeededRng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.normal())
}

fn rel_residual(lhs: &Mat, rhs: &Mat) -> f64 {
    lhs.sub(rhs).unwrap().norm_sq().sqrt() / rhs.norm_sq().sqrt().max(1e-300)
}

// numkit

pub fn ridge_satisfies_normal_equations(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..8, 1usize..8, 0usize..8, 1e-8f64..1.0),
            |(seed, p, q, extra, delta)| {
                let mut rng = SeededRng::new(seed);
                let n = q + extra;
                let y = random_mat(&mut rng, p, n);
                let z = random_mat(&mut rng, q, n);
                let w = ridge_lstsq_left(&y, &z, delta).unwrap();
                let mut g = z.matmul_tr(&z).unwrap();
                for i in 0..q {
                    g.set(i, i, g.get(i, i) + delta);
                }
                let lhs = w.matmul(&g).unwrap();
                prop_assert!(rel_residual(&lhs, &y.matmul_tr(&z).unwrap()) < 1e-8);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn stacked_satisfies_normal_equations(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(
                any::<u64>(),
                1usize..8,
                1usize..10,
                1usize..6,
                0.01f64..10.0,
                0.01f64..10.0,
            ),
            |(seed, q, r, nc, w1, w2)| {
                let mut rng = SeededRng::new(seed);
                let a = random_mat(&mut rng, r, q);
                let c1 = random_mat(&mut rng, r, nc);
                let c2 = random_mat(&mut rng, q, nc);
                let delta = 1e-8;
                let z = stacked_ridge_solve(
                    &[Block::dense(&a, &c1, w1), Block::identity(&c2, w2)],
                    delta,
                )
                .unwrap();
                let mut g = a.tr_matmul(&a).unwrap().scale(w1);
                for i in 0..q {
                    g.set(i, i, g.get(i, i) + w2 + delta);
                }
                let rhs = a
                    .tr_matmul(&c1)
                    .unwrap()
                    .scale(w1)
                    .add(&c2.scale(w2))
                    .unwrap();
                prop_assert!(rel_residual(&g.matmul(&z).unwrap(), &rhs) < 1e-8);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn logit_inverts_sigmoid(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(-10.0f64..10.0,), |(x,)| {
            prop_assert!((logit_scalar(sigmoid_scalar(x), 1e-6) - x).abs() < 1e-9);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn single_block_ignores_weight(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..6, 0usize..6, 0.01f64..100.0),
            |(seed, q, extra, w)| {
                let mut rng = SeededRng::new(seed);
                let a = random_mat(&mut rng, q + extra, q);
                let c = random_mat(&mut rng, q + extra, 3);
                let z1 = stacked_ridge_solve(&[Block::dense(&a, &c, 1.0)], 0.0).unwrap();
                let zw = stacked_ridge_solve(&[Block::dense(&a, &c, w)], 0.0).unwrap();
                prop_assert!(rel_residual(&zw, &z1) < 1e-8);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn solvers_are_deterministic(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let mut rng = SeededRng::new(seed);
            let y = random_mat(&mut rng, 4, 9);
            let z = random_mat(&mut rng, 5, 9);
            let a = ridge_lstsq_left(&y, &z, 1e-8).unwrap();
            let b = ridge_lstsq_left(&y, &z, 1e-8).unwrap();
            prop_assert_eq!(a.as_slice(), b.as_slice());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// sensing

pub fn compress_is_linear(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(
                any::<u64>(),
                1usize..20,
                0usize..20,
                -3.0f64..3.0,
                -3.0f64..3.0,
            ),
            |(seed, m, extra, al, be)| {
                let n = 2 * m + extra;
                let d = 1 + (seed as usize % m.min(3));
                let phi = SensingMatrix::generate(m, n, d, seed).unwrap();
                let mut rng = SeededRng::new(seed ^ 1);
                let x = random_mat(&mut rng, n, 3);
                let y = random_mat(&mut rng, n, 3);
                let lhs = phi
                    .compress(&x.scale(al).add(&y.scale(be)).unwrap())
                    .unwrap();
                let rhs = phi
                    .compress(&x)
                    .unwrap()
                    .scale(al)
                    .add(&phi.compress(&y).unwrap().scale(be))
                    .unwrap();
                prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12 * (1.0 + rhs.max_abs()));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn adjoint_identity(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..20, 0usize..20),
            |(seed, m, extra)| {
                let n = 2 * m + extra;
                let phi =
                    SensingMatrix::generate(m, n, 1 + (seed as usize % m.min(2)), seed).unwrap();
                let mut rng = SeededRng::new(seed ^ 2);
                let x = random_mat(&mut rng, n, 1);
                let y = random_mat(&mut rng, m, 1);
                let lhs: f64 = phi
                    .compress(&x)
                    .unwrap()
                    .as_slice()
                    .iter()
                    .zip(y.as_slice())
                    .map(|(a, b)| a * b)
                    .sum();
                let rhs: f64 = x
                    .as_slice()
                    .iter()
                    .zip(phi.adjoint(&y).unwrap().as_slice())
                    .map(|(a, b)| a * b)
                    .sum();
                prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn generation_is_pure(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 2usize..40, 0usize..30),
            |(seed, m, extra)| {
                let n = 2 * m + extra;
                let a = SensingMatrix::generate(m, n, 2, seed);
                let b = SensingMatrix::generate(m, n, 2, seed);
                prop_assert_eq!(a, b);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

// baselines

pub fn omp_residual_orthogonal_and_support_fresh(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 4usize..16, 4usize..30, 1usize..4),
            |(seed, m, n, k)| {
                let mut rng = SeededRng::new(seed);
                let a = random_mat(&mut rng, m, n);
                let y = random_mat(&mut rng, m, 1).into_vec();
                for kk in 1..=k.min(m).min(n) {
                    let r = omp(&a, &y, kk).unwrap();
                    let mut s = r.support.clone();
                    s.sort_unstable();
                    s.dedup();
                    prop_assert_eq!(s.len(), r.support.len());
                    prop_assert!(r.support.len() == kk || r.residual_norm < 1e-12);
                    let ax = a.matmul(&Mat::column_vector(&r.x)).unwrap();
                    let res: Vec<f64> = y.iter().zip(ax.as_slice()).map(|(p, q)| p - q).collect();
                    for &j in &r.support {
                        let c: f64 = a.col(j).iter().zip(&res).map(|(p, q)| p * q).sum();
                        prop_assert!(c.abs() < 1e-10, "column {} correlation {}", j, c);
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn ista_objective_never_increases(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 2usize..15, 2usize..30, 1e-3f64..1.0),
            |(seed, m, n, lambda)| {
                let mut rng = SeededRng::new(seed);
                let a = random_mat(&mut rng, m, n);
                let y = random_mat(&mut rng, m, 1).into_vec();
                let c = IstaConfig {
                    lambda,
                    max_iters: 200,
                    tol: 0.0,
                    step: None,
                    record_objective: true,
                };
                let r = ista(&a, &y, &c).unwrap();
                let mut prev = ista_objective(&a, &y, &vec![0.0; n], lambda);
                for &f in &r.objective {
                    prop_assert!(f <= prev * (1.0 + 1e-12) + 1e-14, "{} > {}", f, prev);
                    prev = f;
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

// model

pub fn sequence_class_ignores_window_order_and_shift(
    runner: &mut TestRunner,
) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..5, 1usize..8, -5.0f64..5.0),
            |(seed, c, w, shift)| {
                let mut rng = SeededRng::new(seed);
                let s = random_mat(&mut rng, c, w);
                let base = classify_sequence(&ClassScores { scores: s.clone() }).unwrap();
                let mut order: Vec<usize> = (0..w).collect();
                for i in (1..w).rev() {
                    order.swap(i, rng.below(i as u64 + 1) as usize);
                }
                prop_assert_eq!(
                    classify_sequence(&ClassScores {
                        scores: s.select_cols(&order)
                    })
                    .unwrap(),
                    base
                );
                prop_assert_eq!(
                    classify_sequence(&ClassScores {
                        scores: s.map(|v| v + shift)
                    })
                    .unwrap(),
                    base
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn agreeing_windows_match_sequence(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(), 2usize..5, 1usize..8), |(seed, c, w)| {
            let mut rng = SeededRng::new(seed);
            let k = rng.below(c as u64) as usize;
            let s = Mat::from_fn(
                c,
                w,
                |r, _| if r == k { 2.0 + rng.unit() } else { rng.unit() },
            );
            let cs = ClassScores { scores: s };
            let per = classify_windows(&cs);
            prop_assert!(per.iter().all(|&p| p == k));
            prop_assert_eq!(classify_sequence(&cs).unwrap(), k);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn reconstruct_is_four_products_after_adjoint(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 2usize..12, 1usize..8, 1usize..6),
            |(seed, n, h1, h2)| {
                let mut rng = SeededRng::new(seed);
                let sizes = LayerSizes::new(n, h1, h2, 2).unwrap();
                let mut g = |r, c| random_mat(&mut rng, r, c);
                let (w1, w2, w2p, w1p, d) =
                    (g(h1, n + 1), g(h2, h1), g(h1, h2), g(n, h1), g(2, h2));
                let norm = NormStats {
                    mean: (0..n).map(|i| i as f64 * 0.1).collect(),
                    scale: vec![1.5; n],
                };
                let model = LcaeModel::from_parts(
                    sizes,
                    w1.clone(),
                    w2.clone(),
                    w2p.clone(),
                    w1p.clone(),
                    d,
                    norm.clone(),
                )
                .unwrap();
                let m = 1 + n / 2;
                let phi = SensingMatrix::generate(m, n, 1, seed).unwrap();
                let b = random_mat(&mut SeededRng::new(seed ^ 3), m, 3);
                let xt = norm.apply(&phi.adjoint(&b).unwrap()).unwrap();
                let z = sigmoid(&w1.matmul(&xt.with_ones_row()).unwrap());
                let z2 = sigmoid(&w2.matmul(&z).unwrap());
                let out = w1p.matmul(&sigmoid(&w2p.matmul(&z2).unwrap())).unwrap();
                let want = norm.invert(&out).unwrap();
                prop_assert_eq!(model.reconstruct(&phi, &b).unwrap(), want);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

fn trainer_instance(seed: u64, lambda: f64) -> (TrainConfig, TrainData, LcaeModel, TrainState) {
    let mut rng = SeededRng::new(seed);
    let n = 2 + rng.below(6) as usize;
    let h1 = 2 + rng.below(5) as usize;
    let h2 = 1 + rng.below(4) as usize;
    let big_n = 3 + rng.below(8) as usize;
    let ns = rng.below(big_n as u64 + 1) as usize;
    let sizes = LayerSizes::new(n, h1, h2, 2).unwrap();
    let mut cfg = TrainConfig::new(sizes);
    cfg.lambda = lambda;
    cfg.mu1 = 0.1 + rng.unit();
    cfg.mu2 = 0.1 + rng.unit();
    cfg.mu = 0.1 + rng.unit();
    cfg.logit_eps = 0.01;
    cfg.seed = seed;
    let labels: Vec<usize> = (0..ns).map(|_| rng.below(2) as usize).collect();
    let data = TrainData::new(
        random_mat(&mut rng, n, big_n),
        random_mat(&mut rng, n, big_n),
        one_hot(&labels, 2).unwrap(),
        ns,
    )
    .unwrap();
    let (model, mut state) = init_state(&cfg, &data).unwrap();
    state.z1 = Mat::from_fn(h1, big_n, |r, c| {
        state.z1.get(r, c) * 0.8 + 0.1 * rng.unit()
    });
    state.b = Mat::from_fn(h1, big_n, |_, _| 0.05 * rng.normal());
    state.b1 = Mat::from_fn(h1, big_n, |_, _| 0.05 * rng.normal());
    state.b2 = Mat::from_fn(h2, big_n, |_, _| 0.05 * rng.normal());
    (cfg, data, model, state)
}

/// `Σ wᵢ‖Cᵢ − AᵢZ‖² + delta‖Z‖²`
fn stacked_value(blocks: &[(Option<&Mat>, &Mat, f64)], z: &Mat, delta: f64) -> f64 {
    let mut v = delta * z.norm_sq();
    for (op, target, w) in blocks {
        let pred = match op {
            Some(a) => a.matmul(z).unwrap(),
            None => z.clone(),
        };
        v += w * target.sub(&pred).unwrap().norm_sq();
    }
    v
}

fn no_increase(before: f64, after: f64) -> bool {
    after <= before + 1e-10 * (1.0 + before.abs())
}

// trainer

pub fn proxy_solves_do_not_increase_local_quadratic(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let (cfg, data, model, state) = trainer_instance(seed, 0.7);
            let eps = cfg.logit_eps;
            let a1 = sigmoid(&model.w2p().matmul(&state.z2).unwrap())
                .add(&state.b1)
                .unwrap();
            let blocks = [(Some(model.w1p()), data.x(), 1.0), (None, &a1, cfg.mu1)];
            let z1 = solve_z1(&state, &model, &data, &cfg).unwrap();
            prop_assert!(no_increase(
                stacked_value(&blocks, &state.z1, cfg.ridge),
                stacked_value(&blocks, &z1, cfg.ridge)
            ));

            let l = lcae_core::numkit::logit(&state.z1.sub(&state.b1).unwrap(), eps);
            let a2 = sigmoid(&model.w2().matmul(&state.z).unwrap())
                .add(&state.b2)
                .unwrap();
            let z2 = solve_z2(&state, &model, &data, &cfg).unwrap();
            let value = |z: &Mat| {
                let mut v = stacked_value(
                    &[(Some(model.w2p()), &l, cfg.mu1), (None, &a2, cfg.mu2)],
                    z,
                    cfg.ridge,
                );
                if data.n_supervised() > 0 {
                    let zs = z.cols_range(data.n_unsupervised(), data.len());
                    v += cfg.lambda
                        * data
                            .targets()
                            .sub(&model.d().matmul(&zs).unwrap())
                            .unwrap()
                            .norm_sq();
                }
                v
            };
            prop_assert!(no_increase(value(&state.z2), value(&z2)));

            let l2 = lcae_core::numkit::logit(&state.z2.sub(&state.b2).unwrap(), eps);
            let a = sigmoid(&model.w1().matmul(data.x_tilde_bias()).unwrap())
                .add(&state.b)
                .unwrap();
            let blocks = [(Some(model.w2()), &l2, cfg.mu2), (None, &a, cfg.mu)];
            let z = solve_z(&state, &model, &data, &cfg).unwrap();
            prop_assert!(no_increase(
                stacked_value(&blocks, &state.z, cfg.ridge),
                stacked_value(&blocks, &z, cfg.ridge)
            ));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn weight_solves_do_not_increase_local_quadratic(
    runner: &mut TestRunner,
) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let (cfg, data, model, state) = trainer_instance(seed, 0.7);
            let eps = cfg.logit_eps;
            let zs = state.z2.cols_range(data.n_unsupervised(), data.len());
            let cases = [
                (
                    WeightBlock::W1p,
                    model.w1p().clone(),
                    data.x().clone(),
                    state.z1.clone(),
                ),
                (
                    WeightBlock::W2p,
                    model.w2p().clone(),
                    lcae_core::numkit::logit(&state.z1.sub(&state.b1).unwrap(), eps),
                    state.z2.clone(),
                ),
                (
                    WeightBlock::W2,
                    model.w2().clone(),
                    lcae_core::numkit::logit(&state.z2.sub(&state.b2).unwrap(), eps),
                    state.z.clone(),
                ),
                (
                    WeightBlock::W1,
                    model.w1().clone(),
                    lcae_core::numkit::logit(&state.z.sub(&state.b).unwrap(), eps),
                    data.x_tilde_bias().clone(),
                ),
                (
                    WeightBlock::D,
                    model.d().clone(),
                    data.targets().clone(),
                    zs,
                ),
            ];
            for (which, old, y, z) in cases {
                let new = solve_weight_block(which, &state, &model, &data, &cfg).unwrap();
                let value = |w: &Mat| {
                    y.sub(&w.matmul(&z).unwrap()).unwrap().norm_sq() + cfg.ridge * w.norm_sq()
                };
                prop_assert!(no_increase(value(&old), value(&new)), "{:?}", which);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn z2_label_block_vanishes_with_zero_lambda(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let (cfg, data, model, state) = trainer_instance(seed, 0.0);
            let z2 = solve_z2(&state, &model, &data, &cfg).unwrap();
            let unsup = TrainData::new(
                data.x_tilde().clone(),
                data.x().clone(),
                Mat::zeros(2, 0),
                0,
            )
            .unwrap();
            let z2u = solve_z2(&state, &model, &unsup, &cfg).unwrap();
            prop_assert!(z2.sub(&z2u).unwrap().max_abs() < 1e-10);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn objective_invariant_under_partition_preserving_permutation(
    runner: &mut TestRunner,
) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let (cfg, data, model, state) = trainer_instance(seed, 0.7);
            let (nu, n) = (data.n_unsupervised(), data.len());
            let mut rng = SeededRng::new(seed ^ 9);
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..nu).rev() {
                order.swap(i, rng.below(i as u64 + 1) as usize);
            }
            for i in (nu + 1..n).rev() {
                order.swap(i, nu + rng.below((i - nu) as u64 + 1) as usize);
            }
            let sup_order: Vec<usize> = order[nu..].iter().map(|&i| i - nu).collect();
            let pdata = TrainData::new(
                data.x_tilde().select_cols(&order),
                data.x().select_cols(&order),
                data.targets().select_cols(&sup_order),
                data.n_supervised(),
            )
            .unwrap();
            let p = |m: &Mat| m.select_cols(&order);
            let pstate = TrainState {
                z: p(&state.z),
                z1: p(&state.z1),
                z2: p(&state.z2),
                b: p(&state.b),
                b1: p(&state.b1),
                b2: p(&state.b2),
                objective_history: Vec::new(),
            };
            let a = objective(&state, &model, &data, &cfg).unwrap();
            let b = objective(&pstate, &model, &pdata, &cfg).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn train_is_bitwise_reproducible(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(),), |(seed,)| {
            let (mut cfg, data, _, _) = trainer_instance(seed, 0.5);
            cfg.max_sweeps = 2;
            let a = train(&cfg, &data).unwrap();
            let b = train(&cfg, &data).unwrap();
            prop_assert_eq!(a.model, b.model);
            prop_assert_eq!(a.state.objective_history, b.state.objective_history);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// signal

pub fn assemble_preserves_window_label_pairs(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..8, 1usize..15),
            |(seed, n, count)| {
                let mut rng = SeededRng::new(seed);
                let x = random_mat(&mut rng, n, count);
                let labels: Vec<i64> = (0..count).map(|_| rng.below(4) as i64 - 1).collect();
                let ids = (0..count).map(|i| format!("r{i}")).collect();
                let ws = WindowSet::new(x.clone(), labels.clone(), 100.0, ids).unwrap();
                let ds =
                    assemble(&ws, &SensingMatrix::identity(n), &NormStats::identity(n), 3).unwrap();
                prop_assert_eq!(ds.x.shape(), ds.x_tilde.shape());
                let mut before: Vec<(Vec<u64>, i64)> = (0..count)
                    .map(|c| (x.col(c).iter().map(|v| v.to_bits()).collect(), labels[c]))
                    .collect();
                let mut after: Vec<(Vec<u64>, i64)> = (0..count)
                    .map(|c| {
                        (
                            ds.x.col(c).iter().map(|v| v.to_bits()).collect(),
                            ds.labels[c],
                        )
                    })
                    .collect();
                before.sort();
                after.sort();
                prop_assert_eq!(before, after);
                let nu = ds.n_unsupervised();
                prop_assert!(
                    ds.labels[..nu].iter().all(|&l| l < 0)
                        && ds.labels[nu..].iter().all(|&l| l >= 0)
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn assemble_shapes_match_under_compression(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 2usize..12, 1usize..10),
            |(seed, n, count)| {
                let mut rng = SeededRng::new(seed);
                let x = random_mat(&mut rng, n, count);
                let ws = WindowSet::new(x.clone(), vec![0; count], 1.0, vec![String::new(); count])
                    .unwrap();
                let phi = SensingMatrix::generate(1 + n / 2, n, 1, seed).unwrap();
                let ds = assemble(&ws, &phi, &NormStats::fit(&x).unwrap(), 1).unwrap();
                prop_assert_eq!(ds.x.shape(), ds.x_tilde.shape());
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn one_hot_columns_sum_to_one(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(proptest::collection::vec(0usize..5, 0..20),),
            |(labels,)| {
                let t = one_hot(&labels, 5).unwrap();
                for (c, &l) in labels.iter().enumerate() {
                    prop_assert_eq!(t.col(c).iter().sum::<f64>(), 1.0);
                    prop_assert_eq!(t.get(l, c), 1.0);
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn normalizer_round_trip_and_moments(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(
                any::<u64>(),
                1usize..8,
                2usize..20,
                -50.0f64..50.0,
                0.1f64..20.0,
            ),
            |(seed, n, count, offset, spread)| {
                let mut rng = SeededRng::new(seed);
                let x = random_mat(&mut rng, n, count).map(|v| offset + spread * v);
                let st = NormStats::fit(&x).unwrap();
                let z = st.apply(&x).unwrap();
                let back = st.invert(&z).unwrap();
                prop_assert!(back.sub(&x).unwrap().max_abs() < 1e-12 * (1.0 + x.max_abs()));
                for r in 0..n {
                    let row = z.row(r);
                    let mean = row.iter().sum::<f64>() / count as f64;
                    let var =
                        row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
                    prop_assert!(mean.abs() < 1e-10);
                    prop_assert!((var.sqrt() - 1.0).abs() < 1e-10);
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

// metrics

pub fn nmse_permutation_invariant(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(any::<u64>(), 1usize..8, 1usize..10),
            |(seed, n, count)| {
                let mut rng = SeededRng::new(seed);
                let t = random_mat(&mut rng, n, count);
                let r = random_mat(&mut rng, n, count);
                let mut order: Vec<usize> = (0..count).collect();
                for i in (1..count).rev() {
                    order.swap(i, rng.below(i as u64 + 1) as usize);
                }
                let a = nmse(&t, &r).unwrap();
                let b = nmse(&t.select_cols(&order), &r.select_cols(&order)).unwrap();
                prop_assert!((a.mean - b.mean).abs() < 1e-12);
                let expect: Vec<f64> = order.iter().map(|&i| a.per_column[i]).collect();
                prop_assert_eq!(b.per_column, expect);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}

pub fn nmse_of_perturbation_is_relative_error(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(&(any::<u64>(), 1usize..10), |(seed, n)| {
            let mut rng = SeededRng::new(seed);
            let x = random_mat(&mut rng, n, 1);
            let e = random_mat(&mut rng, n, 1).scale(0.3);
            let got = nmse(&x, &x.add(&e).unwrap()).unwrap().mean;
            let want = (e.norm_sq() / x.norm_sq()).sqrt();
            prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want));
            Ok(())
        })
        .map_err(|e| e.to_string())
}

pub fn accuracy_is_trace_over_total(runner: &mut TestRunner) -> Result<(), String> {
    runner
        .run(
            &(proptest::collection::vec((0usize..4, 0usize..4), 1..50),),
            |(pairs,)| {
                let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
                let conf = Confusion::from_predictions(&t, &p, 4).unwrap();
                let m = class_metrics(&conf).unwrap();
                let tp: u64 = (0..4).map(|k| conf.get(k, k)).sum();
                prop_assert_eq!(m.accuracy, tp as f64 / pairs.len() as f64);
                prop_assert_eq!(conf.total(), pairs.len() as u64);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())
}
