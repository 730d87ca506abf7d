mod common;

use common::*;
use hyco_core::baselines::fit_physics_only;
use hyco_core::experiments::{prepare, preset, Dataset, Preset};
use hyco_core::grid::Point;
use hyco_core::hyco::{
    loss_int, physical_grad_fd, train_hyco, GhostMode, Hyco, NoClock, PhysOptimizer, PhysicalModel,
    Timings, TrainConfig, UpdateOrder,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn short(name: &str, epochs: usize) -> Preset {
    let mut p = preset(name).unwrap();
    p.train.epochs = epochs;
    p.train.eval_every = 5;
    p
}

fn affine_data(model: &AffineModel, truth: [f64; 2], n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..n)
        .map(|_| Point::xy(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let values = model.solve(&truth).unwrap().sample_points(&pts).unwrap();
    dataset(pts, values, 1)
}

#[test]
fn reruns_are_bit_identical() {
    let p = short("helmholtz_desk", 12);
    let s = &p.scenario;
    let prep = prepare(s).unwrap();
    let run = || {
        let syn = s.synthetic(&s.network, p.train.seed);
        train_hyco(
            s,
            &prep.dataset,
            &p.train,
            &s.init,
            syn,
            Some(&prep.reference),
            &NoClock,
        )
        .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.history.len(), 12);
}

#[test]
fn physics_only_is_degenerate_hyco() {
    let p = short("helmholtz_desk", 15);
    let s = &p.scenario;
    let prep = prepare(s).unwrap();
    let mut cfg = p.train.clone();
    cfg.interaction_weight = 0.0;
    cfg.train_synthetic = false;
    let syn = s.synthetic(&s.network, cfg.seed);
    let hy = train_hyco(s, &prep.dataset, &cfg, &s.init, syn, None, &NoClock).unwrap();
    let po = fit_physics_only(s, &prep.dataset, &cfg, &s.init, None, &NoClock).unwrap();
    assert_eq!(hy.history.len(), po.history.len());
    for (h, q) in hy.history.iter().zip(&po.history) {
        assert_eq!(h.lambda, q.lambda, "epoch {}", h.epoch);
    }
    assert_eq!(hy.lambda, po.lambda);
}

#[test]
fn beta_zero_gradient_is_interaction_gradient() {
    let model = AffineModel::new();
    let data = affine_data(&model, [1.0, -0.5], 20, 1);
    let cfg = TrainConfig {
        beta: 0.0,
        ghosts: 30,
        ..TrainConfig::default()
    };
    let engine = Hyco::new(&model, &data, &cfg);
    let state = engine.init(&[0.2, 0.4], tanh_net(&[5], 1, 2)).unwrap();
    let g = engine.lambda_gradient(&state).unwrap();
    let direct = physical_grad_fd(
        &state.lambda,
        &model.param_names(),
        cfg.fd_rel_step,
        false,
        |w| loss_int(&state.synthetic, &model, w, &state.ghosts),
    )
    .unwrap();
    for (a, b) in g.iter().zip(&direct) {
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
    }
}

#[test]
fn alpha_zero_without_data_distills_the_physical_model() {
    let model = AffineModel::new();
    let data = Dataset::empty(1);
    let cfg = TrainConfig {
        alpha: 0.0,
        train_physical: false,
        ghost_mode: GhostMode::Fixed,
        ghosts: 100,
        lr_syn: 1e-2,
        epochs: 300,
        ..TrainConfig::default()
    };
    let engine = Hyco::new(&model, &data, &cfg);
    let state = engine.init(&[0.8, -0.3], tanh_net(&[16], 1, 7)).unwrap();
    let before = loss_int(&state.synthetic, &model, &state.lambda, &state.ghosts).unwrap();
    let result = engine.run(state, &NoClock);
    assert!(result.aborted.is_none());
    let syn = result.synthetic.unwrap();
    let ghosts = hyco_core::hyco::GhostSet::draw(
        &model.bounds(),
        cfg.ghosts,
        GhostMode::Fixed,
        &mut ChaCha8Rng::seed_from_u64(99),
    );
    let after = loss_int(&syn, &model, &[0.8, -0.3], &ghosts).unwrap();
    assert!(after < 0.05 * before, "{before} -> {after}");
    assert_eq!(result.lambda.unwrap(), vec![0.8, -0.3]);
}

#[test]
fn jacobi_and_gauss_seidel_agree_to_first_order() {
    let p = short("helmholtz_desk", 1);
    let s = &p.scenario;
    let prep = prepare(s).unwrap();
    let mut deltas = Vec::new();
    for order in [UpdateOrder::GaussSeidel, UpdateOrder::Jacobi] {
        let cfg = TrainConfig {
            update_order: order,
            lr_phy: 1e-8,
            lr_syn: 1e-8,
            ..p.train.clone()
        };
        let engine = Hyco::new(s, &prep.dataset, &cfg);
        let mut state = engine.init(&s.init, s.synthetic(&s.network, 0)).unwrap();
        let (l0, t0) = (state.lambda.clone(), state.synthetic.theta.values.clone());
        engine
            .epoch(&mut state, &mut Timings::default(), &NoClock)
            .unwrap();
        let dl: Vec<f64> = state.lambda.iter().zip(&l0).map(|(a, b)| a - b).collect();
        let dt: Vec<f64> = state
            .synthetic
            .theta
            .values
            .iter()
            .zip(&t0)
            .map(|(a, b)| a - b)
            .collect();
        deltas.push((dl, dt));
    }
    let (gs, ja) = (&deltas[0], &deltas[1]);
    assert_eq!(gs.0, ja.0);
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = gs.1.iter().zip(&ja.1).map(|(a, b)| a - b).collect();
    assert!(norm(&ja.1) > 0.0);
    assert!(
        norm(&diff) <= 1e-4 * norm(&ja.1),
        "{} vs {}",
        norm(&diff),
        norm(&ja.1)
    );
}

#[test]
fn small_gradient_step_does_not_increase_l1_on_linear_problem() {
    let model = SourceModel::new(17);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<Point> = (0..25)
        .map(|_| Point::xy(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
        .collect();
    let values = model.solve(&[2.0]).unwrap().sample_points(&pts).unwrap();
    let data = dataset(pts, values, 1);
    let cfg = TrainConfig {
        phy_optimizer: PhysOptimizer::Gd,
        lr_phy: 1e-2,
        train_synthetic: false,
        ghost_mode: GhostMode::Fixed,
        ghosts: 50,
        ..TrainConfig::default()
    };
    let engine = Hyco::new(&model, &data, &cfg);
    let mut state = engine.init(&[0.5], tanh_net(&[8], 1, 1)).unwrap();
    let mut prev = engine
        .player_losses(&state.lambda, &state.synthetic, &state.ghosts.points)
        .unwrap()
        .0;
    for _ in 0..10 {
        engine
            .epoch(&mut state, &mut Timings::default(), &NoClock)
            .unwrap();
        let l1 = engine
            .player_losses(&state.lambda, &state.synthetic, &state.ghosts.points)
            .unwrap()
            .0;
        assert!(l1 <= prev, "{prev} -> {l1}");
        prev = l1;
    }
}

#[test]
fn theta_step_reduces_interaction_loss_from_random_init() {
    let p = preset("helmholtz_desk").unwrap();
    let s = &p.scenario;
    let prep = prepare(s).unwrap();
    let mut decreased = 0;
    for seed in 0..100 {
        let cfg = TrainConfig {
            alpha: 0.0,
            train_physical: false,
            ghost_mode: GhostMode::Fixed,
            seed,
            ..p.train.clone()
        };
        let engine = Hyco::new(s, &prep.dataset, &cfg);
        let mut state = engine.init(&s.init, s.synthetic(&s.network, seed)).unwrap();
        let before = loss_int(&state.synthetic, s, &state.lambda, &state.ghosts).unwrap();
        engine
            .epoch(&mut state, &mut Timings::default(), &NoClock)
            .unwrap();
        let after = loss_int(&state.synthetic, s, &state.lambda, &state.ghosts).unwrap();
        decreased += usize::from(after < before);
    }
    assert!(decreased >= 95, "{decreased}/100");
}

#[test]
fn nash_gap_vanishes_at_joint_minimizer() {
    let model = AffineModel::new();
    let truth = [1.0, -0.5];
    let data = affine_data(&model, truth, 30, 2);
    let cfg = TrainConfig {
        ghosts: 40,
        ..TrainConfig::default()
    };
    let engine = Hyco::new(&model, &data, &cfg);
    let state = engine.init(&truth, linear_net(truth)).unwrap();
    let (g1, g2) = engine.nash_gap(&state, 1e-3, 20).unwrap();
    assert!(g1 <= 1e-12 && g2 <= 1e-12, "{g1} {g2}");
}

#[test]
fn nash_gap_detects_displaced_parameter() {
    let model = AffineModel::new();
    let truth = [1.0, -0.5];
    let data = affine_data(&model, truth, 30, 2);
    let cfg = TrainConfig {
        ghosts: 40,
        ..TrainConfig::default()
    };
    let engine = Hyco::new(&model, &data, &cfg);
    let state = engine.init(&[1.1, -0.5], linear_net(truth)).unwrap();
    let (g1, g2) = engine.nash_gap(&state, 1e-2, 20).unwrap();
    assert!(g1 > 0.0, "{g1}");
    assert!(g2 >= 0.0);
}

#[test]
fn failure_aborts_with_last_good_state() {
    let model = AffineModel {
        fail_above: 1.0,
        ..AffineModel::new()
    };
    let data = affine_data(&model, [0.9, 0.0], 20, 3);
    let values: Vec<f64> = data.values.iter().map(|v| v * 3.0).collect();
    let data = dataset(data.points.clone(), values, 1);
    let cfg = TrainConfig {
        lr_phy: 2e-2,
        epochs: 100,
        ghosts: 20,
        ..TrainConfig::default()
    };
    let res = train_hyco(
        &model,
        &data,
        &cfg,
        &[0.9, 0.0],
        tanh_net(&[4], 1, 0),
        None,
        &NoClock,
    )
    .unwrap();
    assert!(res.aborted.is_some());
    assert!(res.history.len() < 100);
    let last = res.lambda.unwrap();
    assert!(last[0] <= 1.0);
    if let Some(rec) = res.history.last() {
        assert_eq!(rec.lambda, last);
    }
}

#[test]
fn history_length_matches_epochs_run() {
    let model = AffineModel::new();
    let data = affine_data(&model, [0.5, 0.5], 10, 5);
    let cfg = TrainConfig {
        epochs: 37,
        ghosts: 10,
        eval_every: 10,
        ..TrainConfig::default()
    };
    let res = train_hyco(
        &model,
        &data,
        &cfg,
        &[0.0, 0.0],
        tanh_net(&[4], 1, 0),
        None,
        &NoClock,
    )
    .unwrap();
    assert_eq!(res.history.len(), 37);
    assert_eq!(res.epochs_run(), 37);
    assert!(res
        .history
        .iter()
        .enumerate()
        .all(|(i, r)| r.epoch == i + 1));
    assert!(res
        .history
        .iter()
        .all(|r| r.l_syn.unwrap() >= 0.0 && r.l_phy.unwrap() >= 0.0 && r.l_int.unwrap() >= 0.0));
}

#[test]
fn stopping_rule_halts_a_converged_run() {
    let model = AffineModel::new();
    let truth = [0.5, 0.5];
    let data = affine_data(&model, truth, 10, 5);
    let cfg = TrainConfig {
        epochs: 1000,
        ghosts: 10,
        train_synthetic: false,
        interaction_weight: 0.0,
        ..TrainConfig::default()
    };
    let res = train_hyco(
        &model,
        &data,
        &cfg,
        &truth,
        linear_net(truth),
        None,
        &NoClock,
    )
    .unwrap();
    assert_eq!(res.stop_epoch, Some(cfg.stop_window));
    assert_eq!(res.history.len(), cfg.stop_window);
}
