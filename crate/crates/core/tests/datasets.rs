use hyco_core::coefficients::{DARCY_TRUTH, HELMHOLTZ_TRUTH};
use hyco_core::experiments::{generate_dataset, prepare, preset};
use hyco_core::grid::Rect;
use hyco_core::hyco::loss_phy;
use hyco_core::solvers::{simulate_heat, solve_darcy, solve_helmholtz, SolverConfig};

#[test]
fn static_sensors_match_an_independent_solve() {
    let s = preset("helmholtz_desk").unwrap().scenario;
    let d = generate_dataset(&s, 11).unwrap();
    assert_eq!(d.len(), 25);
    let cfg = SolverConfig::stationary(s.domain.with_resolution(s.reference_n, s.reference_n));
    let u = solve_helmholtz(&HELMHOLTZ_TRUTH, &cfg).unwrap();
    for (p, v) in d.points.iter().zip(&d.values) {
        assert!(s.region.contains(p.x, p.y));
        assert!((u.sample_space(p.x, p.y).unwrap()[0] - v).abs() <= 1e-12);
    }

    let s = preset("darcy_desk").unwrap().scenario;
    let d = generate_dataset(&s, 2).unwrap();
    let cfg = SolverConfig::stationary(s.domain.with_resolution(s.reference_n, s.reference_n));
    let u = solve_darcy(&DARCY_TRUTH, &cfg).unwrap();
    for (p, v) in d.points.iter().zip(&d.values) {
        assert!((u.sample_space(p.x, p.y).unwrap()[0] - v).abs() <= 1e-12);
    }
}

#[test]
fn mobile_sensors_sit_on_stored_frames() {
    let s = preset("heat_q2_desk").unwrap().scenario;
    let d = generate_dataset(&s, 5).unwrap();
    assert_eq!(d.len(), s.slices * s.sensors);
    let u = simulate_heat(
        &hyco_core::coefficients::TwoBumpParams::from_slice(&s.truth),
        &s.solver_config(),
    )
    .unwrap();
    for (p, v) in d.points.iter().zip(&d.values) {
        let k = u.nearest_frame(p.t);
        assert_eq!(u.frame_time(k), p.t);
        assert!(s.region.contains(p.x, p.y));
        assert!((u.sample_spacetime(p.x, p.y, p.t).unwrap()[0] - v).abs() <= 1e-12);
    }
}

#[test]
fn generation_is_deterministic_per_seed() {
    let s = preset("heat_desk").unwrap().scenario;
    assert_eq!(
        generate_dataset(&s, 3).unwrap(),
        generate_dataset(&s, 3).unwrap()
    );
    assert_ne!(
        generate_dataset(&s, 3).unwrap().points,
        generate_dataset(&s, 4).unwrap().points
    );
}

#[test]
fn degenerate_region_puts_every_sensor_on_one_point() {
    let mut s = preset("helmholtz_desk").unwrap().scenario;
    s.region = Rect::new((0.5, 0.5), (1.0, 1.0));
    let d = generate_dataset(&s, 0).unwrap();
    assert!(d.points.iter().all(|p| p.x == 0.5 && p.y == 1.0));
    assert!(d.values.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn truth_fits_data_generated_on_the_model_grid() {
    for name in ["helmholtz_desk", "darcy_desk", "helmholtz_q2_desk"] {
        let mut s = preset(name).unwrap().scenario;
        s.reference_n = s.domain.nx;
        let prep = prepare(&s).unwrap();
        let l = loss_phy(&s, &s.truth, &prep.dataset).unwrap();
        assert!(l < 1e-6, "{name}: {l}");
    }
}

#[test]
fn noisy_presets_perturb_multiplicatively() {
    let clean = prepare(&preset("darcy_desk").unwrap().scenario)
        .unwrap()
        .dataset;
    let noisy = prepare(&preset("darcy_n20_desk").unwrap().scenario)
        .unwrap()
        .dataset;
    assert_eq!(clean.points, noisy.points);
    assert_eq!(noisy.provenance.noise, 0.2);
    for (n, c) in noisy.values.iter().zip(&clean.values) {
        let r = n / c;
        assert!((1.0..=1.2 + 1e-12).contains(&r), "{r}");
    }
}
