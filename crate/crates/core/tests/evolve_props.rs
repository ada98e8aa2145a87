use eulerlab_core::burgers::BurgersRef;
use eulerlab_core::coupling::PhysParams;
use eulerlab_core::evolve::{
    bb_rhs, build_initial, horizon_guard, integrate, rk4_step_with_factor, GuardSignal, InitialData, MakinoState,
    Model, Profile, RunConfig, StopReason, VelocityKind, GUARD_THRESHOLD,
};
use eulerlab_core::spectral::{Grid, ScalarField, VectorField};
use proptest::prelude::*;

fn constant_state(g: &Grid, t: f64, rho: f64, w: [f64; 3]) -> MakinoState {
    let comps = (0..g.dim()).map(|j| ScalarField::constant(g, w[j]).unwrap()).collect();
    MakinoState::new(t, ScalarField::constant(g, rho).unwrap(), VectorField::new(comps).unwrap()).unwrap()
}

fn cfg_1d(n: usize, length: f64, gamma: f64, t_end: f64) -> RunConfig {
    RunConfig {
        grid: Grid::new(1, n, length).unwrap(),
        params: PhysParams::euler(gamma).unwrap(),
        reference: BurgersRef::identity(1),
        sobolev_index: 2.6,
        t_end,
        step: Default::default(),
        output_dt: 0.5,
        sigmas: vec![0.0, 1.0],
        delta: 1e-2,
        initial: InitialData {
            velocity: VelocityKind::Gradient,
            ..InitialData::default()
        },
        allow_unsafe: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // For constant (rho, w) around v = x/(1+t): d rho/dt = -h rho d/(1+t), d w/dt = -w/(1+t).
    #[test]
    fn constant_state_rhs(d in 1usize..=3, t in 0.0f64..20.0, c in -1.0f64..1.0, w in prop::array::uniform3(-1.0f64..1.0), gamma in 1.1f64..3.0) {
        let g = Grid::new(d, 8, 5.0).unwrap();
        let mut m = Model::new(&g, PhysParams::euler(gamma).unwrap(), BurgersRef::identity(d), false).unwrap();
        let (drho, dw) = bb_rhs(&constant_state(&g, t, c, w), &mut m).unwrap();
        let h = 0.5 * (gamma - 1.0);
        let want = -h * c * d as f64 / (1.0 + t);
        prop_assert!(drho.samples().iter().all(|x| (x - want).abs() <= 1e-13));
        for j in 0..d {
            let want = -w[j] / (1.0 + t);
            prop_assert!(dw.component(j).samples().iter().all(|x| (x - want).abs() <= 1e-13));
        }
    }
}

// rho = c (1+t)^{-h d} with w = 0 is exact for constant data; RK4 must converge at fourth order.
#[test]
fn rk4_order_on_constant_density() {
    let g = Grid::new(1, 8, 4.0).unwrap();
    let gamma = 5.0 / 3.0;
    let err = |steps: usize| {
        let mut m = Model::new(&g, PhysParams::euler(gamma).unwrap(), BurgersRef::identity(1), false).unwrap();
        let dt = 2.0 / steps as f64;
        let mut s = constant_state(&g, 0.0, 0.1, [0.0; 3]);
        for _ in 0..steps {
            // large factor: the state is spatially constant, so the Courant limit is moot
            s = rk4_step_with_factor(&s, dt, &mut m, 1e3).unwrap();
        }
        assert_eq!(s.w.max_magnitude(), 0.0);
        (s.rho.samples()[5] - 0.1 * 3f64.powf(-(gamma - 1.0) / 2.0)).abs()
    };
    let e: Vec<f64> = [2, 4, 8, 16].iter().map(|&n| err(n)).collect();
    for k in 0..3 {
        let order = (e[k] / e[k + 1]).log2();
        assert!((3.6..4.4).contains(&order), "errors {e:?}");
    }
}

// RK4 reproduces w = w0/(1+t) to rounding.
#[test]
fn constant_velocity_decays_as_inverse_time() {
    let g = Grid::new(2, 8, 4.0).unwrap();
    let mut m = Model::new(&g, PhysParams::euler(2.0).unwrap(), BurgersRef::identity(2), false).unwrap();
    let mut s = constant_state(&g, 0.0, 0.0, [0.3, -0.7, 0.0]);
    for _ in 0..8 {
        s = rk4_step_with_factor(&s, 0.25, &mut m, 1e3).unwrap();
    }
    assert_eq!(s.rho.max_abs(), 0.0);
    assert!((s.w.component(0).samples()[5] - 0.1).abs() < 1e-15);
    assert!((s.w.component(1).samples()[5] + 0.7 / 3.0).abs() < 1e-15);
}

// Even rho and odd w stay even and odd under an odd reference flow. The unpaired point
// x = -L/2, where v is not odd, must see no data: the box is wide and the Gaussian
// resolved well past the dealiasing radius, so no truncation ringing reaches it.
#[test]
fn parity_is_preserved() {
    let cfg = cfg_1d(384, 60.0, 2.0, 1.5);
    let tr = integrate(&cfg).unwrap();
    assert_eq!(tr.stop, StopReason::Completed);
    let s = &tr.final_state;
    let n = cfg.grid.len();
    let (r, w) = (s.rho.samples(), s.w.component(0).samples());
    let defect = |f: &[f64], sign: f64| {
        let d: f64 = (1..n).map(|j| (f[j] - sign * f[n - j]).powi(2)).sum();
        let m: f64 = f.iter().map(|x| x * x).sum();
        (d / m).sqrt()
    };
    assert!(defect(r, 1.0) <= 1e-12, "{}", defect(r, 1.0));
    assert!(defect(w, -1.0) <= 1e-12, "{}", defect(w, -1.0));
}

#[test]
fn runs_are_bitwise_reproducible() {
    let cfg = cfg_1d(128, 40.0, 5.0 / 3.0, 2.0);
    let (a, b) = (integrate(&cfg).unwrap(), integrate(&cfg).unwrap());
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.rho.samples(), b.final_state.rho.samples());
}

// A Gaussian of width r is carried by v = x/(1+t); its level set at the guard threshold
// starts near r sqrt(2 ln(1/threshold)) and reaches the band |x| >= 0.9 L/2 at about
// t = 0.9 L / (2 r0) - 1.
#[test]
fn guard_fires_when_support_reaches_the_edge() {
    let width = 1.5;
    let mut cfg = cfg_1d(512, 120.0, 2.0, 20.0);
    cfg.initial.profile = Profile::Gaussian { width };
    let tr = integrate(&cfg).unwrap();
    let r0 = width * (2.0 * (1.0 / GUARD_THRESHOLD).ln()).sqrt();
    let predicted = 0.9 * cfg.grid.length() / (2.0 * r0) - 1.0;
    match tr.stop {
        StopReason::HorizonGuard { t } => {
            assert!((t - predicted).abs() <= 0.2 * predicted, "guard at {t}, predicted {predicted}")
        }
        other => panic!("expected the guard, got {other:?}"),
    }
}

#[test]
fn guard_on_handmade_states() {
    let g = Grid::new(1, 100, 10.0).unwrap();
    let inside = ScalarField::from_fn(&g, |x| if x[0].abs() < 4.0 { 1.0 } else { 0.0 }).unwrap();
    let at_edge = ScalarField::from_fn(&g, |x| if x[0].abs() > 4.6 { 1.0 } else { 0.0 }).unwrap();
    let w = VectorField::zeros(&g);
    let s = |r: ScalarField| MakinoState::new(0.0, r, w.clone()).unwrap();
    assert_eq!(horizon_guard(&s(inside), GUARD_THRESHOLD), GuardSignal::Ok);
    assert_eq!(horizon_guard(&s(at_edge), GUARD_THRESHOLD), GuardSignal::SupportNearBoundary);
}

// gamma = 5/3 over ten time units: the conserved mass drifts by less than 1e-6.
#[test]
fn mass_conserved_over_long_run() {
    let mut cfg = cfg_1d(1024, 240.0, 5.0 / 3.0, 10.0);
    cfg.initial.profile = Profile::Gaussian { width: 1.5 };
    let tr = integrate(&cfg).unwrap();
    assert_eq!(tr.stop, StopReason::Completed);
    let m0 = tr.records[0].mass;
    assert!(m0 > 0.0);
    for r in &tr.records {
        assert!((r.mass - m0).abs() <= 1e-6 * m0, "t={} mass {} vs {}", r.t, r.mass, m0);
    }
}

#[test]
fn initial_data_is_band_limited_and_scaled() {
    let g = Grid::new(1, 64, 20.0).unwrap();
    let s = build_initial(&g, &InitialData::default(), 2.6, 0.0).unwrap();
    assert_eq!(s.rho.max_abs(), 0.0);
    let s = build_initial(&g, &InitialData::default(), 2.6, 1e-2).unwrap();
    let radius = g.dealias_radius();
    let top = s.rho.spectrum().iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (k, z) in s.rho.spectrum().iter().enumerate() {
        if g.xi_sq()[k].sqrt() > radius {
            assert!(z.norm() <= 1e-15 * top);
        }
    }
}
