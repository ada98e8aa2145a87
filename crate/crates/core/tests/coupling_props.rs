use eulerlab_core::coupling::{potential, potential_gradient, potential_gradient_spectra, PhysParams};
use eulerlab_core::diagnostics::ineq::random_band_limited;
use eulerlab_core::spectral::{spectral_grad, spectral_laplacian, Grid, ScalarField};
use eulerlab_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(d: usize) -> Grid {
    match d {
        1 => Grid::new(1, 64, 9.0),
        2 => Grid::new(2, 32, 9.0),
        _ => Grid::new(3, 16, 9.0),
    }
    .unwrap()
}

// strictly positive density around 1
fn density(g: &Grid, seed: u64) -> ScalarField {
    let f = random_band_limited(g, 3, 1.0, seed).unwrap();
    let m = f.max_abs();
    f.map(|x| 1.0 + 0.4 * x / m).unwrap()
}

fn helmholtz(gamma: f64, kappa: f64, mu: f64) -> PhysParams {
    PhysParams::new(gamma, 1.0, kappa, mu, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_map_is_linear(d in 2usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid(d);
        let p = helmholtz(2.0, 1.0, 0.7);
        let f = random_band_limited(&g, 3, 1.0, s1).unwrap();
        let h = random_band_limited(&g, 3, 1.0, s2).unwrap();
        let comb: Vec<Complex64> = f.spectrum().iter().zip(h.spectrum()).map(|(x, y)| x * a + y * b).collect();
        let lhs = potential_gradient_spectra(&g, &comb, &p);
        let gf = potential_gradient_spectra(&g, f.spectrum(), &p);
        let gh = potential_gradient_spectra(&g, h.spectrum(), &p);
        let scale = gf.iter().chain(&gh).flatten().map(|z| z.norm()).fold(0.0, f64::max) * (a.abs() + b.abs());
        for j in 0..d {
            for k in 0..g.len() {
                let rhs = gf[j][k] * a + gh[j][k] * b;
                prop_assert!((lhs[j][k] - rhs).norm() <= 1e-12 * scale.max(1e-300));
            }
        }
    }

    // (Delta - mu^2) phi = G~ J rho^{2/(gamma-1)}, and grad phi agrees with the direct solve.
    #[test]
    fn helmholtz_residual(d in 2usize..=3, seed in any::<u64>(), gamma in 1.2f64..3.0, mu in 0.3f64..2.0, kappa in prop::sample::select(vec![-1.0, 1.0])) {
        let g = grid(d);
        let p = helmholtz(gamma, kappa, mu);
        let rho = density(&g, seed);
        let phi = potential(&rho, &p, false).unwrap();
        let solve = potential_gradient(&rho, &p, false).unwrap();
        let lhs = spectral_laplacian(&phi).unwrap().sub(&phi.scale(mu * mu).unwrap()).unwrap();
        let rhs = solve.source.field.scale(p.g_tilde()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * rhs.max_abs());
        let direct = spectral_grad(&phi).unwrap();
        for j in 0..d {
            let gap = direct.component(j).sub(solve.grad_phi.component(j)).unwrap().max_abs();
            prop_assert!(gap <= 1e-12 * (1.0 + solve.grad_phi.max_magnitude()));
        }
        let bound = p.g_tilde() / (2.0 * mu) * solve.source.field.l2_norm();
        prop_assert!(solve.grad_phi.l2_norm() <= bound * (1.0 + 1e-12));
    }

    // Poisson drops the mean of the source; the gradient has zero mean.
    #[test]
    fn poisson_zero_mode(seed in any::<u64>(), gamma in 1.2f64..2.5) {
        let g = grid(3);
        let p = helmholtz(gamma, 1.0, 0.0);
        let rho = density(&g, seed);
        let solve = potential_gradient(&rho, &p, false).unwrap();
        let src = &solve.source.field;
        let mean = src.integral() / g.volume();
        prop_assert!((solve.discarded_mean - mean).abs() <= 1e-12 * mean.abs());
        for j in 0..3 {
            let c = solve.grad_phi.component(j);
            prop_assert!(c.integral().abs() <= 1e-12 * (1.0 + c.max_abs()) * g.volume());
        }
        let phi = potential(&rho, &p, false).unwrap();
        let centred = src.map(|x| x - mean).unwrap().scale(p.g_tilde()).unwrap();
        let lap = spectral_laplacian(&phi).unwrap();
        prop_assert!(lap.sub(&centred).unwrap().max_abs() <= 1e-10 * centred.max_abs());
    }
}

// With gamma = 3 the source is rho itself, so one cosine mode has a closed form.
#[test]
fn single_mode_closed_form() {
    let g = Grid::new(2, 32, 2.0 * std::f64::consts::PI).unwrap();
    let (mu, c) = (1.5, 0.5);
    let p = helmholtz(3.0, -1.0, mu);
    let rho = ScalarField::from_fn(&g, |x| 1.0 + c * (2.0 * x[0]).cos()).unwrap();
    let phi = potential(&rho, &p, false).unwrap();
    let gt = p.g_tilde();
    for (i, x) in g.points().enumerate() {
        let exact = -gt * (1.0 / (mu * mu) + c * (2.0 * x[0]).cos() / (4.0 + mu * mu));
        assert!((phi.samples()[i] - exact).abs() < 1e-13 * gt.abs().max(1.0));
    }
}

#[test]
fn dimension_gates() {
    let p = helmholtz(2.0, 1.0, 0.0);
    for d in [1, 2] {
        let rho = density(&grid(d), 7);
        match potential_gradient(&rho, &p, false) {
            Err(Error::Dimension(m)) => assert_eq!(m, "Poisson requires d≥3"),
            other => panic!("expected a dimension error, got {other:?}"),
        }
    }
    let h = helmholtz(2.0, 1.0, 1.0);
    assert!(matches!(potential_gradient(&density(&grid(1), 7), &h, false), Err(Error::Dimension(_))));
    assert!(potential_gradient(&density(&grid(2), 7), &h, false).is_ok());
    assert!(potential_gradient(&density(&grid(1), 7), &p, true).is_ok());
}

#[test]
fn pure_euler_has_no_force() {
    let rho = density(&grid(3), 1);
    let s = potential_gradient(&rho, &PhysParams::euler(1.4).unwrap(), false).unwrap();
    assert_eq!(s.grad_phi.max_magnitude(), 0.0);
}
