use eulerlab_core::diagnostics::ineq::random_band_limited;
use eulerlab_core::spectral::{
    frac_lambda, friedrichs_project, homogeneous_seminorm, sobolev_norm, spectral_div, spectral_grad,
    spectral_laplacian, Grid, NormSpec, ScalarField, VectorField,
};
use proptest::prelude::*;

fn grid(d: usize) -> Grid {
    let n = match d {
        1 => 64,
        2 => 32,
        _ => 16,
    };
    Grid::new(d, n, 7.0).unwrap()
}

fn field(d: usize, seed: u64) -> ScalarField {
    random_band_limited(&grid(d), 3, 1.0, seed).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(d in 1usize..=3, seed in any::<u64>()) {
        let f = field(d, seed);
        let physical = (f.samples().iter().map(|x| x * x).sum::<f64>() * f.grid().cell_volume()).sqrt();
        let spectral = homogeneous_seminorm(&f, 0.0).unwrap();
        prop_assert!(close(physical, spectral, 1e-12));
        prop_assert!(close(f.l2_norm(), spectral, 1e-12));
    }

    #[test]
    fn lambda_composes(d in 1usize..=3, seed in any::<u64>(), s in 0.1f64..2.5, t in 0.1f64..2.5) {
        let f = field(d, seed);
        let a = frac_lambda(&frac_lambda(&f, s).unwrap(), t).unwrap();
        let b = frac_lambda(&f, s + t).unwrap();
        let err = a.sub(&b).unwrap().max_abs();
        prop_assert!(err <= 1e-10 * b.max_abs());
        // the field has zero mean, so Lambda^{-s} undoes Lambda^s
        let back = frac_lambda(&frac_lambda(&f, s).unwrap(), -s).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-11 * f.max_abs());
    }

    #[test]
    fn seminorm_is_l2_of_lambda(d in 1usize..=3, seed in any::<u64>(), s in 0.0f64..3.0) {
        let f = field(d, seed);
        let direct = homogeneous_seminorm(&f, s).unwrap();
        let via = frac_lambda(&f, s).unwrap().l2_norm();
        prop_assert!(close(direct, via, 1e-11));
    }

    #[test]
    fn friedrichs_is_a_monotone_orthogonal_projection(
        d in 1usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), r in 0.5f64..4.0, dr in 0.0f64..2.0
    ) {
        let (f, g) = (field(d, s1), field(d, s2));
        let jf = friedrichs_project(&f, r).unwrap();
        let jjf = friedrichs_project(&jf, r).unwrap();
        prop_assert!(jjf.sub(&jf).unwrap().max_abs() <= 1e-14 * f.max_abs().max(1.0));
        let jg = friedrichs_project(&g, r).unwrap();
        let lhs = jf.inner(&g).unwrap();
        let rhs = f.inner(&jg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (f.l2_norm() * g.l2_norm()));
        let wider = friedrichs_project(&f, r + dr).unwrap();
        for sigma in [0.0, 1.0, 2.0] {
            let a = homogeneous_seminorm(&jf, sigma).unwrap();
            let b = homogeneous_seminorm(&wider, sigma).unwrap();
            let c = homogeneous_seminorm(&f, sigma).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-12) && b <= c * (1.0 + 1e-12));
        }
    }

    #[test]
    fn interpolation_inequality(d in 1usize..=3, seed in any::<u64>(), s0 in 0.0f64..1.0, s1 in 1.0f64..3.0, th in 0.0f64..1.0) {
        let f = field(d, seed);
        let s = (1.0 - th) * s0 + th * s1;
        let mid = homogeneous_seminorm(&f, s).unwrap();
        let bound = homogeneous_seminorm(&f, s0).unwrap().powf(1.0 - th) * homogeneous_seminorm(&f, s1).unwrap().powf(th);
        prop_assert!(mid <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn div_grad_is_laplacian(d in 1usize..=3, seed in any::<u64>()) {
        let f = field(d, seed);
        let a = spectral_div(&spectral_grad(&f).unwrap()).unwrap();
        let b = spectral_laplacian(&f).unwrap();
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-11 * b.max_abs());
    }

    #[test]
    fn inhomogeneous_norm_dominates(d in 1usize..=3, seed in any::<u64>(), s in 0.0f64..3.0) {
        let f = field(d, seed);
        let v = VectorField::new(vec![f.clone(); d]).unwrap();
        let h = sobolev_norm(&v, NormSpec::inhomogeneous(s).unwrap()).unwrap();
        let hd = sobolev_norm(&v, NormSpec::homogeneous(s).unwrap()).unwrap();
        let l2 = sobolev_norm(&v, NormSpec::homogeneous(0.0).unwrap()).unwrap();
        prop_assert!(h * h >= (hd * hd + l2 * l2) * (1.0 - 1e-12) || s == 0.0);
        prop_assert!(close(l2, (d as f64).sqrt() * f.l2_norm(), 1e-12));
    }

    #[test]
    fn round_trip_through_samples(d in 1usize..=3, seed in any::<u64>()) {
        let f = field(d, seed);
        let again = ScalarField::from_samples(f.grid(), f.samples().to_vec()).unwrap();
        let back = ScalarField::from_spectrum(f.grid(), again.spectrum().to_vec()).unwrap();
        prop_assert!(back.sub(&f).unwrap().max_abs() <= 1e-12 * f.max_abs());
    }
}

#[test]
fn gaussian_norms_match_closed_form() {
    // |exp(-x^2/2)|_{L^2}^2 = sqrt(pi) and |.|_{\dot H^1}^2 = sqrt(pi)/2 on the line
    let g = Grid::new(1, 256, 40.0).unwrap();
    let f = ScalarField::from_fn(&g, |x| (-x[0] * x[0] / 2.0).exp()).unwrap();
    let pi = std::f64::consts::PI;
    assert!(close(homogeneous_seminorm(&f, 0.0).unwrap(), pi.sqrt().sqrt(), 1e-12));
    assert!(close(homogeneous_seminorm(&f, 1.0).unwrap(), (pi.sqrt() / 2.0).sqrt(), 1e-12));
}
