//! Invariants over randomly drawn inputs.

use bubble_tower::cli::fit_slope;
use bubble_tower::linalg::{tridiagonal_apply, TridiagonalLu};
use bubble_tower::profiles::{
    bubble_w, EmdenFowler, ModelParams, PotentialSpec, Profile, Profile1D, RadialFunction, Regime,
};
use bubble_tower::quadrature::energy_constants;
use bubble_tower::reduced_model::{
    amplitudes, critical_lambda, grad_psi_k, lambda_from_spikes, psi_k, spike_locations,
};
use proptest::prelude::*;

fn regime() -> impl Strategy<Value = Regime> {
    prop_oneof![Just(Regime::Sub), Just(Regime::Super)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_is_even_and_solves_its_ode(n in 3u32..8, x in -12.0f64..12.0) {
        let u = Profile::new(n).unwrap();
        let beta = (2.0 / (n as f64 - 2.0)).powi(2);
        let p_star = (n as f64 + 2.0) / (n as f64 - 2.0);
        prop_assert!((u.u(x) - u.u(-x)).abs() <= 1e-15 * u.u(x));
        prop_assert!((u.du(x) + u.du(-x)).abs() <= 1e-15 * u.u(x));
        let res = u.d2u(x) - u.u(x) + beta * u.u(x).powf(p_star);
        prop_assert!(res.abs() <= 1e-13 * u.u(x), "{}", res);
    }

    #[test]
    fn profile_derivatives_match_differences(n in 3u32..7, x in -8.0f64..8.0) {
        let u = Profile::new(n).unwrap();
        let h = 1e-4;
        let d1 = (u.u(x + h) - u.u(x - h)) / (2.0 * h);
        let d2 = (u.du(x + h) - u.du(x - h)) / (2.0 * h);
        prop_assert!((d1 - u.du(x)).abs() < 1e-7 * u.u(0.0));
        prop_assert!((d2 - u.d2u(x)).abs() < 1e-7 * u.u(0.0));
    }

    #[test]
    fn transform_round_trips(n in 3u32..7, reg in regime(), r in 1e-4f64..1e4, x in -10.0f64..10.0) {
        let ef = EmdenFowler::new(n, reg).unwrap();
        prop_assert!((ef.radius(ef.line_coordinate(r)) / r - 1.0).abs() < 1e-12);
        prop_assert!((ef.line_coordinate(ef.radius(x)) - x).abs() < 1e-12);
        let u = RadialFunction::new(|r: f64| 1.0 / (1.0 + r * r), 2.0);
        let back = ef.inverse(&ef.forward(&u));
        prop_assert!((back.eval(r) - u.eval(r)).abs() < 1e-12 * u.eval(r));
    }

    #[test]
    fn bubble_scaling_becomes_translation(n in 3u32..7, reg in regime(), lambda in 0.05f64..20.0, x in -6.0f64..6.0) {
        let ef = EmdenFowler::new(n, reg).unwrap();
        let w = |l: f64| RadialFunction::new(move |r: f64| bubble_w(l, &[0.0], &[r], n).unwrap(), n as f64 - 2.0);
        let scaled = ef.forward(&w(lambda)).eval(x);
        let base = ef.forward(&w(1.0)).eval(x - ef.line_coordinate(lambda));
        prop_assert!((scaled - base).abs() < 1e-12 * base.max(1e-300));
        // the image of the unit bubble is the profile itself
        let u = Profile::new(n).unwrap();
        prop_assert!((ef.forward(&w(1.0)).eval(x) - u.u(x)).abs() < 1e-12 * u.u(x));
    }

    #[test]
    fn spikes_and_parameters_are_inverse(k in 1usize..6, eps in 1e-4f64..1e-2, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..5.0)).collect();
        let p = ModelParams::new(3, 4.0, eps, k, Regime::Sub, PotentialSpec::constant(-1.0)).unwrap();
        let xi = spike_locations(&lambda, eps, &p).unwrap();
        let back = lambda_from_spikes(&xi, eps, &p).unwrap();
        for (a, b) in lambda.iter().zip(&back) {
            prop_assert!((a / b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitudes_invert_the_running_products(k in 1usize..6, reg in regime(), v in -5.0f64..-0.1) {
        let q = if reg == Regime::Sub { 4.0 } else { 7.0 };
        let c = energy_constants(3, q).unwrap();
        let p = ModelParams::new(3, q, 0.01, k, reg, PotentialSpec::constant(v)).unwrap();
        let star = critical_lambda(&c, &p).unwrap();
        let alpha = amplitudes(&star, &c, &p).unwrap();
        let mut prod = 1.0;
        for (a, l) in alpha.iter().zip(&star) {
            prod *= l;
            prop_assert!((a * prod - 1.0).abs() < 1e-12, "{}", a * prod);
        }
    }

    #[test]
    fn psi_gradient_matches_differences(k in 1usize..5, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = energy_constants(3, 4.0).unwrap();
        let p = ModelParams::new(3, 4.0, 0.01, k, Regime::Sub, PotentialSpec::constant(-1.0)).unwrap();
        let l: Vec<f64> = (0..k).map(|_| rng.gen_range(0.3..3.0)).collect();
        let g = grad_psi_k(&l, &c, &p).unwrap();
        for i in 0..k {
            let h = 1e-6;
            let (mut up, mut dn) = (l.clone(), l.clone());
            up[i] += h;
            dn[i] -= h;
            let fd = (psi_k(&up, &c, &p).unwrap() - psi_k(&dn, &c, &p).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn tridiagonal_solve_inverts_apply(n in 3usize..60, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |m: usize| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let (lo, up) = (draw(n - 1), draw(n - 1));
        let diag: Vec<f64> = draw(n).iter().map(|d| d + 3.0f64.copysign(*d)).collect();
        let x = draw(n);
        let b = tridiagonal_apply(&lo, &diag, &up, &x);
        let y = TridiagonalLu::factor(&lo, &diag, &up).unwrap().solve(&b);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn slope_of_a_power_law_is_its_exponent(e in -3.0f64..3.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = [1e-3f64, 3e-3, 1e-2, 3e-2].iter().map(|x| (*x, c * x.powf(e))).collect();
        prop_assert!((fit_slope(&pts).unwrap() - e).abs() < 1e-10);
    }
}

#[test]
fn slope_needs_two_positive_points() {
    assert!(fit_slope(&[(1.0, 1.0)]).is_none());
    assert!(fit_slope(&[(1.0, 1.0), (2.0, -1.0)]).is_none());
    assert!(fit_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
}
