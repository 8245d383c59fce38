mod common;

use std::f64::consts::PI;

use common::{adaptive_simpson, grid, random_profile, rel, table};
use nnls_core::constants::{
    aubin_talenti, ball_principal_eigenvalue, bubble_quotient, discrete_principal_pair, gn_best_constant,
    ground_state, Tolerances,
};
use nnls_core::radial::{gn_quotient, RadialFunction};
use nnls_core::real::sphere_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ‖∇U‖₂²/‖U‖_{2*}² for U = (1+s²)^{-(N-2)/2}, with s = x/(1-x) mapping [0,1) onto [0,∞).
fn bubble_oracle(n: usize) -> f64 {
    let nn = n as f64;
    let crit = 2.0 * nn / (nn - 2.0);
    let sigma: f64 = sphere_area(n);
    let kin = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let s = x / (1.0 - x);
        let jac = 1.0 / (1.0 - x).powi(2);
        let du = (nn - 2.0) * s * (1.0 + s * s).powf(-nn / 2.0);
        du * du * s.powi(n as i32 - 1) * jac
    };
    let pow = |x: f64| {
        if x >= 1.0 {
            return 0.0;
        }
        let s = x / (1.0 - x);
        let jac = 1.0 / (1.0 - x).powi(2);
        (1.0 + s * s).powf(-(nn - 2.0) / 2.0 * crit) * s.powi(n as i32 - 1) * jac
    };
    let k = sigma * adaptive_simpson(&kin, 0.0, 1.0, 1e-14);
    let p = sigma * adaptive_simpson(&pow, 0.0, 1.0, 1e-14);
    k / p.powf(2.0 / crit)
}

#[test]
fn theta1_is_pi_squared_in_three_dimensions() {
    // the analytic eigenfunction sin(πs)/s has eigenvalue π²
    let t = &table().theta1;
    assert!((t.value - PI * PI).abs() < 1e-8, "theta1 = {}", t.value);
    assert!(t.provenance.error_estimate < 1e-6);
}

#[test]
fn eigenfunction_matches_sine_profile() {
    let g = grid(1.0, 2048, 3);
    let (theta, v) = discrete_principal_pair(g.clone()).unwrap();
    assert!((theta - PI * PI).abs() < 1e-5);
    let exact = RadialFunction::from_fn(g, |s| if s == 0.0 { PI } else { (PI * s).sin() / s }).normalized(1.0);
    let scale = exact.values()[0] / v.values()[0];
    let dev = v.values().iter().zip(exact.values()).map(|(a, b)| (a * scale - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-5 * exact.sup(), "max deviation {dev}");
    assert!(v.values()[..v.values().len() - 1].iter().all(|x| *x > 0.0));
}

#[test]
fn theta1_increases_with_dimension() {
    let tol = Tolerances::default();
    let th: Vec<f64> = (3..=5).map(|n| ball_principal_eigenvalue::<f64>(n, &tol).unwrap().theta.value).collect();
    assert!(th[0] < th[1] && th[1] < th[2], "{th:?}");
    // j_{1/2} = π, j_1 = 3.8317..., j_{3/2} = 4.4934...
    assert!((th[1] - 3.831_705_970_207_512_f64.powi(2)).abs() < 1e-7);
    assert!((th[2] - 4.493_409_457_909_064_f64.powi(2)).abs() < 1e-7);
}

#[test]
fn eigenvalue_scales_with_radius() {
    let (t1, _) = discrete_principal_pair(grid(1.0, 1024, 3)).unwrap();
    let (t2, _) = discrete_principal_pair(grid(2.0, 1024, 3)).unwrap();
    assert!(rel(t2, t1 / 4.0) < 1e-12);
}

#[test]
fn sobolev_constant_matches_oracles() {
    let s = table().sobolev.value;
    let oracle = bubble_oracle(3);
    assert!(rel(s, oracle) < 1e-8, "S = {s}, oracle {oracle}");
    // cross-check: N(N-2)/4 |S^N|^{2/N}, S^N the unit sphere of R^{N+1}
    let closed = 0.75 * sphere_area::<f64>(4).powf(2.0 / 3.0);
    assert!(rel(s, closed) < 1e-8);
    let s4 = aubin_talenti::<f64>(4, &Tolerances::default()).unwrap().value;
    assert!(rel(s4, bubble_oracle(4)) < 1e-8);
    assert!((s4 - s).abs() > 1e-3);
}

#[test]
fn bubble_quotient_is_scale_invariant() {
    let base = bubble_quotient::<f64>(3, 1.0, 256);
    for lam in [0.25, 3.0, 17.0] {
        assert!(rel(bubble_quotient::<f64>(3, lam, 256), base) < 1e-10);
    }
}

#[test]
fn constants_stable_under_halving() {
    let t = table();
    let s = &t.sobolev;
    assert!(s.provenance.error_estimate / s.value < 1e-7);
    for e in &t.gn {
        assert!(e.provenance.error_estimate / e.value < 1e-7, "C_{{3,{}}}: {:?}", e.s, e.provenance);
        // one further halving of the shooting step
        let finer = ground_state::<f64>(3, e.s, 1.0 / 2048.0, 1e-10).unwrap().quotient();
        assert!(rel(finer, e.value) < 1e-7, "s = {}: {} vs {}", e.s, finer, e.value);
    }
    let eig = ball_principal_eigenvalue::<f64>(3, &Tolerances::default()).unwrap();
    assert!(eig.theta.provenance.error_estimate < 1e-7);
}

fn q_profile(n: usize, s: f64, radius: f64, cells: usize) -> RadialFunction<f64> {
    let q = ground_state::<f64>(n, s, 1.0 / 512.0, 1e-10).unwrap();
    let g = grid(radius, cells, n);
    let mut u = RadialFunction::from_fn(g, |r| q.eval(r));
    u.enforce_dirichlet();
    u
}

#[test]
fn gn_equality_on_ground_state() {
    for s in [3.0, 5.0] {
        let c = table().gn(s).unwrap();
        // grid quotient at two resolutions, Richardson-extrapolated
        let coarse = gn_quotient(&q_profile(3, s, 24.0, 16384), s);
        let fine = gn_quotient(&q_profile(3, s, 24.0, 32768), s);
        let quot = (4.0 * fine - coarse) / 3.0;
        assert!(rel(quot, c) < 1e-6, "s = {s}: quotient {quot}, C = {c}");
    }
}

#[test]
fn gn_quotient_scaling_invariance() {
    for s in [3.0, 5.0] {
        let u = q_profile(3, s, 30.0, 4096);
        let base = gn_quotient(&u, s);
        for lam in [0.5, 2.0, 3.7] {
            let dil = u.dilated(lam).unwrap();
            assert!(rel(gn_quotient(&dil, s), base) < 1e-10);
        }
        for mu in [0.1, 7.0] {
            let vals = u.values().iter().map(|x| mu * x).collect();
            let v = RadialFunction::new(u.grid().clone(), vals);
            assert!(rel(gn_quotient(&v, s), base) < 1e-10);
        }
    }
}

#[test]
fn gn_inequality_on_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [3usize, 4] {
        let tol = Tolerances::default();
        for s in [2.5, 3.0, 3.5] {
            let c = gn_best_constant::<f64>(n, s, &tol).unwrap().value;
            let g = grid(20.0, 4096, n);
            for k in 0..100 {
                let u = random_profile(&mut rng, g.clone());
                let quot = gn_quotient(&u, s);
                assert!(quot < c, "N={n} s={s} profile {k}: {quot} >= {c}");
            }
        }
    }
    let g = grid(20.0, 4096, 3);
    for s in [3.0, 5.0] {
        let c = table().gn(s).unwrap();
        for _ in 0..100 {
            assert!(gn_quotient(&random_profile(&mut rng, g.clone()), s) < c);
        }
    }
}

#[test]
fn ground_state_is_a_local_maximum_of_the_quotient() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for s in [3.0, 5.0] {
        let u = q_profile(3, s, 30.0, 8192);
        let base = gn_quotient(&u, s);
        let g = u.grid().clone();
        for _ in 0..20 {
            let d = random_profile(&mut rng, g.clone());
            let eps = 0.05 * u.sup() / d.sup() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let vals = u.values().iter().zip(d.values()).map(|(a, b)| a + eps * b).collect();
            let pert = RadialFunction::new(g.clone(), vals);
            assert!(gn_quotient(&pert, s) < base);
        }
    }
}
