use std::f64::consts::PI;

use proptest::prelude::*;
use rloc_core::frac_calc::*;
use rloc_core::grid::{uniform_grid, Analytic, GridFunction};
use rloc_core::special::{fl_constant, gamma};

fn tagged(t: Analytic, lo: f64, hi: f64, n: usize) -> GridFunction {
    GridFunction::from_analytic(t, uniform_grid(lo, hi, n)).unwrap()
}

// Simpson on [a, b] with 2m panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / (2 * m) as f64;
    let mut s = f(a) + f(b);
    for i in 1..2 * m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn c_alpha_closed_form_values() {
    // Γ(2−α) sin((2−α)π/2) / (π(α−1)), evaluated at 25 digits.
    for (a, want) in [(1.2, 1.7622403312499402), (1.5, 0.7978845608028654), (1.8, 0.5644623929465976)] {
        assert!((c_alpha(a) - want).abs() < 1e-12, "{a}");
        assert!(c_alpha(a) > 0.0);
    }
}

#[test]
fn c_alpha_integral_values() {
    // (2/π)Γ(2−α) sin((2−α)π/2)/(α−1), from integrating by parts against ∫ y^{s−1} sin y dy.
    for (a, want) in [(1.2, 3.5244806624998804), (1.5, 1.5957691216057307), (1.8, 1.1289247858931951)] {
        let got = c_alpha_integral(a).unwrap();
        assert!((got - want).abs() < 1e-9, "{a}: {got}");
    }
}

#[test]
fn printed_constant_is_negative() {
    let v = C_alpha(1.5);
    assert!((v - -3.744771666090156).abs() < 1e-10);
    for a in [1.2, 1.5, 1.8] {
        assert!(C_alpha(a).is_finite() && C_alpha(a) < 0.0);
    }
}

#[test]
fn calibrated_constant_matches_fl_constant() {
    for a in [1.1, 1.3, 1.5, 1.7, 1.9] {
        let c = calibrated_levy_constant(a).unwrap();
        assert!((c - fl_constant(a)).abs() < 1e-9 * fl_constant(a), "{a}");
    }
}

#[test]
fn laplacian_of_cos_is_multiplier() {
    for a in [1.5, 1.8] {
        for (w, ph) in [(1.0, 0.0), (2.0, 0.3)] {
            let g = tagged(Analytic::Cos { freq: w, phase: ph }, -PI, PI, 41);
            let lap = frac_laplacian(&g, a, 1e-2).unwrap();
            let scale = f64::powf(w, a);
            for (x, v) in g.grid.iter().zip(&lap.values) {
                let want = -scale * f64::cos(w * x + ph);
                assert!((v - want).abs() < 1e-3 * scale, "a={a} w={w} x={x}: {v} vs {want}");
            }
        }
    }
}

#[test]
fn laplacian_of_gaussian_at_origin() {
    // −(1/√π) 2^α Γ((α+1)/2) from the Fourier side.
    for (a, want) in [(1.5, -1.4464090846320772), (1.8, -1.7431382277737991)] {
        let g = tagged(Analytic::Gaussian, -8.0, 8.0, 161);
        let v = frac_laplacian_at(&g, a, 0.0, 1e-2).unwrap();
        assert!((v - want).abs() < 1e-4, "{a}: {v}");
    }
}

#[test]
fn laplacian_of_gaussian_against_fft() {
    use rustfft::{num_complex::Complex, FftPlanner};
    let a = 1.5;
    let n = 1 << 14;
    let span = 64.0;
    let h = span / n as f64;
    let mut buf: Vec<Complex<f64>> =
        (0..n).map(|i| Complex::new(f64::exp(-f64::powi(-span / 2.0 + i as f64 * h, 2)), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let xi = 2.0 * PI * kk / span;
        *c *= -f64::powf(xi.abs(), a);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let g = tagged(Analytic::Gaussian, -8.0, 8.0, 161);
    for x in [-2.0, -0.5, 0.0, 0.75, 1.5, 3.0] {
        let i = ((x + span / 2.0) / h).round() as usize;
        let want = buf[i].re / n as f64;
        let got = frac_laplacian_at(&g, a, x, 1e-2).unwrap();
        assert!((got - want).abs() < 1e-3, "x={x}: {got} vs {want}");
    }
}

#[test]
fn laplacian_of_constant_and_affine_vanish() {
    let g = tagged(Analytic::Constant { c: 4.0 }, -1.0, 1.0, 5);
    assert!(frac_laplacian(&g, 1.5, 1e-2).unwrap().values.iter().all(|v| *v == 0.0));
}

#[test]
fn unbounded_tags_rejected() {
    let g = tagged(Analytic::Abs, -1.0, 1.0, 5);
    assert!(frac_laplacian_at(&g, 1.5, 0.0, 1e-2).is_err());
}

#[test]
fn riesz_matches_laplacian_on_gaussian() {
    let a = 1.5;
    let g = tagged(Analytic::Gaussian, -3.0, 3.0, 25);
    let r = riesz_derivative(&g, a).unwrap();
    let l = frac_laplacian(&g, a, 1e-2).unwrap();
    for (x, (u, v)) in g.grid.iter().zip(r.values.iter().zip(&l.values)) {
        assert!((u - v).abs() < 1e-3, "x={x}: {u} vs {v}");
    }
    assert!(riesz_derivative(&g, 1.0).is_err());
}

#[test]
fn gradient_derivative_is_laplacian() {
    let t = Analytic::Gaussian;
    for a in [1.5, 1.8] {
        let g = tagged(t.clone(), -8.0, 8.0, 161);
        for x in [-1.3, -0.2, 0.4, 2.0] {
            let d = 1e-4;
            let gp = fractional_gradient_at(&t, a, x + d).unwrap().unwrap();
            let gm = fractional_gradient_at(&t, a, x - d).unwrap().unwrap();
            let lap = frac_laplacian_at(&g, a, x, 1e-2).unwrap();
            assert!(((gp - gm) / (2.0 * d) - lap).abs() < 1e-5, "a={a} x={x}");
        }
    }
}

#[test]
fn gradient_of_cos_closed_form() {
    let a = 1.7;
    let b: f64 = a - 1.0;
    let g = tagged(Analytic::Cos { freq: 2.0, phase: 0.4 }, -1.0, 1.0, 11);
    let d = fractional_gradient(&g, a).unwrap();
    for (x, v) in g.grid.iter().zip(&d.values) {
        let want = -f64::powf(2.0, b) * f64::sin(2.0 * x + 0.4);
        assert!((v - want).abs() < 1e-14);
    }
}

#[test]
fn gradient_of_abs_two_routes() {
    // |x| through the piecewise-linear formula, |x|^1 through the power law.
    for a in [1.3, 1.6, 1.9] {
        for x in [-2.0, -0.3, 0.0, 0.01, 1.7] {
            let u = fractional_gradient_at(&Analytic::Abs, a, x).unwrap().unwrap();
            let v = fractional_gradient_at(&Analytic::AbsPower { gamma: 1.0 }, a, x).unwrap().unwrap();
            assert!((u - v).abs() < 1e-12, "a={a} x={x}: {u} {v}");
        }
        let b: f64 = a - 1.0;
        let want = 1.0 / (f64::sin(PI * b / 2.0) * gamma(2.0 - b));
        let got = fractional_gradient_at(&Analytic::Abs, a, 1.0).unwrap().unwrap();
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn gradient_of_power_at_critical_exponent_is_sign() {
    let a = 1.8;
    let k = gamma(a) * f64::sin(PI * (a - 1.0) / 2.0);
    let t = Analytic::AbsPower { gamma: a - 1.0 };
    for x in [-3.0, -0.1, 0.2, 5.0] {
        let v = fractional_gradient_at(&t, a, x).unwrap().unwrap();
        assert!((v - k * x.signum()).abs() < 1e-12);
    }
}

#[test]
fn gradient_gl_converges_on_gaussian() {
    let a = 1.6;
    let t = Analytic::Gaussian;
    let mut errs = Vec::new();
    for n in [321, 641, 1281] {
        let grid = uniform_grid(-8.0, 8.0, n);
        let vals = grid.iter().map(|&x| t.eval(x)).collect();
        let g = GridFunction::sampled(grid.clone(), vals).unwrap();
        let d = fractional_gradient(&g, a).unwrap();
        let mut e = 0.0f64;
        for (x, v) in grid.iter().zip(&d.values) {
            if x.abs() <= 2.0 {
                e = e.max((v - fractional_gradient_at(&t, a, *x).unwrap().unwrap()).abs());
            }
        }
        errs.push(e);
    }
    assert!(errs[2] < 2e-2, "{errs:?}");
    assert!(errs[1] / errs[2] > 1.8 && errs[0] / errs[1] > 1.8, "{errs:?}");
}

#[test]
fn left_derivative_of_exp_and_cos() {
    let g = tagged(Analytic::Exp { rate: 2.0 }, -1.0, 1.0, 9);
    let d = frac_derivative(&g, 0.5, Side::Left).unwrap();
    for (x, v) in g.grid.iter().zip(&d.values) {
        assert!((v - f64::sqrt(2.0) * f64::exp(2.0 * x)).abs() < 1e-12);
    }
    let g = tagged(Analytic::Cos { freq: 1.0, phase: 0.0 }, -1.0, 1.0, 9);
    let d = frac_derivative(&g, 1.0, Side::Left).unwrap();
    for (x, v) in g.grid.iter().zip(&d.values) {
        assert!((v + f64::sin(*x)).abs() < 1e-12);
    }
}

#[test]
fn gl_derivative_converges_to_quadrature() {
    let t = Analytic::Gaussian;
    for order in [0.4, 1.3] {
        let mut errs = Vec::new();
        for n in [401, 801, 1601] {
            let grid = uniform_grid(-7.0, 7.0, n);
            let vals = grid.iter().map(|&x| t.eval(x)).collect();
            let s = GridFunction::sampled(grid.clone(), vals).unwrap();
            let exact = frac_derivative(&GridFunction::from_analytic(t.clone(), grid.clone()).unwrap(), order, Side::Left).unwrap();
            let gl = frac_derivative(&s, order, Side::Left).unwrap();
            let e = gl.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[0] / errs[1] > 1.8 && errs[1] / errs[2] > 1.8, "{order}: {errs:?}");
    }
}

#[test]
fn gl_needs_margin() {
    let grid = uniform_grid(0.0, 1.0, 11);
    let g = GridFunction::sampled(grid.clone(), vec![1.0; 11]).unwrap();
    assert!(frac_derivative(&g, 0.5, Side::Left).is_err());
    assert!(frac_derivative(&g, 1.0, Side::Left).is_ok());
}

#[test]
fn rl_integral_of_power() {
    let g = tagged(Analytic::Poly { coeffs: vec![0.0, 1.0] }, 0.0, 2.0, 5);
    for a in [0.3, 0.5, 1.7] {
        for x in [0.5, 1.0, 2.0] {
            let got = rl_integral(&g, a, x, Base::Zero).unwrap();
            let want = f64::powf(x, 1.0 + a) / gamma(2.0 + a);
            assert!((got - want).abs() < 1e-10, "{a} {x}");
        }
    }
}

#[test]
fn rl_semigroup_on_polynomial() {
    let grid = uniform_grid(0.0, 1.0, 201);
    let g = GridFunction::from_analytic(Analytic::Poly { coeffs: vec![0.0, 0.0, 3.0, -2.0] }, grid).unwrap();
    let (a, b) = (0.4, 0.7);
    let ib = rl_integral_grid(&g, b, Base::Zero).unwrap();
    let iab = rl_integral_grid(&ib, a, Base::Zero).unwrap();
    for (x, v) in iab.grid.iter().zip(&iab.values).skip(100).step_by(20) {
        let want = rl_integral(&g, a + b, *x, Base::Zero).unwrap();
        assert!((v - want).abs() < 1e-6, "x={x}: {v} vs {want}");
    }
}

#[test]
fn rl_from_minus_infinity_on_exp() {
    let g = tagged(Analytic::Exp { rate: 1.0 }, -1.0, 1.0, 5);
    for x in [-1.0, 0.0, 1.0] {
        assert!((rl_integral(&g, 0.5, x, Base::MinusInfinity).unwrap() - f64::exp(x)).abs() < 1e-8);
    }
    let c = tagged(Analytic::Constant { c: 1.0 }, -1.0, 1.0, 5);
    assert!(rl_integral(&c, 0.5, 0.0, Base::MinusInfinity).is_err());
}

#[test]
fn mollifier_normalisation() {
    assert!((rho_constant() - 2.252283621043581).abs() < 1e-10);
    let mass = simpson(rho, 0.0, 2.0, 2000);
    assert!((mass - 1.0).abs() < 1e-10);
    assert_eq!(rho(0.0), 0.0);
    assert_eq!(rho(2.0), 0.0);
}

#[test]
fn mollify_constant_and_linear() {
    let grid = uniform_grid(-1.0, 1.0, 201);
    let k = GridFunction::sampled(grid.clone(), vec![3.0; 201]).unwrap();
    let m = mollify(&k, 4).unwrap();
    assert!(m.values.iter().all(|v| (v - 3.0).abs() < 1e-10));
    assert!((m.lo() - -0.5).abs() < 1e-12);
    let mu = simpson(|z| z * rho(z), 0.0, 2.0, 2000);
    let lin = GridFunction::sampled(grid.clone(), grid.clone()).unwrap();
    for n in [2, 8] {
        let m = mollify(&lin, n).unwrap();
        for (x, v) in m.grid.iter().zip(&m.values) {
            assert!((v - (x - mu / n as f64)).abs() < 1e-10);
        }
    }
}

#[test]
fn mollified_step_is_monotone() {
    let grid = uniform_grid(-1.0, 1.0, 401);
    let vals = grid.iter().map(|&x| if x >= 0.0 { 1.0 } else { 0.0 }).collect();
    let s = GridFunction::sampled(grid, vals).unwrap();
    let n = 4;
    let m = mollify(&s, n).unwrap();
    for w in m.values.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    for (x, v) in m.grid.iter().zip(&m.values) {
        if *x < -1e-12 {
            assert!(v.abs() < 1e-12);
        }
        if *x > 2.0 / n as f64 + 0.01 {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn mollifier_commutes_with_derivative() {
    let mut errs = Vec::new();
    for n in [301, 601] {
        let grid = uniform_grid(-1.0, 2.0, n);
        let vals = grid.iter().map(|&x| if x >= 0.0 { x * x } else { 0.0 }).collect();
        let f = GridFunction::sampled(grid, vals).unwrap();
        let (l, r) = frac_derivative_commutes_with_mollifier(&f, 8, 0.5).unwrap();
        let mut e = 0.0f64;
        for ((x, a), b) in l.grid.iter().zip(&l.values).zip(&r.values) {
            if (0.5..=1.5).contains(x) {
                e = e.max((a - b).abs());
            }
        }
        errs.push(e);
    }
    assert!(errs[0] < 1e-3, "{errs:?}");
    assert!(errs[1] <= errs[0] / 2.0 || errs[1] < 1e-12, "{errs:?}");
}

#[test]
fn mollifier_constant_commutes_trivially() {
    let grid = uniform_grid(-1.0, 1.0, 101);
    let f = GridFunction::from_analytic(Analytic::Constant { c: 2.0 }, grid).unwrap();
    let (l, r) = frac_derivative_commutes_with_mollifier(&f, 4, 0.5).unwrap();
    assert!(l.values.iter().chain(&r.values).all(|v| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplacian_multiplier_on_random_cos(w in 0.3f64..3.0, ph in -3.0f64..3.0, a in 1.1f64..1.9) {
        let g = tagged(Analytic::Cos { freq: w, phase: ph }, -1.0, 1.0, 5);
        let lap = frac_laplacian(&g, a, 1e-2).unwrap();
        for (x, v) in g.grid.iter().zip(&lap.values) {
            let want = -f64::powf(w, a) * f64::cos(w * x + ph);
            prop_assert!((v - want).abs() < 1e-3 * f64::powf(w, a).max(1.0));
        }
    }

    #[test]
    fn gradient_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, a in 1.1f64..1.9) {
        let grid = uniform_grid(-6.0, 6.0, 241);
        let u: Vec<f64> = grid.iter().map(|&x| f64::exp(-x * x)).collect();
        let v: Vec<f64> = grid.iter().map(|&x| f64::exp(-(x - 0.5) * (x - 0.5) * 2.0)).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(p, q)| c1 * p + c2 * q).collect();
        let du = fractional_gradient(&GridFunction::sampled(grid.clone(), u).unwrap(), a).unwrap();
        let dv = fractional_gradient(&GridFunction::sampled(grid.clone(), v).unwrap(), a).unwrap();
        let dw = fractional_gradient(&GridFunction::sampled(grid, w).unwrap(), a).unwrap();
        for i in 0..dw.values.len() {
            let lin = c1 * du.values[i] + c2 * dv.values[i];
            prop_assert!((dw.values[i] - lin).abs() < 1e-10 * (1.0 + lin.abs()));
        }
    }
}
