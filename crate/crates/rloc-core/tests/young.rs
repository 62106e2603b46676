use proptest::prelude::*;
use rloc_core::frac_calc::mollify;
use rloc_core::grid::{trapezoid, uniform_grid, Analytic, GridFunction};
use rloc_core::local_time::{covering_grid, default_bandwidth, estimate_local_time};
use rloc_core::stable_process::simulate_path;
use rloc_core::young::*;
use rloc_core::{Alpha, Error, LocalTimeField};

fn on(t: Analytic, lo: f64, hi: f64, n: usize) -> GridFunction {
    GridFunction::from_analytic(t, uniform_grid(lo, hi, n)).unwrap()
}

fn slice(f: &GridFunction, a: usize, b: usize) -> GridFunction {
    GridFunction::sampled(f.grid[a..=b].to_vec(), f.values[a..=b].to_vec()).unwrap()
}

// The same piecewise-linear function with every cell split in two.
fn midpoints(f: &GridFunction) -> GridFunction {
    let mut x = vec![f.grid[0]];
    let mut v = vec![f.values[0]];
    for i in 1..f.len() {
        x.push(0.5 * (f.grid[i - 1] + f.grid[i]));
        v.push(0.5 * (f.values[i - 1] + f.values[i]));
        x.push(f.grid[i]);
        v.push(f.values[i]);
    }
    GridFunction::sampled(x, v).unwrap()
}

fn field(alpha: f64, seed: u64) -> LocalTimeField {
    let n = 1 << 14;
    let p = simulate_path(Alpha::new(alpha).unwrap(), 1.0, n, 1.0, seed).unwrap();
    let b = default_bandwidth(alpha, 1.0, n);
    estimate_local_time(&p, &covering_grid(&p, b, b / 2.0), b).unwrap()
}

#[test]
fn x_against_x_squared() {
    let f = on(Analytic::Affine { slope: 1.0, intercept: 0.0 }, 0.0, 1.0, 1001);
    let g = on(Analytic::Poly { coeffs: vec![0.0, 0.0, 1.0] }, 0.0, 1.0, 1001);
    let r = young_integral(&f, &g, 1.0, 1.0).unwrap();
    assert!((r.value - 2.0 / 3.0).abs() < 1e-6);
    assert!(r.gap < 1e-8 * (1.0 + r.value));
}

#[test]
fn young_condition_routes_away() {
    let f = on(Analytic::Gaussian, -1.0, 1.0, 11);
    assert!(matches!(young_integral(&f, &f, 2.0, 2.0), Err(Error::YoungCondition { .. })));
    assert!(matches!(young_integral(&f, &f, 3.0, 1.5), Err(Error::YoungCondition { .. })));
    assert!(young_integral(&f, &f, 2.9, 1.5).is_ok());
    let g = on(Analytic::Gaussian, -1.0, 2.0, 11);
    assert!(young_integral(&f, &g, 1.0, 1.0).is_err());
}

#[test]
fn local_time_integrals() {
    for seed in 0..4 {
        let l = field(1.6, seed);
        let one = GridFunction::from_analytic(Analytic::Constant { c: 1.0 }, l.grid.clone()).unwrap();
        assert!(young_integral_vs_local_time(&one, &l, 3.4, 1.0).unwrap().value.abs() < 1e-12);

        // By parts against the compactly supported L: ∫ g dL = −∫ L g' dx.
        let g = GridFunction::from_analytic(Analytic::Gaussian, l.grid.clone()).unwrap();
        let lhs = young_integral_vs_local_time(&g, &l, 3.4, 1.0).unwrap().value;
        let dg: Vec<f64> = l.grid.iter().zip(&l.values).map(|(&x, &v)| v * -2.0 * x * (-x * x).exp()).collect();
        let rhs = -trapezoid(&l.grid, &dg);
        assert!((lhs - rhs).abs() < 1e-3 * (1.0 + rhs.abs()), "seed {seed}: {lhs} vs {rhs}");

        // g vanishing on a neighbourhood of the support.
        let (lo, hi) = (l.grid[0], l.grid[l.grid.len() - 1]);
        let far = GridFunction::from_analytic(Analytic::Constant { c: 0.0 }, l.grid.clone()).unwrap();
        assert_eq!(young_integral_vs_local_time(&far, &l, 3.4, 1.0).unwrap().value, 0.0);
        let off: Vec<f64> = uniform_grid(hi + 1.0, hi + 2.0, 11);
        let outside = GridFunction::from_analytic(Analytic::Exp { rate: 1.0 }, off).unwrap();
        let v = young_integral_vs_local_time(&outside, &l, 3.4, 1.0).unwrap().value;
        let direct: f64 = young_integral_vs_local_time(
            &GridFunction::from_analytic(Analytic::Exp { rate: 1.0 }, l.grid.clone()).unwrap(),
            &l,
            3.4,
            1.0,
        )
        .unwrap()
        .value;
        assert!((v - direct).abs() < 1e-9 * (1.0 + direct.abs()), "{lo}: {v} vs {direct}");
    }
}

#[test]
fn term_by_term_with_mollifiers() {
    let f = on(Analytic::Abs, -2.0, 2.0, 801);
    let g = on(Analytic::Cos { freq: 1.3, phase: 0.4 }, -2.0, 2.0, 801);
    // The one-sided mollifier shifts by O(1/n), so the error halves per level.
    let f_seq: Vec<GridFunction> = (1..=16).map(|n| mollify(&f, 1 << n).unwrap()).collect();
    let g_seq = vec![g.clone(); f_seq.len()];
    let errs = term_by_term_check(&f_seq, &g_seq, &f, &g, 1.0, 1.0).unwrap();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(*errs.last().unwrap() < 1e-4, "{errs:?}");

    let same = term_by_term_check(&[f.clone(), f.clone()], &[g.clone(), g.clone()], &f, &g, 1.0, 1.0).unwrap();
    assert_eq!(same, vec![0.0, 0.0]);

    let shifted: Vec<GridFunction> = (1..=4)
        .map(|n| GridFunction::sampled(g.grid.clone(), g.values.iter().map(|v| v + 1.0 / n as f64).collect()).unwrap())
        .collect();
    let errs = term_by_term_check(&vec![f.clone(); 4], &shifted, &f, &g, 1.0, 1.0).unwrap();
    assert!(errs.iter().all(|e| *e < 1e-12), "{errs:?}");
}

fn smooth_tag() -> impl Strategy<Value = Analytic> {
    prop_oneof![
        (0.2f64..4.0, -3.0f64..3.0).prop_map(|(freq, phase)| Analytic::Cos { freq, phase }),
        (-1.5f64..1.5).prop_map(|rate| Analytic::Exp { rate }),
        Just(Analytic::Gaussian),
        prop::collection::vec(-2.0f64..2.0, 1..5).prop_map(|coeffs| Analytic::Poly { coeffs }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn integration_by_parts(a in smooth_tag(), b in smooth_tag(), lo in -2.0f64..0.0, len in 0.5f64..3.0) {
        let (f, g) = (on(a, lo, lo + len, 2001), on(b, lo, lo + len, 2001));
        let fg = young_integral(&f, &g, 1.0, 1.0).unwrap().value;
        let gf = young_integral(&g, &f, 1.0, 1.0).unwrap().value;
        let n = f.len() - 1;
        let bracket = f.values[n] * g.values[n] - f.values[0] * g.values[0];
        let scale = 1.0 + fg.abs() + gf.abs();
        prop_assert!((fg + gf - bracket).abs() < 1e-6 * scale, "{} + {} vs {}", fg, gf, bracket);
    }

    #[test]
    fn chasles(a in smooth_tag(), b in smooth_tag(), k in 1usize..199) {
        let (f, g) = (on(a, 0.0, 1.0, 201), on(b, 0.0, 1.0, 201));
        let whole = young_integral(&f, &g, 1.0, 1.0).unwrap();
        let left = young_integral(&slice(&f, 0, k), &slice(&g, 0, k), 1.0, 1.0).unwrap();
        let right = young_integral(&slice(&f, k, 200), &slice(&g, k, 200), 1.0, 1.0).unwrap();
        let tol = whole.gap + left.gap + right.gap + 1e-13 * (1.0 + whole.value.abs());
        prop_assert!((whole.value - left.value - right.value).abs() <= tol);
    }

    #[test]
    fn bilinear_and_shift_invariant(a in smooth_tag(), b in smooth_tag(), c in smooth_tag(), s in -3.0f64..3.0) {
        let (f1, f2, g) = (on(a, -1.0, 1.0, 301), on(b, -1.0, 1.0, 301), on(c, -1.0, 1.0, 301));
        let comb = GridFunction::sampled(f1.grid.clone(), f1.values.iter().zip(&f2.values).map(|(x, y)| x + s * y).collect()).unwrap();
        let r1 = young_integral(&f1, &g, 1.0, 1.0).unwrap();
        let r2 = young_integral(&f2, &g, 1.0, 1.0).unwrap();
        let rc = young_integral(&comb, &g, 1.0, 1.0).unwrap();
        let tol = r1.gap + s.abs() * r2.gap + rc.gap + 1e-12 * (1.0 + r1.value.abs() + s.abs() * r2.value.abs());
        prop_assert!((rc.value - r1.value - s * r2.value).abs() <= tol);

        let shifted = GridFunction::sampled(g.grid.clone(), g.values.iter().map(|v| v + s).collect()).unwrap();
        let rs = young_integral(&f1, &shifted, 1.0, 1.0).unwrap();
        prop_assert!((rs.value - r1.value).abs() <= r1.gap.max(rs.gap) + 1e-12 * (1.0 + r1.value.abs()));
    }

    #[test]
    fn refinement_within_gap(a in smooth_tag(), b in smooth_tag()) {
        let (f, g) = (on(a, 0.0, 2.0, 101), on(b, 0.0, 2.0, 101));
        let coarse = young_integral(&f, &g, 1.0, 1.0).unwrap();
        let fine = young_integral(&midpoints(&f), &midpoints(&g), 1.0, 1.0).unwrap();
        let tol = coarse.gap.max(fine.gap) + 1e-13 * (1.0 + coarse.value.abs());
        prop_assert!((coarse.value - fine.value).abs() <= tol);
    }
}
