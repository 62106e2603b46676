use proptest::prelude::*;
use rloc_core::grid::{uniform_grid, Analytic, GridFunction};
use rloc_core::variation::*;
use rloc_core::LiftMap;

// Maximum over partitions containing both endpoints, summed left to right
// with the library's pow so that equality is exact.
fn brute(v: &[f64], p: f64) -> f64 {
    let n = v.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << (n - 2)) {
        let mut prev = v[0];
        let mut s = 0.0;
        for (k, &x) in v[1..n - 1].iter().enumerate() {
            if mask >> k & 1 == 1 {
                s += libm::pow((x - prev).abs(), p);
                prev = x;
            }
        }
        s += libm::pow((v[n - 1] - prev).abs(), p);
        best = best.max(s);
    }
    best
}

#[test]
fn small_examples() {
    assert_eq!(p_variation_exact(&[0.0, 1.0, 0.0], 2.0), 2.0);
    let v: Vec<f64> = (0..30).map(|i| (i as f64 * 0.1).exp()).collect();
    for p in [1.0, 1.5, 3.0] {
        let want = (v[29] - v[0]).powf(p);
        assert!((p_variation_exact(&v, p) - want).abs() < 1e-12 * want);
    }
    assert_eq!(p_variation_exact(&[2.0, 2.0, 2.0], 2.0), 0.0);
    assert_eq!(p_variation_exact(&[1.0], 2.0), 0.0);
}

#[test]
fn turning_points_drop_monotone_interiors() {
    assert_eq!(turning_points(&[0.0, 1.0, 2.0, 2.0, 1.0, 3.0]), vec![0.0, 2.0, 1.0, 3.0]);
    assert_eq!(turning_points(&[5.0, 5.0]), vec![5.0, 5.0]);
}

#[test]
fn dyadic_bound_on_ramp() {
    // Level n of a ramp on [0, 1]: 2^n increments of 2^{−n}, so the p = 2
    // sum is 2^{−n} and raw = Σ n^{1.5} 2^{−n}.
    let v = uniform_grid(0.0, 1.0, 1025);
    let b = dyadic_variation_bound(&v, 2.0, 1.5).unwrap();
    let raw: f64 = (1..=10).map(|n| f64::powf(n as f64, 1.5) * f64::powf(2.0, -(n as f64))).sum();
    let c: f64 = 2.0 * (1..=10).map(|n| f64::powf(n as f64, -1.5)).sum::<f64>();
    assert_eq!(b.levels, 10);
    assert!((b.raw - raw).abs() < 1e-12);
    assert!((b.constant - c).abs() < 1e-12);
    assert!((b.bound - c * raw).abs() < 1e-12);
    assert!(b.bound >= p_variation_exact(&v, 2.0));
}

#[test]
fn dyadic_bound_errors_and_constant_input() {
    assert_eq!(dyadic_variation_bound(&[1.0; 9], 2.0, 1.5).unwrap().bound, 0.0);
    assert!(dyadic_variation_bound(&[0.0, 1.0, 0.0], 2.0, 1.5).is_err());
    assert!(dyadic_variation_bound(&[0.0; 8], 2.0, 1.5).is_err());
    assert!(dyadic_variation_bound(&[0.0; 9], 2.0, 1.0).is_err());
    assert!(dyadic_variation_bound(&[0.0; 9], 1.0, 1.5).is_err());
}

#[test]
fn variation_controls() {
    let grid = uniform_grid(0.0, 1.0, 101);
    let c = total_variation_control(&GridFunction::from_analytic(Analytic::Constant { c: 3.0 }, grid.clone()).unwrap(), 1.5)
        .unwrap();
    assert_eq!(c.eval(0.1, 0.9), 0.0);
    let id = GridFunction::from_analytic(Analytic::Affine { slope: 1.0, intercept: 0.0 }, grid.clone()).unwrap();
    let w = total_variation_control(&id, 1.0).unwrap();
    for (a, b) in [(0.0, 1.0), (0.13, 0.77), (0.5, 0.5)] {
        assert!((w.eval(a, b) - (b - a)).abs() < 1e-12);
    }
    assert!(total_variation_control(&id, 0.5).is_err());
}

#[test]
fn length_partition() {
    let w1 = ControlFunction::zero().augment();
    let p = control_equalized_partition(&w1, 0.0, 1.0, 2).unwrap();
    assert_eq!(p.points, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(control_equalized_partition(&w1, -1.0, 3.0, 0).unwrap().points, vec![-1.0, 3.0]);
    assert!(control_equalized_partition(&ControlFunction::zero(), 0.0, 1.0, 2).is_err());
}

#[test]
fn golden_ratio_midpoint() {
    // w₁(0, x) = x² + x = 1 at x = (√5 − 1)/2.
    let want = (5f64.sqrt() - 1.0) / 2.0;
    let exact = ControlFunction::custom(|a, b| b * b - a * a).augment();
    let x = control_equalized_partition(&exact, 0.0, 1.0, 1).unwrap().points[1];
    assert!((x - want).abs() < 1e-9, "{x}");
    // The grid version integrates the linear interpolant of x², off by O(h²).
    let g = GridFunction::from_analytic(Analytic::Poly { coeffs: vec![0.0, 0.0, 1.0] }, uniform_grid(0.0, 1.0, 2001)).unwrap();
    let sampled = total_variation_control(&g, 1.0).unwrap().augment();
    let x = control_equalized_partition(&sampled, 0.0, 1.0, 1).unwrap().points[1];
    assert!((x - want).abs() < 1e-6, "{x}");
}

#[test]
fn partition_is_equalised_and_nested() {
    let g = GridFunction::from_analytic(Analytic::Cos { freq: 7.0, phase: 0.2 }, uniform_grid(0.0, 2.0, 801)).unwrap();
    let w1 = total_variation_control(&g, 1.0).unwrap().augment();
    let fine = control_equalized_partition(&w1, 0.0, 2.0, 6).unwrap();
    let total = w1.eval(0.0, 2.0);
    for (l, x) in fine.points.iter().enumerate() {
        let target = total * l as f64 / 64.0;
        assert!((w1.eval(0.0, *x) - target).abs() <= 1e-10 * total * 1.0001, "l={l}");
    }
    for m in 0..6u32 {
        let coarse = control_equalized_partition(&w1, 0.0, 2.0, m).unwrap();
        assert_eq!(coarse.points, fine.coarsen(1 << (6 - m)).unwrap().points);
    }
}

#[test]
fn theta_distance_three_points() {
    let pts = vec![0.0, 0.5, 1.0];
    let x = LiftMap::from_values(pts.clone(), &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], 1).unwrap();
    let y = LiftMap::from_values(pts, &[[0.0, 0.0], [0.5, 0.0], [2.0, 0.0]], 1).unwrap();
    // Increments of X − Y: (0.5, 0) then (−1.5, 1); over the whole interval (−1, 1).
    let sq = |a: f64, b: f64| a * a + b * b;
    let split = sq(0.5, 0.0) + sq(-1.5, 1.0);
    let whole = sq(-1.0, 1.0);
    let want = split.max(whole).sqrt();
    assert!((theta_distance(&x, &y, 2.0, 1).unwrap() - want).abs() < 1e-14);
    assert_eq!(theta_distance(&x, &x, 2.5, 1).unwrap(), 0.0);
    assert!(theta_distance(&x, &y, 4.0, 1).is_err());
}

#[test]
fn theta_distance_needs_same_points() {
    let x = LiftMap::from_values(vec![0.0, 1.0], &[[0.0, 0.0], [1.0, 1.0]], 2).unwrap();
    let y = LiftMap::from_values(vec![0.0, 2.0], &[[0.0, 0.0], [1.0, 1.0]], 2).unwrap();
    assert!(theta_distance(&x, &y, 2.5, 2).is_err());
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn lift(v: &[[f64; 2]], levels: usize) -> LiftMap {
    let pts: Vec<f64> = (0..v.len()).map(|i| i as f64).collect();
    LiftMap::from_values(pts, v, levels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dp_matches_brute_force(v in values(10), p in 1.0f64..4.0) {
        let want = brute(&v, p);
        prop_assert_eq!(p_variation_dp(&v, p), want);
        prop_assert_eq!(p_variation_exact(&v, p), want);
    }

    #[test]
    fn monotone_in_p(v in prop::collection::vec(-0.5f64..0.5, 2..40), p in 1.0f64..3.0, dp in 0.0f64..2.0) {
        prop_assert!(p_variation_exact(&v, p + dp) <= p_variation_exact(&v, p) * (1.0 + 1e-12));
    }

    #[test]
    fn subgrid_is_smaller(v in prop::collection::vec(-2.0f64..2.0, 3..40), keep in prop::collection::vec(any::<bool>(), 40), p in 1.0f64..4.0) {
        let n = v.len();
        let sub: Vec<f64> = v.iter().enumerate().filter(|(i, _)| *i == 0 || *i == n - 1 || keep[*i]).map(|(_, x)| *x).collect();
        prop_assert!(p_variation_exact(&sub, p) <= p_variation_exact(&v, p) * (1.0 + 1e-12));
    }

    #[test]
    fn dyadic_bound_dominates(v in values(33), p in 1.2f64..4.0, dg in 1e-6f64..2.0) {
        let b = dyadic_variation_bound(&v, p, p - 1.0 + dg).unwrap();
        prop_assert!(b.bound >= p_variation_exact(&v, p) * (1.0 - 1e-12));
    }

    #[test]
    fn controls_superadditive(v in values(30), q in 1.0f64..3.0, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let g = GridFunction::sampled(uniform_grid(0.0, 1.0, 30), v).unwrap();
        let w = total_variation_control(&g, q).unwrap();
        let mut t = [a, b, c];
        t.sort_by(f64::total_cmp);
        prop_assert_eq!(w.eval(t[0], t[0]), 0.0);
        prop_assert!(w.eval(t[0], t[1]) + w.eval(t[1], t[2]) <= w.eval(t[0], t[2]) + 1e-10);
    }

    #[test]
    fn theta_triangle_level_one(a in values(18), b in values(18), c in values(18), theta in 2.0f64..4.0) {
        let pair = |v: &[f64]| v.chunks(2).map(|c| [c[0], c[1]]).collect::<Vec<_>>();
        let (x, y, z) = (lift(&pair(&a), 1), lift(&pair(&b), 1), lift(&pair(&c), 1));
        let xy = theta_distance(&x, &y, theta, 1).unwrap();
        let yz = theta_distance(&y, &z, theta, 1).unwrap();
        let xz = theta_distance(&x, &z, theta, 1).unwrap();
        prop_assert!(xz <= xy + yz + 1e-12);
        prop_assert_eq!(theta_distance(&x, &x, theta, 1).unwrap(), 0.0);
    }
}
