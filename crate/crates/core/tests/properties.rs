use proptest::prelude::*;

use qthermo::base::BaseSample;
use qthermo::fiber::{ModelSpec, PotentialSpec};
use qthermo::hyperbolic::{
    expansion_sequence, hyperbolic_times, hyperbolic_times_by_definition, pliss_times, pliss_times_brute,
};
use qthermo::space::{cone_distance, projective_distance, Boundary, Grid, GridFunction};
use qthermo::thermo::{cylinder_count_dp, cylinder_count_exhaustive, dynamic_ball, pressure_from_lambda, CylinderFiber};
use qthermo::transfer::{solve_triple, FiberOperator, TripleParams};

fn positive_function(grid: Grid, c: &[f64]) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        2.0 + c[0] * (std::f64::consts::TAU * x).cos() + c[1] * (2.0 * std::f64::consts::TAU * x).sin()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn advance_round_trips(omega in 0.0f64..1.0, k in -50i64..50) {
        let s = BaseSample::rotation_at(0.3819660112501051, omega, -100, 100);
        let back = s.advance(k).unwrap().advance(-k).unwrap();
        prop_assert_eq!(back.omega(), s.omega());
        prop_assert_eq!(s.advance(k).unwrap().omega(), s.at(k).unwrap());
    }

    #[test]
    fn shift_advance_reads_symbols(symbols in prop::collection::vec(0u32..3, 20), k in 0i64..19) {
        let s = BaseSample::shift_from(symbols.clone(), 0);
        let t = s.advance(k).unwrap();
        prop_assert_eq!(t.omega().value(), symbols[k as usize] as f64);
        prop_assert_eq!(t.advance(-k).unwrap().omega(), s.omega());
    }

    #[test]
    fn projective_metric_axioms(
        a in prop::collection::vec(-0.9f64..0.9, 2),
        b in prop::collection::vec(-0.9f64..0.9, 2),
        c in prop::collection::vec(-0.9f64..0.9, 2),
        scale in 0.1f64..10.0,
    ) {
        let grid = Grid::new(64, Boundary::Periodic).unwrap();
        let (f, g, h) = (positive_function(grid, &a), positive_function(grid, &b), positive_function(grid, &c));
        let fg = projective_distance(&f, &g).unwrap();
        prop_assert!((fg - projective_distance(&g, &f).unwrap()).abs() < 1e-12);
        prop_assert!(projective_distance(&f, &f.scale(scale)).unwrap() < 1e-12);
        prop_assert!((projective_distance(&f.scale(scale), &g).unwrap() - fg).abs() < 1e-12);
        let tri = projective_distance(&f, &h).unwrap() + projective_distance(&h, &g).unwrap();
        prop_assert!(fg <= tri + 1e-12);
    }

    #[test]
    fn cone_metric_dominates_and_is_a_metric(
        a in prop::collection::vec(-0.9f64..0.9, 2),
        b in prop::collection::vec(-0.9f64..0.9, 2),
        c in prop::collection::vec(-0.9f64..0.9, 2),
        aperture in 100.0f64..400.0,
    ) {
        let grid = Grid::new(64, Boundary::Periodic).unwrap();
        let (f, g, h) = (positive_function(grid, &a), positive_function(grid, &b), positive_function(grid, &c));
        let fg = cone_distance(&f, &g, aperture).unwrap();
        prop_assert!(fg + 1e-12 >= projective_distance(&f, &g).unwrap());
        prop_assert!((fg - cone_distance(&g, &f, aperture).unwrap()).abs() < 1e-9);
        let tri = cone_distance(&f, &h, aperture).unwrap() + cone_distance(&h, &g, aperture).unwrap();
        prop_assert!(fg <= tri + 1e-9);
        prop_assert!(cone_distance(&f, &g, 2.0 * aperture).unwrap() <= fg + 1e-12);
    }

    #[test]
    fn operator_is_linear(
        a in prop::collection::vec(-0.9f64..0.9, 2),
        b in prop::collection::vec(-0.9f64..0.9, 2),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
        omega in 0.0f64..1.0,
    ) {
        let grid = Grid::new(128, Boundary::Periodic).unwrap();
        let model = ModelSpec::manneville_pomeau(0.5);
        let sample = BaseSample::rotation_at(0.3, omega, 0, 0);
        let op = FiberOperator::at(&model, &PotentialSpec::cosine(0.05, 1), &sample, 0, grid).unwrap();
        let (f, g) = (positive_function(grid, &a), positive_function(grid, &b));
        let combo = f.combine(s, &g, t);
        let lhs = op.apply(&combo.values);
        let (lf, lg) = (op.apply(&f.values), op.apply(&g.values));
        for i in 0..grid.n {
            prop_assert!((lhs[i] - (s * lf[i] + t * lg[i])).abs() < 1e-12 * (1.0 + lhs[i].abs()));
        }
    }

    #[test]
    fn pliss_scan_equals_block_sums(a in prop::collection::vec(0.0f64..2.0, 1..40), c2 in 0.05f64..1.5) {
        let (fast, _) = pliss_times(&a, c2 / 2.0, c2, 2.0f64.max(c2)).unwrap();
        prop_assert_eq!(fast, pliss_times_brute(&a, c2));
    }

    #[test]
    fn larger_gamma_keeps_fewer_times(x in 0.0f64..1.0, omega in 0.0f64..1.0, g1 in 0.05f64..0.4, dg in 0.0f64..0.3) {
        let model = ModelSpec::manneville_pomeau(0.6);
        let s = BaseSample::rotation_at(0.3, omega, 0, 64);
        let r = expansion_sequence(&model, &s, x, 48).unwrap();
        let low = hyperbolic_times(&r, g1);
        let high = hyperbolic_times(&r, g1 + dg);
        prop_assert!(high.iter().all(|t| low.contains(t)));
        prop_assert_eq!(low, hyperbolic_times_by_definition(&r, g1));
    }

    #[test]
    fn dynamic_balls_are_nested(x in 0.0f64..1.0, omega in 0.0f64..1.0, n in 0usize..20, eps in 0.005f64..0.09) {
        let model = ModelSpec::manneville_pomeau(0.5);
        let s = BaseSample::rotation_at(0.3, omega, 0, 32);
        let outer = dynamic_ball(&model, &s, x, n, eps).unwrap();
        let inner = dynamic_ball(&model, &s, x, n + 1, eps).unwrap();
        prop_assert!(outer.contains(&inner, 1e-15));
        prop_assert!(inner.left > 0.0 && inner.right > 0.0);
    }

    #[test]
    fn cylinder_dp_matches_enumeration(
        data in prop::collection::vec((0u64..4, 1u64..4, 1.2f64..6.0, 0.3f64..1.5), 1..12),
        alpha in 0.0f64..1.5,
    ) {
        let fibers: Vec<CylinderFiber> = data.iter().map(|&(p, q, s, l)| CylinderFiber::new(p, q, s, l)).collect();
        let dp = cylinder_count_dp(&fibers, alpha, 0.05);
        prop_assert_eq!(dp.w, cylinder_count_exhaustive(&fibers, alpha));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn lambda_average_shifts_by_constant(c in -1.0f64..1.0, omega in 0.0f64..1.0) {
        let model = ModelSpec::manneville_pomeau(0.5);
        let pot = PotentialSpec::cosine(0.05, 1);
        let s = BaseSample::rotation_at(0.3, omega, -96, 104);
        let params = TripleParams::new(8, 96, 256);
        let a = solve_triple(&model, &pot, &s, params).unwrap();
        let b = solve_triple(&model, &pot.clone().shifted(c), &s, params).unwrap();
        prop_assert!((pressure_from_lambda(&b) - pressure_from_lambda(&a) - c).abs() < 1e-12);
    }
}
