use std::f64::consts::{FRAC_PI_3, TAU};
use std::sync::OnceLock;

use circle_pattern::crsys::AngleStructure;
use circle_pattern::develop::{close_vertex_star, develop, star_cross_ratios, DevelopOptions, Traversal};
use circle_pattern::fixtures::{equilateral_torus, one_vertex_case_a};
use circle_pattern::moebius::{cross_ratio, solve_fourth_point, ExtComplex, MoebiusMap, C64};
use circle_pattern::solver::{solve_pattern, AffineFamilyPoint, SolverOptions};
use circle_pattern::surface::{lift_patch, regular_torus};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn separated(p: &[C64]) -> bool {
    p.iter().enumerate().all(|(i, a)| p[i + 1..].iter().all(|b| (a - b).norm() > 0.1))
}

fn solved() -> &'static AffineFamilyPoint {
    static P: OnceLock<AffineFamilyPoint> = OnceLock::new();
    P.get_or_init(|| {
        let s = regular_torus(2, 2);
        let t = AngleStructure::constant(s.n_edges(), FRAC_PI_3);
        solve_pattern(&s, &t, [0.4, -0.2], None, &SolverOptions::default()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cross_ratio_is_moebius_invariant(
        z in prop::array::uniform4(point()),
        m in prop::array::uniform4(point()),
    ) {
        prop_assume!(separated(&z));
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.norm() > 0.5);
        let f = MoebiusMap::new(m[0], m[1], m[2], m[3]).unwrap();
        let e: [ExtComplex; 4] = z.map(Into::into);
        let w = e.map(|p| f.apply(p));
        let before = cross_ratio(e[0], e[1], e[2], e[3]).unwrap();
        let after = cross_ratio(w[0], w[1], w[2], w[3]).unwrap();
        prop_assert!((before - after).norm() <= 1e-8 * before.norm().max(1.0));
    }

    #[test]
    fn fourth_point_round_trip(z in prop::array::uniform4(point())) {
        prop_assume!(separated(&z));
        let e: [ExtComplex; 4] = z.map(Into::into);
        let cr = cross_ratio(e[0], e[1], e[2], e[3]).unwrap();
        let back = solve_fourth_point(cr, e[0], e[1], e[2]).unwrap();
        prop_assert!(back.coincides(&e[3], 1e-8));
    }

    #[test]
    fn random_stars_close(
        center in point(),
        raw in prop::collection::vec((0.0..1.0f64, 0.3..2.0f64), 3..10),
    ) {
        let n = raw.len();
        // Jittered clockwise angles keep neighbours apart.
        let ring: Vec<ExtComplex> = raw
            .iter()
            .enumerate()
            .map(|(j, (jit, r))| {
                let t = -TAU * (j as f64 + 0.8 * jit) / n as f64;
                (center + C64::from_polar(*r, t)).into()
            })
            .collect();
        let cr = star_cross_ratios(center.into(), &ring).unwrap();
        let product: C64 = cr.iter().product();
        prop_assert!((product - 1.0).norm() < 1e-9);
        let layout = close_vertex_star(&cr, 1e-6).unwrap();
        prop_assert!(layout.gap < 1e-9 * layout.points.iter().map(|z| z.norm()).fold(1.0, f64::max));
    }

    #[test]
    fn development_ignores_traversal(seed in any::<u64>(), which in 0..3usize) {
        let (s, cr) = match which {
            0 => { let f = one_vertex_case_a(); (f.surface, f.cr.unwrap()) }
            1 => { let f = equilateral_torus(2, 3); (f.surface, f.cr.unwrap()) }
            _ => { let p = solved(); (regular_torus(2, 2), p.cr.clone()) }
        };
        let patch = lift_patch(&s, -1..=1, -1..=1).unwrap();
        let bfs = develop(&s, &cr, &patch, &DevelopOptions::default()).unwrap();
        let other = develop(&s, &cr, &patch, &DevelopOptions { traversal: Traversal::Random(seed), ..Default::default() }).unwrap();
        for (a, b) in bfs.positions.iter().zip(&other.positions) {
            prop_assert!(a.chordal_distance(b) < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn newton_step_never_increases_residual(noise in prop::collection::vec(-1.0..1.0f64, 12), scale in 1e-4..1e-2f64) {
        let p = solved();
        let s = regular_torus(2, 2);
        let patch = lift_patch(&s, 0..=1, 0..=1).unwrap();
        let x: Vec<f64> = p.x.iter().zip(&noise).map(|(x, n)| x + scale * n).collect();
        let step = circle_pattern::solver::newton_step(&s, &p.theta, &x, p.a, &patch).unwrap();
        prop_assert!(step.residual_after <= step.residual_before);
    }
}
