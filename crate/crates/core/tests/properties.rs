use std::f64::consts::PI;

use proptest::prelude::*;

use martinet_lab::flow::{integrate_extremal, IntegratorConfig};
use martinet_lab::geometry::{detect_loops, weighted_area_line, winding_number, ClosedCurve};
use martinet_lab::levelset::{build_nu, chord_level, length_deficit, regime_limit, solve_tangency_start};
use martinet_lab::martinet::{curve_length, gamma, holonomy, lift, project};
use martinet_lab::optimizer::CompetitorProblem;
use martinet_lab::verify::brute_force_crossings;
use martinet_lab::{PlanarCurve, PlanePoint, StructureParams};

fn params() -> impl Strategy<Value = StructureParams> {
    prop::sample::select(vec![5u32, 7, 9, 11]).prop_map(|b| StructureParams::new(b).unwrap())
}

fn walk(max_len: usize) -> impl Strategy<Value = PlanarCurve> {
    prop::collection::vec((0.0..2.0 * PI, 0.05f64..1.0), 3..max_len).prop_map(|steps| {
        let mut p = PlanePoint::new(0.0, 0.0);
        let mut pts = vec![p];
        for (a, r) in steps {
            p = PlanePoint::new(p.x1 + r * a.cos(), p.x2 + r * a.sin());
            pts.push(p);
        }
        PlanarCurve::from_points(pts).unwrap()
    })
}

fn small_curve() -> impl Strategy<Value = PlanarCurve> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..30).prop_filter_map("distinct nodes", |v| {
        PlanarCurve::from_points(v.into_iter().map(|(a, b)| PlanePoint::new(a, b)).collect()).ok()
    })
}

fn star(n: usize, radii: &[f64], phase: f64) -> ClosedCurve {
    let pts = (0..n)
        .map(|k| {
            let a = phase + 2.0 * PI * k as f64 / n as f64;
            PlanePoint::new(radii[k] * a.cos(), radii[k] * a.sin())
        })
        .collect();
    ClosedCurve::from_vertices(pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_lies_on_its_surface(p in params(), t in -1.0f64..1.0) {
        let g = gamma(p, t, false);
        let pt = PlanePoint::new(g.x1, g.x2);
        if t >= 0.0 {
            let scale = g.x2.abs().powi(p.b() as i32).max(f64::MIN_POSITIVE);
            prop_assert!(p.eval_p(pt).abs() <= 64.0 * f64::EPSILON * scale);
        } else {
            prop_assert_eq!(p.eval_p_tilde(pt), 0.0);
        }
        let m = gamma(p, t, true);
        prop_assert_eq!((m.x1, m.x2, m.x3), (-g.x1, g.x2, g.x3));
    }

    #[test]
    fn project_inverts_lift(p in params(), c in small_curve(), z0 in -1.0f64..1.0) {
        let h = lift(p, &c, z0).unwrap();
        prop_assert_eq!(&project(&h), &c);
    }

    #[test]
    fn phi_is_an_isometric_involution(p in params(), c in small_curve()) {
        let h = lift(p, &c, 0.0).unwrap();
        let m = h.apply_phi();
        prop_assert_eq!(&m.apply_phi(), &h);
        prop_assert_eq!(m.length(), h.length());
        let (h0, h1) = (holonomy(p, &c).unwrap(), holonomy(p, &m.project()).unwrap());
        prop_assert!((h0 - h1).abs() <= 1e-15 * (1.0 + h0.abs()));
        prop_assert_eq!(curve_length(&c.mirrored()), curve_length(&c));
    }

    #[test]
    fn weighted_area_matches_holonomy_and_flips_under_reversal(
        p in params(),
        radii in prop::collection::vec(0.2f64..1.0, 16),
        phase in 0.0..PI,
    ) {
        let c = star(16, &radii, phase);
        let a = weighted_area_line(p, &c);
        prop_assert_eq!(a, holonomy(p, c.polyline()).unwrap());
        let r = weighted_area_line(p, &c.reversed());
        prop_assert!((a + r).abs() <= 1e-14 * (1.0 + a.abs()));
    }

    #[test]
    fn winding_number_survives_refinement(radii in prop::collection::vec(0.2f64..1.0, 12), phase in 0.0..PI, k in 2usize..5) {
        let c = star(12, &radii, phase);
        let pts = c.points();
        let mut fine = Vec::new();
        for w in pts.windows(2) {
            for j in 0..k {
                fine.push(w[0].lerp(&w[1], j as f64 / k as f64));
            }
        }
        let f = ClosedCurve::from_vertices(fine).unwrap();
        for y in [PlanePoint::new(0.01, 0.02), PlanePoint::new(2.0, 0.0), PlanePoint::new(-0.05, -0.03)] {
            prop_assert_eq!(winding_number(&c, y).unwrap(), winding_number(&f, y).unwrap());
        }
    }

    #[test]
    fn loops_match_all_pairs_oracle(c in walk(120)) {
        let mut fast: Vec<(usize, usize)> = detect_loops(&c).unwrap().iter().map(|l| l.segments).collect();
        fast.sort_unstable();
        let slow: Vec<(usize, usize)> = brute_force_crossings(&c).iter().map(|&(i, j, _)| (i, j)).collect();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn extremal_flow_is_reflection_equivariant(
        x1 in -0.8f64..0.8, x2 in -0.8f64..0.8, th in 0.0..2.0 * PI, lam in -5.0f64..5.0,
    ) {
        let p = StructureParams::new(5).unwrap();
        let cfg = IntegratorConfig::rk4(1e-2);
        let a = integrate_extremal(p, PlanePoint::new(x1, x2), th, lam, 0.5, &cfg).unwrap();
        let b = integrate_extremal(p, PlanePoint::new(-x1, x2), PI - th, lam, 0.5, &cfg).unwrap();
        for (u, v) in a.curve.points().iter().zip(b.curve.points()) {
            prop_assert!(u.mirrored().dist(v) <= 1e-12);
        }
        prop_assert!((a.holonomy - b.holonomy).abs() <= 1e-12);
    }

    #[test]
    fn extremal_traces_are_arc_length(
        x1 in -0.8f64..0.8, x2 in -0.8f64..0.8, th in 0.0..2.0 * PI, lam in -5.0f64..5.0,
    ) {
        let p = StructureParams::new(5).unwrap();
        let h = 1e-3;
        let tr = integrate_extremal(p, PlanePoint::new(x1, x2), th, lam, 0.5, &IntegratorConfig::rk4(h)).unwrap();
        // half a unit from |x| < 0.8 stays in |x| ≤ 1.3, where |Q| ≤ 4·1.3·(1.3² + 1.3⁵)
        let kappa = lam.abs() * 4.0 * 1.3 * (1.69 + 1.3f64.powi(5));
        for w in tr.curve.points().windows(2) {
            let d = w[0].dist(&w[1]);
            prop_assert!(d <= h * (1.0 + 1e-12));
            prop_assert!(h - d <= kappa * kappa * h.powi(3) / 24.0 + 1e-15);
        }
    }

    #[test]
    fn start_tangency_decreases_in_s(zeta in 1e-12f64..1e-6, s in 0.0f64..0.05, ds in 1e-4f64..0.05) {
        let p = StructureParams::new(5).unwrap();
        let (y_a, _) = solve_tangency_start(p, s, zeta).unwrap();
        let (y_b, _) = solve_tangency_start(p, s + ds, zeta).unwrap();
        prop_assert!(y_b < y_a, "y0({}) = {} vs y0({}) = {}", s, y_a, s + ds, y_b);
    }

    #[test]
    fn mirrored_competitor_problem_mirrors_data(s in 1e-3f64..0.01, eps in 0.05f64..0.2) {
        let p = StructureParams::new(5).unwrap();
        let a = CompetitorProblem::new(p, s, eps, false).unwrap();
        let b = a.mirror();
        prop_assert_eq!(b.start, a.start.mirrored());
        prop_assert_eq!(b.end, a.end.mirrored());
        prop_assert_eq!(b.gamma_length, a.gamma_length);
        prop_assert_eq!(b.holonomy_target, a.holonomy_target);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn deficit_is_monotone_in_zeta(eps in prop::sample::select(vec![0.05, 0.1, 0.2]), half in any::<bool>(), lo in -12.0f64..-8.0) {
        let p = StructureParams::new(5).unwrap();
        let s = if half { eps * eps / 2.0 } else { 0.0 };
        let cap = chord_level(p, s, eps).min(regime_limit(p, eps));
        let mut prev = f64::NEG_INFINITY;
        for k in 0..5 {
            let zeta = 10f64.powf(lo + 0.5 * k as f64);
            if zeta >= cap {
                break;
            }
            let (nu, _) = build_nu(p, s, eps, zeta).unwrap();
            let d = length_deficit(p, &nu);
            prop_assert!(d >= -1e-12);
            prop_assert!(d >= prev - 1e-15, "ζ={zeta}: {d} after {prev}");
            prev = d;
        }
    }
}
