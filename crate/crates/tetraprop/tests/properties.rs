//! Property-based invariants for the catalog metrics and the solver.

use proptest::prelude::*;

use tetraprop::bounds::packing_bound;
use tetraprop::checker::{check_tetrahedral, TetraQuery};
use tetraprop::integrals::{tensor_quadrature, QuadRule};
use tetraprop::slicer::{h_value, Tolerances};
use tetraprop::spaces::{Chart, GluedSheet, Point, SpaceSpec};

fn euclid(n: usize) -> SpaceSpec {
    SpaceSpec::Euclidean { dim: n }
}

fn epoint(space: &SpaceSpec, coords: &[f64]) -> Point {
    space.point(Chart::Euclidean(coords.to_vec())).unwrap()
}

fn finite_coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

proptest! {
    /// Cross-sheet distance never beats a two-leg path through any seam
    /// point, and matches the best one up to the seam discretization.
    #[test]
    fn glued_cross_distance_is_a_path_infimum(
        x in finite_coord(),
        y in finite_coord(),
        yp in finite_coord(),
        z in 0.0..3.0f64,
        seam_y in -6.0..6.0f64,
    ) {
        let s = SpaceSpec::GluedPlanes;
        let a = s.point(Chart::Glued { sheet: GluedSheet::Xy, u: x, v: y }).unwrap();
        let b = s.point(Chart::Glued { sheet: GluedSheet::YzPlus, u: yp, v: z }).unwrap();
        let d = s.distance(&a, &b).unwrap();
        let via = (x * x + (y - seam_y) * (y - seam_y)).sqrt()
            + (z * z + (seam_y - yp) * (seam_y - yp)).sqrt();
        prop_assert!(d <= via + 1e-9, "d = {d} beats path {via}");
    }

    /// Triangle inequality across random triples of glued-planes points.
    #[test]
    fn glued_triangle_inequality(
        ax in finite_coord(), ay in finite_coord(),
        by in finite_coord(), bz in 0.0..3.0f64,
        cx in finite_coord(), cy in finite_coord(),
    ) {
        let s = SpaceSpec::GluedPlanes;
        let a = s.point(Chart::Glued { sheet: GluedSheet::Xy, u: ax, v: ay }).unwrap();
        let b = s.point(Chart::Glued { sheet: GluedSheet::YzPlus, u: by, v: bz }).unwrap();
        let c = s.point(Chart::Glued { sheet: GluedSheet::Xy, u: cx, v: cy }).unwrap();
        let dab = s.distance(&a, &b).unwrap();
        let dac = s.distance(&a, &c).unwrap();
        let dcb = s.distance(&c, &b).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-9);
    }

    /// Quotient representatives are interchangeable: the canonical point is
    /// identical for v and -v.
    #[test]
    fn quotient_representative_invariance(
        vx in -1.0..1.0f64, vy in -1.0..1.0f64, vz in -1.0..1.0f64,
    ) {
        let n = (vx * vx + vy * vy + vz * vz).sqrt();
        prop_assume!(n > 1e-3);
        let u = [vx / n, vy / n, vz / n];
        let s = SpaceSpec::ProjectivePlane { rho: 1.0 };
        let a = s.point(Chart::Projective(u)).unwrap();
        let b = s.point(Chart::Projective([-u[0], -u[1], -u[2]])).unwrap();
        prop_assert_eq!(a, b);
        let q = SpaceSpec::ConeOfProjectivePlane;
        let x = q.point(Chart::ConeProjective([vx, vy, vz])).unwrap();
        let y = q.point(Chart::ConeProjective([-vx, -vy, -vz])).unwrap();
        prop_assert_eq!(x, y);
    }

    /// Space descriptors survive a JSON round trip unchanged.
    #[test]
    fn space_spec_round_trip(kind in 0..6usize, rho in 0.05..1.0f64, dim in 1..6usize) {
        let spec = match kind {
            0 => SpaceSpec::Euclidean { dim },
            1 => SpaceSpec::RoundSphere { rho },
            2 => SpaceSpec::Cone { base: Box::new(SpaceSpec::RoundSphere { rho }) },
            3 => SpaceSpec::ProjectivePlane { rho },
            4 => SpaceSpec::GluedPlanes,
            _ => SpaceSpec::PlaneWithRay,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: SpaceSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(spec, back);
    }

    /// Packing bound scaling: doubling eps with n = 3 cuts the count by 8 up
    /// to floor effects.
    #[test]
    fn packing_bound_eps_scaling(
        v0 in 1.0..100.0f64,
        c in 0.1..2.0f64,
        eps in 0.1..1.0f64,
    ) {
        let small = packing_bound(v0, c, 0.9, 1.1, 3, eps).unwrap();
        let large = packing_bound(v0, c, 0.9, 1.1, 3, 2.0 * eps).unwrap();
        prop_assert!(large <= small / 8 + 1, "{large} vs {small}");
    }

    /// Midpoint and trapezoid tensor rules integrate affine functions
    /// exactly.
    #[test]
    fn quadrature_exact_on_affine(
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        c in -2.0..2.0f64,
        lo0 in -1.0..0.0f64,
        hi0 in 0.1..1.0f64,
    ) {
        let f = move |t: &[f64]| a * t[0] + b * t[1] + c;
        let lo = [lo0, -0.5];
        let hi = [hi0, 0.75];
        let vol = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let exact = vol * (a * 0.5 * (lo[0] + hi[0]) + b * 0.5 * (lo[1] + hi[1]) + c);
        for rule in [QuadRule::Midpoint, QuadRule::Trapezoid] {
            let got = tensor_quadrature(&f, &lo, &hi, 6, rule);
            prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// h scales linearly with the configuration in flat spaces.
    #[test]
    fn h_scaling_covariance(t in 0.4..1.5f64, lambda in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let s = euclid(2);
        let tol = Tolerances::for_radius(1.0).with_samples(256).with_seed(5);
        let base = h_value(
            &s,
            &epoint(&s, &[0.0, 0.0]),
            &[epoint(&s, &[1.0, 0.0])],
            1.0,
            &[t],
            &tol,
        )
        .unwrap();
        let scaled = h_value(
            &s,
            &epoint(&s, &[0.0, 0.0]),
            &[epoint(&s, &[lambda, 0.0])],
            lambda,
            &[t * lambda],
            &Tolerances::for_radius(lambda).with_samples(256).with_seed(5),
        )
        .unwrap();
        prop_assert!((scaled - lambda * base).abs() <= 1e-6 * lambda * base.max(1e-9));
    }

    /// Refining the checker grid never raises the reported constant beyond
    /// solver noise.
    #[test]
    fn grid_refinement_is_monotone(beta in 1.05..1.4f64) {
        let s = euclid(2);
        let mut query = TetraQuery {
            p: epoint(&s, &[0.0, 0.0]),
            space: s.clone(),
            r: 1.0,
            n: 2,
            alpha: 0.8,
            beta,
            c_target: None,
            apexes: Some(vec![epoint(&s, &[1.0, 0.0])]),
            tol: Tolerances::for_radius(1.0).with_samples(256).with_seed(6),
        };
        query.tol.grid_m = 5;
        let coarse = check_tetrahedral(&query).unwrap().c_best;
        query.tol.grid_m = 17;
        let fine = check_tetrahedral(&query).unwrap().c_best;
        prop_assert!(fine <= coarse + 1e-6, "fine {fine} vs coarse {coarse}");
    }
}
