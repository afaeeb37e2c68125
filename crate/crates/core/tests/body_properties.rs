//! Property tests for the geometric functionals: translation and scaling
//! behavior, symmetry, and the isoperimetric comparisons against the
//! extremal balls.

use orthosteklov::body::{ball_reference_2d, ConvexBody, Polygon2d};
use orthosteklov::lp::Exponent;
use proptest::prelude::*;

fn random_body(seed: u64) -> ConvexBody {
    ConvexBody::random_polygon(seed)
}

fn as_polygon(body: &ConvexBody) -> &Polygon2d {
    match body {
        ConvexBody::Polygon(p) => p,
        _ => panic!("expected polygon"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_invariance(seed in 0u64..500, tx in -3.0..3.0f64, ty in -3.0..3.0f64) {
        let body = random_body(seed);
        let moved = body.translated(&[tx, ty]).unwrap();
        prop_assert!((body.volume() - moved.volume()).abs() <= 1e-12 * body.volume());
        for p in [Exponent::ONE, Exponent::Finite(1.5), Exponent::TWO, Exponent::Infinity] {
            let a = body.anisotropic_perimeter(p);
            let b = moved.anisotropic_perimeter(p);
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
        prop_assert!((body.l1_diameter() - moved.l1_diameter()).abs() <= 1e-12 * body.l1_diameter());
    }

    #[test]
    fn shape_ratio_translation_invariant_after_recentering(seed in 0u64..200, tx in -2.0..2.0f64, ty in -2.0..2.0f64) {
        let body = random_body(seed);
        let p = 2.5;
        let recentred_shape = |b: &ConvexBody| -> f64 {
            let c = b.boundary_p_center(p).unwrap();
            let centered = b.translated(&[-c[0], -c[1]]).unwrap();
            centered.shape_functional(p).unwrap()
        };
        let a = recentred_shape(&body);
        let b = recentred_shape(&body.translated(&[tx, ty]).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn scaling_laws(seed in 0u64..500, pi in 0usize..3) {
        let body = random_body(seed);
        let p = [1.5, 2.0, 3.0][pi];
        let n = 2.0;
        let v = body.volume();
        let per = body.anisotropic_perimeter(Exponent::finite(p).unwrap());
        let diam = body.l1_diameter();
        let c = body.boundary_p_center(p).unwrap();
        let centered = body.translated(&[-c[0], -c[1]]).unwrap();
        let mom = centered.boundary_momentum(p).unwrap();
        let shape = centered.shape_functional(p).unwrap();
        for t in [0.5, 2.0, 3.7] {
            let scaled = body.scaled(t).unwrap();
            let scaled_centered = centered.scaled(t).unwrap();
            prop_assert!((scaled.volume() - t.powf(n) * v).abs() <= 1e-10 * scaled.volume());
            let sp = scaled.anisotropic_perimeter(Exponent::finite(p).unwrap());
            prop_assert!((sp - t.powf(n - 1.0) * per).abs() <= 1e-10 * sp);
            prop_assert!((scaled.l1_diameter() - t * diam).abs() <= 1e-12 * t * diam);
            let sm = scaled_centered.boundary_momentum(p).unwrap();
            prop_assert!((sm - t.powf(p + n - 1.0) * mom).abs() <= 1e-9 * sm, "momentum t={t}");
            let ss = scaled_centered.shape_functional(p).unwrap();
            prop_assert!((ss - shape).abs() <= 1e-10 * shape, "shape ratio t={t}");
        }
    }

    #[test]
    fn symmetry_under_axis_swap_and_reflection(seed in 0u64..500) {
        let body = random_body(seed);
        let poly = as_polygon(&body);
        // swapping the axes reverses orientation, so walk the vertices backwards
        let swapped = ConvexBody::polygon(
            poly.vertices().iter().rev().map(|&[x, y]| [y, x]).collect(),
        ).unwrap();
        let reflected = ConvexBody::polygon(
            poly.vertices().iter().rev().map(|&[x, y]| [-x, y]).collect(),
        ).unwrap();
        for other in [&swapped, &reflected] {
            prop_assert!((body.volume() - other.volume()).abs() <= 1e-12 * body.volume());
            prop_assert!((body.l1_diameter() - other.l1_diameter()).abs() <= 1e-12 * body.l1_diameter());
            for p in [Exponent::ONE, Exponent::Finite(1.5), Exponent::TWO, Exponent::Infinity] {
                let a = body.anisotropic_perimeter(p);
                let b = other.anisotropic_perimeter(p);
                prop_assert!((a - b).abs() <= 1e-11 * a);
            }
            let pm = 2.5;
            let ca = body.boundary_p_center(pm).unwrap();
            let cb = other.boundary_p_center(pm).unwrap();
            let ma = body.translated(&[-ca[0], -ca[1]]).unwrap().boundary_momentum(pm).unwrap();
            let mb = other.translated(&[-cb[0], -cb[1]]).unwrap().boundary_momentum(pm).unwrap();
            prop_assert!((ma - mb).abs() <= 1e-9 * ma);
        }
    }

    #[test]
    fn isoperimetric_ratio_bounded_by_ball(seed in 0u64..500, pi in 0usize..5) {
        let body = random_body(seed);
        let v = body.volume();
        let exps = [
            Exponent::ONE,
            Exponent::Finite(1.5),
            Exponent::TWO,
            Exponent::Finite(3.0),
            Exponent::Infinity,
        ];
        let p = exps[pi];
        let lhs = v.sqrt() / body.anisotropic_perimeter(p);
        let rhs = match p {
            Exponent::Finite(pf) if pf > 1.0 => {
                let r = ball_reference_2d(pf).unwrap();
                r.volume.sqrt() / r.perimeter
            }
            _ => {
                let w = ConvexBody::ball(p, 2, 1.0, None).unwrap();
                w.volume().sqrt() / w.anisotropic_perimeter(p)
            }
        };
        prop_assert!(lhs <= rhs + 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn diameter_from_vertices_equals_dense_sampling(seed in 0u64..500) {
        let body = random_body(seed);
        let poly = as_polygon(&body);
        let exact = body.l1_diameter();
        // sample points along every edge and take pairwise l1 distances
        let mut samples: Vec<[f64; 2]> = Vec::new();
        let m = 24;
        for e in poly.edges() {
            let a = poly.vertices()[e.from];
            let b = poly.vertices()[e.to];
            for k in 0..m {
                let t = k as f64 / m as f64;
                samples.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        let mut sampled = 0.0_f64;
        for i in 0..samples.len() {
            for j in (i + 1)..samples.len() {
                let d = (samples[i][0] - samples[j][0]).abs()
                    + (samples[i][1] - samples[j][1]).abs();
                sampled = sampled.max(d);
            }
        }
        prop_assert!(sampled <= exact + 1e-9);
        prop_assert!(exact - sampled <= 1e-9 + exact * 0.0, "sampled {sampled} vs exact {exact}");
    }
}

#[test]
fn perimeter_ratio_identity_on_exact_balls() {
    // N V(W_p) = P_p(W_p) exactly for the polytope balls in any dimension
    for dim in [2usize, 3, 4, 5] {
        for p in [Exponent::ONE, Exponent::Infinity] {
            let w = ConvexBody::ball(p, dim, 1.0, None).unwrap();
            let nv = dim as f64 * w.volume();
            let pp = w.anisotropic_perimeter(p);
            assert!((nv - pp).abs() <= 1e-12 * pp, "dim {dim}");
        }
    }
}

#[test]
fn richardson_reference_has_clean_order() {
    for p in [1.3, 1.5, 2.0, 3.0, 5.0, 8.0] {
        let r = ball_reference_2d(p).unwrap();
        assert!(
            (r.order_ratio - 4.0).abs() < 0.5,
            "p={p}: convergence ratio {}",
            r.order_ratio
        );
        // the defect is the size of the last correction (the O(n^-2) error
        // before extrapolation), not the extrapolated accuracy
        assert!(r.richardson_defect < 1e-5, "p={p}: defect {}", r.richardson_defect);
    }
}
