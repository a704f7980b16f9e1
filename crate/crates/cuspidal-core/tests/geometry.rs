//! Construction oracles for the geometric layer: every derived quantity is
//! checked against an independent reconstruction, never against itself.

mod common;

use common::{flat_platform_geometry, rng, scaled_copy_geometry, uniform, wide_platform_geometry};
use cuspidal_core::geometry::{
    constraint_residuals, load_geometry_json, pose_to_configuration, slice_lengths,
    validate_geometry, vertex_positions, wrap_angle, GeometryError, GeometryLoadError, SlicePose,
};
use cuspidal_core::geometry::ManipulatorGeometry;
use cuspidal_core::{digits_to_bits, BigReal, Scalar};

const DIGITS: u32 = 60;

fn bits() -> u32 {
    digits_to_bits(DIGITS)
}

fn big(v: f64) -> BigReal {
    BigReal::from_f64(v, bits())
}

fn random_pose(
    rng: &mut rand_chacha::ChaCha8Rng,
    l1_lo: f64,
    l1_hi: f64,
) -> SlicePose<BigReal> {
    SlicePose {
        l1: big(uniform(rng, l1_lo, l1_hi)),
        alpha: big(uniform(rng, -3.1, 3.1)),
        theta1: big(uniform(rng, -3.1, 3.1)),
    }
}

/// The distances between platform vertices reconstructed from the legs must
/// equal the declared platform sides: the defining property of a pose.
#[test]
fn platform_sides_recovered_from_reconstructed_vertices() {
    let mut rng = rng(11);
    let tol = BigReal::exp10(-((DIGITS as i32) - 10), bits());
    for (g, lo, hi) in [
        (wide_platform_geometry::<BigReal>(bits()), 5.0, 40.0),
        (flat_platform_geometry::<BigReal>(bits()), 3.0, 45.0),
        (scaled_copy_geometry::<BigReal>(bits()), 4.0, 30.0),
    ] {
        for _ in 0..40 {
            let pose = random_pose(&mut rng, lo, hi);
            let config = match pose_to_configuration(&g, &pose, &big(1e-8)) {
                Ok(c) => c,
                Err(GeometryError::DegenerateLeg { .. }) => continue,
                Err(e) => panic!("unexpected pose failure: {e}"),
            };
            let b = vertex_positions(&g, &config);
            let sides = [&g.d1, &g.d2, &g.d3];
            for i in 0..3 {
                let j = (i + 1) % 3;
                let dx = b[j][0].sub_ref(&b[i][0]);
                let dy = b[j][1].sub_ref(&b[i][1]);
                let dist = dx.mul_ref(&dx).add_ref(&dy.mul_ref(&dy)).sqrt();
                let err = dist.sub_ref(sides[i]).abs();
                assert!(
                    err < tol,
                    "side {} off by {:.3e}",
                    i + 1,
                    err.to_f64()
                );
            }
        }
    }
}

/// Constraint residuals on a configuration assembled by the library itself
/// must vanish to working precision.
#[test]
fn constraint_residuals_vanish_on_consistent_configurations() {
    let mut rng = rng(12);
    let g = wide_platform_geometry::<BigReal>(bits());
    let tol = BigReal::exp10(-((DIGITS as i32) - 10), bits());
    let mut checked = 0;
    while checked < 60 {
        let pose = random_pose(&mut rng, 5.0, 40.0);
        let Ok(config) = pose_to_configuration(&g, &pose, &big(1e-8)) else {
            continue;
        };
        for gamma in constraint_residuals(&g, &config) {
            assert!(gamma.abs() < tol, "residual {:.3e}", gamma.to_f64());
        }
        checked += 1;
    }
}

/// Lengths from `slice_lengths` agree with the full joint completion
/// wherever the latter is defined.
#[test]
fn slice_lengths_agree_with_joint_completion() {
    let mut rng = rng(13);
    let g = flat_platform_geometry::<BigReal>(bits());
    let tol = BigReal::exp10(-((DIGITS as i32) - 10), bits());
    for _ in 0..60 {
        let pose = random_pose(&mut rng, 3.0, 45.0);
        let (l2, l3) = slice_lengths(&g, &pose);
        if let Ok(config) = pose_to_configuration(&g, &pose, &big(1e-8)) {
            assert!(l2.sub_ref(&config.lengths[1]).abs() < tol);
            assert!(l3.sub_ref(&config.lengths[2]).abs() < tol);
        }
    }
}

/// Wrapping must land in `(−π, π]` without moving the angle off its circle
/// position.
#[test]
fn wrap_angle_preserves_circle_position() {
    let mut rng = rng(14);
    let pi = BigReal::pi(bits());
    let tol = BigReal::exp10(-((DIGITS as i32) - 10), bits());
    for _ in 0..200 {
        let a = big(uniform(&mut rng, -50.0, 50.0));
        let w = wrap_angle(&a);
        assert!(w <= pi && w > pi.neg_ref(), "wrapped outside range");
        assert!(w.sin().sub_ref(&a.sin()).abs() < tol);
        assert!(w.cos().sub_ref(&a.cos()).abs() < tol);
    }
}

/// The stored platform-apex split `(d3 cos β, d3 sin β)` must place the
/// third vertex at the declared distances from both base vertices of the
/// platform triangle.
#[test]
fn third_vertex_split_reproduces_platform_sides() {
    let tol = BigReal::exp10(-((DIGITS as i32) - 10), bits());
    for g in [
        wide_platform_geometry::<BigReal>(bits()),
        scaled_copy_geometry::<BigReal>(bits()),
    ] {
        let along = g.third_vertex_along();
        let normal = g.third_vertex_normal();
        let d3 = along.mul_ref(&along).add_ref(&normal.mul_ref(&normal)).sqrt();
        assert!(d3.sub_ref(&g.d3).abs() < tol);
        let dx = along.sub_ref(&g.d1);
        let d2 = dx.mul_ref(&dx).add_ref(&normal.mul_ref(&normal)).sqrt();
        assert!(d2.sub_ref(&g.d2).abs() < tol);
    }
}

/// An exactly flat platform (one side the sum of the others) is a
/// legitimate machine and must validate, with a vanishing altitude.
#[test]
fn flat_platform_validates_with_zero_altitude() {
    let g = flat_platform_geometry::<BigReal>(bits());
    assert!(g.h.abs() < BigReal::exp10(-((DIGITS as i32) - 15), bits()));
}

#[test]
fn impossible_platform_triangles_are_rejected() {
    let err = validate_geometry(big(10.0), big(0.0), big(10.0), big(1.0), big(1.0), big(5.0))
        .unwrap_err();
    assert_eq!(err, GeometryError::TriangleInequalityViolated);
    let err = validate_geometry(big(10.0), big(0.0), big(10.0), big(-1.0), big(2.0), big(2.0))
        .unwrap_err();
    assert_eq!(err, GeometryError::NonPositiveSide { side: 1 });
    let err = validate_geometry(big(10.0), big(5.0), big(0.0), big(3.0), big(4.0), big(5.0))
        .unwrap_err();
    assert_eq!(err, GeometryError::CollinearBase);
}

/// JSON input carries its decimal text straight into the extended-precision
/// parser — a value with more digits than an `f64` holds must survive
/// exactly as written.
#[test]
fn geometry_json_preserves_long_decimal_literals() {
    let text = r#"{
        "a2x": 15.910000000000000000000000000001,
        "a3x": 0, "a3y": 10, "d1": 17.04, "d2": 16.54, "d3": 20.84
    }"#;
    let g: ManipulatorGeometry<BigReal> = load_geometry_json(text, bits()).unwrap();
    let short = BigReal::parse_decimal("15.91", bits()).unwrap();
    let tail = g.a2x.sub_ref(&short);
    let expected = BigReal::exp10(-30, bits());
    assert!(
        tail.sub_ref(&expected).abs() < BigReal::exp10(-40, bits()),
        "long literal lost precision: tail = {:.3e}",
        tail.to_f64()
    );
}

#[test]
fn geometry_json_rejects_malformed_documents() {
    assert!(matches!(
        load_geometry_json::<BigReal>("not json", bits()),
        Err(GeometryLoadError::Json(_))
    ));
    assert!(matches!(
        load_geometry_json::<BigReal>(r#"{"a2x": 1}"#, bits()),
        Err(GeometryLoadError::MissingField("a3x"))
    ));
    assert!(matches!(
        load_geometry_json::<BigReal>(
            r#"{"a2x": 10, "a3x": 0, "a3y": 10, "d1": 1, "d2": 1, "d3": 5}"#,
            bits()
        ),
        Err(GeometryLoadError::Invalid(GeometryError::TriangleInequalityViolated))
    ));
}

/// Everything above holds in plain double precision too.
#[test]
fn double_precision_round_trip() {
    let mut rng = rng(15);
    let g = wide_platform_geometry::<f64>(53);
    let mut checked = 0;
    while checked < 60 {
        let pose = SlicePose {
            l1: uniform(&mut rng, 5.0, 40.0),
            alpha: uniform(&mut rng, -3.1, 3.1),
            theta1: uniform(&mut rng, -3.1, 3.1),
        };
        let Ok(config) = pose_to_configuration(&g, &pose, &1e-8) else {
            continue;
        };
        for gamma in constraint_residuals(&g, &config) {
            assert!(gamma.abs() < 1e-9, "residual {gamma:.3e}");
        }
        checked += 1;
    }
}
