//! Differential and algebraic oracles for the kinematics layer: finite
//! differences for the Jacobian and Hessians, the cofactor identity for the
//! adjugate, line-geometry constructions for the singularity scalar, and
//! full round trips for the direct kinematics solver.

mod common;

use common::{
    parse_ref, rng, uniform, wide_platform_geometry, REF_CUSPS_WIDE_L1_14_98,
};
use cuspidal_core::geometry::{
    constraint_residuals, pose_to_configuration, pose_to_joints, wrap_angle, Configuration,
    SlicePose,
};
use cuspidal_core::kinematics::{
    adjoint_and_kernels, coincidence_multiplicity, cusp_residual, direct_kinematics, hessians,
    jacobian, singularity_residual,
};
use cuspidal_core::{digits_to_bits, BigReal, Scalar};
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;

fn random_config_f64(rng: &mut ChaCha8Rng) -> Configuration<f64> {
    Configuration {
        lengths: [
            uniform(rng, 2.0, 40.0),
            uniform(rng, 2.0, 40.0),
            uniform(rng, 2.0, 40.0),
        ],
        theta: [
            uniform(rng, -3.1, 3.1),
            uniform(rng, -3.1, 3.1),
            uniform(rng, -3.1, 3.1),
        ],
    }
}

/// Every Jacobian entry matches a central finite difference of the
/// constraint residuals in double precision.
#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = rng(21);
    let geom = wide_platform_geometry::<f64>(53);
    let step = 1e-7;
    for _ in 0..200 {
        let config = random_config_f64(&mut rng);
        let jac = jacobian(&geom, &config);
        let scale = jac
            .m
            .iter()
            .flatten()
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(1.0);
        for j in 0..3 {
            let mut hi = config.clone();
            hi.theta[j] += step;
            let mut lo = config.clone();
            lo.theta[j] -= step;
            let ghi = constraint_residuals(&geom, &hi);
            let glo = constraint_residuals(&geom, &lo);
            for i in 0..3 {
                let fd = (ghi[i] - glo[i]) / (2.0 * step);
                let err = (fd - jac.m[i][j]).abs() / scale;
                assert!(
                    err < 1e-6,
                    "entry ({i},{j}): fd {fd:.9e} vs {:.9e}, rel {err:.2e}",
                    jac.m[i][j]
                );
            }
        }
    }
}

/// Every Hessian entry matches a central finite difference of the Jacobian
/// in double precision.
#[test]
fn hessians_match_finite_differences() {
    let mut rng = rng(22);
    let geom = wide_platform_geometry::<f64>(53);
    let step = 1e-6;
    for _ in 0..200 {
        let config = random_config_f64(&mut rng);
        let h = hessians(&geom, &config);
        let hs = [&h.h1, &h.h2, &h.h3];
        let scale = hs
            .iter()
            .flat_map(|m| m.iter().flatten())
            .fold(0.0f64, |a, v| a.max(v.abs()))
            .max(1.0);
        for j in 0..3 {
            let mut hi = config.clone();
            hi.theta[j] += step;
            let mut lo = config.clone();
            lo.theta[j] -= step;
            let jhi = jacobian(&geom, &hi);
            let jlo = jacobian(&geom, &lo);
            for i in 0..3 {
                for k in 0..3 {
                    let fd = (jhi.m[i][k] - jlo.m[i][k]) / (2.0 * step);
                    let err = (fd - hs[i][k][j]).abs() / scale;
                    assert!(
                        err < 1e-5,
                        "H{i}[{k}][{j}]: fd {fd:.9e} vs {:.9e}, rel {err:.2e}",
                        hs[i][k][j]
                    );
                }
            }
        }
    }
}

/// The adjugate must satisfy `adj(J)·J = det(J)·I` entrywise — the cofactor
/// identity, checked at extended precision against an absolute tolerance of
/// `10^-(digits-15)`.
#[test]
fn adjugate_satisfies_cofactor_identity() {
    const DIGITS: i32 = 60;
    let bits = digits_to_bits(DIGITS as u32);
    let mut rng = rng(23);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let tol = BigReal::exp10(-(DIGITS - 15), bits);
    let mut checked = 0;
    while checked < 1000 {
        let config = Configuration {
            lengths: [
                BigReal::from_f64(uniform(&mut rng, 2.0, 40.0), bits),
                BigReal::from_f64(uniform(&mut rng, 2.0, 40.0), bits),
                BigReal::from_f64(uniform(&mut rng, 2.0, 40.0), bits),
            ],
            theta: [
                BigReal::from_f64(uniform(&mut rng, -3.1, 3.1), bits),
                BigReal::from_f64(uniform(&mut rng, -3.1, 3.1), bits),
                BigReal::from_f64(uniform(&mut rng, -3.1, 3.1), bits),
            ],
        };
        let Ok(data) = adjoint_and_kernels(&geom, &config) else {
            continue;
        };
        let jac = jacobian(&geom, &config);
        let det = jac.det();
        for i in 0..3 {
            for j in 0..3 {
                let mut entry = BigReal::zero();
                for l in 0..3 {
                    entry = entry.add_ref(&data.adj[i][l].mul_ref(&jac.m[l][j]));
                }
                let expect = if i == j { det.clone() } else { BigReal::zero() };
                let err = entry.sub_ref(&expect).abs();
                assert!(
                    err < tol,
                    "adj·J deviates at ({i},{j}) by {:.3e}",
                    err.to_f64()
                );
            }
        }
        checked += 1;
    }
}

/// Three leg lines built to pass through one common point are singular by
/// construction; the singularity scalar must vanish there.
#[test]
fn concurrent_leg_lines_are_singular()  {
    let bits = digits_to_bits(60);
    let mut rng = rng(24);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let anchors = [
        (BigReal::zero(), BigReal::zero()),
        (geom.a2x.clone(), BigReal::zero()),
        (geom.a3x.clone(), geom.a3y.clone()),
    ];
    let tol = BigReal::exp10(-45, bits);
    for _ in 0..50 {
        let px = BigReal::from_f64(uniform(&mut rng, -20.0, 20.0), bits);
        let py = BigReal::from_f64(uniform(&mut rng, -20.0, 20.0), bits);
        let theta = std::array::from_fn(|i| {
            py.sub_ref(&anchors[i].1).atan2(&px.sub_ref(&anchors[i].0))
        });
        let res = singularity_residual(&geom, &theta);
        assert!(
            res.abs() < tol,
            "concurrent lines through ({:.2}, {:.2}) give residual {:.3e}",
            px.to_f64(),
            py.to_f64(),
            res.abs().to_f64()
        );
    }
}

/// Parallel leg lines are concurrent at infinity — also singular.
#[test]
fn parallel_leg_lines_are_singular() {
    let bits = digits_to_bits(60);
    let mut rng = rng(25);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let tol = BigReal::exp10(-45, bits);
    for _ in 0..50 {
        let a = BigReal::from_f64(uniform(&mut rng, -3.1, 3.1), bits);
        let theta = [a.clone(), a.clone(), a.clone()];
        assert!(singularity_residual(&geom, &theta).abs() < tol);
    }
    // Generic angle triples sit well away from the singular set.
    for _ in 0..20 {
        let theta = std::array::from_fn(|_| {
            BigReal::from_f64(uniform(&mut rng, -3.1, 3.1), bits)
        });
        assert!(singularity_residual(&geom, &theta).abs() > BigReal::from_f64(1e-3, bits));
    }
}

/// The coalescence scalar vanishes at a known triple-coincidence point and
/// stays well away from zero at a generic pose.
#[test]
fn cusp_residual_separates_cusps_from_generic_poses() {
    let bits = digits_to_bits(60);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let [alpha_deg, theta1_deg, _, _] = parse_ref(&REF_CUSPS_WIDE_L1_14_98[0], bits);
    let to_rad = BigReal::pi(bits).div_ref(&BigReal::from_i64(180, bits));
    let pose = SlicePose {
        l1: BigReal::parse_decimal("14.98", bits).unwrap(),
        alpha: alpha_deg.mul_ref(&to_rad),
        theta1: theta1_deg.mul_ref(&to_rad),
    };
    let eps = BigReal::exp10(-30, bits);
    let config = pose_to_configuration(&geom, &pose, &eps).unwrap();
    let at_cusp = cusp_residual(&geom, &config).unwrap();
    assert!(
        at_cusp.abs() < BigReal::exp10(-18, bits),
        "coalescence scalar at a reference cusp: {:.3e}",
        at_cusp.abs().to_f64()
    );

    let generic = Configuration {
        lengths: [
            BigReal::from_f64(14.98, bits),
            BigReal::from_f64(21.0, bits),
            BigReal::from_f64(17.0, bits),
        ],
        theta: [
            BigReal::from_f64(0.4, bits),
            BigReal::from_f64(1.3, bits),
            BigReal::from_f64(-2.0, bits),
        ],
    };
    let away = cusp_residual(&geom, &generic).unwrap();
    assert!(away.abs() > BigReal::from_f64(1e-6, bits));
}

/// One hundred random consistent joint vectors: the direct kinematics must
/// return the generating pose among its modes (100% recovery), and every
/// returned mode must itself satisfy the constraints and reproduce the
/// joint lengths.
#[test]
fn direct_kinematics_round_trip_on_random_configurations() {
    const DIGITS: u32 = 30;
    let bits = digits_to_bits(DIGITS);
    let mut rng = rng(26);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let cluster_tol = BigReal::from_f64(1e-3, bits);
    let eps = BigReal::from_f64(1e-8, bits);
    let match_tol = 1e-9f64;
    let len_tol = BigReal::exp10(-((DIGITS as i32) - 12), bits);

    let mut recovered = 0;
    let mut tried = 0;
    while tried < 100 {
        let pose = SlicePose {
            l1: BigReal::from_f64(uniform(&mut rng, 5.0, 40.0), bits),
            alpha: BigReal::from_f64(uniform(&mut rng, -3.0, 3.0), bits),
            theta1: BigReal::from_f64(uniform(&mut rng, -3.0, 3.0), bits),
        };
        let Ok(config) = pose_to_configuration(&geom, &pose, &eps) else {
            continue;
        };
        tried += 1;

        let modes = direct_kinematics(&geom, &config.lengths, DIGITS, &cluster_tol)
            .expect("solver must not fail on a consistent joint vector");
        assert!(!modes.is_empty(), "a reachable joint vector has solutions");

        let hit = modes.iter().any(|m| {
            wrap_angle(&m.theta[0].sub_ref(&config.theta[0])).abs().to_f64() < match_tol
                && wrap_angle(&m.alpha.sub_ref(&pose.alpha)).abs().to_f64() < match_tol
        });
        if hit {
            recovered += 1;
        }

        for m in &modes {
            let mc = Configuration {
                lengths: config.lengths.clone(),
                theta: m.theta.clone(),
            };
            for gamma in constraint_residuals(&geom, &mc) {
                assert!(
                    gamma.abs() < len_tol,
                    "mode violates constraints by {:.3e}",
                    gamma.abs().to_f64()
                );
            }
            let mode_pose = SlicePose {
                l1: config.lengths[0].clone(),
                alpha: m.alpha.clone(),
                theta1: m.theta[0].clone(),
            };
            let (l2, l3, _, _) = pose_to_joints(&geom, &mode_pose, &eps)
                .expect("mode poses have well-defined legs");
            assert!(l2.sub_ref(&config.lengths[1]).abs() < len_tol);
            assert!(l3.sub_ref(&config.lengths[2]).abs() < len_tol);
        }
    }
    assert_eq!(recovered, 100, "only {recovered}/100 joint vectors recovered");
}

/// An unreachable joint vector has no assembly modes, and an empty mode
/// list reports coincidence multiplicity zero.
#[test]
fn unreachable_lengths_yield_no_modes() {
    let bits = digits_to_bits(30);
    let geom = wide_platform_geometry::<BigReal>(bits);
    let lengths = [
        BigReal::from_f64(1000.0, bits),
        BigReal::from_f64(1.0, bits),
        BigReal::from_f64(1.0, bits),
    ];
    let tol = BigReal::from_f64(1e-3, bits);
    let modes = direct_kinematics(&geom, &lengths, 30, &tol).unwrap();
    assert!(modes.is_empty());
    assert_eq!(coincidence_multiplicity(&modes, &tol), 0);
}
