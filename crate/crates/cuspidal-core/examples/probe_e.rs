use cuspidal_core::geometry::{pose_to_configuration, SlicePose};
use cuspidal_core::kinematics::cusp_residual;
use cuspidal_core::{digits_to_bits, BigReal, Scalar};

fn main() {
    let bits = digits_to_bits(90);
    let geom = cuspidal_core::geometry::validate_geometry(
        BigReal::from_f64(15.91, bits), BigReal::from_f64(0.0, bits), BigReal::from_f64(10.0, bits),
        BigReal::from_f64(17.04, bits), BigReal::from_f64(16.54, bits), BigReal::from_f64(20.84, bits),
    ).unwrap();
    let to_rad = BigReal::pi(bits).div_ref(&BigReal::from_i64(180, bits));
    let a = BigReal::parse_decimal("50.67856049651351222282046", bits).unwrap().mul_ref(&to_rad);
    let t1 = BigReal::parse_decimal("-69.12937606148826559563169", bits).unwrap().mul_ref(&to_rad);
    let l1 = BigReal::parse_decimal("14.98", bits).unwrap();
    let eps = BigReal::exp10(-40, bits);
    let ev = |da: f64, dt: f64| -> f64 {
        let pose = SlicePose {
            l1: l1.clone(),
            alpha: a.add_ref(&BigReal::from_f64(da, bits)),
            theta1: t1.add_ref(&BigReal::from_f64(dt, bits)),
        };
        let c = pose_to_configuration(&geom, &pose, &eps).unwrap();
        cusp_residual(&geom, &c).unwrap().to_f64()
    };
    let e0 = ev(0.0, 0.0);
    let d = 1e-20;
    println!("E(cusp)     = {:+.6e}", e0);
    println!("dE/dalpha   = {:+.6e}", (ev(d, 0.0) - e0) / d);
    println!("dE/dtheta1  = {:+.6e}", (ev(0.0, d) - e0) / d);
    // second sample row: an ordinary cusp (larger legs)
    let a2 = BigReal::parse_decimal("170.3769528235385325163893", bits).unwrap().mul_ref(&to_rad);
    let t12 = BigReal::parse_decimal("-10.65216034793898010705836", bits).unwrap().mul_ref(&to_rad);
    let ev2 = |da: f64| -> f64 {
        let pose = SlicePose { l1: l1.clone(), alpha: a2.add_ref(&BigReal::from_f64(da, bits)), theta1: t12.clone() };
        let c = pose_to_configuration(&geom, &pose, &eps).unwrap();
        cusp_residual(&geom, &c).unwrap().to_f64()
    };
    println!("E(cusp B2)  = {:+.6e}  dE/da = {:+.6e}", ev2(0.0), (ev2(d) - ev2(0.0)) / d);
}
