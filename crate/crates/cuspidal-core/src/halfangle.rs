//! Internal half-angle algebra shared by the direct-kinematics reduction and
//! the cusp pipeline.
//!
//! With `t = tan(α/2)` and `t1 = tan(θ₁/2)`, every trigonometric quantity of
//! the slice becomes a rational function whose denominator is a product of
//! powers of `ω = 1 + t²` and `ω₁ = 1 + t₁²` — both strictly positive, so
//! multiplying them away preserves zero sets and signs. This module builds
//! the numerator polynomials once per slice and provides the bookkeeping
//! ([`RatPoly`]) that tracks how many `ω`/`ω₁` factors each intermediate
//! quantity implicitly divides by, so that sums of differently-cleared
//! terms line up correctly.

use crate::geometry::ManipulatorGeometry;
use crate::polysolve::{BiPoly, Var};
use crate::scalar::Scalar;

/// The elementary half-angle numerators of one slice, all sharing a fixed
/// `L₁`. Naming: a leading `cos`/`sin` block is the numerator over one `ω`
/// (for `α`) or one `ω₁` (for `θ₁`); the four leg blocks `c2 s2 c3 s3` are
/// `Lᵢ cos θᵢ · ω ω₁` and `Lᵢ sin θᵢ · ω ω₁` — note they carry the leg
/// *length* as a factor, which is exactly what clears the `1/Lᵢ` poles of
/// the raw leg angles.
pub(crate) struct HalfAngleBlocks<T> {
    /// `ω = 1 + t²`.
    pub w: BiPoly<T>,
    /// `ω₁ = 1 + t₁²`.
    pub w1: BiPoly<T>,
    /// `cos θ₁ · ω₁ = 1 − t₁²`.
    pub c1: BiPoly<T>,
    /// `sin θ₁ · ω₁ = 2t₁`.
    pub s1: BiPoly<T>,
    /// `L₂ cos θ₂ · ω ω₁`.
    pub c2: BiPoly<T>,
    /// `L₂ sin θ₂ · ω ω₁`.
    pub s2: BiPoly<T>,
    /// `L₃ cos θ₃ · ω ω₁`.
    pub c3: BiPoly<T>,
    /// `L₃ sin θ₃ · ω ω₁`.
    pub s3: BiPoly<T>,
}

/// Build the blocks for a slice at `l1`, with constants at `bits` precision.
pub(crate) fn half_angle_blocks<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    bits: u32,
) -> HalfAngleBlocks<T> {
    let g = geom.with_precision(bits);
    let l1 = l1.with_precision(bits);
    let one = T::one().with_precision(bits);
    let two = T::from_i64(2, bits);

    let mut w = BiPoly::zero(2, 0);
    w.set_coeff(0, 0, one.clone());
    w.set_coeff(2, 0, one.clone());

    let mut w1 = BiPoly::zero(0, 2);
    w1.set_coeff(0, 0, one.clone());
    w1.set_coeff(0, 2, one.clone());

    let mut ca = BiPoly::zero(2, 0);
    ca.set_coeff(0, 0, one.clone());
    ca.set_coeff(2, 0, one.neg_ref());

    let mut sa = BiPoly::zero(1, 0);
    sa.set_coeff(1, 0, two.clone());

    let mut c1 = BiPoly::zero(0, 2);
    c1.set_coeff(0, 0, one.clone());
    c1.set_coeff(0, 2, one.neg_ref());

    let mut s1 = BiPoly::zero(0, 1);
    s1.set_coeff(0, 1, two);

    let ww1 = w.mul(&w1);

    // Loop closure of leg 2: B₂ − A₂ = B₁ + d1 (cos α, sin α) − A₂.
    //   L₂ sin θ₂ = L₁ sin θ₁ + d1 sin α
    //   L₂ cos θ₂ = −a2x + L₁ cos θ₁ + d1 cos α
    let s2 = s1
        .scale(&l1)
        .mul(&w)
        .add(&sa.scale(&g.d1).mul(&w1));
    let c2 = ww1
        .scale(&g.a2x.neg_ref())
        .add(&c1.scale(&l1).mul(&w))
        .add(&ca.scale(&g.d1).mul(&w1));

    // Loop closure of leg 3 through B₃ = B₁ + rot(beta off the platform
    // direction) with along/normal components (g3, h):
    //   L₃ sin θ₃ = −a3y + L₁ sin θ₁ + g3 sin α + h cos α
    //   L₃ cos θ₃ = −a3x + L₁ cos θ₁ + g3 cos α − h sin α
    let g3 = g.third_vertex_along();
    let s3 = ww1
        .scale(&g.a3y.neg_ref())
        .add(&s1.scale(&l1).mul(&w))
        .add(&sa.scale(&g3).mul(&w1))
        .add(&ca.scale(&g.h).mul(&w1));
    let c3 = ww1
        .scale(&g.a3x.neg_ref())
        .add(&c1.scale(&l1).mul(&w))
        .add(&ca.scale(&g3).mul(&w1))
        .sub(&sa.scale(&g.h).mul(&w1));

    HalfAngleBlocks { w, w1, c1, s1, c2, s2, c3, s3 }
}

impl<T: Scalar> HalfAngleBlocks<T> {
    /// Leg-closure polynomial `Lᵢ² (cos²+sin²) − Lᵢ²`, cleared and then
    /// stripped of its guaranteed `ω ω₁` factor: a degree-(2,2) polynomial
    /// whose real zero set is "leg `which` closes with length `l`".
    pub(crate) fn leg_closure(&self, which: u8, l: &T, strip_rel: &T) -> BiPoly<T> {
        let (c, s) = match which {
            2 => (&self.c2, &self.s2),
            3 => (&self.c3, &self.s3),
            _ => unreachable!("only legs 2 and 3 have closure polynomials"),
        };
        let ww1 = self.w.mul(&self.w1);
        let l2 = l.mul_ref(l);
        let raw = c
            .mul(c)
            .add(&s.mul(s))
            .sub(&ww1.mul(&ww1).scale(&l2));
        // (L cosθ·ωω₁)² + (L sinθ·ωω₁)² − L²ω²ω₁² = ωω₁ · (quadratic):
        // both terms share one ωω₁ factor algebraically, so the division
        // is exact and its failure would mean the blocks are wrong.
        let once = raw
            .try_div_one_plus_square(Var::T, strip_rel)
            .expect("leg closure always carries an ω factor");
        once.try_div_one_plus_square(Var::T1, strip_rel)
            .expect("leg closure always carries an ω₁ factor")
    }
}

/// A bivariate polynomial together with the powers of `ω` and `ω₁` it is
/// implicitly divided by: the value represented is `num / (ω^p ω₁^q)`.
#[derive(Clone)]
pub(crate) struct RatPoly<T> {
    pub num: BiPoly<T>,
    pub p: u32,
    pub q: u32,
}

impl<T: Scalar> RatPoly<T> {
    pub fn new(num: BiPoly<T>, p: u32, q: u32) -> Self {
        RatPoly { num, p, q }
    }

    pub fn mul(&self, other: &Self) -> Self {
        RatPoly {
            num: self.num.mul(&other.num),
            p: self.p + other.p,
            q: self.q + other.q,
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        RatPoly { num: self.num.scale(s), p: self.p, q: self.q }
    }

    pub fn add(&self, other: &Self, blocks: &HalfAngleBlocks<T>) -> Self {
        let p = self.p.max(other.p);
        let q = self.q.max(other.q);
        let a = lift(&self.num, p - self.p, q - self.q, blocks);
        let b = lift(&other.num, p - other.p, q - other.q, blocks);
        RatPoly { num: a.add(&b), p, q }
    }
}

/// Multiply a numerator by `ω^dp ω₁^dq` to bring it onto a common
/// denominator.
fn lift<T: Scalar>(
    num: &BiPoly<T>,
    dp: u32,
    dq: u32,
    blocks: &HalfAngleBlocks<T>,
) -> BiPoly<T> {
    let mut out = num.clone();
    for _ in 0..dp {
        out = out.mul(&blocks.w);
    }
    for _ in 0..dq {
        out = out.mul(&blocks.w1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_geometry;

    fn blocks() -> HalfAngleBlocks<f64> {
        let g = validate_geometry(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).unwrap();
        half_angle_blocks(&g, &14.98, 53)
    }

    /// The blocks must reproduce plain trigonometric evaluation.
    #[test]
    fn blocks_match_direct_trigonometry() {
        use crate::geometry::{pose_to_joints, SlicePose};
        let g = validate_geometry(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).unwrap();
        let b = blocks();
        for (alpha, theta1) in [(0.3, -0.9), (-2.1, 1.7), (1.2, 2.9)] {
            let t = (alpha / 2.0f64).tan();
            let t1 = (theta1 / 2.0f64).tan();
            let w = 1.0 + t * t;
            let w1 = 1.0 + t1 * t1;
            let pose = SlicePose { l1: 14.98, alpha, theta1 };
            let (l2, l3, th2, th3) = pose_to_joints(&g, &pose, &1e-8).unwrap();
            let scale = w * w1;
            assert!((b.s2.eval(&t, &t1) - l2 * th2.sin() * scale).abs() < 1e-9);
            assert!((b.c2.eval(&t, &t1) - l2 * th2.cos() * scale).abs() < 1e-9);
            assert!((b.s3.eval(&t, &t1) - l3 * th3.sin() * scale).abs() < 1e-9);
            assert!((b.c3.eval(&t, &t1) - l3 * th3.cos() * scale).abs() < 1e-9);
        }
    }

    #[test]
    fn leg_closure_vanishes_exactly_on_the_circle() {
        use crate::geometry::{slice_lengths, SlicePose};
        let g = validate_geometry(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).unwrap();
        let b = blocks();
        let (alpha, theta1) = (0.8, -1.1);
        let pose = SlicePose { l1: 14.98, alpha, theta1 };
        let (l2, l3) = slice_lengths(&g, &pose);
        let t = (alpha / 2.0f64).tan();
        let t1 = (theta1 / 2.0f64).tan();
        let g2 = b.leg_closure(2, &l2, &1e-9);
        let g3 = b.leg_closure(3, &l3, &1e-9);
        assert_eq!((g2.deg_t(), g2.deg_t1()), (2, 2));
        assert_eq!((g3.deg_t(), g3.deg_t1()), (2, 2));
        assert!(g2.eval(&t, &t1).abs() < 1e-8 * g2.max_abs_coeff());
        assert!(g3.eval(&t, &t1).abs() < 1e-8 * g3.max_abs_coeff());
        // And off the circle it does not vanish.
        let wrong = l2 + 1.0;
        let g2w = b.leg_closure(2, &wrong, &1e-9);
        assert!(g2w.eval(&t, &t1).abs() > 1e-3);
    }

    #[test]
    fn rational_layer_addition_lines_up_denominators() {
        let b = blocks();
        let mut sa = BiPoly::zero(1, 0); // sin α · ω = 2t
        sa.set_coeff(1, 0, 2.0);
        let x = RatPoly::new(sa, 1, 0); // sin α
        let y = RatPoly::new(b.s1.clone(), 0, 1); // sin θ₁
        let sum = x.add(&y, &b);
        assert_eq!((sum.p, sum.q), (1, 1));
        let (alpha, theta1) = (0.5, 1.3);
        let t = (alpha / 2.0f64).tan();
        let t1 = (theta1 / 2.0f64).tan();
        let denom = (1.0 + t * t).powi(sum.p as i32) * (1.0 + t1 * t1).powi(sum.q as i32);
        let got = sum.num.eval(&t, &t1) / denom;
        assert!((got - (alpha.sin() + theta1.sin())).abs() < 1e-12);
    }
}
