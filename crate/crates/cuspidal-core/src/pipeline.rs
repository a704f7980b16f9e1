//! The slice pipeline: find every cusp point in a constant-`L₁` slice of the
//! joint space.
//!
//! In the half-angle chart `t = tan(α/2)`, `t₁ = tan(θ₁/2)` two polynomial
//! conditions describe a cusp:
//!
//! * `F₁(t, t₁)` — the singularity condition, the locus where the constraint
//!   Jacobian over the leg angles is rank-deficient (the legs' lines are
//!   concurrent or parallel);
//! * `E₁(t, t₁)` — the coalescence condition, the adjugate-kernel quadratic
//!   form that cuts out the points of the singular curve where the fold
//!   degenerates and a third direct-kinematics solution joins the pair.
//!
//! Eliminating `t` by a Sylvester resultant leaves a univariate polynomial in
//! `t₁`; its real roots are back-substituted into `F₁`, filtered by `E₁`,
//! refined by a two-dimensional Newton iteration, mapped to joint lengths,
//! and finally *verified*: a candidate counts as a cusp only when the direct
//! kinematics at its joint vector has exactly three coincident solutions.
//!
//! Platforms with collinear vertices make `E₁` factor through `F₁`, which
//! collapses the resultant identically; the pipeline then falls back to an
//! equivalent curve-tangency condition (stationarity of `L₂` along the
//! singular curve) and runs the same machinery.

use crate::geometry::{leg_vectors, wrap_angle, Configuration, ManipulatorGeometry, SlicePose};
use crate::halfangle::{half_angle_blocks, HalfAngleBlocks, RatPoly};
use crate::kinematics::{
    angle_distance, cusp_residual, direct_kinematics, singularity_residual, KinematicsError,
};
use crate::polysolve::{
    real_roots, solve_for_second_var, sylvester_resultant_in_t, BiPoly, PolyError, UniPoly, Var,
};
use crate::scalar::{digits_to_bits, Scalar};
use rayon::prelude::*;

/// Failures of the slice pipeline.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    /// Both the adjugate-based elimination and the curve-tangency fallback
    /// produced an identically vanishing resultant: the slice carries a
    /// continuum of coalescence points and has no isolated cusps to report.
    #[error("orientation elimination degenerated even after the tangency fallback")]
    DegenerateResultant,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Tuning knobs of the pipeline. `standard(digits)` gives the defaults used
/// throughout; they only need touching for unusually scaled geometries.
#[derive(Debug, Clone)]
pub struct PipelineOptions<T> {
    /// Target decimal working precision.
    pub digits: u32,
    /// Angle radius (radians) within which direct-kinematics solutions count
    /// as coincident.
    pub cluster_tol: T,
    /// Radius in the `(t, t₁)` plane below which two candidates merge.
    pub merge_radius: T,
    /// Leg length under which a leg's direction is considered undefined.
    pub leg_epsilon: T,
}

impl<T: Scalar> PipelineOptions<T> {
    pub fn standard(digits: u32) -> Self {
        let bits = digits_to_bits(digits);
        PipelineOptions {
            digits,
            cluster_tol: T::from_f64(1e-3, bits),
            merge_radius: T::from_f64(1e-6, bits),
            leg_epsilon: T::from_f64(1e-8, bits),
        }
    }
}

/// Powers of the positive denominators cleared out of a pipeline polynomial.
/// The polynomial equals the underlying scalar quantity times
/// `(1+t²)^omega (1+t₁²)^omega1 L₂^l2 L₃^l3`, so sign information survives
/// wherever the quantity is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClearingFactors {
    pub omega: i32,
    pub omega1: i32,
    pub l2: u32,
    pub l3: u32,
}

/// A constant-`L₁` slice prepared for cusp search: the two polynomial
/// conditions plus the bookkeeping that records how they were cleared and
/// reduced.
#[derive(Debug, Clone)]
pub struct SliceProblem<T> {
    pub geom: ManipulatorGeometry<T>,
    pub l1: T,
    pub opts: PipelineOptions<T>,
    /// Singularity condition, degree (4, 4).
    pub f1: BiPoly<T>,
    /// Coalescence condition: adjugate-based `E₁`, or the curve-tangency
    /// condition after a fallback.
    pub e1: BiPoly<T>,
    /// How many structural `1+t²` / `1+t₁²` factors were peeled off each.
    pub f1_strips: (usize, usize),
    pub e1_strips: (usize, usize),
    pub f1_clearing: ClearingFactors,
    pub e1_clearing: ClearingFactors,
    pub used_tangency_fallback: bool,
}

/// A verified cusp point of the slice. Angles are radians; joint lengths and
/// residuals are in the geometry's units.
#[derive(Debug, Clone)]
pub struct CuspPoint<T> {
    /// Platform orientation.
    pub alpha: T,
    /// Leg-1 angle.
    pub theta1: T,
    /// Leg lengths completing the joint vector `(L₁, L₂, L₃)`.
    pub l2: T,
    pub l3: T,
    /// Relative residual of the singularity condition at the refined root.
    pub res_f1: T,
    /// Relative residual of the coalescence condition at the refined root.
    pub res_e1: T,
    /// Absolute value of the singularity scalar at the reconstructed leg
    /// angles (an independent, chart-free check).
    pub res_sing: T,
    /// Number of coincident direct-kinematics solutions at the cusp's joint
    /// vector — always ≥ 3 for emitted points.
    pub dkp_multiplicity: usize,
}

/// Everything the pipeline learned about one slice.
#[derive(Debug, Clone)]
pub struct SliceReport<T> {
    pub l1: T,
    /// Verified cusps, sorted by `theta1`.
    pub cusps: Vec<CuspPoint<T>>,
    /// Candidates that survived the coalescence filter (before the
    /// direct-kinematics verification).
    pub candidate_count: usize,
    /// Degree of the elimination resultant after trailing-noise trim.
    pub resultant_degree: usize,
    pub used_tangency_fallback: bool,
    /// How many candidates had a leg shorter than `leg_epsilon`; such points
    /// are verified through lengths and direct kinematics alone, since their
    /// leg angle is undefined.
    pub degenerate_leg_flags: usize,
}

/// One slice of a scan, with its own outcome.
#[derive(Debug, Clone)]
pub struct SliceOutcome<T> {
    pub l1: T,
    pub result: Result<SliceReport<T>, PipelineError>,
}

/// A change of cusp count between consecutive scanned slices — the signature
/// of passing a joint-space transition where cusps are born or die.
#[derive(Debug, Clone)]
pub struct Transition<T> {
    pub l1_low: T,
    pub l1_high: T,
    pub count_low: usize,
    pub count_high: usize,
}

/// Result of [`scan_l1`].
#[derive(Debug, Clone)]
pub struct ScanReport<T> {
    pub slices: Vec<SliceOutcome<T>>,
    pub transitions: Vec<Transition<T>>,
}

/// Working digit count the scalar type can actually deliver (a fixed-width
/// scalar ignores precision requests, so tolerances must not assume more
/// accuracy than its mantissa holds).
fn effective_digits<T: Scalar>(digits: u32, bits: u32) -> u32 {
    let delivered = T::one().with_precision(bits).precision_bits();
    digits.min(((delivered as f64) * 0.301) as u32).max(10)
}

/// Peel structural `1+t²` and `1+t₁²` factors off a cleared numerator,
/// returning the reduced polynomial and the number of factors removed per
/// variable.
fn strip_structural<T: Scalar>(mut p: BiPoly<T>, rel: &T) -> (BiPoly<T>, usize, usize) {
    let mut st = 0usize;
    while let Some(q) = p.try_div_one_plus_square(Var::T, rel) {
        p = q;
        st += 1;
    }
    let mut st1 = 0usize;
    while let Some(q) = p.try_div_one_plus_square(Var::T1, rel) {
        p = q;
        st1 += 1;
    }
    (p, st, st1)
}

/// The singularity condition `F₁` for a slice: the half-angle numerator of
/// the singularity scalar, cleared by `L₂ L₃ (1+t²)² (1+t₁²)²` (exponents as
/// returned in the clearing record).
pub fn build_f1<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    digits: u32,
) -> (BiPoly<T>, (usize, usize), ClearingFactors) {
    let bits = digits_to_bits(digits) + 64;
    let digits = effective_digits::<T>(digits, bits);
    let blocks = half_angle_blocks(geom, l1, bits);
    let rel = T::exp10(-((digits as i32) - 10).max(5), bits);
    let g = geom.with_precision(bits);

    // a2x·Ŝ₂·(Ŝ₃C₁ − Ĉ₃S₁) + (a3x·Ŝ₃ − a3y·Ĉ₃)·(S₁Ĉ₂ − C₁Ŝ₂), where the
    // hats are `Lᵢ sin/cos θᵢ` with denominators cleared: this is the
    // singularity scalar times `L₂L₃(1+t²)²(1+t₁²)³`.
    let b = &blocks;
    let term_a = b
        .s2
        .mul(&b.s3.mul(&b.c1).sub(&b.c3.mul(&b.s1)))
        .scale(&g.a2x);
    let cross = b.s1.mul(&b.c2).sub(&b.c1.mul(&b.s2));
    let term_b = b
        .s3
        .scale(&g.a3x)
        .sub(&b.c3.scale(&g.a3y))
        .mul(&cross);
    let raw = term_a.add(&term_b);

    let (f1, st, st1) = strip_structural(raw, &rel);
    let clearing = ClearingFactors {
        omega: 2 - st as i32,
        omega1: 3 - st1 as i32,
        l2: 1,
        l3: 1,
    };
    (f1, (st, st1), clearing)
}

/// The six cleared Jacobian entries as numerator/denominator pairs over
/// `(1+t²)^p (1+t₁²)^q`.
fn khat<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    blocks: &HalfAngleBlocks<T>,
    bits: u32,
) -> [RatPoly<T>; 6] {
    let g = geom.with_precision(bits);
    let l1 = l1.with_precision(bits);
    let two = T::from_i64(2, bits);
    let ntwo = two.neg_ref();
    let b = blocks;
    let ww1 = b.w.mul(&b.w1);
    let a32 = g.a3x.sub_ref(&g.a2x);

    // cross products appearing in several entries
    let s2c3_c2s3 = b.s2.mul(&b.c3).sub(&b.c2.mul(&b.s3)); // L₂L₃ sin(θ₂−θ₃) · (ωω₁)²
    let s1c3_c1s3 = b.s1.mul(&b.c3).sub(&b.c1.mul(&b.s3)); // L₃ sin(θ₁−θ₃) · ωω₁²
    let s1c2_c1s2 = b.s1.mul(&b.c2).sub(&b.c1.mul(&b.s2)); // L₂ sin(θ₁−θ₂) · ωω₁²

    let k1 = RatPoly::new(
        b.s2
            .scale(&a32)
            .sub(&b.c2.scale(&g.a3y))
            .mul(&ww1)
            .add(&s2c3_c2s3)
            .scale(&two),
        2,
        2,
    );
    let k2 = RatPoly::new(
        s1c3_c1s3
            .scale(&l1)
            .add(&b.s3.scale(&g.a3x).sub(&b.c3.scale(&g.a3y)).mul(&b.w1))
            .scale(&ntwo),
        1,
        2,
    );
    let k3 = RatPoly::new(
        b.s3
            .scale(&a32)
            .sub(&b.c3.scale(&g.a3y))
            .mul(&ww1)
            .add(&s2c3_c2s3)
            .scale(&ntwo),
        2,
        2,
    );
    let k4 = RatPoly::new(
        s1c3_c1s3
            .add(
                &b.s1
                    .scale(&g.a3x)
                    .sub(&b.c1.scale(&g.a3y))
                    .mul(&ww1),
            )
            .scale(&two.mul_ref(&l1)),
        1,
        2,
    );
    let k5 = RatPoly::new(
        s1c2_c1s2
            .scale(&l1)
            .add(&b.s2.scale(&g.a2x).mul(&b.w1))
            .scale(&ntwo),
        1,
        2,
    );
    let k6 = RatPoly::new(
        s1c2_c1s2
            .add(&b.s1.scale(&g.a2x).mul(&ww1))
            .scale(&two.mul_ref(&l1)),
        1,
        2,
    );
    [k1, k2, k3, k4, k5, k6]
}

/// The coalescence condition `E₁` for a slice: the adjugate-kernel quadratic
/// form `vᵀ(Σᵢ uᵢ Hᵢ)v` with `u` the first adjugate row and `v` the first
/// adjugate column, expressed in the half-angle chart and cleared of its
/// denominators.
pub fn build_e1<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    digits: u32,
) -> (BiPoly<T>, (usize, usize), ClearingFactors) {
    let bits = digits_to_bits(digits) + 64;
    let digits = effective_digits::<T>(digits, bits);
    let rel = T::exp10(-((digits as i32) - 10).max(5), bits);
    let blocks = half_angle_blocks(geom, l1, bits);
    let g = geom.with_precision(bits);
    let l1 = l1.with_precision(bits);
    let two = T::from_i64(2, bits);
    let ntwo = two.neg_ref();
    let b = &blocks;
    let ww1 = b.w.mul(&b.w1);
    let a23 = g.a2x.sub_ref(&g.a3x);

    // The first adjugate row/column involve only five of the six Jacobian
    // entries; `k6` never appears.
    let [k1, k2, k3, k4, k5, _k6] = khat(geom, &l1, b, bits);

    // Hessian entries over the same denominators.
    let c2c1_s2s1 = b.c2.mul(&b.c1).add(&b.s2.mul(&b.s1)); // L₂ cos(θ₁−θ₂)·ωω₁²
    let c3c1_s3s1 = b.c3.mul(&b.c1).add(&b.s3.mul(&b.s1)); // L₃ cos(θ₁−θ₃)·ωω₁²
    let c2c3_s2s3 = b.c2.mul(&b.c3).add(&b.s2.mul(&b.s3)); // L₂L₃cos(θ₂−θ₃)·(ωω₁)²

    let h1_00 = RatPoly::new(
        b.c1
            .scale(&g.a2x)
            .mul(&ww1)
            .add(&c2c1_s2s1)
            .scale(&two.mul_ref(&l1)),
        1,
        2,
    );
    let h1_01 = RatPoly::new(c2c1_s2s1.scale(&ntwo.mul_ref(&l1)), 1, 2);
    let h1_11 = RatPoly::new(
        c2c1_s2s1
            .scale(&l1)
            .sub(&b.c2.scale(&g.a2x).mul(&b.w1))
            .scale(&two),
        1,
        2,
    );

    let h2_11 = RatPoly::new(
        c2c3_s2s3
            .sub(&b.c2.scale(&a23).mul(&ww1))
            .add(&b.s2.scale(&g.a3y).mul(&ww1))
            .scale(&two),
        2,
        2,
    );
    let h2_12 = RatPoly::new(c2c3_s2s3.scale(&ntwo), 2, 2);
    let h2_22 = RatPoly::new(
        c2c3_s2s3
            .add(&b.c3.scale(&a23).mul(&ww1))
            .sub(&b.s3.scale(&g.a3y).mul(&ww1))
            .scale(&two),
        2,
        2,
    );

    let h3_00 = RatPoly::new(
        b.c1
            .scale(&g.a3x)
            .add(&b.s1.scale(&g.a3y))
            .mul(&ww1)
            .add(&c3c1_s3s1)
            .scale(&two.mul_ref(&l1)),
        1,
        2,
    );
    let h3_02 = RatPoly::new(c3c1_s3s1.scale(&ntwo.mul_ref(&l1)), 1, 2);
    let h3_22 = RatPoly::new(
        c3c1_s3s1
            .scale(&l1)
            .sub(
                &b.c3
                    .scale(&g.a3x)
                    .add(&b.s3.scale(&g.a3y))
                    .mul(&b.w1),
            )
            .scale(&two),
        1,
        2,
    );

    // First adjugate row and column.
    let u = [
        k1.mul(&k2),
        k2.mul(&k5).scale(&T::one().neg_ref()),
        k3.mul(&k5),
    ];
    let v = [
        k1.mul(&k2),
        k3.mul(&k4),
        k1.mul(&k4).scale(&T::one().neg_ref()),
    ];

    // vᵀ Hᵢ v, exploiting each Hessian's sparsity.
    let two_r = |r: &RatPoly<T>| r.scale(&two);
    let q1 = h1_00
        .mul(&v[0].mul(&v[0]))
        .add(&two_r(&h1_01).mul(&v[0].mul(&v[1])), b)
        .add(&h1_11.mul(&v[1].mul(&v[1])), b);
    let q2 = h2_11
        .mul(&v[1].mul(&v[1]))
        .add(&two_r(&h2_12).mul(&v[1].mul(&v[2])), b)
        .add(&h2_22.mul(&v[2].mul(&v[2])), b);
    let q3 = h3_00
        .mul(&v[0].mul(&v[0]))
        .add(&two_r(&h3_02).mul(&v[0].mul(&v[2])), b)
        .add(&h3_22.mul(&v[2].mul(&v[2])), b);

    let e1 = u[0]
        .mul(&q1)
        .add(&u[1].mul(&q2), b)
        .add(&u[2].mul(&q3), b);

    let (p, q) = (e1.p as i32, e1.q as i32);
    let (reduced, st, st1) = strip_structural(e1.num, &rel);
    let clearing = ClearingFactors {
        omega: p - st as i32,
        omega1: q - st1 as i32,
        l2: 0,
        l3: 0,
    };
    (reduced, (st, st1), clearing)
}

/// The curve-tangency condition used when `E₁` degenerates (collinear
/// platforms): the derivative of `L₂²` along the tangent of the singular
/// curve, with denominators cleared. Writing `N = (L₂ ωω₁)²` as a polynomial
/// and `w = (−∂F₁/∂t₁, ∂F₁/∂t)`,
///
/// ```text
/// T_raw = (∇N · w) ωω₁ − 4N (t ω₁ w_t + t₁ ω w_t₁) = d(L₂²)/dw · ω³ω₁³
/// ```
///
/// Since `L₂²` itself has denominator `ωω₁` (half-angle cosines enter
/// linearly), `T_raw` carries an exact structural factor `ωω₁`; peeling it
/// leaves the degree-(7, 7) condition with clearing `ω²ω₁²`.
pub fn build_tangency<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    f1: &BiPoly<T>,
    digits: u32,
) -> (BiPoly<T>, (usize, usize), ClearingFactors) {
    let bits = digits_to_bits(digits) + 64;
    let digits = effective_digits::<T>(digits, bits);
    let rel = T::exp10(-((digits as i32) - 10).max(5), bits);
    let blocks = half_angle_blocks(geom, l1, bits);
    let b = &blocks;

    let n = b.c2.mul(&b.c2).add(&b.s2.mul(&b.s2));
    let nt = n.derivative(Var::T);
    let nt1 = n.derivative(Var::T1);
    let wt = f1.derivative(Var::T1).scale(&T::one().neg_ref());
    let wt1 = f1.derivative(Var::T);

    let mut tpoly = BiPoly::zero(1, 0);
    tpoly.set_coeff(1, 0, T::one());
    let mut t1poly = BiPoly::zero(0, 1);
    t1poly.set_coeff(0, 1, T::one());

    let grad_term = nt
        .mul(&wt)
        .add(&nt1.mul(&wt1))
        .mul(&b.w.mul(&b.w1));
    let inner = tpoly
        .mul(&b.w1)
        .mul(&wt)
        .add(&t1poly.mul(&b.w).mul(&wt1));
    let four = T::from_i64(4, bits);
    let mut raw = grad_term.sub(&n.mul(&inner).scale(&four));
    raw.trim_rel(&rel);

    let (t, st, st1) = strip_structural(raw, &rel);
    let clearing = ClearingFactors {
        omega: 3 - st as i32,
        omega1: 3 - st1 as i32,
        l2: 0,
        l3: 0,
    };
    (t, (st, st1), clearing)
}

impl<T: Scalar> SliceProblem<T> {
    /// Prepare a slice: build both polynomial conditions with the adjugate
    /// form of the coalescence condition.
    pub fn new(geom: &ManipulatorGeometry<T>, l1: &T, opts: &PipelineOptions<T>) -> Self {
        let (f1, f1_strips, f1_clearing) = build_f1(geom, l1, opts.digits);
        let (e1, e1_strips, e1_clearing) = build_e1(geom, l1, opts.digits);
        SliceProblem {
            geom: geom.clone(),
            l1: l1.clone(),
            opts: opts.clone(),
            f1,
            e1,
            f1_strips,
            e1_strips,
            f1_clearing,
            e1_clearing,
            used_tangency_fallback: false,
        }
    }

    /// Replace the coalescence condition by the curve-tangency condition.
    pub fn rebuild_with_tangency(&mut self) {
        let (t, strips, clearing) =
            build_tangency(&self.geom, &self.l1, &self.f1, self.opts.digits);
        self.e1 = t;
        self.e1_strips = strips;
        self.e1_clearing = clearing;
        self.used_tangency_fallback = true;
    }
}

/// Eliminate the platform orientation: the Sylvester resultant of the two
/// slice conditions with respect to `t`, leaving a univariate polynomial in
/// `t₁` whose real roots locate all candidate orientations.
pub fn eliminate_alpha<T: Scalar>(problem: &SliceProblem<T>) -> Result<UniPoly<T>, PipelineError> {
    let bits = digits_to_bits(problem.opts.digits) + 64;
    let digits = effective_digits::<T>(problem.opts.digits, bits);
    let rel = T::exp10(-((digits as i32) - 10).max(5), bits);
    let mut f1 = problem.f1.clone();
    f1.trim_rel(&rel);
    let mut e1 = problem.e1.clone();
    e1.trim_rel(&rel);
    Ok(sylvester_resultant_in_t(&f1, &e1, digits)?)
}

struct Candidate<T> {
    t: T,
    t1: T,
    alpha: T,
    theta1: T,
    l2: T,
    l3: T,
    res_f1: T,
    res_e1: T,
    res_sing: T,
    mult: usize,
}

/// Relative residual `|p(t, t₁)| / Σ|coeff·monomial|` — scale-free measure
/// of how well a point sits on a polynomial's zero set.
fn rel_residual<T: Scalar>(p: &BiPoly<T>, t: &T, t1: &T) -> T {
    let scale = p.eval_abs(t, t1);
    if scale.is_zero() {
        return T::zero();
    }
    p.eval(t, t1).abs().div_ref(&scale)
}

/// Newton iteration on the 2×2 system `(f, g) = 0`, returning the iterate
/// with the smallest combined relative residual.
#[allow(clippy::too_many_arguments)]
fn newton_refine_pair<T: Scalar>(
    f: &BiPoly<T>,
    g: &BiPoly<T>,
    ft: &BiPoly<T>,
    ft1: &BiPoly<T>,
    gt: &BiPoly<T>,
    gt1: &BiPoly<T>,
    t0: &T,
    t10: &T,
    digits: u32,
    bits: u32,
) -> (T, T) {
    let mut t = t0.clone();
    let mut t1 = t10.clone();
    let mut best = (t.clone(), t1.clone(), {
        let r = rel_residual(f, &t, &t1).add_ref(&rel_residual(g, &t, &t1));
        r
    });
    let step_floor = T::exp10(-(digits as i32) - 5, bits);
    let det_floor = T::from_f64(0.5, bits).powi(bits.saturating_sub(8));
    for _ in 0..60 {
        let fv = f.eval(&t, &t1);
        let gv = g.eval(&t, &t1);
        let a = ft.eval(&t, &t1);
        let b = ft1.eval(&t, &t1);
        let c = gt.eval(&t, &t1);
        let d = gt1.eval(&t, &t1);
        let ad = a.mul_ref(&d);
        let bc = b.mul_ref(&c);
        let det = ad.sub_ref(&bc);
        let det_scale = ad.abs().add_ref(&bc.abs());
        if det.abs() <= det_scale.mul_ref(&det_floor) {
            break;
        }
        let dt = fv.mul_ref(&d).sub_ref(&gv.mul_ref(&b)).div_ref(&det);
        let dt1 = a.mul_ref(&gv).sub_ref(&c.mul_ref(&fv)).div_ref(&det);
        t = t.sub_ref(&dt);
        t1 = t1.sub_ref(&dt1);
        let r = rel_residual(f, &t, &t1).add_ref(&rel_residual(g, &t, &t1));
        if r < best.2 {
            best = (t.clone(), t1.clone(), r);
        }
        let size = T::one().add_ref(&t.abs()).add_ref(&t1.abs());
        if dt.abs().max_ref(&dt1.abs()) <= size.mul_ref(&step_floor) {
            break;
        }
    }
    (best.0, best.1)
}

/// Run the whole slice algorithm on a prepared problem.
///
/// Steps: eliminate the orientation (falling back to the tangency condition
/// if the adjugate form degenerates), isolate the real `t₁` roots,
/// back-substitute into `F₁` for `t`, keep pairs where the coalescence
/// condition also vanishes, refine each candidate by a 2×2 Newton iteration,
/// re-check near-±180° candidates by direct trigonometry, map to joint
/// lengths, and keep exactly those candidates whose direct kinematics shows
/// three coincident solutions. Candidates closer than the merge radius
/// collapse into one.
pub fn find_cusps<T: Scalar>(problem: &SliceProblem<T>) -> Result<SliceReport<T>, PipelineError> {
    let mut work: std::borrow::Cow<SliceProblem<T>> = std::borrow::Cow::Borrowed(problem);
    let resultant = match eliminate_alpha(&work) {
        Ok(r) => r,
        Err(PipelineError::Poly(PolyError::IdenticallyZeroSlice)) => {
            let w = work.to_mut();
            w.rebuild_with_tangency();
            match eliminate_alpha(w) {
                Ok(r) => r,
                Err(PipelineError::Poly(PolyError::IdenticallyZeroSlice)) => {
                    return Err(PipelineError::DegenerateResultant)
                }
                Err(e) => return Err(e),
            }
        }
        Err(e) => return Err(e),
    };

    let bits = digits_to_bits(work.opts.digits) + 64;
    let digits = effective_digits::<T>(work.opts.digits, bits);
    let resultant_degree = resultant.degree();
    let t1_roots = real_roots(&resultant, None, digits)?;

    let f1 = &work.f1;
    let e1 = &work.e1;
    let f1t = f1.derivative(Var::T);
    let f1t1 = f1.derivative(Var::T1);
    let e1t = e1.derivative(Var::T);
    let e1t1 = e1.derivative(Var::T1);

    let filter_tol = T::exp10(-((digits as i32) / 3), bits);
    let verify_tol = T::exp10(-((digits as i32) / 2), bits);
    let wall_tol = T::from_f64(1e-6, bits);
    let pi = T::pi(bits);
    let geom = &work.geom;
    let l1 = work.l1.with_precision(bits);

    let mut candidate_count = 0usize;
    let mut degenerate_leg_flags = 0usize;
    let mut kept: Vec<Candidate<T>> = Vec::new();

    for root in &t1_roots {
        let tau1 = root.value.with_precision(bits);
        let t_roots = match solve_for_second_var(f1, Var::T, &tau1, digits) {
            Ok(r) => r,
            // F₁ vanishing along the whole line t₁ = τ₁: no isolated pairs.
            Err(PolyError::IdenticallyZeroSlice) => continue,
            Err(e) => return Err(e.into()),
        };
        for tr in &t_roots {
            let t = tr.value.with_precision(bits);
            if rel_residual(e1, &t, &tau1) > filter_tol {
                continue;
            }
            candidate_count += 1;

            let (t, t1) = newton_refine_pair(
                f1, e1, &f1t, &f1t1, &e1t, &e1t1, &t, &tau1, digits, bits,
            );
            if rel_residual(f1, &t, &t1) > verify_tol || rel_residual(e1, &t, &t1) > verify_tol
            {
                continue;
            }

            let alpha = t.atan().double();
            let theta1 = t1.atan().double();
            let pose = SlicePose {
                l1: l1.clone(),
                alpha: alpha.clone(),
                theta1: theta1.clone(),
            };
            let (v2, v3) = leg_vectors(geom, &pose);
            let l2 = v2[0].mul_ref(&v2[0]).add_ref(&v2[1].mul_ref(&v2[1])).sqrt();
            let l3 = v3[0].mul_ref(&v3[0]).add_ref(&v3[1].mul_ref(&v3[1])).sqrt();
            let degenerate_leg = l2 <= work.opts.leg_epsilon || l3 <= work.opts.leg_epsilon;
            if degenerate_leg {
                degenerate_leg_flags += 1;
            }
            let theta = [
                wrap_angle(&theta1),
                v2[1].atan2(&v2[0]),
                v3[1].atan2(&v3[0]),
            ];
            let res_sing = singularity_residual(geom, &theta).abs();

            // The half-angle chart cannot represent ±180° exactly; a
            // candidate hugging the wall is re-checked by direct
            // trigonometry, where the wall is an ordinary point.
            let near_wall = pi.sub_ref(&alpha.abs()) < wall_tol
                || pi.sub_ref(&theta1.abs()) < wall_tol;
            if near_wall && !degenerate_leg {
                let anchor_scale = geom
                    .a2x
                    .abs()
                    .add_ref(&geom.a3x.abs())
                    .add_ref(&geom.a3y.abs());
                let len_scale = l1.add_ref(&l2).add_ref(&l3).add_ref(&anchor_scale);
                let sing_ok =
                    res_sing <= anchor_scale.mul_ref(&filter_tol);
                let config = Configuration {
                    lengths: [l1.clone(), l2.clone(), l3.clone()],
                    theta: theta.clone(),
                };
                let cusp_ok = match cusp_residual(geom, &config) {
                    Ok(r) => {
                        r.abs() <= len_scale.mul_ref(&len_scale).mul_ref(&filter_tol)
                    }
                    Err(_) => false,
                };
                if !(sing_ok && cusp_ok) {
                    continue;
                }
            }

            // Decisive test: the direct kinematics at this joint vector must
            // have exactly three coincident solutions.
            let modes = direct_kinematics(
                geom,
                &[l1.clone(), l2.clone(), l3.clone()],
                work.opts.digits,
                &work.opts.cluster_tol,
            )?;
            let mut cnt = 0usize;
            let mut hint = 0usize;
            for m in &modes {
                let d = angle_distance(&m.theta[0], &theta1)
                    .max_ref(&angle_distance(&m.alpha, &alpha));
                if d < work.opts.cluster_tol {
                    cnt += 1;
                    hint = hint.max(m.root_multiplicity);
                }
            }
            if cnt == 0 {
                continue;
            }
            let mult = cnt.max(hint);
            if mult != 3 {
                continue;
            }

            kept.push(Candidate {
                t: t.clone(),
                t1: t1.clone(),
                alpha,
                theta1,
                l2,
                l3,
                res_f1: rel_residual(f1, &t, &t1),
                res_e1: rel_residual(e1, &t, &t1),
                res_sing,
                mult,
            });
        }
    }

    // Merge candidates that are the same point found twice.
    let mut merged: Vec<Candidate<T>> = Vec::new();
    'outer: for c in kept {
        for m in &merged {
            let d = c
                .t
                .sub_ref(&m.t)
                .abs()
                .max_ref(&c.t1.sub_ref(&m.t1).abs());
            if d < work.opts.merge_radius {
                continue 'outer;
            }
        }
        merged.push(c);
    }
    merged.sort_by(|a, b| {
        (a.theta1.to_f64(), a.alpha.to_f64())
            .partial_cmp(&(b.theta1.to_f64(), b.alpha.to_f64()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let cusps = merged
        .into_iter()
        .map(|c| CuspPoint {
            alpha: c.alpha,
            theta1: c.theta1,
            l2: c.l2,
            l3: c.l3,
            res_f1: c.res_f1,
            res_e1: c.res_e1,
            res_sing: c.res_sing,
            dkp_multiplicity: c.mult,
        })
        .collect();

    Ok(SliceReport {
        l1: work.l1.clone(),
        cusps,
        candidate_count,
        resultant_degree,
        used_tangency_fallback: work.used_tangency_fallback,
        degenerate_leg_flags,
    })
}

/// Analyze many slices; failures are captured per slice instead of aborting
/// the scan, and changes of cusp count between consecutive successful slices
/// are reported as transitions.
pub fn scan_l1<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1_values: &[T],
    opts: &PipelineOptions<T>,
) -> ScanReport<T> {
    let slices: Vec<SliceOutcome<T>> = l1_values
        .par_iter()
        .map(|l1| {
            let problem = SliceProblem::new(geom, l1, opts);
            SliceOutcome {
                l1: l1.clone(),
                result: find_cusps(&problem),
            }
        })
        .collect();

    let mut transitions = Vec::new();
    for pair in slices.windows(2) {
        if let (Ok(lo), Ok(hi)) = (&pair[0].result, &pair[1].result) {
            if lo.cusps.len() != hi.cusps.len() {
                transitions.push(Transition {
                    l1_low: pair[0].l1.clone(),
                    l1_high: pair[1].l1.clone(),
                    count_low: lo.cusps.len(),
                    count_high: hi.cusps.len(),
                });
            }
        }
    }
    ScanReport { slices, transitions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_geometry;

    fn wide_platform() -> ManipulatorGeometry<f64> {
        validate_geometry(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).unwrap()
    }

    #[test]
    fn f1_matches_the_singularity_scalar_at_random_poses() {
        let geom = wide_platform();
        let l1 = 14.98;
        let (f1, strips, clearing) = build_f1(&geom, &l1, 30);
        assert_eq!((f1.deg_t(), f1.deg_t1()), (4, 4));
        assert_eq!(strips, (0, 1));
        assert_eq!((clearing.omega, clearing.omega1), (2, 2));
        assert_eq!((clearing.l2, clearing.l3), (1, 1));
        let mut state = 0x12345u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64) * 2.0 - 1.0
        };
        for _ in 0..200 {
            let t = 2.0 * next();
            let t1 = 2.0 * next();
            let alpha = 2.0 * t.atan();
            let theta1 = 2.0 * t1.atan();
            let pose = SlicePose { l1, alpha, theta1 };
            let (v2, v3) = leg_vectors(&geom, &pose);
            let l2 = v2[0].hypot(v2[1]);
            let l3 = v3[0].hypot(v3[1]);
            let theta = [theta1, v2[1].atan2(v2[0]), v3[1].atan2(v3[0])];
            let sing = singularity_residual(&geom, &theta);
            let om = 1.0 + t * t;
            let om1 = 1.0 + t1 * t1;
            let expect = sing * l2 * l3 * om.powi(2) * om1.powi(2);
            let got = f1.eval(&t, &t1);
            assert!(
                (got - expect).abs() <= 1e-9 * f1.eval_abs(&t, &t1),
                "t={t} t1={t1}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn e1_matches_the_adjoint_form_at_random_poses() {
        use crate::kinematics::{adjoint_and_kernels, hessians};
        let geom = wide_platform();
        let l1 = 14.98;
        let (e1, strips, clearing) = build_e1(&geom, &l1, 30);
        assert_eq!((e1.deg_t(), e1.deg_t1()), (12, 12));
        assert_eq!(strips, (4, 8));
        assert_eq!((clearing.omega, clearing.omega1), (6, 6));
        let mut state = 0x98765u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / ((1u64 << 31) as f64) * 2.0 - 1.0
        };
        for _ in 0..500 {
            let t = 2.0 * next();
            let t1 = 2.0 * next();
            let alpha = 2.0 * t.atan();
            let theta1 = 2.0 * t1.atan();
            let pose = SlicePose { l1, alpha, theta1 };
            let (v2, v3) = leg_vectors(&geom, &pose);
            let l2 = v2[0].hypot(v2[1]);
            let l3 = v3[0].hypot(v3[1]);
            let config = Configuration {
                lengths: [l1, l2, l3],
                theta: [theta1, v2[1].atan2(v2[0]), v3[1].atan2(v3[0])],
            };
            let data = adjoint_and_kernels(&geom, &config).unwrap();
            let hs = hessians(&geom, &config);
            // first adjugate row / column, unnormalized
            let u = data.adj[0];
            let v = [data.adj[0][0], data.adj[1][0], data.adj[2][0]];
            let form = |h: &[[f64; 3]; 3]| -> f64 {
                let mut acc = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        acc += h[i][j] * v[i] * v[j];
                    }
                }
                acc
            };
            let direct = u[0] * form(&hs.h1) + u[1] * form(&hs.h2) + u[2] * form(&hs.h3);
            let om = 1.0 + t * t;
            let om1 = 1.0 + t1 * t1;
            let expect = direct * om.powi(6) * om1.powi(6);
            let got = e1.eval(&t, &t1);
            assert!(
                (got - expect).abs() <= 1e-7 * e1.eval_abs(&t, &t1),
                "t={t} t1={t1}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn tangency_condition_tracks_leg_two_stationarity() {
        // Collinear platform: the adjugate condition degenerates, the
        // tangency condition must not.
        let geom = validate_geometry(30.0, 11.0, 27.0, 13.0, 9.0, 4.0).unwrap();
        let l1 = 3.0;
        let (f1, _, _) = build_f1(&geom, &l1, 30);
        let (tang, strips, clearing) = build_tangency(&geom, &l1, &f1, 30);
        assert_eq!((tang.deg_t(), tang.deg_t1()), (7, 7));
        // The raw form carries one exact ωω₁ factor.
        assert_eq!(strips, (1, 1));
        assert_eq!((clearing.omega, clearing.omega1), (2, 2));

        // Walk a few points of the singular curve: solve F₁ for t₁ at fixed
        // t, then compare T against a finite difference of L₂² along the
        // curve tangent w = (−F₁_t₁, F₁_t).
        let f1t = f1.derivative(Var::T);
        let f1t1 = f1.derivative(Var::T1);
        let mut checked = 0;
        for i in 0..40 {
            let t = -2.0 + 0.1 * (i as f64);
            let roots = match solve_for_second_var(&f1, Var::T1, &t, 13) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for r in roots {
                let t1 = r.value;
                if t1.abs() > 3.0 {
                    continue;
                }
                let w = (-f1t1.eval(&t, &t1), f1t.eval(&t, &t1));
                let wn = w.0.hypot(w.1);
                if wn < 1e-6 {
                    continue;
                }
                let l2sq = |t: f64, t1: f64| {
                    let pose = SlicePose {
                        l1,
                        alpha: 2.0 * t.atan(),
                        theta1: 2.0 * t1.atan(),
                    };
                    let (v2, _) = leg_vectors(&geom, &pose);
                    v2[0] * v2[0] + v2[1] * v2[1]
                };
                let eps = 1e-6 / wn;
                let fd = (l2sq(t + eps * w.0, t1 + eps * w.1)
                    - l2sq(t - eps * w.0, t1 - eps * w.1))
                    / (2.0 * eps);
                let om = 1.0 + t * t;
                let om1 = 1.0 + t1 * t1;
                let got = tang.eval(&t, &t1) / (om.powi(2) * om1.powi(2));
                let scale = tang.eval_abs(&t, &t1) / (om.powi(2) * om1.powi(2));
                assert!(
                    (got - fd).abs() <= 1e-4 * (scale + fd.abs()),
                    "t={t} t1={t1}: {got} vs {fd}"
                );
                checked += 1;
            }
        }
        assert!(checked > 20, "only {checked} curve points exercised");
    }
}
