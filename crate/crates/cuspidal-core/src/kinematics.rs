//! Constraint kinematics: the Jacobian of the three loop-closure residuals
//! with respect to the passive leg angles, its adjugate with the kernel
//! vectors used by the cusp condition, the constraint Hessians, the two
//! scalar residuals whose joint vanishing marks a cusp, and the direct
//! kinematics solver that enumerates every assembly mode of a given set of
//! leg lengths.
//!
//! Everything here works on a *configuration* — leg lengths plus leg angles
//! — rather than on platform poses, because the degeneracy structure lives
//! in the angles: the constraint map `Γ(θ; L)` has the legs' angles as the
//! fast variables and the lengths as parameters, and a configuration is
//! singular exactly where `det ∂Γ/∂θ = 0`.

use crate::geometry::{
    constraint_residuals, leg_vectors, wrap_angle, Configuration, ManipulatorGeometry, SlicePose,
};
use crate::halfangle::half_angle_blocks;
use crate::polysolve::{disc_zero_count, real_roots, PolyError, UniPoly};
use crate::scalar::{digits_to_bits, Scalar};

/// Failures of the kinematic operators.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KinematicsError {
    /// The constraint Jacobian has rank ≤ 1, so its adjugate vanishes and no
    /// kernel direction can be extracted. Happens only on doubly degenerate
    /// configurations (for example two zero-length legs).
    #[error("constraint Jacobian has rank <= 1; adjugate kernels are undefined")]
    ZeroAdjoint,
    /// An algebraic step of the direct-kinematics solver failed.
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Jacobian `∂Γ/∂θ` of the squared-distance constraints with respect to the
/// three leg angles. Row `i` differentiates `Γᵢ`; column `j` differentiates
/// by `θ_{j+1}`. Each row has a structural zero because `Γᵢ` couples only
/// two legs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintJacobian<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> ConstraintJacobian<T> {
    /// Determinant by direct expansion. With the structural zeros in place it
    /// collapses to `k₁k₂k₆ + k₃k₄k₅`.
    pub fn det(&self) -> T {
        let m = &self.m;
        let c0 = m[1][1].mul_ref(&m[2][2]).sub_ref(&m[1][2].mul_ref(&m[2][1]));
        let c1 = m[1][0].mul_ref(&m[2][2]).sub_ref(&m[1][2].mul_ref(&m[2][0]));
        let c2 = m[1][0].mul_ref(&m[2][1]).sub_ref(&m[1][1].mul_ref(&m[2][0]));
        m[0][0]
            .mul_ref(&c0)
            .sub_ref(&m[0][1].mul_ref(&c1))
            .add_ref(&m[0][2].mul_ref(&c2))
    }
}

/// The adjugate of the constraint Jacobian together with the kernel data the
/// cusp condition consumes: at a singular configuration `adj` has rank one,
/// its rows are proportional to the left kernel of `J` and its columns to
/// the right kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointData<T> {
    /// The six distinct nonzero Jacobian entries `k₁..k₆` (in index order).
    pub k: [T; 6],
    /// Adjugate matrix: `adj · J = det(J) · I`.
    pub adj: [[T; 3]; 3],
    /// Left kernel direction: the largest-norm row of `adj`, normalized.
    pub u: [T; 3],
    /// Right kernel direction: the largest-norm column of `adj`, normalized.
    pub v: [T; 3],
}

/// Second derivatives `Hᵢ = ∂²Γᵢ/∂θ²` of the three constraints. Symmetric,
/// and sparse in the same pattern as the Jacobian rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintHessians<T> {
    pub h1: [[T; 3]; 3],
    pub h2: [[T; 3]; 3],
    pub h3: [[T; 3]; 3],
}

/// One solution of the direct kinematics: an assembly mode the manipulator
/// can occupy at the queried leg lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyMode<T> {
    /// Leg angles `(θ₁, θ₂, θ₃)`, wrapped to `(−π, π]`.
    pub theta: [T; 3],
    /// Platform orientation implied by the mode (carried so coincidence
    /// checks can compare full poses, not just leg angles).
    pub alpha: T,
    /// Largest constraint residual `max |Γᵢ|` at the reconstructed
    /// configuration.
    pub residual: T,
    /// Index grouping numerically coincident solutions; modes that agree in
    /// every angle to within the clustering tolerance share an id.
    pub cluster_id: usize,
    /// Lower bound on how many solutions of the orientation polynomial
    /// (counting complex and merged ones) crowd around this mode's root —
    /// the local root multiplicity the mode sits on. A plain simple solution
    /// reports 1; the members of a cusp's triple report 3 even when rounding
    /// has pushed two of the three off the real axis.
    pub root_multiplicity: usize,
}

fn sin_cos<T: Scalar>(a: &T) -> (T, T) {
    (a.sin(), a.cos())
}

/// The six nonzero Jacobian entries. `config` must carry lengths and angles
/// of all three legs.
fn k_values<T: Scalar>(geom: &ManipulatorGeometry<T>, config: &Configuration<T>) -> [T; 6] {
    let [l1, l2, l3] = &config.lengths;
    let [t1, t2, t3] = &config.theta;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let s12 = t1.sub_ref(t2).sin();
    let s23 = t2.sub_ref(t3).sin();
    let s13 = t1.sub_ref(t3).sin();
    let two = T::from_i64(2, t1.precision_bits());
    let a32 = geom.a3x.sub_ref(&geom.a2x);

    let k1 = two.mul_ref(l2).mul_ref(
        &a32.mul_ref(&s2)
            .add_ref(&l3.mul_ref(&s23))
            .sub_ref(&geom.a3y.mul_ref(&c2)),
    );
    let k2 = two
        .mul_ref(l3)
        .mul_ref(
            &l1.mul_ref(&s13)
                .add_ref(&geom.a3x.mul_ref(&s3))
                .sub_ref(&geom.a3y.mul_ref(&c3)),
        )
        .neg_ref();
    let k3 = two
        .mul_ref(l3)
        .mul_ref(
            &a32.mul_ref(&s3)
                .add_ref(&l2.mul_ref(&s23))
                .sub_ref(&geom.a3y.mul_ref(&c3)),
        )
        .neg_ref();
    let k4 = two.mul_ref(l1).mul_ref(
        &l3.mul_ref(&s13)
            .add_ref(&geom.a3x.mul_ref(&s1))
            .sub_ref(&geom.a3y.mul_ref(&c1)),
    );
    let k5 = two
        .mul_ref(l2)
        .mul_ref(&l1.mul_ref(&s12).add_ref(&geom.a2x.mul_ref(&s2)))
        .neg_ref();
    let k6 = two
        .mul_ref(l1)
        .mul_ref(&l2.mul_ref(&s12).add_ref(&geom.a2x.mul_ref(&s1)));
    [k1, k2, k3, k4, k5, k6]
}

/// Constraint Jacobian at a configuration.
pub fn jacobian<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> ConstraintJacobian<T> {
    let [k1, k2, k3, k4, k5, k6] = k_values(geom, config);
    let z = T::zero();
    ConstraintJacobian {
        m: [
            [k6, k5, z.clone()],
            [z.clone(), k1, k3],
            [k4, z, k2],
        ],
    }
}

/// Adjugate of the constraint Jacobian plus the kernel directions used by
/// the cusp condition.
///
/// The kernel vectors are read off the adjugate: at a singular configuration
/// it drops to rank one, every nonzero row spans the left kernel and every
/// nonzero column the right kernel. For numerical robustness the
/// largest-norm row and column are taken and normalized to unit length.
pub fn adjoint_and_kernels<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> Result<AdjointData<T>, KinematicsError> {
    let k = k_values(geom, config);
    let [k1, k2, k3, k4, k5, k6] = k.clone();
    let adj = [
        [
            k1.mul_ref(&k2),
            k2.mul_ref(&k5).neg_ref(),
            k3.mul_ref(&k5),
        ],
        [
            k3.mul_ref(&k4),
            k2.mul_ref(&k6),
            k3.mul_ref(&k6).neg_ref(),
        ],
        [
            k1.mul_ref(&k4).neg_ref(),
            k4.mul_ref(&k5),
            k1.mul_ref(&k6),
        ],
    ];

    // Rank-1 failure test, relative to the square of the entry scale: the
    // adjugate entries are products of two `k`s, so `max|k|²` is their
    // natural magnitude.
    let bits = config.theta[0].precision_bits();
    let mut kscale = T::zero();
    for ki in &k {
        kscale = kscale.max_ref(&ki.abs());
    }
    let mut adj_scale = T::zero();
    for row in &adj {
        for e in row {
            adj_scale = adj_scale.max_ref(&e.abs());
        }
    }
    let tiny = T::from_f64(0.5, bits).powi(bits / 2);
    if adj_scale <= kscale.mul_ref(&kscale).mul_ref(&tiny) {
        return Err(KinematicsError::ZeroAdjoint);
    }

    let norm2 = |a: &T, b: &T, c: &T| {
        a.mul_ref(a)
            .add_ref(&b.mul_ref(b))
            .add_ref(&c.mul_ref(c))
    };
    let mut best_row = 0usize;
    let mut best_row_n = T::zero();
    let mut best_col = 0usize;
    let mut best_col_n = T::zero();
    for i in 0..3 {
        let rn = norm2(&adj[i][0], &adj[i][1], &adj[i][2]);
        if rn > best_row_n {
            best_row_n = rn;
            best_row = i;
        }
        let cn = norm2(&adj[0][i], &adj[1][i], &adj[2][i]);
        if cn > best_col_n {
            best_col_n = cn;
            best_col = i;
        }
    }
    let rinv = T::one().div_ref(&best_row_n.sqrt());
    let cinv = T::one().div_ref(&best_col_n.sqrt());
    let u = [
        adj[best_row][0].mul_ref(&rinv),
        adj[best_row][1].mul_ref(&rinv),
        adj[best_row][2].mul_ref(&rinv),
    ];
    let v = [
        adj[0][best_col].mul_ref(&cinv),
        adj[1][best_col].mul_ref(&cinv),
        adj[2][best_col].mul_ref(&cinv),
    ];
    Ok(AdjointData { k, adj, u, v })
}

/// Second derivatives of the three constraints with respect to the leg
/// angles.
pub fn hessians<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> ConstraintHessians<T> {
    let [l1, l2, l3] = &config.lengths;
    let [t1, t2, t3] = &config.theta;
    let (s1, c1) = sin_cos(t1);
    let (s2, c2) = sin_cos(t2);
    let (s3, c3) = sin_cos(t3);
    let c12 = t1.sub_ref(t2).cos();
    let c23 = t2.sub_ref(t3).cos();
    let c13 = t1.sub_ref(t3).cos();
    let bits = t1.precision_bits();
    let two = T::from_i64(2, bits);
    let z = || T::zero();
    let a23 = geom.a2x.sub_ref(&geom.a3x);

    let h1_00 = two
        .mul_ref(l1)
        .mul_ref(&geom.a2x.mul_ref(&c1).add_ref(&l2.mul_ref(&c12)));
    let h1_01 = two.mul_ref(l1).mul_ref(&l2.mul_ref(&c12)).neg_ref();
    let h1_11 = two
        .mul_ref(l2)
        .mul_ref(&geom.a2x.mul_ref(&c2).sub_ref(&l1.mul_ref(&c12)))
        .neg_ref();
    let h1 = [
        [h1_00, h1_01.clone(), z()],
        [h1_01, h1_11, z()],
        [z(), z(), z()],
    ];

    let h2_11 = two
        .mul_ref(l2)
        .mul_ref(
            &a23.mul_ref(&c2)
                .sub_ref(&l3.mul_ref(&c23))
                .sub_ref(&geom.a3y.mul_ref(&s2)),
        )
        .neg_ref();
    let h2_12 = two.mul_ref(l2).mul_ref(&l3.mul_ref(&c23)).neg_ref();
    let h2_22 = two.mul_ref(l3).mul_ref(
        &a23.mul_ref(&c3)
            .add_ref(&l2.mul_ref(&c23))
            .sub_ref(&geom.a3y.mul_ref(&s3)),
    );
    let h2 = [
        [z(), z(), z()],
        [z(), h2_11, h2_12.clone()],
        [z(), h2_12, h2_22],
    ];

    let h3_00 = two.mul_ref(l1).mul_ref(
        &geom
            .a3x
            .mul_ref(&c1)
            .add_ref(&l3.mul_ref(&c13))
            .add_ref(&geom.a3y.mul_ref(&s1)),
    );
    let h3_02 = two.mul_ref(l1).mul_ref(&l3.mul_ref(&c13)).neg_ref();
    let h3_22 = two.mul_ref(l3).mul_ref(
        &l1.mul_ref(&c13)
            .sub_ref(&geom.a3x.mul_ref(&c3))
            .sub_ref(&geom.a3y.mul_ref(&s3)),
    );
    let h3 = [
        [h3_00, z(), h3_02.clone()],
        [z(), z(), z()],
        [h3_02, z(), h3_22],
    ];

    ConstraintHessians { h1, h2, h3 }
}

/// The scalar whose vanishing characterizes singular leg-angle triples:
///
/// ```text
/// a2x · sin θ₂ · sin(θ₃ − θ₁) + (a3x · sin θ₃ − a3y · cos θ₃) · sin(θ₁ − θ₂)
/// ```
///
/// It is zero exactly when the three leg lines are concurrent or parallel —
/// in particular it vanishes identically whenever `θ₁ = θ₂ = θ₃`.
pub fn singularity_residual<T: Scalar>(geom: &ManipulatorGeometry<T>, theta: &[T; 3]) -> T {
    let [t1, t2, t3] = theta;
    let s2 = t2.sin();
    let (s3, c3) = sin_cos(t3);
    let s31 = t3.sub_ref(t1).sin();
    let s12 = t1.sub_ref(t2).sin();
    geom.a2x
        .mul_ref(&s2)
        .mul_ref(&s31)
        .add_ref(
            &geom
                .a3x
                .mul_ref(&s3)
                .sub_ref(&geom.a3y.mul_ref(&c3))
                .mul_ref(&s12),
        )
}

fn quad_form<T: Scalar>(h: &[[T; 3]; 3], v: &[T; 3]) -> T {
    let mut acc = T::zero();
    for (i, row) in h.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            acc = acc.add_ref(&e.mul_ref(&v[i]).mul_ref(&v[j]));
        }
    }
    acc
}

/// The second scalar of the cusp characterization: the quadratic form
/// `vᵀ (Σᵢ uᵢ Hᵢ) v` built from the adjugate kernel directions and the
/// constraint Hessians. On the singular set it measures the degeneracy of
/// the fold; where it vanishes *together with* [`singularity_residual`],
/// three direct-kinematics solutions coincide.
pub fn cusp_residual<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> Result<T, KinematicsError> {
    let data = adjoint_and_kernels(geom, config)?;
    let h = hessians(geom, config);
    let q1 = quad_form(&h.h1, &data.v);
    let q2 = quad_form(&h.h2, &data.v);
    let q3 = quad_form(&h.h3, &data.v);
    Ok(data.u[0]
        .mul_ref(&q1)
        .add_ref(&data.u[1].mul_ref(&q2))
        .add_ref(&data.u[2].mul_ref(&q3)))
}

/// Real roots of a quadratic given by ascending coefficients, with the
/// numerically stable split (the larger-magnitude root from the quadratic
/// formula, the other from the product of roots). Near-zero discriminants
/// within the relative tolerance collapse to a single double root.
fn solve_real_quadratic<T: Scalar>(q: &UniPoly<T>, digits: u32) -> Vec<T> {
    let scale = q.max_abs_coeff();
    if scale.is_zero() {
        return Vec::new();
    }
    let bits = scale.precision_bits();
    let tiny = T::exp10(-((digits as i32) / 2), bits);
    // Degree decisions use a far smaller floor than root merging: a small
    // but genuine leading coefficient simply means one large root, which
    // the stable split below handles — only noise-level leaders drop out.
    let lead_floor = scale.mul_ref(&T::exp10(-(digits as i32) - 5, bits));
    let coeff = |i: usize| q.coeffs().get(i).cloned().unwrap_or_else(T::zero);
    let (c0, c1, c2) = (coeff(0), coeff(1), coeff(2));
    if c2.abs() <= lead_floor {
        if c1.abs() <= lead_floor {
            return Vec::new();
        }
        return vec![c0.div_ref(&c1).neg_ref()];
    }
    let four_ac = T::from_i64(4, bits).mul_ref(&c2).mul_ref(&c0);
    let disc = c1.mul_ref(&c1).sub_ref(&four_ac);
    let dscale = c1.mul_ref(&c1).add_ref(&four_ac.abs());
    if disc.abs() <= dscale.mul_ref(&tiny) {
        // double root
        return vec![c1.div_ref(&c2.double()).neg_ref()];
    }
    if disc.is_negative() {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let half = if c1.is_negative() {
        c1.sub_ref(&sq)
    } else {
        c1.add_ref(&sq)
    };
    let qq = half.halve().neg_ref();
    vec![qq.div_ref(&c2), c0.div_ref(&qq)]
}

/// Wrap-aware distance between two angles.
pub(crate) fn angle_distance<T: Scalar>(a: &T, b: &T) -> T {
    wrap_angle(&a.sub_ref(b)).abs()
}

/// Largest disc around the half-angle chart point `c = tan(a)` whose image
/// stays inside the angular ball `|a' − a| ≤ h` — i.e. the inscribed radius
/// of that ball's image under `tan`. Counting polynomial zeros over this
/// disc therefore never reaches beyond the angular tolerance it encodes.
/// Returns `None` when no positive finite radius exists.
fn inscribed_half_angle_disc<T: Scalar>(center: &T, half_width: &T) -> Option<T> {
    let bits = center.precision_bits();
    let mut h = half_width.with_precision(bits);
    // Half-widths at or past a quarter turn stop meaning anything in a
    // tangent chart; saturate just below the asymptote.
    if h.to_f64() > 1.55 {
        h = T::from_f64(1.55, bits);
    }
    let a = center.atan();
    let mut best: Option<T> = None;
    for edge in [a.add_ref(&h), a.sub_ref(&h)] {
        // An edge at or beyond the vertical asymptote bounds nothing; its
        // tangent, if evaluated, lands on the far side with an enormous
        // magnitude, so the min below discards it anyway.
        if edge.to_f64().abs() >= std::f64::consts::FRAC_PI_2 {
            continue;
        }
        let d = edge.tan().sub_ref(center).abs();
        match best {
            Some(ref b) if *b <= d => {}
            _ => best = Some(d),
        }
    }
    best.filter(|r| r.to_f64() > 0.0 && r.to_f64().is_finite())
}

/// Zeros of `poly` (complex ones included) within the angular clustering
/// tolerance of the root `tau1`, in the half-angle chart `t₁ = tan(θ₁/2)`.
/// Two discs are counted and the larger count kept: one in the `t₁` chart
/// itself, and one in the reciprocal chart `u = −1/t₁` — the half-angle
/// chart of `θ₁ − π` — where clusters straddling the `θ₁ = ±π` wall, torn
/// apart by the tangent's asymptote, come back together around `u ≈ 0`.
/// Both discs are inscribed in the angular ball, so neither count can
/// include a zero farther than the tolerance in angle.
fn angular_cluster_count<T: Scalar>(
    poly: &UniPoly<T>,
    reciprocal_poly: &UniPoly<T>,
    tau1: &T,
    cluster_tol: &T,
) -> usize {
    // A full-angle tolerance on θ₁ is a half-width of tol/2 on θ₁/2.
    let h = cluster_tol.halve();
    let mut count = 0usize;
    if let Some(r) = inscribed_half_angle_disc(tau1, &h) {
        count = count.max(disc_zero_count(poly, tau1, &r));
    }
    if tau1.to_f64().abs() > 1e-3 {
        let u = T::one().div_ref(tau1).neg_ref();
        if let Some(r) = inscribed_half_angle_disc(&u, &h) {
            count = count.max(disc_zero_count(reciprocal_poly, &u, &r));
        }
    }
    count
}

/// The reciprocal-chart image of `poly`: coefficients reversed with
/// alternating signs, so that `t₁ ↦ u = −1/t₁` carries zeros to zeros
/// (multiplicities preserved; a zero at `t₁ = 0` is sent to infinity and
/// simply drops off).
fn reciprocal_chart_poly<T: Scalar>(poly: &UniPoly<T>) -> UniPoly<T> {
    let flipped: Vec<T> = poly
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { c.neg_ref() } else { c.clone() })
        .rev()
        .collect();
    UniPoly::new(flipped)
}

fn mode_distance<T: Scalar>(a: &AssemblyMode<T>, b: &AssemblyMode<T>) -> T {
    let mut d = T::zero();
    for i in 0..3 {
        d = d.max_ref(&angle_distance(&a.theta[i], &b.theta[i]));
    }
    d
}

/// All assembly modes at leg lengths `L = (L₁, L₂, L₃)`.
///
/// The two leg-closure conditions become degree-(2,2) polynomials in the
/// half-angle variables `t = tan(α/2)`, `t₁ = tan(θ₁/2)`; eliminating `t`
/// yields a univariate polynomial in `t₁` of degree at most 6 (after
/// peeling the structural `1 + t₁²` factor every such elimination carries).
/// Each real orientation root is completed by the quadratic closure of leg
/// 2, cross-checked by reconstructing both leg lengths, and returned with
/// its constraint residual, a coincidence cluster id, and the local root
/// multiplicity of the orientation polynomial.
///
/// An unreachable `L` yields an empty list.
pub fn direct_kinematics<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    lengths: &[T; 3],
    digits: u32,
    cluster_tol: &T,
) -> Result<Vec<AssemblyMode<T>>, KinematicsError> {
    let bits = digits_to_bits(digits) + 64;
    let l1 = lengths[0].with_precision(bits);
    let l2 = lengths[1].with_precision(bits);
    let l3 = lengths[2].with_precision(bits);
    // Tolerances must respect what the scalar type actually delivers: a
    // fixed-width scalar ignores the precision request, so the working digit
    // count is capped by its true mantissa.
    let delivered = l1.precision_bits();
    let digits = digits.min(((delivered as f64) * 0.301) as u32).max(10);
    let trim_drop = ((digits as i32) - 10).max(5);
    let rel = T::exp10(-trim_drop, bits);

    let blocks = half_angle_blocks(geom, &l1, bits);
    let mut g2 = blocks.leg_closure(2, &l2, &rel);
    g2.trim_rel(&rel);
    let mut g3 = blocks.leg_closure(3, &l3, &rel);
    g3.trim_rel(&rel);

    let octic = crate::polysolve::sylvester_resultant_in_t(&g2, &g3, digits)?;
    let strip_rel = T::exp10(-((digits as i32) / 2), bits);
    let orientation_poly = octic
        .try_div_one_plus_square(&strip_rel)
        .unwrap_or(octic);

    let roots = real_roots(&orientation_poly, None, digits)?;
    let reciprocal_poly = reciprocal_chart_poly(&orientation_poly);

    let len_tol = T::exp10(-10, bits);
    let mut modes: Vec<AssemblyMode<T>> = Vec::new();
    for root in &roots {
        let tau1 = root.value.with_precision(bits);
        // Multiplicity of the orientation root counting everything (complex
        // partners included) within the clustering tolerance in angle.
        let taylor =
            angular_cluster_count(&orientation_poly, &reciprocal_poly, &tau1, cluster_tol);
        let root_mult = taylor.max(root.multiplicity_hint).max(1);

        let quad = g2.uni_in_t_at(&tau1);
        for t in solve_real_quadratic(&quad, digits) {
            let alpha = t.atan().double();
            let theta1 = tau1.atan().double();
            let pose = SlicePose {
                l1: l1.clone(),
                alpha: alpha.clone(),
                theta1: theta1.clone(),
            };
            let (v2, v3) = leg_vectors(geom, &pose);
            let l2r = v2[0].mul_ref(&v2[0]).add_ref(&v2[1].mul_ref(&v2[1])).sqrt();
            let l3r = v3[0].mul_ref(&v3[0]).add_ref(&v3[1].mul_ref(&v3[1])).sqrt();
            let ok2 = l2r.sub_ref(&l2).abs() <= len_tol.mul_ref(&T::one().add_ref(&l2));
            let ok3 = l3r.sub_ref(&l3).abs() <= len_tol.mul_ref(&T::one().add_ref(&l3));
            if !(ok2 && ok3) {
                continue;
            }
            let theta2 = v2[1].atan2(&v2[0]);
            let theta3 = v3[1].atan2(&v3[0]);
            let config = Configuration {
                lengths: [l1.clone(), l2.clone(), l3.clone()],
                theta: [wrap_angle(&theta1), theta2, theta3],
            };
            let g = constraint_residuals(geom, &config);
            let residual = g[0].abs().max_ref(&g[1].abs()).max_ref(&g[2].abs());
            modes.push(AssemblyMode {
                theta: config.theta,
                alpha: wrap_angle(&alpha),
                residual,
                cluster_id: 0,
                root_multiplicity: root_mult,
            });
        }
    }

    // Deterministic order, then cluster ids by single-linkage grouping.
    modes.sort_by(|a, b| {
        let ka = (a.theta[0].to_f64(), a.theta[1].to_f64(), a.theta[2].to_f64());
        let kb = (b.theta[0].to_f64(), b.theta[1].to_f64(), b.theta[2].to_f64());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    let ids = cluster_ids(&modes, cluster_tol);
    for (mode, id) in modes.iter_mut().zip(ids) {
        mode.cluster_id = id;
    }
    Ok(modes)
}

/// Single-linkage clustering of modes by the wrap-aware max-angle metric;
/// returns one id per mode, numbered in order of first appearance.
fn cluster_ids<T: Scalar>(modes: &[AssemblyMode<T>], tol: &T) -> Vec<usize> {
    let n = modes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if mode_distance(&modes[i], &modes[j]) < *tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut next = 0usize;
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let r = find(&mut parent, i);
        let id = *label[r].get_or_insert_with(|| {
            let v = next;
            next += 1;
            v
        });
        out.push(id);
    }
    out
}

/// Largest number of coincident solutions in a mode list: modes are grouped
/// by the wrap-aware angle metric at `cluster_tol`, and each group counts
/// the larger of its member count and the root multiplicity its members sit
/// on (so coincidences that rounding has split into complex pairs are still
/// seen). Returns 0 for an empty list.
pub fn coincidence_multiplicity<T: Scalar>(modes: &[AssemblyMode<T>], cluster_tol: &T) -> usize {
    if modes.is_empty() {
        return 0;
    }
    let ids = cluster_ids(modes, cluster_tol);
    let nclusters = ids.iter().max().map_or(0, |m| m + 1);
    let mut best = 0usize;
    for c in 0..nclusters {
        let mut count = 0usize;
        let mut hint = 0usize;
        for (mode, id) in modes.iter().zip(&ids) {
            if *id == c {
                count += 1;
                hint = hint.max(mode.root_multiplicity);
            }
        }
        best = best.max(count.max(hint));
    }
    best
}
