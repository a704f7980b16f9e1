//! Manipulator parameters and conversions between pose variables `(α, θ₁)`,
//! leg angles `(θ₂, θ₃)`, and joint coordinates `(L₁, L₂, L₃)`.
//!
//! Frame conventions: base anchor `A₁` at the origin, `A₂ = (a2x, 0)` on the
//! x-axis, `A₃ = (a3x, a3y)` off it. The moving platform is the triangle
//! `B₁B₂B₃` with side lengths `d1 = |B₁B₂|`, `d2 = |B₂B₃|`, `d3 = |B₃B₁|`;
//! leg `i` connects `Aᵢ` to `Bᵢ` through a passive revolute, an actuated
//! prismatic of length `Lᵢ`, and another passive revolute. The platform
//! orientation `α` is the direction of `B₁B₂`, and `B₃` sits at interior
//! angle `beta` above it, at altitude `h` over the `B₁B₂` line.


use crate::scalar::Scalar;

/// Everything fixed at manufacture time: base anchors, platform sides, and
/// the derived platform shape parameters.
#[derive(Clone, Debug)]
pub struct ManipulatorGeometry<T> {
    pub a2x: T,
    pub a3x: T,
    pub a3y: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
    /// Interior platform angle at `B₁`, in `[0, π)`; derived.
    pub beta: T,
    /// Altitude of `B₃` over the `B₁B₂` line; derived, `h = d3 sin(beta)`.
    pub h: T,
}

/// One full configuration: three leg lengths and three leg angles.
#[derive(Clone, Debug)]
pub struct Configuration<T> {
    pub lengths: [T; 3],
    /// Leg angles `(θ₁, θ₂, θ₃)` in radians, wrapped to `(−π, π]`.
    pub theta: [T; 3],
}

/// The two pose coordinates that pin down a configuration inside a
/// constant-`L₁` slice.
#[derive(Clone, Debug)]
pub struct SlicePose<T> {
    pub l1: T,
    /// Platform orientation, radians.
    pub alpha: T,
    /// First leg angle, radians.
    pub theta1: T,
}

/// Rejections raised by geometry construction and conversions.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("platform side d{side} must be positive")]
    NonPositiveSide { side: u8 },

    #[error("base anchors are collinear (a3y = 0)")]
    CollinearBase,

    #[error("platform sides violate the triangle inequality")]
    TriangleInequalityViolated,

    /// A requested conversion needs a leg angle, but the leg has
    /// (numerically) zero length so its direction is undefined.
    #[error("leg {leg} length is below epsilon; its angle is undefined")]
    DegenerateLeg { leg: u8 },
}

/// Failures while reading a geometry JSON document.
#[derive(Debug, thiserror::Error)]
pub enum GeometryLoadError {
    #[error("geometry file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("geometry file is missing numeric field `{0}`")]
    MissingField(&'static str),

    #[error("field `{field}` is not a readable decimal number: {text}")]
    BadNumber { field: &'static str, text: String },

    #[error(transparent)]
    Invalid(#[from] GeometryError),
}

/// Check the six raw parameters and derive `beta` and `h`.
///
/// The triangle inequality is enforced *non-strictly*: a flat platform
/// (one side equal to the sum of the others, `beta = 0`, `h = 0`) is a
/// legitimate — if special — machine, and the downstream algebra knows how
/// to cope with it. Only an unbuildable triangle is rejected.
pub fn validate_geometry<T: Scalar>(
    a2x: T,
    a3x: T,
    a3y: T,
    d1: T,
    d2: T,
    d3: T,
) -> Result<ManipulatorGeometry<T>, GeometryError> {
    for (side, d) in [(1u8, &d1), (2, &d2), (3, &d3)] {
        if !(d > &T::zero()) || !d.is_finite() {
            return Err(GeometryError::NonPositiveSide { side });
        }
    }
    if a3y.is_zero() {
        return Err(GeometryError::CollinearBase);
    }

    // Law of cosines at B₁. |cos beta| ≤ 1 iff the three sides close;
    // values a hair past ±1 are rounding on an exactly-flat platform.
    let bits = d1.precision_bits().max(d2.precision_bits()).max(d3.precision_bits());
    let num = d1
        .mul_ref(&d1)
        .add_ref(&d3.mul_ref(&d3))
        .sub_ref(&d2.mul_ref(&d2));
    let den = d1.mul_ref(&d3).double();
    let mut cos_beta = num.div_ref(&den);
    let one = T::one();
    if cos_beta.abs() > one {
        let slack = T::exp10(-((bits / 7) as i32), bits); // ~half the digits
        if cos_beta.abs().sub_ref(&one) > slack {
            return Err(GeometryError::TriangleInequalityViolated);
        }
        cos_beta = if cos_beta.is_negative() { one.neg_ref() } else { one };
    }
    let beta = cos_beta.acos();
    let h = d3.mul_ref(&beta.sin());

    Ok(ManipulatorGeometry { a2x, a3x, a3y, d1, d2, d3, beta, h })
}

impl<T: Scalar> ManipulatorGeometry<T> {
    /// Component of `B₃ − B₁` along the platform `B₁B₂` direction:
    /// `d3 cos(beta)`.
    pub fn third_vertex_along(&self) -> T {
        self.d3.mul_ref(&self.beta.cos())
    }

    /// Component of `B₃ − B₁` normal to the platform direction: the
    /// altitude `h = d3 sin(beta)`.
    pub fn third_vertex_normal(&self) -> T {
        self.h.clone()
    }

    /// Working precision implied by the stored parameters.
    pub fn precision_bits(&self) -> u32 {
        self.a2x
            .precision_bits()
            .max(self.a3x.precision_bits())
            .max(self.a3y.precision_bits())
            .max(self.d1.precision_bits())
            .max(self.d2.precision_bits())
            .max(self.d3.precision_bits())
    }

    /// Same geometry with every parameter carried at `bits` precision.
    pub fn with_precision(&self, bits: u32) -> Self {
        ManipulatorGeometry {
            a2x: self.a2x.with_precision(bits),
            a3x: self.a3x.with_precision(bits),
            a3y: self.a3y.with_precision(bits),
            d1: self.d1.with_precision(bits),
            d2: self.d2.with_precision(bits),
            d3: self.d3.with_precision(bits),
            beta: self.beta.with_precision(bits),
            h: self.h.with_precision(bits),
        }
    }
}

/// Read a geometry JSON document (`{"a2x": …, "a3x": …, "a3y": …, "d1": …,
/// "d2": …, "d3": …}`) at the given precision.
///
/// Numbers are taken from their decimal source text, never through an `f64`
/// detour — a 17-digit rounding baked into the inputs would poison every
/// digit the high-precision pipeline is supposed to deliver.
pub fn load_geometry_json<T: Scalar>(
    text: &str,
    bits: u32,
) -> Result<ManipulatorGeometry<T>, GeometryLoadError> {
    let doc: serde_json::Value = serde_json::from_str(text)?;
    let get = |field: &'static str| -> Result<T, GeometryLoadError> {
        let value = doc
            .get(field)
            .and_then(|v| v.as_number())
            .ok_or(GeometryLoadError::MissingField(field))?;
        // With serde_json's arbitrary-precision numbers, to_string() is the
        // literal as written in the file.
        let literal = value.to_string();
        T::parse_decimal(&literal, bits)
            .map_err(|_| GeometryLoadError::BadNumber { field, text: literal })
    };
    let a2x = get("a2x")?;
    let a3x = get("a3x")?;
    let a3y = get("a3y")?;
    let d1 = get("d1")?;
    let d2 = get("d2")?;
    let d3 = get("d3")?;
    Ok(validate_geometry(a2x, a3x, a3y, d1, d2, d3)?)
}

/// Wrap an angle to `(−π, π]`.
pub fn wrap_angle<T: Scalar>(angle: &T) -> T {
    let bits = angle.precision_bits();
    let pi = T::pi(bits);
    let two_pi = pi.double();
    let mut a = angle.clone();
    while a > pi {
        a = a.sub_ref(&two_pi);
    }
    while !(a > pi.neg_ref()) {
        a = a.add_ref(&two_pi);
    }
    a
}

/// Positions of the platform vertices `B₁, B₂, B₃` for a configuration,
/// each computed from its own leg: `Bᵢ = Aᵢ + Lᵢ (cos θᵢ, sin θᵢ)`.
pub fn vertex_positions<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> [[T; 2]; 3] {
    let anchors = [
        [T::zero(), T::zero()],
        [geom.a2x.clone(), T::zero()],
        [geom.a3x.clone(), geom.a3y.clone()],
    ];
    let mut out = anchors;
    for i in 0..3 {
        let c = config.theta[i].cos();
        let s = config.theta[i].sin();
        out[i][0] = out[i][0].add_ref(&config.lengths[i].mul_ref(&c));
        out[i][1] = out[i][1].add_ref(&config.lengths[i].mul_ref(&s));
    }
    out
}

/// The three squared-distance constraint residuals
/// `Γᵢ = |B_{i+1} − B_i|² − dᵢ²`; all three vanish iff the legs place the
/// platform vertices at mutual distances matching the platform sides.
pub fn constraint_residuals<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    config: &Configuration<T>,
) -> [T; 3] {
    let b = vertex_positions(geom, config);
    let sides = [&geom.d1, &geom.d2, &geom.d3];
    let mut out = [T::zero(), T::zero(), T::zero()];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let dx = b[j][0].sub_ref(&b[i][0]);
        let dy = b[j][1].sub_ref(&b[i][1]);
        let d2 = sides[i].mul_ref(sides[i]);
        out[i] = dx.mul_ref(&dx).add_ref(&dy.mul_ref(&dy)).sub_ref(&d2);
    }
    out
}

/// The leg-2 and leg-3 lengths forced by a slice pose. Always defined —
/// lengths stay meaningful even where the leg *angles* degenerate.
pub fn slice_lengths<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    pose: &SlicePose<T>,
) -> (T, T) {
    let (v2, v3) = leg_vectors(geom, pose);
    (hypot(&v2[0], &v2[1]), hypot(&v3[0], &v3[1]))
}

/// Complete a slice pose into joint coordinates: `(L2, L3, θ₂, θ₃)`.
///
/// Fails with [`GeometryError::DegenerateLeg`] when a leg is shorter than
/// `leg_epsilon` — the prismatic direction, hence the leg angle, is
/// undefined there. The *lengths* of such poses are still available through
/// [`slice_lengths`].
pub fn pose_to_joints<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    pose: &SlicePose<T>,
    leg_epsilon: &T,
) -> Result<(T, T, T, T), GeometryError> {
    let (v2, v3) = leg_vectors(geom, pose);
    let l2 = hypot(&v2[0], &v2[1]);
    let l3 = hypot(&v3[0], &v3[1]);
    if l2 <= *leg_epsilon {
        return Err(GeometryError::DegenerateLeg { leg: 2 });
    }
    if l3 <= *leg_epsilon {
        return Err(GeometryError::DegenerateLeg { leg: 3 });
    }
    let theta2 = v2[1].atan2(&v2[0]);
    let theta3 = v3[1].atan2(&v3[0]);
    Ok((l2, l3, theta2, theta3))
}

/// Assemble the full [`Configuration`] a slice pose describes.
pub fn pose_to_configuration<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    pose: &SlicePose<T>,
    leg_epsilon: &T,
) -> Result<Configuration<T>, GeometryError> {
    let (l2, l3, theta2, theta3) = pose_to_joints(geom, pose, leg_epsilon)?;
    Ok(Configuration {
        lengths: [pose.l1.clone(), l2, l3],
        theta: [wrap_angle(&pose.theta1), wrap_angle(&theta2), wrap_angle(&theta3)],
    })
}

/// Vectors from `A₂` to `B₂` and from `A₃` to `B₃` for a slice pose:
/// `B₂ = B₁ + d1 (cos α, sin α)` and `B₃ = B₁ + (g cos α − h sin α,
/// g sin α + h cos α)` with `g = d3 cos(beta)` — i.e. `B₃` reached by
/// rotating `+beta` off the platform direction.
pub(crate) fn leg_vectors<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    pose: &SlicePose<T>,
) -> ([T; 2], [T; 2]) {
    let c1 = pose.theta1.cos();
    let s1 = pose.theta1.sin();
    let b1x = pose.l1.mul_ref(&c1);
    let b1y = pose.l1.mul_ref(&s1);
    let ca = pose.alpha.cos();
    let sa = pose.alpha.sin();

    let v2 = [
        b1x.add_ref(&geom.d1.mul_ref(&ca)).sub_ref(&geom.a2x),
        b1y.add_ref(&geom.d1.mul_ref(&sa)),
    ];

    let g = geom.third_vertex_along();
    let v3 = [
        b1x.add_ref(&g.mul_ref(&ca))
            .sub_ref(&geom.h.mul_ref(&sa))
            .sub_ref(&geom.a3x),
        b1y.add_ref(&g.mul_ref(&sa))
            .add_ref(&geom.h.mul_ref(&ca))
            .sub_ref(&geom.a3y),
    ];
    (v2, v3)
}

fn hypot<T: Scalar>(x: &T, y: &T) -> T {
    x.mul_ref(x).add_ref(&y.mul_ref(y)).sqrt()
}
