//! Singularity-curve tracing: sample the singular set of a constant-`L₁`
//! slice and emit it as joint-space `(L₂, L₃)` branches, CSV, and SVG.
//!
//! The singularity condition `F₁(t, t₁)` of a slice is polynomial of degree
//! four in `t₁ = tan(θ₁/2)` at any fixed platform orientation, so the curve
//! is traced by scanning the orientation `α` over `(−180°, 180°]` and solving
//! a quartic per sample. Where consecutive samples jump (steep or folding
//! branches) the scan refines itself by bisection; afterwards points are
//! stitched into branches by nearest-neighbor continuation in `(α, θ₁)`.

use crate::geometry::{pose_to_joints, ManipulatorGeometry, SlicePose};
use crate::kinematics::singularity_residual;
use crate::pipeline::{build_f1, CuspPoint};
use crate::polysolve::{solve_for_second_var, BiPoly, Var};
use crate::scalar::Scalar;

/// One sampled point of a singular curve: the generating pose angles and the
/// joint coordinates they map to.
#[derive(Debug, Clone)]
pub struct CurvePoint<T> {
    /// Platform orientation (radians).
    pub alpha: T,
    /// Leg-1 angle (radians).
    pub theta1: T,
    pub l2: T,
    pub l3: T,
}

/// The singular curves of one slice, as polyline branches in the
/// `(L₂, L₃)` plane (each point carrying its generating `(α, θ₁)`).
#[derive(Debug, Clone)]
pub struct SingularCurveSlice<T> {
    pub l1: T,
    pub branches: Vec<Vec<CurvePoint<T>>>,
    /// Sampled singular poses discarded because a leg was too short for its
    /// angle to be defined.
    pub degenerate_leg_flags: usize,
}

/// Working precision for tracing: enough to make a quartic solve reliable,
/// clamped by what the scalar type delivers.
const TRACE_DIGITS: u32 = 24;

struct Sample<T> {
    alpha: T,
    /// `θ₁` values of the singular curve at this orientation, ascending.
    theta1: Vec<T>,
}

fn theta1_at<T: Scalar>(f1: &BiPoly<T>, alpha: &T, digits: u32) -> Vec<T> {
    let t = alpha.halve().tan();
    match solve_for_second_var(f1, Var::T1, &t, digits) {
        Ok(roots) => {
            let mut v: Vec<T> = roots
                .iter()
                .map(|r| r.value.atan().double())
                .collect();
            v.sort_by(|a, b| {
                a.to_f64()
                    .partial_cmp(&b.to_f64())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            v
        }
        // A fully singular orientation line or a wall-grazing numerical
        // corner: no isolated curve points to record at this sample.
        Err(_) => Vec::new(),
    }
}

/// Do two adjacent samples connect smoothly (same branch count, no jump
/// beyond `jump_tol`)?
fn compatible<T: Scalar>(a: &Sample<T>, b: &Sample<T>, jump_tol: f64) -> bool {
    if a.theta1.len() != b.theta1.len() {
        return false;
    }
    // Roots are sorted, and branches cannot cross without meeting (which is
    // a root-count event), so index-wise pairing is the continuation.
    a.theta1.iter().zip(&b.theta1).all(|(x, y)| {
        let d = wrap_diff(x.to_f64(), y.to_f64());
        d.abs() <= jump_tol
    })
}

fn wrap_diff(a: f64, b: f64) -> f64 {
    let mut d = a - b;
    let tau = 2.0 * std::f64::consts::PI;
    while d > std::f64::consts::PI {
        d -= tau;
    }
    while d <= -std::f64::consts::PI {
        d += tau;
    }
    d
}

#[allow(clippy::too_many_arguments)]
fn refine_gap<T: Scalar>(
    f1: &BiPoly<T>,
    digits: u32,
    a: &Sample<T>,
    b: &Sample<T>,
    jump_tol: f64,
    depth: u32,
    out: &mut Vec<Sample<T>>,
) {
    if depth == 0 || compatible(a, b, jump_tol) {
        return;
    }
    let mid_alpha = a.alpha.add_ref(&b.alpha).halve();
    let mid = Sample {
        theta1: theta1_at(f1, &mid_alpha, digits),
        alpha: mid_alpha,
    };
    refine_gap(f1, digits, a, &mid, jump_tol, depth - 1, out);
    out.push(Sample {
        alpha: mid.alpha.clone(),
        theta1: mid.theta1.clone(),
    });
    refine_gap(f1, digits, &mid, b, jump_tol, depth - 1, out);
}

/// Trace the singular curves of the slice at `l1`.
///
/// `n_alpha_samples` is the coarse scan resolution (at least 16; raised to it
/// if below); the scan bisects adaptively wherever the curve is steep or
/// folds, so doubling it refines point spacing without changing the branch
/// topology.
pub fn trace_slice<T: Scalar>(
    geom: &ManipulatorGeometry<T>,
    l1: &T,
    n_alpha_samples: usize,
) -> SingularCurveSlice<T> {
    let n = n_alpha_samples.max(16);
    let (f1, _, _) = build_f1(geom, l1, TRACE_DIGITS);
    let bits = l1.precision_bits();
    let digits = TRACE_DIGITS;

    // Midpoint grid over (−π, π]: never lands on the ±180° wall where the
    // half-angle chart blows up.
    let pi = T::pi(bits);
    let step = 2.0 * std::f64::consts::PI / (n as f64);
    let coarse: Vec<Sample<T>> = (0..n)
        .map(|k| {
            let frac = T::from_f64((k as f64 + 0.5) / (n as f64), bits);
            let alpha = pi.double().mul_ref(&frac).sub_ref(&pi);
            Sample {
                theta1: theta1_at(&f1, &alpha, digits),
                alpha,
            }
        })
        .collect();

    // Adaptive pass: insert bisection samples between incompatible pairs.
    let jump_tol = (1.5 * step).max(1e-3);
    let mut samples: Vec<Sample<T>> = Vec::with_capacity(coarse.len());
    for (i, s) in coarse.iter().enumerate() {
        if i > 0 {
            let prev_idx = samples.len() - 1;
            let mut inserted = Vec::new();
            refine_gap(
                &f1,
                digits,
                &samples[prev_idx],
                s,
                jump_tol,
                8,
                &mut inserted,
            );
            samples.extend(inserted);
        }
        samples.push(Sample {
            alpha: s.alpha.clone(),
            theta1: s.theta1.clone(),
        });
    }

    // Map each sampled pose into joint coordinates, keeping only points that
    // genuinely satisfy the singularity condition.
    let leg_eps = T::from_f64(1e-8, bits);
    let anchor_scale = geom
        .a2x
        .abs()
        .add_ref(&geom.a3x.abs())
        .add_ref(&geom.a3y.abs());
    let delivered = T::one().with_precision(bits).precision_bits();
    let res_digits = (TRACE_DIGITS).min(((delivered as f64) * 0.301) as u32);
    let res_tol = anchor_scale.mul_ref(&T::exp10(-((res_digits as i32) / 3), bits));

    let mut degenerate_leg_flags = 0usize;
    // (sample index, point) pairs ready for stitching.
    let mut placed: Vec<(usize, CurvePoint<T>)> = Vec::new();
    for (si, s) in samples.iter().enumerate() {
        for th1 in &s.theta1 {
            let pose = SlicePose {
                l1: l1.clone(),
                alpha: s.alpha.clone(),
                theta1: th1.clone(),
            };
            let (l2, l3, th2, th3) = match pose_to_joints(geom, &pose, &leg_eps) {
                Ok(j) => j,
                Err(_) => {
                    degenerate_leg_flags += 1;
                    continue;
                }
            };
            let res = singularity_residual(geom, &[th1.clone(), th2, th3]).abs();
            if res > res_tol {
                continue;
            }
            placed.push((
                si,
                CurvePoint {
                    alpha: s.alpha.clone(),
                    theta1: th1.clone(),
                    l2,
                    l3,
                },
            ));
        }
    }

    // Stitch into branches: walk samples in α order, continuing each open
    // branch to the nearest unclaimed point within the gap threshold.
    let gap_tol = 3.0 * step;
    struct Open {
        branch: usize,
        tail_alpha: f64,
        tail_theta1: f64,
    }
    let mut branches: Vec<Vec<CurvePoint<T>>> = Vec::new();
    let mut open: Vec<Open> = Vec::new();
    let mut idx = 0usize;
    while idx < placed.len() {
        let si = placed[idx].0;
        let mut group_end = idx;
        while group_end < placed.len() && placed[group_end].0 == si {
            group_end += 1;
        }
        let alpha_here = placed[idx].1.alpha.to_f64();
        // Retire branches that fell too far behind the sweep.
        open.retain(|o| alpha_here - o.tail_alpha <= gap_tol);

        // All candidate continuations, nearest first; ties broken by stable
        // indices so the stitching is deterministic.
        let group: Vec<usize> = (idx..group_end).collect();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (oi, o) in open.iter().enumerate() {
            for (gi, &p) in group.iter().enumerate() {
                let pt = &placed[p].1;
                let da = pt.alpha.to_f64() - o.tail_alpha;
                let dt = wrap_diff(pt.theta1.to_f64(), o.tail_theta1);
                let d = (da * da + dt * dt).sqrt();
                if d <= gap_tol {
                    pairs.push((d, oi, gi));
                }
            }
        }
        pairs.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut open_used = vec![false; open.len()];
        let mut group_used = vec![false; group.len()];
        for (_, oi, gi) in pairs {
            if open_used[oi] || group_used[gi] {
                continue;
            }
            open_used[oi] = true;
            group_used[gi] = true;
            let p = &placed[group[gi]].1;
            open[oi].tail_alpha = p.alpha.to_f64();
            open[oi].tail_theta1 = p.theta1.to_f64();
            let b = open[oi].branch;
            branches[b].push(p.clone());
        }
        for (gi, &p) in group.iter().enumerate() {
            if group_used[gi] {
                continue;
            }
            let pt = &placed[p].1;
            open.push(Open {
                branch: branches.len(),
                tail_alpha: pt.alpha.to_f64(),
                tail_theta1: pt.theta1.to_f64(),
            });
            branches.push(vec![pt.clone()]);
        }
        idx = group_end;
    }

    SingularCurveSlice {
        l1: l1.clone(),
        branches,
        degenerate_leg_flags,
    }
}

/// Render the traced points as CSV (angles in degrees), one row per point.
pub fn points_csv<T: Scalar>(slice: &SingularCurveSlice<T>) -> String {
    let mut out = String::from("alpha_deg,theta1_deg,L2,L3,branch_id\n");
    let deg = 180.0 / std::f64::consts::PI;
    for (bi, branch) in slice.branches.iter().enumerate() {
        for p in branch {
            out.push_str(&format!(
                "{:.12},{:.12},{:.12},{:.12},{}\n",
                p.alpha.to_f64() * deg,
                p.theta1.to_f64() * deg,
                p.l2.to_f64(),
                p.l3.to_f64(),
                bi
            ));
        }
    }
    out
}

/// Pick a round tick step covering `span` with ~`target` intervals.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.abs().max(1e-300).log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if mag * m >= raw {
            return mag * m;
        }
    }
    mag * 10.0
}

/// Render a slice and its cusps as a standalone SVG document: branch
/// polylines in `(L₂, L₃)` axes, cusps marked with circles, and the slice
/// value annotated. Output is deterministic for identical inputs. The curve
/// and the cusps may use different scalar types (curves are usually traced
/// in double precision while cusps come from the high-precision pipeline).
pub fn emit_plot<T: Scalar, C: Scalar>(
    slice: &SingularCurveSlice<T>,
    cusps: &[CuspPoint<C>],
) -> String {
    const W: f64 = 800.0;
    const H: f64 = 640.0;
    const ML: f64 = 66.0; // left margin (y tick labels)
    const MR: f64 = 18.0;
    const MT: f64 = 34.0;
    const MB: f64 = 46.0;
    const PALETTE: [&str; 8] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    ];

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for b in &slice.branches {
        for p in b {
            xs.push(p.l2.to_f64());
            ys.push(p.l3.to_f64());
        }
    }
    for c in cusps {
        xs.push(c.l2.to_f64());
        ys.push(c.l3.to_f64());
    }
    let (mut x0, mut x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let (mut y0, mut y1) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !x0.is_finite() || x1 - x0 <= 0.0 {
        x0 = 0.0;
        x1 = 1.0;
    }
    if !y0.is_finite() || y1 - y0 <= 0.0 {
        y0 = 0.0;
        y1 = 1.0;
    }
    let pad_x = 0.04 * (x1 - x0);
    let pad_y = 0.04 * (y1 - y0);
    x0 -= pad_x;
    x1 += pad_x;
    y0 -= pad_y;
    y1 += pad_y;
    let sx = (W - ML - MR) / (x1 - x0);
    let sy = (H - MT - MB) / (y1 - y0);
    let px = |x: f64| ML + (x - x0) * sx;
    let py = |y: f64| H - MB - (y - y0) * sy;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\">singular curves at L1 = {}</text>\n",
        ML + (W - ML - MR) / 2.0,
        fmt_num(slice.l1.to_f64())
    ));

    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML:.2}\" y1=\"{MT:.2}\" x2=\"{ML:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - MB
    ));
    let xstep = tick_step(x1 - x0, 8.0);
    let mut xt = (x0 / xstep).ceil() * xstep;
    while xt <= x1 {
        svg.push_str(&format!(
            "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>\n",
            px(xt),
            H - MB,
            H - MB + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            px(xt),
            H - MB + 20.0,
            fmt_num(xt)
        ));
        xt += xstep;
    }
    let ystep = tick_step(y1 - y0, 8.0);
    let mut yt = (y0 / ystep).ceil() * ystep;
    while yt <= y1 {
        svg.push_str(&format!(
            "<line x1=\"{1:.2}\" y1=\"{0:.2}\" x2=\"{2:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>\n",
            py(yt),
            ML - 5.0,
            ML
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            ML - 9.0,
            py(yt) + 4.0,
            fmt_num(yt)
        ));
        yt += ystep;
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">L2</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 8.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">L3</text>\n",
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    ));

    for (bi, branch) in slice.branches.iter().enumerate() {
        if branch.is_empty() {
            continue;
        }
        let color = PALETTE[bi % PALETTE.len()];
        let mut points = String::new();
        for p in branch {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                px(p.l2.to_f64()),
                py(p.l3.to_f64())
            ));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.3\" points=\"{}\"/>\n",
            points.trim_end()
        ));
    }

    for c in cusps {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"7\" fill=\"none\" stroke=\"black\" stroke-width=\"1.6\"/>\n",
            px(c.l2.to_f64()),
            py(c.l3.to_f64())
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Short deterministic number formatting for plot labels.
fn fmt_num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::validate_geometry;

    fn wide_platform() -> ManipulatorGeometry<f64> {
        validate_geometry(15.91, 0.0, 10.0, 17.04, 16.54, 20.84).unwrap()
    }

    #[test]
    fn traced_points_lie_on_the_singular_set() {
        let geom = wide_platform();
        let slice = trace_slice(&geom, &14.98, 128);
        let mut count = 0;
        for b in &slice.branches {
            for p in b {
                let pose = SlicePose {
                    l1: 14.98,
                    alpha: p.alpha,
                    theta1: p.theta1,
                };
                let (l2, l3, th2, th3) = pose_to_joints(&geom, &pose, &1e-8).unwrap();
                assert!((l2 - p.l2).abs() < 1e-9 && (l3 - p.l3).abs() < 1e-9);
                let r = singularity_residual(&geom, &[p.theta1, th2, th3]).abs();
                assert!(r < 1e-4, "residual {r} at alpha {}", p.alpha);
                count += 1;
            }
        }
        assert!(count > 200, "only {count} curve points traced");
    }

    #[test]
    fn doubling_samples_keeps_topology_and_tightens_gaps() {
        let geom = wide_platform();
        let coarse = trace_slice(&geom, &14.98, 128);
        let fine = trace_slice(&geom, &14.98, 256);
        assert_eq!(coarse.branches.len(), fine.branches.len());
        let max_gap = |s: &SingularCurveSlice<f64>| {
            let mut g: f64 = 0.0;
            for b in &s.branches {
                for w in b.windows(2) {
                    let da = w[1].alpha - w[0].alpha;
                    let dt = wrap_diff(w[1].theta1, w[0].theta1);
                    g = g.max((da * da + dt * dt).sqrt());
                }
            }
            g
        };
        assert!(max_gap(&fine) < max_gap(&coarse));
    }

    #[test]
    fn parallel_leg_poses_appear_on_the_traced_curves() {
        // Solve for poses where all three leg directions are equal (the
        // lines meet at infinity): two conditions on (α, θ₁) at fixed L₁.
        let geom = wide_platform();
        let l1 = 14.98;
        let g3 = geom.third_vertex_along();
        let h = geom.h;
        let residual = |a: f64, th: f64| -> (f64, f64) {
            (
                geom.d1 * (a - th).sin() + geom.a2x * th.sin(),
                g3 * (a - th).sin() + h * (a - th).cos() - geom.a3y * th.cos()
                    + geom.a3x * th.sin(),
            )
        };
        let slice = trace_slice(&geom, &l1, 512);
        let mut found = 0;
        for i in 0..12 {
            for j in 0..12 {
                let mut a = -3.0 + 0.5 * (i as f64);
                let mut th = -3.0 + 0.5 * (j as f64);
                let mut ok = false;
                for _ in 0..40 {
                    let (f, g) = residual(a, th);
                    let e = 1e-7;
                    let (fa, ga) = residual(a + e, th);
                    let (ft, gt) = residual(a, th + e);
                    let (ja, jb) = ((fa - f) / e, (ft - f) / e);
                    let (jc, jd) = ((ga - g) / e, (gt - g) / e);
                    let det = ja * jd - jb * jc;
                    if det.abs() < 1e-12 {
                        break;
                    }
                    let da = (f * jd - g * jb) / det;
                    let dt = (ja * g - jc * f) / det;
                    a -= da;
                    th -= dt;
                    if da.abs().max(dt.abs()) < 1e-12 {
                        ok = true;
                        break;
                    }
                }
                let (f, g) = residual(a, th);
                if !(ok && f.abs() < 1e-9 && g.abs() < 1e-9) {
                    continue;
                }
                let (a, th) = (wrap_diff(a, 0.0), wrap_diff(th, 0.0));
                // This pose has all legs parallel, hence lies on the singular
                // set; the traced curve must pass nearby.
                let mut best = f64::INFINITY;
                for b in &slice.branches {
                    for p in b {
                        let d = wrap_diff(p.alpha, a)
                            .hypot(wrap_diff(p.theta1, th));
                        best = best.min(d);
                    }
                }
                assert!(
                    best < 0.05,
                    "parallel pose (alpha {a}, theta1 {th}) missed by {best}"
                );
                found += 1;
            }
        }
        assert!(found >= 1, "no parallel-legs pose found to check against");
    }

    #[test]
    fn empty_slice_still_renders_a_document() {
        let slice = SingularCurveSlice::<f64> {
            l1: 5.0,
            branches: Vec::new(),
            degenerate_leg_flags: 0,
        };
        let svg = emit_plot::<f64, f64>(&slice, &[]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("L2") && svg.contains("L3"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn csv_lists_every_point_under_its_branch() {
        let geom = wide_platform();
        let slice = trace_slice(&geom, &14.98, 64);
        let csv = points_csv(&slice);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "alpha_deg,theta1_deg,L2,L3,branch_id"
        );
        let total: usize = slice.branches.iter().map(|b| b.len()).sum();
        assert_eq!(csv.lines().count(), total + 1);
        let max_id: usize = slice.branches.len() - 1;
        for line in lines {
            let id: usize = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(id <= max_id);
        }
    }
}
