//! Complete real-root isolation with multiplicity detection.
//!
//! Roots are isolated by walking the derivative chain: the real roots of
//! `p'` split the line into intervals on which `p` is strictly monotonic,
//! so each interval holds at most one root, found by sign-change bisection.
//! Applied recursively down to the linear derivative this needs no root
//! bounds beyond Cauchy's (derivative roots stay inside the convex hull of
//! the polynomial's roots, so one bracket serves the whole chain) and it
//! cannot miss a real root — the property everything downstream leans on,
//! since a missed root is a missed cusp.
//!
//! Isolation runs at a capped precision for speed; accepted roots are then
//! polished at full precision by Newton, switching to the `(m-1)`-th
//! derivative when a root looks `m`-fold (Newton on `p` itself only crawls
//! linearly into a multiple root).

use crate::polysolve::{BiPoly, PolyError, UniPoly, Var};
use crate::scalar::{digits_to_bits, Scalar};

/// Cap for the isolation pass; final polish still runs at full precision.
const CHAIN_BITS_CAP: u32 = 256;
const CHAIN_DIGITS_CAP: u32 = 75;

/// Maximum bisection steps per root (each halves the bracket).
const BISECT_ITERS: usize = 140;

/// A located real root of a univariate polynomial.
#[derive(Clone, Debug)]
pub struct RealRoot<T> {
    /// Refined location.
    pub value: T,
    /// Radius of an interval around `value` containing the root.
    pub radius: T,
    /// Estimated multiplicity; 1 for an ordinary simple root.
    pub multiplicity_hint: usize,
}

/// All real roots of `p`, optionally restricted to `[domain.0, domain.1]`,
/// refined to roughly `digits` decimal digits. Roots are returned sorted
/// ascending. Errors:
/// - [`PolyError::ZeroInput`] when `p` is (numerically) the zero polynomial;
/// - [`PolyError::PrecisionExhausted`] when signs cannot be resolved at the
///   working precision — raise `digits` and retry.
pub fn real_roots<T: Scalar>(
    p: &UniPoly<T>,
    domain: Option<(&T, &T)>,
    digits: u32,
) -> Result<Vec<RealRoot<T>>, PolyError> {
    let full_bits = digits_to_bits(digits) + 32;

    let mut q = p.with_precision(full_bits);
    q.trim_trailing_rel(&T::exp10(-(digits as i32 - 10).max(2), full_bits));
    if q.is_identically_zero() {
        return Err(PolyError::ZeroInput);
    }
    if q.degree() == 0 {
        return Ok(Vec::new());
    }

    let chain_bits = full_bits.min(CHAIN_BITS_CAP);
    let chain_digits = digits.min(CHAIN_DIGITS_CAP);
    let qc = q.with_precision(chain_bits).normalized_max();
    let candidates = isolate_by_derivative_chain(&qc, chain_bits, chain_digits)?;

    // Merge candidates that are closer than a multiple root could split
    // under the chain precision's coefficient rounding.
    let merge_eps = T::exp10(-((digits / 4) as i32), chain_bits);
    let clusters = merge_close(candidates, &merge_eps);

    // Multiplicity hints: count roots in a small disc by Taylor dominance.
    let hint_eps = T::exp10(-((digits / 6) as i32), chain_bits);
    let qf = q.normalized_max();
    let mut out = Vec::with_capacity(clusters.len());
    for (center, cluster_size) in clusters {
        let rho = T::one().add_ref(&center.abs()).mul_ref(&hint_eps);
        let hint = taylor_cluster_count(&qc, &center, &rho).max(cluster_size).max(1);
        let root = polish(&qf, &center, hint, digits, full_bits, chain_digits)?;
        out.push(root);
    }

    if let Some((lo, hi)) = domain {
        out.retain(|r| {
            let slack = T::one().add_ref(&r.value.abs()).mul_ref(&r.radius.max_ref(&merge_eps));
            r.value.add_ref(&slack) >= *lo && r.value.sub_ref(&slack) <= *hi
        });
    }
    out.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite roots"));
    Ok(out)
}

/// Pin one variable of `p` at `at` and solve for the other.
///
/// `solve_for` names the variable being solved. Errors with
/// [`PolyError::IdenticallyZeroSlice`] when the specialized polynomial is
/// zero to within what rounding of `p`'s coefficients could produce — on
/// such a line every value solves the equation and a root list would be a
/// lie.
pub fn solve_for_second_var<T: Scalar>(
    p: &BiPoly<T>,
    solve_for: Var,
    at: &T,
    digits: u32,
) -> Result<Vec<RealRoot<T>>, PolyError> {
    let mut uni = match solve_for {
        Var::T => p.uni_in_t_at(at),
        Var::T1 => p.uni_in_t1_at(at),
    };
    let pinned_deg = match solve_for {
        Var::T => p.deg_t1(),
        Var::T1 => p.deg_t(),
    };
    let scale = p.max_abs_coeff();
    let bits = scale.precision_bits();
    let growth = T::one().add_ref(&at.abs()).powi(pinned_deg as u32);
    let floor = scale
        .mul_ref(&growth)
        .mul_ref(&T::exp10(-((digits / 2) as i32), bits));
    if uni.max_abs_coeff() <= floor {
        return Err(PolyError::IdenticallyZeroSlice);
    }
    uni.trim_trailing_rel(&T::exp10(-(digits as i32 - 10).max(2), bits));
    real_roots(&uni, None, digits)
}

/// Number of polynomial zeros (with multiplicity, counting complex ones) in
/// the disc of the given radius around `center`, estimated by dominance of
/// the Taylor expansion: the index `k` maximizing `|p^(k)(c)/k!| r^k` is the
/// Rouché-dominant term and counts the zeros enclosed.
pub fn taylor_cluster_count<T: Scalar>(p: &UniPoly<T>, center: &T, radius: &T) -> usize {
    let a = p.taylor_at(center);
    let mut best_k = 0usize;
    let mut best = T::zero();
    let mut rk = T::one();
    for (k, c) in a.iter().enumerate() {
        let mag = c.abs().mul_ref(&rk);
        if mag > best {
            best = mag;
            best_k = k;
        }
        rk = rk.mul_ref(radius);
    }
    best_k
}

/// Number of zeros of `p` (multiplicity counted, complex pairs included)
/// inside the disc of `radius` around the real point `center`, by the
/// argument principle: the winding number of the image of the circle under
/// `p`. Unlike Taylor-term dominance this stays exact when coefficient
/// magnitudes are wildly spread, as long as no zero sits on the circle
/// itself. Sampling is refined until no step of the image turns by more
/// than a quarter turn; a sample falling inside the evaluation noise band
/// (a zero nearly on the circle) shrinks the disc slightly, which keeps the
/// result a valid zero count for a disc no larger than requested. If no
/// clean circle is found the Taylor-dominance estimate is returned instead.
pub fn disc_zero_count<T: Scalar>(p: &UniPoly<T>, center: &T, radius: &T) -> usize {
    let shifted = UniPoly::new(p.taylor_at(center));
    let n = shifted.degree();
    if n == 0 || !(shifted.max_abs_coeff() > T::zero()) {
        return 0;
    }
    let bits = shifted.max_abs_coeff().precision_bits();
    let noise = T::exp10(-(((bits as f64) * 0.301) as i32 - 8).max(8), bits);
    let pi = T::pi(bits);
    let two_pi = pi.double();

    let mut r = radius.with_precision(bits);
    for _ in 0..4 {
        // Magnitude bound of the shifted polynomial on the circle, scaling
        // the noise band the samples are tested against.
        let mut band = T::zero();
        let mut rk = T::one();
        for c in shifted.coeffs() {
            band = band.add_ref(&c.abs().mul_ref(&rk));
            rk = rk.mul_ref(&r);
        }
        let floor = band.mul_ref(&noise);

        let mut m = (8 * n).next_power_of_two().max(64);
        'refine: while m <= 4096 {
            let step = two_pi.div_ref(&T::from_i64(m as i64, bits));
            let mut args: Vec<f64> = Vec::with_capacity(m + 1);
            for j in 0..m {
                let phi = step.mul_ref(&T::from_i64(j as i64, bits));
                let zr = r.mul_ref(&phi.cos());
                let zi = r.mul_ref(&phi.sin());
                // Complex Horner on (re, im) pairs.
                let mut vr = shifted.coeffs()[n].clone();
                let mut vi = T::zero();
                for k in (0..n).rev() {
                    let nr = vr.mul_ref(&zr).sub_ref(&vi.mul_ref(&zi));
                    let ni = vr.mul_ref(&zi).add_ref(&vi.mul_ref(&zr));
                    vr = nr.add_ref(&shifted.coeffs()[k]);
                    vi = ni;
                }
                if vr.abs().max_ref(&vi.abs()) <= floor {
                    // A zero grazes the circle; retry on a slightly smaller
                    // disc rather than read a meaningless argument.
                    break 'refine;
                }
                // Normalize before leaving extended precision so the f64
                // argument can't overflow.
                let s = vr.abs().max_ref(&vi.abs());
                args.push(vi.div_ref(&s).to_f64().atan2(vr.div_ref(&s).to_f64()));
            }
            if args.len() == m {
                let mut total = 0.0f64;
                let mut sharp = false;
                for j in 0..m {
                    let mut d = args[(j + 1) % m] - args[j];
                    if d > std::f64::consts::PI {
                        d -= 2.0 * std::f64::consts::PI;
                    } else if d < -std::f64::consts::PI {
                        d += 2.0 * std::f64::consts::PI;
                    }
                    if d.abs() > std::f64::consts::FRAC_PI_2 {
                        sharp = true;
                        break;
                    }
                    total += d;
                }
                if !sharp {
                    return (total / (2.0 * std::f64::consts::PI)).round().max(0.0) as usize;
                }
            }
            m *= 2;
        }
        r = r.mul_ref(&T::from_f64(0.993, bits));
    }
    taylor_cluster_count(p, center, radius)
}

/// Sign of `p` at `x`, with values inside the noise band of the evaluation
/// (relative to `sum |c_i| |x|^i`) reported as zero.
fn sign_at<T: Scalar>(p: &UniPoly<T>, x: &T, zero_eps: &T) -> i8 {
    let v = p.eval(x);
    if v.abs() <= p.eval_abs(x).mul_ref(zero_eps) {
        0
    } else {
        v.signum_i()
    }
}

fn isolate_by_derivative_chain<T: Scalar>(
    qc: &UniPoly<T>,
    chain_bits: u32,
    chain_digits: u32,
) -> Result<Vec<T>, PolyError> {
    let n = qc.degree();
    let zero_eps = T::exp10(-((chain_digits / 2) as i32), chain_bits);
    let width_eps = T::exp10(-30, chain_bits);

    // One bracket serves every level: derivative roots never escape the
    // convex hull of the original roots.
    let bound = qc.cauchy_root_bound().add_ref(&T::one());
    let lo = bound.neg_ref();
    let hi = bound;

    // chain[d] is the (n-d)-th derivative, of degree d, each normalized.
    let mut chain: Vec<UniPoly<T>> = Vec::with_capacity(n);
    chain.push(qc.clone());
    for _ in 1..n {
        let next = chain.last().unwrap().derivative().normalized_max();
        chain.push(next);
    }
    chain.reverse();

    // Linear level: solve directly.
    let lin = &chain[0];
    let mut prev = vec![lin.coeffs()[0].neg_ref().div_ref(&lin.coeffs()[1])];

    for level in chain.iter().skip(1) {
        let mut roots: Vec<T> = Vec::new();

        // Interval endpoints: bracket ends plus the extrema (roots of the
        // derivative, i.e. the previous level).
        let mut xs: Vec<T> = Vec::with_capacity(prev.len() + 2);
        xs.push(lo.clone());
        xs.extend(prev.iter().cloned());
        xs.push(hi.clone());

        let signs: Vec<i8> = xs.iter().map(|x| sign_at(level, x, &zero_eps)).collect();
        if signs[0] == 0 || signs[signs.len() - 1] == 0 {
            return Err(PolyError::PrecisionExhausted {
                stage: "sign resolution at the root bracket ends",
            });
        }

        // An extremum sitting on the axis is itself a (multiple) root, and
        // monotonicity means the adjacent intervals contribute nothing new.
        for (x, s) in xs.iter().zip(&signs).take(xs.len() - 1).skip(1) {
            if *s == 0 {
                roots.push(x.clone());
            }
        }
        for i in 0..xs.len() - 1 {
            if signs[i] != 0 && signs[i + 1] != 0 && signs[i] != signs[i + 1] {
                roots.push(bisect(
                    level, &xs[i], &xs[i + 1], signs[i], &zero_eps, &width_eps,
                ));
            }
        }

        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite candidates"));
        prev = roots;
    }

    Ok(prev)
}

/// Bisection on a bracket with strict sign change; the polynomial is
/// monotonic here, so plain halving cannot stall or miss.
fn bisect<T: Scalar>(
    p: &UniPoly<T>,
    a: &T,
    b: &T,
    sign_a: i8,
    zero_eps: &T,
    width_eps: &T,
) -> T {
    let mut lo = a.clone();
    let mut hi = b.clone();
    for _ in 0..BISECT_ITERS {
        let mid = lo.add_ref(&hi).halve();
        let width = hi.sub_ref(&lo);
        if width <= T::one().add_ref(&mid.abs()).mul_ref(width_eps) {
            return mid;
        }
        match sign_at(p, &mid, zero_eps) {
            0 => return mid,
            s if s == sign_a => lo = mid,
            _ => hi = mid,
        }
    }
    lo.add_ref(&hi).halve()
}

/// Collapse candidates closer than `(1 + |x|) * eps` into one representative
/// (their mean), remembering how many merged — a multiplicity signal.
fn merge_close<T: Scalar>(sorted: Vec<T>, eps: &T) -> Vec<(T, usize)> {
    let mut out: Vec<(T, usize)> = Vec::new();
    for x in sorted {
        match out.last_mut() {
            Some((rep, count))
                if x.sub_ref(rep).abs()
                    <= T::one().add_ref(&rep.abs()).mul_ref(eps) =>
            {
                // Running mean keeps the representative centered.
                let total = T::from_i64(*count as i64 + 1, x.precision_bits());
                let prev_n = T::from_i64(*count as i64, x.precision_bits());
                *rep = rep.mul_ref(&prev_n).add_ref(&x).div_ref(&total);
                *count += 1;
            }
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Full-precision polish of one isolated root.
///
/// A root that looks `m`-fold is refined on the `(m-1)`-th derivative where
/// it is simple; the result must still annihilate the polynomial itself
/// (relative residual below `10^(-digits/2)`), otherwise the hint was wrong
/// and the plain simple-root path is retried.
fn polish<T: Scalar>(
    qf: &UniPoly<T>,
    start: &T,
    hint: usize,
    digits: u32,
    full_bits: u32,
    chain_digits: u32,
) -> Result<RealRoot<T>, PolyError> {
    let degree = qf.degree();
    let hint = hint.min(degree.max(1));
    let accept = T::exp10(-((digits / 2) as i32), full_bits);

    for m in [hint, 1] {
        let mut target = qf.clone();
        for _ in 1..m {
            target = target.derivative().normalized_max();
        }
        if let Some((x, last_step)) = newton(&target, start, digits, full_bits) {
            let ok = qf.eval(&x).abs() <= qf.eval_abs(&x).mul_ref(&accept);
            if ok {
                let floor = T::one()
                    .add_ref(&x.abs())
                    .mul_ref(&T::exp10(-(digits as i32), full_bits));
                let radius = last_step.double().double().max_ref(&floor);
                return Ok(RealRoot { value: x, radius, multiplicity_hint: m });
            }
        }
        if m == 1 {
            break;
        }
    }

    // Newton refused to settle; fall back on the isolation estimate, whose
    // bracket width is what the chain precision guaranteed.
    let radius = T::one()
        .add_ref(&start.abs())
        .mul_ref(&T::exp10(-((chain_digits / 2) as i32), full_bits));
    Ok(RealRoot { value: start.with_precision(full_bits), radius, multiplicity_hint: hint })
}

fn newton<T: Scalar>(p: &UniPoly<T>, start: &T, digits: u32, bits: u32) -> Option<(T, T)> {
    let stop = T::exp10(-(digits as i32) - 10, bits);
    let escape = p.cauchy_root_bound().double();
    let mut x = start.with_precision(bits);
    let mut last_step = T::one();
    // Multiple-root polish converges only linearly when the hint is low,
    // so allow plenty of cheap iterations before giving up.
    for _ in 0..600 {
        let (v, d) = p.eval_with_deriv(&x);
        if !v.is_finite() || !d.is_finite() {
            return None;
        }
        if d.is_zero() {
            return Some((x, last_step));
        }
        let step = v.div_ref(&d);
        x = x.sub_ref(&step);
        if !x.is_finite() || x.abs() > escape {
            return None;
        }
        last_step = step.abs();
        if last_step <= T::one().add_ref(&x.abs()).mul_ref(&stop) {
            break;
        }
    }
    Some((x, last_step))
}
