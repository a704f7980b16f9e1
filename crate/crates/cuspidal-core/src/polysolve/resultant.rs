//! Sylvester resultants of bivariate polynomials, eliminating the first
//! variable `t` by evaluation–interpolation.
//!
//! Direct symbolic expansion of a Sylvester determinant with bivariate
//! entries is quadratic-blowup territory; instead the second variable is
//! pinned at Chebyshev nodes, a numeric determinant is taken per node, and
//! the univariate result is recovered by Newton interpolation. The matrix
//! dimension is fixed by the *nominal* `t`-degrees, so a coefficient that
//! happens to vanish at one node only changes the determinant's value —
//! never the polynomial identity being interpolated.

use rayon::prelude::*;

use crate::polysolve::{BiPoly, PolyError, UniPoly};
use crate::scalar::{digits_to_bits, Scalar};

/// Resultant of `f` and `g` with respect to `t`, as a polynomial in `t1`.
///
/// `digits` sets the target decimal accuracy; the interpolation itself runs
/// with guard bits on top of that. Errors:
/// - [`PolyError::ZeroInput`] if either polynomial is identically zero;
/// - [`PolyError::LeadingCoefficientCollapse`] if the coefficient of the
///   highest power of `t` is negligible across all of `t1` (the caller must
///   trim and retry with the true degree);
/// - [`PolyError::IdenticallyZeroSlice`] if the interpolated resultant is
///   zero to within the scale the inputs could possibly produce — the two
///   curves share a component and elimination is meaningless.
pub fn sylvester_resultant_in_t<T: Scalar>(
    f: &BiPoly<T>,
    g: &BiPoly<T>,
    digits: u32,
) -> Result<UniPoly<T>, PolyError> {
    resultant_impl(f, g, digits, 0)
}

/// Same as [`sylvester_resultant_in_t`] but with `extra` additional
/// interpolation nodes. The result must agree with the minimal-node
/// computation; disagreement would expose an interpolation bug, which makes
/// this the natural self-check hook.
pub fn sylvester_resultant_in_t_oversampled<T: Scalar>(
    f: &BiPoly<T>,
    g: &BiPoly<T>,
    digits: u32,
    extra: usize,
) -> Result<UniPoly<T>, PolyError> {
    resultant_impl(f, g, digits, extra)
}

fn resultant_impl<T: Scalar>(
    f: &BiPoly<T>,
    g: &BiPoly<T>,
    digits: u32,
    extra: usize,
) -> Result<UniPoly<T>, PolyError> {
    if f.is_identically_zero() || g.is_identically_zero() {
        return Err(PolyError::ZeroInput);
    }
    let m = f.deg_t();
    let n = g.deg_t();

    check_leading_row(f, digits)?;
    check_leading_row(g, digits)?;

    // Degenerate eliminations: res_t(a(t1), g) = a(t1)^{deg_t g}.
    if m == 0 {
        let a = f.uni_in_t1_at(&T::zero());
        return Ok(uni_pow(&a, n));
    }
    if n == 0 {
        let b = g.uni_in_t1_at(&T::zero());
        return Ok(uni_pow(&b, m));
    }

    // Bezout-style bound on the t1-degree of the resultant.
    let bound = m * g.deg_t1() + n * f.deg_t1();
    let nodes_needed = bound + 1 + extra;

    // Guard bits: interpolation on [-2, 2] Chebyshev nodes loses at most
    // ~1.4 bits per node through the divided-difference cascade.
    let work_bits = digits_to_bits(digits) + ((nodes_needed * 14) / 10) as u32 + 64;
    let fw = f.with_precision(work_bits);
    let gw = g.with_precision(work_bits);

    let nodes: Vec<T> = chebyshev_nodes(nodes_needed, work_bits);

    let values: Vec<T> = nodes
        .par_iter()
        .map(|x| {
            let fu = fw.uni_in_t_at(x);
            let gu = gw.uni_in_t_at(x);
            sylvester_det(&fu, &gu, m, n)
        })
        .collect();

    let mut res = newton_interpolate(&nodes, &values);

    // Scale against which "identically zero" is judged: the resultant is a
    // sum of (m+n)! products of coefficient-sized entries, so anything this
    // far below the attainable magnitude is structural cancellation, not a
    // small resultant.
    let attainable = f
        .max_abs_coeff()
        .powi(n as u32)
        .mul_ref(&g.max_abs_coeff().powi(m as u32));
    let floor = attainable.mul_ref(&T::exp10(-((digits / 2) as i32), work_bits));
    if res.max_abs_coeff() <= floor {
        return Err(PolyError::IdenticallyZeroSlice);
    }

    // Drop interpolation noise above the true degree.
    res.trim_trailing_rel(&T::exp10(-(digits as i32 - 10), work_bits));
    Ok(res)
}

/// Error if every coefficient of the top `t`-power is negligible: the
/// nominal degree would then be a lie and the Sylvester dimension wrong.
fn check_leading_row<T: Scalar>(p: &BiPoly<T>, digits: u32) -> Result<(), PolyError> {
    if p.deg_t() == 0 {
        return Ok(());
    }
    let scale = p.max_abs_coeff();
    let threshold = scale.mul_ref(&T::exp10(
        -(digits as i32 - 10),
        scale.precision_bits(),
    ));
    let top = p.deg_t();
    for j in 0..=p.deg_t1() {
        if p.coeff(top, j).abs() > threshold {
            return Ok(());
        }
    }
    Err(PolyError::LeadingCoefficientCollapse)
}

fn uni_pow<T: Scalar>(p: &UniPoly<T>, e: usize) -> UniPoly<T> {
    let mut out = UniPoly::constant(T::one());
    for _ in 0..e {
        out = out.mul(p);
    }
    out
}

/// `2 cos(pi (2k+1) / (2N))` for `k = 0..N` — Chebyshev points of the first
/// kind scaled to `[-2, 2]`, well clear of node clustering pathologies.
fn chebyshev_nodes<T: Scalar>(count: usize, bits: u32) -> Vec<T> {
    let pi = T::pi(bits);
    let denom = T::from_i64(2 * count as i64, bits);
    (0..count)
        .map(|k| {
            let num = T::from_i64(2 * k as i64 + 1, bits);
            pi.mul_ref(&num).div_ref(&denom).cos().double()
        })
        .collect()
}

/// Determinant of the Sylvester matrix of `fu` (nominal degree `m`) and
/// `gu` (nominal degree `n`), built at the nominal degrees regardless of
/// how the specialized coefficients happen to look.
fn sylvester_det<T: Scalar>(fu: &UniPoly<T>, gu: &UniPoly<T>, m: usize, n: usize) -> T {
    let dim = m + n;
    let mut fa = fu.coeffs().to_vec();
    fa.resize(m + 1, T::zero());
    let mut ga = gu.coeffs().to_vec();
    ga.resize(n + 1, T::zero());

    let mut mat = vec![vec![T::zero(); dim]; dim];
    // Rows of f coefficients (descending), shifted right one per row.
    for (i, row) in mat.iter_mut().take(n).enumerate() {
        for (k, c) in fa.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
    }
    // Rows of g coefficients under them.
    for (i, row) in mat.iter_mut().skip(n).take(m).enumerate() {
        for (k, c) in ga.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
    }
    det_lu(mat)
}

/// Determinant by LU elimination with partial pivoting.
fn det_lu<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let n = m.len();
    let mut det = T::one();
    let mut flip = false;
    for k in 0..n {
        let mut pivot_row = k;
        let mut best = m[k][k].abs();
        for r in (k + 1)..n {
            let a = m[r][k].abs();
            if a > best {
                best = a;
                pivot_row = r;
            }
        }
        if best.is_zero() {
            return T::zero();
        }
        if pivot_row != k {
            m.swap(k, pivot_row);
            flip = !flip;
        }
        let pivot = m[k][k].clone();
        det = det.mul_ref(&pivot);
        for r in (k + 1)..n {
            if m[r][k].is_zero() {
                continue;
            }
            let factor = m[r][k].div_ref(&pivot);
            for c in (k + 1)..n {
                let delta = factor.mul_ref(&m[k][c]);
                m[r][c] = m[r][c].sub_ref(&delta);
            }
        }
    }
    if flip {
        det.neg_ref()
    } else {
        det
    }
}

/// Classic divided-difference interpolation, then expansion of the Newton
/// form into monomial coefficients.
fn newton_interpolate<T: Scalar>(nodes: &[T], values: &[T]) -> UniPoly<T> {
    let n = nodes.len();
    let mut dd = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = dd[i].sub_ref(&dd[i - 1]);
            let den = nodes[i].sub_ref(&nodes[i - level]);
            dd[i] = num.div_ref(&den);
        }
    }
    // Horner on the Newton form: p = dd[n-1]; p = p*(x - x_k) + dd[k].
    let mut poly = UniPoly::constant(dd[n - 1].clone());
    for k in (0..n - 1).rev() {
        let factor = UniPoly::new(vec![nodes[k].neg_ref(), T::one()]);
        poly = poly.mul(&factor).add(&UniPoly::constant(dd[k].clone()));
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(rows: Vec<Vec<f64>>) -> BiPoly<f64> {
        BiPoly::from_rows(rows)
    }

    #[test]
    fn linear_pair_eliminates_to_two_t1() {
        // f = t - t1, g = t + t1  =>  res_t = 2 t1 ... up to sign convention:
        // det [[1, -t1], [1, t1]] = 2 t1.
        let f = bp(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        let g = bp(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let r = sylvester_resultant_in_t(&f, &g, 12).unwrap();
        assert_eq!(r.degree(), 1);
        assert!(r.coeffs()[0].abs() < 1e-9);
        assert!((r.coeffs()[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn quadratic_against_shifted_line() {
        // f = t^2 - 1, g = t - 2 (no t1 at all): res = f(2) = 3.
        let f = bp(vec![vec![-1.0], vec![0.0], vec![1.0]]);
        let g = bp(vec![vec![-2.0], vec![1.0]]);
        let r = sylvester_resultant_in_t(&f, &g, 12).unwrap();
        assert_eq!(r.degree(), 0);
        assert!((r.coeffs()[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_input_is_rejected() {
        let f = bp(vec![vec![0.0]]);
        let g = bp(vec![vec![1.0], vec![1.0]]);
        assert_eq!(
            sylvester_resultant_in_t(&f, &g, 12).unwrap_err(),
            PolyError::ZeroInput
        );
    }

    #[test]
    fn collapsed_leading_row_is_rejected() {
        // Nominal t-degree 2 but the t^2 row is ~1e-30 of the scale.
        let f = bp(vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![1e-30, 1e-31]]);
        let g = bp(vec![vec![-2.0], vec![1.0]]);
        assert_eq!(
            sylvester_resultant_in_t(&f, &g, 12).unwrap_err(),
            PolyError::LeadingCoefficientCollapse
        );
    }

    #[test]
    fn common_factor_reports_identically_zero() {
        // f = (t - t1)(t + 1), g = (t - t1)(t - 1): shared line t = t1.
        let line = bp(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        let up = bp(vec![vec![1.0], vec![1.0]]);
        let down = bp(vec![vec![-1.0], vec![1.0]]);
        let f = line.mul(&up);
        let g = line.mul(&down);
        assert_eq!(
            sylvester_resultant_in_t(&f, &g, 12).unwrap_err(),
            PolyError::IdenticallyZeroSlice
        );
    }

    #[test]
    fn oversampling_reproduces_the_same_polynomial() {
        // f = t^2 + t1^2 - 4, g = t - t1: res = 2 t1^2 - 4.
        let f = bp(vec![vec![-4.0, 0.0, 1.0], vec![0.0; 3], vec![1.0, 0.0, 0.0]]);
        let g = bp(vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        let a = sylvester_resultant_in_t(&f, &g, 12).unwrap();
        let b = sylvester_resultant_in_t_oversampled(&f, &g, 12, 7).unwrap();
        assert_eq!(a.degree(), b.degree());
        for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((ca - cb).abs() < 1e-8, "{ca} vs {cb}");
        }
    }
}
