//! Dense univariate polynomials with ascending coefficients.

use crate::scalar::Scalar;

/// Dense univariate polynomial; `coeffs[i]` multiplies `x^i`.
///
/// The coefficient vector is never empty. Degree is simply `len - 1`; callers
/// that need a *numerically meaningful* degree trim trailing coefficients
/// below a relative threshold first ([`UniPoly::trim_trailing_rel`]).
#[derive(Clone, Debug)]
pub struct UniPoly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> UniPoly<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            return Self::zero_poly();
        }
        UniPoly { coeffs }
    }

    pub fn zero_poly() -> Self {
        UniPoly { coeffs: vec![T::zero()] }
    }

    pub fn constant(c: T) -> Self {
        UniPoly { coeffs: vec![c] }
    }

    /// Monic product of `(x - r)` over the given roots.
    pub fn from_roots(roots: &[T]) -> Self {
        let mut p = UniPoly::constant(T::one());
        for r in roots {
            let factor = UniPoly::new(vec![r.neg_ref(), T::one()]);
            p = p.mul(&factor);
        }
        p
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_abs_coeff(&self) -> T {
        let mut m = T::zero();
        for c in &self.coeffs {
            m = m.max_ref(&c.abs());
        }
        m
    }

    /// True when every coefficient is exactly zero.
    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Drop high-degree coefficients whose magnitude is at most
    /// `max_abs_coeff * rel` — the numeric notion of degree.
    pub fn trim_trailing_rel(&mut self, rel: &T) {
        let threshold = self.max_abs_coeff().mul_ref(rel);
        while self.coeffs.len() > 1 {
            if self.coeffs.last().unwrap().abs() <= threshold {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    /// All coefficients divided by the largest magnitude (no-op for zero).
    pub fn normalized_max(&self) -> Self {
        let m = self.max_abs_coeff();
        if m.is_zero() {
            return self.clone();
        }
        UniPoly { coeffs: self.coeffs.iter().map(|c| c.div_ref(&m)).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| c.mul_ref(s)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            let b = other.coeffs.get(i).cloned().unwrap_or_else(T::zero);
            out.push(a.add_ref(&b));
        }
        UniPoly { coeffs: out }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&T::one().neg_ref()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add_ref(&a.mul_ref(b));
            }
        }
        UniPoly { coeffs: out }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }

    /// `sum |c_i| |x|^i` — the natural scale for relative residuals at `x`.
    pub fn eval_abs(&self, x: &T) -> T {
        let ax = x.abs();
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(&ax).add_ref(&c.abs());
        }
        acc
    }

    /// Simultaneous Horner evaluation of the polynomial and its derivative.
    pub fn eval_with_deriv(&self, x: &T) -> (T, T) {
        let mut p = T::zero();
        let mut dp = T::zero();
        for c in self.coeffs.iter().rev() {
            dp = dp.mul_ref(x).add_ref(&p);
            p = p.mul_ref(x).add_ref(c);
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero_poly();
        }
        let bits = self.coeffs[0].precision_bits();
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul_ref(&T::from_i64(i as i64, bits)))
            .collect();
        UniPoly { coeffs: out }
    }

    /// Coefficients of `p(y + r)` in `y`, ascending (repeated Horner shift):
    /// entry `k` equals the Taylor coefficient `p^(k)(r) / k!`.
    pub fn taylor_at(&self, r: &T) -> Vec<T> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for k in 0..n {
            for i in (k..n - 1).rev() {
                let shifted = a[i + 1].mul_ref(r);
                a[i] = a[i].add_ref(&shifted);
            }
        }
        a
    }

    /// Cauchy bound: every root has magnitude below `1 + max |c_i / c_n|`.
    pub fn cauchy_root_bound(&self) -> T {
        let n = self.coeffs.len() - 1;
        if n == 0 {
            return T::one();
        }
        let lead = self.coeffs[n].abs();
        if lead.is_zero() {
            // Callers trim before asking for bounds; be safe anyway.
            return T::from_i64(1, self.coeffs[0].precision_bits());
        }
        let mut m = T::zero();
        for c in &self.coeffs[..n] {
            m = m.max_ref(&c.abs());
        }
        T::one().add_ref(&m.div_ref(&lead))
    }

    /// Round every coefficient to the given precision.
    pub fn with_precision(&self, bits: u32) -> Self {
        UniPoly { coeffs: self.coeffs.iter().map(|c| c.with_precision(bits)).collect() }
    }

    /// Attempt exact division by `1 + x²`: returns the quotient when the
    /// remainder is relatively below `rel`, else `None`. Used to peel off
    /// the no-real-root factor the half-angle clearing plants at `x = ±i`.
    pub fn try_div_one_plus_square(&self, rel: &T) -> Option<Self> {
        let n = self.degree();
        if n < 2 {
            return None;
        }
        let scale = self.max_abs_coeff();
        if scale.is_zero() {
            return None;
        }
        let threshold = scale.mul_ref(rel);
        let mut a = self.coeffs.clone();
        let mut q = vec![T::zero(); n - 1];
        for i in (2..=n).rev() {
            let c = a[i].clone();
            a[i - 2] = a[i - 2].sub_ref(&c);
            q[i - 2] = c;
        }
        if a[0].abs() > threshold || a[1].abs() > threshold {
            return None;
        }
        Some(UniPoly { coeffs: q })
    }
}
