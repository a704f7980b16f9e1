//! Dense bivariate polynomials in the half-angle variables `(t, t1)`.

use crate::polysolve::UniPoly;
use crate::scalar::Scalar;

/// Which variable of a [`BiPoly`] an operation applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    /// First variable `t` (platform orientation half-angle tangent).
    T,
    /// Second variable `t1` (first leg angle half-angle tangent).
    T1,
}

/// Dense bivariate polynomial; `rows[i][j]` multiplies `t^i * t1^j`.
/// The coefficient matrix is rectangular and never empty.
#[derive(Clone, Debug)]
pub struct BiPoly<T> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> BiPoly<T> {
    pub fn zero(deg_t: usize, deg_t1: usize) -> Self {
        BiPoly { rows: vec![vec![T::zero(); deg_t1 + 1]; deg_t + 1] }
    }

    pub fn constant(c: T) -> Self {
        BiPoly { rows: vec![vec![c]] }
    }

    /// Build from rows (padded to rectangular shape).
    pub fn from_rows(mut rows: Vec<Vec<T>>) -> Self {
        if rows.is_empty() {
            rows.push(vec![T::zero()]);
        }
        let width = rows.iter().map(|r| r.len()).max().unwrap().max(1);
        for r in &mut rows {
            while r.len() < width {
                r.push(T::zero());
            }
        }
        BiPoly { rows }
    }

    pub fn deg_t(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn deg_t1(&self) -> usize {
        self.rows[0].len() - 1
    }

    pub fn coeff(&self, i: usize, j: usize) -> &T {
        &self.rows[i][j]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, v: T) {
        self.rows[i][j] = v;
    }

    pub fn max_abs_coeff(&self) -> T {
        let mut m = T::zero();
        for row in &self.rows {
            for c in row {
                m = m.max_ref(&c.abs());
            }
        }
        m
    }

    pub fn is_identically_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|c| c.is_zero()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let dt = self.deg_t().max(other.deg_t());
        let dt1 = self.deg_t1().max(other.deg_t1());
        let mut out = Self::zero(dt, dt1);
        for (i, row) in out.rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let a = self
                    .rows
                    .get(i)
                    .and_then(|r| r.get(j))
                    .cloned()
                    .unwrap_or_else(T::zero);
                let b = other
                    .rows
                    .get(i)
                    .and_then(|r| r.get(j))
                    .cloned()
                    .unwrap_or_else(T::zero);
                *v = a.add_ref(&b);
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&T::one().neg_ref()))
    }

    pub fn scale(&self, s: &T) -> Self {
        BiPoly {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.mul_ref(s)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.deg_t() + other.deg_t(), self.deg_t1() + other.deg_t1());
        for (i1, r1) in self.rows.iter().enumerate() {
            for (j1, a) in r1.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (i2, r2) in other.rows.iter().enumerate() {
                    for (j2, b) in r2.iter().enumerate() {
                        if b.is_zero() {
                            continue;
                        }
                        let acc = out.rows[i1 + i2][j1 + j2].add_ref(&a.mul_ref(b));
                        out.rows[i1 + i2][j1 + j2] = acc;
                    }
                }
            }
        }
        out
    }

    /// Horner evaluation at `(t, t1)`.
    pub fn eval(&self, t: &T, t1: &T) -> T {
        let mut acc = T::zero();
        for row in self.rows.iter().rev() {
            let mut inner = T::zero();
            for c in row.iter().rev() {
                inner = inner.mul_ref(t1).add_ref(c);
            }
            acc = acc.mul_ref(t).add_ref(&inner);
        }
        acc
    }

    /// `sum |c_ij| |t|^i |t1|^j` — the residual scale at `(t, t1)`.
    pub fn eval_abs(&self, t: &T, t1: &T) -> T {
        let at = t.abs();
        let at1 = t1.abs();
        let mut acc = T::zero();
        for row in self.rows.iter().rev() {
            let mut inner = T::zero();
            for c in row.iter().rev() {
                inner = inner.mul_ref(&at1).add_ref(&c.abs());
            }
            acc = acc.mul_ref(&at).add_ref(&inner);
        }
        acc
    }

    pub fn derivative(&self, var: Var) -> Self {
        let bits = self.rows[0][0].precision_bits();
        match var {
            Var::T => {
                if self.rows.len() == 1 {
                    return Self::zero(0, 0);
                }
                let rows = self
                    .rows
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, row)| {
                        let k = T::from_i64(i as i64, bits);
                        row.iter().map(|c| c.mul_ref(&k)).collect()
                    })
                    .collect();
                BiPoly { rows }
            }
            Var::T1 => {
                if self.rows[0].len() == 1 {
                    return Self::zero(0, 0);
                }
                let rows = self
                    .rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .skip(1)
                            .map(|(j, c)| c.mul_ref(&T::from_i64(j as i64, bits)))
                            .collect()
                    })
                    .collect();
                BiPoly { rows }
            }
        }
    }

    /// Specialize `t1` to a value: the coefficients (in `t`) of the result.
    pub fn uni_in_t_at(&self, t1: &T) -> UniPoly<T> {
        let coeffs = self
            .rows
            .iter()
            .map(|row| {
                let mut inner = T::zero();
                for c in row.iter().rev() {
                    inner = inner.mul_ref(t1).add_ref(c);
                }
                inner
            })
            .collect();
        UniPoly::new(coeffs)
    }

    /// Specialize `t` to a value: the coefficients (in `t1`) of the result.
    pub fn uni_in_t1_at(&self, t: &T) -> UniPoly<T> {
        let width = self.rows[0].len();
        let mut coeffs = Vec::with_capacity(width);
        for j in 0..width {
            let mut acc = T::zero();
            for row in self.rows.iter().rev() {
                acc = acc.mul_ref(t).add_ref(&row[j]);
            }
            coeffs.push(acc);
        }
        UniPoly::new(coeffs)
    }

    /// Zero out entries at or below `max_abs_coeff * rel` and shrink the
    /// matrix so the stored degrees are numerically meaningful.
    pub fn trim_rel(&mut self, rel: &T) {
        let threshold = self.max_abs_coeff().mul_ref(rel);
        for row in &mut self.rows {
            for c in row.iter_mut() {
                if c.abs() <= threshold {
                    *c = T::zero();
                }
            }
        }
        while self.rows.len() > 1 && self.rows.last().unwrap().iter().all(|c| c.is_zero()) {
            self.rows.pop();
        }
        let mut width = self.rows[0].len();
        while width > 1 && self.rows.iter().all(|r| r[width - 1].is_zero()) {
            width -= 1;
        }
        for row in &mut self.rows {
            row.truncate(width);
        }
    }

    pub fn with_precision(&self, bits: u32) -> Self {
        BiPoly {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.with_precision(bits)).collect())
                .collect(),
        }
    }

    /// Attempt exact division by `1 + x^2` along one variable. Returns the
    /// quotient when the relative remainder is at most `rel`, else `None`.
    pub fn try_div_one_plus_square(&self, var: Var, rel: &T) -> Option<Self> {
        let scale = self.max_abs_coeff();
        if scale.is_zero() {
            return None;
        }
        let threshold = scale.mul_ref(rel);
        match var {
            Var::T => {
                let n = self.deg_t();
                if n < 2 {
                    return None;
                }
                // Column-wise synthetic division by x^2 + 1 from the top.
                let width = self.rows[0].len();
                let mut a = self.rows.clone();
                let mut q = vec![vec![T::zero(); width]; n - 1];
                for i in (2..=n).rev() {
                    for j in 0..width {
                        let c = a[i][j].clone();
                        q[i - 2][j] = c.clone();
                        a[i - 2][j] = a[i - 2][j].sub_ref(&c);
                        a[i][j] = T::zero();
                    }
                }
                for j in 0..width {
                    if a[0][j].abs() > threshold || a[1][j].abs() > threshold {
                        return None;
                    }
                }
                Some(BiPoly { rows: q })
            }
            Var::T1 => {
                let m = self.deg_t1();
                if m < 2 {
                    return None;
                }
                let height = self.rows.len();
                let mut a = self.rows.clone();
                let mut q = vec![vec![T::zero(); m - 1]; height];
                for j in (2..=m).rev() {
                    for i in 0..height {
                        let c = a[i][j].clone();
                        q[i][j - 2] = c.clone();
                        a[i][j - 2] = a[i][j - 2].sub_ref(&c);
                        a[i][j] = T::zero();
                    }
                }
                for row in &a {
                    if row[0].abs() > threshold || row[1].abs() > threshold {
                        return None;
                    }
                }
                Some(BiPoly { rows: q })
            }
        }
    }
}
