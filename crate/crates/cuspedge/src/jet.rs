//! Truncated Taylor-jet arithmetic in one and two variables.
//!
//! A `Jet2` of order `N` stores the normalized Taylor coefficients
//! `c[i][j] = (d^(i+j) f / du^i dv^j) / (i! j!)` of a scalar function at a
//! base point, for all `i + j <= N`. Products are truncated Cauchy products,
//! so every partial derivative carried by a jet is exact up to floating-point
//! round-off. `Jet1` is the univariate analogue used along curves.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum JetError {
    #[error("division by a jet with zero constant term")]
    DivisionByZero,
    #[error("{func} applied outside its domain (value {value})")]
    Domain { func: &'static str, value: f64 },
    #[error("requested partial ({i},{j}) exceeds jet order {order}")]
    OrderExceeded { i: usize, j: usize, order: usize },
    #[error("base point mismatch: expected {expected}, got {got}")]
    BaseMismatch { expected: f64, got: f64 },
    #[error("jet does not vanish on the v=0 axis (max offending coefficient {max:.3e})")]
    AxisNotVanishing { max: f64 },
    #[error("norm of a jet vector vanishing at the base point")]
    VanishingNorm,
}

/// Common scalar interface shared by `f64`, `Jet1` and `Jet2`, so that
/// expression evaluation and vector algebra can be written once.
pub trait Scalar: Clone {
    /// A constant with the same order/shape as `self`.
    fn lift(&self, c: f64) -> Self;
    /// The order-zero (value) part.
    fn value(&self) -> f64;
    /// `Some(value)` when every higher coefficient is negligible.
    fn as_constant(&self) -> Option<f64>;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn div(&self, o: &Self) -> Result<Self, JetError>;

    fn sqrt(&self) -> Result<Self, JetError>;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self, JetError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan(&self) -> Self;
    fn abs(&self) -> Result<Self, JetError>;
    fn powi(&self, n: i64) -> Result<Self, JetError>;
    fn powf(&self, p: f64) -> Result<Self, JetError>;

    fn tan(&self) -> Result<Self, JetError> {
        self.sin().div(&self.cos())
    }
}

const CONST_EPS: f64 = 1e-14;

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn as_constant(&self) -> Option<f64> {
        Some(*self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        if *o == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // mirror the jet division path (multiply by the reciprocal) so that
        // order-zero jet evaluation agrees with scalar evaluation bitwise
        Ok(self * o.recip())
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        if *self < 0.0 {
            return Err(JetError::Domain { func: "sqrt", value: *self });
        }
        Ok(f64::sqrt(*self))
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::Domain { func: "log", value: *self });
        }
        Ok(f64::ln(*self))
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn abs(&self) -> Result<Self, JetError> {
        Ok(f64::abs(*self))
    }
    fn powi(&self, n: i64) -> Result<Self, JetError> {
        pow_by_squaring(self, n)
    }
    fn powf(&self, p: f64) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::Domain { func: "pow", value: *self });
        }
        Ok(f64::powf(*self, p))
    }
}

/// Exponentiation by squaring, shared by all `Scalar` impls so scalar and
/// jet paths multiply in the same order.
fn pow_by_squaring<T: Scalar>(base: &T, n: i64) -> Result<T, JetError> {
    if n < 0 {
        let pos = pow_by_squaring(base, -n)?;
        return base.lift(1.0).div(&pos);
    }
    let mut acc = base.lift(1.0);
    let mut sq = base.clone();
    let mut k = n as u64;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc.mul(&sq);
        }
        k >>= 1;
        if k > 0 {
            sq = sq.mul(&sq);
        }
    }
    Ok(acc)
}

// --- univariate Taylor coefficient tables for elementary functions ------

fn series_sqrt(a0: f64, n: usize) -> Result<Vec<f64>, JetError> {
    if a0 <= 0.0 {
        return Err(JetError::Domain { func: "sqrt", value: a0 });
    }
    let mut b = vec![0.0; n + 1];
    b[0] = a0.sqrt();
    for k in 1..=n {
        b[k] = b[k - 1] * (0.5 - (k as f64 - 1.0)) / (k as f64 * a0);
    }
    Ok(b)
}

fn series_pow(a0: f64, p: f64, n: usize) -> Result<Vec<f64>, JetError> {
    if a0 <= 0.0 {
        return Err(JetError::Domain { func: "pow", value: a0 });
    }
    let mut b = vec![0.0; n + 1];
    b[0] = a0.powf(p);
    for k in 1..=n {
        b[k] = b[k - 1] * (p - (k as f64 - 1.0)) / (k as f64 * a0);
    }
    Ok(b)
}

fn series_exp(a0: f64, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = a0.exp();
    for k in 1..=n {
        b[k] = b[k - 1] / k as f64;
    }
    b
}

fn series_ln(a0: f64, n: usize) -> Result<Vec<f64>, JetError> {
    if a0 <= 0.0 {
        return Err(JetError::Domain { func: "log", value: a0 });
    }
    let mut b = vec![0.0; n + 1];
    b[0] = a0.ln();
    let mut sign = 1.0;
    for k in 1..=n {
        b[k] = sign / (k as f64 * a0.powi(k as i32));
        sign = -sign;
    }
    Ok(b)
}

fn series_sin(a0: f64, n: usize) -> Vec<f64> {
    let (s, c) = a0.sin_cos();
    let cycle = [s, c, -s, -c];
    let mut b = vec![0.0; n + 1];
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        b[k] = cycle[k % 4] / fact;
    }
    b
}

fn series_cos(a0: f64, n: usize) -> Vec<f64> {
    let (s, c) = a0.sin_cos();
    let cycle = [c, -s, -c, s];
    let mut b = vec![0.0; n + 1];
    let mut fact = 1.0;
    for k in 0..=n {
        if k > 0 {
            fact *= k as f64;
        }
        b[k] = cycle[k % 4] / fact;
    }
    b
}

/// Coefficients of atan about `a0`, from `(1 + x^2) atan'(x) = 1`.
fn series_atan(a0: f64, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = a0.atan();
    if n == 0 {
        return b;
    }
    let q = 1.0 + a0 * a0;
    b[1] = 1.0 / q;
    for k in 1..n {
        let prev2 = if k >= 2 { b[k - 1] * (k as f64 - 1.0) } else { 0.0 };
        // q * (k+1) b_{k+1} + 2 a0 k b_k + (k-1) b_{k-1} = 0
        b[k + 1] = -(2.0 * a0 * k as f64 * b[k] + prev2) / (q * (k + 1) as f64);
    }
    b
}

// --- Jet2 ----------------------------------------------------------------

/// Bivariate truncated Taylor jet with normalized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    n: usize,
    c: Vec<f64>,
}

fn tri_len(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

impl Jet2 {
    fn idx(&self, i: usize, j: usize) -> usize {
        // row i holds j = 0..=n-i
        let off: usize = (0..i).map(|a| self.n + 1 - a).sum();
        off + j
    }

    pub fn zero(n: usize) -> Self {
        Jet2 { n, c: vec![0.0; tri_len(n)] }
    }

    pub fn constant(x: f64, n: usize) -> Self {
        let mut j = Self::zero(n);
        j.c[0] = x;
        j
    }

    /// Jet of the coordinate `u` about `u0`.
    pub fn var_u(u0: f64, n: usize) -> Self {
        let mut j = Self::constant(u0, n);
        if n >= 1 {
            let k = j.idx(1, 0);
            j.c[k] = 1.0;
        }
        j
    }

    /// Jet of the coordinate `v` about `v0`.
    pub fn var_v(v0: f64, n: usize) -> Self {
        let mut j = Self::constant(v0, n);
        if n >= 1 {
            let k = j.idx(0, 1);
            j.c[k] = 1.0;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i + j > self.n {
            0.0
        } else {
            self.c[self.idx(i, j)]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, x: f64) {
        assert!(i + j <= self.n);
        let k = self.idx(i, j);
        self.c[k] = x;
    }

    /// The partial derivative value `d^(i+j) / du^i dv^j`.
    pub fn partial(&self, i: usize, j: usize) -> Result<f64, JetError> {
        if i + j > self.n {
            return Err(JetError::OrderExceeded { i, j, order: self.n });
        }
        let mut f = 1.0;
        for k in 2..=i {
            f *= k as f64;
        }
        for k in 2..=j {
            f *= k as f64;
        }
        Ok(self.c[self.idx(i, j)] * f)
    }

    pub fn truncated(&self, n: usize) -> Jet2 {
        let n = n.min(self.n);
        let mut out = Jet2::zero(n);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = out.idx(i, j);
                out.c[k] = self.coeff(i, j);
            }
        }
        out
    }

    /// d/du, one order lower.
    pub fn du(&self) -> Jet2 {
        let n = self.n.saturating_sub(1);
        let mut out = Jet2::zero(n);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = out.idx(i, j);
                out.c[k] = (i as f64 + 1.0) * self.coeff(i + 1, j);
            }
        }
        out
    }

    /// d/dv, one order lower.
    pub fn dv(&self) -> Jet2 {
        let n = self.n.saturating_sub(1);
        let mut out = Jet2::zero(n);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = out.idx(i, j);
                out.c[k] = (j as f64 + 1.0) * self.coeff(i, j + 1);
            }
        }
        out
    }

    /// Restriction to the `v = 0` axis as a univariate jet in `u`.
    pub fn restrict_axis(&self) -> Jet1 {
        Jet1 { c: (0..=self.n).map(|i| self.coeff(i, 0)).collect() }
    }

    /// Extract the jet of `F / v` assuming `F` vanishes on the `v = 0` axis.
    ///
    /// The shifted jet satisfies `v * H = F` up to the reduced order. The
    /// precondition is checked against `tol` scaled by the largest
    /// coefficient magnitude.
    pub fn divide_by_v(&self, tol: f64) -> Result<Jet2, JetError> {
        let scale = self.c.iter().fold(0.0f64, |m, x| m.max(f64::abs(*x))).max(1.0);
        let mut worst = 0.0f64;
        for i in 0..=self.n {
            worst = worst.max(self.coeff(i, 0).abs());
        }
        if worst > tol * scale {
            return Err(JetError::AxisNotVanishing { max: worst });
        }
        let n = self.n.saturating_sub(1);
        let mut out = Jet2::zero(n);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = out.idx(i, j);
                out.c[k] = self.coeff(i, j + 1);
            }
        }
        Ok(out)
    }

    /// Evaluate the underlying Taylor polynomial at offsets `(du, dv)`.
    pub fn eval(&self, du: f64, dv: f64) -> f64 {
        let mut acc = 0.0;
        // Horner in u, inner Horner in v
        for i in (0..=self.n).rev() {
            let mut row = 0.0;
            for j in (0..=(self.n - i)).rev() {
                row = row * dv + self.coeff(i, j);
            }
            acc = acc * du + row;
        }
        acc
    }

    fn binop(&self, o: &Jet2, f: impl Fn(f64, f64) -> f64) -> Jet2 {
        let n = self.n.min(o.n);
        let mut out = Jet2::zero(n);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let k = out.idx(i, j);
                out.c[k] = f(self.coeff(i, j), o.coeff(i, j));
            }
        }
        out
    }

    fn mul_jet(&self, o: &Jet2) -> Jet2 {
        let n = self.n.min(o.n);
        let mut out = Jet2::zero(n);
        for i1 in 0..=n {
            for j1 in 0..=(n - i1) {
                let a = self.coeff(i1, j1);
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=(n - i1 - j1) {
                    for j2 in 0..=(n - i1 - j1 - i2) {
                        let b = o.coeff(i2, j2);
                        if b == 0.0 {
                            continue;
                        }
                        let k = out.idx(i1 + i2, j1 + j2);
                        out.c[k] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Compose a univariate Taylor table `b` with this jet:
    /// `sum_k b[k] (self - value)^k`, truncated at the jet order.
    pub fn compose_series(&self, b: &[f64]) -> Jet2 {
        let n = self.n;
        let mut d = self.clone();
        d.c[0] = 0.0;
        let top = n.min(b.len() - 1);
        let mut acc = Jet2::constant(b[top], n);
        for k in (0..top).rev() {
            acc = acc.mul_jet(&d);
            acc.c[0] += b[k];
        }
        acc
    }

    fn recip(&self) -> Result<Jet2, JetError> {
        let b0 = self.c[0];
        if b0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // 1/b = (1/b0) * sum (-e)^k with e = b/b0 - 1 nilpotent
        let inv0 = b0.recip();
        let mut e = self.scale(inv0);
        e.c[0] = 0.0;
        let mut acc = Jet2::constant(1.0, self.n);
        for _ in 0..self.n {
            acc = acc.mul_jet(&e).neg();
            acc.c[0] += 1.0;
        }
        Ok(acc.scale(inv0))
    }
}

impl Scalar for Jet2 {
    fn lift(&self, c: f64) -> Self {
        Jet2::constant(c, self.n)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn as_constant(&self) -> Option<f64> {
        let scale = self.c[0].abs().max(1.0);
        if self.c[1..].iter().all(|x| f64::abs(*x) <= CONST_EPS * scale) {
            Some(self.c[0])
        } else {
            None
        }
    }
    fn add(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a + b)
    }
    fn sub(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a - b)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn neg(&self) -> Self {
        Jet2 { n: self.n, c: self.c.iter().map(|x| -x).collect() }
    }
    fn scale(&self, k: f64) -> Self {
        Jet2 { n: self.n, c: self.c.iter().map(|x| x * k).collect() }
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        let n = self.n.min(o.n);
        Ok(self.truncated(n).mul_jet(&o.truncated(n).recip()?))
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_sqrt(self.c[0], self.n)?))
    }
    fn exp(&self) -> Self {
        self.compose_series(&series_exp(self.c[0], self.n))
    }
    fn ln(&self) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_ln(self.c[0], self.n)?))
    }
    fn sin(&self) -> Self {
        self.compose_series(&series_sin(self.c[0], self.n))
    }
    fn cos(&self) -> Self {
        self.compose_series(&series_cos(self.c[0], self.n))
    }
    fn atan(&self) -> Self {
        self.compose_series(&series_atan(self.c[0], self.n))
    }
    fn abs(&self) -> Result<Self, JetError> {
        if self.c[0] > 0.0 {
            Ok(self.clone())
        } else if self.c[0] < 0.0 {
            Ok(Scalar::neg(self))
        } else {
            Err(JetError::Domain { func: "abs", value: 0.0 })
        }
    }
    fn powi(&self, n: i64) -> Result<Self, JetError> {
        pow_by_squaring(self, n)
    }
    fn powf(&self, p: f64) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_pow(self.c[0], p, self.n)?))
    }
}

// --- Jet1 ----------------------------------------------------------------

/// Univariate truncated Taylor jet, coefficient `c[k] = f^(k)(t0)/k!`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    c: Vec<f64>,
}

impl Jet1 {
    pub fn zero(n: usize) -> Self {
        Jet1 { c: vec![0.0; n + 1] }
    }

    pub fn constant(x: f64, n: usize) -> Self {
        let mut j = Self::zero(n);
        j.c[0] = x;
        j
    }

    /// Jet of the parameter itself about `t0`.
    pub fn var(t0: f64, n: usize) -> Self {
        let mut j = Self::constant(t0, n);
        if n >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        Jet1 { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.c.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_coeff(&mut self, k: usize, x: f64) {
        self.c[k] = x;
    }

    /// The derivative value `d^k/dt^k`.
    pub fn deriv_value(&self, k: usize) -> Result<f64, JetError> {
        if k > self.order() {
            return Err(JetError::OrderExceeded { i: k, j: 0, order: self.order() });
        }
        let mut f = 1.0;
        for m in 2..=k {
            f *= m as f64;
        }
        Ok(self.c[k] * f)
    }

    pub fn truncated(&self, n: usize) -> Jet1 {
        let n = n.min(self.order());
        Jet1 { c: self.c[..=n].to_vec() }
    }

    pub fn derivative(&self) -> Jet1 {
        if self.order() == 0 {
            return Jet1::zero(0);
        }
        Jet1 { c: (1..self.c.len()).map(|k| self.c[k] * k as f64).collect() }
    }

    /// Antiderivative with zero constant term, one order higher.
    pub fn integrate(&self) -> Jet1 {
        let mut c = vec![0.0; self.c.len() + 1];
        for k in 0..self.c.len() {
            c[k + 1] = self.c[k] / (k as f64 + 1.0);
        }
        Jet1 { c }
    }

    pub fn eval(&self, dt: f64) -> f64 {
        let mut acc = 0.0;
        for k in (0..self.c.len()).rev() {
            acc = acc * dt + self.c[k];
        }
        acc
    }

    /// Divide by the parameter, assuming a vanishing constant term.
    pub fn divide_by_t(&self, tol: f64) -> Result<Jet1, JetError> {
        let scale = self.c.iter().fold(0.0f64, |m, x| m.max(f64::abs(*x))).max(1.0);
        if self.c[0].abs() > tol * scale {
            return Err(JetError::AxisNotVanishing { max: self.c[0].abs() });
        }
        if self.order() == 0 {
            return Ok(Jet1::zero(0));
        }
        Ok(Jet1 { c: self.c[1..].to_vec() })
    }

    /// Substitute `inner` (which must have zero constant term) into this jet,
    /// treating `self` as a series in its own offset variable.
    pub fn compose(&self, inner: &Jet1) -> Jet1 {
        debug_assert!(inner.c[0].abs() < 1e-9 * inner.c.iter().fold(1.0f64, |m, x| m.max(f64::abs(*x))));
        let n = self.order().min(inner.order());
        let inner = inner.truncated(n);
        let mut acc = Jet1::constant(self.coeff(n), n);
        for k in (0..n).rev() {
            acc = acc.mul(&inner);
            acc.c[0] += self.coeff(k);
        }
        acc
    }

    /// Compositional inverse: for `y(t)` with `y'(0) != 0`, returns the jet of
    /// the offset `t - t0` as a function of the offset `y - y(t0)`.
    pub fn inverse(&self) -> Result<Jet1, JetError> {
        let n = self.order();
        if n < 1 || self.c[1] == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        // solve y(x) - y0 = tau for x by fixed-point iteration; x is nilpotent
        let mut y_off = self.clone();
        y_off.c[0] = 0.0;
        let a1 = self.c[1];
        let tau = Jet1::var(0.0, n);
        let mut x = tau.scale(1.0 / a1);
        for _ in 0..n {
            let r = y_off.compose(&x).sub(&tau);
            x = x.sub(&r.scale(1.0 / a1));
        }
        Ok(x)
    }

    fn binop(&self, o: &Jet1, f: impl Fn(f64, f64) -> f64) -> Jet1 {
        let n = self.order().min(o.order());
        Jet1 { c: (0..=n).map(|k| f(self.coeff(k), o.coeff(k))).collect() }
    }

    fn mul_jet(&self, o: &Jet1) -> Jet1 {
        let n = self.order().min(o.order());
        let mut c = vec![0.0; n + 1];
        for a in 0..=n {
            if self.coeff(a) == 0.0 {
                continue;
            }
            for b in 0..=(n - a) {
                c[a + b] += self.coeff(a) * o.coeff(b);
            }
        }
        Jet1 { c }
    }

    pub fn compose_series(&self, b: &[f64]) -> Jet1 {
        let n = self.order();
        let mut d = self.clone();
        d.c[0] = 0.0;
        let top = n.min(b.len() - 1);
        let mut acc = Jet1::constant(b[top], n);
        for k in (0..top).rev() {
            acc = acc.mul_jet(&d);
            acc.c[0] += b[k];
        }
        acc
    }

    fn recip(&self) -> Result<Jet1, JetError> {
        let b0 = self.c[0];
        if b0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let inv0 = b0.recip();
        let mut e = self.scale(inv0);
        e.c[0] = 0.0;
        let mut acc = Jet1::constant(1.0, self.order());
        for _ in 0..self.order() {
            acc = acc.mul_jet(&e).neg();
            acc.c[0] += 1.0;
        }
        Ok(acc.scale(inv0))
    }
}

impl Scalar for Jet1 {
    fn lift(&self, c: f64) -> Self {
        Jet1::constant(c, self.order())
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn as_constant(&self) -> Option<f64> {
        let scale = self.c[0].abs().max(1.0);
        if self.c[1..].iter().all(|x| f64::abs(*x) <= CONST_EPS * scale) {
            Some(self.c[0])
        } else {
            None
        }
    }
    fn add(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a + b)
    }
    fn sub(&self, o: &Self) -> Self {
        self.binop(o, |a, b| a - b)
    }
    fn mul(&self, o: &Self) -> Self {
        self.mul_jet(o)
    }
    fn neg(&self) -> Self {
        Jet1 { c: self.c.iter().map(|x| -x).collect() }
    }
    fn scale(&self, k: f64) -> Self {
        Jet1 { c: self.c.iter().map(|x| x * k).collect() }
    }
    fn div(&self, o: &Self) -> Result<Self, JetError> {
        let n = self.order().min(o.order());
        Ok(self.truncated(n).mul_jet(&o.truncated(n).recip()?))
    }
    fn sqrt(&self) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_sqrt(self.c[0], self.order())?))
    }
    fn exp(&self) -> Self {
        self.compose_series(&series_exp(self.c[0], self.order()))
    }
    fn ln(&self) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_ln(self.c[0], self.order())?))
    }
    fn sin(&self) -> Self {
        self.compose_series(&series_sin(self.c[0], self.order()))
    }
    fn cos(&self) -> Self {
        self.compose_series(&series_cos(self.c[0], self.order()))
    }
    fn atan(&self) -> Self {
        self.compose_series(&series_atan(self.c[0], self.order()))
    }
    fn abs(&self) -> Result<Self, JetError> {
        if self.c[0] > 0.0 {
            Ok(self.clone())
        } else if self.c[0] < 0.0 {
            Ok(Scalar::neg(self))
        } else {
            Err(JetError::Domain { func: "abs", value: 0.0 })
        }
    }
    fn powi(&self, n: i64) -> Result<Self, JetError> {
        pow_by_squaring(self, n)
    }
    fn powf(&self, p: f64) -> Result<Self, JetError> {
        Ok(self.compose_series(&series_pow(self.c[0], p, self.order())?))
    }
}

// --- composition across arities -----------------------------------------

/// Substitute a parametrized curve `(U(t), V(t))` into a bivariate jet `F`
/// about `(u0, v0)`. `U` and `V` must be based at `(u0, v0)`.
pub fn plug_curve(f: &Jet2, base: (f64, f64), u: &Jet1, v: &Jet1) -> Result<Jet1, JetError> {
    let scale = base.0.abs().max(base.1.abs()).max(1.0);
    if (u.value() - base.0).abs() > 1e-9 * scale {
        return Err(JetError::BaseMismatch { expected: base.0, got: u.value() });
    }
    if (v.value() - base.1).abs() > 1e-9 * scale {
        return Err(JetError::BaseMismatch { expected: base.1, got: v.value() });
    }
    let n = f.order().min(u.order()).min(v.order());
    let mut du = u.truncated(n);
    du.c[0] = 0.0;
    let mut dv = v.truncated(n);
    dv.c[0] = 0.0;

    let mut upow = Vec::with_capacity(n + 1);
    let mut vpow = Vec::with_capacity(n + 1);
    upow.push(Jet1::constant(1.0, n));
    vpow.push(Jet1::constant(1.0, n));
    for k in 1..=n {
        upow.push(upow[k - 1].mul_jet(&du));
        vpow.push(vpow[k - 1].mul_jet(&dv));
    }
    let mut acc = Jet1::zero(n);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let c = f.coeff(i, j);
            if c != 0.0 {
                acc = acc.add(&upow[i].mul_jet(&vpow[j]).scale(c));
            }
        }
    }
    Ok(acc)
}

/// Substitute a bivariate chart `(U(t,s), V(t,s))` into a bivariate jet `F`
/// about `(u0, v0)`.
pub fn compose2(f: &Jet2, base: (f64, f64), u: &Jet2, v: &Jet2) -> Result<Jet2, JetError> {
    let scale = base.0.abs().max(base.1.abs()).max(1.0);
    if (u.value() - base.0).abs() > 1e-9 * scale {
        return Err(JetError::BaseMismatch { expected: base.0, got: u.value() });
    }
    if (v.value() - base.1).abs() > 1e-9 * scale {
        return Err(JetError::BaseMismatch { expected: base.1, got: v.value() });
    }
    let n = f.order().min(u.order()).min(v.order());
    let mut du = u.truncated(n);
    du.c[0] = 0.0;
    let mut dv = v.truncated(n);
    dv.c[0] = 0.0;

    let mut upow = Vec::with_capacity(n + 1);
    let mut vpow = Vec::with_capacity(n + 1);
    upow.push(Jet2::constant(1.0, n));
    vpow.push(Jet2::constant(1.0, n));
    for k in 1..=n {
        upow.push(upow[k - 1].mul_jet(&du));
        vpow.push(vpow[k - 1].mul_jet(&dv));
    }
    let mut acc = Jet2::zero(n);
    for i in 0..=n {
        for j in 0..=(n - i) {
            let c = f.coeff(i, j);
            if c != 0.0 {
                acc = acc.add(&upow[i].mul_jet(&vpow[j]).scale(c));
            }
        }
    }
    Ok(acc)
}

// --- 3-vectors of scalars -------------------------------------------------

/// A 3-vector with components in any jet-like scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct V3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> V3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        V3 { x, y, z }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> V3<U> {
        V3 { x: f(&self.x), y: f(&self.y), z: f(&self.z) }
    }

    pub fn try_map<U>(&self, f: impl Fn(&T) -> Result<U, JetError>) -> Result<V3<U>, JetError> {
        Ok(V3 { x: f(&self.x)?, y: f(&self.y)?, z: f(&self.z)? })
    }

    pub fn add(&self, o: &Self) -> Self {
        V3 { x: self.x.add(&o.x), y: self.y.add(&o.y), z: self.z.add(&o.z) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        V3 { x: self.x.sub(&o.x), y: self.y.sub(&o.y), z: self.z.sub(&o.z) }
    }

    pub fn neg(&self) -> Self {
        V3 { x: self.x.neg(), y: self.y.neg(), z: self.z.neg() }
    }

    pub fn scale(&self, k: f64) -> Self {
        V3 { x: self.x.scale(k), y: self.y.scale(k), z: self.z.scale(k) }
    }

    pub fn mul_scalar(&self, s: &T) -> Self {
        V3 { x: self.x.mul(s), y: self.y.mul(s), z: self.z.mul(s) }
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x.mul(&o.x).add(&self.y.mul(&o.y)).add(&self.z.mul(&o.z))
    }

    pub fn cross(&self, o: &Self) -> Self {
        V3 {
            x: self.y.mul(&o.z).sub(&self.z.mul(&o.y)),
            y: self.z.mul(&o.x).sub(&self.x.mul(&o.z)),
            z: self.x.mul(&o.y).sub(&self.y.mul(&o.x)),
        }
    }

    /// `det(a, b, c) = <a, b x c>`.
    pub fn det3(a: &Self, b: &Self, c: &Self) -> T {
        a.dot(&b.cross(c))
    }

    pub fn norm(&self) -> Result<T, JetError> {
        let n2 = self.dot(self);
        if n2.value() <= 0.0 {
            return Err(JetError::VanishingNorm);
        }
        n2.sqrt()
    }

    pub fn normalized(&self) -> Result<Self, JetError> {
        let n = self.norm()?;
        Ok(V3 { x: self.x.div(&n)?, y: self.y.div(&n)?, z: self.z.div(&n)? })
    }

    pub fn values(&self) -> [f64; 3] {
        [self.x.value(), self.y.value(), self.z.value()]
    }
}

impl V3<Jet2> {
    pub fn du(&self) -> Self {
        self.map(Jet2::du)
    }
    pub fn dv(&self) -> Self {
        self.map(Jet2::dv)
    }
    pub fn restrict_axis(&self) -> V3<Jet1> {
        self.map(Jet2::restrict_axis)
    }
    pub fn divide_by_v(&self, tol: f64) -> Result<Self, JetError> {
        self.try_map(|c| c.divide_by_v(tol))
    }
    pub fn eval(&self, du: f64, dv: f64) -> [f64; 3] {
        [self.x.eval(du, dv), self.y.eval(du, dv), self.z.eval(du, dv)]
    }
    pub fn truncated(&self, n: usize) -> Self {
        self.map(|c| c.truncated(n))
    }
}

impl V3<Jet1> {
    pub fn derivative(&self) -> Self {
        self.map(Jet1::derivative)
    }
    pub fn truncated(&self, n: usize) -> Self {
        self.map(|c| c.truncated(n))
    }
    pub fn eval1(&self, dt: f64) -> [f64; 3] {
        [self.x.eval(dt), self.y.eval(dt), self.z.eval(dt)]
    }
}

pub type Vec3 = V3<f64>;

impl Vec3 {
    pub fn from_array(a: [f64; 3]) -> Self {
        V3 { x: a[0], y: a[1], z: a[2] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn product_of_linear_jets() {
        // (1+u)(1+v) at order 2 = 1 + u + v + uv
        let a = Jet2::var_u(1.0, 2);
        let b = Jet2::var_v(1.0, 2);
        let p = a.mul(&b);
        assert_eq!(p.coeff(0, 0), 1.0);
        assert_eq!(p.coeff(1, 0), 1.0);
        assert_eq!(p.coeff(0, 1), 1.0);
        assert_eq!(p.coeff(1, 1), 1.0);
        assert_eq!(p.coeff(2, 0), 0.0);
    }

    #[test]
    fn geometric_series_reciprocal() {
        // 1/(1-u) at order 3 = 1 + u + u^2 + u^3
        let one = Jet2::constant(1.0, 3);
        let den = one.sub(&Jet2::var_u(0.0, 3));
        let r = one.div(&den).unwrap();
        for i in 0..=3 {
            assert_close(r.coeff(i, 0), 1.0, 1e-15);
        }
    }

    #[test]
    fn subtraction_cancels() {
        let s = Jet2::var_u(0.3, 4).add(&Jet2::var_v(-0.2, 4));
        let z = s.sub(&s);
        assert!(z.c.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn sqrt_of_constant_and_binomial() {
        let c = Jet2::constant(4.0, 3).sqrt().unwrap();
        assert_eq!(c.coeff(0, 0), 2.0);
        assert!(c.coeff(1, 0) == 0.0);

        // sqrt(1+u) = 1 + u/2 - u^2/8 + ...
        let s = Jet2::var_u(1.0, 2).sqrt().unwrap();
        assert_close(s.coeff(0, 0), 1.0, 1e-15);
        assert_close(s.coeff(1, 0), 0.5, 1e-15);
        assert_close(s.coeff(2, 0), -0.125, 1e-15);
    }

    #[test]
    fn pow_const_fractional() {
        let v = Jet2::var_v(0.0, 2);
        let base = Jet2::constant(4.0, 2).add(&v.mul(&v).scale(9.0));
        let p = base.powf(1.25).unwrap();
        assert_close(p.coeff(0, 0), 4.0f64.powf(1.25), 1e-12);
    }

    #[test]
    fn partial_extraction() {
        // v^3/3: partial(0,3) = 2
        let v = Jet2::var_v(0.0, 3);
        let f = v.powi(3).unwrap().scale(1.0 / 3.0);
        assert_close(f.partial(0, 3).unwrap(), 2.0, 1e-15);

        // u*v: partial(1,1) = 1
        let g = Jet2::var_u(0.0, 3).mul(&Jet2::var_v(0.0, 3));
        assert_close(g.partial(1, 1).unwrap(), 1.0, 1e-15);

        // u^4 at u=1: partial(2,0) = 12
        let h = Jet2::var_u(1.0, 4).powi(4).unwrap();
        assert_close(h.partial(2, 0).unwrap(), 12.0, 1e-12);
    }

    #[test]
    fn plug_curve_examples() {
        // F = u^2 + v^2 along (t, t^2), order 4 -> t^2 + t^4
        let u = Jet2::var_u(0.0, 4);
        let v = Jet2::var_v(0.0, 4);
        let f = u.mul(&u).add(&v.mul(&v));
        let ut = Jet1::var(0.0, 4);
        let vt = ut.mul(&ut);
        let r = plug_curve(&f, (0.0, 0.0), &ut, &vt).unwrap();
        assert_close(r.coeff(2), 1.0, 1e-15);
        assert_close(r.coeff(4), 1.0, 1e-15);
        assert_close(r.coeff(1), 0.0, 1e-15);

        // F = u*v along (t, 1+t) -> t + t^2
        let f = Jet2::var_u(0.0, 3).mul(&Jet2::var_v(1.0, 3));
        let vt = Jet1::var(1.0, 3);
        let r = plug_curve(&f, (0.0, 1.0), &Jet1::var(0.0, 3), &vt).unwrap();
        assert_close(r.coeff(1), 1.0, 1e-15);
        assert_close(r.coeff(2), 1.0, 1e-15);

        // F = sin(u) along (t, 0), order 3 -> t - t^3/6
        let f = Jet2::var_u(0.0, 3).sin();
        let r = plug_curve(&f, (0.0, 0.0), &Jet1::var(0.0, 3), &Jet1::constant(0.0, 3)).unwrap();
        assert_close(r.coeff(1), 1.0, 1e-15);
        assert_close(r.coeff(3), -1.0 / 6.0, 1e-15);
    }

    #[test]
    fn divide_by_v_normal_form() {
        // f = (u, v^2, v^3): jet of f_v = (0, 2v, 3v^2) -> h = (0, 2, 3v)
        let n = 4;
        let u = Jet2::var_u(0.0, n);
        let v = Jet2::var_v(0.0, n);
        let f = V3::new(u.clone(), v.mul(&v), v.powi(3).unwrap());
        let fv = f.dv();
        let h = fv.divide_by_v(1e-9).unwrap();
        assert_eq!(h.values(), [0.0, 2.0, 0.0]);
        assert_close(h.z.coeff(0, 1), 3.0, 1e-15);

        // multiply back: v*h == f_v for all stored coefficients
        let vfull = Jet2::var_v(0.0, n - 1);
        let back = h.mul_scalar(&vfull);
        for i in 0..=(n - 1) {
            for j in 0..=(n - 1 - i) {
                assert_close(back.y.coeff(i, j), fv.y.coeff(i, j), 1e-15);
            }
        }
    }

    #[test]
    fn divide_by_v_rejects_nonvanishing() {
        let f = V3::new(
            Jet2::var_u(0.0, 3),
            Jet2::constant(0.0, 3),
            Jet2::constant(0.0, 3),
        );
        assert!(matches!(f.divide_by_v(1e-9), Err(JetError::AxisNotVanishing { .. })));
    }

    #[test]
    fn vector_ops() {
        let e1 = Vec3::from_array([1.0, 0.0, 0.0]);
        let e2 = Vec3::from_array([0.0, 1.0, 0.0]);
        let e3 = e1.cross(&e2);
        assert_eq!(e3.values(), [0.0, 0.0, 1.0]);

        let a = Vec3::from_array([1.0, 0.0, 0.0]);
        let b = Vec3::from_array([0.0, 2.0, 0.0]);
        let c = Vec3::from_array([0.0, 0.0, 6.0]);
        assert_eq!(V3::det3(&a, &b, &c), 12.0);

        assert_eq!(Vec3::from_array([0.0, 0.0, 2.0]).norm().unwrap(), 2.0);
    }

    #[test]
    fn jet1_inverse_roundtrip() {
        // y = 2t + t^2 - t^3; inverse composed with y must be the identity
        let y = Jet1::from_coeffs(vec![0.5, 2.0, 1.0, -1.0, 0.0, 0.0]);
        let inv = y.inverse().unwrap();
        let mut y_off = y.clone();
        y_off.set_coeff(0, 0.0);
        let id = inv.compose(&y_off);
        assert_close(id.coeff(1), 1.0, 1e-12);
        for k in 2..=5 {
            assert_close(id.coeff(k), 0.0, 1e-12);
        }
    }

    #[test]
    fn jet1_integrate_and_derive() {
        let f = Jet1::from_coeffs(vec![1.0, 2.0, 3.0]);
        let fi = f.integrate();
        let back = fi.derivative();
        for k in 0..=2 {
            assert_close(back.coeff(k), f.coeff(k), 1e-15);
        }
    }

    #[test]
    fn compose2_quadratic_chart() {
        // F = u^2 + v with chart u = t + s, v = t*s
        let n = 4;
        let fu = Jet2::var_u(0.0, n);
        let f = fu.mul(&fu).add(&Jet2::var_v(0.0, n));
        let t = Jet2::var_u(0.0, n);
        let s = Jet2::var_v(0.0, n);
        let g = compose2(&f, (0.0, 0.0), &t.add(&s), &t.mul(&s)).unwrap();
        // (t+s)^2 + t*s = t^2 + 3ts + s^2
        assert_close(g.coeff(2, 0), 1.0, 1e-15);
        assert_close(g.coeff(1, 1), 3.0, 1e-15);
        assert_close(g.coeff(0, 2), 1.0, 1e-15);
    }
}
