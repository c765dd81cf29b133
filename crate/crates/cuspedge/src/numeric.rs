//! Small extrapolation and finite-difference helpers.

/// Neville's algorithm: value at `x = 0` of the polynomial interpolating
/// `(xs[i], ys[i])`. Used to push sampled limits onto the singular set.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty());
    let mut p = ys.to_vec();
    let n = p.len();
    for level in 1..n {
        for i in 0..(n - level) {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// Fourth-order central difference for f'(0) from f(±h), f(±2h).
pub fn central_derivative_4(fm2: f64, fm1: f64, fp1: f64, fp2: f64, h: f64) -> f64 {
    (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h)
}

/// Extrapolate `g(s) -> s = 0` from symmetric samples `g(±s_k)`, splitting
/// into even and odd parts so each extrapolation runs in powers of `s²`.
/// Returns `(limit, one_sided_derivative)`: the even part yields the limit,
/// the odd part divided by `s` yields the derivative at 0.
pub fn symmetric_limits(s: &[f64], plus: &[f64], minus: &[f64]) -> (f64, f64) {
    let s2: Vec<f64> = s.iter().map(|x| x * x).collect();
    let even: Vec<f64> = plus.iter().zip(minus).map(|(a, b)| 0.5 * (a + b)).collect();
    let odd: Vec<f64> = plus
        .iter()
        .zip(minus)
        .zip(s)
        .map(|((a, b), x)| 0.5 * (a - b) / x)
        .collect();
    (neville_at_zero(&s2, &even), neville_at_zero(&s2, &odd))
}
