//! Curves on the unit sphere: covariant differentiation, ordinary-cusp
//! detection and the signed cuspidal curvature of a spherical cusp.
//!
//! For a curve `c` on S² the tangent plane at `c(t)` is `c(t)^⊥`, so the
//! covariant derivative of a tangent field `X` along `c` is the tangential
//! projection of the ambient derivative: `D_t X = X' − ⟨X', c⟩ c`.
//!
//! At a singular point of `c` (`ċ(t₀) = 0`) with `det(c, D_tċ, D_tD_tċ) ≠ 0`
//! the curve has an ordinary cusp, and
//!
//! ```text
//! μ = det(c, D_tċ, D_tD_tċ) / |D_tċ|^{5/2}
//! ```
//!
//! is its cuspidal curvature: `μ > 0` is a positive cusp (zig), `μ < 0` a
//! negative cusp (zag).

use crate::jet::{Jet1, JetError, Scalar, Vec3, V3};
use crate::tol::Tolerances;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SphericalError {
    #[error("jet arithmetic: {0}")]
    Jet(#[from] JetError),
    #[error("curve does not lie on the unit sphere (|c|² − 1 residual {residual:.3e} at order {order})")]
    NotUnit { residual: f64, order: usize },
    #[error("field is not tangent to the sphere along the curve (residual {residual:.3e})")]
    NotTangent { residual: f64 },
    #[error("curve jet order {order} too low; need at least 3")]
    OrderTooLow { order: usize },
    #[error("t₀ is not a singular point of the curve (|ċ| = {speed:.3e})")]
    NotSingular { speed: f64 },
    #[error("covariant acceleration vanishes (|D_tċ| = {norm:.3e}); cuspidal curvature undefined")]
    DegenerateAcceleration { norm: f64 },
}

/// Orientation class of a spherical cusp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CuspSign {
    Zig,
    Zag,
    None,
}

/// A curve jet on S² about `t₀ = 0` with the derived cusp frame evaluated
/// at the center.
#[derive(Debug, Clone)]
pub struct SphericalCurveJet {
    pub c: V3<Jet1>,
    /// Velocity `ċ(t₀)`.
    pub cdot: Vec3,
    /// Covariant acceleration `D_tċ(t₀)`.
    pub d_cdot: Vec3,
    /// Second covariant derivative `D_tD_tċ(t₀)`.
    pub dd_cdot: Vec3,
}

const UNIT_TOL: f64 = 1e-9;

impl SphericalCurveJet {
    /// Validate that `c` lies on the unit sphere to jet order and derive the
    /// cusp frame.
    pub fn new(c: V3<Jet1>) -> Result<Self, SphericalError> {
        let order = c.x.order();
        if order < 3 {
            return Err(SphericalError::OrderTooLow { order });
        }
        let n2 = c.dot(&c);
        for k in 0..=n2.order() {
            let res = (n2.coeff(k) - if k == 0 { 1.0 } else { 0.0 }).abs();
            if res > UNIT_TOL {
                return Err(SphericalError::NotUnit { residual: res, order: k });
            }
        }
        let cdot = c.derivative();
        let d_cdot = covariant_derivative(&cdot, &c)?;
        let dd_cdot = covariant_derivative(&d_cdot, &c)?;
        Ok(SphericalCurveJet {
            cdot: Vec3::from_array(cdot.eval1(0.0)),
            d_cdot: Vec3::from_array(d_cdot.eval1(0.0)),
            dd_cdot: Vec3::from_array(dd_cdot.eval1(0.0)),
            c,
        })
    }
}

/// Covariant derivative of the tangent field `x` along the spherical curve
/// `c`: the ambient derivative projected back onto the tangent planes.
pub fn covariant_derivative(x: &V3<Jet1>, c: &V3<Jet1>) -> Result<V3<Jet1>, SphericalError> {
    let tangency = x.dot(c);
    let scale = x.dot(x).value().sqrt().max(1.0);
    for k in 0..=tangency.order() {
        if tangency.coeff(k).abs() > 1e-8 * scale {
            return Err(SphericalError::NotTangent { residual: tangency.coeff(k).abs() });
        }
    }
    let xp = x.derivative();
    let p = xp.x.order().min(c.x.order());
    let xp = xp.truncated(p);
    let c = c.truncated(p);
    Ok(xp.sub(&c.mul_scalar(&xp.dot(&c))))
}

/// Is the curve singular at the center with a non-degenerate (ordinary) cusp?
pub fn is_ordinary_cusp(j: &SphericalCurveJet, tol: &Tolerances) -> Result<bool, SphericalError> {
    let speed = j.cdot.dot(&j.cdot).sqrt();
    let acc = j.d_cdot.dot(&j.d_cdot).sqrt();
    if speed > 1e-8 * acc.max(1.0) {
        return Err(SphericalError::NotSingular { speed });
    }
    let c0 = Vec3::from_array(j.c.eval1(0.0));
    let det = Vec3::det3(&c0, &j.d_cdot, &j.dd_cdot);
    if acc <= tol.sing {
        return Err(SphericalError::DegenerateAcceleration { norm: acc });
    }
    // dimensionless test: the determinant scaled the way μ is, relative to
    // the size of the third-derivative data
    let jerk = j.dd_cdot.dot(&j.dd_cdot).sqrt();
    let scale = acc.powf(2.5).max(acc * jerk).max(f64::MIN_POSITIVE);
    Ok(det.abs() / scale > 1e-7)
}

/// Full cusp analysis at the center of the curve jet.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CuspData {
    pub is_singular: bool,
    pub is_ordinary_cusp: bool,
    /// Signed cuspidal curvature; present only for ordinary cusps.
    pub mu: Option<f64>,
    pub sign: CuspSign,
}

pub fn cuspidal_curvature(
    j: &SphericalCurveJet,
    tol: &Tolerances,
) -> Result<CuspData, SphericalError> {
    let ordinary = is_ordinary_cusp(j, tol)?;
    if !ordinary {
        return Ok(CuspData {
            is_singular: true,
            is_ordinary_cusp: false,
            mu: None,
            sign: CuspSign::None,
        });
    }
    let c0 = Vec3::from_array(j.c.eval1(0.0));
    let acc = j.d_cdot.dot(&j.d_cdot).sqrt();
    let mu = Vec3::det3(&c0, &j.d_cdot, &j.dd_cdot) / acc.powf(2.5);
    let sign = if mu > 0.0 { CuspSign::Zig } else { CuspSign::Zag };
    Ok(CuspData { is_singular: true, is_ordinary_cusp: true, mu: Some(mu), sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;
    use crate::jet::Scalar;

    fn curve(xs: &str, ys: &str, zs: &str, order: usize) -> V3<Jet1> {
        let mut co = vec![0.0; order + 1];
        co[1] = 1.0;
        let t = Jet1::from_coeffs(co);
        let dummy = Jet1::zero(order);
        V3::new(
            parse_expression(xs).unwrap().eval(&t, &dummy).unwrap(),
            parse_expression(ys).unwrap().eval(&t, &dummy).unwrap(),
            parse_expression(zs).unwrap().eval(&t, &dummy).unwrap(),
        )
    }

    fn nu_plus(order: usize) -> V3<Jet1> {
        let d = "sqrt(1 + 4*u^4 + 64*u^6)";
        curve(
            &format!("8*u^3/{d}"),
            &format!("-2*u^2/{d}"),
            &format!("1/{d}"),
            order,
        )
    }

    fn nu_minus(order: usize) -> V3<Jet1> {
        let d = "sqrt(1 + 4*u^4 + 64*u^6)";
        curve(
            &format!("8*u^3/{d}"),
            &format!("2*u^2/{d}"),
            &format!("1/{d}"),
            order,
        )
    }

    #[test]
    fn equator_is_geodesic() {
        let c = curve("cos(u)", "sin(u)", "0", 5);
        let j = SphericalCurveJet::new(c).unwrap();
        assert!(j.d_cdot.dot(&j.d_cdot).sqrt() < 1e-12);
    }

    #[test]
    fn small_circle_geodesic_curvature() {
        // radius r = 1/√2: |D_tċ| = r·√(1−r²) with unit-θ parametrization = 1/2
        let c = curve(
            "cos(u)/sqrt(2)",
            "sin(u)/sqrt(2)",
            "1/sqrt(2)",
            5,
        );
        let j = SphericalCurveJet::new(c).unwrap();
        let n = j.d_cdot.dot(&j.d_cdot).sqrt();
        assert!((n - 0.5).abs() < 1e-12, "|D_t cdot| = {n}");
    }

    #[test]
    fn constant_curve_zero_field() {
        let c = curve("0", "0", "1", 4);
        let z = V3::new(Jet1::zero(4), Jet1::zero(4), Jet1::zero(4));
        let d = covariant_derivative(&z, &c).unwrap();
        assert_eq!(d.eval1(0.0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn gauss_locus_cusps_of_quartic_pair() {
        let tol = Tolerances::default();
        let jp = SphericalCurveJet::new(nu_plus(5)).unwrap();
        assert!(is_ordinary_cusp(&jp, &tol).unwrap());
        // intermediates: D_tċ = (0,−4,0), det = 192
        let diff = Vec3::from_array([0.0, -4.0, 0.0]).sub(&jp.d_cdot);
        assert!(diff.dot(&diff).sqrt() < 1e-9);
        let c0 = Vec3::from_array(jp.c.eval1(0.0));
        assert!((Vec3::det3(&c0, &jp.d_cdot, &jp.dd_cdot) - 192.0).abs() < 1e-8);
        let data = cuspidal_curvature(&jp, &tol).unwrap();
        assert!((data.mu.unwrap() - 6.0).abs() < 1e-9, "mu = {:?}", data.mu);
        assert_eq!(data.sign, CuspSign::Zig);

        let jm = SphericalCurveJet::new(nu_minus(5)).unwrap();
        let data = cuspidal_curvature(&jm, &tol).unwrap();
        assert!((data.mu.unwrap() + 6.0).abs() < 1e-9, "mu = {:?}", data.mu);
        assert_eq!(data.sign, CuspSign::Zag);
    }

    #[test]
    fn regular_point_rejected() {
        let c = curve("cos(u)", "sin(u)", "0", 5);
        let j = SphericalCurveJet::new(c).unwrap();
        assert!(matches!(
            is_ordinary_cusp(&j, &Tolerances::default()),
            Err(SphericalError::NotSingular { .. })
        ));
    }

    #[test]
    fn planar_singularity_is_not_ordinary() {
        // c(t) = (sin t², 0, cos t²): singular at 0 but D_tċ ∥ D_tD_tċ
        let c = curve("sin(u^2)", "0", "cos(u^2)", 6);
        let j = SphericalCurveJet::new(c).unwrap();
        assert!(!is_ordinary_cusp(&j, &Tolerances::default()).unwrap());
        let data = cuspidal_curvature(&j, &Tolerances::default()).unwrap();
        assert!(!data.is_ordinary_cusp);
        assert!(data.mu.is_none());
        assert_eq!(data.sign, CuspSign::None);
    }

    #[test]
    fn mu_antisymmetry_and_double_flip() {
        let tol = Tolerances::default();
        let flip_t = |c: &V3<Jet1>| {
            c.map(|j| {
                let co: Vec<f64> = (0..=j.order())
                    .map(|k| j.coeff(k) * if k % 2 == 1 { -1.0 } else { 1.0 })
                    .collect();
                Jet1::from_coeffs(co)
            })
        };
        let base = nu_plus(5);
        let mu0 = cuspidal_curvature(&SphericalCurveJet::new(base.clone()).unwrap(), &tol)
            .unwrap()
            .mu
            .unwrap();
        // reversing the parameter flips μ
        let mu_rev = cuspidal_curvature(&SphericalCurveJet::new(flip_t(&base)).unwrap(), &tol)
            .unwrap()
            .mu
            .unwrap();
        assert!((mu_rev + mu0).abs() < 1e-12);
        // antipodal map plus reversal leaves μ unchanged
        let mu_both =
            cuspidal_curvature(&SphericalCurveJet::new(flip_t(&base).neg()).unwrap(), &tol)
                .unwrap()
                .mu
                .unwrap();
        assert!((mu_both - mu0).abs() < 1e-12);
    }

    #[test]
    fn mu_invariant_under_reparametrization_and_rotation() {
        let tol = Tolerances::default();
        let base = nu_plus(5);
        let mu0 = cuspidal_curvature(&SphericalCurveJet::new(base.clone()).unwrap(), &tol)
            .unwrap()
            .mu
            .unwrap();
        // monotone reparametrization t = s + 0.3 s² + 0.1 s³
        let rep = Jet1::from_coeffs(vec![0.0, 1.0, 0.3, 0.1, 0.0, 0.0]);
        let re = base.map(|j| j.compose(&rep));
        let mu1 = cuspidal_curvature(&SphericalCurveJet::new(re).unwrap(), &tol)
            .unwrap()
            .mu
            .unwrap();
        assert!((mu1 - mu0).abs() < 1e-8, "{mu1} vs {mu0}");
        // rotation about the x-axis by 0.7
        let (s, c) = (0.7f64.sin(), 0.7f64.cos());
        let rot = V3::new(
            base.x.clone(),
            base.y.scale(c).sub(&base.z.scale(s)),
            base.y.scale(s).add(&base.z.scale(c)),
        );
        let mu2 = cuspidal_curvature(&SphericalCurveJet::new(rot).unwrap(), &tol)
            .unwrap()
            .mu
            .unwrap();
        assert!((mu2 - mu0).abs() < 1e-9);
    }
}
