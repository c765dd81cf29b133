//! Curvature invariants along a cuspidal edge.
//!
//! All formulas are evaluated in an adapted chart `(t, s)` whose `s = 0` axis
//! is the singular curve and whose `∂_s` is null there. The four pointwise
//! invariants are
//!
//! ```text
//! κ_s = sgn(λ_s) det(g_t, g_tt, ν) / |g_t|³           (singular curvature)
//! κ_ν = ⟨g_tt, ν⟩ / |g_t|²                            (limiting normal curvature)
//! κ_c = |g_t|^{3/2} det(g_t, g_ss, g_sss) / |g_t × g_ss|^{5/2}   (cuspidal curvature)
//! κ_t = det(g_t, g_ss, g_tss)/|g_t × g_ss|²
//!       − ⟨g_t, g_ss⟩ det(g_t, g_ss, g_tt) / (|g_t|² |g_t × g_ss|²)  (cuspidal torsion)
//! ```
//!
//! evaluated on the axis. They do not depend on the choice of adapted chart.
//! Derivatives `κ_ν'`, `κ_t'` are taken with respect to arclength of the edge,
//! which is the axis parameter of a *special* adapted chart.

use crate::exec::par_map;
use crate::frontal::{curvatures_at, FrontalError};
use crate::jet::{Jet1, JetError, Scalar, V3};
use crate::locus::{
    build_special_adapted_chart, curve_sample_at, ChartKind, CurveSample, FrontChart, LocusError,
    SingularCurve,
};
use crate::numeric::{central_derivative_4, symmetric_limits};
use crate::surface::SurfaceDefinition;
use crate::tol::Tolerances;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("jet arithmetic: {0}")]
    Jet(#[from] JetError),
    #[error("frontal geometry: {0}")]
    Frontal(#[from] FrontalError),
    #[error("singular locus: {0}")]
    Locus(#[from] LocusError),
    #[error("not a cuspidal edge at ({u}, {v}): {detail}")]
    NotCuspidalEdge { u: f64, v: f64, detail: String },
    #[error("a special adapted chart is required (got an adapted chart)")]
    WrongChartKind,
    #[error("derivative stencil failed: {0}")]
    Stencil(String),
}

/// The four pointwise invariants at one edge point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeInvariants {
    /// Curve parameter of the point (chord length of the traced curve).
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub kappa_s: f64,
    pub kappa_nu: f64,
    pub kappa_c: f64,
    pub kappa_t: f64,
}

/// Univariate jets of the invariants along the chart axis. For a special
/// adapted chart the axis parameter is arclength of the edge, so first
/// coefficients are arclength derivatives.
pub struct InvariantJets {
    pub kappa_s: Jet1,
    pub kappa_nu: Jet1,
    pub kappa_c: Jet1,
    pub kappa_t: Jet1,
}

/// Compute the invariant jets along the axis of an adapted chart.
pub fn invariant_jets(chart: &FrontChart) -> Result<InvariantJets, InvariantError> {
    let gt = chart.g.du().restrict_axis();
    let gtt = chart.g.du().du().restrict_axis();
    let gss_full = chart.g.dv().dv();
    let gss = gss_full.restrict_axis();
    let gsss = gss_full.dv().restrict_axis();
    let gtss = gss_full.du().restrict_axis();
    let nu = chart.nu.restrict_axis();

    // common jet order: limited by the thrice-differentiated position jet
    let p = gsss.x.order().min(nu.x.order()).min(gtss.x.order());
    let tr = |w: &V3<Jet1>| w.truncated(p);
    let (gt, gtt, gss, gsss, gtss, nu) =
        (tr(&gt), tr(&gtt), tr(&gss), tr(&gsss), tr(&gtss), tr(&nu));

    let e = gt.dot(&gt);
    let cross = gt.cross(&gss);
    let c2 = cross.dot(&cross);
    let scale = e.value() * gss.dot(&gss).value();
    if c2.value() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(InvariantError::NotCuspidalEdge {
            u: chart.base.0,
            v: chart.base.1,
            detail: format!("|g_t × g_ss|² = {:.3e} on the axis", c2.value()),
        });
    }
    // chart gauge puts the positive-density side at s > 0, so sgn(λ_s) = +1;
    // assert it rather than assume it.
    let lam_s = chart.lambda.partial(0, 1)?;
    let sgn = if lam_s >= 0.0 { 1.0 } else { -1.0 };

    let kappa_nu = gtt.dot(&nu).div(&e)?;
    let kappa_s = V3::det3(&gt, &gtt, &nu).mul(&e.powf(-1.5)?).scale(sgn);
    let kappa_c = e.powf(0.75)?.mul(&V3::det3(&gt, &gss, &gsss)).mul(&c2.powf(-1.25)?);
    let term1 = V3::det3(&gt, &gss, &gtss).div(&c2)?;
    let term2 = gt.dot(&gss).mul(&V3::det3(&gt, &gss, &gtt)).div(&e.mul(&c2))?;
    let kappa_t = term1.sub(&term2);
    Ok(InvariantJets { kappa_s, kappa_nu, kappa_c, kappa_t })
}

/// Invariants at the center of a chart.
pub fn invariants_from_chart(chart: &FrontChart) -> Result<EdgeInvariants, InvariantError> {
    let jets = invariant_jets(chart)?;
    Ok(EdgeInvariants {
        t: chart.t0,
        u: chart.base.0,
        v: chart.base.1,
        kappa_s: jets.kappa_s.value(),
        kappa_nu: jets.kappa_nu.value(),
        kappa_c: jets.kappa_c.value(),
        kappa_t: jets.kappa_t.value(),
    })
}

/// Invariants at a traced curve sample.
pub fn invariants_at(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<EdgeInvariants, InvariantError> {
    let chart = build_special_adapted_chart(surface, sample, order, tol)?;
    invariants_from_chart(&chart)
}

/// Invariants at every sample of a traced curve (data parallel).
pub fn invariants_along(
    surface: &SurfaceDefinition,
    curve: &SingularCurve,
    order: usize,
    tol: &Tolerances,
) -> Vec<Result<EdgeInvariants, InvariantError>> {
    par_map(&curve.samples, |s| invariants_at(surface, s, order, tol))
}

/// Arclength derivatives of `κ_ν` and `κ_t` at one edge point.
///
/// The reported values come from finite differences on re-polished stencil
/// points along the edge (fourth order, Richardson extrapolated); the jet
/// route differentiates the invariant jets of the special chart directly and
/// serves as an independent cross-check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvariantDerivatives {
    pub kappa_nu_p: f64,
    pub kappa_t_p: f64,
    pub jet_kappa_nu_p: f64,
    pub jet_kappa_t_p: f64,
    /// Worst absolute disagreement between the two routes.
    pub route_gap: f64,
    /// True when a domain boundary forced a one-sided stencil.
    pub one_sided: bool,
}

pub fn invariant_derivatives(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<InvariantDerivatives, InvariantError> {
    let chart = build_special_adapted_chart(surface, sample, order, tol)?;
    let jets = invariant_jets(&chart)?;
    let (jn, jt) = (jets.kappa_nu.coeff(1), jets.kappa_t.coeff(1));

    let h = 0.01;
    let value_at = |tau: f64| -> Result<(f64, f64), InvariantError> {
        let x = chart.to_uv(tau, 0.0);
        if !surface.contains(x.0, x.1) {
            return Err(InvariantError::Stencil(format!(
                "stencil point ({:.4}, {:.4}) leaves the domain",
                x.0, x.1
            )));
        }
        let s = curve_sample_at(surface, x, sample.tangent, tau, order, tol)?;
        let inv = invariants_at(surface, &s, order, tol)?;
        Ok((inv.kappa_nu, inv.kappa_t))
    };

    let central = |hh: f64| -> Result<(f64, f64), InvariantError> {
        let (m2, m1, p1, p2) =
            (value_at(-2.0 * hh)?, value_at(-hh)?, value_at(hh)?, value_at(2.0 * hh)?);
        Ok((
            central_derivative_4(m2.0, m1.0, p1.0, p2.0, hh),
            central_derivative_4(m2.1, m1.1, p1.1, p2.1, hh),
        ))
    };

    let (dn, dt, one_sided) = match (central(h), central(h / 2.0)) {
        (Ok(dh), Ok(dh2)) => (
            (16.0 * dh2.0 - dh.0) / 15.0,
            (16.0 * dh2.1 - dh.1) / 15.0,
            false,
        ),
        _ => {
            // one-sided 5-point fallback toward whichever side stays inside
            let side = if value_at(4.0 * h).is_ok() { 1.0 } else { -1.0 };
            let mut kn = Vec::new();
            let mut kt = Vec::new();
            for j in 0..5 {
                let (a, b) = if j == 0 {
                    let inv = invariants_from_chart(&chart)?;
                    (inv.kappa_nu, inv.kappa_t)
                } else {
                    value_at(side * j as f64 * h)?
                };
                kn.push(a);
                kt.push(b);
            }
            let one = |f: &[f64]| {
                side * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
                    / (12.0 * h)
            };
            (one(&kn), one(&kt), true)
        }
    };

    let route_gap = (dn - jn).abs().max((dt - jt).abs());
    Ok(InvariantDerivatives {
        kappa_nu_p: dn,
        kappa_t_p: dt,
        jet_kappa_nu_p: jn,
        jet_kappa_t_p: jt,
        route_gap,
        one_sided,
    })
}

/// Decide whether the Gaussian curvature stays bounded near the edge: this
/// happens exactly when `κ_ν` vanishes identically along the curve. Returns
/// the verdict and the largest sampled `|κ_ν|`.
pub fn is_bounded_k(
    surface: &SurfaceDefinition,
    curve: &SingularCurve,
    order: usize,
    tol: &Tolerances,
) -> Result<(bool, f64), InvariantError> {
    let idxs = spread_indices(curve.samples.len(), 25);
    let samples: Vec<&CurveSample> = idxs.iter().map(|&i| &curve.samples[i]).collect();
    let vals = par_map(&samples, |s| invariants_at(surface, s, order, tol));
    let mut worst = 0.0f64;
    for v in vals {
        let inv = v?;
        let scale = 1.0 + inv.kappa_s.abs() + inv.kappa_c.abs();
        worst = worst.max(inv.kappa_nu.abs() / scale);
    }
    Ok((worst < tol.bound.max(1e-9), worst))
}

/// Decide whether the edge is a line of curvature of the surface, which
/// happens exactly when `κ_t` vanishes identically along it.
pub fn is_curvature_line(
    surface: &SurfaceDefinition,
    curve: &SingularCurve,
    order: usize,
    tol: &Tolerances,
) -> Result<(bool, f64), InvariantError> {
    let idxs = spread_indices(curve.samples.len(), 25);
    let samples: Vec<&CurveSample> = idxs.iter().map(|&i| &curve.samples[i]).collect();
    let vals = par_map(&samples, |s| invariants_at(surface, s, order, tol));
    let mut worst = 0.0f64;
    for v in vals {
        let inv = v?;
        let scale = 1.0 + inv.kappa_s.abs() + inv.kappa_c.abs();
        worst = worst.max(inv.kappa_t.abs() / scale);
    }
    Ok((worst < tol.bound.max(1e-9), worst))
}

/// The limit of the Gaussian curvature at an edge point where it is bounded.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitGaussian {
    /// Closed form `-(4κ_t² + κ_s κ_c²)/4` from the invariants.
    pub value: f64,
    /// Extrapolated limit of pointwise `K` along the transverse chart line.
    pub sampled: f64,
    pub agrees: bool,
}

pub fn limit_gaussian_curvature(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<LimitGaussian, InvariantError> {
    let chart = build_special_adapted_chart(surface, sample, order, tol)?;
    let inv = invariants_from_chart(&chart)?;
    let value = -(4.0 * inv.kappa_t * inv.kappa_t + inv.kappa_s * inv.kappa_c * inv.kappa_c) / 4.0;

    let s: Vec<f64> = (0..6).map(|k| 0.05 / 2f64.powi(k)).collect();
    let side = |sign: f64| -> Result<Vec<f64>, InvariantError> {
        s.iter()
            .map(|&sk| {
                let x = chart.to_uv(0.0, sign * sk);
                let f = surface.jet_at(x.0, x.1, 3).map_err(LocusError::from)?;
                let c = curvatures_at(&f, x, 1, tol)?;
                c.gaussian.ok_or_else(|| {
                    InvariantError::Stencil("transverse probe hit a singular point".into())
                })
            })
            .collect()
    };
    let (plus, minus) = (side(1.0)?, side(-1.0)?);
    let (sampled, _) = symmetric_limits(&s, &plus, &minus);
    let agrees = (sampled - value).abs() <= tol.k_limit * value.abs().max(1.0);
    Ok(LimitGaussian { value, sampled, agrees })
}

/// Residuals of the moving-frame equations along the axis of a special
/// adapted chart, evaluated at the center:
///
/// ```text
/// g_tt = κ_s h + κ_ν ν,      ν_t = -κ_ν g_t - κ_t h,
/// ν_s = -(κ_c/2) h,          h_t = -κ_s g_t + κ_t ν
/// ```
///
/// Returns the max-norm residual of each equation.
pub fn frame_identity_residuals(chart: &FrontChart) -> Result<[f64; 4], InvariantError> {
    if chart.kind != ChartKind::SpecialAdapted {
        return Err(InvariantError::WrongChartKind);
    }
    let inv = invariants_from_chart(chart)?;
    let at = |w: &V3<crate::jet::Jet2>| w.eval(0.0, 0.0);
    let gt = at(&chart.g.du());
    let gtt = at(&chart.g.du().du());
    let h = at(&chart.h);
    let nu = at(&chart.nu);
    let nut = at(&chart.nu.du());
    let nus = at(&chart.nu.dv());
    let max3 = |r: [f64; 3]| r.iter().fold(0.0f64, |m, x| m.max(f64::abs(*x)));
    let r1 = max3([
        gtt[0] - inv.kappa_s * h[0] - inv.kappa_nu * nu[0],
        gtt[1] - inv.kappa_s * h[1] - inv.kappa_nu * nu[1],
        gtt[2] - inv.kappa_s * h[2] - inv.kappa_nu * nu[2],
    ]);
    let r2 = max3([
        nut[0] + inv.kappa_nu * gt[0] + inv.kappa_t * h[0],
        nut[1] + inv.kappa_nu * gt[1] + inv.kappa_t * h[1],
        nut[2] + inv.kappa_nu * gt[2] + inv.kappa_t * h[2],
    ]);
    let r3 = max3([
        nus[0] + 0.5 * inv.kappa_c * h[0],
        nus[1] + 0.5 * inv.kappa_c * h[1],
        nus[2] + 0.5 * inv.kappa_c * h[2],
    ]);
    let ht = at(&chart.h.du());
    let r4 = max3([
        ht[0] + inv.kappa_s * gt[0] - inv.kappa_t * nu[0],
        ht[1] + inv.kappa_s * gt[1] - inv.kappa_t * nu[1],
        ht[2] + inv.kappa_s * gt[2] - inv.kappa_t * nu[2],
    ]);
    Ok([r1, r2, r3, r4])
}

/// Limits of the bounded principal-curvature branch at the chart center:
/// `κ`, `∂_sκ` and `κ̂ = λκ̃` (the density-rescaled divergent branch),
/// extrapolated from samples along the transverse chart line. The chart
/// normal, smooth across the edge, orients the mean curvature and the
/// density of each sample.
pub fn bounded_branch_at(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<crate::frontal::BoundedCurvatureData, InvariantError> {
    let chart = build_special_adapted_chart(surface, sample, order, tol)?;
    let inv = invariants_from_chart(&chart)?;
    let sampler = |s: f64| -> Result<crate::frontal::PrincipalSample, FrontalError> {
        let x = chart.to_uv(0.0, s);
        let f = surface
            .jet_at(x.0, x.1, 3)
            .map_err(|e| FrontalError::SampleUnavailable { s, reason: e.to_string() })?;
        let c = curvatures_at(&f, x, 1, tol)?;
        let (gaussian, mean) = match (c.gaussian, c.mean) {
            (Some(k), Some(h)) => (k, h),
            _ => {
                return Err(FrontalError::SampleUnavailable {
                    s,
                    reason: format!("probe ({:.4}, {:.4}) is singular", x.0, x.1),
                })
            }
        };
        // orient by the chart normal, which does not flip across the edge;
        // the rescaling density is the chart's own signed area density (the
        // surface-coordinate one differs by the chart Jacobian)
        let m = f.du().cross(&f.dv()).eval(0.0, 0.0);
        let nu_ref = chart.nu.eval(0.0, s);
        let sign = if m[0] * nu_ref[0] + m[1] * nu_ref[1] + m[2] * nu_ref[2] >= 0.0 {
            1.0
        } else {
            -1.0
        };
        Ok(crate::frontal::PrincipalSample {
            gaussian,
            mean: sign * mean,
            lambda: chart.lambda.eval(0.0, s),
        })
    };
    Ok(crate::frontal::bounded_curvature_data(inv.kappa_nu, sampler)?)
}

fn spread_indices(len: usize, want: usize) -> Vec<usize> {
    if len <= want {
        return (0..len).collect();
    }
    (0..want).map(|k| k * (len - 1) / (want - 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontal::modified_forms;
    use crate::locus::trace_singular_curve;

    fn surf(text: &str) -> SurfaceDefinition {
        SurfaceDefinition::parse(text).unwrap()
    }

    fn fplus() -> SurfaceDefinition {
        surf(
            "[surface]\nname = fplus\nx = u\ny = 3*u^2 + v^2/2\nz = v^3/3 + u^4 + u^2*v^2\n\
             u_range = -1, 1\nv_range = -1, 1\n",
        )
    }

    fn fminus() -> SurfaceDefinition {
        surf(
            "[surface]\nname = fminus\nx = u\ny = -3*u^2 + v^2/2\nz = v^3/3 + u^4 - u^2*v^2\n\
             u_range = -1, 1\nv_range = -1, 1\n",
        )
    }

    fn cycloid() -> SurfaceDefinition {
        surf(
            "[surface]\nname = cycloid\nx = (2+cos(u))*cos(v)\ny = (2+cos(u))*sin(v)\nz = u - sin(u)\n\
             u_range = -6, 6\nv_range = 0.05, 6.23\n",
        )
    }

    fn sample_near(
        surface: &SurfaceDefinition,
        curve: &SingularCurve,
        target: (f64, f64),
    ) -> CurveSample {
        let _ = surface;
        curve
            .samples
            .iter()
            .min_by(|a, b| {
                let da = (a.point.u - target.0).powi(2) + (a.point.v - target.1).powi(2);
                let db = (b.point.u - target.0).powi(2) + (b.point.v - target.1).powi(2);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
            .clone()
    }

    #[test]
    fn quartic_fold_pair_at_origin() {
        let tol = Tolerances::default();
        for (s, sign) in [(fplus(), 1.0), (fminus(), -1.0)] {
            let curve = trace_singular_curve(&s, (0.1, 1e-3), 0.01, 5, &tol).unwrap();
            let c = curve_sample_at(&s, (0.0, 0.0), [1.0, 0.0], 0.0, 5, &tol).unwrap();
            let inv = invariants_at(&s, &c, 5, &tol).unwrap();
            assert!((inv.kappa_s - sign * 6.0).abs() < 1e-8, "kappa_s = {}", inv.kappa_s);
            assert!(inv.kappa_nu.abs() < 1e-8, "kappa_nu = {}", inv.kappa_nu);
            assert!((inv.kappa_c - 2.0).abs() < 1e-8, "kappa_c = {}", inv.kappa_c);
            assert!(inv.kappa_t.abs() < 1e-8, "kappa_t = {}", inv.kappa_t);
            let _ = curve;
        }
    }

    #[test]
    fn quartic_fold_torsion_at_half() {
        // kappa_t(u) = 4u / (1 + 4u^4 + 64u^6) for the positive member:
        // at u = 1/2 the denominator is 1 + 1/4 + 1 = 9/4, so kappa_t = 8/9.
        // Cross-validated below through -(4κ_t² + κ_s κ_c²)/4 against the
        // sampled limit of K along the transverse line.
        let tol = Tolerances::default();
        let s = fplus();
        let c = curve_sample_at(&s, (0.5, 0.0), [1.0, 0.0], 0.0, 5, &tol).unwrap();
        let inv = invariants_at(&s, &c, 5, &tol).unwrap();
        assert!(
            (inv.kappa_t - 8.0 / 9.0).abs() < 1e-8,
            "kappa_t(1/2) = {} (expected 8/9 = {})",
            inv.kappa_t,
            8.0 / 9.0
        );
        let lim = limit_gaussian_curvature(&s, &c, 5, &tol).unwrap();
        assert!(lim.agrees, "closed form {} vs sampled {}", lim.value, lim.sampled);
    }

    #[test]
    fn quartic_fold_torsion_derivative() {
        let tol = Tolerances::default();
        for (s, sign) in [(fplus(), 1.0), (fminus(), -1.0)] {
            let c = curve_sample_at(&s, (0.0, 0.0), [1.0, 0.0], 0.0, 5, &tol).unwrap();
            let d = invariant_derivatives(&s, &c, 5, &tol).unwrap();
            assert!(!d.one_sided);
            assert!((d.kappa_t_p - sign * 4.0).abs() < 1e-6, "kappa_t' = {}", d.kappa_t_p);
            assert!(d.kappa_nu_p.abs() < 1e-6, "kappa_nu' = {}", d.kappa_nu_p);
            assert!(
                (d.jet_kappa_t_p - sign * 4.0).abs() < 1e-6,
                "jet kappa_t' = {}",
                d.jet_kappa_t_p
            );
            assert!(d.route_gap < 1e-6, "route gap = {}", d.route_gap);
        }
    }

    #[test]
    fn cycloid_invariants_and_limit() {
        let tol = Tolerances::default();
        let s = cycloid();
        let curve = trace_singular_curve(&s, (1e-3, 1.0), 0.05, 5, &tol).unwrap();
        let c = sample_near(&s, &curve, (0.0, 1.0));
        let inv = invariants_at(&s, &c, 5, &tol).unwrap();
        assert!((inv.kappa_s - 1.0 / 3.0).abs() < 1e-7, "kappa_s = {}", inv.kappa_s);
        assert!((inv.kappa_c.abs() - 1.0).abs() < 1e-7, "kappa_c = {}", inv.kappa_c);
        assert!(inv.kappa_t.abs() < 1e-8, "kappa_t = {}", inv.kappa_t);
        assert!(inv.kappa_nu.abs() < 1e-8, "kappa_nu = {}", inv.kappa_nu);
        let lim = limit_gaussian_curvature(&s, &c, 5, &tol).unwrap();
        assert!((lim.value + 1.0 / 12.0).abs() < 1e-7, "K limit = {}", lim.value);
        assert!(lim.agrees);
        let (line, worst) = is_curvature_line(&s, &curve, 5, &tol).unwrap();
        assert!(line, "worst |kappa_t| = {worst:.3e}");
        let (bounded, worst) = is_bounded_k(&s, &curve, 5, &tol).unwrap();
        assert!(bounded, "worst |kappa_nu| = {worst:.3e}");
    }

    #[test]
    fn cuspidal_normal_form_invariants() {
        let tol = Tolerances::default();
        let s = surf(
            "[surface]\nname = nf\nx = u\ny = v^2\nz = v^3\nu_range = -1, 1\nv_range = -1, 1\n",
        );
        let c = curve_sample_at(&s, (0.0, 0.0), [1.0, 0.0], 0.0, 5, &tol).unwrap();
        let inv = invariants_at(&s, &c, 5, &tol).unwrap();
        assert!(inv.kappa_s.abs() < 1e-9);
        assert!(inv.kappa_nu.abs() < 1e-9);
        assert!((inv.kappa_c - 3.0 / 2f64.sqrt()).abs() < 1e-9, "kappa_c = {}", inv.kappa_c);
        assert!(inv.kappa_t.abs() < 1e-9);
    }

    #[test]
    fn unbounded_gaussian_curvature_detected() {
        let tol = Tolerances::default();
        let s = surf(
            "[surface]\nname = ub\nx = u\ny = v^2\nz = v^3 + u^2\n\
             u_range = -1, 1\nv_range = -1, 1\n",
        );
        let curve = trace_singular_curve(&s, (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        let (bounded, worst) = is_bounded_k(&s, &curve, 5, &tol).unwrap();
        assert!(!bounded);
        assert!(worst > 0.1, "worst normalized |kappa_nu| = {worst}");
        let c = curve_sample_at(&s, (0.0, 0.0), [1.0, 0.0], 0.0, 5, &tol).unwrap();
        let inv = invariants_at(&s, &c, 5, &tol).unwrap();
        assert!((inv.kappa_nu - 2.0).abs() < 1e-8, "kappa_nu = {}", inv.kappa_nu);
        let (line, _) = is_curvature_line(&s, &curve, 5, &tol).unwrap();
        assert!(line); // kappa_t vanishes for this profile too
    }

    #[test]
    fn special_chart_form_identities() {
        // In a special adapted chart the invariants equal simple combinations
        // of the frame functions on the axis:
        //   κ_s = -E_ss/2, κ_ν = L, κ_c = 2N, κ_t = M.
        let tol = Tolerances::default();
        for (s, seed) in [
            (fplus(), (0.3, 1e-3)),
            (cycloid(), (1e-3, 1.0)),
        ] {
            let c = curve_sample_at(&s, seed, [1.0, 1.0], 0.0, 5, &tol).unwrap();
            let chart = build_special_adapted_chart(&s, &c, 5, &tol).unwrap();
            let inv = invariants_from_chart(&chart).unwrap();
            let forms = modified_forms(&chart.g, &chart.h, &chart.nu);
            let e_ss = forms.ee.partial(0, 2).unwrap();
            assert!((inv.kappa_s + 0.5 * e_ss).abs() < 1e-6, "E_ss route: {e_ss}");
            assert!((inv.kappa_nu - forms.ll.value()).abs() < 1e-6);
            assert!((inv.kappa_c - 2.0 * forms.nn.value()).abs() < 1e-6);
            assert!((inv.kappa_t - forms.mm.value()).abs() < 1e-6);
            let res = frame_identity_residuals(&chart).unwrap();
            for (i, r) in res.iter().enumerate() {
                assert!(*r < 1e-6, "frame identity {i} residual {r:.3e}");
            }
        }
    }
}
