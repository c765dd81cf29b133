//! Normal fields, area density, discriminant and curvature data.
//!
//! All computations run on truncated Taylor jets of the position vector. Two
//! normal constructions are provided: the usual `f_u × f_v / |f_u × f_v|` at
//! regular base points, and the frontal construction `f_u × h / |f_u × h|`
//! in an adapted chart, where `h = f_v / v` extends the normalized null
//! direction across the singular axis.

use crate::jet::{Jet2, JetError, Scalar, V3};
use crate::numeric::symmetric_limits;
use crate::tol::Tolerances;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontalError {
    #[error("jet arithmetic: {0}")]
    Jet(#[from] JetError),
    #[error("base point is singular (|f_u x f_v| = {norm:.3e} relative)")]
    SingularBase { norm: f64 },
    #[error("frame {{f_u, h}} degenerate (|f_u x h| = {norm:.3e} relative)")]
    DegenerateFrame { norm: f64 },
    #[error("principal-curvature branches indistinguishable (gap {gap:.3e})")]
    BranchAmbiguous { gap: f64 },
    #[error("curvature sample at offset {s} is not available: {reason}")]
    SampleUnavailable { s: f64, reason: String },
}

/// Unit normal at a regular base point, oriented by `co` (+1 or -1).
pub fn unit_normal(f: &V3<Jet2>, co: i8, tol: &Tolerances) -> Result<V3<Jet2>, FrontalError> {
    let fu = f.du();
    let fv = f.dv();
    let m = fu.cross(&fv);
    let scale = vector_scale(&fu) * vector_scale(&fv);
    let norm2 = m.dot(&m).value();
    if norm2.sqrt() <= tol.reg * scale.max(f64::MIN_POSITIVE) {
        return Err(FrontalError::SingularBase { norm: norm2.sqrt() / scale });
    }
    let nu = m.normalized()?;
    Ok(if co < 0 { nu.neg() } else { nu })
}

/// The normalized null direction `h = f_v / v` and the frontal unit normal
/// `nu = f_u × h / |f_u × h|` in an adapted chart (singular axis at `v = 0`,
/// base point on the axis). The sign of `nu` is the raw cross-product sign;
/// callers apply their own co-orientation.
pub struct AdaptedNormal {
    pub h: V3<Jet2>,
    pub nu: V3<Jet2>,
}

pub fn adapted_normal_pair(f: &V3<Jet2>, tol: &Tolerances) -> Result<AdaptedNormal, FrontalError> {
    let fu = f.du();
    let h = f.dv().divide_by_v(tol.axis)?;
    let m = fu.cross(&h);
    let scale = vector_scale(&fu) * vector_scale(&h);
    let norm2 = m.dot(&m).value();
    if norm2.sqrt() <= tol.reg * scale.max(f64::MIN_POSITIVE) {
        return Err(FrontalError::DegenerateFrame { norm: norm2.sqrt() / scale });
    }
    let nu = m.normalized()?;
    Ok(AdaptedNormal { h, nu })
}

/// Signed area density `λ = det(f_u, f_v, ν)` and the discriminant of the
/// normal map `Λ = det(ν_u, ν_v, ν)`, as jets about the common base point.
pub fn area_density_and_discriminant(f: &V3<Jet2>, nu: &V3<Jet2>) -> (Jet2, Jet2) {
    let lambda = V3::det3(&f.du(), &f.dv(), nu);
    let big_lambda = V3::det3(&nu.du(), &nu.dv(), nu);
    (lambda, big_lambda)
}

/// Pointwise curvature data; `None` marks values that are unbounded or not
/// computable because the point is on (or numerically at) the singular set.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureSample {
    pub u: f64,
    pub v: f64,
    pub lambda: f64,
    pub big_lambda: Option<f64>,
    pub gaussian: Option<f64>,
    pub mean: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
}

/// Classical curvature data at a regular point from a jet of order >= 3.
/// `λ` here is the gauge `co·|f_u×f_v|` (the pointwise normal fixes the sign).
pub fn curvatures_at(
    f: &V3<Jet2>,
    loc: (f64, f64),
    co: i8,
    tol: &Tolerances,
) -> Result<CurvatureSample, FrontalError> {
    let fu = f.du();
    let fv = f.dv();
    let m = fu.cross(&fv);
    let scale = vector_scale(&fu) * vector_scale(&fv);
    let mnorm = m.dot(&m).value().sqrt();
    let mut sample = CurvatureSample {
        u: loc.0,
        v: loc.1,
        lambda: co as f64 * mnorm,
        big_lambda: None,
        gaussian: None,
        mean: None,
        kappa1: None,
        kappa2: None,
    };
    if mnorm <= tol.reg * scale.max(f64::MIN_POSITIVE) {
        return Ok(sample);
    }
    let nu = m.normalized()?;
    let nu = if co < 0 { nu.neg() } else { nu };

    let e = fu.dot(&fu).value();
    let ff = fu.dot(&fv).value();
    let g = fv.dot(&fv).value();
    let fuu = fu.du();
    let fuv = fu.dv();
    let fvv = fv.dv();
    let l = fuu.dot(&nu).value();
    let mm = fuv.dot(&nu).value();
    let n = fvv.dot(&nu).value();
    let det1 = e * g - ff * ff;
    let k = (l * n - mm * mm) / det1;
    let h = (e * n - 2.0 * ff * mm + g * l) / (2.0 * det1);
    let disc = (h * h - k).max(0.0).sqrt();
    sample.gaussian = Some(k);
    sample.mean = Some(h);
    sample.kappa1 = Some(h + disc);
    sample.kappa2 = Some(h - disc);
    sample.big_lambda = Some(V3::det3(&nu.du(), &nu.dv(), &nu).value());
    Ok(sample)
}

/// The six functions built from the adapted frame `{f_u, h}` and the normal.
/// All are jets about the base point.
pub struct ModifiedForms {
    pub ee: Jet2,
    pub ff: Jet2,
    pub gg: Jet2,
    pub ll: Jet2,
    pub mm: Jet2,
    pub nn: Jet2,
}

pub fn modified_forms(g: &V3<Jet2>, h: &V3<Jet2>, nu: &V3<Jet2>) -> ModifiedForms {
    let gu = g.du();
    let nu_u = nu.du();
    let nu_v = nu.dv();
    ModifiedForms {
        ee: gu.dot(&gu),
        ff: gu.dot(h),
        gg: h.dot(h),
        ll: gu.dot(&nu_u).neg(),
        mm: h.dot(&nu_u).neg(),
        nn: h.dot(&nu_v).neg(),
    }
}

/// Derivatives of the normal expressed in the frame `{f_u, h}`:
///
/// ```text
/// ν_u = ((F̃M̃ − G̃L̃) f_u + (F̃L̃ − ẼM̃) h) / (ẼG̃ − F̃²)
/// ν_v = ((F̃Ñ − vG̃M̃) f_u + (vF̃M̃ − ẼÑ) h) / (ẼG̃ − F̃²)
/// ```
///
/// The result agrees with differentiating the ν jet directly; it exposes the
/// frame coefficients that encode the edge invariants on the axis.
pub fn weingarten_derivatives(
    forms: &ModifiedForms,
    g: &V3<Jet2>,
    h: &V3<Jet2>,
    tol: &Tolerances,
) -> Result<(V3<Jet2>, V3<Jet2>), FrontalError> {
    let gu = g.du();
    let order = forms
        .ee
        .order()
        .min(forms.ll.order())
        .min(gu.x.order())
        .min(h.x.order());
    let t = |j: &Jet2| j.truncated(order);
    let (ee, ff, gg) = (t(&forms.ee), t(&forms.ff), t(&forms.gg));
    let (ll, mm, nn) = (t(&forms.ll), t(&forms.mm), t(&forms.nn));
    let det = ee.mul(&gg).sub(&ff.mul(&ff));
    if det.value() <= tol.reg {
        return Err(FrontalError::DegenerateFrame { norm: det.value() });
    }
    let gu = gu.truncated(order);
    let h = h.truncated(order);
    // `v` as a jet: base points sit on the axis, so the offset is the value.
    let v = Jet2::var_v(0.0, order);

    let cu_f = ff.mul(&mm).sub(&gg.mul(&ll)).div(&det)?;
    let cu_h = ff.mul(&ll).sub(&ee.mul(&mm)).div(&det)?;
    let cv_f = ff.mul(&nn).sub(&v.mul(&gg).mul(&mm)).div(&det)?;
    let cv_h = v.mul(&ff).mul(&mm).sub(&ee.mul(&nn)).div(&det)?;

    let nu_u = gu.mul_scalar(&cu_f).add(&h.mul_scalar(&cu_h));
    let nu_v = gu.mul_scalar(&cv_f).add(&h.mul_scalar(&cv_h));
    Ok((nu_u, nu_v))
}

/// Limits of the principal-curvature data on approach to an edge point:
/// the bounded branch `κ`, the density-scaled unbounded branch `κ̂ = λκ̃`,
/// and the transverse derivative `∂_vκ`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundedCurvatureData {
    pub kappa: f64,
    pub kappa_hat: f64,
    pub dv_kappa: f64,
    /// Smallest observed gap between the two branches (diagnostic).
    pub branch_gap: f64,
}

/// One off-axis sample for [`bounded_curvature_data`]: Gaussian curvature,
/// mean curvature and *signed* area density at chart offset `(0, s)`.
///
/// `mean` and `lambda` must both be taken with respect to a normal field
/// oriented continuously across the edge (the pointwise cross-product normal
/// flips there and would corrupt both).
pub struct PrincipalSample {
    pub gaussian: f64,
    pub mean: f64,
    pub lambda: f64,
}

/// Follow the bounded principal-curvature branch toward the axis and
/// extrapolate `κ`, `∂_vκ` and `κ̂ = λκ̃` to the edge point. `kappa_nu_p`
/// seeds the branch selection at the outermost samples.
pub fn bounded_curvature_data(
    kappa_nu_p: f64,
    mut sample: impl FnMut(f64) -> Result<PrincipalSample, FrontalError>,
) -> Result<BoundedCurvatureData, FrontalError> {
    const LEVELS: usize = 5;
    const S0: f64 = 1e-2;
    let s: Vec<f64> = (0..LEVELS).map(|k| S0 / 2f64.powi(k as i32)).collect();

    let mut branch_gap = f64::INFINITY;
    let mut side = |sign: f64| -> Result<(Vec<f64>, Vec<f64>), FrontalError> {
        let mut kappas = Vec::with_capacity(LEVELS);
        let mut hats = Vec::with_capacity(LEVELS);
        let mut prev = kappa_nu_p;
        for &sk in &s {
            let p = sample(sign * sk)?;
            let disc = (p.mean * p.mean - p.gaussian).max(0.0).sqrt();
            let (k1, k2) = (p.mean + disc, p.mean - disc);
            branch_gap = branch_gap.min((k1 - k2).abs());
            let (bounded, unbounded) = if (k1 - prev).abs() <= (k2 - prev).abs() {
                (k1, k2)
            } else {
                (k2, k1)
            };
            prev = bounded;
            kappas.push(bounded);
            hats.push(p.lambda * unbounded);
        }
        Ok((kappas, hats))
    };

    let (kp, hp) = side(1.0)?;
    let (km, hm) = side(-1.0)?;
    let (kappa, dv_kappa) = symmetric_limits(&s, &kp, &km);
    let (kappa_hat, _) = symmetric_limits(&s, &hp, &hm);
    if branch_gap < 1e-12 {
        return Err(FrontalError::BranchAmbiguous { gap: branch_gap });
    }
    Ok(BoundedCurvatureData { kappa, kappa_hat, dv_kappa, branch_gap })
}

fn vector_scale(x: &V3<Jet2>) -> f64 {
    x.dot(x).value().sqrt().max(1e-300)
}
