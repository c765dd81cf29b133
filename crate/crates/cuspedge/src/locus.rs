//! Locating and tracing the singular curve, and building adapted charts.
//!
//! The area density λ vanishes exactly on the singular set, but its sign
//! depends on a choice of unit normal. Internally we work with the proxy
//! `λ_ref = ⟨f_u × f_v, ν_ref⟩` for a frozen reference direction `ν_ref`;
//! it has the same zero set and the same gradient on the zero set as any
//! smoothly oriented λ, which is all that root finding and continuation need.
//!
//! Conventions baked into traced curves and charts:
//! - the traced direction is canonical (first significant tangent component
//!   positive); `co_orientation = -1` reverses it, which flips the normal;
//! - the transverse chart direction `s` points to the *left* of the traced
//!   direction, so the area density of the chart is positive on the left.

use crate::exec::par_map;
use crate::frontal::{adapted_normal_pair, area_density_and_discriminant, FrontalError};
use crate::jet::{plug_curve, compose2, Jet1, Jet2, JetError, Scalar, Vec3, V3};
use crate::surface::{SurfaceDefinition, SurfaceError};
use crate::tol::Tolerances;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LocusError {
    #[error("jet arithmetic: {0}")]
    Jet(#[from] JetError),
    #[error("surface evaluation: {0}")]
    Surface(#[from] SurfaceError),
    #[error("frontal geometry: {0}")]
    Frontal(#[from] FrontalError),
    #[error("corank-2 singular point at ({u}, {v}) is unsupported")]
    CorankTwo { u: f64, v: f64 },
    #[error("point ({u}, {v}) is not singular (relative smallest singular value {sv:.3e})")]
    NotSingular { u: f64, v: f64, sv: f64 },
    #[error("gradient of the area density vanishes at ({u}, {v})")]
    GradientVanishes { u: f64, v: f64 },
    #[error("root polishing failed near ({u}, {v}): |lambda| = {residual:.3e}")]
    PolishFailed { u: f64, v: f64, residual: f64 },
    #[error("chart construction: {0}")]
    Chart(String),
    #[error("no singular point found to seed the trace")]
    NoSeed,
}

/// A polished point of the singular set with its local linear data.
#[derive(Debug, Clone, Serialize)]
pub struct SingularPointSample {
    pub u: f64,
    pub v: f64,
    /// Gradient of the area density (gauge: positive to the left of the
    /// traced direction once the point belongs to an oriented curve).
    pub grad_lambda: [f64; 2],
    /// Unit null direction of df in parameter space.
    pub eta: [f64; 2],
    /// Directional derivative of the density along `eta`.
    pub eta_lambda: f64,
    /// Reference unit normal at the point.
    pub nu_ref: [f64; 3],
    pub corank: usize,
    pub is_front: bool,
    pub is_cuspidal_edge: bool,
    /// |λ| after polishing, relative to the local scale.
    pub lambda_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSample {
    /// Cumulative chord-length parameter along the traced curve.
    pub t: f64,
    /// Unit tangent of the traced direction in parameter space.
    pub tangent: [f64; 2],
    #[serde(flatten)]
    pub point: SingularPointSample,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularCurve {
    pub samples: Vec<CurveSample>,
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChartKind {
    Adapted,
    SpecialAdapted,
}

/// A polynomial chart `(t, s) -> (u, v)` centered on a singular-curve point,
/// together with the pulled-back position jet and its frontal data.
pub struct FrontChart {
    pub kind: ChartKind,
    /// Parameter of the center on the traced curve.
    pub t0: f64,
    /// Parameter-plane coordinates of the center.
    pub base: (f64, f64),
    pub u_poly: Jet2,
    pub v_poly: Jet2,
    /// Pullback of the position vector.
    pub g: V3<Jet2>,
    /// Normalized null vector field `g_s / s`.
    pub h: V3<Jet2>,
    /// Unit normal `g_t × h / |g_t × h|`.
    pub nu: V3<Jet2>,
    /// Signed area density of the chart.
    pub lambda: Jet2,
    /// Discriminant of the normal map in the chart.
    pub big_lambda: Jet2,
}

impl FrontChart {
    /// Map chart offsets to parameter-plane coordinates.
    pub fn to_uv(&self, t: f64, s: f64) -> (f64, f64) {
        (self.u_poly.eval(t, s), self.v_poly.eval(t, s))
    }
}

// --- reference-density jets --------------------------------------------------

/// Jet of `λ_ref = ⟨f_u × f_v, ν_ref⟩` about `(u, v)`; order is one less than
/// the surface jet order.
pub(crate) fn lambda_ref_jet(
    surface: &SurfaceDefinition,
    u: f64,
    v: f64,
    order: usize,
    nu_ref: [f64; 3],
) -> Result<Jet2, LocusError> {
    let f = surface.jet_at(u, v, order)?;
    let m = f.du().cross(&f.dv());
    Ok(dot_const(&m, nu_ref))
}

fn dot_const(m: &V3<Jet2>, n: [f64; 3]) -> Jet2 {
    m.x.scale(n[0]).add(&m.y.scale(n[1])).add(&m.z.scale(n[2]))
}

fn unit2(x: [f64; 2]) -> [f64; 2] {
    let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
    [x[0] / n, x[1] / n]
}

fn rot90_ccw(x: [f64; 2]) -> [f64; 2] {
    [-x[1], x[0]]
}

// --- pointwise analysis -------------------------------------------------------

/// Analyze a (near-)singular parameter point: null direction, front test and
/// cuspidal-edge criterion. `eta_hint`/`nu_hint` keep signs continuous along
/// a trace.
pub fn analyze_singular_point(
    surface: &SurfaceDefinition,
    u: f64,
    v: f64,
    order: usize,
    tol: &Tolerances,
    eta_hint: Option<[f64; 2]>,
    nu_hint: Option<[f64; 3]>,
) -> Result<SingularPointSample, LocusError> {
    let n = order.max(5);
    let f = surface.jet_at(u, v, n)?;
    let fu = f.du();
    let fv = f.dv();
    let fu0 = Vec3::from_array(fu.eval(0.0, 0.0));
    let fv0 = Vec3::from_array(fv.eval(0.0, 0.0));

    // Gram matrix of df and its spectral data.
    let g11 = fu0.dot(&fu0);
    let g12 = fu0.dot(&fv0);
    let g22 = fv0.dot(&fv0);
    let tr = g11 + g22;
    let det = (g11 * g22 - g12 * g12).max(0.0);
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let mu_small = ((tr - disc) / 2.0).max(0.0);
    let s1 = ((tr + disc) / 2.0).sqrt();
    let s2 = mu_small.sqrt();
    if s1 <= tol.reg {
        return Err(LocusError::CorankTwo { u, v });
    }
    if s2 > 1e-4 * s1 {
        return Err(LocusError::NotSingular { u, v, sv: s2 / s1 });
    }
    let corank = if s2 <= tol.reg * s1 { 1 } else { 1 };

    // Null direction: eigenvector of the Gram matrix for the small eigenvalue.
    let c1 = [g12, mu_small - g11];
    let c2 = [mu_small - g22, g12];
    let pick = if c1[0] * c1[0] + c1[1] * c1[1] >= c2[0] * c2[0] + c2[1] * c2[1] { c1 } else { c2 };
    let mut eta = unit2(pick);
    match eta_hint {
        Some(hint) => {
            if eta[0] * hint[0] + eta[1] * hint[1] < 0.0 {
                eta = [-eta[0], -eta[1]];
            }
        }
        None => {
            // canonical sign: first significant component positive
            let lead = if eta[0].abs() > 0.1 { eta[0] } else { eta[1] };
            if lead < 0.0 {
                eta = [-eta[0], -eta[1]];
            }
        }
    }

    // Restrict m = f_u × f_v to the line through the point along eta and
    // divide out the vanishing factor: w(0) = (ηλ)·ν at the point.
    let m = fu.cross(&fv);
    let lu = Jet1::from_coeffs(vec![u, eta[0]]).truncated(n - 1);
    let lv = Jet1::from_coeffs(vec![v, eta[1]]).truncated(n - 1);
    let mut lu_c = Jet1::zero(n - 1);
    let mut lv_c = Jet1::zero(n - 1);
    lu_c.set_coeff(0, u);
    lu_c.set_coeff(1, eta[0]);
    lv_c.set_coeff(0, v);
    lv_c.set_coeff(1, eta[1]);
    let _ = (lu, lv);
    let m_line = V3::new(
        plug_curve(&m.x, (u, v), &lu_c, &lv_c)?,
        plug_curve(&m.y, (u, v), &lu_c, &lv_c)?,
        plug_curve(&m.z, (u, v), &lu_c, &lv_c)?,
    );
    let scale3 = s1 * s1; // |f_u||f_v| scale of m
    let m0 = Vec3::from_array(m_line.eval1(0.0));
    let m0n = m0.dot(&m0).sqrt();
    if m0n > tol.sing.sqrt() * scale3 {
        // the point was not polished onto the curve closely enough for the
        // division below; still proceed, divide_by_t will veto if unsafe
    }
    let w = match m_line.try_map(|c| c.divide_by_t(1e-6)) {
        Ok(w) => w,
        Err(_) => {
            return Err(LocusError::NotSingular { u, v, sv: m0n / scale3.max(1e-300) });
        }
    };
    let w0 = Vec3::from_array(w.eval1(0.0));
    let w0n = w0.dot(&w0).sqrt();

    // Front test: the unit normal along the eta-line must move at the point.
    let (is_front, nu_ref_raw) = if w0n > tol.crit * scale3 {
        let nu_line = w.try_map(|c| Ok(c.clone()))?;
        let nu_line = normalize_v3_jet1(&nu_line)?;
        let d = nu_line.derivative();
        let dn = Vec3::from_array(d.eval1(0.0));
        (dn.dot(&dn).sqrt() > tol.crit, Vec3::from_array(nu_line.eval1(0.0)))
    } else {
        // degenerate transversality (ηλ ≈ 0): try a second division to still
        // recover a direction for reporting
        match w.try_map(|c| c.divide_by_t(1e-3)) {
            Ok(w2) => {
                let w20 = Vec3::from_array(w2.eval1(0.0));
                let n2 = w20.dot(&w20).sqrt();
                if n2 > tol.crit * scale3 {
                    (false, w20.scale(1.0 / n2))
                } else {
                    (false, Vec3::new(0.0, 0.0, 0.0))
                }
            }
            Err(_) => (false, Vec3::new(0.0, 0.0, 0.0)),
        }
    };

    let mut nu_ref = if w0n > tol.crit * scale3 { w0.scale(1.0 / w0n) } else { nu_ref_raw };
    if let Some(hint) = nu_hint {
        if nu_ref.x * hint[0] + nu_ref.y * hint[1] + nu_ref.z * hint[2] < 0.0 {
            nu_ref = nu_ref.neg();
        }
    }

    let nu_arr = [nu_ref.x, nu_ref.y, nu_ref.z];
    let lam = dot_const(&m, nu_arr);
    let grad = [lam.partial(1, 0)?, lam.partial(0, 1)?];
    let grad_n = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
    let eta_lambda = grad[0] * eta[0] + grad[1] * eta[1];
    let is_cuspidal_edge =
        is_front && grad_n > 0.0 && (eta_lambda.abs() / grad_n.max(1e-300)) > tol.crit;

    Ok(SingularPointSample {
        u,
        v,
        grad_lambda: grad,
        eta,
        eta_lambda,
        nu_ref: nu_arr,
        corank,
        is_front,
        is_cuspidal_edge,
        lambda_residual: lam.value().abs() / scale3.max(1e-300),
    })
}

fn normalize_v3_jet1(w: &V3<Jet1>) -> Result<V3<Jet1>, JetError> {
    let n = w.dot(w).sqrt()?;
    Ok(V3::new(w.x.div(&n)?, w.y.div(&n)?, w.z.div(&n)?))
}

// --- grid scan ----------------------------------------------------------------

/// Scan a `grid × grid` net of cells for sign changes of the area density and
/// polish each detection onto the singular set.
pub fn locate_singular_points(
    surface: &SurfaceDefinition,
    grid: usize,
    order: usize,
    tol: &Tolerances,
) -> Result<Vec<SingularPointSample>, LocusError> {
    let (u0, u1) = surface.u_range;
    let (v0, v1) = surface.v_range;
    // offset nodes by an irrational fraction of a cell so that axis-aligned
    // singular curves do not coincide with grid nodes
    const PHI: f64 = 0.381_966_011_250_105;
    let du = (u1 - u0) / (grid + 1) as f64;
    let dv = (v1 - v0) / (grid + 1) as f64;
    let node = |i: usize, j: usize| {
        (u0 + (i as f64 + PHI) * du, v0 + (j as f64 + PHI) * dv)
    };

    // values of m at all nodes
    let nodes: Vec<(usize, usize)> =
        (0..=grid).flat_map(|i| (0..=grid).map(move |j| (i, j))).collect();
    let m_vals: Vec<Result<Vec3, SurfaceError>> = par_map(&nodes, |&(i, j)| {
        let (u, v) = node(i, j);
        let f = surface.jet_at(u, v, 1)?;
        Ok(Vec3::from_array(f.du().cross(&f.dv()).eval(0.0, 0.0)))
    });
    let mut m_grid = vec![Vec3::new(0.0, 0.0, 0.0); (grid + 1) * (grid + 1)];
    for (k, r) in m_vals.into_iter().enumerate() {
        m_grid[k] = r?;
    }
    let at = |i: usize, j: usize| &m_grid[i * (grid + 1) + j];

    // edges where the cross product reverses direction
    let mut edges: Vec<((f64, f64), (f64, f64))> = Vec::new();
    for i in 0..=grid {
        for j in 0..=grid {
            let a = at(i, j);
            if i < grid {
                let b = at(i + 1, j);
                if a.dot(b) < 0.0 {
                    edges.push((node(i, j), node(i + 1, j)));
                }
            }
            if j < grid {
                let b = at(i, j + 1);
                if a.dot(b) < 0.0 {
                    edges.push((node(i, j), node(i, j + 1)));
                }
            }
        }
    }

    let found: Vec<Option<SingularPointSample>> = par_map(&edges, |&(p, q)| {
        locate_on_edge(surface, p, q, order, tol).ok()
    });

    // deduplicate within a quarter cell
    let r2 = 0.25 * 0.25 * (du * du + dv * dv);
    let mut out: Vec<SingularPointSample> = Vec::new();
    for s in found.into_iter().flatten() {
        let dup = out.iter().any(|o| {
            let (a, b) = (o.u - s.u, o.v - s.v);
            a * a + b * b < r2
        });
        if !dup {
            out.push(s);
        }
    }
    Ok(out)
}

fn locate_on_edge(
    surface: &SurfaceDefinition,
    p: (f64, f64),
    q: (f64, f64),
    order: usize,
    tol: &Tolerances,
) -> Result<SingularPointSample, LocusError> {
    // bisection on the component of m along its direction at p
    let fp = surface.jet_at(p.0, p.1, 1)?;
    let mp = Vec3::from_array(fp.du().cross(&fp.dv()).eval(0.0, 0.0));
    let mpn = mp.dot(&mp).sqrt();
    if mpn <= 0.0 {
        return Err(LocusError::NoSeed);
    }
    let dir = mp.scale(1.0 / mpn);
    let phi = |x: (f64, f64)| -> Result<f64, LocusError> {
        let f = surface.jet_at(x.0, x.1, 1)?;
        Ok(Vec3::from_array(f.du().cross(&f.dv()).eval(0.0, 0.0)).dot(&dir))
    };
    let (mut a, mut b) = (p, q);
    let (mut fa, fb) = (phi(a)?, phi(b)?);
    if fa * fb > 0.0 {
        return Err(LocusError::NoSeed);
    }
    for _ in 0..60 {
        let m = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
        let fm = phi(m)?;
        if fa * fm <= 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    let x = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let sample = analyze_singular_point(surface, x.0, x.1, order, tol, None, None)?;
    let x = polish(surface, (sample.u, sample.v), sample.nu_ref, tol)?;
    analyze_singular_point(surface, x.0, x.1, order, tol, Some(sample.eta), Some(sample.nu_ref))
}

/// Move a rough seed onto the singular set using the cross-product direction
/// at the seed itself as the density reference.
fn presample(
    surface: &SurfaceDefinition,
    x: (f64, f64),
    tol: &Tolerances,
) -> Result<(f64, f64), LocusError> {
    let f = surface.jet_at(x.0, x.1, 2)?;
    let fu = Vec3::from_array(f.du().eval(0.0, 0.0));
    let fv = Vec3::from_array(f.dv().eval(0.0, 0.0));
    let scale = fu.dot(&fu).sqrt() * fv.dot(&fv).sqrt();
    let m = Vec3::from_array(f.du().cross(&f.dv()).eval(0.0, 0.0));
    let mn = m.dot(&m).sqrt();
    if mn <= 1e-12 * scale.max(1e-300) {
        return Ok(x); // already on the singular set
    }
    polish(surface, x, [m.x / mn, m.y / mn, m.z / mn], tol)
}

/// Newton iteration on `λ_ref` along its gradient, with frozen `ν_ref`.
fn polish(
    surface: &SurfaceDefinition,
    mut x: (f64, f64),
    nu_ref: [f64; 3],
    tol: &Tolerances,
) -> Result<(f64, f64), LocusError> {
    let mut residual = f64::INFINITY;
    for _ in 0..8 {
        let lam = lambda_ref_jet(surface, x.0, x.1, 2, nu_ref)?;
        let val = lam.value();
        let g = [lam.partial(1, 0)?, lam.partial(0, 1)?];
        let g2 = g[0] * g[0] + g[1] * g[1];
        if g2 <= tol.reg * tol.reg {
            return Err(LocusError::GradientVanishes { u: x.0, v: x.1 });
        }
        residual = val.abs() / g2.sqrt();
        if residual < 1e-15 {
            break;
        }
        x = (x.0 - val * g[0] / g2, x.1 - val * g[1] / g2);
    }
    if residual > tol.sing {
        return Err(LocusError::PolishFailed { u: x.0, v: x.1, residual });
    }
    Ok(x)
}

// --- tracing ------------------------------------------------------------------

/// Trace the singular curve through `seed` with an Euler predictor and Newton
/// corrector, orient it canonically (respecting `co_orientation`), and record
/// polished samples with cumulative chord-length parameter.
pub fn trace_singular_curve(
    surface: &SurfaceDefinition,
    seed: (f64, f64),
    step: f64,
    order: usize,
    tol: &Tolerances,
) -> Result<SingularCurve, LocusError> {
    let seed_sample = {
        let x = presample(surface, seed, tol)?;
        let s0 = analyze_singular_point(surface, x.0, x.1, order, tol, None, None)?;
        let x = polish(surface, (s0.u, s0.v), s0.nu_ref, tol)?;
        analyze_singular_point(surface, x.0, x.1, order, tol, Some(s0.eta), Some(s0.nu_ref))?
    };

    let trace_dir = |dir: f64| -> Result<(Vec<SingularPointSample>, bool), LocusError> {
        let mut out = Vec::new();
        let mut cur = seed_sample.clone();
        let mut closed = false;
        let max_steps = 100_000usize;
        let mut h = step;
        for k in 0..max_steps {
            let g = cur.grad_lambda;
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
            if gn <= tol.reg {
                break;
            }
            // tangent perpendicular to the gradient
            let mut t = [g[1] / gn * dir, -g[0] / gn * dir];
            if k > 0 {
                // continuity safeguard against gradient sign jitter
                let prev = out.last().map(|s: &SingularPointSample| (s.u, s.v)).unwrap_or(seed);
                let d = [cur.u - prev.0, cur.v - prev.1];
                if k > 0 && d[0] * t[0] + d[1] * t[1] < 0.0 && (d[0] != 0.0 || d[1] != 0.0) {
                    t = [-t[0], -t[1]];
                }
            }
            let mut y = (cur.u + h * t[0], cur.v + h * t[1]);
            // stop at the domain boundary, halving the step to land near it
            if !surface.contains(y.0, y.1) {
                if h > step / 64.0 {
                    h /= 2.0;
                    continue;
                }
                break;
            }
            y = match polish(surface, y, cur.nu_ref, tol) {
                Ok(y) => y,
                Err(_) => break,
            };
            let next = analyze_singular_point(
                surface,
                y.0,
                y.1,
                order,
                tol,
                Some(cur.eta),
                Some(cur.nu_ref),
            )?;
            // closure detection
            let dseed = ((next.u - seed_sample.u).powi(2) + (next.v - seed_sample.v).powi(2)).sqrt();
            if k > 4 && dseed < 0.6 * step {
                closed = true;
                break;
            }
            out.push(next.clone());
            cur = next;
            h = step;
        }
        Ok((out, closed))
    };

    let (forward, closed_f) = trace_dir(1.0)?;
    let (backward, closed_b) = if closed_f {
        (Vec::new(), false)
    } else {
        trace_dir(-1.0)?
    };
    let closed = closed_f || closed_b;

    let mut pts: Vec<SingularPointSample> = Vec::with_capacity(backward.len() + 1 + forward.len());
    pts.extend(backward.into_iter().rev());
    pts.push(seed_sample);
    pts.extend(forward);
    if pts.len() < 2 {
        return Err(LocusError::Chart("trace produced fewer than two samples".into()));
    }

    // canonical orientation: first significant component of the overall
    // direction positive; co_orientation = -1 reverses it.
    let d = [
        pts.last().unwrap().u - pts[0].u + if closed { chord_dir(&pts)[0] } else { 0.0 },
        pts.last().unwrap().v - pts[0].v + if closed { chord_dir(&pts)[1] } else { 0.0 },
    ];
    let d = if closed { chord_dir(&pts) } else { d };
    let lead = if d[0].abs() > 0.1 * (d[0].abs() + d[1].abs()) { d[0] } else { d[1] };
    let mut reverse = lead < 0.0;
    if surface.co_orientation < 0 {
        reverse = !reverse;
    }
    if reverse {
        pts.reverse();
    }

    // tangents, gauge fixing, chord-length parameter
    let mut samples: Vec<CurveSample> = Vec::with_capacity(pts.len());
    let mut t_acc = 0.0;
    for i in 0..pts.len() {
        let (prev, next) = match i {
            0 => (0, 1),
            i if i == pts.len() - 1 => (i - 1, i),
            i => (i - 1, i + 1),
        };
        let tang = unit2([pts[next].u - pts[prev].u, pts[next].v - pts[prev].v]);
        if i > 0 {
            let (a, b) = (pts[i].u - pts[i - 1].u, pts[i].v - pts[i - 1].v);
            t_acc += (a * a + b * b).sqrt();
        }
        let mut p = pts[i].clone();
        // gauge: density positive to the left of the traced direction
        let left = rot90_ccw(tang);
        if p.grad_lambda[0] * left[0] + p.grad_lambda[1] * left[1] < 0.0 {
            p.grad_lambda = [-p.grad_lambda[0], -p.grad_lambda[1]];
            p.nu_ref = [-p.nu_ref[0], -p.nu_ref[1], -p.nu_ref[2]];
        }
        // null direction points left as well
        if p.eta[0] * left[0] + p.eta[1] * left[1] < 0.0 {
            p.eta = [-p.eta[0], -p.eta[1]];
        }
        p.eta_lambda = p.grad_lambda[0] * p.eta[0] + p.grad_lambda[1] * p.eta[1];
        samples.push(CurveSample { t: t_acc, tangent: tang, point: p });
    }
    Ok(SingularCurve { samples, closed })
}

/// Locate and trace every singular curve in the domain: grid-scan for seeds,
/// trace a curve from the first unclaimed seed, retire the seeds it absorbs,
/// repeat. Curves come out in seed-scan order.
pub fn trace_all(
    surface: &SurfaceDefinition,
    grid: usize,
    step: f64,
    order: usize,
    tol: &Tolerances,
) -> Result<Vec<SingularCurve>, LocusError> {
    let seeds = locate_singular_points(surface, grid, order, tol)?;
    let mut used = vec![false; seeds.len()];
    let mut curves = Vec::new();
    for i in 0..seeds.len() {
        if used[i] {
            continue;
        }
        let curve = match trace_singular_curve(surface, (seeds[i].u, seeds[i].v), step, order, tol)
        {
            Ok(c) => c,
            Err(_) => {
                used[i] = true;
                continue;
            }
        };
        for (j, s) in seeds.iter().enumerate() {
            if used[j] {
                continue;
            }
            let close = curve.samples.iter().any(|c| {
                let d = ((c.point.u - s.u).powi(2) + (c.point.v - s.v).powi(2)).sqrt();
                d < 2.0 * step
            });
            if close {
                used[j] = true;
            }
        }
        used[i] = true;
        curves.push(curve);
    }
    Ok(curves)
}

/// Project a nearby point onto the singular curve and package it as a curve
/// sample with the standard gauge (density positive on the left, null
/// direction pointing left). The tangent is taken perpendicular to the
/// gradient, sign-matched against `ref_tangent` so that a family of samples
/// built from a common reference shares one consistent orientation.
pub fn curve_sample_at(
    surface: &SurfaceDefinition,
    x: (f64, f64),
    ref_tangent: [f64; 2],
    t: f64,
    order: usize,
    tol: &Tolerances,
) -> Result<CurveSample, LocusError> {
    let x = presample(surface, x, tol)?;
    let s0 = analyze_singular_point(surface, x.0, x.1, order, tol, None, None)?;
    let x = polish(surface, (s0.u, s0.v), s0.nu_ref, tol)?;
    let mut p =
        analyze_singular_point(surface, x.0, x.1, order, tol, Some(s0.eta), Some(s0.nu_ref))?;
    let g = p.grad_lambda;
    let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
    if gn <= tol.reg {
        return Err(LocusError::GradientVanishes { u: p.u, v: p.v });
    }
    let mut tang = [g[1] / gn, -g[0] / gn];
    if tang[0] * ref_tangent[0] + tang[1] * ref_tangent[1] < 0.0 {
        tang = [-tang[0], -tang[1]];
    }
    let left = rot90_ccw(tang);
    if p.grad_lambda[0] * left[0] + p.grad_lambda[1] * left[1] < 0.0 {
        p.grad_lambda = [-p.grad_lambda[0], -p.grad_lambda[1]];
        p.nu_ref = [-p.nu_ref[0], -p.nu_ref[1], -p.nu_ref[2]];
    }
    if p.eta[0] * left[0] + p.eta[1] * left[1] < 0.0 {
        p.eta = [-p.eta[0], -p.eta[1]];
    }
    p.eta_lambda = p.grad_lambda[0] * p.eta[0] + p.grad_lambda[1] * p.eta[1];
    Ok(CurveSample { t, tangent: tang, point: p })
}

fn chord_dir(pts: &[SingularPointSample]) -> [f64; 2] {
    // dominant direction over the first half of a closed curve
    let k = pts.len() / 2;
    [pts[k].u - pts[0].u, pts[k].v - pts[0].v]
}

// --- implicit curve jets -------------------------------------------------------

/// Solve `λ(x0 + τT + q(τ)n) = 0` for the transverse offset `q` as a jet,
/// by a contraction that gains one correct order per pass.
pub(crate) fn implicit_curve_jets(
    lambda: &Jet2,
    base: (f64, f64),
    tangent: [f64; 2],
    order: usize,
) -> Result<(Jet1, Jet1), JetError> {
    let nrm = rot90_ccw(tangent);
    let d = lambda.partial(1, 0)? * nrm[0] + lambda.partial(0, 1)? * nrm[1];
    if d.abs() < 1e-300 {
        return Err(JetError::DivisionByZero);
    }
    let mut q = Jet1::zero(order);
    for _ in 0..=order {
        let mut uj = q.scale(nrm[0]);
        uj.set_coeff(0, base.0);
        uj.set_coeff(1, uj.coeff(1) + tangent[0]);
        let mut vj = q.scale(nrm[1]);
        vj.set_coeff(0, base.1);
        vj.set_coeff(1, vj.coeff(1) + tangent[1]);
        let val = plug_curve(lambda, base, &uj, &vj)?;
        q = q.sub(&val.scale(1.0 / d).truncated(order));
    }
    let mut uj = q.scale(nrm[0]);
    uj.set_coeff(0, base.0);
    uj.set_coeff(1, uj.coeff(1) + tangent[0]);
    let mut vj = q.scale(nrm[1]);
    vj.set_coeff(0, base.1);
    vj.set_coeff(1, vj.coeff(1) + tangent[1]);
    Ok((uj, vj))
}

/// Jets of the singular curve through the given curve sample, to `order`,
/// parametrized along the sample's unit tangent.
pub fn curve_jets(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<(Jet1, Jet1), LocusError> {
    let p = &sample.point;
    let lam = lambda_ref_jet(surface, p.u, p.v, order + 1, p.nu_ref)?;
    let g = [lam.partial(1, 0)?, lam.partial(0, 1)?];
    if (g[0] * g[0] + g[1] * g[1]).sqrt() <= tol.reg {
        return Err(LocusError::GradientVanishes { u: p.u, v: p.v });
    }
    let (uj, vj) = implicit_curve_jets(&lam, (p.u, p.v), sample.tangent, order)?;
    // residual check: the density must vanish along the jet curve
    let res = plug_curve(&lam, (p.u, p.v), &uj, &vj)?;
    let scale = g.iter().fold(0.0f64, |m, x| m.max(f64::abs(*x))).max(1.0);
    for k in 0..=res.order() {
        if res.coeff(k).abs() > 1e-6 * scale {
            return Err(LocusError::Chart(format!(
                "implicit curve jet residual {:.3e} at order {k}",
                res.coeff(k)
            )));
        }
    }
    Ok((uj, vj))
}

// --- charts --------------------------------------------------------------------

/// Build an adapted chart `φ(t, s) = γ(t) + s·η̄(t)` centered at a curve
/// sample: the s = 0 axis is the singular curve and `∂_s` is null along it.
pub fn build_adapted_chart(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<FrontChart, LocusError> {
    let p = &sample.point;
    let n = order + 2;
    let (uj, vj) = curve_jets(surface, sample, n - 1, tol)?;

    // frame along the curve and the null field from the Gram kernel
    let f = surface.jet_at(p.u, p.v, n)?;
    let fu = f.du();
    let fv = f.dv();
    let on_curve = |w: &V3<Jet2>| -> Result<V3<Jet1>, JetError> {
        Ok(V3::new(
            plug_curve(&w.x, (p.u, p.v), &uj, &vj)?,
            plug_curve(&w.y, (p.u, p.v), &uj, &vj)?,
            plug_curve(&w.z, (p.u, p.v), &uj, &vj)?,
        ))
    };
    let fu_c = on_curve(&fu)?;
    let fv_c = on_curve(&fv)?;
    let g11 = fu_c.dot(&fu_c);
    let g12 = fu_c.dot(&fv_c);
    let g22 = fv_c.dot(&fv_c);
    let k1 = (g12.clone(), g11.neg());
    let k2 = (g22.clone(), g12.neg());
    let n1 = k1.0.value() * k1.0.value() + k1.1.value() * k1.1.value();
    let n2 = k2.0.value() * k2.0.value() + k2.1.value() * k2.1.value();
    let mut kraw = if n1 >= n2 { k1 } else { k2 };
    if kraw.0.value() * p.eta[0] + kraw.1.value() * p.eta[1] < 0.0 {
        kraw = (kraw.0.neg(), kraw.1.neg());
    }
    let knorm = kraw.0.mul(&kraw.0).add(&kraw.1.mul(&kraw.1)).sqrt()?;
    let eta_t = (kraw.0.div(&knorm)?, kraw.1.div(&knorm)?);

    // chart polynomials u(t,s) = U(t) + s·η̄_u(t), v likewise
    let mut u_poly = Jet2::zero(n - 1);
    let mut v_poly = Jet2::zero(n - 1);
    for i in 0..=(n - 1) {
        u_poly.set_coeff(i, 0, uj.coeff(i));
        v_poly.set_coeff(i, 0, vj.coeff(i));
        if i + 1 <= n - 1 {
            u_poly.set_coeff(i, 1, eta_t.0.coeff(i));
            v_poly.set_coeff(i, 1, eta_t.1.coeff(i));
        }
    }
    finish_chart(surface, ChartKind::Adapted, sample, u_poly, v_poly, n, tol)
}

fn finish_chart(
    surface: &SurfaceDefinition,
    kind: ChartKind,
    sample: &CurveSample,
    u_poly: Jet2,
    v_poly: Jet2,
    n: usize,
    tol: &Tolerances,
) -> Result<FrontChart, LocusError> {
    let p = &sample.point;
    let f = surface.jet_at(p.u, p.v, n)?;
    let base = (p.u, p.v);
    let g = V3::new(
        compose2(&f.x, base, &u_poly, &v_poly)?,
        compose2(&f.y, base, &u_poly, &v_poly)?,
        compose2(&f.z, base, &u_poly, &v_poly)?,
    );
    // adapted-chart axiom: g_s vanishes on the axis
    let gs = g.dv();
    let scale = [&g.x, &g.y, &g.z]
        .iter()
        .map(|c| c.partial(1, 0).unwrap_or(0.0).abs())
        .fold(1e-12, f64::max);
    for c in [&gs.x, &gs.y, &gs.z] {
        let axis = c.restrict_axis();
        for k in 0..=axis.order().min(n.saturating_sub(3)) {
            if axis.coeff(k).abs() > 1e-8 * scale {
                return Err(LocusError::Chart(format!(
                    "chart is not adapted: |g_s| = {:.3e} on the axis at order {k}",
                    axis.coeff(k)
                )));
            }
        }
    }
    let an = adapted_normal_pair(&g, tol)?;
    let (lambda, big_lambda) = area_density_and_discriminant(&g, &an.nu);
    Ok(FrontChart {
        kind,
        t0: sample.t,
        base,
        u_poly,
        v_poly,
        g,
        h: an.h,
        nu: an.nu,
        lambda,
        big_lambda,
    })
}

/// Refine an adapted chart so that along the axis the pulled-back frame
/// `{g_t, g_ss}` is orthonormal: arclength in `t`, a shear `t += b(τ)s²/2`
/// killing `⟨g_t, g_ss⟩`, and a scale `s = A(τ)σ` making `|g_ss| = 1`.
pub fn build_special_adapted_chart(
    surface: &SurfaceDefinition,
    sample: &CurveSample,
    order: usize,
    tol: &Tolerances,
) -> Result<FrontChart, LocusError> {
    let adapted = build_adapted_chart(surface, sample, order, tol)?;
    let n = order + 2;
    let m = n - 1; // chart jet order

    // arclength reparametrization t(τ): inverse of l(t) = ∫ |g_t(t,0)| dt
    let gt_axis = adapted.g.du().restrict_axis();
    let speed = gt_axis.dot(&gt_axis).sqrt()?;
    let ell = speed.integrate().truncated(m);
    let t_of_tau = ell.inverse()?;

    // axis data reparametrized by τ
    let gss_axis = adapted.g.dv().dv().restrict_axis();
    let reparam = |j: &Jet1| j.truncated(m).compose(&t_of_tau);
    let gt_tau = V3::new(reparam(&gt_axis.x), reparam(&gt_axis.y), reparam(&gt_axis.z));
    let gss_tau = V3::new(reparam(&gss_axis.x), reparam(&gss_axis.y), reparam(&gss_axis.z));

    // shear and scale coefficients (computed against the raw tangent g_t,
    // which is what the chart map differentiates to)
    let b = gt_tau.dot(&gss_tau).neg().div(&gt_tau.dot(&gt_tau))?;
    let gss_perp = gss_tau.add(&gt_tau.mul_scalar(&b));
    let norm2 = gss_perp.dot(&gss_perp);
    if norm2.value() <= tol.reg {
        return Err(LocusError::Chart(
            "transverse second derivative parallel to the tangent (not a cuspidal edge)".into(),
        ));
    }
    let a = norm2.powf(-0.25)?;

    // composite chart (τ, σ) -> (t, s) as polynomials
    let a2b_half = a.mul(&a).mul(&b).scale(0.5);
    let mut t_chart = Jet2::zero(m);
    let mut s_chart = Jet2::zero(m);
    for i in 0..=m {
        t_chart.set_coeff(i, 0, t_of_tau.coeff(i));
        if i + 1 <= m {
            s_chart.set_coeff(i, 1, a.coeff(i));
        }
        if i + 2 <= m {
            t_chart.set_coeff(i, 2, a2b_half.coeff(i));
        }
    }
    let u_poly = compose2(&adapted.u_poly, (0.0, 0.0), &t_chart, &s_chart)?;
    let v_poly = compose2(&adapted.v_poly, (0.0, 0.0), &t_chart, &s_chart)?;
    let chart = finish_chart(surface, ChartKind::SpecialAdapted, sample, u_poly, v_poly, n, tol)?;

    // postcondition: orthonormal frame along the axis
    let gt = chart.g.du().restrict_axis();
    let gss = chart.g.dv().dv().restrict_axis();
    let e = gt.dot(&gt);
    let fcross = gt.dot(&gss);
    let gq = gss.dot(&gss);
    let check_order = m.saturating_sub(3).min(2);
    let tau_frame = 1e-7;
    for k in 0..=check_order {
        let e_res = (e.coeff(k) - if k == 0 { 1.0 } else { 0.0 }).abs();
        let f_res = fcross.coeff(k).abs();
        let g_res = (gq.coeff(k) - if k == 0 { 1.0 } else { 0.0 }).abs();
        if e_res > tau_frame || f_res > tau_frame || g_res > tau_frame {
            return Err(LocusError::Chart(format!(
                "special chart frame residuals at order {k}: |E-1|={e_res:.3e} |F|={f_res:.3e} |G-1|={g_res:.3e}"
            )));
        }
    }
    Ok(chart)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surf(text: &str) -> SurfaceDefinition {
        SurfaceDefinition::parse(text).unwrap()
    }

    fn fplus() -> SurfaceDefinition {
        surf(
            "[surface]\nname = fplus\nx = u\ny = 3*u^2 + v^2/2\nz = v^3/3 + u^4 + u^2*v^2\n\
             u_range = -1, 1\nv_range = -1, 1\n",
        )
    }

    fn cycloid() -> SurfaceDefinition {
        surf(
            "[surface]\nname = cycloid\nx = (2+cos(u))*cos(v)\ny = (2+cos(u))*sin(v)\nz = u - sin(u)\n\
             u_range = -6, 6\nv_range = 0.05, 6.23\n",
        )
    }

    fn normal_form() -> SurfaceDefinition {
        surf("[surface]\nname = nf\nx = u\ny = v^2\nz = v^3\nu_range = -1, 1\nv_range = -1, 1\n")
    }

    #[test]
    fn analyze_normal_form_origin() {
        let tol = Tolerances::default();
        let s = analyze_singular_point(&normal_form(), 0.0, 0.0, 5, &tol, None, None).unwrap();
        assert_eq!(s.eta, [0.0, 1.0]);
        assert!(s.is_front);
        assert!(s.is_cuspidal_edge);
        assert!((s.eta_lambda.abs() - 2.0).abs() < 1e-9, "eta_lambda = {}", s.eta_lambda);
        assert!((s.nu_ref[2].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quartic_profile_is_not_a_front() {
        let tol = Tolerances::default();
        let q = surf(
            "[surface]\nname = q\nx = u\ny = v^2\nz = v^4\nu_range = -1, 1\nv_range = -1, 1\n",
        );
        let s = analyze_singular_point(&q, 0.0, 0.0, 5, &tol, None, None).unwrap();
        assert!(!s.is_front);
        assert!(!s.is_cuspidal_edge);
    }

    #[test]
    fn analyze_cycloid_null_direction() {
        let tol = Tolerances::default();
        let s = analyze_singular_point(&cycloid(), 0.0, 1.0, 5, &tol, None, None).unwrap();
        assert!(s.eta[0].abs() > 0.999999, "eta = {:?}", s.eta);
        assert!(s.is_cuspidal_edge);
    }

    #[test]
    fn locate_on_fixtures() {
        let tol = Tolerances::default();
        let pts = locate_singular_points(&fplus(), 64, 5, &tol).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.v.abs() < 1e-9, "v = {}", p.v);
            assert!(p.lambda_residual < tol.sing);
        }
        let pts = locate_singular_points(&cycloid(), 64, 5, &tol).unwrap();
        assert!(!pts.is_empty());
        for p in &pts {
            assert!(p.u.abs() < 1e-9, "u = {}", p.u);
        }
        let sphere = surf(
            "[surface]\nname = sphere\nx = 2*sin(u)*cos(v)\ny = 2*sin(u)*sin(v)\nz = 2*cos(u)\n\
             u_range = 0.2, 2.9\nv_range = 0.1, 6.2\n",
        );
        assert!(locate_singular_points(&sphere, 32, 5, &tol).unwrap().is_empty());
    }

    #[test]
    fn trace_fplus_axis() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&fplus(), (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        assert!(curve.samples.len() > 100);
        let first = &curve.samples[0];
        let last = curve.samples.last().unwrap();
        // canonical direction: +u
        assert!(last.point.u > first.point.u);
        for s in &curve.samples {
            assert!(s.point.v.abs() < 1e-9);
            assert!(s.point.is_cuspidal_edge);
            // left-hand density positive: gradient points left
            let left = [-s.tangent[1], s.tangent[0]];
            assert!(s.point.grad_lambda[0] * left[0] + s.point.grad_lambda[1] * left[1] > 0.0);
        }
        // t is increasing chord length
        for w in curve.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
    }

    #[test]
    fn trace_respects_co_orientation() {
        let tol = Tolerances::default();
        let mut surface = fplus();
        surface.co_orientation = -1;
        let curve = trace_singular_curve(&surface, (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        let first = &curve.samples[0];
        let last = curve.samples.last().unwrap();
        assert!(last.point.u < first.point.u);
    }

    #[test]
    fn trace_cycloid_vertical_line() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&cycloid(), (0.01, 1.0), 0.02, 5, &tol).unwrap();
        for s in &curve.samples {
            assert!(s.point.u.abs() < 1e-9);
        }
        let first = &curve.samples[0];
        let last = curve.samples.last().unwrap();
        assert!(last.point.v > first.point.v, "canonical +v direction");
        // spans most of the v-range
        assert!(last.point.v - first.point.v > 5.5);
    }

    #[test]
    fn implicit_jets_recover_parabola() {
        // density v - u^2: singular curve v = u^2 through the origin
        let mut lam = Jet2::zero(5);
        lam.set_coeff(0, 1, 1.0);
        lam.set_coeff(2, 0, -1.0);
        let (uj, vj) = implicit_curve_jets(&lam, (0.0, 0.0), [1.0, 0.0], 4).unwrap();
        assert_eq!(uj.coeff(1), 1.0);
        assert!((vj.coeff(2) - 1.0).abs() < 1e-12);
        assert!(vj.coeff(1).abs() < 1e-12 && vj.coeff(3).abs() < 1e-12);
    }

    #[test]
    fn curve_jets_on_fixtures() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&fplus(), (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        let mid = curve.samples.len() / 2;
        let (uj, vj) = curve_jets(&fplus(), &curve.samples[mid], 4, &tol).unwrap();
        // the singular curve of f+ is exactly the u-axis
        for k in 0..=4 {
            assert!(vj.coeff(k).abs() < 1e-10, "v coeff {k} = {}", vj.coeff(k));
        }
        assert!((uj.coeff(1).abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn adapted_chart_fplus_origin() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&fplus(), (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        // pick the sample closest to the origin
        let idx = curve
            .samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.point.u.abs().partial_cmp(&b.1.point.u.abs()).unwrap())
            .unwrap()
            .0;
        let chart = build_adapted_chart(&fplus(), &curve.samples[idx], 5, &tol).unwrap();
        assert!(chart.base.0.abs() < 0.01);
        // h(0) = (0, 1, 0), nu(0) = (0, 0, 1)
        let h0 = chart.h.eval(0.0, 0.0);
        assert!((h0[1] - 1.0).abs() < 1e-6 && h0[0].abs() < 1e-6 && h0[2].abs() < 1e-4);
        let nu0 = chart.nu.eval(0.0, 0.0);
        assert!((nu0[2] - 1.0).abs() < 1e-4, "nu = {nu0:?}");
        // density positive for s > 0 (left side)
        assert!(chart.lambda.partial(0, 1).unwrap() > 0.0);
    }

    #[test]
    fn adapted_chart_cycloid_swaps_axes() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&cycloid(), (0.01, 1.0), 0.02, 5, &tol).unwrap();
        let idx = curve.samples.len() / 2;
        let chart = build_adapted_chart(&cycloid(), &curve.samples[idx], 5, &tol).unwrap();
        // traced direction +v, so left is -u: s must decrease u
        assert!(chart.u_poly.coeff(0, 1) < 0.0);
        assert!((chart.v_poly.coeff(1, 0) - 1.0).abs() < 1e-9);
        // the normal on the singular curve is vertical (cone point image)
        let nu0 = chart.nu.eval(0.0, 0.0);
        assert!((nu0[2].abs() - 1.0).abs() < 1e-9, "nu = {nu0:?}");
        assert!(chart.lambda.partial(0, 1).unwrap() > 0.0);
    }

    #[test]
    fn special_chart_normalizes_frame() {
        let tol = Tolerances::default();
        let nf = normal_form();
        let curve = trace_singular_curve(&nf, (0.1, 1e-4), 0.01, 5, &tol).unwrap();
        let idx = curve.samples.len() / 2;
        let chart = build_special_adapted_chart(&nf, &curve.samples[idx], 5, &tol).unwrap();
        // scale s by 2^{-1/2} so |g_ss| = 1
        let gss = chart.g.dv().dv().restrict_axis();
        let n0 = Vec3::from_array(gss.eval1(0.0));
        assert!((n0.dot(&n0).sqrt() - 1.0).abs() < 1e-9);
        assert!((chart.v_poly.coeff(0, 1).abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn special_chart_fplus_off_origin() {
        let tol = Tolerances::default();
        let curve = trace_singular_curve(&fplus(), (0.1, 1e-3), 0.01, 5, &tol).unwrap();
        // a sample away from the origin where the raw chart is not special
        let idx = curve
            .samples
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.point.u - 0.3).abs().partial_cmp(&(b.1.point.u - 0.3).abs()).unwrap()
            })
            .unwrap()
            .0;
        let chart = build_special_adapted_chart(&fplus(), &curve.samples[idx], 5, &tol).unwrap();
        let gt = chart.g.du().restrict_axis();
        let gss = chart.g.dv().dv().restrict_axis();
        let e = gt.dot(&gt);
        let fx = gt.dot(&gss);
        let gq = gss.dot(&gss);
        for k in 0..=2 {
            let want = if k == 0 { 1.0 } else { 0.0 };
            assert!((e.coeff(k) - want).abs() < 1e-7, "E at {k}: {}", e.coeff(k));
            assert!(fx.coeff(k).abs() < 1e-7, "F at {k}: {}", fx.coeff(k));
            assert!((gq.coeff(k) - want).abs() < 1e-7, "G at {k}: {}", gq.coeff(k));
        }
    }
}
