//! Surface definition files.
//!
//! A surface is described by a small INI-like file:
//!
//! ```text
//! # lines starting with # are comments
//! [surface]
//! name = cycloid
//! x = (2+cos(u))*cos(v)
//! y = (2+cos(u))*sin(v)
//! z = u - sin(u)
//! u_range = -6, 6
//! v_range = 0.05, 6.23
//! co_orientation = 1
//! ```
//!
//! `x`, `y`, `z` use the expression grammar from [`crate::expr`];
//! `co_orientation` is optional and defaults to `1` (`-1` flips the chosen
//! unit normal along the singular curve).

use crate::expr::{parse_expression, ExprAst, ExprError};
use crate::jet::{Jet2, JetError, Vec3, V3};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("io error reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}, key `{key}`: {source}")]
    Expr { line: usize, key: String, source: ExprError },
    #[error("missing required key `{key}` in [surface] section")]
    MissingKey { key: &'static str },
    #[error("evaluating surface at (u,v)=({u},{v}): {source}")]
    Eval { u: f64, v: f64, source: ExprError },
    #[error("jet arithmetic: {0}")]
    Jet(#[from] JetError),
}

/// A parametrized surface: three coordinate expressions over a rectangle.
#[derive(Debug, Clone)]
pub struct SurfaceDefinition {
    pub name: String,
    pub x: ExprAst,
    pub y: ExprAst,
    pub z: ExprAst,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    /// +1 or -1; flips the co-orienting unit normal.
    pub co_orientation: i8,
}

impl SurfaceDefinition {
    pub fn load(path: &Path) -> Result<SurfaceDefinition, SurfaceError> {
        let text = std::fs::read_to_string(path).map_err(|e| SurfaceError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<SurfaceDefinition, SurfaceError> {
        let mut in_surface = false;
        let mut name = None;
        let mut exprs: [Option<(usize, ExprAst)>; 3] = [None, None, None];
        let mut u_range = None;
        let mut v_range = None;
        let mut co_orientation: i8 = 1;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if line == "[surface]" {
                    in_surface = true;
                    continue;
                }
                return Err(SurfaceError::Format {
                    line: lineno,
                    message: format!("unknown section `{line}` (expected `[surface]`)"),
                });
            }
            if !in_surface {
                return Err(SurfaceError::Format {
                    line: lineno,
                    message: "key outside of the [surface] section".into(),
                });
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SurfaceError::Format {
                line: lineno,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "name" => name = Some(value.to_string()),
                "x" | "y" | "z" => {
                    let ast = parse_expression(value).map_err(|e| SurfaceError::Expr {
                        line: lineno,
                        key: key.to_string(),
                        source: e,
                    })?;
                    let slot = (key.as_bytes()[0] - b'x') as usize;
                    exprs[slot] = Some((lineno, ast));
                }
                "u_range" | "v_range" => {
                    let range = parse_range(value).ok_or_else(|| SurfaceError::Format {
                        line: lineno,
                        message: format!("`{key}` must be `lo, hi` with lo < hi"),
                    })?;
                    if key == "u_range" {
                        u_range = Some(range);
                    } else {
                        v_range = Some(range);
                    }
                }
                "co_orientation" => {
                    co_orientation = match value {
                        "1" | "+1" => 1,
                        "-1" => -1,
                        _ => {
                            return Err(SurfaceError::Format {
                                line: lineno,
                                message: "`co_orientation` must be 1 or -1".into(),
                            })
                        }
                    };
                }
                _ => {
                    return Err(SurfaceError::Format {
                        line: lineno,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }

        let [x, y, z] = exprs;
        Ok(SurfaceDefinition {
            name: name.ok_or(SurfaceError::MissingKey { key: "name" })?,
            x: x.ok_or(SurfaceError::MissingKey { key: "x" })?.1,
            y: y.ok_or(SurfaceError::MissingKey { key: "y" })?.1,
            z: z.ok_or(SurfaceError::MissingKey { key: "z" })?.1,
            u_range: u_range.ok_or(SurfaceError::MissingKey { key: "u_range" })?,
            v_range: v_range.ok_or(SurfaceError::MissingKey { key: "v_range" })?,
            co_orientation,
        })
    }

    /// Full bivariate jet of the position vector at `(u, v)` to the given order.
    pub fn jet_at(&self, u: f64, v: f64, order: usize) -> Result<V3<Jet2>, SurfaceError> {
        let ju = Jet2::var_u(u, order);
        let jv = Jet2::var_v(v, order);
        let wrap = |e: ExprError| SurfaceError::Eval { u, v, source: e };
        Ok(V3::new(
            self.x.eval(&ju, &jv).map_err(wrap)?,
            self.y.eval(&ju, &jv).map_err(wrap)?,
            self.z.eval(&ju, &jv).map_err(wrap)?,
        ))
    }

    /// Position vector at `(u, v)`.
    pub fn point_at(&self, u: f64, v: f64) -> Result<Vec3, SurfaceError> {
        let wrap = |e: ExprError| SurfaceError::Eval { u, v, source: e };
        Ok(Vec3::new(
            self.x.eval_scalar(u, v).map_err(wrap)?,
            self.y.eval_scalar(u, v).map_err(wrap)?,
            self.z.eval_scalar(u, v).map_err(wrap)?,
        ))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u > self.u_range.0 && u < self.u_range.1 && v > self.v_range.0 && v < self.v_range.1
    }
}

fn parse_range(value: &str) -> Option<(f64, f64)> {
    let (lo, hi) = value.split_once(',')?;
    let lo: f64 = lo.trim().parse().ok()?;
    let hi: f64 = hi.trim().parse().ok()?;
    (lo < hi).then_some((lo, hi))
}
