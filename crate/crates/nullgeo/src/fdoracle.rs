//! Finite-difference oracle for directional derivatives.
//!
//! This module is the independent cross-check for the jet calculus: it
//! estimates directional derivatives of a [`FieldHandle`] from central
//! difference stencils with Richardson extrapolation, sharing no code with
//! the forward-mode path.  Supported derivative orders are 1 through 3.
//!
//! All three stencils are symmetric, so their truncation error expands in
//! even powers of the step: `D(h) = L + c_1 h^2 + c_2 h^4 + ...`.  Each
//! Richardson level halves the step and cancels the leading term via
//! `R[k][j] = (4^j R[k][j-1] - R[k-1][j-1]) / (4^j - 1)`.

use thiserror::Error;

use crate::jetcalc::{DiffScalar, FieldHandle, JetError};
use crate::nullframe::DomainBox;

/// Errors from the finite-difference engine.
#[derive(Debug, Error)]
pub enum FdError {
    #[error("finite differences support derivative orders 1 through 3, got {0}")]
    OrderUnsupported(usize),
    /// A stencil sample would leave the supplied domain box.
    #[error("stencil point {point:?} leaves the domain; shrink the step or move inward")]
    StencilOutsideDomain { point: Vec<f64> },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("finite-difference stencil produced a non-finite value")]
    NonFinite,
    #[error("finite-difference configuration: {0}")]
    Config(String),
}

/// Step and extrapolation settings.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    /// Base step; `None` picks an order-dependent default scaled by the
    /// point's magnitude.
    pub h: Option<f64>,
    /// Number of Richardson halvings beyond the base stencil.
    pub levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { h: None, levels: 2 }
    }
}

impl FdConfig {
    fn base_step(&self, order: usize, p: &[f64]) -> f64 {
        match self.h {
            Some(h) => h,
            None => {
                let scale = p.iter().fold(1.0_f64, |m, &x| m.max(x.abs()));
                if order == 3 {
                    1e-2 * scale
                } else {
                    1e-3 * scale
                }
            }
        }
    }
}

/// Evaluate `f` at a plain point (depth-0 jets).
fn eval_values(f: &FieldHandle, p: &[f64]) -> Result<Vec<f64>, FdError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    let out = f.eval(&coords)?;
    Ok(out.iter().map(|c| c.value()).collect())
}

/// Offsets (in units of `h` along `v`) and weights (in units of `h^order`)
/// of the central stencil for each order.
fn stencil(order: usize) -> Result<(&'static [f64], &'static [f64], f64), FdError> {
    match order {
        1 => Ok((&[1.0, -1.0], &[1.0, -1.0], 2.0)),
        2 => Ok((&[1.0, 0.0, -1.0], &[1.0, -2.0, 1.0], 1.0)),
        3 => Ok((&[2.0, 1.0, -1.0, -2.0], &[1.0, -2.0, 2.0, -1.0], 2.0)),
        other => Err(FdError::OrderUnsupported(other)),
    }
}

/// Central-difference directional derivative of every component of `f`.
///
/// Computes `d^order/dt^order f(p + t v)` at `t = 0`.  When a `domain` is
/// given, every stencil sample is checked against it before any evaluation.
pub fn fd_directional(
    f: &FieldHandle,
    p: &[f64],
    v: &[f64],
    order: usize,
    cfg: &FdConfig,
    domain: Option<&DomainBox>,
) -> Result<Vec<f64>, FdError> {
    if p.len() != f.arity() || v.len() != f.arity() {
        return Err(FdError::Config(format!(
            "point/direction length {}/{} does not match field arity {}",
            p.len(),
            v.len(),
            f.arity()
        )));
    }
    let (offsets, weights, denom) = stencil(order)?;
    if cfg.levels > 4 {
        return Err(FdError::Config(format!(
            "at most 4 Richardson levels supported, got {}",
            cfg.levels
        )));
    }
    let h0 = cfg.base_step(order, p);
    if !h0.is_finite() || h0 <= 0.0 {
        return Err(FdError::Config(format!("invalid step {h0}")));
    }

    // Pre-check every sample of every refinement level.
    if let Some(dom) = domain {
        for level in 0..=cfg.levels {
            let h = h0 / (1u32 << level) as f64;
            for &s in offsets {
                let q: Vec<f64> = p.iter().zip(v).map(|(&x, &d)| x + s * h * d).collect();
                if !dom.contains(&q, 0.0) {
                    return Err(FdError::StencilOutsideDomain { point: q });
                }
            }
        }
    }

    let m = f.codomain();
    let raw = |h: f64| -> Result<Vec<f64>, FdError> {
        let mut acc = vec![0.0; m];
        for (&s, &w) in offsets.iter().zip(weights) {
            let q: Vec<f64> = p.iter().zip(v).map(|(&x, &d)| x + s * h * d).collect();
            let fq = eval_values(f, &q)?;
            for (a, y) in acc.iter_mut().zip(fq) {
                *a += w * y;
            }
        }
        let scale = denom * h.powi(order as i32);
        Ok(acc.into_iter().map(|a| a / scale).collect())
    };

    // Richardson table per component; row k holds R[k][0..=k].
    let mut rows: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.levels + 1);
    for k in 0..=cfg.levels {
        let h = h0 / (1u32 << k) as f64;
        let mut row = vec![raw(h)?];
        for j in 1..=k {
            let pow = 4f64.powi(j as i32);
            let prev = &row[j - 1];
            let diag = &rows[k - 1][j - 1];
            row.push(
                prev.iter()
                    .zip(diag)
                    .map(|(&fine, &coarse)| (pow * fine - coarse) / (pow - 1.0))
                    .collect(),
            );
        }
        rows.push(row);
    }
    let result = rows[cfg.levels][cfg.levels].clone();
    if result.iter().any(|x| !x.is_finite()) {
        return Err(FdError::NonFinite);
    }
    Ok(result)
}
