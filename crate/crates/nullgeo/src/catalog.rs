//! Chart catalog: built-in null hypersurfaces.
//!
//! Four families are provided:
//!
//! * **Future null cone** `F(u, angles) = (u, u * s(angles))` with `s` the
//!   unit-sphere embedding of `S^n`.  The position field itself spans the
//!   radical, the leaves `u = const` are round spheres of radius `u`, and
//!   every fundamental form has a closed expression recorded in
//!   [`ExpectedGeometry`].
//! * **Null hyperplane** through a null direction `(1, uhat)`:
//!   `F(t, s) = t (1, uhat) + sum_a s^a (0, e_a)` with `(e_a)` an
//!   orthonormal basis of the spatial complement of `uhat`.  All forms
//!   vanish identically.
//! * **Ruled graph** (`graph`): the ruling of a curved spacelike graph
//!   surface along one of its null normal fields.  Its leaves have
//!   genuinely curved normal bundles, so it is the negative instance for
//!   every flatness criterion.
//! * **Ruled catenoid** (`catenoid`): the ruling of a catenoid — a minimal
//!   spacelike surface — along a null normal field; the non-vacuous
//!   instance for the minimal-leaf audit.
//!
//! Charts can also be described in JSON (family, screen dimension, optional
//! direction) and loaded with [`load_custom`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jetcalc::{DiffScalar, FieldHandle};
use crate::nullframe::{DomainBox, FrameError, NullChart};

/// Errors from catalog construction and chart configs.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown chart family '{0}' (known families: cone, hyperplane, graph, catenoid)")]
    UnknownFamily(String),
    #[error("invalid chart parameters: {0}")]
    BadParameters(String),
    #[error("chart config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Unit-sphere embedding `S^n -> R^{n+1}` in hyperspherical angles.
///
/// The last angle is azimuthal; every earlier angle is polar.  For `n = 2`
/// this is `(sin t1 cos t2, sin t1 sin t2, cos t1)`.
fn unit_sphere(angles: &[DiffScalar]) -> Vec<DiffScalar> {
    let azimuth = angles[angles.len() - 1];
    let mut c = vec![azimuth.cos(), azimuth.sin()];
    for th in angles[..angles.len() - 1].iter().rev() {
        let s = th.sin();
        let mut next: Vec<DiffScalar> = c.iter().map(|x| s * *x).collect();
        next.push(th.cos());
        c = next;
    }
    c
}

fn cone_position(x: &[DiffScalar]) -> Vec<DiffScalar> {
    let u = x[0];
    let dir = unit_sphere(&x[1..]);
    let mut out = Vec::with_capacity(x.len() + 1);
    out.push(u);
    out.extend(dir.into_iter().map(|d| u * d));
    out
}

/// The future null cone over screen dimension `n`.
///
/// Coordinates are `(u, theta1, ..., theta{n-1}, phi)` with `u` along the
/// rays; polar angles stay away from the axes so the chart is regular.  The
/// position field is installed as the radical.
pub fn make_null_cone(n: usize) -> Result<NullChart, CatalogError> {
    if n < 2 {
        return Err(CatalogError::BadParameters(format!(
            "cone needs screen dimension at least 2, got {n}"
        )));
    }
    let map = FieldHandle::new(n + 1, n + 2, cone_position);
    let xi = FieldHandle::new(n + 1, n + 2, cone_position);
    let mut intervals = vec![(0.5, 4.0)];
    intervals.extend(std::iter::repeat_n((0.2, std::f64::consts::PI - 0.2), n - 1));
    intervals.push((0.0, 6.0));
    let mut names = vec!["u".to_string()];
    names.extend((1..n).map(|a| format!("theta{a}")));
    names.push("phi".to_string());
    Ok(NullChart::new(
        "cone",
        n,
        map,
        DomainBox::new(intervals)?,
        Some(xi),
        Some(names),
    )?)
}

/// A null hyperplane chart with null direction `(1, uhat)`.
///
/// `direction` is the spatial part (length `n + 1`, any nonzero vector); it
/// is normalized internally.  The screen basis is an orthonormal basis of
/// its spatial complement, so the induced Gram matrix is exactly
/// `diag(0, 1, ..., 1)`.
pub fn make_null_hyperplane(n: usize, direction: &[f64]) -> Result<NullChart, CatalogError> {
    if n < 2 {
        return Err(CatalogError::BadParameters(format!(
            "hyperplane needs screen dimension at least 2, got {n}"
        )));
    }
    if direction.len() != n + 1 {
        return Err(CatalogError::BadParameters(format!(
            "direction must have {} spatial components, got {}",
            n + 1,
            direction.len()
        )));
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= 1e-12 || direction.iter().any(|x| !x.is_finite()) {
        return Err(CatalogError::BadParameters(
            "direction must be a nonzero finite vector".into(),
        ));
    }
    let uhat: Vec<f64> = direction.iter().map(|x| x / norm).collect();

    // Orthonormal basis of the complement by Gram-Schmidt over the
    // coordinate basis, keeping the n independent survivors.
    let mut basis: Vec<Vec<f64>> = vec![uhat.clone()];
    for i in 0..=n {
        if basis.len() == n + 1 {
            break;
        }
        let mut v = vec![0.0; n + 1];
        v[i] = 1.0;
        for b in &basis {
            let proj: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= proj * bk;
            }
        }
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-8 {
            for vk in v.iter_mut() {
                *vk /= len;
            }
            basis.push(v);
        }
    }
    if basis.len() != n + 1 {
        return Err(CatalogError::BadParameters(
            "failed to complete an orthonormal screen basis".into(),
        ));
    }
    let screen_basis = basis.split_off(1);
    let null_dir = uhat;

    let map = FieldHandle::new(n + 1, n + 2, move |x: &[DiffScalar]| {
        let t = x[0];
        let mut out = vec![t];
        for k in 0..null_dir.len() {
            let mut comp = t * null_dir[k];
            for (a, e) in screen_basis.iter().enumerate() {
                comp = comp + x[a + 1] * e[k];
            }
            out.push(comp);
        }
        out
    });
    Ok(NullChart::new(
        "hyperplane",
        n,
        map,
        DomainBox::new(vec![(-2.0, 2.0); n + 1])?,
        None,
        None,
    )?)
}

/// A ruled null hypersurface whose leaves have curved normal bundles.
///
/// Start from the spacelike graph surface
/// `S(s) = (phi, s1, s2, psi)` with `phi = 0.15 s1^2 + 0.05 s2^2` and
/// `psi = 0.1 s1 s2`, solve for its null normal field `xi(s)` with unit
/// time component, and rule `F(t, s) = S(s) + t xi(s)`.  The radical is
/// `d/dt = xi(s)` exactly, and the non-commuting Hessians of `phi` and
/// `psi` make the two null shape operators of each leaf non-commuting:
/// a negative instance for all the flatness criteria.
pub fn make_null_graph() -> Result<NullChart, CatalogError> {
    let graph = |x: &[DiffScalar]| -> Vec<DiffScalar> {
        let t = x[0];
        let s1 = x[1];
        let s2 = x[2];
        let phi = s1 * s1 * 0.15 + s2 * s2 * 0.05;
        let psi = s1 * s2 * 0.1;
        let phi_1 = s1 * 0.3;
        let phi_2 = s2 * 0.1;
        let psi_1 = s2 * 0.1;
        let psi_2 = s1 * 0.1;
        // Null normal (1, phi' - w psi', w): quadratic in w, positive root.
        let p = phi_1 * psi_1 + phi_2 * psi_2;
        let q = psi_1 * psi_1 + psi_2 * psi_2 + 1.0;
        let grad2 = phi_1 * phi_1 + phi_2 * phi_2;
        let w = (p + (p * p + q * (-grad2 + 1.0)).sqrt()) / q;
        vec![
            phi + t,
            s1 + t * (phi_1 - w * psi_1),
            s2 + t * (phi_2 - w * psi_2),
            psi + t * w,
        ]
    };
    let map = FieldHandle::new(3, 4, graph);
    Ok(NullChart::new(
        "graph",
        2,
        map,
        DomainBox::new(vec![(-0.4, 0.4), (-1.5, 1.5), (-1.5, 1.5)])?,
        None,
        Some(vec!["t".into(), "s1".into(), "s2".into()]),
    )?)
}

/// A ruled null hypersurface over a minimal spacelike surface.
///
/// The base is the catenoid `S(v, phi) = (0, cosh v cos phi, cosh v sin phi, v)`
/// inside the spacelike hyperplane `x0 = 0`, with Euclidean unit normal
/// `nu = (-cos phi, -sin phi, sinh v) / cosh v` there.  Ruling along the
/// null normal `xi = (1, nu)` gives `F(t, v, phi) = S + t xi`.  The leaf
/// `t = 0` is a minimal surface with one-dimensional first normal space:
/// the positive instance for the minimal-immersion audit.
pub fn make_minimal_graph() -> Result<NullChart, CatalogError> {
    let catenoid = |x: &[DiffScalar]| -> Vec<DiffScalar> {
        let t = x[0];
        let v = x[1];
        let ph = x[2];
        let ev = v.exp();
        let emv = ev.recip();
        let ch = (ev + emv) * 0.5;
        let sh = (ev - emv) * 0.5;
        let sech = ch.recip();
        let (cp, sp) = (ph.cos(), ph.sin());
        vec![
            t,
            ch * cp - t * (cp * sech),
            ch * sp - t * (sp * sech),
            v + t * (sh * sech),
        ]
    };
    let map = FieldHandle::new(3, 4, catenoid);
    Ok(NullChart::new(
        "catenoid",
        2,
        map,
        DomainBox::new(vec![(-0.3, 0.3), (-1.2, 1.2), (0.0, 6.3)])?,
        None,
        Some(vec!["t".into(), "v".into(), "phi".into()]),
    )?)
}

/// Closed-form geometry of a catalog family, for golden comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedGeometry {
    Cone { n: usize },
    Hyperplane { n: usize },
}

impl ExpectedGeometry {
    /// Umbilicity factor: `B = rho * g`.
    pub fn rho(&self, _p: &[f64]) -> f64 {
        match self {
            Self::Cone { .. } => -1.0,
            Self::Hyperplane { .. } => 0.0,
        }
    }

    /// Screen umbilicity factor: `C = varrho * g` on the screen.
    pub fn varrho(&self, p: &[f64]) -> f64 {
        match self {
            Self::Cone { .. } => -1.0 / (2.0 * p[0] * p[0]),
            Self::Hyperplane { .. } => 0.0,
        }
    }

    /// Conformality factor: `A_N = psi * A*` on the screen
    /// (`None` when `A*` vanishes and the factor is meaningless).
    pub fn psi(&self, p: &[f64]) -> Option<f64> {
        match self {
            Self::Cone { .. } => Some(1.0 / (2.0 * p[0] * p[0])),
            Self::Hyperplane { .. } => None,
        }
    }

    /// `A*` screen block is `a_star_factor * I`.
    pub fn a_star_factor(&self, _p: &[f64]) -> f64 {
        match self {
            Self::Cone { .. } => -1.0,
            Self::Hyperplane { .. } => 0.0,
        }
    }

    /// `A_N` screen block is `a_n_factor * I`.
    pub fn a_n_factor(&self, p: &[f64]) -> f64 {
        match self {
            Self::Cone { .. } => -1.0 / (2.0 * p[0] * p[0]),
            Self::Hyperplane { .. } => 0.0,
        }
    }

    /// `tau` on the coordinate tangents.
    pub fn tau(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Self::Cone { n } => {
                let mut t = vec![-1.0 / p[0]];
                t.extend(std::iter::repeat_n(0.0, *n));
                t
            }
            Self::Hyperplane { n } => vec![0.0; n + 1],
        }
    }

    /// Scalar mean curvature (screen trace of `B` over `n`).
    pub fn mean_curvature(&self, _p: &[f64]) -> f64 {
        match self {
            Self::Cone { .. } => -1.0,
            Self::Hyperplane { .. } => 0.0,
        }
    }

    /// Canonical normal pair coefficients `(V, W)` over `(xi, N)`.
    pub fn pair(&self, p: &[f64]) -> Option<((f64, f64), (f64, f64))> {
        match self {
            Self::Cone { .. } => {
                let u = p[0];
                Some(((-0.5 / u, -u), (-0.5 / u, u)))
            }
            Self::Hyperplane { .. } => None,
        }
    }

    /// Shape factor of the spacelike pair section: `A_V = lambda * I`.
    pub fn lambda(&self, p: &[f64]) -> Option<f64> {
        match self {
            Self::Cone { .. } => Some(1.0 / p[0]),
            Self::Hyperplane { .. } => None,
        }
    }

    /// Causal type of the spacelike pair section: `g(V, V)`.
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Self::Cone { .. } => Some(1.0),
            Self::Hyperplane { .. } => None,
        }
    }

    /// Center of the quadric containing the leaf through `p`.
    pub fn center(&self, p: &[f64]) -> Option<Vec<f64>> {
        match self {
            Self::Cone { n } => {
                let mut c = vec![p[0]];
                c.extend(std::iter::repeat_n(0.0, *n + 1));
                Some(c)
            }
            Self::Hyperplane { .. } => None,
        }
    }

    /// Squared radius of that quadric.
    pub fn r2(&self, p: &[f64]) -> Option<f64> {
        match self {
            Self::Cone { .. } => Some(p[0] * p[0]),
            Self::Hyperplane { .. } => None,
        }
    }

    /// Leaf mean curvature coefficients over `(xi, N)`.
    pub fn leaf_mean_curvature(&self, p: &[f64]) -> Option<(f64, f64)> {
        match self {
            Self::Cone { .. } => {
                let u = p[0];
                Some((-0.5 / (u * u), -1.0))
            }
            Self::Hyperplane { .. } => None,
        }
    }
}

/// JSON-loadable chart description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartConfig {
    /// Chart family: `cone`, `hyperplane`, `graph`, or `catenoid`.
    pub family: String,
    /// Screen dimension (default 2).
    #[serde(default = "default_screen_dim")]
    pub n: usize,
    /// Spatial direction for the hyperplane family (default first axis).
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

fn default_screen_dim() -> usize {
    2
}

impl ChartConfig {
    /// Build the chart this config describes.
    pub fn build(&self) -> Result<NullChart, CatalogError> {
        match self.family.as_str() {
            "cone" => make_null_cone(self.n),
            "hyperplane" => {
                let mut dir = vec![0.0; self.n + 1];
                dir[0] = 1.0;
                let dir = self.direction.clone().unwrap_or(dir);
                make_null_hyperplane(self.n, &dir)
            }
            "graph" => {
                self.require_screen_dim(2)?;
                make_null_graph()
            }
            "catenoid" => {
                self.require_screen_dim(2)?;
                make_minimal_graph()
            }
            other => Err(CatalogError::UnknownFamily(other.to_string())),
        }
    }

    fn require_screen_dim(&self, n: usize) -> Result<(), CatalogError> {
        if self.n != n {
            return Err(CatalogError::BadParameters(format!(
                "family '{}' is only defined for screen dimension {n}, got {}",
                self.family, self.n
            )));
        }
        Ok(())
    }

    /// Expected closed-form geometry for the family.
    ///
    /// Only the cone and the hyperplane have complete closed-form tables;
    /// the ruled families are verified through identities and audits
    /// instead, so asking for their tables is an error.
    pub fn expected(&self) -> Result<ExpectedGeometry, CatalogError> {
        match self.family.as_str() {
            "cone" => Ok(ExpectedGeometry::Cone { n: self.n }),
            "hyperplane" => Ok(ExpectedGeometry::Hyperplane { n: self.n }),
            "graph" | "catenoid" => Err(CatalogError::BadParameters(format!(
                "family '{}' has no closed-form golden tables",
                self.family
            ))),
            other => Err(CatalogError::UnknownFamily(other.to_string())),
        }
    }
}

/// Parse a JSON chart config and build the chart.
pub fn load_custom(json: &str) -> Result<NullChart, CatalogError> {
    let config: ChartConfig = serde_json::from_str(json)?;
    config.build()
}
