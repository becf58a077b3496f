//! Chart-adapted frames on null hypersurfaces.
//!
//! A chart is a map `F(t, s^1, ..., s^n)` into Minkowski space `R^{n+2}`
//! whose image is a null hypersurface: the induced Gram matrix of the
//! coordinate tangents has a one-dimensional kernel.  The `t`-lines must be
//! transverse to the screen distribution spanned by the `s`-tangents.  From
//! such a chart this module constructs, at any jet depth:
//!
//! * the coordinate tangent frame and its induced Gram matrix,
//! * the radical direction `xi` (kernel of the Gram, normalized to unit
//!   `t`-coefficient, or an explicit override field),
//! * the unique null transversal `N` with `g(N, N) = 0`, `g(N, xi) = 1`,
//!   and `g(N, W) = 0` for all screen vectors `W`.
//!
//! `N` is obtained from the minimum-Euclidean-norm solution `z` of the
//! linear system `g(z, W_a) = 0`, `g(z, xi) = 1`, corrected to
//! `N = z - (g(z, z)/2) xi`; the correction makes the result independent of
//! which solution of the system the solver returned.

use serde::Serialize;
use thiserror::Error;

use crate::jetcalc::{seed_coords, split_derivative, DiffScalar, FieldHandle, JetError, MAX_NEST};
use crate::linalg::{lu_solve, min_norm_solve, sym_eigen_ascending, JetMatrix, LinalgError};
use crate::minkowski::{g_dot, AmbientVector};

/// Errors from chart validation and frame construction.
#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Jet(#[from] JetError),
    /// Inconsistent chart configuration (dimensions, domain, names).
    #[error("chart configuration: {0}")]
    Config(String),
    /// A requested point lies outside the chart domain box.
    #[error("point {point:?} lies outside the chart domain")]
    OutsideDomain { point: Vec<f64> },
    /// The induced metric does not have a one-dimensional kernel.
    #[error(
        "induced metric kernel is not one-dimensional (eigenvalues by magnitude: {eigenvalues:?})"
    )]
    ChartDegeneracy { eigenvalues: Vec<f64> },
    /// The radical is not transverse to the screen in this chart.
    #[error("chart t-lines are not transverse to the screen (kernel t-coefficient {tcoeff:e})")]
    ChartAdaptation { tcoeff: f64 },
    /// The transversal system is singular.
    #[error("transversal system is singular; frame is degenerate")]
    FrameDegeneracy,
    /// A radical override field is not tangent to the chart.
    #[error("xi override is not tangent to the chart (relative residual {residual:e})")]
    OverrideNotTangent { residual: f64 },
}

/// Closed coordinate box on which a chart is defined.
#[derive(Debug, Clone)]
pub struct DomainBox {
    intervals: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self, FrameError> {
        for &(lo, hi) in &intervals {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(FrameError::Config(format!(
                    "invalid domain interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        self.intervals[i]
    }

    /// True when `p` lies inside the box with the given margin on every side.
    pub fn contains(&self, p: &[f64], margin: f64) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.intervals)
                .all(|(&x, &(lo, hi))| x >= lo + margin && x <= hi - margin)
    }
}

/// Cartesian sampling grid over a chart domain.
#[derive(Debug, Clone)]
pub struct GridSpec {
    counts: Vec<usize>,
    ranges: Option<Vec<(f64, f64)>>,
}

impl GridSpec {
    /// Grid with the same sample count along every coordinate.
    pub fn uniform(count: usize, dims: usize) -> Self {
        Self {
            counts: vec![count; dims],
            ranges: None,
        }
    }

    pub fn new(counts: Vec<usize>) -> Self {
        Self {
            counts,
            ranges: None,
        }
    }

    /// Restrict sampling to explicit per-coordinate ranges.
    pub fn with_ranges(mut self, ranges: Vec<(f64, f64)>) -> Self {
        self.ranges = Some(ranges);
        self
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Materialize the grid points in deterministic row-major order.
    ///
    /// A count of one samples the midpoint of the coordinate range.  Custom
    /// ranges must lie inside the chart domain.
    pub fn points(&self, domain: &DomainBox) -> Result<Vec<Vec<f64>>, FrameError> {
        if self.counts.len() != domain.dim() {
            return Err(FrameError::Config(format!(
                "grid has {} axes, chart domain has {}",
                self.counts.len(),
                domain.dim()
            )));
        }
        if self.counts.contains(&0) {
            return Err(FrameError::Config("grid counts must be positive".into()));
        }
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(self.counts.len());
        for (i, &count) in self.counts.iter().enumerate() {
            let (dlo, dhi) = domain.interval(i);
            let (lo, hi) = match &self.ranges {
                Some(r) => r[i],
                None => (dlo, dhi),
            };
            if lo < dlo - 1e-12 || hi > dhi + 1e-12 || lo > hi {
                return Err(FrameError::Config(format!(
                    "grid range [{lo}, {hi}] on axis {i} leaves the domain [{dlo}, {dhi}]"
                )));
            }
            let axis = if count == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..count)
                    .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
                    .collect()
            };
            axes.push(axis);
        }
        let total: usize = self.counts.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut index = vec![0usize; axes.len()];
        loop {
            points.push(index.iter().zip(&axes).map(|(&k, ax)| ax[k]).collect());
            let mut axis = axes.len();
            loop {
                if axis == 0 {
                    return Ok(points);
                }
                axis -= 1;
                index[axis] += 1;
                if index[axis] < axes[axis].len() {
                    break;
                }
                index[axis] = 0;
            }
        }
    }
}

/// Thresholds for frame construction and chart validation.
#[derive(Debug, Clone, Copy)]
pub struct FrameTolerances {
    /// Kernel detection: smallest |eigenvalue| must be below this times the
    /// largest.
    pub degenerate_ratio: f64,
    /// Kernel separation: the second-smallest |eigenvalue| must exceed this
    /// times the largest.
    pub separation_ratio: f64,
    /// Minimum |t-coefficient| of the unit kernel eigenvector.
    pub transversality: f64,
    /// Relative tangency tolerance for radical override fields.
    pub override_tangency: f64,
}

impl Default for FrameTolerances {
    fn default() -> Self {
        Self {
            degenerate_ratio: 1e-9,
            separation_ratio: 1e-6,
            transversality: 1e-6,
            override_tangency: 1e-6,
        }
    }
}

/// A chart onto a null hypersurface.
#[derive(Debug, Clone)]
pub struct NullChart {
    name: String,
    n: usize,
    map: FieldHandle,
    domain: DomainBox,
    xi_override: Option<FieldHandle>,
    coord_names: Vec<String>,
}

impl NullChart {
    /// Wrap a chart map `R^{n+1} -> R^{n+2}`.
    ///
    /// `xi_override` may supply the radical field in closed form (it must be
    /// tangent to the chart); otherwise the radical is extracted from the
    /// Gram kernel.  `coord_names` defaults to `t, s1, ..., sn`.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        map: FieldHandle,
        domain: DomainBox,
        xi_override: Option<FieldHandle>,
        coord_names: Option<Vec<String>>,
    ) -> Result<Self, FrameError> {
        if n < 2 {
            return Err(FrameError::Config(format!(
                "screen dimension must be at least 2, got {n}"
            )));
        }
        if map.arity() != n + 1 || map.codomain() != n + 2 {
            return Err(FrameError::Config(format!(
                "chart map must be R^{} -> R^{}, got R^{} -> R^{}",
                n + 1,
                n + 2,
                map.arity(),
                map.codomain()
            )));
        }
        if domain.dim() != n + 1 {
            return Err(FrameError::Config(format!(
                "domain has {} axes, chart needs {}",
                domain.dim(),
                n + 1
            )));
        }
        if let Some(xi) = &xi_override {
            if xi.arity() != n + 1 || xi.codomain() != n + 2 {
                return Err(FrameError::Config(
                    "xi override must have the chart's arity and codomain".into(),
                ));
            }
        }
        let coord_names = match coord_names {
            Some(names) => {
                if names.len() != n + 1 {
                    return Err(FrameError::Config(format!(
                        "{} coordinate names given for {} coordinates",
                        names.len(),
                        n + 1
                    )));
                }
                names
            }
            None => {
                let mut names = vec!["t".to_string()];
                names.extend((1..=n).map(|a| format!("s{a}")));
                names
            }
        };
        Ok(Self {
            name: name.into(),
            n,
            map,
            domain,
            xi_override,
            coord_names,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Screen dimension `n`.
    pub fn screen_dim(&self) -> usize {
        self.n
    }

    /// Number of chart coordinates, `n + 1`.
    pub fn coord_dim(&self) -> usize {
        self.n + 1
    }

    /// Ambient dimension, `n + 2`.
    pub fn ambient_dim(&self) -> usize {
        self.n + 2
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    pub fn map(&self) -> &FieldHandle {
        &self.map
    }

    pub fn has_xi_override(&self) -> bool {
        self.xi_override.is_some()
    }

    /// Ambient position of a (possibly lifted) coordinate tuple.
    pub fn position(&self, coords: &[DiffScalar]) -> Result<AmbientVector, FrameError> {
        Ok(AmbientVector::from_components(self.map.eval(coords)?))
    }
}

/// Frame data of a chart at one (possibly lifted) coordinate tuple.
#[derive(Debug, Clone)]
pub struct FrameData {
    point: AmbientVector,
    tangents: Vec<AmbientVector>,
    gram: JetMatrix,
    xi: AmbientVector,
    xi_chart: Vec<DiffScalar>,
    transversal: AmbientVector,
    gram_eigenvalues: Vec<f64>,
    kernel_tcoeff: f64,
}

impl FrameData {
    /// Ambient position `F(p)`.
    pub fn point(&self) -> &AmbientVector {
        &self.point
    }

    /// Coordinate tangents `(T_t, T_{s^1}, ..., T_{s^n})`.
    pub fn tangents(&self) -> &[AmbientVector] {
        &self.tangents
    }

    /// Screen basis: the `s`-coordinate tangents.
    pub fn screen(&self) -> &[AmbientVector] {
        &self.tangents[1..]
    }

    /// Induced Gram matrix of the coordinate tangents.
    pub(crate) fn gram(&self) -> &JetMatrix {
        &self.gram
    }

    /// Value parts of the induced Gram matrix.
    pub fn gram_values(&self) -> Vec<Vec<f64>> {
        (0..self.gram.rows)
            .map(|r| (0..self.gram.cols).map(|c| self.gram.get(r, c).value()).collect())
            .collect()
    }

    /// Radical direction.
    pub fn xi(&self) -> &AmbientVector {
        &self.xi
    }

    /// Chart-frame coefficients of `xi` (coefficient vector over the tangents).
    pub fn xi_chart(&self) -> &[DiffScalar] {
        &self.xi_chart
    }

    /// Canonical null transversal `N`.
    pub fn transversal(&self) -> &AmbientVector {
        &self.transversal
    }

    /// Gram eigenvalues sorted by magnitude (diagnostics).
    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_eigenvalues
    }

    /// `t`-coefficient of the unit kernel eigenvector (diagnostics).
    pub fn kernel_tcoeff(&self) -> f64 {
        self.kernel_tcoeff
    }

    /// Jet depth of the frame.
    pub fn depth(&self) -> usize {
        self.point.depth()
    }

    /// Screen dimension.
    pub fn screen_dim(&self) -> usize {
        self.tangents.len() - 1
    }

    /// Screen block of the Gram matrix.
    pub(crate) fn screen_gram(&self) -> JetMatrix {
        let n = self.screen_dim();
        JetMatrix::from_fn(n, n, |a, b| self.gram.get(a + 1, b + 1))
    }

    /// Coefficients of the screen projection of `v` on the screen basis.
    ///
    /// Solves `G_ss c = (g(v, W_b))_b`; correct for any ambient `v` because
    /// both `xi` and `N` are `g`-orthogonal to the screen.
    pub(crate) fn screen_coefficients(
        &self,
        v: &AmbientVector,
    ) -> Result<Vec<DiffScalar>, FrameError> {
        let rhs: Vec<DiffScalar> = self.screen().iter().map(|w| g_dot(v, w)).collect();
        lu_solve(&self.screen_gram(), &rhs).map_err(|LinalgError::Singular| {
            FrameError::FrameDegeneracy
        })
    }

    /// `(alpha, beta)` with the radical/transversal split `v = w + alpha xi
    /// + beta N`, `w` in the screen: `alpha = g(v, N)`, `beta = g(v, xi)`.
    pub(crate) fn normal_coefficients(&self, v: &AmbientVector) -> (DiffScalar, DiffScalar) {
        (g_dot(v, &self.transversal), g_dot(v, &self.xi))
    }

    /// Ambient vector from screen coefficients.
    pub(crate) fn screen_vector(&self, coeffs: &[DiffScalar]) -> AmbientVector {
        let mut acc = AmbientVector::zero(self.point.dim(), self.depth());
        for (c, w) in coeffs.iter().zip(self.screen()) {
            acc = acc.scaled_add(*c, w);
        }
        acc
    }
}

/// Construct the full adapted frame at a coordinate tuple of any depth.
pub fn frame_at(
    chart: &NullChart,
    coords: &[DiffScalar],
    tols: &FrameTolerances,
) -> Result<FrameData, FrameError> {
    let m = chart.coord_dim();
    if coords.len() != m {
        return Err(FrameError::Config(format!(
            "{} coordinates supplied to a {}-coordinate chart",
            coords.len(),
            m
        )));
    }
    let depth = coords.first().map_or(0, |c| c.depth());
    assert!(
        depth < MAX_NEST,
        "frame construction needs one free nesting level (depth {depth})"
    );
    let values: Vec<f64> = coords.iter().map(|c| c.value()).collect();
    if !chart.domain.contains(&values, 0.0) {
        return Err(FrameError::OutsideDomain { point: values });
    }

    // Tangents: one chart evaluation per coordinate, seeded one level up.
    let mut tangents = Vec::with_capacity(m);
    let mut point = None;
    for i in 0..m {
        let mut dir = vec![0.0; m];
        dir[i] = 1.0;
        let out = chart.map.eval(&seed_coords(coords, &dir))?;
        let (rest, deriv) = split_derivative(&out);
        if point.is_none() {
            point = Some(AmbientVector::from_components(rest));
        }
        tangents.push(AmbientVector::from_components(deriv));
    }
    let point = point.expect("chart has at least one coordinate");

    let gram = JetMatrix::from_fn(m, m, |i, j| g_dot(&tangents[i], &tangents[j]));

    // Kernel structure is checked on the value parts.
    let (eig_signed, eig_vectors) = sym_eigen_ascending(&gram.value_matrix());
    let mut by_magnitude: Vec<usize> = (0..m).collect();
    by_magnitude.sort_by(|&i, &j| eig_signed[i].abs().total_cmp(&eig_signed[j].abs()));
    let magnitudes: Vec<f64> = by_magnitude.iter().map(|&i| eig_signed[i].abs()).collect();
    let largest = magnitudes[m - 1].max(f64::MIN_POSITIVE);
    if magnitudes[0] > tols.degenerate_ratio * largest
        || magnitudes[1] < tols.separation_ratio * largest
    {
        return Err(FrameError::ChartDegeneracy {
            eigenvalues: magnitudes,
        });
    }
    let kernel_unit = &eig_vectors[by_magnitude[0]];
    let kernel_tcoeff = kernel_unit[0];
    if kernel_tcoeff.abs() < tols.transversality {
        return Err(FrameError::ChartAdaptation {
            tcoeff: kernel_tcoeff,
        });
    }

    // Radical direction and its chart-frame coefficients.
    let (xi, xi_chart) = match &chart.xi_override {
        None => {
            // Kernel vector scaled to unit t-coefficient: the screen block of
            // the Gram is positive definite, so the kernel condition reduces
            // to G_ss k_s = -G_st, which stays exact on jets.
            let n = m - 1;
            let screen_gram = JetMatrix::from_fn(n, n, |a, b| gram.get(a + 1, b + 1));
            let rhs: Vec<DiffScalar> = (0..n).map(|a| -gram.get(a + 1, 0)).collect();
            let k_s = lu_solve(&screen_gram, &rhs)
                .map_err(|LinalgError::Singular| FrameError::FrameDegeneracy)?;
            let mut k = Vec::with_capacity(m);
            k.push(DiffScalar::c(1.0, depth));
            k.extend(k_s);
            let mut xi = AmbientVector::zero(chart.ambient_dim(), depth);
            for (c, t) in k.iter().zip(&tangents) {
                xi = xi.scaled_add(*c, t);
            }
            (xi, k)
        }
        Some(field) => {
            let xi = AmbientVector::from_components(field.eval(coords)?);
            // Chart-frame coefficients by Euclidean least squares; the
            // residual doubles as a tangency check for the override.
            let t_gram = JetMatrix::from_fn(m, m, |i, j| {
                let a = &tangents[i];
                let b = &tangents[j];
                let mut acc = a.get(0) * b.get(0);
                for k in 1..a.dim() {
                    acc = acc + a.get(k) * b.get(k);
                }
                acc
            });
            let rhs: Vec<DiffScalar> = (0..m)
                .map(|i| {
                    let t = &tangents[i];
                    let mut acc = t.get(0) * xi.get(0);
                    for k in 1..t.dim() {
                        acc = acc + t.get(k) * xi.get(k);
                    }
                    acc
                })
                .collect();
            let k = lu_solve(&t_gram, &rhs)
                .map_err(|LinalgError::Singular| FrameError::FrameDegeneracy)?;
            let mut recon = AmbientVector::zero(chart.ambient_dim(), depth);
            for (c, t) in k.iter().zip(&tangents) {
                recon = recon.scaled_add(*c, t);
            }
            let residual =
                recon.sub(&xi).euclid_norm_sq().sqrt() / xi.euclid_norm_sq().sqrt().max(1.0);
            if residual > tols.override_tangency {
                return Err(FrameError::OverrideNotTangent { residual });
            }
            (xi, k)
        }
    };

    // Transversal: minimum-norm z with g(z, W_a) = 0, g(z, xi) = 1, then
    // N = z - (g(z, z)/2) xi.  The correction removes the xi-ambiguity of z.
    let n = m - 1;
    let dim = chart.ambient_dim();
    let mut system = JetMatrix::zeros(n + 1, dim, depth);
    for (a, w) in tangents[1..].iter().enumerate() {
        system.set(a, 0, -w.get(0));
        for k in 1..dim {
            system.set(a, k, w.get(k));
        }
    }
    system.set(n, 0, -xi.get(0));
    for k in 1..dim {
        system.set(n, k, xi.get(k));
    }
    let mut rhs = vec![DiffScalar::c(0.0, depth); n + 1];
    rhs[n] = DiffScalar::c(1.0, depth);
    let z = min_norm_solve(&system, &rhs)
        .map_err(|LinalgError::Singular| FrameError::FrameDegeneracy)?;
    let z = AmbientVector::from_components(z);
    let zz = g_dot(&z, &z);
    let transversal = z.scaled_add(zz * (-0.5), &xi);

    Ok(FrameData {
        point,
        tangents,
        gram,
        xi,
        xi_chart,
        transversal,
        gram_eigenvalues: magnitudes,
        kernel_tcoeff,
    })
}

/// Depth-0 frame at a plain coordinate point.
pub fn frame_at_point(
    chart: &NullChart,
    p: &[f64],
    tols: &FrameTolerances,
) -> Result<FrameData, FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    frame_at(chart, &coords, tols)
}

/// Coordinate tangent frame at a point.
pub fn tangent_frame(chart: &NullChart, p: &[f64]) -> Result<Vec<AmbientVector>, FrameError> {
    Ok(frame_at_point(chart, p, &FrameTolerances::default())?
        .tangents
        .to_vec())
}

/// Induced Gram matrix (value parts) at a point.
pub fn induced_gram(chart: &NullChart, p: &[f64]) -> Result<Vec<Vec<f64>>, FrameError> {
    Ok(frame_at_point(chart, p, &FrameTolerances::default())?.gram_values())
}

/// Radical direction at a point.
pub fn radical_direction(chart: &NullChart, p: &[f64]) -> Result<AmbientVector, FrameError> {
    Ok(frame_at_point(chart, p, &FrameTolerances::default())?
        .xi
        .clone())
}

/// Canonical null transversal at a point.
pub fn transversal(chart: &NullChart, p: &[f64]) -> Result<AmbientVector, FrameError> {
    Ok(frame_at_point(chart, p, &FrameTolerances::default())?
        .transversal
        .clone())
}

/// Worst-case residual of one frame invariant over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantResidual {
    pub name: String,
    pub residual: f64,
}

/// Result of replaying the frame axioms over a sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub points_checked: usize,
    pub invariants: Vec<InvariantResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Check the frame axioms (`g(xi, T_i) = 0`, `g(N, N) = 0`, `g(N, xi) = 1`,
/// `g(N, W_a) = 0`) at every grid point.
pub fn validate_chart(
    chart: &NullChart,
    grid: &GridSpec,
    tols: &FrameTolerances,
    tolerance: f64,
) -> Result<ValidityReport, FrameError> {
    let points = grid.points(&chart.domain)?;
    let names = [
        "g(xi,xi)",
        "g(xi,T_i) max",
        "g(N,N)",
        "g(N,xi)-1",
        "g(N,W_a) max",
    ];
    let mut worst = [0.0_f64; 5];
    for p in &points {
        let frame = frame_at_point(chart, p, tols)?;
        let xi = frame.xi();
        let nv = frame.transversal();
        let mut update = |slot: usize, value: f64| {
            worst[slot] = worst[slot].max(value.abs());
        };
        update(0, g_dot(xi, xi).value());
        for t in frame.tangents() {
            update(1, g_dot(xi, t).value());
        }
        update(2, g_dot(nv, nv).value());
        update(3, g_dot(nv, xi).value() - 1.0);
        for w in frame.screen() {
            update(4, g_dot(nv, w).value());
        }
    }
    let invariants: Vec<InvariantResidual> = names
        .iter()
        .zip(worst)
        .map(|(&name, residual)| InvariantResidual {
            name: name.to_string(),
            residual,
        })
        .collect();
    let max_residual = worst.iter().cloned().fold(0.0, f64::max);
    Ok(ValidityReport {
        points_checked: points.len(),
        invariants,
        max_residual,
        tolerance,
        passed: max_residual <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::FieldHandle;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Future null cone chart in R^4 with the position field as radical.
    fn cone_chart() -> NullChart {
        let map = FieldHandle::new(3, 4, |x| {
            let (u, th, ph) = (x[0], x[1], x[2]);
            vec![
                u,
                u * th.sin() * ph.cos(),
                u * th.sin() * ph.sin(),
                u * th.cos(),
            ]
        });
        let xi = FieldHandle::new(3, 4, |x| {
            let (u, th, ph) = (x[0], x[1], x[2]);
            vec![
                u,
                u * th.sin() * ph.cos(),
                u * th.sin() * ph.sin(),
                u * th.cos(),
            ]
        });
        NullChart::new(
            "cone-test",
            2,
            map,
            DomainBox::new(vec![(0.5, 4.0), (0.2, PI - 0.2), (0.0, 6.0)]).unwrap(),
            Some(xi),
            Some(vec!["u".into(), "theta".into(), "phi".into()]),
        )
        .unwrap()
    }

    fn hyperplane_chart() -> NullChart {
        let map = FieldHandle::new(3, 4, |x| vec![x[0], x[0], x[1], x[2]]);
        NullChart::new(
            "hyperplane-test",
            2,
            map,
            DomainBox::new(vec![(-2.0, 2.0), (-2.0, 2.0), (-2.0, 2.0)]).unwrap(),
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn cone_tangents_and_gram_at_the_reference_point() {
        let chart = cone_chart();
        let p = [2.0, FRAC_PI_2, 0.0];
        let frame = frame_at_point(&chart, &p, &FrameTolerances::default()).unwrap();
        for (got, want) in frame.tangents()[0].values().iter().zip([1.0, 1.0, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let t_theta = frame.tangents()[1].values();
        assert!((t_theta[3] + 2.0).abs() < 1e-14);
        let g = frame.gram_values();
        assert!(g[0][0].abs() < 1e-14);
        assert!((g[1][1] - 4.0).abs() < 1e-14);
        assert!((g[2][2] - 4.0).abs() < 1e-14);
        assert!(g[0][1].abs() < 1e-14);
    }

    #[test]
    fn cone_radical_and_transversal() {
        let chart = cone_chart();
        let p = [2.0, FRAC_PI_2, 0.0];
        let frame = frame_at_point(&chart, &p, &FrameTolerances::default()).unwrap();
        let xi = frame.xi().values();
        assert!((xi[0] - 2.0).abs() < 1e-14 && (xi[1] - 2.0).abs() < 1e-14);
        let n = frame.transversal().values();
        let expected = [-0.25, 0.25, 0.0, 0.0];
        for (got, want) in n.iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "N = {n:?}");
        }
        // Chart coefficients of xi = u * T_u.
        assert!((frame.xi_chart()[0].value() - 2.0).abs() < 1e-12);
        assert!(frame.xi_chart()[1].value().abs() < 1e-12);
    }

    #[test]
    fn cone_without_override_normalizes_the_kernel_vector() {
        let mut chart = cone_chart();
        chart.xi_override = None;
        let p = [2.0, FRAC_PI_2, 0.0];
        let frame = frame_at_point(&chart, &p, &FrameTolerances::default()).unwrap();
        // Kernel vector with unit t-coefficient: xi = T_u = (1, 1, 0, 0).
        let xi = frame.xi().values();
        assert!((xi[0] - 1.0).abs() < 1e-12 && (xi[1] - 1.0).abs() < 1e-12);
        assert!(xi[2].abs() < 1e-12 && xi[3].abs() < 1e-12);
        // Same N axioms; N scales inversely with xi.
        let n = frame.transversal().values();
        for (got, want) in n.iter().zip([-0.5, 0.5, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperplane_frame_is_constant() {
        let chart = hyperplane_chart();
        let frame =
            frame_at_point(&chart, &[0.3, -1.0, 0.7], &FrameTolerances::default()).unwrap();
        assert_eq!(frame.xi().values(), vec![1.0, 1.0, 0.0, 0.0]);
        let n = frame.transversal().values();
        for (got, want) in n.iter().zip([-0.5, 0.5, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn transversal_axioms_everywhere_on_a_grid() {
        let chart = cone_chart();
        let report = validate_chart(
            &chart,
            &GridSpec::uniform(4, 3),
            &FrameTolerances::default(),
            1e-10,
        )
        .unwrap();
        assert_eq!(report.points_checked, 64);
        assert!(report.passed, "worst residuals: {:?}", report.invariants);
    }

    #[test]
    fn transversal_is_invariant_under_solution_shifts() {
        // N itself solves the transversal system; shifting any solution by a
        // multiple of xi and re-correcting must reproduce N exactly.
        let chart = cone_chart();
        let frame =
            frame_at_point(&chart, &[2.0, FRAC_PI_2, 0.0], &FrameTolerances::default()).unwrap();
        let xi = frame.xi();
        let z = frame.transversal().scaled_add(DiffScalar::c(3.7, 0), xi);
        let zz = g_dot(&z, &z);
        let n_again = z.scaled_add(zz * (-0.5), xi);
        for (a, b) in n_again.values().iter().zip(frame.transversal().values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_the_radical_rescales_the_transversal_inversely() {
        let chart = cone_chart();
        let scaled_xi = FieldHandle::new(3, 4, |x| {
            let (u, th, ph) = (x[0], x[1], x[2]);
            vec![
                u * 2.0,
                2.0 * u * th.sin() * ph.cos(),
                2.0 * u * th.sin() * ph.sin(),
                2.0 * u * th.cos(),
            ]
        });
        let chart2 = NullChart::new(
            "cone-scaled",
            2,
            chart.map.clone(),
            chart.domain.clone(),
            Some(scaled_xi),
            None,
        )
        .unwrap();
        let p = [2.0, FRAC_PI_2, 0.0];
        let f1 = frame_at_point(&chart, &p, &FrameTolerances::default()).unwrap();
        let f2 = frame_at_point(&chart2, &p, &FrameTolerances::default()).unwrap();
        for (a, b) in f2
            .transversal()
            .values()
            .iter()
            .zip(f1.transversal().values())
        {
            assert!((a - b / 2.0).abs() < 1e-12);
        }
        assert!((g_dot(f2.xi(), f2.transversal()).value() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spacelike_chart_is_rejected_as_degenerate() {
        let map = FieldHandle::new(3, 4, |x| {
            vec![DiffScalar::c(0.0, x[0].depth()), x[0], x[1], x[2]]
        });
        let chart = NullChart::new(
            "spacelike",
            2,
            map,
            DomainBox::new(vec![(-1.0, 1.0); 3]).unwrap(),
            None,
            None,
        )
        .unwrap();
        match frame_at_point(&chart, &[0.1, 0.2, 0.3], &FrameTolerances::default()) {
            Err(FrameError::ChartDegeneracy { eigenvalues }) => {
                assert!(eigenvalues[0] > 0.5);
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn two_dimensional_kernel_is_rejected() {
        let map = FieldHandle::new(3, 4, |x| {
            vec![x[0], x[0], x[1], DiffScalar::c(0.0, x[0].depth())]
        });
        let chart = NullChart::new(
            "rank-deficient",
            2,
            map,
            DomainBox::new(vec![(-1.0, 1.0); 3]).unwrap(),
            None,
            None,
        )
        .unwrap();
        assert!(matches!(
            frame_at_point(&chart, &[0.1, 0.2, 0.3], &FrameTolerances::default()),
            Err(FrameError::ChartDegeneracy { .. })
        ));
    }

    #[test]
    fn kernel_along_screen_is_a_chart_adaptation_error() {
        // Radical along s1: t-lines are spacelike, s1-lines are null.
        let map = FieldHandle::new(3, 4, |x| vec![x[1], x[1], x[0], x[2]]);
        let chart = NullChart::new(
            "unadapted",
            2,
            map,
            DomainBox::new(vec![(-1.0, 1.0); 3]).unwrap(),
            None,
            None,
        )
        .unwrap();
        assert!(matches!(
            frame_at_point(&chart, &[0.1, 0.2, 0.3], &FrameTolerances::default()),
            Err(FrameError::ChartAdaptation { .. })
        ));
    }

    #[test]
    fn non_tangent_override_is_rejected() {
        let chart = cone_chart();
        let bogus = FieldHandle::new(3, 4, |x| {
            let d = x[0].depth();
            vec![
                DiffScalar::c(1.0, d),
                DiffScalar::c(0.0, d),
                DiffScalar::c(0.0, d),
                DiffScalar::c(0.0, d),
            ]
        });
        let chart2 = NullChart::new(
            "cone-bogus-xi",
            2,
            chart.map.clone(),
            chart.domain.clone(),
            Some(bogus),
            None,
        )
        .unwrap();
        assert!(matches!(
            frame_at_point(&chart2, &[2.0, FRAC_PI_2, 0.0], &FrameTolerances::default()),
            Err(FrameError::OverrideNotTangent { .. })
        ));
    }

    #[test]
    fn points_outside_the_domain_are_rejected() {
        let chart = cone_chart();
        assert!(matches!(
            frame_at_point(&chart, &[0.1, FRAC_PI_2, 0.0], &FrameTolerances::default()),
            Err(FrameError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn grids_sample_midpoints_and_respect_ranges() {
        let chart = cone_chart();
        let grid = GridSpec::new(vec![1, 2, 1]);
        let pts = grid.points(chart.domain()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!((pts[0][0] - 2.25).abs() < 1e-12);
        let bad = GridSpec::uniform(2, 3).with_ranges(vec![(0.0, 5.0), (0.3, 1.0), (0.0, 1.0)]);
        assert!(bad.points(chart.domain()).is_err());
    }
}
