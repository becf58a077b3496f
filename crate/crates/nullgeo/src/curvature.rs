//! Normal connection and curvature of the screen leaves.
//!
//! A leaf of the screen foliation (a slice `t = const` of the chart) is a
//! spacelike codimension-two submanifold whose normal bundle is spanned by
//! `(xi, N)`.  Its normal connection is the projection
//!
//! `nabla^perp_X V = g(D_X V, N) xi + g(D_X V, xi) N`,
//!
//! acting on sections `V = a(p) xi + b(p) N`.  In the frame `(xi, N)` the
//! connection is `diag(-tau, tau)`, so its curvature is controlled by the
//! exterior derivative of `tau`.  This module computes:
//!
//! * `d tau` on coordinate pairs,
//! * the normal curvature `R(W_i, W_j)V` along two independent routes —
//!   algebraically from the form tables via the Ricci-type identity
//!   `R(X, Y)V = II(X, A_V Y) - II(Y, A_V X)`, and directly by applying the
//!   connection twice — plus the closed form `2 dtau(X, Y)(b N - a xi)`,
//! * the covariant derivative of the curvature operator along a leaf,
//! * the shape kernel `{V : A_V = 0}` and the first normal space
//!   `span II`, with `g`-orthogonal complements in the normal plane.
//!
//! Coefficient pairs `(a, b)` always refer to the frame `(xi, N)`, where the
//! plane metric is `g((a, b), (a', b')) = a b' + a' b`.

use nalgebra::DMatrix;

use crate::forms::{forms_at, FormJet};
use crate::jetcalc::{seed_coords, split_derivative, DiffScalar};
use crate::linalg::{nullspace_2, rowspace_2};
use crate::minkowski::{g_dot, AmbientVector};
use crate::nullframe::{frame_at, FrameData, FrameError, FrameTolerances, NullChart};

/// Coefficient functions of a normal section over `(xi, N)`, evaluated on
/// (possibly lifted) chart coordinates.
pub type SectionFn<'a> = dyn Fn(&[DiffScalar]) -> Result<(DiffScalar, DiffScalar), FrameError> + 'a;

/// Section with constant coefficients.
pub fn constant_section(a: f64, b: f64) -> impl Fn(&[DiffScalar]) -> Result<(DiffScalar, DiffScalar), FrameError>
{
    move |coords: &[DiffScalar]| {
        let depth = coords.first().map_or(0, |c| c.depth());
        Ok((DiffScalar::c(a, depth), DiffScalar::c(b, depth)))
    }
}

fn split_vector(v: &AmbientVector) -> AmbientVector {
    let (_, deriv) = split_derivative(v.components());
    AmbientVector::from_components(deriv)
}

/// Coefficients over `(xi, N)` of `nabla^perp_{T_dir} V`.
///
/// `dir` is a chart coordinate index; `base` must be the frame at `coords`.
/// Works at any depth with two free nesting levels.
pub fn normal_cov_derivative(
    chart: &NullChart,
    coords: &[DiffScalar],
    base: &FrameData,
    dir: usize,
    section: &SectionFn,
    tols: &FrameTolerances,
) -> Result<(DiffScalar, DiffScalar), FrameError> {
    let m = chart.coord_dim();
    let mut e = vec![0.0; m];
    e[dir] = 1.0;
    let up_coords = seed_coords(coords, &e);
    let up = frame_at(chart, &up_coords, tols)?;
    let (a, b) = section(&up_coords)?;
    let v = up.xi().scale(a).scaled_add(b, up.transversal());
    let dv = split_vector(&v);
    Ok((g_dot(&dv, base.transversal()), g_dot(&dv, base.xi())))
}

/// Forms plus the first derivatives of `tau` at one point.
pub struct CurvatureSample {
    point: Vec<f64>,
    form: FormJet,
    d_tau: Vec<Vec<f64>>,
}

/// Compute the curvature sample at a plain coordinate point.
pub fn curvature_at(
    chart: &NullChart,
    p: &[f64],
    tols: &FrameTolerances,
) -> Result<CurvatureSample, FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    let form = forms_at(chart, &coords, tols)?;
    let m = chart.coord_dim();
    let mut d_tau = vec![vec![0.0; m]; m];
    for (i, row) in d_tau.iter_mut().enumerate() {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        let up = forms_at(chart, &seed_coords(&coords, &e), tols)?;
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = up.tau(j).extract().1.value();
        }
    }
    Ok(CurvatureSample { point: p.to_vec(), form, d_tau })
}

impl CurvatureSample {
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn form(&self) -> &FormJet {
        &self.form
    }

    /// `d tau (T_i, T_j)` for coordinate fields (which commute).
    pub fn dtau(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.d_tau[i][j] - self.d_tau[j][i])
    }

    /// Largest `|2 dtau|` over screen pairs: the flatness residual of the
    /// normal connection.
    pub fn dtau_screen_max(&self) -> f64 {
        let n = self.form.screen_dim();
        let mut worst = 0.0_f64;
        for a in 1..=n {
            for b in (a + 1)..=n {
                worst = worst.max((2.0 * self.dtau(a, b)).abs());
            }
        }
        worst
    }

    /// Value-level norm of the commutator `[A*, A_N]` on the screen.
    pub fn commutator_residual(&self) -> f64 {
        let s = self.form.a_star_screen_block();
        let t = self.form.a_n_screen_block();
        let st = s.mul(&t);
        let ts = t.mul(&s);
        let n = self.form.screen_dim();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                worst = worst.max((st.get(r, c).value() - ts.get(r, c).value()).abs());
            }
        }
        worst
    }
}

/// Coefficients over `(xi, N)` of `R(W_i, W_j) V` from the form tables.
///
/// `i`, `j` are screen indices; `(a, b)` are the section coefficients at the
/// point.  Uses `R(X, Y)V = II(X, A_V Y) - II(Y, A_V X)` with
/// `II(W_a, W_b) = C(W_a, W_b) xi + B(W_a, W_b) N`.
pub fn normal_curvature_algebraic(
    form: &FormJet,
    i: usize,
    j: usize,
    a: DiffScalar,
    b: DiffScalar,
) -> (DiffScalar, DiffScalar) {
    let n = form.screen_dim();
    let s = form.a_star_screen_block();
    let t = form.a_n_screen_block();
    let c = form.c_screen_block();
    let bm = form.b_screen_block();
    let depth = form.depth();
    let mut xi_coeff = DiffScalar::c(0.0, depth);
    let mut n_coeff = DiffScalar::c(0.0, depth);
    for r in 0..n {
        let av_j = a * s.get(r, j) + b * t.get(r, j);
        let av_i = a * s.get(r, i) + b * t.get(r, i);
        xi_coeff = xi_coeff + av_j * c.get(i, r) - av_i * c.get(j, r);
        n_coeff = n_coeff + av_j * bm.get(i, r) - av_i * bm.get(j, r);
    }
    (xi_coeff, n_coeff)
}

/// Same coefficients by applying the normal connection twice.
///
/// `i`, `j` are screen indices.  This route shares no algebra with the
/// table-based one: it differentiates the frame fields directly.
pub fn normal_curvature_direct(
    chart: &NullChart,
    p: &[f64],
    i: usize,
    j: usize,
    section: &SectionFn,
    tols: &FrameTolerances,
) -> Result<(f64, f64), FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    let base = frame_at(chart, &coords, tols)?;
    let m = chart.coord_dim();
    let one_way = |outer: usize, inner: usize| -> Result<(f64, f64), FrameError> {
        let mut e = vec![0.0; m];
        e[outer] = 1.0;
        let up_coords = seed_coords(&coords, &e);
        let up_frame = frame_at(chart, &up_coords, tols)?;
        let (alpha, beta) =
            normal_cov_derivative(chart, &up_coords, &up_frame, inner, section, tols)?;
        let u_field = up_frame.xi().scale(alpha).scaled_add(beta, up_frame.transversal());
        let du = split_vector(&u_field);
        Ok((
            g_dot(&du, base.transversal()).value(),
            g_dot(&du, base.xi()).value(),
        ))
    };
    let (a1, b1) = one_way(i + 1, j + 1)?;
    let (a2, b2) = one_way(j + 1, i + 1)?;
    Ok((a1 - a2, b1 - b2))
}

/// Largest algebraic curvature coefficient over screen pairs and the frame
/// sections `xi`, `N` (which span all sections by linearity).
pub fn curvature_zero_residual(form: &FormJet) -> f64 {
    let n = form.screen_dim();
    let depth = form.depth();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
                let (x, y) = normal_curvature_algebraic(
                    form,
                    i,
                    j,
                    DiffScalar::c(a, depth),
                    DiffScalar::c(b, depth),
                );
                worst = worst.max(x.value().abs()).max(y.value().abs());
            }
        }
    }
    worst
}

/// Residuals of the closed-form curvature expression
/// `R(W_i, W_j)V = 2 dtau(W_i, W_j) (b N - a xi)` against both routes.
#[derive(Debug, Clone)]
pub struct PropositionResiduals {
    /// Algebraic route vs the `dtau` closed form.
    pub algebraic_vs_formula: f64,
    /// Direct double-connection route vs the algebraic route.
    pub direct_vs_algebraic: f64,
}

impl PropositionResiduals {
    pub fn max(&self) -> f64 {
        self.algebraic_vs_formula.max(self.direct_vs_algebraic)
    }
}

/// Check the curvature Proposition at one point, screen pair and section.
pub fn proposition_residuals(
    chart: &NullChart,
    sample: &CurvatureSample,
    i: usize,
    j: usize,
    a: f64,
    b: f64,
    tols: &FrameTolerances,
) -> Result<PropositionResiduals, FrameError> {
    let form = sample.form();
    let (xi_c, n_c) =
        normal_curvature_algebraic(form, i, j, DiffScalar::c(a, 0), DiffScalar::c(b, 0));
    let two_dtau = 2.0 * sample.dtau(i + 1, j + 1);
    let algebraic_vs_formula = (xi_c.value() - (-a) * two_dtau)
        .abs()
        .max((n_c.value() - b * two_dtau).abs());
    let section = constant_section(a, b);
    let (dx, dn) = normal_curvature_direct(chart, sample.point(), i, j, &section, tols)?;
    let direct_vs_algebraic = (dx - xi_c.value()).abs().max((dn - n_c.value()).abs());
    Ok(PropositionResiduals {
        algebraic_vs_formula,
        direct_vs_algebraic,
    })
}

/// Coefficients of `(nabla^perp_{T_z} R)(W_i, W_j) V` at `p`.
///
/// The curvature is treated as an operator field on the normal bundle with
/// the coordinate directions held fixed: the derivative is
/// `nabla^perp_z [R(W_i, W_j)V] - R(W_i, W_j)(nabla^perp_z V)`, with the
/// algebraic route supplying the curvature field.  `z` is a coordinate
/// index, `i`, `j` are screen indices.
pub fn covariant_derivative_rperp(
    chart: &NullChart,
    p: &[f64],
    z: usize,
    i: usize,
    j: usize,
    section: &SectionFn,
    tols: &FrameTolerances,
) -> Result<(f64, f64), FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    let base = frame_at(chart, &coords, tols)?;
    let r_field = |q: &[DiffScalar]| -> Result<(DiffScalar, DiffScalar), FrameError> {
        let f = forms_at(chart, q, tols)?;
        let (a, b) = section(q)?;
        Ok(normal_curvature_algebraic(&f, i, j, a, b))
    };
    let term1 = normal_cov_derivative(chart, &coords, &base, z, &r_field, tols)?;
    let (da, db) = normal_cov_derivative(chart, &coords, &base, z, section, tols)?;
    let f0 = forms_at(chart, &coords, tols)?;
    let term2 = normal_curvature_algebraic(&f0, i, j, da, db);
    Ok((
        term1.0.value() - term2.0.value(),
        term1.1.value() - term2.1.value(),
    ))
}

/// Pointwise kernel of `V -> A_V`: coefficient pairs with
/// `a A* + b A_N = 0` on the screen.  Returns `(dimension, basis)`.
pub fn kernel_subbundle(form: &FormJet, rel_tol: f64) -> (usize, Vec<[f64; 2]>) {
    let n = form.screen_dim();
    let s = form.a_star_screen_block();
    let t = form.a_n_screen_block();
    let stacked = DMatrix::from_fn(n * n, 2, |row, col| {
        let (r, c) = (row / n, row % n);
        if col == 0 {
            s.get(r, c).value()
        } else {
            t.get(r, c).value()
        }
    });
    let basis = nullspace_2(&stacked, rel_tol);
    (basis.len(), basis)
}

/// First normal space of the leaf: the span of the second fundamental form
/// values `(C_ab, B_ab)` in the `(xi, N)` coefficient plane.
pub fn first_normal_space(form: &FormJet, rel_tol: f64) -> (usize, Vec<[f64; 2]>) {
    let n = form.screen_dim();
    let c = form.c_screen_block();
    let bm = form.b_screen_block();
    let stacked = DMatrix::from_fn(n * n, 2, |row, col| {
        let (r, q) = (row / n, row % n);
        if col == 0 {
            c.get(r, q).value()
        } else {
            bm.get(r, q).value()
        }
    });
    let basis = rowspace_2(&stacked, rel_tol);
    (basis.len(), basis)
}

/// `g`-orthogonal complement of a subspace of the normal plane.
///
/// In coefficients, `g((a, b), (a', b')) = a b' + a' b`, so the complement
/// of `span{(a, b)}` is `span{(a, -b)}`; null directions are their own
/// complement.
pub fn normal_complement(dirs: &[[f64; 2]]) -> Vec<[f64; 2]> {
    match dirs.len() {
        0 => vec![[1.0, 0.0], [0.0, 1.0]],
        1 => {
            let [a, b] = dirs[0];
            let norm = (a * a + b * b).sqrt();
            if norm == 0.0 {
                vec![[1.0, 0.0], [0.0, 1.0]]
            } else {
                vec![[a / norm, -b / norm]]
            }
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_null_cone, make_null_graph, make_null_hyperplane};
    use std::f64::consts::FRAC_PI_2;

    fn tols() -> FrameTolerances {
        FrameTolerances::default()
    }

    #[test]
    fn cone_normal_connection_is_flat() {
        let chart = make_null_cone(2).unwrap();
        for p in [[2.0, FRAC_PI_2, 0.0], [1.3, 0.8, 2.4], [3.6, 2.0, 5.1]] {
            let sample = curvature_at(&chart, &p, &tols()).unwrap();
            assert!(sample.dtau_screen_max() < 1e-10, "dtau at {p:?}");
            assert!(sample.commutator_residual() < 1e-11);
            assert!(curvature_zero_residual(sample.form()) < 1e-11);
        }
    }

    #[test]
    fn cone_direct_curvature_vanishes_for_random_sections() {
        let chart = make_null_cone(2).unwrap();
        let p = [1.7, 1.1, 0.9];
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.73, -1.4), (-2.1, 0.35)] {
            let section = constant_section(a, b);
            let (x, y) = normal_curvature_direct(&chart, &p, 0, 1, &section, &tols()).unwrap();
            assert!(x.abs() < 1e-9 && y.abs() < 1e-9, "R({a},{b}) = ({x},{y})");
        }
    }

    #[test]
    fn cone_canonical_sections_are_parallel_along_leaves() {
        let chart = make_null_cone(2).unwrap();
        let coords: Vec<DiffScalar> = [2.0, FRAC_PI_2, 0.0]
            .iter()
            .map(|&x| DiffScalar::c(x, 0))
            .collect();
        let base = frame_at(&chart, &coords, &tols()).unwrap();
        // V = -(1/(2u)) xi - u N and its reflection, as coefficient fields.
        let v1 = |q: &[DiffScalar]| {
            let u = q[0];
            Ok((-(u * 2.0).recip(), -u))
        };
        let v2 = |q: &[DiffScalar]| {
            let u = q[0];
            Ok((-(u * 2.0).recip(), u))
        };
        for dir in [1, 2] {
            let (a1, b1) =
                normal_cov_derivative(&chart, &coords, &base, dir, &v1, &tols()).unwrap();
            let (a2, b2) =
                normal_cov_derivative(&chart, &coords, &base, dir, &v2, &tols()).unwrap();
            assert!(a1.value().abs() < 1e-11 && b1.value().abs() < 1e-11);
            assert!(a2.value().abs() < 1e-11 && b2.value().abs() < 1e-11);
        }
    }

    #[test]
    fn graph_chart_is_not_flat_but_satisfies_the_proposition() {
        let chart = make_null_graph().unwrap();
        let p = [0.1, 0.5, 0.7];
        let sample = curvature_at(&chart, &p, &tols()).unwrap();
        // Non-degenerate negative instance: all flatness residuals are
        // bounded away from zero.
        assert!(
            sample.dtau_screen_max() > 1e-4,
            "twist too weak: {}",
            sample.dtau_screen_max()
        );
        assert!(sample.commutator_residual() > 1e-6);
        assert!(curvature_zero_residual(sample.form()) > 1e-6);
        // The closed form and both computed routes still agree.
        for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.6, -1.2)] {
            let res = proposition_residuals(&chart, &sample, 0, 1, a, b, &tols()).unwrap();
            assert!(res.max() < 1e-8, "(a,b)=({a},{b}): {res:?}");
        }
    }

    #[test]
    fn curvature_derivative_vanishes_on_the_cone_and_is_linear() {
        let cone = make_null_cone(2).unwrap();
        let p = [2.0, 1.2, 0.4];
        for z in 0..3 {
            let section = constant_section(0.8, -0.3);
            let (x, y) =
                covariant_derivative_rperp(&cone, &p, z, 0, 1, &section, &tols()).unwrap();
            assert!(x.abs() < 1e-8 && y.abs() < 1e-8, "z={z}: ({x},{y})");
        }
        // Linearity in the section on a non-flat chart.
        let twisted = make_null_graph().unwrap();
        let q = [0.1, 0.5, 0.7];
        let one = constant_section(0.4, 0.9);
        let two = constant_section(0.8, 1.8);
        let (x1, y1) = covariant_derivative_rperp(&twisted, &q, 1, 0, 1, &one, &tols()).unwrap();
        let (x2, y2) = covariant_derivative_rperp(&twisted, &q, 1, 0, 1, &two, &tols()).unwrap();
        assert!((x2 - 2.0 * x1).abs() < 1e-9 * x1.abs().max(1.0));
        assert!((y2 - 2.0 * y1).abs() < 1e-9 * y1.abs().max(1.0));
    }

    #[test]
    fn cone_shape_kernel_and_first_normal_space() {
        let chart = make_null_cone(2).unwrap();
        let sample = curvature_at(&chart, &[2.0, 1.0, 0.5], &tols()).unwrap();
        let (kdim, kbasis) = kernel_subbundle(sample.form(), 1e-8);
        assert_eq!(kdim, 1);
        // Kernel direction is proportional to (1/(2u^2), -1) at u = 2.
        let [a0, b0] = kbasis[0];
        assert!((a0 / b0 + 0.125).abs() < 1e-9, "kernel ratio {}", a0 / b0);
        let (ndim, nbasis) = first_normal_space(sample.form(), 1e-8);
        assert_eq!(ndim, 1);
        // First normal space is the g-complement of the kernel.
        let comp = normal_complement(&kbasis);
        let cross = comp[0][0] * nbasis[0][1] - comp[0][1] * nbasis[0][0];
        assert!(cross.abs() < 1e-9, "complement {comp:?} vs span {nbasis:?}");
    }

    #[test]
    fn hyperplane_kernel_is_everything_and_ii_spans_nothing() {
        let chart = make_null_hyperplane(2, &[1.0, 0.0, 0.0]).unwrap();
        let sample = curvature_at(&chart, &[0.2, -0.3, 0.9], &tols()).unwrap();
        let (kdim, _) = kernel_subbundle(sample.form(), 1e-8);
        assert_eq!(kdim, 2);
        let (ndim, _) = first_normal_space(sample.form(), 1e-8);
        assert_eq!(ndim, 0);
        assert!(sample.dtau_screen_max() < 1e-12);
    }
}
