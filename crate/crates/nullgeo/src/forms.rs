//! Fundamental forms and shape operators of a null hypersurface.
//!
//! With the adapted frame `(xi, W_1, ..., W_n; N)` of a chart, the flat
//! ambient derivative splits every structural object of the hypersurface:
//!
//! * second fundamental form      `B(X, Y) = g(D_X Y, xi)`,
//! * screen fundamental form      `C(X, W) = g(D_X W, N)`,
//! * transversal one-form         `tau(X) = g(D_X N, xi) = -g(D_X xi, N)`,
//! * radical shape operator       `A* X = -D_X xi - tau(X) xi`,
//! * transversal shape operator   `A_N X = -D_X N + tau(X) N`,
//!
//! where `D` is the ambient derivative and all derivatives are taken along
//! chart coordinate directions.  Both shape operators are screen-valued and
//! satisfy the dualities `g(A* X, Y) = B(X, Y)` and `g(A_N X, W) = C(X, W)`.
//! The two expressions for `tau` come from differentiating `g(N, xi) = 1`
//! and are computed through genuinely different code paths here; their
//! agreement is one of the reported residuals.
//!
//! Everything is produced at an arbitrary jet depth `d` (up to the nesting
//! budget), so downstream modules can differentiate the forms themselves.

use serde::Serialize;

use crate::jetcalc::{seed_coords, split_derivative, DiffScalar, MAX_NEST};
use crate::linalg::JetMatrix;
use crate::minkowski::{g_dot, AmbientVector};
use crate::nullframe::{frame_at, FrameData, FrameError, FrameTolerances, NullChart};

/// Value-level residuals of the structural identities at one point.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FormResiduals {
    /// Max difference between the two routes to `tau`.
    pub tau_consistency: f64,
    /// Max asymmetry of `B` on coordinate pairs.
    pub b_symmetry: f64,
    /// Max asymmetry of `C` on screen pairs (screen integrability).
    pub c_symmetry: f64,
    /// Max of `|B(xi, T_j)|`: the radical must be degenerate for `B`.
    pub b_radical: f64,
    /// Max non-screen component of `A* T_i`.
    pub a_star_screen_valued: f64,
    /// Max non-screen component of `A_N T_i`.
    pub a_n_screen_valued: f64,
    /// Max of `|g(A* T_i, T_j) - B(T_i, T_j)|`.
    pub duality_b: f64,
    /// Max of `|g(A_N T_i, W_b) - C(T_i, W_b)|`.
    pub duality_c: f64,
}

impl FormResiduals {
    /// Largest of all recorded residuals.
    pub fn max(&self) -> f64 {
        [
            self.tau_consistency,
            self.b_symmetry,
            self.c_symmetry,
            self.b_radical,
            self.a_star_screen_valued,
            self.a_n_screen_valued,
            self.duality_b,
            self.duality_c,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Value-level snapshot of all form tables at one point.
#[derive(Debug, Clone, Serialize)]
pub struct FormTables {
    pub point: Vec<f64>,
    pub position: Vec<f64>,
    pub gram: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub xi_chart: Vec<f64>,
    pub transversal: Vec<f64>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub tau: Vec<f64>,
    pub tau_alt: Vec<f64>,
    pub a_star: Vec<Vec<f64>>,
    pub a_n: Vec<Vec<f64>>,
    pub residuals: FormResiduals,
}

/// All fundamental forms of a chart at one (possibly lifted) point.
///
/// Matrix rows and columns are indexed by the coordinate tangents
/// `(T_t, T_{s^1}, ..., T_{s^n})`; screen-only indices drop the first entry.
#[derive(Debug, Clone)]
pub struct FormJet {
    frame: FrameData,
    second: Vec<Vec<AmbientVector>>,
    d_xi: Vec<AmbientVector>,
    d_n: Vec<AmbientVector>,
    d_gram: Vec<JetMatrix>,
    b: JetMatrix,
    c: JetMatrix,
    tau: Vec<DiffScalar>,
    tau_alt: Vec<DiffScalar>,
    a_star_amb: Vec<AmbientVector>,
    a_n_amb: Vec<AmbientVector>,
    a_star_screen: JetMatrix,
    a_n_screen: JetMatrix,
    residuals: FormResiduals,
}

fn split_vector(v: &AmbientVector) -> AmbientVector {
    let (_, deriv) = split_derivative(v.components());
    AmbientVector::from_components(deriv)
}

fn split_matrix(m: &JetMatrix) -> JetMatrix {
    JetMatrix::from_fn(m.rows, m.cols, |r, c| m.get(r, c).extract().1)
}

/// Compute every fundamental form at a lifted coordinate tuple.
///
/// The input depth `d` must leave two nesting levels free: one for the
/// tangent frame and one for the derivatives of the frame fields.
pub fn forms_at(
    chart: &NullChart,
    coords: &[DiffScalar],
    tols: &FrameTolerances,
) -> Result<FormJet, FrameError> {
    let m = chart.coord_dim();
    let n = chart.screen_dim();
    let depth = coords.first().map_or(0, |c| c.depth());
    assert!(
        depth + 2 <= MAX_NEST,
        "form computation needs two free nesting levels (depth {depth})"
    );

    let frame = frame_at(chart, coords, tols)?;

    // Differentiate the entire frame along every coordinate direction by
    // rebuilding it one nesting level up and splitting off the derivative.
    let mut second: Vec<Vec<AmbientVector>> = Vec::with_capacity(m);
    let mut d_xi = Vec::with_capacity(m);
    let mut d_n = Vec::with_capacity(m);
    let mut d_gram = Vec::with_capacity(m);
    for i in 0..m {
        let mut dir = vec![0.0; m];
        dir[i] = 1.0;
        let up = frame_at(chart, &seed_coords(coords, &dir), tols)?;
        second.push(up.tangents().iter().map(split_vector).collect());
        d_xi.push(split_vector(up.xi()));
        d_n.push(split_vector(up.transversal()));
        d_gram.push(split_matrix(up.gram()));
    }

    let xi = frame.xi().clone();
    let nv = frame.transversal().clone();

    let b = JetMatrix::from_fn(m, m, |i, j| g_dot(&second[i][j], &xi));
    let c = JetMatrix::from_fn(m, n, |i, col| g_dot(&second[i][col + 1], &nv));
    let tau: Vec<DiffScalar> = (0..m).map(|i| -g_dot(&d_xi[i], &nv)).collect();
    let tau_alt: Vec<DiffScalar> = (0..m).map(|i| g_dot(&d_n[i], &xi)).collect();

    // Shape operators as ambient vectors, then as screen coefficients.
    let a_star_amb: Vec<AmbientVector> = (0..m)
        .map(|i| d_xi[i].neg().scaled_add(-tau[i], &xi))
        .collect();
    let a_n_amb: Vec<AmbientVector> = (0..m)
        .map(|i| d_n[i].neg().scaled_add(tau_alt[i], &nv))
        .collect();
    let mut a_star_screen = JetMatrix::zeros(n, m, depth);
    let mut a_n_screen = JetMatrix::zeros(n, m, depth);
    for i in 0..m {
        let cs = frame.screen_coefficients(&a_star_amb[i])?;
        for (r, coeff) in cs.into_iter().enumerate() {
            a_star_screen.set(r, i, coeff);
        }
        let cn = frame.screen_coefficients(&a_n_amb[i])?;
        for (r, coeff) in cn.into_iter().enumerate() {
            a_n_screen.set(r, i, coeff);
        }
    }

    // Structural residuals at value level.
    let mut residuals = FormResiduals::default();
    for i in 0..m {
        residuals.tau_consistency = residuals
            .tau_consistency
            .max((tau[i].value() - tau_alt[i].value()).abs());
        for j in 0..m {
            residuals.b_symmetry = residuals
                .b_symmetry
                .max((b.get(i, j).value() - b.get(j, i).value()).abs());
            residuals.duality_b = residuals.duality_b.max(
                (g_dot(&a_star_amb[i], &frame.tangents()[j]).value() - b.get(i, j).value()).abs(),
            );
        }
        let (alpha_s, beta_s) = frame.normal_coefficients(&a_star_amb[i]);
        let (alpha_n, beta_n) = frame.normal_coefficients(&a_n_amb[i]);
        residuals.a_star_screen_valued = residuals
            .a_star_screen_valued
            .max(alpha_s.value().abs())
            .max(beta_s.value().abs());
        residuals.a_n_screen_valued = residuals
            .a_n_screen_valued
            .max(alpha_n.value().abs())
            .max(beta_n.value().abs());
        for col in 0..n {
            residuals.duality_c = residuals.duality_c.max(
                (g_dot(&a_n_amb[i], &frame.tangents()[col + 1]).value() - c.get(i, col).value())
                    .abs(),
            );
        }
    }
    for a in 0..n {
        for bcol in 0..n {
            residuals.c_symmetry = residuals
                .c_symmetry
                .max((c.get(a + 1, bcol).value() - c.get(bcol + 1, a).value()).abs());
        }
    }
    let k = frame.xi_chart();
    for j in 0..m {
        let mut acc = 0.0;
        for (i, kc) in k.iter().enumerate() {
            acc += kc.value() * b.get(i, j).value();
        }
        residuals.b_radical = residuals.b_radical.max(acc.abs());
    }

    Ok(FormJet {
        frame,
        second,
        d_xi,
        d_n,
        d_gram,
        b,
        c,
        tau,
        tau_alt,
        a_star_amb,
        a_n_amb,
        a_star_screen,
        a_n_screen,
        residuals,
    })
}

/// Depth-0 forms at a plain coordinate point.
pub fn forms_at_point(
    chart: &NullChart,
    p: &[f64],
    tols: &FrameTolerances,
) -> Result<FormJet, FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    forms_at(chart, &coords, tols)
}

impl FormJet {
    pub fn frame(&self) -> &FrameData {
        &self.frame
    }

    pub fn depth(&self) -> usize {
        self.frame.depth()
    }

    pub fn screen_dim(&self) -> usize {
        self.frame.screen_dim()
    }

    /// `B(T_i, T_j)`.
    pub fn b(&self, i: usize, j: usize) -> DiffScalar {
        self.b.get(i, j)
    }

    /// `C(T_i, W_b)` with screen index `b` in `0..n`.
    pub fn c(&self, i: usize, b: usize) -> DiffScalar {
        self.c.get(i, b)
    }

    /// `tau(T_i)` via the radical route.
    pub fn tau(&self, i: usize) -> DiffScalar {
        self.tau[i]
    }

    /// `tau(T_i)` via the transversal route.
    pub fn tau_alt(&self, i: usize) -> DiffScalar {
        self.tau_alt[i]
    }

    /// Screen coefficient `r` of `A* T_i`.
    pub fn a_star(&self, r: usize, i: usize) -> DiffScalar {
        self.a_star_screen.get(r, i)
    }

    /// Screen coefficient `r` of `A_N T_i`.
    pub fn a_n(&self, r: usize, i: usize) -> DiffScalar {
        self.a_n_screen.get(r, i)
    }

    /// `A* T_i` as an ambient vector.
    pub fn a_star_ambient(&self, i: usize) -> &AmbientVector {
        &self.a_star_amb[i]
    }

    /// `A_N T_i` as an ambient vector.
    pub fn a_n_ambient(&self, i: usize) -> &AmbientVector {
        &self.a_n_amb[i]
    }

    /// Ambient second partial `F_{ij}`.
    pub(crate) fn second(&self, i: usize, j: usize) -> &AmbientVector {
        &self.second[i][j]
    }

    /// `d/dx^i` of the radical field.
    pub(crate) fn d_xi(&self, i: usize) -> &AmbientVector {
        &self.d_xi[i]
    }

    /// `d/dx^i` of the transversal field.
    pub(crate) fn d_n(&self, i: usize) -> &AmbientVector {
        &self.d_n[i]
    }

    /// `tau` contracted with a chart coefficient vector.
    pub fn tau_of(&self, x: &[DiffScalar]) -> DiffScalar {
        let mut acc = DiffScalar::c(0.0, self.depth());
        for (xi, ti) in x.iter().zip(&self.tau) {
            acc = acc + *xi * *ti;
        }
        acc
    }

    /// `B` contracted with two chart coefficient vectors.
    pub fn b_of(&self, x: &[DiffScalar], y: &[DiffScalar]) -> DiffScalar {
        let mut acc = DiffScalar::c(0.0, self.depth());
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                acc = acc + *xi * *yj * self.b.get(i, j);
            }
        }
        acc
    }

    /// Screen block of `B` (rows/cols over `W_a`).
    pub(crate) fn b_screen_block(&self) -> JetMatrix {
        let n = self.screen_dim();
        JetMatrix::from_fn(n, n, |a, b| self.b.get(a + 1, b + 1))
    }

    /// Screen block of `C`.
    pub(crate) fn c_screen_block(&self) -> JetMatrix {
        let n = self.screen_dim();
        JetMatrix::from_fn(n, n, |a, b| self.c.get(a + 1, b))
    }

    /// Screen block of `A*` (inputs over `W_b`).
    pub(crate) fn a_star_screen_block(&self) -> JetMatrix {
        let n = self.screen_dim();
        JetMatrix::from_fn(n, n, |r, b| self.a_star_screen.get(r, b + 1))
    }

    /// Screen block of `A_N`.
    pub(crate) fn a_n_screen_block(&self) -> JetMatrix {
        let n = self.screen_dim();
        JetMatrix::from_fn(n, n, |r, b| self.a_n_screen.get(r, b + 1))
    }

    /// Trace of `A*` over the screen.
    pub fn trace_a_star(&self) -> DiffScalar {
        let n = self.screen_dim();
        let mut acc = DiffScalar::c(0.0, self.depth());
        for r in 0..n {
            acc = acc + self.a_star_screen.get(r, r + 1);
        }
        acc
    }

    /// Trace of `A_N` over the screen.
    pub fn trace_a_n(&self) -> DiffScalar {
        let n = self.screen_dim();
        let mut acc = DiffScalar::c(0.0, self.depth());
        for r in 0..n {
            acc = acc + self.a_n_screen.get(r, r + 1);
        }
        acc
    }

    /// Diagnostic residuals of the structural identities.
    pub fn residuals(&self) -> &FormResiduals {
        &self.residuals
    }

    /// Value-level snapshot for reporting.
    pub fn snapshot(&self, point: &[f64]) -> FormTables {
        let m = self.frame.tangents().len();
        let n = self.screen_dim();
        FormTables {
            point: point.to_vec(),
            position: self.frame.point().values(),
            gram: self.frame.gram_values(),
            xi: self.frame.xi().values(),
            xi_chart: self.frame.xi_chart().iter().map(|c| c.value()).collect(),
            transversal: self.frame.transversal().values(),
            b: (0..m)
                .map(|i| (0..m).map(|j| self.b.get(i, j).value()).collect())
                .collect(),
            c: (0..m)
                .map(|i| (0..n).map(|b| self.c.get(i, b).value()).collect())
                .collect(),
            tau: self.tau.iter().map(|t| t.value()).collect(),
            tau_alt: self.tau_alt.iter().map(|t| t.value()).collect(),
            a_star: (0..n)
                .map(|r| (0..m).map(|i| self.a_star_screen.get(r, i).value()).collect())
                .collect(),
            a_n: (0..n)
                .map(|r| (0..m).map(|i| self.a_n_screen.get(r, i).value()).collect())
                .collect(),
            residuals: self.residuals.clone(),
        }
    }
}

/// Worst-case Gauss and Weingarten replay residuals at one point.
///
/// Each Weingarten equation is checked with the `tau` computed through the
/// *other* route, so these residuals also witness route consistency.
#[derive(Debug, Clone, Serialize)]
pub struct GaussWeingartenResiduals {
    /// `D_{T_i} T_j` vs screen part + `C`-type `xi` part + `B N`.
    pub gauss: f64,
    /// `D_{T_i} N` vs `-A_N T_i + tau(T_i) N`.
    pub weingarten_transversal: f64,
    /// `D_{T_i} xi` vs `-A* T_i - tau(T_i) xi`.
    pub weingarten_radical: f64,
    /// Two-route agreement for `tau`.
    pub tau_consistency: f64,
}

impl GaussWeingartenResiduals {
    pub fn max(&self) -> f64 {
        self.gauss
            .max(self.weingarten_transversal)
            .max(self.weingarten_radical)
            .max(self.tau_consistency)
    }
}

/// Replay the Gauss and Weingarten equations from the computed tables.
pub fn gauss_weingarten_residuals(
    form: &FormJet,
) -> Result<GaussWeingartenResiduals, FrameError> {
    let frame = &form.frame;
    let m = frame.tangents().len();
    let xi = frame.xi();
    let nv = frame.transversal();
    let mut gauss = 0.0_f64;
    let mut wn = 0.0_f64;
    let mut wxi = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            // Gauss: the ambient second derivative must decompose exactly
            // over (screen, xi, N) with B as the N-coefficient.
            let f_ij = form.second(i, j);
            let screen = frame.screen_vector(&frame.screen_coefficients(f_ij)?);
            let (alpha, beta) = frame.normal_coefficients(f_ij);
            let recon = screen.scaled_add(alpha, xi).scaled_add(beta, nv);
            gauss = gauss.max(recon.sub(f_ij).inf_norm());
            let b_res = (beta.value() - form.b(i, j).value()).abs();
            gauss = gauss.max(b_res);
        }
        // Weingarten for N, using the radical-route tau.
        let wn_res = form
            .d_n(i)
            .add(form.a_n_ambient(i))
            .scaled_add(-form.tau(i), nv)
            .inf_norm();
        wn = wn.max(wn_res);
        // Weingarten for xi, using the transversal-route tau.
        let wxi_res = form
            .d_xi(i)
            .add(form.a_star_ambient(i))
            .scaled_add(form.tau_alt(i), xi)
            .inf_norm();
        wxi = wxi.max(wxi_res);
    }
    Ok(GaussWeingartenResiduals {
        gauss,
        weingarten_transversal: wn,
        weingarten_radical: wxi,
        tau_consistency: form.residuals.tau_consistency,
    })
}

/// Residual of decomposing `v` against a *custom* transversal.
///
/// With the true `N` the decomposition `v = screen + g(v, N) xi + g(v, xi) N`
/// is exact; substituting a vector that violates the transversal axioms
/// leaves a residual of the order of the violation.  Used to show the
/// replay actually detects broken frames.
pub fn decomposition_residual_with(
    frame: &FrameData,
    v: &AmbientVector,
    n_custom: &AmbientVector,
) -> Result<f64, FrameError> {
    let screen = frame.screen_vector(&frame.screen_coefficients(v)?);
    let alpha = g_dot(v, n_custom);
    let beta = g_dot(v, frame.xi());
    let recon = screen
        .scaled_add(alpha, frame.xi())
        .scaled_add(beta, n_custom);
    Ok(recon.sub(v).inf_norm())
}

/// Non-metricity replay: `(nabla_{T_i} g)(T_j, T_k)` must equal
/// `B(T_i, T_j) eta(T_k) + B(T_i, T_k) eta(T_j)` with `eta = g(N, .)`.
pub fn non_metricity_residual(form: &FormJet) -> f64 {
    let frame = &form.frame;
    let m = frame.tangents().len();
    let nv = frame.transversal();
    let eta: Vec<f64> = (0..m)
        .map(|j| g_dot(nv, &frame.tangents()[j]).value())
        .collect();
    let mut worst = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                // Induced connection: tangential part of the ambient second
                // derivative, i.e. F_ij minus its N-component.
                let nab_ij = form
                    .second(i, j)
                    .scaled_add(-form.b(i, j), nv);
                let nab_ik = form
                    .second(i, k)
                    .scaled_add(-form.b(i, k), nv);
                let lhs = form.d_gram[i].get(j, k).value()
                    - g_dot(&nab_ij, &frame.tangents()[k]).value()
                    - g_dot(&frame.tangents()[j], &nab_ik).value();
                let rhs = form.b(i, j).value() * eta[k] + form.b(i, k).value() * eta[j];
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

/// Shape operator of the normal section `V = a xi + b N` on the screen,
/// with the residual between its two computations.
///
/// Route one combines the coefficient matrices, `a A* + b A_N`; route two
/// projects `-(a D_W xi + b D_W N)` back onto the screen for every screen
/// direction.  Their agreement is the operator-combination law for normal
/// sections.
pub fn shape_operator_of_section(
    form: &FormJet,
    a: DiffScalar,
    b: DiffScalar,
) -> Result<(JetMatrix, f64), FrameError> {
    let n = form.screen_dim();
    let combined = JetMatrix::from_fn(n, n, |r, col| {
        a * form.a_star_screen.get(r, col + 1) + b * form.a_n_screen.get(r, col + 1)
    });
    let mut residual = 0.0_f64;
    for col in 0..n {
        let deriv = form.d_xi[col + 1]
            .scale(a)
            .scaled_add(b, &form.d_n[col + 1])
            .neg();
        let coeffs = form.frame.screen_coefficients(&deriv)?;
        for (r, coeff) in coeffs.iter().enumerate() {
            residual = residual.max((coeff.value() - combined.get(r, col).value()).abs());
        }
    }
    Ok((combined, residual))
}

/// Convenience wrapper for constant section coefficients.
pub fn shape_operator_of_constant_section(
    form: &FormJet,
    a: f64,
    b: f64,
) -> Result<(JetMatrix, f64), FrameError> {
    let d = form.depth();
    shape_operator_of_section(form, DiffScalar::c(a, d), DiffScalar::c(b, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{make_null_cone, make_null_hyperplane};
    use crate::jetcalc::nth_derivative;
    use std::f64::consts::FRAC_PI_2;

    fn cone_forms_at_reference() -> FormJet {
        let chart = make_null_cone(2).unwrap();
        forms_at_point(&chart, &[2.0, FRAC_PI_2, 0.0], &FrameTolerances::default()).unwrap()
    }

    #[test]
    fn cone_second_fundamental_form() {
        let form = cone_forms_at_reference();
        assert!((form.b(1, 1).value() + 4.0).abs() < 1e-12);
        assert!((form.b(2, 2).value() + 4.0).abs() < 1e-12);
        assert!(form.b(0, 0).value().abs() < 1e-12);
        assert!(form.b(0, 1).value().abs() < 1e-12);
        assert!(form.b(1, 2).value().abs() < 1e-12);
        assert!(form.residuals().b_radical < 1e-12);
        assert!(form.residuals().b_symmetry < 1e-12);
    }

    #[test]
    fn cone_screen_fundamental_form() {
        let form = cone_forms_at_reference();
        assert!((form.c(1, 0).value() + 0.5).abs() < 1e-12);
        assert!((form.c(2, 1).value() + 0.5).abs() < 1e-12);
        assert!(form.c(0, 0).value().abs() < 1e-12);
        assert!(form.c(1, 1).value().abs() < 1e-12);
        assert!(form.residuals().c_symmetry < 1e-12);
    }

    #[test]
    fn cone_transversal_one_form_by_both_routes() {
        let form = cone_forms_at_reference();
        assert!((form.tau(0).value() + 0.5).abs() < 1e-12);
        assert!(form.tau(1).value().abs() < 1e-12);
        assert!(form.tau(2).value().abs() < 1e-12);
        assert!(form.residuals().tau_consistency < 1e-12);
        // tau(xi) = -1 on the cone.
        let tau_xi = form.tau_of(form.frame().xi_chart());
        assert!((tau_xi.value() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cone_shape_operators() {
        let form = cone_forms_at_reference();
        // A* annihilates xi and is -I on the screen.
        for r in 0..2 {
            for i in 0..3 {
                let want = if i == r + 1 { -1.0 } else { 0.0 };
                // Column 0 is T_u = xi / u: A* T_u = 0.
                let want = if i == 0 { 0.0 } else { want };
                assert!(
                    (form.a_star(r, i).value() - want).abs() < 1e-11,
                    "A*[{r}][{i}]"
                );
            }
        }
        // A_N is -1/(2u^2) I on the screen and kills T_u.
        for r in 0..2 {
            for i in 0..3 {
                let want = if i == r + 1 { -0.125 } else { 0.0 };
                let want = if i == 0 { 0.0 } else { want };
                assert!((form.a_n(r, i).value() - want).abs() < 1e-12, "A_N[{r}][{i}]");
            }
        }
        assert!((form.trace_a_star().value() + 2.0).abs() < 1e-11);
        assert!((form.trace_a_n().value() + 0.25).abs() < 1e-12);
        assert!(form.residuals().a_star_screen_valued < 1e-12);
        assert!(form.residuals().a_n_screen_valued < 1e-12);
        assert!(form.residuals().duality_b < 1e-11);
        assert!(form.residuals().duality_c < 1e-12);
    }

    #[test]
    fn hyperplane_forms_vanish() {
        let chart = make_null_hyperplane(2, &[1.0, 0.0, 0.0]).unwrap();
        let form =
            forms_at_point(&chart, &[0.4, -0.9, 1.1], &FrameTolerances::default()).unwrap();
        let snap = form.snapshot(&[0.4, -0.9, 1.1]);
        for row in snap.b.iter().chain(&snap.c).chain(&snap.a_star).chain(&snap.a_n) {
            for x in row {
                assert!(x.abs() < 1e-13);
            }
        }
        for t in snap.tau.iter().chain(&snap.tau_alt) {
            assert!(t.abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_weingarten_replay_on_cone_and_hyperplane() {
        let cone = make_null_cone(2).unwrap();
        let tols = FrameTolerances::default();
        for p in [[1.0, 0.7, 0.3], [2.0, FRAC_PI_2, 0.0], [3.5, 2.2, 4.9]] {
            let form = forms_at_point(&cone, &p, &tols).unwrap();
            let gw = gauss_weingarten_residuals(&form).unwrap();
            assert!(gw.max() < 1e-11, "cone at {p:?}: {gw:?}");
        }
        let plane = make_null_hyperplane(2, &[0.6, 0.8, 0.0]).unwrap();
        let form = forms_at_point(&plane, &[0.1, 0.2, -0.5], &tols).unwrap();
        assert!(gauss_weingarten_residuals(&form).unwrap().max() < 1e-13);
    }

    #[test]
    fn non_metricity_identity_on_the_cone() {
        let cone = make_null_cone(2).unwrap();
        let form =
            forms_at_point(&cone, &[1.7, 1.1, 2.0], &FrameTolerances::default()).unwrap();
        assert!(non_metricity_residual(&form) < 1e-11);
    }

    #[test]
    fn shape_operator_of_the_canonical_sections() {
        let form = cone_forms_at_reference();
        // V1 = -(1/(2u)) xi - u N has A_V = (1/u) I at u = 2.
        let (a_v1, res1) = shape_operator_of_constant_section(&form, -0.25, -2.0).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let want = if r == c { 0.5 } else { 0.0 };
                assert!((a_v1.get(r, c).value() - want).abs() < 1e-11);
            }
        }
        assert!(res1 < 1e-11);
        // V2 = -(1/(2u)) xi + u N has A_V = 0.
        let (a_v2, res2) = shape_operator_of_constant_section(&form, -0.25, 2.0).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!(a_v2.get(r, c).value().abs() < 1e-11);
            }
        }
        assert!(res2 < 1e-11);
    }

    #[test]
    fn broken_transversal_is_flagged_by_the_decomposition() {
        let form = cone_forms_at_reference();
        let frame = form.frame();
        let v = frame.tangents()[1].clone();
        let good = decomposition_residual_with(frame, &v, frame.transversal()).unwrap();
        assert!(good < 1e-12);
        // Perturb N by a screen component: axioms break, replay must notice.
        let bent = frame
            .transversal()
            .scaled_add(DiffScalar::c(0.05, 0), &frame.tangents()[1]);
        let bad = decomposition_residual_with(frame, &v, &bent).unwrap();
        assert!(bad > 1e-3, "residual {bad} too small to flag the injection");
    }

    #[test]
    fn form_jets_differentiate_correctly() {
        // Along e_u on the cone, tau(T_u) = -1/u, so its u-derivative is
        // 1/u^2 = 0.25 at u = 2; and B_theta_theta = -u^2 gives -2u = -4.
        let chart = make_null_cone(2).unwrap();
        let coords = [
            DiffScalar::c(2.0, 0).raise_seeded(1.0),
            DiffScalar::c(FRAC_PI_2, 0).raise_seeded(0.0),
            DiffScalar::c(0.0, 0).raise_seeded(0.0),
        ];
        let form = forms_at(&chart, &coords, &FrameTolerances::default()).unwrap();
        assert_eq!(form.depth(), 1);
        assert!((nth_derivative(&form.tau(0), 1).unwrap() - 0.25).abs() < 1e-11);
        assert!((nth_derivative(&form.b(1, 1), 1).unwrap() + 4.0).abs() < 1e-10);
        // A_N screen entry is -1/(2u^2): derivative 1/u^3 = 0.125 at u = 2.
        assert!((nth_derivative(&form.a_n(0, 1), 1).unwrap() - 0.125).abs() < 1e-10);
    }
}
