//! Classification predicates and theorem audits.
//!
//! The shape data of a chart supports a family of pointwise verdicts:
//!
//! * *totally umbilic* — `B = rho g` on the screen,
//! * *screen totally umbilic* — `C = varrho g`,
//! * *screen conformal* — `C = psi B` (undefined where `B` vanishes),
//! * *minimal* — `trace A* = 0`, with mean curvature `H = (1/n)(trace A*)`,
//! * leaf *minimal* — the leaf mean curvature
//!   `H* = 1/2 [(trace A_V) V + (trace A_W) W]` vanishes, for the
//!   distinguished orthonormal normal pair `(V, W)`,
//! * *pseudo-umbilic* — the leaf second fundamental form is `g`-proportional
//!   to the mean curvature direction.
//!
//! All factor estimates are Gram-weighted least squares, which makes them
//! independent of the screen coordinate basis, and every boolean verdict
//! carries its numeric residual and the tolerance that judged it.
//!
//! Two audits realize the global statements.  The containment audit checks
//! that a leaf with `A_V = lambda I`, parallel `V` and flat normal
//! connection lies on the quadric `g(x - c, x - c) = eps / lambda^2` with
//! center `c = f + V / lambda`.  The minimal-immersion audit evaluates the
//! hypotheses (minimal leaf, not totally geodesic, parallel normal
//! curvature) and conclusions (vanishing traces, parallel first normal
//! space and complement) and reports the implication status.

use serde::Serialize;

use crate::curvature::{
    constant_section, covariant_derivative_rperp, curvature_at, curvature_zero_residual,
    first_normal_space, kernel_subbundle, normal_cov_derivative, SectionFn,
};
use crate::forms::{forms_at, forms_at_point, FormJet};
use crate::jetcalc::DiffScalar;
use crate::linalg::JetMatrix;
use crate::minkowski::{minkowski_inner, AmbientVector, QuadricKind};
use crate::nullframe::{frame_at, FrameError, FrameTolerances, GridSpec, NullChart};

/// Default absolute tolerance for verdict booleans, applied to residuals
/// normalized by the reference block norm.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-8;

/// Relative singular-value cutoff for subbundle dimensions.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Result of a Gram-weighted least-squares fit `target ~ factor * reference`.
#[derive(Debug, Clone, Serialize)]
pub struct ProportionalityFit {
    /// Fitted proportionality factor.
    pub factor: f64,
    /// Infinity-norm of `target - factor * reference`.
    pub residual: f64,
    /// Infinity-norm of the reference block, used to normalize the verdict.
    pub scale: f64,
    /// `residual <= tol * scale`.
    pub holds: bool,
}

fn value_block(m: &JetMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.rows, m.cols, |r, c| m.get(r, c).value())
}

fn inf_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |w, x| w.max(x.abs()))
}

/// Gram-weighted least-squares fit of `target ~ factor * reference`.
///
/// The inner product on symmetric screen forms is
/// `<A, B> = trace(G^-1 A G^-1 B)` with `G` the screen Gram, which makes
/// the factor independent of the screen coordinate basis.
pub fn fit_proportionality(
    target: &nalgebra::DMatrix<f64>,
    reference: &nalgebra::DMatrix<f64>,
    gram: &nalgebra::DMatrix<f64>,
    tol: f64,
) -> ProportionalityFit {
    let lu = gram.clone().lu();
    let gt = lu.solve(target).expect("screen Gram is invertible");
    let gr = lu.solve(reference).expect("screen Gram is invertible");
    let num = (&gt * &gr).trace();
    let den = (&gr * &gr).trace();
    let factor = if den.abs() < f64::MIN_POSITIVE {
        0.0
    } else {
        num / den
    };
    let residual = inf_norm(&(target - reference * factor));
    let scale = inf_norm(reference);
    ProportionalityFit {
        factor,
        residual,
        scale,
        holds: residual <= tol * scale.max(f64::MIN_POSITIVE),
    }
}

/// Umbilicity fit `B = rho g` on the screen block.
pub fn umbilicity(form: &FormJet, tol: f64) -> ProportionalityFit {
    let g = value_block(&form.frame().screen_gram());
    let b = value_block(&form.b_screen_block());
    fit_proportionality(&b, &g, &g, tol)
}

/// Screen umbilicity fit `C = varrho g` on the screen block.
pub fn screen_umbilicity(form: &FormJet, tol: f64) -> ProportionalityFit {
    let g = value_block(&form.frame().screen_gram());
    let c = value_block(&form.c_screen_block());
    fit_proportionality(&c, &g, &g, tol)
}

/// Screen conformality fit `C = psi B`; `None` where `B` vanishes.
pub fn screen_conformality(form: &FormJet, tol: f64) -> Option<ProportionalityFit> {
    let g = value_block(&form.frame().screen_gram());
    let b = value_block(&form.b_screen_block());
    let c = value_block(&form.c_screen_block());
    if inf_norm(&b) <= 1e-13 * inf_norm(&g).max(1.0) {
        return None;
    }
    Some(fit_proportionality(&c, &b, &g, tol))
}

/// Mean curvature of the hypersurface: `H = (1/n)(trace A*) N`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanCurvature {
    /// `trace A*` over the screen.
    pub trace: f64,
    /// `H` coefficient `(1/n) trace A*`.
    pub coefficient: f64,
    /// `|trace A*| <= tol`.
    pub minimal: bool,
}

/// Compute the mean curvature coefficient and minimality verdict.
pub fn mean_curvature_h(form: &FormJet, tol: f64) -> MeanCurvature {
    let trace = form.trace_a_star().value();
    MeanCurvature {
        trace,
        coefficient: trace / form.screen_dim() as f64,
        minimal: trace.abs() <= tol,
    }
}

/// The distinguished orthonormal basis of the normal plane.
///
/// `V = a xi + b N` and `W = a xi - b N` with `2ab = 1`, so `V` is unit
/// spacelike and `W` unit timelike; the sign is fixed by `a < 0`.  The pair
/// is `canonical` when it comes from a one-dimensional shape kernel with a
/// timelike-capable direction (then `A_W = 0`); otherwise the fixed
/// fallback `a = b = -1/sqrt(2)` is returned.
#[derive(Debug, Clone, Serialize)]
pub struct NormalPair {
    /// Coefficients `(a, b)` of the spacelike member.
    pub v: [f64; 2],
    /// Coefficients `(a, -b)` of the timelike member.
    pub w: [f64; 2],
    /// Whether the pair is derived from the shape kernel.
    pub canonical: bool,
}

/// Build the distinguished normal pair from the shape kernel.
pub fn canonical_pair(form: &FormJet, rel_tol: f64) -> NormalPair {
    let (dim, basis) = kernel_subbundle(form, rel_tol);
    if dim == 1 {
        let [a0, b0] = basis[0];
        if a0 * b0 < 0.0 {
            let mut t = (-1.0 / (2.0 * a0 * b0)).sqrt();
            if t * a0 > 0.0 {
                t = -t;
            }
            return NormalPair {
                v: [t * a0, -t * b0],
                w: [t * a0, t * b0],
                canonical: true,
            };
        }
    }
    let r = -1.0 / 2.0_f64.sqrt();
    NormalPair {
        v: [r, r],
        w: [r, -r],
        canonical: false,
    }
}

/// Ambient vector of a normal-plane coefficient pair at a frame.
pub fn pair_to_ambient(form: &FormJet, coeffs: [f64; 2]) -> AmbientVector {
    let frame = form.frame();
    frame
        .xi()
        .scale_f64(coeffs[0])
        .add(&frame.transversal().scale_f64(coeffs[1]))
}

/// Smooth coefficient fields extending the canonical pair near `base`, or
/// `None` when the pair is not canonical there.
///
/// When the shape kernel is one-dimensional it is spanned entrywise by
/// `(-(A_N)_rc, (A*)_rc)` for any entry where the two do not both vanish;
/// the entry and the overall sign are fixed at the base point, so the
/// resulting fields are smooth and jet-evaluable.
#[allow(clippy::type_complexity)]
pub fn canonical_pair_sections<'a>(
    chart: &'a NullChart,
    base: &[f64],
    tols: &'a FrameTolerances,
    rel_tol: f64,
) -> Result<Option<(Box<SectionFn<'a>>, Box<SectionFn<'a>>)>, FrameError> {
    let form = forms_at_point(chart, base, tols)?;
    let pair = canonical_pair(&form, rel_tol);
    if !pair.canonical {
        return Ok(None);
    }
    let n = form.screen_dim();
    let s = form.a_star_screen_block();
    let t = form.a_n_screen_block();
    let (mut best, mut br, mut bc) = (0.0_f64, 0, 0);
    for r in 0..n {
        for c in 0..n {
            let weight = s.get(r, c).value().abs() + t.get(r, c).value().abs();
            if weight > best {
                best = weight;
                br = r;
                bc = c;
            }
        }
    }
    let a0 = -t.get(br, bc).value();
    let b0 = s.get(br, bc).value();
    let sigma = if (-1.0 / (2.0 * a0 * b0)).sqrt() * a0 > 0.0 {
        -1.0
    } else {
        1.0
    };
    let make = move |w_sign: f64| -> Box<SectionFn<'a>> {
        Box::new(move |q: &[DiffScalar]| {
            let f = forms_at(chart, q, tols)?;
            let a0 = -f.a_n_screen_block().get(br, bc);
            let b0 = f.a_star_screen_block().get(br, bc);
            let tq = (a0 * b0 * (-2.0)).recip().sqrt() * sigma;
            Ok((a0 * tq, b0 * tq * w_sign))
        })
    };
    Ok(Some((make(-1.0), make(1.0))))
}

/// The candidate basis for a parallel normal frame: the canonical pair
/// sections when the pair is canonical at `base`, else the constant frame
/// sections `xi` and `N`.
pub fn parallel_candidate_sections<'a>(
    chart: &'a NullChart,
    base: &[f64],
    tols: &'a FrameTolerances,
    rel_tol: f64,
) -> Result<Vec<Box<SectionFn<'a>>>, FrameError> {
    Ok(match canonical_pair_sections(chart, base, tols, rel_tol)? {
        Some((v, w)) => vec![v, w],
        None => vec![
            Box::new(constant_section(1.0, 0.0)),
            Box::new(constant_section(0.0, 1.0)),
        ],
    })
}

/// Largest normal-connection derivative of the sections along the screen
/// directions at `p`.
pub fn parallel_residual(
    chart: &NullChart,
    p: &[f64],
    sections: &[Box<SectionFn<'_>>],
    tols: &FrameTolerances,
) -> Result<f64, FrameError> {
    let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
    let base = frame_at(chart, &coords, tols)?;
    let mut worst = 0.0_f64;
    for section in sections {
        for dir in 1..chart.coord_dim() {
            let (a, b) = normal_cov_derivative(chart, &coords, &base, dir, &**section, tols)?;
            worst = worst.max(a.value().abs()).max(b.value().abs());
        }
    }
    Ok(worst)
}

/// The four equivalent flatness statements evaluated at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CorollaryVerdict {
    pub point: Vec<f64>,
    /// `d tau = 0` on screen pairs.
    pub dtau_flat: bool,
    /// `A* A_N = A_N A*` on the screen.
    pub commuting_shape_operators: bool,
    /// Normal curvature vanishes on frame sections.
    pub curvature_free: bool,
    /// The candidate normal basis is parallel.
    pub parallel_basis: bool,
    pub residual_dtau: f64,
    pub residual_commutator: f64,
    pub residual_curvature: f64,
    pub residual_parallel: f64,
    /// Whether the parallel candidate was the canonical pair.
    pub canonical_basis: bool,
    pub tol: f64,
    /// All four booleans coincide.
    pub agree: bool,
}

/// Evaluate the four-way flatness equivalence at a point.
pub fn corollary_equivalence(
    chart: &NullChart,
    p: &[f64],
    tols: &FrameTolerances,
    tol: f64,
) -> Result<CorollaryVerdict, FrameError> {
    let sample = curvature_at(chart, p, tols)?;
    let residual_dtau = sample.dtau_screen_max();
    let residual_commutator = sample.commutator_residual();
    let residual_curvature = curvature_zero_residual(sample.form());
    let sections = parallel_candidate_sections(chart, p, tols, DEFAULT_RANK_TOL)?;
    let canonical_basis = sections.len() == 2 && {
        // parallel_candidate_sections returns boxed closures either way;
        // re-derive the flag from the pair itself.
        canonical_pair(sample.form(), DEFAULT_RANK_TOL).canonical
    };
    let residual_parallel = parallel_residual(chart, p, &sections, tols)?;
    let dtau_flat = residual_dtau <= tol;
    let commuting_shape_operators = residual_commutator <= tol;
    let curvature_free = residual_curvature <= tol;
    let parallel_basis = residual_parallel <= tol;
    let agree = dtau_flat == commuting_shape_operators
        && dtau_flat == curvature_free
        && dtau_flat == parallel_basis;
    Ok(CorollaryVerdict {
        point: p.to_vec(),
        dtau_flat,
        commuting_shape_operators,
        curvature_free,
        parallel_basis,
        residual_dtau,
        residual_commutator,
        residual_curvature,
        residual_parallel,
        canonical_basis,
        tol,
        agree,
    })
}

/// Leaf mean curvature `H* = 1/2 [(trace A_V) V + (trace A_W) W]`.
#[derive(Debug, Clone, Serialize)]
pub struct LeafMeanCurvature {
    pub pair: NormalPair,
    pub trace_v: f64,
    pub trace_w: f64,
    /// `H* = a xi + b N` under the 1/2-weighted definition.
    pub frame_coeffs: [f64; 2],
    /// Ambient components of `H*`.
    pub ambient: Vec<f64>,
    /// Classical alternative `(1/n) [(trace A_V) V - (trace A_W) W]`
    /// (causal-sign weighted), for comparison.
    pub normalized_frame_coeffs: [f64; 2],
    /// `g(H*, H*)`.
    pub norm2: f64,
    /// Both traces vanish (normalization-independent).
    pub minimal: bool,
}

/// Compute the leaf mean curvature vector and minimality verdict.
pub fn leaf_mean_curvature(form: &FormJet, tol: f64) -> LeafMeanCurvature {
    let pair = canonical_pair(form, DEFAULT_RANK_TOL);
    let trs = form.trace_a_star().value();
    let trn = form.trace_a_n().value();
    let trace_v = pair.v[0] * trs + pair.v[1] * trn;
    let trace_w = pair.w[0] * trs + pair.w[1] * trn;
    let frame_coeffs = [
        0.5 * (trace_v * pair.v[0] + trace_w * pair.w[0]),
        0.5 * (trace_v * pair.v[1] + trace_w * pair.w[1]),
    ];
    let n = form.screen_dim() as f64;
    let normalized_frame_coeffs = [
        (trace_v * pair.v[0] - trace_w * pair.w[0]) / n,
        (trace_v * pair.v[1] - trace_w * pair.w[1]) / n,
    ];
    let ambient = pair_to_ambient(form, frame_coeffs).values();
    LeafMeanCurvature {
        pair,
        trace_v,
        trace_w,
        frame_coeffs,
        ambient,
        normalized_frame_coeffs,
        norm2: 2.0 * frame_coeffs[0] * frame_coeffs[1],
        minimal: trace_v.abs() <= tol && trace_w.abs() <= tol,
    }
}

/// Pseudo-umbilicity: the leaf second fundamental form is `g`-proportional
/// to the mean curvature direction, `C = c a g` and `B = c b g` for
/// `H* = a xi + b N`.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoUmbilicCheck {
    /// `H*` is nonzero, so the check is meaningful.
    pub defined: bool,
    /// Mean curvature direction `(a, b)` over `(xi, N)`.
    pub direction: [f64; 2],
    /// Fitted overall factor `c`.
    pub factor: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Run the pseudo-umbilicity check against a computed `H*`.
pub fn pseudo_umbilic_check(
    form: &FormJet,
    hstar: &LeafMeanCurvature,
    tol: f64,
) -> PseudoUmbilicCheck {
    let [ha, hb] = hstar.frame_coeffs;
    let weight = ha * ha + hb * hb;
    if weight.sqrt() <= tol {
        return PseudoUmbilicCheck {
            defined: false,
            direction: [ha, hb],
            factor: 0.0,
            residual: 0.0,
            holds: false,
        };
    }
    let g = value_block(&form.frame().screen_gram());
    let b = value_block(&form.b_screen_block());
    let c = value_block(&form.c_screen_block());
    let n = form.screen_dim() as f64;
    let trs = form.trace_a_star().value();
    let trn = form.trace_a_n().value();
    let factor = (trn * ha + trs * hb) / (weight * n);
    let residual = inf_norm(&(&c - &g * (factor * ha))).max(inf_norm(&(&b - &g * (factor * hb))));
    let scale = inf_norm(&g);
    PseudoUmbilicCheck {
        defined: true,
        direction: [ha, hb],
        factor,
        residual,
        holds: residual <= tol * scale.max(f64::MIN_POSITIVE),
    }
}

/// Leaf containment audit record.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentRecord {
    /// All preconditions verified; the quadric assertion is made.
    pub applicable: bool,
    /// Why the audit did not apply, when it did not.
    pub reason: Option<String>,
    pub kind: Option<QuadricKind>,
    /// `g(V, V)` at the base point.
    pub epsilon: f64,
    pub lambda: f64,
    /// Center `c = f + V / lambda`.
    pub center: Option<Vec<f64>>,
    /// `|epsilon| / lambda^2`.
    pub r2: f64,
    /// Signed quadric value `epsilon / lambda^2`.
    pub signed_square: f64,
    /// Worst `|A_V - lambda I|` entry over the grid.
    pub shape_residual: f64,
    /// Worst screen `|2 d tau|` over the grid.
    pub dtau_residual: f64,
    /// Infinity-norm diameter of the recomputed centers over the grid.
    pub center_drift: f64,
    /// Worst `|g(f - c, f - c) - signed_square|` over the grid.
    pub quadric_residual: f64,
    pub points: usize,
    pub tol: f64,
}

fn leaf_grid(chart: &NullChart, t0: f64, screen_counts: &[usize]) -> GridSpec {
    let mut counts = Vec::with_capacity(chart.coord_dim());
    counts.push(1);
    counts.extend_from_slice(screen_counts);
    let mut ranges = Vec::with_capacity(chart.coord_dim());
    ranges.push((t0, t0));
    for i in 1..chart.coord_dim() {
        ranges.push(chart.domain().interval(i));
    }
    GridSpec::new(counts).with_ranges(ranges)
}

/// Audit the quadric containment of the leaf `t = t0`.
///
/// `section` supplies the unit normal field `V` (as `(a, b)` coefficients)
/// and `lambda` the claimed shape factor `A_V = lambda I`.  Both
/// preconditions — the shape identity and screen flatness — are verified at
/// every grid point before the containment is asserted.
pub fn sphere_containment(
    chart: &NullChart,
    t0: f64,
    section: &SectionFn<'_>,
    lambda: f64,
    screen_counts: &[usize],
    tols: &FrameTolerances,
    tol: f64,
) -> Result<ContainmentRecord, FrameError> {
    let mut record = ContainmentRecord {
        applicable: false,
        reason: None,
        kind: None,
        epsilon: 0.0,
        lambda,
        center: None,
        r2: 0.0,
        signed_square: 0.0,
        shape_residual: 0.0,
        dtau_residual: 0.0,
        center_drift: 0.0,
        quadric_residual: 0.0,
        points: 0,
        tol,
    };
    if lambda.abs() <= tol {
        record.reason = Some("umbilic factor lambda vanishes".into());
        return Ok(record);
    }
    let points = leaf_grid(chart, t0, screen_counts).points(chart.domain())?;
    record.points = points.len();
    let mut center0: Option<Vec<f64>> = None;
    let mut center_min: Vec<f64> = Vec::new();
    let mut center_max: Vec<f64> = Vec::new();
    let mut epsilon0 = 0.0_f64;
    for p in &points {
        let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
        let (a, b) = section(&coords)?;
        let (av, bv) = (a.value(), b.value());
        let form = forms_at(chart, &coords, tols)?;
        let n = form.screen_dim();
        let s = value_block(&form.a_star_screen_block());
        let t = value_block(&form.a_n_screen_block());
        let mut shape = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                let id = if r == c { lambda } else { 0.0 };
                shape = shape.max((av * s[(r, c)] + bv * t[(r, c)] - id).abs());
            }
        }
        record.shape_residual = record.shape_residual.max(shape);
        let sample = curvature_at(chart, p, tols)?;
        record.dtau_residual = record.dtau_residual.max(sample.dtau_screen_max());
        let v_amb = pair_to_ambient(&form, [av, bv]);
        let center: Vec<f64> = form
            .frame()
            .point()
            .add(&v_amb.scale_f64(1.0 / lambda))
            .values();
        match &center0 {
            None => {
                epsilon0 = 2.0 * av * bv;
                center_min = center.clone();
                center_max = center.clone();
                center0 = Some(center);
            }
            Some(c0) => {
                for (i, &x) in center.iter().enumerate() {
                    center_min[i] = center_min[i].min(x);
                    center_max[i] = center_max[i].max(x);
                }
                let _ = c0;
            }
        }
    }
    let center0 = center0.expect("leaf grid is nonempty");
    record.epsilon = epsilon0;
    record.signed_square = epsilon0 / (lambda * lambda);
    record.r2 = record.signed_square.abs();
    record.center_drift = center_min
        .iter()
        .zip(&center_max)
        .fold(0.0_f64, |w, (lo, hi)| w.max(hi - lo));
    let c_amb = AmbientVector::from_reals(&center0);
    for p in &points {
        let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
        let f = chart.position(&coords)?;
        let diff = f.sub(&c_amb);
        let q = minkowski_inner(&diff, &diff)
            .expect("position and center share the ambient dimension")
            .value();
        record.quadric_residual = record.quadric_residual.max((q - record.signed_square).abs());
    }
    if epsilon0.abs() <= tol {
        record.reason = Some("normal direction is null (epsilon = 0)".into());
        return Ok(record);
    }
    if record.shape_residual > tol * lambda.abs().max(1.0) {
        record.reason = Some("shape operator is not lambda times the identity".into());
        return Ok(record);
    }
    if record.dtau_residual > tol {
        record.reason = Some("normal connection is not flat on the leaf".into());
        return Ok(record);
    }
    record.applicable = true;
    record.kind = Some(if epsilon0 > 0.0 {
        QuadricKind::Sphere
    } else {
        QuadricKind::Hyperbolic
    });
    record.center = Some(center0);
    Ok(record)
}

/// Solve the trace system `a x + b y = r1`, `a x - b y = r2`.
///
/// Returns `None` when `a` or `b` vanishes (the system is then singular).
pub fn trace_system_solution(a: f64, b: f64, r1: f64, r2: f64) -> Option<(f64, f64)> {
    if a == 0.0 || b == 0.0 {
        return None;
    }
    Some(((r1 + r2) / (2.0 * a), (r1 - r2) / (2.0 * b)))
}

/// Audit record for the minimal-immersion theorem.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremTwoAudit {
    /// Hypothesis: the leaf mean curvature vanishes everywhere sampled.
    pub leaf_minimal: bool,
    /// Hypothesis: the leaf is not totally geodesic.
    pub not_totally_geodesic: bool,
    /// Hypothesis: the normal curvature operator field is parallel.
    pub curvature_parallel: bool,
    pub hypotheses_hold: bool,
    /// Worst `|trace A*|` over the grid.
    pub trace_a_star_max: f64,
    /// Worst `|trace A_N|` over the grid.
    pub trace_a_n_max: f64,
    /// Conclusion: both traces vanish.
    pub traces_vanish: bool,
    /// Dimension of the first normal space at the base point.
    pub first_normal_dim: usize,
    /// Parallelism residual of the first normal space spanning field.
    pub q_parallel_residual: f64,
    /// Parallelism residual of its complement's spanning field.
    pub p_parallel_residual: f64,
    /// Conclusion: both subbundles are parallel (trivially true unless the
    /// first normal space is one-dimensional).
    pub subbundles_parallel: bool,
    pub conclusions_hold: bool,
    /// No assertion is made because a hypothesis failed.
    pub vacuous: bool,
    /// Conclusions hold whenever hypotheses do.
    pub implication_ok: bool,
    /// Residuals behind the hypothesis booleans.
    pub minimality_residual: f64,
    pub second_form_magnitude: f64,
    pub curvature_parallel_residual: f64,
    pub tol: f64,
}

/// Out-of-span component of `(alpha, beta)` relative to `span{(d0, d1)}`.
fn span_defect(alpha: f64, beta: f64, d0: f64, d1: f64) -> f64 {
    let norm = (d0 * d0 + d1 * d1).sqrt();
    if norm == 0.0 {
        (alpha * alpha + beta * beta).sqrt()
    } else {
        (alpha * d1 - beta * d0).abs() / norm
    }
}

/// Audit the minimal-immersion theorem on the leaf `t = t0`.
pub fn theorem2_audit(
    chart: &NullChart,
    t0: f64,
    screen_counts: &[usize],
    tols: &FrameTolerances,
    tol: f64,
) -> Result<TheoremTwoAudit, FrameError> {
    let points = leaf_grid(chart, t0, screen_counts).points(chart.domain())?;
    let mut minimality_residual = 0.0_f64;
    let mut second_form_magnitude = 0.0_f64;
    let mut curvature_parallel_residual = 0.0_f64;
    let mut trace_a_star_max = 0.0_f64;
    let mut trace_a_n_max = 0.0_f64;
    let mut q_parallel_residual = 0.0_f64;
    let mut p_parallel_residual = 0.0_f64;

    // Subbundle analysis at the base point fixes the spanning-field recipe.
    let base_form = forms_at_point(chart, &points[0], tols)?;
    let (first_normal_dim, _) = first_normal_space(&base_form, DEFAULT_RANK_TOL);
    let n = base_form.screen_dim();
    let (mut br, mut bc, mut best) = (0, 0, 0.0_f64);
    {
        let c = base_form.c_screen_block();
        let b = base_form.b_screen_block();
        for r in 0..n {
            for q in 0..n {
                let w = c.get(r, q).value().abs() + b.get(r, q).value().abs();
                if w > best {
                    best = w;
                    br = r;
                    bc = q;
                }
            }
        }
    }

    for p in &points {
        let coords: Vec<DiffScalar> = p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
        let form = forms_at(chart, &coords, tols)?;
        let hstar = leaf_mean_curvature(&form, tol);
        minimality_residual = minimality_residual
            .max(hstar.trace_v.abs())
            .max(hstar.trace_w.abs());
        let bmag = inf_norm(&value_block(&form.b_screen_block()));
        let cmag = inf_norm(&value_block(&form.c_screen_block()));
        second_form_magnitude = second_form_magnitude.max(bmag).max(cmag);
        trace_a_star_max = trace_a_star_max.max(form.trace_a_star().value().abs());
        trace_a_n_max = trace_a_n_max.max(form.trace_a_n().value().abs());

        for z in 1..chart.coord_dim() {
            for i in 0..n {
                for j in (i + 1)..n {
                    for (a, b) in [(1.0, 0.0), (0.0, 1.0)] {
                        let section = constant_section(a, b);
                        let (x, y) =
                            covariant_derivative_rperp(chart, p, z, i, j, &section, tols)?;
                        curvature_parallel_residual =
                            curvature_parallel_residual.max(x.abs()).max(y.abs());
                    }
                }
            }
        }

        if first_normal_dim == 1 {
            // Spanning field of the first normal space by the entry rule,
            // and of its complement by the metric reflection.
            let q_section = |q: &[DiffScalar]| -> Result<(DiffScalar, DiffScalar), FrameError> {
                let f = forms_at(chart, q, tols)?;
                Ok((f.c(br + 1, bc), f.b(br + 1, bc + 1)))
            };
            let p_section = |q: &[DiffScalar]| -> Result<(DiffScalar, DiffScalar), FrameError> {
                let f = forms_at(chart, q, tols)?;
                Ok((f.c(br + 1, bc), -f.b(br + 1, bc + 1)))
            };
            let base = frame_at(chart, &coords, tols)?;
            let (dq0, dq1) = (
                form.c(br + 1, bc).value(),
                form.b(br + 1, bc + 1).value(),
            );
            for dir in 1..chart.coord_dim() {
                let (qa, qb) =
                    normal_cov_derivative(chart, &coords, &base, dir, &q_section, tols)?;
                q_parallel_residual = q_parallel_residual
                    .max(span_defect(qa.value(), qb.value(), dq0, dq1));
                let (pa, pb) =
                    normal_cov_derivative(chart, &coords, &base, dir, &p_section, tols)?;
                p_parallel_residual = p_parallel_residual
                    .max(span_defect(pa.value(), pb.value(), dq0, -dq1));
            }
        }
    }

    let leaf_minimal = minimality_residual <= tol;
    let not_totally_geodesic = second_form_magnitude > tol;
    let curvature_parallel = curvature_parallel_residual <= tol;
    let hypotheses_hold = leaf_minimal && not_totally_geodesic && curvature_parallel;
    let traces_vanish = trace_a_star_max <= tol && trace_a_n_max <= tol;
    let subbundles_parallel = first_normal_dim != 1
        || (q_parallel_residual <= tol && p_parallel_residual <= tol);
    let conclusions_hold = traces_vanish && subbundles_parallel;
    Ok(TheoremTwoAudit {
        leaf_minimal,
        not_totally_geodesic,
        curvature_parallel,
        hypotheses_hold,
        trace_a_star_max,
        trace_a_n_max,
        traces_vanish,
        first_normal_dim,
        q_parallel_residual,
        p_parallel_residual,
        subbundles_parallel,
        conclusions_hold,
        vacuous: !hypotheses_hold,
        implication_ok: !hypotheses_hold || conclusions_hold,
        minimality_residual,
        second_form_magnitude,
        curvature_parallel_residual,
        tol,
    })
}

/// Per-point classification record.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub point: Vec<f64>,
    pub rho: f64,
    pub rho_residual: f64,
    pub umbilic: bool,
    pub varrho: f64,
    pub varrho_residual: f64,
    pub screen_umbilic: bool,
    pub psi: Option<f64>,
    pub psi_residual: Option<f64>,
    pub screen_conformal: Option<bool>,
    pub mean_curvature: MeanCurvature,
    pub leaf_mean_curvature: LeafMeanCurvature,
    pub pseudo_umbilic: PseudoUmbilicCheck,
    pub kernel_dim: usize,
    pub first_normal_dim: usize,
}

/// Classify one point of a chart.
pub fn classify_point(
    chart: &NullChart,
    p: &[f64],
    tols: &FrameTolerances,
    tol: f64,
) -> Result<PointRecord, FrameError> {
    let form = forms_at_point(chart, p, tols)?;
    let rho = umbilicity(&form, tol);
    let varrho = screen_umbilicity(&form, tol);
    let psi = screen_conformality(&form, tol);
    let hstar = leaf_mean_curvature(&form, tol);
    let pseudo = pseudo_umbilic_check(&form, &hstar, tol);
    let (kernel_dim, _) = kernel_subbundle(&form, DEFAULT_RANK_TOL);
    let (first_normal_dim, _) = first_normal_space(&form, DEFAULT_RANK_TOL);
    Ok(PointRecord {
        point: p.to_vec(),
        rho: rho.factor,
        rho_residual: rho.residual,
        umbilic: rho.holds,
        varrho: varrho.factor,
        varrho_residual: varrho.residual,
        screen_umbilic: varrho.holds,
        psi: psi.as_ref().map(|f| f.factor),
        psi_residual: psi.as_ref().map(|f| f.residual),
        screen_conformal: psi.as_ref().map(|f| f.holds),
        mean_curvature: mean_curvature_h(&form, tol),
        leaf_mean_curvature: hstar,
        pseudo_umbilic: pseudo,
        kernel_dim,
        first_normal_dim,
    })
}

/// Full classification report for a chart.
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub chart: String,
    pub tol: f64,
    pub points: Vec<PointRecord>,
    pub containment: ContainmentRecord,
    pub theorem2: TheoremTwoAudit,
}

/// Classify a chart over a grid, with leaf audits at the `t`-midpoint leaf.
pub fn classify_chart(
    chart: &NullChart,
    grid: &GridSpec,
    tols: &FrameTolerances,
    tol: f64,
) -> Result<ClassificationReport, FrameError> {
    let pts = grid.points(chart.domain())?;
    let mut points = Vec::with_capacity(pts.len());
    for p in &pts {
        points.push(classify_point(chart, p, tols, tol)?);
    }
    let (lo, hi) = chart.domain().interval(0);
    let t0 = 0.5 * (lo + hi);
    let screen_counts = vec![3; chart.screen_dim()];
    let base = leaf_grid(chart, t0, &screen_counts).points(chart.domain())?[0].clone();
    let containment = match canonical_pair_sections(chart, &base, tols, DEFAULT_RANK_TOL)? {
        Some((v_section, _)) => {
            let form = forms_at_point(chart, &base, tols)?;
            let pair = canonical_pair(&form, DEFAULT_RANK_TOL);
            let s = value_block(&form.a_star_screen_block());
            let t = value_block(&form.a_n_screen_block());
            let av = s * pair.v[0] + t * pair.v[1];
            let lambda = av.trace() / form.screen_dim() as f64;
            sphere_containment(chart, t0, &*v_section, lambda, &screen_counts, tols, tol)?
        }
        None => ContainmentRecord {
            applicable: false,
            reason: Some("no canonical umbilic normal direction".into()),
            kind: None,
            epsilon: 0.0,
            lambda: 0.0,
            center: None,
            r2: 0.0,
            signed_square: 0.0,
            shape_residual: 0.0,
            dtau_residual: 0.0,
            center_drift: 0.0,
            quadric_residual: 0.0,
            points: 0,
            tol,
        },
    };
    let theorem2 = theorem2_audit(chart, t0, &vec![2; chart.screen_dim()], tols, tol)?;
    Ok(ClassificationReport {
        chart: chart.name().to_string(),
        tol,
        points,
        containment,
        theorem2,
    })
}
