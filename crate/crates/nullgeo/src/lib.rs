//! Numerical local geometry of screen-integrable null hypersurfaces in
//! Minkowski space.
//!
//! A null hypersurface `M` of Minkowski space carries a degenerate induced
//! metric whose radical is spanned by a null field `xi`.  Choosing the
//! chart's screen distribution and the canonical null transversal `N` with
//! `g(N, xi) = 1` splits the ambient geometry into a second fundamental form
//! `B`, a screen fundamental form `C`, a transversal one-form `tau`, and the
//! shape operators they induce.  This crate computes all of these from an
//! explicit chart map using exact nested forward-mode differentiation, then
//! layers on:
//!
//! * the leaf geometry of the screen foliation (shape operators of normal
//!   sections, normal connection and its curvature, first normal spaces),
//! * pointwise and per-leaf classification (umbilicity, screen conformality,
//!   mean curvature, pseudo-umbilicity, containment in a pseudo-sphere or
//!   hyperbolic space, minimality audits),
//! * a golden catalog (the future null cone and null hyperplanes) with
//!   closed-form expected tables,
//! * a finite-difference oracle and named verification suites that replay
//!   every structural identity numerically.

pub mod catalog;
pub mod classify;
pub mod curvature;
pub mod fdoracle;
pub mod forms;
pub mod jetcalc;
pub(crate) mod linalg;
pub mod minkowski;
pub mod nullframe;
pub mod suites;

pub use catalog::{
    load_custom, make_minimal_graph, make_null_cone, make_null_graph, make_null_hyperplane,
    CatalogError, ChartConfig, ExpectedGeometry,
};
pub use classify::{
    canonical_pair_sections, classify_chart, classify_point, sphere_containment, theorem2_audit,
    trace_system_solution, ClassificationReport, ContainmentRecord, CorollaryVerdict,
    LeafMeanCurvature, MeanCurvature, PointRecord, ProportionalityFit, TheoremTwoAudit,
    DEFAULT_RANK_TOL, DEFAULT_VERDICT_TOL,
};
pub use curvature::{curvature_at, CurvatureSample, PropositionResiduals, SectionFn};
pub use fdoracle::{fd_directional, FdConfig, FdError};
pub use forms::{
    forms_at_point, shape_operator_of_constant_section, FormJet, FormResiduals, FormTables,
    GaussWeingartenResiduals,
};
pub use jetcalc::{directional_derivative, DiffScalar, FieldHandle, JetError, MAX_DEPTH};
pub use linalg::JetMatrix;
pub use minkowski::{
    minkowski_inner, AmbientVector, CausalClass, MinkowskiError, QuadricKind,
};
pub use nullframe::{
    validate_chart, DomainBox, FrameData, FrameError, FrameTolerances, GridSpec, NullChart,
    ValidityReport,
};
pub use suites::{
    applicable_suites, run_all, run_suite, SuiteCheck, SuiteError, SuiteResult, DEFAULT_SEED,
    SUITE_NAMES,
};
