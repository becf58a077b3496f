//! Minkowski ambient algebra: index-one inner product, causal classification,
//! and quadric residuals.
//!
//! The ambient space is `R^{n+2}` with the Lorentzian inner product
//! `g(x, y) = -x^0 y^0 + sum_{a >= 1} x^a y^a` (timelike coordinate first).
//! Vectors carry jet components so that every downstream geometric quantity
//! can be differentiated through this module.

use serde::Serialize;
use thiserror::Error;

use crate::jetcalc::DiffScalar;

/// Errors from ambient-vector operations.
#[derive(Debug, Error)]
pub enum MinkowskiError {
    /// Two vectors of different dimensions were paired.
    #[error("vector length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Causal character of a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalClass {
    Spacelike,
    Timelike,
    Null,
    Zero,
}

/// Which quadric a residual is measured against.
///
/// `Sphere` is the unit-index pseudo-sphere `g(x - c, x - c) = r2`;
/// `Hyperbolic` is the hyperbolic space `g(x - c, x - c) = -r2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadricKind {
    Sphere,
    Hyperbolic,
}

/// A vector of the ambient Minkowski space, with jet components.
#[derive(Debug, Clone)]
pub struct AmbientVector {
    components: Vec<DiffScalar>,
}

impl AmbientVector {
    /// Build from jet components; all components must carry one depth.
    pub fn from_components(components: Vec<DiffScalar>) -> Self {
        if let Some(first) = components.first() {
            assert!(
                components.iter().all(|c| c.depth() == first.depth()),
                "ambient vector components mix jet depths"
            );
        }
        Self { components }
    }

    /// Build a depth-0 vector from plain reals.
    pub fn from_reals(values: &[f64]) -> Self {
        Self {
            components: values.iter().map(|&v| DiffScalar::c(v, 0)).collect(),
        }
    }

    /// All-zero vector of the given dimension and depth.
    pub(crate) fn zero(dim: usize, depth: usize) -> Self {
        Self {
            components: vec![DiffScalar::c(0.0, depth); dim],
        }
    }

    /// Ambient dimension `n + 2`.
    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Jet depth carried by the components.
    pub fn depth(&self) -> usize {
        self.components.first().map_or(0, |c| c.depth())
    }

    /// Jet components.
    pub fn components(&self) -> &[DiffScalar] {
        &self.components
    }

    /// Value parts of the components.
    pub fn values(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.value()).collect()
    }

    /// Component accessor.
    pub fn get(&self, i: usize) -> DiffScalar {
        self.components[i]
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self::from_components(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self::from_components(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| a - b)
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::from_components(self.components.iter().map(|&a| -a).collect())
    }

    /// Scale by a jet coefficient of matching depth.
    pub fn scale(&self, factor: DiffScalar) -> Self {
        Self::from_components(self.components.iter().map(|&a| a * factor).collect())
    }

    /// Scale by a plain real.
    pub fn scale_f64(&self, factor: f64) -> Self {
        Self::from_components(self.components.iter().map(|&a| a * factor).collect())
    }

    /// `self + factor * other`.
    pub fn scaled_add(&self, factor: DiffScalar, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self::from_components(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(&a, &b)| a + b * factor)
                .collect(),
        )
    }

    /// Euclidean squared norm of the value parts.
    pub fn euclid_norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c.value() * c.value()).sum()
    }

    /// Largest absolute value part.
    pub fn inf_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.value().abs())
            .fold(0.0, f64::max)
    }
}

/// Minkowski inner product on jet components (internal, dimensions trusted).
pub(crate) fn g_dot(x: &AmbientVector, y: &AmbientVector) -> DiffScalar {
    debug_assert_eq!(x.dim(), y.dim());
    let mut acc = -(x.components[0] * y.components[0]);
    for i in 1..x.dim() {
        acc = acc + x.components[i] * y.components[i];
    }
    acc
}

/// Minkowski inner product `g(x, y) = -x^0 y^0 + sum x^a y^a`.
pub fn minkowski_inner(x: &AmbientVector, y: &AmbientVector) -> Result<DiffScalar, MinkowskiError> {
    if x.dim() != y.dim() {
        return Err(MinkowskiError::LengthMismatch(x.dim(), y.dim()));
    }
    Ok(g_dot(x, y))
}

/// Classify a vector by the sign of its Minkowski square.
///
/// The comparison is relative: `|g(v, v)| <= tol * max(1, |v|^2_euclid)`
/// counts as null, and a Euclidean norm at most `tol` counts as the zero
/// vector.  The default tolerance used across the crate is `1e-9`.
pub fn causal_character(v: &AmbientVector, tol: f64) -> CausalClass {
    let norm_sq = v.euclid_norm_sq();
    if norm_sq <= tol * tol {
        return CausalClass::Zero;
    }
    let q = g_dot(v, v).value();
    if q.abs() <= tol * norm_sq.max(1.0) {
        CausalClass::Null
    } else if q > 0.0 {
        CausalClass::Spacelike
    } else {
        CausalClass::Timelike
    }
}

/// Signed defect of a point from a centered quadric.
///
/// Returns `g(x - c, x - c) - r2` for [`QuadricKind::Sphere`] and
/// `g(x - c, x - c) + r2` for [`QuadricKind::Hyperbolic`]; a point on the
/// quadric gives zero.  `r2` must be positive.
pub fn quadric_residual(
    x: &AmbientVector,
    center: &AmbientVector,
    kind: QuadricKind,
    r2: f64,
) -> f64 {
    assert_eq!(x.dim(), center.dim(), "point/center dimension mismatch");
    assert!(r2 > 0.0, "quadric radius-square must be positive");
    let d = x.sub(center);
    let q = g_dot(&d, &d).value();
    match kind {
        QuadricKind::Sphere => q - r2,
        QuadricKind::Hyperbolic => q + r2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn transversal_pairing_on_the_cone_frame() {
        // g(N, xi) for the cone frame at (2, pi/2, 0).
        let n = AmbientVector::from_reals(&[-0.25, 0.25, 0.0, 0.0]);
        let xi = AmbientVector::from_reals(&[2.0, 2.0, 0.0, 0.0]);
        let g = minkowski_inner(&n, &xi).unwrap().value();
        assert!((g - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_spatial_vector_is_spacelike() {
        let v = AmbientVector::from_reals(&[0.0, -1.0, 0.0, 0.0]);
        let g = minkowski_inner(&v, &v).unwrap().value();
        assert_eq!(g, 1.0);
        assert_eq!(causal_character(&v, 1e-9), CausalClass::Spacelike);
    }

    #[test]
    fn causal_examples() {
        assert_eq!(
            causal_character(&AmbientVector::from_reals(&[1.0, 1.0, 0.0, 0.0]), 1e-9),
            CausalClass::Null
        );
        assert_eq!(
            causal_character(&AmbientVector::from_reals(&[1.0, 0.0, 0.0, 0.0]), 1e-9),
            CausalClass::Timelike
        );
        assert_eq!(
            causal_character(&AmbientVector::from_reals(&[0.0, 0.0, 0.0, 0.0]), 1e-9),
            CausalClass::Zero
        );
    }

    #[test]
    fn quadric_residuals_on_and_off_the_sphere() {
        let c = AmbientVector::from_reals(&[2.0, 0.0, 0.0, 0.0]);
        let on = AmbientVector::from_reals(&[2.0, 4.0, 0.0, 0.0]);
        assert!(quadric_residual(&on, &c, QuadricKind::Sphere, 16.0).abs() < 1e-15);
        let off = AmbientVector::from_reals(&[2.0, 4.0, 0.0, 0.1]);
        assert!((quadric_residual(&off, &c, QuadricKind::Sphere, 16.0) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn quadric_residual_on_hyperbolic_space() {
        let c = AmbientVector::from_reals(&[2.0, 0.0, 0.0, 0.0]);
        let x = AmbientVector::from_reals(&[3.0, 0.0, 0.0, 0.0]);
        assert!(quadric_residual(&x, &c, QuadricKind::Hyperbolic, 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = AmbientVector::from_reals(&[1.0, 2.0]);
        let b = AmbientVector::from_reals(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            minkowski_inner(&a, &b),
            Err(MinkowskiError::LengthMismatch(2, 3))
        ));
    }

    proptest! {
        #[test]
        fn inner_product_is_symmetric_and_bilinear(
            x in proptest::collection::vec(-5.0_f64..5.0, 4),
            y in proptest::collection::vec(-5.0_f64..5.0, 4),
            z in proptest::collection::vec(-5.0_f64..5.0, 4),
            a in -3.0_f64..3.0,
        ) {
            let xv = AmbientVector::from_reals(&x);
            let yv = AmbientVector::from_reals(&y);
            let zv = AmbientVector::from_reals(&z);
            let gxy = g_dot(&xv, &yv).value();
            let gyx = g_dot(&yv, &xv).value();
            prop_assert!((gxy - gyx).abs() < 1e-12);
            // g(a x + z, y) = a g(x, y) + g(z, y)
            let lhs = g_dot(&zv.scaled_add(DiffScalar::c(a, 0), &xv), &yv).value();
            let rhs = a * gxy + g_dot(&zv, &yv).value();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }

        #[test]
        fn null_pair_combinations_square_to_two_ab(
            a in -4.0_f64..4.0,
            b in -4.0_f64..4.0,
        ) {
            // xi null, n null, g(xi, n) = 1, hence g(a xi + b n, .) = 2ab.
            let xi = AmbientVector::from_reals(&[1.0, 1.0, 0.0, 0.0]);
            let n = AmbientVector::from_reals(&[-0.5, 0.5, 0.0, 0.0]);
            let v = xi.scale_f64(a).add(&n.scale_f64(b));
            let got = g_dot(&v, &v).value();
            prop_assert!((got - 2.0 * a * b).abs() < 1e-12);
        }
    }
}
