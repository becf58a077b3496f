//! Nested forward-mode differentiation on truncated jets.
//!
//! A [`DiffScalar`] is a real value together with the coefficients of a small
//! set of nilpotent generators, one generator per nesting level.  Seeding a
//! fresh generator on the inputs of a field, evaluating, and reading off the
//! top generator's coefficient yields an exact directional derivative; nesting
//! the procedure yields mixed and higher directional derivatives.  The public
//! entry points ([`lift`], [`directional_derivative`], [`nth_derivative`])
//! support derivative orders 0 through [`MAX_DEPTH`].
//!
//! Internally one extra nesting level is reserved beyond the public budget:
//! frame and form quantities are themselves built from one or two derivatives
//! of a chart map, so cross-checking *their* first and second derivatives
//! against a finite-difference oracle needs deeper nesting than any caller is
//! allowed to request directly.
//!
//! Depth is part of a value's identity.  Mixing two depths in one arithmetic
//! expression is a programming error and panics; the same condition on the
//! boundary of a [`FieldHandle`] evaluation is reported as a typed error.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

/// Maximum derivative order a caller may request.
pub const MAX_DEPTH: usize = 3;

/// One reserved level beyond the public budget (see module docs).
pub(crate) const MAX_NEST: usize = MAX_DEPTH + 1;

const SLOTS: usize = 1 << MAX_NEST;

/// Factorials 0!..4!, used by the truncated Taylor composition rule.
const FACTORIAL: [f64; MAX_NEST + 1] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Errors produced at the public boundaries of the jet calculus.
#[derive(Debug, Error)]
pub enum JetError {
    /// A requested depth exceeds the supported nesting budget.
    #[error("derivative depth {0} is out of range (supported: 0..={MAX_DEPTH})")]
    DepthOutOfRange(usize),
    /// A requested derivative order exceeds the depth carried by the scalar.
    #[error("derivative order {order} exceeds the carried depth {depth}")]
    OrderOutOfRange { order: usize, depth: usize },
    /// A field was called with the wrong number of inputs.
    #[error("field expects {expected} inputs, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    /// Field inputs carried two different depths.
    #[error("field inputs mix depths {0} and {1}")]
    MixedDepths(usize, usize),
    /// A field evaluator returned the wrong number of components.
    #[error("field produced {got} outputs, expected {expected}")]
    CodomainMismatch { expected: usize, got: usize },
    /// A field evaluator returned a component at a depth other than its inputs.
    #[error("field output component {component} has depth {got}, inputs have depth {expected}")]
    OutputDepthMismatch {
        component: usize,
        expected: usize,
        got: usize,
    },
    /// A field evaluation produced NaN or infinity (domain violation).
    #[error("field evaluation produced a non-finite value in component {0}")]
    NonFinite(usize),
    /// A direction vector does not match the field arity.
    #[error("direction has dimension {got}, field arity is {expected}")]
    DirectionMismatch { expected: usize, got: usize },
}

/// A truncated jet: value plus nilpotent-generator coefficients.
///
/// `coeff[m]` stores the coefficient of the product of the generators whose
/// bits are set in `m`; `coeff[0]` is the plain value.  Every generator
/// squares to zero, so multiplication is a convolution over disjoint bit
/// masks.  Coefficients at masks outside the carried depth are kept at zero.
#[derive(Clone, Copy)]
pub struct DiffScalar {
    coeff: [f64; SLOTS],
    depth: u8,
}

impl DiffScalar {
    /// Internal constructor; accepts the reserved extra level.
    pub(crate) fn c(x: f64, depth: usize) -> Self {
        debug_assert!(depth <= MAX_NEST, "nesting depth {depth} exceeds capacity");
        let mut coeff = [0.0; SLOTS];
        coeff[0] = x;
        Self {
            coeff,
            depth: depth as u8,
        }
    }

    /// A constant (derivative-free) scalar at the given depth.
    pub fn constant(x: f64, depth: usize) -> Result<Self, JetError> {
        if depth > MAX_DEPTH {
            return Err(JetError::DepthOutOfRange(depth));
        }
        Ok(Self::c(x, depth))
    }

    /// The underlying value, ignoring all derivative content.
    pub fn value(&self) -> f64 {
        self.coeff[0]
    }

    /// Number of active nesting levels.
    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    /// True when every carried coefficient is finite.
    pub fn is_finite(&self) -> bool {
        self.coeff[..self.active()].iter().all(|c| c.is_finite())
    }

    /// Number of active coefficient slots.
    fn active(&self) -> usize {
        1 << self.depth
    }

    /// Coefficient of the generator product selected by `mask`.
    pub(crate) fn coefficient(&self, mask: usize) -> f64 {
        debug_assert!(mask < self.active());
        self.coeff[mask]
    }

    /// Add one fresh (unseeded) generator level on top.
    pub(crate) fn raise(self) -> Self {
        assert!(
            (self.depth as usize) < MAX_NEST,
            "nesting deeper than {MAX_NEST} levels"
        );
        Self {
            coeff: self.coeff,
            depth: self.depth + 1,
        }
    }

    /// Add one fresh generator level seeded with the given slope.
    ///
    /// Lifting a coordinate `q` to `q + slope * eps` prepares the directional
    /// derivative of any expression in `q` with respect to that coordinate.
    pub(crate) fn raise_seeded(self, slope: f64) -> Self {
        let mut out = self.raise();
        out.coeff[1 << self.depth] = slope;
        out
    }

    /// Split off the top generator level.
    ///
    /// Returns `(rest, derivative)` one level down: `rest` is the jet with the
    /// top generator dropped, `derivative` the coefficient of that generator.
    pub(crate) fn extract(self) -> (Self, Self) {
        assert!(self.depth > 0, "extract called on a depth-0 scalar");
        let d = self.depth - 1;
        let half = 1usize << d;
        let mut rest = [0.0; SLOTS];
        let mut deriv = [0.0; SLOTS];
        rest[..half].copy_from_slice(&self.coeff[..half]);
        deriv[..half].copy_from_slice(&self.coeff[half..2 * half]);
        (
            Self {
                coeff: rest,
                depth: d,
            },
            Self {
                coeff: deriv,
                depth: d,
            },
        )
    }

    fn check_depth(&self, other: &Self) {
        assert_eq!(
            self.depth, other.depth,
            "jet arithmetic mixes depths {} and {}; lift operands to a common depth first",
            self.depth, other.depth
        );
    }

    /// Compose with a smooth univariate function given its derivatives.
    ///
    /// `derivs[k]` must be the k-th derivative of the function at
    /// `self.value()`, for `k = 0..=depth`.  The result is the truncated
    /// Taylor expansion in the nilpotent part, which is exact on jets.
    fn compose(self, derivs: &[f64]) -> Self {
        let d = self.depth as usize;
        debug_assert!(derivs.len() > d);
        let mut nil = self;
        nil.coeff[0] = 0.0;
        let mut acc = Self::c(derivs[d] / FACTORIAL[d], d);
        for k in (0..d).rev() {
            acc = acc * nil + Self::c(derivs[k] / FACTORIAL[k], d);
        }
        acc
    }

    /// Multiplicative inverse (IEEE semantics at zero value).
    pub fn recip(self) -> Self {
        let a = self.value();
        let i = 1.0 / a;
        self.compose(&[
            i,
            -i * i,
            2.0 * i * i * i,
            -6.0 * i * i * i * i,
            24.0 * i * i * i * i * i,
        ])
    }

    /// Square root (NaN propagates for negative values).
    pub fn sqrt(self) -> Self {
        let r = self.value().sqrt();
        let i = 1.0 / r;
        self.compose(&[
            r,
            0.5 * i,
            -0.25 * i / r / r,
            0.375 * i / r / r / r / r,
            -0.9375 * i / r / r / r / r / r / r,
        ])
    }

    /// Natural exponential.
    pub fn exp(self) -> Self {
        let e = self.value().exp();
        self.compose(&[e, e, e, e, e])
    }

    /// Natural logarithm (NaN propagates outside the domain).
    pub fn ln(self) -> Self {
        let a = self.value();
        let i = 1.0 / a;
        self.compose(&[
            a.ln(),
            i,
            -i * i,
            2.0 * i * i * i,
            -6.0 * i * i * i * i,
        ])
    }

    /// Sine.
    pub fn sin(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s])
    }

    /// Cosine.
    pub fn cos(self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c])
    }

    /// Integer power.
    pub fn powi(self, n: i32) -> Self {
        let a = self.value();
        let mut derivs = [0.0; MAX_NEST + 1];
        let mut factor = 1.0;
        for (k, d) in derivs.iter_mut().enumerate() {
            *d = factor * a.powi(n - k as i32);
            factor *= (n - k as i32) as f64;
        }
        self.compose(&derivs)
    }
}

impl fmt::Debug for DiffScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffScalar(depth {}: {}", self.depth, self.coeff[0])?;
        for m in 1..self.active() {
            if self.coeff[m] != 0.0 {
                write!(f, ", [{:b}]={}", m, self.coeff[m])?;
            }
        }
        write!(f, ")")
    }
}

impl Add for DiffScalar {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.check_depth(&rhs);
        for m in 0..self.active() {
            self.coeff[m] += rhs.coeff[m];
        }
        self
    }
}

impl Sub for DiffScalar {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.check_depth(&rhs);
        for m in 0..self.active() {
            self.coeff[m] -= rhs.coeff[m];
        }
        self
    }
}

impl Neg for DiffScalar {
    type Output = Self;
    fn neg(mut self) -> Self {
        for m in 0..self.active() {
            self.coeff[m] = -self.coeff[m];
        }
        self
    }
}

impl Mul for DiffScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check_depth(&rhs);
        let n = self.active();
        let mut out = [0.0; SLOTS];
        for i in 0..n {
            let a = self.coeff[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..n {
                // Generators are nilpotent: masks sharing a bit annihilate.
                if i & j == 0 {
                    out[i | j] += a * rhs.coeff[j];
                }
            }
        }
        Self {
            coeff: out,
            depth: self.depth,
        }
    }
}

impl Div for DiffScalar {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Self) -> Self {
        self.check_depth(&rhs);
        self * rhs.recip()
    }
}

impl Add<f64> for DiffScalar {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.coeff[0] += rhs;
        self
    }
}

impl Sub<f64> for DiffScalar {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.coeff[0] -= rhs;
        self
    }
}

impl Mul<f64> for DiffScalar {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for m in 0..self.active() {
            self.coeff[m] *= rhs;
        }
        self
    }
}

impl Div<f64> for DiffScalar {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self * (1.0 / rhs)
    }
}

impl Mul<DiffScalar> for f64 {
    type Output = DiffScalar;
    fn mul(self, rhs: DiffScalar) -> DiffScalar {
        rhs * self
    }
}

/// A pure, deterministic field `R^arity -> R^codomain`, evaluable on jets.
///
/// The evaluator must be written purely in [`DiffScalar`] arithmetic so that
/// it works at every nesting depth.  Arity, codomain, depth uniformity, and
/// finiteness of the outputs are enforced by [`FieldHandle::eval`].
#[derive(Clone)]
#[allow(clippy::type_complexity)]
pub struct FieldHandle {
    arity: usize,
    codomain: usize,
    eval: Arc<dyn Fn(&[DiffScalar]) -> Vec<DiffScalar> + Send + Sync>,
}

impl fmt::Debug for FieldHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldHandle({} -> {})", self.arity, self.codomain)
    }
}

impl FieldHandle {
    /// Wrap an evaluator written in jet arithmetic.
    pub fn new<F>(arity: usize, codomain: usize, eval: F) -> Self
    where
        F: Fn(&[DiffScalar]) -> Vec<DiffScalar> + Send + Sync + 'static,
    {
        Self {
            arity,
            codomain,
            eval: Arc::new(eval),
        }
    }

    /// Domain dimension.
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Codomain dimension.
    pub fn codomain(&self) -> usize {
        self.codomain
    }

    /// Evaluate the field, validating the jet boundary conditions.
    pub fn eval(&self, inputs: &[DiffScalar]) -> Result<Vec<DiffScalar>, JetError> {
        if inputs.len() != self.arity {
            return Err(JetError::ArityMismatch {
                expected: self.arity,
                got: inputs.len(),
            });
        }
        let depth = inputs.first().map_or(0, |s| s.depth());
        for s in inputs {
            if s.depth() != depth {
                return Err(JetError::MixedDepths(depth, s.depth()));
            }
        }
        let out = (self.eval)(inputs);
        if out.len() != self.codomain {
            return Err(JetError::CodomainMismatch {
                expected: self.codomain,
                got: out.len(),
            });
        }
        for (i, s) in out.iter().enumerate() {
            if s.depth() != depth {
                return Err(JetError::OutputDepthMismatch {
                    component: i,
                    expected: depth,
                    got: s.depth(),
                });
            }
            if !s.is_finite() {
                return Err(JetError::NonFinite(i));
            }
        }
        Ok(out)
    }
}

/// Lift a real for nested differentiation: unit seed at every level.
///
/// After evaluating a univariate expression on the lifted value, the k-th
/// derivative is read back with [`nth_derivative`] for any `k <= depth`.
pub fn lift(x: f64, depth: usize) -> Result<DiffScalar, JetError> {
    if depth > MAX_DEPTH {
        return Err(JetError::DepthOutOfRange(depth));
    }
    let mut s = DiffScalar::c(x, depth);
    for level in 0..depth {
        s.coeff[1 << level] = 1.0;
    }
    Ok(s)
}

/// Read the order-`order` derivative carried by a jet.
///
/// Requires that the scalar was produced from inputs seeded with the same
/// direction on its first `order` levels (as [`lift`] and
/// [`directional_derivative`] arrange); the coefficient of the product of
/// those generators is exactly the order-`order` directional derivative.
pub fn nth_derivative(s: &DiffScalar, order: usize) -> Result<f64, JetError> {
    if order > MAX_DEPTH {
        return Err(JetError::DepthOutOfRange(order));
    }
    if order > s.depth() {
        return Err(JetError::OrderOutOfRange {
            order,
            depth: s.depth(),
        });
    }
    Ok(s.coefficient((1 << order) - 1))
}

/// Lift chart coordinates one level and seed a direction.
pub(crate) fn seed_coords(coords: &[DiffScalar], direction: &[f64]) -> Vec<DiffScalar> {
    debug_assert_eq!(coords.len(), direction.len());
    coords
        .iter()
        .zip(direction)
        .map(|(c, &v)| c.raise_seeded(v))
        .collect()
}

/// Split every component into (rest, top-level derivative).
pub(crate) fn split_derivative(outputs: &[DiffScalar]) -> (Vec<DiffScalar>, Vec<DiffScalar>) {
    let mut rest = Vec::with_capacity(outputs.len());
    let mut deriv = Vec::with_capacity(outputs.len());
    for &o in outputs {
        let (r, d) = o.extract();
        rest.push(r);
        deriv.push(d);
    }
    (rest, deriv)
}

/// Exact directional derivative of a field.
///
/// Evaluates `f` once with every coordinate lifted to `p[i] + v[i] * (e_1 +
/// ... + e_order)` and reads back the coefficient of `e_1 * ... * e_order`,
/// which equals the order-`order` derivative of `t -> f(p + t v)` at `t = 0`.
/// Order `0` returns the plain field values.
pub fn directional_derivative(
    f: &FieldHandle,
    p: &[f64],
    v: &[f64],
    order: usize,
) -> Result<Vec<f64>, JetError> {
    if order > MAX_DEPTH {
        return Err(JetError::DepthOutOfRange(order));
    }
    if p.len() != f.arity() {
        return Err(JetError::ArityMismatch {
            expected: f.arity(),
            got: p.len(),
        });
    }
    if v.len() != p.len() {
        return Err(JetError::DirectionMismatch {
            expected: p.len(),
            got: v.len(),
        });
    }
    let inputs: Vec<DiffScalar> = p
        .iter()
        .zip(v)
        .map(|(&x, &slope)| {
            let mut s = DiffScalar::c(x, order);
            for level in 0..order {
                s.coeff[1 << level] = slope;
            }
            s
        })
        .collect();
    let out = f.eval(&inputs)?;
    out.iter().map(|s| nth_derivative(s, order)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1.0)
    }

    #[test]
    fn square_of_lifted_value_carries_slope() {
        let x = lift(3.0, 1).unwrap();
        let y = x * x;
        assert_eq!(y.value(), 9.0);
        assert_eq!(nth_derivative(&y, 1).unwrap(), 6.0);
    }

    #[test]
    fn sine_second_derivative_at_zero_vanishes() {
        let y = lift(0.0, 2).unwrap().sin();
        assert!(nth_derivative(&y, 2).unwrap().abs() < 1e-15);
    }

    #[test]
    fn exp_third_derivative_is_e() {
        let y = lift(1.0, 3).unwrap().exp();
        let e = std::f64::consts::E;
        assert!(rel_err(nth_derivative(&y, 3).unwrap(), e) < 1e-13);
    }

    #[test]
    fn two_variable_first_derivatives() {
        let f = FieldHandle::new(2, 2, |x| vec![x[0] * x[1], x[0] + x[1]]);
        let d = directional_derivative(&f, &[2.0, 3.0], &[1.0, 0.0], 1).unwrap();
        assert_eq!(d, vec![3.0, 1.0]);
    }

    #[test]
    fn cubic_third_derivative() {
        let f = FieldHandle::new(1, 1, |x| vec![x[0] * x[0] * x[0]]);
        let d = directional_derivative(&f, &[2.0], &[1.0], 3).unwrap();
        assert!((d[0] - 6.0).abs() < 1e-13);
    }

    #[test]
    fn cone_component_polar_second_derivative() {
        // x^1 = u sin(theta) cos(phi); at (2, pi/2, 0) the second theta
        // derivative is -u sin(theta) cos(phi) = -2.
        let f = FieldHandle::new(3, 1, |x| vec![x[0] * x[1].sin() * x[2].cos()]);
        let p = [2.0, std::f64::consts::FRAC_PI_2, 0.0];
        let d = directional_derivative(&f, &p, &[0.0, 1.0, 0.0], 2).unwrap();
        assert!((d[0] + 2.0).abs() < 1e-13);
    }

    #[test]
    fn depth_out_of_range_is_rejected() {
        assert!(matches!(lift(1.0, 4), Err(JetError::DepthOutOfRange(4))));
        assert!(matches!(
            DiffScalar::constant(1.0, 5),
            Err(JetError::DepthOutOfRange(5))
        ));
    }

    #[test]
    fn order_beyond_carried_depth_is_rejected() {
        let s = lift(1.0, 1).unwrap();
        assert!(matches!(
            nth_derivative(&s, 2),
            Err(JetError::OrderOutOfRange { order: 2, depth: 1 })
        ));
    }

    #[test]
    fn arity_and_direction_mismatches_are_rejected() {
        let f = FieldHandle::new(2, 1, |x| vec![x[0] + x[1]]);
        assert!(matches!(
            directional_derivative(&f, &[1.0], &[1.0], 1),
            Err(JetError::ArityMismatch { .. })
        ));
        assert!(matches!(
            directional_derivative(&f, &[1.0, 2.0], &[1.0], 1),
            Err(JetError::DirectionMismatch { .. })
        ));
    }

    #[test]
    fn mixed_input_depths_are_rejected() {
        let f = FieldHandle::new(2, 1, |x| vec![x[0] + x[1]]);
        let a = lift(1.0, 1).unwrap();
        let b = lift(1.0, 2).unwrap();
        assert!(matches!(
            f.eval(&[a, b]),
            Err(JetError::MixedDepths(1, 2))
        ));
    }

    #[test]
    fn non_finite_evaluation_is_reported() {
        let f = FieldHandle::new(1, 1, |x| vec![x[0].recip()]);
        let zero = lift(0.0, 1).unwrap();
        assert!(matches!(f.eval(&[zero]), Err(JetError::NonFinite(0))));
    }

    #[test]
    fn sqrt_and_recip_derivatives() {
        let y = lift(4.0, 1).unwrap().sqrt();
        assert!((nth_derivative(&y, 1).unwrap() - 0.25).abs() < 1e-15);
        let z = lift(2.0, 2).unwrap().recip();
        assert!((nth_derivative(&z, 2).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mixed_second_derivatives_commute() {
        // f(u, v) = sin(u v) + u^3 exp(v); compare d_u d_v against d_v d_u.
        let eval = |x: &[DiffScalar]| {
            vec![(x[0] * x[1]).sin() + x[0] * x[0] * x[0] * x[1].exp()]
        };
        let p = [0.7_f64, -0.4];
        let order = |first: usize, second: usize| -> f64 {
            let mut coords: Vec<DiffScalar> =
                p.iter().map(|&x| DiffScalar::c(x, 0)).collect();
            let mut dir1 = [0.0; 2];
            dir1[first] = 1.0;
            coords = seed_coords(&coords, &dir1);
            let mut dir2 = [0.0; 2];
            dir2[second] = 1.0;
            coords = seed_coords(&coords, &dir2);
            let out = eval(&coords);
            let (_, d2) = out[0].extract();
            let (_, d12) = d2.extract();
            d12.value()
        };
        let uv = order(0, 1);
        let vu = order(1, 0);
        assert!((uv - vu).abs() < 1e-12 * uv.abs().max(1.0));
    }

    /// Analytic derivatives of c0 + c1 x + c2 x^2 + c3 x^3.
    fn poly_deriv(c: [f64; 4], x: f64, order: usize) -> f64 {
        match order {
            0 => c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x,
            1 => c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x,
            2 => 2.0 * c[2] + 6.0 * c[3] * x,
            3 => 6.0 * c[3],
            _ => unreachable!(),
        }
    }

    proptest! {
        #[test]
        fn cubic_polynomials_differentiate_exactly(
            c in proptest::array::uniform4(-5.0_f64..5.0),
            x in -3.0_f64..3.0,
            order in 0_usize..=3,
        ) {
            let f = FieldHandle::new(1, 1, move |v| {
                let x = v[0];
                vec![
                    DiffScalar::c(c[0], x.depth())
                        + c[1] * x
                        + c[2] * x * x
                        + c[3] * x * x * x,
                ]
            });
            let got = directional_derivative(&f, &[x], &[1.0], order).unwrap()[0];
            let want = poly_deriv(c, x, order);
            prop_assert!(rel_err(got, want) < 1e-13);
        }

        #[test]
        fn product_rule_holds(
            c in proptest::array::uniform4(-3.0_f64..3.0),
            d in proptest::array::uniform4(-3.0_f64..3.0),
            x in -2.0_f64..2.0,
        ) {
            let f = move |s: DiffScalar| {
                DiffScalar::c(c[0], s.depth()) + c[1] * s + c[2] * s * s + c[3] * s * s * s
            };
            let g = move |s: DiffScalar| {
                DiffScalar::c(d[0], s.depth()) + d[1] * s + d[2] * s * s + d[3] * s * s * s
            };
            let s = lift(x, 1).unwrap();
            let got = nth_derivative(&(f(s) * g(s)), 1).unwrap();
            let want = poly_deriv(c, x, 1) * poly_deriv(d, x, 0)
                + poly_deriv(c, x, 0) * poly_deriv(d, x, 1);
            prop_assert!(rel_err(got, want) < 1e-12);
        }

        #[test]
        fn chain_rule_through_sine(
            c in proptest::array::uniform4(-2.0_f64..2.0),
            x in -2.0_f64..2.0,
        ) {
            let s = lift(x, 2).unwrap();
            let inner = DiffScalar::c(c[0], 2)
                + c[1] * s
                + c[2] * s * s
                + c[3] * s * s * s;
            let y = inner.sin();
            let p0 = poly_deriv(c, x, 0);
            let p1 = poly_deriv(c, x, 1);
            let p2 = poly_deriv(c, x, 2);
            let want1 = p0.cos() * p1;
            let want2 = -p0.sin() * p1 * p1 + p0.cos() * p2;
            prop_assert!(rel_err(nth_derivative(&y, 1).unwrap(), want1) < 1e-12);
            prop_assert!(rel_err(nth_derivative(&y, 2).unwrap(), want2) < 1e-12);
        }

        #[test]
        fn depth_zero_matches_plain_arithmetic(
            a in -10.0_f64..10.0,
            b in 0.1_f64..10.0,
        ) {
            let ja = DiffScalar::c(a, 0);
            let jb = DiffScalar::c(b, 0);
            prop_assert_eq!((ja + jb).value(), a + b);
            prop_assert_eq!((ja - jb).value(), a - b);
            prop_assert_eq!((ja * jb).value(), a * b);
            // Division goes through the reciprocal series, so allow one ulp.
            prop_assert!(((ja / jb).value() - a / b).abs() <= 2.0 * f64::EPSILON * (a / b).abs());
            prop_assert_eq!(jb.sqrt().value(), b.sqrt());
        }
    }
}
