//! The Legendre transformation as a projective duality: quadric duals, the
//! affine chart `Π = −1`, the pointwise momentum map and constrained duals
//! parametrized by multipliers.

mod quadric;
mod surface;

use crate::coords::{GraphVar, Label};
use crate::error::{Error, Result};
use crate::exterior::{is_decomposable, MultiIndex, PolyForm, Polyvector, TargetSpace};
use crate::lagrangian::{plucker_polynomials, HomogeneousLagrangian, DECOMPOSABLE_TOL};
use crate::poly::Polynomial;

pub use quadric::{
    affine_chart, detect_degeneracy, double_dual_check, dual_quadric, quadric_polynomial,
    scalar_dual_labels, tangent_hyperplane, RankReport,
};
pub use surface::ImplicitSurface;

/// Relative tolerance for accepting a point as lying on the graph variety.
pub const ON_VARIETY_TOL: f64 = 1e-10;

/// A covector `(Π, P)` on `ℝ ⊕ Λ^N T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumPoint {
    pub pi: f64,
    pub p: PolyForm,
    /// The momentum map is not single valued here; `p` is one representative.
    pub multivalued: bool,
    /// Coefficients `(α, β, …)` of `α dF + Σ β dπ` that produced the point.
    pub multipliers: Vec<f64>,
    /// `Π = 0`: the hyperplane has no representative in the chart `Π = −1`.
    pub at_infinity: bool,
}

impl MomentumPoint {
    pub fn new(pi: f64, p: PolyForm) -> Self {
        MomentumPoint {
            pi,
            p,
            multivalued: false,
            multipliers: Vec::new(),
            at_infinity: pi == 0.0,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        MomentumPoint {
            pi: self.pi * c,
            p: self.p.scaled(&c),
            multipliers: self.multipliers.iter().map(|m| m * c).collect(),
            ..self.clone()
        }
    }

    /// The representative with `Π = −1`, or `self` when `Π = 0`.
    pub fn normalized(&self) -> Self {
        if self.pi == 0.0 {
            let mut out = self.clone();
            out.at_infinity = true;
            return out;
        }
        let mut out = self.scaled(-1.0 / self.pi);
        out.pi = -1.0;
        out
    }

    pub fn get(&self, space: TargetSpace, label: &Label) -> f64 {
        label.to_index(space).map(|i| self.p.get(&i)).unwrap_or(0.0)
    }

    /// `⟨P, ξ⟩`, the momentum part paired with a polyvector.
    pub fn pairing(&self, xi: &Polyvector) -> Result<f64> {
        crate::exterior::pair(&self.p, xi)
    }
}

/// The momentum of a decomposable polyvector.
///
/// Uses `P_I = ∂Λ/∂X^I` with `Π = −1` for the chart extension of `Λ`. When
/// Plücker relations are present the image is a family `α dF + β dπ`; the
/// returned point is the member with zero Plücker multipliers, and the
/// `multivalued` flag is set.
pub fn legendre_map(lam: &HomogeneousLagrangian, xi: &Polyvector) -> Result<MomentumPoint> {
    if !is_decomposable(xi, DECOMPOSABLE_TOL) {
        return Err(Error::Constraint("polyvector is not decomposable".into()));
    }
    let space = lam.space();
    let p = lam.gradient(xi)?;
    let mut m = MomentumPoint::new(-1.0, p);
    let relations = plucker_polynomials(space).len();
    if relations > 0 {
        m.multivalued = true;
        let vol = xi.get(&space.volume_index());
        m.multipliers = std::iter::once(-1.0 / vol)
            .chain(std::iter::repeat_n(0.0, relations))
            .collect();
    }
    Ok(m)
}

fn graph_value(space: TargetSpace, lambda: f64, x: &Polyvector, v: &GraphVar) -> f64 {
    match v {
        GraphVar::Lambda => lambda,
        GraphVar::X(l) => l.to_index(space).map(|i| x.get(&i)).unwrap_or(0.0),
    }
}

fn check_on(
    space: TargetSpace,
    p: &Polynomial<GraphVar>,
    lambda: f64,
    x: &Polyvector,
) -> Result<()> {
    let (value, scale) = p.evaluate_with_scale(|v| graph_value(space, lambda, x, v));
    let residual = if scale == 0.0 {
        value.abs()
    } else {
        value.abs() / scale
    };
    if residual > ON_VARIETY_TOL {
        return Err(Error::Membership { residual });
    }
    Ok(())
}

/// The covector `α dF + Σ_k β_k dπ_k` at a point `(Λ, X)` of the variety cut
/// out by `F` and the Plücker relations, normalized to `Π = −1` when possible.
pub fn constrained_dual_sample(
    f: &Polynomial<GraphVar>,
    plucker: &[Polynomial<GraphVar>],
    lambda: f64,
    x: &Polyvector,
    multipliers: &[f64],
) -> Result<MomentumPoint> {
    if multipliers.len() != 1 + plucker.len() {
        return Err(Error::DimensionMismatch {
            expected: 1 + plucker.len(),
            found: multipliers.len(),
        });
    }
    let space = TargetSpace::new(x.dim() - x.grade(), x.grade());
    check_on(space, f, lambda, x)?;
    for p in plucker {
        check_on(space, p, lambda, x)?;
    }
    let covector = |v: &GraphVar| -> f64 {
        let eval = |p: &Polynomial<GraphVar>| {
            p.derivative(v)
                .evaluate(|w| graph_value(space, lambda, x, w))
        };
        multipliers[0] * eval(f)
            + plucker
                .iter()
                .zip(&multipliers[1..])
                .map(|(p, b)| b * eval(p))
                .sum::<f64>()
    };
    let pi = covector(&GraphVar::Lambda);
    let entries = MultiIndex::all(space.dim(), space.n_worldsheet).map(|i| {
        let c = covector(&GraphVar::x(space, &i));
        (i, c)
    });
    let p = PolyForm::from_coeffs(space.dim(), space.n_worldsheet, entries)?;
    let mut m = MomentumPoint::new(pi, p);
    m.multipliers = multipliers.to_vec();
    m.multivalued = !plucker.is_empty();
    Ok(m.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{graph_tangent, JetSample};
    use crate::lagrangian::{homogenize, maxwell, LagrangianDensity};
    use nalgebra::{DMatrix, DVector};

    fn kg() -> LagrangianDensity {
        LagrangianDensity::quadratic_scalar(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
            Polynomial::default(),
        )
        .unwrap()
    }

    #[test]
    fn kg_momenta_for_unit_time_derivative() {
        let space = TargetSpace::new(1, 2);
        let xi = graph_tangent(&JetSample::from_derivatives(DMatrix::from_row_slice(
            1,
            2,
            &[1.0, 0.0],
        )));
        let lam = homogenize(&kg());
        let m = legendre_map(&lam, &xi).unwrap();
        // p_{φ1} = P⁰ on {φ, x1}, p_{φ0} = P¹ on {φ, x0}, p_{01} = P^φ
        assert_eq!(m.p.get(&space.field_slot(0, 0)), 1.0);
        assert_eq!(m.p.get(&space.field_slot(0, 1)), 0.0);
        assert_eq!(m.p.get(&space.volume_index()), -0.5);
        assert_eq!(m.pairing(&xi).unwrap(), 0.5);
        assert_eq!(lam.evaluate(&xi).unwrap(), 0.5);
        assert!(!m.multivalued);
    }

    #[test]
    fn zero_jet_has_zero_momenta() {
        let xi = graph_tangent(&JetSample::from_derivatives(DMatrix::zeros(1, 2)));
        let m = legendre_map(&homogenize(&kg()), &xi).unwrap();
        assert!(m.p.is_zero());
    }

    #[test]
    fn rejects_non_decomposable() {
        let space = maxwell::space();
        let v = Polyvector::from_coeffs(
            4,
            2,
            [
                (MultiIndex::new(vec![0, 1]).unwrap(), 1.0),
                (space.volume_index(), 1.0),
            ],
        )
        .unwrap();
        let ed = homogenize(&LagrangianDensity::maxwell_1p1(0.25, Polynomial::default()));
        assert!(matches!(legendre_map(&ed, &v), Err(Error::Constraint(_))));
    }

    #[test]
    fn constrained_sample_projective_and_off_variety() {
        let c = 0.5;
        let jet =
            JetSample::from_derivatives(DMatrix::from_row_slice(2, 2, &[0.3, -0.8, 1.1, 0.4]));
        let x = graph_tangent(&jet);
        let f = maxwell::graph_polynomial(c, 0.0);
        let pl = [maxwell::plucker()];
        let strength = crate::lagrangian::field_strength(&jet.jet);
        let lambda = c * strength * strength;
        let a = constrained_dual_sample(&f, &pl, lambda, &x, &[0.7, -0.2]).unwrap();
        let b = constrained_dual_sample(&f, &pl, lambda, &x, &[-2.1, 0.6]).unwrap();
        assert!(a.p.max_abs_diff(&b.p) < 1e-14);
        assert!(a.multivalued);
        assert!(matches!(
            constrained_dual_sample(&f, &pl, lambda + 1.0, &x, &[1.0, 0.0]),
            Err(Error::Membership { .. })
        ));
        // pure Plücker direction has Π = 0
        let inf = constrained_dual_sample(&f, &pl, lambda, &x, &[0.0, 1.0]).unwrap();
        assert!(inf.at_infinity);
    }
}
