//! Lagrangian densities, their degree-1 homogenization on decomposable
//! polyvectors, and the projective graph variety.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::coords::{GraphVar, Label, Var};
use crate::error::{Error, Result};
use crate::exterior::{
    is_decomposable, plucker_residuals, JetSample, MultiIndex, PolyForm, Polyvector, TargetSpace,
};
use crate::poly::Polynomial;

/// Relative Plücker tolerance used to accept an input polyvector as decomposable.
pub const DECOMPOSABLE_TOL: f64 = 1e-9;

/// Relative threshold on singular values for numerical rank.
pub const RANK_TOL: f64 = 1e-10;

/// A point `(x, φ)` of the target space.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePoint {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
}

impl BasePoint {
    pub fn origin(space: TargetSpace) -> Self {
        BasePoint {
            x: vec![0.0; space.n_worldsheet],
            phi: vec![0.0; space.n_fields],
        }
    }

    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.phi.len(), self.x.len())
    }

    pub fn value(&self, v: &Var) -> f64 {
        match v {
            Var::X(i) => self.x.get(*i).copied().unwrap_or(0.0),
            Var::Phi(a) => self.phi.get(*a).copied().unwrap_or(0.0),
            Var::P(_) | Var::Pi => 0.0,
        }
    }
}

impl From<&JetSample> for BasePoint {
    fn from(jet: &JetSample) -> Self {
        BasePoint {
            x: jet.x.clone(),
            phi: jet.phi.clone(),
        }
    }
}

/// A potential term as a polynomial in `x^i` and `φ^a`.
pub type Potential = Polynomial<Var>;

pub fn eval_potential(p: &Potential, base: &BasePoint) -> f64 {
    p.evaluate(|v| base.value(v))
}

/// Arbitrary density given as a callback on jets. The callback must be pure.
#[derive(Clone)]
pub struct CustomDensity(pub Arc<dyn Fn(&JetSample) -> f64 + Send + Sync>);

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomDensity(..)")
    }
}

#[derive(Clone, Debug)]
pub enum DensityKind {
    /// `½ g^{ij} ∂_iφ ∂_jφ + Ψ(x, φ)` for a single scalar field.
    QuadraticScalar {
        metric: DMatrix<f64>,
        potential: Potential,
    },
    /// `C F₀₁² + Φ(A, x)` with `C = 2 C₀` and `F₀₁ = ∂₀A₁ − ∂₁A₀`.
    Maxwell1p1 {
        c0: f64,
        potential: Potential,
    },
    Custom(CustomDensity),
}

#[derive(Clone, Debug)]
pub struct LagrangianDensity {
    pub n_worldsheet: usize,
    pub n_fields: usize,
    pub kind: DensityKind,
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::Constraint("matrix is not symmetric".into()));
    }
    Ok(())
}

impl LagrangianDensity {
    pub fn quadratic_scalar(metric: DMatrix<f64>, potential: Potential) -> Result<Self> {
        check_symmetric(&metric)?;
        Ok(LagrangianDensity {
            n_worldsheet: metric.nrows(),
            n_fields: 1,
            kind: DensityKind::QuadraticScalar { metric, potential },
        })
    }

    pub fn maxwell_1p1(c0: f64, potential: Potential) -> Self {
        LagrangianDensity {
            n_worldsheet: 2,
            n_fields: 2,
            kind: DensityKind::Maxwell1p1 { c0, potential },
        }
    }

    pub fn custom<F>(n_worldsheet: usize, n_fields: usize, f: F) -> Self
    where
        F: Fn(&JetSample) -> f64 + Send + Sync + 'static,
    {
        LagrangianDensity {
            n_worldsheet,
            n_fields,
            kind: DensityKind::Custom(CustomDensity(Arc::new(f))),
        }
    }

    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.n_fields, self.n_worldsheet)
    }

    fn check_jet(&self, jet: &JetSample) -> Result<()> {
        if jet.space() != self.space() {
            return Err(Error::DimensionMismatch {
                expected: self.space().dim(),
                found: jet.space().dim(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, jet: &JetSample) -> Result<f64> {
        self.check_jet(jet)?;
        let base = BasePoint::from(jet);
        Ok(match &self.kind {
            DensityKind::QuadraticScalar { metric, potential } => {
                let f = jet.jet.row(0).transpose();
                0.5 * (f.transpose() * metric * &f)[(0, 0)] + eval_potential(potential, &base)
            }
            DensityKind::Maxwell1p1 { c0, potential } => {
                let f01 = field_strength(&jet.jet);
                2.0 * c0 * f01 * f01 + eval_potential(potential, &base)
            }
            DensityKind::Custom(c) => (c.0)(jet),
        })
    }

    /// `∂L/∂(∂_iφ^a)` as an `n_fields × n_worldsheet` matrix.
    pub fn jet_gradient(&self, jet: &JetSample) -> Result<DMatrix<f64>> {
        self.check_jet(jet)?;
        Ok(match &self.kind {
            DensityKind::QuadraticScalar { metric, .. } => {
                let f = jet.jet.row(0).transpose();
                let g = metric * f;
                DMatrix::from_row_slice(1, g.len(), g.as_slice())
            }
            DensityKind::Maxwell1p1 { c0, .. } => {
                let g = 4.0 * c0 * field_strength(&jet.jet);
                let mut out = DMatrix::zeros(2, 2);
                out[(1, 0)] = g;
                out[(0, 1)] = -g;
                out
            }
            DensityKind::Custom(c) => {
                let mut out = DMatrix::zeros(self.n_fields, self.n_worldsheet);
                for a in 0..self.n_fields {
                    for i in 0..self.n_worldsheet {
                        let h = 1e-5 * (1.0 + jet.jet[(a, i)].abs());
                        let mut plus = jet.clone();
                        plus.jet[(a, i)] += h;
                        let mut minus = jet.clone();
                        minus.jet[(a, i)] -= h;
                        out[(a, i)] = ((c.0)(&plus) - (c.0)(&minus)) / (2.0 * h);
                    }
                }
                out
            }
        })
    }
}

/// `F₀₁ = ∂₀A₁ − ∂₁A₀` from a 2×2 jet of potentials.
pub fn field_strength(jet: &DMatrix<f64>) -> f64 {
    jet[(1, 0)] - jet[(0, 1)]
}

/// Reads `∂_iφ^a = (−1)^i X^{{a} ∪ W∖{i}} / X^W` off a polyvector.
pub fn jet_from_polyvector(v: &Polyvector, base: &BasePoint) -> Result<JetSample> {
    let jet = chart_jet(v, base.space())?;
    if !is_decomposable(v, DECOMPOSABLE_TOL) {
        return Err(Error::Constraint("polyvector is not decomposable".into()));
    }
    JetSample::new(base.x.clone(), base.phi.clone(), jet)
}

/// The graph-chart ratios, without the decomposability check.
fn chart_jet(v: &Polyvector, space: TargetSpace) -> Result<DMatrix<f64>> {
    if v.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: v.dim(),
        });
    }
    if v.grade() != space.n_worldsheet {
        return Err(Error::GradeMismatch {
            expected: space.n_worldsheet,
            found: v.grade(),
        });
    }
    let vol = v.get(&space.volume_index());
    if vol == 0.0 {
        return Err(Error::Chart);
    }
    Ok(DMatrix::from_fn(
        space.n_fields,
        space.n_worldsheet,
        |a, i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * v.get(&space.field_slot(a, i)) / vol
        },
    ))
}

/// The degree-1 function `Λ(υ) = L(jet(υ)) · dx⁰∧…∧dx^{N−1}(υ)`.
#[derive(Clone, Debug)]
pub struct HomogeneousLagrangian {
    pub density: LagrangianDensity,
    pub base: BasePoint,
}

pub fn homogenize(density: &LagrangianDensity) -> HomogeneousLagrangian {
    HomogeneousLagrangian {
        base: BasePoint::origin(density.space()),
        density: density.clone(),
    }
}

impl HomogeneousLagrangian {
    pub fn at(mut self, base: BasePoint) -> Self {
        self.base = base;
        self
    }

    pub fn space(&self) -> TargetSpace {
        self.density.space()
    }

    /// `Λ(υ)` on decomposable polyvectors.
    pub fn evaluate(&self, v: &Polyvector) -> Result<f64> {
        let jet = jet_from_polyvector(v, &self.base)?;
        Ok(self.density.evaluate(&jet)? * v.get(&self.space().volume_index()))
    }

    /// The extension of `Λ` to every polyvector on the graph chart obtained by
    /// reading the jet through the chart ratios.
    pub fn extension(&self, v: &Polyvector) -> Result<f64> {
        let jet = JetSample::new(
            self.base.x.clone(),
            self.base.phi.clone(),
            chart_jet(v, self.space())?,
        )?;
        Ok(self.density.evaluate(&jet)? * v.get(&self.space().volume_index()))
    }

    /// Gradient `∂Λ/∂X^I` of [`extension`](Self::extension).
    ///
    /// With `f = jet(υ)` and `L_f = ∂L/∂f`: the volume coordinate receives
    /// `L − Σ f L_f`, the coordinate `{a} ∪ W∖{i}` receives `(−1)^i L_f[a,i]`,
    /// and all other coordinates receive zero.
    pub fn gradient(&self, v: &Polyvector) -> Result<PolyForm> {
        let space = self.space();
        let jet = JetSample::new(
            self.base.x.clone(),
            self.base.phi.clone(),
            chart_jet(v, space)?,
        )?;
        let l = self.density.evaluate(&jet)?;
        let lf = self.density.jet_gradient(&jet)?;
        let mut entries = vec![(space.volume_index(), l - jet.jet.dot(&lf))];
        for a in 0..space.n_fields {
            for i in 0..space.n_worldsheet {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                entries.push((space.field_slot(a, i), sign * lf[(a, i)]));
            }
        }
        PolyForm::from_coeffs(space.dim(), space.n_worldsheet, entries)
    }
}

/// A quadric `{X : Xᵀ G X = 0}` in projective space.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricVariety {
    g: DMatrix<f64>,
}

impl QuadricVariety {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&g)?;
        Ok(QuadricVariety { g })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim_ambient(&self) -> usize {
        self.g.nrows()
    }

    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.g * x)[(0, 0)]
    }

    pub fn singular_values(&self) -> DVector<f64> {
        self.g.clone().svd(false, false).singular_values
    }

    pub fn rank(&self) -> usize {
        let sv = self.singular_values();
        let top = sv.max();
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > RANK_TOL * top).count()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.rank() == self.dim_ambient()
    }
}

/// `ǧ^{ij} = (−1)^{i+j} g^{ij}`.
pub fn check_metric(g: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| {
        if (i + j) % 2 == 0 {
            g[(i, j)]
        } else {
            -g[(i, j)]
        }
    })
}

/// Homogeneous coordinates `[Λ : X̄_φ : X̄_0 : … : X̄_{N−1}]` of a scalar-field
/// polyvector, the ordering of the graph quadric.
pub fn scalar_quadric_labels(space: TargetSpace) -> Vec<GraphVar> {
    let mut out = vec![GraphVar::Lambda, GraphVar::x(space, &space.volume_index())];
    out.extend((0..space.n_worldsheet).map(|i| GraphVar::x(space, &space.field_slot(0, i))));
    out
}

pub fn scalar_quadric_point(space: TargetSpace, lambda: f64, v: &Polyvector) -> DVector<f64> {
    let mut vals = vec![lambda, v.get(&space.volume_index())];
    vals.extend((0..space.n_worldsheet).map(|i| v.get(&space.field_slot(0, i))));
    DVector::from_vec(vals)
}

/// The graph quadric of a quadratic scalar density at a base point:
/// `G[Λ, X̄_φ] = ½`, `G[X̄_φ, X̄_φ] = −Ψ`, field block `−½ ǧ^{ij}`.
pub fn graph_variety(density: &LagrangianDensity, base: &BasePoint) -> Result<QuadricVariety> {
    let DensityKind::QuadraticScalar { metric, potential } = &density.kind else {
        return Err(Error::Unsupported(
            "graph quadric requires a quadratic scalar density".into(),
        ));
    };
    let n = metric.nrows();
    let psi = eval_potential(potential, base);
    let gc = check_metric(metric);
    let mut g = DMatrix::zeros(n + 2, n + 2);
    g[(0, 1)] = 0.5;
    g[(1, 0)] = 0.5;
    g[(1, 1)] = -psi;
    g.view_mut((2, 2), (n, n)).copy_from(&(gc * -0.5));
    QuadricVariety::new(g)
}

/// Symbolic polyvector whose coefficient on `e_I` is the variable `X^I`.
pub fn symbolic_polyvector(space: TargetSpace) -> Polyvector<Polynomial<GraphVar>> {
    let n = space.n_worldsheet;
    Polyvector::from_coeffs(
        space.dim(),
        n,
        MultiIndex::all(space.dim(), n).map(|i| {
            let var = GraphVar::x(space, &i);
            (i, Polynomial::var(var))
        }),
    )
    .expect("indices generated in range")
}

/// Plücker relations as polynomials in the coordinates `X^I`.
pub fn plucker_polynomials(space: TargetSpace) -> Vec<Polynomial<GraphVar>> {
    let mut out: Vec<_> = plucker_residuals(&symbolic_polyvector(space))
        .into_iter()
        .filter(|p| !p.is_empty())
        .collect();
    out.sort_by(|a, b| {
        a.terms()
            .map(|(m, _)| m.clone())
            .cmp(b.terms().map(|(m, _)| m.clone()))
    });
    out.dedup();
    out
}

/// Coordinate labels of 1+1 electrodynamics (fields `A₀`, `A₁` on axes 0, 1).
pub mod maxwell {
    use super::*;
    use crate::coords::Axis;

    pub fn space() -> TargetSpace {
        TargetSpace::new(2, 2)
    }

    pub fn label(axes: &[Axis]) -> Label {
        Label::new(axes.to_vec()).expect("distinct axes")
    }

    /// `X^{0̲1̲}`.
    pub fn fields() -> Label {
        label(&[Axis::Field(0), Axis::Field(1)])
    }

    /// `X^{i̲j}`.
    pub fn mixed(i: usize, j: usize) -> Label {
        label(&[Axis::Field(i), Axis::Worldsheet(j)])
    }

    /// `X^{01}`.
    pub fn volume() -> Label {
        label(&[Axis::Worldsheet(0), Axis::Worldsheet(1)])
    }

    fn x(l: Label) -> Polynomial<GraphVar> {
        Polynomial::var(GraphVar::X(l))
    }

    /// `π = X^{0̲1̲}X^{01} − X^{0̲0}X^{1̲1} + X^{0̲1}X^{1̲0}`, half of the
    /// single `v ∧ v` coefficient.
    pub fn plucker() -> Polynomial<GraphVar> {
        &(&x(fields()) * &x(volume())) - &(&x(mixed(0, 0)) * &x(mixed(1, 1)))
            + &x(mixed(0, 1)) * &x(mixed(1, 0))
    }

    /// `F = Λ X^{01} − C (X^{0̲0} + X^{1̲1})² − Φ (X^{01})²` with the potential
    /// value `phi` at the base point. `(X^{0̲0} + X^{1̲1}) / X^{01}` is the
    /// field strength `F₀₁` on the graph chart.
    pub fn graph_polynomial(c: f64, phi: f64) -> Polynomial<GraphVar> {
        let strength = x(mixed(0, 0)) + x(mixed(1, 1));
        &(&Polynomial::var(GraphVar::Lambda) * &x(volume()))
            - &(strength.pow(2) * c)
            - x(volume()).pow(2) * phi
    }
}
