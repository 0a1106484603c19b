//! Equations of motion from the degeneracy condition `i_Ξ ω = α dη`.
//!
//! Phase space is `Λ^N T*` of the target space. Its axes are the target axes
//! (fields, then worldsheet) followed by one momentum axis `P_I` per grade-`N`
//! multi-index, in lexicographic order. The form is
//! `ω = Σ_I dP_I ∧ dq^I` and the tangent polyvector of a section is
//! `Ξ = ∧_i (∂/∂x^i + Σ_a f^a_i ∂/∂φ^a + Σ_K π^K_i ∂/∂P_K)`.

mod oracle;
mod report;
mod system;

use nalgebra::DMatrix;

use crate::coords::{Label, Var};
use crate::error::{Error, Result};
use crate::exterior::{
    interior, wedge_all, Coefficient, MultiIndex, PolyForm, Polyvector, TargetSpace,
};
use crate::legendre::ImplicitSurface;
use crate::poly::Polynomial;

pub use oracle::{euler_lagrange_residual, SpacetimeGrid};
pub use report::{ResidualReport, ResidualStat};
pub use system::{
    build_motion_system, redundancy_check, sample_independent_jets, Family, MotionSystem,
    RedundancyCertificate, Slot, SlotRole,
};

/// Coordinates of `Λ^N T*(target)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpace {
    pub space: TargetSpace,
    momenta: Vec<MultiIndex>,
}

impl PhaseSpace {
    pub fn new(space: TargetSpace) -> Self {
        PhaseSpace {
            space,
            momenta: MultiIndex::all(space.dim(), space.n_worldsheet).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim() + self.momenta.len()
    }

    pub fn momenta(&self) -> &[MultiIndex] {
        &self.momenta
    }

    pub fn momentum_position(&self, index: &MultiIndex) -> Option<usize> {
        self.momenta.binary_search(index).ok()
    }

    pub fn momentum_axis(&self, k: usize) -> usize {
        self.space.dim() + k
    }

    /// The phase-space coordinate named by axis `j`.
    pub fn slot_var(&self, j: usize) -> Var {
        let m = self.space.dim();
        if j < self.space.n_fields {
            Var::Phi(j)
        } else if j < m {
            Var::X(j - self.space.n_fields)
        } else {
            Var::p(self.space, &self.momenta[j - m])
        }
    }

    pub fn slot_of(&self, v: &Var) -> Option<usize> {
        match v {
            Var::Phi(a) => (*a < self.space.n_fields).then(|| self.space.field_axis(*a)),
            Var::X(i) => (*i < self.space.n_worldsheet).then(|| self.space.worldsheet_axis(*i)),
            Var::P(l) => {
                let idx = l.to_index(self.space).ok()?;
                self.momentum_position(&idx).map(|k| self.momentum_axis(k))
            }
            Var::Pi => None,
        }
    }

    pub fn slot_vars(&self) -> Vec<Var> {
        (0..self.dim()).map(|j| self.slot_var(j)).collect()
    }

    /// `ω = Σ_I dP_I ∧ dq^I`.
    pub fn omega<T: Coefficient>(&self) -> PolyForm<T> {
        let entries = self.momenta.iter().enumerate().map(|(k, idx)| {
            let mut axes = vec![self.momentum_axis(k)];
            axes.extend_from_slice(idx.axes());
            let (sorted, odd) =
                MultiIndex::from_unsorted(&axes).expect("momentum axis is distinct");
            (sorted, if odd { -T::one() } else { T::one() })
        });
        PolyForm::from_coeffs(self.dim(), self.space.n_worldsheet + 1, entries)
            .expect("valid indices")
    }

    /// `Ξ` built from field derivatives `f(a, i)` and momentum derivatives
    /// `dp(k, i)`, with `k` the momentum position.
    pub fn tangent<T: Coefficient>(
        &self,
        f: impl Fn(usize, usize) -> T,
        dp: impl Fn(usize, usize) -> T,
    ) -> Polyvector<T> {
        let factors: Vec<Polyvector<T>> = (0..self.space.n_worldsheet)
            .map(|i| {
                let mut comps = vec![T::zero(); self.dim()];
                comps[self.space.worldsheet_axis(i)] = T::one();
                for a in 0..self.space.n_fields {
                    comps[self.space.field_axis(a)] = f(a, i);
                }
                for k in 0..self.momenta.len() {
                    comps[self.momentum_axis(k)] = dp(k, i);
                }
                Polyvector::vector(&comps)
            })
            .collect();
        wedge_all(self.dim(), &factors).expect("consistent dimension")
    }

    /// Components of `i_Ξ ω` on every phase-space axis.
    pub fn interior_slots<T: Coefficient>(&self, xi: &Polyvector<T>) -> Result<Vec<T>> {
        let form = interior(xi, &self.omega::<T>())?;
        Ok((0..self.dim())
            .map(|j| form.get(&MultiIndex::single(j)))
            .collect())
    }
}

/// Symbolic entries of a first jet of a phase-space section.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetVar {
    /// `f^a_i = ∂φ^a/∂x^i`.
    F(usize, usize),
    /// `π^K_i = ∂P_K/∂x^i`.
    DP(Label, usize),
}

impl std::fmt::Display for JetVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JetVar::F(a, i) => write!(f, "f{a}_{i}"),
            JetVar::DP(l, i) => write!(f, "dP{l}_{i}"),
        }
    }
}

/// `i_Ξ ω` with polynomial coefficients in the jet variables.
pub fn symbolic_interior(ps: &PhaseSpace) -> Vec<Polynomial<JetVar>> {
    let labels: Vec<Label> = ps
        .momenta
        .iter()
        .map(|m| Label::from_index(ps.space, m))
        .collect();
    let xi = ps.tangent(
        |a, i| Polynomial::var(JetVar::F(a, i)),
        |k, i| Polynomial::var(JetVar::DP(labels[k].clone(), i)),
    );
    ps.interior_slots(&xi)
        .expect("grades match by construction")
}

/// A point of phase space with the first derivatives of a section through it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedJet {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    /// Momentum values `P_I`.
    pub p: PolyForm,
    /// `f[(a, i)] = ∂φ^a/∂x^i`.
    pub f: DMatrix<f64>,
    /// `pderiv[(k, i)] = ∂P_K/∂x^i`, rows in [`PhaseSpace::momenta`] order.
    pub pderiv: DMatrix<f64>,
}

impl ExtendedJet {
    pub fn zeros(ps: &PhaseSpace) -> Self {
        let s = ps.space;
        ExtendedJet {
            x: vec![0.0; s.n_worldsheet],
            phi: vec![0.0; s.n_fields],
            p: PolyForm::zero(s.dim(), s.n_worldsheet),
            f: DMatrix::zeros(s.n_fields, s.n_worldsheet),
            pderiv: DMatrix::zeros(ps.momenta.len(), s.n_worldsheet),
        }
    }

    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.phi.len(), self.x.len())
    }

    pub fn momentum(&self, index: &MultiIndex) -> f64 {
        self.p.get(index)
    }

    pub fn set_momentum(&mut self, index: &MultiIndex, value: f64) {
        let old = self.p.get(index);
        self.p.add_to(index.clone(), value - old);
    }

    /// Value of a phase-space variable at this point; `Π = −1`.
    pub fn value(&self, v: &Var) -> f64 {
        match v {
            Var::X(i) => self.x[*i],
            Var::Phi(a) => self.phi[*a],
            Var::Pi => -1.0,
            Var::P(l) => l
                .to_index(self.space())
                .map(|i| self.p.get(&i))
                .unwrap_or(0.0),
        }
    }

    pub fn tangent(&self, ps: &PhaseSpace) -> Polyvector {
        ps.tangent(|a, i| self.f[(a, i)], |k, i| self.pderiv[(k, i)])
    }

    fn check(&self, ps: &PhaseSpace) -> Result<()> {
        if self.space() != ps.space || self.pderiv.nrows() != ps.momenta.len() {
            return Err(Error::DimensionMismatch {
                expected: ps.dim(),
                found: self.space().dim() + self.pderiv.nrows(),
            });
        }
        Ok(())
    }
}

/// Gradient of `η` in phase-space axis order, cached per surface.
#[derive(Clone, Debug)]
pub struct SurfaceGradient {
    pub ps: PhaseSpace,
    pub eta: Polynomial<Var>,
    parts: Vec<Polynomial<Var>>,
    omega: PolyForm,
}

impl SurfaceGradient {
    pub fn new(sigma: &ImplicitSurface) -> Self {
        let ps = PhaseSpace::new(sigma.space());
        let parts = ps
            .slot_vars()
            .iter()
            .map(|v| sigma.eta.derivative(v))
            .collect();
        SurfaceGradient {
            omega: ps.omega(),
            ps,
            eta: sigma.eta.clone(),
            parts,
        }
    }

    pub fn eta_at(&self, jet: &ExtendedJet) -> f64 {
        self.eta.evaluate(|v| jet.value(v))
    }

    pub fn at(&self, jet: &ExtendedJet) -> Vec<f64> {
        self.parts
            .iter()
            .map(|p| p.evaluate(|v| jet.value(v)))
            .collect()
    }

    /// `dη(Ξ_i)`: derivative of `η` along the `i`-th factor of `Ξ`.
    pub fn along(&self, jet: &ExtendedJet, i: usize) -> f64 {
        let grad = self.at(jet);
        let s = self.ps.space;
        let mut acc = grad[s.worldsheet_axis(i)];
        for a in 0..s.n_fields {
            acc += grad[s.field_axis(a)] * jet.f[(a, i)];
        }
        for k in 0..self.ps.momenta.len() {
            acc += grad[self.ps.momentum_axis(k)] * jet.pderiv[(k, i)];
        }
        acc
    }

    fn slots(&self, jet: &ExtendedJet) -> Result<Vec<f64>> {
        let form = interior(&jet.tangent(&self.ps), &self.omega)?;
        Ok((0..self.ps.dim())
            .map(|j| form.get(&MultiIndex::single(j)))
            .collect())
    }

    /// `(i_Ξ ω)_j − α ∂_j η` for every phase-space axis `j`.
    pub fn residual(&self, jet: &ExtendedJet, alpha: f64) -> Result<Vec<f64>> {
        jet.check(&self.ps)?;
        let slots = self.slots(jet)?;
        let grad = self.at(jet);
        Ok(slots.iter().zip(grad).map(|(s, g)| s - alpha * g).collect())
    }

    /// `α = (i_Ξ ω)_s / ∂_s η` on the normalization slot `s`.
    pub fn eliminate_alpha(&self, jet: &ExtendedJet, normalization: &Var) -> Result<f64> {
        jet.check(&self.ps)?;
        let j = self.ps.slot_of(normalization).ok_or_else(|| {
            Error::Constraint(format!("{normalization} is not a phase-space coordinate"))
        })?;
        let slots = self.slots(jet)?;
        let d = self.at(jet)[j];
        if d == 0.0 {
            return Err(Error::Constraint(format!(
                "∂η/∂{normalization} vanishes; α is undetermined"
            )));
        }
        Ok(slots[j] / d)
    }

    /// Residuals with `α` eliminated on the normalization slot.
    pub fn eliminated_residual(&self, jet: &ExtendedJet, normalization: &Var) -> Result<Vec<f64>> {
        let alpha = self.eliminate_alpha(jet, normalization)?;
        self.residual(jet, alpha)
    }
}

/// Componentwise residual of `i_Ξ ω − α dη` at a jet, one entry per
/// phase-space axis in [`PhaseSpace::slot_vars`] order.
pub fn degeneracy_residual(
    sigma: &ImplicitSurface,
    jet: &ExtendedJet,
    alpha: f64,
) -> Result<Vec<f64>> {
    SurfaceGradient::new(sigma).residual(jet, alpha)
}

/// Residual for an arbitrary tangent polyvector of phase space. The
/// polyvector is rescaled so its pure-worldsheet coordinate is one.
pub fn degeneracy_residual_for(
    sigma: &ImplicitSurface,
    point: &ExtendedJet,
    xi: &Polyvector,
    alpha: f64,
) -> Result<Vec<f64>> {
    let grad = SurfaceGradient::new(sigma);
    let ps = &grad.ps;
    if xi.dim() != ps.dim() || xi.grade() != ps.space.n_worldsheet {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            found: xi.dim(),
        });
    }
    let vol = xi.get(&ps.space.volume_index());
    if vol == 0.0 {
        return Err(Error::Chart);
    }
    let xi = xi.scaled(&(1.0 / vol));
    let slots = ps.interior_slots(&xi)?;
    let g = grad.at(point);
    Ok(slots.iter().zip(g).map(|(s, g)| s - alpha * g).collect())
}
