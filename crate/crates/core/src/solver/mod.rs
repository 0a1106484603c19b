//! Time integration of the first-order systems on periodic 1-D grids.
//!
//! Node `j` sits at `x¹ = j h` and node `N` is identified with node 0. Both
//! integrators are kick–drift–kick leapfrogs. The Hamiltonian side steps the
//! evolutionary momenta with centered first differences and recomputes the
//! algebraic ones from `φ`. The Lagrangian reference integrates
//! `g^{ij}∂_i∂_jφ = ∂Ψ/∂φ` with the compact second difference, so the two
//! share no spatial stencil.

mod export;

use nalgebra::DMatrix;

use crate::coords::{Axis, Label, Var};
use crate::error::{Error, Result};
use crate::exterior::{MultiIndex, TargetSpace};
use crate::lagrangian::{maxwell, Potential};
use crate::models::{derive, ModelKind, ModelSpec};
use crate::motion::{build_motion_system, Family, MotionSystem};
use crate::poly::Polynomial;

pub use export::{write_diagnostics_csv, write_trajectory_csv};

/// Fields and momenta at one time on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub h: f64,
    /// One array per field.
    pub fields: Vec<Vec<f64>>,
    /// Every momentum coordinate in phase-space order.
    pub momenta: Vec<(Label, Vec<f64>)>,
    /// `η` per node. Tracked, never enforced.
    pub eta: Vec<f64>,
    /// `F₀₁` per node for electrodynamics.
    pub f01: Option<Vec<f64>>,
}

impl FieldState {
    pub fn nodes(&self) -> usize {
        self.fields.first().map_or(0, Vec::len)
    }

    pub fn momentum(&self, label: &Label) -> Option<&[f64]> {
        self.momenta
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }

    fn momentum_mut(&mut self, label: &Label) -> &mut Vec<f64> {
        &mut self
            .momenta
            .iter_mut()
            .find(|(l, _)| l == label)
            .expect("momentum present")
            .1
    }

    pub fn max_eta(&self) -> f64 {
        self.eta.iter().fold(0.0, |m, e| m.max(e.abs()))
    }
}

/// `φ` and `∂₀φ` for the Lagrangian reference.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderState {
    pub t: f64,
    pub h: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
}

/// Initial data families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialData {
    /// `φ = A cos(kx)`. Traveling waves start with `∂₀φ = Aω sin(kx)`,
    /// standing waves at rest.
    PlaneWave {
        amplitude: f64,
        k: f64,
        traveling: bool,
    },
    /// `φ ≡ c` at rest.
    Constant(f64),
    /// Electrodynamics: `φ⁰ = A sin(kx)`, `φ¹ = A cos(kx)` and a uniform
    /// field strength.
    UniformField { f01: f64, amplitude: f64, k: f64 },
}

/// One row of the per-step diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostic {
    pub t: f64,
    pub energy: f64,
    pub max_eta: f64,
    /// Max minus min of `F₀₁ = ∂₀φ¹ − ∂₁φ⁰` over the grid, measured from the
    /// potentials across the step.
    pub f01_spread: Option<f64>,
    pub f01_mean: Option<f64>,
    /// Field 0 at node 0.
    pub probe: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<FieldState>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Trajectory {
    pub fn last(&self) -> &FieldState {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn max_eta(&self) -> f64 {
        self.diagnostics.iter().fold(0.0, |m, d| m.max(d.max_eta))
    }

    pub fn max_f01_spread(&self) -> Option<f64> {
        self.diagnostics
            .iter()
            .filter_map(|d| d.f01_spread)
            .reduce(f64::max)
    }

    /// Relative change of the energy proxy, maximized over the run.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.diagnostics[0].energy;
        let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
        self.diagnostics
            .iter()
            .fold(0.0, |m, d| m.max((d.energy - e0).abs() / scale))
    }

    /// Angular frequency of the probe signal, see [`frequency`].
    pub fn frequency(&self) -> Option<f64> {
        let t: Vec<f64> = self.diagnostics.iter().map(|d| d.t).collect();
        let v: Vec<f64> = self.diagnostics.iter().map(|d| d.probe).collect();
        frequency(&t, &v)
    }
}

/// Angular frequency from linearly interpolated zero crossings: successive
/// crossings are half a period apart. Needs at least two crossings.
pub fn frequency(t: &[f64], v: &[f64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for k in 1..t.len().min(v.len()) {
        let (a, b) = (v[k - 1], v[k]);
        if a == 0.0 && k == 1 {
            crossings.push(t[0]);
        }
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            if b == 0.0 {
                crossings.push(t[k]);
            } else {
                crossings.push(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
            }
        }
    }
    crossings.dedup();
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(std::f64::consts::PI * (crossings.len() - 1) as f64 / span)
}

/// Periodic centered first difference.
fn d1(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|j| (u[(j + 1) % n] - u[(j + n - 1) % n]) / (2.0 * h))
        .collect()
}

/// Periodic compact second difference.
fn d2(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|j| (u[(j + 1) % n] - 2.0 * u[j] + u[(j + n - 1) % n]) / (h * h))
        .collect()
}

fn eval_at(p: &Polynomial<Var>, t: f64, x: f64, phi: &[f64]) -> f64 {
    p.evaluate(|v| match v {
        Var::X(0) => t,
        Var::X(_) => x,
        Var::Phi(a) => phi[*a],
        _ => 0.0,
    })
}

/// `ω² = (m² − g^{11}k²)/g^{00}` for a plane wave, with `m² = −∂²Ψ/∂φ²` at
/// the origin.
pub fn plane_wave_frequency(model: &ModelSpec, k: f64) -> Result<f64> {
    let (g00, g11) = diagonal_metric(model)?;
    let m2 = -model
        .potential
        .derivative(&Var::Phi(0))
        .derivative(&Var::Phi(0))
        .evaluate(|_| 0.0);
    let w2 = (m2 - g11 * k * k) / g00;
    if !(w2 >= 0.0) {
        return Err(Error::Configuration(format!(
            "plane wave with k = {k} is not oscillatory (ω² = {w2})"
        )));
    }
    Ok(w2.sqrt())
}

fn diagonal_metric(model: &ModelSpec) -> Result<(f64, f64)> {
    let g = &model.metric;
    if model.n_worldsheet != 2 || g[(0, 1)] != 0.0 || g[(1, 0)] != 0.0 {
        return Err(Error::Unsupported(
            "time integration needs a 1+1 worldsheet with diagonal metric".into(),
        ));
    }
    if !(g[(0, 0)] > 0.0 && g[(1, 1)] < 0.0) {
        return Err(Error::Unsupported(
            "time integration needs a hyperbolic metric with g^00 > 0".into(),
        ));
    }
    Ok((g[(0, 0)], g[(1, 1)]))
}

fn check_step(h: f64, dt: f64, speed: f64) -> Result<()> {
    if !dt.is_finite() || dt == 0.0 {
        return Err(Error::Configuration(format!(
            "time step must be finite and nonzero, got {dt}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Configuration(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    if dt.abs() * speed > h * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "CFL violated: |dt| = {} exceeds h / c = {}",
            dt.abs(),
            h / speed
        )));
    }
    Ok(())
}

fn check_grid(nodes: usize, h: f64) -> Result<()> {
    if nodes < 3 {
        return Err(Error::Configuration(format!(
            "need at least 3 nodes, got {nodes}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Configuration(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
enum Dynamics {
    Scalar {
        g00: f64,
        g11: f64,
        potential: Potential,
        /// `∂Ψ/∂φ`.
        source: Potential,
        /// `∂Ψ/∂x⁰`.
        explicit: Potential,
        /// `P⁰ = P[φ,x¹]`, `P¹ = P[φ,x⁰]`, `P^φ = P[x⁰,x¹]`.
        p_time: Label,
        p_space: Label,
        p_volume: Label,
    },
    Electrodynamics {
        c: f64,
        potential: Potential,
        /// `∂Φ/∂φ¹ / 2C`, the rate of `F₀₁`.
        rate: Potential,
        /// `∂Φ/∂x⁰`.
        explicit: Potential,
    },
}

/// The derived first-order system of a 1+1 model, prepared for stepping.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    system: MotionSystem,
    dynamics: Dynamics,
}

impl HamiltonianSystem {
    /// Derives the surface, recognizes the motion system and extracts the
    /// evolution laws.
    pub fn new(model: &ModelSpec) -> Result<Self> {
        if model.n_worldsheet != 2 {
            return Err(Error::Unsupported(
                "time integration is implemented for 1+1 worldsheets only".into(),
            ));
        }
        let surface = derive(model)?.surface;
        let system = build_motion_system(&surface, model)?;
        let dynamics = match &system.family {
            Family::Scalar { potential, .. } => {
                let (g00, g11) = diagonal_metric(model)?;
                let space = model.space();
                let p = |i: &MultiIndex| Label::from_index(space, i);
                Dynamics::Scalar {
                    g00,
                    g11,
                    potential: potential.clone(),
                    source: potential.derivative(&Var::Phi(0)),
                    explicit: potential.derivative(&Var::X(0)),
                    p_time: p(&space.field_slot(0, 0)),
                    p_space: p(&space.field_slot(0, 1)),
                    p_volume: p(&space.volume_index()),
                }
            }
            Family::Electrodynamics { c, potential } => {
                let [rate, _] = system.field_strength_rates().expect("electrodynamics");
                Dynamics::Electrodynamics {
                    c: *c,
                    potential: potential.clone(),
                    rate,
                    explicit: potential.derivative(&Var::X(0)),
                }
            }
        };
        Ok(HamiltonianSystem { system, dynamics })
    }

    pub fn system(&self) -> &MotionSystem {
        &self.system
    }

    fn space(&self) -> TargetSpace {
        self.system.space()
    }

    fn speed(&self) -> f64 {
        match &self.dynamics {
            Dynamics::Scalar { g00, g11, .. } => (-g11 / g00).sqrt(),
            Dynamics::Electrodynamics { .. } => 1.0,
        }
    }

    /// Builds the state on `Σ`: fields from the initial data, momenta from
    /// the algebraic relations of the motion system with `P_W` solved from
    /// `η = 0`. Electrodynamics uses the gauge `P[φ⁰,φ¹] = 2C`.
    pub fn initial_state(&self, data: &InitialData, nodes: usize, h: f64) -> Result<FieldState> {
        check_grid(nodes, h)?;
        let space = self.space();
        let xs: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
        let (fields, jets, gauge): (Vec<Vec<f64>>, Vec<DMatrix<f64>>, f64) =
            match (&self.dynamics, *data) {
                (
                    Dynamics::Scalar {
                        g00,
                        g11,
                        potential,
                        ..
                    },
                    InitialData::PlaneWave {
                        amplitude,
                        k,
                        traveling,
                    },
                ) => {
                    let w = if traveling {
                        let m2 = -potential
                            .derivative(&Var::Phi(0))
                            .derivative(&Var::Phi(0))
                            .evaluate(|_| 0.0);
                        let w2 = (m2 - g11 * k * k) / g00;
                        if !(w2 >= 0.0) {
                            return Err(Error::Configuration(format!(
                                "plane wave with k = {k} is not oscillatory"
                            )));
                        }
                        w2.sqrt()
                    } else {
                        0.0
                    };
                    let phi: Vec<f64> = xs.iter().map(|x| amplitude * (k * x).cos()).collect();
                    let dphi: Vec<f64> = xs.iter().map(|x| amplitude * w * (k * x).sin()).collect();
                    let grad = d1(&phi, h);
                    let jets = (0..nodes)
                        .map(|j| DMatrix::from_row_slice(1, 2, &[dphi[j], grad[j]]))
                        .collect();
                    (vec![phi], jets, 0.0)
                }
                (Dynamics::Scalar { .. }, InitialData::Constant(c)) => {
                    (vec![vec![c; nodes]], vec![DMatrix::zeros(1, 2); nodes], 0.0)
                }
                (
                    Dynamics::Electrodynamics { c, .. },
                    InitialData::UniformField { f01, amplitude, k },
                ) => {
                    let a0: Vec<f64> = xs.iter().map(|x| amplitude * (k * x).sin()).collect();
                    let a1: Vec<f64> = xs.iter().map(|x| amplitude * (k * x).cos()).collect();
                    let (g0, g1) = (d1(&a0, h), d1(&a1, h));
                    // temporal gauge ∂₀φ⁰ = 0, so ∂₀φ¹ = F₀₁ + ∂₁φ⁰
                    let jets = (0..nodes)
                        .map(|j| DMatrix::from_row_slice(2, 2, &[0.0, g0[j], f01 + g0[j], g1[j]]))
                        .collect();
                    (vec![a0, a1], jets, 2.0 * c)
                }
                (_, other) => {
                    return Err(Error::Configuration(format!(
                        "initial data {other:?} does not fit this model"
                    )));
                }
            };
        let labels: Vec<MultiIndex> = self.system.gradient.ps.momenta().to_vec();
        let mut momenta: Vec<(Label, Vec<f64>)> = labels
            .iter()
            .map(|i| (Label::from_index(space, i), Vec::with_capacity(nodes)))
            .collect();
        for j in 0..nodes {
            let phi: Vec<f64> = fields.iter().map(|f| f[j]).collect();
            let p = self
                .system
                .algebraic_momenta(&[0.0, xs[j]], &phi, &jets[j], gauge)?;
            for (k, index) in labels.iter().enumerate() {
                momenta[k].1.push(p.get(index));
            }
        }
        let mut state = FieldState {
            t: 0.0,
            h,
            fields,
            momenta,
            eta: Vec::new(),
            f01: None,
        };
        self.refresh(&mut state);
        Ok(state)
    }

    /// Recomputes the tracked `η` and `F₀₁` columns.
    fn refresh(&self, s: &mut FieldState) {
        let n = s.nodes();
        let sigma = &self.system.gradient;
        let mut eta = Vec::with_capacity(n);
        for j in 0..n {
            let x = [s.t, j as f64 * s.h];
            let value = |v: &Var| match v {
                Var::X(i) => x[*i],
                Var::Phi(a) => s.fields[*a][j],
                Var::P(l) => s.momentum(l).map_or(0.0, |p| p[j]),
                Var::Pi => -1.0,
            };
            eta.push(sigma.eta.evaluate(value));
        }
        s.eta = eta;
        if let Dynamics::Electrodynamics { c, .. } = self.dynamics {
            let pu = s.momentum(&maxwell::fields()).expect("ED momenta").to_vec();
            let p00 = s.momentum(&maxwell::mixed(0, 0)).expect("ED momenta");
            let p11 = s.momentum(&maxwell::mixed(1, 1)).expect("ED momenta");
            s.f01 = Some(
                (0..n)
                    .map(|j| (p00[j] + p11[j]) / (4.0 * c - pu[j]))
                    .collect(),
            );
        }
    }

    fn check_state(&self, s: &FieldState) -> Result<()> {
        let n = s.nodes();
        check_grid(n, s.h)?;
        let space = self.space();
        if s.fields.len() != space.n_fields || s.fields.iter().any(|f| f.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: space.n_fields,
                found: s.fields.len(),
            });
        }
        let count = self.system.gradient.ps.momenta().len();
        if s.momenta.len() != count || s.momenta.iter().any(|(_, p)| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: count,
                found: s.momenta.len(),
            });
        }
        Ok(())
    }

    /// One kick–drift–kick step. `dt` may be negative, which steps backward;
    /// the scheme is symmetric so a backward step undoes a forward one.
    pub fn step(&self, s: &FieldState, dt: f64) -> Result<FieldState> {
        self.check_state(s)?;
        check_step(s.h, dt, self.speed())?;
        let mut out = s.clone();
        match &self.dynamics {
            Dynamics::Scalar {
                g00,
                g11,
                source,
                explicit,
                p_time,
                p_space,
                p_volume,
                ..
            } => self.step_scalar(
                &mut out,
                dt,
                (*g00, *g11),
                source,
                explicit,
                (p_time, p_space, p_volume),
            ),
            Dynamics::Electrodynamics {
                c, rate, explicit, ..
            } => self.step_ed(&mut out, dt, *c, rate, explicit),
        }
        out.t = s.t + dt;
        self.refresh(&mut out);
        Ok(out)
    }

    fn step_scalar(
        &self,
        s: &mut FieldState,
        dt: f64,
        (g00, g11): (f64, f64),
        source: &Potential,
        explicit: &Potential,
        (p_time, p_space, p_volume): (&Label, &Label, &Label),
    ) {
        let (n, h, t) = (s.nodes(), s.h, s.t);
        let xs: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        // ∂₀P⁰ = ∂₁P¹ + ∂Ψ/∂φ with P¹ = −g^{11}∂₁φ
        let force = |phi: &[f64], t: f64| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
            let grad = d1(phi, h);
            let p1: Vec<f64> = grad.iter().map(|g| -g11 * g).collect();
            let dp1 = d1(&p1, h);
            let f = (0..n)
                .map(|j| dp1[j] + eval_at(source, t, xs[j], &[phi[j]]))
                .collect();
            (f, p1, dp1)
        };
        let phi0 = s.fields[0].clone();
        let (f_start, p1_start, dp1_start) = force(&phi0, t);
        let grad_start = d1(&phi0, h);
        let p0 = s.momentum_mut(p_time);
        for j in 0..n {
            p0[j] += 0.5 * dt * f_start[j];
        }
        let half = p0.clone();
        let phi1: Vec<f64> = (0..n).map(|j| phi0[j] + dt * half[j] / g00).collect();
        let (f_end, p1_end, dp1_end) = force(&phi1, t + dt);
        let p0 = s.momentum_mut(p_time);
        for j in 0..n {
            p0[j] += 0.5 * dt * f_end[j];
        }
        let grad_end = d1(&phi1, h);
        // ∂₀P^φ = ∂Ψ/∂x⁰ + ∂₁φ ∂₀P¹ − ∂₁P¹ ∂₀φ, time-symmetric
        let pv = s.momentum_mut(p_volume);
        for j in 0..n {
            let mid = [0.5 * (phi0[j] + phi1[j])];
            pv[j] += dt * eval_at(explicit, t + 0.5 * dt, xs[j], &mid)
                + (p1_end[j] - p1_start[j]) * 0.5 * (grad_start[j] + grad_end[j])
                - 0.5 * (dp1_start[j] + dp1_end[j]) * (phi1[j] - phi0[j]);
        }
        *s.momentum_mut(p_space) = p1_end;
        s.fields[0] = phi1;
    }

    fn step_ed(&self, s: &mut FieldState, dt: f64, c: f64, rate: &Potential, explicit: &Potential) {
        let (n, h, t) = (s.nodes(), s.h, s.t);
        let xs: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        let pu = s.momentum(&maxwell::fields()).expect("ED momenta").to_vec();
        let p00_start = s
            .momentum(&maxwell::mixed(0, 0))
            .expect("ED momenta")
            .to_vec();
        let p11 = s.momentum(&maxwell::mixed(1, 1)).expect("ED momenta");
        let mut sp: Vec<f64> = (0..n).map(|j| p00_start[j] + p11[j]).collect();
        let a0 = s.fields[0].clone();
        let a1 = s.fields[1].clone();
        let g0 = d1(&a0, h);
        let at = |j: usize, a1: &[f64]| [a0[j], a1[j]];
        // ∂₀(P₀₀ + P₁₁) = (4C − P_u) ∂₀F₀₁
        for j in 0..n {
            sp[j] += 0.5 * dt * (4.0 * c - pu[j]) * eval_at(rate, t, xs[j], &at(j, &a1));
        }
        let a1_next: Vec<f64> = (0..n)
            .map(|j| a1[j] + dt * (sp[j] / (4.0 * c - pu[j]) + g0[j]))
            .collect();
        for j in 0..n {
            sp[j] += 0.5 * dt * (4.0 * c - pu[j]) * eval_at(rate, t + dt, xs[j], &at(j, &a1_next));
        }
        let g1 = d1(&a1_next, h);
        let f: Vec<f64> = (0..n).map(|j| sp[j] / (4.0 * c - pu[j])).collect();
        // algebraic relations in the temporal gauge, f⁰₀ = 0
        let p00: Vec<f64> = (0..n)
            .map(|j| -pu[j] * (f[j] + g0[j]) + 2.0 * c * f[j])
            .collect();
        *s.momentum_mut(&maxwell::mixed(1, 0)) = vec![0.0; n];
        *s.momentum_mut(&maxwell::mixed(0, 1)) = (0..n).map(|j| -pu[j] * g1[j]).collect();
        *s.momentum_mut(&maxwell::mixed(1, 1)) =
            (0..n).map(|j| pu[j] * g0[j] + 2.0 * c * f[j]).collect();
        let pw = s.momentum_mut(&maxwell::volume());
        for j in 0..n {
            let mid = [a0[j], 0.5 * (a1[j] + a1_next[j])];
            pw[j] +=
                (p00[j] - p00_start[j]) * g0[j] + dt * eval_at(explicit, t + 0.5 * dt, xs[j], &mid);
        }
        *s.momentum_mut(&maxwell::mixed(0, 0)) = p00;
        s.fields[1] = a1_next;
    }

    /// `∫(½g^{00}(∂₀φ)² − ½g^{11}(∂₁φ)² − Ψ)dx` for scalars and
    /// `∫(C F₀₁² − Φ)dx` for electrodynamics.
    pub fn energy(&self, s: &FieldState) -> f64 {
        let (n, h) = (s.nodes(), s.h);
        let mut sum = 0.0;
        match &self.dynamics {
            Dynamics::Scalar {
                g00,
                g11,
                potential,
                p_time,
                ..
            } => {
                let grad = d1(&s.fields[0], h);
                let p0 = s.momentum(p_time).expect("scalar momenta");
                for j in 0..n {
                    let v = p0[j] / g00;
                    sum += 0.5 * g00 * v * v
                        - 0.5 * g11 * grad[j] * grad[j]
                        - eval_at(potential, s.t, j as f64 * h, &[s.fields[0][j]]);
                }
            }
            Dynamics::Electrodynamics { c, potential, .. } => {
                let f = s.f01.as_ref().expect("refreshed state");
                for j in 0..n {
                    sum += c * f[j] * f[j]
                        - eval_at(
                            potential,
                            s.t,
                            j as f64 * h,
                            &[s.fields[0][j], s.fields[1][j]],
                        );
                }
            }
        }
        h * sum
    }

    fn diagnostic(&self, s: &FieldState, measured_f01: Option<&[f64]>) -> Diagnostic {
        let f01 = measured_f01.or(s.f01.as_deref());
        let (spread, mean) = match f01 {
            Some(f) => {
                let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (Some(hi - lo), Some(f.iter().sum::<f64>() / f.len() as f64))
            }
            None => (None, None),
        };
        Diagnostic {
            t: s.t,
            energy: self.energy(s),
            max_eta: s.max_eta(),
            f01_spread: spread,
            f01_mean: mean,
            probe: s.fields[0][0],
        }
    }

    /// Integrates to `T`. The step is shortened so an integer number of
    /// steps lands on `T`. Snapshots every `stride` steps plus the final
    /// state; diagnostics every step.
    pub fn run(
        &self,
        initial: &FieldState,
        t_end: f64,
        dt: f64,
        stride: usize,
    ) -> Result<Trajectory> {
        self.check_state(initial)?;
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::Configuration(format!(
                "final time must be finite and nonnegative, got {t_end}"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Configuration(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if stride == 0 {
            return Err(Error::Configuration("stride must be at least 1".into()));
        }
        check_step(initial.h, dt, self.speed())?;
        let mut traj = Trajectory {
            snapshots: vec![initial.clone()],
            diagnostics: vec![self.diagnostic(initial, None)],
        };
        if t_end == 0.0 {
            return Ok(traj);
        }
        let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
        let dt = t_end / steps as f64;
        let t0 = initial.t;
        let mut state = initial.clone();
        for n in 1..=steps {
            let mut next = self.step(&state, dt)?;
            next.t = t0 + n as f64 * dt;
            let measured = (state.fields.len() == 2).then(|| {
                let g0 = d1(&state.fields[0], state.h);
                (0..state.nodes())
                    .map(|j| (next.fields[1][j] - state.fields[1][j]) / dt - g0[j])
                    .collect::<Vec<f64>>()
            });
            traj.diagnostics
                .push(self.diagnostic(&next, measured.as_deref()));
            if n % stride == 0 || n == steps {
                traj.snapshots.push(next.clone());
            }
            state = next;
        }
        Ok(traj)
    }
}

/// One leapfrog step of the derived first-order system.
pub fn step_hamiltonian(model: &ModelSpec, s: &FieldState, dt: f64) -> Result<FieldState> {
    HamiltonianSystem::new(model)?.step(s, dt)
}

/// Integrates the derived system of `model` from `initial` to `T`.
pub fn run(
    model: &ModelSpec,
    initial: &FieldState,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    HamiltonianSystem::new(model)?.run(initial, t_end, dt, stride)
}

/// Velocity Verlet for `g^{00}∂₀²φ + g^{11}∂₁²φ = ∂Ψ/∂φ`, read directly
/// from the model's metric and potential.
#[derive(Clone, Debug)]
pub struct LagrangianReference {
    g00: f64,
    g11: f64,
    potential: Potential,
    source: Potential,
}

impl LagrangianReference {
    pub fn new(model: &ModelSpec) -> Result<Self> {
        if model.kind != ModelKind::Scalar {
            return Err(Error::Unsupported(
                "the Lagrangian reference integrates scalar models".into(),
            ));
        }
        let (g00, g11) = diagonal_metric(model)?;
        Ok(LagrangianReference {
            g00,
            g11,
            potential: model.potential.clone(),
            source: model.potential.derivative(&Var::Phi(0)),
        })
    }

    pub fn initial_state(
        &self,
        data: &InitialData,
        nodes: usize,
        h: f64,
    ) -> Result<SecondOrderState> {
        check_grid(nodes, h)?;
        let xs = (0..nodes).map(|j| j as f64 * h);
        let (phi, dphi) = match *data {
            InitialData::PlaneWave {
                amplitude,
                k,
                traveling,
            } => {
                let w = if traveling {
                    let m2 = -self.source.derivative(&Var::Phi(0)).evaluate(|_| 0.0);
                    ((m2 - self.g11 * k * k) / self.g00).sqrt()
                } else {
                    0.0
                };
                xs.map(|x| (amplitude * (k * x).cos(), amplitude * w * (k * x).sin()))
                    .unzip()
            }
            InitialData::Constant(c) => (vec![c; nodes], vec![0.0; nodes]),
            other => {
                return Err(Error::Configuration(format!(
                    "initial data {other:?} does not fit a scalar model"
                )));
            }
        };
        Ok(SecondOrderState {
            t: 0.0,
            h,
            phi,
            dphi,
        })
    }

    fn acceleration(&self, phi: &[f64], t: f64, h: f64) -> Vec<f64> {
        let lap = d2(phi, h);
        (0..phi.len())
            .map(|j| {
                (eval_at(&self.source, t, j as f64 * h, &[phi[j]]) - self.g11 * lap[j]) / self.g00
            })
            .collect()
    }

    pub fn step(&self, s: &SecondOrderState, dt: f64) -> Result<SecondOrderState> {
        check_grid(s.phi.len(), s.h)?;
        check_step(s.h, dt, (-self.g11 / self.g00).sqrt())?;
        let n = s.phi.len();
        let a = self.acceleration(&s.phi, s.t, s.h);
        let half: Vec<f64> = (0..n).map(|j| s.dphi[j] + 0.5 * dt * a[j]).collect();
        let phi: Vec<f64> = (0..n).map(|j| s.phi[j] + dt * half[j]).collect();
        let a = self.acceleration(&phi, s.t + dt, s.h);
        let dphi = (0..n).map(|j| half[j] + 0.5 * dt * a[j]).collect();
        Ok(SecondOrderState {
            t: s.t + dt,
            h: s.h,
            phi,
            dphi,
        })
    }

    /// Integrates to `T` with the step shortened to land on it.
    pub fn run(&self, initial: &SecondOrderState, t_end: f64, dt: f64) -> Result<SecondOrderState> {
        if !(t_end >= 0.0) || !(dt > 0.0) {
            return Err(Error::Configuration("need T ≥ 0 and dt > 0".into()));
        }
        if t_end == 0.0 {
            return Ok(initial.clone());
        }
        let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
        let dt = t_end / steps as f64;
        let mut s = initial.clone();
        for n in 1..=steps {
            s = self.step(&s, dt)?;
            s.t = initial.t + n as f64 * dt;
        }
        Ok(s)
    }

    /// `∫(½g^{00}(∂₀φ)² − ½g^{11}(∂₁φ)² − Ψ)dx` with the same centered
    /// gradient as the Hamiltonian side.
    pub fn energy(&self, s: &SecondOrderState) -> f64 {
        let grad = d1(&s.phi, s.h);
        let sum: f64 = (0..s.phi.len())
            .map(|j| {
                0.5 * self.g00 * s.dphi[j] * s.dphi[j]
                    - 0.5 * self.g11 * grad[j] * grad[j]
                    - eval_at(&self.potential, s.t, j as f64 * s.h, &[s.phi[j]])
            })
            .sum();
        s.h * sum
    }
}

/// One step of the Lagrangian reference.
pub fn step_reference_lagrangian(
    model: &ModelSpec,
    s: &SecondOrderState,
    dt: f64,
) -> Result<SecondOrderState> {
    LagrangianReference::new(model)?.step(s, dt)
}

/// Grid L2 norm `√(h Σ (u − v)²)`.
pub fn l2_distance(u: &[f64], v: &[f64], h: f64) -> f64 {
    (h * u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).sqrt()
}

/// Column name for a momentum label, e.g. `P_phi0_x1`.
pub fn momentum_column(l: &Label) -> String {
    let parts: Vec<String> = l.axes().iter().map(Axis::to_string).collect();
    format!("P_{}", parts.join("_"))
}
