use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{ExtendedJet, ResidualReport, SurfaceGradient};
use crate::coords::Var;
use crate::error::{Error, Result};
use crate::exterior::{MultiIndex, PolyForm, TargetSpace};
use crate::lagrangian::{check_metric, maxwell};
use crate::legendre::ImplicitSurface;
use crate::models::{ed_surface, scalar_surface, ModelKind, ModelSpec, TagScheme};
use crate::poly::{Monomial, Polynomial};

/// Coefficient tolerance when recognizing a surface family.
const FAMILY_TOL: f64 = 1e-12;

/// Constants read off a recognized surface.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `η = P^φ + ½ ǧ_{ij} P^i P^j − Ψ`; `metric` is `g^{ij}`.
    Scalar {
        metric: DMatrix<f64>,
        potential: Polynomial<Var>,
    },
    /// The electrodynamics surface with coupling `C` and potential `Φ`.
    Electrodynamics { c: f64, potential: Polynomial<Var> },
}

/// What a component of the degeneracy condition contributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotRole {
    /// Fixes the multiplier `α`.
    Normalization,
    /// Expresses momenta through field derivatives.
    Algebraic,
    /// A differential equation on the fields.
    Evolution,
    /// Follows from the other components on `Σ`.
    Redundant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub var: Var,
    pub tag: String,
    pub role: SlotRole,
}

/// A component proven dependent, with the components it follows from and the
/// condition under which the dependence holds.
#[derive(Clone, Debug, PartialEq)]
pub struct RedundancyCertificate {
    pub tag: String,
    pub follows_from: Vec<String>,
    pub condition: Option<String>,
}

/// Equations of motion extracted from a recognized surface.
#[derive(Clone, Debug)]
pub struct MotionSystem {
    pub family: Family,
    pub gradient: SurfaceGradient,
    /// The slot whose equation eliminates `α`.
    pub normalization: Var,
    /// One entry per phase-space axis.
    pub slots: Vec<Slot>,
    pub algebraic: Vec<String>,
    pub evolution: Vec<String>,
    pub redundant: Vec<RedundancyCertificate>,
}

fn slot_tags(scheme: TagScheme, space: TargetSpace) -> Vec<(Var, String, SlotRole)> {
    use SlotRole::*;
    let n = space.n_worldsheet;
    let p = |idx: MultiIndex| Var::p(space, &idx);
    match scheme {
        TagScheme::He => {
            let mut out = vec![(p(space.volume_index()), "HE1".to_string(), Normalization)];
            out.extend((0..n).map(|i| (p(space.field_slot(0, i)), format!("HE2[{i}]"), Algebraic)));
            out.push((Var::Phi(0), "HE3".into(), Evolution));
            out.extend((0..n).map(|k| (Var::X(k), format!("HE4[{k}]"), Redundant)));
            out
        }
        TagScheme::Part2 => vec![
            (p(space.volume_index()), "alpha".into(), Normalization),
            (p(space.field_slot(0, 1)), "Part2_1".into(), Algebraic),
            (p(space.field_slot(0, 0)), "Part2_2".into(), Algebraic),
            (Var::Phi(0), "Part2_3".into(), Evolution),
            (Var::X(0), "Part2_4".into(), Redundant),
            (Var::X(1), "Part2_5".into(), Redundant),
        ],
        TagScheme::Heem => {
            let v = |l| Var::P(l);
            vec![
                (v(maxwell::volume()), "HEEM1".into(), Normalization),
                (v(maxwell::mixed(0, 0)), "HEEM2".into(), Algebraic),
                (v(maxwell::mixed(0, 1)), "HEEM3".into(), Algebraic),
                (v(maxwell::mixed(1, 0)), "HEEM4".into(), Algebraic),
                (v(maxwell::mixed(1, 1)), "HEEM5".into(), Algebraic),
                (v(maxwell::fields()), "HEEM6".into(), Redundant),
                (Var::Phi(0), "HEEM7".into(), Evolution),
                (Var::Phi(1), "HEEM8".into(), Evolution),
                (Var::X(0), "HEEM9".into(), Redundant),
                (Var::X(1), "HEEM10".into(), Redundant),
            ]
        }
    }
}

/// Reads `g^{ij}` and `Ψ` off `P^φ + ½ ǧ_{ij} P^i P^j − Ψ`.
fn recognize_scalar(sigma: &ImplicitSurface) -> Result<Family> {
    let space = sigma.space();
    let n = space.n_worldsheet;
    let unsupported = || Error::Unsupported("surface is not of the scalar family".into());
    if space.n_fields != 1 {
        return Err(unsupported());
    }
    let pphi = Var::p(space, &space.volume_index());
    let eta = sigma.normalized_on(&pphi).map_err(|_| unsupported())?.eta;
    let pvars: Vec<Var> = (0..n)
        .map(|i| Var::p(space, &space.field_slot(0, i)))
        .collect();
    let mut lower = DMatrix::zeros(n, n);
    let mut psi = Polynomial::default();
    for (m, c) in eta.terms() {
        let has_p = m
            .powers()
            .iter()
            .any(|(v, _)| matches!(v, Var::P(_) | Var::Pi));
        if !has_p {
            psi.add_term(m.clone(), -c);
            continue;
        }
        if *m == Monomial::var(pphi.clone()) {
            continue;
        }
        let pos: Vec<(usize, u32)> = m
            .powers()
            .iter()
            .map(|(v, k)| {
                pvars
                    .iter()
                    .position(|p| p == v)
                    .map(|i| (i, *k))
                    .ok_or_else(unsupported)
            })
            .collect::<Result<_>>()?;
        match pos.as_slice() {
            [(i, 2)] => lower[(*i, *i)] = 2.0 * c,
            [(i, 1), (j, 1)] => {
                lower[(*i, *j)] = c;
                lower[(*j, *i)] = c;
            }
            _ => return Err(unsupported()),
        }
    }
    let upper = lower.try_inverse().ok_or_else(unsupported)?;
    let metric = check_metric(&upper);
    let rebuilt = scalar_surface(&metric, &psi)?;
    if rebuilt.eta.max_coeff_diff(&eta) > FAMILY_TOL * eta.max_abs_coeff().max(1.0) {
        return Err(unsupported());
    }
    Ok(Family::Scalar {
        metric,
        potential: psi,
    })
}

/// Reads `C` and `Φ` off the electrodynamics surface.
fn recognize_ed(sigma: &ImplicitSurface) -> Result<Family> {
    let unsupported = || Error::Unsupported("surface is not of the electrodynamics family".into());
    if sigma.space() != maxwell::space() {
        return Err(unsupported());
    }
    let pu = Var::P(maxwell::fields());
    let pw = Var::P(maxwell::volume());
    let lead = Monomial::from_powers([(pu.clone(), 2), (pw.clone(), 1)]);
    let eta = sigma
        .eta
        .normalized_on(&lead, 1.0)
        .ok_or_else(unsupported)?;
    let c = -eta.coeff(&Monomial::from_powers([(pu.clone(), 1), (pw, 1)])) / 4.0;
    let mut phi = Polynomial::default();
    for (m, k) in eta.terms() {
        if m.power_of(&pu) == 2
            && m.powers()
                .iter()
                .filter(|(v, _)| matches!(v, Var::P(_)))
                .count()
                == 1
        {
            let rest = Monomial::from_powers(m.powers().iter().filter(|(v, _)| *v != pu).cloned());
            phi.add_term(rest, -k);
        }
    }
    if c == 0.0 {
        return Err(unsupported());
    }
    let rebuilt = ed_surface(c, &phi);
    if rebuilt.eta.max_coeff_diff(&eta) > FAMILY_TOL * eta.max_abs_coeff().max(1.0) {
        return Err(unsupported());
    }
    Ok(Family::Electrodynamics { c, potential: phi })
}

/// Recognizes the surface family and extracts the equations of motion.
pub fn build_motion_system(sigma: &ImplicitSurface, model: &ModelSpec) -> Result<MotionSystem> {
    if sigma.space() != model.space() {
        return Err(Error::DimensionMismatch {
            expected: model.space().dim(),
            found: sigma.space().dim(),
        });
    }
    let family = match model.kind {
        ModelKind::Scalar => recognize_scalar(sigma)?,
        ModelKind::Electrodynamics { .. } => recognize_ed(sigma)?,
    };
    if model.tags == TagScheme::Part2 && model.n_worldsheet != 2 {
        return Err(Error::Unsupported(
            "the 1+1 tag scheme needs two worldsheet dimensions".into(),
        ));
    }
    let gradient = SurfaceGradient::new(sigma);
    let space = sigma.space();
    let mut slots: Vec<Slot> = slot_tags(model.tags, space)
        .into_iter()
        .map(|(var, tag, role)| Slot { var, tag, role })
        .collect();
    slots.sort_by_key(|s| gradient.ps.slot_of(&s.var));
    debug_assert!(slots
        .iter()
        .enumerate()
        .all(|(j, s)| gradient.ps.slot_of(&s.var) == Some(j)));
    let tags_with = |role| -> Vec<String> {
        slots
            .iter()
            .filter(|s| s.role == role)
            .map(|s| s.tag.clone())
            .collect()
    };
    let independent: Vec<String> = slots
        .iter()
        .filter(|s| s.role != SlotRole::Redundant)
        .map(|s| s.tag.clone())
        .chain(std::iter::once("eta".to_string()))
        .collect();
    let (algebraic, evolution) = match &family {
        Family::Scalar { .. } => (
            vec![
                "P^i = (-1)^i g^{ij} ∂_jφ".to_string(),
                "P^φ = Ψ − ½ ǧ_{ij} P^i P^j".to_string(),
            ],
            vec!["g^{ij} ∂_i∂_jφ = ∂Ψ/∂φ".to_string()],
        ),
        Family::Electrodynamics { .. } => (
            vec![
                "P[phi1,x0] = P_u ∂_0φ^0".to_string(),
                "P[phi0,x1] = −P_u ∂_1φ^1".to_string(),
                "P[phi0,x0] = −P_u ∂_0φ^1 + 2C F01".to_string(),
                "P[phi1,x1] = P_u ∂_1φ^0 + 2C F01".to_string(),
                "P[x0,x1] from η = 0".to_string(),
            ],
            vec![
                "∂_0 F01 = (∂Φ/∂φ^1) / 2C".to_string(),
                "∂_1 F01 = −(∂Φ/∂φ^0) / 2C".to_string(),
            ],
        ),
    };
    let redundant = tags_with(SlotRole::Redundant)
        .into_iter()
        .map(|tag| RedundancyCertificate {
            // on Σ with P[phi0,phi1] ∉ {0, 4C}; the P[phi0,phi1] component
            // needs no condition on Φ
            condition: matches!(family, Family::Electrodynamics { .. })
                .then(|| "P[phi0,phi1] ∉ {0, 4C}".to_string()),
            tag,
            follows_from: independent.clone(),
        })
        .collect();
    Ok(MotionSystem {
        family,
        gradient,
        normalization: Var::p(space, &space.volume_index()),
        slots,
        algebraic,
        evolution,
        redundant,
    })
}

impl MotionSystem {
    pub fn space(&self) -> TargetSpace {
        self.gradient.ps.space
    }

    /// Residual of every component with `α` eliminated, keyed by tag.
    pub fn slot_residuals(&self, jet: &ExtendedJet) -> Result<Vec<(String, f64)>> {
        let r = self
            .gradient
            .eliminated_residual(jet, &self.normalization)?;
        Ok(self
            .slots
            .iter()
            .zip(r)
            .map(|(s, v)| (s.tag.clone(), v))
            .collect())
    }

    /// Scalar `∂Ψ/∂φ`, the source of `g^{ij} ∂_i∂_jφ = ∂Ψ/∂φ`.
    pub fn field_source(&self) -> Option<Polynomial<Var>> {
        match &self.family {
            Family::Scalar { potential, .. } => Some(potential.derivative(&Var::Phi(0))),
            Family::Electrodynamics { .. } => None,
        }
    }

    /// `[∂₀F₀₁, ∂₁F₀₁]` as polynomials in `x` and the potentials.
    pub fn field_strength_rates(&self) -> Option<[Polynomial<Var>; 2]> {
        match &self.family {
            Family::Electrodynamics { c, potential } => Some([
                potential.derivative(&Var::Phi(1)).scale(1.0 / (2.0 * c)),
                potential.derivative(&Var::Phi(0)).scale(-1.0 / (2.0 * c)),
            ]),
            Family::Scalar { .. } => None,
        }
    }

    /// Momenta on `Σ` from the algebraic relations. `gauge` is the value of
    /// `P[phi0,phi1]` for electrodynamics and is ignored for scalars.
    pub fn algebraic_momenta(
        &self,
        x: &[f64],
        phi: &[f64],
        f: &DMatrix<f64>,
        gauge: f64,
    ) -> Result<PolyForm> {
        let space = self.space();
        let ps = &self.gradient.ps;
        let mut jet = ExtendedJet::zeros(ps);
        jet.x = x.to_vec();
        jet.phi = phi.to_vec();
        jet.f = f.clone();
        match &self.family {
            Family::Scalar { metric, .. } => {
                let gf = metric * f.row(0).transpose();
                for i in 0..space.n_worldsheet {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    jet.set_momentum(&space.field_slot(0, i), sign * gf[i]);
                }
            }
            Family::Electrodynamics { c, .. } => {
                let f01 = f[(1, 0)] - f[(0, 1)];
                let idx = |l: crate::coords::Label| l.to_index(space).expect("valid label");
                jet.set_momentum(&idx(maxwell::fields()), gauge);
                jet.set_momentum(&idx(maxwell::mixed(1, 0)), gauge * f[(0, 0)]);
                jet.set_momentum(&idx(maxwell::mixed(0, 1)), -gauge * f[(1, 1)]);
                jet.set_momentum(
                    &idx(maxwell::mixed(0, 0)),
                    -gauge * f[(1, 0)] + 2.0 * c * f01,
                );
                jet.set_momentum(
                    &idx(maxwell::mixed(1, 1)),
                    gauge * f[(0, 1)] + 2.0 * c * f01,
                );
            }
        }
        let vol = space.volume_index();
        solve_affine(
            &mut jet,
            &[Unknown::P(ps.momentum_position(&vol).unwrap())],
            |j| Ok(vec![self.gradient.eta_at(j)]),
        )?;
        Ok(jet.p)
    }

    /// Residuals of the algebraic relations at a jet, keyed by relation name.
    pub fn relation_residuals(&self, jet: &ExtendedJet) -> Result<Vec<(String, f64)>> {
        let space = self.space();
        let gauge = match &self.family {
            Family::Electrodynamics { .. } => jet.momentum(&maxwell::fields().to_index(space)?),
            Family::Scalar { .. } => 0.0,
        };
        let expected = self.algebraic_momenta(&jet.x, &jet.phi, &jet.f, gauge)?;
        let mut out: Vec<(String, f64)> = self
            .gradient
            .ps
            .momenta()
            .iter()
            .map(|idx| {
                let name = Var::p(space, idx).to_string();
                (name, jet.momentum(idx) - expected.get(idx))
            })
            .collect();
        if let Family::Scalar { .. } = &self.family {
            // Σ_k (−1)^k ∂_k P^k = ∂Ψ/∂φ
            let ps = &self.gradient.ps;
            let div: f64 = (0..space.n_worldsheet)
                .map(|k| {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    sign * jet.pderiv[(ps.momentum_position(&space.field_slot(0, k)).unwrap(), k)]
                })
                .sum();
            let src = self.field_source().unwrap().evaluate(|v| jet.value(v));
            out.push(("field".into(), div - src));
        }
        Ok(out)
    }
}

/// An entry of an extended jet solved for by a sampler.
#[derive(Clone, Copy, Debug)]
enum Unknown {
    P(usize),
    DP(usize, usize),
}

fn get(jet: &ExtendedJet, ps_momenta: &[MultiIndex], u: Unknown) -> f64 {
    match u {
        Unknown::P(k) => jet.momentum(&ps_momenta[k]),
        Unknown::DP(k, i) => jet.pderiv[(k, i)],
    }
}

fn set(jet: &mut ExtendedJet, ps_momenta: &[MultiIndex], u: Unknown, v: f64) {
    match u {
        Unknown::P(k) => jet.set_momentum(&ps_momenta[k], v),
        Unknown::DP(k, i) => jet.pderiv[(k, i)] = v,
    }
}

/// Solves equations that are affine in the unknowns by one Newton step with
/// a Jacobian from unit perturbations.
fn solve_affine<F>(jet: &mut ExtendedJet, unknowns: &[Unknown], eqs: F) -> Result<()>
where
    F: Fn(&ExtendedJet) -> Result<Vec<f64>>,
{
    let space = jet.space();
    let momenta: Vec<MultiIndex> = MultiIndex::all(space.dim(), space.n_worldsheet).collect();
    let r0 = DVector::from_vec(eqs(jet)?);
    let n = unknowns.len();
    let mut jac = DMatrix::zeros(r0.len(), n);
    for (c, u) in unknowns.iter().enumerate() {
        let mut probe = jet.clone();
        set(&mut probe, &momenta, *u, get(jet, &momenta, *u) + 1.0);
        let r1 = DVector::from_vec(eqs(&probe)?);
        jac.set_column(c, &(r1 - &r0));
    }
    let delta = jac
        .lu()
        .solve(&(-r0))
        .ok_or_else(|| Error::Constraint("sampler equations are singular at this jet".into()))?;
    for (c, u) in unknowns.iter().enumerate() {
        let v = get(jet, &momenta, *u) + delta[c];
        set(jet, &momenta, *u, v);
    }
    Ok(())
}

/// Random jets satisfying the independent components, the surface equation
/// and tangency `dη(Ξ_i) = 0`. Entries are uniform in `[−1, 1]`. For
/// electrodynamics `gauge` fixes `P[phi0,phi1]`; when `None` it is drawn from
/// `C·[0.5, 3.5]`, away from the singular values `0` and `4C`.
pub fn sample_independent_jets<R: Rng>(
    system: &MotionSystem,
    n: usize,
    gauge: Option<f64>,
    rng: &mut R,
) -> Result<Vec<ExtendedJet>> {
    let ps = &system.gradient.ps;
    let space = ps.space;
    let pos = |idx: &MultiIndex| ps.momentum_position(idx).expect("momentum index");
    let vol = pos(&space.volume_index());
    let residual_at = |tags: &[usize]| {
        let tags = tags.to_vec();
        move |j: &ExtendedJet| -> Result<Vec<f64>> {
            let r = system
                .gradient
                .eliminated_residual(j, &system.normalization)?;
            Ok(tags.iter().map(|t| r[*t]).collect())
        }
    };
    let tangency = |j: &ExtendedJet| -> Result<Vec<f64>> {
        Ok((0..space.n_worldsheet)
            .map(|i| system.gradient.along(j, i))
            .collect())
    };
    let eta = |j: &ExtendedJet| -> Result<Vec<f64>> { Ok(vec![system.gradient.eta_at(j)]) };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut jet = ExtendedJet::zeros(ps);
        let mut u = || rng.gen_range(-1.0..1.0);
        jet.x.iter_mut().for_each(|v| *v = u());
        jet.phi.iter_mut().for_each(|v| *v = u());
        jet.f.iter_mut().for_each(|v| *v = u());
        jet.pderiv.iter_mut().for_each(|v| *v = u());
        for idx in ps.momenta() {
            jet.set_momentum(idx, u());
        }
        let tangent_unknowns: Vec<Unknown> = (0..space.n_worldsheet)
            .map(|i| Unknown::DP(vol, i))
            .collect();
        match &system.family {
            Family::Scalar { .. } => {
                let slots: Vec<usize> = (0..space.n_worldsheet)
                    .map(|i| ps.slot_of(&Var::p(space, &space.field_slot(0, i))).unwrap())
                    .collect();
                let unknowns: Vec<Unknown> = (0..space.n_worldsheet)
                    .map(|i| Unknown::P(pos(&space.field_slot(0, i))))
                    .collect();
                solve_affine(&mut jet, &unknowns, residual_at(&slots))?;
                solve_affine(&mut jet, &[Unknown::P(vol)], eta)?;
                let phi_slot = ps.slot_of(&Var::Phi(0)).unwrap();
                let p0 = pos(&space.field_slot(0, 0));
                solve_affine(&mut jet, &[Unknown::DP(p0, 0)], residual_at(&[phi_slot]))?;
            }
            Family::Electrodynamics { c, .. } => {
                let g = gauge.unwrap_or_else(|| c * rng.gen_range(0.5..3.5));
                jet.set_momentum(&pos_index(space, maxwell::fields()), g);
                let mixed: Vec<MultiIndex> = [(0, 0), (0, 1), (1, 0), (1, 1)]
                    .iter()
                    .map(|(a, b)| pos_index(space, maxwell::mixed(*a, *b)))
                    .collect();
                let slots: Vec<usize> = mixed.iter().map(|m| ps.momentum_axis(pos(m))).collect();
                let unknowns: Vec<Unknown> = mixed.iter().map(|m| Unknown::P(pos(m))).collect();
                solve_affine(&mut jet, &unknowns, residual_at(&slots))?;
                solve_affine(&mut jet, &[Unknown::P(vol)], eta)?;
                let field_slots = [
                    ps.slot_of(&Var::Phi(0)).unwrap(),
                    ps.slot_of(&Var::Phi(1)).unwrap(),
                ];
                let unknowns = [
                    Unknown::DP(pos(&mixed[1]), 0),
                    Unknown::DP(pos(&mixed[3]), 0),
                ];
                solve_affine(&mut jet, &unknowns, residual_at(&field_slots))?;
            }
        }
        solve_affine(&mut jet, &tangent_unknowns, tangency)?;
        out.push(jet);
    }
    Ok(out)
}

fn pos_index(space: TargetSpace, l: crate::coords::Label) -> MultiIndex {
    l.to_index(space).expect("valid label")
}

/// Residuals of every component over jets that satisfy the independent
/// subset, keyed by tag, plus the surface equation under `eta`.
pub fn redundancy_check(system: &MotionSystem, jets: &[ExtendedJet]) -> Result<ResidualReport> {
    let mut samples: Vec<(String, f64)> = Vec::new();
    for jet in jets {
        samples.extend(system.slot_residuals(jet)?);
        samples.push(("eta".into(), system.gradient.eta_at(jet)));
    }
    Ok(ResidualReport::from_samples(
        samples.iter().map(|(t, v)| (t.as_str(), *v)),
    ))
}
