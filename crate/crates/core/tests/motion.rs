use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use worldsheet::coords::{Label, Var};
use worldsheet::exterior::{MultiIndex, TargetSpace};
use worldsheet::lagrangian::{check_metric, maxwell};
use worldsheet::models::{electrodynamics_1p1, kg_1p1, mass_potential, scalar_ndim, ModelSpec};
use worldsheet::motion::{
    build_motion_system, degeneracy_residual, euler_lagrange_residual, redundancy_check,
    sample_independent_jets, symbolic_interior, ExtendedJet, JetVar, MotionSystem, PhaseSpace,
    SpacetimeGrid,
};
use worldsheet::poly::Polynomial;

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
}

fn system(model: &ModelSpec) -> MotionSystem {
    build_motion_system(model.expected_surface.as_ref().unwrap(), model).unwrap()
}

fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn tag_residual(sys: &MotionSystem, jet: &ExtendedJet, tag: &str) -> f64 {
    sys.slot_residuals(jet)
        .unwrap()
        .into_iter()
        .find(|(t, _)| t == tag)
        .unwrap()
        .1
}

/// KG jet with `p_{φ1} = ∂₀φ`, `p_{φ0} = ∂₁φ`, `p_{01}` on the surface and
/// momentum derivatives of a plane wave solution.
fn kg_plane_wave_jet(sys: &MotionSystem, k: f64, t: f64, x: f64) -> ExtendedJet {
    let ps = &sys.gradient.ps;
    let space = ps.space;
    let w = k.abs();
    let phase = k * x - w * t;
    // φ = cos(k x¹ − ω x⁰)
    let f = DMatrix::from_row_slice(1, 2, &[w * phase.sin(), -k * phase.sin()]);
    let hess = [
        [-w * w * phase.cos(), w * k * phase.cos()],
        [w * k * phase.cos(), -k * k * phase.cos()],
    ];
    let mut jet = ExtendedJet::zeros(ps);
    jet.x = vec![t, x];
    jet.phi = vec![phase.cos()];
    jet.f = f.clone();
    jet.p = sys.algebraic_momenta(&jet.x, &jet.phi, &f, 0.0).unwrap();
    let pos = |i: &MultiIndex| ps.momentum_position(i).unwrap();
    for j in 0..2 {
        // P^i = (−1)^i g^{ij} f_j with g = diag(1, −1): P⁰ = f₀, P¹ = f₁
        jet.pderiv[(pos(&space.field_slot(0, 0)), j)] = hess[0][j];
        jet.pderiv[(pos(&space.field_slot(0, 1)), j)] = hess[1][j];
        // P^φ = −½(P⁰)² + ½(P¹)²
        jet.pderiv[(pos(&space.volume_index()), j)] =
            -f[(0, 0)] * hess[0][j] + f[(0, 1)] * hess[1][j];
    }
    jet
}

#[test]
fn kg_solution_jet_has_zero_residual() {
    let model = kg_1p1(0.0).unwrap();
    let sys = system(&model);
    let sigma = model.expected_surface.as_ref().unwrap();
    for (k, t, x) in [(1.0, 0.3, 0.1), (-2.0, 1.1, 0.7), (3.0, -0.4, 2.0)] {
        let jet = kg_plane_wave_jet(&sys, k, t, x);
        let r = degeneracy_residual(sigma, &jet, 1.0).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    }
}

#[test]
fn kg_perturbed_momentum_shows_in_its_slot() {
    let model = kg_1p1(0.0).unwrap();
    let sys = system(&model);
    let space = model.space();
    let base = kg_plane_wave_jet(&sys, 1.0, 0.3, 0.1);
    let p_phi1 = space.field_slot(0, 0);
    let mut prev: Option<f64> = None;
    for delta in [1e-3, 2e-3, 4e-3] {
        let mut jet = base.clone();
        jet.set_momentum(&p_phi1, base.momentum(&p_phi1) + delta);
        let r = tag_residual(&sys, &jet, "Part2_2");
        assert!((r.abs() - delta).abs() < 1e-12, "{r} {delta}");
        for other in ["Part2_1", "Part2_3", "Part2_4", "Part2_5"] {
            assert!(tag_residual(&sys, &jet, other).abs() < 1e-12);
        }
        if let Some(p) = prev {
            assert!((r / p - 2.0f64).abs() < 1e-9);
        }
        prev = Some(r);
    }
}

/// `i_Ξ ω` written out as in the scalar-field equations: `P^φ` slot
/// `(−1)^N`, `P^i` slot `(−1)^N (−1)^i f_i`, `φ` slot
/// `(−1)^{N−1} Σ (−1)^k π^k_k`, `x^k` slot
/// `(−1)^{N−1} [π^φ_k + Σ_i (−1)^i (π^i_k f_i − π^i_i f_k)]`.
#[test]
fn scalar_slots_reproduce_closed_forms() {
    for n in 1..=4 {
        let space = TargetSpace::new(1, n);
        let ps = PhaseSpace::new(space);
        let slots = symbolic_interior(&ps);
        let f = |i| Polynomial::var(JetVar::F(0, i));
        let pi =
            |idx: MultiIndex, i| Polynomial::var(JetVar::DP(Label::from_index(space, &idx), i));
        let sn = sign(n);
        let at = |v: Var| slots[ps.slot_of(&v).unwrap()].clone();
        assert_eq!(
            at(Var::p(space, &space.volume_index())),
            Polynomial::constant(sn)
        );
        for i in 0..n {
            let expected = f(i).scale(sn * sign(i));
            assert_eq!(
                at(Var::p(space, &space.field_slot(0, i))),
                expected,
                "N={n} i={i}"
            );
        }
        let mut div = Polynomial::default();
        for k in 0..n {
            div = div + pi(space.field_slot(0, k), k).scale(sign(k));
        }
        assert_eq!(at(Var::Phi(0)), div.scale(-sn), "N={n}");
        for k in 0..n {
            let mut e = pi(space.volume_index(), k);
            for i in 0..n {
                let t =
                    &pi(space.field_slot(0, i), k) * &f(i) - &pi(space.field_slot(0, i), i) * &f(k);
                e = e + t.scale(sign(i));
            }
            assert_eq!(at(Var::X(k)), e.scale(-sn), "N={n} k={k}");
        }
    }
}

#[test]
fn ed_slots_reproduce_closed_forms() {
    let space = maxwell::space();
    let ps = PhaseSpace::new(space);
    let slots = symbolic_interior(&ps);
    let f = |a, i| Polynomial::var(JetVar::F(a, i));
    let pi = |l: Label, i| Polynomial::var(JetVar::DP(l, i));
    let at = |v: Var| slots[ps.slot_of(&v).unwrap()].clone();
    let (u, w, m) = (maxwell::fields(), maxwell::volume(), maxwell::mixed);
    assert_eq!(at(Var::P(w.clone())), Polynomial::constant(1.0));
    assert_eq!(at(Var::P(m(0, 0))), f(0, 1).scale(-1.0));
    assert_eq!(at(Var::P(m(0, 1))), f(0, 0));
    assert_eq!(at(Var::P(m(1, 0))), f(1, 1).scale(-1.0));
    assert_eq!(at(Var::P(m(1, 1))), f(1, 0));
    assert_eq!(
        at(Var::P(u.clone())),
        &f(0, 0) * &f(1, 1) - &f(0, 1) * &f(1, 0)
    );
    let heem7 = -(&pi(u.clone(), 0) * &f(1, 1)) + &pi(u.clone(), 1) * &f(1, 0) + pi(m(0, 0), 1)
        - pi(m(0, 1), 0);
    assert_eq!(at(Var::Phi(0)), heem7);
    let heem8 = &pi(u.clone(), 0) * &f(0, 1) - &pi(u.clone(), 1) * &f(0, 0) + pi(m(1, 0), 1)
        - pi(m(1, 1), 0);
    assert_eq!(at(Var::Phi(1)), heem8);
    for k in 0..2 {
        let e = &pi(m(0, k), 0) * &f(0, 1) - &pi(m(0, k), 1) * &f(0, 0)
            + &pi(m(1, k), 0) * &f(1, 1)
            - &pi(m(1, k), 1) * &f(1, 0)
            - pi(w.clone(), k);
        assert_eq!(at(Var::X(k)), e);
    }
}

#[test]
fn field_equation_for_scalar_family() {
    for g in [diag(&[1.0, -1.0]), diag(&[1.0, -1.0, -1.0])] {
        let model = scalar_ndim(g.clone(), mass_potential(1.5)).unwrap();
        let sys = system(&model);
        match &sys.family {
            worldsheet::motion::Family::Scalar { metric, .. } => {
                assert!((metric - &g).amax() < 1e-14)
            }
            _ => panic!("scalar family expected"),
        }
        // Δφ = −m²φ
        let src = sys.field_source().unwrap();
        assert!(src.max_coeff_diff(&Polynomial::var(Var::Phi(0)).scale(-2.25)) < 1e-14);
    }
    let sys = system(&kg_1p1(0.0).unwrap());
    assert!(sys.field_source().unwrap().is_empty());
}

#[test]
fn ed_without_current_has_constant_field_strength() {
    let sys = system(&electrodynamics_1p1(0.25, Polynomial::default()).unwrap());
    let rates = sys.field_strength_rates().unwrap();
    assert!(rates[0].is_empty() && rates[1].is_empty());
    assert!(sys.redundant.iter().any(|c| c.tag == "HEEM6"));
    let with_current =
        system(&electrodynamics_1p1(0.25, Polynomial::var(Var::Phi(1)).scale(0.3)).unwrap());
    let rates = with_current.field_strength_rates().unwrap();
    assert!((rates[0].constant_term() - 0.3).abs() < 1e-15);
}

#[test]
fn every_slot_is_included_or_certified() {
    for model in [
        kg_1p1(1.0).unwrap(),
        scalar_ndim(diag(&[1.0, -1.0, -1.0]), mass_potential(1.0)).unwrap(),
        electrodynamics_1p1(0.25, Polynomial::default()).unwrap(),
    ] {
        let sys = system(&model);
        assert_eq!(sys.slots.len(), sys.gradient.ps.dim());
        for s in &sys.slots {
            use worldsheet::motion::SlotRole;
            if s.role == SlotRole::Redundant {
                assert!(sys.redundant.iter().any(|c| c.tag == s.tag));
            }
        }
    }
}

#[test]
fn unrecognized_surface_is_unsupported() {
    let model = kg_1p1(0.0).unwrap();
    let mut sigma = model.expected_surface.clone().unwrap();
    sigma.eta =
        sigma.eta + Polynomial::var(Var::p(model.space(), &model.space().field_slot(0, 0))).pow(3);
    assert!(matches!(
        build_motion_system(&sigma, &model),
        Err(worldsheet::Error::Unsupported(_))
    ));
}

fn redundant_max(sys: &MotionSystem, gauge: Option<f64>, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jets = sample_independent_jets(sys, 200, gauge, &mut rng).unwrap();
    let report = redundancy_check(sys, &jets).unwrap();
    let dependent: Vec<&str> = sys.redundant.iter().map(|c| c.tag.as_str()).collect();
    let independent: Vec<&str> = sys
        .slots
        .iter()
        .map(|s| s.tag.as_str())
        .filter(|t| !dependent.contains(t))
        .chain(["eta"])
        .collect();
    (report.max_over(independent), report.max_over(dependent))
}

#[test]
fn redundancy_kg() {
    let (ind, dep) = redundant_max(&system(&kg_1p1(1.0).unwrap()), None, 1);
    assert!(ind < 1e-12 && dep <= 1e-10, "{ind} {dep}");
}

#[test]
fn redundancy_scalar_ndim() {
    for g in [
        diag(&[1.0, -1.0, -1.0]),
        diag(&[1.0, 1.0, 1.0]),
        diag(&[2.0, -0.5, 1.0, -3.0]),
    ] {
        let psi = mass_potential(0.8)
            + Polynomial::var(Var::X(1)).scale(0.2) * Polynomial::var(Var::Phi(0));
        let (ind, dep) = redundant_max(&system(&scalar_ndim(g, psi).unwrap()), None, 2);
        assert!(ind < 1e-11 && dep <= 1e-10, "{ind} {dep}");
    }
}

#[test]
fn redundancy_ed_without_current() {
    let sys = system(&electrodynamics_1p1(0.25, Polynomial::default()).unwrap());
    let (ind, dep) = redundant_max(&sys, None, 3);
    assert!(ind < 1e-10 && dep <= 1e-9, "{ind} {dep}");
}

/// With the corrected surface the `P[phi0,phi1]` component follows from the
/// others for any potential and any value of `P[phi0,phi1]`.
#[test]
fn heem6_is_redundant_with_current_for_any_gauge() {
    let phi =
        Polynomial::var(Var::Phi(1)).scale(0.4) + Polynomial::var(Var::Phi(0)).pow(2).scale(0.3);
    let model = electrodynamics_1p1(0.25, phi).unwrap();
    let sys = system(&model);
    let c = model.coupling().unwrap();
    for (seed, gauge) in [(4, Some(2.0 * c)), (5, Some(1.3 * c)), (6, None)] {
        let (ind, dep) = redundant_max(&sys, gauge, seed);
        assert!(ind < 1e-10 && dep <= 1e-9, "{gauge:?} {ind} {dep}");
    }
}

#[test]
fn sampled_jets_satisfy_relations() {
    for (model, gauge) in [
        (
            scalar_ndim(diag(&[1.0, -1.0, -1.0]), mass_potential(1.0)).unwrap(),
            None,
        ),
        (
            electrodynamics_1p1(0.25, Polynomial::default()).unwrap(),
            None,
        ),
    ] {
        let sys = system(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for jet in sample_independent_jets(&sys, 50, gauge, &mut rng).unwrap() {
            for (name, r) in sys.relation_residuals(&jet).unwrap() {
                assert!(r.abs() < 1e-10, "{} {name} {r}", model.name);
            }
        }
    }
}

/// Builds the first jet of phase space induced by a second-order Taylor
/// expansion of a scalar solution.
fn scalar_two_jet(sys: &MotionSystem, g: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> ExtendedJet {
    let ps = &sys.gradient.ps;
    let space = ps.space;
    let n = space.n_worldsheet;
    let mut u = || rng.gen_range(-1.0..1.0);
    let x: Vec<f64> = (0..n).map(|_| u()).collect();
    let phi = vec![u()];
    let f = DMatrix::from_fn(1, n, |_, _| u());
    let mut s = DMatrix::from_fn(n, n, |_, _| u());
    s = (&s + s.transpose()) * 0.5;
    let potential = match &sys.family {
        worldsheet::motion::Family::Scalar { potential, .. } => potential.clone(),
        _ => unreachable!(),
    };
    let value = |v: &Var| match v {
        Var::X(i) => x[*i],
        Var::Phi(_) => phi[0],
        _ => 0.0,
    };
    let src = potential.derivative(&Var::Phi(0)).evaluate(value);
    let lap: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g[(i, j)] * s[(i, j)])
        .sum();
    s[(0, 0)] += (src - lap) / g[(0, 0)];
    let mut jet = ExtendedJet::zeros(ps);
    jet.x = x.clone();
    jet.phi = phi.clone();
    jet.f = f.clone();
    jet.p = sys.algebraic_momenta(&x, &phi, &f, 0.0).unwrap();
    let lower = check_metric(g).try_inverse().unwrap();
    let pos = |idx: &MultiIndex| ps.momentum_position(idx).unwrap();
    let p_up: Vec<f64> = (0..n)
        .map(|i| jet.momentum(&space.field_slot(0, i)))
        .collect();
    for k in 0..n {
        let mut dp = vec![0.0; n];
        for i in 0..n {
            dp[i] = sign(i) * (0..n).map(|j| g[(i, j)] * s[(j, k)]).sum::<f64>();
            jet.pderiv[(pos(&space.field_slot(0, i)), k)] = dp[i];
        }
        // P^φ = Ψ − ½ ǧ_{ij} P^i P^j
        let psi_k = potential.derivative(&Var::X(k)).evaluate(value)
            + potential.derivative(&Var::Phi(0)).evaluate(value) * f[(0, k)];
        let quad: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| lower[(i, j)] * p_up[i] * dp[j])
            .sum();
        jet.pderiv[(pos(&space.volume_index()), k)] = psi_k - quad;
    }
    jet
}

fn ed_two_jet(sys: &MotionSystem, gauge: f64, rng: &mut ChaCha8Rng) -> ExtendedJet {
    let ps = &sys.gradient.ps;
    let space = ps.space;
    let (c, potential) = match &sys.family {
        worldsheet::motion::Family::Electrodynamics { c, potential } => (*c, potential.clone()),
        _ => unreachable!(),
    };
    let mut u = || rng.gen_range(-1.0..1.0);
    let x = vec![u(), u()];
    let phi = vec![u(), u()];
    let f = DMatrix::from_fn(2, 2, |_, _| u());
    // s[a][i][j] = ∂_i∂_jφ^a
    let mut s = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        s[a][0][0] = u();
        s[a][1][1] = u();
        s[a][0][1] = u();
        s[a][1][0] = s[a][0][1];
    }
    let q = [u(), u()];
    let value = |v: &Var| match v {
        Var::X(i) => x[*i],
        Var::Phi(a) => phi[*a],
        _ => 0.0,
    };
    let d0 = potential.derivative(&Var::Phi(0)).evaluate(value);
    let d1 = potential.derivative(&Var::Phi(1)).evaluate(value);
    // ∂₁F = s¹₀₁ − s⁰₁₁ = −Φ_{φ0}/2C, ∂₀F = s¹₀₀ − s⁰₀₁ = Φ_{φ1}/2C
    s[0][1][1] = s[1][0][1] + d0 / (2.0 * c);
    s[1][0][0] = s[0][0][1] + d1 / (2.0 * c);
    let mut jet = ExtendedJet::zeros(ps);
    jet.x = x.clone();
    jet.phi = phi.clone();
    jet.f = f.clone();
    jet.p = sys.algebraic_momenta(&x, &phi, &f, gauge).unwrap();
    let idx = |l: Label| l.to_index(space).unwrap();
    let pos = |l: Label| ps.momentum_position(&idx(l)).unwrap();
    for k in 0..2 {
        let df = s[1][0][k] - s[0][1][k];
        jet.pderiv[(pos(maxwell::fields()), k)] = q[k];
        jet.pderiv[(pos(maxwell::mixed(1, 0)), k)] = q[k] * f[(0, 0)] + gauge * s[0][0][k];
        jet.pderiv[(pos(maxwell::mixed(0, 1)), k)] = -q[k] * f[(1, 1)] - gauge * s[1][1][k];
        jet.pderiv[(pos(maxwell::mixed(0, 0)), k)] =
            -q[k] * f[(1, 0)] - gauge * s[1][0][k] + 2.0 * c * df;
        jet.pderiv[(pos(maxwell::mixed(1, 1)), k)] =
            q[k] * f[(0, 1)] + gauge * s[0][1][k] + 2.0 * c * df;
    }
    // π_{w;k} from η ≡ 0 along the section
    let w = pos(maxwell::volume());
    for k in 0..2 {
        jet.pderiv[(w, k)] = 0.0;
        let rest = sys.gradient.along(&jet, k);
        let dw = sys.gradient.at(&jet)[ps.momentum_axis(w)];
        jet.pderiv[(w, k)] = -rest / dw;
    }
    jet
}

#[test]
fn ed_two_jets_satisfy_degeneracy() {
    let model = electrodynamics_1p1(0.25, Polynomial::default()).unwrap();
    let sys = system(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let c = model.coupling().unwrap();
    for k in 0..100 {
        let gauge = c * (0.5 + 3.0 * (k as f64) / 100.0);
        if (gauge - 4.0 * c).abs() < 0.1 {
            continue;
        }
        let jet = ed_two_jet(&sys, gauge, &mut rng);
        for (tag, r) in sys.slot_residuals(&jet).unwrap() {
            assert!(r.abs() < 1e-10, "{tag} {r}");
        }
    }
    let phi =
        Polynomial::var(Var::Phi(1)).scale(0.4) + Polynomial::var(Var::Phi(0)).pow(2).scale(0.3);
    let model = electrodynamics_1p1(0.25, phi).unwrap();
    let sys = system(&model);
    for _ in 0..100 {
        let jet = ed_two_jet(&sys, 2.0 * c, &mut rng);
        for (tag, r) in sys.slot_residuals(&jet).unwrap() {
            assert!(r.abs() < 1e-10, "{tag} {r}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_two_jets_satisfy_degeneracy(seed in any::<u64>(), n in 2usize..=3, m in 0.0f64..2.0) {
        let g = if n == 2 { diag(&[1.0, -1.0]) } else { diag(&[1.0, -1.0, -1.0]) };
        let model = scalar_ndim(g.clone(), mass_potential(m)).unwrap();
        let sys = system(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let jet = scalar_two_jet(&sys, &g, &mut rng);
        let sigma = model.expected_surface.as_ref().unwrap();
        let alpha = sign(n);
        for r in degeneracy_residual(sigma, &jet, alpha).unwrap() {
            prop_assert!(r.abs() < 1e-10);
        }
    }

    #[test]
    fn breaking_the_field_equation_is_detected(seed in any::<u64>(), eps in 1e-3f64..1.0) {
        let g = diag(&[1.0, -1.0, -1.0]);
        let model = scalar_ndim(g.clone(), mass_potential(1.0)).unwrap();
        let sys = system(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jet = scalar_two_jet(&sys, &g, &mut rng);
        let p0 = sys.gradient.ps.momentum_position(&model.space().field_slot(0, 0)).unwrap();
        jet.pderiv[(p0, 0)] += eps;
        let r = tag_residual(&sys, &jet, "HE3");
        prop_assert!((r.abs() - eps).abs() < 1e-10);
    }
}

#[test]
fn surface_vanishes_identically_on_the_legendre_image() {
    // Substitute P^i = (−1)^i g^{ij} f_j and P^φ = L − f ∂L/∂f into η.
    #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
    enum V {
        Base(Var),
        F(usize),
    }
    for g in [
        diag(&[1.0, -1.0]),
        diag(&[1.0, -1.0, -1.0]),
        DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, -1.0]),
    ] {
        let n = g.nrows();
        let psi = mass_potential(1.2) + Polynomial::var(Var::X(0)) * Polynomial::var(Var::Phi(0));
        let model = scalar_ndim(g.clone(), psi.clone()).unwrap();
        let space = model.space();
        let mut eta = model
            .expected_surface
            .unwrap()
            .eta
            .map_vars(|v| V::Base(v.clone()));
        let f = |j| Polynomial::var(V::F(j));
        for i in 0..n {
            let mut pi = Polynomial::default();
            for j in 0..n {
                pi = pi + f(j).scale(sign(i) * g[(i, j)]);
            }
            eta = eta.substitute(&V::Base(Var::p(space, &space.field_slot(0, i))), &pi);
        }
        let mut quad = Polynomial::default();
        for i in 0..n {
            for j in 0..n {
                quad = quad + (&f(i) * &f(j)).scale(g[(i, j)]);
            }
        }
        // L − f·∂L/∂f = −½ g f f + Ψ
        let pphi = quad.scale(-0.5) + psi.map_vars(|v| V::Base(v.clone()));
        let eta = eta.substitute(&V::Base(Var::p(space, &space.volume_index())), &pphi);
        assert!(eta.pruned(1e-15).is_empty(), "{eta:?}");
    }
}

fn plane_wave_grid(k: f64, m: f64, h: f64, n: usize) -> SpacetimeGrid {
    let w = (k * k + m * m).sqrt();
    // unequal spacings keep the leading truncation error from cancelling when m = 0
    SpacetimeGrid::sample(&[n, n], &[0.5 * h, h], 1, |x| {
        vec![(k * x[1] - w * x[0]).cos()]
    })
}

#[test]
fn euler_lagrange_oracle_converges_on_plane_waves() {
    for (m, k) in [(0.0, 1.0), (1.0, 2.0)] {
        let model = kg_1p1(m).unwrap();
        let coarse =
            euler_lagrange_residual(&model, &plane_wave_grid(k, m, 1.0 / 32.0, 33)).unwrap();
        let fine = euler_lagrange_residual(&model, &plane_wave_grid(k, m, 1.0 / 64.0, 65)).unwrap();
        let ratio = coarse.get("Res").unwrap().max / fine.get("Res").unwrap().max;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }
}

#[test]
fn noise_field_residual_is_large() {
    let model = kg_1p1(1.0).unwrap();
    let h = 1.0 / 128.0;
    let solution = euler_lagrange_residual(&model, &plane_wave_grid(2.0, 1.0, h, 129)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut noise = plane_wave_grid(2.0, 1.0, h, 129);
    noise.fields[0]
        .iter_mut()
        .for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let noisy = euler_lagrange_residual(&model, &noise).unwrap();
    assert!(noisy.get("Res").unwrap().l2 >= 1e3 * solution.get("Res").unwrap().l2);
}

#[test]
fn euler_lagrange_oracle_for_ed() {
    // φ⁰ = 0, φ¹ = F x⁰ + sin(x¹) solves the sourceless equations
    let model = electrodynamics_1p1(0.25, Polynomial::default()).unwrap();
    let grid = SpacetimeGrid::sample(&[9, 9], &[0.1, 0.1], 2, |x| {
        vec![0.0, 0.7 * x[0] + x[1].sin()]
    });
    let r = euler_lagrange_residual(&model, &grid).unwrap();
    assert!(r.max() < 1e-12);
    let bad = SpacetimeGrid::sample(&[9, 9], &[0.1, 0.1], 2, |x| vec![0.0, x[0] * x[0]]);
    assert!(
        euler_lagrange_residual(&model, &bad)
            .unwrap()
            .get("Res2")
            .unwrap()
            .max
            > 0.5
    );
    let tiny = SpacetimeGrid::sample(&[2, 9], &[0.1, 0.1], 2, |_| vec![0.0, 0.0]);
    assert!(euler_lagrange_residual(&model, &tiny).is_err());
}
