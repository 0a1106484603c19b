use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use worldsheet::coords::{GraphVar, Var};
use worldsheet::exterior::{graph_tangent, JetSample};
use worldsheet::lagrangian::maxwell;
use worldsheet::models::{
    derive, electrodynamics_1p1, kg_1p1, mass_potential, parse_metric, preset, scalar_ndim,
};
use worldsheet::poly::Polynomial;

#[test]
fn every_preset_reproduces_its_surface() {
    let mut models: Vec<_> = ["kg1p1", "scalar-ndim", "ed1p1"]
        .iter()
        .map(|n| preset(n).unwrap())
        .collect();
    models.push(kg_1p1(2.0).unwrap());
    models.push(
        scalar_ndim(
            parse_metric("diag:1,-1,-1,-1").unwrap(),
            mass_potential(0.4),
        )
        .unwrap(),
    );
    models.push(scalar_ndim(parse_metric("diag:2,-3").unwrap(), Polynomial::default()).unwrap());
    models.push(electrodynamics_1p1(-0.3, Polynomial::var(Var::Phi(1)).pow(2) * 0.2).unwrap());
    for m in models {
        let d = derive(&m).unwrap();
        let expected = m.expected_surface.as_ref().unwrap();
        // scalar surfaces are linear in P^φ; the electrodynamics surface is
        // compared in its stored normalization
        let vol = Var::p(m.space(), &m.space().volume_index());
        let gap = match (d.surface.normalized_on(&vol), expected.normalized_on(&vol)) {
            (Ok(a), Ok(b)) => a.max_coeff_diff(&b),
            _ => d.surface.max_coeff_diff(expected) / expected.eta.max_abs_coeff(),
        };
        assert!(gap <= 1e-12, "{}: {gap:e}", m.name);
    }
}

proptest! {
    #[test]
    fn ed_graph_tangents_satisfy_the_plucker_relation(seed in any::<u64>(), s in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = maxwell::space();
        let jet = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-3.0..3.0));
        let xi = graph_tangent(&JetSample::from_derivatives(jet)).scaled(&s);
        let value = |v: &GraphVar| match v {
            GraphVar::X(l) => xi.get(&l.to_index(space).unwrap()),
            GraphVar::Lambda => 0.0,
        };
        let (r, scale) = maxwell::plucker().evaluate_with_scale(value);
        prop_assert!(r.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }
}
