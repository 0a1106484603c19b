//! Seeded verification suites. Every suite draws from the one generator it is
//! handed, so a report depends only on the model, sample count and seed.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use worldsheet::exterior::{
    graph_tangent, is_decomposable, plucker_residuals, JetSample, MultiIndex, Polyvector,
};
use worldsheet::lagrangian::{homogenize, maxwell, BasePoint, QuadricVariety};
use worldsheet::legendre::{
    constrained_dual_sample, detect_degeneracy, double_dual_check, legendre_map, ImplicitSurface,
};
use worldsheet::models::{derive, ModelKind, ModelSpec};
use worldsheet::motion::{build_motion_system, redundancy_check, sample_independent_jets};
use worldsheet::Result;

/// Residual tolerances used when `--tol` is not given.
pub const CRIT1_TOL: f64 = 1e-12;
pub const ORDER_TOL: f64 = 0.1;
pub const DOUBLE_DUAL_TOL: f64 = 1e-10;
pub const PLUCKER_TOL: f64 = 1e-10;
pub const MEMBERSHIP_TOL: f64 = 1e-9;
pub const REDUNDANCY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    /// The worst value over the suite, compared against `tolerance`.
    pub metric: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: BTreeMap<String, f64>,
}

impl SuiteResult {
    fn new(name: &str, metric: f64, tolerance: f64) -> Self {
        SuiteResult {
            name: name.into(),
            metric,
            tolerance,
            passed: metric <= tolerance,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn random_base(model: &ModelSpec, rng: &mut ChaCha8Rng) -> BasePoint {
    BasePoint {
        x: (0..model.n_worldsheet)
            .map(|_| uniform(rng, -1.0, 1.0))
            .collect(),
        phi: (0..model.n_fields)
            .map(|_| uniform(rng, -1.0, 1.0))
            .collect(),
    }
}

fn random_jet(model: &ModelSpec, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(model.n_fields, model.n_worldsheet, |_, _| {
        uniform(rng, -2.0, 2.0)
    })
}

fn tangent(base: &BasePoint, jet: DMatrix<f64>) -> Result<Polyvector> {
    Ok(graph_tangent(&JetSample::new(
        base.x.clone(),
        base.phi.clone(),
        jet,
    )?))
}

/// `⟨P, ξ⟩ = Λ(ξ)` for the momentum of a random positively rescaled graph
/// tangent, relative to `max(|Λ|, |⟨P|·|ξ⟩|)`.
pub fn crit1(
    model: &ModelSpec,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let density = model.density();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let base = random_base(model, rng);
        let lam = homogenize(&density).at(base.clone());
        let xi = tangent(&base, random_jet(model, rng))?.scaled(&uniform(rng, 0.1, 10.0));
        let m = legendre_map(&lam, &xi)?;
        let lhs = m.pairing(&xi)?;
        let rhs = lam.evaluate(&xi)?;
        let scale: f64 =
            m.p.iter()
                .map(|(i, p)| (p * xi.get(i)).abs())
                .sum::<f64>()
                .max(rhs.abs());
        let r = if scale == 0.0 {
            (lhs - rhs).abs()
        } else {
            (lhs - rhs).abs() / scale
        };
        worst = worst.max(r);
    }
    Ok(SuiteResult::new("crit1", worst, tol).with("samples", samples as f64))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Stationarity of `f(η) = ⟨π(η), ξ⟩` at `η = ξ`: along a decomposable
/// curve `η(ε) = graph(J + εD)` the change is `O(ε²)`. Reports the worst
/// deviation of the fitted order from 2.
pub fn crit2(
    model: &ModelSpec,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let density = model.density();
    let eps: Vec<f64> = (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect();
    let (mut worst, mut lo, mut hi): (f64, f64, f64) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    let mut skipped = 0usize;
    for _ in 0..samples {
        let base = random_base(model, rng);
        let lam = homogenize(&density).at(base.clone());
        let jet = random_jet(model, rng);
        let dir = random_jet(model, rng);
        let xi = tangent(&base, jet.clone())?;
        let f0 = legendre_map(&lam, &xi)?.pairing(&xi)?;
        let mut errs = Vec::with_capacity(eps.len());
        for e in &eps {
            let eta = tangent(&base, &jet + &dir * *e)?;
            errs.push((legendre_map(&lam, &eta)?.pairing(&xi)? - f0).abs());
        }
        // a vanishing second variation leaves nothing to fit
        if errs.iter().any(|e| *e <= 1e-13 * f0.abs().max(1.0)) {
            skipped += 1;
            continue;
        }
        let order = log_log_slope(&eps, &errs);
        worst = worst.max((order - 2.0).abs());
        lo = lo.min(order);
        hi = hi.max(order);
    }
    Ok(SuiteResult::new("crit2", worst, tol)
        .with("samples", samples as f64)
        .with("skipped", skipped as f64)
        .with("min_order", lo)
        .with("max_order", hi))
}

/// Random symmetric 5×5 quadrics with full numerical rank.
pub fn double_dual(samples: usize, tol: f64, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    let mut drawn = 0usize;
    let mut done = 0usize;
    while done < samples {
        drawn += 1;
        let a = DMatrix::from_fn(5, 5, |_, _| uniform(rng, -1.0, 1.0));
        let q = QuadricVariety::new(&a + a.transpose())?;
        if detect_degeneracy(&q).defected {
            continue;
        }
        worst = worst.max(double_dual_check(&q)?);
        done += 1;
    }
    Ok(SuiteResult::new("double_dual", worst, tol)
        .with("samples", samples as f64)
        .with("drawn", drawn as f64))
}

/// Graph tangents of random jets are decomposable; the witness
/// `e{01} + e{23}` is not. The metric is the largest relative residual on
/// graph tangents, and the suite fails outright if the witness passes.
pub fn plucker(
    model: &ModelSpec,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let base = random_base(model, rng);
        let xi = tangent(&base, random_jet(model, rng))?;
        let scale = xi.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
        let r = plucker_residuals(&xi)
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        worst = worst.max(r / (scale * scale));
    }
    let witness = Polyvector::from_coeffs(
        4,
        2,
        [
            (MultiIndex::new(vec![0, 1])?, 1.0),
            (MultiIndex::new(vec![2, 3])?, 1.0),
        ],
    )?;
    let rejected = !is_decomposable(&witness, tol);
    let mut out = SuiteResult::new("plucker", worst, tol)
        .with("samples", samples as f64)
        .with("witness_rejected", if rejected { 1.0 } else { 0.0 });
    out.passed &= rejected;
    Ok(out)
}

/// Momenta land on the derived surface. Scalars use the momentum map of
/// random jets; electrodynamics uses `α dF + β dπ` at random points of the
/// variety `F = 0`, `π = 0` with random multipliers.
pub fn membership(
    model: &ModelSpec,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let surface: ImplicitSurface = derive(model)?.surface;
    let density = model.density();
    let mut worst: f64 = 0.0;
    let mut at_infinity = 0usize;
    for _ in 0..samples {
        let base = random_base(model, rng);
        let m = match model.kind {
            ModelKind::Scalar => {
                let lam = homogenize(&density).at(base.clone());
                legendre_map(&lam, &tangent(&base, random_jet(model, rng))?)?
            }
            ModelKind::Electrodynamics { c0 } => {
                let c = 2.0 * c0;
                let xi = tangent(&base, random_jet(model, rng))?.scaled(&uniform(rng, 0.1, 10.0));
                let phi = model.potential_at(&base.x, &base.phi);
                let vol = xi.get(&model.space().volume_index());
                let trace = xi.get(&maxwell::mixed(0, 0).to_index(model.space())?)
                    + xi.get(&maxwell::mixed(1, 1).to_index(model.space())?);
                let lambda = (c * trace * trace + phi * vol * vol) / vol;
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let alpha = sign * uniform(rng, 0.5, 2.0);
                let beta = uniform(rng, -2.0, 2.0);
                constrained_dual_sample(
                    &maxwell::graph_polynomial(c, phi),
                    &[maxwell::plucker()],
                    lambda,
                    &xi,
                    &[alpha, beta],
                )?
            }
        };
        if m.at_infinity {
            at_infinity += 1;
            continue;
        }
        worst = worst.max(surface.relative_residual(&base, &m));
    }
    Ok(SuiteResult::new("membership", worst, tol)
        .with("samples", samples as f64)
        .with("at_infinity", at_infinity as f64))
}

/// Components certified redundant vanish on jets satisfying the
/// independent subset.
pub fn redundancy(
    model: &ModelSpec,
    samples: usize,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SuiteResult> {
    let surface = derive(model)?.surface;
    let system = build_motion_system(&surface, model)?;
    let jets = sample_independent_jets(&system, samples, None, rng)?;
    let report = redundancy_check(&system, &jets)?;
    let dependent: Vec<&str> = system.redundant.iter().map(|c| c.tag.as_str()).collect();
    let independent: Vec<&str> = report
        .entries
        .keys()
        .map(String::as_str)
        .filter(|t| !dependent.contains(t))
        .collect();
    let mut out = SuiteResult::new(
        "redundancy",
        report.max_over(dependent.iter().copied()),
        tol,
    )
    .with("samples", samples as f64)
    .with("independent_max", report.max_over(independent));
    for tag in dependent {
        out.details
            .insert(format!("max_{tag}"), report.get(tag).map_or(0.0, |s| s.max));
    }
    Ok(out)
}
