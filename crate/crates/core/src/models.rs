//! Preset models and the derivation pipeline from a density to its surface.

use nalgebra::{DMatrix, DVector};

use crate::coords::Var;
use crate::error::{Error, Result};
use crate::exterior::TargetSpace;
use crate::lagrangian::{
    check_metric, graph_variety, homogenize, maxwell, BasePoint, HomogeneousLagrangian,
    LagrangianDensity, Potential, QuadricVariety,
};
use crate::legendre::{affine_chart, dual_quadric, ImplicitSurface};
use crate::poly::{Monomial, Polynomial};

/// Which family a model belongs to, with the family-specific constants.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelKind {
    /// `L = ½ g^{ij} ∂_iφ ∂_jφ + Ψ(x, φ)`.
    Scalar,
    /// `L = C F₀₁² + Φ(A, x)` with `C = 2 C₀`.
    Electrodynamics { c0: f64 },
}

/// Naming scheme for the components of the degeneracy condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagScheme {
    /// `p_{φ0}`, `p_{φ1}`, `φ`, `x⁰`, `x¹` slots of the guessed 1+1 surface.
    Part2,
    /// `P^φ`, `P^i`, `φ`, `x^k` slots of the n-dimensional scalar.
    He,
    /// The ten slots of 1+1 electrodynamics.
    Heem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub n_worldsheet: usize,
    pub n_fields: usize,
    /// Inverse metric `g^{ij}` on the worldsheet.
    pub metric: DMatrix<f64>,
    /// `Ψ(x, φ)` for scalars, `Φ(A, x)` for electrodynamics.
    pub potential: Potential,
    pub kind: ModelKind,
    pub tags: TagScheme,
    pub expected_surface: Option<ImplicitSurface>,
}

fn minkowski(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => 1.0,
        _ if i == j => -1.0,
        _ => 0.0,
    })
}

/// `−½ m² φ²`.
pub fn mass_potential(m: f64) -> Potential {
    Polynomial::var(Var::Phi(0)).pow(2) * (-0.5 * m * m)
}

/// `P^φ + ½ ǧ_{ij} P^i P^j − Ψ`, with `ǧ_{ij}` the inverse of `(−1)^{i+j} g^{ij}`.
pub fn scalar_surface(g: &DMatrix<f64>, psi: &Potential) -> Result<ImplicitSurface> {
    let n = g.nrows();
    let space = TargetSpace::new(1, n);
    let lower = check_metric(g).try_inverse().ok_or(Error::Degenerate {
        rank: n - 1,
        size: n,
    })?;
    let p = |i: usize| Var::p(space, &space.field_slot(0, i));
    let mut eta = Polynomial::var(Var::p(space, &space.volume_index()));
    for i in 0..n {
        for j in 0..n {
            let c = 0.5 * lower[(i, j)];
            if c != 0.0 {
                eta.add_term(Monomial::var(p(i)).mul(&Monomial::var(p(j))), c);
            }
        }
    }
    Ok(ImplicitSurface::new(space, eta - psi.clone()))
}

/// The Π-homogeneous dual polynomial of 1+1 electrodynamics,
/// `(4ΠC + P_u)[P_u(ΠΦ + P_w) − P₀₀P₁₁ + P₀₁P₁₀] + ΠC(P₀₀ + P₁₁)²`, where
/// `P_u = P[φ⁰,φ¹]`, `P_w = P[x⁰,x¹]` and `P_{ab} = P[φ^a,x^b]`.
pub fn ed_dual_polynomial(c: f64, phi: &Potential) -> Polynomial<Var> {
    let v = |l| Polynomial::var(Var::P(l));
    let pi = Polynomial::var(Var::Pi);
    let pu = v(maxwell::fields());
    let pw = v(maxwell::volume());
    let (p00, p01, p10, p11) = (
        v(maxwell::mixed(0, 0)),
        v(maxwell::mixed(0, 1)),
        v(maxwell::mixed(1, 0)),
        v(maxwell::mixed(1, 1)),
    );
    let first = pi.scale(4.0 * c) + pu.clone();
    let bracket = &(&pu * &(&(&pi * phi) + &pw)) - &(&p00 * &p11) + &p01 * &p10;
    &first * &bracket + &pi.scale(c) * &(&p00 + &p11).pow(2)
}

/// [`ed_dual_polynomial`] at `Π = −1`.
pub fn ed_surface(c: f64, phi: &Potential) -> ImplicitSurface {
    let eta = ed_dual_polynomial(c, phi).partial_eval(|v| (*v == Var::Pi).then_some(-1.0));
    ImplicitSurface::new(maxwell::space(), eta)
}

/// Klein–Gordon in 1+1 with `g = diag(1, −1)` and `Ψ = −½ m² φ²`.
pub fn kg_1p1(m: f64) -> Result<ModelSpec> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::Configuration(format!(
            "mass must be a finite nonnegative number, got {m}"
        )));
    }
    let mut spec = scalar_ndim(minkowski(2), mass_potential(m))?;
    spec.name = "kg1p1".into();
    spec.tags = TagScheme::Part2;
    Ok(spec)
}

/// A single scalar with inverse metric `g` and potential `Ψ(x, φ)`.
pub fn scalar_ndim(g: DMatrix<f64>, psi: Potential) -> Result<ModelSpec> {
    // validates symmetry and shape
    LagrangianDensity::quadratic_scalar(g.clone(), psi.clone())?;
    let n = g.nrows();
    if n == 0 {
        return Err(Error::Configuration(
            "metric must have positive dimension".into(),
        ));
    }
    let q = QuadricVariety::new(g.clone())?;
    if !q.is_nondegenerate() {
        return Err(Error::Degenerate {
            rank: q.rank(),
            size: n,
        });
    }
    check_potential_vars(&psi, 1, n)?;
    let surface = scalar_surface(&g, &psi)?;
    Ok(ModelSpec {
        name: "scalar-ndim".into(),
        n_worldsheet: n,
        n_fields: 1,
        metric: g,
        potential: psi,
        kind: ModelKind::Scalar,
        tags: TagScheme::He,
        expected_surface: Some(surface),
    })
}

/// 1+1 electrodynamics with coupling `C₀` and potential `Φ(A, x)`.
pub fn electrodynamics_1p1(c0: f64, phi: Potential) -> Result<ModelSpec> {
    if c0 == 0.0 || !c0.is_finite() {
        return Err(Error::Configuration(format!(
            "coupling C0 must be finite and nonzero, got {c0}"
        )));
    }
    check_potential_vars(&phi, 2, 2)?;
    Ok(ModelSpec {
        name: "ed1p1".into(),
        n_worldsheet: 2,
        n_fields: 2,
        metric: minkowski(2),
        expected_surface: Some(ed_surface(2.0 * c0, &phi)),
        potential: phi,
        kind: ModelKind::Electrodynamics { c0 },
        tags: TagScheme::Heem,
    })
}

/// Parses a diagonal metric written `diag:1,-1,-1`.
pub fn parse_metric(s: &str) -> Result<DMatrix<f64>> {
    let body = s
        .strip_prefix("diag:")
        .ok_or_else(|| Error::Parse(format!("metric `{s}` must have the form diag:a,b,...")))?;
    let entries = body
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad metric entry `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_diagonal(&DVector::from_vec(entries)))
}

fn check_potential_vars(p: &Potential, n_fields: usize, n_worldsheet: usize) -> Result<()> {
    for v in p.variables() {
        let ok = match v {
            Var::Phi(a) => a < n_fields,
            Var::X(i) => i < n_worldsheet,
            Var::P(_) | Var::Pi => false,
        };
        if !ok {
            return Err(Error::Configuration(format!(
                "potential may depend only on x and φ, found {v}"
            )));
        }
    }
    Ok(())
}

impl ModelSpec {
    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.n_fields, self.n_worldsheet)
    }

    /// `C = 2 C₀` for electrodynamics.
    pub fn coupling(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Electrodynamics { c0 } => Some(2.0 * c0),
            ModelKind::Scalar => None,
        }
    }

    pub fn density(&self) -> LagrangianDensity {
        match self.kind {
            ModelKind::Scalar => {
                LagrangianDensity::quadratic_scalar(self.metric.clone(), self.potential.clone())
                    .expect("validated at construction")
            }
            ModelKind::Electrodynamics { c0 } => {
                LagrangianDensity::maxwell_1p1(c0, self.potential.clone())
            }
        }
    }

    pub fn homogeneous(&self) -> HomogeneousLagrangian {
        homogenize(&self.density())
    }

    pub fn potential_at(&self, x: &[f64], phi: &[f64]) -> f64 {
        let base = BasePoint {
            x: x.to_vec(),
            phi: phi.to_vec(),
        };
        crate::lagrangian::eval_potential(&self.potential, &base)
    }
}

/// The surface produced by the pipeline with a log of each diagram step.
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub surface: ImplicitSurface,
    pub log: Vec<String>,
}

/// Runs homogenization, graph variety, duality, chart and the Hamilton
/// function step. For scalars the potential enters the quadric as a single
/// number, so the chart is computed at `Ψ ∈ {0, 1, −1}`, checked to be affine
/// in `Ψ`, and the symbolic potential is substituted. Electrodynamics uses the
/// closed-form dual, validated by the membership oracle elsewhere.
pub fn derive(model: &ModelSpec) -> Result<Derivation> {
    let mut log = vec![format!(
        "(a) homogenize: Λ(υ) = L(jet(υ)) · dx^0∧…∧dx^{}(υ) on {} fields over {} worldsheet dimensions",
        model.n_worldsheet - 1,
        model.n_fields,
        model.n_worldsheet
    )];
    let surface = match model.kind {
        ModelKind::Scalar => {
            let space = model.space();
            let chart_at = |psi: f64| -> Result<(QuadricVariety, QuadricVariety, ImplicitSurface)> {
                let density = LagrangianDensity::quadratic_scalar(
                    model.metric.clone(),
                    Polynomial::constant(psi),
                )?;
                let q = graph_variety(&density, &BasePoint::origin(space))?;
                let d = dual_quadric(&q)?;
                let s = affine_chart(&d, space)?;
                Ok((q, d, s))
            };
            let (q0, d0, s0) = chart_at(0.0)?;
            let (_, _, sp) = chart_at(1.0)?;
            let (_, _, sm) = chart_at(-1.0)?;
            log.push(format!(
                "(b) graph quadric at Ψ = 0: G = {}",
                fmt_matrix(q0.matrix())
            ));
            log.push(format!(
                "(c) dual quadric ∝ G⁻¹: {}",
                fmt_matrix(d0.matrix())
            ));
            let curvature = (sp.eta.clone() + sm.eta.clone() - s0.eta.scale(2.0)).max_abs_coeff();
            let slope = (sp.eta.clone() - sm.eta.clone()).scale(0.5);
            if curvature > 1e-12 || !slope.variables().is_empty() {
                return Err(Error::Constraint(
                    "chart is not affine in the potential value".into(),
                ));
            }
            let eta = s0.eta.clone() + &slope * &model.potential;
            log.push(format!(
                "(d) chart Π = −1, normalized on P^φ, potential coefficient {}: {} = 0",
                slope.constant_term(),
                eta
            ));
            let pphi = Var::p(space, &space.volume_index());
            let h = Polynomial::var(pphi.clone()) - eta.clone();
            log.push(format!("(e) Hamilton function: {pphi} = {h}"));
            ImplicitSurface::new(space, eta)
        }
        ModelKind::Electrodynamics { c0 } => {
            let c = 2.0 * c0;
            log.push(format!(
                "(b) graph variety: F = ΛX^{{01}} − {c}(X^{{0̲0}} + X^{{1̲1}})² − Φ(X^{{01}})² = 0 with Plücker relation π = 0"
            ));
            log.push(format!(
                "(c) dual variety: covectors α dF + β dπ, Π-homogeneous equation {} = 0",
                ed_dual_polynomial(c, &model.potential)
            ));
            let s = ed_surface(c, &model.potential);
            log.push(format!("(d) chart Π = −1: {s}"));
            log.push("(e) Σ is multivalued over P[phi0,phi1]; no single Hamilton function, the system is constrained".into());
            s
        }
    };
    Ok(Derivation { surface, log })
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = m
        .row_iter()
        .map(|r| {
            r.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!("[[{}]]", rows.join("], ["))
}

/// Looks up a preset by CLI name with default parameters.
pub fn preset(name: &str) -> Result<ModelSpec> {
    match name {
        "kg1p1" => kg_1p1(0.0),
        "scalar-ndim" => scalar_ndim(minkowski(3), Polynomial::default()),
        "ed1p1" => electrodynamics_1p1(0.25, Polynomial::default()),
        other => Err(Error::Configuration(format!("unknown model `{other}`"))),
    }
}
