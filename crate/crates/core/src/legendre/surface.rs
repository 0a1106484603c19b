use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MomentumPoint;
use crate::coords::Var;
use crate::error::{Error, Result};
use crate::exterior::TargetSpace;
use crate::lagrangian::BasePoint;
use crate::poly::{Monomial, Polynomial};

/// A hypersurface `Σ = {η = 0}` in phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitSurface {
    pub n_worldsheet: usize,
    pub n_fields: usize,
    pub eta: Polynomial<Var>,
}

#[derive(Serialize, Deserialize)]
struct SurfaceJson {
    n_worldsheet: usize,
    n_fields: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    monomial: Vec<String>,
    coeff: f64,
}

impl ImplicitSurface {
    pub fn new(space: TargetSpace, eta: Polynomial<Var>) -> Self {
        ImplicitSurface {
            n_worldsheet: space.n_worldsheet,
            n_fields: space.n_fields,
            eta,
        }
    }

    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.n_fields, self.n_worldsheet)
    }

    pub fn degree(&self) -> u32 {
        self.eta.degree()
    }

    pub fn value_of(&self, base: &BasePoint, m: &MomentumPoint, v: &Var) -> f64 {
        match v {
            Var::X(_) | Var::Phi(_) => base.value(v),
            Var::Pi => m.pi,
            Var::P(l) => l.to_index(self.space()).map(|i| m.p.get(&i)).unwrap_or(0.0),
        }
    }

    pub fn evaluate(&self, base: &BasePoint, m: &MomentumPoint) -> f64 {
        self.eta.evaluate(|v| self.value_of(base, m, v))
    }

    /// `|η|` divided by the sum of absolute term values.
    pub fn relative_residual(&self, base: &BasePoint, m: &MomentumPoint) -> f64 {
        let (value, scale) = self.eta.evaluate_with_scale(|v| self.value_of(base, m, v));
        if scale == 0.0 {
            value.abs()
        } else {
            value.abs() / scale
        }
    }

    /// Largest relative residual over a sample set. Evaluation fans out over
    /// the rayon pool; the maximum does not depend on the order.
    pub fn max_relative_residual(&self, samples: &[(BasePoint, MomentumPoint)]) -> f64 {
        samples
            .par_iter()
            .map(|(b, m)| self.relative_residual(b, m))
            .reduce(|| 0.0, f64::max)
    }

    /// Rescales so that the coefficient of `v` is `+1`.
    pub fn normalized_on(&self, v: &Var) -> Result<Self> {
        let eta = self
            .eta
            .normalized_on(&Monomial::var(v.clone()), 1.0)
            .ok_or_else(|| Error::Constraint(format!("surface does not depend linearly on {v}")))?;
        Ok(ImplicitSurface {
            eta,
            ..self.clone()
        })
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.eta.max_coeff_diff(&other.eta)
    }

    pub fn to_json(&self) -> String {
        let terms = self
            .eta
            .terms()
            .map(|(m, c)| TermJson {
                monomial: m.powers().iter().map(|(v, p)| format!("{v}:{p}")).collect(),
                coeff: c,
            })
            .collect();
        let doc = SurfaceJson {
            n_worldsheet: self.n_worldsheet,
            n_fields: self.n_fields,
            terms,
        };
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SurfaceJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let mut eta = Polynomial::default();
        for t in doc.terms {
            let powers = t
                .monomial
                .iter()
                .map(|entry| {
                    let (name, power) = entry
                        .rsplit_once(':')
                        .ok_or_else(|| Error::Parse(format!("bad monomial entry `{entry}`")))?;
                    let p: u32 = power
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad power in `{entry}`")))?;
                    Ok((name.parse::<Var>()?, p))
                })
                .collect::<Result<Vec<_>>>()?;
            eta.add_term(Monomial::from_powers(powers), t.coeff);
        }
        Ok(ImplicitSurface {
            n_worldsheet: doc.n_worldsheet,
            n_fields: doc.n_fields,
            eta,
        })
    }
}

impl std::fmt::Display for ImplicitSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} = 0", self.eta)
    }
}
