use rayon::prelude::*;

use super::ResidualReport;
use crate::coords::Var;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec};

/// Field values on a uniform grid over the worldsheet, row-major with the
/// last axis fastest. Node `(n_0, …)` sits at `x^i = n_i h_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeGrid {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    /// One value array per field.
    pub fields: Vec<Vec<f64>>,
}

impl SpacetimeGrid {
    /// Samples `f(x) -> φ` on the grid.
    pub fn sample(
        shape: &[usize],
        spacing: &[f64],
        n_fields: usize,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Self {
        let total: usize = shape.iter().product();
        let mut fields = vec![Vec::with_capacity(total); n_fields];
        let mut x = vec![0.0; shape.len()];
        for flat in 0..total {
            let idx = unflatten(shape, flat);
            for (i, n) in idx.iter().enumerate() {
                x[i] = *n as f64 * spacing[i];
            }
            for (a, v) in f(&x).into_iter().enumerate() {
                fields[a].push(v);
            }
        }
        SpacetimeGrid {
            shape: shape.to_vec(),
            spacing: spacing.to_vec(),
            fields,
        }
    }

    fn stride(&self, axis: usize) -> usize {
        self.shape[axis + 1..].iter().product()
    }

    /// Centered `∂_i∂_j` of field `a` at an interior node.
    fn second(&self, a: usize, flat: usize, i: usize, j: usize) -> f64 {
        let u = &self.fields[a];
        let (si, sj) = (self.stride(i), self.stride(j));
        let (hi, hj) = (self.spacing[i], self.spacing[j]);
        if i == j {
            (u[flat + si] - 2.0 * u[flat] + u[flat - si]) / (hi * hi)
        } else {
            (u[flat + si + sj] - u[flat + si - sj] - u[flat - si + sj] + u[flat - si - sj])
                / (4.0 * hi * hj)
        }
    }
}

fn unflatten(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for i in (0..shape.len()).rev() {
        idx[i] = flat % shape[i];
        flat /= shape[i];
    }
    idx
}

/// Centered-difference residual of the Euler–Lagrange equations at interior
/// nodes: `g^{ij} ∂_i∂_jφ − ∂Ψ/∂φ` for scalars (tag `Res`), and
/// `∂Φ/∂φ^0 + 2C ∂_1F₀₁`, `∂Φ/∂φ^1 − 2C ∂_0F₀₁` for electrodynamics
/// (tags `Res1`, `Res2`). Norms are summed in node order.
pub fn euler_lagrange_residual(model: &ModelSpec, grid: &SpacetimeGrid) -> Result<ResidualReport> {
    let n = model.n_worldsheet;
    if grid.shape.len() != n || grid.spacing.len() != n || grid.fields.len() != model.n_fields {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: grid.shape.len(),
        });
    }
    if grid.shape.iter().any(|s| *s < 3) {
        return Err(Error::Configuration(
            "grid needs at least 3 points per axis".into(),
        ));
    }
    let total: usize = grid.shape.iter().product();
    if grid.fields.iter().any(|f| f.len() != total) {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: grid.fields[0].len(),
        });
    }
    let interior: Vec<usize> = (0..total)
        .filter(|flat| {
            unflatten(&grid.shape, *flat)
                .iter()
                .zip(&grid.shape)
                .all(|(i, s)| *i > 0 && *i + 1 < *s)
        })
        .collect();
    let point = |flat: usize| -> (Vec<f64>, Vec<f64>) {
        let x = unflatten(&grid.shape, flat)
            .iter()
            .zip(&grid.spacing)
            .map(|(i, h)| *i as f64 * h)
            .collect();
        let phi = grid.fields.iter().map(|f| f[flat]).collect();
        (x, phi)
    };
    let value = |x: &[f64], phi: &[f64], v: &Var| match v {
        Var::X(i) => x[*i],
        Var::Phi(a) => phi[*a],
        _ => 0.0,
    };
    let samples: Vec<Vec<(&'static str, f64)>> = match model.kind {
        ModelKind::Scalar => {
            let src = model.potential.derivative(&Var::Phi(0));
            interior
                .par_iter()
                .map(|flat| {
                    let (x, phi) = point(*flat);
                    let mut lap = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let g = model.metric[(i, j)];
                            if g != 0.0 {
                                lap += g * grid.second(0, *flat, i, j);
                            }
                        }
                    }
                    vec![("Res", lap - src.evaluate(|v| value(&x, &phi, v)))]
                })
                .collect()
        }
        ModelKind::Electrodynamics { c0 } => {
            let c = 2.0 * c0;
            let d0 = model.potential.derivative(&Var::Phi(0));
            let d1 = model.potential.derivative(&Var::Phi(1));
            interior
                .par_iter()
                .map(|flat| {
                    let (x, phi) = point(*flat);
                    // F₀₁ = ∂₀φ¹ − ∂₁φ⁰
                    let df_1 = grid.second(1, *flat, 1, 0) - grid.second(0, *flat, 1, 1);
                    let df_0 = grid.second(1, *flat, 0, 0) - grid.second(0, *flat, 0, 1);
                    vec![
                        ("Res1", d0.evaluate(|v| value(&x, &phi, v)) + c * df_1),
                        ("Res2", d1.evaluate(|v| value(&x, &phi, v)) - c * df_0),
                    ]
                })
                .collect()
        }
    };
    let mut report = ResidualReport::from_samples(samples.into_iter().flatten());
    for (i, h) in grid.spacing.iter().enumerate() {
        report.norms.insert(format!("h{i}"), *h);
    }
    report
        .norms
        .insert("interior_nodes".into(), interior.len() as f64);
    Ok(report)
}
