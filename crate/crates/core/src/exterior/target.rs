use nalgebra::DMatrix;

use super::{wedge_all, MultiIndex, Polyvector};
use crate::error::{Error, Result};

/// Coordinates on the product of worldsheet and field space.
///
/// Field axes come first (`0..n_fields`), worldsheet axes after them, so
/// every multi-index lists field axes before worldsheet axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetSpace {
    pub n_fields: usize,
    pub n_worldsheet: usize,
}

impl TargetSpace {
    pub fn new(n_fields: usize, n_worldsheet: usize) -> Self {
        TargetSpace {
            n_fields,
            n_worldsheet,
        }
    }

    pub fn dim(&self) -> usize {
        self.n_fields + self.n_worldsheet
    }

    pub fn field_axis(&self, a: usize) -> usize {
        a
    }

    pub fn worldsheet_axis(&self, i: usize) -> usize {
        self.n_fields + i
    }

    /// The pure worldsheet index `{x_0, ..., x_{N-1}}`.
    pub fn volume_index(&self) -> MultiIndex {
        MultiIndex::new(
            (0..self.n_worldsheet)
                .map(|i| self.worldsheet_axis(i))
                .collect(),
        )
        .expect("increasing")
    }

    /// `{φ^a} ∪ W \ {x_i}`, the coordinate carrying `∂_i φ^a` on the graph.
    pub fn field_slot(&self, a: usize, i: usize) -> MultiIndex {
        self.volume_index()
            .without_axis(self.worldsheet_axis(i))
            .and_then(|m| m.with_axis(self.field_axis(a)))
            .expect("disjoint axes")
    }
}

/// A first jet of a field configuration at one point of the worldsheet.
#[derive(Clone, Debug, PartialEq)]
pub struct JetSample {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    /// `jet[(a, i)] = ∂φ^a/∂x^i`.
    pub jet: DMatrix<f64>,
}

impl JetSample {
    pub fn new(x: Vec<f64>, phi: Vec<f64>, jet: DMatrix<f64>) -> Result<Self> {
        if jet.nrows() != phi.len() {
            return Err(Error::DimensionMismatch {
                expected: phi.len(),
                found: jet.nrows(),
            });
        }
        if jet.ncols() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: jet.ncols(),
            });
        }
        Ok(JetSample { x, phi, jet })
    }

    /// A jet at the origin with zero field values.
    pub fn from_derivatives(jet: DMatrix<f64>) -> Self {
        JetSample {
            x: vec![0.0; jet.ncols()],
            phi: vec![0.0; jet.nrows()],
            jet,
        }
    }

    pub fn space(&self) -> TargetSpace {
        TargetSpace::new(self.phi.len(), self.x.len())
    }
}

/// Tangent polyvector `∧_i (∂/∂x^i + Σ_a ∂_iφ^a ∂/∂φ^a)` to the graph.
pub fn graph_tangent(jet: &JetSample) -> Polyvector {
    let space = jet.space();
    let n = space.dim();
    let factors: Vec<Polyvector> = (0..space.n_worldsheet)
        .map(|i| {
            let mut comps = vec![0.0; n];
            comps[space.worldsheet_axis(i)] = 1.0;
            for a in 0..space.n_fields {
                comps[space.field_axis(a)] = jet.jet[(a, i)];
            }
            Polyvector::vector(&comps)
        })
        .collect();
    wedge_all(n, &factors).expect("consistent dimensions")
}
