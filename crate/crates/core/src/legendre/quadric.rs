use nalgebra::{DMatrix, DVector};

use super::ImplicitSurface;
use crate::coords::Var;
use crate::error::{Error, Result};
use crate::exterior::TargetSpace;
use crate::lagrangian::{scalar_quadric_labels, QuadricVariety, RANK_TOL};
use crate::poly::{Monomial, Polynomial};

/// Scales a symmetric matrix so its largest-magnitude entry becomes `±1`.
///
/// The pivot is the first entry in row-major order within a relative `1e-9`
/// of the maximum magnitude; its sign is preserved, so `G` and `−G` map to
/// the same representative only up to that sign.
fn normalize_max_entry(m: &DMatrix<f64>) -> DMatrix<f64> {
    let max = m.amax();
    if max == 0.0 {
        return m.clone();
    }
    let pivot = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|rc| m[rc])
        .find(|v| v.abs() >= (1.0 - 1e-9) * max)
        .expect("maximum is attained");
    m / pivot.abs()
}

/// The dual quadric, with matrix proportional to `G⁻¹`.
pub fn dual_quadric(q: &QuadricVariety) -> Result<QuadricVariety> {
    let report = detect_degeneracy(q);
    if report.defected {
        return Err(Error::Degenerate {
            rank: report.rank,
            size: report.size,
        });
    }
    let inv = q.matrix().clone().try_inverse().ok_or(Error::Degenerate {
        rank: report.rank.saturating_sub(1),
        size: report.size,
    })?;
    let sym = (&inv + inv.transpose()) * 0.5;
    QuadricVariety::new(normalize_max_entry(&sym))
}

/// Homogeneous quadratic form `Σ G_{αβ} y_α y_β` in the given variables.
pub fn quadric_polynomial(q: &QuadricVariety, vars: &[Var]) -> Result<Polynomial<Var>> {
    let g = q.matrix();
    if vars.len() != g.nrows() {
        return Err(Error::DimensionMismatch {
            expected: g.nrows(),
            found: vars.len(),
        });
    }
    let mut p = Polynomial::default();
    for a in 0..vars.len() {
        for b in 0..vars.len() {
            if g[(a, b)] != 0.0 {
                let m = Monomial::var(vars[a].clone()).mul(&Monomial::var(vars[b].clone()));
                p.add_term(m, g[(a, b)]);
            }
        }
    }
    Ok(p)
}

/// Dual coordinates `[Π : P^φ : P^0 : … ]` of the scalar graph quadric.
pub fn scalar_dual_labels(space: TargetSpace) -> Vec<Var> {
    scalar_quadric_labels(space)
        .iter()
        .map(|v| v.dual())
        .collect()
}

/// Restricts a dual scalar quadric to `Π = −1` and scales so the coefficient
/// of `P^φ` is `+1`.
pub fn affine_chart(qdual: &QuadricVariety, space: TargetSpace) -> Result<ImplicitSurface> {
    let labels = scalar_dual_labels(space);
    let poly = quadric_polynomial(qdual, &labels)?;
    if poly.derivative(&Var::Pi).is_empty() {
        return Err(Error::Constraint(
            "dual quadric does not depend on Π".into(),
        ));
    }
    let charted = poly.partial_eval(|v| (*v == Var::Pi).then_some(-1.0));
    ImplicitSurface::new(space, charted).normalized_on(&labels[1])
}

/// Dual point `2 G X` of a point on the quadric.
pub fn tangent_hyperplane(q: &QuadricVariety, x: &DVector<f64>) -> DVector<f64> {
    q.matrix() * x * 2.0
}

/// Distance between `Q` and its double dual after both are scaled to unit
/// Frobenius norm; the sign ambiguity of a projective quadric is factored out.
pub fn double_dual_check(q: &QuadricVariety) -> Result<f64> {
    let dd = dual_quadric(&dual_quadric(q)?)?;
    let a = q.matrix() / q.matrix().norm();
    let b = dd.matrix() / dd.matrix().norm();
    Ok((&a - &b).norm().min((&a + &b).norm()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub size: usize,
    pub defected: bool,
    pub singular_values: Vec<f64>,
}

pub fn detect_degeneracy(q: &QuadricVariety) -> RankReport {
    let sv = q.singular_values();
    let top = sv.max();
    let rank = if top == 0.0 {
        0
    } else {
        sv.iter().filter(|s| **s > RANK_TOL * top).count()
    };
    let size = q.dim_ambient();
    RankReport {
        rank,
        size,
        defected: rank < size,
        singular_values: sv.iter().copied().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kg_quadric() -> QuadricVariety {
        QuadricVariety::new(DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.5,
            ],
        ))
        .unwrap()
    }

    #[test]
    fn kg_dual_and_chart() {
        let space = TargetSpace::new(1, 2);
        let d = dual_quadric(&kg_quadric()).unwrap();
        // Π P^φ − ½(P⁰)² + ½(P¹)² up to scale: entries 2, 2, -2, 2 → max 2
        let poly = quadric_polynomial(&d, &scalar_dual_labels(space)).unwrap();
        let labels = scalar_dual_labels(space);
        let pi_pphi = Monomial::var(Var::Pi).mul(&Monomial::var(labels[1].clone()));
        let p0 = Monomial::from_powers([(labels[2].clone(), 2)]);
        let ratio = poly.coeff(&p0) / poly.coeff(&pi_pphi);
        assert!((ratio + 0.5).abs() < 1e-15);

        let sigma = affine_chart(&d, space).unwrap();
        assert_eq!(sigma.eta.len(), 3);
        assert!((sigma.eta.coeff(&Monomial::var(labels[1].clone())) - 1.0).abs() < 1e-15);
        assert!((sigma.eta.coeff(&p0) - 0.5).abs() < 1e-15);
        let p1 = Monomial::from_powers([(labels[3].clone(), 2)]);
        assert!((sigma.eta.coeff(&p1) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_is_self_dual() {
        let q = QuadricVariety::new(DMatrix::identity(5, 5)).unwrap();
        assert_eq!(dual_quadric(&q).unwrap(), q);
    }

    #[test]
    fn double_dual_of_kg() {
        assert!(double_dual_check(&kg_quadric()).unwrap() <= 1e-12);
    }

    #[test]
    fn degenerate_quadric() {
        let mut g = DMatrix::identity(4, 4);
        g[(2, 2)] = 0.0;
        let q = QuadricVariety::new(g).unwrap();
        let r = detect_degeneracy(&q);
        assert_eq!((r.rank, r.defected), (3, true));
        assert_eq!(
            dual_quadric(&q),
            Err(Error::Degenerate { rank: 3, size: 4 })
        );
        assert!(double_dual_check(&q).is_err());
        assert_eq!(detect_degeneracy(&kg_quadric()).rank, 4);
    }
}
