//! Exterior algebra over a finite-dimensional real vector space.
//!
//! Homogeneous elements are stored sparsely as maps from strictly increasing
//! multi-indices to coefficients. The same storage backs both polyvectors and
//! forms; a zero-sized orientation marker keeps them apart at the type level.
//!
//! Conventions:
//! * the basis form `e^I` pairs with the basis polyvector `e_J` as `δ_IJ`,
//!   so a form evaluated on `v_1 ∧ … ∧ v_k` is the determinant of its
//!   components;
//! * the interior product of a `k`-vector `ξ` into a `(k+1)`-form `ω` is the
//!   1-form `η ↦ ω(ξ ∧ η)`.
//!
//! Coefficients are generic over [`Coefficient`], so the algebra runs on
//! `f64` as well as on [`Polynomial`](crate::poly::Polynomial) coefficients
//! for symbolic slot extraction.

mod multi_index;
mod plucker;
mod target;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub use multi_index::MultiIndex;
pub use plucker::{is_decomposable, plucker_residuals};
pub use target::{graph_tangent, JetSample, TargetSpace};

/// Ring operations needed by the exterior algebra.
pub trait Coefficient:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// Variance marker distinguishing polyvectors from forms.
pub trait Orientation:
    Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static
{
    type Dual: Orientation<Dual = Self>;
    const COVARIANT: bool;
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Contravariant;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Covariant;

impl Orientation for Contravariant {
    type Dual = Covariant;
    const COVARIANT: bool = false;
}

impl Orientation for Covariant {
    type Dual = Contravariant;
    const COVARIANT: bool = true;
}

/// A homogeneous element of the exterior algebra of an `dim`-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct Graded<T, O> {
    dim: usize,
    grade: usize,
    coeffs: BTreeMap<MultiIndex, T>,
    _orientation: PhantomData<O>,
}

pub type Polyvector<T = f64> = Graded<T, Contravariant>;
pub type PolyForm<T = f64> = Graded<T, Covariant>;

impl<T: Coefficient, O: Orientation> Graded<T, O> {
    pub fn zero(dim: usize, grade: usize) -> Self {
        Graded {
            dim,
            grade,
            coeffs: BTreeMap::new(),
            _orientation: PhantomData,
        }
    }

    /// The basis element `e_I` (or `e^I` for forms) with coefficient one.
    pub fn basis(dim: usize, index: MultiIndex) -> Result<Self> {
        Self::from_coeffs(dim, index.grade(), [(index, T::one())])
    }

    /// A grade-1 element from its dense components.
    pub fn vector(components: &[T]) -> Self {
        let mut v = Self::zero(components.len(), 1);
        for (axis, c) in components.iter().enumerate() {
            v.add_to(MultiIndex::single(axis), c.clone());
        }
        v
    }

    pub fn from_coeffs<I>(dim: usize, grade: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut out = Self::zero(dim, grade);
        for (index, c) in coeffs {
            if index.grade() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    found: index.grade(),
                });
            }
            if index.axes().last().is_some_and(|&a| a >= dim) {
                return Err(Error::InvalidIndex {
                    axes: index.axes().to_vec(),
                    reason: "axis out of range",
                });
            }
            out.add_to(index, c);
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_covariant(&self) -> bool {
        O::COVARIANT
    }

    pub fn get(&self, index: &MultiIndex) -> T {
        self.coeffs.get(index).cloned().unwrap_or_else(T::zero)
    }

    /// Accumulates `c` into the coefficient of `index`; exact zeros are
    /// removed so only nonzero entries are stored.
    pub(crate) fn add_to(&mut self, index: MultiIndex, c: T) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.remove(&index) {
            None => {
                self.coeffs.insert(index, c);
            }
            Some(prev) => {
                let s = prev + c;
                if !s.is_zero() {
                    self.coeffs.insert(index, s);
                }
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, s: &T) -> Self {
        let mut out = Self::zero(self.dim, self.grade);
        for (i, c) in &self.coeffs {
            out.add_to(i.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_to(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_to(i.clone(), -c.clone());
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                found: other.grade,
            });
        }
        Ok(())
    }

    /// Converts coefficients to another ring.
    pub fn map<U: Coefficient, F: Fn(&T) -> U>(&self, f: F) -> Graded<U, O> {
        let mut out = Graded::zero(self.dim, self.grade);
        for (i, c) in &self.coeffs {
            out.add_to(i.clone(), f(c));
        }
        out
    }
}

impl<O: Orientation> Graded<f64, O> {
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Dense coefficient list in lexicographic multi-index order.
    pub fn to_dense(&self) -> Vec<f64> {
        MultiIndex::all(self.dim, self.grade)
            .map(|i| self.get(&i))
            .collect()
    }

    pub fn from_dense(dim: usize, grade: usize, values: &[f64]) -> Result<Self> {
        let indices: Vec<_> = MultiIndex::all(dim, grade).collect();
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: values.len(),
            });
        }
        Self::from_coeffs(dim, grade, indices.into_iter().zip(values.iter().copied()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let keys = self.coeffs.keys().chain(other.coeffs.keys());
        keys.map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }
}

/// Exterior product. Grades summing past the dimension give the zero element
/// of the requested grade.
pub fn wedge<T: Coefficient, O: Orientation>(
    a: &Graded<T, O>,
    b: &Graded<T, O>,
) -> Result<Graded<T, O>> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let grade = a.grade + b.grade;
    let mut out = Graded::zero(a.dim, grade);
    if grade > a.dim {
        return Ok(out);
    }
    for (ia, ca) in &a.coeffs {
        for (ib, cb) in &b.coeffs {
            if let Some((index, negative)) = ia.merge(ib) {
                let term = ca.clone() * cb.clone();
                out.add_to(index, if negative { -term } else { term });
            }
        }
    }
    Ok(out)
}

/// Wedge of a list of grade-1 elements, in order.
pub fn wedge_all<T: Coefficient, O: Orientation>(
    dim: usize,
    factors: &[Graded<T, O>],
) -> Result<Graded<T, O>> {
    let mut acc = Graded::from_coeffs(dim, 0, [(MultiIndex::empty(), T::one())])?;
    for f in factors {
        acc = wedge(&acc, f)?;
    }
    Ok(acc)
}

/// Contraction of `upper` by an element of the dual orientation.
///
/// The result `r` has grade `upper.grade - lower.grade` and satisfies
/// `⟨β, r⟩ = ⟨lower ∧ β, upper⟩` for every `β`.
pub fn contract<T: Coefficient, O: Orientation>(
    lower: &Graded<T, O::Dual>,
    upper: &Graded<T, O>,
) -> Result<Graded<T, O>> {
    if lower.dim != upper.dim {
        return Err(Error::DimensionMismatch {
            expected: upper.dim,
            found: lower.dim,
        });
    }
    if lower.grade > upper.grade {
        return Err(Error::GradeMismatch {
            expected: upper.grade,
            found: lower.grade,
        });
    }
    let mut out = Graded::zero(upper.dim, upper.grade - lower.grade);
    for (ia, ca) in &lower.coeffs {
        for (iu, cu) in &upper.coeffs {
            let Some(rest) = iu.without(ia) else { continue };
            // sign of sorting ia ++ rest into iu
            let (_, negative) = ia.merge(&rest).expect("disjoint by construction");
            let term = ca.clone() * cu.clone();
            out.add_to(rest, if negative { -term } else { term });
        }
    }
    Ok(out)
}

/// Interior product `i_ξ ω`, the 1-form `η ↦ ω(ξ ∧ η)`.
pub fn interior<T: Coefficient>(xi: &Polyvector<T>, omega: &PolyForm<T>) -> Result<PolyForm<T>> {
    if omega.grade != xi.grade + 1 {
        return Err(Error::GradeMismatch {
            expected: xi.grade + 1,
            found: omega.grade,
        });
    }
    contract(xi, omega)
}

/// The natural pairing of a form with a polyvector of equal grade.
pub fn pair<T: Coefficient>(form: &PolyForm<T>, vector: &Polyvector<T>) -> Result<T> {
    if form.dim != vector.dim {
        return Err(Error::DimensionMismatch {
            expected: form.dim,
            found: vector.dim,
        });
    }
    if form.grade != vector.grade {
        return Err(Error::GradeMismatch {
            expected: form.grade,
            found: vector.grade,
        });
    }
    let mut acc = T::zero();
    for (i, c) in &form.coeffs {
        if let Some(v) = vector.coeffs.get(i) {
            acc = acc + c.clone() * v.clone();
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn e(dim: usize, axes: &[usize]) -> Polyvector {
        Polyvector::basis(dim, MultiIndex::new(axes.to_vec()).unwrap()).unwrap()
    }

    fn de(dim: usize, axes: &[usize]) -> PolyForm {
        PolyForm::basis(dim, MultiIndex::new(axes.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn wedge_of_basis_vectors() {
        let w = wedge(&e(3, &[0]), &e(3, &[1])).unwrap();
        assert_eq!(w, e(3, &[0, 1]));
        let w = wedge(&e(3, &[1]), &e(3, &[0])).unwrap();
        assert_eq!(w, e(3, &[0, 1]).scaled(&-1.0));
    }

    #[test]
    fn wedge_expands_bilinearly() {
        // (e0 + e2) ∧ e1 = e01 - e12
        let a = e(3, &[0]).checked_add(&e(3, &[2])).unwrap();
        let w = wedge(&a, &e(3, &[1])).unwrap();
        let expected = e(3, &[0, 1]).checked_sub(&e(3, &[1, 2])).unwrap();
        assert_eq!(w, expected);
    }

    #[test]
    fn wedge_overflow_is_zero_of_requested_grade() {
        let w = wedge(&e(2, &[0, 1]), &e(2, &[0])).unwrap();
        assert!(w.is_zero());
        assert_eq!(w.grade(), 3);
    }

    #[test]
    fn wedge_dimension_mismatch() {
        assert!(matches!(
            wedge(&e(2, &[0]), &e(3, &[1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interior_of_worldsheet_volume() {
        // ξ = e0∧e1, ω = dp∧dx0∧dx1 with p on axis 2
        let xi = e(3, &[0, 1]);
        let omega = wedge(&wedge(&de(3, &[2]), &de(3, &[0])).unwrap(), &de(3, &[1])).unwrap();
        let form = interior(&xi, &omega).unwrap();
        assert_eq!(form, de(3, &[2]));

        // ω = dx0∧dx1∧dp: moving dp to the front is an even permutation
        let omega2 = wedge(&wedge(&de(3, &[0]), &de(3, &[1])).unwrap(), &de(3, &[2])).unwrap();
        assert_eq!(interior(&xi, &omega2).unwrap(), de(3, &[2]));

        // ω = dx1∧dx0∧dx2 = -e^{012}; ω(e0∧e2∧e1) = +1
        let omega3 = wedge(&wedge(&de(3, &[1]), &de(3, &[0])).unwrap(), &de(3, &[2])).unwrap();
        let xi02 = e(3, &[0, 2]);
        assert_eq!(interior(&xi02, &omega3).unwrap(), de(3, &[1]));
        // and with the unpermuted volume form the sign flips
        assert_eq!(
            interior(&xi02, &de(3, &[0, 1, 2])).unwrap(),
            de(3, &[1]).scaled(&-1.0)
        );
    }

    #[test]
    fn interior_of_zero_and_grade_check() {
        let xi = Polyvector::<f64>::zero(3, 2);
        let omega = de(3, &[0, 1, 2]);
        assert!(interior(&xi, &omega).unwrap().is_zero());
        assert!(matches!(
            interior(&e(3, &[0]), &omega),
            Err(Error::GradeMismatch { .. })
        ));
    }

    #[test]
    fn symbolic_coefficients() {
        type P = Polynomial<char>;
        let a = Polyvector::<P>::vector(&[P::var('a'), P::constant(1.0), P::zero()]);
        let b = Polyvector::<P>::vector(&[P::var('b'), P::zero(), P::constant(1.0)]);
        let w = wedge(&a, &b).unwrap();
        // coefficient of e02 is a*0 - ... = a·1 - 0·b = a
        assert_eq!(w.get(&MultiIndex::new(vec![0, 2]).unwrap()), P::var('a'));
        assert_eq!(w.get(&MultiIndex::new(vec![0, 1]).unwrap()), -P::var('b'));
    }
}
