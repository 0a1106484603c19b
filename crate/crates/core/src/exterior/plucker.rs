use super::{
    contract, wedge, Coefficient, Contravariant, Covariant, Graded, MultiIndex, Polyvector,
};

/// Quadratic Plücker expressions of a homogeneous polyvector.
///
/// Grade 2 returns every coefficient of `v ∧ v` (one per 4-subset of axes).
/// Grades `2 < k < dim - 1` use the contraction criterion: for each basis
/// `(k-1)`-form `α`, all coefficients of `(i_α v) ∧ v`. Grades 0, 1,
/// `dim - 1` and `dim` carry no relations and give an empty list.
pub fn plucker_residuals<T: Coefficient>(v: &Polyvector<T>) -> Vec<T> {
    let (n, k) = (v.dim(), v.grade());
    if k <= 1 || k + 1 >= n {
        return Vec::new();
    }
    let all_coeffs = |w: &Polyvector<T>, grade: usize| -> Vec<T> {
        MultiIndex::all(n, grade).map(|i| w.get(&i)).collect()
    };
    if k == 2 {
        let vv = wedge(v, v).expect("same dimension");
        return all_coeffs(&vv, 4);
    }
    let mut out = Vec::new();
    for alpha in MultiIndex::all(n, k - 1) {
        let form = Graded::<T, Covariant>::basis(n, alpha).expect("index within range");
        let vec1: Graded<T, Contravariant> = contract(&form, v).expect("grade k-1 <= k");
        let prod = wedge(&vec1, v).expect("same dimension");
        out.extend(all_coeffs(&prod, k + 1));
    }
    out
}

/// Decomposability test with tolerance relative to the square of the
/// largest coefficient. The zero polyvector is decomposable.
pub fn is_decomposable(v: &Polyvector, tol: f64) -> bool {
    let scale = v.max_abs();
    let worst = plucker_residuals(v)
        .into_iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    worst <= tol * scale * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::wedge_all;

    fn e(dim: usize, axes: &[usize]) -> Polyvector {
        Polyvector::basis(dim, MultiIndex::new(axes.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn simple_bivector() {
        assert_eq!(plucker_residuals(&e(4, &[0, 1])), vec![0.0]);
        assert!(is_decomposable(&e(4, &[0, 1]), 1e-12));
    }

    #[test]
    fn witness_fails() {
        let v = e(4, &[0, 1]).checked_add(&e(4, &[2, 3])).unwrap();
        let r = plucker_residuals(&v);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].abs(), 2.0);
        assert!(!is_decomposable(&v, 1e-9));
    }

    #[test]
    fn no_relations_at_extreme_grades() {
        assert!(plucker_residuals(&e(4, &[2])).is_empty());
        assert!(plucker_residuals(&e(4, &[0, 1, 2])).is_empty());
        assert!(plucker_residuals(&e(4, &[0, 1, 2, 3])).is_empty());
        assert!(plucker_residuals(&e(3, &[0, 1])).is_empty());
    }

    #[test]
    fn grade_three_in_six_dims() {
        let vs: Vec<Polyvector> = vec![
            Polyvector::vector(&[1.0, 0.5, -0.2, 0.0, 0.3, 1.1]),
            Polyvector::vector(&[0.0, 1.0, 0.7, -0.4, 0.0, 0.2]),
            Polyvector::vector(&[0.9, 0.0, 0.0, 1.0, -1.3, 0.4]),
        ];
        let v = wedge_all(6, &vs).unwrap();
        assert!(is_decomposable(&v, 1e-12));
        let w = e(6, &[0, 1, 2]).checked_add(&e(6, &[3, 4, 5])).unwrap();
        assert!(!is_decomposable(&w, 1e-6));
    }

    #[test]
    fn zero_is_decomposable() {
        assert!(is_decomposable(&Polyvector::zero(5, 2), 1e-12));
    }
}
