//! Sparse multivariate polynomials with `f64` coefficients.
//!
//! The variable type is generic so the same machinery carries phase-space
//! surfaces, graph relations on the polyvector side, and expressions in jet
//! variables. Terms are kept in a `BTreeMap` keyed by monomial, which makes
//! the term order canonical and iteration deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// A product of variables raised to positive powers, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial<V>(Vec<(V, u32)>);

impl<V: Ord + Clone> Monomial<V> {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: V) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from arbitrary `(variable, power)` pairs, merging
    /// repeats and dropping zero powers.
    pub fn from_powers<I: IntoIterator<Item = (V, u32)>>(powers: I) -> Self {
        let mut map: BTreeMap<V, u32> = BTreeMap::new();
        for (v, p) in powers {
            if p > 0 {
                *map.entry(v).or_insert(0) += p;
            }
        }
        Monomial(map.into_iter().collect())
    }

    pub fn powers(&self) -> &[(V, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, p)| p).sum()
    }

    pub fn power_of(&self, v: &V) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Removes `v` entirely, returning its power and the remaining monomial.
    fn split_off(&self, v: &V) -> (u32, Self) {
        let mut rest = Vec::with_capacity(self.0.len());
        let mut power = 0;
        for (w, p) in &self.0 {
            if w == v {
                power = *p;
            } else {
                rest.push((w.clone(), *p));
            }
        }
        (power, Monomial(rest))
    }

    pub fn eval<F: Fn(&V) -> f64>(&self, value: &F) -> f64 {
        self.0
            .iter()
            .map(|(v, p)| value(v).powi(*p as i32))
            .product()
    }
}

impl<V: fmt::Display> fmt::Display for Monomial<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, p)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *p == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{p}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<V: Ord> {
    terms: BTreeMap<Monomial<V>, f64>,
}

impl<V: Ord + Clone> Default for Polynomial<V> {
    fn default() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }
}

impl<V: Ord + Clone> Polynomial<V> {
    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: V) -> Self {
        Self::monomial(Monomial::var(v), 1.0)
    }

    pub fn monomial(m: Monomial<V>, c: f64) -> Self {
        let mut p = Self::default();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial<V>, f64)>>(terms: I) -> Self {
        let mut p = Self::default();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m`, dropping the entry when it cancels exactly.
    pub fn add_term(&mut self, m: Monomial<V>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = *e.get() + c;
                if s == 0.0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<V>, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial<V>) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(&Monomial::one())
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<V> {
        self.terms
            .keys()
            .flat_map(|m| m.powers().iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(Monomial::degree);
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::default();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(1.0);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, v: &V) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            let (p, rest) = m.split_off(v);
            if p == 0 {
                continue;
            }
            let reduced = if p > 1 {
                rest.mul(&Monomial(vec![(v.clone(), p - 1)]))
            } else {
                rest
            };
            out.add_term(reduced, c * p as f64);
        }
        out
    }

    /// Replaces every occurrence of `v` by `with`.
    pub fn substitute(&self, v: &V, with: &Self) -> Self {
        let mut out = Self::default();
        let mut powers: Vec<Self> = vec![Self::constant(1.0)];
        for (m, c) in &self.terms {
            let (p, rest) = m.split_off(v);
            while powers.len() <= p as usize {
                let next = powers.last().unwrap() * with;
                powers.push(next);
            }
            let term = Self::monomial(rest, *c);
            out = out + &term * &powers[p as usize];
        }
        out
    }

    /// Substitutes numeric values for the variables where `value` returns
    /// `Some`, leaving the others symbolic.
    pub fn partial_eval<F: Fn(&V) -> Option<f64>>(&self, value: F) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            let mut coeff = *c;
            let mut rest = Vec::new();
            for (v, p) in m.powers() {
                match value(v) {
                    Some(x) => coeff *= x.powi(*p as i32),
                    None => rest.push((v.clone(), *p)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    pub fn map_vars<W: Ord + Clone, F: Fn(&V) -> W>(&self, f: F) -> Polynomial<W> {
        let mut out = Polynomial::default();
        for (m, c) in &self.terms {
            let mapped = Monomial::from_powers(m.powers().iter().map(|(v, p)| (f(v), *p)));
            out.add_term(mapped, *c);
        }
        out
    }

    pub fn evaluate<F: Fn(&V) -> f64>(&self, value: F) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(&value)).sum()
    }

    /// Returns the value together with the sum of absolute term values, the
    /// natural scale for relative residuals.
    pub fn evaluate_with_scale<F: Fn(&V) -> f64>(&self, value: F) -> (f64, f64) {
        let mut sum = 0.0;
        let mut scale = 0.0;
        for (m, c) in &self.terms {
            let t = c * m.eval(&value);
            sum += t;
            scale += t.abs();
        }
        (sum, scale)
    }

    /// Drops coefficients with magnitude at most `tol` times the largest one.
    pub fn pruned(&self, tol: f64) -> Self {
        let cutoff = tol * self.max_abs_coeff();
        Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > cutoff)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Largest coefficient difference between two polynomials.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let diff = self.clone() - other.clone();
        diff.max_abs_coeff()
    }

    /// Rescales so that the coefficient of `m` becomes `target`.
    pub fn normalized_on(&self, m: &Monomial<V>, target: f64) -> Option<Self> {
        let c = self.coeff(m);
        if c == 0.0 {
            None
        } else {
            Some(self.scale(target / c))
        }
    }
}

impl<V: Ord + Clone + fmt::Display> fmt::Display for Polynomial<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0.0 { "-" } else { "+" };
            if k == 0 {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_one() {
                write!(f, "{}", c.abs())?;
            } else if c.abs() == 1.0 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", c.abs())?;
            }
        }
        Ok(())
    }
}

impl<V: Ord + Clone> Add for Polynomial<V> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<V: Ord + Clone> Add<&Polynomial<V>> for &Polynomial<V> {
    type Output = Polynomial<V>;
    fn add(self, rhs: &Polynomial<V>) -> Polynomial<V> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl<V: Ord + Clone> AddAssign for Polynomial<V> {
    fn add_assign(&mut self, rhs: Self) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl<V: Ord + Clone> Sub for Polynomial<V> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
        self
    }
}

impl<V: Ord + Clone> Sub<&Polynomial<V>> for &Polynomial<V> {
    type Output = Polynomial<V>;
    fn sub(self, rhs: &Polynomial<V>) -> Polynomial<V> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -*c);
        }
        out
    }
}

impl<V: Ord + Clone> Neg for Polynomial<V> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<V: Ord + Clone> Mul<&Polynomial<V>> for &Polynomial<V> {
    type Output = Polynomial<V>;
    fn mul(self, rhs: &Polynomial<V>) -> Polynomial<V> {
        let mut out = Polynomial::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl<V: Ord + Clone> Mul for Polynomial<V> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<V: Ord + Clone> Mul<f64> for Polynomial<V> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl<V: Ord + Clone> Zero for Polynomial<V> {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<V: Ord + Clone> One for Polynomial<V> {
    fn one() -> Self {
        Self::constant(1.0)
    }
}
