//! Multilinear polynomials over boolean variables.
//!
//! Every polynomial is kept reduced modulo `X_i^2 = 1`, so a term is a
//! coefficient attached to a subset of `[1, n]` and multiplication of
//! monomials is symmetric difference of subsets.

use std::collections::BTreeMap;

use crate::subset::VarSet;

const COEFF_EPS: f64 = 0.0;

/// A multilinear polynomial: map from variable subsets to coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPoly {
    n: usize,
    terms: BTreeMap<VarSet, f64>,
}

impl MultilinearPoly {
    pub fn zero(n: usize) -> Self {
        MultilinearPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(VarSet::EMPTY, c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, 1.0)
    }

    /// The variable `X_i`, 1-based.
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n, "variable index {i} out of range [1, {n}]");
        let mut p = Self::zero(n);
        p.add_term(VarSet::single(i), 1.0);
        p
    }

    /// `1 + s*X_i` for sign `s`.
    pub fn one_plus_signed(n: usize, i: usize, s: f64) -> Self {
        let mut p = Self::one(n);
        p.add_term(VarSet::single(i), s);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (VarSet, f64)>) -> Self {
        let mut p = Self::zero(n);
        for (s, c) in terms {
            p.add_term(s, c);
        }
        p
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, s: VarSet) -> f64 {
        self.terms.get(&s).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (VarSet, f64)> + '_ {
        self.terms.iter().map(|(s, c)| (*s, *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, s: VarSet, c: f64) {
        debug_assert!(s.iter().all(|i| i <= self.n));
        let entry = self.terms.entry(s).or_insert(0.0);
        *entry += c;
        if entry.abs() <= COEFF_EPS {
            self.terms.remove(&s);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (s, c) in other.terms() {
            out.add_term(s, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        if a == 0.0 {
            return Self::zero(self.n);
        }
        let mut out = Self::zero(self.n);
        for (s, c) in self.terms() {
            out.add_term(s, a * c);
        }
        out
    }

    /// Product with boolean reduction: `X_S * X_T = X_{S xor T}`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (s, cs) in self.terms() {
            for (t, ct) in other.terms() {
                out.add_term(s.sym_diff(t), cs * ct);
            }
        }
        out
    }

    /// `p^2` with boolean reduction.
    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// Multiply by the monomial `X_S`.
    pub fn shift(&self, s: VarSet) -> Self {
        let mut out = Self::zero(self.n);
        for (t, c) in self.terms() {
            out.add_term(t.sym_diff(s), c);
        }
        out
    }

    /// Evaluate at a point of the cube, given per-variable signs
    /// (`signs[i-1]` is the value of `X_i`).
    pub fn eval_at(&self, signs: &[i8]) -> f64 {
        let mut acc = 0.0;
        for (s, c) in self.terms() {
            let mut sign = 1.0;
            for i in s.iter() {
                sign *= f64::from(signs[i - 1]);
            }
            acc += c * sign;
        }
        acc
    }
}

/// `(X_i - X_j)^2` reduced: `2 - 2 X_i X_j`.
pub fn square_diff(n: usize, i: usize, j: usize) -> MultilinearPoly {
    let p = MultilinearPoly::var(n, i).sub(&MultilinearPoly::var(n, j));
    p.square()
}

/// `(X_i + X_j)^2` reduced: `2 + 2 X_i X_j`.
pub fn square_sum(n: usize, i: usize, j: usize) -> MultilinearPoly {
    let p = MultilinearPoly::var(n, i).add(&MultilinearPoly::var(n, j));
    p.square()
}
