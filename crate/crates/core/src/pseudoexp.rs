//! Boolean pseudo-expectations: multilinear moment tables, polynomial
//! evaluation, constraint satisfaction checking, conditioning, moment
//! matrices and Gram vectors.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix};
use crate::poly::MultilinearPoly;
use crate::subset::{subsets_up_to, SubsetIndex, VarSet};

/// Guard for conditioning denominators: `1 + b*E[X_i]` must exceed this.
pub const COND_TOL: f64 = 1e-7;

/// A degree-d boolean pseudo-expectation over `X_1, ..., X_n`, stored as
/// the table of multilinear moments `E[X_S]` for `|S| <= d`. Booleanness
/// `X_i^2 = 1` is structural: only products of distinct variables appear.
#[derive(Debug, Clone)]
pub struct PseudoExpectation {
    n: usize,
    degree: usize,
    index: Arc<SubsetIndex>,
    moments: Vec<f64>,
}

impl PseudoExpectation {
    /// The uniform pseudo-expectation: all nonempty moments zero.
    pub fn uniform(n: usize, degree: usize) -> Self {
        let index = Arc::new(SubsetIndex::new(n, degree));
        let mut moments = vec![0.0; index.len()];
        moments[0] = 1.0;
        PseudoExpectation { n, degree, index, moments }
    }

    /// Builds from an explicit moment map; missing entries default to zero
    /// and the empty set to one. No invariant checking.
    pub fn from_moments(
        n: usize,
        degree: usize,
        entries: impl IntoIterator<Item = (VarSet, f64)>,
    ) -> Self {
        let mut pe = Self::uniform(n, degree);
        for (s, v) in entries {
            let pos = pe
                .index
                .position(s)
                .unwrap_or_else(|| panic!("moment {s:?} exceeds degree {degree}"));
            pe.moments[pos] = v;
        }
        pe
    }

    pub(crate) fn from_raw(n: usize, degree: usize, index: Arc<SubsetIndex>, moments: Vec<f64>) -> Self {
        debug_assert_eq!(index.len(), moments.len());
        PseudoExpectation { n, degree, index, moments }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn index(&self) -> &SubsetIndex {
        &self.index
    }

    #[inline]
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// `E[X_S]`; panics if `|S|` exceeds the degree.
    #[inline]
    pub fn moment(&self, s: VarSet) -> f64 {
        let pos = self
            .index
            .position(s)
            .unwrap_or_else(|| panic!("moment {s:?} exceeds degree {}", self.degree));
        self.moments[pos]
    }

    /// `E[X_i]`.
    #[inline]
    pub fn singleton(&self, i: usize) -> f64 {
        self.moment(VarSet::single(i))
    }

    /// `E[X_i X_j]` (1 when `i == j`).
    #[inline]
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            self.moment(VarSet::pair(i, j))
        }
    }

    /// Linear evaluation `E[p] = sum_S c_S E[X_S]`.
    pub fn evaluate(&self, p: &MultilinearPoly) -> Result<f64> {
        if p.degree() > self.degree {
            return Err(Error::DegreeOverflow { found: p.degree(), bound: self.degree });
        }
        Ok(p.terms().map(|(s, c)| c * self.moment(s)).sum())
    }

    /// Conditional pseudo-expectation on `X_i = b`; degree drops by one.
    ///
    /// `E'[X_S] = E[X_S (1 + b X_i)] / E[1 + b X_i]`.
    pub fn condition(&self, i: usize, b: i8) -> Result<PseudoExpectation> {
        assert!(b == 1 || b == -1, "sign must be +-1");
        if self.degree < 3 {
            return Err(Error::DegreeTooLow { required: 2, found: self.degree });
        }
        let bf = f64::from(b);
        let denom = 1.0 + bf * self.singleton(i);
        if denom <= COND_TOL {
            return Err(Error::NearDeterministic { var: i, sign: b, denom });
        }
        let new_degree = self.degree - 1;
        let index = Arc::new(SubsetIndex::new(self.n, new_degree));
        let si = VarSet::single(i);
        let moments: Vec<f64> = index
            .subsets()
            .iter()
            .map(|&s| (self.moment(s) + bf * self.moment(s.sym_diff(si))) / denom)
            .collect();
        Ok(PseudoExpectation { n: self.n, degree: new_degree, index, moments })
    }

    /// The moment matrix indexed by subsets of size at most `k` in canonical
    /// order; entry `(A, B)` is `E[X_A X_B] = E[X_{A xor B}]`.
    pub fn moment_matrix(&self, k: usize) -> Result<SymMatrix> {
        if 2 * k > self.degree {
            return Err(Error::DegreeTooLow { required: 2 * k, found: self.degree });
        }
        let rows = subsets_up_to(self.n, k);
        Ok(SymMatrix::from_fn(rows.len(), |a, b| self.moment(rows[a].sym_diff(rows[b]))))
    }

    /// Smallest eigenvalue of the degree-`floor(d/2)` moment matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = self.moment_matrix(self.degree / 2)?;
        Ok(sym_eigen(&m)?.min_value())
    }

    /// Checks the pseudo-expectation invariants: normalization, bounded
    /// moments, and positivity of the moment matrix within `psd_tol`.
    pub fn validate(&self, psd_tol: f64) -> Result<()> {
        if (self.moments[0] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInstance(format!(
                "normalization violated: E[1] = {}",
                self.moments[0]
            )));
        }
        for (pos, &m) in self.moments.iter().enumerate() {
            if m.abs() > 1.0 + psd_tol.max(1e-9) * 10.0 {
                return Err(Error::InvalidInstance(format!(
                    "moment {:?} = {m} out of [-1, 1]",
                    self.index.subset(pos)
                )));
            }
        }
        let min_eig = self.min_eigenvalue()?;
        if min_eig < -psd_tol {
            return Err(Error::PsdViolation { min_eig, tol: psd_tol });
        }
        Ok(())
    }

    /// Gram vectors `v_0 (empty set), v_1, ..., v_n` realizing the degree-1
    /// moment matrix, with negative eigenvalues clipped to zero.
    pub fn gram_vectors(&self, psd_tol: f64) -> Result<GramVectors> {
        if self.degree < 2 {
            return Err(Error::DegreeTooLow { required: 2, found: self.degree });
        }
        let m = self.moment_matrix(1)?;
        let eig = sym_eigen(&m)?;
        if eig.min_value() < -psd_tol {
            return Err(Error::PsdViolation { min_eig: eig.min_value(), tol: psd_tol });
        }
        let side = m.side();
        let mut data = vec![0.0; side * side];
        for p in 0..side {
            for k in 0..side {
                let lam = eig.values[k].max(0.0);
                data[p * side + k] = lam.sqrt() * eig.vectors[p * side + k];
            }
        }
        Ok(GramVectors { side, data })
    }

    /// Sorted text rendering, one line per moment: `"1 3 : value"`, with
    /// the empty set written as `-`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (pos, s) in self.index.subsets().iter().enumerate() {
            if s.is_empty() {
                out.push('-');
            } else {
                for (k, i) in s.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "{i}");
                }
            }
            let _ = writeln!(out, " : {}", self.moments[pos]);
        }
        out
    }

    /// Parses the `to_text` format. `n` and degree are inferred from the
    /// largest index and subset seen.
    pub fn from_text(text: &str) -> Result<PseudoExpectation> {
        let mut entries: Vec<(VarSet, f64)> = Vec::new();
        let mut n = 1usize;
        let mut degree = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let (subset_part, value_part) = line.rsplit_once(':').ok_or(Error::Parse {
                line: lineno + 1,
                msg: "missing ':'".into(),
            })?;
            let value: f64 = value_part.trim().parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad value {value_part:?}"),
            })?;
            let subset_part = subset_part.trim();
            let s = if subset_part == "-" {
                VarSet::EMPTY
            } else {
                let idx: Vec<usize> = subset_part
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>().map_err(|_| Error::Parse {
                            line: lineno + 1,
                            msg: format!("bad index {t:?}"),
                        })
                    })
                    .collect::<Result<_>>()?;
                VarSet::from_indices(&idx)
            };
            n = n.max(s.iter().max().unwrap_or(0));
            degree = degree.max(s.len());
            entries.push((s, value));
        }
        Ok(PseudoExpectation::from_moments(n, degree, entries))
    }
}

/// Gram vectors for points `0 (empty set), 1, ..., n`.
#[derive(Debug, Clone)]
pub struct GramVectors {
    side: usize,
    data: Vec<f64>,
}

impl GramVectors {
    pub fn num_points(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.side
    }

    /// Vector for point `p` (0 is the empty-set anchor, `i >= 1` a vertex).
    pub fn vector(&self, p: usize) -> &[f64] {
        &self.data[p * self.side..(p + 1) * self.side]
    }

    pub fn dot(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (self.vector(p), self.vector(q));
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn dist_sq(&self, p: usize, q: usize) -> f64 {
        let (a, b) = (self.vector(p), self.vector(q));
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }
}

/// A system of polynomial constraints: equalities `p = 0` and
/// inequalities `q >= 0` over a common variable set.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    n: usize,
    equalities: Vec<MultilinearPoly>,
    inequalities: Vec<MultilinearPoly>,
    label: String,
}

impl ConstraintSystem {
    pub fn new(n: usize, label: impl Into<String>) -> Self {
        ConstraintSystem { n, equalities: Vec::new(), inequalities: Vec::new(), label: label.into() }
    }

    pub fn push_equality(&mut self, p: MultilinearPoly) {
        assert_eq!(p.n(), self.n);
        if !p.is_zero() {
            self.equalities.push(p);
        }
    }

    pub fn push_inequality(&mut self, q: MultilinearPoly) {
        assert_eq!(q.n(), self.n);
        if !q.is_zero() {
            self.inequalities.push(q);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn equalities(&self) -> &[MultilinearPoly] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[MultilinearPoly] {
        &self.inequalities
    }

    pub fn degree(&self) -> usize {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// Does an integral point satisfy every constraint (equalities to zero,
    /// inequalities nonnegative)? Used by tests and oracles.
    pub fn holds_at(&self, signs: &[i8], tol: f64) -> bool {
        self.equalities.iter().all(|p| p.eval_at(signs).abs() <= tol)
            && self.inequalities.iter().all(|q| q.eval_at(signs) >= -tol)
    }
}

/// Offending constraint location: constraint index, multiplier set `S`,
/// and for inequalities the set of variables `phi` maps to -1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Offender {
    pub constraint: usize,
    pub multiplier: VarSet,
    pub phi_negative: VarSet,
}

/// Result of a full satisfaction scan.
#[derive(Debug, Clone)]
pub struct SatisfactionReport {
    pub max_eq_residual: f64,
    pub worst_eq: Option<Offender>,
    pub max_ineq_violation: f64,
    pub worst_ineq: Option<Offender>,
}

impl SatisfactionReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_eq_residual <= tol && self.max_ineq_violation <= tol
    }

    pub fn worst(&self) -> f64 {
        self.max_eq_residual.max(self.max_ineq_violation)
    }
}

/// Checks constraint satisfaction in the degree-d sense: every equality
/// multiplied by every monomial `X_S` with `|S| <= d - deg(p)` must vanish,
/// and every inequality multiplied by every product `prod (1 + phi(i) X_i)`
/// over `|S| <= d - deg(q)` must be nonnegative.
pub fn satisfies(pe: &PseudoExpectation, sys: &ConstraintSystem, _tol: f64) -> SatisfactionReport {
    assert_eq!(pe.n(), sys.n());
    let d = pe.degree();
    let mut report = SatisfactionReport {
        max_eq_residual: 0.0,
        worst_eq: None,
        max_ineq_violation: 0.0,
        worst_ineq: None,
    };

    for (ci, p) in sys.equalities().iter().enumerate() {
        if p.degree() > d {
            continue;
        }
        let budget = d - p.degree();
        for s in subsets_up_to(pe.n(), budget) {
            let val: f64 = p.terms().map(|(u, c)| c * pe.moment(s.sym_diff(u))).sum();
            if val.abs() > report.max_eq_residual {
                report.max_eq_residual = val.abs();
                report.worst_eq =
                    Some(Offender { constraint: ci, multiplier: s, phi_negative: VarSet::EMPTY });
            }
        }
    }

    for (ci, q) in sys.inequalities().iter().enumerate() {
        if q.degree() > d {
            continue;
        }
        let budget = d - q.degree();
        for s in subsets_up_to(pe.n(), budget) {
            // E[X_T q] for all T subset of S, then fold in the signs of phi.
            let subs: Vec<VarSet> = s.subsets().collect();
            let evals: Vec<f64> = subs
                .iter()
                .map(|t| q.terms().map(|(u, c)| c * pe.moment(t.sym_diff(u))).sum())
                .collect();
            for neg in s.subsets() {
                let mut val = 0.0;
                for (t, e) in subs.iter().zip(&evals) {
                    let sign = if (t.0 & neg.0).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    val += sign * e;
                }
                let violation = -val;
                if violation > report.max_ineq_violation {
                    report.max_ineq_violation = violation;
                    report.worst_ineq =
                        Some(Offender { constraint: ci, multiplier: s, phi_negative: neg });
                }
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::square_diff;

    fn correlated_pair() -> PseudoExpectation {
        // X_2 = X_1, uniform: moments {1} -> 0, {2} -> 0, {1,2} -> 1
        PseudoExpectation::from_moments(2, 2, [(VarSet::pair(1, 2), 1.0)])
    }

    fn anticorrelated_pair() -> PseudoExpectation {
        PseudoExpectation::from_moments(2, 2, [(VarSet::pair(1, 2), -1.0)])
    }

    #[test]
    fn evaluate_uniform() {
        let pe = PseudoExpectation::uniform(2, 2);
        let p = MultilinearPoly::var(2, 1).mul(&MultilinearPoly::var(2, 2));
        assert_eq!(pe.evaluate(&p).unwrap(), 0.0);
        assert_eq!(pe.evaluate(&MultilinearPoly::one(2)).unwrap(), 1.0);
    }

    #[test]
    fn evaluate_correlated_square_diff() {
        // E[(X_1 - X_2)^2] = 2 - 2 E[X_1 X_2] = 0 for a perfectly covarying pair
        let pe = correlated_pair();
        let p = square_diff(2, 1, 2);
        assert!(pe.evaluate(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn evaluate_rejects_degree_overflow() {
        let pe = PseudoExpectation::uniform(3, 2);
        let p = MultilinearPoly::from_terms(3, [(VarSet::from_indices(&[1, 2, 3]), 1.0)]);
        assert!(matches!(pe.evaluate(&p), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn condition_independent() {
        let pe = PseudoExpectation::uniform(2, 3);
        let cond = pe.condition(1, 1).unwrap();
        assert_eq!(cond.degree(), 2);
        assert!(cond.singleton(2).abs() < 1e-12);
        assert!((cond.singleton(1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_perfectly_correlated() {
        let pe = PseudoExpectation::from_moments(3, 3, [(VarSet::pair(1, 2), 1.0)]);
        let cond = pe.condition(1, 1).unwrap();
        assert!((cond.singleton(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_explicit_distribution() {
        // weights {(+,+): 0.5, (+,-): 0.25, (-,-): 0.25}
        // m1 = 0.5, m2 = 0, m12 = 0.5; conditioning X_1 = 1 gives E[X_2] = 1/3
        let pe = PseudoExpectation::from_moments(
            3,
            3,
            [
                (VarSet::single(1), 0.5),
                (VarSet::single(2), 0.0),
                (VarSet::pair(1, 2), 0.5),
            ],
        );
        let cond = pe.condition(1, 1).unwrap();
        assert!((cond.singleton(2) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn condition_rejects_deterministic() {
        let pe = PseudoExpectation::from_moments(2, 3, [(VarSet::single(1), 1.0)]);
        assert!(matches!(pe.condition(1, -1), Err(Error::NearDeterministic { .. })));
    }

    #[test]
    fn satisfies_boolean_is_structural() {
        let pe = PseudoExpectation::uniform(3, 2);
        let mut sys = ConstraintSystem::new(3, "bool");
        let x1sq_minus_1 = MultilinearPoly::var(3, 1)
            .mul(&MultilinearPoly::var(3, 1))
            .sub(&MultilinearPoly::one(3));
        sys.push_equality(x1sq_minus_1); // reduces to the zero polynomial
        let rep = satisfies(&pe, &sys, 1e-9);
        assert_eq!(rep.max_eq_residual, 0.0);
    }

    #[test]
    fn satisfies_edge_cover_anticorrelated() {
        let pe = anticorrelated_pair();
        let mut sys = ConstraintSystem::new(2, "vc-edge");
        let p = MultilinearPoly::one_plus_signed(2, 1, -1.0)
            .mul(&MultilinearPoly::one_plus_signed(2, 2, -1.0));
        sys.push_equality(p);
        let rep = satisfies(&pe, &sys, 1e-9);
        assert!(rep.max_eq_residual < 1e-12);
    }

    #[test]
    fn satisfies_reports_violation_at_empty_multiplier() {
        let pe = PseudoExpectation::from_moments(1, 1, [(VarSet::single(1), 0.5)]);
        let mut sys = ConstraintSystem::new(1, "neg");
        sys.push_inequality(MultilinearPoly::var(1, 1).scale(-1.0));
        let rep = satisfies(&pe, &sys, 1e-9);
        assert!((rep.max_ineq_violation - 0.5).abs() < 1e-12);
        let worst = rep.worst_ineq.unwrap();
        assert_eq!(worst.multiplier, VarSet::EMPTY);
    }

    #[test]
    fn moment_matrix_shapes_and_spectra() {
        let pe = PseudoExpectation::uniform(2, 2);
        let m0 = pe.moment_matrix(0).unwrap();
        assert_eq!(m0.side(), 1);
        assert_eq!(m0.get(0, 0), 1.0);

        let m1 = pe.moment_matrix(1).unwrap();
        assert_eq!(m1.side(), 3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m1.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }

        let eig = sym_eigen(&correlated_pair().moment_matrix(1).unwrap()).unwrap();
        let want = [0.0, 1.0, 2.0];
        for (got, want) in eig.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_vectors_match_moments() {
        let pe = PseudoExpectation::uniform(2, 2);
        let g = pe.gram_vectors(1e-9).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((g.dot(p, q) - want).abs() < 1e-9);
            }
        }

        let g = anticorrelated_pair().gram_vectors(1e-9).unwrap();
        assert!((g.dot(1, 2) + 1.0).abs() < 1e-9);

        let pe = PseudoExpectation::from_moments(2, 2, [(VarSet::pair(1, 2), 0.5)]);
        let g = pe.gram_vectors(1e-9).unwrap();
        assert!((g.dot(1, 2) - 0.5).abs() < 1e-8);
        assert!((g.dot(1, 1) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evaluate_is_linear() {
        let pe = PseudoExpectation::from_moments(
            3,
            3,
            [
                (VarSet::single(1), 0.3),
                (VarSet::single(2), -0.2),
                (VarSet::pair(1, 2), 0.1),
                (VarSet::from_indices(&[1, 2, 3]), 0.05),
            ],
        );
        let p = MultilinearPoly::from_terms(3, [(VarSet::single(1), 2.0), (VarSet::pair(2, 3), 1.5)]);
        let q = MultilinearPoly::from_terms(3, [(VarSet::EMPTY, -1.0), (VarSet::single(2), 0.7)]);
        let (a, b) = (0.6, -1.3);
        let lhs = pe.evaluate(&p.scale(a).add(&q.scale(b))).unwrap();
        let rhs = a * pe.evaluate(&p).unwrap() + b * pe.evaluate(&q).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn text_roundtrip() {
        let pe = PseudoExpectation::from_moments(
            3,
            2,
            [(VarSet::single(2), -0.25), (VarSet::pair(1, 3), 0.5)],
        );
        let text = pe.to_text();
        assert!(text.starts_with("- : 1\n"));
        let back = PseudoExpectation::from_text(&text).unwrap();
        assert_eq!(back.n(), 3);
        assert_eq!(back.degree(), 2);
        for (pos, s) in pe.index().subsets().iter().enumerate() {
            assert_eq!(back.moment(*s), pe.moments()[pos]);
        }
    }
}
