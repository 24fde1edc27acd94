//! Conditioning a pseudo-expectation until its correlation structure is
//! hollow: the potential function, the exact single-step gain identity,
//! bad-vertex detection, and the conditioning loop itself.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pseudoexp::{PseudoExpectation, COND_TOL};

/// Parameters of the hollowing loop. `tau` bounds the undetermined band
/// of singleton expectations, `gamma` the correlation band, and `ell` the
/// conditioning budget; the analysis requires `tau^2 < gamma < 1`.
#[derive(Debug, Clone, Copy)]
pub struct HollowParams {
    pub tau: f64,
    pub gamma: f64,
    pub ell: usize,
}

impl HollowParams {
    pub fn new(tau: f64, gamma: f64, ell: usize) -> Result<Self> {
        if !(0.0 < tau && tau < 1.0 && tau * tau < gamma && gamma < 1.0) {
            return Err(Error::InvalidInstance(format!(
                "hollow parameters need tau^2 < gamma < 1, got tau = {tau}, gamma = {gamma}"
            )));
        }
        if ell < 1 {
            return Err(Error::InvalidInstance("conditioning budget must be >= 1".into()));
        }
        Ok(HollowParams { tau, gamma, ell })
    }

    /// The hollowness threshold `n / (ell (gamma - tau^2)^2)`.
    pub fn threshold(&self, n: usize) -> f64 {
        let gap = self.gamma - self.tau * self.tau;
        n as f64 / (self.ell as f64 * gap * gap)
    }
}

/// One recorded conditioning step.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub var: usize,
    pub sign: i8,
    pub potential_before: f64,
    pub potential_after: f64,
    /// `|V_(-tau,tau) \ C_gamma(var)|` at the time of the choice.
    pub bad_count: usize,
}

/// The conditioning history of one hollowize run.
#[derive(Debug, Clone, Serialize, Default)]
pub struct ConditioningTrace {
    pub steps: Vec<TraceStep>,
    pub final_degree: usize,
}

/// The potential `sum_i E[X_i]^2`, always in `[0, n]`.
pub fn potential(pe: &PseudoExpectation) -> f64 {
    (1..=pe.n()).map(|i| pe.singleton(i).powi(2)).sum()
}

/// Both sides of the exact potential-change identity for conditioning on
/// variable `i`, observed at variable `j`:
/// left, the expected change of `E[X_j]^2` over the two conditionings;
/// right, `(E[X_iX_j] - E[X_i]E[X_j])^2 / (1 - E[X_i]^2)`.
pub fn step_gain_identity(
    pe: &PseudoExpectation,
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let mi = pe.singleton(i);
    if 1.0 - mi.abs() <= COND_TOL {
        return Err(Error::NearDeterministic { var: i, sign: if mi > 0.0 { 1 } else { -1 }, denom: 1.0 - mi.abs() });
    }
    let minus = pe.condition(i, -1)?.singleton(j);
    let plus = pe.condition(i, 1)?.singleton(j);
    let lhs = 0.5 * (1.0 - mi) * minus * minus + 0.5 * (1.0 + mi) * plus * plus
        - pe.singleton(j).powi(2);
    let cov = pe.pair(i, j) - mi * pe.singleton(j);
    let rhs = cov * cov / (1.0 - mi * mi);
    Ok((lhs, rhs))
}

/// Indices with `E[X_i]` strictly inside `(-tau, tau)`.
pub fn undetermined_set(pe: &PseudoExpectation, tau: f64) -> Vec<usize> {
    (1..=pe.n()).filter(|&i| pe.singleton(i).abs() < tau).collect()
}

/// Size of `V_(-tau,tau) \ C_gamma(i)`: undetermined vertices `j != i`
/// whose correlation with `i` falls outside `[-gamma, gamma]`.
pub fn badness(pe: &PseudoExpectation, undetermined: &[usize], i: usize, gamma: f64) -> usize {
    undetermined
        .iter()
        .filter(|&&j| j != i && pe.pair(i, j).abs() > gamma)
        .count()
}

/// Finds an undetermined vertex whose correlation neighborhood is too
/// crowded: some `i` with `|V_(-tau,tau) \ C_gamma(i)| > threshold`.
/// Among qualifying vertices the one with the largest count wins, ties to
/// the smallest index. Returns the vertex and its count.
pub fn find_bad_vertex(
    pe: &PseudoExpectation,
    p: &HollowParams,
    threshold: f64,
) -> Option<(usize, usize)> {
    let undetermined = undetermined_set(pe, p.tau);
    let mut best: Option<(usize, usize)> = None;
    for &i in &undetermined {
        let count = badness(pe, &undetermined, i, p.gamma);
        if count as f64 > threshold && best.map_or(true, |(_, c)| count > c) {
            best = Some((i, count));
        }
    }
    best
}

/// Conditions until no bad vertex remains: while some undetermined vertex
/// exceeds the hollowness threshold, condition on it with the sign of
/// larger potential (ties to +1). Each executed step increases the
/// potential by more than `n / ell`, so at most `ell` steps can occur;
/// running out of budget or degree with a bad vertex left signals a
/// violated precondition and fails loudly.
pub fn hollowize(
    pe: &PseudoExpectation,
    p: &HollowParams,
) -> Result<(PseudoExpectation, ConditioningTrace)> {
    let threshold = p.threshold(pe.n());
    let mut current = pe.clone();
    let mut trace = ConditioningTrace::default();

    for _step in 0..p.ell {
        let bad = find_bad_vertex(&current, p, threshold);
        let Some((var, bad_count)) = bad else {
            trace.final_degree = current.degree();
            return Ok((current, trace));
        };
        if current.degree() < 3 {
            return Err(Error::BudgetExhausted { remaining_bad: bad_count });
        }
        let before = potential(&current);
        let minus = current.condition(var, -1)?;
        let plus = current.condition(var, 1)?;
        let (phi_minus, phi_plus) = (potential(&minus), potential(&plus));
        let (sign, next, after) = if phi_plus >= phi_minus {
            (1i8, plus, phi_plus)
        } else {
            (-1i8, minus, phi_minus)
        };
        trace.steps.push(TraceStep {
            var,
            sign,
            potential_before: before,
            potential_after: after,
            bad_count,
        });
        current = next;
    }

    match find_bad_vertex(&current, p, threshold) {
        None => {
            trace.final_degree = current.degree();
            Ok((current, trace))
        }
        Some((_, count)) => Err(Error::BudgetExhausted { remaining_bad: count }),
    }
}
