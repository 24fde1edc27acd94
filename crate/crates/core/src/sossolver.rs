//! Degree-d SoS feasibility: constraint-system builders for the four
//! problems, a cyclic-projection feasibility solver over the moment vector,
//! and binary search for the smallest feasible objective bound.
//!
//! The solver works in the geometry induced by the moment matrix: a moment
//! vector `x` is identified with the matrix `Y[A,B] = x[A xor B]`, and all
//! projections (hyperplanes, halfspaces, the PSD cone followed by
//! averaging duplicate entries) are exact projections in that space, so
//! the iteration is plain alternating projection onto convex sets.

use crate::error::{Error, Result};
use crate::instances::{SymmetricDigraph, UndirectedGraph};
use crate::poly::{square_diff, MultilinearPoly};
use crate::pseudoexp::{satisfies, ConstraintSystem, PseudoExpectation};
use crate::subset::{subsets_up_to, SubsetIndex, VarSet};
use std::sync::Arc;

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolveParams {
    /// Relaxation degree, even and at least 2.
    pub d: usize,
    /// Per-constraint residual tolerance for accepted solutions.
    pub feas_tol: f64,
    /// Allowed negative slack on the moment-matrix spectrum.
    pub psd_tol: f64,
    /// Objective resolution of the binary search.
    pub obj_tol: f64,
    /// Projection-cycle budget per feasibility solve.
    pub max_iters: usize,
    /// Seed recorded in reports; the solver itself is deterministic.
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            d: 2,
            feas_tol: 1e-6,
            psd_tol: 1e-6,
            obj_tol: 1e-4,
            max_iters: 60_000,
            seed: 0,
        }
    }
}

impl SolveParams {
    pub fn with_degree(d: usize) -> Self {
        assert!(d >= 2 && d % 2 == 0, "degree must be even and >= 2");
        SolveParams { d, ..Default::default() }
    }
}

/// Relaxation degree from the size-versus-accuracy parameter `r`:
/// `ceil(1000 n / 2^(r^2)) + 2`, capped and rounded up to even.
pub fn compute_degree(n: usize, r: f64, cap: usize) -> usize {
    assert!(r > 1.0, "r must exceed 1");
    assert!(cap >= 2, "degree cap must be at least 2");
    let ratio = 1000.0 * n as f64 / 2f64.powf(r * r);
    let raw = ratio.ceil().max(1.0) as usize + 2;
    let mut d = raw.min(cap);
    if d % 2 == 1 {
        d += 1;
    }
    d.min(cap).max(2)
}

/// The three vertex-midpoint triangle inequalities on `{i, j, k}`:
/// `(X_a - X_m)^2 + (X_m - X_b)^2 - (X_a - X_b)^2 >= 0` per midpoint `m`.
fn plain_triangles(n: usize, i: usize, j: usize, k: usize) -> Vec<MultilinearPoly> {
    [(i, j, k), (j, k, i), (k, i, j)]
        .into_iter()
        .map(|(a, b, m)| {
            square_diff(n, a, m).add(&square_diff(n, m, b)).sub(&square_diff(n, a, b))
        })
        .collect()
}

/// The four-way antipodal triangle family on `{i, j, k}`: all sign
/// patterns `2 (1 + s1 X_iX_j + s2 X_iX_k + s3 X_jX_k)` with
/// `s1 s2 s3 = +1`, which is the deduplicated set of the four inequality
/// shapes over all midpoint choices.
fn antipodal_triangles(n: usize, i: usize, j: usize, k: usize) -> Vec<MultilinearPoly> {
    let mut out = Vec::with_capacity(4);
    for &(s1, s2, s3) in
        &[(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)]
    {
        out.push(MultilinearPoly::from_terms(
            n,
            [
                (VarSet::EMPTY, 2.0),
                (VarSet::pair(i, j), 2.0 * s1),
                (VarSet::pair(i, k), 2.0 * s2),
                (VarSet::pair(j, k), 2.0 * s3),
            ],
        ));
    }
    out
}

/// Anchored triangle inequalities through the constant point: the
/// symmetric form `(1-X_i)^2 + (1-X_j)^2 - (X_i-X_j)^2 >= 0` plus, per
/// ordered pair, `(X_i-X_j)^2 + (1-X_j)^2 - (1-X_i)^2 >= 0` so distances
/// to the anchor obey the triangle inequality in every arrangement.
fn anchored_triangles(n: usize, i: usize, j: usize) -> Vec<MultilinearPoly> {
    let anchor_dist = |v: usize| -> MultilinearPoly {
        // (1 - X_v)^2 = 2 - 2 X_v
        MultilinearPoly::from_terms(n, [(VarSet::EMPTY, 2.0), (VarSet::single(v), -2.0)])
    };
    let mut out = Vec::with_capacity(3);
    out.push(anchor_dist(i).add(&anchor_dist(j)).sub(&square_diff(n, i, j)));
    out.push(square_diff(n, i, j).add(&anchor_dist(j)).sub(&anchor_dist(i)));
    out.push(square_diff(n, i, j).add(&anchor_dist(i)).sub(&anchor_dist(j)));
    out
}

/// Ordered spread `sum_{i,j} (X_i - X_j)^2` over all ordered vertex pairs.
fn spread_poly(n: usize) -> MultilinearPoly {
    let mut p = MultilinearPoly::zero(n);
    for i in 1..=n {
        for j in (i + 1)..=n {
            p = p.add(&square_diff(n, i, j).scale(2.0));
        }
    }
    p
}

/// Vertex Cover system: edge-cover equalities, the antipodal triangle
/// family, and the cover-size bound `obj - sum (1 + X_i)/2 >= 0`.
pub fn build_vc_system(g: &UndirectedGraph, obj: f64) -> ConstraintSystem {
    let n = g.n();
    let mut sys = ConstraintSystem::new(n, "vc");
    for &(i, j) in g.edges() {
        let p = MultilinearPoly::one_plus_signed(n, i, -1.0)
            .mul(&MultilinearPoly::one_plus_signed(n, j, -1.0));
        sys.push_equality(p);
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                for q in antipodal_triangles(n, i, j, k) {
                    sys.push_inequality(q);
                }
            }
        }
    }
    let mut objp = MultilinearPoly::constant(n, obj - n as f64 / 2.0);
    for i in 1..=n {
        objp.add_term(VarSet::single(i), -0.5);
    }
    sys.push_inequality(objp);
    sys
}

/// Balanced Separator system: spread and signed-sum balance, plain plus
/// anchored triangles, and the cut bound `4 obj - sum_E (X_i - X_j)^2 >= 0`.
pub fn build_bs_system(g: &UndirectedGraph, obj: f64) -> ConstraintSystem {
    let n = g.n();
    let mut sys = ConstraintSystem::new(n, "bs");
    let spread = spread_poly(n).add(&MultilinearPoly::constant(n, -16.0 * (n * n) as f64 / 9.0));
    sys.push_inequality(spread);
    let mut sum = MultilinearPoly::zero(n);
    for i in 1..=n {
        sum.add_term(VarSet::single(i), 1.0);
    }
    sys.push_inequality(MultilinearPoly::constant(n, n as f64 / 3.0).sub(&sum));
    sys.push_inequality(MultilinearPoly::constant(n, n as f64 / 3.0).add(&sum));
    push_metric_triangles(&mut sys, n);
    let mut objp = MultilinearPoly::constant(n, 4.0 * obj);
    for &(i, j) in g.edges() {
        objp = objp.sub(&square_diff(n, i, j));
    }
    sys.push_inequality(objp);
    sys
}

fn push_metric_triangles(sys: &mut ConstraintSystem, n: usize) {
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                for q in plain_triangles(n, i, j, k) {
                    sys.push_inequality(q);
                }
            }
        }
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            for q in anchored_triangles(n, i, j) {
                sys.push_inequality(q);
            }
        }
    }
}

/// Uniform Sparsest Cut system at part size `t`: the size equality
/// `sum_{i,j} (X_i - X_j)^2 = 8 t (n - t)`, the metric triangles, and the
/// scaled cut bound `obj * t - sum_E (X_i - X_j)^2 >= 0`.
pub fn build_usc_system(g: &UndirectedGraph, obj: f64, t: usize) -> Result<ConstraintSystem> {
    let n = g.n();
    if t < 1 || 2 * t > n {
        return Err(Error::InvalidInstance(format!("part size {t} out of range [1, {n}/2]")));
    }
    let mut sys = ConstraintSystem::new(n, "usc");
    let size = spread_poly(n)
        .add(&MultilinearPoly::constant(n, -8.0 * (t * (n - t)) as f64));
    sys.push_equality(size);
    push_metric_triangles(&mut sys, n);
    let mut objp = MultilinearPoly::constant(n, obj * t as f64);
    for &(i, j) in g.edges() {
        objp = objp.sub(&square_diff(n, i, j));
    }
    sys.push_inequality(objp);
    Ok(sys)
}

/// Min Symmetric DiCut system over variables `X_1..X_n` with the antipodal
/// substitution `X_{-i} = -X_i`: the four-way triangle family, the
/// nonnegativity of every directed pair distance, and the arc bound
/// `obj - sum_arcs (1 + sgn(u) X_u)(1 - sgn(v) X_v)/4 >= 0`, whose value
/// at an integral cut is exactly the number of severed arcs.
pub fn build_sdc_system(g: &SymmetricDigraph, obj: f64) -> ConstraintSystem {
    let n = g.n();
    let mut sys = ConstraintSystem::new(n, "sdc");
    for i in 1..=n {
        for j in (i + 1)..=n {
            for k in (j + 1)..=n {
                for q in antipodal_triangles(n, i, j, k) {
                    sys.push_inequality(q);
                }
            }
        }
    }
    // Directed pair distances are expectations of (1 + sX_i)(1 - tX_j);
    // at degree 2 their nonnegativity is not implied by positivity.
    for i in 1..=n {
        for j in (i + 1)..=n {
            for s in [1.0, -1.0] {
                for t in [1.0, -1.0] {
                    let q = MultilinearPoly::one_plus_signed(n, i, s)
                        .mul(&MultilinearPoly::one_plus_signed(n, j, -t));
                    sys.push_inequality(q);
                }
            }
        }
    }
    let mut objp = MultilinearPoly::constant(n, obj);
    for &(u, v) in g.arcs() {
        let term = MultilinearPoly::one_plus_signed(n, u.unsigned_abs() as usize, u.signum() as f64)
            .mul(&MultilinearPoly::one_plus_signed(
                n,
                v.unsigned_abs() as usize,
                -(v.signum() as f64),
            ))
            .scale(0.25);
        objp = objp.sub(&term);
    }
    sys.push_inequality(objp);
    sys
}

/// Outcome of a feasibility solve.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Feasible(PseudoExpectation),
    Infeasible,
    /// Iteration budget exhausted while residuals were still shrinking.
    Indeterminate { residual: f64 },
}

impl SolveOutcome {
    pub fn feasible(&self) -> Option<&PseudoExpectation> {
        match self {
            SolveOutcome::Feasible(pe) => Some(pe),
            _ => None,
        }
    }
}

/// One linear constraint over the moment vector with projection data in
/// the duplicate-weighted metric.
#[derive(Debug, Clone)]
struct Row {
    cols: Vec<u32>,
    vals: Vec<f64>,
    /// vals / duplicate count per column: the projection direction.
    scaled: Vec<f64>,
    /// Squared norm of the row in the weighted metric.
    wnorm: f64,
    rhs: f64,
}

impl Row {
    fn residual(&self, x: &[f64]) -> f64 {
        let mut acc = -self.rhs;
        for (c, v) in self.cols.iter().zip(&self.vals) {
            acc += v * x[*c as usize];
        }
        acc
    }

    /// Projects onto the slab `|a.x - rhs| <= slack`. The slack keeps
    /// equality surfaces from meeting the PSD cone tangentially, which
    /// would stall the alternating projections; accepted solutions are
    /// verified against the full tolerance afterwards.
    fn project_eq(&self, x: &mut [f64], relax: f64, slack: f64) {
        let r = self.residual(x);
        if r.abs() <= slack {
            return;
        }
        let target = slack * r.signum();
        let step = -relax * (r - target) / self.wnorm;
        for (c, s) in self.cols.iter().zip(&self.scaled) {
            x[*c as usize] += step * s;
        }
    }

    /// Projects onto the relaxed halfspace `a.x >= rhs - slack` when
    /// violated; returns the excess violation.
    fn project_ge(&self, x: &mut [f64], relax: f64, slack: f64) -> f64 {
        let r = self.residual(x);
        if r >= -slack {
            return 0.0;
        }
        let step = -relax * (r + slack) / self.wnorm;
        for (c, s) in self.cols.iter().zip(&self.scaled) {
            x[*c as usize] += step * s;
        }
        -r - slack
    }
}

/// Compiled form of a constraint system at a fixed degree.
struct Compiled {
    n: usize,
    d: usize,
    index: Arc<SubsetIndex>,
    /// Moment-matrix wiring: `pair_idx[a * side + b]` is the x-position of
    /// the subset `rows[a] xor rows[b]`.
    mm_side: usize,
    pair_idx: Vec<u32>,
    /// Duplicate count of each x-position inside the moment matrix.
    counts: Vec<f64>,
    eq_rows: Vec<Row>,
    base_ineq: Vec<Row>,
    sys: ConstraintSystem,
}

impl Compiled {
    fn build(sys: ConstraintSystem, d: usize) -> Self {
        let n = sys.n();
        let index = Arc::new(SubsetIndex::new(n, d));
        let k = d / 2;
        let mm_rows = subsets_up_to(n, k);
        let side = mm_rows.len();
        let mut pair_idx = vec![0u32; side * side];
        let mut counts = vec![0.0f64; index.len()];
        for a in 0..side {
            for b in 0..side {
                let pos = index.position(mm_rows[a].sym_diff(mm_rows[b])).unwrap();
                pair_idx[a * side + b] = pos as u32;
                counts[pos] += 1.0;
            }
        }
        // Subsets of odd degree parity beyond 2k never appear for odd d;
        // with even d every stored subset shows up in the matrix.
        for c in counts.iter_mut() {
            if *c == 0.0 {
                *c = 1.0;
            }
        }

        let mk_row = |terms: &std::collections::BTreeMap<VarSet, f64>, rhs: f64| -> Row {
            let norm: f64 = terms.values().map(|c| c * c).sum::<f64>().sqrt();
            let scale = if norm > 1e-12 { 1.0 / norm } else { 1.0 };
            let mut cols = Vec::with_capacity(terms.len());
            let mut vals = Vec::with_capacity(terms.len());
            let mut scaled = Vec::with_capacity(terms.len());
            let mut wnorm = 0.0;
            for (&s, &c) in terms {
                let c = c * scale;
                let pos = index.position(s).unwrap();
                cols.push(pos as u32);
                vals.push(c);
                scaled.push(c / counts[pos]);
                wnorm += c * c / counts[pos];
            }
            Row { cols, vals, scaled, wnorm, rhs: rhs * scale }
        };
        let poly_row = |p: &MultilinearPoly, shift: VarSet, rhs: f64| -> Row {
            let mut terms = std::collections::BTreeMap::new();
            for (u, c) in p.terms() {
                *terms.entry(u.sym_diff(shift)).or_insert(0.0) += c;
            }
            terms.retain(|_, c| *c != 0.0);
            mk_row(&terms, rhs)
        };

        // Normalization E[1] = 1.
        let mut eq_rows = vec![mk_row(&[(VarSet::EMPTY, 1.0)].into_iter().collect(), 1.0)];
        for p in sys.equalities() {
            if p.degree() > d {
                continue;
            }
            for s in subsets_up_to(n, d - p.degree()) {
                let row = poly_row(p, s, 0.0);
                if !row.cols.is_empty() {
                    eq_rows.push(row);
                }
            }
        }
        let base_ineq: Vec<Row> = sys
            .inequalities()
            .iter()
            .filter(|q| q.degree() <= d)
            .map(|q| poly_row(q, VarSet::EMPTY, 0.0))
            .collect();

        Compiled { n, d, index, mm_side: side, pair_idx, counts, eq_rows, base_ineq, sys }
    }

    /// Scans every product constraint `E[X_phi q] >= 0` beyond the base
    /// rows, reporting the worst violation and materializing rows for the
    /// most violated ones.
    fn scan_products(&self, x: &[f64], collect_above: f64, out: &mut Vec<(u64, Row)>) -> f64 {
        let mut worst = 0.0f64;
        for (qi, q) in self.sys.inequalities().iter().enumerate() {
            if q.degree() > self.d {
                continue;
            }
            let budget = self.d - q.degree();
            if budget == 0 {
                continue;
            }
            let qterms: Vec<(VarSet, f64)> = q.terms().collect();
            for s in subsets_up_to(self.n, budget) {
                if s.is_empty() {
                    continue; // base rows cover S = {}
                }
                let subs: Vec<VarSet> = s.subsets().collect();
                let evals: Vec<f64> = subs
                    .iter()
                    .map(|t| {
                        qterms
                            .iter()
                            .map(|&(u, c)| c * x[self.index.position(t.sym_diff(u)).unwrap()])
                            .sum()
                    })
                    .collect();
                for neg in s.subsets() {
                    let mut val = 0.0;
                    for (t, e) in subs.iter().zip(&evals) {
                        if (t.0 & neg.0).count_ones() % 2 == 0 {
                            val += e;
                        } else {
                            val -= e;
                        }
                    }
                    if val < -collect_above {
                        let key = product_key(qi, s, neg);
                        if !out.iter().any(|(k, _)| *k == key) {
                            out.push((key, self.product_row(&qterms, s, neg)));
                        }
                    }
                    worst = worst.max(-val);
                }
            }
        }
        worst
    }

    fn product_row(&self, qterms: &[(VarSet, f64)], s: VarSet, neg: VarSet) -> Row {
        let mut terms: std::collections::BTreeMap<VarSet, f64> = std::collections::BTreeMap::new();
        for t in s.subsets() {
            let sign = if (t.0 & neg.0).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            for &(u, c) in qterms {
                *terms.entry(t.sym_diff(u)).or_insert(0.0) += sign * c;
            }
        }
        terms.retain(|_, c| c.abs() > 1e-15);
        let norm: f64 = terms.values().map(|c| c * c).sum::<f64>().sqrt();
        let scale = if norm > 1e-12 { 1.0 / norm } else { 1.0 };
        let mut cols = Vec::with_capacity(terms.len());
        let mut vals = Vec::with_capacity(terms.len());
        let mut scaled = Vec::with_capacity(terms.len());
        let mut wnorm = 0.0;
        for (&sub, &c) in &terms {
            let c = c * scale;
            let pos = self.index.position(sub).unwrap();
            cols.push(pos as u32);
            vals.push(c);
            scaled.push(c / self.counts[pos]);
            wnorm += c * c / self.counts[pos];
        }
        Row { cols, vals, scaled, wnorm, rhs: 0.0 }
    }

    fn pe_from(&self, x: &[f64]) -> PseudoExpectation {
        PseudoExpectation::from_raw(self.n, self.d, Arc::clone(&self.index), x.to_vec())
    }
}

fn product_key(qi: usize, s: VarSet, neg: VarSet) -> u64 {
    ((qi as u64) << 40) | ((s.0 as u64) << 20) | neg.0 as u64
}

const DR_ALPHA: f64 = 0.5;
const SCAN_EVERY: usize = 40;
const STALL_WINDOW: usize = 400;
/// Windowed relative improvement below which the run is declared parked.
const STALL_DEAD: f64 = 0.02;
/// Improvement below which the tail is slow enough to try face polishing.
const STALL_SLOW: f64 = 0.35;

/// Solves the feasibility problem: find a degree-d pseudo-expectation
/// satisfying the system within `feas_tol` and `psd_tol`, or report that
/// none exists. The verdict for an accepted solution is re-checked with an
/// independent satisfaction scan before returning.
///
/// The method is Douglas-Rachford splitting in the lifted space
/// `(moment matrix, inequality slacks, equality values)`: one set is the
/// affine image of the moment vector under all constraint rows (projected
/// by a conjugate-gradient least squares), the other the product of the
/// PSD cone, the nonnegative orthant, and the fixed right-hand sides.
pub fn solve_feasibility(sys: &ConstraintSystem, params: &SolveParams) -> Result<SolveOutcome> {
    solve_feasibility_warm(sys, params, None)
}

pub fn solve_feasibility_warm(
    sys: &ConstraintSystem,
    params: &SolveParams,
    warm: Option<&[f64]>,
) -> Result<SolveOutcome> {
    solve_feasibility_traced(sys, params, warm, None)
}

/// One trace point per cycle: `(cycle, worst linear violation, min eigenvalue)`.
pub type TracePoint = (usize, f64, f64);

pub fn solve_feasibility_traced(
    sys: &ConstraintSystem,
    params: &SolveParams,
    warm: Option<&[f64]>,
    mut trace: Option<&mut Vec<TracePoint>>,
) -> Result<SolveOutcome> {
    assert!(params.d >= 2 && params.d % 2 == 0, "degree must be even and >= 2");
    let compiled = Compiled::build(sys.clone(), params.d);
    let dim = compiled.index.len();
    let side = compiled.mm_side;
    let npairs = side * side;

    let mut active: Vec<(u64, Row)> = Vec::new();
    let mut xhat = match warm {
        Some(w) if w.len() == dim => w.to_vec(),
        _ => {
            let mut x = vec![0.0; dim];
            x[0] = 1.0;
            x
        }
    };

    // z blocks: moment-matrix image, inequality slacks, equality values
    let seed_blocks = |compiled: &Compiled, active: &[(u64, Row)], x: &[f64]| {
        let mut zy = vec![0.0f64; npairs];
        for (slot, pi) in zy.iter_mut().zip(&compiled.pair_idx) {
            *slot = x[*pi as usize];
        }
        let zs: Vec<f64> = compiled
            .base_ineq
            .iter()
            .chain(active.iter().map(|(_, r)| r))
            .map(|r| (r.residual(x) + r.rhs).max(0.0))
            .collect();
        let ze: Vec<f64> = compiled.eq_rows.iter().map(|r| r.rhs).collect();
        (zy, zs, ze)
    };
    let (mut zy, mut zs, mut ze) = seed_blocks(&compiled, &active, &xhat);

    let mut uy = vec![0.0f64; npairs];
    let mut rhs = vec![0.0f64; dim];
    let mut best_viol = f64::INFINITY;
    let mut window_best = f64::INFINITY;
    let mut next_check = STALL_WINDOW;
    let mut polishes_left = 6usize;
    let mut last_min_eig = 0.0f64;

    for cycle in 0..params.max_iters {
        // ---- projection onto the affine image set (least squares in x)
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for (slot, pi) in zy.iter().zip(&compiled.pair_idx) {
            rhs[*pi as usize] += *slot;
        }
        let rows_iter = || {
            compiled
                .eq_rows
                .iter()
                .zip(ze.iter())
                .chain(
                    compiled
                        .base_ineq
                        .iter()
                        .chain(active.iter().map(|(_, r)| r))
                        .zip(zs.iter()),
                )
        };
        for (row, &zval) in rows_iter() {
            for (c, v) in row.cols.iter().zip(&row.vals) {
                rhs[*c as usize] += v * zval;
            }
        }
        cg_normal_equations(&compiled, &active, &rhs, &mut xhat);
        if std::env::var("SOS_DEBUG").is_ok() && cycle % 40 == 0 {
            // verify the normal equations actually hold
            let rows = || {
                compiled
                    .eq_rows
                    .iter()
                    .chain(compiled.base_ineq.iter())
                    .chain(active.iter().map(|(_, r)| r))
            };
            let mut resid = vec![0.0f64; dim];
            for ((o, &c), &vi) in resid.iter_mut().zip(&compiled.counts).zip(&xhat) {
                *o = c * vi;
            }
            for row in rows() {
                let mut t = 0.0;
                for (c, val) in row.cols.iter().zip(&row.vals) {
                    t += val * xhat[*c as usize];
                }
                for (c, val) in row.cols.iter().zip(&row.vals) {
                    resid[*c as usize] += val * t;
                }
            }
            let err: f64 = resid
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let rn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            eprintln!("cycle {cycle}: cg rel err {:.3e}, znorm_s {:.3e}", err / rn.max(1e-30), zs.iter().map(|v| v*v).sum::<f64>().sqrt());
        }

        // ---- u = L(xhat), with candidate residuals measured on xhat
        for (slot, pi) in uy.iter_mut().zip(&compiled.pair_idx) {
            *slot = xhat[*pi as usize];
        }
        let mut eq_viol = 0.0f64;
        let us_ue: (Vec<f64>, Vec<f64>) = {
            let ue: Vec<f64> = compiled
                .eq_rows
                .iter()
                .map(|r| {
                    let v = r.residual(&xhat) + r.rhs;
                    eq_viol = eq_viol.max((v - r.rhs).abs());
                    v
                })
                .collect();
            let us: Vec<f64> = compiled
                .base_ineq
                .iter()
                .chain(active.iter().map(|(_, r)| r))
                .map(|r| r.residual(&xhat))
                .collect();
            (us, ue)
        };
        let (us, ue) = us_ue;
        let in_viol = us.iter().fold(0.0f64, |acc, &v| acc.max(-v));
        if std::env::var("SOS_DEBUG").is_ok() && cycle % 80 == 0 {
            let mut worst_eq = (0usize, 0.0f64);
            for (i, (r, &v)) in compiled.eq_rows.iter().zip(&ue).enumerate() {
                if (v - r.rhs).abs() > worst_eq.1 {
                    worst_eq = (i, (v - r.rhs).abs());
                }
            }
            let mut worst_in = (0usize, 0.0f64);
            for (i, &v) in us.iter().enumerate() {
                if -v > worst_in.1 {
                    worst_in = (i, -v);
                }
            }
            eprintln!(
                "cycle {cycle}: worst eq row {} = {:.3e}, worst ineq row {} = {:.3e}, zs[obj..] tail {:?}",
                worst_eq.0, worst_eq.1, worst_in.0, worst_in.1,
                &zs[zs.len().saturating_sub(3)..]
            );
        }
        let lin_viol = eq_viol.max(in_viol);

        // ---- reflect, project onto the cone block, update z
        let m = crate::linalg::SymMatrix::from_fn(side, |a, b| {
            2.0 * uy[a * side + b] - zy[a * side + b]
        });
        let eig = crate::linalg::sym_eigen(&m)?;
        // averaged update: z += alpha (P_B(2u - z) - u), damping the
        // rotational modes of the splitting
        for a in 0..side {
            for b in 0..side {
                let w = 2.0 * uy[a * side + b] - zy[a * side + b];
                zy[a * side + b] += DR_ALPHA * (w - uy[a * side + b]);
            }
        }
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam >= 0.0 {
                break;
            }
            let step = DR_ALPHA * lam;
            for a in 0..side {
                let va = eig.vectors[a * side + k];
                if va == 0.0 {
                    continue;
                }
                for b in 0..side {
                    zy[a * side + b] -= step * va * eig.vectors[b * side + k];
                }
            }
        }
        for (z, &u) in zs.iter_mut().zip(&us) {
            let w = 2.0 * u - *z;
            *z += DR_ALPHA * (w.max(0.0) - u);
        }
        for ((z, &u), row) in ze.iter_mut().zip(&ue).zip(compiled.eq_rows.iter()) {
            *z += DR_ALPHA * (row.rhs - u);
        }

        // PSD health of the shadow point, refreshed when linear residuals
        // are small or periodically
        let near = lin_viol <= 10.0 * params.feas_tol;
        if near || cycle % 10 == 0 {
            let mu = crate::linalg::SymMatrix::from_fn(side, |a, b| uy[a * side + b]);
            last_min_eig = crate::linalg::sym_eigen(&mu)?.min_value();
        }
        let cheap = lin_viol.max((-last_min_eig).max(0.0));
        if let Some(t) = trace.as_deref_mut() {
            t.push((cycle, lin_viol, last_min_eig));
        }
        if cheap < best_viol {
            best_viol = cheap;
        }

        let candidate = cheap <= params.feas_tol * 0.5;
        if candidate || (cycle > 0 && cycle % SCAN_EVERY == 0) {
            let before = active.len();
            let worst_product =
                compiled.scan_products(&xhat, params.feas_tol * 0.25, &mut active);
            if active.len() > before {
                // extend the slack block for the newly activated rows
                for (_, row) in &active[before..] {
                    zs.push((row.residual(&xhat)).max(0.0));
                }
            }
            if candidate && worst_product <= params.feas_tol * 0.5 {
                // Renormalize so E[1] = 1 exactly, then verify independently.
                let scale = xhat[0];
                if (scale - 1.0).abs() < 0.5 {
                    let mut xs = xhat.clone();
                    xs.iter_mut().for_each(|v| *v /= scale);
                    let pe = compiled.pe_from(&xs);
                    let rep = satisfies(&pe, sys, params.feas_tol);
                    let eig_ok = pe.min_eigenvalue()? >= -params.psd_tol;
                    if rep.passes(params.feas_tol) && eig_ok {
                        return Ok(SolveOutcome::Feasible(pe));
                    }
                }
            }
        }

        if cycle >= next_check {
            // Windowed progress: how much did the best residual improve
            // over the last window?
            let improvement = 1.0 - best_viol / window_best;
            if improvement < STALL_DEAD {
                // Residuals parked on a positive floor: the sets do not meet.
                if best_viol > 100.0 * params.feas_tol {
                    return Ok(SolveOutcome::Infeasible);
                }
                return Ok(SolveOutcome::Indeterminate { residual: best_viol });
            }
            if improvement < STALL_SLOW && polishes_left > 0 && best_viol <= 1e-3 {
                // Slow tail near the cone boundary: pin the near-null face
                // of the moment matrix, finish linearly, reseed the state.
                polishes_left -= 1;
                polish_on_face(&compiled, &mut xhat, &active, params, 0.4 * params.feas_tol)?;
                let reseeded = seed_blocks(&compiled, &active, &xhat);
                zy = reseeded.0;
                zs = reseeded.1;
                ze = reseeded.2;
            }
            window_best = best_viol;
            next_check = cycle + STALL_WINDOW;
        }
    }
    Ok(SolveOutcome::Indeterminate { residual: best_viol })
}

/// Solves `(D + sum_r a_r a_r^T) x = rhs` by Jacobi-preconditioned
/// conjugate gradient, where `D` is the duplicate-count diagonal of the
/// moment-matrix embedding and the rows run over all constraints.
fn cg_normal_equations(compiled: &Compiled, active: &[(u64, Row)], rhs: &[f64], x: &mut Vec<f64>) {
    let dim = rhs.len();
    let rows = || {
        compiled
            .eq_rows
            .iter()
            .chain(compiled.base_ineq.iter())
            .chain(active.iter().map(|(_, r)| r))
    };
    let mut precond = compiled.counts.clone();
    for row in rows() {
        for (c, v) in row.cols.iter().zip(&row.vals) {
            precond[*c as usize] += v * v;
        }
    }
    let matvec = |v: &[f64], out: &mut [f64]| {
        for ((o, &c), &vi) in out.iter_mut().zip(&compiled.counts).zip(v) {
            *o = c * vi;
        }
        for row in rows() {
            let mut t = 0.0;
            for (c, val) in row.cols.iter().zip(&row.vals) {
                t += val * v[*c as usize];
            }
            if t != 0.0 {
                for (c, val) in row.cols.iter().zip(&row.vals) {
                    out[*c as usize] += val * t;
                }
            }
        }
    };

    let mut r = vec![0.0f64; dim];
    matvec(x, &mut r);
    for (ri, (&b, _)) in r.iter_mut().zip(rhs.iter().zip(x.iter())) {
        *ri = b - *ri;
    }
    let rhs_norm: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-30);
    let mut zvec: Vec<f64> = r.iter().zip(&precond).map(|(ri, p)| ri / p).collect();
    let mut pvec = zvec.clone();
    let mut rz: f64 = r.iter().zip(&zvec).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; dim];
    for _ in 0..400 {
        let rnorm: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= 1e-12 * rhs_norm {
            break;
        }
        matvec(&pvec, &mut ap);
        let pap: f64 = pvec.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for ((xi, ri), (pi, api)) in
            x.iter_mut().zip(r.iter_mut()).zip(pvec.iter().zip(&ap))
        {
            *xi += alpha * pi;
            *ri -= alpha * api;
        }
        for ((zi, ri), pr) in zvec.iter_mut().zip(&r).zip(&precond) {
            *zi = ri / pr;
        }
        let rz_new: f64 = r.iter().zip(&zvec).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in pvec.iter_mut().zip(&zvec) {
            *pi = zi + beta * *pi;
        }
    }
}

fn eig_of(compiled: &Compiled, x: &[f64]) -> Result<crate::linalg::SymEigen> {
    let side = compiled.mm_side;
    let m = crate::linalg::SymMatrix::from_fn(side, |a, b| {
        x[compiled.pair_idx[a * side + b] as usize]
    });
    crate::linalg::sym_eigen(&m)
}

/// Minimum-norm correction moving `x` onto the affine system given by
/// `rows`: solves `(R R^T) lambda = residuals` by conjugate gradient and
/// applies `x += R^T lambda`. Tolerant of redundant rows.
fn min_norm_correction(rows: &[&Row], x: &mut [f64], max_iters: usize) {
    let m = rows.len();
    if m == 0 {
        return;
    }
    let dim = x.len();
    let matvec = |u: &[f64], scratch: &mut Vec<f64>, out: &mut Vec<f64>| {
        scratch.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in rows.iter().enumerate() {
            if u[i] == 0.0 {
                continue;
            }
            for (c, v) in row.cols.iter().zip(&row.vals) {
                scratch[*c as usize] += u[i] * v;
            }
        }
        for (i, row) in rows.iter().enumerate() {
            let mut acc = 0.0;
            for (c, v) in row.cols.iter().zip(&row.vals) {
                acc += v * scratch[*c as usize];
            }
            out[i] = acc;
        }
    };

    let mut r: Vec<f64> = rows.iter().map(|row| -row.residual(x)).collect();
    let rr0: f64 = r.iter().map(|v| v * v).sum();
    if rr0 <= 1e-28 {
        return;
    }
    let mut lambda = vec![0.0f64; m];
    let mut p = r.clone();
    let mut scratch = vec![0.0f64; dim];
    let mut kp = vec![0.0f64; m];
    let mut rr = rr0;
    for _ in 0..max_iters.min(m) {
        matvec(&p, &mut scratch, &mut kp);
        let pkp: f64 = p.iter().zip(&kp).map(|(a, b)| a * b).sum();
        if pkp <= 1e-28 {
            break;
        }
        let alpha = rr / pkp;
        for i in 0..m {
            lambda[i] += alpha * p[i];
            r[i] -= alpha * kp[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new <= 1e-24 * rr0 {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..m {
            p[i] = r[i] + beta * p[i];
        }
    }
    for (i, row) in rows.iter().enumerate() {
        if lambda[i] == 0.0 {
            continue;
        }
        for (c, v) in row.cols.iter().zip(&row.vals) {
            x[*c as usize] += lambda[i] * v;
        }
    }
}

/// Pins the near-null eigenvectors of the moment matrix as linear
/// constraints `Y v = 0`, then jumps onto the combined affine system with
/// a least-squares correction and repairs inequalities. Re-estimating the
/// face each round contracts quadratically where plain alternating
/// projections crawl sublinearly along tangential contacts. The matrix
/// row indexed by the empty set is skipped: its residual reproduces the
/// current eigenvector tilt instead of vanishing at a solution.
fn polish_on_face(
    compiled: &Compiled,
    x: &mut [f64],
    active: &[(u64, Row)],
    params: &SolveParams,
    slack: f64,
) -> Result<()> {
    let side = compiled.mm_side;
    for _round in 0..12 {
        let _round = _round;
        let eig = eig_of(compiled, x)?;
        if eig.min_value() >= -0.5 * params.psd_tol {
            return Ok(());
        }
        let pin_tol = (10.0 * params.psd_tol).max(100.0 * eig.min_value().abs()).min(1e-2);
        let pinned: Vec<usize> =
            (0..side).filter(|&k| eig.values[k].abs() <= pin_tol).collect();
        if pinned.is_empty() || pinned.len() == side {
            return Ok(());
        }
        let mut pin_rows: Vec<Row> = Vec::with_capacity(pinned.len() * (side - 1));
        for &k in &pinned {
            for a in 1..side {
                // row: sum_B v_k[B] x[A xor B] = 0
                let mut merged: std::collections::BTreeMap<u32, f64> =
                    std::collections::BTreeMap::new();
                for b in 0..side {
                    let v = eig.vectors[b * side + k];
                    if v.abs() >= 1e-14 {
                        *merged.entry(compiled.pair_idx[a * side + b]).or_insert(0.0) += v;
                    }
                }
                let mut cols = Vec::with_capacity(merged.len());
                let mut vals = Vec::with_capacity(merged.len());
                let mut scaled = Vec::with_capacity(merged.len());
                let mut wnorm = 0.0;
                for (c, v) in merged {
                    if v.abs() < 1e-14 {
                        continue;
                    }
                    let count = compiled.counts[c as usize];
                    cols.push(c);
                    vals.push(v);
                    scaled.push(v / count);
                    wnorm += v * v / count;
                }
                if wnorm > 1e-12 {
                    pin_rows.push(Row { cols, vals, scaled, wnorm, rhs: 0.0 });
                }
            }
        }

        let snapshot = x.to_vec();
        // Near-active inequalities join the stack as equalities: at a
        // boundary solution the tight rows hold with equality, and pinning
        // them keeps the repair passes from drifting off the face. The
        // safeguard below reverts the round if the guess was wrong.
        let act_band = (100.0 * params.feas_tol).max(3.0 * eig.min_value().abs());
        let active_rows: Vec<&Row> = compiled
            .base_ineq
            .iter()
            .chain(active.iter().map(|(_, r)| r))
            .filter(|r| r.residual(x).abs() <= act_band)
            .collect();
        let mut stacked: Vec<&Row> = compiled.eq_rows.iter().chain(pin_rows.iter()).collect();
        stacked.extend(active_rows);
        min_norm_correction(&stacked, x, 600);

        // Repair inequalities without drifting far off the pinned face.
        for _ in 0..60 {
            let mut worst = 0.0f64;
            for row in &compiled.base_ineq {
                worst = worst.max(row.project_ge(x, 1.0, slack));
            }
            for (_, row) in active {
                worst = worst.max(row.project_ge(x, 1.0, slack));
            }
            for row in &compiled.eq_rows {
                row.project_eq(x, 1.0, slack);
            }
            for row in &pin_rows {
                row.project_eq(x, 1.0, slack.min(0.25 * params.psd_tol));
            }
            if worst <= 0.2 * params.feas_tol {
                break;
            }
        }

        // Safeguard: keep the correction only if the overall violation
        // did not regress.
        let viol = |x: &[f64]| -> Result<f64> {
            let mut worst = (-eig_of(compiled, x)?.min_value()).max(0.0);
            for row in &compiled.eq_rows {
                worst = worst.max(row.residual(x).abs());
            }
            for row in compiled.base_ineq.iter().chain(active.iter().map(|(_, r)| r)) {
                worst = worst.max(-row.residual(x).max(f64::NEG_INFINITY).min(0.0));
            }
            Ok(worst)
        };
        let (va, vb) = (viol(x)?, viol(&snapshot)?);
        if std::env::var("SOS_DEBUG").is_ok() {
            eprintln!(
                "  polish round {_round}: pinned {}, stacked {}, viol {vb:.3e} -> {va:.3e}",
                pinned.len(),
                stacked.len()
            );
        }
        if va > vb {
            x.copy_from_slice(&snapshot);
            return Ok(());
        }
    }
    Ok(())
}

/// Result of the objective binary search.
#[derive(Debug, Clone)]
pub struct ObjSearchResult {
    /// Smallest objective bound found feasible (within `obj_tol`).
    pub obj_star: f64,
    /// The feasible pseudo-expectation at `obj_star`.
    pub pe: PseudoExpectation,
    /// Number of feasibility probes.
    pub iterations: usize,
    /// Final bracket `(largest infeasible, smallest feasible)`.
    pub bracket: (f64, f64),
    /// Probes that hit the iteration limit rather than a clear verdict.
    pub indeterminate_probes: usize,
}

/// Binary search for the smallest objective bound whose system is
/// feasible. Feasibility is monotone in the bound (it only relaxes an
/// upper-bound constraint), so this pins the relaxation value within
/// `obj_tol`. Indeterminate probes count as infeasible for bracketing.
pub fn binary_search_obj(
    builder: impl Fn(f64) -> ConstraintSystem,
    lo: f64,
    hi: f64,
    params: &SolveParams,
) -> Result<ObjSearchResult> {
    assert!(lo < hi, "bracket must satisfy lo < hi");
    let mut iterations = 0usize;
    let mut indeterminate = 0usize;

    let solve = |obj: f64, warm: Option<&[f64]>, iters: &mut usize| -> Result<SolveOutcome> {
        *iters += 1;
        solve_feasibility_warm(&builder(obj), params, warm)
    };

    let hi_out = solve(hi, None, &mut iterations)?;
    let mut best = match hi_out {
        SolveOutcome::Feasible(pe) => pe,
        _ => return Err(Error::BracketError { hi }),
    };
    let mut hi = hi;
    let mut lo = lo;

    match solve(lo, Some(best.moments()), &mut iterations)? {
        SolveOutcome::Feasible(pe) => {
            return Ok(ObjSearchResult {
                obj_star: lo,
                pe,
                iterations,
                bracket: (lo, lo),
                indeterminate_probes: indeterminate,
            });
        }
        SolveOutcome::Indeterminate { .. } => indeterminate += 1,
        SolveOutcome::Infeasible => {}
    }

    while hi - lo > params.obj_tol {
        let mid = 0.5 * (lo + hi);
        match solve(mid, Some(best.moments()), &mut iterations)? {
            SolveOutcome::Feasible(pe) => {
                best = pe;
                hi = mid;
            }
            SolveOutcome::Indeterminate { .. } => {
                indeterminate += 1;
                lo = mid;
            }
            SolveOutcome::Infeasible => lo = mid,
        }
    }

    Ok(ObjSearchResult {
        obj_star: hi,
        pe: best,
        iterations,
        bracket: (lo, hi),
        indeterminate_probes: indeterminate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery;
    use crate::instances::reduce_uncut_to_symdicut;
    use crate::subset::VarSet;

    fn solved(sys: &ConstraintSystem, d: usize) -> SolveOutcome {
        solve_feasibility(sys, &SolveParams::with_degree(d)).unwrap()
    }

    #[test]
    fn compute_degree_examples() {
        assert_eq!(compute_degree(8, 4.0, 8), 4);
        assert_eq!(compute_degree(8, 50.0, 8), 4);
        assert_eq!(compute_degree(8, 4.0, 2), 2);
        // r = 2 leaves the raw formula huge, so the cap rules.
        assert_eq!(compute_degree(8, 2.0, 4), 4);
    }

    #[test]
    fn vc_k2_feasible_at_one() {
        let g = battery::complete(2);
        let sys = build_vc_system(&g, 1.0);
        assert_eq!(sys.equalities().len(), 1);
        assert_eq!(sys.inequalities().len(), 1);
        match solved(&sys, 2) {
            SolveOutcome::Feasible(pe) => {
                assert!(pe.pair(1, 2) <= -1.0 + 1e-4, "E[X1X2] = {}", pe.pair(1, 2));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn vc_k2_infeasible_below_one() {
        let g = battery::complete(2);
        for obj in [0.9, 0.5] {
            let sys = build_vc_system(&g, obj);
            match solved(&sys, 2) {
                SolveOutcome::Feasible(pe) => {
                    panic!("obj {obj} must be infeasible, got moments {:?}", pe.moments())
                }
                _ => {}
            }
        }
    }

    #[test]
    fn empty_system_feasible() {
        let sys = ConstraintSystem::new(3, "empty");
        match solved(&sys, 2) {
            SolveOutcome::Feasible(pe) => pe.validate(1e-6).unwrap(),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn vc_binary_search_k2_and_k3() {
        let params = SolveParams::with_degree(2);
        let g = battery::complete(2);
        let res = binary_search_obj(|obj| build_vc_system(&g, obj), 0.0, 2.0, &params).unwrap();
        assert!((res.obj_star - 1.0).abs() <= 2.0 * params.obj_tol, "obj* = {}", res.obj_star);

        let g3 = battery::complete(3);
        let res = binary_search_obj(|obj| build_vc_system(&g3, obj), 0.0, 3.0, &params).unwrap();
        assert!(res.obj_star <= 2.0 + params.obj_tol, "obj* = {}", res.obj_star);
    }

    #[test]
    fn vc_binary_search_edgeless() {
        let params = SolveParams::with_degree(2);
        let g = crate::instances::UndirectedGraph::new(3, []).unwrap();
        let res = binary_search_obj(|obj| build_vc_system(&g, obj), 0.0, 3.0, &params).unwrap();
        assert!(res.obj_star.abs() <= params.obj_tol, "obj* = {}", res.obj_star);
    }

    #[test]
    fn bs_k2_objective_slack_and_negative() {
        let g = battery::complete(2);
        assert!(matches!(solved(&build_bs_system(&g, 10.0), 2), SolveOutcome::Feasible(_)));
        assert!(solved(&build_bs_system(&g, -0.1), 2).feasible().is_none());
    }

    #[test]
    fn bs_two_k4s_feasible_at_opt() {
        let g = battery::two_k4s_bridge();
        match solved(&build_bs_system(&g, 1.0), 2) {
            SolveOutcome::Feasible(pe) => pe.validate(1e-5).unwrap(),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn usc_systems() {
        let k2 = battery::complete(2);
        assert!(matches!(
            solved(&build_usc_system(&k2, 4.0, 1).unwrap(), 2),
            SolveOutcome::Feasible(_)
        ));
        assert!(build_usc_system(&k2, 4.0, 2).is_err());

        let c6 = battery::cycle(6);
        assert!(matches!(
            solved(&build_usc_system(&c6, 8.0 / 3.0, 3).unwrap(), 2),
            SolveOutcome::Feasible(_)
        ));
    }

    #[test]
    fn sdc_systems() {
        let k2 = battery::complete(2);
        let d = reduce_uncut_to_symdicut(&k2);
        assert!(matches!(solved(&build_sdc_system(&d, 2.0), 2), SolveOutcome::Feasible(_)));

        let empty = crate::instances::SymmetricDigraph::new(2, vec![]).unwrap();
        assert!(matches!(solved(&build_sdc_system(&empty, 0.0), 2), SolveOutcome::Feasible(_)));

        // Satisfiable clause (x1 | x2): zero deletions, so obj = 0 is feasible.
        let f = crate::instances::TwoCnfFormula::new(2, vec![((1, 1), (2, 1))]).unwrap();
        let dg = crate::instances::reduce_2cnf_to_symdicut(&f);
        assert!(matches!(solved(&build_sdc_system(&dg, 0.0), 2), SolveOutcome::Feasible(_)));
    }

    #[test]
    fn sdc_objective_counts_arcs_at_integral_points() {
        let g = battery::complete(3);
        let d = reduce_uncut_to_symdicut(&g);
        let sys = build_sdc_system(&d, 0.0);
        // The (negated) objective at obj = 0 evaluates to -(arcs cut).
        let obj_poly = sys.inequalities().last().unwrap();
        for mask in 0..8u32 {
            let signs = crate::oracle::mask_signs(mask, 3);
            let side = crate::instances::true_literal_side(&signs);
            let cut = crate::instances::arcs_cut(&d, &side) as f64;
            assert!((obj_poly.eval_at(&signs) + cut).abs() < 1e-9);
        }
    }

    #[test]
    fn integral_optima_satisfy_every_system() {
        // Soundness prerequisite: the optimal integral point passes the
        // full constraint set of each builder at its optimum.
        let g = battery::cycle(4);
        let (vc_opt, cover) = crate::oracle::exact_vc(&g).unwrap();
        let mut signs = vec![-1i8; 4];
        for v in cover {
            signs[v - 1] = 1;
        }
        assert!(build_vc_system(&g, vc_opt as f64).holds_at(&signs, 1e-9));

        let (bs_opt, witness) = crate::oracle::exact_bs(&g, 1.0 / 3.0).unwrap();
        assert!(build_bs_system(&g, bs_opt as f64).holds_at(&witness, 1e-9));

        // The raw USC objective is in 4x-expansion units: an integral cut of
        // expansion phi needs obj * t >= 4 * cut = 4 * phi * t.
        let (usc, usc_witness, _) = crate::oracle::exact_usc(&g).unwrap();
        let t = usc_witness.len().min(4 - usc_witness.len());
        let mut s = vec![-1i8; 4];
        for v in &usc_witness {
            s[v - 1] = 1;
        }
        assert!(build_usc_system(&g, 4.0 * usc.value(), t).unwrap().holds_at(&s, 1e-9));

        let dg = reduce_uncut_to_symdicut(&g);
        let (sdc_opt, sdc_witness) = crate::oracle::exact_sdc(&dg).unwrap();
        assert!(build_sdc_system(&dg, sdc_opt as f64).holds_at(&sdc_witness, 1e-9));
    }

    #[test]
    fn degree_four_vc_search() {
        let params = SolveParams::with_degree(4);
        let g = battery::complete(3);
        let res = binary_search_obj(|obj| build_vc_system(&g, obj), 0.0, 3.0, &params).unwrap();
        assert!(res.obj_star <= 2.0 + params.obj_tol, "obj* = {}", res.obj_star);
        assert!(res.obj_star >= 1.5, "degree 4 should not undershoot LP bound: {}", res.obj_star);
        // Returned solution passes the independent checks.
        let sys = build_vc_system(&g, res.obj_star);
        let rep = satisfies(&res.pe, &sys, params.feas_tol);
        assert!(rep.passes(10.0 * params.feas_tol), "worst residual {}", rep.worst());
    }

    #[test]
    fn returned_pe_moment_bounds() {
        let g = battery::two_k4s_bridge();
        let params = SolveParams::with_degree(2);
        let res = binary_search_obj(|obj| build_vc_system(&g, obj), 0.0, 8.0, &params).unwrap();
        for &m in res.pe.moments() {
            assert!(m.abs() <= 1.0 + 1e-5);
        }
        assert_eq!(res.pe.moment(VarSet::EMPTY), 1.0);
    }
}
