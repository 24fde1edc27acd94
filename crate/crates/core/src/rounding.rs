//! The four rounding pipelines. Each prepares by solving the relaxation
//! (binary search over the objective bound) and conditioning the solution
//! hollow, then rounds with problem-specific separated-set machinery.
//! Solutions are always checked by independent validators that recount
//! the objective from scratch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arv::{
    separated_sets, separated_sets_antipodal, separated_sets_directed, ArvParams,
};
use crate::conditioning::{hollowize, ConditioningTrace, HollowParams};
use crate::error::{Error, Result};
use crate::instances::{
    arcs_cut, reduce_2cnf_to_symdicut, reduce_uncut_to_symdicut, SignedVertex, SymmetricDigraph,
    TwoCnfFormula, UndirectedGraph,
};
use crate::metrics::{DirectedMetricView, MetricView};
use crate::oracle::{self, Expansion};
use crate::pseudoexp::PseudoExpectation;
use crate::report::{ArvOutcome, PipelineReport, ReportParams, SolutionData, SCHEMA_VERSION};
use crate::sossolver::{
    binary_search_obj, build_bs_system, build_sdc_system, build_usc_system, build_vc_system,
    compute_degree, ObjSearchResult, SolveParams,
};

/// How the threshold of threshold-rounding steps is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaMode {
    /// Enumerate all breakpoints and take the best outcome.
    Enumerate,
    /// Draw one threshold uniformly at random (seeded).
    Sample,
}

impl ThetaMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaMode::Enumerate => "enumerate",
            ThetaMode::Sample => "sample",
        }
    }
}

/// Pipeline configuration shared by all four problems.
#[derive(Debug, Clone)]
pub struct PipelineParams {
    pub r: f64,
    pub degree_cap: usize,
    pub seed: u64,
    pub feas_tol: f64,
    pub psd_tol: f64,
    pub obj_tol: f64,
    /// The constant C in the cover threshold `tau_r = 1 / (10 C r)`.
    pub vc_c: f64,
    pub min_frac: f64,
    pub c_delta: f64,
    pub c_shrink: f64,
    pub max_retries: usize,
    pub theta_mode: ThetaMode,
    pub with_oracle: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            r: 2.0,
            degree_cap: 4,
            seed: 0,
            feas_tol: 1e-6,
            psd_tol: 1e-6,
            obj_tol: 1e-4,
            vc_c: 4.0,
            min_frac: 0.1,
            c_delta: 0.5,
            c_shrink: 0.05,
            max_retries: 64,
            theta_mode: ThetaMode::Enumerate,
            with_oracle: false,
        }
    }
}

impl PipelineParams {
    pub fn degree(&self, n: usize) -> usize {
        compute_degree(n, self.r, self.degree_cap)
    }

    pub fn solve_params(&self, n: usize) -> SolveParams {
        SolveParams {
            d: self.degree(n),
            feas_tol: self.feas_tol,
            psd_tol: self.psd_tol,
            obj_tol: self.obj_tol,
            max_iters: 60_000,
            seed: self.seed,
        }
    }

    fn arv(&self, hollowness_m: usize, seed: u64) -> ArvParams {
        let mut p = ArvParams::for_hollowness(hollowness_m, seed);
        p.c_delta = self.c_delta;
        p.delta_target = self.c_delta / ((hollowness_m.max(1) as f64).log2() + 2.0).sqrt();
        p.min_frac = self.min_frac;
        p.max_retries = self.max_retries;
        p.c_shrink = self.c_shrink;
        p
    }

    fn report_params(&self, d: usize) -> ReportParams {
        ReportParams {
            r: self.r,
            d,
            tol_feas: self.feas_tol,
            tol_psd: self.psd_tol,
            tol_obj: self.obj_tol,
            theta_mode: self.theta_mode.as_str().to_string(),
        }
    }
}

/// Runs the relaxation search and the hollowing stage. `ell = d - 2`;
/// at degree 2 there is no conditioning budget and the stage is skipped.
fn search_and_hollow(
    builder: impl Fn(f64) -> crate::pseudoexp::ConstraintSystem,
    lo: f64,
    hi: f64,
    solve: &SolveParams,
    tau: f64,
    gamma: f64,
) -> Result<(ObjSearchResult, PseudoExpectation, ConditioningTrace)> {
    let search = binary_search_obj(builder, lo, hi, solve)?;
    let ell = solve.d.saturating_sub(2);
    if ell >= 1 {
        let hp = HollowParams::new(tau, gamma, ell)?;
        let (hollow, trace) = hollowize(&search.pe, &hp)?;
        Ok((search, hollow, trace))
    } else {
        let pe = search.pe.clone();
        Ok((search, pe, ConditioningTrace::default()))
    }
}

// ---------------------------------------------------------------------------
// Vertex Cover
// ---------------------------------------------------------------------------

/// Prepared Vertex Cover run: relaxation solved, solution hollowed.
pub struct VcPrepared {
    graph: UndirectedGraph,
    params: PipelineParams,
    d: usize,
    obj_star: f64,
    hollow: PseudoExpectation,
    trace: ConditioningTrace,
}

pub fn prepare_vc(g: &UndirectedGraph, params: &PipelineParams) -> Result<VcPrepared> {
    let solve = params.solve_params(g.n());
    let (search, hollow, trace) = search_and_hollow(
        |obj| build_vc_system(g, obj),
        0.0,
        g.n() as f64,
        &solve,
        0.1,
        0.1,
    )?;
    Ok(VcPrepared {
        graph: g.clone(),
        params: params.clone(),
        d: solve.d,
        obj_star: search.obj_star,
        hollow,
        trace,
    })
}

impl VcPrepared {
    pub fn obj_star(&self) -> f64 {
        self.obj_star
    }

    pub fn hollow(&self) -> &PseudoExpectation {
        &self.hollow
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        let g = &self.graph;
        let n = g.n();
        let pe = &self.hollow;
        let mut flags = Vec::new();
        let mut arv_outcomes = Vec::new();

        let tau_r = 1.0 / (10.0 * self.params.vc_c * self.params.r);
        let mut high = Vec::new();
        let mut low = Vec::new();
        let mut mid = Vec::new();
        for i in 1..=n {
            let m = pe.singleton(i);
            if m >= tau_r {
                high.push(i);
            } else if m <= -tau_r {
                low.push(i);
            } else {
                mid.push(i);
            }
        }

        // Independent set inside the undetermined band via the antipodal
        // separated sets; either side that validates works, larger wins.
        let mut independent: Vec<usize> = Vec::new();
        if mid.len() >= 2 {
            let gamma = 0.1;
            let m_hollow = mid
                .iter()
                .map(|&i| mid.iter().filter(|&&j| pe.pair(i, j).abs() > gamma).count())
                .max()
                .unwrap_or(1);
            let arv = self.params.arv(m_hollow, seed);
            match separated_sets_antipodal(pe, &mid, &arv) {
                Ok(sets) => {
                    let is_independent = |s: &[usize]| -> bool {
                        s.iter().all(|&a| s.iter().all(|&b| a == b || !g.has_edge(a, b)))
                    };
                    let mut cands: Vec<&Vec<usize>> = vec![&sets.t, &sets.t_prime];
                    cands.sort_by_key(|s| std::cmp::Reverse(s.len()));
                    for cand in cands {
                        if is_independent(cand) {
                            independent = cand.clone();
                            break;
                        }
                    }
                    arv_outcomes.push(ArvOutcome {
                        stage: "vc_antipodal".into(),
                        delta: sets.achieved_delta,
                        sizes: (sets.t.len(), sets.t_prime.len()),
                        retries: sets.retries_used,
                        fallback: false,
                    });
                    if independent.is_empty() {
                        flags.push("vc_no_independent_side".into());
                    }
                }
                Err(_) => {
                    flags.push("vc_arv_fallback".into());
                }
            }
        }

        let mut cover: Vec<usize> = high.clone();
        cover.extend(mid.iter().filter(|i| !independent.contains(i)));
        cover.sort_unstable();

        // Tolerance guard: any edge left uncovered gets its stronger
        // endpoint added.
        let mut repaired = false;
        loop {
            let uncovered = g
                .edges()
                .iter()
                .find(|&&(a, b)| !cover.contains(&a) && !cover.contains(&b))
                .copied();
            let Some((a, b)) = uncovered else { break };
            let pick = if pe.singleton(a) >= pe.singleton(b) { a } else { b };
            cover.push(pick);
            cover.sort_unstable();
            repaired = true;
        }
        if repaired {
            flags.push("vc_repair".into());
        }

        assert!(validate_vertex_cover(g, &cover), "emitted cover must cover every edge");
        let objective = cover.len() as f64;
        let oracle_opt = if self.params.with_oracle {
            Some(oracle::exact_vc(g)?.0 as f64)
        } else {
            None
        };
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        Ok(PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "vc".into(),
            n,
            params: self.params.report_params(self.d),
            obj_star: self.obj_star,
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::Cover { vertices: cover },
            trace: self.trace.steps.clone(),
            arv: arv_outcomes,
            flags,
            seed,
        ms: None,
        })
    }
}

/// Every edge has an endpoint in the cover.
pub fn validate_vertex_cover(g: &UndirectedGraph, cover: &[usize]) -> bool {
    g.edges().iter().all(|&(a, b)| cover.contains(&a) || cover.contains(&b))
}

pub fn vc_pipeline(g: &UndirectedGraph, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_vc(g, params)?.round(params.seed)
}

// ---------------------------------------------------------------------------
// Balanced Separator
// ---------------------------------------------------------------------------

pub struct BsPrepared {
    graph: UndirectedGraph,
    params: PipelineParams,
    d: usize,
    obj_star: f64,
    hollow: PseudoExpectation,
    trace: ConditioningTrace,
}

/// Internals of one threshold-rounding pass, kept for the cut-probability
/// checks: the separated sets, their distance, and the per-vertex
/// distances to `t`.
pub struct BsRoundDetail {
    pub t: Vec<usize>,
    pub t_prime: Vec<usize>,
    pub separation: f64,
    pub dist_to_t: Vec<f64>,
    pub fallback: bool,
}

pub fn prepare_bs(g: &UndirectedGraph, params: &PipelineParams) -> Result<BsPrepared> {
    if g.n() < 3 {
        return Err(Error::InvalidInstance(format!(
            "balanced separator needs n >= 3, got {}",
            g.n()
        )));
    }
    let solve = params.solve_params(g.n());
    let hi = (g.num_edges() as f64).max(1.0);
    let (search, hollow, trace) =
        search_and_hollow(|obj| build_bs_system(g, obj), 0.0, hi, &solve, 0.9, 0.9)?;
    Ok(BsPrepared {
        graph: g.clone(),
        params: params.clone(),
        d: solve.d,
        obj_star: search.obj_star,
        hollow,
        trace,
    })
}

impl BsPrepared {
    pub fn obj_star(&self) -> f64 {
        self.obj_star
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        Ok(self.round_detailed(seed)?.0)
    }

    pub fn round_detailed(&self, seed: u64) -> Result<(PipelineReport, BsRoundDetail)> {
        let g = &self.graph;
        let n = g.n();
        let pe = &self.hollow;
        let view = MetricView::new(pe);
        let mut flags = Vec::new();
        let mut arv_outcomes = Vec::new();

        let tau = 0.9;
        let high: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) >= tau).collect();
        let low: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) <= -tau).collect();
        let threshold = 0.1 * n as f64;

        let (t, t_prime, fallback) = if high.len() as f64 >= threshold {
            let far: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) <= 0.8).collect();
            (high.clone(), far, false)
        } else if low.len() as f64 >= threshold {
            let far: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) >= -0.8).collect();
            (low.clone(), far, false)
        } else {
            let mid: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i).abs() < tau).collect();
            let gamma = 0.9;
            let m_hollow = mid
                .iter()
                .map(|&i| mid.iter().filter(|&&j| pe.pair(i, j) > gamma).count())
                .max()
                .unwrap_or(1);
            let arv = self.params.arv(m_hollow, seed);
            match separated_sets(&view, &mid, &arv) {
                Ok(sets) => {
                    arv_outcomes.push(ArvOutcome {
                        stage: "bs_plain".into(),
                        delta: sets.achieved_delta,
                        sizes: (sets.t.len(), sets.t_prime.len()),
                        retries: sets.retries_used,
                        fallback: false,
                    });
                    (sets.t, sets.t_prime, false)
                }
                Err(_) => {
                    // threshold split at the median expectation
                    flags.push("bs_median_fallback".into());
                    let mut order: Vec<usize> = (1..=n).collect();
                    order.sort_by(|&a, &b| {
                        pe.singleton(a)
                            .partial_cmp(&pe.singleton(b))
                            .unwrap()
                            .then(a.cmp(&b))
                    });
                    let half = n / 2;
                    (order[..half].to_vec(), order[half..].to_vec(), true)
                }
            }
        };

        let (side, separation, dist_to_t) = if fallback {
            let side: Vec<bool> = (1..=n).map(|i| t.contains(&i)).collect();
            (side, 0.0, vec![0.0; n])
        } else {
            let separation = view.set_dist(&t, &t_prime).max(f64::MIN_POSITIVE);
            let dist_to_t: Vec<f64> = (1..=n).map(|i| view.dist_to_set(i, &t)).collect();
            let side =
                self.threshold_round(g, &t, &t_prime, separation, &dist_to_t, seed, &mut flags);
            (side, separation, dist_to_t)
        };

        let (cut, side_a, side_b) = bs_cut_and_sides(g, &side);
        assert!(side_a > 0 && side_b > 0, "both sides must be nonempty");
        if !fallback {
            assert!(t.iter().all(|&i| side[i - 1]), "T stays inside S");
            assert!(t_prime.iter().all(|&i| !side[i - 1]), "T' stays outside S");
        }

        let objective = cut as f64;
        let oracle_opt = if self.params.with_oracle {
            Some(oracle::exact_bs(g, 1.0 / 3.0)?.0 as f64)
        } else {
            None
        };
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        let solution: Vec<usize> = (1..=n).filter(|&i| side[i - 1]).collect();
        let report = PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "bs".into(),
            n,
            params: self.params.report_params(self.d),
            obj_star: self.obj_star,
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::Partition { side: solution },
            trace: self.trace.steps.clone(),
            arv: arv_outcomes,
            flags,
            seed,
            ms: None,
        };
        let detail = BsRoundDetail { t, t_prime, separation, dist_to_t, fallback };
        Ok((report, detail))
    }

    /// Threshold rounding `S = T u {i : d(i, T) < theta}`. In enumerate
    /// mode every breakpoint is evaluated and the best valid outcome kept:
    /// prefer both sides at least 2, then fewest cut edges, then the
    /// smallest threshold.
    fn threshold_round(
        &self,
        g: &UndirectedGraph,
        t: &[usize],
        _t_prime: &[usize],
        separation: f64,
        dist_to_t: &[f64],
        seed: u64,
        _flags: &mut Vec<String>,
    ) -> Vec<bool> {
        let n = g.n();
        let side_for = |theta: f64| -> Vec<bool> {
            (1..=n).map(|i| t.contains(&i) || dist_to_t[i - 1] < theta).collect()
        };
        match self.params.theta_mode {
            ThetaMode::Sample => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b5);
                let theta = rng.gen_range(0.0..separation);
                side_for(theta)
            }
            ThetaMode::Enumerate => {
                let mut values: Vec<f64> = dist_to_t
                    .iter()
                    .copied()
                    .filter(|&v| v < separation)
                    .chain(std::iter::once(0.0))
                    .collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                values.dedup();
                let min_side_target = 2.min(n / 2);
                let mut best: Option<(bool, usize, usize, Vec<bool>)> = None;
                for (k, &v) in values.iter().enumerate() {
                    // theta just above this breakpoint
                    let next = values.get(k + 1).copied().unwrap_or(separation);
                    let theta = 0.5 * (v + next.min(separation));
                    let side = side_for(theta);
                    let (cut, a, b) = bs_cut_and_sides(g, &side);
                    let balanced = a.min(b) >= min_side_target;
                    let key = (balanced, cut, k);
                    let better = match &best {
                        None => true,
                        Some((bb, bc, bk, _)) => {
                            (key.0, std::cmp::Reverse(key.1), std::cmp::Reverse(key.2))
                                > (*bb, std::cmp::Reverse(*bc), std::cmp::Reverse(*bk))
                        }
                    };
                    if better {
                        best = Some((balanced, cut, k, side));
                    }
                }
                best.expect("at least one breakpoint").3
            }
        }
    }
}

/// Cut edges and side sizes of a bipartition given as a membership mask.
pub fn bs_cut_and_sides(g: &UndirectedGraph, side: &[bool]) -> (usize, usize, usize) {
    let cut = g.edges().iter().filter(|&&(a, b)| side[a - 1] != side[b - 1]).count();
    let a = side.iter().filter(|&&s| s).count();
    (cut, a, g.n() - a)
}

pub fn bs_pipeline(g: &UndirectedGraph, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_bs(g, params)?.round(params.seed)
}

// ---------------------------------------------------------------------------
// Uniform Sparsest Cut
// ---------------------------------------------------------------------------

enum UscStage {
    /// Exhaustive minimum over subsets of this size.
    Enumerated { t: usize, best: Expansion, witness: Vec<usize> },
    /// Relaxation solved at this size; rounding happens per seed.
    Solved {
        t: usize,
        kappa: f64,
        raw_obj_star: f64,
        hollow: PseudoExpectation,
        trace: ConditioningTrace,
    },
}

pub struct UscPrepared {
    graph: UndirectedGraph,
    params: PipelineParams,
    d: usize,
    stages: Vec<UscStage>,
}

pub fn prepare_usc(g: &UndirectedGraph, params: &PipelineParams) -> Result<UscPrepared> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidInstance("sparsest cut needs n >= 2".into()));
    }
    let solve = params.solve_params(n);
    let enumerate_from = n as f64 / 2f64.powf(params.r * params.r / 100.0);
    let mut stages = Vec::new();
    for t in 1..=(n / 2) {
        if t as f64 >= enumerate_from {
            let (best, witness) = exact_size_t_cut(g, t);
            stages.push(UscStage::Enumerated { t, best, witness });
            continue;
        }
        let kappa = t as f64 / n as f64;
        let tau = 1.0 - kappa / 10.0;
        let gamma = 1.0 - kappa / 30.0;
        let hi = (4.0 * g.num_edges() as f64).max(1.0);
        let (search, hollow, trace) = search_and_hollow(
            |obj| build_usc_system(g, obj, t).expect("t is in range"),
            0.0,
            hi,
            &solve,
            tau,
            gamma,
        )?;
        stages.push(UscStage::Solved { t, kappa, raw_obj_star: search.obj_star, hollow, trace });
    }
    Ok(UscPrepared { graph: g.clone(), params: params.clone(), d: solve.d, stages })
}

/// Exhaustive minimum cut over subsets of exactly size `t`.
fn exact_size_t_cut(g: &UndirectedGraph, t: usize) -> (Expansion, Vec<usize>) {
    let n = g.n();
    let mut best: Option<(usize, u32)> = None;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize != t {
            continue;
        }
        let cut = g
            .edges()
            .iter()
            .filter(|&&(a, b)| (mask >> (a - 1)) & 1 != (mask >> (b - 1)) & 1)
            .count();
        if best.map_or(true, |(c, _)| cut < c) {
            best = Some((cut, mask));
        }
    }
    let (cut, mask) = best.expect("t >= 1 and t <= n/2");
    let witness: Vec<usize> = (1..=n).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
    (Expansion { cut, denom: t }, witness)
}

impl UscPrepared {
    /// Relaxation lower bound in expansion units: per size, the raw bound
    /// over 4 (the raw objective upper-bounds four times the expected cut),
    /// or the exact value on enumerated sizes; minimized over sizes.
    pub fn obj_star(&self) -> f64 {
        self.stages
            .iter()
            .map(|s| match s {
                UscStage::Enumerated { best, .. } => best.value(),
                UscStage::Solved { raw_obj_star, .. } => raw_obj_star / 4.0,
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        let g = &self.graph;
        let n = g.n();
        let mut best: Option<(Expansion, Vec<usize>, usize)> = None; // + stage idx
        let mut all_flags = Vec::new();
        let mut arv_outcomes = Vec::new();

        for (si, stage) in self.stages.iter().enumerate() {
            let (candidate, witness) = match stage {
                UscStage::Enumerated { best, witness, .. } => (*best, witness.clone()),
                UscStage::Solved { t, kappa, hollow, .. } => {
                    let (exp, cut_set, outcome, flags) =
                        self.round_stage(g, *t, *kappa, hollow, seed)?;
                    if let Some(o) = outcome {
                        arv_outcomes.push(o);
                    }
                    all_flags.extend(flags);
                    (exp, cut_set)
                }
            };
            let better = match &best {
                None => true,
                Some((b, _, _)) => candidate.less_than(*b),
            };
            if better {
                best = Some((candidate, witness, si));
            }
        }

        let (expansion, witness, _) = best.expect("n >= 2 yields at least one stage");
        // validator: recompute the expansion from scratch
        let recount = usc_expansion(g, &witness);
        assert_eq!(recount, expansion, "sweep bookkeeping must match exact recount");
        assert!(!witness.is_empty() && witness.len() < n, "proper nonempty subset");

        let oracle_opt = if self.params.with_oracle {
            Some(oracle::exact_usc(g)?.0.value())
        } else {
            None
        };
        let objective = expansion.value();
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        let trace = self
            .stages
            .iter()
            .find_map(|s| match s {
                UscStage::Solved { trace, .. } => Some(trace.steps.clone()),
                _ => None,
            })
            .unwrap_or_default();
        Ok(PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "usc".into(),
            n,
            params: self.params.report_params(self.d),
            obj_star: self.obj_star(),
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::Subset { vertices: witness },
            trace,
            arv: arv_outcomes,
            flags: all_flags,
            seed,
            ms: None,
        })
    }

    /// Step III for one solved size: find the sweep seed set and take the
    /// best prefix of the distance ordering.
    fn round_stage(
        &self,
        g: &UndirectedGraph,
        _t: usize,
        kappa: f64,
        pe: &PseudoExpectation,
        seed: u64,
    ) -> Result<(Expansion, Vec<usize>, Option<ArvOutcome>, Vec<String>)> {
        let n = g.n();
        let view = MetricView::new(pe);
        let tau = 1.0 - kappa / 10.0;
        let gamma = 1.0 - kappa / 30.0;
        let mut flags = Vec::new();
        let mut outcome = None;

        let high: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) >= tau).collect();
        let low: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i) <= -tau).collect();
        let mid: Vec<usize> = (1..=n).filter(|&i| pe.singleton(i).abs() < tau).collect();
        let threshold = 0.1 * n as f64;

        let t_set: Vec<usize> = if high.len() as f64 >= threshold {
            high
        } else if low.len() as f64 >= threshold {
            low
        } else {
            // find a crowded center in the undetermined band
            let center = mid
                .iter()
                .map(|&i| (view.ball(&mid, i, 100.0 * kappa).len(), i))
                .filter(|&(count, _)| count as f64 > 0.7 * n as f64)
                .max_by_key(|&(count, i)| (count, std::cmp::Reverse(i)))
                .map(|(_, i)| i);
            match center {
                None => {
                    flags.push("usc_no_center".into());
                    vec![sweep_fallback_seed(pe, n)]
                }
                Some(istar) => {
                    let u = view.ball(&mid, istar, 100.0 * kappa);
                    let m_hollow = u
                        .iter()
                        .map(|&i| u.iter().filter(|&&j| pe.pair(i, j) > gamma).count())
                        .max()
                        .unwrap_or(1);
                    let arv = self.params.arv(m_hollow, seed).scaled(kappa);
                    match separated_sets(&view, &u, &arv) {
                        Ok(sets) => {
                            outcome = Some(ArvOutcome {
                                stage: "usc_plain".into(),
                                delta: sets.achieved_delta,
                                sizes: (sets.t.len(), sets.t_prime.len()),
                                retries: sets.retries_used,
                                fallback: false,
                            });
                            sets.t
                        }
                        Err(_) => {
                            flags.push("usc_arv_fallback".into());
                            vec![sweep_fallback_seed(pe, n)]
                        }
                    }
                }
            }
        };

        // the distance sweep: order by distance to the seed set, take the
        // best prefix by exact expansion
        let mut order: Vec<usize> = (1..=n).collect();
        order.sort_by(|&a, &b| {
            view.dist_to_set(a, &t_set)
                .partial_cmp(&view.dist_to_set(b, &t_set))
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut best: Option<(Expansion, usize)> = None;
        for len in 1..n {
            let prefix = &order[..len];
            let exp = usc_expansion(g, prefix);
            if best.map_or(true, |(b, _)| exp.less_than(b)) {
                best = Some((exp, len));
            }
        }
        let (exp, len) = best.expect("n >= 2");
        Ok((exp, order[..len].to_vec(), outcome, flags))
    }
}

fn sweep_fallback_seed(pe: &PseudoExpectation, n: usize) -> usize {
    (1..=n)
        .min_by(|&a, &b| {
            pe.singleton(a).partial_cmp(&pe.singleton(b)).unwrap().then(a.cmp(&b))
        })
        .expect("n >= 1")
}

/// Exact edge expansion of a subset.
pub fn usc_expansion(g: &UndirectedGraph, subset: &[usize]) -> Expansion {
    let inside = |v: usize| subset.contains(&v);
    let cut = g.edges().iter().filter(|&&(a, b)| inside(a) != inside(b)).count();
    Expansion { cut, denom: subset.len().min(g.n() - subset.len()) }
}

pub fn usc_pipeline(g: &UndirectedGraph, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_usc(g, params)?.round(params.seed)
}

// ---------------------------------------------------------------------------
// Min Symmetric DiCut (plus the UnCut and 2CNF Deletion wrappers)
// ---------------------------------------------------------------------------

pub struct SdcPrepared {
    digraph: SymmetricDigraph,
    params: PipelineParams,
    d: usize,
    obj_star: f64,
    hollow: PseudoExpectation,
    trace: ConditioningTrace,
}

pub fn prepare_sdc(g: &SymmetricDigraph, params: &PipelineParams) -> Result<SdcPrepared> {
    let n = g.n();
    let solve = params.solve_params(n);
    let hi = (g.num_arcs() as f64).max(1.0);
    let (search, hollow, trace) =
        search_and_hollow(|obj| build_sdc_system(g, obj), 0.0, hi, &solve, 0.1, 0.1)?;
    Ok(SdcPrepared {
        digraph: g.clone(),
        params: params.clone(),
        d: solve.d,
        obj_star: search.obj_star,
        hollow,
        trace,
    })
}

impl SdcPrepared {
    pub fn obj_star(&self) -> f64 {
        self.obj_star
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        let g = &self.digraph;
        let n = g.n();
        let pe = &self.hollow;
        let clamp_tol = 10.0 * self.params.feas_tol;
        let view = DirectedMetricView::new(pe, clamp_tol);
        if view.clamped_fraction() > 0.01 {
            return Err(Error::InvalidInstance(format!(
                "{:.1}% of directed distances were negative beyond tolerance",
                100.0 * view.clamped_fraction()
            )));
        }
        let mut flags = Vec::new();
        let mut arv_outcomes = Vec::new();

        let mut side: Vec<SignedVertex> = Vec::new();
        let mut remaining: Vec<SignedVertex> = g.vertices().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1_c0de);

        // round 0: the already-determined band
        let s0: Vec<SignedVertex> = (1..=n as i32)
            .filter_map(|i| {
                let m = pe.singleton(i as usize);
                if m >= 0.1 {
                    Some(i)
                } else if m <= -0.1 {
                    Some(-i)
                } else {
                    None
                }
            })
            .collect();
        if !s0.is_empty() {
            let sep = view.set_dist(&s0, &s0.iter().map(|&v| -v).collect::<Vec<_>>());
            let taken = self.take_threshold_slab(g, &view, &remaining, &s0, sep, &mut rng);
            side.extend(&taken);
            remove_pairs(&mut remaining, &taken);
        }

        // iterate directed separated sets on the remaining volume
        let gamma = 0.1;
        let mut shrink_halved = false;
        let mut level = 1u64;
        while !remaining.is_empty() {
            if view.volume(g, &remaining) <= 1e-9 {
                break;
            }
            let m_hollow = (1..=n)
                .map(|i| (1..=n).filter(|&j| pe.pair(i, j).abs() > gamma).count())
                .max()
                .unwrap_or(1);
            let mut arv = self.params.arv(m_hollow, seed.wrapping_add(level));
            if shrink_halved {
                arv.c_shrink *= 0.5;
            }
            match separated_sets_directed(&view, g, &remaining, &arv) {
                Ok(sep) => {
                    arv_outcomes.push(ArvOutcome {
                        stage: format!("sdc_directed_{level}"),
                        delta: sep.achieved_delta,
                        sizes: (sep.side.len(), sep.side.len()),
                        retries: sep.retries_used,
                        fallback: false,
                    });
                    let taken = self.take_threshold_slab(
                        g,
                        &view,
                        &remaining,
                        &sep.side,
                        sep.achieved_delta,
                        &mut rng,
                    );
                    side.extend(&taken);
                    remove_pairs(&mut remaining, &taken);
                }
                Err(_) if !shrink_halved => {
                    shrink_halved = true;
                    flags.push("sdc_shrink_halved".into());
                }
                Err(_) => {
                    flags.push("sdc_sign_fallback".into());
                    break;
                }
            }
            level += 1;
            if level as usize > 4 * n + 4 {
                flags.push("sdc_level_cap".into());
                break;
            }
        }

        // remainder: assign by sign preference while honoring zero-length
        // arcs (cutting one would cost nothing in the relaxation but
        // something in the integral solution)
        let assigned = assign_remainder(g, &view, pe, &side, &remaining);
        side.extend(assigned);

        // local improvement: flip pairs while it strictly lowers the cut
        local_improve(g, &mut side);

        side.sort_unstable();
        assert!(validate_symmetric_cut(g, &side), "emitted side must split every pair");
        let objective = arcs_cut(g, &side) as f64;
        let oracle_opt = if self.params.with_oracle {
            Some(oracle::exact_sdc(g)?.0 as f64)
        } else {
            None
        };
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        Ok(PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "sdc".into(),
            n,
            params: self.params.report_params(self.d),
            obj_star: self.obj_star,
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::SignedCut { side },
            trace: self.trace.steps.clone(),
            arv: arv_outcomes,
            flags,
            seed,
            ms: None,
        })
    }

    /// Collect `{x : d(seed_set, x) <= theta}` within the remaining set,
    /// with theta in `[0, separation / 2)` chosen per the theta mode.
    fn take_threshold_slab(
        &self,
        g: &SymmetricDigraph,
        view: &DirectedMetricView<'_>,
        remaining: &[SignedVertex],
        seed_set: &[SignedVertex],
        separation: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<SignedVertex> {
        let half = (separation / 2.0).max(0.0);
        let dist: Vec<f64> =
            remaining.iter().map(|&x| view.dist_from_set(seed_set, x)).collect();
        let members = |theta: f64| -> Vec<SignedVertex> {
            remaining
                .iter()
                .zip(&dist)
                .filter(|&(&x, &dx)| {
                    if dx > theta + 1e-9 {
                        return false;
                    }
                    // keep the closer of a mirror pair, positives on ties
                    let dm = view.dist_from_set(seed_set, -x);
                    dx < dm - 1e-12 || (dm - dx).abs() <= 1e-12 && x > 0
                })
                .map(|(&x, _)| x)
                .collect()
        };
        match self.params.theta_mode {
            ThetaMode::Sample => {
                let theta = if half > 0.0 { rng.gen_range(0.0..half) } else { 0.0 };
                members(theta)
            }
            ThetaMode::Enumerate => {
                let mut values: Vec<f64> = dist
                    .iter()
                    .copied()
                    .filter(|&v| v < half)
                    .chain(std::iter::once(0.0))
                    .collect();
                values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                values.dedup();
                let mut best: Option<(usize, usize, Vec<SignedVertex>)> = None;
                for (k, &theta) in values.iter().enumerate() {
                    let taken = members(theta);
                    if taken.is_empty() {
                        continue;
                    }
                    // pessimistic immediate cost: arcs leaving or entering
                    // the removed slab count as potentially cut
                    let neg: Vec<SignedVertex> = taken.iter().map(|&x| -x).collect();
                    let cost = g
                        .arcs()
                        .iter()
                        .filter(|&&(u, v)| {
                            let u_in = taken.contains(&u);
                            let v_in_neg = neg.contains(&v);
                            (u_in && !taken.contains(&v) && !neg.contains(&v))
                                || (v_in_neg && !taken.contains(&u) && !neg.contains(&u))
                                || (u_in && v_in_neg)
                        })
                        .count();
                    let better = best.as_ref().map_or(true, |(bc, bk, _)| {
                        cost < *bc || (cost == *bc && k < *bk)
                    });
                    if better {
                        best = Some((cost, k, taken));
                    }
                }
                best.map(|(_, _, taken)| taken).unwrap_or_else(|| members(0.0))
            }
        }
    }
}

fn remove_pairs(remaining: &mut Vec<SignedVertex>, taken: &[SignedVertex]) {
    remaining.retain(|&x| !taken.contains(&x) && !taken.contains(&(-x)));
}

/// Assigns the leftover symmetric pairs. Zero-length arcs act as
/// implications (`u` on the cut side forces `v` there too); remaining free
/// pairs follow the sign of their expectation, ties to the positive
/// literal.
fn assign_remainder(
    g: &SymmetricDigraph,
    view: &DirectedMetricView<'_>,
    pe: &PseudoExpectation,
    side: &[SignedVertex],
    remaining: &[SignedVertex],
) -> Vec<SignedVertex> {
    let zero_tol = 1e-2;
    let mut chosen: Vec<SignedVertex> = Vec::new();
    let in_side = |chosen: &[SignedVertex], v: SignedVertex| -> Option<bool> {
        if side.contains(&v) || chosen.contains(&v) {
            Some(true)
        } else if side.contains(&-v) || chosen.contains(&-v) {
            Some(false)
        } else {
            None
        }
    };
    let zero_arcs: Vec<(SignedVertex, SignedVertex)> = g
        .arcs()
        .iter()
        .copied()
        .filter(|&(u, v)| view.ddir(u, v) <= zero_tol)
        .collect();

    let mut pending: Vec<SignedVertex> =
        remaining.iter().copied().filter(|&v| v > 0).collect();
    pending.sort_unstable();

    loop {
        // propagate implications to a fixpoint
        let mut changed = true;
        while changed {
            changed = false;
            for &(u, v) in &zero_arcs {
                let (su, sv) = (in_side(&chosen, u), in_side(&chosen, v));
                match (su, sv) {
                    (Some(true), None) => {
                        chosen.push(v);
                        changed = true;
                    }
                    (None, Some(false)) => {
                        chosen.push(-u);
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        pending.retain(|&i| in_side(&chosen, i).is_none() && in_side(&chosen, -i).is_none());
        let Some(&i) = pending.first() else { break };
        // sign preference with ties to the positive literal
        if pe.singleton(i as usize) >= 0.0 {
            chosen.push(i);
        } else {
            chosen.push(-i);
        }
    }
    chosen
}

/// Greedy pair flipping: move a vertex pair to the other side whenever it
/// strictly reduces the number of cut arcs.
fn local_improve(g: &SymmetricDigraph, side: &mut Vec<SignedVertex>) {
    let n = g.n();
    for _ in 0..2 * n + 2 {
        let mut improved = false;
        for i in 1..=n as i32 {
            let current = arcs_cut(g, side);
            let mut flipped = side.clone();
            for v in flipped.iter_mut() {
                if v.abs() == i {
                    *v = -*v;
                }
            }
            if arcs_cut(g, &flipped) < current {
                *side = flipped;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// A symmetric cut side: contains exactly one of `v, -v` for every vertex.
pub fn validate_symmetric_cut(g: &SymmetricDigraph, side: &[SignedVertex]) -> bool {
    let n = g.n();
    side.len() == n
        && (1..=n as i32).all(|i| side.contains(&i) != side.contains(&-i))
}

pub fn sdc_pipeline(g: &SymmetricDigraph, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_sdc(g, params)?.round(params.seed)
}

/// Min UnCut via the symmetric-dicut reduction: vertex `i` joins the
/// first side when literal `i` lands on the cut side; the validator
/// recounts uncut edges directly.
pub struct UncutPrepared {
    graph: UndirectedGraph,
    sdc: SdcPrepared,
}

pub fn prepare_uncut(g: &UndirectedGraph, params: &PipelineParams) -> Result<UncutPrepared> {
    let digraph = reduce_uncut_to_symdicut(g);
    let sdc = prepare_sdc(&digraph, params)?;
    Ok(UncutPrepared { graph: g.clone(), sdc })
}

impl UncutPrepared {
    pub fn obj_star(&self) -> f64 {
        self.sdc.obj_star / 2.0
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        let inner = self.sdc.round(seed)?;
        let g = &self.graph;
        let n = g.n();
        let SolutionData::SignedCut { side } = &inner.solution else { unreachable!() };
        let assignment: Vec<bool> = (1..=n as i32).map(|i| side.contains(&i)).collect();
        let uncut = g
            .edges()
            .iter()
            .filter(|&&(a, b)| assignment[a - 1] == assignment[b - 1])
            .count();
        assert_eq!(
            2 * uncut,
            inner.objective as usize,
            "arc count must be twice the uncut count"
        );
        let oracle_opt = if self.sdc.params.with_oracle {
            Some(oracle::exact_uncut(g)?.0 as f64)
        } else {
            None
        };
        let objective = uncut as f64;
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        let partition: Vec<usize> = (1..=n).filter(|&i| assignment[i - 1]).collect();
        Ok(PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "uncut".into(),
            n,
            params: inner.params.clone(),
            obj_star: self.obj_star(),
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::Partition { side: partition },
            trace: inner.trace.clone(),
            arv: inner.arv.clone(),
            flags: inner.flags.clone(),
            seed,
            ms: None,
        })
    }
}

pub fn uncut_pipeline(g: &UndirectedGraph, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_uncut(g, params)?.round(params.seed)
}

/// Min 2CNF Deletion via the symmetric-dicut reduction: variable `i` is
/// true when literal `i` lands on the cut side; the validator recounts
/// violated clauses directly.
pub struct CnfDelPrepared {
    formula: TwoCnfFormula,
    sdc: SdcPrepared,
}

pub fn prepare_cnf_del(f: &TwoCnfFormula, params: &PipelineParams) -> Result<CnfDelPrepared> {
    let digraph = reduce_2cnf_to_symdicut(f);
    let sdc = prepare_sdc(&digraph, params)?;
    Ok(CnfDelPrepared { formula: f.clone(), sdc })
}

impl CnfDelPrepared {
    pub fn obj_star(&self) -> f64 {
        self.sdc.obj_star / 2.0
    }

    pub fn round(&self, seed: u64) -> Result<PipelineReport> {
        let inner = self.sdc.round(seed)?;
        let f = &self.formula;
        let n = f.nvars();
        let SolutionData::SignedCut { side } = &inner.solution else { unreachable!() };
        let assignment: Vec<bool> = (1..=n as i32).map(|i| side.contains(&i)).collect();
        let signs: Vec<i8> = assignment.iter().map(|&b| if b { 1 } else { -1 }).collect();
        let violated = f.violated(&signs);
        assert_eq!(
            2 * violated,
            inner.objective as usize,
            "arc count must be twice the violation count"
        );
        let oracle_opt = if self.sdc.params.with_oracle {
            Some(oracle::exact_2cnf_del(f)?.0 as f64)
        } else {
            None
        };
        let objective = violated as f64;
        let ratio = oracle_opt.and_then(|o| if o > 0.0 { Some(objective / o) } else { None });
        Ok(PipelineReport {
            schema: SCHEMA_VERSION,
            problem: "2cnfdel".into(),
            n,
            params: inner.params.clone(),
            obj_star: self.obj_star(),
            objective,
            oracle_opt,
            ratio,
            solution: SolutionData::Assignment { values: assignment },
            trace: inner.trace.clone(),
            arv: inner.arv.clone(),
            flags: inner.flags.clone(),
            seed,
            ms: None,
        })
    }
}

pub fn cnf2del_pipeline(f: &TwoCnfFormula, params: &PipelineParams) -> Result<PipelineReport> {
    prepare_cnf_del(f, params)?.round(params.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery;

    fn quick_params() -> PipelineParams {
        PipelineParams { degree_cap: 2, with_oracle: true, ..Default::default() }
    }

    #[test]
    fn vc_pipeline_small_graphs() {
        let p = quick_params();
        let rep = vc_pipeline(&battery::complete(2), &p).unwrap();
        assert!(rep.objective >= 1.0 && rep.objective <= 2.0);
        assert_eq!(rep.oracle_opt, Some(1.0));
        assert!(rep.obj_star <= 1.0 + 1e-3);

        let rep = vc_pipeline(&battery::complete(3), &p).unwrap();
        assert!(rep.objective >= 2.0 && rep.objective <= 3.0);
        assert_eq!(rep.oracle_opt, Some(2.0));

        let edgeless = UndirectedGraph::new(4, []).unwrap();
        let rep = vc_pipeline(&edgeless, &p).unwrap();
        assert_eq!(rep.objective, 0.0);
    }

    #[test]
    fn bs_pipeline_two_k4s() {
        let p = quick_params();
        let rep = bs_pipeline(&battery::two_k4s_bridge(), &p).unwrap();
        assert_eq!(rep.oracle_opt, Some(1.0));
        assert!(rep.objective <= 3.0, "cut {} too large", rep.objective);
        let SolutionData::Partition { side } = &rep.solution else { panic!() };
        let min_side = side.len().min(8 - side.len());
        assert!(min_side >= 2, "side sizes {} / {}", side.len(), 8 - side.len());
        assert!(rep.obj_star <= 1.0 + 1e-3);
    }

    #[test]
    fn bs_pipeline_rejects_k2() {
        assert!(bs_pipeline(&battery::complete(2), &quick_params()).is_err());
    }

    #[test]
    fn bs_pipeline_complete_k6() {
        let p = quick_params();
        let rep = bs_pipeline(&battery::complete(6), &p).unwrap();
        // any balanced split of K6 with sides (a, 6-a) cuts a(6-a) >= 8 edges
        let SolutionData::Partition { side } = &rep.solution else { panic!() };
        let a = side.len();
        assert_eq!(rep.objective as usize, a * (6 - a));
    }

    #[test]
    fn usc_pipeline_c6_and_k2() {
        let p = quick_params();
        let rep = usc_pipeline(&battery::cycle(6), &p).unwrap();
        assert_eq!(rep.oracle_opt, Some(2.0 / 3.0));
        assert!(rep.objective <= 2.0, "expansion {}", rep.objective);
        assert!(rep.obj_star <= 2.0 / 3.0 + 1e-3);

        let rep = usc_pipeline(&battery::complete(2), &p).unwrap();
        assert_eq!(rep.objective, 1.0);

        let rep = usc_pipeline(&battery::two_k4s_bridge(), &p).unwrap();
        assert_eq!(rep.oracle_opt, Some(0.25));
        assert!(rep.objective <= 0.75, "expansion {}", rep.objective);
    }

    #[test]
    fn sdc_pipeline_examples() {
        let p = quick_params();
        // K2 uncut digraph: a proper bipartition cuts nothing
        let d = reduce_uncut_to_symdicut(&battery::complete(2));
        let rep = sdc_pipeline(&d, &p).unwrap();
        assert_eq!(rep.objective, 0.0);

        let empty = SymmetricDigraph::new(3, vec![]).unwrap();
        let rep = sdc_pipeline(&empty, &p).unwrap();
        assert_eq!(rep.objective, 0.0);

        // satisfiable pair of clauses
        let f = TwoCnfFormula::new(2, vec![((1, 1), (2, 1)), ((1, -1), (2, 1))]).unwrap();
        let d = reduce_2cnf_to_symdicut(&f);
        let rep = sdc_pipeline(&d, &p).unwrap();
        assert_eq!(rep.objective, 0.0, "satisfiable formula cuts no arcs");
    }

    #[test]
    fn uncut_pipeline_examples() {
        let p = quick_params();
        let rep = uncut_pipeline(&battery::complete(3), &p).unwrap();
        assert_eq!(rep.oracle_opt, Some(1.0));
        assert!(rep.objective >= 1.0 && rep.objective <= 3.0);
        assert!(rep.obj_star <= 1.0 + 1e-3);

        let rep = uncut_pipeline(&battery::cycle(4), &p).unwrap();
        assert_eq!(rep.objective, 0.0, "bipartite graphs have zero uncut optimum");
    }

    #[test]
    fn cnf_del_pipeline_examples() {
        let p = quick_params();
        let f = TwoCnfFormula::new(2, vec![((1, 1), (2, 1)), ((1, -1), (2, -1))]).unwrap();
        let rep = cnf2del_pipeline(&f, &p).unwrap();
        assert_eq!(rep.objective, 0.0, "satisfiable: x1 true, x2 false");

        // contradictory unit-like clauses force one deletion
        let f = TwoCnfFormula::new(1, vec![((1, 1), (1, 1)), ((1, -1), (1, -1))]).unwrap();
        let rep = cnf2del_pipeline(&f, &p).unwrap();
        assert_eq!(rep.objective, 1.0);
        assert_eq!(rep.oracle_opt, Some(1.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let p = quick_params();
        let g = battery::two_k4s_bridge();
        let a = bs_pipeline(&g, &p).unwrap().to_json();
        let b = bs_pipeline(&g, &p).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn degree_four_vc_k3() {
        let p = PipelineParams { degree_cap: 4, with_oracle: true, ..Default::default() };
        let rep = vc_pipeline(&battery::complete(3), &p).unwrap();
        assert!(rep.obj_star <= 2.0 + 1e-3);
        assert!(rep.objective <= 3.0);
        assert_eq!(rep.params.d, 4);
    }
}
