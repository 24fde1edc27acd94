//! Exact brute-force solvers and explicit distributions over the boolean
//! cube. These are the ground truth every other module is tested against.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instances::{SymmetricDigraph, TwoCnfFormula, UndirectedGraph};
use crate::pseudoexp::PseudoExpectation;
use crate::subset::SubsetIndex;

/// Signs of the assignment encoded by `mask`: bit `i-1` set means `X_i = +1`.
pub fn mask_signs(mask: u32, n: usize) -> Vec<i8> {
    (0..n).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }).collect()
}

/// A probability distribution over `{-1, +1}^n`, dense by assignment mask.
#[derive(Debug, Clone)]
pub struct ExplicitDistribution {
    n: usize,
    weights: Vec<f64>,
}

impl ExplicitDistribution {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n > 16 {
            return Err(Error::SizeCap { n, cap: 16 });
        }
        if weights.len() != 1 << n {
            return Err(Error::InvalidInstance(format!(
                "expected {} weights, got {}",
                1 << n,
                weights.len()
            )));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidInstance("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInstance(format!("weights sum to {total}, not 1")));
        }
        Ok(ExplicitDistribution { n, weights })
    }

    pub fn uniform(n: usize) -> Self {
        let size = 1usize << n;
        ExplicitDistribution { n, weights: vec![1.0 / size as f64; size] }
    }

    pub fn point_mass(n: usize, signs: &[i8]) -> Self {
        let mut mask = 0u32;
        for (b, &s) in signs.iter().enumerate() {
            if s > 0 {
                mask |= 1 << b;
            }
        }
        let mut weights = vec![0.0; 1 << n];
        weights[mask as usize] = 1.0;
        ExplicitDistribution { n, weights }
    }

    /// Uniform distribution over a list of assignments (duplicates add mass).
    pub fn uniform_over(n: usize, support: &[Vec<i8>]) -> Self {
        assert!(!support.is_empty());
        let mut weights = vec![0.0; 1 << n];
        let w = 1.0 / support.len() as f64;
        for signs in support {
            let mut mask = 0u32;
            for (b, &s) in signs.iter().enumerate() {
                if s > 0 {
                    mask |= 1 << b;
                }
            }
            weights[mask as usize] += w;
        }
        ExplicitDistribution { n, weights }
    }

    /// Random distribution with weights drawn uniformly and normalized.
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        let size = 1usize << n;
        let mut weights: Vec<f64> = (0..size).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        ExplicitDistribution { n, weights }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact moment `E[prod_{i in S} X_i]`.
    pub fn moment(&self, s: crate::subset::VarSet) -> f64 {
        let mut acc = 0.0;
        for (mask, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            // parity of -1 entries within S
            let negs = (!(mask as u32)) & s.0;
            let sign = if negs.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * w;
        }
        acc
    }

    /// The exact conditional distribution given `X_i = b`, or None if the
    /// event has zero probability.
    pub fn conditioned(&self, i: usize, b: i8) -> Option<Self> {
        let bit = 1u32 << (i - 1);
        let keep = |mask: usize| -> bool {
            let set = mask as u32 & bit != 0;
            (b > 0) == set
        };
        let total: f64 = self
            .weights
            .iter()
            .enumerate()
            .filter(|(m, _)| keep(*m))
            .map(|(_, w)| w)
            .sum();
        if total <= 0.0 {
            return None;
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(m, &w)| if keep(m) { w / total } else { 0.0 })
            .collect();
        Some(ExplicitDistribution { n: self.n, weights })
    }
}

/// The exact degree-d moment table of an explicit distribution. True
/// distributions are pseudo-expectations of every degree, so any `d <= n`
/// is valid.
pub fn pseudoexpectation_of(dist: &ExplicitDistribution, d: usize) -> PseudoExpectation {
    let n = dist.n();
    assert!(d <= n, "degree {d} exceeds variable count {n}");
    let index = Arc::new(SubsetIndex::new(n, d));
    let moments: Vec<f64> = index.subsets().iter().map(|&s| dist.moment(s)).collect();
    PseudoExpectation::from_raw(n, d, index, moments)
}

/// Exact minimum vertex cover via branch and bound on a maximum-degree
/// vertex. Returns the optimum size and one witness cover.
pub fn exact_vc(g: &UndirectedGraph) -> Result<(usize, Vec<usize>)> {
    if g.n() > 24 {
        return Err(Error::SizeCap { n: g.n(), cap: 24 });
    }
    struct Search {
        edges: Vec<(usize, usize)>,
        best: usize,
        best_cover: Vec<usize>,
    }
    impl Search {
        fn run(&mut self, active: Vec<(usize, usize)>, cover: &mut Vec<usize>) {
            if cover.len() >= self.best {
                return;
            }
            if active.is_empty() {
                self.best = cover.len();
                self.best_cover = cover.clone();
                return;
            }
            // max-degree vertex among active edges
            let mut deg = std::collections::BTreeMap::new();
            for &(u, v) in &active {
                *deg.entry(u).or_insert(0usize) += 1;
                *deg.entry(v).or_insert(0usize) += 1;
            }
            let (&v, _) = deg.iter().max_by_key(|(_, &d)| d).unwrap();
            // Lower bound: a matching needs one endpoint each.
            let mut matched = std::collections::BTreeSet::new();
            let mut matching = 0usize;
            for &(a, b) in &active {
                if !matched.contains(&a) && !matched.contains(&b) {
                    matched.insert(a);
                    matched.insert(b);
                    matching += 1;
                }
            }
            if cover.len() + matching >= self.best {
                return;
            }

            // Branch 1: v in the cover.
            let rest: Vec<_> = active.iter().copied().filter(|&(a, b)| a != v && b != v).collect();
            cover.push(v);
            self.run(rest, cover);
            cover.pop();

            // Branch 2: all neighbors of v in the cover.
            let neighbors: Vec<usize> = active
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
            let rest: Vec<_> = active
                .iter()
                .copied()
                .filter(|&(a, b)| !neighbors.contains(&a) && !neighbors.contains(&b))
                .collect();
            let added = neighbors.len();
            cover.extend(neighbors);
            self.run(rest, cover);
            for _ in 0..added {
                cover.pop();
            }
        }
    }
    let mut s = Search { edges: g.edges().to_vec(), best: g.n() + 1, best_cover: (1..=g.n()).collect() };
    let active = s.edges.clone();
    s.run(active, &mut Vec::new());
    let mut cover = s.best_cover;
    cover.sort_unstable();
    Ok((s.best, cover))
}

/// Exact Min UnCut: minimum number of edges left uncut over all
/// bipartitions. Returns the optimum and one witness side assignment.
pub fn exact_uncut(g: &UndirectedGraph) -> Result<(usize, Vec<i8>)> {
    if g.n() > 16 {
        return Err(Error::SizeCap { n: g.n(), cap: 16 });
    }
    let n = g.n();
    let mut best = usize::MAX;
    let mut witness = vec![1i8; n];
    // vertex 1 fixed to +1: uncut count is flip-invariant
    let free = if n == 0 { 0 } else { n - 1 };
    for mask in 0..(1u32 << free) {
        let signs: Vec<i8> = std::iter::once(1i8)
            .chain((0..free).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }))
            .collect();
        let uncut = g.edges().iter().filter(|&&(u, v)| signs[u - 1] == signs[v - 1]).count();
        if uncut < best {
            best = uncut;
            witness = signs;
        }
    }
    Ok((best, witness))
}

/// Exact Min 2CNF Deletion: fewest clauses to delete so the rest is
/// satisfiable, equal to the fewest clauses violated by any assignment.
pub fn exact_2cnf_del(f: &TwoCnfFormula) -> Result<(usize, Vec<i8>)> {
    if f.nvars() > 16 {
        return Err(Error::SizeCap { n: f.nvars(), cap: 16 });
    }
    let n = f.nvars();
    let mut best = usize::MAX;
    let mut witness = vec![1i8; n];
    for mask in 0..(1u32 << n) {
        let signs = mask_signs(mask, n);
        let viol = f.violated(&signs);
        if viol < best {
            best = viol;
            witness = signs;
        }
    }
    Ok((best, witness))
}

/// Exact Min Symmetric DiCut: fewest arcs from `S` to `-S` over all
/// symmetric cuts. The witness is the assignment whose true literals form `S`.
pub fn exact_sdc(g: &SymmetricDigraph) -> Result<(usize, Vec<i8>)> {
    if g.n() > 16 {
        return Err(Error::SizeCap { n: g.n(), cap: 16 });
    }
    let n = g.n();
    let mut best = usize::MAX;
    let mut witness = vec![1i8; n];
    for mask in 0..(1u32 << n) {
        let signs = mask_signs(mask, n);
        let value = |v: i32| -> i8 {
            let s = signs[(v.unsigned_abs() as usize) - 1];
            if v > 0 {
                s
            } else {
                -s
            }
        };
        let cut = g.arcs().iter().filter(|&&(u, v)| value(u) > 0 && value(v) < 0).count();
        if cut < best {
            best = cut;
            witness = signs;
        }
    }
    Ok((best, witness))
}

/// Exact c-balanced separator: minimum edges cut over bipartitions with
/// both sides of size at least `ceil(c * n)`.
pub fn exact_bs(g: &UndirectedGraph, c: f64) -> Result<(usize, Vec<i8>)> {
    if g.n() > 20 {
        return Err(Error::SizeCap { n: g.n(), cap: 20 });
    }
    let n = g.n();
    let min_side = (c * n as f64).ceil() as usize;
    if 2 * min_side > n {
        return Err(Error::InvalidInstance(format!(
            "no partition of {n} vertices has both sides >= {min_side}"
        )));
    }
    let mut best = usize::MAX;
    let mut witness = vec![1i8; n];
    for mask in 0..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size < min_side || n - size < min_side {
            continue;
        }
        let signs = mask_signs(mask, n);
        let cut = g.edges().iter().filter(|&&(u, v)| signs[u - 1] != signs[v - 1]).count();
        if cut < best {
            best = cut;
            witness = signs;
        }
    }
    Ok((best, witness))
}

/// Edge expansion as an exact rational: `(cut edges, min(|S|, n - |S|))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expansion {
    pub cut: usize,
    pub denom: usize,
}

impl Expansion {
    pub fn value(self) -> f64 {
        self.cut as f64 / self.denom as f64
    }

    pub fn less_than(self, other: Expansion) -> bool {
        (self.cut as u64) * (other.denom as u64) < (other.cut as u64) * (self.denom as u64)
    }
}

/// Exact uniform sparsest cut: the global minimum expansion, one witness
/// subset, and the per-size table `Phi_G(t)` for `t in [1, n/2]`.
pub fn exact_usc(g: &UndirectedGraph) -> Result<(Expansion, Vec<usize>, Vec<Expansion>)> {
    if g.n() > 20 {
        return Err(Error::SizeCap { n: g.n(), cap: 20 });
    }
    let n = g.n();
    assert!(n >= 2, "sparsest cut needs at least two vertices");
    let half = n / 2;
    let mut per_t: Vec<Option<usize>> = vec![None; half + 1];
    let mut best: Option<(Expansion, u32)> = None;
    for mask in 1..((1u32 << n) - 1) {
        let size = mask.count_ones() as usize;
        let t = size.min(n - size);
        let signs = mask_signs(mask, n);
        let cut = g.edges().iter().filter(|&&(u, v)| signs[u - 1] != signs[v - 1]).count();
        if per_t[t].map_or(true, |c| cut < c) {
            per_t[t] = Some(cut);
        }
        let exp = Expansion { cut, denom: t };
        if best.map_or(true, |(b, _)| exp.less_than(b)) {
            best = Some((exp, mask));
        }
    }
    let (phi, mask) = best.expect("n >= 2 has a proper cut");
    let witness: Vec<usize> = (1..=n).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
    let table: Vec<Expansion> = (1..=half)
        .map(|t| Expansion { cut: per_t[t].unwrap(), denom: t })
        .collect();
    Ok((phi, witness, table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{reduce_2cnf_to_symdicut, reduce_uncut_to_symdicut};
    use crate::subset::VarSet;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cycle(n: usize) -> UndirectedGraph {
        UndirectedGraph::new(n, (1..=n).map(|i| (i, i % n + 1))).unwrap()
    }

    fn complete(n: usize) -> UndirectedGraph {
        let edges = (1..=n).flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)));
        UndirectedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn vc_small() {
        assert_eq!(exact_vc(&complete(2)).unwrap().0, 1);
        assert_eq!(exact_vc(&complete(3)).unwrap().0, 2);
        assert_eq!(exact_vc(&UndirectedGraph::new(4, []).unwrap()).unwrap().0, 0);
        // star K_{1,3}: center covers everything
        let star = UndirectedGraph::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let (opt, witness) = exact_vc(&star).unwrap();
        assert_eq!(opt, 1);
        assert_eq!(witness, vec![1]);
    }

    #[test]
    fn uncut_small() {
        assert_eq!(exact_uncut(&cycle(4)).unwrap().0, 0, "bipartite");
        assert_eq!(exact_uncut(&complete(3)).unwrap().0, 1);
        assert_eq!(exact_uncut(&complete(2)).unwrap().0, 0);
    }

    #[test]
    fn cnf_del_contradictory_units() {
        let f = TwoCnfFormula::new(1, vec![((1, 1), (1, 1)), ((1, -1), (1, -1))]).unwrap();
        assert_eq!(exact_2cnf_del(&f).unwrap().0, 1);
    }

    #[test]
    fn bs_small() {
        let two_k4s = crate::battery::two_k4s_bridge();
        assert_eq!(exact_bs(&two_k4s, 1.0 / 3.0).unwrap().0, 1);
        assert_eq!(exact_bs(&complete(3), 1.0 / 3.0).unwrap().0, 2);
        assert_eq!(exact_bs(&UndirectedGraph::new(4, []).unwrap(), 1.0 / 3.0).unwrap().0, 0);
    }

    #[test]
    fn usc_small() {
        let (phi, _, table) = exact_usc(&cycle(6)).unwrap();
        assert_eq!(phi, Expansion { cut: 2, denom: 3 });
        assert_eq!(table, vec![
            Expansion { cut: 2, denom: 1 },
            Expansion { cut: 2, denom: 2 },
            Expansion { cut: 2, denom: 3 },
        ]);

        let (phi, _, _) = exact_usc(&complete(2)).unwrap();
        assert_eq!(phi, Expansion { cut: 1, denom: 1 });

        // star K_{1,3}: every per-t entry must match a direct recount
        let star = UndirectedGraph::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let (_, _, table) = exact_usc(&star).unwrap();
        assert_eq!(table, vec![
            Expansion { cut: 1, denom: 1 },
            Expansion { cut: 2, denom: 2 },
        ]);
    }

    #[test]
    fn sdc_consistent_with_uncut_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=6usize {
            for _ in 0..12 {
                let edges: Vec<(usize, usize)> = (1..=n)
                    .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
                    .filter(|_| rng.gen_bool(0.5))
                    .collect();
                let g = UndirectedGraph::new(n, edges).unwrap();
                let d = reduce_uncut_to_symdicut(&g);
                assert_eq!(2 * exact_uncut(&g).unwrap().0, exact_sdc(&d).unwrap().0);
            }
        }
    }

    #[test]
    fn sdc_consistent_with_2cnf_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let nv = rng.gen_range(1..=5usize);
            let m = rng.gen_range(1..=8usize);
            let clauses: Vec<_> = (0..m)
                .map(|_| {
                    let lit = |rng: &mut ChaCha8Rng| {
                        (rng.gen_range(1..=nv), if rng.gen_bool(0.5) { 1i8 } else { -1 })
                    };
                    (lit(&mut rng), lit(&mut rng))
                })
                .collect();
            let f = TwoCnfFormula::new(nv, clauses).unwrap();
            let d = reduce_2cnf_to_symdicut(&f);
            assert_eq!(2 * exact_2cnf_del(&f).unwrap().0, exact_sdc(&d).unwrap().0);
        }
    }

    #[test]
    fn distribution_moments() {
        let u = ExplicitDistribution::uniform(3);
        assert_eq!(u.moment(VarSet::single(2)), 0.0);
        assert_eq!(u.moment(VarSet::pair(1, 3)), 0.0);
        assert_eq!(u.moment(VarSet::EMPTY), 1.0);

        let ones = ExplicitDistribution::point_mass(3, &[1, 1, 1]);
        for s in crate::subset::subsets_up_to(3, 3) {
            assert_eq!(ones.moment(s), 1.0);
        }

        // weights {(+,+): 0.5, (+,-): 0.25, (-,-): 0.25}: direct summation
        let mut w = vec![0.0; 4];
        w[0b11] = 0.5;
        w[0b01] = 0.25;
        w[0b00] = 0.25;
        let d = ExplicitDistribution::new(2, w).unwrap();
        assert!((d.moment(VarSet::single(1)) - 0.5).abs() < 1e-15);
        assert!((d.moment(VarSet::single(2)) - 0.0).abs() < 1e-15);
        assert!((d.moment(VarSet::pair(1, 2)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn distribution_pe_is_psd_and_conditioning_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 3..=6usize {
            for _ in 0..4 {
                let dist = ExplicitDistribution::random(n, &mut rng);
                let pe = pseudoexpectation_of(&dist, n);
                assert!(pe.min_eigenvalue().unwrap() >= -1e-10);
                for i in 1..=n {
                    for b in [-1i8, 1] {
                        let cond_dist = dist.conditioned(i, b).unwrap();
                        let want = pseudoexpectation_of(&cond_dist, n - 1);
                        let got = pe.condition(i, b).unwrap();
                        for (pos, s) in got.index().subsets().iter().enumerate() {
                            assert!(
                                (got.moments()[pos] - want.moment(*s)).abs() < 1e-10,
                                "n={n} i={i} b={b} subset {s:?}"
                            );
                        }
                    }
                }
            }
        }
    }
}
