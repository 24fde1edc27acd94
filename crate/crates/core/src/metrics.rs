//! Metric lenses over a degree-2 (or higher) pseudo-expectation: the
//! squared-distance metric on vertices plus an anchor point, the symmetric
//! directed metric on signed vertices, balls, hollowness profiles, spread,
//! arc volume, and the negative-type check.

use crate::error::Result;
use crate::instances::{SignedVertex, SymmetricDigraph};
use crate::pseudoexp::PseudoExpectation;

/// A point of the vertex metric: a vertex or the constant anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Point {
    Anchor,
    Vertex(usize),
}

/// Distances `d(i, j) = E[(X_i - X_j)^2]` over `[1, n]` plus the anchor,
/// with `d(i, anchor) = E[(X_i - 1)^2]`. Read-only view over the moments.
#[derive(Debug, Clone, Copy)]
pub struct MetricView<'a> {
    pe: &'a PseudoExpectation,
}

impl<'a> MetricView<'a> {
    pub fn new(pe: &'a PseudoExpectation) -> Self {
        assert!(pe.degree() >= 2, "metric view needs degree >= 2");
        MetricView { pe }
    }

    pub fn n(&self) -> usize {
        self.pe.n()
    }

    pub fn pe(&self) -> &PseudoExpectation {
        self.pe
    }

    pub fn dist(&self, a: Point, b: Point) -> f64 {
        match (a, b) {
            (Point::Anchor, Point::Anchor) => 0.0,
            (Point::Vertex(i), Point::Vertex(j)) if i == j => 0.0,
            (Point::Vertex(i), Point::Vertex(j)) => 2.0 - 2.0 * self.pe.pair(i, j),
            (Point::Vertex(i), Point::Anchor) | (Point::Anchor, Point::Vertex(i)) => {
                2.0 - 2.0 * self.pe.singleton(i)
            }
        }
    }

    pub fn dist_vv(&self, i: usize, j: usize) -> f64 {
        self.dist(Point::Vertex(i), Point::Vertex(j))
    }

    /// Distance from a vertex to the closest member of `set`.
    pub fn dist_to_set(&self, i: usize, set: &[usize]) -> f64 {
        set.iter().map(|&j| self.dist_vv(i, j)).fold(f64::INFINITY, f64::min)
    }

    /// Minimum cross distance between two vertex sets.
    pub fn set_dist(&self, a: &[usize], b: &[usize]) -> f64 {
        a.iter().map(|&i| self.dist_to_set(i, b)).fold(f64::INFINITY, f64::min)
    }

    /// Open ball: members of `candidates` strictly within `rad` of `x`.
    pub fn ball(&self, candidates: &[usize], x: usize, rad: f64) -> Vec<usize> {
        candidates.iter().copied().filter(|&y| self.dist_vv(x, y) < rad).collect()
    }

    /// Per-point closed-ball occupancy at radius `rad` over `candidates`,
    /// plus the maximum (the hollowness bound `m`). Ball membership here
    /// uses `<=` so a point always counts itself.
    pub fn hollowness_profile(&self, candidates: &[usize], rad: f64) -> (Vec<usize>, usize) {
        let sizes: Vec<usize> = candidates
            .iter()
            .map(|&x| candidates.iter().filter(|&&y| self.dist_vv(x, y) <= rad).count())
            .collect();
        let m = sizes.iter().copied().max().unwrap_or(0);
        (sizes, m)
    }

    /// `sum_{x,y in subset} d(x, y)` over ordered pairs.
    pub fn spread(&self, subset: &[usize]) -> f64 {
        let mut acc = 0.0;
        for &x in subset {
            for &y in subset {
                acc += self.dist_vv(x, y);
            }
        }
        acc
    }

    /// Builds Gram vectors and returns the largest deviation between
    /// squared vector distances and metric distances over all point pairs
    /// including the anchor.
    pub fn check_negative_type(&self, psd_tol: f64) -> Result<f64> {
        let gram = self.pe.gram_vectors(psd_tol)?;
        let n = self.pe.n();
        let mut worst = 0.0f64;
        let pt = |p: usize| if p == 0 { Point::Anchor } else { Point::Vertex(p) };
        for p in 0..=n {
            for q in 0..=n {
                let dev = (gram.dist_sq(p, q) - self.dist(pt(p), pt(q))).abs();
                worst = worst.max(dev);
            }
        }
        Ok(worst)
    }
}

/// The symmetric directed metric on signed vertices under the antipodal
/// convention `X_{-i} = -X_i`:
/// `d(u, v) = E[(1 + sgn(u) X_|u|)(1 - sgn(v) X_|v|)]`, clamped at zero.
#[derive(Debug, Clone)]
pub struct DirectedMetricView<'a> {
    pe: &'a PseudoExpectation,
    clamp_tol: f64,
    clamped_pairs: usize,
    total_pairs: usize,
}

impl<'a> DirectedMetricView<'a> {
    /// Builds the view and scans all signed pairs once to count how many
    /// raw distances fall below `-clamp_tol` (they read back as zero).
    pub fn new(pe: &'a PseudoExpectation, clamp_tol: f64) -> Self {
        assert!(pe.degree() >= 2, "directed metric view needs degree >= 2");
        let mut view =
            DirectedMetricView { pe, clamp_tol, clamped_pairs: 0, total_pairs: 0 };
        let n = pe.n() as i32;
        for u in -n..=n {
            for v in -n..=n {
                if u == 0 || v == 0 || u == v {
                    continue;
                }
                view.total_pairs += 1;
                if view.raw(u, v) < -clamp_tol {
                    view.clamped_pairs += 1;
                }
            }
        }
        view
    }

    pub fn n(&self) -> usize {
        self.pe.n()
    }

    pub fn pe(&self) -> &PseudoExpectation {
        self.pe
    }

    /// Fraction of signed pairs whose raw distance was negative beyond
    /// the clamp tolerance.
    pub fn clamped_fraction(&self) -> f64 {
        if self.total_pairs == 0 {
            0.0
        } else {
            self.clamped_pairs as f64 / self.total_pairs as f64
        }
    }

    fn raw(&self, u: SignedVertex, v: SignedVertex) -> f64 {
        if u == v {
            return 0.0;
        }
        let (su, au) = (u.signum() as f64, u.unsigned_abs() as usize);
        let (sv, av) = (v.signum() as f64, v.unsigned_abs() as usize);
        if au == av {
            // (1 + sX)(1 - tX) with t = -s reduces to 2 + 2sX
            2.0 + 2.0 * su * self.pe.singleton(au)
        } else {
            1.0 + su * self.pe.singleton(au)
                - sv * self.pe.singleton(av)
                - su * sv * self.pe.pair(au, av)
        }
    }

    /// Directed distance, clamped to be nonnegative.
    pub fn ddir(&self, u: SignedVertex, v: SignedVertex) -> f64 {
        self.raw(u, v).max(0.0)
    }

    /// Directed distance from the closest member of `set` to `v`.
    pub fn dist_from_set(&self, set: &[SignedVertex], v: SignedVertex) -> f64 {
        set.iter().map(|&u| self.ddir(u, v)).fold(f64::INFINITY, f64::min)
    }

    /// Minimum directed distance from `a` to `b`.
    pub fn set_dist(&self, a: &[SignedVertex], b: &[SignedVertex]) -> f64 {
        b.iter().map(|&v| self.dist_from_set(a, v)).fold(f64::INFINITY, f64::min)
    }

    /// Total directed length of arcs with both endpoints inside `m_set`.
    pub fn volume(&self, g: &SymmetricDigraph, m_set: &[SignedVertex]) -> f64 {
        let member = |v: SignedVertex| m_set.contains(&v);
        g.arcs()
            .iter()
            .filter(|&&(u, v)| member(u) && member(v))
            .map(|&(u, v)| self.ddir(u, v))
            .sum()
    }

    /// Worst violation of the directed-metric axioms over all signed
    /// triples: nonnegativity (pre-clamp), `d(x,x) = 0`, the mirror
    /// symmetry `d(x,y) = d(-y,-x)`, and the triangle inequality.
    pub fn axiom_residual(&self) -> f64 {
        let n = self.pe.n() as i32;
        let pts: Vec<i32> = (-n..=n).filter(|&v| v != 0).collect();
        let mut worst = 0.0f64;
        for &x in &pts {
            for &y in &pts {
                worst = worst.max(-self.raw(x, y));
                worst = worst.max((self.raw(x, y) - self.raw(-y, -x)).abs());
                for &z in &pts {
                    worst = worst.max(self.raw(x, z) - self.raw(x, y) - self.raw(y, z));
                }
            }
        }
        worst
    }

    pub fn clamp_tol(&self) -> f64 {
        self.clamp_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::UndirectedGraph;
    use crate::instances::reduce_uncut_to_symdicut;
    use crate::oracle::{pseudoexpectation_of, ExplicitDistribution};
    use crate::subset::VarSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn anticorrelated() -> PseudoExpectation {
        PseudoExpectation::from_moments(2, 2, [(VarSet::pair(1, 2), -1.0)])
    }

    #[test]
    fn dist_examples() {
        let pe = anticorrelated();
        let m = MetricView::new(&pe);
        assert_eq!(m.dist_vv(1, 2), 4.0);
        assert_eq!(m.dist_vv(1, 1), 0.0);

        let pe = PseudoExpectation::from_moments(2, 2, [(VarSet::pair(1, 2), 0.5)]);
        assert_eq!(MetricView::new(&pe).dist_vv(1, 2), 1.0);

        // anchor distance is 2 - 2 E[X_i]
        let pe = PseudoExpectation::from_moments(1, 2, [(VarSet::single(1), 0.25)]);
        assert_eq!(MetricView::new(&pe).dist(Point::Vertex(1), Point::Anchor), 1.5);
    }

    #[test]
    fn ball_examples() {
        let pe = anticorrelated();
        let m = MetricView::new(&pe);
        let all = [1usize, 2];
        assert!(m.ball(&all, 1, 0.0).is_empty(), "open ball of radius 0");
        assert_eq!(m.ball(&all, 1, 5.0), vec![1, 2], "radius beyond diameter");
        assert_eq!(m.ball(&all, 1, 1.0), vec![1]);
    }

    #[test]
    fn hollowness_profile_examples() {
        let uniform = PseudoExpectation::uniform(4, 2);
        let m = MetricView::new(&uniform);
        let all = [1usize, 2, 3, 4];
        let (sizes, max) = m.hollowness_profile(&all, 0.01);
        assert_eq!(sizes, vec![1, 1, 1, 1]);
        assert_eq!(max, 1);

        let dist = ExplicitDistribution::uniform_over(4, &[vec![1; 4], vec![-1; 4]]);
        let pe = pseudoexpectation_of(&dist, 4);
        let (_, max) = MetricView::new(&pe).hollowness_profile(&all, 0.01);
        assert_eq!(max, 4);
    }

    #[test]
    fn spread_examples() {
        let pe = anticorrelated();
        let m = MetricView::new(&pe);
        assert_eq!(m.spread(&[]), 0.0);
        assert_eq!(m.spread(&[1]), 0.0);
        assert_eq!(m.spread(&[1, 2]), 8.0, "ordered pairs count both directions");
    }

    #[test]
    fn ddir_examples() {
        let uniform = PseudoExpectation::uniform(2, 2);
        let d = DirectedMetricView::new(&uniform, 1e-5);
        assert_eq!(d.ddir(1, 1), 0.0);
        assert_eq!(d.ddir(1, 2), 1.0);
        assert_eq!(d.clamped_fraction(), 0.0);
    }

    #[test]
    fn ddir_mirror_symmetry_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let dist = ExplicitDistribution::random(4, &mut rng);
            let pe = pseudoexpectation_of(&dist, 4);
            let d = DirectedMetricView::new(&pe, 1e-9);
            for u in [-4i32, -2, 1, 3] {
                for v in [-3i32, -1, 2, 4] {
                    if u == v {
                        continue;
                    }
                    assert!((d.ddir(u, v) - d.ddir(-v, -u)).abs() < 1e-12);
                }
            }
            assert!(d.axiom_residual() < 1e-9, "true distributions give exact metrics");
        }
    }

    #[test]
    fn volume_examples() {
        let g = reduce_uncut_to_symdicut(&UndirectedGraph::new(2, [(1, 2)]).unwrap());
        let uniform = PseudoExpectation::uniform(2, 2);
        let d = DirectedMetricView::new(&uniform, 1e-9);
        assert_eq!(d.volume(&g, &[]), 0.0);
        let all: Vec<i32> = g.vertices().collect();
        // four arcs, each directed distance 1 under the uniform moments
        assert_eq!(d.volume(&g, &all), 4.0);
        let empty_g = crate::instances::SymmetricDigraph::new(2, vec![]).unwrap();
        assert_eq!(d.volume(&empty_g, &all), 0.0);
    }

    #[test]
    fn negative_type_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dist = ExplicitDistribution::random(4, &mut rng);
        let pe = pseudoexpectation_of(&dist, 4);
        let m = MetricView::new(&pe);
        assert!(m.check_negative_type(1e-9).unwrap() <= 1e-8);

        let single = PseudoExpectation::uniform(1, 2);
        assert!(MetricView::new(&single).check_negative_type(1e-9).unwrap() <= 1e-12);
    }
}
