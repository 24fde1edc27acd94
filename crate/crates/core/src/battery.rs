//! Named small instances and seeded random generators shared by the test
//! suite, the acceptance harness, and the benchmark command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instances::{TwoCnfFormula, UndirectedGraph};

pub fn path(n: usize) -> UndirectedGraph {
    UndirectedGraph::new(n, (1..n).map(|i| (i, i + 1))).unwrap()
}

pub fn cycle(n: usize) -> UndirectedGraph {
    UndirectedGraph::new(n, (1..=n).map(|i| (i, i % n + 1))).unwrap()
}

pub fn complete(n: usize) -> UndirectedGraph {
    let edges = (1..=n).flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)));
    UndirectedGraph::new(n, edges).unwrap()
}

/// Star with one center (vertex 1) and `leaves` leaves.
pub fn star(leaves: usize) -> UndirectedGraph {
    UndirectedGraph::new(leaves + 1, (2..=leaves + 1).map(|i| (1, i))).unwrap()
}

/// Two disjoint K4s (vertices 1-4 and 5-8) joined by the bridge (4, 5).
pub fn two_k4s_bridge() -> UndirectedGraph {
    let mut edges = Vec::new();
    for base in [0usize, 4] {
        for i in 1..=4 {
            for j in (i + 1)..=4 {
                edges.push((base + i, base + j));
            }
        }
    }
    edges.push((4, 5));
    UndirectedGraph::new(8, edges).unwrap()
}

/// The Petersen graph: outer 5-cycle, inner pentagram, spokes.
pub fn petersen() -> UndirectedGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i + 1, (i + 1) % 5 + 1)); // outer cycle
        edges.push((6 + i, 6 + (i + 2) % 5)); // inner pentagram
        edges.push((i + 1, 6 + i)); // spokes
    }
    UndirectedGraph::new(10, edges).unwrap()
}

/// Erdos-Renyi graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> UndirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(usize, usize)> = (1..=n)
        .flat_map(|i| ((i + 1)..=n).map(move |j| (i, j)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    UndirectedGraph::new(n, edges).unwrap()
}

/// Random 2CNF with `m` clauses over `nvars` variables.
pub fn random_2cnf(nvars: usize, m: usize, seed: u64) -> TwoCnfFormula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses: Vec<_> = (0..m)
        .map(|_| {
            let lit = |rng: &mut ChaCha8Rng| {
                (rng.gen_range(1..=nvars), if rng.gen_bool(0.5) { 1i8 } else { -1 })
            };
            (lit(&mut rng), lit(&mut rng))
        })
        .collect();
    TwoCnfFormula::new(nvars, clauses).unwrap()
}

/// The named graph battery: `(name, graph)`.
pub fn named_graphs() -> Vec<(&'static str, UndirectedGraph)> {
    vec![
        ("k2", complete(2)),
        ("k3", complete(3)),
        ("c4", cycle(4)),
        ("c6", cycle(6)),
        ("star3", star(3)),
        ("two_k4s_bridge", two_k4s_bridge()),
        ("petersen", petersen()),
    ]
}

/// Thirty random graphs with up to `max_n` vertices, sizes cycling small
/// to large so the battery stays tractable at higher degrees.
pub fn random_graph_battery(max_n: usize, seed: u64) -> Vec<(String, UndirectedGraph)> {
    let sizes = [4, 5, 6, 7, 8, 9, 4, 5, 6, 10, 7, 8, 5, 6, 12, 4, 7, 9, 6, 8, 5, 11, 6, 7, 4, 8, 10, 5, 6, 12];
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let n = n.min(max_n);
            let p = if k % 3 == 0 { 0.3 } else { 0.5 };
            (format!("gnp_{k}_{n}"), random_graph(n, p, seed.wrapping_add(k as u64)))
        })
        .collect()
}

/// Thirty random 2CNF formulas with at most `max_vars` variables.
pub fn random_cnf_battery(max_vars: usize, seed: u64) -> Vec<(String, TwoCnfFormula)> {
    (0..30)
        .map(|k| {
            let nv = 2 + (k % 4).min(max_vars - 2).min(3);
            let m = 2 + (k % 7);
            (format!("cnf_{k}_{nv}"), random_2cnf(nv, m, seed.wrapping_add(1000 + k as u64)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn petersen_is_cubic() {
        let g = petersen();
        assert_eq!(g.n(), 10);
        assert_eq!(g.num_edges(), 15);
        for v in 1..=10 {
            assert_eq!(g.degree(v), 3);
        }
    }

    #[test]
    fn two_k4s_shape() {
        let g = two_k4s_bridge();
        assert_eq!(g.n(), 8);
        assert_eq!(g.num_edges(), 13);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_graph(8, 0.5, 42), random_graph(8, 0.5, 42));
        assert_eq!(random_2cnf(4, 6, 1).clauses(), random_2cnf(4, 6, 1).clauses());
    }
}
