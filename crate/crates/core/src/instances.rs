//! Problem instances: undirected graphs, symmetric digraphs on signed
//! vertices, 2CNF formulas, DIMACS parsers, and the reductions to
//! Min Symmetric DiCut.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Simple undirected graph on vertices `1..=n`. No self-loops, no
/// parallel edges; edges stored as ordered pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at vertex {u}")));
            }
            if u < 1 || u > n || v < 1 || v > n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u}, {v}) out of range [1, {n}]"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(UndirectedGraph { n, edges: set.into_iter().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }
}

/// A signed vertex: nonzero integer in `[-n, -1] u [1, n]`.
pub type SignedVertex = i32;

/// Directed graph on the signed vertex set `[-n] u [n]` whose arc multiset
/// is closed under the mirror map `(i, j) -> (-j, -i)`. Arcs are a
/// multiset: duplicates carry weight for cut counting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricDigraph {
    n: usize,
    arcs: Vec<(SignedVertex, SignedVertex)>,
}

impl SymmetricDigraph {
    pub fn new(n: usize, arcs: Vec<(SignedVertex, SignedVertex)>) -> Result<Self> {
        let bound = n as i32;
        for &(u, v) in &arcs {
            if u == 0 || v == 0 || u.abs() > bound || v.abs() > bound {
                return Err(Error::InvalidInstance(format!(
                    "arc ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("arc ({u}, {v}) is a loop")));
            }
        }
        let mut sorted = arcs.clone();
        sorted.sort_unstable();
        let mut mirrored: Vec<_> = arcs.iter().map(|&(u, v)| (-v, -u)).collect();
        mirrored.sort_unstable();
        if sorted != mirrored {
            return Err(Error::InvalidInstance(
                "arc multiset is not closed under (i, j) -> (-j, -i)".into(),
            ));
        }
        let mut arcs = arcs;
        arcs.sort_unstable();
        Ok(SymmetricDigraph { n, arcs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(SignedVertex, SignedVertex)] {
        &self.arcs
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// All signed vertices `[-n] u [n]`, negatives first in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = SignedVertex> + '_ {
        let n = self.n as i32;
        (-n..=n).filter(|&v| v != 0)
    }
}

/// A clause literal: variable index (1-based) and sign (+1 plain, -1 negated).
pub type Literal = (usize, i8);

/// 2CNF formula; clauses are a multiset and may repeat a variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCnfFormula {
    nvars: usize,
    clauses: Vec<(Literal, Literal)>,
}

impl TwoCnfFormula {
    pub fn new(nvars: usize, clauses: Vec<(Literal, Literal)>) -> Result<Self> {
        for &((v1, s1), (v2, s2)) in &clauses {
            for (v, s) in [(v1, s1), (v2, s2)] {
                if v < 1 || v > nvars {
                    return Err(Error::InvalidInstance(format!(
                        "literal variable {v} out of range [1, {nvars}]"
                    )));
                }
                if s != 1 && s != -1 {
                    return Err(Error::InvalidInstance(format!("literal sign {s} invalid")));
                }
            }
        }
        Ok(TwoCnfFormula { nvars, clauses })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn clauses(&self) -> &[(Literal, Literal)] {
        &self.clauses
    }

    /// Number of clauses violated by `assignment` (+1 = true), indexed
    /// by variable - 1.
    pub fn violated(&self, assignment: &[i8]) -> usize {
        self.clauses
            .iter()
            .filter(|&&((v1, s1), (v2, s2))| {
                let l1 = assignment[v1 - 1] == s1;
                let l2 = assignment[v2 - 1] == s2;
                !l1 && !l2
            })
            .count()
    }
}

/// Parses DIMACS edge format: `c` comments, `p edge <n> <m>` header,
/// `e <u> <v>` edge lines. Duplicate edges collapse; a mismatch between
/// the declared and parsed edge count is a warning, not an error.
pub fn parse_dimacs_graph(text: &[u8]) -> Result<(UndirectedGraph, Vec<String>)> {
    let text = String::from_utf8_lossy(text);
    let mut warnings = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "p" => {
                if fields.len() != 4 || (fields[1] != "edge" && fields[1] != "col") {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("malformed header: {line:?}"),
                    });
                }
                let n = fields[2].parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "bad vertex count".into(),
                })?;
                let m = fields[3].parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "bad edge count".into(),
                })?;
                header = Some((n, m));
            }
            "e" => {
                let (n, _) = header.ok_or(Error::Parse {
                    line: lineno,
                    msg: "edge line before header".into(),
                })?;
                if fields.len() != 3 {
                    return Err(Error::Parse { line: lineno, msg: "malformed edge line".into() });
                }
                let u = fields[1].parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "bad endpoint".into(),
                })?;
                let v = fields[2].parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "bad endpoint".into(),
                })?;
                if u < 1 || u > n || v < 1 || v > n {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("endpoint out of range in edge ({u}, {v})"),
                    });
                }
                edges.push((u, v));
            }
            _ => {
                return Err(Error::Parse { line: lineno, msg: format!("unknown line: {line:?}") })
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    let g = UndirectedGraph::new(n, edges)?;
    if g.num_edges() != m {
        warnings.push(format!(
            "header declares {m} edges, parsed {} after dedup",
            g.num_edges()
        ));
    }
    Ok((g, warnings))
}

/// Parses DIMACS CNF restricted to width-2 clauses: `p cnf <nvars> <m>`
/// header and zero-terminated clause lines.
pub fn parse_dimacs_cnf(text: &[u8]) -> Result<(TwoCnfFormula, Vec<String>)> {
    let text = String::from_utf8_lossy(text);
    let mut warnings = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(Error::Parse { line: lineno, msg: format!("malformed header: {line:?}") });
            }
            let nv = fields[2].parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                msg: "bad variable count".into(),
            })?;
            let m = fields[3].parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                msg: "bad clause count".into(),
            })?;
            header = Some((nv, m));
            continue;
        }
        let (nv, _) = header.ok_or(Error::Parse { line: lineno, msg: "clause before header".into() })?;
        for tok in line.split_whitespace() {
            let lit = tok.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                if current.len() != 2 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("clause width {} != 2", current.len()),
                    });
                }
                let mk = |l: i64| -> Result<Literal> {
                    let v = l.unsigned_abs() as usize;
                    if v < 1 || v > nv {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("literal {l} out of range"),
                        });
                    }
                    Ok((v, if l > 0 { 1 } else { -1 }))
                };
                clauses.push((mk(current[0])?, mk(current[1])?));
                current.clear();
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::Parse { line: 0, msg: "unterminated clause".into() });
    }
    let (nv, m) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    if clauses.len() != m {
        warnings.push(format!("header declares {m} clauses, parsed {}", clauses.len()));
    }
    Ok((TwoCnfFormula::new(nv, clauses)?, warnings))
}

/// Arcs encoding one clause `(b1 | b2)`: the clause is violated exactly
/// when both arcs run from the true-literal side to the false-literal side.
fn clause_arcs(((v1, s1), (v2, s2)): (Literal, Literal)) -> [(SignedVertex, SignedVertex); 2] {
    let l1 = i32::from(s1) * v1 as i32;
    let l2 = i32::from(s2) * v2 as i32;
    [(-l1, l2), (-l2, l1)]
}

/// Reduction from Min 2CNF Deletion: each clause contributes two arcs, and
/// any assignment violates `k` clauses iff its symmetric cut severs `2k`
/// arcs. Tautological clauses `(x | !x)` are never violated and contribute
/// no arcs.
pub fn reduce_2cnf_to_symdicut(f: &TwoCnfFormula) -> SymmetricDigraph {
    let mut arcs = Vec::with_capacity(2 * f.clauses().len());
    for &c in f.clauses() {
        let ((v1, s1), (v2, s2)) = c;
        if v1 == v2 && s1 == -s2 {
            continue;
        }
        arcs.extend_from_slice(&clause_arcs(c));
    }
    SymmetricDigraph::new(f.nvars(), arcs).expect("clause arcs are mirror-symmetric")
}

/// Reduction from Min UnCut: an edge `{i, j}` wants its endpoints on
/// opposite sides, which is the clause pair `(x_i | x_j)` and
/// `(!x_i | !x_j)`; together they contribute four arcs, and a bipartition
/// leaving `k` edges uncut yields a symmetric cut severing `2k` arcs.
pub fn reduce_uncut_to_symdicut(g: &UndirectedGraph) -> SymmetricDigraph {
    let mut arcs = Vec::with_capacity(4 * g.num_edges());
    for &(i, j) in g.edges() {
        arcs.extend_from_slice(&clause_arcs(((i, 1), (j, 1))));
        arcs.extend_from_slice(&clause_arcs(((i, -1), (j, -1))));
    }
    SymmetricDigraph::new(g.n(), arcs).expect("edge arcs are mirror-symmetric")
}

/// The symmetric cut side induced by an assignment: all true literals.
/// `assignment[i-1] = +1` puts `i` on the cut side, `-1` puts `-i` there.
pub fn true_literal_side(assignment: &[i8]) -> Vec<SignedVertex> {
    assignment
        .iter()
        .enumerate()
        .map(|(k, &s)| if s >= 0 { (k + 1) as i32 } else { -((k + 1) as i32) })
        .collect()
}

/// Number of arcs running from `side` to its mirror complement.
pub fn arcs_cut(g: &SymmetricDigraph, side: &[SignedVertex]) -> usize {
    let n = g.n();
    let mut in_side = vec![false; 2 * n + 1];
    let slot = |v: SignedVertex| -> usize {
        if v > 0 {
            v as usize
        } else {
            n + (-v) as usize
        }
    };
    for &v in side {
        in_side[slot(v)] = true;
    }
    g.arcs()
        .iter()
        .filter(|&&(u, v)| in_side[slot(u)] && !in_side[slot(v)])
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_k2() {
        let (g, w) = parse_dimacs_graph(b"p edge 2 1\ne 1 2").unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges(), &[(1, 2)]);
        assert!(w.is_empty());
    }

    #[test]
    fn parse_triangle() {
        let (g, _) = parse_dimacs_graph(b"p edge 3 3\ne 1 2\ne 2 3\ne 1 3").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.num_edges(), 3);
    }

    #[test]
    fn parse_duplicate_edges_collapse() {
        let (g, w) = parse_dimacs_graph(b"p edge 3 2\ne 1 2\ne 1 2").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(1, 2)]);
        assert_eq!(w.len(), 1, "m mismatch should warn");
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(parse_dimacs_graph(b"p edge 2 1\ne 1 3").is_err());
        assert!(parse_dimacs_graph(b"p wat 2 1\ne 1 2").is_err());
    }

    #[test]
    fn parse_cnf_basic() {
        let (f, _) = parse_dimacs_cnf(b"p cnf 2 1\n1 2 0").unwrap();
        assert_eq!(f.nvars(), 2);
        assert_eq!(f.clauses(), &[((1, 1), (2, 1))]);

        let (f, _) = parse_dimacs_cnf(b"p cnf 2 2\n1 -2 0\n-1 2 0").unwrap();
        assert_eq!(f.clauses(), &[((1, 1), (2, -1)), ((1, -1), (2, 1))]);
    }

    #[test]
    fn parse_cnf_degenerate_unit_like() {
        let (f, _) = parse_dimacs_cnf(b"p cnf 1 2\n1 1 0\n-1 -1 0").unwrap();
        assert_eq!(f.nvars(), 1);
        assert_eq!(f.clauses().len(), 2);
    }

    #[test]
    fn parse_cnf_rejects_wrong_width() {
        assert!(parse_dimacs_cnf(b"p cnf 3 1\n1 2 3 0").is_err());
        assert!(parse_dimacs_cnf(b"p cnf 2 1\n1 0").is_err());
        assert!(parse_dimacs_cnf(b"p cnf 2 1\n1 5 0").is_err());
    }

    #[test]
    fn clause_reduction_matches_rule() {
        // (x1 | x2) -> arcs (-1, 2) and (-2, 1)
        let f = TwoCnfFormula::new(2, vec![((1, 1), (2, 1))]).unwrap();
        let g = reduce_2cnf_to_symdicut(&f);
        assert_eq!(g.arcs(), &[(-2, 1), (-1, 2)]);

        // (!x1 | x2) -> arcs (1, 2) and (-2, -1), symmetric by the sign rule
        let f = TwoCnfFormula::new(2, vec![((1, -1), (2, 1))]).unwrap();
        let g = reduce_2cnf_to_symdicut(&f);
        assert_eq!(g.arcs(), &[(-2, -1), (1, 2)]);

        let f = TwoCnfFormula::new(3, vec![]).unwrap();
        assert_eq!(reduce_2cnf_to_symdicut(&f).num_arcs(), 0);
    }

    #[test]
    fn uncut_reduction_shape() {
        let g = UndirectedGraph::new(2, [(1, 2)]).unwrap();
        let d = reduce_uncut_to_symdicut(&g);
        // Edge as the clause pair gives four arcs closed under mirroring.
        assert_eq!(d.num_arcs(), 4);
        let edgeless = UndirectedGraph::new(3, []).unwrap();
        assert_eq!(reduce_uncut_to_symdicut(&edgeless).num_arcs(), 0);
    }

    #[test]
    fn factor_two_per_assignment_2cnf() {
        // Exhaustive over assignments for a fixed mixed formula.
        let f = TwoCnfFormula::new(
            3,
            vec![((1, 1), (2, 1)), ((1, -1), (3, 1)), ((2, -1), (3, -1)), ((1, 1), (1, 1))],
        )
        .unwrap();
        let d = reduce_2cnf_to_symdicut(&f);
        for mask in 0..(1u32 << 3) {
            let a: Vec<i8> = (0..3).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }).collect();
            let side = true_literal_side(&a);
            assert_eq!(arcs_cut(&d, &side), 2 * f.violated(&a));
        }
    }

    #[test]
    fn factor_two_per_assignment_uncut() {
        let g = UndirectedGraph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)]).unwrap();
        let d = reduce_uncut_to_symdicut(&g);
        for mask in 0..(1u32 << 4) {
            let a: Vec<i8> = (0..4).map(|b| if mask & (1 << b) != 0 { 1 } else { -1 }).collect();
            let uncut = g
                .edges()
                .iter()
                .filter(|&&(u, v)| a[u - 1] == a[v - 1])
                .count();
            let side = true_literal_side(&a);
            assert_eq!(arcs_cut(&d, &side), 2 * uncut);
        }
    }

    #[test]
    fn asymmetric_arcs_rejected() {
        assert!(SymmetricDigraph::new(2, vec![(-1, 2)]).is_err());
        assert!(SymmetricDigraph::new(2, vec![(-1, 2), (-2, 1)]).is_ok());
    }
}
