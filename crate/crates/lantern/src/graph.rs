//! The planar multigraph of a model diagram, its spanning-tree count and Goeritz form.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::kirby::{linking_matrix, ModelDiagram};
use crate::matrix::SymMatrix;

/// Undirected multigraph on vertices 1..=k without loops.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiGraph {
    vertices: usize,
    edges: BTreeMap<(usize, usize), u64>,
}

impl MultiGraph {
    pub fn new(vertices: usize) -> Self {
        MultiGraph {
            vertices,
            edges: BTreeMap::new(),
        }
    }

    pub fn add_edges(&mut self, a: usize, b: usize, count: u64) -> Result<()> {
        if a == b {
            return Err(invalid("loops are not allowed"));
        }
        if a == 0 || b == 0 || a > self.vertices || b > self.vertices {
            return Err(invalid(format!(
                "vertex out of range 1..={}",
                self.vertices
            )));
        }
        if count > 0 {
            *self.edges.entry((a.min(b), a.max(b))).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn multiplicity(&self, a: usize, b: usize) -> u64 {
        self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.edges.iter().map(|(&k, &m)| (k, m))
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.values().sum()
    }

    fn laplacian(&self) -> SymMatrix {
        let mut l = SymMatrix::zeros(self.vertices);
        for (&(a, b), &m) in &self.edges {
            let m = BigInt::from(m);
            let (a, b) = (a - 1, b - 1);
            l.set(a, a, l.get(a, a) + &m);
            l.set(b, b, l.get(b, b) + &m);
            l.set(a, b, l.get(a, b) - &m);
        }
        l
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in 1..=self.vertices {
            let _ = writeln!(s, "  v{v};");
        }
        for (&(a, b), &m) in &self.edges {
            for _ in 0..m {
                let _ = writeln!(s, "  v{a} -- v{b};");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// JSON form: `{"vertices": k, "edges": {"a-b": multiplicity}}`.
impl Serialize for MultiGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json {
            vertices: usize,
            edges: BTreeMap<String, u64>,
        }
        let edges = self
            .edges
            .iter()
            .map(|(&(a, b), &m)| (format!("{a}-{b}"), m))
            .collect();
        Json {
            vertices: self.vertices,
            edges,
        }
        .serialize(s)
    }
}

/// Vertices v₁…vₙ₊₁; pᵢ edges vᵢ–vᵢ₊₁ and qᵢ edges vᵢ–vₙ₊₁.
pub fn graph_from_model(m: &ModelDiagram) -> MultiGraph {
    let n = m.n() as usize;
    let mut g = MultiGraph::new(n + 1);
    for (i, &p) in m.p().iter().enumerate() {
        g.add_edges(i + 1, i + 2, p as u64).expect("valid vertices");
    }
    for (i, &q) in m.q().iter().enumerate() {
        g.add_edges(i + 1, n + 1, q as u64).expect("valid vertices");
    }
    g
}

/// Matrix-tree theorem; 0 for a disconnected graph.
pub fn spanning_tree_count(g: &MultiGraph) -> BigInt {
    match g.vertices {
        0 => BigInt::from(0),
        k => g.laplacian().remove(k - 1).det(),
    }
}

/// Negated reduced Laplacian with the root vertex (1-based) deleted.
pub fn goeritz_matrix(g: &MultiGraph, root: usize) -> Result<SymMatrix> {
    if root == 0 || root > g.vertices {
        return Err(invalid(format!(
            "root {root} out of range 1..={}",
            g.vertices
        )));
    }
    Ok(g.laplacian().remove(root - 1).neg())
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ConsistencyReport {
    pub model: ModelDiagram,
    #[serde(with = "crate::bigjson")]
    pub linking_det: BigInt,
    #[serde(with = "crate::bigjson")]
    pub tree_count: BigInt,
    #[serde(with = "crate::bigjson")]
    pub goeritz_det: BigInt,
    pub passed: bool,
}

/// |det(linking matrix)| = spanning trees = |det(Goeritz)|, Goeritz rooted at vₙ₊₁.
pub fn consistency_check(m: &ModelDiagram) -> ConsistencyReport {
    let g = graph_from_model(m);
    let linking_det = linking_matrix(m).matrix().det().abs();
    let tree_count = spanning_tree_count(&g);
    let goeritz_det = goeritz_matrix(&g, g.vertices())
        .expect("root exists")
        .det()
        .abs();
    let passed = linking_det == tree_count && tree_count == goeritz_det;
    ConsistencyReport {
        model: m.clone(),
        linking_det,
        tree_count,
        goeritz_det,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(p: &[u32], q: &[u32]) -> ModelDiagram {
        ModelDiagram::new(p.to_vec(), q.to_vec()).unwrap()
    }

    /// Counts spanning trees by trying every (k−1)-subset of the edge list.
    fn brute_force_trees(g: &MultiGraph) -> u64 {
        let k = g.vertices();
        if k == 0 {
            return 0;
        }
        let list: Vec<(usize, usize)> = g
            .edges()
            .flat_map(|(e, m)| std::iter::repeat_n(e, m as usize))
            .collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        fn go(
            list: &[(usize, usize)],
            start: usize,
            chosen: &mut Vec<usize>,
            need: usize,
            k: usize,
        ) -> u64 {
            if chosen.len() == need {
                let mut parent: Vec<usize> = (0..=k).collect();
                for &e in chosen.iter() {
                    let (a, b) = list[e];
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra == rb {
                        return 0;
                    }
                    parent[ra] = rb;
                }
                return 1;
            }
            let mut total = 0;
            for e in start..list.len() {
                chosen.push(e);
                total += go(list, e + 1, chosen, need, k);
                chosen.pop();
            }
            total
        }
        go(&list, 0, &mut Vec::new(), k - 1, k)
    }

    #[test]
    fn model_graphs() {
        let g = graph_from_model(&model(&[], &[5]));
        assert_eq!((g.vertices(), g.multiplicity(1, 2)), (2, 5));
        assert_eq!(spanning_tree_count(&g), BigInt::from(5));
        let tri = graph_from_model(&model(&[1], &[1, 1]));
        assert_eq!(tri.edge_count(), 3);
        assert_eq!(spanning_tree_count(&tri), BigInt::from(3));
        assert_eq!(brute_force_trees(&tri), 3);
        let g = graph_from_model(&model(&[2], &[3, 4]));
        assert_eq!(
            (
                g.multiplicity(1, 2),
                g.multiplicity(1, 3),
                g.multiplicity(2, 3)
            ),
            (2, 3, 4)
        );
        assert_eq!(spanning_tree_count(&g), BigInt::from(26));
        assert_eq!(brute_force_trees(&g), 26);
    }

    #[test]
    fn goeritz_examples() {
        let g = graph_from_model(&model(&[], &[7]));
        assert_eq!(
            goeritz_matrix(&g, 2).unwrap(),
            SymMatrix::from_i64(&[vec![-7]]).unwrap()
        );
        let tri = graph_from_model(&model(&[1], &[1, 1]));
        let gm = goeritz_matrix(&tri, 3).unwrap();
        assert_eq!(
            gm,
            SymMatrix::from_i64(&[vec![-2, 1], vec![1, -2]]).unwrap()
        );
        assert_eq!(gm.det(), BigInt::from(3));
        assert!(gm.invariants().is_negative_definite());
        assert!(goeritz_matrix(&tri, 4).is_err());
        let mut split = MultiGraph::new(4);
        split.add_edges(1, 2, 2).unwrap();
        split.add_edges(3, 4, 1).unwrap();
        assert_eq!(spanning_tree_count(&split), BigInt::from(0));
        assert_eq!(goeritz_matrix(&split, 1).unwrap().det(), BigInt::from(0));
    }

    #[test]
    fn consistency_on_grid() {
        assert!(consistency_check(&model(&[], &[5])).passed);
        let r = consistency_check(&model(&[1], &[1, 1]));
        assert_eq!(
            (r.linking_det.clone(), r.tree_count.clone()),
            (3.into(), 3.into())
        );
        for n in 1..=3usize {
            let total = 3usize.pow(2 * n as u32 - 1);
            for code in 0..total {
                let digits: Vec<u32> = (0..2 * n - 1)
                    .map(|k| (code / 3usize.pow(k as u32) % 3) as u32 + 1)
                    .collect();
                let (p, q) = digits.split_at(n - 1);
                assert!(consistency_check(&model(p, q)).passed, "{p:?} {q:?}");
            }
        }
    }

    #[test]
    fn output_formats() {
        let g = graph_from_model(&model(&[1], &[2, 1]));
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"vertices":3,"edges":{"1-2":1,"1-3":2,"2-3":1}}"#
        );
        let dot = g.to_dot();
        assert!(dot.starts_with("graph G {"));
        assert_eq!(dot.matches("v1 -- v3;").count(), 2);
        let mut g = MultiGraph::new(2);
        assert!(g.add_edges(1, 1, 1).is_err());
        assert!(g.add_edges(1, 3, 1).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = MultiGraph> {
        (1usize..=7).prop_flat_map(|k| {
            prop::collection::vec((1..=k, 1..=k), 0..=12).prop_map(move |pairs| {
                let mut g = MultiGraph::new(k);
                for (a, b) in pairs {
                    if a != b {
                        g.add_edges(a, b, 1).unwrap();
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn matrix_tree_matches_enumeration(g in arb_graph()) {
            prop_assert_eq!(spanning_tree_count(&g), BigInt::from(brute_force_trees(&g)));
        }

        #[test]
        fn any_root_gives_the_same_count(g in arb_graph(), r in 1usize..=7) {
            let root = 1 + (r - 1) % g.vertices();
            prop_assert_eq!(goeritz_matrix(&g, root).unwrap().det().abs(), spanning_tree_count(&g));
        }

        #[test]
        fn two_vertex_bundles_multiply(p in 1u32..6, q1 in 1u32..6, q2 in 1u32..6) {
            let g = graph_from_model(&model(&[p], &[q1, q2]));
            prop_assert_eq!(spanning_tree_count(&g), BigInt::from(p * q1 + p * q2 + q1 * q2));
        }
    }
}
