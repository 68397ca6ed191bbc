//! Weighted spanning trees over a point set and exact distortion reports.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::union_find::UnionFind;
use crate::MetricSpace;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub weight: Rational,
}

/// A tree whose vertices are exactly the points `0..n` of a metric space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedTree {
    n: usize,
    edges: Vec<TreeEdge>,
}

/// Checks that `pairs` is a spanning tree on `0..n`.
pub fn check_spanning_tree(
    n: usize,
    pairs: impl IntoIterator<Item = (usize, usize)>,
) -> Result<()> {
    let mut uf = UnionFind::new(n);
    let mut count = 0;
    for (u, v) in pairs {
        if u >= n || v >= n {
            return Err(Error::NotASpanningTree("endpoint out of range"));
        }
        if u == v {
            return Err(Error::NotASpanningTree("self loop"));
        }
        if uf.union(u, v).is_none() {
            return Err(Error::NotASpanningTree("cycle"));
        }
        count += 1;
    }
    if n > 0 && count != n - 1 {
        return Err(Error::NotASpanningTree("not connected"));
    }
    Ok(())
}

impl WeightedTree {
    pub fn new(n: usize, edges: Vec<TreeEdge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        check_spanning_tree(n, edges.iter().map(|e| (e.u, e.v)))?;
        if edges.iter().any(|e| e.weight <= Rational::zero()) {
            return Err(Error::NotASpanningTree("non-positive weight"));
        }
        Ok(Self { n, edges })
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    /// Edges as `(min, max)` pairs, sorted.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v)))
            .collect();
        v.sort_unstable();
        v
    }

    /// Neighbours of each vertex as `(neighbour, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        adj
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    pub fn rooted(&self, root: usize) -> RootedTree {
        RootedTree::new(self, root)
    }

    /// Sum of weights along the tree path from `u` to `v`.
    pub fn path_length(&self, u: usize, v: usize) -> Rational {
        self.rooted(0).distance(u, v)
    }
}

/// Parent-pointer view of a tree rooted at one vertex.
#[derive(Clone, Debug)]
pub struct RootedTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    /// Hop count from the root.
    pub depth: Vec<usize>,
    /// Weighted distance from the root.
    pub height: Vec<Rational>,
    /// Vertices in preorder.
    pub order: Vec<usize>,
}

impl RootedTree {
    fn new(t: &WeightedTree, root: usize) -> Self {
        let n = t.len();
        let adj = t.adjacency();
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut height = vec![Rational::zero(); n];
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let mut stack = vec![root];
        seen[root] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &(v, k) in adj[u].iter().rev() {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    height[v] = &height[u] + &t.edges[k].weight;
                    stack.push(v);
                }
            }
        }
        Self {
            root,
            parent,
            depth,
            height,
            order,
        }
    }

    pub fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].expect("non-root has a parent");
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].expect("non-root has a parent");
        }
        while u != v {
            u = self.parent[u].expect("non-root has a parent");
            v = self.parent[v].expect("non-root has a parent");
        }
        u
    }

    pub fn distance(&self, u: usize, v: usize) -> Rational {
        let w = self.lca(u, v);
        &self.height[u] + &self.height[v] - &self.height[w] - &self.height[w]
    }

    /// Vertices on the tree path from `u` to `v`, inclusive.
    pub fn path(&self, u: usize, v: usize) -> Vec<usize> {
        let w = self.lca(u, v);
        let mut left = Vec::new();
        let mut x = u;
        while x != w {
            left.push(x);
            x = self.parent[x].expect("below lca");
        }
        left.push(w);
        let mut right = Vec::new();
        let mut y = v;
        while y != w {
            right.push(y);
            y = self.parent[y].expect("below lca");
        }
        left.extend(right.into_iter().rev());
        left
    }
}

/// Full shortest-path metric of a weighted tree, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMetric {
    n: usize,
    d: Vec<Rational>,
}

impl TreeMetric {
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.d[i * self.n + j]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.d.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// Distances from `src` to every vertex along tree paths.
pub fn distances_from(t: &WeightedTree, adj: &[Vec<(usize, usize)>], src: usize) -> Vec<Rational> {
    let n = t.len();
    let mut out = vec![Rational::zero(); n];
    let mut seen = vec![false; n];
    let mut stack = vec![src];
    seen[src] = true;
    while let Some(u) = stack.pop() {
        for &(v, k) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                out[v] = &out[u] + &t.edges[k].weight;
                stack.push(v);
            }
        }
    }
    out
}

/// `d_w(x, x')`: the sum of weights along the unique tree path.
pub fn tree_metric(t: &WeightedTree) -> TreeMetric {
    let n = t.len();
    let adj = t.adjacency();
    let mut d = Vec::with_capacity(n * n);
    for src in 0..n {
        d.extend(distances_from(t, &adj, src));
    }
    TreeMetric { n, d }
}

/// Weights each edge of a spanning tree by the metric distance of its ends.
///
/// Among all positive weightings of a fixed tree this one has the smallest
/// distortion, so searching over trees never needs other weights.
pub fn canonical_weights(x: &MetricSpace, edges: &[(usize, usize)]) -> Result<WeightedTree> {
    check_spanning_tree(x.len(), edges.iter().copied())?;
    let edges = edges
        .iter()
        .map(|&(u, v)| TreeEdge {
            u,
            v,
            weight: x.dist(u, v).clone(),
        })
        .collect();
    WeightedTree::new(x.len(), edges)
}

/// Exact two-sided distortion of the identity `X -> (X, d_T)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistortionReport {
    /// `max d_T / d`.
    pub expansion: Rational,
    /// `max d / d_T`.
    pub contraction: Rational,
    /// `expansion * contraction`.
    pub distortion: Rational,
    pub witness_expand: (usize, usize),
    pub witness_contract: (usize, usize),
}

/// Running maxima of the two ratios; mergeable so that pair scans can be
/// split across workers. Ties keep the lexicographically smaller pair.
#[derive(Clone, Debug, Default)]
pub struct DistortionScan {
    expand: Option<(Rational, (usize, usize))>,
    contract: Option<(Rational, (usize, usize))>,
}

fn keep_max(slot: &mut Option<(Rational, (usize, usize))>, ratio: Rational, pair: (usize, usize)) {
    let replace = match slot {
        None => true,
        Some((best, at)) => match ratio.cmp(best) {
            Ordering::Greater => true,
            Ordering::Equal => pair < *at,
            Ordering::Less => false,
        },
    };
    if replace {
        *slot = Some((ratio, pair));
    }
}

impl DistortionScan {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records pair `(i, j)` with tree distance `tree_d` and metric distance `d`.
    pub fn observe(&mut self, i: usize, j: usize, tree_d: &Rational, d: &Rational) {
        keep_max(&mut self.expand, tree_d / d, (i, j));
        keep_max(&mut self.contract, d / tree_d, (i, j));
    }

    pub fn merge(mut self, other: DistortionScan) -> Self {
        if let Some((r, p)) = other.expand {
            keep_max(&mut self.expand, r, p);
        }
        if let Some((r, p)) = other.contract {
            keep_max(&mut self.contract, r, p);
        }
        self
    }

    pub fn finish(self) -> DistortionReport {
        let (expansion, witness_expand) = self.expand.unwrap_or((Rational::one(), (0, 0)));
        let (contraction, witness_contract) = self.contract.unwrap_or((Rational::one(), (0, 0)));
        DistortionReport {
            distortion: &expansion * &contraction,
            expansion,
            contraction,
            witness_expand,
            witness_contract,
        }
    }
}

/// Scans the pairs `(i, j)`, `i < j`, with `i` in `rows`.
pub fn distortion_rows(
    x: &MetricSpace,
    tm: &TreeMetric,
    rows: core::ops::Range<usize>,
) -> DistortionScan {
    let mut scan = DistortionScan::new();
    for i in rows {
        for j in i + 1..x.len() {
            scan.observe(i, j, tm.get(i, j), x.dist(i, j));
        }
    }
    scan
}

/// Exact extrema of `d_T / d` over all pairs, with witnesses.
pub fn distortion(x: &MetricSpace, t: &WeightedTree) -> Result<DistortionReport> {
    if t.len() != x.len() {
        return Err(Error::NotASpanningTree("tree and space differ in size"));
    }
    let tm = tree_metric(t);
    Ok(distortion_rows(x, &tm, 0..x.len()).finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::gen_binary_leaves;
    use crate::rational::{int, ratio};
    use alloc::string::ToString;

    fn tree(n: usize, e: &[(usize, usize, i64)]) -> WeightedTree {
        WeightedTree::new(
            n,
            e.iter()
                .map(|&(u, v, w)| TreeEdge {
                    u,
                    v,
                    weight: int(w),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn path_sums() {
        let t = tree(2, &[(0, 1, 2)]);
        assert_eq!(*tree_metric(&t).get(0, 1), int(2));
        let t = tree(3, &[(0, 1, 2), (1, 2, 4)]);
        let tm = tree_metric(&t);
        assert_eq!(*tm.get(0, 2), int(6));
        assert_eq!(*tm.get(2, 0), int(6));
        assert_eq!(t.path_length(2, 0), int(6));
        assert_eq!(t.rooted(2).path(0, 2), vec![0, 1, 2]);
    }

    #[test]
    fn star_on_x2() {
        // 00 = 0, 01 = 1, 10 = 2, 11 = 3
        let x = gen_binary_leaves(2).unwrap();
        let t = canonical_weights(&x, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(*tree_metric(&t).get(1, 3), int(8));
        let r = distortion(&x, &t).unwrap();
        assert_eq!(r.distortion, int(4));
        assert_eq!(r.witness_expand, (1, 3));
        assert_eq!(r.contraction, int(1));
    }

    #[test]
    fn canonical_tree_on_x2() {
        let x = gen_binary_leaves(2).unwrap();
        // 00-10, 00-01, 01-11
        let t = canonical_weights(&x, &[(0, 2), (0, 1), (1, 3)]).unwrap();
        let w: Vec<_> = t.edges().iter().map(|e| e.weight.clone()).collect();
        assert_eq!(w, vec![int(2), int(4), int(2)]);
        let r = distortion(&x, &t).unwrap();
        assert_eq!(r.distortion, int(2));
        assert_eq!(r.expansion, int(2));
        assert_eq!(r.witness_expand, (2, 3));
        assert_eq!(*tree_metric(&t).get(2, 3), int(8));
    }

    #[test]
    fn identity_has_distortion_one() {
        let t = tree(4, &[(0, 1, 3), (1, 2, 1), (1, 3, 5)]);
        let tm = tree_metric(&t);
        let labels = (0..4).map(|i| i.to_string()).collect();
        let x = MetricSpace::new(labels, tm.rows()).unwrap();
        let r = distortion(&x, &t).unwrap();
        assert_eq!(r.distortion, int(1));
    }

    #[test]
    fn non_canonical_weights_contract() {
        let x = gen_binary_leaves(1).unwrap();
        let t = WeightedTree::new(
            2,
            vec![TreeEdge {
                u: 0,
                v: 1,
                weight: int(1),
            }],
        )
        .unwrap();
        let r = distortion(&x, &t).unwrap();
        assert_eq!(r.expansion, ratio(1, 2));
        assert_eq!(r.contraction, int(2));
        assert_eq!(r.distortion, int(1));
    }

    #[test]
    fn spanning_tree_errors() {
        let x = gen_binary_leaves(2).unwrap();
        assert!(matches!(
            canonical_weights(&x, &[(0, 1), (1, 2)]),
            Err(Error::NotASpanningTree(_))
        ));
        assert!(matches!(
            canonical_weights(&x, &[(0, 1), (1, 0), (2, 3)]),
            Err(Error::NotASpanningTree("cycle"))
        ));
        assert!(matches!(
            canonical_weights(&x, &[(0, 1), (1, 2), (3, 3)]),
            Err(Error::NotASpanningTree("self loop"))
        ));
        assert!(matches!(
            canonical_weights(&x, &[(0, 1), (1, 2), (3, 9)]),
            Err(Error::NotASpanningTree(_))
        ));
        assert!(WeightedTree::new(
            2,
            vec![TreeEdge {
                u: 0,
                v: 1,
                weight: int(0)
            }]
        )
        .is_err());
    }

    #[test]
    fn two_point_canonical() {
        let x = gen_binary_leaves(1).unwrap();
        let t = canonical_weights(&x, &[(0, 1)]).unwrap();
        assert_eq!(t.edges()[0].weight, int(2));
    }
}
