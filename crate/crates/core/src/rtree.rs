//! Geometric tree realizations of 0-hyperbolic spaces.
//!
//! An [`RTree`] is a finite tree with rational edge lengths whose nodes are
//! either input points or Steiner branch nodes. Points of the geometric
//! realization are addressed by [`TreeLocation`].

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metric::four_point_violation;
use crate::rational::{int, Rational};
use crate::tree::WeightedTree;
use crate::union_find::UnionFind;
use crate::MetricSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Point(usize),
    Steiner,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct REdge {
    pub a: usize,
    pub b: usize,
    pub length: Rational,
}

/// A point of the geometric realization: a node, or the point at distance
/// `offset` from `edges[edge].a` strictly inside an edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreeLocation {
    Node(usize),
    Edge { edge: usize, offset: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RTree {
    kinds: Vec<NodeKind>,
    edges: Vec<REdge>,
    adj: Vec<Vec<(usize, usize)>>,
    embed: Vec<usize>,
}

impl RTree {
    fn with_points(points: usize) -> Self {
        Self {
            kinds: Vec::new(),
            edges: Vec::new(),
            adj: Vec::new(),
            embed: vec![usize::MAX; points],
        }
    }

    fn add_node(&mut self, kind: NodeKind) -> usize {
        self.kinds.push(kind);
        self.adj.push(Vec::new());
        let id = self.kinds.len() - 1;
        if let NodeKind::Point(p) = kind {
            self.embed[p] = id;
        }
        id
    }

    fn add_edge(&mut self, a: usize, b: usize, length: Rational) -> usize {
        let k = self.edges.len();
        self.edges.push(REdge { a, b, length });
        self.adj[a].push((b, k));
        self.adj[b].push((a, k));
        k
    }

    /// Splits edge `e` at `offset` from its `a` end; returns the new node.
    fn subdivide(&mut self, e: usize, offset: Rational, kind: NodeKind) -> usize {
        let s = self.add_node(kind);
        let REdge { a, b, length } = self.edges[e].clone();
        let rest = &length - &offset;
        self.edges[e] = REdge {
            a,
            b: s,
            length: offset,
        };
        for slot in self.adj[a].iter_mut() {
            if slot.1 == e {
                slot.0 = s;
            }
        }
        self.adj[b].retain(|&(_, k)| k != e);
        self.adj[s].push((a, e));
        self.add_edge(s, b, rest);
        s
    }

    /// The geometric realization of a weighted tree on the points of a space.
    pub fn from_weighted_tree(t: &WeightedTree) -> Self {
        let mut r = Self::with_points(t.len());
        for p in 0..t.len() {
            r.add_node(NodeKind::Point(p));
        }
        for e in t.edges() {
            r.add_edge(e.u, e.v, e.weight.clone());
        }
        r
    }

    pub fn node_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, node: usize) -> NodeKind {
        self.kinds[node]
    }

    pub fn edges(&self) -> &[REdge] {
        &self.edges
    }

    /// Neighbours of `node` as `(neighbour, edge index)`.
    pub fn neighbours(&self, node: usize) -> &[(usize, usize)] {
        &self.adj[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// Node carrying input point `p`.
    pub fn embed(&self, p: usize) -> usize {
        self.embed[p]
    }

    pub fn point_count(&self) -> usize {
        self.embed.len()
    }

    pub fn steiner_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| **k == NodeKind::Steiner)
            .count()
    }

    /// Nodes of degree other than two: the singular points of the realization.
    pub fn singular_nodes(&self) -> Vec<usize> {
        (0..self.node_count())
            .filter(|&v| self.degree(v) != 2)
            .collect()
    }

    /// Distances from `src` to every node.
    pub fn node_distances(&self, src: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![src];
        seen[src] = true;
        while let Some(u) = stack.pop() {
            for &(v, k) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    out[v] = &out[u] + &self.edges[k].length;
                    stack.push(v);
                }
            }
        }
        out
    }

    /// Node path from `from` to `to` as `(node, edge used to reach it)`.
    pub fn node_path(&self, from: usize, to: usize) -> Vec<(usize, Option<usize>)> {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            if u == to {
                break;
            }
            for &(v, k) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    prev[v] = Some((u, k));
                    stack.push(v);
                }
            }
        }
        let mut path = Vec::new();
        let mut cur = to;
        loop {
            match prev[cur] {
                Some((p, k)) => {
                    path.push((cur, Some(k)));
                    cur = p;
                }
                None => {
                    path.push((cur, None));
                    break;
                }
            }
        }
        path.reverse();
        path
    }

    /// Location at distance `t` from node `from` along the path to node `to`
    /// (`0 <= t <= d(from, to)`).
    pub fn locate_along(&self, from: usize, to: usize, t: &Rational) -> TreeLocation {
        let path = self.node_path(from, to);
        let mut walked = Rational::zero();
        for w in path.windows(2) {
            let (u, _) = w[0];
            let (v, k) = w[1];
            let k = k.expect("edge into non-first node");
            if walked == *t {
                return TreeLocation::Node(u);
            }
            let next = &walked + &self.edges[k].length;
            if next > *t {
                let into = t - &walked;
                let offset = if self.edges[k].a == u {
                    into
                } else {
                    &self.edges[k].length - into
                };
                return TreeLocation::Edge { edge: k, offset };
            }
            walked = next;
            if walked == *t {
                return TreeLocation::Node(v);
            }
        }
        TreeLocation::Node(to)
    }

    /// Checks connectivity, acyclicity, positive lengths, Steiner degrees and
    /// (given `x`) exact realization of every pairwise distance.
    pub fn verify(&self, x: Option<&MetricSpace>) -> Result<()> {
        let n = self.node_count();
        if n == 0 || self.edges.len() + 1 != n {
            return Err(Error::BoundViolation("realization is not a tree".into()));
        }
        let mut uf = UnionFind::new(n);
        for e in &self.edges {
            if e.length <= Rational::zero() || uf.union(e.a, e.b).is_none() {
                return Err(Error::BoundViolation(
                    "realization has a cycle or bad length".into(),
                ));
            }
        }
        for v in 0..n {
            if self.kinds[v] == NodeKind::Steiner && self.degree(v) < 3 {
                return Err(Error::BoundViolation("Steiner node of degree < 3".into()));
            }
        }
        if let Some(x) = x {
            if let Some((i, j)) = self.first_mismatch(x) {
                return Err(Error::BoundViolation(alloc::format!(
                    "realized distance of ({i},{j}) differs from the metric"
                )));
            }
        }
        Ok(())
    }

    fn first_mismatch(&self, x: &MetricSpace) -> Option<(usize, usize)> {
        for i in 0..x.len() {
            let d = self.node_distances(self.embed[i]);
            for j in i + 1..x.len() {
                if d[self.embed[j]] != *x.dist(i, j) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// Realizes a 0-hyperbolic space as a tree with Steiner nodes.
///
/// Points are inserted in label order. With base point `x0`, a new point `p`
/// branches off the path from `x0` to the embedded `b` maximizing the Gromov
/// product `(p | b)_{x0}`, at that distance from `x0`, and hangs at distance
/// `d(x0, p) - (p | b)_{x0}` from the branch point. Afterwards every pairwise
/// distance is checked exactly; any mismatch means the input is not
/// 0-hyperbolic.
pub fn realize_rtree(x: &MetricSpace) -> Result<RTree> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x.label(a).cmp(x.label(b)));
    let mut r = RTree::with_points(n);
    let x0 = order[0];
    r.add_node(NodeKind::Point(x0));
    let two = int(2);
    let fail = || Error::NotZeroHyperbolic(four_point_violation(x).unwrap_or([usize::MAX; 4]));

    for (k, &p) in order.iter().enumerate().skip(1) {
        let mut best: Option<(Rational, usize)> = None;
        for &b in &order[..k] {
            let g = (x.dist(x0, p) + x.dist(x0, b) - x.dist(p, b)) / &two;
            if best.as_ref().is_none_or(|(bg, _)| g > *bg) {
                best = Some((g, b));
            }
        }
        let (g, b) = best.expect("x0 is embedded");
        let hang = x.dist(x0, p) - &g;
        let at = r.locate_along(r.embed(x0), r.embed(b), &g);
        if hang.is_zero() {
            match at {
                TreeLocation::Node(v) => match r.kinds[v] {
                    NodeKind::Steiner => {
                        r.kinds[v] = NodeKind::Point(p);
                        r.embed[p] = v;
                    }
                    NodeKind::Point(_) => return Err(fail()),
                },
                TreeLocation::Edge { edge, offset } => {
                    r.subdivide(edge, offset, NodeKind::Point(p));
                }
            }
        } else {
            let base = match at {
                TreeLocation::Node(v) => v,
                TreeLocation::Edge { edge, offset } => r.subdivide(edge, offset, NodeKind::Steiner),
            };
            let leaf = r.add_node(NodeKind::Point(p));
            r.add_edge(base, leaf, hang);
        }
    }
    if r.first_mismatch(x).is_some() {
        return Err(fail());
    }
    Ok(r)
}

/// A connected component of the realization with the input points removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Edges whose open segments belong to the component, ascending.
    pub edges: Vec<usize>,
    /// Steiner nodes inside the component, ascending.
    pub steiner: Vec<usize>,
    /// Input points adjacent to the component, ascending.
    pub boundary: Vec<usize>,
}

/// Components of the realization minus the embedded input points, ordered
/// by smallest edge index.
pub fn complement_components(r: &RTree) -> Vec<Component> {
    let n = r.node_count();
    let mut uf = UnionFind::new(n);
    for e in &r.edges {
        if r.kinds[e.a] == NodeKind::Steiner && r.kinds[e.b] == NodeKind::Steiner {
            uf.union(e.a, e.b);
        }
    }
    // Key: Steiner root, or `n + edge` for an edge between two points.
    let mut slot: alloc::collections::BTreeMap<usize, usize> = Default::default();
    let mut comps: Vec<Component> = Vec::new();
    for (k, e) in r.edges.iter().enumerate() {
        let key = match (r.kinds[e.a], r.kinds[e.b]) {
            (NodeKind::Steiner, _) => uf.find(e.a),
            (_, NodeKind::Steiner) => uf.find(e.b),
            _ => n + k,
        };
        let idx = *slot.entry(key).or_insert_with(|| {
            comps.push(Component {
                edges: Vec::new(),
                steiner: Vec::new(),
                boundary: Vec::new(),
            });
            comps.len() - 1
        });
        let c = &mut comps[idx];
        c.edges.push(k);
        for v in [e.a, e.b] {
            match r.kinds[v] {
                NodeKind::Point(p) => c.boundary.push(p),
                NodeKind::Steiner => c.steiner.push(v),
            }
        }
    }
    for c in &mut comps {
        c.boundary.sort_unstable();
        c.boundary.dedup();
        c.steiner.sort_unstable();
        c.steiner.dedup();
    }
    comps
}

/// Midpoint of the component's diametral path between boundary points. The
/// diametral pair is the lexicographically smallest pair of maximal distance.
pub fn component_root(r: &RTree, comp: &Component) -> TreeLocation {
    let mut best: Option<(Rational, usize, usize)> = None;
    for (k, &a) in comp.boundary.iter().enumerate() {
        let d = r.node_distances(r.embed(a));
        for &b in &comp.boundary[k + 1..] {
            let dab = &d[r.embed(b)];
            if best.as_ref().is_none_or(|(bd, _, _)| dab > bd) {
                best = Some((dab.clone(), a, b));
            }
        }
    }
    let (diam, a, b) = best.expect("component has two boundary points");
    r.locate_along(r.embed(a), r.embed(b), &(diam / int(2)))
}
