//! Minimum-distortion spanning trees.
//!
//! Under canonical weights the contraction of any spanning tree is 1, so the
//! distortion is the largest ratio `d_T / d`. All three searches compare these
//! ratios exactly on the scaled integer view of the metric.
//!
//! Exhaustive search walks Prüfer sequences in lexicographic order. A range
//! of sequence indices can be searched on its own and partial results merged
//! with [`ExhaustivePartial::merge`]; the result only depends on the ranges'
//! union, which is how the command-line tool splits work across threads.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::Range;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scaled::{Length, ScaledMetric};
use crate::tree::{canonical_weights, WeightedTree};
use crate::union_find::UnionFind;
use crate::{with_scaled, MetricSpace};

pub const MAX_EXHAUSTIVE: usize = 9;
pub const MAX_BNB: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exhaustive,
    BranchAndBound,
    Local,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exhaustive => "exhaustive",
            Method::BranchAndBound => "branch-and-bound",
            Method::Local => "local",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub best_tree: WeightedTree,
    pub best_distortion: Rational,
    pub lower_bound: Rational,
    pub method: Method,
    pub trees_examined: u64,
    /// False when a budget ran out before the search space was covered.
    pub complete: bool,
}

/// `n^(n-2)`, the number of labelled trees on `n` vertices.
pub fn prufer_count(n: usize) -> u64 {
    if n < 2 {
        1
    } else {
        (n as u64).pow(n as u32 - 2)
    }
}

fn index_to_sequence(n: usize, mut index: u64, seq: &mut [usize]) {
    for slot in seq.iter_mut().rev() {
        *slot = (index % n as u64) as usize;
        index /= n as u64;
    }
}

/// Odometer step; false on wrap-around.
fn next_sequence(n: usize, seq: &mut [usize]) -> bool {
    for slot in seq.iter_mut().rev() {
        *slot += 1;
        if *slot < n {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Decodes a Prüfer sequence into sorted `(min, max)` edges.
pub fn prufer_decode(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    decode_into(n, seq, &mut vec![0; n], &mut edges);
    edges
}

fn decode_into(n: usize, seq: &[usize], degree: &mut [usize], edges: &mut Vec<(usize, usize)>) {
    edges.clear();
    if n < 2 {
        return;
    }
    degree.iter_mut().for_each(|d| *d = 1);
    for &a in seq {
        degree[a] += 1;
    }
    for &a in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf exists");
        edges.push((leaf.min(a), leaf.max(a)));
        degree[leaf] = 0;
        degree[a] -= 1;
    }
    let mut rest = (0..n).filter(|&i| degree[i] == 1);
    let (u, v) = (
        rest.next().expect("two left"),
        rest.next().expect("two left"),
    );
    edges.push((u, v));
    edges.sort_unstable();
}

/// Every labelled spanning tree on `0..n`, in Prüfer order.
pub fn enumerate_spanning_trees(n: usize) -> Result<impl Iterator<Item = Vec<(usize, usize)>>> {
    if n > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge {
            n,
            max: MAX_EXHAUSTIVE,
        });
    }
    let len = n.saturating_sub(2);
    Ok((0..prufer_count(n)).map(move |i| {
        let mut seq = vec![0; len];
        index_to_sequence(n, i, &mut seq);
        prufer_decode(n, &seq)
    }))
}

/// True if every point can be mapped to every other by an isometry.
pub fn is_vertex_transitive(x: &MetricSpace) -> bool {
    fn extend(x: &MetricSpace, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let k = map.len();
        if k == x.len() {
            return true;
        }
        for img in 0..x.len() {
            if used[img] || (0..k).any(|i| x.dist(i, k) != x.dist(map[i], img)) {
                continue;
            }
            used[img] = true;
            map.push(img);
            if extend(x, map, used) {
                return true;
            }
            map.pop();
            used[img] = false;
        }
        false
    }
    (1..x.len()).all(|v| {
        let mut used = vec![false; x.len()];
        used[v] = true;
        extend(x, &mut vec![v], &mut used)
    })
}

/// Keeps only sequences whose tree gives vertex 0 maximum degree.
fn passes_symmetry(n: usize, seq: &[usize], counts: &mut [usize]) -> bool {
    counts[..n].iter_mut().for_each(|c| *c = 0);
    for &a in seq {
        counts[a] += 1;
    }
    counts[1..n].iter().all(|&c| c <= counts[0])
}

/// Largest `d_T / d` over all pairs as `(num, den)`, or `None` once a pair
/// reaches `cutoff`.
fn expansion<L: Length>(
    m: &ScaledMetric<L>,
    adj: &[Vec<usize>],
    cutoff: Option<&(L, L)>,
    dist: &mut [L],
    stack: &mut Vec<usize>,
    seen: &mut [bool],
) -> Option<(L, L)> {
    let n = m.len();
    let mut best: Option<(L, L)> = None;
    for s in 0..n {
        seen.iter_mut().for_each(|b| *b = false);
        dist[s] = L::zero();
        seen[s] = true;
        stack.clear();
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    dist[v] = dist[u].clone() + m.dist(u, v);
                    stack.push(v);
                }
            }
        }
        for t in s + 1..n {
            let d = m.dist(s, t);
            if let Some((cn, cd)) = cutoff {
                if L::ratio_cmp(&dist[t], d, cn, cd) != Ordering::Less {
                    return None;
                }
            }
            if best
                .as_ref()
                .is_none_or(|(bn, bd)| L::ratio_cmp(&dist[t], d, bn, bd) == Ordering::Greater)
            {
                best = Some((dist[t].clone(), d.clone()));
            }
        }
    }
    // No pairs: (0, 0) stands for the ratio 1.
    Some(best.unwrap_or((L::zero(), L::zero())))
}

fn adjacency_into(n: usize, edges: &[(usize, usize)], adj: &mut Vec<Vec<usize>>) {
    adj.resize_with(n, Vec::new);
    adj.iter_mut().for_each(Vec::clear);
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
}

fn ratio_of<L: Length>(r: &(L, L)) -> Rational {
    if r.1.is_zero() {
        Rational::one()
    } else {
        ScaledMetric::<L>::ratio(&r.0, &r.1)
    }
}

/// Best tree within one range of Prüfer indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustivePartial {
    /// `(distortion, Prüfer index, edges)` of the first strict minimum.
    pub best: Option<(Rational, u64, Vec<(usize, usize)>)>,
    pub examined: u64,
}

impl ExhaustivePartial {
    /// Minimum distortion, ties to the smaller Prüfer index.
    pub fn merge(self, other: ExhaustivePartial) -> ExhaustivePartial {
        let best = match (self.best, other.best) {
            (None, b) | (b, None) => b,
            (Some(a), Some(b)) => {
                if (&b.0, b.1) < (&a.0, a.1) {
                    Some(b)
                } else {
                    Some(a)
                }
            }
        };
        ExhaustivePartial {
            best,
            examined: self.examined + other.examined,
        }
    }
}

fn check_exhaustive(x: &MetricSpace, symmetric: bool) -> Result<()> {
    if x.len() > MAX_EXHAUSTIVE {
        return Err(Error::TooLarge {
            n: x.len(),
            max: MAX_EXHAUSTIVE,
        });
    }
    if symmetric && !is_vertex_transitive(x) {
        return Err(Error::Unsupported(
            "symmetry reduction needs a vertex-transitive space",
        ));
    }
    Ok(())
}

/// Exhaustive search over Prüfer indices in `range`.
pub fn exhaustive_range(
    x: &MetricSpace,
    range: Range<u64>,
    symmetric: bool,
) -> Result<ExhaustivePartial> {
    check_exhaustive(x, symmetric)?;
    let range = range.start..range.end.min(prufer_count(x.len()));
    Ok(with_scaled!(x.scaled(), m => exhaustive_scan(m, range, symmetric)))
}

fn exhaustive_scan<L: Length>(
    m: &ScaledMetric<L>,
    range: Range<u64>,
    symmetric: bool,
) -> ExhaustivePartial {
    let n = m.len();
    let mut out = ExhaustivePartial {
        best: None,
        examined: 0,
    };
    if range.is_empty() {
        return out;
    }
    let mut seq = vec![0; n.saturating_sub(2)];
    index_to_sequence(n.max(1), range.start, &mut seq);
    let (mut degree, mut counts) = (vec![0; n], vec![0; n]);
    let mut edges = Vec::new();
    let mut adj = Vec::new();
    let (mut dist, mut seen, mut stack) = (vec![L::zero(); n], vec![false; n], Vec::new());
    let mut best: Option<((L, L), u64, Vec<(usize, usize)>)> = None;
    for index in range {
        if !symmetric || passes_symmetry(n, &seq, &mut counts) {
            out.examined += 1;
            decode_into(n, &seq, &mut degree, &mut edges);
            adjacency_into(n, &edges, &mut adj);
            let cutoff = best.as_ref().map(|b| &b.0);
            if let Some(r) = expansion(m, &adj, cutoff, &mut dist, &mut stack, &mut seen) {
                best = Some((r, index, edges.clone()));
            }
        }
        next_sequence(n, &mut seq);
    }
    out.best = best.map(|(r, i, e)| (ratio_of(&r), i, e));
    out
}

fn finish_exhaustive(x: &MetricSpace, part: ExhaustivePartial) -> Result<SearchResult> {
    let (best_distortion, _, edges) = part.best.expect("at least one tree");
    Ok(SearchResult {
        best_tree: canonical_weights(x, &edges)?,
        lower_bound: best_distortion.clone(),
        best_distortion,
        method: Method::Exhaustive,
        trees_examined: part.examined,
        complete: true,
    })
}

/// Exact minimum over all spanning trees; ties to the smallest Prüfer
/// sequence.
pub fn min_distortion_exhaustive(x: &MetricSpace) -> Result<SearchResult> {
    min_distortion_exhaustive_with(x, false)
}

/// As [`min_distortion_exhaustive`], optionally restricted to trees in which
/// point 0 has maximum degree. On a vertex-transitive space some optimal tree
/// always survives the restriction, since an isometry moving a vertex of
/// maximum degree to 0 preserves distortion.
pub fn min_distortion_exhaustive_with(x: &MetricSpace, symmetric: bool) -> Result<SearchResult> {
    let part = exhaustive_range(x, 0..prufer_count(x.len()), symmetric)?;
    finish_exhaustive(x, part)
}

/// Collects partial results from independent ranges into a search result.
pub fn exhaustive_from_parts(
    x: &MetricSpace,
    parts: impl IntoIterator<Item = ExhaustivePartial>,
) -> Result<SearchResult> {
    let part = parts.into_iter().fold(
        ExhaustivePartial {
            best: None,
            examined: 0,
        },
        ExhaustivePartial::merge,
    );
    finish_exhaustive(x, part)
}

struct BnbNode<L> {
    next: usize,
    comp: Vec<usize>,
    /// Tree distances between already connected pairs.
    dist: Vec<Option<L>>,
    edges: Vec<(usize, usize)>,
    lb: (L, L),
}

/// Branch and bound over edge inclusion in order of increasing length.
///
/// A partial forest is bounded below by its largest `d_F / d` over pairs it
/// already connects. At most `node_budget` nodes are expanded; on exhaustion
/// the result carries the incumbent and the weakest open bound.
pub fn min_distortion_bnb(x: &MetricSpace, node_budget: u64) -> Result<SearchResult> {
    if x.len() > MAX_BNB {
        return Err(Error::TooLarge {
            n: x.len(),
            max: MAX_BNB,
        });
    }
    let (best_distortion, edges, lb, examined, complete) = with_scaled!(x.scaled(), m => {
        let ((best, edges), lb, examined, complete) = bnb(m, node_budget);
        (ratio_of(&best), edges, ratio_of(&lb), examined, complete)
    });
    Ok(SearchResult {
        best_tree: canonical_weights(x, &edges)?,
        lower_bound: if complete {
            best_distortion.clone()
        } else {
            lb
        },
        best_distortion,
        method: Method::BranchAndBound,
        trees_examined: examined,
        complete,
    })
}

fn max_ratio<L: Length>(a: (L, L), b: (L, L)) -> (L, L) {
    if L::ratio_cmp(&b.0, &b.1, &a.0, &a.1) == Ordering::Greater {
        b
    } else {
        a
    }
}

fn bnb<L: Length>(
    m: &ScaledMetric<L>,
    node_budget: u64,
) -> (((L, L), Vec<(usize, usize)>), (L, L), u64, bool) {
    let n = m.len();
    let mut cand: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    cand.sort_by(|a, b| m.dist(a.0, a.1).cmp(m.dist(b.0, b.1)).then(a.cmp(b)));
    let unit = (
        L::zero() + m.dist(0, n.min(2) - 1),
        L::zero() + m.dist(0, n.min(2) - 1),
    );

    // Incumbent: the first tree along the include-first branch (a minimum
    // spanning tree).
    let mut uf = UnionFind::new(n);
    let mst: Vec<(usize, usize)> = cand
        .iter()
        .copied()
        .filter(|&(u, v)| uf.union(u, v).is_some())
        .collect();
    let mut adj = Vec::new();
    adjacency_into(n, &mst, &mut adj);
    let (mut dist, mut seen, mut stack) = (vec![L::zero(); n], vec![false; n], Vec::new());
    let first = expansion(m, &adj, None, &mut dist, &mut stack, &mut seen).expect("no cutoff");
    let mut incumbent = (first, mst);
    let mut examined = 1u64;
    if n <= 2 {
        let lb = incumbent.0.clone();
        return (incumbent, lb, examined, true);
    }

    let mut open = vec![BnbNode {
        next: 0,
        comp: (0..n).collect(),
        dist: {
            let mut d = vec![None; n * n];
            (0..n).for_each(|i| d[i * n + i] = Some(L::zero()));
            d
        },
        edges: Vec::new(),
        lb: unit.clone(),
    }];
    let mut expanded = 0u64;
    while let Some(node) = open.pop() {
        if L::ratio_cmp(&node.lb.0, &node.lb.1, &incumbent.0 .0, &incumbent.0 .1) != Ordering::Less
        {
            continue;
        }
        if expanded == node_budget {
            open.push(node);
            let weakest = open
                .iter()
                .map(|o| o.lb.clone())
                .min_by(|a, b| L::ratio_cmp(&a.0, &a.1, &b.0, &b.1))
                .expect("non-empty");
            let weakest = max_ratio(unit.clone(), weakest);
            return (incumbent, weakest, examined, false);
        }
        expanded += 1;
        if node.edges.len() == n - 1 {
            examined += 1;
            incumbent = (node.lb.clone(), node.edges.clone());
            continue;
        }
        if node.next == cand.len() || !connectable(n, &node, &cand) {
            continue;
        }
        let (u, v) = cand[node.next];
        // Exclude branch first on the stack so that include is explored first.
        let exclude = BnbNode {
            next: node.next + 1,
            comp: node.comp.clone(),
            dist: node.dist.clone(),
            edges: node.edges.clone(),
            lb: node.lb.clone(),
        };
        if node.comp[u] != node.comp[v] {
            let (cu, cv) = (node.comp[u], node.comp[v]);
            let mut child = BnbNode {
                next: node.next + 1,
                ..node
            };
            let left: Vec<usize> = (0..n).filter(|&i| child.comp[i] == cu).collect();
            let right: Vec<usize> = (0..n).filter(|&i| child.comp[i] == cv).collect();
            let w = m.dist(u, v);
            let mut lb = child.lb.clone();
            for &a in &left {
                let da = child.dist[a * n + u].clone().expect("connected");
                for &b in &right {
                    let d = da.clone() + w + child.dist[v * n + b].as_ref().expect("connected");
                    lb = max_ratio(lb, (d.clone(), m.dist(a, b).clone()));
                    child.dist[a * n + b] = Some(d.clone());
                    child.dist[b * n + a] = Some(d);
                }
            }
            for &b in &right {
                child.comp[b] = cu;
            }
            child.edges.push((u, v));
            child.lb = lb;
            open.push(exclude);
            open.push(child);
        } else {
            open.push(exclude);
        }
    }
    let lb = incumbent.0.clone();
    (incumbent, lb, examined, true)
}

/// Whether the remaining candidate edges can still connect the forest.
fn connectable<L>(n: usize, node: &BnbNode<L>, cand: &[(usize, usize)]) -> bool {
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        uf.union(i, node.comp[i]);
    }
    for &(u, v) in &cand[node.next..] {
        uf.union(u, v);
    }
    uf.size_of(0) == n
}

/// Best-improvement edge swaps starting from `start`, at most `iterations`
/// swaps. The seed fixes the order in which equally good swaps are met.
pub fn improve_local(
    x: &MetricSpace,
    start: &WeightedTree,
    seed: u64,
    iterations: u64,
) -> Result<WeightedTree> {
    if start.len() != x.len() {
        return Err(Error::NotASpanningTree("tree and space differ in size"));
    }
    let edges =
        with_scaled!(x.scaled(), m => local_search(m, start.edge_pairs(), seed, iterations));
    canonical_weights(x, &edges)
}

fn local_search<L: Length>(
    m: &ScaledMetric<L>,
    mut edges: Vec<(usize, usize)>,
    seed: u64,
    iterations: u64,
) -> Vec<(usize, usize)> {
    let n = m.len();
    if n < 3 {
        return edges;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dist, mut seen, mut stack) = (vec![L::zero(); n], vec![false; n], Vec::new());
    let mut adj = Vec::new();
    adjacency_into(n, &edges, &mut adj);
    let mut current =
        expansion(m, &adj, None, &mut dist, &mut stack, &mut seen).expect("no cutoff");
    for _ in 0..iterations {
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.shuffle(&mut rng);
        let mut best: Option<((L, L), usize, (usize, usize))> = None;
        for &k in &order {
            let removed = edges[k];
            let rest: Vec<(usize, usize)> =
                edges.iter().copied().filter(|&e| e != removed).collect();
            let mut uf = UnionFind::new(n);
            for &(u, v) in &rest {
                uf.union(u, v);
            }
            let side = uf.find(removed.0);
            let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| uf.find(i) == side);
            let mut cross: Vec<(usize, usize)> = a
                .iter()
                .flat_map(|&i| b.iter().map(move |&j| (i.min(j), i.max(j))))
                .filter(|&e| e != removed)
                .collect();
            cross.shuffle(&mut rng);
            let mut trial = rest.clone();
            trial.push((0, 0));
            for e in cross {
                *trial.last_mut().expect("pushed") = e;
                adjacency_into(n, &trial, &mut adj);
                let cutoff = best.as_ref().map(|b| &b.0).unwrap_or(&current);
                if let Some(r) = expansion(m, &adj, Some(cutoff), &mut dist, &mut stack, &mut seen)
                {
                    best = Some((r, k, e));
                }
            }
        }
        match best {
            Some((r, k, e)) => {
                edges[k] = e;
                current = r;
            }
            None => break,
        }
    }
    edges.sort_unstable();
    edges
}

/// Wraps a local-search tree into a result with the trivial lower bound 1.
pub fn local_result(x: &MetricSpace, tree: WeightedTree, examined: u64) -> Result<SearchResult> {
    let best_distortion = crate::tree::distortion(x, &tree)?.distortion;
    Ok(SearchResult {
        best_tree: tree,
        best_distortion,
        lower_bound: Rational::one(),
        method: Method::Local,
        trees_examined: examined,
        complete: false,
    })
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Method::Exhaustive),
            "bnb" | "branch-and-bound" => Ok(Method::BranchAndBound),
            "local" => Ok(Method::Local),
            other => Err(Error::UnknownName(other.into())),
        }
    }
}
