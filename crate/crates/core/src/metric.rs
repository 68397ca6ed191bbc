//! Finite metric spaces: validation, ultrametric and four-point checks,
//! chain components and the exact Nagata constant.
//!
//! # Why scanning distance values is enough
//!
//! Let `v_1 < ... < v_k` be the distinct off-diagonal distances. The threshold
//! graph `{d <= s}` only changes when `s` crosses some `v_j`, so the chain
//! partition is constant on each interval `[v_j, v_{j+1})` (and on
//! `[v_k, inf)`), and below `v_1` every block is a singleton of diameter 0.
//! On one of those intervals the largest block diameter is a fixed number
//! `D_j` while `s` grows, so `D_j / s` is largest at the left endpoint. The
//! smallest admissible constant `c` with `diam [x]_s <= c s` for all `s` is
//! therefore `max_j D_j / v_j`, and it is attained. Chain components at
//! scale `s` are pairwise more than `s` apart, so they form an admissible
//! covering; conversely any covering whose members are more than `s` apart
//! must contain each chain component in one member. Hence the scan computes
//! the Nagata constant under either definition.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scaled::{Length, ScaledMetric};
use crate::union_find::UnionFind;
use crate::with_scaled;

/// A finite metric space with exact rational distances.
///
/// Points are identified by index; labels are kept for IO and for
/// deterministic tie-breaking, which always follows index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    labels: Vec<String>,
    dist: Vec<Rational>,
}

impl MetricSpace {
    /// Validates a labelled square matrix.
    pub fn new(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self> {
        validate_metric(labels, rows)
    }

    /// Builds a space from a distance function evaluated on `i < j`.
    pub fn from_fn(
        labels: Vec<String>,
        mut f: impl FnMut(usize, usize) -> Rational,
    ) -> Result<Self> {
        let n = labels.len();
        let mut dist = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                dist[j * n + i] = d.clone();
                dist[i * n + j] = d;
            }
        }
        Self::from_flat(labels, dist)
    }

    fn from_flat(labels: Vec<String>, dist: Vec<Rational>) -> Result<Self> {
        let space = MetricSpace { labels, dist };
        space.check()?;
        Ok(space)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> &Rational {
        &self.dist[i * self.len() + j]
    }

    /// Row-major `n * n` distance matrix.
    pub fn raw_matrix(&self) -> &[Rational] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.dist.chunks(self.len()).map(|r| r.to_vec()).collect()
    }

    /// Unordered pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    /// Minimum positive distance; `None` for a single point.
    pub fn separation(&self) -> Option<Rational> {
        self.pairs().map(|(i, j)| self.dist(i, j)).min().cloned()
    }

    pub fn diameter(&self) -> Rational {
        self.pairs()
            .map(|(i, j)| self.dist(i, j))
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Distinct off-diagonal distances, ascending.
    pub fn distinct_distances(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.pairs().map(|(i, j)| self.dist(i, j).clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Restriction to `points` (in the given order).
    pub fn subspace(&self, points: &[usize]) -> MetricSpace {
        let m = points.len();
        let mut dist = Vec::with_capacity(m * m);
        for &a in points {
            for &b in points {
                dist.push(self.dist(a, b).clone());
            }
        }
        MetricSpace {
            labels: points.iter().map(|&p| self.labels[p].clone()).collect(),
            dist,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        if n == 0 {
            return Err(Error::EmptySpace);
        }
        let mut sorted: Vec<&String> = self.labels.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateLabel(w[0].clone()));
        }
        for i in 0..n {
            if !self.dist(i, i).is_zero() {
                return Err(Error::NonZeroDiagonal(i));
            }
        }
        for (i, j) in self.pairs() {
            if self.dist(i, j) != self.dist(j, i) {
                return Err(Error::AsymmetricMatrix { i, j });
            }
        }
        let zero = Rational::zero();
        for (i, j) in self.pairs() {
            if *self.dist(i, j) <= zero {
                return Err(Error::NegativeOrZeroOffDiagonal { i, j });
            }
        }
        if let Some((a, b, c)) = with_scaled!(self.scaled(), m => triangle_violation(m)) {
            return Err(Error::TriangleViolation { a, b, c });
        }
        Ok(())
    }
}

/// Checks every metric axiom and returns the space, or the first violation.
///
/// Triangle witnesses `(a, b, c)` satisfy `d(a, c) > d(a, b) + d(b, c)` and are
/// the first such triple in `(a, c, b)` lexicographic order.
pub fn validate_metric(labels: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<MetricSpace> {
    let n = labels.len();
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            labels: n,
            rows: rows.len(),
        });
    }
    let mut dist = Vec::with_capacity(n * n);
    for (row, r) in rows.into_iter().enumerate() {
        if r.len() != n {
            return Err(Error::RaggedRow {
                row,
                len: r.len(),
                expected: n,
            });
        }
        dist.extend(r);
    }
    MetricSpace::from_flat(labels, dist)
}

fn triangle_violation<L: Length>(m: &ScaledMetric<L>) -> Option<(usize, usize, usize)> {
    let n = m.len();
    for a in 0..n {
        for c in a + 1..n {
            let dac = m.dist(a, c);
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                if *dac > m.dist(a, b).clone() + m.dist(b, c) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// First triple (lexicographic) violating the strong triangle inequality.
pub fn ultrametric_violation(x: &MetricSpace) -> Option<[usize; 3]> {
    let n = x.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (x.dist(i, j), x.dist(j, k), x.dist(i, k));
                // Strong triangle inequality for every labelling of the
                // triple: the maximum is attained at least twice.
                let max = a.max(b).max(c);
                let hits = [a, b, c].iter().filter(|v| **v == max).count();
                if hits < 2 {
                    return Some([i, j, k]);
                }
            }
        }
    }
    None
}

/// `d(x, y) <= max(d(x, z), d(z, y))` for all triples.
pub fn is_ultrametric(x: &MetricSpace) -> bool {
    ultrametric_violation(x).is_none()
}

/// First 4-subset (lexicographic) on which the four-point condition fails.
pub fn four_point_violation(x: &MetricSpace) -> Option<[usize; 4]> {
    with_scaled!(x.scaled(), m => four_point_scan(m))
}

fn four_point_scan<L: Length>(m: &ScaledMetric<L>) -> Option<[usize; 4]> {
    let n = m.len();
    for a in 0..n {
        for b in a + 1..n {
            let dab = m.dist(a, b);
            for c in b + 1..n {
                let (dac, dbc) = (m.dist(a, c), m.dist(b, c));
                for d in c + 1..n {
                    let s1 = dab.clone() + m.dist(c, d);
                    let s2 = dac.clone() + m.dist(b, d);
                    let s3 = m.dist(a, d).clone() + dbc;
                    let mut s = [s1, s2, s3];
                    s.sort();
                    if s[1] != s[2] {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

/// Four-point condition over all unordered 4-subsets and the three pairings.
pub fn is_zero_hyperbolic(x: &MetricSpace) -> bool {
    four_point_violation(x).is_none()
}

/// Partition of the points into chain components at one scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    /// Blocks with sorted members, ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    pub scale: Rational,
}

impl Partition {
    /// `block_of[p]` is the index into `blocks` of the block containing `p`.
    pub fn block_of(&self) -> Vec<usize> {
        let n = self.blocks.iter().map(Vec::len).sum();
        let mut out = vec![usize::MAX; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &p in block {
                out[p] = b;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn blocks_from_union_find(uf: &mut UnionFind, n: usize) -> Vec<Vec<usize>> {
    let mut slot = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for p in 0..n {
        let r = uf.find(p);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(p);
    }
    blocks
}

/// Connected components of the graph with edges `d(x, x') <= s`.
pub fn chain_components(x: &MetricSpace, s: &Rational) -> Result<Partition> {
    if *s <= Rational::zero() {
        return Err(Error::NonPositiveScale);
    }
    let n = x.len();
    let mut uf = UnionFind::new(n);
    for (i, j) in x.pairs() {
        if x.dist(i, j) <= s {
            uf.union(i, j);
        }
    }
    Ok(Partition {
        blocks: blocks_from_union_find(&mut uf, n),
        scale: s.clone(),
    })
}

/// Diameter of a point subset.
pub fn subset_diameter(x: &MetricSpace, block: &[usize]) -> Rational {
    let mut best = Rational::zero();
    for (k, &a) in block.iter().enumerate() {
        for &b in &block[k + 1..] {
            if *x.dist(a, b) > best {
                best = x.dist(a, b).clone();
            }
        }
    }
    best
}

/// Exact Nagata constant with an attaining scale and block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NagataReport {
    pub constant: Rational,
    pub witness_scale: Rational,
    pub witness_block: Vec<usize>,
    pub is_ultrametric: bool,
    pub is_zero_hyperbolic: bool,
    pub separation: Rational,
    pub diameter: Rational,
}

/// Constant, attaining scale and block. `None` for a single point.
pub(crate) fn nagata_scan(x: &MetricSpace) -> Option<(Rational, Rational, Vec<usize>)> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mut pairs: Vec<(usize, usize)> = x.pairs().collect();
    pairs.sort_by(|a, b| x.dist(a.0, a.1).cmp(x.dist(b.0, b.1)));

    let mut uf = UnionFind::new(n);
    let mut members: Vec<Vec<usize>> = (0..n).map(|p| vec![p]).collect();
    let mut diam: Vec<Rational> = vec![Rational::zero(); n];
    let mut max_diam = Rational::zero();
    let mut best: Option<(Rational, Rational, Vec<usize>)> = None;

    let mut k = 0;
    while k < pairs.len() {
        let s = x.dist(pairs[k].0, pairs[k].1).clone();
        while k < pairs.len() && *x.dist(pairs[k].0, pairs[k].1) == s {
            let (a, b) = pairs[k];
            k += 1;
            let (ra, rb) = (uf.find(a), uf.find(b));
            if ra == rb {
                continue;
            }
            let mut merged = if diam[ra] > diam[rb] {
                diam[ra].clone()
            } else {
                diam[rb].clone()
            };
            for &p in &members[ra] {
                for &q in &members[rb] {
                    if *x.dist(p, q) > merged {
                        merged = x.dist(p, q).clone();
                    }
                }
            }
            let root = uf.union(ra, rb).expect("distinct roots");
            let other = if root == ra { rb } else { ra };
            let moved = core::mem::take(&mut members[other]);
            members[root].extend(moved);
            if merged > max_diam {
                max_diam = merged.clone();
            }
            diam[root] = merged;
        }
        let ratio = &max_diam / &s;
        if best.as_ref().is_none_or(|(c, _, _)| ratio > *c) {
            // Witness: a maximum-diameter block, preferring the one holding
            // the smallest point index.
            let mut witness: Option<Vec<usize>> = None;
            for p in 0..n {
                let r = uf.find(p);
                if diam[r] == max_diam && members[r].iter().min() == Some(&p) {
                    let mut block = members[r].clone();
                    block.sort_unstable();
                    witness = Some(block);
                    break;
                }
            }
            best = Some((ratio, s, witness.expect("a block attains the maximum")));
        }
    }
    best
}

/// Exact Nagata constant `c_N(X)` plus basic invariants of the space.
///
/// A single point has constant 0 and an empty witness.
/// Just the constant of [`nagata_constant`], without the ultrametric and
/// four-point checks. Zero for a single point.
pub fn nagata_constant_value(x: &MetricSpace) -> Rational {
    nagata_scan(x).map_or_else(Rational::zero, |(c, _, _)| c)
}

pub fn nagata_constant(x: &MetricSpace) -> NagataReport {
    let (constant, witness_scale, witness_block) =
        nagata_scan(x).unwrap_or_else(|| (Rational::zero(), Rational::zero(), Vec::new()));
    NagataReport {
        constant,
        witness_scale,
        witness_block,
        is_ultrametric: is_ultrametric(x),
        is_zero_hyperbolic: is_zero_hyperbolic(x),
        separation: x.separation().unwrap_or_else(Rational::zero),
        diameter: x.diameter(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio};
    use alloc::string::ToString;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn ints(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    fn x2() -> MetricSpace {
        // order 00, 01, 10, 11
        MetricSpace::new(
            labels(&["00", "01", "10", "11"]),
            ints(&[&[0, 4, 2, 4], &[4, 0, 4, 2], &[2, 4, 0, 4], &[4, 2, 4, 0]]),
        )
        .unwrap()
    }

    #[test]
    fn single_point_is_valid() {
        let x = MetricSpace::new(labels(&["p"]), ints(&[&[0]])).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x.separation(), None);
        let r = nagata_constant(&x);
        assert!(r.constant.is_zero());
        assert!(r.witness_block.is_empty());
    }

    #[test]
    fn x2_matrix_is_valid_ultrametric() {
        let x = x2();
        assert!(is_ultrametric(&x));
        assert_eq!(x, fixtures::gen_binary_leaves(2).unwrap());
    }

    #[test]
    fn triangle_violation_reports_witness() {
        let err = MetricSpace::new(
            labels(&["a", "b", "c"]),
            ints(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]]),
        )
        .unwrap_err();
        assert_eq!(err, Error::TriangleViolation { a: 0, b: 1, c: 2 });
    }

    #[test]
    fn axiom_errors() {
        let l = labels(&["a", "b"]);
        assert!(matches!(
            MetricSpace::new(l.clone(), ints(&[&[0, 1], &[2, 0]])),
            Err(Error::AsymmetricMatrix { i: 0, j: 1 })
        ));
        assert!(matches!(
            MetricSpace::new(l.clone(), ints(&[&[0, 0], &[0, 0]])),
            Err(Error::NegativeOrZeroOffDiagonal { .. })
        ));
        assert!(matches!(
            MetricSpace::new(l.clone(), ints(&[&[0, -1], &[-1, 0]])),
            Err(Error::NegativeOrZeroOffDiagonal { .. })
        ));
        assert!(matches!(
            MetricSpace::new(l.clone(), ints(&[&[1, 1], &[1, 0]])),
            Err(Error::NonZeroDiagonal(0))
        ));
        assert!(matches!(
            MetricSpace::new(labels(&["a", "a"]), ints(&[&[0, 1], &[1, 0]])),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(matches!(
            MetricSpace::new(l.clone(), ints(&[&[0, 1]])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            MetricSpace::new(l, ints(&[&[0, 1], &[1]])),
            Err(Error::RaggedRow { row: 1, .. })
        ));
        assert!(matches!(
            MetricSpace::new(Vec::new(), Vec::new()),
            Err(Error::EmptySpace)
        ));
    }

    #[test]
    fn c4_is_neither_ultrametric_nor_tree_like() {
        let c4 = fixtures::gen_cycle(4).unwrap();
        assert!(!is_ultrametric(&c4));
        assert_eq!(ultrametric_violation(&c4), Some([0, 1, 2]));
        assert!(!is_zero_hyperbolic(&c4));
        assert_eq!(four_point_violation(&c4), Some([0, 1, 2, 3]));
    }

    #[test]
    fn small_spaces_are_tree_like() {
        let two = MetricSpace::new(labels(&["a", "b"]), ints(&[&[0, 5], &[5, 0]])).unwrap();
        assert!(is_ultrametric(&two));
        let three = MetricSpace::new(
            labels(&["a", "b", "c"]),
            ints(&[&[0, 3, 4], &[3, 0, 5], &[4, 5, 0]]),
        )
        .unwrap();
        assert!(is_zero_hyperbolic(&three));
        assert!(!is_ultrametric(&three));
        assert!(is_zero_hyperbolic(&fixtures::gen_binary_leaves(3).unwrap()));
    }

    #[test]
    fn chain_components_examples() {
        let x = x2();
        let p = chain_components(&x, &int(2)).unwrap();
        assert_eq!(p.blocks, vec![vec![0, 2], vec![1, 3]]);
        let p = chain_components(&x, &ratio(3, 2)).unwrap();
        assert_eq!(p.len(), 4);
        let p = chain_components(&x, &int(4)).unwrap();
        assert_eq!(p.blocks, vec![vec![0, 1, 2, 3]]);
        assert_eq!(
            chain_components(&x, &int(0)).unwrap_err(),
            Error::NonPositiveScale
        );
    }

    #[test]
    fn nagata_examples() {
        let r = nagata_constant(&fixtures::gen_cycle(4).unwrap());
        assert_eq!(r.constant, int(2));
        assert_eq!(r.witness_scale, int(1));
        assert_eq!(r.witness_block, vec![0, 1, 2, 3]);

        let r = nagata_constant(&x2());
        assert_eq!(r.constant, int(1));
        assert_eq!(r.witness_scale, int(2));
        assert_eq!(r.witness_block, vec![0, 2]);
        assert!(r.is_ultrametric && r.is_zero_hyperbolic);
        assert_eq!(r.separation, int(2));
        assert_eq!(r.diameter, int(4));

        let two = MetricSpace::new(labels(&["a", "b"]), ints(&[&[0, 5], &[5, 0]])).unwrap();
        let r = nagata_constant(&two);
        assert_eq!(r.constant, int(1));
        assert_eq!(r.witness_scale, int(5));
        assert_eq!(r.witness_block, vec![0, 1]);
    }

    #[test]
    fn witness_matches_constant() {
        for x in [
            fixtures::gen_cycle(7).unwrap(),
            fixtures::gen_random_metric(12, 3).unwrap(),
            fixtures::gen_random_treeset(15, 9).unwrap(),
        ] {
            let r = nagata_constant(&x);
            assert_eq!(
                subset_diameter(&x, &r.witness_block) / &r.witness_scale,
                r.constant
            );
            let p = chain_components(&x, &r.witness_scale).unwrap();
            assert!(p.blocks.contains(&r.witness_block));
        }
    }
}
