//! Spanning trees from dyadic chain hierarchies.
//!
//! At every scale `2^i` the points split into chain components. Each block
//! gets a representative chosen from one of its children one scale down
//! (the designated child), and the representative of every other child is
//! joined to it by an edge weighted with their distance. Representatives
//! along the anchor chain are the root itself.
//!
//! For a space with Nagata constant `c` the resulting tree satisfies
//! `d <= d_T <= 8 c (1 - 2^-l) d` where `l = i_max - i_min` is the number of
//! levels above the all-singleton scale.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;

use crate::error::{Error, Result};
use crate::metric::{chain_components, nagata_scan, Partition};
use crate::rational::{ceil_log2, floor_log2_strict, int, pow2, Rational};
use crate::tree::{canonical_weights, WeightedTree};
use crate::union_find::UnionFind;
use crate::MetricSpace;

/// Partition and representatives at one dyadic scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    /// The scale is `2^exponent`.
    pub exponent: i64,
    pub partition: Partition,
    /// Per block, the indices of its sub-blocks one level down (empty at the
    /// lowest level).
    pub children: Vec<Vec<usize>>,
    /// Per block, the index of the designated child (`usize::MAX` at the
    /// lowest level).
    pub designated: Vec<usize>,
    /// Per block, its representative point.
    pub reps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainHierarchy {
    /// `levels[k]` has exponent `i_min + k`.
    pub levels: Vec<Level>,
    pub root: usize,
}

impl ChainHierarchy {
    pub fn i_min(&self) -> i64 {
        self.levels[0].exponent
    }

    pub fn i_max(&self) -> i64 {
        self.levels.last().expect("non-empty").exponent
    }

    /// Number of levels above the all-singleton one.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    /// Star edges `(rep of block, rep of non-designated child)` per level.
    pub fn star_edges(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new()];
        for k in 1..self.levels.len() {
            let level = &self.levels[k];
            let below = &self.levels[k - 1];
            let mut edges = Vec::new();
            for (b, kids) in level.children.iter().enumerate() {
                for &c in kids {
                    if c != level.designated[b] {
                        edges.push((level.reps[b], below.reps[c]));
                    }
                }
            }
            out.push(edges);
        }
        out
    }
}

fn label_ranks(x: &MetricSpace) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x.label(a).cmp(x.label(b)));
    let mut rank = vec![0; x.len()];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    rank
}

/// The point with the lexicographically smallest label.
pub fn default_root(x: &MetricSpace) -> usize {
    let rank = label_ranks(x);
    (0..x.len()).min_by_key(|&p| rank[p]).expect("non-empty")
}

/// Largest distance used by a minimum spanning tree: the smallest threshold
/// at which the whole space is one chain component.
fn connectivity_threshold(x: &MetricSpace) -> Rational {
    let mut pairs: Vec<(usize, usize)> = x.pairs().collect();
    pairs.sort_by(|a, b| x.dist(a.0, a.1).cmp(x.dist(b.0, b.1)));
    let mut uf = UnionFind::new(x.len());
    let mut merges = 0;
    for (a, b) in pairs {
        if uf.union(a, b).is_some() {
            merges += 1;
            if merges == x.len() - 1 {
                return x.dist(a, b).clone();
            }
        }
    }
    unreachable!("complete graph is connected")
}

/// Chain partitions at scales `2^i`, `i_min <= i <= i_max`, with a
/// consistent choice of representatives anchored at `root`.
///
/// `i_min` is the largest exponent below the separation (all singletons) and
/// `i_max` the smallest exponent at which one block remains. The designated
/// child of a block is the one holding `root` if there is one, otherwise the
/// one holding the block's lexicographically smallest label.
pub fn build_hierarchy(x: &MetricSpace, root: Option<usize>) -> Result<ChainHierarchy> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SinglePoint);
    }
    let root = match root {
        Some(r) if r >= n => return Err(Error::PointOutOfRange(r)),
        Some(r) => r,
        None => default_root(x),
    };
    let rank = label_ranks(x);
    let sep = x.separation().expect("two points");
    let i_min = floor_log2_strict(&sep);
    let i_max = ceil_log2(&connectivity_threshold(x));

    let mut levels: Vec<Level> = Vec::new();
    for i in i_min..=i_max {
        let partition = chain_components(x, &pow2(i))?;
        let nb = partition.len();
        let Some(below) = levels.last() else {
            debug_assert!(partition.blocks.iter().all(|b| b.len() == 1));
            let reps = partition.blocks.iter().map(|b| b[0]).collect();
            levels.push(Level {
                exponent: i,
                partition,
                children: vec![Vec::new(); nb],
                designated: vec![usize::MAX; nb],
                reps,
            });
            continue;
        };
        let below_of = below.partition.block_of();
        let mut children = Vec::with_capacity(nb);
        let mut designated = Vec::with_capacity(nb);
        let mut reps = Vec::with_capacity(nb);
        for block in &partition.blocks {
            let mut kids: Vec<usize> = block.iter().map(|&p| below_of[p]).collect();
            kids.sort_unstable();
            kids.dedup();
            let anchor = if block.contains(&root) {
                root
            } else {
                *block
                    .iter()
                    .min_by_key(|&&p| rank[p])
                    .expect("non-empty block")
            };
            let d = below_of[anchor];
            reps.push(below.reps[d]);
            designated.push(d);
            children.push(kids);
        }
        levels.push(Level {
            exponent: i,
            partition,
            children,
            designated,
            reps,
        });
    }
    debug_assert_eq!(levels.last().map(|l| l.partition.len()), Some(1));
    Ok(ChainHierarchy { levels, root })
}

/// A built tree with the data needed to certify it.
#[derive(Clone, Debug)]
pub struct NagataConstruction {
    pub hierarchy: ChainHierarchy,
    pub tree: WeightedTree,
    pub nagata_constant: Rational,
    /// `8 c (1 - 2^-l)`.
    pub bound: Rational,
}

/// `8 c (1 - 2^-l)`.
pub fn distortion_bound(c: &Rational, levels: usize) -> Rational {
    int(8) * c * (Rational::one() - pow2(-(levels as i64)))
}

/// Builds the hierarchy and its spanning tree with canonical weights.
pub fn nagata_construction(x: &MetricSpace, root: Option<usize>) -> Result<NagataConstruction> {
    let hierarchy = build_hierarchy(x, root)?;
    let edges: Vec<(usize, usize)> = hierarchy.star_edges().into_iter().flatten().collect();
    let tree = canonical_weights(x, &edges)?;
    let (c, _, _) = nagata_scan(x).expect("two points");
    let bound = distortion_bound(&c, hierarchy.height());
    Ok(NagataConstruction {
        hierarchy,
        tree,
        nagata_constant: c,
        bound,
    })
}

/// The chain-hierarchy spanning tree of `x`.
pub fn nagata_tree(x: &MetricSpace, root: Option<usize>) -> Result<WeightedTree> {
    Ok(nagata_construction(x, root)?.tree)
}

/// Checks the per-block radius bound: every point of a block at scale `2^i`
/// is within `c 2^i sum_{k < l_B} 2^-k` of the block's representative in the
/// tree, where `l_B = i - i_min`.
pub fn verify_block_radii(built: &NagataConstruction) -> Result<()> {
    let h = &built.hierarchy;
    let rooted = built.tree.rooted(h.root);
    for (k, level) in h.levels.iter().enumerate() {
        let geometric = int(2) * (Rational::one() - pow2(-(k as i64)));
        let limit = &built.nagata_constant * pow2(level.exponent) * geometric;
        for (b, block) in level.partition.blocks.iter().enumerate() {
            let rep = level.reps[b];
            for &p in block {
                let d = rooted.distance(p, rep);
                if d > limit {
                    return Err(Error::BoundViolation(format!(
                        "point {p} is {d} from representative {rep} at scale 2^{}, limit {limit}",
                        level.exponent
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Checks that pairs first joined at scale `2^i` are more than `2^(i-1)`
/// apart, and that representatives are consistent across levels.
pub fn verify_hierarchy(x: &MetricSpace, h: &ChainHierarchy) -> Result<()> {
    let block_of: Vec<Vec<usize>> = h.levels.iter().map(|l| l.partition.block_of()).collect();
    for (i, j) in x.pairs() {
        let joined = (0..h.levels.len())
            .find(|&k| block_of[k][i] == block_of[k][j])
            .ok_or_else(|| Error::BoundViolation(format!("pair ({i},{j}) never joined")))?;
        if joined == 0 {
            return Err(Error::BoundViolation(format!(
                "pair ({i},{j}) joined at the singleton level"
            )));
        }
        if *x.dist(i, j) <= pow2(h.levels[joined].exponent - 1) {
            return Err(Error::BoundViolation(format!(
                "pair ({i},{j}) split below its distance"
            )));
        }
    }
    for (k, level) in h.levels.iter().enumerate() {
        let root_block = block_of[k][h.root];
        if level.reps[root_block] != h.root {
            return Err(Error::BoundViolation(format!(
                "anchor block at level {k} has representative {}",
                level.reps[root_block]
            )));
        }
        if k == 0 {
            continue;
        }
        let below = &h.levels[k - 1];
        for (b, kids) in level.children.iter().enumerate() {
            let d = level.designated[b];
            if !kids.contains(&d) || below.reps[d] != level.reps[b] {
                return Err(Error::BoundViolation(format!(
                    "representative of block {b} at level {k} is not inherited"
                )));
            }
            if !level.partition.blocks[b].contains(&level.reps[b]) {
                return Err(Error::BoundViolation(format!(
                    "representative of block {b} at level {k} lies outside it"
                )));
            }
        }
    }
    if h.levels[0].partition.blocks.iter().any(|b| b.len() != 1)
        || h.levels.last().map(|l| l.partition.len()) != Some(1)
    {
        return Err(Error::BoundViolation("hierarchy ends are wrong".into()));
    }
    Ok(())
}

/// `true` iff `d_T >= d` on every pair (holds for canonical weights).
pub fn dominates(x: &MetricSpace, tree: &WeightedTree) -> bool {
    let tm = crate::tree::tree_metric(tree);
    x.pairs().all(|(i, j)| tm.get(i, j) >= x.dist(i, j))
}
