//! Deterministic generators for named spaces and seeded random families.
//!
//! Random families use ChaCha8 seeded with `seed_from_u64`, so outputs are
//! bit-identical for a given `(family, parameters, seed)`:
//!
//! * `random-ultrametric`: the shuffled point set is split recursively into
//!   2 to 4 contiguous groups at random cut positions. Points in different
//!   groups get the current integer height `h` (starting at `2^40`); each
//!   group recurses with a height drawn uniformly from `[h/2, h-1]`. Once
//!   `h < 2`, all remaining pairs get distance `h`.
//! * `random-treeset`: a random recursive tree on `2n` nodes (node `k`
//!   attaches to a uniform earlier node) with integer edge lengths in
//!   `1..=10`; `n` distinct nodes are sampled as the points and the remaining
//!   nodes act as Steiner points.
//! * `random-metric`: integer weights in `1..=20` on the complete graph,
//!   closed under shortest paths.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{int, pow2};
use crate::MetricSpace;

pub const MAX_RANDOM_POINTS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    BinaryLeaves,
    Cycle,
    Adic,
    Example33,
    RandomUltrametric,
    RandomTreeset,
    RandomMetric,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::BinaryLeaves,
        Family::Cycle,
        Family::Adic,
        Family::Example33,
        Family::RandomUltrametric,
        Family::RandomTreeset,
        Family::RandomMetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BinaryLeaves => "binary-leaves",
            Family::Cycle => "cycle",
            Family::Adic => "adic",
            Family::Example33 => "example33",
            Family::RandomUltrametric => "random-ultrametric",
            Family::RandomTreeset => "random-treeset",
            Family::RandomMetric => "random-metric",
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

/// A generator invocation. `size` is `n`, `N` or `k` depending on family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixtureSpec {
    pub family: Family,
    pub size: usize,
    pub seed: u64,
}

impl FixtureSpec {
    pub fn generate(&self) -> Result<MetricSpace> {
        match self.family {
            Family::BinaryLeaves => gen_binary_leaves(self.size),
            Family::Cycle => gen_cycle(self.size),
            Family::Adic => gen_adic(self.size),
            Family::Example33 => gen_example33(self.size),
            Family::RandomUltrametric => gen_random_ultrametric(self.size, self.seed),
            Family::RandomTreeset => gen_random_treeset(self.size, self.seed),
            Family::RandomMetric => gen_random_metric(self.size, self.seed),
        }
    }
}

fn check_range(
    family: &'static str,
    name: &'static str,
    v: usize,
    lo: usize,
    hi: usize,
) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::OutOfRange {
            family,
            name,
            value: v as i64,
        });
    }
    Ok(())
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    let width = format!("{}", n.saturating_sub(1)).len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

fn bit_labels(bits: usize) -> Vec<String> {
    (0..1usize << bits)
        .map(|i| format!("{i:0bits$b}"))
        .collect()
}

fn from_int_matrix(labels: Vec<String>, d: &[u64]) -> Result<MetricSpace> {
    let n = labels.len();
    MetricSpace::from_fn(labels, |i, j| int(d[i * n + j] as i64))
}

/// Leaves `{0,1}^n` of the full binary tree of height `n` with
/// `d(x, x') = 2 max{k : x_k != x'_k}` (positions counted from the left).
pub fn gen_binary_leaves(n: usize) -> Result<MetricSpace> {
    check_range("binary-leaves", "n", n, 1, 12)?;
    MetricSpace::from_fn(bit_labels(n), |i, j| {
        let lowest_diff = (i ^ j).trailing_zeros() as usize;
        int(2 * (n - lowest_diff) as i64)
    })
}

/// The `n`-cycle with its shortest-path metric.
pub fn gen_cycle(n: usize) -> Result<MetricSpace> {
    check_range("cycle", "n", n, 3, MAX_RANDOM_POINTS)?;
    MetricSpace::from_fn(numbered("c", n), |i, j| {
        let k = j - i;
        int(k.min(n - k) as i64)
    })
}

/// `{0, ..., 2^k - 1}` with the 2-adic metric `2^{-v(x - y)}`.
pub fn gen_adic(k: usize) -> Result<MetricSpace> {
    check_range("adic", "k", k, 1, 7)?;
    let n = 1usize << k;
    MetricSpace::from_fn(numbered("", n), |i, j| {
        pow2(-((j - i).trailing_zeros() as i64))
    })
}

/// Leaves of the full binary tree of height `N` whose edges at levels `N`
/// and `N - 1` weigh 1 and whose edges at level `k <= N - 2` weigh
/// `2^{N-1-k}` (root at level 0, an edge's level is that of its deeper end).
pub fn gen_example33(big_n: usize) -> Result<MetricSpace> {
    check_range("example33", "N", big_n, 3, 12)?;
    let weight = |level: usize| -> u64 {
        if level + 1 >= big_n {
            1
        } else {
            1u64 << (big_n - 1 - level)
        }
    };
    // Leaves whose labels share a prefix of length j meet at level j.
    let up: Vec<u64> = (0..=big_n)
        .map(|j| (j + 1..=big_n).map(weight).sum())
        .collect();
    MetricSpace::from_fn(bit_labels(big_n), |i, j| {
        let highest_diff = usize::BITS as usize - 1 - (i ^ j).leading_zeros() as usize;
        let prefix = big_n - 1 - highest_diff;
        int(2 * up[prefix] as i64)
    })
}

/// Random ultrametric on `n` points; see the module docs for the law.
pub fn gen_random_ultrametric(n: usize, seed: u64) -> Result<MetricSpace> {
    check_range("random-ultrametric", "n", n, 2, MAX_RANDOM_POINTS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut d = vec![0u64; n * n];
    split_ultrametric(&order, 1 << 40, &mut rng, &mut d, n);
    from_int_matrix(numbered("u", n), &d)
}

fn split_ultrametric(points: &[usize], height: u64, rng: &mut ChaCha8Rng, d: &mut [u64], n: usize) {
    if points.len() < 2 {
        return;
    }
    let set_all = |group_a: &[usize], group_b: &[usize], d: &mut [u64]| {
        for &a in group_a {
            for &b in group_b {
                d[a * n + b] = height;
                d[b * n + a] = height;
            }
        }
    };
    if height < 2 {
        for (k, &a) in points.iter().enumerate() {
            set_all(&[a], &points[k + 1..], d);
        }
        return;
    }
    let parts = rng.gen_range(2..=points.len().min(4));
    let mut cuts: Vec<usize> = (1..points.len()).collect();
    cuts.shuffle(rng);
    cuts.truncate(parts - 1);
    cuts.sort_unstable();
    cuts.push(points.len());
    let mut groups = Vec::with_capacity(parts);
    let mut start = 0;
    for &c in &cuts {
        groups.push(&points[start..c]);
        start = c;
    }
    for (g, a) in groups.iter().enumerate() {
        for b in &groups[g + 1..] {
            set_all(a, b, d);
        }
    }
    for g in groups {
        let child = rng.gen_range(height / 2..height);
        split_ultrametric(g, child, rng, d, n);
    }
}

/// `n` distinct nodes of a random weighted tree; see the module docs.
pub fn gen_random_treeset(n: usize, seed: u64) -> Result<MetricSpace> {
    check_range("random-treeset", "n", n, 2, MAX_RANDOM_POINTS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = 2 * n;
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); nodes];
    for k in 1..nodes {
        let p = rng.gen_range(0..k);
        let w = rng.gen_range(1..=10u64);
        adj[k].push((p, w));
        adj[p].push((k, w));
    }
    let mut chosen: Vec<usize> = (0..nodes).collect();
    chosen.shuffle(&mut rng);
    chosen.truncate(n);

    let mut d = vec![0u64; n * n];
    let mut from = vec![0u64; nodes];
    let mut stack = Vec::new();
    for (a, &src) in chosen.iter().enumerate() {
        let mut seen = vec![false; nodes];
        seen[src] = true;
        from[src] = 0;
        stack.push(src);
        while let Some(u) = stack.pop() {
            for &(v, w) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    from[v] = from[u] + w;
                    stack.push(v);
                }
            }
        }
        for (b, &dst) in chosen.iter().enumerate() {
            d[a * n + b] = from[dst];
        }
    }
    from_int_matrix(numbered("t", n), &d)
}

/// Shortest-path closure of random integer weights on the complete graph.
pub fn gen_random_metric(n: usize, seed: u64) -> Result<MetricSpace> {
    check_range("random-metric", "n", n, 2, MAX_RANDOM_POINTS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![0u64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=20u64);
            d[i * n + j] = w;
            d[j * n + i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    from_int_matrix(numbered("m", n), &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{is_ultrametric, is_zero_hyperbolic};
    use crate::rational::ratio;
    use alloc::string::ToString;

    #[test]
    fn binary_leaves_examples() {
        let x1 = gen_binary_leaves(1).unwrap();
        assert_eq!(x1.len(), 2);
        assert_eq!(*x1.dist(0, 1), int(2));

        let x2 = gen_binary_leaves(2).unwrap();
        let idx = |l: &str| x2.index_of(l).unwrap();
        let d = |a: &str, b: &str| x2.dist(idx(a), idx(b)).clone();
        assert_eq!(d("00", "10"), int(2));
        assert_eq!(d("00", "01"), int(4));
        assert_eq!(d("00", "11"), int(4));
        assert_eq!(d("01", "10"), int(4));
        assert_eq!(d("01", "11"), int(2));
        assert_eq!(d("10", "11"), int(4));

        let x3 = gen_binary_leaves(3).unwrap();
        assert_eq!(x3.diameter(), int(6));
        assert!(is_ultrametric(&x3));
        assert_eq!(x3.distinct_distances(), vec![int(2), int(4), int(6)]);
        assert!(gen_binary_leaves(0).is_err());
        assert!(gen_binary_leaves(13).is_err());
    }

    #[test]
    fn cycle_examples() {
        let c3 = gen_cycle(3).unwrap();
        assert!(c3.pairs().all(|(i, j)| *c3.dist(i, j) == int(1)));
        let c4 = gen_cycle(4).unwrap();
        assert_eq!(*c4.dist(0, 1), int(1));
        assert_eq!(*c4.dist(0, 2), int(2));
        assert_eq!(*c4.dist(1, 3), int(2));
        assert!(gen_cycle(2).is_err());
        let c12 = gen_cycle(12).unwrap();
        assert_eq!(c12.label(2), "c02");
    }

    #[test]
    fn adic_examples() {
        let a1 = gen_adic(1).unwrap();
        assert_eq!(*a1.dist(0, 1), int(1));
        let a2 = gen_adic(2).unwrap();
        assert_eq!(*a2.dist(0, 2), ratio(1, 2));
        assert_eq!(*a2.dist(0, 1), int(1));
        let a3 = gen_adic(3).unwrap();
        assert_eq!(a3.len(), 8);
        assert_eq!(
            a3.distinct_distances(),
            vec![ratio(1, 4), ratio(1, 2), int(1)]
        );
        assert!(is_ultrametric(&a3));
        assert!(gen_adic(8).is_err());
    }

    #[test]
    fn example33_examples() {
        let e = gen_example33(3).unwrap();
        assert_eq!(e.len(), 8);
        let idx = |l: &str| e.index_of(l).unwrap();
        assert_eq!(*e.dist(idx("000"), idx("001")), int(2));
        assert_eq!(*e.dist(idx("000"), idx("010")), int(4));
        assert_eq!(*e.dist(idx("000"), idx("100")), int(8));
        assert_eq!(e.separation().unwrap(), int(2));
        assert_eq!(e.diameter(), int(8));
        let e4 = gen_example33(4).unwrap();
        assert_eq!(e4.diameter(), int(16));
        for big_n in 3..=6 {
            let e = gen_example33(big_n).unwrap();
            let expect: Vec<_> = (1..=big_n).map(|k| int(1 << k)).collect();
            assert_eq!(e.distinct_distances(), expect);
            assert!(is_ultrametric(&e));
        }
        assert!(gen_example33(2).is_err());
    }

    #[test]
    fn random_families_have_their_structure() {
        let u = gen_random_ultrametric(64, 11).unwrap();
        assert!(is_ultrametric(&u));
        let t = gen_random_treeset(64, 11).unwrap();
        assert!(is_zero_hyperbolic(&t));
        let m = gen_random_metric(20, 11).unwrap();
        assert_eq!(m.len(), 20);
        for n in [2usize, 3] {
            assert!(is_ultrametric(&gen_random_ultrametric(n, 5).unwrap()));
            assert!(is_zero_hyperbolic(&gen_random_treeset(n, 5).unwrap()));
        }
        assert!(gen_random_treeset(1, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        for f in Family::ALL {
            let size = match f {
                Family::BinaryLeaves | Family::Adic | Family::Example33 => 3,
                _ => 10,
            };
            let spec = FixtureSpec {
                family: f,
                size,
                seed: 42,
            };
            assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert_ne!(
            gen_random_metric(10, 1).unwrap(),
            gen_random_metric(10, 2).unwrap()
        );
        assert!("nope".to_string().parse::<Family>().is_err());
    }
}
