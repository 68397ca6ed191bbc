//! Lipschitz extension into Euclidean space through a tree scaffold.
//!
//! The subset `Z` is embedded in the geometric realization `W` of a spanning
//! tree on `Z` (Nagata or halving construction). Points of `X \ Z` are
//! placed in `W` one at a time inside the intersection of balls around the
//! points already placed, and the given values are interpolated linearly
//! along the edges of `W`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::gupta::gupta_tree;
use crate::metric::nagata_constant;
use crate::nagata::nagata_tree;
use crate::rational::{int, to_f64, Rational};
use crate::rtree::{RTree, TreeLocation};
use crate::tree::WeightedTree;
use crate::MetricSpace;

/// Relative slack when checking that the input map is 1-Lipschitz.
pub const INPUT_TOLERANCE: f64 = 1e-12;
/// Relative slack on the achieved Lipschitz constant.
pub const OUTPUT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaffoldMethod {
    Nagata,
    Gupta,
}

impl core::str::FromStr for ScaffoldMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nagata" => Ok(Self::Nagata),
            "gupta" => Ok(Self::Gupta),
            other => Err(Error::UnknownName(other.into())),
        }
    }
}

impl ScaffoldMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Nagata => "nagata",
            Self::Gupta => "gupta",
        }
    }
}

/// Values on a subset of the points of a space.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuedSubset {
    points: Vec<usize>,
    values: Vec<Vec<f64>>,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum())
}

impl ValuedSubset {
    /// Checks indices, dimensions and the 1-Lipschitz condition.
    pub fn new(x: &MetricSpace, points: Vec<usize>, values: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySpace);
        }
        if values.len() != points.len() {
            return Err(Error::DimensionMismatch {
                labels: points.len(),
                rows: values.len(),
            });
        }
        let dim = values[0].len();
        if let Some(row) = values
            .iter()
            .position(|v| v.len() != dim || v.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::ValueDimension(row));
        }
        let mut seen = vec![false; x.len()];
        for &p in &points {
            if p >= x.len() {
                return Err(Error::PointOutOfRange(p));
            }
            if core::mem::replace(&mut seen[p], true) {
                return Err(Error::DuplicateLabel(x.label(p).into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = to_f64(x.dist(points[i], points[j]));
                if euclidean(&values[i], &values[j]) > d * (1.0 + INPUT_TOLERANCE) {
                    return Err(Error::NotLipschitz(points[i], points[j]));
                }
            }
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }
}

/// Spanning tree on `z`, its realization and the guaranteed Lipschitz
/// constant of the embedding `z -> W`.
pub fn scaffold_embedding(
    z: &MetricSpace,
    method: ScaffoldMethod,
) -> Result<(WeightedTree, RTree, Rational)> {
    let (tree, lip) = match method {
        ScaffoldMethod::Nagata => {
            let tree = if z.len() == 1 {
                WeightedTree::new(1, Vec::new())?
            } else {
                nagata_tree(z, None)?
            };
            (tree, nagata_constant(z).constant * int(8))
        }
        ScaffoldMethod::Gupta => (gupta_tree(z)?, int(8)),
    };
    let w = RTree::from_weighted_tree(&tree);
    Ok((tree, w, lip))
}

/// Distances from a location to every node.
fn location_distances(w: &RTree, at: &TreeLocation) -> Vec<Rational> {
    match at {
        TreeLocation::Node(v) => w.node_distances(*v),
        TreeLocation::Edge { edge, offset } => {
            let e = &w.edges()[*edge];
            let (da, db) = (w.node_distances(e.a), w.node_distances(e.b));
            let rest = &e.length - offset;
            da.iter()
                .zip(&db)
                .map(|(p, q)| core::cmp::min(offset + p, &rest + q))
                .collect()
        }
    }
}

/// Tree distance between two locations.
pub fn location_distance(w: &RTree, a: &TreeLocation, b: &TreeLocation) -> Rational {
    match b {
        TreeLocation::Node(v) => location_distances(w, a)[*v].clone(),
        TreeLocation::Edge { edge, offset } => {
            if let TreeLocation::Edge {
                edge: ea,
                offset: oa,
            } = a
            {
                if ea == edge {
                    return if oa > offset {
                        oa - offset
                    } else {
                        offset - oa
                    };
                }
            }
            let e = &w.edges()[*edge];
            let d = location_distances(w, a);
            core::cmp::min(offset + &d[e.a], &e.length - offset + &d[e.b])
        }
    }
}

fn canonical(w: &RTree, edge: usize, t: Rational) -> TreeLocation {
    let e = &w.edges()[edge];
    if t.is_zero() {
        TreeLocation::Node(e.a)
    } else if t == e.length {
        TreeLocation::Node(e.b)
    } else {
        TreeLocation::Edge { edge, offset: t }
    }
}

/// A location within distance `radius_i` of every anchor.
///
/// Minimizes `g(w) = max_i d(w, anchor_i) - radius_i`. Along an edge
/// parametrized from its first endpoint, `g(t) = max(t + P, M - t)`, so each
/// edge has a single minimizer, `(M - P) / 2` clamped to the edge.
pub fn one_point_extension(
    w: &RTree,
    anchors: &[(TreeLocation, Rational)],
) -> Result<TreeLocation> {
    if anchors.is_empty() {
        return Err(Error::EmptySpace);
    }
    let dists: Vec<Vec<Rational>> = anchors
        .iter()
        .map(|(a, _)| location_distances(w, a))
        .collect();
    let mut cands: Vec<(Rational, TreeLocation)> = Vec::new();
    if w.edges().is_empty() {
        let g = anchors
            .iter()
            .zip(&dists)
            .map(|((_, r), d)| &d[0] - r)
            .max()
            .expect("non-empty");
        cands.push((g, TreeLocation::Node(0)));
    }
    for (k, e) in w.edges().iter().enumerate() {
        let mut plus: Option<Rational> = None;
        let mut minus: Option<Rational> = None;
        let raise = |slot: &mut Option<Rational>, v: Rational| {
            if slot.as_ref().is_none_or(|s| v > *s) {
                *slot = Some(v);
            }
        };
        for ((loc, r), d) in anchors.iter().zip(&dists) {
            match loc {
                TreeLocation::Edge { edge, offset } if *edge == k => {
                    raise(&mut plus, -offset - r);
                    raise(&mut minus, offset - r);
                }
                _ => {
                    // The anchor lies beyond exactly one endpoint.
                    if &d[e.a] + &e.length == d[e.b] {
                        raise(&mut plus, &d[e.a] - r);
                    } else {
                        raise(&mut minus, &d[e.b] + &e.length - r);
                    }
                }
            }
        }
        let t = match (&plus, &minus) {
            (Some(p), Some(m)) => {
                let t = (m - p) / int(2);
                t.clamp(Rational::zero(), e.length.clone())
            }
            (Some(_), None) => Rational::zero(),
            (None, _) => e.length.clone(),
        };
        let g = match (plus, minus) {
            (Some(p), Some(m)) => core::cmp::max(&t + p, m - &t),
            (Some(p), None) => &t + p,
            (None, Some(m)) => m - &t,
            (None, None) => unreachable!("anchors are non-empty"),
        };
        cands.push((g, canonical(w, k, t)));
    }
    let best = cands
        .iter()
        .map(|(g, _)| g)
        .min()
        .expect("non-empty")
        .clone();
    if best > Rational::zero() {
        return Err(Error::InfeasibleConstraints(format!("{best}")));
    }
    let first = anchors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("non-empty");
    let mut winners: Vec<(Rational, TreeLocation)> = cands
        .into_iter()
        .filter(|(g, _)| *g == best)
        .map(|(_, loc)| (location_distance(w, &anchors[first].0, &loc), loc))
        .collect();
    winners.sort();
    Ok(winners.swap_remove(0).1)
}

/// Value of the edge-linear interpolation at a location.
pub fn interpolate(w: &RTree, node_values: &[Vec<f64>], at: &TreeLocation) -> Vec<f64> {
    match at {
        TreeLocation::Node(v) => node_values[*v].clone(),
        TreeLocation::Edge { edge, offset } => {
            let e = &w.edges()[*edge];
            let s = to_f64(&(offset / &e.length));
            node_values[e.a]
                .iter()
                .zip(&node_values[e.b])
                .map(|(p, q)| (1.0 - s) * p + s * q)
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    /// Values for every point of `X`, in index order.
    pub extended: Vec<Vec<f64>>,
    /// Image of every point of `X` in the scaffold realization.
    pub locations: Vec<TreeLocation>,
    /// Spanning tree on `Z` (vertex `k` is `data.points()[k]`).
    pub scaffold: WeightedTree,
    pub achieved_lip: f64,
    pub guaranteed_lip: Rational,
}

/// Largest `|F(x) - F(y)| / d(x, y)` over all pairs.
pub fn lipschitz_constant(x: &MetricSpace, values: &[Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for (i, j) in x.pairs() {
        best = best.max(euclidean(&values[i], &values[j]) / to_f64(x.dist(i, j)));
    }
    best
}

/// Extends `data` to all of `x` with Lipschitz constant at most the scaffold's
/// guaranteed constant.
pub fn lipschitz_extend(
    x: &MetricSpace,
    data: &ValuedSubset,
    method: ScaffoldMethod,
) -> Result<ExtensionResult> {
    let z = x.subspace(data.points());
    let (scaffold, w, lip) = scaffold_embedding(&z, method)?;
    let mut locations: Vec<Option<TreeLocation>> = vec![None; x.len()];
    let mut placed: Vec<usize> = Vec::with_capacity(x.len());
    for (k, &p) in data.points().iter().enumerate() {
        locations[p] = Some(TreeLocation::Node(k));
        placed.push(p);
    }
    let mut rest: Vec<usize> = (0..x.len()).filter(|&p| locations[p].is_none()).collect();
    rest.sort_by(|&a, &b| x.label(a).cmp(x.label(b)));
    for p in rest {
        let anchors: Vec<(TreeLocation, Rational)> = placed
            .iter()
            .map(|&q| (locations[q].clone().expect("placed"), &lip * x.dist(p, q)))
            .collect();
        locations[p] = Some(one_point_extension(&w, &anchors)?);
        placed.push(p);
    }
    let locations: Vec<TreeLocation> = locations
        .into_iter()
        .map(|l| l.expect("all placed"))
        .collect();
    let extended: Vec<Vec<f64>> = locations
        .iter()
        .map(|l| interpolate(&w, data.values(), l))
        .collect();
    let achieved_lip = lipschitz_constant(x, &extended);
    let bound = to_f64(&lip) * (1.0 + OUTPUT_TOLERANCE);
    if achieved_lip > bound && !(lip.is_zero() && achieved_lip == 0.0) {
        return Err(Error::BoundViolation(format!(
            "extension has Lipschitz constant {achieved_lip} above {lip}"
        )));
    }
    Ok(ExtensionResult {
        extended,
        locations,
        scaffold,
        achieved_lip,
        guaranteed_lip: lip,
    })
}
