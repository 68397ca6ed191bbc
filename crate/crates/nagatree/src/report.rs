//! JSON run reports. Exact values are carried as `"p/q"` strings next to a
//! decimal rendering; the string is authoritative.

use nagatree_core::gupta::{GuptaConstruction, SideCheck};
use nagatree_core::rational::to_f64;
use nagatree_core::rtree::{NodeKind, TreeLocation};
use nagatree_core::search::SearchResult;
use nagatree_core::{DistortionReport, MetricSpace, NagataReport, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Exact {
    pub exact: String,
    pub approx: f64,
}

impl From<&Rational> for Exact {
    fn from(r: &Rational) -> Self {
        Exact {
            exact: r.to_string(),
            approx: to_f64(r),
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn labels(x: &MetricSpace, pts: impl IntoIterator<Item = usize>) -> Vec<String> {
    pts.into_iter().map(|i| x.label(i).to_string()).collect()
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct NagataDoc {
    pub points: usize,
    pub constant: Exact,
    pub witness_scale: Exact,
    pub witness_block: Vec<String>,
    pub is_ultrametric: bool,
    pub is_zero_hyperbolic: bool,
    pub separation: Exact,
    pub diameter: Exact,
}

impl NagataDoc {
    pub fn new(x: &MetricSpace, r: &NagataReport) -> Self {
        NagataDoc {
            points: x.len(),
            constant: (&r.constant).into(),
            witness_scale: (&r.witness_scale).into(),
            witness_block: labels(x, r.witness_block.iter().copied()),
            is_ultrametric: r.is_ultrametric,
            is_zero_hyperbolic: r.is_zero_hyperbolic,
            separation: (&r.separation).into(),
            diameter: (&r.diameter).into(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct DistortionDoc {
    pub expansion: Exact,
    pub contraction: Exact,
    pub distortion: Exact,
    pub witness_expand: [String; 2],
    pub witness_contract: [String; 2],
}

impl DistortionDoc {
    pub fn new(x: &MetricSpace, r: &DistortionReport) -> Self {
        let pair = |(i, j): (usize, usize)| [x.label(i).to_string(), x.label(j).to_string()];
        DistortionDoc {
            expansion: (&r.expansion).into(),
            contraction: (&r.contraction).into(),
            distortion: (&r.distortion).into(),
            witness_expand: pair(r.witness_expand),
            witness_contract: pair(r.witness_contract),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ConstructionDoc {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    pub bound: Exact,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steiner_nodes: Option<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SearchDoc {
    pub method: String,
    pub best_distortion: Exact,
    pub lower_bound: Exact,
    pub trees_examined: u64,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub symmetric: bool,
}

impl SearchDoc {
    pub fn new(r: &SearchResult, budget: Option<u64>, seed: Option<u64>, symmetric: bool) -> Self {
        SearchDoc {
            method: r.method.name().into(),
            best_distortion: (&r.best_distortion).into(),
            lower_bound: (&r.lower_bound).into(),
            trees_examined: r.trees_examined,
            complete: r.complete,
            budget,
            seed,
            symmetric,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ExtensionDoc {
    pub method: String,
    pub subset: Vec<String>,
    pub dim: usize,
    pub achieved_lip: f64,
    pub guaranteed_lip: Exact,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Default)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nagata: Option<NagataDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<ExtensionDoc>,
    /// Wall-clock milliseconds; the only field that varies between runs.
    pub timing_ms: f64,
}

impl RunReport {
    pub fn new(command: Vec<String>) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(untagged)]
pub enum LocationDoc {
    Node { node: usize },
    Edge { edge: usize, offset: String },
}

impl From<&TreeLocation> for LocationDoc {
    fn from(l: &TreeLocation) -> Self {
        match l {
            TreeLocation::Node(node) => LocationDoc::Node { node: *node },
            TreeLocation::Edge { edge, offset } => LocationDoc::Edge {
                edge: *edge,
                offset: offset.to_string(),
            },
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RNodeDoc {
    pub id: usize,
    /// Point label, or `null` for a Steiner node.
    pub point: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct REdgeDoc {
    pub a: usize,
    pub b: usize,
    pub length: String,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct EntryDoc {
    pub level: usize,
    pub location: LocationDoc,
    pub depth: String,
    pub claim: String,
    pub pred: Option<usize>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SideDoc {
    pub path: Vec<String>,
    pub v1: usize,
    pub reach: String,
    pub tree_length: String,
    /// `[a_k, b_k, c_k]` per step.
    pub terms: Vec<[String; 3]>,
    pub term_i: Option<String>,
    pub term_ii: String,
}

impl SideDoc {
    fn new(x: &MetricSpace, s: &SideCheck) -> Self {
        SideDoc {
            path: labels(x, s.path.iter().copied()),
            v1: s.v1,
            reach: s.reach.to_string(),
            tree_length: s.tree_length.to_string(),
            terms: s
                .terms
                .iter()
                .map(|(a, b, c)| [a.to_string(), b.to_string(), c.to_string()])
                .collect(),
            term_i: s.term_i.as_ref().map(|t| t.to_string()),
            term_ii: s.term_ii.to_string(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct PairDoc {
    pub pair: [String; 2],
    pub meet: String,
    pub sides: [Option<SideDoc>; 2],
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct ComponentDoc {
    pub edges: Vec<usize>,
    pub steiner: Vec<usize>,
    pub boundary: Vec<String>,
    pub root: LocationDoc,
    pub entries: Vec<EntryDoc>,
    /// Each level as indices into `entries`.
    pub frontiers: Vec<Vec<usize>>,
    pub tree_edges: Vec<[String; 2]>,
    pub checks: Vec<PairDoc>,
}

/// Everything the sphere-halving construction computed: the realization,
/// the per-component frontiers and claims, and the checked pair terms.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct TraceDoc {
    pub nodes: Vec<RNodeDoc>,
    pub edges: Vec<REdgeDoc>,
    pub components: Vec<ComponentDoc>,
}

impl TraceDoc {
    pub fn new(x: &MetricSpace, g: &GuptaConstruction) -> Self {
        let r = &g.rtree;
        let nodes = (0..r.node_count())
            .map(|id| RNodeDoc {
                id,
                point: match r.kind(id) {
                    NodeKind::Point(p) => Some(x.label(p).to_string()),
                    NodeKind::Steiner => None,
                },
            })
            .collect();
        let edges = r
            .edges()
            .iter()
            .map(|e| REdgeDoc {
                a: e.a,
                b: e.b,
                length: e.length.to_string(),
            })
            .collect();
        let pair = |a: usize, b: usize| [x.label(a).to_string(), x.label(b).to_string()];
        let components = g
            .components
            .iter()
            .map(|(comp, st)| ComponentDoc {
                edges: comp.edges.clone(),
                steiner: comp.steiner.clone(),
                boundary: labels(x, comp.boundary.iter().copied()),
                root: (&st.root).into(),
                entries: st
                    .entries
                    .iter()
                    .map(|e| EntryDoc {
                        level: e.level,
                        location: (&e.location).into(),
                        depth: e.depth.to_string(),
                        claim: x.label(e.claim).to_string(),
                        pred: e.pred,
                    })
                    .collect(),
                frontiers: st.frontiers.clone(),
                tree_edges: st.edges.iter().map(|&(a, b)| pair(a, b)).collect(),
                checks: st
                    .checks
                    .iter()
                    .map(|c| PairDoc {
                        pair: pair(c.pair.0, c.pair.1),
                        meet: x.label(c.meet).to_string(),
                        sides: [
                            c.sides[0].as_ref().map(|s| SideDoc::new(x, s)),
                            c.sides[1].as_ref().map(|s| SideDoc::new(x, s)),
                        ],
                    })
                    .collect(),
            })
            .collect();
        TraceDoc {
            nodes,
            edges,
            components,
        }
    }
}
