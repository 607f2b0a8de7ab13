//! Small connected configurations: limiting probabilities and counts in
//! sampled graphs.
//!
//! A configuration is grown from a root (node 0) by attachments. Each
//! attachment joins an existing node (the parent) to a child by one edge,
//! oriented away from the parent (`Out`) or towards it (`In`). When every
//! attachment introduces a new child the configuration is a tree.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree_model::{conditional_dists, DegreeModel, NodeType};
use crate::sampler::MultiGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("configuration is not a tree")]
    NotATree,
    #[error("attachment {index}: {reason}")]
    BadAttachment { index: usize, reason: String },
    #[error("the root type must be given")]
    WildcardRoot,
    #[error("node type ({j},{k}) lies outside the support")]
    OutOfSupport { j: usize, k: usize },
    #[error("malformed configuration document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Edge runs child → parent.
    In,
    /// Edge runs parent → child.
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub parent: usize,
    pub child: usize,
    pub orientation: Orientation,
}

impl Attachment {
    /// `(source, target)` in configuration node indices.
    pub fn endpoints(&self) -> (usize, usize) {
        match self.orientation {
            Orientation::Out => (self.parent, self.child),
            Orientation::In => (self.child, self.parent),
        }
    }
}

/// Node types (`None` matches any type) and the attachments growing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    nodes: Vec<Option<NodeType>>,
    attachments: Vec<Attachment>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AttachmentDoc {
    parent: usize,
    orientation: Orientation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    child: Option<usize>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    node_type: Option<[usize; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ConfigDoc {
    root: Option<[usize; 2]>,
    #[serde(default)]
    attachments: Vec<AttachmentDoc>,
}

impl Configuration {
    /// Only the root.
    pub fn root(root: Option<NodeType>) -> Self {
        Self {
            nodes: vec![root],
            attachments: Vec::new(),
        }
    }

    /// Attaches a new child of the given type to `parent`. Returns its index.
    pub fn attach(
        &mut self,
        parent: usize,
        orientation: Orientation,
        child_type: Option<NodeType>,
    ) -> Result<usize, ConfigError> {
        let index = self.attachments.len();
        if parent >= self.nodes.len() {
            return Err(ConfigError::BadAttachment {
                index,
                reason: format!("parent {parent} does not exist yet"),
            });
        }
        let child = self.nodes.len();
        self.nodes.push(child_type);
        self.attachments.push(Attachment {
            parent,
            child,
            orientation,
        });
        Ok(child)
    }

    /// Adds an edge between two existing nodes, closing a cycle (or a
    /// self-loop when `parent == child`).
    pub fn close(
        &mut self,
        parent: usize,
        child: usize,
        orientation: Orientation,
    ) -> Result<(), ConfigError> {
        let index = self.attachments.len();
        if parent >= self.nodes.len() || child >= self.nodes.len() {
            return Err(ConfigError::BadAttachment {
                index,
                reason: format!("nodes {parent} and {child} must already exist"),
            });
        }
        self.attachments.push(Attachment {
            parent,
            child,
            orientation,
        });
        Ok(())
    }

    /// Builder shorthand for trees.
    pub fn with(mut self, parent: usize, orientation: Orientation, child: NodeType) -> Self {
        self.attach(parent, orientation, Some(child))
            .expect("parent must exist");
        self
    }

    pub fn nodes(&self) -> &[Option<NodeType>] {
        &self.nodes
    }

    pub fn attachments(&self) -> &[Attachment] {
        &self.attachments
    }

    pub fn edge_count(&self) -> usize {
        self.attachments.len()
    }

    /// Number of nodes added after the root.
    pub fn added_nodes(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_tree(&self) -> bool {
        self.attachments
            .iter()
            .enumerate()
            .all(|(i, a)| a.child == i + 1 && a.parent <= i)
    }

    /// The two-node configuration `source → target`, rooted at the target.
    pub fn single_edge(source: NodeType, target: NodeType) -> Self {
        Self::root(Some(target)).with(0, Orientation::In, source)
    }

    /// Two nodes joined by edges in both directions.
    pub fn two_cycle() -> Self {
        let mut c = Self::root(None);
        c.attach(0, Orientation::Out, None).expect("root exists");
        c.close(0, 1, Orientation::In).expect("both exist");
        c
    }

    /// A single node with an edge to itself.
    pub fn self_loop() -> Self {
        let mut c = Self::root(None);
        c.close(0, 0, Orientation::Out).expect("root exists");
        c
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let doc: ConfigDoc =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let to_type = |t: Option<[usize; 2]>| t.map(|[j, k]| NodeType::new(j, k));
        let mut c = Self::root(to_type(doc.root));
        for (index, a) in doc.attachments.into_iter().enumerate() {
            match a.child {
                None => {
                    c.attach(a.parent, a.orientation, to_type(a.node_type))?;
                }
                Some(child) => {
                    if a.node_type.is_some() {
                        return Err(ConfigError::BadAttachment {
                            index,
                            reason: "an existing child cannot be given a type".into(),
                        });
                    }
                    c.close(a.parent, child, a.orientation)?;
                }
            }
        }
        Ok(c)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let to_pair = |t: &Option<NodeType>| t.map(|t| [t.j, t.k]);
        let mut introduced = 1;
        let attachments: Vec<AttachmentDoc> = self
            .attachments
            .iter()
            .map(|a| {
                if a.child == introduced && a.parent < introduced {
                    introduced += 1;
                    AttachmentDoc {
                        parent: a.parent,
                        orientation: a.orientation,
                        child: None,
                        node_type: to_pair(&self.nodes[a.child]),
                    }
                } else {
                    AttachmentDoc {
                        parent: a.parent,
                        orientation: a.orientation,
                        child: Some(a.child),
                        node_type: None,
                    }
                }
            })
            .collect();
        serde_json::to_value(ConfigDoc {
            root: to_pair(&self.nodes[0]),
            attachments,
        })
        .expect("serialisable")
    }
}

/// Limiting probability that a uniformly chosen edge has source type
/// `(j2, k2)` and target type `(j1, k1)`:
/// `j1 k2 P_{j1k1} P_{j2k2} Q_{k2j1} / (z² Q⁺_{k2} Q⁻_{j1})`.
pub fn two_node_edge_prob(model: &DegreeModel, target: NodeType, source: NodeType) -> f64 {
    let (p, q) = (&model.p, &model.q);
    let dim = p.support().dim();
    if [target.j, target.k, source.j, source.k]
        .iter()
        .any(|&d| d >= dim)
    {
        return 0.0;
    }
    let (j1, k2) = (target.j, source.k);
    if j1 == 0 || k2 == 0 || q.prob(k2, j1) == 0.0 {
        return 0.0;
    }
    let z = p.mean_degree();
    (j1 * k2) as f64
        * p.prob(target.j, target.k)
        * p.prob(source.j, source.k)
        * q.mixing_ratio(k2, j1)
        / (z * z)
}

fn check_types(h: &Configuration, dim: usize) -> Result<(), ConfigError> {
    for t in h.nodes.iter().flatten() {
        if t.j >= dim || t.k >= dim {
            return Err(ConfigError::OutOfSupport { j: t.j, k: t.k });
        }
    }
    Ok(())
}

fn all_types(dim: usize) -> Vec<NodeType> {
    (0..dim)
        .flat_map(|j| (0..dim).map(move |k| NodeType::new(j, k)))
        .collect()
}

/// Walks a tree's attachments, summing over wildcard children. `factor(a,
/// parent, child, used)` gives the weight of attaching `child` and may read
/// how many stubs of the parent are already used.
fn sum_over_tree<F>(h: &Configuration, dim: usize, factor: &F) -> f64
where
    F: Fn(&Attachment, NodeType, NodeType, &[(usize, usize)]) -> f64,
{
    fn go<F>(
        h: &Configuration,
        i: usize,
        assigned: &mut Vec<NodeType>,
        used: &mut Vec<(usize, usize)>,
        types: &[NodeType],
        factor: &F,
    ) -> f64
    where
        F: Fn(&Attachment, NodeType, NodeType, &[(usize, usize)]) -> f64,
    {
        let Some(a) = h.attachments.get(i) else {
            return 1.0;
        };
        let parent = assigned[a.parent];
        let candidates: Vec<NodeType> = match h.nodes[a.child] {
            Some(t) => vec![t],
            None => types.to_vec(),
        };
        let mut total = 0.0;
        for child in candidates {
            let f = factor(a, parent, child, used);
            if f == 0.0 {
                continue;
            }
            // used[v] = (in-stubs used, out-stubs used)
            let (pi, po) = used[a.parent];
            used[a.parent] = match a.orientation {
                Orientation::Out => (pi, po + 1),
                Orientation::In => (pi + 1, po),
            };
            used.push(match a.orientation {
                Orientation::Out => (1, 0),
                Orientation::In => (0, 1),
            });
            assigned.push(child);
            total += f * go(h, i + 1, assigned, used, types, factor);
            assigned.pop();
            used.pop();
            used[a.parent] = (pi, po);
        }
        total
    }
    let root = h.nodes[0].expect("root checked by caller");
    let types = all_types(dim);
    go(h, 0, &mut vec![root], &mut vec![(0, 0)], &types, factor)
}

/// Limiting probability of a tree's node types given the root type: an
/// out-edge to child `m` contributes `P_{k_m|j_m} Q_{j_m|k_parent}`, an in-edge
/// contributes `P_{j_m|k_m} Q_{k_m|j_parent}`. Wildcard children are summed out.
pub fn tree_config_prob(h: &Configuration, model: &DegreeModel) -> Result<f64, ConfigError> {
    if !h.is_tree() {
        return Err(ConfigError::NotATree);
    }
    if h.nodes[0].is_none() {
        return Err(ConfigError::WildcardRoot);
    }
    let dim = model.support().dim();
    check_types(h, dim)?;
    let c = conditional_dists(&model.p, &model.q);
    let factor = |a: &Attachment, parent: NodeType, child: NodeType, _: &[(usize, usize)]| match a
        .orientation
    {
        Orientation::Out => {
            c.p_out_given_in[(child.j, child.k)] * c.q_in_given_out[(parent.k, child.j)]
        }
        Orientation::In => {
            c.p_in_given_out[(child.j, child.k)] * c.q_out_given_in[(child.k, parent.j)]
        }
    };
    Ok(sum_over_tree(h, dim, &factor))
}

/// Limiting expected number of embeddings of a tree per node of the graph:
/// `P_root` times, for each attachment, the number of free stubs on the
/// parent, times the attachment's conditional probability.
pub fn expected_tree_count_per_node(
    h: &Configuration,
    model: &DegreeModel,
) -> Result<f64, ConfigError> {
    if !h.is_tree() {
        return Err(ConfigError::NotATree);
    }
    let Some(root) = h.nodes[0] else {
        return Err(ConfigError::WildcardRoot);
    };
    let dim = model.support().dim();
    check_types(h, dim)?;
    let c = conditional_dists(&model.p, &model.q);
    let factor = |a: &Attachment, parent: NodeType, child: NodeType, used: &[(usize, usize)]| {
        let (ui, uo) = used[a.parent];
        match a.orientation {
            Orientation::Out => {
                let free = parent.k.saturating_sub(uo) as f64;
                free * c.p_out_given_in[(child.j, child.k)] * c.q_in_given_out[(parent.k, child.j)]
            }
            Orientation::In => {
                let free = parent.j.saturating_sub(ui) as f64;
                free * c.p_in_given_out[(child.j, child.k)] * c.q_out_given_in[(child.k, parent.j)]
            }
        }
    };
    Ok(model.p.prob(root.j, root.k) * sum_over_tree(h, dim, &factor))
}

/// The two families hanging off the root: the subtree through the root's first
/// attachment, and everything else.
pub fn split_at_root(h: &Configuration) -> Result<(Configuration, Configuration), ConfigError> {
    if !h.is_tree() {
        return Err(ConfigError::NotATree);
    }
    let root = h.nodes[0];
    let Some(first) = h.attachments.iter().position(|a| a.parent == 0) else {
        return Ok((Configuration::root(root), Configuration::root(root)));
    };
    let first_child = h.attachments[first].child;
    let mut in_left = vec![false; h.nodes.len()];
    in_left[first_child] = true;
    for a in &h.attachments {
        if a.parent != 0 && in_left[a.parent] {
            in_left[a.child] = true;
        }
    }
    let build = |left: bool| {
        let mut map = vec![usize::MAX; h.nodes.len()];
        map[0] = 0;
        let mut c = Configuration::root(root);
        for a in &h.attachments {
            if in_left[a.child] == left {
                let idx = c
                    .attach(map[a.parent], a.orientation, h.nodes[a.child])
                    .expect("parents precede children");
                map[a.child] = idx;
            }
        }
        c
    };
    Ok((build(true), build(false)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LtiReport {
    pub full: f64,
    pub left: f64,
    pub right: f64,
    /// `|full − left·right|`.
    pub product_gap: f64,
}

/// Checks that the root's two families contribute independent factors.
pub fn lti_factorization(h: &Configuration, model: &DegreeModel) -> Result<LtiReport, ConfigError> {
    let (l, r) = split_at_root(h)?;
    let full = tree_config_prob(h, model)?;
    let left = tree_config_prob(&l, model)?;
    let right = tree_config_prob(&r, model)?;
    Ok(LtiReport {
        full,
        left,
        right,
        product_gap: (full - left * right).abs(),
    })
}

fn matches(want: Option<NodeType>, have: NodeType) -> bool {
    want.is_none_or(|t| t == have)
}

/// Number of embeddings of `h` in `g`: injective maps of configuration nodes to
/// graph nodes matching types, together with injective maps of configuration
/// edges to distinct graph edges with matching orientation. Parallel edges
/// give separate embeddings.
pub fn count_config_occurrences(g: &MultiGraph, h: &Configuration) -> u64 {
    let n = g.nodes.len();
    if h.nodes.len() > n || h.attachments.len() > g.edges.len() {
        return 0;
    }
    let mut out_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut in_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, e) in g.edges.iter().enumerate() {
        out_adj[e.src].push((id, e.dst));
        in_adj[e.dst].push((id, e.src));
    }
    let mut counter = Counter {
        g,
        h,
        out_adj: &out_adj,
        in_adj: &in_adj,
        node_map: vec![usize::MAX; h.nodes.len()],
        used_nodes: vec![false; n],
        used_edges: vec![false; g.edges.len()],
    };
    let mut total = 0;
    for v in 0..n {
        if matches(h.nodes[0], g.nodes[v]) {
            counter.node_map[0] = v;
            counter.used_nodes[v] = true;
            total += counter.extend(0);
            counter.used_nodes[v] = false;
        }
    }
    total
}

struct Counter<'a> {
    g: &'a MultiGraph,
    h: &'a Configuration,
    out_adj: &'a [Vec<(usize, usize)>],
    in_adj: &'a [Vec<(usize, usize)>],
    node_map: Vec<usize>,
    used_nodes: Vec<bool>,
    used_edges: Vec<bool>,
}

impl Counter<'_> {
    fn extend(&mut self, i: usize) -> u64 {
        let Some(&a) = self.h.attachments.get(i) else {
            return 1;
        };
        let p = self.node_map[a.parent];
        let adj = match a.orientation {
            Orientation::Out => &self.out_adj[p],
            Orientation::In => &self.in_adj[p],
        };
        let mapped_child = self.node_map[a.child];
        let mut total = 0;
        for &(edge, w) in adj.iter() {
            if self.used_edges[edge] {
                continue;
            }
            if mapped_child != usize::MAX {
                if w != mapped_child {
                    continue;
                }
                self.used_edges[edge] = true;
                total += self.extend(i + 1);
                self.used_edges[edge] = false;
            } else {
                if self.used_nodes[w] || !matches(self.h.nodes[a.child], self.g.nodes[w]) {
                    continue;
                }
                self.used_edges[edge] = true;
                self.used_nodes[w] = true;
                self.node_map[a.child] = w;
                total += self.extend(i + 1);
                self.node_map[a.child] = usize::MAX;
                self.used_nodes[w] = false;
                self.used_edges[edge] = false;
            }
        }
        total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigCountReport {
    pub configuration: serde_json::Value,
    pub count: u64,
    pub graphs: usize,
    pub nodes: usize,
    /// `count / nodes`, embeddings per graph node.
    pub frequency: f64,
    /// Limiting embeddings per node, when `h` is a tree with a typed root.
    pub predicted: Option<f64>,
}

/// Counts `h` across a graph collection (in parallel, summed in order).
pub fn count_in_graphs(
    graphs: &[MultiGraph],
    h: &Configuration,
    model: Option<&DegreeModel>,
) -> ConfigCountReport {
    let count: u64 = graphs
        .par_iter()
        .map(|g| count_config_occurrences(g, h))
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let nodes: usize = graphs.iter().map(|g| g.nodes.len()).sum();
    ConfigCountReport {
        configuration: h.to_json_value(),
        count,
        graphs: graphs.len(),
        nodes,
        frequency: if nodes > 0 {
            count as f64 / nodes as f64
        } else {
            0.0
        },
        predicted: model.and_then(|m| expected_tree_count_per_node(h, m).ok()),
    }
}

/// Per-graph embedding counts at two sizes.
#[derive(Debug, Clone, Serialize)]
pub struct CycleScalingReport {
    pub n_small: usize,
    pub n_large: usize,
    pub mean_small: f64,
    pub mean_large: f64,
    pub se_small: f64,
    pub se_large: f64,
    /// `mean_large / mean_small`.
    pub ratio: f64,
    /// Order predicted from node and edge counts, `(N_large/N_small)^{M−L+1}`.
    pub predicted_order: f64,
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, (var / n).sqrt())
}

/// Compares mean per-graph counts of `h` between two graph collections.
pub fn cycle_order_estimate(
    h: &Configuration,
    small: &[MultiGraph],
    large: &[MultiGraph],
) -> CycleScalingReport {
    let counts = |gs: &[MultiGraph]| -> Vec<f64> {
        gs.par_iter()
            .map(|g| count_config_occurrences(g, h) as f64)
            .collect()
    };
    let (cs, cl) = (counts(small), counts(large));
    let (mean_small, se_small) = mean_and_se(&cs);
    let (mean_large, se_large) = mean_and_se(&cl);
    let n_small = small.first().map_or(0, |g| g.nodes.len());
    let n_large = large.first().map_or(0, |g| g.nodes.len());
    let exponent = h.added_nodes() as f64 - h.edge_count() as f64 + 1.0;
    CycleScalingReport {
        n_small,
        n_large,
        mean_small,
        mean_large,
        se_small,
        se_large,
        ratio: mean_large / mean_small,
        predicted_order: (n_large as f64 / n_small as f64).powf(exponent),
    }
}
