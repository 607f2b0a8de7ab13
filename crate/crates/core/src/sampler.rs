//! Approximate simulation of assortative configuration graphs.
//!
//! The pipeline is: draw `N` node types i.i.d. from `P`, clip the sequence to
//! make in- and out-stub totals agree, then wire stubs one edge at a time,
//! choosing the edge type `(k, j)` with probability proportional to
//! `e⁻_j e⁺_k Q_kj / (Q⁺_k Q⁻_j)`.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::degree_model::{
    DegreeModel, EdgeType, EdgeTypeDist, NodeType, NodeTypeDist, DEFAULT_CONSISTENCY_TOL,
};
use crate::exact_kernel::{EdgeTypeMatrix, Margins};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("node count must be at least 1")]
    EmptySequence,
    #[error("delta must lie in (0, 1/2), got {0}")]
    BadDelta(f64),
    #[error("sequence is infeasible: {in_total} in-stubs vs {out_total} out-stubs")]
    InfeasibleSequence { in_total: u64, out_total: u64 },
    #[error("node type ({j},{k}) lies outside the support 0..={max_degree}")]
    DegreeOutOfSupport {
        j: usize,
        k: usize,
        max_degree: usize,
    },
    #[error("P and Q are inconsistent (max violation {violation:e})")]
    InconsistentModel { violation: f64 },
    #[error("P and Q have different supports")]
    SupportMismatch,
    #[error("gave up after {redraws} rejected node-type draws")]
    RetriesExhausted { redraws: usize },
    #[error("wiring stalled at step {step} with {remaining} stubs left")]
    DeadEnd { step: usize, remaining: u64 },
}

/// Deterministic generator for sample `stream` of a run seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Node types `(j_i, k_i)` for `i = 0..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTypeSequence {
    nodes: Vec<NodeType>,
    max_degree: usize,
}

impl NodeTypeSequence {
    pub fn new(nodes: Vec<NodeType>, max_degree: usize) -> Result<Self, SamplerError> {
        if let Some(t) = nodes.iter().find(|t| t.j > max_degree || t.k > max_degree) {
            return Err(SamplerError::DegreeOutOfSupport {
                j: t.j,
                k: t.k,
                max_degree,
            });
        }
        Ok(Self { nodes, max_degree })
    }

    pub fn from_pairs(pairs: &[(usize, usize)], max_degree: usize) -> Result<Self, SamplerError> {
        Self::new(
            pairs.iter().map(|&(j, k)| NodeType::new(j, k)).collect(),
            max_degree,
        )
    }

    pub fn nodes(&self) -> &[NodeType] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn in_total(&self) -> u64 {
        self.nodes.iter().map(|t| t.j as u64).sum()
    }

    pub fn out_total(&self) -> u64 {
        self.nodes.iter().map(|t| t.k as u64).sum()
    }

    /// `D = Σ_i (k_i − j_i)`.
    pub fn discrepancy(&self) -> i64 {
        self.out_total() as i64 - self.in_total() as i64
    }
}

/// Draws `n` node types i.i.d. from `P`.
pub fn draw_node_sequence<R: Rng + ?Sized>(
    p: &NodeTypeDist,
    n: usize,
    rng: &mut R,
) -> Result<NodeTypeSequence, SamplerError> {
    if n == 0 {
        return Err(SamplerError::EmptySequence);
    }
    let (types, weights) = flat_node_law(p);
    let alias = WeightedAliasIndex::new(weights).expect("P has positive mass");
    let nodes = (0..n).map(|_| types[alias.sample(rng)]).collect();
    Ok(NodeTypeSequence {
        nodes,
        max_degree: p.support().max_degree(),
    })
}

fn flat_node_law(p: &NodeTypeDist) -> (Vec<NodeType>, Vec<f64>) {
    let dim = p.support().dim();
    let mut types = Vec::new();
    let mut weights = Vec::new();
    for j in 0..dim {
        for k in 0..dim {
            let w = p.prob(j, k);
            if w > 0.0 {
                types.push(NodeType::new(j, k));
                weights.push(w);
            }
        }
    }
    (types, weights)
}

/// `T(N) = N^{1/2 + δ}`.
pub fn clip_threshold(n: usize, delta: f64) -> f64 {
    (n as f64).powf(0.5 + delta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ClipRejection {
    /// `|D|` exceeded `T(N)`.
    Threshold { discrepancy: i64, threshold: f64 },
    /// Fewer than `|D|` nodes could take an extra stub without leaving the support.
    Overflow { needed: u64, eligible: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClipOutcome {
    Accepted {
        sequence: NodeTypeSequence,
        /// Indices that received one extra stub, in increasing order.
        adjusted: Vec<usize>,
    },
    Rejected(ClipRejection),
}

/// Makes a drawn sequence feasible by adding one stub on the deficient side to
/// `|D|` distinct nodes chosen uniformly among those that stay within the
/// support. Draws with `|D| > T(N)` are rejected.
pub fn clip_sequence<R: Rng + ?Sized>(
    x: &NodeTypeSequence,
    delta: f64,
    rng: &mut R,
) -> Result<ClipOutcome, SamplerError> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(SamplerError::BadDelta(delta));
    }
    if x.is_empty() {
        return Err(SamplerError::EmptySequence);
    }
    let d = x.discrepancy();
    if d == 0 {
        return Ok(ClipOutcome::Accepted {
            sequence: x.clone(),
            adjusted: Vec::new(),
        });
    }
    let threshold = clip_threshold(x.len(), delta);
    if d.unsigned_abs() as f64 > threshold {
        return Ok(ClipOutcome::Rejected(ClipRejection::Threshold {
            discrepancy: d,
            threshold,
        }));
    }
    let kmax = x.max_degree;
    // D > 0: too few in-stubs, raise j; D < 0: raise k.
    let raise_in = d > 0;
    let eligible: Vec<usize> = x
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, t)| if raise_in { t.j < kmax } else { t.k < kmax })
        .map(|(i, _)| i)
        .collect();
    let needed = d.unsigned_abs();
    if (eligible.len() as u64) < needed {
        return Ok(ClipOutcome::Rejected(ClipRejection::Overflow {
            needed,
            eligible: eligible.len(),
        }));
    }
    let mut adjusted: Vec<usize> = index::sample(rng, eligible.len(), needed as usize)
        .into_iter()
        .map(|i| eligible[i])
        .collect();
    adjusted.sort_unstable();
    let mut nodes = x.nodes.clone();
    for &i in &adjusted {
        if raise_in {
            nodes[i].j += 1;
        } else {
            nodes[i].k += 1;
        }
    }
    Ok(ClipOutcome::Accepted {
        sequence: NodeTypeSequence {
            nodes,
            max_degree: kmax,
        },
        adjusted,
    })
}

/// Node-type and stub counts of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StubCensus {
    /// `u_jk`, indexed `[j][k]`.
    pub u: Vec<Vec<u64>>,
    pub u_minus: Vec<u64>,
    pub u_plus: Vec<u64>,
    pub e_minus: Vec<u64>,
    pub e_plus: Vec<u64>,
    pub edges: u64,
}

impl StubCensus {
    pub fn margins(&self) -> Margins {
        Margins {
            minus: self.e_minus.clone(),
            plus: self.e_plus.clone(),
        }
    }
}

pub fn stub_census(x: &NodeTypeSequence) -> Result<StubCensus, SamplerError> {
    let dim = x.max_degree + 1;
    let mut u = vec![vec![0u64; dim]; dim];
    for t in &x.nodes {
        u[t.j][t.k] += 1;
    }
    let u_minus: Vec<u64> = u.iter().map(|row| row.iter().sum()).collect();
    let u_plus: Vec<u64> = (0..dim).map(|k| u.iter().map(|row| row[k]).sum()).collect();
    let e_minus: Vec<u64> = u_minus
        .iter()
        .enumerate()
        .map(|(j, &n)| j as u64 * n)
        .collect();
    let e_plus: Vec<u64> = u_plus
        .iter()
        .enumerate()
        .map(|(k, &n)| k as u64 * n)
        .collect();
    let (in_total, out_total) = (e_minus.iter().sum(), e_plus.iter().sum::<u64>());
    if in_total != out_total {
        return Err(SamplerError::InfeasibleSequence {
            in_total,
            out_total,
        });
    }
    Ok(StubCensus {
        u,
        u_minus,
        u_plus,
        e_minus,
        e_plus,
        edges: out_total,
    })
}

/// `R_kj = Q_kj / (Q⁺_k Q⁻_j)`, zero where `Q_kj = 0`.
pub fn mixing_ratios(q: &EdgeTypeDist) -> Vec<Vec<f64>> {
    let dim = q.support().dim();
    (0..dim)
        .map(|k| {
            (0..dim)
                .map(|j| {
                    if q.prob(k, j) > 0.0 {
                        q.mixing_ratio(k, j)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Unnormalised type weights `e⁻_j e⁺_k R_kj` and their sum `C`.
pub fn type_weights(margins: &Margins, q: &EdgeTypeDist) -> (Vec<(EdgeType, f64)>, f64) {
    let r = mixing_ratios(q);
    let mut out = Vec::new();
    let mut c = 0.0;
    for (k, &ep) in margins.plus.iter().enumerate().skip(1) {
        for (j, &em) in margins.minus.iter().enumerate().skip(1) {
            let w = em as f64 * ep as f64 * r[k][j];
            out.push((EdgeType::new(k, j), w));
            c += w;
        }
    }
    (out, c)
}

const RECOMPUTE_EVERY: usize = 4096;

/// Samples edge types for sequential wiring from the remaining stub counts.
///
/// Keeps row sums `A_k = Σ_j e⁻_j R_kj` so a type is drawn in `O(K)`: first
/// `k ∝ e⁺_k A_k`, then `j ∝ e⁻_j R_kj` from the exact row.
#[derive(Debug, Clone)]
pub struct TypeChooser {
    dim: usize,
    r: Vec<f64>,
    e_minus: Vec<u64>,
    e_plus: Vec<u64>,
    a: Vec<f64>,
    since_refresh: usize,
}

impl TypeChooser {
    pub fn new(q: &EdgeTypeDist, margins: &Margins) -> Self {
        let dim = q.support().dim();
        assert_eq!(margins.minus.len(), dim, "margin length must match Q");
        let r = mixing_ratios(q).into_iter().flatten().collect();
        let mut c = Self {
            dim,
            r,
            e_minus: margins.minus.clone(),
            e_plus: margins.plus.clone(),
            a: vec![0.0; dim],
            since_refresh: 0,
        };
        c.refresh();
        c
    }

    fn refresh(&mut self) {
        for k in 0..self.dim {
            let row = &self.r[k * self.dim..(k + 1) * self.dim];
            self.a[k] = row
                .iter()
                .zip(&self.e_minus)
                .map(|(r, &e)| r * e as f64)
                .sum();
        }
        self.since_refresh = 0;
    }

    pub fn remaining(&self) -> u64 {
        self.e_plus.iter().sum()
    }

    pub fn e_minus(&self) -> &[u64] {
        &self.e_minus
    }

    pub fn e_plus(&self) -> &[u64] {
        &self.e_plus
    }

    /// `C(ℓ) = Σ_kj e⁻_j e⁺_k R_kj` for the current counts.
    pub fn normalization(&self) -> f64 {
        self.e_plus
            .iter()
            .zip(&self.a)
            .map(|(&e, a)| e as f64 * a.max(0.0))
            .sum()
    }

    /// Draws the next edge type, or `None` if every remaining type has weight 0.
    pub fn choose<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<EdgeType> {
        for attempt in 0..2 {
            let total = self.normalization();
            if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                let mut k = None;
                for kk in 1..self.dim {
                    let w = self.e_plus[kk] as f64 * self.a[kk].max(0.0);
                    if w <= 0.0 {
                        continue;
                    }
                    k = Some(kk);
                    if u < w {
                        break;
                    }
                    u -= w;
                }
                let k = k?;
                let row = &self.r[k * self.dim..(k + 1) * self.dim];
                let s: f64 = row
                    .iter()
                    .zip(&self.e_minus)
                    .map(|(r, &e)| r * e as f64)
                    .sum();
                if s > 0.0 {
                    let mut v = rng.random::<f64>() * s;
                    let mut j = None;
                    for jj in 1..self.dim {
                        let w = row[jj] * self.e_minus[jj] as f64;
                        if w <= 0.0 {
                            continue;
                        }
                        j = Some(jj);
                        if v < w {
                            break;
                        }
                        v -= w;
                    }
                    return j.map(|j| EdgeType::new(k, j));
                }
            }
            if attempt == 0 {
                self.refresh();
            }
        }
        None
    }

    /// Removes one out-stub of degree `k` and one in-stub of degree `j`.
    pub fn consume(&mut self, k: usize, j: usize) {
        assert!(self.e_plus[k] > 0 && self.e_minus[j] > 0, "no stub left");
        self.e_plus[k] -= 1;
        self.e_minus[j] -= 1;
        self.since_refresh += 1;
        if self.since_refresh >= RECOMPUTE_EVERY {
            self.refresh();
        } else {
            for kk in 0..self.dim {
                self.a[kk] -= self.r[kk * self.dim + j];
            }
        }
    }
}

/// One step of sequential wiring, recorded before the match is made.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiringEvent {
    pub step: usize,
    pub edge_type: EdgeType,
    pub e_minus: Vec<u64>,
    pub e_plus: Vec<u64>,
    pub normalization: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WiringOptions {
    /// Full restarts allowed after a dead end.
    pub max_restarts: usize,
    /// After the last restart, wire the remaining stubs uniformly instead of failing.
    pub uniform_fallback: bool,
    pub record_trace: bool,
}

impl Default for WiringOptions {
    fn default() -> Self {
        Self {
            max_restarts: 10,
            uniform_fallback: true,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Out-degree of `src`.
    pub k: usize,
    /// In-degree of `dst`.
    pub j: usize,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }

    pub fn edge_type(&self) -> EdgeType {
        EdgeType::new(self.k, self.j)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub n: usize,
    pub delta: Option<f64>,
    /// Discrepancy of the accepted draw before clipping.
    pub discrepancy: i64,
    pub clip_count: usize,
    pub redraws: usize,
    pub restarts: usize,
    pub uniform_fallback_used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiGraph {
    pub nodes: Vec<NodeType>,
    pub max_degree: usize,
    pub edges: Vec<Edge>,
    pub meta: GraphMeta,
    #[serde(skip)]
    pub trace: Option<Vec<WiringEvent>>,
}

impl MultiGraph {
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.dst] += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.src] += 1;
        }
        d
    }

    /// True if every node has exactly `j` in-edges and `k` out-edges and every
    /// edge is labelled with its endpoint degrees.
    pub fn realizes_degrees(&self) -> bool {
        let (ins, outs) = (self.in_degrees(), self.out_degrees());
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, t)| ins[i] == t.j && outs[i] == t.k)
            && self
                .edges
                .iter()
                .all(|e| self.nodes[e.src].k == e.k && self.nodes[e.dst].j == e.j)
    }
}

struct StubPools {
    ins: Vec<Vec<usize>>,
    outs: Vec<Vec<usize>>,
}

impl StubPools {
    fn new(nodes: &[NodeType], dim: usize) -> Self {
        let mut ins = vec![Vec::new(); dim];
        let mut outs = vec![Vec::new(); dim];
        for (i, t) in nodes.iter().enumerate() {
            ins[t.j].extend(std::iter::repeat_n(i, t.j));
            outs[t.k].extend(std::iter::repeat_n(i, t.k));
        }
        Self { ins, outs }
    }

    fn take<R: Rng + ?Sized>(pool: &mut Vec<usize>, rng: &mut R) -> usize {
        let i = rng.random_range(0..pool.len());
        pool.swap_remove(i)
    }
}

enum Attempt {
    Done(Vec<Edge>, Option<Vec<WiringEvent>>),
    Stalled {
        edges: Vec<Edge>,
        pools: StubPools,
        trace: Option<Vec<WiringEvent>>,
        step: usize,
        remaining: u64,
    },
}

fn wire_once<R: Rng + ?Sized>(
    nodes: &[NodeType],
    census: &StubCensus,
    q: &EdgeTypeDist,
    record: bool,
    rng: &mut R,
) -> Attempt {
    let dim = q.support().dim();
    let mut pools = StubPools::new(nodes, dim);
    let mut chooser = TypeChooser::new(q, &census.margins());
    let mut edges = Vec::with_capacity(census.edges as usize);
    let mut trace = record.then(Vec::new);
    for step in 0..census.edges as usize {
        let snapshot = trace.as_ref().map(|_| {
            (
                chooser.e_minus().to_vec(),
                chooser.e_plus().to_vec(),
                chooser.normalization(),
            )
        });
        let Some(t) = chooser.choose(rng) else {
            return Attempt::Stalled {
                edges,
                pools,
                trace,
                step,
                remaining: chooser.remaining(),
            };
        };
        if let (Some(tr), Some((e_minus, e_plus, normalization))) = (trace.as_mut(), snapshot) {
            tr.push(WiringEvent {
                step,
                edge_type: t,
                e_minus,
                e_plus,
                normalization,
            });
        }
        chooser.consume(t.k, t.j);
        let src = StubPools::take(&mut pools.outs[t.k], rng);
        let dst = StubPools::take(&mut pools.ins[t.j], rng);
        edges.push(Edge {
            src,
            dst,
            k: t.k,
            j: t.j,
        });
    }
    Attempt::Done(edges, trace)
}

/// Wires a feasible sequence. Edge `ℓ` is the `ℓ`-th match made.
pub fn sequential_wiring<R: Rng + ?Sized>(
    x: &NodeTypeSequence,
    q: &EdgeTypeDist,
    opts: &WiringOptions,
    rng: &mut R,
) -> Result<MultiGraph, SamplerError> {
    if q.support().max_degree() != x.max_degree {
        return Err(SamplerError::SupportMismatch);
    }
    let census = stub_census(x)?;
    let mut restarts = 0;
    loop {
        match wire_once(&x.nodes, &census, q, opts.record_trace, rng) {
            Attempt::Done(edges, trace) => {
                return Ok(MultiGraph {
                    nodes: x.nodes.clone(),
                    max_degree: x.max_degree,
                    edges,
                    meta: GraphMeta {
                        n: x.len(),
                        restarts,
                        ..GraphMeta::default()
                    },
                    trace,
                });
            }
            Attempt::Stalled {
                mut edges,
                pools,
                trace,
                step,
                remaining,
            } => {
                if restarts < opts.max_restarts {
                    restarts += 1;
                    log::debug!("wiring dead end at step {step}; restart {restarts}");
                    continue;
                }
                if !opts.uniform_fallback {
                    return Err(SamplerError::DeadEnd { step, remaining });
                }
                log::warn!(
                    "wiring dead end persisted after {restarts} restarts; matching {remaining} stubs uniformly"
                );
                let mut outs: Vec<(usize, usize)> = pools
                    .outs
                    .iter()
                    .enumerate()
                    .flat_map(|(k, p)| p.iter().map(move |&v| (v, k)))
                    .collect();
                let mut ins: Vec<(usize, usize)> = pools
                    .ins
                    .iter()
                    .enumerate()
                    .flat_map(|(j, p)| p.iter().map(move |&v| (v, j)))
                    .collect();
                outs.shuffle(rng);
                ins.shuffle(rng);
                edges.extend(outs.into_iter().zip(ins).map(|((src, k), (dst, j))| Edge {
                    src,
                    dst,
                    k,
                    j,
                }));
                return Ok(MultiGraph {
                    nodes: x.nodes.clone(),
                    max_degree: x.max_degree,
                    edges,
                    meta: GraphMeta {
                        n: x.len(),
                        restarts,
                        uniform_fallback_used: true,
                        ..GraphMeta::default()
                    },
                    trace,
                });
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerateOptions {
    pub n: usize,
    pub delta: f64,
    pub max_redraws: usize,
    pub wiring: WiringOptions,
}

impl GenerateOptions {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            delta: 0.25,
            max_redraws: 1000,
            wiring: WiringOptions::default(),
        }
    }
}

/// Draws and clips node types until a draw is accepted. Returns the clipped
/// sequence, the raw discrepancy, the number of adjusted nodes and redraws.
pub fn draw_feasible_sequence<R: Rng + ?Sized>(
    p: &NodeTypeDist,
    n: usize,
    delta: f64,
    max_redraws: usize,
    rng: &mut R,
) -> Result<(NodeTypeSequence, i64, usize, usize), SamplerError> {
    let mut redraws = 0;
    loop {
        let x = draw_node_sequence(p, n, rng)?;
        match clip_sequence(&x, delta, rng)? {
            ClipOutcome::Accepted { sequence, adjusted } => {
                return Ok((sequence, x.discrepancy(), adjusted.len(), redraws));
            }
            ClipOutcome::Rejected(reason) => {
                log::debug!("node-type draw rejected: {reason:?}");
                redraws += 1;
                if redraws > max_redraws {
                    return Err(SamplerError::RetriesExhausted { redraws });
                }
            }
        }
    }
}

/// Full pipeline with an explicit RNG.
pub fn generate_graph_with_rng<R: Rng + ?Sized>(
    model: &DegreeModel,
    opts: &GenerateOptions,
    rng: &mut R,
) -> Result<MultiGraph, SamplerError> {
    let report = model.consistency(DEFAULT_CONSISTENCY_TOL);
    if !report.is_consistent {
        return Err(SamplerError::InconsistentModel {
            violation: report.max_violation,
        });
    }
    let (x, discrepancy, clip_count, redraws) =
        draw_feasible_sequence(&model.p, opts.n, opts.delta, opts.max_redraws, rng)?;
    let mut g = sequential_wiring(&x, &model.q, &opts.wiring, rng)?;
    g.meta.delta = Some(opts.delta);
    g.meta.discrepancy = discrepancy;
    g.meta.clip_count = clip_count;
    g.meta.redraws = redraws;
    Ok(g)
}

/// Full pipeline, seeded: sample `stream` of a run with seed `seed`.
pub fn generate_graph(
    model: &DegreeModel,
    opts: &GenerateOptions,
    seed: u64,
    stream: u64,
) -> Result<MultiGraph, SamplerError> {
    let mut rng = rng_for(seed, stream);
    let mut g = generate_graph_with_rng(model, opts, &mut rng)?;
    g.meta.seed = Some(seed);
    g.meta.stream = Some(stream);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub edge_types: EdgeTypeMatrix,
    pub self_loops: usize,
    /// Edges repeating an earlier `(src, dst)` pair, self-loops included.
    pub multi_edges: usize,
    pub is_simple: bool,
}

pub fn classify_graph(g: &MultiGraph) -> GraphSummary {
    let mut edge_types = EdgeTypeMatrix::zeros(g.max_degree);
    let mut self_loops = 0;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(g.edges.len());
    for e in &g.edges {
        edge_types.increment(e.k, e.j);
        if e.is_self_loop() {
            self_loops += 1;
        }
        pairs.push((e.src, e.dst));
    }
    pairs.sort_unstable();
    let multi_edges = pairs.windows(2).filter(|w| w[0] == w[1]).count();
    GraphSummary {
        edge_types,
        self_loops,
        multi_edges,
        is_simple: self_loops == 0 && multi_edges == 0,
    }
}
