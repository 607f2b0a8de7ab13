//! Node-type and edge-type distributions and the quantities derived from them.
//!
//! A node of type `(j, k)` has in-degree `j` and out-degree `k`. The node-type
//! distribution `P` is stored with rows indexed by `j` and columns by `k`. An
//! edge of type `(k, j)` leaves a node of out-degree `k` and enters a node of
//! in-degree `j`; the edge-type distribution `Q` is stored with rows indexed by
//! `k` and columns by `j`. Both are `(K+1) x (K+1)`, and row/column 0 of `Q` is
//! always zero since degree-0 nodes carry no stubs.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for the consistency relations between `P` and `Q`.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 1e-9;

/// Inputs whose total mass is within this of 1 are taken as they are.
const EXACT_MASS_TOL: f64 = 1e-12;
/// Inputs whose total mass is within this of 1 are renormalised; beyond, rejected.
const RENORMALISE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("maximum degree K must be at least 1")]
    EmptySupport,
    #[error("{name} must be {expected}x{expected}, got {rows}x{cols}")]
    Shape {
        name: &'static str,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{name}[{row}][{col}] = {value} is negative or not finite")]
    BadEntry {
        name: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("{name} has total mass {total}, which is not 1 within {RENORMALISE_TOL}")]
    NotNormalized { name: &'static str, total: f64 },
    #[error("mean degree z = {0} is not positive; P generates no edges")]
    ZeroMeanDegree(f64),
    #[error("mean in-degree {mean_in} differs from mean out-degree {mean_out}")]
    UnbalancedMeanDegree { mean_in: f64, mean_out: f64 },
    #[error("Q puts mass {value} on edge type ({k},{j}) involving degree 0")]
    DegreeZeroEdgeMass { k: usize, j: usize, value: f64 },
    #[error("P has K = {p_k} but Q has K = {q_k}")]
    SupportMismatch { p_k: usize, q_k: usize },
    #[error("invalid parameter document: {0}")]
    Parse(String),
}

/// Maximum in/out degree `K`. Degrees live in `{0, ..., K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeSupport(usize);

impl DegreeSupport {
    pub fn new(max_degree: usize) -> Result<Self, ModelError> {
        if max_degree == 0 {
            return Err(ModelError::EmptySupport);
        }
        Ok(Self(max_degree))
    }

    pub fn max_degree(self) -> usize {
        self.0
    }

    /// Side length `K + 1` of the type matrices.
    pub fn dim(self) -> usize {
        self.0 + 1
    }

    pub fn contains(self, degree: usize) -> bool {
        degree <= self.0
    }
}

/// A node type: in-degree `j`, out-degree `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeType {
    pub j: usize,
    pub k: usize,
}

impl NodeType {
    pub const fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }
}

/// An edge type: out-degree `k` of the source, in-degree `j` of the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeType {
    pub k: usize,
    pub j: usize,
}

impl EdgeType {
    pub const fn new(k: usize, j: usize) -> Self {
        Self { k, j }
    }
}

fn matrix_from_rows(
    name: &'static str,
    support: DegreeSupport,
    rows: &[Vec<f64>],
) -> Result<DMatrix<f64>, ModelError> {
    let dim = support.dim();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(ModelError::Shape {
            name,
            expected: dim,
            rows: rows.len(),
            cols,
        });
    }
    let mut m = DMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, &value) in row.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ModelError::BadEntry {
                    name,
                    row: r,
                    col: c,
                    value,
                });
            }
            m[(r, c)] = value;
        }
    }
    normalise(name, m)
}

fn normalise(name: &'static str, m: DMatrix<f64>) -> Result<DMatrix<f64>, ModelError> {
    let total: f64 = m.iter().sum();
    let gap = (total - 1.0).abs();
    if gap <= EXACT_MASS_TOL {
        Ok(m)
    } else if gap <= RENORMALISE_TOL {
        Ok(m / total)
    } else {
        Err(ModelError::NotNormalized { name, total })
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

/// Marginals of a node-type distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMarginals {
    /// `P⁻_j`, indexed by in-degree `j = 0..=K`.
    pub minus: Vec<f64>,
    /// `P⁺_k`, indexed by out-degree `k = 0..=K`.
    pub plus: Vec<f64>,
    /// Mean degree `z = Σ_k k P⁺_k = Σ_j j P⁻_j`.
    pub z: f64,
}

/// Computes `P⁻`, `P⁺` and the mean degree of a node-type matrix (rows `j`, columns `k`).
pub fn derive_marginals(p: &DMatrix<f64>) -> Result<NodeMarginals, ModelError> {
    let minus: Vec<f64> = p.row_iter().map(|r| r.sum()).collect();
    let plus: Vec<f64> = p.column_iter().map(|c| c.sum()).collect();
    let mean_in: f64 = minus.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
    let mean_out: f64 = plus.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    if mean_out <= 0.0 {
        return Err(ModelError::ZeroMeanDegree(mean_out));
    }
    if (mean_in - mean_out).abs() > DEFAULT_CONSISTENCY_TOL {
        return Err(ModelError::UnbalancedMeanDegree { mean_in, mean_out });
    }
    Ok(NodeMarginals {
        minus,
        plus,
        z: mean_out,
    })
}

/// Node-type distribution `P_jk = P[v has in-degree j and out-degree k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTypeDist {
    support: DegreeSupport,
    p: DMatrix<f64>,
    marginals: NodeMarginals,
}

impl NodeTypeDist {
    /// Builds `P` from nonnegative weights, rows indexed by in-degree.
    pub fn from_rows(support: DegreeSupport, rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let p = matrix_from_rows("P", support, rows)?;
        let marginals = derive_marginals(&p)?;
        Ok(Self {
            support,
            p,
            marginals,
        })
    }

    /// Builds `P` from a sparse list of `((j, k), weight)` entries.
    pub fn from_entries(
        support: DegreeSupport,
        entries: &[(NodeType, f64)],
    ) -> Result<Self, ModelError> {
        let dim = support.dim();
        let mut rows = vec![vec![0.0; dim]; dim];
        for &(t, w) in entries {
            if !support.contains(t.j) || !support.contains(t.k) {
                return Err(ModelError::Shape {
                    name: "P",
                    expected: dim,
                    rows: t.j + 1,
                    cols: t.k + 1,
                });
            }
            rows[t.j][t.k] += w;
        }
        Self::from_rows(support, &rows)
    }

    pub fn support(&self) -> DegreeSupport {
        self.support
    }

    pub fn prob(&self, j: usize, k: usize) -> f64 {
        self.p[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn marginals(&self) -> &NodeMarginals {
        &self.marginals
    }

    pub fn mean_degree(&self) -> f64 {
        self.marginals.z
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.p)
    }
}

/// Edge-type distribution `Q_kj = P[edge has type (k, j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTypeDist {
    support: DegreeSupport,
    q: DMatrix<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl EdgeTypeDist {
    /// Builds `Q` from nonnegative weights, rows indexed by the source out-degree `k`.
    pub fn from_rows(support: DegreeSupport, rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let dim = support.dim();
        if rows.len() == dim && rows.iter().all(|r| r.len() == dim) {
            for (idx, &value) in rows[0].iter().enumerate() {
                if value != 0.0 {
                    return Err(ModelError::DegreeZeroEdgeMass {
                        k: 0,
                        j: idx,
                        value,
                    });
                }
            }
            for (k, row) in rows.iter().enumerate() {
                if row[0] != 0.0 {
                    return Err(ModelError::DegreeZeroEdgeMass {
                        k,
                        j: 0,
                        value: row[0],
                    });
                }
            }
        }
        let q = matrix_from_rows("Q", support, rows)?;
        Ok(Self::from_matrix(support, q))
    }

    fn from_matrix(support: DegreeSupport, q: DMatrix<f64>) -> Self {
        let plus = q.row_iter().map(|r| r.sum()).collect();
        let minus = q.column_iter().map(|c| c.sum()).collect();
        Self {
            support,
            q,
            plus,
            minus,
        }
    }

    pub fn support(&self) -> DegreeSupport {
        self.support
    }

    pub fn prob(&self, k: usize, j: usize) -> f64 {
        self.q[(k, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `Q⁺_k`, indexed by `k = 0..=K`.
    pub fn plus(&self) -> &[f64] {
        &self.plus
    }

    /// `Q⁻_j`, indexed by `j = 0..=K`.
    pub fn minus(&self) -> &[f64] {
        &self.minus
    }

    /// Assortativity ratio `Q_kj / (Q⁺_k Q⁻_j)`; zero where `Q_kj` is zero.
    pub fn mixing_ratio(&self, k: usize, j: usize) -> f64 {
        let q = self.q[(k, j)];
        if q == 0.0 {
            0.0
        } else {
            q / (self.plus[k] * self.minus[j])
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.q)
    }
}

/// Residuals of the consistency relations `Q⁺_k = k P⁺_k / z`, `Q⁻_j = j P⁻_j / z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub is_consistent: bool,
    pub max_violation: f64,
    pub tolerance: f64,
    /// `|Q⁺_k − k P⁺_k / z|` for `k = 0..=K`.
    pub out_residuals: Vec<f64>,
    /// `|Q⁻_j − j P⁻_j / z|` for `j = 0..=K`.
    pub in_residuals: Vec<f64>,
}

pub fn validate_pair(p: &NodeTypeDist, q: &EdgeTypeDist, tol: f64) -> ConsistencyReport {
    let m = p.marginals();
    let dim = p.support().dim().max(q.support().dim());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    let out_residuals: Vec<f64> = (0..dim)
        .map(|k| (at(q.plus(), k) - k as f64 * at(&m.plus, k) / m.z).abs())
        .collect();
    let in_residuals: Vec<f64> = (0..dim)
        .map(|j| (at(q.minus(), j) - j as f64 * at(&m.minus, j) / m.z).abs())
        .collect();
    let max_violation = out_residuals
        .iter()
        .chain(&in_residuals)
        .fold(0.0_f64, |a, &b| a.max(b));
    ConsistencyReport {
        is_consistent: max_violation <= tol,
        max_violation,
        tolerance: tol,
        out_residuals,
        in_residuals,
    }
}

/// The classical configuration-model edge law `Q_kj = j k P⁺_k P⁻_j / z²`.
pub fn independent_edge_dist(p: &NodeTypeDist) -> EdgeTypeDist {
    let m = p.marginals();
    let dim = p.support().dim();
    let q = DMatrix::from_fn(dim, dim, |k, j| {
        (k * j) as f64 * m.plus[k] * m.minus[j] / (m.z * m.z)
    });
    EdgeTypeDist::from_matrix(p.support(), q)
}

/// Conditional degree laws. Each matrix is indexed like its parent: the node
/// conditionals by `(j, k)`, the edge conditionals by `(k, j)`. Rows whose
/// conditioning marginal vanishes are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditionals {
    /// `P_{k|j} = P_jk / P⁻_j`.
    pub p_out_given_in: DMatrix<f64>,
    /// `P_{j|k} = P_jk / P⁺_k`.
    pub p_in_given_out: DMatrix<f64>,
    /// `Q_{j|k} = Q_kj / Q⁺_k`.
    pub q_in_given_out: DMatrix<f64>,
    /// `Q_{k|j} = Q_kj / Q⁻_j`.
    pub q_out_given_in: DMatrix<f64>,
}

pub fn conditional_dists(p: &NodeTypeDist, q: &EdgeTypeDist) -> Conditionals {
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let m = p.marginals();
    let pm = p.matrix();
    let qm = q.matrix();
    let (pd, qd) = (pm.nrows(), qm.nrows());
    Conditionals {
        p_out_given_in: DMatrix::from_fn(pd, pd, |j, k| ratio(pm[(j, k)], m.minus[j])),
        p_in_given_out: DMatrix::from_fn(pd, pd, |j, k| ratio(pm[(j, k)], m.plus[k])),
        q_in_given_out: DMatrix::from_fn(qd, qd, |k, j| ratio(qm[(k, j)], q.plus()[k])),
        q_out_given_in: DMatrix::from_fn(qd, qd, |k, j| ratio(qm[(k, j)], q.minus()[j])),
    }
}

/// Poisson rate of self-loops, `λ = Σ_jk j k P_jk Q_kj / (z² Q⁺_k Q⁻_j)`.
pub fn self_loop_rate(p: &NodeTypeDist, q: &EdgeTypeDist) -> f64 {
    let z = p.mean_degree();
    let dim = p.support().dim().min(q.support().dim());
    let mut rate = 0.0;
    for j in 1..dim {
        for k in 1..dim {
            let pjk = p.prob(j, k);
            if pjk > 0.0 {
                rate += (j * k) as f64 * pjk * q.mixing_ratio(k, j);
            }
        }
    }
    rate / (z * z)
}

/// A `(P, Q)` parameter pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeModel {
    pub p: NodeTypeDist,
    pub q: EdgeTypeDist,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeSpec {
    Matrix(Vec<Vec<f64>>),
    Keyword(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParamsDoc {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: EdgeSpec,
}

impl DegreeModel {
    pub fn new(p: NodeTypeDist, q: EdgeTypeDist) -> Result<Self, ModelError> {
        if p.support() != q.support() {
            return Err(ModelError::SupportMismatch {
                p_k: p.support().max_degree(),
                q_k: q.support().max_degree(),
            });
        }
        Ok(Self { p, q })
    }

    /// `(P, Q)` with `Q` the independent-edge law of `P`.
    pub fn independent(p: NodeTypeDist) -> Self {
        let q = independent_edge_dist(&p);
        Self { p, q }
    }

    pub fn support(&self) -> DegreeSupport {
        self.p.support()
    }

    pub fn consistency(&self, tol: f64) -> ConsistencyReport {
        validate_pair(&self.p, &self.q, tol)
    }

    pub fn self_loop_rate(&self) -> f64 {
        self_loop_rate(&self.p, &self.q)
    }

    /// Limiting mean number of self-loops per graph, `z λ`. Each of the `zN`
    /// edges closes on its own source with probability `λ / N`.
    pub fn expected_self_loops(&self) -> f64 {
        self.p.mean_degree() * self.self_loop_rate()
    }

    /// Parses `{"K": int, "P": [[...]], "Q": [[...]] | "independent"}`.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let doc: ParamsDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        let support = DegreeSupport::new(doc.k)?;
        let p = NodeTypeDist::from_rows(support, &doc.p)?;
        match doc.q {
            EdgeSpec::Keyword(word) if word == "independent" => Ok(Self::independent(p)),
            EdgeSpec::Keyword(word) => Err(ModelError::Parse(format!(
                "Q must be a matrix or \"independent\", got {word:?}"
            ))),
            EdgeSpec::Matrix(rows) => {
                let q = EdgeTypeDist::from_rows(support, &rows)?;
                Self::new(p, q)
            }
        }
    }

    /// Parameter document with an explicit `Q` matrix; re-parses to `self`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = ParamsDoc {
            k: self.support().max_degree(),
            p: self.p.rows(),
            q: EdgeSpec::Matrix(self.q.rows()),
        };
        serde_json::to_value(doc).expect("parameter document serialises")
    }

    /// Parameters together with marginals, `z`, `λ` and the consistency residuals.
    pub fn describe(&self, tol: f64) -> serde_json::Value {
        let m = self.p.marginals();
        serde_json::json!({
            "params": self.to_json_value(),
            "P_minus": m.minus,
            "P_plus": m.plus,
            "z": m.z,
            "Q_minus": &self.q.minus()[1..],
            "Q_plus": &self.q.plus()[1..],
            "lambda": self.self_loop_rate(),
            "expected_self_loops": self.expected_self_loops(),
            "consistency": self.consistency(tol),
        })
    }
}
