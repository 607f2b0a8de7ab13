//! Exact finite-size combinatorics of the assortative wiring measure.
//!
//! Conditioned on stub margins `e = (e⁻, e⁺)`, a wiring is a pair of
//! permutations matching the `E` out-stubs to the `E` in-stubs, weighted by
//! `Π_ℓ Q_{k_ℓ j_ℓ}`. Everything here is exact for small `E`: the partition
//! function is a sum over contingency tables with the prescribed margins, and
//! moments follow either from that sum directly or from ratios of partition
//! functions at shifted margins. Both routes are exposed so they can be checked
//! against each other.

mod oracle;
pub mod rational;
mod tables;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use thiserror::Error;

use crate::degree_model::{EdgeType, EdgeTypeDist};

pub use oracle::{
    enumerate_wirings_oracle, for_each_wiring, OracleResult, StubLabels, StubPair, TableTally,
    WiringSequence, ORACLE_MAX_EDGES,
};
pub(crate) use tables::CompensatedSum;
pub use tables::{for_each_table, EdgeTypeMatrix, EnumerationCaps, Margins};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("margin vectors must be non-empty and equally long (got {minus} and {plus})")]
    MarginShape { minus: usize, plus: usize },
    #[error("in-stub total {in_total} differs from out-stub total {out_total}")]
    MarginMismatch { in_total: u64, out_total: u64 },
    #[error("{what} = {value} exceeds the enumeration cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: u64,
        cap: u64,
    },
    #[error("no edge-type table with positive weight has these margins")]
    ZeroPartition,
    #[error("wiring is inconsistent with the stub census: {0}")]
    InconsistentWiring(String),
    #[error("margins have K = {margins} but Q has K = {q}")]
    SupportMismatch { margins: usize, q: usize },
    #[error("edge type ({k},{j}) is outside the support")]
    TypeOutOfRange { k: usize, j: usize },
}

/// Exponential tilting parameters `v_kj`, indexed like `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TiltVector {
    dim: usize,
    values: Vec<f64>,
}

impl TiltVector {
    pub fn zeros(max_degree: usize) -> Self {
        let dim = max_degree + 1;
        Self {
            dim,
            values: vec![0.0; dim * dim],
        }
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.dim + j]
    }

    pub fn set(&mut self, k: usize, j: usize, v: f64) {
        assert!(v.is_finite(), "tilt entries must be finite");
        self.values[k * self.dim + j] = v;
    }

    pub fn with(mut self, k: usize, j: usize, v: f64) -> Self {
        self.set(k, j, v);
        self
    }
}

fn check_support(margins: &Margins, q: &EdgeTypeDist) -> Result<(), ExactError> {
    let qk = q.support().max_degree();
    if margins.max_degree() != qk {
        return Err(ExactError::SupportMismatch {
            margins: margins.max_degree(),
            q: qk,
        });
    }
    Ok(())
}

fn check_type(margins: &Margins, k: usize, j: usize) -> Result<(), ExactError> {
    if k == 0 || j == 0 || k > margins.max_degree() || j > margins.max_degree() {
        return Err(ExactError::TypeOutOfRange { k, j });
    }
    Ok(())
}

/// `Σ_kj e_kj log(Q_kj e^{v_kj}) − log e_kj!` for one table.
fn log_table_weight(table: &EdgeTypeMatrix, q: &EdgeTypeDist, tilt: Option<&TiltVector>) -> f64 {
    let mut lw = 0.0;
    for (k, j, n) in table.cells() {
        if n == 0 {
            continue;
        }
        let qkj = q.prob(k, j);
        if qkj == 0.0 {
            return f64::NEG_INFINITY;
        }
        let v = tilt.map_or(0.0, |t| t.get(k, j));
        lw += n as f64 * (qkj.ln() + v) - ln_factorial(n);
    }
    lw
}

/// Log-weights of every table with positive weight, in enumeration order.
fn weighted_tables(
    margins: &Margins,
    q: &EdgeTypeDist,
    tilt: Option<&TiltVector>,
    caps: EnumerationCaps,
) -> Result<Vec<(EdgeTypeMatrix, f64)>, ExactError> {
    check_support(margins, q)?;
    let mut out = Vec::new();
    for_each_table(
        margins,
        caps,
        |k, j| q.prob(k, j) > 0.0,
        |t| out.push((t.clone(), log_table_weight(t, q, tilt))),
    )?;
    Ok(out)
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut s = CompensatedSum::default();
    for v in values {
        s.add((v - max).exp());
    }
    max + s.value().ln()
}

/// `log Z_v(e)`, where `Z_v = Σ_tables Π_kj (Q_kj e^{v_kj})^{e_kj} / e_kj!`.
/// Returns `-inf` when no table has positive weight.
pub fn log_tilted_partition(
    margins: &Margins,
    q: &EdgeTypeDist,
    tilt: Option<&TiltVector>,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    let tables = weighted_tables(margins, q, tilt, caps)?;
    Ok(log_sum_exp(tables.iter().map(|(_, lw)| *lw)))
}

pub fn tilted_partition_z(
    margins: &Margins,
    q: &EdgeTypeDist,
    tilt: Option<&TiltVector>,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    Ok(log_tilted_partition(margins, q, tilt, caps)?.exp())
}

/// `log C` with `C = E! Π_j e⁻_j! Π_k e⁺_k! Z_0`, the total weight of all
/// permutation-pair wirings.
pub fn log_partition_c(
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    let edges = margins.edges()?;
    let log_z = log_tilted_partition(margins, q, None, caps)?;
    let factorials: f64 = margins
        .minus
        .iter()
        .chain(&margins.plus)
        .map(|&n| ln_factorial(n))
        .sum();
    Ok(ln_factorial(edges) + factorials + log_z)
}

pub fn partition_c(
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    Ok(log_partition_c(margins, q, caps)?.exp())
}

fn big_factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Number of wirings realising `table`: `E! Π_j e⁻_j! Π_k e⁺_k! / Π_kj e_kj!`.
pub fn wiring_count(table: &EdgeTypeMatrix) -> BigUint {
    let m = table.margins();
    let mut num = big_factorial(table.total());
    for &n in m.minus.iter().chain(&m.plus) {
        num *= big_factorial(n);
    }
    let den = table
        .cells()
        .fold(BigUint::one(), |acc, (_, _, n)| acc * big_factorial(n));
    num / den
}

/// Probability `C⁻¹ Π_kj Q_kj^{e_kj(W)}` of one stub-level wiring.
pub fn wiring_probability(
    wiring: &WiringSequence,
    stubs: &StubLabels,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    let table = wiring.edge_type_matrix(stubs)?;
    let margins = stubs.margins();
    check_support(&margins, q)?;
    let log_c = log_partition_c(&margins, q, caps)?;
    if log_c == f64::NEG_INFINITY {
        return Err(ExactError::ZeroPartition);
    }
    let mut lw = 0.0;
    for (k, j, n) in table.cells() {
        if n > 0 {
            let qkj = q.prob(k, j);
            if qkj == 0.0 {
                return Ok(0.0);
            }
            lw += n as f64 * qkj.ln();
        }
    }
    Ok((lw - log_c).exp())
}

/// A conditional moment computed along two independent routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeMoment {
    /// Weighted average over all edge-type tables.
    pub by_tables: f64,
    /// Closed form in ratios of partition functions at shifted margins.
    pub by_partition_ratio: f64,
}

impl EdgeMoment {
    pub fn value(&self) -> f64 {
        self.by_tables
    }

    pub fn route_gap(&self) -> f64 {
        (self.by_tables - self.by_partition_ratio).abs()
    }
}

fn table_moments(
    margins: &Margins,
    q: &EdgeTypeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<(f64, f64), ExactError> {
    let tables = weighted_tables(margins, q, None, caps)?;
    let max = tables
        .iter()
        .map(|(_, lw)| *lw)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(ExactError::ZeroPartition);
    }
    let mut total = CompensatedSum::default();
    let mut first = CompensatedSum::default();
    for (t, lw) in &tables {
        let w = (lw - max).exp();
        total.add(w);
        first.add(t.get(k, j) as f64 * w);
    }
    let mean = first.value() / total.value();
    let mut second = CompensatedSum::default();
    for (t, lw) in &tables {
        let d = t.get(k, j) as f64 - mean;
        second.add(d * d * (lw - max).exp());
    }
    Ok((mean, second.value() / total.value()))
}

/// `Z_0(e − n δ_jk) / Z_0(e)`, zero if the shifted margins are infeasible.
fn shifted_ratio(
    margins: &Margins,
    q: &EdgeTypeDist,
    k: usize,
    j: usize,
    n: u64,
    log_z: f64,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    match margins.without_n(k, j, n) {
        None => Ok(0.0),
        Some(shifted) => {
            let ls = log_tilted_partition(&shifted, q, None, caps)?;
            Ok((ls - log_z).exp())
        }
    }
}

/// `E[e_kj | e]`.
pub fn exact_edge_mean(
    margins: &Margins,
    q: &EdgeTypeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<EdgeMoment, ExactError> {
    check_type(margins, k, j)?;
    let (by_tables, _) = table_moments(margins, q, k, j, caps)?;
    let log_z = log_tilted_partition(margins, q, None, caps)?;
    let by_partition_ratio = q.prob(k, j) * shifted_ratio(margins, q, k, j, 1, log_z, caps)?;
    Ok(EdgeMoment {
        by_tables,
        by_partition_ratio,
    })
}

/// `Var[e_kj | e]`.
pub fn exact_edge_variance(
    margins: &Margins,
    q: &EdgeTypeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<EdgeMoment, ExactError> {
    check_type(margins, k, j)?;
    let (_, by_tables) = table_moments(margins, q, k, j, caps)?;
    let log_z = log_tilted_partition(margins, q, None, caps)?;
    let qkj = q.prob(k, j);
    let r1 = shifted_ratio(margins, q, k, j, 1, log_z, caps)?;
    let r2 = shifted_ratio(margins, q, k, j, 2, log_z, caps)?;
    let by_partition_ratio = qkj * r1 + qkj * qkj * (r2 - r1 * r1);
    Ok(EdgeMoment {
        by_tables,
        by_partition_ratio,
    })
}

/// Cumulant generating function `F(v; e) = log E[exp(Σ v_kj e_kj) | e]`.
pub fn cumulant_generating_f(
    tilt: &TiltVector,
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    let log_z0 = log_tilted_partition(margins, q, None, caps)?;
    if log_z0 == f64::NEG_INFINITY {
        return Err(ExactError::ZeroPartition);
    }
    Ok(log_tilted_partition(margins, q, Some(tilt), caps)? - log_z0)
}

/// Probability that the first `M = types.len()` edges of an exact wiring have
/// the given types: `(E−M)!/E! Π_i E[e_{k_i j_i} | e(i−1)]`, where `e(i)` are
/// the margins left after the first `i` edges. A step whose margins admit no
/// positive-weight table contributes probability 0.
pub fn joint_first_m_prob(
    margins: &Margins,
    q: &EdgeTypeDist,
    types: &[EdgeType],
    caps: EnumerationCaps,
) -> Result<f64, ExactError> {
    check_support(margins, q)?;
    let edges = margins.edges()?;
    if types.len() as u64 > edges {
        return Err(ExactError::InconsistentWiring(format!(
            "asked for {} edges out of {edges}",
            types.len()
        )));
    }
    for t in types {
        check_type(margins, t.k, t.j)?;
    }
    let mut current = margins.clone();
    let mut log_z = log_tilted_partition(&current, q, None, caps)?;
    if log_z == f64::NEG_INFINITY {
        return Err(ExactError::ZeroPartition);
    }
    let mut prob = 1.0;
    for (i, t) in types.iter().enumerate() {
        let qkj = q.prob(t.k, t.j);
        let Some(next) = current.without(t.k, t.j) else {
            return Ok(0.0);
        };
        if qkj == 0.0 {
            return Ok(0.0);
        }
        let log_next = log_tilted_partition(&next, q, None, caps)?;
        if log_next == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let mean = qkj * (log_next - log_z).exp();
        prob *= mean / (edges - i as u64) as f64;
        current = next;
        log_z = log_next;
    }
    Ok(prob)
}

/// Probability of every positive-weight edge-type table under the exact measure.
pub fn table_distribution(
    margins: &Margins,
    q: &EdgeTypeDist,
    caps: EnumerationCaps,
) -> Result<Vec<(EdgeTypeMatrix, f64)>, ExactError> {
    let tables = weighted_tables(margins, q, None, caps)?;
    let log_z = log_sum_exp(tables.iter().map(|(_, lw)| *lw));
    if log_z == f64::NEG_INFINITY {
        return Err(ExactError::ZeroPartition);
    }
    Ok(tables
        .into_iter()
        .filter(|(_, lw)| *lw > f64::NEG_INFINITY)
        .map(|(t, lw)| (t, (lw - log_z).exp()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;

    fn e3() -> Margins {
        Margins::from_counts(&[1, 2], &[1, 2]).unwrap()
    }

    fn caps() -> EnumerationCaps {
        EnumerationCaps::default()
    }

    #[test]
    fn partition_single_edge() {
        let model = fixtures::single_type();
        let m = Margins::from_counts(&[1], &[1]).unwrap();
        assert_relative_eq!(tilted_partition_z(&m, &model.q, None, caps()).unwrap(), 1.0);
        assert_relative_eq!(partition_c(&m, &model.q, caps()).unwrap(), 1.0);
    }

    #[test]
    fn partition_values_for_three_edges() {
        let qi = fixtures::balanced_two_independent().q;
        let qd = fixtures::balanced_two_disassortative().q;
        let z = tilted_partition_z(&e3(), &qi, None, caps()).unwrap();
        assert_relative_eq!(z, 24.0 / 729.0, max_relative = 1e-14);
        let z = tilted_partition_z(&e3(), &qd, None, caps()).unwrap();
        assert_relative_eq!(z, 1.0 / 27.0, max_relative = 1e-14);
        assert_relative_eq!(
            partition_c(&e3(), &qi, caps()).unwrap(),
            576.0 / 729.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            partition_c(&e3(), &qd, caps()).unwrap(),
            8.0 / 9.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn wiring_counts() {
        let a = EdgeTypeMatrix::from_rows(&[vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
        let b = EdgeTypeMatrix::from_rows(&[vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1]]);
        assert_eq!(wiring_count(&a), BigUint::from(12u32));
        assert_eq!(wiring_count(&b), BigUint::from(24u32));
        let one = EdgeTypeMatrix::from_rows(&[vec![0, 0], vec![0, 1]]);
        assert_eq!(wiring_count(&one), BigUint::from(1u32));
    }

    #[test]
    fn means_and_variances_three_edges() {
        let qi = fixtures::balanced_two_independent().q;
        let qd = fixtures::balanced_two_disassortative().q;
        let expect = [
            ((2, 2), 4.0 / 3.0),
            ((1, 1), 1.0 / 3.0),
            ((1, 2), 2.0 / 3.0),
            ((2, 1), 2.0 / 3.0),
        ];
        for ((k, j), v) in expect {
            let m = exact_edge_mean(&e3(), &qi, k, j, caps()).unwrap();
            assert_relative_eq!(m.by_tables, v, max_relative = 1e-13);
            assert_relative_eq!(m.by_partition_ratio, v, max_relative = 1e-13);
        }
        let m = exact_edge_mean(&e3(), &qd, 2, 2, caps()).unwrap();
        assert_relative_eq!(m.value(), 1.0, max_relative = 1e-13);
        let m = exact_edge_mean(&e3(), &qd, 1, 1, caps()).unwrap();
        assert_eq!(m.by_tables, 0.0);
        assert_eq!(m.by_partition_ratio, 0.0);

        let v = exact_edge_variance(&e3(), &qi, 2, 2, caps()).unwrap();
        assert_relative_eq!(v.by_tables, 2.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(v.by_partition_ratio, 2.0 / 9.0, max_relative = 1e-12);
        let v = exact_edge_variance(&e3(), &qd, 2, 2, caps()).unwrap();
        assert!(v.by_tables.abs() < 1e-14);
        assert!(v.by_partition_ratio.abs() < 1e-14);

        let one = Margins::from_counts(&[1], &[1]).unwrap();
        let q1 = fixtures::single_type().q;
        assert_eq!(
            exact_edge_mean(&one, &q1, 1, 1, caps()).unwrap().value(),
            1.0
        );
        assert_eq!(
            exact_edge_variance(&one, &q1, 1, 1, caps())
                .unwrap()
                .value(),
            0.0
        );
    }

    #[test]
    fn zero_partition_reported() {
        let qd = fixtures::balanced_two_disassortative().q;
        let m = Margins::from_counts(&[1, 0], &[1, 0]).unwrap();
        assert_eq!(
            exact_edge_mean(&m, &qd, 1, 1, caps()),
            Err(ExactError::ZeroPartition)
        );
    }

    #[test]
    fn cumulant_function_closed_form() {
        let qi = fixtures::balanced_two_independent().q;
        assert_eq!(
            cumulant_generating_f(&TiltVector::zeros(2), &e3(), &qi, caps()).unwrap(),
            0.0
        );
        for t in [-0.7, 0.3, 1.1] {
            let f = cumulant_generating_f(&TiltVector::zeros(2).with(2, 2, t), &e3(), &qi, caps())
                .unwrap();
            let expected = ((8.0 * (2.0 * t).exp() + 16.0 * t.exp()) / 24.0).ln();
            assert_relative_eq!(f, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn cumulant_slope_is_the_mean() {
        let qi = fixtures::balanced_two_independent().q;
        let h = 1e-5;
        let f = |t: f64| {
            cumulant_generating_f(&TiltVector::zeros(2).with(2, 2, t), &e3(), &qi, caps()).unwrap()
        };
        let slope = (f(h) - f(-h)) / (2.0 * h);
        assert!((slope - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn joint_first_edges() {
        let qi = fixtures::balanced_two_independent().q;
        let qd = fixtures::balanced_two_disassortative().q;
        let p = joint_first_m_prob(&e3(), &qi, &[EdgeType::new(2, 2)], caps()).unwrap();
        assert_relative_eq!(p, 4.0 / 9.0, max_relative = 1e-13);
        let p = joint_first_m_prob(&e3(), &qd, &[EdgeType::new(1, 1)], caps()).unwrap();
        assert_eq!(p, 0.0);
        let types = [
            EdgeType::new(1, 2),
            EdgeType::new(2, 1),
            EdgeType::new(2, 2),
        ];
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for o in orders {
            let seq: Vec<EdgeType> = o.iter().map(|&i| types[i]).collect();
            let p = joint_first_m_prob(&e3(), &qd, &seq, caps()).unwrap();
            assert_relative_eq!(p, 1.0 / 6.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn table_distribution_three_edges() {
        let qi = fixtures::balanced_two_independent().q;
        let dist = table_distribution(&e3(), &qi, caps()).unwrap();
        let mut probs: Vec<f64> = dist.iter().map(|(_, p)| *p).collect();
        probs.sort_by(f64::total_cmp);
        assert_relative_eq!(probs[0], 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(probs[1], 2.0 / 3.0, max_relative = 1e-13);
    }
}
