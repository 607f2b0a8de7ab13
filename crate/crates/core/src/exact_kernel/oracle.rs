//! Brute-force enumeration over all permutation pairs. Only usable for tiny
//! `E`; it exists to check the table-based kernel.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{EdgeTypeMatrix, ExactError, Margins};
use crate::degree_model::{EdgeType, EdgeTypeDist, NodeType};

/// Largest `E` the oracle accepts (`(7!)² ≈ 2.5·10⁷` wirings).
pub const ORACLE_MAX_EDGES: usize = 7;

/// Degree labels of every in- and out-stub, plus the node owning it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StubLabels {
    pub in_owner: Vec<usize>,
    pub in_degree: Vec<usize>,
    pub out_owner: Vec<usize>,
    pub out_degree: Vec<usize>,
    max_degree: usize,
}

impl StubLabels {
    /// Stubs of a node sequence, in node order; node `i` contributes `j_i`
    /// in-stubs and `k_i` out-stubs.
    pub fn from_node_types(nodes: &[NodeType], max_degree: usize) -> Self {
        let mut s = Self {
            in_owner: Vec::new(),
            in_degree: Vec::new(),
            out_owner: Vec::new(),
            out_degree: Vec::new(),
            max_degree,
        };
        for (i, t) in nodes.iter().enumerate() {
            for _ in 0..t.j {
                s.in_owner.push(i);
                s.in_degree.push(t.j);
            }
            for _ in 0..t.k {
                s.out_owner.push(i);
                s.out_degree.push(t.k);
            }
        }
        s
    }

    /// Stubs matching given margins. Owners are synthetic: each degree class
    /// gets consecutive indices.
    pub fn from_margins(margins: &Margins) -> Self {
        let mut s = Self {
            in_owner: Vec::new(),
            in_degree: Vec::new(),
            out_owner: Vec::new(),
            out_degree: Vec::new(),
            max_degree: margins.max_degree(),
        };
        for (j, &n) in margins.minus.iter().enumerate() {
            for _ in 0..n {
                s.in_owner.push(s.in_owner.len());
                s.in_degree.push(j);
            }
        }
        for (k, &n) in margins.plus.iter().enumerate() {
            for _ in 0..n {
                s.out_owner.push(s.out_owner.len());
                s.out_degree.push(k);
            }
        }
        s
    }

    pub fn edges(&self) -> usize {
        self.in_degree.len()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn margins(&self) -> Margins {
        let dim = self.max_degree + 1;
        let mut minus = vec![0; dim];
        let mut plus = vec![0; dim];
        for &j in &self.in_degree {
            minus[j] += 1;
        }
        for &k in &self.out_degree {
            plus[k] += 1;
        }
        Margins { minus, plus }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StubPair {
    pub out_stub: usize,
    pub in_stub: usize,
}

/// An ordered list of edges, each joining one out-stub to one in-stub.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WiringSequence {
    pub pairs: Vec<StubPair>,
}

impl WiringSequence {
    pub fn edge_types(&self, stubs: &StubLabels) -> Vec<EdgeType> {
        self.pairs
            .iter()
            .map(|p| EdgeType::new(stubs.out_degree[p.out_stub], stubs.in_degree[p.in_stub]))
            .collect()
    }

    /// Edge-type counts, after checking every stub is used exactly once.
    pub fn edge_type_matrix(&self, stubs: &StubLabels) -> Result<EdgeTypeMatrix, ExactError> {
        let e = stubs.edges();
        if self.pairs.len() != e || stubs.out_degree.len() != e {
            return Err(ExactError::InconsistentWiring(format!(
                "{} pairs for {} in-stubs and {} out-stubs",
                self.pairs.len(),
                e,
                stubs.out_degree.len()
            )));
        }
        let mut seen_in = vec![false; e];
        let mut seen_out = vec![false; e];
        let mut m = EdgeTypeMatrix::zeros(stubs.max_degree);
        for p in &self.pairs {
            if p.in_stub >= e || p.out_stub >= e {
                return Err(ExactError::InconsistentWiring(
                    "stub index out of range".into(),
                ));
            }
            if std::mem::replace(&mut seen_in[p.in_stub], true)
                || std::mem::replace(&mut seen_out[p.out_stub], true)
            {
                return Err(ExactError::InconsistentWiring("stub used twice".into()));
            }
            m.increment(stubs.out_degree[p.out_stub], stubs.in_degree[p.in_stub]);
        }
        Ok(m)
    }
}

/// All permutations of `0..n`, via Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Calls `visit(edges, weight)` for every permutation pair `(σ, σ̃)`: edge `ℓ`
/// joins out-stub `σ̃(ℓ)` to in-stub `σ(ℓ)`, weighted by `Π_ℓ Q_{k_ℓ j_ℓ}`.
/// Returns the number of wirings visited, `(E!)²`.
pub fn for_each_wiring<F>(
    stubs: &StubLabels,
    q: &EdgeTypeDist,
    mut visit: F,
) -> Result<u64, ExactError>
where
    F: FnMut(&[StubPair], f64),
{
    let e = stubs.edges();
    if stubs.out_degree.len() != e {
        return Err(ExactError::MarginMismatch {
            in_total: e as u64,
            out_total: stubs.out_degree.len() as u64,
        });
    }
    if e > ORACLE_MAX_EDGES {
        return Err(ExactError::CapExceeded {
            what: "oracle edges",
            value: e as u64,
            cap: ORACLE_MAX_EDGES as u64,
        });
    }
    let perms = permutations(e);
    let mut pairs = vec![
        StubPair {
            out_stub: 0,
            in_stub: 0
        };
        e
    ];
    let mut n = 0u64;
    for sigma in &perms {
        for tilde in &perms {
            let mut w = 1.0;
            for l in 0..e {
                pairs[l] = StubPair {
                    out_stub: tilde[l],
                    in_stub: sigma[l],
                };
                w *= q.prob(stubs.out_degree[tilde[l]], stubs.in_degree[sigma[l]]);
            }
            visit(&pairs, w);
            n += 1;
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TableTally {
    pub wirings: u64,
    pub weight: f64,
}

/// Aggregates of a full oracle pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    /// `Σ_W Π Q`, which equals `C`.
    pub total_weight: f64,
    pub wirings: u64,
    pub tables: BTreeMap<EdgeTypeMatrix, TableTally>,
    /// Weight of each sequence of the first `M` edge types.
    pub first_types: BTreeMap<Vec<EdgeType>, f64>,
}

impl OracleResult {
    pub fn table_probability(&self, table: &EdgeTypeMatrix) -> f64 {
        self.tables
            .get(table)
            .map_or(0.0, |t| t.weight / self.total_weight)
    }

    pub fn first_types_probability(&self, types: &[EdgeType]) -> f64 {
        self.first_types
            .get(types)
            .map_or(0.0, |w| w / self.total_weight)
    }
}

/// Enumerates every wiring, tallying per-table counts and weights and the
/// weight of each ordered prefix of `first_m` edge types.
pub fn enumerate_wirings_oracle(
    stubs: &StubLabels,
    q: &EdgeTypeDist,
    first_m: usize,
) -> Result<OracleResult, ExactError> {
    let e = stubs.edges();
    if first_m > e {
        return Err(ExactError::InconsistentWiring(format!(
            "prefix length {first_m} exceeds {e} edges"
        )));
    }
    let mut tables: BTreeMap<EdgeTypeMatrix, TableTally> = BTreeMap::new();
    let mut first_types: BTreeMap<Vec<EdgeType>, f64> = BTreeMap::new();
    let mut total = 0.0;
    let wirings = for_each_wiring(stubs, q, |pairs, w| {
        let mut m = EdgeTypeMatrix::zeros(stubs.max_degree());
        let mut prefix = Vec::with_capacity(first_m);
        for (l, p) in pairs.iter().enumerate() {
            let t = EdgeType::new(stubs.out_degree[p.out_stub], stubs.in_degree[p.in_stub]);
            m.increment(t.k, t.j);
            if l < first_m {
                prefix.push(t);
            }
        }
        let tally = tables.entry(m).or_default();
        tally.wirings += 1;
        tally.weight += w;
        *first_types.entry(prefix).or_default() += w;
        total += w;
    })?;
    Ok(OracleResult {
        total_weight: total,
        wirings,
        tables,
        first_types,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_kernel::{partition_c, wiring_count, EnumerationCaps};
    use crate::fixtures;
    use approx::assert_relative_eq;
    use num_bigint::BigUint;

    fn balanced_stubs() -> StubLabels {
        StubLabels::from_node_types(&[NodeType::new(1, 2), NodeType::new(2, 1)], 2)
    }

    #[test]
    fn heap_produces_all_permutations() {
        for n in 0..=5 {
            let mut p = permutations(n);
            let len = p.len();
            p.sort();
            p.dedup();
            assert_eq!(p.len(), len);
            assert_eq!(len, (1..=n).product::<usize>());
        }
    }

    #[test]
    fn oracle_matches_kernel_on_three_edges() {
        let stubs = balanced_stubs();
        assert_eq!(
            stubs.margins(),
            Margins::from_counts(&[1, 2], &[1, 2]).unwrap()
        );
        for model in [
            fixtures::balanced_two_independent(),
            fixtures::balanced_two_disassortative(),
        ] {
            let r = enumerate_wirings_oracle(&stubs, &model.q, 1).unwrap();
            assert_eq!(r.wirings, 36);
            let c = partition_c(&stubs.margins(), &model.q, EnumerationCaps::default()).unwrap();
            assert_relative_eq!(r.total_weight, c, max_relative = 1e-14);
            for (t, tally) in &r.tables {
                assert_eq!(BigUint::from(tally.wirings), wiring_count(t));
            }
        }
    }

    #[test]
    fn oracle_first_edge_law() {
        let stubs = balanced_stubs();
        let qi = fixtures::balanced_two_independent().q;
        let r = enumerate_wirings_oracle(&stubs, &qi, 1).unwrap();
        assert_relative_eq!(
            r.first_types_probability(&[EdgeType::new(2, 2)]),
            4.0 / 9.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn invalid_wirings_rejected() {
        let stubs = balanced_stubs();
        let w = WiringSequence {
            pairs: vec![
                StubPair {
                    out_stub: 0,
                    in_stub: 0,
                },
                StubPair {
                    out_stub: 0,
                    in_stub: 1,
                },
                StubPair {
                    out_stub: 2,
                    in_stub: 2,
                },
            ],
        };
        assert!(w.edge_type_matrix(&stubs).is_err());
    }

    #[test]
    fn oracle_cap() {
        let nodes = vec![NodeType::new(1, 1); 8];
        let stubs = StubLabels::from_node_types(&nodes, 1);
        let q = fixtures::single_type().q;
        assert!(matches!(
            for_each_wiring(&stubs, &q, |_, _| {}),
            Err(ExactError::CapExceeded { .. })
        ));
    }
}
