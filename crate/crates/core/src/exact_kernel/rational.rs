//! Exact rational arithmetic for golden values.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{for_each_table, EdgeTypeMatrix, EnumerationCaps, ExactError, Margins};

/// Default caps in rational mode.
pub fn rational_caps() -> EnumerationCaps {
    EnumerationCaps {
        max_edges: 12,
        max_tables: 1_000_000,
    }
}

/// An edge-type law with rational entries, indexed `[k][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalEdgeDist {
    rows: Vec<Vec<BigRational>>,
}

impl RationalEdgeDist {
    /// Entries are given as `(numerator, denominator)` pairs. Row and column 0
    /// must be zero and the entries must sum to 1.
    pub fn from_fractions(rows: &[Vec<(i64, i64)>]) -> Option<Self> {
        let dim = rows.len();
        let mut out = Vec::with_capacity(dim);
        let mut total = BigRational::zero();
        for (k, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return None;
            }
            let mut r = Vec::with_capacity(dim);
            for (j, &(n, d)) in row.iter().enumerate() {
                if d == 0 || (n != 0 && (k == 0 || j == 0)) {
                    return None;
                }
                let v = BigRational::new(BigInt::from(n), BigInt::from(d));
                if v < BigRational::zero() {
                    return None;
                }
                total += &v;
                r.push(v);
            }
            out.push(r);
        }
        (total == BigRational::one()).then_some(Self { rows: out })
    }

    pub fn max_degree(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn prob(&self, k: usize, j: usize) -> &BigRational {
        &self.rows[k][j]
    }
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn pow(base: &BigRational, e: u64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= base;
    }
    out
}

fn table_weight(table: &EdgeTypeMatrix, q: &RationalEdgeDist) -> BigRational {
    table.cells().fold(BigRational::one(), |acc, (k, j, n)| {
        if n == 0 {
            acc
        } else {
            acc * pow(q.prob(k, j), n) / BigRational::from_integer(factorial(n))
        }
    })
}

fn tables(
    margins: &Margins,
    q: &RationalEdgeDist,
    caps: EnumerationCaps,
) -> Result<Vec<(EdgeTypeMatrix, BigRational)>, ExactError> {
    if margins.max_degree() != q.max_degree() {
        return Err(ExactError::SupportMismatch {
            margins: margins.max_degree(),
            q: q.max_degree(),
        });
    }
    let mut out = Vec::new();
    for_each_table(
        margins,
        caps,
        |k, j| !q.prob(k, j).is_zero(),
        |t| out.push((t.clone(), table_weight(t, q))),
    )?;
    Ok(out)
}

/// `Z_0(e)` exactly.
pub fn partition_z(
    margins: &Margins,
    q: &RationalEdgeDist,
    caps: EnumerationCaps,
) -> Result<BigRational, ExactError> {
    Ok(tables(margins, q, caps)?
        .into_iter()
        .fold(BigRational::zero(), |acc, (_, w)| acc + w))
}

/// `C = E! Π e⁻_j! Π e⁺_k! Z_0(e)` exactly.
pub fn partition_c(
    margins: &Margins,
    q: &RationalEdgeDist,
    caps: EnumerationCaps,
) -> Result<BigRational, ExactError> {
    let edges = margins.edges()?;
    let mut f = factorial(edges);
    for &n in margins.minus.iter().chain(&margins.plus) {
        f *= factorial(n);
    }
    Ok(partition_z(margins, q, caps)? * BigRational::from_integer(f))
}

/// Exact probability of each positive-weight table.
pub fn table_distribution(
    margins: &Margins,
    q: &RationalEdgeDist,
    caps: EnumerationCaps,
) -> Result<Vec<(EdgeTypeMatrix, BigRational)>, ExactError> {
    let ts = tables(margins, q, caps)?;
    let z = ts.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w);
    if z.is_zero() {
        return Err(ExactError::ZeroPartition);
    }
    Ok(ts
        .into_iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(t, w)| (t, w / &z))
        .collect())
}

/// `E[e_kj | e]` by table average.
pub fn edge_mean(
    margins: &Margins,
    q: &RationalEdgeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<BigRational, ExactError> {
    Ok(table_distribution(margins, q, caps)?
        .into_iter()
        .fold(BigRational::zero(), |acc, (t, p)| {
            acc + p * BigRational::from_integer(BigInt::from(t.get(k, j)))
        }))
}

/// `E[e_kj | e]` as `Q_kj Z_0(e − δ_jk) / Z_0(e)`.
pub fn edge_mean_by_ratio(
    margins: &Margins,
    q: &RationalEdgeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<BigRational, ExactError> {
    let z = partition_z(margins, q, caps)?;
    if z.is_zero() {
        return Err(ExactError::ZeroPartition);
    }
    match margins.without(k, j) {
        None => Ok(BigRational::zero()),
        Some(m) => Ok(q.prob(k, j) * partition_z(&m, q, caps)? / z),
    }
}

/// `Var[e_kj | e]` by table average.
pub fn edge_variance(
    margins: &Margins,
    q: &RationalEdgeDist,
    k: usize,
    j: usize,
    caps: EnumerationCaps,
) -> Result<BigRational, ExactError> {
    let dist = table_distribution(margins, q, caps)?;
    let mean = dist.iter().fold(BigRational::zero(), |acc, (t, p)| {
        acc + p * BigRational::from_integer(BigInt::from(t.get(k, j)))
    });
    Ok(dist.iter().fold(BigRational::zero(), |acc, (t, p)| {
        let d = BigRational::from_integer(BigInt::from(t.get(k, j))) - &mean;
        acc + p * &d * &d
    }))
}

/// Wiring count as a big integer; shared with the floating-point kernel.
pub fn wiring_count(table: &EdgeTypeMatrix) -> BigUint {
    super::wiring_count(table)
}
