//! Stub margins, edge-type count matrices and contingency-table enumeration.

use serde::{Deserialize, Serialize};

use super::ExactError;

/// Stub margins `(e⁻, e⁺)`. Both vectors are indexed by degree `0..=K`;
/// slot 0 is always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Margins {
    pub minus: Vec<u64>,
    pub plus: Vec<u64>,
}

impl Margins {
    /// Builds margins from per-degree counts for degrees `1..=K`.
    pub fn from_counts(minus: &[u64], plus: &[u64]) -> Result<Self, ExactError> {
        if minus.len() != plus.len() || minus.is_empty() {
            return Err(ExactError::MarginShape {
                minus: minus.len(),
                plus: plus.len(),
            });
        }
        let mut m = vec![0];
        m.extend_from_slice(minus);
        let mut p = vec![0];
        p.extend_from_slice(plus);
        Ok(Self { minus: m, plus: p })
    }

    pub fn max_degree(&self) -> usize {
        self.minus.len() - 1
    }

    pub fn in_total(&self) -> u64 {
        self.minus.iter().sum()
    }

    pub fn out_total(&self) -> u64 {
        self.plus.iter().sum()
    }

    /// Total edge count `E`; errors unless `Σe⁻ = Σe⁺`.
    pub fn edges(&self) -> Result<u64, ExactError> {
        let (i, o) = (self.in_total(), self.out_total());
        if i != o || self.minus.len() != self.plus.len() {
            return Err(ExactError::MarginMismatch {
                in_total: i,
                out_total: o,
            });
        }
        Ok(i)
    }

    /// Margins after removing one in-stub of degree `j` and one out-stub of
    /// degree `k`, or `None` if either class is exhausted.
    pub fn without(&self, k: usize, j: usize) -> Option<Self> {
        self.without_n(k, j, 1)
    }

    pub fn without_n(&self, k: usize, j: usize, n: u64) -> Option<Self> {
        if j >= self.minus.len() || k >= self.plus.len() {
            return None;
        }
        if self.minus[j] < n || self.plus[k] < n {
            return None;
        }
        let mut out = self.clone();
        out.minus[j] -= n;
        out.plus[k] -= n;
        Some(out)
    }

    /// Scales every margin by `m`.
    pub fn scaled(&self, m: u64) -> Self {
        Self {
            minus: self.minus.iter().map(|v| v * m).collect(),
            plus: self.plus.iter().map(|v| v * m).collect(),
        }
    }
}

/// Edge-type counts `e_kj`, rows `k` (source out-degree), columns `j`
/// (target in-degree), both `0..=K`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeTypeMatrix {
    dim: usize,
    counts: Vec<u64>,
}

impl EdgeTypeMatrix {
    pub fn zeros(max_degree: usize) -> Self {
        let dim = max_degree + 1;
        Self {
            dim,
            counts: vec![0; dim * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let dim = rows.len();
        let mut m = Self {
            dim,
            counts: vec![0; dim * dim],
        };
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "edge-type matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                m.set(k, j, v);
            }
        }
        m
    }

    pub fn max_degree(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, k: usize, j: usize) -> u64 {
        self.counts[k * self.dim + j]
    }

    pub fn set(&mut self, k: usize, j: usize, v: u64) {
        self.counts[k * self.dim + j] = v;
    }

    pub fn increment(&mut self, k: usize, j: usize) {
        self.counts[k * self.dim + j] += 1;
    }

    /// `e⁺_k = Σ_j e_kj`.
    pub fn out_margins(&self) -> Vec<u64> {
        (0..self.dim)
            .map(|k| (0..self.dim).map(|j| self.get(k, j)).sum())
            .collect()
    }

    /// `e⁻_j = Σ_k e_kj`.
    pub fn in_margins(&self) -> Vec<u64> {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|k| self.get(k, j)).sum())
            .collect()
    }

    pub fn margins(&self) -> Margins {
        Margins {
            minus: self.in_margins(),
            plus: self.out_margins(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Iterates `(k, j, e_kj)` over all cells.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let dim = self.dim;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i / dim, i % dim, v))
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.dim)
            .map(|k| (0..self.dim).map(|j| self.get(k, j)).collect())
            .collect()
    }
}

/// Limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCaps {
    pub max_edges: u64,
    pub max_tables: u64,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        Self {
            max_edges: 60,
            max_tables: 5_000_000,
        }
    }
}

/// Visits every edge-type matrix with the given margins, in a fixed
/// lexicographic order. Cells where `allowed(k, j)` is false are forced to 0.
///
/// Rows are filled one at a time; each cell's range is pruned so the row can
/// still be completed from the remaining column capacity.
pub fn for_each_table<A, F>(
    margins: &Margins,
    caps: EnumerationCaps,
    allowed: A,
    mut visit: F,
) -> Result<u64, ExactError>
where
    A: Fn(usize, usize) -> bool,
    F: FnMut(&EdgeTypeMatrix),
{
    let edges = margins.edges()?;
    if edges > caps.max_edges {
        return Err(ExactError::CapExceeded {
            what: "edges",
            value: edges,
            cap: caps.max_edges,
        });
    }
    let kmax = margins.max_degree();
    let mut table = EdgeTypeMatrix::zeros(kmax);
    let mut cols = margins.minus.clone();
    let mut count = 0u64;
    let mut state = Filler {
        margins,
        caps,
        allowed: &allowed,
        visit: &mut visit,
        count: &mut count,
    };
    state.fill(
        1,
        1,
        margins.plus.get(1).copied().unwrap_or(0),
        &mut cols,
        &mut table,
    )?;
    Ok(count)
}

struct Filler<'a, A, F> {
    margins: &'a Margins,
    caps: EnumerationCaps,
    allowed: &'a A,
    visit: &'a mut F,
    count: &'a mut u64,
}

impl<A, F> Filler<'_, A, F>
where
    A: Fn(usize, usize) -> bool,
    F: FnMut(&EdgeTypeMatrix),
{
    fn fill(
        &mut self,
        k: usize,
        j: usize,
        row_left: u64,
        cols: &mut [u64],
        table: &mut EdgeTypeMatrix,
    ) -> Result<(), ExactError> {
        let kmax = self.margins.max_degree();
        if k > kmax {
            if cols.iter().all(|&c| c == 0) {
                *self.count += 1;
                if *self.count > self.caps.max_tables {
                    return Err(ExactError::CapExceeded {
                        what: "tables",
                        value: *self.count,
                        cap: self.caps.max_tables,
                    });
                }
                (self.visit)(table);
            }
            return Ok(());
        }
        if j > kmax {
            if row_left != 0 {
                return Ok(());
            }
            let next = self.margins.plus.get(k + 1).copied().unwrap_or(0);
            return self.fill(k + 1, 1, next, cols, table);
        }
        let capacity_after: u64 = (j + 1..=kmax)
            .filter(|&jj| (self.allowed)(k, jj))
            .map(|jj| cols[jj])
            .sum();
        let hi = if (self.allowed)(k, j) {
            row_left.min(cols[j])
        } else {
            0
        };
        let lo = row_left.saturating_sub(capacity_after);
        if lo > hi {
            return Ok(());
        }
        for v in lo..=hi {
            table.set(k, j, v);
            cols[j] -= v;
            self.fill(k, j + 1, row_left - v, cols, table)?;
            cols[j] += v;
        }
        table.set(k, j, 0);
        Ok(())
    }
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(m: &Margins) -> Vec<EdgeTypeMatrix> {
        let mut out = Vec::new();
        for_each_table(
            m,
            EnumerationCaps::default(),
            |_, _| true,
            |t| out.push(t.clone()),
        )
        .unwrap();
        out
    }

    #[test]
    fn two_tables_for_one_two_margins() {
        let m = Margins::from_counts(&[1, 2], &[1, 2]).unwrap();
        let tables = collect(&m);
        assert_eq!(tables.len(), 2);
        for t in &tables {
            assert_eq!(t.margins(), m);
        }
    }

    #[test]
    fn mask_forces_zero_cells() {
        let m = Margins::from_counts(&[1, 2], &[1, 2]).unwrap();
        let mut out = Vec::new();
        for_each_table(
            &m,
            EnumerationCaps::default(),
            |k, j| !(k == 1 && j == 1),
            |t| out.push(t.clone()),
        )
        .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].get(2, 2), 1);
    }

    #[test]
    fn table_count_matches_brute_force() {
        // 3x3 margins: compare against naive enumeration over all cell values.
        let m = Margins::from_counts(&[2, 1, 3], &[1, 3, 2]).unwrap();
        let fast = collect(&m).len();
        let mut naive = 0;
        let cells = 9;
        let mut v = [0u64; 9];
        loop {
            let t = EdgeTypeMatrix::from_rows(&[
                vec![0, 0, 0, 0],
                vec![0, v[0], v[1], v[2]],
                vec![0, v[3], v[4], v[5]],
                vec![0, v[6], v[7], v[8]],
            ]);
            if t.margins() == m {
                naive += 1;
            }
            let mut i = 0;
            while i < cells {
                v[i] += 1;
                if v[i] <= 3 {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
            if i == cells {
                break;
            }
        }
        assert_eq!(fast, naive);
    }

    #[test]
    fn mismatched_margins_rejected() {
        let m = Margins::from_counts(&[1, 2], &[2, 2]).unwrap();
        assert!(matches!(
            for_each_table(&m, EnumerationCaps::default(), |_, _| true, |_| {}),
            Err(ExactError::MarginMismatch { .. })
        ));
    }

    #[test]
    fn edge_cap_enforced() {
        let m = Margins::from_counts(&[40, 40], &[40, 40]).unwrap();
        assert!(matches!(
            for_each_table(&m, EnumerationCaps::default(), |_, _| true, |_| {}),
            Err(ExactError::CapExceeded { what: "edges", .. })
        ));
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-14).abs() < 1e-20);
    }
}
