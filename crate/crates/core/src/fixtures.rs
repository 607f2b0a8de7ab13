//! Reference parameter sets used by tests, benches and the validation harness.

use rand::Rng;

use crate::degree_model::{DegreeModel, DegreeSupport, EdgeTypeDist, NodeType, NodeTypeDist};

/// `P_{1,1} = 1`, `K = 1`: every node has one in-stub and one out-stub.
pub fn single_type() -> DegreeModel {
    let support = DegreeSupport::new(1).expect("K = 1");
    let p = NodeTypeDist::from_rows(support, &[vec![0.0, 0.0], vec![0.0, 1.0]]).expect("valid P");
    DegreeModel::independent(p)
}

/// The balanced two-type node law `P_{1,2} = P_{2,1} = 1/2`, `K = 2`.
pub fn balanced_two_p() -> NodeTypeDist {
    let support = DegreeSupport::new(2).expect("K = 2");
    NodeTypeDist::from_entries(
        support,
        &[(NodeType::new(1, 2), 0.5), (NodeType::new(2, 1), 0.5)],
    )
    .expect("valid P")
}

/// Balanced two-type model with the independent edge law.
pub fn balanced_two_independent() -> DegreeModel {
    DegreeModel::independent(balanced_two_p())
}

/// Balanced two-type model with `Q = [0, 1/3; 1/3, 1/3]`: links between two
/// degree-1 stubs are forbidden.
pub fn balanced_two_disassortative() -> DegreeModel {
    let t = 1.0 / 3.0;
    let q = EdgeTypeDist::from_rows(
        DegreeSupport::new(2).expect("K = 2"),
        &[vec![0.0; 3], vec![0.0, 0.0, t], vec![0.0, t, t]],
    )
    .expect("valid Q");
    DegreeModel::new(balanced_two_p(), q).expect("same support")
}

/// Balanced two-type model with the positively assortative `Q = [1/6, 1/6; 1/6, 1/2]`.
pub fn balanced_two_assortative() -> DegreeModel {
    let s = 1.0 / 6.0;
    let q = EdgeTypeDist::from_rows(
        DegreeSupport::new(2).expect("K = 2"),
        &[vec![0.0; 3], vec![0.0, s, s], vec![0.0, s, 0.5]],
    )
    .expect("valid Q");
    DegreeModel::new(balanced_two_p(), q).expect("same support")
}

/// Rescales a positive matrix (rows `k`, columns `j`, degree 0 excluded) to the
/// given row and column sums by iterative proportional fitting.
fn fit_margins(seed: &mut [Vec<f64>], rows: &[f64], cols: &[f64]) {
    let n = rows.len();
    for _ in 0..10_000 {
        for (r, row) in seed.iter_mut().enumerate() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v *= rows[r] / s);
            }
        }
        let mut worst = 0.0_f64;
        for c in 0..n {
            let s: f64 = seed.iter().map(|row| row[c]).sum();
            if s > 0.0 {
                seed.iter_mut().for_each(|row| row[c] *= cols[c] / s);
            }
        }
        for (r, row) in seed.iter().enumerate() {
            worst = worst.max((row.iter().sum::<f64>() - rows[r]).abs());
        }
        if worst < 1e-15 {
            break;
        }
    }
}

/// A random consistent `(P, Q)` pair with full support on `{1..K}²` (plus a
/// little mass on degree-0 node types) and a generically assortative `Q`.
pub fn random_consistent_model<R: Rng + ?Sized>(max_degree: usize, rng: &mut R) -> DegreeModel {
    let support = DegreeSupport::new(max_degree).expect("K >= 1");
    let dim = support.dim();
    loop {
        let mut rows = vec![vec![0.0; dim]; dim];
        for (j, row) in rows.iter_mut().enumerate() {
            for (k, v) in row.iter_mut().enumerate() {
                *v = if j == 0 && k == 0 {
                    0.0
                } else if j == 0 || k == 0 {
                    0.05 * rng.random::<f64>()
                } else {
                    0.1 + rng.random::<f64>()
                };
            }
        }
        // Balance mean in- and out-degree by adjusting the diagonal-free mass.
        let total: f64 = rows.iter().flatten().sum();
        rows.iter_mut().flatten().for_each(|v| *v /= total);
        let mean_in: f64 = (0..dim)
            .map(|j| j as f64 * rows[j].iter().sum::<f64>())
            .sum();
        let mean_out: f64 = (0..dim)
            .map(|k| k as f64 * rows.iter().map(|r| r[k]).sum::<f64>())
            .sum();
        // Moving mass between (j, 0) and (0, k) cells shifts the two means apart.
        let gap = mean_in - mean_out;
        let (r, c) = if gap > 0.0 { (0, 1) } else { (1, 0) };
        rows[r][c] += gap.abs();
        let total: f64 = rows.iter().flatten().sum();
        rows.iter_mut().flatten().for_each(|v| *v /= total);
        let Ok(p) = NodeTypeDist::from_rows(support, &rows) else {
            continue;
        };
        let m = p.marginals();
        let q_plus: Vec<f64> = (1..dim).map(|k| k as f64 * m.plus[k] / m.z).collect();
        let q_minus: Vec<f64> = (1..dim).map(|j| j as f64 * m.minus[j] / m.z).collect();
        let mut seed: Vec<Vec<f64>> = (1..dim)
            .map(|_| (1..dim).map(|_| 0.05 + rng.random::<f64>()).collect())
            .collect();
        fit_margins(&mut seed, &q_plus, &q_minus);
        let mut q_rows = vec![vec![0.0; dim]; dim];
        for k in 1..dim {
            q_rows[k][1..dim].copy_from_slice(&seed[k - 1]);
        }
        let q_total: f64 = q_rows.iter().flatten().sum();
        q_rows.iter_mut().flatten().for_each(|v| *v /= q_total);
        if let Ok(q) = EdgeTypeDist::from_rows(support, &q_rows) {
            if let Ok(model) = DegreeModel::new(p, q) {
                return model;
            }
        }
    }
}
