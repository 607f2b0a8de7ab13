//! Monte Carlo checks of the large-`N` behaviour of sampled graphs.
//!
//! Every suite draws its replicate `r` at size index `i` from the stream
//! `(i << 32) | r` of the run seed, so reports are reproducible and
//! independent of thread count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::degree_model::{DegreeModel, EdgeType, NodeTypeDist, DEFAULT_CONSISTENCY_TOL};
use crate::exact_kernel::Margins;
use crate::sampler::{
    classify_graph, clip_sequence, clip_threshold, draw_feasible_sequence, draw_node_sequence,
    generate_graph_with_rng, rng_for, stub_census, ClipOutcome, GenerateOptions, MultiGraph,
    SamplerError, TypeChooser,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error("P and Q are inconsistent (max violation {0:e})")]
    Inconsistent(f64),
    #[error("invalid suite setting: {0}")]
    Setting(String),
}

/// Stream index for replicate `rep` at size index `size_index`.
pub fn stream_id(size_index: usize, rep: usize) -> u64 {
    ((size_index as u64) << 32) | rep as u64
}

/// Slope window for `log deviation` against `log N`.
pub const SLOPE_WINDOW: (f64, f64) = (-0.65, -0.35);

/// Ordinary least-squares slope of `log y` on `log x`. `None` with fewer than
/// two points or any non-positive value.
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

fn check_model(model: &DegreeModel) -> Result<(), ValidationError> {
    let r = model.consistency(DEFAULT_CONSISTENCY_TOL);
    if r.is_consistent {
        Ok(())
    } else {
        Err(ValidationError::Inconsistent(r.max_violation))
    }
}

fn check_settings(sizes: &[usize], reps: usize) -> Result<(), ValidationError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(ValidationError::Setting("sizes must be positive".into()));
    }
    if reps == 0 {
        return Err(ValidationError::Setting("reps must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeRow {
    pub n: usize,
    pub reps: usize,
    /// Mean over replicates of the max absolute deviation.
    pub max_deviation: f64,
    /// Mean total-variation distance.
    pub tv_distance: f64,
    /// Mean number of edges (node suites: `N`).
    pub mean_edges: f64,
    /// `5 / √mean_edges`.
    pub envelope: f64,
    /// Fraction of replicates whose first node-type draw was accepted.
    pub first_draw_acceptance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LlnReport {
    pub suite: &'static str,
    pub seed: u64,
    pub delta: f64,
    pub rows: Vec<SizeRow>,
    pub slope: Option<f64>,
    pub slope_window: (f64, f64),
    pub slope_ok: bool,
    pub envelope_ok: bool,
    /// Edge suites: edge-type margins always matched the stub census.
    pub margins_consistent: bool,
    pub pass: bool,
}

impl LlnReport {
    fn finish(
        suite: &'static str,
        seed: u64,
        delta: f64,
        rows: Vec<SizeRow>,
        margins_consistent: bool,
    ) -> Self {
        let degenerate = rows.iter().all(|r| r.max_deviation == 0.0);
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.max_deviation)).collect();
        let slope = fit_log_log_slope(&pts);
        let slope_ok = degenerate
            || rows.len() < 2
            || slope.is_some_and(|s| s >= SLOPE_WINDOW.0 && s <= SLOPE_WINDOW.1);
        let envelope_ok = rows.iter().all(|r| r.max_deviation <= r.envelope);
        Self {
            suite,
            seed,
            delta,
            rows,
            slope,
            slope_window: SLOPE_WINDOW,
            slope_ok,
            envelope_ok,
            margins_consistent,
            pass: slope_ok && envelope_ok && margins_consistent,
        }
    }

    /// `n  reps  max_deviation  tv_distance  mean_edges  envelope`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("n\treps\tmax_deviation\ttv_distance\tmean_edges\tenvelope\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{}\t{}\t{:.10e}\t{:.10e}\t{:.3}\t{:.10e}\n",
                r.n, r.reps, r.max_deviation, r.tv_distance, r.mean_edges, r.envelope
            ));
        }
        s
    }
}

/// Max-abs and total-variation distance between two equally shaped tables.
fn deviations(observed: &[f64], expected: &[f64]) -> (f64, f64) {
    let mut max = 0.0_f64;
    let mut tv = 0.0;
    for (o, e) in observed.iter().zip(expected) {
        let d = (o - e).abs();
        max = max.max(d);
        tv += d;
    }
    (max, tv / 2.0)
}

fn p_flat(p: &NodeTypeDist) -> Vec<f64> {
    p.rows().into_iter().flatten().collect()
}

/// Node-type law of clipped sequences: `max_jk |ũ_jk/N − P_jk|`.
pub fn node_lln(
    model: &DegreeModel,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    delta: f64,
) -> Result<LlnReport, ValidationError> {
    check_model(model)?;
    check_settings(sizes, reps)?;
    let expected = p_flat(&model.p);
    let mut rows = Vec::new();
    for (si, &n) in sizes.iter().enumerate() {
        let results: Vec<Result<(f64, f64, bool), ValidationError>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = rng_for(seed, stream_id(si, rep));
                let (x, _, _, redraws) =
                    draw_feasible_sequence(&model.p, n, delta, 1000, &mut rng)?;
                let c = stub_census(&x)?;
                let observed: Vec<f64> =
                    c.u.iter().flatten().map(|&u| u as f64 / n as f64).collect();
                let (max, tv) = deviations(&observed, &expected);
                Ok((max, tv, redraws == 0))
            })
            .collect();
        let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let maxes: Vec<f64> = results.iter().map(|r| r.0).collect();
        let tvs: Vec<f64> = results.iter().map(|r| r.1).collect();
        rows.push(SizeRow {
            n,
            reps,
            max_deviation: mean(&maxes),
            tv_distance: mean(&tvs),
            mean_edges: n as f64,
            envelope: 5.0 / (n as f64).sqrt(),
            first_draw_acceptance: results.iter().filter(|r| r.2).count() as f64 / reps as f64,
        });
    }
    Ok(LlnReport::finish("node-lln", seed, delta, rows, true))
}

type RepStats = (f64, f64, f64, bool, bool);

/// Edge-type frequencies of sampled graphs: `max_kj |e_kj/E − Q_kj|`.
pub fn edge_lln(
    model: &DegreeModel,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    delta: f64,
) -> Result<LlnReport, ValidationError> {
    check_model(model)?;
    check_settings(sizes, reps)?;
    let expected: Vec<f64> = model.q.rows().into_iter().flatten().collect();
    let mut rows = Vec::new();
    let mut margins_consistent = true;
    for (si, &n) in sizes.iter().enumerate() {
        let mut opts = GenerateOptions::new(n);
        opts.delta = delta;
        let results: Vec<Result<RepStats, ValidationError>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = rng_for(seed, stream_id(si, rep));
                let g = generate_graph_with_rng(model, &opts, &mut rng)?;
                let s = classify_graph(&g);
                let e = g.edges.len() as f64;
                let census = stub_census(&crate::sampler::NodeTypeSequence::new(
                    g.nodes.clone(),
                    g.max_degree,
                )?)?;
                let consistent = s.edge_types.margins() == census.margins();
                let observed: Vec<f64> = s
                    .edge_types
                    .rows()
                    .into_iter()
                    .flatten()
                    .map(|c| c as f64 / e)
                    .collect();
                let (max, tv) = deviations(&observed, &expected);
                Ok((max, tv, e, g.meta.redraws == 0, consistent))
            })
            .collect();
        let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        margins_consistent &= results.iter().all(|r| r.4);
        let maxes: Vec<f64> = results.iter().map(|r| r.0).collect();
        let tvs: Vec<f64> = results.iter().map(|r| r.1).collect();
        let edges: Vec<f64> = results.iter().map(|r| r.2).collect();
        let mean_edges = mean(&edges);
        rows.push(SizeRow {
            n,
            reps,
            max_deviation: mean(&maxes),
            tv_distance: mean(&tvs),
            mean_edges,
            envelope: 5.0 / mean_edges.sqrt(),
            first_draw_acceptance: results.iter().filter(|r| r.3).count() as f64 / reps as f64,
        });
    }
    Ok(LlnReport::finish(
        "edge-lln",
        seed,
        delta,
        rows,
        margins_consistent,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub n: usize,
    pub delta: f64,
    pub draws: usize,
    pub accepted: usize,
    pub rate: f64,
    pub threshold: f64,
}

/// Fraction of i.i.d. node-type draws accepted by clipping on the first try.
pub fn clip_acceptance_rate(
    p: &NodeTypeDist,
    n: usize,
    delta: f64,
    draws: usize,
    seed: u64,
) -> Result<AcceptanceReport, ValidationError> {
    let results: Vec<Result<bool, SamplerError>> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = rng_for(seed, d as u64);
            let x = draw_node_sequence(p, n, &mut rng)?;
            Ok(matches!(
                clip_sequence(&x, delta, &mut rng)?,
                ClipOutcome::Accepted { .. }
            ))
        })
        .collect();
    let accepted = results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|&a| a)
        .count();
    Ok(AcceptanceReport {
        n,
        delta,
        draws,
        accepted,
        rate: accepted as f64 / draws as f64,
        threshold: clip_threshold(n, delta),
    })
}

/// Feasible stub margins drawn in law-equivalent form to the sampler, without
/// materialising node sequences: multinomial type counts, then a uniform
/// choice of `|D|` eligible nodes to receive one extra stub.
pub fn draw_census_margins<R: Rng + ?Sized>(
    p: &NodeTypeDist,
    n: usize,
    delta: f64,
    max_redraws: usize,
    rng: &mut R,
) -> Result<Margins, SamplerError> {
    let dim = p.support().dim();
    let kmax = dim - 1;
    let mut redraws = 0;
    loop {
        // Multinomial by successive binomials.
        let mut counts = vec![vec![0u64; dim]; dim];
        let mut left = n as u64;
        let mut mass_left = 1.0;
        for j in 0..dim {
            for k in 0..dim {
                let pjk = p.prob(j, k);
                if left == 0 || pjk <= 0.0 {
                    continue;
                }
                let prob = (pjk / mass_left).clamp(0.0, 1.0);
                let c = Binomial::new(left, prob)
                    .expect("valid binomial")
                    .sample(rng);
                counts[j][k] = c;
                left -= c;
                mass_left -= pjk;
            }
        }
        if left > 0 {
            // Rounding left a remainder: assign it to the last positive type.
            let (j, k) = (0..dim)
                .flat_map(|j| (0..dim).map(move |k| (j, k)))
                .rfind(|&(j, k)| p.prob(j, k) > 0.0)
                .expect("P has mass");
            counts[j][k] += left;
        }
        let d: i64 = counts
            .iter()
            .enumerate()
            .flat_map(|(j, row)| {
                row.iter()
                    .enumerate()
                    .map(move |(k, &c)| (k as i64 - j as i64) * c as i64)
            })
            .sum();
        let accepted = d == 0 || (d.unsigned_abs() as f64) <= clip_threshold(n, delta);
        let raise_in = d > 0;
        let eligible: Vec<(usize, usize, u64)> = counts
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(k, &c)| (j, k, c)))
            .filter(|&(j, k, c)| c > 0 && if raise_in { j < kmax } else { k < kmax })
            .collect();
        let pool: u64 = eligible.iter().map(|e| e.2).sum();
        if accepted && pool >= d.unsigned_abs() {
            let mut need = d.unsigned_abs();
            let mut pool_left = pool;
            for &(j, k, c) in &eligible {
                if need == 0 {
                    break;
                }
                let take = Hypergeometric::new(pool_left, c, need)
                    .expect("valid hypergeometric")
                    .sample(rng);
                pool_left -= c;
                need -= take;
                counts[j][k] -= take;
                if raise_in {
                    counts[j + 1][k] += take;
                } else {
                    counts[j][k + 1] += take;
                }
            }
            let mut minus = vec![0u64; dim];
            let mut plus = vec![0u64; dim];
            for (j, row) in counts.iter().enumerate() {
                for (k, &c) in row.iter().enumerate() {
                    minus[j] += j as u64 * c;
                    plus[k] += k as u64 * c;
                }
            }
            return Ok(Margins { minus, plus });
        }
        redraws += 1;
        if redraws > max_redraws {
            return Err(SamplerError::RetriesExhausted { redraws });
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceCell {
    pub types: Vec<EdgeType>,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstEdgesReport {
    pub n: usize,
    pub l: usize,
    pub reps: usize,
    pub seed: u64,
    pub cells: Vec<SequenceCell>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Plug-in mutual information (nats) between the first two edge types.
    pub mutual_information: Option<f64>,
    /// Observations falling on sequences of zero probability under `Q^⊗L`.
    pub impossible: u64,
    pub pass: bool,
}

impl FirstEdgesReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("types\tobserved\texpected\n");
        for c in &self.cells {
            let t: Vec<String> = c.types.iter().map(|t| format!("{},{}", t.k, t.j)).collect();
            s.push_str(&format!(
                "{}\t{}\t{:.6}\n",
                t.join(";"),
                c.observed,
                c.expected
            ));
        }
        s
    }
}

/// Empirical law of the first `l` edge types against the product law `Q^⊗l`.
pub fn first_edges_distribution(
    model: &DegreeModel,
    n: usize,
    l: usize,
    reps: usize,
    seed: u64,
    delta: f64,
) -> Result<FirstEdgesReport, ValidationError> {
    check_model(model)?;
    check_settings(&[n], reps)?;
    if l == 0 || l > 5 {
        return Err(ValidationError::Setting("L must be in 1..=5".into()));
    }
    let draws: Vec<Result<Vec<EdgeType>, ValidationError>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed, stream_id(0, rep));
            let margins = draw_census_margins(&model.p, n, delta, 1000, &mut rng)?;
            let mut chooser = TypeChooser::new(&model.q, &margins);
            let mut seq = Vec::with_capacity(l);
            for step in 0..l {
                let Some(t) = chooser.choose(&mut rng) else {
                    return Err(SamplerError::DeadEnd {
                        step,
                        remaining: chooser.remaining(),
                    }
                    .into());
                };
                chooser.consume(t.k, t.j);
                seq.push(t);
            }
            Ok(seq)
        })
        .collect();
    let draws = draws.into_iter().collect::<Result<Vec<_>, _>>()?;

    let kmax = model.support().max_degree();
    let types: Vec<(EdgeType, f64)> = (1..=kmax)
        .flat_map(|k| (1..=kmax).map(move |j| EdgeType::new(k, j)))
        .map(|t| (t, model.q.prob(t.k, t.j)))
        .filter(|(_, q)| *q > 0.0)
        .collect();
    let mut expected: BTreeMap<Vec<EdgeType>, f64> = BTreeMap::new();
    expected.insert(Vec::new(), 1.0);
    for _ in 0..l {
        let mut next = BTreeMap::new();
        for (seq, p) in &expected {
            for &(t, q) in &types {
                let mut s = seq.clone();
                s.push(t);
                next.insert(s, p * q);
            }
        }
        expected = next;
    }
    let mut observed: BTreeMap<Vec<EdgeType>, u64> = BTreeMap::new();
    let mut impossible = 0;
    for d in &draws {
        if expected.contains_key(d) {
            *observed.entry(d.clone()).or_default() += 1;
        } else {
            impossible += 1;
        }
    }
    let r = reps as f64;
    let mut chi_square = 0.0;
    let cells: Vec<SequenceCell> = expected
        .iter()
        .map(|(types, &p)| {
            let o = observed.get(types).copied().unwrap_or(0);
            let e = p * r;
            chi_square += (o as f64 - e).powi(2) / e;
            SequenceCell {
                types: types.clone(),
                observed: o,
                expected: e,
            }
        })
        .collect();
    let dof = cells.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64)
            .expect("dof > 0")
            .cdf(chi_square)
    };
    let mutual_information = (l >= 2).then(|| {
        let mut joint: BTreeMap<(EdgeType, EdgeType), f64> = BTreeMap::new();
        let mut a: BTreeMap<EdgeType, f64> = BTreeMap::new();
        let mut b: BTreeMap<EdgeType, f64> = BTreeMap::new();
        for d in &draws {
            *joint.entry((d[0], d[1])).or_default() += 1.0 / r;
            *a.entry(d[0]).or_default() += 1.0 / r;
            *b.entry(d[1]).or_default() += 1.0 / r;
        }
        joint
            .iter()
            .map(|((x, y), &pxy)| pxy * (pxy / (a[x] * b[y])).ln())
            .sum()
    });
    Ok(FirstEdgesReport {
        n,
        l,
        reps,
        seed,
        cells,
        chi_square,
        dof,
        p_value,
        mutual_information,
        impossible,
        pass: impossible == 0 && p_value > 1e-3,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfLoopReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub counts: Vec<usize>,
    pub mean: f64,
    pub variance: f64,
    pub lambda: f64,
    /// `z λ`, the limiting mean count per graph.
    pub expected_count: f64,
    pub standard_error: f64,
    /// `(mean − λ) / standard_error`; zero when both vanish.
    pub z_score: f64,
    /// `(mean − z λ) / standard_error`.
    pub z_score_count: f64,
    pub variance_ratio: Option<f64>,
    pub pass: bool,
}

impl SelfLoopReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("rep\tself_loops\n");
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{i}\t{c}\n"));
        }
        s
    }
}

/// Self-loop counts of sampled graphs against the Poisson rate `λ`.
pub fn self_loop_poisson(
    model: &DegreeModel,
    n: usize,
    reps: usize,
    seed: u64,
    delta: f64,
) -> Result<SelfLoopReport, ValidationError> {
    let graphs = sample_graphs(model, n, reps, seed, 0, delta)?;
    let counts: Vec<usize> = graphs
        .iter()
        .map(|g| g.edges.iter().filter(|e| e.is_self_loop()).count())
        .collect();
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let m = mean(&xs);
    let variance = sample_variance(&xs);
    let lambda = model.self_loop_rate();
    let expected_count = model.expected_self_loops();
    let se = (variance / reps as f64).sqrt();
    let z = |target: f64| {
        if se > 0.0 {
            (m - target) / se
        } else if m == target {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let (z_score, z_score_count) = (z(lambda), z(expected_count));
    Ok(SelfLoopReport {
        n,
        reps,
        seed,
        counts,
        mean: m,
        variance,
        lambda,
        expected_count,
        standard_error: se,
        z_score,
        z_score_count,
        variance_ratio: (m > 0.0).then(|| variance / m),
        pass: z_score.abs() <= 4.0,
    })
}

/// Pearson correlation between source out-degree and target in-degree over
/// edges. `None` when either degree is constant or there are fewer than two edges.
pub fn assortativity_coefficient(g: &MultiGraph) -> Option<f64> {
    if g.edges.len() < 2 {
        return None;
    }
    let n = g.edges.len() as f64;
    let mk = g.edges.iter().map(|e| e.k as f64).sum::<f64>() / n;
    let mj = g.edges.iter().map(|e| e.j as f64).sum::<f64>() / n;
    let (mut skj, mut skk, mut sjj) = (0.0, 0.0, 0.0);
    for e in &g.edges {
        let (dk, dj) = (e.k as f64 - mk, e.j as f64 - mj);
        skj += dk * dj;
        skk += dk * dk;
        sjj += dj * dj;
    }
    (skk > 0.0 && sjj > 0.0).then(|| (skj / (skk * sjj).sqrt()).clamp(-1.0, 1.0))
}

/// Limiting assortativity implied by `Q`.
pub fn theoretical_assortativity(model: &DegreeModel) -> Option<f64> {
    let dim = model.support().dim();
    let q = &model.q;
    let (mut mk, mut mj, mut mkk, mut mjj, mut mkj) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..dim {
        for j in 0..dim {
            let w = q.prob(k, j);
            let (kf, jf) = (k as f64, j as f64);
            mk += w * kf;
            mj += w * jf;
            mkk += w * kf * kf;
            mjj += w * jf * jf;
            mkj += w * kf * jf;
        }
    }
    let (vk, vj) = (mkk - mk * mk, mjj - mj * mj);
    (vk > 1e-15 && vj > 1e-15).then(|| (mkj - mk * mj) / (vk * vj).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct AssortativityReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub coefficients: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub theoretical: Option<f64>,
}

impl AssortativityReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("rep\tassortativity\n");
        for (i, c) in self.coefficients.iter().enumerate() {
            match c {
                Some(v) => s.push_str(&format!("{i}\t{v:.10}\n")),
                None => s.push_str(&format!("{i}\tNA\n")),
            }
        }
        s
    }
}

pub fn assortativity_suite(
    model: &DegreeModel,
    n: usize,
    reps: usize,
    seed: u64,
    delta: f64,
) -> Result<AssortativityReport, ValidationError> {
    let graphs = sample_graphs(model, n, reps, seed, 0, delta)?;
    let coefficients: Vec<Option<f64>> = graphs.iter().map(assortativity_coefficient).collect();
    let defined: Vec<f64> = coefficients.iter().flatten().copied().collect();
    Ok(AssortativityReport {
        n,
        reps,
        seed,
        mean: (!defined.is_empty()).then(|| mean(&defined)),
        coefficients,
        theoretical: theoretical_assortativity(model),
    })
}

/// `reps` graphs of size `n`, replicate `r` drawn from stream `(size_index << 32) | r`.
pub fn sample_graphs(
    model: &DegreeModel,
    n: usize,
    reps: usize,
    seed: u64,
    size_index: usize,
    delta: f64,
) -> Result<Vec<MultiGraph>, ValidationError> {
    check_model(model)?;
    check_settings(&[n], reps)?;
    let mut opts = GenerateOptions::new(n);
    opts.delta = delta;
    let graphs: Vec<Result<MultiGraph, SamplerError>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_for(seed, stream_id(size_index, rep));
            generate_graph_with_rng(model, &opts, &mut rng)
        })
        .collect();
    Ok(graphs.into_iter().collect::<Result<Vec<_>, _>>()?)
}
