use std::fs;
use std::path::{Path, PathBuf};

use acg_core::asymptotics::{
    asymptotic_edge_means, log_exact_i, log_laplace_i_approx, solve_critical_point, DoubleVector,
    SolverOptions,
};
use acg_core::config_probability::{
    count_in_graphs, expected_tree_count_per_node, lti_factorization, tree_config_prob,
    Configuration,
};
use acg_core::degree_model::DEFAULT_CONSISTENCY_TOL;
use acg_core::exact_kernel::{
    enumerate_wirings_oracle, exact_edge_mean, exact_edge_variance, joint_first_m_prob,
    log_partition_c, log_tilted_partition, wiring_count, StubLabels,
};
use acg_core::sampler::{classify_graph, generate_graph};
use acg_core::stats_validation::{
    assortativity_suite, edge_lln, first_edges_distribution, node_lln, sample_graphs,
    self_loop_poisson,
};
use acg_core::{DegreeModel, EnumerationCaps, GenerateOptions, Margins, MultiGraph};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{edges_tsv, json_string, nodes_csv, write_atomic, write_json};
use crate::parse::{self, UsageError};

/// Settings shared by every command.
pub struct RunContext {
    pub threads: Option<usize>,
    pub command: &'static str,
}

impl RunContext {
    fn meta(
        &self,
        params: &Path,
        model: &DegreeModel,
        seed: Option<Seed>,
        options: Value,
    ) -> Value {
        json!({
            "tool": "acg",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "params_path": params.display().to_string(),
            "params": model.to_json_value(),
            "seed": seed.map(|s| json!({"value": s.value, "source": s.source})),
            "threads": self.threads,
            "options": options,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Seed {
    value: u64,
    source: &'static str,
}

fn resolve_seed(arg: &SeedArg) -> Seed {
    match arg.seed {
        Some(value) => Seed {
            value,
            source: "given",
        },
        None => {
            let value = rand::random::<u64>();
            log::warn!("no --seed or ACG_SEED; using random seed {value}");
            Seed {
                value,
                source: "random",
            }
        }
    }
}

fn load_model(path: &Path) -> Result<DegreeModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    DegreeModel::from_json_str(&text).with_context(|| format!("parameter file {}", path.display()))
}

fn require_consistent(model: &DegreeModel) -> Result<()> {
    let r = model.consistency(DEFAULT_CONSISTENCY_TOL);
    if !r.is_consistent {
        bail!(
            "P and Q violate Q+_k = k P+_k / z, Q-_j = j P-_j / z: max residual {:e} > {:e}",
            r.max_violation,
            r.tolerance
        );
    }
    Ok(())
}

fn load_consistent(path: &Path) -> Result<DegreeModel> {
    let m = load_model(path)?;
    require_consistent(&m)?;
    Ok(m)
}

fn usage_err(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn finish(out_dir: &Path, result: &Value, meta: &Value) -> Result<()> {
    write_json(&out_dir.join("result.json"), result)?;
    write_json(&out_dir.join("meta.json"), meta)
}

fn print_json(v: &Value) -> Result<()> {
    print!("{}", json_string(v)?);
    Ok(())
}

pub fn generate(ctx: &RunContext, a: &GenerateArgs) -> Result<()> {
    if a.samples == 0 {
        return Err(usage_err("--samples must be at least 1"));
    }
    if a.n == 0 {
        return Err(usage_err("--n must be at least 1"));
    }
    let model = load_consistent(&a.params.params)?;
    let seed = resolve_seed(&a.seed);
    let mut opts = GenerateOptions::new(a.n);
    opts.delta = a.delta;
    opts.max_redraws = a.max_redraws;
    let run_meta = ctx.meta(
        &a.params.params,
        &model,
        Some(seed),
        json!({
            "n": a.n,
            "delta": a.delta,
            "samples": a.samples,
            "max_redraws": a.max_redraws,
            "out_dir": a.out.out_dir.display().to_string(),
        }),
    );
    let graphs: Vec<_> = (0..a.samples)
        .into_par_iter()
        .map(|s| generate_graph(&model, &opts, seed.value, s as u64))
        .collect();
    let graphs = graphs.into_iter().collect::<Result<Vec<MultiGraph>, _>>()?;

    let flat = a.samples == 1;
    let mut dirs = Vec::new();
    for (s, g) in graphs.iter().enumerate() {
        let dir: PathBuf = if flat {
            a.out.out_dir.clone()
        } else {
            a.out.out_dir.join(format!("sample_{s:04}"))
        };
        let summary = classify_graph(g);
        let meta = json!({
            "run": run_meta,
            "sample": s,
            "seed": seed.value,
            "stream": s,
            "n": g.nodes.len(),
            "edges": g.edges.len(),
            "D": g.meta.discrepancy,
            "clip_count": g.meta.clip_count,
            "redraws": g.meta.redraws,
            "restarts": g.meta.restarts,
            "uniform_fallback_used": g.meta.uniform_fallback_used,
            "self_loops": summary.self_loops,
            "multi_edges": summary.multi_edges,
            "e_kj": summary.edge_types.rows(),
        });
        write_atomic(&dir.join("nodes.csv"), nodes_csv(g).as_bytes())?;
        write_atomic(&dir.join("edges.tsv"), edges_tsv(g).as_bytes())?;
        write_json(&dir.join("meta.json"), &meta)?;
        println!(
            "sample {s}: {} nodes, {} edges, D = {}, clipped {}, restarts {} -> {}",
            g.nodes.len(),
            g.edges.len(),
            g.meta.discrepancy,
            g.meta.clip_count,
            g.meta.restarts,
            dir.display()
        );
        dirs.push(dir.display().to_string());
    }
    if !flat {
        let mut meta = run_meta;
        meta["samples"] = json!(dirs);
        write_json(&a.out.out_dir.join("meta.json"), &meta)?;
    }
    Ok(())
}

fn exact_setup(c: &ExactCommon) -> Result<(DegreeModel, Margins, EnumerationCaps)> {
    let margins = parse::margins(&c.margins)?;
    let model = load_consistent(&c.params.params)?;
    let caps = EnumerationCaps {
        max_edges: c.max_edges,
        max_tables: c.max_tables,
    };
    Ok((model, margins, caps))
}

fn exact_meta(ctx: &RunContext, c: &ExactCommon, model: &DegreeModel, extra: Value) -> Value {
    let mut options = json!({
        "margins": c.margins,
        "max_edges": c.max_edges,
        "max_tables": c.max_tables,
        "json": c.json,
        "out_dir": c.out.out_dir.display().to_string(),
    });
    if let (Value::Object(o), Value::Object(e)) = (&mut options, extra) {
        o.extend(e);
    }
    ctx.meta(&c.params.params, model, None, options)
}

fn margins_json(m: &Margins) -> Value {
    json!({"minus": &m.minus[1..], "plus": &m.plus[1..]})
}

pub fn exact(ctx: &RunContext, cmd: &ExactCommand) -> Result<()> {
    match cmd {
        ExactCommand::Partition(c) => {
            let (model, margins, caps) = exact_setup(c)?;
            let edges = margins.edges()?;
            let log_z = log_tilted_partition(&margins, &model.q, None, caps)?;
            let log_c = log_partition_c(&margins, &model.q, caps)?;
            let result = json!({
                "margins": margins_json(&margins),
                "E": edges,
                "log_Z0": finite_or_null(log_z),
                "Z0": log_z.exp(),
                "log_C": finite_or_null(log_c),
                "C": log_c.exp(),
            });
            print_json(&result)?;
            finish(
                &c.out.out_dir,
                &result,
                &exact_meta(ctx, c, &model, json!({})),
            )
        }
        ExactCommand::Mean(a) | ExactCommand::Var(a) => {
            let is_mean = matches!(cmd, ExactCommand::Mean(_));
            let c = &a.common;
            let t = parse::edge_type(&a.edge_type)?;
            let (model, margins, caps) = exact_setup(c)?;
            let m = if is_mean {
                exact_edge_mean(&margins, &model.q, t.k, t.j, caps)?
            } else {
                exact_edge_variance(&margins, &model.q, t.k, t.j, caps)?
            };
            let result = json!({
                "margins": margins_json(&margins),
                "type": [t.k, t.j],
                "moment": if is_mean { "mean" } else { "variance" },
                "value": m.value(),
                "by_tables": m.by_tables,
                "by_partition_ratio": m.by_partition_ratio,
                "route_gap": m.route_gap(),
            });
            if c.json {
                print_json(&result)?;
            } else {
                println!("{:.10}", m.value());
            }
            let meta = exact_meta(ctx, c, &model, json!({"type": a.edge_type}));
            finish(&c.out.out_dir, &result, &meta)
        }
        ExactCommand::Joint(a) => {
            let c = &a.common;
            let types = parse::edge_types(&a.types)?;
            let (model, margins, caps) = exact_setup(c)?;
            let p = joint_first_m_prob(&margins, &model.q, &types, caps)?;
            let result = json!({
                "margins": margins_json(&margins),
                "types": types.iter().map(|t| [t.k, t.j]).collect::<Vec<_>>(),
                "probability": p,
            });
            if c.json {
                print_json(&result)?;
            } else {
                println!("{p:.10}");
            }
            let meta = exact_meta(ctx, c, &model, json!({"types": a.types}));
            finish(&c.out.out_dir, &result, &meta)
        }
        ExactCommand::Oracle(a) => {
            let c = &a.common;
            let (model, margins, caps) = exact_setup(c)?;
            let stubs = StubLabels::from_margins(&margins);
            let r = enumerate_wirings_oracle(&stubs, &model.q, a.first_m)?;
            let log_c = log_partition_c(&margins, &model.q, caps)?;
            let tables: Vec<Value> = r
                .tables
                .iter()
                .map(|(table, tally)| {
                    json!({
                        "e_kj": table.rows(),
                        "wirings": tally.wirings,
                        "wiring_count": wiring_count(table).to_string(),
                        "weight": tally.weight,
                        "probability": r.table_probability(table),
                    })
                })
                .collect();
            let prefixes: Vec<Value> = r
                .first_types
                .keys()
                .map(|ts| {
                    json!({
                        "types": ts.iter().map(|t| [t.k, t.j]).collect::<Vec<_>>(),
                        "probability": r.first_types_probability(ts),
                    })
                })
                .collect();
            let result = json!({
                "margins": margins_json(&margins),
                "wirings": r.wirings,
                "total_weight": r.total_weight,
                "partition_c": log_c.exp(),
                "tables": tables,
                "first_m": a.first_m,
                "first_types": prefixes,
            });
            print_json(&result)?;
            let meta = exact_meta(ctx, c, &model, json!({"first_m": a.first_m}));
            finish(&c.out.out_dir, &result, &meta)
        }
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn resolve_point(p: &PointArgs, model: &DegreeModel) -> Result<DoubleVector> {
    match (&p.margins, &p.x) {
        (Some(m), _) => Ok(DoubleVector::normalized_margins(&parse::margins(m)?)?),
        (None, Some(x)) => parse::double_vector(x),
        (None, None) => Ok(DoubleVector::q_margins(&model.q)),
    }
}

fn point_meta(ctx: &RunContext, p: &PointArgs, model: &DegreeModel, extra: Value) -> Value {
    let mut options = json!({
        "margins": p.margins,
        "x": p.x,
        "out_dir": p.out.out_dir.display().to_string(),
    });
    if let (Value::Object(o), Value::Object(e)) = (&mut options, extra) {
        o.extend(e);
    }
    ctx.meta(&p.params.params, model, None, options)
}

pub fn asymptotics(ctx: &RunContext, cmd: &AsymptoticsCommand) -> Result<()> {
    match cmd {
        AsymptoticsCommand::CriticalPoint(p) => {
            let model = load_consistent(&p.params.params)?;
            let x = resolve_point(p, &model)?;
            let cp = solve_critical_point(&x, &model.q, SolverOptions::default())?;
            let result = json!({"x": x, "critical_point": cp});
            print_json(&result)?;
            finish(
                &p.out.out_dir,
                &result,
                &point_meta(ctx, p, &model, json!({})),
            )
        }
        AsymptoticsCommand::EdgeMean(a) => {
            let p = &a.point;
            let model = load_consistent(&p.params.params)?;
            let x = resolve_point(p, &model)?;
            let means = asymptotic_edge_means(&x, &model.q)?;
            let t = a.edge_type.as_deref().map(parse::edge_type).transpose()?;
            let result = match t {
                Some(t) => {
                    let dim = means.len();
                    if t.k >= dim || t.j >= dim {
                        return Err(usage_err(format!(
                            "--type {},{} outside the support",
                            t.k, t.j
                        )));
                    }
                    let v = means[t.k][t.j];
                    println!("{v:.10}");
                    json!({"x": x, "type": [t.k, t.j], "value": v})
                }
                None => {
                    let r = json!({"x": x, "means": means});
                    print_json(&r)?;
                    r
                }
            };
            let meta = point_meta(ctx, p, &model, json!({"type": a.edge_type}));
            finish(&p.out.out_dir, &result, &meta)
        }
        AsymptoticsCommand::LaplaceCheck(a) => {
            let model = load_consistent(&a.params.params)?;
            let margins = parse::margins(&a.margins)?;
            if a.scales.is_empty() || a.scales.contains(&0) {
                return Err(usage_err("--scales must be positive integers"));
            }
            let caps = EnumerationCaps {
                max_edges: u64::MAX,
                max_tables: a.max_tables,
            };
            let mut rows = Vec::new();
            let mut ratios = Vec::new();
            for &m in &a.scales {
                let e = margins.scaled(m);
                let exact = log_exact_i(&e, &model.q, caps)?;
                let approx = log_laplace_i_approx(&e, &model.q)?;
                let ratio = (exact - approx).exp();
                ratios.push(ratio);
                rows.push(json!({
                    "m": m,
                    "E": e.edges()?,
                    "log_exact_I": exact,
                    "log_laplace_I": approx,
                    "ratio": ratio,
                }));
            }
            let diffs: Vec<f64> = ratios.windows(2).map(|w| w[1] - w[0]).collect();
            let shrink: Vec<f64> = diffs.windows(2).map(|w| (w[0] / w[1]).abs()).collect();
            let result = json!({
                "margins": margins_json(&margins),
                "rows": rows,
                "successive_differences": diffs,
                "shrink_factors": shrink,
            });
            print_json(&result)?;
            let meta = ctx.meta(
                &a.params.params,
                &model,
                None,
                json!({
                    "margins": a.margins,
                    "scales": a.scales,
                    "max_tables": a.max_tables,
                    "out_dir": a.out.out_dir.display().to_string(),
                }),
            );
            finish(&a.out.out_dir, &result, &meta)
        }
    }
}

fn load_config(path: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Configuration::from_json_str(&text)
        .with_context(|| format!("configuration file {}", path.display()))
}

pub fn configs(ctx: &RunContext, cmd: &ConfigsCommand) -> Result<()> {
    match cmd {
        ConfigsCommand::Predict(a) => {
            let model = load_consistent(&a.params.params)?;
            let h = load_config(&a.config)?;
            let tree = h.is_tree();
            let result = if tree {
                json!({
                    "configuration": h.to_json_value(),
                    "is_tree": true,
                    "edges": h.edge_count(),
                    "tree_probability": tree_config_prob(&h, &model).ok(),
                    "expected_count_per_node": expected_tree_count_per_node(&h, &model).ok(),
                    "lti": lti_factorization(&h, &model).ok(),
                })
            } else {
                json!({
                    "configuration": h.to_json_value(),
                    "is_tree": false,
                    "edges": h.edge_count(),
                    "tree_probability": Value::Null,
                    "expected_count_per_node": 0.0,
                    "per_graph_count": "bounded as N grows",
                })
            };
            print_json(&result)?;
            let meta = ctx.meta(
                &a.params.params,
                &model,
                None,
                json!({
                    "config": a.config.display().to_string(),
                    "out_dir": a.out.out_dir.display().to_string(),
                }),
            );
            finish(&a.out.out_dir, &result, &meta)
        }
        ConfigsCommand::Count(a) => {
            let model = load_consistent(&a.params.params)?;
            let h = load_config(&a.config)?;
            let seed = resolve_seed(&a.seed);
            let graphs = sample_graphs(&model, a.n, a.samples, seed.value, 0, a.delta)?;
            let report = count_in_graphs(&graphs, &h, Some(&model));
            let result = serde_json::to_value(&report)?;
            print_json(&result)?;
            let meta = ctx.meta(
                &a.params.params,
                &model,
                Some(seed),
                json!({
                    "config": a.config.display().to_string(),
                    "n": a.n,
                    "samples": a.samples,
                    "delta": a.delta,
                    "out_dir": a.out.out_dir.display().to_string(),
                }),
            );
            finish(&a.out.out_dir, &result, &meta)
        }
    }
}

const ALL_SUITES: [Suite; 5] = [
    Suite::NodeLln,
    Suite::EdgeLln,
    Suite::FirstEdges,
    Suite::SelfLoops,
    Suite::Assortativity,
];

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::NodeLln => "node-lln",
        Suite::EdgeLln => "edge-lln",
        Suite::FirstEdges => "first-edges",
        Suite::SelfLoops => "self-loops",
        Suite::Assortativity => "assortativity",
        Suite::All => "all",
    }
}

/// Runs one suite; returns the JSON report, the TSV and an overall verdict.
fn run_suite(
    suite: Suite,
    model: &DegreeModel,
    a: &ValidateArgs,
    seed: u64,
) -> Result<(Value, String, Option<bool>)> {
    let sizes = &a.sizes;
    match suite {
        Suite::NodeLln | Suite::EdgeLln => {
            let r = if suite == Suite::NodeLln {
                node_lln(model, sizes, a.reps, seed, a.delta)?
            } else {
                edge_lln(model, sizes, a.reps, seed, a.delta)?
            };
            Ok((serde_json::to_value(&r)?, r.to_tsv(), Some(r.pass)))
        }
        Suite::FirstEdges => {
            let mut reports = Vec::new();
            let mut tsv = String::from("n\tchi_square\tdof\tp_value\n");
            let mut pass = true;
            for &n in sizes {
                let r = first_edges_distribution(model, n, a.first_l, a.reps, seed, a.delta)?;
                tsv.push_str(&format!(
                    "{n}\t{:.10e}\t{}\t{:.10e}\n",
                    r.chi_square, r.dof, r.p_value
                ));
                pass &= r.pass;
                reports.push(serde_json::to_value(&r)?);
            }
            Ok((
                json!({"suite": "first-edges", "rows": reports, "pass": pass}),
                tsv,
                Some(pass),
            ))
        }
        Suite::SelfLoops => {
            let mut reports = Vec::new();
            let mut tsv = String::from(
                "n\tmean\tlambda\tdeviation\tz_score\texpected_count\tz_score_count\tvariance_ratio\n",
            );
            let mut pass = true;
            for &n in sizes {
                let r = self_loop_poisson(model, n, a.reps, seed, a.delta)?;
                let vr = r
                    .variance_ratio
                    .map_or("NA".to_owned(), |v| format!("{v:.10e}"));
                tsv.push_str(&format!(
                    "{n}\t{:.10e}\t{:.10e}\t{:.10e}\t{:.6}\t{:.10e}\t{:.6}\t{vr}\n",
                    r.mean,
                    r.lambda,
                    (r.mean - r.lambda).abs(),
                    r.z_score,
                    r.expected_count,
                    r.z_score_count
                ));
                pass &= r.pass;
                reports.push(serde_json::to_value(&r)?);
            }
            Ok((
                json!({"suite": "self-loops", "rows": reports, "pass": pass}),
                tsv,
                Some(pass),
            ))
        }
        Suite::Assortativity => {
            let mut reports = Vec::new();
            let mut tsv = String::from("n\tmean\ttheoretical\tdeviation\n");
            for &n in sizes {
                let r = assortativity_suite(model, n, a.reps, seed, a.delta)?;
                let fmt = |v: Option<f64>| v.map_or("NA".to_owned(), |v| format!("{v:.10e}"));
                let dev = r.mean.zip(r.theoretical).map(|(m, t)| (m - t).abs());
                tsv.push_str(&format!(
                    "{n}\t{}\t{}\t{}\n",
                    fmt(r.mean),
                    fmt(r.theoretical),
                    fmt(dev)
                ));
                reports.push(serde_json::to_value(&r)?);
            }
            Ok((
                json!({"suite": "assortativity", "rows": reports}),
                tsv,
                None,
            ))
        }
        Suite::All => unreachable!("expanded by the caller"),
    }
}

pub fn validate(ctx: &RunContext, a: &ValidateArgs) -> Result<()> {
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        return Err(usage_err("--sizes must be positive integers"));
    }
    if a.reps == 0 {
        return Err(usage_err("--reps must be at least 1"));
    }
    let model = load_consistent(&a.params.params)?;
    let seed = resolve_seed(&a.seed);
    let suites: Vec<Suite> = if a.suite == Suite::All {
        ALL_SUITES.to_vec()
    } else {
        vec![a.suite]
    };
    for s in &suites {
        let name = suite_name(*s);
        let (report, tsv, pass) = run_suite(*s, &model, a, seed.value)?;
        write_json(&a.out.out_dir.join(format!("{name}.json")), &report)?;
        write_atomic(&a.out.out_dir.join(format!("{name}.tsv")), tsv.as_bytes())?;
        let verdict = match pass {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "report",
        };
        println!("{name}: {verdict}");
    }
    let meta = ctx.meta(
        &a.params.params,
        &model,
        Some(seed),
        json!({
            "suite": suite_name(a.suite),
            "sizes": a.sizes,
            "reps": a.reps,
            "delta": a.delta,
            "first_l": a.first_l,
            "out_dir": a.out.out_dir.display().to_string(),
        }),
    );
    write_json(&a.out.out_dir.join("meta.json"), &meta)
}

pub fn describe(ctx: &RunContext, a: &DescribeArgs) -> Result<()> {
    let model = load_model(&a.params.params)?;
    let result = model.describe(DEFAULT_CONSISTENCY_TOL);
    print_json(&result)?;
    let meta = ctx.meta(
        &a.params.params,
        &model,
        None,
        json!({"out_dir": a.out.out_dir.display().to_string()}),
    );
    finish(&a.out.out_dir, &result, &meta)
}
