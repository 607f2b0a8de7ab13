use std::hint::black_box;

use acg_core::asymptotics::{solve_critical_point, DoubleVector, SolverOptions};
use acg_core::exact_kernel::{for_each_table, log_tilted_partition};
use acg_core::sampler::{generate_graph, rng_for, TypeChooser};
use acg_core::{fixtures, EnumerationCaps, GenerateOptions, Margins};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn tables(c: &mut Criterion) {
    let m = fixtures::random_consistent_model(3, &mut rng_for(1, 0));
    let mut g = c.benchmark_group("tables");
    for s in [2u64, 4, 6] {
        let e = Margins::from_counts(&[1, 1, 1], &[1, 1, 1])
            .unwrap()
            .scaled(s);
        g.bench_with_input(BenchmarkId::new("enumerate", s), &e, |b, e| {
            b.iter(|| {
                for_each_table(
                    e,
                    EnumerationCaps::default(),
                    |_, _| true,
                    |t| {
                        black_box(t);
                    },
                )
                .unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("log_z", s), &e, |b, e| {
            b.iter(|| log_tilted_partition(e, &m.q, None, EnumerationCaps::default()).unwrap())
        });
    }
    g.finish();
}

fn critical_point(c: &mut Criterion) {
    let mut g = c.benchmark_group("critical_point");
    for k in [2usize, 4, 8] {
        let m = fixtures::random_consistent_model(k, &mut rng_for(2, k as u64));
        let mut x = DoubleVector::q_margins(&m.q);
        // Move away from the Q margins so Newton has work to do.
        x.minus
            .iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v *= 1.0 + 0.3 * (i % 2) as f64);
        x.plus.reverse();
        let (sm, sp): (f64, f64) = (x.minus.iter().sum(), x.plus.iter().sum());
        x.minus.iter_mut().for_each(|v| *v /= sm);
        x.plus.iter_mut().for_each(|v| *v /= sp);
        g.bench_with_input(BenchmarkId::from_parameter(k), &x, |b, x| {
            b.iter(|| solve_critical_point(x, &m.q, SolverOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn generate(c: &mut Criterion) {
    let m = fixtures::balanced_two_assortative();
    let opts = GenerateOptions::new(10_000);
    let mut g = c.benchmark_group("generate");
    g.sample_size(20);
    g.bench_function("n=1e4", |b| {
        let mut s = 0;
        b.iter(|| {
            s += 1;
            generate_graph(&m, &opts, 7, s).unwrap()
        })
    });
    g.finish();
}

fn type_chooser(c: &mut Criterion) {
    let m = fixtures::random_consistent_model(4, &mut rng_for(3, 0));
    let e = Margins::from_counts(&[250, 250, 250, 250], &[250, 250, 250, 250]).unwrap();
    c.bench_function("type_chooser/drain", |b| {
        let mut rng = rng_for(3, 1);
        b.iter(|| {
            let mut ch = TypeChooser::new(&m.q, &e);
            while ch.remaining() > 0 {
                let t = ch.choose(&mut rng).unwrap();
                ch.consume(t.k, t.j);
            }
        })
    });
}

criterion_group!(benches, tables, critical_point, generate, type_chooser);
criterion_main!(benches);
