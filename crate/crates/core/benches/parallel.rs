//! Sequential versus rayon execution of the three data-parallel hot loops:
//! zero-test sampling, condition rows, and trajectory batches.

use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use firstint::catalog::instantiate;
use firstint::conditions::{check_integral2, total_derivative_oracle, Candidate};
use firstint::dynamics::{integrate_batch, IntegrateOptions, State};
use firstint::expr::ZeroTestConfig;
use firstint::par::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn zero_test(c: &mut Criterion) {
    let e = instantiate("evans-e3", &BTreeMap::new()).unwrap();
    let residual = total_derivative_oracle(&e.integral("I4").unwrap().expr, &e.system);
    let mut g = c.benchmark_group("zero_test_oracle_I4");
    for (name, exec) in MODES {
        let cfg = ZeroTestConfig {
            samples: 512,
            exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| e.system.zero_test(black_box(&residual), &cfg).unwrap())
        });
    }
    g.finish();
}

fn condition_rows(c: &mut Criterion) {
    let e = instantiate("evans-e3", &BTreeMap::new()).unwrap();
    let Candidate::Exp(cand) = &e.integral("I4").unwrap().candidate else {
        unreachable!()
    };
    let mut g = c.benchmark_group("check_integral2_I4");
    g.sample_size(20);
    for (name, exec) in MODES {
        let cfg = ZeroTestConfig {
            exec,
            ..Default::default()
        };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| check_integral2(black_box(cand), &e.system, &cfg).unwrap())
        });
    }
    g.finish();
}

fn trajectories(c: &mut Criterion) {
    let e = instantiate("evans-e3", &BTreeMap::new()).unwrap();
    let ics: Vec<State> = (0..32)
        .map(|k| {
            let d = 0.01 * k as f64;
            State::new(0.0, vec![1.0 + d, 0.8, 1.0 - d], vec![0.1, -0.1 + d, 0.2])
        })
        .collect();
    let opts = IntegrateOptions::default();
    let mut g = c.benchmark_group("integrate_batch_32");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| integrate_batch(&e.system, black_box(&ics), 1.0, &opts, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, zero_test, condition_rows, trajectories);
criterion_main!(benches);
