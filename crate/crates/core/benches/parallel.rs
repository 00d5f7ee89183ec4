//! Sequential versus thread-pool execution of the batch workloads.
//!
//! Without the `parallel` feature both variants run sequentially, which makes
//! the fallback overhead visible.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qsim_core::circuit::{gen_random, Circuit};
use qsim_core::kernels::apply_circuit;
use qsim_core::measure::Hyperfunction;
use qsim_core::oracle::{run_differential_check, simulate_dense_with, CheckConfig};
use qsim_core::{Execution, SimConfig, SlicedState};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn simulate(c: &Circuit) -> SlicedState {
    let mut s =
        SlicedState::init_basis_state(c.n, &c.initial_bits(), SimConfig::default()).unwrap();
    apply_circuit(&mut s, c).unwrap();
    s
}

fn check_batch(crit: &mut Criterion) {
    let cfg = CheckConfig {
        n_min: 4,
        n_max: 7,
        cases: 4,
        ..CheckConfig::default()
    };
    let mut g = crit.benchmark_group("check_batch");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| run_differential_check(&cfg, exec, None).unwrap())
        });
    }
    g.finish();
}

fn dense_oracle(crit: &mut Criterion) {
    let mut g = crit.benchmark_group("dense_oracle");
    g.sample_size(10);
    for n in [10, 14] {
        let c = gen_random(n, 3).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &c, |b, c| {
                b.iter(|| simulate_dense_with(c, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn decode_all(crit: &mut Criterion) {
    let mut g = crit.benchmark_group("decode_all");
    g.sample_size(10);
    let s = simulate(&gen_random(14, 5).unwrap());
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| s.decode_all_with(exec).unwrap()));
    }
    g.finish();
}

fn sampling(crit: &mut Criterion) {
    let mut g = crit.benchmark_group("sampling");
    g.sample_size(10);
    let mut s = simulate(&gen_random(12, 9).unwrap());
    let measured: Vec<usize> = (0..12).collect();
    let h = Hyperfunction::build(&mut s, &measured).unwrap();
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| h.sample(20_000, 1, exec)));
    }
    g.finish();
}

criterion_group!(benches, check_batch, dense_oracle, decode_all, sampling);
criterion_main!(benches);
