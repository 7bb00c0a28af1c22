//! Sequential vs rayon execution for single steps and a small sweep.
//! Without the `parallel` feature both variants take the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zeno_soliton::experiments::{run_sweep_with, ScenarioConfig, SweepAxis, SweepParam, SweepSpec};
use zeno_soliton::{init_soliton, BeamSpec, Exec, PhysicalConstants, Propagator, SolitonSpec, SpatialGrid, TimeParams};

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn step(c: &mut Criterion) {
    let consts = PhysicalConstants::default();
    let spec = SolitonSpec::normalized(-0.25, 10.0, &consts);
    let mut group = c.benchmark_group("step");
    for n in [4096, 16384] {
        let grid = SpatialGrid::new(-40.0, 40.0, n).unwrap();
        let field = init_soliton(&grid, &spec, &consts).unwrap();
        // a moving beam recomputes the loss profile every step
        let beams = [
            ("static", BeamSpec::gaussian(100.0, 0.0, 0.1)),
            ("moving", BeamSpec::moving(100.0, 0.0, 0.1, -0.125)),
        ];
        for (beam_name, beam) in &beams {
            for (exec_name, exec) in EXECS {
                let mut prop = Propagator::new(&grid, 0.005, consts).unwrap().with_exec(exec);
                let mut psi = field.clone();
                group.bench_with_input(BenchmarkId::new(format!("{beam_name}/{exec_name}"), n), &n, |b, _| {
                    b.iter(|| prop.step(black_box(&mut psi), beam).unwrap())
                });
            }
        }
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let mut base = ScenarioConfig::new("bench", -0.25, BeamSpec::gaussian(100.0, 0.0, 0.2))
        .with_grid(-40.0, 40.0, 1024)
        .with_time(TimeParams::fixed(0.01, 20.0));
    base.observe.snapshot_stride = 0;
    let spec = SweepSpec {
        base,
        axes: vec![SweepAxis {
            param: SweepParam::Gamma,
            values: vec![25.0, 50.0, 100.0, 200.0],
        }],
    };
    let mut group = c.benchmark_group("sweep_4_cells");
    group.sample_size(10);
    for (name, exec) in EXECS {
        group.bench_function(name, |b| {
            b.iter(|| run_sweep_with(black_box(&spec), exec, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, step, sweep);
criterion_main!(benches);
