use std::hint::black_box;

use adasplit::diagnostics::{convergence_study, StudyConfig};
use adasplit::problems::{presets, GrayScott, GrayScottParams, GsSplit, ProblemOptions, SplitProblem};
use adasplit::schemes::Registry;
use adasplit::spectral::TorusGrid;
use adasplit::{Complex64, Exec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn gray_scott(d: usize, n: usize, exec: Exec) -> GrayScott {
    let grid = TorusGrid::new(d, std::f64::consts::PI, n).unwrap();
    GrayScott::new(grid, GrayScottParams::default(), GsSplit::Ab)
        .unwrap()
        .with_options(ProblemOptions {
            exec,
            ..ProblemOptions::default()
        })
}

/// Pointwise reaction flow on a 2D grid large enough to cross the parallel threshold.
fn reaction_flow(c: &mut Criterion) {
    let mut g = c.benchmark_group("reaction_flow_2d");
    g.sample_size(20);
    for n in [128, 256] {
        for (name, exec) in POLICIES {
            let p = gray_scott(2, n, exec);
            let u = presets::gs_gaussian_bumps(p.grid());
            g.bench_with_input(BenchmarkId::new(name, n), &u, |b, u| {
                b.iter(|| black_box(p.flow(1, Complex64::new(0.1, 0.0), u.clone()).unwrap()))
            });
        }
    }
    g.finish();
}

/// Dyadic sweep: independent runs per step size, plus reference refinement.
fn convergence_sweep(c: &mut Criterion) {
    let reg = Registry::builtin();
    let method = reg.method("Strang/TJ4c").unwrap();
    let mut g = c.benchmark_group("convergence_sweep");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let p = gray_scott(1, 64, Exec::Sequential);
        let u0 = presets::gs_gaussian_bumps(p.grid());
        let cfg = StudyConfig {
            exec,
            ..StudyConfig::dyadic(0.1, 5, 0.5)
        };
        g.bench_function(name, |b| {
            b.iter(|| black_box(convergence_study(&p, &reg, method, &u0, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, reaction_flow, convergence_sweep);
criterion_main!(benches);
