use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use okacert::basin::{classify_grid, design_contraction_step, BasinConfig};
use okacert::certify::{certify_oka_complement, SamplingPlan};
use okacert::smoothing::{outer_sequence, OuterOptions};
use okacert::{gallery, ConvexSet, ConvexSetSpec, Execution};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn basin_grid(c: &mut Criterion) {
    let mut cfg = BasinConfig::default();
    cfg.grid.n = 80;
    let (spec, _) = design_contraction_step(&cfg, cfg.lambda).unwrap();
    let steps = [spec];
    let mut g = c.benchmark_group("classify_grid");
    g.sample_size(10);
    for (name, execution) in MODES {
        let cfg = BasinConfig { execution, ..cfg.clone() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| classify_grid(&steps, &cfg)));
    }
    g.finish();
}

fn certify(c: &mut Criterion) {
    let set = ConvexSet::new(gallery::lookup("siegel2").unwrap()).unwrap();
    let mut g = c.benchmark_group("certify_siegel2");
    g.sample_size(10);
    for (name, execution) in MODES {
        let plan = SamplingPlan { boundary: 200, exterior: 100, lines: 40, hyperplanes: 20, execution, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| certify_oka_complement(&set, &plan)));
    }
    g.finish();
}

fn nesting(c: &mut Criterion) {
    let e = ConvexSet::new(ConvexSetSpec::Polyhedron { a: vec![vec![1.0, -1.0], vec![-1.0, -1.0]], b: vec![0.0, 0.0] }).unwrap();
    let st = outer_sequence(&e, 3, 5.0, &OuterOptions::default()).unwrap();
    let mut g = c.benchmark_group("verify_nesting");
    g.sample_size(10);
    for (name, execution) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| st.verify_nesting(&e, 120, execution)));
    }
    g.finish();
}

criterion_group!(benches, basin_grid, certify, nesting);
criterion_main!(benches);
