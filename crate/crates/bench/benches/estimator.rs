use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use farepanel::estimator::{assemble, demean, fit_design, Design, FitOptions};
use farepanel::synthgen::{generate, DgpSpec};
use farepanel::{build_features, select_sample, AirportFilter};

fn design(rows: usize) -> Design {
    let dgp = DgpSpec::base_case(11, rows);
    let spec = dgp.model_spec();
    let panel = generate(&dgp).expect("dgp");
    let (sample, _) = select_sample(&panel.quotes, &AirportFilter::sao_paulo());
    let mut exo = panel.exogenous.clone();
    exo.periods = dgp.periods;
    let fb = build_features(&sample, &panel.calendar, &exo, &spec).expect("features");
    assemble(&fb.observations, &spec).expect("design")
}

fn bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimator");
    g.sample_size(10);
    for rows in [5_000, 50_000] {
        let d = design(rows);
        let opts = FitOptions::default();
        g.bench_with_input(BenchmarkId::new("demean", rows), &d, |b, d| {
            b.iter(|| demean(black_box(&d.y), black_box(&d.x), &d.groups, opts.demean).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fit", rows), &d, |b, d| {
            b.iter(|| fit_design(black_box(d), "bench", opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
