use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use relaysel::outage::{asymptotic_outage, monte_carlo_with_gains, AsymptoticInputs, BLOCK_TRIALS};
use relaysel::placement::{general_optimum, line_optimum, GeneralPlacementProblem, LinePlacementProblem};
use relaysel::sccode::threshold_rates;
use relaysel_bench::{coding, line_selection, model};

fn monte_carlo_block(c: &mut Criterion) {
    let cfg = coding();
    for m in [1, 3, 6] {
        let (gains, sel) = line_selection(m);
        c.bench_function(&format!("monte_carlo_block_m{m}"), |b| {
            b.iter(|| monte_carlo_with_gains(&gains, &cfg, &sel, BLOCK_TRIALS, black_box(1)).unwrap())
        });
    }
}

fn closed_form(c: &mut Criterion) {
    let cfg = coding();
    for m in [3, 8] {
        let (gains, sel) = line_selection(m);
        let inputs = AsymptoticInputs::from_selection(&gains, &sel, &cfg, threshold_rates(&cfg));
        c.bench_function(&format!("asymptotic_outage_m{m}"), |b| {
            b.iter(|| asymptotic_outage(1, black_box(&inputs)).unwrap() + asymptotic_outage(2, &inputs).unwrap())
        });
    }
}

fn placement(c: &mut Criterion) {
    let cfg = coding();
    let line = LinePlacementProblem::from_scenario(100.0, &model(), &cfg, cfg.p_t).unwrap();
    c.bench_function("line_optimum", |b| b.iter(|| line_optimum(black_box(&line)).unwrap()));
    let general = GeneralPlacementProblem::new(2, 100.0, model(), cfg, cfg.p_t, 1).unwrap();
    let mut g = c.benchmark_group("general");
    g.sample_size(10);
    g.bench_function("general_optimum_m2", |b| b.iter(|| general_optimum(black_box(&general)).unwrap()));
    g.finish();
}

criterion_group!(kernels, monte_carlo_block, closed_form, placement);
criterion_main!(kernels);
