use cellfree_fl::evaluate::evaluate_selection;
use cellfree_fl::experiment::{run_sweep, ExperimentConfig};
use cellfree_fl::network::{generate_placement, Case, PlacementConfig};
use cellfree_fl::par::ExecMode;
use cellfree_fl::rates::Selection;
use cellfree_fl::short_term::ScaOptions;
use cellfree_fl::stream::RealizationStream;
use cellfree_fl::SystemParams;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn evaluation(c: &mut Criterion) {
    let p = SystemParams::for_network(6);
    let pl = generate_placement(&PlacementConfig::new(10, 6, 1.0, Case::C2), 3).unwrap();
    let stream = RealizationStream::new(pl, p.clone(), 3);
    let sel = Selection::all(6);
    let sca = ScaOptions::default();
    let mut g = c.benchmark_group("evaluate_8_rounds");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| evaluate_selection(&sel, &stream, &p, 8, &sca, mode).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [
        ("cases", "C1"),
        ("n_ap", "6"),
        ("n_ue", "4"),
        ("side_km", "0.5"),
        ("n_qol", "2"),
        ("trials", "4"),
        ("schemes", "BL1,BL2"),
        ("eval_samples", "3"),
    ] {
        cfg.set(k, v).unwrap();
    }
    let mut g = c.benchmark_group("sweep_8_runs");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| run_sweep(&cfg, mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, evaluation, sweep);
criterion_main!(benches);
