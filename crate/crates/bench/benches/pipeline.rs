use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use evseg_core::encoder::encode_stream;
use evseg_core::lstm::{BackwardScratch, ForwardPass, LstmModel, Params};
use evseg_core::segmenter::{labeled_windows, segment_encoded, Aggregation};
use evseg_core::simgen::{generate_seeded, GeneratorConfig};
use evseg_core::validator::{validate_times, ValidatorConfig};
use evseg_core::{Maxima, StatusAugmentation, Vocabulary};

fn corpus(n: usize) -> evseg_core::EventStream {
    generate_seeded(&Vocabulary::default(), &GeneratorConfig::default(), n)
        .unwrap()
        .stream
}

fn bench_lstm(c: &mut Criterion) {
    let stream = corpus(20);
    let aug: StatusAugmentation = "people+light".parse().unwrap();
    let encoded = encode_stream(&stream, aug, Maxima::default()).unwrap();
    let labels = stream.boundary_flags().unwrap();
    let samples = labeled_windows(&encoded, &labels, 60, 3.8, 1);
    let window = samples[0];

    let mut group = c.benchmark_group("lstm_window");
    group.throughput(Throughput::Elements(60));
    for hidden in [16, 32, 64] {
        let model = LstmModel::init(encoded.width(), hidden, 60, 1).unwrap();
        let mut pass = ForwardPass::default();
        group.bench_with_input(BenchmarkId::new("forward", hidden), &model, |b, m| {
            b.iter(|| m.forward_into(black_box(&window), &mut pass).unwrap())
        });
        let mut grads = Params::zeros(encoded.width(), hidden);
        let mut scratch = BackwardScratch::default();
        model.forward_into(&window, &mut pass).unwrap();
        group.bench_with_input(BenchmarkId::new("backward", hidden), &model, |b, m| {
            b.iter(|| m.accumulate_gradients(black_box(&window), &pass, &mut grads, &mut scratch))
        });
    }
    group.finish();
}

fn bench_segment(c: &mut Criterion) {
    let stream = corpus(40);
    let aug: StatusAugmentation = "people+light".parse().unwrap();
    let encoded = encode_stream(&stream, aug, Maxima::default()).unwrap();
    let model = LstmModel::init(encoded.width(), 32, 60, 2).unwrap();

    let mut group = c.benchmark_group("segment");
    group.sample_size(10);
    group.throughput(Throughput::Elements(stream.len() as u64));
    group.bench_function("mean_h32", |b| {
        b.iter(|| segment_encoded(&model, black_box(&encoded), Aggregation::Mean).unwrap())
    });
    group.finish();
}

fn bench_validator(c: &mut Criterion) {
    let stream = corpus(436);
    let times = stream.times();
    // Every true boundary nudged one event late, plus every seventh event.
    let mut raw: Vec<usize> = stream
        .true_boundaries()
        .unwrap()
        .iter()
        .map(|&b| (b + 1).min(times.len() - 1))
        .chain((1..times.len()).step_by(7))
        .collect();
    raw.sort_unstable();
    raw.dedup();
    let config = ValidatorConfig::default();

    let mut group = c.benchmark_group("validator");
    group.throughput(Throughput::Elements(times.len() as u64));
    group.bench_function("standard_corpus", |b| {
        b.iter(|| validate_times(black_box(&times), black_box(&raw), &config))
    });
    group.finish();
}

criterion_group!(benches, bench_lstm, bench_segment, bench_validator);
criterion_main!(benches);
