use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bve_core::archive::{Archive, Phase, SelectionWeight};
use bve_core::budget::EvalGate;
use bve_core::derivative::{jaccard_2gram_distance, BoundaryCandidate, OutputDistanceKind};
use bve_core::descriptors::cell_coord;
use bve_core::explorer::{mutate, ExplorerConfig};
use bve_core::sampler::{run_sampler, sample_candidate, SamplerKind};
use bve_core::sut::find_sut;

fn bench_jaccard(c: &mut Criterion) {
    c.bench_function("jaccard_2gram class strings", |b| {
        b.iter(|| {
            jaccard_2gram_distance(black_box("Negative"), black_box("Positive"))
                + jaccard_2gram_distance(black_box("Underweight"), black_box("Severely obese"))
                + jaccard_2gram_distance(black_box("999.9 MB"), black_box("1.0 GB"))
        })
    });
}

fn bench_cell_coord(c: &mut Criterion) {
    let sut = find_sut("bmi").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let candidate = sample_candidate(
        &mut rng,
        &sut,
        SamplerKind::CtsBituniform,
        OutputDistanceKind::Jaccard2Gram,
    )
    .unwrap();
    c.bench_function("cell_coord bmi", |b| {
        b.iter(|| cell_coord(black_box(&candidate), &sut).unwrap())
    });
}

fn bench_sampler(c: &mut Criterion) {
    let sut = find_sut("circle").unwrap();
    c.bench_function("sampler 1k evaluations on circle", |b| {
        b.iter(|| {
            let mut archive = Archive::new();
            let mut gate = EvalGate::evaluations(1_000);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            run_sampler(
                &mut archive,
                &sut,
                SamplerKind::CtsBituniform,
                OutputDistanceKind::Jaccard2Gram,
                &mut gate,
                &mut rng,
            )
            .unwrap();
            archive.len()
        })
    });
}

fn bench_mutation(c: &mut Criterion) {
    let sut = find_sut("bmi").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let parent: BoundaryCandidate = loop {
        let candidate = sample_candidate(
            &mut rng,
            &sut,
            SamplerKind::CtsBituniform,
            OutputDistanceKind::Jaccard2Gram,
        )
        .unwrap();
        if candidate.pd > 0.0 {
            break candidate;
        }
    };
    let config = ExplorerConfig::new(SelectionWeight::Uniform);
    c.bench_function("mutation operator", |b| {
        b.iter(|| mutate(black_box(&parent), &config, &mut rng).unwrap())
    });
}

fn bench_archive_offers(c: &mut Criterion) {
    let sut = find_sut("bmi").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let candidates: Vec<BoundaryCandidate> = (0..1_000)
        .map(|_| {
            sample_candidate(
                &mut rng,
                &sut,
                SamplerKind::CtsBituniform,
                OutputDistanceKind::Jaccard2Gram,
            )
            .unwrap()
        })
        .collect();
    c.bench_function("archive 1k offers", |b| {
        b.iter(|| {
            let mut archive = Archive::new();
            for candidate in &candidates {
                archive
                    .offer(candidate.clone(), &sut, Phase::Sampler)
                    .unwrap();
            }
            archive.len()
        })
    });
}

criterion_group!(
    benches,
    bench_jaccard,
    bench_cell_coord,
    bench_sampler,
    bench_mutation,
    bench_archive_offers
);
criterion_main!(benches);
