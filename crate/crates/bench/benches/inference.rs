use criterion::{criterion_group, criterion_main, Criterion};

use cachescope_core::inference::{
    gen_random_sequence, identify_policy, infer_permutation_policy, IdentifyConfig, InferPermConfig, SimOracle,
};
use cachescope_core::policies::{policy_zoo, PolicySpec};
use cachescope_core::seqlang::{eval_sequence, AccessSeq};
use cachescope_core::geometry::CacheGeometry;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn sequence_eval(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let tokens = gen_random_sequence(50, 0.5, &mut rng);
    let seq = AccessSeq::new(tokens);
    let geometry = CacheGeometry::single_set(8);
    c.bench_function("eval_sequence_len50", |b| {
        b.iter(|| eval_sequence(&seq, &PolicySpec::Plru, &geometry, 0).unwrap())
    });
}

fn identification(c: &mut Criterion) {
    let oracle = SimOracle::single_set(PolicySpec::Plru, 8, 3);
    let candidates = policy_zoo(8);
    let cfg = IdentifyConfig {
        n_seq: 50,
        max_counterexamples: Some(2),
        ..IdentifyConfig::default()
    };
    c.bench_function("identify_plru_50seq_full_zoo", |b| {
        b.iter(|| identify_policy(&oracle, &candidates, &cfg).unwrap())
    });
}

fn permutation_inference(c: &mut Criterion) {
    let oracle = SimOracle::single_set(PolicySpec::Lru3Plru4, 12, 3);
    c.bench_function("infer_perm_lru3plru4", |b| {
        b.iter(|| infer_permutation_policy(&oracle, &InferPermConfig::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = sequence_eval, identification, permutation_inference
}
criterion_main!(benches);
