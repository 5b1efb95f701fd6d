//! Parallel versus single-threaded timings for the data-parallel stages.
//!
//! With the `parallel` feature the "sequential" rows run inside a one-thread
//! rayon pool; without it only those rows exist.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use polarity::corpus::ZwnjPolicy;
use polarity::evaluation::{run_cv, EvalConfig};
use polarity::pipeline::{FeatureConfig, Pipeline, PreparedCorpus};
use polarity::selection::{count_contingency, rank_features, term_frequencies, Method, RankOptions};
use polarity::synth::{generate, inflect, GeneratorSpec, Inflection};
use polarity::Corpus;

/// Runs a job either on the global pool or inside a one-thread pool.
type Runner = Box<dyn Fn(&mut (dyn FnMut() + Send))>;

const CONFIG: FeatureConfig = FeatureConfig { zwnj: ZwnjPolicy::Join, stem: true, bigrams: true };

fn corpus() -> Corpus {
    let spec = GeneratorSpec { n_docs: 2000, vocab_size: 3000, doc_length: (30, 120), ..Default::default() };
    inflect(&generate(&spec).unwrap().0, &Inflection::default()).unwrap()
}

fn modes() -> Vec<(&'static str, Runner)> {
    let one = rayon_pool(1);
    #[allow(unused_mut)]
    let mut modes: Vec<(&'static str, Runner)> = vec![("sequential", one)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Box::new(|f: &mut (dyn FnMut() + Send)| f())));
    modes
}

#[cfg(feature = "parallel")]
fn rayon_pool(threads: usize) -> Runner {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    Box::new(move |f: &mut (dyn FnMut() + Send)| pool.install(&mut *f))
}

#[cfg(not(feature = "parallel"))]
fn rayon_pool(_threads: usize) -> Runner {
    Box::new(|f: &mut (dyn FnMut() + Send)| f())
}

fn bench_prepare(c: &mut Criterion) {
    let corpus = corpus();
    let pipeline = Pipeline::with_defaults(CONFIG);
    let mut group = c.benchmark_group("prepare");
    group.sample_size(10);
    for (name, run) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(pipeline.prepare(&corpus)))))
        });
    }
    group.finish();
}

fn bench_rank(c: &mut Criterion) {
    let prepared: PreparedCorpus = Pipeline::with_defaults(CONFIG).prepare(&corpus());
    let set = prepared.training_set(None).unwrap();
    let counts = count_contingency(&set).unwrap();
    let tfs = term_frequencies(&set);
    let mut group = c.benchmark_group("rank_features");
    for (name, run) in modes() {
        for method in [Method::Mi, Method::Mmi] {
            group.bench_function(BenchmarkId::new(name, method), |b| {
                b.iter(|| {
                    run(&mut || {
                        std::hint::black_box(rank_features(&counts, &tfs, method, RankOptions::default()).unwrap());
                    })
                })
            });
        }
    }
    group.finish();
}

fn bench_cv(c: &mut Criterion) {
    let prepared = Pipeline::with_defaults(CONFIG).prepare(&corpus());
    let cfg = EvalConfig { selector: Some(Method::Mmi), top_k: Some(2000), ..Default::default() };
    let mut group = c.benchmark_group("run_cv");
    group.sample_size(10);
    for (name, run) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&mut || drop(std::hint::black_box(run_cv(&prepared, &cfg).unwrap()))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_prepare, bench_rank, bench_cv);
criterion_main!(benches);
