use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use galine::cocycle::{omega_cochain, CocycleSpec, InternalEnergy};
use galine::cohomology::{coboundary, random_tuples, Convention};
use galine::exec::{map_par, map_seq};
use galine::qrep::composition_defect;
use galine::sample::Sampler;
use galine::timealg::{int, rat, DEFAULT_DEGREE};

fn cocycle_condition(c: &mut Criterion) {
    let spec = CocycleSpec::canonical(int(2), &[rat(1, 3), rat(-1, 2)], &[rat(1, 4)]);
    let omega = omega_cochain(Arc::new(spec));
    let triples = random_tuples(&mut Sampler::new(7), 200, 3, 4, DEFAULT_DEGREE);
    let check = |t: &Vec<_>| coboundary(&omega, t, Convention::Dual).map(|p| p.is_zero()).unwrap_or(false);
    let mut g = c.benchmark_group("cocycle_condition_200");
    g.bench_function("sequential", |b| b.iter(|| map_seq(&triples, check)));
    g.bench_function("parallel", |b| b.iter(|| map_par(&triples, check)));
    g.finish();
}

fn composition(c: &mut Criterion) {
    let spec = CocycleSpec::canonical(int(2), &[rat(1, 3)], &[rat(1, 4)]);
    let w = InternalEnergy::new(rat(1, 2));
    let mut s = Sampler::new(8);
    let draws: Vec<_> = (0..200)
        .map(|_| (s.element(2, DEFAULT_DEGREE), s.translation(2, DEFAULT_DEGREE), s.vec3(1, DEFAULT_DEGREE)))
        .collect();
    let check =
        |(g2, g1, q): &(_, _, _)| composition_defect(&spec, &w, g2, g1, q).map(|d| d.is_zero()).unwrap_or(false);
    let mut g = c.benchmark_group("composition_defect_200");
    g.bench_function("sequential", |b| b.iter(|| map_seq(&draws, check)));
    g.bench_function("parallel", |b| b.iter(|| map_par(&draws, check)));
    g.finish();
}

criterion_group!(benches, cocycle_condition, composition);
criterion_main!(benches);
