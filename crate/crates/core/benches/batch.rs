use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lubin_tate::exec::Exec;
use lubin_tate::fgl::endo::EndoElement;
use lubin_tate::fgl::{Caps, DeformationPoint, UniversalDeformation};
use lubin_tate::padic::make_ring;
use lubin_tate::period::{equivariance_fit, jacobian_phi, PeriodOptions};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn group_law(c: &mut Criterion) {
    let mut g = c.benchmark_group("group_law");
    g.sample_size(10);
    let ud = UniversalDeformation::new(3, 2, Caps { du: 6, dx: 243, dxy: 27 }, 8).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("p3_n2", name), |b| b.iter(|| ud.group_law(exec).unwrap()));
    }
    g.finish();
}

fn p_series(c: &mut Criterion) {
    let mut g = c.benchmark_group("p_series");
    g.sample_size(10);
    let ud = UniversalDeformation::new(2, 3, Caps::default_for(2, 3), 8).unwrap();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("p2_n3", name), |b| b.iter(|| ud.p_series(exec).unwrap()));
    }
    g.finish();
}

fn equivariance(c: &mut Criterion) {
    let mut g = c.benchmark_group("equivariance_fit");
    g.sample_size(10);
    let ring = make_ring(3, 2, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let t = EndoElement::random_unit(&ring, &mut rng);
    let pts: Vec<DeformationPoint> = (0..8).map(|_| DeformationPoint::random(&ring, &mut rng)).collect();
    let opts = PeriodOptions::for_ring(&ring);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("p3_n2", name), |b| {
            b.iter(|| equivariance_fit(&ring, &t, &pts, &opts, exec).unwrap())
        });
    }
    g.finish();
}

fn jacobians(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobian_batch");
    let ring = make_ring(5, 2, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<DeformationPoint> = (0..20).map(|_| DeformationPoint::random(&ring, &mut rng)).collect();
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("p5_n2", name), |b| {
            b.iter(|| exec.map(&pts, |a| jacobian_phi(&ring, a, 1, 8, 40).unwrap().etale))
        });
    }
    g.finish();
}

criterion_group!(benches, group_law, p_series, equivariance, jacobians);
criterion_main!(benches);
