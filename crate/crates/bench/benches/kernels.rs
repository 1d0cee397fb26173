use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stbc_core::decoder::{real_equivalent, sphere_decode};
use stbc_core::linalg::det_c;
use stbc_core::nvd::{min_det_code, min_det_z};
use stbc_core::simulator::{complex_gaussian, sample_channel};
use stbc_core::stbc::{alamouti, ciod4, golden};
use stbc_core::CMat;

fn determinants(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = CMat::from_fn(4, 4, |_, _| complex_gaussian(&mut rng));
    c.bench_function("det_c 4x4", |b| b.iter(|| det_c(black_box(&a)).unwrap()));
}

fn min_det(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_det");
    g.sample_size(10);
    let ciod = ciod4();
    g.bench_function("ciod4 M=2", |b| b.iter(|| min_det_code(black_box(&ciod), 2).unwrap()));
    g.bench_function("ciod4 integer B=2", |b| b.iter(|| min_det_z(black_box(&ciod), 2).unwrap()));
    let gold = golden();
    g.bench_function("golden integer B=1", |b| b.iter(|| min_det_z(black_box(&gold), 1).unwrap()));
    g.finish();
}

fn sphere(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (name, code, n_r, m) in [("golden 2x2 M=2", golden(), 2, 2u32), ("alamouti 2x1 M=4", alamouti(), 1, 4)] {
        let sets = code.coord_sets(m).unwrap();
        let h = sample_channel(n_r, 2, &mut rng);
        let eq = real_equivalent(&h, &code, 1.0).unwrap();
        let s: Vec<f64> = sets.iter().map(|s| s[rng.random_range(0..s.len())]).collect();
        let y: Vec<f64> = eq.heq.matvec(&s).iter().map(|v| v + rng.random_range(-0.5..0.5)).collect();
        c.bench_function(&format!("sphere {name}"), |b| b.iter(|| sphere_decode(black_box(&y), &eq, &sets).unwrap()));
    }
}

criterion_group!(benches, determinants, min_det, sphere);
criterion_main!(benches);
