//! Benchmarks for the hot paths: rate allocation, batch quantization,
//! Gram completion, and batched GP prediction.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use commgp::{
    allocate_bits, encode, gram_matrix, nystrom_complete, product_spectrum, water_fill, GpModel,
    KernelSpec, SpdMatrix,
};

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_spd(rng: &mut ChaCha8Rng, dim: usize) -> SpdMatrix {
    let b = gaussian_matrix(rng, dim, dim);
    let mut m = &b * b.transpose();
    let ridge = 0.1 * m.trace() / dim as f64;
    for i in 0..dim {
        m[(i, i)] += ridge;
    }
    SpdMatrix::new(m).expect("constructed matrix is SPD")
}

fn decaying_spectrum(dim: usize) -> Vec<f64> {
    (0..dim).map(|i| 0.8f64.powi(i as i32)).collect()
}

fn bench_water_fill(c: &mut Criterion) {
    let eigs = decaying_spectrum(64);
    let total: f64 = eigs.iter().sum();
    c.bench_function("water_fill_d64", |b| {
        b.iter(|| water_fill(std::hint::black_box(&eigs), std::hint::black_box(0.01 * total)))
    });
}

fn bench_allocate_bits(c: &mut Criterion) {
    let eigs = decaying_spectrum(64);
    c.bench_function("allocate_bits_d64_r256", |b| {
        b.iter(|| allocate_bits(std::hint::black_box(&eigs), std::hint::black_box(256)))
    });
}

fn bench_encode(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 32;
    let qx = random_spd(&mut rng, dim);
    let qy = random_spd(&mut rng, dim);
    let samples = gaussian_matrix(&mut rng, 1024, dim);
    c.bench_function("encode_1024x32_4bits_per_dim", |b| {
        b.iter(|| {
            encode(
                std::hint::black_box(&samples),
                &qx,
                &qy,
                (4 * dim) as u32,
            )
        })
    });
    let spectrum =
        std::sync::Arc::new(product_spectrum(&qx, &qy).expect("spectrum of SPD pair exists"));
    c.bench_function("encode_1024x32_precomputed_spectrum", |b| {
        b.iter(|| {
            commgp::persym::encode_with_spectrum(
                std::hint::black_box(&samples),
                spectrum.clone(),
                (4 * dim) as u32,
            )
        })
    });
}

fn bench_nystrom_complete(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kernel = KernelSpec::SquaredExponential {
        amplitude: 1.0,
        length_scale: 4.0,
    };
    let n = 512;
    let k = 64;
    let inputs = gaussian_matrix(&mut rng, n, 8);
    let gram = gram_matrix(&kernel, &inputs, &inputs).expect("gram of finite inputs");
    let anchor = gram.view((0, 0), (k, k)).clone_owned();
    let rows = gram.view((0, 0), (k, n)).clone_owned();
    c.bench_function("nystrom_complete_n512_k64", |b| {
        b.iter_batched(
            || (anchor.clone(), rows.clone()),
            |(a, r)| nystrom_complete(&a, &r),
            BatchSize::SmallInput,
        )
    });
}

fn bench_predict_many(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let kernel = KernelSpec::SquaredExponential {
        amplitude: 1.0,
        length_scale: 4.0,
    };
    let n = 400;
    let inputs = gaussian_matrix(&mut rng, n, 8);
    let targets = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let model = GpModel::from_inputs(kernel, 0.1, inputs, targets).expect("valid model");
    let tests = gaussian_matrix(&mut rng, 256, 8);
    c.bench_function("predict_many_n400_t256", |b| {
        b.iter(|| model.predict_many(std::hint::black_box(&tests)))
    });
}

criterion_group!(
    benches,
    bench_water_fill,
    bench_allocate_bits,
    bench_encode,
    bench_nystrom_complete,
    bench_predict_many
);
criterion_main!(benches);
