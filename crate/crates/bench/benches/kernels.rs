use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use subspace_reach::linalg::{lp_optimize, mat_exp, LinearProgram};
use subspace_reach::{Matrix, TemplateDirections};

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn exponential(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(0);
    let mut group = c.benchmark_group("mat_exp");
    for n in [2, 8, 22] {
        let a = random_matrix(&mut rng, n, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| mat_exp(a, 0.01).unwrap())
        });
    }
    group.finish();
}

fn linear_programs(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let mut group = c.benchmark_group("lp_octagon");
    for n in [2, 5, 10] {
        // A random polytope described by octagonal constraints, so bounded.
        let dirs = TemplateDirections::octagonal(n);
        let rows: Vec<f64> = dirs.directions().iter().flatten().copied().collect();
        let a = Matrix::from_vec(dirs.len(), n, rows);
        let bounds: Vec<f64> = (0..dirs.len()).map(|_| rng.gen_range(1.0..2.0)).collect();
        let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lp = LinearProgram::new(a, bounds, obj);
        group.bench_with_input(BenchmarkId::from_parameter(n), &lp, |b, lp| b.iter(|| lp_optimize(lp)));
    }
    group.finish();
}

criterion_group!(benches, exponential, linear_programs);
criterion_main!(benches);
