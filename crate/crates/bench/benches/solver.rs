use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use memsplate::fem2d::{assemble, ElementKernel};
use memsplate::geometry::coefficients;
use memsplate::{energy_gradient, ForceRoute, ShapeSensitivity};
use memsplate_bench::fixture;

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for n in [32, 64, 128] {
        let (model, u) = fixture(n);
        let points = ElementKernel::gauss_points(&model.mesh);
        let coeff = coefficients(&model.params, &u, &points, 4).unwrap();
        let data = vec![0.0; model.mesh.n_nodes()];
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| assemble(&model.mesh, &coeff, &data).unwrap()));
    }
    g.finish();
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_potential");
    g.sample_size(20);
    for n in [32, 64, 128] {
        let (model, u) = fixture(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| model.solve(&u).unwrap()));
    }
    g.finish();
}

fn gradient(c: &mut Criterion) {
    let mut g = c.benchmark_group("gradient");
    g.sample_size(20);
    let (model, u) = fixture(64);
    let phi = model.solve(&u).unwrap();
    g.bench_function("sensitivity_64", |b| b.iter(|| ShapeSensitivity::new(&model.params, &phi).load_vector(&u)));
    g.bench_function("energy_gradient_64", |b| b.iter(|| energy_gradient(&model, &u, ForceRoute::Consistent).unwrap()));
    g.finish();
}

criterion_group!(benches, assembly, solve, gradient);
criterion_main!(benches);
