//! Data-parallel kernels against a single-thread baseline.
//!
//! With the default `parallel` feature the same code runs once on the
//! global rayon pool and once inside a one-thread pool, which isolates the
//! parallel speedup from algorithmic differences. A build with
//! `--no-default-features` benches the plain sequential fallback instead.

use criterion::{criterion_group, criterion_main, Criterion};
use mefem::algebra::Metric;
use mefem::constitutive::{CouplingMode, IsotropicElastic, MagnetoElasticEnergy};
use mefem::mesh::{displacement_gradient, generate_box_mesh_with, NodalVectorField};
use mefem::solve::{assemble_elastic, assemble_magnetic, cg_solve, DisplacementBc, PotentialBc, ProblemSpec};

const DIVISIONS: usize = 12;

fn slab_mesh() -> mefem::mesh::SimplicialMesh {
    generate_box_mesh_with(
        [1.0, 1.0, 1.0],
        [DIVISIONS; 3],
        |c| if (c[2] - 0.5).abs() < 0.2 { 2 } else { 1 },
        None,
    )
    .unwrap()
}

fn model() -> MagnetoElasticEnergy {
    MagnetoElasticEnergy::new(CouplingMode::ModelA, Metric::euclidean())
        .with_elastic(2, IsotropicElastic::new(100.0, 80.0).unwrap())
        .with_reluctivity(1, 1.0)
        .with_reluctivity(2, 0.01)
}

fn run_modes(c: &mut Criterion, name: &str, f: impl Fn() + Copy + Send + Sync) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(f));
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function("single_thread", |b| b.iter(|| pool.install(f)));
    }
    group.finish();
}

fn bench_elastic_assembly(c: &mut Criterion) {
    let mesh = slab_mesh();
    let mut spec = ProblemSpec::new(&mesh, model());
    for tag in 1..=4 {
        spec.displacement_bc.insert(tag, DisplacementBc::Components([Some(0.0); 3]));
    }
    run_modes(c, "elastic_assembly", || {
        let system = assemble_elastic(&spec, None).unwrap();
        std::hint::black_box(system.matrix.nnz());
    });
}

fn bench_magnetic_assembly(c: &mut Criterion) {
    let mesh = slab_mesh();
    let mut spec = ProblemSpec::new(&mesh, model());
    for tag in 1..=6 {
        spec.potential_bc.insert(tag, PotentialBc::UniformB([1.0, 0.0, 0.0]));
    }
    run_modes(c, "magnetic_assembly", || {
        let system = assemble_magnetic(&spec, None).unwrap();
        std::hint::black_box(system.matrix.nnz());
    });
}

fn bench_strain_field(c: &mut Criterion) {
    let mesh = slab_mesh();
    let nu = NodalVectorField::from_fn(&mesh, |x| {
        [x[0] * x[1] * 1e-3, (x[2] * x[2] - x[0]) * 1e-3, x[1] * 2e-3]
    });
    run_modes(c, "strain_field", || {
        let field = displacement_gradient(&mesh, &nu);
        std::hint::black_box(field.len());
    });
}

fn bench_cg(c: &mut Criterion) {
    let mesh = slab_mesh();
    let mut spec = ProblemSpec::new(&mesh, model());
    for tag in 1..=6 {
        spec.potential_bc.insert(tag, PotentialBc::UniformB([1.0, 0.0, 0.0]));
    }
    let system = assemble_magnetic(&spec, None).unwrap();
    run_modes(c, "cg_magnetic", || {
        let (x, _) = cg_solve(&system.matrix, &system.rhs, 1e-8, 10_000, None).unwrap();
        std::hint::black_box(x.len());
    });
}

criterion_group!(
    benches,
    bench_elastic_assembly,
    bench_magnetic_assembly,
    bench_strain_field,
    bench_cg
);
criterion_main!(benches);
