use criterion::{criterion_group, criterion_main, Criterion};
use einforge_bench::{centre, cone_loop, s2h2_ambient, s2h2_boundary, s2h2_poincare, s2s2_cone};
use einforge_core::kernel::conformal::bach_at;
use einforge_core::kernel::curvature::curvature_jets;
use einforge_core::kernel::transport::{coordinate_frame, parallel_transport, IntegratorOptions};
use einforge_core::verify::{check_ambient_conditions, Tolerance};
use einforge_core::SamplePlan;
use std::hint::black_box;

fn curvature(c: &mut Criterion) {
    let p = s2h2_poincare().interior_patch;
    let x = centre(&p);
    c.bench_function("curvature/poincare-s2xh2-order2", |b| b.iter(|| curvature_jets(&p, black_box(&x), 2).unwrap()));
    let amb = s2h2_ambient();
    let plan = SamplePlan::new(0, 20, amb.ambient_patch.sample_box.clone());
    c.bench_function("checks/ambient-s2xh2-20-samples", |b| b.iter(|| check_ambient_conditions(&amb, &plan, Tolerance::analytic(1e-7))));
}

fn bach(c: &mut Criterion) {
    let g = s2h2_boundary();
    let x = centre(&g);
    c.bench_function("bach/s2xh2-order4", |b| b.iter(|| bach_at(&g, black_box(&x)).unwrap()));
}

fn transport(c: &mut Criterion) {
    let cone = s2s2_cone();
    let lp = cone_loop();
    let frame = coordinate_frame(5);
    let opts = IntegratorOptions::default();
    c.bench_function("transport/s2xs2-cone-loop", |b| b.iter(|| parallel_transport(&cone, &lp, &frame, &opts).unwrap()));
}

criterion_group! {
    name = kernel;
    config = Criterion::default().sample_size(20);
    targets = curvature, bach, transport
}
criterion_main!(kernel);
