//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use einforge_core::catalog::{einstein_product, parse_entry, product_metric};
use einforge_core::constructions::{ambient_metric, metric_cone, poincare_metric, PoincareSpec, ProductAmbientSpec};
use einforge_core::kernel::patch::MetricPatch;
use einforge_core::kernel::transport::PathSpec;
use num_rational::Rational64;

pub fn s2h2_poincare() -> PoincareSpec {
    poincare_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap(), Rational64::new(1, 2)).unwrap()
}

pub fn s2h2_ambient() -> ProductAmbientSpec {
    ambient_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap(), Rational64::new(1, 2)).unwrap()
}

/// The 4-dimensional boundary `S² × H²`.
pub fn s2h2_boundary() -> MetricPatch {
    product_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap())
}

/// The Ricci-flat cone over the Einstein product `S² × S²`.
pub fn s2s2_cone() -> MetricPatch {
    let s2 = parse_entry("sphere(2,1)").unwrap();
    metric_cone(&einstein_product(&s2, &s2, 1).unwrap()).unwrap().cone_patch
}

/// A closed loop in the cone chart `(x, s)` that leaves and re-enters `{s = 1}`.
pub fn cone_loop() -> PathSpec {
    PathSpec::from_jet_fn(true, |t| {
        let a = t * (2.0 * PI);
        vec![&(&a.cos() * 0.3) - 0.3, &a.sin() * 0.3, t.lift(0.1), &a.sin() * 0.2, &(&(&a * 2.0).sin() * 0.4) + 1.0]
    })
}

/// The midpoint of a patch's sample box.
pub fn centre(patch: &MetricPatch) -> Vec<f64> {
    patch.sample_box.iter().map(|(a, b)| (a + b) / 2.0).collect()
}
