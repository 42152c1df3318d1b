//! Metric cones over Einstein bases, their products, and the `(s₁,s₂) ↔ (t,ρ)` change.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::catalog::{to_f64, EinsteinSpec};
use crate::error::{GeometryError, Result};
use crate::kernel::chart::Domain;
use crate::kernel::jet::Jet;
use crate::kernel::lie::VectorField;
use crate::kernel::patch::{block_diagonal, MetricPatch};

/// Sampling interval for cone radial coordinates.
pub const RADIAL_SAMPLE: (f64, f64) = (0.5, 2.0);

/// `sgn(λ)(λ s² g + ds²)` on `M × (0,∞)`, coordinates `(x, s)`.
#[derive(Clone)]
pub struct ConeSpec {
    pub base: EinsteinSpec,
    pub cone_patch: MetricPatch,
    pub lambda: Rational64,
    pub sgn: f64,
    /// `s∂_s`.
    pub euler_field: VectorField,
}

impl fmt::Debug for ConeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConeSpec({}, λ = {})", self.base.label, self.lambda)
    }
}

impl fmt::Debug for ConeProductSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ConeProductSpec({:?} × {:?})", self.cone1, self.cone2)
    }
}

impl ConeSpec {
    /// Index of `s` in the cone chart.
    pub fn s_index(&self) -> usize {
        self.base.m
    }

    pub fn dim(&self) -> usize {
        self.base.m + 1
    }
}

fn euler_at(dim: usize, indices: Vec<usize>) -> VectorField {
    Arc::new(move |x: &[Jet]| {
        let mut v = vec![x[0].lift(0.0); dim];
        for &i in &indices {
            v[i] = x[i].clone();
        }
        v
    })
}

/// The cone with `λ = Sc/(m(m−1))`.
pub fn metric_cone(spec: &EinsteinSpec) -> Result<ConeSpec> {
    match spec.lambda {
        Some(l) if !l.is_zero() => metric_cone_with_lambda(spec, l),
        _ => Err(GeometryError::RicciFlatBase(format!("{} has Sc = {}; its cone is not defined", spec.label, spec.sc))),
    }
}

/// The cone with an explicit `λ`. For `m ≥ 2` the value must match the base;
/// for `m ≤ 1` any nonzero `λ` gives a flat cone.
pub fn metric_cone_with_lambda(spec: &EinsteinSpec, lambda: Rational64) -> Result<ConeSpec> {
    if lambda.is_zero() {
        return Err(GeometryError::RicciFlatBase(format!("{}: cone needs λ ≠ 0", spec.label)));
    }
    if let Some(own) = spec.lambda {
        if own != lambda {
            return Err(GeometryError::LambdaMismatch(format!("{} has λ = {own}, cone requested with λ = {lambda}", spec.label)));
        }
    }
    let m = spec.m;
    let l = to_f64(lambda);
    let sgn = if lambda.is_positive() { 1.0 } else { -1.0 };
    let base = spec.patch.clone();
    let label = format!("cone({})", spec.label);
    let (p, q) = spec.patch.signature;
    let signature = if sgn > 0.0 { (p + 1, q) } else { (p, q + 1) };
    let domain = spec.patch.domain.product(&Domain::new(vec![(0.0, f64::INFINITY)]));
    let mut sample_box = spec.patch.sample_box.clone();
    sample_box.push(RADIAL_SAMPLE);
    let patch = MetricPatch::from_fn(m + 1, signature, domain, sample_box, label.clone(), move |x: &[Jet]| {
        let s = &x[m];
        let warp = &(s * s) * (sgn * l);
        let g: Vec<Jet> = base.components_on(&x[..m])?.iter().map(|c| c * &warp).collect();
        let ds = x[m].lift(sgn);
        Ok(block_diagonal(&x[m], &[(m, g), (1, vec![ds])]))
    })
    .with_orientation(spec.patch.oriented);
    Ok(ConeSpec { base: spec.clone(), cone_patch: patch, lambda, sgn, euler_field: euler_at(m + 1, vec![m]) })
}

/// Product of two cones on `(x₁, s₁, x₂, s₂)`.
#[derive(Clone)]
pub struct ConeProductSpec {
    pub cone1: ConeSpec,
    pub cone2: ConeSpec,
    pub product_patch: MetricPatch,
    /// `s₁∂_{s₁} + s₂∂_{s₂}`.
    pub euler_field: VectorField,
}

impl ConeProductSpec {
    pub fn s_indices(&self) -> (usize, usize) {
        (self.cone1.s_index(), self.cone1.dim() + self.cone2.s_index())
    }

    /// `s₁∂_{s₁}` alone, which is not a homothety of the product.
    pub fn first_euler_field(&self) -> VectorField {
        euler_at(self.product_patch.dim(), vec![self.s_indices().0])
    }
}

pub fn cone_product(c1: &ConeSpec, c2: &ConeSpec) -> Result<ConeProductSpec> {
    if c1.lambda.abs() != c2.lambda.abs() {
        return Err(GeometryError::LambdaMismatch(format!("cones normalized with λ = {} and λ = {}", c1.lambda, c2.lambda)));
    }
    let label = format!("{}×{}", c1.cone_patch.label, c2.cone_patch.label);
    let product_patch = c1.cone_patch.product(&c2.cone_patch).with_label(label.clone()).with_chart_id(label);
    let dim = product_patch.dim();
    let (i1, i2) = (c1.s_index(), c1.dim() + c2.s_index());
    Ok(ConeProductSpec { cone1: c1.clone(), cone2: c2.clone(), product_patch, euler_field: euler_at(dim, vec![i1, i2]) })
}

/// Direction of [`cone_coords`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeDirection {
    SToTRho,
    TRhoToS,
}

fn require_positive_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(GeometryError::OutOfDomain { chart: "cone coordinates".into(), point: vec![lambda], reason: "λ must be positive".into() })
    }
}

/// `t = √λ(s₁+s₂)/2`, `ρ = 2(s₁−s₂)/(λ(s₁+s₂))` and its inverse
/// `s₁,₂ = (2μ)^{−1/2} t (1 ± μρ)` with `μ = λ/2`.
pub fn cone_coords(direction: ConeDirection, inputs: (f64, f64), lambda: f64) -> Result<(f64, f64)> {
    require_positive_lambda(lambda)?;
    let out_of_domain = |reason: &str| GeometryError::OutOfDomain {
        chart: "cone coordinates".into(),
        point: vec![inputs.0, inputs.1],
        reason: reason.into(),
    };
    match direction {
        ConeDirection::SToTRho => {
            let (s1, s2) = inputs;
            if !(s1 > 0.0 && s2 > 0.0) {
                return Err(out_of_domain("s₁, s₂ must be positive"));
            }
            Ok((lambda.sqrt() * (s1 + s2) / 2.0, 2.0 * (s1 - s2) / (lambda * (s1 + s2))))
        }
        ConeDirection::TRhoToS => {
            let (t, rho) = inputs;
            let mu = lambda / 2.0;
            if !(t > 0.0 && 1.0 + mu * rho > 0.0 && 1.0 - mu * rho > 0.0) {
                return Err(out_of_domain("needs t > 0 and 1 ± μρ > 0"));
            }
            let k = t / (2.0 * mu).sqrt();
            Ok((k * (1.0 + mu * rho), k * (1.0 - mu * rho)))
        }
    }
}

/// Determinant of `∂(t,ρ)/∂(s₁,s₂)`, which equals `−2/(√λ(s₁+s₂))`.
pub fn cone_coords_jacobian(s1: f64, s2: f64, lambda: f64) -> f64 {
    let sum = s1 + s2;
    let dt = [lambda.sqrt() / 2.0, lambda.sqrt() / 2.0];
    let drho = [4.0 * s2 / (lambda * sum * sum), -4.0 * s1 / (lambda * sum * sum)];
    dt[0] * drho[1] - dt[1] * drho[0]
}

/// The inverse change on jets, for pullbacks.
pub fn s_from_t_rho(t: &Jet, rho: &Jet, lambda: f64) -> (Jet, Jet) {
    let mu = lambda / 2.0;
    let k = t / (2.0 * mu).sqrt();
    let mr = rho * mu;
    (&k * &(&mr + 1.0), &k * &(1.0 - &mr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_entry;
    use crate::kernel::curvature::curvature_jets;
    use crate::kernel::lie::lie_derivative_jets;
    use crate::kernel::sampling::SamplePlan;

    #[test]
    fn cone_over_unit_sphere_is_flat() {
        let c = metric_cone(&parse_entry("sphere(2,1)").unwrap()).unwrap();
        assert_eq!(c.cone_patch.signature, (3, 0));
        for p in SamplePlan::new(3, 5, c.cone_patch.sample_box.clone()).points(&c.cone_patch.domain).unwrap() {
            let cj = curvature_jets(&c.cone_patch, &p, 2).unwrap();
            assert!(cj.riemann.values().max_abs() < 1e-8);
        }
    }

    #[test]
    fn cone_over_hyperbolic_plane_is_lorentzian_and_ricci_flat() {
        let c = metric_cone(&parse_entry("hyperbolic(2,1)").unwrap()).unwrap();
        assert_eq!(c.cone_patch.signature, (2, 1));
        assert_eq!(c.cone_patch.observed_signature(&[0.1, 0.2, 1.0]).unwrap(), (2, 1));
        let cj = curvature_jets(&c.cone_patch, &[0.1, 0.2, 1.3], 2).unwrap();
        assert!(cj.ricci.values().max_abs() < 1e-9);
        let l = lie_derivative_jets(&c.cone_patch, &c.euler_field, &[0.1, 0.2, 1.3], 1).unwrap().values();
        let g = c.cone_patch.matrix(&[0.1, 0.2, 1.3]).unwrap();
        assert!((l.matrix() - g * 2.0).amax() < 1e-12);
    }

    #[test]
    fn flat_base_has_no_cone() {
        assert!(matches!(metric_cone(&parse_entry("flat(2)").unwrap()), Err(GeometryError::RicciFlatBase(_))));
        let s2 = parse_entry("sphere(2,1)").unwrap();
        assert!(matches!(metric_cone_with_lambda(&s2, Rational64::new(1, 2)), Err(GeometryError::LambdaMismatch(_))));
    }

    #[test]
    fn cone_over_point_is_a_line() {
        let c = metric_cone_with_lambda(&crate::catalog::point_spec(), Rational64::from_integer(-1)).unwrap();
        assert_eq!(c.cone_patch.matrix(&[1.0]).unwrap()[(0, 0)], -1.0);
    }

    #[test]
    fn product_of_sphere_and_hyperbolic_cones_is_ricci_flat() {
        let c1 = metric_cone(&parse_entry("sphere(2,1)").unwrap()).unwrap();
        let c2 = metric_cone(&parse_entry("hyperbolic(2,1)").unwrap()).unwrap();
        let cp = cone_product(&c1, &c2).unwrap();
        assert_eq!(cp.product_patch.dim(), 6);
        let cj = curvature_jets(&cp.product_patch, &[0.1, 0.2, 1.1, -0.3, 0.2, 0.7], 2).unwrap();
        assert!(cj.ricci.values().max_abs() < 1e-9);
        let c3 = metric_cone(&parse_entry("sphere(3,1/4)").unwrap()).unwrap();
        assert!(matches!(cone_product(&c1, &c3), Err(GeometryError::LambdaMismatch(_))));
    }

    #[test]
    fn coordinate_change_examples() {
        let (t, rho) = cone_coords(ConeDirection::SToTRho, (1.0, 1.0), 1.0).unwrap();
        assert_eq!((t, rho), (1.0, 0.0));
        let (s1, s2) = cone_coords(ConeDirection::TRhoToS, (1.0, 0.0), 1.0).unwrap();
        assert!((s1 - 1.0).abs() < 1e-15 && (s2 - 1.0).abs() < 1e-15);
        assert!(cone_coords(ConeDirection::SToTRho, (-1.0, 1.0), 1.0).is_err());
        assert!(cone_coords(ConeDirection::TRhoToS, (1.0, 2.5), 1.0).is_err());
        assert!(cone_coords(ConeDirection::SToTRho, (1.0, 1.0), -1.0).is_err());
        assert!(cone_coords_jacobian(0.7, 1.9, 1.0) < 0.0);
    }

    #[test]
    fn jet_inverse_matches_scalar_inverse() {
        let t = Jet::seed(&[1.3, 0.4], 1);
        let (s1, s2) = s_from_t_rho(&t[0], &t[1], 2.0);
        let (a, b) = cone_coords(ConeDirection::TRhoToS, (1.3, 0.4), 2.0).unwrap();
        assert!((s1.value() - a).abs() < 1e-15 && (s2.value() - b).abs() < 1e-15);
    }
}
