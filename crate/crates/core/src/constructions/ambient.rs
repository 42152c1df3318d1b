//! The Ricci-flat ambient metric of a product of Einstein metrics with
//! opposite-sign normalized scalar curvatures.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::normal_form::{ambient_form_patch, MetricFamily};
use crate::catalog::{solve_mu, to_f64, EinsteinSpec};
use crate::error::{GeometryError, Result};
use crate::kernel::jet::Jet;
use crate::kernel::lie::VectorField;
use crate::kernel::patch::{block_diagonal, CoordMap, MetricPatch};

/// `h = 2t dt dρ + 2ρ dt² + t²[(1+μρ)²g₁ + (1−μρ)²g₂]` on `(x₁, x₂, t, ρ)`.
#[derive(Clone)]
pub struct ProductAmbientSpec {
    pub g1: EinsteinSpec,
    pub g2: EinsteinSpec,
    pub m1: usize,
    pub m2: usize,
    pub mu: Rational64,
    pub family: MetricFamily,
    pub ambient_patch: MetricPatch,
    /// `ρ` values removed from the fibre coordinate.
    pub domain_i_tilde: Vec<f64>,
    /// `t∂_t`.
    pub euler_field: VectorField,
}

impl fmt::Debug for ProductAmbientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProductAmbientSpec({} × {}, μ = {})", self.g1.label, self.g2.label, self.mu)
    }
}

impl ProductAmbientSpec {
    pub fn n(&self) -> usize {
        self.m1 + self.m2
    }

    pub fn t_index(&self) -> usize {
        self.n()
    }

    pub fn rho_index(&self) -> usize {
        self.n() + 1
    }

    pub fn mu_f64(&self) -> f64 {
        to_f64(self.mu)
    }

    pub fn warp_a(&self, rho: f64) -> f64 {
        1.0 + self.mu_f64() * rho
    }

    pub fn warp_b(&self, rho: f64) -> f64 {
        1.0 - self.mu_f64() * rho
    }

    /// `g₁ ⊕ g₂` at boundary coordinates `x`.
    pub fn boundary_metric(&self) -> MetricPatch {
        self.g1.patch.product(&self.g2.patch)
    }

    /// Points with `ρ = 0` form the metric bundle `𝒬`.
    pub fn on_q(&self, coords: &[f64]) -> bool {
        coords[self.rho_index()] == 0.0
    }
}

/// `ρ` values where `1 ± μρ` vanish on the relevant factors.
pub fn excluded_rho(mu: Rational64, m2: usize) -> Vec<f64> {
    if mu.is_zero() {
        Vec::new()
    } else if m2 == 0 {
        vec![-to_f64(mu.recip())]
    } else {
        let r = to_f64(mu.recip().abs());
        vec![-r, r]
    }
}

/// `(1+μρ)²g₁ + (1−μρ)²g₂` as a family on `M₁ × M₂`.
pub fn product_family(g1: &EinsteinSpec, g2: &EinsteinSpec, mu: Rational64) -> MetricFamily {
    let (m1, m2) = (g1.m, g2.m);
    let mu_f = to_f64(mu);
    let (p1, p2) = (g1.patch.clone(), g2.patch.clone());
    let base = g1.patch.product(&g2.patch);
    let label = format!("(1+μρ)²{} + (1−μρ)²{}", g1.label, g2.label);
    let rho_half = if mu.is_zero() { 1.0 } else { (0.5 / mu_f.abs()).min(1.0) };
    MetricFamily::new(&base, label, move |x, rho| {
        let a = &(rho * mu_f) + 1.0;
        let b = 1.0 - &(rho * mu_f);
        let (a2, b2) = (&a * &a, &b * &b);
        let c1: Vec<Jet> = p1.components_on(&x[..m1])?.iter().map(|c| c * &a2).collect();
        let c2: Vec<Jet> = if m2 == 0 { Vec::new() } else { p2.components_on(&x[m1..m1 + m2])?.iter().map(|c| c * &b2).collect() };
        Ok(block_diagonal(&rho.lift(0.0), &[(m1, c1), (m2, c2)]))
    })
    .with_rho((f64::NEG_INFINITY, f64::INFINITY), excluded_rho(mu, m2), (-rho_half, rho_half))
}

/// `t∂_t` on a chart whose `t` coordinate sits at `index`.
pub fn fibre_euler_field(dim: usize, index: usize) -> VectorField {
    Arc::new(move |x: &[Jet]| {
        let mut v = vec![x[0].lift(0.0); dim];
        v[index] = x[index].clone();
        v
    })
}

/// Builds the ambient metric for `μ`, which must solve the scalar-curvature
/// constraints (any `μ` when neither factor has dimension ≥ 2).
pub fn ambient_metric(g1: &EinsteinSpec, g2: &EinsteinSpec, mu: Rational64) -> Result<ProductAmbientSpec> {
    let solved = solve_mu(g1.m, g1.sc, g2.m, g2.sc)?;
    if let Some(expected) = solved.mu {
        if expected != mu {
            return Err(GeometryError::IncompatibleScalars(format!("μ = {mu} given, the factors force μ = {expected}")));
        }
    }
    let family = product_family(g1, g2, mu);
    let label = format!("ambient({},{},μ={})", g1.label, g2.label, mu);
    let n = g1.m + g2.m;
    let ambient_patch = ambient_form_patch(&family, label.clone()).with_chart_id(label);
    Ok(ProductAmbientSpec {
        g1: g1.clone(),
        g2: g2.clone(),
        m1: g1.m,
        m2: g2.m,
        mu,
        domain_i_tilde: family.rho_excluded.clone(),
        family,
        ambient_patch,
        euler_field: fibre_euler_field(n + 2, n),
    })
}

/// The ambient metric with `μ` from [`solve_mu`]; `μ = 0` when unconstrained.
pub fn ambient_metric_solved(g1: &EinsteinSpec, g2: &EinsteinSpec) -> Result<ProductAmbientSpec> {
    let mu = solve_mu(g1.m, g1.sc, g2.m, g2.sc)?.value_or(Rational64::zero());
    ambient_metric(g1, g2, mu)
}

/// The chart identification `(t̂, ρ̂) = (t/√α, αρ)` between the ambient metric
/// of `(g₁, g₂)` and that of `(αg₁, αg₂)`, as a map into the latter's chart.
pub fn dilation_map(n: usize, alpha: f64) -> CoordMap {
    let root = alpha.sqrt();
    Arc::new(move |x: &[Jet]| {
        let mut out = x.to_vec();
        out[n] = &x[n] / root;
        out[n + 1] = &x[n + 1] * alpha;
        out
    })
}

/// Pulls the ambient metric of the dilated pair back to the chart of `amb`.
pub fn dilated_ambient_pullback(amb: &ProductAmbientSpec, dilated: &ProductAmbientSpec, alpha: f64) -> Result<MetricPatch> {
    if alpha <= 0.0 || (dilated.mu_f64() * alpha - amb.mu_f64()).abs() > 1e-12 * amb.mu_f64().abs().max(1.0) {
        return Err(GeometryError::IncompatibleScalars(format!(
            "dilation by {alpha} should send μ = {} to {}, found {}",
            amb.mu,
            amb.mu_f64() / alpha,
            dilated.mu
        )));
    }
    let n = amb.n();
    Ok(dilated.ambient_patch.pullback(
        dilation_map(n, alpha),
        n + 2,
        amb.ambient_patch.domain.clone(),
        amb.ambient_patch.sample_box.clone(),
        format!("{}[dilated by {alpha}]", dilated.ambient_patch.label),
    ))
}

/// The smallest `|1 ± μρ|` among the warps present, zero on the excluded set.
pub fn warp_margin(mu: f64, m2: usize, rho: f64) -> f64 {
    let a = (1.0 + mu * rho).abs();
    if m2 == 0 {
        a
    } else {
        a.min((1.0 - mu * rho).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{parse_entry, scale_metric};
    use crate::kernel::curvature::curvature_jets;
    use crate::kernel::lie::lie_derivative_jets;
    use crate::kernel::sampling::SamplePlan;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn s2_h2_ambient_is_ricci_flat() {
        let amb = ambient_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap(), r(1, 2)).unwrap();
        assert_eq!(amb.domain_i_tilde, vec![-2.0, 2.0]);
        assert_eq!(amb.ambient_patch.signature, (5, 1));
        assert_eq!(amb.ambient_patch.observed_signature(&[0.1, 0.2, 0.3, 0.1, 1.0, 0.3]).unwrap(), (5, 1));
        let plan = SamplePlan::new(0, 5, amb.ambient_patch.sample_box.clone());
        for p in plan.points(&amb.ambient_patch.domain).unwrap() {
            let c = curvature_jets(&amb.ambient_patch, &p, 2).unwrap();
            assert!(c.ricci.values().max_abs() < 1e-9);
            let l = lie_derivative_jets(&amb.ambient_patch, &amb.euler_field, &p, 1).unwrap().values();
            let g = amb.ambient_patch.matrix(&p).unwrap();
            assert!((l.matrix() - g * 2.0).amax() < 1e-12);
        }
    }

    #[test]
    fn excluded_sets_follow_the_case_table() {
        assert_eq!(excluded_rho(r(1, 2), 0), vec![-2.0]);
        assert_eq!(excluded_rho(r(0, 1), 3), Vec::<f64>::new());
        assert_eq!(excluded_rho(r(-1, 4), 2), vec![-4.0, 4.0]);
        let amb = ambient_metric(&parse_entry("sphere(3,1)").unwrap(), &crate::catalog::point_spec(), r(1, 2)).unwrap();
        assert_eq!(amb.domain_i_tilde, vec![-2.0]);
        let p = vec![0.1, 0.1, 0.1, 1.0, -2.0];
        assert!(amb.ambient_patch.matrix(&p).is_err());
        assert_eq!(warp_margin(0.5, 0, 1.0), 1.5);
    }

    #[test]
    fn wrong_mu_is_rejected() {
        let e = ambient_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap(), r(1, 3));
        assert!(matches!(e, Err(GeometryError::IncompatibleScalars(_))));
    }

    #[test]
    fn dilation_identification_is_exact() {
        let (s2, h2) = (parse_entry("sphere(2,1)").unwrap(), parse_entry("hyperbolic(2,1)").unwrap());
        let amb = ambient_metric_solved(&s2, &h2).unwrap();
        let alpha = r(9, 4);
        let dil = ambient_metric_solved(&scale_metric(&s2, alpha).unwrap(), &scale_metric(&h2, alpha).unwrap()).unwrap();
        assert_eq!(dil.mu, r(2, 9));
        let pulled = dilated_ambient_pullback(&amb, &dil, 2.25).unwrap();
        let p = [0.2, -0.1, 0.3, 0.05, 1.2, 0.4];
        let diff = pulled.matrix(&p).unwrap() - amb.ambient_patch.matrix(&p).unwrap();
        assert!(diff.amax() < 1e-13);
    }
}
