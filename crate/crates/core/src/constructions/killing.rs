//! Special Killing forms on Poincaré interiors and their parallel lifts to cones.
//!
//! A `p`-form `φ` is special Killing with constant `c` when
//! `∇φ = dφ/(p+1)` and `∇_Y dφ = c g(Y,·)∧φ`.

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;

use super::poincare::{poincare_metric, PoincareSpec};
use crate::error::{GeometryError, Result};
use crate::kernel::forms::{covariant_derivative_form, exterior_d, volume_form, wedge, wedge_components, FormField, JetFn};
use crate::kernel::jet::{Jet, JetLayout};
use crate::kernel::lie::VectorField;
use crate::kernel::patch::{block_diagonal, invert_checked, MetricPatch, ResidualNorm};
use crate::kernel::sampling::SamplePlan;
use crate::kernel::tensor::{frame_max_abs, multi_indices, Tensor};

/// Residual above which [`killing_cone_lift`] refuses a form.
pub const SPECIAL_KILLING_TOLERANCE: f64 = 1e-6;

/// `ψ = (μr/2 − 1/r)^{m₁+1} vol(g₁)` on a Poincaré interior with `μ > 0`.
#[derive(Clone)]
pub struct KillingFormSpec {
    /// The interior after sign normalization.
    pub poincare: PoincareSpec,
    /// Whether the factors were exchanged to make `μ > 0`.
    pub swapped: bool,
    pub degree: usize,
    pub psi: FormField,
    /// `γ = (h₁′/h₁) ds = h₂/(h₁ r) dr`.
    pub gamma: FormField,
    pub killing_constant: f64,
}

impl fmt::Debug for KillingFormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KillingFormSpec(degree {} on {:?})", self.degree, self.poincare)
    }
}

impl KillingFormSpec {
    pub fn mu(&self) -> f64 {
        self.poincare.mu_f64()
    }

    pub fn r_index(&self) -> usize {
        self.poincare.r_index()
    }

    /// `h₁ = √(2μ) sinh s = μr/2 − 1/r`.
    pub fn h1(&self, r: f64) -> f64 {
        self.mu() * r / 2.0 - 1.0 / r
    }

    /// `h₂ = √(2μ) cosh s = μr/2 + 1/r`.
    pub fn h2(&self, r: f64) -> f64 {
        self.mu() * r / 2.0 + 1.0 / r
    }

    /// `s = ln(√(μ/2) r)`.
    pub fn s_coordinate(&self, r: f64) -> f64 {
        ((self.mu() / 2.0).sqrt() * r).ln()
    }

    /// `r_# = |ψ|^{−1}`, extended by zero at `r = 0`.
    pub fn r_sharp(&self, r: f64) -> f64 {
        if r == 0.0 {
            0.0
        } else {
            1.0 / self.h1(r).abs()
        }
    }

    /// `|d r_#|` measured in the compactified metric `r_#² g⁺`, along `∂_r`.
    pub fn defining_function_gradient(&self, r: f64) -> f64 {
        // r_# = r/A with A = 1 − μr²/2; (r_#² g⁺)^{rr} = A²
        let mu = self.mu();
        let a = 1.0 - mu * r * r / 2.0;
        let dr_sharp = (a + mu * r * r) / (a * a);
        (a * dr_sharp).abs()
    }
}

/// `c = −(p+1) Sc / ((n+1) n)` on an `(n+1)`-manifold.
pub fn killing_constant(p: usize, manifold_dim: usize, sc: f64) -> f64 {
    let d = manifold_dim as f64;
    -(p as f64 + 1.0) * sc / (d * (d - 1.0))
}

pub fn special_killing_form(p: &PoincareSpec) -> Result<KillingFormSpec> {
    let (poincare, swapped) = if p.mu.is_positive() {
        (p.clone(), false)
    } else if p.mu.is_negative() {
        (poincare_metric(&p.g2, &p.g1, -p.mu)?, true)
    } else {
        return Err(GeometryError::BadMu(0.0));
    };
    let g1 = &poincare.g1;
    if !g1.patch.oriented {
        return Err(GeometryError::OrientationUnset(g1.label.clone()));
    }
    let (m1, n) = (g1.m, poincare.n());
    let dim = n + 1;
    let mu = poincare.mu_f64();
    let h1 = move |r: &Jet| &(r * (mu / 2.0)) - &r.recip();
    let psi = if m1 == 0 {
        FormField::new(dim, 0, move |x| Ok(vec![h1(&x[n])]))
    } else {
        let weight: JetFn = Arc::new(move |x: &[Jet]| h1(&x[n]).powi(m1 as i32 + 1));
        volume_form(&g1.patch).extend(dim, 0).multiply(weight)
    };
    let gamma = FormField::new(dim, 1, move |x| {
        let r = &x[n];
        let ratio = &(&(r * (mu / 2.0)) + &r.recip()) / &(&h1(r) * r);
        let mut out = vec![x[0].lift(0.0); dim];
        out[n] = ratio;
        Ok(out)
    });
    let sc = -((dim * (dim - 1)) as f64);
    Ok(KillingFormSpec { killing_constant: killing_constant(m1, dim, sc), poincare, swapped, degree: m1, psi, gamma })
}

/// Residuals of the two defining equations at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingResiduals {
    /// `∇φ − dφ/(p+1)`.
    pub first: f64,
    /// `max_Y |∇_Y dφ − c g(Y,·)∧φ|`.
    pub second: f64,
}

fn constant_jets(values: &[f64]) -> Vec<Jet> {
    let layout = JetLayout::get(1, 0);
    values.iter().map(|&v| Jet::constant(layout, v)).collect()
}

/// Tensor size in the patch's residual norm.
pub fn tensor_residual(patch: &MetricPatch, g: &nalgebra::DMatrix<f64>, t: &Tensor<f64>) -> f64 {
    match patch.norm {
        ResidualNorm::Components => t.max_abs(),
        ResidualNorm::Operator => frame_max_abs(g, t),
    }
}

pub fn killing_residuals(patch: &MetricPatch, phi: &FormField, c: f64, coords: &[f64], ys: &[Vec<f64>]) -> Result<KillingResiduals> {
    let dim = patch.dim();
    let p = phi.degree;
    let g = patch.matrix(coords)?;
    let nabla = covariant_derivative_form(patch, phi, coords, 1)?.values();
    let top = p >= dim;
    let dphi = if top { Tensor::filled(dim, p + 1, 0.0) } else { exterior_d(phi)?.eval(coords)? };
    let first = tensor_residual(patch, &g, &nabla.sub(&dphi.map(|v| v / (p as f64 + 1.0))));

    // for a top-degree form both sides of the second equation vanish identically
    let second = if top {
        0.0
    } else {
        let d2 = covariant_derivative_form(patch, &exterior_d(phi)?, coords, 1)?.values();
        let psi_j = constant_jets(&phi.eval(coords)?.data);
        let zero = Jet::constant(JetLayout::get(1, 0), 0.0);
        let rest = dim.pow(p as u32 + 1);
        let mut worst: f64 = 0.0;
        for y in ys {
            let yflat: Vec<f64> = (0..dim).map(|i| (0..dim).map(|j| g[(i, j)] * y[j]).sum()).collect();
            let rhs = wedge_components(&constant_jets(&yflat), 1, &psi_j, p, dim, &zero);
            let diff = (0..rest).map(|k| (0..dim).map(|a| y[a] * d2.data[a * rest + k]).sum::<f64>() - c * rhs[k].value()).collect();
            worst = worst.max(tensor_residual(patch, &g, &Tensor::from_vec(dim, p + 1, diff)));
        }
        worst
    };
    Ok(KillingResiduals { first, second })
}

/// A parallel form on the cone `−sgn(c)((−c u²/(p+1)) g + du²)` over `g`.
#[derive(Clone)]
pub struct KillingLift {
    /// Coordinates `(x, u)`.
    pub cone_patch: MetricPatch,
    /// `φ̃ = u^p du∧φ + u^{p+1}/(p+1) dφ`.
    pub form: FormField,
    pub degree: usize,
    pub c: f64,
    /// `u∂_u`.
    pub euler_field: VectorField,
}

impl fmt::Debug for KillingLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KillingLift(degree {} on {})", self.degree + 1, self.cone_patch.label)
    }
}

/// The cone over `base` adapted to Killing constant `c`.
pub fn killing_cone(base: &MetricPatch, p: usize, c: f64) -> MetricPatch {
    let d = base.dim();
    let sign = -c.signum();
    let k = -c / (p as f64 + 1.0);
    let inner = base.clone();
    let domain = base.domain.product(&crate::kernel::chart::Domain::new(vec![(0.0, f64::INFINITY)]));
    let mut sample_box = base.sample_box.clone();
    sample_box.push(super::cone::RADIAL_SAMPLE);
    let (bp, bq) = base.signature;
    let base_sig = if sign * k > 0.0 { (bp, bq) } else { (bq, bp) };
    let signature = if sign > 0.0 { (base_sig.0 + 1, base_sig.1) } else { (base_sig.0, base_sig.1 + 1) };
    MetricPatch::from_fn(d + 1, signature, domain, sample_box, format!("cone_c={c}({})", base.label), move |x: &[Jet]| {
        let u = &x[d];
        let w = &(u * u) * (sign * k);
        let g: Vec<Jet> = inner.components_on(&x[..d])?.iter().map(|v| v * &w).collect();
        Ok(block_diagonal(u, &[(d, g), (1, vec![u.lift(sign)])]))
    })
    .with_orientation(base.oriented)
}

/// Lifts a special Killing `p`-form with constant `c` to a parallel
/// `(p+1)`-form on the adapted cone. The defining equations are checked at a
/// few seeded base points first.
pub fn killing_cone_lift(phi: &FormField, base: &MetricPatch, c: f64) -> Result<KillingLift> {
    let d = base.dim();
    let p = phi.degree;
    if phi.dim != d {
        return Err(GeometryError::DegreeMismatch(format!("form on dim {} over a base of dim {d}", phi.dim)));
    }
    let plan = SamplePlan::new(0, 3, base.sample_box.clone());
    let ys = SamplePlan::new(1, 2, vec![(-1.0, 1.0); d]).points(&crate::kernel::chart::Domain::unbounded(d))?;
    for x in plan.points(&base.domain)? {
        let r = killing_residuals(base, phi, c, &x, &ys)?;
        let worst = r.first.max(r.second);
        if worst > SPECIAL_KILLING_TOLERANCE {
            return Err(GeometryError::NotSpecialKilling { residual: worst, tolerance: SPECIAL_KILLING_TOLERANCE });
        }
    }
    let total = d + 1;
    let du = FormField::new(total, 1, move |x| {
        let mut out = vec![x[0].lift(0.0); total];
        out[d] = x[0].lift(1.0);
        Ok(out)
    });
    let up = move |e: i32| -> JetFn { Arc::new(move |x: &[Jet]| x[d].powi(e)) };
    let mut form = wedge(&du, &phi.extend(total, 0))?.multiply(up(p as i32));
    if p < d {
        let scale = 1.0 / (p as f64 + 1.0);
        let dphi = exterior_d(phi)?.extend(total, 0).multiply(up(p as i32 + 1)).scale(scale);
        form = form.add(&dphi)?;
    }
    Ok(KillingLift { cone_patch: killing_cone(base, p, c), form, degree: p, c, euler_field: super::ambient::fibre_euler_field(total, d) })
}

/// `ι_{u∂u} φ̃` at `u = 1`, restricted to base indices, minus `φ`.
pub fn lift_recovery_residual(lift: &KillingLift, phi: &FormField, base_coords: &[f64]) -> Result<f64> {
    let d = phi.dim;
    let p = phi.degree;
    let mut y = base_coords.to_vec();
    y.push(1.0);
    let lifted = lift.form.eval(&y)?;
    let original = phi.eval(base_coords)?;
    let total = d + 1;
    let rest = total.pow(p as u32);
    let mut worst: f64 = 0.0;
    for ix in multi_indices(d, p) {
        let off = ix.iter().fold(0, |a, &i| a * total + i);
        // X = u∂u has the single component u = 1 at index d
        let value = lifted.data[d * rest + off];
        worst = worst.max((value - original.get(&ix)).abs());
    }
    Ok(worst)
}

/// `g(γ♯, γ♯)` at a point.
pub fn gamma_norm_squared(spec: &KillingFormSpec, coords: &[f64]) -> Result<f64> {
    let g = spec.poincare.interior_patch.matrix(coords)?;
    let ginv = invert_checked(&g, coords)?;
    let gamma = spec.gamma.eval(coords)?;
    let m = g.nrows();
    Ok((0..m).map(|a| (0..m).map(|b| gamma.data[a] * ginv[(a, b)] * gamma.data[b]).sum::<f64>()).sum())
}

/// `ι_{γ♯} ψ` at a point.
pub fn gamma_insertion(spec: &KillingFormSpec, coords: &[f64]) -> Result<Tensor<f64>> {
    let g = spec.poincare.interior_patch.matrix(coords)?;
    let ginv = invert_checked(&g, coords)?;
    let gamma = spec.gamma.eval(coords)?;
    let m = g.nrows();
    let sharp: Vec<f64> = (0..m).map(|a| (0..m).map(|b| ginv[(a, b)] * gamma.data[b]).sum()).collect();
    let psi = spec.psi.eval(coords)?;
    let p = spec.degree;
    if p == 0 {
        return Ok(Tensor::from_vec(m, 0, vec![0.0]));
    }
    let rest = m.pow(p as u32 - 1);
    let data = (0..rest).map(|k| (0..m).map(|a| sharp[a] * psi.data[a * rest + k]).sum()).collect();
    Ok(Tensor::from_vec(m, p - 1, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_entry;
    use crate::kernel::forms::form_norm_squared;
    use crate::kernel::patch::flat_patch;
    use num_rational::Rational64;

    fn spec() -> KillingFormSpec {
        let p =
            poincare_metric(&parse_entry("sphere(2,1)").unwrap(), &parse_entry("hyperbolic(2,1)").unwrap(), Rational64::new(1, 2)).unwrap();
        special_killing_form(&p).unwrap()
    }

    #[test]
    fn lemma_quantities_on_s2_h2() {
        let k = spec();
        assert_eq!(k.killing_constant, 3.0);
        let patch = &k.poincare.interior_patch;
        let ys = vec![vec![0.3, -0.2, 0.5, 0.1, 0.7], vec![1.0, 0.0, 0.0, 0.0, 0.0]];
        for x in [[0.1, 0.2, -0.3, 0.1, 0.4], [-0.2, 0.1, 0.2, 0.3, 1.2]] {
            let r = x[4];
            assert!((form_norm_squared(patch, &k.psi, &x).unwrap() - k.h1(r).powi(2)).abs() < 1e-9);
            let res = killing_residuals(patch, &k.psi, k.killing_constant, &x, &ys).unwrap();
            assert!(res.first < 1e-9 && res.second < 1e-9, "{res:?}");
            assert!(gamma_insertion(&k, &x).unwrap().max_abs() < 1e-12);
            let n2 = gamma_norm_squared(&k, &x).unwrap();
            assert!((n2 - (k.h2(r) / k.h1(r)).powi(2)).abs() < 1e-9 && n2 > 1.0);
        }
        assert!((k.h1(1.3) - (2.0 * k.mu()).sqrt() * k.s_coordinate(1.3).sinh()).abs() < 1e-12);
        assert!((k.defining_function_gradient(1e-4) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn negative_mu_is_normalized_and_zero_mu_rejected() {
        let p = poincare_metric(&parse_entry("hyperbolic(2,1)").unwrap(), &parse_entry("sphere(2,1)").unwrap(), Rational64::new(-1, 2))
            .unwrap();
        let k = special_killing_form(&p).unwrap();
        assert!(k.swapped && k.mu() > 0.0);
        let flat =
            poincare_metric(&parse_entry("flat(2)").unwrap(), &parse_entry("flat(1)").unwrap(), Rational64::from_integer(0)).unwrap();
        assert!(matches!(special_killing_form(&flat), Err(GeometryError::BadMu(_))));
        let unoriented = parse_entry("sphere(2,1)").unwrap();
        let mut unoriented = unoriented;
        unoriented.patch = unoriented.patch.with_orientation(false);
        let p = poincare_metric(&unoriented, &parse_entry("hyperbolic(2,1)").unwrap(), Rational64::new(1, 2)).unwrap();
        assert!(matches!(special_killing_form(&p), Err(GeometryError::OrientationUnset(_))));
    }

    #[test]
    fn perturbed_form_is_rejected() {
        let k = spec();
        let bent = k.psi.multiply(Arc::new(|x: &[Jet]| &(&x[0] * 0.3) + 1.0));
        let e = killing_cone_lift(&bent, &k.poincare.interior_patch, k.killing_constant);
        assert!(matches!(e, Err(GeometryError::NotSpecialKilling { .. })));
    }

    #[test]
    fn lift_is_parallel_and_recovers_the_form() {
        let k = spec();
        let lift = killing_cone_lift(&k.psi, &k.poincare.interior_patch, k.killing_constant).unwrap();
        let y = [0.1, 0.2, -0.3, 0.1, 0.6, 1.3];
        let nabla = covariant_derivative_form(&lift.cone_patch, &lift.form, &y, 1).unwrap().values();
        assert!(nabla.max_abs() < 1e-9, "{}", nabla.max_abs());
        assert!(lift.form.eval(&y).unwrap().max_abs() > 1.0);
        assert_eq!(lift_recovery_residual(&lift, &k.psi, &y[..5]).unwrap(), 0.0);
    }

    #[test]
    fn zero_form_lifts_to_zero() {
        let base = flat_patch(3);
        let zero = FormField::zero(3, 2);
        let lift = killing_cone_lift(&zero, &base, 3.0).unwrap();
        assert_eq!(lift.form.eval(&[0.1, 0.2, 0.3, 1.1]).unwrap().max_abs(), 0.0);
    }
}
