//! Pointwise identity checks over seeded samples.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::Zero;

use super::report::{evaluate_plan, log_log_slope, CheckReport, ToleranceTier};
use crate::constructions::ambient::dilated_ambient_pullback;
use crate::constructions::cone::s_from_t_rho;
use crate::constructions::killing::{gamma_insertion, gamma_norm_squared, killing_residuals, lift_recovery_residual, tensor_residual};
use crate::constructions::normal_form::{ambient_ricci_blocks, ricci_normal_form};
use crate::constructions::MetricFamily;
use crate::constructions::{cone_coords, killing_cone_lift, ConeDirection, ConeProductSpec, KillingFormSpec, ProductAmbientSpec};
use crate::error::{GeometryError, Result};
use crate::kernel::chart::Domain;
use crate::kernel::conformal::bach_at;
use crate::kernel::curvature::curvature_jets;
use crate::kernel::forms::{covariant_derivative_form, form_norm_squared};
use crate::kernel::jet::Jet;
use crate::kernel::lie::{dual_form_curl, lie_derivative_jets, VectorField};
use crate::kernel::patch::{MetricPatch, ResidualNorm};
use crate::kernel::sampling::SamplePlan;
use crate::kernel::tensor::operator_norm;

/// A tolerance with the tier it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub value: f64,
    pub tier: ToleranceTier,
}

impl Tolerance {
    pub fn new(value: f64, tier: ToleranceTier) -> Tolerance {
        Tolerance { value, tier }
    }

    /// The tier's default value.
    pub fn tier(tier: ToleranceTier) -> Tolerance {
        Tolerance { value: tier.default_tolerance(), tier }
    }

    pub fn analytic(value: f64) -> Tolerance {
        Tolerance::new(value, ToleranceTier::Analytic)
    }
}

/// Symmetric 2-tensor size in the patch's residual norm.
fn sym_residual(patch: &MetricPatch, g: &DMatrix<f64>, e: &DMatrix<f64>) -> f64 {
    match patch.norm {
        ResidualNorm::Components => e.amax(),
        ResidualNorm::Operator => operator_norm(g, e),
    }
}

/// `g + ε w(x) (dxᵢ dxⱼ + dxⱼ dxᵢ)/2`, a negative-control perturbation.
pub fn perturbed_patch(
    patch: &MetricPatch,
    eps: f64,
    (i, j): (usize, usize),
    weight: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static,
) -> MetricPatch {
    let inner = patch.clone();
    let m = patch.dim();
    let label = format!("{}+{eps:e}·w·dx{i}dx{j}", patch.label);
    MetricPatch::from_fn(m, patch.signature, patch.domain.clone(), patch.sample_box.clone(), patch.chart_id.clone(), move |x| {
        let mut c = inner.components_on(x)?;
        let w = &weight(x) * if i == j { eps } else { eps / 2.0 };
        c[i * m + j] = &c[i * m + j] + &w;
        if i != j {
            c[j * m + i] = &c[j * m + i] + &w;
        }
        Ok(c)
    })
    .with_label(label)
    .with_norm(patch.norm)
    .with_orientation(patch.oriented)
}

/// `Ric(g) − Λg` at every sample.
pub fn check_einstein(patch: &MetricPatch, lambda: f64, plan: &SamplePlan, tol: Tolerance) -> CheckReport {
    evaluate_plan("einstein", plan, &patch.domain, tol.value, tol.tier, |p| {
        let c = curvature_jets(patch, p, 2)?;
        let g = c.g.values().matrix();
        let e = c.ricci.values().matrix() - &g * lambda;
        Ok(sym_residual(patch, &g, &e))
    })
    .note(format!("{} with Λ = {lambda}", patch.label))
}

/// The three defining properties of an ambient metric.
#[derive(Debug, Clone)]
pub struct AmbientChecks {
    /// `ℒ_X h − 2h`.
    pub homogeneity: CheckReport,
    /// `h|_{ρ=0}` against `t²(g₁ ⊕ g₂)` on the `(x, t)` block.
    pub boundary: CheckReport,
    /// `Ric(h)`.
    pub ricci: CheckReport,
}

impl AmbientChecks {
    pub fn pass(&self) -> bool {
        self.homogeneity.pass && self.boundary.pass && self.ricci.pass
    }

    pub fn into_vec(self) -> Vec<CheckReport> {
        vec![self.homogeneity, self.boundary, self.ricci]
    }
}

pub fn check_ambient_conditions(amb: &ProductAmbientSpec, plan: &SamplePlan, tol: Tolerance) -> AmbientChecks {
    check_ambient_patch(&amb.ambient_patch, &amb.euler_field, &amb.boundary_metric(), plan, tol)
}

/// The ambient checks for any metric on `(x, t, ρ)` with boundary metric `boundary` on `x`.
pub fn check_ambient_patch(
    h: &MetricPatch,
    euler: &VectorField,
    boundary: &MetricPatch,
    plan: &SamplePlan,
    tol: Tolerance,
) -> AmbientChecks {
    let n = boundary.dim();
    let (t_ix, rho_ix) = (n, n + 1);
    let homogeneity = evaluate_plan("ambient-homogeneity", plan, &h.domain, tol.value, tol.tier, |p| {
        let l = lie_derivative_jets(h, euler, p, 1)?.values().matrix();
        Ok((l - h.matrix(p)? * 2.0).amax())
    });
    let on_q = |p: &[f64]| {
        let mut q = p.to_vec();
        q[rho_ix] = 0.0;
        q
    };
    let boundary_report = evaluate_plan("ambient-boundary", plan, &h.domain, tol.value, tol.tier, |p| {
        let q = on_q(p);
        let hm = h.matrix(&q)?;
        let g = boundary.matrix(&q[..n])?;
        let t2 = q[t_ix] * q[t_ix];
        let mut worst: f64 = hm[(t_ix, t_ix)].abs();
        for i in 0..n {
            worst = worst.max(hm[(t_ix, i)].abs());
            for j in 0..n {
                worst = worst.max((hm[(i, j)] - t2 * g[(i, j)]).abs());
            }
        }
        Ok(worst)
    })
    .note("evaluated at ρ = 0 with (x, t) from the plan");
    let ricci =
        evaluate_plan("ambient-ricci", plan, &h.domain, tol.value, tol.tier, |p| Ok(curvature_jets(h, p, 2)?.ricci.values().max_abs()));
    AmbientChecks { homogeneity, boundary: boundary_report, ricci }
}

/// Outcome of comparing the normal-form expressions with generic curvature.
#[derive(Debug, Clone)]
pub struct NormalFormComparison {
    pub report: CheckReport,
    /// Largest block entry from the closed-form expressions.
    pub normal_form_max: f64,
    /// Largest block entry from the generic curvature.
    pub generic_max: f64,
}

/// `ricci_normal_form` against the Ricci blocks of `patch`, the ambient-form
/// metric built from `family`, at samples `(x, t, ρ)` of `plan`.
pub fn check_normal_form(family: &MetricFamily, patch: &MetricPatch, plan: &SamplePlan, tol: Tolerance) -> NormalFormComparison {
    let n = family.n;
    let outcomes = crate::kernel::sampling::par_map_indexed(plan.count, |i| -> Result<(f64, f64, f64)> {
        let p = plan.point(i, &patch.domain)?;
        let closed = ricci_normal_form(family, &p[..n], p[n + 1])?.ricci_blocks();
        let generic = ambient_ricci_blocks(patch, n, &p[..n], p[n], p[n + 1])?;
        Ok((closed.max_difference(&generic), closed.max_abs(), generic.max_abs()))
    });
    let (mut nf, mut gen) = (0.0f64, 0.0f64);
    let mut residuals = Vec::with_capacity(plan.count);
    let mut notes = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((d, a, b)) => {
                residuals.push(d);
                nf = nf.max(a);
                gen = gen.max(b);
            }
            Err(e) => {
                residuals.push(f64::INFINITY);
                notes.push(format!("sample {i}: {e}"));
            }
        }
    }
    let mut report = CheckReport::from_residuals("normal-form", &residuals, tol.value, tol.tier)
        .note(format!("largest Ricci block entry: closed form {nf:e}, generic {gen:e}"));
    report.notes.extend(notes);
    NormalFormComparison { report, normal_form_max: nf, generic_max: gen }
}

/// The cone product pulled back through `(x₁,x₂,t,ρ) ↦ (x₁,s₁,x₂,s₂)`.
pub fn cone_product_in_ambient_chart(cp: &ConeProductSpec, amb: &ProductAmbientSpec) -> Result<MetricPatch> {
    let two_mu = amb.mu * 2;
    if amb.mu.is_zero() || cp.cone1.lambda != two_mu || cp.cone2.lambda != -two_mu {
        return Err(GeometryError::LambdaMismatch(format!(
            "cones with λ = ({}, {}) need λ = (2μ, −2μ) = ({}, {})",
            cp.cone1.lambda, cp.cone2.lambda, two_mu, -two_mu
        )));
    }
    let (m1, m2) = (cp.cone1.base.m, cp.cone2.base.m);
    if (m1, m2) != (amb.m1, amb.m2) {
        return Err(GeometryError::BadDimension(format!("cone factors ({m1}, {m2}) vs ambient factors ({}, {})", amb.m1, amb.m2)));
    }
    let n = m1 + m2;
    let lambda = crate::catalog::to_f64(two_mu);
    let map = Arc::new(move |x: &[Jet]| {
        let (s1, s2) = s_from_t_rho(&x[n], &x[n + 1], lambda);
        let mut out = Vec::with_capacity(n + 2);
        out.extend_from_slice(&x[..m1]);
        out.push(s1);
        out.extend_from_slice(&x[m1..n]);
        out.push(s2);
        out
    });
    let h = &amb.ambient_patch;
    Ok(cp.product_patch.pullback(map, n + 2, h.domain.clone(), h.sample_box.clone(), format!("{}[t,ρ]", cp.product_patch.label)))
}

/// Componentwise agreement of the cone product with the ambient metric.
pub fn check_coordinate_equivalence(
    cp: &ConeProductSpec,
    amb: &ProductAmbientSpec,
    plan: &SamplePlan,
    tol: Tolerance,
) -> Result<CheckReport> {
    let pulled = cone_product_in_ambient_chart(cp, amb)?;
    let h = &amb.ambient_patch;
    let report = evaluate_plan("equivalence", plan, &h.domain, tol.value, tol.tier, |p| Ok((pulled.matrix(p)? - h.matrix(p)?).amax()));
    // the boundary locus s₁ = s₂ lands on ρ = 0
    let lambda = crate::catalog::to_f64(cp.cone1.lambda);
    let diag = SamplePlan::new(plan.seed, plan.count, vec![(0.5, 2.0)]);
    let mut worst_rho: f64 = 0.0;
    for s in diag.points(&Domain::unbounded(1))? {
        worst_rho = worst_rho.max(cone_coords(ConeDirection::SToTRho, (s[0], s[0]), lambda)?.1.abs());
    }
    Ok(report.note(format!("max |ρ| on s₁ = s₂: {worst_rho:e}")))
}

/// `ℒ_V g − αg` and `d(g(V,·))`.
pub fn check_homothety_gradient(
    patch: &MetricPatch,
    v: &VectorField,
    alpha: f64,
    plan: &SamplePlan,
    tol: Tolerance,
) -> (CheckReport, CheckReport) {
    let homothety = evaluate_plan("homothety", plan, &patch.domain, tol.value, tol.tier, |p| {
        let l = lie_derivative_jets(patch, v, p, 1)?.values().matrix();
        Ok((l - patch.matrix(p)? * alpha).amax())
    })
    .note(format!("α = {alpha}"));
    let gradient = evaluate_plan("gradient", plan, &patch.domain, tol.value, tol.tier, |p| dual_form_curl(patch, v, p));
    (homothety, gradient)
}

/// The ambient metric of `(g₁, g₂)` against that of `(αg₁, αg₂)` under `(t,ρ) ↦ (t/√α, αρ)`.
pub fn check_dilation(
    amb: &ProductAmbientSpec,
    dilated: &ProductAmbientSpec,
    alpha: f64,
    plan: &SamplePlan,
    tol: Tolerance,
) -> Result<CheckReport> {
    let pulled = dilated_ambient_pullback(amb, dilated, alpha)?;
    let h = &amb.ambient_patch;
    Ok(evaluate_plan("dilation", plan, &h.domain, tol.value, tol.tier, |p| Ok((pulled.matrix(p)? - h.matrix(p)?).amax()))
        .note(format!("α = {alpha}, μ = {} ↦ {}", amb.mu, dilated.mu)))
}

/// Number of seeded directions `Y` for the second Killing equation.
pub const KILLING_DIRECTIONS: usize = 10;

/// Residuals (a) to (e) of a special Killing form; the report's residual at
/// a sample is the largest of the five.
pub fn check_special_killing(k: &KillingFormSpec, plan: &SamplePlan, tol: Tolerance) -> Result<CheckReport> {
    let patch = &k.poincare.interior_patch;
    let dim = patch.dim();
    let r_ix = k.r_index();
    let p = k.degree;
    let c = k.killing_constant;
    let c_gap = (c - (p as f64 + 1.0)).abs();
    let ys = SamplePlan::new(plan.seed.wrapping_add(1), KILLING_DIRECTIONS, vec![(-1.0, 1.0); dim]).points(&Domain::unbounded(dim))?;
    let parts = crate::kernel::sampling::par_map_indexed(plan.count, |i| -> Result<[f64; 5]> {
        let x = plan.point(i, &patch.domain)?;
        let g = patch.matrix(&x)?;
        let kr = killing_residuals(patch, &k.psi, c, &x, &ys)?;
        let insertion = tensor_residual(patch, &g, &gamma_insertion(k, &x)?);
        let margin = (1.0 - gamma_norm_squared(k, &x)?).max(0.0);
        let h1 = k.h1(x[r_ix]);
        let norm = (form_norm_squared(patch, &k.psi, &x)? - h1 * h1).abs();
        Ok([kr.first, kr.second, insertion, margin, norm])
    });
    let mut per_part = [0.0f64; 5];
    let mut residuals = Vec::with_capacity(plan.count);
    let mut notes = Vec::new();
    for (i, o) in parts.iter().enumerate() {
        match o {
            Ok(v) => {
                for (w, x) in per_part.iter_mut().zip(v) {
                    *w = w.max(*x);
                }
                residuals.push(v.iter().copied().fold(c_gap, f64::max));
            }
            Err(e) => {
                residuals.push(f64::INFINITY);
                notes.push(format!("sample {i}: {e}"));
            }
        }
    }
    let mut report = CheckReport::from_residuals("special-killing", &residuals, tol.value, tol.tier);
    let labels = ["(a) ∇ψ − dψ/(p+1)", "(b) ∇_Y dψ − c g(Y,·)∧ψ", "(c) ι_γ♯ψ", "(d) 1 − |γ|² margin", "(e) |ψ|² − h₁²"];
    for (l, v) in labels.iter().zip(per_part) {
        report.notes.push(format!("{l}: {v:e}"));
    }
    report.notes.push(format!("c = {c} against p + 1 = {}", p + 1));
    report.notes.extend(notes);
    Ok(report)
}

/// `∇ψ̃` on the adapted cone at seeded `(x, u)` and the recovery `ι_X ψ̃|_{u=1} − ψ`,
/// the latter read at the base point of each sample.
pub fn check_killing_lift(k: &KillingFormSpec, plan: &SamplePlan, tol: Tolerance) -> Result<CheckReport> {
    let base = &k.poincare.interior_patch;
    let lift = killing_cone_lift(&k.psi, base, k.killing_constant)?;
    let cone = lift.cone_patch.clone().with_norm(ResidualNorm::Operator);
    let d = base.dim();
    let cone_plan = SamplePlan::new(plan.seed, plan.count, cone.sample_box.clone());
    let parallel = evaluate_plan("killing-lift-parallel", &cone_plan, &cone.domain, tol.value, tol.tier, |y| {
        let g = cone.matrix(y)?;
        let nabla = covariant_derivative_form(&cone, &lift.form, y, 1)?.values();
        Ok(tensor_residual(&cone, &g, &nabla))
    });
    let recovery = evaluate_plan("killing-lift-recovery", &cone_plan, &cone.domain, tol.value, tol.tier, |y| {
        lift_recovery_residual(&lift, &k.psi, &y[..d])
    });
    Ok(CheckReport::combine("killing-lift", &[parallel, recovery]))
}

/// Largest Bach component; the patch must be four-dimensional.
pub fn check_bach_vanishing(boundary: &MetricPatch, plan: &SamplePlan, tol: Tolerance) -> Result<CheckReport> {
    if boundary.dim() != 4 {
        return Err(GeometryError::DimensionUnsupported { required: "4".into(), got: boundary.dim() });
    }
    Ok(evaluate_plan("bach", plan, &boundary.domain, tol.value, tol.tier, |p| Ok(bach_at(boundary, p)?.max_abs())))
}

/// Step sizes used by the negative controls.
pub const CONTROL_EPSILONS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Runs a perturbed check for each `ε` and fits the log-log slope of the
/// largest residual. A sound control fails at every `ε` with slope near 1.
pub fn negative_control(eps: &[f64], run: impl Fn(f64) -> Result<CheckReport>) -> Result<(Vec<CheckReport>, f64)> {
    let reports = eps.iter().map(|&e| run(e)).collect::<Result<Vec<_>>>()?;
    let residuals: Vec<f64> = reports.iter().map(|r| r.max_abs_residual).collect();
    Ok((reports, log_log_slope(eps, &residuals)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_entry;
    use crate::constructions::{ambient_metric, cone_product, metric_cone, poincare_metric, special_killing_form};
    use crate::kernel::patch::flat_patch;
    use num_rational::Rational64;

    fn s2h2() -> (crate::catalog::EinsteinSpec, crate::catalog::EinsteinSpec) {
        (parse_entry("sphere(2,1)").unwrap(), parse_entry("hyperbolic(2,1)").unwrap())
    }

    #[test]
    fn flat_space_is_einstein_with_zero_constant() {
        let p = flat_patch(3);
        let r = check_einstein(&p, 0.0, &SamplePlan::new(0, 5, p.sample_box.clone()), Tolerance::analytic(1e-12));
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn poincare_einstein_constant_is_checked() {
        let (s2, h2) = s2h2();
        let pm = poincare_metric(&s2, &h2, Rational64::new(1, 2)).unwrap();
        let plan = SamplePlan::new(3, 6, pm.interior_patch.sample_box.clone());
        let good = check_einstein(&pm.interior_patch, -4.0, &plan, Tolerance::analytic(1e-7));
        assert!(good.pass, "{good:?}");
        let bad = check_einstein(&pm.interior_patch, -3.0, &plan, Tolerance::analytic(1e-7));
        assert!(!bad.pass);
        // the operator norm of (Λ − Λ')g is exactly |Λ − Λ'|
        assert!((bad.max_abs_residual - 1.0).abs() < 1e-7);
    }

    #[test]
    fn ambient_checks_pass_and_perturbation_fails() {
        let (s2, h2) = s2h2();
        let amb = ambient_metric(&s2, &h2, Rational64::new(1, 2)).unwrap();
        let plan = SamplePlan::new(1, 4, amb.ambient_patch.sample_box.clone());
        let ok = check_ambient_conditions(&amb, &plan, Tolerance::analytic(1e-7));
        assert!(ok.pass(), "{ok:?}");
        let rho = amb.rho_index();
        let bent = perturbed_patch(&amb.ambient_patch, 1e-3, (rho, rho), |x| x[0].lift(1.0));
        let bad = check_ambient_patch(&bent, &amb.euler_field, &amb.boundary_metric(), &plan, Tolerance::analytic(1e-7));
        assert!(!bad.ricci.pass && !bad.homogeneity.pass);
        assert!(bad.boundary.pass, "dρ² is invisible on 𝒬 tangent directions");
    }

    #[test]
    fn normal_form_agrees_and_flags_a_wrong_mu() {
        let (s2, h2) = s2h2();
        let amb = ambient_metric(&s2, &h2, Rational64::new(1, 2)).unwrap();
        let plan = SamplePlan::new(6, 4, amb.ambient_patch.sample_box.clone());
        let ok = check_normal_form(&amb.family, &amb.ambient_patch, &plan, Tolerance::analytic(1e-6));
        assert!(ok.report.pass && ok.generic_max < 1e-8, "{ok:?}");
        let fam = crate::constructions::ambient::product_family(&s2, &h2, Rational64::new(1, 3));
        let patch = crate::constructions::normal_form::ambient_form_patch(&fam, "wrong μ");
        let plan = SamplePlan::new(6, 4, patch.sample_box.clone());
        let bad = check_normal_form(&fam, &patch, &plan, Tolerance::analytic(1e-6));
        assert!(bad.report.pass && bad.normal_form_max > 1e-2 && bad.generic_max > 1e-2, "{bad:?}");
    }

    #[test]
    fn equivalence_needs_matching_lambda() {
        let (s2, h2) = s2h2();
        let amb = ambient_metric(&s2, &h2, Rational64::new(1, 2)).unwrap();
        let cp = cone_product(&metric_cone(&s2).unwrap(), &metric_cone(&h2).unwrap()).unwrap();
        let plan = SamplePlan::new(2, 10, amb.ambient_patch.sample_box.clone());
        let r = check_coordinate_equivalence(&cp, &amb, &plan, Tolerance::analytic(1e-9)).unwrap();
        assert!(r.pass, "{r:?}");
        let s2b = scale_sphere(&s2);
        let amb2 =
            ambient_metric(&s2b, &crate::catalog::scale_metric(&h2, Rational64::from_integer(2)).unwrap(), Rational64::new(1, 4)).unwrap();
        assert!(matches!(
            check_coordinate_equivalence(&cp, &amb2, &plan, Tolerance::analytic(1e-9)),
            Err(GeometryError::LambdaMismatch(_))
        ));
    }

    fn scale_sphere(s2: &crate::catalog::EinsteinSpec) -> crate::catalog::EinsteinSpec {
        crate::catalog::scale_metric(s2, Rational64::from_integer(2)).unwrap()
    }

    #[test]
    fn single_euler_field_is_not_a_homothety() {
        let (s2, h2) = s2h2();
        let cp = cone_product(&metric_cone(&s2).unwrap(), &metric_cone(&h2).unwrap()).unwrap();
        let plan = SamplePlan::new(4, 5, cp.product_patch.sample_box.clone());
        let (h, g) = check_homothety_gradient(&cp.product_patch, &cp.euler_field, 2.0, &plan, Tolerance::analytic(1e-9));
        assert!(h.pass && g.pass);
        let (h1, g1) = check_homothety_gradient(&cp.product_patch, &cp.first_euler_field(), 2.0, &plan, Tolerance::analytic(1e-9));
        assert!(!h1.pass && g1.pass);
    }

    #[test]
    fn killing_suite_passes_and_bent_form_fails() {
        let (s2, h2) = s2h2();
        let k = special_killing_form(&poincare_metric(&s2, &h2, Rational64::new(1, 2)).unwrap()).unwrap();
        let plan = SamplePlan::new(5, 4, k.poincare.interior_patch.sample_box.clone());
        let r = check_special_killing(&k, &plan, Tolerance::analytic(1e-7)).unwrap();
        assert!(r.pass, "{r:?}");
        let lift = check_killing_lift(&k, &plan, Tolerance::analytic(1e-6)).unwrap();
        assert!(lift.pass, "{lift:?}");
        let mut bent = k.clone();
        let n = k.r_index();
        bent.psi = k.psi.multiply(Arc::new(move |x: &[Jet]| &(&x[n] * 1e-3) + 1.0));
        assert!(!check_special_killing(&bent, &plan, Tolerance::analytic(1e-7)).unwrap().pass);
    }

    #[test]
    fn bach_rejects_other_dimensions() {
        let p = flat_patch(3);
        let e = check_bach_vanishing(&p, &SamplePlan::new(0, 1, p.sample_box.clone()), Tolerance::tier(ToleranceTier::Bach));
        assert!(matches!(e, Err(GeometryError::DimensionUnsupported { .. })));
        let p4 = flat_patch(4);
        let r =
            check_bach_vanishing(&p4, &SamplePlan::new(0, 3, p4.sample_box.clone()), Tolerance::new(1e-10, ToleranceTier::Bach)).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn einstein_control_is_linear_in_epsilon() {
        let (s2, h2) = s2h2();
        let pm = poincare_metric(&s2, &h2, Rational64::new(1, 2)).unwrap();
        let plan = SamplePlan::new(8, 3, pm.interior_patch.sample_box.clone());
        let (reports, slope) = negative_control(&CONTROL_EPSILONS, |e| {
            Ok(check_einstein(&pm.interior_patch, -4.0 + e * 100.0, &plan, Tolerance::analytic(1e-7)))
        })
        .unwrap();
        assert!(reports.iter().all(|r| !r.pass));
        assert!((slope - 1.0).abs() < 0.2, "slope {slope}");
    }
}
