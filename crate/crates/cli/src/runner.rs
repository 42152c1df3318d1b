//! Builds the requested constructions and runs the requested checks.

use std::f64::consts::PI;

use einforge_core::catalog::{excluded_radius, parse_rational, point_spec, product_metric, scale_metric, solve_mu, to_f64, EinsteinSpec};
use einforge_core::constructions::{
    ambient_metric, cone_product, metric_cone, metric_cone_with_lambda, multi_subproduct, poincare_metric, special_killing_form,
    ConeProductSpec, ConeSpec, KillingFormSpec, MultiSubProductSpec, PoincareSpec, ProductAmbientSpec,
};
use einforge_core::kernel::jet::Jet;
use einforge_core::kernel::lie::VectorField;
use einforge_core::kernel::patch::MetricPatch;
use einforge_core::kernel::sampling::SamplePlan;
use einforge_core::kernel::transport::{coordinate_frame, frame_distance, parallel_transport, IntegratorOptions, PathSpec};
use einforge_core::verify::{
    check_ambient_conditions, check_bach_vanishing, check_coordinate_equivalence, check_dilation, check_drag_lemma, check_einstein,
    check_homothety_gradient, check_killing_lift, check_normal_form, check_special_killing, check_transverse_holonomy,
    euler_field_and_flow, holonomy_algebra_estimate, CheckReport, Tolerance, ToleranceTier, TransportProbe,
};
use einforge_core::GeometryError;
use num_rational::Rational64;
use thiserror::Error;

use crate::config::{parse_arith_factors, parse_radius, CheckKind, ScenarioConfig, Stage};

/// Step of the finite-difference jets used at the `fd` tier.
pub const FD_STEP: f64 = 1e-4;

/// Tolerance of the cone-lift parallelism inside the combined Killing report.
pub const LIFT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("scenario '{scenario}', stage '{stage}': {source}")]
    Stage { scenario: String, stage: String, source: Box<GeometryError> },
    #[error("scenario '{scenario}', check '{check}': {source}")]
    Check { scenario: String, check: String, source: Box<GeometryError> },
}

/// Which jets the Einstein-type checks use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TierChoice {
    #[default]
    Analytic,
    FiniteDifference,
}

/// Command-line overrides of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tier: TierChoice,
}

/// Cones as built for a scenario.
enum Cones {
    Single(Box<ConeSpec>),
    Pair(Box<ConeProductSpec>),
}

#[derive(Default)]
struct Built {
    g1: Option<EinsteinSpec>,
    g2: Option<EinsteinSpec>,
    mu: Option<Rational64>,
    cones: Option<Cones>,
    ambient: Option<ProductAmbientSpec>,
    poincare: Option<PoincareSpec>,
    killing: Option<KillingFormSpec>,
    recursion: Option<MultiSubProductSpec>,
}

/// A metric with a homothetic Euler field `Σ x^i ∂_i` over `euler`, and the
/// coordinate whose level set `{= 1}` is transverse to it.
struct FlowTarget {
    patch: MetricPatch,
    euler: Vec<usize>,
    level_index: usize,
}

fn build(config: &ScenarioConfig) -> Result<Built, RunError> {
    let stage_err = |stage: &str| {
        let scenario = config.name.clone();
        let stage = stage.to_string();
        move |source| RunError::Stage { scenario: scenario.clone(), stage: stage.clone(), source: Box::new(source) }
    };
    let mut b = Built {
        g1: config.g1.as_deref().map(ScenarioConfig::factor),
        g2: config.g2.as_deref().map(ScenarioConfig::factor),
        ..Built::default()
    };
    let needs_mu = config.has(Stage::Ambient) || config.has(Stage::Poincare) || (config.has(Stage::Cone) && b.g2.is_some());
    if needs_mu {
        let g1 = b.g1.clone().expect("validated: g1 present");
        let g2 = b.g2.clone().unwrap_or_else(point_spec);
        let mu = match config.mu {
            Some(mu) => mu,
            None => solve_mu(g1.m, g1.sc, g2.m, g2.sc).map_err(stage_err("mu"))?.value_or(Rational64::from_integer(0)),
        };
        b.mu = Some(mu);
    }
    if config.has(Stage::Cone) {
        let g1 = b.g1.as_ref().expect("validated: g1 present");
        b.cones = Some(match &b.g2 {
            None => Cones::Single(Box::new(metric_cone(g1).map_err(stage_err("cone"))?)),
            Some(g2) => {
                let lambda = b.mu.expect("mu solved") * 2;
                let c1 = metric_cone_with_lambda(g1, lambda).map_err(stage_err("cone"))?;
                let c2 = metric_cone_with_lambda(g2, -lambda).map_err(stage_err("cone"))?;
                Cones::Pair(Box::new(cone_product(&c1, &c2).map_err(stage_err("cone"))?))
            }
        });
    }
    if config.has(Stage::Ambient) {
        let g2 = b.g2.clone().unwrap_or_else(point_spec);
        b.ambient = Some(ambient_metric(b.g1.as_ref().expect("validated"), &g2, b.mu.expect("mu solved")).map_err(stage_err("ambient"))?);
    }
    if config.has(Stage::Poincare) {
        let g2 = b.g2.clone().unwrap_or_else(point_spec);
        b.poincare =
            Some(poincare_metric(b.g1.as_ref().expect("validated"), &g2, b.mu.expect("mu solved")).map_err(stage_err("poincare"))?);
    }
    if config.has(Stage::Killing) {
        b.killing = Some(special_killing_form(b.poincare.as_ref().expect("validated: poincare built")).map_err(stage_err("killing"))?);
    }
    if config.has(Stage::Recursion) {
        let positives: Vec<EinsteinSpec> = config.positives.iter().map(|p| ScenarioConfig::factor(p)).collect();
        b.recursion = Some(multi_subproduct(b.g1.as_ref().expect("validated"), &positives).map_err(stage_err("recursion"))?);
    }
    Ok(b)
}

impl Built {
    /// The ambient metric when built, otherwise the cone.
    fn flow_target(&self) -> Option<FlowTarget> {
        if let Some(a) = &self.ambient {
            return Some(FlowTarget { patch: a.ambient_patch.clone(), euler: vec![a.t_index()], level_index: a.t_index() });
        }
        self.cone_target()
    }

    fn cone_target(&self) -> Option<FlowTarget> {
        match self.cones.as_ref()? {
            Cones::Single(c) => Some(FlowTarget { patch: c.cone_patch.clone(), euler: vec![c.s_index()], level_index: c.s_index() }),
            Cones::Pair(p) => {
                let (i, j) = p.s_indices();
                Some(FlowTarget { patch: p.product_patch.clone(), euler: vec![i, j], level_index: i })
            }
        }
    }
}

impl FlowTarget {
    fn field(&self) -> VectorField {
        euler_field_and_flow(self.patch.dim(), self.euler.clone()).0
    }

    /// A loop based on `{x^level = 1}`: an ellipse in the first two other
    /// coordinates, a tilt in the third, and a double excursion off the level set.
    fn loop_path(&self, radius: f64) -> PathSpec {
        let m = self.patch.dim();
        let level = self.level_index;
        let others: Vec<usize> = (0..m).filter(|&i| i != level).take(3).collect();
        let centre: Vec<f64> = self.patch.sample_box.iter().map(|(a, b)| (a + b) / 2.0).collect();
        let half: Vec<f64> = self.patch.sample_box.iter().map(|(a, b)| (b - a) / 2.0).collect();
        PathSpec::from_jet_fn(true, move |t| {
            let a = t * (2.0 * PI);
            let mut x: Vec<Jet> = centre.iter().map(|&c| t.lift(c)).collect();
            x[level] = &(&(&a * 2.0).sin() * 0.4) + 1.0;
            if let Some(&i) = others.first() {
                x[i] = &(&(&a.cos() - 1.0) * (radius * half[i])) + centre[i];
            }
            if let Some(&i) = others.get(1) {
                x[i] = &(&a.sin() * (radius * half[i])) + centre[i];
            }
            if let Some(&i) = others.get(2) {
                x[i] = &(&a.sin() * (0.5 * radius * half[i])) + centre[i];
            }
            x
        })
    }

    fn probe(&self, radius: f64) -> TransportProbe {
        let (field, flow) = euler_field_and_flow(self.patch.dim(), self.euler.clone());
        TransportProbe::new(field, 2.0, flow, (self.level_index, 1.0), self.loop_path(radius))
    }
}

/// Runs every check of `config`. Reports come back in check order.
pub fn run_scenario(config: &ScenarioConfig, options: &RunOptions) -> Result<Vec<CheckReport>, RunError> {
    let seed = options.seed.unwrap_or(config.seed);
    let samples = options.samples.unwrap_or(config.samples);
    let built = build(config)?;
    let mut reports = Vec::new();
    for &check in &config.checks {
        let check_err = |source| RunError::Check { scenario: config.name.clone(), check: check.name().into(), source: Box::new(source) };
        let analytic = |default: f64| Tolerance::analytic(config.tolerance(check, default));
        let einstein_tol = || match options.tier {
            TierChoice::Analytic => analytic(ToleranceTier::Analytic.default_tolerance()),
            TierChoice::FiniteDifference => Tolerance::tier(ToleranceTier::FiniteDifference),
        };
        let jets = |p: &MetricPatch| match options.tier {
            TierChoice::Analytic => p.clone(),
            TierChoice::FiniteDifference => p.finite_difference(FD_STEP),
        };
        let plan_on = |p: &MetricPatch| SamplePlan::new(seed, samples, p.sample_box.clone());
        let radius = config.param("loop_radius").and_then(|r| r.parse().ok()).unwrap_or(0.5);
        match check {
            CheckKind::Einstein => {
                if let Some(r) = &built.recursion {
                    for (s, stage) in r.stages.iter().enumerate() {
                        let p = &stage.interior_patch;
                        let mut rep = check_einstein(&jets(p), r.einstein_constant(s + 1), &plan_on(p), einstein_tol());
                        rep.check_name = format!("einstein-stage{}", s + 1);
                        reports.push(rep.note(format!("dimension {}", r.stage_dimension(s + 1))));
                    }
                } else if let Some(p) = &built.poincare {
                    let patch = &p.interior_patch;
                    reports.push(check_einstein(&jets(patch), p.einstein_constant(), &plan_on(patch), einstein_tol()));
                } else {
                    let g1 = built.g1.as_ref().expect("validated: g1 present");
                    let lambda = to_f64(g1.einstein_constant());
                    reports.push(check_einstein(&jets(&g1.patch), lambda, &plan_on(&g1.patch), einstein_tol()));
                }
            }
            CheckKind::RicciFlat => {
                let t = built.cone_target().expect("validated: cone built");
                let mut rep = check_einstein(&jets(&t.patch), 0.0, &plan_on(&t.patch), einstein_tol());
                rep.check_name = "ricci-flat".into();
                reports.push(rep);
            }
            CheckKind::Ambient => {
                let a = built.ambient.as_ref().expect("validated: ambient built");
                reports.extend(check_ambient_conditions(a, &plan_on(&a.ambient_patch), analytic(1e-7)).into_vec());
            }
            CheckKind::NormalForm => {
                let a = built.ambient.as_ref().expect("validated: ambient built");
                reports.push(check_normal_form(&a.family, &a.ambient_patch, &plan_on(&a.ambient_patch), analytic(1e-6)).report);
            }
            CheckKind::Equivalence => {
                let a = built.ambient.as_ref().expect("validated: ambient built");
                let Some(Cones::Pair(cp)) = &built.cones else {
                    return Err(check_err(GeometryError::LambdaMismatch("equivalence needs the cone pair over g1 and g2".into())));
                };
                reports.push(check_coordinate_equivalence(cp, a, &plan_on(&a.ambient_patch), analytic(1e-9)).map_err(check_err)?);
            }
            CheckKind::Dilation => {
                let a = built.ambient.as_ref().expect("validated: ambient built");
                let alpha = config.param("dilation_alpha").map_or(Rational64::new(9, 4), |v| parse_rational(v).expect("validated"));
                let g1 = scale_metric(&a.g1, alpha).map_err(check_err)?;
                let g2 = scale_metric(&a.g2, alpha).map_err(check_err)?;
                let dilated = ambient_metric(&g1, &g2, a.mu / alpha).map_err(check_err)?;
                reports.push(check_dilation(a, &dilated, to_f64(alpha), &plan_on(&a.ambient_patch), analytic(1e-9)).map_err(check_err)?);
            }
            CheckKind::Homothety => {
                let t = built.flow_target().expect("validated: cone or ambient built");
                let (h, g) = check_homothety_gradient(&t.patch, &t.field(), 2.0, &plan_on(&t.patch), analytic(1e-9));
                reports.push(h);
                reports.push(g);
            }
            CheckKind::Killing => {
                let k = built.killing.as_ref().expect("validated: killing built");
                let plan = plan_on(&k.poincare.interior_patch);
                let special = check_special_killing(k, &plan, analytic(1e-7)).map_err(check_err)?;
                let lift = check_killing_lift(k, &plan, Tolerance::analytic(LIFT_TOLERANCE)).map_err(check_err)?;
                reports.push(CheckReport::combine("killing", &[special, lift]));
            }
            CheckKind::Bach => {
                let g1 = built.g1.as_ref().expect("validated: g1 present");
                let boundary = match &built.g2 {
                    Some(g2) => product_metric(g1, g2),
                    None => g1.patch.clone(),
                };
                let tol = Tolerance::new(config.tolerance(check, ToleranceTier::Bach.default_tolerance()), ToleranceTier::Bach);
                reports.push(check_bach_vanishing(&boundary, &plan_on(&boundary), tol).map_err(check_err)?);
            }
            CheckKind::Drag => {
                let t = built.flow_target().expect("validated: cone or ambient built");
                let plan = SamplePlan::new(seed, samples, vec![(-1.0, 1.0); t.patch.dim()]);
                reports.push(check_drag_lemma(&t.patch, &t.probe(radius), &plan, analytic(1e-6)).map_err(check_err)?);
            }
            CheckKind::Holonomy => {
                let t = built.flow_target().expect("validated: cone or ambient built");
                let plan = SamplePlan::new(seed, samples, Vec::new());
                reports.push(check_transverse_holonomy(&t.patch, &t.probe(radius), &plan, analytic(1e-5)).map_err(check_err)?);
            }
            CheckKind::LoopIdentity => {
                let t = built.cone_target().expect("validated: cone built");
                let m = t.patch.dim();
                let opts = IntegratorOptions { tolerance: 1e-12, ..IntegratorOptions::default() };
                let run = parallel_transport(&t.patch, &t.loop_path(radius), &coordinate_frame(m), &opts).map_err(check_err)?;
                let d = frame_distance(&run.frame, &coordinate_frame(m));
                reports.push(CheckReport::from_residuals("loop-identity", &[d], config.tolerance(check, 1e-7), ToleranceTier::Analytic));
            }
            CheckKind::HolonomyRank => {
                let t = built.cone_target().expect("validated: cone built");
                let base = t.patch.point(t.loop_path(radius).start());
                let rank = holonomy_algebra_estimate(&t.patch, &base, &plan_on(&t.patch)).map_err(check_err)?;
                let expected: usize = config.param("expect_rank").map_or(0, |v| v.parse().expect("validated"));
                let rep = CheckReport::from_residuals("holonomy-rank", &[rank.abs_diff(expected) as f64], 0.0, ToleranceTier::Analytic);
                reports.push(rep.note(format!("rank {rank}, expected {expected}")));
            }
            CheckKind::Arithmetic => reports.extend(arithmetic(config, &built).map_err(check_err)?),
        }
    }
    Ok(reports.into_iter().map(|r| r.with_scenario(config.name.clone()).note(format!("seed {seed}"))).collect())
}

/// `μ` from the scalar-curvature constraints and the excluded radius `√(2/|μ|)`.
fn arithmetic(config: &ScenarioConfig, built: &Built) -> Result<Vec<CheckReport>, GeometryError> {
    let (m1, sc1, m2, sc2) = match config.param("arith_factors") {
        Some(v) => parse_arith_factors(v).expect("validated"),
        None => {
            let (g1, g2) = (built.g1.as_ref().expect("validated"), built.g2.as_ref().expect("validated"));
            (g1.m, g1.sc, g2.m, g2.sc)
        }
    };
    let solved = solve_mu(m1, sc1, m2, sc2)?;
    let mu = solved.mu.ok_or_else(|| GeometryError::IncompatibleScalars("μ is unconstrained by these factors".into()))?;
    let mut out = Vec::new();
    let mu_residual = match config.param("expect_mu") {
        Some(v) => {
            let expected = parse_rational(v).expect("validated");
            if expected == mu {
                0.0
            } else {
                to_f64(expected - mu).abs().max(f64::MIN_POSITIVE)
            }
        }
        None => 0.0,
    };
    let half = mu / 2;
    out.push(
        CheckReport::from_residuals("mu-exact", &[mu_residual], 0.0, ToleranceTier::Analytic).note(format!("μ = {mu}")).note(format!(
            "warp factors (1 ∓ r²/{})², (1 ± r²/{})²",
            half.recip(),
            half.recip()
        )),
    );
    let r0 = excluded_radius(mu).expect("μ ≠ 0 here");
    let expected = config.param("expect_radius").map(|v| parse_radius(v).expect("validated"));
    let residual = expected.map_or(0.0, |e| (r0 - e).abs());
    out.push(CheckReport::from_residuals("excluded-radius", &[residual], 1e-12, ToleranceTier::Analytic).note(format!("r₀ = {r0}")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin;
    use crate::config::parse_scenario;

    fn run(name: &str) -> Vec<CheckReport> {
        let c = parse_scenario(builtin(name).unwrap()).unwrap();
        run_scenario(&c, &RunOptions { samples: Some(3), ..RunOptions::default() }).unwrap()
    }

    #[test]
    fn so4_arithmetic_reproduces_mu_and_radius() {
        let r = run("so4-arithmetic");
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.pass), "{r:?}");
        assert!(r[0].notes.iter().any(|n| n == "μ = 1/40"));
        assert!(r[0].notes.iter().any(|n| n.contains("r²/80")));
    }

    #[test]
    fn wrong_expectations_fail() {
        let text = builtin("so4-arithmetic").unwrap().replace("1/40", "1/41");
        let r = run_scenario(&parse_scenario(&text).unwrap(), &RunOptions::default()).unwrap();
        assert!(!r[0].pass);
    }

    #[test]
    fn construction_errors_name_the_stage() {
        let text = "[scenario]\nname = bad\n[factors]\ng1 = sphere(2,1)\ng2 = hyperbolic(2,1)\nmu = 1/3\n[build]\nstages = ambient\n[checks]\nrun = ambient\n";
        match run_scenario(&parse_scenario(text).unwrap(), &RunOptions::default()) {
            Err(RunError::Stage { stage, .. }) => assert_eq!(stage, "ambient"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cone_flatness_passes() {
        let r = run("cone-flatness");
        assert_eq!(
            r.iter().map(|x| x.check_name.as_str()).collect::<Vec<_>>(),
            ["ricci-flat", "homothety", "gradient", "loop-identity", "holonomy-rank"]
        );
        assert!(r.iter().all(|x| x.pass), "{r:#?}");
    }
}
