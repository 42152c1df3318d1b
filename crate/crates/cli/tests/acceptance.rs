//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use einforge_cli::builtins::{builtin, builtin_names};
use einforge_cli::config::parse_scenario;
use einforge_cli::runner::{run_scenario, RunOptions};
use einforge_core::catalog::{excluded_radius, parse_entry, point_spec, product_metric, solve_mu, EinsteinSpec};
use einforge_core::constructions::ambient::product_family;
use einforge_core::constructions::killing::{killing_cone_lift, lift_recovery_residual};
use einforge_core::constructions::normal_form::ambient_form_patch;
use einforge_core::constructions::{
    ambient_metric, cone_coords, cone_product, metric_cone, metric_cone_with_lambda, multi_subproduct, poincare_metric,
    special_killing_form, ConeDirection,
};
use einforge_core::kernel::jet::Jet;
use einforge_core::kernel::patch::flat_patch;
use einforge_core::kernel::transport::{coordinate_frame, frame_distance, parallel_transport, IntegratorOptions, PathSpec};
use einforge_core::verify::{
    check_ambient_conditions, check_bach_vanishing, check_coordinate_equivalence, check_dilation, check_einstein, check_homothety_gradient,
    check_killing_lift, check_normal_form, check_special_killing, negative_control, perturbed_patch, CheckReport, Tolerance, ToleranceTier,
    CONTROL_EPSILONS,
};
use einforge_core::SamplePlan;
use num_rational::Rational64;

type Outcome = Result<String, String>;

fn entry(name: &str) -> EinsteinSpec {
    parse_entry(name).unwrap()
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_of(reports: &[&CheckReport]) -> f64 {
    reports.iter().map(|r| r.max_abs_residual).fold(0.0, f64::max)
}

/// The three ambient scenarios of criteria 1 and 2.
fn ambient_scenarios() -> Vec<(&'static str, EinsteinSpec, EinsteinSpec, Rational64)> {
    vec![
        ("S2 x H2", entry("sphere(2,1)"), entry("hyperbolic(2,1)"), Rational64::new(1, 2)),
        ("S3 x point", entry("sphere(3,1)"), point_spec(), Rational64::new(1, 2)),
        ("flat3 x flat2", entry("flat(3)"), entry("flat(2)"), Rational64::from_integer(0)),
    ]
}

fn ambient_ricci_flatness() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (label, g1, g2, mu) in ambient_scenarios() {
        let amb = ambient_metric(&g1, &g2, mu).map_err(|e| format!("{label}: {e}"))?;
        let checks =
            check_ambient_conditions(&amb, &SamplePlan::new(0, 20, amb.ambient_patch.sample_box.clone()), Tolerance::analytic(1e-7));
        if !checks.pass() {
            return Err(format!("{label}: {checks:?}"));
        }
        worst = worst.max(checks.ricci.max_abs_residual);
        lines.push(format!("{label} {:.1e}", checks.ricci.max_abs_residual));
    }
    let elapsed = start.elapsed();
    require(
        worst < 1e-7 && elapsed < Duration::from_secs(10),
        format!("max |Ric(h)| {worst:.1e} < 1e-7 ({}), {:.2}s < 10s", lines.join(", "), elapsed.as_secs_f64()),
    )
}

fn dual_path_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for (label, g1, g2, mu) in ambient_scenarios() {
        let amb = ambient_metric(&g1, &g2, mu).map_err(|e| format!("{label}: {e}"))?;
        let c = check_normal_form(
            &amb.family,
            &amb.ambient_patch,
            &SamplePlan::new(1, 20, amb.ambient_patch.sample_box.clone()),
            Tolerance::analytic(1e-6),
        );
        if !c.report.pass {
            return Err(format!("{label}: {:?}", c.report));
        }
        worst = worst.max(c.report.max_abs_residual);
    }
    let family = product_family(&entry("sphere(2,1)"), &entry("hyperbolic(2,1)"), Rational64::new(1, 3));
    let patch = ambient_form_patch(&family, "mismatched mu");
    let c = check_normal_form(&family, &patch, &SamplePlan::new(1, 20, patch.sample_box.clone()), Tolerance::analytic(1e-6));
    let flagged = c.normal_form_max > 1e-3 && c.generic_max > 1e-3;
    require(
        flagged && c.report.pass,
        format!(
            "closed form vs generic {worst:.1e} < 1e-6; mu = 1/3 control: closed form {:.2e}, generic {:.2e}, agreement {:.1e}",
            c.normal_form_max, c.generic_max, c.report.max_abs_residual
        ),
    )
}

fn poincare_einstein() -> Outcome {
    let start = Instant::now();
    let (s2, h2) = (entry("sphere(2,1)"), entry("hyperbolic(2,1)"));
    let p = poincare_metric(&s2, &h2, Rational64::new(1, 2)).map_err(|e| e.to_string())?;
    let tol = Tolerance::analytic(1e-7);
    let main = check_einstein(&p.interior_patch, p.einstein_constant(), &SamplePlan::new(2, 20, p.interior_patch.sample_box.clone()), tol);
    let r = multi_subproduct(&h2, &[s2.clone(), s2]).map_err(|e| e.to_string())?;
    let mut stages = Vec::new();
    for (i, stage) in r.stages.iter().enumerate() {
        let patch = &stage.interior_patch;
        stages.push(check_einstein(patch, r.einstein_constant(i + 1), &SamplePlan::new(2, 20, patch.sample_box.clone()), tol));
    }
    let elapsed = start.elapsed();
    let all: Vec<&CheckReport> = std::iter::once(&main).chain(&stages).collect();
    let dims: Vec<String> = (1..=stages.len()).map(|s| r.stage_dimension(s).to_string()).collect();
    require(
        all.iter().all(|r| r.pass) && stages.len() == 2 && elapsed < Duration::from_secs(30),
        format!(
            "S2xH2 (dim 5, Lambda {}) {:.1e}; stages 1, 2 (dims {}) {:.1e}, {:.1e}; {:.2}s < 30s",
            p.einstein_constant(),
            main.max_abs_residual,
            dims.join(", "),
            stages[0].max_abs_residual,
            stages[1].max_abs_residual,
            elapsed.as_secs_f64()
        ),
    )
}

fn cone_product_equivalence() -> Outcome {
    let (g1, g2) = (entry("sphere(2,1)"), entry("hyperbolic(2,1)"));
    let mu = Rational64::new(1, 2);
    let amb = ambient_metric(&g1, &g2, mu).map_err(|e| e.to_string())?;
    let cp = cone_product(&metric_cone_with_lambda(&g1, mu * 2).unwrap(), &metric_cone_with_lambda(&g2, -mu * 2).unwrap())
        .map_err(|e| e.to_string())?;
    let rep =
        check_coordinate_equivalence(&cp, &amb, &SamplePlan::new(3, 50, amb.ambient_patch.sample_box.clone()), Tolerance::analytic(1e-9))
            .map_err(|e| e.to_string())?;
    let plan = SamplePlan::new(3, 50, vec![(0.05, 5.0), (0.05, 5.0), (0.1, 4.0)]);
    let mut roundtrip: f64 = 0.0;
    for p in plan.points(&einforge_core::Domain::unbounded(3)).map_err(|e| e.to_string())? {
        let (t, rho) = cone_coords(ConeDirection::SToTRho, (p[0], p[1]), p[2]).map_err(|e| e.to_string())?;
        let (a, b) = cone_coords(ConeDirection::TRhoToS, (t, rho), p[2]).map_err(|e| e.to_string())?;
        roundtrip = roundtrip.max((a - p[0]).abs()).max((b - p[1]).abs());
    }
    require(
        rep.pass && rep.samples_evaluated == 50 && roundtrip < 1e-12,
        format!("|pulled-back cone product - h| {:.1e} < 1e-9 at 50 points; roundtrip {roundtrip:.1e} < 1e-12", rep.max_abs_residual),
    )
}

fn so4_arithmetic() -> Outcome {
    let mu = solve_mu(6, Rational64::new(3, 2), 6, Rational64::new(-3, 2)).map_err(|e| e.to_string())?.mu;
    let r0 = mu.and_then(excluded_radius).unwrap_or(f64::NAN);
    let expected = 4.0 * 5f64.sqrt();
    let warp = mu.map(|m| (m / 2).recip());
    let via_cli =
        run_scenario(&parse_scenario(builtin("so4-arithmetic").unwrap()).unwrap(), &RunOptions::default()).map_err(|e| e.to_string())?;
    require(
        mu == Some(Rational64::new(1, 40))
            && (r0 - expected).abs() < 1e-12
            && warp == Some(Rational64::from_integer(80))
            && via_cli.iter().all(|r| r.pass),
        format!(
            "mu = {} exactly, r0 = {r0} (|r0 - 4 sqrt 5| = {:.1e}), warp r^2/{}",
            mu.map_or("none".into(), |m| m.to_string()),
            (r0 - expected).abs(),
            warp.map_or("?".into(), |w| w.to_string())
        ),
    )
}

fn special_killing_suite() -> Outcome {
    let p = poincare_metric(&entry("sphere(2,1)"), &entry("hyperbolic(2,1)"), Rational64::new(1, 2)).map_err(|e| e.to_string())?;
    let k = special_killing_form(&p).map_err(|e| e.to_string())?;
    let plan = SamplePlan::new(4, 20, k.poincare.interior_patch.sample_box.clone());
    let special = check_special_killing(&k, &plan, Tolerance::analytic(1e-7)).map_err(|e| e.to_string())?;
    let lift = check_killing_lift(&k, &plan, Tolerance::analytic(1e-6)).map_err(|e| e.to_string())?;
    let raw = killing_cone_lift(&k.psi, &k.poincare.interior_patch, k.killing_constant).map_err(|e| e.to_string())?;
    let mut recovery: f64 = 0.0;
    for x in plan.points(&k.poincare.interior_patch.domain).map_err(|e| e.to_string())? {
        recovery = recovery.max(lift_recovery_residual(&raw, &k.psi, &x).map_err(|e| e.to_string())?);
    }
    require(
        special.pass && lift.pass && recovery == 0.0,
        format!(
            "(a)-(e) {:.1e} < 1e-7 [{}]; lift parallel {:.1e} < 1e-6; recovery {recovery:e}",
            special.max_abs_residual,
            special.notes.iter().filter(|n| n.starts_with('(')).cloned().collect::<Vec<_>>().join("; "),
            lift.max_abs_residual
        ),
    )
}

fn obstruction_vanishing() -> Outcome {
    let boundary = product_metric(&entry("sphere(2,1)"), &entry("hyperbolic(2,1)"));
    let tol = Tolerance::tier(ToleranceTier::Bach);
    let s2h2 = check_bach_vanishing(&boundary, &SamplePlan::new(5, 20, boundary.sample_box.clone()), tol).map_err(|e| e.to_string())?;
    let flat = flat_patch(4);
    let plan = SamplePlan::new(5, 20, flat.sample_box.clone());
    let flat_rep = check_bach_vanishing(&flat, &plan, tol).map_err(|e| e.to_string())?;
    let (controls, slope) = negative_control(&CONTROL_EPSILONS, |e| {
        let p = perturbed_patch(&flat, e, (0, 0), |x: &[Jet]| &(&(&x[1] * &x[1]) * &(&x[2] * &x[2])) * 10.0);
        check_bach_vanishing(&p, &plan, tol)
    })
    .map_err(|e| e.to_string())?;
    require(
        s2h2.pass && flat_rep.max_abs_residual < 1e-10 && controls.iter().all(|r| !r.pass) && (slope - 1.0).abs() <= 0.2,
        format!(
            "S2xH2 Bach {:.1e} < 1e-5; flat4 {:.1e} < 1e-10; perturbed flat4 fails at every eps with slope {slope:.3}",
            s2h2.max_abs_residual, flat_rep.max_abs_residual
        ),
    )
}

fn homothety_suite() -> Outcome {
    let tol = Tolerance::analytic(1e-9);
    let mut reports = Vec::new();
    for name in ["sphere(2,1)", "sphere(3,1)", "hyperbolic(2,1)", "einstein_product(sphere(2,1),sphere(2,1),1)"] {
        let c = metric_cone(&entry(name)).map_err(|e| e.to_string())?;
        let (h, g) =
            check_homothety_gradient(&c.cone_patch, &c.euler_field, 2.0, &SamplePlan::new(6, 20, c.cone_patch.sample_box.clone()), tol);
        reports.extend([h, g]);
    }
    let (g1, g2) = (entry("sphere(2,1)"), entry("hyperbolic(2,1)"));
    let mu = Rational64::new(1, 2);
    let cp = cone_product(&metric_cone_with_lambda(&g1, mu * 2).unwrap(), &metric_cone_with_lambda(&g2, -mu * 2).unwrap())
        .map_err(|e| e.to_string())?;
    let (h, g) = check_homothety_gradient(
        &cp.product_patch,
        &cp.euler_field,
        2.0,
        &SamplePlan::new(6, 20, cp.product_patch.sample_box.clone()),
        tol,
    );
    reports.extend([h, g]);
    let amb = ambient_metric(&g1, &g2, mu).map_err(|e| e.to_string())?;
    let plan = SamplePlan::new(6, 20, amb.ambient_patch.sample_box.clone());
    let (h, g) = check_homothety_gradient(&amb.ambient_patch, &amb.euler_field, 2.0, &plan, tol);
    reports.extend([h, g]);
    let mut dilations = Vec::new();
    for alpha in [Rational64::new(9, 4), Rational64::new(1, 3), Rational64::from_integer(5)] {
        let scaled = |g: &EinsteinSpec| einforge_core::catalog::scale_metric(g, alpha).unwrap();
        let dilated = ambient_metric(&scaled(&g1), &scaled(&g2), mu / alpha).map_err(|e| e.to_string())?;
        dilations.push(check_dilation(&amb, &dilated, einforge_core::catalog::to_f64(alpha), &plan, tol).map_err(|e| e.to_string())?);
    }
    let all: Vec<&CheckReport> = reports.iter().chain(&dilations).collect();
    require(
        all.iter().all(|r| r.pass && r.tolerance == 1e-9),
        format!(
            "homothety/gradient on 4 cones, S2xH2 cone product and ambient: max {:.1e}; dilation alpha in {{9/4, 1/3, 5}}: max {:.1e}; both < 1e-9",
            max_of(&reports.iter().collect::<Vec<_>>()),
            max_of(&dilations.iter().collect::<Vec<_>>())
        ),
    )
}

fn transport_suite() -> Outcome {
    let run =
        |name: &str| run_scenario(&parse_scenario(builtin(name).unwrap()).unwrap(), &RunOptions::default()).map_err(|e| e.to_string());
    let drag = run("drag-lemma-grid")?;
    let hol = run("transverse-holonomy")?;
    let cone = metric_cone(&entry("sphere(2,1)")).map_err(|e| e.to_string())?.cone_patch;
    let opts = IntegratorOptions { tolerance: 1e-12, ..IntegratorOptions::default() };
    let mut loops: f64 = 0.0;
    for (r, tilt, lift) in [(0.2, 0.0, 0.0), (0.4, 0.3, 0.2), (0.6, -0.2, 0.5)] {
        let lp = PathSpec::from_jet_fn(true, move |t| {
            let a = t * (2.0 * PI);
            vec![&(&a.cos() * r) + 0.4, &(&a.sin() * r) + &(&a.cos() * tilt), &(&(&a * 2.0).sin() * lift) + 1.0]
        });
        let f = parallel_transport(&cone, &lp, &coordinate_frame(3), &opts).map_err(|e| e.to_string())?;
        loops = loops.max(frame_distance(&f.frame, &coordinate_frame(3)));
    }
    require(
        drag[0].pass && drag[0].max_abs_residual < 1e-6 && hol[0].pass && hol[0].max_abs_residual < 1e-5 && loops < 1e-7,
        format!(
            "drag grid on cone over S2xS2 {:.1e} < 1e-6 ({} samples); transverse holonomy {:.1e} < 1e-5; flat-cone loops {loops:.1e} < 1e-7",
            drag[0].max_abs_residual, drag[0].samples_evaluated, hol[0].max_abs_residual
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_einforge");
    let csv = |name: &str, threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(exe)
            .args(["--scenario", name, "--format", "csv"])
            .env("EF_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{name} exited with {} ({})", out.status, String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let mut checked = 0;
    for name in builtin_names() {
        let a = csv(name, "1")?;
        let b = csv(name, "1")?;
        let c = csv(name, "4")?;
        if a != b || a != c {
            return Err(format!("{name}: CSV differs between runs or thread counts"));
        }
        checked += 1;
    }
    require(checked == 9, format!("{checked} builtins byte-identical across two runs and EF_THREADS 1 and 4"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("ambient Ricci-flatness", ambient_ricci_flatness),
        ("normal form vs generic curvature", dual_path_agreement),
        ("Poincare-Einstein condition", poincare_einstein),
        ("cone-product equivalence", cone_product_equivalence),
        ("SO(4) arithmetic", so4_arithmetic),
        ("special Killing suite", special_killing_suite),
        ("obstruction vanishing", obstruction_vanishing),
        ("homothety, gradient and dilation", homothety_suite),
        ("transport suite", transport_suite),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
