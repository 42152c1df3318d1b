//! Transport along homothetic gradient flows: the drag identity, loop
//! comparison through a transverse hypersurface, and a holonomy-algebra rank.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::checks::Tolerance;
use super::report::CheckReport;
use crate::error::{GeometryError, Result};
use crate::kernel::chart::{ChartPoint, Domain};
use crate::kernel::curvature::{christoffel_at, curvature_jets};
use crate::kernel::jet::Jet;
use crate::kernel::lie::VectorField;
use crate::kernel::patch::MetricPatch;
use crate::kernel::sampling::{par_map_indexed, SamplePlan};
use crate::kernel::transport::{coordinate_frame, frame_distance, integrate, parallel_transport, IntegratorOptions, PathSpec};

/// `φ(p, τ)`, the flow of the probe's field for time `τ`, on jets.
pub type FlowMap = Arc<dyn Fn(&[Jet], &Jet) -> Vec<Jet> + Send + Sync>;

/// Singular values below this count as zero in [`holonomy_algebra_estimate`].
pub const RANK_THRESHOLD: f64 = 1e-6;

const NEWTON_STEPS: usize = 60;

/// A homothetic gradient field `v` with `ℒ_v g = c g`, its flow, the
/// hypersurface `E = {x^index = level}` and a loop based on `E`.
#[derive(Clone)]
pub struct TransportProbe {
    pub field: VectorField,
    pub c: f64,
    pub flow: FlowMap,
    /// `(index, level)` of the level set `E`.
    pub hypersurface: (usize, f64),
    pub loop_path: PathSpec,
    /// `(loop parameters, drag parameters)` of the drag grid.
    pub grid: (usize, usize),
    /// Largest drag parameter `s`; must stay below `2/c` when `c > 0`.
    pub s_max: f64,
    pub opts: IntegratorOptions,
}

impl fmt::Debug for TransportProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TransportProbe(c = {}, E = {{x{} = {}}}, grid {:?})", self.c, self.hypersurface.0, self.hypersurface.1, self.grid)
    }
}

/// `Σ xᵢ∂ᵢ` over `indices` and its flow `xᵢ ↦ e^τ xᵢ`.
pub fn euler_field_and_flow(dim: usize, indices: Vec<usize>) -> (VectorField, FlowMap) {
    let ix = indices.clone();
    let field: VectorField = Arc::new(move |x: &[Jet]| {
        let mut v = vec![x[0].lift(0.0); dim];
        for &i in &ix {
            v[i] = x[i].clone();
        }
        v
    });
    let flow: FlowMap = Arc::new(move |x: &[Jet], tau: &Jet| {
        let scale = tau.exp();
        let mut y = x.to_vec();
        for &i in &indices {
            y[i] = &x[i] * &scale;
        }
        y
    });
    (field, flow)
}

impl TransportProbe {
    pub fn new(field: VectorField, c: f64, flow: FlowMap, hypersurface: (usize, f64), loop_path: PathSpec) -> TransportProbe {
        let opts = IntegratorOptions { tolerance: 1e-12, ..IntegratorOptions::default() };
        TransportProbe { field, c, flow, hypersurface, loop_path, grid: (10, 10), s_max: 0.5 / c.abs().max(1.0), opts }
    }

    /// `s = (2/c)(1 − e^{−cτ/2})`, the parameter in which the drag factor is `1 − cs/2`.
    pub fn drag_parameter(&self, tau: f64) -> f64 {
        if self.c == 0.0 {
            tau
        } else {
            2.0 / self.c * (1.0 - (-self.c * tau / 2.0).exp())
        }
    }

    /// Flow time reaching drag parameter `s`.
    pub fn flow_time(&self, s: f64) -> Result<f64> {
        if self.c == 0.0 {
            return Ok(s);
        }
        let arg = 1.0 - self.c * s / 2.0;
        if arg <= 0.0 {
            return Err(GeometryError::IntegrationFailure { at: s, reason: format!("drag parameter beyond 2/c = {}", 2.0 / self.c) });
        }
        Ok(-2.0 / self.c * arg.ln())
    }

    pub fn flow_point(&self, p: &[f64], tau: f64) -> Vec<f64> {
        let seeds = Jet::seed(p, 0);
        let t = Jet::constant(seeds[0].layout(), tau);
        (self.flow)(&seeds, &t).iter().map(Jet::value).collect()
    }

    /// `π(p) ∈ E` along the flow line through `p`, with the flow time reaching it.
    pub fn project(&self, p: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (ix, level) = self.hypersurface;
        let undefined = |why: String| GeometryError::ProjectionUndefined(format!("from {p:?}: {why}"));
        let consts: Vec<Jet> = Jet::seed(p, 1).iter().map(|j| j.lift(j.value())).collect();
        let mut tau = 0.0;
        for _ in 0..NEWTON_STEPS {
            let t = Jet::seed(&[tau], 1).remove(0);
            let x: Vec<Jet> = consts.iter().map(|c| t.lift(c.value())).collect();
            let y = (self.flow)(&x, &t);
            let (f, df) = (y[ix].value() - level, y[ix].d1(0));
            if !f.is_finite() || !df.is_finite() {
                return Err(undefined("flow left the chart".into()));
            }
            if f.abs() <= 1e-15 * level.abs().max(1.0) {
                return Ok((y.iter().map(Jet::value).collect(), tau));
            }
            if df == 0.0 {
                return Err(undefined("flow line is tangent to E".into()));
            }
            tau -= f / df;
        }
        Err(undefined("no intersection with E".into()))
    }

    /// The flow line through each point crosses `E` once: the level
    /// coordinate moves strictly monotonically between `p` and `π(p)`.
    pub fn check_transversal(&self, points: &[Vec<f64>]) -> Result<()> {
        let ix = self.hypersurface.0;
        for p in points {
            let (_, tau) = self.project(p)?;
            let mut prev = p[ix];
            let mut dir = 0.0f64;
            for k in 1..=8 {
                let y = self.flow_point(p, tau * k as f64 / 8.0)[ix];
                let step = y - prev;
                if dir * step < 0.0 || (tau != 0.0 && step == 0.0) {
                    return Err(GeometryError::ProjectionUndefined(format!("flow line through {p:?} turns back before E")));
                }
                dir = step.signum();
                prev = y;
            }
        }
        Ok(())
    }

    /// `Γ(t, s) = φ(γ(t), τ(s))`.
    pub fn path_cone(&self, t: f64, s: f64) -> Result<Vec<f64>> {
        Ok(self.flow_point(&self.loop_path.eval(t).0, self.flow_time(s)?))
    }

    /// `π ∘ γ` with its velocity from the implicit function theorem.
    pub fn projected_loop(&self) -> PathSpec {
        let probe = self.clone();
        PathSpec::new(self.loop_path.closed, move |t| {
            let (p, v) = probe.loop_path.eval(t);
            let m = p.len();
            let Ok((_, tau)) = probe.project(&p) else {
                return (vec![f64::NAN; m], vec![f64::NAN; m]);
            };
            let mut at = p.clone();
            at.push(tau);
            let seeds = Jet::seed(&at, 1);
            let y = (probe.flow)(&seeds[..m], &seeds[m]);
            let ix = probe.hypersurface.0;
            let lead: f64 = (0..m).map(|i| y[ix].d1(i) * v[i]).sum();
            let tau_dot = -lead / y[ix].d1(m);
            let vel = (0..m).map(|a| (0..m).map(|i| y[a].d1(i) * v[i]).sum::<f64>() + y[a].d1(m) * tau_dot).collect();
            (y.iter().map(Jet::value).collect(), vel)
        })
    }
}

fn restricted(path: &PathSpec, upto: f64) -> PathSpec {
    let p = path.clone();
    PathSpec::new(false, move |u| {
        let (x, v) = p.eval(upto * u);
        (x, v.into_iter().map(|c| c * upto).collect())
    })
}

/// Transports `vectors` along the flow line from `x0` and integrates the
/// linearized flow alongside, stopping at each flow time in `taus`. Returns
/// `(transported, pushed forward)` per stop.
#[allow(clippy::type_complexity)]
fn drag_along_flow(
    patch: &MetricPatch,
    field: &VectorField,
    x0: &[f64],
    vectors: &[Vec<f64>],
    taus: &[f64],
    opts: &IntegratorOptions,
) -> Result<Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)>> {
    let m = x0.len();
    let k = vectors.len();
    // state: x (m), J (m×m, row-major), F (k×m)
    let rhs = |_t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let x = &y[..m];
        let seeds = Jet::seed(x, 1);
        let v = field(&seeds);
        let gamma = christoffel_at(patch, x)?;
        let mut out = vec![0.0; m + m * m + k * m];
        for a in 0..m {
            out[a] = v[a].value();
        }
        let jac = &y[m..m + m * m];
        for a in 0..m {
            for b in 0..m {
                out[m + a * m + b] = (0..m).map(|c| v[a].d1(c) * jac[c * m + b]).sum();
            }
        }
        let f = &y[m + m * m..];
        for j in 0..k {
            for a in 0..m {
                let mut s = 0.0;
                for b in 0..m {
                    for c in 0..m {
                        s += gamma.data[(a * m + b) * m + c] * v[b].value() * f[j * m + c];
                    }
                }
                out[m + m * m + j * m + a] = -s;
            }
        }
        Ok(out)
    };
    let mut y: Vec<f64> = x0.to_vec();
    y.extend(coordinate_frame(m).into_iter().flatten());
    y.extend(vectors.iter().flatten().copied());
    let mut tau = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &next in taus {
        y = integrate(&rhs, tau, next, &y, opts)?.state;
        tau = next;
        let jac = &y[m..m + m * m];
        let transported: Vec<Vec<f64>> = y[m + m * m..].chunks(m).map(<[f64]>::to_vec).collect();
        let pushed = vectors.iter().map(|f| (0..m).map(|a| (0..m).map(|b| jac[a * m + b] * f[b]).sum()).collect()).collect();
        out.push((transported, pushed));
    }
    Ok(out)
}

fn linspace(n: usize, hi: f64) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

/// Over the `(t, s)` grid: `F(t, s) − (1 − cs/2) φ_{s*}F(t)`, where `F(t)` is
/// transported along the loop and `F(t, s)` along the flow line. `plan`
/// supplies the initial vectors `F_q`.
pub fn check_drag_lemma(cone_patch: &MetricPatch, probe: &TransportProbe, plan: &SamplePlan, tol: Tolerance) -> Result<CheckReport> {
    let m = cone_patch.dim();
    let vectors = plan.points(&Domain::unbounded(plan.bounds.len()))?;
    if vectors.iter().any(|v| v.len() != m) {
        return Err(GeometryError::BadDimension(format!("plan draws vectors of the wrong size for dimension {m}")));
    }
    let s_grid = linspace(probe.grid.1, probe.s_max);
    let taus = s_grid.iter().map(|&s| probe.flow_time(s)).collect::<Result<Vec<_>>>()?;
    let t_grid = linspace(probe.grid.0, 1.0);
    let rows = par_map_indexed(t_grid.len(), |i| -> Result<Vec<f64>> {
        let t = t_grid[i];
        let base = probe.loop_path.eval(t).0;
        let along = if t == 0.0 {
            vectors.clone()
        } else {
            parallel_transport(cone_patch, &restricted(&probe.loop_path, t), &vectors, &probe.opts)?.frame
        };
        let stops = drag_along_flow(cone_patch, &probe.field, &base, &along, &taus, &probe.opts)?;
        Ok(stops
            .iter()
            .zip(&s_grid)
            .map(|((moved, pushed), &s)| {
                let factor = 1.0 - probe.c * s / 2.0;
                let scaled: Vec<Vec<f64>> = pushed.iter().map(|f| f.iter().map(|x| x * factor).collect()).collect();
                frame_distance(moved, &scaled)
            })
            .collect())
    });
    let mut residuals = Vec::new();
    let mut notes = Vec::new();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(v) => residuals.extend(v),
            Err(e) => {
                residuals.extend(std::iter::repeat_n(f64::INFINITY, s_grid.len()));
                notes.push(format!("loop parameter {}: {e}", t_grid[i]));
            }
        }
    }
    let mut report = CheckReport::from_residuals("drag-lemma", &residuals, tol.value, tol.tier).note(format!(
        "{} × {} grid, s ≤ {}, c = {}",
        t_grid.len(),
        s_grid.len(),
        probe.s_max,
        probe.c
    ));
    report.notes.extend(notes);
    Ok(report)
}

/// Holonomy of the loop against holonomy of its projection into `E`, as the
/// largest frame difference at the basepoint. `plan.count` loop points are
/// checked for transversality first.
pub fn check_transverse_holonomy(
    cone_patch: &MetricPatch,
    probe: &TransportProbe,
    plan: &SamplePlan,
    tol: Tolerance,
) -> Result<CheckReport> {
    let m = cone_patch.dim();
    let (ix, level) = probe.hypersurface;
    let q = probe.loop_path.start();
    if !probe.loop_path.closed || probe.loop_path.closure_gap() > 1e-12 {
        return Err(GeometryError::IntegrationFailure { at: 1.0, reason: "loop is not closed".into() });
    }
    if (q[ix] - level).abs() > 1e-12 {
        return Err(GeometryError::ProjectionUndefined(format!("basepoint {q:?} is not on E")));
    }
    let count = plan.count.max(1);
    let samples: Vec<Vec<f64>> = (0..count).map(|i| probe.loop_path.eval(i as f64 / count as f64).0).collect();
    probe.check_transversal(&samples)?;
    let frame = coordinate_frame(m);
    let around = parallel_transport(cone_patch, &probe.loop_path, &frame, &probe.opts)?;
    let projected = parallel_transport(cone_patch, &probe.projected_loop(), &frame, &probe.opts)?;
    let diff = frame_distance(&around.frame, &projected.frame);
    Ok(CheckReport::from_residuals("transverse-holonomy", &[diff], tol.value, tol.tier)
        .note(format!("holonomy deviation from identity {:e}", frame_distance(&around.frame, &frame)))
        .note(format!("integration error estimates {:e}, {:e}", around.error_estimate, projected.error_estimate)))
}

/// Rank of the span of curvature endomorphisms `R(e_a, e_b)` at the plan's
/// points, expressed in frames transported from `base` along straight
/// segments. A lower bound for the holonomy algebra dimension.
pub fn holonomy_algebra_estimate(patch: &MetricPatch, base: &ChartPoint, plan: &SamplePlan) -> Result<usize> {
    base.validate(&patch.chart_id, &patch.domain)?;
    let m = patch.dim();
    let opts = IntegratorOptions::default();
    let mut points = vec![base.coords.clone()];
    points.extend(plan.points(&patch.domain)?);
    let blocks = par_map_indexed(points.len(), |i| -> Result<Vec<Vec<f64>>> {
        let p = &points[i];
        let frame = if i == 0 {
            coordinate_frame(m)
        } else {
            let (a, b) = (base.coords.clone(), p.clone());
            let segment = PathSpec::new(false, move |t| {
                let x = a.iter().zip(&b).map(|(u, w)| u + t * (w - u)).collect();
                let v = a.iter().zip(&b).map(|(u, w)| w - u).collect();
                (x, v)
            });
            parallel_transport(patch, &segment, &coordinate_frame(m), &opts)?.frame
        };
        let e = DMatrix::from_fn(m, m, |i, a| frame[a][i]);
        let einv = e.clone().try_inverse().ok_or_else(|| GeometryError::SingularMetric { point: p.clone(), det: 0.0 })?;
        let r = curvature_jets(patch, p, 2)?.riemann_up.values();
        let mut out = Vec::new();
        for k in 0..m {
            for l in (k + 1)..m {
                let endo = DMatrix::from_fn(m, m, |a, b| {
                    let mut s = 0.0;
                    for c in 0..m {
                        for d in 0..m {
                            s += r.data[((a * m + b) * m + c) * m + d] * e[(c, k)] * e[(d, l)];
                        }
                    }
                    s
                });
                out.push((&einv * endo * &e).iter().copied().collect());
            }
        }
        Ok(out)
    });
    let rows: Vec<Vec<f64>> = blocks.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    if rows.is_empty() {
        return Ok(0);
    }
    let stacked = DMatrix::from_fn(rows.len(), m * m, |i, j| rows[i][j]);
    Ok(stacked.singular_values().iter().filter(|&&s| s > RANK_THRESHOLD).count())
}
