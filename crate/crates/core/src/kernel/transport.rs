//! Adaptive RK4 integration and parallel transport along curves.

use std::sync::Arc;

use super::curvature::christoffel_at;
use super::jet::Jet;
use super::patch::MetricPatch;
use crate::error::{GeometryError, Result};

/// Default absolute error allowed per accepted step.
pub const DEFAULT_STEP_TOLERANCE: f64 = 1e-9;

/// Step control for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub tolerance: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { tolerance: DEFAULT_STEP_TOLERANCE, initial_step: 1e-2, min_step: 1e-12, max_steps: 200_000 }
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct Integration {
    pub state: Vec<f64>,
    pub steps: usize,
    /// Sum of per-step error estimates; bounds the global error to first order.
    pub error_estimate: f64,
}

type Rhs<'a> = dyn Fn(f64, &[f64]) -> Result<Vec<f64>> + 'a;

fn rk4_step(f: &Rhs, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = f(t, y)?;
    let k2 = f(t + h / 2.0, &add(y, &k1, h / 2.0))?;
    let k3 = f(t + h / 2.0, &add(y, &k2, h / 2.0))?;
    let k4 = f(t + h, &add(y, &k3, h))?;
    Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with RK4 step doubling.
///
/// Each step compares one full step with two half steps; the difference over
/// 15 estimates the local error, which must stay below `tolerance`.
pub fn integrate(f: &Rhs, t0: f64, t1: f64, y0: &[f64], opts: &IntegratorOptions) -> Result<Integration> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(Integration { state: y0.to_vec(), steps: 0, error_estimate: 0.0 });
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = opts.initial_step.min(span.abs());
    let mut steps = 0;
    let mut error_estimate = 0.0;
    while (t1 - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(GeometryError::IntegrationFailure { at: t, reason: "step budget exhausted".into() });
        }
        let h_try = h.min((t1 - t).abs());
        let full = rk4_step(f, t, &y, dir * h_try)?;
        let half = rk4_step(f, t, &y, dir * h_try / 2.0)?;
        let two = rk4_step(f, t + dir * h_try / 2.0, &half, dir * h_try / 2.0)?;
        let err = full.iter().zip(&two).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / 15.0;
        if !err.is_finite() {
            return Err(GeometryError::IntegrationFailure { at: t, reason: "non-finite state".into() });
        }
        if err <= opts.tolerance {
            y = two.iter().zip(&full).map(|(b, a)| b + (b - a) / 15.0).collect();
            t = if (t1 - t).abs() <= h_try { t1 } else { t + dir * h_try };
            steps += 1;
            error_estimate += err;
            let grow = if err == 0.0 { 2.0 } else { (0.9 * (opts.tolerance / err).powf(0.2)).clamp(0.2, 2.0) };
            h = h_try * grow;
        } else {
            h = h_try * (0.9 * (opts.tolerance / err).powf(0.2)).clamp(0.1, 0.5);
            if h < opts.min_step {
                return Err(GeometryError::IntegrationFailure { at: t, reason: format!("step underflow (h = {h:e})") });
            }
        }
    }
    Ok(Integration { state: y, steps, error_estimate })
}

type CurveFn = dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync;

/// A parametrized curve `t ∈ [0, 1]` with its velocity.
#[derive(Clone)]
pub struct PathSpec {
    curve: Arc<CurveFn>,
    pub closed: bool,
}

impl std::fmt::Debug for PathSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PathSpec(closed: {})", self.closed)
    }
}

impl PathSpec {
    pub fn new(closed: bool, curve: impl Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync + 'static) -> PathSpec {
        PathSpec { curve: Arc::new(curve), closed }
    }

    /// A curve given on jets of the parameter; the velocity comes from the jet.
    pub fn from_jet_fn(closed: bool, f: impl Fn(&Jet) -> Vec<Jet> + Send + Sync + 'static) -> PathSpec {
        PathSpec::new(closed, move |t| {
            let s = Jet::seed(&[t], 1);
            let p = f(&s[0]);
            (p.iter().map(Jet::value).collect(), p.iter().map(|j| j.d1(0)).collect())
        })
    }

    /// A curve given pointwise; velocity by a fourth-order central difference.
    pub fn from_points(closed: bool, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> PathSpec {
        PathSpec::new(closed, move |t| {
            let h = 1e-4;
            let p = f(t);
            let (a, b, c, d) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
            let v = (0..p.len()).map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h)).collect();
            (p, v)
        })
    }

    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        (self.curve)(t)
    }

    pub fn start(&self) -> Vec<f64> {
        self.eval(0.0).0
    }

    /// The same trace traversed backwards.
    pub fn reverse(&self) -> PathSpec {
        let c = Arc::clone(&self.curve);
        PathSpec::new(self.closed, move |t| {
            let (p, v) = c(1.0 - t);
            (p, v.into_iter().map(|x| -x).collect())
        })
    }

    /// Traverses `self` then `other`, each at double speed.
    pub fn then(&self, other: &PathSpec) -> PathSpec {
        let (a, b) = (Arc::clone(&self.curve), Arc::clone(&other.curve));
        let closed = self.closed && other.closed;
        PathSpec::new(closed, move |t| {
            let (p, v) = if t < 0.5 { a(2.0 * t) } else { b(2.0 * t - 1.0) };
            (p, v.into_iter().map(|x| 2.0 * x).collect())
        })
    }

    /// Largest gap `|γ(1) − γ(0)|`.
    pub fn closure_gap(&self) -> f64 {
        let (a, b) = (self.eval(0.0).0, self.eval(1.0).0);
        a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

/// Result of transporting a frame.
#[derive(Debug, Clone)]
pub struct TransportResult {
    pub frame: Vec<Vec<f64>>,
    pub steps: usize,
    pub error_estimate: f64,
    /// Largest change of `g(F_a, F_b)` between the two ends.
    pub gram_drift: f64,
}

fn gram(patch: &MetricPatch, x: &[f64], frame: &[Vec<f64>]) -> Result<Vec<f64>> {
    let g = patch.matrix(x)?;
    let mut out = Vec::new();
    for a in frame {
        for b in frame {
            let mut s = 0.0;
            for i in 0..a.len() {
                for j in 0..b.len() {
                    s += g[(i, j)] * a[i] * b[j];
                }
            }
            out.push(s);
        }
    }
    Ok(out)
}

/// Solves `dF^a/dt = −Γ^a_bc γ̇^b F^c` for every frame vector along `path`.
pub fn parallel_transport(patch: &MetricPatch, path: &PathSpec, frame: &[Vec<f64>], opts: &IntegratorOptions) -> Result<TransportResult> {
    let m = patch.dim();
    if frame.iter().any(|v| v.len() != m) {
        return Err(GeometryError::BadDimension(format!("frame vectors must have {m} components")));
    }
    let k = frame.len();
    let rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (x, v) = path.eval(t);
        let gamma = christoffel_at(patch, &x)?;
        let mut out = vec![0.0; m * k];
        for f in 0..k {
            for a in 0..m {
                let mut s = 0.0;
                for b in 0..m {
                    if v[b] == 0.0 {
                        continue;
                    }
                    for c in 0..m {
                        s += gamma.data[(a * m + b) * m + c] * v[b] * y[f * m + c];
                    }
                }
                out[f * m + a] = -s;
            }
        }
        Ok(out)
    };
    let y0: Vec<f64> = frame.iter().flatten().copied().collect();
    let run = integrate(&rhs, 0.0, 1.0, &y0, opts)?;
    let out: Vec<Vec<f64>> = run.state.chunks(m).map(<[f64]>::to_vec).collect();
    let before = gram(patch, &path.eval(0.0).0, frame)?;
    let after = gram(patch, &path.eval(1.0).0, &out)?;
    let gram_drift = before.iter().zip(&after).fold(0.0f64, |mx, (a, b)| mx.max((a - b).abs()));
    Ok(TransportResult { frame: out, steps: run.steps, error_estimate: run.error_estimate, gram_drift })
}

/// The coordinate basis at the start of `path`.
pub fn coordinate_frame(m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Largest componentwise difference between two frames.
pub fn frame_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}
