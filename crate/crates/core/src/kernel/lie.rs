//! Lie derivatives of the metric along vector fields.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::chart::ChartPoint;
use super::curvature::{christoffel_from, metric_jets};
use super::jet::Jet;
use super::patch::MetricPatch;
use super::tensor::Tensor;
use crate::error::{GeometryError, Result};

/// A vector field given by its components as functions of coordinate jets.
pub type VectorField = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// The zero field on an `m`-dimensional chart.
pub fn zero_field(m: usize) -> VectorField {
    Arc::new(move |x: &[Jet]| vec![x[0].lift(0.0); m])
}

/// `Σ_i c_i x^i ∂_i`; with all `c_i = 1` this is the Euler field of the chart origin.
pub fn radial_field(weights: Vec<f64>) -> VectorField {
    Arc::new(move |x: &[Jet]| x.iter().zip(&weights).map(|(xi, w)| xi * *w).collect())
}

/// `(ℒ_V g)_ij = ∇_i V_j + ∇_j V_i` as jets of order `order − 1`.
pub fn lie_derivative_jets(patch: &MetricPatch, v: &VectorField, coords: &[f64], order: usize) -> Result<Tensor<Jet>> {
    if order < 1 {
        return Err(GeometryError::JetUnavailable { requested: 1, available: 0 });
    }
    let m = patch.dim();
    let (g, ginv) = metric_jets(patch, coords, order)?;
    let gamma = christoffel_from(&g, &ginv);
    let seeds = Jet::seed(coords, order);
    let vu = v(&seeds);
    let low = order - 1;
    let zero = seeds[0].lift(0.0).truncate(order);
    let mut v_low = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = zero.clone();
        for k in 0..m {
            acc = &acc + &(g.get(&[j, k]) * &vu[k]);
        }
        v_low.push(acc);
    }
    let v_flat: Vec<Jet> = v_low.iter().map(|j| j.truncate(low)).collect();
    let mut nabla = vec![zero.truncate(low); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = v_low[j].derivative(i);
            for k in 0..m {
                acc = &acc - &(gamma.get(&[k, i, j]).truncate(low) * &v_flat[k]);
            }
            nabla[i * m + j] = acc;
        }
    }
    let mut out = Tensor::filled(m, 2, zero.truncate(low));
    for i in 0..m {
        for j in 0..m {
            out.set(&[i, j], &nabla[i * m + j] + &nabla[j * m + i]);
        }
    }
    Ok(out)
}

/// `ℒ_V g` at a chart point.
pub fn lie_derivative_metric(patch: &MetricPatch, v: &VectorField, x: &ChartPoint) -> Result<DMatrix<f64>> {
    x.validate(&patch.chart_id, &patch.domain)?;
    Ok(lie_derivative_jets(patch, v, &x.coords, 1)?.values().matrix())
}

/// Flows `x` along `v` for `time` with `steps` classical RK4 steps. Works on
/// jets, so seeding `x` yields the flow map's derivatives as well.
pub fn flow_jets(v: &VectorField, x: &[Jet], time: f64, steps: usize) -> Vec<Jet> {
    let h = time / steps as f64;
    let mut y = x.to_vec();
    let axpy = |y: &[Jet], k: &[Jet], a: f64| -> Vec<Jet> { y.iter().zip(k).map(|(yi, ki)| yi + &(ki * a)).collect() };
    for _ in 0..steps {
        let k1 = v(&y);
        let k2 = v(&axpy(&y, &k1, h / 2.0));
        let k3 = v(&axpy(&y, &k2, h / 2.0));
        let k4 = v(&axpy(&y, &k3, h));
        y = y
            .iter()
            .enumerate()
            .map(|(i, yi)| {
                let incr = &(&(&k1[i] + &(&k2[i] * 2.0)) + &(&k3[i] * 2.0)) + &k4[i];
                yi + &(&incr * (h / 6.0))
            })
            .collect();
    }
    y
}

/// `φ_τ^* g` at `coords`, with the flow and its Jacobian from RK4 on jets.
pub fn flow_pullback(patch: &MetricPatch, v: &VectorField, coords: &[f64], time: f64, steps: usize) -> Result<DMatrix<f64>> {
    let m = patch.dim();
    let seeds = Jet::seed(coords, 1);
    let y = flow_jets(v, &seeds, time, steps);
    let target: Vec<f64> = y.iter().map(Jet::value).collect();
    let g = patch.matrix(&target)?;
    let jac = DMatrix::from_fn(m, m, |a, i| y[a].d1(i));
    Ok(jac.transpose() * g * jac)
}

/// Central difference `(φ_h^* g − φ_{−h}^* g)/(2h)`, an `O(h²)` estimate of `ℒ_V g`.
pub fn lie_derivative_flow_fd(patch: &MetricPatch, v: &VectorField, coords: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let steps = 16;
    let plus = flow_pullback(patch, v, coords, h, steps)?;
    let minus = flow_pullback(patch, v, coords, -h, steps)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Observed convergence order of the flow estimate toward the covariant
/// formula between steps `h` and `h/2`.
pub fn lie_convergence_order(patch: &MetricPatch, v: &VectorField, coords: &[f64], h: f64) -> Result<(f64, f64, f64)> {
    let exact = lie_derivative_jets(patch, v, coords, 1)?.values().matrix();
    let e1 = (lie_derivative_flow_fd(patch, v, coords, h)? - &exact).amax();
    let e2 = (lie_derivative_flow_fd(patch, v, coords, h / 2.0)? - &exact).amax();
    Ok(((e1 / e2).log2(), e1, e2))
}

/// Largest component of `d(g(V,·))`; zero exactly when the metric dual of `V`
/// is locally a gradient.
pub fn dual_form_curl(patch: &MetricPatch, v: &VectorField, coords: &[f64]) -> Result<f64> {
    let m = patch.dim();
    let seeds = Jet::seed(coords, 1);
    let g = patch.jets(coords, 1)?;
    let vu = v(&seeds);
    let mut omega = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = seeds[0].lift(0.0);
        for k in 0..m {
            acc = &acc + &(&g[j * m + k] * &vu[k]);
        }
        omega.push(acc);
    }
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            worst = worst.max((omega[j].d1(i) - omega[i].d1(j)).abs());
        }
    }
    Ok(worst)
}
