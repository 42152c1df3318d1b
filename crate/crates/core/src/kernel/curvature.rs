//! Levi-Civita connection and Riemann curvature, computed on jets.
//!
//! Conventions:
//! `Γ^a_bc = ½ g^{al}(∂_b g_lc + ∂_c g_lb − ∂_l g_bc)`,
//! `R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb`,
//! `R_abcd = g_ae R^e_bcd`, `Ric_bd = R^a_bad`, `Sc = g^{bd} Ric_bd`.
//! A space of constant sectional curvature `K` has `R_abcd = K(g_ac g_bd − g_ad g_bc)`.

use super::jet::Jet;
use super::patch::{invert_checked, MetricPatch};
use super::tensor::{jet_inverse, Tensor};
use crate::error::{GeometryError, Result};

/// Metric, inverse, connection and curvature as jets at one point.
///
/// With metric jets of order `k`, the connection has order `k−1` and every
/// curvature tensor order `k−2`.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub dim: usize,
    pub g: Tensor<Jet>,
    pub ginv: Tensor<Jet>,
    /// `Γ^a_bc`, upper index first.
    pub christoffel: Tensor<Jet>,
    pub riemann_up: Tensor<Jet>,
    pub riemann: Tensor<Jet>,
    pub ricci: Tensor<Jet>,
    pub scalar: Jet,
}

/// Point values of the curvature quantities.
#[derive(Debug, Clone)]
pub struct CurvatureAtPoint {
    pub christoffel: Tensor<f64>,
    pub riemann_lowered: Tensor<f64>,
    pub ricci: Tensor<f64>,
    pub scalar: f64,
}

fn singular(coords: &[f64], g: &[Jet]) -> GeometryError {
    let m = (g.len() as f64).sqrt() as usize;
    let det = nalgebra::DMatrix::from_fn(m, m, |i, j| g[i * m + j].value()).determinant();
    GeometryError::SingularMetric { point: coords.to_vec(), det }
}

/// Metric and inverse jets, failing on singular metrics.
pub fn metric_jets(patch: &MetricPatch, coords: &[f64], order: usize) -> Result<(Tensor<Jet>, Tensor<Jet>)> {
    let m = patch.dim();
    let g = patch.jets(coords, order)?;
    let gv = nalgebra::DMatrix::from_fn(m, m, |i, j| g[i * m + j].value());
    invert_checked(&gv, coords)?;
    let ginv = jet_inverse(&g, m).ok_or_else(|| singular(coords, &g))?;
    Ok((Tensor::from_vec(m, 2, g), Tensor::from_vec(m, 2, ginv)))
}

/// Christoffel symbols from metric and inverse jets.
pub fn christoffel_from(g: &Tensor<Jet>, ginv: &Tensor<Jet>) -> Tensor<Jet> {
    let m = g.dim;
    let order = g.order();
    assert!(order >= 1, "connection needs first derivatives of the metric");
    let ginv_low: Vec<Jet> = ginv.data.iter().map(|j| j.truncate(order - 1)).collect();
    // dg[l][i][j] = ∂_l g_ij
    let mut dg = Vec::with_capacity(m * m * m);
    for l in 0..m {
        for k in 0..m * m {
            dg.push(g.data[k].derivative(l));
        }
    }
    let d = |l: usize, i: usize, j: usize| &dg[(l * m + i) * m + j];
    // first kind: Γ_lbc = ½(∂_b g_lc + ∂_c g_lb − ∂_l g_bc)
    let mut first: Vec<Jet> = Vec::with_capacity(m * m * m);
    for l in 0..m {
        for b in 0..m {
            for c in 0..m {
                if c < b {
                    let mirrored: Jet = first[(l * m + c) * m + b].clone();
                    first.push(mirrored);
                } else {
                    first.push(&(&(d(b, l, c) + d(c, l, b)) - d(l, b, c)) * 0.5);
                }
            }
        }
    }
    let zero = ginv_low[0].lift(0.0).truncate(order - 1);
    let mut gamma = Tensor::filled(m, 3, zero.clone());
    for a in 0..m {
        for b in 0..m {
            for c in b..m {
                let mut acc = zero.clone();
                for l in 0..m {
                    acc = &acc + &(&ginv_low[a * m + l] * &first[(l * m + b) * m + c]);
                }
                gamma.set(&[a, c, b], acc.clone());
                gamma.set(&[a, b, c], acc);
            }
        }
    }
    gamma
}

/// Full curvature jets from metric jets of order ≥ 2.
pub fn curvature_from(g: Tensor<Jet>, ginv: Tensor<Jet>) -> CurvatureJets {
    let m = g.dim;
    let order = g.order();
    assert!(order >= 2, "curvature needs second derivatives of the metric");
    let gamma = christoffel_from(&g, &ginv);
    let low = order - 2;
    let gamma_low: Vec<Jet> = gamma.data.iter().map(|j| j.truncate(low)).collect();
    let gl = |a: usize, b: usize, c: usize| &gamma_low[(a * m + b) * m + c];
    // dgamma[c][a][d][b] = ∂_c Γ^a_db
    let mut dgamma = Vec::with_capacity(m * m * m * m);
    for c in 0..m {
        for k in 0..m * m * m {
            dgamma.push(gamma.data[k].derivative(c));
        }
    }
    let dgm = |c: usize, a: usize, d: usize, b: usize| &dgamma[((c * m + a) * m + d) * m + b];
    let zero = gamma_low[0].lift(0.0).truncate(low);
    let mut r_up = Tensor::filled(m, 4, zero.clone());
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in (c + 1)..m {
                    let mut acc = dgm(c, a, d, b) - dgm(d, a, c, b);
                    for e in 0..m {
                        acc = &acc + &(&(gl(a, c, e) * gl(e, d, b)) - &(gl(a, d, e) * gl(e, c, b)));
                    }
                    r_up.set(&[a, b, d, c], -&acc);
                    r_up.set(&[a, b, c, d], acc);
                }
            }
        }
    }
    let g_low: Vec<Jet> = g.data.iter().map(|j| j.truncate(low)).collect();
    let ginv_low: Vec<Jet> = ginv.data.iter().map(|j| j.truncate(low)).collect();
    let mut riemann = Tensor::filled(m, 4, zero.clone());
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in (c + 1)..m {
                    let mut acc = zero.clone();
                    for e in 0..m {
                        acc = &acc + &(&g_low[a * m + e] * r_up.get(&[e, b, c, d]));
                    }
                    riemann.set(&[a, b, d, c], -&acc);
                    riemann.set(&[a, b, c, d], acc);
                }
            }
        }
    }
    let mut ricci = Tensor::filled(m, 2, zero.clone());
    for b in 0..m {
        for d in 0..m {
            let mut acc = zero.clone();
            for a in 0..m {
                acc = &acc + r_up.get(&[a, b, a, d]);
            }
            ricci.set(&[b, d], acc);
        }
    }
    let mut scalar = zero;
    for b in 0..m {
        for d in 0..m {
            scalar = &scalar + &(&ginv_low[b * m + d] * ricci.get(&[b, d]));
        }
    }
    CurvatureJets { dim: m, g, ginv, christoffel: gamma, riemann_up: r_up, riemann, ricci, scalar }
}

/// Curvature jets at `coords` from metric jets of `order` (at least 2).
pub fn curvature_jets(patch: &MetricPatch, coords: &[f64], order: usize) -> Result<CurvatureJets> {
    if patch.max_order() < order {
        return Err(GeometryError::JetUnavailable { requested: order, available: patch.max_order() });
    }
    let (g, ginv) = metric_jets(patch, coords, order)?;
    Ok(curvature_from(g, ginv))
}

/// Connection coefficients at a point.
pub fn christoffel_at(patch: &MetricPatch, coords: &[f64]) -> Result<Tensor<f64>> {
    if patch.max_order() < 1 {
        return Err(GeometryError::JetUnavailable { requested: 1, available: patch.max_order() });
    }
    let (g, ginv) = metric_jets(patch, coords, 1)?;
    Ok(christoffel_from(&g, &ginv).values())
}

/// Connection and curvature at a chart point.
pub fn curvature(patch: &MetricPatch, x: &super::chart::ChartPoint) -> Result<CurvatureAtPoint> {
    x.validate(&patch.chart_id, &patch.domain)?;
    let c = curvature_jets(patch, &x.coords, 2)?;
    Ok(c.at_point())
}

impl CurvatureJets {
    pub fn at_point(&self) -> CurvatureAtPoint {
        CurvatureAtPoint {
            christoffel: self.christoffel.values(),
            riemann_lowered: self.riemann.values(),
            ricci: self.ricci.values(),
            scalar: self.scalar.value(),
        }
    }
}

impl CurvatureAtPoint {
    /// Largest violation of the algebraic curvature identities: connection
    /// symmetry, Riemann pair symmetries, first Bianchi identity and the trace.
    pub fn identity_residual(&self, ginv: &nalgebra::DMatrix<f64>) -> f64 {
        let m = self.ricci.dim;
        let r = &self.riemann_lowered;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    worst = worst.max((self.christoffel.get(&[a, b, c]) - self.christoffel.get(&[a, c, b])).abs());
                    for d in 0..m {
                        let v = *r.get(&[a, b, c, d]);
                        worst = worst.max((v + r.get(&[b, a, c, d])).abs());
                        worst = worst.max((v + r.get(&[a, b, d, c])).abs());
                        worst = worst.max((v - r.get(&[c, d, a, b])).abs());
                        worst = worst.max((v + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c])).abs());
                    }
                }
            }
        }
        let mut trace = 0.0;
        for b in 0..m {
            for d in 0..m {
                trace += ginv[(b, d)] * self.ricci.get(&[b, d]);
            }
        }
        worst.max((trace - self.scalar).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::chart::Domain;
    use crate::kernel::patch::flat_patch;
    use approx::assert_relative_eq;

    fn constant_curvature(m: usize, k: f64) -> MetricPatch {
        MetricPatch::from_fn(m, (m, 0), Domain::new(vec![(-1.0, 1.0); m]), vec![(-0.5, 0.5); m], "cc", move |x| {
            let mut r2 = x[0].lift(0.0);
            for xi in x {
                r2 = &r2 + &(xi * xi);
            }
            let f = (r2 * (k / 4.0) + 1.0).powi(-2);
            let z = &f * 0.0;
            let mut g = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    g.push(if i == j { f.clone() } else { z.clone() });
                }
            }
            Ok(g)
        })
    }

    /// Independent oracle: scalar curvature of `e^{2φ}δ` from central
    /// differences of φ, `Sc = −e^{−2φ}(2(m−1)Δφ + (m−2)(m−1)|∇φ|²)`.
    fn conformal_scalar_fd(m: usize, k: f64, x: &[f64]) -> f64 {
        let phi = |p: &[f64]| -((1.0 + k * p.iter().map(|v| v * v).sum::<f64>() / 4.0).ln());
        let h = 1e-4;
        let mut lap = 0.0;
        let mut grad2 = 0.0;
        for i in 0..m {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            lap += (phi(&xp) - 2.0 * phi(x) + phi(&xm)) / (h * h);
            grad2 += ((phi(&xp) - phi(&xm)) / (2.0 * h)).powi(2);
        }
        let mf = m as f64;
        -(-2.0 * phi(x)).exp() * (2.0 * (mf - 1.0) * lap + (mf - 2.0) * (mf - 1.0) * grad2)
    }

    #[test]
    fn flat_space_has_no_curvature() {
        let c = curvature_jets(&flat_patch(3), &[0.1, 0.2, 0.3], 2).unwrap();
        assert_eq!(c.riemann.values().max_abs(), 0.0);
        assert_eq!(c.scalar.value(), 0.0);
    }

    #[test]
    fn sphere_scalar_curvature_matches_oracle() {
        let pts = [[0.1, -0.3, 0.2], [0.4, 0.1, -0.2], [-0.35, 0.25, 0.05], [0.0, 0.0, 0.45], [0.2, 0.2, 0.2]];
        for k in [1.0, 0.5] {
            let p = constant_curvature(3, k);
            for x in &pts {
                let c = curvature_jets(&p, x, 2).unwrap();
                let oracle = conformal_scalar_fd(3, k, x);
                assert!((oracle - 6.0 * k).abs() < 1e-5, "oracle {oracle}");
                assert_relative_eq!(c.scalar.value(), 6.0 * k, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hyperbolic_three_space_ricci() {
        let p = constant_curvature(3, -1.0);
        for x in [[0.1, 0.2, -0.3], [-0.4, 0.1, 0.05]] {
            let c = curvature_jets(&p, &x, 2).unwrap();
            let oracle = conformal_scalar_fd(3, -1.0, &x);
            assert!((oracle + 6.0).abs() < 1e-5);
            let g = c.g.values();
            let ric = c.ricci.values();
            for (r, gv) in ric.data.iter().zip(&g.data) {
                assert!((r + 2.0 * gv).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn constant_curvature_riemann_form() {
        let p = constant_curvature(2, 1.0);
        let c = curvature_jets(&p, &[0.3, -0.2], 2).unwrap();
        let g = c.g.values();
        let expected = g.get(&[0, 0]) * g.get(&[1, 1]) - g.get(&[0, 1]).powi(2);
        assert_relative_eq!(*c.riemann.values().get(&[0, 1, 0, 1]), expected, epsilon = 1e-12);
    }

    #[test]
    fn identities_hold() {
        let p = constant_curvature(4, 0.7);
        let c = curvature_jets(&p, &[0.1, 0.2, -0.1, 0.3], 2).unwrap();
        let ginv = c.ginv.values().matrix();
        assert!(c.at_point().identity_residual(&ginv) < 1e-12);
    }

    #[test]
    fn order_one_metric_cannot_give_curvature() {
        let fd = constant_curvature(2, 1.0).finite_difference(1e-3);
        assert!(curvature_jets(&fd, &[0.0, 0.0], 3).is_err());
    }
}
