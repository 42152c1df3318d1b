//! Schouten, Cotton, Weyl and Bach tensors.
//!
//! `P = (Ric − Sc/(2(m−1)) g)/(m−2)`, `C_abc = ∇_a P_bc − ∇_b P_ac`,
//! `W = R − P⊙g` with `(P⊙g)_abcd = P_ac g_bd + P_bd g_ac − P_ad g_bc − P_bc g_ad`,
//! and in dimension four `B_ab = ∇^c C_cab + P^{cd} W_cabd`.

use super::curvature::{curvature_jets, CurvatureJets};
use super::jet::Jet;
use super::patch::MetricPatch;
use super::tensor::{multi_indices, Tensor};
use crate::error::{GeometryError, Result};

/// `∇T` for a covariant tensor given as jets; the derivative index comes first.
pub fn covariant_derivative(t: &Tensor<Jet>, gamma: &Tensor<Jet>) -> Tensor<Jet> {
    let m = t.dim;
    let order = t.order().min(gamma.order() + 1);
    assert!(order >= 1, "covariant derivative needs a first-order jet");
    let out_order = order - 1;
    let zero = t.data[0].lift(0.0).truncate(out_order);
    let gam: Vec<Jet> = gamma.data.iter().map(|j| j.truncate(out_order)).collect();
    let tl: Vec<Jet> = t.data.iter().map(|j| j.truncate(out_order)).collect();
    let mut out = Tensor::filled(m, t.rank + 1, zero.clone());
    for ix in multi_indices(m, t.rank + 1) {
        let a = ix[0];
        let rest = &ix[1..];
        let mut acc = t.get(rest).derivative(a).truncate(out_order);
        let mut shifted = rest.to_vec();
        for slot in 0..t.rank {
            let orig = rest[slot];
            for l in 0..m {
                shifted[slot] = l;
                let g = &gam[(l * m + a) * m + orig];
                acc = &acc - &(g * &tl[t.offset(&shifted)]);
            }
            shifted[slot] = orig;
        }
        out.set(&ix, acc);
    }
    out
}

fn contract_metric_product(p: &Tensor<Jet>, g: &Tensor<Jet>, a: usize, b: usize, c: usize, d: usize) -> Jet {
    let term = |x: [usize; 2], y: [usize; 2]| p.get(&x) * g.get(&y);
    &(&(&term([a, c], [b, d]) + &term([b, d], [a, c])) - &term([a, d], [b, c])) - &term([b, c], [a, d])
}

/// Conformal curvature quantities as jets.
#[derive(Debug, Clone)]
pub struct ConformalJets {
    pub schouten: Tensor<Jet>,
    pub cotton: Tensor<Jet>,
    pub weyl: Tensor<Jet>,
    pub bach: Option<Tensor<Jet>>,
}

/// Point values; `bach` only in dimension four.
#[derive(Debug, Clone)]
pub struct ConformalCurvatureAtPoint {
    pub schouten: Tensor<f64>,
    pub cotton: Tensor<f64>,
    pub weyl_lowered: Tensor<f64>,
    pub bach: Option<Tensor<f64>>,
}

/// Schouten, Cotton and Weyl (and Bach in dimension four when the jets reach order four).
pub fn conformal_from(c: &CurvatureJets) -> ConformalJets {
    let m = c.dim;
    let mf = m as f64;
    let low = c.ricci.order();
    let g: Tensor<Jet> = c.g.map(|j| j.truncate(low));
    let ginv: Tensor<Jet> = c.ginv.map(|j| j.truncate(low));
    let j_scalar = &c.scalar / (2.0 * (mf - 1.0));
    let mut schouten = c.ricci.clone();
    for (p, gv) in schouten.data.iter_mut().zip(&g.data) {
        *p = &(&*p - &(&j_scalar * gv)) / (mf - 2.0);
    }
    let mut weyl = c.riemann.clone();
    for ix in multi_indices(m, 4) {
        let (a, b, cc, d) = (ix[0], ix[1], ix[2], ix[3]);
        let pg = contract_metric_product(&schouten, &g, a, b, cc, d);
        let w = c.riemann.get(&ix) - &pg;
        weyl.set(&ix, w);
    }
    let (cotton, bach) = if low >= 1 {
        let dp = covariant_derivative(&schouten, &c.christoffel);
        let zero = dp.data[0].lift(0.0);
        let mut cotton = Tensor::filled(m, 3, zero);
        for ix in multi_indices(m, 3) {
            let (a, b, cc) = (ix[0], ix[1], ix[2]);
            cotton.set(&ix, dp.get(&[a, b, cc]) - dp.get(&[b, a, cc]));
        }
        let bach = if m == 4 && low >= 2 { Some(bach_from(&cotton, &schouten, &weyl, &ginv, &c.christoffel)) } else { None };
        (cotton, bach)
    } else {
        (Tensor::filled(m, 3, c.scalar.lift(f64::NAN).truncate(0)), None)
    };
    ConformalJets { schouten, cotton, weyl, bach }
}

fn bach_from(cotton: &Tensor<Jet>, schouten: &Tensor<Jet>, weyl: &Tensor<Jet>, ginv: &Tensor<Jet>, gamma: &Tensor<Jet>) -> Tensor<Jet> {
    let m = cotton.dim;
    let dc = covariant_derivative(cotton, gamma);
    let order = dc.order();
    let gi: Vec<Jet> = ginv.data.iter().map(|j| j.truncate(order)).collect();
    let zero = dc.data[0].lift(0.0);
    // P^{cd}
    let mut p_up = vec![zero.clone(); m * m];
    for c in 0..m {
        for d in 0..m {
            let mut acc = zero.clone();
            for k in 0..m {
                for l in 0..m {
                    acc = &acc + &(&(&gi[c * m + k] * &gi[d * m + l]) * &schouten.get(&[k, l]).truncate(order));
                }
            }
            p_up[c * m + d] = acc;
        }
    }
    let mut bach = Tensor::filled(m, 2, zero.clone());
    for a in 0..m {
        for b in 0..m {
            let mut acc = zero.clone();
            for c in 0..m {
                for e in 0..m {
                    acc = &acc + &(&gi[c * m + e] * dc.get(&[e, c, a, b]));
                }
                for d in 0..m {
                    acc = &acc + &(&p_up[c * m + d] * &weyl.get(&[c, a, b, d]).truncate(order));
                }
            }
            bach.set(&[a, b], acc);
        }
    }
    bach
}

/// Schouten, Cotton, Weyl and (dimension four) Bach at a point.
pub fn conformal_curvature(patch: &MetricPatch, x: &super::chart::ChartPoint) -> Result<ConformalCurvatureAtPoint> {
    x.validate(&patch.chart_id, &patch.domain)?;
    let m = patch.dim();
    if m < 3 {
        return Err(GeometryError::DimensionUnsupported { required: ">= 3".into(), got: m });
    }
    let order = if m == 4 { 4 } else { 3 };
    let cj = curvature_jets(patch, &x.coords, order)?;
    let conf = conformal_from(&cj);
    Ok(ConformalCurvatureAtPoint {
        schouten: conf.schouten.values(),
        cotton: conf.cotton.values(),
        weyl_lowered: conf.weyl.values(),
        bach: conf.bach.as_ref().map(Tensor::values),
    })
}

/// Bach tensor at a point of a four-dimensional patch.
pub fn bach_at(patch: &MetricPatch, coords: &[f64]) -> Result<Tensor<f64>> {
    if patch.dim() != 4 {
        return Err(GeometryError::DimensionUnsupported { required: "4".into(), got: patch.dim() });
    }
    let cj = curvature_jets(patch, coords, 4)?;
    Ok(conformal_from(&cj).bach.expect("order-4 jets in dimension 4 give Bach").values())
}

/// Largest entry of the trace `g^{ac} W_abcd`.
pub fn weyl_trace_residual(weyl: &Tensor<f64>, ginv: &nalgebra::DMatrix<f64>) -> f64 {
    let m = weyl.dim;
    let mut worst: f64 = 0.0;
    for b in 0..m {
        for d in 0..m {
            let mut t = 0.0;
            for a in 0..m {
                for c in 0..m {
                    t += ginv[(a, c)] * weyl.get(&[a, b, c, d]);
                }
            }
            worst = worst.max(t.abs());
        }
    }
    worst
}

/// `|W|² δ^a_b − 4 W^{acde} W_bcde`, largest entry; vanishes in dimension four.
pub fn quartic_identity_residual(weyl: &Tensor<f64>, ginv: &nalgebra::DMatrix<f64>) -> f64 {
    let m = weyl.dim;
    let raised = raise_all(weyl, ginv);
    let mut norm2 = 0.0;
    for (u, d) in raised.data.iter().zip(&weyl.data) {
        norm2 += u * d;
    }
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut q = 0.0;
            for c in 0..m {
                for d in 0..m {
                    for e in 0..m {
                        q += raised.get(&[a, c, d, e]) * weyl.get(&[b, c, d, e]);
                    }
                }
            }
            let delta = if a == b { norm2 } else { 0.0 };
            worst = worst.max((delta - 4.0 * q).abs());
        }
    }
    worst
}

fn raise_all(t: &Tensor<f64>, ginv: &nalgebra::DMatrix<f64>) -> Tensor<f64> {
    let m = t.dim;
    let mut cur = t.clone();
    for slot in 0..t.rank {
        let mut next = cur.clone();
        for ix in multi_indices(m, t.rank) {
            let mut acc = 0.0;
            let mut j = ix.clone();
            for l in 0..m {
                j[slot] = l;
                acc += ginv[(ix[slot], l)] * cur.get(&j);
            }
            next.set(&ix, acc);
        }
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::chart::Domain;
    use crate::kernel::patch::flat_patch;
    use crate::kernel::tensor::Tensor;

    fn warped4() -> MetricPatch {
        // A generic, non-Einstein, non-conformally-flat metric.
        MetricPatch::from_fn(4, (4, 0), Domain::new(vec![(-1.0, 1.0); 4]), vec![(-0.4, 0.4); 4], "w4", |x| {
            let z = x[0].lift(0.0);
            let mut g = vec![z.clone(); 16];
            g[0] = &(&x[1] * &x[1]) * 0.3 + 1.0;
            g[5] = (&x[0] * 0.5).exp();
            g[10] = &(&x[0] * &x[3]) * 0.2 + 1.5;
            g[15] = &x[1].sin() * 0.3 + 1.0;
            g[1] = &x[2] * 0.1;
            g[4] = g[1].clone();
            g[11] = &(&x[0] * &x[1]) * 0.05;
            g[14] = g[11].clone();
            Ok(g)
        })
    }

    fn s2_times_h2() -> MetricPatch {
        MetricPatch::from_fn(4, (4, 0), Domain::new(vec![(-1.0, 1.0); 4]), vec![(-0.4, 0.4); 4], "s2h2", |x| {
            let z = x[0].lift(0.0);
            let f1 = (&(&(&x[0] * &x[0]) + &(&x[1] * &x[1])) * 0.25 + 1.0).powi(-2);
            let f2 = (&(&(&x[2] * &x[2]) + &(&x[3] * &x[3])) * -0.25 + 1.0).powi(-2);
            let mut g = vec![z; 16];
            g[0] = f1.clone();
            g[5] = f1;
            g[10] = f2.clone();
            g[15] = f2;
            Ok(g)
        })
    }

    fn symmetric_part_gap(t: &Tensor<f64>) -> (f64, f64) {
        let mut asym: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for a in 0..t.dim {
            for b in 0..t.dim {
                asym = asym.max((t.get(&[a, b]) - t.get(&[b, a])).abs());
                scale = scale.max(t.get(&[a, b]).abs());
            }
        }
        (asym, scale)
    }

    #[test]
    fn bach_is_symmetric_and_tracefree_on_generic_metric() {
        let p = warped4();
        let x = [0.1, -0.2, 0.15, 0.05];
        let cj = curvature_jets(&p, &x, 4).unwrap();
        let conf = conformal_from(&cj);
        let bach = conf.bach.unwrap().values();
        let (asym, scale) = symmetric_part_gap(&bach);
        assert!(scale > 1e-3, "Bach should be nonzero here, got {scale}");
        assert!(asym < 1e-9 * scale.max(1.0), "asymmetric Bach: {asym} vs {scale}");
        let ginv = cj.ginv.values().matrix();
        let mut tr = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                tr += ginv[(a, b)] * bach.get(&[a, b]);
            }
        }
        assert!(tr.abs() < 1e-9, "trace {tr}");
    }

    #[test]
    fn weyl_is_tracefree_and_satisfies_quartic_identity() {
        let p = warped4();
        let x = [0.2, 0.1, -0.1, 0.3];
        let cj = curvature_jets(&p, &x, 2).unwrap();
        let conf = conformal_from(&cj);
        let w = conf.weyl.values();
        let ginv = cj.ginv.values().matrix();
        assert!(weyl_trace_residual(&w, &ginv) < 1e-12);
        assert!(w.max_abs() > 1e-3);
        assert!(quartic_identity_residual(&w, &ginv) < 1e-10);
    }

    #[test]
    fn flat_and_sphere_have_no_weyl() {
        let c = conformal_curvature(&flat_patch(4), &flat_patch(4).point(vec![0.1, 0.2, 0.3, 0.4])).unwrap();
        assert_eq!(c.weyl_lowered.max_abs(), 0.0);
        assert_eq!(c.bach.unwrap().max_abs(), 0.0);
        let s4 = MetricPatch::from_fn(4, (4, 0), Domain::new(vec![(-1.0, 1.0); 4]), vec![(-0.4, 0.4); 4], "s4", |x| {
            let mut r2 = x[0].lift(0.0);
            for xi in x {
                r2 = &r2 + &(xi * xi);
            }
            let f = (r2 * 0.25 + 1.0).powi(-2);
            let z = &f * 0.0;
            Ok((0..16).map(|k| if k % 5 == 0 { f.clone() } else { z.clone() }).collect())
        });
        let c = conformal_curvature(&s4, &s4.point(vec![0.1, -0.2, 0.3, 0.1])).unwrap();
        assert!(c.weyl_lowered.max_abs() < 1e-8);
    }

    #[test]
    fn product_of_opposite_curvature_surfaces_is_bach_flat() {
        let p = s2_times_h2();
        let b = bach_at(&p, &[0.2, -0.1, 0.3, 0.25]).unwrap();
        assert!(b.max_abs() < 1e-10, "{}", b.max_abs());
    }

    #[test]
    fn low_dimension_is_rejected() {
        let p = flat_patch(2);
        assert!(matches!(conformal_curvature(&p, &p.point(vec![0.0, 0.0])), Err(GeometryError::DimensionUnsupported { .. })));
    }
}
