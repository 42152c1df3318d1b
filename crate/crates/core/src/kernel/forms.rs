//! Differential forms as fully antisymmetric covariant tensors.
//!
//! A `p`-form on an `m`-dimensional chart stores all `m^p` components. The
//! wedge product, exterior derivative and interior product use the
//! conventions
//! `(α∧β)_{i₀…} = Σ_shuffles sgn·α_{…}β_{…}`,
//! `(dω)_{i₀…i_p} = Σ_k (−1)^k ∂_{i_k} ω_{i₀…î_k…i_p}`,
//! `(ι_X ω)_{i₂…i_p} = X^i ω_{i i₂…i_p}`,
//! so that `dx¹∧dx²` has `(1,2)` component `1` and `d(f dg) = df∧dg`.

use std::fmt;
use std::sync::Arc;

use super::conformal::covariant_derivative;
use super::curvature::{christoffel_from, metric_jets};
use super::jet::{eval_with_partials, Jet};
use super::lie::VectorField;
use super::patch::MetricPatch;
use super::tensor::{combinations, jet_determinant, multi_indices, permutation_sign, Tensor};
use crate::error::{GeometryError, Result};

/// A scalar function of the coordinate jets.
pub type JetFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;

type FormFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// A smooth `p`-form on a chart.
#[derive(Clone)]
pub struct FormField {
    pub dim: usize,
    pub degree: usize,
    f: Arc<FormFn>,
}

impl fmt::Debug for FormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FormField(degree {} on dim {})", self.degree, self.dim)
    }
}

impl FormField {
    /// `f` returns all `dim^degree` components; it must be antisymmetric.
    pub fn new(dim: usize, degree: usize, f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> FormField {
        FormField { dim, degree, f: Arc::new(f) }
    }

    /// A form given by its coefficients on `dx^{i₁}∧…∧dx^{i_p}`, `i₁<…<i_p`,
    /// listed in the order of [`combinations`].
    pub fn from_basis(dim: usize, degree: usize, coeffs: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> FormField {
        FormField::new(dim, degree, move |x| {
            let c = coeffs(x)?;
            let combos = combinations(dim, degree);
            debug_assert_eq!(c.len(), combos.len());
            Ok(fill_antisymmetric(dim, degree, &x[0].lift(0.0), |sorted| {
                let k = combos.iter().position(|cmb| cmb == sorted).expect("sorted index tuple");
                c[k].clone()
            }))
        })
    }

    pub fn zero(dim: usize, degree: usize) -> FormField {
        FormField::new(dim, degree, move |x| Ok(vec![x[0].lift(0.0); dim.pow(degree as u32)]))
    }

    pub fn components_on(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        (self.f)(x)
    }

    pub fn jets(&self, coords: &[f64], order: usize) -> Result<Tensor<Jet>> {
        let data = self.components_on(&Jet::seed(coords, order))?;
        Ok(Tensor::from_vec(self.dim, self.degree, data))
    }

    pub fn eval(&self, coords: &[f64]) -> Result<Tensor<f64>> {
        Ok(self.jets(coords, 0)?.values())
    }

    /// `c·ω`.
    pub fn scale(&self, c: f64) -> FormField {
        let inner = self.clone();
        FormField::new(self.dim, self.degree, move |x| Ok(inner.components_on(x)?.iter().map(|j| j * c).collect()))
    }

    /// `f·ω` for a scalar function `f`.
    pub fn multiply(&self, f: JetFn) -> FormField {
        let inner = self.clone();
        FormField::new(self.dim, self.degree, move |x| {
            let s = f(x);
            Ok(inner.components_on(x)?.iter().map(|j| j * &s).collect())
        })
    }

    pub fn add(&self, other: &FormField) -> Result<FormField> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(GeometryError::DegreeMismatch(format!(
                "cannot add a {}-form on dim {} to a {}-form on dim {}",
                self.degree, self.dim, other.degree, other.dim
            )));
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(FormField::new(self.dim, self.degree, move |x| {
            Ok(a.components_on(x)?.iter().zip(b.components_on(x)?).map(|(u, v)| u + &v).collect())
        }))
    }

    /// Pullback under the projection of a product chart onto the factor whose
    /// coordinates start at `offset`.
    pub fn extend(&self, total_dim: usize, offset: usize) -> FormField {
        let inner = self.clone();
        let (dim, degree) = (self.dim, self.degree);
        FormField::new(total_dim, degree, move |x| {
            let c = inner.components_on(&x[offset..offset + dim])?;
            let zero = x[0].lift(0.0).truncate(c.first().map(Jet::order).unwrap_or(x[0].order()));
            let mut out = vec![zero; total_dim.pow(degree as u32)];
            for ix in multi_indices(dim, degree) {
                let src = ix.iter().fold(0, |a, &i| a * dim + i);
                let dst = ix.iter().fold(0, |a, &i| a * total_dim + i + offset);
                out[dst] = c[src].clone();
            }
            Ok(out)
        })
    }
}

/// Builds a full antisymmetric component list from its values on sorted index tuples.
pub fn fill_antisymmetric(dim: usize, degree: usize, zero: &Jet, mut on_sorted: impl FnMut(&[usize]) -> Jet) -> Vec<Jet> {
    let total = dim.pow(degree as u32);
    let mut cache: Vec<Option<Jet>> = vec![None; total];
    let mut out = Vec::with_capacity(total);
    let mut order = zero.order();
    for ix in multi_indices(dim, degree) {
        let sign = permutation_sign(&ix);
        if sign == 0 {
            out.push(None);
            continue;
        }
        let mut sorted = ix.clone();
        sorted.sort_unstable();
        let key = sorted.iter().fold(0, |a, &i| a * dim + i);
        if cache[key].is_none() {
            let v = on_sorted(&sorted);
            order = order.min(v.order());
            cache[key] = Some(v);
        }
        let v = cache[key].as_ref().expect("cached");
        out.push(Some(if sign > 0 { v.clone() } else { -v }));
    }
    let z = zero.truncate(order);
    out.into_iter().map(|v| v.map(|j| j.truncate(order)).unwrap_or_else(|| z.clone())).collect()
}

fn offset_of(dim: usize, ix: &[usize]) -> usize {
    ix.iter().fold(0, |a, &i| a * dim + i)
}

/// Wedge product of component lists.
pub fn wedge_components(a: &[Jet], p: usize, b: &[Jet], q: usize, dim: usize, zero: &Jet) -> Vec<Jet> {
    let positions = combinations(p + q, p);
    fill_antisymmetric(dim, p + q, zero, |ix| {
        let mut acc = zero.clone();
        for pos in &positions {
            let left: Vec<usize> = pos.iter().map(|&k| ix[k]).collect();
            let right: Vec<usize> = (0..p + q).filter(|k| !pos.contains(k)).map(|k| ix[k]).collect();
            let mut perm = pos.clone();
            perm.extend((0..p + q).filter(|k| !pos.contains(k)));
            let sign = permutation_sign(&perm) as f64;
            acc = &acc + &(&(&a[offset_of(dim, &left)] * &b[offset_of(dim, &right)]) * sign);
        }
        acc
    })
}

pub fn wedge(a: &FormField, b: &FormField) -> Result<FormField> {
    if a.dim != b.dim {
        return Err(GeometryError::DegreeMismatch(format!("wedge of forms on dims {} and {}", a.dim, b.dim)));
    }
    if a.degree + b.degree > a.dim {
        return Err(GeometryError::DegreeMismatch(format!("wedge degree {} exceeds dimension {}", a.degree + b.degree, a.dim)));
    }
    let (fa, fb) = (a.clone(), b.clone());
    let (p, q, dim) = (a.degree, b.degree, a.dim);
    Ok(FormField::new(dim, p + q, move |x| {
        let ca = fa.components_on(x)?;
        let cb = fb.components_on(x)?;
        Ok(wedge_components(&ca, p, &cb, q, dim, &x[0].lift(0.0)))
    }))
}

/// Exterior derivative.
pub fn exterior_d(form: &FormField) -> Result<FormField> {
    if form.degree >= form.dim {
        return Err(GeometryError::DegreeMismatch(format!("d of a {}-form on dim {} has no components", form.degree, form.dim)));
    }
    let inner = form.clone();
    let (dim, p) = (form.dim, form.degree);
    Ok(FormField::new(dim, p + 1, move |x| {
        let (_, parts) = eval_with_partials(x, |y| inner.components_on(y))?;
        let zero = x[0].lift(0.0);
        Ok(fill_antisymmetric(dim, p + 1, &zero, |ix| {
            let mut acc = zero.clone();
            for k in 0..=p {
                let rest: Vec<usize> = ix.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
                let term = &parts[ix[k]][offset_of(dim, &rest)];
                acc = if k % 2 == 0 { &acc + term } else { &acc - term };
            }
            acc
        }))
    }))
}

/// Interior product of component lists: `X^i ω_{i…}`.
pub fn interior_components(v: &[Jet], form: &[Jet], p: usize, dim: usize) -> Vec<Jet> {
    let rest = dim.pow(p as u32 - 1);
    (0..rest)
        .map(|r| {
            let mut acc = v[0].lift(0.0);
            for (i, vi) in v.iter().enumerate() {
                acc = &acc + &(vi * &form[i * rest + r]);
            }
            acc
        })
        .collect()
}

pub fn interior(v: &VectorField, form: &FormField) -> Result<FormField> {
    if form.degree == 0 {
        return Err(GeometryError::DegreeMismatch("interior product of a 0-form".into()));
    }
    let inner = form.clone();
    let v = Arc::clone(v);
    let (dim, p) = (form.dim, form.degree);
    Ok(FormField::new(dim, p - 1, move |x| {
        let c = inner.components_on(x)?;
        Ok(interior_components(&v(x), &c, p, dim))
    }))
}

/// `√|det g| dx¹∧…∧dxᵐ`.
pub fn volume_form(patch: &MetricPatch) -> FormField {
    let p = patch.clone();
    let m = patch.dim();
    FormField::from_basis(m, m, move |x| {
        let g = p.components_on(x)?;
        let det = jet_determinant(&g, m, &x[0]);
        let vol = if det.value() < 0.0 { (-&det).sqrt() } else { det.sqrt() };
        Ok(vec![vol])
    })
}

/// Hodge star: `(⋆ω)_J = (1/p!) √|g| ω^{I} ε_{IJ}`.
pub fn hodge_star(patch: &MetricPatch, form: &FormField) -> Result<FormField> {
    if !patch.oriented {
        return Err(GeometryError::OrientationUnset(patch.label.clone()));
    }
    if form.dim != patch.dim() {
        return Err(GeometryError::DegreeMismatch(format!("form lives on dim {}, patch has dim {}", form.dim, patch.dim())));
    }
    let p = patch.clone();
    let inner = form.clone();
    let (m, deg) = (form.dim, form.degree);
    Ok(FormField::new(m, m - deg, move |x| {
        let g = p.components_on(x)?;
        let ginv = super::tensor::jet_inverse(&g, m)
            .ok_or_else(|| GeometryError::SingularMetric { point: x.iter().map(Jet::value).collect(), det: 0.0 })?;
        let det = jet_determinant(&g, m, &x[0]);
        let vol = if det.value() < 0.0 { (-&det).sqrt() } else { det.sqrt() };
        let w = inner.components_on(x)?;
        let zero = x[0].lift(0.0);
        let all: Vec<Vec<usize>> = multi_indices(m, deg).collect();
        Ok(fill_antisymmetric(m, m - deg, &zero, |jx| {
            let ix: Vec<usize> = (0..m).filter(|i| !jx.contains(i)).collect();
            let mut perm = ix.clone();
            perm.extend_from_slice(jx);
            let sign = permutation_sign(&perm) as f64;
            let mut raised = zero.clone();
            for a in &all {
                let mut term = w[offset_of(m, a)].clone();
                if term.coeffs().iter().all(|&c| c == 0.0) {
                    continue;
                }
                for (slot, &ai) in a.iter().enumerate() {
                    term = &term * &ginv[ix[slot] * m + ai];
                }
                raised = &raised + &term;
            }
            &(&raised * &vol) * sign
        }))
    }))
}

/// `∇ω` as jets of order `order − 1`, derivative index first.
pub fn covariant_derivative_form(patch: &MetricPatch, form: &FormField, coords: &[f64], order: usize) -> Result<Tensor<Jet>> {
    let (g, ginv) = metric_jets(patch, coords, order)?;
    let gamma = christoffel_from(&g, &ginv);
    let w = form.jets(coords, order)?;
    Ok(covariant_derivative(&w, &gamma))
}

/// Pointwise squared norm `(1/p!) ω_{I} ω^{I}` at `coords`.
pub fn form_norm_squared(patch: &MetricPatch, form: &FormField, coords: &[f64]) -> Result<f64> {
    let g = patch.matrix(coords)?;
    let ginv = super::patch::invert_checked(&g, coords)?;
    let w = form.eval(coords)?;
    let m = form.dim;
    let p = form.degree;
    let all: Vec<Vec<usize>> = multi_indices(m, p).collect();
    let mut total = 0.0;
    for i in &all {
        let wi = w.get(i);
        if *wi == 0.0 {
            continue;
        }
        for j in &all {
            let wj = w.get(j);
            if *wj == 0.0 {
                continue;
            }
            let mut prod = wi * wj;
            for k in 0..p {
                prod *= ginv[(i[k], j[k])];
            }
            total += prod;
        }
    }
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    Ok(total / fact)
}

/// Operations offered by [`form_calculus`].
#[derive(Clone)]
pub enum FormOp {
    ExteriorD(FormField),
    CovariantD(FormField),
    HodgeStar(FormField),
    InteriorProduct(VectorField, FormField),
    VolumeForm,
}

/// Evaluates one form operation at a point. `CovariantD` returns the rank-`p+1`
/// tensor `∇ω` (not antisymmetric); every other variant returns a form.
pub fn form_calculus(patch: &MetricPatch, op: &FormOp, coords: &[f64]) -> Result<Tensor<f64>> {
    let check = |f: &FormField| {
        if f.dim != patch.dim() {
            Err(GeometryError::DegreeMismatch(format!("form on dim {} used on dim {}", f.dim, patch.dim())))
        } else {
            Ok(())
        }
    };
    match op {
        FormOp::ExteriorD(f) => {
            check(f)?;
            exterior_d(f)?.eval(coords)
        }
        FormOp::CovariantD(f) => {
            check(f)?;
            Ok(covariant_derivative_form(patch, f, coords, 1)?.values())
        }
        FormOp::HodgeStar(f) => hodge_star(patch, f)?.eval(coords),
        FormOp::InteriorProduct(v, f) => {
            check(f)?;
            interior(v, f)?.eval(coords)
        }
        FormOp::VolumeForm => volume_form(patch).eval(coords),
    }
}
