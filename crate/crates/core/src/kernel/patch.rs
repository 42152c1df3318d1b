//! Chart-local metrics with jet providers.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::chart::{ChartPoint, Domain, EXCLUSION_BAND};
use super::jet::{eval_with_partials, Jet, JetLayout};
use crate::error::{GeometryError, Result};

/// Below this `|det g|` a metric is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// Highest derivative order any provider is asked for.
pub const MAX_JET_ORDER: usize = 4;

/// A metric tensor field on a chart, evaluated on jets.
///
/// `components` receives coordinate jets and returns the `m×m` components in
/// row-major order. Evaluating on seeded variable jets of order `k` yields the
/// Taylor expansion of every component to order `k`.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>>;
    /// Largest jet order this field can supply.
    fn max_order(&self) -> usize {
        MAX_JET_ORDER
    }
}

type ComponentFn = dyn Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync;

/// A metric field given by a closed-form closure.
pub struct FnField {
    dim: usize,
    max_order: usize,
    f: Box<ComponentFn>,
}

impl FnField {
    pub fn new(dim: usize, f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static) -> FnField {
        FnField { dim, max_order: MAX_JET_ORDER, f: Box::new(f) }
    }
}

impl MetricField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        (self.f)(x)
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
}

/// A smooth coordinate map from a new chart into an old one, evaluated on jets.
pub type CoordMap = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

struct PullbackField {
    inner: Arc<dyn MetricField>,
    map: CoordMap,
    dim: usize,
}

impl MetricField for PullbackField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let (y, jac) = eval_with_partials(x, |v| Ok::<_, GeometryError>((self.map)(v)))?;
        let g = self.inner.components(&y)?;
        let m = self.inner.dim();
        let n = self.dim;
        let zero = x[0].lift(0.0).truncate(y.iter().map(Jet::order).min().unwrap_or(0));
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        // gj[a][j] = Σ_b g_ab ∂_j F^b
        let mut gj = vec![zero.clone(); m * n];
        for a in 0..m {
            for j in 0..n {
                let mut acc = zero.clone();
                for b in 0..m {
                    acc = &acc + &(&g[a * m + b] * &jac[j][b]);
                }
                gj[a * n + j] = acc;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    let mirrored: Jet = out[j * n + i].clone();
                    out.push(mirrored);
                    continue;
                }
                let mut acc = zero.clone();
                for a in 0..m {
                    acc = &acc + &(&jac[i][a] * &gj[a * n + j]);
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

struct BlockField {
    a: Arc<dyn MetricField>,
    b: Arc<dyn MetricField>,
}

impl MetricField for BlockField {
    fn dim(&self) -> usize {
        self.a.dim() + self.b.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let (ma, mb) = (self.a.dim(), self.b.dim());
        let ga = self.a.components(&x[..ma])?;
        let gb = self.b.components(&x[ma..])?;
        Ok(block_diagonal(&x[0], &[(ma, ga), (mb, gb)]))
    }

    fn max_order(&self) -> usize {
        self.a.max_order().min(self.b.max_order())
    }
}

/// Assembles a block-diagonal component list from square blocks.
pub fn block_diagonal(like: &Jet, blocks: &[(usize, Vec<Jet>)]) -> Vec<Jet> {
    let n: usize = blocks.iter().map(|(m, _)| m).sum();
    let order = blocks.iter().flat_map(|(_, b)| b.iter().map(Jet::order)).min().unwrap_or(like.order());
    let zero = like.lift(0.0).truncate(order);
    let mut out = vec![zero; n * n];
    let mut offset = 0;
    for (m, block) in blocks {
        for i in 0..*m {
            for j in 0..*m {
                out[(offset + i) * n + offset + j] = block[i * m + j].clone();
            }
        }
        offset += m;
    }
    out
}

struct ScaledField {
    inner: Arc<dyn MetricField>,
    alpha: f64,
}

impl MetricField for ScaledField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        Ok(self.inner.components(x)?.iter().map(|g| g * self.alpha).collect())
    }
    fn max_order(&self) -> usize {
        self.inner.max_order()
    }
}

/// Jets from central differences of component values: exact to second order
/// in the step, capped at order 2.
struct FiniteDifferenceField {
    inner: Arc<dyn MetricField>,
    step: f64,
}

impl FiniteDifferenceField {
    fn values(&self, p: &[f64]) -> Result<Vec<f64>> {
        let x = Jet::seed(p, 0);
        Ok(self.inner.components(&x)?.iter().map(Jet::value).collect())
    }
}

impl MetricField for FiniteDifferenceField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn components(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let n = x.len();
        let base: Vec<f64> = x.iter().map(Jet::value).collect();
        let order = x.iter().map(Jet::order).min().unwrap_or(0).min(2);
        let layout = JetLayout::get(n, 2);
        let h = self.step;
        let shifted = |moves: &[(usize, f64)]| {
            let mut p = base.clone();
            for &(i, d) in moves {
                p[i] += d;
            }
            self.values(&p)
        };
        let g0 = self.values(&base)?;
        let ncomp = g0.len();
        let mut coeffs = vec![vec![0.0; layout.len_to(2)]; ncomp];
        for (c, v) in coeffs.iter_mut().zip(&g0) {
            c[0] = *v;
        }
        let mut e = vec![0u8; n];
        for i in 0..n {
            let plus = shifted(&[(i, h)])?;
            let minus = shifted(&[(i, -h)])?;
            e[i] = 1;
            let first = layout.index_of(&e).expect("first-order monomial");
            e[i] = 2;
            let second = layout.index_of(&e).expect("second-order monomial");
            e[i] = 0;
            for k in 0..ncomp {
                coeffs[k][first] = (plus[k] - minus[k]) / (2.0 * h);
                coeffs[k][second] = (plus[k] - 2.0 * g0[k] + minus[k]) / (2.0 * h * h);
            }
            for j in (i + 1)..n {
                let pp = shifted(&[(i, h), (j, h)])?;
                let pm = shifted(&[(i, h), (j, -h)])?;
                let mp = shifted(&[(i, -h), (j, h)])?;
                let mm = shifted(&[(i, -h), (j, -h)])?;
                e[i] = 1;
                e[j] = 1;
                let mixed = layout.index_of(&e).expect("mixed monomial");
                e[i] = 0;
                e[j] = 0;
                for k in 0..ncomp {
                    coeffs[k][mixed] = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
                }
            }
        }
        let displacement: Vec<Jet> = x.iter().map(|j| j - j.value()).map(|j| j.truncate(order)).collect();
        Ok(coeffs.into_iter().map(|c| Jet::from_coeffs(layout, order, c).compose(&displacement)).collect())
    }

    fn max_order(&self) -> usize {
        2
    }
}

/// How residual tensors on this patch are normed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    /// Largest absolute component.
    Components,
    /// Largest eigenvalue magnitude of the tensor measured against the metric.
    Operator,
}

/// A pseudo-Riemannian metric on a coordinate chart.
#[derive(Clone)]
pub struct MetricPatch {
    field: Arc<dyn MetricField>,
    pub signature: (usize, usize),
    pub domain: Domain,
    /// Where seeded samples are drawn from; must sit inside `domain`.
    pub sample_box: Vec<(f64, f64)>,
    pub chart_id: String,
    pub label: String,
    pub norm: ResidualNorm,
    pub oriented: bool,
}

impl fmt::Debug for MetricPatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricPatch")
            .field("label", &self.label)
            .field("chart_id", &self.chart_id)
            .field("dim", &self.dim())
            .field("signature", &self.signature)
            .finish()
    }
}

impl MetricPatch {
    pub fn new(
        field: Arc<dyn MetricField>,
        signature: (usize, usize),
        domain: Domain,
        sample_box: Vec<(f64, f64)>,
        chart_id: impl Into<String>,
        label: impl Into<String>,
    ) -> MetricPatch {
        assert_eq!(signature.0 + signature.1, field.dim(), "signature does not match dimension");
        assert_eq!(domain.dim(), field.dim(), "domain does not match dimension");
        assert_eq!(sample_box.len(), field.dim(), "sample box does not match dimension");
        MetricPatch {
            field,
            signature,
            domain,
            sample_box,
            chart_id: chart_id.into(),
            label: label.into(),
            norm: ResidualNorm::Components,
            oriented: true,
        }
    }

    pub fn from_fn(
        dim: usize,
        signature: (usize, usize),
        domain: Domain,
        sample_box: Vec<(f64, f64)>,
        label: impl Into<String>,
        f: impl Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> MetricPatch {
        let label = label.into();
        MetricPatch::new(Arc::new(FnField::new(dim, f)), signature, domain, sample_box, label.clone(), label)
    }

    pub fn with_norm(mut self, norm: ResidualNorm) -> MetricPatch {
        self.norm = norm;
        self
    }

    pub fn with_orientation(mut self, oriented: bool) -> MetricPatch {
        self.oriented = oriented;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> MetricPatch {
        self.label = label.into();
        self
    }

    pub fn with_chart_id(mut self, chart_id: impl Into<String>) -> MetricPatch {
        self.chart_id = chart_id.into();
        self
    }

    pub fn with_sample_box(mut self, sample_box: Vec<(f64, f64)>) -> MetricPatch {
        assert_eq!(sample_box.len(), self.dim());
        self.sample_box = sample_box;
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> MetricPatch {
        assert_eq!(domain.dim(), self.dim());
        self.domain = domain;
        self
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn max_order(&self) -> usize {
        self.field.max_order()
    }

    pub fn field(&self) -> Arc<dyn MetricField> {
        Arc::clone(&self.field)
    }

    /// Sign of `det g` implied by the signature.
    pub fn signature_sign(&self) -> f64 {
        if self.signature.1.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn point(&self, coords: Vec<f64>) -> ChartPoint {
        ChartPoint::new(self.chart_id.clone(), coords)
    }

    fn check_domain(&self, coords: &[f64]) -> Result<()> {
        match self.domain.violation(coords, EXCLUSION_BAND) {
            None => Ok(()),
            Some(reason) => Err(GeometryError::OutOfDomain { chart: self.chart_id.clone(), point: coords.to_vec(), reason }),
        }
    }

    /// Components evaluated on arbitrary coordinate jets, symmetrized from the
    /// upper triangle. No domain check.
    pub fn components_on(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let m = self.dim();
        let mut g = self.field.components(x)?;
        debug_assert_eq!(g.len(), m * m);
        for i in 0..m {
            for j in 0..i {
                g[i * m + j] = g[j * m + i].clone();
            }
        }
        Ok(g)
    }

    /// Taylor jets of every component to `order` about `coords`.
    pub fn jets(&self, coords: &[f64], order: usize) -> Result<Vec<Jet>> {
        if order > self.max_order() {
            return Err(GeometryError::JetUnavailable { requested: order, available: self.max_order() });
        }
        self.check_domain(coords)?;
        self.components_on(&Jet::seed(coords, order))
    }

    /// Jets at a validated chart point.
    pub fn jets_at(&self, x: &ChartPoint, order: usize) -> Result<Vec<Jet>> {
        x.validate(&self.chart_id, &self.domain)?;
        self.jets(&x.coords, order)
    }

    pub fn matrix(&self, coords: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.dim();
        let g = self.jets(coords, 0)?;
        Ok(DMatrix::from_fn(m, m, |i, j| g[i * m + j].value()))
    }

    /// Components and their inverse at a chart point.
    pub fn metric_eval(&self, x: &ChartPoint) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        x.validate(&self.chart_id, &self.domain)?;
        let g = self.matrix(&x.coords)?;
        let inv = invert_checked(&g, &x.coords)?;
        Ok((g, inv))
    }

    /// `(positive, negative)` eigenvalue counts at a point.
    pub fn observed_signature(&self, coords: &[f64]) -> Result<(usize, usize)> {
        let g = self.matrix(coords)?;
        let eig = g.symmetric_eigen().eigenvalues;
        Ok((eig.iter().filter(|&&e| e > 0.0).count(), eig.iter().filter(|&&e| e < 0.0).count()))
    }

    /// The same metric with jets rebuilt from central differences of its values.
    pub fn finite_difference(&self, step: f64) -> MetricPatch {
        let mut out = self.clone();
        out.field = Arc::new(FiniteDifferenceField { inner: self.field(), step });
        out.label = format!("{}[fd]", self.label);
        out
    }

    /// `α·g`; the signature swaps for negative `α`.
    pub fn scaled(&self, alpha: f64) -> MetricPatch {
        let mut out = self.clone();
        out.field = Arc::new(ScaledField { inner: self.field(), alpha });
        if alpha < 0.0 {
            out.signature = (self.signature.1, self.signature.0);
        }
        out
    }

    /// Block-diagonal product metric on the concatenated chart.
    pub fn product(&self, other: &MetricPatch) -> MetricPatch {
        if other.dim() == 0 {
            return self.clone();
        }
        if self.dim() == 0 {
            return other.clone();
        }
        let mut sample_box = self.sample_box.clone();
        sample_box.extend_from_slice(&other.sample_box);
        let label = format!("{}×{}", self.label, other.label);
        MetricPatch {
            field: Arc::new(BlockField { a: self.field(), b: other.field() }),
            signature: (self.signature.0 + other.signature.0, self.signature.1 + other.signature.1),
            domain: self.domain.product(&other.domain),
            sample_box,
            chart_id: label.clone(),
            label,
            norm: ResidualNorm::Components,
            oriented: self.oriented && other.oriented,
        }
    }

    /// Pulls the metric back through `map`, a coordinate change from a new chart
    /// of dimension `dim` into this one.
    pub fn pullback(
        &self,
        map: CoordMap,
        dim: usize,
        domain: Domain,
        sample_box: Vec<(f64, f64)>,
        label: impl Into<String>,
    ) -> MetricPatch {
        let label = label.into();
        let field = Arc::new(PullbackField { inner: self.field(), map, dim });
        let mut out = MetricPatch::new(field, self.signature, domain, sample_box, label.clone(), label);
        out.norm = self.norm;
        out.oriented = self.oriented;
        out
    }
}

/// Inverse of a metric matrix, failing on near-singular determinants.
pub fn invert_checked(g: &DMatrix<f64>, at: &[f64]) -> Result<DMatrix<f64>> {
    let det = if g.nrows() == 0 { 1.0 } else { g.determinant() };
    if det.abs() < SINGULAR_DET || !det.is_finite() {
        return Err(GeometryError::SingularMetric { point: at.to_vec(), det });
    }
    g.clone().try_inverse().ok_or(GeometryError::SingularMetric { point: at.to_vec(), det })
}

/// The zero-dimensional metric (a point).
pub fn point_patch() -> MetricPatch {
    MetricPatch::from_fn(0, (0, 0), Domain::new(Vec::new()), Vec::new(), "point", |_| Ok(Vec::new()))
}

/// The flat metric `δ` on `R^m`.
pub fn flat_patch(m: usize) -> MetricPatch {
    MetricPatch::from_fn(m, (m, 0), Domain::unbounded(m), vec![(-1.0, 1.0); m], format!("flat({m})"), move |x| {
        let mut g = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                g.push(x[0].lift(if i == j { 1.0 } else { 0.0 }));
            }
        }
        Ok(g)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sphere2() -> MetricPatch {
        MetricPatch::from_fn(2, (2, 0), Domain::new(vec![(-1.9, 1.9); 2]), vec![(-0.5, 0.5); 2], "s2", |x| {
            let r2 = &x[0] * &x[0] + &x[1] * &x[1];
            let f = (r2 * 0.25 + 1.0).powi(-2);
            let z = &f * 0.0;
            Ok(vec![f.clone(), z.clone(), z, f])
        })
    }

    #[test]
    fn metric_eval_returns_inverse() {
        let p = flat_patch(3);
        let (g, gi) = p.metric_eval(&p.point(vec![0.3, -0.2, 5.0])).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3));
        assert_eq!(gi, DMatrix::identity(3, 3));
        let s = sphere2();
        let (g, gi) = s.metric_eval(&s.point(vec![0.0, 0.0])).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        assert_eq!(gi, DMatrix::identity(2, 2));
        let (g, gi) = s.metric_eval(&s.point(vec![0.7, 0.4])).unwrap();
        assert!(((g * gi) - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let s = sphere2();
        assert!(matches!(s.metric_eval(&s.point(vec![2.0, 0.0])), Err(GeometryError::OutOfDomain { .. })));
    }

    #[test]
    fn singular_metric_is_detected() {
        let p = MetricPatch::from_fn(2, (1, 1), Domain::unbounded(2), vec![(-1.0, 1.0); 2], "deg", |x| {
            Ok(vec![x[0].lift(1.0), x[0].lift(1.0), x[0].lift(1.0), x[0].lift(1.0)])
        });
        assert!(matches!(p.metric_eval(&p.point(vec![0.0, 0.0])), Err(GeometryError::SingularMetric { .. })));
    }

    #[test]
    fn first_order_jets_match_central_differences() {
        let s = sphere2();
        let x = [0.31, -0.47];
        let jets = s.jets(&x, 1).unwrap();
        let h = 1e-5;
        for v in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[v] += h;
            xm[v] -= h;
            let fd = (s.matrix(&xp).unwrap()[(0, 0)] - s.matrix(&xm).unwrap()[(0, 0)]) / (2.0 * h);
            assert_relative_eq!(jets[0].d1(v), fd, epsilon = 1e-9);
        }
    }

    #[test]
    fn finite_difference_wrapper_approximates_second_derivatives() {
        let s = sphere2();
        let x = [0.2, 0.1];
        let exact = s.jets(&x, 2).unwrap();
        let fd = s.finite_difference(1e-3).jets(&x, 2).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((ca - cb).abs() < 1e-5, "{ca} vs {cb}");
            }
        }
        assert!(matches!(s.finite_difference(1e-3).jets(&x, 3), Err(GeometryError::JetUnavailable { .. })));
    }

    #[test]
    fn pullback_by_linear_map() {
        // flat metric pulled back by (u, v) -> (2u, u + v) is J^T J
        let flat = flat_patch(2);
        let map: CoordMap = Arc::new(|x: &[Jet]| vec![&x[0] * 2.0, &x[0] + &x[1]]);
        let p = flat.pullback(map, 2, Domain::unbounded(2), vec![(-1.0, 1.0); 2], "lin");
        let g = p.matrix(&[0.3, 0.4]).unwrap();
        assert_relative_eq!(g[(0, 0)], 5.0);
        assert_relative_eq!(g[(0, 1)], 1.0);
        assert_relative_eq!(g[(1, 1)], 1.0);
    }

    #[test]
    fn product_with_point_is_identity() {
        let s = sphere2();
        let p = s.product(&point_patch());
        assert_eq!(p.dim(), 2);
        assert_eq!(p.label, "s2");
    }
}
