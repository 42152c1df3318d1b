//! Poincaré–Einstein metrics `r⁻²(dr² + (1−μr²/2)²g₁ + (1+μr²/2)²g₂)` and the
//! ambient metric recovered as a cone over them.

use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use super::ambient::fibre_euler_field;
use crate::catalog::{excluded_radius, solve_mu, to_f64, EinsteinSpec};
use crate::error::{GeometryError, Result};
use crate::kernel::chart::Domain;
use crate::kernel::jet::Jet;
use crate::kernel::lie::VectorField;
use crate::kernel::patch::{block_diagonal, CoordMap, MetricPatch, ResidualNorm};

/// Samples stay above this radius, where `r⁻²` would swamp residuals.
pub const MIN_SAMPLE_RADIUS: f64 = 0.05;

/// Default upper end of radial sampling when no point is excluded.
pub const MAX_SAMPLE_RADIUS: f64 = 2.0;

/// `I = [0, ∞)` minus at most one radius where a warp factor vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareInterval {
    pub excluded: Option<f64>,
}

impl PoincareInterval {
    pub fn contains(&self, r: f64) -> bool {
        r >= 0.0 && self.excluded.is_none_or(|e| (r - e).abs() > crate::kernel::chart::EXCLUSION_BAND)
    }

    /// Radial sampling range inside the first component of the interior.
    pub fn sample_range(&self) -> (f64, f64) {
        match self.excluded {
            Some(e) => (MIN_SAMPLE_RADIUS, (0.8 * e).min(MAX_SAMPLE_RADIUS.max(0.5 * e))),
            None => (MIN_SAMPLE_RADIUS, MAX_SAMPLE_RADIUS),
        }
    }
}

/// The interval for `(μ, m₂)` per the case table.
pub fn poincare_interval(mu: Rational64, m2: usize) -> PoincareInterval {
    let excluded = if mu.is_zero() || (mu.is_negative() && m2 == 0) { None } else { excluded_radius(mu) };
    PoincareInterval { excluded }
}

#[derive(Clone)]
pub struct PoincareSpec {
    pub g1: EinsteinSpec,
    pub g2: EinsteinSpec,
    pub mu: Rational64,
    /// Coordinates `(x₁, x₂, r)`.
    pub interior_patch: MetricPatch,
    pub interval_i: PoincareInterval,
}

impl fmt::Debug for PoincareSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PoincareSpec({} × {}, μ = {})", self.g1.label, self.g2.label, self.mu)
    }
}

impl PoincareSpec {
    pub fn n(&self) -> usize {
        self.g1.m + self.g2.m
    }

    pub fn r_index(&self) -> usize {
        self.n()
    }

    pub fn mu_f64(&self) -> f64 {
        to_f64(self.mu)
    }

    /// `Ric = −(m₁+m₂) g`.
    pub fn einstein_constant(&self) -> f64 {
        -(self.n() as f64)
    }

    pub fn boundary_metric(&self) -> MetricPatch {
        self.g1.patch.product(&self.g2.patch)
    }

    /// The metric as an Einstein spec, for feeding into further constructions.
    pub fn as_einstein(&self) -> EinsteinSpec {
        let d = (self.n() + 1) as i64;
        EinsteinSpec::new(self.interior_patch.clone(), Rational64::from_integer(-d * (d - 1)), self.interior_patch.label.clone())
    }
}

pub fn poincare_metric(g1: &EinsteinSpec, g2: &EinsteinSpec, mu: Rational64) -> Result<PoincareSpec> {
    let solved = solve_mu(g1.m, g1.sc, g2.m, g2.sc)?;
    if let Some(expected) = solved.mu {
        if expected != mu {
            return Err(GeometryError::IncompatibleScalars(format!("μ = {mu} given, the factors force μ = {expected}")));
        }
    }
    let (m1, m2) = (g1.m, g2.m);
    let n = m1 + m2;
    let interval_i = poincare_interval(mu, m2);
    let mut domain = g1.patch.domain.product(&g2.patch.domain).product(&Domain::new(vec![(0.0, f64::INFINITY)]));
    if let Some(e) = interval_i.excluded {
        domain = domain.exclude(n, e);
    }
    let mut sample_box = g1.patch.sample_box.clone();
    sample_box.extend_from_slice(&g2.patch.sample_box);
    sample_box.push(interval_i.sample_range());
    let (p, q) = (g1.patch.signature.0 + g2.patch.signature.0, g1.patch.signature.1 + g2.patch.signature.1);
    let label = format!("poincare({},{},μ={})", g1.label, g2.label, mu);
    let (p1, p2) = (g1.patch.clone(), g2.patch.clone());
    let half_mu = to_f64(mu) / 2.0;
    let patch = MetricPatch::from_fn(n + 1, (p + 1, q), domain, sample_box, label, move |x: &[Jet]| {
        let r = &x[n];
        let r2 = r * r;
        let inv_r2 = r2.recip();
        let a = 1.0 - &(&r2 * half_mu);
        let b = &(&r2 * half_mu) + 1.0;
        let wa = &(&a * &a) * &inv_r2;
        let wb = &(&b * &b) * &inv_r2;
        let c1: Vec<Jet> = p1.components_on(&x[..m1])?.iter().map(|c| c * &wa).collect();
        let c2: Vec<Jet> = if m2 == 0 { Vec::new() } else { p2.components_on(&x[m1..n])?.iter().map(|c| c * &wb).collect() };
        Ok(block_diagonal(r, &[(m1, c1), (m2, c2), (1, vec![inv_r2])]))
    })
    .with_norm(ResidualNorm::Operator)
    .with_orientation(g1.patch.oriented && g2.patch.oriented);
    Ok(PoincareSpec { g1: g1.clone(), g2: g2.clone(), mu, interior_patch: patch, interval_i })
}

/// The cone `u²g⁺ − du²` over a Poincaré interior, in `(x, r, u)` and in the
/// ambient chart `(x, t, ρ)` via `ρ = −r²/2`, `t = u/r`.
#[derive(Clone)]
pub struct AmbientFromPoincare {
    pub cone_patch: MetricPatch,
    pub reexpressed: MetricPatch,
    /// `u∂_u` on the cone chart.
    pub euler_u: VectorField,
    /// `t∂_t` on the ambient chart.
    pub euler_t: VectorField,
}

impl fmt::Debug for AmbientFromPoincare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AmbientFromPoincare({})", self.cone_patch.label)
    }
}

/// `u²g − du²` on `(x, u)` for any metric `g`.
pub fn lorentzian_cone(base: &MetricPatch, label: impl Into<String>) -> MetricPatch {
    let d = base.dim();
    let inner = base.clone();
    let domain = base.domain.product(&Domain::new(vec![(0.0, f64::INFINITY)]));
    let mut sample_box = base.sample_box.clone();
    sample_box.push(super::cone::RADIAL_SAMPLE);
    MetricPatch::from_fn(d + 1, (base.signature.0, base.signature.1 + 1), domain, sample_box, label, move |x: &[Jet]| {
        let u = &x[d];
        let u2 = u * u;
        let g: Vec<Jet> = inner.components_on(&x[..d])?.iter().map(|c| c * &u2).collect();
        Ok(block_diagonal(u, &[(d, g), (1, vec![u.lift(-1.0)])]))
    })
    .with_orientation(base.oriented)
}

/// `(x, t, ρ) ↦ (x, r, u) = (x, √(−2ρ), t√(−2ρ))`.
pub fn trho_to_ru(n: usize) -> CoordMap {
    Arc::new(move |x: &[Jet]| {
        let r = (&x[n + 1] * -2.0).sqrt();
        let u = &x[n] * &r;
        let mut out = x[..n].to_vec();
        out.push(r);
        out.push(u);
        out
    })
}

pub fn ambient_from_poincare(p: &PoincareSpec) -> Result<AmbientFromPoincare> {
    let n = p.n();
    let cone_patch = lorentzian_cone(&p.interior_patch, format!("cone({})", p.interior_patch.label));
    let bdry = p.boundary_metric();
    let mut domain = bdry.domain.product(&Domain::new(vec![(0.0, f64::INFINITY), (f64::NEG_INFINITY, 0.0)]));
    if let Some(e) = p.interval_i.excluded {
        domain = domain.exclude(n + 1, -e * e / 2.0);
    }
    let (r_lo, r_hi) = p.interval_i.sample_range();
    let mut sample_box = bdry.sample_box.clone();
    sample_box.push(super::normal_form::T_SAMPLE);
    sample_box.push((-r_hi * r_hi / 2.0, -r_lo * r_lo / 2.0));
    let reexpressed = cone_patch.pullback(trho_to_ru(n), n + 2, domain, sample_box, format!("{}[t,ρ]", cone_patch.label));
    let reexpressed = reexpressed.with_norm(ResidualNorm::Components);
    Ok(AmbientFromPoincare { euler_u: fibre_euler_field(n + 2, n + 1), euler_t: fibre_euler_field(n + 2, n), cone_patch, reexpressed })
}
