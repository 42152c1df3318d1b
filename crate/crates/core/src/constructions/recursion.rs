//! Iterated Poincaré–Einstein products with `μ = −1/2`.
//!
//! Stage `s` is `r_s⁻²(dr_s² + (1+r_s²/4)² G^{s−1} + (1−r_s²/4)² g_s)`, an
//! Einstein metric of dimension `D_s = D_{s−1} + m_s + 1` with `Ric = −(D_s−1) G^s`.

use num_rational::Rational64;

use super::poincare::{poincare_metric, PoincareSpec};
use crate::catalog::{to_f64, EinsteinSpec};
use crate::error::{GeometryError, Result};

/// Allowed deviation of a factor's scalar curvature from its normalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MultiSubProductSpec {
    pub level: usize,
    pub g0: EinsteinSpec,
    pub factors: Vec<EinsteinSpec>,
    /// `G¹, …, G^ℓ`.
    pub stages: Vec<PoincareSpec>,
}

impl MultiSubProductSpec {
    /// `D_s = s + Σ_{i≤s} m_i` for `s = 0..=ℓ`.
    pub fn stage_dimension(&self, s: usize) -> usize {
        s + self.g0.m + self.factors[..s].iter().map(|f| f.m).sum::<usize>()
    }

    /// `Λ_s = −(D_s − 1)`.
    pub fn einstein_constant(&self, s: usize) -> f64 {
        -(self.stage_dimension(s) as f64 - 1.0)
    }
}

fn check_normalization(spec: &EinsteinSpec, sign: i64) -> Result<()> {
    let m = spec.m as i64;
    let expected = Rational64::from_integer(sign * m * (m - 1));
    let got = to_f64(spec.sc);
    if (got - to_f64(expected)).abs() > NORMALIZATION_TOLERANCE || m < 1 {
        return Err(GeometryError::BadNormalization {
            label: spec.label.clone(),
            got: spec.sc.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(())
}

pub fn multi_subproduct(g0: &EinsteinSpec, positives: &[EinsteinSpec]) -> Result<MultiSubProductSpec> {
    if positives.is_empty() {
        return Err(GeometryError::BadDimension("the recursion needs at least one positive factor".into()));
    }
    check_normalization(g0, -1)?;
    for g in positives {
        check_normalization(g, 1)?;
    }
    let mu = Rational64::new(-1, 2);
    let mut stages: Vec<PoincareSpec> = Vec::with_capacity(positives.len());
    for g in positives {
        let previous = match stages.last() {
            None => g0.clone(),
            Some(stage) => stage.as_einstein(),
        };
        stages.push(poincare_metric(&previous, g, mu)?);
    }
    Ok(MultiSubProductSpec { level: positives.len(), g0: g0.clone(), factors: positives.to_vec(), stages })
}
