//! Chart points and coordinate domains.

use crate::error::{GeometryError, Result};

/// Half-width of the band around an excluded coordinate value that counts as excluded.
pub const EXCLUSION_BAND: f64 = 1e-9;

/// A coordinate hypersurface `x[coord] = value` removed from a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedLocus {
    pub coord: usize,
    pub value: f64,
}

/// An open coordinate box minus finitely many coordinate hypersurfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    pub excluded: Vec<ExcludedLocus>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Domain {
        Domain { bounds, excluded: Vec::new() }
    }

    pub fn unbounded(dim: usize) -> Domain {
        Domain::new(vec![(f64::NEG_INFINITY, f64::INFINITY); dim])
    }

    pub fn exclude(mut self, coord: usize, value: f64) -> Domain {
        self.excluded.push(ExcludedLocus { coord, value });
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Concatenation of two domains on the product chart.
    pub fn product(&self, other: &Domain) -> Domain {
        let offset = self.dim();
        let mut bounds = self.bounds.clone();
        bounds.extend_from_slice(&other.bounds);
        let mut excluded = self.excluded.clone();
        excluded.extend(other.excluded.iter().map(|e| ExcludedLocus { coord: e.coord + offset, value: e.value }));
        Domain { bounds, excluded }
    }

    /// `None` if `coords` is admissible with the given exclusion band, else the reason.
    pub fn violation(&self, coords: &[f64], band: f64) -> Option<String> {
        if coords.len() != self.dim() {
            return Some(format!("expected {} coordinates, got {}", self.dim(), coords.len()));
        }
        for (i, (&x, &(lo, hi))) in coords.iter().zip(&self.bounds).enumerate() {
            if !x.is_finite() {
                return Some(format!("coordinate {i} is not finite"));
            }
            if x <= lo || x >= hi {
                return Some(format!("coordinate {i} = {x} outside ({lo}, {hi})"));
            }
        }
        for e in &self.excluded {
            if (coords[e.coord] - e.value).abs() <= band {
                return Some(format!("coordinate {} within {band:e} of excluded value {}", e.coord, e.value));
            }
        }
        None
    }

    pub fn contains(&self, coords: &[f64]) -> bool {
        self.violation(coords, EXCLUSION_BAND).is_none()
    }
}

/// A point of a named chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub chart_id: String,
}

impl ChartPoint {
    pub fn new(chart_id: impl Into<String>, coords: Vec<f64>) -> ChartPoint {
        ChartPoint { coords, chart_id: chart_id.into() }
    }

    /// Checks the point against a chart's identity and domain.
    pub fn validate(&self, chart_id: &str, domain: &Domain) -> Result<()> {
        if self.chart_id != chart_id {
            return Err(GeometryError::ChartMismatch { expected: chart_id.to_string(), got: self.chart_id.clone() });
        }
        if let Some(reason) = domain.violation(&self.coords, EXCLUSION_BAND) {
            return Err(GeometryError::OutOfDomain { chart: chart_id.to_string(), point: self.coords.clone(), reason });
        }
        Ok(())
    }
}
