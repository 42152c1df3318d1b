//! Seeded, order-stable sample points.
//!
//! Sample `i` of a plan draws from its own ChaCha8 stream (`seed`, stream `i`),
//! so the point sequence never depends on how evaluation is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::chart::Domain;
use crate::error::{GeometryError, Result};

/// Distance kept from excluded coordinate values when sampling.
pub const SAMPLE_EXCLUSION_BAND: f64 = 1e-3;

const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Per-coordinate sampling intervals.
    pub bounds: Vec<(f64, f64)>,
}

impl SamplePlan {
    pub fn new(seed: u64, count: usize, bounds: Vec<(f64, f64)>) -> SamplePlan {
        SamplePlan { seed, count, bounds }
    }

    /// The rng for sample `index`.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Sample `index`, redrawn until it clears `domain` by the sampling band.
    pub fn point(&self, index: usize, domain: &Domain) -> Result<Vec<f64>> {
        let mut rng = self.rng(index);
        for _ in 0..MAX_REJECTIONS {
            let p: Vec<f64> = self.bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..hi) }).collect();
            if domain.violation(&p, SAMPLE_EXCLUSION_BAND).is_none() {
                return Ok(p);
            }
        }
        Err(GeometryError::OutOfDomain {
            chart: "sample plan".into(),
            point: Vec::new(),
            reason: format!("no admissible point after {MAX_REJECTIONS} draws for sample {index}"),
        })
    }

    pub fn points(&self, domain: &Domain) -> Result<Vec<Vec<f64>>> {
        (0..self.count).map(|i| self.point(i, domain)).collect()
    }
}

/// Evaluates `f` on every index in parallel, returning results in index order.
pub fn par_map_indexed<T: Send>(count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..count).into_par_iter().map(f).collect()
}

/// Worker count requested through `EF_THREADS`, if valid.
pub fn env_thread_count() -> Option<usize> {
    std::env::var("EF_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool").install(f)
}
