//! Metrics `2t dt dρ + 2ρ dt² + t² g̃(x,ρ)` and the closed-form expressions
//! for their Ricci tensor in terms of the family `g̃`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::kernel::chart::Domain;
use crate::kernel::curvature::curvature_jets;
use crate::kernel::jet::Jet;
use crate::kernel::patch::{invert_checked, MetricPatch};

type FamilyFn = dyn Fn(&[Jet], &Jet) -> Result<Vec<Jet>> + Send + Sync;

/// Sampling interval for the fibre coordinate `t`.
pub const T_SAMPLE: (f64, f64) = (0.5, 2.0);

/// A one-parameter family `ρ ↦ g̃(·, ρ)` of metrics on an `n`-dimensional chart.
#[derive(Clone)]
pub struct MetricFamily {
    pub n: usize,
    pub signature: (usize, usize),
    pub x_domain: Domain,
    pub x_sample: Vec<(f64, f64)>,
    pub rho_bounds: (f64, f64),
    /// `ρ` values where the family degenerates.
    pub rho_excluded: Vec<f64>,
    pub rho_sample: (f64, f64),
    pub label: String,
    f: Arc<FamilyFn>,
}

impl fmt::Debug for MetricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricFamily({}, n = {})", self.label, self.n)
    }
}

impl MetricFamily {
    /// `f(x, ρ)` returns the `n×n` components of `g̃`. Domains default to the
    /// base patch's, with `ρ` unrestricted.
    pub fn new(
        base: &MetricPatch,
        label: impl Into<String>,
        f: impl Fn(&[Jet], &Jet) -> Result<Vec<Jet>> + Send + Sync + 'static,
    ) -> MetricFamily {
        MetricFamily {
            n: base.dim(),
            signature: base.signature,
            x_domain: base.domain.clone(),
            x_sample: base.sample_box.clone(),
            rho_bounds: (f64::NEG_INFINITY, f64::INFINITY),
            rho_excluded: Vec::new(),
            rho_sample: (-0.5, 0.5),
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn with_rho(mut self, bounds: (f64, f64), excluded: Vec<f64>, sample: (f64, f64)) -> MetricFamily {
        self.rho_bounds = bounds;
        self.rho_excluded = excluded;
        self.rho_sample = sample;
        self
    }

    pub fn components(&self, x: &[Jet], rho: &Jet) -> Result<Vec<Jet>> {
        (self.f)(x, rho)
    }

    /// `g̃(·, ρ)` as a metric on `M`.
    pub fn at_rho(&self, rho: f64) -> MetricPatch {
        let inner = self.clone();
        MetricPatch::from_fn(
            self.n,
            self.signature,
            self.x_domain.clone(),
            self.x_sample.clone(),
            format!("{}|ρ={rho}", self.label),
            move |x| inner.components(x, &x[0].lift(rho)),
        )
    }
}

/// `2t dt dρ + 2ρ dt² + t² g̃` on `(x, t, ρ)`, `t > 0`.
pub fn ambient_form_patch(family: &MetricFamily, label: impl Into<String>) -> MetricPatch {
    let n = family.n;
    let fam = family.clone();
    let mut domain = family.x_domain.product(&Domain::new(vec![(0.0, f64::INFINITY), family.rho_bounds]));
    for &v in &family.rho_excluded {
        domain = domain.exclude(n + 1, v);
    }
    let mut sample_box = family.x_sample.clone();
    sample_box.push(T_SAMPLE);
    sample_box.push(family.rho_sample);
    let (p, q) = family.signature;
    MetricPatch::from_fn(n + 2, (p + 1, q + 1), domain, sample_box, label, move |x: &[Jet]| {
        let (t, rho) = (&x[n], &x[n + 1]);
        let gt = fam.components(&x[..n], rho)?;
        let t2 = t * t;
        let d = n + 2;
        let zero = x[0].lift(0.0);
        let mut h = vec![zero; d * d];
        for i in 0..n {
            for j in 0..n {
                h[i * d + j] = &gt[i * n + j] * &t2;
            }
        }
        h[n * d + n] = rho * 2.0;
        h[n * d + n + 1] = t.clone();
        h[(n + 1) * d + n] = t.clone();
        Ok(h)
    })
}

/// The three Ricci blocks of an ambient-form metric.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciBlocks {
    /// `Ric_ij`, `i, j` tangent to `M`.
    pub ij: DMatrix<f64>,
    pub rho_rho: f64,
    /// `Ric_ρj`.
    pub rho_j: DVector<f64>,
}

impl RicciBlocks {
    pub fn max_abs(&self) -> f64 {
        self.ij.amax().max(self.rho_rho.abs()).max(self.rho_j.amax())
    }

    pub fn max_difference(&self, other: &RicciBlocks) -> f64 {
        (&self.ij - &other.ij).amax().max((self.rho_rho - other.rho_rho).abs()).max((&self.rho_j - &other.rho_j).amax())
    }
}

/// The closed-form expressions evaluated from jets of `g̃` alone.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    /// `ρg̃'' − ρ g̃' g̃⁻¹ g̃' + ½ρ tr(g̃⁻¹g̃') g̃' + (2−n)/2 g̃' − ½ tr(g̃⁻¹g̃') g̃ + Ric(g̃)`.
    pub ij: DMatrix<f64>,
    /// `−½ tr(g̃⁻¹g̃'') + ¼ tr(g̃⁻¹g̃'g̃⁻¹g̃')`.
    pub rho_rho: f64,
    /// `∇_ℓ(g̃^{kℓ}g̃'_{kj}) − ∇_j(g̃^{kℓ}g̃'_{kℓ})`. This is twice `Ric_ρj`.
    pub rho_j_divergence: DVector<f64>,
}

impl NormalForm {
    /// The blocks as Ricci components: the divergence expression carries a factor ½.
    pub fn ricci_blocks(&self) -> RicciBlocks {
        RicciBlocks { ij: self.ij.clone(), rho_rho: self.rho_rho, rho_j: &self.rho_j_divergence * 0.5 }
    }
}

/// Evaluates the normal-form expressions at `(x, ρ)`.
pub fn ricci_normal_form(family: &MetricFamily, x: &[f64], rho: f64) -> Result<NormalForm> {
    let n = family.n;
    let mut point = x.to_vec();
    point.push(rho);
    let seeds = Jet::seed(&point, 2);
    let comps = family.components(&seeds[..n], &seeds[n])?;
    let partial = |c: &Jet, vars: &[usize]| -> f64 {
        let mut e = vec![0u8; n + 1];
        for &v in vars {
            e[v] += 1;
        }
        c.partial(&e).unwrap_or(0.0)
    };
    let mat = |f: &dyn Fn(&Jet) -> f64| DMatrix::from_fn(n, n, |i, j| f(&comps[i * n + j]));
    let g = mat(&|c| c.value());
    let gp = mat(&|c| partial(c, &[n]));
    let gpp = mat(&|c| partial(c, &[n, n]));
    let dg: Vec<DMatrix<f64>> = (0..n).map(|a| mat(&|c| partial(c, &[a]))).collect();
    let dgp: Vec<DMatrix<f64>> = (0..n).map(|a| mat(&|c| partial(c, &[a, n]))).collect();
    let ginv = invert_checked(&g, &point)?;
    let ric = curvature_jets(&family.at_rho(rho), x, 2)?.ricci.values().matrix();

    let tr = (&ginv * &gp).trace();
    let ij = &gpp * rho - (&gp * &ginv * &gp) * rho + &gp * (0.5 * rho * tr) + &gp * ((2.0 - n as f64) / 2.0) - &g * (0.5 * tr) + ric;
    let a = &ginv * &gp;
    let rho_rho = -0.5 * (&ginv * &gpp).trace() + 0.25 * (&a * &a).trace();

    // A^ℓ_j = g̃^{kℓ} g̃'_{kj} and its x-derivatives
    let dginv: Vec<DMatrix<f64>> = dg.iter().map(|d| -(&ginv * d * &ginv)).collect();
    let da: Vec<DMatrix<f64>> = (0..n).map(|c| &dginv[c] * &gp + &ginv * &dgp[c]).collect();
    let gamma = |up: usize, b: usize, c: usize| -> f64 {
        (0..n).map(|l| 0.5 * ginv[(up, l)] * (dg[b][(l, c)] + dg[c][(l, b)] - dg[l][(b, c)])).sum()
    };
    let mut rho_j_divergence = DVector::zeros(n);
    for j in 0..n {
        let mut div = 0.0;
        for l in 0..n {
            div += da[l][(l, j)];
            for mm in 0..n {
                div += gamma(l, l, mm) * a[(mm, j)] - gamma(mm, l, j) * a[(l, mm)];
            }
        }
        let dtr: f64 = (0..n).map(|l| da[j][(l, l)]).sum();
        rho_j_divergence[j] = div - dtr;
    }
    Ok(NormalForm { ij, rho_rho, rho_j_divergence })
}

/// The same blocks read off the generic curvature of the full metric at `(x, t, ρ)`.
pub fn ambient_ricci_blocks(patch: &MetricPatch, n: usize, x: &[f64], t: f64, rho: f64) -> Result<RicciBlocks> {
    let mut point = x.to_vec();
    point.push(t);
    point.push(rho);
    let ric = curvature_jets(patch, &point, 2)?.ricci.values().matrix();
    Ok(RicciBlocks {
        ij: ric.view((0, 0), (n, n)).into_owned(),
        rho_rho: ric[(n + 1, n + 1)],
        rho_j: DVector::from_fn(n, |j, _| ric[(n + 1, j)]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::parse_entry;

    fn warped(base: &str, mu: f64, k: Option<f64>) -> MetricFamily {
        let spec = parse_entry(base).unwrap();
        let patch = spec.patch.clone();
        let n = patch.dim();
        MetricFamily::new(&spec.patch, base, move |x, rho| {
            let a = &(rho * mu) + 1.0;
            let a2 = &a * &a;
            let mut g: Vec<Jet> = patch.components_on(x)?.iter().map(|c| c * &a2).collect();
            if let Some(k) = k {
                // an x-dependent ρ-perturbation so that the mixed block is nonzero
                let bump = &(&x[0] * rho) * k;
                g[0] = &g[0] + &bump;
                g[n - 1] = &g[n - 1] + &(&bump * 0.5);
                g[(n - 1) * n] = &g[(n - 1) * n] + &(&bump * 0.5);
            }
            Ok(g)
        })
    }

    #[test]
    fn rho_independent_family_reduces_to_base_ricci() {
        let fam = warped("sphere(3,1)", 0.0, None);
        let nf = ricci_normal_form(&fam, &[0.1, 0.2, -0.1], 0.3).unwrap();
        let ric = curvature_jets(&fam.at_rho(0.0), &[0.1, 0.2, -0.1], 2).unwrap().ricci.values().matrix();
        assert!((&nf.ij - ric).amax() < 1e-12);
        assert_eq!(nf.rho_rho, 0.0);
        assert!(nf.rho_j_divergence.amax() < 1e-14);
    }

    #[test]
    fn matched_warp_vanishes_and_mismatched_warp_does_not() {
        // unit S³ has Sc = 6 = 2·3·2·μ at μ = 1/2
        let good = warped("sphere(3,1)", 0.5, None);
        let nf = ricci_normal_form(&good, &[0.1, 0.2, -0.1], 0.3).unwrap();
        assert!(nf.ricci_blocks().max_abs() < 1e-10);
        let bad = warped("sphere(3,1)", 0.25, None);
        let nb = ricci_normal_form(&bad, &[0.1, 0.2, -0.1], 0.3).unwrap();
        // μ(n−1)(2ρμ − 2a + 2) g plus the Einstein mismatch (Sc/n − 2(n−1)μ) g
        let (mu, rho, n) = (0.25, 0.3, 3.0);
        let a = 1.0 + mu * rho;
        let coeff = mu * (n - 1.0) * (2.0 * rho * mu - 2.0 * a + 2.0) + (2.0 - 2.0 * (n - 1.0) * mu);
        let g = bad.at_rho(0.0).matrix(&[0.1, 0.2, -0.1]).unwrap();
        assert!((&nb.ij - g * coeff).amax() < 1e-10);
        assert!(coeff.abs() > 0.5);
    }

    #[test]
    fn closed_form_matches_generic_curvature() {
        for fam in [warped("sphere(3,1)", 0.25, None), warped("hyperbolic(2,1)", 0.3, Some(0.4))] {
            let patch = ambient_form_patch(&fam, "h");
            let n = fam.n;
            let x = vec![0.15; n];
            for (t, rho) in [(1.0, 0.2), (1.7, -0.4)] {
                let nf = ricci_normal_form(&fam, &x, rho).unwrap().ricci_blocks();
                let generic = ambient_ricci_blocks(&patch, n, &x, t, rho).unwrap();
                assert!(nf.max_difference(&generic) < 1e-9, "{nf:?}\n{generic:?}");
            }
        }
    }

    #[test]
    fn divergence_expression_is_twice_the_mixed_component() {
        let fam = warped("hyperbolic(2,1)", 0.3, Some(0.4));
        let patch = ambient_form_patch(&fam, "h");
        let nf = ricci_normal_form(&fam, &[0.2, -0.1], 0.25).unwrap();
        let generic = ambient_ricci_blocks(&patch, 2, &[0.2, -0.1], 1.0, 0.25).unwrap();
        assert!(generic.rho_j.amax() > 1e-2);
        assert!((&nf.rho_j_divergence - &generic.rho_j * 2.0).amax() < 1e-9);
    }
}
