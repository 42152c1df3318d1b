//! Einstein seed metrics and the scalar-curvature bookkeeping between them.
//!
//! Scalar curvatures are kept as exact rationals so that the constants the
//! constructions derive from them (`μ`, `λ`, excluded radii) carry no rounding.

use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{GeometryError, Result};
use crate::kernel::chart::Domain;
use crate::kernel::jet::Jet;
use crate::kernel::patch::{point_patch, MetricPatch};

/// An Einstein metric with its constants.
#[derive(Clone)]
pub struct EinsteinSpec {
    pub patch: MetricPatch,
    pub m: usize,
    pub sc: Rational64,
    /// `Sc/(m(m−1))`, absent for `m < 2`.
    pub lambda: Option<Rational64>,
    pub label: String,
}

impl fmt::Debug for EinsteinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EinsteinSpec({}, m = {}, Sc = {})", self.label, self.m, self.sc)
    }
}

pub fn to_f64(r: Rational64) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

fn rational_sqrt_f64(r: Rational64) -> f64 {
    to_f64(r).sqrt()
}

impl EinsteinSpec {
    pub fn new(patch: MetricPatch, sc: Rational64, label: impl Into<String>) -> EinsteinSpec {
        let m = patch.dim();
        let lambda = (m >= 2).then(|| sc / Rational64::from_integer((m * (m - 1)) as i64));
        EinsteinSpec { patch, m, sc, lambda, label: label.into() }
    }

    pub fn sc_f64(&self) -> f64 {
        to_f64(self.sc)
    }

    pub fn lambda_f64(&self) -> Option<f64> {
        self.lambda.map(to_f64)
    }

    /// `Λ` with `Ric = Λ g`; zero for the point.
    pub fn einstein_constant(&self) -> Rational64 {
        if self.m == 0 {
            Rational64::zero()
        } else {
            self.sc / Rational64::from_integer(self.m as i64)
        }
    }
}

/// Sign of a constant-curvature seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
}

/// The conformally flat model `±(1 + K|x|²/4)^{−2} δ` of constant sectional curvature `K`.
pub fn constant_curvature_metric(m: usize, k: Rational64, definiteness: Definiteness) -> Result<EinsteinSpec> {
    if m == 0 {
        return Err(GeometryError::BadDimension("constant curvature model needs m >= 1".into()));
    }
    let kf = to_f64(k);
    let sign = match definiteness {
        Definiteness::Positive => 1.0,
        Definiteness::Negative => -1.0,
    };
    let (domain_half, sample_half) = if k.is_zero() {
        (10.0, 1.0)
    } else {
        let s = (m as f64 * kf.abs()).sqrt();
        (1.9 / s, (0.8 / s).min(1.0))
    };
    let signature = if sign > 0.0 { (m, 0) } else { (0, m) };
    let label = match (definiteness, k.is_negative()) {
        (Definiteness::Positive, false) if k.is_zero() => format!("flat({m})"),
        (Definiteness::Positive, false) => format!("sphere({m},{k})"),
        (Definiteness::Positive, true) => format!("hyperbolic({m},{})", -k),
        (Definiteness::Negative, _) => format!("neg(cc({m},{k}))"),
    };
    let patch = MetricPatch::from_fn(
        m,
        signature,
        Domain::new(vec![(-domain_half, domain_half); m]),
        vec![(-sample_half, sample_half); m],
        label.clone(),
        move |x: &[Jet]| {
            let mut r2 = x[0].lift(0.0);
            for xi in x {
                r2 = &r2 + &(xi * xi);
            }
            let f = &(r2 * (kf / 4.0) + 1.0).powi(-2) * sign;
            let z = &f * 0.0;
            let mut g = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    g.push(if i == j { f.clone() } else { z.clone() });
                }
            }
            Ok(g)
        },
    );
    let base_sc = Rational64::from_integer((m * (m - 1)) as i64) * k;
    let sc = if sign > 0.0 { base_sc } else { -base_sc };
    Ok(EinsteinSpec::new(patch, sc, label))
}

/// The zero-dimensional factor.
pub fn point_spec() -> EinsteinSpec {
    EinsteinSpec::new(point_patch(), Rational64::zero(), "point")
}

/// `αg`: scalar curvature and `λ` divide by `α`, the Ricci tensor is unchanged.
pub fn scale_metric(spec: &EinsteinSpec, alpha: Rational64) -> Result<EinsteinSpec> {
    if alpha.is_zero() {
        return Err(GeometryError::ZeroScale);
    }
    if alpha == Rational64::from_integer(1) {
        return Ok(spec.clone());
    }
    let label =
        if alpha == Rational64::from_integer(-1) { format!("neg({})", spec.label) } else { format!("scaled({},{})", spec.label, alpha) };
    let patch = spec.patch.scaled(to_f64(alpha)).with_label(label.clone()).with_chart_id(spec.patch.chart_id.clone());
    Ok(EinsteinSpec { patch, m: spec.m, sc: spec.sc / alpha, lambda: spec.lambda.map(|l| l / alpha), label })
}

/// `ε(m₄ Sc₃ g₃ + m₃ Sc₄ g₄)`, Einstein with `Sc = ε(m₃+m₄)/(m₃m₄)`.
pub fn einstein_product(g3: &EinsteinSpec, g4: &EinsteinSpec, epsilon: i8) -> Result<EinsteinSpec> {
    let eps = Rational64::from_integer(epsilon.signum() as i64);
    let ok = |s: &Rational64| !s.is_zero() && s.signum() == eps;
    if epsilon == 0 || !ok(&g3.sc) || !ok(&g4.sc) {
        return Err(GeometryError::SignMismatch { expected: epsilon, got: vec![g3.sc.to_string(), g4.sc.to_string()] });
    }
    let (m3, m4) = (Rational64::from_integer(g3.m as i64), Rational64::from_integer(g4.m as i64));
    let a3 = scale_metric(g3, eps * m4 * g3.sc)?;
    let a4 = scale_metric(g4, eps * m3 * g4.sc)?;
    let label = format!("einstein_product({},{},{})", g3.label, g4.label, epsilon);
    let patch = a3.patch.product(&a4.patch).with_label(label.clone()).with_chart_id(label.clone());
    let spec = EinsteinSpec::new(patch, a3.sc + a4.sc, label);
    debug_assert_eq!(spec.sc, eps * (m3 + m4) / (m3 * m4));
    Ok(spec)
}

/// Block-diagonal `g₁ × g₂` on the concatenated chart.
pub fn product_metric(g1: &EinsteinSpec, g2: &EinsteinSpec) -> MetricPatch {
    g1.patch.product(&g2.patch)
}

/// The parameter `μ` of the product constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MuSolution {
    /// `None` when neither factor constrains `μ` (both of dimension ≤ 1).
    pub mu: Option<Rational64>,
    pub constraints_satisfied: bool,
}

impl MuSolution {
    pub fn unique(mu: Rational64) -> MuSolution {
        MuSolution { mu: Some(mu), constraints_satisfied: true }
    }

    /// The solved value, or `free` when `μ` is unconstrained.
    pub fn value_or(&self, free: Rational64) -> Rational64 {
        self.mu.unwrap_or(free)
    }
}

/// Solves `2m₁(m₁−1)μ = Sc₁`, `2m₂(m₂−1)μ = −Sc₂`; a constraint is vacuous
/// when its dimension is below two.
pub fn solve_mu(m1: usize, sc1: Rational64, m2: usize, sc2: Rational64) -> Result<MuSolution> {
    if m1 == 0 {
        return Err(GeometryError::BadDimension("the first factor needs m1 >= 1".into()));
    }
    let constraint = |m: usize, rhs: Rational64, which: &str| -> Result<Option<Rational64>> {
        if m >= 2 {
            Ok(Some(rhs / Rational64::from_integer((2 * m * (m - 1)) as i64)))
        } else if rhs.is_zero() {
            Ok(None)
        } else {
            Err(GeometryError::IncompatibleScalars(format!("{which} factor of dimension {m} must have zero scalar curvature, got {rhs}")))
        }
    };
    let a = constraint(m1, sc1, "first")?;
    let b = constraint(m2, -sc2, "second")?;
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(GeometryError::IncompatibleScalars(format!(
            "m2(m2-1)Sc1 = {} but -m1(m1-1)Sc2 = {}",
            Rational64::from_integer((m2 * m2.saturating_sub(1)) as i64) * sc1,
            -Rational64::from_integer((m1 * (m1 - 1)) as i64) * sc2
        ))),
        (Some(x), _) | (None, Some(x)) => Ok(MuSolution::unique(x)),
        (None, None) => Ok(MuSolution { mu: None, constraints_satisfied: true }),
    }
}

/// The radius `√(2/|μ|)` at which one warp factor of the Poincaré metric vanishes.
pub fn excluded_radius(mu: Rational64) -> Option<f64> {
    (!mu.is_zero()).then(|| rational_sqrt_f64(Rational64::from_integer(2) / mu.abs()))
}

/// Parses `a/b`, an integer, or a finite decimal as an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let t = s.trim();
    let bad = |why: &str| GeometryError::Catalog(t.to_string(), why.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: i64 = d.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d == 0 {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational64::new(n, d));
    }
    if let Ok(n) = t.parse::<i64>() {
        return Ok(Rational64::from_integer(n));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| bad("not a number"))?;
    if frac.len() > 12 || !frac.chars().all(|c| c.is_ascii_digit()) || !int.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad("not a decimal with at most 12 fractional digits"));
    }
    let scale = 10i64.pow(frac.len() as u32);
    let int_part: i64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad("bad integer part"))? };
    let frac_part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad("bad fraction"))? };
    let value = Rational64::new(int_part * scale + frac_part, scale);
    Ok(if neg { -value } else { value })
}

fn split_top_level(args: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in args.chars() {
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out.into_iter().map(|s| s.trim().to_string()).collect()
}

fn parse_dimension(entry: &str, s: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| GeometryError::Catalog(entry.to_string(), format!("'{s}' is not a dimension")))
}

/// Resolves a catalog name:
/// `sphere(m,K)`, `hyperbolic(m,K)`, `flat(m)`, `point`, `neg(e)`,
/// `scaled(e,alpha)`, `einstein_product(e,e,eps)`.
pub fn parse_entry(name: &str) -> Result<EinsteinSpec> {
    let entry = name.trim();
    if entry == "point" {
        return Ok(point_spec());
    }
    let bad = |why: String| GeometryError::Catalog(entry.to_string(), why);
    let open = entry.find('(').ok_or_else(|| bad("expected name(arguments)".into()))?;
    if !entry.ends_with(')') {
        return Err(bad("missing closing parenthesis".into()));
    }
    let head = entry[..open].trim();
    let inner = &entry[open + 1..entry.len() - 1];
    if inner.chars().try_fold(0i32, |d, c| match c {
        '(' => Some(d + 1),
        ')' if d == 0 => None,
        ')' => Some(d - 1),
        _ => Some(d),
    }) != Some(0)
    {
        return Err(bad("unbalanced parentheses".into()));
    }
    let args = split_top_level(inner);
    let arity = |n: usize| {
        if args.len() == n && args.iter().all(|a| !a.is_empty()) {
            Ok(())
        } else {
            Err(bad(format!("{head} takes {n} argument(s), got {}", args.len())))
        }
    };
    match head {
        "sphere" | "hyperbolic" => {
            arity(2)?;
            let m = parse_dimension(entry, &args[0])?;
            let k = parse_rational(&args[1])?;
            if k.is_negative() || k.is_zero() {
                return Err(bad("curvature magnitude must be positive".into()));
            }
            let k = if head == "sphere" { k } else { -k };
            let mut spec = constant_curvature_metric(m, k, Definiteness::Positive)?;
            spec.label = entry.to_string();
            spec.patch = spec.patch.with_label(entry).with_chart_id(entry);
            Ok(spec)
        }
        "flat" => {
            arity(1)?;
            let m = parse_dimension(entry, &args[0])?;
            constant_curvature_metric(m, Rational64::zero(), Definiteness::Positive)
        }
        "neg" => {
            arity(1)?;
            scale_metric(&parse_entry(&args[0])?, Rational64::from_integer(-1))
        }
        "scaled" => {
            arity(2)?;
            scale_metric(&parse_entry(&args[0])?, parse_rational(&args[1])?)
        }
        "einstein_product" => {
            arity(3)?;
            let eps: i8 = args[2].trim().trim_start_matches('+').parse().map_err(|_| bad("eps must be +1 or -1".into()))?;
            if eps != 1 && eps != -1 {
                return Err(bad("eps must be +1 or -1".into()));
            }
            einstein_product(&parse_entry(&args[0])?, &parse_entry(&args[1])?, eps)
        }
        other => Err(bad(format!("unknown catalog entry '{other}'"))),
    }
}
