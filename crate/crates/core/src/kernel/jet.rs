//! Truncated multivariate Taylor polynomials ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function of `n`
//! variables about a base point, up to total degree `order`. Arithmetic on
//! jets is exact polynomial arithmetic truncated at the order, so evaluating a
//! closed-form metric on seeded variable jets yields every partial derivative
//! up to that order through the chain rule, with no differencing.
//!
//! Coefficients are stored in graded order: all monomials of degree 0, then
//! degree 1, and so on. The coefficient of `x^α` is `∂^α f / α!`.
//!
//! A jet carries its own *valid order*. Differentiating lowers it by one and
//! binary operations take the minimum, so higher coefficients that are no
//! longer known are never read.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

/// Monomial bookkeeping shared by every jet with the same variable count and order.
#[derive(Debug)]
pub struct JetLayout {
    nvars: usize,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degree_start: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    // (i, j, k): monomial i times monomial j is monomial k; sorted by degree of k.
    mul: Vec<(u32, u32, u32)>,
    mul_cut: Vec<usize>,
    // per variable: (source, target, exponent factor)
    deriv: Vec<Vec<(u32, u32, f64)>>,
    // for each monomial, the index of the monomial with one power of `var` removed
    parent: Vec<Option<(usize, usize)>>,
    multi_factorial: Vec<f64>,
}

impl JetLayout {
    /// Shared layout for `nvars` variables truncated at `order`.
    pub fn get(nvars: usize, order: usize) -> &'static JetLayout {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static JetLayout>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet layout cache poisoned");
        guard.entry((nvars, order)).or_insert_with(|| Box::leak(Box::new(JetLayout::build(nvars, order))))
    }

    fn build(nvars: usize, order: usize) -> JetLayout {
        let mut exponents: Vec<Vec<u8>> = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for deg in 0..=order {
            degree_start.push(exponents.len());
            let mut current = vec![0u8; nvars];
            push_compositions(&mut exponents, &mut current, 0, deg);
        }
        degree_start.push(exponents.len());

        let lookup: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |e: &Vec<u8>| e.iter().map(|&v| v as usize).sum::<usize>();

        let mut mul = Vec::new();
        for (i, a) in exponents.iter().enumerate() {
            for (j, b) in exponents.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul.push((i as u32, j as u32, lookup[&sum] as u32));
            }
        }
        mul.sort_by_key(|&(_, _, k)| (degree(&exponents[k as usize]), k));
        let mut mul_cut = vec![0usize; order + 1];
        for (d, cut) in mul_cut.iter_mut().enumerate() {
            *cut = mul.iter().take_while(|&&(_, _, k)| degree(&exponents[k as usize]) <= d).count();
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (v, table) in deriv.iter_mut().enumerate() {
            for (src, e) in exponents.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut lowered = e.clone();
                lowered[v] -= 1;
                table.push((src as u32, lookup[&lowered] as u32, e[v] as f64));
            }
        }

        let parent = exponents
            .iter()
            .map(|e| {
                let var = e.iter().rposition(|&p| p > 0)?;
                let mut lowered = e.clone();
                lowered[var] -= 1;
                Some((lookup[&lowered], var))
            })
            .collect();

        let multi_factorial = exponents.iter().map(|e| e.iter().map(|&p| factorial(p as usize)).product()).collect();

        JetLayout { nvars, order, exponents, degree_start, lookup, mul, mul_cut, deriv, parent, multi_factorial }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients needed up to total degree `order`.
    pub fn len_to(&self, order: usize) -> usize {
        self.degree_start[order.min(self.order) + 1]
    }

    pub fn index_of(&self, exponent: &[u8]) -> Option<usize> {
        self.lookup.get(exponent).copied()
    }

    pub fn exponent(&self, index: usize) -> &[u8] {
        &self.exponents[index]
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, var: usize, remaining: usize) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var == current.len() - 1 {
        current[var] = remaining as u8;
        out.push(current.clone());
        current[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k as u8;
        push_compositions(out, current, var + 1, remaining - k);
    }
    current[var] = 0;
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// A truncated Taylor expansion of a scalar field about a point.
#[derive(Clone)]
pub struct Jet {
    layout: &'static JetLayout,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("nvars", &self.layout.nvars).field("order", &self.order).field("coeffs", &self.coeffs).finish()
    }
}

impl Jet {
    pub fn constant(layout: &'static JetLayout, value: f64) -> Jet {
        let mut coeffs = vec![0.0; layout.len_to(layout.order)];
        coeffs[0] = value;
        Jet { layout, order: layout.order, coeffs }
    }

    pub fn zero(layout: &'static JetLayout) -> Jet {
        Jet::constant(layout, 0.0)
    }

    /// The coordinate function `x_var` expanded about `value`.
    pub fn variable(layout: &'static JetLayout, var: usize, value: f64) -> Jet {
        let mut jet = Jet::constant(layout, value);
        if layout.order >= 1 {
            let mut e = vec![0u8; layout.nvars];
            e[var] = 1;
            jet.coeffs[layout.lookup[&e]] = 1.0;
        }
        jet
    }

    /// Seeds one variable jet per coordinate of `point`.
    pub fn seed(point: &[f64], order: usize) -> Vec<Jet> {
        let layout = JetLayout::get(point.len(), order);
        point.iter().enumerate().map(|(v, &x)| Jet::variable(layout, v, x)).collect()
    }

    /// Builds a jet directly from graded Taylor coefficients.
    pub fn from_coeffs(layout: &'static JetLayout, order: usize, mut coeffs: Vec<f64>) -> Jet {
        let order = order.min(layout.order);
        coeffs.resize(layout.len_to(order), 0.0);
        Jet { layout, order, coeffs }
    }

    pub fn layout(&self) -> &'static JetLayout {
        self.layout
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Same constant in the same layout.
    pub fn lift(&self, value: f64) -> Jet {
        Jet::constant(self.layout, value)
    }

    /// Drops coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { layout: self.layout, order, coeffs: self.coeffs[..self.layout.len_to(order)].to_vec() }
    }

    /// The partial derivative `∂^α f` at the base point.
    pub fn partial(&self, exponent: &[u8]) -> Option<f64> {
        let degree: usize = exponent.iter().map(|&e| e as usize).sum();
        if degree > self.order {
            return None;
        }
        let idx = self.layout.index_of(exponent)?;
        Some(self.coeffs[idx] * self.layout.multi_factorial[idx])
    }

    /// First partial derivative at the base point.
    pub fn d1(&self, var: usize) -> f64 {
        let mut e = vec![0u8; self.layout.nvars];
        e[var] = 1;
        self.partial(&e).expect("jet order below 1")
    }

    /// Partial derivative with respect to `var`, as a jet of one lower order.
    ///
    /// Panics on an order-0 jet.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.layout.len_to(order);
        let src_len = self.coeffs.len();
        let mut coeffs = vec![0.0; len];
        for &(src, dst, factor) in &self.layout.deriv[var] {
            let (src, dst) = (src as usize, dst as usize);
            if src < src_len && dst < len {
                coeffs[dst] += factor * self.coeffs[src];
            }
        }
        Jet { layout: self.layout, order, coeffs }
    }

    fn same_layout(&self, other: &Jet) {
        debug_assert!(
            std::ptr::eq(self.layout, other.layout),
            "mixing jets of different layouts ({} vars/{} vs {} vars/{})",
            self.layout.nvars,
            self.layout.order,
            other.layout.nvars,
            other.layout.order
        );
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        self.same_layout(other);
        let order = self.order.min(other.order);
        let len = self.layout.len_to(order);
        let coeffs = (0..len).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Jet { layout: self.layout, order, coeffs }
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet { layout: self.layout, order: self.order, coeffs: self.coeffs.iter().map(|&c| f(c)).collect() }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        self.same_layout(other);
        let order = self.order.min(other.order);
        let len = self.layout.len_to(order);
        let mut coeffs = vec![0.0; len];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &self.layout.mul[..self.layout.mul_cut[order]] {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { layout: self.layout, order, coeffs }
    }

    /// `Σ_k derivs[k]/k! · (self − self(0))^k`: composition with a univariate
    /// function whose derivatives at the base value are `derivs`.
    pub fn compose_univariate(&self, derivs: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut result = Jet::constant(self.layout, derivs[0]).truncate(self.order);
        let mut power = Jet::constant(self.layout, 1.0).truncate(self.order);
        for (k, &dk) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            power = power.mul_jet(&delta);
            if dk != 0.0 {
                let scale = dk / factorial(k);
                for (r, p) in result.coeffs.iter_mut().zip(&power.coeffs) {
                    *r += scale * p;
                }
            }
        }
        result
    }

    fn derivs_len(&self) -> usize {
        self.order + 1
    }

    pub fn recip(&self) -> Jet {
        let x = self.value();
        let mut d = Vec::with_capacity(self.derivs_len());
        let mut term = 1.0 / x;
        for k in 0..self.derivs_len() {
            d.push(term);
            term *= -((k + 1) as f64) / x;
        }
        self.compose_univariate(&d)
    }

    /// `self^a` for real `a`; the base value must be positive unless `a` is an integer.
    pub fn powf(&self, a: f64) -> Jet {
        let x = self.value();
        let mut d = Vec::with_capacity(self.derivs_len());
        let mut coef = 1.0;
        for k in 0..self.derivs_len() {
            d.push(coef * x.powf(a - k as f64));
            coef *= a - k as f64;
        }
        self.compose_univariate(&d)
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut result = Jet::constant(self.layout, 1.0).truncate(self.order);
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        result
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose_univariate(&vec![e; self.derivs_len()])
    }

    pub fn ln(&self) -> Jet {
        let x = self.value();
        let mut d = vec![x.ln()];
        let mut term = 1.0 / x;
        for k in 1..self.derivs_len() {
            d.push(term);
            term *= -(k as f64) / x;
        }
        self.compose_univariate(&d)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 4]).collect();
        self.compose_univariate(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 4]).collect();
        self.compose_univariate(&d)
    }

    pub fn sinh(&self) -> Jet {
        let x = self.value();
        let cycle = [x.sinh(), x.cosh()];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 2]).collect();
        self.compose_univariate(&d)
    }

    pub fn cosh(&self) -> Jet {
        let x = self.value();
        let cycle = [x.cosh(), x.sinh()];
        let d: Vec<f64> = (0..self.derivs_len()).map(|k| cycle[k % 2]).collect();
        self.compose_univariate(&d)
    }

    /// Substitutes `inner` for this jet's variables.
    ///
    /// `self` is a polynomial in `inner.len()` variables about some base point
    /// `y0`; `inner[v]` must be a jet (in any common layout) whose constant term
    /// is the displacement from `y0`, normally zero. The result lives in the
    /// layout of `inner`.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(inner.len(), self.layout.nvars, "compose: variable count mismatch");
        let target = match inner.first() {
            Some(j) => j.layout,
            None => return Jet::constant(JetLayout::get(0, self.order), self.value()),
        };
        let order = inner.iter().map(|j| j.order).min().unwrap_or(0).min(self.order);
        let len = self.layout.len_to(order);
        let mut monomials: Vec<Jet> = Vec::with_capacity(len);
        let mut result = Jet::zero(target).truncate(order);
        for idx in 0..len {
            let mono = match self.layout.parent[idx] {
                None => Jet::constant(target, 1.0).truncate(order),
                Some((p, var)) => monomials[p].mul_jet(&inner[var]),
            };
            let c = self.coeffs[idx];
            if c != 0.0 {
                for (r, m) in result.coeffs.iter_mut().zip(&mono.coeffs) {
                    *r += c * m;
                }
            }
            monomials.push(mono);
        }
        result
    }
}

/// Re-expresses `f` and its first partials in the variables of `x`.
///
/// `f` is evaluated on fresh variable jets about the base point of `x`, one
/// order higher than `x` carries, then composed back onto `x`. This is how
/// derivative-taking wrappers (exterior derivatives, pullbacks, finite-order
/// promotions) keep full jets without differencing.
pub fn eval_with_partials<E>(x: &[Jet], f: impl Fn(&[Jet]) -> Result<Vec<Jet>, E>) -> Result<(Vec<Jet>, Vec<Vec<Jet>>), E> {
    let order = x.iter().map(Jet::order).min().unwrap_or(0);
    let base: Vec<f64> = x.iter().map(Jet::value).collect();
    let seeds = Jet::seed(&base, order + 1);
    let outputs = f(&seeds)?;
    let shifted: Vec<Jet> = x
        .iter()
        .map(|j| {
            let mut d = j.clone();
            d.coeffs[0] = 0.0;
            d
        })
        .collect();
    if x.is_empty() {
        let values = outputs.iter().map(|o| o.truncate(order)).collect();
        return Ok((values, Vec::new()));
    }
    let values = outputs.iter().map(|o| o.truncate(order).compose(&shifted)).collect();
    let partials = (0..x.len()).map(|v| outputs.iter().map(|o| o.derivative(v).compose(&shifted)).collect()).collect();
    Ok((values, partials))
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|c| -c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.map(|c| c * rhs)
    }
}

impl Div<f64> for &Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.map(|c| c / rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        &self + rhs
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        &self - rhs
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        &self * rhs
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        &self / rhs
    }
}

impl Mul<&Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        rhs * self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &rhs * self
    }
}

impl Sub<&Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        &(-rhs) + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self - &rhs
    }
}

impl Add<&Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        rhs + self
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &rhs + self
    }
}

/// Sum of jets; `zero` supplies the layout when the iterator is empty.
pub fn jet_sum(zero: &Jet, items: impl IntoIterator<Item = Jet>) -> Jet {
    items.into_iter().fold(zero.clone(), |acc, item| &acc + &item)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn layout_counts_monomials() {
        assert_eq!(JetLayout::get(4, 4).len_to(4), 70);
        assert_eq!(JetLayout::get(8, 2).len_to(2), 45);
        assert_eq!(JetLayout::get(0, 3).len_to(3), 1);
        assert_eq!(JetLayout::get(3, 2).len_to(1), 4);
    }

    #[test]
    fn product_rule_matches_closed_form() {
        // f = x^2 y^3 at (1.5, -0.5)
        let v = Jet::seed(&[1.5, -0.5], 4);
        let f = v[0].powi(2) * v[1].powi(3);
        let (x, y): (f64, f64) = (1.5, -0.5);
        assert_relative_eq!(f.value(), x * x * y.powi(3));
        assert_relative_eq!(f.partial(&[1, 0]).unwrap(), 2.0 * x * y.powi(3));
        assert_relative_eq!(f.partial(&[1, 2]).unwrap(), 2.0 * x * 6.0 * y);
        assert_relative_eq!(f.partial(&[2, 2]).unwrap(), 2.0 * 6.0 * y);
        assert_relative_eq!(f.partial(&[0, 4]).unwrap(), 0.0);
    }

    #[test]
    fn transcendental_derivatives() {
        let x = Jet::seed(&[0.7], 4);
        let s = x[0].sin();
        assert_relative_eq!(s.partial(&[3]).unwrap(), -0.7f64.cos(), epsilon = 1e-14);
        let l = x[0].ln();
        assert_relative_eq!(l.partial(&[2]).unwrap(), -1.0 / 0.49, epsilon = 1e-12);
        let r = x[0].recip();
        assert_relative_eq!(r.partial(&[4]).unwrap(), 24.0 / 0.7f64.powi(5), epsilon = 1e-9);
        let q = x[0].sqrt();
        assert_relative_eq!(q.partial(&[2]).unwrap(), -0.25 * 0.7f64.powf(-1.5), epsilon = 1e-12);
        let h = x[0].sinh() * x[0].cosh();
        // sinh cosh = sinh(2x)/2; third derivative 4 cosh(2x)
        assert_relative_eq!(h.partial(&[3]).unwrap(), 4.0 * 1.4f64.cosh(), epsilon = 1e-12);
    }

    #[test]
    fn derivative_lowers_order() {
        let v = Jet::seed(&[0.3, 0.2], 3);
        let f = v[0].exp() * &v[1];
        let fx = f.derivative(0);
        assert_eq!(fx.order(), 2);
        assert_relative_eq!(fx.partial(&[1, 1]).unwrap(), 0.3f64.exp(), epsilon = 1e-14);
        assert!(fx.partial(&[3, 0]).is_none());
    }

    #[test]
    fn compose_is_chain_rule() {
        // g(y) = y0 * y1^2 expanded at (2, 3); y = (2 + t, 3 + t^2) in one variable t at 0.
        let y = Jet::seed(&[2.0, 3.0], 3);
        let g = &y[0] * &y[1].powi(2);
        let t = Jet::seed(&[0.0], 3);
        let inner = vec![t[0].clone(), &t[0] * &t[0]];
        let h = g.compose(&inner);
        // h(t) = (2+t)(3+t^2)^2; h'(0) = 9, h''(0) = 2*2*6 + 0 = 24 + ... compute explicitly
        let exact = |t: f64| (2.0 + t) * (3.0 + t * t).powi(2);
        let fd = (exact(1e-4) - exact(-1e-4)) / 2e-4;
        assert_relative_eq!(h.d1(0), fd, epsilon = 1e-6);
        let fd2 = (exact(1e-3) - 2.0 * exact(0.0) + exact(-1e-3)) / 1e-6;
        assert_relative_eq!(h.partial(&[2]).unwrap(), fd2, epsilon = 1e-4);
    }

    #[test]
    fn eval_with_partials_promotes_order() {
        let x = Jet::seed(&[0.4, 1.1], 1);
        let (vals, parts) = eval_with_partials::<()>(&x, |v| Ok(vec![&v[0].sin() * &v[1]])).unwrap();
        assert_relative_eq!(vals[0].value(), 0.4f64.sin() * 1.1);
        // ∂_0 f as a jet of order 1: its own derivative wrt x0 is -sin(x0) x1
        assert_eq!(parts[0][0].order(), 1);
        assert_relative_eq!(parts[0][0].d1(0), -0.4f64.sin() * 1.1, epsilon = 1e-14);
        assert_relative_eq!(parts[1][0].d1(0), 0.4f64.cos(), epsilon = 1e-14);
    }
}
