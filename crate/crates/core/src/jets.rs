//! Truncated Taylor arithmetic in `(λ, r, t)` and the rational function
//! `z(λ, r, t) = (λ² + r² − t²)/(2rλ)` with its derivatives.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const LAMBDA: usize = 0;
pub const R: usize = 1;
pub const T: usize = 2;

/// Dense jet over the box `i ≤ orders[0], j ≤ orders[1], k ≤ orders[2]`.
/// Coefficients are Taylor coefficients `∂^α f / α!` at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    orders: [usize; 3],
    base: [f64; 3],
    coeffs: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

impl Jet {
    pub fn zero(base: [f64; 3], orders: [usize; 3]) -> Self {
        let len = (orders[0] + 1) * (orders[1] + 1) * (orders[2] + 1);
        Self {
            orders,
            base,
            coeffs: vec![0.0; len],
        }
    }

    pub fn constant(base: [f64; 3], orders: [usize; 3], c: f64) -> Self {
        let mut jet = Self::zero(base, orders);
        jet.coeffs[0] = c;
        jet
    }

    /// The coordinate function along `axis`.
    pub fn variable(base: [f64; 3], orders: [usize; 3], axis: usize) -> Self {
        let mut jet = Self::constant(base, orders, base[axis]);
        if orders[axis] >= 1 {
            let mut idx = [0usize; 3];
            idx[axis] = 1;
            let at = jet.index(idx);
            jet.coeffs[at] = 1.0;
        }
        jet
    }

    /// Jet of a function of one variable along `axis` from its Taylor
    /// coefficients at `base[axis]`.
    pub fn univariate(base: [f64; 3], orders: [usize; 3], axis: usize, taylor: &[f64]) -> Self {
        let mut jet = Self::zero(base, orders);
        for (s, c) in taylor.iter().enumerate().take(orders[axis] + 1) {
            let mut idx = [0usize; 3];
            idx[axis] = s;
            let at = jet.index(idx);
            jet.coeffs[at] = *c;
        }
        jet
    }

    #[inline]
    fn index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * (self.orders[1] + 1) + idx[1]) * (self.orders[2] + 1) + idx[2]
    }

    pub fn orders(&self) -> [usize; 3] {
        self.orders
    }

    pub fn base(&self) -> [f64; 3] {
        self.base
    }

    pub fn total_order(&self) -> usize {
        self.orders.iter().sum()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        if i > self.orders[0] || j > self.orders[1] || k > self.orders[2] {
            return 0.0;
        }
        self.coeffs[self.index([i, j, k])]
    }

    /// `∂_λ^i ∂_r^j ∂_t^k` of the represented function at the base point.
    pub fn partial(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        if i > self.orders[0] || j > self.orders[1] || k > self.orders[2] {
            return Err(Error::DerivativeOrder {
                requested: i + j + k,
                available: self.total_order(),
            });
        }
        Ok(self.coeff(i, j, k) * factorial(i) * factorial(j) * factorial(k))
    }

    fn same_shape(&self, other: &Jet) {
        assert_eq!(self.orders, other.orders, "jet orders differ");
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            orders: self.orders,
            base: self.base,
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Restrict to smaller retained orders.
    pub fn truncate(&self, orders: [usize; 3]) -> Jet {
        let orders = [
            orders[0].min(self.orders[0]),
            orders[1].min(self.orders[1]),
            orders[2].min(self.orders[2]),
        ];
        let mut out = Jet::zero(self.base, orders);
        for i in 0..=orders[0] {
            for j in 0..=orders[1] {
                for k in 0..=orders[2] {
                    let at = out.index([i, j, k]);
                    out.coeffs[at] = self.coeff(i, j, k);
                }
            }
        }
        out
    }

    /// Partial derivative along `axis`; the retained order on that axis
    /// drops by one.
    pub fn derivative(&self, axis: usize) -> Result<Jet> {
        if self.orders[axis] == 0 {
            return Err(Error::DerivativeOrder {
                requested: 1,
                available: 0,
            });
        }
        let mut orders = self.orders;
        orders[axis] -= 1;
        let mut out = Jet::zero(self.base, orders);
        for i in 0..=orders[0] {
            for j in 0..=orders[1] {
                for k in 0..=orders[2] {
                    let mut src = [i, j, k];
                    src[axis] += 1;
                    let at = out.index([i, j, k]);
                    out.coeffs[at] = self.coeff(src[0], src[1], src[2]) * src[axis] as f64;
                }
            }
        }
        Ok(out)
    }

    /// `g ∘ self`, given the Taylor coefficients of `g` at `self.value()`.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let top = taylor.len().saturating_sub(1).min(self.total_order());
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.base, self.orders, taylor.get(top).copied().unwrap_or(0.0));
        for s in (0..top).rev() {
            acc = &acc * &delta;
            acc.coeffs[0] += taylor[s];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let x0 = self.value();
        if x0 == 0.0 || !x0.is_finite() {
            return Err(Error::Pole(format!(
                "reciprocal of a jet with constant term {x0}"
            )));
        }
        let n = self.total_order();
        let mut taylor = Vec::with_capacity(n + 1);
        let mut c = 1.0 / x0;
        for _ in 0..=n {
            taylor.push(c);
            c *= -1.0 / x0;
        }
        Ok(self.compose(&taylor))
    }

    /// `self^p` for a jet with positive constant term.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let x0 = self.value();
        if !(x0 > 0.0) {
            return Err(Error::Domain(format!(
                "real power of a jet with constant term {x0}"
            )));
        }
        let n = self.total_order();
        let mut taylor = Vec::with_capacity(n + 1);
        let mut c = x0.powf(p);
        for s in 0..=n {
            taylor.push(c);
            c *= (p - s as f64) / ((s + 1) as f64 * x0);
        }
        Ok(self.compose(&taylor))
    }

    pub fn exp(&self) -> Jet {
        let n = self.total_order();
        let mut taylor = Vec::with_capacity(n + 1);
        let mut c = self.value().exp();
        for s in 0..=n {
            taylor.push(c);
            c /= (s + 1) as f64;
        }
        self.compose(&taylor)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.same_shape(rhs);
        Jet {
            orders: self.orders,
            base: self.base,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.same_shape(rhs);
        Jet {
            orders: self.orders,
            base: self.base,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.same_shape(rhs);
        let [o0, o1, o2] = self.orders;
        let mut out = Jet::zero(self.base, self.orders);
        for a0 in 0..=o0 {
            for a1 in 0..=o1 {
                for a2 in 0..=o2 {
                    let x = self.coeffs[self.index([a0, a1, a2])];
                    if x == 0.0 {
                        continue;
                    }
                    for b0 in 0..=(o0 - a0) {
                        for b1 in 0..=(o1 - a1) {
                            for b2 in 0..=(o2 - a2) {
                                let y = rhs.coeffs[rhs.index([b0, b1, b2])];
                                let at = out.index([a0 + b0, a1 + b1, a2 + b2]);
                                out.coeffs[at] += x * y;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_scalar(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

fn check_lambda_r(lambda: f64, r: f64) -> Result<()> {
    if !(lambda > 0.0) || !(r > 0.0) {
        return Err(Error::Domain(format!(
            "z requires λ > 0 and r > 0, got λ = {lambda}, r = {r}"
        )));
    }
    Ok(())
}

pub fn z_value(lambda: f64, r: f64, t: f64) -> Result<f64> {
    check_lambda_r(lambda, r)?;
    Ok((lambda * lambda + r * r - t * t) / (2.0 * r * lambda))
}

pub fn z_jet(lambda: f64, r: f64, t: f64, orders: [usize; 3]) -> Result<Jet> {
    check_lambda_r(lambda, r)?;
    let base = [lambda, r, t];
    let l = Jet::variable(base, orders, LAMBDA);
    let rr = Jet::variable(base, orders, R);
    let tt = Jet::variable(base, orders, T);
    let num = &(&(&l * &l) + &(&rr * &rr)) - &(&tt * &tt);
    let den = (&rr * &l).scale(2.0).recip()?;
    Ok(&num * &den)
}

/// `∂_λ z = (λ² + t² − r²)/(2rλ²)`.
pub fn dlambda_z(lambda: f64, r: f64, t: f64) -> Result<f64> {
    check_lambda_r(lambda, r)?;
    Ok((lambda * lambda + t * t - r * r) / (2.0 * r * lambda * lambda))
}

/// The constant in `∂_λ^i z = C(i)(t² − r²)/(rλ^{i+1})`, `i ≥ 2`.
///
/// Writing `z = λ/(2r) + (r² − t²)/(2rλ)` gives `C(i) = (−1)^{i+1} i!/2`.
pub fn dlambda_z_constant(i: usize) -> f64 {
    let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
    sign * factorial(i) / 2.0
}

/// Closed form of `∂_λ^i z`.
pub fn dlambda_z_closed(i: usize, lambda: f64, r: f64, t: f64) -> Result<f64> {
    check_lambda_r(lambda, r)?;
    Ok(match i {
        0 => (lambda * lambda + r * r - t * t) / (2.0 * r * lambda),
        1 => (lambda * lambda + t * t - r * r) / (2.0 * r * lambda * lambda),
        _ => dlambda_z_constant(i) * (t * t - r * r) / (r * lambda.powi(i as i32 + 1)),
    })
}

/// Jet of `(∂_λ z)^{-1} = 2rλ²/(λ² + t² − r²)`.
pub fn inv_dlambda_z_jet(lambda: f64, r: f64, t: f64, orders: [usize; 3]) -> Result<Jet> {
    check_lambda_r(lambda, r)?;
    // For t ≥ r the denominator is at least λ², so only t < r can hit the pole.
    let denom = lambda * lambda + (t - r) * (t + r);
    if t < r && denom.abs() <= 4.0 * f64::EPSILON * (lambda * lambda + t * t + r * r) {
        return Err(Error::Pole(format!(
            "λ² + t² − r² vanishes at (λ, r, t) = ({lambda}, {r}, {t})"
        )));
    }
    let base = [lambda, r, t];
    let l = Jet::variable(base, orders, LAMBDA);
    let rr = Jet::variable(base, orders, R);
    let tt = Jet::variable(base, orders, T);
    let num = (&rr * &(&l * &l)).scale(2.0);
    let den = &(&l * &l) + &(&(&tt - &rr) * &(&tt + &rr));
    Ok(&num * &den.recip()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let d1 = d(h);
        let d2 = d(h / 2.0);
        let d4 = d(h / 4.0);
        let e1 = (4.0 * d2 - d1) / 3.0;
        let e2 = (4.0 * d4 - d2) / 3.0;
        (16.0 * e2 - e1) / 15.0
    }

    #[test]
    fn z_light_cone_values() {
        for &(r, t) in &[(1.0, 0.5), (0.3, 2.0), (4.0, 7.0)] {
            assert!((z_value(t + r, r, t).unwrap() - 1.0).abs() < 1e-14);
            if t > r {
                assert!((z_value(t - r, r, t).unwrap() + 1.0).abs() < 1e-14);
            }
        }
        for &(l, r) in &[(0.2, 3.0), (1.0, 1.0), (5.0, 0.1)] {
            assert!(z_value(l, r, 0.0).unwrap() >= 1.0);
        }
        assert!(z_value(0.0, 1.0, 1.0).is_err());
        assert!(z_value(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn z_jet_pure_lambda_closed_forms() {
        for &(l, r, t) in &[(1.3, 0.7, 2.1), (0.4, 2.0, 1.1), (3.0, 1.0, 1.0)] {
            let jet = z_jet(l, r, t, [6, 0, 0]).unwrap();
            for i in 0..=6 {
                let closed = dlambda_z_closed(i, l, r, t).unwrap();
                let got = jet.partial(i, 0, 0).unwrap();
                assert!((got - closed).abs() <= 1e-12 * closed.abs().max(1.0), "i = {i}");
            }
        }
        let jet = z_jet(1.0, 1.0, 1.0, [3, 0, 0]).unwrap();
        assert!(jet.partial(2, 0, 0).unwrap().abs() < 1e-14);
        assert!(jet.partial(3, 0, 0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn z_jet_mixed_matches_finite_differences() {
        let (l, r, t) = (1.7, 0.9, 2.3);
        let jet = z_jet(l, r, t, [2, 2, 2]).unwrap();
        let h = 1e-2;
        let fr = richardson(|x| z_value(l, x, t).unwrap(), r, h);
        let ft = richardson(|x| z_value(l, r, x).unwrap(), t, h);
        let frt = richardson(
            |y| richardson(|x| z_value(l, x, y).unwrap(), r, h),
            t,
            h,
        );
        let flr = richardson(
            |y| richardson(|x| z_value(x, y, t).unwrap(), l, h),
            r,
            h,
        );
        assert!((jet.partial(0, 1, 0).unwrap() - fr).abs() < 1e-8);
        assert!((jet.partial(0, 0, 1).unwrap() - ft).abs() < 1e-8);
        assert!((jet.partial(0, 1, 1).unwrap() - frt).abs() < 1e-8);
        assert!((jet.partial(1, 1, 0).unwrap() - flr).abs() < 1e-8);
    }

    #[test]
    fn inverse_derivative_constant_term() {
        let jet = inv_dlambda_z_jet(1.0, 1.0, 2.0, [1, 1, 1]).unwrap();
        assert!((jet.value() - 0.5).abs() < 1e-15);
        assert!(matches!(
            inv_dlambda_z_jet(1.0, 2.0, 3f64.sqrt(), [0, 0, 0]),
            Err(Error::Pole(_))
        ));
    }

    #[test]
    fn inverse_derivative_matches_finite_differences() {
        let closed = |l: f64, r: f64, t: f64| 2.0 * r * l * l / (l * l + t * t - r * r);
        let (l, r, t) = (1.2, 0.8, 2.5);
        let jet = inv_dlambda_z_jet(l, r, t, [1, 1, 1]).unwrap();
        let h = 1e-2;
        let fl = richardson(|x| closed(x, r, t), l, h);
        let fr = richardson(|x| closed(l, x, t), r, h);
        let ft = richardson(|x| closed(l, r, x), t, h);
        assert!((jet.partial(1, 0, 0).unwrap() - fl).abs() < 1e-8);
        assert!((jet.partial(0, 1, 0).unwrap() - fr).abs() < 1e-8);
        assert!((jet.partial(0, 0, 1).unwrap() - ft).abs() < 1e-8);
    }

    #[test]
    fn derivative_and_truncate() {
        let base = [0.5, 0.0, 0.0];
        let x = Jet::variable(base, [4, 0, 0], LAMBDA);
        let cube = &(&x * &x) * &x;
        let d = cube.derivative(LAMBDA).unwrap();
        assert_eq!(d.orders(), [3, 0, 0]);
        assert!((d.value() - 0.75).abs() < 1e-15);
        assert!((d.partial(1, 0, 0).unwrap() - 3.0).abs() < 1e-15);
        assert!(d.truncate([1, 0, 0]).partial(2, 0, 0).is_err());
    }

    #[test]
    fn elementary_functions() {
        let base = [0.7, 0.0, 0.0];
        let x = Jet::variable(base, [5, 0, 0], LAMBDA);
        let e = x.exp();
        for s in 0..=5 {
            assert!((e.partial(s, 0, 0).unwrap() - 0.7f64.exp()).abs() < 1e-13);
        }
        let p = x.powf(2.5).unwrap();
        assert!((p.partial(2, 0, 0).unwrap() - 2.5 * 1.5 * 0.7f64.powf(0.5)).abs() < 1e-13);
        let inv = x.recip().unwrap();
        let one = &inv * &x;
        assert!((one.value() - 1.0).abs() < 1e-15);
        for s in 1..=5 {
            assert!(one.coeff(s, 0, 0).abs() < 1e-13);
        }
        assert!(Jet::constant(base, [2, 0, 0], 0.0).recip().is_err());
    }

    fn jet_strategy() -> impl Strategy<Value = Jet> {
        prop::collection::vec(-4i32..=4, 3 * 2 * 3).prop_map(|c| {
            let mut jet = Jet::zero([0.0; 3], [2, 1, 2]);
            for (slot, v) in jet.coeffs.iter_mut().zip(c) {
                *slot = v as f64;
            }
            jet
        })
    }

    proptest! {
        #[test]
        fn multiplication_commutes(a in jet_strategy(), b in jet_strategy()) {
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn multiplication_associates(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }
    }
}
