//! Radial initial-data profiles with analytic derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Jet, LAMBDA};

/// A function of `λ > 0` that can report Taylor coefficients
/// `f^{(s)}(λ)/s!` for `s = 0..=order`.
pub trait ProfileFn: Send + Sync {
    fn taylor(&self, lambda: f64, order: usize) -> Vec<f64>;
}

impl<F> ProfileFn for F
where
    F: Fn(f64, usize) -> Vec<f64> + Send + Sync,
{
    fn taylor(&self, lambda: f64, order: usize) -> Vec<f64> {
        self(lambda, order)
    }
}

/// Data-envelope certificate `(ε, k, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub eps: f64,
    pub k: f64,
    pub l: u32,
}

/// Taylor coefficients at `x` of the bump `A · e · exp(−1/(1 − y²))`,
/// `y = (2x − lo − hi)/(hi − lo)`, which vanishes outside `(lo, hi)`.
pub fn bump_taylor(x: f64, lo: f64, hi: f64, amplitude: f64, order: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let y0 = (x - mid) / half;
    let q0 = 1.0 - y0 * y0;
    if !(q0 > 0.0) || 1.0 / q0 > 700.0 {
        return vec![0.0; order + 1];
    }
    let y = lambda_jet(x, order).add_scalar(-mid).scale(1.0 / half);
    let q = (&y * &y).scale(-1.0).add_scalar(1.0);
    let g = q.recip().expect("nonzero").scale(-1.0).add_scalar(1.0).exp();
    jet_taylor(&g.scale(amplitude), order)
}

/// Taylor coefficients of `1/(1 + exp(1/(1 − y) − 1/y))`,
/// `y = (x − lo)/(hi − lo)`: 1 below `lo`, 0 above `hi`, smooth between.
fn step_taylor(x: f64, lo: f64, hi: f64, order: usize) -> Vec<f64> {
    let y0 = (x - lo) / (hi - lo);
    let mut out = vec![0.0; order + 1];
    if y0 <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if y0 >= 1.0 {
        return out;
    }
    let e0 = 1.0 / (1.0 - y0) - 1.0 / y0;
    if e0 > 700.0 {
        return out;
    }
    if e0 < -700.0 {
        out[0] = 1.0;
        return out;
    }
    let y = lambda_jet(x, order).add_scalar(-lo).scale(1.0 / (hi - lo));
    let e = &y.scale(-1.0).add_scalar(1.0).recip().expect("y < 1") - &y.recip().expect("y > 0");
    let s = e.exp().add_scalar(1.0).recip().expect("positive");
    jet_taylor(&s, order)
}

#[derive(Clone)]
pub struct RadialProfile {
    func: Arc<dyn ProfileFn>,
    max_order: usize,
    envelope: Option<Envelope>,
    support: Option<(f64, f64)>,
    breakpoints: Vec<f64>,
    label: String,
    zero: bool,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("max_order", &self.max_order)
            .field("envelope", &self.envelope)
            .field("support", &self.support)
            .finish()
    }
}

fn lambda_jet(lambda: f64, order: usize) -> Jet {
    Jet::variable([lambda, 0.0, 0.0], [order, 0, 0], LAMBDA)
}

fn jet_taylor(jet: &Jet, order: usize) -> Vec<f64> {
    (0..=order).map(|s| jet.coeff(s, 0, 0)).collect()
}

impl RadialProfile {
    pub fn from_fn<F>(label: impl Into<String>, max_order: usize, f: F) -> Self
    where
        F: ProfileFn + 'static,
    {
        Self {
            func: Arc::new(f),
            max_order,
            envelope: None,
            support: None,
            breakpoints: Vec::new(),
            label: label.into(),
            zero: false,
        }
    }

    pub fn zero() -> Self {
        let mut p = Self::from_fn("zero", usize::MAX, |_l: f64, order: usize| {
            vec![0.0; order + 1]
        });
        p.zero = true;
        p
    }

    /// `c λ^p (1 + λ)^q`.
    pub fn power(c: f64, p: f64, q: f64) -> Self {
        let mut prof = Self::from_fn(
            format!("power({c:e}, {p}, {q})"),
            usize::MAX,
            move |lambda: f64, order: usize| {
                if !(lambda > 0.0) {
                    return vec![f64::NAN; order + 1];
                }
                let x = lambda_jet(lambda, order);
                let a = x.powf(p).expect("positive base");
                let b = x.add_scalar(1.0).powf(q).expect("positive base");
                jet_taylor(&(&a * &b).scale(c), order)
            },
        );
        prof.breakpoints = vec![1.0];
        prof
    }

    /// `A · e · exp(−1/(1 − x²))` with `x` mapping `[lo, hi]` onto
    /// `[−1, 1]`; peak value `A`, zero outside `(lo, hi)`.
    pub fn bump(lo: f64, hi: f64, amplitude: f64) -> Result<Self> {
        if !(hi > lo && lo >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bump needs 0 ≤ lo < hi, got [{lo}, {hi}]"
            )));
        }
        let mut prof = Self::from_fn(
            format!("bump[{lo}, {hi}]"),
            usize::MAX,
            move |lambda: f64, order: usize| bump_taylor(lambda, lo, hi, amplitude, order),
        );
        prof.support = Some((lo, hi));
        prof.breakpoints = vec![0.5 * (lo + hi)];
        Ok(prof)
    }

    /// Smooth step equal to 1 for `λ ≤ lo` and 0 for `λ ≥ hi`, or the
    /// reverse when `rising`.
    pub fn step(lo: f64, hi: f64, rising: bool) -> Result<Self> {
        if !(hi > lo && lo >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "step needs 0 ≤ lo < hi, got [{lo}, {hi}]"
            )));
        }
        let mut prof = Self::from_fn(
            format!("step[{lo}, {hi}]"),
            usize::MAX,
            move |lambda: f64, order: usize| {
                let falling = step_taylor(lambda, lo, hi, order);
                if rising {
                    let mut v: Vec<f64> = falling.iter().map(|c| -c).collect();
                    v[0] += 1.0;
                    v
                } else {
                    falling
                }
            },
        );
        prof.breakpoints = vec![lo, hi];
        if !rising {
            prof.support = Some((0.0, hi));
        }
        Ok(prof)
    }

    /// Pointwise product, with Leibniz-rule derivatives.
    pub fn product(&self, other: &RadialProfile) -> Self {
        let a = self.clone();
        let b = other.clone();
        let max_order = self.max_order.min(other.max_order);
        let support = match (self.support, other.support) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.max(b0), a1.min(b1))),
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        };
        let mut breakpoints = self.breakpoints.clone();
        breakpoints.extend_from_slice(&other.breakpoints);
        let zero = self.zero || other.zero;
        let mut p = Self::from_fn(
            format!("{}*{}", self.label, other.label),
            max_order,
            move |lambda: f64, order: usize| {
                let x = a.func.taylor(lambda, order);
                let y = b.func.taylor(lambda, order);
                (0..=order)
                    .map(|s| (0..=s).map(|q| x[q] * y[s - q]).sum())
                    .collect()
            },
        );
        p.support = support;
        p.breakpoints = breakpoints;
        p.zero = zero;
        p
    }

    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.clone();
        let mut p = Self::from_fn(
            format!("{c:e}*{}", self.label),
            self.max_order,
            move |lambda: f64, order: usize| {
                inner.func.taylor(lambda, order).into_iter().map(|v| v * c).collect()
            },
        );
        p.support = self.support;
        p.breakpoints = self.breakpoints.clone();
        p.envelope = self.envelope;
        p.zero = self.zero || c == 0.0;
        p
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints.extend_from_slice(points);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Length over which the profile changes appreciably: the support
    /// width when compact, else 1.
    pub fn feature_scale(&self) -> f64 {
        match self.support {
            Some((lo, hi)) if hi > lo => (hi - lo).min(1.0),
            _ => 1.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Taylor coefficients `f^{(s)}(λ)/s!`, `s = 0..=order`.
    pub fn taylor(&self, lambda: f64, order: usize) -> Result<Vec<f64>> {
        if order > self.max_order {
            return Err(Error::DerivativeOrder {
                requested: order,
                available: self.max_order,
            });
        }
        if self.zero {
            return Ok(vec![0.0; order + 1]);
        }
        if let Some((lo, hi)) = self.support {
            if lambda <= lo || lambda >= hi {
                return Ok(vec![0.0; order + 1]);
            }
        }
        Ok(self.func.taylor(lambda, order))
    }

    /// Derivatives `f^{(s)}(λ)`, `s = 0..=order`.
    pub fn derivatives(&self, lambda: f64, order: usize) -> Result<Vec<f64>> {
        let mut out = self.taylor(lambda, order)?;
        let mut fact = 1.0;
        for (s, v) in out.iter_mut().enumerate() {
            if s > 0 {
                fact *= s as f64;
            }
            *v *= fact;
        }
        Ok(out)
    }

    pub fn value(&self, lambda: f64) -> Result<f64> {
        Ok(self.taylor(lambda, 0)?[0])
    }

    /// `Σ_{s ≤ order} λ^{s + shift} |f^{(s)}(λ)|`.
    pub fn weighted_sum(&self, lambda: f64, order: usize, shift: i32) -> Result<f64> {
        let d = self.derivatives(lambda, order)?;
        Ok(d
            .iter()
            .enumerate()
            .map(|(s, v)| lambda.powi(s as i32 + shift) * v.abs())
            .sum())
    }

    /// Checks `Σ_{s ≤ order} λ^s |f^{(s)}| = O(λ^{−2m−2+δ})` as `λ → 0`
    /// on the sequence `λ = 10^{−q}`.
    pub fn check_singularity(&self, order: usize, m: u32, delta: f64) -> Result<()> {
        if self.zero {
            return Ok(());
        }
        if let Some((lo, _)) = self.support {
            if lo > 0.0 {
                return Ok(());
            }
        }
        let expo = 2.0 * m as f64 + 2.0 - delta;
        let ratio = |lambda: f64| -> Result<f64> {
            Ok(self.weighted_sum(lambda, order, 0)? * lambda.powf(expo))
        };
        let reference = (0..=3)
            .map(|q| ratio(10f64.powi(-q)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        for q in 4..=12 {
            let v = ratio(10f64.powi(-q))?;
            if !v.is_finite() || v > 10.0 * reference.max(f64::MIN_POSITIVE) {
                return Err(Error::Profile(format!(
                    "{}: singularity condition fails near λ = 1e-{q} (ratio {v:e})",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_derivatives() {
        let p = RadialProfile::power(2.0, -1.0, -2.0);
        let lam = 0.8;
        let f = |x: f64| 2.0 / (x * (1.0 + x) * (1.0 + x));
        let d = p.derivatives(lam, 2).unwrap();
        assert!((d[0] - f(lam)).abs() < 1e-14);
        let h = 1e-4;
        let fd1 = (f(lam + h) - f(lam - h)) / (2.0 * h);
        let fd2 = (f(lam + h) - 2.0 * f(lam) + f(lam - h)) / (h * h);
        assert!((d[1] - fd1).abs() < 1e-6);
        assert!((d[2] - fd2).abs() < 1e-4);
    }

    #[test]
    fn bump_support_and_peak() {
        let b = RadialProfile::bump(1.0, 2.0, 3.0).unwrap();
        assert_eq!(b.value(0.5).unwrap(), 0.0);
        assert_eq!(b.value(2.0).unwrap(), 0.0);
        assert!((b.value(1.5).unwrap() - 3.0).abs() < 1e-14);
        assert!(b.derivatives(1.5, 1).unwrap()[1].abs() < 1e-13);
        let d = b.derivatives(1.0 + 1e-3, 6).unwrap();
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn order_limit_enforced() {
        let p = RadialProfile::power(1.0, 0.0, -1.0).with_max_order(2);
        assert!(p.taylor(1.0, 3).is_err());
        assert!(p.taylor(1.0, 2).is_ok());
    }

    #[test]
    fn product_leibniz() {
        let a = RadialProfile::power(1.0, 2.0, 0.0);
        let b = RadialProfile::power(1.0, 1.0, 0.0);
        let c = a.product(&b);
        let d = c.derivatives(1.3, 3).unwrap();
        assert!((d[0] - 1.3f64.powi(3)).abs() < 1e-14);
        assert!((d[3] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn singularity_condition() {
        let ok = RadialProfile::power(1.0, -2.0, -1.0);
        assert!(ok.check_singularity(1, 1, 0.5).is_ok());
        let bad = RadialProfile::power(1.0, -5.0, 0.0);
        assert!(bad.check_singularity(0, 1, 0.5).is_err());
    }

    #[test]
    fn step_is_a_partition_of_unity() {
        let down = RadialProfile::step(2.0, 2.5, false).unwrap();
        let up = RadialProfile::step(2.0, 2.5, true).unwrap();
        assert_eq!(down.value(1.9).unwrap(), 1.0);
        assert_eq!(down.value(2.6).unwrap(), 0.0);
        assert!((down.value(2.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(down.value(2.01).unwrap() > 0.999 && down.value(2.49).unwrap() < 1e-3);
        assert!(down.value(2.1).unwrap() > down.value(2.2).unwrap());
        for x in [2.05, 2.2, 2.4] {
            let (a, b) = (down.derivatives(x, 3).unwrap(), up.derivatives(x, 3).unwrap());
            assert!((a[0] + b[0] - 1.0).abs() < 1e-15);
            assert!((1..=3).all(|s| (a[s] + b[s]).abs() < 1e-9 * a[s].abs().max(1.0)));
            let h = 1e-5;
            let fd = (down.value(x + h).unwrap() - down.value(x - h).unwrap()) / (2.0 * h);
            assert!((a[1] - fd).abs() < 1e-6 * a[1].abs().max(1.0));
        }
    }
}
