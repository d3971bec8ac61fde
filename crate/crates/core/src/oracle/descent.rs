//! `u(r, t) = (r^{-1}∂_r)^q [(G(t + r) − G(t − r))/r]` solves the radial
//! wave equation in dimension `3 + 2q`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{Jet, R, T};
use crate::riemann::{bump_taylor, ProfileFn, RadialProfile};

/// A smooth function on the whole line with Taylor coefficients to
/// `max_order`.
#[derive(Clone)]
pub struct Generator {
    func: Arc<dyn ProfileFn>,
    max_order: usize,
    support: Option<(f64, f64)>,
    label: String,
}

impl std::fmt::Debug for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Generator({})", self.label)
    }
}

impl Generator {
    pub fn new<F: ProfileFn + 'static>(label: impl Into<String>, max_order: usize, f: F) -> Self {
        Self {
            func: Arc::new(f),
            max_order,
            support: None,
            label: label.into(),
        }
    }

    /// Unit-peak bump on `(lo, hi)`; any interval of the real line.
    pub fn bump(lo: f64, hi: f64, amplitude: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidParameter(format!("empty bump interval [{lo}, {hi}]")));
        }
        let mut g = Self::new(format!("bump[{lo}, {hi}]"), usize::MAX, move |x: f64, k: usize| {
            bump_taylor(x, lo, hi, amplitude, k)
        });
        g.support = Some((lo, hi));
        Ok(g)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), usize::MAX, move |_x: f64, k: usize| {
            let mut v = vec![0.0; k + 1];
            v[0] = c;
            v
        })
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > self.max_order {
            return Err(Error::DerivativeOrder {
                requested: order,
                available: self.max_order,
            });
        }
        Ok(self.func.taylor(x, order))
    }
}

/// Jet of the descent solution in `(r, t)` with retained orders `[k_r, k_t]`.
fn descent_jet(g: &Generator, q: u32, r: f64, t: f64, orders: [usize; 2]) -> Result<Jet> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("descent solution needs r > 0, got {r}")));
    }
    let q = q as usize;
    let top = [0, orders[0] + q, orders[1]];
    let base = [0.0, r, t];
    let rr = Jet::variable(base, top, R);
    let tt = Jet::variable(base, top, T);
    let total = top[1] + top[2];
    let plus = (&tt + &rr).compose(&g.taylor(t + r, total)?);
    let minus = (&tt - &rr).compose(&g.taylor(t - r, total)?);
    let inv_r = rr.recip()?;
    let mut u = &(&plus - &minus) * &inv_r;
    for _ in 0..q {
        let du = u.derivative(R)?;
        u = &inv_r.truncate(du.orders()) * &du;
    }
    Ok(u)
}

pub fn descent_solution(g: &Generator, q: u32, r: f64, t: f64) -> Result<f64> {
    Ok(descent_jet(g, q, r, t, [0, 0])?.value())
}

/// `∂_r^{β_r} ∂_t^{β_t}` of the descent solution.
pub fn descent_derivative(g: &Generator, q: u32, beta: [usize; 2], r: f64, t: f64) -> Result<f64> {
    descent_jet(g, q, r, t, beta)?.partial(0, beta[0], beta[1])
}

/// Cauchy data `(φ, ψ) = (u, ∂_t u)` at `t = 0` as radial profiles.
pub fn descent_data(g: &Generator, q: u32) -> (RadialProfile, RadialProfile) {
    let make = |time_order: usize, label: &str| {
        let support = g.support();
        let max_order = g.max_order.saturating_sub(q as usize + 1);
        let label = format!("descent-{label}({}, q = {q})", g.label());
        let g = g.clone();
        let mut p = RadialProfile::from_fn(
            label,
            max_order,
            move |lambda: f64, order: usize| match descent_jet(&g, q, lambda, 0.0, [order, 1]) {
                Ok(jet) => (0..=order).map(|s| jet.coeff(0, s, time_order)).collect(),
                Err(_) => vec![f64::NAN; order + 1],
            },
        );
        if let Some((lo, hi)) = support {
            let reach = lo.abs().max(hi.abs());
            let inner = if lo > 0.0 || hi < 0.0 { lo.abs().min(hi.abs()) } else { 0.0 };
            p = p.with_support(inner, reach).with_breakpoints(&[0.5 * (inner + reach)]);
        }
        p
    };
    (make(0, "phi"), make(1, "psi"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_generator_gives_zero() {
        let g = Generator::constant(3.0);
        for q in 0..3 {
            assert_eq!(descent_solution(&g, q, 1.2, 0.7).unwrap(), 0.0);
        }
    }

    #[test]
    fn q0_is_dalembert() {
        let g = Generator::new("sin", usize::MAX, |x: f64, k: usize| {
            (0..=k)
                .map(|s| {
                    let d = match s % 4 {
                        0 => x.sin(),
                        1 => x.cos(),
                        2 => -x.sin(),
                        _ => -x.cos(),
                    };
                    d / (1..=s).product::<usize>() as f64
                })
                .collect()
        });
        let (r, t): (f64, f64) = (0.8, 1.7);
        let want = ((t + r).sin() - (t - r).sin()) / r;
        assert!((descent_solution(&g, 0, r, t).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn data_match_solution_at_zero() {
        let g = Generator::bump(1.0, 3.0, 1.0).unwrap();
        let (phi, psi) = descent_data(&g, 1);
        let r = 1.7;
        let u0 = descent_solution(&g, 1, r, 0.0).unwrap();
        let ut = descent_derivative(&g, 1, [0, 1], r, 0.0).unwrap();
        assert!((phi.value(r).unwrap() - u0).abs() < 1e-14);
        assert!((psi.value(r).unwrap() - ut).abs() < 1e-13);
        assert_eq!(phi.value(0.5).unwrap(), 0.0);
    }
}
