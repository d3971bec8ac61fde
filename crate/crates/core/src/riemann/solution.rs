//! `u0 = Lψ + ∂_t Lφ` and its derivatives.

use serde::Serialize;

use crate::error::{Error, Result};

use super::operator::Riemann;
use super::profile::RadialProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    Derived,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionEval {
    pub value: f64,
    /// Orders `(β_r, β_t)`.
    pub beta: [usize; 2],
    pub route: Route,
}

/// Richardson-extrapolated central difference of order `k` at `x`,
/// starting from step `h` and halving `levels − 1` times.
pub fn central_richardson<G>(mut g: G, x: f64, k: usize, h: f64, levels: usize) -> Result<f64>
where
    G: FnMut(f64) -> Result<f64>,
{
    if k == 0 {
        return g(x);
    }
    let levels = levels.max(1);
    let binom = |n: usize, i: usize| -> f64 {
        (0..i).fold(1.0, |acc, q| acc * (n - q) as f64 / (q + 1) as f64)
    };
    let mut quotient = |h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..=k {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let offset = (k as f64 / 2.0 - i as f64) * h;
            acc += sign * binom(k, i) * g(x + offset)?;
        }
        Ok(acc / h.powi(k as i32))
    };
    let mut table: Vec<f64> = Vec::with_capacity(levels);
    let mut step = h;
    for _ in 0..levels {
        let mut row = vec![quotient(step)?];
        let mut factor = 1.0;
        for p in 0..table.len() {
            factor *= 4.0;
            let v = (factor * row[p] - table[p]) / (factor - 1.0);
            row.push(v);
        }
        table = row;
        step *= 0.5;
    }
    Ok(*table.last().expect("at least one level"))
}

impl Riemann {
    /// Step for difference quotients at `(r, t)`: small against the data's
    /// feature scale, with the stencil on one side of the cone `t = r` and
    /// away from `r = 0`.
    fn fd_step(r: f64, t: f64, k: usize, scale: f64) -> f64 {
        let room = (t - r).abs().min(r) / (k.max(1) as f64);
        (0.25 * room).min(0.05 * scale).max(1e-3 * r.min(scale))
    }

    /// `∂_t^k [Lf](r, t)` by Richardson time differencing.
    pub fn apply_l_dt_fd(&self, f: &RadialProfile, k: usize, r: f64, t: f64) -> Result<f64> {
        let h = Self::fd_step(r, t, k, f.feature_scale());
        central_richardson(|s| self.apply_l(f, r, s), t, k, h, self.tolerances().fd_order)
    }

    fn dt_phi(&self, phi: &RadialProfile, r: f64, t: f64) -> Result<f64> {
        if phi.is_zero() {
            return Ok(0.0);
        }
        if t >= r && phi.max_order() >= 2 {
            return self.apply_l_derived(phi, 1, 1, r, t);
        }
        self.apply_l_dt_fd(phi, 1, r, t)
    }

    /// `u0(r, t)`.
    pub fn solve(&self, phi: &RadialProfile, psi: &RadialProfile, r: f64, t: f64) -> Result<f64> {
        Ok(self.apply_l(psi, r, t)? + self.dt_phi(phi, r, t)?)
    }

    fn smoothness(phi: &RadialProfile, psi: &RadialProfile, m: usize) -> usize {
        match (phi.envelope(), psi.envelope()) {
            (Some(a), Some(b)) => a.l.min(b.l) as usize,
            (Some(e), None) | (None, Some(e)) => e.l as usize,
            (None, None) => m,
        }
    }

    /// `D^β u0` with `β = (β_r, β_t)`, by the derived route when `t ≥ r`
    /// and the stencil route otherwise.
    pub fn derivative(
        &self,
        phi: &RadialProfile,
        psi: &RadialProfile,
        beta: [usize; 2],
        r: f64,
        t: f64,
    ) -> Result<SolutionEval> {
        let order = beta[0] + beta[1];
        let m = self.dims().m() as usize;
        let l = Self::smoothness(phi, psi, m);
        if order > l || order > m {
            return Err(Error::DerivativeOrder {
                requested: order,
                available: l.min(m),
            });
        }
        if order == 0 {
            let route = if t >= r { Route::Derived } else { Route::Direct };
            return Ok(SolutionEval {
                value: self.solve(phi, psi, r, t)?,
                beta,
                route,
            });
        }
        if t >= r && phi.max_order() > order {
            return Ok(SolutionEval {
                value: self.derivative_derived(phi, psi, beta, r, t)?,
                beta,
                route: Route::Derived,
            });
        }
        Ok(SolutionEval {
            value: self.derivative_fd(phi, psi, beta, r, t)?,
            beta,
            route: Route::FiniteDifference,
        })
    }

    /// Derived route for `D^β u0`; requires `t ≥ r`.
    pub fn derivative_derived(
        &self,
        phi: &RadialProfile,
        psi: &RadialProfile,
        beta: [usize; 2],
        r: f64,
        t: f64,
    ) -> Result<f64> {
        let order = beta[0] + beta[1];
        let from_psi = if psi.is_zero() {
            0.0
        } else {
            self.derived_derivative(psi, 0, order, beta, r, t)?
        };
        let from_phi = if phi.is_zero() {
            0.0
        } else {
            self.derived_derivative(phi, 1, order.max(1), beta, r, t)?
        };
        Ok(from_psi + from_phi)
    }

    /// Stencil route for `D^β u0`: nested Richardson differences of `solve`.
    pub fn derivative_fd(
        &self,
        phi: &RadialProfile,
        psi: &RadialProfile,
        beta: [usize; 2],
        r: f64,
        t: f64,
    ) -> Result<f64> {
        let levels = self.tolerances().fd_order;
        let scale = phi.feature_scale().min(psi.feature_scale());
        let h = Self::fd_step(r, t, beta[0] + beta[1], scale);
        central_richardson(
            |rr| {
                central_richardson(|tt| self.solve(phi, psi, rr, tt), t, beta[1], h, levels)
            },
            r,
            beta[0],
            h,
            levels,
        )
    }
}
