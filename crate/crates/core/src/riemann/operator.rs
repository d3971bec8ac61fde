//! The operator `L` and its integrated-by-parts forms.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jets::{inv_dlambda_z_jet, z_jet, Jet, LAMBDA, R, T};
use crate::kernels::{u_taylor, w_taylor, ConePoint, InteriorPoint};
use crate::params::{DimParams, Tolerances};
use crate::poly::{table, PolyKind};
use crate::quadrature::{Estimate, TanhSinh};

use super::profile::RadialProfile;

/// `L` for one dimension, with the tolerances used by every quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Riemann {
    dims: DimParams,
    tol: Tolerances,
}

/// Where the outer λ-integral of a term runs.
#[derive(Clone, Copy)]
struct Span {
    lo: f64,
    hi: f64,
}

impl Riemann {
    pub fn new(dims: DimParams, tol: Tolerances) -> Result<Self> {
        tol.validate()?;
        Ok(Self { dims, tol })
    }

    pub fn dims(&self) -> DimParams {
        self.dims
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn kernel_tol(&self) -> f64 {
        (self.tol.quad_rel * 1e-2).max(1e-14)
    }

    /// `√2/(2π)`, the even-dimensional normalisation of `L`.
    pub fn even_constant(j: u32) -> f64 {
        let c0 = 2f64.sqrt() / (2.0 * PI);
        (1..=j).fold(c0, |c, q| c / (q as f64 - 0.5))
    }

    /// Integrates `g(λ, λ − lo, hi − λ)` over `[lo, hi]` clipped to the
    /// support of `f`, split at the profile's breakpoints. Gaps are exact
    /// at the original ends.
    fn integrate<G>(&self, f: &RadialProfile, span: Span, mut g: G) -> Result<Estimate>
    where
        G: FnMut(f64, f64, f64) -> Result<f64>,
    {
        let Span { lo, hi } = span;
        let mut total = Estimate {
            value: 0.0,
            err_est: 0.0,
            abs_integral: 0.0,
            evals: 0,
        };
        if !(hi > lo) || f.is_zero() {
            return Ok(total);
        }
        let (mut a, mut b) = (lo, hi);
        if let Some((s0, s1)) = f.support() {
            a = a.max(s0);
            b = b.min(s1);
            if !(b > a) {
                return Ok(total);
            }
        }
        // A cut within rounding of an edge would leave a sliver on which
        // the nodes coincide; the kink it marks is harmless there.
        let margin = 1e-12 * (b - a);
        let mut cuts: Vec<f64> = f
            .breakpoints()
            .iter()
            .copied()
            .filter(|&c| c > a + margin && c < b - margin)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut edges = vec![a];
        edges.extend(cuts);
        edges.push(b);
        let ts = TanhSinh::new(self.tol.quad_rel);
        for w in edges.windows(2) {
            let (p, q) = (w[0], w[1]);
            let est = ts.integrate(p, q, |x, da, db| {
                let gl = if p == lo { da } else { (p - lo) + da };
                let gh = if q == hi { db } else { (hi - q) + db };
                g(x, gl, gh)
            })?;
            total.value += est.value;
            total.err_est += est.err_est;
            total.abs_integral += est.abs_integral;
            total.evals += est.evals;
        }
        Ok(total)
    }

    fn check_point(r: f64, t: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() || !t.is_finite() {
            return Err(Error::Domain(format!("need r > 0 and finite t, got r = {r}, t = {t}")));
        }
        Ok(())
    }

    /// `[Lf](r, t)`. Negative `t` is accepted through the odd extension
    /// `Lf(r, −t) = −Lf(r, t)`, which keeps time stencils centred at small t.
    pub fn apply_l(&self, f: &RadialProfile, r: f64, t: f64) -> Result<f64> {
        Self::check_point(r, t)?;
        if t < 0.0 {
            return Ok(-self.apply_l(f, r, -t)?);
        }
        if t == 0.0 || f.is_zero() {
            return Ok(0.0);
        }
        let m = self.dims.m();
        let w = self.dims.weight_f64();
        let cone = Span {
            lo: (t - r).abs(),
            hi: t + r,
        };
        if self.dims.is_odd() {
            let pm = table(PolyKind::Legendre, 0, m)?;
            let est = self.integrate(f, cone, |lam, gl, gh| {
                let p = ConePoint::with_gaps(lam, r, t, gl, gh);
                Ok((lam / r).powf(w) * f.value(lam)? * pm.eval(p.z))
            })?;
            return Ok(0.5 * est.value);
        }
        let ktol = self.kernel_tol();
        let upper = self.integrate(f, cone, |lam, gl, gh| {
            let p = ConePoint::with_gaps(lam, r, t, gl, gh);
            let u = u_taylor(0, m, p, 0, ktol)?[0];
            Ok((lam / r).powf(w) * f.value(lam)? * u)
        })?;
        let mut value = upper.value;
        if t > r {
            let inner = Span { lo: 0.0, hi: t - r };
            let lower = self.integrate(f, inner, |lam, _, gh| {
                let p = InteriorPoint::with_gap(lam, r, t, gh);
                let wv = w_taylor(0, m, p, 0, ktol)?[0];
                Ok((lam / r).powf(w) * f.value(lam)? * wv)
            })?;
            value += lower.value;
        }
        Ok(Self::even_constant(0) * value)
    }

    /// Jet of `H_0j f` with the given retained orders in `(λ, r, t)`.
    fn h0_jet(&self, f: &RadialProfile, j: usize, lambda: f64, r: f64, t: f64, orders: [usize; 3]) -> Result<Jet> {
        let top = [orders[0] + j, orders[1], orders[2]];
        let base = [lambda, r, t];
        let lam = Jet::variable(base, top, LAMBDA);
        let fj = Jet::univariate(base, top, LAMBDA, &f.taylor(lambda, top[0])?);
        let mut h = &lam.powf(self.dims.weight_f64())? * &fj;
        if j > 0 {
            let q = inv_dlambda_z_jet(lambda, r, t, top)?;
            for _ in 0..j {
                h = (&q.truncate(h.orders()) * &h).derivative(LAMBDA)?;
            }
        }
        Ok(h)
    }

    /// Jet of `H_ij f` in `(r, t)` with retained orders `beta = [β_r, β_t]`.
    #[allow(clippy::too_many_arguments)]
    pub fn h_jet(
        &self,
        f: &RadialProfile,
        i: usize,
        j: usize,
        lambda: f64,
        r: f64,
        t: f64,
        beta: [usize; 2],
    ) -> Result<Jet> {
        let out = [0, beta[0], beta[1]];
        match i {
            0 => self.h0_jet(f, j, lambda, r, t, out),
            1 => {
                let wide = [1, beta[0], beta[1] + 1];
                let mid = [1, beta[0], beta[1]];
                let h0 = self.h0_jet(f, j, lambda, r, t, wide)?;
                let dt = h0.derivative(T)?.truncate(out);
                let zt = z_jet(lambda, r, t, wide)?.derivative(T)?;
                let q = inv_dlambda_z_jet(lambda, r, t, mid)?;
                let flux = (&(&q * &zt) * &h0.truncate(mid)).derivative(LAMBDA)?;
                Ok(&dt - &flux)
            }
            _ => Err(Error::InvalidParameter(format!("time index i must be 0 or 1, got {i}"))),
        }
    }

    /// `H_ij f (λ, r, t)`.
    pub fn h_ij(&self, f: &RadialProfile, lambda: f64, r: f64, t: f64, i: usize, j: usize) -> Result<f64> {
        self.check_derived(i, j, 0, r, t)?;
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("H_ij needs λ > 0, got {lambda}")));
        }
        Ok(self.h_jet(f, i, j, lambda, r, t, [0, 0])?.value())
    }

    fn check_derived(&self, i: usize, j: usize, order: usize, r: f64, t: f64) -> Result<()> {
        Self::check_point(r, t)?;
        if !(t >= r) {
            return Err(Error::Domain(format!("derived forms need t ≥ r, got r = {r}, t = {t}")));
        }
        if i > 1 {
            return Err(Error::InvalidParameter(format!("time index i must be 0 or 1, got {i}")));
        }
        if j < i || j > self.dims.m() as usize {
            return Err(Error::InvalidParameter(format!(
                "need i ≤ j ≤ m, got i = {i}, j = {j}, m = {}",
                self.dims.m()
            )));
        }
        if order > j {
            return Err(Error::DerivativeOrder {
                requested: order,
                available: j,
            });
        }
        Ok(())
    }

    /// `∂_t^i L f` from the j-fold integrated form.
    pub fn apply_l_derived(&self, f: &RadialProfile, i: usize, j: usize, r: f64, t: f64) -> Result<f64> {
        self.derived_derivative(f, i, j, [0, 0], r, t)
    }

    /// `∂_r^{β_r} ∂_t^{β_t} ∂_t^i L f` by differentiating the j-fold
    /// integrated form under the integral; needs `|β| ≤ j`.
    pub fn derived_derivative(
        &self,
        f: &RadialProfile,
        i: usize,
        j: usize,
        beta: [usize; 2],
        r: f64,
        t: f64,
    ) -> Result<f64> {
        let order = beta[0] + beta[1];
        self.check_derived(i, j, order, r, t)?;
        if f.is_zero() {
            return Ok(0.0);
        }
        let m = self.dims.m();
        let w = self.dims.weight_f64();
        let out = [0, beta[0], beta[1]];
        let base_r = |lam: f64| -> Result<Jet> {
            Jet::variable([lam, r, t], out, R).powf(-w)
        };
        let pick = |jet: &Jet| jet.coeff(0, beta[0], beta[1]) * factorial(beta[0]) * factorial(beta[1]);
        let cone = Span { lo: t - r, hi: t + r };
        let floor = LAMBDA_FLOOR * (t + r);
        if self.dims.is_odd() {
            let pj = table(PolyKind::Truncated, j as u32, m)?;
            let est = self.integrate(f, cone, |lam, gl, gh| {
                if lam < floor {
                    return Ok(0.0);
                }
                let p = ConePoint::with_gaps(lam, r, t, gl, gh);
                let h = self.h_jet(f, i, j, lam, r, t, beta)?;
                let zp = z_jet(lam, r, t, out)?.compose(&pj.taylor(p.z, order));
                Ok(pick(&(&(&h * &base_r(lam)?) * &zp)))
            })?;
            let sign = if j.is_multiple_of(2) { 0.5 } else { -0.5 };
            return Ok(sign * est.value);
        }
        let ktol = self.kernel_tol();
        let ju = j as u32;
        let upper = self.integrate(f, cone, |lam, gl, gh| {
            if lam < floor {
                return Ok(0.0);
            }
            let p = ConePoint::with_gaps(lam, r, t, gl, gh);
            let h = self.h_jet(f, i, j, lam, r, t, beta)?;
            let zu = z_jet(lam, r, t, out)?.compose(&u_taylor(ju, m, p, order, ktol)?);
            Ok(pick(&(&(&h * &base_r(lam)?) * &zu)))
        })?;
        let mut value = upper.value;
        if t > r {
            let inner = Span { lo: 0.0, hi: t - r };
            let lower = self.integrate(f, inner, |lam, _, gh| {
                if lam < floor {
                    return Ok(0.0);
                }
                let p = InteriorPoint::with_gap(lam, r, t, gh);
                let h = self.h_jet(f, i, j, lam, r, t, beta)?;
                let zw = z_jet(lam, r, t, out)?.compose(&w_taylor(ju, m, p, order, ktol)?);
                Ok(pick(&(&(&h * &base_r(lam)?) * &zw)))
            })?;
            value += lower.value;
        }
        Ok(Self::even_constant(ju) * value)
    }
}

/// Below this fraction of `t + r` the derived integrands are dropped: their
/// jets carry inverse powers of λ that overflow long before the integrable
/// contribution of `(0, λ)` could matter.
const LAMBDA_FLOOR: f64 = 1e-30;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
