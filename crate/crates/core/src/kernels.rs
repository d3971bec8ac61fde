//! Inner kernels of the even-dimensional Riemann operator:
//!
//! `U_jm = ∫_z^1 (σ−z)^{j−1/2} T_m(σ)(1−σ²)^{−1/2} dσ` for `|z| ≤ 1` and
//! `W_im = ∫_{−1}^1 (σ−z)^{i−1/2} T_m(σ)(1−σ²)^{−1/2} dσ` for `z ≤ −1`.
//!
//! Points carry `1 ± z` (or `−1 − z`) computed from factored forms, so the
//! kernels stay accurate right next to the light cone.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{z_jet, Jet};
use crate::poly::{table, PolyCoeffs, PolyKind};
use crate::quadrature::{chebyshev_angles, gauss_jacobi, gauss_legendre, TanhSinh};

pub const MAX_NODES: usize = 2048;
const MIN_NODES: usize = 16;
/// Below `1 + z < NEAR_CONE · (1 − z)` the substituted route is used.
const NEAR_CONE: f64 = 0.25;
/// Beyond `|z| ≥ SERIES_FROM` the W kernel is summed as a series in 1/|z|.
const SERIES_FROM: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub err_est: f64,
    pub nodes_used: usize,
}

/// A point with `|z| ≤ 1`, carrying `1 + z` and `1 − z` separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub z: f64,
    pub one_plus: f64,
    pub one_minus: f64,
}

impl ConePoint {
    pub fn from_z(z: f64) -> Result<Self> {
        if !(z.abs() <= 1.0) {
            return Err(Error::Domain(format!("U kernel needs |z| ≤ 1, got {z}")));
        }
        Ok(Self {
            z,
            one_plus: 1.0 + z,
            one_minus: 1.0 - z,
        })
    }

    /// Point for `|t − r| ≤ λ ≤ t + r`.
    pub fn new(lambda: f64, r: f64, t: f64) -> Result<Self> {
        let lo = (t - r).abs();
        let hi = t + r;
        let slack = 1e-12 * hi.max(1e-300);
        if !(lambda > 0.0 && r > 0.0 && t >= 0.0) || lambda < lo - slack || lambda > hi + slack {
            return Err(Error::Domain(format!(
                "λ = {lambda} outside [|t−r|, t+r] = [{lo}, {hi}]"
            )));
        }
        Ok(Self::with_gaps(
            lambda,
            r,
            t,
            (lambda - lo).max(0.0),
            (hi - lambda).max(0.0),
        ))
    }

    /// Point from exactly known gaps `λ − |t − r|` and `t + r − λ`.
    pub fn with_gaps(lambda: f64, r: f64, t: f64, lower_gap: f64, upper_gap: f64) -> Self {
        let denom = 2.0 * r * lambda;
        let (one_plus, one_minus) = if t >= r {
            (
                (lambda + r + t) * lower_gap / denom,
                upper_gap * (t - r + lambda) / denom,
            )
        } else {
            (
                (lambda + r + t) * (lambda + r - t) / denom,
                upper_gap * lower_gap / denom,
            )
        };
        let one_plus = one_plus.clamp(0.0, 2.0);
        let one_minus = one_minus.clamp(0.0, 2.0);
        let z = if one_plus < one_minus {
            one_plus - 1.0
        } else {
            1.0 - one_minus
        };
        Self {
            z,
            one_plus,
            one_minus,
        }
    }
}

/// A point with `z ≤ −1`, carrying `−1 − z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorPoint {
    pub z: f64,
    pub gap: f64,
}

impl InteriorPoint {
    pub fn from_z(z: f64) -> Result<Self> {
        if !(z <= -1.0) {
            return Err(Error::Domain(format!("W kernel needs z ≤ −1, got {z}")));
        }
        Ok(Self { z, gap: -1.0 - z })
    }

    /// Point for `0 < λ ≤ t − r`.
    pub fn new(lambda: f64, r: f64, t: f64) -> Result<Self> {
        let hi = t - r;
        let slack = 1e-12 * (t + r);
        if !(lambda > 0.0 && r > 0.0) || lambda > hi + slack {
            return Err(Error::Domain(format!(
                "λ = {lambda} outside (0, t−r] = (0, {hi}]"
            )));
        }
        Ok(Self::with_gap(lambda, r, t, (hi - lambda).max(0.0)))
    }

    /// Point from the exactly known gap `t − r − λ`.
    pub fn with_gap(lambda: f64, r: f64, t: f64, upper_gap: f64) -> Self {
        let gap = ((r + t + lambda) * upper_gap / (2.0 * r * lambda)).max(0.0);
        Self {
            z: -1.0 - gap,
            gap,
        }
    }
}

/// Node-doubling driver: `rule(n)` returns `(value, |integrand| integral)`.
fn doubling<F>(what: &str, tol: f64, mut rule: F) -> Result<KernelValue>
where
    F: FnMut(usize) -> Result<(f64, f64)>,
{
    let mut n = MIN_NODES;
    let (mut prev, _) = rule(n)?;
    let mut used = n;
    let mut err = f64::INFINITY;
    while n < MAX_NODES {
        n *= 2;
        let (value, abs) = rule(n)?;
        used += n;
        err = (value - prev).abs();
        let scale = value.abs().max(abs.min(1.0));
        if err <= tol * scale {
            return Ok(KernelValue {
                value,
                err_est: err,
                nodes_used: used,
            });
        }
        prev = value;
    }
    Err(Error::Quadrature {
        what: what.to_string(),
        err_est: err,
    })
}

/// Composite Gauss–Legendre over `[lo, hi]` with panels of width at most
/// 2, laid out from `hi` downward.
fn panels<F>(n: usize, lo: f64, hi: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Ok((0.0, 0.0));
    }
    let per_panel = n / 2;
    let rule = gauss_legendre(per_panel)?;
    let count = ((hi - lo) / 2.0).ceil().max(1.0) as usize;
    let (mut acc, mut acc_abs) = (0.0, 0.0);
    for p in 0..count {
        let b = hi - 2.0 * p as f64;
        let a = (b - 2.0).max(lo);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let v = f(mid + half * x)?;
            acc += w * half * v;
            acc_abs += w * half * v.abs();
        }
    }
    Ok((acc, acc_abs))
}

fn single_panel<F>(n: usize, lo: f64, hi: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Ok((0.0, 0.0));
    }
    let rule = gauss_legendre(n)?;
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let (mut acc, mut acc_abs) = (0.0, 0.0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(mid + half * x)?;
        acc += w * half * v;
        acc_abs += w * half * v.abs();
    }
    Ok((acc, acc_abs))
}

fn tcheb(m: u32) -> Result<std::sync::Arc<PolyCoeffs>> {
    table(PolyKind::Tchebyshev, 0, m)
}

fn check_index(idx: u32, m: u32) -> Result<()> {
    if idx > m {
        return Err(Error::InvalidParameter(format!(
            "kernel index {idx} exceeds degree {m}"
        )));
    }
    Ok(())
}

/// `U_jm` at a point with `|z| ≤ 1`.
pub fn u_value(j: u32, m: u32, p: ConePoint, tol: f64) -> Result<KernelValue> {
    check_index(j, m)?;
    let tm = tcheb(m)?;
    let c = p.one_plus;
    let len = p.one_minus;
    let jf = j as f64;
    if len == 0.0 {
        // z = 1: only the j = 0 member survives, with value π T_m(1)/√2.
        let value = if j == 0 { PI * tm.eval(1.0) / 2f64.sqrt() } else { 0.0 };
        return Ok(KernelValue {
            value,
            err_est: 0.0,
            nodes_used: 0,
        });
    }
    if c >= NEAR_CONE * len {
        // σ = z + (1 − z)ν; weight ν^{j−1/2}(1−ν)^{−1/2} becomes the
        // Jacobi weight (1−x)^{−1/2}(1+x)^{j−1/2} under ν = (1+x)/2.
        let prefactor = len.powi(j as i32) * 2f64.powi(-(j as i32));
        return doubling("U kernel (Gauss–Jacobi)", tol, |n| {
            let rule = gauss_jacobi(n, -0.5, jf - 0.5)?;
            let (mut acc, mut acc_abs) = (0.0, 0.0);
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let nu = 0.5 * (1.0 + x);
                let one_plus_sigma = c + len * nu;
                let sigma = 1.0 - len * (1.0 - nu);
                let v = tm.eval(sigma) / one_plus_sigma.sqrt();
                acc += w * v;
                acc_abs += w * v.abs();
            }
            Ok((prefactor * acc, prefactor * acc_abs))
        });
    }
    if c == 0.0 && j == 0 {
        return Err(Error::Domain(
            "U_0m is logarithmically infinite at z = −1".into(),
        ));
    }
    // Near z = −1: split p = σ − z at half of 1 − z.
    let split = 0.5 * len;
    doubling("U kernel (near light cone)", tol, |n| {
        let lower = if c > 0.0 {
            // p = c sinh²u turns p^{j−1/2}(c+p)^{−1/2} dp into 2c^j sinh^{2j}u du.
            let u_max = (split / c).sqrt().asinh();
            panels(n, 0.0, u_max, |u| {
                let sh = u.sinh();
                let pp = c * sh * sh;
                let sigma = -1.0 + (c + pp);
                Ok(2.0 * (c * sh * sh).powi(j as i32) * tm.eval(sigma) / (len - pp).sqrt())
            })?
        } else {
            single_panel(n, 0.0, split, |pp| {
                Ok(pp.powi(j as i32 - 1) * tm.eval(-1.0 + pp) / (len - pp).sqrt())
            })?
        };
        // 1 − σ = w² removes the (1−σ)^{−1/2} endpoint factor.
        let upper = single_panel(n, 0.0, (len - split).sqrt(), |w| {
            let pp = len - w * w;
            Ok(2.0 * pp.powf(jf - 0.5) * tm.eval(1.0 - w * w) / (c + pp).sqrt())
        })?;
        Ok((lower.0 + upper.0, lower.1 + upper.1))
    })
}

/// `∫_{−1}^1 σ^k T_m(σ)(1−σ²)^{−1/2} dσ = π 2^{−k} C(k, (k−m)/2)` for
/// `k ≥ m ≥ 1` of equal parity, zero otherwise.
fn chebyshev_moment(k: u32, m: u32) -> f64 {
    if k < m || (k - m) % 2 == 1 {
        return 0.0;
    }
    let q = (k - m) / 2;
    let binom = (0..q).fold(1.0, |acc, i| acc * (k - i) as f64 / (i + 1) as f64);
    PI * binom * 0.5f64.powi(k as i32)
}

/// `W_im` at a point with `z ≤ −1`.
pub fn w_value(i: u32, m: u32, p: InteriorPoint, tol: f64) -> Result<KernelValue> {
    check_index(i, m)?;
    if m == 0 {
        return Err(Error::InvalidParameter("W kernel needs m ≥ 1".into()));
    }
    let e = p.gap;
    let expo = i as f64 - 0.5;
    if -p.z >= SERIES_FROM {
        // (σ − z)^{i−1/2} = |z|^{i−1/2} Σ C(i−1/2, k)(σ/|z|)^k; only
        // k ≥ m of the parity of m survive against T_m.
        let az = -p.z;
        let mut binom = 1.0;
        let mut sum = 0.0;
        let mut last = f64::INFINITY;
        let mut terms = 0;
        for k in 0..400u32 {
            if k > 0 {
                binom *= (expo - (k - 1) as f64) / k as f64;
            }
            let moment = chebyshev_moment(k, m);
            if moment == 0.0 {
                continue;
            }
            let term = binom * moment * az.powi(-(k as i32));
            sum += term;
            terms += 1;
            last = term.abs();
            if last <= 1e-18 * sum.abs() || term == 0.0 {
                break;
            }
        }
        let scale = az.powf(expo);
        let value = scale * sum;
        let err_est = scale * last;
        if err_est > tol * value.abs().max(1e-300) && err_est > tol * value.abs().max(1.0) {
            return Err(Error::Quadrature {
                what: "W kernel series".into(),
                err_est,
            });
        }
        return Ok(KernelValue {
            value,
            err_est,
            nodes_used: terms,
        });
    }
    let tm = tcheb(m)?;
    if e >= 2.0 * NEAR_CONE {
        return doubling("W kernel (Gauss–Chebyshev)", tol, |n| {
            let (mut acc, mut acc_abs) = (0.0, 0.0);
            for theta in chebyshev_angles(n) {
                let half_cos = (0.5 * theta).cos();
                let shifted = e + 2.0 * half_cos * half_cos;
                let v = shifted.powf(expo) * tm.eval(theta.cos());
                acc += v;
                acc_abs += v.abs();
            }
            let w = PI / n as f64;
            Ok((w * acc, w * acc_abs))
        });
    }
    if e == 0.0 && i == 0 {
        return Err(Error::Domain(
            "W_0m is logarithmically infinite at z = −1".into(),
        ));
    }
    // Near z = −1: split q = 1 + σ at 1.
    doubling("W kernel (near light cone)", tol, |n| {
        let lower = if e > 0.0 {
            // q = e sinh²u turns (q+e)^{i−1/2} q^{−1/2} dq into 2e^i cosh^{2i}u du.
            let u_max = (1.0 / e).sqrt().asinh();
            panels(n, 0.0, u_max, |u| {
                let sh = u.sinh();
                let q = e * sh * sh;
                let ch2 = 1.0 + sh * sh;
                Ok(2.0 * (e * ch2).powi(i as i32) * tm.eval(q - 1.0) / (2.0 - q).sqrt())
            })?
        } else {
            single_panel(n, 0.0, 1.0, |q| {
                Ok(q.powi(i as i32 - 1) * tm.eval(q - 1.0) / (2.0 - q).sqrt())
            })?
        };
        // 1 − σ = w².
        let upper = single_panel(n, 0.0, 1.0, |w| {
            let q = 2.0 - w * w;
            Ok(2.0 * (q + e).powf(expo) * tm.eval(1.0 - w * w) / q.sqrt())
        })?;
        Ok((lower.0 + upper.0, lower.1 + upper.1))
    })
}

pub fn u_jm(lambda: f64, r: f64, t: f64, j: u32, m: u32, tol: f64) -> Result<KernelValue> {
    u_value(j, m, ConePoint::new(lambda, r, t)?, tol)
}

pub fn w_im(lambda: f64, r: f64, t: f64, i: u32, m: u32, tol: f64) -> Result<KernelValue> {
    if !(t > r) {
        return Err(Error::Domain(format!("W kernel needs t > r (t = {t}, r = {r})")));
    }
    w_value(i, m, InteriorPoint::new(lambda, r, t)?, tol)
}

/// Taylor coefficients in `z` of a kernel of index `j`, from the ladder
/// `∂_z K_j = −(j − 1/2) K_{j−1}`.
fn ladder<F>(j: u32, order: usize, mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(u32) -> Result<f64>,
{
    if order > j as usize {
        return Err(Error::DerivativeOrder {
            requested: order,
            available: j as usize,
        });
    }
    let mut out = Vec::with_capacity(order + 1);
    let mut factor = 1.0;
    for s in 0..=order {
        if s > 0 {
            factor *= -(j as f64 - (s - 1) as f64 - 0.5) / s as f64;
        }
        out.push(factor * eval(j - s as u32)?);
    }
    Ok(out)
}

pub fn u_taylor(j: u32, m: u32, p: ConePoint, order: usize, tol: f64) -> Result<Vec<f64>> {
    ladder(j, order, |jj| Ok(u_value(jj, m, p, tol)?.value))
}

pub fn w_taylor(i: u32, m: u32, p: InteriorPoint, order: usize, tol: f64) -> Result<Vec<f64>> {
    ladder(i, order, |ii| Ok(w_value(ii, m, p, tol)?.value))
}

/// Jet of `U_jm` in `(λ, r, t)`; total order must not exceed `j`.
pub fn u_jet(
    lambda: f64,
    r: f64,
    t: f64,
    j: u32,
    m: u32,
    orders: [usize; 3],
    tol: f64,
) -> Result<Jet> {
    let p = ConePoint::new(lambda, r, t)?;
    let zj = z_jet(lambda, r, t, orders)?;
    let taylor = u_taylor(j, m, p, zj.total_order(), tol)?;
    Ok(zj.compose(&taylor))
}

/// Jet of `W_jm` in `(λ, r, t)`; total order must not exceed `j`.
pub fn w_jet(
    lambda: f64,
    r: f64,
    t: f64,
    j: u32,
    m: u32,
    orders: [usize; 3],
    tol: f64,
) -> Result<Jet> {
    if !(t > r) {
        return Err(Error::Domain(format!("W kernel needs t > r (t = {t}, r = {r})")));
    }
    let p = InteriorPoint::new(lambda, r, t)?;
    let zj = z_jet(lambda, r, t, orders)?;
    let taylor = w_taylor(j, m, p, zj.total_order(), tol)?;
    Ok(zj.compose(&taylor))
}

/// Taylor coefficients in `z` of `U_0m` up to `order`, with no limit on the
/// order. With `σ = z + (1 − z)ν` and `h(σ) = T_m(σ)(1 + σ)^{−1/2}`,
/// `U_0m^{(s)}(z)/s! = ∫_0^1 ν^{−1/2}(1 − ν)^{s−1/2} [h^{(s)}/s!](σ) dν`;
/// `ν = w²` removes the square root at 0 and tanh-sinh takes the one at 1.
pub fn u0_z_taylor(m: u32, p: ConePoint, order: usize, tol: f64) -> Result<Vec<f64>> {
    let tm = tcheb(m)?;
    let (c, len) = (p.one_plus, p.one_minus);
    if c == 0.0 {
        return Err(Error::Domain("U_0m is singular at z = −1".into()));
    }
    if len == 0.0 {
        let mut out = vec![0.0; order + 1];
        out[0] = PI * tm.eval(1.0) / 2f64.sqrt();
        if order > 0 {
            // At z = 1 the integrand collapses onto σ = 1: every
            // derivative is the ν-moment of h^{(s)}(1).
            let h = h_taylor(&tm, 1.0, 2.0, order);
            for (s, slot) in out.iter_mut().enumerate().skip(1) {
                *slot = PI * h[s] * (1..=s).fold(1.0, |acc, q| acc * (q as f64 - 0.5) / q as f64);
            }
        }
        return Ok(out);
    }
    // 1 + σ = c + len·w² peaks in w near √(c/len).
    let peak = (c / len).sqrt();
    let quad = TanhSinh::new(tol);
    let mut out = Vec::with_capacity(order + 1);
    for s in 0..=order {
        let mut f = |w: f64, _: f64, gap_hi: f64| -> Result<f64> {
            let nu = w * w;
            let one_minus_nu = gap_hi * (1.0 + w);
            let sigma = p.z + len * nu;
            let one_plus_sigma = c + len * nu;
            let h = h_taylor(&tm, sigma, one_plus_sigma, s);
            Ok(2.0 * one_minus_nu.powf(s as f64 - 0.5) * h[s])
        };
        let mut total = 0.0;
        if peak < 1.0 {
            total += quad.integrate(0.0, peak, |w, _, _| f(w, 0.0, 1.0 - w))?.value;
            total += quad.integrate(peak, 1.0, &mut f)?.value;
        } else {
            total += quad.integrate(0.0, 1.0, &mut f)?.value;
        }
        out.push(total);
    }
    Ok(out)
}

/// Taylor coefficients of `T_m(σ)(1 + σ)^{−1/2}` at `σ`, given `1 + σ`.
fn h_taylor(tm: &PolyCoeffs, sigma: f64, one_plus_sigma: f64, order: usize) -> Vec<f64> {
    let t = tm.taylor(sigma, order);
    let mut root = Vec::with_capacity(order + 1);
    let mut coef = one_plus_sigma.powf(-0.5);
    for q in 0..=order {
        root.push(coef);
        coef *= (-0.5 - q as f64) / ((q + 1) as f64 * one_plus_sigma);
    }
    (0..=order)
        .map(|s| (0..=s).map(|q| t[q] * root[s - q]).sum())
        .collect()
}

/// Jet of `U_0m` in `(λ, r, t)` of any order, for `|t − r| < λ ≤ t + r`.
pub fn u0_jet(lambda: f64, r: f64, t: f64, m: u32, orders: [usize; 3], tol: f64) -> Result<Jet> {
    let p = ConePoint::new(lambda, r, t)?;
    let zj = z_jet(lambda, r, t, orders)?;
    let taylor = u0_z_taylor(m, p, zj.total_order(), tol)?;
    Ok(zj.compose(&taylor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::TanhSinh;

    const TOL: f64 = 1e-12;

    /// Brute-force U in the angle form σ = cos θ:
    /// U_j = ∫_0^{arccos z} (cos θ − z)^{j−1/2} cos(mθ) dθ.
    fn u_oracle(j: u32, m: u32, z: f64) -> f64 {
        let top = z.acos();
        TanhSinh::new(1e-14)
            .integrate(0.0, top, |th, _, db| {
                // cos θ − z = 2 sin((top+θ)/2) sin((top−θ)/2)
                let diff = 2.0 * (0.5 * (top + th)).sin() * (0.5 * db).sin();
                Ok(diff.powf(j as f64 - 0.5) * (m as f64 * th).cos())
            })
            .unwrap()
            .value
    }

    /// W_i = ∫_0^π (cos θ − z)^{i−1/2} cos(mθ) dθ.
    fn w_oracle(i: u32, m: u32, z: f64) -> f64 {
        TanhSinh::new(1e-14)
            .integrate(0.0, PI, |th, _, db| {
                let gap = -1.0 - z;
                let half = (0.5 * db).sin();
                let diff = gap + 2.0 * half * half;
                Ok(diff.powf(i as f64 - 0.5) * (m as f64 * th).cos())
            })
            .unwrap()
            .value
    }

    #[test]
    fn u_matches_angle_form() {
        for m in 1..=4 {
            for j in 0..=m {
                for &z in &[-0.999, -0.9, -0.5, 0.0, 0.3, 0.8, 0.999] {
                    let got = u_value(j, m, ConePoint::from_z(z).unwrap(), TOL).unwrap();
                    let want = u_oracle(j, m, z);
                    assert!(
                        (got.value - want).abs() <= 1e-10 * want.abs().max(1.0),
                        "j={j} m={m} z={z}: {} vs {want}",
                        got.value
                    );
                    assert!(got.err_est <= 1e-10 * got.value.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn w_matches_angle_form() {
        for m in 1..=4 {
            for i in 0..=m {
                for &z in &[-1.0001, -1.1, -1.4, -1.9, -3.0, -5.0, -40.0] {
                    let got = w_value(i, m, InteriorPoint::from_z(z).unwrap(), TOL).unwrap();
                    let want = w_oracle(i, m, z);
                    // The angle-form oracle itself cancels like |z|^{i−1/2}.
                    let scale = (-z).powf(i as f64 - 0.5).max(want.abs());
                    assert!(
                        (got.value - want).abs() <= 1e-11 * scale,
                        "i={i} m={m} z={z}: {} vs {want}",
                        got.value
                    );
                }
            }
        }
    }

    #[test]
    fn w_deep_interior_frozen() {
        // 40-digit reference for ∫_0^π (cos θ + 40)^{5/2} cos 3θ dθ.
        let got = w_value(3, 3, InteriorPoint::from_z(-40.0).unwrap(), TOL).unwrap();
        assert!((got.value - 0.019_404_061_246_069_475).abs() < 1e-15);
    }

    #[test]
    fn u_endpoint_value() {
        for m in 1..=6 {
            let mut prev = f64::INFINITY;
            for e in 2..=12 {
                let z = 1.0 - 10f64.powi(-e);
                let v = u_value(0, m, ConePoint::from_z(z).unwrap(), TOL).unwrap().value;
                let d = (v - PI / 2f64.sqrt()).abs();
                assert!(d <= prev + 1e-15);
                prev = d;
            }
            assert!(prev < 1e-8);
            let at_one = u_value(0, m, ConePoint::from_z(1.0).unwrap(), TOL).unwrap();
            assert!((at_one.value - PI / 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn u_zero_order_at_upper_end() {
        for m in 1..=4 {
            for j in 1..=m {
                for e in 3..=9 {
                    let eps = 10f64.powi(-e);
                    let p = ConePoint::from_z(1.0 - eps).unwrap();
                    let ratio = u_value(j, m, p, TOL).unwrap().value / eps.powi(j as i32);
                    assert!(ratio.is_finite() && ratio.abs() < 1e2 && ratio.abs() > 1e-3);
                }
            }
        }
    }

    #[test]
    fn matching_at_lower_cone() {
        for m in 1..=3 {
            for i in 1..=m {
                let u = u_value(i, m, ConePoint::from_z(-1.0).unwrap(), TOL).unwrap().value;
                let w = w_value(i, m, InteriorPoint::from_z(-1.0).unwrap(), TOL).unwrap().value;
                assert!((u - w).abs() < 1e-12);
            }
        }
        assert!(u_value(0, 2, ConePoint::from_z(-1.0).unwrap(), TOL).is_err());
    }

    #[test]
    fn one_plus_z_identity() {
        for &(l, r, t) in &[(1.5, 1.0, 2.0), (0.7, 2.0, 1.5), (3.0, 1.0, 2.5)] {
            let p = ConePoint::new(l, r, t).unwrap();
            let z = (l * l + r * r - t * t) / (2.0 * r * l);
            assert!((p.one_plus - (1.0 + z)).abs() < 1e-15);
            assert!((p.one_minus - (1.0 - z)).abs() < 1e-15);
        }
        assert!(ConePoint::new(5.0, 1.0, 2.0).is_err());
        assert!(InteriorPoint::new(2.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn domain_checks() {
        assert!(u_jm(0.5, 1.0, 2.0, 0, 1, TOL).is_err());
        assert!(w_im(0.5, 2.0, 1.0, 0, 1, TOL).is_err());
        assert!(u_jm(1.5, 1.0, 2.0, 3, 2, TOL).is_err());
    }

    #[test]
    fn jets_reject_excess_order() {
        assert!(matches!(
            u_jet(1.5, 1.0, 2.0, 1, 2, [0, 1, 1], TOL),
            Err(Error::DerivativeOrder { .. })
        ));
        assert!(w_jet(0.5, 1.0, 2.0, 2, 2, [0, 1, 1], TOL).is_ok());
    }

    fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
        let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
        let e1 = (4.0 * d2 - d1) / 3.0;
        let e2 = (4.0 * d4 - d2) / 3.0;
        (16.0 * e2 - e1) / 15.0
    }

    #[test]
    fn u_jet_first_derivatives() {
        let (l, r, t) = (2.2, 1.0, 2.0);
        for m in 1..=3 {
            for j in 1..=m {
                let jet = u_jet(l, r, t, j, m, [0, 1, 0], TOL).unwrap();
                let fr = richardson(|x| u_jm(l, x, t, j, m, TOL).unwrap().value, r, 1e-2);
                assert!((jet.partial(0, 1, 0).unwrap() - fr).abs() < 1e-6 * fr.abs().max(1.0));
                let jet = u_jet(l, r, t, j, m, [0, 0, 1], TOL).unwrap();
                let ft = richardson(|x| u_jm(l, r, x, j, m, TOL).unwrap().value, t, 1e-2);
                assert!((jet.partial(0, 0, 1).unwrap() - ft).abs() < 1e-6 * ft.abs().max(1.0));
                let jet0 = u_jet(l, r, t, j, m, [0, 0, 0], TOL).unwrap();
                assert_eq!(jet0.value(), u_jm(l, r, t, j, m, TOL).unwrap().value);
            }
        }
    }

    #[test]
    fn w_jet_first_derivatives() {
        let (l, r, t) = (0.6, 1.0, 2.5);
        for m in 1..=3 {
            for j in 1..=m {
                let jr = w_jet(l, r, t, j, m, [0, 1, 0], TOL).unwrap();
                let jt = w_jet(l, r, t, j, m, [0, 0, 1], TOL).unwrap();
                let fr = richardson(|x| w_im(l, x, t, j, m, TOL).unwrap().value, r, 1e-2);
                let ft = richardson(|x| w_im(l, r, x, j, m, TOL).unwrap().value, t, 1e-2);
                assert!((jr.partial(0, 1, 0).unwrap() - fr).abs() < 1e-6 * fr.abs().max(1.0));
                assert!((jt.partial(0, 0, 1).unwrap() - ft).abs() < 1e-6 * ft.abs().max(1.0));
                let jet = jr;
                assert_eq!(jet.value(), w_im(l, r, t, j, m, TOL).unwrap().value);
            }
        }
    }

    #[test]
    fn index_lowering_recurrence() {
        // ∂_λ K_{j+1} = −(j + 1/2) ∂_λz K_j for both kernels.
        let (r, t) = (1.0, 2.0);
        for m in 1..=3 {
            for j in 0..m {
                let l = 1.8;
                let d = richardson(|x| u_jm(x, r, t, j + 1, m, TOL).unwrap().value, l, 1e-2);
                let dz = crate::jets::dlambda_z(l, r, t).unwrap();
                let want = -(j as f64 + 0.5) * dz * u_jm(l, r, t, j, m, TOL).unwrap().value;
                assert!((d - want).abs() <= 1e-5 * want.abs().max(1e-3));
                let l = 0.4;
                let d = richardson(|x| w_im(x, r, t, j + 1, m, TOL).unwrap().value, l, 1e-2);
                let dz = crate::jets::dlambda_z(l, r, t).unwrap();
                let want = -(j as f64 + 0.5) * dz * w_im(l, r, t, j, m, TOL).unwrap().value;
                assert!((d - want).abs() <= 1e-5 * want.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn derivative_matching_at_lower_cone() {
        let (r, t) = (1.0, 3.0);
        let l = t - r;
        for m in 1..=3 {
            for j in 1..=m {
                let u = u_jet(l + 1e-300, r, t, j, m, [0, 0, 0], TOL).unwrap();
                let w = w_jet(l, r, t, j, m, [0, 0, 0], TOL).unwrap();
                assert!((u.value() - w.value()).abs() < 1e-8);
                if j >= 2 {
                    let u = u_jet(l, r, t, j, m, [0, 1, 0], TOL).unwrap();
                    let w = w_jet(l, r, t, j, m, [0, 1, 0], TOL).unwrap();
                    assert!((u.partial(0, 1, 0).unwrap() - w.partial(0, 1, 0).unwrap()).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn u0_derivatives_match_value_and_differences() {
        for m in 1..=3u32 {
            for &z in &[-0.999, -0.9, -0.3, 0.2, 0.8, 0.99] {
                let p = ConePoint::from_z(z).unwrap();
                let tay = u0_z_taylor(m, p, 3, TOL).unwrap();
                let direct = u_value(0, m, p, TOL).unwrap().value;
                assert!((tay[0] - direct).abs() <= 1e-10 * direct.abs().max(1.0), "m={m} z={z}");
                let h = 0.1 * (1.0 - z.abs());
                let u = |zz: f64| Ok(u_value(0, m, ConePoint::from_z(zz)?, TOL)?.value);
                let d1 = crate::riemann::central_richardson(u, z, 1, h, 4).unwrap();
                let d2 = crate::riemann::central_richardson(u, z, 2, h, 4).unwrap();
                assert!((tay[1] - d1).abs() <= 1e-6 * d1.abs().max(1.0), "m={m} z={z}: {} vs {d1}", tay[1]);
                assert!((2.0 * tay[2] - d2).abs() <= 1e-5 * d2.abs().max(1.0), "m={m} z={z}: {} vs {d2}", 2.0 * tay[2]);
            }
        }
    }

    #[test]
    fn u0_derivatives_continuous_at_upper_cone() {
        for m in 1..=3u32 {
            let at = u0_z_taylor(m, ConePoint::from_z(1.0).unwrap(), 3, TOL).unwrap();
            let near = u0_z_taylor(m, ConePoint::from_z(1.0 - 1e-9).unwrap(), 3, TOL).unwrap();
            for s in 0..=3 {
                assert!((at[s] - near[s]).abs() <= 1e-6 * at[s].abs().max(1.0), "m={m} s={s}");
            }
        }
    }
}
