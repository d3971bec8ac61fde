//! Gauss rules and a double-exponential (tanh-sinh) integrator.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes ascending on `[-1, 1]` with matching weights.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Eigenvalues and squared first eigenvector components of the symmetric
/// tridiagonal matrix with diagonal `d` and off-diagonal `e` (`e[i]`
/// couples `i` and `i+1`). Implicit QL; only the first row of the
/// eigenvector matrix is carried, so the cost is quadratic.
fn tridiagonal_eigen(mut d: Vec<f64>, off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Quadrature {
                    what: "tridiagonal eigenvalue iteration".into(),
                    err_est: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Jacobi rule for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
fn build_gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if n == 0 || !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::InvalidParameter(format!(
            "Gauss–Jacobi rule needs n ≥ 1 and exponents > -1 (n = {n}, alpha = {alpha}, beta = {beta})"
        )));
    }
    let s = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let kk = k as f64;
        let denom = (2.0 * kk + s) * (2.0 * kk + s + 2.0);
        diag.push(if denom.abs() < 1e-300 || (k == 0 && s.abs() < 1e-14) {
            (beta - alpha) / (s + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        });
    }
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 1..n {
        let kk = k as f64;
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + s).powi(2) * (3.0 + s))
        } else {
            let q = 2.0 * kk + s;
            4.0 * kk * (kk + alpha) * (kk + beta) * (kk + s) / (q * q * (q + 1.0) * (q - 1.0))
        };
        off.push(b2.sqrt());
    }
    let (nodes, first) = tridiagonal_eigen(diag, &off)?;
    let log_mu0 = (s + 1.0) * std::f64::consts::LN_2 + libm::lgamma(alpha + 1.0)
        + libm::lgamma(beta + 1.0)
        - libm::lgamma(s + 2.0);
    let mu0 = log_mu0.exp();
    let weights = first.into_iter().map(|v| v * mu0).collect();
    Ok(GaussRule { nodes, weights })
}

type RuleKey = (usize, u64, u64);

fn jacobi_cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached Gauss–Jacobi rule.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Arc<GaussRule>> {
    let key = (n, alpha.to_bits(), beta.to_bits());
    if let Some(rule) = jacobi_cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_gauss_jacobi(n, alpha, beta)?);
    jacobi_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, rule.clone());
    Ok(rule)
}

pub fn gauss_legendre(n: usize) -> Result<Arc<GaussRule>> {
    gauss_jacobi(n, 0.0, 0.0)
}

/// Gauss–Chebyshev (first kind) rule: weight `(1-x^2)^{-1/2}`. Nodes are
/// returned as angles `θ_k` with `x_k = cos θ_k`; all weights are `π/n`.
pub fn chebyshev_angles(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| (2 * k - 1) as f64 * PI / (2 * n) as f64)
        .collect()
}

/// Integrate `f` over `[a, b]` with an `n`-point Gauss–Legendre rule.
pub fn gauss_legendre_integrate<F>(n: usize, a: f64, b: f64, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let rule = gauss_legendre(n)?;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * f(mid + half * x)?;
    }
    Ok(acc * half)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
    /// Integral of `|f|`, the natural scale for the error.
    pub abs_integral: f64,
    pub evals: usize,
}

/// Abscissa, endpoint gaps and weight of the tanh-sinh node at `tau`.
fn node(a: f64, b: f64, half: f64, tau: f64) -> Option<(f64, f64, f64, f64)> {
    let u = FRAC_PI_2 * tau.sinh();
    let e2 = (-2.0 * u.abs()).exp();
    // 1 - tanh|u| and 1 + tanh|u| without cancellation.
    let small = 2.0 * e2 / (1.0 + e2);
    let large = 2.0 / (1.0 + e2);
    let (da, db) = if u >= 0.0 {
        (half * large, half * small)
    } else {
        (half * small, half * large)
    };
    if !(da > 0.0) || !(db > 0.0) {
        return None;
    }
    let cosh_u = u.cosh();
    let w = half * FRAC_PI_2 * tau.cosh() / (cosh_u * cosh_u);
    if w == 0.0 || !w.is_finite() {
        return None;
    }
    let x = if da <= db { a + da } else { b - db };
    Some((x, da, db, w))
}

/// Settings for [`TanhSinh::integrate`].
#[derive(Debug, Clone, Copy)]
pub struct TanhSinh {
    pub rel_tol: f64,
    pub max_level: usize,
    /// Largest `|τ|` of the transformed abscissa.
    pub tau_max: f64,
}

impl TanhSinh {
    pub fn new(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            max_level: 10,
            tau_max: 4.5,
        }
    }

    /// Integrate `f(x, x - a, b - x)` over `[a, b]`.
    ///
    /// The endpoint gaps are computed from the transformation rather than
    /// by subtraction, so integrands singular at an endpoint can be
    /// evaluated accurately right next to it.
    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<Estimate>
    where
        F: FnMut(f64, f64, f64) -> Result<f64>,
    {
        if !(b > a) {
            return Ok(Estimate {
                value: 0.0,
                err_est: 0.0,
                abs_integral: 0.0,
                evals: 0,
            });
        }
        let half = 0.5 * (b - a);
        let mut evals = 0usize;
        let mut sample = |tau: f64| -> Result<(f64, f64)> {
            let Some((x, da, db, w)) = node(a, b, half, tau) else {
                return Ok((0.0, 0.0));
            };
            evals += 1;
            let v = f(x, da, db)?;
            if !v.is_finite() {
                return Err(Error::Quadrature {
                    what: format!("non-finite integrand at x = {x}"),
                    err_est: f64::INFINITY,
                });
            }
            Ok((w * v, w * v.abs()))
        };

        let mut h = 1.0;
        let (mut sum, mut sum_abs) = sample(0.0)?;
        let mut value = 0.0;
        let mut err = f64::INFINITY;
        for level in 0..=self.max_level {
            // Level 0 visits every integer multiple of h; later levels only
            // the odd multiples. Each side walks outward and stops once
            // the terms are negligible against the running sum.
            let (first, step) = if level == 0 { (1, 1) } else { (1, 2) };
            for sign in [1.0, -1.0] {
                let mut k = first;
                let mut small_run = 0;
                loop {
                    let tau = k as f64 * h;
                    if tau > self.tau_max {
                        break;
                    }
                    let (v, va) = sample(sign * tau)?;
                    sum += v;
                    sum_abs += va;
                    if va <= 1e-18 * sum_abs && tau > 1.0 {
                        small_run += 1;
                        if small_run >= 3 {
                            break;
                        }
                    } else {
                        small_run = 0;
                    }
                    k += step;
                }
            }
            let next = h * sum;
            if level > 0 {
                err = (next - value).abs();
            }
            value = next;
            if level > 0 && (err <= self.rel_tol * value.abs().max(h * sum_abs) || err == 0.0) {
                return Ok(Estimate {
                    value,
                    err_est: err,
                    abs_integral: h * sum_abs,
                    evals,
                });
            }
            h *= 0.5;
        }
        Err(Error::Quadrature {
            what: format!("tanh-sinh on [{a}, {b}]"),
            err_est: err,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = gauss_legendre(10).unwrap();
        for p in 0..20 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(p))
                .sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((got - exact).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn jacobi_rule_moments() {
        // ∫ (1-x)^{-1/2} (1+x)^{3/2} x^p dx against Beta-function moments
        // computed through the substitution x = 2ν - 1.
        let (alpha, beta) = (-0.5, 1.5);
        let rule = gauss_jacobi(12, alpha, beta).unwrap();
        let beta_fn =
            |a: f64, b: f64| (libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)).exp();
        for p in 0..12u32 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(p as i32))
                .sum();
            // x^p = Σ C(p,q) (2ν)^q (-1)^{p-q}
            let mut exact = 0.0;
            let mut magnitude = 0.0;
            for q in 0..=p {
                let binom = (0..q).fold(1.0, |acc, i| acc * (p - i) as f64 / (i + 1) as f64);
                let sign = if (p - q) % 2 == 0 { 1.0 } else { -1.0 };
                let term = binom
                    * 2f64.powi(q as i32)
                    * 2f64.powf(alpha + beta + 1.0)
                    * beta_fn(beta + 1.0 + q as f64, alpha + 1.0);
                exact += sign * term;
                magnitude += term;
            }
            assert!((got - exact).abs() < 1e-13 * magnitude, "p = {p}");
        }
    }

    #[test]
    fn jacobi_large_rule_is_sane() {
        let rule = gauss_jacobi(1024, -0.5, 3.5).unwrap();
        assert!(rule.weights.iter().all(|w| *w > 0.0));
        assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        let mu0: f64 = rule.weights.iter().sum();
        let exact = (4.0 * std::f64::consts::LN_2 + libm::lgamma(0.5) + libm::lgamma(4.5)
            - libm::lgamma(5.0))
        .exp();
        assert!((mu0 - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn chebyshev_matches_closed_form() {
        let rule = gauss_jacobi(7, -0.5, -0.5).unwrap();
        let mut angles: Vec<f64> = chebyshev_angles(7).into_iter().map(f64::cos).collect();
        angles.sort_by(f64::total_cmp);
        for (a, b) in angles.iter().zip(&rule.nodes) {
            assert!((a - b).abs() < 1e-14);
        }
        for w in &rule.weights {
            assert!((w - PI / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        let ts = TanhSinh::new(1e-13);
        let est = ts
            .integrate(0.0, 1.0, |_x, da, _db| Ok(da.powf(-0.5)))
            .unwrap();
        assert!((est.value - 2.0).abs() < 1e-13);
        let est = ts
            .integrate(0.0, 1.0, |_x, da, db| Ok((da * db).powf(-0.5)))
            .unwrap();
        assert!((est.value - PI).abs() < 1e-13);
        let est = ts.integrate(0.0, 1.0, |_x, da, _db| Ok(da.ln())).unwrap();
        assert!((est.value + 1.0).abs() < 1e-13);
        // Right endpoint singular, far from the origin: needs the gap.
        let est = ts
            .integrate(1e6, 1e6 + 1.0, |_x, _da, db| Ok(db.powf(-0.5)))
            .unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_smooth_and_empty() {
        let ts = TanhSinh::new(1e-12);
        let est = ts.integrate(0.0, PI, |x, _, _| Ok(x.sin())).unwrap();
        assert!((est.value - 2.0).abs() < 1e-12);
        let est = ts.integrate(1.0, 1.0, |_, _, _| Ok(1.0)).unwrap();
        assert_eq!(est.value, 0.0);
        let est = ts.integrate(-1.0, 1.0, |x, _, _| Ok(x)).unwrap();
        assert!(est.value.abs() < 1e-14);
    }
}
