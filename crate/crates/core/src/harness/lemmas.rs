//! Numerical checks of the supporting inequalities: fitted constants that
//! must stay finite and stable as the sample is refined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{inv_dlambda_z_jet, z_jet};
use crate::kernels::{u0_jet, u_jet, w_jet, w_value, InteriorPoint};
use crate::params::{bracket, DimParams, Tolerances};
use crate::quadrature::TanhSinh;
use crate::riemann::{RadialProfile, Riemann};

/// Largest relative growth of a fitted constant under the last 2×
/// refinement of the sample.
pub const MAX_GROWTH: f64 = 0.05;

/// Quadrature tolerance for the lemma integrals.
const QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantFit {
    pub name: String,
    /// Sample sizes of the refinement levels, coarsest first.
    pub samples: Vec<usize>,
    /// Sup of LHS/RHS at each level.
    pub sups: Vec<f64>,
    pub c_hat: f64,
    pub growth: f64,
    pub errors: usize,
    pub first_error: Option<String>,
    pub pass: bool,
}

impl ConstantFit {
    fn from_levels(name: &str, samples: Vec<usize>, sups: Vec<f64>, errors: usize, first_error: Option<String>) -> Self {
        let c_hat = sups.last().copied().unwrap_or(0.0);
        let growth = refinement_growth(&sups);
        let pass = errors == 0 && c_hat.is_finite() && growth < MAX_GROWTH;
        Self {
            name: name.to_string(),
            samples,
            sups,
            c_hat,
            growth,
            errors,
            first_error,
            pass,
        }
    }
}

/// Relative change of a fitted constant over the last 2× refinement.
pub(crate) fn refinement_growth(levels: &[f64]) -> f64 {
    let n = levels.len();
    if n < 2 {
        return 0.0;
    }
    let (coarse, fine) = (levels[n - 2], levels[n - 1]);
    if coarse > 0.0 {
        fine / coarse - 1.0
    } else if fine > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Nested tensor grids on the unit cube: level `L` has `base·2^L + 1` nodes
/// per axis and contains every coarser level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub base: usize,
    pub levels: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { base: 6, levels: 3 }
    }
}

impl Sampling {
    pub(crate) fn scaled(self, factor: usize) -> Self {
        Self {
            base: self.base * factor,
            ..self
        }
    }
}

/// Values of `eval` at every node of the finest grid, with node indices.
pub(crate) type GridValues<T> = Vec<(Vec<usize>, Result<Option<T>>)>;

pub(crate) fn evaluate_grid<T, F>(dims: usize, sampling: Sampling, eval: F) -> GridValues<T>
where
    T: Send,
    F: Fn(&[f64]) -> Result<Option<T>> + Sync,
{
    let fine = sampling.base.max(1) << (sampling.levels.max(1) - 1);
    let per_axis = fine + 1;
    (0..per_axis.pow(dims as u32))
        .into_par_iter()
        .map(|mut idx| {
            let mut ix = Vec::with_capacity(dims);
            for _ in 0..dims {
                ix.push(idx % per_axis);
                idx /= per_axis;
            }
            let u: Vec<f64> = ix.iter().map(|&i| i as f64 / fine as f64).collect();
            let v = eval(&u);
            (ix, v)
        })
        .collect()
}

/// Whether a finest-grid node belongs to refinement level `level`.
pub(crate) fn in_level(ix: &[usize], level: usize, sampling: Sampling) -> bool {
    let stride = 1 << (sampling.levels.max(1) - 1 - level);
    ix.iter().all(|i| i % stride == 0)
}

pub(crate) fn count_errors<T>(values: &GridValues<T>, finite: impl Fn(&T) -> bool) -> (usize, Option<String>) {
    let mut errors = 0;
    let mut first = None;
    for (_, r) in values {
        match r {
            Err(e) => {
                errors += 1;
                first.get_or_insert_with(|| e.to_string());
            }
            Ok(Some(v)) if !finite(v) => {
                errors += 1;
                first.get_or_insert_with(|| "non-finite sample".to_string());
            }
            _ => {}
        }
    }
    (errors, first)
}

/// Evaluates `ratio` on the finest grid once and reports the sup of every
/// level. `ratio` returns `None` for points that carry no information
/// (both sides zero, or the right side infinite).
pub(crate) fn fit_on_grid<F>(name: &str, dims: usize, sampling: Sampling, ratio: F) -> ConstantFit
where
    F: Fn(&[f64]) -> Result<Option<f64>> + Sync,
{
    let values = evaluate_grid(dims, sampling, ratio);
    let (errors, first_error) = count_errors(&values, |v| v.is_finite());
    let mut samples = Vec::new();
    let mut sups = Vec::new();
    for level in 0..sampling.levels.max(1) {
        let mut n = 0;
        let mut sup: f64 = 0.0;
        for (_, r) in values.iter().filter(|(ix, _)| in_level(ix, level, sampling)) {
            n += 1;
            if let Ok(Some(v)) = r {
                if v.is_finite() {
                    sup = sup.max(*v);
                }
            }
        }
        samples.push(n);
        sups.push(sup);
    }
    ConstantFit::from_levels(name, samples, sups, errors, first_error)
}

pub(crate) fn log_map(u: f64, lo: f64, hi: f64) -> f64 {
    lo * (hi / lo).powf(u)
}

fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs.is_infinite() || (lhs == 0.0 && rhs == 0.0) {
        None
    } else {
        Some(lhs.abs() / rhs)
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Above,
    Critical,
    Below,
}

/// A weighted-integral check: the fitted constant of the branch's majorant
/// and, on the critical branch, the growth of the integral against the
/// logarithm it is predicted to carry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralCheck {
    pub fit: ConstantFit,
    pub branch: Branch,
    /// Slope of `ln(ratio)` against `ln(1 + log)` along the critical line;
    /// near 1 when the ratio grows linearly in the logarithm.
    pub log_slope: Option<f64>,
    pub pass: bool,
}

/// Accepted distance of a critical-branch log slope from 1.
pub const LOG_SLOPE_TOL: f64 = 0.1;

/// `∫_{|t−r|}^{t+r} ⟨λ⟩^b (r − t + λ)^{a−1} dλ`.
pub fn ts1_integral(a: f64, b: f64, r: f64, t: f64) -> Result<f64> {
    let (lo, hi) = ((t - r).abs(), t + r);
    if !(hi > lo) {
        return Ok(0.0);
    }
    let shift = if t >= r { 0.0 } else { 2.0 * (r - t) };
    let est = TanhSinh::new(QUAD_TOL).integrate(lo, hi, |lam, gl, _| {
        Ok(bracket(lam).powf(b) * (shift + gl).powf(a - 1.0))
    })?;
    Ok(est.value)
}

/// The majorant of [`ts1_integral`] without its constant.
pub fn ts1_bound(a: f64, b: f64, r: f64, t: f64) -> f64 {
    let (p, q) = (bracket(t + r), bracket(t - r));
    r.powf(a)
        * if b > -a {
            p.powf(b)
        } else if b == -a {
            p.powf(-a) * (1.0 + (p / q).ln())
        } else {
            p.powf(-a) * q.powf(a + b)
        }
}

/// Checks the three-branch estimate of [`ts1_integral`] for `a > 0` over
/// `r ∈ [10⁻², 10³]`, `t/r ∈ [10⁻³, 10³]`.
pub fn check_ts1(a: f64, b: f64, sampling: Sampling) -> Result<IntegralCheck> {
    if !(a > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("need a > 0 and finite b, got a = {a}, b = {b}")));
    }
    let fit = fit_on_grid("weighted_cone_integral", 2, sampling.scaled(4), |u| {
        let r = log_map(u[0], 1e-2, 1e3);
        let t = r * log_map(u[1], 1e-3, 1e3);
        Ok(ratio(ts1_integral(a, b, r, t)?, ts1_bound(a, b, r, t)))
    });
    let branch = branch_of(b + a, 0.0);
    let log_slope = if branch == Branch::Critical {
        // Along t = r the log factor is 1 + ln⟨2r⟩.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..=12 {
            let r = 10f64.powf(6.0 + 0.5 * i as f64);
            let base = r.powf(a) * bracket(2.0 * r).powf(-a);
            xs.push((1.0 + bracket(2.0 * r).ln()).ln());
            ys.push((ts1_integral(a, b, r, r)? / base).ln());
        }
        Some(slope(&xs, &ys))
    } else {
        None
    };
    let pass = fit.pass && log_slope.is_none_or(|s| (s - 1.0).abs() <= LOG_SLOPE_TOL);
    Ok(IntegralCheck {
        fit,
        branch,
        log_slope,
        pass,
    })
}

fn branch_of(x: f64, at: f64) -> Branch {
    if x > at {
        Branch::Above
    } else if x == at {
        Branch::Critical
    } else {
        Branch::Below
    }
}

/// `∫_0^{s} λ^b ⟨λ⟩^c (s − λ)^{a−1} dλ` with `s = t − r`.
pub fn ts2_integral(a: f64, b: f64, c: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Ok(0.0);
    }
    let est = TanhSinh::new(QUAD_TOL).integrate(0.0, s, |lam, _, gh| {
        Ok(lam.powf(b) * bracket(lam).powf(c) * gh.powf(a - 1.0))
    })?;
    Ok(est.value)
}

pub fn ts2_bound(a: f64, b: f64, c: f64, s: f64) -> f64 {
    let q = bracket(s);
    s.powf(a + b)
        * if b + c > -1.0 {
            q.powf(c)
        } else if b + c == -1.0 {
            q.powf(-b - 1.0) * (1.0 + q.ln())
        } else {
            q.powf(-b - 1.0)
        }
}

/// Checks the three-branch estimate of [`ts2_integral`] for `a > 0`, `b ≥ 0`.
/// The integral depends on `(r, t)` only through `t − r`, which is sampled
/// over `[10⁻³, 10⁶]`.
pub fn check_ts2(a: f64, b: f64, c: f64, sampling: Sampling) -> Result<IntegralCheck> {
    if !(a > 0.0) || !(b >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need a > 0, b ≥ 0 and finite c, got a = {a}, b = {b}, c = {c}"
        )));
    }
    let fit = fit_on_grid("weighted_interior_integral", 1, sampling.scaled(16), |u| {
        let s = log_map(u[0], 1e-3, 1e6);
        Ok(ratio(ts2_integral(a, b, c, s)?, ts2_bound(a, b, c, s)))
    });
    let branch = branch_of(b + c, -1.0);
    let log_slope = if branch == Branch::Critical {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..=12 {
            let s = 10f64.powf(6.0 + 0.5 * i as f64);
            let q = bracket(s);
            xs.push((1.0 + q.ln()).ln());
            ys.push((ts2_integral(a, b, c, s)? / (s.powf(a + b) * q.powf(-b - 1.0))).ln());
        }
        Some(slope(&xs, &ys))
    } else {
        None
    };
    let pass = fit.pass && log_slope.is_none_or(|s| (s - 1.0).abs() <= LOG_SLOPE_TOL);
    Ok(IntegralCheck {
        fit,
        branch,
        log_slope,
        pass,
    })
}

/// Pointwise derivative estimates of the geometric symbols and kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// `|∂_λ^i z| ≤ C (λ² + |t² − r²|)/(r λ^{i+1})`.
    ZLambda,
    /// `|∂_λ^i ∂_r^j ∂_t^k z| ≤ C λ^{−1−i} r^{−1−j} (t+r)^{2−k}`, `λ ≤ t + r`.
    ZMixed,
    /// `|D^β z| ≤ C max(r² + |t² − λ²|, rt)/(λ r^{|β|+1})`, `t ≥ r`.
    ZSpaceTime,
    /// `|D_*^α z| ≤ C λ^{−|α|}` on the cone band with `t ≤ 2r`.
    ZBand,
    /// `|∂_λ^i ∂_r^j ∂_t^k (∂_λ z)^{-1}| ≤ C λ^{2−i} r^{1−j} t^{j−1} (t−r)^{−1−j−k}`.
    InvDz,
    /// `|D^β H_ij f| ≤ C λ^j r^{j−|β|} t^{|β|−j} (t−r)^{−i−j−|β|} Σ λ^{m+a+s}|f^{(s)}|`.
    HOperator,
    /// `|D_*^α U_0m| ≤ C (λ/(r−t+λ))^{1/2+|α|} λ^{−|α|}` with `t ≤ 2r`.
    U0Band,
    /// `|D^β U_jm| ≤ C (λr/(t+r))^{1/2−|β|} (r−t+λ)^{−1/2}`, `t ≥ r`.
    UDerivatives,
    /// `|W_im| ≤ C (r/(t+r) · λ/(t−r−λ))^{i₀−i+1/2}`.
    WValue,
    /// `|D^β W_jm| ≤ C (r/(t+r))^{1/2−|β|} λ^{m−j+1/2} (t−r)^{−(m−j+|β|)} (t−r−λ)^{−1/2}`.
    WDerivatives,
}

impl Estimate {
    pub const ALL: [Estimate; 10] = [
        Estimate::ZLambda,
        Estimate::ZMixed,
        Estimate::ZSpaceTime,
        Estimate::ZBand,
        Estimate::InvDz,
        Estimate::HOperator,
        Estimate::U0Band,
        Estimate::UDerivatives,
        Estimate::WValue,
        Estimate::WDerivatives,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimate::ZLambda => "z_lambda",
            Estimate::ZMixed => "z_mixed",
            Estimate::ZSpaceTime => "z_space_time",
            Estimate::ZBand => "z_band",
            Estimate::InvDz => "inv_dz",
            Estimate::HOperator => "h_operator",
            Estimate::U0Band => "u0_band",
            Estimate::UDerivatives => "u_derivatives",
            Estimate::WValue => "w_value",
            Estimate::WDerivatives => "w_derivatives",
        }
    }

    /// Whether the estimate concerns the even-dimensional kernels.
    pub fn even_only(self) -> bool {
        matches!(
            self,
            Estimate::U0Band | Estimate::UDerivatives | Estimate::WValue | Estimate::WDerivatives
        )
    }
}

/// Highest derivative order per variable in the symbol checks.
const SYMBOL_ORDER: usize = 2;
const KERNEL_TOL: f64 = 1e-12;

fn multi_indices(max_each: usize, max_total: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..=max_each {
        for j in 0..=max_each {
            for k in 0..=max_each {
                if i + j + k <= max_total {
                    out.push([i, j, k]);
                }
            }
        }
    }
    out
}

fn space_time_indices(max_total: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        for j in 0..=total {
            out.push([j, total - j]);
        }
    }
    out
}

fn worst<I, F>(items: I, mut f: F) -> Result<Option<f64>>
where
    I: IntoIterator,
    F: FnMut(I::Item) -> Result<Option<f64>>,
{
    let mut out: Option<f64> = None;
    for it in items {
        if let Some(v) = f(it)? {
            out = Some(out.map_or(v, |w| w.max(v)));
        }
    }
    Ok(out)
}

/// `r ∈ [10⁻², 10²]`.
fn sample_r(u: f64) -> f64 {
    log_map(u, 1e-2, 1e2)
}

/// `t = r(1 + s)` with `s ∈ [10⁻³, 10³]`.
fn sample_t_above(r: f64, u: f64) -> f64 {
    r * (1.0 + log_map(u, 1e-3, 1e3))
}

/// A point `λ ∈ (lo, hi)` whose distances to both ends span six decades,
/// returned with the exact gaps `λ − lo` and `hi − λ`.
fn sample_between(lo: f64, hi: f64, u: f64) -> (f64, f64, f64) {
    let e = 10f64.powf(6.0 - 12.0 * u);
    let w = hi - lo;
    let (gl, gh) = (w / (1.0 + e), w * e / (1.0 + e));
    let lam = if gl <= gh { lo + gl } else { hi - gh };
    (lam, gl, gh)
}

/// Checks one pointwise estimate; `f` is the profile used by the
/// `H_ij` check (ignored by the others).
pub fn check_estimate(est: Estimate, dims: DimParams, f: &RadialProfile, sampling: Sampling) -> Result<ConstantFit> {
    if est.even_only() && dims.is_odd() {
        return Err(Error::InvalidParameter(format!(
            "{} concerns the even-dimensional kernels; n = {} is odd",
            est.name(),
            dims.n()
        )));
    }
    let m = dims.m();
    let w = dims.weight_f64();
    let name = est.name();
    let fit = match est {
        Estimate::ZLambda => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = r * log_map(u[1], 1e-3, 1e3);
            let lam = (t + r) * log_map(u[2], 1e-4, 10.0);
            let jet = z_jet(lam, r, t, [4, 0, 0])?;
            worst(0..=4, |i| {
                let rhs = (lam * lam + (t * t - r * r).abs()) / (r * lam.powi(i as i32 + 1));
                Ok(ratio(jet.partial(i, 0, 0)?, rhs))
            })
        }),
        Estimate::ZMixed => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = r * log_map(u[1], 1e-3, 1e3);
            let lam = (t + r) * log_map(u[2], 1e-4, 1.0);
            let jet = z_jet(lam, r, t, [SYMBOL_ORDER; 3])?;
            worst(multi_indices(SYMBOL_ORDER, 3 * SYMBOL_ORDER), |[i, j, k]| {
                let rhs = lam.powi(-1 - i as i32) * r.powi(-1 - j as i32) * (t + r).powi(2 - k as i32);
                Ok(ratio(jet.partial(i, j, k)?, rhs))
            })
        }),
        Estimate::ZSpaceTime => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = sample_t_above(r, u[1]);
            let lam = (t + r) * log_map(u[2], 1e-4, 1.0);
            let jet = z_jet(lam, r, t, [0, 3, 3])?;
            worst(space_time_indices(3), |[j, k]| {
                let top = (r * r + (t * t - lam * lam).abs()).max(r * t);
                let rhs = top / (lam * r.powi((j + k) as i32 + 1));
                Ok(ratio(jet.partial(0, j, k)?, rhs))
            })
        }),
        Estimate::ZBand => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = 2.0 * r * log_map(u[1], 1e-3, 1.0);
            let (lam, _, _) = sample_between((t - r).abs(), t + r, u[2]);
            if !(lam > 0.0) {
                return Ok(None);
            }
            let jet = z_jet(lam, r, t, [SYMBOL_ORDER; 3])?;
            worst(multi_indices(SYMBOL_ORDER, 3 * SYMBOL_ORDER), |[i, j, k]| {
                Ok(ratio(jet.partial(i, j, k)?, lam.powi(-((i + j + k) as i32))))
            })
        }),
        Estimate::InvDz => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = sample_t_above(r, u[1]);
            let lam = (t + r) * log_map(u[2], 1e-4, 1.0);
            let jet = inv_dlambda_z_jet(lam, r, t, [SYMBOL_ORDER; 3])?;
            worst(multi_indices(SYMBOL_ORDER, 3 * SYMBOL_ORDER), |[i, j, k]| {
                let rhs = lam.powi(2 - i as i32) * r.powi(1 - j as i32) * t.powi(j as i32 - 1)
                    / (t - r).powi(1 + (j + k) as i32);
                Ok(ratio(jet.partial(i, j, k)?, rhs))
            })
        }),
        Estimate::HOperator => {
            let op = Riemann::new(dims, Tolerances::default())?;
            fit_on_grid(name, 3, sampling, |u| {
                let r = sample_r(u[0]);
                let t = sample_t_above(r, u[1]);
                let lam = (t + r) * log_map(u[2], 1e-4, 1.0);
                let mut cases = Vec::new();
                for i in 0..=1usize {
                    for j in i..=m as usize {
                        for beta in space_time_indices(j) {
                            cases.push((i, j, beta));
                        }
                    }
                }
                let taylor = f.taylor(lam, m as usize + 1)?;
                worst(cases, |(i, j, beta)| {
                    let jet = op.h_jet(f, i, j, lam, r, t, beta)?;
                    let b = beta[0] + beta[1];
                    let sum: f64 = (0..=i + j)
                        .map(|s| lam.powf(w + s as f64) * (taylor[s] * factorial(s)).abs())
                        .sum();
                    let rhs = lam.powi(j as i32) * r.powi(j as i32 - b as i32) * t.powi(b as i32 - j as i32)
                        / (t - r).powi((i + j + b) as i32)
                        * sum;
                    Ok(ratio(jet.partial(0, beta[0], beta[1])?, rhs))
                })
            })
        }
        Estimate::U0Band => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = 2.0 * r * log_map(u[1], 1e-3, 1.0);
            let (lo, hi) = ((t - r).abs(), t + r);
            let (lam, gl, _) = sample_between(lo, hi, u[2]);
            // r − t + λ, exact near the lower cone.
            let gap = if t >= r { gl } else { 2.0 * (r - t) + gl };
            let jet = u0_jet(lam, r, t, m, [SYMBOL_ORDER; 3], KERNEL_TOL)?;
            worst(multi_indices(SYMBOL_ORDER, 2 * SYMBOL_ORDER), |[i, j, k]| {
                let n = (i + j + k) as f64;
                let rhs = (lam / gap).powf(0.5 + n) * lam.powf(-n);
                Ok(ratio(jet.partial(i, j, k)?, rhs))
            })
        }),
        Estimate::UDerivatives => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = sample_t_above(r, u[1]);
            let (lam, gl, _) = sample_between(t - r, t + r, u[2]);
            let mut cases = Vec::new();
            for j in 0..=m {
                for beta in space_time_indices(j as usize) {
                    cases.push((j, beta));
                }
            }
            worst(cases, |(j, beta)| {
                let b = (beta[0] + beta[1]) as f64;
                let jet = u_jet(lam, r, t, j, m, [0, beta[0], beta[1]], KERNEL_TOL)?;
                let rhs = (lam * r / (t + r)).powf(0.5 - b) / gl.sqrt();
                Ok(ratio(jet.partial(0, beta[0], beta[1])?, rhs))
            })
        }),
        Estimate::WValue => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = sample_t_above(r, u[1]);
            let (lam, _, gh) = sample_between(0.0, t - r, u[2]);
            let p = InteriorPoint::with_gap(lam, r, t, gh);
            let mut cases = Vec::new();
            for i in 0..=m {
                for i0 in i..=m {
                    cases.push((i, i0));
                }
            }
            worst(cases, |(i, i0)| {
                let v = w_value(i, m, p, KERNEL_TOL)?.value;
                let rhs = (r / (t + r) * lam / gh).powf(i0 as f64 - i as f64 + 0.5);
                Ok(ratio(v, rhs))
            })
        }),
        Estimate::WDerivatives => fit_on_grid(name, 3, sampling, |u| {
            let r = sample_r(u[0]);
            let t = sample_t_above(r, u[1]);
            let (lam, _, gh) = sample_between(0.0, t - r, u[2]);
            let mut cases = Vec::new();
            for j in 0..=m {
                for beta in space_time_indices(j as usize) {
                    cases.push((j, beta));
                }
            }
            worst(cases, |(j, beta)| {
                let b = beta[0] + beta[1];
                let jet = w_jet(lam, r, t, j, m, [0, beta[0], beta[1]], KERNEL_TOL)?;
                let rhs = (r / (t + r)).powf(0.5 - b as f64) * lam.powf((m - j) as f64 + 0.5)
                    / (t - r).powi((m - j) as i32 + b as i32)
                    / gh.sqrt();
                Ok(ratio(jet.partial(0, beta[0], beta[1])?, rhs))
            })
        }),
    };
    Ok(fit)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `|D^β u0| · r^{m+|β|−l} / ε` over `r ∈ [10⁻³, 1/2]`, `t ∈ [1, 4]`:
/// bounded when the solution has the predicted rate at the origin.
pub fn check_near_origin(
    op: &Riemann,
    phi: &RadialProfile,
    psi: &RadialProfile,
    beta: [usize; 2],
    sampling: Sampling,
) -> Result<ConstantFit> {
    let env = phi
        .envelope()
        .or(psi.envelope())
        .ok_or_else(|| Error::Profile("near-origin check needs data with an envelope".into()))?;
    let m = op.dims().m() as f64;
    let b = (beta[0] + beta[1]) as f64;
    let power = m + b - env.l as f64;
    Ok(fit_on_grid("near_origin_rate", 2, sampling, |u| {
        let r = log_map(u[0], 1e-3, 0.5);
        let t = 1.0 + 3.0 * u[1];
        let v = op.derivative(phi, psi, beta, r, t)?.value;
        Ok(Some(v.abs() * r.powf(power) / env.eps))
    }))
}

/// `(|∂_r u0| + |∂_t u0|) · r^{(n−1)/2 − δ} / ε` with `δ = a/2` over the
/// same window: bounded means the gradient is `O(r^{−(n−1)/2+δ})`.
pub fn check_origin_energy(op: &Riemann, phi: &RadialProfile, psi: &RadialProfile, sampling: Sampling) -> Result<ConstantFit> {
    let eps = phi.envelope().or(psi.envelope()).map(|e| e.eps).unwrap_or(1.0);
    let dims = op.dims();
    let power = dims.weight_f64() - 0.5 * dims.a_f64();
    Ok(fit_on_grid("origin_gradient_rate", 2, sampling, |u| {
        let r = log_map(u[0], 1e-3, 0.5);
        let t = 1.0 + 3.0 * u[1];
        let dr = op.derivative(phi, psi, [1, 0], r, t)?.value;
        let dt = op.derivative(phi, psi, [0, 1], r, t)?.value;
        Ok(Some((dr.abs() + dt.abs()) * r.powf(power) / eps))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::dim_params;

    const QUICK: Sampling = Sampling { base: 2, levels: 2 };

    #[test]
    fn cone_integral_closed_form() {
        // a = 1, b = 0 integrates 1 over [0, 2r].
        for r in [0.1, 1.0, 30.0] {
            let v = ts1_integral(1.0, 0.0, r, r).unwrap();
            assert!((v - 2.0 * r).abs() < 1e-12 * r, "{v}");
        }
        // a = 2, b = 0, t > r: ∫ (λ − (t − r)) dλ over [t − r, t + r] = 2r².
        let v = ts1_integral(2.0, 0.0, 1.5, 4.0).unwrap();
        assert!((v - 4.5).abs() < 1e-12);
    }

    #[test]
    fn interior_integral_vanishes_on_the_cone() {
        assert_eq!(ts2_integral(0.5, 1.0, -2.0, 0.0).unwrap(), 0.0);
        // a = 1, b = 0, c = 0 is the length of the interval.
        assert!((ts2_integral(1.0, 0.0, 0.0, 7.0).unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn integral_branches() {
        for (a, b, branch) in [(1.0, 0.0, Branch::Above), (1.0, -1.0, Branch::Critical), (0.5, -2.0, Branch::Below)] {
            let c = check_ts1(a, b, QUICK).unwrap();
            assert_eq!(c.branch, branch);
            assert!(c.pass, "{c:?}");
        }
        for (a, b, c, branch) in [(1.0, 0.0, 0.0, Branch::Above), (0.5, 1.0, -2.0, Branch::Critical), (0.5, 0.0, -3.0, Branch::Below)] {
            let k = check_ts2(a, b, c, QUICK).unwrap();
            assert_eq!(k.branch, branch);
            assert!(k.pass, "{k:?}");
        }
    }

    #[test]
    fn critical_branch_carries_one_log() {
        let c = check_ts1(1.0, -1.0, QUICK).unwrap();
        let s = c.log_slope.unwrap();
        assert!((s - 1.0).abs() <= LOG_SLOPE_TOL, "{s}");
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(check_ts1(0.0, 1.0, QUICK).is_err());
        assert!(check_ts2(1.0, -0.5, 0.0, QUICK).is_err());
        let odd = dim_params(5).unwrap();
        assert!(check_estimate(Estimate::WValue, odd, &RadialProfile::zero(), QUICK).is_err());
    }

    #[test]
    fn symbol_estimates_hold() {
        let d = dim_params(4).unwrap();
        let f = RadialProfile::power(1.0, 0.0, -3.0);
        for e in Estimate::ALL {
            let c = check_estimate(e, d, &f, QUICK).unwrap();
            assert!(c.pass && c.c_hat > 0.0, "{c:?}");
        }
    }

    #[test]
    fn nested_levels_share_nodes() {
        let c = fit_on_grid("count", 2, Sampling { base: 2, levels: 3 }, |_| Ok(Some(1.0)));
        assert_eq!(c.samples, vec![9, 25, 81]);
        assert_eq!(c.growth, 0.0);
    }
}
