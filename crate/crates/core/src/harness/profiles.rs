//! Data pairs `(φ, ψ)` matched to an envelope `(ε, k, l)`.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{bracket, DimParams};
use crate::riemann::{Envelope, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    /// `φ ∝ λ^{l−m}(1+λ)^{m−l−k}`, `ψ ∝ λ^{l−m−1}(1+λ)^{m−l−k}`.
    PowerEnvelope,
    /// A smooth bump on `[1, 2]` for both data.
    CompactBump,
}

/// Normalised profiles keep this fraction of the envelope, so points
/// between the sampling nodes stay below it as well.
const MARGIN: f64 = 0.98;
const GRID: usize = 10_000;

fn log_grid(lo: f64, hi: f64, count: usize, shift: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * (i as f64 + shift) / (count as f64 - 1.0 + shift)).exp())
        .collect()
}

fn envelope_unit(lambda: f64, k: f64, l: u32, m: u32) -> f64 {
    lambda.powi(l as i32 - m as i32) * bracket(lambda).powf(m as f64 - l as f64 - k)
}

/// `Σ_{s≤l+1} λ^s|φ^{(s)}| + Σ_{s≤l} λ^{s+1}|ψ^{(s)}|`.
pub fn data_sum(phi: &RadialProfile, psi: &RadialProfile, l: u32, lambda: f64) -> Result<f64> {
    Ok(phi.weighted_sum(lambda, l as usize + 1, 0)? + psi.weighted_sum(lambda, l as usize, 1)?)
}

/// Largest `data_sum / (λ^{l−m}⟨λ⟩^{m−l−k})` over `lambdas`.
fn sup_ratio(phi: &RadialProfile, psi: &RadialProfile, k: f64, l: u32, m: u32, lambdas: &[f64]) -> Result<f64> {
    let mut sup = 0.0f64;
    for &x in lambdas {
        let v = data_sum(phi, psi, l, x)? / envelope_unit(x, k, l, m);
        if !v.is_finite() {
            return Err(Error::Profile(format!("data sum not finite at λ = {x}")));
        }
        sup = sup.max(v);
    }
    Ok(sup)
}

fn sample_points(phi: &RadialProfile, shift: f64) -> Vec<f64> {
    match phi.support() {
        Some((lo, hi)) => (0..GRID)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5 + 0.5 * shift) / (GRID as f64 + 1.0))
            .collect(),
        None => {
            let (lo, hi) = if shift == 0.0 { (1e-6, 1e6) } else { (1e-7, 1e7) };
            log_grid(lo, hi, GRID, shift)
        }
    }
}

/// Builds `(φ, ψ)` of the given kind satisfying the envelope with
/// constants `c_φ = c_ψ = ε / sup(data sum / envelope)`.
pub fn make_profile(
    kind: ProfileKind,
    eps: f64,
    k: Rational64,
    l: u32,
    dims: DimParams,
) -> Result<(RadialProfile, RadialProfile)> {
    let m = dims.m();
    if l < 1 || l > m {
        return Err(Error::InvalidParameter(format!("need 1 ≤ l ≤ m = {m}, got l = {l}")));
    }
    let kf = k.to_f64().unwrap_or(f64::NAN);
    if !(kf >= 0.0) || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("need k ≥ 0 and ε > 0, got k = {kf}, ε = {eps}")));
    }
    let (phi0, psi0) = match kind {
        ProfileKind::PowerEnvelope => {
            let tail = m as f64 - l as f64 - kf;
            (
                RadialProfile::power(1.0, l as f64 - m as f64, tail),
                RadialProfile::power(1.0, l as f64 - m as f64 - 1.0, tail),
            )
        }
        ProfileKind::CompactBump => (
            RadialProfile::bump(1.0, 2.0, 1.0)?,
            RadialProfile::bump(1.0, 2.0, 1.0)?,
        ),
    };
    let sup = sup_ratio(&phi0, &psi0, kf, l, m, &sample_points(&phi0, 0.0))?;
    if !(sup > 0.0) {
        return Err(Error::Profile("unnormalised data vanish identically".into()));
    }
    let c = MARGIN * eps / sup;
    let envelope = Envelope { eps, k: kf, l };
    let phi = phi0.scaled(c).with_envelope(envelope);
    let psi = psi0.scaled(c).with_envelope(envelope);
    let worst = validate_envelope(&phi, &psi, m)?;
    if worst > 1.0 {
        return Err(Error::Profile(format!(
            "envelope violated after normalisation (ratio {worst})"
        )));
    }
    Ok((phi, psi))
}

/// Largest ratio of the data sum to `ε λ^{l−m}⟨λ⟩^{m−l−k}` on 10⁴ points
/// placed off the normalisation grid; at most 1 when the envelope holds.
pub fn validate_envelope(phi: &RadialProfile, psi: &RadialProfile, m: u32) -> Result<f64> {
    let env = phi
        .envelope()
        .or(psi.envelope())
        .ok_or_else(|| Error::Profile("profiles carry no envelope".into()))?;
    let pts = sample_points(phi, 1.0);
    Ok(sup_ratio(phi, psi, env.k, env.l, m, &pts)? / env.eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::dim_params;

    #[test]
    fn power_pair_meets_envelope() {
        for (n, l, k) in [(5, 1, (1, 1)), (7, 1, (5, 2)), (6, 2, (3, 1)), (4, 1, (3, 2))] {
            let d = dim_params(n).unwrap();
            let k = Rational64::new(k.0, k.1);
            let (phi, psi) = make_profile(ProfileKind::PowerEnvelope, 0.5, k, l, d).unwrap();
            let worst = validate_envelope(&phi, &psi, d.m()).unwrap();
            assert!(worst <= 1.0 && worst > 0.9, "n={n}: {worst}");
        }
    }

    #[test]
    fn normalisation_constant_n5() {
        // Independent recomputation of the constant from closed-form derivatives.
        let d = dim_params(5).unwrap();
        let (phi, _) = make_profile(ProfileKind::PowerEnvelope, 1.0, Rational64::from_integer(1), 1, d).unwrap();
        // l = m = 1, k = 1: φ0 = 1/(1+λ), ψ0 = 1/(λ(1+λ)), envelope 1/(1+λ).
        let ratio = |x: f64| {
            let p = 1.0 / (1.0 + x);
            let dp = -1.0 / (1.0 + x).powi(2);
            let d2p = 2.0 / (1.0 + x).powi(3);
            let q = 1.0 / (x * (1.0 + x));
            let dq = -(1.0 + 2.0 * x) / (x * (1.0 + x)).powi(2);
            (p + x * dp.abs() + x * x * d2p.abs() + x * q + x * x * dq.abs()) * (1.0 + x)
        };
        let sup = (0..200_000)
            .map(|i| ratio((-14.0 + 28.0 * i as f64 / 199_999.0f64).exp()))
            .fold(0.0, f64::max);
        let want = 0.98 / sup;
        let got = phi.value(1.0).unwrap() * 2.0;
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn bump_pair() {
        let d = dim_params(6).unwrap();
        let (phi, psi) = make_profile(ProfileKind::CompactBump, 1e-2, Rational64::from_integer(20), 2, d).unwrap();
        assert_eq!(phi.support(), Some((1.0, 2.0)));
        assert!(validate_envelope(&phi, &psi, d.m()).unwrap() <= 1.0);
    }

    #[test]
    fn singularity_condition_holds() {
        for n in [4, 6, 8] {
            let d = dim_params(n).unwrap();
            for l in 1..=d.m() {
                let (phi, psi) = make_profile(ProfileKind::PowerEnvelope, 1.0, Rational64::from_integer(1), l, d).unwrap();
                psi.check_singularity(l as usize - 1, d.m(), 0.5).unwrap();
                phi.check_singularity(l as usize, d.m(), 0.5).unwrap();
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = dim_params(5).unwrap();
        assert!(make_profile(ProfileKind::PowerEnvelope, 1.0, Rational64::from_integer(1), 2, d).is_err());
        assert!(make_profile(ProfileKind::PowerEnvelope, 0.0, Rational64::from_integer(1), 1, d).is_err());
        assert!(make_profile(ProfileKind::PowerEnvelope, 1.0, Rational64::from_integer(-1), 1, d).is_err());
    }
}
