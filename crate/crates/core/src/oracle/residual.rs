//! Discrete wave operator `∂²_t u − ∂²_r u − ((n − 1)/r) ∂_r u`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub max: f64,
    pub rms: f64,
    pub points: usize,
}

/// Applies the five-point wave stencil of step `h` to `u` at each point.
pub fn residual<U>(mut u: U, n: u32, points: &[(f64, f64)], h: f64) -> Result<ResidualStats>
where
    U: FnMut(f64, f64) -> Result<f64>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("stencil step must be positive, got {h}")));
    }
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for &(r, t) in points {
        if r - h <= 0.0 {
            return Err(Error::Domain(format!("stencil at r = {r} with h = {h} leaves r > 0")));
        }
        let c = u(r, t)?;
        let utt = (u(r, t + h)? - 2.0 * c + u(r, t - h)?) / (h * h);
        let (up, um) = (u(r + h, t)?, u(r - h, t)?);
        let urr = (up - 2.0 * c + um) / (h * h);
        let ur = (up - um) / (2.0 * h);
        let res = utt - urr - (n - 1) as f64 / r * ur;
        max = max.max(res.abs());
        sq += res * res;
    }
    Ok(ResidualStats {
        max,
        rms: (sq / points.len().max(1) as f64).sqrt(),
        points: points.len(),
    })
}
