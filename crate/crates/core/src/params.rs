//! Dimension parameters, the bracket weight and numeric tolerances.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest dimension accepted; keeps polynomial degrees at or below 16.
pub const MAX_DIMENSION: u32 = 34;

/// Space dimension `n` with the split `(a, m)` of `(n-1)/2` into a
/// weight exponent and a kernel degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DimParams {
    n: u32,
    a: Rational64,
    m: u32,
}

impl DimParams {
    pub fn new(n: u32) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 4, got {n}"
            )));
        }
        if n > MAX_DIMENSION {
            return Err(Error::InvalidParameter(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIMENSION}"
            )));
        }
        let (a, m) = if n % 2 == 1 {
            (Rational64::from_integer(1), (n - 3) / 2)
        } else {
            (Rational64::new(1, 2), (n - 2) / 2)
        };
        Ok(Self { n, a, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn a(&self) -> Rational64 {
        self.a
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn is_odd(&self) -> bool {
        self.n % 2 == 1
    }

    /// `m + a = (n-1)/2`, exactly.
    pub fn weight(&self) -> Rational64 {
        self.a + Rational64::from_integer(self.m as i64)
    }

    pub fn a_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
    }

    pub fn weight_f64(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }
}

pub fn dim_params(n: u32) -> Result<DimParams> {
    DimParams::new(n)
}

/// `⟨x⟩ = 1 + |x|`.
#[inline]
pub fn bracket(x: f64) -> f64 {
    1.0 + x.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub quad_rel: f64,
    pub rep_eq_tol: f64,
    /// Number of Richardson extrapolation levels for difference quotients.
    pub fd_order: usize,
    pub exponent_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rel: 1e-10,
            rep_eq_tol: 1e-7,
            fd_order: 4,
            exponent_tol: 0.1,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.quad_rel, self.rep_eq_tol, self.exponent_tol]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive || self.fd_order == 0 {
            return Err(Error::InvalidParameter(
                "tolerances must be strictly positive".into(),
            ));
        }
        if self.rep_eq_tol < self.quad_rel {
            return Err(Error::InvalidParameter(format!(
                "rep_eq_tol {} is smaller than quad_rel {}",
                self.rep_eq_tol, self.quad_rel
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_follow_parity() {
        let d5 = dim_params(5).unwrap();
        assert_eq!((d5.a(), d5.m()), (Rational64::from_integer(1), 1));
        let d4 = dim_params(4).unwrap();
        assert_eq!((d4.a(), d4.m()), (Rational64::new(1, 2), 1));
        let d7 = dim_params(7).unwrap();
        assert_eq!((d7.a(), d7.m()), (Rational64::from_integer(1), 2));
    }

    #[test]
    fn weight_is_exact() {
        for n in 4..=16u32 {
            let d = dim_params(n).unwrap();
            assert_eq!(d.weight(), Rational64::new(n as i64 - 1, 2));
            assert!(d.m() >= 1);
        }
    }

    #[test]
    fn low_dimensions_rejected() {
        for n in 0..4 {
            assert!(dim_params(n).is_err());
        }
    }

    #[test]
    fn bracket_values() {
        assert_eq!(bracket(0.0), 1.0);
        assert_eq!(bracket(-3.0), 4.0);
        assert_eq!(bracket(2.5), 3.5);
    }

    #[test]
    fn tolerance_ordering() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            rep_eq_tol: 1e-12,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
        let zero = Tolerances {
            quad_rel: 0.0,
            ..Tolerances::default()
        };
        assert!(zero.validate().is_err());
    }
}
