//! Legendre, Tchebyshev and truncated-Rodrigues polynomials.
//!
//! Each family is expanded once into exact rational monomial coefficients
//! by differentiating its Rodrigues form, then evaluated with Horner's
//! scheme in `f64`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    Legendre,
    Tchebyshev,
    Truncated,
}

#[derive(Debug, Clone)]
pub struct PolyCoeffs {
    kind: PolyKind,
    m: u32,
    j: u32,
    /// Monomial coefficients, lowest degree first.
    coeffs: Vec<BigRational>,
    float: Vec<f64>,
}

fn check_degree(m: u32) -> Result<()> {
    if m > MAX_DEGREE {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree {m} exceeds {MAX_DEGREE}"
        )));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn differentiate(p: &[BigRational]) -> Vec<BigRational> {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// `(1/(2^m m!)) d^{m-j}/dx^{m-j} (x^2-1)^m`.
fn rodrigues_truncated(j: u32, m: u32) -> Vec<BigRational> {
    let mut p = vec![BigRational::zero(); 2 * m as usize + 1];
    for k in 0..=m {
        let sign = if (m - k).is_multiple_of(2) { 1 } else { -1 };
        p[2 * k as usize] = BigRational::from_integer(binomial(m, k) * BigInt::from(sign));
    }
    for _ in 0..(m - j) {
        p = differentiate(&p);
    }
    let scale = BigRational::new(BigInt::one(), BigInt::from(2).pow(m) * factorial(m));
    trim(p.into_iter().map(|c| c * &scale).collect())
}

/// `((-1)^m/(2m-1)!!) sqrt(1-x^2) d^m/dx^m (1-x^2)^{m-1/2}`.
///
/// Carries `p(x) (1-x^2)^alpha` through each differentiation:
/// `d/dx [p (1-x^2)^alpha] = [p' (1-x^2) - 2 alpha x p] (1-x^2)^{alpha-1}`.
fn rodrigues_tchebyshev(m: u32) -> Vec<BigRational> {
    let mut p = vec![BigRational::one()];
    // alpha is stored doubled to stay integral: alpha = (2m - 1)/2.
    let mut alpha2 = 2 * m as i64 - 1;
    for _ in 0..m {
        let dp = differentiate(&p);
        let mut next = vec![BigRational::zero(); p.len() + 2];
        for (i, c) in dp.iter().enumerate() {
            next[i] += c;
            next[i + 2] -= c;
        }
        let alpha = BigRational::new(BigInt::from(alpha2), BigInt::from(2));
        for (i, c) in p.iter().enumerate() {
            next[i + 1] -= BigRational::from_integer(BigInt::from(2)) * &alpha * c;
        }
        p = trim(next);
        alpha2 -= 2;
    }
    let double_factorial = (1..=m).fold(BigInt::one(), |acc, i| acc * BigInt::from(2 * i - 1));
    let sign = if m.is_multiple_of(2) { 1 } else { -1 };
    let scale = BigRational::new(BigInt::from(sign), double_factorial);
    trim(p.into_iter().map(|c| c * &scale).collect())
}

impl PolyCoeffs {
    fn from_exact(kind: PolyKind, m: u32, j: u32, coeffs: Vec<BigRational>) -> Self {
        let float = coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        Self {
            kind,
            m,
            j,
            coeffs,
            float,
        }
    }

    pub fn legendre(m: u32) -> Result<Self> {
        check_degree(m)?;
        Ok(Self::from_exact(
            PolyKind::Legendre,
            m,
            0,
            rodrigues_truncated(0, m),
        ))
    }

    pub fn tchebyshev(m: u32) -> Result<Self> {
        check_degree(m)?;
        if m == 0 {
            return Err(Error::InvalidParameter(
                "Tchebyshev degree must be at least 1".into(),
            ));
        }
        Ok(Self::from_exact(
            PolyKind::Tchebyshev,
            m,
            0,
            rodrigues_tchebyshev(m),
        ))
    }

    pub fn truncated(j: u32, m: u32) -> Result<Self> {
        check_degree(m)?;
        if j > m {
            return Err(Error::InvalidParameter(format!(
                "truncation index {j} exceeds degree parameter {m}"
            )));
        }
        Ok(Self::from_exact(
            PolyKind::Truncated,
            m,
            j,
            rodrigues_truncated(j, m),
        ))
    }

    pub fn kind(&self) -> PolyKind {
        self.kind
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.float.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Taylor coefficients `p^{(s)}(x)/s!` for `s = 0..=order`, by repeated
    /// synthetic division.
    pub fn taylor(&self, x: f64, order: usize) -> Vec<f64> {
        let mut work = self.float.clone();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            if work.is_empty() {
                out.push(0.0);
                continue;
            }
            let n = work.len();
            let mut acc = work[n - 1];
            let mut quotient = vec![0.0; n - 1];
            for i in (0..n - 1).rev() {
                quotient[i] = acc;
                acc = acc * x + work[i];
            }
            out.push(acc);
            work = quotient;
        }
        out
    }

    /// Largest absolute coefficient, used for error scaling.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .sum()
    }
}

type CacheKey = (PolyKind, u32, u32);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<PolyCoeffs>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<PolyCoeffs>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared, lazily expanded coefficient table.
pub fn table(kind: PolyKind, j: u32, m: u32) -> Result<Arc<PolyCoeffs>> {
    let key = (kind, m, j);
    if let Some(p) = cache().lock().expect("polynomial cache poisoned").get(&key) {
        return Ok(p.clone());
    }
    let p = Arc::new(match kind {
        PolyKind::Legendre => PolyCoeffs::legendre(m)?,
        PolyKind::Tchebyshev => PolyCoeffs::tchebyshev(m)?,
        PolyKind::Truncated => PolyCoeffs::truncated(j, m)?,
    });
    cache()
        .lock()
        .expect("polynomial cache poisoned")
        .insert(key, p.clone());
    Ok(p)
}

pub fn legendre(m: u32, x: f64) -> Result<f64> {
    Ok(table(PolyKind::Legendre, 0, m)?.eval(x))
}

pub fn tchebyshev(m: u32, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "Tchebyshev argument {x} outside [-1, 1]"
        )));
    }
    Ok(table(PolyKind::Tchebyshev, 0, m)?.eval(x))
}

pub fn truncated_p(j: u32, m: u32, x: f64) -> Result<f64> {
    Ok(table(PolyKind::Truncated, j, m)?.eval(x))
}
