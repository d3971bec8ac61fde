//! Majorants of the decay estimates, with exact case selection.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{bracket, DimParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    A,
    B,
    C,
    D,
    E,
    ImpI,
    ImpII,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::A => "a",
            Case::B => "b",
            Case::C => "c",
            Case::D => "d",
            Case::E => "e",
            Case::ImpI => "imp_i",
            Case::ImpII => "imp_ii",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    None,
    /// `1 + ln(⟨t+r⟩/⟨t−r⟩)`.
    RatioLog,
    /// `1 + ln⟨t−r⟩`.
    MinusLog,
}

/// `ε r^{e_r} ⟨t−r⟩^{e_minus} ⟨t+r⟩^{e_plus}` times a log factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub case: Case,
    #[serde(serialize_with = "ser_rational")]
    pub e_r: Rational64,
    #[serde(serialize_with = "ser_rational")]
    pub e_minus: Rational64,
    #[serde(serialize_with = "ser_rational")]
    pub e_plus: Rational64,
    pub log_kind: LogKind,
    pub k0: Option<u32>,
}

fn ser_rational<S: serde::Serializer>(v: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(*v))
}

pub fn format_rational(v: Rational64) -> String {
    if *v.denom() == 1 {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Parses `"3"`, `"3/2"` or a plain decimal such as `"0.75"` exactly.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 15 {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let numer: i64 = digits.parse().map_err(|_| bad())?;
    let denom = 10i64.pow(frac.len() as u32);
    let v = Rational64::new(numer, denom);
    Ok(if neg { -v } else { v })
}

fn ri(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

fn check_common(k: Rational64, l: u32, beta: u32, dims: DimParams) -> Result<()> {
    if k < Rational64::zero() {
        return Err(Error::InvalidParameter(format!("decay rate k must be ≥ 0, got {}", format_rational(k))));
    }
    if l < 1 || l > dims.m() {
        return Err(Error::InvalidParameter(format!(
            "smoothness l must satisfy 1 ≤ l ≤ m = {}, got {l}",
            dims.m()
        )));
    }
    if beta > l {
        return Err(Error::InvalidParameter(format!("|β| = {beta} exceeds l = {l}")));
    }
    Ok(())
}

impl DecayBound {
    /// The majorant of `case` with the given parameters, without checking
    /// that `k` lies in that case's range.
    pub fn for_case(case: Case, dims: DimParams, k: Rational64, l: u32, beta: u32, k0: Option<u32>) -> Result<Self> {
        check_common(k, l, beta, dims)?;
        let (m, a) = (ri(dims.m() as i64), dims.a());
        let (l, b) = (ri(l as i64), ri(beta as i64));
        let e_r = l - b - m;
        let (e_minus, e_plus, log_kind) = match case {
            Case::A => (-b, b - l + m - k, LogKind::None),
            Case::B => (-b, b - l - a, LogKind::RatioLog),
            Case::C => (m + a - k - b, b - l - a, LogKind::None),
            Case::D => (-m - a - b, b - l - a, LogKind::MinusLog),
            Case::E => (-m - a - b, b - l - a, LogKind::None),
            Case::ImpI => (Rational64::zero(), m - l - k, LogKind::None),
            Case::ImpII => {
                let k0 = k0.ok_or_else(|| Error::InvalidParameter("imp_ii needs k0".into()))?;
                let lo = (l - b - ri(k0 as i64)).min(Rational64::zero());
                (lo, m - l - k - lo, LogKind::None)
            }
        };
        Ok(Self {
            case,
            e_r,
            e_minus,
            e_plus,
            log_kind,
            k0: if case == Case::ImpII { k0 } else { None },
        })
    }

    /// The case of the main estimate selected by `k` against `m + a`.
    pub fn theorem(dims: DimParams, k: Rational64, l: u32, beta: u32) -> Result<Self> {
        check_common(k, l, beta, dims)?;
        let w = dims.weight();
        let two_w = w * ri(2);
        let case = if k < w {
            Case::A
        } else if k == w {
            Case::B
        } else if k < two_w {
            Case::C
        } else if k == two_w {
            Case::D
        } else {
            Case::E
        };
        Self::for_case(case, dims, k, l, beta, None)
    }

    /// The sharpened bound for `k < m + a`, when one applies.
    pub fn improved(dims: DimParams, k: Rational64, l: u32, beta: u32) -> Result<Option<Self>> {
        check_common(k, l, beta, dims)?;
        let w = dims.weight();
        let lr = ri(l as i64);
        if k < w - lr {
            return Self::for_case(Case::ImpI, dims, k, l, beta, None).map(Some);
        }
        let shifted = k - w + lr;
        for k0 in 1..=l {
            let k0r = ri(k0 as i64);
            if k0r - ri(1) <= shifted && shifted < k0r {
                return Self::for_case(Case::ImpII, dims, k, l, beta, Some(k0)).map(Some);
            }
        }
        Ok(None)
    }

    pub fn exponents_f64(&self) -> (f64, f64, f64) {
        let f = |v: Rational64| v.to_f64().unwrap_or(f64::NAN);
        (f(self.e_r), f(self.e_minus), f(self.e_plus))
    }

    pub fn log_factor(&self, r: f64, t: f64) -> f64 {
        match self.log_kind {
            LogKind::None => 1.0,
            LogKind::RatioLog => 1.0 + (bracket(t + r) / bracket(t - r)).ln(),
            LogKind::MinusLog => 1.0 + bracket(t - r).ln(),
        }
    }
}

pub fn bound_expr(bd: &DecayBound, eps: f64, r: f64, t: f64) -> f64 {
    let (er, em, ep) = bd.exponents_f64();
    eps * r.powf(er) * bracket(t - r).powf(em) * bracket(t + r).powf(ep) * bd.log_factor(r, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::dim_params;

    fn q(p: i64, d: i64) -> Rational64 {
        Rational64::new(p, d)
    }

    fn exps(b: &DecayBound) -> (Rational64, Rational64, Rational64) {
        (b.e_r, b.e_minus, b.e_plus)
    }

    #[test]
    fn listed_cases() {
        let d5 = dim_params(5).unwrap();
        let b = DecayBound::theorem(d5, q(1, 1), 1, 0).unwrap();
        assert_eq!(b.case, Case::A);
        assert_eq!(exps(&b), (q(0, 1), q(0, 1), q(-1, 1)));

        let d4 = dim_params(4).unwrap();
        let b = DecayBound::theorem(d4, q(3, 2), 1, 0).unwrap();
        assert_eq!(b.case, Case::B);
        assert_eq!(b.log_kind, LogKind::RatioLog);
        assert_eq!(exps(&b), (q(0, 1), q(0, 1), q(-3, 2)));

        let b = DecayBound::theorem(d5, q(10, 1), 1, 1).unwrap();
        assert_eq!(b.case, Case::E);
        assert_eq!(exps(&b), (q(-1, 1), q(-3, 1), q(-1, 1)));
    }

    #[test]
    fn boundaries_are_exact() {
        for n in 4..=12 {
            let d = dim_params(n).unwrap();
            let w = d.weight();
            assert_eq!(DecayBound::theorem(d, w, 1, 0).unwrap().case, Case::B);
            assert_eq!(DecayBound::theorem(d, w * 2, 1, 0).unwrap().case, Case::D);
            let eps = q(1, 1_000_000);
            assert_eq!(DecayBound::theorem(d, w - eps, 1, 0).unwrap().case, Case::A);
            assert_eq!(DecayBound::theorem(d, w + eps, 1, 0).unwrap().case, Case::C);
            assert_eq!(DecayBound::theorem(d, w * 2 - eps, 1, 0).unwrap().case, Case::C);
            assert_eq!(DecayBound::theorem(d, w * 2 + eps, 1, 0).unwrap().case, Case::E);
        }
    }

    #[test]
    fn improved_selection() {
        let d7 = dim_params(7).unwrap(); // m + a = 3
        let b = DecayBound::improved(d7, q(1, 2), 2, 0).unwrap().unwrap();
        assert_eq!(b.case, Case::ImpI);
        assert_eq!(exps(&b), (q(0, 1), q(0, 1), q(-1, 2)));
        // k − m − a + l = 3/2 − 3 + 2 = 1/2 ⇒ k0 = 1.
        let b = DecayBound::improved(d7, q(3, 2), 2, 0).unwrap().unwrap();
        assert_eq!((b.case, b.k0), (Case::ImpII, Some(1)));
        assert_eq!(exps(&b), (q(0, 1), q(0, 1), q(-3, 2)));
        let b = DecayBound::improved(d7, q(5, 2), 2, 1).unwrap().unwrap();
        assert_eq!(b.k0, Some(2));
        assert_eq!(exps(&b), (q(-1, 1), q(-1, 1), q(-3, 2)));
        assert!(DecayBound::improved(d7, q(3, 1), 2, 0).unwrap().is_none());
    }

    #[test]
    fn bound_values() {
        let d5 = dim_params(5).unwrap();
        let b = DecayBound::theorem(d5, q(1, 1), 1, 0).unwrap();
        assert!((bound_expr(&b, 2.0, 1.0, 3.0) - 2.0 / 5.0).abs() < 1e-15);
        let d = DecayBound::for_case(Case::D, d5, q(4, 1), 1, 0, None).unwrap();
        let want = 3.0f64.powf(-2.0) * 5.0f64.powf(-2.0) * (1.0 + 3.0f64.ln());
        assert!((bound_expr(&d, 1.0, 1.0, 3.0) - want).abs() < 1e-15);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_rational("0.75").unwrap(), q(3, 4));
        assert_eq!(parse_rational("10").unwrap(), q(10, 1));
        assert_eq!(parse_rational("-.5").unwrap(), q(-1, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn input_checks() {
        let d5 = dim_params(5).unwrap();
        assert!(DecayBound::theorem(d5, q(-1, 1), 1, 0).is_err());
        assert!(DecayBound::theorem(d5, q(1, 1), 2, 0).is_err());
        assert!(DecayBound::theorem(d5, q(1, 1), 1, 2).is_err());
    }
}
