//! Truncated Laurent series in one variable with exact rational coefficients.
//!
//! A series stores its lowest exponent (`offset`) and the coefficients from
//! there up to, but excluding, the truncation `order`. Every operation
//! propagates the weakest order it can vouch for, and asking for a
//! coefficient at or beyond that order is an error rather than a silent zero.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("variable mismatch: {0} vs {1}")]
    VariableMismatch(String, String),
    #[error("division by a series that vanishes to its truncation order")]
    DivisionByZeroSeries,
    #[error("composition needs an inner series without constant term")]
    CompositionDomain,
    #[error("series is not reversible (needs c1 != 0 and no constant term)")]
    NotReversible,
    #[error("exp/log domain: {0}")]
    ExpLogDomain(&'static str),
    #[error("theta-integration of a series with nonzero constant term")]
    ThetaIntegrationConstant,
    #[error("coefficient of exponent {requested} requested but series is known only below {order}")]
    InsufficientOrder { requested: i64, order: i64 },
    #[error("cannot parse series: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Build `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// "num/den" text form used in every exact output.
pub fn rat_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || SeriesError::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Exact rational to f64 (used only at the float boundary).
pub fn rat_to_f64(r: &Rational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    // scale to keep both parts inside f64 range
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 1000).max(0);
    let nf = bigint_to_f64(&(n >> shift as usize));
    let df = bigint_to_f64(&(d >> shift as usize));
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[derive(Clone, Debug)]
pub struct Series {
    variable: String,
    offset: i64,
    coeffs: Vec<Rational>,
}

impl Series {
    /// Series `sum coeffs[i] var^(offset+i)` known below `offset + coeffs.len()`.
    pub fn new(variable: &str, offset: i64, coeffs: Vec<Rational>) -> Self {
        Series { variable: variable.to_string(), offset, coeffs }
    }

    pub fn from_ints(variable: &str, offset: i64, coeffs: &[i64]) -> Self {
        Self::new(variable, offset, coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn zero(variable: &str, order: i64) -> Self {
        Self::new(variable, 0.min(order), vec![Rational::zero(); (order - 0.min(order)) as usize])
    }

    pub fn constant(variable: &str, c: Rational, order: i64) -> Self {
        let mut s = Self::zero(variable, order);
        if order > 0 {
            s.coeffs[(-s.offset) as usize] = c;
        }
        s
    }

    pub fn one(variable: &str, order: i64) -> Self {
        Self::constant(variable, Rational::one(), order)
    }

    /// c * var^exp, known below `order` (which must exceed `exp`).
    pub fn monomial(variable: &str, exp: i64, c: Rational, order: i64) -> Self {
        assert!(order > exp, "monomial beyond its own order");
        let mut coeffs = vec![Rational::zero(); (order - exp) as usize];
        coeffs[0] = c;
        Self::new(variable, exp, coeffs)
    }

    /// The variable itself.
    pub fn var(variable: &str, order: i64) -> Self {
        Self::monomial(variable, 1, Rational::one(), order)
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn order(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficients of exponents lo..hi.
    pub fn coeff_range(&self, lo: i64, hi: i64) -> Result<Vec<Rational>> {
        (lo..hi).map(|n| self.coeff(n)).collect()
    }

    /// Relabel the variable (no arithmetic change).
    pub fn with_variable(mut self, variable: &str) -> Self {
        self.variable = variable.to_string();
        self
    }

    /// Coefficient of var^n; zero below the offset, error at or beyond the order.
    pub fn coeff(&self, n: i64) -> Result<Rational> {
        if n >= self.order() {
            return Err(SeriesError::InsufficientOrder { requested: n, order: self.order() });
        }
        if n < self.offset {
            return Ok(Rational::zero());
        }
        Ok(self.coeffs[(n - self.offset) as usize].clone())
    }

    fn c(&self, n: i64) -> Rational {
        if n < self.offset || n >= self.order() {
            Rational::zero()
        } else {
            self.coeffs[(n - self.offset) as usize].clone()
        }
    }

    fn cref(&self, n: i64) -> Option<&Rational> {
        if n < self.offset || n >= self.order() {
            None
        } else {
            Some(&self.coeffs[(n - self.offset) as usize])
        }
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero()).map(|i| self.offset + i as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    /// Drop leading zeros by raising the offset (the explicit normalize step).
    pub fn normalize(&self) -> Self {
        match self.valuation() {
            Some(v) => Self::new(&self.variable, v, self.coeffs[(v - self.offset) as usize..].to_vec()),
            None => Self::new(&self.variable, self.order(), vec![]),
        }
    }

    /// Forget everything at or beyond `order` (no-op if already lower).
    pub fn truncate(&self, order: i64) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        if order <= self.offset {
            return Self::new(&self.variable, order, vec![]);
        }
        Self::new(&self.variable, self.offset, self.coeffs[..(order - self.offset) as usize].to_vec())
    }

    fn check_var(&self, other: &Series) -> Result<()> {
        if self.variable != other.variable {
            return Err(SeriesError::VariableMismatch(self.variable.clone(), other.variable.clone()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_var(other)?;
        let lo = self.offset.min(other.offset);
        let hi = self.order().min(other.order());
        let coeffs = (lo..hi.max(lo)).map(|n| self.c(n) + other.c(n)).collect();
        Ok(Self::new(&self.variable, lo, coeffs))
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Series {
        Self::new(&self.variable, self.offset, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, k: &Rational) -> Series {
        Self::new(&self.variable, self.offset, self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Multiply by var^k.
    pub fn shift(&self, k: i64) -> Series {
        Self::new(&self.variable, self.offset + k, self.coeffs.clone())
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_var(other)?;
        let va = self.valuation().unwrap_or(self.order());
        let vb = other.valuation().unwrap_or(other.order());
        let order = (self.order() + vb).min(other.order() + va);
        let lo = va + vb;
        if order <= lo {
            return Ok(Self::new(&self.variable, order, vec![]));
        }
        let n = (order - lo) as usize;
        let mut out = vec![Rational::zero(); n];
        for i in 0..n as i64 {
            let Some(a) = self.cref(va + i) else { continue };
            if a.is_zero() {
                continue;
            }
            for j in 0..(n as i64 - i) {
                if let Some(b) = other.cref(vb + j) {
                    if !b.is_zero() {
                        out[(i + j) as usize] += a * b;
                    }
                }
            }
        }
        Ok(Self::new(&self.variable, lo, out))
    }

    /// Multiplicative inverse; relative precision is preserved.
    pub fn inv(&self) -> Result<Series> {
        let v = self.valuation().ok_or(SeriesError::DivisionByZeroSeries)?;
        let rel = (self.order() - v) as usize;
        let a: Vec<&Rational> = (0..rel as i64).map(|i| &self.coeffs[(v + i - self.offset) as usize]).collect();
        let a0inv = a[0].recip();
        let mut r: Vec<Rational> = Vec::with_capacity(rel);
        r.push(a0inv.clone());
        for k in 1..rel {
            let mut s = Rational::zero();
            for j in 1..=k {
                if !a[j].is_zero() {
                    s += a[j] * &r[k - j];
                }
            }
            r.push(-s * &a0inv);
        }
        Ok(Self::new(&self.variable, -v, r))
    }

    pub fn div(&self, other: &Series) -> Result<Series> {
        self.check_var(other)?;
        self.mul(&other.inv()?)
    }

    /// k-th power; k = 0 gives 1 known to the same relative precision.
    pub fn pow(&self, k: u32) -> Result<Series> {
        if k == 0 {
            let rel = self.order() - self.valuation().unwrap_or(self.order());
            return Ok(Series::one(&self.variable, rel.max(1)));
        }
        self.pow_pos(k)
    }

    /// d/dvar.
    pub fn derivative(&self) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * int(self.offset + i as i64))
            .collect::<Vec<_>>();
        let s = Self::new(&self.variable, self.offset - 1, coeffs);
        // the var^0 term drops out; its slot at exponent -1 is exactly zero
        s
    }

    /// theta = var * d/dvar.
    pub fn theta(&self) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * int(self.offset + i as i64))
            .collect();
        Self::new(&self.variable, self.offset, coeffs)
    }

    /// Inverse of theta, fixing the constant of integration to zero.
    pub fn integrate_theta(&self) -> Result<Series> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = self.offset + i as i64;
            if n == 0 {
                if !c.is_zero() {
                    return Err(SeriesError::ThetaIntegrationConstant);
                }
                coeffs.push(Rational::zero());
            } else {
                coeffs.push(c / int(n));
            }
        }
        Ok(Self::new(&self.variable, self.offset, coeffs))
    }

    /// exp of a series without constant term or negative powers.
    pub fn exp(&self) -> Result<Series> {
        if let Some(v) = self.valuation() {
            if v < 1 {
                return Err(SeriesError::ExpLogDomain("exp needs a series vanishing at 0"));
            }
        }
        let n = self.order().max(1) as usize;
        let ts: Vec<Rational> = (0..n as i64).map(|k| self.c(k) * int(k)).collect();
        let mut r = vec![Rational::one()];
        for k in 1..n {
            let mut s = Rational::zero();
            for j in 1..=k {
                if !ts[j].is_zero() {
                    s += &ts[j] * &r[k - j];
                }
            }
            r.push(s / int(k as i64));
        }
        Ok(Self::new(&self.variable, 0, r))
    }

    /// log of a series with constant term 1.
    pub fn log(&self) -> Result<Series> {
        match self.valuation() {
            Some(0) if self.c(0).is_one() => {}
            _ => return Err(SeriesError::ExpLogDomain("log needs constant term 1")),
        }
        let n = self.order() as usize;
        let mut l = vec![Rational::zero(); n];
        for k in 1..n {
            let mut s = self.c(k as i64) * int(k as i64);
            for j in 1..k {
                if !l[j].is_zero() {
                    s -= &l[j] * int(j as i64) * self.c((k - j) as i64);
                }
            }
            l[k] = s / int(k as i64);
        }
        Ok(Self::new(&self.variable, 0, l))
    }

    /// outer(inner); the result lives in inner's variable.
    pub fn compose(&self, inner: &Series) -> Result<Series> {
        let v = match inner.valuation() {
            Some(v) if v >= 1 => v,
            Some(_) => return Err(SeriesError::CompositionDomain),
            None => inner.order().max(1),
        };
        let var = inner.variable.clone();
        // terms of outer at and beyond its order contribute O(inner^order)
        let cap = if self.order() >= 0 { self.order() * v } else { i64::MAX };
        let mut acc = Series::zero(&var, cap.min(inner.order() + 64 * v));
        let mut any = false;
        // nonnegative powers by repeated multiplication
        let mut pw: Option<Series> = None;
        for k in 0.max(self.offset)..self.order() {
            let p = match &pw {
                None if k == 0 => Series::one(&var, cap),
                None => inner.pow_pos(k as u32)?,
                Some(prev) => prev.mul(inner)?,
            };
            let ck = self.c(k);
            if !ck.is_zero() {
                acc = if any { acc.add(&p.scale(&ck))? } else { p.scale(&ck) };
                any = true;
            }
            pw = Some(p);
        }
        // negative powers through the inverse
        if self.offset < 0 {
            let iv = inner.inv()?;
            let mut p = iv.clone();
            for k in 1..=(-self.offset) {
                if k > 1 {
                    p = p.mul(&iv)?;
                }
                let ck = self.c(-k);
                if !ck.is_zero() {
                    acc = if any { acc.add(&p.scale(&ck))? } else { p.scale(&ck) };
                    any = true;
                }
            }
        }
        if !any {
            return Ok(Series::zero(&var, cap.min(inner.order() + (cap - 1).max(0))));
        }
        Ok(acc.truncate(cap))
    }

    fn pow_pos(&self, k: u32) -> Result<Series> {
        let mut p = self.clone();
        for _ in 1..k {
            p = p.mul(self)?;
        }
        Ok(p)
    }

    /// Compositional inverse by Lagrange inversion: [x^n]g = (1/n)[w^(n-1)](w/s(w))^n.
    /// The result is labelled with `new_variable`.
    pub fn revert(&self, new_variable: &str) -> Result<Series> {
        if self.valuation() != Some(1) {
            return Err(SeriesError::NotReversible);
        }
        let n = self.order();
        // phi = w / s(w)
        let s_over_w = self.shift(-1);
        let phi = s_over_w.inv()?;
        let mut g = vec![Rational::zero(); n.max(1) as usize];
        let mut p = Series::one(&self.variable, n - 1);
        for k in 1..n {
            p = p.mul(&phi)?;
            g[k as usize] = p.c(k - 1) / int(k);
        }
        Ok(Series::new(new_variable, 0, g))
    }

    /// Evaluate the truncated sum at a float point (float boundary only).
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| rat_to_f64(c) * x.powi((self.offset + i as i64) as i32))
            .sum()
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            variable: self.variable.clone(),
            offset: self.offset,
            order: self.order(),
            coeffs: self.coeffs.iter().map(rat_to_string).collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Series> {
        if j.order - j.offset != j.coeffs.len() as i64 {
            return Err(SeriesError::Parse("length(coeffs) must equal order - offset".into()));
        }
        let coeffs = j.coeffs.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Ok(Series::new(&j.variable, j.offset, coeffs))
    }
}

/// Equal when variable, order and every known coefficient agree, regardless
/// of how many leading zeros are stored.
impl PartialEq for Series {
    fn eq(&self, other: &Self) -> bool {
        self.variable == other.variable
            && self.order() == other.order()
            && (self.offset.min(other.offset)..self.order()).all(|n| self.c(n) == other.c(n))
    }
}

impl Eq for Series {}

/// Wire format of a series.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SeriesJson {
    pub variable: String,
    pub offset: i64,
    pub order: i64,
    pub coeffs: Vec<String>,
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let n = self.offset + i as i64;
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*{}", self.variable)?,
                _ => write!(f, "{c}*{}^{n}", self.variable)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({}^{})", self.variable, self.order())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[i64]) -> Series {
        Series::from_ints("x", 0, v)
    }

    #[test]
    fn difference_of_squares() {
        let a = s(&[1, 1, 0, 0, 0]);
        let b = s(&[1, -1, 0, 0, 0]);
        assert_eq!(a.mul(&b).unwrap(), s(&[1, 0, -1, 0, 0]));
    }

    #[test]
    fn geometric_series() {
        let a = s(&[1, -1, 0, 0, 0, 0]);
        assert_eq!(Series::one("x", 6).div(&a).unwrap(), s(&[1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn division_by_y_shifts_offset() {
        let q = Series::from_ints("y", 1, &[1, -6, 63]);
        let y = Series::var("y", 4);
        let r = q.div(&y).unwrap();
        assert_eq!(r.offset(), 0);
        assert_eq!(r.coeffs(), &[int(1), int(-6), int(63)]);
    }

    #[test]
    fn compose_square() {
        let outer = Series::monomial("x", 2, int(1), 8);
        let inner = s(&[0, 1, 1, 0, 0, 0, 0, 0]);
        let r = outer.compose(&inner).unwrap();
        assert_eq!(r.truncate(5), s(&[0, 0, 1, 2, 1]));
    }

    #[test]
    fn revert_catalan() {
        let a = s(&[0, 1, -1, 0, 0, 0]);
        let g = a.revert("x").unwrap();
        assert_eq!(g, s(&[0, 1, 1, 2, 5, 14]));
    }

    #[test]
    fn mercator() {
        let l = s(&[1, 1, 0, 0, 0]).log().unwrap();
        assert_eq!(l.coeffs(), &[int(0), int(1), rat(-1, 2), rat(1, 3), rat(-1, 4)]);
    }

    #[test]
    fn exp_log_roundtrip() {
        let a = s(&[1, -6, 90, 0, 0]);
        assert_eq!(a.log().unwrap().exp().unwrap(), a);
    }

    #[test]
    fn order_is_enforced() {
        let a = s(&[1, 2, 3]);
        assert!(matches!(a.coeff(3), Err(SeriesError::InsufficientOrder { .. })));
        assert_eq!(a.coeff(-2).unwrap(), int(0));
    }

    #[test]
    fn laurent_inverse() {
        // 1/(w + w^2) = 1/w - 1 + w - ...
        let a = Series::from_ints("w", 1, &[1, 1, 0, 0]);
        let r = a.inv().unwrap();
        assert_eq!(r.offset(), -1);
        assert_eq!(r.coeffs(), &[int(1), int(-1), int(1), int(-1)]);
    }

    #[test]
    fn theta_integration_guard() {
        assert_eq!(s(&[1, 1]).integrate_theta(), Err(SeriesError::ThetaIntegrationConstant));
        let t = s(&[0, 2, 6]).integrate_theta().unwrap();
        assert_eq!(t, s(&[0, 2, 3]));
    }

    #[test]
    fn json_roundtrip() {
        let a = Series::new("y", -1, vec![rat(-1, 3), rat(1, 9), int(0)]);
        let j = serde_json::to_string(&a.to_json()).unwrap();
        assert!(j.contains("\"-1/3\""));
        let back: SeriesJson = serde_json::from_str(&j).unwrap();
        assert_eq!(Series::from_json(&back).unwrap(), a);
    }

    #[test]
    fn variable_mismatch() {
        let a = Series::one("x", 3);
        let b = Series::one("y", 3);
        assert!(matches!(a.add(&b), Err(SeriesError::VariableMismatch(..))));
    }
}
