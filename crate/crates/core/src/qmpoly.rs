//! Polynomials in the propagator F with Laurent-polynomial coefficients in X.

use crate::ratseries::{int, rat_to_string, Rational, Result as SResult, Series};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// Sum of c * F^m * X^n over stored (m, n); zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuasiModularPoly {
    terms: BTreeMap<(u32, i32), Rational>,
}

impl QuasiModularPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, i32), Rational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for ((m, n), c) in it {
            p.add_term(m, n, c);
        }
        p
    }

    pub fn monomial(m: u32, n: i32, c: Rational) -> Self {
        Self::from_terms([((m, n), c)])
    }

    pub fn add_term(&mut self, m: u32, n: i32, c: Rational) {
        let e = self.terms.entry((m, n)).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(m, n));
        }
    }

    pub fn coeff(&self, m: u32, n: i32) -> Rational {
        self.terms.get(&(m, n)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, i32), &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut r = self.clone();
        for (&(m, n), c) in &other.terms {
            r.add_term(m, n, c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(&mn, c)| (mn, c * k)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut r = Self::zero();
        for (&(m1, n1), c1) in &self.terms {
            for (&(m2, n2), c2) in &other.terms {
                r.add_term(m1 + m2, n1 + n2, c1 * c2);
            }
        }
        r
    }

    /// Partial derivative in F.
    pub fn d_f(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((m, _), _)| *m > 0)
                .map(|(&(m, n), c)| ((m - 1, n), c * int(m as i64))),
        )
    }

    /// Partial derivative in X.
    pub fn d_x(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|((_, n), _)| *n != 0)
                .map(|(&(m, n), c)| ((m, n - 1), c * int(n as i64))),
        )
    }

    /// Antiderivative in F with no F^0 part.
    pub fn integrate_f(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(&(m, n), c)| ((m + 1, n), c / int(m as i64 + 1))))
    }

    /// Value at F = 0 as a Laurent polynomial in X.
    pub fn f_constant_part(&self) -> Self {
        Self::from_terms(self.terms.iter().filter(|((m, _), _)| *m == 0).map(|(&k, c)| (k, c.clone())))
    }

    /// Value at X = 1, F = 0.
    pub fn value_at_conifold_free_point(&self) -> Rational {
        self.terms.iter().filter(|((m, _), _)| *m == 0).map(|(_, c)| c.clone()).sum()
    }

    /// max(m + n) over stored terms; the pole depth after X -> 1/w, F ~ 1/w.
    pub fn max_total_degree(&self) -> Option<i32> {
        self.terms.keys().map(|&(m, n)| m as i32 + n).max()
    }

    /// Substitute series for X and F (same variable); negative X powers use 1/X.
    pub fn eval(&self, x: &Series, f: &Series) -> SResult<Series> {
        let mut acc: Option<Series> = None;
        let xinv = if self.terms.keys().any(|&(_, n)| n < 0) { Some(x.inv()?) } else { None };
        for (&(m, n), c) in &self.terms {
            let base = if n >= 0 { x } else { xinv.as_ref().unwrap() };
            let mut s: Option<Series> = None;
            for _ in 0..n.unsigned_abs() {
                s = Some(match s {
                    None => base.clone(),
                    Some(s) => s.mul(base)?,
                });
            }
            if m > 0 {
                let fm = f.pow(m)?;
                s = Some(match s {
                    None => fm,
                    Some(s) => s.mul(&fm)?,
                });
            }
            // the bare constant is exact; give it the common order
            let s = s.unwrap_or_else(|| Series::one(x.variable(), x.order().min(f.order()))).scale(c);
            acc = Some(match acc {
                None => s,
                Some(a) => a.add(&s)?,
            });
        }
        Ok(acc.unwrap_or_else(|| Series::zero(x.variable(), x.order().min(f.order()))))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms
                .iter()
                .map(|(&(m, n), c)| serde_json::json!({"m": m, "n": n, "c": rat_to_string(c)}))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratseries::rat;

    #[test]
    fn product_and_derivatives() {
        let a = QuasiModularPoly::from_terms([((1, 0), rat(1, 2)), ((0, -1), int(3))]);
        let sq = a.mul(&a);
        assert_eq!(sq.coeff(2, 0), rat(1, 4));
        assert_eq!(sq.coeff(1, -1), int(3));
        assert_eq!(sq.coeff(0, -2), int(9));
        assert_eq!(sq.d_f().coeff(1, 0), rat(1, 2));
        assert_eq!(sq.d_x().coeff(0, -3), int(-18));
        assert_eq!(sq.integrate_f().d_f(), sq);
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = QuasiModularPoly::monomial(1, 1, int(2));
        assert!(a.sub(&a).is_zero());
    }
}
