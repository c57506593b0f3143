//! Direct integration of the holomorphic anomaly recursion inside
//! Q[X^{+-1}][F], with the holomorphic ambiguity fixed by the conifold gap.

use crate::mirror::{self, ConifoldFramePack, MirrorError, RingRules};
use crate::qmpoly::QuasiModularPoly;
use crate::ratseries::{int, rat, rat_to_string, Rational, Series, SeriesError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HaeError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Mirror(#[from] MirrorError),
    #[error("genus {0} needs theta GW of genus {1}, which is not available")]
    MissingLowerGenus(u32, u32),
    #[error("genus {g}: monomial F^{m} X^{n} outside the regularity span")]
    RegularityViolation { g: u32, m: u32, n: i32 },
    #[error("gap system at genus {0} is singular")]
    SingularGapSystem(u32),
    #[error("genus must be at least {0}")]
    GenusTooSmall(u32),
}

pub type Result<T> = std::result::Result<T, HaeError>;

/// Bernoulli numbers of t/(e^t - 1), so B_1 = -1/2.
pub fn bernoulli(n: u32) -> Rational {
    let mut b: Vec<Rational> = vec![Rational::one()];
    for m in 1..=n as usize {
        // sum_{k<=m} C(m+1,k) B_k = 0
        let mut s = Rational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            s += Rational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-s / int(m as i64 + 1));
    }
    b.pop().unwrap()
}

/// theta GW_1 = -F/2 - X/12.
pub fn genus1_datum() -> QuasiModularPoly {
    QuasiModularPoly::from_terms([((1, 0), rat(-1, 2)), ((0, 1), rat(-1, 12))])
}

/// 0 <= m <= 3g-3, 1-g <= n <= 2g-2, 3n + m >= 0.
pub fn in_regularity_span(g: u32, m: u32, n: i32) -> bool {
    let (g, m) = (g as i32, m as i32);
    m <= 3 * g - 3 && n >= 1 - g && n <= 2 * g - 2 && 3 * n + m >= 0
}

/// dGW_g/dF from the theta-derivatives of all lower genera.
pub fn hae_rhs(g: u32, theta_gw: &BTreeMap<u32, QuasiModularPoly>, rules: &RingRules) -> Result<QuasiModularPoly> {
    hae_rhs_ordered(g, theta_gw, rules, false)
}

/// As `hae_rhs`, optionally summing the genus splitting in the reverse order.
pub fn hae_rhs_ordered(
    g: u32,
    theta_gw: &BTreeMap<u32, QuasiModularPoly>,
    rules: &RingRules,
    reversed: bool,
) -> Result<QuasiModularPoly> {
    if g < 2 {
        return Err(HaeError::GenusTooSmall(2));
    }
    let get = |h: u32| theta_gw.get(&h).ok_or(HaeError::MissingLowerGenus(g, h));
    let mut s = QuasiModularPoly::zero();
    for gp in 1..g {
        let (a, b) = if reversed { (gp, g - gp) } else { (g - gp, gp) };
        s = s.add(&get(a)?.mul(get(b)?));
    }
    let prev = get(g - 1)?;
    s = s.add(&rules.theta(prev));
    s = s.sub(&rules.theta_log_c.mul(prev));
    Ok(s.mul(&QuasiModularPoly::monomial(0, -1, rat(3, 2))))
}

pub fn integrate_in_f(rhs: &QuasiModularPoly, g: u32) -> Result<QuasiModularPoly> {
    let p = rhs.integrate_f();
    check_regular(&p, g)?;
    Ok(p)
}

fn check_regular(p: &QuasiModularPoly, g: u32) -> Result<()> {
    for (&(m, n), _) in p.terms() {
        if !in_regularity_span(g, m, n) {
            return Err(HaeError::RegularityViolation { g, m, n });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapTarget {
    pub genus: u32,
    pub bernoulli: Rational,
    pub leading: Rational,
    /// Exponents 3-2g..-1 whose coefficients must vanish.
    pub polar_zeros: Vec<i64>,
}

impl GapTarget {
    pub fn new(g: u32) -> Self {
        let b = bernoulli(2 * g);
        let gg = g as i64;
        let leading = Rational::from_integer(BigInt::from(3).pow(g - 1)) * &b / int(2 * gg * (2 * gg - 2));
        GapTarget { genus: g, bernoulli: b, leading, polar_zeros: (3 - 2 * gg..0).collect() }
    }
}

/// B_{2g}/(2g(2g-2)) t^{2-2g}, returned as (coefficient, exponent).
pub fn gue_reference(g: u32) -> (Rational, i64) {
    let gg = g as i64;
    (bernoulli(2 * g) / int(2 * gg * (2 * gg - 2)), 2 - 2 * gg)
}

/// Substitution X -> 1/w, F -> F_CF(w) followed by w -> w(t_CF).
#[derive(Clone, Debug)]
pub struct ConifoldTransform {
    pub pack: ConifoldFramePack,
    f_pows: Vec<Series>,
    /// w^e as a Laurent series in t for e in e_min..order.
    w_pows: BTreeMap<i64, Series>,
    e_min: i64,
}

impl ConifoldTransform {
    /// `order` is the w-order of the frame; `max_pole` bounds max(m+n) of later inputs.
    pub fn new(order: i64, max_pole: i64) -> Result<Self> {
        let pack = mirror::frobenius_conifold(order)?;
        let wt = pack.w_of_tcf.clone();
        let winv = wt.inv()?;
        let mut w_pows = BTreeMap::new();
        let mut p = Series::one("t", order);
        w_pows.insert(0, p.clone());
        for e in 1..order {
            p = p.mul(&wt)?;
            w_pows.insert(e, p.clone());
        }
        let mut p = winv.clone();
        for e in 1..=max_pole {
            if e > 1 {
                p = p.mul(&winv)?;
            }
            w_pows.insert(-e, p.clone());
        }
        Ok(ConifoldTransform { pack, f_pows: vec![], w_pows, e_min: -max_pole })
    }

    fn f_pow(&mut self, m: u32) -> Result<Series> {
        if self.f_pows.is_empty() {
            self.f_pows.push(Series::one("w", self.pack.f_cf.order() + 1));
        }
        while self.f_pows.len() <= m as usize {
            let next = self.f_pows.last().unwrap().mul(&self.pack.f_cf)?;
            self.f_pows.push(next);
        }
        Ok(self.f_pows[m as usize].clone())
    }

    /// The polynomial (plus an optional ambiguity sum a_n X^n) as a Laurent series in w.
    pub fn in_w(&mut self, p: &QuasiModularPoly, amb: Option<&[Rational]>) -> Result<Series> {
        let mut acc: Option<Series> = None;
        let mut push = |s: Series| -> Result<()> {
            acc = Some(match acc.take() {
                None => s,
                Some(a) => a.add(&s)?,
            });
            Ok(())
        };
        for (&(m, n), c) in p.terms() {
            push(self.f_pow(m)?.shift(-(n as i64)).scale(c))?;
        }
        if let Some(a) = amb {
            let ord = self.pack.f_cf.order() + 1;
            let mut s = Series::zero("w", ord);
            for (n, an) in a.iter().enumerate() {
                if !an.is_zero() {
                    s = s.add(&Series::monomial("w", -(n as i64), an.clone(), ord))?;
                }
            }
            push(s)?;
        }
        Ok(acc.unwrap_or_else(|| Series::zero("w", self.pack.f_cf.order() + 1)))
    }

    /// Laurent expansion in t_CF of p(X = 1/w, F = F_CF) + sum a_n X^n.
    pub fn conifold_laurent(&mut self, p: &QuasiModularPoly, amb: Option<&[Rational]>) -> Result<Series> {
        let s = self.in_w(p, amb)?;
        self.substitute(&s)
    }

    /// Replace w by w(t) in a Laurent series in w.
    pub fn substitute(&self, s: &Series) -> Result<Series> {
        let lo = s.offset();
        if lo < self.e_min {
            return Err(SeriesError::InsufficientOrder { requested: lo, order: self.e_min }.into());
        }
        let mut acc = Series::zero("t", s.order());
        for e in lo..s.order() {
            let c = s.coeff(e)?;
            if c.is_zero() {
                continue;
            }
            let wp = self
                .w_pows
                .get(&e)
                .ok_or(SeriesError::InsufficientOrder { requested: e, order: self.pack.order })?;
            acc = acc.add(&wp.scale(&c))?;
        }
        Ok(acc.truncate(s.order()))
    }
}

/// Solve A a = b exactly by fraction-free (Bareiss) elimination on the
/// denominator-cleared system.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    // clear denominators row by row
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for (row, bi) in a.iter().zip(b) {
        let l = row.iter().chain(std::iter::once(bi)).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        m.push(row.iter().chain(std::iter::once(bi)).map(|x| x.numer() * (&l / x.denom())).collect());
    }
    let mut prev = BigInt::one();
    for k in 0..n {
        let piv = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, piv);
        for i in k + 1..n {
            for j in k + 1..=n {
                let v = (&m[k][k] * &m[i][j] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut s = Rational::from_integer(m[i][n].clone());
        for j in i + 1..n {
            s -= Rational::from_integer(m[i][j].clone()) * &x[j];
        }
        x[i] = s / Rational::from_integer(m[i][i].clone());
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityVector {
    pub genus: u32,
    pub a: Vec<Rational>,
}

/// One row of the invariant table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    pub g: u32,
    pub d: u32,
    pub n: Rational,
}

impl Invariant {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"g": self.g, "d": self.d, "N": rat_to_string(&self.n)})
    }
}

/// Genus-by-genus solver holding the fixed potentials.
pub struct HaeSolver {
    pub rules: RingRules,
    pub transform: ConifoldTransform,
    pub theta_gw: BTreeMap<u32, QuasiModularPoly>,
    pub gw: BTreeMap<u32, QuasiModularPoly>,
    pub ambiguities: BTreeMap<u32, AmbiguityVector>,
}

/// Default w-order for a solver reaching genus `g_max`.
pub fn default_w_order(g_max: u32) -> i64 {
    6 * g_max as i64 + 4
}

impl HaeSolver {
    pub fn new(g_max: u32) -> Result<Self> {
        Self::with_order(g_max, default_w_order(g_max))
    }

    pub fn with_order(g_max: u32, w_order: i64) -> Result<Self> {
        let rules = mirror::theta_ring_rules(12)?;
        let max_pole = 5 * g_max.max(2) as i64;
        let transform = ConifoldTransform::new(w_order, max_pole)?;
        let mut theta_gw = BTreeMap::new();
        theta_gw.insert(1, genus1_datum());
        Ok(HaeSolver { rules, transform, theta_gw, gw: BTreeMap::new(), ambiguities: BTreeMap::new() })
    }

    /// Fix genus g (lower genera are solved first if missing).
    pub fn fix_ambiguity(&mut self, g: u32) -> Result<(AmbiguityVector, QuasiModularPoly)> {
        if g < 2 {
            return Err(HaeError::GenusTooSmall(2));
        }
        for h in 2..g {
            if !self.gw.contains_key(&h) {
                self.fix_ambiguity(h)?;
            }
        }
        if let Some(p) = self.gw.get(&g) {
            return Ok((self.ambiguities[&g].clone(), p.clone()));
        }
        let rhs = hae_rhs(g, &self.theta_gw, &self.rules)?;
        let base = integrate_in_f(&rhs, g)?;
        let target = GapTarget::new(g);
        let gi = g as i64;
        let nvar = 2 * g as usize - 1;
        let base_l = self.transform.conifold_laurent(&base, None)?;
        let mut cols = Vec::with_capacity(nvar);
        for n in 0..nvar {
            let mut e = vec![Rational::zero(); nvar];
            e[n] = Rational::one();
            cols.push(self.transform.conifold_laurent(&QuasiModularPoly::zero(), Some(&e))?);
        }
        let mut rows = Vec::new();
        let mut rhsv = Vec::new();
        for e in 2 - 2 * gi..0 {
            rows.push(cols.iter().map(|c| c.coeff(e)).collect::<std::result::Result<Vec<_>, _>>()?);
            let want = if e == 2 - 2 * gi { target.leading.clone() } else { Rational::zero() };
            rhsv.push(want - base_l.coeff(e)?);
        }
        rows.push(vec![Rational::one(); nvar]);
        rhsv.push(-base.value_at_conifold_free_point());
        let a = solve_exact(&rows, &rhsv).ok_or(HaeError::SingularGapSystem(g))?;
        let mut full = base;
        for (n, an) in a.iter().enumerate() {
            full.add_term(0, n as i32, an.clone());
        }
        check_regular(&full, g)?;
        let amb = AmbiguityVector { genus: g, a };
        self.theta_gw.insert(g, self.rules.theta(&full));
        self.gw.insert(g, full.clone());
        self.ambiguities.insert(g, amb.clone());
        Ok((amb, full))
    }

    /// Laurent series of GW_g^CF in t_CF.
    pub fn gw_cf(&mut self, g: u32) -> Result<Series> {
        let (_, p) = self.fix_ambiguity(g)?;
        self.transform.conifold_laurent(&p, None)
    }
}

/// Outcome of the end-to-end gap check.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub genus: u32,
    pub leading: Rational,
    pub expected: Rational,
    /// Coefficients of t^{3-2g}..t^{-1}.
    pub polar: Vec<Rational>,
    pub in_span: bool,
    pub verified: bool,
}

impl GapReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "leading": rat_to_string(&self.leading),
            "expected": rat_to_string(&self.expected),
            "polar": self.polar.iter().map(rat_to_string).collect::<Vec<_>>(),
            "gap_verified": self.verified,
        })
    }
}

/// Fix genus 2..=g, then re-expand GW_g at doubled w-order and read off the
/// polar part independently of the imposed system.
pub fn verify_gap(g: u32) -> Result<GapReport> {
    if g < 2 {
        return Err(HaeError::GenusTooSmall(2));
    }
    verify_gap_with(&mut HaeSolver::new(g)?, g)
}

/// As verify_gap, reusing a solver (which may have been built for a higher genus).
pub fn verify_gap_with(solver: &mut HaeSolver, g: u32) -> Result<GapReport> {
    if g < 2 {
        return Err(HaeError::GenusTooSmall(2));
    }
    let (_, p) = solver.fix_ambiguity(g)?;
    let mut fresh = ConifoldTransform::new(2 * default_w_order(g), 5 * g as i64)?;
    let l = fresh.conifold_laurent(&p, None)?;
    let gi = g as i64;
    let expected = GapTarget::new(g).leading;
    let leading = l.coeff(2 - 2 * gi)?;
    let below_clean = (l.offset()..2 - 2 * gi).all(|e| l.coeff(e).map(|c| c.is_zero()).unwrap_or(false));
    let polar = l.coeff_range(3 - 2 * gi, 0)?;
    let in_span = p.terms().all(|(&(m, n), _)| in_regularity_span(g, m, n));
    let verified = below_clean && leading == expected && polar.iter().all(|c| c.is_zero()) && in_span;
    Ok(GapReport { genus: g, leading, expected, polar, in_span, verified })
}

/// y-series generators needed for invariants.
struct YData {
    x: Series,
    f: Series,
    c: Series,
    y_of_q: Series,
}

fn y_data(d_max: u32) -> Result<YData> {
    let order = 3 * d_max as i64 + 10;
    let lr = mirror::generators_lr(order)?;
    Ok(YData { x: lr.x, f: lr.f, c: lr.c, y_of_q: lr.y_of_q })
}

fn rows_from(g: u32, s_q: &Series, d_max: u32, divide: impl Fn(u32) -> Rational) -> Result<Vec<Invariant>> {
    (1..=d_max)
        .map(|d| Ok(Invariant { g, d, n: s_q.coeff(d as i64)? / divide(d) }))
        .collect()
}

/// Gromov-Witten invariants N_{g,d} for 1 <= d <= d_max; constant maps are dropped.
pub fn gw_invariants(g: u32, d_max: u32, solver: Option<&mut HaeSolver>) -> Result<Vec<Invariant>> {
    let yd = y_data(d_max)?;
    match g {
        0 => {
            // Yukawa coupling -1/3 + sum d^3 N_d Q^d, i.e. (Q d/dQ)^3 GW_0 = -X/(3C^3)
            let c3 = yd.c.pow(3)?;
            let s = yd.x.div(&c3)?.scale(&rat(-1, 3)).compose(&yd.y_of_q)?;
            rows_from(0, &s, d_max, |d| int((d as i64).pow(3)))
        }
        1 => {
            let th = genus1_datum().eval(&yd.x, &yd.f)?;
            let s = th.div(&yd.c)?.compose(&yd.y_of_q)?;
            rows_from(1, &s, d_max, |d| int(d as i64))
        }
        _ => {
            let mut own;
            let solver = match solver {
                Some(s) => s,
                None => {
                    own = HaeSolver::new(g)?;
                    &mut own
                }
            };
            let (_, p) = solver.fix_ambiguity(g)?;
            let s = p.eval(&yd.x, &yd.f)?.compose(&yd.y_of_q)?;
            rows_from(g, &s, d_max, |_| Rational::one())
        }
    }
}

/// Float evaluation of d/dt of a Laurent series in t.
pub fn laurent_derivative_f64(s: &Series, t: f64) -> f64 {
    s.derivative().eval_f64(t)
}

/// |a| for rationals (small helper for reports).
pub fn rat_abs(r: &Rational) -> Rational {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(0), int(1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(3), int(0));
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(bernoulli(6), rat(1, 42));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn genus_two_rhs() {
        let rules = RingRules::literal();
        let mut lower = BTreeMap::new();
        lower.insert(1, genus1_datum());
        let r = hae_rhs(2, &lower, &rules).unwrap();
        assert_eq!(r.coeff(2, -1), rat(15, 8));
        let p = integrate_in_f(&r, 2).unwrap();
        assert_eq!(p.coeff(3, -1), rat(5, 8));
        assert!(p.f_constant_part().is_zero());
        let rev = hae_rhs_ordered(2, &lower, &rules, true).unwrap();
        assert_eq!(r, rev);
    }

    #[test]
    fn gap_targets() {
        assert_eq!(GapTarget::new(2).leading, rat(-1, 80));
        assert_eq!(GapTarget::new(3).leading, rat(1, 112));
        assert_eq!(gue_reference(2), (rat(-1, 240), -2));
    }

    #[test]
    fn exact_solver() {
        let a = vec![vec![int(2), int(1)], vec![rat(1, 3), int(-1)]];
        let b = vec![int(3), rat(-2, 3)];
        assert_eq!(solve_exact(&a, &b).unwrap(), vec![int(1), int(1)]);
        let sing = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve_exact(&sing, &[int(1), int(2)]).is_none());
    }

    #[test]
    fn low_genus_invariants() {
        let g0 = gw_invariants(0, 3, None).unwrap();
        assert_eq!(g0.iter().map(|r| r.n.clone()).collect::<Vec<_>>(), vec![int(3), rat(-45, 8), rat(244, 9)]);
        let g1 = gw_invariants(1, 1, None).unwrap();
        assert_eq!(g1[0].n, rat(1, 4));
    }

    #[test]
    fn genus_two_and_three() {
        let mut s = HaeSolver::new(3).unwrap();
        let g2 = gw_invariants(2, 5, Some(&mut s)).unwrap();
        let want = [rat(1, 80), int(0), rat(3, 20), rat(-514, 5), rat(43497, 8)];
        assert_eq!(g2.iter().map(|r| r.n.clone()).collect::<Vec<_>>(), want);
        let g3 = gw_invariants(3, 2, Some(&mut s)).unwrap();
        assert_eq!(g3[0].n, rat(1, 2016));
        assert_eq!(g3[1].n, rat(1, 336));
        assert_eq!(s.gw[&2].value_at_conifold_free_point(), int(0));
    }

    #[test]
    fn conifold_leading_term() {
        let mut t = ConifoldTransform::new(10, 4).unwrap();
        let p = QuasiModularPoly::monomial(3, -1, rat(5, 8));
        let l = t.conifold_laurent(&p, None).unwrap();
        assert_eq!(l.coeff(-2).unwrap(), rat(-5, 216));
        let x = t.conifold_laurent(&QuasiModularPoly::monomial(0, 1, int(1)), None).unwrap();
        assert_eq!(x.coeff(-1).unwrap(), int(1));
        assert_eq!(x.coeff(0).unwrap(), rat(11, 18));
    }
}
