//! Exact B-model series for local P^2: hypergeometric Jacobian, quasi-modular
//! generators and mirror maps at large radius, and Frobenius solutions of the
//! Picard-Fuchs operator around the conifold point w = 1 + 27y = 0.

use crate::qmpoly::QuasiModularPoly;
use crate::ratseries::{int, rat, Rational, Series, SeriesError};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MirrorError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("ring rule {0} fails as a series identity at order {1}")]
    RingClosureFailure(&'static str, i64),
    #[error("Frobenius recurrence singular at exponent {0}")]
    FrobeniusRecurrenceSingular(i64),
    #[error("order {0} too small (need at least {1})")]
    OrderTooSmall(i64, i64),
}

pub type Result<T> = std::result::Result<T, MirrorError>;

/// sum_n (-1)^n (3n)!/(n!)^3 y^n.
pub fn hypergeom_c(order: i64) -> Series {
    let mut c = Vec::with_capacity(order.max(0) as usize);
    let mut cur = Rational::one();
    for n in 0..order {
        if n > 0 {
            let k = int(-(3 * n) * (3 * n - 1) * (3 * n - 2));
            cur = cur * k / int(n * n * n);
        }
        c.push(cur.clone());
    }
    Series::new("y", 0, c)
}

/// X = 1/(1 + 27y).
pub fn x_of_y(order: i64) -> Series {
    let mut c = Vec::with_capacity(order as usize);
    let mut cur = Rational::one();
    for _ in 0..order {
        c.push(cur.clone());
        cur *= int(-27);
    }
    Series::new("y", 0, c)
}

#[derive(Clone, Debug)]
pub struct LargeRadiusPack {
    pub c: Series,
    pub x: Series,
    pub f: Series,
    pub q_of_y: Series,
    /// -q_LR as a series in y (positive linear term).
    pub neg_qlr_of_y: Series,
    pub y_of_q: Series,
    pub order: i64,
}

impl LargeRadiusPack {
    /// -q_LR re-expanded in Q.
    pub fn neg_qlr_of_q(&self) -> Result<Series> {
        Ok(self.neg_qlr_of_y.compose(&self.y_of_q)?)
    }
}

/// y * exp( integral of (g - 1) dy/y ), the normalized exponentiated period.
fn exp_period(g: &Series) -> Result<Series> {
    let one = Series::one("y", g.order());
    let inner = g.sub(&one)?.integrate_theta()?;
    Ok(inner.exp()?.shift(1))
}

pub fn generators_lr(order: i64) -> Result<LargeRadiusPack> {
    if order < 2 {
        return Err(MirrorError::OrderTooSmall(order, 2));
    }
    let c = hypergeom_c(order);
    let x = x_of_y(order);
    let one = Series::one("y", order);
    let third = rat(1, 3);
    let f = c.log()?.theta().add(&one.sub(&x)?.scale(&third))?;
    let q_of_y = exp_period(&c)?.truncate(order);
    let neg_qlr_of_y = exp_period(&x.div(&c.mul(&c)?)?)?.truncate(order);
    let y_of_q = q_of_y.revert("Q")?;
    Ok(LargeRadiusPack { c, x, f, q_of_y, neg_qlr_of_y, y_of_q, order })
}

/// Closed derivation rules of theta = y d/dy on the generator ring.
#[derive(Clone, Debug)]
pub struct RingRules {
    pub theta_x: QuasiModularPoly,
    pub theta_f: QuasiModularPoly,
    pub theta_log_c: QuasiModularPoly,
}

impl RingRules {
    /// The rules as literal polynomials, unchecked.
    pub fn literal() -> Self {
        RingRules {
            theta_x: QuasiModularPoly::from_terms([((0, 2), int(1)), ((0, 1), int(-1))]),
            theta_f: QuasiModularPoly::from_terms([
                ((2, 0), int(-1)),
                ((1, 0), rat(-1, 3)),
                ((1, 1), rat(1, 3)),
                ((0, 1), rat(1, 9)),
                ((0, 2), rat(-1, 9)),
            ]),
            theta_log_c: QuasiModularPoly::from_terms([((1, 0), int(1)), ((0, 0), rat(-1, 3)), ((0, 1), rat(1, 3))]),
        }
    }

    /// theta acting on a polynomial through the chain rule.
    pub fn theta(&self, p: &QuasiModularPoly) -> QuasiModularPoly {
        p.d_x().mul(&self.theta_x).add(&p.d_f().mul(&self.theta_f))
    }
}

/// Return the ring rules after checking each as a series identity in y to `order`.
pub fn theta_ring_rules(order: i64) -> Result<RingRules> {
    let rules = RingRules::literal();
    let lr = generators_lr(order.max(2))?;
    let check = |name: &'static str, lhs: Series, rhs: &QuasiModularPoly| -> Result<()> {
        let r = rhs.eval(&lr.x, &lr.f)?;
        let d = lhs.sub(&r)?;
        if !d.is_zero() || d.order() < order {
            return Err(MirrorError::RingClosureFailure(name, order));
        }
        Ok(())
    };
    check("theta X", lr.x.theta(), &rules.theta_x)?;
    check("theta F", lr.f.theta(), &rules.theta_f)?;
    check("theta log C", lr.c.log()?.theta(), &rules.theta_log_c)?;
    Ok(rules)
}

/// L = theta^3 + 27y theta(theta+1/3)(theta+2/3) applied to a series in y.
pub fn picard_fuchs_lr(s: &Series) -> Result<Series> {
    let t1 = s.theta();
    let t2 = t1.theta();
    let t3 = t2.theta();
    let inner = t3.add(&t2)?.add(&t1.scale(&rat(2, 9)))?;
    Ok(t3.add(&inner.shift(1).scale(&int(27)))?)
}

/// A function p*log(w) + r in the conifold chart.
#[derive(Clone, Debug)]
pub struct LogPair {
    pub log_part: Series,
    pub regular: Series,
}

/// theta = (w-1) d/dw on exact Laurent data in w.
fn theta_w(s: &Series) -> Result<Series> {
    let d = s.derivative();
    Ok(d.shift(1).sub(&d)?)
}

fn theta_pair(p: &LogPair) -> Result<LogPair> {
    // theta(log w) = 1 - 1/w
    let extra = p.log_part.sub(&p.log_part.shift(-1))?;
    Ok(LogPair { log_part: theta_w(&p.log_part)?, regular: theta_w(&p.regular)?.add(&extra)? })
}

/// L = theta^3 + (w-1)(theta^3 + theta^2 + (2/9)theta) with theta = (w-1)d/dw.
pub fn picard_fuchs_cf(p: &LogPair) -> Result<LogPair> {
    let t1 = theta_pair(p)?;
    let t2 = theta_pair(&t1)?;
    let t3 = theta_pair(&t2)?;
    let comb = |a: &Series, b: &Series, c: &Series, d: &Series| -> Result<Series> {
        let inner = b.add(c)?.add(&d.scale(&rat(2, 9)))?;
        Ok(a.add(&inner.shift(1).sub(&inner)?)?)
    };
    Ok(LogPair {
        log_part: comb(&t3.log_part, &t3.log_part, &t2.log_part, &t1.log_part)?,
        regular: comb(&t3.regular, &t3.regular, &t2.regular, &t1.regular)?,
    })
}

fn pf_cf_regular(s: &Series) -> Result<Series> {
    Ok(picard_fuchs_cf(&LogPair { log_part: Series::zero("w", s.order()), regular: s.clone() })?.regular)
}

#[derive(Clone, Debug)]
pub struct ConifoldFramePack {
    pub tcf_of_w: Series,
    pub w_of_tcf: Series,
    pub qcf_of_tcf: Series,
    /// Regular part G of the logarithmic solution t_CF*log(w) + G.
    pub log_companion: Series,
    pub c_cf: Series,
    pub f_cf: Series,
    pub order: i64,
}

/// Solve for the coefficients from exponent `start` upward so that
/// L(known + sum g_n w^n) + forcing vanishes; each unknown is pinned by the
/// lowest exponent where L(w^n) is nonzero.
fn frobenius_solve(mut known: Series, forcing: &Series, start: i64, upto: i64, cap: i64) -> Result<Series> {
    let mut cache_lowest = Vec::new();
    for n in start..upto {
        let e = pf_cf_regular(&Series::monomial("w", n, Rational::one(), cap))?;
        let k = e.valuation().ok_or(MirrorError::FrobeniusRecurrenceSingular(n))?;
        let resid = pf_cf_regular(&known)?.add(forcing)?;
        let r = resid.coeff(k)?;
        let g = -r / e.coeff(k)?;
        if !g.is_zero() {
            known = known.add(&Series::monomial("w", n, g, cap))?;
        }
        cache_lowest.push(k);
        if cache_lowest.len() > 1 && cache_lowest[cache_lowest.len() - 2] >= k {
            return Err(MirrorError::FrobeniusRecurrenceSingular(n));
        }
    }
    Ok(known)
}

/// Frobenius solutions at the conifold with unit linear coefficient, the
/// conifold nome q_CF = (w/27) exp(h - h(0)), and the conifold generators.
pub fn frobenius_conifold(order: i64) -> Result<ConifoldFramePack> {
    if order < 3 {
        return Err(MirrorError::OrderTooSmall(order, 3));
    }
    let k = order + 4;
    let cap = k + 8;
    let a0 = Series::monomial("w", 1, Rational::one(), cap);
    let zero = Series::zero("w", cap);
    let a = frobenius_solve(a0, &zero, 2, k, cap)?.truncate(k);
    // regular part of L(A log w), then the companion G = O(w^2)
    let forcing = picard_fuchs_cf(&LogPair { log_part: a.clone(), regular: Series::zero("w", cap) })?;
    if !forcing.log_part.truncate(k - 3).is_zero() {
        return Err(MirrorError::FrobeniusRecurrenceSingular(-1));
    }
    let g = frobenius_solve(Series::zero("w", cap), &forcing.regular.truncate(k - 3), 2, k - 1, cap)?.truncate(k - 1);

    let da = a.derivative();
    let h = a.shift(-1).add(&g.derivative())?.div(&da)?;
    let h0 = h.coeff(0)?;
    let hs = h.sub(&Series::constant("w", h0, h.order()))?;
    let qcf_w = hs.exp()?.shift(1).scale(&rat(1, 27));

    let tcf_of_w = a.truncate(order);
    let w_of_tcf = a.revert("t")?.truncate(order);
    let qcf_of_tcf = qcf_w.compose(&a.revert("t")?)?.truncate(order);
    if qcf_of_tcf.order() < order {
        return Err(SeriesError::InsufficientOrder { requested: order - 1, order: qcf_of_tcf.order() }.into());
    }
    let (c_cf, f_cf) = frame_cf_generators(&a)?;
    Ok(ConifoldFramePack {
        tcf_of_w,
        w_of_tcf,
        qcf_of_tcf,
        log_companion: g.truncate(order),
        c_cf: c_cf.truncate(order),
        f_cf: f_cf.truncate(order - 1),
        order,
    })
}

/// C_CF = theta t_CF and F_CF = theta log C_CF + (1 - X)/3 with X = 1/w.
pub fn frame_cf_generators(tcf_of_w: &Series) -> Result<(Series, Series)> {
    let c_cf = theta_w(tcf_of_w)?;
    let th = theta_w(&c_cf)?.div(&c_cf)?;
    let x = x_in_w(th.order() + 1);
    let one = Series::one("w", th.order());
    let f_cf = th.add(&one.sub(&x)?.scale(&rat(1, 3)))?;
    Ok((c_cf, f_cf))
}

/// X = 1/w, exact single term known below `order`.
pub fn x_in_w(order: i64) -> Series {
    Series::monomial("w", -1, Rational::one(), order.max(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypergeometric_coefficients() {
        let c = hypergeom_c(4);
        assert_eq!(c.coeffs(), &[int(1), int(-6), int(90), int(-1680)]);
    }

    #[test]
    fn large_radius_maps() {
        let lr = generators_lr(8).unwrap();
        assert_eq!(lr.q_of_y.coeff_range(0, 4).unwrap(), [int(0), int(1), int(-6), int(63)]);
        assert_eq!(lr.y_of_q.coeff_range(0, 4).unwrap(), [int(0), int(1), int(6), int(9)]);
        let nq = lr.neg_qlr_of_q().unwrap();
        assert_eq!(nq.coeff_range(0, 5).unwrap(), [int(0), int(1), int(-9), int(108), int(-1461)]);
        assert_eq!(lr.f.coeff_range(0, 3).unwrap(), [int(0), int(3), int(-99)]);
        // theta log Q = C
        let tl = lr.q_of_y.shift(-1).log().unwrap().theta().add(&Series::one("y", 7)).unwrap();
        assert_eq!(tl, lr.c.truncate(7));
    }

    #[test]
    fn ring_rules_close() {
        theta_ring_rules(12).unwrap();
    }

    #[test]
    fn picard_fuchs_annihilates_period() {
        let c = hypergeom_c(15);
        let one = Series::one("y", 15);
        let pi_reg = c.sub(&one).unwrap().integrate_theta().unwrap();
        // L(log y + P) = theta^2 C + 27y(theta+1/3)(theta+2/3)C
        let lp = picard_fuchs_lr(&pi_reg).unwrap();
        // contribution of log y: theta log y = 1, so add L acting on it by hand
        let extra = Series::constant("y", rat(2, 9), 15).shift(1).scale(&int(27));
        assert!(lp.add(&extra).unwrap().truncate(14).is_zero());
    }

    #[test]
    fn conifold_frame() {
        let cf = frobenius_conifold(8).unwrap();
        assert_eq!(cf.tcf_of_w.coeff(2).unwrap(), rat(11, 18));
        assert_eq!(cf.w_of_tcf.coeff(2).unwrap(), rat(-11, 18));
        let q = &cf.qcf_of_tcf;
        assert_eq!(q.coeff(1).unwrap(), rat(1, 27));
        assert_eq!(q.coeff(2).unwrap(), rat(-1, 486));
        assert_eq!(q.coeff(3).unwrap(), rat(1, 13122));
        assert_eq!(q.coeff(4).unwrap(), rat(19, 4251528));
        assert_eq!(cf.c_cf.coeff(0).unwrap(), int(-1));
        assert_eq!(cf.f_cf.offset(), -1);
        assert_eq!(cf.f_cf.coeff(-1).unwrap(), rat(-1, 3));
        assert_eq!(cf.f_cf.coeff(0).unwrap(), rat(1, 9));
        assert_eq!(cf.log_companion.coeff_range(2, 4).unwrap(), [rat(7, 12), rat(877, 1458)]);
    }

    #[test]
    fn conifold_solutions_are_annihilated() {
        let cf = frobenius_conifold(12).unwrap();
        let r = pf_cf_regular(&cf.tcf_of_w).unwrap();
        assert!(r.truncate(9).is_zero());
        let p = picard_fuchs_cf(&LogPair { log_part: cf.tcf_of_w.clone(), regular: cf.log_companion.clone() }).unwrap();
        assert!(p.log_part.truncate(9).is_zero());
        assert!(p.regular.truncate(9).is_zero());
    }
}
