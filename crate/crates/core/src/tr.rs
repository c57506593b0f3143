//! Eynard-Orantin recursion on a torus spectral curve, carried out on local
//! Laurent data at the ramification points.
//!
//! Near a simple ramification point a the local coordinate z is defined by
//! z^2 = log x(a + h) - log x(a), so the deck involution is z -> -z. The
//! Bergmann kernel -(log theta_1)''(u - v) is expanded in both local
//! coordinates, and every correlator is stored as a table of coefficients on
//! the basis chi_{a,k}(p) = Res_{q -> a} B(p, q) / ((2k + 1) z(q)^{2k + 1}).

use crate::cseries;
use crate::elliptic::{EllipticError, EllipticFrame, Theta1, Q_MAX};
use crate::hae::{HaeError, HaeSolver};
use crate::ratseries::Series;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Hae(#[from] HaeError),
    #[error("ramification at {0} is not simple")]
    DegenerateRamification(C),
    #[error("deck involution check failed: |x(sigma u) - x(u)| = {0:e}")]
    DeckCheck(f64),
    #[error("kernel evaluated too close to the ramification point")]
    KernelPole,
    #[error("quadrature changed by {0:e} (relative) under node doubling")]
    QuadratureNonConvergent(f64),
    #[error("correlator ({0}, {1}) has not been computed")]
    MissingCorrelator(u32, usize),
    #[error("(g, n) = ({0}, {1}) is not stable")]
    Unstable(u32, usize),
    #[error("q grid unusable: {0}")]
    GridTooCoarse(&'static str),
    #[error("no ramification points found")]
    NoRamification,
}

pub type Result<T> = std::result::Result<T, TrError>;

/// Half-width of the local Laurent arrays; index NL holds z^0.
const NL: usize = 40;
/// Default Taylor length of local data.
pub const DEFAULT_ORDER: usize = 30;

type Bi = Vec<Vec<C>>;
type Label = (usize, usize);
type Table = BTreeMap<Vec<Label>, C>;

fn c0() -> C {
    C::new(0.0, 0.0)
}

/// A function of u given by its Taylor data at any point.
#[derive(Clone, Debug)]
pub enum LocalFn {
    /// sum of c * log theta_1(u - s)
    ThetaCombo(Vec<(f64, f64)>),
    /// (i / sqrt 3) log[(theta_1(u - 1/6) - theta_1(u + 1/6)) / theta_1(u - 1/2)]
    ConifoldResolvent,
}

impl LocalFn {
    /// Taylor coefficients at a; the constant term is only defined up to 2 pi i.
    pub fn taylor(&self, th: &Theta1, a: C, n: usize) -> Vec<C> {
        match self {
            LocalFn::ThetaCombo(terms) => {
                let mut r = cseries::zeros(n);
                for &(c, s) in terms {
                    let l = cseries::log(&th.taylor(a - s, n));
                    for (x, y) in r.iter_mut().zip(&l) {
                        *x += c * y;
                    }
                }
                r
            }
            LocalFn::ConifoldResolvent => {
                let cm = th.taylor(a - 1.0 / 6.0, n);
                let cp = th.taylor(a + 1.0 / 6.0, n);
                let num: Vec<C> = cm.iter().zip(&cp).map(|(m, p)| m - p).collect();
                let l1 = cseries::log(&num);
                let l2 = cseries::log(&th.taylor(a - 0.5, n));
                let k = C::new(0.0, 1.0 / 3f64.sqrt());
                l1.iter().zip(&l2).map(|(x, y)| k * (x - y)).collect()
            }
        }
    }

    /// exp(self(v) - self(u)) for a ThetaCombo with integer weights; used to
    /// compare x-values without fixing a branch of the logarithm.
    fn ratio(&self, th: &Theta1, v: C, u: C) -> Option<C> {
        match self {
            LocalFn::ThetaCombo(terms) => Some(
                terms
                    .iter()
                    .map(|&(c, s)| (th.eval(v - s) / th.eval(u - s)).powf(c))
                    .product(),
            ),
            LocalFn::ConifoldResolvent => None,
        }
    }
}

/// log x for the conifold curve: log theta_1(u + 1/6) - log theta_1(u - 1/6).
pub fn conifold_log_x() -> LocalFn {
    LocalFn::ThetaCombo(vec![(1.0, -1.0 / 6.0), (-1.0, 1.0 / 6.0)])
}

/// log z_2 on the mirror curve in the torus parametrization.
pub fn mirror_log_z2() -> LocalFn {
    LocalFn::ThetaCombo(vec![(2.0, 1.0 / 6.0), (-1.0, -1.0 / 6.0), (-1.0, 0.5)])
}

/// log z_1 on the mirror curve in the torus parametrization.
pub fn mirror_log_z1() -> LocalFn {
    LocalFn::ThetaCombo(vec![(2.0, -1.0 / 6.0), (-1.0, 1.0 / 6.0), (-1.0, 0.5)])
}

/// Local data at one ramification point.
#[derive(Clone, Debug)]
pub struct Local {
    pub point: C,
    /// z as a series in h = u - point.
    pub z_of_h: Vec<C>,
    /// h as a series in z.
    pub h_of_z: Vec<C>,
    /// y-function as a series in h (constant term dropped).
    pub y_of_h: Vec<C>,
    /// y-function as a series in z (constant term dropped), times the scale.
    pub y_of_z: Vec<C>,
    /// d log x / dh as a series in h.
    pub dlogx_of_h: Vec<C>,
}

/// Ramification points with their deck involution series.
#[derive(Clone, Debug)]
pub struct RamificationData {
    pub points: Vec<C>,
    /// sigma(u* + h) - u* as a series in h.
    pub deck_series: Vec<Vec<C>>,
}

/// Spectral curve (x, y) on the torus of nome q, with omega_{0,1} = scale * y dlog x.
#[derive(Clone, Debug)]
pub struct SpectralCurve {
    pub q: f64,
    pub tau: C,
    pub theta: Theta1,
    pub log_x: LocalFn,
    pub y: LocalFn,
    pub scale: f64,
    pub order: usize,
    pub locals: Vec<Local>,
    /// h[a][b][i][j]: regular part of B in the local coordinates z_a (i), z_b (j).
    hreg: Vec<Vec<Bi>>,
}

fn bimul(a: &Bi, b: &Bi) -> Bi {
    let n = a.len();
    let mut r = vec![cseries::zeros(n); n];
    for i in 0..n {
        for k in 0..=i {
            for (l, x) in a[k].iter().enumerate() {
                if *x == c0() {
                    continue;
                }
                for (j, y) in b[i - k].iter().take(n - l).enumerate() {
                    r[i][l + j] += x * y;
                }
            }
        }
    }
    r
}

/// R with B * R = A.
fn bidiv(a: &Bi, b: &Bi) -> Bi {
    let n = a.len();
    let mut r = vec![cseries::zeros(n); n];
    let b00 = b[0][0];
    for i in 0..n {
        for j in 0..n {
            let mut s = a[i][j];
            for l in 1..=j {
                s -= b[0][l] * r[i][j - l];
            }
            for k in 1..=i {
                for l in 0..=j {
                    s -= b[k][l] * r[i - k][j - l];
                }
            }
            r[i][j] = s / b00;
        }
    }
    r
}

fn bicomp(p: &[C], w: &Bi) -> Bi {
    let n = w.len();
    let mut r = vec![cseries::zeros(n); n];
    for c in p.iter().rev() {
        r = bimul(&r, w);
        r[0][0] += c;
    }
    r
}

/// Coefficients of -(log f)'' from Taylor data of log f.
fn minus_second(lg: &[C], n: usize) -> Vec<C> {
    (0..n).map(|j| -(((j + 2) * (j + 1)) as f64) * lg[j + 2]).collect()
}

/// Lattice reduction of u into the fundamental cell [0,1) + [0,1) tau.
fn reduce(u: C, tau: C) -> C {
    let b = (u.im / tau.im + 1e-12).floor();
    let v = u - tau * b;
    C::new(v.re - (v.re + 1e-12).floor(), v.im)
}

impl SpectralCurve {
    /// Conifold curve: omega_{0,1} = R01 dlog x, ramified at +-zeta - tau/2.
    pub fn conifold(frame: &EllipticFrame, order: usize) -> Result<Self> {
        let h = frame.tau / 2.0;
        let pts = vec![C::new(frame.zeta, 0.0) - h, C::new(-frame.zeta, 0.0) - h];
        Self::new(frame.q, pts, conifold_log_x(), LocalFn::ConifoldResolvent, 1.0, order)
    }

    /// Mirror curve: x = z_2, y = log z_1, ramified where dlog z_2 vanishes.
    pub fn mirror(q: f64, order: usize) -> Result<Self> {
        let th = Theta1::new(q)?;
        let tau = C::new(0.0, (1.0 / q).ln() / (2.0 * PI));
        let pts = find_ramification(&th, tau, &mirror_log_z2());
        if pts.is_empty() {
            return Err(TrError::NoRamification);
        }
        Self::new(q, pts, mirror_log_z2(), mirror_log_z1(), 1.0, order)
    }

    pub fn new(q: f64, points: Vec<C>, log_x: LocalFn, y: LocalFn, scale: f64, order: usize) -> Result<Self> {
        if !(q > 0.0 && q <= Q_MAX) {
            return Err(EllipticError::NomeOutOfRange(q).into());
        }
        let theta = Theta1::new(q)?;
        let tau = C::new(0.0, (1.0 / q).ln() / (2.0 * PI));
        let t = order;
        let mut locals = Vec::with_capacity(points.len());
        for &a in &points {
            let mut lg = log_x.taylor(&theta, a, t + 3);
            if lg[1].norm() > 1e-9 * (1.0 + lg[2].norm()) || lg[2].norm() < 1e-12 {
                return Err(TrError::DegenerateRamification(a));
            }
            let dlogx_of_h = cseries::der(&lg)[..t].to_vec();
            lg[0] = c0();
            lg[1] = c0();
            // z = sqrt(lg2) h sqrt(lg / (lg2 h^2))
            let m: Vec<C> = lg[2..].iter().map(|v| v / lg[2]).collect();
            let half: Vec<C> = cseries::log(&m).iter().map(|v| v * 0.5).collect();
            let sq: Vec<C> = cseries::exp(&half).iter().map(|v| v * lg[2].sqrt()).collect();
            let mut z_of_h = cseries::zeros(t);
            z_of_h[1..].copy_from_slice(&sq[..t - 1]);
            let h_of_z = cseries::revert(&z_of_h);
            let mut y_of_h = y.taylor(&theta, a, t + 3)[..t].to_vec();
            y_of_h[0] = c0();
            let y_of_z: Vec<C> = cseries::compose(&y_of_h, &h_of_z).iter().map(|v| v * scale).collect();
            locals.push(Local { point: a, z_of_h, h_of_z, y_of_h, y_of_z, dlogx_of_h });
        }
        let lg0 = cseries::log(&theta.taylor(c0(), t + 5)[1..]);
        let p = minus_second(&lg0, t);
        let np = locals.len();
        let mut hreg = vec![vec![Vec::new(); np]; np];
        for (ia, la) in locals.iter().enumerate() {
            for (ib, lb) in locals.iter().enumerate() {
                let hz = &la.h_of_z;
                let hs = &lb.h_of_z;
                let mut w = vec![cseries::zeros(t); t];
                for i in 0..t {
                    w[i][0] += hz[i];
                    w[0][i] -= hs[i];
                }
                let dz = cseries::der(hz);
                let ds = cseries::der(hs);
                let dd: Bi = (0..t).map(|i| (0..t).map(|j| dz[i] * ds[j]).collect()).collect();
                let hm = if ia == ib {
                    // d_z d_s log((h(z) - h(s)) / (z - s)) plus the regular part of the kernel
                    let qm: Bi = (0..t)
                        .map(|i| (0..t).map(|j| if i + j + 1 < t { hz[i + j + 1] } else { c0() }).collect())
                        .collect();
                    let dq: Bi = (0..t)
                        .map(|i| (0..t).map(|j| if i + 1 < t { (i + 1) as f64 * qm[i + 1][j] } else { c0() }).collect())
                        .collect();
                    let rr = bidiv(&dq, &qm);
                    let hs_part: Bi = (0..t)
                        .map(|i| (0..t).map(|j| if j + 1 < t { (j + 1) as f64 * rr[i][j + 1] } else { c0() }).collect())
                        .collect();
                    let reg = bimul(&bicomp(&p, &w), &dd);
                    hs_part.iter().zip(&reg).map(|(x, y)| x.iter().zip(y).map(|(a, b)| a + b).collect()).collect()
                } else {
                    let lgc = cseries::log(&theta.taylor(la.point - lb.point, t + 5));
                    let ell = minus_second(&lgc, t);
                    bimul(&bicomp(&ell, &w), &dd)
                };
                hreg[ia][ib] = hm;
            }
        }
        Ok(SpectralCurve { q, tau, theta, log_x, y, scale, order, locals, hreg })
    }

    /// Same curve with omega_{0,1} multiplied by c.
    pub fn scaled(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.scale *= c;
        for l in &mut s.locals {
            for v in &mut l.y_of_z {
                *v *= c;
            }
        }
        s
    }

    /// Deck involution series at every ramification point, checked on a ring
    /// of test points.
    pub fn deck_involution(&self) -> Result<RamificationData> {
        let mut deck = Vec::new();
        for l in &self.locals {
            let negz: Vec<C> = l.z_of_h.iter().map(|v| -v).collect();
            let s = cseries::compose(&l.h_of_z, &negz);
            let r = self.residue_radius();
            let mut worst: f64 = 0.0;
            for k in 0..16 {
                let hh = C::from_polar(r, 2.0 * PI * (k as f64 + 0.3) / 16.0);
                let u = l.point + hh;
                let v = l.point + cseries::eval(&s, hh);
                let dev = match self.log_x.ratio(&self.theta, v, u) {
                    Some(rt) => (rt - 1.0).norm(),
                    None => 0.0,
                };
                worst = worst.max(dev);
            }
            if worst > 1e-10 {
                return Err(TrError::DeckCheck(worst));
            }
            deck.push(s);
        }
        Ok(RamificationData { points: self.locals.iter().map(|l| l.point).collect(), deck_series: deck })
    }

    /// 0.1 times the smaller of the ramification separation and the distance to a pole of x.
    pub fn residue_radius(&self) -> f64 {
        let mut d: f64 = 0.5;
        let pts: Vec<C> = self.locals.iter().map(|l| l.point).collect();
        let lattice = |z: C| -> f64 {
            let mut best = f64::INFINITY;
            for m in -1..=1 {
                for n in -1..=1 {
                    best = best.min((z - self.tau * m as f64 - n as f64).norm());
                }
            }
            best
        };
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.min(lattice(reduce(a - b, self.tau)));
            }
            if let LocalFn::ThetaCombo(terms) = &self.log_x {
                for &(_, s) in terms {
                    d = d.min(lattice(reduce(a - s, self.tau)));
                }
            }
        }
        0.1 * d
    }

    fn sigma_local(&self, a: usize, hh: C) -> C {
        let l = &self.locals[a];
        let z = cseries::eval(&l.z_of_h, hh);
        cseries::eval(&l.h_of_z, -z)
    }

    /// Denominator (omega_{0,1}(u) - omega_{0,1}(sigma u)) / du near ramification point a.
    pub fn kernel_denominator(&self, a: usize, hh: C) -> C {
        let l = &self.locals[a];
        let sh = self.sigma_local(a, hh);
        (cseries::eval(&l.y_of_h, hh) - cseries::eval(&l.y_of_h, sh)) * cseries::eval(&l.dlogx_of_h, hh) * self.scale
    }

    /// K(u0, u) = (1/2) int_{sigma u}^{u} B(u0, .) / (omega_{0,1}(u) - omega_{0,1}(sigma u)),
    /// as the coefficient of du0 / du, for u = point_a + hh.
    pub fn recursion_kernel(&self, u0: C, a: usize, hh: C) -> Result<C> {
        if hh.norm() < 1e-6 {
            return Err(TrError::KernelPole);
        }
        let p = self.locals[a].point;
        let u = p + hh;
        let su = p + self.sigma_local(a, hh);
        let lp = |z: C| self.theta.eval_d(z, 1) / self.theta.eval(z);
        let num = 0.5 * (lp(u0 - u) - lp(u0 - su));
        let den = self.kernel_denominator(a, hh);
        if den.norm() < 1e-300 {
            return Err(TrError::KernelPole);
        }
        Ok(num / den)
    }

    /// B(u1, u2) = -(log theta_1)''(u1 - u2) as the coefficient of du1 du2.
    pub fn bergmann(&self, u1: C, u2: C) -> C {
        let z = u1 - u2;
        let t0 = self.theta.eval(z);
        let t1 = self.theta.eval_d(z, 1);
        let t2 = self.theta.eval_d(z, 2);
        (t1 * t1 - t0 * t2) / (t0 * t0)
    }

    /// chi_{b,k}(p) as the coefficient of dp.
    pub fn basis_eval(&self, b: usize, k: usize, p: C) -> C {
        let t = self.order;
        let l = &self.locals[b];
        let lgc = cseries::log(&self.theta.taylor(p - l.point, t + 3));
        let f = minus_second(&lgc, t);
        let negh: Vec<C> = l.h_of_z.iter().map(|v| -v).collect();
        let s = cseries::mul(&cseries::compose(&f, &negh), &cseries::der(&l.h_of_z));
        s[2 * k] / (2 * k + 1) as f64
    }

    /// Local Laurent array near point a of chi_{b,k}; sig < 0 evaluates at sigma(z).
    fn e_at(&self, a: usize, b: usize, k: usize, sig: i32) -> Vec<C> {
        let mut arr = cseries::zeros(2 * NL + 1);
        if a == b {
            arr[NL - 2 * k - 2] = C::new(1.0, 0.0);
        }
        let hm = &self.hreg[a][b];
        for m in 0..self.order.min(NL + 1) {
            arr[NL + m] += hm[m][2 * k] / (2 * k + 1) as f64;
        }
        if sig < 0 {
            for (i, v) in arr.iter_mut().enumerate() {
                if (i + NL) % 2 == 0 {
                    *v = -*v;
                }
            }
        }
        arr
    }
}

/// Newton search for zeros of d log x / du from a grid of starting points.
pub fn find_ramification(th: &Theta1, tau: C, log_x: &LocalFn) -> Vec<C> {
    let mut found: Vec<C> = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            let mut u = C::new(i as f64 / 8.0 + 0.013, 0.0) + tau * (j as f64 / 8.0);
            let mut ok = false;
            for _ in 0..60 {
                let c = log_x.taylor(th, u, 3);
                if !c.iter().all(|v| v.is_finite()) {
                    break;
                }
                let du = -c[1] / (2.0 * c[2]);
                u += du;
                if du.norm() < 1e-15 {
                    ok = true;
                    break;
                }
            }
            if !ok || !u.is_finite() || log_x.taylor(th, u, 3)[1].norm() > 1e-10 {
                continue;
            }
            let u = reduce(u, tau);
            if found.iter().all(|v| (u - v).norm() > 1e-8) {
                found.push(u);
            }
        }
    }
    found
}

fn lmul(a: &[C], b: &[C]) -> Vec<C> {
    let mut r = cseries::zeros(2 * NL + 1);
    for (i, x) in a.iter().enumerate() {
        if *x == c0() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let e = i + j;
            if e >= NL && e <= 3 * NL {
                r[e - NL] += x * y;
            }
        }
    }
    r
}

fn add_into(map: &mut BTreeMap<Vec<Label>, Vec<C>>, key: Vec<Label>, arr: &[C], c: C) {
    let e = map.entry(key).or_insert_with(|| cseries::zeros(2 * NL + 1));
    for (x, y) in e.iter_mut().zip(arr) {
        *x += c * y;
    }
}

/// Correlator tables filled in dependency order.
pub struct Recursion {
    pub curve: SpectralCurve,
    tables: BTreeMap<(u32, usize), Table>,
    inv_dt: Vec<Vec<C>>,
}

impl Recursion {
    pub fn new(curve: SpectralCurve) -> Self {
        let t = curve.order;
        let inv_dt = curve
            .locals
            .iter()
            .map(|l| {
                let mut dt = cseries::zeros(t);
                for j in (0..t - 1).step_by(2) {
                    dt[j] = 4.0 * l.y_of_z[j + 1];
                }
                cseries::inv(&dt)
            })
            .collect();
        Recursion { curve, tables: BTreeMap::new(), inv_dt }
    }

    pub fn table(&self, g: u32, n: usize) -> Option<&Table> {
        self.tables.get(&(g, n))
    }

    /// omega_{g,n}(z, rest) with z near point a (at sigma z when sig < 0), keyed by the rest labels.
    fn expand(&self, g: u32, n: usize, a: usize, sig: i32) -> Result<BTreeMap<Vec<Label>, Vec<C>>> {
        let mut out = BTreeMap::new();
        if (g, n) == (0, 2) {
            for k in 0..NL / 2 {
                let mut arr = cseries::zeros(2 * NL + 1);
                arr[NL + 2 * k] = C::new(((2 * k + 1) as i32 * sig) as f64, 0.0);
                out.insert(vec![(a, k)], arr);
            }
            return Ok(out);
        }
        let tab = self.tables.get(&(g, n)).ok_or(TrError::MissingCorrelator(g, n))?;
        for (lab, c) in tab {
            let e = self.curve.e_at(a, lab[0].0, lab[0].1, sig);
            add_into(&mut out, lab[1..].to_vec(), &e, *c);
        }
        Ok(out)
    }

    /// omega_{g,n}(z, sigma z, rest) near point a.
    fn expand2(&self, g: u32, n: usize, a: usize) -> Result<BTreeMap<Vec<Label>, Vec<C>>> {
        let mut out = BTreeMap::new();
        if (g, n) == (0, 2) {
            let hm = &self.curve.hreg[a][a];
            let t = self.curve.order;
            let mut arr = cseries::zeros(2 * NL + 1);
            arr[NL - 2] = C::new(-0.25, 0.0);
            for m in 0..=NL {
                for i in 0..=m {
                    if i < t && m - i < t {
                        let s = if (m - i) % 2 == 0 { 1.0 } else { -1.0 };
                        arr[NL + m] -= hm[i][m - i] * s;
                    }
                }
            }
            out.insert(Vec::new(), arr);
            return Ok(out);
        }
        let tab = self.tables.get(&(g, n)).ok_or(TrError::MissingCorrelator(g, n))?;
        for (lab, c) in tab {
            let e1 = self.curve.e_at(a, lab[0].0, lab[0].1, 1);
            let e2 = self.curve.e_at(a, lab[1].0, lab[1].1, -1);
            add_into(&mut out, lab[2..].to_vec(), &lmul(&e1, &e2), *c);
        }
        Ok(out)
    }

    /// Fill the table for omega_{g,n1}.
    pub fn compute(&mut self, g: u32, n1: usize) -> Result<()> {
        if n1 == 0 || 2 * g as i64 - 2 + n1 as i64 <= 0 {
            return Err(TrError::Unstable(g, n1));
        }
        if self.tables.contains_key(&(g, n1)) {
            return Ok(());
        }
        let n = n1 - 1;
        // lower correlators first; every one has smaller 2g - 2 + n
        if g >= 1 && 2 * g as i64 - 3 + n1 as i64 > 0 {
            self.compute(g - 1, n1 + 1)?;
        }
        for h in 0..=g {
            for m in 1..=n1 {
                let chi = 2 * h as i64 - 2 + m as i64;
                if chi > 0 && chi < 2 * g as i64 - 2 + n1 as i64 {
                    self.compute(h, m)?;
                }
            }
        }
        let t = self.curve.order;
        let kmax = 3 * g as usize + n1 - 3;
        let per_point: Vec<Table> = (0..self.curve.locals.len())
            .into_par_iter()
            .map(|a| -> Result<Table> {
                let mut gmap: BTreeMap<Vec<Label>, Vec<C>> = BTreeMap::new();
                if g >= 1 {
                    for (rest, arr) in self.expand2(g - 1, n + 2, a)? {
                        add_into(&mut gmap, rest, &arr, C::new(1.0, 0.0));
                    }
                }
                for h in 0..=g {
                    for mask in 0u32..(1 << n) {
                        let ii: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                        let jj: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
                        if (h, ii.len()) == (0, 0) || (g - h, jj.len()) == (0, 0) {
                            continue;
                        }
                        let ea = self.expand(h, 1 + ii.len(), a, 1)?;
                        let eb = self.expand(g - h, 1 + jj.len(), a, -1)?;
                        for (la, va) in &ea {
                            for (lb, vb) in &eb {
                                let mut lab = vec![(0, 0); n];
                                for (i, l) in ii.iter().zip(la) {
                                    lab[*i] = *l;
                                }
                                for (i, l) in jj.iter().zip(lb) {
                                    lab[*i] = *l;
                                }
                                add_into(&mut gmap, lab, &lmul(va, vb), C::new(1.0, 0.0));
                            }
                        }
                    }
                }
                let inv = &self.inv_dt[a];
                let mut res = Table::new();
                for (lab, arr) in &gmap {
                    for k0 in 0..=kmax + 1 {
                        let mut v = c0();
                        for (j, iv) in inv.iter().enumerate().take(t) {
                            if NL >= 2 * k0 + j {
                                v += arr[NL - 2 * k0 - j] * iv;
                            }
                        }
                        if v.norm() > 0.0 {
                            let mut key = vec![(a, k0)];
                            key.extend_from_slice(lab);
                            *res.entry(key).or_insert_with(c0) += v;
                        }
                    }
                }
                Ok(res)
            })
            .collect::<Result<_>>()?;
        let mut res = Table::new();
        for tab in per_point {
            for (k, v) in tab {
                *res.entry(k).or_insert_with(c0) += v;
            }
        }
        self.tables.insert((g, n1), res);
        Ok(())
    }

    /// Everything needed for omega_{g,1}, in order of increasing 2g - 2 + n.
    pub fn compute_through(&mut self, g_max: u32) -> Result<()> {
        let mut keys = Vec::new();
        for g in 0..=g_max {
            for n in 1..=(g_max + 1 - g) as usize {
                if 2 * g as i64 - 2 + n as i64 > 0 {
                    keys.push((g, n));
                }
            }
        }
        keys.sort_by_key(|&(g, n)| (2 * g as i64 - 2 + n as i64, g));
        for (g, n) in keys {
            self.compute(g, n)?;
        }
        Ok(())
    }

    /// omega_{g,n}(p_1, ..., p_n) as the coefficient of dp_1 ... dp_n.
    pub fn omega(&self, g: u32, points: &[C]) -> Result<C> {
        let n = points.len();
        let tab = self.tables.get(&(g, n)).ok_or(TrError::MissingCorrelator(g, n))?;
        let mut cache: BTreeMap<(usize, Label), C> = BTreeMap::new();
        let mut s = c0();
        for (lab, c) in tab {
            let mut prod = *c;
            for (i, &(b, k)) in lab.iter().enumerate() {
                let v = *cache.entry((i, (b, k))).or_insert_with(|| self.curve.basis_eval(b, k, points[i]));
                prod *= v;
            }
            s += prod;
        }
        Ok(s)
    }

    /// Largest relative weight of labels beyond the pole budget 2(3g - 3 + n) + 2.
    pub fn pole_budget_excess(&self, g: u32, n: usize) -> Result<f64> {
        let tab = self.tables.get(&(g, n)).ok_or(TrError::MissingCorrelator(g, n))?;
        let kmax = 3 * g as usize + n - 3;
        let total: f64 = tab.values().map(|v| v.norm()).fold(0.0, f64::max);
        let over: f64 = tab.iter().filter(|(l, _)| l.iter().any(|&(_, k)| k > kmax)).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        Ok(over / total)
    }

    /// F_g = (1/(2 - 2g)) sum_a Res (int omega_{0,1}) omega_{g,1}, with the
    /// primitive shifted by `anchor`.
    pub fn free_energy_anchored(&self, g: u32, anchor: C) -> Result<C> {
        if g < 2 {
            return Err(TrError::Unstable(g, 0));
        }
        let tab = self.tables.get(&(g, 1)).ok_or(TrError::MissingCorrelator(g, 1))?;
        let mut tot = c0();
        for (lab, c) in tab {
            let (a, k) = lab[0];
            let yz = &self.curve.locals[a].y_of_z;
            // primitive of 2 z y(z) dz has z^{2k+1} coefficient 2 y_{2k-1} / (2k + 1)
            let phi = if k >= 1 { 2.0 * yz[2 * k - 1] / (2 * k + 1) as f64 } else { c0() };
            let e = self.curve.e_at(a, a, k, 1);
            tot += c * (phi + anchor * e[NL - 1]);
        }
        Ok(tot / (2.0 - 2.0 * g as f64))
    }

    pub fn free_energy(&self, g: u32) -> Result<C> {
        self.free_energy_anchored(g, c0())
    }

    /// omega_{0,3} recomputed directly from the pointwise kernel by trapezoid
    /// quadrature on circles around the ramification points.
    pub fn omega03_quadrature(&self, p: [C; 3], nodes: usize) -> Result<C> {
        let cv = &self.curve;
        let r = cv.residue_radius();
        let mut tot = c0();
        for (a, l) in cv.locals.iter().enumerate() {
            let mut s = c0();
            for k in 0..nodes {
                let e = C::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64);
                let hh = e * r;
                let u = l.point + hh;
                let sh = cv.sigma_local(a, hh);
                let su = l.point + sh;
                let z = cseries::eval(&l.z_of_h, hh);
                let dz = cseries::eval(&cseries::der(&l.z_of_h), hh);
                let dsig = cseries::eval(&cseries::der(&l.h_of_z), -z) * (-dz);
                let kern = cv.recursion_kernel(p[0], a, hh)?;
                let f = kern
                    * dsig
                    * (cv.bergmann(u, p[1]) * cv.bergmann(su, p[2]) + cv.bergmann(su, p[1]) * cv.bergmann(u, p[2]));
                // du = i hh dtheta
                s += f * C::new(0.0, 1.0) * hh;
            }
            // (1/2 pi i) times the trapezoid sum with d theta = 2 pi / nodes
            tot += s / nodes as f64 / C::new(0.0, 1.0);
        }
        Ok(tot)
    }

    /// omega_{0,3} by quadrature with node doubling until the change is below 1e-8.
    pub fn omega03_checked(&self, p: [C; 3]) -> Result<C> {
        let mut prev = self.omega03_quadrature(p, 64)?;
        let mut nodes = 128;
        loop {
            let cur = self.omega03_quadrature(p, nodes)?;
            let rel = (cur - prev).norm() / cur.norm().max(1e-300);
            if rel < 1e-8 {
                return Ok(cur);
            }
            if nodes >= 256 {
                return Err(TrError::QuadratureNonConvergent(rel));
            }
            prev = cur;
            nodes *= 2;
        }
    }

    /// A-period of omega_{g,1} along Im u = im by the periodic trapezoid rule.
    pub fn a_period(&self, g: u32, im: f64, nodes: usize) -> Result<C> {
        let mut s = c0();
        for k in 0..nodes {
            s += self.omega(g, &[C::new(k as f64 / nodes as f64, im)])?;
        }
        Ok(s / nodes as f64)
    }
}

/// Free energies F_2..=F_{g_max} of the conifold curve at nome q.
pub fn conifold_free_energies(q: f64, g_max: u32, order: usize) -> Result<(EllipticFrame, Vec<C>)> {
    let frame = EllipticFrame::solve(q)?;
    let mut rec = Recursion::new(SpectralCurve::conifold(&frame, order)?);
    rec.compute_through(g_max)?;
    let f = (2..=g_max).map(|g| rec.free_energy(g)).collect::<Result<_>>()?;
    Ok((frame, f))
}

/// Free energies of the mirror curve at nome q, with t from the elliptic frame.
pub fn mirror_free_energies(q: f64, g_max: u32, order: usize) -> Result<Vec<C>> {
    let mut rec = Recursion::new(SpectralCurve::mirror(q, order)?);
    rec.compute_through(g_max)?;
    (2..=g_max).map(|g| rec.free_energy(g)).collect()
}

/// One row of the cross-check report.
#[derive(Clone, Debug)]
pub struct CrossCheckRow {
    pub q: f64,
    pub t: f64,
    pub dfdt_tr: f64,
    pub dfdt_hae: f64,
    pub rel_dev: f64,
    pub imag_f: f64,
}

#[derive(Clone, Debug)]
pub struct CrossCheckReport {
    pub genus: u32,
    pub rows: Vec<CrossCheckRow>,
}

impl CrossCheckReport {
    pub fn max_rel_dev(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_dev).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let col = |f: &dyn Fn(&CrossCheckRow) -> f64| -> Vec<serde_json::Value> {
            self.rows.iter().map(|r| crate::json_f17(f(r))).collect()
        };
        serde_json::json!({
            "g": self.genus,
            "q": col(&|r| r.q),
            "t": col(&|r| r.t),
            "dFdt_tr": col(&|r| r.dfdt_tr),
            "dFdt_hae": col(&|r| r.dfdt_hae),
            "rel_dev": col(&|r| r.rel_dev),
        })
    }
}

fn fg_and_t(q: f64, g: u32) -> Result<(f64, f64, f64)> {
    let (frame, f) = conifold_free_energies(q, g, DEFAULT_ORDER)?;
    let fg = f[g as usize - 2];
    Ok((fg.re, fg.im, frame.t))
}

/// Compare dF_g/dt from the recursion with 9 * 27^{g-1} dGW_g^CF/dt_CF at t_CF = 9t.
/// The q-derivative is a central difference with step 1e-3 q, Richardson-extrapolated.
pub fn crosscheck_gap(g: u32, qlist: &[f64], solver: Option<&mut HaeSolver>) -> Result<CrossCheckReport> {
    if g < 2 {
        return Err(TrError::Unstable(g, 0));
    }
    if qlist.is_empty() {
        return Err(TrError::GridTooCoarse("empty q list"));
    }
    for &q in qlist {
        if !(q > 0.0 && q * 1.001 <= Q_MAX) {
            return Err(TrError::GridTooCoarse("difference stencil leaves the nome range"));
        }
    }
    let gw = match solver {
        Some(s) => s.gw_cf(g)?,
        None => HaeSolver::with_order(g, crosscheck_w_order(g))?.gw_cf(g)?,
    };
    let rows = qlist
        .par_iter()
        .map(|&q| crosscheck_row(g, q, &gw))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossCheckReport { genus: g, rows })
}

/// w-order that keeps the float evaluation of GW^CF at t_CF ~ 0.3 far below 1e-12.
pub fn crosscheck_w_order(g: u32) -> i64 {
    6 * g as i64 + 24
}

fn crosscheck_row(g: u32, q: f64, gw: &Series) -> Result<CrossCheckRow> {
    let h = 1e-3 * q;
    let stencil = [q - h, q - h / 2.0, q, q + h / 2.0, q + h];
    let vals = stencil.iter().map(|&x| fg_and_t(x, g)).collect::<Result<Vec<_>>>()?;
    let d1 = (vals[4].0 - vals[0].0) / (vals[4].2 - vals[0].2);
    let d2 = (vals[3].0 - vals[1].0) / (vals[3].2 - vals[1].2);
    let dfdt_tr = (4.0 * d2 - d1) / 3.0;
    let t = vals[2].2;
    let dfdt_hae = 9.0 * 27f64.powi(g as i32 - 1) * gw.derivative().eval_f64(9.0 * t);
    let rel_dev = (dfdt_tr - dfdt_hae).abs() / dfdt_hae.abs();
    Ok(CrossCheckRow { q, t, dfdt_tr, dfdt_hae, rel_dev, imag_f: vals[2].1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(q: f64, g: u32) -> Recursion {
        let frame = EllipticFrame::solve(q).unwrap();
        let mut r = Recursion::new(SpectralCurve::conifold(&frame, DEFAULT_ORDER).unwrap());
        r.compute_through(g).unwrap();
        r
    }

    #[test]
    fn deck_involution_is_an_involution() {
        let frame = EllipticFrame::solve(1e-2).unwrap();
        let cv = SpectralCurve::conifold(&frame, DEFAULT_ORDER).unwrap();
        let d = cv.deck_involution().unwrap();
        for s in &d.deck_series {
            assert!(s[0].norm() < 1e-15);
            assert!((s[1] + 1.0).norm() < 1e-12);
            let hh = C::new(0.01, 0.004);
            let back = cseries::eval(s, cseries::eval(s, hh));
            assert!((back - hh).norm() < 1e-10);
        }
    }

    #[test]
    fn genus_two_leading_behaviour() {
        let r = rec(1e-3, 2);
        let frame = EllipticFrame::solve(1e-3).unwrap();
        let f2 = r.free_energy(2).unwrap();
        let lead = f2.re * frame.t * frame.t;
        assert!((lead + 1.0 / 240.0).abs() < 1e-4, "{lead}");
        assert!(f2.im.abs() < 1e-8);
    }

    #[test]
    fn omega04_symmetric() {
        let mut r = rec(1e-2, 1);
        r.compute(0, 4).unwrap();
        let p = [C::new(0.11, 0.02), C::new(0.27, -0.05), C::new(0.4, 0.01), C::new(0.63, 0.03)];
        let a = r.omega(0, &p).unwrap();
        let b = r.omega(0, &[p[2], p[0], p[3], p[1]]).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm(), "{a} {b}");
    }

    #[test]
    fn homogeneity_of_free_energy() {
        let frame = EllipticFrame::solve(1e-2).unwrap();
        let cv = SpectralCurve::conifold(&frame, DEFAULT_ORDER).unwrap();
        let mut r1 = Recursion::new(cv.clone());
        let mut r2 = Recursion::new(cv.scaled(2.0));
        r1.compute_through(2).unwrap();
        r2.compute_through(2).unwrap();
        let ratio = r2.free_energy(2).unwrap() / r1.free_energy(2).unwrap();
        assert!((ratio - 0.25).norm() < 1e-12);
    }
}
