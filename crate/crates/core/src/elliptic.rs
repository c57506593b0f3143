//! Floating-point layer on the spectral torus C/(Z + tau Z): the Jacobi theta
//! function, the covering map x(u), lattice data (zeta, frakx, t), the planar
//! resolvent and two-point kernel, the equilibrium density, the confining
//! potential and the map to the mirror curve.

use crate::cseries;
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("nome {0} outside the supported range")]
    NomeOutOfRange(f64),
    #[error("evaluation point too close to a pole")]
    PoleProximity,
    #[error("bisection failed to bracket a root: {0}")]
    BisectionFailure(&'static str),
    #[error("t(q) quadrature {quad} disagrees with {other} ({what})")]
    QuadratureSeriesMismatch { quad: f64, other: f64, what: &'static str },
    #[error("branch of the resolvent is ambiguous along the requested path")]
    BranchAmbiguity,
    #[error("{0} is outside the support of the equilibrium measure")]
    OutsideSupport(f64),
    #[error("kernel evaluated on the diagonal")]
    DiagonalSingularity,
    #[error("potential needs x > 0, got {0}")]
    NonPositiveArgument(f64),
}

pub type Result<T> = std::result::Result<T, EllipticError>;

/// Largest nome for which frames are solved.
pub const Q_MAX: f64 = 0.2;
/// Confinement bound 2 pi / (3 sqrt 3) on the 't Hooft coupling.
pub const T_CONFINEMENT: f64 = 2.0 * PI / (3.0 * 1.732_050_807_568_877_2);

fn ci(x: f64) -> C {
    C::new(0.0, x)
}

/// theta_1(u) = 2 q^{1/8} sum_k (-1)^k q^{k(k+1)/2} sin(pi(2k+1)u).
#[derive(Clone, Debug)]
pub struct Theta1 {
    pub q: f64,
    pref: f64,
    weights: Vec<f64>,
}

impl Theta1 {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 0.9) {
            return Err(EllipticError::NomeOutOfRange(q));
        }
        let mut weights = Vec::new();
        for k in 0..200usize {
            let w = q.powf((k * (k + 1)) as f64 / 2.0);
            if w < 1e-300 {
                break;
            }
            weights.push(if k % 2 == 0 { w } else { -w });
        }
        Ok(Theta1 { q, pref: 2.0 * q.powf(0.125), weights })
    }

    /// Index after which |terms| decrease for this imaginary part.
    fn k_monotone(&self, im: f64) -> usize {
        (2.0 * PI * im.abs() / (1.0 / self.q).ln()).ceil() as usize + 1
    }

    /// d-th derivative at u, summing until terms drop below 1e-17 of the running max.
    pub fn eval_d(&self, u: C, d: u32) -> C {
        let kmin = self.k_monotone(u.im);
        let mut s = C::new(0.0, 0.0);
        let mut mx: f64 = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let a = PI * (2 * k + 1) as f64;
            let term = *w * a.powi(d as i32) * (u * a + d as f64 * PI / 2.0).sin();
            s += term;
            let m = term.norm();
            mx = mx.max(m);
            if k >= kmin && m <= 1e-17 * mx {
                break;
            }
        }
        s * self.pref
    }

    pub fn eval(&self, u: C) -> C {
        self.eval_d(u, 0)
    }

    /// Taylor coefficients theta_1^{(j)}(c)/j! for j < n.
    pub fn taylor(&self, c: C, n: usize) -> Vec<C> {
        let mut co = cseries::zeros(n);
        let mut mx: f64 = 0.0;
        let kmin = self.k_monotone(c.im + 1.0);
        for (k, w) in self.weights.iter().enumerate() {
            let a = PI * (2 * k + 1) as f64;
            let mut fac = *w;
            let mut m: f64 = 0.0;
            for (j, cj) in co.iter_mut().enumerate() {
                if j > 0 {
                    fac *= a / j as f64;
                }
                let t = fac * (c * a + j as f64 * PI / 2.0).sin();
                m = m.max(t.norm());
                *cj += t;
            }
            mx = mx.max(m);
            if k >= kmin && m <= 1e-18 * mx {
                break;
            }
        }
        co.iter().map(|x| x * self.pref).collect()
    }
}

/// Bundle of lattice data for a fixed nome.
#[derive(Clone, Debug)]
pub struct EllipticFrame {
    pub q: f64,
    pub tau: C,
    pub zeta: f64,
    pub frakx: f64,
    pub t: f64,
    pub x_plus: f64,
    pub theta: Theta1,
    line: OnceLock<ResolventLine>,
}

/// Small-nome expansion t(q) = 3q + 9q^2/2 + 9q^3 + 39q^4/4 + 72q^5/5.
pub fn t_series(q: f64) -> f64 {
    3.0 * q + 4.5 * q * q + 9.0 * q.powi(3) + 9.75 * q.powi(4) + 14.4 * q.powi(5)
}

fn bisect(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64, what: &'static str) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(EllipticError::BisectionFailure(what));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Composite Simpson rule on uniformly spaced samples (even number of intervals).
fn simpson(f: &[C], h: f64) -> C {
    let n = f.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut s = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        s += v * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Unwrap a sequence of principal arguments into a continuous branch.
fn unwrap_phase(z: &[C]) -> Vec<f64> {
    let mut out = Vec::with_capacity(z.len());
    let mut prev = 0.0;
    for (i, v) in z.iter().enumerate() {
        let a = v.arg();
        let a = if i == 0 { a } else { a + 2.0 * PI * ((prev - a) / (2.0 * PI)).round() };
        out.push(a);
        prev = a;
    }
    out
}

impl EllipticFrame {
    /// Solve zeta, frakx and t(q) for 0 < q <= Q_MAX.
    pub fn solve(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= Q_MAX) {
            return Err(EllipticError::NomeOutOfRange(q));
        }
        let theta = Theta1::new(q)?;
        let tau = ci((1.0 / q).ln() / (2.0 * PI));
        let mut fr = EllipticFrame { q, tau, zeta: 0.0, frakx: 0.0, t: 0.0, x_plus: 0.0, theta, line: OnceLock::new() };
        let h = tau / 2.0;
        let z = bisect(|v| fr.dlogx(C::new(v, 0.0) - h).re, 1e-6, 0.5 - 1e-6, 1e-13, "zeta")?;
        // Newton polish on Re (log x)' using local Taylor data
        let mut z = z;
        for _ in 0..3 {
            let a = C::new(z, 0.0) - h;
            let lp = cseries::log(&fr.theta.taylor(a + 1.0 / 6.0, 4));
            let lm = cseries::log(&fr.theta.taylor(a - 1.0 / 6.0, 4));
            let d1 = lp[1] - lm[1];
            let d2 = lp[2] - lm[2];
            z -= d1.re / (2.0 * d2.re);
        }
        fr.zeta = z;
        fr.frakx = fr.x_of_u(C::new(z, 0.0) - h)?.norm().ln();
        fr.x_plus = fr.frakx.exp();
        let t1 = fr.t_quadrature(0.25, 4000);
        let t2 = fr.t_quadrature(0.35, 4000);
        if (t1.re - t2.re).abs() > 1e-8 * t1.re.abs() {
            return Err(EllipticError::QuadratureSeriesMismatch { quad: t1.re, other: t2.re, what: "second contour" });
        }
        // the five-term series is only accurate enough to police small nomes
        if q <= 1e-2 {
            let ts = t_series(q);
            if (t1.re - ts).abs() > 1e-8 * ts {
                return Err(EllipticError::QuadratureSeriesMismatch { quad: t1.re, other: ts, what: "small-nome series" });
            }
        }
        fr.t = t1.re;
        Ok(fr)
    }

    /// x(u) = -theta_1(u + 1/6) / theta_1(u - 1/6).
    pub fn x_of_u(&self, u: C) -> Result<C> {
        let mut d = u - 1.0 / 6.0;
        d -= self.tau * (d.im / self.tau.im).round();
        d -= d.re.round();
        if d.norm() < 1e-8 {
            return Err(EllipticError::PoleProximity);
        }
        Ok(-self.theta.eval(u + 1.0 / 6.0) / self.theta.eval(u - 1.0 / 6.0))
    }

    /// d log x / du.
    pub fn dlogx(&self, u: C) -> C {
        let p = u + 1.0 / 6.0;
        let m = u - 1.0 / 6.0;
        self.theta.eval_d(p, 1) / self.theta.eval(p) - self.theta.eval_d(m, 1) / self.theta.eval(m)
    }

    /// Argument of the resolvent logarithm: (x(u) + 1) theta_1(u - 1/6) / theta_1(u - 1/2).
    pub fn resolvent_arg(&self, u: C) -> C {
        (self.theta.eval(u - 1.0 / 6.0) - self.theta.eval(u + 1.0 / 6.0)) / self.theta.eval(u - 0.5)
    }

    /// (i/2 pi) times the integral of R01 dlog x over the A-cycle, on the
    /// horizontal line Im u = -Im tau/2 + eps_frac*Im tau.
    pub fn t_quadrature(&self, eps_frac: f64, n: usize) -> C {
        let im = -self.tau.im / 2.0 + eps_frac * self.tau.im;
        let h = 1.0 / n as f64;
        let us: Vec<C> = (0..=n).map(|i| C::new(-0.5 + i as f64 * h, im)).collect();
        let r: Vec<C> = us.iter().map(|&u| self.resolvent_arg(u)).collect();
        let ph = unwrap_phase(&r);
        let f: Vec<C> = us
            .iter()
            .zip(r.iter().zip(&ph))
            .map(|(&u, (rv, &p))| {
                let r01 = ci(1.0 / 3f64.sqrt()) * C::new(rv.norm().ln(), p);
                r01 * self.dlogx(u)
            })
            .collect();
        ci(1.0 / (2.0 * PI)) * simpson(&f, h)
    }

    /// R01 continued along the straight segment from u = -1/6 (where it vanishes).
    pub fn resolvent_r01(&self, u: C) -> Result<C> {
        let start = C::new(-1.0 / 6.0, 0.0);
        let x0 = self.resolvent_arg(start);
        let mut logv = x0.ln();
        // at u = -1/6 the argument is exactly 1 up to rounding
        let mut prev = x0;
        let steps = 64 + (200.0 * (u - start).norm()) as usize;
        for i in 1..=steps {
            let p = start + (u - start) * (i as f64 / steps as f64);
            let v = self.resolvent_arg(p);
            if !v.is_finite() || v.norm() < 1e-12 {
                return Err(EllipticError::BranchAmbiguity);
            }
            let step = (v / prev).ln();
            if step.im.abs() > 1.0 {
                return Err(EllipticError::BranchAmbiguity);
            }
            logv += step;
            prev = v;
        }
        Ok(ci(1.0 / 3f64.sqrt()) * logv)
    }

    fn line(&self) -> &ResolventLine {
        self.line.get_or_init(|| ResolventLine::new(self, 4096))
    }

    /// ln|x(v - tau/2)| for real v.
    fn relog(&self, v: f64) -> f64 {
        let u = C::new(v, 0.0) - self.tau / 2.0;
        (-self.theta.eval(u + 1.0 / 6.0) / self.theta.eval(u - 1.0 / 6.0)).norm().ln()
    }

    /// Equilibrium density at s in (1/x_+, x_+).
    pub fn density_rho(&self, s: f64) -> Result<f64> {
        let x_minus = 1.0 / self.x_plus;
        if !(s > x_minus && s < self.x_plus) {
            return Err(EllipticError::OutsideSupport(s));
        }
        let l = s.ln();
        let z = self.zeta;
        let v1 = bisect(|v| self.relog(v) - l, -z, z, 1e-15, "density side 1")?;
        let v2 = bisect(|v| self.relog(v) - l, z, 1.0 - z, 1e-15, "density side 2")?;
        let line = self.line();
        let r = (line.r01(self, v1) - line.r01(self, v2)) / (ci(-2.0 * PI) * s * self.t);
        Ok(r.re)
    }

    /// Density in the log variable, rho(e^sigma) e^sigma, zero outside the cut.
    pub fn density_log(&self, sigma: f64) -> f64 {
        if sigma.abs() >= self.frakx {
            return 0.0;
        }
        let s = sigma.exp();
        self.density_rho(s).map(|r| r * s).unwrap_or(0.0)
    }

    /// Cumulative distribution on a grid; nodes at sigma = -frakx cos(phi).
    pub fn equilibrium_cdf(&self, n: usize) -> Vec<(f64, f64)> {
        let xi = self.frakx;
        let h = PI / n as f64;
        let g: Vec<f64> = (0..=n)
            .map(|i| {
                let ph = i as f64 * h;
                let sg = -xi * ph.cos();
                if i == 0 || i == n {
                    0.0
                } else {
                    self.density_log(sg) * xi * ph.sin()
                }
            })
            .collect();
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(((-xi).exp(), 0.0));
        for i in 1..=n {
            acc += 0.5 * h * (g[i - 1] + g[i]);
            out.push(((-xi * (i as f64 * h).cos()).exp(), acc));
        }
        out
    }

    /// Total mass of the density by the periodic trapezoid rule in phi.
    pub fn density_mass(&self, n: usize) -> f64 {
        let xi = self.frakx;
        let h = PI / n as f64;
        (1..n).map(|i| {
            let ph = i as f64 * h;
            self.density_log(-xi * ph.cos()) * xi * ph.sin()
        })
        .sum::<f64>()
            * h
    }

    /// -(log theta_1)''(u1 - u2) = wp(u1 - u2) + pi^2 E_2 / 3.
    pub fn bergmann_cf(&self, u1: C, u2: C) -> Result<C> {
        let mut z = u1 - u2;
        z -= self.tau * (z.im / self.tau.im).round();
        z -= z.re.round();
        if z.norm() < 1e-9 {
            return Err(EllipticError::DiagonalSingularity);
        }
        let t0 = self.theta.eval(z);
        let t1 = self.theta.eval_d(z, 1);
        let t2 = self.theta.eval_d(z, 2);
        Ok((t1 * t1 - t0 * t2) / (t0 * t0))
    }

    /// Weierstrass wp for the lattice Z + tau Z.
    pub fn weierstrass_p(&self, z: C) -> Result<C> {
        Ok(self.bergmann_cf(z, C::new(0.0, 0.0))? - PI * PI * eisenstein_e2(self.q) / 3.0)
    }

    /// Point of the mirror curve over u.
    pub fn mirror_bridge(&self, u: C) -> Result<BridgeValues> {
        let th = &self.theta;
        let hfun = |a: f64, b: f64, c: f64| -> Result<C> {
            let den = th.eval(u - b) * th.eval(u - c);
            if den.norm() < 1e-14 {
                return Err(EllipticError::PoleProximity);
            }
            Ok(ci(1.0) * (ci(3.0 * PI * a)).exp() * th.eval(u - a).powi(2) / den)
        };
        let s = 1.0 / 6.0;
        let h1 = hfun(-s, s, 0.5)?;
        let h2 = hfun(s, -s, 0.5)?;
        let h3 = hfun(0.5, -s, s)?;
        let eta = h1 + h2 + h3;
        let y = eta.powi(-3);
        let x = self.x_of_u(u)?;
        // exp(-i sqrt3 R01) is the resolvent argument, so no branch enters here
        let e = self.resolvent_arg(u);
        let z1 = -e * x * x / ((1.0 + x) * eta);
        let z2 = -e / (x * (1.0 + x) * eta);
        let residual = (1.0 + z1 + z2 + y / (z1 * z2)).norm();
        Ok(BridgeValues { z1, z2, eta, y, residual, h: [h1, h2, h3] })
    }
}

#[derive(Clone, Debug)]
pub struct BridgeValues {
    pub z1: C,
    pub z2: C,
    pub eta: C,
    pub y: C,
    pub residual: f64,
    /// H-functions in the order (-1/6,1/6,1/2), (1/6,-1/6,1/2), (1/2,-1/6,1/6).
    pub h: [C; 3],
}

/// E_2(q) = 1 - 24 sum sigma_1(n) q^n.
pub fn eisenstein_e2(q: f64) -> f64 {
    let mut s = 0.0;
    let mut qn = q;
    let mut n = 1.0;
    while qn > 1e-19 {
        s += n * qn / (1.0 - qn);
        qn *= q;
        n += 1.0;
    }
    1.0 - 24.0 * s
}

/// Resolvent logarithm tabulated along u = v - tau/2 for v in [-zeta, 1 - zeta],
/// with the branch continued from v = -zeta.
#[derive(Clone, Debug)]
struct ResolventLine {
    v0: f64,
    h: f64,
    vals: Vec<C>,
    logs: Vec<C>,
}

impl ResolventLine {
    fn new(fr: &EllipticFrame, n: usize) -> Self {
        let v0 = -fr.zeta;
        let h = 1.0 / n as f64;
        let vals: Vec<C> = (0..=n).map(|i| fr.resolvent_arg(C::new(v0 + i as f64 * h, 0.0) - fr.tau / 2.0)).collect();
        let ph = unwrap_phase(&vals);
        let logs = vals.iter().zip(&ph).map(|(v, &p)| C::new(v.norm().ln(), p)).collect();
        ResolventLine { v0, h, vals, logs }
    }

    fn r01(&self, fr: &EllipticFrame, v: f64) -> C {
        let i = (((v - self.v0) / self.h).round().max(0.0) as usize).min(self.vals.len() - 1);
        let val = fr.resolvent_arg(C::new(v, 0.0) - fr.tau / 2.0);
        let lg = self.logs[i] + (val / self.vals[i]).ln();
        ci(1.0 / 3f64.sqrt()) * lg
    }
}

/// dPhi/ds in s = log x. Equal to (2/sqrt3)(arctan((2e^s - 1)/sqrt3) - pi/6),
/// written as (2/sqrt3) arctan(sqrt3 tanh(s/2)) so it is exactly odd.
pub fn phi_log_slope(s: f64) -> f64 {
    let r3 = 3f64.sqrt();
    (2.0 / r3) * (r3 * (s / 2.0).tanh()).atan()
}

const PHI_S_MAX: f64 = 60.0;
const PHI_H: f64 = 0.005;

struct PhiTable {
    vals: Vec<f64>,
}

fn phi_table() -> &'static PhiTable {
    static T: OnceLock<PhiTable> = OnceLock::new();
    T.get_or_init(|| {
        // five-point Gauss-Legendre per panel
        let nodes = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
        let wts = [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];
        let n = (PHI_S_MAX / PHI_H).round() as usize;
        let mut vals = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        vals.push(0.0);
        for i in 0..n {
            let a = i as f64 * PHI_H;
            let mid = a + PHI_H / 2.0;
            let panel: f64 = nodes.iter().zip(&wts).map(|(x, w)| w * phi_log_slope(mid + x * PHI_H / 2.0)).sum();
            acc += panel * PHI_H / 2.0;
            vals.push(acc);
        }
        PhiTable { vals }
    })
}

/// Phi in the log variable s = log x (even in s).
pub fn phi_of_log(s: f64) -> f64 {
    let s = s.abs();
    let tab = phi_table();
    if s >= PHI_S_MAX {
        return tab.vals[tab.vals.len() - 1] + (s - PHI_S_MAX) * 2.0 * PI / (3.0 * 3f64.sqrt());
    }
    let i = ((s / PHI_H) as usize).min(tab.vals.len() - 2);
    let a = i as f64 * PHI_H;
    let t = (s - a) / PHI_H;
    let (y0, y1) = (tab.vals[i], tab.vals[i + 1]);
    let (d0, d1) = (phi_log_slope(a) * PHI_H, phi_log_slope(a + PHI_H) * PHI_H);
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * d1
}

/// (Phi(x), Phi'(x)).
pub fn potential_phi(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) {
        return Err(EllipticError::NonPositiveArgument(x));
    }
    let s = x.ln();
    Ok((phi_of_log(s), phi_log_slope(s) / x))
}

/// Lambda(x, y) = -log(x^2 + xy + y^2)/2.
pub fn lambda_pair(x: f64, y: f64) -> f64 {
    -0.5 * (x * x + x * y + y * y).ln()
}

/// lambda(Z) = log|e^Z - 1| - log(e^{2Z} + e^Z + 1)/2.
pub fn lambda_z(z: f64) -> f64 {
    0.5 * ((z.exp() - 1.0).powi(2) / ((2.0 * z).exp() + z.exp() + 1.0)).ln()
}

/// Nome with t(q) = t, by secant iteration on the quadrature.
pub fn solve_nome_for_t(t: f64) -> Result<EllipticFrame> {
    if !(t > 0.0) {
        return Err(EllipticError::BisectionFailure("t must be positive"));
    }
    // invert the small-nome series for a start
    let mut q0 = bisect(|q| t_series(q) - t, 1e-12, Q_MAX, 1e-15, "initial nome")?;
    let mut f0 = EllipticFrame::solve(q0)?;
    if (f0.t - t).abs() < 1e-14 * t {
        return Ok(f0);
    }
    let mut q1 = q0 * (1.0 + 1e-4);
    let mut f1 = EllipticFrame::solve(q1)?;
    for _ in 0..30 {
        if (f1.t - t).abs() < 1e-14 * t {
            return Ok(f1);
        }
        let q2 = q1 - (f1.t - t) * (q1 - q0) / (f1.t - f0.t);
        if !(q2 > 0.0 && q2 <= Q_MAX) {
            return Err(EllipticError::NomeOutOfRange(q2));
        }
        q0 = q1;
        f0 = f1;
        q1 = q2;
        f1 = EllipticFrame::solve(q1)?;
    }
    Ok(f1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_basics() {
        let th = Theta1::new(0.05).unwrap();
        assert!(th.eval(C::new(0.0, 0.0)).norm() < 1e-16);
        let u = C::new(0.13, 0.07);
        assert!((th.eval(u + 1.0) + th.eval(u)).norm() < 1e-14);
        let tay = th.taylor(u, 6);
        assert!((tay[0] - th.eval(u)).norm() < 1e-13);
        assert!((tay[1] - th.eval_d(u, 1)).norm() < 1e-12);
        assert!((tay[2] * 2.0 - th.eval_d(u, 2)).norm() < 1e-11);
    }

    #[test]
    fn frame_small_nome() {
        let f = EllipticFrame::solve(1e-3).unwrap();
        assert!((f.zeta - 0.244_976_275_353_070_43).abs() < 1e-10);
        assert!((f.frakx - 0.109_708_902_543_886_64).abs() < 1e-10);
        assert!((f.t - 0.003_004_509_009_764_414).abs() < 1e-13);
    }

    #[test]
    fn phi_values() {
        let (p, d) = potential_phi(1.0).unwrap();
        assert_eq!((p, d), (0.0, 0.0));
        let big = 1e6f64;
        let v = potential_phi(big).unwrap().0 - 2.0 * PI / (3.0 * 3f64.sqrt()) * big.ln();
        assert!((v + 1.17195).abs() < 1e-4, "{v}");
        assert!((potential_phi(3.7).unwrap().0 - potential_phi(1.0 / 3.7).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn e2_leading_terms() {
        let q = 1e-3;
        assert!((eisenstein_e2(q) - (1.0 - 24.0 * q - 72.0 * q * q - 96.0 * q.powi(3) - 168.0 * q.powi(4))).abs() < 1e-12);
    }
}
