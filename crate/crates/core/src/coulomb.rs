//! Metropolis sampler for the N-point ensemble on the positive half-line with
//! weight exp(-(N/t) sum Phi(x_i)) prod_{i<j} (x_i - x_j)^2 prod_{i,j} exp Lambda(x_i, x_j).

use crate::elliptic::{phi_of_log, EllipticError, EllipticFrame, T_CONFINEMENT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoulombError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error("eigenvalues {0} and {1} coincide")]
    CoincidentEigenvalues(usize, usize),
    #[error("acceptance rate {0} below 1%")]
    AcceptanceCollapse(f64),
    #[error("frame has t = {frame_t}, ensemble has t = {config_t}")]
    FrameMismatch { frame_t: f64, config_t: f64 },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

pub type Result<T> = std::result::Result<T, CoulombError>;

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub t: f64,
    /// Post-burn-in sweeps, summed over chains.
    pub sweeps: u64,
    /// Burn-in sweeps per chain.
    pub burnin: u64,
    pub proposal_scale: f64,
    pub seed: u64,
    pub chains: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig { n: 64, t: 0.1, sweeps: 1_000_000, burnin: 5_000, proposal_scale: 0.05, seed: 20240601, chains: 4 }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoulombError::InvalidConfig(m.to_string()));
        if self.n < 2 {
            return bad("N must be at least 2");
        }
        if !(self.t > 0.0 && self.t < T_CONFINEMENT) {
            return bad("t must lie in (0, 2 pi / (3 sqrt 3))");
        }
        if self.sweeps <= self.burnin {
            return bad("sweeps must exceed burnin");
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return bad("proposal scale must be positive");
        }
        if self.chains == 0 {
            return bad("at least one chain is needed");
        }
        Ok(())
    }

    fn sweeps_per_chain(&self) -> u64 {
        self.sweeps.div_ceil(self.chains as u64)
    }
}

#[derive(Clone, Debug)]
pub struct SampleState {
    pub x: Vec<f64>,
    pub cached_log_weight: f64,
}

impl SampleState {
    /// x_i = exp(2 sqrt(t) s_i) on a uniform grid s_i in [-1, 1].
    pub fn initial(config: &EnsembleConfig) -> Result<Self> {
        let n = config.n;
        let w = 2.0 * config.t.sqrt();
        let x: Vec<f64> = (0..n).map(|i| (w * (-1.0 + 2.0 * i as f64 / (n - 1) as f64)).exp()).collect();
        let cached_log_weight = log_weight(&x, config)?;
        Ok(SampleState { x, cached_log_weight })
    }

    /// Recompute the weight and compare with the running value.
    pub fn resync(&mut self, config: &EnsembleConfig) -> Result<f64> {
        let w = log_weight(&self.x, config)?;
        let drift = (w - self.cached_log_weight).abs();
        self.cached_log_weight = w;
        Ok(drift)
    }
}

/// -(N/t) sum Phi(x_i) + 2 sum_{i<j} log|x_i - x_j| + sum_{i,j} Lambda(x_i, x_j).
pub fn log_weight(x: &[f64], config: &EnsembleConfig) -> Result<f64> {
    let n = x.len();
    if let Some(i) = x.iter().position(|v| !(*v > 0.0)) {
        return Err(CoulombError::InvalidConfig(format!("x[{i}] = {} is not positive", x[i])));
    }
    let mut s = -(config.n as f64 / config.t) * x.iter().map(|v| phi_of_log(v.ln())).sum::<f64>();
    for i in 0..n {
        s += -0.5 * (3.0 * x[i] * x[i]).ln();
        for j in i + 1..n {
            let d = (x[i] - x[j]).abs();
            if d <= f64::EPSILON * x[i].max(x[j]) {
                return Err(CoulombError::CoincidentEigenvalues(i, j));
            }
            s += 2.0 * d.ln() - (x[i] * x[i] + x[i] * x[j] + x[j] * x[j]).ln();
        }
    }
    Ok(s)
}

/// Change of log_weight when x[k] moves to xn.
fn delta_log_weight(x: &[f64], k: usize, xn: f64, coef: f64) -> f64 {
    let xo = x[k];
    let mut prod = 1.0;
    for (j, &y) in x.iter().enumerate() {
        if j == k {
            continue;
        }
        // (xn - y)^2 / (xn^2 + xn y + y^2) over the same for xo
        let a = (xn - y) * (xn - y) * (xo * xo + xo * y + y * y);
        let b = (xo - y) * (xo - y) * (xn * xn + xn * y + y * y);
        prod *= a / b;
    }
    // diagonal Lambda(x, x) = -log(3 x^2) / 2
    -coef * (phi_of_log(xn.ln()) - phi_of_log(xo.ln())) + prod.ln() - (xn / xo).ln()
}

/// Pooled eigenvalue samples of all chains.
#[derive(Clone, Debug)]
pub struct EmpiricalSpectrum {
    pub n: usize,
    /// Sorted, every `thin`-th sweep of each chain.
    pub samples: Vec<f64>,
    pub thin: u64,
    pub histogram: Histogram,
    pub edge_lo: f64,
    pub edge_hi: f64,
    pub acceptance: f64,
}

#[derive(Clone, Debug)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn build(sorted: &[f64], bins: usize) -> Self {
        let lo = sorted[0];
        let hi = sorted[sorted.len() - 1];
        let w = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + w * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in sorted {
            let i = (((v - lo) / w) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// CSV with columns bin_left,bin_right,count,density.
    pub fn to_csv(&self) -> String {
        let tot = self.total() as f64;
        let mut s = String::from("bin_left,bin_right,count,density\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            s.push_str(&format!("{:.16e},{:.16e},{},{:.16e}\n", a, b, c, *c as f64 / (tot * (b - a))));
        }
        s
    }
}

/// Edge of a square-root law from the tail: (tail mass)^{2/3} is linear in
/// log x near the edge, fitted over tail masses in [lo, hi] and extrapolated to zero.
fn edge_fit(sorted: &[f64], upper: bool, lo: f64, hi: f64) -> f64 {
    let m = sorted.len();
    let pts: Vec<(f64, f64)> = (0..24)
        .map(|i| {
            let p = lo + (hi - lo) * i as f64 / 23.0;
            let idx = ((p * m as f64) as usize).min(m - 1);
            let v = if upper { sorted[m - 1 - idx] } else { sorted[idx] };
            (v.ln(), p.powf(2.0 / 3.0))
        })
        .collect();
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    let icpt = (sy - slope * sx) / k;
    (-icpt / slope).exp()
}

struct ChainOut {
    samples: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

fn run_chain(config: &EnsembleConfig, chain: usize, thin: u64) -> Result<ChainOut> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chain as u64);
    let mut st = SampleState::initial(config)?;
    let coef = config.n as f64 / config.t;
    let per = config.sweeps_per_chain();
    let mut samples = Vec::with_capacity((per / thin) as usize * config.n);
    let (mut acc, mut prop) = (0u64, 0u64);
    for sweep in 0..config.burnin + per {
        let counting = sweep >= config.burnin;
        for k in 0..config.n {
            let g: f64 = rng.sample(StandardNormal);
            let xn = st.x[k] * (config.proposal_scale * g).exp();
            let d = delta_log_weight(&st.x, k, xn, coef);
            let log_a = d + (xn / st.x[k]).ln();
            let u: f64 = rng.random();
            let ok = log_a >= 0.0 || u < log_a.exp();
            if ok && d.is_finite() {
                st.x[k] = xn;
                st.cached_log_weight += d;
                if counting {
                    acc += 1;
                }
            }
            if counting {
                prop += 1;
            }
        }
        if counting && (sweep - config.burnin) % thin == 0 {
            samples.extend_from_slice(&st.x);
        }
        if sweep % 10_000 == 9_999 {
            let drift = st.resync(config)?;
            debug_assert!(drift < 1e-6 * (1.0 + st.cached_log_weight.abs()), "weight drift {drift}");
        }
    }
    Ok(ChainOut { samples, accepted: acc, proposed: prop })
}

/// Run all chains (in parallel) and pool the post-burn-in samples.
pub fn metropolis_run(config: &EnsembleConfig) -> Result<EmpiricalSpectrum> {
    config.validate()?;
    let per = config.sweeps_per_chain();
    // keep at most about four million stored values
    let thin = ((per * config.chains as u64 * config.n as u64) / 4_000_000).max(1);
    let outs = (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(config, c, thin))
        .collect::<Result<Vec<_>>>()?;
    let (mut samples, mut acc, mut prop) = (Vec::new(), 0u64, 0u64);
    for o in outs {
        samples.extend(o.samples);
        acc += o.accepted;
        prop += o.proposed;
    }
    let acceptance = acc as f64 / prop as f64;
    if acceptance < 0.01 {
        return Err(CoulombError::AcceptanceCollapse(acceptance));
    }
    samples.sort_by(f64::total_cmp);
    let histogram = Histogram::build(&samples, 100);
    // tail masses of a few eigenvalues, above the finite-N edge layer
    let n = config.n as f64;
    let (lo, hi) = (2.0 / n, 8.0 / n);
    let edge_lo = edge_fit(&samples, false, lo, hi);
    let edge_hi = edge_fit(&samples, true, lo, hi);
    Ok(EmpiricalSpectrum { n: config.n, samples, thin, histogram, edge_lo, edge_hi, acceptance })
}

#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub n: usize,
    pub t: f64,
    pub ks: f64,
    pub edge_err_lo: f64,
    pub edge_err_hi: f64,
    pub acceptance: f64,
}

impl SpectrumReport {
    pub fn to_json(&self) -> serde_json::Value {
        let f = crate::json_f17;
        serde_json::json!({
            "N": self.n,
            "t": f(self.t),
            "ks": f(self.ks),
            "edge_err_lo": f(self.edge_err_lo),
            "edge_err_hi": f(self.edge_err_hi),
            "acceptance": f(self.acceptance),
        })
    }
}

/// KS distance to the equilibrium CDF and relative edge errors in log x.
pub fn spectrum_stats(spec: &EmpiricalSpectrum, frame: &EllipticFrame, t: f64) -> Result<SpectrumReport> {
    if (frame.t - t).abs() > 1e-9 * t {
        return Err(CoulombError::FrameMismatch { frame_t: frame.t, config_t: t });
    }
    let cdf = frame.equilibrium_cdf(2000);
    let xs: Vec<f64> = cdf.iter().map(|p| p.0).collect();
    let eval = |s: f64| -> f64 {
        if s <= xs[0] {
            return 0.0;
        }
        if s >= xs[xs.len() - 1] {
            return 1.0;
        }
        let i = xs.partition_point(|&v| v <= s) - 1;
        let (a, b) = (cdf[i], cdf[i + 1]);
        a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
    };
    let m = spec.samples.len() as f64;
    let mut ks: f64 = 0.0;
    for (i, &s) in spec.samples.iter().enumerate() {
        let f = eval(s);
        ks = ks.max((f - i as f64 / m).abs()).max(((i + 1) as f64 / m - f).abs());
    }
    let lx = frame.frakx;
    Ok(SpectrumReport {
        n: spec.n,
        t,
        ks,
        edge_err_lo: (spec.edge_lo.ln() + lx).abs() / lx,
        edge_err_hi: (spec.edge_hi.ln() - lx).abs() / lx,
        acceptance: spec.acceptance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> EnsembleConfig {
        EnsembleConfig { n, sweeps: 2000, burnin: 200, chains: 2, ..Default::default() }
    }

    #[test]
    fn single_site_delta_matches_full_weight() {
        let c = cfg(8);
        let st = SampleState::initial(&c).unwrap();
        let coef = c.n as f64 / c.t;
        let xn = st.x[3] * 1.07;
        let mut y = st.x.clone();
        y[3] = xn;
        let full = log_weight(&y, &c).unwrap() - st.cached_log_weight;
        let d = delta_log_weight(&st.x, 3, xn, coef);
        assert!((full - d).abs() < 1e-9 * (1.0 + full.abs()), "{full} {d}");
    }

    #[test]
    fn identical_seeds_identical_spectra() {
        let c = cfg(6);
        let a = metropolis_run(&c).unwrap();
        let b = metropolis_run(&c).unwrap();
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn rejects_supercritical_t() {
        let c = EnsembleConfig { t: 1.3, ..cfg(4) };
        assert!(matches!(metropolis_run(&c), Err(CoulombError::InvalidConfig(_))));
    }
}
