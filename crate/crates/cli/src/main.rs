use clap::{Parser, Subcommand};
use conigap::coulomb::{self, EnsembleConfig};
use conigap::elliptic::{self, EllipticFrame};
use conigap::hae::{self, HaeSolver};
use conigap::json_f17 as f17;
use conigap::mirror;
use conigap::ratseries::Series;
use conigap::tr;
use conigap::verify;
use num_complex::Complex64 as C;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "conigap", version, about = "Conifold-gap solver for local P2 with numeric cross-checks")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Seed used by stochastic subcommands unless overridden there.
    #[arg(long, global = true, default_value_t = 20240601)]
    global_seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Gromov-Witten invariants N_{g,d}, d = 1..dmax.
    Gw {
        #[arg(long)]
        genus: u32,
        #[arg(long, default_value_t = 3)]
        dmax: u32,
    },
    /// Fix the ambiguity at genus g and verify the conifold gap.
    Gap {
        #[arg(long)]
        genus: u32,
    },
    /// A named series: C, X, F, Q, qLR, tCF, qCF, F_CF.
    Series {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 10)]
        order: i64,
    },
    /// Lattice data and self-checks of the elliptic frame.
    Elliptic {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        report: bool,
    },
    /// Compare dF_g/dt from the recursion with the anomaly-equation result.
    TrCheck {
        #[arg(long)]
        genus: u32,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        /// Truncation order in w for the exact series.
        #[arg(long)]
        w_order: Option<i64>,
    },
    /// Run the Coulomb-gas sampler.
    Simulate {
        #[arg(long = "N", default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        t: f64,
        #[arg(long, default_value_t = 1_000_000)]
        sweeps: u64,
        #[arg(long, default_value_t = 5_000)]
        burnin: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 0.05)]
        proposal_scale: f64,
        /// Histogram CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance criteria; stops at the first failure unless --keep-going.
    VerifyAll {
        #[arg(long)]
        keep_going: bool,
        /// Comma-separated subset of criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Computation(String),
}

fn comp<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Computation(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = std::env::var("CONIGAP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let out = cli.output.clone();
    let result = dispatch(cli);
    let (value, failed) = match result {
        Ok(v) => v,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Computation(m)) => {
            eprintln!("computation failed: {m}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("serializable");
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, text + "\n") {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(1);
            }
        }
        None => println!("{text}"),
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn series_json(s: &Series) -> Value {
    serde_json::to_value(s.to_json()).expect("serializable")
}

fn dispatch(cli: Cli) -> Result<(Value, bool), Failure> {
    match cli.cmd {
        Cmd::Gw { genus, dmax } => {
            if dmax == 0 {
                return Err(Failure::Usage("--dmax must be positive".into()));
            }
            let rows = hae::gw_invariants(genus, dmax, None).map_err(comp)?;
            Ok((json!({"g": genus, "rows": rows.iter().map(|r| r.to_json()).collect::<Vec<_>>()}), false))
        }
        Cmd::Gap { genus } => {
            if genus < 2 {
                return Err(Failure::Usage("--genus must be at least 2".into()));
            }
            let r = hae::verify_gap(genus).map_err(comp)?;
            let mut v = r.to_json();
            v["genus"] = json!(genus);
            Ok((v, !r.verified))
        }
        Cmd::Series { name, order } => {
            if order < 3 {
                return Err(Failure::Usage("--order must be at least 3".into()));
            }
            let s = named_series(&name, order)?;
            Ok((series_json(&s), false))
        }
        Cmd::Elliptic { q, report } => elliptic_report(q, report),
        Cmd::TrCheck { genus, q, w_order } => {
            if genus < 2 || q.is_empty() {
                return Err(Failure::Usage("need --genus >= 2 and a non-empty --q list".into()));
            }
            let w = w_order.unwrap_or_else(|| tr::crosscheck_w_order(genus));
            let mut solver = HaeSolver::with_order(genus, w).map_err(comp)?;
            let rep = tr::crosscheck_gap(genus, &q, Some(&mut solver)).map_err(comp)?;
            Ok((rep.to_json(), false))
        }
        Cmd::Simulate { n, t, sweeps, burnin, seed, chains, proposal_scale, out } => {
            let cfg = EnsembleConfig { n, t, sweeps, burnin, proposal_scale, seed: seed.unwrap_or(cli.global_seed), chains };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let spec = coulomb::metropolis_run(&cfg).map_err(comp)?;
            std::fs::write(&out, spec.histogram.to_csv()).map_err(|e| comp(format!("{}: {e}", out.display())))?;
            let frame = elliptic::solve_nome_for_t(t).map_err(comp)?;
            let rep = coulomb::spectrum_stats(&spec, &frame, t).map_err(comp)?;
            Ok((rep.to_json(), false))
        }
        Cmd::VerifyAll { keep_going, only } => {
            let ids: Vec<u32> = if only.is_empty() { verify::CRITERIA.to_vec() } else { only };
            let mut rows = Vec::new();
            let mut failed = false;
            for id in ids {
                let o = verify::run(id).map_err(|e| match e {
                    verify::VerifyError::UnknownCriterion(_) => Failure::Usage(e.to_string()),
                    e => comp(e),
                })?;
                eprintln!("{}", o.line());
                rows.push(o.to_json());
                if !o.passed() {
                    failed = true;
                    if !keep_going {
                        break;
                    }
                }
            }
            Ok((json!({"passed": !failed, "criteria": rows}), failed))
        }
    }
}

fn named_series(name: &str, order: i64) -> Result<Series, Failure> {
    let lr = || mirror::generators_lr(order).map_err(comp);
    let cf = || mirror::frobenius_conifold(order).map_err(comp);
    Ok(match name {
        "C" => lr()?.c,
        "X" => lr()?.x,
        "F" => lr()?.f,
        "Q" => lr()?.q_of_y,
        "qLR" => lr()?.neg_qlr_of_y.neg(),
        "tCF" => cf()?.tcf_of_w,
        "qCF" => cf()?.qcf_of_tcf,
        "F_CF" => cf()?.f_cf,
        other => return Err(Failure::Usage(format!("unknown series {other}; expected one of C, X, F, Q, qLR, tCF, qCF, F_CF"))),
    })
}

fn elliptic_report(q: f64, full: bool) -> Result<(Value, bool), Failure> {
    if !(q > 0.0 && q <= elliptic::Q_MAX) {
        return Err(Failure::Usage(format!("--q must lie in (0, {}]", elliptic::Q_MAX)));
    }
    let fr = EllipticFrame::solve(q).map_err(comp)?;
    let mut v = json!({
        "q": f17(q),
        "tau": {"re": f17(fr.tau.re), "im": f17(fr.tau.im)},
        "zeta": f17(fr.zeta),
        "frakx": f17(fr.frakx),
        "t": f17(fr.t),
        "x_plus": f17(fr.x_plus),
    });
    if full {
        let t2 = fr.t_quadrature(0.35, 4000).re;
        let b1 = fr.mirror_bridge(C::new(0.1, 0.05)).map_err(comp)?;
        let b2 = fr.mirror_bridge(C::new(0.33, -0.02)).map_err(comp)?;
        let s = 0.9 * fr.x_plus;
        let sym = s * fr.density_rho(s).map_err(comp)? - fr.density_rho(1.0 / s).map_err(comp)? / s;
        let u = C::new(0.21, 0.07);
        let th = &fr.theta;
        let qp = (th.eval(u + fr.tau) * q.sqrt() * (C::new(0.0, 2.0 * std::f64::consts::PI) * u).exp() + th.eval(u)).norm()
            / th.eval(u).norm();
        v["checks"] = json!({
            "t_series_rel": f17((fr.t - elliptic::t_series(q)).abs() / fr.t),
            "t_contour_rel": f17((fr.t - t2).abs() / fr.t),
            "theta_quasi_period": f17(qp),
            "bridge_residual": f17(b1.residual.max(b2.residual)),
            "eta_spread": f17((b1.eta - b2.eta).norm()),
            "bridge_y": f17(b1.y.re),
            "density_mass_err": f17((fr.density_mass(400) - 1.0).abs()),
            "density_inversion": f17(sym.abs()),
        });
    }
    Ok((v, false))
}
