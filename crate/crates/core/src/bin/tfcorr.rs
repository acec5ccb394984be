use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use tfcorr::atom_energy::{self, HxOverrides};
use tfcorr::config::{RunConfig, SCHEMA_VERSION};
use tfcorr::constants;
use tfcorr::data::{self, fit_all, fit_offset, load_correlation_csv, plot_data_csv};
use tfcorr::dot_energy;
use tfcorr::tf::profile_io::ProfileDump;
use tfcorr::tf::{
    integrated_dos, solve_tf_atom, solve_tf_dot_radial, tf_energy, ConfinementSpec, RadialGrid, ScalingContext,
};
use tfcorr::{Error, Result};

#[derive(Parser)]
#[command(name = "tfcorr", version, about = "Thomas-Fermi profiles, correlation constants and smooth energies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Args)]
struct Common {
    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    /// Extra `key=value` settings.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Thomas-Fermi profiles.
    Tf {
        #[command(subcommand)]
        which: TfCmd,
    },
    /// Universal constants as a JSON array; `verify` checks each against its tolerance.
    Constants {
        #[arg(value_parser = ["verify"])]
        mode: Option<String>,
    },
    /// Atom energies.
    Atom {
        #[command(subcommand)]
        which: AtomCmd,
    },
    /// Dot energies.
    Dot {
        #[command(subcommand)]
        which: DotCmd,
    },
    /// Fit the offset c' to a correlation table.
    Fit {
        /// CSV with header n,label,e_corr_hartree,source.
        #[arg(long)]
        data: PathBuf,
        /// per-lnN or per-lnN^(1/3); both are fitted when omitted.
        #[arg(long)]
        convention: Option<String>,
        #[arg(long)]
        theory_slope: Option<f64>,
        /// Write n,model,data rows for the joint fit (or the chosen convention).
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TfCmd {
    Atom {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        grid_nodes: Option<usize>,
        /// Dump the profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    Dot {
        /// r^2, r^4, r^p:<p>, <c>*r^p:<p> or file:<csv>.
        #[arg(long)]
        potential: Option<String>,
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AtomCmd {
    Corr {
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        x_unknown: Option<f64>,
    },
    Hx {
        #[arg(long)]
        n: Option<f64>,
        #[arg(long)]
        c4: Option<f64>,
        #[arg(long)]
        c3: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
    },
}

#[derive(Subcommand)]
enum DotCmd {
    Energy {
        #[arg(long)]
        potential: Option<String>,
        #[arg(long)]
        n: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

fn build_config(c: &Common, cmd: Option<&Cmd>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &c.config {
        cfg.apply_file(p)?;
    }
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Validation(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.tol {
        cfg.tol = t;
    }
    let Some(cmd) = cmd else {
        cfg.validate()?;
        return Ok(cfg);
    };
    match cmd {
        Cmd::Tf { which: TfCmd::Atom { q, grid_nodes, .. } } => {
            if let Some(q) = q {
                cfg.q = *q;
            }
            if let Some(g) = grid_nodes {
                cfg.grid_nodes = *g;
            }
        }
        Cmd::Tf { which: TfCmd::Dot { potential: Some(p), .. } } => cfg.potential = p.clone(),
        Cmd::Atom { which: AtomCmd::Corr { n, x_unknown } } => {
            if let Some(n) = n {
                cfg.n = *n;
            }
            if let Some(x) = x_unknown {
                cfg.x_unknown = *x;
            }
        }
        Cmd::Atom { which: AtomCmd::Hx { n: Some(n), .. } } => cfg.n = *n,
        Cmd::Dot { which: DotCmd::Energy { potential, n } } => {
            if let Some(p) = potential {
                cfg.potential = p.clone();
            }
            if let Some(n) = n {
                cfg.n = *n;
            }
        }
        Cmd::Fit { convention, theory_slope, .. } => {
            if let Some(c) = convention {
                cfg.slope_convention = c.parse()?;
            }
            if let Some(s) = theory_slope {
                cfg.theory_slope = *s;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Validation(e.to_string()))?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(io_err(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report<T: Serialize>(kind: &str, cfg: &RunConfig, result: &T) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": cfg,
        "result": result,
    })
}

fn atom_grid(cfg: &RunConfig) -> Result<RadialGrid> {
    RadialGrid::logarithmic(cfg.r_min, cfg.r_max, cfg.grid_nodes)
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = build_config(&cli.common, cli.cmd.as_ref())?;
    if cli.common.show_config {
        print!("{}", cfg.to_text());
        return Ok(0);
    }
    let Some(cmd) = &cli.cmd else {
        return Err(Error::Validation("a subcommand is required (see --help)".into()));
    };
    let out = cli.common.out.as_deref();
    let spec = cfg.spec();
    match cmd {
        Cmd::Tf { which: TfCmd::Atom { profile, .. } } => {
            let sol = solve_tf_atom(cfg.q, &atom_grid(&cfg)?, cfg.tol)?;
            let n = cfg.q;
            let ctx = ScalingContext::atom(1.0, n)?;
            let e = tf_energy(&sol, cfg.q, &ctx)?;
            let dos = integrated_dos(&sol, &ctx, sol.mu_global)?;
            if let Some(p) = profile {
                ProfileDump::from_atom(&sol).write(p)?;
            }
            let v = json!({
                "q": sol.q,
                "mu_global": sol.mu_global,
                "origin_coeff": sol.origin_coeff,
                "tail_coeff": sol.tail_coeff,
                "support_radius": sol.support_radius,
                "initial_slope": sol.slope,
                "residual": sol.residual,
                "normalization": sol.normalization(),
                "dos_at_mu": dos,
                "e_tf_scaled": e.scaled,
                "e_tf_hartree_per_z_7_3": e.hartree,
                "grid_size": sol.grid.len(),
            });
            emit(out, &report("tf-atom", &cfg, &v))?;
        }
        Cmd::Tf { which: TfCmd::Dot { profile, .. } } => {
            let conf = ConfinementSpec::parse(&cfg.potential)?;
            let sol = solve_tf_dot_radial(&conf, cfg.tol)?;
            let ctx = ScalingContext::dot(1.0)?;
            let e = tf_energy(&sol, 1.0, &ctx)?;
            if let Some(p) = profile {
                ProfileDump::from_dot(&sol).write(p)?;
            }
            let v = json!({
                "confinement": conf,
                "mu_global": sol.mu_global,
                "support_radius": sol.support_radius,
                "w_prime_at_r": sol.w_prime_at_r,
                "mu_plus_center": sol.mu_plus_at(0.0),
                "residual": sol.residual,
                "normalization": sol.normalization(),
                "e_tf": e.scaled,
                "method": sol.method,
                "grid_size": sol.grid.len(),
            });
            emit(out, &report("tf-dot", &cfg, &v))?;
        }
        Cmd::Constants { mode } => {
            let reports = constants::all_reports(&spec)?;
            let verdicts = constants::verify_reports(&reports);
            let arr: Vec<Value> = reports
                .iter()
                .zip(&verdicts)
                .map(|(r, v)| {
                    let mut obj = serde_json::to_value(r).expect("serializable");
                    obj["schema_version"] = json!(SCHEMA_VERSION);
                    if mode.is_some() {
                        obj["pass"] = json!(v.pass);
                        obj["rule"] = json!(v.rule);
                    }
                    obj
                })
                .collect();
            emit(out, &Value::Array(arr))?;
            if mode.is_some() {
                for v in &verdicts {
                    eprintln!("{} {:22} {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.rule);
                }
                if verdicts.iter().any(|v| !v.pass) {
                    return Ok(3);
                }
            }
        }
        Cmd::Atom { which: AtomCmd::Corr { .. } } => {
            let sol = solve_tf_atom(1.0, &atom_grid(&cfg)?, cfg.tol)?;
            let b = atom_energy::atom_correlation(cfg.n, cfg.n, cfg.x_unknown, &sol, &spec)?;
            emit(out, &report("atom-corr", &cfg, &b))?;
        }
        Cmd::Atom { which: AtomCmd::Hx { c4, c3, c0, .. } } => {
            let hx = atom_energy::atom_smooth_hx(cfg.n, HxOverrides { c4: *c4, c3: *c3, c0: *c0 })?;
            emit(out, &report("atom-hx", &cfg, &hx))?;
        }
        Cmd::Dot { which: DotCmd::Energy { .. } } => {
            let conf = ConfinementSpec::parse(&cfg.potential)?;
            let b = dot_energy::dot_total_energy(cfg.n, &conf, cfg.tol.min(1e-8))?;
            emit(out, &report("dot-energy", &cfg, &b))?;
        }
        Cmd::Fit { data: path, convention, plot_data, .. } => {
            let ds = load_correlation_csv(path)?;
            let v = if convention.is_some() {
                let fit = fit_offset(&ds, cfg.slope_convention, cfg.theory_slope)?;
                if let Some(p) = plot_data {
                    std::fs::write(p, plot_data_csv(&fit)).map_err(io_err(p))?;
                }
                serde_json::to_value(vec![data::FitGroup {
                    subset: "joint".into(),
                    best: fit.slope_convention,
                    fits: vec![fit],
                }])
            } else {
                let groups = fit_all(&ds, cfg.theory_slope)?;
                if let Some(p) = plot_data {
                    let joint = groups.last().expect("non-empty");
                    let best = joint.fits.iter().find(|f| f.slope_convention == joint.best).expect("present");
                    std::fs::write(p, plot_data_csv(best)).map_err(io_err(p))?;
                }
                serde_json::to_value(groups)
            }
            .map_err(|e| Error::Validation(e.to_string()))?;
            emit(out, &report("fit", &cfg, &v))?;
        }
    }
    Ok(0)
}
