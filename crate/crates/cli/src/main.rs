use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corner_penalty::corner::{EpsPolicy, ScaledParams};
use corner_penalty::harness::studies::{asymptotic_report, convergence_study, phase_portrait};
use corner_penalty::harness::{
    parse_config, simulate_full, write_csv, Mode, Overrides, SimConfig, Table,
};
use corner_penalty::{Error, Result};

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 invalid input or configuration, 3 numeric failure.

Config files hold one `key = value` per line; `#` starts a comment.";

#[derive(Parser)]
#[command(name = "corner-penalty", version, about = "Penalty approximation of a particle hitting a corner", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Penalty stiffness (selects physical mode).
    #[arg(long)]
    k: Option<f64>,
    /// Radius scale in (0, 1) (selects scaled mode).
    #[arg(long)]
    eta: Option<f64>,
    /// Corner opening angle in (0, pi).
    #[arg(long = "theta-bar", allow_negative_numbers = true)]
    theta_bar: Option<f64>,
    /// Output CSV; stdout when neither this nor `output` in the config is set.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Full trajectory: closed-form face-1 phase, corner phase, face-2 phase.
    #[command(after_help = "CSV columns:
  t      physical time
  u1,u2  position
  v1,v2  velocity
  phase  R1-phase | corner | R3-phase

Needs physical mode (`k` in the config or --k).")]
    Simulate(Common),
    /// Distance to the infinitely stiff limit over `k_list` (or the single --k).
    #[command(after_help = "CSV columns:
  k                stiffness
  sup_error        sup over [0, T] of |u_k - u_inf|
  sup_late_norm    sup over [t0 + 0.1, T] of |u_k|
  exit_time        time the corner phase ends (NaN if it does not)
  min_face_offset  smallest distance outside face 2 after the corner (NaN if no face phase)
  order            fitted slope of log sup_error against log(1/sqrt(k))

T is `horizon` (default 2 t0).")]
    Converge(Common),
    /// Corner motion against the two inner asymptotic layers over `eta_list` (or the single --eta).
    #[command(
        name = "asym-report",
        after_help = "CSV columns:
  eta                    radius scale
  tau1, tau3             ends of the first and second layers
  first_error            max |R - R1| / R1 on [0, tau1]
  first_rate_error       max |R' - R1'| / |R1'| on [eta^3, tau1]
  second_error           max |R - R2| / R2 on [tau1, tau3]
  tau_bar                first time the angle reaches theta_bar (NaN if never)
  exit_ratio             tau_bar / tau_bar_est, acute corners only
  tau3_radius_ratio      R(tau3) / R_est(tau3), obtuse corners only
  second_kernel_sup      largest second-layer kernel integral on [tau1, tau3]
  delta_numeric          sup of the first-layer kernel integral on [0, 1]
  delta_analytic         its closed-form value
  momentum_drift         max |R^2 Theta' - sqrt(E)(1 - eps)|
  lyapunov_max_increase  largest relative step increase of F
  plus_margin_min        min of R' - xi1 R after tau1
  first_order, first_rate_order, second_order  fitted eta orders
  gamma1                 first-layer exponent"
    )]
    AsymReport(Common),
    /// Radial vector field on a grid plus the equilibrium.
    #[command(
        name = "phase-portrait",
        after_help = "CSV columns:
  R, dR              grid point
  field_R, field_dR  (R', R'') of the radial flow
  critical           1 for the equilibrium row, 0 otherwise

The grid is `grid_n` x `grid_n` over [r_min, r_max] x [dr_min, dr_max]."
    )]
    PhasePortrait(Common),
}

fn load(common: &Common) -> Result<SimConfig> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", common.config.display()))
    })?;
    let mut cfg = parse_config(&text)?;
    cfg.apply(&Overrides {
        k: common.k,
        eta: common.eta,
        theta_bar: common.theta_bar,
        out: common.out.clone(),
    })?;
    Ok(cfg)
}

fn emit(table: &Table, cfg: &SimConfig) -> Result<()> {
    match &cfg.output {
        Some(path) => write_csv(table, path),
        None => {
            let text = table.to_csv_string()?;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let sim = simulate_full(&cfg)?;
            let tr = &sim.trajectory;
            eprintln!(
                "{} samples, momentum drift {:.3e}, exit time {}",
                tr.samples.len(),
                tr.momentum_drift,
                tr.exit_time
                    .map_or("none".to_string(), |t| format!("{t:.12}"))
            );
            emit(&tr.to_table(), &cfg)
        }
        Command::Converge(c) => {
            let cfg = load(&c)?;
            let ks = c.k.map_or_else(|| cfg.k_list.clone(), |k| vec![k]);
            let rep = convergence_study(&cfg, &ks, cfg.horizon_time()?)?;
            if !rep.monotone {
                eprintln!("warning: errors are not monotone in k");
            }
            emit(&rep.to_table(), &cfg)
        }
        Command::AsymReport(c) => {
            let cfg = load(&c)?;
            let etas = c.eta.map_or_else(|| cfg.eta_list.clone(), |e| vec![e]);
            let rep = asymptotic_report(&cfg, &etas)?;
            emit(&rep.to_table(cfg.gamma1), &cfg)
        }
        Command::PhasePortrait(c) => {
            let cfg = load(&c)?;
            let damping = cfg.damping()?;
            let params = match cfg.mode {
                Some(Mode::Physical { k }) => ScaledParams::from_physical(&cfg.init, &damping, k)?,
                Some(Mode::Scaled { eta, eps }) => {
                    ScaledParams::direct(eta, eps, &cfg.init, &damping)?
                }
                None => ScaledParams::direct(0.5, EpsPolicy::Value(0.0), &cfg.init, &damping)?,
            };
            let table = phase_portrait(
                params.energy,
                params.eps,
                &damping,
                cfg.r_range,
                cfg.dr_range,
                cfg.grid_n,
            )?;
            emit(&table, &cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
