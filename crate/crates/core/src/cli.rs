//! Command-line driver.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{RunConfig, OUTPUT_DIR_ENV};
use crate::entropy_audit::{audit_state, EntropyReport};
use crate::error::{Error, Result};
use crate::mms::convergence_study;
use crate::refsol::{loop_field, pipe_coefficients, wire_field, LoopParams, PipeParams, WireParams};
use crate::solver1d::{Boundary, FaceLocation, Field, Solver};
use crate::wall_bc::HeatFlux;
use crate::thermo::prim_from_cons_vec;

#[derive(Parser, Debug)]
#[command(name = "esdg-mhd", version, about = "Entropy-stable DG solver for resistive GLM-MHD with wall boundaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate a configuration, writing audit rows and the final state.
    Run { config: PathBuf },
    /// Run a convergence sweep on successively doubled meshes.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Integrate and check the entropy balance at every accepted step.
    Audit { config: PathBuf },
    /// Sample an analytical reference field.
    #[command(subcommand)]
    Refsol(RefsolCommand),
}

#[derive(Subcommand, Debug)]
pub enum RefsolCommand {
    /// MHD pipe flow on a polar grid.
    Pipe(PipeArgs),
    /// Rectangular wire field on an (x, z) grid.
    Wire(WireArgs),
    /// Current-loop field on an (r, z) grid.
    Loop(LoopArgs),
}

#[derive(Args, Debug)]
pub struct PipeArgs {
    #[arg(long, default_value_t = 5.0)]
    pub ha: f64,
    /// Wall conductance; `inf` for a perfect conductor.
    #[arg(long, default_value = "0")]
    pub c: String,
    #[arg(long, default_value_t = 64)]
    pub nr: usize,
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
    #[arg(long, default_value = "pipe.csv")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct WireArgs {
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 0.2)]
    pub thickness: f64,
    #[arg(long, default_value_t = 1.0)]
    pub current_density: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
    /// Half-width of the symmetric sampling window in x.
    #[arg(long, default_value_t = 2.0)]
    pub extent_x: f64,
    #[arg(long, default_value_t = -2.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = 41)]
    pub nz: usize,
    #[arg(long, default_value = "wire.csv")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct LoopArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 1.0)]
    pub current: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = -2.0)]
    pub z_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 31)]
    pub nr: usize,
    #[arg(long, default_value_t = 41)]
    pub nz: usize,
    #[arg(long, default_value = "loop.csv")]
    pub output: PathBuf,
}

/// Full-precision CSV number.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(",")
}

fn create(dir: &Path, name: impl AsRef<Path>) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn output_dir_default() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub const AUDIT_HEADER: &str = "t,S_total,dSdt,DT,balance,\
left_adv_cons,left_adv_diss,left_visc_cons,left_visc_diss,\
right_adv_cons,right_adv_diss,right_visc_cons,right_visc_diss,\
interface_cons,interface_diss,source,dSdt_fd";

fn audit_row(r: &EntropyReport, dsdt_fd: f64) -> String {
    let mut vals = vec![r.t, r.s_total, r.dsdt, r.dissipation, r.balance];
    for loc in [FaceLocation::Left, FaceLocation::Right] {
        match r.faces.iter().find(|f| f.location == loc) {
            Some(f) => vals.extend([f.advective_cons, f.advective_diss, f.viscous_cons, f.viscous_diss]),
            None => vals.extend([0.0; 4]),
        }
    }
    let interior = r.faces.iter().filter(|f| matches!(f.location, FaceLocation::Interior(_)));
    let (mut cons, mut diss) = (0.0, 0.0);
    for f in interior {
        cons += f.advective_cons + f.viscous_cons;
        diss += f.advective_diss + f.viscous_diss;
    }
    vals.extend([cons, diss, r.source_production + r.forcing_production, dsdt_fd]);
    csv_row(&vals)
}

pub const STATE_HEADER: &str = "element,node,x,rho,v1,v2,v3,T,B1,B2,B3,psi";

fn write_state(out: &mut impl Write, solver: &Solver, u: &Field) -> Result<()> {
    writeln!(out, "{STATE_HEADER}")?;
    let gas = &solver.physics.gas;
    for (e, row) in u.iter().enumerate() {
        for (k, uk) in row.iter().enumerate() {
            let v = prim_from_cons_vec(uk, gas)?;
            let mut vals = vec![solver.mesh.node_x(e, k)];
            vals.extend(v.as_vec().iter());
            writeln!(out, "{e},{k},{}", csv_row(&vals))?;
        }
    }
    Ok(())
}

/// Summary of an audited run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub max_scaled_abs_balance: f64,
    pub max_balance: f64,
    /// Largest scaled mismatch between `dS/dt` and its face/volume breakdown.
    pub max_scaled_breakdown: f64,
    pub dissipation_enabled: bool,
    /// Periodic or adiabatic walls on both sides and no forcing, so `dS/dt + DT` must balance.
    pub closed: bool,
}

impl RunSummary {
    /// Whether the audited run met the entropy checks that apply to it.
    pub fn balanced(&self) -> bool {
        let breakdown_ok = self.max_scaled_breakdown <= 1e-11;
        let balance_ok = if !self.closed {
            true
        } else if self.dissipation_enabled {
            self.max_balance <= 1e-12
        } else {
            self.max_scaled_abs_balance <= 1e-11
        };
        breakdown_ok && balance_ok
    }
}

fn is_closed(b: &Boundary) -> bool {
    match b {
        Boundary::Periodic => true,
        Boundary::Wall(w) => matches!(w.g_heat, HeatFlux::Constant(g) if g == 0.0),
        _ => false,
    }
}

/// Integrates the configuration and streams audit rows; returns the summary and final state.
pub fn run_config(cfg: &RunConfig) -> Result<(RunSummary, Field)> {
    let solver = cfg.solver()?;
    let u0 = cfg.initial_state(&solver)?;
    let dir = cfg.output_dir();
    let prefix = &cfg.output.prefix;
    let mut audit_out = create(&dir, format!("{prefix}_audit.csv"))?;
    writeln!(audit_out, "{AUDIT_HEADER}")?;
    let diss = &solver.physics.diss;
    let mut summary = RunSummary {
        dissipation_enabled: diss.llf_enabled || diss.beta_visc > 0.0 || solver.physics.glm.alpha > 0.0,
        closed: is_closed(&solver.mesh.left) && is_closed(&solver.mesh.right) && solver.forcing.is_none(),
        max_balance: f64::NEG_INFINITY,
        ..Default::default()
    };
    let mut prev: Option<(f64, f64)> = None;
    let mut record = |t: f64, u: &Field, summary: &mut RunSummary| -> Result<()> {
        let (report, _) = audit_state(&solver, u, t)?;
        let fd = match prev {
            Some((tp, sp)) if t > tp => (report.s_total - sp) / (t - tp),
            _ => f64::NAN,
        };
        prev = Some((t, report.s_total));
        summary.max_scaled_abs_balance = summary.max_scaled_abs_balance.max(report.scaled_balance().abs());
        summary.max_balance = summary.max_balance.max(report.balance);
        summary.max_scaled_breakdown = summary
            .max_scaled_breakdown
            .max((report.breakdown_residual() / report.scale()).abs());
        writeln!(audit_out, "{}", audit_row(&report, fd))?;
        Ok(())
    };
    record(0.0, &u0, &mut summary)?;
    let (u, stats) = solver.advance(&u0, 0.0, cfg.t_end, &cfg.method(), |t, u| record(t, u, &mut summary))?;
    summary.steps = stats.accepted;
    audit_out.flush()?;
    let mut state_out = create(&dir, format!("{prefix}_final.csv"))?;
    write_state(&mut state_out, &solver, &u)?;
    state_out.flush()?;
    Ok((summary, u))
}

/// Runs the convergence sweep and writes `<prefix>_convergence.csv`.
pub fn converge_config(cfg: &RunConfig, levels: usize) -> Result<Vec<crate::mms::ConvergenceLevel>> {
    let problem = cfg
        .manufactured()?
        .ok_or_else(|| Error::ConfigError("converge needs a manufactured initial condition".into()))?;
    if levels == 0 {
        return Err(Error::ConfigError("at least one level is required".into()));
    }
    let elements: Vec<usize> = (0..levels).map(|l| cfg.domain.elements << l).collect();
    let table = convergence_study(&problem, cfg.domain.degree, &elements, cfg.t_end, &cfg.method())?;
    let mut out = create(&cfg.output_dir(), format!("{}_convergence.csv", cfg.output.prefix))?;
    writeln!(out, "level,elements,h,error_u,rate_u,error_v2,rate_v2,error_b2,rate_b2")?;
    for (l, row) in table.iter().enumerate() {
        let rate = |r: Option<f64>| r.map(fmt_num).unwrap_or_else(|| "NaN".into());
        writeln!(
            out,
            "{l},{},{},{},{},{},{},{},{}",
            row.elements,
            fmt_num(row.h),
            fmt_num(row.error_u),
            rate(row.rate_u),
            fmt_num(row.error_v2),
            rate(row.rate_v2),
            fmt_num(row.error_b2),
            rate(row.rate_b2)
        )?;
    }
    out.flush()?;
    Ok(table)
}

fn parse_conductance(s: &str) -> Result<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::ConfigError(format!("cannot parse wall conductance '{s}'"))),
    }
}

fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Pipe samples: `r,theta,u,b` (normalised).
pub fn refsol_pipe(args: &PipeArgs, dir: &Path) -> Result<f64> {
    let sol = pipe_coefficients(PipeParams::new(args.ha, parse_conductance(&args.c)?)?)?;
    let mut out = create(dir, &args.output)?;
    writeln!(out, "r,theta,u,b")?;
    let mut u_max: f64 = 0.0;
    for r in grid(0.0, 1.0, args.nr) {
        for j in 0..args.ntheta.max(1) {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / args.ntheta.max(1) as f64;
            let (u, b) = sol.normalized(r, theta)?;
            u_max = u_max.max(u.abs());
            writeln!(out, "{}", csv_row(&[r, theta, u, b]))?;
        }
    }
    out.flush()?;
    Ok(u_max)
}

/// Wire samples: `x,z,Bx,By,Bz,Bz_mirror_sum` where the last column is `B_z(x,z) + B_z(−x,z)`.
pub fn refsol_wire(args: &WireArgs, dir: &Path) -> Result<f64> {
    let prm = WireParams::new(args.width, args.thickness, args.current_density, args.mu0)?;
    let mut out = create(dir, &args.output)?;
    writeln!(out, "x,z,Bx,By,Bz,Bz_mirror_sum")?;
    let mut worst: f64 = 0.0;
    for x in grid(-args.extent_x, args.extent_x, args.nx) {
        for z in grid(args.z_min, args.z_max, args.nz) {
            let b = wire_field(x, z, &prm);
            let mirror = wire_field(-x, z, &prm);
            let anti = b[2] + mirror[2];
            worst = worst.max(anti.abs());
            writeln!(out, "{}", csv_row(&[x, z, b[0], b[1], b[2], anti]))?;
        }
    }
    out.flush()?;
    Ok(worst)
}

/// Loop samples: `r,z,Br,Bz,Bz_axis` where the last column is the on-axis closed form (NaN off axis).
pub fn refsol_loop(args: &LoopArgs, dir: &Path) -> Result<usize> {
    let prm = LoopParams::new(args.radius, args.current, args.mu0)?;
    let mut out = create(dir, &args.output)?;
    writeln!(out, "r,z,Br,Bz,Bz_axis")?;
    let mut skipped = 0;
    for r in grid(0.0, args.r_max, args.nr) {
        for z in grid(args.z_min, args.z_max, args.nz) {
            match loop_field(r, z, &prm) {
                Ok((br, bz)) => {
                    let axis = if r == 0.0 { prm.on_axis(z) } else { f64::NAN };
                    writeln!(out, "{}", csv_row(&[r, z, br, bz, axis]))?;
                }
                Err(Error::OnFilament) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
    }
    out.flush()?;
    Ok(skipped)
}

/// Executes a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config } => {
            let cfg = RunConfig::load(&config)?;
            let (summary, _) = run_config(&cfg)?;
            println!(
                "accepted steps: {}  max |balance| (scaled): {:.3e}  max balance: {:.3e}",
                summary.steps, summary.max_scaled_abs_balance, summary.max_balance
            );
            Ok(0)
        }
        Command::Audit { config } => {
            let cfg = RunConfig::load(&config)?;
            let (summary, _) = run_config(&cfg)?;
            let ok = summary.balanced();
            println!(
                "{}: steps {}  max breakdown residual (scaled) {:.3e}  max |balance| (scaled) {:.3e}  max balance {:.3e}{}",
                if ok { "balanced" } else { "UNBALANCED" },
                summary.steps,
                summary.max_scaled_breakdown,
                summary.max_scaled_abs_balance,
                summary.max_balance,
                if summary.closed { "" } else { "  (open domain: balance bound not applied)" }
            );
            Ok(if ok { 0 } else { 2 })
        }
        Command::Converge { config, levels } => {
            let cfg = RunConfig::load(&config)?;
            let table = converge_config(&cfg, levels)?;
            println!("level elements        h      err(u)   rate     err(v2)   rate     err(B2)   rate");
            for (l, r) in table.iter().enumerate() {
                let rate = |x: Option<f64>| x.map(|v| format!("{v:6.2}")).unwrap_or_else(|| "     -".into());
                println!(
                    "{l:5} {:8} {:8.5} {:11.3e} {} {:11.3e} {} {:11.3e} {}",
                    r.elements,
                    r.h,
                    r.error_u,
                    rate(r.rate_u),
                    r.error_v2,
                    rate(r.rate_v2),
                    r.error_b2,
                    rate(r.rate_b2)
                );
            }
            Ok(0)
        }
        Command::Refsol(sub) => {
            let dir = output_dir_default();
            match sub {
                RefsolCommand::Pipe(a) => {
                    let m = refsol_pipe(&a, &dir)?;
                    println!("max |u'| = {m:.15}");
                }
                RefsolCommand::Wire(a) => {
                    let worst = refsol_wire(&a, &dir)?;
                    println!("antisymmetry check: max |Bz(x)+Bz(-x)| = {worst:.3e} ({})", if worst < 1e-12 { "ok" } else { "FAILED" });
                }
                RefsolCommand::Loop(a) => {
                    let skipped = refsol_loop(&a, &dir)?;
                    println!("skipped {skipped} points on the filament");
                }
            }
            Ok(0)
        }
    }
}
