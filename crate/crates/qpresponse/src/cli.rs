//! Command-line orchestration.
//!
//! Exit codes form a stable scripting contract: `0` success, `1` input or
//! config error, `2` mathematical failure (no convergence, no real branch,
//! resonances found by check-frequency, ...).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::operators::estimate_diophantine;
use crate::problem::SolveMode;
use crate::report::{get_float, get_int, parse_tree, solve_report_tree, ReportTree};
use crate::solver::{
    monodromy_continuation, solve_oscillator, solve_response, solve_zero_average, SolveReport,
};
use crate::verify::{residual_norm, rk4_shadow, scaling_study};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_MATH: i32 = 2;

#[derive(Parser)]
#[command(
    name = "qpr",
    about = "Quasi-periodic response solutions of degenerately forced systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write the report and coefficients.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve over an epsilon list and fit the scaling laws.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        epsilons: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continue the solution along a loop of complex epsilon.
    Monodromy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        loops: u32,
        #[arg(long, default_value_t = 128)]
        steps: usize,
        /// Good-region half-aperture: |Im eps| <= cone |Re eps|.
        #[arg(long, default_value_t = 0.5)]
        cone: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure realized Diophantine constants of the frequency vector.
    CheckFrequency {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the residual (and shadowing) checks on a saved report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    let quiet = cli.quiet;
    match cli.command {
        Command::Solve { config, out } => cmd_solve(&config, out.as_deref(), quiet),
        Command::Sweep {
            config,
            epsilons,
            out,
        } => cmd_sweep(&config, &epsilons, out.as_deref(), quiet),
        Command::Monodromy {
            config,
            alpha,
            loops,
            steps,
            cone,
            out,
        } => cmd_monodromy(&config, alpha, loops, steps, cone, out.as_deref(), quiet),
        Command::CheckFrequency {
            config,
            etas,
            taus,
            out,
        } => cmd_check_frequency(
            &config,
            etas.as_deref(),
            taus.as_deref(),
            out.as_deref(),
            quiet,
        ),
        Command::Verify { config, out } => cmd_verify(&config, out.as_deref(), quiet),
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) | Error::ValidationFailed(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_MATH,
    }
}

fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("qpr_out"))
}

fn config_echo(tree: &mut ReportTree, cfg: &RunConfig) {
    tree.put_int("problem.l", cfg.problem.l() as i64);
    tree.put_int("problem.d", cfg.problem.dim_torus() as i64);
    tree.put_int("problem.n", cfg.problem.dim_state() as i64);
    for (i, w) in cfg.problem.omega().iter().enumerate() {
        tree.put_float(&format!("problem.omega.{i}"), *w);
    }
    tree.put_complex("problem.epsilon", cfg.problem.epsilon());
    if let Some(delta) = cfg.problem.delta() {
        tree.put_float("problem.delta", delta);
    }
}

fn run_configured_solve(cfg: &RunConfig) -> Result<SolveReport> {
    match cfg.problem.mode() {
        SolveMode::Response => {
            solve_response(&cfg.problem, cfg.truncation, &cfg.norm, &cfg.contraction)
        }
        SolveMode::ZeroAverage => {
            solve_zero_average(&cfg.problem, cfg.truncation, &cfg.norm, &cfg.contraction)
        }
        SolveMode::Oscillator => {
            solve_oscillator(&cfg.problem, cfg.truncation, &cfg.norm, &cfg.contraction)
        }
        SolveMode::Monodromy => Err(Error::Config(
            "mode = monodromy: use the `monodromy` subcommand".into(),
        )),
    }
}

fn write_solve_outputs(dir: &Path, cfg: &RunConfig, report: &SolveReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tree = ReportTree::new();
    config_echo(&mut tree, cfg);
    for (k, v) in solve_report_tree(report).render().lines().filter_map(|l| {
        l.split_once(" = ")
            .map(|(a, b)| (a.to_string(), b.to_string()))
    }) {
        tree.put_str(&k, &v);
    }
    tree.write_to(&dir.join("solve_report.txt"))?;
    std::fs::write(dir.join("v_coefficients.txt"), report.v.dump_string())?;
    if let Some(u) = &report.u {
        std::fs::write(dir.join("u_coefficients.txt"), u.dump_string())?;
    }
    Ok(())
}

pub fn cmd_solve(config_path: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let validation = cfg.problem.validate(cfg.truncation);
    if !validation.passed() {
        eprintln!("error: {}", validation.failure_summary());
        return EXIT_CONFIG;
    }
    let report = match run_configured_solve(&cfg) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(&cfg, out);
    if let Err(e) = write_solve_outputs(&dir, &cfg, &report) {
        return report_error(&e);
    }
    if !quiet {
        let a = report.a[0];
        println!(
            "converged in {} iterations: a = {:.6e}{:+.6e}i, lambda_hat = {:.3e}, residual sup = {:.3e}",
            report.iterations, a.re, a.im, report.lambda_hat, report.residual.sup
        );
        println!("report written to {}", dir.display());
    }
    EXIT_OK
}

pub fn cmd_sweep(config_path: &Path, epsilons: &[f64], out: Option<&Path>, quiet: bool) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    // deterministic output ordering: descending magnitude
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let report = match scaling_study(
        &cfg.problem,
        &eps,
        cfg.truncation,
        &cfg.norm,
        &cfg.contraction,
    ) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(&cfg, out);
    if let Err(e) = std::fs::create_dir_all(&dir).map_err(Error::from) {
        return report_error(&e);
    }
    // per-epsilon reports
    for (i, &e_val) in eps.iter().enumerate().take(report.rows.len()) {
        let sub = dir.join(format!("eps_{i}"));
        let cfg_e = RunConfig {
            problem: cfg.problem.clone().with_epsilon(Complex64::new(e_val, 0.0)),
            ..cfg.clone()
        };
        match run_configured_solve(&cfg_e) {
            Ok(r) => {
                if let Err(err) = write_solve_outputs(&sub, &cfg_e, &r) {
                    return report_error(&err);
                }
            }
            Err(err) => return report_error(&err),
        }
    }
    let table = report.table_string();
    let fit = report.fit_string();
    if let Err(e) = std::fs::write(dir.join("sweep_table.txt"), table).map_err(Error::from) {
        return report_error(&e);
    }
    if let Err(e) = std::fs::write(dir.join("scaling_fit.txt"), fit).map_err(Error::from) {
        return report_error(&e);
    }
    if let Some(failure) = &report.failure {
        eprintln!("sweep aborted: {failure}");
        return EXIT_MATH;
    }
    if !quiet {
        if let Some(fit) = &report.fit {
            println!(
                "slopes: |a| ~ eps^{:.6}, op_norm ~ eps^{:.6}, ||V|| ~ eps^{:.6}",
                fit.slope_a, fit.slope_op_norm, fit.slope_v
            );
        }
        println!("sweep written to {}", dir.display());
    }
    EXIT_OK
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_monodromy(
    config_path: &Path,
    alpha: f64,
    loops: u32,
    steps: usize,
    cone: f64,
    out: Option<&Path>,
    quiet: bool,
) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let report = match monodromy_continuation(
        &cfg.problem,
        cfg.truncation,
        &cfg.norm,
        &cfg.contraction,
        alpha,
        loops,
        steps,
        cone,
    ) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(&cfg, out);
    if let Err(e) = std::fs::create_dir_all(&dir).map_err(Error::from) {
        return report_error(&e);
    }
    if let Err(e) = std::fs::write(dir.join("monodromy_path.txt"), report.path_table_string())
        .map_err(Error::from)
    {
        return report_error(&e);
    }
    let mut summary = ReportTree::new();
    summary.put_str("format", "qpr-monodromy-v1");
    summary.put_int("loops", loops as i64);
    summary.put_int("steps_per_loop", steps as i64);
    summary.put_float("alpha", alpha);
    summary.put_float("cone_constant", cone);
    summary.put_complex("ratio", report.ratio);
    summary.put_float("ratio.arg", report.ratio.arg());
    let good = report.steps.iter().filter(|s| s.in_good_region).count();
    summary.put_int("steps.good_region", good as i64);
    summary.put_int("steps.total", report.steps.len() as i64);
    if let Err(e) = summary.write_to(&dir.join("monodromy_summary.txt")) {
        return report_error(&e);
    }
    if !quiet {
        println!(
            "a(end)/a(start) = {:.12e}{:+.12e}i (arg {:.6})",
            report.ratio.re,
            report.ratio.im,
            report.ratio.arg()
        );
        println!("path written to {}", dir.display());
    }
    EXIT_OK
}

pub fn cmd_check_frequency(
    config_path: &Path,
    etas: Option<&[f64]>,
    taus: Option<&[f64]>,
    out: Option<&Path>,
    quiet: bool,
) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let default_etas = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];
    let d = cfg.problem.dim_torus() as f64;
    let default_taus = [d - 0.5, d, d + 1.0];
    let etas = etas.unwrap_or(&default_etas);
    let taus = taus.unwrap_or(&default_taus);
    let table = match estimate_diophantine(cfg.problem.omega(), cfg.truncation, etas, taus) {
        Ok(t) => t,
        Err(e) => {
            // a resonance is the mathematical outcome here
            eprintln!("error: {e}");
            return match e {
                Error::ResonantMode { .. } => EXIT_MATH,
                _ => report_error(&e),
            };
        }
    };
    let dir = out_dir(&cfg, out);
    if let Err(e) = std::fs::create_dir_all(&dir).map_err(Error::from) {
        return report_error(&e);
    }
    if let Err(e) =
        std::fs::write(dir.join("frequency_table.txt"), table.table_string()).map_err(Error::from)
    {
        return report_error(&e);
    }
    if !quiet {
        print!("{}", table.table_string());
        println!("table written to {}", dir.display());
    }
    EXIT_OK
}

pub fn cmd_verify(config_path: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let cfg = match load_config(config_path) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(&cfg, out);
    let inner = || -> Result<(ReportTree, bool)> {
        let text = std::fs::read_to_string(dir.join("solve_report.txt"))?;
        let tree = parse_tree(&text)?;
        let n = get_int(&tree, "leading.dim")? as usize;
        let mut a = Vec::with_capacity(n);
        for i in 0..n {
            a.push(Complex64::new(
                get_float(&tree, &format!("leading.a.{i}.re"))?,
                get_float(&tree, &format!("leading.a.{i}.im"))?,
            ));
        }
        let tail = get_float(&tree, "tail.max")?;
        let v_text = std::fs::read_to_string(dir.join("v_coefficients.txt"))?;
        let v = FourierSeries::read_dump(
            cfg.problem.dim_torus(),
            cfg.problem.dim_state(),
            cfg.truncation,
            v_text.as_bytes(),
        )?;
        let corr = if cfg.problem.mode() == SolveMode::ZeroAverage {
            let u_text = std::fs::read_to_string(dir.join("u_coefficients.txt"))?;
            let u = FourierSeries::read_dump(
                cfg.problem.dim_torus(),
                1,
                cfg.truncation,
                u_text.as_bytes(),
            )?;
            v.scale(cfg.problem.epsilon()).add(&u)?
        } else {
            v.clone()
        };
        let residual = residual_norm(&cfg.problem, &a, &corr, cfg.grid_size)?;
        let bound = 1e-9f64.max(100.0 * tail);
        let ok = residual.sup <= bound;

        let mut vr = ReportTree::new();
        vr.put_str("format", "qpr-verify-v1");
        vr.put_float("residual.sup", residual.sup);
        vr.put_float("residual.l2", residual.l2);
        vr.put_int("residual.samples", residual.samples as i64);
        vr.put_float("residual.bound", bound);
        vr.put_str("residual.within_bound", if ok { "true" } else { "false" });
        vr.put_float("recorded.residual_sup", get_float(&tree, "residual.sup")?);

        // shadow the first-order scalar solutions
        if cfg.problem.dim_state() == 1
            && matches!(cfg.problem.mode(), SolveMode::Response)
            && cfg.problem.epsilon().im == 0.0
        {
            let shadow = rk4_shadow(&cfg.problem, a[0], &corr, 20.0, 1e-3)?;
            vr.put_float("shadow.sup_deviation", shadow.sup_deviation);
            vr.put_str(
                "shadow.direction",
                if shadow.backward {
                    "backward"
                } else {
                    "forward"
                },
            );
            vr.put_int("shadow.steps", shadow.steps as i64);
        }
        vr.write_to(&dir.join("verify_report.txt"))?;
        Ok((vr, ok))
    };
    match inner() {
        Ok((tree, ok)) => {
            if !quiet {
                print!("{}", tree.render());
            }
            if ok {
                EXIT_OK
            } else {
                eprintln!("error: residual exceeds the truncation-permitted bound");
                EXIT_MATH
            }
        }
        Err(e) => report_error(&e),
    }
}
