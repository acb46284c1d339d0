//! `bml`: simulation and verification driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bml::cli_io::manifest::{Manifest, SuiteResult};
use bml::cli_io::output::{write_diagnostics, write_flow_map, write_state};
use bml::cli_io::{flow_study, ladder_study, parse_config, verify_all, Fault, RunConfig, Suite};
use bml::lagrangian::{gradient_bound_check, neumann_inverse, DEFAULT_TERMS};
use bml::littlewood_paley::{besov_norm, weighted_shell_sequence, BesovParams};
use bml::measures::{bl_distance, read_measure};
use bml::numfmt::{sci12, sci17};
use bml::solver::{run_with, DiagnosticsRow, RunOptions, StepConfig};
use bml::spectral::snapshot::read_snapshot;
use bml::spectral::Grid;
use bml::BmlError;

const EXIT_SUITE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "bml", version, about = "Boussinesq measure-forcing laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    BonyRemainder,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on a configured scenario.
    Simulate {
        /// Config file; defaults apply when omitted.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Overrides `output.dir`.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the verification suites and write a manifest.
    Verify {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Restrict to these suites (repeatable); overrides the config.
        #[arg(long = "suite")]
        suites: Vec<Suite>,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Besov norm of a field snapshot.
    Besov {
        file: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        /// Summability index; `inf` for the supremum.
        #[arg(long, default_value = "inf")]
        r: f64,
        /// Also print `j, 2^{js} |Delta_j f|_p` per shell.
        #[arg(long)]
        shells: bool,
    },
    /// Flow map of the configured scenario's velocity.
    Flowmap {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Bounded-Lipschitz distance between two measure files.
    Distance { first: PathBuf, second: PathBuf },
    /// Mollification-parameter sweep.
    Ladder {
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>) -> bml::Result<(RunConfig, String)> {
    let text = match path {
        Some(p) => fs::read_to_string(p)?,
        None => String::new(),
    };
    Ok((parse_config(&text)?, text))
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> PathBuf {
    out.unwrap_or_else(|| cfg.output.dir.clone())
}

fn simulate(config: Option<PathBuf>, out: Option<PathBuf>) -> bml::Result<ExitCode> {
    let (cfg, text) = load(config.as_deref())?;
    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir)?;
    let grid = Grid::new(cfg.grid.n, cfg.grid.half_length)?;
    let data = cfg.scenario.initial_data(grid)?;
    let opts = RunOptions::new(cfg.time.t_final, StepConfig::new(cfg.time.dt, cfg.mollify.n)?, cfg.sigma);
    let cadence = cfg.output.cadence;
    let mut rows: Vec<DiagnosticsRow> = Vec::new();
    let mut manifest = Manifest::new(&text);
    let outcome = run_with(&data, &opts, &mut |state, row| {
        rows.push(row.clone());
        if cadence > 0 && row.step % cadence == 0 {
            write_state(&dir, &format!("{:06}", row.step), state)?;
        }
        Ok(())
    });
    write_diagnostics(&dir.join("diagnostics.csv"), &rows)?;
    let mut result = SuiteResult::new("simulate");
    let min = |f: &dyn Fn(&DiagnosticsRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    result.check("l1_identity", min(&|r| 1e-6 - r.l1_residual));
    result.check("positivity", min(&|r| r.theta_min + r.eps_pos));
    result.check("energy", min(&|r| r.energy_margin + r.tol_energy));
    result.check("support", min(&|r| r.support_bound + 1e-8 - r.support_radius));
    let code = match outcome {
        Ok(output) => {
            write_state(&dir, "final", &output.state)?;
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let BmlError::NumericalAbort { last_valid, .. } = &e {
                write_state(&dir, "last_valid", last_valid)?;
            }
            eprintln!("bml: {e}");
            result.passed = false;
            result.detail = e.to_string();
            ExitCode::from(e.exit_code() as u8)
        }
    };
    manifest.push(result);
    manifest.finish();
    manifest.write(&dir.join("manifest.json"))?;
    println!("{} steps, diagnostics in {}", rows.len().saturating_sub(1), dir.display());
    Ok(code)
}

fn verify(
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    suites: Vec<Suite>,
    fault: Option<FaultArg>,
) -> bml::Result<ExitCode> {
    let (mut cfg, text) = load(config.as_deref())?;
    if !suites.is_empty() {
        cfg.suites = Some(suites);
    }
    let dir = out_dir(&cfg, out);
    fs::create_dir_all(&dir)?;
    let fault = match fault {
        Some(FaultArg::BonyRemainder) => Fault::BonyRemainderSign,
        None => Fault::None,
    };
    let manifest = verify_all(&cfg, &text, fault, &dir)?;
    for s in &manifest.suites {
        let status = if s.passed { "pass" } else { "FAIL" };
        println!("{status} {:<11} {:>8.2}s {}", s.name, s.seconds, s.detail);
    }
    Ok(if manifest.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SUITE_FAILURE)
    })
}

fn besov(file: PathBuf, s: f64, p: f64, r: f64, shells: bool) -> bml::Result<ExitCode> {
    let (field, _) = read_snapshot(&mut fs::File::open(file)?)?;
    if shells {
        for (j, w) in weighted_shell_sequence(&field, s, p)? {
            println!("{j},{}", sci17(w));
        }
    }
    println!("{}", sci17(besov_norm(&field, BesovParams::new(s, p, r)?)?));
    Ok(ExitCode::SUCCESS)
}

fn flowmap(config: Option<PathBuf>, out: Option<PathBuf>) -> bml::Result<ExitCode> {
    let (cfg, _) = load(config.as_deref())?;
    let dir = out_dir(&cfg, out);
    let output = flow_study(&cfg)?;
    let fm = output.flow.as_ref().expect("flow requested");
    write_flow_map(&dir.join("flowmap.csv"), fm)?;
    println!("det_defect {}", sci17(fm.max_det_defect()));
    println!("gradient_margin {}", sci17(gradient_bound_check(fm).margin));
    println!("smallness {}", sci17(fm.smallness()));
    if let Ok(inv) = neumann_inverse(fm, DEFAULT_TERMS) {
        println!("neumann_residual_margin {}", sci17(inv.residual_margin()));
    }
    Ok(ExitCode::SUCCESS)
}

fn distance(first: PathBuf, second: PathBuf) -> bml::Result<ExitCode> {
    let mu = read_measure(fs::File::open(first)?)?;
    let nu = read_measure(fs::File::open(second)?)?;
    println!("{}", sci12(bl_distance(&mu, &nu)?));
    Ok(ExitCode::SUCCESS)
}

fn ladder(config: Option<PathBuf>, out: Option<PathBuf>) -> bml::Result<ExitCode> {
    let (cfg, _) = load(config.as_deref())?;
    let dir = out_dir(&cfg, out);
    let rep = ladder_study(&cfg, &dir)?;
    for (n, d) in &rep.cauchy {
        println!("{n} {}", sci17(*d));
    }
    println!("equicontinuity_excess {}", sci17(rep.equicontinuity_excess));
    Ok(if rep.cauchy_decreasing() && rep.equicontinuity_holds() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SUITE_FAILURE)
    })
}

fn configure_threads() {
    if let Some(n) = std::env::var("BML_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Verify {
            config,
            out,
            suites,
            inject_fault,
        } => verify(config, out, suites, inject_fault),
        Command::Besov { file, s, p, r, shells } => besov(file, s, p, r, shells),
        Command::Flowmap { config, out } => flowmap(config, out),
        Command::Distance { first, second } => distance(first, second),
        Command::Ladder { config, out } => ladder(config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bml: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
