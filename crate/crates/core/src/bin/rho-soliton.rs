use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rho_soliton::checks::{self, CHECKS};
use rho_soliton::manifest::{load_manifest, Model};
use rho_soliton::report::Status;
use rho_soliton::walker::{walker_pde_exprs, PDE_LABELS};

#[derive(Parser)]
#[command(name = "rho-soliton", version, about = "Residual verifier for gradient ρ-Einstein solitons")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the checks of a manifest and emit a JSON report.
    Verify {
        manifest: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Run only these checks (repeatable).
        #[arg(long = "check", value_name = "NAME")]
        checks: Vec<String>,
    },
    /// List every check with its kinds and default tolerance.
    ListChecks,
    /// Print derived equations.
    Derive {
        #[command(subcommand)]
        what: Derive,
    },
}

#[derive(Subcommand)]
enum Derive {
    /// The six Walker soliton equations for the manifest's metric function and potential.
    WalkerPde { manifest: PathBuf },
}

const CONFIG_ERROR: u8 = 2;

fn main() -> ExitCode {
    match Cli::parse().cmd {
        Cmd::Verify {
            manifest,
            seed,
            samples,
            report,
            checks,
        } => verify(manifest, seed, samples, report, checks),
        Cmd::ListChecks => {
            for c in CHECKS {
                let kinds: Vec<&str> = c.kinds.iter().map(|k| k.name()).collect();
                println!("{:<30} {:>7.0e}  [{}]  {}", c.name, c.tolerance, kinds.join(","), c.description);
            }
            ExitCode::SUCCESS
        }
        Cmd::Derive {
            what: Derive::WalkerPde { manifest },
        } => derive_walker_pde(manifest),
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(CONFIG_ERROR)
}

fn verify(path: PathBuf, seed: Option<u64>, samples: Option<usize>, out: Option<PathBuf>, names: Vec<String>) -> ExitCode {
    let mut m = match load_manifest(&path) {
        Ok(m) => m,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    if let Some(s) = seed {
        m.seed = s;
    }
    if let Some(n) = samples {
        m.samples = n;
    }
    if !names.is_empty() {
        if let Err(e) = m.select_checks(&names) {
            return config_error(e);
        }
    }
    let report = match checks::run(&m) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let json = report.to_json();
    match &out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &json) {
                return config_error(format!("{}: {e}", p.display()));
            }
        }
        None => print!("{json}"),
    }
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Flagged => "flagged",
        };
        let line = format!("{status:<8} {:<30} max {:.3e}  tol {:.0e}", c.name, c.max_abs_residual, c.tolerance);
        if out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn derive_walker_pde(path: PathBuf) -> ExitCode {
    let m = match load_manifest(&path) {
        Ok(m) => m,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    let Model::Walker(w) = &m.model else {
        return config_error(format!("derive walker-pde needs a `walker` manifest, got `{}`", m.kind.name()));
    };
    let Some(potential) = &m.potential else {
        return config_error("derive walker-pde needs a `potential`");
    };
    match walker_pde_exprs(w, potential) {
        Ok(eqs) => {
            println!("ϕ = {}", w.phi);
            println!("φ = {potential}");
            for (label, e) in PDE_LABELS.iter().zip(eqs.iter()) {
                println!("{label}: {e} = 0");
            }
            ExitCode::SUCCESS
        }
        Err(e) => config_error(e),
    }
}
