use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gmt_epi::cli::{run, Command, RunConfig};
use gmt_epi::io::ChainFile;
use gmt_epi::GmtError;

/// Excess, epiperimetric comparison, moments and flatness scans for
/// polyhedral chains with normed group coefficients.
#[derive(Parser, Debug)]
#[command(name = "gmt-epi", version)]
struct Args {
    /// analyze | excess | epi | moments | scan | probe | verify
    command: String,
    /// Chain file (JSON); falls back to the config's `generator`.
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for <command>.json and <command>.csv; summary goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(args: &Args) -> Result<bool, GmtError> {
    let cmd = Command::parse(&args.command)
        .ok_or_else(|| GmtError::invalid(format!("unknown command `{}`", args.command)))?;
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| GmtError::Io(format!("{}: {e}", p.display())))?;
            RunConfig::from_json(&text)
                .map_err(|e| GmtError::Format(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let chain = args.chain.as_deref().map(ChainFile::read).transpose()?;
    let out = run(cmd, chain.as_ref(), &cfg)?;
    match &args.out {
        Some(dir) => {
            for p in out.report.write(dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&out.report.summary)?),
    }
    Ok(out.gate_failed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = std::env::var("GMT_EPI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("warning: GMT_EPI_THREADS ignored: {e}");
            }
        }
    }
    match execute(&args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_gate_failure() { 2 } else { 1 })
        }
    }
}
