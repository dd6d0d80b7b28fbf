//! Command-line parsing and dispatch. `main` only initialises logging and
//! maps [`Failure`] to an exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use otfs_cdrt::protocol::Scheme;

use crate::config::{Config, ConfigError, SweepConfig};
use crate::plot::{detect_kind, plot_outage, plot_sum_rate, CsvKind};
use crate::sweep::{outage_rows, read_csv, run_sweep, sum_rate_rows, write_csv};
use crate::validate::{validate, TOLERANCE};

#[derive(Parser)]
#[command(name = "otfs-cdrt", version, about = "OTFS-NOMA CDRT outage sweeps, CF validation and plots")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used for anything not given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads for Monte Carlo (overrides the config).
    #[arg(long, env = "OTFS_CDRT_WORKERS")]
    workers: Option<usize>,
    /// Monte Carlo trials per point (overrides the config).
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Outage per signal versus SNR, analytic and simulated.
    SweepOutage {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        /// Skip Monte Carlo.
        #[arg(long)]
        analytic_only: bool,
    },
    /// Outage sum rate versus SNR, analytic and simulated.
    SweepSumrate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        analytic_only: bool,
    },
    /// Compare the inverted Theta CDF of each link with model samples.
    ValidateCf {
        #[command(flatten)]
        common: Common,
        /// SNR at which the scenario is built; Theta does not depend on it.
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
    },
    /// Render a sweep CSV as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("error: {0:#}")]
    Other(#[from] anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Other(_) => 1,
            Failure::Validation(_) => 2,
        }
    }
}

fn load(common: &Common) -> Result<SweepConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(w) = common.workers {
        cfg.monte_carlo.workers = Some(w);
    }
    if let Some(t) = common.trials {
        cfg.monte_carlo.trials = t;
    }
    if let Some(s) = common.seed {
        cfg.monte_carlo.seed = s;
    }
    Ok(cfg.resolve()?)
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut impl std::io::Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Other(e.into());
    match cli.command {
        Command::SweepOutage { common, out: path, analytic_only } => {
            let cfg = load(&common)?;
            let rows = outage_rows(&run_sweep(&cfg, !analytic_only)?);
            ensure_parent(&path)?;
            write_csv(&path, &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display()).map_err(io)?;
        }
        Command::SweepSumrate { common, out: path, analytic_only } => {
            let cfg = load(&common)?;
            let rows = sum_rate_rows(&run_sweep(&cfg, !analytic_only)?);
            ensure_parent(&path)?;
            write_csv(&path, &rows)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display()).map_err(io)?;
        }
        Command::ValidateCf { common, snr_db } => {
            let cfg = load(&common)?;
            let s = cfg.scenario(snr_db, Scheme::Proposed);
            let mut failed = Vec::new();
            for c in validate(&s, &cfg.mc)? {
                writeln!(
                    out,
                    "{:<6} G={:<4} sup-norm {:.5} (tol {TOLERANCE})  detuned control {:.5}  {}",
                    c.link.name(),
                    c.groups,
                    c.sup_norm,
                    c.control_sup_norm,
                    if c.passed() { "ok" } else { "FAIL" }
                )
                .map_err(io)?;
                if !c.passed() {
                    failed.push(c.link.name());
                }
            }
            if !failed.is_empty() {
                return Err(Failure::Validation(format!("links failed: {}", failed.join(", "))));
            }
        }
        Command::Plot { input, out: dir } => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or("sweep".into());
            let target = dir.join(format!("{stem}.svg"));
            match detect_kind(&input)? {
                CsvKind::Outage => plot_outage(&read_csv(&input)?, &target)?,
                CsvKind::SumRate => plot_sum_rate(&read_csv(&input)?, &target)?,
            }
            writeln!(out, "wrote {}", target.display()).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::sweep::{OutageRow, SumRateRow};

    const SMALL: &str = r#"
[channel]
case = "special"
[sweep]
snr_db = [0.0, 10.0, 20.0]
[monte_carlo]
trials = 500
seed = 7
"#;

    fn exec(args: &[&str]) -> (Result<(), Failure>, String) {
        let cli = Cli::try_parse_from(std::iter::once("otfs-cdrt").chain(args.iter().copied())).unwrap();
        let mut out = Vec::new();
        let result = run(cli, &mut out);
        (result, String::from_utf8(out).unwrap())
    }

    fn write_config(dir: &Path, text: &str) -> String {
        let path = dir.join("cfg.toml");
        std::fs::write(&path, text).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn small() -> SweepConfig {
        Config::from_toml(SMALL, "small").unwrap().resolve().unwrap()
    }

    #[test]
    fn outage_csv_round_trips_and_matches_library() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), SMALL);
        let out = dir.path().join("outage.csv");
        exec(&["sweep-outage", "--config", &cfg, "--out", out.to_str().unwrap()]).0.unwrap();
        let from_disk: Vec<OutageRow> = read_csv(&out).unwrap();
        assert_eq!(from_disk, outage_rows(&run_sweep(&small(), true).unwrap()));
    }

    #[test]
    fn sum_rate_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), SMALL);
        let out = dir.path().join("nested").join("sr.csv");
        exec(&["sweep-sumrate", "--config", &cfg, "--out", out.to_str().unwrap(), "--analytic-only"]).0.unwrap();
        let from_disk: Vec<SumRateRow> = read_csv(&out).unwrap();
        assert_eq!(from_disk, sum_rate_rows(&run_sweep(&small(), false).unwrap()));
        assert!(from_disk.iter().all(|r| r.sr_mc.is_none()));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), SMALL);
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        exec(&["sweep-outage", "--config", &cfg, "--out", a.to_str().unwrap(), "--workers", "1"]).0.unwrap();
        exec(&["sweep-outage", "--config", &cfg, "--out", b.to_str().unwrap(), "--workers", "4"]).0.unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn plot_writes_svg_for_both_sweeps() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), SMALL);
        let figs = dir.path().join("figs");
        for (cmd, name) in [("sweep-outage", "outage"), ("sweep-sumrate", "sumrate")] {
            let csv = dir.path().join(format!("{name}.csv"));
            exec(&[cmd, "--config", &cfg, "--out", csv.to_str().unwrap()]).0.unwrap();
            let (r, report) = exec(&["plot", "--in", csv.to_str().unwrap(), "--out", figs.to_str().unwrap()]);
            r.unwrap();
            assert!(report.contains(&format!("{name}.svg")));
            let svg = std::fs::read_to_string(figs.join(format!("{name}.svg"))).unwrap();
            assert!(svg.contains("<svg") && svg.contains("<polyline"), "{name}");
        }
    }

    #[test]
    fn plot_refuses_empty_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("empty.csv");
        std::fs::write(&csv, "snr_db,scheme,signal,p_analytic,p_mc,ci95,trials\n").unwrap();
        let err = exec(&["plot", "--in", csv.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]).0.unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("no outage rows"), "{err}");
        assert!(!dir.path().join("empty.svg").exists());
    }

    #[test]
    fn validate_cf_passes_with_enough_samples() {
        let (r, report) = exec(&["validate-cf", "--trials", "200000", "--seed", "5"]);
        r.unwrap();
        assert_eq!(report.lines().filter(|l| l.contains("sup-norm") && l.ends_with("ok")).count(), 4, "{report}");
    }

    #[test]
    fn validate_cf_fails_with_too_few_samples() {
        // 200 samples cannot resolve the CDF to 0.01
        let err = exec(&["validate-cf", "--trials", "200"]).0.unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("validation failed"));
    }

    #[test]
    fn bad_config_exits_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), "[power]\nalpha_c = 0.7\nalpha_e = 0.3\n");
        let err = exec(&["sweep-outage", "--config", &cfg, "--out", dir.path().join("x.csv").to_str().unwrap()])
            .0
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("config error") && err.to_string().contains("power.alpha_c"), "{err}");

        let cfg = write_config(dir.path(), "[frame]\nm = -3\n");
        let err = exec(&["validate-cf", "--config", &cfg]).0.unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("line 2"), "{err}");

        assert_eq!(main_with(["otfs-cdrt", "no-such-command"]), 1);
        assert_eq!(main_with(["otfs-cdrt", "--help"]), 0);
    }

    #[test]
    fn worker_env_var_is_read() {
        // the only test that sets the variable; other tests pass --workers explicitly or ignore it
        std::env::set_var("OTFS_CDRT_WORKERS", "3");
        let cli = Cli::try_parse_from(["otfs-cdrt", "validate-cf"]).unwrap();
        std::env::remove_var("OTFS_CDRT_WORKERS");
        let Command::ValidateCf { common, .. } = cli.command else { panic!("wrong subcommand") };
        assert_eq!(load(&common).unwrap().mc.parallelism, Some(3));
    }
}
