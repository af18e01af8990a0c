mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::{CliError, Command, Run};
use config::RunConfig;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "frontlab", version, about = "Traveling fronts: roots, waves, minimal speeds, simulation, tail classification and certificates")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Characteristic roots at a speed
    Roots(Common),
    /// Traveling wave at a speed
    Wave(Common),
    /// Minimal wave speed
    Minspeed(Common),
    /// Cauchy problem and spreading speed
    Simulate(Common),
    /// Tail fit and pulled/pushed/noncritical verdict
    Classify(Common),
    /// Super-solution certificate for a noncritical wave
    Certify(Common),
}

/// Flags override the config file.
#[derive(Args, Default)]
struct Common {
    /// TOML config with [model], [options] and [output] sections
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Speed: a number, `auto` (linear speed) or `<k>x` (k times c*)
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    /// Use the minimal speed c*
    #[arg(long)]
    at_minimal: bool,
    #[arg(long)]
    recipe: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    left: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    right: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    speed_tol: Option<f64>,
    /// Tail window as `from,to`
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    window: Option<Vec<f64>>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_left: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_right: Option<f64>,
    #[arg(long)]
    dx: Option<f64>,
    /// bump, step or lv-compact
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    height: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Parent of the per-run output directories
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                RunConfig::from_toml(&text).map_err(CliError::Config)?
            }
            None => RunConfig::default(),
        };
        if let Some(p) = self.preset {
            cfg.model = config::ModelSection { preset: Some(p), ..Default::default() };
        }
        let o = &mut cfg.options;
        if self.c.is_some() {
            o.c = self.c;
            o.at_minimal = false;
        }
        if self.at_minimal {
            o.at_minimal = true;
            o.c = None;
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if self.$f.is_some() { o.$f = self.$f; } )* };
        }
        set!(recipe, left, right, h, tol, speed_tol, delta0, t_final, x_left, x_right, dx, init, height, width, seed);
        if let Some(w) = self.window {
            o.window = Some([w[0], w[1]]);
        }
        if let Some(out) = self.out {
            cfg.output.dir = out.to_string_lossy().into_owned();
        }
        Ok(cfg)
    }
}

fn run(cmd: Command, common: Common) -> Result<(), (Option<Run>, CliError)> {
    let cfg = common.resolve().map_err(|e| (None, e))?;
    let run = Run::new(cmd, cfg).map_err(|e| (None, e))?;
    match run.execute() {
        Ok(summary) => {
            // a closed pipe is not an error of the run
            let _ = writeln!(std::io::stdout(), "{summary}\noutput: {}", run.dir.display());
            Ok(())
        }
        Err(e) => Err((Some(run), e)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let (cmd, common) = match cli.cmd {
        Cmd::Roots(c) => (Command::Roots, c),
        Cmd::Wave(c) => (Command::Wave, c),
        Cmd::Minspeed(c) => (Command::MinSpeed, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Classify(c) => (Command::Classify, c),
        Cmd::Certify(c) => (Command::Certify, c),
    };
    match run(cmd, common) {
        Ok(()) => ExitCode::SUCCESS,
        Err((run, e)) => {
            let (code, kind) = e.code();
            if let Some(run) = &run {
                run.write_error(&e);
                eprintln!("output: {}", run.dir.display());
            }
            eprintln!("error [{kind}]: {e}");
            ExitCode::from(code as u8)
        }
    }
}
