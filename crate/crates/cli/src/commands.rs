use crate::config::{RunConfig, Speed};
use frontlab::certificates::{self, CertError, Recipe};
use frontlab::dynamics::{self, DynError, InitialData, SimConfig};
use frontlab::models::{ModelError, ModelSpec};
use frontlab::spectral::{self, SpectralError};
use frontlab::tails::{self, Component, Side, TailError};
use frontlab::waves::{self, Grid, WaveError, WaveProfile, DEFAULT_TOL};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Debug;
use std::fs;
use std::path::PathBuf;
use thiserror::Error;

const DEFAULT_SPEED_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Roots,
    Wave,
    MinSpeed,
    Simulate,
    Classify,
    Certify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Roots => "roots",
            Command::Wave => "wave",
            Command::MinSpeed => "minspeed",
            Command::Simulate => "simulate",
            Command::Classify => "classify",
            Command::Certify => "certify",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Dyn(#[from] DynError),
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

/// Leading identifier of a Debug rendering, i.e. the variant name.
fn variant(e: &impl Debug) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

fn wave_code(e: &WaveError) -> (i32, String) {
    match e {
        WaveError::Spectral(s) => (2, variant(s)),
        WaveError::InvalidGrid(_) | WaveError::Model(_) => (1, variant(e)),
        _ => (3, variant(e)),
    }
}

fn tail_code(e: &TailError) -> (i32, String) {
    match e {
        TailError::Spectral(s) => (2, variant(s)),
        TailError::MissingComponent => (1, variant(e)),
        _ => (3, variant(e)),
    }
}

impl CliError {
    /// Exit code (1 config, 2 math domain, 3 convergence, 4 verification)
    /// and the name of the underlying error.
    pub fn code(&self) -> (i32, String) {
        match self {
            CliError::Config(_) | CliError::Io(_) => (1, variant(self)),
            CliError::Model(e) => (1, variant(e)),
            CliError::Spectral(e) => (2, variant(e)),
            CliError::Wave(e) => wave_code(e),
            CliError::Tail(e) => tail_code(e),
            CliError::Dyn(e) => match e {
                DynError::Wave(w) => wave_code(w),
                DynError::InvalidConfig(_) | DynError::Unordered { .. } => (1, variant(e)),
                DynError::BlowUp { .. } => (2, variant(e)),
                _ => (3, variant(e)),
            },
            CliError::Cert(e) => match e {
                CertError::Wave(w) => wave_code(w),
                CertError::Tail(t) => tail_code(t),
                CertError::Spectral(s) => (2, variant(s)),
                CertError::WrongRecipe { .. } => (1, variant(e)),
                _ => (4, variant(e)),
            },
        }
    }
}

/// Per-run output directory `<dir>/<command>-<hash>`, hashed over the
/// command and the resolved config.
pub fn run_dir(cmd: Command, cfg: &RunConfig) -> PathBuf {
    let mut h = Sha256::new();
    h.update(cmd.name().as_bytes());
    h.update(b"\n");
    h.update(cfg.to_toml().as_bytes());
    let hex = format!("{:x}", h.finalize());
    PathBuf::from(&cfg.output.dir).join(format!("{}-{}", cmd.name(), &hex[..16]))
}

pub struct Run {
    pub cmd: Command,
    pub cfg: RunConfig,
    pub spec: ModelSpec,
    pub dir: PathBuf,
}

impl Run {
    pub fn new(cmd: Command, cfg: RunConfig) -> Result<Self, CliError> {
        cfg.check().map_err(CliError::Config)?;
        let spec = cfg.spec().map_err(CliError::Config)?;
        let dir = run_dir(cmd, &cfg);
        Ok(Run { cmd, cfg, spec, dir })
    }

    fn write(&self, name: &str, text: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir)?;
        fs::write(self.dir.join(name), text)?;
        Ok(())
    }

    /// JSON record with the command and the echoed config.
    fn write_json(&self, name: &str, body: Value) -> Result<(), CliError> {
        let mut rec = json!({
            "command": self.cmd.name(),
            "config": serde_json::to_value(&self.cfg).expect("config serializes"),
        });
        if let (Value::Object(out), Value::Object(extra)) = (&mut rec, body) {
            out.extend(extra);
        }
        self.write(name, &(serde_json::to_string_pretty(&rec).expect("record serializes") + "\n"))
    }

    pub fn execute(&self) -> Result<String, CliError> {
        self.write("config.toml", &self.cfg.to_toml())?;
        match self.cmd {
            Command::Roots => self.roots(),
            Command::Wave => self.wave(),
            Command::MinSpeed => self.minspeed(),
            Command::Simulate => self.simulate(),
            Command::Classify => self.classify(),
            Command::Certify => self.certify(),
        }
    }

    /// Record of a failed run, written next to the config echo.
    pub fn write_error(&self, e: &CliError) {
        let (code, kind) = e.code();
        let _ = self.write_json("error.json", json!({ "exit_code": code, "error": kind, "message": e.to_string() }));
    }

    fn speed_tol(&self) -> f64 {
        self.cfg.options.speed_tol.unwrap_or(DEFAULT_SPEED_TOL)
    }

    fn tol(&self) -> f64 {
        self.cfg.options.tol.unwrap_or(DEFAULT_TOL)
    }

    fn min_speed(&self) -> Result<waves::MinSpeed, CliError> {
        Ok(waves::min_speed(&self.spec, self.speed_tol())?)
    }

    /// Requested speed; `None` with at_minimal.
    fn speed(&self) -> Result<Option<f64>, CliError> {
        if self.cfg.options.at_minimal {
            return Ok(None);
        }
        match self.cfg.speed().map_err(CliError::Config)? {
            Some(Speed::Value(c)) => Ok(Some(c)),
            Some(Speed::Auto) => Ok(Some(spectral::linear_speed(&self.spec)?)),
            Some(Speed::Factor(k)) => Ok(Some(k * self.min_speed()?.c_star)),
            None => Err(CliError::Config(format!("{} needs --c or --at-minimal", self.cmd.name()))),
        }
    }

    fn grid(&self, c: f64) -> Result<Grid, CliError> {
        let o = &self.cfg.options;
        let base = waves::default_grid(&self.spec, c)?;
        let (left, right) = (o.left.unwrap_or(base.left), o.right.unwrap_or(base.right));
        let h = o.h.unwrap_or(base.spacing());
        Ok(Grid::with_spacing(left, right, h)?)
    }

    /// Wave at the requested speed or the minimal wave, with c*.
    fn wave_and_cstar(&self) -> Result<(WaveProfile, f64), CliError> {
        let ms = self.min_speed()?;
        match self.speed()? {
            None => Ok((ms.wave, ms.c_star)),
            Some(c) => Ok((waves::solve_wave(&self.spec, c, &self.grid(c)?, self.tol())?, ms.c_star)),
        }
    }

    fn roots(&self) -> Result<String, CliError> {
        let c = match self.speed()? {
            Some(c) => c,
            None => self.min_speed()?.c_star,
        };
        let rs = spectral::root_set(&self.spec, c)?;
        let residuals: serde_json::Map<String, Value> =
            spectral::root_residuals(&self.spec, &rs).into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        self.write_json("roots.json", json!({ "c": c, "roots": rs, "residuals": residuals }))?;
        let pair = rs.pair().map(|p| format!("{p:?}")).unwrap_or_default();
        Ok(format!("c = {c:.10}, linear speed {:.10}, double root {}, {pair}", rs.linear_speed, rs.double_root))
    }

    fn wave(&self) -> Result<String, CliError> {
        let c = match self.speed()? {
            Some(c) => c,
            None => self.min_speed()?.c_star,
        };
        let w = waves::solve_wave(&self.spec, c, &self.grid(c)?, self.tol())?;
        self.write("wave.csv", &w.to_csv())?;
        self.write_json("wave.json", wave_record(&w))?;
        Ok(format!("wave at c = {c:.10}: residual {:.3e} after {} iterations", w.residual, w.iterations))
    }

    fn minspeed(&self) -> Result<String, CliError> {
        let ms = self.min_speed()?;
        self.write("wave.csv", &ms.wave.to_csv())?;
        self.write_json(
            "minspeed.json",
            json!({
                "c_star": ms.c_star,
                "linear_speed": ms.linear_speed,
                "pulled": ms.pulled,
                "evaluations": ms.evaluations,
                "wave": wave_record(&ms.wave),
            }),
        )?;
        let kind = if ms.pulled { "linear selection" } else { "nonlinear selection" };
        Ok(format!("c* = {:.10} (linear speed {:.10}, {kind})", ms.c_star, ms.linear_speed))
    }

    fn simulate(&self) -> Result<String, CliError> {
        let o = &self.cfg.options;
        let lv = self.spec.lv().is_some();
        let mut sim = SimConfig::for_spec(&self.spec, o.x_left.unwrap_or(-60.0), o.x_right.unwrap_or(100.0), o.t_final.unwrap_or(50.0));
        if let Some(dx) = o.dx {
            sim.dx = dx;
            sim.dt = 0.9 * SimConfig::stable_dt(&self.spec, dx);
        }
        let width = o.width.unwrap_or(5.0);
        let height = o.height.unwrap_or(if lv { 0.5 } else { 1.0 });
        let init = match o.init.as_deref().unwrap_or(if lv { "lv-compact" } else { "bump" }) {
            "step" => InitialData::Step { position: 0.0 },
            "lv-compact" if lv => InitialData::LvCompact { height, half_width: width },
            "bump" => InitialData::Bump { center: 0.0, half_width: width, height },
            other => return Err(CliError::Config(format!("init `{other}` does not fit this model"))),
        };
        let r = dynamics::simulate(&self.spec, &init, &sim)?;
        self.write("fronts.csv", &format!("# front positions at level {}\n{}", sim.level, r.fronts_csv()))?;
        self.write("final.csv", &snapshot_csv(&r.final_state))?;
        self.write_json(
            "simulate.json",
            json!({
                "sim": sim,
                "speed": r.speed,
                "max_violation": r.max_violation,
                "steps": r.steps,
                "samples": r.fronts.len(),
            }),
        )?;
        Ok(match r.speed {
            Some(s) => format!("spreading speed {:.6} +- {:.1e} from {} samples", s.speed, s.stderr, s.samples),
            None => format!("no spreading speed: {} front samples", r.fronts.len()),
        })
    }

    fn classify(&self) -> Result<String, CliError> {
        let (w, c_star) = self.wave_and_cstar()?;
        let window = self.cfg.options.window.map(|[a, b]| (a, b));
        let fit = tails::fit_tail(&w, Side::Right, Component::U, window)?;
        let roots = spectral::root_set(&self.spec, w.c)?;
        let cl = tails::classify(&self.spec, w.c, c_star, &roots, &fit);
        let left = match self.spec.lv() {
            Some(lv) => Some(tails::left_tail_report(&w, lv, w.c)?),
            None => None,
        };
        self.write("wave.csv", &w.to_csv())?;
        self.write("tail.csv", &tail_csv(&w, fit.window))?;
        self.write_json(
            "classification.json",
            json!({
                "model": self.spec,
                "c": w.c,
                "c_star": c_star,
                "roots": roots,
                "fits": [fit],
                "classification": cl,
                "left_tails": left,
            }),
        )?;
        Ok(format!("{:?}: fitted rate {:.6} vs {} = {:.6}", cl.verdict, cl.fitted_rate, cl.expected, cl.expected_rate))
    }

    fn certify(&self) -> Result<String, CliError> {
        let recipe = match &self.cfg.options.recipe {
            Some(r) => Recipe::parse(r).ok_or_else(|| CliError::Config(format!("unknown recipe `{r}`")))?,
            None => Recipe::for_spec(&self.spec),
        };
        let base = match self.speed()? {
            Some(c) => certificates::base_wave(&self.spec, c)?,
            None => self.min_speed()?.wave,
        };
        let cert = match self.cfg.options.delta0 {
            None => certificates::certify(recipe, &self.spec, &base)?,
            Some(d0) => {
                certificates::tail_hypothesis(&self.spec, &base)?;
                let params = certificates::solve_params(recipe, &self.spec, &base, d0)?;
                let profile = certificates::build_supersolution(&self.spec, &base, &params)?;
                let report = certificates::verify_supersolution(&self.spec, &params, &profile)?;
                certificates::Certificate { params, profile, report, attempts: 1 }
            }
        };
        self.write("ledger.txt", &certificates::ledger_table(&cert.params.ledger))?;
        self.write("supersolution.csv", &cert.profile.to_csv())?;
        self.write_json(
            "certificate.json",
            json!({
                "recipe": recipe.name(),
                "c": base.c,
                "attempts": cert.attempts,
                "params": cert.params,
                "report": cert.report,
            }),
        )?;
        if !(cert.report.passed && cert.params.ledger_passed()) {
            let last = cert.report.summary();
            return Err(CliError::Cert(CertError::Exhausted { attempts: cert.attempts, last }));
        }
        Ok(format!(
            "certificate passed at c = {:.6} (c - delta0 = {:.6}) after {} attempt(s), strict: {}",
            base.c, cert.report.c_eff, cert.attempts, cert.report.strict
        ))
    }
}

fn wave_record(w: &WaveProfile) -> Value {
    json!({
        "c": w.c,
        "grid": w.grid,
        "residual": w.residual,
        "iterations": w.iterations,
        "phase": w.phase(),
        "left_state": w.left_state,
        "right_state": w.right_state,
    })
}

fn snapshot_csv(s: &dynamics::Snapshot) -> String {
    let mut out = format!("# t = {:.16e}\n", s.t);
    let xs = s.xs();
    match &s.v {
        None => {
            out.push_str("x,u\n");
            for (x, u) in xs.iter().zip(&s.u) {
                out.push_str(&format!("{x:.16e},{u:.16e}\n"));
            }
        }
        Some(v) => {
            out.push_str("x,u,v\n");
            for ((x, u), v) in xs.iter().zip(&s.u).zip(v) {
                out.push_str(&format!("{x:.16e},{u:.16e},{v:.16e}\n"));
            }
        }
    }
    out
}

/// Two-column plot data: xi against ln W on the fit window.
fn tail_csv(w: &WaveProfile, window: (f64, f64)) -> String {
    let mut out = format!("# right tail of the first component, window [{:.6}, {:.6}]\nxi,lnW\n", window.0, window.1);
    for (x, u) in w.xs().iter().zip(&w.u) {
        if *x >= window.0 && *x <= window.1 && *u > 0.0 {
            out.push_str(&format!("{x:.16e},{:.16e}\n", u.ln()));
        }
    }
    out
}
