use frontlab::models::{self, Kernel, LvParams, ModelSpec, Nonlinearity};
use serde::{Deserialize, Serialize};

pub const DEFAULT_OUT: &str = "runs";

/// Run configuration: three flat sections, no deeper nesting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub options: Options,
    #[serde(default)]
    pub output: OutputSection,
}

/// Either a preset name or inline parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// local-scalar, nonlocal-scalar or lotka-volterra
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// kpp or hadeler-rothe
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// uniform or triangular
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Number, "auto" (linear speed) or "<k>x" (k times c*).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub at_minimal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
    /// Wave grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Residual tolerance of the wave solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Bisection tolerance on c*.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_tol: Option<f64>,
    /// Tail fit window [from, to].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Fixed speed decrement for certify (no backoff).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Simulation domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_left: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_right: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    /// bump, step or lv-compact
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: DEFAULT_OUT.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    Value(f64),
    /// Linear spreading speed.
    Auto,
    /// Multiple of the minimal speed.
    Factor(f64),
}

pub fn parse_speed(s: &str) -> Result<Speed, String> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Speed::Auto);
    }
    let (num, factor) = match s.strip_suffix(['x', 'X']) {
        Some(n) => (n, true),
        None => (s, false),
    };
    let v: f64 = num.trim().parse().map_err(|_| format!("bad speed `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("speed `{s}` is not finite"));
    }
    if factor {
        if v <= 0.0 {
            return Err(format!("speed factor `{s}` must be positive"));
        }
        Ok(Speed::Factor(v))
    } else {
        Ok(Speed::Value(v))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn speed(&self) -> Result<Option<Speed>, String> {
        self.options.c.as_deref().map(parse_speed).transpose()
    }

    /// Range checks on every numeric field.
    pub fn check(&self) -> Result<(), String> {
        let o = &self.options;
        let positive = [("h", o.h), ("tol", o.tol), ("speed_tol", o.speed_tol), ("delta0", o.delta0), ("t_final", o.t_final), ("dx", o.dx), ("height", o.height), ("width", o.width)];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("{name} = {v} must be positive"));
                }
            }
        }
        if let (Some(l), Some(r)) = (o.left, o.right) {
            if !(l < r) {
                return Err(format!("grid [{l}, {r}] is empty"));
            }
        }
        if let (Some(l), Some(r)) = (o.x_left, o.x_right) {
            if !(l < r) {
                return Err(format!("domain [{l}, {r}] is empty"));
            }
        }
        if let Some([a, b]) = o.window {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(format!("window [{a}, {b}] is empty"));
            }
        }
        if let Some(h) = o.height {
            if h > 1.0 {
                return Err(format!("height = {h} exceeds 1"));
            }
        }
        if o.at_minimal && o.c.is_some() {
            return Err("at_minimal and c are exclusive".into());
        }
        if let Some(init) = &o.init {
            if !["bump", "step", "lv-compact"].contains(&init.as_str()) {
                return Err(format!("unknown init `{init}`"));
            }
        }
        self.speed()?;
        if self.output.dir.is_empty() {
            return Err("output dir is empty".into());
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<ModelSpec, String> {
        let m = &self.model;
        let inline = m.family.is_some()
            || m.nonlinearity.is_some()
            || m.nu.is_some()
            || m.kernel.is_some()
            || m.half_width.is_some()
            || [m.d, m.r, m.a, m.b].iter().any(Option::is_some);
        let spec = match (&m.preset, inline) {
            (Some(_), true) => return Err("give either a preset or inline parameters, not both".into()),
            (Some(p), false) => models::preset(p).map_err(|e| e.to_string())?,
            (None, false) => return Err("no model: set a preset or a family".into()),
            (None, true) => inline_spec(m)?,
        };
        let rep = models::validate(&spec);
        if !rep.passed() {
            let why: Vec<String> = rep.failures().map(|c| format!("{} ({})", c.name, c.detail)).collect();
            return Err(format!("invalid model: {}", why.join("; ")));
        }
        Ok(spec)
    }
}

fn inline_spec(m: &ModelSection) -> Result<ModelSpec, String> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| format!("missing model parameter `{name}`"));
    let nonlinearity = || match m.nonlinearity.as_deref().unwrap_or("kpp") {
        "kpp" => Ok(Nonlinearity::Kpp),
        "hadeler-rothe" => Ok(Nonlinearity::HadelerRothe { nu: need(m.nu, "nu")? }),
        other => Err(format!("unknown nonlinearity `{other}`")),
    };
    match m.family.as_deref() {
        Some("local-scalar") => Ok(ModelSpec::LocalScalar { nonlinearity: nonlinearity()? }),
        Some("nonlocal-scalar") => {
            let w = m.half_width.unwrap_or(1.0);
            let kernel = match m.kernel.as_deref().unwrap_or("uniform") {
                "uniform" => Kernel::uniform(w),
                "triangular" => Kernel::triangular(w),
                other => return Err(format!("unknown kernel `{other}`")),
            };
            Ok(ModelSpec::NonlocalScalar { nonlinearity: nonlinearity()?, kernel })
        }
        Some("lotka-volterra") => Ok(ModelSpec::LotkaVolterra {
            lv: LvParams { d: need(m.d, "d")?, r: need(m.r, "r")?, a: need(m.a, "a")?, b: need(m.b, "b")? },
        }),
        Some(other) => Err(format!("unknown family `{other}`")),
        None => Err("inline model needs a family".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speeds_parse() {
        assert_eq!(parse_speed("2.2"), Ok(Speed::Value(2.2)));
        assert_eq!(parse_speed("auto"), Ok(Speed::Auto));
        assert_eq!(parse_speed("1.2x"), Ok(Speed::Factor(1.2)));
        assert!(parse_speed("fast").is_err());
        assert!(parse_speed("-1x").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = RunConfig {
            model: ModelSection { family: Some("lotka-volterra".into()), d: Some(1.0), r: Some(2.0), a: Some(0.5), b: Some(2.0), ..Default::default() },
            options: Options { c: Some("1.2x".into()), window: Some([5.0, 20.0]), seed: Some(3), ..Default::default() },
            output: OutputSection { dir: "out".into() },
        };
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
        assert!(cfg.spec().is_ok());
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(RunConfig::from_toml("[model]\npreset = 'kpp'\ncolour = 1\n").is_err());
        let mut cfg = RunConfig::from_toml("[model]\npreset = 'kpp'\n").unwrap();
        assert!(cfg.spec().is_ok());
        cfg.model.d = Some(1.0);
        assert!(cfg.spec().is_err());
        let cfg = RunConfig::from_toml("[model]\nfamily = 'local-scalar'\nnonlinearity = 'hadeler-rothe'\n").unwrap();
        assert!(cfg.spec().unwrap_err().contains("nu"));
        let cfg = RunConfig::from_toml("[model]\npreset = 'kpp'\n[options]\nh = -1.0\n").unwrap();
        assert!(cfg.check().is_err());
        let cfg = RunConfig::from_toml("[model]\nfamily = 'lotka-volterra'\nd = 1.0\nr = 1.0\na = 1.5\nb = 2.0\n").unwrap();
        assert!(cfg.spec().is_err());
    }
}
