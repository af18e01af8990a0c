//! Model families, nonlinearities, dispersal kernels and the preset catalog.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::quad::{gl_rule, integrate_pieces};
use crate::numerics::CubicSpline;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// Panels per half of the kernel support.
const KERNEL_PANELS: usize = 8;

/// Sample count for the positivity check of f on (0, 1).
const POSITIVITY_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// f(w) = w(1 - w)
    Kpp,
    /// f(w) = w(1 - w)(1 + nu w)
    HadelerRothe { nu: f64 },
    /// Natural cubic spline through tabulated values.
    Tabulated(Tabulated),
}

impl Nonlinearity {
    /// Value, first and second derivative at w.
    pub fn eval3(&self, w: f64) -> (f64, f64, f64) {
        match self {
            Nonlinearity::Kpp => cubic(0.0, w),
            Nonlinearity::HadelerRothe { nu } => cubic(*nu, w),
            Nonlinearity::Tabulated(t) => t.spline.eval3(w),
        }
    }

    pub fn f(&self, w: f64) -> f64 {
        match self {
            Nonlinearity::Kpp => w * (1.0 - w),
            Nonlinearity::HadelerRothe { nu } => w * (1.0 - w) * (1.0 + nu * w),
            Nonlinearity::Tabulated(t) => t.spline.eval(w),
        }
    }

    pub fn df(&self, w: f64) -> f64 {
        self.eval3(w).1
    }

    pub fn d2f(&self, w: f64) -> f64 {
        self.eval3(w).2
    }

    pub fn fp0(&self) -> f64 {
        self.df(0.0)
    }

    pub fn fp1(&self) -> f64 {
        self.df(1.0)
    }

    /// True when f(w) <= f'(0) w on the sampled unit interval.
    pub fn is_kpp_type(&self) -> bool {
        let a = self.fp0();
        (1..POSITIVITY_SAMPLES).all(|i| {
            let w = i as f64 / POSITIVITY_SAMPLES as f64;
            self.f(w) <= a * w + 1e-14
        })
    }
}

// w + (nu - 1) w^2 - nu w^3 and derivatives
fn cubic(nu: f64, w: f64) -> (f64, f64, f64) {
    let f = w * (1.0 - w) * (1.0 + nu * w);
    let df = 1.0 + 2.0 * (nu - 1.0) * w - 3.0 * nu * w * w;
    let d2f = 2.0 * (nu - 1.0) - 6.0 * nu * w;
    (f, df, d2f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TabulatedData {
    w: Vec<f64>,
    f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedData", into = "TabulatedData")]
pub struct Tabulated {
    w: Vec<f64>,
    f: Vec<f64>,
    spline: CubicSpline,
}

impl Tabulated {
    pub fn new(w: Vec<f64>, f: Vec<f64>) -> Result<Self, ModelError> {
        if w.len() < 4 || w.len() != f.len() {
            return Err(ModelError::Invalid("tabulated f needs >= 4 matching samples".into()));
        }
        if !w.windows(2).all(|p| p[1] > p[0]) {
            return Err(ModelError::Invalid("tabulated knots must increase".into()));
        }
        if w[0] > 0.0 || *w.last().unwrap() < 1.0 {
            return Err(ModelError::Invalid("tabulated knots must cover [0, 1]".into()));
        }
        let spline = CubicSpline::new(&w, &f);
        Ok(Self { w, f, spline })
    }

    /// Samples `g` at `n + 1` equally spaced points of [0, 1].
    pub fn from_fn(g: impl Fn(f64) -> f64, n: usize) -> Result<Self, ModelError> {
        let w: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let f = w.iter().map(|&x| g(x)).collect();
        Self::new(w, f)
    }
}

impl TryFrom<TabulatedData> for Tabulated {
    type Error = ModelError;
    fn try_from(d: TabulatedData) -> Result<Self, ModelError> {
        Tabulated::new(d.w, d.f)
    }
}

impl From<Tabulated> for TabulatedData {
    fn from(t: Tabulated) -> Self {
        TabulatedData { w: t.w, f: t.f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelShape {
    /// density 1/(2L) on [-L, L]
    Uniform,
    /// density (L - |x|)/L^2 on [-L, L]
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub shape: KernelShape,
    pub half_width: f64,
}

impl Kernel {
    pub fn uniform(half_width: f64) -> Self {
        Self { shape: KernelShape::Uniform, half_width }
    }

    pub fn triangular(half_width: f64) -> Self {
        Self { shape: KernelShape::Triangular, half_width }
    }

    pub fn density(&self, x: f64) -> f64 {
        let l = self.half_width;
        if x.abs() > l {
            return 0.0;
        }
        match self.shape {
            KernelShape::Uniform => 0.5 / l,
            KernelShape::Triangular => (l - x.abs()) / (l * l),
        }
    }

    /// Integral of J over (-inf, x].
    pub fn cdf(&self, x: f64) -> f64 {
        let l = self.half_width;
        if x <= -l {
            return 0.0;
        }
        if x >= l {
            return 1.0;
        }
        match self.shape {
            KernelShape::Uniform => (x + l) / (2.0 * l),
            KernelShape::Triangular => {
                if x <= 0.0 {
                    (x + l).powi(2) / (2.0 * l * l)
                } else {
                    1.0 - (l - x).powi(2) / (2.0 * l * l)
                }
            }
        }
    }

    /// Points where J is not smooth.
    pub fn breakpoints(&self) -> [f64; 3] {
        [-self.half_width, 0.0, self.half_width]
    }

    /// Composite Gauss-Legendre nodes with weights already multiplied by J.
    pub fn quadrature(&self) -> Vec<(f64, f64)> {
        let rule = gl_rule();
        let l = self.half_width;
        let panel = l / KERNEL_PANELS as f64;
        let mut out = Vec::with_capacity(2 * KERNEL_PANELS * rule.len());
        for p in 0..2 * KERNEL_PANELS {
            let mid = -l + (p as f64 + 0.5) * panel;
            for &(x, w) in rule {
                let node = mid + 0.5 * panel * x;
                out.push((node, 0.5 * panel * w * self.density(node)));
            }
        }
        out
    }

    pub fn integral(&self) -> f64 {
        self.quadrature().iter().map(|(_, w)| w).sum()
    }

    /// max |J(x) - J(-x)| over the quadrature nodes.
    pub fn symmetry_error(&self) -> f64 {
        self.quadrature()
            .iter()
            .map(|&(x, _)| (self.density(x) - self.density(-x)).abs())
            .fold(0.0, f64::max)
    }

    /// Integral of x^k J(x) e^{lambda x}.
    pub fn moment(&self, lambda: f64, k: i32) -> f64 {
        self.quadrature().iter().map(|&(x, w)| w * x.powi(k) * (lambda * x).exp()).sum()
    }

    /// Integral of J(x) e^{lambda x}.
    pub fn laplace(&self, lambda: f64) -> f64 {
        self.moment(lambda, 0)
    }

    /// Grid convolution weights for piecewise-linear interpolation of the grid
    /// function: (J * w)(x_i) = sum_k weights[k + m] w_{i-k}. Returns (m, weights).
    /// The weights sum to one exactly because hat functions partition unity.
    pub fn grid_weights(&self, h: f64) -> (usize, Vec<f64>) {
        let l = self.half_width;
        let m = (l / h).ceil() as usize + 1;
        let mut weights = Vec::with_capacity(2 * m + 1);
        for k in -(m as i64)..=(m as i64) {
            let shift = k as f64 * h;
            let mut cuts: Vec<f64> = vec![-h, 0.0, h];
            for b in self.breakpoints() {
                let s = shift - b;
                if s > -h && s < h {
                    cuts.push(s);
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let w = integrate_pieces(&cuts, 1, |s| self.density(shift - s) * (1.0 - s.abs() / h));
            weights.push(w);
        }
        // trim zero ends
        let mut m = m;
        while m > 1 && weights[0] == 0.0 && weights[weights.len() - 1] == 0.0 {
            weights.remove(0);
            weights.pop();
            m -= 1;
        }
        (m, weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvParams {
    pub d: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

impl LvParams {
    /// Competition regime; b within 1e-12 of 1 counts as critical.
    pub fn regime(&self) -> LvRegime {
        if (self.b - 1.0).abs() <= 1e-12 {
            LvRegime::Critical
        } else if self.b > 1.0 {
            LvRegime::Strong
        } else {
            LvRegime::Weak
        }
    }

    /// Left equilibrium (u*, v*).
    pub fn equilibrium(&self) -> (f64, f64) {
        if self.b >= 1.0 || self.regime() == LvRegime::Critical {
            (1.0, 0.0)
        } else {
            let det = 1.0 - self.a * self.b;
            ((1.0 - self.a) / det, (1.0 - self.b) / det)
        }
    }

    /// Reaction terms (u(1-u-av), rv(1-v-bu)).
    pub fn reaction(&self, u: f64, v: f64) -> (f64, f64) {
        (u * (1.0 - u - self.a * v), self.r * v * (1.0 - v - self.b * u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LvRegime {
    /// b > 1
    Strong,
    /// b = 1
    Critical,
    /// b < 1
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    LocalScalar,
    NonlocalScalar,
    LotkaVolterra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    LocalScalar { nonlinearity: Nonlinearity },
    NonlocalScalar { nonlinearity: Nonlinearity, kernel: Kernel },
    LotkaVolterra { lv: LvParams },
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        match self {
            ModelSpec::LocalScalar { .. } => Family::LocalScalar,
            ModelSpec::NonlocalScalar { .. } => Family::NonlocalScalar,
            ModelSpec::LotkaVolterra { .. } => Family::LotkaVolterra,
        }
    }

    pub fn nonlinearity(&self) -> Option<&Nonlinearity> {
        match self {
            ModelSpec::LocalScalar { nonlinearity } | ModelSpec::NonlocalScalar { nonlinearity, .. } => {
                Some(nonlinearity)
            }
            ModelSpec::LotkaVolterra { .. } => None,
        }
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        match self {
            ModelSpec::NonlocalScalar { kernel, .. } => Some(kernel),
            _ => None,
        }
    }

    pub fn lv(&self) -> Option<&LvParams> {
        match self {
            ModelSpec::LotkaVolterra { lv } => Some(lv),
            _ => None,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.lv().is_none()
    }

    /// Left (invaded-by) state and right state of the invading component(s).
    pub fn left_state(&self) -> (f64, f64) {
        match self.lv() {
            Some(lv) => lv.equilibrium(),
            None => (1.0, 0.0),
        }
    }

    pub fn right_state(&self) -> (f64, f64) {
        match self.lv() {
            Some(_) => (0.0, 1.0),
            None => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check { name: name.into(), passed, detail });
    }
}

pub fn validate(spec: &ModelSpec) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if let Some(f) = spec.nonlinearity() {
        validate_nonlinearity(f, &mut rep);
    }
    if let Some(k) = spec.kernel() {
        validate_kernel(k, &mut rep);
    }
    if let Some(lv) = spec.lv() {
        validate_lv(lv, &mut rep);
    }
    rep
}

fn validate_nonlinearity(f: &Nonlinearity, rep: &mut ValidationReport) {
    let f0 = f.f(0.0);
    let f1 = f.f(1.0);
    rep.push("f(0) = 0", f0.abs() < 1e-12, format!("f(0) = {f0:e}"));
    rep.push("f(1) = 0", f1.abs() < 1e-12, format!("f(1) = {f1:e}"));
    let (a, b) = (f.fp0(), f.fp1());
    rep.push("f'(0) > 0", a > 0.0, format!("f'(0) = {a}"));
    rep.push("f'(1) < 0", b < 0.0, format!("f'(1) = {b}"));
    let bad = (1..POSITIVITY_SAMPLES)
        .map(|i| i as f64 / POSITIVITY_SAMPLES as f64)
        .find(|&w| !(f.f(w) > 0.0));
    match bad {
        None => rep.push("f > 0 on (0,1)", true, format!("{} samples positive", POSITIVITY_SAMPLES - 1)),
        Some(w) => rep.push("f > 0 on (0,1)", false, format!("f({w}) = {:e}", f.f(w))),
    }
}

fn validate_kernel(k: &Kernel, rep: &mut ValidationReport) {
    let ok_width = k.half_width.is_finite() && k.half_width > 0.0;
    rep.push("kernel half-width", ok_width, format!("L = {}", k.half_width));
    if !ok_width {
        return;
    }
    let mass = k.integral();
    rep.push("kernel mass", (mass - 1.0).abs() < 1e-10, format!("integral of J = {mass:.15}"));
    let sym = k.symmetry_error();
    rep.push("kernel symmetry", sym < 1e-12, format!("max |J(x) - J(-x)| = {sym:e}"));
    let neg = k.quadrature().iter().map(|&(x, _)| k.density(x)).fold(f64::INFINITY, f64::min);
    rep.push("kernel nonnegative", neg >= 0.0, format!("min J = {neg:e}"));
}

fn validate_lv(lv: &LvParams, rep: &mut ValidationReport) {
    rep.push("d > 0", lv.d > 0.0, format!("d = {}", lv.d));
    rep.push("r > 0", lv.r > 0.0, format!("r = {}", lv.r));
    let a_ok = lv.a > 0.0 && lv.a < 1.0;
    let detail = if a_ok { format!("a = {}", lv.a) } else { format!("a out of (0,1): a = {}", lv.a) };
    rep.push("0 < a < 1", a_ok, detail);
    rep.push("b > 0", lv.b > 0.0, format!("b = {}", lv.b));
    if a_ok && lv.b > 0.0 {
        let (u, v) = lv.equilibrium();
        let inside = (0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v);
        rep.push("equilibrium in unit box", inside, format!("(u*, v*) = ({u}, {v})"));
        let (fu, fv) = lv.reaction(u, v);
        let res = fu.abs().max(fv.abs());
        rep.push("equilibrium residual", res < 1e-12, format!("residual = {res:e}"));
    }
}

/// Catalog entries: name, family, parameters.
pub const PRESETS: [(&str, &str, &str); 6] = [
    ("kpp", "local scalar", "f(w) = w(1-w)"),
    ("hr-nu4", "local scalar", "f(w) = w(1-w)(1+4w)"),
    ("nonlocal-kpp-uniform", "nonlocal scalar", "f(w) = w(1-w), J uniform on [-1,1]"),
    ("lv-strongweak", "Lotka-Volterra", "d=1, r=1, a=0.5, b=2"),
    ("lv-critical", "Lotka-Volterra", "d=1, r=1, a=0.5, b=1"),
    ("lv-weak", "Lotka-Volterra", "d=1, r=1, a=0.5, b=0.5"),
];

pub fn preset(name: &str) -> Result<ModelSpec, ModelError> {
    let lv = |b: f64| ModelSpec::LotkaVolterra { lv: LvParams { d: 1.0, r: 1.0, a: 0.5, b } };
    let spec = match name {
        "kpp" => ModelSpec::LocalScalar { nonlinearity: Nonlinearity::Kpp },
        "hr-nu4" => ModelSpec::LocalScalar { nonlinearity: Nonlinearity::HadelerRothe { nu: 4.0 } },
        "nonlocal-kpp-uniform" => {
            ModelSpec::NonlocalScalar { nonlinearity: Nonlinearity::Kpp, kernel: Kernel::uniform(1.0) }
        }
        "lv-strongweak" => lv(2.0),
        "lv-critical" => lv(1.0),
        "lv-weak" => lv(0.5),
        other => return Err(ModelError::UnknownPreset(other.to_string())),
    };
    debug_assert!(validate(&spec).passed());
    Ok(spec)
}
