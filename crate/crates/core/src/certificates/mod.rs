//! Piecewise super/sub-solution certificates: parameter ledgers, profile
//! construction and pointwise verification of the wave operators.
//!
//! Verification applies the same discrete operators as the wave solvers to
//! the piecewise profile sampled on the base grid, so the base truncation
//! error cancels and only the construction is tested. Junctions sit on nodes.

mod lv;
mod profile;
mod scalar;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelSpec;
use crate::spectral::SpectralError;
use crate::tails::{self, Component, Side, TailError};
use crate::waves::operator::{self, ConvolutionWeights, Derivative};
use crate::waves::{SemiWave, WaveError, WaveProfile};

pub use lv::critical_delta4;
pub use profile::{BaseSamples, Clamp, Modifier, Piece, PiecewiseProfile};

/// Sign checks accept values up to this tolerance.
pub const SIGN_TOL: f64 = 1e-8;
/// Largest allowed jump at a junction.
pub const CONTINUITY_TOL: f64 = 1e-10;
/// Relative tolerance of the slow-decay hypothesis.
pub const HYPOTHESIS_RTOL: f64 = 0.05;
/// Initial speed decrement as a fraction of c.
pub const DELTA0_FRACTION: f64 = 0.02;
pub const MAX_ATTEMPTS: usize = 32;
/// Corners with |margin| below this are reported as tangential.
pub const TANGENTIAL_TOL: f64 = 1e-12;
pub const MIN_PIECE_NODES: usize = 3;
/// Nodes where the profile changes the operator by less than this multiple of
/// the base wave's own discrete residual are reported as below roundoff.
pub const ROUNDOFF_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("slow-decay hypothesis fails: fitted rate {fitted:.6} vs lambda^- = {expected:.6}")]
    HypothesisUnmet { fitted: f64, expected: f64 },
    #[error("ledger infeasible: {0}")]
    LedgerInfeasible(String),
    #[error("profile jumps by {gap:.3e} at xi = {at}")]
    DiscontinuityDetected { at: f64, gap: f64 },
    #[error("piece {piece} has only {nodes} grid nodes")]
    UnresolvedPiece { piece: usize, nodes: usize },
    #[error("sign condition failed: {0}")]
    SignConditionFailed(String),
    #[error("recipe {recipe:?} does not apply: {reason}")]
    WrongRecipe { recipe: Recipe, reason: String },
    #[error("no certificate after {attempts} speed decrements (last: {last})")]
    Exhausted { attempts: usize, last: String },
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Tail(#[from] TailError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    /// Nonlocal scalar super-solution.
    Scalar,
    /// Same construction with diffusion in place of the dispersal operator.
    ScalarLocalAnalog,
    LvBgt1,
    LvBlt1,
    LvBeq1,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Scalar => "scalar",
            Recipe::ScalarLocalAnalog => "scalar-local-analog",
            Recipe::LvBgt1 => "lv-bgt1",
            Recipe::LvBlt1 => "lv-blt1",
            Recipe::LvBeq1 => "lv-beq1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Recipe::Scalar, Recipe::ScalarLocalAnalog, Recipe::LvBgt1, Recipe::LvBlt1, Recipe::LvBeq1]
            .into_iter()
            .find(|r| r.name() == s)
    }

    /// The recipe matching a model.
    pub fn for_spec(spec: &ModelSpec) -> Self {
        use crate::models::LvRegime;
        match spec {
            ModelSpec::LocalScalar { .. } => Recipe::ScalarLocalAnalog,
            ModelSpec::NonlocalScalar { .. } => Recipe::Scalar,
            ModelSpec::LotkaVolterra { lv } => match lv.regime() {
                LvRegime::Strong => Recipe::LvBgt1,
                LvRegime::Weak => Recipe::LvBlt1,
                LvRegime::Critical => Recipe::LvBeq1,
            },
        }
    }

    fn check(self, spec: &ModelSpec) -> Result<(), CertError> {
        if Recipe::for_spec(spec) == self {
            Ok(())
        } else {
            Err(CertError::WrongRecipe { recipe: self, reason: format!("model calls for {}", Recipe::for_spec(spec).name()) })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Lt,
    Gt,
    Eq,
}

/// One checked constraint: lhs (relation) rhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub margin: f64,
    pub passed: bool,
}

impl LedgerEntry {
    pub fn new(name: &str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let (margin, passed) = match relation {
            Relation::Lt => (rhs - lhs, lhs < rhs),
            Relation::Gt => (lhs - rhs, lhs > rhs),
            Relation::Eq => {
                let d = (lhs - rhs).abs();
                (-d, d <= 1e-10 * lhs.abs().max(rhs.abs()) + 1e-300)
            }
        };
        LedgerEntry { name: name.to_string(), lhs, rhs, relation, margin, passed: passed && lhs.is_finite() && rhs.is_finite() }
    }
}

/// Plain-text table of ledger entries.
pub fn ledger_table(entries: &[LedgerEntry]) -> String {
    let mut s = format!("{:<44} {:>14} {:>3} {:>14} {:>12}  verdict\n", "constraint", "lhs", "", "rhs", "margin");
    for e in entries {
        let rel = match e.relation {
            Relation::Lt => "<",
            Relation::Gt => ">",
            Relation::Eq => "=",
        };
        s.push_str(&format!(
            "{:<44} {:>14.6e} {:>3} {:>14.6e} {:>12.3e}  {}\n",
            e.name,
            e.lhs,
            rel,
            e.rhs,
            e.margin,
            if e.passed { "pass" } else { "FAIL" }
        ));
    }
    s
}

/// Resolved recipe parameters. Fields not used by a recipe are None.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct CertificateParams {
    pub recipe: Option<Recipe>,
    pub c: f64,
    pub delta0: f64,
    pub c_eff: f64,
    pub fitted_rate: f64,
    pub expected_rate: f64,
    pub xi_star: Option<f64>,
    pub xi1: f64,
    pub xi2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: Option<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: Option<f64>,
    pub lambda4: Option<f64>,
    pub lambda_star: Option<f64>,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub eps4: f64,
    pub eps5: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub delta_u: Option<f64>,
    pub delta_v: Option<f64>,
    pub theta: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub rho: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub m0: Option<f64>,
    pub m1: Option<f64>,
    /// Left decay rate of 1 - W (scalar).
    pub mu: Option<f64>,
    /// Kernel half-width (0 for the local analog).
    pub l: Option<f64>,
    pub ledger: Vec<LedgerEntry>,
}

impl CertificateParams {
    pub fn ledger_passed(&self) -> bool {
        !self.ledger.is_empty() && self.ledger.iter().all(|e| e.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operator {
    N1,
    N2,
    N3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    /// Super-solution side: operator <= 0.
    NonPositive,
    /// Sub-solution side: operator >= 0.
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerKind {
    /// Right derivative below left derivative.
    Super,
    Sub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub operator: Operator,
    pub name: String,
    pub from: f64,
    pub to: f64,
    pub nodes: usize,
    /// Worst signed value: the maximum for NonPositive, the minimum for NonNegative.
    pub worst: f64,
    pub at: f64,
    pub clamped: bool,
    /// Perturbation effect is below the base wave's residual on every node.
    pub roundoff: bool,
    pub passed: bool,
    pub marginal: bool,
    /// Worst value has the required sign strictly.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerVerdict {
    pub at: f64,
    pub left: f64,
    pub right: f64,
    pub margin: f64,
    pub passed: bool,
    pub tangential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub c_eff: f64,
    pub regions: Vec<RegionReport>,
    pub corners: Vec<CornerVerdict>,
    pub ledger: Vec<LedgerEntry>,
    pub continuity: f64,
    /// All regions, corners and ledger entries pass.
    pub passed: bool,
    /// Every unclamped region is strictly signed and every corner has a positive margin.
    pub strict: bool,
}

impl CertificateReport {
    fn assemble(c_eff: f64, regions: Vec<RegionReport>, corners: Vec<CornerVerdict>, ledger: Vec<LedgerEntry>, continuity: f64) -> Self {
        let passed = regions.iter().all(|r| r.passed) && corners.iter().all(|c| c.passed) && ledger.iter().all(|e| e.passed);
        let strict = passed
            && regions.iter().filter(|r| !r.clamped && !r.roundoff).all(|r| r.strict)
            && corners.iter().all(|c| !c.tangential);
        CertificateReport { c_eff, regions, corners, ledger, continuity, passed, strict }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.regions {
            s.push_str(&format!(
                "{:?} {:<28} [{:>10.4}, {:>10.4}] nodes {:>6} worst {:>12.4e} at {:>9.3}{}{}\n",
                r.operator,
                r.name,
                r.from,
                r.to,
                r.nodes,
                r.worst,
                r.at,
                if r.passed { "" } else { "  FAIL" },
                if r.marginal { "  marginal" } else { "" }
            ));
        }
        for c in &self.corners {
            s.push_str(&format!(
                "corner at {:>10.4}: left {:>12.4e} right {:>12.4e} margin {:>10.3e} {}\n",
                c.at,
                c.left,
                c.right,
                c.margin,
                if c.tangential {
                    "tangential"
                } else if c.passed {
                    "pass"
                } else {
                    "FAIL"
                }
            ));
        }
        s.push_str(&format!("continuity residual {:.3e}\n", self.continuity));
        s.push_str(&format!("overall: {}\n", if self.passed { "pass" } else { "FAIL" }));
        s
    }
}

/// A built super-solution (one profile for scalar models, two for Lotka-Volterra).
#[derive(Debug, Clone, Serialize)]
pub struct Supersolution {
    pub u: PiecewiseProfile,
    pub v: Option<PiecewiseProfile>,
}

impl Supersolution {
    pub fn to_csv(&self) -> String {
        let xs = self.u.base.xs();
        let u = self.u.sample(&xs);
        let junctions: Vec<String> = self.u.junctions.iter().map(|j| format!("{j:.16e}")).collect();
        let mut s = format!("# base speed = {:.16e}\n# junctions = {}\n", self.u.base.speed, junctions.join(" "));
        match &self.v {
            None => {
                s.push_str("xi,W\n");
                for (x, w) in xs.iter().zip(&u) {
                    s.push_str(&format!("{x:.16e},{w:.16e}\n"));
                }
            }
            Some(vp) => {
                let v = vp.sample(&xs);
                s.push_str("xi,U1,V1\n");
                for i in 0..xs.len() {
                    s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", xs[i], u[i], v[i]));
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub params: CertificateParams,
    pub profile: Supersolution,
    pub report: CertificateReport,
    pub attempts: usize,
}

/// Fitted right-tail rate of the first component and lambda^-(c).
pub fn tail_hypothesis(spec: &ModelSpec, base: &WaveProfile) -> Result<(f64, f64), CertError> {
    let fit = tails::fit_tail(base, Side::Right, Component::U, None)?;
    let expected = match spec.lv() {
        Some(lv) => crate::spectral::lv_roots(lv, base.c)?.lambda_u.minus(),
        None => crate::spectral::right_roots(spec, base.c)?.minus(),
    };
    Ok((fit.rate, expected))
}

fn require_hypothesis(spec: &ModelSpec, base: &WaveProfile) -> Result<(f64, f64), CertError> {
    let (fitted, expected) = tail_hypothesis(spec, base)?;
    if (fitted / expected - 1.0).abs() > HYPOTHESIS_RTOL {
        return Err(CertError::HypothesisUnmet { fitted, expected });
    }
    Ok((fitted, expected))
}

/// Resolve every recipe parameter at speed decrement `delta0`, then re-check
/// the full ledger from the stored values.
pub fn solve_params(recipe: Recipe, spec: &ModelSpec, base: &WaveProfile, delta0: f64) -> Result<CertificateParams, CertError> {
    recipe.check(spec)?;
    if base.c != base.c || base.family != spec.family() {
        return Err(CertError::WrongRecipe { recipe, reason: "base profile belongs to another family".into() });
    }
    let hyp = require_hypothesis(spec, base)?;
    let mut p = match recipe {
        Recipe::Scalar | Recipe::ScalarLocalAnalog => scalar::solve(spec, base, delta0)?,
        _ => lv::solve(recipe, spec, base, delta0)?,
    };
    p.recipe = Some(recipe);
    p.fitted_rate = hyp.0;
    p.expected_rate = hyp.1;
    p.ledger = ledger(spec, base, &p)?;
    if let Some(e) = p.ledger.iter().find(|e| !e.passed) {
        return Err(CertError::LedgerInfeasible(format!("{} (margin {:.3e})", e.name, e.margin)));
    }
    Ok(p)
}

/// Independent re-evaluation of every constraint from stored parameters.
pub fn ledger(spec: &ModelSpec, base: &WaveProfile, p: &CertificateParams) -> Result<Vec<LedgerEntry>, CertError> {
    let mut out = vec![LedgerEntry::new(
        "tail hypothesis |fit/lambda^- - 1|",
        (p.fitted_rate / p.expected_rate - 1.0).abs(),
        Relation::Lt,
        HYPOTHESIS_RTOL,
    )];
    match p.recipe {
        Some(Recipe::Scalar) | Some(Recipe::ScalarLocalAnalog) => out.extend(scalar::ledger(spec, base, p)?),
        Some(r) => out.extend(lv::ledger(r, spec, base, p)?),
        None => return Err(CertError::LedgerInfeasible("recipe not set".into())),
    }
    Ok(out)
}

/// Build the piecewise super-solution from a satisfied ledger.
pub fn build_supersolution(spec: &ModelSpec, base: &WaveProfile, p: &CertificateParams) -> Result<Supersolution, CertError> {
    if !p.ledger_passed() {
        return Err(CertError::LedgerInfeasible("parameters carry a failing ledger".into()));
    }
    let s = match p.recipe {
        Some(Recipe::Scalar) | Some(Recipe::ScalarLocalAnalog) => Supersolution { u: scalar::build(base, p), v: None },
        Some(_) => {
            let (u, v) = lv::build(spec, base, p);
            Supersolution { u, v: Some(v) }
        }
        None => unreachable!(),
    };
    s.u.check_continuity()?;
    if let Some(v) = &s.v {
        v.check_continuity()?;
    }
    Ok(s)
}

/// Sub-solution: the semi-wave translated to end at xi1, zero to the right.
pub fn build_subsolution(semi: &SemiWave, xi1: f64) -> PiecewiseProfile {
    let h = semi.grid.spacing();
    let base = BaseSamples { left: semi.grid.left + xi1, h, values: semi.phi.clone(), left_value: 1.0, right_value: 0.0, speed: semi.c };
    PiecewiseProfile {
        junctions: vec![xi1],
        pieces: vec![Piece::base(Modifier::Zero), Piece::free(Modifier::Zero)],
        clamp: Clamp::None,
        base,
    }
}

/// Sampled data on which operators are evaluated.
struct Sampled {
    xs: Vec<f64>,
    h: f64,
    u: Vec<f64>,
    v: Option<Vec<f64>>,
    u_clamped: Vec<bool>,
    v_clamped: Vec<bool>,
    left: (f64, f64),
    right: (f64, f64),
}

fn sample_pair(u: &PiecewiseProfile, v: Option<&PiecewiseProfile>, xs: Vec<f64>, left: (f64, f64), right: (f64, f64)) -> Sampled {
    let (uu, uc) = u.sample_with_clamp(&xs);
    let (vv, vc) = match v {
        Some(p) => {
            let (a, b) = p.sample_with_clamp(&xs);
            (Some(a), b)
        }
        None => (None, vec![false; xs.len()]),
    };
    Sampled { h: u.base.h, xs, u: uu, v: vv, u_clamped: uc, v_clamped: vc, left, right }
}

fn evaluate(op: Operator, spec: &ModelSpec, c: f64, s: &Sampled, scheme: Derivative) -> Vec<f64> {
    match (op, spec) {
        (Operator::N1, ModelSpec::LocalScalar { nonlinearity }) => {
            operator::scalar_residual(nonlinearity, None, c, s.h, &s.u, (s.left.0, s.right.0), scheme)
        }
        (Operator::N1, ModelSpec::NonlocalScalar { nonlinearity, kernel }) => {
            let conv = ConvolutionWeights::new(kernel, s.h);
            operator::scalar_residual(nonlinearity, Some(&conv), c, s.h, &s.u, (s.left.0, s.right.0), scheme)
        }
        (Operator::N2 | Operator::N3, ModelSpec::LotkaVolterra { lv }) => {
            let v = s.v.as_ref().expect("Lotka-Volterra sample without V");
            let (n2, n3) = operator::lv_residual(lv, c, s.h, &s.u, v, s.left, s.right);
            if op == Operator::N2 {
                n2
            } else {
                n3
            }
        }
        _ => panic!("operator {op:?} does not belong to this model"),
    }
}

/// Worst signed value per region. Regions are delimited by `junctions`;
/// junction nodes are left to the corner check, nodes where any component is
/// clamped form their own region, and `trim` nodes at each end are skipped.
fn regions(op: Operator, values: &[f64], noise: Option<(&[f64], &[f64])>, s: &Sampled, junctions: &[f64], sign: Sign, trim: usize) -> Vec<RegionReport> {
    let n = values.len();
    let h = s.h;
    let is_junction = |x: f64| junctions.iter().any(|j| (x - j).abs() < 0.5 * h);
    let mut bounds = vec![f64::NEG_INFINITY];
    bounds.extend_from_slice(junctions);
    bounds.push(f64::INFINITY);
    let mut groups: Vec<(String, f64, f64, Vec<usize>, bool)> = (0..bounds.len() - 1)
        .map(|k| (format!("piece {k}"), bounds[k], bounds[k + 1], Vec::new(), false))
        .collect();
    groups.push(("clamped".into(), f64::NEG_INFINITY, f64::INFINITY, Vec::new(), true));
    let clamp_idx = groups.len() - 1;
    groups.push(("below roundoff".into(), f64::NEG_INFINITY, f64::INFINITY, Vec::new(), true));
    let noise_idx = groups.len() - 1;
    // noise = (operator on the base at c_eff, operator on the base at its own speed)
    let floor = noise.map(|(_, r)| {
        ROUNDOFF_FACTOR * r[trim..n.saturating_sub(trim)].iter().fold(0.0f64, |m, x| m.max(x.abs()))
    });
    for i in trim..n.saturating_sub(trim) {
        let x = s.xs[i];
        if is_junction(x) {
            continue;
        }
        if s.u_clamped[i] || s.v_clamped[i] {
            groups[clamp_idx].3.push(i);
            continue;
        }
        if let (Some((b, _)), Some(fl)) = (noise, floor) {
            if (values[i] - b[i]).abs() <= fl {
                groups[noise_idx].3.push(i);
                continue;
            }
        }
        let k = bounds.partition_point(|b| *b < x) - 1;
        groups[k].3.push(i);
    }
    groups
        .into_par_iter()
        .filter(|g| !g.3.is_empty())
        .map(|(name, from, to, idx, special)| {
            let roundoff = special && name == "below roundoff";
            let clamped = special && !roundoff;
            let pick = |a: f64, b: f64| match sign {
                Sign::NonPositive => a > b,
                Sign::NonNegative => a < b,
            };
            let mut worst = values[idx[0]];
            let mut at = s.xs[idx[0]];
            for &i in &idx {
                if pick(values[i], worst) || values[i].is_nan() {
                    worst = values[i];
                    at = s.xs[i];
                }
            }
            let signed = match sign {
                Sign::NonPositive => worst,
                Sign::NonNegative => -worst,
            };
            let (from, to) = if special { (s.xs[idx[0]], s.xs[*idx.last().unwrap()]) } else { (from.max(s.xs[0]), to.min(s.xs[n - 1])) };
            RegionReport {
                operator: op,
                name,
                from,
                to,
                nodes: idx.len(),
                worst,
                at,
                clamped,
                roundoff,
                passed: signed <= SIGN_TOL,
                marginal: signed > -SIGN_TOL && signed <= SIGN_TOL,
                strict: signed < 0.0,
            }
        })
        .collect()
}

fn trim_for(spec: &ModelSpec, h: f64) -> usize {
    match spec.kernel() {
        Some(k) => ConvolutionWeights::new(k, h).m + 1,
        None => 2,
    }
}

/// Evaluate `op` on the profile(s) at speed c_eff over the base grid.
pub fn verify_operator(
    op: Operator,
    u: &PiecewiseProfile,
    v: Option<&PiecewiseProfile>,
    spec: &ModelSpec,
    c_eff: f64,
    sign: Sign,
) -> Result<Vec<RegionReport>, CertError> {
    let xs = u.base.xs();
    u.check_resolution(&xs)?;
    if let Some(v) = v {
        v.check_resolution(&xs)?;
    }
    let left = (spec.left_state().0, spec.left_state().1);
    let right = (spec.right_state().0, spec.right_state().1);
    let s = sample_pair(u, v, xs, left, right);
    let values = evaluate(op, spec, c_eff, &s, Derivative::Centered);
    // the base wave itself, for the roundoff floor
    let plain = Sampled {
        u: u.base.values.clone(),
        v: v.map(|p| p.base.values.clone()),
        ..sample_pair(u, v, s.xs.clone(), left, right)
    };
    let shifted = evaluate(op, spec, c_eff, &plain, Derivative::Centered);
    let residual = evaluate(op, spec, u.base.speed, &plain, Derivative::Centered);
    let mut junctions = u.junctions.clone();
    if let Some(v) = v {
        junctions.extend_from_slice(&v.junctions);
    }
    junctions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    junctions.dedup();
    Ok(regions(op, &values, Some((&shifted, &residual)), &s, &junctions, sign, trim_for(spec, s.h)))
}

/// One-sided derivative comparison at every junction.
pub fn corner_check(profile: &PiecewiseProfile, kind: CornerKind) -> Vec<CornerVerdict> {
    (0..profile.junctions.len())
        .map(|k| {
            let (left, right) = profile.one_sided_derivatives(k);
            let margin = match kind {
                CornerKind::Super => left - right,
                CornerKind::Sub => right - left,
            };
            let tangential = margin.abs() <= TANGENTIAL_TOL;
            CornerVerdict { at: profile.junctions[k], left, right, margin, passed: margin > 0.0 || tangential, tangential }
        })
        .collect()
}

/// Verify a built super-solution: operator signs, corners and ledger.
pub fn verify_supersolution(spec: &ModelSpec, p: &CertificateParams, s: &Supersolution) -> Result<CertificateReport, CertError> {
    let mut continuity = s.u.continuity_residual();
    let (regions, corners) = match &s.v {
        None => (verify_operator(Operator::N1, &s.u, None, spec, p.c_eff, Sign::NonPositive)?, corner_check(&s.u, CornerKind::Super)),
        Some(v) => {
            continuity = continuity.max(v.continuity_residual());
            let mut r = verify_operator(Operator::N2, &s.u, Some(v), spec, p.c_eff, Sign::NonPositive)?;
            r.extend(verify_operator(Operator::N3, &s.u, Some(v), spec, p.c_eff, Sign::NonNegative)?);
            let mut c = corner_check(&s.u, CornerKind::Super);
            c.extend(corner_check(v, CornerKind::Sub));
            (r, c)
        }
    };
    Ok(CertificateReport::assemble(p.c_eff, regions, corners, p.ledger.clone(), continuity))
}

/// Verify the semi-wave sub-solution for the nonlocal operator at the
/// semi-wave's own speed. Uses the one-sided derivative of the semi-wave solver.
pub fn verify_subsolution(spec: &ModelSpec, semi: &SemiWave, xi1: f64) -> Result<(PiecewiseProfile, CertificateReport), CertError> {
    let (f, kernel) = match spec {
        ModelSpec::NonlocalScalar { nonlinearity, kernel } => (nonlinearity, kernel),
        _ => return Err(CertError::WrongRecipe { recipe: Recipe::Scalar, reason: "sub-solution needs a nonlocal scalar model".into() }),
    };
    let sub = build_subsolution(semi, xi1);
    let h = sub.base.h;
    let m = ConvolutionWeights::new(kernel, h).m;
    let n = semi.phi.len() + m + 4;
    let xs: Vec<f64> = (0..n).map(|i| sub.base.left + i as f64 * h).collect();
    sub.check_resolution(&xs)?;
    let s = sample_pair(&sub, None, xs, (1.0, 0.0), (0.0, 0.0));
    let conv = ConvolutionWeights::new(kernel, h);
    let values = operator::scalar_residual(f, Some(&conv), semi.c, h, &s.u, (1.0, 0.0), Derivative::Forward);
    let regions = regions(Operator::N1, &values, None, &s, &sub.junctions, Sign::NonNegative, 0);
    let corners = corner_check(&sub, CornerKind::Sub);
    let report = CertificateReport::assemble(semi.c, regions, corners, Vec::new(), sub.continuity_residual());
    Ok((sub, report))
}

/// Full pipeline with geometric backoff of the speed decrement: parameters,
/// construction, verification. Succeeds on the first decrement whose
/// certificate is strictly verified.
pub fn certify(recipe: Recipe, spec: &ModelSpec, base: &WaveProfile) -> Result<Certificate, CertError> {
    recipe.check(spec)?;
    require_hypothesis(spec, base)?;
    let mut last = String::new();
    for k in 0..MAX_ATTEMPTS {
        let delta0 = DELTA0_FRACTION * base.c / 2f64.powi(k as i32);
        let params = match solve_params(recipe, spec, base, delta0) {
            Ok(p) => p,
            Err(e @ (CertError::LedgerInfeasible(_) | CertError::SignConditionFailed(_) | CertError::Spectral(_))) => {
                last = e.to_string();
                continue;
            }
            Err(e) => return Err(e),
        };
        let profile = build_supersolution(spec, base, &params)?;
        let report = verify_supersolution(spec, &params, &profile)?;
        if report.strict {
            return Ok(Certificate { params, profile, report, attempts: k + 1 });
        }
        last = report
            .regions
            .iter()
            .filter(|r| !r.clamped && !r.roundoff && !r.strict)
            .map(|r| format!("{:?} {} worst {:.3e} at {:.3}", r.operator, r.name, r.worst, r.at))
            .chain(report.corners.iter().filter(|c| !c.passed || c.tangential).map(|c| format!("corner at {:.3}", c.at)))
            .collect::<Vec<_>>()
            .join("; ");
    }
    Err(CertError::Exhausted { attempts: MAX_ATTEMPTS, last })
}

/// Centered slope of a node-sampled function, one-sided at the ends.
pub(crate) fn node_slope(values: &[f64], h: f64, i: usize) -> f64 {
    let n = values.len();
    if i > 0 && i + 1 < n {
        (values[i + 1] - values[i - 1]) / (2.0 * h)
    } else if i == 0 {
        (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    } else {
        (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
    }
}

/// Effective local decay rate -w'/w (or -(w - limit)'/(w - limit)) at node i.
pub(crate) fn local_rate(values: &[f64], h: f64, i: usize, limit: f64) -> f64 {
    -node_slope(values, h, i) / (values[i] - limit)
}

/// Round to the nearest multiple of h (at least `min` multiples).
pub(crate) fn snap(x: f64, h: f64, min: usize) -> f64 {
    ((x / h).round().max(min as f64)) * h
}

pub(crate) fn snap_down(x: f64, h: f64, min: usize) -> f64 {
    ((x / h + 1e-9).floor().max(min as f64)) * h
}

/// Grid spacing for Lotka-Volterra base waves; the critical recipe needs a
/// few nodes inside its narrowest piece.
pub const LV_CERT_SPACING: f64 = 0.01;
pub const BASE_TOL: f64 = 1e-11;

/// Base wave at speed c on a grid suited to certification.
pub fn base_wave(spec: &ModelSpec, c: f64) -> Result<WaveProfile, CertError> {
    let mut grid = crate::waves::default_grid(spec, c)?;
    if spec.lv().is_some() {
        grid = crate::waves::Grid::with_spacing(grid.left, grid.right, LV_CERT_SPACING)?;
    }
    Ok(crate::waves::solve_wave(spec, c, &grid, BASE_TOL)?)
}
