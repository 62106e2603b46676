//! Experiment configuration, read from TOML or JSON.
//!
//! ```toml
//! schema = "rlv1"
//!
//! [experiment]
//! kind = "ito"
//! regime = "smooth"
//! alpha = 1.8
//! steps = 65536
//! seeds = 256
//! ```

use std::path::Path;

use rloc_core::frac_calc::{Base, Side};
use rloc_core::ito_verify::ItoRegime;
use rloc_core::Analytic;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: &str = "rlv1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema: String,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Simulate(SimulateConfig),
    Localtime(LocalTimeConfig),
    Pvar(PvarConfig),
    Fraccalc(FracCalcConfig),
    Young(YoungConfig),
    Roughlift(RoughLiftConfig),
    Ito(ItoRunConfig),
}

fn one() -> f64 {
    1.0
}
fn default_steps() -> usize {
    1 << 16
}
fn default_threshold() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub alpha: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub seed: u64,
    /// CSV (time, value).
    #[serde(default)]
    pub out: Option<String>,
    /// Binary "RLSP" dump.
    #[serde(default)]
    pub binary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTimeConfig {
    pub alpha: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Default 2(t/steps)^{1/α}.
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// Explicit grid; default covers the path range at half the bandwidth.
    #[serde(default)]
    pub grid_lo: Option<f64>,
    #[serde(default)]
    pub grid_hi: Option<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    /// Window for the modulus-of-continuity ratio.
    #[serde(default)]
    pub barlow_delta: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvarConfig {
    /// CSV (x, value).
    pub input: String,
    pub p: f64,
    /// Exponent of the dyadic bound; default p − 1 + 1e-6.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FracOp {
    /// Riemann–Liouville integral of the given order.
    Rl,
    /// Grünwald–Letnikov derivative, left or right.
    Derivative,
    /// Riesz derivative of order α.
    Riesz,
    /// Δ^{α/2} with α = order.
    Laplacian,
    /// ∇^{α−1} with α = order.
    Gradient,
    /// ρ_n ∗ f.
    Mollify,
    /// c_α, C_α, 𝒜(1,−α) and the calibrated Lévy constant over a grid of α.
    Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracCalcConfig {
    pub op: FracOp,
    /// Closed-form input; ignored when `input` is set.
    #[serde(default)]
    pub function: Option<Analytic>,
    /// Sampled input, CSV (x, value) on a uniform grid.
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default = "one")]
    pub order: f64,
    #[serde(default = "default_side")]
    pub side: Side,
    #[serde(default = "default_base")]
    pub base: Base,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Mollifier index n.
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default)]
    pub grid_lo: Option<f64>,
    #[serde(default)]
    pub grid_hi: Option<f64>,
    #[serde(default)]
    pub grid_n: Option<usize>,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_side() -> Side {
    Side::Left
}
fn default_base() -> Base {
    Base::Zero
}
fn default_epsilon() -> f64 {
    1e-3
}
fn default_n() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungConfig {
    /// Integrand, CSV (x, value).
    pub f: String,
    /// Integrator, CSV (x, value) on the same grid.
    pub g: String,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// w₁(a, b) = b − a.
    Length,
    /// w₁ = total variation of L and g, plus length.
    Variation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoughLiftConfig {
    /// Local-time field, CSV (x, L). Simulated from the path settings below
    /// when absent.
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    /// The integrand g; default the Gaussian.
    #[serde(default)]
    pub function: Option<Analytic>,
    /// Variation exponent of g, for the regime report and the θ default.
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub levels: Option<usize>,
    #[serde(default = "default_mmax")]
    pub mmax: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_control")]
    pub control: ControlKind,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_mmax() -> u32 {
    10
}
fn default_tol() -> f64 {
    1e-6
}
fn default_control() -> ControlKind {
    ControlKind::Length
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItoRunConfig {
    pub regime: ItoRegime,
    pub alpha: f64,
    /// Default: e^{−x²} in the smooth regime, |x| otherwise.
    #[serde(default)]
    pub function: Option<Analytic>,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Number of paths.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Path i uses seed base_seed XOR i.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub bandwidth: Option<f64>,
    #[serde(default)]
    pub spacing: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default = "one")]
    pub delta: f64,
    /// Keep the per-path reports in the output.
    #[serde(default)]
    pub per_path: bool,
    #[serde(default)]
    pub out: Option<String>,
}

fn default_seeds() -> usize {
    256
}

impl Config {
    pub fn new(experiment: Experiment) -> Self {
        Config { schema: SCHEMA.to_string(), experiment }
    }

    /// Parses TOML or JSON, chosen by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let trimmed = text.trim_start();
        if trimmed.is_empty() {
            return Err(CliError::Schema("empty configuration".into()));
        }
        let cfg: Config = if trimmed.starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA {
            return Err(CliError::Schema(format!("unsupported schema {:?}, expected {SCHEMA:?}", self.schema)));
        }
        let bad = |m: &str| Err(CliError::Schema(m.to_string()));
        match &self.experiment {
            Experiment::Simulate(c) => {
                if c.steps < 1 {
                    return bad("steps must be at least 1");
                }
            }
            Experiment::Localtime(c) => {
                let given = [c.grid_lo.is_some(), c.grid_hi.is_some(), c.grid_n.is_some()];
                if given.iter().any(|&g| g) && !given.iter().all(|&g| g) {
                    return bad("grid_lo, grid_hi and grid_n go together");
                }
                if c.grid_n.is_some_and(|n| n < 2) {
                    return bad("grid_n must be at least 2");
                }
            }
            Experiment::Fraccalc(c) => {
                if c.op != FracOp::Constants && c.function.is_none() && c.input.is_none() {
                    return bad("fraccalc needs a function or an input file");
                }
                if c.grid_n.is_some_and(|n| n < 2) {
                    return bad("grid_n must be at least 2");
                }
            }
            Experiment::Roughlift(c) => {
                if c.field.is_none() && c.alpha.is_none() {
                    return bad("roughlift needs a field file or alpha to simulate one");
                }
                if let Some(l) = c.levels {
                    if !(2..=3).contains(&l) {
                        return bad("levels must be 2 or 3");
                    }
                }
            }
            Experiment::Ito(c) => {
                if c.seeds == 0 {
                    return bad("seeds must be at least 1");
                }
            }
            Experiment::Pvar(_) | Experiment::Young(_) => {}
        }
        Ok(())
    }

    /// The configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

/// Short form of a closed-form function: `gaussian`, `abs`, `cos[:freq[:phase]]`,
/// `exp[:rate]`, `abs_power:γ`, `constant:c`, `affine:slope:intercept`,
/// `poly:c0:c1:…`, `piecewise_linear:x0,y0:x1,y1:…`.
pub fn parse_function(spec: &str) -> Result<Analytic, CliError> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or("").trim();
    let rest: Vec<&str> = parts.collect();
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim().parse::<f64>().map_err(|_| CliError::Schema(format!("bad number {s:?} in function {spec:?}")))
    };
    let nums = || rest.iter().map(|s| num(s)).collect::<Result<Vec<f64>, CliError>>();
    let arity = |lo: usize, hi: usize| {
        if rest.len() < lo || rest.len() > hi {
            Err(CliError::Schema(format!("function {name:?} takes {lo}..={hi} parameters")))
        } else {
            Ok(())
        }
    };
    let f = match name {
        "gaussian" => {
            arity(0, 0)?;
            Analytic::Gaussian
        }
        "abs" => {
            arity(0, 0)?;
            Analytic::Abs
        }
        "cos" => {
            arity(0, 2)?;
            let v = nums()?;
            Analytic::Cos { freq: v.first().copied().unwrap_or(1.0), phase: v.get(1).copied().unwrap_or(0.0) }
        }
        "exp" => {
            arity(0, 1)?;
            Analytic::Exp { rate: nums()?.first().copied().unwrap_or(1.0) }
        }
        "abs_power" => {
            arity(1, 1)?;
            Analytic::AbsPower { gamma: nums()?[0] }
        }
        "constant" => {
            arity(1, 1)?;
            Analytic::Constant { c: nums()?[0] }
        }
        "affine" => {
            arity(2, 2)?;
            let v = nums()?;
            Analytic::Affine { slope: v[0], intercept: v[1] }
        }
        "poly" => {
            arity(1, usize::MAX)?;
            Analytic::Poly { coeffs: nums()? }
        }
        "piecewise_linear" => {
            arity(2, usize::MAX)?;
            let mut knots = Vec::new();
            let mut values = Vec::new();
            for r in &rest {
                let (x, y) = r
                    .split_once(',')
                    .ok_or_else(|| CliError::Schema(format!("knot {r:?} is not x,y")))?;
                knots.push(num(x)?);
                values.push(num(y)?);
            }
            if knots.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Schema("knots must increase".into()));
            }
            Analytic::PiecewiseLinear { knots, values }
        }
        _ => return Err(CliError::Schema(format!("unknown function {name:?}"))),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let text = r#"
schema = "rlv1"
[experiment]
kind = "ito"
regime = "young"
alpha = 1.8
function = { kind = "abs" }
seeds = 8
"#;
        let c = Config::parse(text).unwrap();
        match &c.experiment {
            Experiment::Ito(i) => {
                assert_eq!(i.regime, ItoRegime::Young);
                assert_eq!(i.function, Some(Analytic::Abs));
                assert_eq!(i.steps, 1 << 16);
            }
            e => panic!("{e:?}"),
        }
        assert_eq!(Config::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn json_accepted() {
        let c = Config::parse(r#"{"schema":"rlv1","experiment":{"kind":"pvar","input":"a.csv","p":2.5}}"#).unwrap();
        assert!(matches!(c.experiment, Experiment::Pvar(_)));
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(Config::parse(""), Err(CliError::Schema(_))));
        assert!(matches!(Config::parse("schema = \"rlv0\"\n[experiment]\nkind = \"pvar\"\ninput = \"a\"\np = 2.0\n"), Err(CliError::Schema(_))));
        assert!(matches!(Config::parse("schema = \"rlv1\"\n[experiment]\nkind = \"nope\"\n"), Err(CliError::Schema(_))));
        assert!(matches!(
            Config::parse("schema = \"rlv1\"\n[experiment]\nkind = \"pvar\"\ninput = \"a\"\np = 2.0\nbogus = 1\n"),
            Err(CliError::Schema(_))
        ));
    }

    #[test]
    fn function_short_forms() {
        assert_eq!(parse_function("gaussian").unwrap(), Analytic::Gaussian);
        assert_eq!(parse_function("cos:2").unwrap(), Analytic::Cos { freq: 2.0, phase: 0.0 });
        assert_eq!(parse_function("abs_power:0.8").unwrap(), Analytic::AbsPower { gamma: 0.8 });
        assert_eq!(parse_function("poly:1:0:2").unwrap(), Analytic::Poly { coeffs: vec![1.0, 0.0, 2.0] });
        assert_eq!(
            parse_function("piecewise_linear:0,0:1,2").unwrap(),
            Analytic::PiecewiseLinear { knots: vec![0.0, 1.0], values: vec![0.0, 2.0] }
        );
        assert!(parse_function("sinh").is_err());
        assert!(parse_function("abs_power").is_err());
    }
}
