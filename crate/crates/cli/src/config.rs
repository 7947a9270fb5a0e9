//! Job configuration: schema check, typed parse and semantic validation.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use whitham_gt::catalog::StructureSpec;
use whitham_gt::gibbons_tsarev::AxisData;
use whitham_gt::gt::{CollisionGroup, Contour, VerifyConfig};
use whitham_gt::hyperelliptic::{Branch, CurveModuli, DEFAULT_DELTA, DEFAULT_PANELS};
use whitham_gt::kernel::CauchyConfig;
use whitham_gt::C64;

pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Collide,
    Pushforward,
    Potentials,
    Gtsys,
    Hydro,
    Reconstruct,
    Rauch,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Collide => "collide",
            Command::Pushforward => "pushforward",
            Command::Potentials => "potentials",
            Command::Gtsys => "gtsys",
            Command::Hydro => "hydro",
            Command::Reconstruct => "reconstruct",
            Command::Rauch => "rauch",
            Command::Report => "report",
        }
    }

    pub fn needs_enhanced(self) -> bool {
        matches!(self, Command::Potentials | Command::Hydro | Command::Reconstruct)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub seed: u64,
    pub structure: StructureSpec,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::nodes")]
    pub nodes: usize,
    #[serde(default = "defaults::min_separation")]
    pub min_separation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collide: Option<CollideSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pushforward: Option<PushforwardSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potentials: Option<PotentialsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gtsys: Option<GtsysSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rauch: Option<RauchSection>,
}

mod defaults {
    use super::*;

    pub fn samples() -> usize {
        100
    }
    pub fn tol() -> f64 {
        1e-8
    }
    pub fn nodes() -> usize {
        CauchyConfig::default().nodes
    }
    pub fn min_separation() -> f64 {
        VerifyConfig::default().min_separation
    }
    pub fn agreement_tol() -> f64 {
        1e-5
    }
    pub fn big_m() -> usize {
        3
    }
    pub fn states() -> usize {
        50
    }
    pub fn gt_tol() -> f64 {
        1e-9
    }
    pub fn steps() -> usize {
        10
    }
    pub fn step() -> f64 {
        0.02
    }
    pub fn triple() -> [usize; 3] {
        [0, 1, 2]
    }
    pub fn z_samples() -> usize {
        24
    }
    pub fn svd_tol() -> f64 {
        1e-9
    }
    pub fn held_out() -> usize {
        20
    }
    pub fn panels() -> usize {
        DEFAULT_PANELS
    }
    pub fn delta() -> f64 {
        DEFAULT_DELTA
    }
    pub fn rauch_tol() -> f64 {
        1e-4
    }
    pub fn branches() -> Vec<Branch> {
        Branch::ALL.to_vec()
    }
    pub fn ratio_band() -> [f64; 2] {
        [3.5, 4.5]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollideSection {
    pub groups: Vec<CollisionGroup>,
    /// Tolerance between the closed form and the extrapolated limit.
    #[serde(default = "defaults::agreement_tol")]
    pub agreement_tol: f64,
}

/// `mu(p, v) = sum_k poly[k] p^k + p^2 sum_k field_quadratic[k] v_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushforwardSection {
    pub poly: Vec<C64>,
    #[serde(default)]
    pub field_quadratic: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialsSection {
    #[serde(default)]
    pub contours: Vec<Contour>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtsysSection {
    /// Size of the integrated system; the compatibility check uses at least 3.
    #[serde(default = "defaults::big_m")]
    pub big_m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distinguished: Option<usize>,
    #[serde(default = "defaults::states")]
    pub states: usize,
    #[serde(default = "defaults::gt_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrate: Option<IntegrateSection>,
}

impl Default for GtsysSection {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrateSection {
    pub data: AxisData,
    #[serde(default = "defaults::steps")]
    pub steps: usize,
    #[serde(default = "defaults::step")]
    pub h: f64,
    /// Accepted band for the residual ratio under step halving.
    #[serde(default = "defaults::ratio_band")]
    pub ratio_band: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    #[serde(default = "defaults::triple")]
    pub triple: [usize; 3],
    #[serde(default = "defaults::z_samples")]
    pub z_samples: usize,
    #[serde(default = "defaults::svd_tol")]
    pub svd_tol: f64,
    #[serde(default = "defaults::held_out")]
    pub held_out: usize,
}

impl Default for HydroSection {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("defaults")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSection {
    /// Pairs for f; all pairs when empty.
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RauchSection {
    /// Drawn from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moduli: Option<CurveModuli>,
    #[serde(default = "defaults::branches")]
    pub branches: Vec<Branch>,
    #[serde(default = "defaults::panels")]
    pub panels: usize,
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    #[serde(default = "defaults::rauch_tol")]
    pub tol: f64,
}

impl Default for RauchSection {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("defaults")
    }
}

/// Rejected configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn positive(name: &str, x: f64) -> Result<(), ConfigError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ConfigError(format!("{name} must be positive and finite, got {x}")))
    }
}

fn nonzero(name: &str, x: usize) -> Result<(), ConfigError> {
    if x > 0 {
        Ok(())
    } else {
        Err(ConfigError(format!("{name} must be positive")))
    }
}

impl JobConfig {
    /// Schema check of the raw document, then typed parse and validation.
    /// `seed` replaces the document's seed when given.
    pub fn from_value(mut raw: Value, seed: Option<u64>) -> Result<Self, ConfigError> {
        if let (Some(s), Value::Object(map)) = (seed, &mut raw) {
            map.insert("seed".into(), Value::from(s));
        }
        let schema: Value = serde_json::from_str(CONFIG_SCHEMA).expect("config schema is valid JSON");
        let validator = jsonschema::validator_for(&schema).expect("config schema compiles");
        if let Some(e) = validator.iter_errors(&raw).next() {
            let at = e.instance_path().to_string();
            return Err(ConfigError(format!("schema violation at '{at}': {e}")));
        }
        let cfg: JobConfig = serde_json::from_value(raw).map_err(|e| ConfigError(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.structure.validate().map_err(|e| ConfigError(e.to_string()))?;
        nonzero("samples", self.samples)?;
        positive("tol", self.tol)?;
        positive("min_separation", self.min_separation)?;
        if self.nodes < 8 {
            return Err(ConfigError(format!("nodes must be at least 8, got {}", self.nodes)));
        }
        if self.command.needs_enhanced() && !self.structure.family.enhanced() {
            return Err(ConfigError(format!("{} needs a family with potentials, not {}", self.command.name(), self.structure.family.name())));
        }
        if let Some(c) = &self.collide {
            positive("collide.agreement_tol", c.agreement_tol)?;
            if c.groups.is_empty() {
                return Err(ConfigError("collide.groups is empty".into()));
            }
        }
        if self.command == Command::Collide && self.collide.is_none() {
            return Err(ConfigError("collide needs a collide section".into()));
        }
        if self.command == Command::Pushforward {
            let Some(p) = &self.pushforward else {
                return Err(ConfigError("pushforward needs a pushforward section".into()));
            };
            if p.poly.len() < 2 {
                return Err(ConfigError("pushforward.poly needs a linear term".into()));
            }
        }
        if let Some(g) = &self.gtsys {
            nonzero("gtsys.states", g.states)?;
            positive("gtsys.tol", g.tol)?;
            if g.big_m < 2 {
                return Err(ConfigError("gtsys.big_m must be at least 2".into()));
            }
            if let Some(i) = &g.integrate {
                nonzero("gtsys.integrate.steps", i.steps)?;
                positive("gtsys.integrate.h", i.h)?;
                if !(i.ratio_band[0] > 0.0 && i.ratio_band[0] < i.ratio_band[1]) {
                    return Err(ConfigError("gtsys.integrate.ratio_band must be an increasing positive pair".into()));
                }
            }
        }
        if let Some(h) = &self.hydro {
            positive("hydro.svd_tol", h.svd_tol)?;
            nonzero("hydro.z_samples", h.z_samples)?;
            nonzero("hydro.held_out", h.held_out)?;
        }
        if let Some(r) = &self.rauch {
            nonzero("rauch.panels", r.panels)?;
            positive("rauch.delta", r.delta)?;
            positive("rauch.tol", r.tol)?;
            if let Some(m) = &r.moduli {
                m.validate().map_err(|e| ConfigError(format!("rauch.moduli: {e}")))?;
            }
        }
        Ok(())
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            min_separation: self.min_separation,
            cauchy: CauchyConfig { nodes: self.nodes, ..CauchyConfig::default() },
        }
    }
}
