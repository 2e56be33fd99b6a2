//! Experiment configuration: TOML-syntax `key = value` files with `[sections]`.
//!
//! Every field is validated before any computation. Unknown keys are rejected
//! with their full path (`potential.potental`, `seeds[1].centre`).

use std::path::Path;

use escape_core::funcalc::{make_cutoff, SmoothCutoff};
use escape_core::operators::PotentialModel;
use escape_core::propagation::GaussianSeed;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: unknown key")]
    UnknownKey { path: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridConfig,
    pub potential: PotentialConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
    pub cutoffs: CutoffConfig,
    pub theorem: TheoremConfig,
    pub ladders: LadderConfig,
    pub expansion: ExpansionConfig,
    pub lemma: LemmaConfig,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub baseline: Option<BaselineConfig>,
    pub seeds: Vec<SeedConfig>,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    4
}

/// Energy window `Δ = [lo, hi]`; `g = bump(lo, hi, edge)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lo: f64,
    pub hi: f64,
    pub edge: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub kind: GeneratorKind,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    #[default]
    Plain,
    Modified,
}

/// `F = half_order(f_width)` and `χ = chi_minus(chi_eps, chi_width)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub f_width: f64,
    pub chi_eps: f64,
    pub chi_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremConfig {
    /// `ϑ / θ`.
    pub ratio: f64,
    pub epsilon: f64,
    pub n_budget: usize,
    /// Speed of the negative control for the position experiment.
    pub control_speed: f64,
    /// Interior times sampled per scale.
    #[serde(default = "default_interior")]
    pub interior: usize,
}

fn default_interior() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Commutator expansion of `B = W g̃(H) W` on its own small grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub half_width: f64,
    pub points: usize,
    /// Width of the Gaussian position weight `W`.
    pub weight_sigma: f64,
    /// Horizontal stretch applied to the expanded cutoffs.
    pub scale: f64,
    pub orders: Vec<usize>,
    pub ladder: Vec<f64>,
    /// Flatness order of the support-observation cutoff.
    pub support_flatness: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub half_width: f64,
    pub points: usize,
    pub ladder: Vec<f64>,
    /// Inflated `θ′` of the negative control, as a multiple of `θ`.
    pub control_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Finite-difference step for the Heisenberg checks.
    pub dt: f64,
    /// Sample times of the Heisenberg checks.
    pub times: Vec<f64>,
    /// Sample step and horizon of the drift, Ruelle and `⟨x²⟩` runs.
    pub step: f64,
    pub horizon: f64,
    pub ruelle_radius: f64,
    /// Weight exponent `α` in `ρ(A)^{−α}`.
    pub alpha: f64,
    /// `Re z` samples across `Δ` for the resolvent probe.
    pub samples: usize,
    /// `η` values below the spacing floor for the divergence diagnostic.
    pub pole_eta: Vec<f64>,
}

/// Free-particle baseline on its own grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub half_width: f64,
    pub points: usize,
    pub seed: SeedConfig,
    /// Momentum window `bump(lo, hi, edge)` applied to the seed.
    pub filter: [f64; 3],
    pub speed: f64,
    pub control_speed: f64,
    pub ladder: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub center: f64,
    pub momentum: f64,
    pub width: f64,
}

impl SeedConfig {
    pub fn gaussian(&self) -> GaussianSeed {
        GaussianSeed::new(self.center, self.momentum, self.width)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative paths resolve against the output root.
    pub dir: String,
}

/// Environment variable overriding the output root (default: the working directory).
pub const OUTPUT_ENV: &str = "ESCAPE_LAB_OUTPUT";

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
        let known = toml::Table::try_from(Self::schema()).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        check_keys(&table, &known, "")?;
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// A config with every optional field present; its keys are the accepted keys.
    fn schema() -> Self {
        let seed = SeedConfig { center: 0.0, momentum: 1.0, width: 1.0 };
        Self {
            name: String::new(),
            description: String::new(),
            grid: GridConfig { half_width: 1.0, points: 2 },
            potential: PotentialConfig { name: String::new(), params: vec![], n_max: 0 },
            window: WindowConfig { lo: 0.0, hi: 0.0, edge: 0.0 },
            generator: GeneratorConfig { kind: GeneratorKind::Plain, radius: Some(0.0), width: Some(0.0) },
            cutoffs: CutoffConfig { f_width: 0.0, chi_eps: 0.0, chi_width: 0.0 },
            theorem: TheoremConfig { ratio: 0.0, epsilon: 0.0, n_budget: 0, control_speed: 0.0, interior: 0 },
            ladders: LadderConfig { s: vec![], a: vec![], eta: vec![] },
            expansion: ExpansionConfig {
                half_width: 0.0,
                points: 0,
                weight_sigma: 0.0,
                scale: 0.0,
                orders: vec![],
                ladder: vec![],
                support_flatness: 0,
            },
            lemma: LemmaConfig { half_width: 0.0, points: 0, ladder: vec![], control_factor: 0.0 },
            dynamics: DynamicsConfig {
                dt: 0.0,
                times: vec![],
                step: 0.0,
                horizon: 0.0,
                ruelle_radius: 0.0,
                alpha: 0.0,
                samples: 0,
                pole_eta: vec![],
            },
            baseline: Some(BaselineConfig {
                half_width: 0.0,
                points: 0,
                seed,
                filter: [0.0; 3],
                speed: 0.0,
                control_speed: 0.0,
                ladder: vec![],
            }),
            seeds: vec![seed],
            output: OutputConfig { dir: String::new() },
        }
    }

    pub fn potential_model(&self) -> Result<PotentialModel, ConfigError> {
        PotentialModel::by_name(&self.potential.name, &self.potential.params, self.potential.n_max)
            .map_err(|e| invalid("potential", e.to_string()))
    }

    pub fn window_cutoff(&self) -> Result<SmoothCutoff, ConfigError> {
        make_cutoff("bump", &[self.window.lo, self.window.hi, self.window.edge]).map_err(|e| invalid("window", e.to_string()))
    }

    pub fn f_cutoff(&self) -> Result<SmoothCutoff, ConfigError> {
        SmoothCutoff::half_order(self.cutoffs.f_width).map_err(|e| invalid("cutoffs.f_width", e.to_string()))
    }

    pub fn chi_cutoff(&self) -> Result<SmoothCutoff, ConfigError> {
        SmoothCutoff::chi_minus(self.cutoffs.chi_eps, self.cutoffs.chi_width).map_err(|e| invalid("cutoffs.chi_width", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must be non-empty"));
        }
        grid("grid", self.grid.half_width, self.grid.points)?;
        self.potential_model()?;
        if !(self.window.lo.is_finite() && self.window.lo > 0.0) {
            return Err(invalid("window.lo", "must be positive"));
        }
        self.window_cutoff()?;
        match self.generator.kind {
            GeneratorKind::Plain => {
                if self.generator.radius.is_some() || self.generator.width.is_some() {
                    return Err(invalid("generator", "radius and width only apply to kind = \"modified\""));
                }
            }
            GeneratorKind::Modified => {
                positive("generator.radius", self.generator.radius.unwrap_or(f64::NAN))?;
                positive("generator.width", self.generator.width.unwrap_or(f64::NAN))?;
            }
        }
        self.f_cutoff()?;
        self.chi_cutoff()?;
        let t = &self.theorem;
        if !(t.ratio > 0.0 && t.ratio < 1.0) {
            return Err(invalid("theorem.ratio", "must lie in (0, 1)"));
        }
        positive("theorem.epsilon", t.epsilon)?;
        if t.n_budget < 2 {
            return Err(invalid("theorem.n_budget", "must be at least 2"));
        }
        positive("theorem.control_speed", t.control_speed)?;
        ladder("ladders.s", &self.ladders.s, 4)?;
        ladder("ladders.eta", &self.ladders.eta, 2)?;
        if self.ladders.a.is_empty() || self.ladders.a.iter().any(|a| !a.is_finite()) {
            return Err(invalid("ladders.a", "needs at least one finite value"));
        }
        let e = &self.expansion;
        grid("expansion", e.half_width, e.points)?;
        positive("expansion.weight_sigma", e.weight_sigma)?;
        positive("expansion.scale", e.scale)?;
        if e.orders.is_empty() || e.orders.iter().any(|n| *n < 2) {
            return Err(invalid("expansion.orders", "needs orders >= 2"));
        }
        ladder("expansion.ladder", &e.ladder, 4)?;
        if !(1..=12).contains(&e.support_flatness) {
            return Err(invalid("expansion.support_flatness", "must lie in 1..=12"));
        }
        let l = &self.lemma;
        grid("lemma", l.half_width, l.points)?;
        ladder("lemma.ladder", &l.ladder, 4)?;
        if !(l.control_factor > 1.0) {
            return Err(invalid("lemma.control_factor", "must exceed 1"));
        }
        let d = &self.dynamics;
        positive("dynamics.dt", d.dt)?;
        positive("dynamics.step", d.step)?;
        positive("dynamics.horizon", d.horizon)?;
        if d.horizon < 10.0 * d.step {
            return Err(invalid("dynamics.horizon", "needs at least ten steps"));
        }
        if d.times.is_empty() || d.times.iter().any(|t| !(*t > d.dt)) {
            return Err(invalid("dynamics.times", "needs times above dt"));
        }
        positive("dynamics.ruelle_radius", d.ruelle_radius)?;
        if !(d.ruelle_radius < self.grid.half_width / 2.0) {
            return Err(invalid("dynamics.ruelle_radius", "must be below half of grid.half_width"));
        }
        if !(d.alpha > 1.0) {
            return Err(invalid("dynamics.alpha", "must exceed 1"));
        }
        if d.samples < 2 {
            return Err(invalid("dynamics.samples", "needs at least 2"));
        }
        ladder("dynamics.pole_eta", &d.pole_eta, 2)?;
        if let Some(b) = &self.baseline {
            grid("baseline", b.half_width, b.points)?;
            seed("baseline.seed", &b.seed)?;
            make_cutoff("bump", &b.filter).map_err(|e| invalid("baseline.filter", e.to_string()))?;
            positive("baseline.speed", b.speed)?;
            positive("baseline.control_speed", b.control_speed)?;
            ladder("baseline.ladder", &b.ladder, 4)?;
        }
        if self.seeds.len() < 3 {
            return Err(invalid("seeds", "needs at least three seeds"));
        }
        for (i, s) in self.seeds.iter().enumerate() {
            seed(&format!("seeds[{i}]"), s)?;
        }
        if self.output.dir.trim().is_empty() {
            return Err(invalid("output.dir", "must be non-empty"));
        }
        Ok(())
    }
}

fn check_keys(table: &toml::Table, known: &toml::Table, prefix: &str) -> Result<(), ConfigError> {
    for (key, value) in table {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let Some(schema) = known.get(key) else {
            return Err(ConfigError::UnknownKey { path });
        };
        match (value, schema) {
            (toml::Value::Table(t), toml::Value::Table(k)) => check_keys(t, k, &path)?,
            (toml::Value::Array(items), toml::Value::Array(k)) => {
                if let Some(toml::Value::Table(k)) = k.first() {
                    for (i, item) in items.iter().enumerate() {
                        if let toml::Value::Table(t) = item {
                            check_keys(t, k, &format!("{path}[{i}]"))?;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("must be positive and finite, got {v}")))
    }
}

fn grid(path: &str, half_width: f64, points: usize) -> Result<(), ConfigError> {
    positive(&format!("{path}.half_width"), half_width)?;
    escape_core::build_grid(half_width, points).map(|_| ()).map_err(|e| invalid(&format!("{path}.points"), e.to_string()))
}

fn ladder(path: &str, values: &[f64], min_len: usize) -> Result<(), ConfigError> {
    if values.len() < min_len {
        return Err(invalid(path, format!("needs at least {min_len} values")));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid(path, "values must be positive and finite"));
    }
    if values.windows(2).any(|w| w[1] == w[0]) {
        return Err(invalid(path, "values must be distinct"));
    }
    Ok(())
}

fn seed(path: &str, s: &SeedConfig) -> Result<(), ConfigError> {
    if !(s.center.is_finite() && s.momentum.is_finite()) {
        return Err(invalid(path, "center and momentum must be finite"));
    }
    positive(&format!("{path}.width"), s.width)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED: &str = include_str!("../../../scenarios/free_particle.cfg");

    #[test]
    fn shipped_scenario_parses() {
        let cfg = ExperimentConfig::parse(SHIPPED).unwrap();
        assert_eq!(cfg.potential.name, "zero");
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_named_by_path() {
        let text = SHIPPED.replace("name = \"zero\"", "name = \"zero\"\npotental = 1");
        let e = ExperimentConfig::parse(&text).unwrap_err();
        assert_eq!(e.to_string(), "potential.potental: unknown key");
        let text = format!("potental = 1\n{SHIPPED}");
        assert!(matches!(ExperimentConfig::parse(&text), Err(ConfigError::UnknownKey { path }) if path == "potental"));
        let text = SHIPPED.replacen("momentum =", "centre = 0.0\nmomentum =", 1);
        let e = ExperimentConfig::parse(&text).unwrap_err().to_string();
        assert!(e.starts_with("seeds[0].centre") || e.starts_with("baseline.seed.centre"), "{e}");
    }

    #[test]
    fn invalid_values_name_their_field() {
        let text = SHIPPED.replace("ratio = 0.9", "ratio = 1.5");
        assert!(ExperimentConfig::parse(&text).unwrap_err().to_string().starts_with("theorem.ratio"));
        let text = SHIPPED.replace("name = \"zero\"", "name = \"zeroo\"");
        assert!(ExperimentConfig::parse(&text).unwrap_err().to_string().starts_with("potential"));
    }
}
