//! Experiment configuration: TOML parsing with full violation reports,
//! defaults, and conversion into core types.
//!
//! The document is walked as a [`toml::Value`] so that every unknown key,
//! type mismatch and range violation is reported in one pass.

use std::path::Path;

use serde::Serialize;
use toml::value::Table;
use toml::Value;

use qthermo::base::BaseSystem;
use qthermo::fiber::{Family, ModelSpec, ParamField, PotentialSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BaseConfig {
    Rotation { angle: f64 },
    Bernoulli { probs: Vec<f64> },
    Geometric { ratio: f64, truncation: usize },
    Countable { leading: Vec<f64>, truncation: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Doubling,
    MannevillePomeau,
    ExpandInAveragePair,
    UnboundedDegree,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub family: FamilyName,
    pub beta: ParamField,
    pub gamma: ParamField,
    pub l: f64,
    pub ell: Vec<usize>,
    pub zeta_coeff: f64,
    pub zeta_power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKindName {
    Constant,
    Cosine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialConfig {
    pub kind: PotentialKindName,
    pub value: f64,
    pub amplitude: f64,
    pub frequency: u32,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ParamField>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericsConfig {
    pub grid: usize,
    pub window: usize,
    pub burn_in: usize,
    pub tol: f64,
    pub eps0: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesesConfig {
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsConfig {
    pub eps: f64,
    pub gamma: f64,
    pub points: usize,
}

/// Observables available to the correlation command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableName {
    Cos,
    Sin,
    Cos2,
    Square,
    One,
}

impl ObservableName {
    pub fn eval(self, x: f64) -> f64 {
        use std::f64::consts::TAU;
        match self {
            ObservableName::Cos => (TAU * x).cos(),
            ObservableName::Sin => (TAU * x).sin(),
            ObservableName::Cos2 => (2.0 * TAU * x).cos(),
            ObservableName::Square => x * x - 1.0 / 3.0,
            ObservableName::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationConfig {
    pub n_max: usize,
    pub left: ObservableName,
    pub right: ObservableName,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PressureConfig {
    pub n: usize,
    pub eps: f64,
    pub candidates: usize,
    pub cover: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperbolicConfig {
    pub gamma: f64,
    pub x0: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CylinderConfig {
    pub n: usize,
    pub alpha: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdConfig {
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub seed: u64,
    pub base: BaseConfig,
    pub model: ModelConfig,
    pub potential: PotentialConfig,
    pub numerics: NumericsConfig,
    pub hypotheses: HypothesesConfig,
    pub gibbs: GibbsConfig,
    pub correlations: CorrelationConfig,
    pub pressure: PressureConfig,
    pub hyperbolic: HyperbolicConfig,
    pub cylinders: CylinderConfig,
    pub threshold: ThresholdConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            base: BaseConfig::Rotation { angle: qthermo::base::GOLDEN_ANGLE },
            model: ModelConfig {
                family: FamilyName::MannevillePomeau,
                beta: ParamField::Constant(0.5),
                gamma: ParamField::Constant(0.0),
                l: 1.2,
                ell: Vec::new(),
                zeta_coeff: 0.2,
                zeta_power: 2.0,
            },
            potential: PotentialConfig {
                kind: PotentialKindName::Cosine,
                value: 0.0,
                amplitude: 0.05,
                frequency: 1,
                scale: 1.0,
                modulation: None,
            },
            numerics: NumericsConfig { grid: 1024, window: 64, burn_in: 96, tol: 1e-8, eps0: 0.1, samples: 8 },
            hypotheses: HypothesesConfig { samples: 1000 },
            gibbs: GibbsConfig { eps: 0.02, gamma: 0.1, points: 8 },
            correlations: CorrelationConfig { n_max: 30, left: ObservableName::Cos, right: ObservableName::Sin },
            pressure: PressureConfig { n: 10, eps: 0.05, candidates: 1 << 16, cover: true },
            hyperbolic: HyperbolicConfig { gamma: 0.1, x0: 0.3, n: 128 },
            cylinders: CylinderConfig { n: 64, alpha: 0.1, eps: 0.05 },
            threshold: ThresholdConfig { n: 4096 },
        }
    }
}

const SECTIONS: &[&str] = &[
    "seed",
    "base",
    "model",
    "potential",
    "numerics",
    "hypotheses",
    "gibbs",
    "correlations",
    "pressure",
    "hyperbolic",
    "cylinders",
    "threshold",
];

/// Closest known key within edit distance 3.
fn suggest<'a>(key: &str, known: &[&'a str]) -> Option<&'a str> {
    known
        .iter()
        .map(|k| (strsim::levenshtein(key, k), *k))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, k)| k)
}

/// Accumulates violations while reading a configuration document.
#[derive(Default)]
struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn fail(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn unknown_keys(&mut self, table: &Table, prefix: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let path = join(prefix, key);
                match suggest(key, known) {
                    Some(s) => self.fail(format!("unknown key `{path}`; did you mean `{}`?", join(prefix, s))),
                    None => self.fail(format!("unknown key `{path}`")),
                }
            }
        }
    }

    fn section<'v>(&mut self, root: &'v Table, name: &str, known: &[&str]) -> Option<&'v Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => {
                self.unknown_keys(t, name, known);
                Some(t)
            }
            Some(other) => {
                self.fail(format!("`{name}` must be a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn float(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: f64) -> f64 {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Float(v)) => *v,
            Some(Value::Integer(v)) => *v as f64,
            Some(other) => {
                self.fail(format!("`{}` must be a number, found {}", join(prefix, key), other.type_str()));
                default
            }
        }
    }

    fn uint(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: u64) -> u64 {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Integer(v)) if *v >= 0 => *v as u64,
            Some(other) => {
                self.fail(format!("`{}` must be a non-negative integer, found {}", join(prefix, key), describe(other)));
                default
            }
        }
    }

    fn boolean(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: bool) -> bool {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.fail(format!("`{}` must be a boolean, found {}", join(prefix, key), other.type_str()));
                default
            }
        }
    }

    fn float_list(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: Vec<f64>) -> Vec<f64> {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v {
                        Value::Float(x) => out.push(*x),
                        Value::Integer(x) => out.push(*x as f64),
                        other => self.fail(format!("`{}[{i}]` must be a number, found {}", join(prefix, key), other.type_str())),
                    }
                }
                out
            }
            Some(other) => {
                self.fail(format!("`{}` must be an array of numbers, found {}", join(prefix, key), other.type_str()));
                default
            }
        }
    }

    fn uint_list(&mut self, t: Option<&Table>, prefix: &str, key: &str) -> Vec<usize> {
        match t.and_then(|t| t.get(key)) {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .filter_map(|(i, v)| match v {
                    Value::Integer(x) if *x >= 0 => Some(*x as usize),
                    other => {
                        self.fail(format!("`{}[{i}]` must be a non-negative integer, found {}", join(prefix, key), describe(other)));
                        None
                    }
                })
                .collect(),
            Some(other) => {
                self.fail(format!("`{}` must be an array of integers, found {}", join(prefix, key), other.type_str()));
                Vec::new()
            }
        }
    }

    /// Enumerated string value with suggestions.
    fn choice<T: Copy>(&mut self, t: Option<&Table>, prefix: &str, key: &str, options: &[(&str, T)], default: T) -> T {
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::String(s)) => match options.iter().find(|(name, _)| name == s) {
                Some((_, v)) => *v,
                None => {
                    let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                    let hint = suggest(s, &names).map(|n| format!("; did you mean `{n}`?")).unwrap_or_default();
                    self.fail(format!("`{}` = \"{s}\" is not one of {names:?}{hint}", join(prefix, key)));
                    default
                }
            },
            Some(other) => {
                self.fail(format!("`{}` must be a string, found {}", join(prefix, key), other.type_str()));
                default
            }
        }
    }

    fn param(&mut self, t: Option<&Table>, prefix: &str, key: &str, default: ParamField) -> ParamField {
        let path = join(prefix, key);
        match t.and_then(|t| t.get(key)) {
            None => default,
            Some(Value::Float(v)) => ParamField::Constant(*v),
            Some(Value::Integer(v)) => ParamField::Constant(*v as f64),
            Some(Value::Array(_)) => ParamField::PerSymbol(self.float_list(t, prefix, key, Vec::new())),
            Some(Value::Table(inner)) => {
                self.unknown_keys(inner, &path, &["mean", "amplitude"]);
                let mean = self.float(Some(inner), &path, "mean", 0.0);
                let amplitude = self.float(Some(inner), &path, "amplitude", 0.0);
                if !inner.contains_key("mean") {
                    self.fail(format!("`{path}.mean` is required"));
                }
                ParamField::Cosine { mean, amplitude }
            }
            Some(other) => {
                self.fail(format!("`{path}` must be a number, an array or {{mean, amplitude}}, found {}", other.type_str()));
                default
            }
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(msg());
        }
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn describe(v: &Value) -> String {
    match v {
        Value::Integer(i) => format!("{i}"),
        other => other.type_str().to_string(),
    }
}

impl Config {
    /// Parse a TOML document, filling defaults and collecting every violation.
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let root: Table = text.parse::<Table>().map_err(|e| CliError::Config(vec![format!("TOML syntax: {e}")]))?;
        let mut w = Walker::default();
        w.unknown_keys(&root, "", SECTIONS);
        let d = Config::default();
        let seed = w.uint(Some(&root), "", "seed", d.seed);

        let base_t = w.section(&root, "base", &["kind", "angle", "probs", "ratio", "truncation", "leading"]);
        let kinds = [("rotation", 0u8), ("bernoulli", 1), ("geometric", 2), ("countable", 3)];
        let base = match w.choice(base_t, "base", "kind", &kinds, 0) {
            0 => BaseConfig::Rotation { angle: w.float(base_t, "base", "angle", qthermo::base::GOLDEN_ANGLE) },
            1 => BaseConfig::Bernoulli { probs: w.float_list(base_t, "base", "probs", vec![0.5, 0.5]) },
            2 => BaseConfig::Geometric {
                ratio: w.float(base_t, "base", "ratio", 0.5),
                truncation: w.uint(base_t, "base", "truncation", 16) as usize,
            },
            _ => BaseConfig::Countable {
                leading: w.float_list(base_t, "base", "leading", vec![0.5, 0.25]),
                truncation: w.uint(base_t, "base", "truncation", 16) as usize,
            },
        };

        let mt = w.section(&root, "model", &["family", "beta", "gamma", "l", "ell", "zeta_coeff", "zeta_power"]);
        let families = [
            ("doubling", FamilyName::Doubling),
            ("manneville-pomeau", FamilyName::MannevillePomeau),
            ("expand-in-average-pair", FamilyName::ExpandInAveragePair),
            ("unbounded-degree", FamilyName::UnboundedDegree),
        ];
        let model = ModelConfig {
            family: w.choice(mt, "model", "family", &families, d.model.family),
            beta: w.param(mt, "model", "beta", d.model.beta.clone()),
            gamma: w.param(mt, "model", "gamma", d.model.gamma.clone()),
            l: w.float(mt, "model", "l", d.model.l),
            ell: w.uint_list(mt, "model", "ell"),
            zeta_coeff: w.float(mt, "model", "zeta_coeff", d.model.zeta_coeff),
            zeta_power: w.float(mt, "model", "zeta_power", d.model.zeta_power),
        };

        let pt = w.section(&root, "potential", &["kind", "value", "amplitude", "frequency", "scale", "modulation"]);
        let pkinds = [("constant", PotentialKindName::Constant), ("cosine", PotentialKindName::Cosine)];
        let potential = PotentialConfig {
            kind: w.choice(pt, "potential", "kind", &pkinds, d.potential.kind),
            value: w.float(pt, "potential", "value", d.potential.value),
            amplitude: w.float(pt, "potential", "amplitude", d.potential.amplitude),
            frequency: w.uint(pt, "potential", "frequency", d.potential.frequency as u64) as u32,
            scale: w.float(pt, "potential", "scale", d.potential.scale),
            modulation: pt.and_then(|t| t.get("modulation")).map(|_| w.param(pt, "potential", "modulation", ParamField::Constant(1.0))),
        };

        let nt = w.section(&root, "numerics", &["grid", "window", "burn_in", "tol", "eps0", "samples"]);
        let numerics = NumericsConfig {
            grid: w.uint(nt, "numerics", "grid", d.numerics.grid as u64) as usize,
            window: w.uint(nt, "numerics", "window", d.numerics.window as u64) as usize,
            burn_in: w.uint(nt, "numerics", "burn_in", d.numerics.burn_in as u64) as usize,
            tol: w.float(nt, "numerics", "tol", d.numerics.tol),
            eps0: w.float(nt, "numerics", "eps0", d.numerics.eps0),
            samples: w.uint(nt, "numerics", "samples", d.numerics.samples as u64) as usize,
        };

        let ht = w.section(&root, "hypotheses", &["samples"]);
        let hypotheses = HypothesesConfig { samples: w.uint(ht, "hypotheses", "samples", d.hypotheses.samples as u64) as usize };

        let gt = w.section(&root, "gibbs", &["eps", "gamma", "points"]);
        let gibbs = GibbsConfig {
            eps: w.float(gt, "gibbs", "eps", d.gibbs.eps),
            gamma: w.float(gt, "gibbs", "gamma", d.gibbs.gamma),
            points: w.uint(gt, "gibbs", "points", d.gibbs.points as u64) as usize,
        };

        let ct = w.section(&root, "correlations", &["n_max", "left", "right"]);
        let observables = [
            ("cos", ObservableName::Cos),
            ("sin", ObservableName::Sin),
            ("cos2", ObservableName::Cos2),
            ("square", ObservableName::Square),
            ("one", ObservableName::One),
        ];
        let correlations = CorrelationConfig {
            n_max: w.uint(ct, "correlations", "n_max", d.correlations.n_max as u64) as usize,
            left: w.choice(ct, "correlations", "left", &observables, d.correlations.left),
            right: w.choice(ct, "correlations", "right", &observables, d.correlations.right),
        };

        let prt = w.section(&root, "pressure", &["n", "eps", "candidates", "cover"]);
        let pressure = PressureConfig {
            n: w.uint(prt, "pressure", "n", d.pressure.n as u64) as usize,
            eps: w.float(prt, "pressure", "eps", d.pressure.eps),
            candidates: w.uint(prt, "pressure", "candidates", d.pressure.candidates as u64) as usize,
            cover: w.boolean(prt, "pressure", "cover", d.pressure.cover),
        };

        let hyt = w.section(&root, "hyperbolic", &["gamma", "x0", "n"]);
        let hyperbolic = HyperbolicConfig {
            gamma: w.float(hyt, "hyperbolic", "gamma", d.hyperbolic.gamma),
            x0: w.float(hyt, "hyperbolic", "x0", d.hyperbolic.x0),
            n: w.uint(hyt, "hyperbolic", "n", d.hyperbolic.n as u64) as usize,
        };

        let cyt = w.section(&root, "cylinders", &["n", "alpha", "eps"]);
        let cylinders = CylinderConfig {
            n: w.uint(cyt, "cylinders", "n", d.cylinders.n as u64) as usize,
            alpha: w.float(cyt, "cylinders", "alpha", d.cylinders.alpha),
            eps: w.float(cyt, "cylinders", "eps", d.cylinders.eps),
        };

        let tt = w.section(&root, "threshold", &["n"]);
        let threshold = ThresholdConfig { n: w.uint(tt, "threshold", "n", d.threshold.n as u64) as usize };

        let cfg = Config {
            seed,
            base,
            model,
            potential,
            numerics,
            hypotheses,
            gibbs,
            correlations,
            pressure,
            hyperbolic,
            cylinders,
            threshold,
        };
        cfg.check_ranges(&mut w);
        if w.errors.is_empty() {
            if let Err(e) = cfg.model_spec().validate(&cfg.base_system()?) {
                w.fail(e.to_string());
            }
        }
        if w.errors.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::Config(w.errors))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    /// The resolved configuration, defaults included.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    fn check_ranges(&self, w: &mut Walker) {
        let n = &self.numerics;
        w.check(n.grid >= 64, || format!("`numerics.grid` = {} must be at least 64", n.grid));
        w.check(n.window >= 1, || "`numerics.window` must be at least 1".into());
        w.check(n.samples >= 1, || "`numerics.samples` must be at least 1".into());
        w.check(n.tol > 0.0, || format!("`numerics.tol` = {} must be positive", n.tol));
        w.check(n.eps0 > 0.0 && n.eps0 < 0.5, || format!("`numerics.eps0` = {} must lie in (0, 0.5)", n.eps0));
        w.check(self.hypotheses.samples >= 1, || "`hypotheses.samples` must be at least 1".into());

        let g = &self.gibbs;
        w.check(g.eps > 0.0 && g.eps <= 0.1, || format!("`gibbs.eps` = {} must lie in (0, 0.1]", g.eps));
        w.check(g.eps < n.eps0, || format!("`gibbs.eps` = {} must be below `numerics.eps0` = {}", g.eps, n.eps0));
        w.check(g.gamma > 0.0, || format!("`gibbs.gamma` = {} must be positive", g.gamma));
        w.check(g.points >= 1, || "`gibbs.points` must be at least 1".into());

        let c = &self.correlations;
        w.check(c.n_max >= 1, || "`correlations.n_max` must be at least 1".into());

        let p = &self.pressure;
        w.check(p.n >= 1, || "`pressure.n` must be at least 1".into());
        w.check(p.eps > 0.0 && p.eps <= 0.1, || format!("`pressure.eps` = {} must lie in (0, 0.1]", p.eps));
        let dense = |m: usize| m as f64 >= 4.0 / p.eps;
        w.check(dense(p.candidates), || format!("`pressure.candidates` = {} is coarser than eps/4", p.candidates));

        let h = &self.hyperbolic;
        w.check(h.gamma > 0.0, || format!("`hyperbolic.gamma` = {} must be positive", h.gamma));
        w.check((0.0..=1.0).contains(&h.x0), || format!("`hyperbolic.x0` = {} must lie in [0, 1]", h.x0));
        w.check(h.n >= 1, || "`hyperbolic.n` must be at least 1".into());

        let cy = &self.cylinders;
        w.check(cy.n >= 1, || "`cylinders.n` must be at least 1".into());
        w.check(cy.alpha >= 0.0, || format!("`cylinders.alpha` = {} must be non-negative", cy.alpha));
        w.check(cy.eps >= 0.0, || format!("`cylinders.eps` = {} must be non-negative", cy.eps));
        w.check(self.threshold.n >= 1, || "`threshold.n` must be at least 1".into());

        let pot = &self.potential;
        w.check(pot.scale.is_finite() && pot.scale != 0.0, || "`potential.scale` must be finite and non-zero".into());
    }

    pub fn base_system(&self) -> Result<BaseSystem, CliError> {
        let seed = self.seed;
        let b = match &self.base {
            BaseConfig::Rotation { angle } => BaseSystem::rotation(*angle, seed),
            BaseConfig::Bernoulli { probs } => BaseSystem::bernoulli(probs.clone(), seed),
            BaseConfig::Geometric { ratio, truncation } => BaseSystem::geometric(*ratio, *truncation, seed),
            BaseConfig::Countable { leading, truncation } => BaseSystem::countable(leading, *truncation, seed),
        };
        b.map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn model_spec(&self) -> ModelSpec {
        let m = &self.model;
        let scalar = |p: &ParamField| p.range().0;
        let family = match m.family {
            FamilyName::Doubling => Family::Doubling,
            FamilyName::MannevillePomeau => Family::MannevillePomeau { beta: m.beta.clone(), gamma: m.gamma.clone() },
            FamilyName::ExpandInAveragePair => Family::ExpandInAveragePair { beta: scalar(&m.beta), l: m.l },
            FamilyName::UnboundedDegree => Family::UnboundedDegree { beta: scalar(&m.beta), ell: m.ell.clone() },
        };
        ModelSpec { family, zeta_coeff: m.zeta_coeff, zeta_power: m.zeta_power }
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        let p = &self.potential;
        let spec = match p.kind {
            PotentialKindName::Constant => PotentialSpec::constant(p.value),
            PotentialKindName::Cosine => PotentialSpec::cosine(p.amplitude, p.frequency).shifted(p.value),
        };
        let spec = spec.scaled(p.scale);
        match &p.modulation {
            Some(m) => spec.with_modulation(m.clone()),
            None => spec,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match Config::from_toml_str(text) {
            Err(CliError::Config(v)) => v,
            other => panic!("expected configuration errors, got {other:?}"),
        }
    }

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(Config::from_toml_str("").unwrap(), Config::default());
    }

    #[test]
    fn resolved_config_round_trips() {
        let text = r#"
            seed = 9
            [base]
            kind = "bernoulli"
            probs = [0.6, 0.4]
            [model]
            family = "expand-in-average-pair"
            beta = 0.4
            l = 1.1
            [potential]
            modulation = { mean = 1.0, amplitude = 0.5 }
        "#;
        let cfg = Config::from_toml_str(text).unwrap();
        let again = Config::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
        let rot = Config::from_toml_str("[model]\nbeta = { mean = 0.5, amplitude = 0.2 }").unwrap();
        assert_eq!(Config::from_toml_str(&rot.to_toml_string()).unwrap(), rot);
    }

    #[test]
    fn all_violations_are_reported() {
        let e = errors(
            r#"
            [numerics]
            grid = 32
            [gibbs]
            eps = 0.5
            gamma = -1.0
            [modle]
            family = "doubling"
        "#,
        );
        assert_eq!(e.len(), 5, "{e:?}");
        assert!(e.iter().any(|m| m.contains("did you mean `model`")));
        assert!(e.iter().any(|m| m.contains("numerics.grid")));
        assert!(e.iter().any(|m| m.contains("gibbs.gamma")));
    }

    #[test]
    fn unknown_nested_key_gets_suggestion() {
        let e = errors("[model]\nbta = 0.3");
        assert_eq!(e, vec!["unknown key `model.bta`; did you mean `model.beta`?".to_string()]);
    }

    #[test]
    fn bad_choice_gets_suggestion() {
        let e = errors("[model]\nfamily = \"doubeling\"");
        assert!(e[0].contains("did you mean `doubling`"), "{e:?}");
    }

    #[test]
    fn type_errors_are_reported() {
        let e = errors("[numerics]\ngrid = \"big\"\nsamples = -3");
        assert_eq!(e.len(), 2, "{e:?}");
    }

    #[test]
    fn model_validation_is_included() {
        let e = errors("[model]\nfamily = \"expand-in-average-pair\"");
        assert!(e[0].contains("two symbols"), "{e:?}");
    }

    #[test]
    fn syntax_error_is_a_config_error() {
        assert!(matches!(Config::from_toml_str("[model"), Err(CliError::Config(_))));
    }
}
