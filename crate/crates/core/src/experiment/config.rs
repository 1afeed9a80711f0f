//! Flat `key = value` experiment configuration.
//!
//! One setting per line, `#` starts a comment, keys carry a dotted section
//! prefix (`network.rho = 0.5`). Lists are comma-separated; constellation
//! points are written `re:im`. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::input::{InputDistribution, InputFamily, SnrRule, Temporal};
use crate::mi::{EstimatorSettings, DEFAULT_CI_CAP, DEFAULT_MAX_DOUBLINGS, DEFAULT_MIXTURE, DEFAULT_OUTER, MIN_SAMPLES};
use crate::network::{AlphaModel, AlphaSequence, NetworkConfig, Truncation, DEFAULT_MAX_BLOCKLENGTH, DEFAULT_TAIL_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bounds,
    Simulate,
    MiSweep,
    Verify,
    DistCheck,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Bounds, Mode::Simulate, Mode::MiSweep, Mode::Verify, Mode::DistCheck];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Bounds => "bounds",
            Mode::Simulate => "simulate",
            Mode::MiSweep => "mi-sweep",
            Mode::Verify => "verify",
            Mode::DistCheck => "dist-check",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Mode::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Input family as written in the config.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Gaussian,
    ConstantModulus,
    Constellation { points: Vec<Complex64>, probs: Vec<f64> },
    Qam(usize),
    OnOff { delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    pub family: FamilySpec,
    pub delta_rule: SnrRule,
    pub temporal: Temporal,
}

impl InputSpec {
    /// The input law at average power `power`.
    pub fn distribution(&self, power: f64) -> Result<InputDistribution> {
        let d = match &self.family {
            FamilySpec::Gaussian => InputDistribution::circular_gaussian(power)?,
            FamilySpec::ConstantModulus => InputDistribution::constant_modulus(power)?,
            FamilySpec::Constellation { points, probs } => InputDistribution::new(
                InputFamily::Constellation {
                    points: points.clone(),
                    probs: probs.clone(),
                },
                power,
            )?,
            FamilySpec::Qam(order) => InputDistribution::qam(*order, power)?,
            FamilySpec::OnOff { delta } => InputDistribution::on_off(*delta, power)?,
        };
        d.with_temporal(self.temporal).with_snr_rule(self.delta_rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub model: AlphaModel,
    pub alpha0: f64,
    pub rho_floor: f64,
    pub sigma2: f64,
    pub power: f64,
    pub truncation: Truncation,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySpec {
    /// Random input patterns for the `eta^2` bound check.
    pub trials: usize,
    /// Sample size for the Monte Carlo and KS checks.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub network: NetworkSpec,
    pub input: InputSpec,
    pub sweep_db: Vec<f64>,
    pub estimator: EstimatorSettings,
    pub max_blocklength: usize,
    pub verify: VerifySpec,
    /// Blocks drawn in simulate mode.
    pub simulate_blocks: usize,
    pub outputs: OutputSpec,
}

pub const DEFAULT_VERIFY_TRIALS: usize = 1_000_000;
pub const DEFAULT_VERIFY_SAMPLES: usize = 100_000;
pub const DEFAULT_SIMULATE_BLOCKS: usize = 1000;

impl ExperimentConfig {
    /// Defaults around a given alpha model.
    pub fn with_model(model: AlphaModel) -> Self {
        Self {
            mode: None,
            network: NetworkSpec {
                model,
                alpha0: 1.0,
                rho_floor: 0.5,
                sigma2: 1.0,
                power: 1.0,
                truncation: Truncation::Tolerance(DEFAULT_TAIL_EPS),
                seed: 0,
            },
            input: InputSpec {
                family: FamilySpec::Gaussian,
                delta_rule: SnrRule::Fixed,
                temporal: Temporal::Iid,
            },
            sweep_db: Vec::new(),
            estimator: EstimatorSettings {
                n: 1,
                outer: DEFAULT_OUTER,
                mixture: DEFAULT_MIXTURE,
                max_doublings: DEFAULT_MAX_DOUBLINGS,
                ci_cap: DEFAULT_CI_CAP,
            },
            max_blocklength: DEFAULT_MAX_BLOCKLENGTH,
            verify: VerifySpec {
                trials: DEFAULT_VERIFY_TRIALS,
                samples: DEFAULT_VERIFY_SAMPLES,
            },
            simulate_blocks: DEFAULT_SIMULATE_BLOCKS,
            outputs: OutputSpec::default(),
        }
    }

    /// Builds the alpha sequence; monotonicity of explicit lists is checked here.
    pub fn alphas(&self) -> Result<AlphaSequence> {
        AlphaSequence::build(self.network.model.clone(), self.network.alpha0, self.network.rho_floor)
    }

    pub fn network_config(&self) -> Result<NetworkConfig> {
        let mut c = NetworkConfig::new(self.alphas()?, self.network.sigma2, self.network.power)?
            .with_truncation(self.network.truncation)
            .with_seed(self.network.seed);
        c.max_blocklength = self.max_blocklength;
        Ok(c)
    }

    /// Input law at the configured network power.
    pub fn input_distribution(&self) -> Result<InputDistribution> {
        self.input.distribution(self.network.power)
    }
}

/// Raw entry: value text and its position.
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

const KEYS: &[&str] = &[
    "mode",
    "network.alpha_model",
    "network.rho",
    "network.beta",
    "network.alphas",
    "network.alpha0",
    "network.rho_floor",
    "network.sigma2",
    "network.power",
    "network.eps",
    "network.L",
    "network.seed",
    "input.family",
    "input.points",
    "input.probs",
    "input.qam",
    "input.delta",
    "input.delta_rule",
    "input.temporal",
    "sweep.snr_db",
    "estimator.n",
    "estimator.N",
    "estimator.M",
    "estimator.max_doublings",
    "estimator.ci_cap",
    "estimator.max_blocklength",
    "verify.trials",
    "verify.samples",
    "simulate.blocks",
    "outputs.csv",
    "outputs.report",
];

/// Every recognised key.
pub fn known_keys() -> &'static [&'static str] {
    KEYS
}

fn config_error(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        column,
        message: message.into(),
    }
}

struct Entries {
    map: BTreeMap<&'static str, Entry>,
    used: Vec<&'static str>,
}

impl Entries {
    fn take(&mut self, key: &'static str) -> Option<&Entry> {
        self.used.push(key);
        self.map.get(key)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        match self.map.get(key) {
            Some(e) => config_error(e.line, e.column, message),
            None => config_error(0, 0, message),
        }
    }

    fn parsed<T>(&mut self, key: &'static str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .ok_or_else(|| config_error(e.line, e.column, format!("{key}: expected {what}, got '{}'", e.value))),
        }
    }

    fn f64(&mut self, key: &'static str) -> Result<Option<f64>> {
        self.parsed(key, "a number", parse_f64)
    }

    fn usize(&mut self, key: &'static str) -> Result<Option<usize>> {
        self.parsed(key, "a nonnegative integer", |s| s.parse().ok())
    }

    fn u64(&mut self, key: &'static str) -> Result<Option<u64>> {
        self.parsed(key, "a nonnegative integer", |s| s.parse().ok())
    }

    fn list(&mut self, key: &'static str) -> Result<Option<Vec<f64>>> {
        self.parsed(key, "a comma-separated list of numbers", |s| {
            if s.trim().is_empty() {
                return Some(Vec::new());
            }
            s.split(',').map(|x| parse_f64(x.trim())).collect()
        })
    }

    fn text(&mut self, key: &'static str) -> Option<String> {
        self.take(key).map(|e| e.value.clone())
    }

    fn check(&self, key: &'static str, ok: bool, expected: &str, value: impl std::fmt::Display) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(self.err(key, format!("{key} = {value} is out of range (expected {expected})")))
        }
    }

    fn reject_unused(&self, key: &'static str, why: &str) -> Result<()> {
        if self.map.contains_key(key) {
            Err(self.err(key, format!("{key} is not used {why}")))
        } else {
            Ok(())
        }
    }
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_point(s: &str) -> Option<Complex64> {
    let (re, im) = s.split_once(':')?;
    Some(Complex64::new(parse_f64(re.trim())?, parse_f64(im.trim())?))
}

fn tokenize(text: &str) -> Result<BTreeMap<&'static str, Entry>> {
    let mut map: BTreeMap<&'static str, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let key_col = content.len() - content.trim_start().len() + 1;
        let Some((k, v)) = content.split_once('=') else {
            return Err(config_error(line, key_col, "expected 'key = value'"));
        };
        let key = k.trim();
        let Some(&known) = KEYS.iter().find(|&&x| x == key) else {
            return Err(config_error(line, key_col, format!("unknown key '{key}'")));
        };
        let value_col = k.len() + 2 + (v.len() - v.trim_start().len());
        if let Some(prev) = map.get(known) {
            return Err(config_error(
                line,
                key_col,
                format!("duplicate key '{key}' (first set on line {})", prev.line),
            ));
        }
        map.insert(
            known,
            Entry {
                value: v.trim().to_string(),
                line,
                column: value_col,
            },
        );
    }
    Ok(map)
}

/// Parses and validates a configuration. Explicit alpha lists are checked
/// for positivity here and for monotonicity by [`ExperimentConfig::alphas`].
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut e = Entries {
        map: tokenize(text)?,
        used: Vec::new(),
    };

    let mode = match e.text("mode") {
        None => None,
        Some(m) => Some(Mode::from_name(&m).ok_or_else(|| {
            e.err(
                "mode",
                format!(
                    "unknown mode '{m}' (expected one of {})",
                    Mode::ALL.map(Mode::name).join(", ")
                ),
            )
        })?),
    };

    let model_name = e.text("network.alpha_model").unwrap_or_else(|| "exponential".into());
    let model = match model_name.as_str() {
        "exponential" => {
            e.reject_unused("network.beta", "by alpha_model = exponential")?;
            e.reject_unused("network.alphas", "by alpha_model = exponential")?;
            let rho = e
                .f64("network.rho")?
                .ok_or_else(|| e.err("network.alpha_model", "network.rho is required for alpha_model = exponential"))?;
            e.check("network.rho", rho > 0.0 && rho < 1.0, "0 < rho < 1", rho)?;
            AlphaModel::Exponential { rho }
        }
        "polynomial" => {
            e.reject_unused("network.rho", "by alpha_model = polynomial")?;
            e.reject_unused("network.alphas", "by alpha_model = polynomial")?;
            let beta = e
                .f64("network.beta")?
                .ok_or_else(|| e.err("network.alpha_model", "network.beta is required for alpha_model = polynomial"))?;
            e.check("network.beta", beta > 0.0, "beta > 0", beta)?;
            AlphaModel::Polynomial { beta }
        }
        "explicit" => {
            e.reject_unused("network.rho", "by alpha_model = explicit")?;
            e.reject_unused("network.beta", "by alpha_model = explicit")?;
            let values = e
                .list("network.alphas")?
                .ok_or_else(|| e.err("network.alpha_model", "network.alphas is required for alpha_model = explicit"))?;
            e.check(
                "network.alphas",
                !values.is_empty() && values.iter().all(|v| *v > 0.0),
                "a non-empty list of positive values",
                format!("{values:?}"),
            )?;
            AlphaModel::Explicit { values }
        }
        other => {
            return Err(e.err(
                "network.alpha_model",
                format!("unknown alpha_model '{other}' (expected exponential, polynomial or explicit)"),
            ))
        }
    };
    let mut cfg = ExperimentConfig::with_model(model);
    cfg.mode = mode;

    if let Some(a0) = e.f64("network.alpha0")? {
        e.check("network.alpha0", a0 > 0.0, "alpha0 > 0", a0)?;
        cfg.network.alpha0 = a0;
    }
    if let Some(f) = e.f64("network.rho_floor")? {
        e.check("network.rho_floor", f > 0.0 && f < 1.0, "0 < rho_floor < 1", f)?;
        cfg.network.rho_floor = f;
    }
    if let Some(s) = e.f64("network.sigma2")? {
        e.check("network.sigma2", s > 0.0, "sigma2 > 0", s)?;
        cfg.network.sigma2 = s;
    }
    if let Some(p) = e.f64("network.power")? {
        e.check("network.power", p >= 0.0, "power >= 0", p)?;
        cfg.network.power = p;
    }
    match (e.f64("network.eps")?, e.usize("network.L")?) {
        (Some(_), Some(_)) => return Err(e.err("network.L", "set either network.L or network.eps, not both")),
        (Some(eps), None) => {
            e.check("network.eps", eps > 0.0, "eps > 0", eps)?;
            cfg.network.truncation = Truncation::Tolerance(eps);
        }
        (None, Some(l)) => cfg.network.truncation = Truncation::Fixed(l),
        (None, None) => {}
    }
    if let Some(s) = e.u64("network.seed")? {
        cfg.network.seed = s;
    }

    cfg.input.family = match e.text("input.family").as_deref().unwrap_or("gaussian") {
        "gaussian" => FamilySpec::Gaussian,
        "constant-modulus" => FamilySpec::ConstantModulus,
        "qam" => {
            let order = e
                .usize("input.qam")?
                .ok_or_else(|| e.err("input.family", "input.qam is required for family = qam"))?;
            FamilySpec::Qam(order)
        }
        "constellation" => {
            let points = e
                .parsed("input.points", "a comma-separated list of re:im points", |s| {
                    s.split(',').map(|p| parse_point(p.trim())).collect::<Option<Vec<_>>>()
                })?
                .ok_or_else(|| e.err("input.family", "input.points is required for family = constellation"))?;
            let probs = match e.list("input.probs")? {
                Some(p) => p,
                None => vec![1.0 / points.len() as f64; points.len()],
            };
            FamilySpec::Constellation { points, probs }
        }
        "on-off" => {
            let delta = e
                .f64("input.delta")?
                .ok_or_else(|| e.err("input.family", "input.delta is required for family = on-off"))?;
            e.check("input.delta", delta > 0.0 && delta <= 1.0, "0 < delta <= 1", delta)?;
            FamilySpec::OnOff { delta }
        }
        other => {
            return Err(e.err(
                "input.family",
                format!("unknown family '{other}' (expected gaussian, constant-modulus, qam, constellation or on-off)"),
            ))
        }
    };
    let family_keys: &[(&'static str, bool)] = &[
        ("input.qam", matches!(cfg.input.family, FamilySpec::Qam(_))),
        ("input.points", matches!(cfg.input.family, FamilySpec::Constellation { .. })),
        ("input.probs", matches!(cfg.input.family, FamilySpec::Constellation { .. })),
        ("input.delta", matches!(cfg.input.family, FamilySpec::OnOff { .. })),
    ];
    for &(key, used) in family_keys {
        if !used {
            e.reject_unused(key, "by this input family")?;
        }
    }
    cfg.input.delta_rule = match e.text("input.delta_rule").as_deref().unwrap_or("fixed") {
        "fixed" => SnrRule::Fixed,
        "inverse-snr" => SnrRule::InverseSnrDuty,
        other => {
            return Err(e.err(
                "input.delta_rule",
                format!("unknown delta_rule '{other}' (expected fixed or inverse-snr)"),
            ))
        }
    };
    cfg.input.temporal = match e.text("input.temporal").as_deref().unwrap_or("iid") {
        "iid" => Temporal::Iid,
        "repeat" => Temporal::Repeat,
        other => {
            return Err(e.err(
                "input.temporal",
                format!("unknown temporal '{other}' (expected iid or repeat)"),
            ))
        }
    };
    if let Err(err) = cfg.input_distribution() {
        let key = match cfg.input.family {
            FamilySpec::Constellation { .. } => "input.points",
            FamilySpec::Qam(_) => "input.qam",
            _ if cfg.input.delta_rule != SnrRule::Fixed => "input.delta_rule",
            _ => "input.family",
        };
        return Err(e.err(key, format!("{key}: {err}")));
    }

    if let Some(s) = e.list("sweep.snr_db")? {
        e.check(
            "sweep.snr_db",
            s.windows(2).all(|w| w[0] <= w[1]),
            "an ascending list",
            format!("{s:?}"),
        )?;
        cfg.sweep_db = s;
    }

    if let Some(m) = e.usize("estimator.max_blocklength")? {
        e.check("estimator.max_blocklength", m >= 1, "max_blocklength >= 1", m)?;
        cfg.max_blocklength = m;
    }
    if let Some(n) = e.usize("estimator.n")? {
        e.check(
            "estimator.n",
            n >= 1 && n <= cfg.max_blocklength,
            &format!("1 <= n <= {}", cfg.max_blocklength),
            n,
        )?;
        cfg.estimator.n = n;
    }
    if let Some(n) = e.usize("estimator.N")? {
        e.check("estimator.N", n >= MIN_SAMPLES, &format!("N >= {MIN_SAMPLES}"), n)?;
        cfg.estimator.outer = n;
    }
    if let Some(m) = e.usize("estimator.M")? {
        e.check("estimator.M", m >= MIN_SAMPLES, &format!("M >= {MIN_SAMPLES}"), m)?;
        cfg.estimator.mixture = m;
    }
    if let Some(d) = e.usize("estimator.max_doublings")? {
        e.check("estimator.max_doublings", d <= 10, "max_doublings <= 10", d)?;
        cfg.estimator.max_doublings = d;
    }
    if let Some(c) = e.f64("estimator.ci_cap")? {
        e.check("estimator.ci_cap", c > 0.0, "ci_cap > 0", c)?;
        cfg.estimator.ci_cap = c;
    }
    if let Some(t) = e.usize("verify.trials")? {
        e.check("verify.trials", t >= 1, "trials >= 1", t)?;
        cfg.verify.trials = t;
    }
    if let Some(s) = e.usize("verify.samples")? {
        e.check("verify.samples", s >= 100, "samples >= 100", s)?;
        cfg.verify.samples = s;
    }
    if let Some(b) = e.usize("simulate.blocks")? {
        e.check("simulate.blocks", b >= 1, "blocks >= 1", b)?;
        cfg.simulate_blocks = b;
    }
    cfg.outputs.csv = e.text("outputs.csv").filter(|s| !s.is_empty());
    cfg.outputs.report = e.text("outputs.report").filter(|s| !s.is_empty());

    debug_assert!(e.map.keys().all(|k| e.used.contains(k)), "every parsed key is consumed");
    Ok(cfg)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Writes every setting explicitly; `parse_config` reads it back unchanged.
pub fn serialize_config(c: &ExperimentConfig) -> String {
    let mut s = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    if let Some(m) = c.mode {
        put("mode", m.name().into());
    }
    match &c.network.model {
        AlphaModel::Exponential { rho } => {
            put("network.alpha_model", "exponential".into());
            put("network.rho", rho.to_string());
        }
        AlphaModel::Polynomial { beta } => {
            put("network.alpha_model", "polynomial".into());
            put("network.beta", beta.to_string());
        }
        AlphaModel::Explicit { values } => {
            put("network.alpha_model", "explicit".into());
            put("network.alphas", join(values));
        }
    }
    put("network.alpha0", c.network.alpha0.to_string());
    put("network.rho_floor", c.network.rho_floor.to_string());
    put("network.sigma2", c.network.sigma2.to_string());
    put("network.power", c.network.power.to_string());
    match c.network.truncation {
        Truncation::Tolerance(eps) => put("network.eps", eps.to_string()),
        Truncation::Fixed(l) => put("network.L", l.to_string()),
    }
    put("network.seed", c.network.seed.to_string());
    match &c.input.family {
        FamilySpec::Gaussian => put("input.family", "gaussian".into()),
        FamilySpec::ConstantModulus => put("input.family", "constant-modulus".into()),
        FamilySpec::Qam(order) => {
            put("input.family", "qam".into());
            put("input.qam", order.to_string());
        }
        FamilySpec::Constellation { points, probs } => {
            put("input.family", "constellation".into());
            put(
                "input.points",
                points.iter().map(|p| format!("{}:{}", p.re, p.im)).collect::<Vec<_>>().join(", "),
            );
            put("input.probs", join(probs));
        }
        FamilySpec::OnOff { delta } => {
            put("input.family", "on-off".into());
            put("input.delta", delta.to_string());
        }
    }
    put(
        "input.delta_rule",
        match c.input.delta_rule {
            SnrRule::Fixed => "fixed",
            SnrRule::InverseSnrDuty => "inverse-snr",
        }
        .into(),
    );
    put(
        "input.temporal",
        match c.input.temporal {
            Temporal::Iid => "iid",
            Temporal::Repeat => "repeat",
        }
        .into(),
    );
    put("sweep.snr_db", join(&c.sweep_db));
    put("estimator.n", c.estimator.n.to_string());
    put("estimator.N", c.estimator.outer.to_string());
    put("estimator.M", c.estimator.mixture.to_string());
    put("estimator.max_doublings", c.estimator.max_doublings.to_string());
    put("estimator.ci_cap", c.estimator.ci_cap.to_string());
    put("estimator.max_blocklength", c.max_blocklength.to_string());
    put("verify.trials", c.verify.trials.to_string());
    put("verify.samples", c.verify.samples.to_string());
    put("simulate.blocks", c.simulate_blocks.to_string());
    if let Some(p) = &c.outputs.csv {
        put("outputs.csv", p.clone());
    }
    if let Some(p) = &c.outputs.report {
        put("outputs.report", p.clone());
    }
    s
}
