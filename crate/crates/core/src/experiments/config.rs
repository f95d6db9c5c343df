//! Flat `key = value` configuration with per-experiment defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::calibration;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    LowerSingle,
    LowerBlock,
    UpperSchatten,
    GoodVector,
    LiftSim,
    ChebEnvelope,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::LowerSingle,
        ExperimentKind::LowerBlock,
        ExperimentKind::UpperSchatten,
        ExperimentKind::GoodVector,
        ExperimentKind::LiftSim,
        ExperimentKind::ChebEnvelope,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::LowerSingle => "lower-single",
            ExperimentKind::LowerBlock => "lower-block",
            ExperimentKind::UpperSchatten => "upper-schatten",
            ExperimentKind::GoodVector => "good-vector",
            ExperimentKind::LiftSim => "lift-sim",
            ExperimentKind::ChebEnvelope => "cheb-envelope",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::config(format!("unknown experiment '{s}'")))
    }
}

/// Every recognized key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("experiment", "experiment name"),
    ("n", "dimension (rows for upper-schatten)"),
    ("d", "columns for upper-schatten"),
    ("eps", "accuracy parameter(s), comma list"),
    ("p", "Schatten exponent(s), comma list"),
    ("q_spec", "Chebyshev degree of the hard spectrum"),
    ("q", "Krylov iteration grid"),
    ("r", "block iteration grid"),
    ("s", "block size grid"),
    ("t", "rectangular Krylov step grid, or 'auto'"),
    ("budget", "matched total queries for lower-block, or 'none'"),
    ("k", "adaptive queries K for lift-sim"),
    ("trials", "trials per grid point"),
    ("seed", "base seed (mandatory)"),
    ("out", "CSV output path, or '-' for stdout"),
    ("instances", "distinct random instances shared by the trials, or 'auto'"),
    ("strategy", "adaptive strategy name(s) for lift-sim, comma list"),
    ("case", "good-vector case(s), comma list of 1..4"),
    ("alpha", "family-wise significance for KS panels"),
    ("invariant_runs", "lift-sim runs checked for P1-P4"),
    ("compare", "lift-sim: run the adaptive-vs-block comparison"),
    ("compare_n", "lift-sim comparison dimension"),
    ("compare_q_spec", "lift-sim comparison hard-spectrum degree"),
    ("compare_eps", "lift-sim comparison eps"),
    ("compare_k", "lift-sim comparison K"),
    ("compare_trials", "lift-sim comparison trials"),
    ("concentration", "lower-block: run the concentration suite"),
    ("d_max", "cheb-envelope largest degree"),
    ("q_low", "lower-single: q at which correlation must stay small"),
    ("tau_low", "lower-single: frozen correlation threshold"),
    ("c_hat", "upper-schatten: constant in t*"),
];

/// Default values for `kind`, as strings in the same syntax a file uses.
pub fn defaults(kind: ExperimentKind) -> Vec<(&'static str, String)> {
    let mut v: Vec<(&'static str, String)> =
        vec![("experiment", kind.name().to_string()), ("out", "-".to_string()), ("instances", "auto".to_string())];
    let extra: Vec<(&'static str, String)> = match kind {
        ExperimentKind::LowerSingle => vec![
            ("n", "2049".into()),
            ("eps", "0.04".into()),
            ("q_spec", "31".into()),
            ("q", "4,8,16,32,64,128".into()),
            ("trials", "100".into()),
            ("q_low", "8".into()),
            ("tau_low", format!("{}", calibration::TAU_LOW)),
        ],
        ExperimentKind::LowerBlock => vec![
            ("n", "2049".into()),
            ("eps", "0.04".into()),
            ("q_spec", "31".into()),
            ("r", "16".into()),
            ("s", "16".into()),
            ("budget", "none".into()),
            ("trials", "100".into()),
            ("concentration", "false".into()),
        ],
        ExperimentKind::UpperSchatten => vec![
            ("n", "300".into()),
            ("d", "200".into()),
            ("eps", "0.05,0.1".into()),
            ("p", "1,2".into()),
            ("t", "auto".into()),
            ("trials", "100".into()),
            ("c_hat", format!("{}", calibration::UPPER_C_HAT)),
        ],
        ExperimentKind::GoodVector => vec![("case", "1,2,3,4".into()), ("trials", "100".into())],
        ExperimentKind::LiftSim => vec![
            ("n", "32".into()),
            ("eps", "0.25".into()),
            ("k", "3".into()),
            ("strategy", "power-method,fixed-directions".into()),
            ("trials", "2000".into()),
            ("alpha", "0.001".into()),
            ("invariant_runs", "20".into()),
            ("compare", "true".into()),
            ("compare_n", "513".into()),
            ("compare_q_spec", "7".into()),
            ("compare_eps", "0.25".into()),
            ("compare_k", "6".into()),
            ("compare_trials", "100".into()),
        ],
        ExperimentKind::ChebEnvelope => {
            vec![("d_max", "100".into()), ("eps", "0.01,0.02,0.04,0.05,0.08,0.1,0.15,0.2,0.25".into())]
        }
    };
    v.extend(extra);
    v
}

/// Raw key/value layer. Later layers override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| Error::config(format!("line {}: expected key = value", idx + 1)))?;
            map.set(k.trim(), v.trim())?;
        }
        Ok(map)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::config(format!("unknown key '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `self` with `other`'s values taking precedence.
    pub fn overlay(&self, other: &ConfigMap) -> ConfigMap {
        let mut values = self.values.clone();
        values.extend(other.values.iter().map(|(k, v)| (k.clone(), v.clone())));
        ConfigMap { values }
    }

    /// Layers `defaults(kind)` under `self` and types the result.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        if let Some(named) = self.get("experiment") {
            if named.parse::<ExperimentKind>()? != kind {
                return Err(Error::config(format!("config names experiment '{named}', running '{kind}'")));
            }
        }
        let mut base = ConfigMap::new();
        for (k, v) in defaults(kind) {
            base.set(k, &v)?;
        }
        ExperimentConfig::from_map(kind, &base.overlay(self))
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Integer grid: `a:b:step`, `a:b` (step 1) or a comma list.
pub fn parse_usize_grid(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    let bad = || Error::config(format!("bad integer grid '{text}'"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(bad());
        }
        let a: usize = parts[0].parse().map_err(|_| bad())?;
        let b: usize = parts[1].parse().map_err(|_| bad())?;
        let step: usize = if parts.len() == 3 { parts[2].parse().map_err(|_| bad())? } else { 1 };
        if step == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).step_by(step).collect());
    }
    text.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect()
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::config(format!("bad number list '{text}'"));
    let v: Vec<f64> = text.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(v)
}

fn parse_bool(key: &str, text: &str) -> Result<bool> {
    match text.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(format!("{key}: expected true or false, got '{other}'"))),
    }
}

/// Typed configuration. Keys irrelevant to `experiment` keep their defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub d: usize,
    pub eps: Vec<f64>,
    pub p: Vec<f64>,
    pub q_spec: usize,
    pub q: Vec<usize>,
    pub r: Vec<usize>,
    pub s: Vec<usize>,
    /// Empty means "derive from t*".
    pub t: Vec<usize>,
    pub budget: Option<usize>,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// `None` means the experiment's own rule.
    pub instances: Option<usize>,
    pub strategy: Vec<String>,
    pub case: Vec<u8>,
    pub alpha: f64,
    pub invariant_runs: usize,
    pub compare: bool,
    pub compare_n: usize,
    pub compare_q_spec: usize,
    pub compare_eps: f64,
    pub compare_k: usize,
    pub compare_trials: usize,
    pub concentration: bool,
    pub d_max: usize,
    pub q_low: usize,
    pub tau_low: f64,
    pub c_hat: f64,
}

impl ExperimentConfig {
    fn from_map(kind: ExperimentKind, m: &ConfigMap) -> Result<Self> {
        let get = |k: &str| m.get(k);
        let usize_of = |k: &str, default: usize| -> Result<usize> {
            match get(k) {
                None => Ok(default),
                Some(v) => v.trim().parse().map_err(|_| Error::config(format!("{k}: expected an integer, got '{v}'"))),
            }
        };
        let f64_of = |k: &str, default: f64| -> Result<f64> {
            match get(k) {
                None => Ok(default),
                Some(v) => v.trim().parse().map_err(|_| Error::config(format!("{k}: expected a number, got '{v}'"))),
            }
        };
        let grid = |k: &str| -> Result<Vec<usize>> { get(k).map_or(Ok(Vec::new()), parse_usize_grid) };
        let seed = match get("seed") {
            None => return Err(Error::config("seed is mandatory")),
            Some(v) => {
                v.trim().parse::<u64>().map_err(|_| Error::config(format!("seed: expected an integer, got '{v}'")))?
            }
        };
        let out = match get("out").map(str::trim) {
            None | Some("-") | Some("") => None,
            Some(path) => Some(PathBuf::from(path)),
        };
        let instances = match get("instances").map(str::trim) {
            None | Some("auto") => None,
            Some(v) => Some(v.parse().map_err(|_| Error::config(format!("instances: bad value '{v}'")))?),
        };
        let budget = match get("budget").map(str::trim) {
            None | Some("none") => None,
            Some(v) => Some(v.parse().map_err(|_| Error::config(format!("budget: bad value '{v}'")))?),
        };
        let t = match get("t").map(str::trim) {
            None | Some("auto") => Vec::new(),
            Some(v) => parse_usize_grid(v)?,
        };
        let case = match get("case") {
            None => Vec::new(),
            Some(v) => parse_usize_grid(v)?
                .into_iter()
                .map(|c| u8::try_from(c).map_err(|_| Error::config(format!("case {c} out of range"))))
                .collect::<Result<_>>()?,
        };
        let cfg = ExperimentConfig {
            experiment: kind,
            n: usize_of("n", 0)?,
            d: usize_of("d", 0)?,
            eps: get("eps").map_or(Ok(Vec::new()), parse_f64_list)?,
            p: get("p").map_or(Ok(Vec::new()), parse_f64_list)?,
            q_spec: usize_of("q_spec", 0)?,
            q: grid("q")?,
            r: grid("r")?,
            s: grid("s")?,
            t,
            budget,
            k: usize_of("k", 0)?,
            trials: usize_of("trials", 0)?,
            seed,
            out,
            instances,
            strategy: get("strategy")
                .map(|v| v.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect())
                .unwrap_or_default(),
            case,
            alpha: f64_of("alpha", 0.001)?,
            invariant_runs: usize_of("invariant_runs", 0)?,
            compare: get("compare").map_or(Ok(false), |v| parse_bool("compare", v))?,
            compare_n: usize_of("compare_n", 0)?,
            compare_q_spec: usize_of("compare_q_spec", 0)?,
            compare_eps: f64_of("compare_eps", 0.25)?,
            compare_k: usize_of("compare_k", 0)?,
            compare_trials: usize_of("compare_trials", 0)?,
            concentration: get("concentration").map_or(Ok(false), |v| parse_bool("concentration", v))?,
            d_max: usize_of("d_max", 0)?,
            q_low: usize_of("q_low", 0)?,
            tau_low: f64_of("tau_low", calibration::TAU_LOW)?,
            c_hat: f64_of("c_hat", calibration::UPPER_C_HAT)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The single `eps` an experiment needs.
    pub fn single_eps(&self) -> Result<f64> {
        match self.eps.as_slice() {
            [e] => Ok(*e),
            _ => Err(Error::config(format!("{} takes exactly one eps", self.experiment))),
        }
    }

    fn validate(&self) -> Result<()> {
        let need = |ok: bool, msg: String| if ok { Ok(()) } else { Err(Error::config(msg)) };
        if self.experiment != ExperimentKind::ChebEnvelope && self.experiment != ExperimentKind::GoodVector {
            need(self.trials >= 1, "trials must be at least 1".into())?;
        }
        for &e in &self.eps {
            need(e > 0.0 && e < 1.0, format!("eps = {e} outside (0, 1)"))?;
        }
        match self.experiment {
            ExperimentKind::LowerSingle => {
                let eps = self.single_eps()?;
                need(self.n as f64 >= 1.0 / (eps * eps), format!("n = {} is below 1/eps^2", self.n))?;
                need(self.q_spec >= 1, "q_spec must be positive".into())?;
                need(
                    self.n >= 1 && (self.n - 1).is_multiple_of(self.q_spec + 1),
                    format!(
                        "(n - 1) = {} is not divisible by (q_spec + 1) = {}; nearest valid n is {}",
                        self.n.saturating_sub(1),
                        self.q_spec + 1,
                        crate::operators::nearest_valid_n(self.n, self.q_spec)
                    ),
                )?;
                need(!self.q.is_empty() && self.q.iter().all(|&q| q >= 1), "q grid must hold positive values".into())?;
            }
            ExperimentKind::LowerBlock => {
                let eps = self.single_eps()?;
                need(
                    self.n as f64 >= eps.powf(-2.01),
                    format!("n = {} is below eps^-2.01 = {:.0}", self.n, eps.powf(-2.01)),
                )?;
                need(
                    self.q_spec >= 1 && self.n >= 1 && (self.n - 1).is_multiple_of(self.q_spec + 1),
                    format!("(n - 1) is not divisible by (q_spec + 1) = {}", self.q_spec + 1),
                )?;
                need(!self.s.is_empty() && self.s.iter().all(|&s| s >= 1), "s grid must hold positive values".into())?;
                for (r, s) in self.block_pairs()? {
                    need(r >= 1, format!("budget leaves r = 0 for s = {s}"))?;
                    need(s * (r + 1) < self.n, format!("s(r+1) = {} must be below n = {}", s * (r + 1), self.n))?;
                }
            }
            ExperimentKind::UpperSchatten => {
                need(self.d >= 8 && self.n >= self.d, "upper-schatten needs n >= d >= 8".into())?;
                need(!self.p.is_empty(), "p list is empty".into())?;
                for &p in &self.p {
                    need([1.0, 2.0, 3.0, 4.0].contains(&p), format!("p = {p} not in {{1, 2, 3, 4}}"))?;
                }
                need(!self.eps.is_empty(), "eps list is empty".into())?;
                need(self.c_hat > 0.0, "c_hat must be positive".into())?;
            }
            ExperimentKind::GoodVector => {
                need(!self.case.is_empty(), "case list is empty".into())?;
                for &c in &self.case {
                    need((1..=4).contains(&c), format!("case {c} is not one of 1..4"))?;
                }
                need(self.trials >= 1, "trials must be at least 1".into())?;
            }
            ExperimentKind::LiftSim => {
                need(
                    self.n <= crate::lifting::DENSE_LIMIT,
                    format!("n = {} exceeds {}", self.n, crate::lifting::DENSE_LIMIT),
                )?;
                need(self.k >= 1, "k must be positive".into())?;
                need(self.k * self.k < self.n, format!("K^2 = {} must be below n = {}", self.k * self.k, self.n))?;
                need(!self.strategy.is_empty(), "strategy list is empty".into())?;
                for s in &self.strategy {
                    crate::lifting::strategy_by_name(s)?;
                }
                need(self.alpha > 0.0 && self.alpha < 1.0, "alpha outside (0, 1)".into())?;
                if self.compare {
                    need(
                        self.compare_k * self.compare_k < self.compare_n,
                        "compare_k^2 must be below compare_n".into(),
                    )?;
                }
            }
            ExperimentKind::ChebEnvelope => {
                need(self.d_max >= 1, "d_max must be positive".into())?;
                need(!self.eps.is_empty(), "eps list is empty".into())?;
            }
        }
        Ok(())
    }

    /// `(r, s)` pairs for lower-block: `(budget / s, s)` when a budget is set,
    /// the Cartesian grid otherwise.
    pub fn block_pairs(&self) -> Result<Vec<(usize, usize)>> {
        match self.budget {
            Some(b) => self
                .s
                .iter()
                .map(|&s| {
                    if b % s != 0 {
                        Err(Error::config(format!("budget {b} is not a multiple of s = {s}")))
                    } else {
                        Ok((b / s, s))
                    }
                })
                .collect(),
            None => {
                if self.r.is_empty() {
                    return Err(Error::config("r grid is empty".to_string()));
                }
                Ok(self.r.iter().flat_map(|&r| self.s.iter().map(move |&s| (r, s))).collect())
            }
        }
    }
}

/// The `show-config` listing: every key with the default for `kind`.
pub fn show_config(kind: ExperimentKind) -> String {
    let defaults = defaults(kind);
    let mut out = format!("# defaults for {kind}\n");
    for (key, help) in KEYS {
        let value = defaults.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        match value {
            Some(v) => out.push_str(&format!("{key} = {v}  # {help}\n")),
            None if *key == "seed" => out.push_str(&format!("# {key} = <required>  # {help}\n")),
            None => {}
        }
    }
    out
}
