//! Run configuration: a flat `key = value` file merged with command-line
//! overrides, validated once and resolved against per-command defaults.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use ptlgi_core::sweep::{Objective, EP_PROXY_RATIO};
use ptlgi_core::target::{GridResolution, TauStrategy, MIN_GRID};
use ptlgi_core::QubitState;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    KCurve,
    Surface,
    Bounds,
    Optimize,
    LindbladCheck,
    Shots,
    Bloch,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KCurve => "k-curve",
            Command::Surface => "surface",
            Command::Bounds => "bounds",
            Command::Optimize => "optimize",
            Command::LindbladCheck => "lindblad-check",
            Command::Shots => "shots",
            Command::Bloch => "bloch",
        }
    }

    /// Commands that evaluate one dissipation ratio only.
    fn single_ratio(self) -> bool {
        matches!(self, Command::Optimize | Command::Shots | Command::Bloch)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every key accepted in a config file or via `--set`.
pub const KEYS: [&str; 21] = [
    "j_khz",
    "gamma_khz",
    "gamma_ratio",
    "gamma_ratios",
    "n",
    "tau_min",
    "tau_max",
    "tau_points",
    "tau",
    "grid",
    "theta_points",
    "phi_points",
    "objective",
    "shots",
    "rounds",
    "seed",
    "horizon",
    "dt",
    "samples",
    "state",
    "output",
];

/// Coupling used to convert `gamma_khz` when `j_khz` is not given.
pub const DEFAULT_J_KHZ: f64 = 10.4;

const K3_SLICES: [f64; 4] = [0.0, 0.472, 0.669, 0.942];
const K4_SLICES: [f64; 4] = [0.0, 0.708, 0.857, 0.915];
const BOUND_RATIOS: [f64; 12] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.942, EP_PROXY_RATIO];
const LINDBLAD_RATIOS: [f64; 4] = [0.0, 0.472, 0.708, 0.942];

#[derive(Debug, Clone, PartialEq)]
pub enum Dissipation {
    Unset,
    Ratio(f64),
    /// `γ` as `2π × kHz`.
    Khz(f64),
    Ratios(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Plus,
    Minus,
    Zero,
    One,
}

impl InitialState {
    pub fn state(self) -> QubitState {
        match self {
            InitialState::Plus => QubitState::plus(),
            InitialState::Minus => QubitState::minus(),
            InitialState::Zero => QubitState::zero(),
            InitialState::One => QubitState::one(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            InitialState::Plus => "plus",
            InitialState::Minus => "minus",
            InitialState::Zero => "zero",
            InitialState::One => "one",
        }
    }
}

/// Resolved configuration; every field holds its effective value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub j_khz: f64,
    pub dissipation: Dissipation,
    pub order: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub tau: Option<f64>,
    pub theta_points: usize,
    pub phi_points: usize,
    pub objective: Objective,
    pub shots: u64,
    pub rounds: usize,
    pub seed: u64,
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
    pub state: InitialState,
    pub output: Option<PathBuf>,
}

/// Raw `key → value` pairs in the order they were given; later sources win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::Config(format!(
                "unknown key `{key}` (known: {})",
                KEYS.join(", ")
            )));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse_file_text(text: &str) -> Result<Self> {
        let mut s = Self::new();
        let mut seen = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected `key = value`, got `{}`",
                    lineno + 1,
                    raw.trim()
                )));
            };
            let (k, v) = (k.trim(), v.trim());
            if seen.contains(&k) {
                return Err(CliError::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
            seen.push(k);
            s.set(k, v)?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_text(&text)
    }

    /// Overlay `other` on top of `self`.
    pub fn merge(&mut self, other: Settings) {
        self.values.extend(other.values);
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::field(key, format!("cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        let v = self.parse::<f64>(key)?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(CliError::field(key, "must be finite"));
            }
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        let x = x.trim();
                        x.parse::<f64>()
                            .ok()
                            .filter(|f| f.is_finite())
                            .ok_or_else(|| CliError::field(key, format!("cannot parse `{x}` as a number")))
                    })
                    .collect()
            })
            .transpose()
    }
}

impl RunConfig {
    /// Validate `settings` and fill in the defaults for `command`.
    pub fn resolve(command: Command, settings: &Settings) -> Result<Self> {
        let j_khz = settings.number("j_khz")?.unwrap_or(DEFAULT_J_KHZ);
        if j_khz <= 0.0 {
            return Err(CliError::field("j_khz", "must be > 0"));
        }

        let given: Vec<&str> = ["gamma_khz", "gamma_ratio", "gamma_ratios"]
            .into_iter()
            .filter(|k| settings.get(k).is_some())
            .collect();
        if given.len() > 1 {
            return Err(CliError::field(
                given[1],
                format!("conflicts with `{}`; give at most one of gamma_khz, gamma_ratio, gamma_ratios", given[0]),
            ));
        }
        let dissipation = if let Some(g) = settings.number("gamma_khz")? {
            Dissipation::Khz(g)
        } else if let Some(r) = settings.number("gamma_ratio")? {
            Dissipation::Ratio(r)
        } else if let Some(rs) = settings.list("gamma_ratios")? {
            Dissipation::Ratios(rs)
        } else {
            Dissipation::Unset
        };
        match &dissipation {
            Dissipation::Khz(g) | Dissipation::Ratio(g) if *g < 0.0 => {
                return Err(CliError::field(given[0], "must be >= 0"));
            }
            Dissipation::Ratios(rs) => {
                if rs.is_empty() || rs.iter().any(|&r| r < 0.0) {
                    return Err(CliError::field("gamma_ratios", "need one or more ratios >= 0"));
                }
                if command.single_ratio() {
                    return Err(CliError::field(
                        "gamma_ratios",
                        format!("{command} takes a single ratio; use gamma_ratio"),
                    ));
                }
            }
            _ => {}
        }

        let order = settings.parse::<usize>("n")?.unwrap_or(3);
        let four_at_most = matches!(
            command,
            Command::KCurve | Command::Surface | Command::Bounds | Command::Optimize
        );
        if order < 3 || (four_at_most && order > 4) {
            let allowed = if four_at_most { "3 or 4" } else { ">= 3" };
            return Err(CliError::field("n", format!("must be {allowed}, got {order}")));
        }

        let tau_min = settings.number("tau_min")?.unwrap_or(0.01);
        let tau_max = settings.number("tau_max")?.unwrap_or(2.0 * PI);
        let default_points = if command == Command::Shots { 25 } else { 400 };
        let tau_points = settings.parse::<usize>("tau_points")?.unwrap_or(default_points);
        if tau_min <= 0.0 {
            return Err(CliError::field("tau_min", "must be > 0"));
        }
        if tau_max < tau_min {
            return Err(CliError::field("tau_max", "must be >= tau_min"));
        }
        if tau_points < 1 || (tau_points == 1 && tau_max != tau_min) {
            return Err(CliError::field("tau_points", "need >= 2 points unless tau_min = tau_max"));
        }
        let tau = settings.number("tau")?;
        if matches!(tau, Some(t) if t <= 0.0) {
            return Err(CliError::field("tau", "must be > 0"));
        }

        let grid = settings.parse::<usize>("grid")?;
        let theta_points = settings.parse::<usize>("theta_points")?.or(grid).unwrap_or(201);
        let phi_points = settings.parse::<usize>("phi_points")?.or(grid).unwrap_or(201);
        for (key, v) in [("theta_points", theta_points), ("phi_points", phi_points)] {
            if v < MIN_GRID {
                return Err(CliError::field(key, format!("must be >= {MIN_GRID}, got {v}")));
            }
        }
        let objective = match settings.get("objective") {
            None => Objective::Max,
            Some(v) => v
                .parse::<Objective>()
                .map_err(|e| CliError::field("objective", e))?,
        };

        let shots = settings.parse::<u64>("shots")?.unwrap_or(ptlgi_core::shots::DEFAULT_SHOTS);
        if shots < 1 {
            return Err(CliError::field("shots", "must be >= 1"));
        }
        let rounds = settings.parse::<usize>("rounds")?.unwrap_or(ptlgi_core::shots::DEFAULT_ROUNDS);
        if rounds < 2 {
            return Err(CliError::field("rounds", "must be >= 2"));
        }
        let seed = settings.parse::<u64>("seed")?.unwrap_or(0);

        let default_horizon = if command == Command::Bloch { 2.0 } else { 5.0 };
        let horizon = settings.number("horizon")?.unwrap_or(default_horizon);
        if horizon <= 0.0 {
            return Err(CliError::field("horizon", "must be > 0"));
        }
        let dt = settings.number("dt")?.unwrap_or(ptlgi_core::lindblad::DEFAULT_DT);
        if !(dt > 0.0 && dt <= ptlgi_core::lindblad::MAX_DT) {
            return Err(CliError::field(
                "dt",
                format!("must lie in (0, {}]", ptlgi_core::lindblad::MAX_DT),
            ));
        }
        let samples = settings.parse::<usize>("samples")?.unwrap_or(100);
        if samples < 2 {
            return Err(CliError::field("samples", "must be >= 2"));
        }
        let state = match settings.get("state").unwrap_or("plus") {
            "plus" => InitialState::Plus,
            "minus" => InitialState::Minus,
            "zero" => InitialState::Zero,
            "one" => InitialState::One,
            other => {
                return Err(CliError::field(
                    "state",
                    format!("expected plus, minus, zero or one, got `{other}`"),
                ))
            }
        };
        let output = settings.get("output").map(PathBuf::from);

        Ok(Self {
            command,
            j_khz,
            dissipation,
            order,
            tau_min,
            tau_max,
            tau_points,
            tau,
            theta_points,
            phi_points,
            objective,
            shots,
            rounds,
            seed,
            horizon,
            dt,
            samples,
            state,
            output,
        })
    }

    /// Dissipation ratios the command runs over.
    pub fn ratios(&self) -> Vec<f64> {
        match &self.dissipation {
            Dissipation::Ratio(r) => vec![*r],
            Dissipation::Khz(g) => vec![g / self.j_khz],
            Dissipation::Ratios(rs) => rs.clone(),
            Dissipation::Unset => match self.command {
                Command::KCurve if self.order == 4 => K4_SLICES.to_vec(),
                Command::KCurve => K3_SLICES.to_vec(),
                Command::Surface => (0..100).map(|k| k as f64 / 100.0).collect(),
                Command::Bounds => BOUND_RATIOS.to_vec(),
                Command::LindbladCheck => LINDBLAD_RATIOS.to_vec(),
                Command::Optimize => vec![0.99],
                Command::Shots => vec![0.472],
                Command::Bloch => vec![0.9],
            },
        }
    }

    /// The single ratio of a single-ratio command.
    pub fn ratio(&self) -> f64 {
        self.ratios()[0]
    }

    /// `tau_points` values from `tau_min` to `tau_max` inclusive.
    pub fn taus(&self) -> Vec<f64> {
        if self.tau_points == 1 {
            return vec![self.tau_min];
        }
        let last = (self.tau_points - 1) as f64;
        (0..self.tau_points)
            .map(|k| {
                if k + 1 == self.tau_points {
                    self.tau_max
                } else {
                    self.tau_min + (self.tau_max - self.tau_min) * k as f64 / last
                }
            })
            .collect()
    }

    pub fn grid(&self) -> GridResolution {
        GridResolution {
            theta_points: self.theta_points,
            phi_points: self.phi_points,
        }
    }

    pub fn tau_strategy(&self) -> TauStrategy {
        self.tau.map_or(TauStrategy::Extremize, TauStrategy::Fixed)
    }

    /// Effective settings relevant to the command, in a fixed order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.name().to_string())];
        if let Dissipation::Khz(g) = &self.dissipation {
            out.push(("j_khz", self.j_khz.to_string()));
            out.push(("gamma_khz", g.to_string()));
        }
        let ratios: Vec<String> = self.ratios().iter().map(f64::to_string).collect();
        out.push(("gamma_ratios", ratios.join(",")));
        let c = self.command;
        if c != Command::LindbladCheck && c != Command::Bloch {
            out.push(("n", self.order.to_string()));
        }
        if matches!(c, Command::KCurve | Command::Surface | Command::Shots) {
            out.push(("tau_min", self.tau_min.to_string()));
            out.push(("tau_max", self.tau_max.to_string()));
            out.push(("tau_points", self.tau_points.to_string()));
        }
        if c == Command::Optimize {
            out.push(("theta_points", self.theta_points.to_string()));
            out.push(("phi_points", self.phi_points.to_string()));
            out.push(("objective", self.objective.name().to_string()));
            out.push(("tau", self.tau.map_or("extremize".to_string(), |t| t.to_string())));
        }
        if c == Command::Shots {
            out.push(("shots", self.shots.to_string()));
            out.push(("rounds", self.rounds.to_string()));
            out.push(("seed", self.seed.to_string()));
        }
        if matches!(c, Command::LindbladCheck | Command::Bloch) {
            out.push(("horizon", self.horizon.to_string()));
        }
        if c == Command::LindbladCheck {
            out.push(("dt", self.dt.to_string()));
        }
        if c == Command::Bloch {
            out.push(("samples", self.samples.to_string()));
            out.push(("state", self.state.name().to_string()));
        }
        out
    }
}
