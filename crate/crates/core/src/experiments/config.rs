//! Scenario configuration: flat `key = value` text, `#` comments.
//!
//! Recognised keys (all optional, defaults in brackets):
//!
//! ```text
//! scenario              main0 | main1 | counterexample | expint | degiorgi-sweep
//! geometry.n            ball dimension [3]
//! geometry.radius       [1.0]
//! geometry.cells        radial cells on the coarsest mesh [64]
//! geometry.refinements  number of meshes, each halving the cell size [3]
//! geometry.cells_per_e_fold  graded-mesh density for spike data [32]
//! weight.kind           uniform | power [uniform]
//! weight.alpha          exponent of |x|^alpha [0]
//! operator.kind         uniform | a2-degenerate [uniform]
//! young.p, young.q      data Young function t^p log(e+t)^q [1.5, 2]
//! sobolev.sigma         gain exponent σ [3]
//! data.kind             family | constant | bump | zero [family]
//! solver.rtol           [1e-10]
//! output.dir            [out]
//! spike.depths          comma list of cutoff depths T (cutoff at e^-T) [2,4,8,16,32,64,128]
//! spike.scales          comma list of N for the f/N scaling table [10,1000]
//! counterexample.k_max            [16]
//! counterexample.q_below          [0]
//! counterexample.q_above          [2]
//! counterexample.solver_k_max     [6]
//! expint.gamma_factor   γ = factor / C0² [2]
//! sweep.sigma_points, sweep.epsilon_points, sweep.k_max, sweep.m0   [10, 10, 100000, 2]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::young::YoungParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Main0,
    Main1,
    Counterexample,
    Expint,
    DegiorgiSweep,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Main0 => "main0",
            ScenarioKind::Main1 => "main1",
            ScenarioKind::Counterexample => "counterexample",
            ScenarioKind::Expint => "expint",
            ScenarioKind::DegiorgiSweep => "degiorgi-sweep",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main0" => Ok(ScenarioKind::Main0),
            "main1" => Ok(ScenarioKind::Main1),
            "counterexample" => Ok(ScenarioKind::Counterexample),
            "expint" => Ok(ScenarioKind::Expint),
            "degiorgi-sweep" => Ok(ScenarioKind::DegiorgiSweep),
            other => Err(Error::Config(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OperatorKind {
    Uniform,
    A2Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DataKind {
    /// The five-member family used for the L∞ bound.
    Family,
    Constant,
    Bump,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,
    pub n: usize,
    pub radius: f64,
    pub cells: usize,
    pub refinements: usize,
    pub cells_per_e_fold: usize,
    /// Exponent of the power weight; zero means `v ≡ 1`.
    pub weight_alpha: f64,
    pub operator: OperatorKind,
    pub young_p: f64,
    pub young_q: f64,
    pub sigma: f64,
    pub data: DataKind,
    pub rtol: f64,
    pub out_dir: PathBuf,
    pub spike_depths: Vec<f64>,
    pub spike_scales: Vec<f64>,
    pub cex_k_max: usize,
    pub cex_q_below: f64,
    pub cex_q_above: f64,
    pub cex_solver_k_max: usize,
    pub gamma_factor: f64,
    pub sweep_sigma_points: usize,
    pub sweep_epsilon_points: usize,
    pub sweep_k_max: usize,
    pub sweep_m0: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            n: 3,
            radius: 1.0,
            cells: 64,
            refinements: 3,
            cells_per_e_fold: 32,
            weight_alpha: 0.0,
            operator: OperatorKind::Uniform,
            young_p: 1.5,
            young_q: 2.0,
            sigma: 3.0,
            data: DataKind::Family,
            rtol: 1e-10,
            out_dir: PathBuf::from("out"),
            spike_depths: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
            spike_scales: vec![10.0, 1000.0],
            cex_k_max: 16,
            cex_q_below: 0.0,
            cex_q_above: 2.0,
            cex_solver_k_max: 6,
            gamma_factor: 2.0,
            sweep_sigma_points: 10,
            sweep_epsilon_points: 10,
            sweep_k_max: 100_000,
            sweep_m0: 2.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|s| parse::<f64>(key, s.trim())).collect()
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn young(&self) -> Result<YoungParams> {
        YoungParams::new(self.young_p, self.young_q).map_err(|e| Error::Config(e.to_string()))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scenario" => self.scenario = Some(value.parse()?),
            "geometry.n" => self.n = parse(key, value)?,
            "geometry.radius" => self.radius = parse(key, value)?,
            "geometry.cells" => self.cells = parse(key, value)?,
            "geometry.refinements" => self.refinements = parse(key, value)?,
            "geometry.cells_per_e_fold" => self.cells_per_e_fold = parse(key, value)?,
            "weight.kind" => match value {
                "uniform" => self.weight_alpha = 0.0,
                "power" => {}
                _ => return Err(Error::Config(format!("weight.kind: unknown kind {value:?}"))),
            },
            "weight.alpha" => self.weight_alpha = parse(key, value)?,
            "operator.kind" => {
                self.operator = match value {
                    "uniform" => OperatorKind::Uniform,
                    "a2-degenerate" => OperatorKind::A2Degenerate,
                    _ => return Err(Error::Config(format!("operator.kind: unknown kind {value:?}"))),
                }
            }
            "young.p" => self.young_p = parse(key, value)?,
            "young.q" => self.young_q = parse(key, value)?,
            "sobolev.sigma" => self.sigma = parse(key, value)?,
            "data.kind" => {
                self.data = match value {
                    "family" => DataKind::Family,
                    "constant" => DataKind::Constant,
                    "bump" => DataKind::Bump,
                    "zero" => DataKind::Zero,
                    _ => return Err(Error::Config(format!("data.kind: unknown kind {value:?}"))),
                }
            }
            "solver.rtol" => self.rtol = parse(key, value)?,
            "output.dir" => self.out_dir = PathBuf::from(value),
            "spike.depths" => self.spike_depths = parse_list(key, value)?,
            "spike.scales" => self.spike_scales = parse_list(key, value)?,
            "counterexample.k_max" => self.cex_k_max = parse(key, value)?,
            "counterexample.q_below" => self.cex_q_below = parse(key, value)?,
            "counterexample.q_above" => self.cex_q_above = parse(key, value)?,
            "counterexample.solver_k_max" => self.cex_solver_k_max = parse(key, value)?,
            "expint.gamma_factor" => self.gamma_factor = parse(key, value)?,
            "sweep.sigma_points" => self.sweep_sigma_points = parse(key, value)?,
            "sweep.epsilon_points" => self.sweep_epsilon_points = parse(key, value)?,
            "sweep.k_max" => self.sweep_k_max = parse(key, value)?,
            "sweep.m0" => self.sweep_m0 = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Checks the invariants a scenario relies on.
    pub fn validate(&self, kind: ScenarioKind) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(declared) = self.scenario {
            if declared != kind {
                return bad(format!("config declares scenario {declared}, asked to run {kind}"));
            }
        }
        if kind == ScenarioKind::DegiorgiSweep {
            if self.sweep_sigma_points == 0 || self.sweep_epsilon_points == 0 {
                return bad("sweep grid must be nonempty".into());
            }
            if !(self.sweep_m0 >= 2.0) {
                return bad(format!("sweep.m0 must be >= 2, got {}", self.sweep_m0));
            }
            return Ok(());
        }
        if self.n < 3 {
            return bad(format!("ball scenarios need n >= 3, got {}", self.n));
        }
        if self.refinements == 0 {
            return bad("geometry.refinements must be >= 1".into());
        }
        if self.cells < 16 {
            return bad(format!("geometry.cells must be >= 16, got {}", self.cells));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("geometry.radius must be > 0, got {}", self.radius));
        }
        if !(self.rtol > 0.0 && self.rtol <= 1e-4) {
            return bad(format!("solver.rtol must lie in (0, 1e-4], got {}", self.rtol));
        }
        if self.operator == OperatorKind::A2Degenerate && !(self.weight_alpha > 0.0 && self.weight_alpha < self.n as f64) {
            return bad(format!("a2-degenerate operator needs 0 < weight.alpha < n, got {}", self.weight_alpha));
        }
        if self.operator == OperatorKind::Uniform && self.weight_alpha != 0.0 {
            return bad("a power weight needs operator.kind = a2-degenerate".into());
        }
        if matches!(kind, ScenarioKind::Main0 | ScenarioKind::Main1 | ScenarioKind::Expint) {
            if !(self.sigma > 1.0) {
                return bad(format!("sobolev.sigma must be > 1, got {}", self.sigma));
            }
            let sp = self.sigma / (self.sigma - 1.0);
            if (self.young_p - sp).abs() > 1e-12 * sp {
                return bad(format!("young.p must equal σ' = {sp}, got {}", self.young_p));
            }
            self.young()?;
            if kind != ScenarioKind::Expint && !(self.young_q > sp) {
                return bad(format!("young.q must exceed σ' = {sp}, got {}", self.young_q));
            }
            if kind == ScenarioKind::Main0 && self.data == DataKind::Zero {
                return bad("main0 needs nonzero data".into());
            }
            if kind == ScenarioKind::Main0 && self.refinements < 2 {
                return bad("main0 needs at least two refinement levels".into());
            }
        }
        if kind == ScenarioKind::Main1 && (self.spike_depths.is_empty() || self.spike_depths.iter().any(|d| !(*d > 0.0))) {
            return bad("spike.depths must be a nonempty list of positive depths".into());
        }
        if kind == ScenarioKind::Counterexample && self.cex_k_max < 12 {
            return bad(format!("counterexample.k_max must be >= 12, got {}", self.cex_k_max));
        }
        if kind == ScenarioKind::Expint && !(self.gamma_factor > 0.0) {
            return bad("expint.gamma_factor must be > 0".into());
        }
        Ok(())
    }
}

impl FromStr for ScenarioConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, e.to_string().trim_start_matches("config error: "))))?;
        }
        Ok(cfg)
    }
}
