//! Scenario files.
//!
//! ```json
//! { "beta": ["1"], "gamma": ["0", "1"], "w": "0", "N": 8,
//!   "frame": { "a": ["0", "0", "1/2"] },
//!   "grid": { "q_min": -8, "q_max": 8, "n_points": 1024 },
//!   "packet": { "q0": 1, "sigma": 0.5, "x0": 0 },
//!   "integrator": { "horizon": 1, "dt": 0.001 },
//!   "classical": { "masses": [1, 2.7], "x0": 0, "v0": 0 } }
//! ```
//!
//! Only `beta` and `gamma` are required. `frame.a` lists Taylor coefficients
//! of the x component, as in the group element format, so `["0","0","1/2"]`
//! is the frame with constant acceleration `1/2`. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::{GFunction, GeneratingSpec};
use crate::cocycle::{CocycleSpec, InternalEnergy};
use crate::qdyn::{FrameScenario, Grid1D, PacketSpec, ShiftMethod};
use crate::timealg::{parse_scalar, scalar_serde, scalar_vec_serde, Scalar, TimePoly, Vec3Poly, DEFAULT_DEGREE};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("malformed scenario JSON")]
    Json(#[from] serde_json::Error),
    #[error("scenario: {0}")]
    Invalid(String),
}

fn default_degree() -> usize {
    DEFAULT_DEGREE
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBlock {
    #[serde(with = "scalar_vec_serde", default)]
    pub a: Vec<Scalar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorBlock {
    pub horizon: f64,
    pub dt: f64,
    pub t0: f64,
    pub norm_tol: f64,
    pub shift: ShiftMethod,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        IntegratorBlock { horizon: 1.0, dt: 1e-3, t0: 0.0, norm_tol: 1e-8, shift: ShiftMethod::Spectral }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalBlock {
    pub masses: Vec<f64>,
    pub x0: f64,
    pub v0: f64,
    pub g: GFunction,
}

impl Default for ClassicalBlock {
    fn default() -> Self {
        ClassicalBlock { masses: vec![1.0, 2.7], x0: 0.0, v0: 0.0, g: GFunction::LinearC }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(with = "scalar_vec_serde")]
    pub beta: Vec<Scalar>,
    #[serde(with = "scalar_vec_serde")]
    pub gamma: Vec<Scalar>,
    #[serde(with = "scalar_serde", default)]
    pub w: Scalar,
    #[serde(rename = "N", default = "default_degree")]
    pub n: usize,
    #[serde(default)]
    pub frame: FrameBlock,
    #[serde(default)]
    pub grid: Option<Grid1D>,
    #[serde(default)]
    pub packet: PacketSpec,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default)]
    pub classical: ClassicalBlock,
}

impl Scenario {
    pub fn from_spec(spec: &CocycleSpec) -> Self {
        Scenario {
            beta: spec.beta.clone(),
            gamma: spec.gamma.clone(),
            w: Scalar::default(),
            n: DEFAULT_DEGREE,
            frame: FrameBlock::default(),
            grid: None,
            packet: PacketSpec::default(),
            integrator: IntegratorBlock::default(),
            classical: ClassicalBlock::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n == 0 {
            return Err(ScenarioError::Invalid("N must be positive".into()));
        }
        if self.frame.a.len() > self.n + 1 {
            return Err(ScenarioError::Invalid(format!("frame.a has degree above N = {}", self.n)));
        }
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }
        let i = &self.integrator;
        if !(i.dt > 0.0 && i.horizon > 0.0 && i.dt <= i.horizon) {
            return Err(ScenarioError::Invalid("integrator needs 0 < dt <= horizon".into()));
        }
        if !(self.packet.sigma > 0.0) {
            return Err(ScenarioError::Invalid("packet.sigma must be positive".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> CocycleSpec {
        CocycleSpec::new(self.beta.clone(), self.gamma.clone())
    }

    pub fn internal_energy(&self) -> InternalEnergy {
        InternalEnergy::new(self.w.clone())
    }

    pub fn frame_poly(&self) -> Result<TimePoly, ScenarioError> {
        TimePoly::new(self.frame.a.clone(), self.n).map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn frame_scenario(&self) -> Result<FrameScenario, ScenarioError> {
        let mut fs = FrameScenario::new(self.spec(), self.internal_energy(), self.frame_poly()?);
        if let Some(g) = self.grid {
            fs.grid = g;
        }
        fs.packet = self.packet;
        fs.horizon = self.integrator.horizon;
        fs.dt = self.integrator.dt;
        fs.t0 = self.integrator.t0;
        fs.norm_tol = self.integrator.norm_tol;
        fs.rep.shift = self.integrator.shift;
        Ok(fs)
    }

    pub fn generating_spec(&self) -> Result<GeneratingSpec, ScenarioError> {
        Ok(GeneratingSpec::new(self.spec(), Vec3Poly::along_x(self.frame_poly()?), self.classical.g))
    }

    /// Copy with one coefficient replaced; `key` is `beta<n>` or `gamma<n>`.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self, ScenarioError> {
        let bad = || ScenarioError::Invalid(format!("unknown sweep key {key:?}; use beta<n> or gamma<n>"));
        let (name, idx) = if let Some(i) = key.strip_prefix("beta") {
            ("beta", i)
        } else if let Some(i) = key.strip_prefix("gamma") {
            ("gamma", i)
        } else {
            return Err(bad());
        };
        let idx: usize = idx.parse().map_err(|_| bad())?;
        let v = parse_scalar(value).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        let mut out = self.clone();
        let list = if name == "beta" { &mut out.beta } else { &mut out.gamma };
        if list.len() <= idx {
            list.resize(idx + 1, Scalar::default());
        }
        list[idx] = v;
        Ok(out)
    }
}
