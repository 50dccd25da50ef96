//! JSON-configured runs: one waveform, one backend, an optional parameter
//! sweep and an optional power-law fit of the energy shift.

mod run;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::condensate::grid::Grid;
use crate::condensate::ground_state::GroundStateOptions;
use crate::condensate::trap::{BeamZeta, Mat3};
use crate::em_parametric::Axis;
use crate::error::{Error, Result};
use crate::estimates::EstimateInputs;
use crate::point_mass::{BarbellConfig, ScissorsConfig};
use crate::scaling::{log_sweep, ScalingVerdict};
use crate::waveform::{Envelope, GwWaveform};

pub use run::run_scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    pub amplitude: f64,
    pub angular_frequency: f64,
    #[serde(default)]
    pub phase: f64,
    pub duration: f64,
    #[serde(default)]
    pub envelope: Option<Envelope>,
}

impl WaveformSpec {
    pub fn build(&self) -> Result<GwWaveform> {
        GwWaveform::new(
            self.amplitude,
            self.angular_frequency,
            self.phase,
            self.envelope.unwrap_or(Envelope::Rectangular),
            self.duration,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Amplitude,
    Phase,
    AngularFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub log: Option<LogRange>,
}

impl Sweep {
    pub fn values(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.log) {
            (Some(v), None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(r)) => {
                if !(r.lo > 0.0 && r.hi > r.lo && r.points >= 2) {
                    return Err(Error::invalid("log sweep needs 0 < lo < hi and at least 2 points"));
                }
                Ok(log_sweep(r.lo, r.hi, r.points))
            }
            _ => Err(Error::invalid("sweep needs exactly one of a non-empty `values` list or `log`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    #[serde(default)]
    pub noise_floor: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "yes")]
    pub ledger: bool,
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default)]
    pub fields: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { ledger: true, trajectory: true, fields: false }
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BecSolver {
    Bdg,
    Gpe,
}

/// `M1` built from beam `ζ` factors, plus an optional direct contribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSpec {
    pub m0: Mat3,
    #[serde(default)]
    pub m1: Option<Mat3>,
    #[serde(default)]
    pub beams: Vec<BeamZeta>,
    #[serde(default)]
    pub f1: [f64; 3],
    #[serde(default)]
    pub v1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngularSpec {
    pub r_max: f64,
    pub rings: usize,
    pub m_max: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BecSpec {
    pub grid: Grid,
    #[serde(default = "unit")]
    pub mass: f64,
    pub coupling: f64,
    pub atoms: f64,
    pub trap: TrapSpec,
    pub dt: f64,
    #[serde(default = "one")]
    pub stride: usize,
    #[serde(default)]
    pub ground_state: Option<GroundStateOptions>,
    /// Quadrupolar seed `ε (x² − y²) φ`; the run starts stationary without it.
    #[serde(default)]
    pub seed_epsilon: Option<f64>,
    #[serde(default)]
    pub angular: Option<AngularSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Backend {
    Barbell {
        config: BarbellConfig,
        dt: f64,
        #[serde(default = "one")]
        stride: usize,
    },
    Scissors {
        config: ScissorsConfig,
        dt: f64,
        #[serde(default = "one")]
        stride: usize,
    },
    EmMode {
        wavevector: [f64; 3],
        polarization: Axis,
        dt: f64,
        #[serde(default = "one")]
        stride: usize,
        /// Also track an arbitrary transverse polarization.
        #[serde(default)]
        general_polarization: Option<[f64; 3]>,
    },
    Bec {
        condensate: BecSpec,
        #[serde(default)]
        solver: Option<BecSolver>,
    },
    BecHydro {
        condensate: BecSpec,
        #[serde(default = "yes")]
        quantum_pressure: bool,
        #[serde(default)]
        mask_vacuum: bool,
        /// Also run the linear response and report the density mismatch.
        #[serde(default)]
        compare_bdg: bool,
    },
    Hydrogen {
        #[serde(default = "unit")]
        bohr_radius: f64,
        n_max: u32,
        /// `[bra, ket]` orbital names, e.g. `["2p_x", "2p_x"]`.
        #[serde(default)]
        elements: Vec<[String; 2]>,
        #[serde(default)]
        scan: bool,
    },
    Estimates {
        #[serde(default)]
        inputs: EstimateInputs,
    },
}

impl Backend {
    pub fn kind(&self) -> &'static str {
        match self {
            Backend::Barbell { .. } => "barbell",
            Backend::Scissors { .. } => "scissors",
            Backend::EmMode { .. } => "em_mode",
            Backend::Bec { .. } => "bec",
            Backend::BecHydro { .. } => "bec_hydro",
            Backend::Hydrogen { .. } => "hydrogen",
            Backend::Estimates { .. } => "estimates",
        }
    }

    fn uses_waveform(&self) -> bool {
        !matches!(self, Backend::Hydrogen { .. } | Backend::Estimates { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub waveform: Option<WaveformSpec>,
    pub backend: Backend,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub fit: Option<FitSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// Hex SHA-256 of the config with keys sorted and whitespace removed.
pub fn config_hash(raw: &str) -> Result<String> {
    let v: serde_json::Value = serde_json::from_str(raw).map_err(|e| Error::Schema(e.to_string()))?;
    let canonical = serde_json::to_string(&v)?;
    Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
}

impl Scenario {
    pub fn from_json(raw: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(raw).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    /// Waveform of one sweep point (or of the whole run without a sweep).
    pub fn waveform_at(&self, value: Option<f64>) -> Result<GwWaveform> {
        let spec = self.waveform.as_ref().ok_or_else(|| Error::invalid("this backend needs a waveform"))?;
        let mut spec = spec.clone();
        if let (Some(v), Some(sweep)) = (value, &self.sweep) {
            match sweep.parameter {
                SweepParameter::Amplitude => spec.amplitude = v,
                SweepParameter::Phase => spec.phase = v,
                SweepParameter::AngularFrequency => spec.angular_frequency = v,
            }
        }
        spec.build()
    }

    pub fn sweep_values(&self) -> Result<Vec<Option<f64>>> {
        match &self.sweep {
            None => Ok(vec![None]),
            Some(s) => Ok(s.values()?.into_iter().map(Some).collect()),
        }
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::invalid("name must be non-empty and use only [A-Za-z0-9_-]"));
        }
        if self.backend.uses_waveform() {
            for v in self.sweep_values()? {
                self.waveform_at(v)?;
            }
        } else if self.sweep.is_some() || self.fit.is_some() {
            return Err(Error::invalid(format!("the {} backend takes no sweep or fit", self.backend.kind())));
        }
        if let Some(f) = &self.fit {
            if !matches!(self.sweep.as_ref().map(|s| s.parameter), Some(SweepParameter::Amplitude)) {
                return Err(Error::invalid("a fit needs an amplitude sweep"));
            }
            if !(f.noise_floor >= 0.0 && f.noise_floor.is_finite()) {
                return Err(Error::invalid("noise floor must be >= 0"));
            }
        }
        run::validate_backend(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub value: Option<f64>,
    pub energy_change: Option<f64>,
    pub integrated_bound: Option<f64>,
    pub max_bound_ratio: Option<f64>,
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub backend: String,
    pub config_hash: String,
    pub points: Vec<PointResult>,
    pub fit: Option<ScalingVerdict>,
    pub summary: serde_json::Value,
}

pub const BUILTIN: &[(&str, &str)] = &[
    ("paper_barbell", include_str!("../../../../scenarios/paper_barbell.json")),
    ("paper_bec_bound", include_str!("../../../../scenarios/paper_bec_bound.json")),
    ("barbell_scaling", include_str!("../../../../scenarios/barbell_scaling.json")),
    ("bec_stationary_scaling", include_str!("../../../../scenarios/bec_stationary_scaling.json")),
    ("bec_seeded_scaling", include_str!("../../../../scenarios/bec_seeded_scaling.json")),
    ("em_mode", include_str!("../../../../scenarios/em_mode.json")),
    ("hydrogen_elements", include_str!("../../../../scenarios/hydrogen_elements.json")),
    ("estimates", include_str!("../../../../scenarios/estimates.json")),
];

pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
