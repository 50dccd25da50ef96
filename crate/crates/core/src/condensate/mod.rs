//! Bose–Einstein condensate in a strained optical trap.
//!
//! Units `ħ = 1`; lengths, times and energies are otherwise whatever the
//! caller picks (typically trap units `m = ω = 1`).

pub mod angular;
pub mod bdg;
pub mod gpe;
pub mod grid;
pub mod ground_state;
pub mod hydro;
pub mod io;
pub mod trap;

pub use angular::{angular_power, AngularSpectrum};
pub use bdg::{evolve_bdg, quadrupole_seed, BdgOptions};
pub use gpe::{evolve_gpe, GpeOptions};
pub use grid::{Boundary, Grid, Spectral};
pub use ground_state::{ground_state, homogeneous, CondensateField, GroundStateOptions};
pub use hydro::{evolve_hydrodynamic, perturbation_to_hydro, single_mode_phase, HydroOptions, MadelungField};
pub use trap::{build_trap_modification, BeamZeta, TrapModification};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::energy_transfer::{EnergyLedger, MatterSnapshot};
use crate::error::{Error, Result};
use crate::waveform::GwWaveform;

/// Relative density below which a point counts as unoccupied.
pub const OCCUPIED_FRACTION: f64 = 1e-10;

/// `dV/dh` sampled on the grid.
pub fn sample_dv_dh(grid: &Grid, trap: &TrapModification) -> Vec<f64> {
    grid.positions().iter().map(|r| trap.dv_dh(r)).collect()
}

/// `V0` sampled on the grid.
pub fn sample_base(grid: &Grid, trap: &TrapModification) -> Vec<f64> {
    grid.positions().iter().map(|r| trap.base(r)).collect()
}

/// Reduces a wavefunction to the integrals the energy ledger needs.
pub fn field_snapshot(sp: &Spectral, psi: &[Complex64], mass: f64, dv_dh: &[f64], time: f64) -> MatterSnapshot {
    let grid = sp.grid();
    let parts = sp.kinetic_parts(psi, mass);
    let peak = psi.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let dv_dh_max = psi
        .iter()
        .zip(dv_dh)
        .filter(|(c, _)| c.norm_sqr() > OCCUPIED_FRACTION * peak)
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max);
    MatterSnapshot {
        time,
        particle_number: grid.norm(psi),
        kinetic_x: parts[0],
        kinetic_y: parts[1],
        kinetic_total: parts.iter().sum(),
        dv_dh_weighted: grid.integrate(psi.iter().zip(dv_dh).map(|(c, v)| v * c.norm_sqr())),
        dv_dh_max,
        kinetic_cap: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensateSample {
    pub time: f64,
    pub strain: f64,
    pub snapshot: MatterSnapshot,
}

/// Output of the time-dependent condensate solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensateRun {
    pub samples: Vec<CondensateSample>,
    /// Stored fields `(t, field)`: the perturbation for the linear solvers,
    /// the full wavefunction for the nonlinear one.
    pub fields: Vec<(f64, Vec<Complex64>)>,
    pub final_field: Vec<Complex64>,
}

impl CondensateRun {
    pub fn snapshots(&self) -> Vec<MatterSnapshot> {
        self.samples.iter().map(|s| s.snapshot).collect()
    }

    pub fn ledger(&self, w: &GwWaveform) -> Result<EnergyLedger> {
        EnergyLedger::from_snapshots(&self.snapshots(), w)
    }

    /// Largest relative change of the particle number across samples.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = match self.samples.first() {
            Some(s) => s.snapshot.particle_number,
            None => return 0.0,
        };
        self.samples.iter().map(|s| (s.snapshot.particle_number - n0).abs() / n0).fold(0.0, f64::max)
    }
}

/// Common time-step checks and sample bookkeeping.
pub(crate) fn time_grid(dt: f64, t_end: f64, stride: usize, limit: f64, reason: &'static str) -> Result<usize> {
    if !(dt > 0.0 && t_end > 0.0) || stride == 0 {
        return Err(Error::invalid("dt, t_end and stride must be positive"));
    }
    if dt > limit {
        return Err(Error::StepSize { dt, limit, reason });
    }
    crate::integrate::step_count(t_end, dt)
}

/// Largest step for which the kinetic phase `E_kin,max dt` stays below `π`;
/// beyond it the split-step maps go unstable at the grid cutoff.
pub fn kinetic_step_limit(grid: &Grid, mass: f64) -> f64 {
    let kmax = std::f64::consts::PI / grid.spacing();
    let emax = grid.dimensions as f64 * kmax * kmax / (2.0 * mass);
    std::f64::consts::PI / emax
}

/// Box-size requirements for a trapped condensate.
pub fn check_trapped_geometry(field: &CondensateField, trap: &TrapModification) -> Result<()> {
    let g = &field.grid;
    let xi = field.healing_length();
    if g.extent < 8.0 * xi {
        return Err(Error::invalid(format!("box {} is shorter than 8 healing lengths ({xi})", g.extent)));
    }
    for a in 0..g.dimensions {
        let l = trap.oscillator_length(a, field.mass);
        if g.extent < 6.0 * l {
            return Err(Error::invalid(format!("box {} is shorter than 6 trap widths ({l}) on axis {a}", g.extent)));
        }
    }
    let edge = field.boundary_density_ratio();
    if g.boundary == Boundary::Periodic && edge >= 1e-12 {
        return Err(Error::invalid(format!("density at the box edge is {edge:e} of the peak (needs < 1e-12)")));
    }
    Ok(())
}
