//! Power delivered by the wave and the bounds on it.
//!
//! To first order the wave enters the Hamiltonian as `h * dH/dh`, so the
//! power is `dE/dt = hdot * G` with
//!
//! ```text
//! G = ∫ dV/dh |ψ|² + (|∂yψ|² − |∂xψ|²) / 2m  =  <dV/dh> + E_kin,y − E_kin,x.
//! ```
//!
//! Backends reduce their state to a [`MatterSnapshot`] holding these
//! integrals; everything here works on snapshots only.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::{fit_scaling, ScalingVerdict};
use crate::waveform::GwWaveform;

/// Relative slack allowed on bound comparisons, for rounding only.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatterSnapshot {
    pub time: f64,
    pub particle_number: f64,
    /// Coordinate kinetic energy in the x direction, `∫|∂xψ|²/2m`.
    pub kinetic_x: f64,
    pub kinetic_y: f64,
    pub kinetic_total: f64,
    /// `∫ dV/dh |ψ|²`.
    pub dv_dh_weighted: f64,
    /// `max |dV/dh|` over the occupied region.
    pub dv_dh_max: f64,
    /// A-priori ceiling on the kinetic energy (e.g. trap depth), if known.
    pub kinetic_cap: Option<f64>,
}

impl MatterSnapshot {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.time,
            self.particle_number,
            self.kinetic_x,
            self.kinetic_y,
            self.kinetic_total,
            self.dv_dh_weighted,
            self.dv_dh_max,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite snapshot at t = {}", self.time)));
        }
        if self.particle_number < 0.0 || self.kinetic_x < 0.0 || self.kinetic_y < 0.0 {
            return Err(Error::Invariant(format!("negative snapshot integral at t = {}", self.time)));
        }
        if self.kinetic_x + self.kinetic_y > self.kinetic_total * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Invariant(format!(
                "directional kinetic energies exceed the total at t = {}",
                self.time
            )));
        }
        Ok(())
    }

    /// `G = dH/dh`, the coefficient of `hdot` in the power.
    pub fn coupling(&self) -> f64 {
        self.dv_dh_weighted + self.kinetic_y - self.kinetic_x
    }
}

pub fn instantaneous_power(snap: &MatterSnapshot, hdot: f64) -> f64 {
    hdot * snap.coupling()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSeries {
    /// Right-hand side per snapshot, with the kinetic term taken as the
    /// running maximum over snapshots delivered so far.
    pub rhs: Vec<f64>,
    /// Same, with the kinetic term replaced by the backend's a-priori cap
    /// where one was supplied.
    pub capped_rhs: Option<Vec<f64>>,
    pub max_strain_rate: f64,
    /// `max(rhs) * T`, a bound on the total energy transferred.
    pub integrated: f64,
}

/// `|dE/dt| <= |hdot|_max (|dV/dh|_max N + E_kin,max)` per snapshot.
pub fn rigorous_bound(snaps: &[MatterSnapshot], w: &GwWaveform) -> Result<BoundSeries> {
    if snaps.is_empty() {
        return Err(Error::invalid("bound needs at least one snapshot"));
    }
    let hdot_max = w.max_strain_rate();
    let mut running = 0.0f64;
    let mut rhs = Vec::with_capacity(snaps.len());
    for s in snaps {
        s.validate()?;
        running = running.max(s.kinetic_total);
        rhs.push(hdot_max * (s.dv_dh_max.abs() * s.particle_number + running));
    }
    let capped_rhs = if snaps.iter().all(|s| s.kinetic_cap.is_some()) {
        Some(
            snaps
                .iter()
                .map(|s| hdot_max * (s.dv_dh_max.abs() * s.particle_number + s.kinetic_cap.unwrap()))
                .collect(),
        )
    } else {
        None
    };
    let peak = rhs.iter().copied().fold(0.0, f64::max);
    Ok(BoundSeries { rhs, capped_rhs, max_strain_rate: hdot_max, integrated: peak * w.duration() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub time: f64,
    pub power: f64,
    pub cumulative: f64,
    pub bound: f64,
    pub bound_rot: Option<f64>,
}

/// Time series of the power, accumulated energy and bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    entries: Vec<LedgerEntry>,
    integrated_bound: f64,
}

fn check_bound(time: f64, power: f64, bound: f64) -> Result<()> {
    if power.abs() > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::BoundViolation { time, power: power.abs(), bound });
    }
    Ok(())
}

impl EnergyLedger {
    /// Builds the ledger and asserts `|dE/dt| <= rhs` at every entry.
    ///
    /// The accumulated energy is `∫ G dh` by the trapezoid rule in `h`, so a
    /// constant coupling contributes exactly `G (h(t) − h(0))`.
    pub fn from_snapshots(snaps: &[MatterSnapshot], w: &GwWaveform) -> Result<Self> {
        let bounds = rigorous_bound(snaps, w)?;
        let mut entries = Vec::with_capacity(snaps.len());
        let mut cumulative = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for (s, &bound) in snaps.iter().zip(&bounds.rhs) {
            let g = s.coupling();
            let h = w.strain(s.time);
            if let Some((g0, h0)) = prev {
                cumulative += 0.5 * (g0 + g) * (h - h0);
            }
            prev = Some((g, h));
            let power = instantaneous_power(s, w.strain_rate(s.time));
            check_bound(s.time, power, bound)?;
            entries.push(LedgerEntry { time: s.time, power, cumulative, bound, bound_rot: None });
        }
        Ok(Self { entries, integrated_bound: bounds.integrated })
    }

    /// Adds the rotating-frame bound column, asserting dominance as well.
    pub fn attach_rotating_bound(&mut self, bound_rot: &[f64]) -> Result<()> {
        if bound_rot.len() != self.entries.len() {
            return Err(Error::invalid("rotating bound length does not match the ledger"));
        }
        for (e, &b) in self.entries.iter_mut().zip(bound_rot) {
            check_bound(e.time, e.power, b)?;
            e.bound_rot = Some(b);
        }
        Ok(())
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total_transfer(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cumulative)
    }

    pub fn integrated_bound(&self) -> f64 {
        self.integrated_bound
    }

    /// Largest `|dE/dt| / rhs` seen; 0 when the bound is identically 0.
    pub fn max_bound_ratio(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.bound > 0.0)
            .map(|e| e.power.abs() / e.bound)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let rot = self.entries.first().is_some_and(|e| e.bound_rot.is_some());
        if rot {
            writeln!(out, "t,dE_dt,E_cum,bound_rhs,bound_rot")?;
        } else {
            writeln!(out, "t,dE_dt,E_cum,bound_rhs")?;
        }
        for e in &self.entries {
            write!(out, "{:e},{:e},{:e},{:e}", e.time, e.power, e.cumulative, e.bound)?;
            match e.bound_rot {
                Some(b) if rot => writeln!(out, ",{b:e}")?,
                _ => writeln!(out)?,
            }
        }
        Ok(())
    }
}

/// Bound on the power delivered to charges by a field: `|Ȧ|_max |j|_max V`.
pub fn em_analogy_bound(current_max: f64, adot_max: f64, volume: f64) -> Result<f64> {
    for (name, v) in [("current_max", current_max), ("adot_max", adot_max), ("volume", volume)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
        }
    }
    Ok(current_max * adot_max * volume)
}

/// Runs `energy_shift(h0)` over the given amplitudes and fits the exponent of
/// `|ΔE|` against `h0`. A stationary initial state should give 2.
pub fn stationary_state_null_check<F>(
    amplitudes: &[f64],
    noise_floor: f64,
    energy_shift: F,
) -> Result<ScalingVerdict>
where
    F: Fn(f64) -> Result<f64>,
{
    let points = amplitudes
        .iter()
        .map(|&h0| Ok((h0, energy_shift(h0)?)))
        .collect::<Result<Vec<_>>>()?;
    fit_scaling(&points, noise_floor)
}
