//! Closed-form order-of-magnitude estimates, no integration.
//!
//! At resonance the energy exchanged over an interaction time `T` is of
//! order `h ω T` times the energy available to the coupling: the kinetic
//! energy for a rotor, `N E_R` for a condensate. The estimates take the
//! product `ωT` directly; [`omega_t_from_cycles`] converts a cycle count, and
//! the factor `2π` between "cycles" and "ωT" is the main ambiguity in these
//! numbers.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{HBAR, K_B};

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

pub fn omega_t_from_cycles(cycles: f64) -> f64 {
    TAU * cycles
}

/// `m ω² R²`: two masses `m` at radius `R`, each carrying `m ω² R² / 2`.
pub fn rotational_energy(mass: f64, radius: f64, omega_rot: f64) -> Result<f64> {
    positive("mass", mass)?;
    positive("radius", radius)?;
    non_negative("omega_rot", omega_rot)?;
    Ok(mass * omega_rot * omega_rot * radius * radius)
}

/// Kinetic energy needed for a shift of `quanta` quanta of `ħω` after an
/// exposure `ωT` at strain `h0`: `quanta ħω / (h0 ωT)`.
pub fn required_kinetic_energy(quanta: f64, omega: f64, h0: f64, omega_t: f64) -> Result<f64> {
    non_negative("quanta", quanta)?;
    positive("omega", omega)?;
    positive("h0", h0)?;
    positive("omega_t", omega_t)?;
    Ok(quanta * HBAR * omega / (h0 * omega_t))
}

/// Upper estimate `h0 ωT N E_R` for the energy shift of a condensate.
pub fn bec_energy_shift(atoms: f64, recoil_energy: f64, h0: f64, omega_t: f64) -> Result<f64> {
    non_negative("atoms", atoms)?;
    non_negative("recoil_energy", recoil_energy)?;
    non_negative("h0", h0)?;
    positive("omega_t", omega_t)?;
    Ok(h0 * omega_t * atoms * recoil_energy)
}

/// Potential strength `E_R` for which the condensate estimate reaches
/// `target_shift`.
pub fn required_potential_strength(target_shift: f64, atoms: f64, h0: f64, omega_t: f64) -> Result<f64> {
    non_negative("target_shift", target_shift)?;
    positive("atoms", atoms)?;
    positive("h0", h0)?;
    positive("omega_t", omega_t)?;
    Ok(target_shift / (h0 * omega_t * atoms))
}

pub fn joules_to_kelvin(e: f64) -> f64 {
    e / K_B
}

/// The headline numbers, with both readings of "ωT" where it matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub rotational_energy_j: f64,
    /// Required kinetic energy reading "kHz" as `ω = 1e3 rad/s`.
    pub required_kinetic_j: f64,
    /// Same with `ω = 2π · 1 kHz`.
    pub required_kinetic_2pi_j: f64,
    pub bec_shift_j: f64,
    pub bec_shift_kelvin: f64,
    /// `E_R` for a shift of one `ħ · 2π kHz` phonon.
    pub required_recoil_kelvin: f64,
    /// `E_R` for a shift of 10 nK.
    pub required_recoil_10nk_kelvin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateInputs {
    pub barbell_mass_kg: f64,
    pub barbell_radius_m: f64,
    pub rotation_rate: f64,
    pub quanta: f64,
    pub frequency_hz: f64,
    pub strain: f64,
    pub omega_t: f64,
    pub atoms: f64,
    pub recoil_kelvin: f64,
}

impl Default for EstimateInputs {
    fn default() -> Self {
        Self {
            barbell_mass_kg: 100.0,
            barbell_radius_m: 1.0,
            rotation_rate: 1e3,
            quanta: 1.0,
            frequency_hz: 1e3,
            strain: 1e-22,
            omega_t: 1e2,
            atoms: 1e9,
            recoil_kelvin: 1e-6,
        }
    }
}

pub fn report(inp: &EstimateInputs) -> Result<EstimateReport> {
    let omega = TAU * inp.frequency_hz;
    let bec = bec_energy_shift(inp.atoms, inp.recoil_kelvin * K_B, inp.strain, inp.omega_t)?;
    let phonon = HBAR * omega;
    Ok(EstimateReport {
        rotational_energy_j: rotational_energy(inp.barbell_mass_kg, inp.barbell_radius_m, inp.rotation_rate)?,
        required_kinetic_j: required_kinetic_energy(inp.quanta, inp.frequency_hz, inp.strain, inp.omega_t)?,
        required_kinetic_2pi_j: required_kinetic_energy(inp.quanta, omega, inp.strain, inp.omega_t)?,
        bec_shift_j: bec,
        bec_shift_kelvin: joules_to_kelvin(bec),
        required_recoil_kelvin: joules_to_kelvin(required_potential_strength(
            phonon,
            inp.atoms,
            inp.strain,
            inp.omega_t,
        )?),
        required_recoil_10nk_kelvin: joules_to_kelvin(required_potential_strength(
            1e-8 * K_B,
            inp.atoms,
            inp.strain,
            inp.omega_t,
        )?),
    })
}
