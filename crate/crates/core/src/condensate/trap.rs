//! Strain-dependent change of an optical trap.
//!
//! To first order in `h` the trap is `V = r·M0·r + h (r·M1·r + F1·r + V1)`.
//! The curvature change along each beam axis is `ζ` times the unperturbed
//! curvature there, with `ζ` summed over the mechanisms declared for that
//! beam (see [`crate::em_parametric::trap_zeta_factors`]).

use serde::{Deserialize, Serialize};

use crate::em_parametric::{Axis, ZetaFactor};
use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

fn quad(m: &Mat3, r: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += r[i] * m[i][j] * r[j];
        }
    }
    s
}

fn is_symmetric(m: &Mat3) -> bool {
    (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= 1e-12 * (m[i][j].abs() + m[j][i].abs() + 1e-300)))
}

/// Positive definiteness on the first `dims` axes (leading minors).
fn is_positive_definite(m: &Mat3, dims: usize) -> bool {
    let m1 = m[0][0];
    let m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let m3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    match dims {
        1 => m1 > 0.0,
        2 => m1 > 0.0 && m2 > 0.0,
        _ => m1 > 0.0 && m2 > 0.0 && m3 > 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapModification {
    pub m0: Mat3,
    pub m1: Mat3,
    #[serde(default)]
    pub f1: [f64; 3],
    #[serde(default)]
    pub v1: f64,
}

impl TrapModification {
    /// Checks symmetry of both matrices and positive definiteness of `M0`
    /// on the active axes.
    pub fn new(m0: Mat3, m1: Mat3, f1: [f64; 3], v1: f64, dims: usize) -> Result<Self> {
        let t = Self { m0, m1, f1, v1 };
        t.validate(dims)?;
        Ok(t)
    }

    pub fn validate(&self, dims: usize) -> Result<()> {
        if !is_symmetric(&self.m0) || !is_symmetric(&self.m1) {
            return Err(Error::invalid("trap matrices must be symmetric"));
        }
        if !is_positive_definite(&self.m0, dims) {
            return Err(Error::invalid("base trap curvature M0 must be positive definite"));
        }
        let finite = self.m0.iter().chain(&self.m1).flatten().chain(&self.f1).all(|v| v.is_finite());
        if !finite || !self.v1.is_finite() {
            return Err(Error::invalid("trap coefficients must be finite"));
        }
        Ok(())
    }

    /// Isotropic harmonic trap `½ m ω² r²` with no strain dependence.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        let c = 0.5 * mass * omega * omega;
        Self { m0: [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]], m1: [[0.0; 3]; 3], f1: [0.0; 3], v1: 0.0 }
    }

    pub fn base(&self, r: &[f64; 3]) -> f64 {
        quad(&self.m0, r)
    }

    pub fn dv_dh(&self, r: &[f64; 3]) -> f64 {
        quad(&self.m1, r) + self.f1.iter().zip(r).map(|(a, b)| a * b).sum::<f64>() + self.v1
    }

    /// Oscillator length `sqrt(ħ / m ω)` along one axis, with `ħ = 1`.
    pub fn oscillator_length(&self, axis: usize, mass: f64) -> f64 {
        let omega = (2.0 * self.m0[axis][axis] / mass).sqrt();
        (1.0 / (mass * omega)).sqrt()
    }

    /// Size ratios of the strain terms against `E_R / λ²`, `E_R / λ` and
    /// `E_R`; entries well above one mean the declared coefficients are not
    /// the small optical response they are meant to be.
    pub fn magnitude_ratios(&self, recoil_energy: f64, wavelength: f64) -> Result<[f64; 3]> {
        if !(recoil_energy > 0.0 && wavelength > 0.0) {
            return Err(Error::invalid("recoil energy and wavelength must be positive"));
        }
        let m1 = self.m1.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let f1 = self.f1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok([
            m1 * wavelength * wavelength / recoil_energy,
            f1 * wavelength / recoil_energy,
            self.v1.abs() / recoil_energy,
        ])
    }
}

/// `ζ` factors declared for one beam and the axes its curvature acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamZeta {
    pub axes: Vec<Axis>,
    pub factors: Vec<ZetaFactor>,
}

impl BeamZeta {
    pub fn total(&self) -> f64 {
        self.factors.iter().map(|f| f.zeta).sum()
    }
}

/// `M1_aa = Σ_beams ζ_beam M0_aa` on the beam's axes, plus user-declared
/// asymmetries `F1` and offset `V1`.
pub fn build_trap_modification(
    m0: Mat3,
    beams: &[BeamZeta],
    f1: [f64; 3],
    v1: f64,
    dims: usize,
) -> Result<TrapModification> {
    let mut m1 = [[0.0; 3]; 3];
    for beam in beams {
        let zeta = beam.total();
        for axis in &beam.axes {
            let a = axis.index();
            m1[a][a] += zeta * m0[a][a];
        }
    }
    TrapModification::new(m0, m1, f1, v1, dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em_parametric::ZetaSource;

    #[test]
    fn rejects_indefinite_base() {
        let m0 = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(TrapModification::new(m0, [[0.0; 3]; 3], [0.0; 3], 0.0, 2).is_err());
        // only the first axis matters in 1-D
        assert!(TrapModification::new(m0, [[0.0; 3]; 3], [0.0; 3], 0.0, 1).is_ok());
    }

    #[test]
    fn builds_quadrupole_from_two_beams() {
        let m0 = TrapModification::harmonic(1.0, 1.0).m0;
        let beams = [
            BeamZeta { axes: vec![Axis::X], factors: vec![ZetaFactor::new(0.5, ZetaSource::FrequencyShift)] },
            BeamZeta { axes: vec![Axis::Y], factors: vec![ZetaFactor::new(-0.5, ZetaSource::FrequencyShift)] },
        ];
        let t = build_trap_modification(m0, &beams, [0.0; 3], 0.0, 2).unwrap();
        assert!((t.dv_dh(&[1.0, 0.0, 0.0]) - 0.25).abs() < 1e-15);
        assert!((t.dv_dh(&[0.0, 1.0, 0.0]) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn oscillator_length_of_unit_trap() {
        let t = TrapModification::harmonic(1.0, 1.0);
        assert!((t.oscillator_length(0, 1.0) - 1.0).abs() < 1e-15);
    }
}
