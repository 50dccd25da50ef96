//! Unit conventions and SI <-> internal conversion.
//!
//! Internal units are fixed by three base scales (length, time, mass). The
//! condensate backend runs with `hbar = m = 1`, the barbell backend in SI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Elementary charge, C (exact). Also J per eV.
pub const EV: f64 = 1.602_176_634e-19;
/// One Hartree in eV (CODATA 2018).
pub const HARTREE_EV: f64 = 27.211_386_245_988;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Length,
    Time,
    Mass,
    Energy,
    Frequency,
    Action,
}

impl Dimension {
    /// Exponents of (length, time, mass).
    fn exponents(self) -> (i32, i32, i32) {
        match self {
            Dimension::Length => (1, 0, 0),
            Dimension::Time => (0, 1, 0),
            Dimension::Mass => (0, 0, 1),
            Dimension::Energy => (2, -2, 1),
            Dimension::Frequency => (0, -1, 0),
            Dimension::Action => (2, -1, 1),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "length" => Dimension::Length,
            "time" => Dimension::Time,
            "mass" => Dimension::Mass,
            "energy" => Dimension::Energy,
            "frequency" => Dimension::Frequency,
            "action" => Dimension::Action,
            other => return Err(Error::UnknownDimension(other.to_string())),
        })
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Mass => "mass",
            Dimension::Energy => "energy",
            Dimension::Frequency => "frequency",
            Dimension::Action => "action",
        };
        f.write_str(s)
    }
}

/// A value tagged with its physical dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub dimension: Dimension,
}

impl Quantity {
    pub fn new(value: f64, dimension: Dimension) -> Self {
        Self { value, dimension }
    }

    /// Parses a dimension tag from a string; unknown tags are rejected.
    pub fn tagged(value: f64, tag: &str) -> Result<Self> {
        Ok(Self::new(value, tag.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToInternal,
    ToSi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub length_scale: f64,
    pub time_scale: f64,
    pub mass_scale: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::si()
    }
}

impl UnitSystem {
    pub fn new(length_scale: f64, time_scale: f64, mass_scale: f64) -> Result<Self> {
        for (name, v) in [
            ("length_scale", length_scale),
            ("time_scale", time_scale),
            ("mass_scale", mass_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { length_scale, time_scale, mass_scale })
    }

    pub fn si() -> Self {
        Self { length_scale: 1.0, time_scale: 1.0, mass_scale: 1.0 }
    }

    /// Oscillator units of a trap with angular frequency `omega` (rad/s) for
    /// particles of mass `mass` (kg): hbar = m = omega = 1.
    pub fn oscillator(mass: f64, omega: f64) -> Result<Self> {
        let length = (HBAR / (mass * omega)).sqrt();
        Self::new(length, 1.0 / omega, mass)
    }

    pub fn energy_scale(&self) -> f64 {
        self.mass_scale * self.length_scale.powi(2) / self.time_scale.powi(2)
    }

    pub fn hbar_in_internal(&self) -> f64 {
        HBAR / (self.energy_scale() * self.time_scale)
    }

    fn scale_of(&self, d: Dimension) -> f64 {
        let (l, t, m) = d.exponents();
        self.length_scale.powi(l) * self.time_scale.powi(t) * self.mass_scale.powi(m)
    }

    pub fn convert(&self, q: Quantity, direction: Direction) -> Quantity {
        let s = self.scale_of(q.dimension);
        let value = match direction {
            Direction::ToInternal => q.value / s,
            Direction::ToSi => q.value * s,
        };
        Quantity { value, dimension: q.dimension }
    }

    pub fn to_internal(&self, value: f64, d: Dimension) -> f64 {
        self.convert(Quantity::new(value, d), Direction::ToInternal).value
    }

    pub fn to_si(&self, value: f64, d: Dimension) -> f64 {
        self.convert(Quantity::new(value, d), Direction::ToSi).value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn identity_scaling() {
        let u = UnitSystem::si();
        assert_eq!(u.to_internal(1.0, Dimension::Length), 1.0);
    }

    #[test]
    fn hbar_omega_one_khz() {
        // hbar * 2 pi * 1e3 with CODATA hbar
        let e = HBAR * 2.0 * PI * 1e3;
        assert!((e - 6.626_070_15e-31).abs() / 6.626_070_15e-31 < 1e-9);
    }

    #[test]
    fn energy_round_trip() {
        let u = UnitSystem::oscillator(1.443e-25, 2.0 * PI * 100.0).unwrap();
        let q = Quantity::new(1e8, Dimension::Energy);
        let back = u.convert(u.convert(q, Direction::ToInternal), Direction::ToSi);
        assert!((back.value - 1e8).abs() / 1e8 < 1e-14);
        assert_eq!(back.dimension, Dimension::Energy);
    }

    #[test]
    fn energy_scale_is_derived() {
        let u = UnitSystem::new(2.0, 3.0, 5.0).unwrap();
        assert!((u.energy_scale() - 5.0 * 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn oscillator_units_have_unit_hbar() {
        let u = UnitSystem::oscillator(1.443e-25, 2.0 * PI * 50.0).unwrap();
        assert!((u.hbar_in_internal() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_tag_and_bad_scale() {
        assert!(matches!(Quantity::tagged(1.0, "charge"), Err(Error::UnknownDimension(_))));
        assert!(UnitSystem::new(0.0, 1.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0, 1.0).is_err());
    }
}
