//! The strain `h(t)` of a single linearly polarized wave.
//!
//! The wavelength is taken much longer than the apparatus so `h(t - z)` is
//! replaced by `h(t)`. The wave is switched on at `t = 0` and off at
//! `t = duration`, either abruptly or through half-cosine ramps.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Rectangular,
    /// Half-cosine ramps of length `ramp_fraction * duration` at both ends.
    CosineRamp { ramp_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwWaveform {
    amplitude: f64,
    angular_frequency: f64,
    phase: f64,
    envelope: Envelope,
    duration: f64,
}

impl GwWaveform {
    pub fn new(
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
        envelope: Envelope,
        duration: f64,
    ) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::invalid(format!("strain amplitude must be >= 0, got {amplitude}")));
        }
        if !(angular_frequency.is_finite() && angular_frequency > 0.0) {
            return Err(Error::invalid(format!(
                "angular frequency must be positive, got {angular_frequency}"
            )));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::invalid(format!("duration must be positive, got {duration}")));
        }
        if !phase.is_finite() {
            return Err(Error::invalid("phase must be finite"));
        }
        if let Envelope::CosineRamp { ramp_fraction } = envelope {
            if !(0.0..=0.5).contains(&ramp_fraction) {
                return Err(Error::invalid(format!(
                    "ramp_fraction must lie in [0, 0.5], got {ramp_fraction}"
                )));
            }
        }
        Ok(Self { amplitude, angular_frequency, phase, envelope, duration })
    }

    /// Rectangular envelope, convenient in tests.
    pub fn rectangular(amplitude: f64, angular_frequency: f64, phase: f64, duration: f64) -> Result<Self> {
        Self::new(amplitude, angular_frequency, phase, Envelope::Rectangular, duration)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn angular_frequency(&self) -> f64 {
        self.angular_frequency
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Same wave with a different amplitude (used by strain sweeps).
    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.angular_frequency, self.phase, self.envelope, self.duration)
    }

    pub fn with_phase(&self, phase: f64) -> Result<Self> {
        Self::new(self.amplitude, self.angular_frequency, phase, self.envelope, self.duration)
    }

    fn ramp_time(&self) -> f64 {
        match self.envelope {
            Envelope::Rectangular => 0.0,
            Envelope::CosineRamp { ramp_fraction } => ramp_fraction * self.duration,
        }
    }

    /// Envelope value and its time derivative.
    fn envelope_at(&self, t: f64) -> (f64, f64) {
        if !(0.0..=self.duration).contains(&t) {
            return (0.0, 0.0);
        }
        let tau = self.ramp_time();
        if tau <= 0.0 {
            return (1.0, 0.0);
        }
        let k = PI / tau;
        if t < tau {
            (0.5 * (1.0 - (k * t).cos()), 0.5 * k * (k * t).sin())
        } else if t > self.duration - tau {
            let s = self.duration - t;
            (0.5 * (1.0 - (k * s).cos()), -0.5 * k * (k * s).sin())
        } else {
            (1.0, 0.0)
        }
    }

    pub fn strain(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let (env, _) = self.envelope_at(t);
        self.amplitude * env * (self.angular_frequency * t + self.phase).cos()
    }

    /// Analytic time derivative of [`strain`](Self::strain). The switching
    /// discontinuities of the rectangular envelope are not represented.
    pub fn strain_rate(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let (env, denv) = self.envelope_at(t);
        let arg = self.angular_frequency * t + self.phase;
        self.amplitude * (denv * arg.cos() - env * self.angular_frequency * arg.sin())
    }

    /// Upper bound on `|dh/dt|` over the whole wave:
    /// `h0 * (omega + max|env'|)`.
    pub fn max_strain_rate(&self) -> f64 {
        let tau = self.ramp_time();
        let env_rate = if tau > 0.0 { 0.5 * PI / tau } else { 0.0 };
        self.amplitude * (self.angular_frequency + env_rate)
    }

    /// Number of wave periods within the duration.
    pub fn cycles(&self) -> f64 {
        self.angular_frequency * self.duration / (2.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramped(h0: f64) -> GwWaveform {
        GwWaveform::new(h0, 2.0 * PI, 0.3, Envelope::CosineRamp { ramp_fraction: 0.1 }, 10.0).unwrap()
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let w = ramped(0.0);
        for t in [-1.0, 0.0, 0.5, 3.3, 10.0] {
            assert_eq!(w.strain(t), 0.0);
            assert_eq!(w.strain_rate(t), 0.0);
        }
    }

    #[test]
    fn rectangular_at_origin() {
        let w = GwWaveform::rectangular(1e-22, 2.0 * PI * 1e3, 0.0, 0.1).unwrap();
        assert_eq!(w.strain(0.0), 1e-22);
    }

    #[test]
    fn zero_outside_support() {
        let w = ramped(1e-6);
        assert_eq!(w.strain(-0.1), 0.0);
        assert_eq!(w.strain(10.1), 0.0);
        assert_eq!(w.strain(10.0), 0.0);
    }

    #[test]
    fn mid_ramp_value() {
        // T = 10, ramp_fraction 0.1 -> tau = 1; midpoint of the plateau is t = 5.
        // h(5) = 1e-6 * 1 * cos(2 pi * 5) = 1e-6
        let w = GwWaveform::new(1e-6, 2.0 * PI, 0.0, Envelope::CosineRamp { ramp_fraction: 0.1 }, 10.0)
            .unwrap();
        assert!((w.strain(5.0) - 1e-6).abs() < 1e-20);
        // inside the ramp: t = 0.25 -> env = (1 - cos(pi/4))/2 = 0.146446609406726...
        // cos(2 pi * 0.25) = 0, so probe t = 0.5 instead: env = 0.5, cos(pi) = -1.
        assert!((w.strain(0.5) + 0.5e-6).abs() < 1e-20);
        // t = 0.125: env = (1 - cos(pi/8))/2 = 0.038060233744356624, cos(pi/4)
        let expected = 1e-6 * 0.038_060_233_744_356_624 * (PI / 4.0).cos();
        assert!((w.strain(0.125) - expected).abs() < 1e-21);
    }

    #[test]
    fn rectangular_rate_is_elementary() {
        let w = GwWaveform::rectangular(2e-3, 3.0, 0.7, 5.0).unwrap();
        let t: f64 = 1.7;
        let expected = -2e-3 * 3.0 * (3.0 * t + 0.7).sin();
        assert!((w.strain_rate(t) - expected).abs() < 1e-18);
    }

    #[test]
    fn rate_matches_finite_difference_in_ramp() {
        let w = ramped(1e-6);
        for t in [0.13, 0.41, 0.77, 9.2, 9.63] {
            let d = 1e-4;
            let fd = (8.0 * (w.strain(t + d) - w.strain(t - d)) - (w.strain(t + 2.0 * d) - w.strain(t - 2.0 * d)))
                / (12.0 * d);
            let an = w.strain_rate(t);
            assert!((fd - an).abs() <= 1e-8 * an.abs().max(1e-12), "t={t}: {fd} vs {an}");
        }
    }

    #[test]
    fn rate_integrates_to_zero_for_ramp() {
        let w = ramped(1e-6);
        // composite Simpson, 20000 panels
        let n = 20_000;
        let dt = w.duration() / n as f64;
        let mut s = w.strain_rate(0.0) + w.strain_rate(w.duration());
        for i in 1..n {
            let f = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += f * w.strain_rate(i as f64 * dt);
        }
        let integral = s * dt / 3.0;
        assert!(integral.abs() < 1e-10 * 1e-6, "{integral}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GwWaveform::rectangular(-1.0, 1.0, 0.0, 1.0).is_err());
        assert!(GwWaveform::rectangular(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(GwWaveform::rectangular(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(GwWaveform::new(1.0, 1.0, 0.0, Envelope::CosineRamp { ramp_fraction: 0.6 }, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn strain_bounded_and_rate_bounded(t in -1.0f64..11.0, phase in 0.0f64..6.3, f in 0.0f64..0.5) {
            let w = GwWaveform::new(1e-3, 5.0, phase, Envelope::CosineRamp { ramp_fraction: f }, 10.0).unwrap();
            prop_assert!(w.strain(t).abs() <= 1e-3);
            prop_assert!(w.strain_rate(t).abs() <= w.max_strain_rate() * (1.0 + 1e-12));
            prop_assert_eq!(w.strain(t).to_bits(), w.strain(t).to_bits());
        }
    }
}
