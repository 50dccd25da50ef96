//! Energy accounting in a frame co-rotating about `z` at `omega_rot`.
//!
//! In that frame the unperturbed Hamiltonian is time independent, the trap
//! picks up the centrifugal term `−m (ω×r)²/2`, and the wave's drive appears
//! at `ω ± 2ω_rot`. For states static in the rotating frame the power obeys
//! `|dE/dt| <= |hdot|_max (2 E_kin,rot + m ∫ (ω×r)² ρ)`.
//!
//! Rotation is counter-clockwise: co-rotating coordinates are
//! `x' = x cos θ + y sin θ`, `y' = −x sin θ + y cos θ` with `θ = ω_rot t`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::GwWaveform;

/// Threshold on `current_norm / natural_scale` for a static state.
pub const STATIC_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotatingFrameState {
    pub rotation_rate: f64,
    /// Kinetic energy of the motion relative to the rotating frame.
    pub kinetic_rotating: f64,
    /// `m ∫ (ω×r)² ρ`.
    pub moment_integral: f64,
    /// Magnitude of the rotating-frame current (mass-weighted speed).
    pub current_norm: f64,
    /// Reference value `current_norm` is compared against.
    pub natural_scale: f64,
}

impl RotatingFrameState {
    pub fn new(
        rotation_rate: f64,
        kinetic_rotating: f64,
        moment_integral: f64,
        current_norm: f64,
        natural_scale: f64,
    ) -> Result<Self> {
        if !(kinetic_rotating >= 0.0 && moment_integral >= 0.0 && current_norm >= 0.0) {
            return Err(Error::invalid("rotating-frame integrals must be non-negative"));
        }
        if !(natural_scale > 0.0 && rotation_rate.is_finite()) {
            return Err(Error::invalid("rotating-frame natural scale must be positive"));
        }
        Ok(Self { rotation_rate, kinetic_rotating, moment_integral, current_norm, natural_scale })
    }

    /// Point masses at `positions` moving with lab velocities `velocities`.
    pub fn from_point_masses(
        rotation_rate: f64,
        masses: &[f64],
        positions: &[[f64; 3]],
        velocities: &[[f64; 3]],
    ) -> Result<Self> {
        if masses.len() != positions.len() || masses.len() != velocities.len() || masses.is_empty() {
            return Err(Error::invalid("mismatched point-mass arrays"));
        }
        let (mut kin, mut moment, mut current, mut scale) = (0.0, 0.0, 0.0, 0.0);
        for ((&m, r), v) in masses.iter().zip(positions).zip(velocities) {
            let frame = [-rotation_rate * r[1], rotation_rate * r[0], 0.0];
            let rel = [v[0] - frame[0], v[1] - frame[1], v[2]];
            let rel2 = rel.iter().map(|c| c * c).sum::<f64>();
            let frame2 = frame[0] * frame[0] + frame[1] * frame[1];
            kin += 0.5 * m * rel2;
            moment += m * frame2;
            current += m * rel2.sqrt();
            scale += m * (frame2.sqrt() + v.iter().map(|c| c * c).sum::<f64>().sqrt());
        }
        if scale == 0.0 {
            scale = masses.iter().sum();
        }
        Self::new(rotation_rate, kin, moment, current, scale)
    }

    pub fn is_static(&self) -> bool {
        self.current_norm <= STATIC_TOLERANCE * self.natural_scale
    }
}

/// The bound's right-hand side, evaluated without checking that the state is
/// static.
pub fn rotating_bound_rhs(state: &RotatingFrameState, w: &GwWaveform) -> f64 {
    w.max_strain_rate() * (2.0 * state.kinetic_rotating + state.moment_integral)
}

/// Rotating-frame bound; refuses states that are not static in the frame,
/// for which it was not derived.
pub fn rotating_bound(state: &RotatingFrameState, w: &GwWaveform) -> Result<f64> {
    if !state.is_static() {
        return Err(Error::invalid(format!(
            "state is not static in the rotating frame (current {:e} vs scale {:e})",
            state.current_norm, state.natural_scale
        )));
    }
    Ok(rotating_bound_rhs(state, w))
}

/// `V0(r) − m ω² (x² + y²) / 2`.
pub fn effective_potential<F: Fn([f64; 3]) -> f64>(v0: &F, omega_rot: f64, mass: f64, r: [f64; 3]) -> f64 {
    v0(r) - 0.5 * mass * omega_rot * omega_rot * (r[0] * r[0] + r[1] * r[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub stable: bool,
    pub minimum: f64,
    pub minimum_at: [f64; 3],
    pub boundary_minimum: f64,
}

/// Checks that `V_eff` confines on the cube `[-half_width, half_width]³`
/// sampled with `2n+1` points per axis: the minimum must be interior and
/// every boundary value must lie above it.
pub fn confinement_check<F: Fn([f64; 3]) -> f64>(
    v0: &F,
    omega_rot: f64,
    mass: f64,
    half_width: f64,
    n: usize,
) -> Result<ConfinementReport> {
    if !(half_width > 0.0) || n == 0 {
        return Err(Error::invalid("confinement region must be non-empty"));
    }
    let side = 2 * n + 1;
    let coord = |i: usize| half_width * (i as f64 - n as f64) / n as f64;
    let mut minimum = f64::INFINITY;
    let mut minimum_at = [0.0; 3];
    let mut min_on_boundary = false;
    let mut boundary_minimum = f64::INFINITY;
    for i in 0..side {
        for j in 0..side {
            for k in 0..side {
                let r = [coord(i), coord(j), coord(k)];
                let v = effective_potential(v0, omega_rot, mass, r);
                let on_boundary = [i, j, k].iter().any(|&q| q == 0 || q == side - 1);
                if on_boundary {
                    boundary_minimum = boundary_minimum.min(v);
                }
                if v < minimum {
                    minimum = v;
                    minimum_at = r;
                    min_on_boundary = on_boundary;
                }
            }
        }
    }
    let stable = !min_on_boundary && boundary_minimum > minimum;
    Ok(ConfinementReport { stable, minimum, minimum_at, boundary_minimum })
}

/// Interaction-energy density of the wave in co-rotating coordinates,
/// given the field gradients along `x'` and `y'`:
///
/// ```text
/// h [cos 2θ (|∂y'ψ|² − |∂x'ψ|²) + sin 2θ (∂x'ψ* ∂y'ψ + c.c.)] / 2m
/// ```
pub fn interaction_density(
    grad_x: &[Complex64],
    grad_y: &[Complex64],
    t: f64,
    omega_rot: f64,
    h: f64,
    mass: f64,
) -> Result<Vec<f64>> {
    if grad_x.len() != grad_y.len() {
        return Err(Error::invalid("gradient arrays differ in length"));
    }
    let (s, c) = (2.0 * omega_rot * t).sin_cos();
    Ok(grad_x
        .iter()
        .zip(grad_y)
        .map(|(gx, gy)| {
            let diag = gy.norm_sqr() - gx.norm_sqr();
            let cross = 2.0 * (gx.conj() * gy).re;
            h * (c * diag + s * cross) / (2.0 * mass)
        })
        .collect())
}

/// `∂H_int/∂h` for classical point masses with lab momenta `momenta`,
/// expressed through their co-rotating components.
pub fn point_mass_coupling(masses: &[f64], momenta: &[[f64; 3]], t: f64, omega_rot: f64) -> f64 {
    let theta = omega_rot * t;
    let (sn, cs) = theta.sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    masses
        .iter()
        .zip(momenta)
        .map(|(&m, p)| {
            let px = cs * p[0] + sn * p[1];
            let py = -sn * p[0] + cs * p[1];
            (c2 * (py * py - px * px) + s2 * 2.0 * px * py) / (2.0 * m)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn harmonic(m: f64, w: f64) -> impl Fn([f64; 3]) -> f64 {
        move |r: [f64; 3]| 0.5 * m * w * w * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    }

    #[test]
    fn no_rotation_leaves_potential() {
        let v = harmonic(1.0, 2.0);
        let r = [0.3, -0.2, 0.7];
        assert_eq!(effective_potential(&v, 0.0, 1.0, r), v(r));
        assert!(confinement_check(&v, 0.0, 1.0, 1.0, 6).unwrap().stable);
        let flat = |_r: [f64; 3]| 0.0;
        assert!(!confinement_check(&flat, 0.0, 1.0, 1.0, 6).unwrap().stable);
    }

    #[test]
    fn stability_follows_effective_curvature() {
        let v = harmonic(2.0, 3.0);
        assert!(confinement_check(&v, 2.9, 2.0, 1.0, 8).unwrap().stable);
        assert!(!confinement_check(&v, 3.1, 2.0, 1.0, 8).unwrap().stable);
    }

    #[test]
    fn centrifugal_term_ignores_axis() {
        let v = harmonic(1.0, 1.0);
        let d = |z: f64| effective_potential(&v, 0.7, 1.0, [0.4, 0.1, z]) - v([0.4, 0.1, z]);
        assert!((d(0.0) - d(5.0)).abs() < 1e-15);
    }

    #[test]
    fn interaction_density_limits() {
        let gx = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)];
        let gy = [Complex64::new(0.1, -0.4), Complex64::new(0.6, 0.0)];
        assert!(interaction_density(&gx, &gy, 1.3, 2.0, 0.0, 1.0).unwrap().iter().all(|&v| v == 0.0));
        let at0 = interaction_density(&gx, &gy, 0.0, 2.0, 1.0, 1.0).unwrap();
        for (i, v) in at0.iter().enumerate() {
            let diag = (gy[i].norm_sqr() - gx[i].norm_sqr()) / 2.0;
            assert!((v - diag).abs() < 1e-15);
        }
    }

    #[test]
    fn interaction_density_averages_out() {
        let gx = [Complex64::new(0.3, 0.1)];
        let gy = [Complex64::new(0.1, -0.4)];
        let w = 1.7;
        let n = 4000;
        let period = PI / w;
        let mean: f64 = (0..n)
            .map(|i| interaction_density(&gx, &gy, period * i as f64 / n as f64, w, 1e-3, 1.0).unwrap()[0])
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 1e-15, "{mean}");
    }

    #[test]
    fn point_coupling_matches_lab_form() {
        let masses = [1.5, 0.5];
        let p = [[0.3, -1.1, 0.2], [2.0, 0.4, 0.0]];
        let lab: f64 = masses.iter().zip(&p).map(|(m, p)| (p[1] * p[1] - p[0] * p[0]) / (2.0 * m)).sum();
        for t in [0.0, 0.37, 1.9] {
            let rot = point_mass_coupling(&masses, &p, t, 1.3);
            assert!((rot - lab).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn rigid_pair_is_static_and_bound_is_twice_rotational_energy() {
        let (m, r, w) = (100.0, 1.0, 1e3);
        let pos = [[r, 0.0, 0.0], [-r, 0.0, 0.0]];
        let vel = [[0.0, w * r, 0.0], [0.0, -w * r, 0.0]];
        let s = RotatingFrameState::from_point_masses(w, &[m, m], &pos, &vel).unwrap();
        assert!(s.is_static());
        assert!((s.moment_integral - 2.0 * m * w * w * r * r).abs() < 1e-6);
        let gw = GwWaveform::rectangular(1e-6, 2e3, 0.0, 1.0).unwrap();
        let e_rot = m * w * w * r * r;
        let b = rotating_bound(&s, &gw).unwrap();
        assert!((b - gw.max_strain_rate() * 2.0 * e_rot).abs() < 1e-9 * b);
        let zero = GwWaveform::rectangular(0.0, 2e3, 0.0, 1.0).unwrap();
        assert_eq!(rotating_bound(&s, &zero).unwrap(), 0.0);
    }

    #[test]
    fn moving_pair_is_refused() {
        let pos = [[1.0, 0.0, 0.0]];
        let vel = [[0.1, 1.0, 0.0]];
        let s = RotatingFrameState::from_point_masses(1.0, &[1.0], &pos, &vel).unwrap();
        assert!(!s.is_static());
        let gw = GwWaveform::rectangular(1e-6, 2.0, 0.0, 1.0).unwrap();
        assert!(rotating_bound(&s, &gw).is_err());
        assert!(rotating_bound_rhs(&s, &gw) > 0.0);
    }
}
