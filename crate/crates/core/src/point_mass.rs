//! Slow point masses in the wave, and the rotating barbell built from them.
//!
//! In the metric `ds² = dt² − (1+h)dx² − (1−h)dy² − dz²` a slow particle
//! obeys `u̇x = −ḣ ux`, `u̇y = +ḣ uy`, so it gains energy at the rate
//! `ḣ (E_kin,y − E_kin,x)`. The barbell is two masses `m` at `±r`; its
//! relative coordinate has the Lagrangian
//!
//! ```text
//! L = M/2 [(1+h) ẋ² + (1−h) ẏ² + ż²] − M u(ρ),   M = 2m,  ρ = √(x² + y²)
//! ```
//!
//! with an in-plane bond `u` that does not depend on `h`. Three variants:
//! a rigid rotor (`ρ = R` held exactly), a radial spring tuned so that the
//! radial mode about the rotating equilibrium has frequency `ω_vib`, and a
//! scissors pair of rigid rotors at right angles joined by a torsion spring.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::energy_transfer::{EnergyLedger, MatterSnapshot};
use crate::error::{Error, Result};
use crate::integrate::{rk4_step, step_count};
use crate::rotating_frame::{point_mass_coupling, rotating_bound_rhs, RotatingFrameState};
use crate::waveform::GwWaveform;

/// Speed of light, m/s. Barbell runs are in SI.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Speeds above this fraction of `c` are flagged.
pub const RELATIVISTIC_FRACTION: f64 = 0.01;
/// Minimum steps per shortest period.
pub const STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub mass: f64,
}

impl ParticleState {
    pub fn new(position: [f64; 3], velocity: [f64; 3], mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("particle mass must be positive, got {mass}")));
        }
        Ok(Self { position, velocity, mass })
    }

    pub fn speed(&self) -> f64 {
        norm(&self.velocity)
    }

    /// Errors once the speed passes `RELATIVISTIC_FRACTION * c`.
    pub fn check_nonrelativistic(&self, c: f64) -> Result<()> {
        check_speed(self.speed(), c)
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn check_speed(speed: f64, c: f64) -> Result<()> {
    let limit = RELATIVISTIC_FRACTION * c;
    if speed > limit {
        return Err(Error::Relativistic { speed, limit });
    }
    Ok(())
}

pub fn geodesic_force(state: &ParticleState, hdot: f64) -> [f64; 3] {
    [-hdot * state.velocity[0], hdot * state.velocity[1], 0.0]
}

pub fn power_transfer(state: &ParticleState, hdot: f64) -> f64 {
    let [vx, vy, _] = state.velocity;
    hdot * 0.5 * state.mass * (vy * vy - vx * vx)
}

fn check_step(dt: f64, fastest: f64) -> Result<()> {
    let limit = std::f64::consts::TAU / (STEPS_PER_PERIOD * fastest);
    if dt > limit {
        return Err(Error::StepSize { dt, limit, reason: "fewer than 50 steps per shortest period" });
    }
    Ok(())
}

/// Free particle under geodesic forcing. Returns the state after every step,
/// starting with the initial one.
pub fn evolve_particle(state: &ParticleState, w: &GwWaveform, dt: f64, t_end: f64) -> Result<Vec<ParticleState>> {
    check_step(dt, w.angular_frequency())?;
    state.check_nonrelativistic(SPEED_OF_LIGHT)?;
    let n = step_count(t_end, dt)?;
    let f = |t: f64, y: &[f64; 6]| {
        let hd = w.strain_rate(t);
        [y[3], y[4], y[5], -hd * y[3], hd * y[4], 0.0]
    };
    let p = state.position;
    let v = state.velocity;
    let mut y = [p[0], p[1], p[2], v[0], v[1], v[2]];
    let mut out = Vec::with_capacity(n + 1);
    out.push(*state);
    for i in 0..n {
        y = rk4_step(&f, i as f64 * dt, &y, dt);
        let s = ParticleState { position: [y[0], y[1], y[2]], velocity: [y[3], y[4], y[5]], mass: state.mass };
        s.check_nonrelativistic(SPEED_OF_LIGHT)?;
        out.push(s);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarbellConfig {
    /// Mass of each end.
    pub particle_mass: f64,
    pub nominal_radius: f64,
    pub rotation_rate: f64,
    /// `ω_vib²` of the radial mode about the rotating equilibrium; 0 selects
    /// the rigid rotor.
    pub radial_stiffness: f64,
    #[serde(default)]
    pub initial_radial_amplitude: f64,
    #[serde(default)]
    pub initial_radial_phase: f64,
    /// Orientation of the bar at `t = 0`.
    #[serde(default)]
    pub initial_angle: f64,
}

impl BarbellConfig {
    pub fn rigid(particle_mass: f64, nominal_radius: f64, rotation_rate: f64) -> Self {
        Self {
            particle_mass,
            nominal_radius,
            rotation_rate,
            radial_stiffness: 0.0,
            initial_radial_amplitude: 0.0,
            initial_radial_phase: 0.0,
            initial_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("particle_mass", self.particle_mass),
            ("nominal_radius", self.nominal_radius),
            ("rotation_rate", self.rotation_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.radial_stiffness >= 0.0 && self.radial_stiffness.is_finite()) {
            return Err(Error::invalid("radial_stiffness must be >= 0"));
        }
        if !(self.initial_radial_amplitude.abs() < self.nominal_radius) {
            return Err(Error::invalid("initial radial amplitude must be smaller than the radius"));
        }
        if self.is_rigid() && self.initial_radial_amplitude != 0.0 {
            return Err(Error::invalid("a rigid rotor cannot carry a radial amplitude"));
        }
        if !self.is_rigid() && self.bond_stiffness() <= 0.0 {
            return Err(Error::invalid(format!(
                "radial_stiffness {} must exceed 3 omega_rot^2 = {} for a bound orbit",
                self.radial_stiffness,
                3.0 * self.rotation_rate.powi(2)
            )));
        }
        Ok(())
    }

    pub fn is_rigid(&self) -> bool {
        self.radial_stiffness == 0.0
    }

    pub fn vibration_frequency(&self) -> f64 {
        self.radial_stiffness.sqrt()
    }

    pub fn total_mass(&self) -> f64 {
        2.0 * self.particle_mass
    }

    pub fn moment_of_inertia(&self) -> f64 {
        self.total_mass() * self.nominal_radius.powi(2)
    }

    /// Spring constant per unit mass of the bond, `ω_vib² − 3ω_rot²`.
    fn bond_stiffness(&self) -> f64 {
        self.radial_stiffness - 3.0 * self.rotation_rate.powi(2)
    }

    /// Bond rest length that puts the circular orbit at `nominal_radius`.
    fn rest_length(&self) -> f64 {
        let k = self.bond_stiffness();
        self.nominal_radius - self.rotation_rate.powi(2) * self.nominal_radius / k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScissorsConfig {
    pub particle_mass: f64,
    pub nominal_radius: f64,
    pub rotation_rate: f64,
    /// Frequency of the relative-angle (scissors) mode.
    pub scissors_frequency: f64,
    /// Initial deviation of the relative angle from a right angle.
    #[serde(default)]
    pub initial_scissors_amplitude: f64,
    #[serde(default)]
    pub initial_scissors_phase: f64,
}

impl ScissorsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("particle_mass", self.particle_mass),
            ("nominal_radius", self.nominal_radius),
            ("rotation_rate", self.rotation_rate),
            ("scissors_frequency", self.scissors_frequency),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.initial_scissors_amplitude.abs() < FRAC_PI_4) {
            return Err(Error::invalid("scissors amplitude must stay below pi/4"));
        }
        Ok(())
    }

    /// Moment of inertia of one rotor.
    fn rotor_inertia(&self) -> f64 {
        2.0 * self.particle_mass * self.nominal_radius.powi(2)
    }

    fn torsion(&self) -> f64 {
        0.5 * self.rotor_inertia() * self.scissors_frequency.powi(2)
    }
}

/// Energy split of a barbell state. `total` is the conserved energy of the
/// unperturbed system plus the strain term:
/// `total = rotational + vibrational + strain_correction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub time: f64,
    /// Energy of the circular (or rigidly co-rotating) motion carrying the
    /// same angular momentum.
    pub rotational: f64,
    /// Radial or scissors oscillation energy above that, bond potential
    /// included.
    pub vibrational: f64,
    /// `E(h) − E(0)` at fixed coordinate velocities, `M h (ẋ² − ẏ²) / 2`.
    pub strain_correction: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarbellSample {
    pub time: f64,
    pub strain: f64,
    pub strain_rate: f64,
    pub energy: EnergyBreakdown,
    pub positions: Vec<[f64; 3]>,
    pub velocities: Vec<[f64; 3]>,
    pub snapshot: MatterSnapshot,
    pub frame: RotatingFrameState,
    /// `∂H/∂h` evaluated in co-rotating coordinates at the nominal rate.
    pub frame_coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarbellRun {
    pub particle_mass: f64,
    pub samples: Vec<BarbellSample>,
}

impl BarbellRun {
    fn first_last(&self) -> (&EnergyBreakdown, &EnergyBreakdown) {
        (&self.samples[0].energy, &self.samples[self.samples.len() - 1].energy)
    }

    pub fn total_change(&self) -> f64 {
        let (a, b) = self.first_last();
        b.total - a.total
    }

    pub fn rotational_change(&self) -> f64 {
        let (a, b) = self.first_last();
        b.rotational - a.rotational
    }

    pub fn vibrational_change(&self) -> f64 {
        let (a, b) = self.first_last();
        b.vibrational - a.vibrational
    }

    /// Largest `|E_total(t) − E_total(0)| / E_total(0)`.
    pub fn max_relative_drift(&self) -> f64 {
        let e0 = self.samples[0].energy.total;
        self.samples.iter().map(|s| ((s.energy.total - e0) / e0).abs()).fold(0.0, f64::max)
    }

    pub fn snapshots(&self) -> Vec<MatterSnapshot> {
        self.samples.iter().map(|s| s.snapshot).collect()
    }

    /// Energy ledger with the rotating-frame bound column attached. Both
    /// bounds are asserted at every sample.
    pub fn ledger(&self, w: &GwWaveform) -> Result<EnergyLedger> {
        let mut ledger = EnergyLedger::from_snapshots(&self.snapshots(), w)?;
        let rot: Vec<f64> = self.samples.iter().map(|s| rotating_bound_rhs(&s.frame, w)).collect();
        ledger.attach_rotating_bound(&rot)?;
        Ok(ledger)
    }

    /// Whether every sample is static in its co-rotating frame.
    pub fn static_in_rotating_frame(&self) -> bool {
        self.samples.iter().all(|s| s.frame.is_static())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,E_rot,E_vib,E_total,h")?;
        for s in &self.samples {
            let e = &s.energy;
            writeln!(out, "{:e},{:e},{:e},{:e},{:e}", s.time, e.rotational, e.vibrational, e.total, s.strain)?;
        }
        Ok(())
    }
}

struct SampleInput<'a> {
    time: f64,
    w: &'a GwWaveform,
    nominal_rate: f64,
    mass_each: f64,
    positions: Vec<[f64; 3]>,
    velocities: Vec<[f64; 3]>,
    energy: EnergyBreakdown,
}

fn make_sample(input: SampleInput<'_>) -> Result<BarbellSample> {
    let SampleInput { time, w, nominal_rate, mass_each, positions, velocities, energy } = input;
    let m = mass_each;
    let (mut kx, mut ky, mut kt, mut lz, mut moment) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut max_speed = 0.0f64;
    for (r, v) in positions.iter().zip(&velocities) {
        kx += 0.5 * m * v[0] * v[0];
        ky += 0.5 * m * v[1] * v[1];
        kt += 0.5 * m * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        lz += m * (r[0] * v[1] - r[1] * v[0]);
        moment += m * (r[0] * r[0] + r[1] * r[1]);
        max_speed = max_speed.max(norm(v));
    }
    check_speed(max_speed, SPEED_OF_LIGHT)?;
    if !energy.total.is_finite() {
        return Err(Error::Numerical(format!("barbell energy became non-finite at t = {time}")));
    }
    let masses = vec![m; positions.len()];
    let frame = RotatingFrameState::from_point_masses(lz / moment, &masses, &positions, &velocities)?;
    let momenta: Vec<[f64; 3]> = velocities.iter().map(|v| [m * v[0], m * v[1], m * v[2]]).collect();
    let frame_coupling = point_mass_coupling(&masses, &momenta, time, nominal_rate);
    let snapshot = MatterSnapshot {
        time,
        particle_number: positions.len() as f64,
        kinetic_x: kx,
        kinetic_y: ky,
        kinetic_total: kt,
        dv_dh_weighted: 0.0,
        dv_dh_max: 0.0,
        kinetic_cap: None,
    };
    Ok(BarbellSample {
        time,
        strain: w.strain(time),
        strain_rate: w.strain_rate(time),
        energy,
        positions,
        velocities,
        snapshot,
        frame,
        frame_coupling,
    })
}

/// Integrates with RK4 at step `dt` to `t_end`, keeping every `stride`-th
/// step plus the final one.
fn drive<const N: usize, F, S>(y0: [f64; N], f: F, dt: f64, t_end: f64, stride: usize, mut emit: S) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, &[f64; N]) -> Result<()>,
{
    if stride == 0 {
        return Err(Error::invalid("output stride must be >= 1"));
    }
    let n = step_count(t_end, dt)?;
    let mut y = y0;
    emit(0.0, &y)?;
    for i in 0..n {
        y = rk4_step(&f, i as f64 * dt, &y, dt);
        if (i + 1) % stride == 0 || i + 1 == n {
            emit((i + 1) as f64 * dt, &y)?;
        }
    }
    Ok(())
}

pub fn evolve_barbell(
    cfg: &BarbellConfig,
    w: &GwWaveform,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<BarbellRun> {
    cfg.validate()?;
    let fastest = cfg.rotation_rate.max(cfg.vibration_frequency()).max(w.angular_frequency());
    check_step(dt, fastest)?;
    let samples = if cfg.is_rigid() {
        evolve_rigid(cfg, w, dt, t_end, stride)?
    } else {
        evolve_spring(cfg, w, dt, t_end, stride)?
    };
    Ok(BarbellRun { particle_mass: cfg.particle_mass, samples })
}

fn pair(r: [f64; 3], v: [f64; 3]) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    (vec![r, [-r[0], -r[1], -r[2]]], vec![v, [-v[0], -v[1], -v[2]]])
}

/// State `[φ, p]` with `p = I (1 − h cos 2φ) φ̇`.
fn evolve_rigid(cfg: &BarbellConfig, w: &GwWaveform, dt: f64, t_end: f64, stride: usize) -> Result<Vec<BarbellSample>> {
    let inertia = cfg.moment_of_inertia();
    let radius = cfg.nominal_radius;
    let f = |t: f64, y: &[f64; 2]| {
        let h = w.strain(t);
        let (s, c) = (2.0 * y[0]).sin_cos();
        let a = 1.0 - h * c;
        [y[1] / (inertia * a), y[1] * y[1] * h * s / (inertia * a * a)]
    };
    let h0 = w.strain(0.0);
    let p0 = inertia * (1.0 - h0 * (2.0 * cfg.initial_angle).cos()) * cfg.rotation_rate;
    let mut out = Vec::new();
    drive([cfg.initial_angle, p0], f, dt, t_end, stride, |t, y| {
        let h = w.strain(t);
        let (sn, cs) = y[0].sin_cos();
        let a = 1.0 - h * (2.0 * y[0]).cos();
        let phidot = y[1] / (inertia * a);
        let flat = 0.5 * inertia * phidot * phidot;
        let total = y[1] * y[1] / (2.0 * inertia * a);
        let energy = EnergyBreakdown {
            time: t,
            rotational: flat,
            vibrational: 0.0,
            strain_correction: total - flat,
            total,
        };
        let (positions, velocities) = pair([radius * cs, radius * sn, 0.0], [-radius * phidot * sn, radius * phidot * cs, 0.0]);
        out.push(make_sample(SampleInput {
            time: t,
            w,
            nominal_rate: cfg.rotation_rate,
            mass_each: cfg.particle_mass,
            positions,
            velocities,
            energy,
        })?);
        Ok(())
    })?;
    Ok(out)
}

/// Radius of the circular orbit with specific angular momentum `j`, found by
/// Newton iteration on `k (ρ − L0) ρ³ = j²`.
fn circular_radius(k: f64, rest: f64, j: f64, guess: f64) -> Result<f64> {
    let mut rho = guess;
    let j2 = j * j;
    for _ in 0..100 {
        let f = k * (rho - rest) * rho.powi(3) - j2;
        let df = k * (4.0 * rho.powi(3) - 3.0 * rest * rho * rho);
        let next = rho - f / df;
        if !(next > 0.0) {
            return Err(Error::Numerical("circular-orbit radius left the physical range".into()));
        }
        if (next - rho).abs() <= 1e-15 * rho {
            return Ok(next);
        }
        rho = next;
    }
    Ok(rho)
}

/// State `[x, y, z, ẋ, ẏ, ż]` of the half-separation vector.
fn evolve_spring(cfg: &BarbellConfig, w: &GwWaveform, dt: f64, t_end: f64, stride: usize) -> Result<Vec<BarbellSample>> {
    let k = cfg.bond_stiffness();
    let rest = cfg.rest_length();
    let big_m = cfg.total_mass();
    let f = |t: f64, y: &[f64; 6]| {
        let h = w.strain(t);
        let hd = w.strain_rate(t);
        let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let pull = k * (rho - rest) / rho;
        [
            y[3],
            y[4],
            y[5],
            (-pull * y[0] - hd * y[3]) / (1.0 + h),
            (-pull * y[1] + hd * y[4]) / (1.0 - h),
            0.0,
        ]
    };
    let psi = cfg.initial_radial_phase;
    let rho0 = cfg.nominal_radius + cfg.initial_radial_amplitude * psi.cos();
    let rhodot0 = -cfg.initial_radial_amplitude * cfg.vibration_frequency() * psi.sin();
    let phidot0 = cfg.rotation_rate * cfg.nominal_radius.powi(2) / (rho0 * rho0);
    let (sn, cs) = cfg.initial_angle.sin_cos();
    let y0 = [
        rho0 * cs,
        rho0 * sn,
        0.0,
        rhodot0 * cs - rho0 * phidot0 * sn,
        rhodot0 * sn + rho0 * phidot0 * cs,
        0.0,
    ];
    let mut out = Vec::new();
    let mut guess = cfg.nominal_radius;
    drive(y0, f, dt, t_end, stride, |t, y| {
        let h = w.strain(t);
        let rho = (y[0] * y[0] + y[1] * y[1]).sqrt();
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Numerical(format!("barbell collapsed at t = {t}")));
        }
        let u = 0.5 * k * (rho - rest).powi(2);
        let v2 = y[3] * y[3] + y[4] * y[4] + y[5] * y[5];
        let flat = 0.5 * big_m * v2 + big_m * u;
        let strain_correction = 0.5 * big_m * h * (y[3] * y[3] - y[4] * y[4]);
        let j = y[0] * y[4] - y[1] * y[3];
        let rc = circular_radius(k, rest, j, guess)?;
        guess = rc;
        let rotational = big_m * (0.5 * k * (rc - rest).powi(2) + j * j / (2.0 * rc * rc));
        let energy = EnergyBreakdown {
            time: t,
            rotational,
            vibrational: flat - rotational,
            strain_correction,
            total: flat + strain_correction,
        };
        let (positions, velocities) = pair([y[0], y[1], y[2]], [y[3], y[4], y[5]]);
        out.push(make_sample(SampleInput {
            time: t,
            w,
            nominal_rate: cfg.rotation_rate,
            mass_each: cfg.particle_mass,
            positions,
            velocities,
            energy,
        })?);
        Ok(())
    })?;
    Ok(out)
}

/// Two rigid rotors, nominally at right angles, with torsion coupling
/// `κ Δ² / 2` on the deviation `Δ = φ1 − φ2 − π/2`. State `[φ1, φ2, p1, p2]`.
pub fn evolve_scissors(
    cfg: &ScissorsConfig,
    w: &GwWaveform,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<BarbellRun> {
    cfg.validate()?;
    let fastest = cfg.rotation_rate.max(cfg.scissors_frequency).max(w.angular_frequency());
    check_step(dt, fastest)?;
    let inertia = cfg.rotor_inertia();
    let kappa = cfg.torsion();
    let radius = cfg.nominal_radius;
    let gap = 2.0 * FRAC_PI_4;
    let f = |t: f64, y: &[f64; 4]| {
        let h = w.strain(t);
        let delta = y[0] - y[1] - gap;
        let mut d = [0.0; 4];
        for i in 0..2 {
            let (s, c) = (2.0 * y[i]).sin_cos();
            let a = 1.0 - h * c;
            d[i] = y[2 + i] / (inertia * a);
            d[2 + i] = y[2 + i] * y[2 + i] * h * s / (inertia * a * a);
        }
        d[2] -= kappa * delta;
        d[3] += kappa * delta;
        d
    };
    let amp = cfg.initial_scissors_amplitude;
    let psi = cfg.initial_scissors_phase;
    let delta0 = amp * psi.cos();
    let deltadot0 = -amp * cfg.scissors_frequency * psi.sin();
    let phi1 = FRAC_PI_4 + 0.5 * delta0;
    let phi2 = -FRAC_PI_4 - 0.5 * delta0;
    let h0 = w.strain(0.0);
    let p = |phi: f64, rate: f64| inertia * (1.0 - h0 * (2.0 * phi).cos()) * rate;
    let y0 = [
        phi1,
        phi2,
        p(phi1, cfg.rotation_rate + 0.5 * deltadot0),
        p(phi2, cfg.rotation_rate - 0.5 * deltadot0),
    ];
    let mut out = Vec::new();
    drive(y0, f, dt, t_end, stride, |t, y| {
        let h = w.strain(t);
        let mut rates = [0.0; 2];
        let mut total = 0.0;
        let mut positions = Vec::with_capacity(4);
        let mut velocities = Vec::with_capacity(4);
        for i in 0..2 {
            let a = 1.0 - h * (2.0 * y[i]).cos();
            rates[i] = y[2 + i] / (inertia * a);
            total += y[2 + i] * y[2 + i] / (2.0 * inertia * a);
            let (sn, cs) = y[i].sin_cos();
            let (r, v) = pair([radius * cs, radius * sn, 0.0], [-radius * rates[i] * sn, radius * rates[i] * cs, 0.0]);
            positions.extend(r);
            velocities.extend(v);
        }
        let delta = y[0] - y[1] - gap;
        let torsion = 0.5 * kappa * delta * delta;
        total += torsion;
        let mean = 0.5 * (rates[0] + rates[1]);
        let rel = rates[0] - rates[1];
        let rotational = inertia * mean * mean;
        let vibrational = 0.25 * inertia * rel * rel + torsion;
        let energy = EnergyBreakdown {
            time: t,
            rotational,
            vibrational,
            strain_correction: total - rotational - vibrational,
            total,
        };
        out.push(make_sample(SampleInput {
            time: t,
            w,
            nominal_rate: cfg.rotation_rate,
            mass_each: cfg.particle_mass,
            positions,
            velocities,
            energy,
        })?);
        Ok(())
    })?;
    Ok(BarbellRun { particle_mass: cfg.particle_mass, samples: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn still(h0: f64) -> GwWaveform {
        GwWaveform::rectangular(h0, 2.0e3, 0.0, 0.01).unwrap()
    }

    #[test]
    fn force_cases() {
        let rest = ParticleState::new([1.0, 2.0, 3.0], [0.0; 3], 1.0).unwrap();
        assert_eq!(geodesic_force(&rest, 5.0), [0.0, 0.0, 0.0]);
        let moving = ParticleState::new([0.0; 3], [2.0, 2.0, 0.0], 1.0).unwrap();
        assert_eq!(geodesic_force(&moving, 0.0), [0.0, 0.0, 0.0]);
        assert_eq!(geodesic_force(&moving, 0.5), [-1.0, 1.0, 0.0]);
        assert_eq!(power_transfer(&moving, 3.0), 0.0);
        assert!(ParticleState::new([0.0; 3], [0.0; 3], 0.0).is_err());
    }

    #[test]
    fn relativistic_flag() {
        let fast = ParticleState::new([0.0; 3], [0.02 * SPEED_OF_LIGHT, 0.0, 0.0], 1.0).unwrap();
        assert!(matches!(fast.check_nonrelativistic(SPEED_OF_LIGHT), Err(Error::Relativistic { .. })));
    }

    #[test]
    fn step_precondition() {
        let cfg = BarbellConfig::rigid(1.0, 1.0, 1e3);
        let w = still(1e-6);
        assert!(matches!(evolve_barbell(&cfg, &w, 1e-4, 0.01, 1), Err(Error::StepSize { .. })));
    }

    #[test]
    fn spring_needs_bound_orbit() {
        let mut cfg = BarbellConfig::rigid(1.0, 1.0, 10.0);
        cfg.radial_stiffness = 200.0;
        assert!(cfg.validate().is_err());
        cfg.radial_stiffness = 900.0;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn circular_orbit_radius_recovers_nominal() {
        let mut cfg = BarbellConfig::rigid(1.0, 2.0, 3.0);
        cfg.radial_stiffness = 81.0;
        let j = 3.0 * 4.0;
        let r = circular_radius(cfg.bond_stiffness(), cfg.rest_length(), j, 1.5).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn undriven_spring_conserves_energy() {
        let mut cfg = BarbellConfig::rigid(1.0, 1.0, 1.0);
        cfg.radial_stiffness = 9.0;
        cfg.initial_radial_amplitude = 0.05;
        cfg.initial_radial_phase = 0.3;
        let w = GwWaveform::rectangular(0.0, 5.0, 0.0, 20.0 * PI).unwrap();
        let dt = 2.0 * PI / 3.0 / 2000.0;
        let run = evolve_barbell(&cfg, &w, dt, 20.0 * PI, 100).unwrap();
        assert!(run.max_relative_drift() < 1e-10, "{}", run.max_relative_drift());
        for s in &run.samples {
            let e = s.energy;
            assert!((e.rotational + e.vibrational + e.strain_correction - e.total).abs() <= 1e-12 * e.total);
            assert!(e.vibrational > 0.0);
        }
    }

    #[test]
    fn scissors_breakdown_adds_up() {
        let cfg = ScissorsConfig {
            particle_mass: 1.0,
            nominal_radius: 1.0,
            rotation_rate: 1.0,
            scissors_frequency: 3.0,
            initial_scissors_amplitude: 0.01,
            initial_scissors_phase: 0.0,
        };
        let w = GwWaveform::rectangular(1e-4, 5.0, 0.0, 2.0 * PI).unwrap();
        let run = evolve_scissors(&cfg, &w, 2.0 * PI / 5000.0, 2.0 * PI, 50).unwrap();
        let e = run.samples[0].energy;
        let rot = 2.0 * 1.0; // rotor inertia 2, mean rate 1
        assert!((e.rotational - rot).abs() < 1e-12);
        let vib = 0.25 * 2.0 * 0.0 + 0.5 * 9.0 * 1e-4;
        assert!((e.vibrational - vib).abs() < 1e-12);
    }
}
