//! Madelung (density–phase) form of the linear response.
//!
//! With `ψ = sqrt(ρ) e^{iS}` and a background at rest, the perturbations obey
//!
//! ```text
//! ∂t δρ = −∇·(ρ ∇δS) / m
//! ∂t δS = −g δρ − δQ − h [dV/dh + (∂x² − ∂y²)√ρ / (2m √ρ)]
//! δQ    = [δρ ∇²√ρ − ρ ∇²(δρ/√ρ)] / (4m ρ^{3/2})
//! ```
//!
//! The `ħ²` terms (δQ and the kinetic part of the source) are dropped when
//! quantum pressure is switched off. They are singular where `ρ → 0`, so
//! runs that reach the condensate edge have to mask the vacuum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{time_grid, CondensateField, Grid, Spectral};
use crate::error::{Error, Result};
use crate::waveform::GwWaveform;

/// Density, relative to the peak, below which a point counts as vacuum.
pub const VACUUM_FRACTION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroOptions {
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub quantum_pressure: bool,
    /// Freeze the perturbation in the vacuum instead of refusing to run.
    pub mask_vacuum: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroRun {
    pub times: Vec<f64>,
    pub delta_rho: Vec<Vec<f64>>,
    pub delta_phase: Vec<Vec<f64>>,
}

/// Density, phase and velocity of a wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadelungField {
    pub grid: Grid,
    pub density: Vec<f64>,
    pub phase: Vec<f64>,
    /// `Im(ψ* ∂ψ) / (m ρ)` per active axis.
    pub velocity: Vec<Vec<f64>>,
}

impl MadelungField {
    pub fn from_psi(grid: &Grid, psi: &[Complex64], mass: f64) -> Result<Self> {
        let sp = Spectral::new(grid)?;
        let density: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
        let velocity = (0..grid.dimensions)
            .map(|a| {
                let d = sp.gradient(psi, a);
                psi.iter()
                    .zip(&d)
                    .zip(&density)
                    .map(|((p, g), r)| if *r > 0.0 { (p.conj() * g).im / (mass * r) } else { 0.0 })
                    .collect()
            })
            .collect();
        Ok(Self { grid: *grid, density, phase: psi.iter().map(|c| c.arg()).collect(), velocity })
    }

    pub fn to_psi(&self) -> Vec<Complex64> {
        self.density.iter().zip(&self.phase).map(|(r, s)| Complex64::from_polar(r.sqrt(), *s)).collect()
    }
}

/// Maps a linear perturbation `χ` of a real background `φ` to `(δρ, δS)`:
/// `δρ = 2φ Re χ`, `δS = Im χ / φ`.
pub fn perturbation_to_hydro(phi: &[Complex64], chi: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    phi.iter()
        .zip(chi)
        .map(|(p, c)| {
            let a = p.re;
            (2.0 * a * c.re, if a.abs() > 0.0 { c.im / a } else { 0.0 })
        })
        .unzip()
}

/// Phase response of one homogeneous mode with frequency `big_omega` to
/// `h = h0 cos(ωt + φ)` acting through a source amplitude `d`, starting from
/// rest.
pub fn single_mode_phase(h0: f64, omega: f64, phase: f64, d: f64, big_omega: f64, t: f64) -> f64 {
    h0 * d / (big_omega * big_omega - omega * omega)
        * (omega * (omega * t + phase).sin() - omega * phase.sin() * (big_omega * t).cos()
            - big_omega * phase.cos() * (big_omega * t).sin())
}

fn real(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|x| Complex64::new(*x, 0.0)).collect()
}

struct Operator<'a> {
    sp: &'a Spectral,
    rho: Vec<f64>,
    sqrt_rho: Vec<f64>,
    lap_sqrt: Vec<f64>,
    occupied: Vec<bool>,
    source: Vec<f64>,
    coupling: f64,
    mass: f64,
    quantum_pressure: bool,
}

impl Operator<'_> {
    fn rhs(&self, h: f64, drho: &[f64], ds: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dims = self.sp.grid().dimensions;
        let dsc = real(ds);
        let mut div = vec![0.0; drho.len()];
        for a in 0..dims {
            let grad = self.sp.gradient(&dsc, a);
            let flux: Vec<Complex64> = grad.iter().zip(&self.rho).map(|(g, r)| Complex64::new(g.re * r, 0.0)).collect();
            let d = self.sp.gradient(&flux, a);
            div.iter_mut().zip(&d).for_each(|(s, v)| *s += v.re);
        }
        let rho_dot: Vec<f64> = div
            .iter()
            .zip(&self.occupied)
            .map(|(d, o)| if *o { -d / self.mass } else { 0.0 })
            .collect();

        let dq = if self.quantum_pressure {
            let ratio: Vec<Complex64> = drho
                .iter()
                .zip(&self.sqrt_rho)
                .zip(&self.occupied)
                .map(|((d, s), o)| Complex64::new(if *o { d / s } else { 0.0 }, 0.0))
                .collect();
            let mut lap = vec![0.0; drho.len()];
            for a in 0..dims {
                let d2 = self.sp.second_derivative(&ratio, a);
                lap.iter_mut().zip(&d2).for_each(|(l, v)| *l += v.re);
            }
            (0..drho.len())
                .map(|i| {
                    if !self.occupied[i] {
                        return 0.0;
                    }
                    (drho[i] * self.lap_sqrt[i] - self.rho[i] * lap[i]) / (4.0 * self.mass * self.rho[i] * self.sqrt_rho[i])
                })
                .collect()
        } else {
            vec![0.0; drho.len()]
        };
        let phase_dot = (0..drho.len())
            .map(|i| if self.occupied[i] { -self.coupling * drho[i] - dq[i] - h * self.source[i] } else { 0.0 })
            .collect();
        (rho_dot, phase_dot)
    }
}

/// Evolves `(δρ, δS)` from rest on the background `field`.
pub fn evolve_hydrodynamic(
    field: &CondensateField,
    dv_dh: &[f64],
    w: &GwWaveform,
    opts: &HydroOptions,
) -> Result<HydroRun> {
    let grid = field.grid;
    if dv_dh.len() != grid.len() {
        return Err(Error::invalid("dV/dh does not match the grid"));
    }
    let peak_amp = field.psi.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if field.psi.iter().any(|c| c.im.abs() > 1e-8 * peak_amp || c.re < -1e-8 * peak_amp) {
        return Err(Error::invalid("the hydrodynamic solver needs a real, non-negative background at rest"));
    }
    let sp = Spectral::new(&grid)?;
    let m = field.mass;
    let rho = field.density();
    let peak = field.peak_density();
    let occupied: Vec<bool> = rho.iter().map(|r| *r > VACUUM_FRACTION * peak).collect();
    if !opts.mask_vacuum && occupied.iter().any(|o| !o) && opts.quantum_pressure {
        return Err(Error::invalid(
            "density falls below 1e-8 of the peak: quantum-pressure terms are singular there; enable vacuum masking",
        ));
    }
    let sqrt_rho: Vec<f64> = rho.iter().map(|r| r.sqrt()).collect();
    let src = real(&sqrt_rho);
    let mut lap_sqrt = vec![0.0; rho.len()];
    let mut aniso = vec![0.0; rho.len()];
    for a in 0..grid.dimensions {
        let d2 = sp.second_derivative(&src, a);
        lap_sqrt.iter_mut().zip(&d2).for_each(|(l, v)| *l += v.re);
        let sign = match a {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        };
        aniso.iter_mut().zip(&d2).for_each(|(l, v)| *l += sign * v.re);
    }
    let source: Vec<f64> = (0..rho.len())
        .map(|i| {
            let qp = if opts.quantum_pressure && occupied[i] { aniso[i] / (2.0 * m * sqrt_rho[i]) } else { 0.0 };
            dv_dh[i] + qp
        })
        .collect();

    // RK4 stability along the imaginary axis (|λ dt| < 2.8), with margin
    let kmax = std::f64::consts::PI / grid.spacing() * (grid.dimensions as f64).sqrt();
    let c2 = field.coupling * peak / m;
    let qp = if opts.quantum_pressure { kmax.powi(4) / (4.0 * m * m) } else { 0.0 };
    let fastest = (c2 * kmax * kmax + qp).sqrt();
    let limit = (2.5 / fastest).min(std::f64::consts::TAU / (super::bdg::STEPS_PER_PERIOD * w.angular_frequency().max(1e-300)));
    let steps = time_grid(opts.dt, opts.t_end, opts.stride, limit, "explicit hydrodynamic step exceeds its stability limit")?;

    let op = Operator {
        sp: &sp,
        rho,
        sqrt_rho,
        lap_sqrt,
        occupied,
        source,
        coupling: field.coupling,
        mass: m,
        quantum_pressure: opts.quantum_pressure,
    };
    let n = grid.len();
    let mut drho = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut run = HydroRun { times: vec![0.0], delta_rho: vec![drho.clone()], delta_phase: vec![ds.clone()] };
    let dt = opts.dt;
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    for step in 0..steps {
        let t = step as f64 * dt;
        let (k1r, k1s) = op.rhs(w.strain(t), &drho, &ds);
        let (k2r, k2s) = op.rhs(w.strain(t + 0.5 * dt), &axpy(&drho, 0.5 * dt, &k1r), &axpy(&ds, 0.5 * dt, &k1s));
        let (k3r, k3s) = op.rhs(w.strain(t + 0.5 * dt), &axpy(&drho, 0.5 * dt, &k2r), &axpy(&ds, 0.5 * dt, &k2s));
        let (k4r, k4s) = op.rhs(w.strain(t + dt), &axpy(&drho, dt, &k3r), &axpy(&ds, dt, &k3s));
        for i in 0..n {
            drho[i] += dt / 6.0 * (k1r[i] + 2.0 * k2r[i] + 2.0 * k3r[i] + k4r[i]);
            ds[i] += dt / 6.0 * (k1s[i] + 2.0 * k2s[i] + 2.0 * k3s[i] + k4s[i]);
        }
        if drho.iter().chain(&ds).any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("hydrodynamic fields became non-finite at t = {}", t + dt)));
        }
        if (step + 1) % opts.stride == 0 || step + 1 == steps {
            run.times.push(t + dt);
            run.delta_rho.push(drho.clone());
            run.delta_phase.push(ds.clone());
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condensate::grid::Boundary;

    #[test]
    fn madelung_round_trip() {
        let grid = Grid::new(2, 32, 10.0, Boundary::Periodic).unwrap();
        let psi: Vec<Complex64> = grid
            .positions()
            .iter()
            .map(|r| {
                let k = 0.2 * std::f64::consts::PI;
                Complex64::from_polar(1.0 + 0.3 * (k * r[0]).cos() * (k * r[1]).cos(), 0.3 * (k * r[0]).sin())
            })
            .collect();
        let mf = MadelungField::from_psi(&grid, &psi, 1.0).unwrap();
        for (a, b) in psi.iter().zip(mf.to_psi()) {
            assert!((a - b).norm() < 1e-14);
        }
        // v_x = ∂x S for this phase
        let k = 0.2 * std::f64::consts::PI;
        for (r, v) in grid.positions().iter().zip(&mf.velocity[0]) {
            assert!((v - 0.3 * k * (k * r[0]).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_starts_at_rest() {
        let f = |t| single_mode_phase(1e-3, 2.0, 0.4, 1.5, 3.0, t);
        assert!(f(0.0).abs() < 1e-18);
        // δṠ(0) = −h(0) d
        let eps = 1e-6;
        let slope = (f(eps) - f(-eps)) / (2.0 * eps);
        assert!((slope + 1e-3 * 0.4f64.cos() * 1.5).abs() < 1e-9);
    }
}
