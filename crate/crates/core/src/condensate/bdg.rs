//! Linear response of a condensate to the wave.
//!
//! In the frame rotating at `μ` the perturbation `χ = δψ` obeys
//!
//! ```text
//! i ∂t χ = (T + V0 + 2g|φ|² − μ) χ + g φ² χ* + h(t) S,
//! S = [(∂x² − ∂y²)/2m + dV/dh] φ.
//! ```
//!
//! Each Strang step is source(dt/2) · local(dt/2) · kinetic(dt) ·
//! local(dt/2) · source(dt/2). The local step solves the 2×2 `(χ, χ*)`
//! system exactly at every point; the source halves use `h` at their own
//! endpoint, giving a trapezoid rule for the forcing. Everything is linear
//! in `χ` and in `h`, so with `χ(0) = 0` the response scales exactly with
//! the amplitude.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{field_snapshot, time_grid, CondensateField, CondensateRun, CondensateSample, Spectral};
use crate::error::{Error, Result};
use crate::waveform::GwWaveform;

/// Minimum steps per period of the chemical potential and of the drive.
pub const STEPS_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdgOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot every `stride` steps.
    pub stride: usize,
    /// Keep `χ` at every snapshot time.
    pub record_fields: bool,
    /// Initial perturbation; zero when absent.
    pub seed: Option<Vec<Complex64>>,
}

/// `ε (x² − y²) φ`, a quadrupolar deformation used to make the state
/// non-stationary.
pub fn quadrupole_seed(field: &CondensateField, epsilon: f64) -> Vec<Complex64> {
    field.grid.positions().iter().zip(&field.psi).map(|(r, p)| p * (epsilon * (r[0] * r[0] - r[1] * r[1]))).collect()
}

/// `(∂x² − ∂y²) φ / 2m + dV/dh φ`.
pub(crate) fn strain_source(sp: &Spectral, phi: &[Complex64], mass: f64, dv_dh: &[f64]) -> Vec<Complex64> {
    let dims = sp.grid().dimensions;
    let dxx = sp.second_derivative(phi, 0);
    let dyy = if dims >= 2 { sp.second_derivative(phi, 1) } else { vec![Complex64::new(0.0, 0.0); phi.len()] };
    dxx.iter()
        .zip(&dyy)
        .zip(phi.iter().zip(dv_dh))
        .map(|((a, b), (p, v))| (a - b) / (2.0 * mass) + p * v)
        .collect()
}

/// Exact `exp(−i M t)` for `i d/dt (u, ū) = [[a, b], [−b̄, −a]] (u, ū)`.
#[derive(Clone, Copy)]
struct LocalMap {
    c: f64,
    s: f64,
    a: f64,
    b: Complex64,
}

impl LocalMap {
    fn new(a: f64, b: Complex64, t: f64) -> Self {
        let lam2 = a * a - b.norm_sqr();
        let x = lam2 * t * t;
        // cos(λt) and sin(λt)/λ, analytic in λ²
        let (c, s) = if x.abs() < 1e-6 {
            (1.0 - x / 2.0 + x * x / 24.0, t * (1.0 - x / 6.0 + x * x / 120.0))
        } else if lam2 > 0.0 {
            let l = lam2.sqrt();
            ((l * t).cos(), (l * t).sin() / l)
        } else {
            let k = (-lam2).sqrt();
            ((k * t).cosh(), (k * t).sinh() / k)
        };
        Self { c, s, a, b }
    }

    fn apply(&self, u: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        u * self.c - i * self.s * (u * self.a + self.b * u.conj())
    }
}

/// Evolves `χ` under the drive `w`; `dv_dh` is sampled on the field's grid.
pub fn evolve_bdg(field: &CondensateField, dv_dh: &[f64], w: &GwWaveform, opts: &BdgOptions) -> Result<CondensateRun> {
    let grid = field.grid;
    if dv_dh.len() != grid.len() {
        return Err(Error::invalid("dV/dh does not match the grid"));
    }
    let mu = field.chemical_potential;
    let fastest = mu.abs().max(w.angular_frequency());
    let limit = if fastest > 0.0 { std::f64::consts::TAU / (STEPS_PER_PERIOD * fastest) } else { f64::INFINITY };
    let steps = time_grid(opts.dt, opts.t_end, opts.stride, limit, "must resolve the chemical potential and drive")?;
    let kin = super::kinetic_step_limit(&grid, field.mass);
    if opts.dt > kin {
        return Err(Error::StepSize { dt: opts.dt, limit: kin, reason: "kinetic phase at the grid cutoff exceeds pi" });
    }
    let dt = opts.dt;
    let sp = Spectral::new(&grid)?;
    let m = field.mass;
    let g = field.coupling;
    let phi = &field.psi;
    let atoms = field.atoms();

    let source = strain_source(&sp, phi, m, dv_dh);
    let local: Vec<LocalMap> = phi
        .iter()
        .zip(&field.potential)
        .map(|(p, v)| LocalMap::new(v + 2.0 * g * p.norm_sqr() - mu, p * p * g, 0.5 * dt))
        .collect();

    let mut chi = match &opts.seed {
        Some(s) if s.len() == grid.len() => s.clone(),
        Some(_) => return Err(Error::invalid("seed does not match the grid")),
        None => vec![Complex64::new(0.0, 0.0); grid.len()],
    };
    let i = Complex64::new(0.0, 1.0);
    let add_source = |chi: &mut [Complex64], h: f64| {
        let f = -i * (0.5 * dt * h);
        chi.iter_mut().zip(&source).for_each(|(c, s)| *c += f * s);
    };
    let total = |chi: &[Complex64]| -> Vec<Complex64> { phi.iter().zip(chi).map(|(p, c)| p + c).collect() };

    let mut samples = Vec::with_capacity(steps / opts.stride + 2);
    let mut fields = Vec::new();
    let mut record = |t: f64, chi: &[Complex64], samples: &mut Vec<CondensateSample>| -> Result<()> {
        let snap = field_snapshot(&sp, &total(chi), m, dv_dh, t);
        snap.validate()?;
        samples.push(CondensateSample { time: t, strain: w.strain(t), snapshot: snap });
        if opts.record_fields {
            fields.push((t, chi.to_vec()));
        }
        Ok(())
    };
    record(0.0, &chi, &mut samples)?;

    for n in 0..steps {
        let t = n as f64 * dt;
        add_source(&mut chi, w.strain(t));
        chi.iter_mut().zip(&local).for_each(|(c, l)| *c = l.apply(*c));
        sp.apply_phase_in_place(&mut chi, |k| -dt * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * m));
        chi.iter_mut().zip(&local).for_each(|(c, l)| *c = l.apply(*c));
        add_source(&mut chi, w.strain(t + dt));
        if (n + 1) % opts.stride == 0 || n + 1 == steps {
            let norm = grid.norm(&chi);
            if !norm.is_finite() || norm > atoms {
                return Err(Error::Numerical(format!(
                    "source overflow at t = {}: perturbation norm {norm:e} exceeds the condensate",
                    t + dt
                )));
            }
            record(t + dt, &chi, &mut samples)?;
        }
    }
    Ok(CondensateRun { samples, fields, final_field: chi })
}
