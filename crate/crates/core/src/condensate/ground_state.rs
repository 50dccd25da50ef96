//! Gross–Pitaevskii ground states.
//!
//! Units `ħ = 1`. The energy `∫ ψ*(T + V)ψ + g/2 ∫|ψ|⁴` is minimised on the
//! sphere `∫|ψ|² = N` by preconditioned nonlinear conjugate gradients. The
//! preconditioner combines a kinetic and a potential part,
//! `P_V^{1/2} (α − ∇²/2m)^{-1} P_V^{1/2}`, so that neither the box corners
//! nor the grid cutoff limit the step. The line search is a secant on the
//! directional derivative, which stays accurate once energy differences
//! drop below rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, Spectral};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensateField {
    pub grid: Grid,
    pub psi: Vec<Complex64>,
    pub potential: Vec<f64>,
    pub mass: f64,
    pub coupling: f64,
    pub chemical_potential: f64,
    /// `‖Hψ − μψ‖ / ‖μψ‖` at exit.
    pub residual: f64,
    pub iterations: usize,
}

impl CondensateField {
    pub fn atoms(&self) -> f64 {
        self.grid.norm(&self.psi)
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn peak_density(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
    }

    /// `1 / sqrt(2 m g ρ_peak)`.
    pub fn healing_length(&self) -> f64 {
        1.0 / (2.0 * self.mass * self.coupling * self.peak_density()).sqrt()
    }

    /// Largest density on the outermost grid layer, relative to the peak.
    pub fn boundary_density_ratio(&self) -> f64 {
        let n = self.grid.points_per_axis;
        let dims = self.grid.dimensions;
        let mut edge = 0.0f64;
        for (idx, c) in self.psi.iter().enumerate() {
            let mut rem = idx;
            let mut on_edge = false;
            for _ in 0..dims {
                let i = rem % n;
                rem /= n;
                on_edge |= i == 0 || i == n - 1;
            }
            if on_edge {
                edge = edge.max(c.norm_sqr());
            }
        }
        edge / self.peak_density()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStateOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 5000 }
    }
}

struct Problem<'a> {
    sp: &'a Spectral,
    potential: &'a [f64],
    mass: f64,
    coupling: f64,
    atoms: f64,
}

impl Problem<'_> {
    fn h_apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.sp.kinetic(psi, self.mass);
        for ((o, p), v) in out.iter_mut().zip(psi).zip(self.potential) {
            *o += p * (v + self.coupling * p.norm_sqr());
        }
        out
    }

    fn normalise(&self, psi: &mut [Complex64]) {
        let s = (self.atoms / self.sp.grid().norm(psi)).sqrt();
        psi.iter_mut().for_each(|c| *c *= s);
    }

    /// Residual `Hψ − μψ` and `μ`.
    fn residual(&self, psi: &[Complex64]) -> (Vec<Complex64>, f64) {
        let g = self.sp.grid();
        let hpsi = self.h_apply(psi);
        let mu = g.inner_re(psi, &hpsi) / g.norm(psi);
        let r = hpsi.iter().zip(psi).map(|(h, p)| h - p * mu).collect();
        (r, mu)
    }

    fn precondition(&self, psi: &[Complex64], v: &[Complex64], alpha: f64) -> Vec<Complex64> {
        let pv: Vec<f64> = psi
            .iter()
            .zip(self.potential)
            .map(|(p, pot)| (alpha / (alpha + pot.max(0.0) + self.coupling * p.norm_sqr())).sqrt())
            .collect();
        let mut w: Vec<Complex64> = v.iter().zip(&pv).map(|(a, s)| a * s).collect();
        let m = self.mass;
        self.sp.apply_real_in_place(&mut w, |k| alpha / (alpha + (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * m)));
        w.iter_mut().zip(&pv).for_each(|(a, s)| *a *= s);
        w
    }

    /// Preconditioned gradient projected onto the tangent space at `psi`.
    fn direction(&self, psi: &[Complex64], r: &[Complex64], alpha: f64) -> Vec<Complex64> {
        let g = self.sp.grid();
        let pr = self.precondition(psi, r, alpha);
        let ppsi = self.precondition(psi, psi, alpha);
        let c = g.inner_re(psi, &pr) / g.inner_re(psi, &ppsi);
        pr.iter().zip(&ppsi).map(|(a, b)| a - b * c).collect()
    }

    /// Point on the sphere along `ψ + τ d`.
    fn retract(&self, psi: &[Complex64], d: &[Complex64], tau: f64) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi.iter().zip(d).map(|(p, q)| p + q * tau).collect();
        self.normalise(&mut out);
        out
    }
}

/// Ground state in the potential `potential` (sampled on `grid`), starting
/// from a Gaussian or from `initial` when given.
pub fn ground_state(
    grid: &Grid,
    potential: &[f64],
    mass: f64,
    coupling: f64,
    atoms: f64,
    initial: Option<&[Complex64]>,
    opts: &GroundStateOptions,
) -> Result<CondensateField> {
    if potential.len() != grid.len() {
        return Err(Error::invalid("potential does not match the grid"));
    }
    if !(mass > 0.0 && atoms > 0.0 && coupling >= 0.0) {
        return Err(Error::invalid("mass and atom number must be positive and coupling non-negative"));
    }
    let sp = Spectral::new(grid)?;
    let prob = Problem { sp: &sp, potential, mass, coupling, atoms };
    let mut psi: Vec<Complex64> = match initial {
        Some(p) if p.len() == grid.len() => p.to_vec(),
        Some(_) => return Err(Error::invalid("initial state does not match the grid")),
        None => {
            let w = 0.15 * grid.extent;
            grid.positions()
                .iter()
                .map(|r| Complex64::new((-(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]) / (2.0 * w * w)).exp(), 0.0))
                .collect()
        }
    };
    prob.normalise(&mut psi);

    let g = *grid;
    let (mut r, mut mu) = prob.residual(&psi);
    let alpha = mu.abs().max(1e-3 / (mass * grid.spacing().powi(2)));
    let mut grad = prob.direction(&psi, &r, alpha);
    let mut d: Vec<Complex64> = grad.iter().map(|c| -c).collect();
    let mut prev_dot = g.inner_re(&r, &grad);
    let mut tau = 0.5;
    let rel = |r: &[Complex64], mu: f64, psi: &[Complex64]| (g.norm(r) / (mu * mu * g.norm(psi)).max(1e-300)).sqrt();
    let mut res = rel(&r, mu, &psi);

    let mut it = 0;
    while res > opts.tolerance {
        if it >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations: it, residual: res });
        }
        it += 1;
        let mut slope0 = g.inner_re(&r, &d);
        if slope0 >= 0.0 {
            d = grad.iter().map(|c| -c).collect();
            slope0 = g.inner_re(&r, &d);
        }
        // secant on the directional derivative
        let trial = prob.retract(&psi, &d, tau);
        let (r_t, _) = prob.residual(&trial);
        let slope_t = g.inner_re(&r_t, &d);
        let curvature = (slope_t - slope0) / tau;
        let step = if curvature > 0.0 { (-slope0 / curvature).min(4.0 * tau) } else { 2.0 * tau };
        psi = prob.retract(&psi, &d, step);
        tau = step.clamp(1e-6, 10.0);

        let (r_new, mu_new) = prob.residual(&psi);
        r = r_new;
        mu = mu_new;
        let grad_new = prob.direction(&psi, &r, alpha);
        let dot = g.inner_re(&r, &grad_new);
        let cross = g.inner_re(&r, &grad);
        let beta = ((dot - cross) / prev_dot).max(0.0);
        d = grad_new.iter().zip(&d).map(|(gn, dd)| -gn + dd * beta).collect();
        grad = grad_new;
        prev_dot = dot;
        res = rel(&r, mu, &psi);
        if !res.is_finite() {
            return Err(Error::Numerical("ground-state iteration diverged".into()));
        }
    }
    // fix the global phase so that the peak is real and positive
    let peak = psi.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())).unwrap_or_default();
    if peak.norm() > 0.0 {
        let ph = peak.conj() / peak.norm();
        psi.iter_mut().for_each(|c| *c *= ph);
    }
    Ok(CondensateField {
        grid: *grid,
        psi,
        potential: potential.to_vec(),
        mass,
        coupling,
        chemical_potential: mu,
        residual: res,
        iterations: it,
    })
}

/// Uniform condensate on a periodic box with no trap.
pub fn homogeneous(grid: &Grid, mass: f64, coupling: f64, density: f64) -> Result<CondensateField> {
    if !(mass > 0.0 && density > 0.0 && coupling >= 0.0) {
        return Err(Error::invalid("mass and density must be positive and coupling non-negative"));
    }
    let amp = density.sqrt();
    Ok(CondensateField {
        grid: *grid,
        psi: vec![Complex64::new(amp, 0.0); grid.len()],
        potential: vec![0.0; grid.len()],
        mass,
        coupling,
        chemical_potential: coupling * density,
        residual: 0.0,
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condensate::grid::Boundary;

    fn harmonic(grid: &Grid) -> Vec<f64> {
        grid.positions().iter().map(|r| 0.5 * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2])).collect()
    }

    #[test]
    fn non_interacting_oscillator() {
        let grid = Grid::new(2, 64, 16.0, Boundary::Periodic).unwrap();
        let v = harmonic(&grid);
        let f = ground_state(&grid, &v, 1.0, 0.0, 1.0, None, &GroundStateOptions::default()).unwrap();
        assert!((f.chemical_potential - 1.0).abs() < 1e-9, "{}", f.chemical_potential);
        assert!((f.atoms() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interacting_state_is_stationary() {
        let grid = Grid::new(2, 64, 20.0, Boundary::Periodic).unwrap();
        let v = harmonic(&grid);
        let f = ground_state(&grid, &v, 1.0, 1.0, 100.0, None, &GroundStateOptions::default()).unwrap();
        assert!(f.residual < 1e-10);
        // Thomas–Fermi in 2-D: μ = sqrt(g N / π) for ω = m = 1
        let tf = (100.0f64 / std::f64::consts::PI).sqrt();
        assert!((f.chemical_potential - tf).abs() / tf < 0.1, "{}", f.chemical_potential);
        assert!(f.boundary_density_ratio() < 1e-12);
    }

    #[test]
    fn hard_wall_box() {
        // lowest mode of a 1-D box: μ = π² / (2 L²)
        let grid = Grid::new(1, 64, 2.0, Boundary::HardWall).unwrap();
        let v = vec![0.0; grid.len()];
        let f = ground_state(&grid, &v, 1.0, 0.0, 1.0, None, &GroundStateOptions::default()).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 8.0;
        assert!((f.chemical_potential - exact).abs() < 1e-9);
    }
}
