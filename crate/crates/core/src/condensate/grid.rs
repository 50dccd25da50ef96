//! Uniform grids and spectral differentiation.
//!
//! Fields are stored flattened in row-major order with axis 0 = x slowest.
//! Periodic boxes use the grid directly as one FFT period. Hard-wall boxes
//! hold only interior points; spectral operators act on the odd extension
//! across both walls (a sine series), so the field vanishes at the walls.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    HardWall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub dimensions: usize,
    pub points_per_axis: usize,
    /// Full box length along every axis.
    pub extent: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(dimensions: usize, points_per_axis: usize, extent: f64, boundary: Boundary) -> Result<Self> {
        let g = Self { dimensions, points_per_axis, extent, boundary };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dimensions) {
            return Err(Error::invalid(format!("grid dimension must be 1, 2 or 3, got {}", self.dimensions)));
        }
        if self.points_per_axis < 4 || !self.points_per_axis.is_power_of_two() {
            return Err(Error::invalid(format!(
                "points per axis must be a power of two >= 4, got {}",
                self.points_per_axis
            )));
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::invalid("grid extent must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimensions as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.extent / self.points_per_axis as f64,
            Boundary::HardWall => self.extent / (self.points_per_axis + 1) as f64,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimensions as i32)
    }

    /// Coordinates along one axis, centred on the origin.
    pub fn axis(&self) -> Vec<f64> {
        let d = self.spacing();
        let half = 0.5 * self.extent;
        let shift = match self.boundary {
            Boundary::Periodic => 0.0,
            Boundary::HardWall => d,
        };
        (0..self.points_per_axis).map(|i| -half + shift + i as f64 * d).collect()
    }

    /// Position of every point, padded to three components.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let ax = self.axis();
        let n = self.points_per_axis;
        (0..self.len())
            .map(|idx| {
                let mut r = [0.0; 3];
                let mut rem = idx;
                for d in (0..self.dimensions).rev() {
                    r[d] = ax[rem % n];
                    rem /= n;
                }
                r
            })
            .collect()
    }

    /// `Σ f dV`.
    pub fn integrate(&self, f: impl Iterator<Item = f64>) -> f64 {
        f.sum::<f64>() * self.cell_volume()
    }

    pub fn norm(&self, psi: &[Complex64]) -> f64 {
        self.integrate(psi.iter().map(|c| c.norm_sqr()))
    }

    /// `Re ∫ a* b dV`.
    pub fn inner_re(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        self.integrate(a.iter().zip(b).map(|(x, y)| (x.conj() * y).re))
    }
}

/// FFT plans and wavenumbers for one grid.
pub struct Spectral {
    grid: Grid,
    /// FFT length per axis (interior points for periodic, `2(n+1)` for walls).
    len: usize,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).field("len", &self.len).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Result<Self> {
        grid.validate()?;
        let n = grid.points_per_axis;
        let (len, period) = match grid.boundary {
            Boundary::Periodic => (n, grid.extent),
            Boundary::HardWall => (2 * (n + 1), 2.0 * grid.extent),
        };
        let wavenumbers = (0..len)
            .map(|i| {
                let j = if i <= len / 2 { i as f64 } else { i as f64 - len as f64 };
                std::f64::consts::TAU * j / period
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid: *grid,
            len,
            wavenumbers,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn ext_total(&self) -> usize {
        self.len.pow(self.grid.dimensions as u32)
    }

    /// Wavevector of an index in extended storage.
    fn k_of(&self, idx: usize) -> [f64; 3] {
        let mut k = [0.0; 3];
        let mut rem = idx;
        for d in (0..self.grid.dimensions).rev() {
            k[d] = self.wavenumbers[rem % self.len];
            rem /= self.len;
        }
        k
    }

    fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        let stride = self.len.pow((self.grid.dimensions - 1 - axis) as u32);
        (idx / stride) % self.len == self.len / 2
    }

    fn embed(&self, field: &[Complex64]) -> Vec<Complex64> {
        match self.grid.boundary {
            Boundary::Periodic => field.to_vec(),
            Boundary::HardWall => {
                let n = self.grid.points_per_axis;
                let dims = self.grid.dimensions;
                let mut out = vec![Complex64::new(0.0, 0.0); self.ext_total()];
                for (idx, v) in field.iter().enumerate() {
                    // every combination of reflections along the axes
                    let mut coords = [0usize; 3];
                    let mut rem = idx;
                    for d in (0..dims).rev() {
                        coords[d] = rem % n;
                        rem /= n;
                    }
                    for mask in 0..(1usize << dims) {
                        let mut e = 0usize;
                        let mut sign = 1.0;
                        for (d, &c) in coords.iter().enumerate().take(dims) {
                            let pos = if mask & (1 << d) == 0 {
                                c + 1
                            } else {
                                sign = -sign;
                                self.len - 1 - c
                            };
                            e = e * self.len + pos;
                        }
                        out[e] = v * sign;
                    }
                }
                out
            }
        }
    }

    fn restrict(&self, ext: Vec<Complex64>) -> Vec<Complex64> {
        match self.grid.boundary {
            Boundary::Periodic => ext,
            Boundary::HardWall => {
                let n = self.grid.points_per_axis;
                let dims = self.grid.dimensions;
                (0..self.grid.len())
                    .map(|idx| {
                        let mut rem = idx;
                        let mut coords = [0usize; 3];
                        for d in (0..dims).rev() {
                            coords[d] = rem % n;
                            rem /= n;
                        }
                        let e = coords.iter().take(dims).fold(0usize, |acc, &c| acc * self.len + c + 1);
                        ext[e]
                    })
                    .collect()
            }
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let dims = self.grid.dimensions;
        let n = self.len;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..dims {
            let stride = n.pow((dims - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    let base = start + off;
                    for (i, l) in line.iter_mut().enumerate() {
                        *l = data[base + i * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (i, l) in line.iter().enumerate() {
                        data[base + i * stride] = *l;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / data.len() as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Multiplies the spectrum by `symbol(k)`.
    pub fn apply(&self, field: &[Complex64], symbol: impl Fn([f64; 3]) -> Complex64) -> Vec<Complex64> {
        let mut ext = self.embed(field);
        self.transform(&mut ext, false);
        for (idx, v) in ext.iter_mut().enumerate() {
            *v *= symbol(self.k_of(idx));
        }
        self.transform(&mut ext, true);
        self.restrict(ext)
    }

    /// Multiplies the spectrum by a real symbol, in place.
    pub fn apply_real_in_place(&self, field: &mut [Complex64], symbol: impl Fn([f64; 3]) -> f64) {
        let out = self.apply(field, |k| Complex64::new(symbol(k), 0.0));
        field.copy_from_slice(&out);
    }

    /// Multiplies the spectrum by a phase `exp(i θ(k))`, in place.
    pub fn apply_phase_in_place(&self, field: &mut [Complex64], theta: impl Fn([f64; 3]) -> f64) {
        let out = self.apply(field, |k| Complex64::from_polar(1.0, theta(k)));
        field.copy_from_slice(&out);
    }

    /// `∂_axis field`, with the Nyquist mode of that axis dropped.
    pub fn gradient(&self, field: &[Complex64], axis: usize) -> Vec<Complex64> {
        let mut ext = self.embed(field);
        self.transform(&mut ext, false);
        for (idx, v) in ext.iter_mut().enumerate() {
            if self.is_nyquist(idx, axis) {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, self.k_of(idx)[axis]);
            }
        }
        self.transform(&mut ext, true);
        self.restrict(ext)
    }

    /// `∂²_axis field`.
    pub fn second_derivative(&self, field: &[Complex64], axis: usize) -> Vec<Complex64> {
        self.apply(field, |k| Complex64::new(-k[axis] * k[axis], 0.0))
    }

    /// `−∇² field / 2m`.
    pub fn kinetic(&self, field: &[Complex64], mass: f64) -> Vec<Complex64> {
        self.apply(field, |k| Complex64::new((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * mass), 0.0))
    }

    /// `∫ |∂_a ψ|² / 2m dV` for each axis (zero beyond the grid dimension).
    pub fn kinetic_parts(&self, psi: &[Complex64], mass: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (axis, o) in out.iter_mut().enumerate().take(self.grid.dimensions) {
            let g = self.gradient(psi, axis);
            *o = self.grid.integrate(g.iter().map(|c| c.norm_sqr())) / (2.0 * mass);
        }
        out
    }

    /// Evaluates the trigonometric interpolant of `field` at arbitrary points
    /// (periodic grids only). Nyquist modes are dropped, which is exact for
    /// band-limited fields.
    pub fn interpolate(&self, field: &[Complex64], points: &[[f64; 3]]) -> Result<Vec<Complex64>> {
        if self.grid.boundary != Boundary::Periodic {
            return Err(Error::invalid("spectral interpolation needs a periodic grid"));
        }
        let mut spec = field.to_vec();
        self.transform(&mut spec, false);
        let n = self.len;
        let dims = self.grid.dimensions;
        let x0 = -0.5 * self.grid.extent;
        let total = spec.len() as f64;
        for (idx, v) in spec.iter_mut().enumerate() {
            if (0..dims).any(|a| self.is_nyquist(idx, a)) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Ok(points
            .iter()
            .map(|p| {
                let phases: Vec<Vec<Complex64>> = (0..dims)
                    .map(|d| (0..n).map(|i| Complex64::from_polar(1.0, self.wavenumbers[i] * (p[d] - x0))).collect())
                    .collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, c) in spec.iter().enumerate() {
                    let mut rem = idx;
                    let mut w = Complex64::new(1.0, 0.0);
                    for ph in phases.iter().rev() {
                        w *= ph[rem % n];
                        rem /= n;
                    }
                    acc += c * w;
                }
                acc / total
            })
            .collect())
    }
}
