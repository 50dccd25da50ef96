//! Angular (`e^{imθ}`) content of 2-D fields.
//!
//! The field is interpolated spectrally onto polar rings and Fourier
//! transformed in `θ`; ring powers are weighted by `r dr`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Spectral;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    /// `m = −m_max ..= m_max`.
    pub m: Vec<i32>,
    pub power: Vec<f64>,
}

impl AngularSpectrum {
    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn power_at(&self, m: i32) -> f64 {
        self.m.iter().position(|x| *x == m).map(|i| self.power[i]).unwrap_or(0.0)
    }

    /// Share of the power outside the listed `m`.
    pub fn fraction_outside(&self, allowed: &[i32]) -> f64 {
        let outside: f64 = self.m.iter().zip(&self.power).filter(|(m, _)| !allowed.contains(m)).map(|(_, p)| p).sum();
        outside / self.total()
    }
}

pub fn angular_power(
    sp: &Spectral,
    field: &[Complex64],
    r_max: f64,
    rings: usize,
    m_max: i32,
) -> Result<AngularSpectrum> {
    if sp.grid().dimensions != 2 {
        return Err(Error::invalid("angular decomposition needs a 2-D grid"));
    }
    if !(r_max > 0.0 && r_max <= 0.5 * sp.grid().extent) || rings == 0 || m_max < 1 {
        return Err(Error::invalid("radius must lie inside the box and rings, m_max positive"));
    }
    let n_theta = (4 * m_max as usize + 4).next_power_of_two().max(64);
    let dr = r_max / rings as f64;
    let mut points = Vec::with_capacity(rings * n_theta);
    for j in 0..rings {
        let r = (j as f64 + 0.5) * dr;
        for k in 0..n_theta {
            let th = std::f64::consts::TAU * k as f64 / n_theta as f64;
            points.push([r * th.cos(), r * th.sin(), 0.0]);
        }
    }
    let values = sp.interpolate(field, &points)?;
    let ms: Vec<i32> = (-m_max..=m_max).collect();
    let mut power = vec![0.0; ms.len()];
    for j in 0..rings {
        let r = (j as f64 + 0.5) * dr;
        let ring = &values[j * n_theta..(j + 1) * n_theta];
        for (p, &m) in power.iter_mut().zip(&ms) {
            let c: Complex64 = ring
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -(m as f64) * std::f64::consts::TAU * k as f64 / n_theta as f64))
                .sum::<Complex64>()
                / n_theta as f64;
            *p += c.norm_sqr() * r * dr;
        }
    }
    Ok(AngularSpectrum { m: ms, power })
}
