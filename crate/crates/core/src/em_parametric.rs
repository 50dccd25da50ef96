//! Trap laser modes as parametric oscillators.
//!
//! A single Fourier mode with wavevector `K` sees the dispersion
//! `Ω² = (1−h)Kx² + (1+h)Ky² + Kz²`. For polarization along a coordinate
//! axis the amplitude obeys `d/dt (g Ȧ) = −k² A` with
//!
//! | axis | `g`   | `k²`                    |
//! |------|-------|-------------------------|
//! | z    | 1     | `(1−h)Kx² + (1+h)Ky²`   |
//! | x    | `1−h` | `Ky² + (1−h)Kz²`        |
//! | y    | `1+h` | `Kx² + (1+h)Kz²`        |
//!
//! and conserves `W = g (A* Ȧ − Ȧ* A)`, so in the adiabatic regime
//! `|A| ∝ 1/√(gΩ)`. General polarizations follow
//! `d/dt (γ Ȧ) = −[(Kᵀγ K) γ A − γ K (Kᵀγ A)]` with `γ = diag(1−h, 1+h, 1)`.
//!
//! Both systems are linear Hamiltonian, and are stepped with implicit
//! midpoint steps in a fourth-order triple-jump composition. Each step is a
//! symplectic linear map, so the Wronskian is kept to rounding error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::step_count;
use crate::waveform::GwWaveform;

/// Below this `Ω/ω` the adiabatic regime flag is raised.
pub const WKB_RATIO: f64 = 100.0;
/// `|ζ|` above which a factor is flagged as suspicious.
pub const ZETA_FLAG: f64 = 100.0;
const STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Coefficient of `h` in the diagonal inverse metric `γ = diag(1−h, 1+h, 1)`.
    pub fn metric_coefficient(self) -> f64 {
        match self {
            Axis::X => -1.0,
            Axis::Y => 1.0,
            Axis::Z => 0.0,
        }
    }

    pub fn unit(self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.index()] = 1.0;
        e
    }
}

pub fn dispersion(k: [f64; 3], h: f64) -> f64 {
    (1.0 - h) * k[0] * k[0] + (1.0 + h) * k[1] * k[1] + k[2] * k[2]
}

/// `(g, k²)` of the axis-polarized mode equation.
fn mode_coefficients(k: [f64; 3], axis: Axis, h: f64) -> (f64, f64) {
    let [kx, ky, kz] = [k[0] * k[0], k[1] * k[1], k[2] * k[2]];
    match axis {
        Axis::Z => (1.0, (1.0 - h) * kx + (1.0 + h) * ky),
        Axis::X => (1.0 - h, ky + (1.0 - h) * kz),
        Axis::Y => (1.0 + h, kx + (1.0 + h) * kz),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmMode {
    pub wavevector: [f64; 3],
    pub polarization: Axis,
    pub amplitude: Complex64,
    pub amplitude_rate: Complex64,
}

impl EmMode {
    pub fn new(wavevector: [f64; 3], polarization: Axis, amplitude: Complex64, amplitude_rate: Complex64) -> Result<Self> {
        if wavevector.iter().any(|c| !c.is_finite()) || wavevector.iter().all(|&c| c == 0.0) {
            return Err(Error::invalid("wavevector must be finite and nonzero"));
        }
        if wavevector[polarization.index()] != 0.0 {
            return Err(Error::invalid("polarization must be orthogonal to the wavevector"));
        }
        if !(amplitude.norm_sqr().is_finite() && amplitude_rate.norm_sqr().is_finite()) {
            return Err(Error::invalid("mode amplitude must be finite"));
        }
        Ok(Self { wavevector, polarization, amplitude, amplitude_rate })
    }

    /// Positive-frequency adiabatic mode at strain `h`, normalized to `W = −2i`.
    pub fn adiabatic(wavevector: [f64; 3], polarization: Axis, h: f64) -> Result<Self> {
        let (g, k2) = mode_coefficients(wavevector, polarization, h);
        let omega = (k2 / g).sqrt();
        let a = Complex64::new((g * omega).powf(-0.5), 0.0);
        Self::new(wavevector, polarization, a, Complex64::new(0.0, -omega) * a)
    }

    /// Instantaneous mode frequency `√(k²/g)`.
    pub fn frequency(&self, h: f64) -> f64 {
        let (g, k2) = mode_coefficients(self.wavevector, self.polarization, h);
        (k2 / g).sqrt()
    }

    pub fn metric_factor(&self, h: f64) -> f64 {
        mode_coefficients(self.wavevector, self.polarization, h).0
    }
}

pub fn wronskian(mode: &EmMode, h: f64) -> Complex64 {
    let a = mode.amplitude;
    let ad = mode.amplitude_rate;
    mode.metric_factor(h) * (a.conj() * ad - ad.conj() * a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSample {
    pub time: f64,
    pub strain: f64,
    pub mode: EmMode,
    pub wronskian: Complex64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    pub samples: Vec<ModeSample>,
    /// True when `Ω/ω < WKB_RATIO`.
    pub outside_adiabatic_regime: bool,
}

impl ModeRun {
    pub fn max_wronskian_deviation(&self) -> f64 {
        let w0 = self.samples[0].wronskian;
        self.samples.iter().map(|s| (s.wronskian - w0).norm() / w0.norm()).fold(0.0, f64::max)
    }

    /// Largest `| |A| √(gΩ) / (|A| √(gΩ))(0) − 1 |`: the departure from the
    /// adiabatic amplitude law.
    pub fn max_adiabatic_deviation(&self) -> f64 {
        let inv = |s: &ModeSample| s.mode.amplitude.norm() * (s.mode.metric_factor(s.strain) * s.frequency).sqrt();
        let i0 = inv(&self.samples[0]);
        self.samples.iter().map(|s| (inv(s) / i0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

const TRIPLE_JUMP: [f64; 3] = {
    // 1/(2 − 2^{1/3}) and −2^{1/3}/(2 − 2^{1/3})
    let c1 = 1.351_207_191_959_657_8;
    let c2 = -1.702_414_383_919_315_3;
    [c1, c2, c1]
};

/// Implicit midpoint for `q̇ = π/g`, `π̇ = −k² q` with coefficients frozen
/// at the step midpoint.
fn midpoint_scalar(q: Complex64, p: Complex64, g: f64, k2: f64, dt: f64) -> (Complex64, Complex64) {
    let a = 0.5 * dt / g;
    let b = 0.5 * dt * k2;
    let det = 1.0 + a * b;
    let rq = q + a * p;
    let rp = p - b * q;
    ((rq + a * rp) / det, (rp - b * rq) / det)
}

/// Axis-polarized mode under the wave, integrated over `[0, t_end]`. Samples
/// every `stride` steps plus the final one.
pub fn evolve_mode(mode: &EmMode, w: &GwWaveform, dt: f64, t_end: f64, stride: usize) -> Result<ModeRun> {
    let omega0 = mode.frequency(0.0);
    let limit = std::f64::consts::TAU / (STEPS_PER_PERIOD * omega0);
    if dt > limit {
        return Err(Error::StepSize { dt, limit, reason: "fewer than 50 steps per mode period" });
    }
    if stride == 0 {
        return Err(Error::invalid("output stride must be >= 1"));
    }
    let n = step_count(t_end, dt)?;
    let outside_adiabatic_regime = omega0 / w.angular_frequency() < WKB_RATIO;
    let (k, axis) = (mode.wavevector, mode.polarization);

    let sample = |t: f64, q: Complex64, p: Complex64| {
        let h = w.strain(t);
        let (g, k2) = mode_coefficients(k, axis, h);
        let m = EmMode { amplitude: q, amplitude_rate: p / g, ..*mode };
        ModeSample { time: t, strain: h, mode: m, wronskian: q.conj() * p - p.conj() * q, frequency: (k2 / g).sqrt() }
    };

    let mut q = mode.amplitude;
    let mut p = mode.metric_factor(w.strain(0.0)) * mode.amplitude_rate;
    let mut samples = Vec::with_capacity(n / stride + 2);
    samples.push(sample(0.0, q, p));
    for i in 0..n {
        let mut t = i as f64 * dt;
        for c in TRIPLE_JUMP {
            let sub = c * dt;
            let (g, k2) = mode_coefficients(k, axis, w.strain(t + 0.5 * sub));
            (q, p) = midpoint_scalar(q, p, g, k2, sub);
            t += sub;
        }
        if (i + 1) % stride == 0 || i + 1 == n {
            samples.push(sample((i + 1) as f64 * dt, q, p));
        }
    }
    Ok(ModeRun { samples, outside_adiabatic_regime })
}

type Mat3 = [[f64; 3]; 3];
type CVec3 = [Complex64; 3];

fn inverse3(m: &Mat3) -> Result<Mat3> {
    let c = |r: usize, s: usize| {
        let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
        let (s1, s2) = ((s + 1) % 3, (s + 2) % 3);
        m[r1][s1] * m[r2][s2] - m[r1][s2] * m[r2][s1]
    };
    let det = m[0][0] * c(0, 0) + m[0][1] * c(0, 1) + m[0][2] * c(0, 2);
    if det.abs() < 1e-300 {
        return Err(Error::Numerical("singular 3x3 system".into()));
    }
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (s, v) in row.iter_mut().enumerate() {
            *v = c(s, r) / det;
        }
    }
    Ok(inv)
}

fn apply(m: &Mat3, v: &CVec3) -> CVec3 {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (r, o) in out.iter_mut().enumerate() {
        *o = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
    }
    out
}

fn gamma_diag(h: f64) -> [f64; 3] {
    [1.0 - h, 1.0 + h, 1.0]
}

/// `M = (Kᵀγ K) γ − γ K Kᵀ γ`.
fn stiffness(k: [f64; 3], h: f64) -> Mat3 {
    let g = gamma_diag(h);
    let s: f64 = (0..3).map(|i| g[i] * k[i] * k[i]).sum();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = -g[i] * k[i] * g[j] * k[j];
        }
        m[i][i] += s * g[i];
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralModeReport {
    pub final_amplitude: CVec3,
    /// Largest angle (rad) between `A(t)` and `A(0)`.
    pub max_polarization_angle: f64,
    /// Largest `|Kᵀ γ Ȧ| / (|K| |γ Ȧ|)`.
    pub max_transversality_residual: f64,
    pub max_wronskian_deviation: f64,
}

fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

fn cnorm(a: &CVec3) -> f64 {
    cdot(a, a).re.sqrt()
}

/// Polarization drift of a mode with arbitrary wavevector and transverse
/// initial polarization `pol`, started in its adiabatic positive-frequency
/// state at `h = 0`.
pub fn polarization_drift(k: [f64; 3], pol: [f64; 3], w: &GwWaveform, dt: f64, t_end: f64) -> Result<GeneralModeReport> {
    let kk: f64 = k.iter().map(|c| c * c).sum();
    let dot: f64 = (0..3).map(|i| k[i] * pol[i]).sum();
    let pn: f64 = pol.iter().map(|c| c * c).sum::<f64>().sqrt();
    if kk == 0.0 || pn == 0.0 || dot.abs() > 1e-12 * kk.sqrt() * pn {
        return Err(Error::invalid("polarization must be a nonzero vector orthogonal to the wavevector"));
    }
    let omega = kk.sqrt();
    let limit = std::f64::consts::TAU / (STEPS_PER_PERIOD * omega);
    if dt > limit {
        return Err(Error::StepSize { dt, limit, reason: "fewer than 50 steps per mode period" });
    }
    let n = step_count(t_end, dt)?;
    let amp = (omega).powf(-0.5) / pn;
    let mut a: CVec3 = pol.map(|c| Complex64::new(c * amp, 0.0));
    let g0 = gamma_diag(w.strain(0.0));
    let mut p: CVec3 = [0, 1, 2].map(|i| g0[i] * Complex64::new(0.0, -omega) * a[i]);
    let a0 = a;
    let wr = |a: &CVec3, p: &CVec3| cdot(a, p) - cdot(p, a);
    let w0 = wr(&a, &p);
    let mut report = GeneralModeReport {
        final_amplitude: a,
        max_polarization_angle: 0.0,
        max_transversality_residual: 0.0,
        max_wronskian_deviation: 0.0,
    };
    let kn = omega;
    for i in 0..n {
        let mut t = i as f64 * dt;
        for c in TRIPLE_JUMP {
            let sub = c * dt;
            let h = w.strain(t + 0.5 * sub);
            let g = gamma_diag(h);
            let ginv = [1.0 / g[0], 1.0 / g[1], 1.0 / g[2]];
            let m = stiffness(k, h);
            // (I + sub²/4 γ⁻¹M) A1 = A0 + sub γ⁻¹ P0 − sub²/4 γ⁻¹ M A0
            let q = 0.25 * sub * sub;
            let mut lhs = [[0.0; 3]; 3];
            for r in 0..3 {
                for s in 0..3 {
                    lhs[r][s] = q * ginv[r] * m[r][s] + if r == s { 1.0 } else { 0.0 };
                }
            }
            let ma = apply(&m, &a);
            let rhs: CVec3 = [0, 1, 2].map(|r| a[r] + sub * ginv[r] * p[r] - q * ginv[r] * ma[r]);
            let a1 = apply(&inverse3(&lhs)?, &rhs);
            let mid: CVec3 = [0, 1, 2].map(|r| a[r] + a1[r]);
            let mm = apply(&m, &mid);
            p = [0, 1, 2].map(|r| p[r] - 0.5 * sub * mm[r]);
            a = a1;
            t += sub;
        }
        let cosang = (cdot(&a0, &a).norm() / (cnorm(&a0) * cnorm(&a))).min(1.0);
        report.max_polarization_angle = report.max_polarization_angle.max(cosang.acos());
        let kp = (0..3).map(|r| k[r] * p[r]).sum::<Complex64>().norm() / (kn * cnorm(&p));
        report.max_transversality_residual = report.max_transversality_residual.max(kp);
        report.max_wronskian_deviation = report.max_wronskian_deviation.max((wr(&a, &p) - w0).norm() / w0.norm());
    }
    report.final_amplitude = a;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaSource {
    FrequencyShift,
    AmplitudeScaling,
    MirrorBoundary,
    Polarizability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaFactor {
    pub zeta: f64,
    pub source: ZetaSource,
    /// Set when `|zeta| > ZETA_FLAG`.
    #[serde(default)]
    pub flagged: bool,
}

impl ZetaFactor {
    pub fn new(zeta: f64, source: ZetaSource) -> Self {
        Self { zeta, source, flagged: zeta.abs() > ZETA_FLAG }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beam {
    pub propagation: Axis,
    pub polarization: Axis,
    /// Laser angular frequency `Ω`.
    pub frequency: f64,
    /// Atomic resonance `Ω_res`.
    pub resonance: f64,
}

/// Frequency, amplitude and polarizability factors of one axis-aligned beam.
///
/// * frequency: `Ω ∝ √(1 + c h)` along the propagation axis, `ζ = c/2`;
/// * amplitude: `|A| ∝ 1/√(gΩ)`, `ζ = −(ζ_g + ζ_freq)/2`;
/// * polarizability `∝ 1/(Ω² − Ω_res²)`, `ζ = −2 ζ_freq Ω²/(Ω² − Ω_res²)`.
pub fn trap_zeta_factors(beam: &Beam) -> Result<Vec<ZetaFactor>> {
    if beam.propagation == beam.polarization {
        return Err(Error::invalid("beam polarization must be transverse to its propagation"));
    }
    if !(beam.frequency > 0.0 && beam.resonance >= 0.0) {
        return Err(Error::invalid("beam frequencies must be positive"));
    }
    let detuning = beam.frequency - beam.resonance;
    if detuning == 0.0 {
        return Err(Error::invalid("zero detuning: polarizability is singular on resonance"));
    }
    let zeta_freq = 0.5 * beam.propagation.metric_coefficient();
    let zeta_g = beam.polarization.metric_coefficient();
    let o2 = beam.frequency * beam.frequency;
    let enhancement = o2 / (o2 - beam.resonance * beam.resonance);
    Ok(vec![
        ZetaFactor::new(zeta_freq, ZetaSource::FrequencyShift),
        ZetaFactor::new(-0.5 * (zeta_g + zeta_freq), ZetaSource::AmplitudeScaling),
        ZetaFactor::new(-2.0 * zeta_freq * enhancement, ZetaSource::Polarizability),
    ])
}
