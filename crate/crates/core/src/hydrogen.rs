//! Matrix elements of the wave's perturbation between hydrogen eigenstates.
//!
//! Per unit strain the perturbation is
//!
//! ```text
//! H1/h = (p_y² − p_x²)/2m + κ (x² − y²)/(2 r³),     κ = q²/4π,
//! ```
//!
//! kinetic plus potential part. Units are `ħ = κ = 1` with the electron mass
//! set to `1/a_B`, so energies come out in units of `κ/a_B` (Hartree for
//! `a_B = 1`).
//!
//! Angular integrals are exact. The kinetic part is written with the ladder
//! gradients `∂± = ∂x ± i∂y` as `−[<∂₊a|∂₋b> + <∂₋a|∂₊b>]/4m`, which needs
//! only first derivatives; `∂±` of `f(r) Y_lm` has closed-form components
//! along `Y_{l±1, m±1}`. The potential part is `κ/(2r) · 2√(2π/15)
//! (Y_22 + Y_2,−2)` sandwiched with Gaunt coefficients. Only radial integrals
//! are numerical: composite Gauss-Legendre in `ln r`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::HARTREE_EV;

/// Inner edge of the radial grid, in Bohr radii.
pub const R_MIN: f64 = 1e-6;
/// Elements below this (Hartree) count as zero in the selection-rule scan.
pub const ZERO_THRESHOLD: f64 = 1e-10;
const GL_ORDER: usize = 32;
const DEFAULT_PANELS: usize = 24;

/// Outer edge of the radial grid: 60 Bohr radii, stretched to `30 n` so the
/// tail of the highest shell is below 1e-12.
pub fn radial_extent(n_max: u32) -> f64 {
    60f64.max(30.0 * n_max as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationPart {
    Kinetic,
    Potential,
    Total,
}

impl fmt::Display for PerturbationPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PerturbationPart::Kinetic => "kinetic",
            PerturbationPart::Potential => "potential",
            PerturbationPart::Total => "total",
        })
    }
}

/// `Σ_m c_m R_nl(r) Y_lm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydrogenOrbital {
    pub n: u32,
    pub l: u32,
    pub components: Vec<(i32, Complex64)>,
    pub label: String,
}

const ORBITAL_LETTERS: [char; 5] = ['s', 'p', 'd', 'f', 'g'];

impl HydrogenOrbital {
    pub fn new(n: u32, l: u32, components: Vec<(i32, Complex64)>, label: impl Into<String>) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::invalid(format!("need 0 <= l < n, got n={n}, l={l}")));
        }
        if components.is_empty() || components.iter().any(|(m, _)| m.unsigned_abs() > l) {
            return Err(Error::invalid("magnetic quantum numbers must satisfy |m| <= l"));
        }
        let norm: f64 = components.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("orbital coefficients not normalized ({norm})")));
        }
        Ok(Self { n, l, components, label: label.into() })
    }

    /// Eigenstate `|n, l, m>` of `L_z`.
    pub fn complex(n: u32, l: u32, m: i32) -> Result<Self> {
        let letter = ORBITAL_LETTERS.get(l as usize).copied().unwrap_or('?');
        Self::new(n, l, vec![(m, Complex64::new(1.0, 0.0))], format!("{n}{letter}(m={m})"))
    }

    /// Real orbitals by name: `1s`, `2s`, `2p_x`, `2p_y`, `2p_z`,
    /// `3d_x2-y2`, `3d_xy`, `3d_z2`, ... (any `n` with a valid `l`).
    pub fn real(name: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown orbital `{name}`"));
        let digits: String = name.chars().take_while(|c| c.is_ascii_digit()).collect();
        let n: u32 = digits.parse().map_err(|_| bad())?;
        let rest = &name[digits.len()..];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (l, comps): (u32, Vec<(i32, Complex64)>) = match rest {
            "s" => (0, vec![(0, c(1.0, 0.0))]),
            "p_z" => (1, vec![(0, c(1.0, 0.0))]),
            "p_x" => (1, vec![(-1, c(s, 0.0)), (1, c(-s, 0.0))]),
            "p_y" => (1, vec![(-1, c(0.0, s)), (1, c(0.0, s))]),
            "d_z2" => (2, vec![(0, c(1.0, 0.0))]),
            "d_x2-y2" => (2, vec![(-2, c(s, 0.0)), (2, c(s, 0.0))]),
            "d_xy" => (2, vec![(-2, c(0.0, s)), (2, c(0.0, -s))]),
            "d_xz" => (2, vec![(-1, c(s, 0.0)), (1, c(-s, 0.0))]),
            "d_yz" => (2, vec![(-1, c(0.0, s)), (1, c(0.0, s))]),
            _ => return Err(bad()),
        };
        Self::new(n, l, comps, name)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Generalized Laguerre polynomial `L_k^(α)(x)`.
fn laguerre(k: i64, alpha: f64, x: f64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (1.0, 1.0 + alpha - x);
    if k == 0 {
        return prev;
    }
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + alpha - x) * cur - (j + alpha) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `R_nl(r)` and `dR_nl/dr` for Bohr radius `a`.
fn radial(n: u32, l: u32, a: f64, r: f64) -> (f64, f64) {
    let nf = n as f64;
    let scale = 2.0 / (nf * a);
    let x = scale * r;
    let k = (n - l - 1) as i64;
    let alpha = (2 * l + 1) as f64;
    let norm = (scale.powi(3) * factorial(n - l - 1) / (2.0 * nf * factorial(n + l))).sqrt();
    let e = (-0.5 * x).exp();
    let lag = laguerre(k, alpha, x);
    let dlag = -laguerre(k - 1, alpha + 1.0, x);
    let xl = x.powi(l as i32);
    let f = norm * xl * e * lag;
    let mut dfdx = norm * xl * e * (dlag - 0.5 * lag);
    if l > 0 {
        dfdx += norm * l as f64 * x.powi(l as i32 - 1) * e * lag;
    }
    (f, scale * dfdx)
}

/// Gauss-Legendre nodes and weights on [−1, 1].
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    (0..order)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Radial quadrature rule `∫ f(r) dr ≈ Σ w_i f(r_i)`, in `ln r`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<(f64, f64)>,
    bohr_radius: f64,
}

impl RadialGrid {
    pub fn new(bohr_radius: f64, r_max_bohr: f64, panels: usize) -> Result<Self> {
        if !(bohr_radius > 0.0 && r_max_bohr > R_MIN && panels > 0) {
            return Err(Error::invalid("radial grid needs a positive Bohr radius and extent"));
        }
        let gl = gauss_legendre(GL_ORDER);
        let (u0, u1) = ((R_MIN * bohr_radius).ln(), (r_max_bohr * bohr_radius).ln());
        let du = (u1 - u0) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * GL_ORDER);
        for p in 0..panels {
            let mid = u0 + (p as f64 + 0.5) * du;
            for &(x, w) in &gl {
                let r = (mid + 0.5 * du * x).exp();
                nodes.push((r, 0.5 * du * w * r));
            }
        }
        Ok(Self { nodes, bohr_radius })
    }

    pub fn bohr_radius(&self) -> f64 {
        self.bohr_radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(r, w)| w * f(r)).sum()
    }

    /// `∫ r² R_a R_b dr`.
    pub fn overlap(&self, a: &HydrogenOrbital, b: &HydrogenOrbital) -> Complex64 {
        let rad = self.integrate(|r| {
            r * r * radial(a.n, a.l, self.bohr_radius, r).0 * radial(b.n, b.l, self.bohr_radius, r).0
        });
        let mut total = Complex64::new(0.0, 0.0);
        if a.l != b.l {
            return total;
        }
        for &(ma, ca) in &a.components {
            for &(mb, cb) in &b.components {
                if ma == mb {
                    total += ca.conj() * cb * rad;
                }
            }
        }
        total
    }
}

/// Wigner 3j symbol by the Racah formula.
fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    let f = |n: i32| factorial(n as u32);
    let tri = f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3) / f(j1 + j2 + j3 + 1);
    let pre = (tri
        * f(j1 + m1)
        * f(j1 - m1)
        * f(j2 + m2)
        * f(j2 - m2)
        * f(j3 + m3)
        * f(j3 - m3))
        .sqrt();
    let kmin = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let kmax = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = f(k) * f(j1 + j2 - j3 - k) * f(j1 - m1 - k) * f(j2 + m2 - k) * f(j3 - j2 + m1 + k) * f(j3 - j1 - m2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    let phase = if (j1 - j2 - m3).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    phase * pre * sum
}

/// `∫ Y*_{l1 m1} Y_{2 μ} Y_{l2 m2} dΩ`.
fn gaunt_l2(l1: i32, m1: i32, mu: i32, l2: i32, m2: i32) -> f64 {
    let phase = if m1.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let pre = ((2 * l1 + 1) as f64 * 5.0 * (2 * l2 + 1) as f64 / (4.0 * PI)).sqrt();
    phase * pre * wigner_3j(l1, 2, l2, 0, 0, 0) * wigner_3j(l1, 2, l2, -m1, mu, m2)
}

/// Radial pieces of `∂± [f Y_lm]`: coefficient and which radial combination
/// (`true`: `f' − l f/r` on `l+1`; `false`: `f' + (l+1) f/r` on `l−1`).
fn ladder_terms(l: i32, m: i32, plus: bool) -> [(i32, i32, f64, bool); 2] {
    let lf = l as f64;
    let mf = m as f64;
    if plus {
        let up = -((lf + mf + 1.0) * (lf + mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt();
        let down = if l > 0 {
            ((lf - mf) * (lf - mf - 1.0) / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0))).max(0.0).sqrt()
        } else {
            0.0
        };
        [(l + 1, m + 1, up, true), (l - 1, m + 1, down, false)]
    } else {
        let up = ((lf - mf + 1.0) * (lf - mf + 2.0) / ((2.0 * lf + 1.0) * (2.0 * lf + 3.0))).sqrt();
        let down = if l > 0 {
            -((lf + mf) * (lf + mf - 1.0) / ((2.0 * lf - 1.0) * (2.0 * lf + 1.0))).max(0.0).sqrt()
        } else {
            0.0
        };
        [(l + 1, m - 1, up, true), (l - 1, m - 1, down, false)]
    }
}

/// Matrix-element engine for one radial grid.
#[derive(Debug, Clone)]
pub struct Hydrogen {
    grid: RadialGrid,
}

impl Hydrogen {
    pub fn new(bohr_radius: f64, n_max: u32) -> Result<Self> {
        Self::with_panels(bohr_radius, n_max, DEFAULT_PANELS)
    }

    pub fn with_panels(bohr_radius: f64, n_max: u32, panels: usize) -> Result<Self> {
        Ok(Self { grid: RadialGrid::new(bohr_radius, radial_extent(n_max), panels)? })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    fn mass(&self) -> f64 {
        1.0 / self.grid.bohr_radius
    }

    /// `∫ r² g_a g_b dr` where `g` is `f' − l f/r` (`up`) or `f' + (l+1) f/r`.
    fn gradient_radial(&self, a: (u32, u32, bool), b: (u32, u32, bool)) -> f64 {
        let ar = self.grid.bohr_radius;
        let g = |(n, l, up): (u32, u32, bool), r: f64| {
            let (f, df) = radial(n, l, ar, r);
            if up {
                df - l as f64 * f / r
            } else {
                df + (l as f64 + 1.0) * f / r
            }
        };
        self.grid.integrate(|r| r * r * g(a, r) * g(b, r))
    }

    fn kinetic_basis(&self, na: u32, la: u32, ma: i32, nb: u32, lb: u32, mb: i32) -> f64 {
        // <∂₊a|∂₋b> + <∂₋a|∂₊b>
        let mut sum = 0.0;
        for (pa, pb) in [(true, false), (false, true)] {
            for (l1, m1, c1, up1) in ladder_terms(la as i32, ma, pa) {
                for (l2, m2, c2, up2) in ladder_terms(lb as i32, mb, pb) {
                    if c1 == 0.0 || c2 == 0.0 || l1 != l2 || m1 != m2 || l1 < 0 || m1.abs() > l1 {
                        continue;
                    }
                    sum += c1 * c2 * self.gradient_radial((na, la, up1), (nb, lb, up2));
                }
            }
        }
        -sum / (4.0 * self.mass())
    }

    fn potential_basis(&self, na: u32, la: u32, ma: i32, nb: u32, lb: u32, mb: i32) -> f64 {
        let ang: f64 = [2, -2]
            .iter()
            .map(|&mu| gaunt_l2(la as i32, ma, mu, lb as i32, mb))
            .sum::<f64>()
            * 2.0
            * (2.0 * PI / 15.0).sqrt();
        if ang == 0.0 {
            return 0.0;
        }
        let a = self.grid.bohr_radius;
        let rad = self.grid.integrate(|r| r * 0.5 * radial(na, la, a, r).0 * radial(nb, lb, a, r).0);
        ang * rad
    }

    /// `<bra| H1^part |ket>` per unit strain, in units of `κ/a_B`.
    pub fn matrix_element(&self, bra: &HydrogenOrbital, ket: &HydrogenOrbital, part: PerturbationPart) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for &(ma, ca) in &bra.components {
            for &(mb, cb) in &ket.components {
                let mut v = 0.0;
                if part != PerturbationPart::Potential {
                    v += self.kinetic_basis(bra.n, bra.l, ma, ket.n, ket.l, mb);
                }
                if part != PerturbationPart::Kinetic {
                    v += self.potential_basis(bra.n, bra.l, ma, ket.n, ket.l, mb);
                }
                total += ca.conj() * cb * v;
            }
        }
        total
    }

    /// `|<kin> + <pot>| / max(|<kin>|, |<pot>|, floor)` for a diagonal element.
    pub fn cancellation_check(&self, orbital: &HydrogenOrbital, floor: f64) -> CancellationReport {
        let kinetic = self.matrix_element(orbital, orbital, PerturbationPart::Kinetic).re;
        let potential = self.matrix_element(orbital, orbital, PerturbationPart::Potential).re;
        let scale = kinetic.abs().max(potential.abs()).max(floor);
        CancellationReport { kinetic, potential, residual: (kinetic + potential).abs() / scale }
    }

    /// All `<n l m| H1 |n' l' m'>` with `n, n' <= n_max` in the `L_z` basis.
    /// Errors if an element with `m' − m ≠ ±2` reaches `ZERO_THRESHOLD`.
    pub fn selection_rule_scan(&self, n_max: u32) -> Result<Vec<ScanEntry>> {
        if n_max == 0 || n_max > 5 {
            return Err(Error::invalid("selection-rule scan supports 1 <= n_max <= 5"));
        }
        let mut states = Vec::new();
        for n in 1..=n_max {
            for l in 0..n {
                for m in -(l as i32)..=(l as i32) {
                    states.push(HydrogenOrbital::complex(n, l, m)?);
                }
            }
        }
        let mut out = Vec::new();
        for a in &states {
            for b in &states {
                let v = self.matrix_element(a, b, PerturbationPart::Total);
                let dm = b.components[0].0 - a.components[0].0;
                let allowed = dm.abs() == 2;
                if !allowed && v.norm() >= ZERO_THRESHOLD {
                    return Err(Error::Invariant(format!(
                        "selection rule broken: <{}|H1|{}> = {:e}",
                        a.label,
                        b.label,
                        v.norm()
                    )));
                }
                out.push(ScanEntry { bra: a.label.clone(), ket: b.label.clone(), delta_m: dm, value: v });
            }
        }
        Ok(out)
    }

    /// Element at the default and at twice the radial resolution; errors when
    /// they disagree in the fourth significant digit.
    pub fn converged_element(&self, bra: &HydrogenOrbital, ket: &HydrogenOrbital, part: PerturbationPart) -> Result<Complex64> {
        let coarse = self.matrix_element(bra, ket, part);
        let fine_grid = Hydrogen {
            grid: RadialGrid::new(self.grid.bohr_radius, radial_extent(bra.n.max(ket.n)), 2 * self.grid.len() / GL_ORDER)?,
        };
        let fine = fine_grid.matrix_element(bra, ket, part);
        let scale = fine.norm().max(ZERO_THRESHOLD);
        if (fine - coarse).norm() > 1e-4 * scale {
            return Err(Error::NoConvergence { iterations: 2, residual: (fine - coarse).norm() / scale });
        }
        Ok(fine)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub kinetic: f64,
    pub potential: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub bra: String,
    pub ket: String,
    pub delta_m: i32,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRow {
    pub bra: String,
    pub ket: String,
    pub part: PerturbationPart,
    pub value_hartree: f64,
}

pub fn write_elements_csv<W: Write>(rows: &[ElementRow], mut out: W) -> Result<()> {
    writeln!(out, "bra,ket,part,value_hartree,value_eV")?;
    for r in rows {
        writeln!(out, "{},{},{},{:e},{:e}", r.bra, r.ket, r.part, r.value_hartree, r.value_hartree * HARTREE_EV)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orbitals_are_normalized() {
        let hy = Hydrogen::new(1.0, 3).unwrap();
        for name in ["1s", "2s", "2p_x", "2p_y", "3d_x2-y2", "3d_xy", "3p_z"] {
            let o = HydrogenOrbital::real(name).unwrap();
            let s = hy.grid().overlap(&o, &o);
            assert!((s.re - 1.0).abs() < 1e-10 && s.im.abs() < 1e-14, "{name}: {s}");
        }
    }

    #[test]
    fn orbital_validation() {
        assert!(HydrogenOrbital::complex(1, 1, 0).is_err());
        assert!(HydrogenOrbital::complex(2, 1, 2).is_err());
        assert!(HydrogenOrbital::real("2q").is_err());
    }

    #[test]
    fn wigner_known_values() {
        // (1 1 0; 0 0 0) = −1/√3
        assert!((wigner_3j(1, 1, 0, 0, 0, 0) + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        // (2 2 0; 2 −2 0) = 1/√5
        assert!((wigner_3j(2, 2, 0, 2, -2, 0) - 1.0 / 5f64.sqrt()).abs() < 1e-14);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for (n, l) in [(1, 0), (2, 1), (3, 2), (3, 0)] {
            for r in [0.3, 1.7, 6.0] {
                let d = 1e-6;
                let fd = (radial(n, l, 1.0, r + d).0 - radial(n, l, 1.0, r - d).0) / (2.0 * d);
                assert!((fd - radial(n, l, 1.0, r).1).abs() < 1e-8, "n={n} l={l} r={r}");
            }
        }
    }

    #[test]
    fn ground_state_is_unshifted() {
        let hy = Hydrogen::new(1.0, 1).unwrap();
        let s = HydrogenOrbital::real("1s").unwrap();
        assert!(hy.matrix_element(&s, &s, PerturbationPart::Total).norm() < 1e-10);
        let c = hy.cancellation_check(&s, 1e-12);
        assert!(c.kinetic.abs() < 1e-14 && c.potential.abs() < 1e-14);
    }

    #[test]
    fn hermitian() {
        let hy = Hydrogen::new(1.0, 3).unwrap();
        let a = HydrogenOrbital::real("2p_y").unwrap();
        let b = HydrogenOrbital::real("3d_xy").unwrap();
        let c = HydrogenOrbital::complex(3, 1, 1).unwrap();
        for (x, y) in [(&a, &b), (&a, &c), (&b, &c)] {
            for part in [PerturbationPart::Kinetic, PerturbationPart::Potential] {
                let xy = hy.matrix_element(x, y, part);
                let yx = hy.matrix_element(y, x, part);
                assert!((xy - yx.conj()).norm() < 1e-10);
            }
        }
    }
}
