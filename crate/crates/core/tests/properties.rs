use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use gwmatter::condensate::{evolve_bdg, homogeneous, BdgOptions, Boundary, Grid};
use gwmatter::em_parametric::{dispersion, evolve_mode, trap_zeta_factors, Axis, Beam, EmMode, ZetaSource};
use gwmatter::estimates::{bec_energy_shift, required_potential_strength};
use gwmatter::hydrogen::{Hydrogen, HydrogenOrbital, PerturbationPart};
use gwmatter::point_mass::{evolve_barbell, BarbellConfig};
use gwmatter::scaling::{fit_scaling, log_sweep};
use gwmatter::{Envelope, GwWaveform};
use proptest::prelude::*;

// radial quadrature of (∂x² − ∂y²)e^{-r} and (x² − y²)/2r³ against R32,
// done separately in closed form: √2/40 and √2/160 Hartree
#[test]
fn ground_to_d_element_parts() {
    let hy = Hydrogen::new(1.0, 3).unwrap();
    let (a, b) = (HydrogenOrbital::real("1s").unwrap(), HydrogenOrbital::real("3d_x2-y2").unwrap());
    let kin = hy.matrix_element(&a, &b, PerturbationPart::Kinetic).re;
    let pot = hy.matrix_element(&a, &b, PerturbationPart::Potential).re;
    assert_relative_eq!(kin, 2f64.sqrt() / 40.0, max_relative = 1e-8);
    assert_relative_eq!(pot, 2f64.sqrt() / 160.0, max_relative = 1e-8);
    let m2 = HydrogenOrbital::complex(3, 2, 2).unwrap();
    assert_relative_eq!(hy.matrix_element(&a, &m2, PerturbationPart::Total).re, 1.0 / 32.0, max_relative = 1e-8);
}

#[test]
fn d_orbitals_with_odd_m_cancel() {
    let hy = Hydrogen::new(1.0, 3).unwrap();
    let d = HydrogenOrbital::real("3d_xz").unwrap();
    let c = hy.cancellation_check(&d, 0.0);
    assert!(c.kinetic.abs() > 1e-3);
    assert!(c.residual < 1e-10);
}

fn bdg_response(h0: f64, phase: f64) -> Vec<num_complex::Complex64> {
    let grid = Grid::new(1, 32, 32.0, Boundary::Periodic).unwrap();
    let field = homogeneous(&grid, 1.0, 1.0, 1.0).unwrap();
    let q = TAU * 2.0 / 32.0;
    let dv: Vec<f64> = grid.positions().iter().map(|r| (q * r[0]).cos() + 0.3 * (2.0 * q * r[0]).sin()).collect();
    let w = GwWaveform::rectangular(h0, 0.4, phase, 10.0).unwrap();
    let opts = BdgOptions { dt: 0.01, t_end: 10.0, stride: 100, record_fields: false, seed: None };
    evolve_bdg(&field, &dv, &w, &opts).unwrap().final_field
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bdg_response_is_linear_in_strain(h0 in 1e-6f64..1e-2, k in 1.5f64..8.0, phase in -PI..PI) {
        let a = bdg_response(h0, phase);
        let b = bdg_response(k * h0, phase);
        let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((y - x * k).norm() <= 1e-10 * k * scale);
        }
    }

    #[test]
    fn barbell_power_never_exceeds_bound(h0 in 1e-8f64..1e-3, omega in 0.5f64..4.0, phase in -PI..PI, stiff in prop_oneof![Just(0.0), 3.5f64..12.0]) {
        let mut cfg = BarbellConfig::rigid(1.0, 1.0, 1.0);
        cfg.radial_stiffness = stiff;
        let w = GwWaveform::new(h0, omega, phase, Envelope::CosineRamp { ramp_fraction: 0.2 }, 20.0).unwrap();
        let run = evolve_barbell(&cfg, &w, 0.005, 20.0, 1).unwrap();
        let ledger = run.ledger(&w).unwrap();
        prop_assert!(ledger.max_bound_ratio() <= 1.0 + 1e-12);
        prop_assert!(ledger.total_transfer().abs() <= ledger.integrated_bound() * (1.0 + 1e-9));
    }

    #[test]
    fn wronskian_survives_any_smooth_drive(h0 in 0.0f64..0.3, ratio in 5.0f64..200.0, phase in -PI..PI, z in any::<bool>()) {
        let (axis, k) = if z { (Axis::Z, [4.0, 0.0, 0.0]) } else { (Axis::X, [0.0, 0.0, 4.0]) };
        let w = GwWaveform::new(h0, 4.0 / ratio, phase, Envelope::CosineRamp { ramp_fraction: 0.3 }, 200.0).unwrap();
        let mode = EmMode::adiabatic(k, axis, 0.0).unwrap();
        let dt = TAU / (64.0 * 4.0);
        let run = evolve_mode(&mode, &w, dt, 8000.0 * dt, 50).unwrap();
        prop_assert!(run.max_wronskian_deviation() < 1e-10);
    }

    #[test]
    fn dispersion_is_metric_contraction(kx in -5.0f64..5.0, ky in -5.0f64..5.0, kz in -5.0f64..5.0, h in -1e-3f64..1e-3) {
        let k2 = kx * kx + ky * ky + kz * kz;
        prop_assume!(k2 > 1e-2);
        let exact = (1.0 - h) * kx * kx + (1.0 + h) * ky * ky + kz * kz;
        prop_assert!((dispersion([kx, ky, kz], h) - exact).abs() <= 1e-12 * k2);
        prop_assert!((dispersion([kx, ky, kz], h) - k2).abs() <= h.abs() * k2 * (1.0 + 1e-12));
    }

    #[test]
    fn strain_rate_matches_difference_quotient(h0 in 1e-6f64..1.0, omega in 0.1f64..10.0, phase in -PI..PI, t in 0.1f64..0.9) {
        let w = GwWaveform::new(h0, omega, phase, Envelope::CosineRamp { ramp_fraction: 0.25 }, 1.0).unwrap();
        let d = 1e-5;
        let fd = (w.strain(t + d) - w.strain(t - d)) / (2.0 * d);
        prop_assert!((fd - w.strain_rate(t)).abs() <= 1e-5 * h0 * (omega + 20.0).powi(3));
    }

    #[test]
    fn polarizability_factor_matches_difference_quotient(omega in 0.2f64..5.0, res in 0.0f64..5.0, x in any::<bool>()) {
        prop_assume!((omega * omega - res * res).abs() > 0.05);
        let prop = if x { Axis::X } else { Axis::Y };
        let beam = Beam { propagation: prop, polarization: Axis::Z, frequency: omega, resonance: res };
        let zeta = trap_zeta_factors(&beam).unwrap().into_iter().find(|f| f.source == ZetaSource::Polarizability).unwrap().zeta;
        // ω(h)² along the beam from the metric, α ∝ 1/(ω² − ω_res²)
        let ln_alpha = |h: f64| -(omega * omega * (1.0 + prop.metric_coefficient() * h) - res * res).abs().ln();
        let d = 1e-6;
        let fd = (ln_alpha(d) - ln_alpha(-d)) / (2.0 * d);
        prop_assert!((fd - zeta).abs() <= 1e-6 * (1.0 + zeta.abs()));
    }

    #[test]
    fn bec_estimate_inverts(atoms in 1.0f64..1e12, er in 1e-30f64..1e-20, h in 1e-24f64..1e-3, wt in 1.0f64..1e4) {
        let shift = bec_energy_shift(atoms, er, h, wt).unwrap();
        assert_relative_eq!(required_potential_strength(shift, atoms, h, wt).unwrap(), er, max_relative = 1e-12);
    }

    #[test]
    fn scaling_fit_recovers_power_law(p in 0.5f64..3.0, c in 1e-6f64..1e6) {
        let pts: Vec<(f64, f64)> = log_sweep(1e-6, 1e-2, 6).into_iter().map(|a| (a, c * a.powf(p))).collect();
        let e = fit_scaling(&pts, 0.0).unwrap().exponent().unwrap();
        prop_assert!((e - p).abs() < 1e-9);
    }
}
