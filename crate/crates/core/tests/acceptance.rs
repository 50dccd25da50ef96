//! Exit criteria, one PASS/FAIL line each. Runs as a plain binary so every
//! line is printed even when an earlier criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::time::Instant;

use gwmatter::condensate::{
    angular_power, build_trap_modification, evolve_bdg, evolve_hydrodynamic, ground_state, homogeneous,
    perturbation_to_hydro, sample_base, sample_dv_dh, single_mode_phase, BdgOptions, BeamZeta, Boundary, Grid,
    HydroOptions, Spectral,
};
use gwmatter::em_parametric::{evolve_mode, Axis, EmMode, ZetaFactor, ZetaSource};
use gwmatter::estimates::{report, EstimateInputs};
use gwmatter::hydrogen::{Hydrogen, HydrogenOrbital, PerturbationPart};
use gwmatter::point_mass::{evolve_barbell, BarbellConfig};
use gwmatter::scenario::{run_scenario, Scenario, ScenarioResult, BUILTIN};
use gwmatter::GwWaveform;
use serde_json::Value;

type Outcome = Result<String, String>;

struct Gate {
    failed: Vec<u32>,
}

impl Gate {
    fn check(&mut self, n: u32, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS criterion {n}: {msg} ({secs:.1} s)"),
            Err(msg) => {
                println!("FAIL criterion {n}: {msg} ({secs:.1} s)");
                self.failed.push(n);
            }
        }
    }
}

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn orbital(name: &str) -> HydrogenOrbital {
    HydrogenOrbital::real(name).unwrap()
}

fn c1_kinetic() -> Outcome {
    let start = Instant::now();
    let hy = Hydrogen::new(1.0, 2).map_err(|e| e.to_string())?;
    let p = orbital("2p_x");
    let k = hy.converged_element(&p, &p, PerturbationPart::Kinetic).map_err(|e| e.to_string())?.re;
    let secs = start.elapsed().as_secs_f64();
    let err = rel(k, -0.05);
    ensure(err < 1e-4 && secs < 10.0, format!("<2p_x|kin|2p_x> = {k:.12} Ha, rel. error {err:.1e}, {secs:.2} s"))
}

fn c2_cancellation() -> Outcome {
    let hy = Hydrogen::new(1.0, 3).map_err(|e| e.to_string())?;
    let mut msg = Vec::new();
    let mut ok = true;
    for name in ["2p_x", "3d_x2-y2"] {
        let o = orbital(name);
        let c = hy.cancellation_check(&o, 0.0);
        let total = c.kinetic + c.potential;
        // a kinetic part that vanishes identically leaves nothing to cancel
        let pass = total.abs() < 1e-6 * c.kinetic.abs() || (c.kinetic.abs() < 1e-14 && total.abs() < 1e-14);
        ok &= pass;
        msg.push(format!("{name}: kinetic {:.3e}, total {:.1e}", c.kinetic, total));
    }
    ensure(ok, msg.join("; "))
}

fn c3_off_diagonal() -> Outcome {
    let hy = Hydrogen::new(1.0, 3).map_err(|e| e.to_string())?;
    let v = hy
        .converged_element(&orbital("1s"), &orbital("3d_x2-y2"), PerturbationPart::Total)
        .map_err(|e| e.to_string())?
        .re;
    // q²/(128π a_B) in Hartree, where q²/(4π a_B) = 1
    let expected = 4.0 * PI / (128.0 * PI);
    let err = rel(v, expected);
    let scan = hy.selection_rule_scan(3).map_err(|e| e.to_string())?;
    let complex = hy
        .converged_element(&orbital("1s"), &HydrogenOrbital::complex(3, 2, 2).unwrap(), PerturbationPart::Total)
        .map_err(|e| e.to_string())?
        .re;
    let forbidden = scan.iter().filter(|e| e.delta_m.abs() != 2).map(|e| e.value.norm()).fold(0.0, f64::max);
    ensure(
        err < 1e-4 && forbidden < 1e-10,
        format!("<1s|H1|3d_x2-y2> = {v:.10} Ha (rel. error {err:.1e}, expected {expected}); <1s|H1|3,2,+2> = {complex:.10} Ha; max forbidden {forbidden:.1e} over {} pairs", scan.len()),
    )
}

fn c4_barbell_numbers() -> Outcome {
    let r = report(&EstimateInputs::default()).map_err(|e| e.to_string())?;
    let lo = 1e-11 / TAU;
    let hi = 1e-11 * TAU;
    let in_range = |x: f64| (lo..=hi).contains(&x);
    ensure(
        r.rotational_energy_j == 1e8 && in_range(r.required_kinetic_j),
        format!(
            "E_rot = {:e} J; required E_kin = {:.3e} J (omega = 1e3 rad/s) / {:.3e} J (omega = 2pi kHz)",
            r.rotational_energy_j, r.required_kinetic_j, r.required_kinetic_2pi_j
        ),
    )
}

fn barbell_shift(omega: f64, phase: f64, h0: f64, duration: f64) -> (f64, f64) {
    let cfg = BarbellConfig::rigid(1.0, 1.0, 1.0);
    let w = GwWaveform::rectangular(h0, omega, phase, duration).unwrap();
    let run = evolve_barbell(&cfg, &w, PI / 100.0, duration, 100).unwrap();
    (run.rotational_change(), run.samples[0].energy.rotational)
}

fn c5_resonance() -> Outcome {
    let start = Instant::now();
    let (h0, omega) = (1e-6, 2.0);
    let t = 100.0 * TAU / omega;
    let (de, e_rot) = barbell_shift(omega, -FRAC_PI_2, h0, t);
    let ratio = de / (h0 * omega * t * e_rot);
    let (de_flip, _) = barbell_shift(omega, FRAC_PI_2, h0, t);
    let (de_detuned, _) = barbell_shift(omega + 100.0 / t, -FRAC_PI_2, h0, t);
    let secs = start.elapsed().as_secs_f64();
    let ok = (0.05..=5.0).contains(&ratio.abs())
        && de.signum() != de_flip.signum()
        && de_detuned.abs() * 10.0 <= de.abs()
        && secs < 60.0;
    ensure(
        ok,
        format!("dE/(h0 wT E_rot) = {ratio:.4}; phase+pi gives {de_flip:.3e} vs {de:.3e}; detuned {de_detuned:.3e}; {secs:.1} s"),
    )
}

fn run_builtins(out: &Path) -> Vec<(String, Result<ScenarioResult, String>)> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    BUILTIN
        .iter()
        .map(|(name, raw)| {
            let r = Scenario::from_json(raw)
                .and_then(|s| run_scenario(&s, raw, Some(out), workers))
                .map_err(|e| e.to_string());
            (name.to_string(), r)
        })
        .collect()
}

fn find<'a>(runs: &'a [(String, Result<ScenarioResult, String>)], name: &str) -> Result<&'a ScenarioResult, String> {
    let (_, r) = runs.iter().find(|(n, _)| n == name).ok_or(format!("{name} is not shipped"))?;
    r.as_ref().map_err(|e| format!("{name}: {e}"))
}

/// The scenario with zero strain and no sweep.
fn null_control(name: &str) -> Result<ScenarioResult, String> {
    let raw = BUILTIN.iter().find(|(n, _)| *n == name).ok_or("missing")?.1;
    let mut v: Value = serde_json::from_str(raw).map_err(|e| e.to_string())?;
    v["waveform"]["amplitude"] = Value::from(0.0);
    let obj = v.as_object_mut().ok_or("not an object")?;
    obj.remove("sweep");
    obj.remove("fit");
    let raw = v.to_string();
    let s = Scenario::from_json(&raw).map_err(|e| e.to_string())?;
    run_scenario(&s, &raw, None, 1).map_err(|e| e.to_string())
}

fn detail(r: &ScenarioResult, key: &str) -> Result<f64, String> {
    r.points[0].details[key].as_f64().ok_or(format!("{}: no `{key}` detail", r.name))
}

fn c6_scaling(runs: &[(String, Result<ScenarioResult, String>)]) -> Outcome {
    let mut msg = Vec::new();
    let mut ok = true;
    for (name, expected) in [("barbell_scaling", 1.0), ("bec_seeded_scaling", 1.0), ("bec_stationary_scaling", 2.0)] {
        let r = find(runs, name)?;
        let p = r.fit.as_ref().and_then(|f| f.exponent()).ok_or(format!("{name}: no exponent fitted"))?;
        ok &= (p - expected).abs() <= 0.05;
        msg.push(format!("{name} exponent {p:.4}"));
    }
    let c = null_control("barbell_scaling")?;
    let scale = detail(&c, "initial_energy")?;
    let de = detail(&c, "mechanical_change")?.abs().max(c.points[0].energy_change.unwrap_or(f64::NAN).abs());
    ok &= de < 1e-10 * scale;
    msg.push(format!("barbell h0=0: |dE|/E = {:.1e}", de / scale));
    for name in ["bec_seeded_scaling", "bec_stationary_scaling"] {
        let c = null_control(name)?;
        let scale = detail(&c, "chemical_potential")?.abs() * 200.0;
        let de = c.points[0].energy_change.ok_or("no energy change")?.abs();
        ok &= de < 1e-10 * scale;
        msg.push(format!("{name} h0=0: |dE|/(N mu) = {:.1e}", de / scale));
    }
    ensure(ok, msg.join("; "))
}

fn c7_bound(runs: &[(String, Result<ScenarioResult, String>)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (name, r) in runs {
        let r = r.as_ref().map_err(|e| format!("{name}: {e}"))?;
        for p in &r.points {
            if let Some(q) = p.max_bound_ratio {
                worst = worst.max(q);
                checked += 1;
            }
        }
        if r.backend == "barbell" || r.backend == "scissors" {
            // the ledger refuses to build when the rotating-frame bound fails
            if r.points.iter().any(|p| p.max_bound_ratio.is_none()) {
                return Err(format!("{name}: barbell point without a bound ledger"));
            }
        }
    }
    ensure(
        worst <= 1.0 + 1e-12,
        format!("{} scenarios, {checked} ledgers, max |dE/dt|/bound = {worst:.12}", runs.len()),
    )
}

fn c8_bec_numbers() -> Outcome {
    let r = report(&EstimateInputs::default()).map_err(|e| e.to_string())?;
    let decade = |x: f64, c: f64| x >= c / 10.0 && x <= c * 10.0;
    let shift_ok = decade(r.bec_shift_kelvin, 1e-17);
    let inverted_ok = decade(r.required_recoil_kelvin, 10.0) || decade(r.required_recoil_10nk_kelvin, 10.0);
    ensure(
        shift_ok && inverted_ok,
        format!(
            "dE_bound = {:.2e} K; E_R for one phonon = {:.3e} K (hbar 2pi kHz) / {:.3e} K (10 nK), target ~10 K",
            r.bec_shift_kelvin, r.required_recoil_kelvin, r.required_recoil_10nk_kelvin
        ),
    )
}

fn quadrupole_fractions(f1: [f64; 3]) -> Result<(f64, f64, f64), String> {
    let start = Instant::now();
    let grid = Grid::new(2, 256, 32.0, Boundary::Periodic).map_err(|e| e.to_string())?;
    let half = [[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]];
    let beam = |axis, zeta| BeamZeta { axes: vec![axis], factors: vec![ZetaFactor::new(zeta, ZetaSource::FrequencyShift)] };
    let trap = build_trap_modification(half, &[beam(Axis::X, 1.0), beam(Axis::Y, -1.0)], f1, 0.0, 2)
        .map_err(|e| e.to_string())?;
    let v0 = sample_base(&grid, &trap);
    let field = ground_state(&grid, &v0, 1.0, 1.0, 200.0, None, &Default::default()).map_err(|e| e.to_string())?;
    let w = GwWaveform::rectangular(1e-6, 2f64.sqrt(), 0.0, 20.0).map_err(|e| e.to_string())?;
    let opts = BdgOptions { dt: 0.004, t_end: 20.0, stride: 50, record_fields: false, seed: None };
    let run = evolve_bdg(&field, &sample_dv_dh(&grid, &trap), &w, &opts).map_err(|e| e.to_string())?;
    run.ledger(&w).map_err(|e| e.to_string())?;
    let sp = Spectral::new(&grid).map_err(|e| e.to_string())?;
    let ang = angular_power(&sp, &run.final_field, 7.5, 48, 8).map_err(|e| e.to_string())?;
    let m1 = (ang.power_at(1) + ang.power_at(-1)) / ang.total();
    Ok((ang.fraction_outside(&[-2, 2]), m1, start.elapsed().as_secs_f64()))
}

fn c9_quadrupole() -> Outcome {
    let (outside, _, t_pure) = quadrupole_fractions([0.0; 3])?;
    let (_, m1, t_f1) = quadrupole_fractions([1.0, 0.0, 0.0])?;
    ensure(
        outside < 1e-6 && m1 > 1e-3 && t_pure < 300.0 && t_f1 < 300.0,
        format!("256^2: power outside m=+-2 {outside:.1e} ({t_pure:.0} s); with F1, m=+-1 fraction {m1:.2e} ({t_f1:.0} s)"),
    )
}

fn wkb_error(axis: Axis, k: [f64; 3], ratio: f64) -> Result<f64, String> {
    let h0 = 0.1;
    let mode = EmMode::adiabatic(k, axis, h0).map_err(|e| e.to_string())?;
    let big = mode.frequency(0.0);
    let omega = big / ratio;
    let t = 2.0 * TAU / omega;
    let w = GwWaveform::rectangular(h0, omega, 0.0, t).map_err(|e| e.to_string())?;
    let run = evolve_mode(&mode, &w, TAU / (64.0 * big), t, 16).map_err(|e| e.to_string())?;
    Ok(run.max_adiabatic_deviation())
}

fn c10_em_mode() -> Outcome {
    let k = [0.0, 0.0, 10.0];
    let w = GwWaveform::rectangular(1e-2, 0.05, 0.0, 1e4 * TAU / 10.0).map_err(|e| e.to_string())?;
    let mode = EmMode::adiabatic(k, Axis::X, w.strain(0.0)).map_err(|e| e.to_string())?;
    let run = evolve_mode(&mode, &w, TAU / (64.0 * 10.0), w.duration(), 100).map_err(|e| e.to_string())?;
    let wr = run.max_wronskian_deviation();
    let mut ok = wr < 1e-8;
    let mut msg = vec![format!("Wronskian drift {wr:.1e} over 1e4 periods")];
    for (label, axis, k) in [("z", Axis::Z, [10.0, 0.0, 0.0]), ("x", Axis::X, [0.0, 0.0, 10.0])] {
        let errs: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|r| wkb_error(axis, k, *r)).collect::<Result<_, _>>()?;
        let slopes: Vec<f64> = errs.windows(2).map(|p| (p[0] / p[1]).log10()).collect();
        ok &= slopes.iter().all(|s| (1.7..=2.3).contains(s));
        msg.push(format!("{label}-case WKB errors {:.2e}/{:.2e}/{:.2e}, decade slopes {:.2}/{:.2}", errs[0], errs[1], errs[2], slopes[0], slopes[1]));
    }
    ensure(ok, msg.join("; "))
}

fn c11_hydro() -> Outcome {
    let grid = Grid::new(1, 64, 64.0, Boundary::Periodic).map_err(|e| e.to_string())?;
    let field = homogeneous(&grid, 1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let q = TAU * 4.0 / 64.0;
    let lambda = TAU / q;
    let xi = field.healing_length();
    let dv_dh: Vec<f64> = grid.positions().iter().map(|r| (q * r[0]).cos()).collect();
    let (h0, omega, t_end) = (1e-4, 0.3, 50.0);
    let w = GwWaveform::rectangular(h0, omega, 0.0, t_end).map_err(|e| e.to_string())?;
    let opts = HydroOptions { dt: 0.005, t_end, stride: 100, quantum_pressure: true, mask_vacuum: false };
    let hy = evolve_hydrodynamic(&field, &dv_dh, &w, &opts).map_err(|e| e.to_string())?;
    let bdg = BdgOptions { dt: 0.005, t_end, stride: 100, record_fields: false, seed: None };
    let run = evolve_bdg(&field, &dv_dh, &w, &bdg).map_err(|e| e.to_string())?;
    let (rho_b, _) = perturbation_to_hydro(&field.psi, &run.final_field);
    let rho_h = hy.delta_rho.last().ok_or("no hydro samples")?;
    let num: f64 = rho_h.iter().zip(&rho_b).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = rho_b.iter().map(|b| b * b).sum();
    let l2 = (num / den).sqrt();

    // one Bogoliubov mode: Ω² = (ρ q²/m)(g + q²/4mρ)
    let big = (q * q * (1.0 + q * q / 4.0)).sqrt();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (t, ds) in hy.times.iter().zip(&hy.delta_phase) {
        let s = single_mode_phase(h0, omega, 0.0, 1.0, big, *t);
        for (r, v) in grid.positions().iter().zip(ds) {
            worst = worst.max((v - s * (q * r[0]).cos()).abs());
        }
        scale = scale.max(s.abs());
    }
    let phase_err = worst / scale;
    ensure(
        lambda >= 8.0 * xi && l2 < 1e-2 && phase_err < 1e-4,
        format!("lambda/xi = {:.1}; hydro vs BdG density L2 {l2:.1e}; phase vs closed form {phase_err:.1e}", lambda / xi),
    )
}

fn csv_files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c12_determinism(first: &Path, runs: &[(String, Result<ScenarioResult, String>)]) -> Outcome {
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let again = run_builtins(second.path());
    if let Some((n, Err(e))) = again.iter().find(|(_, r)| r.is_err()) {
        return Err(format!("{n}: {e}"));
    }
    let (a, b) = (csv_files(first), csv_files(second.path()));
    if a != b || a.is_empty() {
        return Err(format!("file sets differ: {} vs {} CSVs", a.len(), b.len()));
    }
    for f in &a {
        if std::fs::read(first.join(f)).ok() != std::fs::read(second.path().join(f)).ok() {
            return Err(format!("{} differs between runs", f.display()));
        }
    }
    Ok(format!("{} CSV files from {} scenarios byte-identical", a.len(), runs.len()))
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };
    gate.check(1, c1_kinetic);
    gate.check(2, c2_cancellation);
    gate.check(3, c3_off_diagonal);
    gate.check(4, c4_barbell_numbers);
    gate.check(5, c5_resonance);
    let first = tempfile::tempdir().expect("tempdir");
    let runs = run_builtins(first.path());
    gate.check(6, || c6_scaling(&runs));
    gate.check(7, || c7_bound(&runs));
    gate.check(8, c8_bec_numbers);
    gate.check(9, c9_quadrupole);
    gate.check(10, c10_em_mode);
    gate.check(11, c11_hydro);
    gate.check(12, || c12_determinism(first.path(), &runs));
    if gate.failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: failed criteria {:?}", gate.failed);
        std::process::exit(1);
    }
}
