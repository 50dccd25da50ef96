//! Scenario execution and output files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{Backend, BecSolver, BecSpec, PointResult, Scenario, ScenarioResult};
use crate::condensate::angular::angular_power;
use crate::condensate::hydro::perturbation_to_hydro;
use crate::condensate::io::{write_field, FieldSidecar, LAYOUT};
use crate::condensate::{
    build_trap_modification, check_trapped_geometry, evolve_bdg, evolve_gpe, evolve_hydrodynamic, ground_state,
    quadrupole_seed, sample_base, sample_dv_dh, BdgOptions, CondensateField, CondensateRun, GpeOptions, HydroOptions,
    Spectral, TrapModification,
};
use crate::em_parametric::{evolve_mode, polarization_drift, EmMode};
use crate::energy_transfer::EnergyLedger;
use crate::error::{Error, Result};
use crate::estimates::report;
use crate::hydrogen::{write_elements_csv, ElementRow, Hydrogen, HydrogenOrbital, PerturbationPart};
use crate::integrate::step_count;
use crate::point_mass::{evolve_barbell, evolve_scissors, BarbellRun};
use crate::scaling::fit_scaling;
use crate::waveform::GwWaveform;

struct Sink {
    dir: Option<PathBuf>,
    hash: String,
}

impl Sink {
    fn file(&self, name: &str) -> Result<Option<BufWriter<File>>> {
        match &self.dir {
            None => Ok(None),
            Some(d) => Ok(Some(BufWriter::new(File::create(d.join(name))?))),
        }
    }

    fn ledger(&self, scenario: &Scenario, idx: usize, ledger: &EnergyLedger) -> Result<()> {
        if scenario.outputs.ledger {
            if let Some(f) = self.file(&format!("ledger_{idx:03}.csv"))? {
                ledger.write_csv(f)?;
            }
        }
        Ok(())
    }

    fn field(&self, scenario: &Scenario, idx: usize, kind: &str, grid: &crate::condensate::Grid, t: f64, f: &[Complex64]) -> Result<()> {
        if let (true, Some(d)) = (scenario.outputs.fields, &self.dir) {
            let side = FieldSidecar {
                grid: *grid,
                time: t,
                kind: kind.into(),
                units: "hbar = 1, lengths and times in the config's units".into(),
                config_hash: self.hash.clone(),
                layout: LAYOUT.into(),
            };
            write_field(&d.join(format!("{kind}_{idx:03}.bin")), f, &side)?;
        }
        Ok(())
    }
}

fn trap_of(spec: &BecSpec) -> Result<TrapModification> {
    let dims = spec.grid.dimensions;
    let mut t = build_trap_modification(spec.trap.m0, &spec.trap.beams, spec.trap.f1, spec.trap.v1, dims)?;
    if let Some(m1) = spec.trap.m1 {
        for (row, add) in t.m1.iter_mut().zip(m1) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
        t.validate(dims)?;
    }
    Ok(t)
}

fn check_bec(spec: &BecSpec) -> Result<()> {
    spec.grid.validate()?;
    trap_of(spec)?;
    if !(spec.mass > 0.0 && spec.atoms > 0.0 && spec.coupling >= 0.0) {
        return Err(Error::invalid("condensate mass and atom number must be positive, coupling >= 0"));
    }
    if spec.stride == 0 || !(spec.dt > 0.0) {
        return Err(Error::invalid("condensate dt and stride must be positive"));
    }
    if let Some(a) = spec.angular {
        if spec.grid.dimensions != 2 {
            return Err(Error::invalid("angular analysis needs a 2-D grid"));
        }
        if !(a.r_max > 0.0 && a.r_max <= 0.5 * spec.grid.extent) || a.rings == 0 || a.m_max < 1 {
            return Err(Error::invalid("angular analysis needs 0 < r_max <= extent/2, rings > 0, m_max >= 1"));
        }
    }
    Ok(())
}

pub(super) fn validate_backend(s: &Scenario) -> Result<()> {
    let durations = || -> Result<Vec<f64>> {
        s.sweep_values()?.into_iter().map(|v| Ok(s.waveform_at(v)?.duration())).collect()
    };
    match &s.backend {
        Backend::Barbell { config, dt, stride } => {
            config.validate()?;
            positive_stride(*stride)?;
            for d in durations()? {
                step_count(d, *dt)?;
            }
        }
        Backend::Scissors { config, dt, stride } => {
            config.validate()?;
            positive_stride(*stride)?;
            for d in durations()? {
                step_count(d, *dt)?;
            }
        }
        Backend::EmMode { wavevector, polarization, dt, stride, .. } => {
            EmMode::adiabatic(*wavevector, *polarization, 0.0)?;
            positive_stride(*stride)?;
            for d in durations()? {
                step_count(d, *dt)?;
            }
        }
        Backend::Bec { condensate, .. } | Backend::BecHydro { condensate, .. } => {
            check_bec(condensate)?;
            for d in durations()? {
                step_count(d, condensate.dt)?;
            }
        }
        Backend::Hydrogen { bohr_radius, n_max, elements, .. } => {
            if !(*bohr_radius > 0.0) || *n_max == 0 {
                return Err(Error::invalid("hydrogen needs a positive Bohr radius and n_max >= 1"));
            }
            for [a, b] in elements {
                for name in [a, b] {
                    let o = HydrogenOrbital::real(name)?;
                    if o.n > *n_max {
                        return Err(Error::invalid(format!("orbital {name} exceeds n_max = {n_max}")));
                    }
                }
            }
        }
        Backend::Estimates { .. } => {}
    }
    Ok(())
}

fn positive_stride(stride: usize) -> Result<()> {
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    Ok(())
}

fn barbell_point(s: &Scenario, sink: &Sink, idx: usize, w: &GwWaveform, run: BarbellRun) -> Result<PointResult> {
    let ledger = run.ledger(w)?;
    sink.ledger(s, idx, &ledger)?;
    if s.outputs.trajectory {
        if let Some(f) = sink.file(&format!("trajectory_{idx:03}.csv"))? {
            run.write_csv(f)?;
        }
    }
    let e0 = run.samples[0].energy.total;
    Ok(PointResult {
        value: None,
        energy_change: Some(ledger.total_transfer()),
        integrated_bound: Some(ledger.integrated_bound()),
        max_bound_ratio: Some(ledger.max_bound_ratio()),
        details: json!({
            "initial_energy": e0,
            "relative_transfer": ledger.total_transfer() / e0,
            "mechanical_change": run.total_change(),
            "rotational_change": run.rotational_change(),
            "vibrational_change": run.vibrational_change(),
            "static_in_rotating_frame": run.static_in_rotating_frame(),
        }),
    })
}

struct PreparedBec {
    field: CondensateField,
    dv_dh: Vec<f64>,
    seed: Option<Vec<Complex64>>,
}

fn prepare_bec(spec: &BecSpec) -> Result<PreparedBec> {
    let trap = trap_of(spec)?;
    let v0 = sample_base(&spec.grid, &trap);
    let opts = spec.ground_state.unwrap_or_default();
    let field = ground_state(&spec.grid, &v0, spec.mass, spec.coupling, spec.atoms, None, &opts)?;
    check_trapped_geometry(&field, &trap)?;
    let seed = spec.seed_epsilon.map(|e| quadrupole_seed(&field, e));
    Ok(PreparedBec { dv_dh: sample_dv_dh(&spec.grid, &trap), field, seed })
}

/// `δψ` at the end of a run, in the frame rotating with `μ`.
fn final_perturbation(p: &PreparedBec, run: &CondensateRun, solver: BecSolver, t_end: f64) -> Vec<Complex64> {
    match solver {
        BecSolver::Bdg => run.final_field.clone(),
        BecSolver::Gpe => {
            let rot = Complex64::from_polar(1.0, p.field.chemical_potential * t_end);
            run.final_field.iter().zip(&p.field.psi).map(|(f, phi)| f * rot - phi).collect()
        }
    }
}

fn bec_point(
    s: &Scenario,
    sink: &Sink,
    idx: usize,
    w: &GwWaveform,
    spec: &BecSpec,
    solver: BecSolver,
    p: &PreparedBec,
) -> Result<PointResult> {
    let t_end = w.duration();
    let run = match solver {
        BecSolver::Bdg => evolve_bdg(
            &p.field,
            &p.dv_dh,
            w,
            &BdgOptions { dt: spec.dt, t_end, stride: spec.stride, record_fields: false, seed: p.seed.clone() },
        )?,
        BecSolver::Gpe => {
            let initial = p.seed.as_ref().map(|sd| p.field.psi.iter().zip(sd).map(|(a, b)| a + b).collect());
            evolve_gpe(&p.field, &p.dv_dh, w, &GpeOptions { dt: spec.dt, t_end, stride: spec.stride, record_fields: false, initial })?
        }
    };
    let ledger = run.ledger(w)?;
    sink.ledger(s, idx, &ledger)?;
    let dpsi = final_perturbation(p, &run, solver, t_end);
    sink.field(s, idx, "delta_psi", &spec.grid, t_end, &dpsi)?;
    let mut details = json!({
        "chemical_potential": p.field.chemical_potential,
        "ground_state_residual": p.field.residual,
        "healing_length": p.field.healing_length(),
        "max_norm_drift": run.max_norm_drift(),
        "perturbation_norm": spec.grid.norm(&dpsi),
    });
    if let Some(a) = spec.angular {
        let sp = Spectral::new(&spec.grid)?;
        let ang = angular_power(&sp, &dpsi, a.r_max, a.rings, a.m_max)?;
        details["angular_fraction_outside_m2"] = json!(ang.fraction_outside(&[-2, 2]));
        details["angular_fraction_m1"] = json!((ang.power_at(1) + ang.power_at(-1)) / ang.total());
    }
    Ok(PointResult {
        value: None,
        energy_change: Some(ledger.total_transfer()),
        integrated_bound: Some(ledger.integrated_bound()),
        max_bound_ratio: Some(ledger.max_bound_ratio()),
        details,
    })
}

#[allow(clippy::too_many_arguments)]
fn hydro_point(
    s: &Scenario,
    sink: &Sink,
    idx: usize,
    w: &GwWaveform,
    spec: &BecSpec,
    p: &PreparedBec,
    quantum_pressure: bool,
    mask_vacuum: bool,
    compare_bdg: bool,
) -> Result<PointResult> {
    let t_end = w.duration();
    let h = evolve_hydrodynamic(
        &p.field,
        &p.dv_dh,
        w,
        &HydroOptions { dt: spec.dt, t_end, stride: spec.stride, quantum_pressure, mask_vacuum },
    )?;
    let drho = h.delta_rho.last().cloned().unwrap_or_default();
    let dphase = h.delta_phase.last().cloned().unwrap_or_default();
    let as_c = |v: &[f64]| v.iter().map(|x| Complex64::new(*x, 0.0)).collect::<Vec<_>>();
    sink.field(s, idx, "delta_rho", &spec.grid, t_end, &as_c(&drho))?;
    sink.field(s, idx, "delta_phase", &spec.grid, t_end, &as_c(&dphase))?;
    let mut details = json!({
        "max_abs_delta_rho": drho.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        "max_abs_delta_phase": dphase.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        "quantum_pressure": quantum_pressure,
    });
    if compare_bdg {
        let run = evolve_bdg(
            &p.field,
            &p.dv_dh,
            w,
            &BdgOptions { dt: spec.dt, t_end, stride: spec.stride, record_fields: false, seed: None },
        )?;
        let (rho_b, _) = perturbation_to_hydro(&p.field.psi, &run.final_field);
        let num: f64 = drho.iter().zip(&rho_b).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = rho_b.iter().map(|b| b * b).sum();
        details["bdg_density_l2_mismatch"] = json!((num / den).sqrt());
    }
    Ok(PointResult { value: None, energy_change: None, integrated_bound: None, max_bound_ratio: None, details })
}

fn hydrogen_point(
    sink: &Sink,
    bohr_radius: f64,
    n_max: u32,
    elements: &[[String; 2]],
    scan: bool,
) -> Result<PointResult> {
    let hy = Hydrogen::new(bohr_radius, n_max)?;
    let mut rows = Vec::new();
    for [a, b] in elements {
        let (bra, ket) = (HydrogenOrbital::real(a)?, HydrogenOrbital::real(b)?);
        for part in [PerturbationPart::Kinetic, PerturbationPart::Potential, PerturbationPart::Total] {
            let v = hy.converged_element(&bra, &ket, part)?;
            rows.push(ElementRow { bra: a.clone(), ket: b.clone(), part, value_hartree: v.re });
        }
    }
    if let Some(f) = sink.file("elements.csv")? {
        write_elements_csv(&rows, f)?;
    }
    let mut details = json!({ "elements": rows });
    if scan {
        let entries = hy.selection_rule_scan(n_max)?;
        let allowed = entries.iter().filter(|e| e.delta_m.abs() == 2).map(|e| e.value.norm()).fold(0.0, f64::max);
        let forbidden = entries.iter().filter(|e| e.delta_m.abs() != 2).map(|e| e.value.norm()).fold(0.0, f64::max);
        details["scan_pairs"] = json!(entries.len());
        details["scan_max_allowed"] = json!(allowed);
        details["scan_max_forbidden"] = json!(forbidden);
    }
    Ok(PointResult { value: None, energy_change: None, integrated_bound: None, max_bound_ratio: None, details })
}

/// Runs every sweep point (in parallel across `workers` threads) and writes
/// outputs under `out/<name>/` when `out` is given.
pub fn run_scenario(s: &Scenario, raw: &str, out: Option<&Path>, workers: usize) -> Result<ScenarioResult> {
    s.validate()?;
    let hash = super::config_hash(raw)?;
    let dir = match out {
        Some(root) => {
            let d = root.join(&s.name);
            fs::create_dir_all(&d)?;
            Some(d)
        }
        None => None,
    };
    let sink = Sink { dir, hash: hash.clone() };
    let values = s.sweep_values()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;

    let prepared = match &s.backend {
        Backend::Bec { condensate, .. } | Backend::BecHydro { condensate, .. } => Some(prepare_bec(condensate)?),
        _ => None,
    };

    let one = |idx: usize, value: Option<f64>| -> Result<PointResult> {
        let mut r = match &s.backend {
            Backend::Barbell { config, dt, stride } => {
                let w = s.waveform_at(value)?;
                let run = evolve_barbell(config, &w, *dt, w.duration(), *stride)?;
                barbell_point(s, &sink, idx, &w, run)?
            }
            Backend::Scissors { config, dt, stride } => {
                let w = s.waveform_at(value)?;
                let run = evolve_scissors(config, &w, *dt, w.duration(), *stride)?;
                barbell_point(s, &sink, idx, &w, run)?
            }
            Backend::EmMode { wavevector, polarization, dt, stride, general_polarization } => {
                let w = s.waveform_at(value)?;
                let mode = EmMode::adiabatic(*wavevector, *polarization, w.strain(0.0))?;
                let run = evolve_mode(&mode, &w, *dt, w.duration(), *stride)?;
                let energy = |m: &EmMode, h: f64| {
                    let (g, om) = (m.metric_factor(h), m.frequency(h));
                    0.5 * g * (m.amplitude_rate.norm_sqr() + om * om * m.amplitude.norm_sqr())
                };
                let (a, b) = (&run.samples[0], &run.samples[run.samples.len() - 1]);
                let mut details = json!({
                    "max_wronskian_deviation": run.max_wronskian_deviation(),
                    "max_adiabatic_deviation": run.max_adiabatic_deviation(),
                    "outside_adiabatic_regime": run.outside_adiabatic_regime,
                });
                if let Some(pol) = general_polarization {
                    details["general"] = serde_json::to_value(polarization_drift(*wavevector, *pol, &w, *dt, w.duration())?)?;
                }
                PointResult {
                    value: None,
                    energy_change: Some(energy(&b.mode, b.strain) - energy(&a.mode, a.strain)),
                    integrated_bound: None,
                    max_bound_ratio: None,
                    details,
                }
            }
            Backend::Bec { condensate, solver } => {
                let w = s.waveform_at(value)?;
                let p = prepared.as_ref().expect("prepared above");
                bec_point(s, &sink, idx, &w, condensate, solver.unwrap_or(BecSolver::Bdg), p)?
            }
            Backend::BecHydro { condensate, quantum_pressure, mask_vacuum, compare_bdg } => {
                let w = s.waveform_at(value)?;
                let p = prepared.as_ref().expect("prepared above");
                hydro_point(s, &sink, idx, &w, condensate, p, *quantum_pressure, *mask_vacuum, *compare_bdg)?
            }
            Backend::Hydrogen { bohr_radius, n_max, elements, scan } => {
                hydrogen_point(&sink, *bohr_radius, *n_max, elements, *scan)?
            }
            Backend::Estimates { inputs } => PointResult {
                value: None,
                energy_change: None,
                integrated_bound: None,
                max_bound_ratio: None,
                details: serde_json::to_value(report(inputs)?)?,
            },
        };
        r.value = value;
        Ok(r)
    };

    let mut points: Vec<(usize, PointResult)> = pool.install(|| {
        values.par_iter().enumerate().map(|(i, v)| one(i, *v).map(|r| (i, r))).collect::<Result<Vec<_>>>()
    })?;
    points.sort_by(|a, b| {
        let (x, y) = (a.1.value.unwrap_or(f64::NAN), b.1.value.unwrap_or(f64::NAN));
        x.total_cmp(&y).then(a.0.cmp(&b.0))
    });
    let points: Vec<PointResult> = points.into_iter().map(|(_, p)| p).collect();

    let fit = match &s.fit {
        Some(f) => {
            let pts: Vec<(f64, f64)> = points
                .iter()
                .filter_map(|p| Some((p.value?, p.energy_change?)))
                .collect();
            Some(fit_scaling(&pts, f.noise_floor)?)
        }
        None => None,
    };
    let max_ratio = points.iter().filter_map(|p| p.max_bound_ratio).fold(f64::NAN, f64::max);
    let result = ScenarioResult {
        name: s.name.clone(),
        backend: s.backend.kind().into(),
        config_hash: hash,
        points,
        fit,
        summary: json!({ "max_bound_ratio": if max_ratio.is_nan() { None } else { Some(max_ratio) } }),
    };
    if let Some(f) = sink.file("result.json")? {
        serde_json::to_writer_pretty(f, &result)?;
    }
    Ok(result)
}
