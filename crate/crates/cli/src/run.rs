//! Command dispatch: each command turns a [`RunConfig`] into a [`Table`].

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use vacdrag_core::force::{
    force_contour, force_mode_sum, force_pendry_c16, force_weak_coupling_with, mode_quadrature,
    pendry_sheet_closed_form,
};
use vacdrag_core::instability::{find_complex_modes, solve_selection};
use vacdrag_core::modes::{cutoff_k, trace_branch};
use vacdrag_core::units::FORCE_CONVENTION;
use vacdrag_core::{Error, ForceMethod, ForceResult, Medium, Polarization, Result, Scenario};

use crate::config::{Command, Range, RunConfig};
use crate::output::{format_float, Cell, Table};

/// Default wavenumber range of the `modes` command.
const MODES_K: Range = Range {
    start: 0.05,
    stop: 4.0,
    steps: 80,
};
/// Samples across the band of the `hybrid` command when no `k_grid` is given.
const HYBRID_STEPS: usize = 61;
/// Half-widths of the band covered by the default `hybrid` range.
const HYBRID_SPAN: f64 = 3.0;
const EVOLVE_STEPS: usize = 41;

/// SHA-256 of the canonical configuration, in hex.
pub fn config_hash(config: &RunConfig) -> String {
    Sha256::digest(config.canonical_json().as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn header(config: &RunConfig, table: &mut Table) {
    table.meta("vacdrag", env!("CARGO_PKG_VERSION"));
    table.meta("command", config.command.as_str());
    table.meta("config_sha256", config_hash(config));
    table.meta("config", config.canonical_json());
    table.meta("units", "c = hbar = h_s = 1");
    table.meta("force_convention", FORCE_CONVENTION);
    table.meta("h_s_meters", format_float(config.units.h_s_meters));
}

pub fn run(config: &RunConfig) -> Result<Table> {
    let mut table = match config.command {
        Command::Modes => modes(config)?,
        Command::Hybrid => hybrid(config)?,
        Command::ForceSweep => force_sweep(config)?,
        Command::Pendry => pendry(config)?,
        Command::Evolve => evolve(config)?,
    };
    let mut meta = Table::new(Vec::new());
    header(config, &mut meta);
    meta.metadata.append(&mut table.metadata);
    table.metadata = meta.metadata;
    Ok(table)
}

fn modes(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(vec![
        "body", "pol", "branch", "k", "omega_co", "n_ph", "residue", "v_g_co",
    ]);
    let ks = config.k_grid.unwrap_or(MODES_K);
    t.meta(
        "k_grid",
        format!(
            "{} to {} in {} steps",
            format_float(ks.start),
            format_float(ks.stop),
            ks.steps
        ),
    );
    let s = &config.scenario;
    let mut bodies = vec![(1usize, s.body1.medium)];
    if s.body2.medium != s.body1.medium {
        bodies.push((2, s.body2.medium));
    }
    let grid = ks.values();
    for (index, medium) in bodies {
        let Medium::Slab(slab) = medium else {
            return Err(Error::InvalidInput("modes requires slab media".into()));
        };
        for &pol in &config.polarizations {
            for m in 0.. {
                let cut = cutoff_k(&slab, pol, m);
                if cut >= ks.stop {
                    break;
                }
                let above: Vec<f64> = grid
                    .iter()
                    .copied()
                    .filter(|&k| k > cut * (1.0 + 1e-9))
                    .collect();
                if above.is_empty() {
                    continue;
                }
                for p in trace_branch(&slab, pol, m, &above)?.points {
                    t.push(vec![
                        index.into(),
                        pol.to_string().into(),
                        m.into(),
                        p.k.into(),
                        p.omega_co.into(),
                        p.n_ph.into(),
                        p.residue.into(),
                        p.v_g_co.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

/// `kx` samples for `hybrid`: the configured grid, or the band of the pair
/// with the largest weak-coupling rate.
fn hybrid_grid(config: &RunConfig, pol: Polarization) -> Result<Vec<f64>> {
    if let Some(k) = config.k_grid {
        return Ok(k.values());
    }
    let sols = solve_selection(&config.scenario, pol, config.ky)?;
    let Some(top) = sols.iter().max_by(|a, b| a.lambda_0.total_cmp(&b.lambda_0)) else {
        return Ok(Vec::new());
    };
    let hw = top.half_width();
    let r = Range {
        start: top.kx - HYBRID_SPAN * hw,
        stop: top.kx + HYBRID_SPAN * hw,
        steps: HYBRID_STEPS,
    };
    Ok(r.values())
}

fn hybrid(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(vec!["kx", "ky", "pol", "omega_re", "lambda", "lambda0"]);
    let ky = config.ky;
    for &pol in &config.polarizations {
        let kxs = hybrid_grid(config, pol)?;
        let found = kxs
            .par_iter()
            .map(|&kx| find_complex_modes(pol, &config.scenario, kx, ky).map(|m| (kx, m)))
            .collect::<Result<Vec<_>>>()?;
        for (kx, mut modes) in found {
            modes.sort_by(|a, b| a.omega_c.re.total_cmp(&b.omega_c.re));
            if modes.is_empty() {
                t.push(vec![
                    kx.into(),
                    ky.into(),
                    pol.to_string().into(),
                    Cell::Empty,
                    0.0.into(),
                    Cell::Empty,
                ]);
            }
            for m in modes {
                t.push(vec![
                    kx.into(),
                    ky.into(),
                    pol.to_string().into(),
                    m.omega_c.re.into(),
                    m.lambda().into(),
                    m.lambda_0.into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn force(
    config: &RunConfig,
    method: ForceMethod,
    pol: Polarization,
    s: &Scenario,
) -> Result<ForceResult> {
    let g = &config.grid;
    match method {
        ForceMethod::ModeSum => force_mode_sum(pol, s, g),
        ForceMethod::Contour => force_contour(pol, s, g, config.eta),
        ForceMethod::WeakCoupling => force_weak_coupling_with(pol, s, g),
        ForceMethod::PendryC16 => force_pendry_c16(pol, s, g),
    }
}

fn force_sweep(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(vec![
        "x",
        "v1",
        "v2",
        "pol",
        "method",
        "force",
        "body1_force",
        "error",
        "force_si",
    ]);
    let mut worst: f64 = 0.0;
    for (x, s) in config.points()? {
        for &pol in &config.polarizations {
            for &method in &config.methods {
                let f = force(config, method, pol, &s)?;
                worst = worst.max(f.error);
                t.push(vec![
                    x.into(),
                    s.body1.v.into(),
                    s.body2.v.into(),
                    pol.to_string().into(),
                    method.as_str().into(),
                    f.value.into(),
                    f.body1_force().into(),
                    f.error.into(),
                    config.units.force_to_si(f.value).into(),
                ]);
            }
        }
    }
    t.meta("quadrature_error_max", format_float(worst));
    Ok(t)
}

fn pendry(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(vec![
        "x",
        "v1",
        "v2",
        "d",
        "pol",
        "contour",
        "contour_error",
        "pendry_c16",
        "pendry_error",
        "closed_form",
        "relative_difference",
    ]);
    let mut worst: f64 = 0.0;
    for (x, s) in config.points()? {
        let closed = (!s.is_slabs())
            .then(|| pendry_sheet_closed_form(&s))
            .transpose()?;
        for &pol in &config.polarizations {
            let c = force_contour(pol, &s, &config.grid, config.eta)?;
            let p = force_pendry_c16(pol, &s, &config.grid)?;
            worst = worst.max(c.error).max(p.error);
            let rel = if c.value > 0.0 {
                Some((c.value - p.value).abs() / c.value)
            } else {
                None
            };
            t.push(vec![
                x.into(),
                s.body1.v.into(),
                s.body2.v.into(),
                s.d.into(),
                pol.to_string().into(),
                c.value.into(),
                c.error.into(),
                p.value.into(),
                p.error.into(),
                closed.into(),
                rel.into(),
            ]);
        }
    }
    t.meta("quadrature_error_max", format_float(worst));
    Ok(t)
}

fn evolve(config: &RunConfig) -> Result<Table> {
    let mut t = Table::new(vec!["t", "pol", "force", "force_si"]);
    let mut worst: f64 = 0.0;
    for &pol in &config.polarizations {
        let q = mode_quadrature(pol, &config.scenario, &config.grid)?;
        worst = worst.max(q.error);
        let times = match config.times {
            Some(r) => r.values(),
            None => {
                let top = q.nodes.iter().map(|n| n.lambda).fold(0.0, f64::max);
                let stop = if top > 0.0 { 2.0 / top } else { 1.0 };
                t.meta(
                    &format!("times_{pol}"),
                    format!("0 to {} in {EVOLVE_STEPS} steps", format_float(stop)),
                );
                Range {
                    start: 0.0,
                    stop,
                    steps: EVOLVE_STEPS,
                }
                .values()
            }
        };
        for (time, f) in times.iter().zip(q.time_series(&times)?.values) {
            t.push(vec![
                (*time).into(),
                pol.to_string().into(),
                f.into(),
                config.units.force_to_si(f).into(),
            ]);
        }
    }
    t.meta("quadrature_error_max", format_float(worst));
    Ok(t)
}
