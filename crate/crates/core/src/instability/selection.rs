//! Pole pairs that satisfy the selection rules: equal lab-frame frequencies
//! and opposite-sign co-moving frequencies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::media::{Medium, Polarization, Scenario, SlabMedium};
use crate::modes::{self, sheet_residue};
use crate::roots::brent;

use super::{gap_factor_real, threshold_velocity};

/// A hybridizing pole pair at `(kx, ky)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionSolution {
    pub kx: f64,
    pub ky: f64,
    pub k: f64,
    /// Signed co-moving pole frequency of body 1.
    pub omega_co_1: f64,
    /// Signed co-moving pole frequency of body 2.
    pub omega_co_2: f64,
    pub branch_1: usize,
    pub branch_2: usize,
    pub residue_1: f64,
    pub residue_2: f64,
    /// The common lab-frame frequency.
    pub omega_lab: f64,
    /// `∂(ω₁ − ω₂)/∂kx` at fixed `ky`, lab frame.
    pub slope: f64,
    /// Weak-coupling growth rate `√(g|b₁b₂|)` with the scenario's gap factor `g`.
    pub lambda_0: f64,
}

impl SelectionSolution {
    /// Half-width in `kx` of the weak-coupling instability band.
    pub fn half_width(&self) -> f64 {
        2.0 * self.lambda_0 / self.slope.abs()
    }

    pub fn pair(&self) -> PairId {
        PairId {
            branch_1: self.branch_1,
            positive_1: self.omega_co_1 > 0.0,
            branch_2: self.branch_2,
            positive_2: self.omega_co_2 > 0.0,
        }
    }
}

/// Identifies a pole pair independently of the wavevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairId {
    pub branch_1: usize,
    pub positive_1: bool,
    pub branch_2: usize,
    pub positive_2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionOptions {
    /// Largest `kx` searched.
    pub kx_max: f64,
    /// Pairs whose gap attenuation `e^(−2kd)` falls below this fraction of the
    /// least attenuated solution are dropped.
    pub decay: f64,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        Self {
            kx_max: 60.0,
            decay: 1e-10,
        }
    }
}

/// Solutions plus a flag raised when a relevant pair crosses only beyond `kx_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionScan {
    pub solutions: Vec<SelectionSolution>,
    pub truncated: bool,
}

/// `kx = −(ω̃₂ − ω̃₁)/(v₂ − v₁)`.
pub fn selection_kx(omega_co_1: f64, omega_co_2: f64, v1: f64, v2: f64) -> Result<f64> {
    if v1 == v2 {
        return Err(Error::Degenerate("selection rule needs v1 != v2".into()));
    }
    Ok(-(omega_co_2 - omega_co_1) / (v2 - v1))
}

/// All selection-rule solutions with `kx > 0` at transverse wavenumber `ky`.
pub fn solve_selection(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
) -> Result<Vec<SelectionSolution>> {
    Ok(solve_selection_with(scenario, pol, ky, &SelectionOptions::default())?.solutions)
}

pub fn solve_selection_with(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    opts: &SelectionOptions,
) -> Result<SelectionScan> {
    let dv = scenario.relative_velocity();
    let mut scan = SelectionScan {
        solutions: Vec::new(),
        truncated: false,
    };
    if dv == 0.0 {
        return Ok(scan);
    }
    match (&scenario.body1.medium, &scenario.body2.medium) {
        (Medium::Slab(a), Medium::Slab(b)) => slab_pairs(scenario, pol, ky, a, b, opts, &mut scan)?,
        (Medium::Sheet(a), Medium::Sheet(b)) => {
            let s1 = dv.signum();
            let kx = (a.omega_sp + b.omega_sp) / dv.abs();
            if kx > opts.kx_max {
                scan.truncated = true;
            } else {
                let k = kx.hypot(ky);
                let (w1, w2) = (s1 * a.omega_sp, -s1 * b.omega_sp);
                let (b1, b2) = (sheet_residue(a, w1), sheet_residue(b, w2));
                let omega_lab = w1 + scenario.body1.v * kx;
                let g = gap_factor_real(scenario, k, omega_lab);
                scan.solutions.push(SelectionSolution {
                    kx,
                    ky,
                    k,
                    omega_co_1: w1,
                    omega_co_2: w2,
                    branch_1: 0,
                    branch_2: 0,
                    residue_1: b1,
                    residue_2: b2,
                    omega_lab,
                    slope: scenario.body1.v - scenario.body2.v,
                    lambda_0: (g * (b1 * b2).abs()).sqrt(),
                });
            }
        }
        _ => {
            return Err(Error::InvalidInput(
                "bodies must be of the same kind".into(),
            ))
        }
    }
    scan.solutions.sort_by(|a, b| {
        a.kx.total_cmp(&b.kx)
            .then(a.branch_1.cmp(&b.branch_1))
            .then(a.branch_2.cmp(&b.branch_2))
    });
    Ok(scan)
}

fn kappa_floor(pol: Polarization, m: usize, slab: &SlabMedium) -> f64 {
    let x = match pol {
        Polarization::P => m as f64 * std::f64::consts::PI,
        Polarization::S => (m as f64 + 0.5) * std::f64::consts::PI,
    };
    x / slab.h
}

/// Lab frequencies coincide on `ω̃₁(k) + ω̃₂(k) = |Δv|·kx`. Since every
/// `ω̃ₘ(k)/k` decreases along its branch and `k/kx` decreases in `kx`, the
/// left side over `kx` decreases monotonically and each pair has at most one
/// solution, bracketed below by the pair's cutoffs and by
/// `ω̃ₘ ≥ √(κₘ² + k²)/n` with `κₘ` the bottom of the branch's bracket.
fn slab_pairs(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    s1: &SlabMedium,
    s2: &SlabMedium,
    opts: &SelectionOptions,
    scan: &mut SelectionScan,
) -> Result<()> {
    let dv = scenario.relative_velocity();
    let adv = dv.abs();
    let rho = adv / threshold_velocity(s1.n_d, s2.n_d);
    if rho <= 1.0 {
        return Ok(());
    }
    let ky = ky.abs();
    let kx_floor = ky / (rho * rho - 1.0).sqrt();
    let kx_max = opts.kx_max;
    if kx_floor >= kx_max {
        scan.truncated = true;
        return Ok(());
    }
    let decay_k = (1.0 / opts.decay).ln() / (2.0 * scenario.d);
    let mut k_limit = kx_max.hypot(ky);
    let sign1 = dv.signum();

    // Smallest kx at which the pair's lower bound can reach the line |Δv|·kx.
    let lower_bound = |m: usize, n: usize| -> Option<f64> {
        let (a, b) = (kappa_floor(pol, m, s1), kappa_floor(pol, n, s2));
        let lb = |kx: f64| {
            let k2 = kx * kx + ky * ky;
            (a * a + k2).sqrt() / s1.n_d + (b * b + k2).sqrt() / s2.n_d - adv * kx
        };
        let lo = kx_floor.max(1e-12);
        if lb(kx_max) > 0.0 {
            return None;
        }
        if lb(lo) <= 0.0 {
            return Some(lo);
        }
        brent(lb, lo, kx_max, 1e-12 * kx_max, 200).ok()
    };

    let mut m = 0;
    while let Some(kx_m0) = lower_bound(m, 0) {
        if kx_m0.hypot(ky) > k_limit {
            break;
        }
        let mut n = 0;
        while let Some(kx_lb) = lower_bound(m, n) {
            if kx_lb.hypot(ky) > k_limit {
                break;
            }
            let kc = modes::cutoff_k(s1, pol, m).max(modes::cutoff_k(s2, pol, n));
            let kx_cut = (kc * kc - ky * ky).max(0.0).sqrt() * (1.0 + 1e-12);
            let kx_a = kx_lb.max(kx_cut).max(kx_floor);
            let q = |kx: f64| {
                let k = kx.hypot(ky);
                match (
                    modes::pole_frequency(s1, pol, m, k),
                    modes::pole_frequency(s2, pol, n, k),
                ) {
                    (Some(w1), Some(w2)) => w1 + w2 - adv * kx,
                    _ => f64::NAN,
                }
            };
            if kx_a < kx_max && q(kx_max) > 0.0 {
                scan.truncated = true;
            } else if kx_a < kx_max && q(kx_a) >= 0.0 {
                let kx = brent(q, kx_a, kx_max, 1e-14 * kx_max, 300)?;
                let sol = build_solution(scenario, pol, s1, s2, m, n, sign1, kx, ky)?;
                k_limit = k_limit.min(sol.k + decay_k);
                scan.solutions.push(sol);
            }
            n += 1;
        }
        m += 1;
    }
    let k_min = scan
        .solutions
        .iter()
        .map(|s| s.k)
        .fold(f64::INFINITY, f64::min);
    scan.solutions.retain(|s| s.k <= k_min + decay_k);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_solution(
    scenario: &Scenario,
    pol: Polarization,
    s1: &SlabMedium,
    s2: &SlabMedium,
    m: usize,
    n: usize,
    sign1: f64,
    kx: f64,
    ky: f64,
) -> Result<SelectionSolution> {
    let k = kx.hypot(ky);
    let lost = |b| Error::BranchLost { branch: b, k };
    let w1 = modes::pole_frequency(s1, pol, m, k).ok_or(lost(m))?;
    let w2 = modes::pole_frequency(s2, pol, n, k).ok_or(lost(n))?;
    let b1 = modes::residue_at_pole(s1, pol, k, w1)?;
    let b2 = modes::residue_at_pole(s2, pol, k, w2)?;
    let g1 = modes::group_velocity(s1, pol, k, w1);
    let g2 = modes::group_velocity(s2, pol, k, w2);
    let (v1, v2) = (scenario.body1.v, scenario.body2.v);
    let omega_co_1 = sign1 * w1;
    let omega_co_2 = -sign1 * w2;
    let omega_lab = omega_co_1 + v1 * kx;
    // Residues flip sign with the pole frequency.
    let (residue_1, residue_2) = (sign1 * b1, -sign1 * b2);
    let slope = sign1 * (g1 + g2) * kx / k + (v1 - v2);
    let g = gap_factor_real(scenario, k, omega_lab);
    Ok(SelectionSolution {
        kx,
        ky,
        k,
        omega_co_1,
        omega_co_2,
        branch_1: m,
        branch_2: n,
        residue_1,
        residue_2,
        omega_lab,
        slope,
        lambda_0: (g * (residue_1 * residue_2).abs()).sqrt(),
    })
}
