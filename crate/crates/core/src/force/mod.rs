//! Friction forces from the instability spectra.
//!
//! Every method integrates over the thin ridges of the `(kx, ky)` plane where
//! pole pairs hybridize. Ridges are located with the selection rules; each is
//! crossed in `kx` by a transverse panel and the ridges are summed along `ky`
//! with a refined trapezoid rule, using evenness in `ky`.

mod ky;
mod ridge;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{Medium, Polarization, Scenario};
use crate::quadrature::{compensated_sum, richardson3};

pub use crate::instability::lambda_spectrum;

use ky::{integrate_ky, support};
use ridge::{ContourSample, RidgeSample};

/// Integration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    /// Largest `kx` searched for selection solutions.
    pub kx_max: f64,
    /// Largest `|ky|` integrated.
    pub ky_max: f64,
    /// Gauss–Legendre nodes per transverse panel.
    pub nx: usize,
    /// Initial number of trapezoid intervals along `ky`.
    pub ny: usize,
    /// Relative tolerance of the `ky` refinement.
    pub rel_tol: f64,
    /// Ridges whose weak-coupling weight is below this fraction of the total at
    /// their `ky` are replaced by that weight, which also enters the error.
    pub ridge_tol: f64,
    /// Check the dominant ridge at every `ky` against the certified mode finder.
    pub certify: bool,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            kx_max: 60.0,
            ky_max: 60.0,
            nx: 16,
            ny: 16,
            rel_tol: 1e-6,
            ridge_tol: 1e-6,
            certify: true,
        }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(positive(self.kx_max) && positive(self.ky_max)) {
            return Err(Error::InvalidInput("grid bounds must be positive".into()));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidInput(
                "grid resolutions must be at least 2".into(),
            ));
        }
        if !(positive(self.rel_tol) && self.ridge_tol >= 0.0 && self.ridge_tol < 1.0) {
            return Err(Error::InvalidInput("grid tolerances out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceMethod {
    ModeSum,
    Contour,
    WeakCoupling,
    PendryC16,
}

impl ForceMethod {
    pub const ALL: [ForceMethod; 4] = [
        ForceMethod::ModeSum,
        ForceMethod::Contour,
        ForceMethod::WeakCoupling,
        ForceMethod::PendryC16,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ForceMethod::ModeSum => "mode_sum",
            ForceMethod::Contour => "contour",
            ForceMethod::WeakCoupling => "weak_coupling",
            ForceMethod::PendryC16 => "pendry_c16",
        }
    }
}

impl std::fmt::Display for ForceMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dimensionless friction force per unit area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceResult {
    /// Magnitude `|F̂|`.
    pub value: f64,
    /// Sign of the force on body 1: `−sgn(v₁ − v₂)`, or 0 for equal velocities.
    pub body1_sign: f64,
    pub pol: Polarization,
    pub method: ForceMethod,
    pub grid: Grid,
    /// Estimated absolute error of `value`.
    pub error: f64,
}

impl ForceResult {
    pub fn body1_force(&self) -> f64 {
        self.body1_sign * self.value
    }

    pub fn body2_force(&self) -> f64 {
        -self.body1_force()
    }
}

/// `⟨F̂⟩(t)` after preparation in the pseudo-ground state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceTimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// One quadrature node of the mode sum: an unstable mode and its weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeNode {
    pub kx: f64,
    pub ky: f64,
    /// Quadrature weight including the `1/(2π)²` prefactor.
    pub weight: f64,
    pub lambda: f64,
    /// `|ω_c|`.
    pub omega_abs: f64,
}

/// The mode-sum quadrature: the force and its time dependence are sums over
/// the same nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeQuadrature {
    pub pol: Polarization,
    pub grid: Grid,
    pub nodes: Vec<ModeNode>,
    /// Estimated absolute error of [`ModeQuadrature::force`].
    pub error: f64,
}

impl ModeQuadrature {
    /// `Σ w·kx·λ`.
    pub fn force(&self) -> f64 {
        compensated_sum(self.nodes.iter().map(|n| n.weight * n.kx * n.lambda))
    }

    /// `Σ w·2λ|ω_c|·|p_wv|` with the wave momentum `|p_wv| = kx/(2|ω_c|)`.
    pub fn first_excitation(&self) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .map(|n| n.weight * 2.0 * n.lambda * n.omega_abs * wave_momentum(n)),
        )
    }

    /// `d⟨F̂⟩/dt` at `t = 0`: `Σ w·2λ²·kx`.
    pub fn initial_slope(&self) -> f64 {
        compensated_sum(
            self.nodes
                .iter()
                .map(|n| n.weight * 2.0 * n.lambda * n.lambda * n.kx),
        )
    }

    /// `⟨F̂⟩(t) = Σ w·kx·λ·sinh(2λt)`.
    pub fn at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "time must be non-negative, got {t}"
            )));
        }
        let mut terms = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let x = 2.0 * n.lambda * t;
            if x > 700.0 {
                return Err(Error::Saturation { exponent: x });
            }
            terms.push(n.weight * n.kx * n.lambda * x.sinh());
        }
        Ok(compensated_sum(terms))
    }

    pub fn time_series(&self, times: &[f64]) -> Result<ForceTimeSeries> {
        let values = times
            .iter()
            .map(|&t| self.at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(ForceTimeSeries {
            times: times.to_vec(),
            values,
        })
    }
}

fn wave_momentum(n: &ModeNode) -> f64 {
    n.kx / (2.0 * n.omega_abs)
}

const FOUR_PI2: f64 = 4.0 * PI * PI;

fn body1_sign(scenario: &Scenario) -> f64 {
    pseudo_momentum_sign(scenario.body1.v, scenario.body2.v).unwrap_or(0.0)
}

fn result(
    scenario: &Scenario,
    pol: Polarization,
    method: ForceMethod,
    grid: &Grid,
    value: f64,
    error: f64,
) -> ForceResult {
    ForceResult {
        value: value.abs(),
        body1_sign: body1_sign(scenario),
        pol,
        method,
        grid: *grid,
        error,
    }
}

/// The mode-sum nodes `(1/(2π)²)∫dky∫dkx kx Σλ` over every instability ridge.
pub fn mode_quadrature(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
) -> Result<ModeQuadrature> {
    grid.validate()?;
    let sup = support(scenario, pol, grid, ridge::weak_weight)?;
    let mut q = ModeQuadrature {
        pol,
        grid: *grid,
        nodes: Vec::new(),
        error: 0.0,
    };
    if sup.end == 0.0 {
        return Ok(q);
    }
    let out = integrate_ky(
        |ky| ridge::mode_sum(scenario, pol, ky, grid, sup.k_ref),
        |s: &RidgeSample| s.value,
        sup.end,
        grid,
    )?;
    let mut error = out.error / FOUR_PI2;
    for node in out.nodes {
        let w = node.weight / FOUR_PI2;
        error += w.abs() * node.data.error;
        q.nodes
            .extend(node.data.nodes.into_iter().map(|n| ModeNode {
                ky: node.ky,
                weight: n.weight * w,
                ..n
            }));
    }
    q.error = error;
    Ok(q)
}

/// `|F̂| = (1/(2π)²)∫dky∫dkx kx Σλ` with `λ` from the Newton-polished hybrid of
/// each pole pair, cross-checked against the certified finder.
pub fn force_mode_sum(pol: Polarization, scenario: &Scenario, grid: &Grid) -> Result<ForceResult> {
    let q = mode_quadrature(pol, scenario, grid)?;
    Ok(result(
        scenario,
        pol,
        ForceMethod::ModeSum,
        grid,
        q.force(),
        q.error,
    ))
}

/// The default largest contour offset, relative to each ridge's `λ₀`.
pub const DEFAULT_ETA: f64 = 0.1;

/// `|F̂|` from `Σλ` computed by the argument principle: the sum of `Im ω` over
/// the zeros of `D` above the line `Im ω = η`, integrated where it is nonzero,
/// for `η = s·λ₀` with `s ∈ {eta, eta/2, eta/4}`, Richardson-extrapolated to
/// `η → 0`.
pub fn force_contour(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
    eta: f64,
) -> Result<ForceResult> {
    grid.validate()?;
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidInput(format!(
            "contour offset must lie in (0, 0.5], got {eta}"
        )));
    }
    let sup = support(scenario, pol, grid, ridge::weak_weight)?;
    if sup.end == 0.0 {
        return Ok(result(scenario, pol, ForceMethod::Contour, grid, 0.0, 0.0));
    }
    let offsets = [eta, eta / 2.0, eta / 4.0];
    let out = integrate_ky(
        |ky| ridge::contour(scenario, pol, ky, grid, sup.k_ref, &offsets),
        |s: &ContourSample| s.values[2],
        sup.end,
        grid,
    )?;
    let mut totals = [0.0; 3];
    let mut quad_error = 0.0;
    for (i, t) in totals.iter_mut().enumerate() {
        *t = compensated_sum(out.nodes.iter().map(|n| n.weight * n.data.values[i])) / FOUR_PI2;
    }
    for n in &out.nodes {
        quad_error += n.weight.abs() * n.data.error / FOUR_PI2;
    }
    quad_error += out.error / FOUR_PI2;
    let (limit, _order, extrapolation) = richardson3(totals, 2.0);
    let tolerance = 1e-2 * limit.abs();
    if extrapolation > tolerance && extrapolation > quad_error {
        return Err(Error::NonConvergence {
            residual: extrapolation,
            tolerance,
        });
    }
    Ok(result(
        scenario,
        pol,
        ForceMethod::Contour,
        grid,
        limit,
        extrapolation + quad_error,
    ))
}

fn ridge_integral<W>(
    scenario: &Scenario,
    pol: Polarization,
    grid: &Grid,
    weight: W,
    method: ForceMethod,
) -> Result<ForceResult>
where
    W: Fn(&Scenario, &crate::instability::SelectionSolution) -> f64 + Sync + Copy,
{
    grid.validate()?;
    let sup = support(scenario, pol, grid, weight)?;
    if sup.end == 0.0 {
        return Ok(result(scenario, pol, method, grid, 0.0, 0.0));
    }
    let out = integrate_ky(
        |ky| ridge::weight_sum(scenario, pol, ky, grid, sup.k_ref, weight),
        |v: &f64| *v,
        sup.end,
        grid,
    )?;
    let value = compensated_sum(out.nodes.iter().map(|n| n.weight * n.data)) / FOUR_PI2;
    Ok(result(
        scenario,
        pol,
        method,
        grid,
        value,
        out.error / FOUR_PI2,
    ))
}

/// Weak-coupling force: each pole pair's band contributes `π·kx·λ₀²/|∂kx(ω₁ − ω₂)|`
/// on its selection curve. Identical bodies keep only same-branch pairs
/// (`ω̃₂ = −ω̃₁`); other scenarios keep every pair.
pub fn force_weak_coupling(pol: Polarization, scenario: &Scenario) -> Result<ForceResult> {
    force_weak_coupling_with(pol, scenario, &Grid::default())
}

pub fn force_weak_coupling_with(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
) -> Result<ForceResult> {
    ridge_integral(
        scenario,
        pol,
        grid,
        ridge::weak_weight_channels,
        ForceMethod::WeakCoupling,
    )
}

/// Pendry's friction formula with the reflection coefficients' imaginary
/// parts collapsed onto their poles: every pole pair contributes
/// `π·kx·e^(−2kd)|b₁b₂|/|∂kx(ω₁ − ω₂)|` on its selection curve.
pub fn force_pendry_c16(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
) -> Result<ForceResult> {
    ridge_integral(
        scenario,
        pol,
        grid,
        ridge::pendry_weight,
        ForceMethod::PendryC16,
    )
}

/// Closed form of [`force_pendry_c16`] for two sheets:
/// `kx₀²·ω₁ω₂·K₁(2d·kx₀)/(8π|Δv|)` with `kx₀ = (ω₁ + ω₂)/|Δv|`.
pub fn pendry_sheet_closed_form(scenario: &Scenario) -> Result<f64> {
    let (Medium::Sheet(a), Medium::Sheet(b)) = (&scenario.body1.medium, &scenario.body2.medium)
    else {
        return Err(Error::InvalidInput("closed form needs two sheets".into()));
    };
    let dv = scenario.relative_velocity().abs();
    if dv == 0.0 {
        return Ok(0.0);
    }
    let kx0 = (a.omega_sp + b.omega_sp) / dv;
    let k1 = puruspe::Kn(1, 2.0 * scenario.d * kx0);
    Ok(kx0 * kx0 * a.omega_sp * b.omega_sp * k1 / (8.0 * PI * dv))
}

/// `⟨F̂⟩(t)` on the mode-sum quadrature.
pub fn force_time_series(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
    times: &[f64],
) -> Result<ForceTimeSeries> {
    mode_quadrature(pol, scenario, grid)?.time_series(times)
}

/// Force associated with creating the first excitation, `Σ 2λ|ω_c||p_wv|`, on
/// the mode-sum quadrature; its magnitude equals the mode sum.
pub fn first_excitation_force(
    pol: Polarization,
    scenario: &Scenario,
    grid: &Grid,
) -> Result<ForceResult> {
    let q = mode_quadrature(pol, scenario, grid)?;
    Ok(result(
        scenario,
        pol,
        ForceMethod::ModeSum,
        grid,
        q.first_excitation(),
        q.error,
    ))
}

/// Matter-to-total force ratio near threshold, `1 − (sign/n + v)²`.
///
/// Requires `n > 1` and `|v| < 1`.
pub fn matter_total_ratio(n: f64, v: f64, sign: f64) -> f64 {
    let x = sign.signum() / n + v;
    1.0 - x * x
}

/// Sign of the pseudo-momentum of body `i`: `−sgn(vᵢ − vⱼ)`.
pub fn pseudo_momentum_sign(v_i: f64, v_j: f64) -> Result<f64> {
    if v_i == v_j {
        return Err(Error::Degenerate(
            "pseudo-momentum sign needs v_i != v_j".into(),
        ));
    }
    Ok(-(v_i - v_j).signum())
}
