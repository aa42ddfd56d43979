//! Integration along `ky`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instability::{solve_selection_with, SelectionOptions, SelectionSolution};
use crate::media::{Polarization, Scenario};

use super::Grid;

/// Ridges below this fraction of the largest weight mark the end of the support.
const SUPPORT_TOL: f64 = 1e-12;

pub(crate) fn selection_options(grid: &Grid) -> SelectionOptions {
    SelectionOptions {
        kx_max: grid.kx_max,
        ..SelectionOptions::default()
    }
}

/// Selection solutions at `ky`, failing when a pair that could matter crosses
/// only beyond `kx_max`. A pair matters unless its attenuation `e^(−2kd)` is
/// below the selection decay relative to wavenumber `k_ref`, by default the
/// smallest at this `ky`.
pub(crate) fn ridges(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    grid: &Grid,
    k_ref: Option<f64>,
) -> Result<Vec<SelectionSolution>> {
    let opts = selection_options(grid);
    let scan = solve_selection_with(scenario, pol, ky, &opts)?;
    if scan.truncated {
        let reach = (1.0 / opts.decay).ln() / (2.0 * scenario.d);
        let relevant = match k_ref.or_else(|| scan.solutions.iter().map(|s| s.k).reduce(f64::min)) {
            Some(k_min) => grid.kx_max.hypot(ky) < k_min + reach,
            None => grid.kx_max * scenario.d < reach,
        };
        if relevant {
            return Err(Error::SupportTruncation {
                kx: grid.kx_max,
                ky,
                lambda: (-grid.kx_max * scenario.d).exp(),
            });
        }
    }
    Ok(scan.solutions)
}

/// Extent of the ridges along `ky`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Support {
    /// Beyond `end` every ridge's weight is below `10⁻¹²` of the largest; zero
    /// when there is no ridge at all.
    pub end: f64,
    /// Smallest wavenumber on any ridge, reached at `ky = 0`.
    pub k_ref: Option<f64>,
}

pub(crate) fn support<W>(
    scenario: &Scenario,
    pol: Polarization,
    grid: &Grid,
    weight: W,
) -> Result<Support>
where
    W: Fn(&Scenario, &SelectionSolution) -> f64 + Sync,
{
    let at_zero = ridges(scenario, pol, 0.0, grid, None)?;
    let k_ref = at_zero.iter().map(|s| s.k).reduce(f64::min);
    let end = support_end(scenario, pol, grid, weight, k_ref)?;
    Ok(Support { end, k_ref })
}

fn support_end<W>(
    scenario: &Scenario,
    pol: Polarization,
    grid: &Grid,
    weight: W,
    k_ref: Option<f64>,
) -> Result<f64>
where
    W: Fn(&Scenario, &SelectionSolution) -> f64 + Sync,
{
    let total = |ky: f64| -> Result<f64> {
        Ok(ridges(scenario, pol, ky, grid, k_ref)?
            .iter()
            .map(|s| weight(scenario, s))
            .sum())
    };
    let Some(k_min) = k_ref else {
        return Ok(0.0);
    };
    let reach = (1.0 / selection_options(grid).decay).ln() / (2.0 * scenario.d);
    let mut top = grid.ky_max.min(k_min + reach);
    let n = 32;
    for _ in 0..12 {
        let h = top / n as f64;
        let w = (0..=n)
            .into_par_iter()
            .map(|i| total(i as f64 * h))
            .collect::<Result<Vec<_>>>()?;
        let max = w.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(0.0);
        }
        let last = w
            .iter()
            .rposition(|x| *x > SUPPORT_TOL * max)
            .expect("max is positive");
        if last == n && top >= grid.ky_max {
            let sol = ridges(scenario, pol, top, grid, k_ref)?;
            let (kx, lambda) = sol.first().map_or((0.0, 0.0), |s| (s.kx, s.lambda_0));
            return Err(Error::SupportTruncation {
                kx,
                ky: top,
                lambda,
            });
        }
        if last >= 2 {
            return Ok(((last + 1).min(n) as f64) * h);
        }
        top = 2.0 * h;
    }
    Ok(top)
}

pub(crate) struct KyNode<T> {
    pub ky: f64,
    /// Trapezoid weight, doubled for the mirror node at `−ky`.
    pub weight: f64,
    pub data: T,
}

pub(crate) struct KyIntegral<T> {
    pub nodes: Vec<KyNode<T>>,
    /// Difference between the last two refinements.
    pub error: f64,
}

/// Trapezoid rule on `[0, end]` for an even integrand, doubling the number of
/// intervals from `grid.ny` until successive values of `value` agree to
/// `grid.rel_tol`, at most six times. Nodes are evaluated concurrently and
/// kept in ascending order.
pub(crate) fn integrate_ky<T, F, V>(f: F, value: V, end: f64, grid: &Grid) -> Result<KyIntegral<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
    V: Fn(&T) -> f64,
{
    let eval = |kys: Vec<f64>| -> Result<Vec<(f64, T)>> {
        kys.into_par_iter().map(|ky| Ok((ky, f(ky)?))).collect()
    };
    let mut n = grid.ny;
    let mut h = end / n as f64;
    let mut pts = eval((0..=n).map(|i| i as f64 * h).collect())?;
    let trapezoid = |pts: &[(f64, T)], h: f64| -> f64 {
        let inner: f64 = pts.iter().map(|p| value(&p.1)).sum();
        2.0 * h * (inner - 0.5 * (value(&pts[0].1) + value(&pts[pts.len() - 1].1)))
    };
    let mut previous = trapezoid(&pts, h);
    let mut error = f64::INFINITY;
    for _ in 0..6 {
        let fresh = eval((0..n).map(|i| (i as f64 + 0.5) * h).collect())?;
        let mut merged = Vec::with_capacity(2 * n + 1);
        let mut fresh = fresh.into_iter();
        for (i, p) in pts.into_iter().enumerate() {
            merged.push(p);
            if i < n {
                merged.push(fresh.next().expect("one fresh node per interval"));
            }
        }
        pts = merged;
        n *= 2;
        h /= 2.0;
        let current = trapezoid(&pts, h);
        error = (current - previous).abs();
        previous = current;
        if error <= grid.rel_tol * current.abs() {
            break;
        }
    }
    let last = pts.len() - 1;
    let nodes = pts
        .into_iter()
        .enumerate()
        .map(|(i, (ky, data))| {
            let w = if i == 0 || i == last { h } else { 2.0 * h };
            KyNode {
                ky,
                weight: w,
                data,
            }
        })
        .collect();
    Ok(KyIntegral { nodes, error })
}
