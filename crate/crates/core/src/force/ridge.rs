//! Transverse integrals across the instability ridges at fixed `ky`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::argument::{sum_imag_zeros, Rect};
use crate::error::{Error, Result};
use crate::instability::{
    all_lab_pole_frequencies, branch_pole, find_complex_modes, gap_factor_real, pair_mode,
    Characteristic, PairId, SelectionSolution, MIN_RATE,
};
use crate::media::{Polarization, Scenario};
use crate::quadrature::{compensated_sum, composite_rule, gauss_legendre, gk15, map_rule};
use crate::roots::illinois;

use super::ky::ridges;
use super::{Grid, ModeNode};

/// Weak-coupling integral of `kx·λ` across a ridge: `π·kx·λ₀²/|slope|`.
pub(crate) fn weak_weight(_: &Scenario, s: &SelectionSolution) -> f64 {
    PI * s.kx * s.lambda_0 * s.lambda_0 / s.slope.abs()
}

/// [`weak_weight`] restricted to same-branch pairs when the bodies are identical.
pub(crate) fn weak_weight_channels(scenario: &Scenario, s: &SelectionSolution) -> f64 {
    if scenario.identical_media() && s.branch_1 != s.branch_2 {
        0.0
    } else {
        weak_weight(scenario, s)
    }
}

/// [`weak_weight`] with the quasistatic attenuation `e^(−2kd)`.
pub(crate) fn pendry_weight(scenario: &Scenario, s: &SelectionSolution) -> f64 {
    PI * s.kx * (-2.0 * s.k * scenario.d).exp() * (s.residue_1 * s.residue_2).abs() / s.slope.abs()
}

pub(crate) fn weight_sum<W>(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    grid: &Grid,
    k_ref: Option<f64>,
    weight: W,
) -> Result<f64>
where
    W: Fn(&Scenario, &SelectionSolution) -> f64,
{
    Ok(compensated_sum(
        ridges(scenario, pol, ky, grid, k_ref)?
            .iter()
            .map(|s| weight(scenario, s)),
    ))
}

/// Ridges worth integrating, and the summed weight of those that are not.
fn split_ridges(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    grid: &Grid,
    k_ref: Option<f64>,
) -> Result<(Vec<SelectionSolution>, Vec<SelectionSolution>)> {
    let all = ridges(scenario, pol, ky, grid, k_ref)?;
    let total: f64 = all.iter().map(|s| weak_weight(scenario, s)).sum();
    Ok(all.into_iter().partition(|s| {
        weak_weight(scenario, s) >= grid.ridge_tol * total && s.lambda_0 >= 10.0 * MIN_RATE * s.k
    }))
}

/// The ridge integral `∫dkx kx Σλ` at one `ky`, with its nodes.
pub(crate) struct RidgeSample {
    pub value: f64,
    pub error: f64,
    /// Nodes with weights of the `kx` integral only.
    pub nodes: Vec<ModeNode>,
}

/// `λ` of the hybrid grown from `pair`, zero where it is stable or the branch
/// does not exist.
fn pair_lambda(
    scenario: &Scenario,
    pol: Polarization,
    pair: &PairId,
    kx: f64,
    ky: f64,
) -> Result<Option<Complex64>> {
    match pair_mode(scenario, pol, pair, kx, ky) {
        Ok(z) => Ok(z),
        Err(Error::BranchLost { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// The `kx` interval where the pair's hybrid is unstable, located by bisection
/// outward from the selection point.
fn band(
    scenario: &Scenario,
    pol: Polarization,
    sol: &SelectionSolution,
) -> Result<Option<(f64, f64)>> {
    let pair = sol.pair();
    let unstable = |kx: f64| -> Result<bool> {
        Ok(kx > 0.0 && pair_lambda(scenario, pol, &pair, kx, sol.ky)?.is_some())
    };
    let hw = sol.half_width();
    let Some(centre) = [sol.kx, sol.kx - 0.5 * hw, sol.kx + 0.5 * hw]
        .into_iter()
        .find(|&x| unstable(x).unwrap_or(false))
    else {
        return Ok(None);
    };
    let edge = |dir: f64| -> Result<f64> {
        let (mut inner, mut step) = (centre, hw);
        let mut outer = centre + dir * step;
        let mut expansions = 0;
        while unstable(outer)? {
            inner = outer;
            step *= 1.5;
            outer = centre + dir * step;
            expansions += 1;
            if expansions > 40 {
                return Err(Error::NonConvergence {
                    residual: step,
                    tolerance: hw,
                });
            }
        }
        for _ in 0..40 {
            let mid = 0.5 * (inner + outer);
            if unstable(mid)? {
                inner = mid;
            } else {
                outer = mid;
            }
        }
        Ok(inner)
    };
    Ok(Some((edge(-1.0)?, edge(1.0)?)))
}

/// Pseudo-node carrying a ridge's weak-coupling weight.
fn weak_node(scenario: &Scenario, s: &SelectionSolution) -> ModeNode {
    let w = weak_weight(scenario, s);
    ModeNode {
        kx: s.kx,
        ky: s.ky,
        weight: w / (s.kx * s.lambda_0),
        lambda: s.lambda_0,
        omega_abs: s.omega_lab.hypot(s.lambda_0),
    }
}

pub(crate) fn mode_sum(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    grid: &Grid,
    k_ref: Option<f64>,
) -> Result<RidgeSample> {
    let (kept, pruned) = split_ridges(scenario, pol, ky, grid, k_ref)?;
    let mut nodes: Vec<ModeNode> = pruned.iter().map(|s| weak_node(scenario, s)).collect();
    let mut error: f64 = pruned.iter().map(|s| weak_weight(scenario, s)).sum();
    let primary = composite_rule(&gauss_legendre(grid.nx), 0.0, PI, 2);
    let check = map_rule(&gauss_legendre(grid.nx), 0.0, PI);
    let mut bands = Vec::with_capacity(kept.len());
    for sol in &kept {
        let Some((lo, hi)) = band(scenario, pol, sol)? else {
            error += weak_weight(scenario, sol);
            continue;
        };
        bands.push((sol, lo, hi));
        let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let pair = sol.pair();
        let sample = |theta: f64| -> Result<Option<ModeNode>> {
            let kx = m - h * theta.cos();
            Ok(
                pair_lambda(scenario, pol, &pair, kx, ky)?.map(|z| ModeNode {
                    kx,
                    ky,
                    weight: h * theta.sin(),
                    lambda: z.im,
                    omega_abs: z.norm(),
                }),
            )
        };
        let mut value = Vec::with_capacity(primary.len());
        for &(theta, w) in &primary {
            if let Some(mut n) = sample(theta)? {
                n.weight *= w;
                value.push(n.weight * n.kx * n.lambda);
                nodes.push(n);
            }
        }
        let mut coarse = Vec::with_capacity(check.len());
        for &(theta, w) in &check {
            if let Some(n) = sample(theta)? {
                coarse.push(w * n.weight * n.kx * n.lambda);
            }
        }
        error += (compensated_sum(value) - compensated_sum(coarse)).abs();
    }
    if grid.certify {
        certify(scenario, pol, ky, &bands, &pruned)?;
    }
    let value = compensated_sum(nodes.iter().map(|n| n.weight * n.kx * n.lambda));
    Ok(RidgeSample {
        value,
        error,
        nodes,
    })
}

/// Compares the pair hybrids at the centre of the dominant band with the
/// certified zeros of `D`, counting rates above a hundredth of the largest.
fn certify(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    bands: &[(&SelectionSolution, f64, f64)],
    pruned: &[SelectionSolution],
) -> Result<()> {
    let Some(&(_, lo, hi)) = bands
        .iter()
        .max_by(|a, b| weak_weight(scenario, a.0).total_cmp(&weak_weight(scenario, b.0)))
    else {
        return Ok(());
    };
    let kx = 0.5 * (lo + hi);
    let mut from_pairs = Vec::new();
    for (s, lo, hi) in bands {
        if kx > *lo && kx < *hi {
            if let Some(z) = pair_lambda(scenario, pol, &s.pair(), kx, ky)? {
                from_pairs.push(z.im);
            }
        }
    }
    let certified: Vec<f64> = find_complex_modes(pol, scenario, kx, ky)?
        .iter()
        .map(|m| m.lambda())
        .collect();
    let top = from_pairs
        .iter()
        .chain(&certified)
        .copied()
        .fold(0.0, f64::max);
    let big = |v: &[f64]| compensated_sum(v.iter().copied().filter(|l| *l > 1e-2 * top));
    let slack: f64 = pruned
        .iter()
        .filter(|s| (s.kx - kx).abs() < 2.0 * s.half_width())
        .map(|s| s.lambda_0)
        .sum::<f64>()
        + 1e-6 * top;
    if (big(&from_pairs) - big(&certified)).abs() > slack {
        return Err(Error::CertificationFailed {
            kx,
            ky,
            found: from_pairs.len(),
            counted: certified.len() as i64,
        });
    }
    Ok(())
}

/// The ridge integrals `∫dkx kx Σ_{λ>η} λ` at one `ky` for each contour offset.
pub(crate) struct ContourSample {
    pub values: [f64; 3],
    pub error: f64,
}

/// `Σ Im ω` over the zeros of `D` in a rectangle above `bottom` around the
/// pair's lab frequency, to absolute accuracy `tol`. A bottom edge grazing a
/// zero is moved.
fn local_sum(
    scenario: &Scenario,
    pol: Polarization,
    sol: &SelectionSolution,
    kx: f64,
    bottom: f64,
    tol: f64,
) -> Result<f64> {
    let ky = sol.ky;
    let k = kx.hypot(ky);
    let pair = sol.pair();
    let poles = branch_pole(
        &scenario.body1.medium,
        pol,
        pair.branch_1,
        pair.positive_1,
        k,
    )
    .and_then(|p1| {
        Ok((
            p1,
            branch_pole(
                &scenario.body2.medium,
                pol,
                pair.branch_2,
                pair.positive_2,
                k,
            )?,
        ))
    });
    let ((w1, b1), (w2, b2)) = match poles {
        Ok(p) => p,
        Err(Error::BranchLost { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let (l1, l2) = (w1 + scenario.body1.v * kx, w2 + scenario.body2.v * kx);
    let mid = 0.5 * (l1 + l2);
    let rate = (gap_factor_real(scenario, k, mid) * (b1 * b2).abs())
        .sqrt()
        .max(sol.lambda_0);
    let reach = 4.0 * rate + 0.5 * (l1 - l2).abs();
    let (lo, hi) = (mid - reach, mid + reach);
    let mut hints: Vec<f64> = all_lab_pole_frequencies(scenario, pol, kx, k)
        .into_iter()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    hints.push(mid);
    hints.sort_by(f64::total_cmp);
    let ch = Characteristic::new(scenario, pol, kx, ky);
    let mut last = None;
    for factor in [1.0, 0.8, 1.25, 0.6] {
        let rect = Rect::new(lo, hi, bottom * factor, 3.0 * rate)?;
        match sum_imag_zeros(&|z| ch.eval(z), &rect, &hints, tol.max(1e-6 * rate)) {
            Ok(m) => return Ok(m.sum_im),
            Err(e @ Error::BoundaryTooClose { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("set on retry"))
}

/// Quadratic through three points, as `(c₀, c₁, c₂)` in powers of `x − x₀`.
fn quadratic(x: [f64; 3], y: [f64; 3]) -> (f64, f64, f64) {
    let (d1, d2) = (x[1] - x[0], x[2] - x[0]);
    let (s1, s2) = ((y[1] - y[0]) / d1, (y[2] - y[0]) / d2);
    let c2 = (s2 - s1) / (d2 - d1);
    (y[0], s1 - c2 * d1, c2)
}

/// Offsets must be given in decreasing order. The integral at the smallest
/// offset is one Gauss–Kronrod panel across the band; the others subtract the
/// thin slivers between their edges, where `λ²` is close to linear in `kx`.
pub(crate) fn contour(
    scenario: &Scenario,
    pol: Polarization,
    ky: f64,
    grid: &Grid,
    k_ref: Option<f64>,
    offsets: &[f64; 3],
) -> Result<ContourSample> {
    let (kept, pruned) = split_ridges(scenario, pol, ky, grid, k_ref)?;
    let pruned_weight: f64 = pruned.iter().map(|s| weak_weight(scenario, s)).sum();
    let mut values = [pruned_weight; 3];
    let mut error = pruned_weight;
    // Rates are resolved relative to the strongest ridge at this ky.
    let tol = 1e-9 * kept.iter().map(|s| s.lambda_0).fold(0.0, f64::max);
    let sliver_rule = gauss_legendre(4);
    for sol in &kept {
        match ridge_contour(scenario, pol, sol, offsets, tol, &sliver_rule)? {
            Some((v, e)) => {
                for (acc, x) in values.iter_mut().zip(v) {
                    *acc += x;
                }
                error += e;
            }
            None => error += weak_weight(scenario, sol),
        }
    }
    Ok(ContourSample { values, error })
}

/// `∫dkx kx Σ_{λ>η} λ` across one ridge for each offset, with the quadrature
/// error at the smallest; `None` when the ridge never rises above the offsets.
fn ridge_contour(
    scenario: &Scenario,
    pol: Polarization,
    sol: &SelectionSolution,
    offsets: &[f64; 3],
    tol: f64,
    sliver_rule: &(Vec<f64>, Vec<f64>),
) -> Result<Option<([f64; 3], f64)>> {
    let l0 = sol.lambda_0;
    let hw = sol.half_width();
    let etas = offsets.map(|o| o * l0);
    let eta_min = etas[2];
    let bottom = eta_min / 8.0;
    let s = |kx: f64| local_sum(scenario, pol, sol, kx, bottom, tol);

    // λ² is close to a downward parabola in kx across the band.
    let xs = [sol.kx, sol.kx - 0.5 * hw, sol.kx + 0.5 * hw];
    let ys = [s(xs[0])?, s(xs[1])?, s(xs[2])?];
    let (mut c0, mut c1, mut c2) = quadratic(xs, ys.map(|y| y * y));
    if !(c2 < 0.0) {
        (c0, c1, c2) = (l0 * l0, 0.0, -l0 * l0 / (hw * hw));
    }
    let vertex = sol.kx - c1 / (2.0 * c2);
    let apex = c0 - c1 * c1 / (4.0 * c2);
    if apex <= etas[0] * etas[0] || ys[0] <= etas[0] {
        return Ok(None);
    }
    let model_slope = |x: f64| c1 + 2.0 * c2 * (x - sol.kx);

    // Edges per side, from the largest offset outward.
    let mut edges = [[0.0; 3]; 2];
    for (side, dir) in [-1.0, 1.0].into_iter().enumerate() {
        let mut x = vertex + dir * ((apex - etas[0] * etas[0]) / -c2).sqrt();
        let mut m = model_slope(x);
        for i in 0..3 {
            if i > 0 {
                x += (etas[i] * etas[i] - etas[i - 1] * etas[i - 1]) / m;
            }
            let (e, slope) = edge(&s, etas[i], x, m, vertex, dir, hw, sol.kx)?;
            edges[side][i] = e;
            (x, m) = (e, slope);
        }
    }

    let (lo, hi) = (edges[0][2], edges[1][2]);
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut f = |phi: f64| -> Result<f64> {
        let kx = mid + half * phi.sin();
        Ok(kx * s(kx)? * half * phi.cos())
    };
    let (main, err) = gk15(&mut f, -FRAC_PI_2, FRAC_PI_2)?;

    let mut out = [0.0; 3];
    out[2] = main;
    for i in 0..2 {
        let mut slivers = 0.0;
        for (side, dir) in [-1.0, 1.0].into_iter().enumerate() {
            // x = p + q·t² maps t ∈ [η_min, ηᵢ] onto the sliver, making the
            // integrand smooth in t.
            let (a, b) = (edges[side][2], edges[side][i]);
            let q = (b - a) / (etas[i] * etas[i] - eta_min * eta_min);
            let p = a - q * eta_min * eta_min;
            let mut acc = Vec::with_capacity(sliver_rule.0.len());
            for (t, w) in map_rule(sliver_rule, eta_min, etas[i]) {
                let kx = p + q * t * t;
                acc.push(w * kx * s(kx)? * 2.0 * q * t);
            }
            slivers += -dir * compensated_sum(acc);
        }
        out[i] = main - slivers;
    }
    Ok(Some((out, err)))
}

/// Edge of `{λ > η}` on side `dir` of the band, by secant steps from `x0`
/// with the model slope `m0` of `λ²`, falling back to a bracketed search.
/// Returns the edge and the local slope of `λ²`.
#[allow(clippy::too_many_arguments)]
fn edge<S: Fn(f64) -> Result<f64>>(
    s: &S,
    eta: f64,
    x0: f64,
    m0: f64,
    vertex: f64,
    dir: f64,
    hw: f64,
    kx0: f64,
) -> Result<(f64, f64)> {
    let xtol = (1e-9 * hw).max(1e-14 * kx0);
    let g = |kx: f64| -> Result<Option<f64>> {
        let v = s(kx)?;
        Ok((v > 0.0).then_some(v * v - eta * eta))
    };
    let (mut x, mut m) = (x0, m0);
    if let Some(mut gx) = g(x)? {
        for _ in 0..10 {
            let step = -gx / m;
            if !step.is_finite() {
                break;
            }
            let xn = x + step;
            if step.abs() <= xtol {
                return Ok((xn, m));
            }
            let Some(gn) = g(xn)? else { break };
            let secant = (gn - gx) / (xn - x);
            if secant.is_finite() && secant * m0 > 0.0 {
                m = secant;
            }
            (x, gx) = (xn, gn);
        }
    }
    let h = |kx: f64| -> Result<f64> { Ok(g(kx)?.unwrap_or(-eta * eta)) };
    let mut delta = 0.02 * (x0 - vertex).abs().max(1e-3 * hw);
    for _ in 0..12 {
        let inner = if (x0 - dir * delta - vertex) * dir <= 0.0 {
            vertex
        } else {
            x0 - dir * delta
        };
        let outer = x0 + dir * delta;
        if h(inner)? > 0.0 && h(outer)? <= 0.0 {
            return Ok((illinois(&h, inner, outer, xtol, 100)?, m0));
        }
        delta *= 3.0;
    }
    Err(Error::NonConvergence {
        residual: delta,
        tolerance: hw,
    })
}
