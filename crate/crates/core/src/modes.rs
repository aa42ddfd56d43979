//! Guided modes of a single PEC-backed slab: the real poles of its reflection
//! coefficient below the vacuum light line, with residues and group velocities.
//!
//! With `X = κh`, `κ = √(εω̃² − k²)` and `V = kh√(ε − 1)`, the TM (p) roots
//! satisfy `√ε·√(V² − X²)·cos X = X sin X` and lie one per interval
//! `(mπ, mπ + π/2)`; the TE (s) roots satisfy `√(V² − X²)·sin X = −√ε·X cos X`
//! and lie one per interval `(mπ + π/2, (m + 1)π)`, both truncated at `X < V`.
//! The branch index `m` is therefore exact and branches of one polarization
//! never cross.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::media::{Medium, Polarization, SheetMedium, SlabMedium};
use crate::optics::slab_fraction;
use crate::roots::brent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidedModePoint {
    pub k: f64,
    pub omega_co: f64,
    pub residue: f64,
    pub n_ph: f64,
    pub v_g_co: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedModeBranch {
    pub pol: Polarization,
    pub branch_index: usize,
    pub slab: SlabMedium,
    pub points: Vec<GuidedModePoint>,
}

/// Lower end of the bracket for branch `m`, in `X = κh`.
fn bracket_start(pol: Polarization, m: usize) -> f64 {
    match pol {
        Polarization::P => m as f64 * PI,
        Polarization::S => m as f64 * PI + FRAC_PI_2,
    }
}

fn v_number(slab: &SlabMedium, k: f64) -> f64 {
    k * slab.h * (slab.eps() - 1.0).sqrt()
}

/// Transverse wavenumber below which branch `m` does not exist.
pub fn cutoff_k(slab: &SlabMedium, pol: Polarization, m: usize) -> f64 {
    bracket_start(pol, m) / (slab.h * (slab.eps() - 1.0).sqrt())
}

/// Number of guided branches at wavenumber `k`.
pub fn branch_count(slab: &SlabMedium, pol: Polarization, k: f64) -> usize {
    let v = v_number(slab, k);
    let first = bracket_start(pol, 0);
    if v <= first {
        0
    } else {
        ((v - first) / PI).ceil() as usize
    }
}

fn secular(pol: Polarization, x: f64, v: f64, n: f64) -> f64 {
    let r = (v * v - x * x).max(0.0).sqrt();
    match pol {
        Polarization::P => n * r * x.cos() - x * x.sin(),
        Polarization::S => r * x.sin() + n * x * x.cos(),
    }
}

/// Pole frequency of branch `m` at wavenumber `k`, or `None` below its cutoff.
pub fn pole_frequency(slab: &SlabMedium, pol: Polarization, m: usize, k: f64) -> Option<f64> {
    if !(k > 0.0) {
        return None;
    }
    let v = v_number(slab, k);
    let lo = bracket_start(pol, m);
    if v <= lo {
        return None;
    }
    let hi = (lo + FRAC_PI_2).min(v);
    let x = brent(|x| secular(pol, x, v, slab.n_d), lo, hi, 1e-15 * hi, 200).ok()?;
    let kappa = x / slab.h;
    Some((kappa * kappa + k * k).sqrt() / slab.n_d)
}

/// All guided-mode frequencies `ω̃ > 0` at wavenumber `k`, ascending.
pub fn find_pole_frequencies(slab: &SlabMedium, pol: Polarization, k: f64) -> Vec<f64> {
    (0..branch_count(slab, pol, k))
        .filter_map(|m| pole_frequency(slab, pol, m, k))
        .collect()
}

/// Step for derivatives near a pole: stays clear of the light-line branch point.
fn safe_step(k: f64, omega: f64) -> f64 {
    (1e-5 * k).min(0.25 * (k - omega.abs()))
}

/// Ridders–Richardson central difference of `f` at `x` starting from step `h`.
fn ridders<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> (Complex64, f64) {
    const CON: f64 = 1.4;
    const N: usize = 10;
    let mut a = [[Complex64::new(0.0, 0.0); N]; N];
    let mut hh = h;
    a[0][0] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..N {
        hh /= CON;
        a[0][i] = (f(x + hh) - f(x - hh)) / (2.0 * hh);
        let mut fac = CON * CON;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON * CON;
            let e = (a[j][i] - a[j - 1][i])
                .norm()
                .max((a[j][i] - a[j - 1][i - 1]).norm());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).norm() >= 2.0 * err {
            break;
        }
    }
    (best, err)
}

/// Residue `b` of the slab reflection coefficient at a real pole, `R ≈ b/(ω̃ − ω̃ₚ)`.
///
/// `b = 1/(d(1/R)/dω̃)`; at the pole `d(1/R)/dω̃ = den′/num`, and only the
/// denominator is differentiated numerically. This matters for p modes deep in
/// the core, where a zero of `R` sits within `10⁻⁴ ω̃` of the pole and a
/// difference quotient of `1/R` itself would straddle it.
pub fn residue_at_pole(
    slab: &SlabMedium,
    pol: Polarization,
    k: f64,
    omega_pole: f64,
) -> Result<f64> {
    let frac = |w: f64| slab_fraction(pol, Complex64::new(w, 0.0), k, slab);
    let h = safe_step(k, omega_pole);
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "omega {omega_pole} is not below the light line at k = {k}"
        )));
    }
    let (num, _) = frac(omega_pole);
    let (dden, err) = ridders(|w| frac(w).1, omega_pole, h);
    let scale = frac(omega_pole + h).0.norm().max(num.norm()) / h;
    if dden.norm() <= 1e-12 * scale || dden.norm() <= err {
        return Err(Error::HigherOrderPole { omega: omega_pole });
    }
    let b = num / dden;
    if b.im.abs() > 1e-8 * b.norm() {
        return Err(Error::Degenerate(format!("residue {b} is not real")));
    }
    Ok(b.re)
}

/// Co-moving group velocity `∂ω̃/∂k` of the mode at `(k, ω̃)`, by implicit
/// differentiation of the reflection denominator.
pub fn group_velocity(slab: &SlabMedium, pol: Polarization, k: f64, omega: f64) -> f64 {
    let den = |w: f64, kk: f64| slab_fraction(pol, Complex64::new(w, 0.0), kk, slab).1;
    let h = safe_step(k, omega);
    let (dw, _) = ridders(|w| den(w, k), omega, h);
    let (dk, _) = ridders(|kk| den(omega, kk), k, h);
    -(dk / dw).re
}

/// Fully characterized mode point at a verified pole.
pub fn mode_point(
    slab: &SlabMedium,
    pol: Polarization,
    k: f64,
    omega: f64,
) -> Result<GuidedModePoint> {
    Ok(GuidedModePoint {
        k,
        omega_co: omega,
        residue: residue_at_pole(slab, pol, k, omega)?,
        n_ph: k / omega,
        v_g_co: group_velocity(slab, pol, k, omega),
    })
}

/// Samples branch `branch_index` on `k_grid`.
pub fn trace_branch(
    slab: &SlabMedium,
    pol: Polarization,
    branch_index: usize,
    k_grid: &[f64],
) -> Result<GuidedModeBranch> {
    if k_grid.is_empty() || k_grid[0] <= 0.0 || k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "k grid must be positive and strictly increasing".into(),
        ));
    }
    let mut points: Vec<GuidedModePoint> = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let omega = pole_frequency(slab, pol, branch_index, k).ok_or(Error::BranchLost {
            branch: branch_index,
            k,
        })?;
        if let Some(prev) = points.last() {
            // Group velocities of guided modes stay below c, so a larger jump
            // means the continuation left the branch.
            let window = 3.0 * (k - prev.k);
            if (omega - prev.omega_co).abs() > window {
                return Err(Error::BranchLost {
                    branch: branch_index,
                    k,
                });
            }
        }
        points.push(mode_point(slab, pol, k, omega)?);
    }
    Ok(GuidedModeBranch {
        pol,
        branch_index,
        slab: *slab,
        points,
    })
}

/// Wavenumber and frequency at which the branch's phase index equals `n_ph_target`.
pub fn branch_intersection_with_index(
    branch: &GuidedModeBranch,
    n_ph_target: f64,
) -> Result<(f64, f64)> {
    let pts = &branch.points;
    let (lo, hi) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.n_ph.min(b.n_ph), a.n_ph.max(b.n_ph)),
        _ => return Err(Error::InvalidInput("empty branch".into())),
    };
    if !(n_ph_target >= lo && n_ph_target <= hi) {
        return Err(Error::OutOfRange {
            target: n_ph_target,
            lo,
            hi,
        });
    }
    let i = pts
        .windows(2)
        .position(|w| (w[0].n_ph - n_ph_target) * (w[1].n_ph - n_ph_target) <= 0.0)
        .ok_or(Error::OutOfRange {
            target: n_ph_target,
            lo,
            hi,
        })?;
    let (a, b) = (pts[i], pts[i + 1]);
    if a.n_ph == n_ph_target {
        return Ok((a.k, a.omega_co));
    }
    if b.n_ph == n_ph_target {
        return Ok((b.k, b.omega_co));
    }
    let slab = branch.slab;
    let (pol, m) = (branch.pol, branch.branch_index);
    let f = |k: f64| match pole_frequency(&slab, pol, m, k) {
        Some(w) => k - n_ph_target * w,
        None => f64::NAN,
    };
    let k = brent(f, a.k, b.k, 1e-15 * b.k, 200)?;
    let w = pole_frequency(&slab, pol, m, k).ok_or(Error::BranchLost { branch: m, k })?;
    Ok((k, w))
}

/// A real pole of one body's reflection coefficient, in that body's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    /// Signed co-moving frequency.
    pub omega_co: f64,
    pub residue: f64,
    pub branch: usize,
    /// `∂ω̃/∂k` along the branch (zero for sheets).
    pub v_g: f64,
}

/// Residue of the sheet reflection coefficient at `±ω_sp`.
pub fn sheet_residue(sheet: &SheetMedium, omega_pole: f64) -> f64 {
    -sheet.omega_sp * sheet.omega_sp / (2.0 * omega_pole)
}

/// All real poles (both signs) of a body's reflection coefficient at `k`.
pub fn body_poles(medium: &Medium, pol: Polarization, k: f64) -> Result<Vec<Pole>> {
    let mut out = Vec::new();
    match medium {
        Medium::Sheet(s) => {
            for w in [s.omega_sp, -s.omega_sp] {
                out.push(Pole {
                    omega_co: w,
                    residue: sheet_residue(s, w),
                    branch: 0,
                    v_g: 0.0,
                });
            }
        }
        Medium::Slab(s) => {
            for (m, w) in find_pole_frequencies(s, pol, k).into_iter().enumerate() {
                let b = residue_at_pole(s, pol, k, w)?;
                let vg = group_velocity(s, pol, k, w);
                out.push(Pole {
                    omega_co: w,
                    residue: b,
                    branch: m,
                    v_g: vg,
                });
                out.push(Pole {
                    omega_co: -w,
                    residue: -b,
                    branch: m,
                    v_g: -vg,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::reflection_slab;
    use proptest::prelude::*;

    fn slab14() -> SlabMedium {
        SlabMedium::new(14.0, 1.0).unwrap()
    }

    #[test]
    fn fig2_pole() {
        let roots = find_pole_frequencies(&slab14(), Polarization::P, 1.598);
        assert!(roots.iter().any(|w| (w - 0.1598).abs() < 2e-4), "{roots:?}");
        assert!((roots[0] - 0.1598029).abs() < 1e-6, "{}", roots[0]);
    }

    #[test]
    fn cutoffs() {
        let slab = slab14();
        assert!(find_pole_frequencies(&slab, Polarization::S, 1e-3).is_empty());
        assert_eq!(find_pole_frequencies(&slab, Polarization::P, 1e-3).len(), 1);
        let kc = cutoff_k(&slab, Polarization::S, 0);
        assert_eq!(branch_count(&slab, Polarization::S, kc * 0.999), 0);
        assert_eq!(branch_count(&slab, Polarization::S, kc * 1.001), 1);
    }

    #[test]
    fn roots_zero_the_denominator() {
        let slab = slab14();
        for pol in Polarization::ALL {
            for k in [0.3, 1.598, 4.0, 9.0] {
                for w in find_pole_frequencies(&slab, pol, k) {
                    assert!(w > k / 14.0 && w < k);
                    let (_, lo) =
                        slab_fraction(pol, Complex64::new(w * (1.0 - 1e-9), 0.0), k, &slab);
                    let (_, hi) =
                        slab_fraction(pol, Complex64::new(w * (1.0 + 1e-9), 0.0), k, &slab);
                    assert!(lo.re * hi.re < 0.0, "{pol} k={k} w={w}");
                }
            }
        }
    }

    #[test]
    fn residue_matches_shrinking_stencil_fit() {
        let slab = slab14();
        let k = 1.598;
        let w0 = find_pole_frequencies(&slab, Polarization::P, k)[0];
        let b = residue_at_pole(&slab, Polarization::P, k, w0).unwrap();
        // R(w0 + δ)·δ → b as δ → 0, with an O(δ) correction removed by symmetric averaging.
        let mut prev = f64::NAN;
        for e in [1e-4, 1e-5, 1e-6] {
            let d = e * w0;
            let rp = reflection_slab(Polarization::P, Complex64::new(w0 + d, 0.0), k, 0.0, &slab)
                .unwrap();
            let rm = reflection_slab(Polarization::P, Complex64::new(w0 - d, 0.0), k, 0.0, &slab)
                .unwrap();
            let fit = 0.5 * (rp.re * d - rm.re * d);
            assert!((fit - b).abs() < 1e-3 * b.abs(), "{fit} vs {b}");
            if prev.is_finite() {
                assert!((fit - b).abs() <= (prev - b).abs() + 1e-15);
            }
            prev = fit;
        }
        assert!(b * w0 > 0.0);
        let bm = residue_at_pole(&slab, Polarization::P, k, -w0).unwrap();
        assert!((bm + b).abs() < 1e-9 * b.abs());
    }

    #[test]
    fn sheet_residue_from_partial_fractions() {
        let s = SheetMedium::new(0.8).unwrap();
        assert!((sheet_residue(&s, 0.8) + 0.4).abs() < 1e-15);
        assert!((sheet_residue(&s, -0.8) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn residue_sign_rule_per_polarization() {
        let slab = slab14();
        for (pol, sign) in [(Polarization::P, 1.0), (Polarization::S, -1.0)] {
            for i in 1..60 {
                let k = 0.2 * i as f64;
                for w in find_pole_frequencies(&slab, pol, k) {
                    let b = residue_at_pole(&slab, pol, k, w).unwrap();
                    assert_eq!((b * w).signum(), sign, "{pol} k={k}");
                }
            }
        }
    }

    #[test]
    fn fundamental_branch_approaches_core_index() {
        let slab = slab14();
        let grid: Vec<f64> = (1..=200).map(|i| 0.1 * i as f64).collect();
        let br = trace_branch(&slab, Polarization::P, 0, &grid).unwrap();
        assert!(br.points.windows(2).all(|w| w[1].n_ph > w[0].n_ph));
        let last = br.points.last().unwrap();
        assert!(last.n_ph > 13.9 && last.n_ph < 14.0);
        let iso = find_pole_frequencies(&slab, Polarization::P, last.k)[0];
        assert_eq!(iso, last.omega_co);
        for p in &br.points {
            assert!(p.n_ph > 1.0 && p.n_ph < 14.0);
        }
    }

    #[test]
    fn group_equals_phase_velocity_deep_in_core() {
        let slab = slab14();
        let grid: Vec<f64> = (1..=400).map(|i| 0.1 * i as f64).collect();
        for pol in Polarization::ALL {
            let br = trace_branch(&slab, pol, 0, &grid[5..]).unwrap();
            let p = br.points.iter().find(|p| p.n_ph > 13.8).unwrap();
            let vph = 1.0 / p.n_ph;
            assert!(
                (p.v_g_co - vph).abs() < 0.05 * vph,
                "{pol}: {} vs {vph}",
                p.v_g_co
            );
        }
    }

    #[test]
    fn group_velocity_matches_quadratic_fit() {
        let slab = slab14();
        for pol in Polarization::ALL {
            for k in [0.9, 2.0, 5.0] {
                let h = 1e-3;
                let w: Vec<f64> = [k - h, k, k + h]
                    .iter()
                    .map(|&kk| pole_frequency(&slab, pol, 0, kk).unwrap())
                    .collect();
                let slope = (w[2] - w[0]) / (2.0 * h);
                let vg = group_velocity(&slab, pol, k, w[1]);
                assert!(
                    (vg - slope).abs() < 1e-2 * slope.abs(),
                    "{pol} {k}: {vg} vs {slope}"
                );
            }
        }
    }

    #[test]
    fn index_crossing_of_fundamental_p_branch() {
        let grid: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
        let br = trace_branch(&slab14(), Polarization::P, 0, &grid).unwrap();
        let (k, w) = branch_intersection_with_index(&br, 10.0).unwrap();
        assert!((k - 1.598).abs() < 0.01, "{k}");
        assert!((k / w - 10.0).abs() < 1e-10);
        let top = br.points.last().unwrap();
        let (ke, _) = branch_intersection_with_index(&br, top.n_ph).unwrap();
        assert_eq!(ke, top.k);
        assert!(branch_intersection_with_index(&br, 1.0001).is_err());
    }

    #[test]
    fn trace_rejects_below_cutoff() {
        let r = trace_branch(&slab14(), Polarization::S, 1, &[0.1, 0.2]);
        assert!(matches!(r, Err(Error::BranchLost { branch: 1, .. })));
    }

    proptest! {
        #[test]
        fn branch_count_nondecreasing(k1 in 0.01f64..20.0, dk in 0.0f64..5.0, n in 1.5f64..20.0) {
            let slab = SlabMedium::new(n, 1.0).unwrap();
            for pol in Polarization::ALL {
                prop_assert!(branch_count(&slab, pol, k1) <= branch_count(&slab, pol, k1 + dk));
            }
            prop_assert!(branch_count(&slab, Polarization::P, k1) >= 1);
        }

        #[test]
        fn roots_are_guided(k in 0.01f64..15.0, n in 1.5f64..20.0, p in any::<bool>()) {
            let slab = SlabMedium::new(n, 1.0).unwrap();
            let pol = if p { Polarization::P } else { Polarization::S };
            let roots = find_pole_frequencies(&slab, pol, k);
            prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
            for w in roots {
                let nph = k / w;
                prop_assert!(nph > 1.0 && nph < n);
            }
        }
    }
}
