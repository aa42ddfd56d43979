//! The two-body characteristic function, the selection rules, the two-pole
//! model and certified complex eigenfrequencies.

pub mod selection;
pub mod sheet;

use num_complex::Complex64;

use crate::argument::{winding_number_with, Rect, TraceOptions};
use crate::error::{Error, Result};
use crate::media::{GapCoupling, Medium, Polarization, Scenario};
use crate::modes::{self, sheet_residue};
use crate::optics::gamma;
use crate::roots::{newton_complex, NewtonOptions};

pub use selection::{
    selection_kx, solve_selection, solve_selection_with, PairId, SelectionOptions, SelectionScan,
    SelectionSolution,
};
pub use sheet::{sheet_quartic, sheet_roots};

/// Friction threshold `|v₂ − v₁| ≥ 1/n₁ + 1/n₂` (units of c).
pub fn threshold_velocity(n1: f64, n2: f64) -> f64 {
    1.0 / n1 + 1.0 / n2
}

/// Round-trip attenuation across the gap at lab frequency `ω`.
pub fn gap_factor(scenario: &Scenario, k: f64, omega_lab: Complex64) -> Complex64 {
    match scenario.gap {
        GapCoupling::Retarded => (-2.0 * scenario.d * gamma(k, omega_lab, 1.0, 1.0)).exp(),
        GapCoupling::Quasistatic => Complex64::new((-2.0 * k * scenario.d).exp(), 0.0),
    }
}

pub(crate) fn gap_factor_real(scenario: &Scenario, k: f64, omega_lab: f64) -> f64 {
    gap_factor(scenario, k, Complex64::new(omega_lab, 0.0)).norm()
}

/// `D = 1 − g·R₁(ω − v₁kx)·R₂(ω − v₂kx)` at lab frequency `ω`.
pub fn characteristic(
    pol: Polarization,
    omega: Complex64,
    kx: f64,
    ky: f64,
    scenario: &Scenario,
) -> Result<Complex64> {
    Characteristic::new(scenario, pol, kx, ky).eval(omega)
}

/// The characteristic function at a fixed wavevector.
#[derive(Debug, Clone, Copy)]
pub struct Characteristic<'a> {
    pub scenario: &'a Scenario,
    pub pol: Polarization,
    pub kx: f64,
    pub ky: f64,
    k: f64,
}

impl<'a> Characteristic<'a> {
    pub fn new(scenario: &'a Scenario, pol: Polarization, kx: f64, ky: f64) -> Self {
        Self {
            scenario,
            pol,
            kx,
            ky,
            k: kx.hypot(ky),
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    fn fractions(&self, omega: Complex64) -> [(Complex64, Complex64); 2] {
        let s = self.scenario;
        [
            s.body1
                .medium
                .fraction(self.pol, omega - s.body1.v * self.kx, self.k),
            s.body2
                .medium
                .fraction(self.pol, omega - s.body2.v * self.kx, self.k),
        ]
    }

    /// `g·R₁·R₂`; fails only on an exact pole, since zeros of `D` may sit
    /// far closer to the bodies' poles than any fixed relative threshold.
    pub fn coupling(&self, omega: Complex64) -> Result<Complex64> {
        let [(n1, d1), (n2, d2)] = self.fractions(omega);
        let c = gap_factor(self.scenario, self.k, omega) * (n1 / d1) * (n2 / d2);
        if !c.is_finite() {
            return Err(Error::Pole { omega });
        }
        Ok(c)
    }

    pub fn eval(&self, omega: Complex64) -> Result<Complex64> {
        Ok(1.0 - self.coupling(omega)?)
    }

    /// `d₁d₂ − g·n₁n₂`: shares the zeros of `D` and has none of its poles.
    pub fn cleared(&self, omega: Complex64) -> Complex64 {
        let [(n1, d1), (n2, d2)] = self.fractions(omega);
        d1 * d2 - gap_factor(self.scenario, self.k, omega) * n1 * n2
    }

    /// Whether `omega` is a zero of `D`: `|D| ≤ 10⁻⁹(1 + |gR₁R₂|)`, or, close
    /// to the bodies' poles where `D` cannot be evaluated that accurately,
    /// `|D|` within the rounding floor `10³·ε·max(|ω|, k)·|D′|`.
    pub fn is_zero(&self, omega: Complex64) -> bool {
        let Ok(c) = self.coupling(omega) else {
            return false;
        };
        let res = (1.0 - c).norm();
        if res <= 1e-9 * (1.0 + c.norm()) {
            return true;
        }
        let scale = omega.norm().max(self.k);
        let h = 1e-3 * omega.im.abs().max(1e-12 * scale);
        match (self.eval(omega + h), self.eval(omega - h)) {
            (Ok(a), Ok(b)) => res <= 1e3 * f64::EPSILON * scale * ((a - b) / (2.0 * h)).norm(),
            _ => false,
        }
    }
}

/// Roots `ω = (ω₁+ω₂)/2 ± √(g·b₁b₂ + ((ω₁−ω₂)/2)²)` of `1 = g·b₁b₂/((ω−ω₁)(ω−ω₂))`;
/// the root with the larger imaginary part comes first.
pub fn two_pole_roots(omega1: f64, omega2: f64, b1: f64, b2: f64, g: f64) -> [Complex64; 2] {
    let mid = 0.5 * (omega1 + omega2);
    let half = 0.5 * (omega1 - omega2);
    let s = Complex64::new(g * b1 * b2 + half * half, 0.0).sqrt();
    [mid + s, mid - s]
}

/// [`two_pole_roots`] with the quasistatic gap factor `e^(−2kd)`.
pub fn two_pole_mode(omega1: f64, omega2: f64, b1: f64, b2: f64, k: f64, d: f64) -> [Complex64; 2] {
    two_pole_roots(omega1, omega2, b1, b2, (-2.0 * k * d).exp())
}

/// A complex eigenfrequency `ω_c = ω′ + iλ` of the coupled bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridMode {
    pub kx: f64,
    pub ky: f64,
    pub pol: Polarization,
    pub omega_c: Complex64,
    /// Weak-coupling rate of the pole pair the mode grew from.
    pub lambda_0: Option<f64>,
}

impl HybridMode {
    pub fn lambda(&self) -> f64 {
        self.omega_c.im
    }
}

/// A real pole of one body, in the lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabPole {
    /// 0 for body 1, 1 for body 2.
    pub body: usize,
    pub branch: usize,
    pub omega_co: f64,
    pub omega_lab: f64,
    pub residue: f64,
}

/// Co-moving pole frequency and residue of one branch and sign.
pub fn branch_pole(
    medium: &Medium,
    pol: Polarization,
    branch: usize,
    positive: bool,
    k: f64,
) -> Result<(f64, f64)> {
    let sign = if positive { 1.0 } else { -1.0 };
    match medium {
        Medium::Sheet(s) => {
            if branch != 0 {
                return Err(Error::BranchLost { branch, k });
            }
            let w = sign * s.omega_sp;
            Ok((w, sheet_residue(s, w)))
        }
        Medium::Slab(s) => {
            let w =
                modes::pole_frequency(s, pol, branch, k).ok_or(Error::BranchLost { branch, k })?;
            let b = modes::residue_at_pole(s, pol, k, w)?;
            Ok((sign * w, sign * b))
        }
    }
}

/// Positive co-moving pole frequencies of a body, indexed by branch.
fn positive_poles(medium: &Medium, pol: Polarization, k: f64) -> Vec<f64> {
    match medium {
        Medium::Sheet(s) => vec![s.omega_sp],
        Medium::Slab(s) => modes::find_pole_frequencies(s, pol, k),
    }
}

/// Lab-frame poles of both bodies with real part in `[lo, hi]`, each list sorted by frequency.
pub fn lab_poles(
    scenario: &Scenario,
    pol: Polarization,
    kx: f64,
    ky: f64,
    lo: f64,
    hi: f64,
) -> Result<[Vec<LabPole>; 2]> {
    let k = kx.hypot(ky);
    let mut out = [Vec::new(), Vec::new()];
    for (body, mb) in [&scenario.body1, &scenario.body2].into_iter().enumerate() {
        for (branch, w) in positive_poles(&mb.medium, pol, k).into_iter().enumerate() {
            let inside: Vec<f64> = [w, -w]
                .into_iter()
                .filter(|x| (lo..=hi).contains(&(x + mb.v * kx)))
                .collect();
            if inside.is_empty() {
                continue;
            }
            let b = match &mb.medium {
                Medium::Sheet(s) => sheet_residue(s, w),
                Medium::Slab(s) => modes::residue_at_pole(s, pol, k, w)?,
            };
            for x in inside {
                out[body].push(LabPole {
                    body,
                    branch,
                    omega_co: x,
                    omega_lab: x + mb.v * kx,
                    residue: b * x.signum(),
                });
            }
        }
        out[body].sort_by(|a, b| a.omega_lab.total_cmp(&b.omega_lab));
    }
    Ok(out)
}

/// Lab frequencies of every pole of both bodies.
pub(crate) fn all_lab_pole_frequencies(
    scenario: &Scenario,
    pol: Polarization,
    kx: f64,
    k: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    for mb in [&scenario.body1, &scenario.body2] {
        for w in positive_poles(&mb.medium, pol, k) {
            out.push(w + mb.v * kx);
            out.push(-w + mb.v * kx);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Winding number of `D` around `rect`: zeros minus poles inside. The bodies'
/// poles are announced to the boundary trace. A boundary that grazes a zero is
/// moved inward by a thousandth of the rectangle, up to three times.
pub fn winding_count(
    pol: Polarization,
    scenario: &Scenario,
    kx: f64,
    ky: f64,
    rect: &Rect,
) -> Result<i64> {
    let ch = Characteristic::new(scenario, pol, kx, ky);
    let hints = all_lab_pole_frequencies(scenario, pol, kx, ch.k());
    let mut r = *rect;
    let mut last = None;
    for _ in 0..4 {
        match winding_number_with(&|z| ch.eval(z), &r, &hints, &TraceOptions::default()) {
            Err(e @ Error::BoundaryTooClose { .. }) => {
                let (dw, dh) = (1e-3 * r.width(), 1e-3 * r.height());
                r = Rect::new(r.re_min + dw, r.re_max - dw, r.im_min + dh, r.im_max - dh)?;
                last = Some(e);
            }
            other => return other,
        }
    }
    Err(last.expect("set on retry"))
}

/// Real-part range in which both bodies have poles, so that an unstable
/// hybrid can form; `None` when the ranges do not overlap. Slab ranges end at
/// the light cones. Sheet ranges are widened by four times the coupling rate
/// `e^(−kd)√(ω₁ω₂)/2`, the reach of a hybrid around its pole pair.
fn search_window(scenario: &Scenario, kx: f64, k: f64) -> Option<(f64, f64)> {
    let (a, b) = (scenario.body1.v * kx, scenario.body2.v * kx);
    match (&scenario.body1.medium, &scenario.body2.medium) {
        (Medium::Sheet(s1), Medium::Sheet(s2)) => {
            let rate = (-k * scenario.d).exp() * (s1.omega_sp * s2.omega_sp).sqrt() / 2.0;
            let m = (4.0 * rate)
                .max(1e-3 * k)
                .max(1e-3 * s1.omega_sp.min(s2.omega_sp));
            let lo = (a - s1.omega_sp).max(b - s2.omega_sp) - m;
            let hi = (a + s1.omega_sp).min(b + s2.omega_sp) + m;
            (lo < hi).then_some((lo, hi))
        }
        _ => {
            let (mut lo, mut hi) = ((a - k).max(b - k), (a + k).min(b + k));
            if scenario.gap == GapCoupling::Retarded {
                lo = lo.max(-k);
                hi = hi.min(k);
            }
            let margin = 1e-9 * k;
            (lo + margin < hi - margin).then_some((lo + margin, hi - margin))
        }
    }
}

/// Growth rates below `MIN_RATE·k` are not resolved: they sit at the
/// rounding level of the real parts. Certification starts at ten times this.
pub const MIN_RATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
struct Seed {
    z: Complex64,
    lambda_0: f64,
}

/// Two-pole seeds for every opposite-residue pole pair detuned by less than `4λ₀`.
fn seeds(scenario: &Scenario, k: f64, poles: &[Vec<LabPole>; 2]) -> Vec<Seed> {
    let bmax2 = poles[1].iter().map(|p| p.residue.abs()).fold(0.0, f64::max);
    let mut out = Vec::new();
    for p1 in &poles[0] {
        let reach = 4.0 * (p1.residue.abs() * bmax2).sqrt();
        let start = poles[1].partition_point(|p| p.omega_lab < p1.omega_lab - reach);
        for p2 in poles[1][start..]
            .iter()
            .take_while(|p| p.omega_lab <= p1.omega_lab + reach)
        {
            if p1.residue * p2.residue >= 0.0 {
                continue;
            }
            let mid = 0.5 * (p1.omega_lab + p2.omega_lab);
            let g = gap_factor_real(scenario, k, mid);
            let l0 = (g * (p1.residue * p2.residue).abs()).sqrt();
            let delta = p1.omega_lab - p2.omega_lab;
            if delta.abs() < 4.0 * l0 && l0 >= MIN_RATE * k {
                let s = (1.0 - delta * delta / (4.0 * l0 * l0)).max(0.05).sqrt();
                out.push(Seed {
                    z: Complex64::new(mid, l0 * s),
                    lambda_0: l0,
                });
            }
        }
    }
    out
}

fn polish(ch: &Characteristic, z0: Complex64) -> Option<Complex64> {
    let scale = z0.norm().max(ch.k());
    let step = (1e-7 * scale).min(1e-2 * z0.im.abs().max(1e-300));
    let opts = NewtonOptions {
        step,
        xtol: 1e-13 * scale,
        max_iter: 80,
    };
    let z = newton_complex(|z| Ok(ch.cleared(z)), z0, opts).ok()?;
    ch.is_zero(z).then_some(z)
}

/// All zeros of `D` with `λ > 0` at `(kx, ky)`, certified by a winding count.
///
/// Two plasmon sheets with the quasistatic gap factor are solved exactly via
/// [`sheet_roots`]; everything else goes through [`find_complex_modes_generic`].
pub fn find_complex_modes(
    pol: Polarization,
    scenario: &Scenario,
    kx: f64,
    ky: f64,
) -> Result<Vec<HybridMode>> {
    if !scenario.is_slabs() && scenario.gap == GapCoupling::Quasistatic {
        return sheet_modes(pol, scenario, kx, ky);
    }
    find_complex_modes_generic(pol, scenario, kx, ky)
}

fn sheet_modes(
    pol: Polarization,
    scenario: &Scenario,
    kx: f64,
    ky: f64,
) -> Result<Vec<HybridMode>> {
    let (Medium::Sheet(s1), Medium::Sheet(s2)) = (&scenario.body1.medium, &scenario.body2.medium)
    else {
        unreachable!("checked by caller");
    };
    let roots = sheet_roots(scenario, kx, ky)?;
    let k = kx.hypot(ky);
    let scale = roots
        .iter()
        .map(|z| z.norm())
        .fold(s1.omega_sp.max(s2.omega_sp), f64::max);
    let lambda_0 = (-k * scenario.d).exp() * (s1.omega_sp * s2.omega_sp).sqrt() / 2.0;
    Ok(roots
        .into_iter()
        .filter(|z| z.im > 1e-9 * scale)
        .map(|z| HybridMode {
            kx,
            ky,
            pol,
            omega_c: z,
            lambda_0: Some(lambda_0),
        })
        .collect())
}

/// Seeded Newton search for the zeros of `D` with `λ > 0`, certified against
/// the winding number of `D` over a rectangle spanning the real parts where
/// both bodies have poles, from a floor of `10⁻³` of the largest expected rate
/// up to three times that rate. Uncounted zeros are hunted by bisecting the
/// rectangle; a surplus of found zeros or an unresolved deficit is an error.
pub fn find_complex_modes_generic(
    pol: Polarization,
    scenario: &Scenario,
    kx: f64,
    ky: f64,
) -> Result<Vec<HybridMode>> {
    let ch = Characteristic::new(scenario, pol, kx, ky);
    let k = ch.k();
    if scenario.relative_velocity() == 0.0 || k == 0.0 {
        return Ok(Vec::new());
    }
    let Some((lo, hi)) = search_window(scenario, kx, k) else {
        return Ok(Vec::new());
    };
    let poles = lab_poles(scenario, pol, kx, ky, lo, hi)?;
    let seeds = seeds(scenario, k, &poles);

    let mut found: Vec<(Complex64, Option<f64>)> = Vec::new();
    let dedup = 1e-6 * k;
    let accept = |found: &mut Vec<(Complex64, Option<f64>)>, z: Complex64, l0: Option<f64>| {
        if z.im > 1e-12 * k
            && z.re > lo
            && z.re < hi
            && found.iter().all(|(w, _)| (w - z).norm() > dedup)
        {
            found.push((z, l0));
            true
        } else {
            false
        }
    };
    for s in &seeds {
        if let Some(z) = polish(&ch, s.z) {
            accept(&mut found, z, Some(s.lambda_0));
        }
    }

    let lambda_ref = seeds.iter().map(|s| s.lambda_0).fold(0.0, f64::max);
    let lambda_ref = if lambda_ref > 0.0 {
        lambda_ref
    } else {
        let bmax = |ps: &[LabPole]| ps.iter().map(|p| p.residue.abs()).fold(0.0, f64::max);
        let l = ((-2.0 * k * scenario.d).exp() * bmax(&poles[0]) * bmax(&poles[1])).sqrt();
        l.max(1e-6 * k)
    };
    let mut pole_hints: Vec<f64> = poles.iter().flatten().map(|p| p.omega_lab).collect();
    pole_hints.sort_by(f64::total_cmp);

    let floor_min = 10.0 * MIN_RATE * k;
    let mut floor = (1e-3 * lambda_ref).max(floor_min);
    let mut top_factor = 3.0;
    let mut searched = false;
    let mut counted = 0;
    for _ in 0..8 {
        let max_found = found.iter().map(|(z, _)| z.im).fold(0.0, f64::max);
        if found
            .iter()
            .any(|(z, _)| z.im > 0.5 * floor && z.im < 2.0 * floor)
        {
            floor = if floor / 8.0 >= floor_min {
                floor / 8.0
            } else {
                4.0 * floor
            };
            continue;
        }
        let top = (top_factor * lambda_ref)
            .max(2.0 * max_found)
            .max(8.0 * floor);
        let rect = Rect::new(lo, hi, floor, top)?;
        let mut hints = pole_hints.clone();
        hints.extend(found.iter().map(|(z, _)| z.re));
        hints.sort_by(f64::total_cmp);
        let n = match winding_number_with(&|z| ch.eval(z), &rect, &hints, &TraceOptions::default())
        {
            Ok(n) => n,
            Err(Error::BoundaryTooClose { .. }) => {
                floor = if 0.7 * floor >= floor_min {
                    0.7 * floor
                } else {
                    1.7 * floor
                };
                top_factor *= 1.3;
                continue;
            }
            Err(e) => return Err(e),
        };
        counted = n;
        let inside = found.iter().filter(|(z, _)| rect.contains(*z)).count() as i64;
        if n == inside {
            let mut modes: Vec<HybridMode> = found
                .into_iter()
                .map(|(z, l0)| HybridMode {
                    kx,
                    ky,
                    pol,
                    omega_c: z,
                    lambda_0: l0,
                })
                .collect();
            modes.sort_by(|a, b| {
                a.omega_c
                    .re
                    .total_cmp(&b.omega_c.re)
                    .then(a.omega_c.im.total_cmp(&b.omega_c.im))
            });
            return Ok(modes);
        }
        if n < inside || searched {
            break;
        }
        searched = true;
        let aspect = rect.width() / rect.height() / 64.0;
        let known = found_snapshot(&found);
        hunt(
            &ch,
            &rect,
            &hints,
            aspect,
            48,
            &mut |z| accept(&mut found, z, None),
            &known,
        )?;
    }
    Err(Error::CertificationFailed {
        kx,
        ky,
        found: found.len(),
        counted,
    })
}

fn found_snapshot(found: &[(Complex64, Option<f64>)]) -> Vec<Complex64> {
    found.iter().map(|(z, _)| *z).collect()
}

/// Recursively halves `rect` wherever the winding count exceeds the known
/// zeros, running Newton from each sub-rectangle's centre.
fn hunt(
    ch: &Characteristic,
    rect: &Rect,
    hints: &[f64],
    aspect: f64,
    depth: u32,
    accept: &mut dyn FnMut(Complex64) -> bool,
    known: &[Complex64],
) -> Result<()> {
    let mut known = known.to_vec();
    hunt_inner(ch, rect, hints, aspect, depth, accept, &mut known)
}

fn hunt_inner(
    ch: &Characteristic,
    rect: &Rect,
    hints: &[f64],
    aspect: f64,
    depth: u32,
    accept: &mut dyn FnMut(Complex64) -> bool,
    known: &mut Vec<Complex64>,
) -> Result<()> {
    let n = match winding_number_with(&|z| ch.eval(z), rect, hints, &TraceOptions::default()) {
        Ok(n) => n,
        Err(Error::BoundaryTooClose { .. }) => return Ok(()),
        Err(e) => return Err(e),
    };
    let inside =
        |known: &Vec<Complex64>| known.iter().filter(|z| rect.contains(**z)).count() as i64;
    if n <= inside(known) {
        return Ok(());
    }
    let centre = Complex64::new(
        0.5 * (rect.re_min + rect.re_max),
        0.5 * (rect.im_min + rect.im_max),
    );
    if let Some(z) = polish(ch, centre) {
        if accept(z) {
            known.push(z);
        }
    }
    if n <= inside(known) || depth == 0 {
        return Ok(());
    }
    for sub in rect.split(aspect) {
        hunt_inner(ch, &sub, hints, aspect, depth - 1, accept, known)?;
    }
    Ok(())
}

/// `Σλ` over the certified unstable modes at `(kx, ky)`.
pub fn lambda_spectrum(pol: Polarization, scenario: &Scenario, kx: f64, ky: f64) -> Result<f64> {
    Ok(find_complex_modes(pol, scenario, kx, ky)?
        .iter()
        .map(HybridMode::lambda)
        .sum())
}

/// The zero of `D` grown from one pole pair, found by Newton from the pair's
/// two-pole estimate; `None` when it is real. Not certified.
pub fn pair_mode(
    scenario: &Scenario,
    pol: Polarization,
    pair: &PairId,
    kx: f64,
    ky: f64,
) -> Result<Option<Complex64>> {
    let k = kx.hypot(ky);
    let (w1, b1) = branch_pole(
        &scenario.body1.medium,
        pol,
        pair.branch_1,
        pair.positive_1,
        k,
    )?;
    let (w2, b2) = branch_pole(
        &scenario.body2.medium,
        pol,
        pair.branch_2,
        pair.positive_2,
        k,
    )?;
    let (l1, l2) = (w1 + scenario.body1.v * kx, w2 + scenario.body2.v * kx);
    let mid = 0.5 * (l1 + l2);
    let g = gap_factor_real(scenario, k, mid);
    let [z0, _] = two_pole_roots(l1, l2, b1, b2, g);
    let l0 = (g * (b1 * b2).abs()).sqrt();
    let seed = Complex64::new(z0.re, z0.im.max(0.2 * l0));
    let ch = Characteristic::new(scenario, pol, kx, ky);
    Ok(polish(&ch, seed)
        .filter(|z| z.im > 1e-9 * l0 && (z.re - mid).abs() < 4.0 * l0 + 0.5 * (l1 - l2).abs()))
}

#[cfg(test)]
mod tests;
