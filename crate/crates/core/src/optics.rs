//! Scalar building blocks: propagation constants, wave admittances, Doppler
//! shifts and the reflection coefficients of the two body models.
//!
//! All quantities use `c = 1`. Frequencies passed to the reflection functions
//! are co-moving-frame frequencies `ω̃`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::media::{Medium, Polarization, SheetMedium, SlabMedium};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative size of the reflection denominator below which an evaluation is
/// treated as sitting on a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Propagation constant `γ = √(k² − εμω²)` along `+z`.
///
/// The principal branch is used (`Re γ ≥ 0`); on the branch cut (`Re γ = 0`)
/// the sign of `Im γ` is chosen opposite to `Re ω`, the outgoing-wave convention.
pub fn gamma(k: f64, omega: Complex64, eps_rel: f64, mu_rel: f64) -> Complex64 {
    let arg = Complex64::new(k * k, 0.0) - omega * omega * (eps_rel * mu_rel);
    let mut g = arg.sqrt();
    if g.re < 0.0 {
        g = -g;
    }
    if g.re == 0.0 && g.im * omega.re > 0.0 {
        g = -g;
    }
    g
}

/// Normalized wave admittance: `Yᵖ = εω/(iγ)`, `Yˢ = iγ/(ωμ)`.
pub fn admittance(
    pol: Polarization,
    omega: Complex64,
    gamma_val: Complex64,
    eps_rel: f64,
    mu_rel: f64,
) -> Result<Complex64> {
    match pol {
        Polarization::P => {
            if gamma_val == Complex64::new(0.0, 0.0) {
                return Err(Error::Degenerate("p admittance needs gamma != 0".into()));
            }
            Ok(omega * eps_rel / (I * gamma_val))
        }
        Polarization::S => {
            if omega == Complex64::new(0.0, 0.0) {
                return Err(Error::Degenerate("s admittance needs omega != 0".into()));
            }
            Ok(I * gamma_val / (omega * mu_rel))
        }
    }
}

/// Lab frequency to co-moving frequency: `ω̃ = ω − v·kx`.
pub fn doppler(omega_lab: Complex64, kx: f64, v: f64) -> Complex64 {
    omega_lab - v * kx
}

/// `sinh(√u·h)/√u` and `cosh(√u·h)`, both entire in `u`.
fn slab_sc(u: Complex64, h: f64) -> (Complex64, Complex64) {
    let x = u * (h * h);
    if x.norm() < 1e-4 {
        let s = h * (1.0 + x / 6.0 + x * x / 120.0 + x * x * x / 5040.0);
        let c = 1.0 + x / 2.0 + x * x / 24.0 + x * x * x / 720.0;
        (s, c)
    } else {
        let g = u.sqrt();
        let gh = g * h;
        ((gh).sinh() / g, gh.cosh())
    }
}

/// Numerator and denominator of the grounded-slab reflection coefficient at
/// transverse wavenumber `k`, cleared of the removable `γ_d` singularities:
///
/// * p: `(u S − ε γ₀ C) / (u S + ε γ₀ C)`
/// * s: `(γ₀ S − C) / (γ₀ S + C)`
///
/// with `u = γ_d²`, `S = sinh(γ_d h)/γ_d`, `C = cosh(γ_d h)`. Both are
/// algebraically identical to `(Y₀ − coth(γ_d h) Y_d)/(Y₀ + coth(γ_d h) Y_d)`.
pub fn slab_fraction(
    pol: Polarization,
    omega_co: Complex64,
    k: f64,
    slab: &SlabMedium,
) -> (Complex64, Complex64) {
    let eps = slab.eps();
    let g0 = gamma(k, omega_co, 1.0, 1.0);
    let u = Complex64::new(k * k, 0.0) - omega_co * omega_co * eps;
    let g = u.sqrt();
    if g.re * slab.h > 1.0 {
        // Strongly evanescent slab field: scale by 2γ_d·exp(−γ_d h) and use
        // E = exp(−2γ_d h). The differences γ₀ − γ_d and γ_d − εγ₀ are formed
        // from their squares, so a nearly transparent slab loses no accuracy.
        let e = (-2.0 * g * slab.h).exp();
        let w2 = omega_co * omega_co;
        return match pol {
            Polarization::P => {
                let sum = g + eps * g0;
                let diff = (eps - 1.0) * (eps * w2 - (eps + 1.0) * k * k) / sum;
                (diff - e * sum, sum - e * diff)
            }
            Polarization::S => {
                let sum = g0 + g;
                let diff = (eps - 1.0) * w2 / sum;
                (diff - e * sum, sum - e * diff)
            }
        };
    }
    let (s, c) = slab_sc(u, slab.h);
    match pol {
        Polarization::P => (u * s - eps * g0 * c, u * s + eps * g0 * c),
        Polarization::S => (g0 * s - c, g0 * s + c),
    }
}

/// Reflection coefficient of a PEC-backed slab seen from vacuum, in the slab's
/// co-moving frame.
pub fn reflection_slab(
    pol: Polarization,
    omega_co: Complex64,
    kx: f64,
    ky: f64,
    slab: &SlabMedium,
) -> Result<Complex64> {
    let k = kx.hypot(ky);
    if k == 0.0 && omega_co == Complex64::new(0.0, 0.0) {
        return Err(Error::Degenerate(
            "reflection at k = 0 and omega = 0".into(),
        ));
    }
    let (num, den) = slab_fraction(pol, omega_co, k, slab);
    if den.norm() < POLE_TOLERANCE * num.norm() {
        return Err(Error::Pole { omega: omega_co });
    }
    Ok(num / den)
}

/// Reflection straight from the admittance form `(Y₀ − coth(γ_d h)Y_d)/(Y₀ + coth(γ_d h)Y_d)`.
/// Kept as an independent route for cross-checking [`slab_fraction`].
pub fn reflection_slab_admittance_form(
    pol: Polarization,
    omega_co: Complex64,
    k: f64,
    slab: &SlabMedium,
) -> Result<Complex64> {
    let g0 = gamma(k, omega_co, 1.0, 1.0);
    let gd = gamma(k, omega_co, slab.eps(), slab.mu_rel());
    let y0 = admittance(pol, omega_co, g0, 1.0, 1.0)?;
    let yd = admittance(pol, omega_co, gd, slab.eps(), slab.mu_rel())?;
    let coth = (gd * slab.h).cosh() / (gd * slab.h).sinh();
    Ok((y0 - coth * yd) / (y0 + coth * yd))
}

/// Surface-plasmon sheet: `R(ω) = −ω_sp²/(ω² − ω_sp²)`.
pub fn reflection_sheet(omega_co: Complex64, sheet: &SheetMedium) -> Result<Complex64> {
    let (num, den) = sheet_fraction(omega_co, sheet);
    if den.norm() < POLE_TOLERANCE * num.norm() {
        return Err(Error::Pole { omega: omega_co });
    }
    Ok(num / den)
}

pub(crate) fn sheet_fraction(omega_co: Complex64, sheet: &SheetMedium) -> (Complex64, Complex64) {
    let w2 = sheet.omega_sp * sheet.omega_sp;
    (Complex64::new(-w2, 0.0), omega_co * omega_co - w2)
}

impl Medium {
    /// Reflection numerator and denominator at `(ω̃, k)`.
    pub fn fraction(
        &self,
        pol: Polarization,
        omega_co: Complex64,
        k: f64,
    ) -> (Complex64, Complex64) {
        match self {
            Medium::Slab(s) => slab_fraction(pol, omega_co, k, s),
            Medium::Sheet(s) => sheet_fraction(omega_co, s),
        }
    }

    pub fn reflection(
        &self,
        pol: Polarization,
        omega_co: Complex64,
        kx: f64,
        ky: f64,
    ) -> Result<Complex64> {
        match self {
            Medium::Slab(s) => reflection_slab(pol, omega_co, kx, ky, s),
            Medium::Sheet(s) => reflection_sheet(omega_co, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma(1.0, c(0.0, 0.0), 1.0, 1.0), c(1.0, 0.0));
        assert!((gamma(2.0, c(1.0, 0.0), 1.0, 1.0) - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
        // Above the light line on the real axis: purely imaginary, outgoing.
        let g = gamma(1.0, c(2.0, 0.0), 1.0, 1.0);
        assert_eq!(g.re, 0.0);
        assert!(g.im < 0.0);
        let g = gamma(1.0, c(-2.0, 0.0), 1.0, 1.0);
        assert!(g.im > 0.0);
    }

    #[test]
    fn gamma_picks_the_nonnegative_real_root() {
        let omega = c(1.0, 0.1);
        let g = gamma(0.5, omega, 196.0, 1.0);
        // Both square roots of k² − εω², computed independently in polar form.
        let z = c(0.25, 0.0) - omega * omega * 196.0;
        let (r, th) = z.to_polar();
        let r1 = Complex64::from_polar(r.sqrt(), th / 2.0);
        let r2 = -r1;
        let want = if r1.re >= 0.0 { r1 } else { r2 };
        assert!((g - want).norm() < 1e-12 * want.norm());
        assert!(g.re >= 0.0);
    }

    #[test]
    fn admittance_examples() {
        let y = admittance(Polarization::P, c(0.0, 1.0), c(1.0, 0.0), 1.0, 1.0).unwrap();
        assert!((y - c(1.0, 0.0)).norm() < 1e-15);
        let y = admittance(Polarization::S, c(1.0, 0.0), c(0.0, 1.0), 1.0, 1.0).unwrap();
        assert!((y - c(-1.0, 0.0)).norm() < 1e-15);
        // Real frequency below the light line: purely imaginary.
        let g = gamma(2.0, c(1.0, 0.0), 1.0, 1.0);
        let y = admittance(Polarization::P, c(1.0, 0.0), g, 1.0, 1.0).unwrap();
        assert!(y.re.abs() < 1e-15 && y.im != 0.0);
        assert!(admittance(Polarization::P, c(1.0, 0.0), c(0.0, 0.0), 1.0, 1.0).is_err());
        assert!(admittance(Polarization::S, c(0.0, 0.0), c(1.0, 0.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn thick_slab_approaches_half_space() {
        let slab = SlabMedium::new(3.0, 60.0).unwrap();
        let omega = c(0.3, 0.02);
        let k = 1.2;
        for pol in Polarization::ALL {
            let r = reflection_slab(pol, omega, k, 0.0, &slab).unwrap();
            let g0 = gamma(k, omega, 1.0, 1.0);
            let gd = gamma(k, omega, 9.0, 1.0);
            let y0 = admittance(pol, omega, g0, 1.0, 1.0).unwrap();
            let yd = admittance(pol, omega, gd, 9.0, 1.0).unwrap();
            let fresnel = (y0 - yd) / (y0 + yd);
            assert!((r - fresnel).norm() < 1e-9, "{pol}: {r} vs {fresnel}");
        }
    }

    #[test]
    fn fig2_operating_point_is_a_p_pole() {
        let slab = SlabMedium::new(14.0, 1.0).unwrap();
        let k = 1.598;
        let (_, den_lo) = slab_fraction(Polarization::P, c(0.1597, 0.0), k, &slab);
        let (_, den_hi) = slab_fraction(Polarization::P, c(0.1599, 0.0), k, &slab);
        assert!(den_lo.re * den_hi.re < 0.0);
    }

    #[test]
    fn sheet_examples() {
        let sheet = SheetMedium::new(0.7).unwrap();
        assert!((reflection_sheet(c(0.0, 0.0), &sheet).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(reflection_sheet(c(1e9, 0.0), &sheet).unwrap().norm() < 1e-15);
        let r = reflection_sheet(c(0.7 * (1.0 + 1e-3), 0.0), &sheet).unwrap();
        assert!((r.re + 500.0).abs() < 0.3, "{r}");
        assert!(reflection_sheet(c(0.7, 0.0), &sheet).is_err());
    }

    #[test]
    fn doppler_examples() {
        assert_eq!(doppler(c(1.0, 0.0), 2.0, 0.0), c(1.0, 0.0));
        let v = 0.3;
        let w = doppler(c(0.0, 0.0), 0.9 / v, v);
        assert!((w - c(-0.9, 0.0)).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn gamma_squares_back(k in 0.0f64..20.0, wr in -5.0f64..5.0, wi in -2.0f64..2.0, eps in 1.0f64..300.0) {
            let omega = c(wr, wi);
            let g = gamma(k, omega, eps, 1.0);
            let want = c(k * k, 0.0) - omega * omega * eps;
            prop_assert!((g * g - want).norm() <= 1e-12 * (want.norm() + k * k + 1.0));
            prop_assert!(g.re >= 0.0);
        }

        #[test]
        fn unit_index_slab_is_displaced_mirror(
            p in any::<bool>(), k in 0.05f64..6.0, frac in 0.0f64..0.98, h in 0.05f64..4.0
        ) {
            // n_d = 1 is outside SlabMedium's domain; build it directly.
            let slab = SlabMedium { n_d: 1.0, h };
            let pol = if p { Polarization::P } else { Polarization::S };
            let omega = c(frac * k, 0.0);
            let (num, den) = slab_fraction(pol, omega, k, &slab);
            let r = num / den;
            let g0 = gamma(k, omega, 1.0, 1.0);
            let want = -(-2.0 * g0 * h).exp();
            prop_assert!((r - want).norm() <= 1e-12 * want.norm());
        }

        #[test]
        fn real_below_light_line(p in any::<bool>(), k in 0.05f64..12.0, frac in 0.001f64..0.999, n in 1.5f64..20.0) {
            let slab = SlabMedium::new(n, 1.0).unwrap();
            let pol = if p { Polarization::P } else { Polarization::S };
            let omega = c(frac * k, 0.0);
            if let Ok(r) = reflection_slab(pol, omega, k, 0.0, &slab) {
                prop_assert!(r.im.abs() <= 1e-10 * r.norm().max(1.0));
            }
        }

        #[test]
        fn cleared_form_matches_admittance_form(
            p in any::<bool>(), k in 0.1f64..8.0, wr in 0.01f64..3.0, wi in 0.001f64..0.5, n in 1.5f64..20.0
        ) {
            let slab = SlabMedium::new(n, 1.0).unwrap();
            let pol = if p { Polarization::P } else { Polarization::S };
            let omega = c(wr, wi);
            let a = reflection_slab(pol, omega, k, 0.0, &slab).unwrap();
            let b = reflection_slab_admittance_form(pol, omega, k, &slab).unwrap();
            prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{a} vs {b}");
        }

        #[test]
        fn sheet_reflection_is_even(wr in -4.0f64..4.0, wi in -1.0f64..1.0, wsp in 0.1f64..3.0) {
            let sheet = SheetMedium::new(wsp).unwrap();
            let w = c(wr, wi);
            if let (Ok(a), Ok(b)) = (reflection_sheet(w, &sheet), reflection_sheet(-w, &sheet)) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn doppler_round_trip(wr in -10.0f64..10.0, wi in -1.0f64..1.0, kx in -20.0f64..20.0, v in -0.9f64..0.9) {
            let w = c(wr, wi);
            let back = doppler(doppler(w, kx, v), kx, -v);
            prop_assert!((back - w).norm() <= 1e-13 * (w.norm() + (v * kx).abs()));
        }
    }
}
