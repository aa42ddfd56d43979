//! Closed-form characteristic polynomial of two plasmon sheets.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::media::{GapCoupling, Medium, Scenario};
use crate::roots::{polynomial_eval, polynomial_roots};

/// Ascending coefficients of
/// `((ω − v₁kx)² − ω₁²)((ω − v₂kx)² − ω₂²) − e^(−2kd)ω₁²ω₂²`,
/// whose roots are the zeros of the sheet characteristic function.
pub fn sheet_quartic(scenario: &Scenario, kx: f64, ky: f64) -> Result<[f64; 5]> {
    let (Medium::Sheet(s1), Medium::Sheet(s2)) = (&scenario.body1.medium, &scenario.body2.medium)
    else {
        return Err(Error::InvalidInput("sheet quartic needs two sheets".into()));
    };
    if scenario.gap != GapCoupling::Quasistatic {
        return Err(Error::InvalidInput(
            "sheet quartic needs the quasistatic gap factor".into(),
        ));
    }
    let k = kx.hypot(ky);
    let g = (-2.0 * k * scenario.d).exp();
    let (w1, w2) = (s1.omega_sp * s1.omega_sp, s2.omega_sp * s2.omega_sp);
    let (a, b) = (scenario.body1.v * kx, scenario.body2.v * kx);
    let (a0, a1) = (a * a - w1, -2.0 * a);
    let (b0, b1) = (b * b - w2, -2.0 * b);
    Ok([
        a0 * b0 - g * w1 * w2,
        a0 * b1 + a1 * b0,
        a0 + b0 + a1 * b1,
        a1 + b1,
        1.0,
    ])
}

/// All four roots of [`sheet_quartic`], Newton-polished and sorted by real
/// then imaginary part.
pub fn sheet_roots(scenario: &Scenario, kx: f64, ky: f64) -> Result<Vec<Complex64>> {
    let c = sheet_quartic(scenario, kx, ky)?;
    let mut roots = polynomial_roots(&c)?;
    for z in roots.iter_mut() {
        for _ in 0..8 {
            let (p, dp) = polynomial_eval(&c, *z);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = *z - step;
            if polynomial_eval(&c, next).0.norm() > p.norm() {
                break;
            }
            *z = next;
            if step.norm() <= 1e-16 * z.norm() {
                break;
            }
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}
