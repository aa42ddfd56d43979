//! Root finders: bracketed real roots, polynomial roots and damped complex Newton.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bracket [{a}, {b}] does not straddle a root ({fa}, {fb})"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::NonConvergence {
        residual: fb.abs(),
        tolerance: xtol,
    })
}

/// Illinois (modified regula falsi) on a bracket; tolerates jumps away from the root.
pub fn illinois<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidInput(format!(
            "bracket [{a}, {b}] has no sign change"
        )));
    }
    let mut side = 0;
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < xtol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < xtol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::NonConvergence {
        residual: (b - a).abs(),
        tolerance: xtol,
    })
}

/// Roots of `Σ coeffs[i] zⁱ` (real coefficients, ascending powers) as the
/// eigenvalues of the companion matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    if n < 2 {
        return Err(Error::Degenerate("polynomial of degree < 1".into()));
    }
    let deg = n - 1;
    let lead = coeffs[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -coeffs[i] / lead;
    }
    Ok(m.complex_eigenvalues().iter().copied().collect())
}

/// Evaluates a real-coefficient polynomial and its derivative at `z`.
pub fn polynomial_eval(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Settings for [`newton_complex`].
#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Finite-difference step for the derivative.
    pub step: f64,
    /// Converged when the Newton step is below this size.
    pub xtol: f64,
    pub max_iter: usize,
}

/// Damped Newton iteration for an analytic `f`, derivative by central differences.
/// The step is halved until `|f|` decreases.
pub fn newton_complex<F: FnMut(Complex64) -> Result<Complex64>>(
    mut f: F,
    z0: Complex64,
    opts: NewtonOptions,
) -> Result<Complex64> {
    let mut z = z0;
    let mut fz = f(z)?;
    for _ in 0..opts.max_iter {
        if fz.norm() == 0.0 {
            return Ok(z);
        }
        let h = opts.step;
        let df = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if df.norm() == 0.0 || !df.is_finite() {
            return Err(Error::NonConvergence {
                residual: fz.norm(),
                tolerance: 0.0,
            });
        }
        let dz = fz / df;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let zn = z - dz * t;
            if let Ok(fzn) = f(zn) {
                if fzn.norm() < fz.norm() || (dz * t).norm() <= opts.xtol {
                    z = zn;
                    fz = fzn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                residual: fz.norm(),
                tolerance: 0.0,
            });
        }
        if (dz * t).norm() <= opts.xtol {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence {
        residual: fz.norm(),
        tolerance: opts.xtol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn illinois_with_jump() {
        // Jumps from 0 to 0.1 at x = 0.2, crosses 0.5 continuously at x = 0.6.
        let f = |x: f64| Ok(if x < 0.2 { -0.5 } else { x - 0.1 - 0.5 });
        let r = illinois(f, 0.0, 1.0, 1e-13, 200).unwrap();
        assert!((r - 0.6).abs() < 1e-12);
    }

    #[test]
    fn quartic_roots() {
        // (z² + 1)(z − 2)(z + 3) = z⁴ + z³ − 5z² + z − 6
        let c = [-6.0, 1.0, -5.0, 1.0, 1.0];
        let mut r = polynomial_roots(&c).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let want = [
            Complex64::new(-3.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
        ];
        for (a, b) in r.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn newton_on_exponential() {
        let opts = NewtonOptions {
            step: 1e-7,
            xtol: 1e-15,
            max_iter: 100,
        };
        let z = newton_complex(|z| Ok(z.exp() - 2.0), Complex64::new(0.5, 0.5), opts).unwrap();
        assert!((z - Complex64::new(2f64.ln(), 0.0)).norm() < 1e-13);
        let z = newton_complex(|z| Ok(z * z + 4.0), Complex64::new(0.3, 1.0), opts).unwrap();
        assert!((z - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }
}
