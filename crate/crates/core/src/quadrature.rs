//! Quadrature rules, compensated summation and Richardson extrapolation.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
    let d = n as f64 * (z * p - pm1) / (z * z - 1.0);
    (p, d)
}

/// Cached 16-point rule.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

/// Maps a rule on `[-1, 1]` to `[a, b]`, returning `(nodes, weights)`.
pub fn map_rule(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64) -> Vec<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| (c + h * x, h * w))
        .collect()
}

/// Nodes and weights of `panels` equal Gauss–Legendre panels over `[a, b]`.
pub fn composite_rule(
    rule: &(Vec<f64>, Vec<f64>),
    a: f64,
    b: f64,
    panels: usize,
) -> Vec<(f64, f64)> {
    let step = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + step * p as f64;
            let hi = if p + 1 == panels { b } else { lo + step };
            map_rule(rule, lo, hi)
        })
        .collect()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: `(kronrod, |kronrod − gauss|)`.
pub fn gk15<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx)? + f(c + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss–Kronrod 7/15 integration.
///
/// Stops when the summed error is below `max(abs_tol, rel_tol·|I|)`; fails with
/// [`Error::NonConvergence`] after `max_panels` panels.
pub fn integrate_adaptive<F: FnMut(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    integrate_adaptive_partition(f, &[a, b], abs_tol, rel_tol, max_panels)
}

/// [`integrate_adaptive`] starting from the partition given by ascending `points`.
pub fn integrate_adaptive_partition<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Integral> {
    let mut panels = Vec::new();
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1])?;
            panels.push((w[0], w[1], v, e));
            evals += 15;
        }
    }
    if panels.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let max_panels = max_panels.max(panels.len() + 2);
    loop {
        let total = compensated_sum(panels.iter().map(|p| p.2));
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(Integral {
                value: total,
                error: err,
                evaluations: evals,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence {
                residual: err,
                tolerance: abs_tol.max(rel_tol * total.abs()),
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            let total = compensated_sum(panels.iter().map(|p| p.2));
            return Err(Error::NonConvergence {
                residual: err,
                tolerance: rel_tol * total.abs(),
            });
        }
        let (v1, e1) = gk15(&mut f, lo, mid)?;
        let (v2, e2) = gk15(&mut f, mid, hi)?;
        evals += 30;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
}

/// Richardson extrapolation to `h → 0` of three values at `h, h/r, h/r²`, with
/// the convergence order estimated from the data.
///
/// Returns `(limit, order, error_estimate)`. When the differences do not
/// contract the last value is returned with the last difference as its error.
pub fn richardson3(values: [f64; 3], ratio: f64) -> (f64, f64, f64) {
    let [a0, a1, a2] = values;
    let d1 = a1 - a0;
    let d2 = a2 - a1;
    if d2 == 0.0 {
        return (a2, f64::INFINITY, 0.0);
    }
    let q = d1 / d2;
    if !(q.is_finite() && q > 1.0) {
        return (a2, 0.0, d2.abs().max(d1.abs()));
    }
    let order = q.ln() / ratio.ln();
    let factor = 1.0 / (q - 1.0);
    let limit = a2 + d2 * factor;
    (limit, order, (d2 * factor).abs())
}
