//! Argument-principle tools on axis-aligned rectangles: winding numbers by
//! continuous-argument tracking and the sum of imaginary parts of enclosed zeros.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive_partition;

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max)
            || ![re_min, re_max, im_min, im_max]
                .iter()
                .all(|x| x.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "bad rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }

    fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    /// Point at arclength `s` on the counter-clockwise boundary starting at
    /// the lower-left corner.
    fn at(&self, s: f64) -> Complex64 {
        let (w, h) = (self.width(), self.height());
        if s <= w {
            Complex64::new(self.re_min + s, self.im_min)
        } else if s <= w + h {
            Complex64::new(self.re_max, self.im_min + (s - w))
        } else if s <= 2.0 * w + h {
            Complex64::new(self.re_max - (s - w - h), self.im_max)
        } else {
            Complex64::new(self.re_min, self.im_max - (s - 2.0 * w - h))
        }
    }

    fn corners(&self) -> [f64; 5] {
        let (w, h) = (self.width(), self.height());
        [0.0, w, w + h, 2.0 * w + h, self.perimeter()]
    }

    /// Halves along the longer side, measured relative to `aspect` (width units per height unit).
    pub fn split(&self, aspect: f64) -> [Rect; 2] {
        if self.width() >= aspect * self.height() {
            let m = 0.5 * (self.re_min + self.re_max);
            [Rect { re_max: m, ..*self }, Rect { re_min: m, ..*self }]
        } else {
            let m = 0.5 * (self.im_min + self.im_max);
            [Rect { im_max: m, ..*self }, Rect { im_min: m, ..*self }]
        }
    }
}

/// Controls the adaptive boundary trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceOptions {
    /// Samples per edge before refinement.
    pub initial_per_edge: usize,
    /// Maximum argument increment accepted between adjacent samples.
    pub max_arg_step: f64,
    /// Maximum bisection depth of a single initial segment.
    pub max_depth: u32,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            initial_per_edge: 16,
            max_arg_step: PI / 4.0,
            max_depth: 56,
        }
    }
}

/// A boundary sample with its continuous argument.
#[derive(Debug, Clone, Copy)]
pub struct TraceSample {
    pub s: f64,
    pub z: Complex64,
    pub value: Complex64,
    pub arg: f64,
}

/// Samples `f` along the boundary of `rect` counter-clockwise until adjacent
/// samples differ in argument by less than `max_arg_step`, and the argument
/// change over each accepted segment agrees with the sum over its halves.
/// The returned list is closed: the last sample repeats the first point.
///
/// Features narrower than the initial spacing can only be resolved if they are
/// announced: each real part in `hints` seeds both horizontal edges with points
/// graded geometrically away from it, starting at half the edge's distance from
/// the real axis.
pub fn trace_boundary<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    rect: &Rect,
    hints: &[f64],
    opts: &TraceOptions,
) -> Result<Vec<TraceSample>> {
    let eval = |s: f64| -> Result<(Complex64, Complex64)> {
        let z = rect.at(s);
        let v = f(z)?;
        if !(v.is_finite() && v.norm() > 0.0) {
            return Err(Error::BoundaryTooClose { at: z });
        }
        Ok((z, v))
    };
    let corners = rect.corners();
    let mut starts = Vec::new();
    for e in 0..4 {
        let (a, b) = (corners[e], corners[e + 1]);
        for i in 0..opts.initial_per_edge {
            starts.push(a + (b - a) * i as f64 / opts.initial_per_edge as f64);
        }
    }
    let (w, h) = (rect.width(), rect.height());
    for &x in hints
        .iter()
        .filter(|x| **x >= rect.re_min && **x <= rect.re_max)
    {
        for (y, to_s) in [(rect.im_min, 0), (rect.im_max, 1)] {
            let mut delta = 0.5 * y.abs().max(1e-300);
            let mut offsets = vec![0.0];
            while delta < w {
                offsets.push(delta);
                offsets.push(-delta);
                delta *= 2.0;
            }
            for o in offsets {
                let xx = x + o;
                if xx > rect.re_min && xx < rect.re_max {
                    let s = if to_s == 0 {
                        xx - rect.re_min
                    } else {
                        w + h + (rect.re_max - xx)
                    };
                    starts.push(s);
                }
            }
        }
    }
    starts.sort_by(f64::total_cmp);
    starts.dedup();
    starts.push(corners[4]);

    let (z0, v0) = eval(0.0)?;
    let mut out = vec![TraceSample {
        s: 0.0,
        z: z0,
        value: v0,
        arg: v0.arg(),
    }];
    for w in starts.windows(2) {
        let (zb, vb) = eval(w[1])?;
        // Stack of pending right endpoints, refined depth-first from the left.
        let mut stack = vec![(w[1], zb, vb, 0u32)];
        while let Some(&(sb, zb, vb, depth)) = stack.last() {
            let left = *out.last().expect("nonempty");
            let sm = 0.5 * (left.s + sb);
            let (zm, vm) = eval(sm)?;
            let d1 = (vm / left.value).arg();
            let d2 = (vb / vm).arg();
            let d = (vb / left.value).arg();
            let ok = d1.abs() < opts.max_arg_step
                && d2.abs() < opts.max_arg_step
                && (d1 + d2 - d).abs() < 1e-9;
            if ok {
                stack.pop();
                out.push(TraceSample {
                    s: sm,
                    z: zm,
                    value: vm,
                    arg: left.arg + d1,
                });
                out.push(TraceSample {
                    s: sb,
                    z: zb,
                    value: vb,
                    arg: left.arg + d1 + d2,
                });
            } else {
                if depth >= opts.max_depth || sm <= left.s || sm >= sb {
                    return Err(Error::BoundaryTooClose { at: zm });
                }
                stack.push((sm, zm, vm, depth + 1));
            }
        }
    }
    Ok(out)
}

/// Winding number of `f` around the boundary of `rect` (zeros minus poles inside).
pub fn winding_number<F: Fn(Complex64) -> Result<Complex64>>(f: &F, rect: &Rect) -> Result<i64> {
    winding_number_with(f, rect, &[], &TraceOptions::default())
}

/// [`winding_number`] with feature hints; see [`trace_boundary`].
pub fn winding_number_with<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    rect: &Rect,
    hints: &[f64],
    opts: &TraceOptions,
) -> Result<i64> {
    let trace = trace_boundary(f, rect, hints, opts)?;
    Ok(winding_from_trace(&trace))
}

fn winding_from_trace(trace: &[TraceSample]) -> i64 {
    let total = trace.last().expect("nonempty").arg - trace[0].arg;
    (total / (2.0 * PI)).round() as i64
}

/// Sum of the imaginary parts of the zeros of `f` inside `rect`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMoment {
    pub sum_im: f64,
    pub count: i64,
    pub error: f64,
}

/// Computes `Σ Im zⱼ` over the zeros of `f` inside `rect`, assuming `f` has no
/// poles there.
///
/// Integrating `∮ z f′/f dz` by parts removes the derivative:
/// `Σ Im zⱼ = N·y₀ + (1/2π)[∫_bottom ln|f| dx − ∫_top ln|f| dx − ∫_right A dy + ∫_left A dy]`
/// with `A` the argument of `f` continued along the boundary from the lower-left
/// corner. `hints` are real parts near which the bottom edge is expected to
/// vary rapidly; they seed the adaptive partition.
pub fn sum_imag_zeros<F: Fn(Complex64) -> Result<Complex64>>(
    f: &F,
    rect: &Rect,
    hints: &[f64],
    abs_tol: f64,
) -> Result<ZeroMoment> {
    let trace = trace_boundary(f, rect, hints, &TraceOptions::default())?;
    let count = winding_from_trace(&trace);
    let corners = rect.corners();
    let max_panels = 20_000;

    // Horizontal edges: a coarse uniform partition refined geometrically
    // around the hinted real parts, then adaptive.
    let horiz = |y: f64| -> Result<(f64, f64)> {
        let w = rect.width();
        let mut pts: Vec<f64> = (0..=8).map(|i| rect.re_min + w * i as f64 / 8.0).collect();
        for &x in hints
            .iter()
            .filter(|x| **x > rect.re_min && **x < rect.re_max)
        {
            pts.push(x);
            let mut delta = 0.5 * y.abs().max(1e-300);
            while delta < w {
                for xx in [x - delta, x + delta] {
                    if xx > rect.re_min && xx < rect.re_max {
                        pts.push(xx);
                    }
                }
                delta *= 4.0;
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let r = integrate_adaptive_partition(
            |x| Ok(f(Complex64::new(x, y))?.norm().ln()),
            &pts,
            abs_tol,
            0.0,
            max_panels,
        )?;
        Ok((r.value, r.error))
    };
    let (bottom, e_b) = horiz(rect.im_min)?;
    let (top, e_t) = horiz(rect.im_max)?;

    // Vertical edges: continuous argument anchored at the nearest trace sample.
    let vert = |s_lo: f64, s_hi: f64| -> Result<(f64, f64)> {
        let seg: Vec<TraceSample> = trace
            .iter()
            .copied()
            .filter(|t| t.s >= s_lo && t.s <= s_hi)
            .collect();
        let pts: Vec<f64> = seg.iter().map(|t| t.s).collect();
        let pts = thin(&pts, 64);
        let r = integrate_adaptive_partition(
            |s| {
                let i = match seg.binary_search_by(|t| t.s.total_cmp(&s)) {
                    Ok(i) => i,
                    Err(i) => {
                        if i == 0 {
                            0
                        } else if i >= seg.len() {
                            seg.len() - 1
                        } else if s - seg[i - 1].s < seg[i].s - s {
                            i - 1
                        } else {
                            i
                        }
                    }
                };
                let anchor = seg[i];
                let v = f(rect.at(s))?;
                Ok(anchor.arg + (v / anchor.value).arg())
            },
            &pts,
            abs_tol,
            0.0,
            max_panels,
        )?;
        Ok((r.value, r.error))
    };
    let (right, e_r) = vert(corners[1], corners[2])?;
    let (left, e_l) = vert(corners[3], corners[4])?;

    let sum_im = count as f64 * rect.im_min + (bottom - top - right + left) / (2.0 * PI);
    Ok(ZeroMoment {
        sum_im,
        count,
        error: (e_b + e_t + e_r + e_l) / (2.0 * PI),
    })
}

/// Keeps at most about `max` points of an ascending list by taking every n-th,
/// always including both ends.
fn thin(pts: &[f64], max: usize) -> Vec<f64> {
    if pts.len() <= max {
        return pts.to_vec();
    }
    let stride = pts.len().div_ceil(max);
    let mut out: Vec<f64> = pts.iter().step_by(stride).copied().collect();
    if *out.last().expect("nonempty") != pts[pts.len() - 1] {
        out.push(pts[pts.len() - 1]);
    }
    out
}
