//! Plasmon sheets: the exact quartic against the generic finder and the
//! closed-form force.

use proptest::prelude::*;
use vacdrag_core::force::{force_mode_sum, force_pendry_c16, pendry_sheet_closed_form};
use vacdrag_core::instability::{
    find_complex_modes, find_complex_modes_generic, sheet_quartic, sheet_roots,
};
use vacdrag_core::{Grid, Polarization, Scenario, SheetMedium};

fn sheets(w: f64, v: f64, d: f64) -> Scenario {
    Scenario::sheets(SheetMedium::new(w).unwrap(), -v, v, d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generic_reproduces_quartic(w in 0.5f64..2.0, v in 0.1f64..0.3, kd in 0.5f64..6.0, ky_rel in 0.0f64..0.5, off in -1.5f64..1.5) {
        let kx0 = w / v;
        let s = sheets(w, v, kd / kx0);
        let ky = ky_rel * kx0;
        let kx = kx0 * (1.0 + 0.05 * off);
        let exact = find_complex_modes(Polarization::P, &s, kx, ky).unwrap();
        let generic = find_complex_modes_generic(Polarization::P, &s, kx, ky).unwrap();
        prop_assert_eq!(exact.len(), generic.len());
        for (a, b) in exact.iter().zip(&generic) {
            prop_assert!((a.omega_c - b.omega_c).norm() < 1e-8 * a.omega_c.norm().max(a.lambda()));
        }
    }

    #[test]
    fn quartic_roots_are_roots(w in 0.5f64..2.0, v in 0.0f64..0.3, d in 0.1f64..2.0, kx in 0.1f64..20.0, ky in 0.0f64..5.0) {
        let s = sheets(w, v, d);
        let c = sheet_quartic(&s, kx, ky).unwrap();
        for z in sheet_roots(&s, kx, ky).unwrap() {
            let p = c.iter().rev().fold(num_complex::Complex64::new(0.0, 0.0), |acc, &x| acc * z + x);
            let scale = c.iter().enumerate().map(|(i, x)| x.abs() * z.norm().powi(i as i32)).sum::<f64>();
            prop_assert!(p.norm() <= 1e-10 * scale, "{} {}", p.norm(), scale);
        }
    }
}

#[test]
fn pendry_integral_matches_closed_form() {
    for (w, v, d) in [(1.0, 0.1, 0.25), (1.0, 0.1, 1.0), (0.7, 0.2, 0.4)] {
        let s = sheets(w, v, d);
        let exact = pendry_sheet_closed_form(&s).unwrap();
        let f = force_pendry_c16(Polarization::P, &s, &Grid::default()).unwrap();
        assert!(
            (f.value - exact).abs() <= 1e-8 * exact,
            "{} {exact}",
            f.value
        );
    }
}

#[test]
fn mode_sum_approaches_pendry_with_distance() {
    let g = Grid::default();
    let gap = |d: f64| {
        let s = sheets(1.0, 0.1, d);
        let m = force_mode_sum(Polarization::P, &s, &g).unwrap().value;
        (m - pendry_sheet_closed_form(&s).unwrap()).abs() / m
    };
    let gaps = [gap(0.25), gap(0.5), gap(1.0)];
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}
