use super::*;
use crate::argument::Rect;
use crate::media::{SheetMedium, SlabMedium};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn slab14() -> SlabMedium {
    SlabMedium::new(14.0, 1.0).unwrap()
}

fn fig2(d: f64) -> Scenario {
    Scenario::slabs(slab14(), -0.1, 0.1, d).unwrap()
}

fn sheets(w: f64, v: f64, d: f64) -> Scenario {
    Scenario::sheets(SheetMedium::new(w).unwrap(), -v, v, d).unwrap()
}

#[test]
fn threshold_examples() {
    assert!((threshold_velocity(14.0, 14.0) - 2.0 / 14.0).abs() < 1e-15);
    assert_eq!(threshold_velocity(3.0, f64::INFINITY), 1.0 / 3.0);
    assert_eq!(threshold_velocity(2.0, 2.0), 1.0);
}

#[test]
fn selection_kx_examples() {
    assert!((selection_kx(0.3, -0.3, -0.1, 0.1).unwrap() - 3.0).abs() < 1e-14);
    assert!((selection_kx(1.0, -1.0, -0.2, 0.3).unwrap() - 4.0).abs() < 1e-14);
    assert!(matches!(
        selection_kx(1.0, -1.0, 0.1, 0.1),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn two_pole_examples() {
    let (k, d, beta) = (2.0, 0.5, 0.3);
    let [a, b] = two_pole_mode(0.7, 0.7, beta, -beta, k, d);
    let l0 = (-k * d).exp() * beta;
    assert!((a - c(0.7, l0)).norm() < 1e-15 && (b - c(0.7, -l0)).norm() < 1e-15);
    // Detuning at the band edge gives a double real root, resolved to the
    // square root of the rounding error.
    let [a, b] = two_pole_mode(0.7 + l0, 0.7 - l0, beta, -beta, k, d);
    assert!(a.im.abs() < 1e-7 * l0 && (a - b).norm() < 1e-7 * l0);
    // Same-sign residues never go unstable.
    let [a, b] = two_pole_mode(0.7, 0.7, beta, beta, k, d);
    assert_eq!((a.im, b.im), (0.0, 0.0));
}

#[test]
fn characteristic_limits() {
    let s = fig2(200.0);
    let d = characteristic(Polarization::P, c(0.05, 0.01), 1.6, 0.0, &s).unwrap();
    assert!((d - 1.0).norm() < 1e-100);
    // Sheets at rest are real on the real axis below the light line.
    let s = Scenario::sheets(SheetMedium::new(1.0).unwrap(), 0.0, 0.0, 0.3).unwrap();
    let d = characteristic(Polarization::S, c(0.4, 0.0), 2.0, 0.5, &s).unwrap();
    assert_eq!(d.im, 0.0);
}

#[test]
fn sheet_quartic_zeros_characteristic() {
    let s = sheets(1.0, 0.1, 0.4);
    for (kx, ky) in [(10.0, 0.0), (9.8, 1.0), (3.0, 0.5)] {
        let roots = sheet_roots(&s, kx, ky).unwrap();
        assert_eq!(roots.len(), 4);
        let ch = Characteristic::new(&s, Polarization::P, kx, ky);
        for z in roots {
            assert!(ch.is_zero(z), "{z} at {kx}");
        }
    }
}

#[test]
fn below_threshold_no_selection() {
    let s = Scenario::slabs(slab14(), -0.07, 0.07, 1.0).unwrap();
    for ky in [0.0, 1.0, 5.0] {
        assert!(solve_selection(&s, Polarization::P, ky).unwrap().is_empty());
    }
}

#[test]
fn fig2_selection_point() {
    let s = fig2(1.0);
    let sols = solve_selection(&s, Polarization::P, 0.0).unwrap();
    let same: Vec<_> = sols
        .iter()
        .filter(|x| x.branch_1 == 0 && x.branch_2 == 0)
        .collect();
    assert_eq!(same.len(), 1, "{sols:?}");
    let x = same[0];
    assert!((x.kx - 1.598).abs() < 0.01, "{}", x.kx);
    assert!((x.k / x.omega_co_1.abs() - 10.0).abs() < 1e-6);
    assert!(x.omega_lab.abs() < 1e-12);
    for x in &sols {
        let l1 = x.omega_co_1 + s.body1.v * x.kx;
        let l2 = x.omega_co_2 + s.body2.v * x.kx;
        assert!((l1 - l2).abs() < 1e-10 * x.k);
        assert!(x.omega_co_1 * x.omega_co_2 < 0.0);
    }
}

#[test]
fn fig2_hybrid_mode() {
    let kx0 = solve_selection(&fig2(1.0), Polarization::P, 0.0).unwrap()[0].kx;
    let near = find_complex_modes(Polarization::P, &fig2(1.0), kx0, 0.0).unwrap();
    assert_eq!(near.len(), 1, "{near:?}");
    assert!(near[0].omega_c.re.abs() < 1e-6);
    let far = find_complex_modes(Polarization::P, &fig2(2.0), kx0, 0.0).unwrap();
    assert_eq!(far.len(), 1);
    assert!(near[0].lambda() > far[0].lambda());
    assert!(
        find_complex_modes(Polarization::P, &fig2(1.0), 1.2 * kx0, 0.0)
            .unwrap()
            .is_empty()
    );
}

#[test]
fn equal_velocities_are_stable() {
    let s = Scenario::slabs(slab14(), 0.1, 0.1, 1.0).unwrap();
    assert!(find_complex_modes(Polarization::S, &s, 2.0, 0.3)
        .unwrap()
        .is_empty());
    let s = Scenario::sheets(SheetMedium::new(1.0).unwrap(), 0.2, 0.2, 0.5).unwrap();
    assert!(find_complex_modes(Polarization::S, &s, 5.0, 0.0)
        .unwrap()
        .is_empty());
}

#[test]
fn sheet_winding_counts_upper_roots() {
    let s = sheets(1.0, 0.1, 0.3);
    let (kx, ky) = (10.0, 0.2);
    let roots = sheet_roots(&s, kx, ky).unwrap();
    let upper = roots.iter().filter(|z| z.im > 1e-12).count() as i64;
    assert_eq!(upper, 1);
    let rect = Rect::new(-3.0, 3.0, 1e-6, 1.0).unwrap();
    assert_eq!(
        winding_count(Polarization::P, &s, kx, ky, &rect).unwrap(),
        upper
    );
    // A rectangle around everything sees four zeros and four poles.
    let rect = Rect::new(-3.0, 3.0, -1.0, 1.0).unwrap();
    assert_eq!(
        winding_count(Polarization::P, &s, kx, ky, &rect).unwrap(),
        0
    );
}

#[test]
fn generic_matches_quartic_on_sheets() {
    let s = sheets(1.0, 0.1, 0.3);
    for (kx, ky) in [(10.0, 0.0), (10.05, 0.5), (9.9, 1.5)] {
        let exact = find_complex_modes(Polarization::P, &s, kx, ky).unwrap();
        let generic = find_complex_modes_generic(Polarization::P, &s, kx, ky).unwrap();
        assert_eq!(exact.len(), generic.len());
        for (a, b) in exact.iter().zip(&generic) {
            assert!(
                (a.omega_c - b.omega_c).norm() < 1e-8 * a.omega_c.norm().max(a.lambda()),
                "{a:?} {b:?}"
            );
        }
    }
}

#[test]
fn conjugate_is_a_zero() {
    let s = fig2(1.0);
    let kx0 = solve_selection(&s, Polarization::S, 0.0).unwrap()[0].kx;
    let modes = find_complex_modes(Polarization::S, &s, kx0, 0.0).unwrap();
    assert!(!modes.is_empty());
    let ch = Characteristic::new(&s, Polarization::S, kx0, 0.0);
    for m in modes {
        let z = polish(&ch, m.omega_c.conj()).unwrap();
        assert!((z - m.omega_c.conj()).norm() < 1e-9 * m.lambda().max(1e-12));
    }
}

#[test]
fn pair_mode_agrees_with_certified() {
    let s = fig2(1.0);
    let sol = solve_selection(&s, Polarization::S, 0.4).unwrap()[0];
    let kx = sol.kx + 0.3 * sol.half_width();
    let z = pair_mode(&s, Polarization::S, &sol.pair(), kx, 0.4)
        .unwrap()
        .unwrap();
    let modes = find_complex_modes(Polarization::S, &s, kx, 0.4).unwrap();
    assert!(
        modes.iter().any(|m| (m.omega_c - z).norm() < 1e-10),
        "{z} {modes:?}"
    );
    let outside = sol.kx + 3.0 * sol.half_width();
    assert!(pair_mode(&s, Polarization::S, &sol.pair(), outside, 0.4)
        .unwrap()
        .is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selection_invariants(v in 0.075f64..0.3, ky in 0.0f64..4.0, pol in prop_oneof![Just(Polarization::S), Just(Polarization::P)]) {
        let s = Scenario::slabs(slab14(), -v, v, 1.0).unwrap();
        for x in solve_selection(&s, pol, ky).unwrap() {
            let l1 = x.omega_co_1 + s.body1.v * x.kx;
            let l2 = x.omega_co_2 + s.body2.v * x.kx;
            prop_assert!((l1 - l2).abs() < 1e-10 * x.k);
            prop_assert!(x.omega_co_1 * x.omega_co_2 < 0.0);
            prop_assert!(x.residue_1 * x.residue_2 < 0.0);
            prop_assert!(x.kx > 0.0 && x.lambda_0 > 0.0);
        }
    }
}
