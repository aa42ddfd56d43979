//! Guided-mode branches of a grounded slab through the public interface.

use proptest::prelude::*;
use vacdrag_core::modes::{branch_count, cutoff_k, find_pole_frequencies, trace_branch};
use vacdrag_core::{Polarization, SlabMedium};

fn pol() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::S), Just(Polarization::P)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branch_count_is_monotone(n in 1.5f64..20.0, h in 0.2f64..3.0, k in 0.01f64..10.0, pol in pol()) {
        let slab = SlabMedium::new(n, h).unwrap();
        let here = branch_count(&slab, pol, k);
        prop_assert!(branch_count(&slab, pol, 1.1 * k) >= here);
        prop_assert_eq!(find_pole_frequencies(&slab, pol, k).len(), here);
        if pol == Polarization::P {
            prop_assert!(here >= 1);
        }
    }

    #[test]
    fn poles_lie_between_light_lines(n in 1.5f64..20.0, k in 0.1f64..10.0, pol in pol()) {
        let slab = SlabMedium::new(n, 1.0).unwrap();
        for w in find_pole_frequencies(&slab, pol, k) {
            prop_assert!(w > k / n && w < k);
        }
    }
}

#[test]
fn group_velocity_matches_quadratic_fit() {
    let slab = SlabMedium::new(14.0, 1.0).unwrap();
    for (pol, m) in [
        (Polarization::P, 0),
        (Polarization::P, 1),
        (Polarization::S, 0),
    ] {
        let k0 = cutoff_k(&slab, pol, m) + 1.0;
        let dk = 1e-3;
        let br = trace_branch(&slab, pol, m, &[k0 - dk, k0, k0 + dk]).unwrap();
        let (a, c) = (br.points[0].omega_co, br.points[2].omega_co);
        let fit = (c - a) / (2.0 * dk);
        let vg = br.points[1].v_g_co;
        assert!((vg - fit).abs() < 1e-2 * vg.abs(), "{pol} {m}: {vg} {fit}");
        assert!(vg > 0.0 && vg < 1.0);
    }
}

#[test]
fn tracing_rejects_bad_grids() {
    let slab = SlabMedium::new(14.0, 1.0).unwrap();
    assert!(trace_branch(&slab, Polarization::P, 0, &[]).is_err());
    assert!(trace_branch(&slab, Polarization::P, 0, &[1.0, 0.5]).is_err());
    assert!(trace_branch(&slab, Polarization::S, 0, &[0.01]).is_err());
}
