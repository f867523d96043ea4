use std::sync::Arc;

use proptest::prelude::*;

use nitsche_fem::analysis::{build_phi_r, rates};
use nitsche_fem::experiments::energy_identity_defect;
use nitsche_fem::fespace::FeSpace;
use nitsche_fem::mesh::{build_patches, build_structured, jitter, DEFAULT_EDGES_PER_PATCH};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jitter_keeps_boundary_and_orientation(n in 2usize..16, seed in any::<u64>(), mag in 0.0f64..0.25) {
        let m = build_structured(n).unwrap();
        let j = jitter(&m, mag, seed).unwrap();
        prop_assert!(j.min_signed_area() > 0.0);
        let area: f64 = (0..j.triangles().len()).map(|k| j.area(k)).sum();
        prop_assert!((area - 1.0).abs() < 1e-12);
        for v in 0..m.vertices().len() {
            if m.is_boundary_vertex(v) {
                prop_assert_eq!(j.vertices()[v], m.vertices()[v]);
            }
        }
    }

    #[test]
    fn energy_identity_holds(order in 1usize..=2, n in 3usize..8, seed in any::<u64>(),
                             v in proptest::collection::vec(-1.0f64..1.0, 300)) {
        let s = FeSpace::new(Arc::new(jitter(&build_structured(n).unwrap(), 0.2, seed).unwrap()), order).unwrap();
        let coeffs: Vec<f64> = v.iter().cycle().take(s.ndofs()).cloned().collect();
        prop_assume!(coeffs.iter().any(|c| c.abs() > 1e-3));
        prop_assert!(energy_identity_defect(&s, &coeffs).unwrap() < 1e-12);
    }

    #[test]
    fn phi_r_meets_constraints(order in 1usize..=2, n in 10usize..24, seed in any::<u64>(),
                               r in proptest::collection::vec(-10.0f64..10.0, 32)) {
        let m = jitter(&build_structured(n).unwrap(), 0.2, seed).unwrap();
        let patches = build_patches(&m, DEFAULT_EDGES_PER_PATCH).unwrap();
        let s = FeSpace::new(Arc::new(m), order).unwrap();
        let r: Vec<f64> = r.iter().cycle().take(patches.len()).cloned().collect();
        let phi = build_phi_r(&s, &patches, &r).unwrap();
        prop_assert!(phi.constraint_residual(&patches) < 1e-9);
    }

    #[test]
    fn rates_recover_power_laws(c in 0.1f64..10.0, p in 0.5f64..4.0, levels in 2usize..6) {
        let h: Vec<f64> = (0..levels).map(|i| 0.1 / 2f64.powi(i as i32)).collect();
        let e: Vec<f64> = h.iter().map(|h| c * h.powf(p)).collect();
        let r = rates(&h, &e);
        prop_assert!(r[0].is_none());
        for x in &r[1..] {
            prop_assert!((x.unwrap() - p).abs() < 1e-9);
        }
    }
}
