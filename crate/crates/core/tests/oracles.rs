mod common;

use faer::Mat;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use trimstab::geometry::{quarter_annulus, GeometryMap};
use trimstab::linalg::condition_number_dense;
use trimstab::stabilization::StabMode;

#[test]
fn pencil_extremes_match_brute_force() {
    let e = pencil_error(11, 10);
    assert!(e < 1e-8, "{e:e}");
}

#[test]
fn condition_number_matches_singular_values() {
    let e = condition_error(12, 10);
    assert!(e < 1e-8, "{e:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn jacobi_condition_is_invariant_under_diagonal_scaling(
        seed in 0u64..1000,
        logd in proptest::collection::vec(-4.0f64..4.0, 12),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_spd(&mut rng, 12, 0.1);
        let d: Vec<f64> = logd.iter().map(|l| 10f64.powf(*l)).collect();
        let dad = Mat::from_fn(12, 12, |i, j| d[i] * a[(i, j)] * d[j]);
        let k0 = condition_number_dense(&a, true).unwrap();
        let k1 = condition_number_dense(&dad, true).unwrap();
        prop_assert!(rel(k1, k0) < 1e-8);
    }
}

#[test]
fn knot_insertion_preserves_the_curve() {
    let e = insertion_error();
    assert!(e < 1e-10, "{e:e}");
}

#[test]
fn bezier_extraction_matches_direct_evaluation() {
    let e = extraction_error();
    assert!(e < 1e-10, "{e:e}");
}

#[test]
fn flux_operators_reproduce_polynomials() {
    let affine = GeometryMap::affine([-2.0, -1.0], [3.0, 3.0]).unwrap();
    for map in [GeometryMap::Identity, affine] {
        for mode in [StabMode::Parametric, StabMode::Physical] {
            let e = flux_error(&map, mode);
            assert!(e < 1e-10, "{} {mode:?}: {e:e}", map.name());
        }
    }
    let e = flux_error(&quarter_annulus(), StabMode::Parametric);
    assert!(e < 1e-10, "annulus parametric: {e:e}");
}

#[test]
fn disk_area_and_arc_length() {
    let (area, len) = disk_errors();
    assert!(area < 1e-6 && len < 1e-6, "{area:e} {len:e}");
}
