mod common;

use common::{eps_matrix, matrix_rel_diff};
use trimstab::geometry::GeometryMap;
use trimstab::stabilization::StabMode;

#[test]
fn theta_zero_is_the_unstabilized_system() {
    for eps in [1e-2, 1e-6] {
        let plain = eps_matrix(&GeometryMap::Identity, eps, 0.0, StabMode::None);
        for mode in [StabMode::Parametric, StabMode::Physical] {
            assert!(
                eps_matrix(&GeometryMap::Identity, eps, 0.0, mode) == plain,
                "eps = {eps:e}, {mode:?}"
            );
        }
    }
}

#[test]
fn parametric_and_physical_coincide_for_affine_maps() {
    let affine = GeometryMap::affine([-2.0, -1.0], [3.0, 2.0]).unwrap();
    for map in [GeometryMap::Identity, affine] {
        for eps in [1e-2, 1e-6] {
            let a = eps_matrix(&map, eps, 1.0, StabMode::Parametric);
            let b = eps_matrix(&map, eps, 1.0, StabMode::Physical);
            let d = matrix_rel_diff(&a, &b);
            assert!(d < 1e-10, "{}: {d:e}", map.name());
        }
    }
}

#[test]
fn stabilization_changes_the_system_and_keeps_it_symmetric() {
    let none = eps_matrix(&GeometryMap::Identity, 1e-6, 1.0, StabMode::None);
    let par = eps_matrix(&GeometryMap::Identity, 1e-6, 1.0, StabMode::Parametric);
    assert!(none != par);
    assert!(none.asymmetry() < 1e-12 * none.max_abs());
    assert!(par.asymmetry() < 1e-12 * par.max_abs());
}
