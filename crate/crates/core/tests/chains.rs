use pencil_core::contour::default_radius;
use pencil_core::corpus::{self, CorpusEntry};
use pencil_core::jordan::{compare_with_projections, reg_basis, regular_chain, sin_basis};
use pencil_core::laurent::basic_solution;
use pencil_core::linalg::{max_principal_angle, unit_vector};
use pencil_core::spectral::projections;
use pencil_core::{ComplexMatrix, Tolerances};

fn check(entry: &CorpusEntry) {
    let tol = Tolerances::default();
    let p = &entry.pencil;
    let basic = basic_solution(p, default_radius(p), 64, &tol).unwrap();
    let pair = projections(&basic, p, tol.fund).unwrap();
    let sin = sin_basis(p, 30, 1e-9).unwrap();
    let reg = reg_basis(p, 30, f64::INFINITY).unwrap();
    let c = compare_with_projections(p, &sin, &reg, &pair);
    assert_eq!(c.dim_sin + c.dim_reg, p.n);
    assert!(c.max_angle() <= 1e-6, "{:?}: {c:?}", entry.kind);
}

#[test]
fn chain_subspaces_match_projections() {
    check(&corpus::make_matrix_example(0.5).unwrap());
    check(&corpus::make_matrix_example(2.0).unwrap());
    check(&corpus::make_c0_example(0.25, 10).unwrap());
    check(&corpus::make_volterra_example(16).unwrap());
    check(&corpus::make_hierarchy_example(&corpus::hierarchy_geometric(8)).unwrap());
}

#[test]
fn c0_sin_basis_is_first_two_axes() {
    let e = corpus::make_c0_example(0.25, 10).unwrap();
    let sin = sin_basis(&e.pencil, 30, 1e-9).unwrap();
    let axes = ComplexMatrix::from_columns(10, &[unit_vector(10, 0), unit_vector(10, 1)]);
    assert!(max_principal_angle(&sin.vectors, &axes) <= 1e-6);
    assert!(sin.observed_rate < 1e-6);
    let reg = reg_basis(&e.pencil, 40, 1.0).unwrap();
    let tail = ComplexMatrix::from_columns(10, &(2..10).map(|k| unit_vector(10, k)).collect::<Vec<_>>());
    assert!(max_principal_angle(&reg.vectors, &tail) <= 1e-6);
    assert!((reg.observed_rate - 1.0 / 3.0).abs() < 0.02);
}

#[test]
fn gr_ex_sin_basis_is_first_axis() {
    let e = corpus::make_matrix_example(0.5).unwrap();
    let sin = sin_basis(&e.pencil, 30, 1e-9).unwrap();
    let axis = ComplexMatrix::from_columns(2, &[unit_vector(2, 0)]);
    assert!(max_principal_angle(&sin.vectors, &axis) <= 1e-9);
}

#[test]
fn hierarchy_regular_chain_rate_is_reciprocal_sigma() {
    let lam = corpus::hierarchy_geometric(8);
    let sigma: f64 = lam.iter().sum();
    let e = corpus::make_hierarchy_example(&lam).unwrap();
    let v = corpus::hierarchy_eigenvector(&lam).unwrap();
    let c = regular_chain(&e.pencil, &v, 60, 1e-9).unwrap();
    assert!((c.rate - 1.0 / sigma).abs() < 0.05 / sigma, "{} vs {}", c.rate, 1.0 / sigma);
    let reg = reg_basis(&e.pencil, 60, f64::INFINITY).unwrap();
    assert_eq!(reg.dim(), 1);
    let vb = ComplexMatrix::from_columns(9, &[v.normalize()]);
    assert!(max_principal_angle(&reg.vectors, &vb) <= 1e-8);
}

#[test]
fn volterra_has_no_regular_part() {
    let e = corpus::make_volterra_example(32).unwrap();
    assert_eq!(sin_basis(&e.pencil, 10, 1e-9).unwrap().dim(), 32);
    assert_eq!(reg_basis(&e.pencil, 10, 1.0).unwrap().dim(), 0);
}

#[test]
fn regular_only_pencil_is_full_space() {
    let p = pencil_core::LinearPencil::new(ComplexMatrix::identity(3), ComplexMatrix::zeros(3, 3)).unwrap();
    assert_eq!(reg_basis(&p, 5, 1.0).unwrap().dim(), 3);
}
