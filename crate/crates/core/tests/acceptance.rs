use symred::acceptance::{criteria, VerifyOptions};

fn check(id: usize) {
    let c = criteria().into_iter().find(|c| c.id == id).expect("known criterion");
    let v = c.run(&VerifyOptions::default());
    println!("{}", v.line());
    assert!(v.passed, "{}", v.line());
}

#[test]
fn c01_planar_bessel_spectrum() {
    check(1);
}

#[test]
fn c02_planar_axis_condition() {
    check(2);
}

#[test]
fn c03_disk_sector_sum() {
    check(3);
}

#[test]
fn c04_peter_weyl_algebra() {
    check(4);
}

#[test]
fn c05_jacobi_additivity() {
    check(5);
}

#[test]
fn c06_stratum_inertia_rank() {
    check(6);
}

#[test]
fn c07_connection_properties() {
    check(7);
}

#[test]
fn c08_rigid_body_spectrum() {
    check(8);
}

#[test]
fn c09_triatomic_vs_ambient() {
    check(9);
}

#[test]
fn c10_triatomic_boundary_conditions() {
    check(10);
}

#[test]
fn c11_shape_identities() {
    check(11);
}

#[test]
fn c12_self_adjointness_positivity() {
    check(12);
}
