//! Rotational energy operator of a rigid body in each spin-ℓ sector, for a
//! spherical, a symmetric and an asymmetric top.
//!
//! ```bash
//! cargo run --example rigid_rotor
//! ```

use symred::geometry::InertiaTensor;
use symred::operators::assemble_rigid_body;
use symred::spectral::hermitian_eigenvalues;

fn main() -> symred::Result<()> {
    let tops = [("spherical", [1.0, 1.0, 1.0]), ("prolate", [1.0, 1.0, 0.4]), ("asymmetric", [0.8, 1.3, 2.1])];
    for (name, moments) in tops {
        println!("{name} top, I = {moments:?}");
        for ell in 0..=3 {
            let m = assemble_rigid_body(ell, &InertiaTensor::from_principal(moments))?;
            let levels: Vec<String> = hermitian_eigenvalues(&m).iter().map(|l| format!("{l:.6}")).collect();
            println!("  ℓ={ell}: {}", levels.join(" "));
        }
    }

    // A symmetric top against ℓ(ℓ+1)/I₁ + m²(1/I₃ − 1/I₁).
    let (i1, i3) = (1.0, 0.4);
    let ell = 3usize;
    let m = assemble_rigid_body(ell, &InertiaTensor::from_principal([i1, i1, i3]))?;
    let mut exact: Vec<f64> = (-3i64..=3)
        .map(|k| (ell * (ell + 1)) as f64 / i1 + (k * k) as f64 * (1.0 / i3 - 1.0 / i1))
        .collect();
    exact.sort_by(f64::total_cmp);
    let worst = hermitian_eigenvalues(&m).iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("symmetric top ℓ=3, max deviation from the closed form: {worst:.2e}");

    // A linear molecule has rank-2 inertia; the pseudo-inverse drops the axis.
    let linear = assemble_rigid_body(1, &InertiaTensor::from_principal([2.0, 2.0, 0.0]))?;
    println!("linear rotor ℓ=1: {:?}", hermitian_eigenvalues(&linear));
    Ok(())
}
