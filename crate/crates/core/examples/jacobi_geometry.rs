//! Jacobi vectors, inertia, orbit-type strata and the mechanical connection
//! for a few hand-built configurations.
//!
//! ```bash
//! cargo run --example jacobi_geometry
//! ```

use symred::geometry::{
    angular_momentum, classify_stratum, connection_apply, inertia_operator, jacobi_velocities, kinetic_form,
    to_jacobi, AtomSystem, TangentVector, Vec3, DEFAULT_RANK_TOL,
};

fn describe(name: &str, sys: &AtomSystem) -> symred::Result<()> {
    let label = classify_stratum(sys, DEFAULT_RANK_TOL);
    let inertia = inertia_operator(sys);
    let (moments, _) = inertia.principal_axes();
    println!("{name}: {} (Jacobi rank {}, inertia rank {})", label.stratum.name(), label.rank, inertia.rank(DEFAULT_RANK_TOL));
    println!("  principal moments {:.6} {:.6} {:.6}", moments.x, moments.y, moments.z);
    for (i, r) in to_jacobi(sys).vectors.iter().enumerate() {
        println!("  r{} = ({:+.6}, {:+.6}, {:+.6})", i + 1, r.x, r.y, r.z);
    }
    Ok(())
}

fn main() -> symred::Result<()> {
    let v = Vec3::new;
    // water-like bent triatomic
    let water = AtomSystem::centered(
        vec![16.0, 1.0, 1.0],
        vec![v(0.0, 0.0, 0.0), v(0.757, 0.586, 0.0), v(-0.757, 0.586, 0.0)],
    )?;
    let co2 = AtomSystem::centered(vec![16.0, 12.0, 16.0], vec![v(-1.16, 0.0, 0.0), v(0.0, 0.0, 0.0), v(1.16, 0.0, 0.0)])?;
    let ammonia = AtomSystem::centered(
        vec![14.0, 1.0, 1.0, 1.0],
        vec![v(0.0, 0.0, 0.38), v(0.94, 0.0, 0.0), v(-0.47, 0.814, 0.0), v(-0.47, -0.814, 0.0)],
    )?;
    describe("water", &water)?;
    describe("carbon dioxide", &co2)?;
    describe("ammonia", &ammonia)?;

    // Kinetic energy and angular momentum are additive over Jacobi vectors.
    let t = TangentVector::projected(&water, vec![v(0.1, -0.2, 0.3), v(-0.4, 0.5, 0.1), v(0.2, 0.2, -0.6)])?;
    let jv = jacobi_velocities(&water, &t);
    let k_jac: f64 = jv.iter().map(|x| x.norm_squared()).sum();
    let l_jac = to_jacobi(&water).vectors.iter().zip(&jv).fold(Vec3::zeros(), |a, (r, u)| a + r.cross(u));
    println!("kinetic form: atoms {:.12}, Jacobi {:.12}", kinetic_form(&water, &t, &t), k_jac);
    let l = angular_momentum(&water, &t);
    println!("angular momentum: atoms {:.9?}, Jacobi {:.9?}", l.as_slice(), l_jac.as_slice());

    // The connection gives the body angular velocity carried by a motion.
    let w = connection_apply(&water, &t)?;
    println!("connection ω = {:.9?}", w.omega.as_slice());
    let w = connection_apply(&co2, &TangentVector::projected(&co2, vec![v(0.0, 0.1, 0.0), v(0.0, 0.0, 0.0), v(0.0, -0.1, 0.2)])?)?;
    println!("collinear ω = {:.9?}, isotropy axis {:?}", w.omega.as_slice(), w.isotropy_axis.map(|a| a.as_slice().to_vec()));
    Ok(())
}
