//! Dragt coordinates of a triatomic: the round trip through the section,
//! the shape invariants and the equivariant extension of a reduced state.
//!
//! ```bash
//! cargo run --release --example shape_coordinates
//! ```

use symred::geometry::Vec3;
use symred::harmonics::Irrep;
use symred::operators::{assemble_triatomic, GridSpec};
use symred::shape::{
    dragt_to_vectors, equivariant_extend, section_system, shape_invariants, vectors_to_dragt, GridFunction,
    ShapeCoordinates,
};
use symred::spectral::{solve, IterativeOptions, Method};

fn main() -> symred::Result<()> {
    let masses = [16.0, 1.0, 1.0];
    let q = ShapeCoordinates::new(1.2, 0.7, 2.1)?;
    let sys = section_system(&masses, &q)?;
    println!("section configuration for {q:?}:");
    for (m, x) in sys.masses().iter().zip(sys.positions()) {
        println!("  m={m:5.1}  ({:+.6}, {:+.6}, {:+.6})", x.x, x.y, x.z);
    }

    let (r1, r2) = (Vec3::new(0.3, -0.8, 0.5), Vec3::new(0.9, 0.2, -0.4));
    let c = vectors_to_dragt(&r1, &r2)?;
    let (s1, s2) = dragt_to_vectors(&c);
    let inv = shape_invariants(&r1, &r2);
    println!("shape {:?}, Euler {:?}", c.shape, c.angles);
    println!("round trip error {:.2e}", (s1 - r1).norm() + (s2 - r2).norm());
    println!(
        "q₁²+q₂²+q₃² − ρ⁴ = {:.2e}",
        inv.q1 * inv.q1 + inv.q2 * inv.q2 + inv.q3 * inv.q3 - c.shape.rho.powi(4)
    );

    // Lift the lowest ℓ=1 state to configuration space and rotate it.
    let grid = GridSpec::new(1.0, 12, 8, 12)?;
    let op = assemble_triatomic(1, &grid)?;
    let res = solve(&op, 1, Method::Auto, &IterativeOptions::default())?;
    let psi = GridFunction::from_real(grid, 1, &res.vectors[0])?;
    let irrep = Irrep::new(1);
    let g = symred::oracle::random_rotation(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5));
    let (a1, a2) = (0.5 * r1, 0.5 * r2);
    let here = equivariant_extend(&psi, &a1, &a2)?;
    let there = equivariant_extend(&psi, &(g * a1), &(g * a2))?;
    println!("ψ(x) = {:.6?}", here.as_slice());
    println!("‖ψ(gx) − D(g)ψ(x)‖ = {:.2e}", (there - irrep.wigner_d_of(&g) * here).norm());
    Ok(())
}
