//! Decomposes a band-limited function on SO(3) into its Peter-Weyl
//! components with an exact Haar quadrature.
//!
//! ```bash
//! cargo run --release --example peter_weyl
//! ```

use num_complex::Complex64;
use symred::harmonics::{HaarQuadrature, Irrep, Projector};

fn main() -> symred::Result<()> {
    let quad = HaarQuadrature::new(6);
    println!("quadrature band {} with {} nodes", quad.band_limit(), quad.len());

    // f(g) = 1 + 2 ρ¹₀₂(g) + (3 − i) ρ³₁₁(g), with 0-based row/column indices
    let d1 = Irrep::new(1);
    let d3 = Irrep::new(3);
    let f = quad.sample(3, |a| {
        Complex64::new(1.0, 0.0) + d1.wigner_d(a)[(0, 2)] * 2.0 + d3.wigner_d(a)[(1, 1)] * Complex64::new(3.0, -1.0)
    });
    let total = f.norm_squared(&quad);
    let mut sum = 0.0;
    for ell in 0..=3 {
        let p = Projector::new(&quad, ell);
        for i in 0..p.irrep().dim() {
            let n = p.project(&f, i)?.norm_squared(&quad);
            sum += n;
            if n > 1e-20 {
                println!("ℓ={ell} i={i}: ‖P f‖² = {n:.12}");
            }
        }
    }
    println!("‖f‖² = {total:.12}, sum of components = {sum:.12}");

    // Intertwiners move a component between rows of the same irrep.
    let p = Projector::new(&quad, 1);
    let moved = p.intertwine(&f, 2, 0)?;
    println!("‖V₂₀ f‖² = {:.12}", moved.norm_squared(&quad));

    let coarse = HaarQuadrature::new(4);
    let g = coarse.sample(3, |a| d3.wigner_d(a)[(1, 1)]);
    match Projector::new(&coarse, 3).project(&g, 0) {
        Err(e) => println!("too coarse a quadrature: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
