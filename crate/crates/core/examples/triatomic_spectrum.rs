//! Lowest vibrational levels of a free triatomic in the ℓ = 0 and ℓ = 1
//! sectors inside a hyperspherical wall, compared with the 6D ball, then
//! with a harmonic potential switched on.
//!
//! ```bash
//! cargo run --release --example triatomic_spectrum
//! ```

use symred::operators::{assemble_triatomic, assemble_triatomic_with_potential, GridSpec};
use symred::oracle::bessel_zero;
use symred::spectral::{solve, IterativeOptions, Method};

fn main() -> symred::Result<()> {
    let grid = GridSpec::new(1.0, 20, 12, 16)?;
    let opts = IterativeOptions { tol: 1e-9, ..Default::default() };
    let j = |n: usize, k: usize| bessel_zero(n, k).map(|z| z * z);

    let free0 = solve(&assemble_triatomic(0, &grid)?, 4, Method::Iterative, &opts)?;
    let ball0 = [j(2, 1)?, j(4, 1)?, j(4, 1)?, j(2, 2)?];
    println!("ℓ=0, {} unknowns, {:.2}s", free0.dim, free0.seconds);
    for (a, b) in free0.eigenvalues.iter().zip(ball0) {
        println!("  {a:12.6}  ball {b:12.6}  rel {:.2e}", (a - b).abs() / b);
    }

    let free1 = solve(&assemble_triatomic(1, &grid)?, 3, Method::Iterative, &opts)?;
    let ball1 = [j(3, 1)?, j(3, 1)?, j(4, 1)?];
    println!("ℓ=1, {} unknowns, {:.2}s", free1.dim, free1.seconds);
    for (a, b) in free1.eigenvalues.iter().zip(ball1) {
        println!("  {a:12.6}  ball {b:12.6}  rel {:.2e}", (a - b).abs() / b);
    }

    let grid = GridSpec::new(3.0, 24, 12, 16)?;
    let well = assemble_triatomic_with_potential(0, &grid, |q| 25.0 * q.rho * q.rho)?;
    let bound = solve(&well, 3, Method::Iterative, &opts)?;
    println!("ℓ=0 in V = 25ρ² (ground state of the 6D oscillator is 30):");
    for l in &bound.eigenvalues {
        println!("  {l:12.6}");
    }
    Ok(())
}
