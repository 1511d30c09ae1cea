//! Reduced radial Laplacians of the unit disk, one per angular sector `n`,
//! compared with squared Bessel zeros on three nested grids.
//!
//! ```bash
//! cargo run --release --example planar_bessel
//! ```

use symred::operators::{assemble_planar_radial, RadialGrid};
use symred::oracle::bessel_zero;
use symred::spectral::{solve, IterativeOptions, Method};

fn main() -> symred::Result<()> {
    let sizes = [500, 1000, 2000];
    let opts = IterativeOptions { tol: 1e-11, ..Default::default() };
    println!("{:>2} {:>2} {:>18} {:>18} {:>10} {:>6}", "n", "k", "computed", "j_nk^2", "rel err", "order");
    for n in 0..3usize {
        let mut est = Vec::new();
        for &size in &sizes {
            let op = assemble_planar_radial(n as i64, &RadialGrid::new(1.0, size)?)?;
            est.push(solve(&op, 3, Method::Iterative, &opts)?.eigenvalues);
        }
        for k in 0..3 {
            let exact = bessel_zero(n, k + 1)?.powi(2);
            let order = ((est[0][k] - est[1][k]) / (est[1][k] - est[2][k])).abs().log2();
            let err = (est[2][k] - exact).abs() / exact;
            println!("{n:>2} {:>2} {:>18.12} {exact:>18.12} {err:>10.2e} {order:>6.3}", k + 1, est[2][k]);
        }
    }
    Ok(())
}
