//! The spectrum of the full disk Laplacian is the union of the reduced sector
//! spectra, with every `n ≠ 0` sector appearing twice.
//!
//! ```bash
//! cargo run --release --example disk_sectors
//! ```

use symred::operators::{assemble_planar_radial, RadialGrid};
use symred::oracle::{planar_full_spectrum, DiskGrid, SectorLabel};
use symred::spectral::{solve, IterativeOptions, Method};

fn main() -> symred::Result<()> {
    let n_r = 100;
    let full = planar_full_spectrum(&DiskGrid { radius: 1.0, n_r, n_theta: 128 }, 15, 0.9)?;

    let mut reduced: Vec<(f64, i64)> = Vec::new();
    for n in 0..=4 {
        let op = assemble_planar_radial(n, &RadialGrid::new(1.0, n_r)?)?;
        for l in solve(&op, 15, Method::Auto, &IterativeOptions::default())?.eigenvalues {
            reduced.push((l, n));
            if n != 0 {
                reduced.push((l, -n));
            }
        }
    }
    reduced.sort_by(|a, b| a.0.total_cmp(&b.0));

    println!("{:>3} {:>14} {:>8} {:>7} {:>14} {:>4} {:>10}", "#", "disk", "sector", "purity", "reduced", "n", "rel diff");
    for (i, (d, r)) in full.iter().zip(&reduced).enumerate() {
        let sector = match d.label {
            SectorLabel::Sector(s) => s.to_string(),
            SectorLabel::Mixed => "mixed".into(),
        };
        let diff = (d.eigenvalue - r.0).abs() / r.0;
        println!("{i:>3} {:>14.8} {sector:>8} {:>7.4} {:>14.8} {:>4} {diff:>10.2e}", d.eigenvalue, d.purity, r.0, r.1);
    }
    Ok(())
}
