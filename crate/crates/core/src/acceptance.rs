//! End-to-end checks of the whole pipeline, each with a tolerance and a
//! runtime budget. Used by `symred verify` and the `acceptance` test target.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{
    angular_momentum, classify_stratum, connection_apply, infinitesimal_action, inertia_operator, jacobi_velocities,
    kinetic_form, to_jacobi, AtomSystem, InertiaTensor, Stratum, TangentVector, Vec3, DEFAULT_RANK_TOL,
};
use crate::harmonics::{HaarQuadrature, Irrep, Projector, SampledGroupFunction};
use crate::operators::{
    assemble_planar_radial, assemble_rigid_body, assemble_triatomic, GridSpec, RadialGrid, ReducedOperator,
};
use crate::oracle::{
    bessel_zero, compare_reduced_vs_ambient, generic_points, planar_full_spectrum, random_rotation,
    standard_test_functions, DiskGrid,
};
use crate::shape::{dragt_to_vectors, shape_invariants, vectors_to_dragt, FullCoordinates, ShapeCoordinates};
use crate::spectral::{hermitian_eigenvalues, solve, IterativeOptions, Method};

pub const DEFAULT_VERIFY_SEED: u64 = 42;

/// Settings shared by all criteria.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    /// Multiplies every accuracy tolerance; values below 1 tighten the suite.
    pub tolerance_scale: f64,
    pub seed: u64,
    /// Treat an exceeded runtime budget as a failure.
    pub enforce_budgets: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { tolerance_scale: 1.0, seed: DEFAULT_VERIFY_SEED, enforce_budgets: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<32} {:>7.2}s / {:>4.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub budget_seconds: f64,
    run: fn(&VerifyOptions) -> Result<Outcome>,
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Self { passed, detail }
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "planar-bessel-spectrum", budget_seconds: 10.0, run: planar_bessel },
        Criterion { id: 2, name: "planar-axis-condition", budget_seconds: 5.0, run: planar_axis },
        Criterion { id: 3, name: "disk-sector-sum", budget_seconds: 60.0, run: disk_sector_sum },
        Criterion { id: 4, name: "peter-weyl-algebra", budget_seconds: 10.0, run: peter_weyl },
        Criterion { id: 5, name: "jacobi-additivity", budget_seconds: 1.0, run: jacobi_additivity },
        Criterion { id: 6, name: "stratum-inertia-rank", budget_seconds: 1.0, run: strata },
        Criterion { id: 7, name: "connection-properties", budget_seconds: 1.0, run: connection },
        Criterion { id: 8, name: "rigid-body-spectrum", budget_seconds: 1.0, run: rigid_body },
        Criterion { id: 9, name: "triatomic-vs-ambient", budget_seconds: 30.0, run: triatomic_ambient },
        Criterion { id: 10, name: "triatomic-boundary-conditions", budget_seconds: 60.0, run: triatomic_boundary },
        Criterion { id: 11, name: "shape-identities", budget_seconds: 1.0, run: shape_identities },
        Criterion { id: 12, name: "self-adjointness-positivity", budget_seconds: 5.0, run: self_adjointness },
    ]
}

impl Criterion {
    pub fn run(&self, opts: &VerifyOptions) -> Verdict {
        let start = Instant::now();
        let outcome = (self.run)(opts).unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let seconds = start.elapsed().as_secs_f64();
        let over = opts.enforce_budgets && seconds > self.budget_seconds;
        let detail = if over { format!("{} (over budget)", outcome.detail) } else { outcome.detail };
        Verdict {
            id: self.id,
            name: self.name.to_string(),
            passed: outcome.passed && !over,
            detail,
            seconds,
            budget_seconds: self.budget_seconds,
        }
    }
}

/// Runs the selected criteria (all when `ids` is empty) in order.
pub fn run_all(ids: &[usize], opts: &VerifyOptions) -> Vec<Verdict> {
    criteria().iter().filter(|c| ids.is_empty() || ids.contains(&c.id)).map(|c| c.run(opts)).collect()
}

fn planar_bessel(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-3 * opts.tolerance_scale;
    let window = 0.3 * opts.tolerance_scale;
    let sizes = [500usize, 1000, 2000];
    let solver = IterativeOptions { tol: 1e-11, ..Default::default() };
    let mut worst_err: f64 = 0.0;
    let mut orders = Vec::new();
    for n in 0..3usize {
        let mut est = Vec::new();
        for &size in &sizes {
            let op = assemble_planar_radial(n as i64, &RadialGrid::new(1.0, size)?)?;
            est.push(solve(&op, 3, Method::Iterative, &solver)?.eigenvalues);
        }
        for k in 0..3 {
            let exact = bessel_zero(n, k + 1)?.powi(2);
            worst_err = worst_err.max((est[2][k] - exact).abs() / exact);
            let d1 = est[0][k] - est[1][k];
            let d2 = est[1][k] - est[2][k];
            orders.push((d1 / d2).abs().log2());
        }
    }
    let (lo, hi) = orders.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &o| (a.min(o), b.max(o)));
    let passed = worst_err <= tol && lo >= 2.0 - window && hi <= 2.0 + window;
    Ok(Outcome::new(passed, format!("max rel err {worst_err:.2e} (tol {tol:.1e}); orders in [{lo:.3}, {hi:.3}]")))
}

fn planar_axis(opts: &VerifyOptions) -> Result<Outcome> {
    let size = 1000;
    let grid = RadialGrid::new(1.0, size)?;
    let h = grid.h();
    let bound = 5.0 * h * opts.tolerance_scale;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 0..3i64 {
        let op = assemble_planar_radial(n, &grid)?;
        let res = solve(&op, 1, Method::Iterative, &IterativeOptions::default())?;
        let f = &res.vectors[0];
        let max = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if n == 0 {
            let axis = f[0].abs() / max;
            ok &= axis.is_finite() && axis > 0.5;
            parts.push(format!("n=0 axis/max {axis:.3}"));
        } else {
            // node 0 sits on the axis and is pinned; node 1 is the first free node
            let first = f[1].abs() / max;
            ok &= f[0] == 0.0 && first <= bound;
            parts.push(format!("n={n} |f(h)|/max {:.2}h", first / h));
        }
    }
    Ok(Outcome::new(ok, parts.join(", ")))
}

fn disk_sector_sum(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 0.02 * opts.tolerance_scale;
    let n_r = 100;
    let count = 15;
    let full = planar_full_spectrum(&DiskGrid { radius: 1.0, n_r, n_theta: 128 }, count, 0.9)?;
    let grid = RadialGrid::new(1.0, n_r)?;
    let mut reduced = Vec::new();
    for n in 0..=4i64 {
        let op = assemble_planar_radial(n, &grid)?;
        let res = solve(&op, count, Method::Auto, &IterativeOptions::default())?;
        for l in res.eigenvalues {
            reduced.push(l);
            if n != 0 {
                reduced.push(l);
            }
        }
    }
    reduced.sort_by(f64::total_cmp);
    let worst = full
        .iter()
        .zip(&reduced)
        .map(|(a, b)| (a.eigenvalue - b).abs() / b)
        .fold(0.0f64, f64::max);
    let ok = full.len() == count && worst <= tol;
    Ok(Outcome::new(ok, format!("{count} eigenvalues, max rel diff {worst:.2e} (tol {tol:.1e})")))
}

fn random_band_function(quad: &HaarQuadrature, band: usize, rng: &mut impl Rng) -> SampledGroupFunction {
    let mut total = SampledGroupFunction { band, values: vec![Complex64::new(0.0, 0.0); quad.len()] };
    for l in 0..=band {
        let irrep = Irrep::new(l);
        let d = irrep.dim();
        let table = quad.representation_table(&irrep);
        let c: Vec<Complex64> =
            (0..d * d).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        for (v, m) in total.values.iter_mut().zip(&table) {
            for i in 0..d {
                for j in 0..d {
                    *v += c[i * d + j] * m[(i, j)];
                }
            }
        }
    }
    total
}

fn peter_weyl(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-10 * opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let quad = HaarQuadrature::new(8);
    let f = random_band_function(&quad, 3, &mut rng);
    let scale = f.max_abs();
    let mut idem: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let mut sum = SampledGroupFunction { band: 3, values: vec![Complex64::new(0.0, 0.0); quad.len()] };
    let mut parts: Vec<SampledGroupFunction> = Vec::new();
    let mut inter: f64 = 0.0;
    for l in 0..=3 {
        let p = Projector::new(&quad, l);
        let d = p.irrep().dim();
        for i in 0..d {
            let pf = p.project(&f, i)?;
            idem = idem.max(p.project(&pf, i)?.max_abs_diff(&pf));
            // a different row of the same irrep annihilates the image
            ortho = ortho.max(p.project(&pf, (i + 1) % d)?.max_abs() * (d > 1) as u8 as f64);
            sum = sum.add(&pf);
            parts.push(pf);
        }
        if d > 1 {
            // V_{ij} V_{jk} = V_{ik} and V_{ij} V_{kl} = 0 for j ≠ k
            let (i, j, k) = (0, 1, d - 1);
            let vjk = p.intertwine(&f, j, k)?;
            let vik = p.intertwine(&f, i, k)?;
            inter = inter.max(p.intertwine(&vjk, i, j)?.max_abs_diff(&vik));
            inter = inter.max(p.intertwine(&vik, i, j)?.max_abs());
            inter = inter.max(p.intertwine(&f, i, i)?.max_abs_diff(&parts[parts.len() - d + i]));
        }
    }
    let gram: f64 = (0..parts.len())
        .flat_map(|a| (0..a).map(move |b| (a, b)))
        .map(|(a, b)| parts[a].inner(&parts[b], &quad).norm())
        .fold(0.0, f64::max);
    ortho = ortho.max(gram);
    let complete = sum.max_abs_diff(&f);
    let worst = [idem, ortho, complete, inter].iter().fold(0.0f64, |m, x| m.max(*x)) / scale;
    Ok(Outcome::new(
        worst <= tol,
        format!(
            "idempotence {:.1e}, orthogonality {:.1e}, completeness {:.1e}, intertwiners {:.1e} (relative, tol {tol:.0e})",
            idem / scale,
            ortho / scale,
            complete / scale,
            inter / scale
        ),
    ))
}

fn random_system(rng: &mut impl Rng, n: usize) -> Result<(AtomSystem, TangentVector)> {
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..20.0)).collect();
    let mut draw = |s: f64| Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s));
    let pos: Vec<Vec3> = (0..n).map(|_| draw(2.0)).collect();
    let vel: Vec<Vec3> = (0..n).map(|_| draw(1.0)).collect();
    let sys = AtomSystem::centered(masses, pos)?;
    let t = TangentVector::projected(&sys, vel)?;
    Ok((sys, t))
}

fn jacobi_additivity(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-12 * opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_k: f64 = 0.0;
    let mut worst_l: f64 = 0.0;
    for s in 0..1000 {
        let (sys, t) = random_system(&mut rng, 3 + s % 2)?;
        let jv = jacobi_velocities(&sys, &t);
        let frame = to_jacobi(&sys);
        let k_atom = kinetic_form(&sys, &t, &t);
        let k_jac: f64 = jv.iter().map(|v| v.norm_squared()).sum();
        worst_k = worst_k.max((k_atom - k_jac).abs() / k_atom);
        let l_atom = angular_momentum(&sys, &t);
        let l_jac = frame.vectors.iter().zip(&jv).fold(Vec3::zeros(), |acc, (r, v)| acc + r.cross(v));
        let scale: f64 =
            sys.masses().iter().zip(sys.positions().iter().zip(t.velocities())).map(|(m, (x, v))| m * x.norm() * v.norm()).sum();
        worst_l = worst_l.max((l_atom - l_jac).norm() / scale);
    }
    Ok(Outcome::new(
        worst_k <= tol && worst_l <= tol,
        format!("kinetic {worst_k:.1e}, angular momentum {worst_l:.1e} (tol {tol:.0e})"),
    ))
}

fn strata(_opts: &VerifyOptions) -> Result<Outcome> {
    let v = Vec3::new;
    let cases = [
        (
            "generic",
            AtomSystem::centered(
                vec![1.0, 2.0, 3.0, 4.0],
                vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.2, 0.0), v(0.3, 0.4, 0.9)],
            )?,
            Stratum::Generic,
            3,
        ),
        (
            "planar",
            AtomSystem::centered(vec![1.0, 1.5, 2.0], vec![v(0.0, 0.0, 0.0), v(1.0, 0.2, 0.0), v(0.1, 0.9, 0.0)])?,
            Stratum::Planar,
            3,
        ),
        (
            "collinear",
            AtomSystem::centered(vec![1.0, 1.0, 16.0], vec![v(0.0, 0.0, -1.0), v(0.0, 0.0, 0.7), v(0.0, 0.0, 2.0)])?,
            Stratum::Collinear,
            2,
        ),
        ("collision", AtomSystem::new(vec![1.0, 2.0, 3.0], vec![Vec3::zeros(); 3])?, Stratum::Collision, 0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, sys, stratum, rank) in &cases {
        let label = classify_stratum(sys, DEFAULT_RANK_TOL);
        let inertia_rank = inertia_operator(sys).rank(DEFAULT_RANK_TOL);
        let hit = label.stratum == *stratum && inertia_rank == *rank && stratum.inertia_rank() == *rank;
        ok &= hit;
        parts.push(format!("{name}: {} rank {inertia_rank}", label.stratum.name()));
    }
    Ok(Outcome::new(ok, parts.join(", ")))
}

fn connection(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-10 * opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let v = Vec3::new;
    let samples = [
        AtomSystem::centered(vec![1.0, 2.0, 3.0], vec![v(0.1, -0.3, 0.2), v(1.1, 0.4, -0.2), v(-0.5, 0.9, 0.7)])?,
        AtomSystem::centered(
            vec![1.0, 2.0, 3.0, 4.0],
            vec![v(0.0, 0.0, 0.0), v(1.0, 0.0, 0.0), v(0.0, 1.2, 0.0), v(0.3, 0.4, 0.9)],
        )?,
        AtomSystem::centered(vec![1.0, 16.0, 1.0], vec![v(-1.1, 0.0, 0.0), v(0.0, 0.0, 0.0), v(1.2, 0.0, 0.0)])?,
    ];
    let mut worst_inv: f64 = 0.0;
    let mut worst_eq: f64 = 0.0;
    for sys in &samples {
        for _ in 0..100 {
            let xi = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let w = connection_apply(sys, &infinitesimal_action(sys, &xi))?;
            let mut diff = w.omega - xi;
            if let Some(axis) = w.isotropy_axis {
                diff -= axis * axis.dot(&diff);
            }
            worst_inv = worst_inv.max(diff.norm() / xi.norm());

            let vel: Vec<Vec3> = (0..sys.len())
                .map(|_| v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let t = TangentVector::projected(sys, vel)?;
            let g = random_rotation(&mut rng);
            let base = connection_apply(sys, &t)?;
            let moved = connection_apply(&sys.rotated(&g), &t.rotated(&g))?;
            let expected = g * base.omega;
            worst_eq = worst_eq.max((moved.omega - expected).norm() / base.omega.norm().max(1.0));
        }
    }
    Ok(Outcome::new(
        worst_inv <= tol && worst_eq <= tol,
        format!("ω∘θ {worst_inv:.1e}, equivariance {worst_eq:.1e} (tol {tol:.0e})"),
    ))
}

fn rigid_body(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-12 * opts.tolerance_scale;
    let mut worst_sph: f64 = 0.0;
    let i = 1.7;
    for ell in 0..=5 {
        let m = assemble_rigid_body(ell, &InertiaTensor::from_principal([i, i, i]))?;
        let d = 2 * ell + 1;
        let expected = (ell * (ell + 1)) as f64 / i;
        for a in 0..d {
            for b in 0..d {
                let target = if a == b { expected } else { 0.0 };
                worst_sph = worst_sph.max((m[(a, b)] - Complex64::new(target, 0.0)).norm() / expected.max(1.0));
            }
        }
    }
    let mut worst_sym: f64 = 0.0;
    for (i1, i3) in [(1.0, 2.0), (1.3, 0.7), (2.5, 0.4)] {
        for ell in 0..=5usize {
            let m = assemble_rigid_body(ell, &InertiaTensor::from_principal([i1, i1, i3]))?;
            let computed = hermitian_eigenvalues(&m);
            let l = ell as f64;
            let mut exact: Vec<f64> =
                (-(ell as i64)..=ell as i64).map(|k| l * (l + 1.0) / i1 + (k * k) as f64 * (1.0 / i3 - 1.0 / i1)).collect();
            exact.sort_by(f64::total_cmp);
            for (a, b) in computed.iter().zip(&exact) {
                worst_sym = worst_sym.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    Ok(Outcome::new(
        worst_sph <= tol && worst_sym <= tol,
        format!("spherical {worst_sph:.1e}, symmetric {worst_sym:.1e} (tol {tol:.0e})"),
    ))
}

fn triatomic_ambient(opts: &VerifyOptions) -> Result<Outcome> {
    let window = 0.5 * opts.tolerance_scale;
    let points = generic_points(20, (0.6, 1.4), (0.35, 1.2), opts.seed);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ell in 0..=1 {
        for tf in standard_test_functions(ell) {
            let report = compare_reduced_vs_ambient(&tf, &points, 0.005)?;
            for r in report.ratios() {
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    let ok = lo >= 4.0 - window && hi <= 4.0 + window;
    Ok(Outcome::new(ok, format!("error ratios in [{lo:.3}, {hi:.3}] over 80 point evaluations")))
}

/// Largest node-block norm of a real-basis grid vector.
fn block_norm(v: &[f64], node: usize, d: usize, comps: std::ops::Range<usize>) -> f64 {
    comps.map(|c| v[node * d + c].powi(2)).sum::<f64>().sqrt()
}

fn triatomic_boundary(opts: &VerifyOptions) -> Result<Outcome> {
    let ell = 1;
    let grid = GridSpec::new(1.0, 24, 16, 16)?;
    let d = 2 * ell + 1;
    let op = assemble_triatomic(ell, &grid)?;
    let res = solve(&op, 3, Method::Iterative, &IterativeOptions { tol: 1e-9, ..Default::default() })?;
    let bound_chi = 5.0 * grid.h_chi() * opts.tolerance_scale;
    let mut pinned_exact = true;
    let mut chi_ratio: f64 = 0.0;
    let mut rho_ratio: f64 = 0.0;
    for v in &res.vectors {
        let max = (0..grid.n_nodes()).map(|n| block_norm(v, n, d, 0..d)).fold(0.0, f64::max);
        for (x, p) in v.iter().zip(&op.boundary.pinned) {
            pinned_exact &= !*p || *x == 0.0;
        }
        for i in 0..grid.n_rho {
            for k in 0..grid.n_phi {
                chi_ratio = chi_ratio.max(block_norm(v, grid.node_index(i, 1, k), d, 1..d) / max);
            }
        }
        for j in 0..grid.n_chi {
            for k in 0..grid.n_phi {
                rho_ratio = rho_ratio.max(block_norm(v, grid.node_index(1, j, k), d, 0..d) / max);
            }
        }
    }
    let ok = pinned_exact && chi_ratio <= bound_chi;
    Ok(Outcome::new(
        ok,
        format!(
            "collar layers exactly zero: {pinned_exact}; next χ layer m≠0 {:.2}h_χ, next ρ layer {:.2}h_ρ",
            chi_ratio / grid.h_chi(),
            rho_ratio / grid.h_rho()
        ),
    ))
}

fn shape_identities(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = 1e-12 * opts.tolerance_scale;
    let tol_rt = 1e-10 * opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst_q: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let mut worst_rt: f64 = 0.0;
    for _ in 0..1000 {
        let shape = ShapeCoordinates::new(
            rng.random_range(0.1..3.0),
            rng.random_range(0.01..1.56),
            rng.random_range(0.0..std::f64::consts::TAU),
        )?;
        let g = random_rotation(&mut rng);
        let angles = crate::harmonics::EulerAngles::from_rotation(&g);
        let (r1, r2) = dragt_to_vectors(&FullCoordinates { shape, angles });
        let q = shape_invariants(&r1, &r2);
        let rho4 = shape.rho.powi(4);
        worst_q = worst_q.max((q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3 - rho4).abs() / rho4);
        let h = random_rotation(&mut rng);
        let p = shape_invariants(&(h * r1), &(h * r2));
        let rho2 = shape.rho * shape.rho;
        worst_inv = worst_inv.max([q.q1 - p.q1, q.q2 - p.q2, q.q3 - p.q3].iter().fold(0.0f64, |m, x| m.max(x.abs())) / rho2);
        let back = vectors_to_dragt(&r1, &r2)?;
        let (s1, s2) = dragt_to_vectors(&back);
        worst_rt = worst_rt.max(((s1 - r1).norm() + (s2 - r2).norm()) / shape.rho);
        worst_rt = worst_rt.max((back.shape.rho - shape.rho).abs() / shape.rho);
        worst_rt = worst_rt.max((back.shape.chi - shape.chi).abs());
    }
    Ok(Outcome::new(
        worst_q <= tol && worst_inv <= tol && worst_rt <= tol_rt,
        format!("Σq² {worst_q:.1e}, invariance {worst_inv:.1e}, roundtrip {worst_rt:.1e}"),
    ))
}

fn self_adjointness(opts: &VerifyOptions) -> Result<Outcome> {
    let tol_sym = 1e-12 * opts.tolerance_scale;
    let tol_rq = -1e-10 * opts.tolerance_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut ops: Vec<ReducedOperator> = Vec::new();
    for n in 0..=4 {
        ops.push(assemble_planar_radial(n, &RadialGrid::new(1.0, 200)?)?);
    }
    for ell in 0..=2 {
        ops.push(assemble_triatomic(ell, &GridSpec::new(1.5, 8, 6, 8)?)?);
    }
    let mut worst_sym: f64 = 0.0;
    let mut min_rq = f64::INFINITY;
    for op in &ops {
        worst_sym = worst_sym.max(op.symmetry_defect());
        for _ in 0..100 {
            let u: Vec<f64> = (0..op.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            min_rq = min_rq.min(op.rayleigh_quotient(&u));
        }
    }
    let mut min_rigid = f64::INFINITY;
    for ell in 0..=4 {
        let m = assemble_rigid_body(ell, &InertiaTensor::from_principal([0.8, 1.3, 2.1]))?;
        let herm = (&m - m.adjoint()).iter().fold(0.0f64, |a, z| a.max(z.norm())) / m.norm().max(1.0);
        worst_sym = worst_sym.max(herm);
        let d = 2 * ell + 1;
        for _ in 0..100 {
            let u = DMatrix::<Complex64>::from_fn(d, 1, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let num = (u.adjoint() * &m * &u)[(0, 0)].re;
            min_rigid = min_rigid.min(num / u.norm_squared());
        }
    }
    min_rq = min_rq.min(min_rigid);
    Ok(Outcome::new(
        worst_sym <= tol_sym && min_rq >= tol_rq,
        format!("{} operators, symmetry defect {worst_sym:.1e}, min Rayleigh quotient {min_rq:.3e}", ops.len() + 5),
    ))
}
