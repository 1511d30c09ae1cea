//! Command-line front end: `spectrum`, `geometry`, `project` and `verify`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::acceptance::{criteria, run_all, VerifyOptions, DEFAULT_VERIFY_SEED};
use crate::error::{Error, Result};
use crate::geometry::{classify_stratum, inertia_operator, to_jacobi, AtomSystem, InertiaTensor, Vec3, DEFAULT_RANK_TOL};
use crate::harmonics::{HaarQuadrature, Irrep, Projector, SampledGroupFunction};
use crate::operators::{assemble_planar_radial, assemble_rigid_body, assemble_triatomic, GridSpec, RadialGrid};
use crate::shape::{shape_invariants, vectors_to_dragt};
use crate::spectral::{solve, IterativeOptions, Method, SpectrumResult, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "symred", version, about = "Symmetry-reduced spectra of few-body Hamiltonians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble and diagonalize a reduced operator.
    Spectrum,
    /// Jacobi vectors, inertia, stratum and shape coordinates of a configuration.
    Geometry {
        /// `{"masses": [...], "positions": [[x, y, z], ...]}`
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Peter-Weyl decomposition of a function sampled on the rotation group.
    Project {
        /// JSON array of `[re, im]` values at the quadrature nodes.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Run the acceptance criteria.
    Verify {
        #[arg(long)]
        list: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Planar,
    RigidBody,
    Triatomic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub rho_max: f64,
    pub n_rho: usize,
    pub n_chi: usize,
    pub n_phi: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { rho_max: 1.0, n_rho: 200, n_chi: 16, n_phi: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    pub k: usize,
    pub tol: f64,
    pub shift: f64,
    pub block: usize,
    pub max_basis: usize,
    pub max_restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = IterativeOptions::default();
        Self {
            method: Method::Auto,
            k: 5,
            tol: d.tol,
            shift: d.shift,
            block: d.block,
            max_basis: d.max_basis,
            max_restarts: d.max_restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NamedFunction {
    /// `ρ^ℓ_{ij}` with 0-based indices.
    MatrixElement { ell: usize, i: usize, j: usize },
    Constant,
    /// Random combination of matrix elements up to `band`.
    Random { band: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionConfig {
    /// Band limit `L` of the Haar quadrature.
    pub band_limit: usize,
    /// Highest irrep to project onto; defaults to `L / 2`.
    pub max_ell: Option<usize>,
    pub function: NamedFunction,
    /// Band of externally supplied samples.
    pub samples_band: Option<usize>,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self { band_limit: 4, max_ell: None, function: NamedFunction::Random { band: 2 }, samples_band: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Criterion ids to run; empty runs all.
    pub criteria: Vec<usize>,
    pub tolerance_scale: f64,
    pub enforce_budgets: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let d = VerifyOptions::default();
        Self { criteria: Vec::new(), tolerance_scale: d.tolerance_scale, enforce_budgets: d.enforce_budgets }
    }
}

/// The single JSON document driving one invocation. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: Option<SystemKind>,
    /// Angular sector: `n` for the planar problem, `ℓ` otherwise.
    #[serde(default)]
    pub sector: i64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Atom masses for the triatomic section geometry.
    pub masses: Option<[f64; 3]>,
    /// Principal moments of a rigid body.
    pub inertia: Option<[f64; 3]>,
    pub seed: Option<u64>,
    /// Output directory, overridden by `--out`.
    pub output: Option<PathBuf>,
    /// Also write the assembled operator as triplets.
    #[serde(default)]
    pub write_operator: bool,
    /// Configuration file for `geometry`, overridden by `--input`.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub projection: ProjectionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.system, Some(SystemKind::RigidBody | SystemKind::Triatomic)) && self.sector < 0 {
            return Err(Error::Config(format!("sector ℓ must be non-negative, got {}", self.sector)));
        }
        if self.solver.k == 0 {
            return Err(Error::Config("solver.k must be positive".into()));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config("solver.tol must be positive".into()));
        }
        if let Some(m) = self.masses {
            if m.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::Config(format!("masses must be positive, got {m:?}")));
            }
        }
        if !(self.verify.tolerance_scale > 0.0) {
            return Err(Error::Config("verify.tolerance_scale must be positive".into()));
        }
        Ok(())
    }

    fn iterative_options(&self, seed: Option<u64>) -> IterativeOptions {
        IterativeOptions {
            tol: self.solver.tol,
            shift: self.solver.shift,
            block: self.solver.block,
            max_basis: self.solver.max_basis,
            max_restarts: self.solver.max_restarts,
            seed: seed.or(self.seed).unwrap_or(DEFAULT_SEED),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    pool.install(|| match &cli.command {
        Command::Spectrum => cmd_spectrum(&cfg, out.as_deref(), cli.seed),
        Command::Geometry { input } => {
            let path = input
                .clone()
                .or_else(|| cfg.input.clone())
                .ok_or_else(|| Error::Config("geometry needs --input or a config `input`".into()))?;
            cmd_geometry(&path, out.as_deref())
        }
        Command::Project { samples } => cmd_project(&cfg, samples.as_deref(), out.as_deref(), cli.seed),
        Command::Verify { list } => cmd_verify(&cfg, *list, out.as_deref(), cli.seed),
    })
}

fn prepare_dir(out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn rigid_body_spectrum(ell: usize, moments: [f64; 3], k: usize, tol: f64) -> Result<SpectrumResult> {
    let start = Instant::now();
    let m = assemble_rigid_body(ell, &InertiaTensor::from_principal(moments))?;
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k);
    let eigenvalues: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    let residuals = order
        .iter()
        .map(|&c| {
            let v = eig.eigenvectors.column(c);
            (&m * v - v * Complex64::new(eig.eigenvalues[c], 0.0)).norm() / v.norm()
        })
        .collect();
    Ok(SpectrumResult {
        eigenvalues,
        residuals,
        vectors: Vec::new(),
        tolerance: tol,
        method: "dense-hermitian".into(),
        dim: m.nrows(),
        layout: None,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_spectrum(cfg: &RunConfig, out: Option<&Path>, seed: Option<u64>) -> Result<i32> {
    let system = cfg.system.ok_or_else(|| Error::Config("spectrum needs `system`".into()))?;
    let opts = cfg.iterative_options(seed);
    let k = cfg.solver.k;
    let assemble_start = Instant::now();
    let (result, assemble_seconds) = match system {
        SystemKind::Planar => {
            let op = assemble_planar_radial(cfg.sector, &RadialGrid::new(cfg.grid.rho_max, cfg.grid.n_rho)?)?;
            let t = assemble_start.elapsed().as_secs_f64();
            if cfg.write_operator {
                write_operator(&op, out)?;
            }
            (solve(&op, k, cfg.solver.method, &opts)?, t)
        }
        SystemKind::Triatomic => {
            let g = &cfg.grid;
            let op = assemble_triatomic(cfg.sector as usize, &GridSpec::new(g.rho_max, g.n_rho, g.n_chi, g.n_phi)?)?;
            let t = assemble_start.elapsed().as_secs_f64();
            if cfg.write_operator {
                write_operator(&op, out)?;
            }
            (solve(&op, k, cfg.solver.method, &opts)?, t)
        }
        SystemKind::RigidBody => {
            let moments = cfg.inertia.ok_or_else(|| Error::Config("rigid-body needs `inertia`".into()))?;
            (rigid_body_spectrum(cfg.sector as usize, moments, k, cfg.solver.tol)?, 0.0)
        }
    };
    let dir = prepare_dir(out)?;
    result.write_csv(fs::File::create(dir.join("spectrum.csv"))?)?;
    let meta = json!({
        "tool": "symred",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "spectrum",
        "config": cfg,
        "seed": opts.seed,
        "layout": result.layout,
        "dim": result.dim,
        "method": result.method,
        "tolerance": result.tolerance,
        "timings": { "assemble_seconds": assemble_seconds, "solve_seconds": result.seconds },
    });
    fs::write(dir.join("meta.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    for (l, r) in result.eigenvalues.iter().zip(&result.residuals) {
        println!("{l:.16e} {r:.3e}");
    }
    Ok(0)
}

fn write_operator(op: &crate::operators::ReducedOperator, out: Option<&Path>) -> Result<()> {
    let dir = prepare_dir(out)?;
    op.write_triplets(std::io::BufWriter::new(fs::File::create(dir.join("operator.csv"))?))?;
    op.write_weights(std::io::BufWriter::new(fs::File::create(dir.join("weights.csv"))?))?;
    Ok(())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationFile {
    masses: Vec<f64>,
    positions: Vec<[f64; 3]>,
}

/// JSON report for one configuration.
pub fn geometry_report(masses: Vec<f64>, positions: Vec<Vec3>) -> Result<serde_json::Value> {
    let sys = AtomSystem::new(masses, positions)?;
    let frame = to_jacobi(&sys);
    let inertia = inertia_operator(&sys);
    let (moments, axes) = inertia.principal_axes();
    let label = classify_stratum(&sys, DEFAULT_RANK_TOL);
    let mut report = json!({
        "masses": sys.masses(),
        "positions": sys.positions().iter().map(|x| [x.x, x.y, x.z]).collect::<Vec<_>>(),
        "jacobi_vectors": frame.vectors.iter().map(|x| [x.x, x.y, x.z]).collect::<Vec<_>>(),
        "inertia": {
            "eigenvalues": [moments.x, moments.y, moments.z],
            "axes": (0..3).map(|c| [axes[(0, c)], axes[(1, c)], axes[(2, c)]]).collect::<Vec<_>>(),
            "rank": inertia.rank(DEFAULT_RANK_TOL),
        },
        "stratum": label.stratum.name(),
        "jacobi_rank": label.rank,
    });
    if let [r1, r2] = frame.vectors[..] {
        let q = shape_invariants(&r1, &r2);
        report["shape_invariants"] = json!({ "q1": q.q1, "q2": q.q2, "q3": q.q3 });
        report["dragt"] = match vectors_to_dragt(&r1, &r2) {
            Ok(c) => json!({
                "rho": c.shape.rho, "chi": c.shape.chi, "phi": c.shape.phi,
                "alpha": c.angles.alpha, "beta": c.angles.beta, "gamma": c.angles.gamma,
            }),
            Err(_) => json!({ "rho": 0.0, "chi": 0.0, "phi": 0.0, "alpha": 0.0, "beta": 0.0, "gamma": 0.0 }),
        };
    }
    Ok(report)
}

pub fn cmd_geometry(input: &Path, out: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(input)?;
    let file: ConfigurationFile = serde_json::from_str(&text)?;
    let positions = file.positions.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
    let report = geometry_report(file.masses, positions)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("geometry.json"), &text)?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(0)
}

fn named_samples(quad: &HaarQuadrature, f: &NamedFunction, seed: u64) -> Result<SampledGroupFunction> {
    Ok(match *f {
        NamedFunction::Constant => quad.sample(0, |_| Complex64::new(1.0, 0.0)),
        NamedFunction::MatrixElement { ell, i, j } => {
            let d = 2 * ell + 1;
            if i >= d || j >= d {
                return Err(Error::Config(format!("matrix element ({i}, {j}) out of range for ℓ = {ell}")));
            }
            Projector::new(quad, ell).matrix_element(i, j)
        }
        NamedFunction::Random { band } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut total = SampledGroupFunction { band, values: vec![Complex64::new(0.0, 0.0); quad.len()] };
            for l in 0..=band {
                let irrep = Irrep::new(l);
                let table = quad.representation_table(&irrep);
                let d = irrep.dim();
                for i in 0..d {
                    for j in 0..d {
                        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                        for (v, m) in total.values.iter_mut().zip(&table) {
                            *v += c * m[(i, j)];
                        }
                    }
                }
            }
            total
        }
    })
}

/// Squared norms of every `P^ℓ_i f` for `ℓ ≤ max_ell`.
pub fn projection_norms(
    quad: &HaarQuadrature,
    f: &SampledGroupFunction,
    max_ell: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    let mut rows = Vec::new();
    for ell in 0..=max_ell {
        let p = Projector::new(quad, ell);
        for i in 0..p.irrep().dim() {
            rows.push((ell, i, p.project(f, i)?.norm_squared(quad)));
        }
    }
    Ok(rows)
}

pub fn cmd_project(cfg: &RunConfig, samples: Option<&Path>, out: Option<&Path>, seed: Option<u64>) -> Result<i32> {
    let pc = &cfg.projection;
    let quad = HaarQuadrature::new(pc.band_limit);
    let f = match samples {
        Some(path) => {
            let raw: Vec<[f64; 2]> = serde_json::from_str(&fs::read_to_string(path)?)?;
            if raw.len() != quad.len() {
                return Err(Error::Dimension { expected: quad.len(), actual: raw.len() });
            }
            let band = pc.samples_band.unwrap_or(pc.band_limit / 2);
            SampledGroupFunction { band, values: raw.iter().map(|z| Complex64::new(z[0], z[1])).collect() }
        }
        None => named_samples(&quad, &pc.function, seed.or(cfg.seed).unwrap_or(DEFAULT_VERIFY_SEED))?,
    };
    let max_ell = pc.max_ell.unwrap_or(pc.band_limit / 2);
    let rows = projection_norms(&quad, &f, max_ell)?;
    let total = f.norm_squared(&quad);
    let sum: f64 = rows.iter().map(|r| r.2).sum();
    let dir = prepare_dir(out)?;
    let mut csv = String::from("ell,index,norm_squared\n");
    for (ell, i, n) in &rows {
        csv.push_str(&format!("{ell},{i},{n:.16e}\n"));
    }
    fs::write(dir.join("projection.csv"), csv)?;
    let summary = json!({
        "band_limit": pc.band_limit,
        "max_ell": max_ell,
        "function_band": f.band,
        "norm_squared": total,
        "sum_of_components": sum,
        "completeness_defect": (total - sum).abs(),
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    fs::write(dir.join("projection.json"), &text)?;
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(0)
}

pub fn cmd_verify(cfg: &RunConfig, list: bool, out: Option<&Path>, seed: Option<u64>) -> Result<i32> {
    if list {
        for c in criteria() {
            println!("{:>2} {:<32} budget {:.0}s", c.id, c.name, c.budget_seconds);
        }
        return Ok(0);
    }
    let known: Vec<usize> = criteria().iter().map(|c| c.id).collect();
    if let Some(bad) = cfg.verify.criteria.iter().find(|id| !known.contains(id)) {
        return Err(Error::Config(format!("unknown criterion {bad}")));
    }
    let opts = VerifyOptions {
        tolerance_scale: cfg.verify.tolerance_scale,
        seed: seed.or(cfg.seed).unwrap_or(DEFAULT_VERIFY_SEED),
        enforce_budgets: cfg.verify.enforce_budgets,
    };
    let verdicts = run_all(&cfg.verify.criteria, &opts);
    for v in &verdicts {
        eprintln!("{}", v.line());
    }
    let text = serde_json::to_string_pretty(&verdicts)? + "\n";
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("verify.json"), &text)?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(if verdicts.iter().all(|v| v.passed) { 0 } else { 1 })
}
