//! Command runner behind the `limitlab` binary.
//!
//! Every command produces a [`Report`] listing its invariants; the exit code
//! is 0 exactly when all of them pass. Outputs depend only on the config.

mod config;
mod render;

use std::path::Path;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::conjugacy::{build_annulus, min_pairwise_distance, ConjugacyMap, DEFAULT_MODEL_RADIUS, DEFAULT_RESOLUTION};
use crate::error::{Error, Result};
use crate::fatou::{
    boundary_parametrization, classify_point, interior_components, ImmediateBasin, Verdict,
};
use crate::henon::{
    accessible_boundary_sample, classify_with, henon_fixed_points, torus_diagnostics,
    AccessibleOptions, FixedPointClass, GammaTorusMap, HenonParams, HenonVerdict, SolidTorusMap,
    TorusReport,
};
use crate::limits::{covering_trivial, h1_model, ComponentGraph, LocalizedInteger};
use crate::natural_extension::{fiber, History};
use crate::poly::ComplexPolynomial;
use crate::solenoid::{decode_exact, encode_exact, Angle, ConePoint, SolenoidPoint};

pub use config::{parse_grid, Command, GridSpec, RunConfig, KEYS};
pub use render::Image;

pub const REPORT_SCHEMA: &str = "limitlab-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Invariant {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: u32,
    pub command: String,
    pub config: String,
    pub pass: bool,
    pub invariants: Vec<Invariant>,
    pub failures: Vec<String>,
    pub data: Value,
}

impl Report {
    fn new(cfg: &RunConfig, command: Command, invariants: Vec<Invariant>, data: Value) -> Self {
        let failures: Vec<String> = invariants.iter().filter(|i| !i.pass).map(|i| i.name.clone()).collect();
        Self {
            schema: REPORT_SCHEMA,
            version: REPORT_VERSION,
            command: command.name().to_string(),
            config: cfg.to_text(),
            pass: failures.is_empty(),
            invariants,
            failures,
            data,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Invariant {
    Invariant {
        name: name.to_string(),
        pass,
        detail: detail.into(),
    }
}

fn poly_or(cfg: &RunConfig, default: &str) -> ComplexPolynomial {
    cfg.poly.clone().unwrap_or_else(|| default.parse().expect("default polynomial"))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Runs the configured command and writes any requested files.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let command = cfg
        .command
        .ok_or_else(|| Error::Precondition("no command given".into()))?;
    let report = match command {
        Command::RenderJulia => render_julia(cfg)?,
        Command::RenderBasin => render_basin(cfg)?,
        Command::Fibers => fibers(cfg)?,
        Command::SolenoidDemo => solenoid_demo(cfg)?,
        Command::ConjugacyCheck => conjugacy_check(cfg)?,
        Command::TorusDiagnostics => torus(cfg)?,
        Command::AccessibleBoundary => accessible(cfg)?,
        Command::Homology => homology(cfg)?,
        Command::CoveringCheck => covering(cfg)?,
    };
    if let Some(path) = &cfg.json {
        std::fs::write(path, report.to_json())?;
    }
    Ok(report)
}

fn render_julia(cfg: &RunConfig) -> Result<Report> {
    let p = poly_or(cfg, "0,0,1");
    let radius = p.escape_radius();
    let grid = cfg.grid.unwrap_or(GridSpec { bounds: None, nx: 256, ny: 256 }).resolve(radius)?;
    let budget = cfg.depth.unwrap_or(200);
    let rows: Vec<Vec<[u8; 3]>> = (0..grid.ny)
        .into_par_iter()
        .map(|row| {
            let y = grid.y_max - (row as f64 + 0.5) * grid.dy();
            (0..grid.nx)
                .map(|col| {
                    let x = grid.x_min + (col as f64 + 0.5) * grid.dx();
                    match classify_point(&p, Complex64::new(x, y), radius, budget)?.verdict {
                        Verdict::Bounded => Ok(render::BOUNDED),
                        Verdict::Escaped(n) => Ok(render::escape_color(n, budget)),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let image = Image {
        width: grid.nx,
        height: grid.ny,
        pixels: rows.into_iter().flatten().collect(),
    };
    let bounded = image.pixels.iter().filter(|px| **px == render::BOUNDED).count();
    let out = cfg.out.clone().unwrap_or_else(|| "julia.ppm".into());
    let written = image.write(&out)?;
    let invariants = vec![check(
        "image_size",
        image.pixels.len() == grid.nx * grid.ny,
        format!("{}x{}", grid.nx, grid.ny),
    )];
    let data = json!({"polynomial": p.to_string(), "grid": grid, "budget": budget, "bounded_pixels": bounded, "files": written});
    Ok(Report::new(cfg, Command::RenderJulia, invariants, data))
}

fn henon_params(cfg: &RunConfig) -> Result<HenonParams> {
    let p = poly_or(cfg, "0.1,0,1");
    HenonParams::new(p, cfg.a.unwrap_or(c(0.05)), cfg.alpha.unwrap_or(c(0.1)))
}

/// Slice `y = y*` through the first attracting fixed point.
fn render_basin(cfg: &RunConfig) -> Result<Report> {
    let params = henon_params(cfg)?;
    let fixed = henon_fixed_points(&params)?;
    let attractors: Vec<_> = fixed.iter().filter(|f| f.class == FixedPointClass::Attracting).cloned().collect();
    let y0 = attractors.first().map(|f| f.point.1).unwrap_or_default();
    let escape = params.escape_floor();
    let grid = cfg.grid.unwrap_or(GridSpec { bounds: None, nx: 256, ny: 256 }).resolve(2.0)?;
    let budget = cfg.depth.unwrap_or(200);
    let color_at = |x: Complex64| match classify_with(&params, &attractors, (x, y0), escape, budget) {
        HenonVerdict::Escaped { step } => render::escape_color(step, budget),
        HenonVerdict::Converged { fixed_point, .. } => render::basin_color(fixed_point),
        HenonVerdict::Bounded => render::BOUNDED,
    };
    let pixels: Vec<[u8; 3]> = (0..grid.ny)
        .into_par_iter()
        .flat_map_iter(|row| {
            let y = grid.y_max - (row as f64 + 0.5) * grid.dy();
            (0..grid.nx)
                .map(move |col| Complex64::new(grid.x_min + (col as f64 + 0.5) * grid.dx(), y))
                .map(color_at)
        })
        .collect();
    let image = Image {
        width: grid.nx,
        height: grid.ny,
        pixels,
    };
    let mut invariants = vec![check("image_size", image.pixels.len() == grid.nx * grid.ny, format!("{}x{}", grid.nx, grid.ny))];
    if let Some(f) = attractors.first() {
        let x = f.point.0;
        if let Some(cell) = grid.cell_of(x) {
            let px = image.pixels[cell];
            invariants.push(check(
                "attractor_pixel_in_basin",
                px == render::basin_color(f.id),
                format!("pixel at x* = {x}"),
            ));
        }
    }
    let out = cfg.out.clone().unwrap_or_else(|| "basin.ppm".into());
    let written = image.write(&out)?;
    let data = json!({
        "polynomial": params.p.to_string(),
        "a": [params.a.re, params.a.im],
        "slice_y": [y0.re, y0.im],
        "grid": grid,
        "fixed_points": fixed.iter().map(|f| json!({"id": f.id, "x": [f.point.0.re, f.point.0.im], "class": format!("{:?}", f.class)})).collect::<Vec<_>>(),
        "files": written,
    });
    Ok(Report::new(cfg, Command::RenderBasin, invariants, data))
}

fn fibers(cfg: &RunConfig) -> Result<Report> {
    let p = poly_or(cfg, "0,0,1");
    let z = cfg.z.unwrap_or(c(1.0));
    let n = cfg.depth.unwrap_or(10);
    if n > 16 {
        return Err(Error::Precondition(format!("fiber depth {n} > 16")));
    }
    let f = fiber(&p, z, n)?;
    let expected = p.degree().pow(n as u32);
    let valid = f.entries.iter().all(|e| e.history.validate(&p).is_ok());
    let heads: Vec<Complex64> = f.entries.iter().map(|e| e.history.deepest()).collect();
    let min_gap = (0..heads.len())
        .into_par_iter()
        .map(|i| {
            heads[i + 1..]
                .iter()
                .map(|w| (heads[i] - w).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let mut invariants = vec![
        check("count", f.count() == expected, format!("{} with multiplicity, expected {expected}", f.count())),
        check("valid_histories", valid, format!("{} entries", f.distinct())),
    ];
    if !f.is_ramified() {
        invariants.push(check("distinct", min_gap > 1e-9, format!("min gap {min_gap:e}")));
    }
    if let Some(out) = &cfg.out {
        std::fs::write(out, f.to_jsonl())?;
    }
    let data = json!({"polynomial": p.to_string(), "z": [z.re, z.im], "depth": n, "count": f.count(), "distinct": f.distinct(), "ramified": f.is_ramified()});
    Ok(Report::new(cfg, Command::Fibers, invariants, data))
}

fn random_cone(rng: &mut ChaCha8Rng, base: u32, depth: usize) -> Result<ConePoint> {
    let den: i64 = rng.gen_range(1..=1_000_000);
    let num = rng.gen_range(0..den);
    let digits = (0..depth).map(|_| rng.gen_range(0..base)).collect();
    let point = SolenoidPoint::new(Angle::rational(num, den)?, digits, base)?;
    let r = if rng.gen_bool(0.01) { 0.0 } else { rng.gen::<f64>() };
    ConePoint::new(r, point)
}

fn solenoid_demo(cfg: &RunConfig) -> Result<Report> {
    let p = poly_or(cfg, "0,0,1");
    let base = p.degree() as u32;
    let depth = cfg.depth.unwrap_or(10);
    let samples = cfg.samples.unwrap_or(1000);
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut round_trip = 0;
    let mut conjugate = 0;
    let mut radius_err: f64 = 0.0;
    for _ in 0..samples {
        let cone = random_cone(&mut rng, base, depth)?;
        let h = decode_exact(&cone, depth)?;
        if encode_exact(&h)? == cone {
            round_trip += 1;
        }
        if encode_exact(&h.shift())? == cone.shift_extend() {
            conjugate += 1;
        }
        for (i, r) in cone.radii(depth).into_iter().enumerate() {
            // r_{-i}^{n^i} = r_0
            let back = (0..i).fold(r, |x, _| x.powi(base as i32));
            radius_err = radius_err.max((back - cone.r).abs());
        }
    }
    let invariants = vec![
        check("exact_round_trip", round_trip == samples, format!("{round_trip}/{samples}")),
        check("shift_conjugacy", conjugate == samples, format!("{conjugate}/{samples}")),
        check("radius_law", radius_err <= tol, format!("max error {radius_err:e}")),
    ];
    let data = json!({"base": base, "depth": depth, "samples": samples, "radius_error": radius_err});
    Ok(Report::new(cfg, Command::SolenoidDemo, invariants, data))
}

fn conjugacy_check(cfg: &RunConfig) -> Result<Report> {
    let p = poly_or(cfg, "0.1,0,1");
    let guess = cfg.z.unwrap_or_else(|| c(0.0));
    let basin = ImmediateBasin::locate(&p, guess)?;
    let annulus = build_annulus(&basin, None, DEFAULT_RESOLUTION, DEFAULT_MODEL_RADIUS)?;
    let levels = cfg.levels.unwrap_or(6);
    let map = ConjugacyMap::new(&p, &annulus)?.extend_tower(levels.saturating_sub(1))?;
    let depth = cfg.depth.unwrap_or(10);
    let count = cfg.samples.unwrap_or(1000);
    let tol = cfg.tol.unwrap_or(1e-5);
    let histories = map.sample_histories(count, depth, cfg.seed.unwrap_or(0))?;
    let report = map.verify_conjugacy(&histories)?;
    let apex = map.psi_hat(&History::fixed(basin.fixed_point, depth))?;
    let cones = histories.par_iter().map(|h| map.psi_hat(h)).collect::<Result<Vec<_>>>()?;
    let gap = min_pairwise_distance(&cones);
    let invariants = vec![
        check("shift_equivariance", report.max <= tol, format!("max {:e}, mean {:e}", report.max, report.mean)),
        check("fixed_history_is_apex", apex.is_apex(), format!("r = {}", apex.r)),
        check("injectivity_proxy", gap > 1e-9, format!("min pairwise {gap:e}")),
        check("tower_residual", map.max_residual() <= crate::conjugacy::LEVEL_TOLERANCE, format!("{:e}", map.max_residual())),
    ];
    let data = json!({
        "polynomial": p.to_string(),
        "fixed_point": [basin.fixed_point.re, basin.fixed_point.im],
        "levels": map.levels(),
        "depth": depth,
        "report": report,
        "levels_table": map.tables().iter().map(|t| json!({"level": t.level, "model_radius": t.model_radius, "residual": t.residual})).collect::<Vec<_>>(),
    });
    Ok(Report::new(cfg, Command::ConjugacyCheck, invariants, data))
}

fn torus(cfg: &RunConfig) -> Result<Report> {
    let p = poly_or(cfg, "0,0,1");
    let alpha = cfg.alpha.unwrap_or(c(0.1));
    let samples = cfg.samples.unwrap_or(10_000);
    let iterations = cfg.depth.unwrap_or(12);
    let seed = cfg.seed.unwrap_or(0);
    let report: TorusReport = if p.is_monomial() {
        let map = SolidTorusMap::new(p.degree() as u32, alpha, cfg.rho.unwrap_or(1.2))?;
        torus_diagnostics(&map, samples, iterations, seed)?
    } else {
        let basin = ImmediateBasin::locate(&p, cfg.z.unwrap_or(c(0.0)))?;
        let gamma = boundary_parametrization(&basin, 2048)?;
        let map = GammaTorusMap::new(basin.degree as u32, alpha, gamma, p.clone(), cfg.rho)?;
        torus_diagnostics(&map, samples, iterations, seed)?
    };
    let margin_floor = cfg.tol.unwrap_or(0.0);
    let invariants = vec![
        check("nesting", report.nesting_margin > margin_floor, format!("margin {}", report.nesting_margin)),
        check("winding", report.winding == report.degree as i64, format!("{} (defect {:e})", report.winding, report.winding_defect)),
        check("injectivity", report.injectivity.injective(), format!("{} violations in {}", report.injectivity.violations, report.injectivity.points)),
        check("monotone_clouds", report.monotone, format!("{} iterations", report.clouds.len())),
    ];
    let data = serde_json::to_value(&report)?;
    Ok(Report::new(cfg, Command::TorusDiagnostics, invariants, data))
}

fn accessible(cfg: &RunConfig) -> Result<Report> {
    let params = henon_params(cfg)?;
    let mut opts = AccessibleOptions::default();
    if let Some(n) = cfg.samples {
        opts.directions = n;
    }
    if let Some(t) = cfg.tol {
        opts.tolerance = t;
    }
    let sample = accessible_boundary_sample(&params, &opts)?;
    let certified = sample.certified();
    let fraction = certified as f64 / opts.directions.max(1) as f64;
    let invariants = vec![check(
        "certified_fraction",
        fraction >= 0.9,
        format!("{certified}/{} directions", opts.directions),
    )];
    if let Some(out) = &cfg.out {
        std::fs::write(out, sample.to_jsonl())?;
    }
    let data = json!({
        "polynomial": params.p.to_string(),
        "a": [params.a.re, params.a.im],
        "fixed_point": [[sample.fixed_point.0.re, sample.fixed_point.0.im], [sample.fixed_point.1.re, sample.fixed_point.1.im]],
        "certified": certified,
        "flagged": sample.flagged,
        "tolerance": opts.tolerance,
    });
    Ok(Report::new(cfg, Command::AccessibleBoundary, invariants, data))
}

fn load_graph(cfg: &RunConfig, default_poly: &str) -> Result<ComponentGraph> {
    if let Some(path) = &cfg.graph {
        return ComponentGraph::from_json(&std::fs::read_to_string(path)?);
    }
    let p = poly_or(cfg, default_poly);
    let grid = cfg.grid.unwrap_or(GridSpec { bounds: None, nx: 384, ny: 384 }).resolve(p.escape_radius())?;
    let atlas = interior_components(&p, grid)?;
    ComponentGraph::from_atlas(&p, &atlas, cfg.delta.unwrap_or(0.5))
}

fn homology(cfg: &RunConfig) -> Result<Report> {
    let g = load_graph(cfg, "0.1,0,1")?;
    let model = h1_model(&g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let mut split = true;
    for (i, s) in model.summands.iter().enumerate() {
        for _ in 0..cfg.samples.unwrap_or(100) {
            let x = LocalizedInteger::new(BigInt::from(rng.gen_range(-1_000_000i64..1_000_000)), rng.gen_range(0..40), s.base)?;
            split &= model.project(i, &model.include(i, &x)?)? == x;
        }
    }
    let invariants = vec![
        check("nonempty", !model.summands.is_empty(), model.describe()),
        check("split", split, "projection after inclusion is the identity"),
    ];
    let data = json!({"graph": serde_json::to_value(&g)?, "model": model.describe(), "summands": model.summands, "surjective": model.surjective});
    Ok(Report::new(cfg, Command::Homology, invariants, data))
}

fn covering(cfg: &RunConfig) -> Result<Report> {
    let g = load_graph(cfg, "-1,0,1")?;
    let report = covering_trivial(&g)?;
    let invariants = vec![check("trivial", report.is_trivial(), format!("{:?}", report.verdict))];
    let data = json!({"graph": serde_json::to_value(&g)?, "report": report});
    Ok(Report::new(cfg, Command::CoveringCheck, invariants, data))
}

/// Reads a config file, if any, and applies `overrides` in order.
pub fn load_config(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::parse(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    for (k, v) in overrides {
        cfg.set(k, v)?;
    }
    Ok(cfg)
}
