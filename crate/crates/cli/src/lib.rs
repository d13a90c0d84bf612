//! `lagmin` command line: meshes, verification reports, pencil
//! classification and the figure gallery.

mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use lagmin_core::biharmonic::parse_field;
use lagmin_core::geom::Vec3;
use lagmin_core::mesh::{build_mesh, build_mesh_with, objects_to_obj, Grid, Mesh};
use lagmin_core::pencils::{classify_family, Cycle, PencilClass};
use lagmin_core::reconstruct::{isotropic_image, ParamSurface, SurfaceKind};
use lagmin_core::surfaces::{building_block, parse_surface, ruled_surface};
use lagmin_core::verify::{
    biharmonic_report, curvature_report, field_of_surface, gaussmap_identity_residual, preimage_for,
    ruling_residual, rulings_for, stationarity_report, tangency_report, CheckReport,
};

pub use config::{Config, CHECKS};
pub use output::{records_json, to_json, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Cone parameters used by `verify --checks tangency`.
pub const TANGENCY_PHIS: [f64; 5] = [-0.5, -0.25, 0.1, 0.3, 0.55];
pub const TANGENCY_GRID: usize = 400;

#[derive(Parser, Debug)]
#[command(name = "lagmin", version, about = "Laguerre minimal surfaces: meshes, checks and pencils")]
struct Cli {
    /// Flat key=value file with `guard` and `tol.<check>` entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides a config entry, e.g. `--set tol.gaussmap=1e-7`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct SurfaceOpts {
    /// `r3`, `r3@theta=0.5`, `conv(1*r1, 0.5*r2)`, `ruled(A,B,C,D)` or `field:<field>`.
    #[arg(long)]
    surface: String,
    /// Arctan branch index.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    branch: i64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Mesh a surface over a parameter rectangle.
    Generate {
        #[command(flatten)]
        s: SurfaceOpts,
        #[arg(long, default_value = "100x100")]
        grid: String,
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        range: String,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Mesh the ruled surface R(φ, λ) and append ruling polylines.
    Ruled {
        #[arg(long = "A", allow_hyphen_values = true)]
        a: f64,
        #[arg(long = "B", allow_hyphen_values = true)]
        b: f64,
        #[arg(long = "C", allow_hyphen_values = true)]
        c: f64,
        #[arg(long = "D", allow_hyphen_values = true)]
        d: f64,
        #[arg(long = "phi-range", default_value = "-3.14159,3.14159", allow_hyphen_values = true)]
        phi_range: String,
        #[arg(long = "lambda-range", default_value = "-2,2", allow_hyphen_values = true)]
        lambda_range: String,
        #[arg(long, default_value = "100x100")]
        grid: String,
        /// Number of ruling polylines.
        #[arg(long, default_value_t = 12)]
        rulings: usize,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Run numerical checks and write a JSON report.
    Verify {
        #[command(flatten)]
        s: SurfaceOpts,
        /// Comma list from: biharmonic,gaussmap,ruling,curvature,stationarity,tangency.
        #[arg(long)]
        checks: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Classify families of circles given as cycle coordinates.
    ClassifyPencil {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Mesh the isotropic-model graph (x, y, F(x, y)) of a surface.
    Isotropic {
        #[command(flatten)]
        s: SurfaceOpts,
        #[arg(long, default_value = "100x100")]
        grid: String,
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        range: String,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
    /// Regenerate the six figure meshes into a directory.
    Gallery {
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Fail {
    Usage(String),
    Io(String),
}

type CmdResult = Result<bool, Fail>;

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn io_err(path: &Path, e: std::io::Error) -> Fail {
    Fail::Io(format!("{}: {e}", path.display()))
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// exit code: 0 success, 1 failed check or I/O error, 2 usage error.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = load_config(&cli).and_then(|cfg| dispatch(cli.cmd, &cfg));
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}\n\nRun `lagmin --help` for the command grammar.");
            EXIT_USAGE
        }
        Err(Fail::Io(m)) => {
            eprintln!("error: {m}");
            EXIT_CHECK_FAILED
        }
    }
}

/// Honors `LAGMIN_THREADS` once per process.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("LAGMIN_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        format!("LAGMIN_THREADS must be a positive integer, got `{v}`")
    })?;
    // a pool built earlier in the same process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Config, Fail> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            Config::parse(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => Config::default(),
    };
    for s in &cli.set {
        cfg.set(s).map_err(usage)?;
    }
    Ok(cfg)
}

fn dispatch(cmd: Cmd, cfg: &Config) -> CmdResult {
    match cmd {
        Cmd::Generate { s, grid, range, out } => {
            let surf = load_surface(&s, cfg)?;
            let mesh = build_mesh(&surf, parse_grid(&grid, &range)?);
            write_out(&out, &mesh.to_obj())
        }
        Cmd::Ruled { a, b, c, d, phi_range, lambda_range, grid, rulings, out } => {
            let (p0, p1) = parse_pair(&phi_range)?;
            let (l0, l1) = parse_pair(&lambda_range)?;
            let (nu, nv) = parse_dims(&grid)?;
            let g = Grid { nu, nv, u0: p0, u1: p1, v0: l0, v1: l1 };
            write_out(&out, &ruled_mesh(a, b, c, d, g, rulings).to_obj())
        }
        Cmd::Verify { s, checks, seed, report } => {
            let surf = load_surface(&s, cfg)?;
            let list = parse_checks(&checks)?;
            let plan = plan_checks(&surf, &list)?;
            let reports: Vec<CheckReport> = plan.iter().map(|c| run_check(&surf, c, seed, cfg)).collect();
            write_out(&report, &records_json(&reports))?;
            Ok(reports.iter().all(|r| r.pass))
        }
        Cmd::ClassifyPencil { input, report } => {
            let text = std::fs::read_to_string(&input).map_err(|e| io_err(&input, e))?;
            let families = parse_families(&text)?;
            let mut ok = true;
            let records: Vec<PencilRecord> = families
                .iter()
                .enumerate()
                .map(|(i, f)| match classify_family(f) {
                    Ok(c) => PencilRecord { family: i, result: Some(c), error: None },
                    Err(e) => {
                        ok = false;
                        PencilRecord { family: i, result: None, error: Some(e.to_string()) }
                    }
                })
                .collect();
            write_out(&report, &records_json(&records))?;
            Ok(ok)
        }
        Cmd::Isotropic { s, grid, range, out } => {
            let surf = load_surface(&s, cfg)?;
            write_out(&out, &isotropic_mesh(&surf, parse_grid(&grid, &range)?).to_obj())
        }
        Cmd::Gallery { out } => {
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            for (file, objects) in gallery().map_err(usage)? {
                write_out(&out.join(file), &objects_to_obj(&objects))?;
            }
            Ok(true)
        }
    }
}

fn write_out(path: &Path, text: &str) -> CmdResult {
    write_atomic(path, text).map_err(|e| io_err(path, e))?;
    Ok(true)
}

fn load_surface(s: &SurfaceOpts, cfg: &Config) -> Result<ParamSurface<f64>, Fail> {
    let surf = parse_surface::<f64>(&s.surface).map_err(|e| usage(format!("--surface: {e}")))?;
    Ok(surf.with_branch(s.branch).with_guard(cfg.guard))
}

fn parse_dims(s: &str) -> Result<(usize, usize), Fail> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| usage(format!("--grid: expected NxM, got `{s}`")))?;
    let n: usize = a.trim().parse().map_err(|_| usage(format!("--grid: bad count `{a}`")))?;
    let m: usize = b.trim().parse().map_err(|_| usage(format!("--grid: bad count `{b}`")))?;
    if n < 2 || m < 2 {
        return Err(usage("--grid: need at least 2x2 vertices"));
    }
    Ok((n, m))
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, Fail> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("expected {n} comma-separated numbers, got `{s}`")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(usage(format!("expected {n} comma-separated numbers, got `{s}`")));
    }
    Ok(v)
}

fn parse_pair(s: &str) -> Result<(f64, f64), Fail> {
    let v = parse_floats(s, 2)?;
    if v[0] >= v[1] {
        return Err(usage(format!("range `{s}` is empty")));
    }
    Ok((v[0], v[1]))
}

fn parse_grid(grid: &str, range: &str) -> Result<Grid, Fail> {
    let (nu, nv) = parse_dims(grid)?;
    let r = parse_floats(range, 4)?;
    if r[0] >= r[1] || r[2] >= r[3] {
        return Err(usage(format!("--range `{range}` is empty")));
    }
    Ok(Grid { nu, nv, u0: r[0], u1: r[1], v0: r[2], v1: r[3] })
}

fn parse_checks(s: &str) -> Result<Vec<String>, Fail> {
    let list: Vec<String> = s.split(',').map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
    if list.is_empty() {
        return Err(usage("--checks is empty"));
    }
    for c in &list {
        if !CHECKS.contains(&c.as_str()) {
            return Err(usage(format!("unknown check `{c}` (expected one of {})", CHECKS.join(","))));
        }
    }
    Ok(list)
}

/// Confirms every requested check applies to the surface before running any.
fn plan_checks(s: &ParamSurface<f64>, list: &[String]) -> Result<Vec<String>, Fail> {
    for c in list {
        let ok = match c.as_str() {
            "biharmonic" | "stationarity" => field_of_surface(s).is_some(),
            "ruling" => rulings_for(s).is_ok(),
            "tangency" => preimage_for(s).is_ok(),
            "curvature" | "gaussmap" => true,
            _ => false,
        };
        if !ok {
            return Err(usage(format!("check `{c}` does not apply to this surface")));
        }
    }
    Ok(list.to_vec())
}

/// Re-applies a configured tolerance; other pass conditions are kept.
fn retol(mut r: CheckReport, t: f64) -> CheckReport {
    let extra_ok = r.pass || r.max_residual <= r.tolerance;
    r.tolerance = t;
    r.pass = extra_ok && r.max_residual <= t;
    r
}

fn failed(check: &str, e: impl std::fmt::Display, t: f64) -> CheckReport {
    CheckReport::from_residuals(check, &[f64::INFINITY], t).with("error", e.to_string())
}

fn run_check(s: &ParamSurface<f64>, check: &str, seed: u64, cfg: &Config) -> CheckReport {
    let t = cfg.tolerance(check);
    let r = match check {
        "biharmonic" => field_of_surface(s)
            .ok_or(lagmin_core::Error::ProvenanceMismatch)
            .and_then(|f| biharmonic_report(&f, seed, 1000, 3.0)),
        "gaussmap" => Ok(gaussmap_identity_residual(s, Grid::square(100, 2.0))),
        "curvature" => curvature_report(s, seed, 20),
        "stationarity" => field_of_surface(s)
            .ok_or(lagmin_core::Error::ProvenanceMismatch)
            .and_then(|f| stationarity_report(&f, seed, 5)),
        "ruling" => rulings_for(s).and_then(|rl| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phis: Vec<f64> = (0..20).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lams: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            ruling_residual(s, &rl, &phis, &lams).map(|r| r.with("seed", seed))
        }),
        "tangency" => preimage_for(s).and_then(|fam| {
            tangency_report(s, &fam, &TANGENCY_PHIS, 3, Grid::square(TANGENCY_GRID, 2.0))
        }),
        _ => unreachable!("checks are validated before running"),
    };
    match r {
        Ok(r) => retol(r, t),
        Err(e) => failed(check, e, t),
    }
}

#[derive(Serialize)]
struct PencilRecord {
    family: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<PencilClass<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Accepts one family `[[a,b,c,d], ...]` (or objects with keys `a`..`d`),
/// or `{"families": [family, ...]}`.
fn parse_families(text: &str) -> Result<Vec<Vec<Cycle<f64>>>, Fail> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| usage(format!("--input: {e}")))?;
    let fams: Vec<&serde_json::Value> = match v.get("families") {
        Some(serde_json::Value::Array(f)) => f.iter().collect(),
        _ => vec![&v],
    };
    fams.into_iter().map(parse_family).collect()
}

fn parse_family(v: &serde_json::Value) -> Result<Vec<Cycle<f64>>, Fail> {
    let arr = v.as_array().ok_or_else(|| usage("--input: a family must be an array of cycles"))?;
    arr.iter()
        .map(|c| {
            let nums: Option<Vec<f64>> = match c {
                serde_json::Value::Array(xs) => xs.iter().map(|x| x.as_f64()).collect(),
                serde_json::Value::Object(_) => ["a", "b", "c", "d"].iter().map(|k| c.get(*k).and_then(|x| x.as_f64())).collect(),
                _ => None,
            };
            match nums {
                Some(n) if n.len() == 4 => Ok(Cycle::from_array(&n)),
                _ => Err(usage(format!("--input: bad cycle `{c}`"))),
            }
        })
        .collect()
}

fn ruled_mesh(a: f64, b: f64, c: f64, d: f64, g: Grid, rulings: usize) -> Mesh<f64> {
    let patch = ruled_surface(a, b, c, d);
    let s = ParamSurface::new(SurfaceKind::Ruled(patch));
    let mut m = build_mesh(&s, g);
    for k in 0..rulings {
        let phi = g.u0 + (g.u1 - g.u0) * (k as f64 + 0.5) / rulings as f64;
        m.polylines.push(vec![patch.at(phi, g.v0), patch.at(phi, g.v1)]);
    }
    m
}

fn isotropic_mesh(s: &ParamSurface<f64>, g: Grid) -> Mesh<f64> {
    let sing: Vec<(f64, f64)> = s.singular_points();
    build_mesh_with(g, &sing, s.guard, s.has_angle(), |u, v| {
        let (x, y, z) = isotropic_image(s, u, v).ok()?.as_finite()?;
        Some(Vec3::new(x, y, z))
    })
}

/// Figure meshes: file name and its named objects. Parameters are fixed
/// here and listed in the README.
pub const GALLERY_GRID: usize = 64;
pub const GALLERY_HYPERBOLIC: &str = "hyperbolic(a1=1, a2=0.5, a3=-0.5, b1=0.3, b2=0.2, c1=-0.4, c2=0.1)";
pub const GALLERY_PARABOLIC: &str = "parabolic(alpha0=0.5, alpha1=1, beta2=0.3, gamma1=-0.5, gamma3=0.2)";
pub const GALLERY_FILES: [&str; 6] = [
    "fig1_hyperbolic_general.obj",
    "fig4_elliptic_blocks.obj",
    "fig5_ruled_convolution.obj",
    "fig6_hyperbolic_blocks.obj",
    "fig7_parabolic_blocks.obj",
    "fig8_parabolic_general.obj",
];

type Objects = Vec<(String, Mesh<f64>)>;

fn gallery() -> Result<Vec<(&'static str, Objects)>, String> {
    let g = Grid::square(GALLERY_GRID, 2.0);
    let field_obj = |name: &str, spec: &str| -> Result<(String, Mesh<f64>), String> {
        let f = parse_field::<f64>(spec).map_err(|e| e.to_string())?;
        let s = lagmin_core::reconstruct::reconstruct_surface(&f);
        Ok((name.to_string(), build_mesh(&s, g)))
    };
    let blocks = |names: &[&str]| -> Result<Objects, String> {
        names
            .iter()
            .map(|n| Ok((n.to_string(), build_mesh(&building_block::<f64>(n, 0.0).map_err(|e| e.to_string())?, g))))
            .collect()
    };

    // the cycloid r2 is a curve: drawn as the image of the unit circle
    let r2 = building_block::<f64>("r2", 0.0).map_err(|e| e.to_string())?;
    let cycloid: Vec<Vec3<f64>> = (0..=200)
        .filter_map(|k| {
            let t = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / 200.0;
            r2.point(t.cos(), t.sin()).ok()
        })
        .collect();
    let mut fig4 = blocks(&["r1", "r3", "r1~", "r3~"])?;
    fig4.insert(1, ("r2".to_string(), Mesh { grid: g, vertices: Vec::new(), faces: Vec::new(), polylines: vec![cycloid] }));

    let rl = lagmin_core::surfaces::rulings_of_convolution(1.0, 1.0, 1.0, 0.0).map_err(|e| e.to_string())?;
    let conv = rl.surface().map_err(|e| e.to_string())?;
    let mut fig5 = build_mesh(&conv, g);
    for k in 0..16 {
        let phi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / 16.0;
        fig5.polylines.push(vec![rl.at(phi, -2.0), rl.at(phi, 2.0)]);
    }

    Ok(vec![
        (GALLERY_FILES[0], vec![field_obj("hyperbolic_general", GALLERY_HYPERBOLIC)?]),
        (GALLERY_FILES[1], fig4),
        (GALLERY_FILES[2], vec![("conv_r1_r2_r3".to_string(), fig5)]),
        (GALLERY_FILES[3], blocks(&["r4", "r5", "r6", "r4~", "r6~"])?),
        (GALLERY_FILES[4], blocks(&["r7", "r8", "r9", "r10", "r11"])?),
        (GALLERY_FILES[5], vec![field_obj("parabolic_general", GALLERY_PARABOLIC)?]),
    ])
}
