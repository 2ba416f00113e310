use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use warpgeom::distscal::{distscal_report_cos, distscal_report_soc};
use warpgeom::geodesics::{geodesic_integrate, systole_lower_bound_cos, GeodesicState, SmoothWarp};
use warpgeom::means::{ball_average_shifted, conforming_shift, direction, MeanCurve};
use warpgeom::metrics::{
    gradient_bound_soc, nnsc_check_cos, nnsc_check_soc, scalar_curvature_cos, scalar_curvature_soc, volume_cos,
    CosMetric, SocMetric,
};
use warpgeom::mina::{mina_upper_bound, vitali_l1_trace, HypothesisMode};
use warpgeom::sequences::{
    convergence_report, generate, generate_circle, grad_log_bound_check, moser_trudinger_check, FamilyKind,
};
use warpgeom::spheregrid::{
    read_field, write_circle_field, write_sphere_field, AnyField, CircleField, CircleGrid, PolarGrid, ScalarField,
};

#[derive(Parser)]
#[command(name = "warpgeom", version, about = "Warped product metrics on sampled warping functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Cos,
    Soc,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature checks; prints a JSON array of reports.
    Analyze {
        #[arg(long, value_enum, default_value = "cos")]
        metric: MetricKind,
        #[arg(long)]
        field: PathBuf,
        /// NNSC tolerance, defaults to the grid's calibrated value.
        #[arg(long)]
        tol: Option<f64>,
        /// Where to write the scalar curvature field.
        #[arg(long)]
        curvature: Option<PathBuf>,
    },
    /// Circle means and ball averages about a center, as CSV.
    Means {
        #[arg(long)]
        field: PathBuf,
        /// `r,theta` of the center.
        #[arg(long, value_delimiter = ',', required = true)]
        center: Vec<f64>,
        /// Shift constant, defaults to `|f|_2 / sqrt(2 pi)`.
        #[arg(long)]
        shift: Option<f64>,
        #[arg(long)]
        curve: PathBuf,
    },
    /// Torus sweepout width, and the covering trace when `--A` is given.
    Mina {
        #[arg(long)]
        field: PathBuf,
        #[arg(long = "A")]
        area: Option<f64>,
    },
    /// Distributional scalar curvature against a test function.
    Distscal {
        #[arg(long, value_enum, default_value = "cos")]
        metric: MetricKind,
        #[arg(long)]
        field: PathBuf,
        /// A field file holding the fiber-integrated test function, or `const` for `u = 1`.
        #[arg(long, default_value = "const")]
        test: String,
        /// Also print the two split integrals separately.
        #[arg(long)]
        split: bool,
    },
    /// Integrate one geodesic and write the trajectory as CSV.
    Geodesic {
        #[arg(long)]
        field: PathBuf,
        /// `r,theta,phi,r',theta',phi'`.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        seed: Vec<f64>,
        #[arg(long = "T")]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence diagnostics for a built-in family.
    Sequence {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        js: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1.5,2")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        q: Vec<f64>,
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Report path; member fields are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one family member as a field file.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1)]
        j: usize,
        /// Radial nodes (sphere) or circle nodes.
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct FamilyArgs {
    /// constant, harmonic, log_spike, scaled, soc_constant or soc_harmonic.
    #[arg(long, default_value = "log_spike")]
    family: String,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    m: i64,
    /// Floor of the log-spike family.
    #[arg(long, default_value_t = 1.0)]
    floor: f64,
}

impl FamilyArgs {
    fn kind(&self) -> Result<FamilyKind> {
        let (c, eps) = (self.c, self.eps);
        Ok(match self.family.as_str() {
            "constant" => FamilyKind::Constant { c },
            "harmonic" => FamilyKind::Harmonic { c, eps, l: self.l, m: self.m },
            "log_spike" => FamilyKind::LogSpike { floor: self.floor },
            "scaled" => FamilyKind::Scaled { c, eps },
            "soc_constant" => FamilyKind::SocConstant { c },
            "soc_harmonic" => FamilyKind::SocHarmonic { c, eps },
            other => bail!("unknown family {other:?}"),
        })
    }
}

fn sphere_field(path: &Path) -> Result<ScalarField> {
    match read_field(path).with_context(|| format!("reading {}", path.display()))? {
        AnyField::Sphere(f) => Ok(f),
        AnyField::Circle(_) => bail!("{} holds a circle field, expected a sphere field", path.display()),
    }
}

fn circle_field(path: &Path) -> Result<CircleField> {
    match read_field(path).with_context(|| format!("reading {}", path.display()))? {
        AnyField::Circle(h) => Ok(h),
        AnyField::Sphere(_) => bail!("{} holds a sphere field, expected a circle field", path.display()),
    }
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn analyze(metric: MetricKind, field: &Path, tol: Option<f64>, curvature: Option<&Path>) -> Result<()> {
    match metric {
        MetricKind::Cos => {
            let f = sphere_field(field)?;
            let m = CosMetric::new(f.clone())?;
            let volume = volume_cos(&m);
            let reports = vec![
                nnsc_check_cos(&m, tol),
                grad_log_bound_check(&f, None)?,
                moser_trudinger_check(&f, 2.0, volume, None)?,
            ];
            if let Some(path) = curvature {
                write_sphere_field(path, &scalar_curvature_cos(&m))?;
            }
            let systole = systole_lower_bound_cos(&m);
            eprintln!("volume {volume:.10e}, systole lower bound {:.10e} ({:?})", systole.value, systole.binding);
            print_json(&reports)
        }
        MetricKind::Soc => {
            let h = circle_field(field)?;
            let m = SocMetric::new(h)?;
            let reports = vec![nnsc_check_soc(&m, tol), gradient_bound_soc(&m, 1e-12)];
            if let Some(path) = curvature {
                write_circle_field(path, &scalar_curvature_soc(&m))?;
            }
            print_json(&reports)
        }
    }
}

fn means(field: &Path, center: &[f64], shift: Option<f64>, curve: &Path) -> Result<()> {
    let [r, theta] = center else { bail!("--center takes r,theta") };
    let f = sphere_field(field)?;
    let x = direction(*r, *theta);
    let c = shift.unwrap_or_else(|| conforming_shift(&f));
    let radii: Vec<f64> = f.grid().r_nodes().iter().copied().filter(|&r| r <= PI / 2.0).collect();
    let curve_data = MeanCurve::new(&f, x, &radii)?;
    let mut w = csv::Writer::from_path(curve)?;
    w.write_record(["radius", "phi", "ball_avg", "shifted_ball_avg"])?;
    for (&r, &phi) in curve_data.radii.iter().zip(&curve_data.values) {
        let ball = ball_average_shifted(&f, x, r, 0.0)?;
        let shifted = ball_average_shifted(&f, x, r, c)?;
        w.write_record([r, phi, ball, shifted].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn mina(field: &Path, area: Option<f64>) -> Result<()> {
    let f = sphere_field(field)?;
    let (upper_bound, record) = mina_upper_bound(&f)?;
    let trace = area.map(|a| vitali_l1_trace(&f, a, HypothesisMode::Report)).transpose()?;
    print_json(&json!({
        "upper_bound": upper_bound,
        "record": record,
        "h_set_size": trace.as_ref().map(|t| t.h_set_size),
        "trace": trace,
    }))
}

fn distscal(metric: MetricKind, field: &Path, test: &str, split: bool) -> Result<()> {
    let report = match metric {
        MetricKind::Cos => {
            let m = CosMetric::new(sphere_field(field)?)?;
            let ubar = if test == "const" {
                ScalarField::constant(m.grid(), 2.0 * PI)
            } else {
                sphere_field(Path::new(test))?
            };
            distscal_report_cos(&m, &ubar)?
        }
        MetricKind::Soc => {
            let m = SocMetric::new(circle_field(field)?)?;
            let ubar = if test == "const" {
                CircleField::constant(m.grid(), 4.0 * PI)
            } else {
                circle_field(Path::new(test))?
            };
            distscal_report_soc(&m, &ubar)?
        }
    };
    if split {
        print_json(&report)
    } else {
        print_json(&json!({
            "pairing": report.pairing,
            "total": report.total,
            "classical_total": report.classical_total,
            "discrepancy": report.discrepancy,
        }))
    }
}

fn geodesic(field: &Path, seed: &[f64], t_end: f64, dt: f64, out: &Path) -> Result<()> {
    if seed.len() != 6 {
        bail!("--seed takes r,theta,phi,r',theta',phi'");
    }
    let f = sphere_field(field)?;
    let warp = SmoothWarp::new(&CosMetric::new(f)?)?;
    let s0 = GeodesicState::new(&warp, [seed[0], seed[1], seed[2]], [seed[3], seed[4], seed[5]]);
    let traj = geodesic_integrate(&warp, &s0, t_end, dt)?;
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["t", "r", "theta", "phi", "energy_drift", "killing_drift"])?;
    let first = traj.initial();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let [r, th, ph] = s.position;
        let row = [*t, r, th, ph, s.energy - first.energy, s.killing_momentum - first.killing_momentum];
        w.write_record(row.map(|v| v.to_string()))?;
    }
    w.flush()?;
    if let Some(why) = &traj.aborted {
        eprintln!("aborted: {why}");
    }
    eprintln!("energy drift {:.3e}, killing drift {:.3e}", traj.energy_drift, traj.killing_drift);
    Ok(())
}

fn sequence(kind: &FamilyKind, js: &[usize], p: &[f64], q: &[f64], n: usize, out: &Path) -> Result<()> {
    if kind.is_circle() {
        bail!("sequence diagnostics cover sphere families only");
    }
    let grid = PolarGrid::square(n)?;
    let report = convergence_report(kind, js, p, q, &[ScalarField::constant(&grid, 1.0)], &grid)?;
    serde_json::to_writer_pretty(File::create(out)?, &report)?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("member");
    for &j in &report.js {
        let member = generate(kind, j, &grid)?;
        write_sphere_field(out.with_file_name(format!("{stem}_j{j}.json")), &member.field)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn generate_member(kind: &FamilyKind, j: usize, n: usize, out: &Path) -> Result<()> {
    let verified = if kind.is_circle() {
        let member = generate_circle(kind, j, &CircleGrid::new(n)?)?;
        write_circle_field(out, &member.field)?;
        member.nnsc_verified()
    } else {
        let member = generate(kind, j, &PolarGrid::square(n)?)?;
        write_sphere_field(out, &member.field)?;
        member.nnsc_verified()
    };
    eprintln!("{} member {j}: NNSC {}", kind.name(), if verified { "verified" } else { "not verified" });
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Analyze { metric, field, tol, curvature } => analyze(metric, &field, tol, curvature.as_deref()),
        Command::Means { field, center, shift, curve } => means(&field, &center, shift, &curve),
        Command::Mina { field, area } => mina(&field, area),
        Command::Distscal { metric, field, test, split } => distscal(metric, &field, &test, split),
        Command::Geodesic { field, seed, t_end, dt, out } => geodesic(&field, &seed, t_end, dt, &out),
        Command::Sequence { family, js, p, q, n, out } => sequence(&family.kind()?, &js, &p, &q, n, &out),
        Command::Generate { family, j, n, out } => generate_member(&family.kind()?, j, n, &out),
    }
}
