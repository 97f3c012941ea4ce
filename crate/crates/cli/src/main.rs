use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pmin_core::characteristic::{trace, TraceOptions};
use pmin_core::curvature::{
    effective_tol_sing, first_order_data, mean_curvature_from_sample, pmge_from_sample,
};
use pmin_core::dirichlet::{default_schedule, solve_from, DirichletProblem};
use pmin_core::families::{make_plane, make_quadratic_family, GFunction, RuledSurface};
use pmin_core::field::GridGeometry;
use pmin_core::fixtures::{example1, example3, radial, tlog};
use pmin_core::h1::Point3;
use pmin_core::quadrature::Domain2;
use pmin_core::singular::{
    classify, index, polish_onto_singular_set, scan_singular, IndexPolicy, ScanOptions,
};
use pmin_core::sphere::{
    cayley, cayley_inverse, conformal_lambda, foliation_index_audit, great_circle, torus_mesh,
    torus_pmc, Axis, GreatCirclePair, Surface,
};
use pmin_core::verify::{run_all, run_suite, Suite};
use pmin_core::{Error, GridField, ScalarField2};

#[derive(Parser)]
#[command(
    name = "pmin",
    version,
    about = "p-minimal surfaces in the Heisenberg group and the CR 3-sphere"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pointwise quantities D, N, θ, H and P(u) of a field.
    Eval {
        #[command(flatten)]
        field: FieldArgs,
        /// Evaluation point x,y.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Singular threshold on D (default scales with |p|).
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integrate a characteristic curve.
    Trace {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// +1 follows N⊥, −1 follows −N⊥.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        orientation: f64,
        #[arg(long, default_value_t = 10.0)]
        length: f64,
        /// Integrator tolerance (atol = rtol).
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Singular-set scanning, classification and index.
    Singular {
        #[command(subcommand)]
        cmd: SingularCmd,
    },
    /// ε-regularized Dirichlet problem on a rectangle.
    Solve {
        #[command(flatten)]
        field: FieldArgs,
        /// Boundary CSV (`# x0= y0= h= nx= ny=` header, then x,y,u rows); otherwise the field supplies the boundary.
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        /// Cells per side when the boundary comes from a field.
        #[arg(long, default_value_t = 64)]
        cells: usize,
        /// Comma-separated decreasing ε values.
        #[arg(long)]
        eps: Option<String>,
        /// Start Newton from zero instead of the Coons patch.
        #[arg(long)]
        zero_start: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ruled-surface meshes.
    Surface {
        #[arg(long, value_enum)]
        kind: SurfaceKind,
        #[arg(long, default_value_t = 33)]
        n_tau: usize,
        #[arg(long, default_value_t = 17)]
        n_s: usize,
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 1.0)]
        tau_max: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The standard pseudohermitian 3-sphere.
    Sphere {
        #[command(subcommand)]
        cmd: SphereCmd,
    },
    /// Run verification suites and report measured values.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum SingularCmd {
    Scan {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        domain: String,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Seed cells whose corner |G| is below this; 0 seeds on sign changes only.
        #[arg(long, default_value_t = 1e-7)]
        coarse_tol: f64,
        #[arg(long)]
        no_index: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    Classify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        /// Newton-polish the point onto the singular set first.
        #[arg(long)]
        polish: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    Index {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 720)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Subcommand)]
enum SphereCmd {
    /// p-mean curvature of the torus ρ₁ = c.
    TorusPmc {
        #[arg(long)]
        c: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Legendrian great circle through α with direction (cos t, sin t).
    GreatCircle {
        #[arg(long, default_value = "0,0,1,0", allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cayley transform of x1,y1,x2,y2, or its inverse with --inverse x,y,z.
    Cayley {
        #[arg(long, allow_hyphen_values = true, conflicts_with = "inverse")]
        point: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        inverse: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Singular points, indices and Euler characteristic of a closed surface.
    Audit {
        /// x1, y1, x2, y2 (coordinate spheres) or clifford.
        #[arg(long)]
        surface: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Mesh of the torus ρ₁ = c, exported through the Cayley transform.
    TorusMesh {
        #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2)]
        c: f64,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// plane, quad, radial, example1, example3, tlog.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters k=v,k=v.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    params: String,
    /// g for the quad family: zero, sin, square, cube.
    #[arg(long)]
    g: Option<String>,
    /// Grid CSV instead of a named family.
    #[arg(long, conflicts_with = "family")]
    grid: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceKind {
    UnitCircle,
    Saddle,
    ContactPlane,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::BadParams(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            msg: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn parse_floats(s: &str, n: usize, what: &str) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| {
            Failure::usage(format!(
                "{what}: expected {n} comma-separated numbers, got {s:?}"
            ))
        })?;
    if v.len() != n {
        return Err(Failure::usage(format!(
            "{what}: expected {n} numbers, got {}",
            v.len()
        )));
    }
    Ok(v)
}

fn parse_point(s: &str) -> CliResult<[f64; 2]> {
    let v = parse_floats(s, 2, "--at")?;
    Ok([v[0], v[1]])
}

fn parse_domain(s: &str) -> CliResult<Domain2> {
    let v = parse_floats(s, 4, "--domain")?;
    Ok(Domain2::rect(v[0], v[1], v[2], v[3])?)
}

struct Params(Vec<(String, f64)>);

impl Params {
    fn parse(s: &str) -> CliResult<Self> {
        let mut out = Vec::new();
        for kv in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Failure::usage(format!("--params: expected k=v, got {kv:?}")))?;
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("--params: {k} is not a number")))?;
            out.push((k.trim().to_string(), v));
        }
        Ok(Params(out))
    }

    fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        match self.0.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(Failure::usage(format!(
                "unknown parameter {k:?}; expected one of {allowed:?}"
            ))),
            None => Ok(()),
        }
    }

    fn get(&self, k: &str, default: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .find(|(key, _)| key == k)
            .map_or(default, |(_, v)| *v)
    }
}

fn build_field(a: &FieldArgs) -> CliResult<Box<dyn ScalarField2>> {
    if let Some(path) = &a.grid {
        let g = GridField::read_csv(BufReader::new(File::open(path)?))?;
        return Ok(Box::new(g));
    }
    let family = a
        .family
        .as_deref()
        .ok_or_else(|| Failure::usage("one of --family or --grid is required"))?;
    let p = Params::parse(&a.params)?;
    if a.g.is_some() && family != "quad" {
        return Err(Failure::usage("--g only applies to --family quad"));
    }
    let f: Box<dyn ScalarField2> = match family {
        "plane" => {
            p.check_keys(&["a", "b", "c"])?;
            Box::new(make_plane(
                p.get("a", 0.0),
                p.get("b", 0.0),
                p.get("c", 0.0),
            ))
        }
        "quad" => {
            p.check_keys(&["a", "b"])?;
            let g = GFunction::by_name(a.g.as_deref().unwrap_or("zero"))?;
            Box::new(make_quadratic_family(
                p.get("a", 1.0),
                p.get("b", 0.0),
                g,
                false,
            )?)
        }
        "radial" => {
            p.check_keys(&["sign"])?;
            let s = p.get("sign", 1.0);
            if s != 1.0 && s != -1.0 {
                return Err(Failure::usage("radial: sign must be 1 or -1"));
            }
            Box::new(radial(s))
        }
        "example1" => {
            p.check_keys(&[])?;
            Box::new(example1())
        }
        "example3" => {
            p.check_keys(&["beta"])?;
            Box::new(example3(p.get("beta", 3.0))?)
        }
        "tlog" => {
            p.check_keys(&[])?;
            Box::new(tlog())
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown family {other:?}; expected plane, quad, radial, example1, example3 or tlog"
            )))
        }
    };
    Ok(f)
}

fn emit(out: &OutArgs, body: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(body.as_bytes())?;
        }
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn emit_json(out: &OutArgs, command: &str, mut v: Value) -> CliResult<()> {
    if out.format != Format::Json {
        return Err(Failure::usage(format!("{command} only writes json")));
    }
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), json!(1));
        m.insert("command".into(), json!(command));
    }
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure {
        code: 1,
        msg: e.to_string(),
    })?;
    s.push('\n');
    emit(out, &s)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Eval {
            field,
            at,
            tol,
            out,
        } => {
            let f = build_field(&field)?;
            let [x, y] = parse_point(&at)?;
            let s = f.eval(x, y)?;
            let fo = first_order_data(f.as_ref(), x, y, tol)?;
            let h = mean_curvature_from_sample(&s, x, y, effective_tol_sing(&s, x, y, tol))?;
            emit_json(
                &out,
                "eval",
                json!({
                    "field": f.name(),
                    "at": [x, y],
                    "u": s.value,
                    "grad": s.grad,
                    "hess": s.hess,
                    "D": fo.d,
                    "N": fo.n,
                    "Nperp": fo.nperp,
                    "theta": fo.theta,
                    "H": h,
                    "P": pmge_from_sample(&s, x, y),
                }),
            )
        }
        Cmd::Trace {
            field,
            at,
            orientation,
            length,
            tol,
            domain,
            out,
        } => {
            let f = build_field(&field)?;
            if orientation != 1.0 && orientation != -1.0 {
                return Err(Failure::usage("--orientation must be 1 or -1"));
            }
            let opts = TraceOptions {
                max_arclength: length,
                domain: domain.as_deref().map(parse_domain).transpose()?,
                ..TraceOptions::with_tolerance(tol)
            };
            let t = trace(f.as_ref(), parse_point(&at)?, orientation, &opts)?;
            match out.format {
                Format::Csv => emit(&out, &t.to_csv()),
                _ => emit_json(
                    &out,
                    "trace",
                    json!({ "field": f.name(), "arclength": t.arclength(), "trace": json!(t) }),
                ),
            }
        }
        Cmd::Singular { cmd } => singular(cmd),
        Cmd::Solve {
            field,
            boundary,
            domain,
            cells,
            eps,
            zero_start,
            out,
        } => {
            let schedule = match eps {
                Some(s) => s
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Failure::usage("--eps: expected comma-separated numbers"))?,
                None => default_schedule(),
            };
            let (prob, reference) = match boundary {
                Some(path) => (
                    DirichletProblem::read_boundary_csv(
                        BufReader::new(File::open(path)?),
                        schedule,
                    )?,
                    None,
                ),
                None => {
                    let f = build_field(&field)?;
                    let d = domain.ok_or_else(|| {
                        Failure::usage("--domain is required with a field boundary")
                    })?;
                    let v = parse_floats(&d, 4, "--domain")?;
                    let (w, h) = (v[2] - v[0], v[3] - v[1]);
                    if cells < 8 || !(w > 0.0) || (w - h).abs() > 1e-12 * w {
                        return Err(Failure::usage(
                            "solve needs a square --domain and --cells >= 8",
                        ));
                    }
                    let g = GridGeometry {
                        x0: v[0],
                        y0: v[1],
                        h: w / cells as f64,
                        nx: cells + 1,
                        ny: cells + 1,
                    };
                    (
                        DirichletProblem::from_field(g, f.as_ref(), schedule)?,
                        Some(f),
                    )
                }
            };
            let g = prob.geometry;
            let init = if zero_start {
                vec![0.0; g.nx * g.ny]
            } else {
                prob.coons_patch()
            };
            let sol = solve_from(&prob, init)?;
            match out.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    sol.grid.write_csv(&mut buf)?;
                    emit(&out, &String::from_utf8_lossy(&buf))
                }
                _ => {
                    let sup = match &reference {
                        Some(f) => {
                            let mut e = 0.0f64;
                            for j in 0..g.ny {
                                for i in 0..g.nx {
                                    let (x, y) = sol.grid.node(i, j);
                                    e = e.max((sol.grid.at(i, j) - f.eval(x, y)?.value).abs());
                                }
                            }
                            json!(e)
                        }
                        None => Value::Null,
                    };
                    emit_json(
                        &out,
                        "solve",
                        json!({
                            "grid": { "x0": g.x0, "y0": g.y0, "h": g.h, "nx": g.nx, "ny": g.ny },
                            "report": json!(sol.report),
                            "sup_error_vs_field": sup,
                        }),
                    )?;
                    sol.check().map_err(Failure::from)
                }
            }
        }
        Cmd::Surface {
            kind,
            n_tau,
            n_s,
            s_max,
            tau_max,
            out,
        } => {
            let r = match kind {
                SurfaceKind::UnitCircle => RuledSurface::unit_circle_example(s_max),
                SurfaceKind::Saddle => RuledSurface::saddle_example(tau_max, s_max),
                SurfaceKind::ContactPlane => {
                    RuledSurface::contact_plane_example(Point3::ORIGIN, s_max)
                }
            };
            let m = r.mesh(n_tau, n_s);
            match out.format {
                Format::Obj => emit(&out, &m.to_obj()),
                Format::Csv => emit(&out, &m.to_csv()),
                Format::Json => emit_json(&out, "surface", json!({ "mesh": json!(m) })),
            }
        }
        Cmd::Sphere { cmd } => sphere(cmd),
        Cmd::Verify { suite, seed, out } => {
            let reports = if suite == "all" {
                run_all(seed)
            } else {
                vec![run_suite(Suite::parse(&suite)?, seed)]
            };
            let pass = reports.iter().all(|r| r.pass);
            emit_json(
                &out,
                "verify",
                json!({ "seed": seed, "pass": pass, "suites": json!(reports) }),
            )
        }
    }
}

fn singular(cmd: SingularCmd) -> CliResult<()> {
    match cmd {
        SingularCmd::Scan {
            field,
            domain,
            resolution,
            tol,
            coarse_tol,
            no_index,
            out,
        } => {
            let f = build_field(&field)?;
            let opts = ScanOptions {
                resolution,
                tol,
                coarse_tol,
                with_index: !no_index,
            };
            let r = scan_singular(f.as_ref(), &parse_domain(&domain)?, &opts)?;
            emit_json(
                &out,
                "singular scan",
                json!({ "field": f.name(), "report": json!(r) }),
            )
        }
        SingularCmd::Classify {
            field,
            at,
            radius,
            polish,
            out,
        } => {
            let f = build_field(&field)?;
            let mut p = parse_point(&at)?;
            if polish {
                p = polish_onto_singular_set(f.as_ref(), p, 1e-12)?;
            }
            let c = classify(f.as_ref(), p, radius)?;
            emit_json(
                &out,
                "singular classify",
                json!({ "field": f.name(), "at": p, "classification": json!(c) }),
            )
        }
        SingularCmd::Index {
            field,
            at,
            radius,
            samples,
            out,
        } => {
            let f = build_field(&field)?;
            let p = parse_point(&at)?;
            let pol = IndexPolicy {
                initial_radius: radius,
                samples,
                ..IndexPolicy::default()
            };
            let k = index(f.as_ref(), p, pol)?;
            emit_json(
                &out,
                "singular index",
                json!({ "field": f.name(), "at": p, "index": k }),
            )
        }
    }
}

fn sphere(cmd: SphereCmd) -> CliResult<()> {
    match cmd {
        SphereCmd::TorusPmc { c, out } => emit_json(
            &out,
            "sphere torus-pmc",
            json!({ "c": c, "H": torus_pmc(c)? }),
        ),
        SphereCmd::GreatCircle {
            alpha,
            t,
            samples,
            out,
        } => {
            let a = parse_floats(&alpha, 4, "--alpha")?;
            let pair = GreatCirclePair::from_alpha([a[0], a[1], a[2], a[3]], t.cos(), t.sin())?;
            let c = great_circle(&pair, samples)?;
            match out.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    c.write_csv(&mut buf)?;
                    emit(&out, &String::from_utf8_lossy(&buf))
                }
                _ => emit_json(
                    &out,
                    "sphere great-circle",
                    json!({
                        "pair": json!(pair),
                        "max_norm_defect": c.max_norm_defect(),
                        "max_theta_defect": c.max_theta_defect(),
                        "curve": json!(c),
                    }),
                ),
            }
        }
        SphereCmd::Cayley {
            point,
            inverse,
            out,
        } => match (point, inverse) {
            (Some(p), None) => {
                let v = parse_floats(&p, 4, "--point")?;
                let q = cayley([v[0], v[1], v[2], v[3]])?;
                emit_json(
                    &out,
                    "sphere cayley",
                    json!({ "point": v, "image": json!(q), "lambda": conformal_lambda(q) }),
                )
            }
            (None, Some(q)) => {
                let v = parse_floats(&q, 3, "--inverse")?;
                let q = Point3::new(v[0], v[1], v[2]);
                emit_json(
                    &out,
                    "sphere cayley",
                    json!({ "image": json!(q), "point": cayley_inverse(q), "lambda": conformal_lambda(q) }),
                )
            }
            _ => Err(Failure::usage("give exactly one of --point or --inverse")),
        },
        SphereCmd::Audit { surface, out } => {
            let s = if surface.eq_ignore_ascii_case("clifford") {
                Surface::CliffordTorus
            } else {
                Surface::CoordinateSphere(Axis::parse(&surface)?)
            };
            let a = foliation_index_audit(s)?;
            emit_json(&out, "sphere audit", json!({ "audit": json!(a) }))
        }
        SphereCmd::TorusMesh { c, n, out } => {
            let m = torus_mesh(c, n, n)?;
            match out.format {
                Format::Obj => {
                    let mut buf = Vec::new();
                    m.write_obj(&mut buf)?;
                    emit(&out, &String::from_utf8_lossy(&buf))
                }
                _ => emit_json(
                    &out,
                    "sphere torus-mesh",
                    json!({ "c": c, "H": torus_pmc(c)?, "euler_characteristic": m.euler_characteristic(), "vertices": m.vertices, "faces": m.faces }),
                ),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pmin: {}", f.msg);
            if f.code == 2 {
                eprintln!("run `pmin --help` for usage");
            }
            ExitCode::from(f.code)
        }
    }
}
