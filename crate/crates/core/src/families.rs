//! Entire p-minimal graphs, Legendrian lines and ruled surfaces.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characteristic::{trace, TraceOptions};
use crate::curvature::{first_order_data, pmge_from_sample};
use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldSample, ScalarField2};
use crate::h1::{left_frame, theta0_eval, Point3, Vec3};

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A C² scalar function supplied with its first and second derivatives.
#[derive(Clone)]
pub struct GFunction {
    pub name: String,
    pub g: Arc<RealFn>,
    pub g1: Arc<RealFn>,
    pub g2: Arc<RealFn>,
}

impl std::fmt::Debug for GFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GFunction({})", self.name)
    }
}

impl GFunction {
    pub fn new<G, G1, G2>(name: impl Into<String>, g: G, g1: G1, g2: G2) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        G1: Fn(f64) -> f64 + Send + Sync + 'static,
        G2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        GFunction {
            name: name.into(),
            g: Arc::new(g),
            g1: Arc::new(g1),
            g2: Arc::new(g2),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, |_| 0.0, |_| 0.0)
    }

    pub fn sin() -> Self {
        Self::new("sin", f64::sin, f64::cos, |t| -t.sin())
    }

    pub fn square() -> Self {
        Self::new("square", |t| t * t, |t| 2.0 * t, |_| 2.0)
    }

    pub fn cube() -> Self {
        Self::new("cube", |t| t * t * t, |t| 3.0 * t * t, |t| 6.0 * t)
    }

    /// A·sin(ωt + φ) + B·t² + C·t.
    pub fn trig_quadratic(a: f64, w: f64, phi: f64, b: f64, c: f64) -> Self {
        Self::new(
            "trig_quadratic",
            move |t| a * (w * t + phi).sin() + b * t * t + c * t,
            move |t| a * w * (w * t + phi).cos() + 2.0 * b * t + c,
            move |t| -a * w * w * (w * t + phi).sin() + 2.0 * b,
        )
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "sin" => Ok(Self::sin()),
            "square" => Ok(Self::square()),
            "cube" => Ok(Self::cube()),
            _ => Err(Error::BadParams(format!(
                "unknown g {name:?} (zero, sin, square, cube)"
            ))),
        }
    }
}

/// u = ax + by + c; its only singular point is (−b, a).
pub fn make_plane(a: f64, b: f64, c: f64) -> AnalyticField {
    AnalyticField::entire(format!("plane({a},{b},{c})"), move |x, y| {
        FieldSample::new(a * x + b * y + c, [a, b], [[0.0; 2]; 2])
    })
}

/// u = −abx² + (a²−b²)xy + aby² + g(−bx + ay) with a² + b² = 1.
pub fn make_quadratic_family(
    a: f64,
    b: f64,
    g: GFunction,
    normalize: bool,
) -> Result<AnalyticField> {
    let norm = a.hypot(b);
    let (a, b) = if (norm * norm - 1.0).abs() <= 1e-12 {
        (a, b)
    } else if normalize && norm > 0.0 {
        (a / norm, b / norm)
    } else {
        return Err(Error::BadParams(format!(
            "a^2 + b^2 = {} must equal 1",
            norm * norm
        )));
    };
    let name = format!("quad({a},{b},{})", g.name);
    Ok(AnalyticField::entire(name, move |x, y| {
        let t = -b * x + a * y;
        let (gv, g1, g2) = ((g.g)(t), (g.g1)(t), (g.g2)(t));
        let k = a * a - b * b;
        FieldSample::new(
            -a * b * x * x + k * x * y + a * b * y * y + gv,
            [
                -2.0 * a * b * x + k * y - b * g1,
                k * x + 2.0 * a * b * y + a * g1,
            ],
            [
                [-2.0 * a * b + b * b * g2, k - a * b * g2],
                [k - a * b * g2, 2.0 * a * b + a * a * g2],
            ],
        )
    }))
}

/// s ↦ p0 + s·(c1·ê₁(p0) + c2·ê₂(p0)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegendrianLine {
    pub p0: Point3,
    pub c1: f64,
    pub c2: f64,
}

pub fn legendrian_line(p0: Point3, c1: f64, c2: f64) -> Result<LegendrianLine> {
    if ((c1 * c1 + c2 * c2) - 1.0).abs() > 1e-12 {
        return Err(Error::BadParams(format!(
            "c1^2 + c2^2 = {} must equal 1",
            c1 * c1 + c2 * c2
        )));
    }
    Ok(LegendrianLine { p0, c1, c2 })
}

impl LegendrianLine {
    pub fn direction(&self) -> Vec3 {
        let f = left_frame(self.p0);
        [
            self.c1 * f.e1hat[0] + self.c2 * f.e2hat[0],
            self.c1 * f.e1hat[1] + self.c2 * f.e2hat[1],
            self.c1 * f.e1hat[2] + self.c2 * f.e2hat[2],
        ]
    }

    pub fn point(&self, s: f64) -> Point3 {
        let d = self.direction();
        Point3::new(
            self.p0.x + s * d[0],
            self.p0.y + s * d[1],
            self.p0.z + s * d[2],
        )
    }
}

type CurveFn = dyn Fn(f64) -> Point3 + Send + Sync;

/// γ(τ) + s·[sin θ(τ)·ê₁(γ(τ)) − cos θ(τ)·ê₂(γ(τ))].
#[derive(Clone)]
pub struct RuledSurface {
    pub gamma: Arc<CurveFn>,
    pub theta_of_tau: Arc<RealFn>,
    pub tau_range: (f64, f64),
    pub s_range: (f64, f64),
}

impl std::fmt::Debug for RuledSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RuledSurface")
            .field("tau_range", &self.tau_range)
            .field("s_range", &self.s_range)
            .finish()
    }
}

/// Quad mesh with the (τ, s) parameters of each vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub params: Vec<[f64; 2]>,
    pub quads: Vec<[usize; 4]>,
}

impl RuledSurface {
    pub fn new<G, T>(
        gamma: G,
        theta_of_tau: T,
        tau_range: (f64, f64),
        s_range: (f64, f64),
    ) -> Result<Self>
    where
        G: Fn(f64) -> Point3 + Send + Sync + 'static,
        T: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(tau_range.0 < tau_range.1 && s_range.0 < s_range.1) {
            return Err(Error::BadParams(
                "ruled surface parameter ranges must be nonempty".into(),
            ));
        }
        Ok(RuledSurface {
            gamma: Arc::new(gamma),
            theta_of_tau: Arc::new(theta_of_tau),
            tau_range,
            s_range,
        })
    }

    /// The hyperboloid-like surface z² = x² + y² − 1 swept from the unit circle.
    pub fn unit_circle_example(s_max: f64) -> Self {
        Self::new(
            |t| Point3::new(t.cos(), t.sin(), 0.0),
            |t| t,
            (0.0, std::f64::consts::TAU),
            (-s_max, s_max),
        )
        .expect("valid ranges")
    }

    /// The saddle y = xz swept from the z-axis.
    pub fn saddle_example(tau_max: f64, s_max: f64) -> Self {
        Self::new(
            |t| Point3::new(0.0, 0.0, t),
            |t: f64| (1.0 / (1.0 + t * t).sqrt()).atan2(-t / (1.0 + t * t).sqrt()),
            (-tau_max, tau_max),
            (-s_max, s_max),
        )
        .expect("valid ranges")
    }

    /// All Legendrian lines through one point: the contact plane there.
    pub fn contact_plane_example(p: Point3, s_max: f64) -> Self {
        Self::new(
            move |_| p,
            |t| t,
            (0.0, std::f64::consts::PI),
            (-s_max, s_max),
        )
        .expect("valid ranges")
    }

    pub fn ruling(&self, tau: f64) -> Vec3 {
        let g = (self.gamma)(tau);
        let th = (self.theta_of_tau)(tau);
        let (s, c) = th.sin_cos();
        let f = left_frame(g);
        [
            s * f.e1hat[0] - c * f.e2hat[0],
            s * f.e1hat[1] - c * f.e2hat[1],
            s * f.e1hat[2] - c * f.e2hat[2],
        ]
    }

    pub fn point(&self, tau: f64, s: f64) -> Point3 {
        let g = (self.gamma)(tau);
        let r = self.ruling(tau);
        Point3::new(g.x + s * r[0], g.y + s * r[1], g.z + s * r[2])
    }

    /// Θ₀ of the ruling direction at the surface point (τ, s).
    pub fn ruling_contact_defect(&self, tau: f64, s: f64) -> f64 {
        theta0_eval(self.point(tau, s), self.ruling(tau))
    }

    pub fn mesh(&self, n_tau: usize, n_s: usize) -> Mesh {
        let (n_tau, n_s) = (n_tau.max(2), n_s.max(2));
        let mut vertices = Vec::with_capacity(n_tau * n_s);
        let mut params = Vec::with_capacity(n_tau * n_s);
        for i in 0..n_tau {
            let tau = self.tau_range.0
                + (self.tau_range.1 - self.tau_range.0) * i as f64 / (n_tau - 1) as f64;
            for j in 0..n_s {
                let s = self.s_range.0
                    + (self.s_range.1 - self.s_range.0) * j as f64 / (n_s - 1) as f64;
                vertices.push(self.point(tau, s).to_array());
                params.push([tau, s]);
            }
        }
        let mut quads = Vec::new();
        for i in 0..n_tau - 1 {
            for j in 0..n_s - 1 {
                let k = i * n_s + j;
                quads.push([k, k + n_s, k + n_s + 1, k + 1]);
            }
        }
        Mesh {
            vertices,
            params,
            quads,
        }
    }
}

impl Mesh {
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
        }
        for q in &self.quads {
            let _ = writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,s,x,y,z\n");
        for (p, v) in self.params.iter().zip(&self.vertices) {
            let _ = writeln!(out, "{},{},{},{},{}", p[0], p[1], v[0], v[1], v[2]);
        }
        out
    }

    /// V − E + F of the quad mesh with vertices identified when they coincide to `tol`.
    pub fn euler_characteristic(&self, tol: f64) -> i64 {
        let mut canon: Vec<usize> = Vec::with_capacity(self.vertices.len());
        let mut reps: Vec<usize> = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let found = reps.iter().copied().find(|&r| {
                let w = self.vertices[r];
                (v[0] - w[0]).abs() < tol && (v[1] - w[1]).abs() < tol && (v[2] - w[2]).abs() < tol
            });
            match found {
                Some(r) => canon.push(canon[r]),
                None => {
                    canon.push(reps.len());
                    reps.push(i);
                }
            }
        }
        let mut edges = std::collections::BTreeSet::new();
        let mut faces = 0i64;
        for q in &self.quads {
            let c: Vec<usize> = q.iter().map(|&k| canon[k]).collect();
            let distinct: std::collections::BTreeSet<usize> = c.iter().copied().collect();
            if distinct.len() < 3 {
                continue;
            }
            faces += 1;
            for k in 0..4 {
                let (a, b) = (c[k], c[(k + 1) % 4]);
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
        reps.len() as i64 - edges.len() as i64 + faces
    }
}

/// r + 2sa + ta² with a = −(p − y)/(q + x).
pub fn monge_residual<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64, tol: f64) -> Result<f64> {
    let s = f.eval(x, y)?;
    let (pm, qm) = (s.grad[0] - y, s.grad[1] + x);
    if qm.abs() < tol {
        return Err(if pm.abs() < tol {
            Error::Singular { d: pm.hypot(qm) }
        } else {
            Error::VerticalRuling
        });
    }
    let a = -pm / qm;
    Ok(s.hess[0][0] + 2.0 * s.hess[0][1] * a + s.hess[1][1] * a * a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EntireStructure {
    /// All characteristic lines pass through one point.
    Concurrent {
        point: [f64; 2],
        spread: f64,
    },
    /// All characteristic lines are parallel.
    Parallel {
        direction: [f64; 2],
        spread: f64,
    },
    Unresolved {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EntireVerdict {
    ConsistentWithMinimal {
        max_relative_residual: f64,
        structure: EntireStructure,
    },
    NotMinimal {
        witness: [f64; 2],
        residual: f64,
    },
}

/// Samples P(u) over the boxes [−L, L]², L ∈ {1, 2, 4, 8, 16}, then probes the line structure.
pub fn classify_entire<F: ScalarField2 + ?Sized>(
    f: &F,
    per_box: usize,
    seed: u64,
) -> Result<EntireVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for &l in &[1.0, 2.0, 4.0, 8.0, 16.0] {
        for _ in 0..per_box {
            let (x, y) = (rng.random_range(-l..l), rng.random_range(-l..l));
            let s = f.eval(x, y)?;
            let p = pmge_from_sample(&s, x, y);
            let [a, b] = s.contact_map(x, y);
            let hmax = s.hess.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = 1.0 + (a * a + b * b) * hmax;
            let rel = p.abs() / scale;
            if rel > 1e-9 {
                return Ok(EntireVerdict::NotMinimal {
                    witness: [x, y],
                    residual: p,
                });
            }
            worst = worst.max(rel);
        }
    }
    let structure = line_structure(f, 20, &mut rng)?;
    Ok(EntireVerdict::ConsistentWithMinimal {
        max_relative_residual: worst,
        structure,
    })
}

fn line_structure<F: ScalarField2 + ?Sized>(
    f: &F,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<EntireStructure> {
    let mut lines: Vec<([f64; 2], [f64; 2])> = Vec::new();
    let opts = TraceOptions {
        max_arclength: 0.5,
        ..TraceOptions::default()
    };
    let mut attempts = 0;
    while lines.len() < count && attempts < 50 * count {
        attempts += 1;
        let p = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        if first_order_data(f, p[0], p[1], None)
            .map(|d| d.d < 1e-3)
            .unwrap_or(true)
        {
            continue;
        }
        let Ok(t) = trace(f, p, 1.0, &opts) else {
            continue;
        };
        let (Some(a), Some(b)) = (t.samples.first(), t.samples.last()) else {
            continue;
        };
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = dx.hypot(dy);
        if t.samples.len() < 3 || len < 0.1 {
            continue;
        }
        lines.push(([a.x, a.y], [dx / len, dy / len]));
    }
    if lines.len() < 3 {
        return Ok(EntireStructure::Unresolved {
            reason: "too few nonsingular traces".into(),
        });
    }
    let d0 = lines[0].1;
    let spread = lines
        .iter()
        .map(|(_, d)| (d0[0] * d[1] - d0[1] * d[0]).abs())
        .fold(0.0f64, f64::max);
    if spread < 1e-8 {
        return Ok(EntireStructure::Parallel {
            direction: d0,
            spread,
        });
    }
    // least-squares common point of all lines
    let (mut m00, mut m01, mut m11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (p, d) in &lines {
        let n = [-d[1], d[0]];
        let c = n[0] * p[0] + n[1] * p[1];
        m00 += n[0] * n[0];
        m01 += n[0] * n[1];
        m11 += n[1] * n[1];
        r0 += n[0] * c;
        r1 += n[1] * c;
    }
    let det = m00 * m11 - m01 * m01;
    if det.abs() < 1e-12 {
        return Ok(EntireStructure::Unresolved {
            reason: "lines nearly parallel but not exactly".into(),
        });
    }
    let q = [(m11 * r0 - m01 * r1) / det, (m00 * r1 - m01 * r0) / det];
    let miss = lines
        .iter()
        .map(|(p, d)| ((q[0] - p[0]) * d[1] - (q[1] - p[1]) * d[0]).abs())
        .fold(0.0f64, f64::max);
    if miss < 1e-6 {
        Ok(EntireStructure::Concurrent {
            point: q,
            spread: miss,
        })
    } else {
        Ok(EntireStructure::Unresolved {
            reason: format!("lines neither parallel nor concurrent (miss {miss:e})"),
        })
    }
}
