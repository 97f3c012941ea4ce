//! The standard pseudohermitian 3-sphere: frames, Legendrian great circles, the Cayley transform,
//! the Σ_c tori and the index audit of closed p-minimal surfaces.

use std::collections::HashSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::io::Write;

use nalgebra::Complex;
use serde::Serialize;

use crate::curvature::{first_order_data, p_mean_curvature};
use crate::error::{Error, Result};
use crate::field::{AnalyticField, FieldSample, ScalarField2};
use crate::h1::{theta0_eval, Point3};
use crate::singular::{index, IndexPolicy};
use crate::variation::Ambient;

pub type Vec4 = [f64; 4];
type C = Complex<f64>;

/// Webster curvature 2 and vanishing torsion.
pub const S3: Ambient = Ambient {
    w: 2.0,
    im_a11: 0.0,
};

fn dot(a: Vec4, b: Vec4) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn norm(a: Vec4) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(s: f64, a: Vec4, b: Vec4) -> Vec4 {
    [
        s * a[0] + b[0],
        s * a[1] + b[1],
        s * a[2] + b[2],
        s * a[3] + b[3],
    ]
}

fn scale(s: f64, a: Vec4) -> Vec4 {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

/// A point (x¹, y¹, x², y²) of the unit sphere in C².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct S3Point(pub Vec4);

impl S3Point {
    pub fn new(c: Vec4) -> Result<Self> {
        let n = norm(c);
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::NotOnSphere { norm: n });
        }
        Ok(S3Point(c))
    }

    pub fn normalized(c: Vec4) -> Result<Self> {
        let n = norm(c);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotOnSphere { norm: n });
        }
        Ok(S3Point(scale(1.0 / n, c)))
    }

    pub fn from_zeta(z1: C, z2: C) -> Result<Self> {
        Self::new([z1.re, z1.im, z2.re, z2.im])
    }

    pub fn zeta(self) -> (C, C) {
        let c = self.0;
        (C::new(c[0], c[1]), C::new(c[2], c[3]))
    }
}

fn check_unit(p: Vec4) -> Result<()> {
    S3Point::new(p).map(|_| ())
}

/// Θ̂ = x¹dy¹ − y¹dx¹ + x²dy² − y²dx² at `p` applied to `v`.
pub fn theta_hat(p: Vec4, v: Vec4) -> f64 {
    p[0] * v[1] - p[1] * v[0] + p[2] * v[3] - p[3] * v[2]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameHat {
    pub e1: Vec4,
    pub e2: Vec4,
    pub t: Vec4,
}

fn frame_unchecked(p: Vec4) -> FrameHat {
    let [x1, y1, x2, y2] = p;
    FrameHat {
        e1: [x2, -y2, -x1, y1],
        e2: [y2, x2, -y1, -x1],
        t: [-y1, x1, -y2, x2],
    }
}

pub fn frame_hat(p: Vec4) -> Result<FrameHat> {
    check_unit(p)?;
    Ok(frame_unchecked(p))
}

/// β⃗ = c₁ê₁(α⃗) + c₂ê₂(α⃗).
pub fn beta_from_alpha(alpha: Vec4, c1: f64, c2: f64) -> Result<Vec4> {
    if !((norm(alpha) - 1.0).abs() <= 1e-12) {
        return Err(Error::BadParams(format!(
            "|alpha| = {} is not 1",
            norm(alpha)
        )));
    }
    if !((c1 * c1 + c2 * c2 - 1.0).abs() <= 1e-12) {
        return Err(Error::BadParams(format!(
            "c1² + c2² = {} is not 1",
            c1 * c1 + c2 * c2
        )));
    }
    let [a1, a2, a3, a4] = alpha;
    Ok([
        a3 * c1 + a4 * c2,
        a3 * c2 - a4 * c1,
        -a1 * c1 - a2 * c2,
        -a1 * c2 + a2 * c1,
    ])
}

/// α⃗₁⊥·β⃗₁ + α⃗₂⊥·β⃗₂ with (e, f)⊥ = (−f, e).
pub fn legendrian_defect(alpha: Vec4, beta: Vec4) -> f64 {
    -alpha[1] * beta[0] + alpha[0] * beta[1] - alpha[3] * beta[2] + alpha[2] * beta[3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreatCirclePair {
    pub alpha: Vec4,
    pub beta: Vec4,
    pub c1: f64,
    pub c2: f64,
}

impl GreatCirclePair {
    pub fn from_alpha(alpha: Vec4, c1: f64, c2: f64) -> Result<Self> {
        let beta = beta_from_alpha(alpha, c1, c2)?;
        Ok(GreatCirclePair {
            alpha,
            beta,
            c1,
            c2,
        })
    }

    /// Pair through `alpha` with initial direction `beta`; the direction constants are read off the frame.
    pub fn from_vectors(alpha: Vec4, beta: Vec4) -> Result<Self> {
        let f = frame_hat(alpha)?;
        let pair = GreatCirclePair {
            alpha,
            beta,
            c1: dot(beta, f.e1),
            c2: dot(beta, f.e2),
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let defect = [
            norm(self.alpha) - 1.0,
            norm(self.beta) - 1.0,
            dot(self.alpha, self.beta),
            legendrian_defect(self.alpha, self.beta),
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
        if !(defect <= 1e-10) {
            return Err(Error::InvalidPair { defect });
        }
        Ok(())
    }

    pub fn point(&self, s: f64) -> Vec4 {
        axpy(s.cos(), self.alpha, scale(s.sin(), self.beta))
    }

    pub fn tangent(&self, s: f64) -> Vec4 {
        axpy(-s.sin(), self.alpha, scale(s.cos(), self.beta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct S3Curve {
    pub s: Vec<f64>,
    pub points: Vec<Vec4>,
    pub tangents: Vec<Vec4>,
}

impl S3Curve {
    pub fn max_norm_defect(&self) -> f64 {
        self.points
            .iter()
            .fold(0.0, |m, p| m.max((norm(*p) - 1.0).abs()))
    }

    pub fn max_theta_defect(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.tangents)
            .fold(0.0, |m, (p, v)| m.max(theta_hat(*p, *v).abs()))
    }

    /// CSV rows `s,x1,y1,x2,y2`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s,x1,y1,x2,y2")?;
        for (s, p) in self.s.iter().zip(&self.points) {
            writeln!(
                w,
                "{s:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                p[0], p[1], p[2], p[3]
            )?;
        }
        Ok(())
    }
}

/// γ(s) = cos s·α⃗ + sin s·β⃗ at `samples + 1` equally spaced s in [0, 2π].
pub fn great_circle(pair: &GreatCirclePair, samples: usize) -> Result<S3Curve> {
    pair.validate()?;
    if samples == 0 {
        return Err(Error::BadParams("samples must be positive".into()));
    }
    let s: Vec<f64> = (0..=samples)
        .map(|i| TAU * i as f64 / samples as f64)
        .collect();
    let points = s.iter().map(|&t| pair.point(t)).collect();
    let tangents = s.iter().map(|&t| pair.tangent(t)).collect();
    Ok(S3Curve {
        s,
        points,
        tangents,
    })
}

/// The Cayley formula on C² minus {ζ² = −1}; no sphere check.
pub fn cayley_ambient(p: Vec4) -> Result<Point3> {
    let (z1, z2) = (C::new(p[0], p[1]), C::new(p[2], p[3]));
    let den = C::new(1.0, 0.0) + z2;
    if den.norm() < 1e-14 {
        return Err(Error::AtPole);
    }
    let w = z1 / den;
    let z = 0.5 * (C::i() * (C::new(1.0, 0.0) - z2) / den).re;
    Ok(Point3::new(w.re, w.im, z))
}

pub fn cayley(p: Vec4) -> Result<Point3> {
    check_unit(p)?;
    cayley_ambient(p)
}

/// F⁻¹(x, y, z) = (2w, 1 − τ)/(1 + τ) with w = x + iy and τ = |w|² − 2iz.
pub fn cayley_inverse(q: Point3) -> Vec4 {
    let w = C::new(q.x, q.y);
    let tau = C::new(w.norm_sqr(), -2.0 * q.z);
    let den = C::new(1.0, 0.0) + tau;
    let z1 = 2.0 * w / den;
    let z2 = (C::new(1.0, 0.0) - tau) / den;
    [z1.re, z1.im, z2.re, z2.im]
}

/// λ = 2[4z² + (x² + y² + 1)²]^{−1/2}, so that Θ̂ = F*(λ²Θ₀).
pub fn conformal_lambda(q: Point3) -> f64 {
    let r = q.x * q.x + q.y * q.y + 1.0;
    2.0 / (4.0 * q.z * q.z + r * r).sqrt()
}

/// H̃ = λ^{−2}(λH − 3e₂(λ)) for the contact form λ²Θ.
pub fn pmc_transform(h: f64, lambda: f64, e2_lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::BadParams(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    Ok((lambda * h - 3.0 * e2_lambda) / (lambda * lambda))
}

/// Θ̂(v) − λ²(F(p))·Θ₀(dF(v)) with v projected onto T_pS³ and dF by central differences of step `h`.
pub fn pullback_gap(p: Vec4, v: Vec4, h: f64) -> Result<f64> {
    check_unit(p)?;
    let vt = axpy(-dot(v, p), p, v);
    let fp = cayley_ambient(p)?;
    let a = cayley_ambient(axpy(h, vt, p))?;
    let b = cayley_ambient(axpy(-h, vt, p))?;
    let df = [
        (a.x - b.x) / (2.0 * h),
        (a.y - b.y) / (2.0 * h),
        (a.z - b.z) / (2.0 * h),
    ];
    let lam = conformal_lambda(fp);
    Ok(theta_hat(p, vt) - lam * lam * theta0_eval(fp, df))
}

/// p-mean curvature ρ₂/ρ₁ − ρ₁/ρ₂ of Σ_c = {ρ₁ = c}.
pub fn torus_pmc(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::BadParams(format!(
            "torus radius must lie in (0, 1), got {c}"
        )));
    }
    let r2 = (1.0 - c * c).sqrt();
    Ok(r2 / c - c / r2)
}

/// Zero of `torus_pmc` on (0, 1) by bisection.
pub fn torus_pmc_root(tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-3);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if torus_pmc(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn torus_point(c: f64, phi1: f64, phi2: f64) -> Vec4 {
    let r2 = (1.0 - c * c).sqrt();
    [
        c * phi1.cos(),
        c * phi1.sin(),
        r2 * phi2.cos(),
        r2 * phi2.sin(),
    ]
}

/// The second-variation bracket −2W + 2 Im A₁₁ − 4e₁(α) − 4α².
pub fn variation_bracket(ambient: Ambient, e1_alpha: f64, alpha: f64) -> f64 {
    -2.0 * ambient.w + 2.0 * ambient.im_a11 - 4.0 * e1_alpha - 4.0 * alpha * alpha
}

/// Second variation of the Clifford torus along a constant test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CliffordInstability {
    pub bracket: f64,
    pub p_area: f64,
    pub constant_variation: f64,
}

pub fn clifford_instability() -> CliffordInstability {
    let bracket = variation_bracket(S3, 0.0, 0.0);
    let c = FRAC_1_SQRT_2;
    let p_area = 4.0 * PI * PI * c * (1.0 - c * c).sqrt();
    CliffordInstability {
        bracket,
        p_area,
        constant_variation: bracket * p_area,
    }
}

/// A 2×2 unitary matrix acting on C².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub [[C; 2]; 2]);

impl Unitary2 {
    pub fn identity() -> Self {
        let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        Unitary2([[o, z], [z, o]])
    }

    /// The matrix [[b, −a], [ā, b̄]] sending (a, b) to (0, 1).
    fn to_north(p: Vec4) -> Self {
        let (a, b) = (C::new(p[0], p[1]), C::new(p[2], p[3]));
        Unitary2([[b, -a], [a.conj(), b.conj()]])
    }

    /// A unitary map sending `p` to `q`.
    pub fn mapping(p: Vec4, q: Vec4) -> Result<Self> {
        check_unit(p)?;
        check_unit(q)?;
        Ok(Self::to_north(q).adjoint().compose(&Self::to_north(p)))
    }

    pub fn adjoint(&self) -> Self {
        let m = self.0;
        Unitary2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (self.0, other.0);
        let mut m = [[C::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Unitary2(m)
    }

    pub fn apply(&self, p: Vec4) -> Vec4 {
        let (z1, z2) = (C::new(p[0], p[1]), C::new(p[2], p[3]));
        let m = self.0;
        let w1 = m[0][0] * z1 + m[0][1] * z2;
        let w2 = m[1][0] * z1 + m[1][1] * z2;
        [w1.re, w1.im, w2.re, w2.im]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Axis {
    X1,
    Y1,
    X2,
    Y2,
}

impl Axis {
    pub fn slot(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::Y1 => 1,
            Axis::X2 => 2,
            Axis::Y2 => 3,
        }
    }

    pub fn unit(self) -> Vec4 {
        let mut e = [0.0; 4];
        e[self.slot()] = 1.0;
        e
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x1" => Ok(Axis::X1),
            "y1" => Ok(Axis::Y1),
            "x2" => Ok(Axis::X2),
            "y2" => Ok(Axis::Y2),
            _ => Err(Error::Parse(format!("unknown axis {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Surface {
    CoordinateSphere(Axis),
    CliffordTorus,
}

/// Singular points ±J e_k of the coordinate sphere {coordinate k = 0}.
pub fn coordinate_sphere_singular_points(axis: Axis) -> [Vec4; 2] {
    let t = frame_unchecked(axis.unit()).t;
    [scale(-1.0, t), t]
}

/// Cayley image of `U(Σ)` for a coordinate sphere Σ, as a graph z = u(x, y) near a point of the image.
#[derive(Debug, Clone, Copy)]
pub struct CayleyGraphPatch {
    pub axis: Axis,
    pub rotation: Unitary2,
    pub z_seed: f64,
}

impl CayleyGraphPatch {
    fn constraint(&self, x: f64, y: f64, z: f64) -> f64 {
        let p = self
            .rotation
            .adjoint()
            .apply(cayley_inverse(Point3::new(x, y, z)));
        p[self.axis.slot()]
    }

    fn height(&self, x: f64, y: f64) -> Result<f64> {
        let mut z = self.z_seed;
        let h = 1e-6;
        for _ in 0..60 {
            let f = self.constraint(x, y, z);
            let fz = (self.constraint(x, y, z + h) - self.constraint(x, y, z - h)) / (2.0 * h);
            if !(fz.abs() > 1e-12) {
                return Err(Error::OutOfDomain { x, y });
            }
            let dz = f / fz;
            z -= dz;
            if dz.abs() <= 1e-15 * (1.0 + z.abs()) {
                return Ok(z);
            }
        }
        Err(Error::OutOfDomain { x, y })
    }
}

impl ScalarField2 for CayleyGraphPatch {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        let u = |x: f64, y: f64| self.height(x, y);
        let h = 1e-5;
        let u0 = u(x, y)?;
        let (upx, umx, upy, umy) = (u(x + h, y)?, u(x - h, y)?, u(x, y + h)?, u(x, y - h)?);
        let uxy = (u(x + h, y + h)? - u(x + h, y - h)? - u(x - h, y + h)? + u(x - h, y - h)?)
            / (4.0 * h * h);
        Ok(FieldSample::new(
            u0,
            [(upx - umx) / (2.0 * h), (upy - umy) / (2.0 * h)],
            [
                [(upx - 2.0 * u0 + umx) / (h * h), uxy],
                [uxy, (upy - 2.0 * u0 + umy) / (h * h)],
            ],
        ))
    }

    fn name(&self) -> String {
        format!("cayley-patch({:?})", self.axis)
    }
}

/// Triangulated surface in S³.
#[derive(Debug, Clone, PartialEq)]
pub struct S3Mesh {
    pub vertices: Vec<Vec4>,
    pub faces: Vec<[usize; 3]>,
}

impl S3Mesh {
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Wavefront OBJ of the Cayley image in H₁.
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            let q = cayley(*v)?;
            writeln!(w, "v {:.12e} {:.12e} {:.12e}", q.x, q.y, q.z)?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}

/// Latitude–longitude mesh of a coordinate sphere with its poles at the singular points.
pub fn coordinate_sphere_mesh(axis: Axis, lat: usize, lon: usize) -> Result<S3Mesh> {
    if lat < 2 || lon < 3 {
        return Err(Error::BadParams(
            "sphere mesh needs lat >= 2 and lon >= 3".into(),
        ));
    }
    let [south, north] = coordinate_sphere_singular_points(axis);
    let f = frame_unchecked(north);
    let mut vertices = vec![north];
    for i in 1..lat {
        let t = PI * i as f64 / lat as f64;
        for j in 0..lon {
            let a = TAU * j as f64 / lon as f64;
            let eq = axpy(a.cos(), f.e1, scale(a.sin(), f.e2));
            vertices.push(axpy(t.cos(), north, scale(t.sin(), eq)));
        }
    }
    vertices.push(south);
    let s = vertices.len() - 1;
    let ring = |i: usize, j: usize| 1 + (i - 1) * lon + j % lon;
    let mut faces = Vec::new();
    for j in 0..lon {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
        faces.push([s, ring(lat - 1, j + 1), ring(lat - 1, j)]);
    }
    for i in 1..lat - 1 {
        for j in 0..lon {
            faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            faces.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    Ok(S3Mesh { vertices, faces })
}

/// Periodic (φ₁, φ₂) mesh of Σ_c.
pub fn torus_mesh(c: f64, n1: usize, n2: usize) -> Result<S3Mesh> {
    torus_pmc(c)?;
    if n1 < 3 || n2 < 3 {
        return Err(Error::BadParams(
            "torus mesh needs at least 3 samples per angle".into(),
        ));
    }
    let id = |i: usize, j: usize| (i % n1) * n2 + j % n2;
    let mut vertices = Vec::with_capacity(n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            vertices.push(torus_point(
                c,
                TAU * i as f64 / n1 as f64,
                TAU * j as f64 / n2 as f64,
            ));
        }
    }
    let mut faces = Vec::with_capacity(2 * n1 * n2);
    for i in 0..n1 {
        for j in 0..n2 {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Ok(S3Mesh { vertices, faces })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoliationAudit {
    pub surface: Surface,
    pub singular_points: Vec<Vec4>,
    pub indices: Vec<i32>,
    pub index_sum: i64,
    pub mesh_euler: i64,
    /// Largest |Θ̂(γ̇)|, ||γ| − 1| or distance from the surface over sampled leaves.
    pub leaf_defect: f64,
    /// Smallest length of the tangential part of T̂ (Clifford torus only).
    pub min_reeb_tangency: Option<f64>,
    pub consistent: bool,
}

/// Generic target for the Cayley patches, away from the pole and from the origin of H₁.
const PATCH_TARGET: Vec4 = [0.36, -0.48, 0.64, 0.48];

fn sphere_index(axis: Axis, p: Vec4) -> Result<i32> {
    let q = S3Point::normalized(PATCH_TARGET)?.0;
    let rotation = Unitary2::mapping(p, q)?;
    let c = cayley(q)?;
    let patch = CayleyGraphPatch {
        axis,
        rotation,
        z_seed: c.z,
    };
    let policy = IndexPolicy {
        initial_radius: 0.05,
        samples: 720,
        shrink: 0.5,
        max_shrinks: 8,
    };
    index(&patch, [c.x, c.y], policy)
}

pub fn foliation_index_audit(surface: Surface) -> Result<FoliationAudit> {
    match surface {
        Surface::CoordinateSphere(axis) => {
            let pts = coordinate_sphere_singular_points(axis);
            let indices = pts
                .iter()
                .map(|p| sphere_index(axis, *p))
                .collect::<Result<Vec<_>>>()?;
            let mut leaf_defect = 0.0f64;
            for k in 0..12 {
                let t = TAU * k as f64 / 12.0;
                let pair = GreatCirclePair::from_alpha(pts[1], t.cos(), t.sin())?;
                let curve = great_circle(&pair, 64)?;
                let off = curve
                    .points
                    .iter()
                    .fold(0.0f64, |m, p| m.max(p[axis.slot()].abs()));
                leaf_defect = leaf_defect
                    .max(curve.max_theta_defect())
                    .max(curve.max_norm_defect())
                    .max(off);
            }
            let index_sum = indices.iter().map(|&i| i as i64).sum();
            let mesh_euler = coordinate_sphere_mesh(axis, 16, 32)?.euler_characteristic();
            Ok(FoliationAudit {
                surface,
                singular_points: pts.to_vec(),
                indices,
                index_sum,
                mesh_euler,
                leaf_defect,
                min_reeb_tangency: None,
                consistent: index_sum == mesh_euler && leaf_defect < 1e-10,
            })
        }
        Surface::CliffordTorus => {
            let c = FRAC_1_SQRT_2;
            let n = 48;
            let mut min_tan = f64::INFINITY;
            let mut leaf_defect = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
                    let p = torus_point(c, a, b);
                    let t = frame_unchecked(p).t;
                    let d1 = [-c * a.sin(), c * a.cos(), 0.0, 0.0];
                    let d2 = [0.0, 0.0, -c * b.sin(), c * b.cos()];
                    let tan = (dot(t, d1).powi(2) / dot(d1, d1) + dot(t, d2).powi(2) / dot(d2, d2))
                        .sqrt();
                    min_tan = min_tan.min(tan);
                    if j == 0 {
                        let beta = [-p[1], p[0], p[3], -p[2]];
                        let curve = great_circle(&GreatCirclePair::from_vectors(p, beta)?, 64)?;
                        let off = curve
                            .points
                            .iter()
                            .fold(0.0f64, |m, q| m.max((q[0].hypot(q[1]) - c).abs()));
                        leaf_defect = leaf_defect
                            .max(curve.max_theta_defect())
                            .max(curve.max_norm_defect())
                            .max(off);
                    }
                }
            }
            let mesh_euler = torus_mesh(c, 24, 24)?.euler_characteristic();
            Ok(FoliationAudit {
                surface,
                singular_points: Vec::new(),
                indices: Vec::new(),
                index_sum: 0,
                mesh_euler,
                leaf_defect,
                min_reeb_tangency: Some(min_tan),
                consistent: mesh_euler == 0 && (min_tan - 1.0).abs() < 1e-12 && leaf_defect < 1e-10,
            })
        }
    }
}

/// The Cayley image of {x¹ = 0}: z = x(1 + x² + y²)/(2y) for y ≠ 0.
pub fn x1_sphere_patch() -> AnalyticField {
    AnalyticField::new("x1-sphere", |x, y| {
        if y == 0.0 {
            return Err(Error::OutOfDomain { x, y });
        }
        let q = x + x * x * x;
        Ok(FieldSample::new(
            q / (2.0 * y) + 0.5 * x * y,
            [
                (1.0 + 3.0 * x * x) / (2.0 * y) + 0.5 * y,
                -q / (2.0 * y * y) + 0.5 * x,
            ],
            [
                [3.0 * x / y, 0.5 - (1.0 + 3.0 * x * x) / (2.0 * y * y)],
                [0.5 - (1.0 + 3.0 * x * x) / (2.0 * y * y), q / (y * y * y)],
            ],
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoRoutePmc {
    pub x: f64,
    pub y: f64,
    /// H of the graph in H₁ from its jet.
    pub direct: f64,
    /// 3λ^{−1}e₂(λ), forced by Ĥ = 0 and the transformation law.
    pub from_sphere: f64,
    /// H̃ recomputed from `direct`, which should vanish.
    pub transformed: f64,
    pub gap: f64,
}

/// Compares the two routes to H on the Cayley image of {x¹ = 0}; e₂(λ) by central differences of step `h`.
pub fn two_route_pmc(x: f64, y: f64, h: f64) -> Result<TwoRoutePmc> {
    let f = x1_sphere_patch();
    let direct = p_mean_curvature(&f, x, y)?;
    let n = first_order_data(&f, x, y, None)?.n;
    let z = f.eval(x, y)?.value;
    let lam = |dx: f64, dy: f64, dz: f64| conformal_lambda(Point3::new(x + dx, y + dy, z + dz));
    let lx = (lam(h, 0.0, 0.0) - lam(-h, 0.0, 0.0)) / (2.0 * h);
    let ly = (lam(0.0, h, 0.0) - lam(0.0, -h, 0.0)) / (2.0 * h);
    let lz = (lam(0.0, 0.0, h) - lam(0.0, 0.0, -h)) / (2.0 * h);
    let e1l = lx + y * lz;
    let e2l = ly - x * lz;
    let e2_lambda = -(n[0] * e1l + n[1] * e2l);
    let l0 = lam(0.0, 0.0, 0.0);
    let from_sphere = 3.0 * e2_lambda / l0;
    let transformed = pmc_transform(direct, l0, e2_lambda)?;
    Ok(TwoRoutePmc {
        x,
        y,
        direct,
        from_sphere,
        transformed,
        gap: (direct - from_sphere).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn unit4() -> impl Strategy<Value = Vec4> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("nonzero", |v| norm([v.0, v.1, v.2, v.3]) > 0.1)
            .prop_map(|v| S3Point::normalized([v.0, v.1, v.2, v.3]).unwrap().0)
    }

    #[test]
    fn frame_examples() {
        let f = frame_hat([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.e1, [0.0, 0.0, -1.0, 0.0]);
        assert_eq!(f.e2, [0.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            frame_hat([1.0, 1.0, 0.0, 0.0]),
            Err(Error::NotOnSphere { .. })
        ));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(
            beta_from_alpha([1.0, 0.0, 0.0, 0.0], 1.0, 0.0).unwrap(),
            [0.0, 0.0, -1.0, 0.0]
        );
        for t in [0.0f64, 0.4, 2.0, -1.3] {
            let b = beta_from_alpha([0.0, 0.0, 1.0, 0.0], t.cos(), t.sin()).unwrap();
            assert!(close(b[0], t.cos(), 1e-15) && close(b[1], t.sin(), 1e-15));
            assert_eq!((b[2], b[3]), (0.0, 0.0));
        }
        assert!(matches!(
            beta_from_alpha([1.0, 0.0, 0.0, 0.0], 1.0, 1.0),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn great_circle_examples() {
        let pair = GreatCirclePair::from_alpha([0.0, 0.0, 1.0, 0.0], 1.0, 0.0).unwrap();
        let c = great_circle(&pair, 256).unwrap();
        assert!(c.points.iter().all(|p| p[3] == 0.0));
        assert!(c.max_norm_defect() < 1e-12 && c.max_theta_defect() < 1e-10);
        let q = pair.point(PI / 2.0);
        assert!((0..4).all(|i| close(q[i], pair.beta[i], 1e-15)));
        let (a, b) = (c.points[0], c.points[256]);
        assert!((0..4).all(|i| close(a[i], b[i], 1e-15)));
        let bad = GreatCirclePair {
            alpha: [1.0, 0.0, 0.0, 0.0],
            beta: [0.0, 1.0, 0.0, 0.0],
            c1: 0.0,
            c2: 0.0,
        };
        assert!(matches!(
            great_circle(&bad, 8),
            Err(Error::InvalidPair { .. })
        ));
    }

    #[test]
    fn great_circle_csv() {
        let pair = GreatCirclePair::from_alpha([0.0, 0.0, 1.0, 0.0], 1.0, 0.0).unwrap();
        let mut buf = Vec::new();
        great_circle(&pair, 4).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("s,x1,y1,x2,y2\n"));
    }

    #[test]
    fn circles_meet_only_at_antipodes() {
        let a = GreatCirclePair::from_alpha([0.0, 0.0, 1.0, 0.0], 1.0, 0.0).unwrap();
        let b = GreatCirclePair::from_alpha([0.0, 0.0, 1.0, 0.0], 0.6, 0.8).unwrap();
        let cb = great_circle(&b, 2000).unwrap();
        for i in 1..200 {
            let s = PI * i as f64 / 200.0;
            if s.sin().abs() < 0.05 {
                continue;
            }
            let p = a.point(s);
            let d = cb
                .points
                .iter()
                .map(|q| norm(axpy(-1.0, *q, p)))
                .fold(f64::INFINITY, f64::min);
            assert!(d > 0.01, "s = {s}, d = {d}");
        }
    }

    #[test]
    fn cayley_examples() {
        let q = cayley([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(q.x, 1.0, 1e-15) && close(q.y, 0.0, 1e-15) && close(q.z, 0.0, 1e-15));
        let q = cayley([0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(q.x, 0.0, 1e-15) && close(q.y, 0.0, 1e-15) && close(q.z, 0.5, 1e-15));
        assert_eq!(cayley([0.0, 0.0, 1.0, 0.0]).unwrap(), Point3::ORIGIN);
        assert!(matches!(cayley([0.0, 0.0, -1.0, 0.0]), Err(Error::AtPole)));
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(conformal_lambda(Point3::ORIGIN), 2.0);
        assert_eq!(conformal_lambda(Point3::new(1.0, 0.0, 0.0)), 1.0);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let t = 0.5 * k as f64;
            let l = conformal_lambda(Point3::new(0.3 * t, -0.2 * t, 0.7 * t));
            assert!(l < prev || k == 0);
            prev = l;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn pmc_transform_examples() {
        assert!(close(pmc_transform(1.5, 3.0, 0.0).unwrap(), 0.5, 1e-15));
        assert_eq!(pmc_transform(0.0, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            pmc_transform(1.0, 0.0, 0.0),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn two_routes_agree_on_x1_sphere() {
        for (x, y) in [
            (0.3, 0.5),
            (-0.7, 1.4),
            (0.2, -0.6),
            (1.1, 0.3),
            (-0.4, -2.0),
        ] {
            let r = two_route_pmc(x, y, 1e-5).unwrap();
            assert!(r.gap < 1e-4, "{r:?}");
            assert!(r.transformed.abs() < 1e-4, "{r:?}");
            assert!(r.direct.abs() > 0.1);
        }
    }

    #[test]
    fn torus_examples() {
        assert!(torus_pmc(FRAC_1_SQRT_2).unwrap().abs() < 1e-15);
        assert!(close(torus_pmc(0.6).unwrap(), 7.0 / 12.0, 1e-15));
        assert!(matches!(torus_pmc(1.0), Err(Error::BadParams(_))));
        let mut prev = f64::INFINITY;
        for k in 1..1000 {
            let h = torus_pmc(k as f64 / 1000.0).unwrap();
            assert!(h < prev);
            prev = h;
        }
        assert!(close(torus_pmc_root(1e-12).unwrap(), FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn clifford_is_unstable() {
        let c = clifford_instability();
        assert_eq!(c.bracket, -4.0);
        assert!(close(c.p_area, 2.0 * PI * PI, 1e-12));
        assert!(c.constant_variation < 0.0);
    }

    #[test]
    fn unitary_mapping() {
        let p = S3Point::normalized([0.1, -0.7, 0.2, 0.4]).unwrap().0;
        let q = S3Point::normalized([-0.5, 0.5, 0.1, 0.3]).unwrap().0;
        let u = Unitary2::mapping(p, q).unwrap();
        let r = u.apply(p);
        assert!((0..4).all(|i| close(r[i], q[i], 1e-14)));
        let v = [0.3, 0.1, -0.2, 0.5];
        assert!(close(
            theta_hat(u.apply(p), u.apply(v)),
            theta_hat(p, v),
            1e-14
        ));
    }

    #[test]
    fn sphere_audit() {
        for axis in [Axis::Y2, Axis::X2, Axis::X1, Axis::Y1] {
            let a = foliation_index_audit(Surface::CoordinateSphere(axis)).unwrap();
            assert_eq!(a.indices, vec![1, 1], "{axis:?}");
            assert_eq!(a.index_sum, 2);
            assert_eq!(a.mesh_euler, 2);
            assert!(a.consistent, "{a:?}");
        }
        let pts = coordinate_sphere_singular_points(Axis::Y2);
        assert_eq!(
            pts.map(|p| p.map(|v| v + 0.0)),
            [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0]]
        );
    }

    #[test]
    fn torus_audit() {
        let a = foliation_index_audit(Surface::CliffordTorus).unwrap();
        assert!(a.singular_points.is_empty());
        assert_eq!(a.mesh_euler, 0);
        assert!(a.consistent, "{a:?}");
    }

    #[test]
    fn obj_export() {
        let m = torus_mesh(0.6, 4, 5).unwrap();
        let mut buf = Vec::new();
        m.write_obj(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 20);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 40);
    }

    proptest! {
        #[test]
        fn frame_duality(p in unit4()) {
            let f = frame_hat(p).unwrap();
            prop_assert!(theta_hat(p, f.e1).abs() < 1e-14);
            prop_assert!(theta_hat(p, f.e2).abs() < 1e-14);
            prop_assert!((theta_hat(p, f.t) - 1.0).abs() < 1e-14);
            prop_assert!(dot(f.e1, f.e2).abs() < 1e-14);
            prop_assert!((norm(f.e1) - 1.0).abs() < 1e-14 && (norm(f.e2) - 1.0).abs() < 1e-14);
        }

        #[test]
        fn beta_gives_valid_pair(p in unit4(), t in 0.0..TAU) {
            let pair = GreatCirclePair::from_alpha(p, t.cos(), t.sin()).unwrap();
            prop_assert!(pair.validate().is_ok());
            let c = great_circle(&pair, 97).unwrap();
            prop_assert!(c.max_norm_defect() < 1e-12);
            prop_assert!(c.max_theta_defect() < 1e-10);
        }

        #[test]
        fn cayley_round_trip(p in unit4()) {
            prop_assume!(norm(axpy(1.0, p, [0.0, 0.0, 1.0, 0.0])) > 0.2);
            let q = cayley(p).unwrap();
            let r = cayley_inverse(q);
            prop_assert!((0..4).all(|i| (r[i] - p[i]).abs() < 1e-12));
        }

        #[test]
        fn cayley_pulls_back_contact_form(p in unit4(), v in unit4()) {
            prop_assume!(norm(axpy(1.0, p, [0.0, 0.0, 1.0, 0.0])) > 0.2);
            prop_assert!(pullback_gap(p, v, 1e-6).unwrap().abs() < 1e-8);
        }
    }
}
