//! Structural identities for N_F, an ε-regularized Dirichlet solver, comparison audits and rank checks.

use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{divergence_of_n, first_order_data};
use crate::error::{Error, Result};
use crate::field::{
    parse_grid_header, AnalyticField, FieldSample, GridField, GridGeometry, ScalarField2,
};
use crate::quadrature::{Domain2, Region};

type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A vector field F on Rⁿ, with an optional companion F*.
#[derive(Clone)]
pub struct GeneralF {
    pub dim: usize,
    f: VecFn,
    f_star: Option<VecFn>,
}

impl std::fmt::Debug for GeneralF {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fmt, "GeneralF(dim={})", self.dim)
    }
}

impl GeneralF {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        GeneralF {
            dim,
            f: Arc::new(f),
            f_star: None,
        }
    }

    pub fn zero(dim: usize) -> Self {
        GeneralF::new(dim, move |_| vec![0.0; dim])
    }

    /// F = (−y₁, x₁, …, −y_m, x_m) and F* = (x₁, y₁, …, x_m, y_m) on R^{2m}.
    pub fn heisenberg(m: usize) -> Self {
        GeneralF {
            dim: 2 * m,
            f: Arc::new(|p: &[f64]| p.chunks(2).flat_map(|c| [-c[1], c[0]]).collect()),
            f_star: Some(Arc::new(|p: &[f64]| p.to_vec())),
        }
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.f)(p)
    }

    pub fn eval_star(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.f_star.as_ref().map(|g| g(p))
    }

    /// Central-difference divergence of F*.
    pub fn divergence_star(&self, p: &[f64], h: f64) -> Option<f64> {
        let g = self.f_star.as_ref()?;
        let mut div = 0.0;
        let mut q = p.to_vec();
        for k in 0..self.dim {
            q[k] = p[k] + h;
            let a = g(&q)[k];
            q[k] = p[k] - h;
            let b = g(&q)[k];
            q[k] = p[k];
            div += (a - b) / (2.0 * h);
        }
        Some(div)
    }
}

/// A smooth function on Rⁿ: c + l·p + pᵀQp/2 + amp·sin(k·p).
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothFieldN {
    pub c: f64,
    pub lin: Vec<f64>,
    pub quad: Vec<Vec<f64>>,
    pub amp: f64,
    pub freq: Vec<f64>,
}

impl SmoothFieldN {
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut quad = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..1.0);
                quad[i][j] = v;
                quad[j][i] = v;
            }
        }
        SmoothFieldN {
            c: rng.random_range(-1.0..1.0),
            lin: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            quad,
            amp: rng.random_range(-1.0..1.0),
            freq: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        }
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        let kp: f64 = self.freq.iter().zip(p).map(|(k, x)| k * x).sum();
        let mut v = self.c + self.amp * kp.sin();
        for (i, x) in p.iter().enumerate() {
            v += self.lin[i] * x;
            for (j, y) in p.iter().enumerate() {
                v += 0.5 * self.quad[i][j] * x * y;
            }
        }
        v
    }

    pub fn grad(&self, p: &[f64]) -> Vec<f64> {
        let kp: f64 = self.freq.iter().zip(p).map(|(k, x)| k * x).sum();
        (0..p.len())
            .map(|i| {
                self.lin[i]
                    + self.quad[i].iter().zip(p).map(|(q, x)| q * x).sum::<f64>()
                    + self.amp * kp.cos() * self.freq[i]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// |N_F(u) − N_F(v)|.
    pub normal_gap: f64,
}

/// (∇u − ∇v)·(α/|α| − β/|β|) against (|α| + |β|)/2·|α/|α| − β/|β||², α = ∇u + F, β = ∇v + F.
pub fn structural_identity_gap(
    grad_u: &[f64],
    grad_v: &[f64],
    p: &[f64],
    f: &GeneralF,
) -> Result<IdentityGap> {
    let n = f.dim;
    if grad_u.len() != n || grad_v.len() != n || p.len() != n {
        return Err(Error::BadParams(format!(
            "dimension mismatch, expected {n}"
        )));
    }
    let fp = f.eval(p);
    let alpha: Vec<f64> = grad_u.iter().zip(&fp).map(|(g, f)| g + f).collect();
    let beta: Vec<f64> = grad_v.iter().zip(&fp).map(|(g, f)| g + f).collect();
    let na = alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = beta.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-12 * (1.0 + p.iter().map(|v| v * v).sum::<f64>().sqrt());
    if na <= tol {
        return Err(Error::Singular { d: na });
    }
    if nb <= tol {
        return Err(Error::Singular { d: nb });
    }
    let diff: Vec<f64> = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| a / na - b / nb)
        .collect();
    let lhs: f64 = grad_u
        .iter()
        .zip(grad_v)
        .zip(&diff)
        .map(|((a, b), d)| (a - b) * d)
        .sum();
    let sq: f64 = diff.iter().map(|d| d * d).sum();
    let rhs = 0.5 * (na + nb) * sq;
    Ok(IdentityGap {
        lhs,
        rhs,
        gap: lhs - rhs,
        normal_gap: sq.sqrt(),
    })
}

/// The planar case with F = (−y, x).
pub fn structural_identity_gap_2d<U, V>(u: &U, v: &V, x: f64, y: f64) -> Result<IdentityGap>
where
    U: ScalarField2 + ?Sized,
    V: ScalarField2 + ?Sized,
{
    let (a, b) = (u.eval(x, y)?, v.eval(x, y)?);
    structural_identity_gap(&a.grad, &b.grad, &[x, y], &GeneralF::heisenberg(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub step_tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 60,
            step_tol: 1e-11,
            armijo: 1e-4,
            backtrack: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletProblem {
    pub geometry: GridGeometry,
    /// Boundary node values, counterclockwise from (x0, y0).
    pub boundary: Vec<f64>,
    pub eps_schedule: Vec<f64>,
    pub newton: NewtonOptions,
}

pub fn default_schedule() -> Vec<f64> {
    (0..=6).map(|k| 10f64.powi(-k)).collect()
}

fn boundary_nodes(g: &GridGeometry) -> Vec<(usize, usize)> {
    let (nx, ny) = (g.nx, g.ny);
    let mut out = Vec::with_capacity(2 * (nx + ny) - 4);
    out.extend((0..nx - 1).map(|i| (i, 0)));
    out.extend((0..ny - 1).map(|j| (nx - 1, j)));
    out.extend((1..nx).rev().map(|i| (i, ny - 1)));
    out.extend((1..ny).rev().map(|j| (0, j)));
    out
}

impl DirichletProblem {
    pub fn new(geometry: GridGeometry, boundary: Vec<f64>, eps_schedule: Vec<f64>) -> Result<Self> {
        let p = DirichletProblem {
            geometry,
            boundary,
            eps_schedule,
            newton: NewtonOptions::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Boundary values taken from `f` on the grid boundary.
    pub fn from_field<F: ScalarField2 + ?Sized>(
        geometry: GridGeometry,
        f: &F,
        eps_schedule: Vec<f64>,
    ) -> Result<Self> {
        let boundary = boundary_nodes(&geometry)
            .into_iter()
            .map(|(i, j)| {
                let (x, y) = (
                    geometry.x0 + i as f64 * geometry.h,
                    geometry.y0 + j as f64 * geometry.h,
                );
                f.eval(x, y).map(|s| s.value)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(geometry, boundary, eps_schedule)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.nx < 9 || g.ny < 9 {
            return Err(Error::BadParams(format!(
                "grid needs at least 9x9 nodes, got {}x{}",
                g.nx, g.ny
            )));
        }
        if !(g.h > 0.0) || !g.h.is_finite() {
            return Err(Error::BadParams(format!(
                "grid spacing must be positive, got {}",
                g.h
            )));
        }
        let expect = 2 * (g.nx + g.ny) - 4;
        if self.boundary.len() != expect {
            return Err(Error::BadParams(format!(
                "expected {expect} boundary values, got {}",
                self.boundary.len()
            )));
        }
        if self.boundary.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParams("boundary values must be finite".into()));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::BadParams("empty epsilon schedule".into()));
        }
        for w in self.eps_schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::BadParams(
                    "epsilon schedule must be strictly decreasing".into(),
                ));
            }
        }
        if !(self.eps_schedule.last().copied().unwrap_or(0.0) > 0.0) {
            return Err(Error::BadParams("epsilon values must be positive".into()));
        }
        Ok(())
    }

    /// Reads `# x0=.. y0=.. h=.. nx=.. ny=..` followed by `x,y,u` rows in boundary order.
    pub fn read_boundary_csv<R: BufRead>(r: R, eps_schedule: Vec<f64>) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty boundary file".into()))??;
        let g = parse_grid_header(&header)?;
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') || t.starts_with('x') {
                continue;
            }
            let cols: Vec<f64> = t
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            match cols.as_slice() {
                [v] => values.push(*v),
                [_, _, v] => values.push(*v),
                _ => {
                    return Err(Error::Parse(format!(
                        "expected 1 or 3 columns, got {}",
                        cols.len()
                    )))
                }
            }
        }
        if g.nx < 2 || g.ny < 2 {
            return Err(Error::Parse("grid too small".into()));
        }
        Self::new(g, values, eps_schedule)
    }

    pub fn write_boundary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.geometry;
        writeln!(
            w,
            "# x0={} y0={} h={} nx={} ny={}",
            g.x0, g.y0, g.h, g.nx, g.ny
        )?;
        writeln!(w, "x,y,u")?;
        for ((i, j), v) in boundary_nodes(g).into_iter().zip(&self.boundary) {
            writeln!(
                w,
                "{},{},{}",
                g.x0 + i as f64 * g.h,
                g.y0 + j as f64 * g.h,
                v
            )?;
        }
        Ok(())
    }

    /// Transfinite (Coons) interpolation of the boundary values.
    pub fn coons_patch(&self) -> Vec<f64> {
        let g = &self.geometry;
        let (nx, ny) = (g.nx, g.ny);
        let mut full = vec![0.0; nx * ny];
        for ((i, j), v) in boundary_nodes(g).into_iter().zip(&self.boundary) {
            full[j * nx + i] = *v;
        }
        let b = full.clone();
        let at = |i: usize, j: usize| b[j * nx + i];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let s = i as f64 / (nx - 1) as f64;
                let t = j as f64 / (ny - 1) as f64;
                let ruled_x = (1.0 - s) * at(0, j) + s * at(nx - 1, j);
                let ruled_y = (1.0 - t) * at(i, 0) + t * at(i, ny - 1);
                let bilinear = (1.0 - s) * (1.0 - t) * at(0, 0)
                    + s * (1.0 - t) * at(nx - 1, 0)
                    + (1.0 - s) * t * at(0, ny - 1)
                    + s * t * at(nx - 1, ny - 1);
                full[j * nx + i] = ruled_x + ruled_y - bilinear;
            }
        }
        full
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub eps: f64,
    pub iterations: usize,
    pub converged: bool,
    /// max over interior nodes of |∂E/∂u_k| / h².
    pub residual: f64,
    pub energy: f64,
    /// Same residual for ε = 0, over nodes whose triangles keep |∇u + F| ≥ 1e−3.
    pub unregularized_residual: f64,
    pub flagged_nodes: usize,
    pub energy_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub stages: Vec<EpsilonReport>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: GridField,
    pub report: SolveReport,
}

impl Solution {
    /// NonConvergence for the first stage that did not converge.
    pub fn check(&self) -> Result<()> {
        match self.report.stages.iter().find(|s| !s.converged) {
            Some(s) => Err(Error::NonConvergence {
                eps: s.eps,
                residual: s.residual,
            }),
            None => Ok(()),
        }
    }
}

/// Degree-5 seven-point rule on the reference triangle: barycentric coordinates and weights summing to 1.
const TRI_RULE: [([f64; 3], f64); 7] = {
    const A1: f64 = 0.059_715_871_789_769_8;
    const B1: f64 = 0.470_142_064_105_115_1;
    const W1: f64 = 0.132_394_152_788_506_2;
    const A2: f64 = 0.797_426_985_353_087_3;
    const B2: f64 = 0.101_286_507_323_456_3;
    const W2: f64 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ]
};

/// Two triangles per cell: (i,j),(i+1,j),(i+1,j+1) and (i,j),(i+1,j+1),(i,j+1), with gradient
/// coefficients ∇u = Σ c_k u_k / h.
const TRIANGLES: [([(usize, usize); 3], [[f64; 2]; 3]); 2] = [
    (
        [(0, 0), (1, 0), (1, 1)],
        [[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]],
    ),
    (
        [(0, 0), (1, 1), (0, 1)],
        [[0.0, -1.0], [1.0, 0.0], [-1.0, 1.0]],
    ),
];

struct Assembly {
    energy: f64,
    grad: Vec<f64>,
    band: Option<BandMatrix>,
}

/// Symmetric positive definite band matrix, lower band stored row-wise.
struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    fn new(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    fn add(&mut self, r: usize, c: usize, v: f64) {
        let (r, c) = if r >= c { (r, c) } else { (c, r) };
        debug_assert!(r - c <= self.bw);
        self.data[r * (self.bw + 1) + (r - c)] += v;
    }

    fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.bw + 1) + (r - c)]
    }

    /// In-place Cholesky; returns false when a pivot is not positive.
    fn cholesky(&mut self) -> bool {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = self.get(i, j);
                let kl = lo.max(j.saturating_sub(bw));
                for k in kl..j {
                    s -= self.get(i, k) * self.get(j, k);
                }
                if i == j {
                    if !(s > 0.0) {
                        return false;
                    }
                    self.data[i * (bw + 1)] = s.sqrt();
                } else {
                    self.data[i * (bw + 1) + (i - j)] = s / self.get(j, j);
                }
            }
        }
        true
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.get(i, k) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.get(k, i) * b[k];
            }
            b[i] = s / self.get(i, i);
        }
    }
}

struct Discretization {
    g: GridGeometry,
    /// Interior unknown index per node, or None on the boundary.
    index: Vec<Option<usize>>,
    n_unknowns: usize,
}

impl Discretization {
    fn new(g: GridGeometry) -> Self {
        let mut index = vec![None; g.nx * g.ny];
        let mut k = 0;
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                index[j * g.nx + i] = Some(k);
                k += 1;
            }
        }
        Discretization {
            g,
            index,
            n_unknowns: k,
        }
    }

    fn bandwidth(&self) -> usize {
        self.g.nx - 1
    }

    /// Energy Σ_T ∫_T √(ε² + |∇u + F|²), its gradient and optionally its Hessian over unknowns.
    fn assemble(&self, u: &[f64], eps: f64, hessian: bool) -> Assembly {
        let g = &self.g;
        let h = g.h;
        let area = 0.5 * h * h;
        let mut energy = 0.0;
        let mut grad = vec![0.0; self.n_unknowns];
        let mut band = hessian.then(|| BandMatrix::new(self.n_unknowns, self.bandwidth()));
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                for (verts, coef) in TRIANGLES.iter() {
                    let nodes: [usize; 3] =
                        std::array::from_fn(|k| (j + verts[k].1) * g.nx + i + verts[k].0);
                    let mut du = [0.0; 2];
                    for k in 0..3 {
                        du[0] += coef[k][0] * u[nodes[k]] / h;
                        du[1] += coef[k][1] * u[nodes[k]] / h;
                    }
                    let corners: [[f64; 2]; 3] = std::array::from_fn(|k| {
                        [
                            g.x0 + (i + verts[k].0) as f64 * h,
                            g.y0 + (j + verts[k].1) as f64 * h,
                        ]
                    });
                    let mut e = 0.0;
                    let mut dg = [0.0; 2];
                    let mut hg = [[0.0; 2]; 2];
                    for (bary, w) in TRI_RULE.iter() {
                        let qx = bary[0] * corners[0][0]
                            + bary[1] * corners[1][0]
                            + bary[2] * corners[2][0];
                        let qy = bary[0] * corners[0][1]
                            + bary[1] * corners[1][1]
                            + bary[2] * corners[2][1];
                        let a = [du[0] - qy, du[1] + qx];
                        let d = (eps * eps + a[0] * a[0] + a[1] * a[1]).sqrt();
                        e += w * d;
                        dg[0] += w * a[0] / d;
                        dg[1] += w * a[1] / d;
                        if hessian {
                            let d3 = d * d * d;
                            hg[0][0] += w * (1.0 / d - a[0] * a[0] / d3);
                            hg[0][1] += w * (-a[0] * a[1] / d3);
                            hg[1][1] += w * (1.0 / d - a[1] * a[1] / d3);
                        }
                    }
                    hg[1][0] = hg[0][1];
                    energy += area * e;
                    for k in 0..3 {
                        let Some(rk) = self.index[nodes[k]] else {
                            continue;
                        };
                        grad[rk] += area * (dg[0] * coef[k][0] + dg[1] * coef[k][1]) / h;
                        if let Some(b) = band.as_mut() {
                            for l in 0..3 {
                                let Some(rl) = self.index[nodes[l]] else {
                                    continue;
                                };
                                if rl > rk {
                                    continue;
                                }
                                let mut v = 0.0;
                                for p in 0..2 {
                                    for q in 0..2 {
                                        v += coef[k][p] * hg[p][q] * coef[l][q];
                                    }
                                }
                                b.add(rk, rl, area * v / (h * h));
                            }
                        }
                    }
                }
            }
        }
        Assembly { energy, grad, band }
    }

    /// Unregularized residual, skipping nodes next to a triangle with |∇u + F| < 1e−3 somewhere.
    fn unregularized_residual(&self, u: &[f64]) -> (f64, usize) {
        let g = &self.g;
        let h = g.h;
        let mut flagged = vec![false; self.n_unknowns];
        for j in 0..g.ny - 1 {
            for i in 0..g.nx - 1 {
                for (verts, coef) in TRIANGLES.iter() {
                    let nodes: [usize; 3] =
                        std::array::from_fn(|k| (j + verts[k].1) * g.nx + i + verts[k].0);
                    let mut du = [0.0; 2];
                    for k in 0..3 {
                        du[0] += coef[k][0] * u[nodes[k]] / h;
                        du[1] += coef[k][1] * u[nodes[k]] / h;
                    }
                    let small = verts.iter().any(|(a, b)| {
                        let (x, y) = (g.x0 + (i + a) as f64 * h, g.y0 + (j + b) as f64 * h);
                        (du[0] - y).hypot(du[1] + x) < 1e-3
                    });
                    if small {
                        for n in nodes {
                            if let Some(r) = self.index[n] {
                                flagged[r] = true;
                            }
                        }
                    }
                }
            }
        }
        let a = self.assemble(u, 0.0, false);
        let res = a
            .grad
            .iter()
            .zip(&flagged)
            .filter(|(_, f)| !**f)
            .map(|(v, _)| v.abs() / (h * h))
            .fold(0.0, f64::max);
        (res, flagged.iter().filter(|f| **f).count())
    }
}

/// ε-continuation from the Coons patch of the boundary data.
pub fn solve(prob: &DirichletProblem) -> Result<Solution> {
    prob.validate()?;
    solve_from(prob, prob.coons_patch())
}

/// ε-continuation from a full-grid initial guess whose boundary entries are replaced by the data.
pub fn solve_from(prob: &DirichletProblem, initial: Vec<f64>) -> Result<Solution> {
    prob.validate()?;
    let g = prob.geometry;
    if initial.len() != g.nx * g.ny {
        return Err(Error::BadParams(format!(
            "initial guess needs {} values",
            g.nx * g.ny
        )));
    }
    let disc = Discretization::new(g);
    let mut u = initial;
    for ((i, j), v) in boundary_nodes(&g).into_iter().zip(&prob.boundary) {
        u[j * g.nx + i] = *v;
    }
    let interior: Vec<usize> = (0..g.nx * g.ny)
        .filter(|&n| disc.index[n].is_some())
        .collect();
    let opts = prob.newton;
    let mut stages = Vec::new();
    for &eps in &prob.eps_schedule {
        let mut history = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        let mut asm = disc.assemble(&u, eps, true);
        history.push(asm.energy);
        while iterations < opts.max_iterations {
            iterations += 1;
            let Some(mut band) = asm.band.take() else {
                break;
            };
            if !band.cholesky() {
                break;
            }
            let mut dir: Vec<f64> = asm.grad.iter().map(|v| -v).collect();
            band.solve(&mut dir);
            let slope: f64 = dir.iter().zip(&asm.grad).map(|(d, g)| d * g).sum();
            if !(slope < 0.0) {
                converged = dir.iter().all(|d| d.abs() <= opts.step_tol);
                break;
            }
            let mut t = 1.0;
            let mut trial = u.clone();
            let accepted = loop {
                for (n, &node) in interior.iter().enumerate() {
                    trial[node] = u[node] + t * dir[n];
                }
                let e = disc.assemble(&trial, eps, false).energy;
                if e <= asm.energy + opts.armijo * t * slope {
                    break Some(e);
                }
                t *= opts.backtrack;
                if t < 1e-12 {
                    break None;
                }
            };
            let step_max = dir.iter().fold(0.0f64, |m, d| m.max(d.abs())) * t;
            match accepted {
                Some(e) => {
                    u = trial;
                    history.push(e);
                    asm = disc.assemble(&u, eps, true);
                    if step_max <= opts.step_tol {
                        converged = true;
                        break;
                    }
                }
                None => {
                    // no descent left at working precision
                    converged = step_max <= 1e3 * opts.step_tol;
                    asm = disc.assemble(&u, eps, true);
                    break;
                }
            }
        }
        let residual = asm.grad.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (g.h * g.h);
        let (unreg, flagged) = disc.unregularized_residual(&u);
        stages.push(EpsilonReport {
            eps,
            iterations,
            converged,
            residual,
            energy: asm.energy,
            unregularized_residual: unreg,
            flagged_nodes: flagged,
            energy_history: history,
        });
    }
    let grid = GridField::new(g.x0, g.y0, g.h, g.nx, g.ny, u)?.with_one_sided_stencils(true);
    let converged = stages.iter().all(|s| s.converged);
    Ok(Solution {
        grid,
        report: SolveReport { converged, stages },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub interior_samples: usize,
    pub boundary_samples: usize,
    pub singular_fraction: f64,
    pub divergence_violations: usize,
    pub max_divergence_violation: f64,
    pub boundary_violations: usize,
    pub max_boundary_violation: f64,
    pub conclusion_violations: usize,
    pub max_conclusion_violation: f64,
    pub max_abs_difference: f64,
    pub hypotheses_hold: bool,
    pub conclusion_holds: bool,
}

/// Samples the comparison hypotheses (div N(u) ≥ div N(v) inside, u ≤ v on the boundary) and the
/// conclusion u ≤ v + tol inside.
pub fn comparison_audit<U, V>(
    u: &U,
    v: &V,
    dom: &Domain2,
    samples: usize,
    tol: f64,
) -> Result<ComparisonReport>
where
    U: ScalarField2 + ?Sized,
    V: ScalarField2 + ?Sized,
{
    let (x0, y0, x1, y1) = dom.bounding_box();
    let n = samples.max(2);
    let fd = 1e-4 * dom.diameter();
    let mut rep = ComparisonReport {
        interior_samples: 0,
        boundary_samples: 0,
        singular_fraction: 0.0,
        divergence_violations: 0,
        max_divergence_violation: 0.0,
        boundary_violations: 0,
        max_boundary_violation: 0.0,
        conclusion_violations: 0,
        max_conclusion_violation: 0.0,
        max_abs_difference: 0.0,
        hypotheses_hold: true,
        conclusion_holds: true,
    };
    let mut singular = 0usize;
    let mut considered = 0usize;
    for j in 1..n {
        for i in 1..n {
            let x = x0 + (x1 - x0) * i as f64 / n as f64;
            let y = y0 + (y1 - y0) * j as f64 / n as f64;
            if !dom.contains(x, y) {
                continue;
            }
            let (Ok(su), Ok(sv)) = (u.eval(x, y), v.eval(x, y)) else {
                continue;
            };
            considered += 1;
            rep.interior_samples += 1;
            let diff = su.value - sv.value;
            rep.max_abs_difference = rep.max_abs_difference.max(diff.abs());
            if diff > tol {
                rep.conclusion_violations += 1;
            }
            rep.max_conclusion_violation = rep.max_conclusion_violation.max(diff);
            let regular =
                first_order_data(u, x, y, None).is_ok() && first_order_data(v, x, y, None).is_ok();
            if !regular {
                singular += 1;
                continue;
            }
            if let (Ok(du), Ok(dv)) = (divergence_of_n(u, x, y, fd), divergence_of_n(v, x, y, fd)) {
                let gap = dv - du;
                if gap > tol {
                    rep.divergence_violations += 1;
                }
                rep.max_divergence_violation = rep.max_divergence_violation.max(gap);
            }
        }
    }
    let boundary: Vec<[f64; 2]> = match &dom.region {
        Region::Rect { .. } => (0..4 * n)
            .map(|k| {
                let t = (k % n) as f64 / n as f64;
                match k / n {
                    0 => [x0 + t * (x1 - x0), y0],
                    1 => [x1, y0 + t * (y1 - y0)],
                    2 => [x1 - t * (x1 - x0), y1],
                    _ => [x0, y1 - t * (y1 - y0)],
                }
            })
            .collect(),
        Region::Disk(d) => (0..4 * n)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / (4 * n) as f64;
                [
                    d.center[0] + d.radius * a.cos(),
                    d.center[1] + d.radius * a.sin(),
                ]
            })
            .collect(),
    };
    for p in boundary {
        let (Ok(su), Ok(sv)) = (u.eval(p[0], p[1]), v.eval(p[0], p[1])) else {
            continue;
        };
        rep.boundary_samples += 1;
        let diff = su.value - sv.value;
        if diff > tol {
            rep.boundary_violations += 1;
        }
        rep.max_boundary_violation = rep.max_boundary_violation.max(diff);
    }
    rep.singular_fraction = if considered > 0 {
        singular as f64 / considered as f64
    } else {
        0.0
    };
    rep.hypotheses_hold = rep.divergence_violations == 0 && rep.boundary_violations == 0;
    rep.conclusion_holds = rep.conclusion_violations == 0;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialCounterexampleReport {
    pub samples: usize,
    pub max_normal_gap_u: f64,
    pub max_normal_gap_v: f64,
    pub inner_mismatch: f64,
    pub outer_mismatch: f64,
    pub midpoint_difference: f64,
}

/// F = 0 on the annulus 1 < r < 2 with u = r and v = r + (r − 1)(2 − r)/2: equal unit
/// gradients and boundary values, different interiors.
pub fn radial_counterexample_fixture(
    seed: u64,
) -> (AnalyticField, AnalyticField, RadialCounterexampleReport) {
    let radial = |name: &str, f: fn(f64) -> (f64, f64, f64)| {
        AnalyticField::new(name.to_string(), move |x, y| {
            let r = x.hypot(y);
            if r == 0.0 {
                return Err(Error::OutOfDomain { x, y });
            }
            let (v, d1, d2) = f(r);
            let (cx, cy) = (x / r, y / r);
            let hxx = d2 * cx * cx + d1 * (1.0 - cx * cx) / r;
            let hxy = d2 * cx * cy - d1 * cx * cy / r;
            let hyy = d2 * cy * cy + d1 * (1.0 - cy * cy) / r;
            Ok(FieldSample::new(
                v,
                [d1 * cx, d1 * cy],
                [[hxx, hxy], [hxy, hyy]],
            ))
        })
    };
    let fu: fn(f64) -> (f64, f64, f64) = |r| (r, 1.0, 0.0);
    let fv: fn(f64) -> (f64, f64, f64) = |r| (r + 0.5 * (r - 1.0) * (2.0 - r), 2.5 - r, -1.0);
    let u = radial("annulus-u", fu);
    let v = radial("annulus-v", fv);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = 1000;
    let (mut gu, mut gv) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let r = rng.random_range(1.0..2.0);
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        let (x, y) = (r * a.cos(), r * a.sin());
        let er = [x / r, y / r];
        for (f, m) in [(&u, &mut gu), (&v, &mut gv)] {
            let s = f.eval(x, y).expect("annulus point");
            let n = s.grad[0].hypot(s.grad[1]);
            *m = m.max((s.grad[0] / n - er[0]).hypot(s.grad[1] / n - er[1]));
        }
    }
    let report = RadialCounterexampleReport {
        samples,
        max_normal_gap_u: gu,
        max_normal_gap_v: gv,
        inner_mismatch: fu(1.0).0 - fv(1.0).0,
        outer_mismatch: fu(2.0).0 - fv(2.0).0,
        midpoint_difference: fu(1.5).0 - fv(1.5).0,
    };
    (u, v, report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RankAudit {
    pub rank: usize,
    pub pass: bool,
}

/// Numerical rank of dG = Hessian + block-diagonal [[0, −1], [1, 0]]; passes when rank ≥ m.
pub fn rank_audit(hessian: &DMatrix<f64>, m: usize) -> Result<RankAudit> {
    if m == 0 || hessian.nrows() != 2 * m || hessian.ncols() != 2 * m {
        return Err(Error::BadParams(format!(
            "need a {0}x{0} Hessian with m >= 1",
            2 * m
        )));
    }
    let mut dg = hessian.clone();
    for k in 0..m {
        dg[(2 * k, 2 * k + 1)] -= 1.0;
        dg[(2 * k + 1, 2 * k)] += 1.0;
    }
    let sv = dg.singular_values();
    let smax = sv.max();
    let cut = 1e-10 * smax.max(1.0);
    let rank = sv.iter().filter(|s| **s > cut).count();
    Ok(RankAudit {
        rank,
        pass: rank >= m,
    })
}

/// Minimum rank over `draws` random symmetric Hessians with entries in [−scale, scale].
pub fn random_rank_audit(m: usize, draws: usize, scale: f64, seed: u64) -> Result<RankAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = RankAudit {
        rank: 2 * m,
        pass: true,
    };
    for _ in 0..draws {
        let mut h = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for i in 0..2 * m {
            for j in i..2 * m {
                let v = rng.random_range(-scale..scale);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let a = rank_audit(&h, m)?;
        if a.rank < worst.rank {
            worst = a;
        }
    }
    Ok(worst)
}
