//! Plane scalar fields u(x, y) with value, gradient and Hessian.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Value, gradient and symmetric Hessian of a field at a point.
///
/// `noise` is an estimate of the absolute gradient error; it is zero for
/// analytic fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldSample {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
    pub noise: f64,
}

impl FieldSample {
    pub fn new(value: f64, grad: [f64; 2], hess: [[f64; 2]; 2]) -> Self {
        FieldSample {
            value,
            grad,
            hess,
            noise: 0.0,
        }
    }

    /// G = (u_x − y, u_y + x).
    pub fn contact_map(&self, x: f64, y: f64) -> [f64; 2] {
        [self.grad[0] - y, self.grad[1] + x]
    }
}

/// G = (u_x − y, u_y + x) together with its Jacobian U.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactJet {
    pub g: [f64; 2],
    pub u: [[f64; 2]; 2],
}

/// Evaluation contract shared by analytic and grid-backed fields.
pub trait ScalarField2: Send + Sync {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample>;

    /// G and U. Fields whose G suffers cancellation in `u_x − y` override this.
    fn contact_jet(&self, x: f64, y: f64) -> Result<ContactJet> {
        let s = self.eval(x, y)?;
        Ok(ContactJet {
            g: s.contact_map(x, y),
            u: [
                [s.hess[0][0], s.hess[0][1] - 1.0],
                [s.hess[1][0] + 1.0, s.hess[1][1]],
            ],
        })
    }

    fn is_grid(&self) -> bool {
        false
    }

    fn name(&self) -> String {
        "field".to_string()
    }
}

impl<T: ScalarField2 + ?Sized> ScalarField2 for &T {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        (**self).eval(x, y)
    }
    fn contact_jet(&self, x: f64, y: f64) -> Result<ContactJet> {
        (**self).contact_jet(x, y)
    }
    fn is_grid(&self) -> bool {
        (**self).is_grid()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<T: ScalarField2 + ?Sized> ScalarField2 for Arc<T> {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        (**self).eval(x, y)
    }
    fn contact_jet(&self, x: f64, y: f64) -> Result<ContactJet> {
        (**self).contact_jet(x, y)
    }
    fn is_grid(&self) -> bool {
        (**self).is_grid()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

type EvalFn = dyn Fn(f64, f64) -> Result<FieldSample> + Send + Sync;
type JetFn = dyn Fn(f64, f64) -> Result<ContactJet> + Send + Sync;

/// A field given by closed-form derivatives.
#[derive(Clone)]
pub struct AnalyticField {
    name: String,
    eval: Arc<EvalFn>,
    jet: Option<Arc<JetFn>>,
}

impl AnalyticField {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<FieldSample> + Send + Sync + 'static,
    {
        AnalyticField {
            name: name.into(),
            eval: Arc::new(f),
            jet: None,
        }
    }

    /// Convenience constructor for fields defined on the whole plane.
    pub fn entire<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> FieldSample + Send + Sync + 'static,
    {
        Self::new(name, move |x, y| Ok(f(x, y)))
    }

    pub fn with_contact_jet<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<ContactJet> + Send + Sync + 'static,
    {
        self.jet = Some(Arc::new(f));
        self
    }
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticField")
            .field("name", &self.name)
            .finish()
    }
}

impl ScalarField2 for AnalyticField {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        (self.eval)(x, y)
    }

    fn contact_jet(&self, x: f64, y: f64) -> Result<ContactJet> {
        match &self.jet {
            Some(j) => j(x, y),
            None => {
                let s = self.eval(x, y)?;
                Ok(ContactJet {
                    g: s.contact_map(x, y),
                    u: [
                        [s.hess[0][0], s.hess[0][1] - 1.0],
                        [s.hess[1][0] + 1.0, s.hess[1][1]],
                    ],
                })
            }
        }
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

/// Uniform-grid samples; row `j` holds y = y0 + j·h.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    values: Vec<f64>,
    one_sided: bool,
}

#[derive(Debug, Clone, Copy)]
struct NodeJet {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
    noise: f64,
}

impl GridField {
    pub fn new(x0: f64, y0: f64, h: f64, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::BadParams(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if nx < 5 || ny < 5 {
            return Err(Error::BadParams(format!(
                "grid needs at least 5x5 nodes, got {nx}x{ny}"
            )));
        }
        if values.len() != nx * ny {
            return Err(Error::BadParams(format!(
                "expected {} samples, got {}",
                nx * ny,
                values.len()
            )));
        }
        Ok(GridField {
            x0,
            y0,
            h,
            nx,
            ny,
            values,
            one_sided: false,
        })
    }

    /// Samples `f` at every node.
    pub fn sample<F: Fn(f64, f64) -> f64>(
        x0: f64,
        y0: f64,
        h: f64,
        nx: usize,
        ny: usize,
        f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(x0 + i as f64 * h, y0 + j as f64 * h));
            }
        }
        Self::new(x0, y0, h, nx, ny, values)
    }

    /// Allow queries up to the grid edge using one-sided second-order stencils.
    pub fn with_one_sided_stencils(mut self, enabled: bool) -> Self {
        self.one_sided = enabled;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn x1(&self) -> f64 {
        self.x0 + (self.nx - 1) as f64 * self.h
    }

    pub fn y1(&self) -> f64 {
        self.y0 + (self.ny - 1) as f64 * self.h
    }

    fn margin(&self) -> usize {
        if self.one_sided {
            0
        } else {
            2
        }
    }

    fn d1_weights(&self, i: usize, n: usize, high: bool) -> Vec<(isize, f64)> {
        let h = self.h;
        if high && i >= 2 && i + 2 < n {
            vec![
                (-2, 1.0 / (12.0 * h)),
                (-1, -8.0 / (12.0 * h)),
                (1, 8.0 / (12.0 * h)),
                (2, -1.0 / (12.0 * h)),
            ]
        } else if i >= 1 && i + 1 < n {
            vec![(-1, -0.5 / h), (1, 0.5 / h)]
        } else if i == 0 {
            vec![(0, -1.5 / h), (1, 2.0 / h), (2, -0.5 / h)]
        } else {
            vec![(0, 1.5 / h), (-1, -2.0 / h), (-2, 0.5 / h)]
        }
    }

    fn d2_weights(&self, i: usize, n: usize) -> Vec<(isize, f64)> {
        let h2 = self.h * self.h;
        if i >= 1 && i + 1 < n {
            vec![(-1, 1.0 / h2), (0, -2.0 / h2), (1, 1.0 / h2)]
        } else if i == 0 {
            vec![(0, 2.0 / h2), (1, -5.0 / h2), (2, 4.0 / h2), (3, -1.0 / h2)]
        } else {
            vec![
                (0, 2.0 / h2),
                (-1, -5.0 / h2),
                (-2, 4.0 / h2),
                (-3, -1.0 / h2),
            ]
        }
    }

    fn val(&self, i: usize, j: usize, di: isize, dj: isize) -> f64 {
        let ii = (i as isize + di) as usize;
        let jj = (j as isize + dj) as usize;
        self.at(ii, jj)
    }

    fn node_jet(&self, i: usize, j: usize) -> NodeJet {
        let (nx, ny) = (self.nx, self.ny);
        let dot_x = |w: &[(isize, f64)]| {
            w.iter()
                .map(|&(d, c)| c * self.val(i, j, d, 0))
                .sum::<f64>()
        };
        let dot_y = |w: &[(isize, f64)]| {
            w.iter()
                .map(|&(d, c)| c * self.val(i, j, 0, d))
                .sum::<f64>()
        };
        let gx = dot_x(&self.d1_weights(i, nx, true));
        let gy = dot_y(&self.d1_weights(j, ny, true));
        let gx2 = dot_x(&self.d1_weights(i, nx, false));
        let gy2 = dot_y(&self.d1_weights(j, ny, false));
        let uxx = dot_x(&self.d2_weights(i, nx));
        let uyy = dot_y(&self.d2_weights(j, ny));
        let wx = self.d1_weights(i, nx, false);
        let wy = self.d1_weights(j, ny, false);
        let mut uxy = 0.0;
        for &(a, ca) in &wx {
            for &(b, cb) in &wy {
                uxy += ca * cb * self.val(i, j, a, b);
            }
        }
        let value = self.at(i, j);
        let round = 1e3 * f64::EPSILON * (1.0 + value.abs()) / self.h;
        let noise = (gx - gx2).abs().max((gy - gy2).abs()) + round;
        NodeJet {
            value,
            grad: [gx, gy],
            hess: [[uxx, uxy], [uxy, uyy]],
            noise,
        }
    }

    fn check_query(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let m = self.margin() as f64;
        let tx = (x - self.x0) / self.h;
        let ty = (y - self.y0) / self.h;
        let slack = 1e-9;
        let ok_x = tx >= m - slack && tx <= (self.nx - 1) as f64 - m + slack;
        let ok_y = ty >= m - slack && ty <= (self.ny - 1) as f64 - m + slack;
        if !(ok_x && ok_y) || !x.is_finite() || !y.is_finite() {
            return Err(Error::OutOfDomain { x, y });
        }
        Ok((tx, ty))
    }
}

/// Nodes used for interpolation along one axis and their Lagrange weights.
fn lagrange_window(t: f64, lo: usize, hi: usize) -> Vec<(usize, f64)> {
    let count = (hi - lo + 1).min(4);
    let c = t.floor().max(lo as f64) as usize;
    let start = c.saturating_sub(1).clamp(lo, hi + 1 - count);
    let nodes: Vec<usize> = (start..start + count).collect();
    nodes
        .iter()
        .map(|&k| {
            let mut w = 1.0;
            for &m in &nodes {
                if m != k {
                    w *= (t - m as f64) / (k as f64 - m as f64);
                }
            }
            (k, w)
        })
        .collect()
}

impl ScalarField2 for GridField {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        let (tx, ty) = self.check_query(x, y)?;
        let (ri, rj) = (tx.round(), ty.round());
        let on_node = (tx - ri).abs() < 1e-9 && (ty - rj).abs() < 1e-9;
        let m = self.margin();
        let (lo_x, hi_x) = (m, self.nx - 1 - m);
        let (lo_y, hi_y) = (m, self.ny - 1 - m);
        if on_node {
            let n = self.node_jet(ri as usize, rj as usize);
            return Ok(FieldSample {
                value: n.value,
                grad: n.grad,
                hess: n.hess,
                noise: n.noise,
            });
        }
        let wx = lagrange_window(tx, lo_x, hi_x);
        let wy = lagrange_window(ty, lo_y, hi_y);
        let mut s = FieldSample::default();
        for &(j, cy) in &wy {
            for &(i, cx) in &wx {
                let n = self.node_jet(i, j);
                let w = cx * cy;
                s.value += w * n.value;
                s.grad[0] += w * n.grad[0];
                s.grad[1] += w * n.grad[1];
                for a in 0..2 {
                    for b in 0..2 {
                        s.hess[a][b] += w * n.hess[a][b];
                    }
                }
                s.noise = s.noise.max(n.noise);
            }
        }
        let sym = 0.5 * (s.hess[0][1] + s.hess[1][0]);
        s.hess[0][1] = sym;
        s.hess[1][0] = sym;
        Ok(s)
    }

    fn is_grid(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("grid {}x{}", self.nx, self.ny)
    }
}

impl GridField {
    /// Writes the CSV format: a `# x0=.. y0=.. h=.. nx=.. ny=..` header then `ny` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# x0={} y0={} h={} nx={} ny={}",
            self.x0, self.y0, self.h, self.nx, self.ny
        )?;
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx).map(|i| format!("{}", self.at(i, j))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let geom = parse_grid_header(&header)?;
        let mut values = Vec::with_capacity(geom.nx * geom.ny);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = t
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            if row.len() != geom.nx {
                return Err(Error::Parse(format!(
                    "row has {} values, expected {}",
                    row.len(),
                    geom.nx
                )));
            }
            values.extend(row);
        }
        GridField::new(geom.x0, geom.y0, geom.h, geom.nx, geom.ny, values)
    }
}

/// Geometry of a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

pub fn parse_grid_header(line: &str) -> Result<GridGeometry> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("grid header must start with '#'".into()))?;
    let mut g = GridGeometry {
        x0: f64::NAN,
        y0: f64::NAN,
        h: f64::NAN,
        nx: 0,
        ny: 0,
    };
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        let pf = |v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        let pu = |v: &str| {
            v.parse::<usize>()
                .map_err(|e| Error::Parse(format!("{k}: {e}")))
        };
        match k {
            "x0" => g.x0 = pf(v)?,
            "y0" => g.y0 = pf(v)?,
            "h" => g.h = pf(v)?,
            "nx" => g.nx = pu(v)?,
            "ny" => g.ny = pu(v)?,
            _ => return Err(Error::Parse(format!("unknown header key {k:?}"))),
        }
    }
    if !(g.x0.is_finite() && g.y0.is_finite() && g.h.is_finite()) || g.nx == 0 || g.ny == 0 {
        return Err(Error::Parse("grid header is missing fields".into()));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> AnalyticField {
        AnalyticField::entire("xy", |x, y| {
            FieldSample::new(x * y, [y, x], [[0.0, 1.0], [1.0, 0.0]])
        })
    }

    fn wave(x: f64, y: f64) -> f64 {
        (1.3 * x).sin() * (0.7 * y).cos() + 0.2 * x * y
    }

    fn wave_exact(x: f64, y: f64) -> FieldSample {
        let (s, c) = ((1.3 * x).sin(), (1.3 * x).cos());
        let (sy, cy) = ((0.7 * y).sin(), (0.7 * y).cos());
        FieldSample::new(
            wave(x, y),
            [1.3 * c * cy + 0.2 * y, -0.7 * s * sy + 0.2 * x],
            [
                [-1.69 * s * cy, -0.91 * c * sy + 0.2],
                [-0.91 * c * sy + 0.2, -0.49 * s * cy],
            ],
        )
    }

    #[test]
    fn analytic_bilinear() {
        let s = xy().eval(2.0, 3.0).unwrap();
        assert_eq!(s.value, 6.0);
        assert_eq!(s.grad, [3.0, 2.0]);
        assert_eq!(s.hess, [[0.0, 1.0], [1.0, 0.0]]);
    }

    #[test]
    fn grid_quadratic_node_is_exact() {
        let g = GridField::sample(-1.0, -1.0, 0.1, 21, 21, |x, y| x * x + y * y).unwrap();
        let (x, y) = g.node(7, 12);
        let s = g.eval(x, y).unwrap();
        assert!((s.grad[0] - 2.0 * x).abs() < 1e-12);
        assert!((s.grad[1] - 2.0 * y).abs() < 1e-12);
        assert!((s.hess[0][0] - 2.0).abs() < 1e-10);
        assert!(s.hess[0][1].abs() < 1e-10);
    }

    #[test]
    fn grid_outside_margin() {
        let g = GridField::sample(0.0, 0.0, 0.1, 11, 11, |x, y| x + y).unwrap();
        assert!(matches!(g.eval(0.15, 0.5), Err(Error::OutOfDomain { .. })));
        assert!(matches!(g.eval(0.5, 0.95), Err(Error::OutOfDomain { .. })));
        assert!(g.eval(0.2, 0.8).is_ok());
        let g = g.with_one_sided_stencils(true);
        let s = g.eval(0.0, 1.0).unwrap();
        assert!((s.grad[0] - 1.0).abs() < 1e-12 && (s.grad[1] - 1.0).abs() < 1e-12);
    }

    fn observed_orders(x: f64, y: f64) -> (f64, f64) {
        let mut eg = Vec::new();
        let mut eh = Vec::new();
        for k in 0..3 {
            let h = 0.1 / 2f64.powi(k);
            let n = (2.0 / h).round() as usize + 1;
            let g = GridField::sample(-1.0, -1.0, h, n, n, wave).unwrap();
            let s = g.eval(x, y).unwrap();
            let e = wave_exact(x, y);
            eg.push(
                (s.grad[0] - e.grad[0])
                    .abs()
                    .max((s.grad[1] - e.grad[1]).abs()),
            );
            eh.push(
                (0..2)
                    .flat_map(|a| (0..2).map(move |b| (a, b)))
                    .map(|(a, b)| (s.hess[a][b] - e.hess[a][b]).abs())
                    .fold(0.0, f64::max),
            );
        }
        let og = (eg[1] / eg[2]).log2();
        let oh = (eh[1] / eh[2]).log2();
        (og, oh)
    }

    #[test]
    fn stencil_orders_at_nodes() {
        let (og, oh) = observed_orders(0.3, -0.2);
        assert!(og >= 3.5, "gradient order {og}");
        assert!(oh >= 1.8, "hessian order {oh}");
    }

    #[test]
    fn stencil_orders_between_nodes() {
        let (og, oh) = observed_orders(0.3137, -0.2271);
        assert!(og >= 3.5, "gradient order {og}");
        assert!(oh >= 1.8, "hessian order {oh}");
    }

    #[test]
    fn hessian_is_symmetric() {
        let g = GridField::sample(-1.0, -1.0, 0.05, 41, 41, wave).unwrap();
        let s = g.eval(0.123, 0.456).unwrap();
        assert_eq!(s.hess[0][1], s.hess[1][0]);
    }

    #[test]
    fn csv_round_trip() {
        let g = GridField::sample(-0.5, 0.25, 0.125, 6, 5, wave).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# x0=-0.5 y0=0.25 h=0.125 nx=6 ny=5\n"));
        let back = GridField::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let text = "# x0=0 y0=0 h=1 nx=5 ny=5\n1,2,3\n";
        assert!(GridField::read_csv(std::io::Cursor::new(text)).is_err());
        assert!(GridField::read_csv(std::io::Cursor::new("x0=0\n")).is_err());
    }

    #[test]
    fn grid_rejects_bad_geometry() {
        assert!(GridField::new(0.0, 0.0, 0.0, 5, 5, vec![0.0; 25]).is_err());
        assert!(GridField::new(0.0, 0.0, 1.0, 4, 5, vec![0.0; 20]).is_err());
    }
}
