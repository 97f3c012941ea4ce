//! Composite Simpson rules on rectangles and disks, and the plane domain type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disk(Disk),
}

/// A rectangle (or disk) minus a set of exclusion disks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain2 {
    pub region: Region,
    pub exclusions: Vec<Disk>,
}

impl Domain2 {
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) {
            return Err(Error::BadParams(format!(
                "degenerate rectangle [{x0},{x1}]x[{y0},{y1}]"
            )));
        }
        Ok(Domain2 {
            region: Region::Rect { x0, y0, x1, y1 },
            exclusions: Vec::new(),
        })
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::BadParams(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Domain2 {
            region: Region::Disk(Disk { center, radius }),
            exclusions: Vec::new(),
        })
    }

    /// Adds an exclusion disk, which must lie inside the region.
    pub fn exclude(mut self, center: [f64; 2], radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::BadParams(format!(
                "exclusion radius must be positive, got {radius}"
            )));
        }
        let inside = match self.region {
            Region::Rect { x0, y0, x1, y1 } => {
                center[0] - radius >= x0
                    && center[0] + radius <= x1
                    && center[1] - radius >= y0
                    && center[1] + radius <= y1
            }
            Region::Disk(d) => dist(center, d.center) + radius <= d.radius,
        };
        if !inside {
            return Err(Error::BadParams(
                "exclusion disk must lie inside the region".into(),
            ));
        }
        for e in &self.exclusions {
            if dist(center, e.center) < radius + e.radius {
                return Err(Error::BadParams("exclusion disks must be disjoint".into()));
            }
        }
        self.exclusions.push(Disk { center, radius });
        Ok(self)
    }

    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self.region {
            Region::Rect { x0, y0, x1, y1 } => (x0, y0, x1, y1),
            Region::Disk(d) => (
                d.center[0] - d.radius,
                d.center[1] - d.radius,
                d.center[0] + d.radius,
                d.center[1] + d.radius,
            ),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let inside = match self.region {
            Region::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Region::Disk(d) => dist([x, y], d.center) <= d.radius,
        };
        inside
            && self
                .exclusions
                .iter()
                .all(|e| dist([x, y], e.center) > e.radius)
    }

    pub fn diameter(&self) -> f64 {
        let (x0, y0, x1, y1) = self.bounding_box();
        (x1 - x0).hypot(y1 - y0)
    }

    /// ∫∫ f over the domain with `cells` Simpson intervals per axis.
    pub fn integrate<F>(&self, cells: usize, f: F) -> Result<f64>
    where
        F: Fn(f64, f64) -> Result<f64>,
    {
        let mut total = match self.region {
            Region::Rect { x0, y0, x1, y1 } => simpson_rect(&f, x0, y0, x1, y1, cells, cells)?,
            Region::Disk(d) => simpson_disk(&f, d, cells)?,
        };
        for e in &self.exclusions {
            total -= simpson_disk(&f, *e, cells)?;
        }
        Ok(total)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn simpson_weights(n: usize) -> Vec<f64> {
    let n = n.max(2) + n % 2;
    (0..=n)
        .map(|i| {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .map(|w| w / 3.0)
        .collect()
}

/// Composite Simpson over a rectangle; `nx`, `ny` are rounded up to even.
pub fn simpson_rect<F>(
    f: &F,
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    nx: usize,
    ny: usize,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let wx = simpson_weights(nx);
    let wy = simpson_weights(ny);
    let hx = (x1 - x0) / (wx.len() - 1) as f64;
    let hy = (y1 - y0) / (wy.len() - 1) as f64;
    let mut acc = 0.0;
    for (j, &cy) in wy.iter().enumerate() {
        let y = y0 + j as f64 * hy;
        let mut row = 0.0;
        for (i, &cx) in wx.iter().enumerate() {
            row += cx * f(x0 + i as f64 * hx, y)?;
        }
        acc += cy * row;
    }
    Ok(acc * hx * hy)
}

/// Polar rule on a disk: Simpson in the radius, trapezoid (periodic) in the angle.
pub fn simpson_disk<F>(f: &F, d: Disk, cells: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let wr = simpson_weights(cells);
    let nr = wr.len() - 1;
    let nphi = 2 * cells.max(8);
    let hr = d.radius / nr as f64;
    let hphi = std::f64::consts::TAU / nphi as f64;
    let mut acc = 0.0;
    for (k, &w) in wr.iter().enumerate().skip(1) {
        let r = k as f64 * hr;
        let mut ring = 0.0;
        for m in 0..nphi {
            let phi = m as f64 * hphi;
            ring += f(d.center[0] + r * phi.cos(), d.center[1] + r * phi.sin())?;
        }
        acc += w * r * ring * hphi;
    }
    Ok(acc * hr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let d = Domain2::rect(0.0, -1.0, 2.0, 1.0).unwrap();
        let v = d.integrate(4, |x, y| Ok(x * x * x + y * y)).unwrap();
        assert!((v - (2.0 * 4.0 + 2.0 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn disk_area_and_exclusion() {
        let d = Domain2::disk([0.5, 0.0], 2.0).unwrap();
        let a = d.integrate(32, |_, _| Ok(1.0)).unwrap();
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let r = Domain2::rect(-2.0, -2.0, 2.0, 2.0)
            .unwrap()
            .exclude([0.0, 0.0], 1.0)
            .unwrap();
        let a = r.integrate(32, |_, _| Ok(1.0)).unwrap();
        assert!((a - (16.0 - std::f64::consts::PI)).abs() < 1e-12);
        assert!(!r.contains(0.5, 0.0));
        assert!(r.contains(1.5, 0.0));
    }

    #[test]
    fn bad_domains() {
        assert!(Domain2::rect(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Domain2::disk([0.0, 0.0], 0.0).is_err());
        let r = Domain2::rect(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(r.clone().exclude([0.9, 0.5], 0.2).is_err());
        let r = r.exclude([0.3, 0.5], 0.1).unwrap();
        assert!(r.exclude([0.4, 0.5], 0.1).is_err());
    }
}
