//! The singular set S(u) = {u_x − y = 0, u_y + x = 0}: location, classification, index, continuation.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ContactJet, ScalarField2};
use crate::quadrature::Domain2;

/// [[u_xx, u_xy − 1], [u_xy + 1, u_yy]], the Jacobian of G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UMatrix(pub [[f64; 2]; 2]);

impl UMatrix {
    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum()
    }

    /// |det U| < 1e−8·‖U‖²_F.
    pub fn is_rank_deficient(&self) -> bool {
        self.det().abs() < 1e-8 * self.frobenius_sq()
    }

    /// Unit vector spanning the (numerical) kernel.
    pub fn kernel(&self) -> [f64; 2] {
        let m = Matrix2::new(self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]);
        let svd = m.svd(false, true);
        let vt = svd.v_t.expect("requested v_t");
        let k = if svd.singular_values[0] < svd.singular_values[1] {
            0
        } else {
            1
        };
        [vt[(k, 0)], vt[(k, 1)]]
    }
}

pub fn u_matrix<F: ScalarField2 + ?Sized>(f: &F, p: [f64; 2]) -> Result<UMatrix> {
    Ok(UMatrix(f.contact_jet(p[0], p[1])?.u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Isolated,
    OnCurve,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub det: f64,
    pub frobenius_sq: f64,
    /// Other singular points found on the rings at radius R, R/2, R/4.
    pub ring_neighbors: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPoint {
    pub location: [f64; 2],
    pub residual: f64,
    pub det: f64,
    pub u: [[f64; 2]; 2],
    pub verdict: Verdict,
    pub index: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularReport {
    pub points: Vec<SingularPoint>,
    pub curves: Vec<Vec<[f64; 2]>>,
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Step solving U·Δ = −G: the full Newton step when it stays inside `trust`,
/// otherwise the minimum-norm least-squares step.
fn newton_step(jet: &ContactJet, trust: f64) -> [f64; 2] {
    let [[a, b], [c, d]] = jet.u;
    let g = jet.g;
    let det = a * d - b * c;
    if det != 0.0 {
        let step = [-(d * g[0] - b * g[1]) / det, -(-c * g[0] + a * g[1]) / det];
        if step[0].is_finite() && step[1].is_finite() && norm2(step) <= trust {
            return step;
        }
    }
    let m = Matrix2::new(a, b, c, d);
    let svd = m.svd(true, true);
    let smax = svd.singular_values.max();
    let pinv = svd
        .pseudo_inverse(1e-8 * smax.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| Matrix2::zeros());
    let s = pinv * nalgebra::Vector2::new(g[0], g[1]);
    let mut step = [-s[0], -s[1]];
    let n = norm2(step);
    if n > trust {
        step = [step[0] * trust / n, step[1] * trust / n];
    }
    step
}

/// Newton / Gauss–Newton on G from `seed`; returns the point and |G| there.
pub fn newton_polish<F: ScalarField2 + ?Sized>(
    f: &F,
    seed: [f64; 2],
    tol: f64,
    trust: f64,
) -> Result<([f64; 2], f64)> {
    let mut p = seed;
    let mut jet = f.contact_jet(p[0], p[1])?;
    let mut converged = false;
    for _ in 0..60 {
        let step = newton_step(&jet, trust);
        let q = [p[0] + step[0], p[1] + step[1]];
        let next = f.contact_jet(q[0], q[1])?;
        p = q;
        jet = next;
        if norm2(step) <= 1e-14 * (1.0 + norm2(p)) {
            converged = true;
            break;
        }
    }
    let r = norm2(jet.g);
    if converged && r < tol {
        Ok((p, r))
    } else {
        Err(Error::NotSingular { residual: r })
    }
}

/// Projects a point close to S(u) onto it.
pub fn polish_onto_singular_set<F: ScalarField2 + ?Sized>(
    f: &F,
    p: [f64; 2],
    tol: f64,
) -> Result<[f64; 2]> {
    let trust = 1e-2 * (1.0 + norm2(p));
    newton_polish(f, p, tol * (1.0 + norm2(p)), trust).map(|(q, _)| q)
}

fn singular_tol(p: [f64; 2]) -> f64 {
    1e-7 * (1.0 + norm2(p))
}

/// det U plus a ring scan at radii R, R/2, R/4 for other singular points.
pub fn classify<F: ScalarField2 + ?Sized>(
    f: &F,
    p0: [f64; 2],
    scan_radius: f64,
) -> Result<Classification> {
    let jet = f.contact_jet(p0[0], p0[1])?;
    let r = norm2(jet.g);
    if !(r < singular_tol(p0)) {
        return Err(Error::NotSingular { residual: r });
    }
    let um = UMatrix(jet.u);
    let (det, frobenius_sq) = (um.det(), um.frobenius_sq());
    if !um.is_rank_deficient() {
        return Ok(Classification {
            verdict: Verdict::Isolated,
            det,
            frobenius_sq,
            ring_neighbors: [0; 3],
        });
    }
    let mut ring_neighbors = [0usize; 3];
    for (k, slot) in ring_neighbors.iter_mut().enumerate() {
        let rad = scan_radius / 2f64.powi(k as i32);
        *slot = ring_scan(f, p0, rad, 128)?;
    }
    let verdict = if ring_neighbors.iter().all(|&n| n > 0) {
        Verdict::OnCurve
    } else {
        Verdict::Undetermined
    };
    Ok(Classification {
        verdict,
        det,
        frobenius_sq,
        ring_neighbors,
    })
}

fn ring_scan<F: ScalarField2 + ?Sized>(f: &F, p0: [f64; 2], rad: f64, m: usize) -> Result<usize> {
    let pts: Vec<[f64; 2]> = (0..m)
        .map(|i| {
            let a = TAU * i as f64 / m as f64;
            [p0[0] + rad * a.cos(), p0[1] + rad * a.sin()]
        })
        .collect();
    let mut vals = Vec::with_capacity(m);
    for p in &pts {
        vals.push(match f.contact_jet(p[0], p[1]) {
            Ok(j) => norm2(j.g),
            Err(_) => f64::INFINITY,
        });
    }
    let mut found: Vec<[f64; 2]> = Vec::new();
    for i in 0..m {
        let (a, b, c) = (vals[(i + m - 1) % m], vals[i], vals[(i + 1) % m]);
        if !(b <= a && b <= c) || !b.is_finite() {
            continue;
        }
        if let Ok((q, _)) = newton_polish(f, pts[i], singular_tol(p0), 0.5 * rad) {
            let dq = norm2([q[0] - p0[0], q[1] - p0[1]]);
            if dq > 0.25 * rad
                && found
                    .iter()
                    .all(|w| norm2([w[0] - q[0], w[1] - q[1]]) > 0.1 * rad)
            {
                found.push(q);
            }
        }
    }
    Ok(found.len())
}

/// Winding number of N⊥D = (u_y + x, −u_x + y) on a circle; returns the raw (unrounded) value.
pub fn winding_number<F: ScalarField2 + ?Sized>(
    f: &F,
    center: [f64; 2],
    radius: f64,
    m: usize,
) -> Result<f64> {
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for i in 0..=m {
        let a = TAU * (i % m) as f64 / m as f64;
        let (x, y) = (center[0] + radius * a.cos(), center[1] + radius * a.sin());
        let g = f.contact_jet(x, y)?.g;
        if g[0] == 0.0 && g[1] == 0.0 {
            return Err(Error::UnstableWinding);
        }
        let ang = (-g[0]).atan2(g[1]);
        if let Some(p) = prev {
            let mut d = ang - p;
            while d > PI {
                d -= TAU;
            }
            while d <= -PI {
                d += TAU;
            }
            total += d;
        }
        prev = Some(ang);
    }
    Ok(total / TAU)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPolicy {
    pub initial_radius: f64,
    pub samples: usize,
    pub shrink: f64,
    pub max_shrinks: usize,
}

impl Default for IndexPolicy {
    fn default() -> Self {
        IndexPolicy {
            initial_radius: 0.1,
            samples: 720,
            shrink: 0.5,
            max_shrinks: 8,
        }
    }
}

/// Index of N⊥D at an isolated singular point.
pub fn index<F: ScalarField2 + ?Sized>(f: &F, p0: [f64; 2], policy: IndexPolicy) -> Result<i32> {
    let mut prev: Option<i32> = None;
    let mut r = policy.initial_radius;
    for _ in 0..=policy.max_shrinks {
        let w = winding_number(f, p0, r, policy.samples).ok().and_then(|w| {
            let k = w.round();
            ((w - k).abs() < 1e-6).then_some(k as i32)
        });
        if let (Some(a), Some(b)) = (prev, w) {
            if a == b {
                return Ok(a);
            }
        }
        prev = w;
        r *= policy.shrink;
    }
    Err(Error::UnstableWinding)
}

/// max(|u_xx|, |u_xy|, |u_yy|) at a singular point.
pub fn hessian_vanishing_check<F: ScalarField2 + ?Sized>(f: &F, p0: [f64; 2]) -> Result<f64> {
    let s = f.eval(p0[0], p0[1])?;
    let r = norm2(s.contact_map(p0[0], p0[1]));
    if !(r < singular_tol(p0)) {
        return Err(Error::NotSingular { residual: r });
    }
    Ok(s.hess.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Predictor along ker U, Gauss–Newton corrector on G, in both directions from `p0`.
pub fn trace_singular_curve<F: ScalarField2 + ?Sized>(
    f: &F,
    p0: [f64; 2],
    step: f64,
    max_length: f64,
    domain: Option<&Domain2>,
) -> Result<Vec<[f64; 2]>> {
    let um = u_matrix(f, p0)?;
    if !um.is_rank_deficient() {
        return Err(Error::RankFull { x: p0[0], y: p0[1] });
    }
    let k0 = um.kernel();
    let mut halves = Vec::new();
    for sign in [1.0, -1.0] {
        halves.push(continue_curve(
            f,
            p0,
            [sign * k0[0], sign * k0[1]],
            step,
            max_length,
            domain,
        ));
    }
    let mut pts: Vec<[f64; 2]> = halves[1].iter().rev().copied().collect();
    pts.push(p0);
    pts.extend(halves[0].iter().copied());
    Ok(pts)
}

fn continue_curve<F: ScalarField2 + ?Sized>(
    f: &F,
    p0: [f64; 2],
    d0: [f64; 2],
    step: f64,
    max_length: f64,
    domain: Option<&Domain2>,
) -> Vec<[f64; 2]> {
    let h_max = step.clamp(1e-4, 1e-1);
    let mut h = h_max;
    let mut p = p0;
    let mut d = d0;
    let mut out: Vec<[f64; 2]> = Vec::new();
    let mut length = 0.0;
    while length < max_length {
        let q = [p[0] + h * d[0], p[1] + h * d[1]];
        let corrected = newton_polish(f, q, 1e-12 * (1.0 + norm2(q)), 0.5 * h);
        let q = match corrected {
            Ok((q, _)) => q,
            Err(_) => {
                if h <= 1e-4 {
                    break;
                }
                h = (h * 0.5).max(1e-4);
                continue;
            }
        };
        if let Some(dom) = domain {
            if !dom.contains(q[0], q[1]) {
                break;
            }
        }
        let Ok(um) = u_matrix(f, q) else { break };
        if !um.is_rank_deficient() {
            break;
        }
        let mut k = um.kernel();
        if k[0] * d[0] + k[1] * d[1] < 0.0 {
            k = [-k[0], -k[1]];
        }
        let seg = norm2([q[0] - p[0], q[1] - p[1]]);
        if seg < 1e-3 * h {
            break;
        }
        length += seg;
        let turn = (d[0] * k[1] - d[1] * k[0]).abs().asin();
        let kappa = turn / seg;
        h = if kappa > 0.0 {
            (0.05 / kappa).clamp(1e-4, h_max)
        } else {
            h_max
        };
        out.push(q);
        p = q;
        d = k;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub resolution: usize,
    pub tol: f64,
    /// Cells with a corner below this |G| are seeded even without a sign change; 0 disables.
    pub coarse_tol: f64,
    pub with_index: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            resolution: 64,
            tol: 1e-10,
            coarse_tol: 1e-7,
            with_index: true,
        }
    }
}

/// Seeds from sign changes of G over grid cells, polishes, deduplicates, classifies and
/// continues singular curves.
pub fn scan_singular<F: ScalarField2 + ?Sized>(
    f: &F,
    dom: &Domain2,
    opts: &ScanOptions,
) -> Result<SingularReport> {
    let (x0, y0, x1, y1) = dom.bounding_box();
    let n = opts.resolution.max(2);
    let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
    let cell = hx.max(hy);
    let mut g = vec![[f64::NAN; 2]; (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (x0 + i as f64 * hx, y0 + j as f64 * hy);
            if let Ok(jet) = f.contact_jet(x, y) {
                g[j * (n + 1) + i] = jet.g;
            }
        }
    }
    let mut found: Vec<([f64; 2], f64)> = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let corners = [
                g[j * (n + 1) + i],
                g[j * (n + 1) + i + 1],
                g[(j + 1) * (n + 1) + i],
                g[(j + 1) * (n + 1) + i + 1],
            ];
            if corners
                .iter()
                .any(|c| !c[0].is_finite() || !c[1].is_finite())
            {
                continue;
            }
            let straddles = |k: usize| {
                let lo = corners.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min);
                let hi = corners
                    .iter()
                    .map(|c| c[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            let small = corners.iter().any(|c| norm2(*c) < opts.coarse_tol);
            if !(straddles(0) && straddles(1)) && !small {
                continue;
            }
            let seed = [x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy];
            if let Ok((p, r)) = newton_polish(f, seed, opts.tol, 2.0 * cell) {
                if !dom.contains(p[0], p[1]) {
                    continue;
                }
                if found
                    .iter()
                    .all(|(q, _)| norm2([q[0] - p[0], q[1] - p[1]]) > 2.0 * cell)
                {
                    found.push((p, r));
                }
            }
        }
    }
    let mut points = Vec::new();
    for (p, r) in found {
        let jet = f.contact_jet(p[0], p[1])?;
        let um = UMatrix(jet.u);
        let verdict = classify(f, p, 4.0 * cell)
            .map(|c| c.verdict)
            .unwrap_or(Verdict::Undetermined);
        let index = if opts.with_index && verdict == Verdict::Isolated {
            index(
                f,
                p,
                IndexPolicy {
                    initial_radius: cell,
                    ..IndexPolicy::default()
                },
            )
            .ok()
        } else {
            None
        };
        points.push(SingularPoint {
            location: p,
            residual: r,
            det: um.det(),
            u: um.0,
            verdict,
            index,
        });
    }
    let mut curves: Vec<Vec<[f64; 2]>> = Vec::new();
    let max_len = 4.0 * (x1 - x0 + y1 - y0);
    for k in 0..points.len() {
        if points[k].verdict != Verdict::OnCurve {
            continue;
        }
        let p = points[k].location;
        let covered = curves.iter().any(|c| {
            c.iter()
                .any(|q| norm2([q[0] - p[0], q[1] - p[1]]) < 2.0 * cell)
        });
        if covered {
            continue;
        }
        if let Ok(c) = trace_singular_curve(f, p, cell.min(0.1), max_len, Some(dom)) {
            curves.push(c);
        }
    }
    Ok(SingularReport { points, curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_plane, make_quadratic_family, GFunction};
    use crate::fixtures::{example1, example3, radial, tlog};

    fn mxy() -> crate::field::AnalyticField {
        make_quadratic_family(0.0, 1.0, GFunction::zero(), false).unwrap()
    }

    #[test]
    fn u_matrix_examples() {
        let u = u_matrix(&radial(1.0), [0.0, 0.0]).unwrap();
        assert_eq!(u.0, [[1.0, -1.0], [1.0, 1.0]]);
        assert_eq!(u.det(), 2.0);
        let u = u_matrix(&example3(3.0).unwrap(), [0.0, 0.0]).unwrap();
        assert_eq!(u.0, [[1.0, -1.0], [1.0, -1.0]]);
        assert_eq!(u.det(), 0.0);
        let u = u_matrix(&mxy(), [0.0, 0.0]).unwrap();
        assert_eq!(u.0, [[0.0, -2.0], [0.0, 0.0]]);
        assert_eq!(u.det(), 0.0);
    }

    #[test]
    fn scan_plane() {
        let dom = Domain2::rect(-3.0, -3.0, 3.0, 3.0).unwrap();
        let r = scan_singular(&make_plane(0.7, -1.3, 2.0), &dom, &ScanOptions::default()).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!(r.curves.is_empty());
        let p = r.points[0].location;
        assert!((p[0] - 1.3).abs() < 1e-10 && (p[1] - 0.7).abs() < 1e-10);
        assert_eq!(r.points[0].verdict, Verdict::Isolated);
        assert_eq!(r.points[0].index, Some(1));
    }

    #[test]
    fn scan_saddle_curve() {
        let dom = Domain2::rect(-2.0, -2.0, 2.0, 2.0).unwrap();
        let r = scan_singular(&mxy(), &dom, &ScanOptions::default()).unwrap();
        assert!(r
            .points
            .iter()
            .all(|p| p.verdict == Verdict::OnCurve && p.location[1].abs() < 1e-10));
        assert_eq!(r.curves.len(), 1);
        let c = &r.curves[0];
        assert!(c.iter().all(|p| p[1].abs() < 1e-8));
        let xmin = c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let xmax = c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        assert!(xmin < -1.8 && xmax > 1.8);
    }

    #[test]
    fn scan_example1() {
        let dom = Domain2::rect(-0.01, -0.35, 0.01, -0.06).unwrap();
        let r = scan_singular(
            &example1(),
            &dom,
            &ScanOptions {
                resolution: 3000,
                coarse_tol: 0.0,
                ..ScanOptions::default()
            },
        )
        .unwrap();
        for k in 1..=5 {
            let y = -1.0 / (k as f64 * PI);
            let hit = r
                .points
                .iter()
                .any(|p| p.location[0].abs() < 1e-8 && (p.location[1] - y).abs() < 1e-8);
            assert!(hit, "k = {k}: {:?}", r.points);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify(&radial(1.0), [0.0, 0.0], 0.1).unwrap();
        assert_eq!(c.verdict, Verdict::Isolated);
        assert_eq!(c.det, 2.0);
        let c = classify(&mxy(), [0.0, 0.0], 0.1).unwrap();
        assert_eq!(c.verdict, Verdict::OnCurve);
        let c = classify(&example3(3.0).unwrap(), [0.0, 0.0], 0.1).unwrap();
        assert_eq!(c.verdict, Verdict::Undetermined);
        assert_eq!(c.det, 0.0);
        assert_eq!(c.ring_neighbors, [0, 0, 0]);
        assert!(matches!(
            classify(&mxy(), [0.0, 1.0], 0.1),
            Err(Error::NotSingular { .. })
        ));
    }

    #[test]
    fn index_examples() {
        for m in [360, 720, 1440] {
            let pol = IndexPolicy {
                samples: m,
                ..IndexPolicy::default()
            };
            assert_eq!(
                index(&make_plane(2.0, -1.0, 0.0), [1.0, 2.0], pol).unwrap(),
                1
            );
            assert_eq!(index(&radial(1.0), [0.0, 0.0], pol).unwrap(), 1);
            assert_eq!(index(&radial(-1.0), [0.0, 0.0], pol).unwrap(), 1);
            assert_eq!(index(&tlog(), [0.0, 0.0], pol).unwrap(), 1);
        }
    }

    #[test]
    fn index_is_zero_for_example3() {
        let w = winding_number(&example3(3.0).unwrap(), [0.0, 0.0], 0.05, 1440).unwrap();
        assert!(w.abs() < 1e-6, "{w}");
    }

    #[test]
    fn hessian_vanishing_examples() {
        assert_eq!(
            hessian_vanishing_check(&make_plane(1.0, 2.0, 0.0), [-2.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(hessian_vanishing_check(&tlog(), [0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(
            hessian_vanishing_check(&radial(1.0), [0.0, 0.0]).unwrap(),
            1.0
        );
        assert!(hessian_vanishing_check(&radial(1.0), [0.5, 0.0]).is_err());
    }

    #[test]
    fn curve_examples() {
        let c = trace_singular_curve(&mxy(), [1.0, 0.0], 0.05, 2.0, None).unwrap();
        assert!(c.iter().all(|p| p[1].abs() < 1e-8));
        assert!(c.len() > 20);
        let f = make_quadratic_family(0.0, 1.0, GFunction::square(), false).unwrap();
        let c = trace_singular_curve(&f, [0.0, 0.0], 0.05, 2.0, None).unwrap();
        assert!(c.iter().all(|p| (p[0] - p[1]).abs() < 1e-6));
        assert!(c.iter().any(|p| p[0] > 1.0) && c.iter().any(|p| p[0] < -1.0));
        assert!(matches!(
            trace_singular_curve(&radial(1.0), [0.0, 0.0], 0.05, 1.0, None),
            Err(Error::RankFull { .. })
        ));
    }

    #[test]
    fn newton_converges_quadratically() {
        let f = crate::field::AnalyticField::entire("cubic", |x, y| {
            crate::field::FieldSample::new(
                x * x * x / 3.0 + y * y / 2.0 + x * y,
                [x * x + y, y + x],
                [[2.0 * x, 1.0], [1.0, 1.0]],
            )
        });
        // G = (x² + y − y, y + x + x) = (x², y + 2x): root at origin is degenerate, use a shifted field
        let g = crate::field::AnalyticField::entire("shift", move |x, y| {
            let s = f.eval(x, y).unwrap();
            crate::field::FieldSample::new(s.value - x, [s.grad[0] - 1.0, s.grad[1]], s.hess)
        });
        // root: x² = 1, y = −2x  → (1, −2)
        let mut p = [1.3, -2.4];
        let mut errs = Vec::new();
        for _ in 0..4 {
            let jet = g.contact_jet(p[0], p[1]).unwrap();
            let s = newton_step(&jet, 10.0);
            p = [p[0] + s[0], p[1] + s[1]];
            errs.push(norm2([p[0] - 1.0, p[1] + 2.0]));
        }
        let order = (errs[2].ln() / errs[1].ln()).abs();
        assert!(order >= 1.8, "{errs:?}");
    }

    #[test]
    fn normal_flips_across_curve() {
        let f = make_quadratic_family(0.6, 0.8, GFunction::sin(), false).unwrap();
        let c = trace_singular_curve(
            &f,
            polish_onto_singular_set(&f, [0.0, 0.0], 1e-12).unwrap_or([0.0, 0.0]),
            0.05,
            0.5,
            None,
        );
        let p = match c {
            Ok(c) => c[c.len() / 2],
            Err(_) => return,
        };
        let um = u_matrix(&f, p).unwrap();
        let k = um.kernel();
        let nrm = [-k[1], k[0]];
        let eps = 1e-6;
        let a =
            crate::curvature::first_order_data(&f, p[0] + eps * nrm[0], p[1] + eps * nrm[1], None)
                .unwrap();
        let b =
            crate::curvature::first_order_data(&f, p[0] - eps * nrm[0], p[1] - eps * nrm[1], None)
                .unwrap();
        let dot = a.n[0] * b.n[0] + a.n[1] * b.n[1];
        assert!((dot + 1.0).abs() < 1e-8, "{dot}");
    }
}
