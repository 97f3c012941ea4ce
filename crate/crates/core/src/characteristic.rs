//! Characteristic curves: integration, curvature, arrival at and extension through S(u).

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{SMatrix, SVector};
use serde::Serialize;

use crate::curvature::{effective_tol_sing, first_order_from_sample, mean_curvature_from_sample};
use crate::error::{Error, Result};
use crate::field::ScalarField2;
use crate::ode::{dopri5_step, error_norm, step_factor, Tolerances};
use crate::quadrature::Domain2;
use crate::singular::{classify, polish_onto_singular_set, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub theta: f64,
    #[serde(rename = "H")]
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    ReachedBoundary,
    ReachedSingular { point: [f64; 2], arclength: f64 },
    MaxArclength,
    StepFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub orientation: f64,
    pub samples: Vec<TraceSample>,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub max_arclength: f64,
    pub tol: Tolerances,
    pub domain: Option<Domain2>,
    pub tol_sing: Option<f64>,
    /// ReachedSingular fires when D drops below `stop_factor · tol_sing`.
    pub stop_factor: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl TraceOptions {
    /// atol = rtol = `tol`; the step cap shrinks like tol^{2/5} so sampled curvature tracks the tolerance.
    pub fn with_tolerance(tol: f64) -> Self {
        TraceOptions {
            tol: Tolerances {
                atol: tol,
                rtol: tol,
            },
            max_step: (40.0 * tol.powf(0.4)).min(0.1),
            ..TraceOptions::default()
        }
    }
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            max_arclength: 10.0,
            tol: Tolerances::default(),
            domain: None,
            tol_sing: None,
            stop_factor: 100.0,
            initial_step: 1e-2,
            max_step: 0.01,
            min_step: 1e-13,
            max_steps: 500_000,
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

struct Point {
    x: f64,
    y: f64,
    u: f64,
    d: f64,
    theta: f64,
    h: f64,
    tol_sing: f64,
}

fn probe<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64, opts: &TraceOptions) -> Result<Point> {
    if let Some(dom) = &opts.domain {
        if !dom.contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
    }
    let s = f.eval(x, y)?;
    let tol_sing = effective_tol_sing(&s, x, y, opts.tol_sing);
    let fo = first_order_from_sample(&s, x, y, tol_sing)?;
    let h = mean_curvature_from_sample(&s, x, y, tol_sing)?;
    Ok(Point {
        x,
        y,
        u: s.value,
        d: fo.d,
        theta: fo.theta,
        h,
        tol_sing,
    })
}

/// Integrates the characteristic system from `start` in the direction `orientation · N⊥`.
pub fn trace<F: ScalarField2 + ?Sized>(
    f: &F,
    start: [f64; 2],
    orientation: f64,
    opts: &TraceOptions,
) -> Result<Trace> {
    let o = if orientation < 0.0 { -1.0 } else { 1.0 };
    let p0 = match probe(f, start[0], start[1], opts) {
        Ok(p) => p,
        Err(Error::Singular { d }) => return Err(Error::StartSingular { d }),
        Err(e) => return Err(e),
    };
    let mut samples = vec![TraceSample {
        s: 0.0,
        x: p0.x,
        y: p0.y,
        u: p0.u,
        theta: p0.theta,
        h: p0.h,
    }];
    let mut ds = Vec::new();
    ds.push(p0.d);
    let mut state = [p0.x, p0.y, p0.u, p0.theta];
    let mut s = 0.0;
    let mut h = opts.initial_step.min(opts.max_step);
    let mut stop_tol = opts.stop_factor * p0.tol_sing;
    let mut rhs = |_: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let p = probe(f, y[0], y[1], opts)?;
        let (sn, cs) = y[3].sin_cos();
        Ok([o * sn, -o * cs, o * (y[0] * cs + y[1] * sn), -o * p.h])
    };
    let mut steps = 0usize;
    let termination = loop {
        if s >= opts.max_arclength {
            break Termination::MaxArclength;
        }
        steps += 1;
        if steps > opts.max_steps {
            break Termination::StepFailure;
        }
        let remaining = opts.max_arclength - s;
        let hh = h.min(remaining).min(opts.max_step);
        let reject = |h: &mut f64| *h = hh * 0.5;
        let step = dopri5_step(&mut rhs, s, &state, hh);
        let (next, err) = match step {
            Ok(v) => v,
            Err(Error::OutOfDomain { .. }) => {
                reject(&mut h);
                if h < 1e-10 * (1.0 + s) {
                    break Termination::ReachedBoundary;
                }
                continue;
            }
            Err(Error::Singular { .. }) => {
                reject(&mut h);
                if h < opts.min_step {
                    break singular_stop(&samples, &ds);
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let norm = error_norm(&err, &state, &next, opts.tol);
        if !norm.is_finite() || norm > 1.0 {
            h = hh * step_factor(if norm.is_finite() { norm } else { 1e10 });
            if h < opts.min_step {
                break Termination::StepFailure;
            }
            continue;
        }
        let landed = match probe(f, next[0], next[1], opts) {
            Ok(p) => p,
            Err(Error::OutOfDomain { .. }) => {
                reject(&mut h);
                if h < 1e-10 * (1.0 + s) {
                    break Termination::ReachedBoundary;
                }
                continue;
            }
            Err(Error::Singular { .. }) => {
                reject(&mut h);
                if h < opts.min_step {
                    break singular_stop(&samples, &ds);
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let flip = wrap_angle(landed.theta - next[3]).abs() > PI / 2.0;
        let jump = (next[3] - state[3]).abs() > PI / 2.0;
        if flip || jump {
            reject(&mut h);
            if h < opts.min_step {
                break singular_stop(&samples, &ds);
            }
            continue;
        }
        s += hh;
        state = next;
        samples.push(TraceSample {
            s,
            x: next[0],
            y: next[1],
            u: next[2],
            theta: next[3],
            h: landed.h,
        });
        ds.push(landed.d);
        stop_tol = stop_tol.max(opts.stop_factor * landed.tol_sing);
        if landed.d < stop_tol {
            break singular_stop(&samples, &ds);
        }
        h = hh * step_factor(norm);
    };
    Ok(Trace {
        orientation: o,
        samples,
        termination,
    })
}

/// Estimates where D reaches zero from the last samples.
fn singular_stop(samples: &[TraceSample], ds: &[f64]) -> Termination {
    let n = samples.len();
    let last = samples[n - 1];
    if n < 3 {
        return Termination::ReachedSingular {
            point: [last.x, last.y],
            arclength: last.s,
        };
    }
    let prev = samples[n - 2];
    let slope = (ds[n - 1] - ds[n - 2]) / (last.s - prev.s);
    let extra = if slope < 0.0 { ds[n - 1] / -slope } else { 0.0 };
    let se = last.s + extra;
    let pts = &samples[n - 3..];
    let lag = |vals: [f64; 3]| {
        let mut acc = 0.0;
        for i in 0..3 {
            let mut w = 1.0;
            for j in 0..3 {
                if i != j {
                    w *= (se - pts[j].s) / (pts[i].s - pts[j].s);
                }
            }
            acc += w * vals[i];
        }
        acc
    };
    let x = lag([pts[0].x, pts[1].x, pts[2].x]);
    let y = lag([pts[0].y, pts[1].y, pts[2].y]);
    Termination::ReachedSingular {
        point: [x, y],
        arclength: se,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StraightnessReport {
    /// Maximum distance of samples from the end-to-end chord, per unit arclength.
    pub max_chord_deviation: f64,
    /// |sin| of the angle between the end tangents and the chord.
    pub endpoint_collinearity: f64,
}

pub fn straightness_report(t: &Trace) -> Result<StraightnessReport> {
    let n = t.samples.len();
    if n < 3 {
        return Err(Error::BadParams(
            "straightness needs at least 3 samples".into(),
        ));
    }
    let (a, b) = (t.samples[0], t.samples[n - 1]);
    let (cx, cy) = (b.x - a.x, b.y - a.y);
    let len = cx.hypot(cy);
    let arclength = b.s - a.s;
    if len == 0.0 || arclength <= 0.0 {
        return Err(Error::BadParams("degenerate trace".into()));
    }
    let dev = t
        .samples
        .iter()
        .map(|p| ((p.x - a.x) * cy - (p.y - a.y) * cx).abs() / len)
        .fold(0.0f64, f64::max);
    let dir = |p: &TraceSample, q: &TraceSample| {
        let (dx, dy) = (q.x - p.x, q.y - p.y);
        let l = dx.hypot(dy);
        ((dx * cy - dy * cx) / (l * len)).abs()
    };
    let col = dir(&t.samples[0], &t.samples[1]).max(dir(&t.samples[n - 2], &t.samples[n - 1]));
    Ok(StraightnessReport {
        max_chord_deviation: dev / arclength,
        endpoint_collinearity: col,
    })
}

/// Per-sample (κ, −H) with κ measured relative to the trace orientation.
pub fn curvature_of_trace(t: &Trace) -> Result<Vec<(f64, f64)>> {
    let n = t.samples.len();
    if n < 5 {
        return Err(Error::BadParams(
            "curvature needs at least 5 samples".into(),
        ));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - 5);
        let win = &t.samples[lo..lo + 5];
        let s0 = t.samples[i].s;
        let scale = (win[4].s - win[0].s).max(f64::MIN_POSITIVE);
        let m = SMatrix::<f64, 5, 5>::from_fn(|r, c| ((win[r].s - s0) / scale).powi(c as i32));
        let lu = m.lu();
        let fit = |vals: SVector<f64, 5>| {
            lu.solve(&vals)
                .map(|c| (c[1] / scale, 2.0 * c[2] / (scale * scale)))
        };
        let xs = SVector::<f64, 5>::from_fn(|r, _| win[r].x);
        let ys = SVector::<f64, 5>::from_fn(|r, _| win[r].y);
        let ((x1, x2), (y1, y2)) = match (fit(xs), fit(ys)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::BadParams("repeated arclength samples".into())),
        };
        let kappa = (x1 * y2 - y1 * x2) / (x1 * x1 + y1 * y1).powf(1.5);
        out.push((t.orientation * kappa, -t.samples[i].h));
    }
    Ok(out)
}

/// Least-squares direction of the last `k` samples, oriented along travel, plus relative residual.
pub fn limiting_tangent(t: &Trace, k: usize) -> Result<[f64; 2]> {
    let n = t.samples.len();
    if n < 3 {
        return Err(Error::AmbiguousTangent {
            residual: f64::INFINITY,
        });
    }
    let win = &t.samples[n.saturating_sub(k)..];
    let m = win.len() as f64;
    let (mx, my) = (
        win.iter().map(|p| p.x).sum::<f64>() / m,
        win.iter().map(|p| p.y).sum::<f64>() / m,
    );
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in win {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let ang = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let mut d = [ang.cos(), ang.sin()];
    let (first, last) = (win[0], win[win.len() - 1]);
    let span = (last.x - first.x).hypot(last.y - first.y);
    if (last.x - first.x) * d[0] + (last.y - first.y) * d[1] < 0.0 {
        d = [-d[0], -d[1]];
    }
    let resid = win
        .iter()
        .map(|p| ((p.x - mx) * d[1] - (p.y - my) * d[0]).abs())
        .fold(0.0f64, f64::max);
    let rel = if span > 0.0 {
        resid / span
    } else {
        f64::INFINITY
    };
    if rel > 1e-3 {
        return Err(Error::AmbiguousTangent { residual: rel });
    }
    Ok(d)
}

/// Continues a trace that stopped on a singular curve onto the far side.
pub fn extend_through_singularity<F: ScalarField2 + ?Sized>(
    f: &F,
    t: &Trace,
    continuation: f64,
    opts: &TraceOptions,
) -> Result<Trace> {
    let Termination::ReachedSingular { point, arclength } = t.termination else {
        return Err(Error::BadParams(
            "trace did not terminate at a singular point".into(),
        ));
    };
    let p = polish_onto_singular_set(f, point, 1e-12).map_err(|_| Error::NotOnSingularCurve)?;
    let scan = 1e-2 * (1.0 + p[0].hypot(p[1]));
    let c = classify(f, p, scan).map_err(|_| Error::NotOnSingularCurve)?;
    if c.verdict != Verdict::OnCurve {
        return Err(Error::NotOnSingularCurve);
    }
    let d = limiting_tangent(t, 10)?;
    let mut delta = 1e-7 * (1.0 + p[0].hypot(p[1]));
    let (q, q_data) = loop {
        let q = [p[0] + delta * d[0], p[1] + delta * d[1]];
        if let Ok(pt) = probe(f, q[0], q[1], opts) {
            if pt.d > 10.0 * opts.stop_factor * pt.tol_sing {
                break (q, pt);
            }
        }
        delta *= 2.0;
        if delta > 1e-2 {
            return Err(Error::AmbiguousTangent { residual: delta });
        }
    };
    let (sn, cs) = q_data.theta.sin_cos();
    let o2 = if sn * d[0] - cs * d[1] >= 0.0 {
        1.0
    } else {
        -1.0
    };
    let sub = TraceOptions {
        max_arclength: continuation,
        ..opts.clone()
    };
    let t2 = trace(f, q, o2, &sub)?;
    let target = t.samples.last().map(|s| s.theta).unwrap_or(0.0);
    let parity = if o2 == t.orientation { 0.0 } else { PI };
    let base = t2.samples[0].theta + parity;
    let offset = parity + TAU * ((target - base) / TAU).round();
    let s_shift = arclength + delta;
    let mut samples = t.samples.clone();
    samples.extend(t2.samples.iter().map(|smp| TraceSample {
        s: smp.s + s_shift,
        theta: smp.theta + offset,
        ..*smp
    }));
    let termination = match t2.termination {
        Termination::ReachedSingular { point, arclength } => Termination::ReachedSingular {
            point,
            arclength: arclength + s_shift,
        },
        other => other,
    };
    Ok(Trace {
        orientation: t.orientation,
        samples,
        termination,
    })
}

impl Trace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x,y,u,theta,H\n");
        for p in &self.samples {
            let _ = writeln!(out, "{},{},{},{},{},{}", p.s, p.x, p.y, p.u, p.theta, p.h);
        }
        let _ = match self.termination {
            Termination::ReachedSingular { point, arclength } => writeln!(
                out,
                "# termination=ReachedSingular x={} y={} s={}",
                point[0], point[1], arclength
            ),
            other => writeln!(out, "# termination={other:?}"),
        };
        out
    }

    pub fn arclength(&self) -> f64 {
        self.samples.last().map(|s| s.s).unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::first_order_data;
    use crate::families::{make_plane, make_quadratic_family, GFunction};
    use crate::fixtures::{radial, tlog};
    use std::f64::consts::SQRT_2;

    fn mxy() -> crate::field::AnalyticField {
        make_quadratic_family(0.0, 1.0, GFunction::zero(), false).unwrap()
    }

    #[test]
    fn plane_trace_reaches_origin() {
        let t = trace(
            &make_plane(0.0, 0.0, 0.0),
            [1.0, 0.0],
            -1.0,
            &TraceOptions::default(),
        )
        .unwrap();
        match t.termination {
            Termination::ReachedSingular { point, arclength } => {
                assert!(point[0].abs() < 1e-6 && point[1].abs() < 1e-6, "{point:?}");
                assert!((arclength - 1.0).abs() < 1e-6, "{arclength}");
            }
            other => panic!("{other:?}"),
        }
        assert!(t.samples.iter().all(|p| p.y.abs() < 1e-12));
    }

    #[test]
    fn vertical_trace_on_saddle() {
        let t = trace(&mxy(), [1.0, 1.0], -1.0, &TraceOptions::default()).unwrap();
        match t.termination {
            Termination::ReachedSingular { point, arclength } => {
                assert!((point[0] - 1.0).abs() < 1e-9 && point[1].abs() < 1e-6);
                assert!((arclength - 1.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        assert!(t.samples.iter().all(|p| (p.x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn start_singular() {
        assert!(matches!(
            trace(&mxy(), [0.3, 0.0], 1.0, &TraceOptions::default()),
            Err(Error::StartSingular { .. })
        ));
    }

    #[test]
    fn spiral_theta_follows_curvature() {
        let opts = TraceOptions {
            max_arclength: 2.0,
            max_step: 0.01,
            ..TraceOptions::default()
        };
        let t = trace(&radial(1.0), [1.0, 0.0], 1.0, &opts).unwrap();
        assert_eq!(t.termination, Termination::MaxArclength);
        // θ(s) − θ(0) = −∫ H ds, trapezoid over samples
        let mut integral = 0.0;
        for w in t.samples.windows(2) {
            integral += 0.5 * (w[0].h + w[1].h) * (w[1].s - w[0].s);
        }
        let dtheta = t.samples.last().unwrap().theta - t.samples[0].theta;
        assert!((dtheta + integral).abs() < 1e-4, "{dtheta} {integral}");
        for p in &t.samples {
            let r = p.x.hypot(p.y);
            assert!((p.h - 1.0 / (SQRT_2 * r)).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_agrees_with_pointwise() {
        let opts = TraceOptions {
            max_arclength: 3.0,
            ..TraceOptions::default()
        };
        let f = radial(1.0);
        let t = trace(&f, [0.5, 0.7], -1.0, &opts).unwrap();
        // pointwise θ amplifies a position error δ by ‖U‖/D
        for p in &t.samples {
            let fo = first_order_data(&f, p.x, p.y, None).unwrap();
            let bound = 10.0 * opts.tol.atol * (1.0 + 2.0 / fo.d);
            assert!(wrap_angle(p.theta - fo.theta).abs() < bound, "{p:?}");
        }
        for w in t.samples.windows(2) {
            let ds = w[1].s - w[0].s;
            assert!(ds > 0.0);
            let sag = w[0].h.abs().max(w[1].h.abs()).powi(2) * ds.powi(3) / 24.0;
            assert!(((w[1].x - w[0].x).hypot(w[1].y - w[0].y) - ds).abs() < 1.01 * sag + 1e-8);
        }
    }

    #[test]
    fn arrival_times() {
        let opts = TraceOptions::default();
        for (f, r0, expect) in [
            (make_plane(0.0, 0.0, 0.0), 0.8, 0.8),
            (radial(1.0), 0.8, SQRT_2 * 0.8),
            (radial(-1.0), 0.8, SQRT_2 * 0.8),
        ] {
            let ang = 0.3f64;
            let start = [r0 * ang.cos(), r0 * ang.sin()];
            let o = [1.0, -1.0]
                .into_iter()
                .find(|&o| {
                    let fo = first_order_data(&f, start[0], start[1], None).unwrap();
                    o * (fo.nperp[0] * start[0] + fo.nperp[1] * start[1]) < 0.0
                })
                .unwrap();
            let t = trace(&f, start, o, &opts).unwrap();
            match t.termination {
                Termination::ReachedSingular { point, arclength } => {
                    assert!(point[0].hypot(point[1]) < 1e-5);
                    assert!((arclength - expect).abs() < 1e-6, "{arclength} vs {expect}");
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn straightness_examples() {
        let opts = TraceOptions {
            max_arclength: 3.0,
            ..TraceOptions::default()
        };
        let t = trace(&mxy(), [1.0, 0.5], 1.0, &opts).unwrap();
        assert!(straightness_report(&t).unwrap().max_chord_deviation < 1e-8);
        let f = make_quadratic_family(0.0, 1.0, GFunction::sin(), false).unwrap();
        let t = trace(&f, [1.0, 0.5], 1.0, &opts).unwrap();
        assert!(straightness_report(&t).unwrap().max_chord_deviation < 1e-8);
        let t = trace(&radial(1.0), [1.0, 0.0], 1.0, &opts).unwrap();
        assert!(straightness_report(&t).unwrap().max_chord_deviation > 1e-3);
    }

    #[test]
    fn curvature_examples() {
        let opts = TraceOptions {
            max_arclength: 1.0,
            ..TraceOptions::default()
        };
        let t = trace(&make_plane(0.0, 0.0, 0.0), [1.0, 0.5], 1.0, &opts).unwrap();
        for (k, mh) in curvature_of_trace(&t).unwrap() {
            assert!(k.abs() < 1e-8 && mh.abs() < 1e-12);
        }
        for o in [1.0, -1.0] {
            let t = trace(
                &radial(1.0),
                [1.0, 0.0],
                o,
                &TraceOptions {
                    max_arclength: 0.6,
                    ..opts.clone()
                },
            )
            .unwrap();
            let pairs = curvature_of_trace(&t).unwrap();
            assert!((pairs[0].0 + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
            let gap = pairs
                .iter()
                .map(|(k, mh)| (k - mh).abs())
                .fold(0.0, f64::max);
            assert!(gap < 1e-5, "orientation {o}: {gap}");
        }
    }

    #[test]
    fn curvature_gap_shrinks_with_tolerance() {
        let gap = |tol: f64| {
            let opts = TraceOptions {
                max_arclength: 1.0,
                ..TraceOptions::with_tolerance(tol)
            };
            let t = trace(&radial(1.0), [1.0, 0.0], 1.0, &opts).unwrap();
            curvature_of_trace(&t)
                .unwrap()
                .iter()
                .map(|(k, mh)| (k - mh).abs())
                .fold(0.0, f64::max)
        };
        for tol in [1e-8, 1e-9] {
            let (g1, g2) = (gap(tol), gap(0.5 * tol));
            assert!(g2 <= 0.5 * g1, "{tol}: {g1} {g2}");
        }
    }

    #[test]
    fn extension_on_saddle() {
        let f = mxy();
        let t = trace(&f, [1.0, 1.0], -1.0, &TraceOptions::default()).unwrap();
        let e = extend_through_singularity(&f, &t, 1.0, &TraceOptions::default()).unwrap();
        let last = e.samples.last().unwrap();
        assert!((last.y + last.s - 1.0).abs() < 1e-9, "{last:?}");
        assert!((last.s - 2.0).abs() < 1e-4);
        assert!(e.samples.iter().all(|p| (p.x - 1.0).abs() < 1e-9));
        assert!(straightness_report(&e).unwrap().max_chord_deviation < 1e-8);
        for w in e.samples.windows(2) {
            assert!((w[1].theta - w[0].theta).abs() < 1e-6);
        }
    }

    #[test]
    fn extension_on_square_family() {
        let f = make_quadratic_family(0.0, 1.0, GFunction::square(), false).unwrap();
        let start = [0.5, 1.5];
        let fo = first_order_data(&f, start[0], start[1], None).unwrap();
        let o = if fo.nperp[1] < 0.0 { 1.0 } else { -1.0 };
        let t = trace(&f, start, o, &TraceOptions::default()).unwrap();
        assert!(matches!(t.termination, Termination::ReachedSingular { .. }));
        let e = extend_through_singularity(&f, &t, 1.0, &TraceOptions::default()).unwrap();
        assert!(e.samples.last().unwrap().y < 0.0);
        assert!(straightness_report(&e).unwrap().max_chord_deviation < 1e-6);
    }

    #[test]
    fn extension_rejects_isolated() {
        let f = make_plane(0.0, 0.0, 0.0);
        let t = trace(&f, [1.0, 0.0], -1.0, &TraceOptions::default()).unwrap();
        assert_eq!(
            extend_through_singularity(&f, &t, 1.0, &TraceOptions::default()),
            Err(Error::NotOnSingularCurve)
        );
    }

    #[test]
    fn tlog_spirals() {
        let t = trace(
            &tlog(),
            [0.5, 0.0],
            -1.0,
            &TraceOptions {
                max_arclength: 5.0,
                ..TraceOptions::default()
            },
        )
        .unwrap();
        let first = t.samples[0].theta;
        let last = t.samples.last().unwrap();
        assert!(last.x.hypot(last.y) < 0.5);
        assert!((last.theta - first).abs() > 1.0);
    }

    #[test]
    fn csv_footer() {
        let t = trace(&mxy(), [1.0, 1.0], -1.0, &TraceOptions::default()).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("s,x,y,u,theta,H\n"));
        assert!(csv
            .trim_end()
            .lines()
            .last()
            .unwrap()
            .starts_with("# termination=ReachedSingular"));
    }
}
