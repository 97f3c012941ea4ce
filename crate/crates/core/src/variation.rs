//! p-area energy, first and second variation, the energy-Hessian cross-check, self-adjointness of e₁²
//! and the perturbation minimizing check.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curvature::{first_order_data, p_area, p_mean_curvature};
use crate::error::{Error, Result};
use crate::field::{FieldSample, ScalarField2};
use crate::quadrature::{simpson_rect, Domain2};

/// Webster curvature W and Im A₁₁ of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ambient {
    pub w: f64,
    pub im_a11: f64,
}

pub const HEISENBERG: Ambient = Ambient {
    w: 0.0,
    im_a11: 0.0,
};

/// Compactly supported perturbation with its support rectangle [x0, x1] × [y0, y1].
#[derive(Clone)]
pub struct VariationField {
    field: Arc<dyn ScalarField2>,
    pub support: [f64; 4],
}

impl std::fmt::Debug for VariationField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "VariationField({}, {:?})",
            self.field.name(),
            self.support
        )
    }
}

fn bump1(t: f64) -> (f64, f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - t * t;
    let b = (-1.0 / q).exp();
    let b1 = b * (-2.0 * t / (q * q));
    let b2 = b * (4.0 * t * t / (q * q * q * q) - 2.0 / (q * q) - 8.0 * t * t / (q * q * q));
    (b, b1, b2)
}

struct Bump {
    support: [f64; 4],
    amp: f64,
}

impl ScalarField2 for Bump {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        let [x0, y0, x1, y1] = self.support;
        let (cx, cy, rx, ry) = (
            0.5 * (x0 + x1),
            0.5 * (y0 + y1),
            0.5 * (x1 - x0),
            0.5 * (y1 - y0),
        );
        let (a, a1, a2) = bump1((x - cx) / rx);
        let (b, b1, b2) = bump1((y - cy) / ry);
        let k = self.amp * std::f64::consts::E * std::f64::consts::E;
        Ok(FieldSample::new(
            k * a * b,
            [k * a1 * b / rx, k * a * b1 / ry],
            [
                [k * a2 * b / (rx * rx), k * a1 * b1 / (rx * ry)],
                [k * a1 * b1 / (rx * ry), k * a * b2 / (ry * ry)],
            ],
        ))
    }

    fn name(&self) -> String {
        format!("bump({:?}, {})", self.support, self.amp)
    }
}

impl VariationField {
    /// Wraps `field`, checking that it and its gradient vanish on the support boundary.
    pub fn new(field: impl ScalarField2 + 'static, support: [f64; 4]) -> Result<Self> {
        let [x0, y0, x1, y1] = support;
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::SupportViolation(format!(
                "empty support {support:?}"
            )));
        }
        let m = 64;
        for k in 0..=m {
            let t = k as f64 / m as f64;
            for (x, y) in [
                (x0 + t * (x1 - x0), y0),
                (x0 + t * (x1 - x0), y1),
                (x0, y0 + t * (y1 - y0)),
                (x1, y0 + t * (y1 - y0)),
            ] {
                let s = field.eval(x, y)?;
                if s.value.abs() > 1e-12 || s.grad[0].abs() > 1e-12 || s.grad[1].abs() > 1e-12 {
                    return Err(Error::SupportViolation(format!(
                        "v does not vanish at ({x}, {y})"
                    )));
                }
            }
        }
        Ok(VariationField {
            field: Arc::new(field),
            support,
        })
    }

    /// amp·e²·b(s)·b(t) with b(t) = exp(−1/(1 − t²)) in the rescaled support; maximum `amp`.
    pub fn bump(support: [f64; 4], amp: f64) -> Result<Self> {
        Self::new(Bump { support, amp }, support)
    }

    pub fn zero(support: [f64; 4]) -> Result<Self> {
        Self::bump(support, 0.0)
    }

    /// `count` bumps on random sub-rectangles of `within` with amplitudes in [−1, 1].
    pub fn random_bumps(within: [f64; 4], count: usize, seed: u64) -> Result<Vec<Self>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [x0, y0, x1, y1] = within;
        (0..count)
            .map(|_| {
                let (w, h) = (x1 - x0, y1 - y0);
                let a = rng.random_range(x0..x0 + 0.5 * w);
                let b = rng.random_range(y0..y0 + 0.5 * h);
                let c = rng.random_range(a + 0.25 * w..(a + 0.5 * w).min(x1));
                let d = rng.random_range(b + 0.25 * h..(b + 0.5 * h).min(y1));
                let amp =
                    rng.random_range(0.2..1.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                Self::bump([a, b, c, d], amp)
            })
            .collect()
    }

    /// Support strictly inside `dom` and clear of the singular set of `f`.
    pub fn check_admissible<F: ScalarField2 + ?Sized>(&self, f: &F, dom: &Domain2) -> Result<()> {
        let [x0, y0, x1, y1] = self.support;
        let (bx0, by0, bx1, by1) = dom.bounding_box();
        if !(x0 > bx0 && y0 > by0 && x1 < bx1 && y1 < by1) {
            return Err(Error::SupportViolation(format!(
                "support {:?} not strictly inside the domain",
                self.support
            )));
        }
        let m = 32;
        for j in 0..=m {
            for i in 0..=m {
                let x = x0 + (x1 - x0) * i as f64 / m as f64;
                let y = y0 + (y1 - y0) * j as f64 / m as f64;
                if !dom.contains(x, y) {
                    return Err(Error::SupportViolation(format!(
                        "support leaves the domain at ({x}, {y})"
                    )));
                }
                match first_order_data(f, x, y, None) {
                    Ok(d) if d.d > 1e-6 => {}
                    _ => {
                        return Err(Error::SupportViolation(format!(
                            "support meets the singular set near ({x}, {y})"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn integrate<G: Fn(f64, f64) -> Result<f64>>(&self, cells: usize, g: G) -> Result<f64> {
        let [x0, y0, x1, y1] = self.support;
        simpson_rect(&g, x0, y0, x1, y1, cells, cells)
    }
}

impl ScalarField2 for VariationField {
    fn eval(&self, x: f64, y: f64) -> Result<FieldSample> {
        let [x0, y0, x1, y1] = self.support;
        if x <= x0 || x >= x1 || y <= y0 || y >= y1 {
            return Ok(FieldSample::new(0.0, [0.0; 2], [[0.0; 2]; 2]));
        }
        self.field.eval(x, y)
    }

    fn name(&self) -> String {
        self.field.name()
    }
}

/// The plane direction of e₁ at a nonsingular point: (−(u_y + x), u_x − y)/D = −N⊥.
pub fn e1_direction<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64) -> Result<[f64; 2]> {
    let d = first_order_data(f, x, y, None)?;
    Ok([-d.nperp[0], -d.nperp[1]])
}

/// e₁(g) by a 5-point central difference of step `h`.
pub fn e1_derivative<F, G>(f: &F, g: &G, x: f64, y: f64, h: f64) -> Result<f64>
where
    F: ScalarField2 + ?Sized,
    G: Fn(f64, f64) -> Result<f64> + ?Sized,
{
    let d = e1_direction(f, x, y)?;
    let at = |k: f64| g(x + k * h * d[0], y + k * h * d[1]);
    Ok((-at(2.0)? + 8.0 * at(1.0)? - 8.0 * at(-1.0)? + at(-2.0)?) / (12.0 * h))
}

/// e₁(e₁(g)), nested differences.
pub fn e1_second<F, G>(f: &F, g: &G, x: f64, y: f64, h: f64) -> Result<f64>
where
    F: ScalarField2 + ?Sized,
    G: Fn(f64, f64) -> Result<f64> + ?Sized,
{
    let inner = |a: f64, b: f64| e1_derivative(f, g, a, b, h);
    e1_derivative(f, &inner, x, y, h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaData {
    pub alpha: f64,
    pub e1_alpha: f64,
}

/// α = −1/D and e₁(α).
pub fn alpha_data<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64, h: f64) -> Result<AlphaData> {
    let alpha = -1.0 / first_order_data(f, x, y, None)?.d;
    let g = |a: f64, b: f64| first_order_data(f, a, b, None).map(|d| -1.0 / d.d);
    Ok(AlphaData {
        alpha,
        e1_alpha: e1_derivative(f, &g, x, y, h)?,
    })
}

/// −4e₁(α) − 4α² in closed form: 4{AB(u_xx − u_yy) + (B² − A²)u_xy}/D⁴ with A = u_x − y, B = u_y + x.
pub fn bracket_closed_form<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64) -> Result<f64> {
    let s = f.eval(x, y)?;
    let d = first_order_data(f, x, y, None)?.d;
    let [a, b] = s.contact_map(x, y);
    let h = s.hess;
    Ok(4.0 * (a * b * (h[0][0] - h[1][1]) + (b * b - a * a) * h[0][1]) / d.powi(4))
}

fn fd_step(dom: &Domain2) -> f64 {
    1e-4 * dom.diameter()
}

/// E(u) = ∫∫ D dx dy.
pub fn energy<F: ScalarField2 + ?Sized>(f: &F, dom: &Domain2, cells: usize) -> Result<f64> {
    p_area(f, dom, cells)
}

/// D(u + εv) − D(u) without cancellation.
fn delta_d(g: [f64; 2], d0: f64, w: [f64; 2], eps: f64) -> f64 {
    let gp = [g[0] + eps * w[0], g[1] + eps * w[1]];
    let dp = gp[0].hypot(gp[1]);
    let num = 2.0 * eps * (g[0] * w[0] + g[1] * w[1]) + eps * eps * (w[0] * w[0] + w[1] * w[1]);
    if dp + d0 == 0.0 {
        0.0
    } else {
        num / (dp + d0)
    }
}

/// E(u + εv) − E(u), integrated over the support of v.
pub fn energy_difference<F: ScalarField2 + ?Sized>(
    f: &F,
    v: &VariationField,
    eps: f64,
    cells: usize,
) -> Result<f64> {
    v.integrate(cells, |x, y| {
        let s = f.eval(x, y)?;
        let g = s.contact_map(x, y);
        let w = v.eval(x, y)?.grad;
        Ok(delta_d(g, g[0].hypot(g[1]), w, eps))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstVariation {
    pub derivative: f64,
    pub curvature_integral: f64,
    pub gap: f64,
}

/// |d/dε E(u + εv)|₀ + ∫∫ vH| with a central difference of step `fd_eps`.
pub fn first_variation_gap<F: ScalarField2 + ?Sized>(
    f: &F,
    v: &VariationField,
    dom: &Domain2,
    fd_eps: f64,
    cells: usize,
) -> Result<FirstVariation> {
    v.check_admissible(f, dom)?;
    let derivative = v.integrate(cells, |x, y| {
        let s = f.eval(x, y)?;
        let g = s.contact_map(x, y);
        let w = v.eval(x, y)?.grad;
        let dp = (g[0] + fd_eps * w[0]).hypot(g[1] + fd_eps * w[1]);
        let dm = (g[0] - fd_eps * w[0]).hypot(g[1] - fd_eps * w[1]);
        Ok(2.0 * (g[0] * w[0] + g[1] * w[1]) / (dp + dm))
    })?;
    let curvature_integral = v.integrate(cells, |x, y| {
        let vv = v.eval(x, y)?.value;
        if vv == 0.0 {
            return Ok(0.0);
        }
        Ok(vv * p_mean_curvature(f, x, y)?)
    })?;
    Ok(FirstVariation {
        derivative,
        curvature_integral,
        gap: (derivative + curvature_integral).abs(),
    })
}

fn check_minimal_on_support<F: ScalarField2 + ?Sized>(f: &F, v: &VariationField) -> Result<()> {
    let [x0, y0, x1, y1] = v.support;
    let m = 16;
    for j in 0..=m {
        for i in 0..=m {
            let x = x0 + (x1 - x0) * i as f64 / m as f64;
            let y = y0 + (y1 - y0) * j as f64 / m as f64;
            let h = p_mean_curvature(f, x, y)?;
            if h.abs() > 1e-8 {
                return Err(Error::NotMinimal { residual: h });
            }
        }
    }
    Ok(())
}

/// ∫∫ {(e₁(−αv))² + (αv)²·[−2W + 2 Im A₁₁ − 4e₁(α) − 4α²]} D dx dy, bracket in closed form.
pub fn second_variation_with<F: ScalarField2 + ?Sized>(
    f: &F,
    v: &VariationField,
    dom: &Domain2,
    ambient: Ambient,
    cells: usize,
) -> Result<f64> {
    v.check_admissible(f, dom)?;
    check_minimal_on_support(f, v)?;
    let h = fd_step(dom);
    let w = |x: f64, y: f64| -> Result<f64> {
        let vv = v.eval(x, y)?.value;
        Ok(vv / first_order_data(f, x, y, None)?.d)
    };
    v.integrate(cells, |x, y| {
        let vv = v.eval(x, y)?.value;
        let s = v.eval(x, y)?;
        if vv == 0.0 && s.grad == [0.0, 0.0] {
            return Ok(0.0);
        }
        let d = first_order_data(f, x, y, None)?.d;
        let e1w = e1_derivative(f, &w, x, y, h)?;
        let bracket = -2.0 * ambient.w + 2.0 * ambient.im_a11 + bracket_closed_form(f, x, y)?;
        let aw = vv / d;
        Ok((e1w * e1w + aw * aw * bracket) * d)
    })
}

pub fn second_variation<F: ScalarField2 + ?Sized>(
    f: &F,
    v: &VariationField,
    dom: &Domain2,
    cells: usize,
) -> Result<f64> {
    second_variation_with(f, v, dom, HEISENBERG, cells)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyHessian {
    pub fd_value: f64,
    pub quadrature_value: f64,
    pub relative_gap: f64,
}

/// (E(u+εv) − 2E(u) + E(u−εv))/ε² against ∫∫ D⁻¹(e₁v)² dx dy.
pub fn energy_hessian_fd<F: ScalarField2 + ?Sized>(
    f: &F,
    v: &VariationField,
    dom: &Domain2,
    fd_eps: f64,
    cells: usize,
) -> Result<EnergyHessian> {
    v.check_admissible(f, dom)?;
    let fd_value = v.integrate(cells, |x, y| {
        let s = f.eval(x, y)?;
        let g = s.contact_map(x, y);
        let d0 = g[0].hypot(g[1]);
        let w = v.eval(x, y)?.grad;
        Ok((delta_d(g, d0, w, fd_eps) + delta_d(g, d0, w, -fd_eps)) / (fd_eps * fd_eps))
    })?;
    let quadrature_value = v.integrate(cells, |x, y| {
        let w = v.eval(x, y)?.grad;
        if w == [0.0, 0.0] {
            return Ok(0.0);
        }
        let e1 = e1_direction(f, x, y)?;
        let e1v = e1[0] * w[0] + e1[1] * w[1];
        Ok(e1v * e1v / first_order_data(f, x, y, None)?.d)
    })?;
    let scale = fd_value.abs().max(quadrature_value.abs());
    let relative_gap = if scale == 0.0 {
        0.0
    } else {
        (fd_value - quadrature_value).abs() / scale
    };
    Ok(EnergyHessian {
        fd_value,
        quadrature_value,
        relative_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfAdjointness {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// ∫[φ e₁²ψ − ψ e₁²φ] D − 2∫[ψ e₁φ − φ e₁ψ] α D with α = −1/D.
pub fn self_adjointness_gap<F: ScalarField2 + ?Sized>(
    f: &F,
    phi: &VariationField,
    psi: &VariationField,
    dom: &Domain2,
    cells: usize,
) -> Result<SelfAdjointness> {
    phi.check_admissible(f, dom)?;
    psi.check_admissible(f, dom)?;
    let h = fd_step(dom);
    let [a0, b0, a1, b1] = phi.support;
    let [c0, d0, c1, d1] = psi.support;
    // both integrands vanish off the intersection of the supports
    let (x0, y0, x1, y1) = (a0.max(c0), b0.max(d0), a1.min(c1), b1.min(d1));
    if !(x1 > x0 && y1 > y0) {
        return Ok(SelfAdjointness {
            lhs: 0.0,
            rhs: 0.0,
            gap: 0.0,
        });
    }
    let pv = |x: f64, y: f64| phi.eval(x, y).map(|s| s.value);
    let qv = |x: f64, y: f64| psi.eval(x, y).map(|s| s.value);
    let both = |x: f64, y: f64| -> Result<(f64, f64)> {
        let (p, q) = (phi.eval(x, y)?, psi.eval(x, y)?);
        let zero = |s: &FieldSample| s.value == 0.0 && s.grad == [0.0, 0.0];
        Ok((
            if zero(&p) { 0.0 } else { 1.0 },
            if zero(&q) { 0.0 } else { 1.0 },
        ))
    };
    let lhs = simpson_rect(
        &|x, y| {
            let (pa, qa) = both(x, y)?;
            if pa == 0.0 && qa == 0.0 {
                return Ok(0.0);
            }
            let d = first_order_data(f, x, y, None)?.d;
            let t1 = if pv(x, y)? == 0.0 {
                0.0
            } else {
                pv(x, y)? * e1_second(f, &qv, x, y, h)?
            };
            let t2 = if qv(x, y)? == 0.0 {
                0.0
            } else {
                qv(x, y)? * e1_second(f, &pv, x, y, h)?
            };
            Ok((t1 - t2) * d)
        },
        x0,
        y0,
        x1,
        y1,
        cells,
        cells,
    )?;
    let rhs = simpson_rect(
        &|x, y| {
            let (pa, qa) = both(x, y)?;
            if pa == 0.0 && qa == 0.0 {
                return Ok(0.0);
            }
            let e1 = e1_direction(f, x, y)?;
            let (p, q) = (phi.eval(x, y)?, psi.eval(x, y)?);
            let e1p = e1[0] * p.grad[0] + e1[1] * p.grad[1];
            let e1q = e1[0] * q.grad[0] + e1[1] * q.grad[1];
            // α·D = −1
            Ok(2.0 * (q.value * e1p - p.value * e1q))
        },
        x0,
        y0,
        x1,
        y1,
        cells,
        cells,
    )?;
    let rhs = -rhs;
    Ok(SelfAdjointness {
        lhs,
        rhs,
        gap: lhs - rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizingEntry {
    pub variation: usize,
    pub eps: f64,
    pub delta_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizingTable {
    pub entries: Vec<MinimizingEntry>,
    pub min_delta: f64,
}

/// E(u + εv) − E(u) for every variation and every ε; requires a singular-free domain.
pub fn minimizing_check<F: ScalarField2 + ?Sized>(
    f: &F,
    variations: &[VariationField],
    dom: &Domain2,
    eps_grid: &[f64],
    cells: usize,
) -> Result<MinimizingTable> {
    let (x0, y0, x1, y1) = dom.bounding_box();
    let m = 64;
    for j in 0..=m {
        for i in 0..=m {
            let x = x0 + (x1 - x0) * i as f64 / m as f64;
            let y = y0 + (y1 - y0) * j as f64 / m as f64;
            if !dom.contains(x, y) {
                continue;
            }
            if first_order_data(f, x, y, None).is_err() {
                return Err(Error::SingularInDomain { x, y });
            }
        }
    }
    let mut entries = Vec::new();
    for (k, v) in variations.iter().enumerate() {
        v.check_admissible(f, dom)?;
        for &eps in eps_grid {
            entries.push(MinimizingEntry {
                variation: k,
                eps,
                delta_energy: energy_difference(f, v, eps, cells)?,
            });
        }
    }
    let min_delta = entries
        .iter()
        .map(|e| e.delta_energy)
        .fold(f64::INFINITY, f64::min);
    let min_delta = if entries.is_empty() { 0.0 } else { min_delta };
    Ok(MinimizingTable { entries, min_delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_plane, make_quadratic_family, GFunction};
    use crate::fixtures::radial;

    fn mxy() -> crate::field::AnalyticField {
        make_quadratic_family(0.0, 1.0, GFunction::zero(), false).unwrap()
    }

    fn xy() -> crate::field::AnalyticField {
        make_quadratic_family(1.0, 0.0, GFunction::zero(), false).unwrap()
    }

    fn unit_box() -> Domain2 {
        Domain2::rect(0.5, 0.5, 1.5, 1.5).unwrap()
    }

    #[test]
    fn bump_derivatives() {
        let b = VariationField::bump([0.0, 0.0, 2.0, 1.0], 0.7).unwrap();
        assert!((b.eval(1.0, 0.5).unwrap().value - 0.7).abs() < 1e-15);
        let (x, y, h) = (0.6, 0.3, 1e-6);
        let s = b.eval(x, y).unwrap();
        let px = b.eval(x + h, y).unwrap();
        let mx = b.eval(x - h, y).unwrap();
        let py = b.eval(x, y + h).unwrap();
        let my = b.eval(x, y - h).unwrap();
        assert!(((px.value - mx.value) / (2.0 * h) - s.grad[0]).abs() < 1e-8);
        assert!(((py.value - my.value) / (2.0 * h) - s.grad[1]).abs() < 1e-8);
        assert!(((px.grad[0] - mx.grad[0]) / (2.0 * h) - s.hess[0][0]).abs() < 1e-7);
        assert!(((py.grad[0] - my.grad[0]) / (2.0 * h) - s.hess[0][1]).abs() < 1e-7);
        assert_eq!(b.eval(2.0, 0.5).unwrap().value, 0.0);
        assert_eq!(b.eval(3.0, 0.5).unwrap().grad, [0.0, 0.0]);
    }

    #[test]
    fn support_checks() {
        let dom = unit_box();
        let inside = VariationField::bump([0.7, 0.7, 1.3, 1.3], 1.0).unwrap();
        inside.check_admissible(&mxy(), &dom).unwrap();
        let outside = VariationField::bump([0.4, 0.7, 1.3, 1.3], 1.0).unwrap();
        assert!(matches!(
            outside.check_admissible(&mxy(), &dom),
            Err(Error::SupportViolation(_))
        ));
        let dom2 = Domain2::rect(-1.0, -1.0, 1.0, 1.0).unwrap();
        let across = VariationField::bump([-0.5, -0.5, 0.5, 0.5], 1.0).unwrap();
        assert!(matches!(
            across.check_admissible(&mxy(), &dom2),
            Err(Error::SupportViolation(_))
        ));
        let plane = crate::field::AnalyticField::entire("ramp", |x, _| {
            FieldSample::new(x, [1.0, 0.0], [[0.0; 2]; 2])
        });
        assert!(matches!(
            VariationField::new(plane, [0.0, 0.0, 1.0, 1.0]),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn energy_examples() {
        let z = make_plane(0.0, 0.0, 0.0);
        let sq = Domain2::rect(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((energy(&z, &sq, 400).unwrap() - 0.765_195_716_335_3).abs() < 1e-7);
        let disk = Domain2::disk([0.0, 0.0], 1.0).unwrap();
        assert!((energy(&z, &disk, 64).unwrap() - std::f64::consts::TAU / 3.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_closed_form_examples() {
        for (x, y) in [(0.7, 0.2), (-1.3, 0.5), (2.0, -1.0)] {
            assert!((bracket_closed_form(&xy(), x, y).unwrap() - 1.0 / (x * x)).abs() < 1e-12);
            let a = alpha_data(&xy(), x, y, 1e-4).unwrap();
            let fd = -4.0 * a.e1_alpha - 4.0 * a.alpha * a.alpha;
            assert!((fd - 1.0 / (x * x)).abs() < 1e-7, "{fd}");
        }
        let f = radial(1.0);
        let a = alpha_data(&f, 0.8, 0.3, 1e-4).unwrap();
        let fd = -4.0 * a.e1_alpha - 4.0 * a.alpha * a.alpha;
        assert!((fd - bracket_closed_form(&f, 0.8, 0.3).unwrap()).abs() < 1e-7);
        assert!(a.alpha < 0.0);
    }

    #[test]
    fn e1_sign_convention() {
        // div(D·e₁) = −2 for every field
        let f = radial(1.0);
        let (x, y, h) = (0.8, 0.3, 1e-5);
        let dw = |x: f64, y: f64| {
            let d = first_order_data(&f, x, y, None).unwrap();
            let e = e1_direction(&f, x, y).unwrap();
            [d.d * e[0], d.d * e[1]]
        };
        let div =
            (dw(x + h, y)[0] - dw(x - h, y)[0] + dw(x, y + h)[1] - dw(x, y - h)[1]) / (2.0 * h);
        assert!((div + 2.0).abs() < 1e-8);
    }

    #[test]
    fn first_variation_examples() {
        let dom = unit_box();
        let v = VariationField::bump([0.6, 0.7, 1.4, 1.3], 1.0).unwrap();
        let r = first_variation_gap(&mxy(), &v, &dom, 1e-5, 200).unwrap();
        assert!(r.gap < 1e-10, "{r:?}");
        let dom = Domain2::rect(0.0, -1.0, 2.0, 1.0).unwrap();
        let v = VariationField::bump([0.5, -0.25, 1.5, 0.25], 1.0).unwrap();
        let gaps: Vec<f64> = [1e-2, 1e-3]
            .iter()
            .map(|&e| {
                first_variation_gap(&radial(1.0), &v, &dom, e, 200)
                    .unwrap()
                    .gap
            })
            .collect();
        assert!(gaps[1] < 1e-6, "{gaps:?}");
        assert!(gaps[1] < 0.02 * gaps[0], "{gaps:?}");
    }

    #[test]
    fn second_variation_examples() {
        let dom = unit_box();
        let v = VariationField::bump([0.6, 0.7, 1.4, 1.3], 1.0).unwrap();
        let sv = second_variation(&mxy(), &v, &dom, 120).unwrap();
        let eh = energy_hessian_fd(&mxy(), &v, &dom, 1e-3, 120).unwrap();
        assert!(sv > 0.0);
        assert!(
            (sv - eh.quadrature_value).abs() < 1e-2 * eh.quadrature_value,
            "{sv} {eh:?}"
        );
        assert!(eh.relative_gap < 1e-2, "{eh:?}");
        let sv = second_variation(&xy(), &v, &dom, 120).unwrap();
        assert!(sv >= 0.0);
        assert!(matches!(
            second_variation(&radial(1.0), &v, &dom, 40),
            Err(Error::NotMinimal { .. })
        ));
    }

    #[test]
    fn energy_hessian_zero_variation() {
        let dom = unit_box();
        let z = VariationField::zero([0.6, 0.7, 1.4, 1.3]).unwrap();
        let eh = energy_hessian_fd(&mxy(), &z, &dom, 1e-3, 40).unwrap();
        assert_eq!(
            (eh.fd_value, eh.quadrature_value, eh.relative_gap),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn self_adjointness_examples() {
        let dom = unit_box();
        let bumps = VariationField::random_bumps([0.55, 0.55, 1.45, 1.45], 2, 3).unwrap();
        let a = self_adjointness_gap(&mxy(), &bumps[0], &bumps[1], &dom, 80).unwrap();
        assert!(a.gap.abs() < 1e-4, "{a:?}");
        let b = self_adjointness_gap(&mxy(), &bumps[1], &bumps[0], &dom, 80).unwrap();
        assert!((a.gap + b.gap).abs() < 1e-12);
        let c = self_adjointness_gap(&mxy(), &bumps[0], &bumps[0], &dom, 40).unwrap();
        assert_eq!(c.gap, 0.0);
    }

    #[test]
    fn minimizing_examples() {
        let dom = unit_box();
        let bumps = VariationField::random_bumps([0.55, 0.55, 1.45, 1.45], 5, 9).unwrap();
        let eps = [-1.0, -0.5, -0.1, 0.1, 0.5, 1.0];
        let t = minimizing_check(&mxy(), &bumps, &dom, &eps, 80).unwrap();
        assert_eq!(t.entries.len(), 30);
        assert!(t.min_delta >= -1e-8, "{}", t.min_delta);
        let z = VariationField::zero([0.6, 0.6, 1.4, 1.4]).unwrap();
        let t = minimizing_check(&mxy(), &[z], &dom, &eps, 40).unwrap();
        assert!(t.entries.iter().all(|e| e.delta_energy == 0.0));
        let t = minimizing_check(&make_plane(1.0, 2.0, 3.0), &bumps, &dom, &eps, 80).unwrap();
        assert!(t.min_delta >= -1e-8);
        let dom2 = Domain2::rect(-1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            minimizing_check(&mxy(), &bumps, &dom2, &eps, 40),
            Err(Error::SingularInDomain { .. })
        ));
    }
}
