//! Pointwise pseudohermitian quantities of a graph z = u(x, y).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldSample, ScalarField2};
use crate::ode::{integrate_to, Tolerances};
use crate::quadrature::Domain2;

/// D, the unit normal N = (cos θ, sin θ), N⊥ = (sin θ, −cos θ) and θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderData {
    pub d: f64,
    pub n: [f64; 2],
    pub nperp: [f64; 2],
    pub theta: f64,
}

/// Default singular threshold for analytic fields.
pub fn default_tol_sing(x: f64, y: f64) -> f64 {
    1e-8 * (1.0 + x.hypot(y))
}

/// Threshold actually applied to a sample: grid fields widen it to ten times their noise.
pub fn effective_tol_sing(s: &FieldSample, x: f64, y: f64, tol_sing: Option<f64>) -> f64 {
    tol_sing
        .unwrap_or_else(|| default_tol_sing(x, y))
        .max(10.0 * s.noise)
}

pub fn first_order_from_sample(
    s: &FieldSample,
    x: f64,
    y: f64,
    tol_sing: f64,
) -> Result<FirstOrderData> {
    let [a, b] = s.contact_map(x, y);
    let d = a.hypot(b);
    if !(d > tol_sing) {
        return Err(Error::Singular { d });
    }
    let theta = b.atan2(a);
    let (c, sn) = (a / d, b / d);
    Ok(FirstOrderData {
        d,
        n: [c, sn],
        nperp: [sn, -c],
        theta,
    })
}

pub fn first_order_data<F: ScalarField2 + ?Sized>(
    f: &F,
    x: f64,
    y: f64,
    tol_sing: Option<f64>,
) -> Result<FirstOrderData> {
    let s = f.eval(x, y)?;
    first_order_from_sample(&s, x, y, effective_tol_sing(&s, x, y, tol_sing))
}

/// P(u) = (u_y+x)²u_xx − 2(u_y+x)(u_x−y)u_xy + (u_x−y)²u_yy.
pub fn pmge_from_sample(s: &FieldSample, x: f64, y: f64) -> f64 {
    let [a, b] = s.contact_map(x, y);
    b * b * s.hess[0][0] - 2.0 * a * b * s.hess[0][1] + a * a * s.hess[1][1]
}

pub fn pmge_numerator<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64) -> Result<f64> {
    Ok(pmge_from_sample(&f.eval(x, y)?, x, y))
}

pub fn mean_curvature_from_sample(s: &FieldSample, x: f64, y: f64, tol_sing: f64) -> Result<f64> {
    let [a, b] = s.contact_map(x, y);
    let d = a.hypot(b);
    if !(d > tol_sing) {
        return Err(Error::Singular { d });
    }
    Ok(pmge_from_sample(s, x, y) / (d * d * d))
}

pub fn p_mean_curvature<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64) -> Result<f64> {
    let s = f.eval(x, y)?;
    mean_curvature_from_sample(&s, x, y, effective_tol_sing(&s, x, y, None))
}

/// ∫∫ D dx dy over `dom` with `cells` Simpson intervals per axis.
pub fn p_area<F: ScalarField2 + ?Sized>(f: &F, dom: &Domain2, cells: usize) -> Result<f64> {
    dom.integrate(cells, |x, y| {
        let s = f.eval(x, y)?;
        let [a, b] = s.contact_map(x, y);
        Ok(a.hypot(b))
    })
}

/// Plane divergence of the unit normal N by central differences of step `h`.
pub fn divergence_of_n<F: ScalarField2 + ?Sized>(f: &F, x: f64, y: f64, h: f64) -> Result<f64> {
    let n = |x: f64, y: f64| first_order_data(f, x, y, None).map(|d| d.n);
    let dx = (n(x + h, y)?[0] - n(x - h, y)?[0]) / (2.0 * h);
    let dy = (n(x, y + h)?[1] - n(x, y - h)?[1]) / (2.0 * h);
    Ok(dx + dy)
}

/// Second derivatives of x, y, u along the characteristic flow and their gaps
/// against −cos θ·H, −sin θ·H and H·(x sin θ − y cos θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SublaplacianResidual {
    pub d2x: f64,
    pub d2y: f64,
    pub d2u: f64,
    pub gap_x: f64,
    pub gap_y: f64,
    pub gap_u: f64,
}

impl SublaplacianResidual {
    pub fn max_gap(&self) -> f64 {
        self.gap_x.abs().max(self.gap_y.abs()).max(self.gap_u.abs())
    }
}

/// Moves along the integral curve of N⊥ for signed arclength `s`.
pub fn flow_along_nperp<F: ScalarField2 + ?Sized>(
    f: &F,
    p: [f64; 2],
    s: f64,
    tol: Tolerances,
) -> Result<[f64; 2]> {
    integrate_to(
        |_, q: &[f64; 2]| first_order_data(f, q[0], q[1], None).map(|d| d.nperp),
        0.0,
        p,
        s,
        tol,
    )
}

pub fn tangential_sublaplacian_check<F: ScalarField2 + ?Sized>(
    f: &F,
    x: f64,
    y: f64,
    fd_step: f64,
) -> Result<SublaplacianResidual> {
    let fo = first_order_data(f, x, y, None)?;
    let h = p_mean_curvature(f, x, y)?;
    let tol = Tolerances {
        atol: 1e-14,
        rtol: 1e-14,
    };
    let plus = flow_along_nperp(f, [x, y], fd_step, tol)?;
    let minus = flow_along_nperp(f, [x, y], -fd_step, tol)?;
    let u0 = f.eval(x, y)?.value;
    let up = f.eval(plus[0], plus[1])?.value;
    let um = f.eval(minus[0], minus[1])?.value;
    let h2 = fd_step * fd_step;
    let d2x = (plus[0] - 2.0 * x + minus[0]) / h2;
    let d2y = (plus[1] - 2.0 * y + minus[1]) / h2;
    let d2u = (up - 2.0 * u0 + um) / h2;
    let (c, s) = (fo.n[0], fo.n[1]);
    Ok(SublaplacianResidual {
        d2x,
        d2y,
        d2u,
        gap_x: d2x + c * h,
        gap_y: d2y + s * h,
        gap_u: d2u - h * (x * s - y * c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_plane, make_quadratic_family, GFunction};
    use crate::field::AnalyticField;
    use crate::fixtures::radial;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn xy() -> AnalyticField {
        make_quadratic_family(1.0, 0.0, GFunction::zero(), false).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let d = first_order_data(&xy(), 1.0, 2.0, None).unwrap();
        assert_eq!(d.d, 2.0);
        assert!((d.n[0]).abs() < 1e-15 && (d.n[1] - 1.0).abs() < 1e-15);
        assert!((d.nperp[0] - 1.0).abs() < 1e-15 && d.nperp[1].abs() < 1e-15);
        assert!((d.theta - PI / 2.0).abs() < 1e-15);
        let z = make_plane(0.0, 0.0, 0.0);
        let d = first_order_data(&z, 1.0, 0.0, None).unwrap();
        assert_eq!(d.d, 1.0);
        assert_eq!(d.n, [0.0, 1.0]);
        assert!(matches!(
            first_order_data(&xy(), 0.0, 3.7, None),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn mean_curvature_examples() {
        let h = p_mean_curvature(&radial(1.0), 1.0, 0.0).unwrap();
        assert!((h - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(
            p_mean_curvature(&make_plane(1.0, -2.0, 3.0), 0.4, 0.1).unwrap(),
            0.0
        );
        assert_eq!(p_mean_curvature(&xy(), 1.0, 1.0).unwrap(), 0.0);
        assert!(p_mean_curvature(&make_plane(1.0, -2.0, 3.0), 2.0, 1.0).is_err());
    }

    #[test]
    fn pmge_examples() {
        let mxy = make_quadratic_family(0.0, 1.0, GFunction::zero(), false).unwrap();
        for &(x, y) in &[(0.3, -2.0), (0.0, 0.0), (5.0, 1.0)] {
            assert_eq!(pmge_numerator(&mxy, x, y).unwrap(), 0.0);
        }
        assert_eq!(pmge_numerator(&radial(1.0), 1.0, 0.0).unwrap(), 2.0);
        assert_eq!(
            pmge_numerator(&make_plane(0.0, 0.0, 0.0), 0.0, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn p_area_examples() {
        let z = make_plane(0.0, 0.0, 0.0);
        let disk = Domain2::disk([0.0, 0.0], 1.0).unwrap();
        let a = p_area(&z, &disk, 64).unwrap();
        assert!((a - 2.0 * PI / 3.0).abs() < 1e-10, "{a}");
        let sq = Domain2::rect(0.0, 0.0, 1.0, 1.0).unwrap();
        let exact = (2f64.sqrt() + 1f64.asinh()) / 3.0;
        let a1 = p_area(&z, &sq, 400).unwrap();
        assert!((a1 - exact).abs() < 1e-7, "{a1} vs {exact}");
        let big = Domain2::rect(0.0, 0.0, 2.0, 2.0).unwrap();
        let a2 = p_area(&z, &big, 400).unwrap();
        assert!((a2 / a1 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn p_area_with_exclusion() {
        let z = make_plane(0.0, 0.0, 0.0);
        let dom = Domain2::rect(-1.0, -1.0, 1.0, 1.0)
            .unwrap()
            .exclude([0.0, 0.0], 0.5)
            .unwrap();
        let full = p_area(&z, &Domain2::rect(-1.0, -1.0, 1.0, 1.0).unwrap(), 400).unwrap();
        let hole = 2.0 * PI * 0.125 / 3.0;
        let a = p_area(&z, &dom, 400).unwrap();
        assert!((a - (full - hole)).abs() < 1e-9);
    }

    #[test]
    fn sublaplacian_examples() {
        let mxy = make_quadratic_family(0.0, 1.0, GFunction::zero(), false).unwrap();
        let r = tangential_sublaplacian_check(&mxy, 1.0, 1.0, 1e-3).unwrap();
        assert!(r.max_gap() < 1e-8 && r.d2u.abs() < 1e-8, "{r:?}");
        let r = tangential_sublaplacian_check(&radial(1.0), 1.0, 0.0, 1e-3).unwrap();
        assert!(r.max_gap() < 1e-6, "{r:?}");
        let r = tangential_sublaplacian_check(&make_plane(0.0, 0.0, 0.0), 0.0, 1.0, 1e-3).unwrap();
        assert!(r.max_gap() < 1e-6, "{r:?}");
    }

    #[test]
    fn divergence_matches_curvature() {
        let f = make_quadratic_family(0.6, 0.8, GFunction::sin(), false).unwrap();
        for &(x, y) in &[(1.0, 0.5), (-0.7, 2.0), (0.3, 0.9)] {
            let div = divergence_of_n(&radial(1.0), x, y, 1e-4).unwrap();
            let h = p_mean_curvature(&radial(1.0), x, y).unwrap();
            assert!((div - h).abs() < 1e-5);
            if let Ok(h) = p_mean_curvature(&f, x, y) {
                let div = divergence_of_n(&f, x, y, 1e-4).unwrap();
                assert!((div - h).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn branch_flip_leaves_h_unchanged() {
        let f = radial(1.0);
        let s = f.eval(0.8, -0.3).unwrap();
        let fo = first_order_from_sample(&s, 0.8, -0.3, 1e-12).unwrap();
        let h = mean_curvature_from_sample(&s, 0.8, -0.3, 1e-12).unwrap();
        let flip = |t: f64| {
            let (c, sn) = (t.cos(), t.sin());
            let [a, b] = s.contact_map(0.8, -0.3);
            let d = a.hypot(b);
            (sn * sn * s.hess[0][0] - 2.0 * c * sn * s.hess[0][1] + c * c * s.hess[1][1]) / d
        };
        assert!((flip(fo.theta) - h).abs() < 1e-14);
        assert!((flip(fo.theta + PI) - h).abs() < 1e-14);
    }

    #[test]
    fn grid_field_flags_noise() {
        let g = crate::field::GridField::sample(-1.0, -1.0, 0.05, 41, 41, |x, y| x * y).unwrap();
        assert!(first_order_data(&g, 0.0, 0.5, None).is_err());
        assert!(first_order_data(&g, 0.5, 0.5, None).is_ok());
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rotation_invariance(angle in 0.0..std::f64::consts::TAU, x in -3.0..3.0f64, y in -3.0..3.0f64) {
            // u(x,y) = x^3/3 + x y^2/5 + sin(y) evaluated in rotated coordinates
            prop_assume!(x.hypot(y) > 0.2);
            let base = |x: f64, y: f64| FieldSample::new(
                x.powi(3) / 3.0 + x * y * y / 5.0 + y.sin(),
                [x * x + y * y / 5.0, 2.0 * x * y / 5.0 + y.cos()],
                [[2.0 * x, 2.0 * y / 5.0], [2.0 * y / 5.0, 2.0 * x / 5.0 - y.sin()]],
            );
            let (c, s) = (angle.cos(), angle.sin());
            let u = AnalyticField::entire("base", base);
            let rotated = AnalyticField::entire("rot", move |x, y| {
                let (xr, yr) = (c * x - s * y, s * x + c * y);
                let b = base(xr, yr);
                let g = [c * b.grad[0] + s * b.grad[1], -s * b.grad[0] + c * b.grad[1]];
                let r = [[c, s], [-s, c]];
                let mut hh = [[0.0; 2]; 2];
                for i in 0..2 { for j in 0..2 { for k in 0..2 { for l in 0..2 {
                    hh[i][j] += r[i][k] * b.hess[k][l] * r[j][l];
                }}}}
                FieldSample::new(b.value, g, hh)
            });
            let (xr, yr) = (c * x - s * y, s * x + c * y);
            if let (Ok(h1), Ok(h2)) = (p_mean_curvature(&u, xr, yr), p_mean_curvature(&rotated, x, y)) {
                prop_assert!((h1 - h2).abs() < 1e-10 * (1.0 + h1.abs()));
            }
        }
    }
}
