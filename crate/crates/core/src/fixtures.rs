//! Non-minimal reference fields with known singular structure.

use crate::error::{Error, Result};
use crate::field::{AnalyticField, ContactJet, FieldSample};

/// u = sign·(x² + y²)/2; H = sign·2^{−1/2}/r, one isolated singular point.
pub fn radial(sign: f64) -> AnalyticField {
    AnalyticField::entire(format!("radial({sign})"), move |x, y| {
        FieldSample::new(
            sign * 0.5 * (x * x + y * y),
            [sign * x, sign * y],
            [[sign, 0.0], [0.0, sign]],
        )
    })
}

/// h(y) = exp(−1/y²)·sin(−1/y) with its first two derivatives.
fn example1_h(y: f64) -> (f64, f64, f64) {
    if y == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / (y * y)).exp();
    let (s, c) = (-1.0 / y).sin_cos();
    let y2 = y * y;
    let y3 = y2 * y;
    let h = e * s;
    let h1 = e * (2.0 * s / y3 + c / y2);
    let h2 = e * (4.0 * s / (y3 * y3) + 4.0 * c / (y3 * y2) - 7.0 * s / (y2 * y2) - 2.0 * c / y3);
    (h, h1, h2)
}

/// u = x·g(y) with g(y) = exp(−1/y²)·sin(−1/y) + y: singular points accumulate at the origin.
///
/// G and U are supplied without the cancellation in `u_x − y`.
pub fn example1() -> AnalyticField {
    AnalyticField::entire("example1", |x, y| {
        let (h, h1, h2) = example1_h(y);
        let (g, g1, g2) = (h + y, h1 + 1.0, h2);
        FieldSample::new(x * g, [g, x * g1], [[0.0, g1], [g1, x * g2]])
    })
    .with_contact_jet(|x, y| {
        let (h, h1, h2) = example1_h(y);
        Ok(ContactJet {
            g: [h, x * (h1 + 2.0)],
            u: [[0.0, h1], [h1 + 2.0, x * h2]],
        })
    })
}

/// u = (x² − y²)/2 + (sgn(x)|x|^β − sgn(y)|y|^β)/β; det U = 0 at an isolated singular point.
pub fn example3(beta: f64) -> Result<AnalyticField> {
    if !(beta >= 2.0) {
        return Err(Error::BadParams(format!(
            "example3 needs beta >= 2, got {beta}"
        )));
    }
    Ok(AnalyticField::entire(
        format!("example3({beta})"),
        move |x, y| {
            let px = |t: f64| t.signum() * t.abs().powf(beta) / beta;
            let d1 = |t: f64| t.abs().powf(beta - 1.0);
            let d2 = |t: f64| {
                if t == 0.0 && beta > 2.0 {
                    0.0
                } else {
                    (beta - 1.0) * t.signum() * t.abs().powf(beta - 2.0)
                }
            };
            FieldSample::new(
                0.5 * (x * x - y * y) + px(x) - px(y),
                [x + d1(x), -y - d1(y)],
                [[1.0 + d2(x), 0.0], [0.0, -1.0 - d2(y)]],
            )
        },
    ))
}

/// u = f(x² + y²) with f(t) = −t/ln t on the unit disk; the Hessian vanishes at the origin.
pub fn tlog() -> AnalyticField {
    AnalyticField::new("tlog", |x, y| {
        let t = x * x + y * y;
        if !(t < 1.0) {
            return Err(Error::OutOfDomain { x, y });
        }
        if t == 0.0 {
            return Ok(FieldSample::new(0.0, [0.0, 0.0], [[0.0; 2]; 2]));
        }
        let l = t.ln();
        let f = -t / l;
        let f1 = -1.0 / l + 1.0 / (l * l);
        let f2 = 1.0 / (t * l * l) - 2.0 / (t * l * l * l);
        Ok(FieldSample::new(
            f,
            [2.0 * x * f1, 2.0 * y * f1],
            [
                [2.0 * f1 + 4.0 * x * x * f2, 4.0 * x * y * f2],
                [4.0 * x * y * f2, 2.0 * f1 + 4.0 * y * y * f2],
            ],
        ))
    })
}

/// Closed-form p-mean curvature of [`tlog`] as a function of r.
pub fn tlog_mean_curvature(r: f64) -> f64 {
    let t = r * r;
    let l = t.ln();
    let f1 = -1.0 / l + 1.0 / (l * l);
    let f2 = 1.0 / (t * l * l) - 2.0 / (t * l * l * l);
    2.0 * (f1 + 4.0 * f1.powi(3) + 2.0 * t * f2) / (r * (1.0 + 4.0 * f1 * f1).powf(1.5))
}
