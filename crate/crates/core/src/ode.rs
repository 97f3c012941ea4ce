//! Dormand–Prince 5(4) embedded Runge–Kutta steps.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-9,
            rtol: 1e-9,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One step of size `h`; returns the 5th-order solution and the embedded error estimate.
pub fn dopri5_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<([f64; N], [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut k = [[0.0; N]; 7];
    for stage in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[stage] = f(t + C[stage] * h, &ys)?;
    }
    let mut y5 = *y;
    let mut err = [0.0; N];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..N {
            y5[i] += h * B5[s] * ks[i];
            err[i] += h * (B5[s] - B4[s]) * ks[i];
        }
    }
    Ok((y5, err))
}

/// RMS error norm scaled by the mixed absolute/relative tolerance.
pub fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    tol: Tolerances,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / N as f64).sqrt()
}

/// Step-size factor from an error norm, with the usual safety clamps.
pub fn step_factor(norm: f64) -> f64 {
    if norm == 0.0 {
        5.0
    } else {
        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
    }
}

/// Integrates from `t0` to `t1` (either direction) with adaptive steps.
pub fn integrate_to<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut h = span.abs().min(0.1) * dir;
    let mut t = t0;
    let mut y = y0;
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let (y5, err) = dopri5_step(&mut f, t, &y, h)?;
        let norm = error_norm(&err, &y, &y5, tol);
        if norm <= 1.0 {
            t += h;
            y = y5;
        }
        h *= step_factor(norm);
        steps += 1;
        if steps > 1_000_000 || h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::NonConvergence {
                eps: tol.atol,
                residual: norm,
            });
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = integrate_to(
            |_, y: &[f64; 1]| Ok([-y[0]]),
            0.0,
            [1.0],
            2.0,
            Tolerances::default(),
        )
        .unwrap();
        assert!((y[0] - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn circle_backwards() {
        let f = |_: f64, y: &[f64; 2]| Ok([-y[1], y[0]]);
        let tol = Tolerances {
            atol: 1e-12,
            rtol: 1e-12,
        };
        let y = integrate_to(f, 0.0, [1.0, 0.0], -1.0, tol).unwrap();
        assert!((y[0] - 1f64.cos()).abs() < 1e-10);
        assert!((y[1] + 1f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn step_is_fifth_order() {
        let mut f = |_: f64, y: &[f64; 1]| Ok([y[0]]);
        let e1 = (dopri5_step(&mut f, 0.0, &[1.0], 0.2).unwrap().0[0] - 0.2f64.exp()).abs();
        let e2 = (dopri5_step(&mut f, 0.0, &[1.0], 0.1).unwrap().0[0] - 0.1f64.exp()).abs();
        assert!((e1 / e2).log2() > 5.5);
    }
}
