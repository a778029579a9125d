//! Adaptive Dormand–Prince 5(4) integrator for complex linear and nonlinear
//! systems `dy/dt = f(t, y)`.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qmatrix::C64;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the derivative norm when absent.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-8, atol: 1e-12, h0: None, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates from `t0` to `t1` and returns `y(t1)`.
pub fn dopri5<F>(mut f: F, t0: f64, t1: f64, y0: &[C64], opts: &OdeOptions) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    if !(span > 0.0) {
        return Err(Error::domain("integration interval must be forward in time"));
    }
    let mut k: Vec<Vec<C64>> = vec![vec![C64::zero(); n]; 7];
    let mut tmp = vec![C64::zero(); n];
    f(t0, &y, &mut k[0]);
    let mut h = opts.h0.unwrap_or_else(|| {
        let d0 = max_norm(&y).max(1e-3);
        let d1 = max_norm(&k[0]);
        if d1 == 0.0 { span } else { (0.01 * d0 / d1).min(span) }
    });
    let mut t = t0;
    let mut steps = 0;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::domain("maximum number of integration steps exceeded"));
        }
        steps += 1;
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += k[j][i] * (h * a);
                    }
                }
                tmp[i] = acc;
            }
            f(t + C[s] * h, &tmp, &mut k[s]);
        }
        // k[6] was evaluated at the fifth-order solution, which is `tmp`.
        let mut err = 0.0;
        for i in 0..n {
            let mut e = C64::zero();
            for s in 0..7 {
                e += k[s][i] * (h * (B[s] - B_LOW[s]));
            }
            let scale = opts.atol + opts.rtol * y[i].norm().max(tmp[i].norm());
            err += (e.norm() / scale).powi(2);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&tmp);
            // first-same-as-last
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * span.abs() && t < t1 {
            return Err(Error::domain("integration step size underflow"));
        }
    }
    Ok(y)
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        // y'' = -y as a complex rotation; y(t) = exp(-i t)
        let y = dopri5(|_, y, dy| dy[0] = C64::new(0.0, -1.0) * y[0], 0.0, 10.0, &[C64::new(1.0, 0.0)], &OdeOptions::default())
            .unwrap();
        let exact = C64::new(0.0, -10.0).exp();
        assert!((y[0] - exact).norm() < 1e-7);
    }

    #[test]
    fn time_dependent_rhs() {
        let y = dopri5(|t, _, dy| dy[0] = C64::new(2.0 * t, 0.0), 0.0, 3.0, &[C64::zero()], &OdeOptions::default()).unwrap();
        assert!((y[0].re - 9.0).abs() < 1e-10);
    }
}
