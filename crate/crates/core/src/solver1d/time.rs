//! Explicit Runge–Kutta integration on flat state vectors.

use crate::error::{Error, Result};

/// Time stepping scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical four-stage scheme with a fixed step (the last step is shortened to hit `t_end`).
    Rk4 { dt: f64 },
    /// Dormand–Prince 5(4) with a PI step-size controller.
    Dopri5 { rtol: f64, atol: f64, dt0: Option<f64> },
}

impl Method {
    pub fn adaptive(tol: f64) -> Self {
        Method::Dopri5 {
            rtol: tol,
            atol: tol,
            dt0: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub last_dt: f64,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;

fn check_underflow(t: f64, dt: f64) -> Result<()> {
    if dt < 1e-14 * t.abs().max(1.0) {
        return Err(Error::StepSizeUnderflow { t, dt });
    }
    Ok(())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end`.
///
/// `on_step(t, y)` is called after every accepted step.
pub fn integrate<F, C>(mut f: F, t0: f64, y0: &[f64], t_end: f64, method: &Method, mut on_step: C) -> Result<(Vec<f64>, StepStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]) -> Result<()>,
{
    if !(t_end >= t0) {
        return Err(Error::InvalidParameter(format!("t_end {t_end} precedes t0 {t0}")));
    }
    match *method {
        Method::Rk4 { dt } => rk4(&mut f, t0, y0, t_end, dt, &mut on_step),
        Method::Dopri5 { rtol, atol, dt0 } => dopri5(&mut f, t0, y0, t_end, rtol, atol, dt0, &mut on_step),
    }
}

fn axpy(out: &mut [f64], y: &[f64], terms: &[(f64, &[f64])], h: f64) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn rk4<F, C>(f: &mut F, t0: f64, y0: &[f64], t_end: f64, dt: f64, on_step: &mut C) -> Result<(Vec<f64>, StepStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]) -> Result<()>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut t = t0;
    let mut stats = StepStats::default();
    while t < t_end {
        let mut h = dt.min(t_end - t);
        // avoid a sliver of a final step
        if t_end - (t + h) < 1e-12 * dt {
            h = t_end - t;
        }
        f(t, &y, &mut k1)?;
        axpy(&mut tmp, &y, &[(0.5, &k1)], h);
        f(t + 0.5 * h, &tmp, &mut k2)?;
        axpy(&mut tmp, &y, &[(0.5, &k2)], h);
        f(t + 0.5 * h, &tmp, &mut k3)?;
        axpy(&mut tmp, &y, &[(1.0, &k3)], h);
        f(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = if (t_end - (t + h)).abs() <= 1e-14 * t_end.abs().max(1.0) { t_end } else { t + h };
        stats.accepted += 1;
        stats.rhs_evaluations += 4;
        stats.last_dt = h;
        on_step(t, &y)?;
    }
    Ok((y, stats))
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn rms_norm(err: &[f64], y: &[f64], ynew: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(ynew))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn dopri5<F, C>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    rtol: f64,
    atol: f64,
    dt0: Option<f64>,
    on_step: &mut C,
) -> Result<(Vec<f64>, StepStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    C: FnMut(f64, &[f64]) -> Result<()>,
{
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut stats = StepStats::default();
    if t_end == t0 {
        return Ok((y, stats));
    }
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    f(t0, &y, &mut k1)?;
    stats.rhs_evaluations += 1;

    let mut h = match dt0 {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::InvalidParameter(format!("initial step must be positive, got {h}"))),
        None => {
            // standard starting-step heuristic from the scaled norms of y and f
            let zeros = vec![0.0; n];
            let d0 = rms_norm(&y, &y, &zeros, rtol, atol).max(1e-300);
            let d1 = rms_norm(&k1, &y, &zeros, rtol, atol).max(1e-300);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let h0 = h0.min(t_end - t0);
            axpy(&mut tmp, &y, &[(1.0, &k1)], h0);
            f(t0 + h0, &tmp, &mut k2)?;
            stats.rhs_evaluations += 1;
            let diff: Vec<f64> = k2.iter().zip(&k1).map(|(a, b)| (a - b) / h0).collect();
            let d2 = rms_norm(&diff, &y, &zeros, rtol, atol);
            let h1 = if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h0).min(h1)
        }
    };

    let mut t = t0;
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;
    while t < t_end {
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        check_underflow(t, h)?;

        axpy(&mut tmp, &y, &[(A21, &k1)], h);
        f(t + C2 * h, &tmp, &mut k2)?;
        axpy(&mut tmp, &y, &[(A31, &k1), (A32, &k2)], h);
        f(t + C3 * h, &tmp, &mut k3)?;
        axpy(&mut tmp, &y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h);
        f(t + C4 * h, &tmp, &mut k4)?;
        axpy(&mut tmp, &y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h);
        f(t + C5 * h, &tmp, &mut k5)?;
        axpy(&mut tmp, &y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h);
        f(t + h, &tmp, &mut k6)?;
        axpy(&mut ynew, &y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        f(t + h, &ynew, &mut k7)?;
        stats.rhs_evaluations += 6;
        for i in 0..n {
            err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = rms_norm(&err, &y, &ynew, rtol, atol);
        if !e.is_finite() {
            stats.rejected += 1;
            rejected_last = true;
            h *= MIN_FACTOR;
            continue;
        }
        if e <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;
            stats.last_dt = h;
            on_step(t, &y)?;
            let mut factor = if e == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * e.powf(-ALPHA) * err_prev.powf(BETA)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if rejected_last {
                factor = factor.min(1.0);
            }
            err_prev = e.max(1e-4);
            rejected_last = false;
            h *= factor;
        } else {
            stats.rejected += 1;
            rejected_last = true;
            h *= (SAFETY * e.powf(-ALPHA)).clamp(MIN_FACTOR, 1.0);
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = -y[0];
        dy[1] = y[0] - 2.0 * y[1];
        Ok(())
    }

    fn exact(t: f64) -> [f64; 2] {
        [(-t).exp(), (-t).exp() - (-2.0 * t).exp()]
    }

    #[test]
    fn rk4_is_fourth_order() {
        let errs: Vec<f64> = [0.1, 0.05]
            .iter()
            .map(|&dt| {
                let (y, _) = integrate(decay, 0.0, &[1.0, 0.0], 1.0, &Method::Rk4 { dt }, |_, _| Ok(())).unwrap();
                (y[0] - exact(1.0)[0]).abs() + (y[1] - exact(1.0)[1]).abs()
            })
            .collect();
        let rate = (errs[0] / errs[1]).log2();
        assert!((rate - 4.0).abs() < 0.2, "rate {rate}");
    }

    #[test]
    fn dopri_meets_tolerance() {
        let mut steps = 0;
        let (y, stats) =
            integrate(decay, 0.0, &[1.0, 0.0], 2.0, &Method::adaptive(1e-10), |_, _| {
                steps += 1;
                Ok(())
            })
            .unwrap();
        assert_eq!(steps, stats.accepted);
        for (a, b) in y.iter().zip(exact(2.0)) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn failures_propagate() {
        let r = integrate(
            |t, _y, _dy| if t > 0.3 { Err(Error::NonPositiveDensity(-1.0)) } else { Ok(()) },
            0.0,
            &[1.0],
            1.0,
            &Method::Rk4 { dt: 0.1 },
            |_, _| Ok(()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn underflow_is_reported() {
        let r = integrate(
            |_t, y, dy| {
                dy[0] = if y[0] > 1.0 { f64::NAN } else { 1.0 };
                Ok(())
            },
            0.0,
            &[0.999],
            1.0,
            &Method::adaptive(1e-8),
            |_, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }
}
