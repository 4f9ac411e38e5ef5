//! Analytical reference solutions: MHD pipe flow, rectangular wire field and
//! current-loop field, with the special functions they need.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_BESSEL_ORDER: usize = 64;
pub const MAX_BESSEL_ARG: f64 = 100.0;
/// Highest order the pipe series may request from the internal recurrence.
pub const MAX_PIPE_BESSEL_ORDER: usize = 128;

/// Exponentially scaled `e^{−x} I_n(x)` for `n = 0..=n_max` by Miller's backward recurrence.
pub fn bessel_i_scaled_all(n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !(x >= 0.0) || x > MAX_BESSEL_ARG || !x.is_finite() {
        return Err(Error::DomainError(format!("Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]")));
    }
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let top = n_max.max(x.ceil() as usize);
    let start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    let start = start + start % 2;
    let (mut i_next, mut i_cur) = (0.0f64, 1e-280f64);
    // normalisation e^x = I_0 + 2 Σ_{k≥1} I_k
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let i_prev = i_next + 2.0 * k as f64 / x * i_cur;
        i_next = i_cur;
        i_cur = i_prev;
        // i_cur now holds the (k−1) value, i_next the k value
        if k <= n_max {
            out[k] = i_next;
        }
        sum += 2.0 * i_next;
        if i_cur.abs() > 1e250 {
            let s = 1e-250;
            i_cur *= s;
            i_next *= s;
            sum *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    out[0] = i_cur;
    sum += i_cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
    Ok(out)
}

/// Modified Bessel function of the first kind `I_n(x)`, `n ≤ 64`, `0 ≤ x ≤ 100`.
pub fn modified_bessel_i(n: usize, x: f64) -> Result<f64> {
    if n > MAX_BESSEL_ORDER {
        return Err(Error::DomainError(format!("Bessel order {n} above {MAX_BESSEL_ORDER}")));
    }
    Ok(bessel_i_scaled_all(n, x)?[n] * x.exp())
}

/// `I_n` for a signed order, using `I_{−n} = I_n`.
pub fn modified_bessel_i_signed(n: i64, x: f64) -> Result<f64> {
    modified_bessel_i(n.unsigned_abs() as usize, x)
}

/// `I'_n(x) = (I_{n−1}(x) + I_{n+1}(x))/2`.
pub fn modified_bessel_i_derivative(n: i64, x: f64) -> Result<f64> {
    Ok(0.5 * (modified_bessel_i_signed(n - 1, x)? + modified_bessel_i_signed(n + 1, x)?))
}

/// Complete elliptic integrals `(K(k), E(k))` by the arithmetic-geometric mean.
///
/// Near `k = 1` the returned `K` is large but finite, growing like `ln(4/k')`.
pub fn elliptic_ke(k: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::DomainError(format!("elliptic modulus {k} outside [0, 1)")));
    }
    let mut a = 1.0;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut c = k;
    let mut pow2 = 0.5;
    let mut sum = pow2 * c * c;
    for _ in 0..64 {
        if c.abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow2 *= 2.0;
        sum += pow2 * c * c;
    }
    let kk = PI / (2.0 * a);
    Ok((kk, kk * (1.0 - sum)))
}

/// Wall conductance of the pipe; `f64::INFINITY` selects a perfect conductor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipeParams {
    pub ha: f64,
    pub c: f64,
    pub n0: usize,
    pub n1: usize,
    pub s0: usize,
    pub s1: usize,
}

impl PipeParams {
    pub fn new(ha: f64, c: f64) -> Result<Self> {
        let p = PipeParams {
            ha,
            c,
            n0: 30,
            n1: 30,
            s0: 10,
            s1: 10,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_truncation(self, n0: usize, n1: usize, s0: usize, s1: usize) -> Result<Self> {
        let p = PipeParams { n0, n1, s0, s1, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ha > 0.0) || !self.ha.is_finite() {
            return Err(Error::InvalidParameter(format!("Hartmann number must be positive, got {}", self.ha)));
        }
        if !(self.c >= 0.0) {
            return Err(Error::InvalidParameter(format!("wall conductance must be non-negative, got {}", self.c)));
        }
        if self.s1 > self.s0 {
            return Err(Error::InvalidParameter("S1 must not exceed S0".into()));
        }
        let top = self.n0.max(self.n1 + 1) + 2 * self.s0 + 1;
        if top > MAX_PIPE_BESSEL_ORDER {
            return Err(Error::InvalidParameter(format!("truncation needs Bessel order {top}")));
        }
        Ok(())
    }

    pub fn k(&self) -> f64 {
        0.5 * self.ha
    }
}

/// Series solution for fully developed MHD flow in a circular pipe under a transverse field.
#[derive(Clone, Debug)]
pub struct PipeSolution {
    pub params: PipeParams,
    /// `A_s` for `s = 0..=S1`.
    pub a: Vec<f64>,
    /// `M_n` for `n = 0..=N0`.
    pub m: Vec<f64>,
    /// Residual `‖B A − C‖∞` of the coefficient solve.
    pub solve_residual: f64,
    u_star: f64,
    b_star: f64,
}

fn eps(n: usize) -> f64 {
    if n == 0 {
        0.5
    } else {
        1.0
    }
}

/// Builds `A_s` and `M_n`.
pub fn pipe_coefficients(params: PipeParams) -> Result<PipeSolution> {
    params.validate()?;
    let k = params.k();
    let top = params.n0.max(params.n1 + 1) + 2 * params.s0 + 1;
    let ik = bessel_i_scaled_all(top, k)?;
    // products of two scaled values carry a factor e^{−2k}
    let unscale2 = (2.0 * k).exp();
    let i = |n: i64| ik[n.unsigned_abs() as usize];
    let pair = |n: usize, s: usize| i(n as i64 + 2 * s as i64 + 1) + i(n as i64 - 2 * s as i64 - 1);
    let size = params.s1 + 1;
    let infinite = params.c.is_infinite();
    let mut bmat = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    for m in 0..size {
        for s in 0..size {
            let mut acc = 0.0;
            for n in 0..=params.n1 {
                let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                let di = 0.5 * (i(n as i64 - 1) + i(n as i64 + 1));
                acc += sign * eps(n) * di / i(n as i64) * pair(n, s) * pair(n, m);
            }
            acc *= unscale2;
            let delta = if m == s { 1.0 } else { 0.0 };
            bmat[(m, s)] = if infinite {
                k * acc
            } else {
                delta + params.c * k * acc
            };
        }
    }
    rhs[0] = if infinite { -0.5 } else { -0.5 * (1.0 + params.c) };
    let a = bmat.clone().lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let solve_residual = (&bmat * &a - &rhs).amax();
    let a: Vec<f64> = a.iter().copied().collect();
    let m: Vec<f64> = (0..=params.n0)
        .map(|n| {
            (0..=params.s0)
                .map(|s| a.get(s).copied().unwrap_or(0.0) * pair(n, s))
                .sum::<f64>()
                / i(n as i64)
        })
        .collect();
    let mut sol = PipeSolution {
        params,
        a,
        m,
        solve_residual,
        u_star: 1.0,
        b_star: 1.0,
    };
    sol.u_star = sol.eval(0.0, 0.0)?.0;
    sol.b_star = sol.eval(0.5, PI)?.1;
    Ok(sol)
}

/// Pipe fields and their radial derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipeSample {
    pub u: f64,
    pub b: f64,
    pub du_dr: f64,
    pub db_dr: f64,
}

impl PipeSolution {
    /// Unnormalised series values `(ũ, b̃)`.
    pub fn eval(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        let s = self.sample(r, theta)?;
        Ok((s.u, s.b))
    }

    /// Series values with term-wise radial derivatives.
    pub fn sample(&self, r: f64, theta: f64) -> Result<PipeSample> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::DomainError(format!("radius {r} outside the unit disk")));
        }
        let k = self.params.k();
        let x = k * r;
        let n0 = self.params.n0;
        let scaled = bessel_i_scaled_all(n0 + 1, x)?;
        let cos_t = theta.cos();
        // e^{±x cosθ} I_n(x) = e^{x(1 ± cosθ)} (e^{−x} I_n(x))
        let ep = (x * (1.0 + cos_t)).exp();
        let em = (x * (1.0 - cos_t)).exp();
        let mut out = PipeSample {
            u: 0.0,
            b: -r / (2.0 * k) * cos_t,
            du_dr: 0.0,
            db_dr: -cos_t / (2.0 * k),
        };
        for n in 0..=n0 {
            let i_n = scaled[n];
            let i_prev = scaled[if n == 0 { 1 } else { n - 1 }];
            let di = 0.5 * (i_prev + scaled[n + 1]);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let coef = eps(n) / k * self.m[n] * (n as f64 * theta).cos();
            let plus = sign * ep * i_n;
            let minus = em * i_n;
            // d/dr [e^{±kr cosθ} I_n(kr)] = k e^{±kr cosθ}(±cosθ I_n + I'_n)
            let dplus = sign * k * ep * (cos_t * i_n + di);
            let dminus = k * em * (-cos_t * i_n + di);
            out.u -= coef * 0.5 * (plus + minus);
            out.b += coef * 0.5 * (plus - minus);
            out.du_dr -= coef * 0.5 * (dplus + dminus);
            out.db_dr += coef * 0.5 * (dplus - dminus);
        }
        Ok(out)
    }

    /// Fields normalised so that `u'(0,0) = b'(½,π) = 1`.
    pub fn normalized(&self, r: f64, theta: f64) -> Result<(f64, f64)> {
        let (u, b) = self.eval(r, theta)?;
        Ok((u / self.u_star, b / self.b_star))
    }

    /// Normalised fields and radial derivatives.
    pub fn normalized_sample(&self, r: f64, theta: f64) -> Result<PipeSample> {
        let s = self.sample(r, theta)?;
        Ok(PipeSample {
            u: s.u / self.u_star,
            b: s.b / self.b_star,
            du_dr: s.du_dr / self.u_star,
            db_dr: s.db_dr / self.b_star,
        })
    }

    /// Residual of `b + c ∂_r b` at the wall; the `c`-divided form `∂_r b` for a perfect conductor.
    pub fn wall_residual(&self, theta: f64) -> Result<(f64, f64)> {
        let s = self.normalized_sample(1.0, theta)?;
        let c = self.params.c;
        let mag = if c.is_infinite() { s.db_dr } else { s.b + c * s.db_dr };
        Ok((s.u, mag))
    }

    /// `(ũ(0,0), b̃(½,π))`.
    pub fn normalization(&self) -> (f64, f64) {
        (self.u_star, self.b_star)
    }

    /// Non-dimensional forcing and magnetic numbers that make the normalised fields the solution.
    ///
    /// Returns `(F', Mm, Rm)` for a given Reynolds number.
    pub fn scaling(&self, re: f64) -> (f64, f64, f64) {
        let ha = self.params.ha;
        let f = 1.0 / (re * self.u_star);
        let mm = (re * self.u_star / (ha * self.b_star)).sqrt();
        let rm = ha * self.u_star / self.b_star;
        (f, mm, rm)
    }
}

/// Infinite straight wire of rectangular cross-section `[−w/2, w/2] × [−h, 0]`, current along +y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WireParams {
    pub w: f64,
    pub h: f64,
    /// Current density.
    pub i: f64,
    pub mu0: f64,
}

impl WireParams {
    pub fn new(w: f64, h: f64, i: f64, mu0: f64) -> Result<Self> {
        if !(w > 0.0 && h > 0.0 && mu0 > 0.0) {
            return Err(Error::InvalidParameter("wire width, thickness and mu0 must be positive".into()));
        }
        Ok(WireParams { w, h, i, mu0 })
    }

    pub fn total_current(&self) -> f64 {
        self.i * self.w * self.h
    }
}

/// `a·atan(b/a)` with its limit 0 at `a = 0`.
fn a_atan(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (b / a).atan()
    }
}

/// `a·ln(s)` with its limit 0 at `a = 0`.
fn a_ln(a: f64, s: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * s.ln()
    }
}

fn wire_half(p: f64, z: f64, prm: &WireParams) -> (f64, f64) {
    let h = prm.h;
    let zh = z + h;
    let r0 = p * p + z * z;
    let rh = p * p + zh * zh;
    let bx = a_ln(p, rh) - a_ln(p, r0) + 2.0 * a_atan(zh, p) - 2.0 * a_atan(z, p);
    // z ln(1 + p²/z²) = z (ln(p² + z²) − ln z²)
    let bz = (a_ln(z, r0) - a_ln(z, z * z)) - (a_ln(zh, rh) - a_ln(zh, zh * zh))
        - 2.0 * (a_atan(p, zh) - a_atan(p, z));
    let scale = prm.mu0 * prm.i / (4.0 * PI);
    (scale * bx, scale * bz)
}

/// Magnetic field `(B_x, B_y, B_z)` of the rectangular wire.
pub fn wire_field(x: f64, z: f64, prm: &WireParams) -> [f64; 3] {
    let (bxp, bzp) = wire_half(x + 0.5 * prm.w, z, prm);
    let (bxm, bzm) = wire_half(x - 0.5 * prm.w, z, prm);
    [bxp - bxm, 0.0, bzp - bzm]
}

/// Circular loop of radius `a` in the plane `z = 0` carrying current `I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopParams {
    pub a: f64,
    pub current: f64,
    pub mu0: f64,
}

impl LoopParams {
    pub fn new(a: f64, current: f64, mu0: f64) -> Result<Self> {
        if !(a > 0.0 && mu0 > 0.0) {
            return Err(Error::InvalidParameter("loop radius and mu0 must be positive".into()));
        }
        Ok(LoopParams { a, current, mu0 })
    }

    /// Field magnitude at the loop centre.
    pub fn b_center(&self) -> f64 {
        self.current * self.mu0 / (2.0 * self.a)
    }

    /// On-axis field `μ0 I a² / (2 (a² + z²)^{3/2})`.
    pub fn on_axis(&self, z: f64) -> f64 {
        let a2 = self.a * self.a;
        self.mu0 * self.current * a2 / (2.0 * (a2 + z * z).powf(1.5))
    }
}

const NEAR_AXIS: f64 = 1e-3;

/// `(B_r, B_z)` of the current loop at cylindrical `(r, z)`, `r ≥ 0`.
pub fn loop_field(r: f64, z: f64, prm: &LoopParams) -> Result<(f64, f64)> {
    if !(r >= 0.0) {
        return Err(Error::DomainError(format!("radius {r} must be non-negative")));
    }
    let alpha = r / prm.a;
    let beta = z / prm.a;
    let q = (1.0 + alpha).powi(2) + beta * beta;
    let dist2 = (1.0 - alpha).powi(2) + beta * beta;
    if dist2 < 1e-24 {
        return Err(Error::OnFilament);
    }
    let k = (4.0 * alpha / q).sqrt();
    let (kk, ee) = elliptic_ke(k)?;
    let b0 = prm.b_center();
    // Q − 4α = (1 − α)² + β² without cancellation
    let denom = dist2;
    let bz = b0 / (PI * q.sqrt()) * (ee * (1.0 - alpha * alpha - beta * beta) / denom + kk);
    let br = if alpha < NEAR_AXIS {
        // B_r = −(r/2) ∂z Bz0 + (r³/16) ∂z³ Bz0 on the axis expansion
        let a2 = prm.a * prm.a;
        let s = a2 + z * z;
        let c = prm.mu0 * prm.current * a2 / 2.0;
        let d1 = -3.0 * z * s.powf(-2.5);
        let d3 = 45.0 * z * s.powf(-3.5) - 105.0 * z.powi(3) * s.powf(-4.5);
        c * (-0.5 * r * d1 + r.powi(3) / 16.0 * d3)
    } else {
        let gamma = z / r;
        b0 * gamma / (PI * q.sqrt()) * (ee * (1.0 + alpha * alpha + beta * beta) / denom - kk)
    };
    Ok((br, bz))
}
