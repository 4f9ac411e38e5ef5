//! Pointwise and two-point fluxes, non-conservative terms, diffusion matrices
//! and interface dissipation operators.

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::thermo::{dvdw_jacobian, GasParams, Mat9, PrimState, Vec3, Vec9};

/// Primitive-variable gradient: column `k` holds `∂v/∂x_k`.
pub type PrimGradient = SMatrix<f64, 9, 3>;

/// Optional temperature relaxation added to the energy equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalRelaxation {
    pub alpha_t: f64,
    pub t0: f64,
    pub rho0: f64,
}

/// Divergence-cleaning parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlmParams {
    pub c_h: f64,
    pub alpha: f64,
    pub thermal: Option<ThermalRelaxation>,
}

impl GlmParams {
    pub fn new(c_h: f64, alpha: f64) -> Result<Self> {
        let glm = GlmParams {
            c_h,
            alpha,
            thermal: None,
        };
        glm.validate()?;
        Ok(glm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_h >= 0.0 && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter("c_h and alpha must be non-negative".into()));
        }
        if let Some(th) = self.thermal {
            if !(th.alpha_t >= 0.0 && th.t0 > 0.0 && th.rho0 > 0.0) {
                return Err(Error::InvalidParameter(
                    "thermal relaxation needs alpha_t >= 0 and positive T0, rho0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Strength of the interface dissipation operators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DissParams {
    pub beta_visc: f64,
    pub llf_enabled: bool,
}

impl DissParams {
    pub const NONE: DissParams = DissParams {
        beta_visc: 0.0,
        llf_enabled: false,
    };

    pub fn validate(&self) -> Result<()> {
        if self.beta_visc >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "beta_visc must be non-negative, got {}",
                self.beta_visc
            )))
        }
    }
}

fn avg(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// Logarithmic mean `(b − a)/(ln b − ln a)` with a series branch near `a = b`.
pub fn logarithmic_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::NonPositiveInput(a));
    }
    if !(b > 0.0) {
        return Err(Error::NonPositiveInput(b));
    }
    Ok(ln_mean(a, b))
}

/// Unchecked logarithmic mean for positive arguments.
pub(crate) fn ln_mean(a: f64, b: f64) -> f64 {
    // ordered arguments keep the mean bitwise symmetric
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let zeta = (a - b) / (a + b);
    let u = zeta * zeta;
    if u < 1e-8 {
        // |ζ| < 1e-4: ln(b/a) = −2ζ(1 + u/3 + u²/5 + u³/7 + …)
        (a + b) / (2.0 * (1.0 + u / 3.0 + u * u / 5.0 + u * u * u / 7.0))
    } else {
        (b - a) / ((b - a) / a).ln_1p()
    }
}

/// Euler + MHD + GLM advective flux in the x direction.
pub fn advective_flux_x(v: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    let rho = v.rho();
    let vel = v.vel();
    let b = v.mag();
    let psi = v.psi();
    let p = v.pressure(gas);
    let mu0 = gas.mu0;
    let v1 = vel.x;
    let b2 = b.norm_squared();
    let vb = vel.dot(&b);
    let mut f = Vec9::zeros();
    f[0] = rho * v1;
    f[1] = rho * v1 * v1 + p + (0.5 * b2 - b.x * b.x) / mu0;
    f[2] = rho * v1 * vel.y - b.x * b.y / mu0;
    f[3] = rho * v1 * vel.z - b.x * b.z / mu0;
    f[4] = v1 * (0.5 * rho * vel.norm_squared() + gas.gamma * p / (gas.gamma - 1.0))
        + (v1 * b2 - b.x * vb) / mu0
        + glm.c_h * psi * b.x / mu0;
    f[5] = glm.c_h * psi;
    f[6] = v1 * b.y - vel.y * b.x;
    f[7] = v1 * b.z - vel.z * b.x;
    f[8] = glm.c_h * b.x;
    f
}

/// Powell term multiplier of `∂ₓB₁`.
pub fn powell_phi(v: &PrimState, gas: &GasParams) -> Vec9 {
    let vel = v.vel();
    let b = v.mag();
    let mu0 = gas.mu0;
    Vec9::from_column_slice(&[
        0.0,
        b.x / mu0,
        b.y / mu0,
        b.z / mu0,
        vel.dot(&b) / mu0,
        vel.x,
        vel.y,
        vel.z,
        0.0,
    ])
}

/// GLM non-conservative multiplier of `∂ₓψ`.
pub fn glm_phi(v: &PrimState, gas: &GasParams) -> Vec9 {
    let mut phi = Vec9::zeros();
    phi[4] = v.vel().x * v.psi() / gas.mu0;
    phi[8] = v.vel().x;
    phi
}

/// Visco-resistive flux in the x direction from the x-gradient of primitives.
pub fn viscous_flux_x(v: &PrimState, theta: &Vec9, gas: &GasParams) -> Vec9 {
    let vel = v.vel();
    let b = v.mag();
    let mu = gas.mu_ns;
    let eta = gas.mu_r / gas.mu0;
    let mut f = Vec9::zeros();
    f[1] = 4.0 / 3.0 * mu * theta[1];
    f[2] = mu * theta[2];
    f[3] = mu * theta[3];
    f[4] = mu * (4.0 / 3.0 * vel.x * theta[1] + vel.y * theta[2] + vel.z * theta[3])
        + gas.kappa * theta[4]
        + eta / gas.mu0 * (b.y * theta[6] + b.z * theta[7]);
    f[6] = eta * theta[6];
    f[7] = eta * theta[7];
    f
}

/// Visco-resistive flux through a surface with unit normal `n`, from the full gradient.
pub fn viscous_flux_normal(v: &PrimState, grad: &PrimGradient, n: &Vec3, gas: &GasParams) -> Vec9 {
    let vel = v.vel();
    let b = v.mag();
    let mu = gas.mu_ns;
    let eta = gas.mu_r / gas.mu0;
    let lv = grad.fixed_view::<3, 3>(1, 0).into_owned();
    let lb = grad.fixed_view::<3, 3>(5, 0).into_owned();
    let div = lv.trace();
    let tau = (lv + lv.transpose()) * mu - nalgebra::Matrix3::identity() * (2.0 / 3.0 * mu * div);
    let tau_n = tau * n;
    let curl_n = (lb - lb.transpose()) * n;
    let grad_t: Vec3 = grad.row(4).transpose();
    let mut f = Vec9::zeros();
    f[1] = tau_n.x;
    f[2] = tau_n.y;
    f[3] = tau_n.z;
    f[4] = vel.dot(&tau_n) + gas.kappa * grad_t.dot(n) + eta / gas.mu0 * b.dot(&curl_n);
    f[5] = eta * curl_n.x;
    f[6] = eta * curl_n.y;
    f[7] = eta * curl_n.z;
    f
}

/// Matrix mapping the x-gradient of entropy variables to the x viscous flux.
pub fn cnu_matrix(v: &PrimState, gas: &GasParams) -> Mat9 {
    let vel = v.vel();
    let b = v.mag();
    let t = v.temp();
    let mu = gas.mu_ns;
    let eta = gas.mu_r / gas.mu0;
    let mut c = Mat9::zeros();
    let visc = [4.0 / 3.0 * mu, mu, mu];
    for i in 0..3 {
        c[(1 + i, 1 + i)] = visc[i] * t;
        c[(1 + i, 4)] = visc[i] * t * vel[i];
        c[(4, 1 + i)] = c[(1 + i, 4)];
    }
    c[(4, 4)] = t * (visc[0] * vel.x * vel.x + visc[1] * vel.y * vel.y + visc[2] * vel.z * vel.z)
        + gas.kappa * t * t
        + eta * t / gas.mu0 * (b.y * b.y + b.z * b.z);
    for k in 1..3 {
        c[(5 + k, 5 + k)] = eta * gas.mu0 * t;
        c[(5 + k, 4)] = eta * t * b[k];
        c[(4, 5 + k)] = c[(5 + k, 4)];
    }
    c
}

/// x-gradient of primitives from the x-gradient of entropy variables.
pub fn theta_from_g(v: &PrimState, g: &Vec9, gas: &GasParams) -> Vec9 {
    dvdw_jacobian(v, gas) * g
}

/// Symmetric entropy-conservative two-point flux.
pub fn ec_two_point_flux(vi: &PrimState, vj: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    let (a, b) = (vi.as_vec(), vj.as_vec());
    let mu0 = gas.mu0;
    let ch = glm.c_h;
    let rho_ln = ln_mean(a[0], b[0]);
    let beta_i = vi.beta(gas);
    let beta_j = vj.beta(gas);
    let beta_ln = ln_mean(beta_i, beta_j);
    let p_bar = avg(a[0], b[0]) / avg(beta_i, beta_j);
    let m = |k: usize| avg(a[k], b[k]);
    let m2 = |k: usize| avg(a[k] * a[k], b[k] * b[k]);
    let mp = |k: usize, l: usize| avg(a[k] * a[l], b[k] * b[l]);
    let (v1, v2, v3) = (m(1), m(2), m(3));
    let (b1, b2, b3) = (m(5), m(6), m(7));
    let psi = m(8);
    let mut f = Vec9::zeros();
    f[0] = rho_ln * v1;
    f[1] = rho_ln * v1 * v1 + p_bar + 0.5 / mu0 * (m2(5) + m2(6) + m2(7)) - b1 * b1 / mu0;
    f[2] = rho_ln * v1 * v2 - b1 * b2 / mu0;
    f[3] = rho_ln * v1 * v3 - b1 * b3 / mu0;
    f[5] = ch * psi;
    f[6] = v1 * b2 - v2 * b1;
    f[7] = v1 * b3 - v3 * b1;
    f[8] = ch * b1;
    let v1b2 = |k: usize| avg(a[1] * a[k] * a[k], b[1] * b[k] * b[k]);
    f[4] = f[0] * (1.0 / ((gas.gamma - 1.0) * beta_ln) - 0.5 * (m2(1) + m2(2) + m2(3)))
        + f[1] * v1
        + f[2] * v2
        + f[3] * v3
        + (f[5] * b1 + f[6] * b2 + f[7] * b3 - 0.5 * (v1b2(5) + v1b2(6) + v1b2(7))
            + (mp(1, 5) + mp(2, 6) + mp(3, 7)) * b1
            + f[8] * psi
            - ch * mp(5, 8))
            / mu0;
    f
}

/// Non-symmetric two-point flux including the non-conservative terms.
pub fn nonsym_flux(vi: &PrimState, vj: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    ec_two_point_flux(vi, vj, gas, glm)
        + 0.5 * (powell_phi(vi, gas) * vj.mag().x + glm_phi(vi, gas) * vj.psi())
}

/// `Ψ* = wᵀ f*(u,u) − f^S`.
pub fn entropy_potential(v: &PrimState, gas: &GasParams, glm: &GlmParams) -> f64 {
    let w = v.entropy_vars(gas);
    w.as_vec().dot(&nonsym_flux(v, v, gas, glm)) - v.entropy_flux(gas)
}

/// Two-state entropy Jacobian approximating `∂u/∂w`.
///
/// The (5,5) entry uses `(p̄²/(γ−1) + Ē²)/ρ^ln + p̄|v̄|² + τ(|B̄|² + ψ̄²)/μ0`, which
/// reduces to the exact `∂E/∂w₅` at coincident states and keeps the matrix
/// positive definite.
pub fn h_matrix(vi: &PrimState, vj: &PrimState, gas: &GasParams) -> Mat9 {
    let (a, b) = (vi.as_vec(), vj.as_vec());
    let m = |k: usize| avg(a[k], b[k]);
    let rho_ln = ln_mean(a[0], b[0]);
    let beta_i = vi.beta(gas);
    let beta_j = vj.beta(gas);
    let beta_ln = ln_mean(beta_i, beta_j);
    let beta_avg = avg(beta_i, beta_j);
    let p_bar = m(0) / beta_avg;
    let tau = 1.0 / beta_avg;
    let vel = [m(1), m(2), m(3)];
    let vel2 = vel.iter().map(|x| x * x).sum::<f64>();
    let q2 = avg(vi.vel().norm_squared(), vj.vel().norm_squared());
    let e_bar = rho_ln / ((gas.gamma - 1.0) * beta_ln) + rho_ln * vel2 - 0.5 * rho_ln * q2;
    let mag = [m(5), m(6), m(7), m(8)];
    let mag2 = mag.iter().map(|x| x * x).sum::<f64>();

    let mut h = Mat9::zeros();
    h[(0, 0)] = rho_ln;
    h[(0, 4)] = e_bar;
    h[(4, 0)] = e_bar;
    for i in 0..3 {
        h[(0, 1 + i)] = rho_ln * vel[i];
        h[(1 + i, 0)] = rho_ln * vel[i];
        for j in 0..3 {
            h[(1 + i, 1 + j)] = rho_ln * vel[i] * vel[j];
        }
        h[(1 + i, 1 + i)] += p_bar;
        h[(1 + i, 4)] = (e_bar + p_bar) * vel[i];
        h[(4, 1 + i)] = (e_bar + p_bar) * vel[i];
    }
    h[(4, 4)] = (p_bar * p_bar / (gas.gamma - 1.0) + e_bar * e_bar) / rho_ln + p_bar * vel2 + tau * mag2 / gas.mu0;
    for k in 0..4 {
        h[(4, 5 + k)] = tau * mag[k];
        h[(5 + k, 4)] = tau * mag[k];
        h[(5 + k, 5 + k)] = tau * gas.mu0;
    }
    h / gas.r
}

/// Largest signal speed of either state in the x direction, including `c_h`.
pub fn max_wave_speed(vi: &PrimState, vj: &PrimState, gas: &GasParams, glm: &GlmParams) -> f64 {
    [vi, vj]
        .iter()
        .map(|v| (v.vel().x.abs() + v.fast_speed_x(gas)).max(glm.c_h))
        .fold(0.0, f64::max)
}

/// Local Lax–Friedrichs dissipation `½|λ|max H [[w]]` with `[[w]] = w_j − w_i`.
pub fn llf_dissipation(vi: &PrimState, vj: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    let jump = vj.entropy_vars(gas).as_vec() - vi.entropy_vars(gas).as_vec();
    0.5 * max_wave_speed(vi, vj, gas, glm) * (h_matrix(vi, vj, gas) * jump)
}

/// Viscous interface dissipation `β (C_i + C_j)/2 [[w]]`.
pub fn viscous_interface_dissipation(
    vi: &PrimState,
    vj: &PrimState,
    w_jump: &Vec9,
    gas: &GasParams,
    diss: &DissParams,
) -> Vec9 {
    if diss.beta_visc == 0.0 {
        return Vec9::zeros();
    }
    0.5 * diss.beta_visc * ((cnu_matrix(vi, gas) + cnu_matrix(vj, gas)) * w_jump)
}

/// Source term: ψ damping, plus optional temperature relaxation in the energy row.
pub fn source_term(v: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    let mut r = Vec9::zeros();
    r[8] = -glm.alpha * v.psi();
    if let Some(th) = glm.thermal {
        r[4] = -th.alpha_t * th.rho0 / gas.gamma * (v.temp() - th.t0);
    }
    r
}
