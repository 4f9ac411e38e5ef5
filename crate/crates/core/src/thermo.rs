//! Gas model, state representations and entropy quantities.
//!
//! All 9-vectors use the component order
//! `(ρ, ρv₁, ρv₂, ρv₃, E, B₁, B₂, B₃, ψ)` for conservative states,
//! `(ρ, v₁, v₂, v₃, T, B₁, B₂, B₃, ψ)` for primitive states, and the
//! matching order for entropy variables. Indices are zero-based.

use nalgebra::{SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub type Vec9 = SVector<f64, 9>;
pub type Mat9 = SMatrix<f64, 9, 9>;
pub type Vec3 = Vector3<f64>;

/// Material constants of the ideal, visco-resistive, heat-conducting plasma.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GasParams {
    pub gamma: f64,
    pub r: f64,
    pub mu0: f64,
    pub mu_ns: f64,
    pub mu_r: f64,
    pub kappa: f64,
    pub t_ref: f64,
    pub rho_ref: f64,
}

impl GasParams {
    /// Builds a parameter set with unit reference temperature and density.
    pub fn new(gamma: f64, r: f64, mu0: f64, mu_ns: f64, mu_r: f64, kappa: f64) -> Result<Self> {
        let gas = GasParams {
            gamma,
            r,
            mu0,
            mu_ns,
            mu_r,
            kappa,
            t_ref: 1.0,
            rho_ref: 1.0,
        };
        gas.validate()?;
        Ok(gas)
    }

    /// Parameters of the non-dimensional equations.
    ///
    /// Velocities are scaled by U*, pressure by ρ*U*², temperature by T* and the
    /// magnetic field by B*. With unit reference gas constant, viscosity,
    /// conductivity and resistivity this gives R = 1/(γMa²), μ0 = Mm²,
    /// μ_NS = 1/Re, κ = c_p μ_NS / Pr and μ_R = Mm²/Rm.
    pub fn from_nondimensional(gamma: f64, ma: f64, re: f64, pr: f64, mm: f64, rm: f64) -> Result<Self> {
        for (name, value) in [("Ma", ma), ("Re", re), ("Pr", pr), ("Mm", mm), ("Rm", rm)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {gamma}")));
        }
        let r = 1.0 / (gamma * ma * ma);
        let mu_ns = 1.0 / re;
        let cp = gamma * r / (gamma - 1.0);
        let mu0 = mm * mm;
        GasParams::new(gamma, r, mu0, mu_ns, mu0 / rm, cp * mu_ns / pr)
    }

    /// Same gas with all transport coefficients set to zero.
    pub fn ideal(&self) -> Self {
        GasParams {
            mu_ns: 0.0,
            mu_r: 0.0,
            kappa: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.r > 0.0) {
            return bad(format!("R must be positive, got {}", self.r));
        }
        if !(self.mu0 > 0.0) {
            return bad(format!("mu0 must be positive, got {}", self.mu0));
        }
        if !(self.mu_ns >= 0.0 && self.mu_r >= 0.0 && self.kappa >= 0.0) {
            return bad("transport coefficients must be non-negative".into());
        }
        if !(self.t_ref > 0.0 && self.rho_ref > 0.0) {
            return bad("reference temperature and density must be positive".into());
        }
        Ok(())
    }

    pub fn cv(&self) -> f64 {
        self.r / (self.gamma - 1.0)
    }

    pub fn cp(&self) -> f64 {
        self.gamma * self.r / (self.gamma - 1.0)
    }
}

/// Conservative state `u = (ρ, ρv⃗, E, B⃗, ψ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsState(Vec9);

/// Primitive state `v = (ρ, v⃗, T, B⃗, ψ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimState(Vec9);

/// Entropy variables `w = ∂S/∂u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyVars(Vec9);

fn check_positive_density(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveDensity(rho))
    }
}

impl ConsState {
    pub fn new(rho: f64, mom: Vec3, energy: f64, b: Vec3, psi: f64, gas: &GasParams) -> Result<Self> {
        Self::from_vec(
            Vec9::from_column_slice(&[rho, mom.x, mom.y, mom.z, energy, b.x, b.y, b.z, psi]),
            gas,
        )
    }

    /// Wraps a raw vector, checking density and pressure positivity.
    pub fn from_vec(u: Vec9, gas: &GasParams) -> Result<Self> {
        check_positive_density(u[0])?;
        let p = raw_pressure(&u, gas);
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositivePressure(p));
        }
        Ok(ConsState(u))
    }

    pub fn as_vec(&self) -> &Vec9 {
        &self.0
    }

    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn mom(&self) -> Vec3 {
        Vec3::new(self.0[1], self.0[2], self.0[3])
    }

    pub fn energy(&self) -> f64 {
        self.0[4]
    }

    pub fn mag(&self) -> Vec3 {
        Vec3::new(self.0[5], self.0[6], self.0[7])
    }

    pub fn psi(&self) -> f64 {
        self.0[8]
    }
}

fn raw_pressure(u: &Vec9, gas: &GasParams) -> f64 {
    let rho = u[0];
    let kinetic = 0.5 * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]) / rho;
    let magnetic = 0.5 * (u[5] * u[5] + u[6] * u[6] + u[7] * u[7] + u[8] * u[8]) / gas.mu0;
    (gas.gamma - 1.0) * (u[4] - kinetic - magnetic)
}

impl PrimState {
    pub fn new(rho: f64, v: Vec3, temp: f64, b: Vec3, psi: f64) -> Result<Self> {
        Self::from_vec(Vec9::from_column_slice(&[
            rho, v.x, v.y, v.z, temp, b.x, b.y, b.z, psi,
        ]))
    }

    /// Wraps a raw vector, checking density and temperature positivity.
    pub fn from_vec(v: Vec9) -> Result<Self> {
        check_positive_density(v[0])?;
        if !(v[4] > 0.0) || !v[4].is_finite() {
            return Err(Error::NonPositiveTemperature(v[4]));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite primitive state".into()));
        }
        Ok(PrimState(v))
    }

    pub fn as_vec(&self) -> &Vec9 {
        &self.0
    }

    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    pub fn vel(&self) -> Vec3 {
        Vec3::new(self.0[1], self.0[2], self.0[3])
    }

    pub fn temp(&self) -> f64 {
        self.0[4]
    }

    pub fn mag(&self) -> Vec3 {
        Vec3::new(self.0[5], self.0[6], self.0[7])
    }

    pub fn psi(&self) -> f64 {
        self.0[8]
    }

    pub fn pressure(&self, gas: &GasParams) -> f64 {
        self.rho() * gas.r * self.temp()
    }

    /// Inverse temperature scaled by R, `β = ρ/p = 1/(RT)`.
    pub fn beta(&self, gas: &GasParams) -> f64 {
        1.0 / (gas.r * self.temp())
    }

    pub fn to_cons(&self, gas: &GasParams) -> ConsState {
        let v = &self.0;
        let rho = v[0];
        let vel = self.vel();
        let b = self.mag();
        let energy = self.pressure(gas) / (gas.gamma - 1.0)
            + 0.5 * rho * vel.norm_squared()
            + 0.5 * (b.norm_squared() + v[8] * v[8]) / gas.mu0;
        ConsState(Vec9::from_column_slice(&[
            rho,
            rho * vel.x,
            rho * vel.y,
            rho * vel.z,
            energy,
            b.x,
            b.y,
            b.z,
            v[8],
        ]))
    }

    /// Specific entropy `s = R/(γ−1) ln(T/T*) − R ln(ρ/ρ*)`.
    pub fn specific_entropy(&self, gas: &GasParams) -> f64 {
        gas.cv() * (self.temp() / gas.t_ref).ln() - gas.r * (self.rho() / gas.rho_ref).ln()
    }

    /// Mathematical entropy `S = −ρs`.
    pub fn entropy(&self, gas: &GasParams) -> f64 {
        -self.rho() * self.specific_entropy(gas)
    }

    /// x-directional entropy flux `S v₁`.
    pub fn entropy_flux(&self, gas: &GasParams) -> f64 {
        self.entropy(gas) * self.0[1]
    }

    pub fn entropy_vars(&self, gas: &GasParams) -> EntropyVars {
        let v = &self.0;
        let t = v[4];
        let vel = self.vel();
        let mut w = Vec9::zeros();
        w[0] = gas.cp() - self.specific_entropy(gas) - 0.5 * vel.norm_squared() / t;
        w[1] = v[1] / t;
        w[2] = v[2] / t;
        w[3] = v[3] / t;
        w[4] = -1.0 / t;
        for k in 5..9 {
            w[k] = v[k] / (gas.mu0 * t);
        }
        EntropyVars(w)
    }

    pub fn sound_speed(&self, gas: &GasParams) -> f64 {
        (gas.gamma * gas.r * self.temp()).sqrt()
    }

    /// Fast magnetosonic speed in the x direction.
    pub fn fast_speed_x(&self, gas: &GasParams) -> f64 {
        let rho = self.rho();
        let a2 = gas.gamma * gas.r * self.temp();
        let b = self.mag();
        let b2 = b.norm_squared() / (gas.mu0 * rho);
        let bx2 = b.x * b.x / (gas.mu0 * rho);
        let sum = a2 + b2;
        let disc = (sum * sum - 4.0 * a2 * bx2).max(0.0);
        (0.5 * (sum + disc.sqrt())).sqrt()
    }
}

impl EntropyVars {
    pub fn from_vec(w: Vec9) -> Result<Self> {
        if !(w[4] < 0.0) || !w[4].is_finite() {
            return Err(Error::NonPositiveTemperature(-1.0 / w[4]));
        }
        Ok(EntropyVars(w))
    }

    pub fn as_vec(&self) -> &Vec9 {
        &self.0
    }

    /// Recovers the primitive state; exact inverse of [`PrimState::entropy_vars`].
    pub fn to_prim(&self, gas: &GasParams) -> Result<PrimState> {
        let w = &self.0;
        let t = -1.0 / w[4];
        let vel = Vec3::new(w[1], w[2], w[3]) * t;
        let exponent = (w[0] - gas.cp() + gas.cv() * (t / gas.t_ref).ln() + 0.5 * vel.norm_squared() / t) / gas.r;
        let rho = gas.rho_ref * exponent.exp();
        let mut v = Vec9::zeros();
        v[0] = rho;
        v[1] = vel.x;
        v[2] = vel.y;
        v[3] = vel.z;
        v[4] = t;
        for k in 5..9 {
            v[k] = gas.mu0 * t * w[k];
        }
        PrimState::from_vec(v)
    }
}

pub fn pressure(u: &ConsState, gas: &GasParams) -> Result<f64> {
    let p = raw_pressure(&u.0, gas);
    if p > 0.0 {
        Ok(p)
    } else {
        Err(Error::NonPositivePressure(p))
    }
}

pub fn cons_to_prim(u: &ConsState, gas: &GasParams) -> Result<PrimState> {
    let rho = u.rho();
    check_positive_density(rho)?;
    let p = pressure(u, gas)?;
    let mut v = *u.as_vec();
    v[1] /= rho;
    v[2] /= rho;
    v[3] /= rho;
    v[4] = p / (rho * gas.r);
    PrimState::from_vec(v)
}

/// Converts a raw conservative vector, reporting which positivity condition failed.
pub fn prim_from_cons_vec(u: &Vec9, gas: &GasParams) -> Result<PrimState> {
    check_positive_density(u[0])?;
    cons_to_prim(&ConsState::from_vec(*u, gas)?, gas)
}

pub fn prim_to_cons(v: &PrimState, gas: &GasParams) -> ConsState {
    v.to_cons(gas)
}

pub fn entropy_vars(u: &ConsState, gas: &GasParams) -> Result<EntropyVars> {
    Ok(cons_to_prim(u, gas)?.entropy_vars(gas))
}

pub fn entropy_function(u: &ConsState, gas: &GasParams) -> Result<f64> {
    Ok(cons_to_prim(u, gas)?.entropy(gas))
}

pub fn specific_entropy(v: &PrimState, gas: &GasParams) -> f64 {
    v.specific_entropy(gas)
}

pub fn entropy_flux(u: &ConsState, gas: &GasParams) -> Result<f64> {
    Ok(cons_to_prim(u, gas)?.entropy_flux(gas))
}

/// `∂v/∂w` in closed form.
pub fn dvdw_jacobian(v: &PrimState, gas: &GasParams) -> Mat9 {
    let s = v.as_vec();
    let rho = s[0];
    let t = s[4];
    let vel = v.vel();
    let mut m = Mat9::zeros();
    // density depends on every hydrodynamic entropy variable
    m[(0, 0)] = rho / gas.r;
    for i in 0..3 {
        m[(0, 1 + i)] = rho * vel[i] / gas.r;
    }
    m[(0, 4)] = rho / gas.r * (gas.r * t / (gas.gamma - 1.0) + 0.5 * vel.norm_squared());
    for i in 0..3 {
        m[(1 + i, 1 + i)] = t;
        m[(1 + i, 4)] = vel[i] * t;
    }
    m[(4, 4)] = t * t;
    for k in 5..9 {
        m[(k, k)] = gas.mu0 * t;
        m[(k, 4)] = s[k] * t;
    }
    m
}

/// `∂w/∂v` in closed form.
pub fn dwdv_jacobian(v: &PrimState, gas: &GasParams) -> Mat9 {
    let s = v.as_vec();
    let rho = s[0];
    let t = s[4];
    let vel = v.vel();
    let mut m = Mat9::zeros();
    m[(0, 0)] = gas.r / rho;
    for i in 0..3 {
        m[(0, 1 + i)] = -vel[i] / t;
        m[(1 + i, 1 + i)] = 1.0 / t;
        m[(1 + i, 4)] = -vel[i] / (t * t);
    }
    m[(0, 4)] = -gas.cv() / t + 0.5 * vel.norm_squared() / (t * t);
    m[(4, 4)] = 1.0 / (t * t);
    for k in 5..9 {
        m[(k, k)] = 1.0 / (gas.mu0 * t);
        m[(k, 4)] = -s[k] / (gas.mu0 * t * t);
    }
    m
}
