//! Ghost states and ghost gradients for walls, inlets and outlets.
//!
//! Every generator works with an arbitrary outward unit normal `n`. Gradients
//! are 9×3 blocks whose column `k` holds `∂/∂x_k` of the primitive variables.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::fluxes::PrimGradient;
use crate::thermo::{dvdw_jacobian, dwdv_jacobian, GasParams, PrimState, Vec3, Vec9};

/// Wall heat-entropy flux `g(t) = κ ∂T/∂n / T`.
#[derive(Clone)]
pub enum HeatFlux {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl HeatFlux {
    pub const ADIABATIC: HeatFlux = HeatFlux::Constant(0.0);

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            HeatFlux::Constant(g) => *g,
            HeatFlux::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for HeatFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeatFlux::Constant(g) => write!(f, "Constant({g})"),
            HeatFlux::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Electromagnetic character of a wall and its external field `B⁰`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MagneticWall {
    Insulating { b0: Vec3 },
    Conducting { c_d: f64, b0: Vec3 },
    PerfectConducting { b0: Vec3 },
}

impl MagneticWall {
    pub fn b0(&self) -> Vec3 {
        match *self {
            MagneticWall::Insulating { b0 }
            | MagneticWall::Conducting { b0, .. }
            | MagneticWall::PerfectConducting { b0 } => b0,
        }
    }

    /// `1/c_d`, zero for a perfect conductor; `None` for an insulator.
    pub fn inverse_conductance(&self) -> Option<f64> {
        match *self {
            MagneticWall::Insulating { .. } => None,
            MagneticWall::Conducting { c_d, .. } => Some(1.0 / c_d),
            MagneticWall::PerfectConducting { .. } => Some(0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WallSpec {
    pub v_wall: Vec3,
    pub g_heat: HeatFlux,
    pub magnetic: MagneticWall,
}

impl WallSpec {
    pub fn adiabatic(magnetic: MagneticWall) -> Self {
        WallSpec {
            v_wall: Vec3::zeros(),
            g_heat: HeatFlux::ADIABATIC,
            magnetic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let MagneticWall::Conducting { c_d, .. } = self.magnetic {
            if !(c_d > 0.0) {
                return Err(Error::InvalidParameter(format!("wall conductance must be positive, got {c_d}")));
            }
        }
        Ok(())
    }
}

/// Interior side of a boundary node.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryFace {
    pub normal: Vec3,
    pub state: PrimState,
    pub gradient: PrimGradient,
}

impl BoundaryFace {
    pub fn new(normal: Vec3, state: PrimState, gradient: PrimGradient) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidParameter(format!("normal must have unit length, got {}", normal.norm())));
        }
        Ok(BoundaryFace {
            normal,
            state,
            gradient,
        })
    }
}

/// Inflow reference data: isentropic ghost state and prescribed mass flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InletSpec {
    pub p_ref: f64,
    pub t_ref: f64,
    pub rho_ref: f64,
    pub b0: Vec3,
    pub mdot: f64,
    pub area: f64,
}

fn with_vectors(v: &PrimState, vel: Vec3, b: Vec3) -> Vec9 {
    let mut s = *v.as_vec();
    s[1] = vel.x;
    s[2] = vel.y;
    s[3] = vel.z;
    s[5] = b.x;
    s[6] = b.y;
    s[7] = b.z;
    s
}

/// Mirror state that makes the advective boundary flux entropy conservative.
pub fn advective_ghost(face: &BoundaryFace, wall: &WallSpec) -> PrimState {
    let n = face.normal;
    let v = &face.state;
    let vel = v.vel() - 2.0 * v.vel().dot(&n) * n;
    let b = v.mag() - 2.0 * (v.mag().dot(&n) - wall.magnetic.b0().dot(&n)) * n;
    PrimState::from_vec(with_vectors(v, vel, b)).expect("mirror state keeps density and temperature")
}

fn thermal_gradient_shift(face: &BoundaryFace, wall: &WallSpec, t: f64, gas: &GasParams) -> Result<Vec3> {
    let g = wall.g_heat.eval(t);
    if g == 0.0 {
        return Ok(Vec3::zeros());
    }
    if gas.kappa == 0.0 {
        return Err(Error::InvalidParameter("non-zero wall heat flux requires kappa > 0".into()));
    }
    Ok(2.0 * face.state.temp() * g / gas.kappa * face.normal)
}

fn mirrored_scalar_rows(face: &BoundaryFace, shift: Vec3) -> PrimGradient {
    let mut out = face.gradient;
    for k in 0..3 {
        out[(0, k)] = -face.gradient[(0, k)];
        out[(4, k)] = -face.gradient[(4, k)] + shift[k];
        out[(8, k)] = -face.gradient[(8, k)];
    }
    out
}

/// Ghost state and gradient for an electrically insulating wall.
pub fn insulating_viscous_ghost(
    face: &BoundaryFace,
    wall: &WallSpec,
    t: f64,
    gas: &GasParams,
) -> Result<(PrimState, PrimGradient)> {
    let MagneticWall::Insulating { b0 } = wall.magnetic else {
        return Err(Error::WrongWallKind);
    };
    let v = &face.state;
    let vel = -v.vel() + 2.0 * wall.v_wall;
    let b = -v.mag() + 2.0 * b0;
    let state = PrimState::from_vec(with_vectors(v, vel, b))?;
    let grad = mirrored_scalar_rows(face, thermal_gradient_shift(face, wall, t, gas)?);
    Ok((state, grad))
}

/// Ghost state and gradient for a conducting (or perfectly conducting) wall.
pub fn conducting_viscous_ghost(
    face: &BoundaryFace,
    wall: &WallSpec,
    t: f64,
    gas: &GasParams,
) -> Result<(PrimState, PrimGradient)> {
    let inv_cd = match wall.magnetic.inverse_conductance() {
        Some(x) => x,
        None => return Err(Error::WrongWallKind),
    };
    let v = &face.state;
    let vel = -v.vel() + 2.0 * wall.v_wall;
    let state = PrimState::from_vec(with_vectors(v, vel, v.mag()))?;
    let mut grad = mirrored_scalar_rows(face, thermal_gradient_shift(face, wall, t, gas)?);
    let lb: Matrix3<f64> = face.gradient.fixed_view::<3, 3>(5, 0).into_owned();
    let jump = (wall.magnetic.b0() - v.mag()) * (2.0 * inv_cd);
    let lb_ghost = lb.transpose() + jump * face.normal.transpose();
    grad.fixed_view_mut::<3, 3>(5, 0).copy_from(&lb_ghost);
    Ok((state, grad))
}

/// Dispatches on the wall's magnetic kind.
pub fn viscous_ghost(
    face: &BoundaryFace,
    wall: &WallSpec,
    t: f64,
    gas: &GasParams,
) -> Result<(PrimState, PrimGradient)> {
    match wall.magnetic {
        MagneticWall::Insulating { .. } => insulating_viscous_ghost(face, wall, t, gas),
        _ => conducting_viscous_ghost(face, wall, t, gas),
    }
}

/// Maps an interior entropy-variable gradient to the ghost side:
/// primitives at the interior, `transform`, then back to entropy variables at the ghost.
pub fn gradient_roundtrip<F>(
    g_minus: &PrimGradient,
    state_minus: &PrimState,
    state_plus: &PrimState,
    gas: &GasParams,
    transform: F,
) -> PrimGradient
where
    F: FnOnce(&PrimGradient) -> PrimGradient,
{
    let theta_minus = dvdw_jacobian(state_minus, gas) * g_minus;
    let theta_plus = transform(&theta_minus);
    dwdv_jacobian(state_plus, gas) * theta_plus
}

/// Removes the normal component of a surface velocity.
pub fn project_wall_velocity(v_surface: &Vec3, n: &Vec3) -> Vec3 {
    v_surface - v_surface.dot(n) * n
}

fn tangential_gradient(face: &BoundaryFace) -> PrimGradient {
    let n = face.normal;
    let normal_part = face.gradient * n;
    face.gradient - normal_part * n.transpose()
}

/// Inflow ghost: isentropic with the reference state, prescribed mass flow along `−n`.
pub fn inlet_ghost(face: &BoundaryFace, inlet: &InletSpec, gas: &GasParams) -> Result<(PrimState, PrimGradient)> {
    if !(inlet.p_ref > 0.0 && inlet.t_ref > 0.0 && inlet.rho_ref > 0.0 && inlet.area > 0.0) {
        return Err(Error::InvalidParameter("inlet reference values and area must be positive".into()));
    }
    let ratio = face.state.pressure(gas) / inlet.p_ref;
    let rho = inlet.rho_ref * ratio.powf(1.0 / gas.gamma);
    let temp = inlet.t_ref * ratio.powf((gas.gamma - 1.0) / gas.gamma);
    let speed = inlet.mdot / (rho * inlet.area);
    let state = PrimState::new(rho, -speed * face.normal, temp, inlet.b0, 0.0)?;
    Ok((state, tangential_gradient(face)))
}

/// Outflow ghost at prescribed pressure, reflecting any inflowing normal velocity.
pub fn outlet_ghost(face: &BoundaryFace, p_out: f64, gas: &GasParams) -> Result<(PrimState, PrimGradient)> {
    if !(p_out > 0.0) {
        return Err(Error::NonPositivePressure(p_out));
    }
    let v = &face.state;
    let n = face.normal;
    let temp = v.temp() * p_out / v.pressure(gas);
    let vel = v.vel() - 2.0 * v.vel().dot(&n).min(0.0) * n;
    let state = PrimState::new(v.rho(), vel, temp, Vec3::zeros(), 0.0)?;
    Ok((state, tangential_gradient(face)))
}

/// Orthonormal frame whose first row is `n`; rotates vectors into the normal frame.
pub fn normal_frame(n: &Vec3) -> Matrix3<f64> {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (helper - helper.dot(n) * n).normalize();
    let t2 = n.cross(&t1);
    Matrix3::from_rows(&[n.transpose(), t1.transpose(), t2.transpose()])
}

/// Applies a rotation to the velocity and magnetic field of a state.
pub fn rotate_state(v: &PrimState, rot: &Matrix3<f64>) -> PrimState {
    PrimState::from_vec(with_vectors(v, rot * v.vel(), rot * v.mag())).expect("rotation keeps positivity")
}
