//! Manufactured solution on `[0, 1]` between an insulating and a conducting wall.
//!
//! The forcing is obtained by automatic differentiation of a separate, generic
//! evaluation of the continuous fluxes, so it does not reuse the solver's pointwise code.

use std::f64::consts::PI;
use std::sync::Arc;

use num_dual::{Dual, Dual64, DualNum};

use crate::error::Result;
use crate::fluxes::{DissParams, GlmParams};
use crate::sbp::discrete_l2_error;
use crate::solver1d::{Boundary, Field, Forcing, Mesh1D, Method, Physics, Solver};
use crate::thermo::{prim_from_cons_vec, GasParams, PrimState, Vec3, Vec9};
use crate::wall_bc::{HeatFlux, MagneticWall, WallSpec};

/// Tangential wall velocity shared by both walls.
const WALL_V2: f64 = 0.2;

/// Smooth exact primitive state; time-dependent parts vanish (with their slopes) at the walls.
fn exact<D: DualNum<Primitive = f64> + Copy>(x: D, t: D) -> [D; 9] {
    let two_pi = 2.0 * PI;
    let s1 = (x * PI).sin();
    let env = s1 * s1;
    let st = (t * two_pi).sin();
    let ct = (t * two_pi).cos();
    let s2 = (x * two_pi).sin();
    let one = D::from(1.0);
    [
        one + (x * two_pi + 0.3).sin() * 0.2 + s2 * ct * 0.1,
        s1 * (one + st * 0.5) * 0.3,
        D::from(WALL_V2) + s1 * 0.3 + env * st * 0.1,
        s2 * (one + ct * 0.3) * 0.2,
        one + (x * (PI / 2.0) + 0.2).sin() * 0.15 + env * ct * 0.1,
        D::from(0.6) + s1 * 0.1,
        D::from(0.3) + (x * 1.5).cos() * 0.2 + env * st * 0.1,
        D::from(-0.1) + (x + 0.4).sin() * 0.2 + env * ct * 0.1,
        s2 * ct * 0.05,
    ]
}

fn cons<D: DualNum<Primitive = f64> + Copy>(v: &[D; 9], gas: &GasParams) -> [D; 9] {
    let rho = v[0];
    let p = rho * v[4] * gas.r;
    let kin = v[1] * v[1] + v[2] * v[2] + v[3] * v[3];
    let mag = v[5] * v[5] + v[6] * v[6] + v[7] * v[7] + v[8] * v[8];
    [
        rho,
        rho * v[1],
        rho * v[2],
        rho * v[3],
        p / (gas.gamma - 1.0) + rho * kin * 0.5 + mag * (0.5 / gas.mu0),
        v[5],
        v[6],
        v[7],
        v[8],
    ]
}

fn advective<D: DualNum<Primitive = f64> + Copy>(v: &[D; 9], gas: &GasParams, glm: &GlmParams) -> [D; 9] {
    let (rho, u1, u2, u3) = (v[0], v[1], v[2], v[3]);
    let (b1, b2, b3, psi) = (v[5], v[6], v[7], v[8]);
    let p = rho * v[4] * gas.r;
    let bsq = b1 * b1 + b2 * b2 + b3 * b3;
    let vb = u1 * b1 + u2 * b2 + u3 * b3;
    let kin = u1 * u1 + u2 * u2 + u3 * u3;
    let mu0 = gas.mu0;
    let ch = glm.c_h;
    [
        rho * u1,
        rho * u1 * u1 + p + (bsq * 0.5 - b1 * b1) / mu0,
        rho * u1 * u2 - b1 * b2 / mu0,
        rho * u1 * u3 - b1 * b3 / mu0,
        u1 * (rho * kin * 0.5 + p * (gas.gamma / (gas.gamma - 1.0))) + (u1 * bsq - b1 * vb) / mu0 + psi * b1 * (ch / mu0),
        psi * ch,
        u1 * b2 - u2 * b1,
        u1 * b3 - u3 * b1,
        b1 * ch,
    ]
}

fn viscous<D: DualNum<Primitive = f64> + Copy>(v: &[D; 9], dv: &[D; 9], gas: &GasParams) -> [D; 9] {
    let mu = gas.mu_ns;
    let eta = gas.mu_r / gas.mu0;
    let zero = D::from(0.0);
    let tau11 = dv[1] * (4.0 / 3.0 * mu);
    let tau12 = dv[2] * mu;
    let tau13 = dv[3] * mu;
    let j2 = dv[6] * eta;
    let j3 = dv[7] * eta;
    [
        zero,
        tau11,
        tau12,
        tau13,
        v[1] * tau11 + v[2] * tau12 + v[3] * tau13 + dv[4] * gas.kappa + (v[6] * j2 + v[7] * j3) / gas.mu0,
        zero,
        j2,
        j3,
        zero,
    ]
}

/// Closed wall problem with a manufactured forcing.
#[derive(Clone, Copy, Debug)]
pub struct ManufacturedProblem {
    pub physics: Physics,
    /// Wall conductance at the right wall.
    pub c_d: f64,
}

impl ManufacturedProblem {
    /// `γ = 1.4, Ma = 0.5, Re = 100, Pr = 0.72, Mm = 1, Rm = 100`, `c_h = 1`, `α = 0.5`,
    /// LLF and viscous interface dissipation on.
    pub fn standard() -> Result<Self> {
        let gas = GasParams::from_nondimensional(1.4, 0.5, 100.0, 0.72, 1.0, 100.0)?;
        Ok(ManufacturedProblem {
            physics: Physics {
                gas,
                glm: GlmParams::new(1.0, 0.5)?,
                diss: DissParams {
                    beta_visc: 1.0,
                    llf_enabled: true,
                },
            },
            c_d: 1.0,
        })
    }

    pub fn exact_prim_values(&self, x: f64, t: f64) -> [f64; 9] {
        exact(x, t)
    }

    pub fn exact_prim(&self, x: f64, t: f64) -> Result<PrimState> {
        PrimState::from_vec(Vec9::from(exact(x, t)))
    }

    /// `∂ₓ` of the exact primitives.
    pub fn exact_prim_dx(&self, x: f64, t: f64) -> [f64; 9] {
        exact(Dual64::from(x).derivative(), Dual64::from(t)).map(|d| d.eps)
    }

    pub fn boundaries(&self) -> (Boundary, Boundary) {
        let gas = &self.physics.gas;
        let v_wall = Vec3::new(0.0, WALL_V2, 0.0);
        let (v0, v1) = (exact(0.0, 0.0), exact(1.0, 0.0));
        let (d0, d1) = (self.exact_prim_dx(0.0, 0.0), self.exact_prim_dx(1.0, 0.0));
        let left = WallSpec {
            v_wall,
            g_heat: HeatFlux::Constant(-gas.kappa * d0[4] / v0[4]),
            magnetic: MagneticWall::Insulating {
                b0: Vec3::new(v0[5], v0[6], v0[7]),
            },
        };
        let right = WallSpec {
            v_wall,
            g_heat: HeatFlux::Constant(gas.kappa * d1[4] / v1[4]),
            magnetic: MagneticWall::Conducting {
                c_d: self.c_d,
                b0: Vec3::new(v1[5], v1[6] + self.c_d * d1[6], v1[7] + self.c_d * d1[7]),
            },
        };
        (Boundary::Wall(left), Boundary::Wall(right))
    }

    /// Forcing `∂ₜu + ∂ₓfᵃ + φᴹ∂ₓB₁ + φᴳ∂ₓψ − ∂ₓfᵛ − r` at `(x, t)`.
    pub fn forcing_at(&self, x: f64, t: f64) -> Vec9 {
        let gas = &self.physics.gas;
        let glm = &self.physics.glm;
        let dt_u = cons(&exact(Dual64::from(x), Dual64::from(t).derivative()), gas).map(|d| d.eps);

        let vx = exact(Dual64::from(x).derivative(), Dual64::from(t));
        let dx_fa = advective(&vx, gas, glm).map(|d| d.eps);
        let v = vx.map(|d| d.re);
        let dv = vx.map(|d| d.eps);

        // nested duals carry the primitives and their slopes, both differentiated in x
        let xx: Dual<Dual64> = Dual::new(Dual64::from(x).derivative(), Dual64::from(1.0));
        let vv = exact(xx, Dual::from_re(Dual64::from(t)));
        let val = vv.map(|d| d.re);
        let slope = vv.map(|d| d.eps);
        let dx_fv = viscous(&val, &slope, gas).map(|d| d.eps);

        let mu0 = gas.mu0;
        let powell = [0.0, v[5] / mu0, v[6] / mu0, v[7] / mu0, (v[1] * v[5] + v[2] * v[6] + v[3] * v[7]) / mu0, v[1], v[2], v[3], 0.0];
        let mut s = Vec9::zeros();
        for i in 0..9 {
            s[i] = dt_u[i] + dx_fa[i] + powell[i] * dv[5] - dx_fv[i];
        }
        s[4] += v[1] * v[8] / mu0 * dv[8];
        s[8] += v[1] * dv[8];
        s[8] += glm.alpha * v[8];
        if let Some(th) = glm.thermal {
            s[4] += th.alpha_t * th.rho0 / gas.gamma * (v[4] - th.t0);
        }
        s
    }

    pub fn forcing(&self) -> Forcing {
        let me = *self;
        Arc::new(move |x, t| me.forcing_at(x, t))
    }

    pub fn solver(&self, elements: usize, degree: usize) -> Result<Solver> {
        let (left, right) = self.boundaries();
        let mesh = Mesh1D::uniform(0.0, 1.0, elements, degree, left, right)?;
        Ok(Solver::new(mesh, self.physics)?.with_forcing(self.forcing()))
    }

    pub fn initial_state(&self, solver: &Solver) -> Result<Field> {
        solver.project(|x| self.exact_prim(x, 0.0))
    }

    /// Discrete L2 errors of every primitive variable at time `t`.
    pub fn errors(&self, solver: &Solver, u: &Field, t: f64) -> Result<[f64; 9]> {
        let mesh = &solver.mesh;
        let gas = &self.physics.gas;
        let jac: Vec<f64> = (0..mesh.n_elements()).map(|e| mesh.jacobian(e)).collect();
        let mut out = [0.0; 9];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut rows = Vec::with_capacity(u.len());
            for (e, row) in u.iter().enumerate() {
                let mut r = Vec::with_capacity(row.len());
                for (k, uk) in row.iter().enumerate() {
                    let v = prim_from_cons_vec(uk, gas)?;
                    r.push(v.as_vec()[i] - exact(mesh.node_x(e, k), t)[i]);
                }
                rows.push(r);
            }
            *slot = discrete_l2_error(&mesh.sbp, &jac, &rows)?;
        }
        Ok(out)
    }
}

/// One refinement level of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceLevel {
    pub elements: usize,
    pub h: f64,
    /// Euclidean combination of the L2 errors of all nine primitive variables.
    pub error_u: f64,
    /// L2 error of the tangential velocity `v₂`.
    pub error_v2: f64,
    /// L2 error of the tangential field `B₂`.
    pub error_b2: f64,
    /// Rates against the previous level, `None` on the coarsest level or at roundoff.
    pub rate_u: Option<f64>,
    pub rate_v2: Option<f64>,
    pub rate_b2: Option<f64>,
}

/// Errors below this are treated as exact and get no rate.
pub const ROUNDOFF_ERROR: f64 = 1e-13;

fn rate(prev: f64, cur: f64, ratio: f64) -> Option<f64> {
    if prev < ROUNDOFF_ERROR || cur < ROUNDOFF_ERROR {
        None
    } else {
        Some((prev / cur).ln() / ratio.ln())
    }
}

/// Integrates the manufactured problem to `t_end` on each mesh and tabulates errors and rates.
pub fn convergence_study(
    problem: &ManufacturedProblem,
    degree: usize,
    elements: &[usize],
    t_end: f64,
    method: &Method,
) -> Result<Vec<ConvergenceLevel>> {
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(elements.len());
    for &ne in elements {
        let solver = problem.solver(ne, degree)?;
        let u0 = problem.initial_state(&solver)?;
        let (u, _) = solver.advance(&u0, 0.0, t_end, method, |_, _| Ok(()))?;
        let err = problem.errors(&solver, &u, t_end)?;
        let h = 1.0 / ne as f64;
        let error_u = err.iter().map(|e| e * e).sum::<f64>().sqrt();
        let (rate_u, rate_v2, rate_b2) = match out.last() {
            Some(prev) => (
                rate(prev.error_u, error_u, prev.h / h),
                rate(prev.error_v2, err[2], prev.h / h),
                rate(prev.error_b2, err[6], prev.h / h),
            ),
            None => (None, None, None),
        };
        out.push(ConvergenceLevel {
            elements: ne,
            h,
            error_u,
            error_v2: err[2],
            error_b2: err[6],
            rate_u,
            rate_v2,
            rate_b2,
        });
    }
    Ok(out)
}
