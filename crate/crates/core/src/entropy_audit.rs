//! Discrete entropy accounting: total entropy, its rate, the viscous dissipation
//! functional and per-face production terms.

use crate::error::{Error, Result};
use crate::fluxes::{
    cnu_matrix, entropy_potential, llf_dissipation, max_wave_speed, nonsym_flux, viscous_flux_normal,
    viscous_interface_dissipation, DissParams, GlmParams,
};
use crate::solver1d::{Evaluation, FaceProduction, Field, Solver};
use crate::thermo::{prim_from_cons_vec, GasParams, PrimState};
use crate::wall_bc::{advective_ghost, normal_frame, rotate_state, viscous_ghost, BoundaryFace, MagneticWall, WallSpec};

#[derive(Clone, Debug)]
pub struct EntropyReport {
    pub t: f64,
    /// `Σ Jω S(u)`.
    pub s_total: f64,
    /// `Σ Jω wᵀ du/dt`.
    pub dsdt: f64,
    /// `Σ Jω gᵀ C g`, non-negative.
    pub dissipation: f64,
    /// `dS/dt + DT`.
    pub balance: f64,
    pub faces: Vec<FaceProduction>,
    pub source_production: f64,
    pub forcing_production: f64,
}

impl EntropyReport {
    /// Balance relative to `max(|dS/dt|, DT, 1)`.
    pub fn scaled_balance(&self) -> f64 {
        self.balance / self.scale()
    }

    pub fn scale(&self) -> f64 {
        self.dsdt.abs().max(self.dissipation.abs()).max(1.0)
    }

    /// Sum of all face production terms.
    pub fn face_total(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| f.advective_cons + f.advective_diss + f.viscous_cons + f.viscous_diss)
            .sum()
    }

    /// Mismatch between `dS/dt` and the breakdown `−DT + faces + source + forcing`.
    pub fn breakdown_residual(&self) -> f64 {
        self.dsdt - (-self.dissipation + self.face_total() + self.source_production + self.forcing_production)
    }
}

/// `Σ Jω S(u)` over the mesh.
pub fn total_entropy(solver: &Solver, u: &Field) -> Result<f64> {
    let gas = &solver.physics.gas;
    let mesh = &solver.mesh;
    let mut s = 0.0;
    for (e, row) in u.iter().enumerate() {
        for (k, uk) in row.iter().enumerate() {
            let v = prim_from_cons_vec(uk, gas)?;
            s += mesh.jacobian(e) * mesh.sbp.weights[k] * v.entropy(gas);
        }
    }
    Ok(s)
}

/// Builds the report from a right-hand-side evaluation of the same state.
pub fn audit(solver: &Solver, u: &Field, eval: &Evaluation) -> Result<EntropyReport> {
    let mesh = &solver.mesh;
    let gas = &solver.physics.gas;
    let (ne, nn) = (mesh.n_elements(), mesh.n_nodes());
    let shape_ok = |f: &Field| f.len() == ne && f.iter().all(|r| r.len() == nn);
    if !shape_ok(u) || !shape_ok(&eval.dudt) || !shape_ok(&eval.w) || !shape_ok(&eval.g) {
        return Err(Error::ShapeMismatch("audit fields do not match the mesh".into()));
    }
    let mut dsdt = 0.0;
    let mut dissipation = 0.0;
    for e in 0..ne {
        for k in 0..nn {
            let jw = mesh.jacobian(e) * mesh.sbp.weights[k];
            dsdt += jw * eval.w[e][k].dot(&eval.dudt[e][k]);
            let g = &eval.g[e][k];
            dissipation += jw * g.dot(&(cnu_matrix(&eval.prim[e][k], gas) * g));
        }
    }
    Ok(EntropyReport {
        t: eval.t,
        s_total: total_entropy(solver, u)?,
        dsdt,
        dissipation,
        balance: dsdt + dissipation,
        faces: eval.faces.clone(),
        source_production: eval.source_production,
        forcing_production: eval.forcing_production,
    })
}

/// Evaluates the right-hand side and audits it.
pub fn audit_state(solver: &Solver, u: &Field, t: f64) -> Result<(EntropyReport, Evaluation)> {
    let eval = solver.evaluate(u, t)?;
    let report = audit(solver, u, &eval)?;
    Ok((report, eval))
}

/// Entropy production of a single wall face, split like the solver's face terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WallProduction {
    pub advective_cons: f64,
    pub llf: f64,
    pub viscous_cons: f64,
    pub viscous_diss: f64,
}

/// Wall production terms assembled from ghost states, fluxes and dissipation operators.
///
/// `face.gradient` is taken as the interior primitive gradient. The face is treated in
/// its normal frame, so the result does not depend on the orientation of `n`.
pub fn wall_production(
    face: &BoundaryFace,
    wall: &WallSpec,
    t: f64,
    gas: &GasParams,
    glm: &GlmParams,
    diss: &DissParams,
) -> Result<WallProduction> {
    let rot = normal_frame(&face.normal);
    let inner = rotate_state(&face.state, &rot);
    let w = *inner.entropy_vars(gas).as_vec();

    let adv = rotate_state(&advective_ghost(face, wall), &rot);
    let advective_cons = -(w.dot(&nonsym_flux(&inner, &adv, gas, glm)) - entropy_potential(&inner, gas, glm));
    let llf = w.dot(&llf_dissipation(&inner, &adv, gas, glm));

    let (ghost, ghost_grad) = viscous_ghost(face, wall, t, gas)?;
    let f_in = viscous_flux_normal(&face.state, &face.gradient, &face.normal, gas);
    let f_out = viscous_flux_normal(&ghost, &ghost_grad, &face.normal, gas);
    let w_in = *face.state.entropy_vars(gas).as_vec();
    let w_out = *ghost.entropy_vars(gas).as_vec();
    let viscous_cons = 0.5 * (w_out.dot(&f_in) + w_in.dot(&f_out));

    let ghost_r = rotate_state(&ghost, &rot);
    let jump = ghost_r.entropy_vars(gas).as_vec() - w;
    let viscous_diss = w.dot(&viscous_interface_dissipation(&inner, &ghost_r, &jump, gas, diss));
    Ok(WallProduction {
        advective_cons,
        llf,
        viscous_cons,
        viscous_diss,
    })
}

/// Closed-form wall production `(llf_term, viscous_term)` obtained by substituting the ghost states.
///
/// `llf_term = −λ(ρ v_n² + (B⁰_n − B_n)²/μ0)/T` and
/// `viscous_term = −(2β/T)[μ(4/3 Δv_n² + |Δv_t|²) + μ_R/μ0² |ΔB_t|²]` with `Δv = v^w − v`
/// and `ΔB = B⁰ − B`; the magnetic part is absent for conducting walls.
pub fn wall_production_closed_form(
    face: &BoundaryFace,
    wall: &WallSpec,
    gas: &GasParams,
    glm: &GlmParams,
    diss: &DissParams,
) -> Result<(f64, f64)> {
    let v: &PrimState = &face.state;
    let n = face.normal;
    let temp = v.temp();
    let b0 = wall.magnetic.b0();
    let vn = v.vel().dot(&n);
    let dbn = (b0 - v.mag()).dot(&n);

    let rot = normal_frame(&n);
    let lambda = max_wave_speed(
        &rotate_state(v, &rot),
        &rotate_state(&advective_ghost(face, wall), &rot),
        gas,
        glm,
    );
    let llf = if diss.llf_enabled {
        -lambda * (v.rho() * vn * vn + dbn * dbn / gas.mu0) / temp
    } else {
        0.0
    };

    let dv = wall.v_wall - v.vel();
    let dv_n = dv.dot(&n);
    let dv_t = dv - dv_n * n;
    let mut bracket = gas.mu_ns * (4.0 / 3.0 * dv_n * dv_n + dv_t.norm_squared());
    if let MagneticWall::Insulating { .. } = wall.magnetic {
        let db = b0 - v.mag();
        let db_t = db - db.dot(&n) * n;
        bracket += gas.mu_r / (gas.mu0 * gas.mu0) * db_t.norm_squared();
    }
    let viscous = -2.0 * diss.beta_visc / temp * bracket;
    Ok((llf, viscous))
}

/// Closed form for a generic boundary descriptor; only walls have one.
pub fn boundary_closed_form(
    face: &BoundaryFace,
    boundary: &crate::solver1d::Boundary,
    gas: &GasParams,
    glm: &GlmParams,
    diss: &DissParams,
) -> Result<(f64, f64)> {
    match boundary {
        crate::solver1d::Boundary::Wall(wall) => wall_production_closed_form(face, wall, gas, glm, diss),
        _ => Err(Error::WrongWallKind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluxes::PrimGradient;
    use crate::thermo::Vec3;
    use approx::assert_abs_diff_eq;

    fn gas() -> GasParams {
        GasParams::new(5.0 / 3.0, 0.7, 1.3, 0.02, 0.03, 0.05).unwrap()
    }

    #[test]
    fn matching_wall_state_produces_nothing() {
        let gas = gas();
        let glm = GlmParams::new(1.0, 0.0).unwrap();
        let diss = DissParams {
            beta_visc: 1.0,
            llf_enabled: true,
        };
        let b0 = Vec3::new(0.3, -0.2, 0.5);
        let vw = Vec3::new(0.0, 0.4, -0.1);
        let s = PrimState::new(1.0, vw, 1.2, b0, 0.1).unwrap();
        let face = BoundaryFace::new(Vec3::x(), s, PrimGradient::zeros()).unwrap();
        let wall = WallSpec {
            v_wall: vw,
            g_heat: crate::wall_bc::HeatFlux::ADIABATIC,
            magnetic: MagneticWall::Insulating { b0 },
        };
        let (llf, visc) = wall_production_closed_form(&face, &wall, &gas, &glm, &diss).unwrap();
        assert_eq!(llf, 0.0);
        assert_eq!(visc, 0.0);
    }

    #[test]
    fn closed_forms_match_assembled_terms() {
        let gas = gas();
        let glm = GlmParams::new(1.2, 0.0).unwrap();
        let diss = DissParams {
            beta_visc: 0.7,
            llf_enabled: true,
        };
        let n = Vec3::new(0.3, -0.5, 0.8).normalize();
        let s = PrimState::new(0.9, Vec3::new(0.2, -0.3, 0.1), 1.1, Vec3::new(0.4, 0.2, -0.6), 0.05).unwrap();
        let face = BoundaryFace::new(n, s, PrimGradient::zeros()).unwrap();
        for magnetic in [
            MagneticWall::Insulating { b0: Vec3::new(0.1, 0.5, 0.2) },
            MagneticWall::Conducting {
                c_d: 0.8,
                b0: Vec3::new(0.1, 0.5, 0.2),
            },
        ] {
            let wall = WallSpec {
                v_wall: Vec3::new(0.0, 0.3, 0.0),
                g_heat: crate::wall_bc::HeatFlux::ADIABATIC,
                magnetic,
            };
            let assembled = wall_production(&face, &wall, 0.0, &gas, &glm, &diss).unwrap();
            let (llf, visc) = wall_production_closed_form(&face, &wall, &gas, &glm, &diss).unwrap();
            assert_abs_diff_eq!(assembled.advective_cons, 0.0, epsilon = 1e-13);
            assert_abs_diff_eq!(assembled.llf, llf, epsilon = 1e-13);
            assert_abs_diff_eq!(assembled.viscous_diss, visc, epsilon = 1e-13);
            assert!(llf < 0.0 && visc < 0.0);
        }
    }

    #[test]
    fn non_wall_boundary_has_no_closed_form() {
        let gas = gas();
        let s = PrimState::new(1.0, Vec3::zeros(), 1.0, Vec3::zeros(), 0.0).unwrap();
        let face = BoundaryFace::new(Vec3::x(), s, PrimGradient::zeros()).unwrap();
        let r = boundary_closed_form(
            &face,
            &crate::solver1d::Boundary::Outlet { p_out: 1.0 },
            &gas,
            &GlmParams::new(1.0, 0.0).unwrap(),
            &DissParams::NONE,
        );
        assert_eq!(r.unwrap_err(), Error::WrongWallKind);
    }
}
