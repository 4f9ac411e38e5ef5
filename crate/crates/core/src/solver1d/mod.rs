//! Semi-discrete residual on a 1D multi-element mesh and its time integration.

pub mod time;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fluxes::{
    cnu_matrix, ec_two_point_flux, entropy_potential, glm_phi, llf_dissipation, nonsym_flux, powell_phi,
    source_term, viscous_flux_normal, viscous_interface_dissipation, DissParams, GlmParams, PrimGradient,
};
use crate::sbp::{build_sbp, SbpOperator};
use crate::thermo::{dvdw_jacobian, prim_from_cons_vec, GasParams, Mat9, PrimState, Vec3, Vec9};
use crate::wall_bc::{
    advective_ghost, gradient_roundtrip, inlet_ghost, outlet_ghost, viscous_ghost, BoundaryFace, InletSpec,
    WallSpec,
};

pub use time::{integrate, Method, StepStats};

/// Boundary descriptor for one end of the domain.
#[derive(Clone, Debug)]
pub enum Boundary {
    Periodic,
    Wall(WallSpec),
    Inlet(InletSpec),
    Outlet { p_out: f64 },
}

/// Conservative states indexed as `[element][node]`.
pub type Field = Vec<Vec<Vec9>>;

/// Per-node forcing `s(x, t)` added to `du/dt`.
pub type Forcing = Arc<dyn Fn(f64, f64) -> Vec9 + Send + Sync>;

#[derive(Clone, Debug)]
pub struct Mesh1D {
    pub sbp: SbpOperator,
    /// Element end points, ascending; element `e` spans `[vertices[e], vertices[e+1]]`.
    pub vertices: Vec<f64>,
    pub left: Boundary,
    pub right: Boundary,
}

impl Mesh1D {
    pub fn uniform(x0: f64, x1: f64, elements: usize, degree: usize, left: Boundary, right: Boundary) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidParameter("at least one element is required".into()));
        }
        let h = (x1 - x0) / elements as f64;
        let mut vertices: Vec<f64> = (0..=elements).map(|e| x0 + h * e as f64).collect();
        vertices[elements] = x1;
        Self::from_vertices(vertices, degree, left, right)
    }

    pub fn from_vertices(vertices: Vec<f64>, degree: usize, left: Boundary, right: Boundary) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidParameter("need at least two vertices".into()));
        }
        if vertices.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("vertices must be strictly increasing".into()));
        }
        let periodic = (
            matches!(left, Boundary::Periodic),
            matches!(right, Boundary::Periodic),
        );
        if periodic.0 != periodic.1 {
            return Err(Error::UnsupportedBoundary("periodic boundaries must be paired".into()));
        }
        for b in [&left, &right] {
            if let Boundary::Wall(w) = b {
                w.validate()?;
            }
            if let Boundary::Outlet { p_out } = b {
                if !(*p_out > 0.0) {
                    return Err(Error::NonPositivePressure(*p_out));
                }
            }
        }
        Ok(Mesh1D {
            sbp: build_sbp(degree)?,
            vertices,
            left,
            right,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.sbp.n_nodes()
    }

    pub fn jacobian(&self, e: usize) -> f64 {
        0.5 * (self.vertices[e + 1] - self.vertices[e])
    }

    pub fn node_x(&self, e: usize, k: usize) -> f64 {
        self.vertices[e] + (self.sbp.nodes[k] + 1.0) * self.jacobian(e)
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.left, Boundary::Periodic)
    }

    pub fn length(&self) -> f64 {
        self.vertices[self.n_elements()] - self.vertices[0]
    }

    /// Samples a function of position at every node.
    pub fn sample<T, F: FnMut(f64) -> T>(&self, mut f: F) -> Vec<Vec<T>> {
        (0..self.n_elements())
            .map(|e| (0..self.n_nodes()).map(|k| f(self.node_x(e, k))).collect())
            .collect()
    }
}

/// Material, cleaning and dissipation parameters.
#[derive(Clone, Copy, Debug)]
pub struct Physics {
    pub gas: GasParams,
    pub glm: GlmParams,
    pub diss: DissParams,
}

impl Physics {
    fn viscous(&self) -> bool {
        self.gas.mu_ns > 0.0 || self.gas.mu_r > 0.0 || self.gas.kappa > 0.0
    }
}

/// Which face an entropy-production breakdown belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceLocation {
    Left,
    Right,
    /// Interface on the right of element `e` (wrapping for periodic meshes).
    Interior(usize),
}

/// Entropy production terms contributed by one face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceProduction {
    pub location: FaceLocation,
    pub advective_cons: f64,
    pub advective_diss: f64,
    pub viscous_cons: f64,
    pub viscous_diss: f64,
}

/// Everything produced by one right-hand-side evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub t: f64,
    pub dudt: Field,
    pub prim: Vec<Vec<PrimState>>,
    pub w: Field,
    /// x-gradients of the entropy variables.
    pub g: Field,
    pub faces: Vec<FaceProduction>,
    /// `Σ Jω wᵀr` from the source term.
    pub source_production: f64,
    /// `Σ Jω wᵀs` from manufactured forcing.
    pub forcing_production: f64,
}

/// Neighbor data across one side of an element.
struct Side {
    adv: PrimState,
    visc: PrimState,
    w_visc: Vec9,
    /// Ghost side of a physical boundary.
    boundary: Option<BoundarySide>,
}

#[derive(Clone, Copy)]
enum BoundarySide {
    Left,
    Right,
}

pub struct Solver {
    pub mesh: Mesh1D,
    pub physics: Physics,
    pub forcing: Option<Forcing>,
}

impl Solver {
    pub fn new(mesh: Mesh1D, physics: Physics) -> Result<Self> {
        physics.gas.validate()?;
        physics.glm.validate()?;
        physics.diss.validate()?;
        Ok(Solver {
            mesh,
            physics,
            forcing: None,
        })
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    /// Conservative field from a primitive-state function of position.
    pub fn project<F>(&self, mut f: F) -> Result<Field>
    where
        F: FnMut(f64) -> Result<PrimState>,
    {
        let gas = self.physics.gas;
        self.mesh
            .sample(|x| f(x).map(|v| *v.to_cons(&gas).as_vec()))
            .into_iter()
            .map(|row| row.into_iter().collect())
            .collect()
    }

    fn primitives(&self, u: &Field, t: f64) -> Result<Vec<Vec<PrimState>>> {
        let gas = &self.physics.gas;
        if u.len() != self.mesh.n_elements() || u.iter().any(|r| r.len() != self.mesh.n_nodes()) {
            return Err(Error::ShapeMismatch("field does not match mesh".into()));
        }
        u.iter()
            .enumerate()
            .map(|(e, row)| {
                row.iter()
                    .enumerate()
                    .map(|(k, uk)| {
                        prim_from_cons_vec(uk, gas).map_err(|err| Error::PositivityFailure {
                            t,
                            element: e,
                            node: k,
                            source: Box::new(err),
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn boundary_spec(&self, side: BoundarySide) -> &Boundary {
        match side {
            BoundarySide::Left => &self.mesh.left,
            BoundarySide::Right => &self.mesh.right,
        }
    }

    fn normal(side: BoundarySide) -> Vec3 {
        match side {
            BoundarySide::Left => -Vec3::x(),
            BoundarySide::Right => Vec3::x(),
        }
    }

    /// Ghost states (advective, viscous) at a physical boundary.
    fn ghost_states(&self, side: BoundarySide, interior: &PrimState, t: f64) -> Result<(PrimState, PrimState)> {
        let gas = &self.physics.gas;
        let face = BoundaryFace::new(Self::normal(side), *interior, PrimGradient::zeros())?;
        match self.boundary_spec(side) {
            Boundary::Periodic => unreachable!("periodic faces have neighbours"),
            Boundary::Wall(wall) => {
                let adv = advective_ghost(&face, wall);
                let visc = if self.physics.viscous() {
                    viscous_ghost(&face, wall, t, gas)?.0
                } else {
                    *interior
                };
                Ok((adv, visc))
            }
            Boundary::Inlet(inlet) => {
                let s = inlet_ghost(&face, inlet, gas)?.0;
                Ok((s, s))
            }
            Boundary::Outlet { p_out } => {
                let s = outlet_ghost(&face, *p_out, gas)?.0;
                Ok((s, s))
            }
        }
    }

    /// x-directional viscous flux of the ghost node built from the interior entropy gradient.
    fn ghost_viscous_flux(
        &self,
        side: BoundarySide,
        interior: &PrimState,
        ghost: &PrimState,
        g_minus: &Vec9,
        t: f64,
    ) -> Result<Vec9> {
        let gas = &self.physics.gas;
        let n = Self::normal(side);
        let mut g_block = PrimGradient::zeros();
        g_block.set_column(0, g_minus);
        let mut failure = None;
        let g_plus = gradient_roundtrip(&g_block, interior, ghost, gas, |theta| {
            let face = BoundaryFace {
                normal: n,
                state: *interior,
                gradient: *theta,
            };
            let ghost_grad = match self.boundary_spec(side) {
                Boundary::Wall(wall) => viscous_ghost(&face, wall, t, gas).map(|r| r.1),
                Boundary::Inlet(inlet) => inlet_ghost(&face, inlet, gas).map(|r| r.1),
                Boundary::Outlet { p_out } => outlet_ghost(&face, *p_out, gas).map(|r| r.1),
                Boundary::Periodic => unreachable!("periodic faces have neighbours"),
            };
            ghost_grad.unwrap_or_else(|e| {
                failure = Some(e);
                PrimGradient::zeros()
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let theta_plus = dvdw_jacobian(ghost, gas) * g_plus;
        Ok(n.x * viscous_flux_normal(ghost, &theta_plus, &n, gas))
    }

    /// Full right-hand side `du/dt` together with the data needed for entropy accounting.
    pub fn evaluate(&self, u: &Field, t: f64) -> Result<Evaluation> {
        let gas = &self.physics.gas;
        let glm = &self.physics.glm;
        let diss = &self.physics.diss;
        let mesh = &self.mesh;
        let sbp = &mesh.sbp;
        let ne = mesh.n_elements();
        let nn = mesh.n_nodes();
        let last = nn - 1;
        let viscous = self.physics.viscous();

        let prim = self.primitives(u, t)?;
        let w: Field = prim
            .iter()
            .map(|row| row.iter().map(|v| *v.entropy_vars(gas).as_vec()).collect())
            .collect();

        // neighbour states on each side of every element
        let mut left_sides = Vec::with_capacity(ne);
        let mut right_sides = Vec::with_capacity(ne);
        for e in 0..ne {
            let left = if e > 0 || mesh.is_periodic() {
                let src = if e > 0 { e - 1 } else { ne - 1 };
                let v = prim[src][last];
                Side {
                    adv: v,
                    visc: v,
                    w_visc: w[src][last],
                    boundary: None,
                }
            } else {
                let (adv, visc) = self.ghost_states(BoundarySide::Left, &prim[0][0], t)?;
                Side {
                    adv,
                    visc,
                    w_visc: *visc.entropy_vars(gas).as_vec(),
                    boundary: Some(BoundarySide::Left),
                }
            };
            let right = if e + 1 < ne || mesh.is_periodic() {
                let src = if e + 1 < ne { e + 1 } else { 0 };
                let v = prim[src][0];
                Side {
                    adv: v,
                    visc: v,
                    w_visc: w[src][0],
                    boundary: None,
                }
            } else {
                let (adv, visc) = self.ghost_states(BoundarySide::Right, &prim[ne - 1][last], t)?;
                Side {
                    adv,
                    visc,
                    w_visc: *visc.entropy_vars(gas).as_vec(),
                    boundary: Some(BoundarySide::Right),
                }
            };
            left_sides.push(left);
            right_sides.push(right);
        }

        // BR1 gradients of the entropy variables
        let mut g: Field = vec![vec![Vec9::zeros(); nn]; ne];
        if viscous {
            for e in 0..ne {
                let jac = mesh.jacobian(e);
                for k in 0..nn {
                    let mut acc = Vec9::zeros();
                    for n in 0..nn {
                        acc += sbp.q[(k, n)] * w[e][n];
                    }
                    if k == last {
                        acc += 0.5 * (right_sides[e].w_visc + w[e][last]) - w[e][last];
                    }
                    if k == 0 {
                        acc -= 0.5 * (left_sides[e].w_visc + w[e][0]) - w[e][0];
                    }
                    g[e][k] = acc / (jac * sbp.weights[k]);
                }
            }
        }

        let cnu: Vec<Vec<Mat9>> = if viscous {
            prim.iter().map(|row| row.iter().map(|v| cnu_matrix(v, gas)).collect()).collect()
        } else {
            vec![vec![Mat9::zeros(); nn]; ne]
        };
        let fvisc: Field = (0..ne)
            .map(|e| (0..nn).map(|k| cnu[e][k] * g[e][k]).collect())
            .collect();

        // ghost viscous fluxes
        let mut ghost_flux_left = Vec9::zeros();
        let mut ghost_flux_right = Vec9::zeros();
        if viscous && !mesh.is_periodic() {
            ghost_flux_left =
                self.ghost_viscous_flux(BoundarySide::Left, &prim[0][0], &left_sides[0].visc, &g[0][0], t)?;
            ghost_flux_right = self.ghost_viscous_flux(
                BoundarySide::Right,
                &prim[ne - 1][last],
                &right_sides[ne - 1].visc,
                &g[ne - 1][last],
                t,
            )?;
        }

        let mut dudt: Field = vec![vec![Vec9::zeros(); nn]; ne];
        let mut faces = Vec::new();
        let mut source_production = 0.0;
        let mut forcing_production = 0.0;

        for e in 0..ne {
            let jac = mesh.jacobian(e);
            let pe = &prim[e];
            let mut fa = vec![Vec9::zeros(); nn];
            let mut fv = vec![Vec9::zeros(); nn];

            // volume: 2 Σ_k Q_jk f*(j,k)
            for j in 0..nn {
                fa[j] += sbp.q[(j, j)] * ec_two_point_flux(&pe[j], &pe[j], gas, glm);
                for k in (j + 1)..nn {
                    let f = ec_two_point_flux(&pe[j], &pe[k], gas, glm);
                    fa[j] += sbp.q[(j, k)] * f;
                    fa[k] += sbp.q[(k, j)] * f;
                }
            }
            for j in 0..nn {
                let mut qb1 = 0.0;
                let mut qpsi = 0.0;
                for k in 0..nn {
                    qb1 += sbp.q[(j, k)] * pe[k].mag().x;
                    qpsi += sbp.q[(j, k)] * pe[k].psi();
                }
                fa[j] = 2.0 * fa[j] + powell_phi(&pe[j], gas) * qb1 + glm_phi(&pe[j], gas) * qpsi;
            }

            if viscous {
                for j in 0..nn {
                    for k in 0..nn {
                        fv[j] += sbp.q[(j, k)] * fvisc[e][k];
                    }
                }
            }

            // left face of element e
            {
                let side = &left_sides[e];
                let v0 = &pe[0];
                let fs_00 = nonsym(v0, v0, gas, glm);
                let fs_0l = nonsym(v0, &side.adv, gas, glm);
                let d_adv = if diss.llf_enabled {
                    llf_dissipation(v0, &side.adv, gas, glm)
                } else {
                    Vec9::zeros()
                };
                fa[0] += fs_00 - fs_0l - d_adv;
                if viscous {
                    let f_nb = match side.boundary {
                        Some(_) => ghost_flux_left,
                        None => fvisc[if e > 0 { e - 1 } else { ne - 1 }][last],
                    };
                    let f_hat = 0.5 * (fvisc[e][0] + f_nb);
                    let d_visc = viscous_interface_dissipation(v0, &side.visc, &(side.w_visc - w[e][0]), gas, diss);
                    fv[0] += fvisc[e][0] - f_hat + d_visc;
                    if side.boundary.is_some() {
                        let w0 = &w[e][0];
                        let w_hat = 0.5 * (side.w_visc + w0);
                        faces.push(FaceProduction {
                            location: FaceLocation::Left,
                            advective_cons: w0.dot(&fs_0l) - entropy_potential(v0, gas, glm),
                            advective_diss: w0.dot(&d_adv),
                            viscous_cons: -(w_hat - w0).dot(&fvisc[e][0]) - w0.dot(&f_hat),
                            viscous_diss: w0.dot(&d_visc),
                        });
                    }
                } else if side.boundary.is_some() {
                    let w0 = &w[e][0];
                    faces.push(FaceProduction {
                        location: FaceLocation::Left,
                        advective_cons: w0.dot(&fs_0l) - entropy_potential(v0, gas, glm),
                        advective_diss: w0.dot(&d_adv),
                        viscous_cons: 0.0,
                        viscous_diss: 0.0,
                    });
                }
            }

            // right face of element e
            {
                let side = &right_sides[e];
                let vn = &pe[last];
                let fs_nn = nonsym(vn, vn, gas, glm);
                let fs_nr = nonsym(vn, &side.adv, gas, glm);
                let d_adv = if diss.llf_enabled {
                    llf_dissipation(vn, &side.adv, gas, glm)
                } else {
                    Vec9::zeros()
                };
                fa[last] -= fs_nn - fs_nr + d_adv;
                let wn = &w[e][last];
                let mut visc_cons = 0.0;
                let mut visc_d = 0.0;
                let mut f_hat = Vec9::zeros();
                if viscous {
                    let f_nb = match side.boundary {
                        Some(_) => ghost_flux_right,
                        None => fvisc[if e + 1 < ne { e + 1 } else { 0 }][0],
                    };
                    f_hat = 0.5 * (fvisc[e][last] + f_nb);
                    let d_visc = viscous_interface_dissipation(vn, &side.visc, &(side.w_visc - wn), gas, diss);
                    fv[last] -= fvisc[e][last] - f_hat - d_visc;
                    let w_hat = 0.5 * (side.w_visc + wn);
                    visc_cons = (w_hat - wn).dot(&fvisc[e][last]) + wn.dot(&f_hat);
                    visc_d = wn.dot(&d_visc);
                }
                let adv_cons = -(wn.dot(&fs_nr) - entropy_potential(vn, gas, glm));
                let adv_d = wn.dot(&d_adv);
                match side.boundary {
                    Some(_) => faces.push(FaceProduction {
                        location: FaceLocation::Right,
                        advective_cons: adv_cons,
                        advective_diss: adv_d,
                        viscous_cons: visc_cons,
                        viscous_diss: visc_d,
                    }),
                    None => {
                        // pair with the neighbour's left-face terms
                        let nb = if e + 1 < ne { e + 1 } else { 0 };
                        let vb = &prim[nb][0];
                        let wb = &w[nb][0];
                        let fs_bl = nonsym(vb, vn, gas, glm);
                        let d_adv_b = if diss.llf_enabled {
                            llf_dissipation(vb, vn, gas, glm)
                        } else {
                            Vec9::zeros()
                        };
                        let mut vc_b = 0.0;
                        let mut vd_b = 0.0;
                        if viscous {
                            let w_hat = 0.5 * (wn + wb);
                            vc_b = -(w_hat - wb).dot(&fvisc[nb][0]) - wb.dot(&f_hat);
                            let d_b = viscous_interface_dissipation(vb, vn, &(wn - wb), gas, diss);
                            vd_b = wb.dot(&d_b);
                        }
                        faces.push(FaceProduction {
                            location: FaceLocation::Interior(e),
                            advective_cons: adv_cons + wb.dot(&fs_bl) - entropy_potential(vb, gas, glm),
                            advective_diss: adv_d + wb.dot(&d_adv_b),
                            viscous_cons: visc_cons + vc_b,
                            viscous_diss: visc_d + vd_b,
                        });
                    }
                }
            }

            for k in 0..nn {
                let jw = jac * sbp.weights[k];
                let r = source_term(&pe[k], gas, glm);
                source_production += jw * w[e][k].dot(&r);
                let mut rate = (fv[k] - fa[k]) / jw + r;
                if let Some(forcing) = &self.forcing {
                    let s = forcing(mesh.node_x(e, k), t);
                    forcing_production += jw * w[e][k].dot(&s);
                    rate += s;
                }
                dudt[e][k] = rate;
            }
        }

        Ok(Evaluation {
            t,
            dudt,
            prim,
            w,
            g,
            faces,
            source_production,
            forcing_production,
        })
    }

    /// Right-hand side only.
    pub fn rhs(&self, u: &Field, t: f64) -> Result<Field> {
        Ok(self.evaluate(u, t)?.dudt)
    }

    /// `Σ Jω u` per component.
    pub fn integral(&self, u: &Field) -> Vec9 {
        let mut total = Vec9::zeros();
        for (e, row) in u.iter().enumerate() {
            for (k, uk) in row.iter().enumerate() {
                total += self.mesh.jacobian(e) * self.mesh.sbp.weights[k] * uk;
            }
        }
        total
    }

    pub fn flatten(&self, u: &Field) -> Vec<f64> {
        u.iter().flat_map(|row| row.iter().flat_map(|v| v.iter().copied())).collect()
    }

    pub fn unflatten(&self, y: &[f64]) -> Field {
        let nn = self.mesh.n_nodes();
        y.chunks(9 * nn)
            .map(|chunk| chunk.chunks(9).map(Vec9::from_column_slice).collect())
            .collect()
    }

    /// Integrates from `t0` to `t_end`, calling `on_step` after every accepted step.
    pub fn advance<C>(&self, u0: &Field, t0: f64, t_end: f64, method: &Method, mut on_step: C) -> Result<(Field, StepStats)>
    where
        C: FnMut(f64, &Field) -> Result<()>,
    {
        let y0 = self.flatten(u0);
        let (y, stats) = integrate(
            |t, y, dy| {
                let rate = self.rhs(&self.unflatten(y), t)?;
                let flat = self.flatten(&rate);
                dy.copy_from_slice(&flat);
                Ok(())
            },
            t0,
            &y0,
            t_end,
            method,
            |t, y| on_step(t, &self.unflatten(y)),
        )?;
        Ok((self.unflatten(&y), stats))
    }
}

fn nonsym(vi: &PrimState, vj: &PrimState, gas: &GasParams, glm: &GlmParams) -> Vec9 {
    nonsym_flux(vi, vj, gas, glm)
}
