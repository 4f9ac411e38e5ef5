//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fluxes::{DissParams, GlmParams};
use crate::mms::ManufacturedProblem;
use crate::solver1d::{Boundary, Field, Mesh1D, Method, Physics, Solver};
use crate::thermo::{GasParams, PrimState, Vec3};
use crate::wall_bc::{HeatFlux, InletSpec, MagneticWall, WallSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "ESDG_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub domain: DomainConfig,
    pub physics: PhysicsConfig,
    pub left: BoundaryConfig,
    pub right: BoundaryConfig,
    pub initial: InitialConfig,
    pub integrator: IntegratorConfig,
    pub t_end: f64,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub x0: f64,
    pub x1: f64,
    pub elements: usize,
    pub degree: usize,
}

/// Non-dimensional numbers plus cleaning and dissipation settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub gamma: f64,
    pub ma: f64,
    pub re: f64,
    pub pr: f64,
    pub mm: f64,
    pub rm: f64,
    /// Drop all visco-resistive terms (Euler/ideal MHD).
    #[serde(default)]
    pub inviscid: bool,
    pub c_h: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub llf: bool,
    #[serde(default)]
    pub beta_visc: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagneticKind {
    Insulating,
    Conducting,
    PerfectConducting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConfig {
    Periodic,
    Wall {
        magnetic: MagneticKind,
        b0: [f64; 3],
        #[serde(default)]
        c_d: Option<f64>,
        #[serde(default)]
        v_wall: [f64; 3],
        #[serde(default)]
        heat_flux: f64,
    },
    Inlet {
        p_ref: f64,
        t_ref: f64,
        rho_ref: f64,
        b0: [f64; 3],
        mdot: f64,
        area: f64,
    },
    Outlet {
        p_out: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Constant primitive state `(ρ, v₁, v₂, v₃, T, B₁, B₂, B₃, ψ)`.
    Uniform { state: [f64; 9] },
    /// `state_i (1 + amplitude sin(2π mode (x − x0)/L + 0.7 i))`, additive for components with zero base.
    Perturbed { state: [f64; 9], amplitude: f64, mode: u32 },
    /// Manufactured solution between walls; the boundary blocks are ignored.
    Manufactured {
        #[serde(default = "default_c_d")]
        c_d: f64,
    },
}

fn default_c_d() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegratorConfig {
    Rk4 { dt: f64 },
    Dopri5 {
        rtol: f64,
        atol: f64,
        #[serde(default)]
        dt_init: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_prefix() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_dir(),
            prefix: default_prefix(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::ConfigError(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(cfg_err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = &self.physics;
        for (name, v) in [("ma", p.ma), ("re", p.re), ("pr", p.pr), ("mm", p.mm), ("rm", p.rm)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(cfg_err(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(cfg_err("t_end must be non-negative"));
        }
        if !(self.domain.x1 > self.domain.x0) || self.domain.elements == 0 {
            return Err(cfg_err("domain needs x1 > x0 and at least one element"));
        }
        match self.integrator {
            IntegratorConfig::Rk4 { dt } if !(dt > 0.0) => return Err(cfg_err("rk4 dt must be positive")),
            IntegratorConfig::Dopri5 { rtol, atol, dt_init } => {
                if !(rtol > 0.0 && atol > 0.0) {
                    return Err(cfg_err("tolerances must be positive"));
                }
                if let Some(h) = dt_init {
                    if !(h > 0.0) {
                        return Err(cfg_err("dt_init must be positive"));
                    }
                }
            }
            _ => {}
        }
        self.physics()?;
        Ok(())
    }

    pub fn physics(&self) -> Result<Physics> {
        let p = &self.physics;
        let mut gas = GasParams::from_nondimensional(p.gamma, p.ma, p.re, p.pr, p.mm, p.rm)?;
        if p.inviscid {
            gas = gas.ideal();
        }
        let physics = Physics {
            gas,
            glm: GlmParams::new(p.c_h, p.alpha)?,
            diss: DissParams {
                beta_visc: p.beta_visc,
                llf_enabled: p.llf,
            },
        };
        physics.diss.validate()?;
        Ok(physics)
    }

    pub fn method(&self) -> Method {
        match self.integrator {
            IntegratorConfig::Rk4 { dt } => Method::Rk4 { dt },
            IntegratorConfig::Dopri5 { rtol, atol, dt_init } => Method::Dopri5 {
                rtol,
                atol,
                dt0: dt_init,
            },
        }
    }

    pub fn manufactured(&self) -> Result<Option<ManufacturedProblem>> {
        match self.initial {
            InitialConfig::Manufactured { c_d } => Ok(Some(ManufacturedProblem {
                physics: self.physics()?,
                c_d,
            })),
            _ => Ok(None),
        }
    }

    /// Solver with `elements` elements (or the configured count).
    pub fn solver_with(&self, elements: usize) -> Result<Solver> {
        if let Some(mms) = self.manufactured()? {
            if self.domain.x0 != 0.0 || self.domain.x1 != 1.0 {
                return Err(cfg_err("the manufactured solution lives on [0, 1]"));
            }
            return mms.solver(elements, self.domain.degree);
        }
        let mesh = Mesh1D::uniform(
            self.domain.x0,
            self.domain.x1,
            elements,
            self.domain.degree,
            self.left.to_boundary()?,
            self.right.to_boundary()?,
        )?;
        Solver::new(mesh, self.physics()?)
    }

    pub fn solver(&self) -> Result<Solver> {
        self.solver_with(self.domain.elements)
    }

    pub fn initial_state(&self, solver: &Solver) -> Result<Field> {
        let (x0, len) = (self.domain.x0, self.domain.x1 - self.domain.x0);
        match &self.initial {
            InitialConfig::Uniform { state } => solver.project(|_| prim_from_array(state)),
            InitialConfig::Perturbed { state, amplitude, mode } => solver.project(|x| {
                let mut s = *state;
                for (i, si) in s.iter_mut().enumerate() {
                    let wave = amplitude
                        * (2.0 * std::f64::consts::PI * *mode as f64 * (x - x0) / len + 0.7 * i as f64).sin();
                    if *si == 0.0 {
                        *si = wave;
                    } else {
                        *si *= 1.0 + wave;
                    }
                }
                prim_from_array(&s)
            }),
            InitialConfig::Manufactured { c_d } => ManufacturedProblem {
                physics: self.physics()?,
                c_d: *c_d,
            }
            .initial_state(solver),
        }
    }

    /// Output directory, honouring the environment override.
    pub fn output_dir(&self) -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| self.output.dir.clone())
    }
}

fn prim_from_array(s: &[f64; 9]) -> Result<PrimState> {
    PrimState::new(
        s[0],
        Vec3::new(s[1], s[2], s[3]),
        s[4],
        Vec3::new(s[5], s[6], s[7]),
        s[8],
    )
}

impl BoundaryConfig {
    pub fn to_boundary(&self) -> Result<Boundary> {
        Ok(match self {
            BoundaryConfig::Periodic => Boundary::Periodic,
            BoundaryConfig::Wall {
                magnetic,
                b0,
                c_d,
                v_wall,
                heat_flux,
            } => {
                let b0 = Vec3::from(*b0);
                let magnetic = match magnetic {
                    MagneticKind::Insulating => MagneticWall::Insulating { b0 },
                    MagneticKind::Conducting => MagneticWall::Conducting {
                        c_d: c_d.ok_or_else(|| cfg_err("conducting wall needs c_d"))?,
                        b0,
                    },
                    MagneticKind::PerfectConducting => MagneticWall::PerfectConducting { b0 },
                };
                let wall = WallSpec {
                    v_wall: Vec3::from(*v_wall),
                    g_heat: HeatFlux::Constant(*heat_flux),
                    magnetic,
                };
                wall.validate()?;
                Boundary::Wall(wall)
            }
            BoundaryConfig::Inlet {
                p_ref,
                t_ref,
                rho_ref,
                b0,
                mdot,
                area,
            } => Boundary::Inlet(InletSpec {
                p_ref: *p_ref,
                t_ref: *t_ref,
                rho_ref: *rho_ref,
                b0: Vec3::from(*b0),
                mdot: *mdot,
                area: *area,
            }),
            BoundaryConfig::Outlet { p_out } => Boundary::Outlet { p_out: *p_out },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"{
        "schema_version": 1,
        "domain": {"x0": 0.0, "x1": 1.0, "elements": 4, "degree": 2},
        "physics": {"gamma": 1.4, "ma": 0.5, "re": 100.0, "pr": 0.72, "mm": 1.0, "rm": 100.0, "c_h": 1.0},
        "left": {"kind": "wall", "magnetic": "insulating", "b0": [1.0, 0.0, 0.0]},
        "right": {"kind": "wall", "magnetic": "conducting", "b0": [1.0, 0.0, 0.0], "c_d": 1.0},
        "initial": {"kind": "uniform", "state": [1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]},
        "integrator": {"method": "rk4", "dt": 0.001},
        "t_end": 0.01
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_json(SAMPLE).unwrap();
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let extra = SAMPLE.replace("\"t_end\"", "\"bogus\": 1, \"t_end\"");
        assert!(matches!(RunConfig::from_json(&extra), Err(Error::ConfigError(_))));
        let old = SAMPLE.replace("\"schema_version\": 1", "\"schema_version\": 0");
        assert!(matches!(RunConfig::from_json(&old), Err(Error::ConfigError(_))));
        let bad = SAMPLE.replace("\"re\": 100.0", "\"re\": -1.0");
        assert!(matches!(RunConfig::from_json(&bad), Err(Error::ConfigError(_))));
    }

    #[test]
    fn conducting_wall_needs_conductance() {
        let cfg = RunConfig::from_json(&SAMPLE.replace(", \"c_d\": 1.0", "")).unwrap();
        assert!(cfg.solver().is_err());
    }
}
