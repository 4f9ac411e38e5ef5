#![allow(dead_code)]

use esdg_mhd::fluxes::PrimGradient;
use esdg_mhd::solver1d::{Boundary, Field, Mesh1D, Physics, Solver};
use esdg_mhd::wall_bc::{HeatFlux, MagneticWall, WallSpec};
use esdg_mhd::{DissParams, GasParams, GlmParams, PrimState, Vec3};
use rand::Rng;

pub fn gas() -> GasParams {
    GasParams::from_nondimensional(1.4, 0.8, 50.0, 0.72, 1.2, 40.0).unwrap()
}

/// Closed box with an insulating wall on the left and a conducting wall on the right.
pub fn walled_solver(degree: usize, elements: usize, diss: DissParams, alpha: f64) -> Solver {
    let left = Boundary::Wall(WallSpec {
        v_wall: Vec3::new(0.0, 0.3, -0.1),
        g_heat: HeatFlux::ADIABATIC,
        magnetic: MagneticWall::Insulating {
            b0: Vec3::new(0.9, 0.4, -0.3),
        },
    });
    let right = Boundary::Wall(WallSpec {
        v_wall: Vec3::new(0.0, -0.2, 0.2),
        g_heat: HeatFlux::ADIABATIC,
        magnetic: MagneticWall::Conducting {
            c_d: 1.0,
            b0: Vec3::new(1.1, -0.2, 0.25),
        },
    });
    let mesh = Mesh1D::uniform(0.0, 1.0, elements, degree, left, right).unwrap();
    let physics = Physics {
        gas: gas(),
        glm: GlmParams::new(1.5, alpha).unwrap(),
        diss,
    };
    Solver::new(mesh, physics).unwrap()
}

/// Smooth state with a random perturbation of size `amp`.
pub fn perturbed_state<R: Rng>(solver: &Solver, rng: &mut R, amp: f64) -> Field {
    let phases: Vec<f64> = (0..9).map(|_| rng.random_range(0.0..6.28)).collect();
    let base = solver
        .project(|x| {
            let s = |k: usize, a: f64| a * (2.0 * std::f64::consts::PI * x + phases[k]).sin();
            PrimState::new(
                1.0 + s(0, 0.2),
                Vec3::new(s(1, 0.3), s(2, 0.2), s(3, 0.2)),
                1.0 + s(4, 0.2),
                Vec3::new(1.0 + s(5, 0.2), s(6, 0.3), s(7, 0.3)),
                s(8, 0.1),
            )
        })
        .unwrap();
    base.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|mut u| {
                    for i in 0..9 {
                        u[i] *= 1.0 + amp * rng.random_range(-1.0..1.0);
                    }
                    u
                })
                .collect()
        })
        .collect()
}

pub fn random_state<R: Rng>(rng: &mut R) -> PrimState {
    let mut v3 = |a: f64| Vec3::new(rng.random_range(-a..a), rng.random_range(-a..a), rng.random_range(-a..a));
    let vel = v3(1.0);
    let b = v3(1.5);
    PrimState::new(
        rng.random_range(0.2..3.0),
        vel,
        rng.random_range(0.2..3.0),
        b,
        rng.random_range(-0.5..0.5),
    )
    .unwrap()
}

pub fn random_unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_gradient<R: Rng>(rng: &mut R) -> PrimGradient {
    PrimGradient::from_fn(|_, _| rng.random_range(-2.0..2.0))
}
