//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status if any fails.

mod common;

use std::time::Instant;

use esdg_mhd::entropy_audit::{audit_state, wall_production, wall_production_closed_form};
use esdg_mhd::fluxes::{entropy_potential, nonsym_flux, viscous_flux_normal, PrimGradient};
use esdg_mhd::mms::{convergence_study, ManufacturedProblem};
use esdg_mhd::refsol::{
    elliptic_ke, loop_field, modified_bessel_i, pipe_coefficients, wire_field, LoopParams, PipeParams, WireParams,
};
use esdg_mhd::solver1d::{Boundary, FaceLocation, Field, Mesh1D, Method, Physics, Solver};
use esdg_mhd::wall_bc::{viscous_ghost, BoundaryFace, HeatFlux, InletSpec, MagneticWall, WallSpec};
use esdg_mhd::{DissParams, GasParams, GlmParams, PrimState, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tadmor_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let gas = GasParams::new(
            rng.random_range(1.1..2.0),
            rng.random_range(0.3..2.0),
            rng.random_range(0.5..2.0),
            0.0,
            0.0,
            0.0,
        )
        .unwrap();
        let glm = GlmParams::new(rng.random_range(0.1..3.0), 0.0).unwrap();
        let (k, j) = (common::random_state(&mut rng), common::random_state(&mut rng));
        let wk = k.entropy_vars(&gas);
        let wj = j.entropy_vars(&gas);
        let lhs = wk.as_vec().dot(&nonsym_flux(&k, &j, &gas, &glm)) - wj.as_vec().dot(&nonsym_flux(&j, &k, &gas, &glm));
        let rhs = entropy_potential(&k, &gas, &glm) - entropy_potential(&j, &gas, &glm);
        worst = worst.max((lhs - rhs).abs());
    }
    outcome(worst < 1e-12, format!("max residual {worst:.2e} over 10^4 pairs (tol 1e-12)"))
}

/// Classical RK4 driven through the audit so every right-hand-side evaluation is checked.
fn audited_trajectory(solver: &Solver, u0: &Field, steps: usize, dt: f64, mut check: impl FnMut(&Solver, &Field, f64)) {
    let axpy = |u: &Field, k: &Field, a: f64| -> Field {
        u.iter()
            .zip(k)
            .map(|(ue, ke)| ue.iter().zip(ke).map(|(x, y)| x + a * y).collect())
            .collect()
    };
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut stage = |u: &Field, t: f64| -> Field {
        check(solver, u, t);
        solver.rhs(u, t).unwrap()
    };
    for _ in 0..steps {
        let k1 = stage(&u, t);
        let k2 = stage(&axpy(&u, &k1, 0.5 * dt), t + 0.5 * dt);
        let k3 = stage(&axpy(&u, &k2, 0.5 * dt), t + 0.5 * dt);
        let k4 = stage(&axpy(&u, &k3, dt), t + dt);
        for e in 0..u.len() {
            for n in 0..u[e].len() {
                u[e][n] += dt / 6.0 * (k1[e][n] + 2.0 * k2[e][n] + 2.0 * k3[e][n] + k4[e][n]);
            }
        }
        t += dt;
    }
}

fn conservative_balance() -> Outcome {
    let solver = common::walled_solver(3, 16, DissParams::NONE, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u0 = common::perturbed_state(&solver, &mut rng, 1e-2);
    let mut worst: f64 = 0.0;
    let mut evals = 0;
    audited_trajectory(&solver, &u0, 250, 2e-4, |s, u, t| {
        let (r, _) = audit_state(s, u, t).unwrap();
        worst = worst.max(r.scaled_balance().abs());
        evals += 1;
    });
    outcome(
        worst < 1e-11,
        format!("max |dS/dt + DT|/scale {worst:.2e} over {evals} evaluations (tol 1e-11)"),
    )
}

fn boundary_faces(solver: &Solver, u: &Field) -> [(FaceLocation, BoundaryFace, WallSpec); 2] {
    let gas = &solver.physics.gas;
    let ne = u.len();
    let last = u[ne - 1].len() - 1;
    let face = |x: &esdg_mhd::Vec9, n: f64| {
        let v = esdg_mhd::thermo::prim_from_cons_vec(x, gas).unwrap();
        BoundaryFace::new(Vec3::new(n, 0.0, 0.0), v, PrimGradient::zeros()).unwrap()
    };
    let wall = |b: &Boundary| match b {
        Boundary::Wall(w) => w.clone(),
        _ => unreachable!(),
    };
    [
        (FaceLocation::Left, face(&u[0][0], -1.0), wall(&solver.mesh.left)),
        (FaceLocation::Right, face(&u[ne - 1][last], 1.0), wall(&solver.mesh.right)),
    ]
}

fn dissipative_balance() -> Outcome {
    let diss = DissParams {
        beta_visc: 1.0,
        llf_enabled: true,
    };
    let solver = common::walled_solver(3, 16, diss, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u0 = common::perturbed_state(&solver, &mut rng, 1e-2);
    let mut max_balance = f64::NEG_INFINITY;
    let mut llf_mismatch: f64 = 0.0;
    let mut evals = 0;
    audited_trajectory(&solver, &u0, 250, 2e-4, |s, u, t| {
        let (r, _) = audit_state(s, u, t).unwrap();
        max_balance = max_balance.max(r.balance);
        for (loc, face, wall) in boundary_faces(s, u) {
            let (llf, _) = wall_production_closed_form(&face, &wall, &s.physics.gas, &s.physics.glm, &s.physics.diss).unwrap();
            let recorded = r.faces.iter().find(|f| f.location == loc).unwrap().advective_diss;
            llf_mismatch = llf_mismatch.max((recorded - llf).abs());
        }
        evals += 1;
    });
    outcome(
        max_balance <= 1e-12 && llf_mismatch < 1e-12,
        format!(
            "max dS/dt + DT {max_balance:.2e} (tol 1e-12), wall LLF closed-form mismatch {llf_mismatch:.2e} over {evals} evaluations"
        ),
    )
}

fn random_wall<R: Rng>(rng: &mut R, kind: usize, n: &Vec3) -> WallSpec {
    let v_s = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let b0 = Vec3::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
    let magnetic = match kind {
        0 => MagneticWall::Insulating { b0 },
        1 => MagneticWall::Conducting {
            c_d: rng.random_range(0.1..5.0),
            b0,
        },
        _ => MagneticWall::PerfectConducting { b0 },
    };
    WallSpec {
        v_wall: esdg_mhd::wall_bc::project_wall_velocity(&v_s, n),
        g_heat: HeatFlux::Constant(rng.random_range(-1.0..1.0)),
        magnetic,
    }
}

fn wall_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let names = ["insulating", "conducting", "perfect"];
    let mut worst = [[0.0f64; 5]; 3];
    for (kind, row) in worst.iter_mut().enumerate() {
        for _ in 0..10_000 {
            let gas = GasParams::new(
                rng.random_range(1.1..2.0),
                rng.random_range(0.3..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(0.001..0.1),
                rng.random_range(0.001..0.1),
                rng.random_range(0.001..0.1),
            )
            .unwrap();
            let glm = GlmParams::new(rng.random_range(0.1..3.0), 0.0).unwrap();
            let diss = DissParams {
                beta_visc: rng.random_range(0.0..2.0),
                llf_enabled: true,
            };
            let n = common::random_unit(&mut rng);
            let face = BoundaryFace::new(n, common::random_state(&mut rng), common::random_gradient(&mut rng)).unwrap();
            let wall = random_wall(&mut rng, kind, &n);
            let g = wall.g_heat.eval(0.0);
            let p = wall_production(&face, &wall, 0.0, &gas, &glm, &diss).unwrap();
            let (llf, visc) = wall_production_closed_form(&face, &wall, &gas, &glm, &diss).unwrap();
            row[0] = row[0].max(p.advective_cons.abs());
            // entropy leaves through the heat flux: its contribution to dS/dt is −g
            row[1] = row[1].max((p.viscous_cons + g).abs());
            row[2] = row[2].max((p.llf - llf).abs());
            row[3] = row[3].max((p.viscous_diss - visc).abs());
            if kind > 0 {
                let (ghost, ghost_grad) = viscous_ghost(&face, &wall, 0.0, &gas).unwrap();
                let f_avg = 0.5
                    * (viscous_flux_normal(&face.state, &face.gradient, &n, &gas)
                        + viscous_flux_normal(&ghost, &ghost_grad, &n, &gas));
                let db = wall.magnetic.b0() - face.state.mag();
                let db_t = db - db.dot(&n) * n;
                let expected = gas.mu_r / gas.mu0 * wall.magnetic.inverse_conductance().unwrap() * db_t;
                for c in 0..3 {
                    row[4] = row[4].max((f_avg[5 + c] - expected[c]).abs());
                }
            }
        }
    }
    let pass = worst.iter().all(|r| r.iter().all(|x| *x < 1e-12));
    let detail = names
        .iter()
        .zip(worst.iter())
        .map(|(n, r)| {
            format!(
                "{n}: adv {:.1e}, visc+g {:.1e}, llf {:.1e}, visc diss {:.1e}, resistive {:.1e}",
                r[0], r[1], r[2], r[3], r[4]
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, format!("10^4 cases per wall kind (tol 1e-12); {detail}"))
}

fn manufactured_rates() -> Outcome {
    let problem = ManufacturedProblem::standard().unwrap();
    let levels = [8, 16, 32, 64];
    let mut pass = true;
    let mut parts = Vec::new();
    for p in 1..=3usize {
        let table = convergence_study(&problem, p, &levels, 0.1, &Method::adaptive(1e-12)).unwrap();
        let rates: Vec<f64> = table.iter().filter_map(|r| r.rate_u).collect();
        let (lo, hi) = (p as f64 + 0.7, p as f64 + 1.5);
        pass &= rates.len() == levels.len() - 1 && rates.iter().all(|r| (lo..=hi).contains(r));
        parts.push(format!(
            "p={p}: {} in [{lo:.1}, {hi:.1}]",
            rates.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        ));
    }
    outcome(pass, format!("full-state L2 rates on {levels:?} elements; {}", parts.join("; ")))
}

fn pipe_oracle() -> Outcome {
    let mut worst_u: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut worst_trunc: f64 = 0.0;
    for c in [0.0, 1.0, f64::INFINITY] {
        let base = pipe_coefficients(PipeParams::new(5.0, c).unwrap()).unwrap();
        let finer = pipe_coefficients(PipeParams::new(5.0, c).unwrap().with_truncation(40, 40, 14, 14).unwrap()).unwrap();
        for i in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            let (ru, rb) = base.wall_residual(theta).unwrap();
            worst_u = worst_u.max(ru.abs());
            worst_b = worst_b.max(rb.abs());
            for r in [0.0, 0.3, 0.6, 0.9, 1.0] {
                let (u0, b0) = base.normalized(r, theta).unwrap();
                let (u1, b1) = finer.normalized(r, theta).unwrap();
                worst_trunc = worst_trunc.max((u0 - u1).abs()).max((b0 - b1).abs());
            }
        }
    }
    outcome(
        worst_u < 1e-10 && worst_b < 1e-8 && worst_trunc < 1e-12,
        format!("Ha=5, c in {{0, 1, inf}}: |u(1)| {worst_u:.1e}, magnetic residual {worst_b:.1e}, truncation change {worst_trunc:.1e}"),
    )
}

fn special_functions() -> Outcome {
    // extended-precision reference values
    let bessel = [
        (0, 1.0, 1.2660658777520083356),
        (1, 1.0, 0.56515910399248502721),
        (2, 0.5, 0.031906149177738253813),
        (5, 2.5, 0.032843475172023213389),
        (10, 10.0, 21.891706163723370526),
        (20, 0.3, 1.3682512967755114633e-35),
        (3, 50.0, 2.6777641388839412724e+20),
        (30, 30.0, 536509.61087079533203),
        (64, 100.0, 2.3488669016640612316e+33),
        (7, 80.0, 1.8190683318094170546e+33),
    ];
    let mut worst_i: f64 = 0.0;
    for (n, x, want) in bessel {
        let got = modified_bessel_i(n, x).unwrap();
        worst_i = worst_i.max(((got - want) / want).abs());
    }
    let elliptic = [
        (0.0, 1.5707963267948966192, 1.5707963267948966192),
        (0.3, 1.6080486199305127984, 1.5348334649232490444),
        (0.6, 1.7507538029157525118, 1.4180833944487242439),
        (0.9, 2.2805491384227703005, 1.1716970527816141138),
        (0.99, 3.3566005233611919425, 1.0284758090288040219),
    ];
    let mut worst_ke: f64 = 0.0;
    for (k, kk, ee) in elliptic {
        let (a, b) = elliptic_ke(k).unwrap();
        worst_ke = worst_ke.max(((a - kk) / kk).abs()).max(((b - ee) / ee).abs());
    }

    // far from the conductor the wire looks like a line current
    let wire = WireParams::new(1.0, 0.2, 1.0, 1.0).unwrap();
    let mut worst_far: f64 = 0.0;
    for i in 0..16 {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
        let r = 100.0;
        let (x, z) = (r * phi.cos(), r * phi.sin() - 0.1);
        let b = wire_field(x, z, &wire);
        let thin = wire.mu0 * wire.total_current() / (2.0 * std::f64::consts::PI * r);
        worst_far = worst_far.max(((b[0].hypot(b[2]) - thin) / thin).abs());
    }

    let lp = LoopParams::new(1.3, 2.0, 1.0).unwrap();
    let mut worst_axis: f64 = 0.0;
    for z in [-3.0, -1.0, -0.2, 0.0, 0.5, 2.0, 10.0] {
        let (br, bz) = loop_field(0.0, z, &lp).unwrap();
        let want = lp.on_axis(z);
        worst_axis = worst_axis.max(((bz - want) / want).abs()).max(br.abs());
    }

    let h = 1e-5;
    let mut worst_div: f64 = 0.0;
    for (x, z) in [(0.3, 0.5), (-1.2, 0.7), (0.8, -1.5), (2.0, 0.1), (0.0, 0.3)] {
        let dbx = (wire_field(x + h, z, &wire)[0] - wire_field(x - h, z, &wire)[0]) / (2.0 * h);
        let dbz = (wire_field(x, z + h, &wire)[2] - wire_field(x, z - h, &wire)[2]) / (2.0 * h);
        worst_div = worst_div.max((dbx + dbz).abs());
    }
    for (r, z) in [(0.5, 0.3), (1.5, -0.4), (0.2, 1.0), (2.5, 2.0), (1.2, 0.1)] {
        let rbr = |r: f64| r * loop_field(r, z, &lp).unwrap().0;
        let div = (rbr(r + h) - rbr(r - h)) / (2.0 * h) / r
            + (loop_field(r, z + h, &lp).unwrap().1 - loop_field(r, z - h, &lp).unwrap().1) / (2.0 * h);
        worst_div = worst_div.max(div.abs());
    }
    outcome(
        worst_i < 1e-13 && worst_ke < 1e-13 && worst_far < 1e-3 && worst_axis < 1e-10 && worst_div < 1e-6,
        format!(
            "I_n rel {worst_i:.1e}, (K,E) rel {worst_ke:.1e}, wire far field rel {worst_far:.1e}, loop axis rel {worst_axis:.1e}, FD div B {worst_div:.1e}"
        ),
    )
}

fn free_stream() -> Outcome {
    let gas = common::gas();
    let physics = Physics {
        gas,
        glm: GlmParams::new(1.2, 0.5).unwrap(),
        diss: DissParams {
            beta_visc: 1.0,
            llf_enabled: true,
        },
    };
    let magnetised = PrimState::new(1.1, Vec3::new(0.0, 0.4, -0.3), 0.9, Vec3::new(0.7, -0.2, 0.5), 0.0).unwrap();
    let flowing = PrimState::new(1.1, Vec3::new(0.35, 0.0, 0.0), 0.9, Vec3::zeros(), 0.0).unwrap();
    let wall = |magnetic| {
        Boundary::Wall(WallSpec {
            v_wall: magnetised.vel(),
            g_heat: HeatFlux::ADIABATIC,
            magnetic,
        })
    };
    let b0 = magnetised.mag();
    let inlet = Boundary::Inlet(InletSpec {
        p_ref: flowing.pressure(&gas),
        t_ref: flowing.temp(),
        rho_ref: flowing.rho(),
        b0: Vec3::zeros(),
        mdot: flowing.rho() * flowing.vel().x * 2.0,
        area: 2.0,
    });
    let outlet = Boundary::Outlet {
        p_out: flowing.pressure(&gas),
    };
    let cases: Vec<(&str, Boundary, Boundary, PrimState)> = vec![
        ("periodic", Boundary::Periodic, Boundary::Periodic, magnetised),
        (
            "insulating",
            wall(MagneticWall::Insulating { b0 }),
            wall(MagneticWall::Insulating { b0 }),
            magnetised,
        ),
        (
            "conducting",
            wall(MagneticWall::Conducting { c_d: 0.7, b0 }),
            wall(MagneticWall::Conducting { c_d: 2.0, b0 }),
            magnetised,
        ),
        (
            "perfect",
            wall(MagneticWall::PerfectConducting { b0 }),
            wall(MagneticWall::PerfectConducting { b0 }),
            magnetised,
        ),
        ("inlet/outlet", inlet, outlet, flowing),
    ];
    let mut worst: f64 = 0.0;
    let mut names = Vec::new();
    for (name, left, right, state) in cases {
        for p in 1..=6 {
            let mesh = Mesh1D::uniform(0.0, 1.0, 5, p, left.clone(), right.clone()).unwrap();
            let solver = Solver::new(mesh, physics).unwrap();
            let u = solver.project(|_| Ok(state)).unwrap();
            let dudt = solver.rhs(&u, 0.0).unwrap();
            let m = dudt.iter().flatten().map(|d| d.amax()).fold(0.0, f64::max);
            worst = worst.max(m);
        }
        names.push(name);
    }
    outcome(
        worst < 1e-12,
        format!("max |du/dt| {worst:.1e} for p = 1..6 and {} (tol 1e-12)", names.join(", ")),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("tadmor identity", tadmor_identity),
        ("conservative entropy balance", conservative_balance),
        ("dissipative entropy balance", dissipative_balance),
        ("wall identities", wall_identities),
        ("manufactured convergence", manufactured_rates),
        ("pipe oracle", pipe_oracle),
        ("special functions and fields", special_functions),
        ("free stream", free_stream),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        println!(
            "{} criterion {} ({name}): {} [{:.2} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
