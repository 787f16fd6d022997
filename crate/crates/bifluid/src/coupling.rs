//! Time integration of the coupled system: the four densities advance by
//! the common monotone operator built from the current velocity, the
//! velocity advances by the Galerkin momentum step, and both are tied
//! together by a damped fixed-point iteration per time step. Trajectories
//! record the face velocities actually used, so every ledger recomputes
//! the exact discrete fluxes.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{classify_boundary, BoundaryPartition, FaceVelocity, Mesh};
use crate::momentum::{
    kinetic_energy_field, momentum_step, GalerkinBasis, MomentumParams, MomentumStepResult,
};
use crate::scenario::{Scenario, SchemeParams, SpeciesFields};
use crate::thermo::PressureLaw;
use crate::transport::{ratio_field, ContinuityOp, MassLedger, RenormFn, RenormLedger, StepContext};
use crate::{Error, Result};

/// Snapshot of the coupled unknowns at one time level.
#[derive(Debug, Clone)]
pub struct FluidState {
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_z: Vec<f64>,
    /// s = Z /_𝔡 R
    pub ratio: Vec<f64>,
    /// Galerkin coefficients of the zero-trace velocity part.
    pub coeffs: DVector<f64>,
}

impl FluidState {
    pub fn species(&self, sp: crate::geometry::Species) -> &[f64] {
        match sp {
            crate::geometry::Species::Rho => &self.rho,
            crate::geometry::Species::Z => &self.z,
            crate::geometry::Species::BigR => &self.big_r,
            crate::geometry::Species::BigZ => &self.big_z,
        }
    }
}

/// One completed time step.
#[derive(Debug, Clone)]
pub struct StepRecord {
    pub time: f64,
    pub state: FluidState,
    /// Face velocities the density update of this step was computed with.
    pub face_u: FaceVelocity,
    pub fp_iters: usize,
    pub momentum: MomentumStepResult,
    /// Max-norm residual over the four continuity solves.
    pub continuity_residual: f64,
}

/// A recorded run of one scenario.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub scenario: Scenario,
    /// `u_B·n` on the boundary faces (time-independent).
    pub u_n: Vec<f64>,
    pub partition: BoundaryPartition,
    pub boundary: SpeciesFields,
    pub initial: FluidState,
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn mesh(&self) -> &Mesh {
        &self.scenario.mesh
    }

    pub fn params(&self) -> &SchemeParams {
        &self.scenario.params
    }

    pub fn final_state(&self) -> &FluidState {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    /// States at levels 0..=N (0 is the initial state).
    pub fn state_at(&self, n: usize) -> &FluidState {
        if n == 0 {
            &self.initial
        } else {
            &self.steps[n - 1].state
        }
    }

    pub fn step_context<'a>(&'a self, step: &'a StepRecord) -> StepContext<'a> {
        StepContext {
            mesh: self.mesh(),
            faces: &step.face_u,
            u_n: &self.u_n,
            partition: &self.partition,
            eps: self.params().eps,
            dt: self.params().dt,
        }
    }
}

fn pressure_field(law: &PressureLaw, p: &SchemeParams, big_r: &[f64], big_z: &[f64]) -> Vec<f64> {
    big_r
        .iter()
        .zip(big_z)
        .map(|(&r, &z)| law.pressure_delta(r, z, p.delta, p.c_exp))
        .collect()
}

struct DensityUpdate {
    fields: SpeciesFields,
    residual: f64,
}

fn density_update(
    ctx: &StepContext,
    old: &FluidState,
    boundary: &SpeciesFields,
) -> Result<DensityUpdate> {
    let op = ContinuityOp::assemble(ctx)?;
    let mut residual = 0.0_f64;
    let mut solve = |r_old: &[f64], r_b: &[f64]| -> Result<Vec<f64>> {
        let rhs = op.rhs(ctx, r_old, r_b, None);
        let x = op.solve(&rhs, r_old)?;
        residual = residual.max(op.solver_residual(&x, &rhs));
        Ok(x)
    };
    let rho = solve(&old.rho, &boundary.rho)?;
    let z = solve(&old.z, &boundary.z)?;
    let big_r = solve(&old.big_r, &boundary.big_r)?;
    let big_z = solve(&old.big_z, &boundary.big_z)?;
    Ok(DensityUpdate {
        fields: SpeciesFields { rho, z, big_r, big_z, alpha: Vec::new() },
        residual,
    })
}

/// Run the scheme over the full time horizon of a scenario.
pub fn run_level1(scenario: &Scenario) -> Result<Trajectory> {
    let mesh = &scenario.mesh;
    let p = scenario.params.clone();
    scenario.law.check_c_exp(p.c_exp, p.allow_c_override || p.delta == 0.0)?;
    let basis = GalerkinBasis::new(mesh, p.modes_per_axis)?;
    let lift = scenario.boundary_velocity.clone();
    let init_fields = scenario.initial_fields();
    let boundary = scenario.boundary_fields();
    let floor = scenario.ratio_floor();

    let v0_cells: Vec<[f64; 2]> = (0..mesh.num_cells())
        .map(|c| scenario.init_velocity.eval(mesh.cell_center(c)))
        .collect();
    let c0 = basis.project(mesh, &v0_cells);

    // Boundary velocity trace is the lift itself, exactly.
    let u_n: Vec<f64> = mesh
        .boundary_faces()
        .iter()
        .map(|f| {
            let u = lift.eval(f.center);
            u[0] * f.normal[0] + u[1] * f.normal[1]
        })
        .collect();
    let partition = classify_boundary(mesh, &u_n);

    let initial = FluidState {
        ratio: ratio_field(&init_fields.big_z, &init_fields.big_r, floor),
        rho: init_fields.rho,
        z: init_fields.z,
        big_r: init_fields.big_r,
        big_z: init_fields.big_z,
        coeffs: c0,
    };

    let mp = MomentumParams {
        mu: p.mu,
        lambda: p.lambda,
        eps: p.eps,
        dt: p.dt,
        convection: p.convection,
    };

    let mut steps = Vec::with_capacity(p.num_steps());
    let mut state = initial.clone();
    for n in 1..=p.num_steps() {
        let time = n as f64 * p.dt;
        let mut v = state.coeffs.clone();
        let mut iters = 0usize;
        let record = loop {
            iters += 1;
            let faces = basis.face_velocities(mesh, &v, &lift);
            let ctx = StepContext {
                mesh,
                faces: &faces,
                u_n: &u_n,
                partition: &partition,
                eps: p.eps,
                dt: p.dt,
            };
            let (fields, continuity_residual) = if p.frozen_densities {
                (
                    SpeciesFields {
                        rho: state.rho.clone(),
                        z: state.z.clone(),
                        big_r: state.big_r.clone(),
                        big_z: state.big_z.clone(),
                        alpha: Vec::new(),
                    },
                    0.0,
                )
            } else {
                let upd = density_update(&ctx, &state, &boundary)?;
                (upd.fields, upd.residual)
            };
            let pressure = if p.frozen_densities {
                None
            } else {
                Some(pressure_field(&scenario.law, &p, &fields.big_r, &fields.big_z))
            };
            let momentum = momentum_step(
                &basis,
                mesh,
                &mp,
                &state.rho,
                &fields.rho,
                &state.coeffs,
                &lift,
                pressure.as_deref(),
            )?;
            let delta = (&momentum.coeffs - &v).amax();
            if delta < p.tol_fp || basis.is_empty() {
                let new_state = FluidState {
                    ratio: ratio_field(&fields.big_z, &fields.big_r, floor),
                    rho: fields.rho,
                    z: fields.z,
                    big_r: fields.big_r,
                    big_z: fields.big_z,
                    coeffs: momentum.coeffs.clone(),
                };
                break StepRecord {
                    time,
                    state: new_state,
                    face_u: faces,
                    fp_iters: iters,
                    momentum,
                    continuity_residual,
                };
            }
            if iters >= p.max_fp_iter {
                return Err(Error::FixedPoint { iters, delta });
            }
            v = &v + (&momentum.coeffs - &v) * p.theta_fp;
        };
        state = record.state.clone();
        steps.push(record);
    }

    Ok(Trajectory {
        scenario: scenario.clone(),
        u_n,
        partition,
        boundary,
        initial,
        steps,
    })
}

/// Mass ledgers of all four species over a trajectory.
pub fn mass_ledgers(traj: &Trajectory) -> Vec<(crate::geometry::Species, MassLedger)> {
    crate::geometry::Species::ALL
        .iter()
        .map(|&sp| {
            let mut ledger = MassLedger::new(traj.mesh(), traj.initial.species(sp));
            if !traj.params().frozen_densities {
                for step in &traj.steps {
                    let ctx = traj.step_context(step);
                    ledger.record_step(&ctx, step.state.species(sp), traj.boundary.species(sp));
                }
            }
            (sp, ledger)
        })
        .collect()
}

/// Renormalized budget of one species over a trajectory.
pub fn renorm_ledger(
    traj: &Trajectory,
    sp: crate::geometry::Species,
    b: RenormFn,
) -> RenormLedger {
    let mut ledger = RenormLedger::new();
    let mut prev = traj.initial.species(sp).to_vec();
    for step in &traj.steps {
        let ctx = traj.step_context(step);
        ledger.record_step(&ctx, &b, &prev, step.state.species(sp), traj.boundary.species(sp));
        prev = step.state.species(sp).to_vec();
    }
    ledger
}

/// Exact discrete budget of the internal energy ∫H_δ(R,Z): the (R,Z) pair
/// evolves under the common monotone operator, and testing both equations
/// with ∇H_δ(R',Z') telescopes exactly; the convection weight is P_δ by
/// the Euler identity of H.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InternalEnergyLedger {
    pub delta_h: f64,
    pub time_dissipation: f64,
    /// Σ Δt ∫ P_δ(R',Z') div u
    pub pressure_divergence: f64,
    pub upwind_dissipation: f64,
    /// ε-diffusion term; nonnegative wherever H_δ is convex
    pub diffusion_term: f64,
    pub outflow_flux: f64,
    pub inflow_flux: f64,
    pub inflow_bregman: f64,
    pub robin_term: f64,
    pub min_boundary_bregman: f64,
}

impl InternalEnergyLedger {
    pub fn residual(&self) -> f64 {
        self.delta_h
            + self.time_dissipation
            + self.pressure_divergence
            + self.upwind_dissipation
            + self.diffusion_term
            + self.outflow_flux
            + self.inflow_flux
            + self.inflow_bregman
            + self.robin_term
    }

    pub fn scale(&self) -> f64 {
        [
            self.delta_h,
            self.time_dissipation,
            self.pressure_divergence,
            self.upwind_dissipation,
            self.diffusion_term,
            self.outflow_flux,
            self.inflow_flux,
            self.inflow_bregman,
            self.robin_term,
        ]
        .iter()
        .fold(1e-30_f64, |m, t| m.max(t.abs()))
    }
}

struct HelmholtzFns<'a> {
    law: &'a PressureLaw,
    delta: f64,
    c_exp: f64,
}

impl HelmholtzFns<'_> {
    fn h(&self, r: f64, z: f64) -> f64 {
        self.law.helmholtz_delta(r, z, self.delta, self.c_exp).unwrap_or(f64::NAN)
    }

    fn grad(&self, r: f64, z: f64) -> (f64, f64) {
        (
            self.law.dh_delta_dr(r, z, self.delta, self.c_exp),
            self.law.dh_delta_dz(r, z, self.delta, self.c_exp),
        )
    }

    fn bregman(&self, a: (f64, f64), at: (f64, f64)) -> f64 {
        let (hr, hz) = self.grad(at.0, at.1);
        self.h(a.0, a.1) - hr * (a.0 - at.0) - hz * (a.1 - at.1) - self.h(at.0, at.1)
    }
}

pub fn internal_energy_ledger(traj: &Trajectory) -> InternalEnergyLedger {
    let mesh = traj.mesh();
    let p = traj.params();
    let hf = HelmholtzFns { law: &traj.scenario.law, delta: p.delta, c_exp: p.c_exp };
    let vol = mesh.cell_volume();
    let h = mesh.spacing();
    let mut led = InternalEnergyLedger { min_boundary_bregman: f64::INFINITY, ..Default::default() };
    if p.frozen_densities {
        led.min_boundary_bregman = 0.0;
        return led;
    }
    let mut prev_r = traj.initial.big_r.clone();
    let mut prev_z = traj.initial.big_z.clone();
    for step in &traj.steps {
        let (nr, nz) = (&step.state.big_r, &step.state.big_z);
        for c in 0..mesh.num_cells() {
            led.delta_h += vol * (hf.h(nr[c], nz[c]) - hf.h(prev_r[c], prev_z[c]));
            led.time_dissipation += vol * hf.bregman((prev_r[c], prev_z[c]), (nr[c], nz[c]));
            led.pressure_divergence += p.dt
                * vol
                * traj.scenario.law.pressure_delta(nr[c], nz[c], p.delta, p.c_exp)
                * step.face_u.divergence(mesh, c);
            for axis in 0..mesh.dim() {
                let Some(j) = mesh.neighbor(c, axis, crate::geometry::Side::Hi) else { continue };
                let area = mesh.face_area(axis);
                let u = step.face_u.at_cell_face(mesh, c, axis, crate::geometry::Side::Hi);
                let (d, o) = if u >= 0.0 { (c, j) } else { (j, c) };
                led.upwind_dissipation +=
                    p.dt * area * u.abs() * hf.bregman((nr[d], nz[d]), (nr[o], nz[o]));
                let (gc_r, gc_z) = hf.grad(nr[c], nz[c]);
                let (gj_r, gj_z) = hf.grad(nr[j], nz[j]);
                led.diffusion_term += p.dt * area * p.eps / h[axis]
                    * ((nr[c] - nr[j]) * (gc_r - gj_r) + (nz[c] - nz[j]) * (gc_z - gj_z));
            }
        }
        for &f in traj.partition.outflow.iter().chain(&traj.partition.neutral) {
            let bf = &mesh.boundary_faces()[f];
            led.outflow_flux +=
                p.dt * bf.measure * traj.u_n[f] * hf.h(nr[bf.cell], nz[bf.cell]);
        }
        for &f in &traj.partition.inflow {
            let bf = &mesh.boundary_faces()[f];
            let (rb, zb) = (traj.boundary.big_r[f], traj.boundary.big_z[f]);
            let (ri, zi) = (nr[bf.cell], nz[bf.cell]);
            led.inflow_flux += p.dt * bf.measure * traj.u_n[f] * hf.h(rb, zb);
            let gap = hf.bregman((rb, zb), (ri, zi));
            led.inflow_bregman += p.dt * bf.measure * (-traj.u_n[f]) * gap;
            led.min_boundary_bregman = led.min_boundary_bregman.min(gap);
            let (gr, gz) = hf.grad(ri, zi);
            led.robin_term +=
                p.dt * bf.measure * p.eps / h[bf.axis] * ((ri - rb) * gr + (zi - zb) * gz);
        }
        prev_r = nr.clone();
        prev_z = nz.clone();
    }
    if !led.min_boundary_bregman.is_finite() {
        led.min_boundary_bregman = 0.0;
    }
    led
}

/// Full energy budget of a trajectory: the exact internal-energy identity
/// plus the exact per-step kinetic identity, with the quadrature mismatch
/// between the finite-volume divergence and the Galerkin test divergence
/// isolated as its own entry.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyLedger {
    pub e_initial: f64,
    pub e_final: f64,
    pub internal: InternalEnergyLedger,
    pub viscous_dissipation: f64,
    pub momentum_jump: f64,
    pub mass_shift: f64,
    pub work_pressure: f64,
    pub work_lift: f64,
    pub work_convection: f64,
    pub work_eps: f64,
    /// Σ Δt ∫ P_δ div w for the analytic lift divergence
    pub lift_compression: f64,
    /// closure of the summed kinetic identities
    pub kinetic_residual: f64,
}

impl EnergyLedger {
    /// Slack of the energy inequality: every numerical-dissipation entry
    /// plus the signed quadrature mismatches. Nonnegative up to the
    /// divergence-consistency error of the Galerkin/finite-volume pairing.
    pub fn defect(&self) -> f64 {
        let pressure_mismatch =
            self.internal.pressure_divergence - self.work_pressure - self.lift_compression;
        self.internal.time_dissipation
            + self.internal.upwind_dissipation
            + self.internal.inflow_bregman
            + self.momentum_jump
            + self.mass_shift
            + pressure_mismatch
            + self.kinetic_residual
            + self.internal.residual()
    }

    pub fn scale(&self) -> f64 {
        self.e_initial.abs().max(self.e_final.abs()).max(1e-30)
    }
}

pub fn energy_ledger(traj: &Trajectory) -> Result<EnergyLedger> {
    let mesh = traj.mesh();
    let p = traj.params();
    let basis = GalerkinBasis::new(mesh, p.modes_per_axis)?;
    let lift = &traj.scenario.boundary_velocity;
    let internal = internal_energy_ledger(traj);
    let hf = HelmholtzFns { law: &traj.scenario.law, delta: p.delta, c_exp: p.c_exp };
    let vol = mesh.cell_volume();

    let internal_energy = |state: &FluidState| -> f64 {
        vol * (0..mesh.num_cells()).map(|c| hf.h(state.big_r[c], state.big_z[c])).sum::<f64>()
    };
    // Kinetic energy of the zero-trace part only, matching the telescoping
    // of the per-step kinetic identity; the lift's own inertia is part of
    // the lift work entry.
    let ke_v = |state: &FluidState, m: &[f64]| -> f64 {
        kinetic_energy_field(mesh, m, &basis.velocity_at_cells(&state.coeffs))
    };
    let mut led = EnergyLedger {
        e_initial: ke_v(&traj.initial, &traj.initial.rho) + internal_energy(&traj.initial),
        e_final: 0.0,
        internal,
        viscous_dissipation: 0.0,
        momentum_jump: 0.0,
        mass_shift: 0.0,
        work_pressure: 0.0,
        work_lift: 0.0,
        work_convection: 0.0,
        work_eps: 0.0,
        lift_compression: 0.0,
        kinetic_residual: 0.0,
    };
    for step in &traj.steps {
        let m = &step.momentum;
        led.viscous_dissipation += m.viscous;
        led.momentum_jump += m.jump_dissipation;
        led.mass_shift += m.mass_shift;
        led.work_pressure += m.work_pressure;
        led.work_lift += m.work_lift;
        led.work_convection += m.work_convection;
        led.work_eps += m.work_eps;
        led.kinetic_residual += m.kinetic_residual();
        if !p.frozen_densities {
            for c in 0..mesh.num_cells() {
                let x = mesh.cell_center(c);
                let gw = lift.grad(x);
                let divw = gw[0][0] + if mesh.dim() == 2 { gw[1][1] } else { 0.0 };
                let pr = traj.scenario.law.pressure_delta(
                    step.state.big_r[c],
                    step.state.big_z[c],
                    p.delta,
                    p.c_exp,
                );
                led.lift_compression += p.dt * vol * pr * divw;
            }
        }
    }
    let fs = traj.final_state();
    led.e_final = ke_v(fs, &fs.rho) + internal_energy(fs);
    Ok(led)
}

/// Vanishing-diffusion study: rerun a scenario for each ε (descending),
/// compare final-time ratio fields against the smallest-ε reference and
/// between consecutive runs.
#[derive(Debug, Clone, Serialize)]
pub struct EpsSweep {
    pub eps: Vec<f64>,
    /// L¹ distance of the final ratio field to the reference run.
    pub distance_to_ref: Vec<f64>,
    /// L¹ Cauchy differences between consecutive runs.
    pub cauchy: Vec<f64>,
}

pub fn sweep_epsilon(scenario: &Scenario, eps_list: &[f64]) -> Result<EpsSweep> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidArg("epsilon sweep needs at least two values".into()));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let finals: Vec<Vec<f64>> = eps
        .par_iter()
        .map(|&e| {
            let mut sc = scenario.clone();
            sc.params.eps = e;
            run_level1(&sc).map(|t| t.final_state().ratio.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let vol = scenario.mesh.cell_volume();
    let l1 = |a: &[f64], b: &[f64]| -> f64 {
        vol * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
    };
    let reference = finals.last().unwrap();
    let distance_to_ref = finals.iter().map(|f| l1(f, reference)).collect();
    let cauchy = finals.windows(2).map(|w| l1(&w[0], &w[1])).collect();
    Ok(EpsSweep { eps, distance_to_ref, cauchy })
}

/// Vanishing artificial pressure: for each δ record the largest
/// artificial-energy content δ/(𝔠−1)·sup_n ∫(R^𝔠 + Z^𝔠).
#[derive(Debug, Clone, Serialize)]
pub struct DeltaSweep {
    pub delta: Vec<f64>,
    pub artificial_energy: Vec<f64>,
}

pub fn sweep_delta(scenario: &Scenario, delta_list: &[f64]) -> Result<DeltaSweep> {
    let mut delta = delta_list.to_vec();
    delta.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let c_exp = scenario.params.c_exp;
    let vol = scenario.mesh.cell_volume();
    let artificial_energy: Vec<f64> = delta
        .par_iter()
        .map(|&d| {
            let mut sc = scenario.clone();
            sc.params.delta = d;
            let traj = run_level1(&sc)?;
            let mut sup = 0.0_f64;
            for n in 0..=traj.steps.len() {
                let st = traj.state_at(n);
                let e: f64 = st
                    .big_r
                    .iter()
                    .zip(&st.big_z)
                    .map(|(&r, &z)| r.powf(c_exp) + z.powf(c_exp))
                    .sum::<f64>()
                    * vol;
                sup = sup.max(e);
            }
            Ok(d / (c_exp - 1.0).max(1.0) * sup)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DeltaSweep { delta, artificial_energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::bundled_scenario;

    #[test]
    fn constant_scenario_stays_constant() {
        let sc = bundled_scenario("constant").unwrap();
        let traj = run_level1(&sc).unwrap();
        let fs = traj.final_state();
        for &v in &fs.big_r {
            assert!((v - 2.0).abs() < 1e-10, "{v}");
        }
        for &v in &fs.ratio {
            assert!((v - 0.5).abs() < 1e-12);
        }
        // velocity stays at the lift
        assert!(fs.coeffs.amax() < 1e-8);
    }

    #[test]
    fn mass_ledgers_close_on_compressive_run() {
        let mut sc = bundled_scenario("compressive").unwrap();
        sc.params.total_time = 0.05;
        let traj = run_level1(&sc).unwrap();
        for (sp, ledger) in mass_ledgers(&traj) {
            assert!(
                ledger.residual().abs() <= 1e-11 * ledger.scale(),
                "{}: {:e}",
                sp.name(),
                ledger.residual()
            );
        }
    }

    #[test]
    fn internal_energy_identity_closes() {
        let mut sc = bundled_scenario("compressive").unwrap();
        sc.params.total_time = 0.05;
        let traj = run_level1(&sc).unwrap();
        let led = internal_energy_ledger(&traj);
        let rel = led.residual().abs() / led.scale();
        assert!(rel <= 1e-9, "relative residual {rel:e}");
        assert!(led.time_dissipation >= 0.0);
        assert!(led.upwind_dissipation >= 0.0);
        assert!(led.inflow_bregman >= 0.0);
    }

    #[test]
    fn energy_defect_nonnegative_on_inflow() {
        let mut sc = bundled_scenario("inflow-fill").unwrap();
        sc.params.total_time = 0.05;
        let traj = run_level1(&sc).unwrap();
        let led = energy_ledger(&traj).unwrap();
        assert!(led.kinetic_residual.abs() <= 1e-8 * led.scale());
        assert!(led.defect() >= -1e-6 * led.e_initial, "defect {:e}", led.defect());
    }

    #[test]
    fn viscous_decay_loses_energy_exactly() {
        let sc = bundled_scenario("viscous-decay").unwrap();
        let traj = run_level1(&sc).unwrap();
        let led = energy_ledger(&traj).unwrap();
        // closed box, frozen densities: kinetic loss = viscous + jump exactly
        let loss = led.e_initial - led.e_final;
        let claimed = led.viscous_dissipation + led.momentum_jump;
        assert!(
            (loss - claimed).abs() <= 1e-11 * led.e_initial,
            "loss {loss:e} vs {claimed:e}"
        );
        assert!(loss > 0.0);
    }

    #[test]
    fn domination_cone_preserved() {
        let mut sc = bundled_scenario("smooth").unwrap();
        sc.params.total_time = 0.02;
        let traj = run_level1(&sc).unwrap();
        let (f_lo, f_hi) = sc.closure.f_bounds();
        let (g_lo, g_hi) = sc.closure.g_bounds();
        for n in 0..=traj.steps.len() {
            let st = traj.state_at(n);
            for c in 0..traj.mesh().num_cells() {
                let (r, z) = (st.big_r[c], st.big_z[c]);
                assert!(st.big_z[c] >= sc.cone.a_lower * r - 1e-12);
                assert!(st.big_z[c] <= sc.cone.a_upper * r + 1e-12);
                assert!(st.rho[c] >= f_lo * r - 1e-12 && st.rho[c] <= f_hi * r + 1e-12);
                assert!(st.z[c] >= g_lo * z - 1e-12 && st.z[c] <= g_hi * z + 1e-12);
            }
        }
    }

    #[test]
    fn eps_sweep_is_cauchy() {
        let mut sc = bundled_scenario("smooth").unwrap();
        sc.params.total_time = 0.04;
        let sweep = sweep_epsilon(&sc, &[0.04, 0.02, 0.01, 0.005]).unwrap();
        // differences shrink as eps decreases
        for w in sweep.cauchy.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{:?}", sweep.cauchy);
        }
        assert_eq!(*sweep.distance_to_ref.last().unwrap(), 0.0);
    }

    #[test]
    fn delta_sweep_artificial_energy_vanishes() {
        let mut sc = bundled_scenario("constant").unwrap();
        sc.params.total_time = 0.05;
        let sweep = sweep_delta(&sc, &[1e-2, 1e-3, 1e-4]).unwrap();
        for w in sweep.artificial_energy.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(*sweep.artificial_energy.last().unwrap() < 1e-3);
    }
}
