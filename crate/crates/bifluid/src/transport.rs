//! The monotone continuity scheme (backward Euler in time, first-order
//! upwind in space, with an ε-diffusion relaxing the boundary data on the
//! inflow part), mass and renormalization ledgers that close as exact
//! discrete identities, and the nonconservative upwind transport of the
//! ratio field.

use serde::Serialize;

use crate::geometry::{BoundaryPartition, FaceVelocity, Mesh, Side};
use crate::linalg::{solve_tridiagonal, SparseRows};
use crate::{Error, Result};

/// Everything one backward-Euler step of any of the four species needs:
/// the mesh, the face velocities actually used, their trace `u·n` on the
/// boundary with its sign partition, the diffusion ε and the step size.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub mesh: &'a Mesh,
    pub faces: &'a FaceVelocity,
    /// `u·n` on every boundary face; must be the trace of `faces`.
    pub u_n: &'a [f64],
    pub partition: &'a BoundaryPartition,
    pub eps: f64,
    pub dt: f64,
}

/// The linear operator of one implicit step. It depends on the velocity
/// only, so the same assembled operator advances all four species; this is
/// what makes the domination cone exactly invariant.
#[derive(Debug, Clone)]
pub struct ContinuityOp {
    rows: SparseRows,
    dim: usize,
    volume: f64,
    dt: f64,
}

impl ContinuityOp {
    pub fn assemble(ctx: &StepContext) -> Result<Self> {
        let mesh = ctx.mesh;
        let n = mesh.num_cells();
        let vol = mesh.cell_volume();
        let mut rows = SparseRows::new(n);
        for d in rows.diag.iter_mut() {
            *d = vol / ctx.dt;
        }
        let h = mesh.spacing();
        for c in 0..n {
            for axis in 0..mesh.dim() {
                let Some(j) = mesh.neighbor(c, axis, Side::Hi) else { continue };
                let area = mesh.face_area(axis);
                let u = ctx.faces.at_cell_face(mesh, c, axis, Side::Hi);
                let up = u.max(0.0);
                let um = (-u).max(0.0);
                let relax = ctx.eps / h[axis];
                rows.diag[c] += area * (up + relax);
                rows.add_off(c, j, -area * (um + relax));
                rows.diag[j] += area * (um + relax);
                rows.add_off(j, c, -area * (up + relax));
            }
        }
        for &f in ctx.partition.outflow.iter().chain(&ctx.partition.neutral) {
            let bf = &mesh.boundary_faces()[f];
            rows.diag[bf.cell] += bf.measure * ctx.u_n[f];
        }
        for &f in &ctx.partition.inflow {
            let bf = &mesh.boundary_faces()[f];
            rows.diag[bf.cell] += bf.measure * ctx.eps / h[bf.axis];
        }
        for (i, d) in rows.diag.iter().enumerate() {
            if *d <= 0.0 {
                return Err(Error::Monotonicity(format!(
                    "non-positive diagonal {d:.3e} in cell {i}"
                )));
            }
        }
        for (i, row) in rows.off.iter().enumerate() {
            for &(j, v) in row {
                if v > 0.0 {
                    return Err(Error::Monotonicity(format!(
                        "positive off-diagonal {v:.3e} at ({i},{j})"
                    )));
                }
            }
        }
        Ok(ContinuityOp { rows, dim: mesh.dim(), volume: vol, dt: ctx.dt })
    }

    /// Right-hand side for a species with previous state `r_old`, boundary
    /// values `r_b` (indexed by boundary face, read on the inflow part)
    /// and an optional volumetric source.
    pub fn rhs(
        &self,
        ctx: &StepContext,
        r_old: &[f64],
        r_b: &[f64],
        source: Option<&[f64]>,
    ) -> Vec<f64> {
        let mesh = ctx.mesh;
        let vol = self.volume;
        let mut rhs: Vec<f64> = r_old.iter().map(|r| vol / self.dt * r).collect();
        if let Some(s) = source {
            for (b, v) in rhs.iter_mut().zip(s) {
                *b += vol * v;
            }
        }
        let h = mesh.spacing();
        for &f in &ctx.partition.inflow {
            let bf = &mesh.boundary_faces()[f];
            rhs[bf.cell] += bf.measure * (-ctx.u_n[f] + ctx.eps / h[bf.axis]) * r_b[f];
        }
        rhs
    }

    pub fn solve(&self, rhs: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        if self.dim == 1 {
            let n = rhs.len();
            let mut lower = vec![0.0; n];
            let mut upper = vec![0.0; n];
            for (i, row) in self.rows.off.iter().enumerate() {
                for &(j, v) in row {
                    if j + 1 == i {
                        lower[i] = v;
                    } else if j == i + 1 {
                        upper[i] = v;
                    }
                }
            }
            solve_tridiagonal(&lower, &self.rows.diag, &upper, rhs)
        } else {
            self.rows.solve_gauss_seidel(rhs, x0, 1e-14, 50_000)
        }
    }

    pub fn solver_residual(&self, x: &[f64], rhs: &[f64]) -> f64 {
        self.rows.residual_norm(x, rhs)
    }

    /// Per-cell residual `Ax - b`; rows carry units of mass per time.
    pub fn residual_vector(&self, x: &[f64], rhs: &[f64]) -> Vec<f64> {
        self.rows.residual_vector(x, rhs)
    }
}

/// One implicit step of the continuity scheme for one species.
pub fn parabolic_step(
    ctx: &StepContext,
    r_old: &[f64],
    r_b: &[f64],
    source: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let op = ContinuityOp::assemble(ctx)?;
    let rhs = op.rhs(ctx, r_old, r_b, source);
    op.solve(&rhs, r_old)
}

/// Running mass balance of one species: the change of total mass equals
/// inflow gain minus outflow loss, face by face, step by step.
#[derive(Debug, Clone, Serialize)]
pub struct MassLedger {
    pub initial_mass: f64,
    pub final_mass: f64,
    pub inflow_gain: f64,
    pub outflow_loss: f64,
}

impl MassLedger {
    pub fn new(mesh: &Mesh, r0: &[f64]) -> Self {
        let m = mesh.cell_volume() * r0.iter().sum::<f64>();
        MassLedger { initial_mass: m, final_mass: m, inflow_gain: 0.0, outflow_loss: 0.0 }
    }

    /// Record the boundary fluxes of one completed step (`r_new` is the
    /// post-step state the implicit fluxes are evaluated at).
    pub fn record_step(&mut self, ctx: &StepContext, r_new: &[f64], r_b: &[f64]) {
        let mesh = ctx.mesh;
        let h = mesh.spacing();
        for &f in &ctx.partition.inflow {
            let bf = &mesh.boundary_faces()[f];
            let relax = ctx.eps / h[bf.axis] * (r_new[bf.cell] - r_b[f]);
            self.inflow_gain += ctx.dt * bf.measure * (-ctx.u_n[f] * r_b[f] - relax);
        }
        for &f in ctx.partition.outflow.iter().chain(&ctx.partition.neutral) {
            let bf = &mesh.boundary_faces()[f];
            self.outflow_loss += ctx.dt * bf.measure * ctx.u_n[f] * r_new[bf.cell];
        }
        self.final_mass = mesh.cell_volume() * r_new.iter().sum::<f64>();
    }

    /// final − initial − gain + loss; zero up to rounding and solver residual.
    pub fn residual(&self) -> f64 {
        self.final_mass - self.initial_mass - self.inflow_gain + self.outflow_loss
    }

    pub fn scale(&self) -> f64 {
        self.initial_mass.abs().max(self.final_mass.abs()).max(1e-30)
    }
}

/// Renormalizing function B for the renormalized budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenormFn {
    /// B(s) = s²
    Square,
    /// B(s) = s·ln(s + shift)
    LogShift { shift: f64 },
    /// B(s) = L_k(s), the truncated logarithm companion of T_k.
    TruncL { k: f64 },
}

impl RenormFn {
    pub fn b(&self, s: f64) -> f64 {
        match self {
            RenormFn::Square => s * s,
            RenormFn::LogShift { shift } => s * (s + shift).ln(),
            RenormFn::TruncL { k } => crate::thermo::truncation_l(*k, s),
        }
    }

    pub fn db(&self, s: f64) -> f64 {
        match self {
            RenormFn::Square => 2.0 * s,
            RenormFn::LogShift { shift } => (s + shift).ln() + s / (s + shift),
            RenormFn::TruncL { k } => {
                // s L' − L = T_k, hence L' = (L + T_k)/s
                let s = s.max(1e-300);
                (crate::thermo::truncation_l(*k, s) + crate::thermo::truncation_t(*k, s)) / s
            }
        }
    }

    /// Bregman gap E_B(a|b) >= 0 for these convex choices.
    pub fn bregman(&self, a: f64, at: f64) -> f64 {
        self.b(a) - self.db(at) * (a - at) - self.b(at)
    }

    /// Q(s) = s B'(s) − B(s), the convection weight of the budget.
    fn q(&self, s: f64) -> f64 {
        s * self.db(s) - self.b(s)
    }
}

/// Renormalized budget of a species trajectory. All entries are the exact
/// discrete terms produced by multiplying the scheme by B'(r^{n+1}):
/// their sum closes to zero up to rounding and linear-solver residual, and
/// every dissipation entry is nonnegative for convex B.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RenormLedger {
    /// ∫B(r(τ)) − ∫B(r₀)
    pub delta_b: f64,
    /// backward-Euler time-jump dissipation Σ V·E_B(rⁿ | rⁿ⁺¹)
    pub time_dissipation: f64,
    /// Σ Δt ∫ (B'(r)r − B(r)) div u
    pub divergence_term: f64,
    /// upwind face dissipation Σ Δt A|u| E_B(donor | receiver)
    pub upwind_dissipation: f64,
    /// ε Σ Δt A/h (Δr)(ΔB'(r)) over interior faces
    pub diffusion_dissipation: f64,
    /// Σ Δt ∫_{Γout} B(r) u·n
    pub outflow_flux: f64,
    /// Σ Δt ∫_{Γin} B(r_B) u·n (negative: a gain)
    pub inflow_flux: f64,
    /// Σ Δt ∫_{Γin} |u·n| E_B(r_B | r)
    pub inflow_bregman: f64,
    /// ε-relaxation dissipation on Γin
    pub robin_dissipation: f64,
    /// signed ε-relaxation flux on Γin
    pub robin_flux: f64,
    /// smallest Bregman gap seen at an inflow face
    pub min_boundary_bregman: f64,
}

impl RenormLedger {
    pub fn new() -> Self {
        RenormLedger { min_boundary_bregman: f64::INFINITY, ..Default::default() }
    }

    pub fn record_step(
        &mut self,
        ctx: &StepContext,
        b: &RenormFn,
        r_old: &[f64],
        r_new: &[f64],
        r_b: &[f64],
    ) {
        let mesh = ctx.mesh;
        let vol = mesh.cell_volume();
        let h = mesh.spacing();
        for c in 0..mesh.num_cells() {
            self.delta_b += vol * (b.b(r_new[c]) - b.b(r_old[c]));
            self.time_dissipation += vol * b.bregman(r_old[c], r_new[c]);
            self.divergence_term +=
                ctx.dt * vol * b.q(r_new[c]) * ctx.faces.divergence(mesh, c);
            for axis in 0..mesh.dim() {
                let Some(j) = mesh.neighbor(c, axis, Side::Hi) else { continue };
                let area = mesh.face_area(axis);
                let u = ctx.faces.at_cell_face(mesh, c, axis, Side::Hi);
                let (donor, other) = if u >= 0.0 { (c, j) } else { (j, c) };
                self.upwind_dissipation +=
                    ctx.dt * area * u.abs() * b.bregman(r_new[donor], r_new[other]);
                let jump = r_new[c] - r_new[j];
                self.diffusion_dissipation +=
                    ctx.dt * area * ctx.eps / h[axis] * jump * (b.db(r_new[c]) - b.db(r_new[j]));
            }
        }
        for &f in ctx.partition.outflow.iter().chain(&ctx.partition.neutral) {
            let bf = &mesh.boundary_faces()[f];
            self.outflow_flux += ctx.dt * bf.measure * ctx.u_n[f] * b.b(r_new[bf.cell]);
        }
        for &f in &ctx.partition.inflow {
            let bf = &mesh.boundary_faces()[f];
            let (rb, ri) = (r_b[f], r_new[bf.cell]);
            self.inflow_flux += ctx.dt * bf.measure * ctx.u_n[f] * b.b(rb);
            let gap = b.bregman(rb, ri);
            self.inflow_bregman += ctx.dt * bf.measure * (-ctx.u_n[f]) * gap;
            self.min_boundary_bregman = self.min_boundary_bregman.min(gap);
            let relax = ctx.eps / h[bf.axis] * bf.measure * ctx.dt;
            self.robin_dissipation += relax * (ri - rb) * (b.db(ri) - b.db(rb));
            self.robin_flux += relax * (ri - rb) * b.db(rb);
        }
    }

    /// Signed closure of the budget identity.
    pub fn residual(&self) -> f64 {
        self.delta_b
            + self.time_dissipation
            + self.divergence_term
            + self.upwind_dissipation
            + self.diffusion_dissipation
            + self.outflow_flux
            + self.inflow_flux
            + self.inflow_bregman
            + self.robin_dissipation
            + self.robin_flux
    }

    pub fn scale(&self) -> f64 {
        [
            self.delta_b,
            self.time_dissipation,
            self.divergence_term,
            self.upwind_dissipation,
            self.diffusion_dissipation,
            self.outflow_flux,
            self.inflow_flux,
            self.inflow_bregman,
            self.robin_dissipation,
            self.robin_flux,
        ]
        .iter()
        .fold(1e-30_f64, |m, t| m.max(t.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    Explicit,
    Implicit,
}

/// Nonconservative upwind transport of the ratio field: every cell relaxes
/// toward its upwind donors (neighbor cells, or the boundary value on the
/// inflow part); outflow faces do not act. Satisfies a discrete maximum
/// principle in both time schemes; the explicit one additionally requires
/// the CFL condition.
pub fn transport_step(
    ctx: &StepContext,
    s_old: &[f64],
    s_b: &[f64],
    scheme: TimeScheme,
) -> Result<Vec<f64>> {
    let mesh = ctx.mesh;
    let n = mesh.num_cells();
    let vol = mesh.cell_volume();
    // incoming |u|A per cell: (interior donor cell, rate) and boundary rate*value
    let mut rows = SparseRows::new(n);
    for d in rows.diag.iter_mut() {
        *d = vol / ctx.dt;
    }
    let mut boundary_in = vec![0.0; n];
    for c in 0..n {
        for axis in 0..mesh.dim() {
            let Some(j) = mesh.neighbor(c, axis, Side::Hi) else { continue };
            let area = mesh.face_area(axis);
            let u = ctx.faces.at_cell_face(mesh, c, axis, Side::Hi);
            // velocity from c toward j if u > 0
            let (recv, donor) = if u >= 0.0 { (j, c) } else { (c, j) };
            rows.diag[recv] += area * u.abs();
            rows.add_off(recv, donor, -area * u.abs());
        }
    }
    for &f in &ctx.partition.inflow {
        let bf = &mesh.boundary_faces()[f];
        let rate = bf.measure * (-ctx.u_n[f]);
        rows.diag[bf.cell] += rate;
        boundary_in[bf.cell] += rate * s_b[f];
    }
    match scheme {
        TimeScheme::Implicit => {
            let rhs: Vec<f64> = (0..n).map(|i| vol / ctx.dt * s_old[i] + boundary_in[i]).collect();
            if mesh.dim() == 1 {
                let mut lower = vec![0.0; n];
                let mut upper = vec![0.0; n];
                for (i, row) in rows.off.iter().enumerate() {
                    for &(j, v) in row {
                        if j + 1 == i {
                            lower[i] = v;
                        } else if j == i + 1 {
                            upper[i] = v;
                        }
                    }
                }
                solve_tridiagonal(&lower, &rows.diag, &upper, &rhs)
            } else {
                rows.solve_gauss_seidel(&rhs, s_old, 1e-14, 50_000)
            }
        }
        TimeScheme::Explicit => {
            let mut courant_max = 0.0_f64;
            let mut out = vec![0.0; n];
            for i in 0..n {
                let incoming = rows.diag[i] - vol / ctx.dt;
                let courant = incoming * ctx.dt / vol;
                courant_max = courant_max.max(courant);
                let mut acc = (vol / ctx.dt - incoming) * s_old[i] + boundary_in[i];
                for &(j, v) in &rows.off[i] {
                    acc -= v * s_old[j];
                }
                out[i] = acc * ctx.dt / vol;
            }
            if courant_max > 1.0 {
                return Err(Error::Cfl { courant: courant_max, dt: ctx.dt });
            }
            Ok(out)
        }
    }
}

/// Ratio field s = Z / max(R, floor).
pub fn ratio_field(big_z: &[f64], big_r: &[f64], floor: f64) -> Vec<f64> {
    big_z.iter().zip(big_r).map(|(&z, &r)| z / r.max(floor)).collect()
}

/// Max/min-principle envelope: density caps/floors propagated by the
/// worst-case divergence over the time horizon.
pub fn density_growth_bound(
    cap: f64,
    floor: f64,
    total_time: f64,
    sup_div: f64,
) -> (f64, f64) {
    let e = (total_time * sup_div).exp();
    (cap * e, floor / e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_boundary, normal_velocities};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        mesh: Mesh,
        faces: FaceVelocity,
        u_n: Vec<f64>,
        partition: BoundaryPartition,
    }

    impl Fixture {
        fn line(cells: usize, length: f64, velocity: impl Fn(f64) -> f64) -> Self {
            let mesh = Mesh::line(cells, length).unwrap();
            let mut faces = FaceVelocity::zero(&mesh);
            let h = mesh.spacing()[0];
            for i in 0..=cells {
                faces.axis[0][i] = velocity(i as f64 * h);
            }
            let u_n = normal_velocities(&mesh, &faces);
            let partition = classify_boundary(&mesh, &u_n);
            Fixture { mesh, faces, u_n, partition }
        }

        fn ctx(&self, eps: f64, dt: f64) -> StepContext<'_> {
            StepContext {
                mesh: &self.mesh,
                faces: &self.faces,
                u_n: &self.u_n,
                partition: &self.partition,
                eps,
                dt,
            }
        }
    }

    #[test]
    fn constant_state_is_stationary() {
        let fx = Fixture::line(20, 1.0, |_| 0.7);
        let ctx = fx.ctx(0.05, 0.01);
        let nf = fx.mesh.boundary_faces().len();
        let mut r = vec![2.0; fx.mesh.num_cells()];
        let r_b = vec![2.0; nf];
        for _ in 0..10 {
            r = parabolic_step(&ctx, &r, &r_b, None).unwrap();
        }
        for &v in &r {
            assert!((v - 2.0).abs() < 1e-13, "{v}");
        }
    }

    #[test]
    fn positivity_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..5 {
            let fx = Fixture::line(30, 2.0, |x| (x * (3.1 + trial as f64)).sin());
            let ctx = fx.ctx(0.02, 0.05);
            let nf = fx.mesh.boundary_faces().len();
            let mut r: Vec<f64> =
                (0..fx.mesh.num_cells()).map(|_| rng.gen_range(0.0..3.0)).collect();
            let r_b: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..3.0)).collect();
            for _ in 0..20 {
                r = parabolic_step(&ctx, &r, &r_b, None).unwrap();
                assert!(r.iter().all(|&v| v >= -1e-15));
            }
        }
    }

    #[test]
    fn ordering_preserved_by_common_operator() {
        // Two species advanced by the same operator keep their pointwise
        // order when initial and boundary data are ordered.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fx = Fixture::line(25, 1.0, |x| 0.8 - 0.3 * x);
        let ctx = fx.ctx(0.01, 0.02);
        let nf = fx.mesh.boundary_faces().len();
        let mut lo: Vec<f64> = (0..fx.mesh.num_cells()).map(|_| rng.gen_range(0.5..1.0)).collect();
        let mut hi: Vec<f64> = lo.iter().map(|v| v + rng.gen_range(0.0..1.0)).collect();
        let lo_b: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.5..1.0)).collect();
        let hi_b: Vec<f64> = lo_b.iter().map(|v| v + 0.3).collect();
        for _ in 0..30 {
            lo = parabolic_step(&ctx, &lo, &lo_b, None).unwrap();
            hi = parabolic_step(&ctx, &hi, &hi_b, None).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                assert!(a <= &(b + 1e-12));
            }
        }
    }

    fn run_ledgers(
        fx: &Fixture,
        eps: f64,
        dt: f64,
        steps: usize,
        b: RenormFn,
    ) -> (MassLedger, RenormLedger) {
        let ctx = fx.ctx(eps, dt);
        let nf = fx.mesh.boundary_faces().len();
        let n = fx.mesh.num_cells();
        let r0: Vec<f64> = (0..n)
            .map(|c| 1.5 + 0.5 * (3.0 * fx.mesh.cell_center(c)[0]).sin())
            .collect();
        let r_b = vec![1.8; nf];
        let mut mass = MassLedger::new(&fx.mesh, &r0);
        let mut reno = RenormLedger::new();
        let mut r = r0;
        for _ in 0..steps {
            let r_new = parabolic_step(&ctx, &r, &r_b, None).unwrap();
            mass.record_step(&ctx, &r_new, &r_b);
            reno.record_step(&ctx, &b, &r, &r_new, &r_b);
            r = r_new;
        }
        (mass, reno)
    }

    #[test]
    fn mass_ledger_closes_exactly() {
        let fx = Fixture::line(40, 1.0, |_| 1.0);
        let (mass, _) = run_ledgers(&fx, 0.01, 0.005, 50, RenormFn::Square);
        assert!(mass.residual().abs() <= 1e-12 * mass.scale(), "{:e}", mass.residual());
        assert!(mass.inflow_gain > 0.0);
        assert!(mass.outflow_loss > 0.0);
    }

    #[test]
    fn renorm_identity_closes_for_each_b() {
        let fx = Fixture::line(40, 1.0, |x| 0.9 + 0.2 * x);
        for b in [
            RenormFn::Square,
            RenormFn::LogShift { shift: 1e-8 },
            RenormFn::TruncL { k: 2.0 },
        ] {
            let (_, reno) = run_ledgers(&fx, 0.02, 0.01, 40, b);
            let rel = reno.residual().abs() / reno.scale();
            assert!(rel <= 1e-10, "{b:?}: relative residual {rel:e}");
            assert!(reno.time_dissipation >= 0.0);
            assert!(reno.upwind_dissipation >= 0.0);
            assert!(reno.diffusion_dissipation >= 0.0);
            assert!(reno.inflow_bregman >= 0.0);
            assert!(reno.robin_dissipation >= 0.0);
            assert!(reno.min_boundary_bregman >= 0.0);
        }
    }

    #[test]
    fn manufactured_solution_first_order() {
        // r*(x,t) = 2 + sin(x − t), u ≡ 1, source ε sin(x − t).
        let eps = 0.01;
        let total_t = 0.5;
        let length = 2.0 * std::f64::consts::PI - 1.0;
        let mut errors = Vec::new();
        for &cells in &[64usize, 128] {
            let fx = Fixture::line(cells, length, |_| 1.0);
            let steps = cells; // dt ∝ h
            let dt = total_t / steps as f64;
            let ctx = fx.ctx(eps, dt);
            let n = fx.mesh.num_cells();
            let exact = |x: f64, t: f64| 2.0 + (x - t).sin();
            let mut r: Vec<f64> =
                (0..n).map(|c| exact(fx.mesh.cell_center(c)[0], 0.0)).collect();
            for step in 1..=steps {
                let t_new = step as f64 * dt;
                let source: Vec<f64> = (0..n)
                    .map(|c| eps * (fx.mesh.cell_center(c)[0] - t_new).sin())
                    .collect();
                let r_b: Vec<f64> = fx
                    .mesh
                    .boundary_faces()
                    .iter()
                    .map(|bf| exact(bf.center[0], t_new))
                    .collect();
                r = parabolic_step(&ctx, &r, &r_b, Some(&source)).unwrap();
            }
            let err: f64 = (0..n)
                .map(|c| (r[c] - exact(fx.mesh.cell_center(c)[0], total_t)).abs())
                .sum::<f64>()
                * fx.mesh.cell_volume();
            errors.push(err);
        }
        let ratio = errors[0] / errors[1];
        assert!((1.5..3.0).contains(&ratio), "errors {errors:?}, ratio {ratio}");
    }

    #[test]
    fn transport_max_principle_and_cfl() {
        let fx = Fixture::line(50, 1.0, |x| 0.5 + 0.4 * (7.0 * x).sin());
        let nf = fx.mesh.boundary_faces().len();
        let s_b = vec![0.6; nf];
        let s0: Vec<f64> = (0..fx.mesh.num_cells())
            .map(|c| 0.4 + 0.3 * (5.0 * fx.mesh.cell_center(c)[0]).cos())
            .collect();
        let lo = 0.1_f64.min(s0.iter().cloned().fold(f64::INFINITY, f64::min)).min(0.6);
        let hi = s0.iter().cloned().fold(0.0, f64::max).max(0.6);
        for scheme in [TimeScheme::Explicit, TimeScheme::Implicit] {
            let ctx = fx.ctx(0.0, 0.01);
            let mut s = s0.clone();
            for _ in 0..40 {
                s = transport_step(&ctx, &s, &s_b, scheme).unwrap();
                for &v in &s {
                    assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "{scheme:?}: {v}");
                }
            }
        }
        // dt far above the CFL limit must be rejected for the explicit scheme
        let ctx = fx.ctx(0.0, 10.0);
        let err = transport_step(&ctx, &s0, &s_b, TimeScheme::Explicit);
        assert!(matches!(err, Err(Error::Cfl { .. })));
    }

    #[test]
    fn implicit_and_explicit_transport_agree_for_small_dt() {
        let fx = Fixture::line(30, 1.0, |_| 1.0);
        let nf = fx.mesh.boundary_faces().len();
        let s_b = vec![0.5; nf];
        let s0: Vec<f64> = (0..30).map(|i| 0.5 + 0.2 * (i as f64 / 30.0)).collect();
        let ctx = fx.ctx(0.0, 1e-4);
        let a = transport_step(&ctx, &s0, &s_b, TimeScheme::Explicit).unwrap();
        let b = transport_step(&ctx, &s0, &s_b, TimeScheme::Implicit).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn two_dimensional_constant_state() {
        let mesh = Mesh::rectangle([8, 6], [1.0, 1.0]).unwrap();
        let mut faces = FaceVelocity::zero(&mesh);
        for v in faces.axis[0].iter_mut() {
            *v = 0.4;
        }
        for v in faces.axis[1].iter_mut() {
            *v = -0.2;
        }
        let u_n = normal_velocities(&mesh, &faces);
        let partition = classify_boundary(&mesh, &u_n);
        let ctx = StepContext { mesh: &mesh, faces: &faces, u_n: &u_n, partition: &partition, eps: 0.03, dt: 0.02 };
        let nf = mesh.boundary_faces().len();
        let mut r = vec![1.3; mesh.num_cells()];
        let r_b = vec![1.3; nf];
        let mut mass = MassLedger::new(&mesh, &r);
        for _ in 0..5 {
            let r_new = parabolic_step(&ctx, &r, &r_b, None).unwrap();
            mass.record_step(&ctx, &r_new, &r_b);
            r = r_new;
        }
        for &v in &r {
            assert!((v - 1.3).abs() < 1e-10);
        }
        assert!(mass.residual().abs() <= 1e-9 * mass.scale());
    }

    #[test]
    fn ratio_field_floors_vacuum() {
        let s = ratio_field(&[0.5, 0.0, 1.0], &[1.0, 0.0, 1e-12], 1e-6);
        assert_eq!(s[0], 0.5);
        assert_eq!(s[1], 0.0);
        assert!((s[2] - 1e6).abs() < 1.0);
    }

    #[test]
    fn growth_bound_monotone_in_time() {
        let (cap1, floor1) = density_growth_bound(2.0, 0.5, 1.0, 0.3);
        let (cap2, floor2) = density_growth_bound(2.0, 0.5, 2.0, 0.3);
        assert!(cap2 > cap1 && cap1 > 2.0);
        assert!(floor2 < floor1 && floor1 < 0.5);
    }
}
