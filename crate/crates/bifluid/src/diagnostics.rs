//! Certificates evaluated on recorded trajectories: domination cones,
//! growth envelopes, ratio-transport consistency, compactness and
//! uniqueness surrogates, divergence recovery, near-boundary pressure
//! integrability and weak-form residuals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coupling::Trajectory;
use crate::geometry::{Mesh, Species};
use crate::transport::{ratio_field, transport_step, ContinuityOp, TimeScheme};
use crate::{Error, Result};

/// One named check: passes when `value <= tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CertificateReport {
    pub fn bounded(name: &str, value: f64, tolerance: f64) -> Self {
        CertificateReport { name: name.to_string(), value, tolerance, passed: value <= tolerance }
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed {
            "pass"
        } else {
            "FAIL"
        }
    }
}

/// Smallest slack of the six cone inequalities over a whole trajectory:
/// a̲R ≤ Z ≤ āR, F̲R ≤ ϱ ≤ F̄R, G̲Z ≤ z ≤ ḠZ.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub min_margin: f64,
    pub worst_inequality: String,
    pub worst_step: usize,
    pub worst_cell: usize,
}

/// The six cone margins of one cell; all must be nonnegative.
pub fn cell_domination_margins(
    rho: f64,
    z: f64,
    big_r: f64,
    big_z: f64,
    cone: &crate::thermo::Cone,
    closure: &crate::thermo::Closure,
) -> [(&'static str, f64); 6] {
    let (f_lo, f_hi) = closure.f_bounds();
    let (g_lo, g_hi) = closure.g_bounds();
    [
        ("Z >= a_lower R", big_z - cone.a_lower * big_r),
        ("Z <= a_upper R", cone.a_upper * big_r - big_z),
        ("rho >= f_min R", rho - f_lo * big_r),
        ("rho <= f_max R", f_hi * big_r - rho),
        ("z >= g_min Z", z - g_lo * big_z),
        ("z <= g_max Z", g_hi * big_z - z),
    ]
}

pub fn domination_check(traj: &Trajectory) -> DominationReport {
    let cone = &traj.scenario.cone;
    let closure = &traj.scenario.closure;
    let mut report = DominationReport {
        min_margin: f64::INFINITY,
        worst_inequality: String::new(),
        worst_step: 0,
        worst_cell: 0,
    };
    for n in 0..=traj.steps.len() {
        let st = traj.state_at(n);
        for c in 0..traj.mesh().num_cells() {
            let margins = cell_domination_margins(
                st.rho[c], st.z[c], st.big_r[c], st.big_z[c], cone, closure,
            );
            for (name, m) in margins {
                if m < report.min_margin {
                    report.min_margin = m;
                    report.worst_inequality = name.to_string();
                    report.worst_step = n;
                    report.worst_cell = c;
                }
            }
        }
    }
    report
}

/// Max/min growth envelopes: initial and inflow data propagated through
/// the worst divergence seen by the committed face velocities.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEnvelopeReport {
    pub sup_divergence: f64,
    /// largest overshoot above the cap envelope, relative to the cap
    pub max_overshoot: f64,
    /// largest undershoot below the floor envelope, relative to the floor
    pub max_undershoot: f64,
}

pub fn growth_envelope_check(traj: &Trajectory) -> GrowthEnvelopeReport {
    let mesh = traj.mesh();
    let total_time = traj.params().dt * traj.steps.len() as f64;
    let mut sup_div = 0.0_f64;
    for step in &traj.steps {
        sup_div = sup_div.max(step.face_u.max_abs_divergence(mesh));
    }
    let mut over = 0.0_f64;
    let mut under = 0.0_f64;
    for &sp in &Species::ALL {
        let init = traj.initial.species(sp);
        let bdry = traj.boundary.species(sp);
        let mut cap = init.iter().cloned().fold(f64::MIN, f64::max);
        let mut floor = init.iter().cloned().fold(f64::MAX, f64::min);
        for &f in &traj.partition.inflow {
            cap = cap.max(bdry[f]);
            floor = floor.min(bdry[f]);
        }
        let (cap_env, floor_env) =
            crate::transport::density_growth_bound(cap, floor, total_time, sup_div);
        for step in &traj.steps {
            for &v in step.state.species(sp) {
                over = over.max((v - cap_env) / cap_env.max(1e-30));
                under = under.max((floor_env - v) / floor_env.max(1e-30));
            }
        }
    }
    GrowthEnvelopeReport { sup_divergence: sup_div, max_overshoot: over, max_undershoot: under }
}

/// L¹ defect of the recorded ratio field against one implicit upwind
/// transport step from the previous snapshot, per step and time-summed.
#[derive(Debug, Clone, Serialize)]
pub struct RatioTransportReport {
    pub per_step: Vec<f64>,
    pub time_integrated: f64,
    pub max_step: f64,
}

pub fn ratio_transport_residual(traj: &Trajectory) -> Result<RatioTransportReport> {
    let mesh = traj.mesh();
    let vol = mesh.cell_volume();
    let floor = traj.scenario.ratio_floor();
    let s_b = ratio_field(&traj.boundary.big_z, &traj.boundary.big_r, floor);
    let mut prev = traj.initial.ratio.clone();
    let mut per_step = Vec::with_capacity(traj.steps.len());
    for step in &traj.steps {
        let ctx = traj.step_context(step);
        let predicted = transport_step(&ctx, &prev, &s_b, TimeScheme::Implicit)?;
        let defect: f64 = predicted
            .iter()
            .zip(&step.state.ratio)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * vol;
        per_step.push(defect);
        prev = step.state.ratio.clone();
    }
    let max_step = per_step.iter().cloned().fold(0.0, f64::max);
    Ok(RatioTransportReport { time_integrated: per_step.iter().sum(), per_step, max_step })
}

/// Weighted oscillation of the ratio around its R-weighted mean, checked
/// against the cone-width budget (ā − a̲)² ∫R at every snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct CompactnessReport {
    /// worst snapshot value of [∫R(s − s̄)² + Γ-out term] / [(ā − a̲)² ∫R]
    pub max_ratio_to_budget: f64,
}

pub fn ratio_compactness(traj: &Trajectory) -> CompactnessReport {
    let mesh = traj.mesh();
    let vol = mesh.cell_volume();
    let cone = &traj.scenario.cone;
    let budget_factor = cone.width() * cone.width();
    let mut worst = 0.0_f64;
    for n in 1..=traj.steps.len() {
        let st = traj.state_at(n);
        let mass_r: f64 = st.big_r.iter().sum::<f64>() * vol;
        if mass_r <= 0.0 {
            continue;
        }
        let mean: f64 = st.big_r.iter().zip(&st.ratio).map(|(r, s)| r * s).sum::<f64>() * vol
            / mass_r;
        let mut osc: f64 = st
            .big_r
            .iter()
            .zip(&st.ratio)
            .map(|(r, s)| r * (s - mean) * (s - mean))
            .sum::<f64>()
            * vol;
        for &f in &traj.partition.outflow {
            let bf = &mesh.boundary_faces()[f];
            let s = st.ratio[bf.cell];
            osc += traj.params().dt
                * bf.measure
                * traj.u_n[f]
                * st.big_r[bf.cell]
                * (s - mean)
                * (s - mean);
        }
        worst = worst.max(osc / (budget_factor * mass_r));
    }
    CompactnessReport { max_ratio_to_budget: worst }
}

/// Distance between explicit and implicit upwind transport of the ratio
/// along the recorded velocity, measured on cells where ϱ exceeds the
/// vacuum threshold.
pub fn almost_uniqueness_gap(traj: &Trajectory, vacuum_threshold: f64) -> Result<f64> {
    let floor = traj.scenario.ratio_floor();
    let s_b = ratio_field(&traj.boundary.big_z, &traj.boundary.big_r, floor);
    let mut s_imp = traj.initial.ratio.clone();
    let mut s_exp = traj.initial.ratio.clone();
    for step in &traj.steps {
        let ctx = traj.step_context(step);
        s_imp = transport_step(&ctx, &s_imp, &s_b, TimeScheme::Implicit)?;
        s_exp = transport_step(&ctx, &s_exp, &s_b, TimeScheme::Explicit)?;
    }
    let fs = traj.final_state();
    let mut gap = 0.0_f64;
    for c in 0..traj.mesh().num_cells() {
        if fs.rho[c] > vacuum_threshold {
            gap = gap.max((s_imp[c] - s_exp[c]).abs());
        }
    }
    Ok(gap)
}

/// Divergence recovery on an interval: the face field with zero boundary
/// values whose discrete divergence reproduces a mean-free cell field.
#[derive(Debug, Clone, Serialize)]
pub struct BogovskiiReport {
    /// max |div B - (p - mean p)| over the ensemble; exact up to rounding
    pub max_divergence_error: f64,
    /// largest observed ‖B‖_{W^{1,q}} / ‖p − mean‖_q over the ensemble
    pub operator_norm_estimate: f64,
    pub samples: usize,
}

/// Face values (length N+1) of the recovery field for one cell field.
pub fn bogovskii_field_1d(mesh: &Mesh, p: &[f64]) -> Result<Vec<f64>> {
    if mesh.dim() != 1 {
        return Err(Error::InvalidArg("divergence recovery is built on interval meshes".into()));
    }
    let n = mesh.num_cells();
    let h = mesh.spacing()[0];
    let total: f64 = p.iter().sum::<f64>() * h;
    let mut b = vec![0.0; n + 1];
    let mut partial = 0.0;
    for k in 1..=n {
        partial += p[k - 1] * h;
        b[k] = partial - total * k as f64 / n as f64;
    }
    b[n] = 0.0;
    Ok(b)
}

pub fn bogovskii_ensemble_1d(
    mesh: &Mesh,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<BogovskiiReport> {
    let n = mesh.num_cells();
    let h = mesh.spacing()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_div_err = 0.0_f64;
    let mut max_norm_ratio = 0.0_f64;
    for _ in 0..samples {
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = p.iter().sum::<f64>() / n as f64;
        let b = bogovskii_field_1d(mesh, &p)?;
        let mut lq_p = 0.0_f64;
        let mut w1q_b = 0.0_f64;
        for k in 0..n {
            let div = (b[k + 1] - b[k]) / h;
            max_div_err = max_div_err.max((div - (p[k] - mean)).abs());
            lq_p += (p[k] - mean).abs().powf(q) * h;
            let mid = 0.5 * (b[k] + b[k + 1]);
            w1q_b += (mid.abs().powf(q) + div.abs().powf(q)) * h;
        }
        if lq_p > 0.0 {
            max_norm_ratio =
                max_norm_ratio.max(w1q_b.powf(1.0 / q) / lq_p.powf(1.0 / q));
        }
    }
    Ok(BogovskiiReport {
        max_divergence_error: max_div_err,
        operator_norm_estimate: max_norm_ratio,
        samples,
    })
}

/// Time-averaged pressure mass in shrinking boundary strips, with a
/// log-log least-squares exponent: positive means the strip integrals
/// vanish at a definite rate as the strip narrows.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPressureReport {
    pub widths: Vec<f64>,
    pub strip_integrals: Vec<f64>,
    pub gamma_fit: f64,
}

pub fn near_boundary_pressure(traj: &Trajectory, strip_cells: &[usize]) -> Result<BoundaryPressureReport> {
    if strip_cells.len() < 2 {
        return Err(Error::InvalidArg("need at least two strip widths".into()));
    }
    let mesh = traj.mesh();
    let p = traj.params();
    let vol = mesh.cell_volume();
    let h_min = mesh.spacing()[..mesh.dim()].iter().cloned().fold(f64::MAX, f64::min);
    let mut widths = Vec::new();
    let mut integrals = Vec::new();
    for &k in strip_cells {
        let width = k as f64 * h_min;
        let mut acc = 0.0_f64;
        for step in &traj.steps {
            for c in 0..mesh.num_cells() {
                if mesh.distance_to_boundary(c) < width {
                    acc += vol
                        * traj.scenario.law.pressure_delta(
                            step.state.big_r[c],
                            step.state.big_z[c],
                            p.delta,
                            p.c_exp,
                        );
                }
            }
        }
        widths.push(width);
        integrals.push(acc / traj.steps.len() as f64);
    }
    // least squares on log I = const + gamma log w
    let logs: Vec<(f64, f64)> = widths
        .iter()
        .zip(&integrals)
        .filter(|(_, &i)| i > 0.0)
        .map(|(&w, &i)| (w.ln(), i.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::InvalidArg("strip integrals degenerate; cannot fit exponent".into()));
    }
    let n = logs.len() as f64;
    let (sx, sy): (f64, f64) = logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (sxx, sxy): (f64, f64) =
        logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x * x, b + x * y));
    let gamma_fit = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    Ok(BoundaryPressureReport { widths, strip_integrals: integrals, gamma_fit })
}

/// Residuals of the discrete equations tested against a battery of
/// space-time functions sampled at cell centers.
#[derive(Debug, Clone, Serialize)]
pub struct WeakFormReport {
    /// largest φ-weighted, time-summed continuity residual over the
    /// battery and the four species, relative to the initial mass
    pub max_continuity_residual: f64,
    /// largest linear-system residual of the momentum solves
    pub max_momentum_residual: f64,
}

fn test_battery(lengths: [f64; 2], total_time: f64) -> Vec<Box<dyn Fn([f64; 2], f64) -> f64>> {
    let lx = lengths[0];
    let t_end = total_time.max(1e-30);
    let mut battery: Vec<Box<dyn Fn([f64; 2], f64) -> f64>> = Vec::new();
    for spatial in 0..5usize {
        for temporal in 0..3usize {
            battery.push(Box::new(move |x: [f64; 2], t: f64| {
                let s = match spatial {
                    0 => 1.0,
                    1 => x[0],
                    2 => x[0] * x[0],
                    3 => (std::f64::consts::PI * x[0] / lx).sin(),
                    _ => (std::f64::consts::PI * x[0] / lx).cos(),
                };
                let w = match temporal {
                    0 => 1.0,
                    1 => t / t_end,
                    _ => (std::f64::consts::PI * t / t_end).sin(),
                };
                s * w
            }));
        }
    }
    battery
}

pub fn weak_form_report(traj: &Trajectory) -> Result<WeakFormReport> {
    let mesh = traj.mesh();
    let p = traj.params();
    let total_time = p.dt * traj.steps.len() as f64;
    let battery = test_battery(mesh.lengths(), total_time);
    let mut acc = vec![0.0_f64; battery.len()];
    let mut max_momentum = 0.0_f64;
    let mut scale = 1e-30_f64;
    if !p.frozen_densities {
        for (n, step) in traj.steps.iter().enumerate() {
            let ctx = traj.step_context(step);
            let op = ContinuityOp::assemble(&ctx)?;
            let old = traj.state_at(n);
            for &sp in &Species::ALL {
                let rhs = op.rhs(&ctx, old.species(sp), traj.boundary.species(sp), None);
                let res = op.residual_vector(step.state.species(sp), &rhs);
                for (k, phi) in battery.iter().enumerate() {
                    let weighted: f64 = res
                        .iter()
                        .enumerate()
                        .map(|(c, r)| r * phi(mesh.cell_center(c), step.time))
                        .sum();
                    acc[k] += weighted.abs() * p.dt;
                }
            }
        }
        scale = traj
            .initial
            .big_r
            .iter()
            .sum::<f64>()
            .abs()
            .max(1e-30)
            * mesh.cell_volume();
    }
    for step in &traj.steps {
        max_momentum = max_momentum.max(step.momentum.residual);
    }
    let max_continuity = acc.iter().cloned().fold(0.0, f64::max) / scale;
    Ok(WeakFormReport {
        max_continuity_residual: max_continuity,
        max_momentum_residual: max_momentum,
    })
}
