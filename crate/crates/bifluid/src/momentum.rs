//! Galerkin momentum balance on a zero-trace tensor sine basis. The basis
//! is orthonormalized with respect to the discrete (midpoint-quadrature)
//! inner product, so mass matrices with frozen unit density are exactly
//! the identity and kinetic-energy bookkeeping closes without quadrature
//! slack.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{FaceVelocity, Mesh};
use crate::profile::VectorProfile;
use crate::{Error, Result};

/// Zero-trace velocity basis: tensor sine modes per component,
/// orthonormalized over the cell centers.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    modes: Vec<(usize, usize, usize)>,
    /// Row i holds the expansion of the i-th orthonormal function in the
    /// raw sine modes.
    transform: DMatrix<f64>,
    lengths: [f64; 2],
    dim: usize,
    /// Orthonormal mode values at cell centers: `vals[m][c]`.
    vals: Vec<Vec<[f64; 2]>>,
    /// `grads[m][c][a][b]` = ∂_a (component b) of mode m at cell c.
    grads: Vec<Vec<[[f64; 2]; 2]>>,
}

fn raw_value(mode: (usize, usize, usize), lengths: [f64; 2], dim: usize, x: [f64; 2]) -> [f64; 2] {
    let (kx, ky, comp) = mode;
    let sx = (std::f64::consts::PI * kx as f64 * x[0] / lengths[0]).sin();
    let sy = if dim == 2 { (std::f64::consts::PI * ky as f64 * x[1] / lengths[1]).sin() } else { 1.0 };
    let mut v = [0.0, 0.0];
    v[comp] = sx * sy;
    v
}

fn raw_grad(mode: (usize, usize, usize), lengths: [f64; 2], dim: usize, x: [f64; 2]) -> [[f64; 2]; 2] {
    let (kx, ky, comp) = mode;
    let wx = std::f64::consts::PI * kx as f64 / lengths[0];
    let (sx, cx) = ((wx * x[0]).sin(), (wx * x[0]).cos());
    let (sy, cy, wy) = if dim == 2 {
        let wy = std::f64::consts::PI * ky as f64 / lengths[1];
        ((wy * x[1]).sin(), (wy * x[1]).cos(), wy)
    } else {
        (1.0, 0.0, 0.0)
    };
    let mut g = [[0.0; 2]; 2];
    g[0][comp] = wx * cx * sy;
    if dim == 2 {
        g[1][comp] = wy * sx * cy;
    }
    g
}

impl GalerkinBasis {
    /// `modes_per_axis` sine frequencies per axis; in 2D every tensor mode
    /// appears once per velocity component.
    pub fn new(mesh: &Mesh, modes_per_axis: usize) -> Result<Self> {
        if modes_per_axis == 0 {
            return Err(Error::InvalidArg("need at least one basis mode".into()));
        }
        let dim = mesh.dim();
        let lengths = mesh.lengths();
        let mut modes = Vec::new();
        if dim == 1 {
            for k in 1..=modes_per_axis {
                modes.push((k, 0, 0));
            }
        } else {
            for kx in 1..=modes_per_axis {
                for ky in 1..=modes_per_axis {
                    for comp in 0..2 {
                        modes.push((kx, ky, comp));
                    }
                }
            }
        }
        let n = modes.len();
        let nc = mesh.num_cells();
        let vol = mesh.cell_volume();
        let raw_vals: Vec<Vec<[f64; 2]>> = modes
            .iter()
            .map(|&m| (0..nc).map(|c| raw_value(m, lengths, dim, mesh.cell_center(c))).collect())
            .collect();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for c in 0..nc {
                    s += raw_vals[i][c][0] * raw_vals[j][c][0]
                        + raw_vals[i][c][1] * raw_vals[j][c][1];
                }
                gram[(i, j)] = vol * s;
                gram[(j, i)] = vol * s;
            }
        }
        let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| {
            Error::Solve(
                "basis Gram matrix is not positive definite; too many modes for the mesh".into(),
            )
        })?;
        let transform = chol
            .l()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or_else(|| Error::Solve("singular Gram factor".into()))?;
        let raw_grads: Vec<Vec<[[f64; 2]; 2]>> = modes
            .iter()
            .map(|&m| (0..nc).map(|c| raw_grad(m, lengths, dim, mesh.cell_center(c))).collect())
            .collect();
        let mut vals = vec![vec![[0.0; 2]; nc]; n];
        let mut grads = vec![vec![[[0.0; 2]; 2]; nc]; n];
        for i in 0..n {
            for j in 0..n {
                let w = transform[(i, j)];
                if w == 0.0 {
                    continue;
                }
                for c in 0..nc {
                    for b in 0..2 {
                        vals[i][c][b] += w * raw_vals[j][c][b];
                        for a in 0..2 {
                            grads[i][c][a][b] += w * raw_grads[j][c][a][b];
                        }
                    }
                }
            }
        }
        Ok(GalerkinBasis { modes, transform, lengths, dim, vals, grads })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn cell_values(&self, mode: usize) -> &[[f64; 2]] {
        &self.vals[mode]
    }

    pub fn cell_grads(&self, mode: usize) -> &[[[f64; 2]; 2]] {
        &self.grads[mode]
    }

    /// Orthonormal mode value at an arbitrary point.
    pub fn eval(&self, mode: usize, x: [f64; 2]) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (j, &m) in self.modes.iter().enumerate() {
            let w = self.transform[(mode, j)];
            if w == 0.0 {
                continue;
            }
            let raw = raw_value(m, self.lengths, self.dim, x);
            v[0] += w * raw[0];
            v[1] += w * raw[1];
        }
        v
    }

    /// Velocity field of a coefficient vector at the cell centers.
    pub fn velocity_at_cells(&self, coeffs: &DVector<f64>) -> Vec<[f64; 2]> {
        let nc = self.vals.first().map_or(0, Vec::len);
        let mut u = vec![[0.0; 2]; nc];
        for m in 0..self.len() {
            let c = coeffs[m];
            if c == 0.0 {
                continue;
            }
            for (uc, vc) in u.iter_mut().zip(&self.vals[m]) {
                uc[0] += c * vc[0];
                uc[1] += c * vc[1];
            }
        }
        u
    }

    /// Velocity gradient of a coefficient vector at the cell centers.
    pub fn grad_at_cells(&self, coeffs: &DVector<f64>) -> Vec<[[f64; 2]; 2]> {
        let nc = self.grads.first().map_or(0, Vec::len);
        let mut g = vec![[[0.0; 2]; 2]; nc];
        for m in 0..self.len() {
            let c = coeffs[m];
            if c == 0.0 {
                continue;
            }
            for (gc, mc) in g.iter_mut().zip(&self.grads[m]) {
                for a in 0..2 {
                    for b in 0..2 {
                        gc[a][b] += c * mc[a][b];
                    }
                }
            }
        }
        g
    }

    /// L²-projection of a velocity field given at the cell centers.
    pub fn project(&self, mesh: &Mesh, field: &[[f64; 2]]) -> DVector<f64> {
        let vol = mesh.cell_volume();
        DVector::from_iterator(
            self.len(),
            (0..self.len()).map(|m| {
                vol * self.vals[m]
                    .iter()
                    .zip(field)
                    .map(|(v, f)| v[0] * f[0] + v[1] * f[1])
                    .sum::<f64>()
            }),
        )
    }

    /// Full velocity (zero-trace part plus lift) on every mesh face. On the
    /// boundary faces only the lift contributes, exactly.
    pub fn face_velocities(
        &self,
        mesh: &Mesh,
        coeffs: &DVector<f64>,
        lift: &VectorProfile,
    ) -> FaceVelocity {
        let [nx, ny] = mesh.cells();
        let h = mesh.spacing();
        let mut fv = FaceVelocity::zero(mesh);
        let eval_full = |x: [f64; 2], comp: usize, interior: bool| -> f64 {
            let mut v = lift.eval(x)[comp];
            if interior {
                for m in 0..self.len() {
                    if coeffs[m] != 0.0 {
                        v += coeffs[m] * self.eval(m, x)[comp];
                    }
                }
            }
            v
        };
        for j in 0..ny.max(1) {
            let y = if mesh.dim() == 2 { (j as f64 + 0.5) * h[1] } else { 0.0 };
            for i in 0..=nx {
                let x = [i as f64 * h[0], y];
                let idx = FaceVelocity::face_index(mesh, 0, i, j);
                fv.axis[0][idx] = eval_full(x, 0, i != 0 && i != nx);
            }
        }
        if mesh.dim() == 2 {
            for j in 0..=ny {
                let y = j as f64 * h[1];
                for i in 0..nx {
                    let x = [(i as f64 + 0.5) * h[0], y];
                    let idx = FaceVelocity::face_index(mesh, 1, i, j);
                    fv.axis[1][idx] = eval_full(x, 1, j != 0 && j != ny);
                }
            }
        }
        fv
    }
}

/// Newtonian viscous stress S(∇u) = μ(∇u + ∇uᵀ) + λ (div u) I, with the
/// `grad[a][b] = ∂_a u_b` convention.
pub fn viscous_stress(grad_u: [[f64; 2]; 2], mu: f64, lambda: f64, dim: usize) -> [[f64; 2]; 2] {
    let mut div = 0.0;
    for a in 0..dim {
        div += grad_u[a][a];
    }
    let mut s = [[0.0; 2]; 2];
    for a in 0..dim {
        for b in 0..dim {
            s[a][b] = mu * (grad_u[a][b] + grad_u[b][a]);
        }
        s[a][a] += lambda * div;
    }
    s
}

/// Density-weighted Galerkin mass matrix M[m]_ij = ∫ m ψ_i·ψ_j.
pub fn assemble_mass(basis: &GalerkinBasis, mesh: &Mesh, density: &[f64]) -> DMatrix<f64> {
    let n = basis.len();
    let vol = mesh.cell_volume();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let vi = basis.cell_values(i);
        for j in 0..=i {
            let vj = basis.cell_values(j);
            let mut s = 0.0;
            for c in 0..mesh.num_cells() {
                s += density[c] * (vi[c][0] * vj[c][0] + vi[c][1] * vj[c][1]);
            }
            out[(i, j)] = vol * s;
            out[(j, i)] = vol * s;
        }
    }
    out
}

/// Viscous stiffness K_ij = ∫ S(∇ψ_i) : ∇ψ_j.
pub fn assemble_stiffness(basis: &GalerkinBasis, mesh: &Mesh, mu: f64, lambda: f64) -> DMatrix<f64> {
    let n = basis.len();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let gi = basis.cell_grads(i);
        for j in 0..=i {
            let gj = basis.cell_grads(j);
            let mut s = 0.0;
            for c in 0..mesh.num_cells() {
                let mut divi = 0.0;
                let mut divj = 0.0;
                for a in 0..dim {
                    divi += gi[c][a][a];
                    divj += gj[c][a][a];
                    for b in 0..dim {
                        s += mu * (gi[c][a][b] + gi[c][b][a]) * gj[c][a][b];
                    }
                }
                s += lambda * divi * divj;
            }
            out[(i, j)] = vol * s;
            out[(j, i)] = vol * s;
        }
    }
    out
}

/// Parameters of one semi-implicit momentum step.
#[derive(Debug, Clone, Copy)]
pub struct MomentumParams {
    pub mu: f64,
    pub lambda: f64,
    pub eps: f64,
    pub dt: f64,
    pub convection: bool,
}

/// Outcome of one momentum step, with the work of every right-hand-side
/// term against the new coefficients. These close the exact per-step
/// kinetic identity
/// ΔKE + jump_dissipation + mass_shift + viscous =
///   work_pressure + work_lift + work_convection + work_eps,
/// up to the reported solver residual.
#[derive(Debug, Clone)]
pub struct MomentumStepResult {
    pub coeffs: DVector<f64>,
    /// max-norm residual of the solved linear system
    pub residual: f64,
    /// ½c'ᵀM[m']c' − ½cᵀM[m]c
    pub delta_ke: f64,
    /// ½ Δcᵀ M[m] Δc
    pub jump_dissipation: f64,
    /// ½ c'ᵀ (M[m'] − M[m]) c'
    pub mass_shift: f64,
    /// Δt c'ᵀ K c'
    pub viscous: f64,
    /// Δt ∫ P_δ div v'
    pub work_pressure: f64,
    pub work_lift: f64,
    pub work_convection: f64,
    pub work_eps: f64,
}

impl MomentumStepResult {
    pub fn kinetic_residual(&self) -> f64 {
        self.delta_ke + self.jump_dissipation + self.mass_shift + self.viscous
            - self.work_pressure
            - self.work_lift
            - self.work_convection
            - self.work_eps
    }
}

/// One semi-implicit Galerkin step: the new coefficients solve
/// (M[m']/Δt + K) c' = M[m]c/Δt + explicit convection + pressure work −
/// lift terms − ε ∇m'·∇uⁿ, all inner products by midpoint quadrature.
#[allow(clippy::too_many_arguments)]
pub fn momentum_step(
    basis: &GalerkinBasis,
    mesh: &Mesh,
    params: &MomentumParams,
    m_old: &[f64],
    m_new: &[f64],
    c_old: &DVector<f64>,
    lift: &VectorProfile,
    pressure_new: Option<&[f64]>,
) -> Result<MomentumStepResult> {
    let n = basis.len();
    let nc = mesh.num_cells();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let dt = params.dt;

    let mass_new = assemble_mass(basis, mesh, m_new);
    let mass_old = assemble_mass(basis, mesh, m_old);
    let stiff = assemble_stiffness(basis, mesh, params.mu, params.lambda);
    let system = &mass_new / dt + &stiff;

    // Old full velocity and its gradient at cell centers.
    let mut u_old = basis.velocity_at_cells(c_old);
    let mut grad_u_old = basis.grad_at_cells(c_old);
    for c in 0..nc {
        let x = mesh.cell_center(c);
        let w = lift.eval(x);
        let gw = lift.grad(x);
        u_old[c][0] += w[0];
        u_old[c][1] += w[1];
        for a in 0..2 {
            for b in 0..2 {
                grad_u_old[c][a][b] += gw[a][b];
            }
        }
    }

    // Discrete gradient of the new momentum density (central differences,
    // one-sided at the boundary) for the ε-regularization term.
    let grad_m: Vec<[f64; 2]> = if params.eps > 0.0 {
        let h = mesh.spacing();
        (0..nc)
            .map(|c| {
                let mut g = [0.0; 2];
                for (axis, ga) in g.iter_mut().enumerate().take(dim) {
                    let lo = mesh.neighbor(c, axis, crate::geometry::Side::Lo);
                    let hi = mesh.neighbor(c, axis, crate::geometry::Side::Hi);
                    *ga = match (lo, hi) {
                        (Some(l), Some(r)) => (m_new[r] - m_new[l]) / (2.0 * h[axis]),
                        (None, Some(r)) => (m_new[r] - m_new[c]) / h[axis],
                        (Some(l), None) => (m_new[c] - m_new[l]) / h[axis],
                        (None, None) => 0.0,
                    };
                }
                g
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut b_lift = DVector::zeros(n);
    let mut b_conv = DVector::zeros(n);
    let mut b_press = DVector::zeros(n);
    let mut b_eps = DVector::zeros(n);
    for i in 0..n {
        let vi = basis.cell_values(i);
        let gi = basis.cell_grads(i);
        let (mut lift_acc, mut conv_acc, mut press_acc, mut eps_acc) = (0.0, 0.0, 0.0, 0.0);
        for c in 0..nc {
            let x = mesh.cell_center(c);
            let w = lift.eval(x);
            // time derivative of the lift part: −(m' − m) w / Δt
            lift_acc -= (m_new[c] - m_old[c]) / dt * (w[0] * vi[c][0] + w[1] * vi[c][1]);
            // viscous stress of the lift
            let sw = viscous_stress(lift.grad(x), params.mu, params.lambda, dim);
            for a in 0..dim {
                for b in 0..dim {
                    lift_acc -= sw[a][b] * gi[c][a][b];
                }
            }
            if params.convection {
                for a in 0..dim {
                    for b in 0..dim {
                        conv_acc += m_old[c] * u_old[c][a] * u_old[c][b] * gi[c][a][b];
                    }
                }
            }
            if let Some(p) = pressure_new {
                let mut div_i = 0.0;
                for a in 0..dim {
                    div_i += gi[c][a][a];
                }
                press_acc += p[c] * div_i;
            }
            if params.eps > 0.0 {
                for b in 0..dim {
                    let mut conv = 0.0;
                    for a in 0..dim {
                        conv += grad_m[c][a] * grad_u_old[c][a][b];
                    }
                    eps_acc -= params.eps * conv * vi[c][b];
                }
            }
        }
        b_lift[i] = vol * lift_acc;
        b_conv[i] = vol * conv_acc;
        b_press[i] = vol * press_acc;
        b_eps[i] = vol * eps_acc;
    }
    let rhs = &mass_old * c_old / dt + &b_lift + &b_conv + &b_press + &b_eps;

    let lu = system.clone().lu();
    let c_new = lu.solve(&rhs).ok_or_else(|| {
        let norm = system.norm();
        Error::Solve(format!("singular Galerkin system (norm {norm:.3e})"))
    })?;
    let residual = (&system * &c_new - &rhs).amax();

    let dc = &c_new - c_old;
    let result = MomentumStepResult {
        delta_ke: 0.5 * ((&mass_new * &c_new).dot(&c_new) - (&mass_old * c_old).dot(c_old)),
        jump_dissipation: 0.5 * (&mass_old * &dc).dot(&dc),
        mass_shift: 0.5 * ((&mass_new - &mass_old) * &c_new).dot(&c_new),
        viscous: dt * (&stiff * &c_new).dot(&c_new),
        work_pressure: dt * b_press.dot(&c_new),
        work_lift: dt * b_lift.dot(&c_new),
        work_convection: dt * b_conv.dot(&c_new),
        work_eps: dt * b_eps.dot(&c_new),
        coeffs: c_new,
        residual,
    };
    Ok(result)
}

/// Kinetic energy ½∫ m|u|² of a cell-centered velocity field.
pub fn kinetic_energy_field(mesh: &Mesh, density: &[f64], u: &[[f64; 2]]) -> f64 {
    0.5 * mesh.cell_volume()
        * density
            .iter()
            .zip(u)
            .map(|(&m, v)| m * (v[0] * v[0] + v[1] * v[1]))
            .sum::<f64>()
}
