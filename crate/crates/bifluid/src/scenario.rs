//! Scenario configuration: a TOML description of mesh, pressure law,
//! closure, admissible cone, scheme parameters, boundary and initial data.
//! Loading validates every structural hypothesis the certificates rest on
//! and reports all violations together.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::Mesh;
use crate::profile::{Profile, VectorProfile};
use crate::thermo::{Closure, Cone, PressureLaw};
use crate::{Error, Result};

/// Scheme parameters shared by every run of a scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeParams {
    /// Artificial diffusion of the density scheme.
    pub eps: f64,
    /// Artificial pressure weight.
    #[serde(default)]
    pub delta: f64,
    /// Artificial pressure exponent.
    #[serde(default = "default_c_exp")]
    pub c_exp: f64,
    pub dt: f64,
    pub total_time: f64,
    pub mu: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_modes")]
    pub modes_per_axis: usize,
    #[serde(default = "default_theta_fp")]
    pub theta_fp: f64,
    #[serde(default = "default_tol_fp")]
    pub tol_fp: f64,
    #[serde(default = "default_max_fp")]
    pub max_fp_iter: usize,
    /// Explicit convection term in the momentum balance.
    #[serde(default = "default_true")]
    pub convection: bool,
    /// Freeze the four densities (pure viscous-decay studies).
    #[serde(default)]
    pub frozen_densities: bool,
    /// Lower growth exponent of ∂_Z P on the cone.
    #[serde(default = "default_gamma_lower")]
    pub gamma_lower: f64,
    /// Upper growth exponent of ∂_Z P on the cone.
    #[serde(default = "default_gamma_upper")]
    pub gamma_upper: f64,
    /// Floor for ratio denominators; defaults to the lower cone slope.
    #[serde(default)]
    pub ratio_floor: Option<f64>,
    /// Accept artificial-pressure exponents below the admissible bound.
    #[serde(default)]
    pub allow_c_override: bool,
}

fn default_c_exp() -> f64 {
    5.0
}
fn default_modes() -> usize {
    4
}
fn default_theta_fp() -> f64 {
    0.7
}
fn default_tol_fp() -> f64 {
    1e-10
}
fn default_max_fp() -> usize {
    80
}
fn default_true() -> bool {
    true
}
fn default_gamma_lower() -> f64 {
    1.0
}
fn default_gamma_upper() -> f64 {
    2.0
}

impl SchemeParams {
    pub fn num_steps(&self) -> usize {
        (self.total_time / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshSpec {
    dim: usize,
    cells: Vec<usize>,
    lengths: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LawSpec {
    a_plus: f64,
    a_minus: f64,
    gamma_plus: f64,
    gamma_minus: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureSpec {
    alpha_lower: f64,
    alpha_upper: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeSpec {
    a_lower: f64,
    a_upper: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySpec {
    velocity: VectorProfile,
    big_r: Profile,
    ratio: Profile,
    alpha: Profile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSpec {
    big_r: Profile,
    ratio: Profile,
    alpha: Profile,
    /// Zero-trace part of the initial velocity; the boundary lift is
    /// added on top. Defaults to zero.
    velocity: Option<VectorProfile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    mesh: MeshSpec,
    law: LawSpec,
    closure: ClosureSpec,
    cone: ConeSpec,
    params: SchemeParams,
    boundary: BoundarySpec,
    initial: InitialSpec,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub mesh: Mesh,
    pub law: PressureLaw,
    pub closure: Closure,
    pub cone: Cone,
    pub params: SchemeParams,
    /// Boundary velocity; its global analytic extension is the lift.
    pub boundary_velocity: VectorProfile,
    pub boundary_big_r: Profile,
    pub boundary_ratio: Profile,
    pub boundary_alpha: Profile,
    pub init_big_r: Profile,
    pub init_ratio: Profile,
    pub init_alpha: Profile,
    pub init_velocity: VectorProfile,
}

/// Cell-centered fields of the four species plus the concentration.
#[derive(Debug, Clone)]
pub struct SpeciesFields {
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_z: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl SpeciesFields {
    pub fn species(&self, sp: crate::geometry::Species) -> &[f64] {
        match sp {
            crate::geometry::Species::Rho => &self.rho,
            crate::geometry::Species::Z => &self.z,
            crate::geometry::Species::BigR => &self.big_r,
            crate::geometry::Species::BigZ => &self.big_z,
        }
    }
}

/// Command-line overrides applied after loading.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub cells: Option<usize>,
    pub dt: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub total_time: Option<f64>,
    pub modes: Option<usize>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
    resolve(file)
}

/// Names of the scenarios bundled with the binary.
pub const BUNDLED: [(&str, &str); 5] = [
    ("constant", include_str!("../scenarios/constant.toml")),
    ("inflow-fill", include_str!("../scenarios/inflow-fill.toml")),
    ("smooth", include_str!("../scenarios/smooth.toml")),
    ("viscous-decay", include_str!("../scenarios/viscous-decay.toml")),
    ("compressive", include_str!("../scenarios/compressive.toml")),
];

pub fn bundled_scenario(name: &str) -> Result<Scenario> {
    for (n, text) in BUNDLED {
        if n == name {
            return parse_scenario(text);
        }
    }
    Err(Error::InvalidArg(format!(
        "unknown bundled scenario '{name}' (available: {})",
        BUNDLED.map(|(n, _)| n).join(", ")
    )))
}

fn resolve(file: ScenarioFile) -> Result<Scenario> {
    let mut errs: Vec<String> = Vec::new();
    let m = &file.mesh;
    if m.dim != 1 && m.dim != 2 {
        errs.push(format!("mesh: dimension must be 1 or 2, got {}", m.dim));
    }
    if m.cells.len() < m.dim.min(2) || m.lengths.len() < m.dim.min(2) {
        errs.push("mesh: need one cell count and length per axis".into());
    }
    let law = &file.law;
    // Adiabatic exponents: the dominant one must reach 2 for the pressure
    // compactness machinery, the secondary one must exceed 1 so the
    // closure g stays strictly monotone, and it may not dominate.
    if law.gamma_plus < 2.0 {
        errs.push(format!(
            "law: gamma_plus = {} rejected; the dominant adiabatic exponent must be >= 2",
            law.gamma_plus
        ));
    }
    if law.gamma_minus <= 1.0 {
        errs.push(format!(
            "law: gamma_minus = {} rejected; need > 1 for a strictly monotone closure",
            law.gamma_minus
        ));
    }
    if law.gamma_minus > law.gamma_plus {
        errs.push("law: gamma_minus must not exceed gamma_plus".into());
    }
    if law.a_plus <= 0.0 || law.a_minus < 0.0 {
        errs.push("law: need a_plus > 0 and a_minus >= 0".into());
    }
    let p = &file.params;
    if p.mu <= 0.0 {
        errs.push(format!("params: shear viscosity mu = {} must be positive", p.mu));
    }
    if p.lambda + 2.0 * p.mu / 3.0 < 0.0 {
        errs.push("params: bulk viscosity lambda + 2mu/3 must be nonnegative".into());
    }
    if p.eps < 0.0 {
        errs.push("params: eps must be nonnegative".into());
    }
    if p.delta < 0.0 {
        errs.push("params: delta must be nonnegative".into());
    }
    if p.dt <= 0.0 || p.total_time <= 0.0 {
        errs.push("params: dt and total_time must be positive".into());
    }
    if !(p.theta_fp > 0.0 && p.theta_fp <= 1.0) {
        errs.push("params: theta_fp must lie in (0, 1]".into());
    }
    let c_floor = (9.0 / 2.0_f64).max(law.gamma_plus).max(law.gamma_minus);
    if p.delta > 0.0 && p.c_exp <= c_floor && !p.allow_c_override {
        errs.push(format!(
            "params: artificial-pressure exponent c_exp = {} must exceed max(9/2, gamma_plus, gamma_minus) = {}",
            p.c_exp, c_floor
        ));
    }
    if !(p.gamma_lower > 0.0 && p.gamma_lower <= 1.0) {
        errs.push("params: gamma_lower must lie in (0, 1]".into());
    }
    let gamma_bog = (2.0 / 3.0 * law.gamma_plus - 1.0).min(0.5 * law.gamma_plus);
    if !(p.gamma_upper >= 1.0 && p.gamma_upper < law.gamma_plus + gamma_bog) {
        errs.push(format!(
            "params: gamma_upper = {} must lie in [1, gamma_plus + gamma_bog) = [1, {})",
            p.gamma_upper,
            law.gamma_plus + gamma_bog
        ));
    }
    let cl = &file.closure;
    if !(cl.alpha_lower > 0.0 && cl.alpha_lower <= cl.alpha_upper && cl.alpha_upper < 1.0) {
        errs.push(format!(
            "closure: need 0 < alpha_lower <= alpha_upper < 1, got [{}, {}]",
            cl.alpha_lower, cl.alpha_upper
        ));
    }
    let cn = &file.cone;
    if !(cn.a_lower >= 0.0 && cn.a_lower < cn.a_upper) {
        errs.push(format!(
            "cone: need 0 <= a_lower < a_upper, got [{}, {}]",
            cn.a_lower, cn.a_upper
        ));
    }

    // Mesh is needed to sample the data profiles; bail out on structural
    // errors first.
    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }
    let mesh = if m.dim == 1 {
        Mesh::line(m.cells[0], m.lengths[0])?
    } else {
        Mesh::rectangle([m.cells[0], m.cells[1]], [m.lengths[0], m.lengths[1]])?
    };

    let sample_points: Vec<[f64; 2]> = (0..mesh.num_cells())
        .map(|c| mesh.cell_center(c))
        .chain(mesh.boundary_faces().iter().map(|f| f.center))
        .collect();
    let check_range = |name: &str, prof: &Profile, lo: f64, hi: f64, errs: &mut Vec<String>| {
        for &x in &sample_points {
            let v = prof.eval(x);
            if !(lo..=hi).contains(&v) {
                errs.push(format!(
                    "{name}: value {v} at ({}, {}) outside [{lo}, {hi}]",
                    x[0], x[1]
                ));
                break;
            }
        }
    };
    check_range("boundary.ratio", &file.boundary.ratio, cn.a_lower, cn.a_upper, &mut errs);
    check_range("initial.ratio", &file.initial.ratio, cn.a_lower, cn.a_upper, &mut errs);
    check_range("boundary.alpha", &file.boundary.alpha, cl.alpha_lower, cl.alpha_upper, &mut errs);
    check_range("initial.alpha", &file.initial.alpha, cl.alpha_lower, cl.alpha_upper, &mut errs);
    check_range("boundary.big_r", &file.boundary.big_r, 1e-12, f64::INFINITY, &mut errs);
    check_range("initial.big_r", &file.initial.big_r, 1e-12, f64::INFINITY, &mut errs);

    if !errs.is_empty() {
        return Err(Error::Validation(errs));
    }

    Ok(Scenario {
        name: file.name,
        description: file.description,
        mesh,
        law: PressureLaw::isentropic(law.a_plus, law.a_minus, law.gamma_plus, law.gamma_minus),
        closure: Closure {
            gamma_plus: law.gamma_plus,
            gamma_minus: law.gamma_minus,
            alpha_lower: cl.alpha_lower,
            alpha_upper: cl.alpha_upper,
        },
        cone: Cone { a_lower: cn.a_lower, a_upper: cn.a_upper },
        params: file.params,
        boundary_velocity: file.boundary.velocity,
        boundary_big_r: file.boundary.big_r,
        boundary_ratio: file.boundary.ratio,
        boundary_alpha: file.boundary.alpha,
        init_big_r: file.initial.big_r,
        init_ratio: file.initial.ratio,
        init_alpha: file.initial.alpha,
        init_velocity: file.initial.velocity.unwrap_or_else(VectorProfile::zero),
    })
}

impl Scenario {
    pub fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(cells) = o.cells {
            let lengths = self.mesh.lengths();
            self.mesh = if self.mesh.dim() == 1 {
                Mesh::line(cells, lengths[0])?
            } else {
                Mesh::rectangle([cells, cells], lengths)?
            };
        }
        if let Some(dt) = o.dt {
            self.params.dt = dt;
        }
        if let Some(eps) = o.eps {
            self.params.eps = eps;
        }
        if let Some(delta) = o.delta {
            self.params.delta = delta;
        }
        if let Some(t) = o.total_time {
            self.params.total_time = t;
        }
        if let Some(m) = o.modes {
            self.params.modes_per_axis = m;
        }
        Ok(())
    }

    pub fn ratio_floor(&self) -> f64 {
        self.params.ratio_floor.unwrap_or(self.cone.a_lower.max(1e-8))
    }

    fn fields_at(&self, points: impl Iterator<Item = [f64; 2]>, boundary: bool) -> SpeciesFields {
        let (r_prof, s_prof, a_prof) = if boundary {
            (&self.boundary_big_r, &self.boundary_ratio, &self.boundary_alpha)
        } else {
            (&self.init_big_r, &self.init_ratio, &self.init_alpha)
        };
        let mut out = SpeciesFields {
            rho: Vec::new(),
            z: Vec::new(),
            big_r: Vec::new(),
            big_z: Vec::new(),
            alpha: Vec::new(),
        };
        for x in points {
            let big_r = r_prof.eval(x);
            let s = s_prof.eval(x);
            let alpha = a_prof.eval(x);
            let big_z = s * big_r;
            out.rho.push(self.closure.big_f(alpha) * big_r);
            out.z.push(self.closure.big_g(alpha) * big_z);
            out.big_r.push(big_r);
            out.big_z.push(big_z);
            out.alpha.push(alpha);
        }
        out
    }

    /// Initial species fields at the cell centers, consistent with the
    /// closure: ϱ = F(α)R and z = G(α)Z.
    pub fn initial_fields(&self) -> SpeciesFields {
        let centers: Vec<[f64; 2]> =
            (0..self.mesh.num_cells()).map(|c| self.mesh.cell_center(c)).collect();
        self.fields_at(centers.into_iter(), false)
    }

    /// Boundary species values at the boundary-face centers.
    pub fn boundary_fields(&self) -> SpeciesFields {
        let centers: Vec<[f64; 2]> =
            self.mesh.boundary_faces().iter().map(|f| f.center).collect();
        self.fields_at(centers.into_iter(), true)
    }
}

/// Result of reconstructing the concentration from the density pairs.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaRoundtrip {
    pub alpha: Vec<f64>,
    pub alpha_tilde: Vec<f64>,
    pub clamped: usize,
    /// max |f(α)ϱ − R|
    pub max_f_residual: f64,
    /// max |g(α̃)z − Z|
    pub max_g_residual: f64,
    /// max |α − α̃|
    pub max_gap: f64,
}

/// Reconstruct α from (ϱ, R) through F⁻¹ and, independently, α̃ from
/// (z, Z) through G⁻¹, flooring the denominators by `floor` and counting
/// how often the argument had to be clamped into the admissible range.
pub fn reconstruct_alpha(
    closure: &Closure,
    fields: &SpeciesFields,
    floor: f64,
) -> AlphaRoundtrip {
    let n = fields.rho.len();
    let mut out = AlphaRoundtrip {
        alpha: Vec::with_capacity(n),
        alpha_tilde: Vec::with_capacity(n),
        clamped: 0,
        max_f_residual: 0.0,
        max_g_residual: 0.0,
        max_gap: 0.0,
    };
    for i in 0..n {
        let yf = fields.rho[i] / fields.big_r[i].max(floor);
        let (a, cf) = closure.inv_big_f_clamped(yf);
        let yg = fields.z[i] / fields.big_z[i].max(floor);
        let (at, cg) = closure.inv_big_g_clamped(yg);
        out.clamped += usize::from(cf) + usize::from(cg);
        out.max_f_residual = out
            .max_f_residual
            .max((closure.small_f(a) * fields.rho[i] - fields.big_r[i]).abs());
        out.max_g_residual = out
            .max_g_residual
            .max((closure.small_g(at) * fields.z[i] - fields.big_z[i]).abs());
        out.max_gap = out.max_gap.max((a - at).abs());
        out.alpha.push(a);
        out.alpha_tilde.push(at);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_scenarios_parse_and_validate() {
        for (name, _) in BUNDLED {
            let sc = bundled_scenario(name).unwrap();
            assert_eq!(sc.name, name);
            let init = sc.initial_fields();
            assert!(init.big_r.iter().all(|&v| v > 0.0));
            // closure consistency of the generated data
            let rt = reconstruct_alpha(&sc.closure, &init, sc.ratio_floor());
            assert_eq!(rt.clamped, 0, "{name}");
            assert!(rt.max_f_residual < 1e-12, "{name}: {:e}", rt.max_f_residual);
            assert!(rt.max_g_residual < 1e-12, "{name}: {:e}", rt.max_g_residual);
            assert!(rt.max_gap < 1e-12);
        }
        assert!(bundled_scenario("no-such").is_err());
    }

    #[test]
    fn validation_collects_all_violations() {
        let text = bad_scenario_text();
        match parse_scenario(&text) {
            Err(Error::Validation(errs)) => {
                let joined = errs.join("\n");
                assert!(joined.contains("gamma_plus"), "{joined}");
                assert!(joined.contains("mu"), "{joined}");
                assert!(errs.len() >= 2, "{joined}");
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    fn bad_scenario_text() -> String {
        let (_, good) = BUNDLED[0];
        good.replace("gamma_plus = 2.0", "gamma_plus = 1.4")
            .replace("mu = ", "mu = -")
    }

    #[test]
    fn ratio_outside_cone_is_rejected() {
        let (_, good) = BUNDLED[0];
        let text = good.replace("[initial.ratio]\nkind = \"constant\"\nvalue = 0.5", "[initial.ratio]\nkind = \"constant\"\nvalue = 9.5");
        match parse_scenario(&text) {
            Err(Error::Validation(errs)) => {
                assert!(errs.iter().any(|e| e.contains("initial.ratio")), "{errs:?}");
            }
            other => panic!("expected cone violation, got {other:?}"),
        }
    }

    #[test]
    fn overrides_apply() {
        let mut sc = bundled_scenario("constant").unwrap();
        sc.apply_overrides(&Overrides {
            cells: Some(17),
            dt: Some(0.25),
            eps: Some(0.0),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(sc.mesh.num_cells(), 17);
        assert_eq!(sc.params.dt, 0.25);
        assert_eq!(sc.params.eps, 0.0);
    }

    #[test]
    fn alpha_roundtrip_detects_clamping() {
        let closure =
            Closure { gamma_plus: 2.0, gamma_minus: 2.0, alpha_lower: 0.3, alpha_upper: 0.7 };
        let fields = SpeciesFields {
            rho: vec![2.0],
            z: vec![0.5],
            big_r: vec![1.0],
            big_z: vec![1.0],
            alpha: vec![0.5],
        };
        // ϱ/R = 2 > F(ᾱ): must clamp
        let rt = reconstruct_alpha(&closure, &fields, 1e-8);
        assert!(rt.clamped >= 1);
        assert!(rt.alpha[0] <= 0.7 + 1e-15);
    }
}
