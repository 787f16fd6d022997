//! Pressure laws, artificial pressure, the Helmholtz (pressure potential)
//! function, bi-fluid closures f/g and the truncation/renormalizing
//! functions, together with sampling-based hypothesis validators.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Open cone O = { (R,Z) : a_lower R < Z < a_upper R }.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Cone {
    pub a_lower: f64,
    pub a_upper: f64,
}

impl Cone {
    pub fn contains_closed(&self, r: f64, z: f64, tol: f64) -> bool {
        r >= -tol && z >= self.a_lower * r - tol && z <= self.a_upper * r + tol
    }

    pub fn width(&self) -> f64 {
        self.a_upper - self.a_lower
    }
}

/// Barotropic bi-fluid pressure P(R,Z).
#[derive(Clone)]
pub enum PressureLaw {
    /// P(R,Z) = a₊ R^{γ⁺} + a₋ Z^{γ⁻}, the two-isentropic-gases preset.
    Isentropic { a_plus: f64, a_minus: f64, gamma_plus: f64, gamma_minus: f64 },
    /// User-supplied evaluator with declared growth exponents.
    Custom {
        eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        gamma: f64,
        beta: f64,
    },
}

impl fmt::Debug for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus } => f
                .debug_struct("Isentropic")
                .field("a_plus", a_plus)
                .field("a_minus", a_minus)
                .field("gamma_plus", gamma_plus)
                .field("gamma_minus", gamma_minus)
                .finish(),
            PressureLaw::Custom { gamma, beta, .. } => {
                f.debug_struct("Custom").field("gamma", gamma).field("beta", beta).finish()
            }
        }
    }
}

impl PressureLaw {
    pub fn isentropic(a_plus: f64, a_minus: f64, gamma_plus: f64, gamma_minus: f64) -> Self {
        PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus }
    }

    /// Dominant growth exponent γ (γ⁺ for the preset).
    pub fn gamma(&self) -> f64 {
        match self {
            PressureLaw::Isentropic { gamma_plus, .. } => *gamma_plus,
            PressureLaw::Custom { gamma, .. } => *gamma,
        }
    }

    /// Secondary growth exponent β (γ⁻ for the preset).
    pub fn beta(&self) -> f64 {
        match self {
            PressureLaw::Isentropic { gamma_minus, .. } => *gamma_minus,
            PressureLaw::Custom { beta, .. } => *beta,
        }
    }

    pub fn gamma_bog(&self) -> f64 {
        let g = self.gamma();
        (2.0 / 3.0 * g - 1.0).min(0.5 * g)
    }

    fn p_raw(&self, r: f64, z: f64) -> f64 {
        match self {
            PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus } => {
                a_plus * r.powf(*gamma_plus) + a_minus * z.powf(*gamma_minus)
            }
            PressureLaw::Custom { eval, .. } => eval(r, z),
        }
    }

    /// P(R,Z) for R,Z >= 0.
    pub fn pressure(&self, r: f64, z: f64) -> Result<f64> {
        if r < 0.0 || z < 0.0 {
            return Err(Error::InvalidArg(format!("pressure needs R,Z >= 0, got ({r}, {z})")));
        }
        Ok(self.p_raw(r, z))
    }

    /// Unchecked fast path for hot loops; caller guarantees R,Z >= 0.
    pub fn p(&self, r: f64, z: f64) -> f64 {
        self.p_raw(r, z)
    }

    pub fn dp_dr(&self, r: f64, z: f64) -> f64 {
        match self {
            PressureLaw::Isentropic { a_plus, gamma_plus, .. } => {
                a_plus * gamma_plus * r.powf(gamma_plus - 1.0)
            }
            PressureLaw::Custom { .. } => {
                let h = (1e-6 * r.abs()).max(1e-8);
                (self.p_raw(r + h, z) - self.p_raw((r - h).max(0.0), z))
                    / (r + h - (r - h).max(0.0))
            }
        }
    }

    pub fn dp_dz(&self, r: f64, z: f64) -> f64 {
        match self {
            PressureLaw::Isentropic { a_minus, gamma_minus, .. } => {
                a_minus * gamma_minus * z.powf(gamma_minus - 1.0)
            }
            PressureLaw::Custom { .. } => {
                let h = (1e-6 * z.abs()).max(1e-8);
                (self.p_raw(r, z + h) - self.p_raw(r, (z - h).max(0.0)))
                    / (z + h - (z - h).max(0.0))
            }
        }
    }

    /// Minimal admissible exponent bound for the artificial pressure.
    pub fn c_exp_floor(&self) -> f64 {
        (9.0 / 2.0_f64).max(self.beta()).max(self.gamma())
    }

    pub fn check_c_exp(&self, c_exp: f64, allow_override: bool) -> Result<()> {
        if c_exp <= self.c_exp_floor() && !allow_override {
            return Err(Error::InvalidArg(format!(
                "artificial-pressure exponent {} must exceed max(9/2, beta, gamma) = {}",
                c_exp,
                self.c_exp_floor()
            )));
        }
        Ok(())
    }

    /// Artificial pressure P_δ(R,Z) = P(R,Z) + δ(R^c + Z^c).
    pub fn pressure_delta(&self, r: f64, z: f64, delta: f64, c_exp: f64) -> f64 {
        if delta == 0.0 {
            return self.p_raw(r, z);
        }
        self.p_raw(r, z) + delta * (r.powf(c_exp) + z.powf(c_exp))
    }

    /// Pressure potential H(R,Z) = R ∫₁^R P(s, sZ/R)/s² ds, H(0,Z) = 0.
    ///
    /// Closed form for the isentropic preset, adaptive Simpson quadrature
    /// (relative tolerance 1e-10) otherwise.
    pub fn helmholtz(&self, r: f64, z: f64) -> Result<f64> {
        if r < 0.0 || z < 0.0 {
            return Err(Error::InvalidArg(format!("helmholtz needs R,Z >= 0, got ({r}, {z})")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        match self {
            PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus } => {
                Ok(power_potential(*a_plus, *gamma_plus, r)
                    + ray_potential(*a_minus, *gamma_minus, r, z))
            }
            PressureLaw::Custom { eval, .. } => {
                let s_over_r = z / r;
                let f = |s: f64| eval(s, s * s_over_r) / (s * s);
                let (value, estimate) = adaptive_simpson(&f, 1.0, r, 1e-10)?;
                let _ = estimate;
                Ok(r * value)
            }
        }
    }

    pub fn helmholtz_delta(&self, r: f64, z: f64, delta: f64, c_exp: f64) -> Result<f64> {
        let h = self.helmholtz(r, z)?;
        if delta == 0.0 {
            return Ok(h);
        }
        Ok(h + delta / (c_exp - 1.0) * (r.powf(c_exp) + z.powf(c_exp)))
    }

    pub fn dh_dr(&self, r: f64, z: f64) -> f64 {
        match self {
            PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus } => {
                power_potential_d(*a_plus, *gamma_plus, r) + ray_potential_dr(*a_minus, *gamma_minus, r, z)
            }
            PressureLaw::Custom { .. } => self.fd_dh(r, z, 0),
        }
    }

    pub fn dh_dz(&self, r: f64, z: f64) -> f64 {
        match self {
            PressureLaw::Isentropic { a_minus, gamma_minus, .. } => {
                ray_potential_dz(*a_minus, *gamma_minus, r, z)
            }
            PressureLaw::Custom { .. } => self.fd_dh(r, z, 1),
        }
    }

    fn fd_dh(&self, r: f64, z: f64, axis: usize) -> f64 {
        let h = 1e-5 * (if axis == 0 { r } else { z }).abs().max(1e-3);
        let (mut lo, mut hi) = ((r, z), (r, z));
        if axis == 0 {
            lo.0 = (r - h).max(0.0);
            hi.0 = r + h;
        } else {
            lo.1 = (z - h).max(0.0);
            hi.1 = z + h;
        }
        let span = if axis == 0 { hi.0 - lo.0 } else { hi.1 - lo.1 };
        (self.helmholtz(hi.0, hi.1).unwrap_or(f64::NAN)
            - self.helmholtz(lo.0, lo.1).unwrap_or(f64::NAN))
            / span
    }

    /// ∂_R H_δ
    pub fn dh_delta_dr(&self, r: f64, z: f64, delta: f64, c_exp: f64) -> f64 {
        let mut d = self.dh_dr(r, z);
        if delta > 0.0 {
            d += delta * c_exp / (c_exp - 1.0) * r.powf(c_exp - 1.0);
        }
        d
    }

    /// ∂_Z H_δ
    pub fn dh_delta_dz(&self, r: f64, z: f64, delta: f64, c_exp: f64) -> f64 {
        let mut d = self.dh_dz(r, z);
        if delta > 0.0 {
            d += delta * c_exp / (c_exp - 1.0) * z.powf(c_exp - 1.0);
        }
        d
    }

    /// Hessian of H at (R,Z); closed form for the preset, finite
    /// differences otherwise. Returns [H_RR, H_RZ, H_ZZ].
    pub fn helmholtz_hessian(&self, r: f64, z: f64) -> [f64; 3] {
        match self {
            PressureLaw::Isentropic { a_plus, a_minus, gamma_plus, gamma_minus } => {
                let h_rr = a_plus * gamma_plus * r.powf(gamma_plus - 2.0)
                    + ray_potential_drr(*a_minus, *gamma_minus, r, z);
                let h_rz = ray_potential_drz(*a_minus, *gamma_minus, r, z);
                let h_zz = ray_potential_dzz(*a_minus, *gamma_minus, r, z);
                [h_rr, h_rz, h_zz]
            }
            PressureLaw::Custom { .. } => {
                let hr = 1e-4 * r.abs().max(1e-2);
                let hz = 1e-4 * z.abs().max(1e-2);
                let h = |a: f64, b: f64| self.helmholtz(a, b).unwrap_or(f64::NAN);
                let h_rr = (h(r + hr, z) - 2.0 * h(r, z) + h(r - hr, z)) / (hr * hr);
                let h_zz = (h(r, z + hz) - 2.0 * h(r, z) + h(r, z - hz)) / (hz * hz);
                let h_rz = (h(r + hr, z + hz) - h(r + hr, z - hz) - h(r - hr, z + hz)
                    + h(r - hr, z - hz))
                    / (4.0 * hr * hz);
                [h_rr, h_rz, h_zz]
            }
        }
    }

    /// Hessian of H_δ.
    pub fn helmholtz_delta_hessian(&self, r: f64, z: f64, delta: f64, c_exp: f64) -> [f64; 3] {
        let mut hess = self.helmholtz_hessian(r, z);
        if delta > 0.0 {
            hess[0] += delta * c_exp * r.powf(c_exp - 2.0);
            hess[2] += delta * c_exp * z.powf(c_exp - 2.0);
        }
        hess
    }

    /// Residual |R ∂_R H + Z ∂_Z H − H − P| with central finite-difference
    /// partials of H using the given step.
    pub fn helmholtz_pde_residual(&self, r: f64, z: f64, step: f64) -> Result<f64> {
        let h = |a: f64, b: f64| self.helmholtz(a, b);
        let dr = (h(r + step, z)? - h((r - step).max(0.0), z)?) / (r + step - (r - step).max(0.0));
        let dz = (h(r, z + step)? - h(r, (z - step).max(0.0))?) / (z + step - (z - step).max(0.0));
        Ok((r * dr + z * dz - h(r, z)? - self.p(r, z)).abs())
    }
}

/// a (s^g − s)/(g−1), the mono-fluid pressure potential of a·s^g,
/// with the g = 1 limit a·s·ln(s).
fn power_potential(a: f64, g: f64, s: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        a * s * s.ln()
    } else {
        a * (s.powf(g) - s) / (g - 1.0)
    }
}

fn power_potential_d(a: f64, g: f64, s: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        a * (s.ln() + 1.0)
    } else {
        a * (g * s.powf(g - 1.0) - 1.0) / (g - 1.0)
    }
}

/// The Z-part of the preset Helmholtz function:
/// a (Z^g − Z^g R^{1−g})/(g−1) for g ≠ 1, a·Z·ln(R) for g = 1.
fn ray_potential(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if (g - 1.0).abs() < 1e-12 {
        a * z * r.ln()
    } else {
        a * (z.powf(g) - z.powf(g) * r.powf(1.0 - g)) / (g - 1.0)
    }
}

fn ray_potential_dr(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        a * z / r
    } else {
        a * z.powf(g) * r.powf(-g)
    }
}

fn ray_potential_dz(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        a * r.ln()
    } else {
        a * g * (z.powf(g - 1.0) - z.powf(g - 1.0) * r.powf(1.0 - g)) / (g - 1.0)
    }
}

fn ray_potential_drr(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        -a * z / (r * r)
    } else {
        -a * g * z.powf(g) * r.powf(-g - 1.0)
    }
}

fn ray_potential_drz(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        a / r
    } else {
        a * g * z.powf(g - 1.0) * r.powf(-g)
    }
}

fn ray_potential_dzz(a: f64, g: f64, r: f64, z: f64) -> f64 {
    if (g - 1.0).abs() < 1e-12 {
        0.0
    } else {
        a * g * z.powf(g - 2.0) * (1.0 - r.powf(1.0 - g))
    }
}

/// Adaptive composite Simpson quadrature; returns (value, error estimate).
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        let err = (left + right - whole) / 15.0;
        if err.abs() <= tol || depth == 0 {
            (left + right + err, err.abs())
        } else {
            let (lv, le) = recurse(f, a, m, left, 0.5 * tol, depth - 1);
            let (rv, re) = recurse(f, m, b, right, 0.5 * tol, depth - 1);
            (lv + rv, le + re)
        }
    }
    let whole = simpson(f, a, b);
    let abs_tol = rel_tol * whole.abs().max(1e-30);
    let (value, estimate) = recurse(f, a, b, whole, abs_tol, 48);
    if !value.is_finite() {
        return Err(Error::Quadrature { estimate, tol: abs_tol });
    }
    if estimate > abs_tol.max(rel_tol * value.abs()) * 1e3 {
        return Err(Error::Quadrature { estimate, tol: abs_tol });
    }
    Ok((value, estimate))
}

/// Closure functions f, g of the two-isentropic-gases preset:
/// f(s) = s^{1/γ⁺ − 1}, g(s) = (1−s)^{1/γ⁻ − 1}, with F = 1/f, G = 1/g.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Closure {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// Admissible concentration range [α̲, ᾱ] ⊂ (0,1).
    pub alpha_lower: f64,
    pub alpha_upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureFn {
    SmallF,
    SmallG,
    BigF,
    BigG,
}

impl Closure {
    fn check_alpha(alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArg(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(())
    }

    pub fn small_f(&self, alpha: f64) -> f64 {
        alpha.powf(1.0 / self.gamma_plus - 1.0)
    }

    pub fn small_g(&self, alpha: f64) -> f64 {
        (1.0 - alpha).powf(1.0 / self.gamma_minus - 1.0)
    }

    /// F(α) = 1/f(α) = α^{1 − 1/γ⁺}, strictly increasing.
    pub fn big_f(&self, alpha: f64) -> f64 {
        alpha.powf(1.0 - 1.0 / self.gamma_plus)
    }

    /// G(α) = 1/g(α) = (1−α)^{1 − 1/γ⁻}, strictly decreasing.
    pub fn big_g(&self, alpha: f64) -> f64 {
        (1.0 - alpha).powf(1.0 - 1.0 / self.gamma_minus)
    }

    pub fn eval(&self, which: ClosureFn, alpha: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        Ok(match which {
            ClosureFn::SmallF => self.small_f(alpha),
            ClosureFn::SmallG => self.small_g(alpha),
            ClosureFn::BigF => self.big_f(alpha),
            ClosureFn::BigG => self.big_g(alpha),
        })
    }

    /// [F̲, F̄] = image of [α̲, ᾱ] under F.
    pub fn f_bounds(&self) -> (f64, f64) {
        let a = self.big_f(self.alpha_lower);
        let b = self.big_f(self.alpha_upper);
        (a.min(b), a.max(b))
    }

    pub fn g_bounds(&self) -> (f64, f64) {
        let a = self.big_g(self.alpha_lower);
        let b = self.big_g(self.alpha_upper);
        (a.min(b), a.max(b))
    }

    /// Inverse of F; `y` must be positive.
    pub fn inv_big_f(&self, y: f64) -> f64 {
        y.powf(self.gamma_plus / (self.gamma_plus - 1.0))
    }

    /// Inverse of G.
    pub fn inv_big_g(&self, y: f64) -> f64 {
        1.0 - y.powf(self.gamma_minus / (self.gamma_minus - 1.0))
    }

    /// Inverse of F with clamping of `y` into [F̲, F̄]; returns the
    /// reconstructed α and whether clamping occurred.
    pub fn inv_big_f_clamped(&self, y: f64) -> (f64, bool) {
        let (lo, hi) = self.f_bounds();
        let clamped = y < lo || y > hi;
        (self.inv_big_f(y.clamp(lo, hi)), clamped)
    }

    pub fn inv_big_g_clamped(&self, y: f64) -> (f64, bool) {
        let (lo, hi) = self.g_bounds();
        let clamped = y < lo || y > hi;
        (self.inv_big_g(y.clamp(lo, hi)), clamped)
    }
}

/// T_k(s) = k·T(s/k): concave C¹ truncation of the identity with
/// T(s) = s on [0,1] and T(s) = 2 for s >= 3; on [1,3] the blend is the
/// unique C¹ concave polynomial matching the endpoint values and slopes,
/// T(s) = 1 + (s−1) − (s−1)²/4.
pub fn truncation_t(k: f64, s: f64) -> f64 {
    k * base_truncation(s / k)
}

fn base_truncation(t: f64) -> f64 {
    if t <= 1.0 {
        t
    } else if t >= 3.0 {
        2.0
    } else {
        let u = t - 1.0;
        1.0 + u - 0.25 * u * u
    }
}

/// J(x) = ∫₁^x T(τ)/τ² dτ (signed for x < 1).
fn base_truncation_potential(x: f64) -> f64 {
    if x <= 1.0 {
        x.ln()
    } else if x <= 3.0 {
        -0.25 * x + 1.5 * x.ln() + 0.25 / x
    } else {
        let j3 = -0.75 + 1.5 * 3.0_f64.ln() + 1.0 / 12.0;
        j3 + 2.0 * (1.0 / 3.0 - 1.0 / x)
    }
}

/// L_k(s) = s ∫₁^s T_k(t)/t² dt; satisfies s L_k'(s) − L_k(s) = T_k(s).
pub fn truncation_l(k: f64, s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    s * (base_truncation_potential(s / k) - base_truncation_potential(1.0 / k))
}

/// Bregman gap E_B(a|b) = B(a) − B'(b)(a−b) − B(b); nonnegative for convex B.
pub fn bregman(b: impl Fn(f64) -> f64, db: impl Fn(f64) -> f64, a: f64, at: f64) -> f64 {
    b(a) - db(at) * (a - at) - b(at)
}

/// Verdict of the monotone-decomposition probe: for each sampled ratio s,
/// Π(R) = P(R, R·s) must be non-decreasing in R, and the report carries the
/// largest d such that Π − d·R^γ stays non-decreasing on the sample grid.
#[derive(Debug, Clone)]
pub struct MonotoneReport {
    pub violations: Vec<(f64, f64, f64)>,
    /// Largest admissible coefficient of the R^γ part.
    pub d_largest: f64,
}

pub fn monotone_decomposition_check(
    law: &PressureLaw,
    ratios: &[f64],
    r_samples: &[f64],
) -> MonotoneReport {
    let gamma = law.gamma();
    let mut violations = Vec::new();
    let mut d_largest = f64::INFINITY;
    for &s in ratios {
        for pair in r_samples.windows(2) {
            let (r1, r2) = (pair[0], pair[1]);
            if r2 <= r1 {
                continue;
            }
            let p1 = law.p(r1, r1 * s);
            let p2 = law.p(r2, r2 * s);
            if p2 < p1 - 1e-12 * p1.abs().max(1.0) {
                violations.push((s, r1, r2));
            }
            let denom = r2.powf(gamma) - r1.powf(gamma);
            if denom > 0.0 {
                d_largest = d_largest.min((p2 - p1) / denom);
            }
        }
    }
    if !d_largest.is_finite() {
        d_largest = 0.0;
    }
    MonotoneReport { violations, d_largest }
}

/// Sampling-based validation of the growth/monotonicity/convexity
/// hypotheses on the pressure and its potential. The growth constants are
/// fitted, not checked against fixed values.
#[derive(Debug, Clone, Serialize)]
pub struct LawHypothesisReport {
    pub p_at_origin: f64,
    /// max P/(R^γ + Z^β + 1) over the sample grid.
    pub growth_upper: f64,
    /// min P/(R^γ + Z^β − 1) over samples with positive denominator.
    pub growth_lower: f64,
    pub dzp_min: f64,
    pub dzp_upper_const: f64,
    pub drp_lower_const: f64,
    pub grh_upper: f64,
    pub grh_lower: f64,
    /// Minimal eigenvalue of the Helmholtz Hessian over the sample grid.
    pub hessian_min_eig: f64,
    /// Fraction of sampled cone points with positive semidefinite Hessian.
    pub convex_fraction: f64,
}

impl LawHypothesisReport {
    pub fn dzp_nonnegative(&self) -> bool {
        self.dzp_min >= -1e-12
    }

    pub fn drp_positive(&self) -> bool {
        self.drp_lower_const > 0.0
    }
}

pub fn validate_law(
    law: &PressureLaw,
    cone: &Cone,
    gamma_lower: f64,
    gamma_upper: f64,
    r_max: f64,
    n_r: usize,
    n_s: usize,
) -> LawHypothesisReport {
    let gamma = law.gamma();
    let beta = law.beta();
    let mut rep = LawHypothesisReport {
        p_at_origin: law.p(0.0, 0.0),
        growth_upper: 0.0,
        growth_lower: f64::INFINITY,
        dzp_min: f64::INFINITY,
        dzp_upper_const: 0.0,
        drp_lower_const: f64::INFINITY,
        grh_upper: 0.0,
        grh_lower: f64::INFINITY,
        hessian_min_eig: f64::INFINITY,
        convex_fraction: 0.0,
    };
    let mut convex = 0usize;
    let mut total = 0usize;
    for ir in 0..n_r {
        // log-spaced radii in [r_max*1e-2, r_max]
        let r = r_max * 1e-2_f64.powf(1.0 - ir as f64 / (n_r - 1).max(1) as f64);
        for is in 0..n_s {
            let margin = 1e-3 * cone.width();
            let s = cone.a_lower + margin
                + (cone.width() - 2.0 * margin) * is as f64 / (n_s - 1).max(1) as f64;
            let z = s * r;
            let p = law.p(r, z);
            let denom_hi = r.powf(gamma) + z.powf(beta) + 1.0;
            rep.growth_upper = rep.growth_upper.max(p / denom_hi);
            let denom_lo = r.powf(gamma) + z.powf(beta) - 1.0;
            if denom_lo > 1e-6 {
                rep.growth_lower = rep.growth_lower.min(p / denom_lo);
            }
            let dzp = law.dp_dz(r, z);
            rep.dzp_min = rep.dzp_min.min(dzp);
            let dzp_denom = r.powf(gamma_lower - 1.0) + r.powf(gamma_upper - 1.0);
            rep.dzp_upper_const = rep.dzp_upper_const.max(dzp / dzp_denom);
            rep.drp_lower_const = rep.drp_lower_const.min(law.dp_dr(r, z) / r.powf(gamma - 1.0));
            if let Ok(h) = law.helmholtz(r, z) {
                rep.grh_upper = rep.grh_upper.max(h / denom_hi);
                if denom_lo > 1e-6 {
                    rep.grh_lower = rep.grh_lower.min(h / denom_lo);
                }
            }
            let [hrr, hrz, hzz] = law.helmholtz_hessian(r, z);
            // eigenvalues of the symmetric 2x2 Hessian
            let mean = 0.5 * (hrr + hzz);
            let rad = (0.25 * (hrr - hzz).powi(2) + hrz * hrz).sqrt();
            let min_eig = mean - rad;
            rep.hessian_min_eig = rep.hessian_min_eig.min(min_eig);
            total += 1;
            if min_eig >= -1e-9 * (hrr.abs() + hzz.abs()).max(1.0) {
                convex += 1;
            }
        }
    }
    rep.convex_fraction = convex as f64 / total.max(1) as f64;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset() -> PressureLaw {
        PressureLaw::isentropic(1.0, 1.0, 2.0, 2.0)
    }

    #[test]
    fn pressure_preset_values() {
        let law = preset();
        assert_eq!(law.pressure(0.0, 0.0).unwrap(), 0.0);
        assert!((law.pressure(2.0, 1.0).unwrap() - 5.0).abs() < 1e-15);
        // Z = 0 kills the second term regardless of a_minus
        let law2 = PressureLaw::isentropic(1.0, 7.3, 2.0, 2.0);
        assert!((law2.pressure(1.5, 0.0).unwrap() - 1.5_f64.powi(2)).abs() < 1e-15);
        assert!(law.pressure(-1.0, 0.0).is_err());
    }

    #[test]
    fn pressure_delta_values() {
        let law = preset();
        assert_eq!(law.pressure_delta(1.3, 0.7, 0.0, 5.0), law.p(1.3, 0.7));
        assert_eq!(law.pressure_delta(0.0, 0.0, 0.3, 5.0), 0.0);
        // gamma+ = gamma- = 2, delta = 0.1, c = 5, R = Z = 1 -> 2 + 0.2
        assert!((law.pressure_delta(1.0, 1.0, 0.1, 5.0) - 2.2).abs() < 1e-15);
        assert!(law.check_c_exp(4.0, false).is_err());
        assert!(law.check_c_exp(4.0, true).is_ok());
        assert!(law.check_c_exp(5.0, false).is_ok());
    }

    #[test]
    fn helmholtz_normalization() {
        let law = preset();
        for z in [0.0, 0.3, 1.0] {
            assert_eq!(law.helmholtz(1.0, z).unwrap(), 0.0);
            assert_eq!(law.helmholtz(0.0, z).unwrap(), 0.0);
        }
        // pure law P = R^2 has H = R^2 - R, so H(2) = 2
        let pure = PressureLaw::isentropic(1.0, 0.0, 2.0, 2.0);
        assert!((pure.helmholtz(2.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn helmholtz_quadrature_matches_closed_form() {
        let closed = preset();
        let law = PressureLaw::Custom {
            eval: Arc::new(|r, z| r * r + z * z),
            gamma: 2.0,
            beta: 2.0,
        };
        for &(r, z) in &[(2.0, 1.0), (0.5, 0.2), (3.7, 1.1)] {
            let a = law.helmholtz(r, z).unwrap();
            let b = closed.helmholtz(r, z).unwrap();
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "({r},{z}): {a} vs {b}");
        }
    }

    #[test]
    fn helmholtz_pde_residual_small() {
        let law = preset();
        assert!(law.helmholtz_pde_residual(1.0, 0.5, 1e-4).unwrap() < 1e-6);
        let pure = PressureLaw::isentropic(1.0, 0.0, 2.0, 2.0);
        assert!(pure.helmholtz_pde_residual(1.7, 0.0, 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn helmholtz_linear_law_identity() {
        // P = c R gives H = c R ln R; residual vanishes analytically at R = e.
        let c = 1.7;
        let law = PressureLaw::Custom {
            eval: Arc::new(move |r, _| c * r),
            gamma: 1.0,
            beta: 1.0,
        };
        let r = std::f64::consts::E;
        let h = law.helmholtz(r, 0.1).unwrap();
        assert!((h - c * r * r.ln()).abs() < 1e-9);
        assert!(law.helmholtz_pde_residual(r, 0.1, 1e-4).unwrap() < 1e-5);
    }

    #[test]
    fn closed_form_partials_satisfy_euler_identity() {
        // R ∂_R H + Z ∂_Z H − H = P, and likewise for the δ-augmented pair.
        let law = PressureLaw::isentropic(0.8, 1.3, 2.0, 3.0);
        let (delta, c_exp) = (0.05, 5.0);
        for &(r, z) in &[(2.0, 1.0), (0.7, 0.3), (1.4, 1.1), (3.3, 0.4)] {
            let q = r * law.dh_dr(r, z) + z * law.dh_dz(r, z) - law.helmholtz(r, z).unwrap();
            assert!((q - law.p(r, z)).abs() < 1e-12 * law.p(r, z).max(1.0));
            let qd = r * law.dh_delta_dr(r, z, delta, c_exp)
                + z * law.dh_delta_dz(r, z, delta, c_exp)
                - law.helmholtz_delta(r, z, delta, c_exp).unwrap();
            let pd = law.pressure_delta(r, z, delta, c_exp);
            assert!((qd - pd).abs() < 1e-12 * pd.max(1.0));
        }
    }

    #[test]
    fn closure_preset_values() {
        let cl = Closure { gamma_plus: 2.0, gamma_minus: 2.0, alpha_lower: 0.2, alpha_upper: 0.8 };
        assert!((cl.eval(ClosureFn::SmallF, 0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!((cl.eval(ClosureFn::SmallG, 0.75).unwrap() - 2.0).abs() < 1e-15);
        for i in 1..20 {
            let a = i as f64 / 20.0;
            let prod = cl.small_f(a) * cl.big_f(a);
            assert!((prod - 1.0).abs() < 1e-14);
        }
        assert!(cl.eval(ClosureFn::BigF, 0.0).is_err());
        assert!(cl.eval(ClosureFn::BigF, 1.0).is_err());
    }

    #[test]
    fn closure_monotone_and_invertible() {
        let cl = Closure { gamma_plus: 2.0, gamma_minus: 3.0, alpha_lower: 0.2, alpha_upper: 0.8 };
        let mut prev_f = 0.0;
        let mut prev_g = f64::INFINITY;
        for i in 1..50 {
            let a = i as f64 / 50.0;
            let (f, g) = (cl.big_f(a), cl.big_g(a));
            assert!(f > prev_f);
            assert!(g < prev_g);
            prev_f = f;
            prev_g = g;
            assert!((cl.inv_big_f(f) - a).abs() < 1e-12);
            assert!((cl.inv_big_g(g) - a).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_values() {
        assert_eq!(truncation_t(1.0, 0.5), 0.5);
        assert_eq!(truncation_t(4.0, 2.0), 2.0); // s <= k: identity
        assert_eq!(truncation_t(1.0, 5.0), 2.0); // s >= 3k: plateau 2k
        assert_eq!(truncation_t(2.0, 7.0), 4.0);
        assert_eq!(truncation_l(3.0, 1.0), 0.0);
        assert_eq!(truncation_l(3.0, 0.0), 0.0);
    }

    #[test]
    fn truncation_lipschitz_and_concave() {
        let k = 2.0;
        let mut prev_slope = f64::INFINITY;
        for i in 0..400 {
            let s = i as f64 * 0.025;
            let d = (truncation_t(k, s + 1e-6) - truncation_t(k, s)) / 1e-6;
            assert!(d <= 1.0 + 1e-6 && d >= -1e-9);
            assert!(d <= prev_slope + 1e-5, "slope not non-increasing at {s}");
            prev_slope = d;
        }
    }

    #[test]
    fn truncation_l_identity() {
        // s L_k'(s) - L_k(s) = T_k(s), finite-difference derivative.
        for &k in &[1.0, 2.0, 5.0] {
            for i in 1..60 {
                let s = 0.3 * i as f64;
                let h = 1e-6 * s.max(1.0);
                let lp = (truncation_l(k, s + h) - truncation_l(k, s - h)) / (2.0 * h);
                let resid = (s * lp - truncation_l(k, s) - truncation_t(k, s)).abs();
                assert!(resid < 1e-6, "k={k} s={s} resid={resid}");
            }
        }
    }

    #[test]
    fn monotone_decomposition_preset() {
        let law = preset();
        let r: Vec<f64> = (1..100).map(|i| 0.05 * i as f64).collect();
        // s = 0.5: Π(R) = R²(1 + 0.25), monotone with d >= 1.
        let rep = monotone_decomposition_check(&law, &[0.5], &r);
        assert!(rep.violations.is_empty());
        assert!(rep.d_largest >= 1.0);
        // s = 0: single power, monotone.
        let rep0 = monotone_decomposition_check(&law, &[0.0], &r);
        assert!(rep0.violations.is_empty());
    }

    #[test]
    fn validator_detects_preset_properties() {
        let law = preset();
        let cone = Cone { a_lower: 0.1, a_upper: 1.0 };
        let rep = validate_law(&law, &cone, 1.0, 2.0, 5.0, 24, 8);
        assert_eq!(rep.p_at_origin, 0.0);
        assert!(rep.dzp_nonnegative());
        assert!(rep.drp_positive());
        assert!(rep.growth_upper.is_finite() && rep.growth_upper > 0.0);
        // The pure single-species law has a genuinely convex potential.
        let pure = PressureLaw::isentropic(1.0, 0.0, 2.0, 2.0);
        let rep_pure = validate_law(&pure, &cone, 1.0, 2.0, 5.0, 24, 8);
        assert!(rep_pure.convex_fraction > 0.999, "{}", rep_pure.convex_fraction);
    }

    #[test]
    fn bregman_nonnegative_for_square() {
        for i in 0..50 {
            let a = 0.1 * i as f64;
            for j in 0..50 {
                let b = 0.1 * j as f64;
                assert!(bregman(|s| s * s, |s| 2.0 * s, a, b) >= 0.0);
            }
        }
    }
}
