//! Analytic field profiles used for boundary velocity extensions, initial
//! data and manufactured solutions. All profiles are defined on the closed
//! domain, matching the convention that boundary data are restrictions of
//! globally defined smooth functions.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// intercept + slope·x
    Linear {
        intercept: f64,
        #[serde(default)]
        slope: [f64; 2],
    },
    /// offset + amplitude * sin(2π frequency·x + phase)
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: [f64; 2],
        #[serde(default)]
        phase: f64,
    },
    /// Polynomial in the first coordinate: coeffs[0] + coeffs[1] x + ...
    Poly {
        coeffs: Vec<f64>,
    },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { intercept, slope } => intercept + slope[0] * x[0] + slope[1] * x[1],
            Profile::Sine { offset, amplitude, frequency, phase } => {
                let arg = 2.0 * std::f64::consts::PI * (frequency[0] * x[0] + frequency[1] * x[1]);
                offset + amplitude * (arg + phase).sin()
            }
            Profile::Poly { coeffs } => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * x[0] + c;
                }
                acc
            }
        }
    }

    pub fn grad(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            Profile::Constant { .. } => [0.0, 0.0],
            Profile::Linear { slope, .. } => *slope,
            Profile::Sine { amplitude, frequency, phase, .. } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                let arg = two_pi * (frequency[0] * x[0] + frequency[1] * x[1]) + phase;
                let d = amplitude * arg.cos() * two_pi;
                [d * frequency[0], d * frequency[1]]
            }
            Profile::Poly { coeffs } => {
                let mut acc = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * x[0] + k as f64 * c;
                }
                [acc, 0.0]
            }
        }
    }

    pub fn min_on(&self, points: impl Iterator<Item = [f64; 2]>) -> f64 {
        points.map(|p| self.eval(p)).fold(f64::INFINITY, f64::min)
    }
}

/// Vector-valued profile; the second component is ignored in 1D.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VectorProfile {
    pub x: Profile,
    #[serde(default = "zero_profile")]
    pub y: Profile,
}

fn zero_profile() -> Profile {
    Profile::Constant { value: 0.0 }
}

impl VectorProfile {
    pub fn constant(v: [f64; 2]) -> Self {
        VectorProfile { x: Profile::constant(v[0]), y: Profile::constant(v[1]) }
    }

    pub fn zero() -> Self {
        Self::constant([0.0, 0.0])
    }

    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        [self.x.eval(x), self.y.eval(x)]
    }

    /// grad[a][b] = ∂_a (component b)
    pub fn grad(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let gx = self.x.grad(x);
        let gy = self.y.grad(x);
        [[gx[0], gy[0]], [gx[1], gy[1]]]
    }

    pub fn component(&self, a: usize) -> &Profile {
        if a == 0 {
            &self.x
        } else {
            &self.y
        }
    }
}
