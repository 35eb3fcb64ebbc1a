use serde::{Deserialize, Serialize};

/// The three-well landscape: two deep wells near `(+-1, 0)`, a shallow one
/// near `(0, 1.5)`, and quartic confinement.
pub fn triple_well_potential(x: f64, y: f64) -> (f64, [f64; 2]) {
    let y1 = y - 1.0 / 3.0;
    let y2 = y - 5.0 / 3.0;
    let e1 = (-x * x - y1 * y1).exp();
    let e2 = (-x * x - y2 * y2).exp();
    let e3 = (-(x - 1.0) * (x - 1.0) - y * y).exp();
    let e4 = (-(x + 1.0) * (x + 1.0) - y * y).exp();
    let v = 0.75 * e1 - 0.75 * e2 - 1.25 * e3 - 1.25 * e4 + x.powi(4) / 20.0 + y1.powi(4) / 20.0;
    let gx = -1.5 * x * e1 + 1.5 * x * e2 + 2.5 * (x - 1.0) * e3 + 2.5 * (x + 1.0) * e4 + x.powi(3) / 5.0;
    let gy = -1.5 * y1 * e1 + 1.5 * y2 * e2 + 2.5 * y * e3 + 2.5 * y * e4 + y1.powi(3) / 5.0;
    (v, [gx, gy])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    TripleWell,
    /// `V = 0`.
    Flat,
    /// `V = g . (x, y)`, a constant drift `-g`.
    Linear { gradient: [f64; 2] },
}

impl Potential {
    pub fn value_and_gradient(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        match *self {
            Potential::TripleWell => triple_well_potential(x, y),
            Potential::Flat => (0.0, [0.0, 0.0]),
            Potential::Linear { gradient: g } => (g[0] * x + g[1] * y, g),
        }
    }
}

/// Time-dependent force added to `-grad V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Forcing {
    /// `a cos(2 pi t / period) (-y, x)`: a rotation whose sense flips every
    /// half period.
    CirculationCosine { amplitude: f64, period: f64 },
}

impl Forcing {
    pub fn at(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        match *self {
            Forcing::CirculationCosine { amplitude, period } => {
                let s = amplitude * (std::f64::consts::TAU * t / period).cos();
                [-s * y, s * x]
            }
        }
    }

    pub fn period(&self) -> f64 {
        match *self {
            Forcing::CirculationCosine { period, .. } => period,
        }
    }
}
