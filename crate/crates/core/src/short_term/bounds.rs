//! Concave lower bounds of the achievable rates around an iterate.
//!
//! Both rates have the form `C ln(1 + x^2/y)` with `x` linear and `y`
//! convex quadratic in the power amplitudes. Around `(x0, y0)`,
//!
//! ```text
//! C [ ln(1 + x0^2/y0) - x0^2/y0 + 2 x0 x / y0 - x0^2 (x^2 + y) / (y0 (x0^2 + y0)) ]
//! ```
//!
//! is concave in the amplitudes, touches the rate at the iterate with equal
//! gradient and lies below it everywhere. It is unchanged under
//! `(x, y) -> (c x, c^2 y)`, which the assembly uses to normalize `y0` to 1.

use nalgebra::DMatrix;

use crate::network::NetworkRealization;
use crate::params::SystemParams;
use crate::rates::{downlink_terms, rate_scale, uplink_terms, PowerAllocation};

/// Linearization point `(x0, y0)` of one rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub x0: f64,
    pub y0: f64,
}

/// Coefficients of the bound written as `alpha + beta x - gamma (x^2 + y)`
/// after scaling `x` by `1/sqrt(y0)` and `y` by `1/y0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedBound {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `1/sqrt(y0)`.
    pub scale: f64,
}

impl RateBound {
    /// Bound value, in units of the rate prefactor `C`.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = (self.x0, self.y0);
        let s = x0 * x0 / y0;
        s.ln_1p() - s + 2.0 * x0 * x / y0 - x0 * x0 * (x * x + y) / (y0 * (x0 * x0 + y0))
    }

    pub fn normalized(&self) -> NormalizedBound {
        let scale = 1.0 / self.y0.sqrt();
        let x0 = self.x0 * scale;
        let s = x0 * x0;
        NormalizedBound {
            alpha: s.ln_1p() - s,
            beta: 2.0 * x0,
            gamma: s / (s + 1.0),
            scale,
        }
    }
}

/// Per-UE linearization points of both rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCoefficients {
    pub dl: Vec<RateBound>,
    pub ul: Vec<RateBound>,
}

pub fn build_bounds(
    iterate: &PowerAllocation,
    net: &NetworkRealization,
    p: &SystemParams,
) -> BoundCoefficients {
    let pack = |t: Vec<(f64, f64)>| t.into_iter().map(|(x0, y0)| RateBound { x0, y0 }).collect();
    BoundCoefficients {
        dl: pack(downlink_terms(&iterate.v, net, p)),
        ul: pack(uplink_terms(&iterate.u, net, p)),
    }
}

/// Lower bound of every downlink rate at `v` (bit/s).
pub fn downlink_bound(
    b: &BoundCoefficients,
    v: &DMatrix<f64>,
    net: &NetworkRealization,
    p: &SystemParams,
) -> Vec<f64> {
    let c = rate_scale(p);
    downlink_terms(v, net, p)
        .into_iter()
        .zip(&b.dl)
        .map(|((x, y), rb)| c * rb.value(x, y))
        .collect()
}

/// Lower bound of every uplink rate at `u` (bit/s).
pub fn uplink_bound(
    b: &BoundCoefficients,
    u: &[f64],
    net: &NetworkRealization,
    p: &SystemParams,
) -> Vec<f64> {
    let c = rate_scale(p);
    uplink_terms(u, net, p)
        .into_iter()
        .zip(&b.ul)
        .map(|((x, y), rb)| c * rb.value(x, y))
        .collect()
}
