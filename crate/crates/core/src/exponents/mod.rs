//! Error exponents: sphere packing, Haroutunian, the auxiliary channel that
//! attains the latter, and the second-order ratio probe near capacity.

mod haroutunian;
mod optim;
mod sphere_packing;

use serde::{Deserialize, Serialize};

use crate::channel::{capacity, Dmc, InputDistribution};
use crate::error::{Error, Result};

pub use haroutunian::{haroutunian_exponent, haroutunian_exponent_with, DEFAULT_ITERATIONS};
pub use sphere_packing::{sphere_packing_dual, sphere_packing_primal, PRIMAL_MAX_INPUTS};

/// A nonnegative rate in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RatePoint(f64);

impl RatePoint {
    pub fn new(rate_bits: f64) -> Result<Self> {
        if rate_bits >= 0.0 && rate_bits.is_finite() {
            Ok(RatePoint(rate_bits))
        } else {
            Err(Error::Precondition(format!("rate must be finite and nonnegative, got {rate_bits}")))
        }
    }

    pub fn bits(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RatePoint {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        RatePoint::new(v)
    }
}

impl From<RatePoint> for f64 {
    fn from(r: RatePoint) -> f64 {
        r.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMethod {
    PrimalGrid,
    DualGallager,
    Symmetric1d,
    /// Subgradient descent over output distributions (general Haroutunian).
    OutputSubgradient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentResult {
    pub value_bits: f64,
    pub optimizing_channel: Dmc,
    pub optimizing_input: InputDistribution,
    pub method: ExponentMethod,
    pub gap_estimate: f64,
    /// Dual tilt parameter, when the method has one.
    pub rho: Option<f64>,
    /// `I(P, V)` for sphere packing, `C(V)` for Haroutunian.
    pub constraint_bits: f64,
    pub rate_bits: f64,
}

/// Sphere-packing exponent by the dual route. On channels with at most three
/// inputs and three outputs the primal route is also run and the reported
/// gap is the distance between the two values.
pub fn sphere_packing_exponent(w: &Dmc, r: RatePoint, tol: f64) -> Result<ExponentResult> {
    let mut dual = sphere_packing_dual(w, r, tol)?;
    if w.input_size() <= PRIMAL_MAX_INPUTS && w.output_size() <= 3 {
        let primal = sphere_packing_primal(w, r, tol)?;
        dual.gap_estimate = (dual.value_bits - primal.value_bits).abs();
    }
    Ok(dual)
}

/// The channel attaining the Haroutunian exponent; `C(V) <= R` up to the
/// capacity solver tolerance.
pub fn auxiliary_channel(w: &Dmc, r: RatePoint, tol: f64) -> Result<ExponentResult> {
    haroutunian_exponent(w, r, tol)
}

/// `(rho, E_SP(C - rho) / rho^2)` for each `rho` in `rhos`.
pub fn sp_ratio_probe(w: &Dmc, rhos: &[f64]) -> Result<Vec<(f64, f64)>> {
    let c = capacity(w, 1e-12)?.capacity_bits;
    if c <= 0.0 {
        return Err(Error::Precondition("channel has zero capacity: no admissible rho".into()));
    }
    rhos.iter()
        .map(|&rho| {
            if !(rho > 0.0 && rho < c) {
                return Err(Error::Precondition(format!("rho must lie in (0, C = {c}), got {rho}")));
            }
            let e = sphere_packing_dual(w, RatePoint::new(c - rho)?, 1e-10)?.value_bits;
            Ok((rho, e / (rho * rho)))
        })
        .collect()
}
