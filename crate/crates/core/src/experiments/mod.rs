//! Parameter schedules, moderate-deviations estimates, the converse-side
//! exponent proxy and resumable sweeps.

mod record;
mod sweep;

use serde::{Deserialize, Serialize};

pub use record::RunRecord;
pub use sweep::{gnuplot_path, point_seed, run_sweep, write_gnuplot, PointFailure, SweepOptions, SweepReport};

use crate::channel::{capacity, output_symmetry, ChannelSpec, Dmc};
use crate::codec::ErrorEstimate;
use crate::error::{Error, Result};
use crate::exponents::{sphere_packing_dual, RatePoint};

/// Rule choosing the number of streamed messages at block length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamRule {
    /// `S_n = ceil(n^t ln n)`.
    OmegaNtLog,
    Fixed(usize),
}

/// A sweep over block lengths and delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub channel: ChannelSpec,
    pub t: f64,
    pub n_list: Vec<usize>,
    #[serde(rename = "T_list")]
    pub delay_list: Vec<usize>,
    pub s_rule: StreamRule,
    pub trials: u64,
    pub master_seed: u64,
    pub output: std::path::PathBuf,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t < 0.5) {
            return Err(Error::Precondition(format!("t must lie in (0, 1/2), got {}", self.t)));
        }
        if self.trials == 0 {
            return Err(Error::Precondition("trials must be >= 1".into()));
        }
        if self.n_list.contains(&0) || self.delay_list.contains(&0) {
            return Err(Error::Precondition("block lengths and delays must be >= 1".into()));
        }
        if let StreamRule::Fixed(0) = self.s_rule {
            return Err(Error::Precondition("fixed stream length must be >= 1".into()));
        }
        Ok(())
    }

    /// Points with `t >= 1/3` lie outside the range where the converse applies.
    pub fn outside_converse_range(&self) -> bool {
        self.t >= 1.0 / 3.0
    }
}

/// Message count from `log2 M = nC - n^{1-t}`, rounded with a floor of 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageCount {
    pub m: u32,
    pub log2_target: f64,
    pub log2_realized: f64,
    /// `nC <= n^{1-t}`: the schedule asks for at most one message.
    pub infeasible: bool,
}

pub fn message_count(c_bits: f64, n: usize, t: f64) -> Result<MessageCount> {
    let nf = n as f64;
    let log2_target = nf * c_bits - nf.powf(1.0 - t);
    let m = 2f64.powf(log2_target).round().max(2.0);
    if m > u32::MAX as f64 {
        return Err(Error::Guard { what: "message count M", value: m, limit: u32::MAX as f64 });
    }
    Ok(MessageCount { m: m as u32, log2_target, log2_realized: m.log2(), infeasible: log2_target <= 0.0 })
}

pub fn stream_length(n: usize, t: f64, rule: StreamRule) -> usize {
    match rule {
        StreamRule::OmegaNtLog => {
            let nf = n as f64;
            ((nf.powf(t) * nf.ln()).ceil() as usize).max(1)
        }
        StreamRule::Fixed(s) => s,
    }
}

/// `-log2(eps) / n^{1-2t}`.
pub fn md_constant(eps_hat: f64, n: usize, t: f64) -> Result<f64> {
    if !(eps_hat > 0.0 && eps_hat <= 1.0) {
        return Err(Error::Precondition(format!("eps_hat must lie in (0, 1], got {eps_hat}")));
    }
    Ok(-eps_hat.log2() / (n as f64).powf(1.0 - 2.0 * t))
}

/// Plug-in moderate-deviations constant of a measured point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdEstimate {
    pub value: f64,
    /// No errors were observed; `value` uses the 95% upper confidence bound
    /// and is a lower estimate of the constant.
    pub censored: bool,
}

pub fn md_estimate(est: &ErrorEstimate, n: usize, t: f64) -> Result<MdEstimate> {
    let max = &est.max;
    if max.errors > 0 {
        Ok(MdEstimate { value: md_constant(max.eps_hat, n, t)?, censored: false })
    } else {
        Ok(MdEstimate { value: md_constant(max.ci.hi, n, t)?, censored: true })
    }
}

/// Dominant term of the converse exponent, normalised by `n^{1-2t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseProxy {
    pub value_bits: f64,
    /// Rate `C - n^{-t} - slack` at which the sphere-packing exponent is taken.
    pub rate_bits: f64,
    pub sphere_packing_bits: f64,
    pub note: String,
}

/// `T n^{2t} E_SP(C - n^{-t} - slack)` for an output-symmetric channel.
pub fn converse_proxy(w: &Dmc, n: usize, t: f64, delay: usize, slack: f64) -> Result<ConverseProxy> {
    if !output_symmetry(w).symmetric {
        return Err(Error::Precondition("converse proxy needs an output-symmetric channel".into()));
    }
    if n == 0 || delay == 0 || slack < 0.0 {
        return Err(Error::Precondition("need n >= 1, T >= 1 and slack >= 0".into()));
    }
    let c = capacity(w, 1e-12)?.capacity_bits;
    let nf = n as f64;
    let rate = c - nf.powf(-t) - slack;
    if rate <= 0.0 {
        return Err(Error::Precondition(format!("C - n^-t - slack = {rate} is not positive")));
    }
    let e = sphere_packing_dual(w, RatePoint::new(rate)?, 1e-10)?.value_bits;
    Ok(ConverseProxy {
        value_bits: delay as f64 * nf.powf(2.0 * t) * e,
        rate_bits: rate,
        sphere_packing_bits: e,
        note: "dominant term only: the (delta'_n)^2/8 factor and its hidden constants are dropped".into(),
    })
}
