//! Sphere-packing exponent by two independent routes.
//!
//! The dual route maximises `E0(rho, P) - rho R` with
//! `E0(rho, P) = -log2 sum_y (sum_x P(x) W(y|x)^{1/(1+rho)})^{1+rho}`.
//! The primal route evaluates `max_P min_{V : I(P,V) <= R} D(V||W|P)` directly:
//! a grid over `P`, and for each `P` a Lagrangian bisection whose inner
//! problem is solved by mirror descent over the rows of `V`.

use super::optim::{golden_min, simplex_minimize};
use super::{ExponentMethod, ExponentResult, RatePoint};
use crate::channel::info::{kl, mutual_information_unchecked};
use crate::channel::{capacity, Dmc, InputDistribution};
use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;
const RHO_GRID_LO: f64 = -4.0;
const RHO_GRID_HI: f64 = 4.0;
const RHO_GRID_STEPS: usize = 80;

/// `W^{1/(1+rho)}` together with the operations the dual needs.
pub(crate) struct Tilt<'a> {
    w: &'a Dmc,
    rho: f64,
    a: Vec<f64>,
}

impl<'a> Tilt<'a> {
    pub(crate) fn new(w: &'a Dmc, rho: f64) -> Self {
        let s = 1.0 / (1.0 + rho);
        let a = w.rows().flat_map(|r| r.iter().map(move |&v| if v > 0.0 { v.powf(s) } else { 0.0 })).collect();
        Tilt { w, rho, a }
    }

    fn ny(&self) -> usize {
        self.w.output_size()
    }

    fn ln_s(&self, p: &[f64]) -> Vec<f64> {
        let ny = self.ny();
        let mut s = vec![0.0; ny];
        for (x, &px) in p.iter().enumerate() {
            if px > 0.0 {
                for y in 0..ny {
                    s[y] += px * self.a[x * ny + y];
                }
            }
        }
        s.iter().map(|v| v.ln()).collect()
    }

    /// `ln sum_y s_y^{1+rho}` and its gradient in `P`.
    fn ln_f(&self, p: &[f64], grad: &mut [f64]) -> f64 {
        let ny = self.ny();
        let ln_s = self.ln_s(p);
        let terms: Vec<f64> = ln_s.iter().map(|&l| (1.0 + self.rho) * l).collect();
        let ln_f = log_sum_exp(&terms);
        let weights: Vec<f64> = ln_s
            .iter()
            .map(|&l| if l.is_finite() { (self.rho * l - ln_f).exp() } else { 0.0 })
            .collect();
        for (x, g) in grad.iter_mut().enumerate() {
            *g = (1.0 + self.rho) * (0..ny).map(|y| self.a[x * ny + y] * weights[y]).sum::<f64>();
        }
        ln_f
    }

    /// `max_P E0(rho, P)` in bits, warm-started from `p0`.
    pub(crate) fn e0_max(&self, p0: &[f64]) -> (f64, Vec<f64>) {
        if self.rho == 0.0 {
            return (0.0, p0.to_vec());
        }
        let m = simplex_minimize(p0.to_vec(), |p, g| self.ln_f(p, g), 1e-14, 100_000);
        (-m.value / LN2, m.x)
    }

    /// `V(y|x) ∝ W(y|x)^{1/(1+rho)} s_y^rho` with `s = sum_x P(x) W^{1/(1+rho)}`.
    pub(crate) fn tilted_channel(&self, p: &[f64]) -> Result<Dmc> {
        let ny = self.ny();
        let ln_s = self.ln_s(p);
        let rows = (0..self.w.input_size())
            .map(|x| {
                let logs: Vec<f64> = (0..ny)
                    .map(|y| {
                        let a = self.a[x * ny + y];
                        if a > 0.0 && ln_s[y].is_finite() {
                            a.ln() + self.rho * ln_s[y]
                        } else {
                            f64::NEG_INFINITY
                        }
                    })
                    .collect();
                let norm = log_sum_exp(&logs);
                logs.iter().map(|&l| (l - norm).exp()).collect()
            })
            .collect();
        Dmc::from_rows_normalized(rows)
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|&t| (t - m).exp()).sum::<f64>().ln()
}

pub(crate) fn conditional_divergence(v: &Dmc, w: &Dmc, p: &[f64]) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| px * kl(v.row(x), w.row(x)))
        .sum()
}

/// Dual evaluation. `start` is the capacity-achieving input used as warm start.
pub fn sphere_packing_dual(w: &Dmc, r: RatePoint, tol: f64) -> Result<ExponentResult> {
    check_tol(tol)?;
    let cap = capacity(w, tol.min(1e-9))?;
    let start = cap.input.probs().to_vec();
    if r.bits() >= cap.capacity_bits {
        return Ok(trivial(w, cap.input, ExponentMethod::DualGallager, r));
    }
    let rate = r.bits();
    let h = |rho: f64, warm: &[f64]| {
        let (e0, p) = Tilt::new(w, rho).e0_max(warm);
        (e0 - rho * rate, p)
    };

    // geometric scan over rho, then golden refinement around the best point
    let mut grid = vec![0.0];
    grid.extend(
        (0..=RHO_GRID_STEPS)
            .map(|i| 10f64.powf(RHO_GRID_LO + (RHO_GRID_HI - RHO_GRID_LO) * i as f64 / RHO_GRID_STEPS as f64)),
    );
    let mut values = Vec::with_capacity(grid.len());
    let mut warm = start.clone();
    let mut best = 0usize;
    let mut declines = 0;
    for (i, &rho) in grid.iter().enumerate() {
        let (v, p) = h(rho, &warm);
        warm = p;
        values.push(v);
        if v > values[best] {
            best = i;
            declines = 0;
        } else {
            declines += 1;
            if declines >= 6 {
                break;
            }
        }
    }
    if best == grid.len() - 1 {
        return Err(Error::LineSearch {
            what: "sphere-packing dual",
            lo: grid[best - 1],
            hi: grid[best],
        });
    }
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = grid[best + 1];
    let mut warm = start.clone();
    let (rho, neg, _) = golden_min(
        |rho| {
            let (v, p) = h(rho, &warm);
            warm = p;
            -v
        },
        lo,
        hi,
        1e-12,
    );
    let (rho, value) = if -neg >= values[best] { (rho, -neg) } else { (grid[best], values[best]) };
    let tilt = Tilt::new(w, rho);
    let (_, p) = tilt.e0_max(&start);
    let v = tilt.tilted_channel(&p)?;
    let divergence = conditional_divergence(&v, w, &p);
    let info = mutual_information_unchecked(&p, &v);
    Ok(ExponentResult {
        value_bits: value.max(0.0),
        gap_estimate: (divergence - value).abs(),
        optimizing_channel: v,
        optimizing_input: InputDistribution::new_unchecked(p),
        method: ExponentMethod::DualGallager,
        rho: Some(rho),
        constraint_bits: info,
        rate_bits: rate,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("tolerance must be positive, got {tol}")))
    }
}

fn trivial(w: &Dmc, p: InputDistribution, method: ExponentMethod, r: RatePoint) -> ExponentResult {
    let info = mutual_information_unchecked(p.probs(), w);
    ExponentResult {
        value_bits: 0.0,
        optimizing_channel: w.clone(),
        optimizing_input: p,
        method,
        gap_estimate: 0.0,
        rho: Some(0.0),
        constraint_bits: info,
        rate_bits: r.bits(),
    }
}

pub(crate) fn trivial_result(w: &Dmc, p: InputDistribution, method: ExponentMethod, r: RatePoint) -> ExponentResult {
    trivial(w, p, method, r)
}

pub(crate) fn require_tol(tol: f64) -> Result<()> {
    check_tol(tol)
}

// ---------------------------------------------------------------------------
// primal route

/// Largest input alphabet accepted by the primal solver.
pub const PRIMAL_MAX_INPUTS: usize = 3;

/// `min_{V : I(P,V) <= R} D(V||W|P)` for a fixed input distribution.
/// Returns the value and the minimising channel (row-major).
/// Stopping rules of the primal inner solve: relative width of the multiplier
/// bracket and the mirror-descent gap.
#[derive(Clone, Copy)]
struct InnerTol {
    multiplier: f64,
    descent: f64,
}

/// Enough to rank grid points.
const SCAN: InnerTol = InnerTol { multiplier: 1e-7, descent: 1e-10 };
const FINE: InnerTol = InnerTol { multiplier: 1e-12, descent: 1e-13 };

fn primal_inner(w: &Dmc, p: &[f64], rate: f64, tol: InnerTol) -> (f64, Vec<f64>) {
    let flat_w: Vec<f64> = w.rows().flatten().copied().collect();
    if mutual_information_unchecked(p, w) <= rate {
        return (0.0, flat_w);
    }
    let mut v = flat_w.clone();
    let mut hi = 1.0;
    loop {
        v = lagrangian_argmin(w, p, hi, v, tol.descent);
        if info_flat(p, &v, w.output_size()) <= rate {
            break;
        }
        hi *= 2.0;
        if hi > 1e12 {
            return (f64::INFINITY, v);
        }
    }
    let mut feasible = v.clone();
    let mut lo = 0.0;
    let mut cur = v;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        cur = lagrangian_argmin(w, p, mid, cur, tol.descent);
        if info_flat(p, &cur, w.output_size()) <= rate {
            hi = mid;
            feasible = cur.clone();
        } else {
            lo = mid;
        }
        if hi - lo <= tol.multiplier * hi {
            break;
        }
    }
    (divergence_flat(p, &feasible, &flat_w, w.output_size()), feasible)
}

fn info_flat(p: &[f64], v: &[f64], ny: usize) -> f64 {
    let mut q = vec![0.0; ny];
    for (x, &px) in p.iter().enumerate() {
        for y in 0..ny {
            q[y] += px * v[x * ny + y];
        }
    }
    let mut total = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            total += px * kl(&v[x * ny..(x + 1) * ny], &q);
        }
    }
    total
}

fn divergence_flat(p: &[f64], v: &[f64], w: &[f64], ny: usize) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| px * kl(&v[x * ny..(x + 1) * ny], &w[x * ny..(x + 1) * ny]))
        .sum()
}

/// `argmin_V D(V||W|P) + mu I(P,V)`.
///
/// Since `I(P,V) = min_Q sum_x P(x) D(V(.|x)||Q)`, the problem is jointly
/// convex in `(V, Q)`. For fixed `Q` each row minimiser is
/// `v_x ∝ W(.|x)^{1/(1+mu)} Q^{mu/(1+mu)}` with value `-(1+mu) log2 Z_x(Q)`,
/// leaving a smooth convex problem in `Q` that mirror descent solves.
fn lagrangian_argmin(w: &Dmc, p: &[f64], mu: f64, warm: Vec<f64>, tol: f64) -> Vec<f64> {
    let ny = w.output_size();
    let nx = w.input_size();
    let flat_w: Vec<f64> = w.rows().flatten().copied().collect();
    if mu <= 0.0 {
        return flat_w;
    }
    let (s, t) = (1.0 / (1.0 + mu), mu / (1.0 + mu));
    let lw: Vec<f64> = flat_w.iter().map(|v| v.ln()).collect();
    let rows_at = |q: &[f64], out: &mut Vec<f64>| -> Vec<f64> {
        // returns ln Z_x per row and writes v into `out`
        let lq: Vec<f64> = q.iter().map(|v| v.ln()).collect();
        let mut ln_z = vec![0.0; nx];
        for x in 0..nx {
            if p[x] <= 0.0 {
                out[x * ny..(x + 1) * ny].copy_from_slice(&flat_w[x * ny..(x + 1) * ny]);
                continue;
            }
            let logs: Vec<f64> = (0..ny)
                .map(|y| {
                    if flat_w[x * ny + y] > 0.0 && q[y] > 0.0 {
                        s * lw[x * ny + y] + t * lq[y]
                    } else {
                        f64::NEG_INFINITY
                    }
                })
                .collect();
            let l = log_sum_exp(&logs);
            ln_z[x] = l;
            for y in 0..ny {
                out[x * ny + y] = (logs[y] - l).exp();
            }
        }
        ln_z
    };
    let mut q0 = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            q0[y] += p[x] * warm[x * ny + y];
        }
    }
    let mut scratch = vec![0.0; nx * ny];
    let m = simplex_minimize(
        q0,
        |q, grad| {
            let ln_z = rows_at(q, &mut scratch);
            grad.iter_mut().for_each(|g| *g = 0.0);
            let mut value = 0.0;
            for x in 0..nx {
                if p[x] <= 0.0 {
                    continue;
                }
                if !ln_z[x].is_finite() {
                    return f64::INFINITY;
                }
                value -= p[x] * (1.0 + mu) * ln_z[x] / LN2;
                for y in 0..ny {
                    if q[y] > 0.0 {
                        grad[y] -= p[x] * mu * scratch[x * ny + y] / (q[y] * LN2);
                    }
                }
            }
            value
        },
        tol,
        100_000,
    );
    let mut v = vec![0.0; nx * ny];
    rows_at(&m.x, &mut v);
    v
}

/// Primal evaluation over a grid of input distributions followed by local
/// refinement. Restricted to at most three inputs.
pub fn sphere_packing_primal(w: &Dmc, r: RatePoint, tol: f64) -> Result<ExponentResult> {
    check_tol(tol)?;
    let nx = w.input_size();
    if nx > PRIMAL_MAX_INPUTS {
        return Err(Error::Precondition(format!(
            "primal solver handles at most {PRIMAL_MAX_INPUTS} inputs, got {nx}"
        )));
    }
    let cap = capacity(w, tol.min(1e-9))?;
    if r.bits() >= cap.capacity_bits {
        return Ok(trivial(w, cap.input, ExponentMethod::PrimalGrid, r));
    }
    let rate = r.bits();
    let steps = match nx {
        1 | 2 => 50,
        _ => 20,
    };
    let eval = |p: &[f64]| primal_inner(w, p, rate, SCAN).0;

    let mut best_p = vec![1.0];
    let mut best = f64::NEG_INFINITY;
    for p in compositions(nx, steps) {
        let v = eval(&p);
        if v > best {
            best = v;
            best_p = p;
        }
    }
    let h = 1.0 / steps as f64;
    if nx == 2 {
        let lo = (best_p[0] - h).max(0.0);
        let hi = (best_p[0] + h).min(1.0);
        let (a, neg, _) = golden_min(|a| -eval(&[a, 1.0 - a]), lo, hi, 1e-7);
        if -neg > best {
            best_p = vec![a, 1.0 - a];
        }
    } else if nx == 3 {
        let mut step = h;
        while step > 1e-7 {
            let mut improved = false;
            for i in 0..nx {
                for j in 0..nx {
                    if i == j || best_p[i] <= 0.0 {
                        continue;
                    }
                    let mut cand = best_p.clone();
                    let d = step.min(cand[i]);
                    cand[i] -= d;
                    cand[j] += d;
                    let v = eval(&cand);
                    if v > best {
                        best = v;
                        best_p = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    let (value, v) = primal_inner(w, &best_p, rate, FINE);
    let rows = v.chunks(w.output_size()).map(|c| c.to_vec()).collect();
    let channel = Dmc::from_rows_normalized(rows)?;
    let info = mutual_information_unchecked(&best_p, &channel);
    Ok(ExponentResult {
        value_bits: value,
        optimizing_channel: channel,
        optimizing_input: InputDistribution::new_unchecked(best_p),
        method: ExponentMethod::PrimalGrid,
        gap_estimate: 0.0,
        rho: None,
        constraint_bits: info,
        rate_bits: rate,
    })
}

/// All probability vectors of length `k` with entries in `{0, 1/n, ..., 1}`.
fn compositions(k: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / n as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(k - 1, left - c, n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, n, &mut Vec::new(), &mut out);
    out
}
