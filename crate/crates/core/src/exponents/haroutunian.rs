//! Haroutunian exponent `min_{V : C(V) <= R} max_x D(V(.|x) || W(.|x))`.
//!
//! By the min-max form of capacity, `C(V) <= R` holds iff some output
//! distribution `Q` has `D(V(.|x) || Q) <= R` for every `x`. The exponent is
//! therefore `min_Q f(Q)` with `f(Q) = max_x e_x(Q)` and
//! `e_x(Q) = min { D(v || W(.|x)) : D(v || Q) <= R }`.
//! Each `e_x` is convex in `Q` and its minimiser is the geometric mixture
//! `v ∝ W(.|x)^{1-t} Q^t`, found by bisection on `t`. `f` is minimised by
//! mirror subgradient descent with `1/sqrt(k)` steps, which also yields a
//! lower bound from the subgradient inequality, and is then polished by
//! golden-section search on one- and two-dimensional output simplices.
//! Every candidate `V` is feasible by construction.

use super::optim::golden_min;
use super::sphere_packing::{sphere_packing_dual, Tilt};
use super::{ExponentMethod, ExponentResult, RatePoint};
use crate::channel::info::{kl, mutual_information_unchecked, output_distribution};
use crate::channel::{capacity, output_symmetry, Dmc, InputDistribution};
use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Default number of subgradient iterations.
pub const DEFAULT_ITERATIONS: usize = 10_000;

struct RowSolution {
    value: f64,
    v: Vec<f64>,
    /// Multiplier of the constraint `D(v||Q) <= R`.
    mu: f64,
}

/// `e_x(Q)`, or `None` when no `v` absolutely continuous with respect to
/// `W(.|x)` satisfies `D(v||Q) <= R`.
fn row_solution(w_row: &[f64], q: &[f64], rate: f64) -> Option<RowSolution> {
    if kl(w_row, q) <= rate {
        return Some(RowSolution { value: 0.0, v: w_row.to_vec(), mu: 0.0 });
    }
    let support: Vec<usize> = (0..q.len()).filter(|&y| w_row[y] > 0.0 && q[y] > 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let lw: Vec<f64> = support.iter().map(|&y| w_row[y].ln()).collect();
    let lq: Vec<f64> = support.iter().map(|&y| q[y].ln()).collect();
    let mut logs = vec![0.0; support.len()];
    let mut mixture = |t: f64, v: &mut [f64]| {
        for (l, (a, b)) in logs.iter_mut().zip(lw.iter().zip(&lq)) {
            *l = (1.0 - t) * a + t * b;
        }
        let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logs.iter().map(|l| (l - m).exp()).sum();
        v.iter_mut().for_each(|e| *e = 0.0);
        for (k, &y) in support.iter().enumerate() {
            v[y] = (logs[k] - m).exp() / z;
        }
    };
    let mut feasible = vec![0.0; q.len()];
    mixture(1.0, &mut feasible);
    if kl(&feasible, q) > rate {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut v = vec![0.0; q.len()];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        mixture(mid, &mut v);
        if kl(&v, q) <= rate {
            hi = mid;
            std::mem::swap(&mut feasible, &mut v);
        } else {
            lo = mid;
        }
    }
    let mu = hi / (1.0 - hi).max(1e-12);
    Some(RowSolution { value: kl(&feasible, w_row), v: feasible, mu })
}

struct Evaluation {
    value: f64,
    rows: Vec<RowSolution>,
    argmax: usize,
}

fn evaluate(w: &Dmc, q: &[f64], rate: f64) -> Option<Evaluation> {
    let mut rows = Vec::with_capacity(w.input_size());
    let mut argmax = 0;
    for x in 0..w.input_size() {
        let s = row_solution(w.row(x), q, rate)?;
        if s.value > rows.get(argmax).map_or(f64::NEG_INFINITY, |r: &RowSolution| r.value) {
            argmax = x;
        }
        rows.push(s);
    }
    Some(Evaluation { value: rows[argmax].value, rows, argmax })
}

/// Constraint violation `max_x -log2 Q(supp W(.|x)) - R`, the amount by which
/// the closest admissible row misses the rate.
fn violation(w: &Dmc, q: &[f64], rate: f64) -> (f64, usize) {
    let mut worst = (f64::NEG_INFINITY, 0);
    for x in 0..w.input_size() {
        let mass: f64 = w.row(x).iter().zip(q).filter(|(&a, _)| a > 0.0).map(|(_, &b)| b).sum();
        let v = -mass.log2() - rate;
        if v > worst.0 {
            worst = (v, x);
        }
    }
    worst
}

const INFEASIBLE: f64 = 1e6;

/// `f(Q)` extended to infeasible `Q` by a large constant plus the violation;
/// the extension stays unimodal along lines because the violation is convex.
fn objective(w: &Dmc, q: &[f64], rate: f64) -> f64 {
    evaluate(w, q, rate).map_or_else(|| INFEASIBLE + violation(w, q, rate).0, |e| e.value)
}

/// Haroutunian exponent with the default iteration budget.
pub fn haroutunian_exponent(w: &Dmc, r: RatePoint, tol: f64) -> Result<ExponentResult> {
    haroutunian_exponent_with(w, r, tol, DEFAULT_ITERATIONS)
}

pub fn haroutunian_exponent_with(
    w: &Dmc,
    r: RatePoint,
    tol: f64,
    iterations: usize,
) -> Result<ExponentResult> {
    super::sphere_packing::require_tol(tol)?;
    let cap = capacity(w, tol.min(1e-9))?;
    if r.bits() >= cap.capacity_bits {
        let mut res = super::sphere_packing::trivial_result(w, cap.input, ExponentMethod::Symmetric1d, r);
        res.constraint_bits = cap.capacity_bits;
        res.method = if output_symmetry(w).symmetric {
            ExponentMethod::Symmetric1d
        } else {
            ExponentMethod::OutputSubgradient
        };
        return Ok(res);
    }
    if output_symmetry(w).symmetric {
        return symmetric_1d(w, r);
    }
    general(w, r, tol, iterations)
}

/// Output-symmetric channels: the tilted family at the uniform input,
/// with the tilt chosen so that its capacity equals `R`.
fn symmetric_1d(w: &Dmc, r: RatePoint) -> Result<ExponentResult> {
    let rate = r.bits();
    let nx = w.input_size();
    let uniform = vec![1.0 / nx as f64; nx];
    let channel = |rho: f64| Tilt::new(w, rho).tilted_channel(&uniform);
    let info = |v: &Dmc| mutual_information_unchecked(&uniform, v);

    let mut hi = 1.0;
    while info(&channel(hi)?) > rate {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::LineSearch { what: "symmetric Haroutunian tilt", lo: hi / 2.0, hi });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if info(&channel(mid)?) <= rate {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    let row_max = |v: &Dmc| (0..nx).map(|x| kl(v.row(x), w.row(x))).fold(0.0, f64::max);
    let v = channel(hi)?;
    let value = row_max(&v);
    let other = row_max(&channel(lo)?);
    let c = info(&v);
    Ok(ExponentResult {
        value_bits: value,
        optimizing_channel: v,
        optimizing_input: InputDistribution::uniform(nx),
        method: ExponentMethod::Symmetric1d,
        gap_estimate: (other - value).abs(),
        rho: Some(hi),
        constraint_bits: c,
        rate_bits: rate,
    })
}

fn general(w: &Dmc, r: RatePoint, tol: f64, iterations: usize) -> Result<ExponentResult> {
    let rate = r.bits();
    let ny = w.output_size();

    // seed: output distribution of the sphere-packing tilted channel
    let fallback = output_distribution(&InputDistribution::uniform(w.input_size()), w);
    let mut q = match sphere_packing_dual(w, r, tol) {
        Ok(sp) => output_distribution(&sp.optimizing_input, &sp.optimizing_channel),
        Err(_) => fallback.clone(),
    };
    let uniform = 1.0 / ny as f64;
    q.iter_mut().for_each(|v| *v = 0.999 * *v + 0.001 * uniform);

    let mut best_q = q.clone();
    let mut best = f64::INFINITY;
    let mut lower = 0.0f64;
    for k in 1..=iterations {
        let Some(eval) = evaluate(w, &q, rate) else {
            // feasibility step on the most violated row
            let (_, x) = violation(w, &q, rate);
            let mass: f64 = w.row(x).iter().zip(&q).filter(|(&a, _)| a > 0.0).map(|(_, &b)| b).sum();
            let g: Vec<f64> = w.row(x).iter().map(|&a| if a > 0.0 { -1.0 / (mass * LN2) } else { 0.0 }).collect();
            mirror_step(&mut q, &g, k);
            continue;
        };
        if eval.value < best {
            best = eval.value;
            best_q = q.clone();
        }
        let row = &eval.rows[eval.argmax];
        let g: Vec<f64> = (0..ny)
            .map(|y| if q[y] > 0.0 { -row.mu * row.v[y] / (q[y] * LN2) } else { 0.0 })
            .collect();
        let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let inner: f64 = g.iter().zip(&q).map(|(a, b)| a * b).sum();
        lower = lower.max(eval.value + gmin - inner);
        if gmax - gmin <= 0.0 || best - lower <= tol * 1e-3 {
            break;
        }
        mirror_step(&mut q, &g, k);
    }
    if !best.is_finite() && ny > 3 {
        return Err(infinite(rate));
    }

    // polish on low-dimensional output simplices
    let mut gap = (best - lower).max(0.0);
    if ny == 2 {
        let (a, fa, (lo, hi)) = golden_min(|a| objective(w, &[a, 1.0 - a], rate), 0.0, 1.0, 1e-15);
        if fa < INFEASIBLE {
            gap = gap.min(bracket_spread(fa, &[objective(w, &[lo, 1.0 - lo], rate), objective(w, &[hi, 1.0 - hi], rate)]));
            if fa <= best {
                best = fa;
                best_q = vec![a, 1.0 - a];
            }
        }
    } else if ny == 3 {
        let inner = |a: f64| {
            let (b, fb, _) = golden_min(|b| objective(w, &[a, b, (1.0 - a - b).max(0.0)], rate), 0.0, 1.0 - a, 1e-12);
            (b, fb)
        };
        let (a, fa, (lo, hi)) = golden_min(|a| inner(a).1, 0.0, 1.0, 1e-12);
        if fa < INFEASIBLE {
            gap = gap.min(bracket_spread(fa, &[inner(lo).1, inner(hi).1]));
            if fa <= best {
                let (b, _) = inner(a);
                best = fa;
                best_q = vec![a, b, (1.0 - a - b).max(0.0)];
            }
        }
    }

    if !best.is_finite() {
        return Err(infinite(rate));
    }
    let eval = evaluate(w, &best_q, rate).ok_or_else(|| infinite(rate))?;
    let rows = eval.rows.into_iter().map(|s| s.v).collect();
    let v = Dmc::from_rows_normalized(rows)?;
    let c = capacity(&v, tol.min(1e-9))?;
    Ok(ExponentResult {
        value_bits: best,
        optimizing_channel: v,
        optimizing_input: c.input,
        method: ExponentMethod::OutputSubgradient,
        gap_estimate: gap,
        rho: None,
        constraint_bits: c.capacity_bits,
        rate_bits: rate,
    })
}

/// Variation of the objective across the feasible ends of the final bracket.
fn bracket_spread(best: f64, ends: &[f64]) -> f64 {
    ends.iter().filter(|&&e| e < INFEASIBLE).map(|&e| (e - best).abs()).fold(0.0, f64::max)
}

fn infinite(rate: f64) -> Error {
    Error::Precondition(format!(
        "Haroutunian exponent is infinite at rate {rate}: no channel of capacity at most R is absolutely continuous with respect to W"
    ))
}

/// Entropic subgradient step with size `0.5 / sqrt(k)` in log-probability.
fn mirror_step(q: &mut [f64], g: &[f64], k: usize) {
    let gmin = g.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(gmax - gmin > 0.0) {
        return;
    }
    let eta = 0.5 / ((k as f64).sqrt() * (gmax - gmin));
    let mut z = 0.0;
    for (qy, gy) in q.iter_mut().zip(g) {
        *qy *= (-eta * (gy - gmin)).exp();
        z += *qy;
    }
    q.iter_mut().for_each(|v| *v /= z);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_solution_is_feasible_and_tight() {
        let w = [0.7, 0.2, 0.1];
        let q = [0.2, 0.3, 0.5];
        let s = row_solution(&w, &q, 0.1).unwrap();
        assert!(kl(&s.v, &q) <= 0.1);
        assert!(kl(&s.v, &q) > 0.1 - 1e-9);
        assert!(s.mu > 0.0);
        // unconstrained case
        let s = row_solution(&w, &q, 10.0).unwrap();
        assert_eq!(s.value, 0.0);
        // disjoint supports
        assert!(row_solution(&[1.0, 0.0], &[0.0, 1.0], 0.5).is_none());
    }
}
