//! Conditional typicality and the change-of-measure ingredients: the typical
//! set membership test, its probability lower bound, the likelihood-ratio
//! floor on typical outputs, `gamma'` and the Pinsker check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::info::kl;
use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::rng::{domain, sample_index, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl TypicalityParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        if gamma1 > 0.0 && gamma2 > 0.0 {
            Ok(TypicalityParams { gamma1, gamma2 })
        } else {
            Err(Error::Precondition(format!(
                "typicality parameters must be positive, got ({gamma1}, {gamma2})"
            )))
        }
    }
}

/// Joint counts `N(x, y)` of a pair of sequences.
#[derive(Debug, Clone)]
pub struct JointCounts {
    ny: usize,
    len: usize,
    counts: Vec<u64>,
}

impl JointCounts {
    pub fn new(x_seq: &[usize], y_seq: &[usize], v: &Dmc) -> Result<Self> {
        if x_seq.is_empty() || x_seq.len() != y_seq.len() {
            return Err(Error::ShapeMismatch(format!(
                "sequences must be nonempty and of equal length (got {} and {})",
                x_seq.len(),
                y_seq.len()
            )));
        }
        let (nx, ny) = (v.input_size(), v.output_size());
        let mut counts = vec![0u64; nx * ny];
        for (&x, &y) in x_seq.iter().zip(y_seq) {
            if x >= nx || y >= ny {
                return Err(Error::ShapeMismatch(format!("symbol pair ({x}, {y}) outside the alphabets")));
            }
            counts[x * ny + y] += 1;
        }
        Ok(JointCounts { ny, len: x_seq.len(), counts })
    }

    fn empty(nx: usize, ny: usize, len: usize) -> Self {
        JointCounts { ny, len, counts: vec![0; nx * ny] }
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.counts[x * self.ny + y]
    }

    pub fn input_count(&self, x: usize) -> u64 {
        self.counts[x * self.ny..(x + 1) * self.ny].iter().sum()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn nx(&self) -> usize {
        self.counts.len() / self.ny
    }

    /// Every input with relative frequency at least `gamma2` has empirical
    /// conditional within `gamma1` of `V(.|x)` in every coordinate.
    pub fn is_typical(&self, v: &Dmc, params: &TypicalityParams) -> bool {
        let l = self.len as f64;
        (0..self.nx()).all(|x| {
            let nx = self.input_count(x);
            if (nx as f64) / l < params.gamma2 {
                return true;
            }
            (0..self.ny).all(|y| (self.get(x, y) as f64 / nx as f64 - v.prob(x, y)).abs() < params.gamma1)
        })
    }

    /// `sum_{x,y} N(x,y) log2 (W(y|x) / V(y|x))`, or an error when `V^l` vanishes.
    fn log_ratio(&self, v: &Dmc, w: &Dmc) -> Result<f64> {
        let mut total = 0.0;
        for x in 0..self.nx() {
            for y in 0..self.ny {
                let n = self.get(x, y);
                if n == 0 {
                    continue;
                }
                let (vp, wp) = (v.prob(x, y), w.prob(x, y));
                if vp <= 0.0 {
                    return Err(Error::Precondition("V^l(y^l|x^l) = 0".into()));
                }
                total += n as f64 * (wp / vp).log2();
            }
        }
        Ok(total)
    }

    fn input_type(&self) -> Vec<f64> {
        (0..self.nx()).map(|x| self.input_count(x) as f64 / self.len as f64).collect()
    }
}

pub fn is_typical(x_seq: &[usize], y_seq: &[usize], v: &Dmc, params: &TypicalityParams) -> Result<bool> {
    Ok(JointCounts::new(x_seq, y_seq, v)?.is_typical(v, params))
}

/// `1 - 2 |X| |Y| exp(-2 gamma1^2 gamma2 l)` with the natural exponential.
/// May be negative, in which case the bound is vacuous.
pub fn typicality_bound(params: &TypicalityParams, l: usize, x_size: usize, y_size: usize) -> f64 {
    let g1 = params.gamma1;
    1.0 - 2.0 * (x_size * y_size) as f64 * (-2.0 * g1 * g1 * params.gamma2 * l as f64).exp()
}

/// `sum_{(x,y): V(y|x) > 0} |log2 V(y|x) / W(y|x)|`; `+inf` when `V` is not
/// absolutely continuous with respect to `W`.
pub fn gamma_prime(v: &Dmc, w: &Dmc) -> Result<f64> {
    v.same_alphabets(w)?;
    let mut total = 0.0;
    for x in 0..v.input_size() {
        for y in 0..v.output_size() {
            let (a, b) = (v.prob(x, y), w.prob(x, y));
            if a > 0.0 {
                if b <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                total += (a / b).log2().abs();
            }
        }
    }
    Ok(total)
}

/// Both sides of the likelihood-ratio floor, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `log2 W^l(y|x) - log2 V^l(y|x) >= -l (D(V||W|P_x) + (gamma1 + 2 gamma2) gamma')`
/// for a typical pair, where `P_x` is the type of `x_seq`.
pub fn likelihood_ratio_floor(
    x_seq: &[usize],
    y_seq: &[usize],
    v: &Dmc,
    w: &Dmc,
    params: &TypicalityParams,
) -> Result<FloorCheck> {
    v.same_alphabets(w)?;
    let counts = JointCounts::new(x_seq, y_seq, v)?;
    if !counts.is_typical(v, params) {
        return Err(Error::Precondition("output sequence is not typical".into()));
    }
    let gp = gamma_prime(v, w)?;
    floor_from_counts(&counts, v, w, params, gp)
}

fn floor_from_counts(
    counts: &JointCounts,
    v: &Dmc,
    w: &Dmc,
    params: &TypicalityParams,
    gp: f64,
) -> Result<FloorCheck> {
    let lhs = counts.log_ratio(v, w)?;
    let p = counts.input_type();
    let d: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| px * kl(v.row(x), w.row(x)))
        .sum();
    let rhs = -(counts.len as f64) * (d + (params.gamma1 + 2.0 * params.gamma2) * gp);
    Ok(FloorCheck { lhs, rhs, holds: lhs >= rhs - 1e-9 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinskerCheck {
    /// `sum_y |V(y|x) - W(y|x)|` per input.
    pub total_variation: Vec<f64>,
    pub kl: Vec<f64>,
    /// `sqrt(2 ln 2 D(V(.|x) || W(.|x)))` per input.
    pub bound: Vec<f64>,
    pub holds: bool,
}

pub fn pinsker_gap_check(v: &Dmc, w: &Dmc) -> Result<PinskerCheck> {
    v.same_alphabets(w)?;
    let nx = v.input_size();
    let total_variation: Vec<f64> =
        (0..nx).map(|x| v.row(x).iter().zip(w.row(x)).map(|(a, b)| (a - b).abs()).sum()).collect();
    let kls: Vec<f64> = (0..nx).map(|x| kl(v.row(x), w.row(x))).collect();
    let bound: Vec<f64> = kls.iter().map(|d| (2.0 * std::f64::consts::LN_2 * d).sqrt()).collect();
    let holds = total_variation.iter().zip(&bound).all(|(t, b)| *t <= b + 1e-12);
    Ok(PinskerCheck { total_variation, kl: kls, bound, holds })
}

/// Outcome of sampling `y^l ~ V^l(.|x^l)` repeatedly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub bound: f64,
    pub empirical: f64,
    pub samples: usize,
    pub typical: usize,
    /// Typical samples on which the likelihood-ratio floor failed.
    pub floor_violations: usize,
    pub std_error: f64,
    /// The bound uses the natural exponential.
    pub exp_base: String,
}

/// Samples outputs of `V` for a fixed input sequence, counting typical
/// samples and floor violations against `W`. Deterministic in `seed`.
pub fn sample_coverage(
    x_seq: &[usize],
    v: &Dmc,
    w: &Dmc,
    params: &TypicalityParams,
    samples: usize,
    seed: u64,
) -> Result<CoverageReport> {
    v.same_alphabets(w)?;
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if x_seq.is_empty() || x_seq.iter().any(|&x| x >= v.input_size()) {
        return Err(Error::ShapeMismatch("input sequence empty or outside the alphabet".into()));
    }
    let gp = gamma_prime(v, w)?;
    let key = StreamKey::new(seed, domain::SAMPLE);
    let (typical, violations) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut stream = key.child(i as u64).stream();
            let mut counts = JointCounts::empty(v.input_size(), v.output_size(), x_seq.len());
            for &x in x_seq {
                let y = sample_index(v.row(x), stream.next_f64());
                counts.counts[x * counts.ny + y] += 1;
            }
            if !counts.is_typical(v, params) {
                return (0usize, 0usize);
            }
            let ok = floor_from_counts(&counts, v, w, params, gp).map(|f| f.holds).unwrap_or(false);
            (1, usize::from(!ok))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let empirical = typical as f64 / samples as f64;
    Ok(CoverageReport {
        bound: typicality_bound(params, x_seq.len(), v.input_size(), v.output_size()),
        empirical,
        samples,
        typical,
        floor_violations: violations,
        std_error: crate::stats::standard_error(empirical, samples as u64),
        exp_base: "e".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(g: f64) -> TypicalityParams {
        TypicalityParams::new(g, g).unwrap()
    }

    #[test]
    fn membership_examples() {
        let v = Dmc::bsc(0.1).unwrap();
        let x = vec![0; 10];
        let mut y = vec![0; 10];
        y[0] = 1;
        assert!(is_typical(&x, &y, &v, &params(0.05)).unwrap());
        for j in 0..4 {
            y[j] = 1;
        }
        assert!(!is_typical(&x, &y, &v, &TypicalityParams::new(0.05, 0.1).unwrap()).unwrap());
        // every input rare: vacuous
        assert!(is_typical(&x, &y, &v, &TypicalityParams::new(0.05, 1.5).unwrap()).unwrap());
        assert!(is_typical(&x, &y[..3], &v, &params(0.1)).is_err());
    }

    #[test]
    fn bound_examples() {
        assert_abs_diff_eq!(typicality_bound(&params(0.1), 5000, 2, 2), 0.9996368, epsilon = 1e-7);
        assert_abs_diff_eq!(typicality_bound(&params(0.1), 1000, 2, 2), -0.0826823, epsilon = 1e-7);
        assert!(typicality_bound(&params(100.0), 10, 2, 2) > 1.0 - 1e-12);
    }

    #[test]
    fn gamma_prime_and_pinsker_examples() {
        let v = Dmc::bsc(0.2).unwrap();
        let w = Dmc::bsc(0.1).unwrap();
        assert_abs_diff_eq!(gamma_prime(&v, &w).unwrap(), 2.33985, epsilon = 1e-5);
        assert_eq!(gamma_prime(&w, &w).unwrap(), 0.0);
        assert_eq!(gamma_prime(&w, &Dmc::z_channel(0.2).unwrap()).unwrap(), f64::INFINITY);

        let p = pinsker_gap_check(&v, &w).unwrap();
        assert!(p.holds);
        assert_abs_diff_eq!(p.total_variation[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.bound[0], 0.298003, epsilon = 1e-6);
    }

    #[test]
    fn floor_identity_and_precondition() {
        let w = Dmc::bsc(0.1).unwrap();
        let x = vec![0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let y = x.clone();
        let f = likelihood_ratio_floor(&x, &y, &w, &w, &params(0.5)).unwrap();
        assert_eq!((f.lhs, f.rhs, f.holds), (0.0, 0.0, true));
        assert!(likelihood_ratio_floor(&x, &y, &w, &w, &params(0.05)).is_err());
    }
}
