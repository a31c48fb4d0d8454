//! Information density, mutual information, information variances and
//! divergences. All quantities are in bits.

use super::{Dmc, InputDistribution};
use crate::error::{Error, Result};

/// Output distribution `PW(y) = sum_x P(x) W(y|x)`.
pub fn output_distribution(p: &InputDistribution, w: &Dmc) -> Vec<f64> {
    let mut q = vec![0.0; w.output_size()];
    for (x, row) in w.rows().enumerate() {
        let px = p.probs()[x];
        if px > 0.0 {
            for (qy, &wy) in q.iter_mut().zip(row) {
                *qy += px * wy;
            }
        }
    }
    q
}

/// Per-symbol density table `i(x;y) = log2 W(y|x)/PW(y)`.
///
/// Entries for outputs with `PW(y) = 0` are NaN (never observable under `P`);
/// entries with `W(y|x) = 0 < PW(y)` are `-inf`.
#[derive(Debug, Clone)]
pub struct DensityTable {
    output_size: usize,
    values: Vec<f64>,
    output_dist: Vec<f64>,
}

impl DensityTable {
    pub fn new(p: &InputDistribution, w: &Dmc) -> Result<Self> {
        p.check_compatible(w)?;
        let output_dist = output_distribution(p, w);
        let mut values = Vec::with_capacity(w.input_size() * w.output_size());
        for x in 0..w.input_size() {
            for (y, &q) in output_dist.iter().enumerate() {
                let wxy = w.prob(x, y);
                values.push(if q <= 0.0 {
                    f64::NAN
                } else if wxy <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (wxy / q).log2()
                });
            }
        }
        Ok(DensityTable {
            output_size: w.output_size(),
            values,
            output_dist,
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.output_size + y]
    }

    pub fn output_dist(&self) -> &[f64] {
        &self.output_dist
    }

    pub fn input_size(&self) -> usize {
        self.values.len() / self.output_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `max_x i(x;y)` for each output.
    pub fn column_max(&self) -> Vec<f64> {
        (0..self.output_size)
            .map(|y| {
                (0..self.input_size())
                    .map(|x| self.get(x, y))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

/// Sequence information density `sum_j log2 W(y_j|x_j) / PW(y_j)`.
pub fn information_density(
    p: &InputDistribution,
    w: &Dmc,
    x_seq: &[usize],
    y_seq: &[usize],
) -> Result<f64> {
    if x_seq.is_empty() || x_seq.len() != y_seq.len() {
        return Err(Error::ShapeMismatch(format!(
            "sequences must be nonempty and of equal length (got {} and {})",
            x_seq.len(),
            y_seq.len()
        )));
    }
    let table = DensityTable::new(p, w)?;
    let mut total = 0.0;
    for (&x, &y) in x_seq.iter().zip(y_seq) {
        if x >= w.input_size() || y >= w.output_size() {
            return Err(Error::ShapeMismatch(format!("symbol pair ({x}, {y}) outside the alphabets")));
        }
        if table.output_dist[y] <= 0.0 {
            return Err(Error::ImpossibleOutput { symbol: y });
        }
        total += table.get(x, y);
    }
    Ok(total)
}

/// `I(P, W)` with the `0 log 0 = 0` convention.
pub fn mutual_information(p: &InputDistribution, w: &Dmc) -> Result<f64> {
    p.check_compatible(w)?;
    Ok(mutual_information_unchecked(p.probs(), w))
}

pub(crate) fn mutual_information_unchecked(p: &[f64], w: &Dmc) -> f64 {
    let mut q = vec![0.0; w.output_size()];
    for (x, row) in w.rows().enumerate() {
        for (qy, &wy) in q.iter_mut().zip(row) {
            *qy += p[x] * wy;
        }
    }
    let mut total = 0.0;
    for (x, row) in w.rows().enumerate() {
        if p[x] <= 0.0 {
            continue;
        }
        let mut d = 0.0;
        for (&wy, &qy) in row.iter().zip(&q) {
            if wy > 0.0 {
                d += wy * (wy / qy).log2();
            }
        }
        total += p[x] * d;
    }
    total.max(0.0)
}

/// Unconditional and conditional information variances `(U, V)` in bits².
pub fn information_variances(p: &InputDistribution, w: &Dmc) -> Result<(f64, f64)> {
    let table = DensityTable::new(p, w)?;
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut conditional = 0.0;
    for x in 0..w.input_size() {
        let px = p.probs()[x];
        if px <= 0.0 {
            continue;
        }
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for y in 0..w.output_size() {
            let wxy = w.prob(x, y);
            if wxy > 0.0 {
                let i = table.get(x, y);
                m1 += wxy * i;
                m2 += wxy * i * i;
            }
        }
        mean += px * m1;
        second += px * m2;
        conditional += px * (m2 - m1 * m1).max(0.0);
    }
    let unconditional = (second - mean * mean).max(0.0);
    Ok((unconditional, conditional))
}

/// `D(V(.|x) || W(.|x))` in bits; `+inf` when `V(.|x)` is not absolutely
/// continuous with respect to `W(.|x)`.
pub fn kl_row(v: &Dmc, w: &Dmc, x: usize) -> Result<f64> {
    v.same_alphabets(w)?;
    if x >= v.input_size() {
        return Err(Error::ShapeMismatch(format!("input {x} outside the alphabet")));
    }
    Ok(kl(v.row(x), w.row(x)))
}

/// Conditional divergence `D(V || W | P) = sum_x P(x) D(V(.|x) || W(.|x))`.
pub fn conditional_kl(v: &Dmc, w: &Dmc, p: &InputDistribution) -> Result<f64> {
    v.same_alphabets(w)?;
    p.check_compatible(w)?;
    let mut total = 0.0;
    for (x, &px) in p.probs().iter().enumerate() {
        if px > 0.0 {
            total += px * kl(v.row(x), w.row(x));
        }
    }
    Ok(total)
}

/// Divergence between two probability vectors, in bits.
pub fn kl(v: &[f64], w: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in v.iter().zip(w) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).log2();
        }
    }
    d.max(0.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |t: f64| if t > 0.0 { -t * t.log2() } else { 0.0 };
    h(p) + h(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform2() -> InputDistribution {
        InputDistribution::uniform(2)
    }

    #[test]
    fn density_examples() {
        let w = Dmc::bsc(0.1).unwrap();
        let one = information_density(&uniform2(), &w, &[0], &[0]).unwrap();
        assert_abs_diff_eq!(one, (0.9f64 / 0.5).log2(), epsilon = 1e-15);
        assert_abs_diff_eq!(one, 0.8480, epsilon = 1e-4);
        let two = information_density(&uniform2(), &w, &[0, 0], &[0, 0]).unwrap();
        assert_abs_diff_eq!(two, 2.0 * one, epsilon = 1e-15);

        // W(y|x) = PW(y) gives zero density
        let w = Dmc::bsc(0.5).unwrap();
        assert_eq!(information_density(&uniform2(), &w, &[1], &[0]).unwrap(), 0.0);
    }

    #[test]
    fn density_sentinels_and_errors() {
        let z = Dmc::z_channel(0.3).unwrap();
        // y = 1 impossible from x = 0 but possible under P
        let d = information_density(&uniform2(), &z, &[0], &[1]).unwrap();
        assert_eq!(d, f64::NEG_INFINITY);
        // y = 1 impossible under a point mass on x = 0
        let p = InputDistribution::point_mass(2, 0);
        assert!(matches!(
            information_density(&p, &z, &[0], &[1]),
            Err(Error::ImpossibleOutput { symbol: 1 })
        ));
        assert!(information_density(&uniform2(), &z, &[0], &[0, 1]).is_err());
        assert!(information_density(&uniform2(), &z, &[], &[]).is_err());
        assert!(information_density(&InputDistribution::uniform(3), &z, &[0], &[0]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let i = mutual_information(&uniform2(), &Dmc::bsc(0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(i, 1.0 - binary_entropy(0.1), epsilon = 1e-14);
        assert_abs_diff_eq!(i, 0.531004, epsilon = 1e-6);
        let p = InputDistribution::point_mass(2, 1);
        assert_eq!(mutual_information(&p, &Dmc::bsc(0.1).unwrap()).unwrap(), 0.0);
        let id = Dmc::identity(4).unwrap();
        assert_abs_diff_eq!(
            mutual_information(&InputDistribution::uniform(4), &id).unwrap(),
            2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn variance_examples() {
        let (u, v) = information_variances(&uniform2(), &Dmc::bsc(0.5).unwrap()).unwrap();
        assert_eq!((u, v), (0.0, 0.0));
        let (u, v) = information_variances(&InputDistribution::uniform(3), &Dmc::identity(3).unwrap()).unwrap();
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);

        let p = 0.11f64;
        let closed = p * (1.0 - p) * ((1.0 - p) / p).log2().powi(2);
        let (u, v) = information_variances(&uniform2(), &Dmc::bsc(p).unwrap()).unwrap();
        assert_abs_diff_eq!(u, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(v, closed, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.8907, epsilon = 1e-4);
    }

    #[test]
    fn divergence_examples() {
        let v = Dmc::bsc(0.2).unwrap();
        let w = Dmc::bsc(0.1).unwrap();
        let expected = 0.2 * (0.2f64 / 0.1).log2() + 0.8 * (0.8f64 / 0.9).log2();
        for x in 0..2 {
            assert_abs_diff_eq!(kl_row(&v, &w, x).unwrap(), expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(expected, 0.0641, epsilon = 1e-4);
        assert_abs_diff_eq!(conditional_kl(&v, &w, &uniform2()).unwrap(), expected, epsilon = 1e-15);
        assert_eq!(conditional_kl(&w, &w, &InputDistribution::new(vec![0.3, 0.7]).unwrap()).unwrap(), 0.0);

        let z = Dmc::z_channel(0.2).unwrap();
        assert_eq!(kl_row(&w, &z, 0).unwrap(), f64::INFINITY);
        assert!(kl_row(&w, &Dmc::bec(0.1).unwrap(), 0).is_err());
    }
}
