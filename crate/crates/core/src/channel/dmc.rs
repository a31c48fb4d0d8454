use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;

/// A discrete memoryless channel `W(y|x)` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDmc", into = "RawDmc")]
pub struct Dmc {
    input_size: usize,
    output_size: usize,
    matrix: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDmc {
    input_size: usize,
    output_size: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<RawDmc> for Dmc {
    type Error = Error;

    fn try_from(raw: RawDmc) -> Result<Self> {
        let dmc = Dmc::from_rows(raw.matrix)?;
        if dmc.input_size != raw.input_size || dmc.output_size != raw.output_size {
            return Err(Error::InvalidChannel(format!(
                "declared {}x{} but matrix is {}x{}",
                raw.input_size, raw.output_size, dmc.input_size, dmc.output_size
            )));
        }
        Ok(dmc)
    }
}

impl From<Dmc> for RawDmc {
    fn from(d: Dmc) -> Self {
        RawDmc {
            input_size: d.input_size,
            output_size: d.output_size,
            matrix: d.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl Dmc {
    /// Build and validate a channel from its rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("no input symbols".into()));
        }
        let output_size = rows[0].len();
        if output_size == 0 {
            return Err(Error::InvalidChannel("no output symbols".into()));
        }
        let mut matrix = Vec::with_capacity(input_size * output_size);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            for (y, &w) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::InvalidChannel(format!("W({y}|{x}) = {w} outside [0, 1]")));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChannel(format!("row {x} sums to {sum}")));
            }
            matrix.extend_from_slice(row);
        }
        Ok(Dmc {
            input_size,
            output_size,
            matrix,
        })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; outputs are ordered `0, 1, e`.
    pub fn bec(e: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0 - e, 0.0, e], vec![0.0, 1.0 - e, e]])
    }

    /// Z-channel: input 0 is noiseless, input 1 flips to 0 with probability `q`.
    pub fn z_channel(q: f64) -> Result<Self> {
        Self::from_rows(vec![vec![1.0, 0.0], vec![q, 1.0 - q]])
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::from_rows(
            (0..k)
                .map(|x| (0..k).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    /// Rows re-normalised so that they sum to one exactly; used by solvers
    /// that construct channels numerically.
    pub(crate) fn from_rows_normalized(mut rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &mut rows {
            for w in row.iter_mut() {
                if *w < 0.0 {
                    *w = 0.0;
                }
            }
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|w| *w /= s);
            }
        }
        Self::from_rows(rows)
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.matrix[x * self.output_size + y]
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.matrix[x * self.output_size..(x + 1) * self.output_size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.matrix.chunks_exact(self.output_size)
    }

    pub fn column(&self, y: usize) -> Vec<f64> {
        (0..self.input_size).map(|x| self.prob(x, y)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn same_alphabets(&self, other: &Dmc) -> Result<()> {
        if self.input_size != other.input_size || self.output_size != other.output_size {
            return Err(Error::ShapeMismatch(format!(
                "channels are {}x{} and {}x{}",
                self.input_size, self.output_size, other.input_size, other.output_size
            )));
        }
        Ok(())
    }
}

impl FromStr for Dmc {
    type Err = Error;

    /// Parses the builtin families `bsc:p`, `bec:p`, `zchan:q` and `identity:k`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("channel spec `{s}` is not of the form kind:param")))?;
        let real = || {
            arg.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad parameter in `{s}`: {e}")))
        };
        match kind.trim() {
            "bsc" => Dmc::bsc(real()?),
            "bec" => Dmc::bec(real()?),
            "zchan" => Dmc::z_channel(real()?),
            "identity" => {
                let k = arg
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad size in `{s}`: {e}")))?;
                Dmc::identity(k)
            }
            other => Err(Error::Parse(format!("unknown channel family `{other}`"))),
        }
    }
}

impl fmt::Display for Dmc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, row) in self.rows().enumerate() {
            if x > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|w| format!("{w:.6}")).collect();
            write!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Either a builtin family string or an explicit matrix, as accepted in
/// configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Builtin(String),
    Matrix(Dmc),
}

impl ChannelSpec {
    pub fn resolve(&self) -> Result<Dmc> {
        match self {
            ChannelSpec::Builtin(s) => s.parse(),
            ChannelSpec::Matrix(d) => Ok(d.clone()),
        }
    }
}

/// Load a channel from a builtin spec string or a path to a JSON channel file.
pub fn load_channel(spec: &str) -> Result<Dmc> {
    if spec.contains(':') && !std::path::Path::new(spec).exists() {
        return spec.parse();
    }
    let text = std::fs::read_to_string(spec)?;
    Ok(serde_json::from_str(&text)?)
}

/// A probability vector on the input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        InputDistribution::new(probs)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(p: InputDistribution) -> Self {
        p.probs
    }
}

impl InputDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidDistribution(format!("entry {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {sum}")));
        }
        Ok(InputDistribution { probs })
    }

    /// Normalises a nonnegative weight vector.
    pub(crate) fn from_weights(mut w: Vec<f64>) -> Result<Self> {
        w.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = w.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidDistribution("zero total weight".into()));
        }
        w.iter_mut().for_each(|v| *v /= s);
        Self::new(w)
    }

    pub fn uniform(size: usize) -> Self {
        InputDistribution {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point_mass(size: usize, at: usize) -> Self {
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        InputDistribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub(crate) fn check_compatible(&self, w: &Dmc) -> Result<()> {
        if self.probs.len() != w.input_size() {
            return Err(Error::ShapeMismatch(format!(
                "input distribution has {} entries, channel has {} inputs",
                self.probs.len(),
                w.input_size()
            )));
        }
        Ok(())
    }
}
