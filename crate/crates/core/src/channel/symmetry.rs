use super::Dmc;

const EQ_TOL: f64 = 1e-12;

/// Result of the output-symmetry test: the partition of output symbols when
/// the channel is output symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSymmetry {
    pub symmetric: bool,
    pub partition: Vec<Vec<usize>>,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn approx_eq(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= EQ_TOL)
}

/// Output symmetry: outputs split into groups such that within each group
/// every row of the submatrix is a permutation of every other row and every
/// column a permutation of every other column.
///
/// Columns are grouped by their sorted entries; a valid partition exists iff
/// this coarsest grouping passes, since concatenating permuted rows of valid
/// subgroups keeps them permutations of each other.
pub fn output_symmetry(w: &Dmc) -> OutputSymmetry {
    let columns: Vec<Vec<f64>> = (0..w.output_size()).map(|y| sorted(w.column(y))).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for y in 0..w.output_size() {
        match groups.iter_mut().find(|g| approx_eq(&columns[g[0]], &columns[y])) {
            Some(g) => g.push(y),
            None => groups.push(vec![y]),
        }
    }
    let symmetric = groups.iter().all(|g| {
        let reference = sorted(g.iter().map(|&y| w.prob(0, y)).collect());
        (1..w.input_size()).all(|x| approx_eq(&reference, &sorted(g.iter().map(|&y| w.prob(x, y)).collect())))
    });
    OutputSymmetry {
        symmetric,
        partition: if symmetric { groups } else { Vec::new() },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exhaustive oracle: try every set partition of the outputs.
    fn brute_force(w: &Dmc) -> bool {
        fn partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
            if items.is_empty() {
                return vec![vec![]];
            }
            let (first, rest) = (items[0], &items[1..]);
            let mut out = Vec::new();
            for p in partitions(rest) {
                for i in 0..p.len() {
                    let mut q = p.clone();
                    q[i].push(first);
                    out.push(q);
                }
                let mut q = p.clone();
                q.push(vec![first]);
                out.push(q);
            }
            out
        }
        let outputs: Vec<usize> = (0..w.output_size()).collect();
        partitions(&outputs).iter().any(|part| {
            part.iter().all(|g| {
                let rows: Vec<Vec<f64>> = (0..w.input_size())
                    .map(|x| sorted(g.iter().map(|&y| w.prob(x, y)).collect()))
                    .collect();
                let cols: Vec<Vec<f64>> = g.iter().map(|&y| sorted(w.column(y))).collect();
                rows.iter().all(|r| approx_eq(r, &rows[0])) && cols.iter().all(|c| approx_eq(c, &cols[0]))
            })
        })
    }

    #[test]
    fn known_channels() {
        let s = output_symmetry(&Dmc::bsc(0.2).unwrap());
        assert!(s.symmetric);
        assert_eq!(s.partition, vec![vec![0, 1]]);

        let s = output_symmetry(&Dmc::bec(0.3).unwrap());
        assert!(s.symmetric);
        assert_eq!(s.partition, vec![vec![0, 1], vec![2]]);

        let z = Dmc::z_channel(0.3).unwrap();
        assert!(!output_symmetry(&z).symmetric);
        assert!(!brute_force(&z));
        assert!(brute_force(&Dmc::bec(0.3).unwrap()));
    }

    #[test]
    fn agrees_with_exhaustive_partition_search() {
        let cases = vec![
            vec![vec![0.5, 0.3, 0.2], vec![0.3, 0.5, 0.2]],
            vec![vec![0.5, 0.3, 0.2], vec![0.2, 0.5, 0.3]],
            vec![vec![0.6, 0.1, 0.1, 0.2], vec![0.1, 0.6, 0.2, 0.1]],
            vec![vec![0.6, 0.1, 0.3], vec![0.1, 0.6, 0.3], vec![0.3, 0.1, 0.6]],
            vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.7, 0.2], vec![0.2, 0.1, 0.7]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
        ];
        for rows in cases {
            let w = Dmc::from_rows(rows).unwrap();
            assert_eq!(output_symmetry(&w).symmetric, brute_force(&w), "{w}");
        }
    }
}
