//! Resumable sweeps over `(n, T)` points.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{md_estimate, message_count, stream_length, RunRecord, Schedule};
use crate::channel::capacity;
use crate::codec::{Simulator, StreamingConfig};
use crate::error::Result;
use crate::rng::{domain, StreamKey};

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Keep existing rows and compute only the missing points.
    pub resume: bool,
    /// Also write a `.dat` file next to the CSV for exponent plots.
    pub gnuplot: bool,
}

/// A point that could not be computed; the sweep continues past it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub n: usize,
    #[serde(rename = "T")]
    pub delay: usize,
    pub message: String,
    /// Exit code class of the underlying error.
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Every record in the output file, in file order.
    pub records: Vec<RunRecord>,
    pub computed: usize,
    pub skipped: usize,
    pub failures: Vec<PointFailure>,
}

/// Simulation seed of one point, keyed by the master seed, `n` and `T`.
pub fn point_seed(master_seed: u64, n: usize, delay: usize) -> u64 {
    StreamKey::new(master_seed, domain::SWEEP).child(n as u64).child(delay as u64).0
}

/// Runs every `(n, T)` point of the schedule and appends one CSV row per
/// point. Points run one after another; trials within a point run in
/// parallel.
pub fn run_sweep(schedule: &Schedule, opts: SweepOptions) -> Result<SweepReport> {
    schedule.validate()?;
    let w = schedule.channel.resolve()?;
    let cap = capacity(&w, 1e-12)?;
    let path = &schedule.output;
    let mut records = if opts.resume && path.exists() { RunRecord::read_all(path)? } else { Vec::new() };
    if records.is_empty() {
        let mut wtr = csv::Writer::from_writer(File::create(path)?);
        wtr.write_record(RunRecord::header())?;
        wtr.flush()?;
    }
    let (mut computed, mut skipped, mut failures) = (0, 0, Vec::new());
    for &n in &schedule.n_list {
        for &delay in &schedule.delay_list {
            if records.iter().any(|r| r.n == n && r.delay == delay) {
                skipped += 1;
                continue;
            }
            let outcome = compute_point(schedule, &w, cap.capacity_bits, &cap.input, n, delay)
                .and_then(|rec| append(path, &rec).map(|_| rec));
            match outcome {
                Ok(rec) => {
                    records.push(rec);
                    computed += 1;
                }
                Err(e) => failures.push(PointFailure { n, delay, message: e.to_string(), code: e.exit_code() }),
            }
        }
    }
    if opts.gnuplot {
        write_gnuplot(&gnuplot_path(path), &records)?;
    }
    Ok(SweepReport { records, computed, skipped, failures })
}

fn compute_point(
    schedule: &Schedule,
    w: &crate::channel::Dmc,
    c_bits: f64,
    input: &crate::channel::InputDistribution,
    n: usize,
    delay: usize,
) -> Result<RunRecord> {
    let t = schedule.t;
    let mc = message_count(c_bits, n, t)?;
    let streams = stream_length(n, t, schedule.s_rule);
    let seed = point_seed(schedule.master_seed, n, delay);
    let config = StreamingConfig::new(n, mc.m, delay, streams, w.clone(), input.clone(), seed)?;
    let sim = Simulator::new(config)?;
    let start = Instant::now();
    let est = sim.estimate_errors(schedule.trials, None)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let md = md_estimate(&est, n, t)?;
    let pm = &est.per_message;
    Ok(RunRecord {
        n,
        delay,
        t,
        m: mc.m,
        log2_m_target: mc.log2_target,
        log2_m_realized: mc.log2_realized,
        infeasible: mc.infeasible,
        streams,
        trials: est.trials,
        errors: pm.iter().map(|e| e.errors).collect(),
        eps_hat: pm.iter().map(|e| e.eps_hat).collect(),
        ci_lo: pm.iter().map(|e| e.ci.lo).collect(),
        ci_hi: pm.iter().map(|e| e.ci.hi).collect(),
        max_k: est.max.k,
        max_eps_hat: est.max.eps_hat,
        max_ci_lo: est.max.ci.lo,
        max_ci_hi: est.max.ci.hi,
        md_constant: md.value,
        md_censored: md.censored,
        seed,
        wall_time_s,
    })
}

fn append(path: &Path, rec: &RunRecord) -> Result<()> {
    let file = OpenOptions::new().append(true).open(path)?;
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    wtr.write_record(rec.to_row())?;
    wtr.flush()?;
    Ok(())
}

/// The `.dat` companion of a sweep CSV.
pub fn gnuplot_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("dat")
}

/// Columns `n T n^(1-2t) -log2(eps) censored`, one line per record, with
/// `eps` the maximal per-message error (its upper bound when censored).
pub fn write_gnuplot(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "# n T n^(1-2t) -log2(eps) censored")?;
    for r in records {
        let eps = if r.md_censored { r.max_ci_hi } else { r.max_eps_hat };
        let x = (r.n as f64).powf(1.0 - 2.0 * r.t);
        writeln!(out, "{} {} {} {} {}", r.n, r.delay, x, -eps.log2(), r.md_censored as u8)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;
    use crate::experiments::StreamRule;

    fn schedule(output: PathBuf, n_list: Vec<usize>) -> Schedule {
        Schedule {
            channel: ChannelSpec::Builtin("bsc:0.11".into()),
            t: 0.3,
            n_list,
            delay_list: vec![1, 2],
            s_rule: StreamRule::Fixed(2),
            trials: 2000,
            master_seed: 7,
            output,
        }
    }

    fn without_wall_time(path: &Path) -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    }

    #[test]
    fn empty_schedule_writes_only_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("s.csv");
        let rep = run_sweep(&schedule(out.clone(), vec![]), SweepOptions::default()).unwrap();
        assert!(rep.records.is_empty());
        assert_eq!(std::fs::read_to_string(&out).unwrap().trim_end(), RunRecord::header().join(","));
    }

    #[test]
    fn resume_skips_completed_points_and_reruns_are_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let first = run_sweep(&schedule(a.clone(), vec![12]), SweepOptions::default()).unwrap();
        assert_eq!(first.computed, 2);
        let again = run_sweep(&schedule(a.clone(), vec![12, 16]), SweepOptions { resume: true, gnuplot: true }).unwrap();
        assert_eq!((again.computed, again.skipped), (2, 2));
        assert_eq!(RunRecord::read_all(&a).unwrap(), again.records);
        let idle = run_sweep(&schedule(a.clone(), vec![12, 16]), SweepOptions { resume: true, gnuplot: false }).unwrap();
        assert_eq!(idle.computed, 0);
        let dat = std::fs::read_to_string(gnuplot_path(&a)).unwrap();
        assert_eq!(dat.lines().count(), 5);

        let b = dir.path().join("b.csv");
        run_sweep(&schedule(b.clone(), vec![12, 16]), SweepOptions::default()).unwrap();
        assert_eq!(without_wall_time(&a), without_wall_time(&b));
    }

    #[test]
    fn failing_points_do_not_abort_the_sweep() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = schedule(dir.path().join("f.csv"), vec![12, 200]);
        s.delay_list = vec![1];
        let rep = run_sweep(&s, SweepOptions::default()).unwrap();
        assert_eq!(rep.computed, 1);
        assert_eq!(rep.failures.len(), 1);
        assert_eq!(rep.failures[0].n, 200);
    }
}
