//! Microbenchmark of bound evaluation cost.
//!
//! A fixed array of uniform random similarities is generated once per run;
//! each subject streams consecutive pairs `(a[i], a[i+1])` through its
//! function. Each warmup or measurement iteration repeats full passes until
//! the iteration's time target is met, and reports nanoseconds per evaluated
//! pair. Absolute numbers depend on the machine; only relative orderings are
//! meaningful across environments.

use std::fmt::Write as _;
use std::hint::black_box;
use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::BoundKind;
use crate::error::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub array_size: usize,
    pub warmup_iters: usize,
    pub measure_iters: usize,
    pub iter_duration_target: Duration,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            array_size: 2_000_000,
            warmup_iters: 5,
            measure_iters: 10,
            iter_duration_target: Duration::from_millis(100),
            seed: 42,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| {
            Err(SimError::BadBenchConfig(format!(
                "{what} must be at least 1"
            )))
        };
        if self.array_size < 2 {
            return Err(SimError::BadBenchConfig(
                "array_size must be at least 2".into(),
            ));
        }
        if self.warmup_iters == 0 {
            return bad("warmup_iters");
        }
        if self.measure_iters == 0 {
            return bad("measure_iters");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subject {
    /// `a + b`: memory traffic plus one add.
    Baseline,
    Bound(BoundKind),
}

impl Subject {
    pub fn all() -> Vec<Subject> {
        BoundKind::ALL
            .into_iter()
            .map(Subject::Bound)
            .chain([Subject::Baseline])
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Subject::Baseline => "baseline",
            Subject::Bound(k) => k.name(),
        }
    }

    pub fn accuracy(self) -> &'static str {
        match self {
            Subject::Baseline => "n/a",
            Subject::Bound(k) => k.accuracy(),
        }
    }

    #[inline]
    fn eval(self, a: f64, b: f64) -> f64 {
        match self {
            Subject::Baseline => a + b,
            Subject::Bound(k) => k.eval(a, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectResult {
    pub subject: Subject,
    pub mean_ns: f64,
    pub stddev_ns: f64,
    /// Sum of the subject's outputs over one pass; depends only on the seed.
    pub checksum: f64,
    pub samples_ns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub results: Vec<SubjectResult>,
    pub pinned_cpu: Option<usize>,
    pub notes: Vec<String>,
}

impl BenchReport {
    pub fn get(&self, subject: Subject) -> Option<&SubjectResult> {
        self.results.iter().find(|r| r.subject == subject)
    }

    pub fn mean(&self, subject: Subject) -> f64 {
        self.get(subject).map_or(f64::NAN, |r| r.mean_ns)
    }

    pub fn to_table(&self) -> String {
        let baseline = self.mean(Subject::Baseline);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:>12} {:>12} {:>14} {:>8}",
            "subject", "mean_ns", "stddev_ns", "minus_base_ns", "accuracy"
        );
        for r in &self.results {
            let _ = writeln!(
                s,
                "{:<14} {:>12.3} {:>12.3} {:>14.3} {:>8}",
                r.subject.name(),
                r.mean_ns,
                r.stddev_ns,
                r.mean_ns - baseline,
                r.subject.accuracy()
            );
        }
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        s
    }

    /// `subject,mean_ns,stddev_ns` CSV.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "subject,mean_ns,stddev_ns")?;
        for r in &self.results {
            writeln!(
                out,
                "{},{:.6},{:.6}",
                r.subject.name(),
                r.mean_ns,
                r.stddev_ns
            )?;
        }
        Ok(())
    }
}

/// Uniform similarities on `[-1, 1]`, reproducible from `seed`.
pub fn input_array(size: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

#[inline(never)]
fn pass(subject: Subject, data: &[f64]) -> f64 {
    let mut acc = 0.0;
    for w in data.windows(2) {
        acc += subject.eval(black_box(w[0]), w[1]);
    }
    // close the ring so every element starts exactly one pair
    acc + subject.eval(data[data.len() - 1], data[0])
}

/// Repeats passes until `target` has elapsed; returns (elapsed, pairs evaluated).
fn timed_iteration(subject: Subject, data: &[f64], target: Duration) -> (Duration, usize) {
    let start = Instant::now();
    let mut passes = 0;
    loop {
        black_box(pass(subject, black_box(data)));
        passes += 1;
        let elapsed = start.elapsed();
        if elapsed >= target {
            return (elapsed, passes * data.len());
        }
    }
}

fn mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Benchmarks every subject on the same input array, single-threaded.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport, SimError> {
    run_subjects(config, &Subject::all())
}

pub fn run_subjects(config: &BenchConfig, subjects: &[Subject]) -> Result<BenchReport, SimError> {
    config.validate()?;
    let pinned_cpu = pin_current_thread();
    let data = input_array(config.array_size, config.seed);
    let mut results = Vec::with_capacity(subjects.len());
    for &subject in subjects {
        let checksum = pass(subject, &data);
        for _ in 0..config.warmup_iters {
            timed_iteration(subject, &data, config.iter_duration_target);
        }
        let samples_ns: Vec<f64> = (0..config.measure_iters)
            .map(|_| {
                let (elapsed, pairs) = timed_iteration(subject, &data, config.iter_duration_target);
                elapsed.as_nanos() as f64 / pairs as f64
            })
            .collect();
        let (mean_ns, stddev_ns) = mean_std(&samples_ns);
        results.push(SubjectResult {
            subject,
            mean_ns,
            stddev_ns,
            checksum,
            samples_ns,
        });
    }
    let mut notes = vec![
        "inputs: uniform similarities on [-1, 1]".to_string(),
        "absolute timings are machine-specific; compare orderings only".to_string(),
        "no fast arccos implementation available; fast-math trig subject omitted".to_string(),
    ];
    notes.push(match pinned_cpu {
        Some(cpu) => format!("measurement thread pinned to cpu {cpu}"),
        None => "measurement thread not pinned (unsupported on this platform)".to_string(),
    });
    Ok(BenchReport {
        config: config.clone(),
        results,
        pinned_cpu,
        notes,
    })
}

/// Pins the calling thread to the CPU it is running on.
#[cfg(target_os = "linux")]
fn pin_current_thread() -> Option<usize> {
    // SAFETY: plain libc calls on a zeroed, stack-owned cpu_set_t.
    unsafe {
        let cpu = libc::sched_getcpu();
        if cpu < 0 {
            return None;
        }
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu as usize, &mut set);
        if libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0 {
            Some(cpu as usize)
        } else {
            None
        }
    }
}

#[cfg(not(target_os = "linux"))]
fn pin_current_thread() -> Option<usize> {
    None
}
