//! Grid experiments on the bound functions: surfaces, average tightness,
//! the ordering lattice between bounds, and numerical agreement of the
//! algebraic and trigonometric forms of the tight bound.
//!
//! Rows are evaluated in parallel; every reduction combines per-row partials
//! in row order, so reports are bit-for-bit reproducible.

use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::BoundKind;
use crate::error::SimError;

/// Slack allowed when checking `a ≤ b` between two bounds. The relations
/// are exact mathematically; equality cases differ by a few ulps in floats.
pub const ORDERING_SLACK: f64 = 1e-14;

/// Square grid over `[lo, hi]²` with `steps` points per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Default for GridSpec {
    /// 2001 × 2001 over `[-1, 1]`, step 0.001.
    fn default() -> Self {
        GridSpec {
            lo: -1.0,
            hi: 1.0,
            steps: 2001,
        }
    }
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self, SimError> {
        if !(lo.is_finite() && hi.is_finite()) || lo < -1.0 || hi > 1.0 || lo >= hi {
            return Err(SimError::BadGrid(format!(
                "need -1 <= lo < hi <= 1, got lo={lo} hi={hi}"
            )));
        }
        if steps < 2 {
            return Err(SimError::BadGrid(format!("need steps >= 2, got {steps}")));
        }
        Ok(GridSpec { lo, hi, steps })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The `i`-th grid coordinate; exact at both endpoints.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.hi;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.value(i)).collect()
    }
}

/// Row-major grid of values: cell `(i, j)` belongs to `(s1_i, s2_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    spec: GridSpec,
    values: Vec<f64>,
}

impl Surface {
    fn tabulate(spec: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> Surface {
        let axis = spec.values();
        let values = axis
            .par_iter()
            .flat_map_iter(|&s1| axis.iter().map(|&s2| f(s1, s2)).collect::<Vec<_>>())
            .collect();
        Surface { spec, values }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.steps + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest value with its coordinates, over cells where both inputs pass `keep`.
    pub fn max_where(&self, keep: impl Fn(f64) -> bool) -> Option<(f64, f64, f64)> {
        let axis = self.spec.values();
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, &s1) in axis.iter().enumerate() {
            for (j, &s2) in axis.iter().enumerate() {
                if !(keep(s1) && keep(s2)) {
                    continue;
                }
                let v = self.get(i, j);
                if best.is_none_or(|(b, _, _)| v > b) {
                    best = Some((v, s1, s2));
                }
            }
        }
        best
    }

    /// `s1,s2,value` CSV with 17 significant digits, enough to round-trip.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "s1,s2,value")?;
        let axis = self.spec.values();
        for (i, &s1) in axis.iter().enumerate() {
            for (j, &s2) in axis.iter().enumerate() {
                writeln!(out, "{s1:.16e},{s2:.16e},{:.16e}", self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Parses CSV emitted by [`write_csv`](Self::write_csv).
    pub fn read_csv(input: impl BufRead) -> Result<Surface, String> {
        let mut rows: Vec<[f64; 3]> = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line.map_err(|e| e.to_string())?;
            if n == 0 {
                if line.trim() != "s1,s2,value" {
                    return Err(format!("line 1: unexpected header `{line}`"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut cells = [0.0; 3];
            let mut parts = line.split(',');
            for c in cells.iter_mut() {
                let tok = parts
                    .next()
                    .ok_or_else(|| format!("line {}: missing column", n + 1))?;
                *c = tok
                    .trim()
                    .parse()
                    .map_err(|_| format!("line {}: invalid number `{tok}`", n + 1))?;
            }
            rows.push(cells);
        }
        let steps = (rows.len() as f64).sqrt().round() as usize;
        if steps < 2 || steps * steps != rows.len() {
            return Err(format!("{} rows do not form a square grid", rows.len()));
        }
        let (lo, hi) = (rows[0][0], rows[rows.len() - 1][0]);
        let spec = GridSpec::new(lo, hi, steps).map_err(|e| e.to_string())?;
        Ok(Surface {
            spec,
            values: rows.into_iter().map(|r| r[2]).collect(),
        })
    }
}

/// Lower bound of `kind` over the grid.
pub fn surface(kind: BoundKind, spec: GridSpec) -> Surface {
    Surface::tabulate(spec, move |a, b| kind.eval(a, b))
}

/// Cell-wise `kind_a - kind_b`.
pub fn difference_surface(kind_a: BoundKind, kind_b: BoundKind, spec: GridSpec) -> Surface {
    Surface::tabulate(spec, move |a, b| kind_a.eval(a, b) - kind_b.eval(a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub spec: GridSpec,
    /// Mean Euclidean bound over the averaging region.
    pub euclid_mean: f64,
    /// Mean Arccos bound over the averaging region.
    pub arccos_mean: f64,
    /// `arccos_mean / euclid_mean - 1`.
    pub ratio: f64,
    /// Cells in the averaging region: both inputs ≥ 0 and Arccos bound ≥ 0.
    pub cells: usize,
    /// Means over the cells where the Euclidean and the Arccos bound are each ≥ 0.
    pub both_nonneg_euclid_mean: f64,
    pub both_nonneg_arccos_mean: f64,
    pub both_nonneg_cells: usize,
    /// Largest `Arccos - Euclidean` over the non-negative quadrant, with its
    /// location. Bounds below -1 say nothing and are compared as -1.
    pub max_arccos_gap: (f64, f64, f64),
    /// Largest `Arccos - kind` over the non-negative quadrant for every kind,
    /// with the same clamping.
    pub max_gaps: Vec<(BoundKind, f64)>,
    pub ordering_violations: usize,
    pub stability: StabilityReport,
}

impl GridReport {
    pub fn entries(&self) -> Vec<(String, String)> {
        let f = |v: f64| format!("{v:.16e}");
        let mut rows = vec![
            ("grid_lo".into(), f(self.spec.lo)),
            ("grid_hi".into(), f(self.spec.hi)),
            ("grid_steps".into(), self.spec.steps.to_string()),
            ("euclid_mean".into(), f(self.euclid_mean)),
            ("arccos_mean".into(), f(self.arccos_mean)),
            ("ratio".into(), f(self.ratio)),
            ("cells".into(), self.cells.to_string()),
            (
                "both_nonneg_euclid_mean".into(),
                f(self.both_nonneg_euclid_mean),
            ),
            (
                "both_nonneg_arccos_mean".into(),
                f(self.both_nonneg_arccos_mean),
            ),
            (
                "both_nonneg_cells".into(),
                self.both_nonneg_cells.to_string(),
            ),
            ("max_arccos_minus_euclid".into(), f(self.max_arccos_gap.0)),
            (
                "max_arccos_minus_euclid_s1".into(),
                f(self.max_arccos_gap.1),
            ),
            (
                "max_arccos_minus_euclid_s2".into(),
                f(self.max_arccos_gap.2),
            ),
        ];
        for (kind, gap) in &self.max_gaps {
            rows.push((
                format!("max_gap_{}", kind.name().replace('-', "_")),
                f(*gap),
            ));
        }
        rows.push((
            "ordering_violations".into(),
            self.ordering_violations.to_string(),
        ));
        rows.push((
            "max_abs_mult_minus_arccos".into(),
            f(self.stability.max_mult_arccos),
        ));
        rows.push((
            "max_abs_variant_minus_mult".into(),
            f(self.stability.max_variant_mult),
        ));
        rows
    }

    /// `key,value` CSV.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "key,value")?;
        for (k, v) in self.entries() {
            writeln!(out, "{k},{v}")?;
        }
        Ok(())
    }
}

#[derive(Default, Clone, Copy)]
struct Partial {
    e_sum: f64,
    a_sum: f64,
    cells: usize,
    be_sum: f64,
    ba_sum: f64,
    both_cells: usize,
    gaps: [f64; 7],
    max_gap: (f64, f64, f64),
    violations: usize,
    stab: StabilityReport,
}

fn merge_gap(acc: &mut (f64, f64, f64), cand: (f64, f64, f64)) {
    if cand.0 > acc.0 {
        *acc = cand;
    }
}

/// Average tightness of the Euclidean and Arccos bounds plus per-kind gaps,
/// ordering check and stability figures for one grid.
///
/// The averaging region is the non-negative input quadrant restricted to
/// cells where the tight bound is non-negative. Means over the cells where
/// each bound is non-negative on its own are reported alongside.
pub fn average_report(spec: GridSpec) -> GridReport {
    let axis = spec.values();
    let neg = f64::NEG_INFINITY;
    let rows: Vec<Partial> = axis
        .par_iter()
        .map(|&s1| {
            let mut p = Partial {
                gaps: [neg; 7],
                max_gap: (neg, 0.0, 0.0),
                ..Partial::default()
            };
            for &s2 in &axis {
                let e = BoundKind::Euclidean.eval(s1, s2);
                let a = BoundKind::Arccos.eval(s1, s2);
                if s1 >= 0.0 && s2 >= 0.0 {
                    if a >= 0.0 {
                        p.e_sum += e;
                        p.a_sum += a;
                        p.cells += 1;
                    }
                    merge_gap(&mut p.max_gap, (a - e.max(-1.0), s1, s2));
                    for (g, kind) in p.gaps.iter_mut().zip(BoundKind::ALL) {
                        *g = g.max(a - kind.eval(s1, s2).max(-1.0));
                    }
                }
                if e >= 0.0 && a >= 0.0 {
                    p.be_sum += e;
                    p.ba_sum += a;
                    p.both_cells += 1;
                }
                p.violations += cell_violations(s1, s2);
                p.stab.absorb(s1, s2);
            }
            p
        })
        .collect();

    let mut total = Partial {
        gaps: [neg; 7],
        max_gap: (neg, 0.0, 0.0),
        ..Partial::default()
    };
    for p in &rows {
        total.e_sum += p.e_sum;
        total.a_sum += p.a_sum;
        total.cells += p.cells;
        total.be_sum += p.be_sum;
        total.ba_sum += p.ba_sum;
        total.both_cells += p.both_cells;
        merge_gap(&mut total.max_gap, p.max_gap);
        for (t, g) in total.gaps.iter_mut().zip(p.gaps) {
            *t = t.max(g);
        }
        total.violations += p.violations;
        total.stab.merge(&p.stab);
    }
    let mean = |sum: f64, n: usize| if n == 0 { f64::NAN } else { sum / n as f64 };
    let euclid_mean = mean(total.e_sum, total.cells);
    let arccos_mean = mean(total.a_sum, total.cells);
    GridReport {
        spec,
        euclid_mean,
        arccos_mean,
        ratio: arccos_mean / euclid_mean - 1.0,
        cells: total.cells,
        both_nonneg_euclid_mean: mean(total.be_sum, total.both_cells),
        both_nonneg_arccos_mean: mean(total.ba_sum, total.both_cells),
        both_nonneg_cells: total.both_cells,
        max_arccos_gap: total.max_gap,
        max_gaps: BoundKind::ALL.into_iter().zip(total.gaps).collect(),
        ordering_violations: total.violations,
        stability: total.stab,
    }
}

/// Number of violated relations among
/// `EuclLB ≤ Euclidean ≤ Mult` and `EuclLB ≤ MultLB2 ≤ MultLB1 ≤ Mult`.
pub fn cell_violations(s1: f64, s2: f64) -> usize {
    let eucl_lb = BoundKind::EuclLB.eval(s1, s2);
    let eucl = BoundKind::Euclidean.eval(s1, s2);
    let mult = BoundKind::Mult.eval(s1, s2);
    let lb1 = BoundKind::MultLB1.eval(s1, s2);
    let lb2 = BoundKind::MultLB2.eval(s1, s2);
    [
        (eucl_lb, eucl),
        (eucl, mult),
        (eucl_lb, lb2),
        (lb2, lb1),
        (lb1, mult),
    ]
    .iter()
    .filter(|(a, b)| *a > *b + ORDERING_SLACK)
    .count()
}

pub fn ordering_violations(spec: GridSpec) -> usize {
    let axis = spec.values();
    axis.par_iter()
        .map(|&s1| {
            axis.iter()
                .map(|&s2| cell_violations(s1, s2))
                .sum::<usize>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum()
}

/// Ordering check on `n` uniform random pairs from `[-1, 1]²`.
pub fn ordering_violations_random(n: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .filter(|_| {
            let (a, b) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            cell_violations(a, b) > 0
        })
        .count()
}

/// Agreement between algebraically equivalent bound forms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StabilityReport {
    /// `max |Mult - Arccos|`.
    pub max_mult_arccos: f64,
    /// Location of that maximum.
    pub at: (f64, f64),
    /// `max |MultVariant - Mult|`.
    pub max_variant_mult: f64,
    pub cells: usize,
}

impl StabilityReport {
    fn absorb(&mut self, s1: f64, s2: f64) {
        let mult = BoundKind::Mult.eval(s1, s2);
        let d = (mult - BoundKind::Arccos.eval(s1, s2)).abs();
        if d > self.max_mult_arccos || self.cells == 0 {
            self.max_mult_arccos = d;
            self.at = (s1, s2);
        }
        self.max_variant_mult = self
            .max_variant_mult
            .max((BoundKind::MultVariant.eval(s1, s2) - mult).abs());
        self.cells += 1;
    }

    fn merge(&mut self, other: &StabilityReport) {
        if other.cells == 0 {
            return;
        }
        if other.max_mult_arccos > self.max_mult_arccos || self.cells == 0 {
            self.max_mult_arccos = other.max_mult_arccos;
            self.at = other.at;
        }
        self.max_variant_mult = self.max_variant_mult.max(other.max_variant_mult);
        self.cells += other.cells;
    }
}

pub fn stability_report(spec: GridSpec) -> StabilityReport {
    let axis = spec.values();
    let rows: Vec<StabilityReport> = axis
        .par_iter()
        .map(|&s1| {
            let mut r = StabilityReport::default();
            for &s2 in &axis {
                r.absorb(s1, s2);
            }
            r
        })
        .collect();
    let mut total = StabilityReport::default();
    for r in &rows {
        total.merge(r);
    }
    total
}

/// [`stability_report`] restricted to the diagonal `s1 = s2`.
pub fn stability_report_diagonal(spec: GridSpec) -> StabilityReport {
    let mut r = StabilityReport::default();
    for s in spec.values() {
        r.absorb(s, s);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(-1.0, 1.0, 1).is_err());
        assert!(GridSpec::new(0.5, 0.5, 3).is_err());
        assert!(GridSpec::new(-1.5, 1.0, 3).is_err());
        let g = GridSpec::default();
        assert_eq!(g.value(0), -1.0);
        assert_eq!(g.value(1500), 0.5);
        assert_eq!(g.value(2000), 1.0);
    }

    #[test]
    fn surface_corners_and_points() {
        let s = surface(BoundKind::Mult, GridSpec::new(0.0, 1.0, 3).unwrap());
        assert_eq!(s.get(2, 2), 1.0);
        assert!((s.get(1, 1) + 0.5).abs() < 1e-15);
        let e = surface(BoundKind::Euclidean, GridSpec::new(-1.0, 1.0, 5).unwrap());
        assert_eq!(e.get(0, 0), -7.0);
    }

    #[test]
    fn self_difference_is_zero() {
        for kind in BoundKind::ALL {
            let d = difference_surface(kind, kind, GridSpec::new(-1.0, 1.0, 41).unwrap());
            assert!(d.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn corners_are_exact() {
        let r = stability_report(GridSpec::new(-1.0, 1.0, 2).unwrap());
        assert!(r.max_mult_arccos <= 1e-15);
        assert_eq!(r.cells, 4);
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let s = surface(BoundKind::Arccos, GridSpec::new(-0.3, 0.9, 7).unwrap());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = Surface::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.spec().steps(), 7);
        for (a, b) in s.values().iter().zip(back.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn report_is_deterministic() {
        let spec = GridSpec::new(-1.0, 1.0, 201).unwrap();
        assert_eq!(average_report(spec), average_report(spec));
    }
}
