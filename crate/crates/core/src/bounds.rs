//! Triangle inequalities for cosine similarity.
//!
//! Given `s1 = sim(x, z)` and `s2 = sim(z, y)` for some routing object `z`,
//! every [`BoundKind`] yields a lower bound on `sim(x, y)`, and
//! [`upper_bound`] the matching upper bound. `Mult` and `Arccos` are the same
//! tight bound, `cos(θ1 + θ2)`, evaluated algebraically and via trig
//! respectively; the others are cheaper relaxations.
//!
//! Bound functions return raw, unclamped reals. The Euclidean-derived bounds
//! fall as low as -7 in the negative domain and callers that compare against a
//! similarity threshold must clamp.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::simcore::Similarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    Euclidean,
    EuclLB,
    Arccos,
    Mult,
    MultVariant,
    MultLB1,
    MultLB2,
}

impl BoundKind {
    pub const ALL: [BoundKind; 7] = [
        BoundKind::Euclidean,
        BoundKind::EuclLB,
        BoundKind::Arccos,
        BoundKind::Mult,
        BoundKind::MultVariant,
        BoundKind::MultLB1,
        BoundKind::MultLB2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Euclidean => "euclidean",
            BoundKind::EuclLB => "eucl-lb",
            BoundKind::Arccos => "arccos",
            BoundKind::Mult => "mult",
            BoundKind::MultVariant => "mult-variant",
            BoundKind::MultLB1 => "mult-lb1",
            BoundKind::MultLB2 => "mult-lb2",
        }
    }

    /// Qualitative tightness grade: `++` tight, `o` Euclidean-level,
    /// `-` and `--` progressively looser.
    pub fn accuracy(self) -> &'static str {
        match self {
            BoundKind::Arccos | BoundKind::Mult | BoundKind::MultVariant => "++",
            BoundKind::Euclidean => "o",
            BoundKind::MultLB1 => "-",
            BoundKind::EuclLB | BoundKind::MultLB2 => "--",
        }
    }

    /// True for every kind that avoids trigonometric functions.
    pub fn is_closed_form(self) -> bool {
        self != BoundKind::Arccos
    }

    /// Evaluates the bound on plain reals, without domain checks.
    #[inline]
    pub fn eval(self, s1: f64, s2: f64) -> f64 {
        match self {
            BoundKind::Euclidean => euclidean(s1, s2),
            BoundKind::EuclLB => eucl_lb(s1, s2),
            BoundKind::Arccos => arccos(s1, s2),
            BoundKind::Mult => mult(s1, s2),
            BoundKind::MultVariant => mult_variant(s1, s2),
            BoundKind::MultLB1 => mult_lb1(s1, s2),
            BoundKind::MultLB2 => mult_lb2(s1, s2),
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "euclidean" | "eucl" => Ok(BoundKind::Euclidean),
            "eucllb" => Ok(BoundKind::EuclLB),
            "arccos" | "acos" => Ok(BoundKind::Arccos),
            "mult" => Ok(BoundKind::Mult),
            "multvariant" => Ok(BoundKind::MultVariant),
            "multlb1" => Ok(BoundKind::MultLB1),
            "multlb2" => Ok(BoundKind::MultLB2),
            _ => Err(format!(
                "unknown bound `{s}` (expected one of: {})",
                BoundKind::ALL.map(BoundKind::name).join(", ")
            )),
        }
    }
}

/// Chord-length triangle inequality on the normalized vectors.
#[inline]
pub fn euclidean(s1: f64, s2: f64) -> f64 {
    s1 + s2 - 1.0 - 2.0 * ((1.0 - s1) * (1.0 - s2)).sqrt()
}

/// [`euclidean`] with the square root replaced by the smaller similarity.
#[inline]
pub fn eucl_lb(s1: f64, s2: f64) -> f64 {
    s1 + s2 + 2.0 * s1.min(s2) - 3.0
}

/// `cos(arccos s1 + arccos s2)`; inputs clamped to `[-1, 1]` before trig.
#[inline]
pub fn arccos(s1: f64, s2: f64) -> f64 {
    (s1.clamp(-1.0, 1.0).acos() + s2.clamp(-1.0, 1.0).acos()).cos()
}

#[inline]
pub fn mult(s1: f64, s2: f64) -> f64 {
    s1 * s2 - ((1.0 - s1 * s1) * (1.0 - s2 * s2)).sqrt()
}

/// [`mult`] with `1 - s²` factored as `(1 + s)(1 - s)`.
#[inline]
pub fn mult_variant(s1: f64, s2: f64) -> f64 {
    s1 * s2 - (((1.0 + s1) * (1.0 - s1)) * ((1.0 + s2) * (1.0 - s2))).sqrt()
}

#[inline]
pub fn mult_lb1(s1: f64, s2: f64) -> f64 {
    s1 * s2 + (s1 * s1).min(s2 * s2) - 1.0
}

#[inline]
pub fn mult_lb2(s1: f64, s2: f64) -> f64 {
    2.0 * s1 * s2 - (s1 - s2).abs() - 1.0
}

/// `cos(arccos s1 - arccos s2)`, algebraically.
#[inline]
pub fn upper(s1: f64, s2: f64) -> f64 {
    s1 * s2 + ((1.0 - s1 * s1) * (1.0 - s2 * s2)).sqrt()
}

pub fn lower_bound(kind: BoundKind, s1: Similarity, s2: Similarity) -> f64 {
    kind.eval(s1.get(), s2.get())
}

/// [`lower_bound`] on unchecked reals.
pub fn lower_bound_raw(kind: BoundKind, s1: f64, s2: f64) -> Result<f64, SimError> {
    let (a, b) = (Similarity::try_new(s1)?, Similarity::try_new(s2)?);
    Ok(lower_bound(kind, a, b))
}

pub fn upper_bound(s1: Similarity, s2: Similarity) -> f64 {
    upper(s1.get(), s2.get())
}

pub fn upper_bound_raw(s1: f64, s2: f64) -> Result<f64, SimError> {
    let (a, b) = (Similarity::try_new(s1)?, Similarity::try_new(s2)?);
    Ok(upper_bound(a, b))
}

/// Range `[lo, hi]` of similarities between a set of points and a routing object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimInterval {
    lo: Similarity,
    hi: Similarity,
}

impl SimInterval {
    pub fn new(lo: Similarity, hi: Similarity) -> Result<Self, SimError> {
        if lo.get() > hi.get() {
            return Err(SimError::BadInterval {
                lo: lo.get(),
                hi: hi.get(),
            });
        }
        Ok(SimInterval { lo, hi })
    }

    pub fn point(s: Similarity) -> Self {
        SimInterval { lo: s, hi: s }
    }

    /// Smallest interval covering every value; `None` for an empty iterator.
    pub fn spanning(values: impl IntoIterator<Item = Similarity>) -> Option<Self> {
        let mut it = values.into_iter();
        let first = it.next()?;
        Some(it.fold(SimInterval::point(first), |iv, s| iv.extended(s)))
    }

    pub fn extended(self, s: Similarity) -> Self {
        SimInterval {
            lo: if s.get() < self.lo.get() { s } else { self.lo },
            hi: if s.get() > self.hi.get() { s } else { self.hi },
        }
    }

    pub fn lo(&self) -> Similarity {
        self.lo
    }

    pub fn hi(&self) -> Similarity {
        self.hi
    }

    pub fn contains(&self, s: Similarity) -> bool {
        self.lo.get() <= s.get() && s.get() <= self.hi.get()
    }
}

/// Highest similarity to the query any member of the interval can have.
///
/// The maximum of `cos(θq - θ)` over the band is 1 when the query angle lies
/// inside it, otherwise it is attained at the nearer endpoint.
pub fn best_case_similarity(s_qz: Similarity, iv: SimInterval) -> Similarity {
    let s = s_qz.get();
    if s > iv.hi.get() {
        Similarity::clamped(upper(s, iv.hi.get()))
    } else if s < iv.lo.get() {
        Similarity::clamped(upper(s, iv.lo.get()))
    } else {
        Similarity::ONE
    }
}

/// Lowest similarity to the query any member of the interval can have.
pub fn worst_case_similarity(s_qz: Similarity, iv: SimInterval) -> Similarity {
    let s = s_qz.get();
    if iv.contains(Similarity::clamped(-s)) {
        // θq + θ can reach π
        return Similarity::MINUS_ONE;
    }
    // cos(θq + θ) is monotone over the band once π is excluded.
    Similarity::clamped(mult(s, iv.lo.get()).min(mult(s, iv.hi.get())))
}

/// Upper bound that stays valid when both inputs, and the similarity it is
/// compared with, carry an absolute error of at most `err`.
///
/// Each sine factor `sqrt(1 - s²)` is inflated so that it dominates the sine of
/// every similarity within `err` of `s`; without this the square root turns a
/// rounding error of 1e-16 near `s = ±1` into a bound error near 1e-8.
#[inline]
pub fn guarded_upper(s1: f64, s2: f64, err: f64) -> f64 {
    let sin1 = ((1.0 - s1 * s1).max(0.0) + 4.0 * err).sqrt();
    let sin2 = ((1.0 - s2 * s2).max(0.0) + 4.0 * err).sqrt();
    s1 * s2 + sin1 * sin2 + 4.0 * err + 8.0 * f64::EPSILON
}

/// [`best_case_similarity`] built on [`guarded_upper`]; used for index pruning.
pub fn guarded_best_case(s_qz: Similarity, iv: SimInterval, err: f64) -> Similarity {
    let s = s_qz.get();
    // guarded_upper(s, ·) is concave with its maximum at s itself.
    if s > iv.hi.get() {
        Similarity::clamped(guarded_upper(s, iv.hi.get(), err))
    } else if s < iv.lo.get() {
        Similarity::clamped(guarded_upper(s, iv.lo.get(), err))
    } else {
        Similarity::ONE
    }
}
