//! Pure evaluation of PMI, the NGD-style spread term, and their PMING
//! combination for a single term pair.
//!
//! Everything here is a function of its arguments: counts in, score out.
//! The pair is oriented internally so that `f(x) >= f(y)` before any
//! formula is applied, which makes every operation symmetric in its two
//! terms, bit for bit.
//!
//! Logarithms are natural logs throughout. Both components of the final
//! score are ratios of logarithms, so the choice of base cancels out;
//! the test suite re-derives the score in base 2 to keep that honest.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// Which second-component numerator to use.
///
/// `Paper` uses `log f(x) - log f(y)`: the spread between the two
/// single-term counts. `Legacy` uses the NGD numerator
/// `log f(x) - log f(x,y)`, which involves the co-occurrence count and
/// diverges when the pair never co-occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Paper,
    Legacy,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Paper => f.write_str("paper"),
            Variant::Legacy => f.write_str("legacy"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Variant::Paper),
            "legacy" => Ok(Variant::Legacy),
            other => Err(format!(
                "unknown variant `{other}` (expected `paper` or `legacy`)"
            )),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("corpus size must be at least 1")]
    ZeroCorpusSize,
    #[error("corpus size {m} is smaller than an occurrence count {f_max}")]
    CorpusSmallerThanCount { m: u64, f_max: u64 },
    #[error("measure undefined: a term has zero occurrences (f_x={f_x}, f_y={f_y})")]
    UndefinedForZeroOccurrence { f_x: u64, f_y: u64 },
    #[error("singular spread denominator: the rarer term saturates the corpus (f={f_min}, m={m})")]
    SingularDenominator { f_min: u64, m: u64 },
    #[error("invalid measure parameters: {0}")]
    InvalidParams(String),
}

/// Raw statistics for one term pair: the two occurrence counts, the
/// co-occurrence count and the corpus size, all document counts.
///
/// Construction enforces `m >= 1` and `m >= max(f_x, f_y)`. The
/// co-occurrence count is deliberately not constrained: live engines
/// return estimates where `f_xy` may exceed either single count, and
/// clamping the input would hide that pathology. Such pairs are scored
/// as given and flagged `inconsistent_counts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    f_x: u64,
    f_y: u64,
    f_xy: u64,
    m: u64,
}

impl PairCounts {
    pub fn new(f_x: u64, f_y: u64, f_xy: u64, m: u64) -> Result<Self, MeasureError> {
        if m == 0 {
            return Err(MeasureError::ZeroCorpusSize);
        }
        let f_max = f_x.max(f_y);
        if f_max > m {
            return Err(MeasureError::CorpusSmallerThanCount { m, f_max });
        }
        Ok(PairCounts { f_x, f_y, f_xy, m })
    }

    pub fn f_x(&self) -> u64 {
        self.f_x
    }

    pub fn f_y(&self) -> u64 {
        self.f_y
    }

    pub fn f_xy(&self) -> u64 {
        self.f_xy
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Same counts with the roles of x and y exchanged.
    pub fn swapped(&self) -> Self {
        PairCounts {
            f_x: self.f_y,
            f_y: self.f_x,
            f_xy: self.f_xy,
            m: self.m,
        }
    }

    /// True when the co-occurrence count exceeds either single count,
    /// which no exact source can produce.
    pub fn inconsistent(&self) -> bool {
        self.f_xy > self.f_x.min(self.f_y)
    }
}

/// Normalization parameters for scoring one pair against a context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    rho: f64,
    mu1: f64,
    mu2: f64,
    variant: Variant,
}

impl MeasureParams {
    pub fn new(rho: f64, mu1: f64, mu2: f64, variant: Variant) -> Result<Self, MeasureError> {
        if !rho.is_finite() || !(0.0..=1.0).contains(&rho) {
            return Err(MeasureError::InvalidParams(format!(
                "rho must lie in [0,1], got {rho}"
            )));
        }
        if !mu1.is_finite() || mu1 <= 0.0 {
            return Err(MeasureError::InvalidParams(format!(
                "mu1 must be a positive finite real, got {mu1}"
            )));
        }
        if !mu2.is_finite() || mu2 < 0.0 {
            return Err(MeasureError::InvalidParams(format!(
                "mu2 must be a non-negative finite real, got {mu2}"
            )));
        }
        Ok(MeasureParams {
            rho,
            mu1,
            mu2,
            variant,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

/// Diagnostic flags attached to a score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    /// `f_xy = 0`: PMI fell to its negative-infinity sentinel and the
    /// first component took the maximal-distance convention.
    pub zero_cooccurrence: bool,
    /// The PMI component left [0,1] before clamping (PMI below zero or
    /// above the context maximum).
    pub clamped_pmi: bool,
    /// The spread component left [0,1] before clamping.
    pub clamped_spread: bool,
    /// `f_xy > min(f_x, f_y)`: the source returned estimates no exact
    /// corpus could produce.
    pub inconsistent_counts: bool,
    /// `mu2 = 0`: the context has no frequency spread at all, so the
    /// second component is pinned to zero.
    pub degenerate_spread: bool,
    /// The pair was scored against a context it does not belong to.
    pub out_of_context: bool,
}

type FlagGetter = fn(&Flags) -> bool;

impl Flags {
    const ORDER: [(&'static str, FlagGetter); 6] = [
        ("zero_cooccurrence", |f| f.zero_cooccurrence),
        ("clamped_pmi", |f| f.clamped_pmi),
        ("clamped_spread", |f| f.clamped_spread),
        ("inconsistent_counts", |f| f.inconsistent_counts),
        ("degenerate_spread", |f| f.degenerate_spread),
        ("out_of_context", |f| f.out_of_context),
    ];

    /// Names of the active flags, in a fixed canonical order.
    pub fn names(&self) -> Vec<&'static str> {
        Self::ORDER
            .iter()
            .filter(|(_, get)| get(self))
            .map(|(name, _)| *name)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.names().is_empty()
    }

    fn set_by_name(&mut self, name: &str) -> bool {
        match name {
            "zero_cooccurrence" => self.zero_cooccurrence = true,
            "clamped_pmi" => self.clamped_pmi = true,
            "clamped_spread" => self.clamped_spread = true,
            "inconsistent_counts" => self.inconsistent_counts = true,
            "degenerate_spread" => self.degenerate_spread = true,
            "out_of_context" => self.out_of_context = true,
            _ => return false,
        }
        true
    }
}

impl Serialize for Flags {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let names = self.names();
        let mut seq = serializer.serialize_seq(Some(names.len()))?;
        for name in names {
            seq.serialize_element(name)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Flags {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct FlagsVisitor;

        impl<'de> Visitor<'de> for FlagsVisitor {
            type Value = Flags;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of flag names")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Flags, A::Error> {
                let mut flags = Flags::default();
                while let Some(name) = seq.next_element::<String>()? {
                    if !flags.set_by_name(&name) {
                        return Err(serde::de::Error::custom(format!("unknown flag `{name}`")));
                    }
                }
                Ok(flags)
            }
        }

        deserializer.deserialize_seq(FlagsVisitor)
    }
}

/// One scored pair: the oriented labels and counts, both constituent
/// measures, their normalized components, the final PMING value and
/// the diagnostic flags.
///
/// `pming = rho * component_pmi + (1 - rho) * component_spread`, with
/// both components clamped into [0,1] before weighting, so `pming`
/// itself always lies in [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub x: String,
    pub y: String,
    pub counts: PairCounts,
    /// Raw PMI, or `f64::NEG_INFINITY` when the pair never co-occurs.
    pub pmi: f64,
    /// Raw spread term, before normalization by `mu2`. Under the legacy
    /// variant this is `f64::INFINITY` when the pair never co-occurs.
    pub spread: f64,
    pub component_pmi: f64,
    pub component_spread: f64,
    pub pming: f64,
    pub flags: Flags,
}

/// `ln(num / den)` computed through `ln_1p` of the exact integer
/// difference, which stays accurate when `num` and `den` are close.
/// A plain `ln(num) - ln(den)` loses most of its digits there, and the
/// spread denominator divides by that difference.
fn ln_ratio(num: u64, den: u64) -> f64 {
    if num == den {
        return 0.0;
    }
    let diff = num as f64 - den as f64;
    (diff / den as f64).ln_1p()
}

/// Pointwise mutual information of the pair, in natural log:
/// `ln(f_xy * m / (f_x * f_y))`.
///
/// Returns `f64::NEG_INFINITY` when `f_xy = 0`. Errors when either term
/// has zero occurrences, where the measure has no value at all.
pub fn pmi(counts: &PairCounts) -> Result<f64, MeasureError> {
    if counts.f_x == 0 || counts.f_y == 0 {
        return Err(MeasureError::UndefinedForZeroOccurrence {
            f_x: counts.f_x,
            f_y: counts.f_y,
        });
    }
    if counts.f_xy == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let joint = counts.f_xy as f64 * counts.m as f64;
    let independent = counts.f_x as f64 * counts.f_y as f64;
    Ok((joint / independent).ln())
}

/// The raw second-component fraction, oriented so the more frequent
/// count plays the role of `f(x)`.
///
/// * paper variant: `(log f_max - log f_min) / (log m - log f_min)`
/// * legacy variant: `(log f_max - log f_xy) / (log m - log f_min)`,
///   with `f_xy = 0` yielding `f64::INFINITY`.
///
/// Errors when a term has zero occurrences or when the rarer term
/// occurs in every document, which zeroes the denominator.
pub fn spread_term(counts: &PairCounts, variant: Variant) -> Result<f64, MeasureError> {
    if counts.f_x == 0 || counts.f_y == 0 {
        return Err(MeasureError::UndefinedForZeroOccurrence {
            f_x: counts.f_x,
            f_y: counts.f_y,
        });
    }
    let f_max = counts.f_x.max(counts.f_y);
    let f_min = counts.f_x.min(counts.f_y);
    if f_min == counts.m {
        return Err(MeasureError::SingularDenominator { f_min, m: counts.m });
    }
    let denominator = ln_ratio(counts.m, f_min);
    let numerator = match variant {
        Variant::Paper => ln_ratio(f_max, f_min),
        Variant::Legacy => {
            if counts.f_xy == 0 {
                return Ok(f64::INFINITY);
            }
            ln_ratio(f_max, counts.f_xy)
        }
    };
    Ok(numerator / denominator)
}

fn clamp_unit(value: f64, clamped: &mut bool) -> f64 {
    if value < 0.0 {
        *clamped = true;
        0.0
    } else if value > 1.0 {
        *clamped = true;
        1.0
    } else {
        value
    }
}

/// Score one pair: evaluate PMI and the spread term, normalize each by
/// its context constant, clamp into [0,1], and weight by `rho`.
///
/// The pair is oriented internally so the more frequent term is `x`;
/// equal counts fall back to lexicographic label order. The returned
/// report reflects that canonical orientation, which makes the whole
/// operation symmetric in its inputs.
pub fn pming_pair(
    x: &str,
    y: &str,
    counts: PairCounts,
    params: &MeasureParams,
) -> Result<ScoreReport, MeasureError> {
    let swap = counts.f_y > counts.f_x || (counts.f_y == counts.f_x && y < x);
    let (x, y, counts) = if swap {
        (y, x, counts.swapped())
    } else {
        (x, y, counts)
    };

    let mut flags = Flags {
        inconsistent_counts: counts.inconsistent(),
        ..Flags::default()
    };

    let pmi_value = pmi(&counts)?;
    let spread_value = spread_term(&counts, params.variant)?;

    let component_pmi = if pmi_value == f64::NEG_INFINITY {
        flags.zero_cooccurrence = true;
        1.0
    } else {
        clamp_unit(1.0 - pmi_value / params.mu1, &mut flags.clamped_pmi)
    };

    let component_spread = if params.mu2 == 0.0 {
        flags.degenerate_spread = true;
        0.0
    } else {
        clamp_unit(spread_value / params.mu2, &mut flags.clamped_spread)
    };

    let pming = params.rho * component_pmi + (1.0 - params.rho) * component_spread;

    Ok(ScoreReport {
        x: x.to_string(),
        y: y.to_string(),
        counts,
        pmi: pmi_value,
        spread: spread_value,
        component_pmi,
        component_spread,
        pming,
        flags,
    })
}
