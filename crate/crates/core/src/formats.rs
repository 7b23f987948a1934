//! On-disk formats: JSON sequence documents, a plain-lines variant, the
//! adversary transcript and staircase exports, and bound-curve tables.
//!
//! Text renderings carry at least 12 significant digits so downstream
//! consumers reproduce results; bit-exactness is not promised (tolerances in
//! the consuming checks are 1e-9 relative). JSON numbers round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryCase, AdversaryTranscript, StaircaseFamily};
use crate::analysis::BoundCurve;
use crate::error::Error;
use crate::market::{MarketBounds, PriceSequence};

/// Full-precision decimal rendering (18 significant digits) used in CSV and
/// plain-lines output.
pub fn fmt_full(value: f64) -> String {
    format!("{value:.17e}")
}

/// Sequence document: `{"m": .., "M": .., "prices": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDoc {
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    pub prices: Vec<f64>,
}

impl SequenceDoc {
    pub fn from_sequence(seq: &PriceSequence) -> Self {
        Self {
            m: seq.bounds().lower(),
            upper: seq.bounds().upper(),
            prices: seq.prices().to_vec(),
        }
    }

    /// Re-validates the document's prices against its own bounds.
    pub fn into_sequence(self) -> Result<PriceSequence, Error> {
        let bounds = MarketBounds::new(self.m, self.upper)?;
        PriceSequence::new(self.prices, bounds)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence docs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))
    }
}

/// Plain-lines variant: one price per line, bounds supplied out of band.
pub fn sequence_to_plain(seq: &PriceSequence) -> String {
    let mut out = String::new();
    for &price in seq.prices() {
        out.push_str(&fmt_full(price));
        out.push('\n');
    }
    out
}

/// Parses the plain-lines variant; blank lines are ignored.
pub fn sequence_from_plain(text: &str, bounds: MarketBounds) -> Result<PriceSequence, Error> {
    let mut prices = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let price: f64 = trimmed.parse().map_err(|_| {
            Error::MalformedDocument(format!("line {}: not a number: {trimmed:?}", lineno + 1))
        })?;
        prices.push(price);
    }
    PriceSequence::new(prices, bounds)
}

/// Serialized form of [`AdversaryCase`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptCase {
    AllRejectedAt(usize),
    AllAcceptedThenMax,
}

impl From<AdversaryCase> for TranscriptCase {
    fn from(case: AdversaryCase) -> Self {
        match case {
            AdversaryCase::AllRejectedAt(round) => TranscriptCase::AllRejectedAt(round),
            AdversaryCase::AllAcceptedThenMax => TranscriptCase::AllAcceptedThenMax,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptMeta {
    pub case: TranscriptCase,
    pub forced_ratio: f64,
    pub b: u32,
    pub num_policies: usize,
    pub best_policy_profit: f64,
    pub opt_day: usize,
    pub opt_profit: f64,
}

/// Adversary transcript export: the constructed sequence in the standard
/// sequence schema plus a metadata block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptDoc {
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    pub prices: Vec<f64>,
    pub metadata: TranscriptMeta,
}

impl TranscriptDoc {
    pub fn from_transcript(transcript: &AdversaryTranscript, b: u32) -> Self {
        let bounds = transcript.sequence.bounds();
        Self {
            m: bounds.lower(),
            upper: bounds.upper(),
            prices: transcript.sequence.prices().to_vec(),
            metadata: TranscriptMeta {
                case: transcript.case_taken.into(),
                forced_ratio: transcript.forced_ratio,
                b,
                num_policies: transcript.num_policies,
                best_policy_profit: transcript.best_policy_profit,
                opt_day: transcript.opt.day,
                opt_profit: transcript.opt.profit,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript docs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))
    }
}

/// Staircase family export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaircaseDoc {
    pub m: f64,
    #[serde(rename = "M")]
    pub upper: f64,
    pub n: usize,
    pub delta: f64,
    pub members: Vec<Vec<f64>>,
}

impl StaircaseDoc {
    pub fn from_family(family: &StaircaseFamily) -> Self {
        Self {
            m: family.bounds().lower(),
            upper: family.bounds().upper(),
            n: family.n(),
            delta: family.delta(),
            members: family
                .members()
                .iter()
                .map(|member| member.prices().to_vec())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("staircase docs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))
    }
}

/// Structured-document variant of a bound curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDoc {
    pub fluctuation: f64,
    pub det_bound: f64,
    pub rand_upper: f64,
    pub rand_lower: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossover: Option<f64>,
    pub rows: Vec<CurveRowDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRowDoc {
    pub b: f64,
    pub advice_bound: f64,
}

impl CurveDoc {
    pub fn from_curve(curve: &BoundCurve) -> Self {
        Self {
            fluctuation: curve.fluctuation,
            det_bound: curve.det_bound,
            rand_upper: curve.rand_upper,
            rand_lower: curve.rand_lower,
            crossover: curve.crossover,
            rows: curve
                .rows
                .iter()
                .map(|row| CurveRowDoc {
                    b: row.b,
                    advice_bound: row.advice_bound,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve docs always serialize")
    }
}

fn fmt_budget(b: f64) -> String {
    if b.fract() == 0.0 && b.abs() < 1e15 {
        format!("{}", b as i64)
    } else {
        format!("{b}")
    }
}

/// CSV rendering of a bound curve: a metadata comment carrying fluctuation
/// and crossover (left empty when undefined, never a sentinel), the header
/// `b,advice_bound,det_bound,rand_upper,rand_lower`, one row per budget.
pub fn curve_to_csv(curve: &BoundCurve) -> String {
    let crossover = curve.crossover.map(fmt_full).unwrap_or_default();
    let mut out = format!(
        "# fluctuation={} crossover={}\n",
        fmt_full(curve.fluctuation),
        crossover
    );
    out.push_str("b,advice_bound,det_bound,rand_upper,rand_lower\n");
    for row in &curve.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_budget(row.b),
            fmt_full(row.advice_bound),
            fmt_full(curve.det_bound),
            fmt_full(curve.rand_upper),
            fmt_full(curve.rand_lower),
        ));
    }
    out
}
