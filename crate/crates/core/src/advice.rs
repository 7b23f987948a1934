//! The oracle side of the game: a trusted party that sees the whole input,
//! writes bits on a tape, and the encodings it uses.
//!
//! Two kinds of advice are produced here:
//!
//! - the best index into the geometric threshold ladder, written as exactly
//!   `b` bits ([`oracle_threshold_index`]);
//! - a day index, either fixed-width when the horizon `n` is known
//!   ([`encode_day_fixed`]) or self-delimiting when it is not
//!   ([`encode_day_self_delimiting`]).
//!
//! Bit conventions, fixed so that oracle and player remain separable
//! components: indices are written offset-by-one (`i - 1`), big-endian,
//! most significant bit first.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::market::{MarketBounds, PriceSequence};
use crate::strategies::{rpp_outcome, threshold_family};

/// A finite bit string written by an oracle and consumed left to right by a
/// player. The read cursor never exceeds the length.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdviceTape {
    bits: Vec<bool>,
    cursor: usize,
}

impl AdviceTape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits, cursor: 0 }
    }

    /// Total number of bits on the tape (read or not).
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bits not yet consumed by a read.
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.cursor
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends `width` bits holding `value` big-endian. Panics if the value
    /// does not fit, which would be an oracle bug.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(
            width >= 64 || value < (1u64 << width),
            "value {value} does not fit in {width} bits"
        );
        for shift in (0..width).rev() {
            self.bits.push((value >> shift) & 1 == 1);
        }
    }

    pub fn read_bit(&mut self) -> Result<bool, Error> {
        if self.cursor >= self.bits.len() {
            return Err(Error::TapeExhausted {
                needed: 1,
                available: 0,
            });
        }
        let bit = self.bits[self.cursor];
        self.cursor += 1;
        Ok(bit)
    }

    /// Reads `width` bits as a big-endian unsigned value.
    pub fn read_bits(&mut self, width: usize) -> Result<u64, Error> {
        if self.remaining() < width {
            return Err(Error::TapeExhausted {
                needed: width,
                available: self.remaining(),
            });
        }
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | u64::from(self.bits[self.cursor]);
            self.cursor += 1;
        }
        Ok(value)
    }

    /// Resets the read cursor to the start of the tape.
    pub fn rewind(&mut self) {
        self.cursor = 0;
    }
}

impl fmt::Display for AdviceTape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.bits {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for AdviceTape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::MalformedTape(format!(
                        "unexpected character {other:?}; tapes are strings of 0/1"
                    )))
                }
            }
        }
        Ok(Self::from_bits(bits))
    }
}

/// Smallest width that distinguishes `n` values: `ceil(log2 n)`, with zero
/// bits for `n = 1`.
pub fn day_bits(n: usize) -> usize {
    n.max(1).next_power_of_two().trailing_zeros() as usize
}

/// Simulates every rung of the `2^b` ladder on the full input and writes the
/// smallest index achieving the largest profit, as exactly `b` bits.
///
/// Picking the largest profit is the same as picking the best competitive
/// ratio, since the offline optimum is fixed per sequence. Ties go to the
/// smallest index. `b = 0` writes an empty tape: there is nothing to choose.
pub fn oracle_threshold_index(
    b: u32,
    bounds: MarketBounds,
    seq: &PriceSequence,
) -> Result<AdviceTape, Error> {
    let family = threshold_family(b, bounds)?;
    let mut best_index = 1usize;
    let mut best_profit = f64::NEG_INFINITY;
    for (idx0, &reservation) in family.thresholds().iter().enumerate() {
        let profit = rpp_outcome(reservation, seq).profit;
        if profit > best_profit {
            best_profit = profit;
            best_index = idx0 + 1;
        }
    }
    let mut tape = AdviceTape::new();
    tape.push_uint((best_index - 1) as u64, b as usize);
    Ok(tape)
}

/// Fixed-width day encoding: `ceil(log2 n)` bits holding `day - 1`
/// big-endian. A horizon of one day needs zero bits.
pub fn encode_day_fixed(day: usize, n: usize) -> Result<AdviceTape, Error> {
    if day < 1 || day > n {
        return Err(Error::DayOutOfRange { day, n });
    }
    let mut tape = AdviceTape::new();
    tape.push_uint((day - 1) as u64, day_bits(n));
    Ok(tape)
}

/// Self-delimiting day encoding for unknown horizons. With
/// `w = ceil(log2 n)`: `w - 1` one-bits and a zero terminator announce the
/// payload width in unary, then `w` bits hold `day - 1` big-endian. Exactly
/// `2w` bits in total, so the reader knows where to stop.
pub fn encode_day_self_delimiting(day: usize, n: usize) -> Result<AdviceTape, Error> {
    if n < 2 {
        return Err(Error::SelfDelimitingUnsupported(n));
    }
    if day < 1 || day > n {
        return Err(Error::DayOutOfRange { day, n });
    }
    let width = day_bits(n);
    let mut tape = AdviceTape::new();
    for _ in 0..width - 1 {
        tape.push_bit(true);
    }
    tape.push_bit(false);
    tape.push_uint((day - 1) as u64, width);
    Ok(tape)
}

/// Inverse of the two day encoders. With a known horizon it reads
/// `ceil(log2 n)` bits; otherwise it parses the unary width first.
pub fn decode_day(tape: &mut AdviceTape, n_known: Option<usize>) -> Result<usize, Error> {
    match n_known {
        Some(n) => {
            if n == 0 {
                return Err(Error::DayOutOfRange { day: 1, n: 0 });
            }
            let width = day_bits(n);
            let raw = tape.read_bits(width).map_err(|_| {
                Error::MalformedTape(format!("payload truncated: needed {width} bit(s)"))
            })?;
            let day = raw as usize + 1;
            if day > n {
                return Err(Error::DayOutOfRange { day, n });
            }
            Ok(day)
        }
        None => {
            let mut width = 1usize;
            loop {
                let bit = tape.read_bit().map_err(|_| {
                    Error::MalformedTape("unary width run never terminated".to_string())
                })?;
                if !bit {
                    break;
                }
                width += 1;
                if width > 64 {
                    return Err(Error::MalformedTape(
                        "unary width run exceeds 64 bits".to_string(),
                    ));
                }
            }
            let raw = tape.read_bits(width).map_err(|_| {
                Error::MalformedTape(format!("payload truncated: needed {width} bit(s)"))
            })?;
            Ok(raw as usize + 1)
        }
    }
}
