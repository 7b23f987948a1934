//! The problem model: price bounds, validated sequences, trade outcomes,
//! and competitive-ratio arithmetic.
//!
//! Everything here is immutable after construction and every operation is a
//! pure function, so values can be shared and evaluated concurrently without
//! coordination.

use crate::error::Error;

/// The known price corridor: every quotation lies in `[m, M]` with
/// `0 < m <= M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarketBounds {
    lower: f64,
    upper: f64,
}

impl MarketBounds {
    pub fn new(lower: f64, upper: f64) -> Result<Self, Error> {
        if !lower.is_finite() || !upper.is_finite() || lower <= 0.0 || lower > upper {
            return Err(Error::InvalidBounds { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// The floor price `m`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// The ceiling price `M`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Fluctuation ratio `M/m`, always >= 1.
    pub fn fluctuation(&self) -> f64 {
        self.upper / self.lower
    }

    pub fn contains(&self, price: f64) -> bool {
        price.is_finite() && self.lower <= price && price <= self.upper
    }
}

/// An ordered list of daily quotations, each validated against its corridor.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSequence {
    prices: Vec<f64>,
    bounds: MarketBounds,
}

impl PriceSequence {
    /// Validates the prices against the corridor. Fails with the first
    /// offending day on a range violation.
    pub fn new(prices: Vec<f64>, bounds: MarketBounds) -> Result<Self, Error> {
        if prices.is_empty() {
            return Err(Error::EmptySequence);
        }
        for (idx, &price) in prices.iter().enumerate() {
            if !bounds.contains(price) {
                return Err(Error::PriceOutOfRange {
                    day: idx + 1,
                    price,
                    lower: bounds.lower(),
                    upper: bounds.upper(),
                });
            }
        }
        Ok(Self { prices, bounds })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Number of trading days `n` (>= 1).
    pub fn n(&self) -> usize {
        self.prices.len()
    }

    pub fn bounds(&self) -> MarketBounds {
        self.bounds
    }

    /// Quotation on a 1-based day. Panics if the day is out of range; use
    /// [`PriceSequence::n`] to check first.
    pub fn price_on(&self, day: usize) -> f64 {
        self.prices[day - 1]
    }

    /// The forced-acceptance price of the final day.
    pub fn last(&self) -> f64 {
        *self.prices.last().expect("sequence is non-empty")
    }
}

/// The day the player traded and the price it obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TradeOutcome {
    /// 1-based trading day.
    pub day: usize,
    /// The price obtained, equal to the sequence's quotation on `day`.
    pub profit: f64,
}

/// Profit of the player next to the offline optimum, with their ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompetitiveReport {
    pub alg_profit: f64,
    pub opt_profit: f64,
    /// `opt_profit / alg_profit`, >= 1 whenever the outcomes are consistent.
    pub ratio: f64,
}

/// The offline optimum: the earliest day achieving the maximum price.
///
/// Ties are broken to the earliest day so that the optimal-day advice is
/// deterministic and its encoding unambiguous.
pub fn optimal_offline(seq: &PriceSequence) -> TradeOutcome {
    let mut day = 1;
    let mut profit = seq.prices()[0];
    for (idx, &price) in seq.prices().iter().enumerate().skip(1) {
        if price > profit {
            profit = price;
            day = idx + 1;
        }
    }
    TradeOutcome { day, profit }
}

/// Ratio of the offline optimum to the player's profit (maximization
/// convention, never inverted).
///
/// Both outcomes must refer to the same sequence; an algorithm profit above
/// the optimum signals a harness bug and is rejected.
pub fn competitive_ratio(alg: TradeOutcome, opt: TradeOutcome) -> Result<CompetitiveReport, Error> {
    if alg.profit > opt.profit {
        return Err(Error::InconsistentOutcomes {
            alg: alg.profit,
            opt: opt.profit,
        });
    }
    Ok(CompetitiveReport {
        alg_profit: alg.profit,
        opt_profit: opt.profit,
        ratio: opt.profit / alg.profit,
    })
}
