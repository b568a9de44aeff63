//! Adjacent-hybrid gaps in a frequency table.

use serde::Serialize;

use super::frequency::FrequencyTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `freq(W_{t+1}) > freq(W_t)`: the answer is more likely when the
    /// string at position `t+1` is in `U`.
    Increase,
    Decrease,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub t: usize,
    pub answer: usize,
    pub direction: Direction,
    /// `freq(W_{t+1}) - freq(W_t)`.
    pub delta: f64,
}

/// Every adjacent pair of rows whose frequencies of `answer` differ by at
/// least `tau`, in increasing `t`.
pub fn adjacent_gaps(table: &FrequencyTable, answer: usize, tau: f64) -> Vec<Gap> {
    table
        .boundaries
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] == w[0] + 1)
        .filter_map(|(r, w)| {
            let delta = table.freq(r + 1, answer) - table.freq(r, answer);
            (delta.abs() >= tau).then(|| Gap {
                t: w[0],
                answer,
                direction: if delta > 0.0 { Direction::Increase } else { Direction::Decrease },
                delta,
            })
        })
        .collect()
}

/// The smallest `t` with `|freq(answer | W_t) - freq(answer | W_{t+1})| >= tau`.
pub fn find_adjacent_gap(table: &FrequencyTable, answer: usize, tau: f64) -> Option<Gap> {
    assert!(table.boundaries.len() >= 2, "need at least two hybrid rows");
    adjacent_gaps(table, answer, tau).into_iter().next()
}

/// Default gap threshold `1/(4m)`.
pub fn default_tau(m: usize) -> f64 {
    1.0 / (4 * m) as f64
}
