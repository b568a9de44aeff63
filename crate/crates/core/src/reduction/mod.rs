//! The reduction from a winning student to a distinguisher for the pair.

pub mod advantage;
pub mod distinguisher;
pub mod frequency;
pub mod gap;
pub mod hybrid;
pub mod reduce;
pub mod replay;

pub use advantage::{measure_advantage, measure_advantage_at, AdvantageEstimate};
pub use distinguisher::{Advice, AdviceBlock, Classification, Distinguisher, DistinguisherKind, Fallback, Frame};
pub use frequency::{estimate_frequency_table, exact_frequency_table, FrequencyTable};
pub use gap::{adjacent_gaps, default_tau, find_adjacent_gap, Direction, Gap};
pub use hybrid::{sample_hybrid, HybridUniverse};
pub use reduce::{kpt_reduce, Branch, ReduceOutcome, ReduceParams, Reduction, ReductionError, ReductionReport};
pub use replay::{replay, Replay, RoundCtx};
