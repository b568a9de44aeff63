//! Simulation of the KPT interpolation game over the induction disjunction
//! of a disjoint NP pair, and of the reduction that turns a winning Student
//! into a distinguisher for the pair.

pub mod bits;
pub mod encoding;
pub mod game;
pub mod np_pair;
pub mod reduction;
pub mod seed;
pub mod stats;

pub use bits::{BitString, Side, Witness};
pub use np_pair::{make_easy_pair, make_overlap_pair, make_perm_pair, NpPair, PermPairConfig};
pub use seed::SeedStream;
