//! Tilings and finite model search.

mod bounded;
mod ground;
mod tiling;

use thiserror::Error;

use crate::kripke::EvalError;

pub use bounded::{bounded_sat, enumerate_models, Goal, SearchBounds, SearchOutcome};
pub use ground::{ground_sat, GroundBounds};
pub use tiling::{
    check_tiling, find_periodic_tiling, torus_countermodel, Tile, TileSet, Tiling, TilingError,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("search needs a closed formula")]
    NotClosed,
    #[error("letter {0} is used with two arities")]
    ArityConflict(String),
    #[error("bounds too large: {0}")]
    TooLarge(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}
