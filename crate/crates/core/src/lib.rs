//! Locality-preserving (coloured) bin packing.

pub mod aptas;
pub mod classic;
pub mod error;
pub mod instances;
pub mod io;
pub mod metrics;
pub mod model;
pub mod offline;
pub mod online;
pub mod oracle;
pub mod rational;
pub mod registry;
pub mod validate;

pub use error::{Error, Result};
pub use metrics::{bins_spanned, compute_stretch, OptSource, StretchReport};
pub use model::{Bin, BinId, BinKind, Colour, Instance, Item, ItemId, Packing, Provenance, Region};
pub use oracle::OracleResult;
pub use rational::Rational;
pub use validate::{validate_packing, ValidationReport, Violation};
pub use online::{OnlineAlgorithm, Placement};
pub use registry::{run_algorithm, Algorithm, RunOutput, RunParams};
