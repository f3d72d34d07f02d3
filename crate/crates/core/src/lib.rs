//! Time-invariant LDPC convolutional codes from the (n, k, W) ensemble on the
//! binary erasure channel.
//!
//! * [`code`]: code templates (delay matrices), sampling and the text format
//! * [`tanner`]: terminated, zero-seeded Tanner graphs
//! * [`encode`]: staircase orders and sequential encoding
//! * [`channel`]: erasure patterns
//! * [`decode`]: peeling decoder and the exact elimination oracle
//! * [`stopping`]: stopping-set bound, exact search and sampling
//! * [`sweep`] / [`fit`]: Monte Carlo sweeps, floor slopes and thresholds

pub mod channel;
pub mod code;
pub mod decode;
pub mod encode;
pub mod error;
pub mod fit;
pub mod gf2;
pub mod scalar;
pub mod seed;
pub mod stopping;
pub mod sweep;
pub mod tanner;

pub use channel::ErasurePattern;
pub use code::{CodeSpec, DiffVector};
pub use decode::{is_stopping_set, map_oracle, peel, DecodeResult, MapOutcome, Schedule};
pub use encode::{encode, find_staircase, EncodeOrder, Termination};
pub use error::{Error, Result};
pub use fit::{fit_floor_slope, threshold_estimate};
pub use scalar::Scalar;
pub use stopping::{
    lemma_bound, sample_stopping_sets, search_min_stopping_set, SearchConfig, SearchScope,
    StoppingSearchResult,
};
pub use sweep::{sweep, CodePolicy, SweepConfig, SweepReport, SweepRow};
pub use tanner::{CheckId, CheckInstance, TannerGraph, VarId, Variable};

pub type FloorFit = fit::FloorFit<f64>;
pub type FloorFit32 = fit::FloorFit<f32>;
