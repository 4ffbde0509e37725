//! Streaming k-medoids for evolving streams of points and sequences.
//!
//! The engine keeps `p` medoids for each of `k` clusters. Every arriving item
//! is assigned to the cluster with the least average distance to its medoids,
//! the closest medoid gains a vote while its siblings decay, and the item then
//! replaces the least-voted medoid that was not promoted most recently. Memory
//! use is fixed at `k * p` items no matter how long the stream runs.
//!
//! Modules:
//! - [`distance`]: Euclidean and dynamic time warping distances.
//! - [`model`]: the clustering state machine and its JSON snapshots.
//! - [`streamgen`]: seeded generators for blobs, sine curves and netflow windows.
//! - [`eval`]: pairwise F1, vote traces and throughput arithmetic.
//! - [`oracle`]: slow reference implementations (exact PAM, brute-force DTW and F1).
//! - [`sampler`]: periodic medoid snapshots as a traffic summary.
//! - [`experiment`]: trial runner shared by the CLI, benches and tests.

pub mod distance;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod io;
pub mod item;
pub mod model;
pub mod oracle;
pub mod par;
pub mod sampler;
pub mod streamgen;

pub use distance::{DistanceFn, DistanceKind};
pub use error::{Error, Result};
pub use item::StreamItem;
pub use model::{AssignmentRecord, ClusterState, InitMode, Medoid, ModelState};
pub use par::Execution;
