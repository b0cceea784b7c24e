//! Spectral alignment between learned representations and label vectors.
//!
//! The crate measures how much of a label vector's energy sits on the top
//! singular directions of a representation matrix (the alignment curve),
//! verifies closed-form batch gradient-descent convergence against the
//! iterative update, and reproduces emergence-of-alignment and
//! positive/negative-transfer experiments on synthetic benchmarks.
//!
//! Modules:
//! - [`linalg`]: dense matrices, deterministic thin SVD, projections.
//! - [`align`]: the alignment metric, threshold curves, curve differences.
//! - [`gd`]: exact and iterative GD trajectories, iteration bounds,
//!   fast/slow phase diagnostics.
//! - [`nn`]: a small deterministic MLP trainer with per-layer
//!   representation extraction.
//! - [`peaks`]: the peaks-function multitask benchmark and the transfer
//!   experiment.
//! - [`datagen`]: synthetic dataset generators and CSV ingestion.
//! - [`harness`]: experiment commands, run manifests, CSV/plot emission.
//!
//! The `repalign` binary exposes the harness as subcommands
//! (`align`, `gd`, `train`, `peaks`, `diff`); the `examples/` directory
//! shows the library API for each capability.
//!
//! ```
//! use repalign::align::alignment_at;
//! use repalign::datagen::{circle_dataset, CircleSpec};
//! use repalign::linalg::thin_svd;
//!
//! // Labels along the dominant direction carry almost all of their
//! // energy above the mid threshold.
//! let data = circle_dataset(&CircleSpec::default())?;
//! let svd = thin_svd(&data.x)?;
//! let mid = 0.5 * (svd.sigma[0] + svd.sigma[1]);
//! assert!(alignment_at(&svd, &data.y, mid)? > 99.0);
//! # Ok::<(), repalign::Error>(())
//! ```

pub mod align;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod gd;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod nn;
pub mod peaks;

pub use dataset::Dataset;
pub use error::{Error, Result};
