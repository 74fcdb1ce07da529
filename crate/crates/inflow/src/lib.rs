//! Incoming traffic intensity estimation from vehicular edge pixels.
//!
//! A camera frame of a road approach is reduced to three numbers: the
//! count of vehicular edge pixels in the near, mid and far zones of the
//! road. A small feed-forward network maps those counts to a traffic
//! intensity on a 1 (very low) to 5 (very high) scale. Static road
//! features such as lane marks are rejected by comparing the runtime edge
//! map against a stored zero-traffic reference.
//!
//! The crate is organized around that flow:
//!
//! - [`imaging`] — rasters, grayscale conversion, Gaussian smoothing and
//!   the Canny edge detector, plus PGM/PPM readers and writers.
//! - [`zones`] — the near/mid/far road partition and per-zone counting.
//! - [`staticfilter`] — zero-traffic reference comparison and calibration.
//! - [`mlp`] — the 3-10-20-10-10-5 network: inference, training,
//!   evaluation, model files and dataset manifests.
//! - [`synth`] — deterministic synthetic scene generator with a rule-based
//!   oracle labeler, for desk-scale training and evaluation.
//! - [`pipeline`] — end-to-end frame processing with per-stage timing.
//! - [`cli`] — the `inflow` command-line tool.
//!
//! See the crate examples for one runnable program per capability.

pub mod cli;
pub mod error;
pub mod imaging;
pub mod mlp;
pub mod pipeline;
pub mod staticfilter;
pub mod synth;
pub mod zones;

pub use error::{Error, Result};
