//! Tick-by-tick price models built on mutually exciting point processes.
//!
//! Prices move by unit jumps whose up and down intensities excite each
//! other through causal exponential kernels. Cross-exciting the up and down
//! streams of one asset produces microscopic mean reversion (the rising
//! signature plot at small scales); coupling the same-signed streams of two
//! assets produces cross-correlation that builds up with the sampling scale
//! (the Epps effect). Both effects wash out into an ordinary correlated
//! diffusion at large scales, and every second-order quantity along the way
//! has a closed form.
//!
//! The crate provides, in matched pairs of closed form and estimator:
//!
//! - [`model`]: parameter types, stability checks, intensities, price paths;
//! - [`analytics`]: mean signature plot, covariance across scales, Epps
//!   curve and asymptote, lead-lag asymmetry, diffusive covariance, and the
//!   volatility-ratio function, plus numerical cross-checks in
//!   [`analytics::validation`];
//! - [`simulate`]: exact simulation by thinning, with burn-in;
//! - [`empirics`]: model-free realized estimators of the same curves;
//! - [`estimation`]: maximum-likelihood and multiscale-regression fits
//!   under the stability constraint;
//! - [`ingest`]: trade-tape CSV ingestion into per-session event logs;
//! - [`cli`]: the command-line driver behind the `hawkes-micro` binary.
//!
//! The `examples/` directory demonstrates each capability end to end; start
//! with `cargo run --release --example signature_plot`.

pub mod analytics;
pub mod cli;
pub mod curve;
pub mod empirics;
pub mod estimation;
pub mod ingest;
pub mod model;
pub mod simulate;

pub use analytics::{volatility_ratio, AnalyticsError};
pub use curve::{Curve, CurvePoint};
pub use model::{
    Asset, BivariateParams, Event, EventLog, ExpKernel, ModelError, ModelParams, PricePath,
    UnivariateParams,
};
