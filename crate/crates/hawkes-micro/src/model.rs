//! Core model types: exponential excitation kernels, parameter sets for the
//! univariate (2-stream) and bivariate (4-stream) mutually exciting systems,
//! event logs, and tick-level price paths.
//!
//! # Model
//!
//! A price `X(t)` is driven by counting processes of its upward and downward
//! unit jumps, `X(t) = N_up(t) - N_down(t)`. Each stream has a stochastic
//! intensity
//!
//! ```text
//! lambda_i(t) = mu_i + sum_j integral phi_ij(t - s) dN_j(s)
//! ```
//!
//! with causal exponential kernels `phi(t) = alpha * exp(-beta * t)` for
//! `t >= 0`. In the univariate model only the cross terms are kept (an up
//! move excites the downward intensity and vice versa), which produces
//! microscopic mean reversion. The bivariate model couples two such prices
//! through up-up and down-down excitation between assets.
//!
//! The system is stable (admits a stationary version) when the spectral
//! radius of the matrix of kernel L1 norms `alpha_ij / beta_ij` is below 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from parameter validation and model queries.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("unstable parameters: spectral radius {radius} >= 1")]
    Unstable { radius: f64 },
    #[error("invalid stream index {stream} for a {dimension}-stream model")]
    InvalidStream { stream: u8, dimension: u8 },
    #[error("invalid event log: {0}")]
    InvalidEventLog(String),
    #[error("kernel outside the allowed coupling pattern at ({row}, {col})")]
    OffPatternKernel { row: usize, col: usize },
}

/// Causal exponential excitation kernel `phi(t) = alpha * exp(-beta * t)`
/// for `t >= 0`, zero for `t < 0`. Rates are in 1/seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpKernel {
    /// Excitation amplitude (1/s).
    pub alpha: f64,
    /// Decay rate (1/s).
    pub beta: f64,
}

impl ExpKernel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(ModelError::InvalidKernel(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(ModelError::InvalidKernel(format!(
                "beta must be finite and > 0, got {beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// A kernel that never excites anything.
    pub fn zero() -> Self {
        Self { alpha: 0.0, beta: 1.0 }
    }

    /// A vanishing kernel carrying an explicit decay rate, for models whose
    /// closed forms require one shared rate across all kernels.
    pub fn zero_with_beta(beta: f64) -> Self {
        Self { alpha: 0.0, beta }
    }

    /// Kernel value at lag `t`; zero for `t < 0` (causality).
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.alpha * (-self.beta * t).exp()
        }
    }

    /// L1 norm `alpha / beta`, the branching ratio of this kernel.
    pub fn l1_norm(&self) -> f64 {
        self.alpha / self.beta
    }
}

/// Parameters of the univariate price model: two streams (up, down) with a
/// common exogenous intensity `mu` and one cross-excitation kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnivariateParams {
    /// Exogenous intensity of each stream (1/s).
    pub mu: f64,
    /// Cross-excitation kernel: up jumps excite the downward intensity and
    /// vice versa.
    pub kernel: ExpKernel,
}

impl UnivariateParams {
    pub fn new(mu: f64, kernel: ExpKernel) -> Result<Self, ModelError> {
        if !mu.is_finite() || mu <= 0.0 {
            return Err(ModelError::InvalidParameters(format!(
                "mu must be finite and > 0, got {mu}"
            )));
        }
        let params = Self { mu, kernel };
        let radius = params.spectral_radius();
        if radius >= 1.0 {
            return Err(ModelError::Unstable { radius });
        }
        Ok(params)
    }

    /// Convenience constructor from raw rates.
    pub fn from_rates(mu: f64, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        Self::new(mu, ExpKernel::new(alpha, beta)?)
    }

    /// Branching ratio `alpha / beta`; stability needs this below 1.
    pub fn spectral_radius(&self) -> f64 {
        self.kernel.l1_norm()
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Stationary event rate of each stream, `mu / (1 - alpha/beta)`.
    pub fn mean_rate(&self) -> f64 {
        self.mu / (1.0 - self.kernel.l1_norm())
    }
}

impl Default for UnivariateParams {
    /// Canonical desk-scale parameters (rates in 1/s).
    fn default() -> Self {
        Self {
            mu: 0.016,
            kernel: ExpKernel { alpha: 0.023, beta: 0.11 },
        }
    }
}

/// Parameters of the bivariate price model: four streams
/// (1 = up asset 1, 2 = down asset 1, 3 = up asset 2, 4 = down asset 2).
///
/// Only four couplings are allowed: the within-asset mean-reversion kernels
/// `k12` (stream 1 <-> 2) and `k34` (stream 3 <-> 4), and the across-asset
/// co-movement kernels `k13` (asset 2 jumps excite same-signed asset 1
/// intensities) and `k31` (the reverse). The full kernel matrix is
///
/// ```text
///        | 0    k12  k13  0   |
///  Phi = | k12  0    0    k13 |
///        | k31  0    0    k34 |
///        | 0    k31  k34  0   |
/// ```
///
/// Any other coupling (self-excitation, up-down across assets) is rejected
/// at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateParams {
    /// Exogenous intensity of streams 1 and 2 (1/s).
    pub mu1: f64,
    /// Exogenous intensity of streams 3 and 4 (1/s).
    pub mu3: f64,
    /// Within-asset-1 mean-reversion kernel.
    pub k12: ExpKernel,
    /// Asset-2 -> asset-1 co-movement kernel.
    pub k13: ExpKernel,
    /// Asset-1 -> asset-2 co-movement kernel.
    pub k31: ExpKernel,
    /// Within-asset-2 mean-reversion kernel.
    pub k34: ExpKernel,
}

impl BivariateParams {
    pub fn new(
        mu1: f64,
        mu3: f64,
        k12: ExpKernel,
        k13: ExpKernel,
        k31: ExpKernel,
        k34: ExpKernel,
    ) -> Result<Self, ModelError> {
        if !mu1.is_finite() || mu1 <= 0.0 || !mu3.is_finite() || mu3 <= 0.0 {
            return Err(ModelError::InvalidParameters(format!(
                "mu1 and mu3 must be finite and > 0, got {mu1}, {mu3}"
            )));
        }
        let params = Self { mu1, mu3, k12, k13, k31, k34 };
        let radius = params.spectral_radius();
        if radius >= 1.0 {
            return Err(ModelError::Unstable { radius });
        }
        Ok(params)
    }

    /// Fully symmetric model: `k12 = k34`, `k13 = k31`, `mu1 = mu3`, a
    /// single decay rate `beta`.
    pub fn symmetric(mu: f64, alpha12: f64, alpha13: f64, beta: f64) -> Result<Self, ModelError> {
        let k12 = ExpKernel::new(alpha12, beta)?;
        let k13 = ExpKernel::new(alpha13, beta)?;
        Self::new(mu, mu, k12, k13, k13, k12)
    }

    /// Build from a full 4x4 kernel matrix, rejecting any entry outside the
    /// allowed coupling pattern.
    pub fn from_kernel_matrix(
        mu1: f64,
        mu3: f64,
        kernels: [[Option<ExpKernel>; 4]; 4],
    ) -> Result<Self, ModelError> {
        // Zero pattern: rows/cols are streams 1..4.
        const ALLOWED: [[bool; 4]; 4] = [
            [false, true, true, false],
            [true, false, false, true],
            [false, false, false, true],
            [false, true, true, false],
        ];
        // (3,1) holds k31; fix the table: stream 3 is excited by streams 1 and 4.
        let allowed = {
            let mut a = ALLOWED;
            a[2] = [true, false, false, true];
            a
        };
        for (i, row) in kernels.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                if let Some(k) = entry {
                    if !allowed[i][j] && k.alpha != 0.0 {
                        return Err(ModelError::OffPatternKernel { row: i + 1, col: j + 1 });
                    }
                }
            }
        }
        let take = |i: usize, j: usize| kernels[i][j].unwrap_or_else(ExpKernel::zero);
        let (k12, k13) = (take(0, 1), take(0, 2));
        let (k31, k34) = (take(2, 0), take(2, 3));
        // The pattern repeats each kernel twice; mismatched duplicates are
        // rejected so the matrix cannot silently disagree with itself.
        for (a, b, name) in [
            (take(1, 0), k12, "k12"),
            (take(1, 3), k13, "k13"),
            (take(3, 1), k31, "k31"),
            (take(3, 2), k34, "k34"),
        ] {
            if a != b {
                return Err(ModelError::InvalidParameters(format!(
                    "mirrored entries for {name} disagree"
                )));
            }
        }
        Self::new(mu1, mu3, k12, k13, k31, k34)
    }

    /// Kernel L1 norms arranged as the reduced 2x2 coupling matrix
    /// `[[g12, g13], [g31, g34]]`.
    pub fn gammas(&self) -> [[f64; 2]; 2] {
        [
            [self.k12.l1_norm(), self.k13.l1_norm()],
            [self.k31.l1_norm(), self.k34.l1_norm()],
        ]
    }

    /// Spectral radius of the 4x4 matrix of kernel L1 norms.
    ///
    /// The coupling pattern makes the 4x4 spectrum the union of the spectra
    /// of `[[g12, g13], [g31, g34]]` and its negation (pair eigenvectors of
    /// the form `(x, x, y, y)` and `(x, -x, y, -y)`), so the radius is the
    /// Perron root of the reduced nonnegative 2x2 matrix.
    pub fn spectral_radius(&self) -> f64 {
        let [[g12, g13], [g31, g34]] = self.gammas();
        let half_trace = 0.5 * (g12 + g34);
        let disc = 0.25 * (g12 - g34) * (g12 - g34) + g13 * g31;
        half_trace + disc.max(0.0).sqrt()
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Stationary mean intensity of each stream, solving
    /// `(Id - Gamma) Lambda = mu` for the 4x4 norm matrix.
    ///
    /// Streams 1/2 and 3/4 share their rates by construction.
    pub fn mean_intensities(&self) -> Result<[f64; 4], ModelError> {
        let [[g12, g13], [g31, g34]] = self.gammas();
        let gamma = [
            [0.0, g12, g13, 0.0],
            [g12, 0.0, 0.0, g13],
            [g31, 0.0, 0.0, g34],
            [0.0, g31, g34, 0.0],
        ];
        let mut a = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                a[i][j] = f64::from(i == j) - gamma[i][j];
            }
        }
        let mu = [self.mu1, self.mu1, self.mu3, self.mu3];
        solve4(a, mu).ok_or(ModelError::Unstable { radius: self.spectral_radius() })
    }

    /// Mean intensities from the explicit rational solution of the reduced
    /// system; must agree with [`Self::mean_intensities`] to roundoff.
    pub fn mean_intensities_explicit(&self) -> Result<[f64; 4], ModelError> {
        let [[g12, g13], [g31, g34]] = self.gammas();
        let det = (1.0 - g12) * (1.0 - g34) - g13 * g31;
        if det <= 0.0 {
            return Err(ModelError::Unstable { radius: self.spectral_radius() });
        }
        let l1 = (self.mu1 * (1.0 - g34) + g13 * self.mu3) / det;
        let l3 = (self.mu3 * (1.0 - g12) + g31 * self.mu1) / det;
        Ok([l1, l1, l3, l3])
    }
}

impl Default for BivariateParams {
    /// Canonical symmetric parameters with the stronger cross coupling.
    fn default() -> Self {
        Self::symmetric(0.015, 0.023, 0.05, 0.11).expect("canonical parameters are stable")
    }
}

/// Dense 4x4 linear solve by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0f64; 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in row + 1..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Either model, for callers generic over the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelParams {
    Univariate(UnivariateParams),
    Bivariate(BivariateParams),
}

impl ModelParams {
    pub fn n_streams(&self) -> u8 {
        match self {
            ModelParams::Univariate(_) => 2,
            ModelParams::Bivariate(_) => 4,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        match self {
            ModelParams::Univariate(p) => p.spectral_radius(),
            ModelParams::Bivariate(p) => p.spectral_radius(),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Kernel feeding intensity `target` from events of `source`
    /// (1-based stream indices), zero kernel where no coupling exists.
    pub fn kernel(&self, target: u8, source: u8) -> ExpKernel {
        match self {
            ModelParams::Univariate(p) => match (target, source) {
                (1, 2) | (2, 1) => p.kernel,
                _ => ExpKernel::zero(),
            },
            ModelParams::Bivariate(p) => match (target, source) {
                (1, 2) | (2, 1) => p.k12,
                (1, 3) | (2, 4) => p.k13,
                (3, 1) | (4, 2) => p.k31,
                (3, 4) | (4, 3) => p.k34,
                _ => ExpKernel::zero(),
            },
        }
    }

    /// Exogenous intensity of a stream.
    pub fn mu(&self, stream: u8) -> f64 {
        match self {
            ModelParams::Univariate(p) => p.mu,
            ModelParams::Bivariate(p) => {
                if stream <= 2 {
                    p.mu1
                } else {
                    p.mu3
                }
            }
        }
    }
}

/// One marked event: a jump of stream `stream` at `time` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub stream: u8,
}

/// Time-ordered marked events over a horizon `[0, T]`.
///
/// Repeated times within one stream are allowed (multi-tick moves ingest as
/// several unit jumps at the same timestamp) and keep their insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    events: Vec<Event>,
    horizon: f64,
}

impl EventLog {
    /// Validates ordering, the horizon, and stream indices for a model with
    /// `n_streams` streams (2 for univariate, 4 for bivariate).
    pub fn new(events: Vec<Event>, horizon: f64, n_streams: u8) -> Result<Self, ModelError> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(ModelError::InvalidEventLog(format!(
                "horizon must be finite and >= 0, got {horizon}"
            )));
        }
        let mut prev = 0.0f64;
        for (i, e) in events.iter().enumerate() {
            if !(e.time >= 0.0 && e.time <= horizon) {
                return Err(ModelError::InvalidEventLog(format!(
                    "event {i} at t = {} outside [0, {horizon}]",
                    e.time
                )));
            }
            if e.time < prev {
                return Err(ModelError::InvalidEventLog(format!(
                    "event {i} at t = {} precedes its predecessor at {prev}",
                    e.time
                )));
            }
            if e.stream == 0 || e.stream > n_streams {
                return Err(ModelError::InvalidStream { stream: e.stream, dimension: n_streams });
            }
            prev = e.time;
        }
        Ok(Self { events, horizon })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events on one stream.
    pub fn count(&self, stream: u8) -> usize {
        self.events.iter().filter(|e| e.stream == stream).count()
    }

    /// Write as CSV with columns `time,stream`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut w = writer;
        writeln!(w, "time,stream")?;
        for e in &self.events {
            writeln!(w, "{},{}", e.time, e.stream)?;
        }
        Ok(())
    }

    /// Read from the CSV produced by [`Self::write_csv`].
    pub fn read_csv<R: std::io::Read>(
        reader: R,
        horizon: f64,
        n_streams: u8,
    ) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut events = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| {
                ModelError::InvalidEventLog(format!("csv error on record {}: {e}", i + 1))
            })?;
            let parse = |idx: usize, what: &str| -> Result<f64, ModelError> {
                rec.get(idx)
                    .ok_or_else(|| {
                        ModelError::InvalidEventLog(format!("record {}: missing {what}", i + 1))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| {
                        ModelError::InvalidEventLog(format!("record {}: bad {what}: {e}", i + 1))
                    })
            };
            let time = parse(0, "time")?;
            let stream = parse(1, "stream")? as u8;
            events.push(Event { time, stream });
        }
        Self::new(events, horizon, n_streams)
    }
}

/// Conditional intensity of one stream at `t-` (strict past: events at
/// exactly `t` do not contribute), by direct summation over the log.
///
/// This is the reference evaluation; the simulator and the likelihood use
/// O(1)-per-event decay recursions that must agree with it.
pub fn intensity_at(
    params: &ModelParams,
    log: &EventLog,
    t: f64,
    stream: u8,
) -> Result<f64, ModelError> {
    let n = params.n_streams();
    if stream == 0 || stream > n {
        return Err(ModelError::InvalidStream { stream, dimension: n });
    }
    let mut lambda = params.mu(stream);
    for e in log.events() {
        if e.time >= t {
            break;
        }
        let k = params.kernel(stream, e.stream);
        if k.alpha != 0.0 {
            lambda += k.eval(t - e.time);
        }
    }
    Ok(lambda)
}

/// Which asset of a log to project onto a price path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Asset {
    /// Streams 1 (up) and 2 (down).
    First,
    /// Streams 3 (up) and 4 (down).
    Second,
}

impl Asset {
    fn streams(self) -> (u8, u8) {
        match self {
            Asset::First => (1, 2),
            Asset::Second => (3, 4),
        }
    }
}

/// Right-continuous integer step path `X(t)` built from the up/down streams
/// of one asset, with `X(0) = 0` and unit jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    /// Jump times, non-decreasing.
    times: Vec<f64>,
    /// Path value immediately after each jump.
    values: Vec<i64>,
    horizon: f64,
}

impl PricePath {
    pub fn from_log(log: &EventLog, asset: Asset) -> Self {
        let (up, down) = asset.streams();
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut level = 0i64;
        for e in log.events() {
            let step = if e.stream == up {
                1
            } else if e.stream == down {
                -1
            } else {
                continue;
            };
            level += step;
            times.push(e.time);
            values.push(level);
        }
        Self { times, values, horizon: log.horizon() }
    }

    /// Build directly from (time, +1/-1) jumps; used by ingestion.
    pub fn from_jumps(jumps: &[(f64, i64)], horizon: f64) -> Self {
        let mut times = Vec::with_capacity(jumps.len());
        let mut values = Vec::with_capacity(jumps.len());
        let mut level = 0i64;
        for &(t, step) in jumps {
            level += step;
            times.push(t);
            values.push(level);
        }
        Self { times, values, horizon }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_jumps(&self) -> usize {
        self.times.len()
    }

    /// Path value at time `t` (previous-tick convention: the value set by
    /// the last jump at or before `t`).
    pub fn value_at(&self, t: f64) -> i64 {
        match self.times.partition_point(|&u| u <= t) {
            0 => 0,
            k => self.values[k - 1],
        }
    }

    /// Final value `X(horizon)`.
    pub fn final_value(&self) -> i64 {
        self.values.last().copied().unwrap_or(0)
    }

    /// Increments `X(n tau + lag + tau) - X(n tau + lag)` for
    /// `n = 0 .. floor((T - lag) / tau) - 1`, walking the grid and the jump
    /// list in one pass.
    ///
    /// `lag` shifts the sampling window; `lag = 0` gives the plain
    /// increments on the grid `t0 = n tau`.
    pub fn increments(&self, tau: f64, lag: f64) -> Result<Vec<i64>, ModelError> {
        if !(tau > 0.0) {
            return Err(ModelError::InvalidParameters(format!("tau must be > 0, got {tau}")));
        }
        if lag < 0.0 {
            return Err(ModelError::InvalidParameters(format!("lag must be >= 0, got {lag}")));
        }
        if tau + lag > self.horizon {
            return Err(ModelError::InvalidParameters(format!(
                "tau + lag = {} exceeds the horizon {}",
                tau + lag,
                self.horizon
            )));
        }
        let n = ((self.horizon - lag) / tau).floor() as usize;
        let mut out = Vec::with_capacity(n);
        let mut idx = 0usize; // first jump index with time > previous grid point
        let mut prev = {
            let t0 = lag;
            while idx < self.times.len() && self.times[idx] <= t0 {
                idx += 1;
            }
            if idx == 0 {
                0
            } else {
                self.values[idx - 1]
            }
        };
        for step in 1..=n {
            let t = lag + step as f64 * tau;
            while idx < self.times.len() && self.times[idx] <= t {
                idx += 1;
            }
            let cur = if idx == 0 { 0 } else { self.values[idx - 1] };
            out.push(cur - prev);
            prev = cur;
        }
        Ok(out)
    }
}
