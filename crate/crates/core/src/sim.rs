//! Monte-Carlo estimation of outage probability and ergodic sum rate.
//!
//! Trial `i` always draws from the stream `derive_trial_stream(seed, i)`, and
//! trials are grouped into fixed-size blocks whose partial results are merged
//! in block order. Results are therefore bit-identical for any worker count.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{sample_snapshot, ChannelSnapshot, FadingSpec, NetworkGeometry};
use crate::error::{Error, Result};
use crate::pairing::{Pairing, PairingStrategy};
use crate::schemes::{scheme_rates, PowerSplit, RateReport, SchemeFamily, SchemeId, SnrPoint};

/// Random stream handed to a single trial.
pub type TrialRng = ChaCha8Rng;

/// Trials per work unit. Changing this changes float summation order.
const BLOCK_TRIALS: u64 = 1024;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Below this many outage events the normal-approximation interval is unreliable.
pub const MIN_RELIABLE_EVENTS: u64 = 10;

/// Independent stream for trial `trial_index`: the ChaCha stream id is the
/// trial index under a key expanded from `master_seed`.
pub fn derive_trial_stream(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    points_db: Vec<f64>,
}

impl SnrGrid {
    pub fn new(points_db: Vec<f64>) -> Result<Self> {
        if points_db.is_empty() {
            return Err(Error::domain("SNR grid must contain at least one point"));
        }
        if let Some(p) = points_db.iter().find(|p| !p.is_finite()) {
            return Err(Error::domain(format!("SNR grid point {p} is not finite")));
        }
        if points_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("SNR grid must be strictly ascending"));
        }
        Ok(Self { points_db })
    }

    pub fn points_db(&self) -> &[f64] {
        &self.points_db
    }

    pub fn len(&self) -> usize {
        self.points_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_db.is_empty()
    }

    fn snr_points(&self) -> Result<Vec<SnrPoint>> {
        self.points_db.iter().map(|&db| SnrPoint::from_db(db)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; 1 runs on the calling thread.
    pub workers: usize,
}

impl MonteCarloConfig {
    pub fn new(trials: u64, master_seed: u64, workers: usize) -> Result<Self> {
        let mc = Self {
            trials,
            master_seed,
            workers,
        };
        mc.validate()?;
        Ok(mc)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::contract("Monte-Carlo run needs at least one trial"));
        }
        if self.workers == 0 {
            return Err(Error::contract("worker count must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutageMode {
    /// Outage of one user, by index into the snapshot's users.
    PerUser(usize),
    /// Outage when any user misses its target.
    AnyUser,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageSpec {
    pub target_rates: Vec<f64>,
    pub mode: OutageMode,
}

impl OutageSpec {
    pub fn new(target_rates: Vec<f64>, mode: OutageMode) -> Result<Self> {
        if let Some(t) = target_rates.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::domain(format!(
                "target rates must be finite and >= 0, got {t}"
            )));
        }
        if let OutageMode::PerUser(u) = mode {
            if u >= target_rates.len() {
                return Err(Error::contract(format!(
                    "outage user {} has no target rate",
                    u + 1
                )));
            }
        }
        Ok(Self { target_rates, mode })
    }

    /// True when `report` is in outage: a rate strictly below its target.
    pub fn is_outage(&self, report: &RateReport) -> bool {
        let below = |u: usize| report.per_user_rates[u] < self.target_rates[u];
        match self.mode {
            OutageMode::PerUser(u) => below(u),
            OutageMode::AnyUser => (0..self.target_rates.len()).any(below),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    ErgodicSumRate,
    Outage(OutageMode),
}

impl MetricKind {
    /// Identifier written to the CSV `metric` column.
    pub fn name(&self) -> String {
        match self {
            MetricKind::ErgodicSumRate => "sum-rate".to_string(),
            MetricKind::Outage(OutageMode::AnyUser) => "outage-any".to_string(),
            MetricKind::Outage(OutageMode::PerUser(u)) => format!("outage-u{}", u + 1),
        }
    }

    pub fn is_outage(&self) -> bool {
        matches!(self, MetricKind::Outage(_))
    }
}

/// Channel and power configuration shared by every scheme in an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub geometry: NetworkGeometry,
    pub fading: FadingSpec,
    /// Split used inside every two-user NOMA block, strong user first.
    pub pair_split: PowerSplit,
    /// Single-carrier NOMA split indexed strongest user first.
    pub sc_split: PowerSplit,
}

impl SystemModel {
    pub fn new(geometry: NetworkGeometry, fading: FadingSpec) -> Result<Self> {
        let sc_split = default_sc_split(geometry.user_count())?;
        Ok(Self {
            geometry,
            fading,
            pair_split: PowerSplit::pair(0.25, 0.75)?,
            sc_split,
        })
    }

    fn splits_for(&self, family: SchemeFamily) -> Vec<PowerSplit> {
        match family {
            SchemeFamily::ScNoma => vec![self.sc_split.clone()],
            SchemeFamily::Tdma | SchemeFamily::Oma => Vec::new(),
            _ => vec![self.pair_split.clone()],
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> ChannelSnapshot {
        sample_snapshot(&self.geometry, &self.fading, rng)
    }
}

/// Coefficients `k / (1 + 2 + ... + n)` for `k = 1..=n`; (0.1, 0.2, 0.3, 0.4) for four users.
pub fn default_sc_split(users: usize) -> Result<PowerSplit> {
    if users == 1 {
        return Err(Error::contract(
            "single-carrier NOMA split needs at least two users",
        ));
    }
    let total = (users * (users + 1) / 2) as f64;
    PowerSplit::new((1..=users).map(|k| k as f64 / total).collect())
}

/// Pairing rule used when a hybrid scheme does not name one.
pub fn default_strategy(family: SchemeFamily) -> Option<PairingStrategy> {
    match family {
        SchemeFamily::HybridNF => Some(PairingStrategy::NearFar),
        SchemeFamily::HybridNNFF => Some(PairingStrategy::NearNear),
        _ => None,
    }
}

/// One scheme under one model, ready to be evaluated trial by trial.
#[derive(Debug, Clone)]
pub struct SchemeRun<'a> {
    pub scheme: SchemeId,
    pub model: &'a SystemModel,
    /// Only used by hybrid schemes; `None` selects [`default_strategy`].
    pub strategy: Option<PairingStrategy>,
}

impl<'a> SchemeRun<'a> {
    pub fn new(scheme: SchemeId, model: &'a SystemModel, strategy: Option<PairingStrategy>) -> Self {
        Self {
            scheme,
            model,
            strategy,
        }
    }

    fn strategy(&self) -> Option<PairingStrategy> {
        if self.scheme.family.is_hybrid() {
            self.strategy.or(default_strategy(self.scheme.family))
        } else {
            None
        }
    }

    /// Checks user counts and split arities before any trial runs.
    pub fn validate(&self) -> Result<()> {
        let n = self.model.geometry.user_count();
        let family = self.scheme.family;
        if family.is_two_user() && n != 2 {
            return Err(Error::contract(format!(
                "{} serves exactly 2 users, geometry has {n}",
                self.scheme
            )));
        }
        if family.is_hybrid() && (n == 0 || n % 2 != 0) {
            return Err(Error::contract(format!(
                "{} needs an even user count, geometry has {n}",
                self.scheme
            )));
        }
        if family == SchemeFamily::ScNoma && self.model.sc_split.len() != n {
            return Err(Error::contract(format!(
                "single-carrier NOMA split has {} coefficients for {n} users",
                self.model.sc_split.len()
            )));
        }
        Ok(())
    }

    /// Rates at each SNR point for one snapshot. Exhaustive pairing keeps, per
    /// point, the candidate with the largest sum rate (first on ties).
    pub fn evaluate<R: rand::Rng + ?Sized>(
        &self,
        snapshot: &ChannelSnapshot,
        snrs: &[SnrPoint],
        rng: &mut R,
    ) -> Result<Vec<RateReport>> {
        let candidates: Vec<Option<Pairing>> = match self.strategy() {
            Some(strategy) => strategy
                .candidates(&snapshot.user_gains, rng)?
                .into_iter()
                .map(Some)
                .collect(),
            None => vec![None],
        };
        let splits = self.model.splits_for(self.scheme.family);
        snrs.iter()
            .map(|&snr| {
                let mut best: Option<RateReport> = None;
                for pairing in &candidates {
                    let report =
                        scheme_rates(snapshot, self.scheme, pairing.as_ref(), &splits, snr)?;
                    if best.as_ref().is_none_or(|b| report.sum_rate > b.sum_rate) {
                        best = Some(report);
                    }
                }
                Ok(best.expect("at least one candidate"))
            })
            .collect()
    }
}

/// A point estimate with its 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub ci_half_width: f64,
    pub trials: u64,
    /// Number of outage events, for outage estimates.
    pub events: Option<u64>,
}

impl Estimate {
    /// Binomial standard error implied by the estimate.
    pub fn standard_error(&self) -> f64 {
        self.ci_half_width / Z_95
    }

    /// True when the normal approximation behind the interval is unreliable.
    pub fn low_event_count(&self) -> bool {
        self.events.is_some_and(|e| e < MIN_RELIABLE_EVENTS)
    }
}

/// Metric values over an SNR grid for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveResult {
    /// Scheme identifier, suffixed with the pairing strategy when it is not the scheme's default.
    pub label: String,
    pub scheme: SchemeId,
    pub metric: MetricKind,
    pub snr_db: Vec<f64>,
    pub values: Vec<f64>,
    pub ci_half_widths: Vec<f64>,
    pub trials: u64,
    /// Per-point flag: fewer than [`MIN_RELIABLE_EVENTS`] outage events.
    pub low_event_points: Vec<bool>,
}

impl CurveResult {
    pub fn estimate(&self, point: usize) -> Estimate {
        Estimate {
            value: self.values[point],
            ci_half_width: self.ci_half_widths[point],
            trials: self.trials,
            events: None,
        }
    }
}

/// Label used in output tables for a scheme and (optional) pairing override.
pub fn curve_label(scheme: SchemeId, strategy: Option<PairingStrategy>) -> String {
    match strategy {
        Some(s) if scheme.family.is_hybrid() && Some(s) != default_strategy(scheme.family) => {
            format!("{scheme}/{s}")
        }
        _ => scheme.to_string(),
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &MeanVar) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn ci_half_width(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.n - 1) as f64).max(0.0);
        Z_95 * (var / self.n as f64).sqrt()
    }
}

fn binomial_ci_half_width(events: u64, trials: u64) -> f64 {
    let p = events as f64 / trials as f64;
    Z_95 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Runs `block` over fixed trial ranges and returns the results in range order.
fn run_blocks<A, F>(mc: &MonteCarloConfig, block: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(Range<u64>) -> Result<A> + Sync,
{
    let ranges: Vec<Range<u64>> = (0..mc.trials.div_ceil(BLOCK_TRIALS))
        .map(|b| b * BLOCK_TRIALS..((b + 1) * BLOCK_TRIALS).min(mc.trials))
        .collect();

    #[cfg(feature = "parallel")]
    if mc.workers > 1 && ranges.len() > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(mc.workers)
            .build()
            .map_err(|e| Error::contract(format!("cannot start worker pool: {e}")))?;
        return pool.install(|| ranges.into_par_iter().map(&block).collect());
    }

    ranges.into_iter().map(block).collect()
}

fn run_trials<A, Step>(
    run: &SchemeRun<'_>,
    snrs: &[SnrPoint],
    mc: &MonteCarloConfig,
    init: impl Fn() -> A + Sync,
    step: Step,
) -> Result<Vec<A>>
where
    A: Send,
    Step: Fn(&mut A, Vec<RateReport>) + Sync,
{
    mc.validate()?;
    run.validate()?;
    run_blocks(mc, |range| {
        let mut acc = init();
        for trial in range {
            let mut rng = derive_trial_stream(mc.master_seed, trial);
            let snapshot = run.model.sample(&mut rng);
            let reports = run.evaluate(&snapshot, snrs, &mut rng)?;
            step(&mut acc, reports);
        }
        Ok(acc)
    })
}

/// Outage curve over `grid`: fraction of trials in outage per point, with a
/// normal-approximation 95% interval.
pub fn outage_curve(
    run: &SchemeRun<'_>,
    spec: &OutageSpec,
    grid: &SnrGrid,
    mc: &MonteCarloConfig,
) -> Result<CurveResult> {
    let n = run.model.geometry.user_count();
    if spec.target_rates.len() != n {
        return Err(Error::contract(format!(
            "{} target rates for {n} users",
            spec.target_rates.len()
        )));
    }
    let snrs = grid.snr_points()?;
    let blocks = run_trials(
        run,
        &snrs,
        mc,
        || vec![0u64; snrs.len()],
        |events, reports| {
            for (count, report) in events.iter_mut().zip(&reports) {
                *count += u64::from(spec.is_outage(report));
            }
        },
    )?;
    let mut events = vec![0u64; snrs.len()];
    for block in &blocks {
        for (total, e) in events.iter_mut().zip(block) {
            *total += e;
        }
    }
    Ok(CurveResult {
        label: curve_label(run.scheme, run.strategy()),
        scheme: run.scheme,
        metric: MetricKind::Outage(spec.mode),
        snr_db: grid.points_db().to_vec(),
        values: events.iter().map(|&e| e as f64 / mc.trials as f64).collect(),
        ci_half_widths: events
            .iter()
            .map(|&e| binomial_ci_half_width(e, mc.trials))
            .collect(),
        trials: mc.trials,
        low_event_points: events.iter().map(|&e| e < MIN_RELIABLE_EVENTS).collect(),
    })
}

/// Outage probability at a single operating point.
pub fn estimate_outage(
    run: &SchemeRun<'_>,
    spec: &OutageSpec,
    snr: SnrPoint,
    mc: &MonteCarloConfig,
) -> Result<Estimate> {
    let n = run.model.geometry.user_count();
    if spec.target_rates.len() != n {
        return Err(Error::contract(format!(
            "{} target rates for {n} users",
            spec.target_rates.len()
        )));
    }
    let blocks = run_trials(run, &[snr], mc, || 0u64, |events, reports| {
        *events += u64::from(spec.is_outage(&reports[0]));
    })?;
    let events: u64 = blocks.iter().sum();
    Ok(Estimate {
        value: events as f64 / mc.trials as f64,
        ci_half_width: binomial_ci_half_width(events, mc.trials),
        trials: mc.trials,
        events: Some(events),
    })
}

/// Ergodic sum-rate curve: per-point sample mean of the sum rate with a 95%
/// interval from the sample variance.
pub fn estimate_ergodic_sum_rate(
    run: &SchemeRun<'_>,
    grid: &SnrGrid,
    mc: &MonteCarloConfig,
) -> Result<CurveResult> {
    let snrs = grid.snr_points()?;
    let blocks = run_trials(
        run,
        &snrs,
        mc,
        || vec![MeanVar::default(); snrs.len()],
        |stats, reports| {
            for (s, report) in stats.iter_mut().zip(&reports) {
                s.push(report.sum_rate);
            }
        },
    )?;
    let mut stats = vec![MeanVar::default(); snrs.len()];
    for block in &blocks {
        for (total, s) in stats.iter_mut().zip(block) {
            total.merge(s);
        }
    }
    Ok(CurveResult {
        label: curve_label(run.scheme, run.strategy()),
        scheme: run.scheme,
        metric: MetricKind::ErgodicSumRate,
        snr_db: grid.points_db().to_vec(),
        values: stats.iter().map(|s| s.mean).collect(),
        ci_half_widths: stats.iter().map(MeanVar::ci_half_width).collect(),
        trials: mc.trials,
        low_event_points: vec![false; snrs.len()],
    })
}
