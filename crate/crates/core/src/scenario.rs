//! Scenario files.
//!
//! A scenario is a TOML document: `key = value` lines grouped under
//! `[section]` headers. Only `geometry.user_distances` and
//! `experiment.schemes` are required; everything else has a default. The
//! full grammar is documented in the repository README.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::{FadingKind, FadingSpec, NetworkGeometry, DEFAULT_PATH_LOSS_EXPONENT};
use crate::error::{Error, Result};
use crate::pairing::PairingStrategy;
use crate::schemes::{PowerSplit, SchemeFamily, SchemeId};
use crate::sim::{
    default_sc_split, MetricKind, MonteCarloConfig, OutageMode, OutageSpec, SnrGrid, SystemModel,
};

pub const DEFAULT_WAVELENGTH: f64 = 0.125;
pub const DEFAULT_RICIAN_K: f64 = 10.0;
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SNR_DB: [f64; 7] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
pub const DEFAULT_TARGET_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricRequest {
    SumRate,
    Outage,
}

impl MetricRequest {
    fn name(&self) -> &'static str {
        match self {
            MetricRequest::SumRate => "sum-rate",
            MetricRequest::Outage => "outage",
        }
    }

    fn parse(text: &str) -> Option<Self> {
        [MetricRequest::SumRate, MetricRequest::Outage]
            .into_iter()
            .find(|m| m.name() == text)
    }
}

/// A scheme to run and, for hybrid schemes, an explicit pairing rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeEntry {
    pub scheme: SchemeId,
    pub strategy: Option<PairingStrategy>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub csv: String,
    /// SVG file name; `None` disables plotting.
    pub plot: Option<String>,
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub model: SystemModel,
    pub schemes: Vec<SchemeEntry>,
    pub metrics: Vec<MetricRequest>,
    pub grid: SnrGrid,
    pub outage: OutageSpec,
    pub monte_carlo: MonteCarloConfig,
    pub output: OutputPaths,
}

impl ScenarioConfig {
    /// Metric kinds produced for every scheme.
    pub fn metric_kinds(&self) -> Vec<MetricKind> {
        self.metrics
            .iter()
            .map(|m| match m {
                MetricRequest::SumRate => MetricKind::ErgodicSumRate,
                MetricRequest::Outage => MetricKind::Outage(self.outage.mode),
            })
            .collect()
    }

    /// Replaces the scheme list from a comma-separated identifier list.
    pub fn set_schemes(&mut self, list: &str) -> Result<()> {
        let names: Vec<String> = list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        let mut raw = self.to_raw();
        raw.experiment.schemes = names;
        raw.pairing.clear();
        *self = Self::from_raw(raw)?;
        Ok(())
    }

    /// Canonical scenario text with every default written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("scenario serialises to TOML")
    }

    fn to_raw(&self) -> RawScenario {
        let g = &self.model.geometry;
        let (hop1, hop2) = g.uav_hop_distances();
        let fading = match self.model.fading.kind() {
            FadingKind::Deterministic => RawFading {
                kind: Some("deterministic".into()),
                rician_k: None,
            },
            FadingKind::Rayleigh => RawFading {
                kind: Some("rayleigh".into()),
                rician_k: None,
            },
            FadingKind::Rician => RawFading {
                kind: Some("rician".into()),
                rician_k: Some(self.model.fading.rician_k()),
            },
        };
        let (mode, user) = match self.outage.mode {
            OutageMode::AnyUser => ("any-user", None),
            OutageMode::PerUser(u) => ("user", Some(u + 1)),
        };
        RawScenario {
            geometry: RawGeometry {
                user_distances: g.user_distances().to_vec(),
                inter_user_distance: Some(g.inter_user_distance()),
                uav_hop_distances: Some([hop1, hop2]),
                wavelength: Some(g.wavelength()),
                path_loss_exponent: Some(g.path_loss_exponent()),
            },
            fading,
            experiment: RawExperiment {
                schemes: self.schemes.iter().map(|e| e.scheme.to_string()).collect(),
                metrics: Some(self.metrics.iter().map(|m| m.name().to_string()).collect()),
                snr_db: Some(self.grid.points_db().to_vec()),
            },
            pairing: self
                .schemes
                .iter()
                .filter_map(|e| e.strategy.map(|s| (e.scheme.to_string(), s.name().to_string())))
                .collect(),
            power: RawPower {
                pair: Some(self.model.pair_split.coefficients().to_vec()),
                sc_noma: Some(self.model.sc_split.coefficients().to_vec()),
            },
            outage: RawOutage {
                targets: Some(self.outage.target_rates.clone()),
                mode: Some(mode.into()),
                user,
            },
            monte_carlo: RawMonteCarlo {
                trials: Some(self.monte_carlo.trials),
                seed: Some(self.monte_carlo.master_seed),
                workers: Some(self.monte_carlo.workers),
            },
            output: RawOutput {
                dir: Some(self.output.dir.to_string_lossy().into_owned()),
                csv: Some(self.output.csv.clone()),
                plot: self.output.plot.clone(),
            },
        }
    }

    fn from_raw(raw: RawScenario) -> Result<Self> {
        let geometry = build_geometry(&raw.geometry)?;
        let n = geometry.user_count();
        let fading = build_fading(&raw.fading)?;
        let schemes = build_schemes(&raw.experiment.schemes, &raw.pairing, n)?;

        let metrics = match &raw.experiment.metrics {
            None => vec![MetricRequest::SumRate],
            Some(list) if list.is_empty() => {
                return Err(Error::config("experiment.metrics", "at least one metric is required"))
            }
            Some(list) => list
                .iter()
                .map(|m| {
                    MetricRequest::parse(m).ok_or_else(|| {
                        Error::config(
                            "experiment.metrics",
                            format!("unknown metric `{m}`; valid metrics: sum-rate, outage"),
                        )
                    })
                })
                .collect::<Result<_>>()?,
        };

        let grid_points = raw
            .experiment
            .snr_db
            .clone()
            .unwrap_or_else(|| DEFAULT_SNR_DB.to_vec());
        let grid = SnrGrid::new(grid_points).map_err(|e| rekey("experiment.snr_db", e))?;

        let pair = match &raw.power.pair {
            Some(c) => build_split(c, "power.pair")?,
            None => PowerSplit::pair(0.25, 0.75)?,
        };
        if pair.len() != 2 || pair.coefficients()[0] >= pair.coefficients()[1] {
            return Err(Error::config(
                "power.pair",
                "expected [strong, weak] with the weak user's coefficient strictly larger",
            ));
        }
        let sc = match &raw.power.sc_noma {
            Some(c) => build_split(c, "power.sc_noma")?,
            None => default_sc_split(n).map_err(|e| rekey("power.sc_noma", e))?,
        };
        if sc.len() != n {
            return Err(Error::config(
                "power.sc_noma",
                format!("expected {n} coefficients, one per user, got {}", sc.len()),
            ));
        }
        if sc.coefficients().windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "power.sc_noma",
                "coefficients are listed strongest user first and must strictly increase",
            ));
        }

        let outage = build_outage(&raw.outage, n)?;

        let mc = MonteCarloConfig::new(
            raw.monte_carlo.trials.unwrap_or(DEFAULT_TRIALS),
            raw.monte_carlo.seed.unwrap_or(DEFAULT_SEED),
            raw.monte_carlo.workers.unwrap_or_else(default_workers),
        )
        .map_err(|e| rekey("monte_carlo", e))?;

        let output = OutputPaths {
            dir: PathBuf::from(raw.output.dir.as_deref().unwrap_or("results")),
            csv: raw.output.csv.clone().unwrap_or_else(|| "results.csv".into()),
            plot: raw.output.plot.clone(),
        };

        Ok(Self {
            model: SystemModel {
                geometry,
                fading,
                pair_split: pair,
                sc_split: sc,
            },
            schemes,
            metrics,
            grid,
            outage,
            monte_carlo: mc,
            output,
        })
    }
}

/// All available cores, or one if that cannot be determined.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| Error::config("scenario", e.message().to_string()))?;
    ScenarioConfig::from_raw(raw)
}

fn rekey(key: &str, err: Error) -> Error {
    match err {
        Error::Domain(m) | Error::Contract(m) => Error::config(key, m),
        other => other,
    }
}

fn build_geometry(raw: &RawGeometry) -> Result<NetworkGeometry> {
    let d = &raw.user_distances;
    if d.len() < 2 {
        return Err(Error::config(
            "geometry.user_distances",
            format!("at least 2 users are required, got {}", d.len()),
        ));
    }
    let inter = raw.inter_user_distance.unwrap_or_else(|| {
        let spread = d[d.len() - 1] - d[0];
        if spread > 0.0 {
            spread
        } else {
            d[0]
        }
    });
    let [hop1, hop2] = raw.uav_hop_distances.unwrap_or([1.0, 1.0]);
    let key = if !d.iter().all(|x| x.is_finite() && *x > 0.0) || d.windows(2).any(|w| w[1] < w[0]) {
        "geometry.user_distances"
    } else {
        "geometry"
    };
    NetworkGeometry::new(
        d.clone(),
        inter,
        (hop1, hop2),
        raw.wavelength.unwrap_or(DEFAULT_WAVELENGTH),
        raw.path_loss_exponent.unwrap_or(DEFAULT_PATH_LOSS_EXPONENT),
    )
    .map_err(|e| rekey(key, e))
}

fn build_fading(raw: &RawFading) -> Result<FadingSpec> {
    let kind = raw.kind.as_deref().unwrap_or("rayleigh");
    match kind {
        "deterministic" | "rayleigh" if raw.rician_k.is_some() => Err(Error::config(
            "fading.rician_k",
            format!("only valid with kind = \"rician\", not \"{kind}\""),
        )),
        "deterministic" => Ok(FadingSpec::DETERMINISTIC),
        "rayleigh" => Ok(FadingSpec::RAYLEIGH),
        "rician" => FadingSpec::rician(raw.rician_k.unwrap_or(DEFAULT_RICIAN_K))
            .map_err(|e| rekey("fading.rician_k", e)),
        other => Err(Error::config(
            "fading.kind",
            format!("unknown fading `{other}`; valid kinds: deterministic, rayleigh, rician"),
        )),
    }
}

fn build_schemes(
    names: &[String],
    pairing: &BTreeMap<String, String>,
    users: usize,
) -> Result<Vec<SchemeEntry>> {
    if names.is_empty() {
        return Err(Error::config("experiment.schemes", "at least one scheme is required"));
    }
    let mut entries: Vec<SchemeEntry> = Vec::with_capacity(names.len());
    for name in names {
        let scheme = SchemeId::parse(name).ok_or_else(|| {
            Error::config(
                "experiment.schemes",
                format!(
                    "unknown scheme `{name}`; valid identifiers: {} (append `-uav` to route through the relay)",
                    SchemeId::valid_names()
                ),
            )
        })?;
        if entries.iter().any(|e| e.scheme == scheme) {
            return Err(Error::config(
                "experiment.schemes",
                format!("scheme `{name}` is listed twice"),
            ));
        }
        if scheme.family.is_hybrid() && users % 2 != 0 {
            return Err(Error::config(
                "geometry.user_distances",
                format!("pairing scheme `{name}` needs an even user count, got {users}"),
            ));
        }
        if scheme.family.is_two_user() && users != 2 {
            return Err(Error::config(
                "experiment.schemes",
                format!("`{name}` serves exactly 2 users, geometry has {users}"),
            ));
        }
        if scheme.family == SchemeFamily::ScNoma && users < 2 {
            return Err(Error::config(
                "experiment.schemes",
                format!("`{name}` needs at least 2 users"),
            ));
        }
        entries.push(SchemeEntry {
            scheme,
            strategy: None,
        });
    }
    for (key, value) in pairing {
        let entry = entries
            .iter_mut()
            .find(|e| e.scheme.to_string() == *key && e.scheme.family.is_hybrid())
            .ok_or_else(|| {
                Error::config(
                    format!("pairing.{key}"),
                    "not a hybrid scheme listed in experiment.schemes",
                )
            })?;
        entry.strategy = Some(PairingStrategy::from_name(value).ok_or_else(|| {
            Error::config(
                format!("pairing.{key}"),
                format!(
                    "unknown pairing strategy `{value}`; valid strategies: near-far, near-near, random, exhaustive"
                ),
            )
        })?);
    }
    Ok(entries)
}

fn build_split(coefficients: &[f64], key: &str) -> Result<PowerSplit> {
    if coefficients.iter().all(|c| c.is_finite()) {
        let sum: f64 = coefficients.iter().sum();
        if !coefficients.is_empty() && (sum - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                key,
                format!("coefficients must sum to 1 (got {sum})"),
            ));
        }
    }
    PowerSplit::new(coefficients.to_vec()).map_err(|e| rekey(key, e))
}

fn build_outage(raw: &RawOutage, users: usize) -> Result<OutageSpec> {
    let targets = raw
        .targets
        .clone()
        .unwrap_or_else(|| vec![DEFAULT_TARGET_RATE; users]);
    if targets.len() != users {
        return Err(Error::config(
            "outage.targets",
            format!("expected {users} target rates, one per user, got {}", targets.len()),
        ));
    }
    let mode = match raw.mode.as_deref().unwrap_or("user") {
        "any-user" => {
            if raw.user.is_some() {
                return Err(Error::config("outage.user", "not used with mode = \"any-user\""));
            }
            OutageMode::AnyUser
        }
        "user" => {
            let user = raw.user.unwrap_or(users);
            if user == 0 || user > users {
                return Err(Error::config(
                    "outage.user",
                    format!("user must be between 1 and {users}, got {user}"),
                ));
            }
            OutageMode::PerUser(user - 1)
        }
        other => {
            return Err(Error::config(
                "outage.mode",
                format!("unknown outage mode `{other}`; valid modes: user, any-user"),
            ))
        }
    };
    OutageSpec::new(targets, mode).map_err(|e| rekey("outage.targets", e))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    geometry: RawGeometry,
    #[serde(default)]
    fading: RawFading,
    experiment: RawExperiment,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pairing: BTreeMap<String, String>,
    #[serde(default)]
    power: RawPower,
    #[serde(default)]
    outage: RawOutage,
    #[serde(default)]
    monte_carlo: RawMonteCarlo,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    user_distances: Vec<f64>,
    inter_user_distance: Option<f64>,
    uav_hop_distances: Option<[f64; 2]>,
    wavelength: Option<f64>,
    path_loss_exponent: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    kind: Option<String>,
    rician_k: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    schemes: Vec<String>,
    metrics: Option<Vec<String>>,
    snr_db: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    pair: Option<Vec<f64>>,
    sc_noma: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutage {
    targets: Option<Vec<f64>>,
    mode: Option<String>,
    user: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    trials: Option<u64>,
    seed: Option<u64>,
    workers: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    csv: Option<String>,
    plot: Option<String>,
}
