//! Runs every (scheme, metric) combination of a scenario.

use crate::error::Result;
use crate::scenario::ScenarioConfig;
use crate::sim::{estimate_ergodic_sum_rate, outage_curve, CurveResult, MetricKind, SchemeRun};

/// One curve per scheme and metric, in scenario order.
///
/// Every curve reuses the same master seed, so schemes are compared on
/// identical channel draws.
pub fn run_experiment(config: &ScenarioConfig) -> Result<Vec<CurveResult>> {
    let mut curves = Vec::with_capacity(config.schemes.len() * config.metrics.len());
    for entry in &config.schemes {
        let run = SchemeRun::new(entry.scheme, &config.model, entry.strategy);
        for metric in config.metric_kinds() {
            let curve = match metric {
                MetricKind::ErgodicSumRate => {
                    estimate_ergodic_sum_rate(&run, &config.grid, &config.monte_carlo)?
                }
                MetricKind::Outage(_) => {
                    outage_curve(&run, &config.outage, &config.grid, &config.monte_carlo)?
                }
            };
            curves.push(curve);
        }
    }
    Ok(curves)
}
