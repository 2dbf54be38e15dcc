//! Link-level channel model.
//!
//! Every link is a single complex scalar. Mean power gain follows a
//! distance power law `d^(-eta)`; small-scale fading multiplies that mean by a
//! unit-mean random factor. Two-hop links through the UAV relay are combined
//! with the variable-gain amplify-and-forward rule in [`af_effective_snr`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Path-loss exponent used when a scenario does not set one.
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.7;

/// Node placement for one simulated cell.
///
/// User distances are measured from the serving transmitter and are kept in
/// ascending order, so user index 0 is the nearest user.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    user_distances: Vec<f64>,
    inter_user_distance: f64,
    uav_hop_distances: (f64, f64),
    wavelength: f64,
    path_loss_exponent: f64,
}

impl NetworkGeometry {
    pub fn new(
        user_distances: Vec<f64>,
        inter_user_distance: f64,
        uav_hop_distances: (f64, f64),
        wavelength: f64,
        path_loss_exponent: f64,
    ) -> Result<Self> {
        if user_distances.is_empty() {
            return Err(Error::domain("at least one user distance is required"));
        }
        for (i, &d) in user_distances.iter().enumerate() {
            check_positive(d, &format!("user distance {}", i + 1))?;
        }
        if user_distances.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain(
                "user distances must be sorted ascending (user 1 is the nearest)",
            ));
        }
        check_positive(inter_user_distance, "inter-user distance")?;
        check_positive(uav_hop_distances.0, "BS-to-UAV distance")?;
        check_positive(uav_hop_distances.1, "UAV-to-ground distance")?;
        check_positive(wavelength, "wavelength")?;
        if !(path_loss_exponent.is_finite() && path_loss_exponent >= 1.0) {
            return Err(Error::domain(format!(
                "path-loss exponent must be finite and >= 1, got {path_loss_exponent}"
            )));
        }
        Ok(Self {
            user_distances,
            inter_user_distance,
            uav_hop_distances,
            wavelength,
            path_loss_exponent,
        })
    }

    pub fn user_count(&self) -> usize {
        self.user_distances.len()
    }

    pub fn user_distances(&self) -> &[f64] {
        &self.user_distances
    }

    pub fn inter_user_distance(&self) -> f64 {
        self.inter_user_distance
    }

    pub fn uav_hop_distances(&self) -> (f64, f64) {
        self.uav_hop_distances
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    /// Mean power gain `d^(-eta)` of a link of length `distance`.
    pub fn mean_gain(&self, distance: f64) -> f64 {
        distance.powf(-self.path_loss_exponent)
    }
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} must be finite and strictly positive, got {value}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FadingKind {
    /// No fading: every gain equals its mean.
    Deterministic,
    /// Exponentially distributed power gain.
    Rayleigh,
    /// Noncentral chi-square power gain with a LoS component.
    Rician,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    kind: FadingKind,
    rician_k: f64,
}

impl FadingSpec {
    pub const DETERMINISTIC: Self = Self {
        kind: FadingKind::Deterministic,
        rician_k: 0.0,
    };
    pub const RAYLEIGH: Self = Self {
        kind: FadingKind::Rayleigh,
        rician_k: 0.0,
    };

    /// Rician fading with LoS-to-scatter power ratio `k` (linear).
    pub fn rician(k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::domain(format!(
                "Rician K factor must be finite and >= 0, got {k}"
            )));
        }
        Ok(Self {
            kind: FadingKind::Rician,
            rician_k: k,
        })
    }

    pub fn kind(&self) -> FadingKind {
        self.kind
    }

    /// K factor; zero for non-Rician kinds.
    pub fn rician_k(&self) -> f64 {
        self.rician_k
    }

    /// Draws a unit-mean power fading factor.
    pub fn sample_factor<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FadingKind::Deterministic => 1.0,
            FadingKind::Rayleigh => {
                let e: f64 = Exp1.sample(rng);
                e
            }
            FadingKind::Rician => {
                let k = self.rician_k;
                let los = (k / (k + 1.0)).sqrt();
                let sigma = (0.5 / (k + 1.0)).sqrt();
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                let re = los + sigma * re;
                let im = sigma * im;
                re * re + im * im
            }
        }
    }
}

impl Default for FadingSpec {
    fn default() -> Self {
        Self::RAYLEIGH
    }
}

/// One fading realization of every link in the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    /// Serving-transmitter to user power gains `|h_i|^2`, indexed like the geometry.
    pub user_gains: Vec<f64>,
    /// Near-user to far-user power gain `|h_nf|^2`.
    pub near_far_gain: f64,
    /// BS to UAV power gain.
    pub hop1_gain: f64,
    /// UAV to ground power gain at the baseline hop distance.
    pub hop2_gain: f64,
    /// Mean of `hop2_gain`; user gains are expressed relative to it on relayed paths.
    pub hop2_mean: f64,
}

impl ChannelSnapshot {
    /// Builds a snapshot from explicit gains. `hop2_mean` defaults to 1.
    pub fn new(
        user_gains: Vec<f64>,
        near_far_gain: f64,
        hop1_gain: f64,
        hop2_gain: f64,
    ) -> Result<Self> {
        let snapshot = Self {
            user_gains,
            near_far_gain,
            hop1_gain,
            hop2_gain,
            hop2_mean: 1.0,
        };
        snapshot.validate()?;
        Ok(snapshot)
    }

    /// Direct-link snapshot: the given user gains, a dead relay path, `|h_nf|^2 = near_far_gain`.
    pub fn direct(user_gains: Vec<f64>, near_far_gain: f64) -> Result<Self> {
        Self::new(user_gains, near_far_gain, 0.0, 0.0)
    }

    pub fn with_hop2_mean(mut self, hop2_mean: f64) -> Result<Self> {
        check_positive(hop2_mean, "UAV-to-ground mean gain")?;
        self.hop2_mean = hop2_mean;
        Ok(self)
    }

    pub fn user_count(&self) -> usize {
        self.user_gains.len()
    }

    fn validate(&self) -> Result<()> {
        let all = self
            .user_gains
            .iter()
            .chain([&self.near_far_gain, &self.hop1_gain, &self.hop2_gain]);
        for &g in all {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::domain(format!(
                    "channel gains must be finite and >= 0, got {g}"
                )));
            }
        }
        Ok(())
    }

    /// Equivalent power gain of user `user` when served through the AF relay at
    /// transmit SNR `rho`.
    ///
    /// The second hop is the baseline UAV-to-ground gain scaled by the user's
    /// gain relative to the baseline mean, so its mean is the user's own mean gain.
    pub fn relayed_gain(&self, user: usize, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let first = rho * self.hop1_gain;
        let second = rho * self.hop2_gain * self.user_gains[user] / self.hop2_mean;
        af_effective_snr(first, second) / rho
    }

    /// Per-user gains seen by the rate formulas, direct or through the relay.
    pub fn serving_gains(&self, via_uav: bool, rho: f64) -> Vec<f64> {
        if via_uav {
            (0..self.user_count())
                .map(|i| self.relayed_gain(i, rho))
                .collect()
        } else {
            self.user_gains.clone()
        }
    }
}

/// Free-space LoS element `(lambda / 4 pi d) e^{j 2 pi d / lambda}`.
pub fn los_coefficient(distance: f64, wavelength: f64) -> Result<Complex64> {
    check_positive(distance, "distance")?;
    check_positive(wavelength, "wavelength")?;
    let magnitude = wavelength / (4.0 * PI * distance);
    // Reduce d / lambda before scaling so whole cycles stay exact.
    let cycles = (distance / wavelength).fract();
    Ok(Complex64::from_polar(magnitude, 2.0 * PI * cycles))
}

/// Draws a power gain with mean `distance^(-exponent)` under `fading`.
pub fn sample_gain<R: Rng + ?Sized>(
    distance: f64,
    exponent: f64,
    fading: &FadingSpec,
    rng: &mut R,
) -> f64 {
    debug_assert!(distance > 0.0);
    distance.powf(-exponent) * fading.sample_factor(rng)
}

/// Variable-gain amplify-and-forward end-to-end SNR `g1 g2 / (g1 + g2 + 1)`.
pub fn af_effective_snr(snr_hop1: f64, snr_hop2: f64) -> f64 {
    let denom = snr_hop1 + snr_hop2 + 1.0;
    if denom.is_infinite() {
        return snr_hop1.min(snr_hop2);
    }
    snr_hop1 * snr_hop2 / denom
}

/// Draws a full snapshot for `geometry`. Links are sampled in a fixed order:
/// users nearest first, then near-far, BS-UAV, UAV-ground.
pub fn sample_snapshot<R: Rng + ?Sized>(
    geometry: &NetworkGeometry,
    fading: &FadingSpec,
    rng: &mut R,
) -> ChannelSnapshot {
    let eta = geometry.path_loss_exponent;
    let user_gains = geometry
        .user_distances
        .iter()
        .map(|&d| sample_gain(d, eta, fading, rng))
        .collect();
    let near_far_gain = sample_gain(geometry.inter_user_distance, eta, fading, rng);
    let (d1, d2) = geometry.uav_hop_distances;
    let hop1_gain = sample_gain(d1, eta, fading, rng);
    let hop2_gain = sample_gain(d2, eta, fading, rng);
    ChannelSnapshot {
        user_gains,
        near_far_gain,
        hop1_gain,
        hop2_gain,
        hop2_mean: geometry.mean_gain(d2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn los_unit_magnitude() {
        let lambda = 0.125;
        let h = los_coefficient(lambda / (4.0 * PI), lambda).unwrap();
        assert!((h.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn los_full_cycle_phase() {
        let h = los_coefficient(0.3, 0.3).unwrap();
        assert_eq!(h.arg(), 0.0);
    }

    #[test]
    fn los_two_wavelengths() {
        // 1 / (8 pi) at 40 digits: 0.03978873577297383394222094
        let h = los_coefficient(0.25, 0.125).unwrap();
        assert!(rel_err(h.norm(), 0.039_788_735_772_973_83) < 1e-12);
    }

    #[test]
    fn los_rejects_nonpositive() {
        assert!(matches!(los_coefficient(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(los_coefficient(1.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn deterministic_gain_is_path_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = FadingSpec::DETERMINISTIC;
        assert_eq!(sample_gain(2.0, 2.0, &f, &mut rng), 0.25);
        assert_eq!(sample_gain(1.0, 3.7, &f, &mut rng), 1.0);
        assert_eq!(
            sample_gain(3.0, 2.7, &f, &mut rng),
            sample_gain(3.0, 2.7, &f, &mut rng)
        );
    }

    #[test]
    fn rayleigh_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_gain(2.0, 2.0, &FadingSpec::RAYLEIGH, &mut rng))
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn rayleigh_cdf_matches_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (d, eta) = (1.7, 2.7);
        let n = 100_000;
        let mut samples: Vec<f64> = (0..n)
            .map(|_| sample_gain(d, eta, &FadingSpec::RAYLEIGH, &mut rng))
            .collect();
        samples.sort_by(f64::total_cmp);
        let scale = d.powf(eta);
        let ks = samples
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                let f = 1.0 - (-g * scale).exp();
                let lo = i as f64 / n as f64;
                let hi = (i + 1) as f64 / n as f64;
                (f - lo).abs().max((hi - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS statistic {ks}");
    }

    #[test]
    fn rician_mean_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FadingSpec::rician(10.0).unwrap();
        let n = 200_000;
        let mean = (0..n).map(|_| f.sample_factor(&mut rng)).sum::<f64>() / n as f64;
        // variance of the factor is (2K + 1) / (K + 1)^2
        let se = ((21.0f64 / 121.0) / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se);
        assert!(FadingSpec::rician(-1.0).is_err());
        assert!(FadingSpec::rician(f64::NAN).is_err());
    }

    #[test]
    fn af_examples() {
        assert_eq!(af_effective_snr(0.0, 42.0), 0.0);
        assert!(rel_err(af_effective_snr(1.0, 1.0), 1.0 / 3.0) < 1e-15);
        assert!(rel_err(af_effective_snr(5.0, 1e12), 5.0) < 1e-9);
        assert_eq!(af_effective_snr(5.0, f64::INFINITY), 5.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(NetworkGeometry::new(vec![1.0, 2.0], 1.0, (1.0, 1.0), 0.1, 2.7).is_ok());
        assert!(NetworkGeometry::new(vec![2.0, 1.0], 1.0, (1.0, 1.0), 0.1, 2.7).is_err());
        assert!(NetworkGeometry::new(vec![0.0, 1.0], 1.0, (1.0, 1.0), 0.1, 2.7).is_err());
        assert!(NetworkGeometry::new(vec![1.0], 1.0, (1.0, 1.0), 0.0, 2.7).is_err());
        assert!(NetworkGeometry::new(vec![1.0], 1.0, (1.0, 1.0), 0.1, 0.5).is_err());
        assert!(NetworkGeometry::new(vec![], 1.0, (1.0, 1.0), 0.1, 2.7).is_err());
    }

    #[test]
    fn deterministic_relayed_gain_matches_af() {
        let geometry =
            NetworkGeometry::new(vec![1.0, 2.0], 1.0, (2.0, 3.0), 0.125, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let snap = sample_snapshot(&geometry, &FadingSpec::DETERMINISTIC, &mut rng);
        let rho = 10.0;
        // second hop reduces to the user's own mean gain
        let expected = af_effective_snr(rho * 0.25, rho * 0.25) / rho;
        assert!(rel_err(snap.relayed_gain(1, rho), expected) < 1e-14);
        assert_eq!(snap.relayed_gain(1, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn los_magnitude_decreasing(d in 1e-3f64..1e3, step in 1e-3f64..10.0) {
            let a = los_coefficient(d, 0.125).unwrap().norm();
            let b = los_coefficient(d + step, 0.125).unwrap().norm();
            prop_assert!(b < a);
        }

        #[test]
        fn af_symmetric_and_bounded(a in 0.0f64..1e9, b in 0.0f64..1e9) {
            let ab = af_effective_snr(a, b);
            prop_assert_eq!(ab, af_effective_snr(b, a));
            prop_assert!(ab <= a.min(b));
            prop_assert!(ab >= 0.0);
        }

        #[test]
        fn af_monotone(a in 0.0f64..1e6, b in 0.0f64..1e6, da in 0.0f64..1e3) {
            prop_assert!(af_effective_snr(a + da, b) >= af_effective_snr(a, b));
        }
    }
}
