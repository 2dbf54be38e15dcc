//! User pairing for hybrid NOMA.
//!
//! Users are ranked by instantaneous channel gain, strongest first, with ties
//! broken toward the lower user index. The pairing rules operate on ranks
//! only, so any strictly increasing transform of the gains leaves them
//! unchanged.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::schemes::PowerSplit;

/// A partition of users `0..n` into two-user NOMA groups.
///
/// Each pair is stored strong user first once oriented against a gain vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pairing {
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    /// Checks that `pairs` covers every user in `0..user_count` exactly once.
    pub fn new(pairs: Vec<(usize, usize)>, user_count: usize) -> Result<Self> {
        if pairs.len() * 2 != user_count {
            return Err(Error::contract(format!(
                "{} pairs cannot partition {user_count} users",
                pairs.len()
            )));
        }
        let mut seen = vec![false; user_count];
        for &(a, b) in &pairs {
            for u in [a, b] {
                if u >= user_count {
                    return Err(Error::contract(format!(
                        "user index {} out of range for {user_count} users",
                        u + 1
                    )));
                }
                if std::mem::replace(&mut seen[u], true) {
                    return Err(Error::contract(format!(
                        "user {} appears in more than one pair",
                        u + 1
                    )));
                }
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn user_count(&self) -> usize {
        self.pairs.len() * 2
    }

    /// Reorders each pair so that its first user has the larger gain.
    pub fn oriented(&self, gains: &[f64]) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|&(a, b)| {
                if stronger(gains, b, a) {
                    (b, a)
                } else {
                    (a, b)
                }
            })
            .collect();
        Self { pairs }
    }

    /// Order-independent form: pairs `(lo, hi)` sorted by their first user.
    pub fn canonical(&self) -> Self {
        let mut pairs: Vec<_> = self
            .pairs
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        pairs.sort_unstable();
        Self { pairs }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({},{})", a + 1, b + 1)?;
        }
        f.write_str("}")
    }
}

/// True when user `a` ranks above user `b`.
fn stronger(gains: &[f64], a: usize, b: usize) -> bool {
    gains[a] > gains[b] || (gains[a] == gains[b] && a < b)
}

/// User indices ordered strongest first; equal gains keep index order.
pub fn rank_users(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    // stable sort keeps the lower index first on ties
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    order
}

fn check_sorted_even(gains_sorted_desc: &[f64]) -> Result<usize> {
    let n = gains_sorted_desc.len();
    if n == 0 || n % 2 != 0 {
        return Err(Error::contract(format!(
            "pairing needs an even, nonzero user count, got {n}"
        )));
    }
    if gains_sorted_desc.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::contract("gains must be sorted in descending order"));
    }
    Ok(n)
}

/// Pairs the k-th strongest with the k-th weakest. Indices are gain ranks.
pub fn pair_near_far(gains_sorted_desc: &[f64]) -> Result<Pairing> {
    let n = check_sorted_even(gains_sorted_desc)?;
    Ok(Pairing {
        pairs: (0..n / 2).map(|k| (k, n - 1 - k)).collect(),
    })
}

/// Pairs adjacent ranks: (1,2), (3,4), ...
pub fn pair_near_near(gains_sorted_desc: &[f64]) -> Result<Pairing> {
    let n = check_sorted_even(gains_sorted_desc)?;
    Ok(Pairing {
        pairs: (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect(),
    })
}

/// Every perfect matching of `n` users, `(n - 1)!!` in total, in canonical form.
pub fn enumerate_pairings(n: usize) -> Result<Vec<Pairing>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::contract(format!(
            "perfect matchings need an even, nonzero user count, got {n}"
        )));
    }
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(n / 2);
    extend_matchings(&mut used, &mut current, &mut out);
    Ok(out)
}

fn extend_matchings(
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Pairing>,
) {
    let Some(first) = used.iter().position(|&u| !u) else {
        out.push(Pairing {
            pairs: current.clone(),
        });
        return;
    };
    used[first] = true;
    for partner in first + 1..used.len() {
        if used[partner] {
            continue;
        }
        used[partner] = true;
        current.push((first, partner));
        extend_matchings(used, current, out);
        current.pop();
        used[partner] = false;
    }
    used[first] = false;
}

/// How hybrid NOMA schemes group users on each trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairingStrategy {
    NearFar,
    NearNear,
    /// Uniform over all perfect matchings.
    Random,
    /// Every perfect matching; the caller keeps the best.
    Exhaustive,
}

impl PairingStrategy {
    pub const ALL: [PairingStrategy; 4] = [
        PairingStrategy::NearFar,
        PairingStrategy::NearNear,
        PairingStrategy::Random,
        PairingStrategy::Exhaustive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PairingStrategy::NearFar => "near-far",
            PairingStrategy::NearNear => "near-near",
            PairingStrategy::Random => "random",
            PairingStrategy::Exhaustive => "exhaustive",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Candidate pairings over user indices for the given gains, each oriented
    /// strong user first. Only `Exhaustive` returns more than one.
    pub fn candidates<R: Rng + ?Sized>(&self, gains: &[f64], rng: &mut R) -> Result<Vec<Pairing>> {
        let ranked = rank_users(gains);
        let sorted: Vec<f64> = ranked.iter().map(|&u| gains[u]).collect();
        let by_rank = match self {
            PairingStrategy::NearFar => pair_near_far(&sorted)?,
            PairingStrategy::NearNear => pair_near_near(&sorted)?,
            PairingStrategy::Random => {
                let all = enumerate_pairings(gains.len())?;
                let pick = rng.random_range(0..all.len());
                return Ok(vec![all[pick].oriented(gains)]);
            }
            PairingStrategy::Exhaustive => {
                return Ok(enumerate_pairings(gains.len())?
                    .into_iter()
                    .map(|p| p.oriented(gains))
                    .collect());
            }
        };
        let pairs = by_rank
            .pairs
            .iter()
            .map(|&(s, w)| (ranked[s], ranked[w]))
            .collect();
        Ok(vec![Pairing { pairs }])
    }
}

impl fmt::Display for PairingStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Rule for choosing the two coefficients inside a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerPolicy {
    /// Constant coefficients for the strong and the weak user.
    Fixed { strong: f64, weak: f64 },
}

impl Default for PowerPolicy {
    fn default() -> Self {
        PowerPolicy::Fixed {
            strong: 0.25,
            weak: 0.75,
        }
    }
}

/// Power split for a pair whose gains are given strong user first. The weak
/// user always receives the strictly larger coefficient.
pub fn assign_power(pair_gains: (f64, f64), policy: &PowerPolicy) -> Result<PowerSplit> {
    if pair_gains.0 < pair_gains.1 {
        return Err(Error::contract(format!(
            "pair gains must be ordered strong first, got ({}, {})",
            pair_gains.0, pair_gains.1
        )));
    }
    match *policy {
        PowerPolicy::Fixed { strong, weak } => {
            if !(strong < weak) {
                return Err(Error::contract(format!(
                    "the weak user's coefficient must exceed the strong user's, got ({strong}, {weak})"
                )));
            }
            PowerSplit::new(vec![strong, weak])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn one_based(p: &Pairing) -> Vec<(usize, usize)> {
        p.pairs().iter().map(|&(a, b)| (a + 1, b + 1)).collect()
    }

    #[test]
    fn near_far_examples() {
        assert_eq!(one_based(&pair_near_far(&[4.0, 3.0, 2.0, 1.0]).unwrap()), vec![(1, 4), (2, 3)]);
        assert_eq!(one_based(&pair_near_far(&[1.0, 0.5]).unwrap()), vec![(1, 2)]);
        assert_eq!(
            one_based(&pair_near_far(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap()),
            vec![(1, 6), (2, 5), (3, 4)]
        );
        assert!(matches!(pair_near_far(&[3.0, 2.0, 1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn near_near_examples() {
        assert_eq!(one_based(&pair_near_near(&[4.0, 3.0, 2.0, 1.0]).unwrap()), vec![(1, 2), (3, 4)]);
        assert_eq!(one_based(&pair_near_near(&[1.0, 0.5]).unwrap()), vec![(1, 2)]);
        assert_eq!(
            one_based(&pair_near_near(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap()),
            vec![(1, 2), (3, 4), (5, 6)]
        );
        assert!(pair_near_near(&[1.0]).is_err());
        assert!(pair_near_near(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate_pairings(2).unwrap().len(), 1);
        let four: Vec<_> = enumerate_pairings(4).unwrap().iter().map(one_based).collect();
        assert_eq!(
            four,
            vec![
                vec![(1, 2), (3, 4)],
                vec![(1, 3), (2, 4)],
                vec![(1, 4), (2, 3)],
            ]
        );
        assert!(enumerate_pairings(5).is_err());
        assert!(enumerate_pairings(0).is_err());
    }

    /// Counts matchings by choosing a partner for the last element, a
    /// different recursion from the enumerator's.
    fn count_matchings(n: u64) -> u64 {
        if n == 0 {
            1
        } else {
            (n - 1) * count_matchings(n - 2)
        }
    }

    #[test]
    fn enumerate_counts_match_double_factorial() {
        assert_eq!(count_matchings(6), 15);
        for n in [2usize, 4, 6, 8, 10] {
            let all = enumerate_pairings(n).unwrap();
            assert_eq!(all.len() as u64, count_matchings(n as u64));
            let distinct: HashSet<_> = all.iter().map(Pairing::canonical).collect();
            assert_eq!(distinct.len(), all.len());
        }
    }

    #[test]
    fn pairing_rejects_non_partition() {
        assert!(Pairing::new(vec![(0, 1), (1, 2)], 4).is_err());
        assert!(Pairing::new(vec![(0, 1)], 4).is_err());
        assert!(Pairing::new(vec![(0, 5), (1, 2)], 4).is_err());
        assert!(Pairing::new(vec![(0, 3), (1, 2)], 4).is_ok());
    }

    #[test]
    fn assign_power_examples() {
        let fixed = PowerPolicy::default();
        let split = assign_power((2.0, 0.5), &fixed).unwrap();
        assert_eq!(split.coefficients(), &[0.25, 0.75]);
        let even = PowerPolicy::Fixed { strong: 0.5, weak: 0.5 };
        assert!(matches!(assign_power((2.0, 0.5), &even), Err(Error::Contract(_))));
        assert!(assign_power((0.5, 2.0), &fixed).is_err());
    }

    #[test]
    fn equal_gains_tie_break_by_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let nf = PairingStrategy::NearFar
                .candidates(&[1.0, 1.0], &mut rng)
                .unwrap();
            assert_eq!(nf[0].pairs(), &[(0, 1)]);
            assert_eq!(rank_users(&[1.0, 1.0, 3.0, 1.0]), vec![2, 0, 1, 3]);
        }
        let split = assign_power((1.0, 1.0), &PowerPolicy::default()).unwrap();
        assert_eq!(split.coefficients(), &[0.25, 0.75]);
    }

    #[test]
    fn strategies_map_ranks_to_users() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let gains = [0.2, 3.0, 0.9, 1.5];
        let nf = &PairingStrategy::NearFar.candidates(&gains, &mut rng).unwrap()[0];
        assert_eq!(nf.pairs(), &[(1, 0), (3, 2)]);
        let nn = &PairingStrategy::NearNear.candidates(&gains, &mut rng).unwrap()[0];
        assert_eq!(nn.pairs(), &[(1, 3), (2, 0)]);
        let all = PairingStrategy::Exhaustive.candidates(&gains, &mut rng).unwrap();
        assert_eq!(all.len(), 3);
    }

    fn gains_strategy() -> impl Strategy<Value = Vec<f64>> {
        (1usize..=4).prop_flat_map(|half| prop::collection::vec(0.0f64..10.0, half * 2))
    }

    proptest! {
        #[test]
        fn strategies_produce_valid_partitions(gains in gains_strategy(), seed in any::<u64>()) {
            let n = gains.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: HashSet<_> = enumerate_pairings(n).unwrap().iter().map(Pairing::canonical).collect();
            for strategy in PairingStrategy::ALL {
                for p in strategy.candidates(&gains, &mut rng).unwrap() {
                    prop_assert!(Pairing::new(p.pairs().to_vec(), n).is_ok());
                    for &(s, w) in p.pairs() {
                        prop_assert!(!stronger(&gains, w, s));
                    }
                    prop_assert!(all.contains(&p.canonical()));
                }
            }
        }

        #[test]
        fn pairings_depend_only_on_order(gains in gains_strategy()) {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let warped: Vec<f64> = gains.iter().map(|g| (g * 3.0).exp() + 0.5 * g).collect();
            for strategy in [PairingStrategy::NearFar, PairingStrategy::NearNear] {
                let a = strategy.candidates(&gains, &mut rng).unwrap();
                let b = strategy.candidates(&warped, &mut rng).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
