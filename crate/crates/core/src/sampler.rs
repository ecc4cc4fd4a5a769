//! Exact sampling of the independent-edge model H(n, k, p) and the
//! translation of expected-degree regimes into edge probabilities.
//!
//! Sampling is two-stage: draw the edge count M ~ Binomial(C(n,k), p),
//! then M distinct uniform edge indices (rejection on a hash set), sort,
//! and unrank. The law is exactly the product measure over edges.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::combo::{binom, log_binom, BinomTable};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{binomial, Rng};
use crate::util::{radix_sort_u64, FastSet};

/// Stream labels for per-purpose RNG derivation.
const STREAM_EDGE_COUNT: u64 = 0xEC;
const STREAM_EDGE_PICK: u64 = 0xE1;

/// Expected-degree regime. All logarithms are natural.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegimeSpec {
    /// Edge probability given verbatim.
    FixedP(f64),
    /// Constant expected degree λ.
    FixedLambda(f64),
    /// λ_n = log n + c.
    LogPlusC(f64),
    /// λ_n = (log n + log log n) / 2 + w.
    HalfLogLogPlusW(f64),
}

impl RegimeSpec {
    /// Expected vertex degree λ_n at a given n (None for n-independent p
    /// when C(n-1, k-1) overflows every representation — practically never).
    pub fn lambda(&self, n: u32, k: u32) -> Result<f64> {
        let lam = match *self {
            RegimeSpec::FixedP(p) => {
                let d = binom_as_f64(n as u64 - 1, k as u64 - 1);
                p * d
            }
            RegimeSpec::FixedLambda(l) => l,
            RegimeSpec::LogPlusC(c) => (n as f64).ln() + c,
            RegimeSpec::HalfLogLogPlusW(w) => {
                if n < 3 {
                    return Err(Error::InfeasibleRegime {
                        reason: format!("halfloglog regime needs n >= 3, got {n}"),
                    });
                }
                0.5 * ((n as f64).ln() + (n as f64).ln().ln()) + w
            }
        };
        if lam < 0.0 {
            return Err(Error::InfeasibleRegime {
                reason: format!("expected degree is negative ({lam})"),
            });
        }
        Ok(lam)
    }
}

fn binom_as_f64(n: u64, r: u64) -> f64 {
    match binom(n, r) {
        Some(v) if v < (1u128 << 100) => v as f64,
        _ => log_binom(n, r).exp(),
    }
}

/// Edge probability p = λ_n / C(n-1, k-1) for the regime; FixedP verbatim.
pub fn edge_probability(regime: &RegimeSpec, n: u32, k: u32) -> Result<f64> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidParameter {
            reason: format!("need n >= 1 and k >= 2, got n={n}, k={k}"),
        });
    }
    if let RegimeSpec::FixedP(p) = regime {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::InfeasibleRegime {
                reason: format!("p = {p} outside [0, 1]"),
            });
        }
        return Ok(*p);
    }
    let denom = binom_as_f64(n as u64 - 1, k as u64 - 1);
    if denom < 1.0 {
        return Err(Error::InfeasibleRegime {
            reason: format!("C(n-1, k-1) = 0 at n={n}, k={k}"),
        });
    }
    let lam = regime.lambda(n, k)?;
    let p = lam / denom;
    if p > 1.0 {
        return Err(Error::InfeasibleRegime {
            reason: format!(
                "p = {lam}/{denom} > 1; the regime requires lambda <= C(n-1,k-1) = {denom}"
            ),
        });
    }
    Ok(p)
}

impl FromStr for RegimeSpec {
    type Err = Error;

    /// Grammar: `p=<float>`, `lambda=<float>`, `log+c=<float>`,
    /// `halfloglog+w=<float>`.
    fn from_str(s: &str) -> Result<Self> {
        let (key, val) = s.split_once('=').ok_or_else(|| Error::InvalidParameter {
            reason: format!("regime `{s}` is not of the form key=value"),
        })?;
        let x: f64 = val.parse().map_err(|_| Error::InvalidParameter {
            reason: format!("regime value `{val}` is not a number"),
        })?;
        match key {
            "p" => Ok(RegimeSpec::FixedP(x)),
            "lambda" => Ok(RegimeSpec::FixedLambda(x)),
            "log+c" => Ok(RegimeSpec::LogPlusC(x)),
            "halfloglog+w" => Ok(RegimeSpec::HalfLogLogPlusW(x)),
            _ => Err(Error::InvalidParameter {
                reason: format!(
                    "unknown regime `{key}` (expected p, lambda, log+c, halfloglog+w)"
                ),
            }),
        }
    }
}

impl fmt::Display for RegimeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeSpec::FixedP(p) => write!(f, "p={p}"),
            RegimeSpec::FixedLambda(l) => write!(f, "lambda={l}"),
            RegimeSpec::LogPlusC(c) => write!(f, "log+c={c}"),
            RegimeSpec::HalfLogLogPlusW(w) => write!(f, "halfloglog+w={w}"),
        }
    }
}

impl Serialize for RegimeSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RegimeSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: u32,
    pub k: u32,
    pub seed: u64,
}

/// Reusable sampler for one (n, k): owns the unranking table.
pub struct Sampler {
    n: u32,
    k: u32,
    table: BinomTable,
    total: u128,
}

impl Sampler {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 || k < 2 {
            return Err(Error::InvalidParameter {
                reason: format!("need n >= 1 and k >= 2, got n={n}, k={k}"),
            });
        }
        if binom(n as u64, k as u64).is_none() {
            return Err(Error::Capacity {
                reason: format!("C({n},{k}) does not fit in 128 bits"),
            });
        }
        let table = BinomTable::new(n, k);
        let total = table.total();
        Ok(Sampler { n, k, table, total })
    }

    pub fn candidate_edges(&self) -> u128 {
        self.total
    }

    /// One H(n, k, p) draw, deterministic in `seed`.
    pub fn sample_seeded(&self, seed: u64, p: f64) -> Result<Hypergraph> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InfeasibleRegime {
                reason: format!("p = {p} outside [0, 1]"),
            });
        }
        if self.total == 0 || p == 0.0 {
            return Ok(Hypergraph::from_canonical_flat(self.n, self.k, Vec::new()));
        }
        let mut count_rng = Rng::from_seed_label(seed, STREAM_EDGE_COUNT);
        let m = binomial(&mut count_rng, self.total, p);
        if m > u32::MAX as u128 {
            return Err(Error::Capacity {
                reason: format!("sampled edge count {m} exceeds u32 identifiers"),
            });
        }
        let m = m as usize;
        let mut pick_rng = Rng::from_seed_label(seed, STREAM_EDGE_PICK);
        let k = self.k as usize;
        let mut flat = vec![0u32; m * k];
        let mut hint = self.k - 1;
        if self.total <= u64::MAX as u128 {
            // Fast path: 64-bit indices, open-addressing dedup, radix sort.
            let bound = self.total as u64;
            let mut indices: Vec<u64> = Vec::with_capacity(m);
            let mut seen = FastSet::with_capacity(m);
            while indices.len() < m {
                let idx = pick_rng.below_u64(bound);
                if seen.insert(idx) {
                    indices.push(idx);
                }
            }
            // Radix pays off only once the counting buffers amortize.
            if indices.len() >= 1 << 15 {
                radix_sort_u64(&mut indices);
            } else {
                indices.sort_unstable();
            }
            for (i, &idx) in indices.iter().enumerate() {
                self.table
                    .unrank_sorted_into(idx as u128, &mut hint, &mut flat[i * k..(i + 1) * k]);
            }
        } else {
            let mut indices: Vec<u128> = Vec::with_capacity(m);
            let mut seen: HashSet<u128> = HashSet::with_capacity(m * 2);
            while indices.len() < m {
                let idx = pick_rng.below_u128(self.total);
                if seen.insert(idx) {
                    indices.push(idx);
                }
            }
            indices.sort_unstable();
            for (i, &idx) in indices.iter().enumerate() {
                self.table
                    .unrank_sorted_into(idx, &mut hint, &mut flat[i * k..(i + 1) * k]);
            }
        }
        Ok(Hypergraph::from_canonical_flat(self.n, self.k, flat))
    }
}

/// Sample H(n, k, p_n) under a regime; deterministic in (seed, n, k, regime).
pub fn sample(config: &SampleConfig, regime: &RegimeSpec) -> Result<Hypergraph> {
    let p = edge_probability(regime, config.n, config.k)?;
    Sampler::new(config.n, config.k)?.sample_seeded(config.seed, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regime_probabilities() {
        // C(99, 2) = 4851
        let p = edge_probability(&RegimeSpec::FixedLambda(2.0), 100, 3).unwrap();
        assert!((p - 2.0 / 4851.0).abs() < 1e-18);

        let p = edge_probability(&RegimeSpec::LogPlusC(0.0), 100, 3).unwrap();
        assert!((p - (100.0f64).ln() / 4851.0).abs() < 1e-18);
        assert!((p - 9.49324e-4).abs() < 1e-8);

        assert!(matches!(
            edge_probability(&RegimeSpec::FixedLambda(10.0), 5, 3),
            Err(Error::InfeasibleRegime { .. })
        ));
        assert!(matches!(
            edge_probability(&RegimeSpec::LogPlusC(-100.0), 10, 3),
            Err(Error::InfeasibleRegime { .. })
        ));
    }

    #[test]
    fn regime_grammar_round_trip() {
        for s in ["p=0.5", "lambda=2", "log+c=0", "halfloglog+w=-0.25"] {
            let r: RegimeSpec = s.parse().unwrap();
            let back: RegimeSpec = r.to_string().parse().unwrap();
            assert_eq!(r, back);
        }
        assert!("gaussian=1".parse::<RegimeSpec>().is_err());
        assert!("p=abc".parse::<RegimeSpec>().is_err());
        assert!("p".parse::<RegimeSpec>().is_err());
    }

    #[test]
    fn degenerate_probabilities() {
        let cfg = SampleConfig { n: 4, k: 3, seed: 11 };
        let empty = sample(&cfg, &RegimeSpec::FixedP(0.0)).unwrap();
        assert_eq!(empty.m(), 0);
        let full = sample(&cfg, &RegimeSpec::FixedP(1.0)).unwrap();
        assert_eq!(full.m(), 4);
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = SampleConfig { n: 100, k: 3, seed: 1 };
        let a = sample(&cfg, &RegimeSpec::LogPlusC(0.0)).unwrap();
        let b = sample(&cfg, &RegimeSpec::LogPlusC(0.0)).unwrap();
        assert_eq!(a, b);
        let c = sample(&SampleConfig { seed: 2, ..cfg }, &RegimeSpec::LogPlusC(0.0)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_edges_are_canonical_and_distinct() {
        let sampler = Sampler::new(30, 3).unwrap();
        for seed in 0..20 {
            let h = sampler.sample_seeded(seed, 0.05).unwrap();
            let edges: Vec<&[u32]> = h.edges().collect();
            for e in &edges {
                assert!(e.windows(2).all(|w| w[0] < w[1]));
            }
            for w in edges.windows(2) {
                assert!(w[0].iter().rev().cmp(w[1].iter().rev()) == std::cmp::Ordering::Less);
            }
        }
    }

    #[test]
    fn mean_edge_count_matches_binomial() {
        let sampler = Sampler::new(4, 3).unwrap();
        let reps = 100_000;
        let mut total = 0u64;
        for seed in 0..reps {
            total += sampler.sample_seeded(seed, 0.5).unwrap().m() as u64;
        }
        let mean = total as f64 / reps as f64;
        let se = (4.0 * 0.25 / reps as f64).sqrt();
        assert!((mean - 2.0).abs() <= 4.0 * se, "mean {mean}");
    }
}
