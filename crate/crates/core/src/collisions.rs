//! Star-collision census, unit partition, and exact expectation oracles.
//!
//! A star collision is an unordered vertex pair {u, v} with Γ(u) = Γ(v);
//! its support is the common star, and X_r counts pairs with support size
//! r (X_0 the isolated pairs). Units are the equivalence classes of
//! non-isolated vertices under star equality; isolated vertices stay
//! singletons and are tracked separately.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::combo::{binom, log_binom, log_binom_big};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, StarTable};
use crate::sampler::RegimeSpec;
use crate::util::MixBuild;

/// A maximal set of vertices with identical non-empty stars.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Unit {
    /// Sorted member vertices.
    pub vertices: Vec<u32>,
    /// The common star, sorted edge ids (non-empty).
    pub support: Vec<u32>,
}

impl Unit {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// Grouping of the vertex set by star equality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitPartition {
    /// All units of non-isolated vertices (singletons included),
    /// ordered by smallest member.
    pub units: Vec<Unit>,
    /// Sorted isolated vertices; each is its own singleton part.
    pub isolated: Vec<u32>,
}

impl UnitPartition {
    /// Units of size >= 2.
    pub fn nontrivial(&self) -> impl Iterator<Item = &Unit> {
        self.units.iter().filter(|u| u.size() >= 2)
    }

    /// Number of parts: units plus isolated singletons.
    pub fn part_count(&self) -> usize {
        self.units.len() + self.isolated.len()
    }

    /// All parts (units and isolated singletons) ordered by smallest
    /// member; the canonical ordering used by quotients and lifts.
    pub fn parts(&self) -> Vec<Vec<u32>> {
        let mut parts: Vec<Vec<u32>> = self
            .units
            .iter()
            .map(|u| u.vertices.clone())
            .chain(self.isolated.iter().map(|&v| vec![v]))
            .collect();
        parts.sort_by_key(|p| p[0]);
        parts
    }

    /// dim H_loc = sum over nontrivial units of (|W| - 1).
    pub fn dim_loc(&self) -> u64 {
        self.nontrivial().map(|u| u.size() as u64 - 1).sum()
    }
}

/// Integer census of one hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionCensus {
    pub n: u32,
    pub k: u32,
    pub m: u32,
    /// Isolated vertex count.
    #[serde(rename = "I_n")]
    pub isolated: u64,
    /// Degenerate collision pairs: C(I_n, 2).
    #[serde(rename = "X0")]
    pub x0: u64,
    /// Support size r >= 1 -> collision pair count.
    #[serde(rename = "X")]
    pub x: BTreeMap<u32, u64>,
    /// Unit size m >= 2 -> count of nontrivial units.
    #[serde(rename = "U")]
    pub u: BTreeMap<u32, u64>,
    /// Total nontrivial units.
    #[serde(rename = "Y")]
    pub y: u64,
    /// Sum of (|W| - 1) over nontrivial units.
    pub dim_loc: u64,
}

impl CollisionCensus {
    pub fn x_r(&self, r: u32) -> u64 {
        if r == 0 {
            self.x0
        } else {
            self.x.get(&r).copied().unwrap_or(0)
        }
    }

    /// Count of units of size >= 3.
    pub fn u_ge3(&self) -> u64 {
        self.u.iter().filter(|(&m, _)| m >= 3).map(|(_, &c)| c).sum()
    }
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// 128-bit hash of a star's edge-id list (two independently mixed 64-bit
/// lanes). Grouping is confirmed by a full list comparison on hash
/// agreement, so the census is exact, not probabilistic.
fn star_hash(star: &[u32]) -> u128 {
    let mut a: u64 = 0x243F_6A88_85A3_08D3 ^ star.len() as u64;
    let mut b: u64 = 0x1319_8A2E_0370_7344;
    for &id in star {
        a = (a ^ id as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        a ^= a >> 29;
        b = (b ^ id as u64).wrapping_mul(0x94D0_49BB_1331_11EB);
        b ^= b >> 31;
    }
    ((a as u128) << 64) | b as u128
}

enum Bucket {
    One(u32),
    Many(Vec<u32>),
}

/// Group non-isolated vertices by star hash; `confirmed` subgroups share
/// identical stars. Calls `f(members)` for every confirmed group
/// (singletons included), members ascending.
fn for_each_star_group<F: FnMut(&[u32])>(table: &StarTable, mut f: F) {
    let n = table.n();
    let mut map: HashMap<u128, Bucket, MixBuild> =
        HashMap::with_capacity_and_hasher(n as usize, MixBuild::default());
    for v in 0..n {
        let star = table.star_of(v);
        if star.is_empty() {
            continue;
        }
        let h = star_hash(star);
        match map.entry(h) {
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(Bucket::One(v));
            }
            std::collections::hash_map::Entry::Occupied(mut e) => match e.get_mut() {
                Bucket::One(first) => {
                    let first = *first;
                    e.insert(Bucket::Many(vec![first, v]));
                }
                Bucket::Many(vs) => vs.push(v),
            },
        }
    }
    let mut scratch: Vec<u32> = Vec::new();
    for bucket in map.values() {
        match bucket {
            Bucket::One(v) => f(std::slice::from_ref(v)),
            Bucket::Many(vs) => {
                // Hash agreement only: split by full star comparison.
                let mut remaining: Vec<u32> = vs.clone();
                while !remaining.is_empty() {
                    let rep = remaining[0];
                    let rep_star = table.star_of(rep);
                    scratch.clear();
                    let mut rest = Vec::new();
                    for &v in &remaining {
                        if table.star_of(v) == rep_star {
                            scratch.push(v);
                        } else {
                            rest.push(v);
                        }
                    }
                    f(&scratch);
                    remaining = rest;
                }
            }
        }
    }
}

/// Group vertices by exact star equality.
pub fn build_partition(h: &Hypergraph) -> UnitPartition {
    let table = h.star_table();
    let mut isolated: Vec<u32> = (0..h.n()).filter(|&v| table.degree(v) == 0).collect();
    isolated.sort_unstable();
    let mut units: Vec<Unit> = Vec::new();
    for_each_star_group(&table, |members| {
        units.push(Unit {
            vertices: members.to_vec(),
            support: table.star_of(members[0]).to_vec(),
        });
    });
    units.sort_by_key(|u| u.vertices[0]);
    UnitPartition { units, isolated }
}

/// Full collision census. Counts are derived from star groups without
/// materializing singleton units.
pub fn census(h: &Hypergraph) -> CollisionCensus {
    let table = h.star_table();
    let isolated = (0..h.n()).filter(|&v| table.degree(v) == 0).count() as u64;
    let mut x: BTreeMap<u32, u64> = BTreeMap::new();
    let mut u: BTreeMap<u32, u64> = BTreeMap::new();
    let mut y = 0u64;
    let mut dim_loc = 0u64;
    for_each_star_group(&table, |members| {
        let size = members.len() as u64;
        if size < 2 {
            return;
        }
        let r = table.star_of(members[0]).len() as u32;
        debug_assert!(r >= 1);
        *x.entry(r).or_insert(0) += choose2(size);
        *u.entry(members.len() as u32).or_insert(0) += 1;
        y += 1;
        dim_loc += size - 1;
    });
    CollisionCensus {
        n: h.n(),
        k: h.k(),
        m: h.m(),
        isolated,
        x0: choose2(isolated),
        x,
        u,
        y,
        dim_loc,
    }
}

fn binom_u128_or_f64(n: u64, r: u64) -> (Option<u128>, f64) {
    match binom(n, r) {
        Some(v) => (Some(v), v as f64),
        None => (None, log_binom(n, r).exp()),
    }
}

/// Exact E[X_r] for H(n, k, p):
/// C(n,2) C(C(n-2,k-2), r) p^r (1-p)^(2 C(n-2,k-1) + C(n-2,k-2) - r),
/// evaluated in log space. Returns 0 when r > C(n-2, k-2).
pub fn expected_xr_exact(n: u32, k: u32, p: f64, r: u32) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p out of [0,1]");
    if n < 2 {
        return 0.0;
    }
    let (c2_int, c2_f) = binom_u128_or_f64(n as u64 - 2, k as u64 - 2);
    if let Some(c2) = c2_int {
        if (r as u128) > c2 {
            return 0.0;
        }
    }
    if p == 0.0 {
        // Everything is isolated: X_0 = C(n,2) surely, X_r = 0 for r >= 1.
        return if r == 0 { binom_u128_or_f64(n as u64, 2).1 } else { 0.0 };
    }
    // Edges meeting {u,v}: 2 C(n-2,k-1) singles plus C(n-2,k-2) doubles.
    let (_, c1_f) = binom_u128_or_f64(n as u64 - 2, k as u64 - 1);
    let absent = 2.0 * c1_f + c2_f - r as f64;
    let mut log_e = log_binom(n as u64, 2);
    log_e += match c2_int {
        Some(c2) => log_binom_big(c2, r as u64),
        None => {
            // r ln c2 - ln r! suffices at this magnitude.
            let mut acc = 0.0;
            for i in 1..=r as u64 {
                acc += c2_f.ln() - (i as f64).ln();
            }
            acc
        }
    };
    if r > 0 {
        log_e += r as f64 * p.ln();
    }
    if absent > 0.0 {
        if p == 1.0 {
            return 0.0;
        }
        log_e += absent * (-p).ln_1p();
    }
    log_e.exp()
}

/// Leading-order E[X_r]: (k-1)^r / (2 r!) n^(2-r) λ^r e^(-2λ).
pub fn expected_xr_asymptotic(n: u32, k: u32, lambda: f64, r: u32) -> f64 {
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    let mut factorial = 1.0;
    for i in 1..=r as u64 {
        factorial *= i as f64;
    }
    let prefactor = ((k - 1) as f64).powi(r as i32) / (2.0 * factorial);
    prefactor
        * (n as f64).powi(2 - r as i32)
        * lambda.powi(r as i32)
        * (-2.0 * lambda).exp()
}

/// Exact expected number of vertex triples with identical non-empty stars:
/// E[T_n] = C(n,3) (1 - (1-p)^C(n-3,k-3)) (1-p)^B with
/// B = C(n,k) - C(n-3,k) - C(n-3,k-3). For k = 2 the inner coefficient is
/// C(n-3, -1) := 0, forcing E[T_n] = 0.
pub fn expected_triples_exact(n: u32, k: u32, p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p out of [0,1]");
    if n < 3 || k < 3 {
        return 0.0;
    }
    let (_, c3_f) = binom_u128_or_f64(n as u64 - 3, k as u64 - 3);
    if c3_f == 0.0 || p == 0.0 {
        return 0.0;
    }
    let (_, all_f) = binom_u128_or_f64(n as u64, k as u64);
    let (_, rest_f) = binom_u128_or_f64(n as u64 - 3, k as u64);
    let b = all_f - rest_f - c3_f;
    debug_assert!(b >= 0.0);
    // 1 - (1-p)^c3, accurate for tiny p via expm1.
    let at_least_one = -f64::exp_m1(c3_f * (-p).ln_1p());
    let absent = if b > 0.0 {
        if p == 1.0 {
            return 0.0;
        }
        (b * (-p).ln_1p()).exp()
    } else {
        1.0
    };
    log_binom(n as u64, 3).exp() * at_least_one * absent
}

/// Limit law implied by a regime (fixed p has none).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "law")]
pub enum LimitLaw {
    /// λ_n = log n + c: X_0 => C(Z,2) with Z ~ Poisson(e^{-c});
    /// X_r => 0 for every r >= 1.
    DegenerateWindow { c: f64, z_mean: f64 },
    /// λ_n = (log n + log log n)/2 + w: X_1 => Poisson((k-1) e^{-2w} / 4),
    /// Y follows the same law, units of size >= 3 vanish.
    SupportOnePoisson { w: f64, mean: f64 },
    /// λ_n -> λ fixed: X_2 => Poisson((k-1)^2 λ^2 e^{-2λ} / 4);
    /// X_r => 0 for r >= 3.
    SupportTwoPoisson { lambda: f64, mean: f64 },
}

pub fn limit_parameters(regime: &RegimeSpec, k: u32) -> Result<LimitLaw> {
    match *regime {
        RegimeSpec::LogPlusC(c) => Ok(LimitLaw::DegenerateWindow { c, z_mean: (-c).exp() }),
        RegimeSpec::HalfLogLogPlusW(w) => Ok(LimitLaw::SupportOnePoisson {
            w,
            mean: (k - 1) as f64 / 4.0 * (-2.0 * w).exp(),
        }),
        RegimeSpec::FixedLambda(lambda) => Ok(LimitLaw::SupportTwoPoisson {
            lambda,
            mean: ((k - 1) as f64).powi(2) / 4.0 * lambda * lambda * (-2.0 * lambda).exp(),
        }),
        RegimeSpec::FixedP(_) => Err(Error::NoLimitLaw),
    }
}

/// Exact E[I_n] = n (1-p)^C(n-1, k-1), the recentering mean for the
/// degenerate-collision limit law.
pub fn expected_isolated_exact(n: u32, k: u32, p: f64) -> f64 {
    let (_, d) = binom_u128_or_f64(n as u64 - 1, k as u64 - 1);
    if p == 1.0 {
        return if d == 0.0 { n as f64 } else { 0.0 };
    }
    n as f64 * (d * (-p).ln_1p()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(n: u32, k: u32, edges: &[Vec<u32>]) -> Hypergraph {
        Hypergraph::new(n, k, edges).unwrap()
    }

    #[test]
    fn partition_single_edge() {
        let p = build_partition(&h(4, 3, &[vec![0, 1, 2]]));
        assert_eq!(p.units.len(), 1);
        assert_eq!(p.units[0].vertices, vec![0, 1, 2]);
        assert_eq!(p.units[0].support, vec![0]);
        assert_eq!(p.isolated, vec![3]);
        assert_eq!(p.dim_loc(), 2);
    }

    #[test]
    fn partition_two_edges() {
        let p = build_partition(&h(5, 3, &[vec![0, 1, 2], vec![0, 1, 3]]));
        let sizes: Vec<usize> = p.units.iter().map(|u| u.size()).collect();
        assert_eq!(p.units[0].vertices, vec![0, 1]);
        assert_eq!(p.units[0].support, vec![0, 1]);
        assert_eq!(sizes, vec![2, 1, 1]);
        assert_eq!(p.isolated, vec![4]);
    }

    #[test]
    fn partition_empty() {
        let p = build_partition(&h(4, 3, &[]));
        assert!(p.units.is_empty());
        assert_eq!(p.isolated, vec![0, 1, 2, 3]);
        assert_eq!(p.part_count(), 4);
    }

    #[test]
    fn census_examples() {
        let c = census(&h(4, 3, &[vec![0, 1, 2]]));
        assert_eq!(c.x_r(1), 3);
        assert_eq!(c.x0, 0);
        assert_eq!(c.isolated, 1);
        assert_eq!(c.u.get(&3), Some(&1));
        assert_eq!(c.y, 1);
        assert_eq!(c.dim_loc, 2);

        let c = census(&h(5, 3, &[vec![0, 1, 2], vec![0, 1, 3]]));
        assert_eq!(c.x_r(2), 1);
        assert_eq!(c.x_r(1), 0);
        assert_eq!(c.x0, 0);
        assert_eq!(c.isolated, 1);
        assert_eq!(c.u.get(&2), Some(&1));
        assert_eq!(c.y, 1);
        assert_eq!(c.dim_loc, 1);

        let c = census(&h(4, 3, &[]));
        assert_eq!(c.x0, 6);
        assert!(c.x.is_empty());
        assert_eq!(c.isolated, 4);
        assert_eq!(c.y, 0);
    }

    #[test]
    fn census_json_keys() {
        let c = census(&h(4, 3, &[vec![0, 1, 2]]));
        let json = serde_json::to_value(&c).unwrap();
        assert_eq!(json["I_n"], 1);
        assert_eq!(json["X0"], 0);
        assert_eq!(json["X"]["1"], 3);
        assert_eq!(json["U"]["3"], 1);
        assert_eq!(json["Y"], 1);
        assert_eq!(json["dim_loc"], 2);
    }

    #[test]
    fn graph_rigidity_k2() {
        // In a graph, a shared non-empty star forces an isolated-edge
        // component: every nontrivial unit has size 2 and support 1.
        let c = census(&h(6, 2, &[vec![0, 1], vec![2, 3], vec![3, 4]]));
        assert_eq!(c.x_r(1), 1); // {0,1}
        assert!(c.x.keys().all(|&r| r == 1));
    }

    #[test]
    fn exact_xr_small_values() {
        // (4,3,0.5,1): C(4,2) C(2,1) 0.5 (0.5)^3 = 0.75
        assert!((expected_xr_exact(4, 3, 0.5, 1) - 0.75).abs() < 1e-15);
        // p=0, r=0: all vertices isolated, X0 = C(n,2).
        assert_eq!(expected_xr_exact(100, 3, 0.0, 0), 4950.0);
        // r > C(n-2, k-2) vanishes.
        assert_eq!(expected_xr_exact(4, 3, 0.5, 3), 0.0);
    }

    #[test]
    fn exact_xr_brute_force_tiny() {
        // All 2^4 hypergraphs on n=4, k=3.
        let all_edges = [[0u32, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        for &p in &[0.25f64, 0.5, 0.75] {
            let mut ex = [0.0f64; 3];
            let mut et = 0.0;
            for mask in 0u32..16 {
                let edges: Vec<Vec<u32>> = (0..4)
                    .filter(|&i| mask & (1 << i) != 0)
                    .map(|i| all_edges[i].to_vec())
                    .collect();
                let m = edges.len() as i32;
                let weight = p.powi(m) * (1.0 - p).powi(4 - m);
                let c = census(&h(4, 3, &edges));
                for (r, e) in ex.iter_mut().enumerate() {
                    *e += weight * c.x_r(r as u32) as f64;
                }
                let triples: u64 = c
                    .u
                    .iter()
                    .filter(|(&s, _)| s >= 3)
                    .map(|(&s, &cnt)| cnt * choose2(s as u64) * (s as u64 - 2) / 3)
                    .sum();
                et += weight * triples as f64;
            }
            for r in 0..3u32 {
                let oracle = expected_xr_exact(4, 3, p, r);
                assert!(
                    (ex[r as usize] - oracle).abs() <= 1e-12 * oracle.max(1.0),
                    "p={p} r={r}: brute {} vs exact {}",
                    ex[r as usize],
                    oracle
                );
            }
            let t_oracle = expected_triples_exact(4, 3, p);
            assert!(
                (et - t_oracle).abs() <= 1e-12 * t_oracle.max(1.0),
                "p={p}: brute triples {et} vs exact {t_oracle}"
            );
        }
    }

    #[test]
    fn triples_examples() {
        assert_eq!(expected_triples_exact(10, 3, 0.0), 0.0);
        assert!((expected_triples_exact(4, 3, 0.5) - 0.25).abs() < 1e-15);
        assert_eq!(expected_triples_exact(10, 2, 0.3), 0.0);
    }

    #[test]
    fn asymptotic_examples() {
        // r=0 reduces to n^2 e^{-2λ} / 2.
        let v = expected_xr_asymptotic(50, 3, 1.0, 0);
        assert!((v - 2500.0 / 2.0 * (-2.0f64).exp()).abs() < 1e-9);
        // (100, 3, ln 100, 1) = 100 ln(100) e^{-2 ln 100} ~ 0.046052
        let v = expected_xr_asymptotic(100, 3, (100.0f64).ln(), 1);
        assert!((v - 0.046052).abs() < 1e-6, "{v}");
    }

    #[test]
    fn exact_to_asymptotic_ratio() {
        // Ratio -> 1 slowly; within 15% at n=2000 in the halfloglog regime.
        let n = 2000u32;
        let lam = 0.5 * ((n as f64).ln() + (n as f64).ln().ln());
        let p = lam / binom(n as u64 - 1, 2).unwrap() as f64;
        let exact = expected_xr_exact(n, 3, p, 1);
        let asym = expected_xr_asymptotic(n, 3, lam, 1);
        assert!((exact / asym - 1.0).abs() <= 0.15, "ratio {}", exact / asym);
    }

    #[test]
    fn limit_parameter_examples() {
        let law = limit_parameters(&RegimeSpec::HalfLogLogPlusW(0.0), 3).unwrap();
        assert_eq!(law, LimitLaw::SupportOnePoisson { w: 0.0, mean: 0.5 });

        let law = limit_parameters(&RegimeSpec::FixedLambda(2.0), 3).unwrap();
        match law {
            LimitLaw::SupportTwoPoisson { mean, .. } => {
                assert!((mean - 4.0 * (-4.0f64).exp()).abs() < 1e-12);
                assert!((mean - 0.073263).abs() < 1e-6);
            }
            _ => panic!("wrong law"),
        }

        assert!(matches!(
            limit_parameters(&RegimeSpec::FixedP(0.1), 3),
            Err(Error::NoLimitLaw)
        ));
    }

    #[test]
    fn isolated_mean_exact() {
        // p=0: everything isolated.
        assert_eq!(expected_isolated_exact(7, 3, 0.0), 7.0);
        // Brute check at n=4, k=3, p=0.5: P(isolated) = (1/2)^3.
        let v = expected_isolated_exact(4, 3, 0.5);
        assert!((v - 4.0 * 0.125).abs() < 1e-15);
    }
}
