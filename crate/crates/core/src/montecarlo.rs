//! Seeded, reproducible Monte Carlo experiments over H(n, k, p_n),
//! aggregating the collision census against exact oracles and limit laws.
//!
//! Per-trial seeds come from the fixed mixing function
//! mix(master_seed, n, trial_index), so results are identical for any
//! worker count; aggregation is commutative integer merging.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::collisions::{
    census, expected_isolated_exact, expected_triples_exact, expected_xr_exact, limit_parameters,
    CollisionCensus, LimitLaw,
};
use crate::error::{Error, Result};
use crate::rng::mix;
use crate::sampler::{edge_probability, RegimeSpec, Sampler};
use crate::spectral::spectral_split_check;
use crate::star_matrix::{Kernel, StarKernel, MATRIX_DIM_CAP};

fn default_r_max() -> u32 {
    4
}

fn default_pmf_cap() -> u64 {
    64
}

/// A reproducible experiment: everything the output depends on.
/// Worker count is an execution detail and is deliberately not part of
/// the plan (identical plans must produce identical results JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_list: Vec<u32>,
    pub k: u32,
    pub regime: RegimeSpec,
    pub trials: u64,
    pub master_seed: u64,
    /// Also run the spectral split check on every trial (n <= 4096).
    #[serde(default)]
    pub collect_spectral: bool,
    /// Largest support size tracked explicitly (>= 2).
    #[serde(default = "default_r_max")]
    pub r_max: u32,
    /// Histogram value cap; larger values land in the overflow bucket.
    #[serde(default = "default_pmf_cap")]
    pub pmf_cap: u64,
}

/// Exact-valued histogram; the cap is applied when converting to a pmf.
#[derive(Clone, Debug, Default)]
pub struct Hist {
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl Hist {
    pub fn add(&mut self, value: u64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &Hist) {
        for (&v, &c) in &other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn to_pmf(&self, cap: u64) -> Pmf {
        let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
        let mut overflow = 0.0;
        let t = self.total as f64;
        for (&v, &c) in &self.counts {
            if v <= cap {
                *mass.entry(v).or_insert(0.0) += c as f64 / t;
            } else {
                overflow += c as f64 / t;
            }
        }
        Pmf { cap, mass, overflow }
    }

    /// CSV rows `value,count,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value,count,probability\n");
        for (&v, &c) in &self.counts {
            out.push_str(&format!("{v},{c},{}\n", c as f64 / self.total as f64));
        }
        out
    }
}

/// Probability mass on integer values up to `cap`, with an overflow
/// bucket carrying the tail mass beyond the cap.
#[derive(Clone, Debug, Serialize)]
pub struct Pmf {
    pub cap: u64,
    pub mass: BTreeMap<u64, f64>,
    pub overflow: f64,
}

impl Pmf {
    fn check_normalized(&self) -> Result<()> {
        let mut sum = self.overflow;
        for (&v, &p) in &self.mass {
            if p < 0.0 {
                return Err(Error::BadPmf { reason: format!("negative mass at {v}") });
            }
            sum += p;
        }
        if self.overflow < 0.0 {
            return Err(Error::BadPmf { reason: "negative overflow mass".into() });
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadPmf { reason: format!("total mass {sum} != 1") });
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.mass.iter().map(|(&v, &p)| v as f64 * p).sum()
    }
}

/// Total variation distance: half the L1 distance over the union support,
/// with the overflow buckets (empirical lump vs theoretical tail mass)
/// compared against each other.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    p.check_normalized()?;
    q.check_normalized()?;
    if p.cap != q.cap {
        return Err(Error::BadPmf {
            reason: format!("pmf caps differ: {} vs {}", p.cap, q.cap),
        });
    }
    let mut l1 = (p.overflow - q.overflow).abs();
    for (&v, &mass) in &p.mass {
        l1 += (mass - q.mass.get(&v).copied().unwrap_or(0.0)).abs();
    }
    for (&v, &mass) in &q.mass {
        if !p.mass.contains_key(&v) {
            l1 += mass;
        }
    }
    Ok(0.5 * l1)
}

/// Poisson pmf e^{-mu} mu^j / j!, evaluated in log space.
pub fn poisson_pmf(mu: f64, j: u64) -> f64 {
    assert!(mu >= 0.0, "poisson mean must be nonnegative");
    if mu == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let mut log_fact = 0.0;
    for i in 1..=j {
        log_fact += (i as f64).ln();
    }
    (-mu + j as f64 * mu.ln() - log_fact).exp()
}

/// Poisson(mu) as a capped pmf; the overflow bucket holds the tail mass.
pub fn poisson_pmf_table(mu: f64, cap: u64) -> Pmf {
    let mut mass = BTreeMap::new();
    let mut acc = 0.0;
    for j in 0..=cap {
        let p = poisson_pmf(mu, j);
        mass.insert(j, p);
        acc += p;
    }
    Pmf { cap, mass, overflow: (1.0 - acc).max(0.0) }
}

/// Law of C(Z, 2) for Z ~ Poisson(z_mean): mass P(Z = z) lands on the
/// value C(z,2); z = 0 and z = 1 both map to 0.
pub fn x0_law_from_z_mean(z_mean: f64, cap: u64) -> Pmf {
    let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
    let mut acc = 0.0;
    let mut z = 0u64;
    loop {
        let value = z * z.saturating_sub(1) / 2;
        if value > cap {
            break;
        }
        let p = poisson_pmf(z_mean, z);
        *mass.entry(value).or_insert(0.0) += p;
        acc += p;
        z += 1;
    }
    Pmf { cap, mass, overflow: (1.0 - acc).max(0.0) }
}

/// Limit law of X_0 in the critical window λ_n = log n + c:
/// C(Z, 2) with Z ~ Poisson(e^{-c}).
pub fn x0_limit_pmf(c: f64, cap: u64) -> Pmf {
    x0_law_from_z_mean((-c).exp(), cap)
}

#[derive(Clone, Debug)]
struct StatAcc {
    sum: u128,
    sumsq: u128,
    hist: Hist,
}

impl StatAcc {
    fn new() -> Self {
        StatAcc { sum: 0, sumsq: 0, hist: Hist::default() }
    }

    fn add(&mut self, v: u64) {
        self.sum = self.sum.saturating_add(v as u128);
        self.sumsq = self.sumsq.saturating_add((v as u128) * (v as u128));
        self.hist.add(v);
    }

    fn merge(&mut self, other: &StatAcc) {
        self.sum = self.sum.saturating_add(other.sum);
        self.sumsq = self.sumsq.saturating_add(other.sumsq);
        self.hist.merge(&other.hist);
    }

    fn mean(&self, trials: u64) -> f64 {
        self.sum as f64 / trials as f64
    }

    /// Unbiased sample variance.
    fn variance(&self, trials: u64) -> f64 {
        if trials < 2 {
            return 0.0;
        }
        let t = trials as f64;
        let mean = self.sum as f64 / t;
        let raw = self.sumsq as f64 / t - mean * mean;
        (raw * t / (t - 1.0)).max(0.0)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct KernelSpectralCounts {
    pub instances: u64,
    pub matched: u64,
    pub equitable_exact: u64,
    pub max_match_error: f64,
}

#[derive(Clone, Debug)]
struct Accumulator {
    trials: u64,
    m: StatAcc,
    isolated: StatAcc,
    x0: StatAcc,
    /// X_r for r = 1..=r_max.
    xr: Vec<StatAcc>,
    y: StatAcc,
    dim_loc: StatAcc,
    u2: StatAcc,
    u_ge3: StatAcc,
    ev_x0_eq_0: u64,
    ev_u_ge3_gt_0: u64,
    ev_all_stars_distinct: u64,
    spectral: BTreeMap<String, KernelSpectralCounts>,
}

impl Accumulator {
    fn new(r_max: u32) -> Self {
        Accumulator {
            trials: 0,
            m: StatAcc::new(),
            isolated: StatAcc::new(),
            x0: StatAcc::new(),
            xr: (0..r_max).map(|_| StatAcc::new()).collect(),
            y: StatAcc::new(),
            dim_loc: StatAcc::new(),
            u2: StatAcc::new(),
            u_ge3: StatAcc::new(),
            ev_x0_eq_0: 0,
            ev_u_ge3_gt_0: 0,
            ev_all_stars_distinct: 0,
            spectral: BTreeMap::new(),
        }
    }

    fn add(&mut self, c: &CollisionCensus) {
        self.trials += 1;
        self.m.add(c.m as u64);
        self.isolated.add(c.isolated);
        self.x0.add(c.x0);
        for (i, acc) in self.xr.iter_mut().enumerate() {
            acc.add(c.x_r(i as u32 + 1));
        }
        self.y.add(c.y);
        self.dim_loc.add(c.dim_loc);
        self.u2.add(c.u.get(&2).copied().unwrap_or(0));
        self.u_ge3.add(c.u_ge3());
        if c.x0 == 0 {
            self.ev_x0_eq_0 += 1;
        }
        if c.u_ge3() > 0 {
            self.ev_u_ge3_gt_0 += 1;
        }
        if c.y == 0 {
            self.ev_all_stars_distinct += 1;
        }
    }

    fn add_spectral(&mut self, kernel: &str, matched: bool, equit_exact: bool, err: f64) {
        let entry = self.spectral.entry(kernel.to_string()).or_default();
        entry.instances += 1;
        if matched {
            entry.matched += 1;
        }
        if equit_exact {
            entry.equitable_exact += 1;
        }
        entry.max_match_error = entry.max_match_error.max(err);
    }

    fn merge(&mut self, other: &Accumulator) {
        self.trials += other.trials;
        self.m.merge(&other.m);
        self.isolated.merge(&other.isolated);
        self.x0.merge(&other.x0);
        for (a, b) in self.xr.iter_mut().zip(&other.xr) {
            a.merge(b);
        }
        self.y.merge(&other.y);
        self.dim_loc.merge(&other.dim_loc);
        self.u2.merge(&other.u2);
        self.u_ge3.merge(&other.u_ge3);
        self.ev_x0_eq_0 += other.ev_x0_eq_0;
        self.ev_u_ge3_gt_0 += other.ev_u_ge3_gt_0;
        self.ev_all_stars_distinct += other.ev_all_stars_distinct;
        for (k, v) in &other.spectral {
            let e = self.spectral.entry(k.clone()).or_default();
            e.instances += v.instances;
            e.matched += v.matched;
            e.equitable_exact += v.equitable_exact;
            e.max_match_error = e.max_match_error.max(v.max_match_error);
        }
    }
}

/// TV distances against the regime's asymptotic limit law and against the
/// same family recentered at the exact finite-n mean.
#[derive(Clone, Debug, Serialize)]
pub struct TvPair {
    pub limit: Option<f64>,
    pub exact: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreqBlock {
    pub x0_eq_0: f64,
    pub x0_gt_0: f64,
    pub u_ge3_gt_0: f64,
    pub all_stars_distinct: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleBlock {
    /// Exact E[X_r] for r = 0..=r_max.
    pub expected_x: BTreeMap<u32, f64>,
    pub expected_triples: f64,
    pub expected_isolated: f64,
}

/// Per-n aggregation.
#[derive(Clone, Debug, Serialize)]
pub struct RegimeBlock {
    pub n: u32,
    pub p: f64,
    pub lambda: f64,
    pub trials: u64,
    pub mean: BTreeMap<String, f64>,
    pub variance: BTreeMap<String, f64>,
    pub oracle: OracleBlock,
    /// (empirical mean - exact oracle) / empirical standard error;
    /// null when the empirical SE is zero but the means differ.
    pub z: BTreeMap<String, Option<f64>>,
    pub pmf: BTreeMap<String, Pmf>,
    pub tv: BTreeMap<String, TvPair>,
    pub freq: FreqBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<BTreeMap<String, KernelSpectralCounts>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub version: String,
    pub plan: ExperimentPlan,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_law: Option<LimitLaw>,
    pub per_n: Vec<RegimeBlock>,
}

impl ExperimentSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

fn validate_plan(plan: &ExperimentPlan) -> Result<()> {
    if plan.n_list.is_empty() {
        return Err(Error::Empty { what: "n_list" });
    }
    if plan.trials == 0 {
        return Err(Error::InvalidParameter { reason: "trials must be >= 1".into() });
    }
    if plan.r_max < 2 {
        return Err(Error::InvalidParameter { reason: "r_max must be >= 2".into() });
    }
    for &n in &plan.n_list {
        edge_probability(&plan.regime, n, plan.k)?;
        if plan.collect_spectral && n > MATRIX_DIM_CAP {
            return Err(Error::Capacity {
                reason: format!("collect_spectral requires n <= {MATRIX_DIM_CAP}, got {n}"),
            });
        }
    }
    Ok(())
}

fn run_trials(
    plan: &ExperimentPlan,
    n: u32,
    p: f64,
    sampler: &Sampler,
    workers: usize,
) -> Result<Accumulator> {
    let workers = workers.max(1).min(plan.trials.max(1) as usize);
    let partials: Vec<Result<Accumulator>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let lo = plan.trials * w / workers as u64;
                let hi = plan.trials * (w + 1) / workers as u64;
                scope.spawn(move || -> Result<Accumulator> {
                    let mut acc = Accumulator::new(plan.r_max);
                    for t in lo..hi {
                        let seed = mix(&[plan.master_seed, n as u64, t]);
                        let h = sampler.sample_seeded(seed, p)?;
                        acc.add(&census(&h));
                        if plan.collect_spectral {
                            for kernel in Kernel::SYMMETRIC {
                                let rep = spectral_split_check(&h, &kernel, 1e-8)?;
                                acc.add_spectral(
                                    kernel.name(),
                                    rep.matched,
                                    rep.equitable_deviation == 0.0,
                                    rep.max_match_error,
                                );
                            }
                        }
                    }
                    Ok(acc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut merged = Accumulator::new(plan.r_max);
    for partial in partials {
        merged.merge(&partial?);
    }
    Ok(merged)
}

fn z_score(mean: f64, variance: f64, trials: u64, oracle: f64) -> Option<f64> {
    let se = (variance / trials as f64).sqrt();
    let diff = mean - oracle;
    if se == 0.0 {
        if diff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some(diff / se)
    }
}

fn build_block(plan: &ExperimentPlan, n: u32, p: f64, lambda: f64, acc: &Accumulator) -> RegimeBlock {
    let cap = plan.pmf_cap;
    let trials = acc.trials;
    let law = limit_parameters(&plan.regime, plan.k).ok();

    let mut mean = BTreeMap::new();
    let mut variance = BTreeMap::new();
    let mut named: Vec<(String, &StatAcc)> = vec![
        ("m".into(), &acc.m),
        ("I_n".into(), &acc.isolated),
        ("X0".into(), &acc.x0),
        ("Y".into(), &acc.y),
        ("dim_loc".into(), &acc.dim_loc),
        ("U2".into(), &acc.u2),
        ("U_ge3".into(), &acc.u_ge3),
    ];
    for (i, stat) in acc.xr.iter().enumerate() {
        named.push((format!("X{}", i + 1), stat));
    }
    for (name, stat) in &named {
        mean.insert(name.clone(), stat.mean(trials));
        variance.insert(name.clone(), stat.variance(trials));
    }

    let mut expected_x = BTreeMap::new();
    for r in 0..=plan.r_max {
        expected_x.insert(r, expected_xr_exact(n, plan.k, p, r));
    }
    let expected_triples = expected_triples_exact(n, plan.k, p);
    let expected_isolated = expected_isolated_exact(n, plan.k, p);

    let mut z = BTreeMap::new();
    z.insert(
        "X0".to_string(),
        z_score(acc.x0.mean(trials), acc.x0.variance(trials), trials, expected_x[&0]),
    );
    for (i, stat) in acc.xr.iter().enumerate() {
        let r = i as u32 + 1;
        z.insert(
            format!("X{r}"),
            z_score(stat.mean(trials), stat.variance(trials), trials, expected_x[&r]),
        );
    }

    let mut pmf = BTreeMap::new();
    pmf.insert("X0".to_string(), acc.x0.hist.to_pmf(cap));
    if !acc.xr.is_empty() {
        pmf.insert("X1".to_string(), acc.xr[0].hist.to_pmf(cap));
    }
    if acc.xr.len() >= 2 {
        pmf.insert("X2".to_string(), acc.xr[1].hist.to_pmf(cap));
    }
    if acc.xr.len() >= 3 {
        pmf.insert("X3".to_string(), acc.xr[2].hist.to_pmf(cap));
    }
    pmf.insert("Y".to_string(), acc.y.hist.to_pmf(cap));
    pmf.insert("dim_loc".to_string(), acc.dim_loc.hist.to_pmf(cap));

    // TV distances; `exact` recenters the limit family at the exact
    // finite-n mean, `limit` uses the asymptotic parameter.
    let mut tv = BTreeMap::new();
    let tv_of = |emp: &Pmf, theory: &Pmf| tv_distance(emp, theory).ok();
    let x1_exact_mean = expected_x[&1];
    {
        let emp = &pmf["X0"];
        let exact = tv_of(emp, &x0_law_from_z_mean(expected_isolated, cap));
        let limit = match &law {
            Some(LimitLaw::DegenerateWindow { z_mean, .. }) => {
                tv_of(emp, &x0_law_from_z_mean(*z_mean, cap))
            }
            _ => None,
        };
        tv.insert("X0".to_string(), TvPair { limit, exact });
    }
    if let Some(emp) = pmf.get("X1") {
        let exact = tv_of(emp, &poisson_pmf_table(x1_exact_mean, cap));
        let limit = match &law {
            Some(LimitLaw::SupportOnePoisson { mean, .. }) => {
                tv_of(emp, &poisson_pmf_table(*mean, cap))
            }
            Some(LimitLaw::DegenerateWindow { .. }) => tv_of(emp, &poisson_pmf_table(0.0, cap)),
            _ => None,
        };
        tv.insert("X1".to_string(), TvPair { limit, exact });
    }
    if let Some(emp) = pmf.get("X2") {
        let exact = tv_of(emp, &poisson_pmf_table(expected_x[&2], cap));
        let limit = match &law {
            Some(LimitLaw::SupportTwoPoisson { mean, .. }) => {
                tv_of(emp, &poisson_pmf_table(*mean, cap))
            }
            Some(LimitLaw::DegenerateWindow { .. }) | Some(LimitLaw::SupportOnePoisson { .. }) => {
                tv_of(emp, &poisson_pmf_table(0.0, cap))
            }
            _ => None,
        };
        tv.insert("X2".to_string(), TvPair { limit, exact });
    }
    for name in ["Y", "dim_loc"] {
        let emp = &pmf[name];
        let exact = tv_of(emp, &poisson_pmf_table(x1_exact_mean, cap));
        let limit = match &law {
            Some(LimitLaw::SupportOnePoisson { mean, .. }) => {
                tv_of(emp, &poisson_pmf_table(*mean, cap))
            }
            Some(LimitLaw::DegenerateWindow { .. }) => tv_of(emp, &poisson_pmf_table(0.0, cap)),
            _ => None,
        };
        tv.insert(name.to_string(), TvPair { limit, exact });
    }

    let t = trials as f64;
    let freq = FreqBlock {
        x0_eq_0: acc.ev_x0_eq_0 as f64 / t,
        x0_gt_0: (trials - acc.ev_x0_eq_0) as f64 / t,
        u_ge3_gt_0: acc.ev_u_ge3_gt_0 as f64 / t,
        all_stars_distinct: acc.ev_all_stars_distinct as f64 / t,
    };

    RegimeBlock {
        n,
        p,
        lambda,
        trials,
        mean,
        variance,
        oracle: OracleBlock { expected_x, expected_triples, expected_isolated },
        z,
        pmf,
        tv,
        freq,
        spectral: if acc.spectral.is_empty() { None } else { Some(acc.spectral.clone()) },
    }
}

/// Run the plan on `workers` threads. The output is a pure function of
/// the plan: worker count and scheduling cannot affect it.
pub fn run_experiment(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentSummary> {
    validate_plan(plan)?;
    let mut per_n = Vec::with_capacity(plan.n_list.len());
    for &n in &plan.n_list {
        let p = edge_probability(&plan.regime, n, plan.k)?;
        let lambda = plan.regime.lambda(n, plan.k)?;
        let sampler = Sampler::new(n, plan.k)?;
        let acc = run_trials(plan, n, p, &sampler, workers)?;
        per_n.push(build_block(plan, n, p, lambda, &acc));
    }
    Ok(ExperimentSummary {
        version: env!("CARGO_PKG_VERSION").to_string(),
        plan: plan.clone(),
        limit_law: limit_parameters(&plan.regime, plan.k).ok(),
        per_n,
    })
}

/// Raw per-stat histograms for one n (CSV export path).
pub fn run_histograms(plan: &ExperimentPlan, n: u32, workers: usize) -> Result<BTreeMap<String, Hist>> {
    validate_plan(plan)?;
    let p = edge_probability(&plan.regime, n, plan.k)?;
    let sampler = Sampler::new(n, plan.k)?;
    let acc = run_trials(plan, n, p, &sampler, workers)?;
    let mut out = BTreeMap::new();
    out.insert("X0".to_string(), acc.x0.hist.clone());
    for (i, stat) in acc.xr.iter().enumerate() {
        out.insert(format!("X{}", i + 1), stat.hist.clone());
    }
    out.insert("Y".to_string(), acc.y.hist.clone());
    out.insert("dim_loc".to_string(), acc.dim_loc.hist.clone());
    out.insert("I_n".to_string(), acc.isolated.hist.clone());
    out.insert("m".to_string(), acc.m.hist.clone());
    Ok(out)
}
