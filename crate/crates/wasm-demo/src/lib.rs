//! wasm-bindgen surface for the browser demo. Three operations, each
//! returning a JSON string for the page to render:
//!
//! - `sample_census`: one seeded hypergraph with its collision census
//!   and unit listing;
//! - `collision_pmf`: empirical distribution of a census statistic over
//!   seeded trials, with the exact-mean Poisson/C(Z,2) overlay and the
//!   regime's asymptotic limit law;
//! - `spectral_split`: the spectral decomposition report for one
//!   instance (full spectrum vs quotient spectrum plus unit eigenvalues).
//!
//! Input sizes are capped for browser responsiveness; the CLI and
//! library impose only the library-level caps.

use wasm_bindgen::prelude::*;

use hyperstar_core::collisions::{
    build_partition, census, expected_isolated_exact, expected_xr_exact, limit_parameters,
    LimitLaw,
};
use hyperstar_core::montecarlo::{
    poisson_pmf_table, run_experiment, x0_law_from_z_mean, ExperimentPlan, Pmf,
};
use hyperstar_core::sampler::{edge_probability, RegimeSpec, Sampler};
use hyperstar_core::spectral::{esd_kolmogorov, snap_eigenvalues, spectral_split_check};
use hyperstar_core::star_matrix::Kernel;

const DEMO_CENSUS_N_CAP: u32 = 200_000;
const DEMO_SPECTRAL_N_CAP: u32 = 200;
const DEMO_TRIAL_BUDGET: u64 = 200_000_000;

fn parse_regime(regime: &str) -> Result<RegimeSpec, String> {
    regime.parse::<RegimeSpec>().map_err(|e| e.to_string())
}

pub fn sample_census_json(n: u32, k: u32, regime: &str, seed: u64) -> Result<String, String> {
    if n > DEMO_CENSUS_N_CAP {
        return Err(format!("demo caps n at {DEMO_CENSUS_N_CAP}"));
    }
    let regime = parse_regime(regime)?;
    let p = edge_probability(&regime, n, k).map_err(|e| e.to_string())?;
    let lambda = regime.lambda(n, k).map_err(|e| e.to_string())?;
    let h = Sampler::new(n, k)
        .and_then(|s| s.sample_seeded(seed, p))
        .map_err(|e| e.to_string())?;
    let c = census(&h);
    let partition = build_partition(&h);
    let units: Vec<serde_json::Value> = partition
        .nontrivial()
        .take(200)
        .map(|u| {
            serde_json::json!({
                "vertices": u.vertices,
                "support_size": u.support_size(),
            })
        })
        .collect();
    let edges: Option<Vec<Vec<u32>>> = if h.m() <= 500 {
        Some(h.edges().map(|e| e.to_vec()).collect())
    } else {
        None
    };
    Ok(serde_json::json!({
        "p": p,
        "lambda": lambda,
        "census": c,
        "units": units,
        "edges": edges,
        "expected": {
            "X0": expected_xr_exact(n, k, p, 0),
            "X1": expected_xr_exact(n, k, p, 1),
            "X2": expected_xr_exact(n, k, p, 2),
            "isolated": expected_isolated_exact(n, k, p),
        },
    })
    .to_string())
}

fn limit_overlay(regime: &RegimeSpec, k: u32, stat: &str, cap: u64) -> Option<Pmf> {
    let law = limit_parameters(regime, k).ok()?;
    match (stat, law) {
        ("X0", LimitLaw::DegenerateWindow { z_mean, .. }) => Some(x0_law_from_z_mean(z_mean, cap)),
        ("X1" | "Y" | "dim_loc", LimitLaw::SupportOnePoisson { mean, .. }) => {
            Some(poisson_pmf_table(mean, cap))
        }
        ("X2", LimitLaw::SupportTwoPoisson { mean, .. }) => Some(poisson_pmf_table(mean, cap)),
        ("X1" | "X2" | "Y" | "dim_loc", LimitLaw::DegenerateWindow { .. }) => {
            Some(poisson_pmf_table(0.0, cap))
        }
        _ => None,
    }
}

pub fn collision_pmf_json(
    n: u32,
    k: u32,
    regime: &str,
    stat: &str,
    trials: u64,
    seed: u64,
) -> Result<String, String> {
    if n as u64 * trials > DEMO_TRIAL_BUDGET {
        return Err(format!("demo caps n * trials at {DEMO_TRIAL_BUDGET}"));
    }
    if !["X0", "X1", "X2", "Y", "dim_loc"].contains(&stat) {
        return Err(format!("unknown statistic `{stat}`"));
    }
    let regime_spec = parse_regime(regime)?;
    let plan = ExperimentPlan {
        n_list: vec![n],
        k,
        regime: regime_spec,
        trials,
        master_seed: seed,
        collect_spectral: false,
        r_max: 4,
        pmf_cap: 64,
    };
    let summary = run_experiment(&plan, 1).map_err(|e| e.to_string())?;
    let block = &summary.per_n[0];
    let p = block.p;
    let exact_overlay = match stat {
        "X0" => x0_law_from_z_mean(expected_isolated_exact(n, k, p), 64),
        "X1" | "Y" | "dim_loc" => poisson_pmf_table(expected_xr_exact(n, k, p, 1), 64),
        _ => poisson_pmf_table(expected_xr_exact(n, k, p, 2), 64),
    };
    Ok(serde_json::json!({
        "n": n,
        "k": k,
        "p": p,
        "lambda": block.lambda,
        "stat": stat,
        "trials": trials,
        "empirical": block.pmf.get(stat),
        "exact_overlay": exact_overlay,
        "limit_overlay": limit_overlay(&regime_spec, k, stat, 64),
        "mean": block.mean.get(stat),
        "oracle": block.oracle,
        "tv": block.tv.get(stat),
        "freq": block.freq,
    })
    .to_string())
}

pub fn spectral_split_json(
    n: u32,
    k: u32,
    regime: &str,
    kernel: &str,
    seed: u64,
) -> Result<String, String> {
    if n > DEMO_SPECTRAL_N_CAP {
        return Err(format!("demo caps spectral n at {DEMO_SPECTRAL_N_CAP}"));
    }
    let regime = parse_regime(regime)?;
    let kernel: Kernel = kernel.parse().map_err(|e: hyperstar_core::Error| e.to_string())?;
    let p = edge_probability(&regime, n, k).map_err(|e| e.to_string())?;
    let h = Sampler::new(n, k)
        .and_then(|s| s.sample_seeded(seed, p))
        .map_err(|e| e.to_string())?;
    let report = spectral_split_check(&h, &kernel, 1e-8).map_err(|e| e.to_string())?;
    let (sa, sb) = snap_eigenvalues(&report.spec_m, &report.spec_quotient, 1e-6);
    let ks = esd_kolmogorov(&sa, &sb).map_err(|e| e.to_string())?;
    let mut value = serde_json::to_value(&report).map_err(|e| e.to_string())?;
    value["esd_kolmogorov"] = serde_json::json!(ks);
    value["esd_bound"] = serde_json::json!(report.dim_loc as f64 / n as f64);
    value["m"] = serde_json::json!(h.m());
    Ok(value.to_string())
}

#[wasm_bindgen]
pub fn sample_census(n: u32, k: u32, regime: &str, seed: u32) -> Result<String, JsValue> {
    sample_census_json(n, k, regime, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn collision_pmf(
    n: u32,
    k: u32,
    regime: &str,
    stat: &str,
    trials: u32,
    seed: u32,
) -> Result<String, JsValue> {
    collision_pmf_json(n, k, regime, stat, trials as u64, seed as u64)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn spectral_split(
    n: u32,
    k: u32,
    regime: &str,
    kernel: &str,
    seed: u32,
) -> Result<String, JsValue> {
    spectral_split_json(n, k, regime, kernel, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_census_payload() {
        let out = sample_census_json(40, 3, "lambda=1.5", 7).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["census"]["n"] == 40);
        assert!(v["p"].as_f64().unwrap() > 0.0);
        assert!(v["edges"].is_array());
        // Deterministic for a fixed seed.
        assert_eq!(out, sample_census_json(40, 3, "lambda=1.5", 7).unwrap());
    }

    #[test]
    fn collision_pmf_payload() {
        let out = collision_pmf_json(60, 3, "lambda=1.0", "X2", 300, 11).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let mass = v["empirical"]["mass"].as_object().unwrap();
        let total: f64 = mass.values().map(|x| x.as_f64().unwrap()).sum::<f64>()
            + v["empirical"]["overflow"].as_f64().unwrap();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(v["exact_overlay"]["mass"]["0"].as_f64().unwrap() > 0.0);
        assert!(v["limit_overlay"]["mass"].is_object());
    }

    #[test]
    fn spectral_split_payload() {
        let out = spectral_split_json(36, 3, "lambda=1.2", "codegree", 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["matched"], true);
        let n = v["spec_M"].as_array().unwrap().len();
        let q = v["spec_quotient"].as_array().unwrap().len();
        let loc = v["unit_eigs"].as_array().unwrap().len();
        assert_eq!(n, q + loc);
        let ks = v["esd_kolmogorov"].as_f64().unwrap();
        assert!(ks <= v["esd_bound"].as_f64().unwrap() + 1e-12);
    }

    #[test]
    fn demo_caps_and_errors() {
        assert!(sample_census_json(DEMO_CENSUS_N_CAP + 1, 3, "p=0", 1).is_err());
        assert!(spectral_split_json(10_000, 3, "p=0", "codegree", 1).is_err());
        assert!(collision_pmf_json(100, 3, "nope=1", "X1", 10, 1).is_err());
        assert!(collision_pmf_json(100, 3, "p=0.001", "X9", 10, 1).is_err());
        assert!(spectral_split_json(30, 3, "lambda=1", "randomwalk", 1).is_err());
    }
}
