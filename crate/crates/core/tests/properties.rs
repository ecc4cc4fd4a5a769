//! Structural invariants checked over randomized instances: hypergraph
//! canonicalization, star/census identities, unit structure, and the
//! star-dependent matrix machinery.

use proptest::prelude::*;

use hyperstar_core::collisions::{build_partition, census};
use hyperstar_core::combo::{binom, rank_kset, unrank_kset};
use hyperstar_core::hypergraph::Hypergraph;
use hyperstar_core::rng::{mix, Rng};
use hyperstar_core::sampler::{edge_probability, RegimeSpec, Sampler};
use hyperstar_core::star_matrix::{
    build_matrix, lift, local_basis, quotient, unit_eigenvalues, verify_equitable, Kernel,
};

/// Deterministic sampled hypergraph from compact parameters. The edge
/// probability is clamped to 1 so tiny (n, k) corners stay feasible.
fn sampled(n: u32, k: u32, lambda: f64, seed: u64) -> Hypergraph {
    let denom = binom(n as u64 - 1, k as u64 - 1).unwrap().max(1) as f64;
    let p = edge_probability(&RegimeSpec::FixedP((lambda / denom).min(1.0)), n, k).unwrap();
    Sampler::new(n, k).unwrap().sample_seeded(seed, p).unwrap()
}

/// All-pairs brute-force partition into star classes (non-isolated).
fn brute_units(h: &Hypergraph) -> Vec<Vec<u32>> {
    let stars: Vec<Vec<u32>> = (0..h.n()).map(|v| h.star(v).unwrap().edge_ids).collect();
    let mut groups: Vec<Vec<u32>> = Vec::new();
    for v in 0..h.n() {
        if stars[v as usize].is_empty() {
            continue;
        }
        match groups
            .iter_mut()
            .find(|g| stars[g[0] as usize] == stars[v as usize])
        {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hg_round_trip(n in 2u32..40, k in 2u32..5, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let h = sampled(n, k, lambda, seed);
        let text = h.serialize_hg();
        prop_assert_eq!(Hypergraph::parse_hg(&text).unwrap(), h);
    }

    #[test]
    fn star_membership_and_handshake(n in 2u32..40, k in 2u32..5, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let h = sampled(n, k, lambda, seed);
        let mut degree_sum = 0u64;
        for v in 0..n {
            let star = h.star(v).unwrap();
            degree_sum += star.edge_ids.len() as u64;
            // v in e  <=>  e in star(v)
            for (id, e) in h.edges().enumerate() {
                let member = e.contains(&v);
                prop_assert_eq!(member, star.edge_ids.binary_search(&(id as u32)).is_ok());
            }
        }
        prop_assert_eq!(degree_sum, h.k() as u64 * h.m() as u64);
    }

    #[test]
    fn codegree_equals_star_intersection(n in 2u32..30, k in 2u32..5, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let h = sampled(n, k, lambda, seed);
        for u in 0..n {
            for v in (u + 1)..n {
                let su = h.star(u).unwrap().edge_ids;
                let sv = h.star(v).unwrap().edge_ids;
                let oracle = su.iter().filter(|id| sv.contains(id)).count() as u64;
                prop_assert_eq!(h.codegree(u, v).unwrap(), oracle);
            }
        }
    }

    #[test]
    fn rank_unrank_bijection(n in 2u32..200, k in 2u32..6, raw in any::<u128>()) {
        prop_assume!(k <= n);
        let total = binom(n as u64, k as u64).unwrap();
        prop_assume!(total > 0);
        let idx = raw % total;
        let set = unrank_kset(idx, n, k).unwrap();
        prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(rank_kset(&set, n), idx);
    }

    #[test]
    fn partition_matches_all_pairs_comparison(n in 2u32..64, lambda in 0.2f64..2.5, seed in any::<u64>()) {
        let h = sampled(n, 3, lambda, seed);
        let p = build_partition(&h);
        let got: Vec<Vec<u32>> = p.units.iter().map(|u| u.vertices.clone()).collect();
        prop_assert_eq!(got, brute_units(&h));
    }

    #[test]
    fn census_identities(n in 2u32..80, k in 2u32..5, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let h = sampled(n, k, lambda, seed);
        let c = census(&h);
        let p = build_partition(&h);
        // X0 = C(I_n, 2)
        prop_assert_eq!(c.x0, c.isolated * c.isolated.saturating_sub(1) / 2);
        prop_assert_eq!(c.isolated as usize, p.isolated.len());
        // Y = sum U_m; dim_loc = sum (m-1) U_m
        prop_assert_eq!(c.y, c.u.values().sum::<u64>());
        prop_assert_eq!(
            c.dim_loc,
            c.u.iter().map(|(&m, &cnt)| (m as u64 - 1) * cnt).sum::<u64>()
        );
        // X_r from the unit partition: each unit of size s contributes C(s,2).
        let mut xr_from_units = std::collections::BTreeMap::new();
        for unit in p.nontrivial() {
            let s = unit.size() as u64;
            *xr_from_units.entry(unit.support_size() as u32).or_insert(0u64) += s * (s - 1) / 2;
        }
        prop_assert_eq!(&c.x, &xr_from_units);
        // Unit structure: W subset of every support edge, |W| <= k.
        for unit in p.nontrivial() {
            prop_assert!(unit.size() <= k as usize);
            for &e in &unit.support {
                let edge = h.edge(e);
                for &v in &unit.vertices {
                    prop_assert!(edge.contains(&v));
                }
            }
        }
        // dim_loc + part count = n.
        prop_assert_eq!(c.dim_loc + p.part_count() as u64, n as u64);
    }

    // In graphs (k = 2), star equality is rigid: every nontrivial unit is
    // an isolated-edge pair, so X_r = 0 for all r >= 2.
    #[test]
    fn graph_star_rigidity(n in 2u32..60, lambda in 0.0f64..4.0, seed in any::<u64>()) {
        let h = sampled(n, 2, lambda, seed);
        let c = census(&h);
        for (&r, &count) in &c.x {
            prop_assert!(r == 1 || count == 0);
        }
        for unit in build_partition(&h).nontrivial() {
            prop_assert_eq!(unit.size(), 2);
            prop_assert_eq!(unit.support.len(), 1);
            let edge = h.edge(unit.support[0]);
            prop_assert_eq!(edge, unit.vertices.as_slice());
        }
    }

    #[test]
    fn sampling_is_deterministic(n in 2u32..50, k in 2u32..5, lambda in 0.0f64..3.0, seed in any::<u64>()) {
        prop_assume!(k <= n);
        prop_assert_eq!(sampled(n, k, lambda, seed), sampled(n, k, lambda, seed));
    }
}

#[test]
fn equitability_is_exact_for_all_kernels() {
    for trial in 0..60u64 {
        let n = 10 + (trial % 40) as u32;
        let lambda = 0.3 + (trial % 7) as f64 * 0.3;
        let h = sampled(n, 3, lambda, mix(&[31, trial]));
        let p = build_partition(&h);
        for kernel in Kernel::ALL {
            let m = build_matrix(&h, &kernel).unwrap();
            let (ok, dev) = verify_equitable(&m, &p, 0.0).unwrap();
            assert!(ok, "kernel {kernel:?} deviation {dev:e} on trial {trial}");
            assert_eq!(dev, 0.0);
        }
    }
}

#[test]
fn unit_difference_vectors_are_exact_eigenvectors() {
    for trial in 0..40u64 {
        let n = 12 + (trial % 30) as u32;
        let h = sampled(n, 3, 1.0 + (trial % 5) as f64 * 0.25, mix(&[47, trial]));
        let p = build_partition(&h);
        for kernel in Kernel::ALL {
            let m = build_matrix(&h, &kernel).unwrap();
            let alphas = unit_eigenvalues(&m, &p);
            let mut idx = 0;
            for unit in p.nontrivial() {
                let w0 = unit.vertices[0] as usize;
                for &wi in &unit.vertices[1..] {
                    let mut x = vec![0.0; n as usize];
                    x[w0] = 1.0;
                    x[wi as usize] = -1.0;
                    let mx = m.matrix().mul_vec(&x);
                    for (a, b) in mx.iter().zip(&x) {
                        assert!((a - alphas[idx] * b).abs() <= 1e-12);
                    }
                    idx += 1;
                }
            }
        }
    }
}

// H_glob invariance: M x is constant on units whenever x is.
#[test]
fn unit_constant_states_stay_unit_constant() {
    for trial in 0..40u64 {
        let n = 10 + (trial % 30) as u32;
        let h = sampled(n, 3, 1.2, mix(&[53, trial]));
        let p = build_partition(&h);
        let parts = p.parts();
        let mut rng = Rng::from_seed(mix(&[54, trial]));
        let vals: Vec<f64> = (0..parts.len()).map(|_| rng.range_f64(-1.0, 1.0)).collect();
        let x = lift(&p, &vals).unwrap();
        for kernel in Kernel::ALL {
            let m = build_matrix(&h, &kernel).unwrap();
            let mx = m.matrix().mul_vec(&x);
            let scale = 1.0 + mx.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            for unit in p.nontrivial() {
                let first = mx[unit.vertices[0] as usize];
                for &v in &unit.vertices[1..] {
                    assert!((mx[v as usize] - first).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}

// Similarity identity behind the symmetrized quotient:
// s_i beta_ij = s_j beta_ji for symmetric kernels.
#[test]
fn quotient_detailed_balance_for_symmetric_kernels() {
    for trial in 0..40u64 {
        let n = 10 + (trial % 30) as u32;
        let h = sampled(n, 3, 1.0, mix(&[61, trial]));
        let p = build_partition(&h);
        for kernel in Kernel::SYMMETRIC {
            let m = build_matrix(&h, &kernel).unwrap();
            let q = quotient(&m, &p).unwrap();
            let sizes: Vec<f64> = q.parts.iter().map(|part| part.len() as f64).collect();
            let scale = 1.0 + q.beta.max_abs();
            for i in 0..q.part_count() {
                for j in 0..q.part_count() {
                    let lhs = sizes[i] * q.beta.get(i, j);
                    let rhs = sizes[j] * q.beta.get(j, i);
                    assert!((lhs - rhs).abs() <= 1e-12 * scale, "{kernel:?} ({i},{j})");
                }
            }
            let sym = q.symmetrized();
            assert_eq!(sym.max_asymmetry(), 0.0);
        }
    }
}

// Local basis vectors are orthogonal to every lifted (unit-constant)
// vector; their coordinates over each unit sum to zero.
#[test]
fn local_basis_orthogonal_to_lifts() {
    for trial in 0..30u64 {
        let n = 10 + (trial % 30) as u32;
        let h = sampled(n, 3, 1.3, mix(&[71, trial]));
        let p = build_partition(&h);
        let basis = local_basis(&p);
        assert_eq!(basis.len() as u64, p.dim_loc());
        let mut rng = Rng::from_seed(mix(&[72, trial]));
        let vals: Vec<f64> = (0..p.parts().len()).map(|_| rng.range_f64(-2.0, 2.0)).collect();
        let lifted = lift(&p, &vals).unwrap();
        for b in &basis {
            let dot: f64 = b.iter().zip(&lifted).map(|(x, y)| x * y).sum();
            assert_eq!(dot, 0.0);
        }
    }
}
