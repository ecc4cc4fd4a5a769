//! Symmetric eigensolving (cyclic Jacobi rotations), verification of the
//! spectral split Spec(M) = Spec(M̂) ⊎ {unit eigenvalues}, empirical
//! spectral distribution comparison, and linear dynamics checks.

use serde::Serialize;

use crate::collisions::{build_partition, UnitPartition};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::matrix::Matrix;
use crate::star_matrix::{
    build_matrix, quotient, unit_eigenvalues, verify_equitable, StarKernel, StarMatrix,
    MATRIX_DIM_CAP,
};

/// Input symmetry tolerance: |A_ij - A_ji| <= 1e-10 (1 + max |A|).
const SYMMETRY_TOL: f64 = 1e-10;
/// Convergence: off-diagonal Frobenius norm <= 1e-12 ||A||_F.
const OFF_DIAG_REL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Relative part of the eigenvalue matching tolerance.
const MATCH_REL: f64 = 1e-10;

fn off_diag_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a.get(i, j);
            acc += 2.0 * v * v;
        }
    }
    acc.sqrt()
}

/// Full real spectrum of a symmetric matrix, ascending.
///
/// Cyclic Jacobi with unconditional rotations; converges when the
/// off-diagonal Frobenius norm drops below 1e-12 ||A||_F, capped at 100
/// sweeps. Adequate and robust at the dimensions used here.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if a.rows() != a.cols() {
        return Err(Error::Dimension { expected: a.rows(), got: a.cols() });
    }
    let n = a.rows();
    if n as u32 > MATRIX_DIM_CAP {
        return Err(Error::Capacity {
            reason: format!("eigensolver capped at n <= {MATRIX_DIM_CAP}, got {n}"),
        });
    }
    let asym = a.max_asymmetry();
    if asym > SYMMETRY_TOL * (1.0 + a.max_abs()) {
        return Err(Error::Asymmetric { max_asymmetry: asym });
    }
    let norm = a.frobenius_norm();
    let mut w = a.clone();
    if norm > 0.0 {
        let target = OFF_DIAG_REL * norm;
        let mut converged = off_diag_norm(&w) <= target;
        let mut sweeps = 0;
        while !converged {
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence { sweeps });
            }
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    let apq = w.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let app = w.get(p, p);
                    let aqq = w.get(q, q);
                    let theta = 0.5 * (aqq - app) / apq;
                    let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    w.set(p, p, app - t * apq);
                    w.set(q, q, aqq + t * apq);
                    w.set(p, q, 0.0);
                    w.set(q, p, 0.0);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = w.get(i, p);
                        let aiq = w.get(i, q);
                        let new_p = c * aip - s * aiq;
                        let new_q = s * aip + c * aiq;
                        w.set(i, p, new_p);
                        w.set(p, i, new_p);
                        w.set(i, q, new_q);
                        w.set(q, i, new_q);
                    }
                }
            }
            sweeps += 1;
            converged = off_diag_norm(&w) <= target;
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| w.get(i, i)).collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(eigs)
}

/// Result of verifying Spec(M) = Spec(M̂) ⊎ {unit eigenvalues}.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralSplitReport {
    pub kernel: String,
    pub n: u32,
    /// Eigenvalues of M, ascending.
    #[serde(rename = "spec_M")]
    pub spec_m: Vec<f64>,
    /// Eigenvalues of the unit contraction (via the symmetrized
    /// similarity D^{1/2} β D^{-1/2}), ascending.
    pub spec_quotient: Vec<f64>,
    /// Unit-eigenvalue multiset, ascending.
    pub unit_eigs: Vec<f64>,
    pub matched: bool,
    pub max_match_error: f64,
    /// Equitability deviation of the unit partition (0 for exact).
    pub equitable_deviation: f64,
    pub dim_loc: u64,
}

/// Greedy sorted multiset matching: both sides ascending, paired
/// elementwise, each pair within `abs_tol + MATCH_REL * max(|a|,|b|)`.
fn match_sorted(reconstructed: &[f64], reference: &[f64], abs_tol: f64) -> (bool, f64) {
    if reconstructed.len() != reference.len() {
        return (false, f64::INFINITY);
    }
    let mut worst = 0.0f64;
    let mut ok = true;
    for (a, b) in reconstructed.iter().zip(reference) {
        let err = (a - b).abs();
        worst = worst.max(err);
        if err > abs_tol + MATCH_REL * a.abs().max(b.abs()) {
            ok = false;
        }
    }
    (ok, worst)
}

/// Verify the exact spectral decomposition on one hypergraph.
pub fn spectral_split_check(
    h: &Hypergraph,
    kernel: &dyn StarKernel,
    tol: f64,
) -> Result<SpectralSplitReport> {
    if !kernel.is_symmetric() {
        return Err(Error::InvalidParameter {
            reason: format!("spectral check requires a symmetric kernel, `{}` is not", kernel.name()),
        });
    }
    let m = build_matrix(h, kernel)?;
    let partition = build_partition(h);
    spectral_split_check_built(&m, &partition, tol)
}

/// Same as [`spectral_split_check`] with the matrix and partition
/// already built.
pub fn spectral_split_check_built(
    m: &StarMatrix,
    partition: &UnitPartition,
    tol: f64,
) -> Result<SpectralSplitReport> {
    let (_, equitable_deviation) = verify_equitable(m, partition, 0.0)?;
    let contraction = quotient(m, partition)?;
    let spec_m = symmetric_eigenvalues(m.matrix())?;
    let spec_quotient = symmetric_eigenvalues(&contraction.symmetrized())?;
    let mut unit_eigs = unit_eigenvalues(m, partition);
    unit_eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reconstructed: Vec<f64> =
        spec_quotient.iter().chain(unit_eigs.iter()).copied().collect();
    reconstructed.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (matched, max_match_error) = match_sorted(&reconstructed, &spec_m, tol);
    Ok(SpectralSplitReport {
        kernel: m.kernel_name.clone(),
        n: spec_m.len() as u32,
        spec_m,
        spec_quotient,
        unit_eigs,
        matched,
        max_match_error,
        equitable_deviation,
        dim_loc: partition.dim_loc(),
    })
}

/// Kolmogorov (sup-CDF) distance between two empirical spectral
/// distributions given as sorted eigenvalue lists.
pub fn esd_kolmogorov(a_eigs: &[f64], b_eigs: &[f64]) -> Result<f64> {
    if a_eigs.is_empty() || b_eigs.is_empty() {
        return Err(Error::Empty { what: "eigenvalue list" });
    }
    debug_assert!(a_eigs.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(b_eigs.windows(2).all(|w| w[0] <= w[1]));
    let (na, nb) = (a_eigs.len() as f64, b_eigs.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut sup: f64 = 0.0;
    while i < a_eigs.len() || j < b_eigs.len() {
        let x = match (a_eigs.get(i), b_eigs.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => break,
        };
        while i < a_eigs.len() && a_eigs[i] <= x {
            i += 1;
        }
        while j < b_eigs.len() && b_eigs[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Snap two eigenvalue lists to shared representatives: values closer than
/// `tol` across the merged lists collapse to the cluster minimum. Used to
/// compare ESDs whose entries agree only up to solver error.
pub fn snap_eigenvalues(a: &[f64], b: &[f64], tol: f64) -> (Vec<f64>, Vec<f64>) {
    let mut merged: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut reps: Vec<(f64, f64)> = Vec::new(); // (upper bound, representative)
    let mut idx = 0;
    while idx < merged.len() {
        let rep = merged[idx];
        let mut hi = rep;
        while idx < merged.len() && merged[idx] - hi <= tol {
            hi = merged[idx];
            idx += 1;
        }
        reps.push((hi, rep));
    }
    let snap = |xs: &[f64]| -> Vec<f64> {
        xs.iter()
            .map(|&x| {
                let pos = reps.partition_point(|&(hi, _)| hi < x);
                reps[pos.min(reps.len() - 1)].1
            })
            .collect()
    };
    (snap(a), snap(b))
}

/// Trajectory x(0..=T) of x(t+1) = M x(t).
pub fn propagate(m: &StarMatrix, x0: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    if x0.len() != m.n() {
        return Err(Error::Dimension { expected: m.n(), got: x0.len() });
    }
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(x0.to_vec());
    for _ in 0..steps {
        let next = m.matrix().mul_vec(traj.last().unwrap());
        traj.push(next);
    }
    Ok(traj)
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn unit_deviation(p: &UnitPartition, x: &[f64]) -> Option<(u32, f64)> {
    let mut worst: Option<(u32, f64)> = None;
    for unit in p.nontrivial() {
        let first = x[unit.vertices[0] as usize];
        for &v in &unit.vertices[1..] {
            let dev = (x[v as usize] - first).abs();
            if worst.map_or(true, |(_, d)| dev > d) {
                worst = Some((unit.vertices[0], dev));
            }
        }
    }
    worst
}

/// True iff the trajectory from a unit-constant x0 stays constant on each
/// unit for all t <= T. Tolerance is relative per step:
/// deviation <= tol (1 + max |x(t)|), absorbing growth when the spectral
/// radius exceeds one.
pub fn unit_sync_preserved(
    m: &StarMatrix,
    p: &UnitPartition,
    x0: &[f64],
    steps: usize,
    tol: f64,
) -> Result<bool> {
    if x0.len() != m.n() {
        return Err(Error::Dimension { expected: m.n(), got: x0.len() });
    }
    if let Some((unit_min_vertex, deviation)) = unit_deviation(p, x0) {
        if deviation > tol * (1.0 + max_abs(x0)) {
            return Err(Error::NotUnitConstant { unit_min_vertex, deviation });
        }
    }
    let mut x = x0.to_vec();
    for _ in 0..steps {
        x = m.matrix().mul_vec(&x);
        if let Some((_, deviation)) = unit_deviation(p, &x) {
            if deviation > tol * (1.0 + max_abs(&x)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::star_matrix::Kernel;

    fn h(n: u32, k: u32, edges: &[Vec<u32>]) -> Hypergraph {
        Hypergraph::new(n, k, edges).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len(), "{a:?} vs {b:?}");
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_matrix_spectrum() {
        let eigs = symmetric_eigenvalues(&Matrix::zeros(4, 4)).unwrap();
        assert_eq!(eigs, vec![0.0; 4]);
    }

    #[test]
    fn known_small_spectra() {
        let g = h(4, 3, &[vec![0, 1, 2]]);
        let m = build_matrix(&g, &Kernel::Codegree).unwrap();
        let eigs = symmetric_eigenvalues(m.matrix()).unwrap();
        assert_close(&eigs, &[0.0, 0.0, 0.0, 3.0], 1e-10);

        let g2 = h(5, 3, &[vec![0, 1, 2], vec![0, 1, 3]]);
        let m2 = build_matrix(&g2, &Kernel::Codegree).unwrap();
        let eigs2 = symmetric_eigenvalues(m2.matrix()).unwrap();
        assert_close(&eigs2, &[0.0, 0.0, 0.0, 1.0, 5.0], 1e-10);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!(matches!(
            symmetric_eigenvalues(&a),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn trace_and_frobenius_identities() {
        let mut rng = Rng::from_seed(404);
        for trial in 0..20 {
            let n = 3 + (trial % 8) as usize;
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.range_f64(-2.0, 2.0);
                    a.set(i, j, v);
                    a.set(j, i, v);
                }
            }
            let eigs = symmetric_eigenvalues(&a).unwrap();
            let scale = 1.0 + a.frobenius_norm();
            let eig_sum: f64 = eigs.iter().sum();
            assert!((eig_sum - a.trace()).abs() <= 1e-8 * scale);
            let eig_sq: f64 = eigs.iter().map(|v| v * v).sum();
            let frob_sq = a.frobenius_norm().powi(2);
            assert!((eig_sq - frob_sq).abs() <= 1e-8 * (1.0 + frob_sq));
        }
    }

    #[test]
    fn split_check_single_edge() {
        let g = h(4, 3, &[vec![0, 1, 2]]);
        let rep = spectral_split_check(&g, &Kernel::Codegree, 1e-8).unwrap();
        assert!(rep.matched);
        assert_eq!(rep.equitable_deviation, 0.0);
        assert_close(&rep.spec_m, &[0.0, 0.0, 0.0, 3.0], 1e-10);
        assert_close(&rep.spec_quotient, &[0.0, 3.0], 1e-10);
        assert_eq!(rep.unit_eigs, vec![0.0, 0.0]);
        assert_eq!(rep.spec_m.len(), rep.spec_quotient.len() + rep.unit_eigs.len());
    }

    #[test]
    fn split_check_two_edges() {
        let g = h(5, 3, &[vec![0, 1, 2], vec![0, 1, 3]]);
        let rep = spectral_split_check(&g, &Kernel::Codegree, 1e-8).unwrap();
        assert!(rep.matched);
        assert_close(&rep.spec_m, &[0.0, 0.0, 0.0, 1.0, 5.0], 1e-9);
        assert_close(&rep.spec_quotient, &[0.0, 0.0, 1.0, 5.0], 1e-9);
        assert_eq!(rep.unit_eigs, vec![0.0]);
    }

    #[test]
    fn split_check_no_units() {
        // Distinct stars everywhere: quotient spectrum is the full spectrum.
        let g = h(4, 3, &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3]]);
        let partition = build_partition(&g);
        assert_eq!(partition.dim_loc(), 0);
        let rep = spectral_split_check(&g, &Kernel::Banerjee, 1e-8).unwrap();
        assert!(rep.matched);
        assert!(rep.unit_eigs.is_empty());
        assert_eq!(rep.spec_m.len(), rep.spec_quotient.len());
    }

    #[test]
    fn split_check_rejects_randomwalk() {
        let g = h(4, 3, &[vec![0, 1, 2]]);
        assert!(spectral_split_check(&g, &Kernel::RandomWalk, 1e-8).is_err());
    }

    #[test]
    fn esd_examples() {
        assert_eq!(esd_kolmogorov(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(esd_kolmogorov(&[0.0], &[1.0]).unwrap(), 1.0);
        let d = esd_kolmogorov(&[0.0, 0.0, 0.0, 3.0], &[0.0, 3.0]).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
        assert!(esd_kolmogorov(&[], &[1.0]).is_err());
    }

    #[test]
    fn snapping_aligns_fuzzy_values() {
        let a = [0.0, 1.0 + 1e-12, 5.0];
        let b = [0.0, 1.0, 5.0 - 1e-13];
        let (sa, sb) = snap_eigenvalues(&a, &b, 1e-9);
        assert_eq!(sa, sb);
        assert_eq!(esd_kolmogorov(&sa, &sb).unwrap(), 0.0);
    }

    #[test]
    fn propagation_basics() {
        let g = h(4, 3, &[]);
        let zero = build_matrix(&g, &Kernel::Codegree).unwrap();
        let traj = propagate(&zero, &[1.0, 2.0, 3.0, 4.0], 3).unwrap();
        assert_eq!(traj[0], vec![1.0, 2.0, 3.0, 4.0]);
        for x in &traj[1..] {
            assert_eq!(x, &vec![0.0; 4]);
        }
        assert!(propagate(&zero, &[1.0], 2).is_err());
    }

    #[test]
    fn eigenvector_dynamics() {
        let g = h(4, 3, &[vec![0, 1, 2]]);
        let m = build_matrix(&g, &Kernel::Codegree).unwrap();
        // Lifted eigenvector at alpha = 3.
        let x0 = vec![1.0, 1.0, 1.0, 0.0];
        let traj = propagate(&m, &x0, 10).unwrap();
        for (t, x) in traj.iter().enumerate() {
            let scale = 3.0f64.powi(t as i32);
            for (a, b) in x.iter().zip(&x0) {
                assert!((a - scale * b).abs() <= 1e-9 * scale.max(1.0));
            }
        }
    }

    #[test]
    fn local_dynamics_follow_unit_eigenvalue() {
        let g = h(4, 3, &[vec![0, 1, 2]]);
        let p = build_partition(&g);
        let m = build_matrix(&g, &Kernel::Laplacian).unwrap();
        // 1_0 - 1_1 inside the unit {0,1,2}; alpha = 1.5.
        let mut x0 = vec![0.0; 4];
        x0[0] = 1.0;
        x0[1] = -1.0;
        let traj = propagate(&m, &x0, 8).unwrap();
        for (t, x) in traj.iter().enumerate() {
            let scale = 1.5f64.powi(t as i32);
            for (a, b) in x.iter().zip(&x0) {
                assert!((a - scale * b).abs() <= 1e-9 * scale.max(1.0));
            }
        }
        // And the sync precondition rejects it.
        assert!(matches!(
            unit_sync_preserved(&m, &p, &x0, 5, 1e-8),
            Err(Error::NotUnitConstant { .. })
        ));
    }

    #[test]
    fn sync_preserved_for_unit_constant_states() {
        let g = h(6, 3, &[vec![0, 1, 2], vec![0, 1, 3], vec![3, 4, 5]]);
        let p = build_partition(&g);
        for kernel in Kernel::ALL {
            let m = build_matrix(&g, &kernel).unwrap();
            let ones = vec![1.0; 6];
            assert!(unit_sync_preserved(&m, &p, &ones, 20, 1e-8).unwrap());
            // Random unit-constant start.
            let mut rng = Rng::from_seed(7);
            let parts = p.parts();
            let vals: Vec<f64> = (0..parts.len()).map(|_| rng.range_f64(-1.0, 1.0)).collect();
            let x0 = crate::star_matrix::lift(&p, &vals).unwrap();
            assert!(unit_sync_preserved(&m, &p, &x0, 50, 1e-8).unwrap());
        }
    }
}
