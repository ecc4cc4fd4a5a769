//! Star-dependent matrices: M_{uv} = F(Γ(u), Γ(v)) off the diagonal and
//! M_{uu} = G(Γ(u)), their unit-contraction quotients, lifts, and the
//! localized eigenstructure carried by nontrivial units.

use std::str::FromStr;

use crate::collisions::UnitPartition;
use crate::error::{Error, Result};
use crate::hypergraph::{sorted_intersection_len, Hypergraph};
use crate::matrix::Matrix;

/// Dense matrix operations are capped at this dimension.
pub const MATRIX_DIM_CAP: u32 = 4096;

/// Global constants available to kernels (never vertex identities).
#[derive(Clone, Copy, Debug)]
pub struct KernelContext {
    pub n: u32,
    pub k: u32,
}

/// A star kernel: entries may depend only on the two stars and on (n, k).
pub trait StarKernel {
    fn name(&self) -> &str;
    fn is_symmetric(&self) -> bool;
    fn offdiag(
        &self,
        star_u: &[u32],
        star_v: &[u32],
        ctx: &KernelContext,
    ) -> std::result::Result<f64, String>;
    fn diag(&self, star_u: &[u32], ctx: &KernelContext) -> std::result::Result<f64, String>;
}

/// Built-in kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// F = |Γ(u) ∩ Γ(v)|, G = |Γ(u)|.
    Codegree,
    /// F = |Γ(u) ∩ Γ(v)| / (k-1), G = 0.
    Banerjee,
    /// F = -|Γ(u) ∩ Γ(v)| / (k-1), G = |Γ(u)|.
    Laplacian,
    /// F = |Γ(u) ∩ Γ(v)| / ((k-1) |Γ(u)|) with an all-zero row for
    /// isolated vertices; G = 0. Not symmetric.
    RandomWalk,
}

impl Kernel {
    pub const ALL: [Kernel; 4] =
        [Kernel::Codegree, Kernel::Banerjee, Kernel::Laplacian, Kernel::RandomWalk];

    /// The symmetric built-ins, eligible for spectral-split verification.
    pub const SYMMETRIC: [Kernel; 3] = [Kernel::Codegree, Kernel::Banerjee, Kernel::Laplacian];
}

impl StarKernel for Kernel {
    fn name(&self) -> &str {
        match self {
            Kernel::Codegree => "codegree",
            Kernel::Banerjee => "banerjee",
            Kernel::Laplacian => "laplacian",
            Kernel::RandomWalk => "randomwalk",
        }
    }

    fn is_symmetric(&self) -> bool {
        !matches!(self, Kernel::RandomWalk)
    }

    fn offdiag(
        &self,
        star_u: &[u32],
        star_v: &[u32],
        ctx: &KernelContext,
    ) -> std::result::Result<f64, String> {
        let codeg = sorted_intersection_len(star_u, star_v) as f64;
        let km1 = (ctx.k - 1) as f64;
        Ok(match self {
            Kernel::Codegree => codeg,
            Kernel::Banerjee => codeg / km1,
            Kernel::Laplacian => -codeg / km1,
            Kernel::RandomWalk => {
                if star_u.is_empty() {
                    0.0
                } else {
                    codeg / (km1 * star_u.len() as f64)
                }
            }
        })
    }

    fn diag(&self, star_u: &[u32], _ctx: &KernelContext) -> std::result::Result<f64, String> {
        Ok(match self {
            Kernel::Codegree | Kernel::Laplacian => star_u.len() as f64,
            Kernel::Banerjee | Kernel::RandomWalk => 0.0,
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "codegree" => Ok(Kernel::Codegree),
            "banerjee" => Ok(Kernel::Banerjee),
            "laplacian" => Ok(Kernel::Laplacian),
            "randomwalk" => Ok(Kernel::RandomWalk),
            _ => Err(Error::InvalidParameter {
                reason: format!(
                    "unknown kernel `{s}` (expected codegree, banerjee, laplacian, randomwalk)"
                ),
            }),
        }
    }
}

/// Dense vertex-indexed star-dependent matrix.
#[derive(Clone, Debug)]
pub struct StarMatrix {
    pub kernel_name: String,
    pub symmetric: bool,
    matrix: Matrix,
}

impl StarMatrix {
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn entry(&self, u: usize, v: usize) -> f64 {
        self.matrix.get(u, v)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

/// Evaluate the kernel on every vertex pair. Symmetric kernels fill the
/// upper triangle and mirror it, so symmetry holds to bit equality.
pub fn build_matrix(h: &Hypergraph, kernel: &dyn StarKernel) -> Result<StarMatrix> {
    let n = h.n();
    if n > MATRIX_DIM_CAP {
        return Err(Error::Capacity {
            reason: format!("matrix operations are capped at n <= {MATRIX_DIM_CAP}, got {n}"),
        });
    }
    let table = h.star_table();
    let ctx = KernelContext { n, k: h.k() };
    let nu = n as usize;
    let mut m = Matrix::zeros(nu, nu);
    let wrap = |vertex: u32| move |reason: String| Error::Kernel { vertex, reason };
    for u in 0..nu {
        let su = table.star_of(u as u32);
        let d = kernel.diag(su, &ctx).map_err(wrap(u as u32))?;
        m.set(u, u, d);
        if kernel.is_symmetric() {
            for v in (u + 1)..nu {
                let f = kernel
                    .offdiag(su, table.star_of(v as u32), &ctx)
                    .map_err(wrap(u as u32))?;
                m.set(u, v, f);
                m.set(v, u, f);
            }
        } else {
            for v in 0..nu {
                if v == u {
                    continue;
                }
                let f = kernel
                    .offdiag(su, table.star_of(v as u32), &ctx)
                    .map_err(wrap(u as u32))?;
                m.set(u, v, f);
            }
        }
    }
    Ok(StarMatrix {
        kernel_name: kernel.name().to_string(),
        symmetric: kernel.is_symmetric(),
        matrix: m,
    })
}

fn check_partition_covers(p: &UnitPartition, n: usize) -> Result<Vec<Vec<u32>>> {
    let parts = p.parts();
    let mut seen = vec![false; n];
    for part in &parts {
        for &v in part {
            if v as usize >= n {
                return Err(Error::BadPartition {
                    reason: format!("vertex {v} outside [0, {n})"),
                });
            }
            if seen[v as usize] {
                return Err(Error::BadPartition {
                    reason: format!("vertex {v} covered twice"),
                });
            }
            seen[v as usize] = true;
        }
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(Error::BadPartition { reason: format!("vertex {v} not covered") });
    }
    Ok(parts)
}

/// Row sum of `row` over `part`, adding the diagonal entry last so that
/// same-part rows (which are permutations of each other) sum identically.
fn part_row_sum(m: &Matrix, u: usize, part: &[u32]) -> f64 {
    let row = m.row(u);
    let mut acc = 0.0;
    let mut diag = None;
    for &w in part {
        if w as usize == u {
            diag = Some(row[u]);
        } else {
            acc += row[w as usize];
        }
    }
    if let Some(d) = diag {
        acc += d;
    }
    acc
}

/// Check |Σ_{w in P_j} M_{uw} - Σ_{w in P_j} M_{vw}| <= tol for all parts
/// and all same-part pairs. Returns (within_tol, max_deviation).
pub fn verify_equitable(m: &StarMatrix, p: &UnitPartition, tol: f64) -> Result<(bool, f64)> {
    let n = m.n();
    let parts = check_partition_covers(p, n)?;
    let mut max_dev = 0.0f64;
    for part_i in &parts {
        if part_i.len() < 2 {
            continue;
        }
        for part_j in &parts {
            let first = part_row_sum(&m.matrix, part_i[0] as usize, part_j);
            for &u in &part_i[1..] {
                let s = part_row_sum(&m.matrix, u as usize, part_j);
                max_dev = max_dev.max((s - first).abs());
            }
        }
    }
    Ok((max_dev <= tol, max_dev))
}

/// Quotient matrix over the unit partition (all parts: units, singletons,
/// isolated vertices), parts ordered by smallest member.
#[derive(Clone, Debug)]
pub struct UnitContraction {
    pub parts: Vec<Vec<u32>>,
    pub beta: Matrix,
}

/// Contract M over the unit partition. The partition must be exactly
/// equitable (deviation 0), which star-dependence guarantees.
pub fn quotient(m: &StarMatrix, p: &UnitPartition) -> Result<UnitContraction> {
    let (ok, max_dev) = verify_equitable(m, p, 0.0)?;
    if !ok {
        return Err(Error::NotEquitable { max_deviation: max_dev });
    }
    let parts = p.parts();
    let q = parts.len();
    let mut beta = Matrix::zeros(q, q);
    for (i, part_i) in parts.iter().enumerate() {
        let rep = part_i[0] as usize;
        for (j, part_j) in parts.iter().enumerate() {
            beta.set(i, j, part_row_sum(&m.matrix, rep, part_j));
        }
    }
    Ok(UnitContraction { parts, beta })
}

impl UnitContraction {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    /// D^{1/2} β D^{-1/2} with D = diag(part sizes); symmetric whenever
    /// the vertex-level kernel is, enforced bitwise by averaging.
    pub fn symmetrized(&self) -> Matrix {
        let q = self.parts.len();
        let sqrt_sizes: Vec<f64> = self.parts.iter().map(|p| (p.len() as f64).sqrt()).collect();
        let mut s = Matrix::zeros(q, q);
        for i in 0..q {
            s.set(i, i, self.beta.get(i, i));
            for j in (i + 1)..q {
                let a = self.beta.get(i, j) * sqrt_sizes[i] / sqrt_sizes[j];
                let b = self.beta.get(j, i) * sqrt_sizes[j] / sqrt_sizes[i];
                let v = 0.5 * (a + b);
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        s
    }

    /// CSV export preceded by a comment line listing the parts.
    pub fn to_csv(&self) -> String {
        let mut head = String::from("# parts:");
        for (i, part) in self.parts.iter().enumerate() {
            if i > 0 {
                head.push_str(" |");
            }
            for &v in part {
                head.push(' ');
                head.push_str(&v.to_string());
            }
        }
        head.push('\n');
        head + &self.beta.to_csv()
    }
}

/// Extend a per-part vector to a vertex vector constant on each part.
pub fn lift(p: &UnitPartition, f: &[f64]) -> Result<Vec<f64>> {
    let parts = p.parts();
    if f.len() != parts.len() {
        return Err(Error::Dimension { expected: parts.len(), got: f.len() });
    }
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = vec![0.0; n];
    for (value, part) in f.iter().zip(&parts) {
        for &v in part {
            out[v as usize] = *value;
        }
    }
    Ok(out)
}

/// For each nontrivial unit {w_0 < w_1 < ...}, the difference indicators
/// 1_{w_0} - 1_{w_i}, i = 1..|W|-1. They span H_loc; each sums to zero
/// over its unit, hence is orthogonal to every unit-constant vector.
pub fn local_basis(p: &UnitPartition) -> Vec<Vec<f64>> {
    let n: usize =
        p.units.iter().map(|u| u.size()).sum::<usize>() + p.isolated.len();
    let mut basis = Vec::new();
    for unit in p.nontrivial() {
        let w0 = unit.vertices[0] as usize;
        for &wi in &unit.vertices[1..] {
            let mut v = vec![0.0; n];
            v[w0] = 1.0;
            v[wi as usize] = -1.0;
            basis.push(v);
        }
    }
    basis
}

/// Unit-eigenvalues: for each nontrivial unit W, the value
/// M_{uu} - M_{uv} (identical over all pairs in W, which is asserted),
/// with multiplicity |W| - 1. Order follows the partition's units.
pub fn unit_eigenvalues(m: &StarMatrix, p: &UnitPartition) -> Vec<f64> {
    let mut out = Vec::new();
    for unit in p.nontrivial() {
        let vs = &unit.vertices;
        let u0 = vs[0] as usize;
        let alpha = m.entry(u0, u0) - m.entry(u0, vs[1] as usize);
        for &a in vs {
            for &b in vs {
                if a != b {
                    let val = m.entry(a as usize, a as usize) - m.entry(a as usize, b as usize);
                    assert_eq!(
                        val, alpha,
                        "unit eigenvalue must be constant over the unit (star-dependence)"
                    );
                }
            }
        }
        for _ in 1..vs.len() {
            out.push(alpha);
        }
    }
    out
}
