//! Immutable k-uniform hypergraphs, vertex stars, and the `.hg` text format.
//!
//! Edges are stored flat (stride k), strictly increasing within each edge,
//! and globally sorted in ascending colexicographic order. Edge identifiers
//! are positions in that canonical order, which is also the order produced
//! by the sampler's unranking, so sampled and loaded hypergraphs agree on
//! identifiers.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    n: u32,
    k: u32,
    /// Flat edge storage, stride `k`.
    edges: Vec<u32>,
}

/// The star Γ(v): all edge identifiers incident to a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexStar {
    pub vertex: u32,
    pub edge_ids: Vec<u32>,
}

impl VertexStar {
    pub fn degree(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_isolated(&self) -> bool {
        self.edge_ids.is_empty()
    }
}

/// Compare strictly-increasing same-length sets in colex order
/// (largest differing element decides).
fn colex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    a.iter().rev().cmp(b.iter().rev())
}

impl Hypergraph {
    /// Build a hypergraph from raw edges, canonicalizing order.
    pub fn new(n: u32, k: u32, raw_edges: &[Vec<u32>]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                reason: "vertex count must be at least 1".into(),
            });
        }
        if k < 2 {
            return Err(Error::InvalidParameter {
                reason: format!("uniformity must be at least 2, got {k}"),
            });
        }
        if k > n && !raw_edges.is_empty() {
            return Err(Error::InvalidParameter {
                reason: format!("k = {k} exceeds n = {n}, so no edge can exist"),
            });
        }
        let mut canon: Vec<Vec<u32>> = Vec::with_capacity(raw_edges.len());
        for raw in raw_edges {
            if raw.len() != k as usize {
                return Err(Error::InvalidEdge {
                    edge: raw.clone(),
                    reason: format!("expected {k} vertices, got {}", raw.len()),
                });
            }
            let mut e = raw.clone();
            e.sort_unstable();
            for w in e.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidEdge {
                        edge: raw.clone(),
                        reason: format!("repeated vertex {}", w[0]),
                    });
                }
            }
            if let Some(&v) = e.last() {
                if v >= n {
                    return Err(Error::InvalidEdge {
                        edge: raw.clone(),
                        reason: format!("vertex {v} out of range [0, {n})"),
                    });
                }
            }
            canon.push(e);
        }
        canon.sort_by(|a, b| colex_cmp(a, b));
        for w in canon.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge { edge: w[0].clone() });
            }
        }
        if canon.len() > u32::MAX as usize {
            return Err(Error::Capacity {
                reason: "edge count exceeds u32 identifiers".into(),
            });
        }
        let mut flat = Vec::with_capacity(canon.len() * k as usize);
        for e in &canon {
            flat.extend_from_slice(e);
        }
        Ok(Hypergraph { n, k, edges: flat })
    }

    /// Sampler fast path: edges already strictly increasing and in colex
    /// order. Debug builds re-check the invariant.
    pub(crate) fn from_canonical_flat(n: u32, k: u32, flat: Vec<u32>) -> Self {
        debug_assert_eq!(flat.len() % k as usize, 0);
        #[cfg(debug_assertions)]
        {
            let kk = k as usize;
            for e in flat.chunks_exact(kk) {
                debug_assert!(e.windows(2).all(|w| w[0] < w[1]));
                debug_assert!(e.iter().all(|&v| v < n));
            }
            for (a, b) in flat.chunks_exact(kk).zip(flat.chunks_exact(kk).skip(1)) {
                debug_assert_eq!(colex_cmp(a, b), Ordering::Less);
            }
        }
        Hypergraph { n, k, edges: flat }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of edges.
    pub fn m(&self) -> u32 {
        (self.edges.len() / self.k as usize) as u32
    }

    pub fn edge(&self, id: u32) -> &[u32] {
        let k = self.k as usize;
        &self.edges[id as usize * k..(id as usize + 1) * k]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[u32]> {
        self.edges.chunks_exact(self.k as usize)
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n });
        }
        Ok(())
    }

    /// Γ(v) as sorted edge identifiers.
    pub fn star(&self, v: u32) -> Result<VertexStar> {
        self.check_vertex(v)?;
        let mut ids = Vec::new();
        for (id, e) in self.edges().enumerate() {
            if e.binary_search(&v).is_ok() {
                ids.push(id as u32);
            }
        }
        Ok(VertexStar { vertex: v, edge_ids: ids })
    }

    pub fn degree(&self, v: u32) -> Result<u32> {
        Ok(self.star(v)?.edge_ids.len() as u32)
    }

    /// |Γ(u) ∩ Γ(v)| for distinct vertices, counted by a direct edge scan.
    pub fn codegree(&self, u: u32, v: u32) -> Result<u64> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::DiagonalCodegree { vertex: u });
        }
        let mut count = 0u64;
        for e in self.edges() {
            if e.binary_search(&u).is_ok() && e.binary_search(&v).is_ok() {
                count += 1;
            }
        }
        Ok(count)
    }

    /// All stars at once in CSR form; the per-vertex lists are ascending.
    pub fn star_table(&self) -> StarTable {
        let n = self.n as usize;
        let mut degrees = vec![0u32; n];
        for e in self.edges() {
            for &v in e {
                degrees[v as usize] += 1;
            }
        }
        let mut offsets = vec![0u32; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degrees[v];
        }
        let mut cursor: Vec<u32> = offsets[..n].to_vec();
        let mut ids = vec![0u32; self.edges.len()];
        for (id, e) in self.edges().enumerate() {
            for &v in e {
                ids[cursor[v as usize] as usize] = id as u32;
                cursor[v as usize] += 1;
            }
        }
        StarTable { offsets, edge_ids: ids }
    }

    /// Parse the `.hg` text format.
    pub fn parse_hg(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (header_no, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            reason: "missing header line".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: header_no,
                reason: format!("header must be `n k m`, got {fields:?}"),
            });
        }
        let parse_num = |s: &str, line: usize| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse {
                line,
                reason: format!("not a number: `{s}`"),
            })
        };
        let n = parse_num(fields[0], header_no)? as u32;
        let k = parse_num(fields[1], header_no)? as u32;
        let m = parse_num(fields[2], header_no)?;
        let mut raw: Vec<Vec<u32>> = Vec::with_capacity(m as usize);
        for _ in 0..m {
            let (line_no, line) = lines.next().ok_or(Error::Parse {
                line: header_no,
                reason: format!("expected {m} edge lines, found {}", raw.len()),
            })?;
            let mut edge = Vec::with_capacity(k as usize);
            for tok in line.split_whitespace() {
                edge.push(parse_num(tok, line_no)? as u32);
            }
            if edge.len() != k as usize {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("expected {k} vertices, got {}", edge.len()),
                });
            }
            raw.push(edge);
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("more than {m} edge lines"),
            });
        }
        Hypergraph::new(n, k, &raw)
    }

    /// Serialize to the `.hg` text format in canonical order.
    pub fn serialize_hg(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.k, self.m());
        for e in self.edges() {
            let mut first = true;
            for &v in e {
                if !first {
                    out.push(' ');
                }
                out.push_str(&v.to_string());
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// CSR star storage: `star_of(v)` is Γ(v) as a sorted edge-id slice.
#[derive(Clone, Debug)]
pub struct StarTable {
    offsets: Vec<u32>,
    edge_ids: Vec<u32>,
}

impl StarTable {
    pub fn star_of(&self, v: u32) -> &[u32] {
        let lo = self.offsets[v as usize] as usize;
        let hi = self.offsets[v as usize + 1] as usize;
        &self.edge_ids[lo..hi]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn n(&self) -> u32 {
        (self.offsets.len() - 1) as u32
    }
}

/// Size of the intersection of two sorted slices.
pub fn sorted_intersection_len(a: &[u32], b: &[u32]) -> u64 {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
