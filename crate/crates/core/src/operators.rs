//! Lattice Hamiltonian in units of the on-site repulsion `U`:
//!
//! ```text
//! H / U = Σ_i n_i (n_i - 1) - λ Σ_{(i,j) ∈ edges} (a†_i a_j + a†_j a_i),   λ = J / U
//! ```
//!
//! The interaction term carries no factor ½, so `λ` here equals half of the
//! hopping ratio in the more common `U/2 Σ n(n-1)` convention.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use crate::basis::{FockBasis, Occupation};
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    ChainPeriodic,
    ChainOpen,
    CompleteGraph,
    Custom,
}

/// Hopping graph: unordered site pairs, no self-loops, no duplicates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometry {
    kind: GeometryKind,
    n_sites: usize,
    /// Normalized `(i, j)` with `i < j`, sorted.
    edges: Vec<(usize, usize)>,
}

impl Geometry {
    /// Ring of `n_sites` sites. Two sites share a single bond.
    pub fn chain_periodic(n_sites: usize) -> Self {
        let edges = match n_sites {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            m => (0..m).map(|i| (i, (i + 1) % m)).collect(),
        };
        Self::from_edges(GeometryKind::ChainPeriodic, n_sites, edges)
    }

    pub fn chain_open(n_sites: usize) -> Self {
        let edges = (1..n_sites).map(|i| (i - 1, i)).collect();
        Self::from_edges(GeometryKind::ChainOpen, n_sites, edges)
    }

    /// Every pair of sites is a bond.
    pub fn complete_graph(n_sites: usize) -> Self {
        let mut edges = Vec::with_capacity(n_sites * n_sites.saturating_sub(1) / 2);
        for i in 0..n_sites {
            for j in i + 1..n_sites {
                edges.push((i, j));
            }
        }
        Self::from_edges(GeometryKind::CompleteGraph, n_sites, edges)
    }

    pub fn custom(n_sites: usize, edges: &[(usize, usize)]) -> Result<Self> {
        for &(i, j) in edges {
            if i == j {
                return Err(domain(format!("self-loop on site {i}")));
            }
            if i >= n_sites || j >= n_sites {
                return Err(domain(format!(
                    "edge ({i},{j}) out of range for {n_sites} sites"
                )));
            }
        }
        let before = edges.len();
        let g = Self::from_edges(GeometryKind::Custom, n_sites, edges.to_vec());
        if g.edges.len() != before {
            return Err(domain("duplicate edges"));
        }
        Ok(g)
    }

    fn from_edges(kind: GeometryKind, n_sites: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut edges: Vec<_> = edges
            .into_iter()
            .map(|(i, j)| if i < j { (i, j) } else { (j, i) })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self {
            kind,
            n_sites,
            edges,
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Every bond in both orientations, as `(to, from)`.
    pub fn directed_hops(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)])
    }

    /// Shortest-path length between two sites, `None` if disconnected.
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        if a >= self.n_sites || b >= self.n_sites {
            return None;
        }
        let mut adj = vec![Vec::new(); self.n_sites];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut dist = vec![usize::MAX; self.n_sites];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        (dist[b] != usize::MAX).then_some(dist[b])
    }

    /// Lowest-indexed site at graph distance `d` from site 0.
    pub fn partner_at_distance(&self, d: usize) -> Option<usize> {
        (1..self.n_sites).find(|&j| self.distance(0, j) == Some(d))
    }
}

/// `λ = J/U` together with the hopping graph.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianParams {
    lambda: f64,
    geometry: Geometry,
}

impl HamiltonianParams {
    pub fn new(lambda: f64, geometry: Geometry) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        Ok(Self { lambda, geometry })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }
}

/// Real symmetric operator over a Fock basis, upper triangle in coordinate
/// form sorted by `(row, col)`.
#[derive(Clone, Debug)]
pub struct SparseHermitianOperator {
    basis: Arc<FockBasis>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHermitianOperator {
    pub fn zero(basis: Arc<FockBasis>) -> Self {
        Self {
            basis,
            rows: vec![],
            cols: vec![],
            values: vec![],
        }
    }

    /// Builds from `(row, col, value)` triplets. Entries below the diagonal
    /// are mirrored up; duplicates are summed.
    pub fn from_triplets(
        basis: Arc<FockBasis>,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let d = basis.dimension();
        for t in triplets.iter_mut() {
            if t.0 >= d || t.1 >= d {
                return Err(domain(format!("entry ({},{}) outside dimension {d}", t.0, t.1)));
            }
            if t.0 > t.1 {
                std::mem::swap(&mut t.0, &mut t.1);
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut op = Self::zero(basis);
        for (r, c, v) in triplets {
            if op.rows.last() == Some(&r) && op.cols.last() == Some(&c) {
                *op.values.last_mut().unwrap() += v;
            } else {
                op.rows.push(r);
                op.cols.push(c);
                op.values.push(v);
            }
        }
        Ok(op)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Stored (upper-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// Element `(row, col)` of the full symmetric matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let key = (row.min(col), row.max(col));
        let lo = self.rows.partition_point(|&r| r < key.0);
        let hi = self.rows.partition_point(|&r| r <= key.0);
        self.cols[lo..hi]
            .binary_search(&key.1)
            .map(|k| self.values[lo + k])
            .unwrap_or(0.0)
    }

    /// `y = H x` using the stored upper triangle symmetrically.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let d = self.dimension();
        if x.len() != d || y.len() != d {
            return Err(domain(format!(
                "vector lengths {}/{} do not match operator dimension {d}",
                x.len(),
                y.len()
            )));
        }
        y.fill(0.0);
        for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(&self.values) {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        Ok(())
    }

    /// Row-major dense copy.
    pub fn densify(&self) -> Vec<f64> {
        let d = self.dimension();
        let mut m = vec![0.0; d * d];
        for (r, c, v) in self.entries() {
            m[r * d + c] = v;
            m[c * d + r] = v;
        }
        m
    }

    /// `self + factor * other` on the same basis.
    pub fn add_scaled(&self, other: &Self, factor: f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.basis, &other.basis)
            && (self.basis.n_particles() != other.basis.n_particles()
                || self.basis.n_sites() != other.basis.n_sites())
        {
            return Err(domain("operators live on different bases"));
        }
        let triplets = self
            .entries()
            .chain(other.entries().map(|(r, c, v)| (r, c, factor * v)))
            .collect();
        let mut op = Self::from_triplets(self.basis.clone(), triplets)?;
        op.retain_nonzero();
        Ok(op)
    }

    fn retain_nonzero(&mut self) {
        let mut k = 0;
        for i in 0..self.values.len() {
            if self.values[i] != 0.0 {
                self.rows[k] = self.rows[i];
                self.cols[k] = self.cols[i];
                self.values[k] = self.values[i];
                k += 1;
            }
        }
        self.rows.truncate(k);
        self.cols.truncate(k);
        self.values.truncate(k);
    }

    /// Header `D nnz`, then one `row col value` triplet per stored entry.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.dimension(), self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(w, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }
}

/// `Σ_i n_i (n_i - 1)` for each basis state.
pub fn interaction_diagonal(basis: &FockBasis) -> Vec<f64> {
    basis.iter().map(interaction_energy).collect()
}

#[inline]
pub(crate) fn interaction_energy(occupations: &[Occupation]) -> f64 {
    occupations
        .iter()
        .map(|&n| {
            let n = n as f64;
            n * (n - 1.0)
        })
        .sum()
}

/// `Σ_{(i,j)} (a†_i a_j + a†_j a_i)` with positive coefficients.
pub fn hopping_operator(
    basis: &Arc<FockBasis>,
    geometry: &Geometry,
) -> Result<SparseHermitianOperator> {
    let m = basis.n_sites();
    if let Some(&(i, j)) = geometry.edges().iter().find(|&&(i, j)| i >= m || j >= m) {
        return Err(domain(format!("edge ({i},{j}) out of range for {m} sites")));
    }
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    let mut values = Vec::new();
    let mut scratch: Vec<Occupation> = vec![0; m];
    let mut row_buf: Vec<(usize, f64)> = Vec::new();
    for k in 0..basis.dimension() {
        let v = basis.state(k);
        row_buf.clear();
        for (to, from) in geometry.directed_hops() {
            if v[from] == 0 {
                continue;
            }
            scratch.copy_from_slice(v);
            scratch[from] -= 1;
            scratch[to] += 1;
            let target = basis.rank_unchecked(&scratch);
            if target > k {
                let amp = ((v[to] as f64 + 1.0) * v[from] as f64).sqrt();
                row_buf.push((target, amp));
            }
        }
        row_buf.sort_by_key(|&(c, _)| c);
        for &(c, amp) in &row_buf {
            if cols.last() == Some(&c) && rows.last() == Some(&k) {
                *values.last_mut().unwrap() += amp;
            } else {
                rows.push(k);
                cols.push(c);
                values.push(amp);
            }
        }
    }
    Ok(SparseHermitianOperator {
        basis: basis.clone(),
        rows,
        cols,
        values,
    })
}

/// `H/U = diag(Σ n(n-1)) - λ · hopping`.
pub fn assemble_hamiltonian(
    basis: &Arc<FockBasis>,
    params: &HamiltonianParams,
) -> Result<SparseHermitianOperator> {
    let m = basis.n_sites();
    if params.geometry().n_sites() != m {
        return Err(domain(format!(
            "geometry has {} sites, basis has {m}",
            params.geometry().n_sites()
        )));
    }
    let hop = hopping_operator(basis, params.geometry())?;
    let diag = interaction_diagonal(basis);
    let lambda = params.lambda();

    // merge the diagonal into the row-sorted hopping entries
    let mut rows = Vec::with_capacity(hop.nnz() + diag.len());
    let mut cols = Vec::with_capacity(hop.nnz() + diag.len());
    let mut values = Vec::with_capacity(hop.nnz() + diag.len());
    let mut cursor = 0;
    for (k, &u) in diag.iter().enumerate() {
        if u != 0.0 {
            rows.push(k);
            cols.push(k);
            values.push(u);
        }
        while cursor < hop.nnz() && hop.rows[cursor] == k {
            if lambda != 0.0 {
                rows.push(k);
                cols.push(hop.cols[cursor]);
                values.push(-lambda * hop.values[cursor]);
            }
            cursor += 1;
        }
    }
    Ok(SparseHermitianOperator {
        basis: basis.clone(),
        rows,
        cols,
        values,
    })
}
