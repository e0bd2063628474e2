//! One- and two-site reduced states and the entanglement measures built on
//! them: linear entropy, negativity, and on-site number variance.
//!
//! At fixed total particle number a reduced state commutes with the local
//! particle number, so it is stored as a set of dense blocks. A one-site
//! state is diagonal (one 1x1 block per occupation); a two-site state has one
//! block per pair occupation `t = n_a + n_b`, indexed by patterns
//! `(m, t - m)` for `m = 0..=t`. Only sectors that receive weight are stored,
//! which keeps two-site states of large sparse lattices small.

use std::collections::BTreeMap;
use std::fmt;

use crate::basis::Occupation;
use crate::error::{capacity, domain, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::operators::Geometry;
use crate::state::{QuantumState, Storage};

/// Eigenvalues above this are not counted as negative.
pub const NEGATIVE_EIGENVALUE_CUTOFF: f64 = -1e-12;

/// Largest dense matrix [`BlockMatrix::to_dense`] will build.
const DENSE_EXPORT_CAP: usize = 4096;

/// A dense symmetric block over a list of local occupation patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub patterns: Vec<Vec<Occupation>>,
    /// Row-major, `patterns.len()` squared.
    pub values: Vec<f64>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.patterns.len()
    }
}

/// Symmetric matrix on `width`-site occupation patterns, block diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    width: usize,
    blocks: Vec<Block>,
}

impl BlockMatrix {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Every stored `(row pattern, column pattern, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (&[Occupation], &[Occupation], f64)> + '_ {
        self.blocks.iter().flat_map(|b| {
            let n = b.dim();
            (0..n * n).map(move |k| {
                (
                    b.patterns[k / n].as_slice(),
                    b.patterns[k % n].as_slice(),
                    b.values[k],
                )
            })
        })
    }

    pub fn get(&self, row: &[Occupation], col: &[Occupation]) -> f64 {
        for b in &self.blocks {
            let r = b.patterns.iter().position(|p| p == row);
            let c = b.patterns.iter().position(|p| p == col);
            if let (Some(r), Some(c)) = (r, c) {
                return b.values[r * b.dim() + c];
            }
        }
        0.0
    }

    pub fn trace(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (0..b.dim()).map(|i| b.values[i * b.dim() + i]).sum::<f64>())
            .sum()
    }

    /// All eigenvalues, block by block, ascending within each block.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| symmetric_eigenvalues(&b.values, b.dim()))
            .collect()
    }

    /// Dense matrix on `local_dim^width` rows; a pattern maps to the index
    /// with its first site as the most significant digit.
    pub fn to_dense(&self, local_dim: usize) -> Result<Vec<f64>> {
        let size = local_dim
            .checked_pow(self.width as u32)
            .filter(|&s| s <= DENSE_EXPORT_CAP)
            .ok_or_else(|| capacity("reduced matrix too large to densify"))?;
        let index = |p: &[Occupation]| p.iter().fold(0usize, |acc, &o| acc * local_dim + o as usize);
        let mut m = vec![0.0; size * size];
        for (r, c, v) in self.entries() {
            if r.iter().chain(c).any(|&o| o as usize >= local_dim) {
                return Err(domain("pattern exceeds the local dimension"));
            }
            m[index(r) * size + index(c)] = v;
        }
        Ok(m)
    }

    /// Regroups arbitrary symmetric entries into connected blocks. Blocks are
    /// ordered by their smallest pattern; patterns within a block ascend.
    pub fn from_entries(width: usize, entries: Vec<(Vec<Occupation>, Vec<Occupation>, f64)>) -> Self {
        let mut ids: BTreeMap<Vec<Occupation>, usize> = BTreeMap::new();
        for (r, c, _) in &entries {
            let next = ids.len();
            ids.entry(r.clone()).or_insert(next);
            let next = ids.len();
            ids.entry(c.clone()).or_insert(next);
        }
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, v) in &entries {
            if *v != 0.0 {
                let a = find(&mut parent, ids[r]);
                let b = find(&mut parent, ids[c]);
                parent[a.max(b)] = a.min(b);
            }
        }
        // component -> sorted patterns
        let mut groups: BTreeMap<Vec<Occupation>, Vec<Vec<Occupation>>> = BTreeMap::new();
        let mut root_min: BTreeMap<usize, Vec<Occupation>> = BTreeMap::new();
        for (p, &id) in &ids {
            let root = find(&mut parent, id);
            // BTreeMap iteration is sorted, so the first pattern seen is the minimum
            let key = root_min.entry(root).or_insert_with(|| p.clone()).clone();
            groups.entry(key).or_default().push(p.clone());
        }
        let mut location: BTreeMap<Vec<Occupation>, (usize, usize)> = BTreeMap::new();
        let mut blocks: Vec<Block> = Vec::with_capacity(groups.len());
        for (bi, (_, patterns)) in groups.into_iter().enumerate() {
            for (pi, p) in patterns.iter().enumerate() {
                location.insert(p.clone(), (bi, pi));
            }
            let n = patterns.len();
            blocks.push(Block {
                patterns,
                values: vec![0.0; n * n],
            });
        }
        for (r, c, v) in entries {
            let (br, pr) = location[&r];
            let (bc, pc) = location[&c];
            // zero entries never join components and need no storage
            if v != 0.0 {
                debug_assert_eq!(br, bc);
                let n = blocks[br].dim();
                blocks[br].values[pr * n + pc] += v;
            }
        }
        Self { width, blocks }
    }

    /// Partial transpose on the first site of a two-site matrix:
    /// `T[(m,n),(m',n')] = ρ[(m',n),(m,n')]`.
    pub fn partial_transpose_first(&self) -> Result<BlockMatrix> {
        if self.width != 2 {
            return Err(domain("partial transpose needs a two-site matrix"));
        }
        let entries = self
            .entries()
            .map(|(r, c, v)| (vec![c[0], r[1]], vec![r[0], c[1]], v))
            .collect();
        Ok(Self::from_entries(2, entries))
    }
}

/// Reduced density matrix of one or two sites.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedDensityMatrix {
    sites: Vec<usize>,
    /// Occupations per site run over `0..local_dim`, i.e. `N + 1`.
    local_dim: usize,
    matrix: BlockMatrix,
}

impl ReducedDensityMatrix {
    /// Diagonal one-site state from occupation probabilities `p[0..=N]`.
    pub fn one_site(site: usize, probabilities: &[f64]) -> Self {
        let blocks = probabilities
            .iter()
            .enumerate()
            .map(|(j, &p)| Block {
                patterns: vec![vec![j as Occupation]],
                values: vec![p],
            })
            .collect();
        Self {
            sites: vec![site],
            local_dim: probabilities.len(),
            matrix: BlockMatrix { width: 1, blocks },
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn matrix(&self) -> &BlockMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues()
    }

    pub fn to_dense(&self) -> Result<Vec<f64>> {
        self.matrix.to_dense(self.local_dim)
    }

    /// `p_n` for `n = 0..=N`; one-site states only.
    pub fn occupation_probabilities(&self) -> Result<Vec<f64>> {
        if self.sites.len() != 1 {
            return Err(domain("occupation distribution needs a one-site state"));
        }
        let mut p = vec![0.0; self.local_dim];
        for b in &self.matrix.blocks {
            p[b.patterns[0][0] as usize] += b.values[0];
        }
        Ok(p)
    }
}

/// Sites a configuration accessor exposes to the partial trace.
trait Configuration {
    fn occupation(&self, site: usize) -> Occupation;
    /// Appends an encoding of every site not in `keep` to `key`.
    fn complement_key(&self, keep: &[usize], key: &mut Vec<u32>);
}

impl Configuration for [Occupation] {
    fn occupation(&self, site: usize) -> Occupation {
        self[site]
    }

    fn complement_key(&self, keep: &[usize], key: &mut Vec<u32>) {
        key.extend(
            self.iter()
                .enumerate()
                .filter(|(i, _)| !keep.contains(i))
                .map(|(_, &o)| o as u32),
        );
    }
}

impl Configuration for crate::state::Excitation {
    fn occupation(&self, site: usize) -> Occupation {
        crate::state::Excitation::occupation(self, site)
    }

    fn complement_key(&self, keep: &[usize], key: &mut Vec<u32>) {
        key.extend(
            self.deviations()
                .iter()
                .filter(|(s, _)| !keep.contains(&(*s as usize)))
                .map(|&(s, o)| (s << 16) | o as u32),
        );
    }
}

/// Trace out everything except `sites` (one or two distinct sites).
pub fn partial_trace(psi: &QuantumState, sites: &[usize]) -> Result<ReducedDensityMatrix> {
    let m = psi.n_sites();
    if sites.is_empty() || sites.len() > 2 {
        return Err(domain(format!(
            "reduced states of {} sites are not supported",
            sites.len()
        )));
    }
    if sites.iter().any(|&s| s >= m) {
        return Err(domain(format!("site index out of range for {m} sites")));
    }
    if sites.len() == 2 && sites[0] == sites[1] {
        return Err(domain("reduced-state sites must be distinct"));
    }
    if sites.len() == 2 && m > (u16::MAX as usize) {
        return Err(capacity("two-site reduction supports up to 65535 sites"));
    }
    let n = psi.n_particles();
    match &psi.storage {
        Storage::Dense { basis, amplitudes } => {
            let it = basis.iter().zip(amplitudes.iter().copied());
            reduce(it, sites, n)
        }
        Storage::Sparse { entries } => {
            let it = entries.iter().map(|(e, a)| (e, *a));
            reduce(it, sites, n)
        }
    }
}

fn reduce<'a, C, I>(components: I, sites: &[usize], n_particles: usize) -> Result<ReducedDensityMatrix>
where
    C: Configuration + ?Sized + 'a,
    I: Iterator<Item = (&'a C, f64)>,
{
    if sites.len() == 1 {
        let s = sites[0];
        let mut p = vec![0.0; n_particles + 1];
        for (c, a) in components {
            p[c.occupation(s) as usize] += a * a;
        }
        return Ok(ReducedDensityMatrix::one_site(s, &p));
    }

    let (sa, sb) = (sites[0], sites[1]);
    // (complement key, first-site occupation, pair total, amplitude)
    let mut rows: Vec<(Vec<u32>, Occupation, usize, f64)> = Vec::new();
    for (c, a) in components {
        if a == 0.0 {
            continue;
        }
        let mut key = Vec::new();
        c.complement_key(sites, &mut key);
        let (na, nb) = (c.occupation(sa), c.occupation(sb));
        rows.push((key, na, na as usize + nb as usize, a));
    }
    rows.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut sectors: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut start = 0;
    while start < rows.len() {
        let mut end = start + 1;
        while end < rows.len() && rows[end].0 == rows[start].0 {
            end += 1;
        }
        // equal complements fix the pair total
        let t = rows[start].2;
        let dim = t + 1;
        let block = sectors.entry(t).or_insert_with(|| vec![0.0; dim * dim]);
        for x in &rows[start..end] {
            for y in &rows[start..end] {
                block[x.1 as usize * dim + y.1 as usize] += x.3 * y.3;
            }
        }
        start = end;
    }
    let blocks = sectors
        .into_iter()
        .map(|(t, values)| Block {
            patterns: (0..=t)
                .map(|m| vec![m as Occupation, (t - m) as Occupation])
                .collect(),
            values,
        })
        .collect();
    Ok(ReducedDensityMatrix {
        sites: sites.to_vec(),
        local_dim: n_particles + 1,
        matrix: BlockMatrix { width: 2, blocks },
    })
}

/// `d/(d-1) (1 - Tr ρ²)` with `d = N + 1`; one-site states only.
pub fn linear_entropy(rho: &ReducedDensityMatrix) -> Result<f64> {
    let p = rho.occupation_probabilities()?;
    let d = rho.local_dim as f64;
    if rho.local_dim < 2 {
        return Ok(0.0);
    }
    let purity: f64 = p.iter().map(|x| x * x).sum();
    Ok(d / (d - 1.0) * (1.0 - purity))
}

/// Partial transpose on the first of the two sites.
pub fn partial_transpose(rho: &ReducedDensityMatrix) -> Result<BlockMatrix> {
    if rho.sites.len() != 2 {
        return Err(domain("partial transpose needs a two-site state"));
    }
    rho.matrix.partial_transpose_first()
}

/// `|Σ negative eigenvalues of ρ^{T_A}|`.
pub fn negativity(rho: &ReducedDensityMatrix) -> Result<f64> {
    let t = partial_transpose(rho)?;
    Ok(-t
        .eigenvalues()
        .into_iter()
        .filter(|&e| e < NEGATIVE_EIGENVALUE_CUTOFF)
        .sum::<f64>())
}

/// `⟨n²⟩ - ⟨n⟩²` on one site.
pub fn delta_n2(rho: &ReducedDensityMatrix) -> Result<f64> {
    let p = rho.occupation_probabilities()?;
    let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
    let second: f64 = p.iter().enumerate().map(|(n, x)| (n * n) as f64 * x).sum();
    Ok((second - mean * mean).max(0.0))
}

/// Site pair classes reported by sweeps: graph distance 1 or 2 from site 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairLabel {
    Nn,
    Nnn,
}

impl PairLabel {
    pub fn distance(self) -> usize {
        match self {
            PairLabel::Nn => 1,
            PairLabel::Nnn => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PairLabel::Nn => "nn",
            PairLabel::Nnn => "nnn",
        }
    }

    /// `(0, j)` with `j` the lowest site at this distance, if any.
    pub fn sites(self, geometry: &Geometry) -> Option<(usize, usize)> {
        geometry.partner_at_distance(self.distance()).map(|j| (0, j))
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PairLabel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nn" => Ok(PairLabel::Nn),
            "nnn" => Ok(PairLabel::Nnn),
            other => Err(domain(format!("unknown pair label `{other}` (expected nn or nnn)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    pub linear_entropy: f64,
    /// Pairs absent from the geometry are left out.
    pub negativities: BTreeMap<PairLabel, f64>,
    pub delta_n2: f64,
}

/// All measures for site 0 and the requested pairs.
pub fn entanglement_report(
    psi: &QuantumState,
    geometry: &Geometry,
    pairs: &[PairLabel],
) -> Result<EntanglementReport> {
    let one = partial_trace(psi, &[0])?;
    let mut negativities = BTreeMap::new();
    for &label in pairs {
        if let Some((a, b)) = label.sites(geometry) {
            negativities.insert(label, negativity(&partial_trace(psi, &[a, b])?)?);
        }
    }
    Ok(EntanglementReport {
        linear_entropy: linear_entropy(&one)?,
        negativities,
        delta_n2: delta_n2(&one)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FockBasis;
    use crate::operators::{assemble_hamiltonian, HamiltonianParams};
    use crate::solvers::{perturbative_state, perturbative_state_sparse, solve_dense};
    use crate::state::{build_mi_state, build_sf_state};
    use std::sync::Arc;

    fn basis(n: usize) -> Arc<FockBasis> {
        Arc::new(FockBasis::new(n, n).unwrap())
    }

    fn ground(n: usize, lambda: f64, g: Geometry) -> QuantumState {
        let b = basis(n);
        let h = assemble_hamiltonian(&b, &HamiltonianParams::new(lambda, g).unwrap()).unwrap();
        solve_dense(&h).unwrap().state
    }

    /// Brute-force reduced matrix straight from the definition
    /// ρ[(p),(p')] = Σ_B ψ(p,B) ψ(p',B), dense over (N+1)^|A|.
    fn brute_reduced(psi: &QuantumState, sites: &[usize]) -> Vec<f64> {
        let d = psi.n_particles() + 1;
        let size = d.pow(sites.len() as u32);
        let comps = psi.components();
        let mut rho = vec![0.0; size * size];
        for (x, ax) in &comps {
            for (y, ay) in &comps {
                let same_rest = (0..x.len()).filter(|i| !sites.contains(i)).all(|i| x[i] == y[i]);
                if !same_rest {
                    continue;
                }
                let ix = sites.iter().fold(0, |acc, &s| acc * d + x[s] as usize);
                let iy = sites.iter().fold(0, |acc, &s| acc * d + y[s] as usize);
                rho[ix * size + iy] += ax * ay;
            }
        }
        rho
    }

    #[test]
    fn mott_marginals() {
        let b = basis(4);
        let mi = build_mi_state(&b).unwrap();
        let rho = partial_trace(&mi, &[2]).unwrap();
        assert_eq!(rho.occupation_probabilities().unwrap(), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(linear_entropy(&rho).unwrap(), 0.0);
        assert_eq!(delta_n2(&rho).unwrap(), 0.0);
        let pair = partial_trace(&mi, &[0, 2]).unwrap();
        assert_eq!(negativity(&pair).unwrap(), 0.0);
        let pt = partial_transpose(&pair).unwrap();
        assert_eq!(pt.to_dense(5).unwrap(), pair.to_dense().unwrap());
    }

    #[test]
    fn superfluid_two_sites() {
        let b = basis(2);
        let sf = build_sf_state(&b).unwrap();
        let rho = partial_trace(&sf, &[0]).unwrap();
        let p = rho.occupation_probabilities().unwrap();
        for (x, y) in p.iter().zip([0.25, 0.5, 0.25]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((linear_entropy(&rho).unwrap() - 15.0 / 16.0).abs() < 1e-15);
        assert!((delta_n2(&rho).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_has_unit_entropy() {
        for d in 2..8 {
            let rho = ReducedDensityMatrix::one_site(0, &vec![1.0 / d as f64; d]);
            assert!((linear_entropy(&rho).unwrap() - 1.0).abs() < 1e-15);
        }
        let pure = ReducedDensityMatrix::one_site(0, &[0.0, 0.0, 1.0]);
        assert_eq!(linear_entropy(&pure).unwrap(), 0.0);
        assert_eq!(delta_n2(&pure).unwrap(), 0.0);
    }

    #[test]
    fn matches_brute_force_partial_trace() {
        for n in 2..=4 {
            let psi = ground(n, 0.3, Geometry::chain_periodic(n));
            let d = n + 1;
            let one = partial_trace(&psi, &[1]).unwrap();
            let dense = one.to_dense().unwrap();
            let brute = brute_reduced(&psi, &[1]);
            for (x, y) in dense.iter().zip(&brute) {
                assert!((x - y).abs() < 1e-14);
            }
            // off-diagonals are structurally zero
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        assert_eq!(dense[i * d + j], 0.0);
                    }
                }
            }
            for sites in [[0, 1], [0, n - 1], [n - 1, 0]] {
                let two = partial_trace(&psi, &sites).unwrap();
                let dense = two.to_dense().unwrap();
                let brute = brute_reduced(&psi, &sites);
                for (x, y) in dense.iter().zip(&brute) {
                    assert!((x - y).abs() < 1e-14);
                }
                assert!((two.trace() - 1.0).abs() < 1e-12);
                assert!(two.eigenvalues().iter().all(|&e| e > -1e-12));
            }
        }
    }

    #[test]
    fn sparse_and_dense_reductions_agree() {
        let n = 4;
        let b = basis(n);
        let p = HamiltonianParams::new(0.08, Geometry::chain_periodic(n)).unwrap();
        let sparse = perturbative_state_sparse(n, &p, 2).unwrap().state;
        let dense = perturbative_state(&b, &p, 2).unwrap().state;
        for sites in [&[0][..], &[0, 1], &[0, 2]] {
            let a = partial_trace(&sparse, sites).unwrap().to_dense().unwrap();
            let c = partial_trace(&dense, sites).unwrap().to_dense().unwrap();
            for (x, y) in a.iter().zip(&c) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unsupported_subsets() {
        let psi = build_mi_state(&basis(3)).unwrap();
        assert!(partial_trace(&psi, &[]).is_err());
        assert!(partial_trace(&psi, &[0, 1, 2]).is_err());
        assert!(partial_trace(&psi, &[1, 1]).is_err());
        assert!(partial_trace(&psi, &[3]).is_err());
        let one = partial_trace(&psi, &[0]).unwrap();
        assert!(partial_transpose(&one).is_err());
        assert!(negativity(&one).is_err());
        let two = partial_trace(&psi, &[0, 1]).unwrap();
        assert!(linear_entropy(&two).is_err());
        assert!(delta_n2(&two).is_err());
    }

    #[test]
    fn transpose_is_an_involution() {
        let psi = ground(4, 0.4, Geometry::chain_periodic(4));
        let rho = partial_trace(&psi, &[0, 1]).unwrap();
        let once = partial_transpose(&rho).unwrap();
        let twice = once.partial_transpose_first().unwrap();
        assert_eq!(twice.to_dense(5).unwrap(), rho.to_dense().unwrap());
        assert_ne!(once.to_dense(5).unwrap(), rho.to_dense().unwrap());
    }

    #[test]
    fn product_state_stays_ppt() {
        // ρ_A ⊗ ρ_B with both factors diagonal-plus-coherence on a qutrit
        let a = [0.5, 0.2, 0.0, 0.2, 0.3, 0.1, 0.0, 0.1, 0.2];
        let b = [0.6, 0.1, 0.05, 0.1, 0.3, 0.0, 0.05, 0.0, 0.1];
        let mut entries = Vec::new();
        for (m, n, mp, np) in quadruples(3) {
            let v = a[m * 3 + mp] * b[n * 3 + np];
            entries.push((vec![m as Occupation, n as Occupation], vec![mp as Occupation, np as Occupation], v));
        }
        let rho = BlockMatrix::from_entries(2, entries);
        let before = rho.eigenvalues();
        let after = rho.partial_transpose_first().unwrap().eigenvalues();
        assert!(before.iter().all(|&e| e > -1e-14));
        assert!(after.iter().all(|&e| e > -1e-14));
    }

    fn quadruples(d: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        (0..d.pow(4)).map(move |k| (k / d.pow(3), (k / d.pow(2)) % d, (k / d) % d, k % d))
    }

    /// Two-site pure state: ψ = Σ_m a_m |m⟩|N-m⟩ is already in Schmidt form.
    fn schmidt_negativity(amplitudes: &[f64]) -> f64 {
        let s: Vec<f64> = amplitudes.iter().map(|a| a.abs()).collect();
        let mut total = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                total += s[i] * s[j];
            }
        }
        total
    }

    #[test]
    fn two_site_negativity_matches_schmidt() {
        for lambda in [0.01, 0.1, 0.5, 2.0] {
            let psi = ground(2, lambda, Geometry::chain_periodic(2));
            let rho = partial_trace(&psi, &[0, 1]).unwrap();
            let expect = schmidt_negativity(psi.amplitudes().unwrap());
            assert!((negativity(&rho).unwrap() - expect).abs() < 1e-12);
        }
        let sf = build_sf_state(&basis(2)).unwrap();
        let rho = partial_trace(&sf, &[0, 1]).unwrap();
        let expect = schmidt_negativity(sf.amplitudes().unwrap());
        assert!((negativity(&rho).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn translation_invariant_observables() {
        for n in 3..=5 {
            for g in [Geometry::chain_periodic(n), Geometry::complete_graph(n)] {
                let psi = ground(n, 0.25, g.clone());
                let s0 = linear_entropy(&partial_trace(&psi, &[0]).unwrap()).unwrap();
                for site in 1..n {
                    let s = linear_entropy(&partial_trace(&psi, &[site]).unwrap()).unwrap();
                    assert!((s - s0).abs() < 1e-12);
                }
                let ref_nn = negativity(&partial_trace(&psi, &[0, 1]).unwrap()).unwrap();
                for (a, b) in g.edges() {
                    let v = negativity(&partial_trace(&psi, &[*a, *b]).unwrap()).unwrap();
                    assert!((v - ref_nn).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn report_skips_missing_pairs() {
        let psi = ground(4, 0.2, Geometry::complete_graph(4));
        let r = entanglement_report(&psi, &Geometry::complete_graph(4), &[PairLabel::Nn, PairLabel::Nnn])
            .unwrap();
        assert!(r.negativities.contains_key(&PairLabel::Nn));
        assert!(!r.negativities.contains_key(&PairLabel::Nnn));
        assert!("nnn".parse::<PairLabel>().is_ok());
        assert!("far".parse::<PairLabel>().is_err());
    }

    #[test]
    fn large_sparse_chain_reduces() {
        let n = 200;
        let p = HamiltonianParams::new(0.1, Geometry::chain_periodic(n)).unwrap();
        let psi = perturbative_state_sparse(n, &p, 1).unwrap().state;
        let r = entanglement_report(&psi, p.geometry(), &[PairLabel::Nn, PairLabel::Nnn]).unwrap();
        assert!(r.linear_entropy > 0.0 && r.linear_entropy < 1.0);
        assert!(r.negativities[&PairLabel::Nn] > 0.0);
        let rho = partial_trace(&psi, &[0, 1]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}
