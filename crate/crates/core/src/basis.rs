//! Fixed-particle-number bosonic Fock bases.
//!
//! States are stored in descending lexicographic order, so for `N = M = 2`
//! the basis reads `(2,0), (1,1), (0,2)`. Ranking uses the combinatorial
//! number system: the rank of `v` is the number of configurations that are
//! lexicographically larger, which collapses (hockey-stick identity) to one
//! binomial per site.

use std::fmt;
use std::io::Write;

use crate::error::{capacity, domain, Result};

/// Occupation of a single site.
pub type Occupation = u16;

/// Default refusal threshold for [`FockBasis::new`].
pub const DEFAULT_DIMENSION_CAP: u64 = 5_000_000;

/// Particle numbers per site, `(n_1, ..., n_M)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(Vec<Occupation>);

impl OccupationVector {
    pub fn new(occupations: Vec<Occupation>) -> Result<Self> {
        if occupations.is_empty() {
            return Err(domain("occupation vector needs at least one site"));
        }
        Ok(Self(occupations))
    }

    /// The unit-filling configuration `(1, 1, ..., 1)`.
    pub fn unit_filling(n_sites: usize) -> Self {
        Self(vec![1; n_sites.max(1)])
    }

    pub fn as_slice(&self) -> &[Occupation] {
        &self.0
    }

    pub fn n_sites(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&n| n as usize).sum()
    }

    /// Sorted-occupation label of the permutation orbit this vector lies in.
    pub fn orbit(&self) -> Partition {
        Partition::from_occupations(&self.0)
    }
}

impl From<OccupationVector> for Vec<Occupation> {
    fn from(v: OccupationVector) -> Self {
        v.0
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// `binomial(n, k)`, or `None` if it does not fit in a `u64`.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Number of ways to place `n_particles` bosons on `n_sites` sites.
pub fn fock_dimension(n_particles: usize, n_sites: usize) -> Option<u64> {
    if n_sites == 0 {
        return Some(u64::from(n_particles == 0));
    }
    binomial((n_particles + n_sites - 1) as u64, n_particles as u64)
}

/// All occupation vectors at fixed `(N, M)`, with combinatorial rank/unrank.
///
/// Immutable after construction; share it behind an `Arc`.
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_particles: usize,
    n_sites: usize,
    dimension: usize,
    /// Row-major `dimension x n_sites` occupation table.
    states: Vec<Occupation>,
    /// `binom[n * (n_sites + 1) + k] = C(n, k)`, saturating at `u64::MAX`.
    binom: Vec<u64>,
}

impl FockBasis {
    pub fn new(n_particles: usize, n_sites: usize) -> Result<Self> {
        Self::with_dimension_cap(n_particles, n_sites, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_dimension_cap(n_particles: usize, n_sites: usize, cap: u64) -> Result<Self> {
        if n_sites == 0 {
            return Err(domain("a lattice needs at least one site"));
        }
        if n_particles > Occupation::MAX as usize {
            return Err(capacity(format!(
                "{n_particles} particles exceed the per-site occupation type"
            )));
        }
        let dim = fock_dimension(n_particles, n_sites).ok_or_else(|| {
            capacity(format!(
                "basis dimension for N={n_particles}, M={n_sites} overflows 64 bits"
            ))
        })?;
        if dim > cap {
            return Err(capacity(format!(
                "basis dimension {dim} for N={n_particles}, M={n_sites} exceeds cap {cap}"
            )));
        }
        let dimension = usize::try_from(dim)
            .map_err(|_| capacity(format!("basis dimension {dim} exceeds usize")))?;
        dimension
            .checked_mul(n_sites)
            .ok_or_else(|| capacity("occupation table size overflows usize"))?;

        let rows = n_particles + n_sites + 1;
        let cols = n_sites + 1;
        let mut binom = vec![0u64; rows * cols];
        for n in 0..rows {
            binom[n * cols] = 1;
            for k in 1..cols.min(n + 1) {
                let a = binom[(n - 1) * cols + k - 1];
                let b = binom[(n - 1) * cols + k];
                binom[n * cols + k] = a.saturating_add(b);
            }
        }

        let mut states = Vec::with_capacity(dimension * n_sites);
        let mut current = vec![0 as Occupation; n_sites];
        current[0] = n_particles as Occupation;
        for k in 0..dimension {
            states.extend_from_slice(&current);
            if k + 1 < dimension {
                advance_descending(&mut current);
            }
        }

        Ok(Self {
            n_particles,
            n_sites,
            dimension,
            states,
            binom,
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Occupations of basis state `k`.
    #[inline]
    pub fn state(&self, k: usize) -> &[Occupation] {
        &self.states[k * self.n_sites..(k + 1) * self.n_sites]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[Occupation]> + '_ {
        self.states.chunks_exact(self.n_sites)
    }

    pub fn unrank(&self, k: usize) -> Result<OccupationVector> {
        if k >= self.dimension {
            return Err(domain(format!(
                "index {k} out of range for basis of dimension {}",
                self.dimension
            )));
        }
        Ok(OccupationVector(self.state(k).to_vec()))
    }

    pub fn rank(&self, v: &OccupationVector) -> Result<usize> {
        self.rank_slice(v.as_slice())
    }

    /// Validating rank of a raw occupation slice.
    pub fn rank_slice(&self, occupations: &[Occupation]) -> Result<usize> {
        if occupations.len() != self.n_sites {
            return Err(domain(format!(
                "occupation vector has {} sites, basis has {}",
                occupations.len(),
                self.n_sites
            )));
        }
        let total: usize = occupations.iter().map(|&n| n as usize).sum();
        if total != self.n_particles {
            return Err(domain(format!(
                "occupation vector holds {total} particles, basis holds {}",
                self.n_particles
            )));
        }
        Ok(self.rank_unchecked(occupations))
    }

    /// Rank without validation. `occupations` must be a member of the basis.
    #[inline]
    pub fn rank_unchecked(&self, occupations: &[Occupation]) -> usize {
        let cols = self.n_sites + 1;
        let mut remaining = self.n_particles;
        let mut rank = 0u64;
        for (i, &v) in occupations[..self.n_sites - 1].iter().enumerate() {
            let v = v as usize;
            if remaining > v {
                let k = self.n_sites - 1 - i;
                rank += self.binom[(remaining - v - 1 + k) * cols + k];
            }
            remaining -= v;
        }
        rank as usize
    }

    /// Index of `(1, ..., 1)` when `N = M`.
    pub fn unit_filling_index(&self) -> Option<usize> {
        (self.n_particles == self.n_sites)
            .then(|| self.rank_unchecked(&vec![1; self.n_sites]))
    }

    /// Debug dump: header `N M D`, then one space-separated occupation vector per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.n_particles, self.n_sites, self.dimension)?;
        for s in self.iter() {
            let mut first = true;
            for n in s {
                if !first {
                    write!(w, " ")?;
                }
                write!(w, "{n}")?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Step to the next occupation vector in descending lexicographic order.
fn advance_descending(v: &mut [Occupation]) {
    let m = v.len();
    // rightmost non-empty site that still has a site to its right
    let i = (0..m - 1).rev().find(|&i| v[i] > 0).expect("already at the last state");
    let tail: Occupation = v[i + 1..].iter().sum();
    v[i] -= 1;
    v[i + 1] = tail + 1;
    for x in &mut v[i + 2..] {
        *x = 0;
    }
}

/// Weakly decreasing positive parts summing to `N`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(domain("partition parts must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self(parts))
    }

    /// Nonzero occupations sorted in decreasing order.
    pub fn from_occupations(occupations: &[Occupation]) -> Self {
        let mut parts: Vec<usize> = occupations
            .iter()
            .filter(|&&n| n > 0)
            .map(|&n| n as usize)
            .collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// How many sites carry occupation `j` once the partition is padded with
    /// zeros to `n_sites` entries.
    pub fn multiplicity(&self, j: usize, n_sites: usize) -> usize {
        if j == 0 {
            n_sites.saturating_sub(self.0.len())
        } else {
            self.0.iter().filter(|&&p| p == j).count()
        }
    }

    /// `Σ p (p - 1)`: on-site interaction energy shared by the whole orbit.
    pub fn interaction_energy(&self) -> usize {
        self.0.iter().map(|&p| p * (p - 1)).sum()
    }

    /// Occupation counts `(occupation, multiplicity)` over `n_sites` sites,
    /// zeros included, in decreasing occupation.
    pub fn multiplicities(&self, n_sites: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &p in &self.0 {
            match out.last_mut() {
                Some((v, c)) if *v == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        let zeros = n_sites.saturating_sub(self.0.len());
        if zeros > 0 {
            out.push((0, zeros));
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `n` into at most `max_parts` parts, in descending
/// lexicographic order: `(4), (3,1), (2,2), (2,1,1), (1,1,1,1)`.
pub fn partitions(n: usize, max_parts: usize) -> Result<Vec<Partition>> {
    if n == 0 || max_parts == 0 {
        return Err(domain("partitions need n >= 1 and max_parts >= 1"));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n.min(max_parts));
    extend_partitions(n, n, max_parts, &mut current, &mut out);
    Ok(out)
}

fn extend_partitions(
    remaining: usize,
    largest: usize,
    parts_left: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if parts_left == 0 {
        return;
    }
    for p in (1..=largest.min(remaining)).rev() {
        // the rest must fit in parts_left - 1 parts of size <= p
        if (remaining - p) > p * (parts_left - 1) {
            break;
        }
        current.push(p);
        extend_partitions(remaining - p, p, parts_left - 1, current, out);
        current.pop();
    }
}

/// Integer partition function `p(n)`, or `None` past `u128`.
pub fn partition_count(n: usize) -> Option<u128> {
    let mut table = vec![0u128; n + 1];
    table[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            table[total] = table[total].checked_add(table[total - part])?;
        }
    }
    Some(table[n])
}

/// Number of distinct occupation vectors on `n_sites` sites whose sorted
/// nonzero entries equal `p`: `M! / Π_k m_k!` with zeros counted.
pub fn orbit_size(p: &Partition, n_sites: usize) -> Result<u128> {
    if p.len() > n_sites {
        return Err(domain(format!(
            "partition {p} has more parts than the {n_sites} available sites"
        )));
    }
    let mut free = n_sites as u128;
    let mut size: u128 = 1;
    for (_, count) in p.multiplicities(n_sites) {
        let c = binomial_u128(free, count as u128)
            .ok_or_else(|| capacity(format!("orbit size of {p} on {n_sites} sites overflows")))?;
        size = size
            .checked_mul(c)
            .ok_or_else(|| capacity(format!("orbit size of {p} on {n_sites} sites overflows")))?;
        free -= count as u128;
    }
    Ok(size)
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}
