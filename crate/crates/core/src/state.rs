//! Real pure states at fixed particle number.
//!
//! A [`QuantumState`] is either a dense amplitude vector aligned with a
//! [`FockBasis`], or a sparse list of configurations written as deviations
//! from unit filling. The sparse form is what the strong-coupling expansion
//! produces; it stays small for lattices whose full basis could never be
//! built.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::basis::{binomial, FockBasis, Occupation, OccupationVector};
use crate::error::{domain, Result};

/// Norm tolerance accepted by [`QuantumState::from_amplitudes`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A configuration near unit filling: the sites whose occupation differs
/// from 1, sorted by site.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Excitation(Vec<(u32, Occupation)>);

impl Excitation {
    /// `(1, 1, ..., 1)`.
    pub fn unit_filling() -> Self {
        Self(Vec::new())
    }

    pub fn from_occupations(occupations: &[Occupation]) -> Self {
        Self(
            occupations
                .iter()
                .enumerate()
                .filter(|(_, &n)| n != 1)
                .map(|(i, &n)| (i as u32, n))
                .collect(),
        )
    }

    pub fn deviations(&self) -> &[(u32, Occupation)] {
        &self.0
    }

    #[inline]
    pub fn occupation(&self, site: usize) -> Occupation {
        match self.0.binary_search_by_key(&(site as u32), |&(s, _)| s) {
            Ok(k) => self.0[k].1,
            Err(_) => 1,
        }
    }

    pub fn set(&mut self, site: usize, occupation: Occupation) {
        let site = site as u32;
        match self.0.binary_search_by_key(&site, |&(s, _)| s) {
            Ok(k) if occupation == 1 => {
                self.0.remove(k);
            }
            Ok(k) => self.0[k].1 = occupation,
            Err(_) if occupation == 1 => {}
            Err(k) => self.0.insert(k, (site, occupation)),
        }
    }

    pub fn to_occupations(&self, n_sites: usize) -> Vec<Occupation> {
        let mut v = vec![1; n_sites];
        for &(s, n) in &self.0 {
            v[s as usize] = n;
        }
        v
    }

    /// `Σ n (n - 1)`; unit-filled sites contribute nothing.
    pub fn interaction_energy(&self) -> f64 {
        self.0
            .iter()
            .map(|&(_, n)| {
                let n = n as f64;
                n * (n - 1.0)
            })
            .sum()
    }

    /// Moves one particle `from -> to`, returning the new configuration and
    /// the bosonic factor `sqrt((n_to + 1) n_from)`.
    pub fn hop(&self, to: usize, from: usize) -> Option<(Excitation, f64)> {
        let n_from = self.occupation(from);
        if n_from == 0 {
            return None;
        }
        let n_to = self.occupation(to);
        let mut next = self.clone();
        next.set(from, n_from - 1);
        next.set(to, n_to + 1);
        Some((next, ((n_to as f64 + 1.0) * n_from as f64).sqrt()))
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (s, n)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}:{n}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Storage {
    Dense {
        basis: Arc<FockBasis>,
        amplitudes: Vec<f64>,
    },
    /// Unit filling only (`N = M`); sorted by configuration, no duplicates.
    Sparse { entries: Vec<(Excitation, f64)> },
}

/// Unit-norm real pure state.
#[derive(Clone, Debug)]
pub struct QuantumState {
    n_particles: usize,
    n_sites: usize,
    pub(crate) storage: Storage,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized (to [`NORM_TOLERANCE`]).
    pub fn from_amplitudes(basis: Arc<FockBasis>, amplitudes: Vec<f64>) -> Result<Self> {
        check_length(&basis, &amplitudes)?;
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self::dense_unchecked(basis, amplitudes))
    }

    /// Normalizes `amplitudes` onto `basis`.
    pub fn normalized(basis: Arc<FockBasis>, mut amplitudes: Vec<f64>) -> Result<Self> {
        check_length(&basis, &amplitudes)?;
        let norm = l2(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self::dense_unchecked(basis, amplitudes))
    }

    pub(crate) fn dense_unchecked(basis: Arc<FockBasis>, amplitudes: Vec<f64>) -> Self {
        Self {
            n_particles: basis.n_particles(),
            n_sites: basis.n_sites(),
            storage: Storage::Dense { basis, amplitudes },
        }
    }

    /// Sparse unit-filling state from `(configuration, amplitude)` pairs;
    /// duplicates are summed and the result normalized.
    pub fn sparse_unit_filling(
        n_sites: usize,
        entries: impl IntoIterator<Item = (Excitation, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(Excitation, f64)> = entries.into_iter().collect();
        for (e, _) in &entries {
            if e.0.last().is_some_and(|&(s, _)| s as usize >= n_sites) {
                return Err(domain(format!("configuration {e} exceeds {n_sites} sites")));
            }
            let total: isize = e.0.iter().map(|&(_, n)| n as isize - 1).sum();
            if total != 0 {
                return Err(domain(format!("configuration {e} is not at unit filling")));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Excitation, f64)> = Vec::with_capacity(entries.len());
        for (e, a) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += a,
                _ => merged.push((e, a)),
            }
        }
        let norm = merged.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalize a zero or non-finite state"));
        }
        merged.iter_mut().for_each(|(_, a)| *a /= norm);
        Ok(Self {
            n_particles: n_sites,
            n_sites,
            storage: Storage::Sparse { entries: merged },
        })
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    pub fn basis(&self) -> Option<&Arc<FockBasis>> {
        match &self.storage {
            Storage::Dense { basis, .. } => Some(basis),
            Storage::Sparse { .. } => None,
        }
    }

    /// Dense amplitudes aligned with [`QuantumState::basis`].
    pub fn amplitudes(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense { amplitudes, .. } => Some(amplitudes),
            Storage::Sparse { .. } => None,
        }
    }

    /// Stored components: basis size for dense states, entry count otherwise.
    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::Dense { amplitudes, .. } => amplitudes.len(),
            Storage::Sparse { entries } => entries.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm(&self) -> f64 {
        match &self.storage {
            Storage::Dense { amplitudes, .. } => l2(amplitudes),
            Storage::Sparse { entries } => entries.iter().map(|(_, a)| a * a).sum::<f64>().sqrt(),
        }
    }

    /// Amplitude of one configuration.
    pub fn amplitude(&self, v: &OccupationVector) -> Result<f64> {
        if v.n_sites() != self.n_sites || v.total() != self.n_particles {
            return Err(domain(format!("{v} does not belong to this state's space")));
        }
        Ok(match &self.storage {
            Storage::Dense { basis, amplitudes } => amplitudes[basis.rank_unchecked(v.as_slice())],
            Storage::Sparse { entries } => {
                let key = Excitation::from_occupations(v.as_slice());
                entries
                    .binary_search_by(|(e, _)| e.cmp(&key))
                    .map(|k| entries[k].1)
                    .unwrap_or(0.0)
            }
        })
    }

    /// `(occupations, amplitude)` for every stored component.
    pub fn components(&self) -> Vec<(Vec<Occupation>, f64)> {
        match &self.storage {
            Storage::Dense { basis, amplitudes } => basis
                .iter()
                .zip(amplitudes)
                .map(|(s, &a)| (s.to_vec(), a))
                .collect(),
            Storage::Sparse { entries } => entries
                .iter()
                .map(|(e, a)| (e.to_occupations(self.n_sites), *a))
                .collect(),
        }
    }

    /// Same state as a dense vector on `basis`.
    pub fn to_dense(&self, basis: &Arc<FockBasis>) -> Result<QuantumState> {
        if basis.n_particles() != self.n_particles || basis.n_sites() != self.n_sites {
            return Err(domain("basis does not match the state's (N, M)"));
        }
        match &self.storage {
            Storage::Dense { basis: own, amplitudes } => {
                if Arc::ptr_eq(own, basis) {
                    Ok(self.clone())
                } else {
                    Ok(Self::dense_unchecked(basis.clone(), amplitudes.clone()))
                }
            }
            Storage::Sparse { entries } => {
                let mut amplitudes = vec![0.0; basis.dimension()];
                for (e, a) in entries {
                    amplitudes[basis.rank_unchecked(&e.to_occupations(self.n_sites))] = *a;
                }
                Ok(Self::dense_unchecked(basis.clone(), amplitudes))
            }
        }
    }

    /// Dense amplitudes: one value per line, in basis order.
    pub fn write_amplitudes<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match &self.storage {
            Storage::Dense { amplitudes, .. } => {
                for a in amplitudes {
                    writeln!(w, "{a:.16e}")?;
                }
                Ok(())
            }
            Storage::Sparse { .. } => Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "sparse state has no basis-ordered amplitude list; densify first",
            )),
        }
    }
}

fn check_length(basis: &FockBasis, amplitudes: &[f64]) -> Result<()> {
    if amplitudes.len() != basis.dimension() {
        return Err(domain(format!(
            "{} amplitudes for a basis of dimension {}",
            amplitudes.len(),
            basis.dimension()
        )));
    }
    Ok(())
}

pub(crate) fn l2(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Phase-coherent superfluid `(Σ_i b†_i / √M)^N |0> / √N!`, with amplitudes
/// `sqrt(N! / Π n_i!) / M^{N/2}`.
pub fn build_sf_state(basis: &Arc<FockBasis>) -> Result<QuantumState> {
    let n = basis.n_particles();
    let m = basis.n_sites() as f64;
    let scale = m.powi(-(n as i32));
    let mut amplitudes = Vec::with_capacity(basis.dimension());
    for s in basis.iter() {
        // multinomial as a product of binomials, exact while it fits in f64
        let mut remaining = n as u64;
        let mut weight = 1.0;
        for &k in s {
            weight *= binomial(remaining, k as u64).map(|b| b as f64).unwrap_or(f64::INFINITY);
            remaining -= k as u64;
        }
        amplitudes.push((weight * scale).sqrt());
    }
    if amplitudes.iter().any(|a| !a.is_finite()) {
        return Err(domain("superfluid amplitudes overflow"));
    }
    QuantumState::normalized(basis.clone(), amplitudes)
}

/// Mott insulator `|1, 1, ..., 1>`; requires `N = M`.
pub fn build_mi_state(basis: &Arc<FockBasis>) -> Result<QuantumState> {
    let idx = basis.unit_filling_index().ok_or_else(|| {
        domain(format!(
            "Mott state needs N = M, got N={} M={}",
            basis.n_particles(),
            basis.n_sites()
        ))
    })?;
    let mut amplitudes = vec![0.0; basis.dimension()];
    amplitudes[idx] = 1.0;
    Ok(QuantumState::dense_unchecked(basis.clone(), amplitudes))
}
