//! Partition-indexed one-site reduced state for permutation-symmetric states.
//!
//! On the complete graph the ground state is invariant under site
//! permutations, so every occupation vector in one orbit (same sorted
//! occupations) carries the same amplitude `α_p`. The one-site distribution
//! then only needs one coefficient per integer partition of `N`:
//!
//! ```text
//! p_j = Σ_p α_p² · C(p, j),    C(p, j) = orbit(p) · m_j(p) / M
//! ```
//!
//! where `m_j(p)` counts sites with occupation `j` (zeros included). `C(p, j)`
//! is the number of orbit members whose site 0 holds `j` particles: fixing
//! site 0 at `j` leaves the multiset with one fewer `j` on `M - 1` sites.
//! For `N = M = 10` that is 42 coefficients instead of 92378 amplitudes.

use std::collections::BTreeMap;

use crate::basis::{orbit_size, partitions, Partition};
use crate::entanglement::ReducedDensityMatrix;
use crate::error::{domain, Error, Result};
use crate::state::QuantumState;

/// Orbit amplitudes above this spread are rejected as asymmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricStateCoefficients {
    n_particles: usize,
    n_sites: usize,
    /// Partitions of `N` into at most `M` parts, descending lexicographic.
    partitions: Vec<Partition>,
    /// Shared amplitude of each orbit.
    alphas: Vec<f64>,
}

impl SymmetricStateCoefficients {
    pub fn new(n_particles: usize, n_sites: usize, alphas: Vec<f64>) -> Result<Self> {
        let partitions = all_partitions(n_particles, n_sites)?;
        if alphas.len() != partitions.len() {
            return Err(domain(format!(
                "{} coefficients for {} partitions",
                alphas.len(),
                partitions.len()
            )));
        }
        Ok(Self {
            n_particles,
            n_sites,
            partitions,
            alphas,
        })
    }

    /// Rescales so that `Σ_p orbit(p) α_p² = 1`.
    pub fn normalized(n_particles: usize, n_sites: usize, alphas: Vec<f64>) -> Result<Self> {
        let mut c = Self::new(n_particles, n_sites, alphas)?;
        let norm = c.norm_squared()?.sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(domain("cannot normalize zero coefficients"));
        }
        c.alphas.iter_mut().for_each(|a| *a /= norm);
        Ok(c)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn alpha(&self, p: &Partition) -> Option<f64> {
        self.partitions.iter().position(|q| q == p).map(|k| self.alphas[k])
    }

    /// `Σ_p orbit(p) α_p²`.
    pub fn norm_squared(&self) -> Result<f64> {
        let mut total = 0.0;
        for (p, a) in self.partitions.iter().zip(&self.alphas) {
            total += orbit_size(p, self.n_sites)? as f64 * a * a;
        }
        Ok(total)
    }

    /// Expands back to a dense state on `basis`.
    pub fn to_state(&self, basis: &std::sync::Arc<crate::basis::FockBasis>) -> Result<QuantumState> {
        if basis.n_particles() != self.n_particles || basis.n_sites() != self.n_sites {
            return Err(domain("basis does not match the coefficients' (N, M)"));
        }
        let lookup: BTreeMap<&Partition, f64> =
            self.partitions.iter().zip(self.alphas.iter().copied()).collect();
        let amplitudes = basis
            .iter()
            .map(|s| lookup[&Partition::from_occupations(s)])
            .collect();
        QuantumState::from_amplitudes(basis.clone(), amplitudes)
    }

    /// Whether `α²` never grows with orbit interaction energy `Σ p(p-1)`:
    /// every orbit at a lower energy level outweighs every orbit at a higher one.
    pub fn hierarchy_holds(&self) -> bool {
        let mut levels: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for (p, a) in self.partitions.iter().zip(&self.alphas) {
            let w = a * a;
            let e = levels.entry(p.interaction_energy()).or_insert((w, w));
            e.0 = e.0.min(w);
            e.1 = e.1.max(w);
        }
        let levels: Vec<(f64, f64)> = levels.into_values().collect();
        levels.windows(2).all(|pair| pair[0].0 >= pair[1].1)
    }
}

fn all_partitions(n_particles: usize, n_sites: usize) -> Result<Vec<Partition>> {
    if n_particles == 0 {
        return Ok(vec![Partition::new(vec![])?]);
    }
    partitions(n_particles, n_sites)
}

/// Reads off the orbit amplitudes of a permutation-symmetric state.
///
/// Fails with [`Error::Asymmetric`] naming the first orbit whose amplitudes
/// spread by more than [`SYMMETRY_TOLERANCE`]. Orbit members a sparse state
/// does not store count as zero amplitude.
pub fn project_to_symmetric(psi: &QuantumState) -> Result<SymmetricStateCoefficients> {
    let n = psi.n_particles();
    let m = psi.n_sites();
    // partition -> (representative, min, max, members seen)
    let mut seen: BTreeMap<Partition, (f64, f64, f64, u128)> = BTreeMap::new();
    for (occ, a) in psi.components() {
        let p = Partition::from_occupations(&occ);
        let e = seen.entry(p).or_insert((a, a, a, 0));
        e.1 = e.1.min(a);
        e.2 = e.2.max(a);
        e.3 += 1;
    }
    let partitions = all_partitions(n, m)?;
    let mut alphas = Vec::with_capacity(partitions.len());
    for p in &partitions {
        let size = orbit_size(p, m)?;
        let (rep, lo, hi) = match seen.get(p) {
            Some(&(rep, lo, hi, count)) if count == size => (rep, lo, hi),
            Some(&(rep, lo, hi, _)) => (rep, lo.min(0.0), hi.max(0.0)),
            None => (0.0, 0.0, 0.0),
        };
        let spread = hi - lo;
        if spread > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric {
                partition: p.clone(),
                spread,
            });
        }
        alphas.push(rep);
    }
    Ok(SymmetricStateCoefficients {
        n_particles: n,
        n_sites: m,
        partitions,
        alphas,
    })
}

/// `C(p, j)` for `j = 0..=N`: orbit members with `j` particles on site 0.
fn first_site_counts(p: &Partition, n_sites: usize, n_particles: usize) -> Result<Vec<f64>> {
    let size = orbit_size(p, n_sites)?;
    let mut counts = vec![0.0; n_particles + 1];
    for (occupation, mult) in p.multiplicities(n_sites) {
        // exact: orbit · m_j / M = (M-1)! / (Π m'!)
        counts[occupation] = (size * mult as u128 / n_sites as u128) as f64;
    }
    Ok(counts)
}

fn one_site_distribution(coeffs: &SymmetricStateCoefficients) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = coeffs.n_particles;
    let mut p = vec![0.0; n + 1];
    let mut table = Vec::with_capacity(coeffs.partitions.len());
    for (part, a) in coeffs.partitions.iter().zip(&coeffs.alphas) {
        let c = first_site_counts(part, coeffs.n_sites, n)?;
        for (pj, cj) in p.iter_mut().zip(&c) {
            *pj += a * a * cj;
        }
        table.push(c);
    }
    Ok((p, table))
}

/// One-site reduced state (on site 0) assembled from orbit coefficients
/// alone, without touching the full basis.
pub fn reduced_one_site_from_partitions(
    coeffs: &SymmetricStateCoefficients,
    n_sites: usize,
) -> Result<ReducedDensityMatrix> {
    if n_sites != coeffs.n_sites {
        return Err(domain(format!(
            "coefficients describe {} sites, asked for {n_sites}",
            coeffs.n_sites
        )));
    }
    let (p, _) = one_site_distribution(coeffs)?;
    Ok(ReducedDensityMatrix::one_site(0, &p))
}

/// `∂S/∂λ = -2 d/(d-1) Σ_j p_j ∂p_j/∂λ` with
/// `∂p_j/∂λ = Σ_p 2 α_p (∂α_p/∂λ) C(p, j)` and `d = N + 1`.
///
/// `dalphas` is aligned with `coeffs.partitions()`.
pub fn entropy_derivative_terms(coeffs: &SymmetricStateCoefficients, dalphas: &[f64]) -> Result<f64> {
    if dalphas.len() != coeffs.alphas.len() {
        return Err(domain(format!(
            "{} derivatives for {} coefficients",
            dalphas.len(),
            coeffs.alphas.len()
        )));
    }
    let n = coeffs.n_particles;
    if n == 0 {
        return Ok(0.0);
    }
    let (p, table) = one_site_distribution(coeffs)?;
    let mut dp = vec![0.0; n + 1];
    for ((a, da), c) in coeffs.alphas.iter().zip(dalphas).zip(&table) {
        for (dpj, cj) in dp.iter_mut().zip(c) {
            *dpj += 2.0 * a * da * cj;
        }
    }
    let d = (n + 1) as f64;
    let inner: f64 = p.iter().zip(&dp).map(|(x, y)| x * y).sum();
    Ok(-2.0 * d / (d - 1.0) * inner)
}

/// Central difference `(plus - minus) / (2h)` of two coefficient sets.
pub fn central_difference(
    minus: &SymmetricStateCoefficients,
    plus: &SymmetricStateCoefficients,
    h: f64,
) -> Result<Vec<f64>> {
    if minus.partitions != plus.partitions {
        return Err(domain("coefficient sets index different partitions"));
    }
    Ok(minus
        .alphas
        .iter()
        .zip(&plus.alphas)
        .map(|(a, b)| (b - a) / (2.0 * h))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::FockBasis;
    use crate::entanglement::{linear_entropy, partial_trace};
    use crate::operators::{assemble_hamiltonian, Geometry, HamiltonianParams};
    use crate::solvers::solve_dense;
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

    fn part(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mott_coefficients() {
        let c = project_to_symmetric(&build_mi_state(&basis(4)).unwrap()).unwrap();
        assert_eq!(c.alpha(&part(&[1, 1, 1, 1])), Some(1.0));
        assert!(c
            .partitions()
            .iter()
            .zip(c.alphas())
            .all(|(p, &a)| a == 0.0 || *p == part(&[1, 1, 1, 1])));
        let rho = reduced_one_site_from_partitions(&c, 4).unwrap();
        assert_eq!(rho.occupation_probabilities().unwrap(), vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(c.hierarchy_holds());
    }

    #[test]
    fn superfluid_three_sites() {
        let c = project_to_symmetric(&build_sf_state(&basis(3)).unwrap()).unwrap();
        let r27 = 27f64.sqrt();
        assert!((c.alpha(&part(&[1, 1, 1])).unwrap() - 6f64.sqrt() / r27).abs() < 1e-15);
        assert!((c.alpha(&part(&[2, 1])).unwrap() - 3f64.sqrt() / r27).abs() < 1e-15);
        assert!((c.alpha(&part(&[3])).unwrap() - 1.0 / r27).abs() < 1e-15);
        assert!((c.norm_squared().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn superfluid_two_sites_marginal() {
        let c = project_to_symmetric(&build_sf_state(&basis(2)).unwrap()).unwrap();
        let p = reduced_one_site_from_partitions(&c, 2)
            .unwrap()
            .occupation_probabilities()
            .unwrap();
        for (x, y) in p.iter().zip([0.25, 0.5, 0.25]) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn complete_graph_symmetric_chain_not() {
        assert!(project_to_symmetric(&ground(4, 0.1, Geometry::complete_graph(4))).is_ok());
        let err = project_to_symmetric(&ground(4, 0.1, Geometry::chain_periodic(4))).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { .. }));
    }

    #[test]
    fn first_site_counts_match_enumeration() {
        for n in 1..=6 {
            let b = basis(n);
            for p in partitions(n, n).unwrap() {
                let c = first_site_counts(&p, n, n).unwrap();
                let mut brute = vec![0.0; n + 1];
                for s in b.iter().filter(|s| Partition::from_occupations(s) == p) {
                    brute[s[0] as usize] += 1.0;
                }
                assert_eq!(c, brute, "{p}");
            }
        }
    }

    #[test]
    fn round_trip_through_full_state() {
        let psi = ground(5, 0.2, Geometry::complete_graph(5));
        let c = project_to_symmetric(&psi).unwrap();
        let back = c.to_state(psi.basis().unwrap()).unwrap();
        for (x, y) in back.amplitudes().unwrap().iter().zip(psi.amplitudes().unwrap()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (lambda, h) = (0.1, 1e-4);
        let g = || Geometry::complete_graph(3);
        let c0 = project_to_symmetric(&ground(3, lambda, g())).unwrap();
        let cm = project_to_symmetric(&ground(3, lambda - h, g())).unwrap();
        let cp = project_to_symmetric(&ground(3, lambda + h, g())).unwrap();
        let da = central_difference(&cm, &cp, h).unwrap();
        let analytic = entropy_derivative_terms(&c0, &da).unwrap();
        let s = |c: &SymmetricStateCoefficients| {
            linear_entropy(&reduced_one_site_from_partitions(c, 3).unwrap()).unwrap()
        };
        let fd = (s(&cp) - s(&cm)) / (2.0 * h);
        assert!((analytic - fd).abs() < 1e-6, "{analytic} vs {fd}");

        let mott = project_to_symmetric(&build_mi_state(&basis(3)).unwrap()).unwrap();
        assert_eq!(entropy_derivative_terms(&mott, &[0.0; 3]).unwrap(), 0.0);
        assert!(entropy_derivative_terms(&mott, &[0.0]).is_err());
    }

    #[test]
    fn derivative_positive_in_entering_superfluid() {
        for n in [3, 4] {
            for i in 1..10 {
                let lambda = 0.05 * i as f64;
                let h = 1e-4;
                let g = || Geometry::complete_graph(n);
                let c0 = project_to_symmetric(&ground(n, lambda, g())).unwrap();
                let cm = project_to_symmetric(&ground(n, lambda - h, g())).unwrap();
                let cp = project_to_symmetric(&ground(n, lambda + h, g())).unwrap();
                let da = central_difference(&cm, &cp, h).unwrap();
                assert!(entropy_derivative_terms(&c0, &da).unwrap() > 0.0, "N={n} λ={lambda}");
            }
        }
    }

    #[test]
    fn matches_partial_trace_on_ground_states() {
        for n in 2..=6 {
            for lambda in [0.05, 0.1, 0.3] {
                let psi = ground(n, lambda, Geometry::complete_graph(n));
                let c = project_to_symmetric(&psi).unwrap();
                let a = reduced_one_site_from_partitions(&c, n).unwrap();
                let b = partial_trace(&psi, &[0]).unwrap();
                let pa = a.occupation_probabilities().unwrap();
                let pb = b.occupation_probabilities().unwrap();
                for (x, y) in pa.iter().zip(&pb) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_validation() {
        assert!(SymmetricStateCoefficients::new(3, 3, vec![1.0]).is_err());
        assert!(SymmetricStateCoefficients::normalized(3, 3, vec![0.0; 3]).is_err());
        let c = SymmetricStateCoefficients::normalized(3, 3, vec![1.0, 1.0, 1.0]).unwrap();
        assert!((c.norm_squared().unwrap() - 1.0).abs() < 1e-15);
        assert!(reduced_one_site_from_partitions(&c, 4).is_err());
    }
}
