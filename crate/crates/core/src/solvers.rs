//! Ground states: exact (dense or Lanczos) and strong-coupling perturbative.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::FockBasis;
use crate::error::{capacity, domain, Error, Result};
use crate::linalg::{symmetric_eigen, tridiagonal_eigen};
use crate::operators::{HamiltonianParams, SparseHermitianOperator};
use crate::state::{l2, Excitation, QuantumState, Storage};

pub const DEFAULT_DENSE_CAP: usize = 4000;

/// Seed for the Lanczos start vector when no Mott configuration exists.
const LANCZOS_SEED: u64 = 0x6d6f_7474;

/// Perturbative residuals are evaluated only when `entries x hops` stays below this.
const SPARSE_RESIDUAL_BUDGET: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Dense,
    Lanczos,
    Perturb1,
    Perturb2,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dense => "dense",
            Method::Lanczos => "lanczos",
            Method::Perturb1 => "perturb1",
            Method::Perturb2 => "perturb2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub state: QuantumState,
    /// Units of `U`.
    pub energy: f64,
    pub method: Method,
    /// `‖H ψ - E ψ‖`. `None` when it was too expensive to evaluate (large
    /// perturbative states).
    pub residual: Option<f64>,
    /// Lanczos steps taken; zero for the other methods.
    pub iterations: usize,
}

impl GroundStateResult {
    /// Header `N M D energy method`, then one amplitude per line in basis order.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.state.amplitudes().map(|a| a.len()).ok_or_else(|| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "state dump needs a dense state",
            )
        })?;
        writeln!(
            w,
            "{} {} {} {:.16e} {}",
            self.state.n_particles(),
            self.state.n_sites(),
            d,
            self.energy,
            self.method
        )?;
        self.state.write_amplitudes(w)
    }
}

/// Flip the sign so the largest-magnitude amplitude is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm(h: &SparseHermitianOperator, v: &[f64], energy: f64) -> Result<f64> {
    let hv = h.apply(v)?;
    Ok(hv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - energy * b).powi(2))
        .sum::<f64>()
        .sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_dense(h: &SparseHermitianOperator) -> Result<GroundStateResult> {
    solve_dense_with_cap(h, DEFAULT_DENSE_CAP)
}

/// Lowest eigenpair of the densified operator.
pub fn solve_dense_with_cap(h: &SparseHermitianOperator, cap: usize) -> Result<GroundStateResult> {
    let d = h.dimension();
    if d > cap {
        return Err(capacity(format!(
            "dimension {d} exceeds the dense solver cap {cap}; use lanczos"
        )));
    }
    let eig = symmetric_eigen(&h.densify(), d);
    let energy = eig.values[0];
    let mut v = eig.vector(0).to_vec();
    fix_sign(&mut v);
    let residual = residual_norm(h, &v, energy)?;
    Ok(GroundStateResult {
        state: QuantumState::dense_unchecked(h.basis().clone(), v),
        energy,
        method: Method::Dense,
        residual: Some(residual),
        iterations: 0,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Converged when `‖Hv - Ev‖ <= tol · max(1, |E|)`.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

/// Lowest eigenpair by Lanczos with full reorthogonalization.
///
/// Starts from the Mott configuration when the basis has one, otherwise from
/// a fixed-seed random vector. If the Ritz estimate converges but the true
/// residual does not, the iteration restarts from the Ritz vector; all
/// restarts draw from the same `max_iter` budget.
pub fn solve_lanczos(h: &SparseHermitianOperator, opts: LanczosOptions) -> Result<GroundStateResult> {
    let d = h.dimension();
    if d < 2 {
        return Err(domain("lanczos needs dimension >= 2; use the dense solver"));
    }
    let basis = h.basis();
    let mut start = vec![0.0; d];
    if let Some(idx) = basis.unit_filling_index() {
        start[idx] = 1.0;
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);
        start.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        let n = l2(&start);
        start.iter_mut().for_each(|x| *x /= n);
    }

    let mut used = 0;
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    while used < opts.max_iter {
        let (ritz, steps) = lanczos_pass(h, &start, opts, opts.max_iter - used)?;
        used += steps;
        let mut v = ritz;
        let norm = l2(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        let hv = h.apply(&v)?;
        let energy = dot(&v, &hv);
        let residual = hv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - energy * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let better = best.as_ref().is_none_or(|b| residual < b.2);
        if residual <= opts.tol * energy.abs().max(1.0) {
            fix_sign(&mut v);
            return Ok(GroundStateResult {
                state: QuantumState::dense_unchecked(basis.clone(), v),
                energy,
                method: Method::Lanczos,
                residual: Some(residual),
                iterations: used,
            });
        }
        start = v.clone();
        if better {
            best = Some((v, energy, residual));
        }
    }
    let (mut v, energy, residual) = best.expect("at least one pass ran");
    fix_sign(&mut v);
    Err(Error::NoConvergence {
        iterations: used,
        residual,
        best: Box::new(GroundStateResult {
            state: QuantumState::dense_unchecked(basis.clone(), v),
            energy,
            method: Method::Lanczos,
            residual: Some(residual),
            iterations: used,
        }),
    })
}

/// One Lanczos run from a unit vector. Returns the lowest Ritz vector and the
/// number of matrix-vector products spent.
fn lanczos_pass(
    h: &SparseHermitianOperator,
    start: &[f64],
    opts: LanczosOptions,
    budget: usize,
) -> Result<(Vec<f64>, usize)> {
    let d = h.dimension();
    let max_steps = budget.min(d).max(1);
    let mut q: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; d];

    for j in 0..max_steps {
        h.apply_into(&q[j], &mut w)?;
        let alpha = dot(&q[j], &w);
        alphas.push(alpha);
        // classical Gram-Schmidt twice against every stored vector
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = l2(&w);
        let last = j + 1 == max_steps;
        let breakdown = beta <= 1e-14 * alpha.abs().max(1.0);
        let check = j < 20 || j % 4 == 0 || last || breakdown;
        if check {
            let t = tridiagonal_eigen(&alphas, &betas);
            let theta = t.values[0];
            let s = t.vector(0);
            let estimate = (beta * s[j]).abs();
            if breakdown || last || estimate <= 0.1 * opts.tol * theta.abs().max(1.0) {
                let mut ritz = vec![0.0; d];
                for (qi, &si) in q.iter().zip(s) {
                    ritz.iter_mut().zip(qi).for_each(|(x, y)| *x += si * y);
                }
                return Ok((ritz, j + 1));
            }
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        q.push(next);
    }
    unreachable!("the last step always returns")
}

/// `⟨ψ|H|ψ⟩`.
pub fn energy_expectation(h: &SparseHermitianOperator, psi: &QuantumState) -> Result<f64> {
    let basis = h.basis();
    if psi.n_particles() != basis.n_particles() || psi.n_sites() != basis.n_sites() {
        return Err(domain("state and operator live on different bases"));
    }
    let dense;
    let amps = match psi.amplitudes() {
        Some(a) => a,
        None => {
            dense = psi.to_dense(basis)?;
            dense.amplitudes().expect("dense")
        }
    };
    let hv = h.apply(amps)?;
    Ok(dot(amps, &hv))
}

/// Rayleigh-Schrödinger expansion about `|1,1,...,1>` with `H0 = Σ n(n-1)`
/// and `V = -λ · hopping`, on a dense basis.
pub fn perturbative_state(
    basis: &Arc<FockBasis>,
    params: &HamiltonianParams,
    order: u8,
) -> Result<GroundStateResult> {
    if basis.n_particles() != basis.n_sites() {
        return Err(domain(format!(
            "perturbation theory needs N = M, got N={} M={}",
            basis.n_particles(),
            basis.n_sites()
        )));
    }
    let mut res = perturbative_state_sparse(basis.n_sites(), params, order)?;
    res.state = res.state.to_dense(basis)?;
    Ok(res)
}

/// As [`perturbative_state`], but never touches the full basis: only
/// configurations within `order` hops of the Mott state are generated.
///
/// Energy is the expansion truncated at the same order (`0` at first order,
/// `-Σ_k |V_k0|² / E_k` at second).
pub fn perturbative_state_sparse(
    n_sites: usize,
    params: &HamiltonianParams,
    order: u8,
) -> Result<GroundStateResult> {
    let method = match order {
        1 => Method::Perturb1,
        2 => Method::Perturb2,
        _ => return Err(domain(format!("perturbation order must be 1 or 2, got {order}"))),
    };
    let geometry = params.geometry();
    if geometry.n_sites() != n_sites || n_sites == 0 {
        return Err(domain(format!(
            "geometry has {} sites, lattice has {n_sites}",
            geometry.n_sites()
        )));
    }
    let lambda = params.lambda();
    let mott = Excitation::unit_filling();

    // first order: c_k = V_k0 / (0 - E_k)
    let mut coupling: BTreeMap<Excitation, f64> = BTreeMap::new();
    for (to, from) in geometry.directed_hops() {
        if let Some((k, amp)) = mott.hop(to, from) {
            *coupling.entry(k).or_insert(0.0) += -lambda * amp;
        }
    }
    let mut first: BTreeMap<Excitation, f64> = BTreeMap::new();
    let mut energy = 0.0;
    for (k, v) in &coupling {
        let c = -v / k.interaction_energy();
        energy += v * c;
        first.insert(k.clone(), c);
    }
    if order == 1 {
        energy = 0.0;
    }

    // second order: c_k += -Σ_m V_km c_m / E_k  (V_00 = 0, k ≠ 0)
    let mut second: BTreeMap<Excitation, f64> = BTreeMap::new();
    if order == 2 {
        for (m, cm) in &first {
            for (to, from) in geometry.directed_hops() {
                if let Some((k, amp)) = m.hop(to, from) {
                    if k == mott {
                        continue;
                    }
                    let vkm = -lambda * amp;
                    let ek = k.interaction_energy();
                    *second.entry(k).or_insert(0.0) += -vkm * cm / ek;
                }
            }
        }
    }

    let mut total = first;
    for (k, c) in second {
        *total.entry(k).or_insert(0.0) += c;
    }
    let entries = std::iter::once((mott, 1.0)).chain(total);
    let state = QuantumState::sparse_unit_filling(n_sites, entries)?;
    let residual = sparse_residual(&state, params, energy);
    Ok(GroundStateResult {
        state,
        energy,
        method,
        residual,
        iterations: 0,
    })
}

/// `‖(H - E)ψ‖` for a sparse unit-filling state, applying `H` matrix-free.
fn sparse_residual(state: &QuantumState, params: &HamiltonianParams, energy: f64) -> Option<f64> {
    let Storage::Sparse { entries } = &state.storage else {
        return None;
    };
    let hops = 2 * params.geometry().edges().len();
    if entries.len().saturating_mul(hops) > SPARSE_RESIDUAL_BUDGET {
        return None;
    }
    let lambda = params.lambda();
    let mut out: BTreeMap<Excitation, f64> = BTreeMap::new();
    for (e, a) in entries {
        *out.entry(e.clone()).or_insert(0.0) += (e.interaction_energy() - energy) * a;
        if lambda != 0.0 {
            for (to, from) in params.geometry().directed_hops() {
                if let Some((k, amp)) = e.hop(to, from) {
                    *out.entry(k).or_insert(0.0) += -lambda * amp * a;
                }
            }
        }
    }
    Some(out.values().map(|x| x * x).sum::<f64>().sqrt())
}
