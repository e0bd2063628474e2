//! `λ` sweeps: per-point ground states and observables, finite-differenced
//! entropy, CSV and SVG output.

mod config;
mod csv;
mod plot;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::FockBasis;
use crate::ccg::{
    central_difference, entropy_derivative_terms, project_to_symmetric,
    reduced_one_site_from_partitions, SymmetricStateCoefficients,
};
use crate::entanglement::{delta_n2, entanglement_report, linear_entropy, PairLabel};
use crate::error::{domain, Error, Result};
use crate::operators::{assemble_hamiltonian, Geometry, HamiltonianParams};
use crate::solvers::{
    perturbative_state_sparse, solve_dense, solve_lanczos, GroundStateResult, LanczosOptions,
    DEFAULT_DENSE_CAP,
};

pub use self::config::{Column, Lattice, SweepConfig, SweepMethod, PERTURBATIVE_LAMBDA_WARNING};
pub use self::csv::{emit_csv, emit_partial_csv, read_csv, write_csv};
pub use self::plot::{emit_plot, write_svg};

/// Step used to differentiate orbit coefficients for `ccg-analytic`.
const COEFFICIENT_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub lambda: f64,
    pub energy: f64,
    pub linear_entropy: f64,
    /// `None` only when an aborted sweep kept a single point.
    pub ds_dlambda: Option<f64>,
    /// `None` when the pair was not requested or the lattice has no such pair.
    pub negativity_nn: Option<f64>,
    pub negativity_nnn: Option<f64>,
    pub delta_n2: f64,
    /// Whether orbit weights decrease with interaction energy; only checked
    /// for complete-graph ground states held in a full basis.
    pub hierarchy: Option<bool>,
}

impl SweepRecord {
    pub fn get(&self, column: Column) -> Option<f64> {
        match column {
            Column::Energy => Some(self.energy),
            Column::LinearEntropy => Some(self.linear_entropy),
            Column::DsDlambda => self.ds_dlambda,
            Column::NegativityNn => self.negativity_nn,
            Column::NegativityNnn => self.negativity_nnn,
            Column::DeltaN2 => Some(self.delta_n2),
        }
    }
}

/// A sweep that stopped at a failing point. `records` holds the points below it.
#[derive(Debug, thiserror::Error)]
#[error("sweep aborted at lambda = {lambda}: {error}")]
pub struct SweepFailure {
    pub records: Vec<SweepRecord>,
    pub lambda: f64,
    pub error: Error,
}

impl SweepFailure {
    fn before_start(error: Error, lambda: f64) -> Self {
        Self {
            records: Vec::new(),
            lambda,
            error,
        }
    }
}

struct Point {
    lambda: f64,
    energy: f64,
    linear_entropy: f64,
    analytic_ds: Option<f64>,
    negativity_nn: Option<f64>,
    negativity_nnn: Option<f64>,
    delta_n2: f64,
    hierarchy: Option<bool>,
}

struct Context<'a> {
    config: &'a SweepConfig,
    geometry: Geometry,
    basis: Option<Arc<FockBasis>>,
}

impl Context<'_> {
    fn ground_state(&self, lambda: f64) -> Result<GroundStateResult> {
        let params = HamiltonianParams::new(lambda, self.geometry.clone())?;
        if let Some(order) = self.config.method.perturbative_order() {
            return perturbative_state_sparse(self.config.n_sites, &params, order);
        }
        let basis = self.basis.as_ref().expect("exact methods build a basis");
        let h = assemble_hamiltonian(basis, &params)?;
        let lanczos = match self.config.method {
            SweepMethod::Lanczos => true,
            SweepMethod::CcgAnalytic => basis.dimension() > DEFAULT_DENSE_CAP,
            _ => false,
        };
        if lanczos {
            solve_lanczos(&h, LanczosOptions::default())
        } else {
            solve_dense(&h)
        }
    }

    fn coefficients(&self, lambda: f64) -> Result<SymmetricStateCoefficients> {
        project_to_symmetric(&self.ground_state(lambda)?.state)
    }

    fn evaluate(&self, lambda: f64) -> Result<Point> {
        let ground = self.ground_state(lambda)?;
        let report = entanglement_report(&ground.state, &self.geometry, &self.config.pairs)?;
        let hierarchy = if self.config.lattice == Lattice::Ccg && ground.state.is_dense() {
            project_to_symmetric(&ground.state).ok().map(|c| c.hierarchy_holds())
        } else {
            None
        };
        let mut point = Point {
            lambda,
            energy: ground.energy,
            linear_entropy: report.linear_entropy,
            analytic_ds: None,
            negativity_nn: report.negativities.get(&PairLabel::Nn).copied(),
            negativity_nnn: report.negativities.get(&PairLabel::Nnn).copied(),
            delta_n2: report.delta_n2,
            hierarchy,
        };
        if self.config.method == SweepMethod::CcgAnalytic {
            let coeffs = project_to_symmetric(&ground.state)?;
            let rho = reduced_one_site_from_partitions(&coeffs, self.config.n_sites)?;
            point.linear_entropy = linear_entropy(&rho)?;
            point.delta_n2 = delta_n2(&rho)?;
            point.hierarchy = Some(coeffs.hierarchy_holds());
            let h = COEFFICIENT_STEP;
            let dalphas = if lambda >= h {
                central_difference(&self.coefficients(lambda - h)?, &self.coefficients(lambda + h)?, h)?
            } else {
                // forward difference, written as a central one over [λ, λ + 2h]
                let ahead = self.coefficients(lambda + 2.0 * h)?;
                central_difference(&coeffs, &ahead, h)?
            };
            point.analytic_ds = Some(entropy_derivative_terms(&coeffs, &dalphas)?);
        }
        Ok(point)
    }
}

fn worker_count(config: &SweepConfig) -> usize {
    config
        .workers
        .or_else(|| std::env::var("MOTTLAB_WORKERS").ok()?.trim().parse().ok())
        .unwrap_or(0)
}

/// Central differences inside, one-sided at the ends.
fn differentiate(lambdas: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    let n = values.len();
    if n < 2 {
        return vec![None; n];
    }
    (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            Some((values[hi] - values[lo]) / (lambdas[hi] - lambdas[lo]))
        })
        .collect()
}

fn assemble_records(points: Vec<Point>) -> Vec<SweepRecord> {
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let entropies: Vec<f64> = points.iter().map(|p| p.linear_entropy).collect();
    let numeric = differentiate(&lambdas, &entropies);
    points
        .into_iter()
        .zip(numeric)
        .map(|(p, ds)| SweepRecord {
            lambda: p.lambda,
            energy: p.energy,
            linear_entropy: p.linear_entropy,
            ds_dlambda: p.analytic_ds.or(ds),
            negativity_nn: p.negativity_nn,
            negativity_nnn: p.negativity_nnn,
            delta_n2: p.delta_n2,
            hierarchy: p.hierarchy,
        })
        .collect()
}

/// Runs every grid point (concurrently) and returns records ordered by `λ`.
///
/// If any point fails, the records strictly below the lowest failing `λ` are
/// returned inside the error.
pub fn run_sweep(config: &SweepConfig) -> std::result::Result<Vec<SweepRecord>, SweepFailure> {
    config
        .validate()
        .map_err(|e| SweepFailure::before_start(e, config.lambda_min))?;
    let basis = match config.method.perturbative_order() {
        Some(_) => None,
        None => Some(Arc::new(
            FockBasis::new(config.n_particles, config.n_sites)
                .map_err(|e| SweepFailure::before_start(e, config.lambda_min))?,
        )),
    };
    let ctx = Context {
        config,
        geometry: config.geometry(),
        basis,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| SweepFailure::before_start(domain(e.to_string()), config.lambda_min))?;
    let grid = config.grid();
    let results: Vec<Result<Point>> =
        pool.install(|| grid.par_iter().map(|&lambda| ctx.evaluate(lambda)).collect());

    let mut points = Vec::with_capacity(results.len());
    for (lambda, r) in grid.iter().zip(results) {
        match r {
            Ok(p) => points.push(p),
            Err(error) => {
                return Err(SweepFailure {
                    records: assemble_records(points),
                    lambda: *lambda,
                    error,
                })
            }
        }
    }
    Ok(assemble_records(points))
}

/// Per-point deviations of a perturbative sweep from the dense one.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub lambda: f64,
    pub energy: f64,
    pub linear_entropy: f64,
    pub delta_n2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub method: SweepMethod,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    fn max_of(&self, f: impl Fn(&ComparisonRow) -> f64) -> f64 {
        self.rows.iter().map(f).fold(0.0, f64::max)
    }

    pub fn max_energy(&self) -> f64 {
        self.max_of(|r| r.energy)
    }

    pub fn max_linear_entropy(&self) -> f64 {
        self.max_of(|r| r.linear_entropy)
    }

    pub fn max_delta_n2(&self) -> f64 {
        self.max_of(|r| r.delta_n2)
    }

    /// Whitespace-aligned table, one row per `λ`, then the maxima.
    pub fn write_table<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# dense vs {}", self.method)?;
        writeln!(w, "{:>10} {:>12} {:>12} {:>12}", "lambda", "|dE|", "|dS|", "|dDN2|")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:>10.4} {:>12.4e} {:>12.4e} {:>12.4e}",
                r.lambda, r.energy, r.linear_entropy, r.delta_n2
            )?;
        }
        writeln!(
            w,
            "{:>10} {:>12.4e} {:>12.4e} {:>12.4e}",
            "max",
            self.max_energy(),
            self.max_linear_entropy(),
            self.max_delta_n2()
        )
    }
}

/// Sweeps the dense solver and `config.method` (a perturbative method) over
/// the same grid and tabulates absolute deviations.
pub fn compare(config: &SweepConfig) -> Result<Comparison> {
    if config.method.perturbative_order().is_none() {
        return Err(domain("compare needs method perturb1 or perturb2"));
    }
    let run = |method| {
        let mut c = config.clone();
        c.method = method;
        run_sweep(&c).map_err(|f| f.error)
    };
    let exact = run(SweepMethod::Dense)?;
    let approx = run(config.method)?;
    let rows = exact
        .iter()
        .zip(&approx)
        .map(|(a, b)| ComparisonRow {
            lambda: a.lambda,
            energy: (a.energy - b.energy).abs(),
            linear_entropy: (a.linear_entropy - b.linear_entropy).abs(),
            delta_n2: (a.delta_n2 - b.delta_n2).abs(),
        })
        .collect();
    Ok(Comparison {
        method: config.method,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, lattice: Lattice, method: SweepMethod) -> SweepConfig {
        SweepConfig {
            n_particles: n,
            n_sites: n,
            lattice,
            method,
            steps: 21,
            workers: Some(2),
            ..SweepConfig::default()
        }
    }

    #[test]
    fn mott_endpoint_every_method() {
        for method in [
            SweepMethod::Dense,
            SweepMethod::Lanczos,
            SweepMethod::Perturb1,
            SweepMethod::Perturb2,
            SweepMethod::CcgAnalytic,
        ] {
            let mut c = config(4, Lattice::Ccg, method);
            c.lambda_max = 0.2;
            c.steps = 3;
            let first = &run_sweep(&c).unwrap()[0];
            assert_eq!(first.lambda, 0.0);
            assert!(first.energy.abs() < 1e-12, "{method}");
            assert!(first.linear_entropy.abs() < 1e-12);
            assert!(first.delta_n2.abs() < 1e-12);
            assert!(first.negativity_nn.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn records_sorted_and_observables_in_range() {
        let records = run_sweep(&config(3, Lattice::Chain, SweepMethod::Dense)).unwrap();
        assert_eq!(records.len(), 21);
        assert!(records.windows(2).all(|w| w[0].lambda < w[1].lambda));
        for r in &records {
            assert!((0.0..=1.0).contains(&r.linear_entropy));
            assert!(r.negativity_nn.unwrap() >= 0.0);
            assert!(r.delta_n2 >= 0.0);
            assert!(r.negativity_nnn.is_none());
            assert!(r.ds_dlambda.unwrap().is_finite());
        }
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let mut c = config(4, Lattice::Chain, SweepMethod::Dense);
        c.workers = Some(1);
        let serial = run_sweep(&c).unwrap();
        c.workers = Some(4);
        assert_eq!(serial, run_sweep(&c).unwrap());
    }

    #[test]
    fn derivative_stencil() {
        let lambdas = [0.0, 0.5, 1.0];
        let d = differentiate(&lambdas, &[0.0, 0.25, 1.0]);
        assert_eq!(d, vec![Some(0.5), Some(1.0), Some(1.5)]);
        assert_eq!(differentiate(&[0.0], &[1.0]), vec![None]);
    }

    #[test]
    fn analytic_derivative_tracks_grid_derivative() {
        let mut c = config(4, Lattice::Ccg, SweepMethod::CcgAnalytic);
        c.steps = 201;
        c.lambda_max = 0.5;
        let analytic = run_sweep(&c).unwrap();
        c.method = SweepMethod::Dense;
        let numeric = run_sweep(&c).unwrap();
        for (a, b) in analytic.iter().zip(&numeric).skip(1).take(198) {
            assert!((a.linear_entropy - b.linear_entropy).abs() < 1e-12);
            assert!((a.ds_dlambda.unwrap() - b.ds_dlambda.unwrap()).abs() < 2e-3);
            assert_eq!(a.hierarchy, b.hierarchy);
        }
    }

    #[test]
    fn failures_keep_earlier_points() {
        // Lanczos needs D >= 2; N = M = 1 has a single state.
        let c = config(1, Lattice::Chain, SweepMethod::Lanczos);
        let err = run_sweep(&c).unwrap_err();
        assert!(err.records.is_empty());
        assert_eq!(err.lambda, 0.0);

        let mut c = config(3, Lattice::Chain, SweepMethod::Dense);
        c.steps = 1;
        assert!(matches!(run_sweep(&c).unwrap_err().error, Error::Domain(_)));
    }

    #[test]
    fn comparison_small_lambda() {
        let mut c = config(2, Lattice::Chain, SweepMethod::Perturb2);
        c.lambda_max = 0.1;
        let cmp = compare(&c).unwrap();
        assert!(cmp.max_linear_entropy() <= 1e-3);
        assert_eq!(cmp.rows[0].energy, 0.0);
        let mut table = Vec::new();
        cmp.write_table(&mut table).unwrap();
        assert_eq!(String::from_utf8(table).unwrap().lines().count(), 2 + 21 + 1);
        c.method = SweepMethod::Dense;
        assert!(compare(&c).is_err());
    }
}
