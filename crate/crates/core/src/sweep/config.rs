use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::basis::fock_dimension;
use crate::entanglement::PairLabel;
use crate::error::{capacity, domain, Error, Result};
use crate::operators::Geometry;
use crate::solvers::DEFAULT_DENSE_CAP;

/// Perturbative sweeps past this `λ` get a warning.
pub const PERTURBATIVE_LAMBDA_WARNING: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lattice {
    /// Periodic chain.
    Chain,
    ChainOpen,
    /// Complete graph: every site hops to every other.
    Ccg,
}

impl Lattice {
    pub fn as_str(self) -> &'static str {
        match self {
            Lattice::Chain => "chain",
            Lattice::ChainOpen => "chain-open",
            Lattice::Ccg => "ccg",
        }
    }

    pub fn geometry(self, n_sites: usize) -> Geometry {
        match self {
            Lattice::Chain => Geometry::chain_periodic(n_sites),
            Lattice::ChainOpen => Geometry::chain_open(n_sites),
            Lattice::Ccg => Geometry::complete_graph(n_sites),
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "chain" => Ok(Lattice::Chain),
            "chain-open" => Ok(Lattice::ChainOpen),
            "ccg" => Ok(Lattice::Ccg),
            other => Err(domain(format!(
                "unknown geometry `{other}` (expected chain, chain-open or ccg)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMethod {
    Dense,
    Lanczos,
    Perturb1,
    Perturb2,
    /// Exact ground state on the complete graph, observables from the orbit
    /// coefficients, `∂S/∂λ` from differentiated coefficients.
    CcgAnalytic,
}

impl SweepMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepMethod::Dense => "dense",
            SweepMethod::Lanczos => "lanczos",
            SweepMethod::Perturb1 => "perturb1",
            SweepMethod::Perturb2 => "perturb2",
            SweepMethod::CcgAnalytic => "ccg-analytic",
        }
    }

    pub fn perturbative_order(self) -> Option<u8> {
        match self {
            SweepMethod::Perturb1 => Some(1),
            SweepMethod::Perturb2 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for SweepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "dense" => Ok(SweepMethod::Dense),
            "lanczos" => Ok(SweepMethod::Lanczos),
            "perturb1" => Ok(SweepMethod::Perturb1),
            "perturb2" => Ok(SweepMethod::Perturb2),
            "ccg-analytic" => Ok(SweepMethod::CcgAnalytic),
            other => Err(domain(format!(
                "unknown method `{other}` (expected dense, lanczos, perturb1, perturb2 or ccg-analytic)"
            ))),
        }
    }
}

/// A record column, named as in the CSV header.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Column {
    Energy,
    LinearEntropy,
    DsDlambda,
    NegativityNn,
    NegativityNnn,
    DeltaN2,
}

impl Column {
    pub const ALL: [Column; 6] = [
        Column::Energy,
        Column::LinearEntropy,
        Column::DsDlambda,
        Column::NegativityNn,
        Column::NegativityNnn,
        Column::DeltaN2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Column::Energy => "energy",
            Column::LinearEntropy => "linear_entropy",
            Column::DsDlambda => "ds_dlambda",
            Column::NegativityNn => "negativity_nn",
            Column::NegativityNnn => "negativity_nnn",
            Column::DeltaN2 => "delta_n2",
        }
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Column {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Column::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| domain(format!("unknown column `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_particles: usize,
    pub n_sites: usize,
    pub lattice: Lattice,
    pub method: SweepMethod,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub pairs: Vec<PairLabel>,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub columns: Vec<Column>,
    /// Concurrent sweep points; `None` falls back to `MOTTLAB_WORKERS`, then
    /// to one per core.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_particles: 3,
            n_sites: 3,
            lattice: Lattice::Chain,
            method: SweepMethod::Dense,
            lambda_min: 0.0,
            lambda_max: 1.0,
            steps: 101,
            pairs: vec![PairLabel::Nn, PairLabel::Nnn],
            csv: None,
            plot: None,
            columns: vec![
                Column::LinearEntropy,
                Column::NegativityNn,
                Column::NegativityNnn,
                Column::DeltaN2,
            ],
            workers: None,
        }
    }
}

fn parse_list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn parse_number<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| domain(format!("`{key}` expects a number, got `{value}`")))
}

impl SweepConfig {
    /// Sets one option by its config-file key. Dashes and underscores are
    /// interchangeable (`lambda-min`, `lambda_min`). `n` sets both N and M.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "n" => {
                self.n_particles = parse_number(&key, value)?;
                self.n_sites = self.n_particles;
            }
            "n_particles" => self.n_particles = parse_number(&key, value)?,
            "m" | "n_sites" => self.n_sites = parse_number(&key, value)?,
            "geometry" => self.lattice = value.parse()?,
            "method" => self.method = value.parse()?,
            "lambda_min" => self.lambda_min = parse_number(&key, value)?,
            "lambda_max" => self.lambda_max = parse_number(&key, value)?,
            "steps" => self.steps = parse_number(&key, value)?,
            "pairs" => self.pairs = parse_list(value)?,
            "columns" => self.columns = parse_list(value)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            "plot" => self.plot = Some(PathBuf::from(value)),
            "workers" => self.workers = Some(parse_number(&key, value)?),
            other => return Err(domain(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. `#` starts a comment.
    /// Site counts (`m`) apply after everything else, so `n` never clobbers them.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut sites = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| domain(format!("line {}: expected `key = value`", lineno + 1)))?;
            if matches!(key.trim(), "m" | "n_sites" | "n-sites") {
                sites.push((lineno, key, value));
                continue;
            }
            self.set(key, value)
                .map_err(|e| domain(format!("line {}: {e}", lineno + 1)))?;
        }
        for (lineno, key, value) in sites {
            self.set(key, value)
                .map_err(|e| domain(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(config)
    }

    pub fn geometry(&self) -> Geometry {
        self.lattice.geometry(self.n_sites)
    }

    /// Uniform grid from `lambda_min` to `lambda_max`, both included.
    pub fn grid(&self) -> Vec<f64> {
        let span = self.lambda_max - self.lambda_min;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.lambda_max
                } else {
                    self.lambda_min + span * i as f64 / last
                }
            })
            .collect()
    }

    /// Checks the configuration and returns warnings that do not stop a run.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite()) {
            return Err(domain("lambda bounds must be finite"));
        }
        if !(0.0 <= self.lambda_min && self.lambda_min < self.lambda_max) {
            return Err(domain(format!(
                "need 0 <= lambda_min < lambda_max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if self.steps < 2 {
            return Err(domain(format!("steps must be at least 2, got {}", self.steps)));
        }
        if self.n_sites == 0 {
            return Err(domain("need at least one site"));
        }
        let mut warnings = Vec::new();
        match self.method {
            SweepMethod::Perturb1 | SweepMethod::Perturb2 => {
                if self.n_particles != self.n_sites {
                    return Err(domain("perturbative methods need N = M"));
                }
                if self.lambda_max > PERTURBATIVE_LAMBDA_WARNING {
                    warnings.push(format!(
                        "{} beyond lambda = {PERTURBATIVE_LAMBDA_WARNING} is outside the strong-coupling regime",
                        self.method
                    ));
                }
            }
            SweepMethod::Dense | SweepMethod::CcgAnalytic => {
                if self.method == SweepMethod::CcgAnalytic && self.lattice != Lattice::Ccg {
                    return Err(domain("ccg-analytic needs geometry ccg"));
                }
                let d = fock_dimension(self.n_particles, self.n_sites);
                if self.method == SweepMethod::Dense && d.is_none_or(|d| d > DEFAULT_DENSE_CAP as u64) {
                    return Err(capacity(format!(
                        "dense solver is limited to dimension {DEFAULT_DENSE_CAP}; use lanczos for N={} M={}",
                        self.n_particles, self.n_sites
                    )));
                }
            }
            SweepMethod::Lanczos => {}
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_text() {
        let mut c = SweepConfig::default();
        c.apply_text(
            "# chain sweep\nm=5\nn = 4\ngeometry = ccg  # complete graph\nmethod = perturb2\n\
             lambda-max = 0.2\nsteps = 5\npairs = nn\ncsv = out.csv\ncolumns = energy, delta_n2\n",
        )
        .unwrap();
        assert_eq!((c.n_particles, c.n_sites), (4, 5));
        c.apply_text("n = 6").unwrap();
        assert_eq!((c.n_particles, c.n_sites), (6, 6));
        assert_eq!(c.lattice, Lattice::Ccg);
        assert_eq!(c.method, SweepMethod::Perturb2);
        assert_eq!(c.lambda_max, 0.2);
        assert_eq!(c.steps, 5);
        assert_eq!(c.pairs, vec![PairLabel::Nn]);
        assert_eq!(c.csv, Some(PathBuf::from("out.csv")));
        assert_eq!(c.columns, vec![Column::Energy, Column::DeltaN2]);
    }

    #[test]
    fn rejects_bad_lines() {
        let mut c = SweepConfig::default();
        assert!(c.apply_text("steps").is_err());
        assert!(c.apply_text("colour = red").is_err());
        assert!(c.apply_text("steps = many").is_err());
        assert!(c.apply_text("method = exact").is_err());
    }

    #[test]
    fn grid_is_uniform_and_hits_endpoints() {
        let c = SweepConfig::default();
        let g = c.grid();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[100], 1.0);
        assert!((g[30] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        let ok = SweepConfig::default();
        assert!(ok.validate().unwrap().is_empty());
        let bad = |f: fn(&mut SweepConfig)| {
            let mut c = SweepConfig::default();
            f(&mut c);
            c.validate()
        };
        assert!(bad(|c| c.steps = 1).is_err());
        assert!(bad(|c| c.lambda_min = 1.0).is_err());
        assert!(bad(|c| c.lambda_min = -0.1).is_err());
        assert!(bad(|c| c.method = SweepMethod::CcgAnalytic).is_err());
        assert!(bad(|c| {
            c.n_particles = 10;
            c.n_sites = 10;
        })
        .is_err());
        let warned = bad(|c| c.method = SweepMethod::Perturb1).unwrap();
        assert_eq!(warned.len(), 1);
        assert!(bad(|c| {
            c.method = SweepMethod::Perturb1;
            c.lambda_max = 0.3;
        })
        .unwrap()
        .is_empty());
        assert!(bad(|c| {
            c.method = SweepMethod::Perturb2;
            c.n_sites = 4;
        })
        .is_err());
    }
}
