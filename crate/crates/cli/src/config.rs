//! Run configuration: one JSON document per invocation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use momentum_core::dynamics::IntegratorConfig;
use momentum_core::energy::ScanRegion;
use momentum_core::ensemble::{BinSpec, EnsembleSpec};
use momentum_core::fields::{ConstantField, LinearField, MomentumField, QhoField, SeparableField};
use momentum_core::oracle::{field_from_grid, solve_schrodinger_1d, Grid1D, OracleSolution};
use momentum_core::potential::PolynomialPotential;
use momentum_core::two_electron::RotationMomentum;
use momentum_core::{ComplexVector, UnitSystem, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: UnitSystem,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub svg: bool,
    pub scenario: Scenario,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(scenario: Scenario) -> Self {
        RunConfig { units: UnitSystem::natural(), output_dir: default_output_dir(), format: Format::Csv, svg: false, scenario }
    }

    /// Seed recorded in output headers, if the scenario is stochastic.
    pub fn seed(&self) -> Option<u64> {
        match &self.scenario {
            Scenario::Ensemble(e) => Some(e.ensemble.seed.master_seed),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    FieldScan(FieldScanConfig),
    Evolve(EvolveConfig),
    Ensemble(EnsembleConfig),
    Reconstruct(ReconstructConfig),
    Twobody(TwobodyConfig),
    Oracle(OracleConfig),
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FieldScan(_) => "field-scan",
            Scenario::Evolve(_) => "evolve",
            Scenario::Ensemble(_) => "ensemble",
            Scenario::Reconstruct(_) => "reconstruct",
            Scenario::Twobody(_) => "twobody",
            Scenario::Oracle(_) => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Harmonic,
    Anharmonic { lambda: f64 },
    /// Same polynomial in every coordinate, constant term counted once.
    Polynomial { coefficients: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self, units: &UnitSystem) -> PolynomialPotential {
        match self {
            PotentialSpec::Zero => PolynomialPotential::zero(),
            PotentialSpec::Harmonic => PolynomialPotential::harmonic(units),
            PotentialSpec::Anharmonic { lambda } => PolynomialPotential::anharmonic(units, *lambda),
            PotentialSpec::Polynomial { coefficients } => PolynomialPotential::new(coefficients.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Qho { level: u32 },
    Constant { momentum: Vec<f64> },
    /// Product of oscillator eigenstates, one level per axis.
    Separable { levels: Vec<u32> },
    Rotation { dim: usize, eps: f64 },
    /// A state of the finite-difference solver.
    Grid { potential: PotentialSpec, grid: Grid1D, state: usize },
}

/// A built field plus, where known, its wavefunction on the real axis.
pub struct BuiltField {
    pub field: Arc<dyn MomentumField>,
    pub psi: Option<Arc<dyn Fn(f64) -> C64 + Send + Sync>>,
    pub oracle: Option<OracleSolution>,
}

impl FieldSpec {
    pub fn build(&self, units: &UnitSystem) -> Result<BuiltField, CliError> {
        Ok(match self {
            FieldSpec::Qho { level } => {
                let f = QhoField::new(*level, *units)?;
                let psi_src = f.clone();
                BuiltField {
                    field: Arc::new(f),
                    psi: Some(Arc::new(move |x| psi_src.psi(C64::new(x, 0.0)))),
                    oracle: None,
                }
            }
            FieldSpec::Constant { momentum } => BuiltField {
                field: Arc::new(ConstantField::new(ComplexVector::from_real(momentum))),
                psi: None,
                oracle: None,
            },
            FieldSpec::Separable { levels } => {
                let factors = levels
                    .iter()
                    .map(|&n| Ok(Arc::new(QhoField::new(n, *units)?) as Arc<dyn MomentumField>))
                    .collect::<Result<Vec<_>, CliError>>()?;
                BuiltField { field: Arc::new(SeparableField::new(factors)?), psi: None, oracle: None }
            }
            FieldSpec::Rotation { dim, eps } => {
                BuiltField { field: Arc::new(LinearField::rotation(*dim, *eps)?), psi: None, oracle: None }
            }
            FieldSpec::Grid { potential, grid, state } => {
                let sol = solve_schrodinger_1d(&potential.build(units), *grid, state + 1, units)?;
                let field = field_from_grid(&sol, *state, units)?;
                let (sol_psi, n) = (sol.clone(), *state);
                BuiltField {
                    field: Arc::new(field),
                    psi: Some(Arc::new(move |x| C64::new(sol_psi.psi_at(n, x), 0.0))),
                    oracle: Some(sol),
                }
            }
        })
    }
}

fn default_scan_tolerance() -> f64 {
    1e-9
}

fn default_count() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldScanConfig {
    pub field: FieldSpec,
    pub potential: PotentialSpec,
    pub region: ScanRegion,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_scan_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    /// `dr/dt = p(r)/m` with `p` read from the field.
    #[default]
    Field,
    /// Position and momentum integrated together under the force law.
    Coupled,
}

fn default_energy_tolerance() -> f64 {
    1e-8
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub field: FieldSpec,
    #[serde(default = "harmonic")]
    pub potential: PotentialSpec,
    pub x0: ComplexVector,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub mode: EvolveMode,
    /// Allowed spread of the local energy along the run.
    #[serde(default = "default_energy_tolerance")]
    pub energy_tolerance: f64,
    /// Treat stopping short of `t_end` as a failed check.
    #[serde(default = "yes")]
    pub require_completion: bool,
}

fn harmonic() -> PotentialSpec {
    PotentialSpec::Harmonic
}

fn default_drift_tolerance() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub field: FieldSpec,
    #[serde(default = "harmonic")]
    pub potential: PotentialSpec,
    pub ensemble: EnsembleSpec,
    pub bins: BinSpec,
    /// Histogram times; the final time when empty.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub dump_trajectories: bool,
    /// Allowed energy drift of completed trajectories.
    #[serde(default = "default_drift_tolerance")]
    pub energy_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathSpec {
    Straight { from: f64, to: f64, count: usize },
    Points { points: Vec<ComplexVector> },
}

fn default_reconstruct_tolerance() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub field: FieldSpec,
    pub path: PathSpec,
    /// `psi` at the first path point; 1 when absent.
    #[serde(default)]
    pub normalization: Option<[f64; 2]>,
    /// Relative tolerance against the known wavefunction, when there is one.
    #[serde(default = "default_reconstruct_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TwobodySource {
    Spinning { p1_0: Vec<f64>, p2_0: Vec<f64>, radius: f64, gamma: f64, mass: f64 },
    Rotation { first: RotationMomentum, second: RotationMomentum },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeSource {
    #[default]
    Exact,
    Stencil,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwobodyTolerances {
    pub conservation: f64,
    pub force_norm: f64,
    pub delta_e: f64,
    pub matrix: f64,
}

impl Default for TwobodyTolerances {
    fn default() -> Self {
        TwobodyTolerances { conservation: 1e-12, force_norm: 1e-6, delta_e: 1e-10, matrix: 1e-12 }
    }
}

fn default_samples() -> usize {
    1000
}

fn default_history_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwobodyConfig {
    pub source: TwobodySource,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_history_dt")]
    pub dt: f64,
    #[serde(default)]
    pub derivatives: DerivativeSource,
    #[serde(default)]
    pub tolerances: TwobodyTolerances,
}

fn default_states() -> usize {
    4
}

fn default_oracle_tolerance() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub potential: PotentialSpec,
    pub grid: Grid1D,
    #[serde(default = "default_states")]
    pub states: usize,
    /// Tolerance on `E_n = (n + 1/2) ħω` when the potential is harmonic.
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
}

/// Parses a config, reporting the line, column and field path of the first
/// error.
pub fn parse_config(text: &str, source: &Path) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            file: source.display().to_string(),
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })
}

/// A default configuration for each scenario, used by `--print-config`
/// without `--config`.
pub fn example(scenario: &str) -> Option<RunConfig> {
    use momentum_core::ensemble::{InitialDistribution, SamplingRegion};
    use momentum_core::two_electron::Orientation;
    use momentum_core::SeedSpec;
    let s = match scenario {
        "field-scan" => Scenario::FieldScan(FieldScanConfig {
            field: FieldSpec::Qho { level: 1 },
            potential: PotentialSpec::Harmonic,
            region: ScanRegion::interval(0.1, 5.0),
            count: 1000,
            tolerance: 1e-9,
        }),
        "evolve" => Scenario::Evolve(EvolveConfig {
            field: FieldSpec::Qho { level: 1 },
            potential: PotentialSpec::Harmonic,
            x0: ComplexVector::real_scalar(2.0),
            integrator: IntegratorConfig::rk4(1e-3, 3.0),
            mode: EvolveMode::Field,
            energy_tolerance: 1e-8,
            require_completion: true,
        }),
        "ensemble" => Scenario::Ensemble(EnsembleConfig {
            field: FieldSpec::Qho { level: 1 },
            potential: PotentialSpec::Harmonic,
            ensemble: EnsembleSpec {
                count: 10_000,
                region: SamplingRegion::interval(0.2, 3.0),
                distribution: InitialDistribution::Uniform,
                seed: SeedSpec::new(1),
                first_index: 0,
                integrator: IntegratorConfig { record_every: 10, ..IntegratorConfig::rk4(1e-2, 2.0) },
            },
            bins: BinSpec { lo: -4.0, hi: 4.0, count: 40 },
            times: vec![],
            dump_trajectories: false,
            energy_tolerance: 1e-6,
        }),
        "reconstruct" => Scenario::Reconstruct(ReconstructConfig {
            field: FieldSpec::Qho { level: 1 },
            path: PathSpec::Straight { from: 0.5, to: 4.0, count: 351 },
            normalization: None,
            tolerance: 1e-8,
        }),
        "twobody" => Scenario::Twobody(TwobodyConfig {
            source: TwobodySource::Spinning {
                p1_0: vec![0.0, 0.0],
                p2_0: vec![0.0, 0.0],
                radius: 1.0,
                gamma: 2.0,
                mass: 1.0,
            },
            samples: 1000,
            dt: 1e-3,
            derivatives: DerivativeSource::Exact,
            tolerances: TwobodyTolerances::default(),
        }),
        "twobody-rotation" => Scenario::Twobody(TwobodyConfig {
            source: TwobodySource::Rotation {
                first: RotationMomentum { p0: vec![1.0, 1.0, 1.0], alpha: 1.0, orientation: Orientation::Plus },
                second: RotationMomentum { p0: vec![1.0, 1.0, 1.0], alpha: 1.0, orientation: Orientation::Minus },
            },
            samples: 200,
            dt: 1e-2,
            derivatives: DerivativeSource::Exact,
            tolerances: TwobodyTolerances::default(),
        }),
        "oracle" => Scenario::Oracle(OracleConfig {
            potential: PotentialSpec::Harmonic,
            grid: Grid1D { x_min: -8.0, x_max: 8.0, points: 1601 },
            states: 4,
            tolerance: 1e-4,
        }),
        _ => return None,
    };
    Some(RunConfig::new(s))
}
