//! Command-line interface: dispersion curves, critical-velocity reports,
//! resonance scans, coefficient tables, the exact-diagonalization oracle
//! and the full invariant suite.
//!
//! Exit codes: 0 ok, 1 invariant failure, 2 config error, 3 numerical
//! failure.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use supertube::bogoliubov::DispersionCurve;
use supertube::config::{ConfigError, RunConfig};
use supertube::critical::{critical_velocity, resonance_scan};
use supertube::geometry::LatticeVector;
use supertube::oracle::{build_hamiltonian, compare_bogoliubov, diagonalize, FockBasis};
use supertube::pairseries::PairSeriesState;
use supertube::potential::{FourierTable, TableMode};
use supertube::report::{
    bogoliubov_curve, dispersion_csv, phi_csv, to_json, transverse_curve, ReportEnvelope,
};
use supertube::variational::MatrixVariant;
use supertube::verify::run_all;

#[derive(Parser)]
#[command(name = "supertube", version, about = "Bose-gas quasiparticle spectra in a narrow channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the table mode from the config.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override the algebraic variant of the quasiparticle block and
    /// closed form.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Limit,
    #[value(name = "finiteN", alias = "finiten")]
    FiniteN,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Literal,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesArg {
    Bogoliubov,
    Transverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Dispersion curve of one series over the transverse lattice.
    Dispersion {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "bogoliubov")]
        series: SeriesArg,
        /// Flow mode number n1 (flow velocity 2πħ n1/(m L1)).
        #[arg(long, default_value_t = 0)]
        flow: i32,
        /// Transverse wave mode "n2,n3" for the transverse series.
        #[arg(long, default_value = "0,0", value_parser = parse_pair)]
        k2: (i32, i32),
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Critical velocity report with resonance hits.
    Critical {
        #[command(flatten)]
        common: Common,
    },
    /// Resonance scan between the flowing and transverse series.
    Resonance {
        #[command(flatten)]
        common: Common,
        /// Flow velocity bound; defaults to the config value.
        #[arg(long)]
        v_max: Option<f64>,
        /// Relative energy tolerance; 0 switches to exact integer matching.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Pair-coefficient table for one transverse wave.
    PhiTable {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1,0", value_parser = parse_pair)]
        k2: (i32, i32),
    },
    /// Exact-diagonalization comparison on the configured fixture.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
    /// Run the full invariant suite; nonzero exit on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        skip_oracle: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
}

fn parse_pair(s: &str) -> Result<(i32, i32), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected \"n2,n3\", got {s:?}"));
    }
    let a = parts[0].trim().parse().map_err(|e| format!("n2: {e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("n3: {e}"))?;
    Ok((a, b))
}

const EXIT_INVARIANT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config<E: std::fmt::Display>(e: E) -> Self {
        Self { code: EXIT_CONFIG, message: e.to_string() }
    }
    fn numerical<E: std::fmt::Display>(e: E) -> Self {
        Self { code: EXIT_NUMERICAL, message: e.to_string() }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::config(e)
    }
}

fn init_thread_pool() {
    if let Ok(v) = std::env::var("SUPERTUBE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(mode) = common.mode {
        cfg.mode = match mode {
            ModeArg::Limit => TableMode::Limit,
            ModeArg::FiniteN => TableMode::FiniteN,
        };
    }
    if let Some(variant) = common.variant {
        cfg.variant = match variant {
            VariantArg::Literal => MatrixVariant::Literal,
            VariantArg::Corrected => MatrixVariant::Corrected,
        };
    }
    Ok(cfg)
}

fn build_table(cfg: &RunConfig) -> Result<FourierTable, CliError> {
    let params = cfg.params().map_err(CliError::config)?;
    let spec = cfg.potential_spec().map_err(CliError::config)?;
    FourierTable::build(spec, params, cfg.mode, cfg.lattice_cutoff).map_err(CliError::numerical)
}

fn emit(common: &Common, content: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::numerical(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| CliError::numerical(e.to_string())),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Dispersion { common, series, flow, k2, format } => {
            let cfg = load_config(&common)?;
            let table = build_table(&cfg)?;
            let curve: DispersionCurve = match series {
                SeriesArg::Bogoliubov => bogoliubov_curve(&table, flow, cfg.lattice_cutoff)
                    .map_err(CliError::numerical)?,
                SeriesArg::Transverse => {
                    let k2v = LatticeVector::transverse(k2.0, k2.1);
                    transverse_curve(&table, k2v, flow, cfg.lattice_cutoff, cfg.variant)
                        .map_err(CliError::numerical)?
                }
            };
            let content = match format {
                FormatArg::Csv => dispersion_csv(&curve),
                FormatArg::Json => to_json(&ReportEnvelope {
                    config_hash: cfg.hash(),
                    variants: cfg.variant_flags(),
                    payload: curve,
                }),
            };
            emit(&common, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Critical { common } => {
            let cfg = load_config(&common)?;
            let params = cfg.params().map_err(CliError::config)?;
            let table = build_table(&cfg)?;
            let report = critical_velocity(&params, &table, cfg.lattice_cutoff)
                .map_err(CliError::numerical)?;
            let hits = resonance_scan(
                &params,
                table.v0_limit,
                cfg.v_max,
                cfg.tolerances.resonance,
                cfg.lattice_cutoff,
            )
            .map_err(CliError::numerical)?;
            #[derive(serde::Serialize)]
            struct CriticalPayload {
                critical: supertube::critical::CriticalVelocityReport,
                resonance_hits: Vec<supertube::critical::ResonanceHit>,
            }
            let content = to_json(&ReportEnvelope {
                config_hash: cfg.hash(),
                variants: cfg.variant_flags(),
                payload: CriticalPayload { critical: report, resonance_hits: hits },
            });
            emit(&common, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Resonance { common, v_max, tolerance } => {
            let cfg = load_config(&common)?;
            let params = cfg.params().map_err(CliError::config)?;
            let spec = cfg.potential_spec().map_err(CliError::config)?;
            let v0 = supertube::potential::v0_value(&spec, &params);
            let hits = resonance_scan(
                &params,
                v0,
                v_max.unwrap_or(cfg.v_max),
                tolerance.unwrap_or(cfg.tolerances.resonance),
                cfg.lattice_cutoff,
            )
            .map_err(CliError::numerical)?;
            let content = to_json(&ReportEnvelope {
                config_hash: cfg.hash(),
                variants: cfg.variant_flags(),
                payload: hits,
            });
            emit(&common, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::PhiTable { common, k2 } => {
            let cfg = load_config(&common)?;
            let params = cfg.params().map_err(CliError::config)?;
            let table = build_table(&cfg)?;
            table.require_repulsive().map_err(CliError::numerical)?;
            let k2v = LatticeVector::transverse(k2.0, k2.1);
            let state = match cfg.mode {
                TableMode::Limit => PairSeriesState::build_limit(
                    LatticeVector::ZERO,
                    k2v,
                    table.v0_limit,
                    &params,
                    cfg.lattice_cutoff,
                ),
                TableMode::FiniteN => PairSeriesState::build_finite_n(
                    LatticeVector::ZERO,
                    k2v,
                    &table,
                    cfg.kinetic_norm,
                    cfg.lattice_cutoff,
                ),
            }
            .map_err(CliError::numerical)?;
            emit(&common, &phi_csv(&state))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { common } => {
            let cfg = load_config(&common)?;
            let (basis, table) = oracle_fixture(&cfg)?;
            let h = build_hamiltonian(&basis, &table);
            let spectrum = diagonalize(&h, &basis).map_err(CliError::numerical)?;
            let report = compare_bogoliubov(&spectrum, &basis, &table, cfg.density_convention);
            #[derive(serde::Serialize)]
            struct OraclePayload {
                dimension: usize,
                dropped_interaction_terms: u64,
                ground_energy: f64,
                comparison: supertube::oracle::CompareReport,
            }
            let content = to_json(&ReportEnvelope {
                config_hash: cfg.hash(),
                variants: cfg.variant_flags(),
                payload: OraclePayload {
                    dimension: h.dimension,
                    dropped_interaction_terms: h.dropped_terms,
                    ground_energy: spectrum.ground_energy,
                    comparison: report,
                },
            });
            emit(&common, &content)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, skip_oracle, format } => {
            let cfg = load_config(&common)?;
            let report = run_all(&cfg, skip_oracle);
            let content = match format {
                FormatArg::Json => to_json(&ReportEnvelope {
                    config_hash: cfg.hash(),
                    variants: cfg.variant_flags(),
                    payload: &report,
                }),
                FormatArg::Csv => report.human_readable(),
            };
            emit(&common, &content)?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INVARIANT))
            }
        }
    }
}

fn oracle_fixture(cfg: &RunConfig) -> Result<(FockBasis, FourierTable), CliError> {
    use std::f64::consts::PI;
    let oc = cfg.oracle;
    let mut modes = vec![LatticeVector::ZERO];
    let axes = [
        LatticeVector::longitudinal(1),
        LatticeVector::transverse(1, 0),
        LatticeVector::transverse(0, 1),
    ];
    for axis in axes.iter().take(oc.mode_pairs.clamp(1, 3) as usize) {
        modes.push(*axis);
        modes.push(-*axis);
    }
    let basis = FockBasis::new(modes, oc.n_particles).map_err(CliError::numerical)?;
    let params = supertube::PhysicalParams::new(1.0, 1.0, 2.0 * PI, 2.0 * PI, 1)
        .map_err(CliError::config)?;
    let t_min = 0.5 * params.hbar * params.hbar / params.mass;
    let v0 = oc.coupling_ratio * t_min / oc.n_particles as f64;
    let a = 0.5;
    let amp = v0 * params.volume() / (4.0 / 3.0 * PI * a * a * a);
    let spec = supertube::PotentialSpec::tophat(amp, a).map_err(CliError::config)?;
    let table = FourierTable::limit(spec, params).map_err(CliError::numerical)?;
    Ok((basis, table))
}
