//! `hament`: entanglement entropy of free fermions on Hamming graphs.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hamming_ent::bethe::{bethe_grid, BetheForm, RootCount};
use hamming_ent::entropy::{EntropyResult, Method};
use hamming_ent::figures::{figure_table, Figure};
use hamming_ent::heun::ball_spectrum_via_heun;
use hamming_ent::model::{fermi_sea, single_particle_energies};
use hamming_ent::oracle::{dense_dimension_capped, oracle_equivalence, verify_scheme_relations, DENSE_CAP};
use hamming_ent::subgraph::{subgraph_correlation_spectrum, SubgraphSpec};
use hamming_ent::terwilliger::{ball_spectrum_direct, neighborhood_spectrum};
use hamming_ent::{Couplings, Error, GraphSpec, LevelSet};

use output::{Format, Sink, Table};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hament", version, about = "Free-fermion entanglement entropy on Hamming graphs H(d,q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-particle levels: columns k, omega, energy, degeneracy, log10_degeneracy, occupied.
    Spectrum {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        couplings: CouplingArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Entanglement entropy of one subsystem: columns d, q, subsystem, fermi_sea, method, S, unit.
    Entropy {
        #[command(subcommand)]
        subsystem: SubsystemCommand,
    },
    /// Data for one of the entropy plots (2a, 2b, 3a, 3b, 4a, 4b); columns depend on the figure.
    Figure {
        /// Which figure.
        figure: Figure,
        #[arg(long, default_value_t = 2)]
        q: u32,
        /// Comma-separated dimensions instead of the default sweep.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<u32>>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dense-oracle checks on a small graph: scheme relations and fast-path equivalence.
    /// Columns: check, residual, passed, informational.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        /// Refuse graphs with more vertices than this (at most 4096).
        #[arg(long, default_value_t = DENSE_CAP)]
        max_dim: usize,
        /// Seed for the random Fermi seas and neighborhood unions.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bethe-ansatz cross-check of the Heun spectrum on every block with at most M+1 rows.
    /// Columns: form, convention, blocks, reproduced, max_residual, max_error.
    BetheCheck {
        /// Largest root count M (blocks of dimension up to M+1).
        #[arg(long = "max-M", alias = "max-m")]
        max_m: usize,
        #[arg(long, default_value_t = 8)]
        d_max: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3])]
        q: Vec<u32>,
        /// Random restarts per block after continuation.
        #[arg(long, default_value_t = 64)]
        seeds: usize,
        /// Also run the printed BC-Gaudin equations (reported, not gating).
        #[arg(long)]
        printed: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand, Debug)]
enum SubsystemCommand {
    /// The subgraph H(L,q) obtained by fixing d-L coordinates.
    Subgraph {
        #[arg(long = "L", alias = "l")]
        l: u32,
        #[command(flatten)]
        common: EntropyArgs,
    },
    /// The vertices at distance i from the reference vertex.
    Neighborhood {
        #[arg(long)]
        i: u32,
        #[command(flatten)]
        common: EntropyArgs,
    },
    /// The vertices at distance at most N from the reference vertex.
    Ball {
        #[arg(long = "N", alias = "n")]
        n: u32,
        #[arg(long, value_enum)]
        method: Option<BallMethod>,
        #[command(flatten)]
        common: EntropyArgs,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum BallMethod {
    Heun,
    Direct,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    q: u32,
}

#[derive(Args, Debug, Default)]
struct CouplingArgs {
    /// Hopping amplitudes α_0,...,α_d.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["nn", "exp"])]
    alpha: Option<Vec<f64>>,
    /// On-site and nearest-neighbor amplitudes α_0,α_1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "exp")]
    nn: Option<Vec<f64>>,
    /// Exponential hopping c,α_0 with α_i = exp(-c i).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    exp: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct EntropyArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Fermi sea {0..k0}.
    #[arg(long, conflicts_with_all = ["se", "alpha", "nn", "exp"])]
    k0: Option<u32>,
    /// Fermi sea as an explicit level list.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["alpha", "nn", "exp"])]
    se: Option<Vec<u32>>,
    #[command(flatten)]
    couplings: CouplingArgs,
    /// Report the entropy in bits instead of nats.
    #[arg(long)]
    bits: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; inferred from the --out extension, csv by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutputArgs {
    fn sink(&self) -> Sink {
        Sink::new(self.out.clone(), self.format)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSpec(_) | Error::Domain(_) | Error::SizeCap { .. } => Failure::Usage(e.to_string()),
            Error::Numerical(_) | Error::PoleProximity { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numerical(format!("output error: {e}"))
    }
}

fn couplings(spec: GraphSpec, args: &CouplingArgs) -> Result<Option<Couplings>, Failure> {
    let pair = |v: &Vec<f64>, what: &str| -> Result<(f64, f64), Failure> {
        match v.as_slice() {
            [a, b] => Ok((*a, *b)),
            _ => Err(Failure::Usage(format!("--{what} takes exactly two values"))),
        }
    };
    Ok(match (&args.alpha, &args.nn, &args.exp) {
        (Some(alpha), _, _) => Some(Couplings::new(spec, alpha.clone())?),
        (_, Some(nn), _) => {
            let (a0, a1) = pair(nn, "nn")?;
            Some(Couplings::nearest_neighbor(spec, a0, a1)?)
        }
        (_, _, Some(exp)) => {
            let (c, a0) = pair(exp, "exp")?;
            Some(Couplings::exponential(spec, c, a0)?)
        }
        _ => None,
    })
}

fn resolve_fermi_sea(spec: GraphSpec, args: &EntropyArgs) -> Result<LevelSet, Failure> {
    let se = if let Some(k0) = args.k0 {
        LevelSet::up_to(k0)
    } else if let Some(levels) = &args.se {
        LevelSet::new(levels.iter().copied())
    } else if let Some(c) = couplings(spec, &args.couplings)? {
        let sea = fermi_sea(&single_particle_energies(spec, &c));
        if !sea.zero_modes.is_empty() {
            eprintln!("warning: levels {:?} have zero energy and are left empty", sea.zero_modes);
        }
        sea.levels
    } else {
        return Err(Failure::Usage(
            "give the Fermi sea with --k0, --se, or couplings (--alpha, --nn, --exp)".into(),
        ));
    };
    se.validate(&spec, "SE")?;
    Ok(se)
}

fn run_entropy(cmd: SubsystemCommand) -> Result<(), Failure> {
    let (common, subsystem, method, spectrum) = match cmd {
        SubsystemCommand::Subgraph { l, common } => {
            let spec = GraphSpec::new(common.graph.d, common.graph.q)?;
            let se = resolve_fermi_sea(spec, &common)?;
            let sub = SubgraphSpec::new(spec, l)?;
            let spectrum = subgraph_correlation_spectrum(&sub, &se)?;
            (common, format!("subgraph L={l}"), Method::Subgraph, (spec, se, spectrum))
        }
        SubsystemCommand::Neighborhood { i, common } => {
            let spec = GraphSpec::new(common.graph.d, common.graph.q)?;
            let se = resolve_fermi_sea(spec, &common)?;
            let spectrum = neighborhood_spectrum(&spec, i, &se)?;
            (common, format!("neighborhood i={i}"), Method::Neighborhood, (spec, se, spectrum))
        }
        SubsystemCommand::Ball { n, method, common } => {
            let spec = GraphSpec::new(common.graph.d, common.graph.q)?;
            let se = resolve_fermi_sea(spec, &common)?;
            let contiguous = se.contiguous_top();
            let method = match (method, contiguous) {
                (Some(BallMethod::Heun), None) => {
                    return Err(Failure::Usage(format!(
                        "--method heun needs a Fermi sea of the form {{0..k0}}, got {se}"
                    )))
                }
                (Some(BallMethod::Direct), _) | (None, None) => BallMethod::Direct,
                (_, Some(_)) => BallMethod::Heun,
            };
            let (tag, spectrum) = match (method, contiguous) {
                (BallMethod::Heun, Some(k0)) => {
                    let b = ball_spectrum_via_heun(&spec, n, k0)?;
                    if b.fallback_blocks > 0 {
                        eprintln!("note: {} near-degenerate blocks diagonalized directly", b.fallback_blocks);
                    }
                    (Method::Heun, b.spectrum)
                }
                _ => (Method::Direct, ball_spectrum_direct(&spec, n, &se)?),
            };
            (common, format!("ball N={n}"), tag, (spec, se, spectrum))
        }
    };
    let (spec, se, spectrum) = spectrum;
    let result = EntropyResult::new(spec.d, spec.q, subsystem, se.to_string(), method, spectrum)?;
    common.out.sink().write_entropy(&result, common.bits)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Spectrum { graph, couplings: cargs, out } => {
            let spec = GraphSpec::new(graph.d, graph.q)?;
            let c = match couplings(spec, &cargs)? {
                Some(c) => c,
                None => Couplings::nearest_neighbor(spec, 0.0, 1.0)?,
            };
            let levels = single_particle_energies(spec, &c);
            out.sink().write_levels(&levels, &fermi_sea(&levels).levels)?;
        }
        Command::Entropy { subsystem } => run_entropy(subsystem)?,
        Command::Figure { figure, q, dims, out } => {
            let dims = dims.unwrap_or_else(|| figure.default_dims());
            let table = figure_table(figure, q, &dims)?;
            let rows = table.rows.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
            out.sink().write_table(&Table {
                columns: table.columns.iter().map(|c| c.to_string()).collect(),
                rows,
            })?;
        }
        Command::Verify { graph, max_dim, seed, out } => {
            if max_dim > DENSE_CAP {
                return Err(Failure::Usage(format!("--max-dim is capped at {DENSE_CAP}")));
            }
            let spec = GraphSpec::new(graph.d, graph.q)?;
            dense_dimension_capped(&spec, max_dim)?;
            let scheme = verify_scheme_relations(&spec)?;
            let cases = oracle_equivalence(&spec, seed)?;
            let mut table = Table::new(&["check", "residual", "passed", "informational"]);
            for c in &scheme.checks {
                table.push(vec![
                    c.name.clone().into(),
                    c.residual.into(),
                    c.passed.into(),
                    c.informational.into(),
                ]);
            }
            let failed_cases: Vec<_> = cases.iter().filter(|c| !c.passed).collect();
            let worst_dev = cases.iter().map(|c| c.max_deviation).fold(0.0, f64::max);
            let worst_s = cases.iter().map(|c| c.entropy_error).fold(0.0, f64::max);
            table.push(vec![
                format!("fast paths match oracle spectra ({} cases)", cases.len()).into(),
                worst_dev.into(),
                failed_cases.is_empty().into(),
                false.into(),
            ]);
            table.push(vec![
                "fast-path entropies match oracle".to_string().into(),
                worst_s.into(),
                failed_cases.is_empty().into(),
                false.into(),
            ]);
            out.sink().write_table(&table)?;
            let mut problems: Vec<String> = scheme.failures().map(|c| c.name.clone()).collect();
            problems.extend(
                failed_cases
                    .iter()
                    .map(|c| format!("{} SE={} via {}: {}", c.subsystem, c.fermi_sea, c.method.as_str(), c.detail)),
            );
            if !problems.is_empty() {
                return Err(Failure::Verification(problems.join("\n")));
            }
        }
        Command::BetheCheck {
            max_m,
            d_max,
            q,
            seeds,
            printed,
            out,
        } => {
            let mut specs = Vec::new();
            for &qq in &q {
                for d in 1..=d_max {
                    specs.push(GraphSpec::new(d, qq)?);
                }
            }
            let mut table = Table::new(&["form", "convention", "blocks", "reproduced", "max_residual", "max_error"]);
            let mut winner = None;
            let mut forms = vec![BetheForm::Polynomial];
            if printed {
                forms.push(BetheForm::Printed);
            }
            for form in forms {
                for convention in RootCount::ALL {
                    let r = bethe_grid(&specs, max_m + 1, form, convention, seeds)?;
                    if form == BetheForm::Polynomial && r.passed() && winner.is_none() {
                        winner = Some(convention);
                    }
                    table.push(vec![
                        format!("{form:?}").to_lowercase().into(),
                        convention.as_str().to_string().into(),
                        (r.blocks as f64).into(),
                        (r.reproduced as f64).into(),
                        r.max_residual.into(),
                        r.max_error.into(),
                    ]);
                }
            }
            out.sink().write_table(&table)?;
            match winner {
                Some(c) => eprintln!("winning root-count convention: {}", c.as_str()),
                None => return Err(Failure::Verification("no root-count convention reproduced every block".into())),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed:\n{msg}");
            ExitCode::from(EXIT_VERIFICATION)
        }
    }
}
