//! Command-line driver: model validation, facet catalogues, face reports,
//! characteristic-function values, normalizing constants, Bayes factors,
//! effective degrees of freedom, and model ranking.
//!
//! All results go to stdout as JSON (identical bytes for identical inputs);
//! warnings go to stderr. Exit code 0 on success, 2 on input errors, 3 when
//! a computation is refused (size bounds, missing routes, boundary data).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use loglin_core::bayes::{self, ModelPair, RankMode};
use loglin_core::charfun;
use loglin_core::io as fio;
use loglin_core::model::Model;
use loglin_core::normalizers::{self, MAX_QUADRATURE_DIM};
use loglin_core::polytope;
use loglin_core::rational::q_to_f64;
use loglin_core::{ContingencyTable, Error};

#[derive(Parser)]
#[command(
    name = "loglin",
    version,
    about = "Marginal polytopes, characteristic functions, and Bayes factors for hierarchical loglinear models"
)]
struct Cli {
    /// Write the JSON result to this file as well; a run manifest is
    /// written next to it with a `.manifest.json` suffix.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Reserved: no production subcommand is randomized. Recorded in the
    /// run manifest when given.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model spec and print its derived structure
    Model(ModelArgs),
    /// Facet catalogues and face location in the marginal polytope
    #[command(subcommand)]
    Polytope(PolytopeCommand),
    /// Evaluate the characteristic function of the open polytope
    Jc(JcArgs),
    /// Prior or posterior normalizing constant, in log space
    Normalizer(NormalizerArgs),
    /// Bayes factor between two models
    Bf(BfArgs),
    /// Effective degrees of freedom for a decomposable pair
    Edf(EdfArgs),
    /// Rank a directory of models against one table
    Rank(RankArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model spec JSON
    #[arg(long)]
    model: PathBuf,
}

#[derive(Subcommand)]
enum PolytopeCommand {
    /// Enumerate facets: closed-form catalogues by default, the exact hull
    /// oracle with --oracle
    Facets(FacetsArgs),
    /// Locate the face containing the table's mean vector
    Face(FaceArgs),
}

#[derive(Args)]
struct FacetsArgs {
    #[arg(long)]
    model: PathBuf,
    /// Use the exact rational hull oracle instead of the closed forms
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Args)]
struct FaceArgs {
    #[arg(long)]
    model: PathBuf,
    /// Contingency table CSV
    #[arg(long)]
    table: PathBuf,
}

#[derive(Args)]
struct JcArgs {
    #[arg(long)]
    model: PathBuf,
    /// Query point: JSON object keyed by the canonical J labels
    #[arg(long)]
    m: PathBuf,
    /// Use the exact polar-volume oracle instead of the closed form
    #[arg(long)]
    oracle: bool,
    /// Probe the blow-up exponent toward this boundary point (JSON vector)
    #[arg(long)]
    probe_boundary: Option<PathBuf>,
}

#[derive(Args)]
struct NormalizerArgs {
    #[arg(long)]
    model: PathBuf,
    /// Hyperparameter vector: JSON object keyed by the canonical J labels
    #[arg(long)]
    m: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// Contingency table CSV (required with --posterior)
    #[arg(long)]
    table: Option<PathBuf>,
    /// Compute the posterior constant instead of the prior one
    #[arg(long, requires = "table")]
    posterior: bool,
    #[arg(long, value_enum, default_value_t = NormalizerRoute::Auto)]
    method: NormalizerRoute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizerRoute {
    Auto,
    Closed,
    Quadrature,
}

#[derive(Args)]
struct BfArgs {
    #[arg(long)]
    model1: PathBuf,
    #[arg(long)]
    model2: PathBuf,
    #[arg(long)]
    table: PathBuf,
    /// Prior precision for the finite Bayes factor
    #[arg(long, conflicts_with = "asymptotic")]
    alpha: Option<f64>,
    /// Report only the vanishing-precision exponent
    #[arg(long)]
    asymptotic: bool,
}

#[derive(Args)]
struct EdfArgs {
    #[arg(long)]
    model1: PathBuf,
    #[arg(long)]
    model2: PathBuf,
    #[arg(long)]
    table: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// Directory of model spec JSON files
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    table: PathBuf,
    #[arg(long, value_enum, default_value_t = RankingMode::Asymptotic)]
    mode: RankingMode,
    /// Prior precision (required when mode is at-alpha)
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RankingMode {
    Asymptotic,
    AtAlpha,
}

/// Tracks everything the run manifest needs: input digests and the
/// canonical coordinate order of every model loaded.
#[derive(Default)]
struct RunContext {
    input_digests: BTreeMap<String, String>,
    j_orders: BTreeMap<String, Vec<String>>,
}

impl RunContext {
    fn read(&mut self, path: &Path) -> Result<String, Error> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.input_digests
            .insert(path.display().to_string(), format!("sha256:{hex}"));
        String::from_utf8(bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    fn load_model(&mut self, path: &Path, warnings: &mut Vec<String>) -> Result<Model, Error> {
        let text = self.read(path)?;
        let parsed = fio::parse_model_str(&text)?;
        for w in &parsed.warnings {
            warnings.push(format!("{}: {w}", path.display()));
        }
        self.j_orders
            .insert(path.display().to_string(), parsed.model.labels());
        Ok(parsed.model)
    }

    fn load_table(&mut self, path: &Path, model: &Model) -> Result<ContingencyTable, Error> {
        let text = self.read(path)?;
        fio::parse_table_str(&text, model)
    }
}

fn facets_for_output(model: &Model, oracle: bool, warnings: &mut Vec<String>) -> Result<polytope::FacetList, Error> {
    if oracle {
        let poly = polytope::build_polytope(model)?;
        return polytope::hull_facets_oracle(&poly);
    }
    if let Ok(ds) = normalizers::junction_structure(model) {
        return Ok(polytope::decomposable_facets(model, &ds));
    }
    if let Ok(list) = polytope::cycle_facets(model) {
        return Ok(list);
    }
    warnings.push(
        "model is neither decomposable nor a binary cycle: emitting the general facet family, \
         which may be incomplete (use --oracle for the exact catalogue)"
            .into(),
    );
    Ok(polytope::FacetList {
        forms: polytope::theorem_facets(model),
        provenance: polytope::FacetProvenance::Theorem,
        complete: false,
    })
}

fn run(cli: &Cli, ctx: &mut RunContext, warnings: &mut Vec<String>) -> Result<(Value, Option<String>), Error> {
    match &cli.command {
        Command::Model(args) => {
            let model = ctx.load_model(&args.model, warnings)?;
            Ok((fio::model_to_json(&model), None))
        }

        Command::Polytope(PolytopeCommand::Facets(args)) => {
            let model = ctx.load_model(&args.model, warnings)?;
            let list = facets_for_output(&model, args.oracle, warnings)?;
            match args.format {
                OutputFormat::Json => Ok((fio::facets_to_json(&model, &list), None)),
                OutputFormat::Table => Ok((
                    fio::facets_to_json(&model, &list),
                    Some(fio::facets_to_table(&model, &list)),
                )),
            }
        }

        Command::Polytope(PolytopeCommand::Face(args)) => {
            let model = ctx.load_model(&args.model, warnings)?;
            let table = ctx.load_table(&args.table, &model)?;
            let facets = polytope::complete_facets(&model)?;
            let poly = polytope::build_polytope(&model)?.with_facets(facets);
            let y = model.mean_vector(&table);
            let report = polytope::face_of_point(&poly, &y)?;
            Ok((fio::face_report_to_json(&model, &report), None))
        }

        Command::Jc(args) => {
            let model = ctx.load_model(&args.model, warnings)?;
            let m_text = ctx.read(&args.m)?;
            let m = fio::parse_coordinate_vector(&m_text, &model)?;

            if let Some(y_path) = &args.probe_boundary {
                let y_text = ctx.read(y_path)?;
                let y = fio::parse_coordinate_vector(&y_text, &model)?;
                let facets = polytope::complete_facets(&model)?;
                let poly = polytope::build_polytope(&model)?.with_facets(facets);
                let k = polytope::face_of_point(&poly, &y)?.dimension;
                let ds = normalizers::junction_structure(&model).map_err(|_| {
                    Error::NonComputable(
                        "the boundary probe needs the decomposable closed form".into(),
                    )
                })?;
                let m_f: Vec<f64> = m.iter().map(q_to_f64).collect();
                let y_f: Vec<f64> = y.iter().map(q_to_f64).collect();
                let codim = model.dim() - k;
                let grid = charfun::default_probe_grid();
                let report = charfun::boundary_scaling_probe(
                    |p: &[f64]| charfun::jc_decomposable_log(&model, &ds, p),
                    &m_f,
                    &y_f,
                    codim,
                    &grid,
                )?;
                return Ok((fio::probe_report_to_json(&report, k, model.dim()), None));
            }

            let value = if args.oracle {
                let poly = polytope::build_polytope(&model)?;
                charfun::jc_polar_volume_oracle(&poly, &m)?
            } else {
                let ds = normalizers::junction_structure(&model).map_err(|_| {
                    Error::NonComputable(
                        "no closed form for a non-decomposable model (use --oracle)".into(),
                    )
                })?;
                charfun::jc_decomposable(&model, &ds, &m)?
            };
            Ok((fio::charfun_to_json(&value), None))
        }

        Command::Normalizer(args) => {
            let model = ctx.load_model(&args.model, warnings)?;
            let m_text = ctx.read(&args.m)?;
            let m_q = fio::parse_coordinate_vector(&m_text, &model)?;
            let m: Vec<f64> = m_q.iter().map(q_to_f64).collect();
            let structure = normalizers::junction_structure(&model);
            let use_closed = match args.method {
                NormalizerRoute::Closed => {
                    structure.as_ref().map_err(|e| e.clone_as_noncomputable())?;
                    true
                }
                NormalizerRoute::Quadrature => false,
                NormalizerRoute::Auto => structure.is_ok(),
            };
            let norm = if args.posterior {
                let table_path = args.table.as_ref().expect("clap enforces --table");
                let table = ctx.load_table(table_path, &model)?;
                if use_closed {
                    normalizers::log_i_posterior(
                        &model,
                        structure.as_ref().unwrap(),
                        &m,
                        args.alpha,
                        &table,
                    )?
                } else {
                    let n = table.total() as f64;
                    let t = model.marginal_counts(&table);
                    let shifted: Vec<f64> = m
                        .iter()
                        .zip(&t)
                        .map(|(mj, &tj)| (args.alpha * mj + tj as f64) / (args.alpha + n))
                        .collect();
                    normalizers::log_i_quadrature(&model, &shifted, args.alpha + n)?
                }
            } else if use_closed {
                normalizers::log_i_decomposable(&model, structure.as_ref().unwrap(), &m, args.alpha)?
            } else {
                if model.dim() > MAX_QUADRATURE_DIM {
                    return Err(Error::NonComputable(format!(
                        "model is not decomposable and dimension {} exceeds the quadrature bound {}",
                        model.dim(),
                        MAX_QUADRATURE_DIM
                    )));
                }
                normalizers::log_i_quadrature(&model, &m, args.alpha)?
            };
            Ok((fio::log_normalizer_to_json(&norm), None))
        }

        Command::Bf(args) => {
            if !args.asymptotic && args.alpha.is_none() {
                return Err(Error::Io(
                    "bf requires either --alpha <A> or --asymptotic".into(),
                ));
            }
            let model1 = ctx.load_model(&args.model1, warnings)?;
            let model2 = ctx.load_model(&args.model2, warnings)?;
            let table = ctx.load_table(&args.table, &model1)?;
            let pair = ModelPair::new(&model1, &model2)?;
            let report = bayes::compare(pair, &table, args.alpha)?;
            Ok((fio::bayes_report_to_json(&report), None))
        }

        Command::Edf(args) => {
            let model1 = ctx.load_model(&args.model1, warnings)?;
            let model2 = ctx.load_model(&args.model2, warnings)?;
            let table = ctx.load_table(&args.table, &model1)?;
            let pair = ModelPair::new(&model1, &model2)?;
            let report = bayes::d_edf(pair, &table)?;
            Ok((fio::edf_report_to_json(&report), None))
        }

        Command::Rank(args) => {
            let mode = match args.mode {
                RankingMode::Asymptotic => RankMode::Asymptotic,
                RankingMode::AtAlpha => RankMode::AtAlpha(args.alpha.ok_or_else(|| {
                    Error::Io("rank --mode at-alpha requires --alpha".into())
                })?),
            };
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&args.models)
                .map_err(|e| Error::Io(format!("{}: {e}", args.models.display())))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::Io(format!(
                    "no .json model specs in {}",
                    args.models.display()
                )));
            }
            let mut models = Vec::new();
            for path in &paths {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                models.push((name, ctx.load_model(path, warnings)?));
            }
            let table = ctx.load_table(&args.table, &models[0].1)?;
            let entries = bayes::rank_models(&models, &table, mode)?;
            Ok((fio::rank_to_json(&entries), None))
        }
    }
}

trait ErrorExt {
    fn clone_as_noncomputable(&self) -> Error;
}

impl ErrorExt for Error {
    fn clone_as_noncomputable(&self) -> Error {
        Error::NonComputable(self.to_string())
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidModel(_) | Error::InvalidTable(_) | Error::Io(_) | Error::NotInModel { .. } => 2,
        _ => 3,
    }
}

fn write_outputs(cli: &Cli, ctx: &RunContext, value: &Value) -> Result<(), Error> {
    let Some(out) = &cli.out else {
        return Ok(());
    };
    let rendered = format!("{}\n", serde_json::to_string_pretty(value).expect("serializable"));
    std::fs::write(out, &rendered).map_err(|e| Error::Io(format!("{}: {e}", out.display())))?;
    let manifest = json!({
        "command": std::env::args().collect::<Vec<_>>(),
        "inputs": ctx.input_digests,
        "version": env!("CARGO_PKG_VERSION"),
        "j_order": ctx.j_orders,
        "seed": cli.seed,
        "timestamp_unix": SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "outputs": value,
    });
    let manifest_path = out.with_extension("manifest.json");
    std::fs::write(
        &manifest_path,
        format!("{}\n", serde_json::to_string_pretty(&manifest).expect("serializable")),
    )
    .map_err(|e| Error::Io(format!("{}: {e}", manifest_path.display())))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut ctx = RunContext::default();
    let mut warnings = Vec::new();
    match run(&cli, &mut ctx, &mut warnings) {
        Ok((value, rendered_table)) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            match rendered_table {
                Some(text) => print!("{text}"),
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&value).expect("serializable")
                ),
            }
            if let Err(e) = write_outputs(&cli, &ctx, &value) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
