//! Command-line drivers and file formats.
//!
//! Every command reads and writes JSON artifacts. An artifact is an envelope
//! carrying the tool version, the resolved configuration, and the payload, so
//! identical `(input, seed, config)` triples always produce byte-identical
//! files. Instance and triangulation files are accepted either bare or
//! wrapped in such an envelope (under the `"instance"` / `"triangulation"`
//! key), and loading an instance always *re-validates* it from its raw
//! incidence lists and term matrices — a hand-edited file that breaks
//! commutation or Hermiticity is rejected with the offending pair named.
//!
//! Set `CLH2D_CACHE` to a directory to memoize exact diagonalizations across
//! runs, keyed by a content hash of the instance.

use crate::clh_instance::{
    attach_terms_with_tol, conjugated, defected_toric_instance, scramble, toric_instance,
    CLHInstance, DefectCoefficients, InstanceError, LocalTerm, TermSite, DEFAULT_TOL,
};
use crate::linalg;
use crate::operator_algebra::{calibrate, classify_on_edge, Classification};
use crate::partition::{
    build_superparticles, triangulated_grid, verify_partition, verify_quasi_euclidean,
    verify_two_local, Triangulation,
};
use crate::reduction::{edge_is_trivial, remove_all_classical};
use crate::state_engine::DEFAULT_SV_CAP;
use crate::structure::{
    classify_roles, fixable_set, puncture, verify_equivalence, DEFAULT_RIBBON_BUDGET,
};
use crate::surface_complex::{
    build_complex_lenient, planar_grid, torus_grid, RawComplex, SurfaceComplex,
};
use crate::synthesis::{
    full_pipeline, np_certificate, verify_certificate, BackendChoice, PipelineOptions,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Analyze commuting local Hamiltonians on 2D polygonal complexes and
/// synthesize their groundstates.
#[derive(Parser, Debug)]
#[command(name = "clh2d", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate instance (and triangulation) files.
    Gen(GenArgs),
    /// Validate a complex/instance file and report every violated invariant.
    Validate(InArgs),
    /// Summarize an instance: sizes, residuals, roles, edge algebras.
    Analyze(InOutArgs),
    /// Remove all classical qubits and write the reduced instance + witness.
    Reduce(ReduceArgs),
    /// Calibrate and check the toric-form structure of every term.
    Equivalence(InOutArgs),
    /// Compute the fixable set and write the punctured instance + witnesses.
    Puncture(PunctureArgs),
    /// Build and verify a super-particle partition from a triangulation.
    Partition(PartitionArgs),
    /// Synthesize a groundstate end-to-end and dump the state + report.
    Prepare(PrepareArgs),
    /// Produce and verify a ground-energy certificate.
    Certify(CertifyArgs),
}

#[derive(Args, Debug)]
struct InArgs {
    /// Input instance file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Commutation tolerance override for re-validation.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Output artifact path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InOutArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Reduced-instance artifact path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PunctureArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Search budget for correction ribbons.
    #[arg(long, default_value_t = DEFAULT_RIBBON_BUDGET)]
    ribbon_budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Triangulation file.
    #[arg(long)]
    tri: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Search budget for correction ribbons when puncturing.
    #[arg(long, default_value_t = DEFAULT_RIBBON_BUDGET)]
    ribbon_budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PrepareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Master seed; all measurement randomness derives from it.
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    /// Statevector qubit cap.
    #[arg(long, default_value_t = DEFAULT_SV_CAP)]
    max_sv_qubits: usize,
    #[arg(long, default_value_t = DEFAULT_RIBBON_BUDGET)]
    ribbon_budget: usize,
    /// Optional triangulation to verify a 2-local partition along the way.
    #[arg(long)]
    tri: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Instance file, or a directory of `.json` instance files to certify
    /// in sequence.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    tri: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Subcommand, Debug)]
enum GenKind {
    /// Canonical toric code: stars −Z^⊗deg, plaquettes −X^⊗len.
    Toric {
        /// Grid size, e.g. `3x3`.
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        /// Wrap the grid into a torus (closed surface).
        #[arg(long)]
        closed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Defected toric code with seeded random coefficients per site.
    Defected {
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long)]
        closed: bool,
        /// Seed for the coefficient draw.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Defected toric code conjugated by seeded random single-qubit
    /// unitaries.
    Scrambled {
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long)]
        closed: bool,
        /// Seed for both the coefficient draw and the unitaries.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Torus with one star replaced by a scalar — a coboundary hole that
    /// makes the surrounding terms puncturable.
    Holed {
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        /// Defect coefficients when given; canonical toric otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Planar toric code on a block-triangulated grid, plus its
    /// triangulation file.
    Triangulated {
        /// Block grid size, e.g. `2x2`.
        #[arg(long, value_parser = parse_size)]
        blocks: (usize, usize),
        /// Triangle leg radius; each block becomes a 4r×4r patch.
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Triangulation output path.
        #[arg(long)]
        tri: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Auto,
    Stabilizer,
    Statevector,
}

impl From<BackendArg> for BackendChoice {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => BackendChoice::Auto,
            BackendArg::Stabilizer => BackendChoice::Stabilizer,
            BackendArg::Statevector => BackendChoice::Statevector,
        }
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| format!("size components must be positive integers, got {t:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// Anything a command can fail with; rendered as a machine-readable error
/// artifact on stdout.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error("complex in {path} is invalid")]
    InvalidComplex { path: PathBuf, violations: Vec<String> },
    #[error("{0}")]
    Message(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Algebra(#[from] crate::operator_algebra::AlgebraError),
    #[error(transparent)]
    Structure(#[from] crate::structure::StructureError),
    #[error(transparent)]
    Reduction(#[from] crate::reduction::ReductionError),
    #[error(transparent)]
    Partition(#[from] crate::partition::PartitionError),
    #[error(transparent)]
    Synthesis(#[from] crate::synthesis::SynthesisError),
    #[error("artifact serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn to_value(&self) -> Value {
        match self {
            CliError::InvalidComplex { path, violations } => json!({
                "error": self.to_string(),
                "path": path,
                "violations": violations,
            }),
            other => json!({ "error": other.to_string() }),
        }
    }
}

/// Parse `std::env::args` and run. Returns the process exit code: 0 on
/// success, 1 on a command failure (with a JSON error report on stdout),
/// 2 on a usage error.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version exit cleanly; real usage errors with code 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let label = command_label(&cli.command);
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            let report = envelope(label, json!({}), json!({ "failure": err.to_value() }));
            println!("{}", to_pretty(&report));
            1
        }
    }
}

fn command_label(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Validate(_) => "validate",
        Command::Analyze(_) => "analyze",
        Command::Reduce(_) => "reduce",
        Command::Equivalence(_) => "equivalence",
        Command::Puncture(_) => "puncture",
        Command::Partition(_) => "partition",
        Command::Prepare(_) => "prepare",
        Command::Certify(_) => "certify",
    }
}

// ---------------------------------------------------------------------------
// Artifact plumbing
// ---------------------------------------------------------------------------

fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializing a Value cannot fail")
}

/// Wrap a payload with tool version and resolved configuration.
fn envelope(command: &str, config: Value, payload: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert(
        "tool".into(),
        json!({ "name": "clh2d", "version": env!("CARGO_PKG_VERSION") }),
    );
    out.insert("command".into(), Value::String(command.into()));
    out.insert("config".into(), config);
    if let Value::Object(map) = payload {
        out.extend(map);
    }
    Value::Object(out)
}

fn emit(out: Option<&Path>, artifact: &Value) -> Result<(), CliError> {
    let text = format!("{}\n", to_pretty(artifact));
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

/// Unwrap an envelope if present: `{"...", "instance": {...}}` → the inner
/// value; a bare payload passes through.
fn unwrap_payload(value: Value, key: &str) -> Value {
    match value {
        Value::Object(mut map) if map.contains_key(key) => map.remove(key).unwrap(),
        other => other,
    }
}

/// Serialize a complex back to its raw incidence lists.
fn to_raw(c: &SurfaceComplex) -> RawComplex {
    RawComplex {
        vertices: c.vertices().map(|v| c.vertex_name(v).to_string()).collect(),
        edges: c
            .edges()
            .map(|e| {
                let [a, b] = c.endpoints(e);
                (
                    c.edge_name(e).to_string(),
                    c.vertex_name(a).to_string(),
                    c.vertex_name(b).to_string(),
                )
            })
            .collect(),
        faces: c
            .faces()
            .map(|f| {
                (
                    c.face_name(f).to_string(),
                    c.face_boundary(f)
                        .iter()
                        .map(|&e| c.edge_name(e).to_string())
                        .collect(),
                )
            })
            .collect(),
    }
}

/// Load an instance file and re-validate it from scratch: the complex is
/// rebuilt from raw incidence lists, the terms re-attached with full
/// Hermiticity/support/commutation checks at the requested tolerance.
fn load_instance(path: &Path, tol: f64) -> Result<(CLHInstance, Vec<String>), CliError> {
    let value = unwrap_payload(read_json(path)?, "instance");
    let parsed: CLHInstance = serde_json::from_value(value).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let raw = to_raw(&parsed.complex);
    let (complex, warnings) =
        build_complex_lenient(&raw).map_err(|errors| CliError::InvalidComplex {
            path: path.to_path_buf(),
            violations: errors.iter().map(|e| e.to_string()).collect(),
        })?;
    let instance = attach_terms_with_tol(complex, parsed.terms().to_vec(), tol)?;
    let mut notes: Vec<String> = warnings.iter().map(|w| w.to_string()).collect();
    notes.extend(instance.warnings.iter().cloned());
    Ok((instance, notes))
}

fn load_triangulation(path: &Path) -> Result<Triangulation, CliError> {
    let value = unwrap_payload(read_json(path)?, "triangulation");
    serde_json::from_value(value).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Exact-energy cache
// ---------------------------------------------------------------------------

/// Exact ground energy memoized under `CLH2D_CACHE` (when set), keyed by a
/// content hash of the instance. `None` when the register exceeds the exact
/// solver's cap.
fn cached_exact_energy(instance: &CLHInstance) -> Result<Option<f64>, CliError> {
    let cache_dir = std::env::var_os("CLH2D_CACHE").map(PathBuf::from);
    let key = cache_dir.as_ref().map(|dir| {
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(instance).expect("instance serializes"));
        dir.join(format!("{:x}.json", hasher.finalize()))
    });
    if let Some(path) = &key {
        if let Ok(text) = fs::read_to_string(path) {
            if let Ok(value) = serde_json::from_str::<Value>(&text) {
                return Ok(value.get("energy").and_then(Value::as_f64));
            }
        }
    }
    let energy = match instance.exact_ground_energy() {
        Ok(e) => Some(e),
        Err(InstanceError::TooLarge { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = &key {
        if let Some(dir) = path.parent() {
            let _ = fs::create_dir_all(dir);
        }
        let _ = fs::write(path, format!("{}\n", json!({ "energy": energy })));
    }
    Ok(energy)
}

// ---------------------------------------------------------------------------
// Command execution
// ---------------------------------------------------------------------------

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Validate(args) => validate(args),
        Command::Analyze(args) => analyze(args),
        Command::Reduce(args) => reduce(args),
        Command::Equivalence(args) => equivalence(args),
        Command::Puncture(args) => puncture_cmd(args),
        Command::Partition(args) => partition_cmd(args),
        Command::Prepare(args) => prepare(args),
        Command::Certify(args) => certify(args),
    }
}

fn grid(size: (usize, usize), closed: bool) -> Result<SurfaceComplex, CliError> {
    let built = if closed {
        torus_grid(size.0, size.1)
    } else {
        planar_grid(size.0, size.1)
    };
    built.map_err(|e| CliError::Message(format!("grid construction failed: {e}")))
}

fn gen(args: GenArgs) -> Result<i32, CliError> {
    match args.kind {
        GenKind::Toric { size, closed, out } => {
            let instance = toric_instance(&grid(size, closed)?)?;
            let config = json!({ "size": [size.0, size.1], "closed": closed });
            emit(
                out.as_deref(),
                &envelope("gen toric", config, json!({ "instance": instance })),
            )?;
        }
        GenKind::Defected {
            size,
            closed,
            seed,
            out,
        } => {
            let complex = grid(size, closed)?;
            let coeffs = DefectCoefficients::random(&complex, seed);
            let instance = defected_toric_instance(&complex, &coeffs)?;
            let config = json!({ "size": [size.0, size.1], "closed": closed, "seed": seed });
            emit(
                out.as_deref(),
                &envelope(
                    "gen defected",
                    config,
                    json!({ "coefficients": coeffs, "instance": instance }),
                ),
            )?;
        }
        GenKind::Scrambled {
            size,
            closed,
            seed,
            out,
        } => {
            let complex = grid(size, closed)?;
            let coeffs = DefectCoefficients::random(&complex, seed);
            let instance = scramble(&defected_toric_instance(&complex, &coeffs)?, seed)?;
            let config = json!({ "size": [size.0, size.1], "closed": closed, "seed": seed });
            emit(
                out.as_deref(),
                &envelope("gen scrambled", config, json!({ "instance": instance })),
            )?;
        }
        GenKind::Holed { size, seed, out } => {
            let complex = grid(size, true)?;
            let base = match seed {
                Some(s) => {
                    defected_toric_instance(&complex, &DefectCoefficients::random(&complex, s))?
                }
                None => toric_instance(&complex)?,
            };
            let v0 = complex
                .vertex_by_name("v:0,0")
                .expect("grid names its origin vertex");
            let qubits = complex.star(v0);
            let hole = LocalTerm {
                site: TermSite::Star(v0),
                qubits: qubits.clone(),
                matrix: linalg::eye(1 << qubits.len()).mapv(|z| z * 0.3),
            };
            let instance = base.with_replaced_term(hole)?;
            let config = json!({ "size": [size.0, size.1], "seed": seed });
            emit(
                out.as_deref(),
                &envelope("gen holed", config, json!({ "instance": instance })),
            )?;
        }
        GenKind::Triangulated {
            blocks,
            radius,
            out,
            tri,
        } => {
            let (complex, triangulation) = triangulated_grid(blocks.0, blocks.1, radius)?;
            let instance = toric_instance(&complex)?;
            let config = json!({ "blocks": [blocks.0, blocks.1], "radius": radius });
            emit(
                Some(tri.as_path()),
                &envelope(
                    "gen triangulated",
                    config.clone(),
                    json!({ "triangulation": triangulation }),
                ),
            )?;
            emit(
                out.as_deref(),
                &envelope("gen triangulated", config, json!({ "instance": instance })),
            )?;
        }
    }
    Ok(0)
}

fn validate(args: InArgs) -> Result<i32, CliError> {
    let config = json!({ "in": args.input, "tol": args.tol });
    let (report, ok) = match load_instance(&args.input, args.tol) {
        Ok((instance, warnings)) => (
            json!({
                "valid": true,
                "n_qubits": instance.n_qubits(),
                "n_terms": instance.terms().len(),
                "closed": instance.complex.is_closed(),
                "max_commutation_residual": instance.max_commutation_residual(),
                "warnings": warnings,
            }),
            true,
        ),
        Err(CliError::InvalidComplex { violations, .. }) => (
            json!({ "valid": false, "violations": violations }),
            false,
        ),
        Err(CliError::Instance(e)) => (
            json!({ "valid": false, "violations": [e.to_string()] }),
            false,
        ),
        Err(other) => return Err(other),
    };
    emit(
        args.out.as_deref(),
        &envelope("validate", config, json!({ "report": report })),
    )?;
    Ok(if ok { 0 } else { 1 })
}

fn analyze(args: InOutArgs) -> Result<i32, CliError> {
    let (instance, warnings) = load_instance(&args.input, args.tol)?;
    let complex = &instance.complex;
    let roles = classify_roles(&instance)?;
    let mut trivial = 0usize;
    let mut line = 0usize;
    let mut full = 0usize;
    for term in instance.terms() {
        for &e in &term.qubits {
            match classify_on_edge(term, e)? {
                Classification::Trivial => trivial += 1,
                Classification::PauliLine(_) => line += 1,
                Classification::Full => full += 1,
            }
        }
    }
    let mut classical_edges = Vec::new();
    for e in complex.edges() {
        if edge_is_trivial(&instance, e)? {
            classical_edges.push(complex.edge_name(e).to_string());
        }
    }
    let special: Vec<String> = roles
        .special_edges()
        .iter()
        .map(|&e| complex.edge_name(e).to_string())
        .collect();
    let report = json!({
        "n_qubits": instance.n_qubits(),
        "n_terms": instance.terms().len(),
        "closed": complex.is_closed(),
        "max_degree": complex.max_degree(),
        "max_commutation_residual": instance.max_commutation_residual(),
        "edge_actions": { "trivial": trivial, "pauli_line": line, "full": full },
        "classical_edges": classical_edges,
        "special_edges": special,
        "interior_terms": roles.interior_terms.len(),
        "exact_ground_energy": cached_exact_energy(&instance)?,
        "warnings": warnings,
    });
    let config = json!({ "in": args.input, "tol": args.tol });
    emit(
        args.out.as_deref(),
        &envelope("analyze", config, json!({ "report": report })),
    )?;
    Ok(0)
}

fn reduce(args: ReduceArgs) -> Result<i32, CliError> {
    let (instance, _) = load_instance(&args.input, args.tol)?;
    let (reduced, witness) = remove_all_classical(&instance)?;
    let removed: Vec<String> = witness
        .steps
        .iter()
        .map(|s| instance.complex.edge_name(s.edge).to_string())
        .collect();
    let config = json!({ "in": args.input, "tol": args.tol });
    emit(
        args.out.as_deref(),
        &envelope(
            "reduce",
            config,
            json!({
                "report": { "removed_qubits": removed },
                "witness": witness,
                "instance": reduced,
            }),
        ),
    )?;
    Ok(0)
}

fn equivalence(args: InOutArgs) -> Result<i32, CliError> {
    let (instance, _) = load_instance(&args.input, args.tol)?;
    let (reduced, _) = remove_all_classical(&instance)?;
    let cal = calibrate(&reduced)?;
    let calibrated = conjugated(&reduced, &cal.unitaries)?;
    let report = verify_equivalence(&calibrated)?;
    let config = json!({ "in": args.input, "tol": args.tol });
    emit(
        args.out.as_deref(),
        &envelope("equivalence", config, json!({ "report": report })),
    )?;
    Ok(0)
}

fn puncture_cmd(args: PunctureArgs) -> Result<i32, CliError> {
    let (instance, _) = load_instance(&args.input, args.tol)?;
    let roles = classify_roles(&instance)?;
    let fixable = fixable_set(&instance, &roles, args.ribbon_budget)?;
    let punctured = puncture(&instance, &fixable)?;
    let config = json!({
        "in": args.input,
        "tol": args.tol,
        "ribbon_budget": args.ribbon_budget,
    });
    emit(
        args.out.as_deref(),
        &envelope(
            "puncture",
            config,
            json!({
                "report": {
                    "removed_terms": punctured.removed.len(),
                    "interior_terms": roles.interior_terms.len(),
                },
                "removed": punctured.removed,
                "instance": punctured.instance,
            }),
        ),
    )?;
    Ok(0)
}

fn partition_cmd(args: PartitionArgs) -> Result<i32, CliError> {
    let (instance, _) = load_instance(&args.input, args.tol)?;
    let tri = load_triangulation(&args.tri)?;
    let quasi = verify_quasi_euclidean(&instance.complex, &tri, tri.r, tri.big_r, tri.degree);
    // Super-particles partition the *punctured* Hamiltonian; the interior
    // terms are removed first exactly as the synthesis pipeline does.
    let roles = classify_roles(&instance)?;
    let fixable = fixable_set(&instance, &roles, args.ribbon_budget)?;
    let punctured = puncture(&instance, &fixable)?;
    let partition = build_superparticles(&punctured.instance, &tri)?;
    let covered = verify_partition(&instance.complex, &partition);
    let two_local = verify_two_local(&punctured.instance, &partition)?;
    let config = json!({
        "in": args.input,
        "tri": args.tri,
        "tol": args.tol,
        "ribbon_budget": args.ribbon_budget,
    });
    let ok = quasi.ok && covered && two_local;
    emit(
        args.out.as_deref(),
        &envelope(
            "partition",
            config,
            json!({
                "report": {
                    "quasi_euclidean": quasi,
                    "removed_terms": punctured.removed.len(),
                    "covered": covered,
                    "two_local": two_local,
                    "blocks": partition.blocks.len(),
                    "max_block": partition.max_block(),
                },
                "partition": partition,
            }),
        ),
    )?;
    Ok(if ok { 0 } else { 1 })
}

fn prepare(args: PrepareArgs) -> Result<i32, CliError> {
    let (instance, _) = load_instance(&args.input, args.tol)?;
    let tri = args.tri.as_deref().map(load_triangulation).transpose()?;
    let opts = PipelineOptions {
        backend: args.backend.into(),
        sv_cap: args.max_sv_qubits,
        ribbon_budget: args.ribbon_budget,
    };
    let (state, report) = full_pipeline(&instance, tri.as_ref(), args.seed, &opts)?;
    let config = json!({
        "in": args.input,
        "seed": args.seed,
        "backend": format!("{:?}", args.backend).to_lowercase(),
        "max_sv_qubits": args.max_sv_qubits,
        "ribbon_budget": args.ribbon_budget,
        "tri": args.tri,
        "tol": args.tol,
    });
    let state_dump = json!({
        "backend": format!("{:?}", state.backend()).to_lowercase(),
        "n_qubits": state.n_qubits(),
        "outcome_log": state.outcome_log,
        "dump": state.dump().lines().collect::<Vec<_>>(),
    });
    let all_passed = report.all_passed();
    emit(
        args.out.as_deref(),
        &envelope(
            "prepare",
            config,
            json!({ "report": report, "state": state_dump }),
        ),
    )?;
    Ok(if all_passed { 0 } else { 1 })
}

fn certify_one(path: &Path, tri: Option<&Triangulation>, tol: f64) -> Result<Value, CliError> {
    let (instance, _) = load_instance(path, tol)?;
    let certificate = np_certificate(&instance, tri)?;
    let verdict = verify_certificate(&instance, &certificate);
    Ok(json!({
        "in": path,
        "accepted": verdict.accepted,
        "certificate": certificate,
        "verdict": verdict,
    }))
}

fn certify(args: CertifyArgs) -> Result<i32, CliError> {
    let tri = args.tri.as_deref().map(load_triangulation).transpose()?;
    let config = json!({ "in": args.input, "tri": args.tri, "tol": args.tol });
    let mut results = Vec::new();
    if args.input.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(&args.input)
            .map_err(|source| CliError::Read {
                path: args.input.clone(),
                source,
            })?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        entries.sort();
        if entries.is_empty() {
            return Err(CliError::Message(format!(
                "no .json instance files in {}",
                args.input.display()
            )));
        }
        for path in entries {
            results.push(certify_one(&path, tri.as_ref(), args.tol)?);
        }
    } else {
        results.push(certify_one(&args.input, tri.as_ref(), args.tol)?);
    }
    let accepted = results
        .iter()
        .all(|r| r["accepted"].as_bool().unwrap_or(false));
    emit(
        args.out.as_deref(),
        &envelope(
            "certify",
            config,
            json!({ "accepted": accepted, "results": results }),
        ),
    )?;
    Ok(if accepted { 0 } else { 1 })
}
