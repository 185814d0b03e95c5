//! `symq`: JSON front end for symmetry quotients, quantum graphs, isospectral pairs and divisors.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 symmetry violation, 3 input error,
//! 4 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use symq::divisors::{check_divisor, divisor_vs_trivial_quotient, y_projector};
use symq::io::{
    conditions_to_value, load_json, matrix_to_value, parse_edge_symmetry, parse_group, parse_matrix, parse_pair,
    parse_partition, parse_quantum_graph, parse_representation, parse_representation_list,
};
use symq::isospectral::certify_isospectral;
use symq::linalg::{cluster, cluster_tolerance, eig, eig_with_tol, is_hermitian, unitary_defect, CMatrix, C64};
use symq::quantum_graph::{
    self as qg, quotient_graph, quotient_invariants, quotient_scattering, scattering_matrix, secular_spectrum,
    symmetrize_conditions, unitary_evolution, verify_secular_union, MetricGraph, VertexConditions,
};
use symq::quotient::{
    check_pi_symmetric, kernel_space_with_tol, quotient, quotient_blocks_with_tol, verify_decomposition_with,
    verify_fundamental_with, verify_spectral_with, verify_structure, Tolerances,
};
use symq::{Error, PermGroup, Representation};

#[derive(Parser)]
#[command(name = "symq", version, about = "Symmetry quotients of operators and quantum graphs")]
struct Cli {
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_rank: Option<f64>,
    /// Eigenvalue clustering tolerance.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_spec: Option<f64>,
    /// Residual tolerance for property checks.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tol_residual: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Compare the report against a golden JSON file; differences go to stderr and exit 1.
    #[arg(long, global = true)]
    golden: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quotient operator Op_ρ of an operator under a permutation action.
    Quotient {
        #[arg(long)]
        group: PathBuf,
        /// Representation file, or a selector: trivial, regular, permutation, sign:<gens>.
        #[arg(long)]
        rep: String,
        #[arg(long)]
        operator: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Blocks)]
        mode: Mode,
    },
    /// Clustered eigenvalues of an operator file or of a quotient report.
    Spectrum {
        #[arg(long)]
        operator: PathBuf,
    },
    /// Fundamental, structure, decomposition and spectral checks for every irrep.
    Verify {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        irreps: PathBuf,
    },
    /// Quantum graph commands.
    Qg {
        #[command(subcommand)]
        command: QgCommand,
    },
    /// Isospectrality certificate for a pair (H1, σ1), (H2, σ2).
    Isospectral {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        group: PathBuf,
    },
    /// Divisor of an integer matrix under a partition, or under the orbits of a group.
    Divisor {
        #[arg(long)]
        adjacency: PathBuf,
        #[arg(long, conflicts_with = "group", required_unless_present = "group")]
        partition: Option<PathBuf>,
        #[arg(long)]
        group: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Matrix path Θ*(I_r ⊗ Op)Θ on a canonical kernel basis.
    Plain,
    /// Orbit-block formula on the orbit-adapted basis.
    Blocks,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct SymmetricGraphArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Edge action file `{"generators": {...}}`.
    #[arg(long)]
    symmetry: PathBuf,
}

#[derive(Subcommand)]
enum QgCommand {
    /// Quotient graph (A_ρ, B_ρ) and its scattering matrix S_ρ(k).
    Quotient {
        #[command(flatten)]
        graph: SymmetricGraphArgs,
        #[arg(long)]
        rep: String,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Scattering matrix S(k) and evolution U(k).
    Scatter {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Roots of det(I − U(k)) in (k-min, k-max].
    Secular {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 0.0)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Secular roots of the graph against the union over irrep quotients.
    Compare {
        #[command(flatten)]
        graph: SymmetricGraphArgs,
        #[arg(long)]
        irreps: PathBuf,
        #[arg(long)]
        k_max: f64,
    },
}

/// A finished command: the report and whether every check passed.
struct Report {
    value: Value,
    pass: bool,
}

struct Failure {
    code: u8,
    message: String,
    report: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let report = match &e {
            Error::ConditionNotMet(r) => serde_json::to_value(r.as_ref()).ok(),
            _ => None,
        };
        Failure { code: exit_code(&e), message: e.to_string(), report }
    }
}

fn input_failure(message: String) -> Failure {
    Failure { code: 3, message, report: None }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConditionNotMet(_) => 1,
        Error::NotPiSymmetric { .. } => 2,
        Error::EigFail { .. } | Error::SingularAiB | Error::SingularAikB { .. } | Error::GridTooCoarse { .. } => 4,
        _ => 3,
    }
}

type Outcome = std::result::Result<Report, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let code = match run(&cli) {
        Ok(report) => finish(&cli, report),
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(v) = f.report {
                let _ = emit(&cli, &v);
            }
            f.code
        }
    };
    ExitCode::from(code)
}

fn finish(cli: &Cli, report: Report) -> u8 {
    if let Err(e) = emit(cli, &report.value) {
        eprintln!("error: {e}");
        return 3;
    }
    let mut pass = report.pass;
    if let Some(path) = &cli.golden {
        match load_json(path) {
            Ok(golden) => {
                let mut diffs = Vec::new();
                diff_values(&golden, &report.value, "$", cli.tol_residual.unwrap_or(1e-9), &mut diffs);
                for d in &diffs {
                    eprintln!("golden diff: {d}");
                }
                pass &= diffs.is_empty();
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 3;
            }
        }
    }
    if pass {
        0
    } else {
        1
    }
}

fn emit(cli: &Cli, value: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize") + "\n";
    match &cli.output {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    let tol = tolerances(cli)?;
    let report = match &cli.command {
        Command::Quotient { group, rep, operator, mode } => cmd_quotient(group, rep, operator, *mode, &tol),
        Command::Spectrum { operator } => cmd_spectrum(operator, &tol),
        Command::Verify { group, operator, irreps } => cmd_verify(group, operator, irreps, &tol),
        Command::Qg { command } => cmd_qg(command),
        Command::Isospectral { pair, operator, group } => cmd_isospectral(pair, operator, group),
        Command::Divisor { adjacency, partition, group } => cmd_divisor(adjacency, partition.as_deref(), group.as_deref()),
    }?;
    Ok(Report { value: normalize(report.value), pass: report.pass })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("SYMQ_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| input_failure(format!("SYMQ_THREADS must be a positive integer, got \"{raw}\"")))?;
    // Fails only if a pool was already installed, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn tolerances(cli: &Cli) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    for (flag, value, slot) in [
        ("--tol-rank", cli.tol_rank, &mut tol.rank),
        ("--tol-spec", cli.tol_spec, &mut tol.spec),
        ("--tol-residual", cli.tol_residual, &mut tol.residual),
    ] {
        if let Some(v) = value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(input_failure(format!("{flag} must be positive, got {v}")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

// ---------------------------------------------------------------- loaders

fn load_group(path: &Path) -> Result<Arc<PermGroup>, Failure> {
    Ok(parse_group(&load_json(path)?)?)
}

fn load_operator(path: &Path) -> Result<CMatrix, Failure> {
    let v = load_json(path)?;
    // Quotient reports carry their matrix under "matrix".
    Ok(parse_matrix(v.get("matrix").unwrap_or(&v))?)
}

/// A path when the file exists, otherwise a built-in selector.
fn load_rep(spec: &str, group: &Arc<PermGroup>) -> Result<Representation, Failure> {
    let path = Path::new(spec);
    let v = if path.is_file() { load_json(path)? } else { Value::String(spec.to_string()) };
    Ok(parse_representation(&v, group)?)
}

fn load_graph(path: &Path) -> Result<(MetricGraph, VertexConditions), Failure> {
    Ok(parse_quantum_graph(&load_json(path)?)?)
}

// ---------------------------------------------------------------- values

/// Real number when the imaginary part vanishes, `[re, im]` otherwise.
fn complex_value(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!([z.re, z.im])
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports always serialize")
}

/// Rewrites -0.0 as 0.0 so equal results print identically.
fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if x == 0.0 && n.is_f64() => json!(0.0),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

fn diff_values(want: &Value, got: &Value, path: &str, tol: f64, out: &mut Vec<String>) {
    match (want, got) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            let close = (a - b).abs() <= tol * a.abs().max(1.0);
            if !close {
                out.push(format!("{path}: expected {a}, got {b}"));
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                out.push(format!("{path}: expected {} items, got {}", a.len(), b.len()));
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                diff_values(x, y, &format!("{path}[{i}]"), tol, out);
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            for (k, x) in a {
                match b.get(k) {
                    Some(y) => diff_values(x, y, &format!("{path}.{k}"), tol, out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
            for k in b.keys().filter(|k| !a.contains_key(*k)) {
                out.push(format!("{path}.{k}: unexpected"));
            }
        }
        _ if want == got => {}
        _ => out.push(format!("{path}: expected {want}, got {got}")),
    }
}

// ---------------------------------------------------------------- operator commands

fn cmd_quotient(group: &Path, rep: &str, operator: &Path, mode: Mode, tol: &Tolerances) -> Outcome {
    let group = load_group(group)?;
    let rho = load_rep(rep, &group)?;
    let op = load_operator(operator)?;
    let result = match mode {
        Mode::Blocks => quotient_blocks_with_tol(&op, &rho, &group, tol.rank)?,
        Mode::Plain => {
            check_pi_symmetric(&op, &group)?;
            quotient(&op, &kernel_space_with_tol(&rho, &group, tol.rank)?)?
        }
    };
    let fundamental = verify_fundamental_with(&op, &result.basis, &result, tol);
    let d = result.matrix.nrows();
    let mut out = Map::new();
    out.insert("representation".into(), json!(rho.label()));
    out.insert(
        "mode".into(),
        json!(match mode {
            Mode::Plain => "plain",
            Mode::Blocks => "blocks",
        }),
    );
    out.insert("d".into(), json!(d));
    if d == 0 {
        out.insert("note".into(), json!("d = 0"));
    }
    out.insert("matrix".into(), matrix_to_value(&result.matrix));
    out.insert("hermitian".into(), json!(result.hermitian));
    out.insert("dims".into(), json!(result.dims()));
    out.insert("block_index".into(), to_value(&result.block_index));
    out.insert("paths".into(), to_value(&result.paths));
    out.insert("fundamental".into(), to_value(&fundamental));
    out.insert("pass".into(), json!(fundamental.pass));
    Ok(Report { value: Value::Object(out), pass: fundamental.pass })
}

fn spectrum_value(m: &CMatrix, tol: &Tolerances) -> Result<(Value, bool), Failure> {
    let herm = is_hermitian(m);
    let cutoff = if herm { tol.spec } else { cluster_tolerance(m, false).max(tol.spec) };
    let e = eig_with_tol(m, herm, cutoff)?;
    let list: Vec<Value> = e
        .spectrum
        .eigenvalues
        .iter()
        .zip(&e.spectrum.multiplicities)
        .map(|(&z, &k)| json!({"value": complex_value(z), "multiplicity": k}))
        .collect();
    Ok((Value::Array(list), herm))
}

fn cmd_spectrum(operator: &Path, tol: &Tolerances) -> Outcome {
    let m = load_operator(operator)?;
    if !m.is_square() {
        return Err(Error::BadShape(format!("operator is {}x{}", m.nrows(), m.ncols())).into());
    }
    let (eigenvalues, hermitian) = spectrum_value(&m, tol)?;
    let value = json!({
        "dim": m.nrows(),
        "hermitian": hermitian,
        "distinct": eigenvalues.as_array().map_or(0, |a| a.len()),
        "eigenvalues": eigenvalues,
    });
    Ok(Report { value, pass: true })
}

fn cmd_verify(group: &Path, operator: &Path, irreps: &Path, tol: &Tolerances) -> Outcome {
    let group = load_group(group)?;
    let op = load_operator(operator)?;
    let irreps = parse_representation_list(&load_json(irreps)?, &group)?;
    check_pi_symmetric(&op, &group)?;
    let decomposition = verify_decomposition_with(&op, &group, &irreps, tol)?;
    let herm = is_hermitian(&op);
    let full = eig(&op, herm)?;
    let match_tol = if herm { tol.spec } else { cluster_tolerance(&op, false).max(tol.spec) };
    let spectrum = &full.spectrum;

    let per_irrep: Vec<(Value, bool, Vec<usize>)> = irreps
        .par_iter()
        .map(|rho| -> Result<_, Failure> {
            let q = quotient_blocks_with_tol(&op, rho, &group, tol.rank)?;
            let fundamental = verify_fundamental_with(&op, &q.basis, &q, tol);
            let structure = verify_structure(&op, rho, &group)?;
            let values = eig(&q.matrix, herm)?.values;
            let local = cluster(&values, match_tol);
            // Multiplicity of every full eigenvalue inside spec(Op_ρ).
            let counts: Vec<usize> = spectrum
                .eigenvalues
                .iter()
                .map(|&lam| values.iter().filter(|&&z| (z - lam).norm() <= match_tol.max(1e-9)).count())
                .collect();
            let mut spectral = Vec::new();
            for (&lam, &mult) in spectrum.eigenvalues.iter().zip(&spectrum.multiplicities) {
                let order = if herm { 1 } else { mult as u32 };
                spectral.push(verify_spectral_with(&op, rho, &group, lam, order, tol)?);
            }
            let eigenvalues: Vec<Value> = local
                .eigenvalues
                .iter()
                .zip(&local.multiplicities)
                .map(|(&z, &k)| json!({"value": complex_value(z), "multiplicity": k}))
                .collect();
            let even = local.multiplicities.iter().all(|k| k % 2 == 0);
            let pass = fundamental.pass && structure.pass && spectral.iter().all(|s| s.pass);
            let value = json!({
                "label": rho.label(),
                "degree": rho.degree(),
                "dim": q.matrix.nrows(),
                "eigenvalues": eigenvalues,
                "multiplicities_even": even,
                "fundamental": to_value(&fundamental),
                "structure": to_value(&structure),
                "spectral": to_value(&spectral),
                "pass": pass,
            });
            Ok((value, pass, counts))
        })
        .collect::<Result<_, _>>()?;

    let mut table = Vec::new();
    let mut accounting_pass = true;
    for (i, (&lam, &mult)) in spectrum.eigenvalues.iter().zip(&spectrum.multiplicities).enumerate() {
        let mut contributions = Vec::new();
        let mut accounted = 0;
        for (rho, (_, _, counts)) in irreps.iter().zip(&per_irrep) {
            if counts[i] > 0 {
                accounted += rho.degree() * counts[i];
                contributions.push(json!({
                    "irrep": rho.label(),
                    "degree": rho.degree(),
                    "quotient_multiplicity": counts[i],
                }));
            }
        }
        accounting_pass &= accounted == mult;
        table.push(json!({
            "eigenvalue": complex_value(lam),
            "multiplicity": mult,
            "accounted": accounted,
            "contributions": contributions,
        }));
    }
    let irreps_pass = per_irrep.iter().all(|(_, p, _)| *p);
    let pass = decomposition.pass && accounting_pass && irreps_pass;
    let value = json!({
        "dim": op.nrows(),
        "group_order": group.order(),
        "hermitian": herm,
        "decomposition": to_value(&decomposition),
        "accounting": table,
        "accounting_pass": accounting_pass,
        "irreps": per_irrep.into_iter().map(|(v, _, _)| v).collect::<Vec<_>>(),
        "pass": pass,
    });
    Ok(Report { value, pass })
}

// ---------------------------------------------------------------- quantum graphs

fn load_symmetric_graph(args: &SymmetricGraphArgs) -> Result<(MetricGraph, VertexConditions, Arc<PermGroup>), Failure> {
    let (graph, cond) = load_graph(&args.graph)?;
    let group = parse_edge_symmetry(&load_json(&args.symmetry)?, &graph)?;
    let report = qg::check_pi_symmetric(&graph, &group, &cond)?;
    if !report.pass {
        return Err(Failure {
            code: 2,
            message: "quantum graph is not symmetric under the edge action".into(),
            report: Some(to_value(&report)),
        });
    }
    Ok((graph, cond, group))
}

fn cmd_qg(command: &QgCommand) -> Outcome {
    match command {
        QgCommand::Quotient { graph, rep, k } => {
            let (graph, cond, group) = load_symmetric_graph(graph)?;
            let rho = load_rep(rep, &group)?;
            let sym = symmetrize_conditions(&cond)?;
            let q = quotient_graph(&graph, &group, &rho, &sym)?;
            let (rank, hermitian_defect) = quotient_invariants(&q);
            let s_rho = if q.graph.edge_count() == 0 {
                CMatrix::zeros(0, 0)
            } else {
                scattering_matrix(&q.conditions, *k)?
            };
            let projected = quotient_scattering(&scattering_matrix(&sym, *k)?, &rho, &group, &q.theta_hat)?;
            let residual = symq::linalg::max_abs_diff(&s_rho, &projected);
            let edges: Vec<Value> =
                q.graph.edges().iter().map(|e| json!({"id": e.id, "len": e.length, "potential": e.potential})).collect();
            let pass = rank == 2 * q.graph.edge_count() && hermitian_defect <= 1e-9 && residual <= 1e-9;
            let value = json!({
                "representation": rho.label(),
                "edges": edges,
                "conditions": conditions_to_value(&q.conditions),
                "k": k,
                "S_rho": matrix_to_value(&s_rho),
                "rank": rank,
                "hermitian_defect": hermitian_defect,
                "scattering_residual": residual,
                "pass": pass,
            });
            Ok(Report { value, pass })
        }
        QgCommand::Scatter { graph, k } => {
            let (graph, cond) = load_graph(&graph.graph)?;
            let s = scattering_matrix(&cond, *k)?;
            let u = unitary_evolution(&graph, &cond, *k)?;
            let (ds, du) = (unitary_defect(&s), unitary_defect(&u));
            let pass = ds <= 1e-9 && du <= 1e-9;
            let value = json!({
                "k": k,
                "S": matrix_to_value(&s),
                "U": matrix_to_value(&u),
                "unitary_defect": {"S": ds, "U": du},
                "pass": pass,
            });
            Ok(Report { value, pass })
        }
        QgCommand::Secular { graph, k_min, k_max, step } => {
            let (graph, cond) = load_graph(&graph.graph)?;
            let report = secular_spectrum(&graph, &cond, *k_min, *k_max, *step)?;
            let mut value = to_value(&report);
            value["count"] = json!(report.expanded().len());
            Ok(Report { value, pass: true })
        }
        QgCommand::Compare { graph, irreps, k_max } => {
            let (graph, cond, group) = load_symmetric_graph(graph)?;
            let irreps = parse_representation_list(&load_json(irreps)?, &group)?;
            let report = verify_secular_union(&graph, &group, &cond, &irreps, *k_max)?;
            let mut value = to_value(&report);
            value["k_range"] = json!([0.0, k_max]);
            Ok(Report { pass: report.pass, value })
        }
    }
}

// ---------------------------------------------------------------- pairs and divisors

fn cmd_isospectral(pair: &Path, operator: &Path, group: &Path) -> Outcome {
    let group = load_group(group)?;
    let op = load_operator(operator)?;
    let pair = parse_pair(&load_json(pair)?, &group, pair.parent())?;
    let report = certify_isospectral(&op, &group, &pair)?;
    Ok(Report { pass: report.pass, value: to_value(&report) })
}

fn cmd_divisor(adjacency: &Path, partition: Option<&Path>, group: Option<&Path>) -> Outcome {
    let a = load_operator(adjacency)?;
    match (partition, group) {
        (Some(p), _) => {
            let partition = parse_partition(&load_json(p)?, a.nrows())?;
            let report = check_divisor(&a, &partition)?;
            let value = json!({
                "partition": to_value(&partition),
                "report": to_value(&report),
                "Y": matrix_to_value(&y_projector(&partition)),
                "pass": report.front,
            });
            Ok(Report { pass: report.front, value })
        }
        (None, Some(g)) => {
            let group = load_group(g)?;
            let report = divisor_vs_trivial_quotient(&a, &group)?;
            let divisor = check_divisor(&a, &report.partition)?;
            let mut value = to_value(&report);
            value["rear"] = json!(divisor.rear);
            Ok(Report { pass: report.pass, value })
        }
        (None, None) => Err(input_failure("one of --partition or --group is required".into())),
    }
}
