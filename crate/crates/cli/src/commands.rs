use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use indefgraph::assembly::assemble_global;
use indefgraph::bracketing::{
    asymptotics, convergence_gate, decoupled_spectrum, positive_eigenvalues, sign_flip_residual, verify_bracketing,
    write_bracket_csv, write_fit_csv, AsymptoticsReport, BracketReport, DecoupledKind, DecoupledSpectrum, NondSign,
};
use indefgraph::graph::GraphSpec;
use indefgraph::krein::{krein_report, write_gram_csv, KreinConfig, KreinReport};
use indefgraph::oracle::{scan_roots, write_roots_csv};
use indefgraph::spectrum::{basis_diagnostics, eigenfunction_values, solve_pencil, write_eigenfunction_csv, write_spectrum_csv};
use indefgraph::{Error, ErrorClass, Form, Graph, Spectrum};
use serde::Serialize;

use crate::json;
use crate::{Cli, Command};

const DEFAULT_WINDOW: (f64, f64) = (-50.0, 50.0);
const ORACLE_GRID: usize = 4000;
const GATE_THRESHOLD: f64 = 1e-3;
const MAX_REFINED_MESH: usize = 4096;

pub enum CliError {
    Core(Error),
    Io(String),
    Gate(Vec<String>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Serialize)]
pub struct ErrorReport {
    error: &'static str,
    exit_code: u8,
    message: String,
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Gate(_) => 4,
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Hypothesis => 3,
                ErrorClass::Invariant => 4,
            },
        }
    }

    pub fn to_json(&self) -> ErrorReport {
        let (error, message) = match self {
            CliError::Io(m) => ("io", m.clone()),
            CliError::Gate(f) => ("invariant", format!("gates failed: {}", f.join(", "))),
            CliError::Core(e) => (
                match e.class() {
                    ErrorClass::Validation => "validation",
                    ErrorClass::Hypothesis => "hypothesis",
                    ErrorClass::Invariant => "invariant",
                },
                e.to_string(),
            ),
        };
        ErrorReport {
            error,
            exit_code: self.code(),
            message,
        }
    }
}

type Res<T> = Result<T, CliError>;

fn load(cli: &Cli) -> Res<Graph> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| Error::Parse("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let g: Graph = GraphSpec::from_json(&text)?.to_graph()?;
    Ok(match cli.mesh {
        Some(m) => g.with_mesh(m as usize),
        None => g,
    })
}

fn create(dir: &Path, name: &str) -> Res<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Res<()> {
    fs::write(dir.join(name), json::to_string(value))?;
    Ok(())
}

pub fn run(cli: &Cli) -> Res<()> {
    let g = load(cli)?;
    fs::create_dir_all(&cli.out)?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Spectrum => spectrum(cli, &g, out),
        Command::Krein => krein(cli, &g, out).map(|_| ()),
        Command::Bracket => {
            let rep = bracket(cli, &g, out)?;
            if rep.all_pass {
                Ok(())
            } else {
                Err(CliError::Gate(vec!["bracketing".into()]))
            }
        }
        Command::Asymptotics => {
            let n_hi = cli.truncation.unwrap_or(30);
            let rep = asymptotics(&g, 5.min(n_hi), n_hi, GATE_THRESHOLD)?;
            write_asymptotics(out, &rep)
        }
        Command::Oracle => {
            let (lo, hi) = cli.window.unwrap_or(DEFAULT_WINDOW);
            let scan = scan_roots(&g, lo, hi, ORACLE_GRID)?;
            write_roots_csv(&scan, create(out, "oracle.csv")?)?;
            for w in &scan.warnings {
                eprintln!("warning: {w}");
            }
            Ok(())
        }
        Command::VerifyAll => verify_all(cli, &g, out),
    }
}

fn solve(g: &Graph) -> Res<(Form, Spectrum)> {
    let d = assemble_global(g)?;
    let s = solve_pencil(&d)?;
    Ok((d, s))
}

fn spectrum(cli: &Cli, g: &Graph, out: &Path) -> Res<()> {
    let (d, s) = solve(g)?;
    let mut w = create(out, "spectrum.csv")?;
    write_spectrum_csv(&s, &mut w)?;
    w.flush()?;
    let per_branch = cli.truncation.unwrap_or(5);
    let dir = out.join("eigenfunctions");
    fs::create_dir_all(&dir)?;
    for p in s.positive.iter().take(per_branch).chain(s.negative.iter().take(per_branch)) {
        if let Some((lo, hi)) = cli.window {
            if !(p.lambda > lo && p.lambda < hi) {
                continue;
            }
        }
        let samples = eigenfunction_values(&s, &d, p.index)?;
        let mut w = create(&dir, &format!("branch_{}.csv", p.index))?;
        write_eigenfunction_csv(&samples, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn krein_config(cli: &Cli) -> KreinConfig {
    let mut cfg = KreinConfig {
        probes: cli.probes,
        seed: cli.seed,
        ..KreinConfig::default()
    };
    if let Some(n) = cli.truncation {
        let mut t: Vec<usize> = (1..=n / 5).map(|k| 5 * k).collect();
        if n % 5 != 0 {
            t.push(n);
        }
        cfg.truncations = t;
    }
    cfg
}

fn krein(cli: &Cli, g: &Graph, out: &Path) -> Res<KreinReport> {
    let (d, s) = solve(g)?;
    let rep = krein_report(&d, &s, &krein_config(cli))?;
    write_json(out, "krein.json", &rep)?;
    let mut w = create(out, "gram.csv")?;
    write_gram_csv(&rep.gram_spectra, &mut w)?;
    w.flush()?;
    Ok(rep)
}

#[derive(Serialize)]
struct DecoupledJson {
    kind: DecoupledKind,
    per_edge: Vec<EdgeJson>,
    merged: Vec<f64>,
    multiplicity: Vec<indefgraph::bracketing::MultiplicityEntry>,
}

#[derive(Serialize)]
struct EdgeJson {
    edge_id: String,
    weight: f64,
    mesh: usize,
    positive_definite: bool,
    values: Vec<f64>,
}

impl From<&DecoupledSpectrum<f64>> for DecoupledJson {
    fn from(s: &DecoupledSpectrum<f64>) -> Self {
        Self {
            kind: s.kind,
            per_edge: s
                .per_edge
                .iter()
                .map(|e| EdgeJson {
                    edge_id: e.edge_id.clone(),
                    weight: e.weight.value(),
                    mesh: e.mesh,
                    positive_definite: e.positive_definite,
                    values: e.values.clone(),
                })
                .collect(),
            merged: s.merged_values(),
            multiplicity: s.multiplicity_table.clone(),
        }
    }
}

#[derive(Serialize)]
struct BracketJson<'a> {
    nond_sign: NondSign,
    report: &'a BracketReport,
    neumann: DecoupledJson,
    dirichlet: DecoupledJson,
}

fn bracket(cli: &Cli, g: &Graph, out: &Path) -> Res<BracketReport> {
    let n = cli.truncation.unwrap_or(10);
    let sign = NondSign::from(cli.nond_sign);
    let coupled = positive_eigenvalues(g, n)?;
    let meshes: Vec<usize> = g.edges().iter().map(|e| e.mesh).collect();
    let lower = decoupled_spectrum(g, DecoupledKind::NonDirichlet, sign, n)?;
    let upper = decoupled_spectrum(g, DecoupledKind::Dirichlet, sign, n)?;
    let rep = verify_bracketing(&coupled, &meshes, &lower, &upper, cli.tol_bracket, n)?;
    let mut w = create(out, "bracket.csv")?;
    write_bracket_csv(&rep, &mut w)?;
    w.flush()?;
    write_json(
        out,
        "bracket.json",
        &BracketJson {
            nond_sign: sign,
            report: &rep,
            neumann: (&lower).into(),
            dirichlet: (&upper).into(),
        },
    )?;
    Ok(rep)
}

fn write_asymptotics(out: &Path, rep: &AsymptoticsReport) -> Res<()> {
    write_json(out, "asymptotics.json", rep)?;
    let mut w = create(out, "asymptotics.csv")?;
    write_fit_csv(&rep.fit, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Suite {
    name: &'static str,
    passed: bool,
    checks: Vec<Check>,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    passed: bool,
}

fn at_most(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit,
        passed: value <= limit,
    }
}

fn at_least(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit,
        passed: value >= limit,
    }
}

fn suite(name: &'static str, checks: Vec<Check>) -> Suite {
    Suite {
        name,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    asymptotics_mesh: usize,
    suites: Vec<Suite>,
}

/// Invariant-class failures count as a failed suite; anything else aborts.
fn gated<T>(name: &'static str, r: Res<T>, suites: &mut Vec<Suite>) -> Res<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CliError::Core(e)) if e.class() == ErrorClass::Invariant => {
            eprintln!("{name}: {e}");
            suites.push(suite(name, vec![at_most("error", f64::INFINITY, 0.0)]));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn verify_all(cli: &Cli, g: &Graph, out: &Path) -> Res<()> {
    let mut suites = Vec::new();

    if let Some((d, s)) = gated("spectrum", solve(g), &mut suites)? {
        let b = basis_diagnostics(&s, &d);
        suites.push(suite(
            "spectrum",
            vec![
                at_most("krein_offdiagonal", b.max_krein_offdiag, 1e-10),
                at_most("form_offdiagonal", b.max_form_offdiag, 1e-10),
                at_most("rayleigh_defect", b.max_rayleigh_defect, 1e-9),
                at_most("pencil_residual", b.max_pencil_residual, 1e-10),
            ],
        ));
        let (lo, hi) = cli.window.unwrap_or(DEFAULT_WINDOW);
        if let Some(scan) = gated("oracle", scan_roots(g, lo, hi, ORACLE_GRID).map_err(Into::into), &mut suites)? {
            let mismatch = (scan.count() as f64 - s.count_in(lo, hi) as f64).abs();
            suites.push(suite("oracle", vec![at_most("count_mismatch", mismatch, 0.0)]));
        }
    }

    if let Some(rep) = gated("krein", krein(cli, g, out), &mut suites)? {
        let c = &rep.operator_checks;
        let gram_min = rep.gram_spectra.iter().map(|g| g.min_eig).fold(f64::INFINITY, f64::min);
        let gram_first = rep.gram_spectra.first().map_or(0.0, |g| g.min_eig);
        suites.push(suite(
            "krein",
            vec![
                at_most("vw_identity", rep.max_vw_residual(), 1e-8),
                at_most("maxmin", rep.max_maxmin_gap(), 1e-8),
                at_most("s_self_adjoint", c.s_self_adjoint, 1e-8),
                at_most("s_eigen_agreement", c.s_eigen_agreement, 1e-8),
                at_most("completeness", c.completeness, 1e-8),
                at_most("idempotency", c.idempotency, 1e-8),
                at_most("f_self_adjoint", c.f_self_adjoint, 1e-8),
                at_most("b_orthogonality", c.b_orthogonality, 1e-8),
                at_most("abs_s_identity", c.abs_s_identity, 1e-8),
                at_most("adjoint", c.adjoint, 1e-8),
                at_least("abs_s_min_positive", c.abs_s_min_positive, f64::MIN_POSITIVE),
                at_least("gram_floor", gram_min, 0.5 * gram_first),
            ],
        ));
    }

    if let Some(rep) = gated("bracket", bracket(cli, g, out), &mut suites)? {
        let sign = NondSign::from(cli.nond_sign);
        let n = cli.truncation.unwrap_or(10);
        let flip = sign_flip_residual(g, DecoupledKind::Dirichlet, sign, n)?
            .max(sign_flip_residual(g, DecoupledKind::NonDirichlet, sign, n)?);
        let failing = rep.rows.iter().filter(|r| !r.pass).count() as f64;
        suites.push(suite(
            "bracket",
            vec![
                at_most("failing_rows", failing, 0.0),
                at_least("rows", rep.rows.len() as f64, 1.0),
                at_most("sign_flip", flip, 1e-10),
            ],
        ));
    }

    let (asym_mesh, asym) = refined_asymptotics(g)?;
    write_asymptotics(out, &asym)?;
    suites.push(suite(
        "asymptotics",
        vec![
            at_most("slope_rel_error", asym.fit.slope_rel_error, 2e-2),
            at_most("remainder", asym.fit.max_remainder, std::f64::consts::PI),
        ],
    ));

    let passed = suites.iter().all(|s| s.passed);
    let failed: Vec<String> = suites.iter().filter(|s| !s.passed).map(|s| s.name.to_string()).collect();
    write_json(
        out,
        "verify.json",
        &VerifyReport {
            passed,
            asymptotics_mesh: asym_mesh,
            suites,
        },
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Gate(failed))
    }
}

/// Doubles the mesh until the convergence gate for `n = 30` passes.
fn refined_asymptotics(g: &Graph) -> Res<(usize, AsymptoticsReport)> {
    let mut mesh = g.edges().iter().map(|e| e.mesh).max().unwrap_or(2);
    loop {
        let gm = g.with_mesh(mesh);
        let gate = convergence_gate(&gm, 30, GATE_THRESHOLD)?;
        if gate.passed || mesh >= MAX_REFINED_MESH {
            return Ok((mesh, asymptotics(&gm, 5, 30, GATE_THRESHOLD)?));
        }
        mesh *= 2;
    }
}
