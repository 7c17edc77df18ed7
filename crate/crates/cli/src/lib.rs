//! The `tri` command line. Every subcommand prints one JSON report on stdout.
//!
//! Exit status is 0 on success, 1 when the answer is negative (not certified, not
//! essential, not anchorable, budget exhausted) and 2 for usage or input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use tri_core::foam::dual_of_triangulation;
use tri_core::gluing::{
    essential_via_solution, gluing_system, labels_from_shapes, shapes_from_labels, solve, volume, SolutionVerdict,
    SolveOptions,
};
use tri_core::holonomy::{
    anchorability, develop_labels, l_essential_check, verify_representation, Anchorability, Representation,
    WordPresentation,
};
use tri_core::homology::{homology, Presentation};
use tri_core::io::{parse_any, write_table};
use tri_core::isosig::isosig;
use tri_core::mobius::{Cp1, FixedSet, Mat2};
use tri_core::moves::{self, candidate_sites, Move, MoveKind};
use tri_core::search::{connect, Connection, Filter};
use tri_core::snakes::{build_essential, SearchLimits, SnakeError, DEFAULT_MAX_DEPTH, DEFAULT_MAX_NODES};
use tri_core::surgery::Decorated;
use tri_core::triangulation::{Triangulation, VertexKind};

pub const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "tri", version, about = "Ideal triangulations, moves, gluing equations and essential triangulations")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for solver restarts and search.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FilterArg {
    Labels,
    Solutions,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Check a gluing table and summarise its vertices and edges.
    Validate { file: PathBuf },
    /// Isomorphism signature.
    Isosig { file: PathBuf },
    /// First homology of the underlying manifold.
    Homology { file: PathBuf },
    /// Apply one move.
    Move {
        file: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        site: String,
    },
    /// Legal move sites.
    MovesList {
        file: PathBuf,
        #[arg(long)]
        kind: Option<String>,
    },
    /// The dual foam as JSON.
    Foam { file: PathBuf },
    /// Solve the gluing equations and report shapes and volume.
    Solve {
        file: PathBuf,
        /// Drop the completeness equations.
        #[arg(long)]
        incomplete: bool,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Label-based essentiality with a representation, solution-based without.
    EssentialCheck {
        file: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Common fixed points of peripheral images.
    AnchorCheck {
        rep: PathBuf,
        /// Word presentation with cusp words; without it the generators are the peripheral images.
        #[arg(long)]
        presentation: Option<PathBuf>,
    },
    /// Subdivide and inflate snakes until the triangulation is ideal and essential.
    BuildEssential {
        file: PathBuf,
        /// Labels come from this representation; the geometric one is solved for otherwise.
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_NODES)]
        max_nodes: usize,
    },
    /// Search for a move path between two triangulations through essential ones.
    Connect {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = FilterArg::Labels)]
        filter: FilterArg,
        /// Accepted for compatibility; output is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Fold-fill a cusp meeting exactly two tetrahedra.
    FoldFill {
        file: PathBuf,
        #[arg(long)]
        cusp: usize,
        #[arg(long, default_value_t = 0)]
        diagonal: u8,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunReport {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: Vec<String>,
    inputs: Vec<InputDigest>,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<Value>,
}

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Ctx {
    seed: u64,
    inputs: Vec<InputDigest>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&text)) });
        Ok(text)
    }

    fn triangulation(&mut self, path: &Path) -> Result<Triangulation, CliError> {
        let text = self.read(path)?;
        parse_any(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    fn representation(&mut self, path: &Path) -> Result<Representation, CliError> {
        let text = self.read(path)?;
        Representation::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

/// Parses arguments, runs the subcommand and returns what to print.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => return Output { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    let mut ctx = Ctx { seed: cli.seed, inputs: Vec::new() };
    let start = Instant::now();
    let outcome = pool.install(|| dispatch(&cli.command, &mut ctx));
    let elapsed = start.elapsed();
    match outcome {
        Ok((result, positive)) => {
            let report = RunReport {
                schema: SCHEMA,
                tool: "tri",
                version: env!("CARGO_PKG_VERSION"),
                command,
                inputs: ctx.inputs,
                result,
                timings: cli.timings.then(|| json!({ "elapsed_ms": elapsed.as_secs_f64() * 1e3 })),
            };
            let mut stdout = serde_json::to_string_pretty(&report).expect("serializable report");
            stdout.push('\n');
            Output { code: if positive { 0 } else { 1 }, stdout, stderr: String::new() }
        }
        Err(e) => Output { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn point(p: &Cp1) -> Value {
    match p.to_complex(1e-12) {
        Some(z) if !p.is_infinity(1e-12) => json!([z.re, z.im]),
        _ => json!("inf"),
    }
}

fn matrix(m: &Mat2) -> Value {
    json!([[[m.a.re, m.a.im], [m.b.re, m.b.im]], [[m.c.re, m.c.im], [m.d.re, m.d.im]]])
}

fn kind_name(k: VertexKind) -> &'static str {
    match k {
        VertexKind::Ideal => "ideal",
        VertexKind::Material => "material",
    }
}

fn summary(tri: &Triangulation) -> Value {
    json!({
        "tetrahedra": tri.size(),
        "isosig": isosig(tri).0,
        "vertices": tri.vertices().iter().map(|v| json!({
            "id": v.id, "kind": kind_name(v.kind), "corners": v.corners.len(), "link_euler": v.euler,
        })).collect::<Vec<_>>(),
        "edge_degrees": tri.edges().iter().map(|e| e.degree()).collect::<Vec<_>>(),
        "oriented": tri.is_oriented(),
        "connected": tri.is_connected(),
        "ideal": tri.is_ideal(),
    })
}

fn homology_value(tri: &Triangulation) -> Result<Value, CliError> {
    let h = homology(tri).map_err(input)?;
    Ok(json!({ "group": h.to_string(), "rank": h.rank, "torsion": h.torsion }))
}

fn solve_options(ctx: &Ctx) -> SolveOptions {
    SolveOptions { seed: ctx.seed, ..Default::default() }
}

/// Labels from a representation, or from the complete hyperbolic structure.
fn labels(ctx: &mut Ctx, tri: &Triangulation, rep: Option<&Path>) -> Result<Decorated, CliError> {
    match rep {
        Some(path) => {
            let rep = ctx.representation(path)?;
            let check = verify_representation(&Presentation::new(tri), &rep).map_err(input)?;
            if !check.pass {
                return Err(CliError::Input(format!(
                    "representation does not satisfy the relators (residual {:.3e})",
                    check.worst_residual
                )));
            }
            Ok(develop_labels(tri, &rep).map_err(input)?.dec)
        }
        None => {
            let sys = gluing_system(tri).map_err(input)?;
            let sol = solve(&sys, &solve_options(ctx))
                .map_err(|f| CliError::Input(format!("no hyperbolic structure found (residual {:.3e})", f.last_residual)))?;
            labels_from_shapes(tri, &sol.shapes).map_err(input)
        }
    }
}

fn parse_kind(s: &str) -> Result<MoveKind, CliError> {
    s.parse::<MoveKind>().map_err(input)
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<(Value, bool), CliError> {
    match cmd {
        Command::Validate { file } => {
            let tri = ctx.triangulation(file)?;
            Ok((json!({ "valid": true, "summary": summary(&tri) }), true))
        }
        Command::Isosig { file } => {
            let tri = ctx.triangulation(file)?;
            Ok((json!({ "isosig": isosig(&tri).0 }), true))
        }
        Command::Homology { file } => {
            let tri = ctx.triangulation(file)?;
            Ok((json!({ "h1": homology_value(&tri)? }), true))
        }
        Command::Move { file, kind, site } => {
            let tri = ctx.triangulation(file)?;
            let mv = Move::parse(parse_kind(kind)?, site).map_err(input)?;
            let applied = moves::apply(&Decorated::plain(tri.clone()), &mv).map_err(input)?;
            let out = &applied.result.tri;
            Ok((
                json!({
                    "move": mv,
                    "inverse": applied.inverse,
                    "delta": out.size() as i64 - tri.size() as i64,
                    "summary": summary(out),
                    "table": write_table(out),
                }),
                true,
            ))
        }
        Command::MovesList { file, kind } => {
            let tri = ctx.triangulation(file)?;
            let kinds = match kind {
                Some(k) => vec![parse_kind(k)?],
                None => MoveKind::ALL.to_vec(),
            };
            let plain = Decorated::plain(tri.clone());
            let mut listed = Vec::new();
            for k in kinds {
                for mv in candidate_sites(&tri, k) {
                    if moves::apply(&plain, &mv).is_ok() {
                        listed.push(json!({ "kind": k.name(), "site": mv.site() }));
                    }
                }
            }
            Ok((json!({ "count": listed.len(), "moves": listed }), true))
        }
        Command::Foam { file } => {
            let tri = ctx.triangulation(file)?;
            let foam = dual_of_triangulation(&tri).map_err(input)?;
            Ok((json!({ "foam": foam }), true))
        }
        Command::Solve { file, incomplete, restarts } => {
            let tri = ctx.triangulation(file)?;
            let sys = gluing_system(&tri).map_err(input)?;
            let opts = SolveOptions { restarts: *restarts, complete: !incomplete, ..solve_options(ctx) };
            Ok(match solve(&sys, &opts) {
                Ok(sol) => {
                    let vol = volume(&sol.shapes).map_err(input)?;
                    (
                        json!({
                            "converged": true,
                            "shapes": sol.shapes.z.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                            "edge_residual": sol.edge_residual,
                            "completeness_residual": sol.completeness_residual,
                            "iterations": sol.iterations,
                            "attempt": sol.attempt,
                            "volume": vol,
                        }),
                        true,
                    )
                }
                Err(f) => (json!({ "converged": false, "failure": f }), false),
            })
        }
        Command::EssentialCheck { file, rep, tol } => {
            let tri = ctx.triangulation(file)?;
            match rep {
                Some(path) => {
                    let dec = labels(ctx, &tri, Some(path))?;
                    let report = l_essential_check(&dec, *tol).map_err(input)?;
                    let ok = report.is_essential();
                    Ok((json!({ "method": "labels", "essential": ok, "report": report }), ok))
                }
                None => {
                    let verdict = essential_via_solution(&tri, &solve_options(ctx)).map_err(input)?;
                    let ok = matches!(verdict, SolutionVerdict::Essential { .. });
                    Ok((json!({ "method": "solution", "essential": ok, "verdict": verdict }), ok))
                }
            }
        }
        Command::AnchorCheck { rep, presentation } => {
            let r = ctx.representation(rep)?;
            let mut cusps: Vec<Vec<Mat2>> = Vec::new();
            let mut relators = Value::Null;
            match presentation {
                Some(p) => {
                    let text = ctx.read(p)?;
                    let wp = WordPresentation::from_json(&text).map_err(input)?;
                    let check = wp.verify(&r).map_err(input)?;
                    relators = json!(check);
                    if !check.pass {
                        return Err(CliError::Input(format!(
                            "assignment does not satisfy the relators (residual {:.3e})",
                            check.worst_residual
                        )));
                    }
                    for k in 0..wp.cusps.len() {
                        cusps.push(wp.peripheral_images(&r, k).map_err(input)?);
                    }
                }
                None => cusps.push(r.generators.values().copied().collect()),
            }
            let mut all = true;
            let mut out = Vec::new();
            for (k, images) in cusps.iter().enumerate() {
                let v = match anchorability(images, r.tolerance) {
                    Ok(Anchorability::Anchorable(FixedSet::All)) => json!({ "cusp": k, "anchorable": true, "fixed": "all" }),
                    Ok(Anchorability::Anchorable(FixedSet::Points(ps))) => {
                        json!({ "cusp": k, "anchorable": true, "fixed": ps.iter().map(point).collect::<Vec<_>>() })
                    }
                    Ok(Anchorability::NonAnchorable(w)) => {
                        all = false;
                        json!({ "cusp": k, "anchorable": false, "fixed": [],
                                "k4_witness": { "a": matrix(&w.a), "b": matrix(&w.b), "ab": matrix(&w.ab) } })
                    }
                    Err(e) => {
                        all = false;
                        json!({ "cusp": k, "anchorable": false, "error": e.to_string() })
                    }
                };
                out.push(v);
            }
            Ok((json!({ "relators": relators, "cusps": out, "anchorable": all }), all))
        }
        Command::BuildEssential { file, rep, max_depth, max_nodes } => {
            let tri = ctx.triangulation(file)?;
            if !tri.is_ideal() {
                return Err(CliError::Input("input must be an ideal triangulation".into()));
            }
            let dec = labels(ctx, &tri, rep.as_deref())?;
            let limits = SearchLimits { max_depth: *max_depth, max_nodes: *max_nodes, ..Default::default() };
            match build_essential(&dec, &limits) {
                Ok(built) => {
                    let out = &built.dec.tri;
                    let vol = shapes_from_labels(&built.dec).ok().and_then(|z| volume(&z).ok());
                    let ok = built.report.is_essential();
                    Ok((
                        json!({
                            "essential": ok,
                            "inflations": built.log,
                            "h1_before": homology_value(&tri)?,
                            "h1_after": homology_value(out)?,
                            "volume": vol,
                            "summary": summary(out),
                            "table": write_table(out),
                        }),
                        ok,
                    ))
                }
                Err(e @ (SnakeError::NotFound { .. } | SnakeError::Stalled(_))) => {
                    Ok((json!({ "essential": false, "error": e.to_string() }), false))
                }
                Err(e) => Err(input(e)),
            }
        }
        Command::Connect { a, b, rep, budget, filter, json: _ } => {
            let ta = ctx.triangulation(a)?;
            let tb = ctx.triangulation(b)?;
            let (da, db, f) = match filter {
                FilterArg::Labels => {
                    let da = labels(ctx, &ta, rep.as_deref())?;
                    let db = labels(ctx, &tb, rep.as_deref())?;
                    (da, db, Filter::Labels { tol: 1e-6 })
                }
                FilterArg::Solutions => {
                    (Decorated::plain(ta), Decorated::plain(tb), Filter::Solutions(solve_options(ctx)))
                }
                FilterArg::None => (Decorated::plain(ta), Decorated::plain(tb), Filter::Everything),
            };
            let c = connect(&da, &db, &f, *budget).map_err(input)?;
            let found = matches!(c, Connection::Found { .. });
            let moves: Vec<String> = match &c {
                Connection::Found { moves, .. } => moves.iter().map(|m| m.to_string()).collect(),
                Connection::Exhausted { .. } => Vec::new(),
            };
            Ok((json!({ "connection": c, "path": moves }), found))
        }
        Command::FoldFill { file, cusp, diagonal } => {
            let tri = ctx.triangulation(file)?;
            let mv = Move::FoldFill { cusp: *cusp, diagonal: *diagonal };
            let applied = moves::apply(&Decorated::plain(tri.clone()), &mv).map_err(input)?;
            let out = &applied.result.tri;
            Ok((
                json!({
                    "move": mv,
                    "h1_before": homology_value(&tri)?,
                    "h1_after": homology_value(out)?,
                    "summary": summary(out),
                    "table": write_table(out),
                }),
                true,
            ))
        }
    }
}
