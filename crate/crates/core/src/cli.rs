//! Command-line driver. Every subcommand prints one JSON object on standard
//! output and writes artifacts only where `--out` (or `--emit-model`) points.
//! The exit code is 0 when every check passes, 1 when a check fails, and 2
//! on usage or input errors, which are reported as
//! `{"error": <kind>, "message": <text>}`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::corrsets::{
    embed_outcomes, expand, marginals, project_outcomes, restrict, validate, CorrelationMatrix,
    CorrelationTensor, Projection,
};
use crate::slices::{
    dominance_check, parse_queries, slice, write_report_csv, Side, SliceClass, SliceQuery,
};
use crate::tracial::{
    commutator_defect, read_samples_csv, sample_dq, synthesize, write_samples_csv, ModelFile,
    TracialModel,
};
use crate::universal3::{build_rep, check_points, random_m2_points, verification_grid, verify_rep};
use crate::{Error, Result, DEFAULT_TOL};

/// Re-synthesis tolerance for slice realizations.
const REALIZATION_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "synccorr",
    version,
    about = "Synchronous correlation sets: validation, slices and sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a correlation tensor.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Convert between two-outcome tensors and correlation matrices.
    Map(MapArgs),
    /// Pair outcomes into a two-outcome correlation over n·m questions.
    Embed {
        #[arg(long)]
        m: usize,
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Project a two-outcome correlation over n·m questions back to m outcomes.
    Project {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Compute the correlation of a tracial model.
    Synth {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Exact support value of a diagonal slice.
    Slice {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        y: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x: Vec<f64>,
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        emit_model: Option<PathBuf>,
    },
    /// Draw random points of the three-question quantum set as CSV.
    Sample {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the two-dimensional representation of the universal algebra.
    #[command(name = "verify-universal3")]
    VerifyUniversal3(VerifyArgs),
    /// Check that no sample beats the exact slice bounds.
    Dominate {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "direction")]
struct MapDirection {
    #[arg(long)]
    to_matrix: bool,
    #[arg(long)]
    to_tensor: bool,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[command(flatten)]
    direction: MapDirection,
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(
        long,
        allow_hyphen_values = true,
        requires = "b",
        conflicts_with = "grid"
    )]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "a")]
    b: Option<f64>,
    /// Check the fixed grid plus seeded random points.
    #[arg(long, required_unless_present = "a")]
    grid: bool,
    #[arg(long, default_value_t = 100, requires = "grid")]
    random: usize,
    #[arg(long, default_value_t = 0, requires = "grid")]
    seed: u64,
    /// Per-point CSV for `--grid`, or the representation JSON for a single point.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassArg {
    Q,
    Loc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Upper,
    Lower,
}

/// A JSON summary and whether every check passed.
struct Outcome {
    summary: Value,
    ok: bool,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn path_value(p: &Option<PathBuf>) -> Value {
    p.as_ref()
        .map_or(Value::Null, |p| json!(p.display().to_string()))
}

fn cmd_validate(file: &Path, tol: f64) -> Result<Outcome> {
    let t: CorrelationTensor = read_json(file)?;
    let report = validate(&t, tol);
    let marg = report.is_correlation.then(|| marginals(&t));
    Ok(Outcome {
        ok: report.is_synchronous_nonsignaling(),
        summary: json!({
            "command": "validate",
            "n": t.n(),
            "m": t.m(),
            "failed_constraints": report.failures.iter().map(|v| v.constraint).collect::<Vec<_>>(),
            "report": report,
            "marginals": marg,
        }),
    })
}

fn cmd_map(args: &MapArgs) -> Result<Outcome> {
    if args.direction.to_matrix {
        let t: CorrelationTensor = read_json(&args.file)?;
        let r = restrict(&t, args.tol)?;
        if let Some(out) = &args.out {
            write_json(out, &r.matrix)?;
        }
        Ok(Outcome {
            ok: true,
            summary: json!({
                "command": "map",
                "to": "matrix",
                "asymmetry": r.asymmetry,
                "matrix": r.matrix,
                "out": path_value(&args.out),
            }),
        })
    } else {
        let w: CorrelationMatrix = read_json(&args.file)?;
        let t = expand(&w)?;
        let report = validate(&t, args.tol);
        if let Some(out) = &args.out {
            write_json(out, &t)?;
        }
        Ok(Outcome {
            ok: report.is_synchronous_nonsignaling(),
            summary: json!({
                "command": "map",
                "to": "tensor",
                "tensor": t,
                "report": report,
                "out": path_value(&args.out),
            }),
        })
    }
}

fn cmd_embed(m: usize, file: &Path, out: &Option<PathBuf>, tol: f64) -> Result<Outcome> {
    let q: CorrelationTensor = read_json(file)?;
    if q.m() != m {
        return Err(Error::Malformed(format!(
            "--m {m} does not match the file's m = {}",
            q.m()
        )));
    }
    let p = embed_outcomes(&q, tol)?;
    let report = validate(&p, tol);
    if let Some(out) = out {
        write_json(out, &p)?;
    }
    Ok(Outcome {
        ok: report.is_correlation && report.is_synchronous,
        summary: json!({
            "command": "embed",
            "n": p.n(),
            "m": p.m(),
            "tensor": p,
            "report": report,
            "out": path_value(out),
        }),
    })
}

fn cmd_project(
    n: usize,
    m: usize,
    file: &Path,
    out: &Option<PathBuf>,
    tol: f64,
) -> Result<Outcome> {
    let p: CorrelationTensor = read_json(file)?;
    let (projected, report, in_face) = match project_outcomes(&p, n, m, tol)? {
        Projection::InFace(t) => {
            let report = validate(&t, tol);
            (t, report, true)
        }
        Projection::NotInFace { projected, report } => (projected, report, false),
    };
    if let Some(out) = out {
        write_json(out, &projected)?;
    }
    Ok(Outcome {
        ok: in_face,
        summary: json!({
            "command": "project",
            "in_face": in_face,
            "tensor": projected,
            "report": report,
            "out": path_value(out),
        }),
    })
}

fn cmd_synth(file: &Path, out: &Option<PathBuf>, tol: f64) -> Result<Outcome> {
    let model = TracialModel::try_from(read_json::<ModelFile>(file)?)?;
    let t = synthesize(&model, tol)?;
    let report = validate(&t, tol);
    if let Some(out) = out {
        write_json(out, &t)?;
    }
    Ok(Outcome {
        ok: report.is_synchronous_nonsignaling(),
        summary: json!({
            "command": "synth",
            "tensor": t,
            "report": report,
            "out": path_value(out),
        }),
    })
}

fn cmd_slice(
    y: &[f64],
    x: &[f64],
    class: ClassArg,
    side: SideArg,
    emit: &Option<PathBuf>,
) -> Result<Outcome> {
    let cls = match class {
        ClassArg::Q => SliceClass::Q,
        ClassArg::Loc => SliceClass::Loc,
    };
    let side = match side {
        SideArg::Upper => Side::Upper,
        SideArg::Lower => Side::Lower,
    };
    let q = SliceQuery::new(y.to_vec(), x.to_vec(), cls, side)?;
    let r = slice(&q)?;
    let t = synthesize(&r.realizing_model, REALIZATION_TOL)?;
    let n = q.n();
    let diag_residual = (0..n)
        .map(|i| (t.get(i, i, 0, 0) - q.y[i]).abs())
        .fold(0.0, f64::max);
    let w_residual = crate::pairs::pairs(n)
        .into_iter()
        .zip(&r.achieved_w)
        .map(|((i, j), w)| (t.get(i, j, 0, 0) - w).abs())
        .fold(0.0, f64::max);
    let defect = commutator_defect(&r.realizing_model.outcome_projections(0), &q.x);
    let rep_path = r.rep.as_ref().is_some_and(|rep| rep.has_m2);
    let ok = diag_residual <= REALIZATION_TOL
        && w_residual <= REALIZATION_TOL
        && (!rep_path || defect <= REALIZATION_TOL);
    if let Some(path) = emit {
        write_json(path, &ModelFile::from(&r.realizing_model))?;
    }
    Ok(Outcome {
        ok,
        summary: json!({
            "command": "slice",
            "class": cls,
            "side": side,
            "y": q.y,
            "x": q.x,
            "value": r.value,
            "achieved_w": r.achieved_w,
            "weights": r.weights,
            "degenerate_path": r.degenerate_path,
            "rep": r.rep.as_ref().map(|rep| rep.dump()),
            "blocks": r.realizing_model.algebra().block_count(),
            "checks": {
                "diagonal_residual": diag_residual,
                "w_residual": w_residual,
                "commutator_defect": defect,
            },
            "model": path_value(emit),
        }),
    })
}

fn cmd_sample(n: usize, dim: usize, count: usize, seed: u64, out: &Path) -> Result<Outcome> {
    let samples = sample_dq(n, dim, count, seed)?;
    let mut file = std::io::BufWriter::new(fs::File::create(out)?);
    write_samples_csv(&mut file, n, &samples)?;
    file.flush()?;
    Ok(Outcome {
        ok: true,
        summary: json!({
            "command": "sample",
            "n": n,
            "dim": dim,
            "count": count,
            "seed": seed,
            "out": out.display().to_string(),
        }),
    })
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    if let (Some(a), Some(b)) = (args.a, args.b) {
        let rep = build_rep(a, b)?;
        let residuals = verify_rep(&rep).ok();
        let ok = residuals
            .as_ref()
            .is_none_or(|r| r.passes(crate::universal3::RELATION_TOL));
        if let Some(out) = &args.out {
            write_json(out, &rep.dump())?;
        }
        let mut summary = serde_json::to_value(rep.dump())?;
        summary["command"] = json!("verify-universal3");
        summary["residuals"] = serde_json::to_value(&residuals)?;
        summary["max_residual"] = json!(residuals.as_ref().map(|r| r.max_residual()));
        summary["branch"] = serde_json::to_value(rep.branch)?;
        summary["passed"] = json!(ok);
        return Ok(Outcome { ok, summary });
    }
    let grid: Vec<(f64, f64)> = verification_grid();
    let grid_checks = check_points(&grid);
    let random_checks = check_points(&random_m2_points(args.random, args.seed));
    let all: Vec<_> = grid_checks.iter().chain(&random_checks).collect();
    let failures = all.iter().filter(|c| !c.passes()).count();
    let max_residual = all
        .iter()
        .filter_map(|c| c.max_residual)
        .fold(0.0, f64::max);
    if let Some(out) = &args.out {
        let mut wtr = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(out)?;
        wtr.write_record([
            "a",
            "b",
            "t",
            "z",
            "has_m2",
            "max_residual",
            "double_root",
            "passed",
        ])?;
        let fmt = crate::tracial::format_float;
        for c in &all {
            wtr.write_record([
                fmt(c.a),
                fmt(c.b),
                fmt(c.t),
                c.z.map(fmt).unwrap_or_default(),
                c.has_m2.to_string(),
                c.max_residual.map(fmt).unwrap_or_default(),
                c.double_root.to_string(),
                c.passes().to_string(),
            ])?;
        }
        wtr.flush()?;
    }
    Ok(Outcome {
        ok: failures == 0,
        summary: json!({
            "command": "verify-universal3",
            "grid_points": grid_checks.len(),
            "grid_m2_points": grid_checks.iter().filter(|c| c.has_m2).count(),
            "random_points": random_checks.len(),
            "seed": args.seed,
            "double_roots": all.iter().filter(|c| c.double_root).count(),
            "failures": failures,
            "max_residual": max_residual,
            "out": path_value(&args.out),
        }),
    })
}

fn cmd_dominate(
    samples: &Path,
    queries: &Path,
    delta: f64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<Outcome> {
    let (_, samples) = read_samples_csv(fs::File::open(samples)?)?;
    let queries = parse_queries(&fs::read_to_string(queries)?)?;
    let report = dominance_check(&samples, &queries, delta, tol)?;
    if let Some(out) = out {
        let mut file = std::io::BufWriter::new(fs::File::create(out)?);
        write_report_csv(&mut file, &report)?;
        file.flush()?;
    }
    Ok(Outcome {
        ok: report.is_clean(),
        summary: json!({
            "command": "dominate",
            "samples": samples.len(),
            "queries": queries.len(),
            "delta": delta,
            "tol": tol,
            "no_data": report.no_data(),
            "violations": report.violations(),
            "tightest": report.tightest(),
            "clean": report.is_clean(),
            "entries": report.entries,
            "out": path_value(out),
        }),
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate { file, tol } => cmd_validate(file, *tol),
        Command::Map(args) => cmd_map(args),
        Command::Embed { m, file, out, tol } => cmd_embed(*m, file, out, *tol),
        Command::Project {
            n,
            m,
            file,
            out,
            tol,
        } => cmd_project(*n, *m, file, out, *tol),
        Command::Synth { file, out, tol } => cmd_synth(file, out, *tol),
        Command::Slice {
            y,
            x,
            class,
            side,
            emit_model,
        } => cmd_slice(y, x, *class, *side, emit_model),
        Command::Sample {
            n,
            dim,
            count,
            seed,
            out,
        } => cmd_sample(*n, *dim, *count, *seed, out),
        Command::VerifyUniversal3(args) => cmd_verify(args),
        Command::Dominate {
            samples,
            queries,
            delta,
            tol,
            out,
        } => cmd_dominate(samples, queries, *delta, *tol, out),
    }
}

fn emit(value: &Value) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{value}");
}

/// Parses `argv` (program name first), runs the subcommand, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            emit(&json!({"error": "usage", "message": e.render().to_string().trim_end()}));
            return 2;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            emit(&outcome.summary);
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            emit(&json!({"error": e.kind(), "message": e.to_string()}));
            2
        }
    }
}
