//! Command-line front end: classify flux data, solve for catenoids,
//! re-verify solutions with contour-integration oracles, mesh them, and
//! materialize the named closed-form examples.
//!
//! Exit codes: 0 success, 1 no solution / obstructed input, 2 invalid
//! input, 3 numerical failure. Diagnostics go to stderr as JSON lines.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use catenoid::fluxmodel::{check_balance, classify_type, detect_obstructions, FluxData, TypeKind};
use catenoid::residues::{verify_solution, weierstrass_from_solution};
use catenoid::solver::{
    named_example, solve_type1_family, solve_type2, solve_type3, ExampleOutput, FamilySolution,
    SolvedCatenoid, SolverError,
};
use catenoid::surface::{contour_flux, export_obj, hopf_weight, sample_surface, SamplingConfig};
use catenoid::residues::WeierstrassData;

const EXIT_OK: u8 = 0;
const EXIT_NO_SOLUTION: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Relative tolerance for the contour-flux cross-check in `verify`.
const CONTOUR_FLUX_TOL: f64 = 1e-6;
/// Absolute tolerance for the Laurent-coefficient weight cross-check.
const HOPF_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "catenoid", version, about = "n-end catenoids with prescribed flux")]
struct Cli {
    /// Residual threshold for accepting a verification report.
    #[arg(long, default_value_t = 1e-8)]
    tol_residual: f64,
    /// Distance below which punctures/roots are treated as coincident.
    #[arg(long, default_value_t = 1e-7)]
    tol_root: f64,
    /// Seed for randomized iteration restarts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample count for contour quadrature.
    #[arg(long, default_value_t = 1024)]
    contour_samples: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify flux data: span type, nondegeneracy, obstructions.
    Classify { input: PathBuf },
    /// Solve flux data for catenoid candidates or a family.
    Solve {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Re-verify a solution file, including contour-integration oracles.
    Verify { input: PathBuf },
    /// Sample a solution into a triangle mesh and export OBJ.
    Mesh {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Materialize a named example (`--param key=value` for parameters).
    Example {
        name: String,
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Solution file schema shared by `solve`, `example`, `verify`, `mesh`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SolveOutput {
    Candidates {
        candidates: Vec<SolvedCatenoid>,
    },
    Family {
        family: FamilySolution,
        #[serde(with = "catenoid::polyalg::serde_complex")]
        t: Complex64,
        /// The family member at parameter `t`, in candidate form.
        sample: SolvedCatenoid,
    },
    FlatEnds {
        weierstrass: WeierstrassData,
    },
}

fn diag(level: &str, message: &str) {
    eprintln!(
        "{}",
        json!({ "level": level, "message": message })
    );
}

fn exit_for_solver(e: &SolverError) -> u8 {
    match e {
        SolverError::NoSolution | SolverError::ObstructedInput(_) => EXIT_NO_SOLUTION,
        SolverError::UnknownName(_)
        | SolverError::ParamOutOfRange(_)
        | SolverError::WrongType { .. }
        | SolverError::Unbalanced(_) => EXIT_INVALID_INPUT,
        _ => EXIT_NUMERICAL,
    }
}

fn read_flux(path: &PathBuf) -> Result<FluxData, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        diag("error", &format!("cannot read {}: {e}", path.display()));
        EXIT_INVALID_INPUT
    })?;
    FluxData::from_json(&text).map_err(|e| {
        diag("error", &format!("invalid flux data: {e}"));
        EXIT_INVALID_INPUT
    })
}

fn read_solution(path: &PathBuf) -> Result<SolveOutput, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        diag("error", &format!("cannot read {}: {e}", path.display()));
        EXIT_INVALID_INPUT
    })?;
    if let Ok(out) = serde_json::from_str::<SolveOutput>(&text) {
        return Ok(out);
    }
    // Also accept a bare candidate or a bare array of candidates.
    if let Ok(one) = serde_json::from_str::<SolvedCatenoid>(&text) {
        return Ok(SolveOutput::Candidates {
            candidates: vec![one],
        });
    }
    match serde_json::from_str::<Vec<SolvedCatenoid>>(&text) {
        Ok(candidates) => Ok(SolveOutput::Candidates { candidates }),
        Err(e) => {
            diag("error", &format!("invalid solution file: {e}"));
            Err(EXIT_INVALID_INPUT)
        }
    }
}

fn write_json<T: Serialize>(value: &T, output: Option<&PathBuf>) -> Result<(), u8> {
    let text = serde_json::to_string_pretty(value).map_err(|e| {
        diag("error", &format!("serialization failed: {e}"));
        EXIT_NUMERICAL
    })?;
    match output {
        Some(path) => fs::write(path, text + "\n").map_err(|e| {
            diag("error", &format!("cannot write {}: {e}", path.display()));
            EXIT_INVALID_INPUT
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn solved_from_candidate(
    c: catenoid::residues::SolutionCandidate,
) -> Result<SolvedCatenoid, u8> {
    let report = verify_solution(&c);
    let weierstrass = weierstrass_from_solution(&c).map_err(|e| {
        diag("error", &format!("Weierstrass construction failed: {e}"));
        EXIT_NUMERICAL
    })?;
    Ok(SolvedCatenoid {
        candidate: c,
        weierstrass,
        report,
    })
}

fn cmd_classify(input: &PathBuf) -> Result<u8, u8> {
    let d = read_flux(input)?;
    let out = json!({
        "type": classify_type(&d),
        "obstructions": detect_obstructions(&d),
        "balance_residual": check_balance(&d),
    });
    write_json(&out, None)?;
    Ok(EXIT_OK)
}

fn cmd_solve(input: &PathBuf, output: Option<&PathBuf>, seed: u64) -> Result<u8, u8> {
    let d = read_flux(input)?;
    let class = classify_type(&d);
    let out = match class.kind {
        TypeKind::TypeI => {
            let family = solve_type1_family(&d, seed).map_err(|e| {
                diag("error", &format!("{e}"));
                exit_for_solver(&e)
            })?;
            let t = Complex64::new(1.0, 0.0);
            let cand = family.candidate_at(t).map_err(|e| {
                diag("error", &format!("{e}"));
                exit_for_solver(&e)
            })?;
            SolveOutput::Family {
                family,
                t,
                sample: solved_from_candidate(cand)?,
            }
        }
        TypeKind::TypeII | TypeKind::TypeIII => {
            let candidates = if class.kind == TypeKind::TypeII {
                solve_type2(&d)
            } else {
                solve_type3(&d)
            }
            .map_err(|e| {
                diag("error", &format!("{e}"));
                exit_for_solver(&e)
            })?;
            if candidates.is_empty() {
                diag("error", "no solution exists for the given flux data");
                return Err(EXIT_NO_SOLUTION);
            }
            SolveOutput::Candidates { candidates }
        }
    };
    write_json(&out, output)?;
    Ok(EXIT_OK)
}

/// Contour-oracle cross-checks for one candidate: flux vectors by direct
/// quadrature and end weights from the Laurent coefficient.
fn oracle_errors(s: &SolvedCatenoid, cfg: &SamplingConfig) -> (f64, f64) {
    let want = s.candidate.flux_vectors();
    let scale = want
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut flux_err = 0.0f64;
    for j in 0..s.candidate.n {
        let phi = contour_flux(&s.weierstrass, j, cfg);
        let err: f64 = phi
            .iter()
            .zip(&want[j])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        flux_err = flux_err.max(err / scale);
    }
    let mut hopf_err = 0.0f64;
    for j in 0..s.candidate.n {
        if s.candidate.q[j].is_infinite() {
            continue;
        }
        if let Ok(h) = hopf_weight(&s.weierstrass, j, cfg) {
            hopf_err = hopf_err.max((h - s.candidate.a[j]).abs());
        }
    }
    (flux_err, hopf_err)
}

/// Smallest chordal distance between two punctures of a candidate.
fn min_puncture_separation(s: &SolvedCatenoid) -> f64 {
    let q = &s.candidate.q;
    let mut min = f64::INFINITY;
    for j in 0..q.len() {
        for k in (j + 1)..q.len() {
            min = min.min(q[j].chordal_distance(&q[k]));
        }
    }
    min
}

fn cmd_verify(
    input: &PathBuf,
    tol_residual: f64,
    tol_root: f64,
    contour_samples: usize,
) -> Result<u8, u8> {
    let parsed = read_solution(input)?;
    let candidates: Vec<SolvedCatenoid> = match parsed {
        SolveOutput::Candidates { candidates } => candidates,
        SolveOutput::Family { sample, .. } => vec![sample],
        SolveOutput::FlatEnds { .. } => {
            diag("error", "flat-end data carries no weights to verify");
            return Err(EXIT_INVALID_INPUT);
        }
    };
    let cfg = SamplingConfig {
        contour_samples,
        ..SamplingConfig::default()
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for s in &candidates {
        let report = verify_solution(&s.candidate);
        let (flux_err, hopf_err) = oracle_errors(s, &cfg);
        let separation = min_puncture_separation(s);
        let passes = report.passes(tol_residual)
            && report.single_valued
            && flux_err < CONTOUR_FLUX_TOL
            && hopf_err < HOPF_TOL
            && separation > tol_root;
        all_pass &= passes;
        reports.push(json!({
            "report": report,
            "contour_flux_error": flux_err,
            "hopf_weight_error": hopf_err,
            "min_puncture_separation": separation,
            "passes": passes,
        }));
    }
    write_json(&reports, None)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_NUMERICAL })
}

fn cmd_mesh(input: &PathBuf, output: &PathBuf, contour_samples: usize) -> Result<u8, u8> {
    let parsed = read_solution(input)?;
    let solved = match parsed {
        SolveOutput::Candidates { mut candidates } => {
            if candidates.is_empty() {
                diag("error", "solution file holds no candidates");
                return Err(EXIT_INVALID_INPUT);
            }
            candidates.remove(0)
        }
        SolveOutput::Family { sample, .. } => sample,
        SolveOutput::FlatEnds { .. } => {
            diag("error", "flat-end data does not define an immersion to mesh");
            return Err(EXIT_INVALID_INPUT);
        }
    };
    let cfg = SamplingConfig {
        contour_samples,
        ..SamplingConfig::default()
    };
    let mesh = sample_surface(&solved.weierstrass, &cfg).map_err(|e| {
        diag("error", &format!("meshing failed: {e}"));
        EXIT_NUMERICAL
    })?;
    let mut sink = fs::File::create(output).map_err(|e| {
        diag("error", &format!("cannot create {}: {e}", output.display()));
        EXIT_INVALID_INPUT
    })?;
    export_obj(&mesh, &mut sink).map_err(|e| {
        diag("error", &format!("export failed: {e}"));
        EXIT_NUMERICAL
    })?;
    Ok(EXIT_OK)
}

fn parse_params(raw: &[String]) -> Result<HashMap<String, f64>, u8> {
    let mut map = HashMap::new();
    for item in raw {
        let Some((k, v)) = item.split_once('=') else {
            diag("error", &format!("parameter {item:?} is not key=value"));
            return Err(EXIT_INVALID_INPUT);
        };
        let value: f64 = v.parse().map_err(|_| {
            diag("error", &format!("parameter value {v:?} is not a number"));
            EXIT_INVALID_INPUT
        })?;
        map.insert(k.to_string(), value);
    }
    Ok(map)
}

fn cmd_example(name: &str, raw_params: &[String], output: Option<&PathBuf>) -> Result<u8, u8> {
    let params = parse_params(raw_params)?;
    let out = named_example(name, &params).map_err(|e| {
        diag("error", &format!("{e}"));
        exit_for_solver(&e)
    })?;
    let out = match out {
        ExampleOutput::Candidates(candidates) => SolveOutput::Candidates { candidates },
        ExampleOutput::Family { family, t } => {
            let cand = family.candidate_at(t).map_err(|e| {
                diag("error", &format!("{e}"));
                exit_for_solver(&e)
            })?;
            SolveOutput::Family {
                family,
                t,
                sample: solved_from_candidate(cand)?,
            }
        }
        ExampleOutput::FlatEnds(weierstrass) => SolveOutput::FlatEnds { weierstrass },
    };
    write_json(&out, output)?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classify { input } => cmd_classify(input),
        Command::Solve { input, output } => cmd_solve(input, output.as_ref(), cli.seed),
        Command::Verify { input } => {
            cmd_verify(input, cli.tol_residual, cli.tol_root, cli.contour_samples)
        }
        Command::Mesh { input, output } => cmd_mesh(input, output, cli.contour_samples),
        Command::Example {
            name,
            params,
            output,
        } => cmd_example(name, params, output.as_ref()),
    };
    ExitCode::from(match result {
        Ok(code) => code,
        Err(code) => code,
    })
}
