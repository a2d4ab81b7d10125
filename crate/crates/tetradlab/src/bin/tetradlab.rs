//! Command-line front end: run verification suites over a manifest, list the
//! catalogs, or evaluate an operator on a multivector expression at a point.
//!
//! Exit codes: 0 all checks pass, 1 any check fails, 2 usage or manifest
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tetradlab::clifford::{codifferential, dirac, exterior_derivative, Multivector};
use tetradlab::manifest::{builtin_manifest, load_manifest, Manifest};
use tetradlab::manifold::{Manifold, BUILTIN_NAMES};
use tetradlab::operators::{
    covariant_dalembertian, einstein_operator_star, ricci_operator, CurvatureForms,
    FrameCoefficients, FrameKind,
};
use tetradlab::suite::{run_suites, RunOptions, SUITE_NAMES};
use tetradlab::symexpr;

#[derive(Parser)]
#[command(name = "tetradlab", about = "frame-field differential geometry checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites over a manifest (or `builtin:<name>`).
    Check {
        /// Manifest path or builtin reference like `builtin:s2`
        manifest: String,
        /// Suites to run (defaults to the manifest's list)
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Number of sample points
        #[arg(long)]
        points: Option<usize>,
        /// RNG seed (default: TETRADLAB_SEED or 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Multiply every tolerance by this factor
        #[arg(long = "tol-scale")]
        tol_scale: Option<f64>,
        /// Emit the report as JSON
        #[arg(long)]
        json: bool,
        /// Also emit the wrong-formula torsion diagnostic rows
        #[arg(long = "wrong-minus")]
        wrong_minus: bool,
    },
    /// List the suite catalog.
    ListSuites,
    /// List the built-in manifolds.
    ListBuiltins,
    /// Evaluate an operator applied to a multivector expression at a point.
    Eval {
        /// Manifest path or builtin reference
        manifest: String,
        /// Multivector expression, e.g. "x1 * e(0) + 2 * e(0,1)"
        #[arg(long)]
        expr: String,
        /// Operator: dirac | d | delta | box | ricci | einstein
        #[arg(long)]
        op: String,
        /// Evaluation point as comma-separated coordinates
        #[arg(long)]
        at: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {}", message);
            ExitCode::from(2)
        }
    }
}

fn env_seed() -> u64 {
    std::env::var("TETRADLAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn load(spec: &str) -> Result<Manifest, String> {
    if spec.starts_with("builtin:") {
        builtin_manifest(spec).map_err(|e| e.to_string())
    } else {
        load_manifest(&PathBuf::from(spec)).map_err(|e| e.to_string())
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Check {
            manifest,
            suites,
            points,
            seed,
            tol_scale,
            json,
            wrong_minus,
        } => {
            let manifest = load(&manifest)?;
            let opts = RunOptions {
                points: points.unwrap_or(manifest.sampling.points),
                seed: seed.or(manifest.sampling.seed).unwrap_or_else(env_seed),
                tol_scale: tol_scale.unwrap_or(manifest.sampling.tol_scale),
                suites: if suites.is_empty() {
                    manifest.suites.clone()
                } else {
                    let cleaned: Vec<String> = suites
                        .iter()
                        .map(|s| s.trim_start_matches("suite.").to_string())
                        .collect();
                    for s in &cleaned {
                        if !SUITE_NAMES.contains(&s.as_str()) {
                            return Err(format!(
                                "unknown suite `{}`; valid suites: {}",
                                s,
                                SUITE_NAMES.join(", ")
                            ));
                        }
                    }
                    cleaned
                },
                wrong_minus,
            };
            let report = run_suites(&manifest, &opts).map_err(|e| e.to_string())?;
            if json {
                println!("{}", report.render_json());
            } else {
                print!("{}", report.render_text());
            }
            Ok(report.pass)
        }
        Command::ListSuites => {
            for s in SUITE_NAMES {
                println!("suite.{}", s);
            }
            Ok(true)
        }
        Command::ListBuiltins => {
            for b in BUILTIN_NAMES {
                println!("builtin:{}", b);
            }
            Ok(true)
        }
        Command::Eval {
            manifest,
            expr,
            op,
            at,
        } => {
            let manifest = load(&manifest)?;
            let m = manifest.build().map_err(|e| e.to_string())?;
            let point: Vec<f64> = at
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if point.len() != m.dim() {
                return Err(format!(
                    "point has {} coordinates; chart dimension is {}",
                    point.len(),
                    m.dim()
                ));
            }
            let mv = parse_multivector(&m, &expr)?;
            let result = apply_operator(&m, &op, &mv)?;
            print_multivector(&m, &result, &point)?;
            Ok(true)
        }
    }
}

fn apply_operator(m: &Manifold, op: &str, mv: &Multivector) -> Result<Multivector, String> {
    let omega = m.conn.omega().map_err(|e| e.to_string())?;
    match op {
        "dirac" => {
            m.conn.require_levi_civita().map_err(|e| e.to_string())?;
            Ok(dirac(&m.coframe, omega, mv))
        }
        "d" => Ok(exterior_derivative(&m.coframe, mv)),
        "delta" => Ok(codifferential(&m.coframe, mv)),
        "box" => {
            let frame = FrameCoefficients::new(m, FrameKind::Orthonormal);
            covariant_dalembertian(m, &frame, mv).map_err(|e| e.to_string())
        }
        "ricci" => {
            let frame = FrameCoefficients::new(m, FrameKind::Orthonormal);
            ricci_operator(m, &frame, mv).map_err(|e| e.to_string())
        }
        "einstein" => {
            let frame = FrameCoefficients::new(m, FrameKind::Orthonormal);
            let forms = CurvatureForms::new(m, &frame);
            Ok(einstein_operator_star(m, &frame, &forms, mv))
        }
        other => Err(format!(
            "unknown operator `{}`; use dirac | d | delta | box | ricci | einstein",
            other
        )),
    }
}

/// Multivector literals: the scalar grammar extended with the blade
/// constructor `e(i,...)` for theta^{i} ^ ... with orthonormal labels.
/// Terms are `<scalar expr> * e(...)` or plain scalar expressions, combined
/// with `+` and `-`.
fn parse_multivector(m: &Manifold, text: &str) -> Result<Multivector, String> {
    let mut out = m.mv_zero();
    let mut rest = text.trim();
    let mut positive = true;
    if let Some(stripped) = rest.strip_prefix('-') {
        positive = false;
        rest = stripped.trim_start();
    }
    while !rest.is_empty() {
        // take the next top-level term (split on +/- outside parentheses)
        let mut depth = 0usize;
        let mut split = rest.len();
        let mut next_positive = true;
        for (i, ch) in rest.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                '+' | '-' if depth == 0 && i > 0 => {
                    // not part of a scientific-notation exponent
                    let prev = rest.as_bytes()[i - 1];
                    if prev == b'e' || prev == b'E' {
                        let before = rest.as_bytes().get(i.wrapping_sub(2)).copied();
                        if before.map(|b| b.is_ascii_digit()).unwrap_or(false) {
                            continue;
                        }
                    }
                    split = i;
                    next_positive = ch == '+';
                    break;
                }
                _ => {}
            }
        }
        let term = rest[..split].trim();
        rest = if split < rest.len() {
            rest[split + 1..].trim_start()
        } else {
            ""
        };
        let mv = parse_term(m, term)?;
        out = if positive { out.add(&mv) } else { out.sub(&mv) };
        positive = next_positive;
    }
    Ok(out)
}

fn parse_term(m: &Manifold, term: &str) -> Result<Multivector, String> {
    // locate the optional e(...) blade factor
    if let Some(epos) = find_blade(term) {
        let (scalar_part, blade_part) = term.split_at(epos);
        let blade_text = blade_part.trim();
        let inner = blade_text
            .strip_prefix("e(")
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| format!("malformed blade constructor in `{}`", term))?;
        let mut mask = 0usize;
        for part in inner.split(',') {
            let idx: usize = part
                .trim()
                .parse()
                .map_err(|_| format!("invalid blade index `{}`", part))?;
            if idx >= m.dim() {
                return Err(format!(
                    "blade index {} out of range for dimension {}",
                    idx,
                    m.dim()
                ));
            }
            if mask & (1 << idx) != 0 {
                return Err(format!("repeated blade index {} in `{}`", idx, term));
            }
            mask |= 1 << idx;
        }
        let scalar_text = scalar_part.trim().trim_end_matches('*').trim();
        let coeff = if scalar_text.is_empty() {
            m.chart.one()
        } else {
            symexpr::parse(scalar_text, &m.chart).map_err(|e| e.to_string())?
        };
        let mut mv = m.mv_zero();
        mv.comps[mask] = coeff;
        Ok(mv)
    } else {
        let f = symexpr::parse(term, &m.chart).map_err(|e| e.to_string())?;
        Ok(m.mv_scalar(f))
    }
}

/// Find a top-level `e(` blade constructor that is not an identifier suffix.
fn find_blade(term: &str) -> Option<usize> {
    let bytes = term.as_bytes();
    (0..bytes.len()).find(|&i| {
        bytes[i] == b'e'
            && i + 1 < bytes.len()
            && bytes[i + 1] == b'('
            && (i == 0 || !bytes[i - 1].is_ascii_alphanumeric())
    })
}

fn print_multivector(m: &Manifold, mv: &Multivector, point: &[f64]) -> Result<(), String> {
    let values = mv.eval(point).map_err(|e| e.to_string())?;
    let mut printed = false;
    for (mask, v) in values.iter().enumerate() {
        if v.abs() < 1e-14 {
            continue;
        }
        let blade = if mask == 0 {
            "1".to_string()
        } else {
            let idx: Vec<String> = (0..m.dim())
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| i.to_string())
                .collect();
            format!("e({})", idx.join(","))
        };
        println!("{}\t{:+.12e}", blade, v);
        printed = true;
    }
    if !printed {
        println!("0");
    }
    Ok(())
}
