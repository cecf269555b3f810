//! Command-line front end. Results go to standard output (or `--out`),
//! diagnostics to standard error. Exit codes: 0 success, 1 validation
//! failure, 2 numeric failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::crsys::{
    is_delaunay, ramification_index, residual_norm, validate_angle_structure, AngleStructure,
};
use crate::develop::{
    conformal_modulus, develop, holonomy, normalized_positions, DevelopOptions, HolonomyType, Traversal,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::hqd::{hqd_system_cr_form, hqd_system_z_form, kernel_basis, star_lifts, Field};
use crate::io::{read_bundle, Bundle};
use crate::moebius::C64;
use crate::render::{layout_for_render, render_svg, sphere_layout, RenderOptions};
use crate::solver::{covering_scan, rigidity_check, solve_pattern, solve_sphere_pattern, verification_patch, SolverOptions};
use crate::surface::{lift_patch, sphere_patch, DEFAULT_CYCLE_BOUND};
use crate::tolerance;

#[derive(Debug, Parser)]
#[command(name = "circle-pattern", version, about = "Cross ratio systems and Delaunay circle patterns")]
pub struct Cli {
    /// Input bundle (JSON); standard input when omitted or `-`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the closing conditions, the Delaunay property and the angles.
    Verify {
        /// Dual cycle length bound for the angle check.
        #[arg(long, default_value_t = DEFAULT_CYCLE_BOUND)]
        cycle_bound: usize,
    },
    /// Lay out a patch of the universal cover and report the holonomy.
    Develop {
        /// Words in `-range..=range`.
        #[arg(long, default_value_t = 1)]
        range: i64,
        #[arg(long, value_enum, default_value_t = TraversalArg::Bfs)]
        traversal: TraversalArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Holomorphic quadratic differentials (kernel of the linearization).
    Hqd {
        #[arg(long, value_enum, default_value_t = FormArg::Cr)]
        form: FormArg,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        #[arg(long)]
        rank_tol: Option<f64>,
    },
    /// Solve for the Delaunay pattern with the input angles.
    Solve {
        /// Targets `A1,A2` (tori only).
        #[arg(long = "A", value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
        a: [f64; 2],
    },
    /// Solve a symmetric grid and compare conformal moduli.
    Scan {
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        range: f64,
    },
    /// Solve from random starts and compare the solutions.
    Rigidity {
        #[arg(long = "A", value_parser = parse_pair, default_value = "0,0", allow_hyphen_values = true)]
        a: [f64; 2],
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Draw the pattern as SVG.
    Render(RenderArgs),
    /// Print a named example as a bundle.
    Fixture {
        /// One of: one-vertex-torus-a, one-vertex-torus-b [b], regular-torus [m n],
        /// jessen, icosahedron-sphere, octahedron-bad-angles.
        name: String,
        args: Vec<String>,
    },
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    circles: Toggle,
    /// Torus copies per direction.
    #[arg(long, default_value_t = 2)]
    copies: i64,
    #[arg(long)]
    stroke: Option<f64>,
    #[arg(long, default_value_t = 800)]
    width: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TraversalArg {
    Bfs,
    Dfs,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    Cr,
    Z,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected a1,a2".into());
    }
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let pair = [p(parts[0])?, p(parts[1])?];
    if pair.iter().all(|v| v.is_finite()) { Ok(pair) } else { Err("values must be finite".into()) }
}

/// Outcome of a command: text for the output plus an optional validation
/// failure message (exit code 1).
struct Output {
    text: String,
    failure: Option<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

/// Runs the command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &out.text) {
                eprintln!("error: {e}");
                return 1;
            }
            match out.failure {
                Some(msg) => {
                    eprintln!("invalid: {msg}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() { 2 } else { 1 }
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Output> {
    let tol = *tolerance::global();
    let input = || read_bundle(cli.input.as_deref());
    match &cli.command {
        Command::Fixture { name, args } => {
            let f = fixtures::by_name(name, args)?;
            Ok(Output::ok(Bundle::from_fixture(&f).to_json()?))
        }
        Command::Verify { cycle_bound } => verify(&input()?, *cycle_bound),
        Command::Develop { range, traversal, seed } => {
            let b = input()?;
            let s = b.surface()?;
            let cr = b.cross_ratios()?;
            let patch = if s.is_torus() { lift_patch(&s, -range..=*range, -range..=*range)? } else { sphere_patch(&s) };
            let traversal = match traversal {
                TraversalArg::Bfs => Traversal::BreadthFirst,
                TraversalArg::Dfs => Traversal::DepthFirst,
                TraversalArg::Random => Traversal::Random(*seed),
            };
            let dev = develop(&s, &cr, &patch, &DevelopOptions { traversal, ..Default::default() })?;
            let vertices: Vec<_> = patch
                .vertices
                .iter()
                .zip(&dev.positions)
                .map(|(l, z)| json!({ "vertex": l.vertex, "word": l.word, "z": z }))
                .collect();
            let mut report = json!({ "closure_error": dev.closure_error, "vertices": vertices });
            if s.is_torus() {
                let hol = holonomy(&dev, tol.parabolic)?;
                if matches!(hol.kind, HolonomyType::Translation | HolonomyType::StretchRotation) {
                    report["modulus"] = serde_json::to_value(conformal_modulus(&s, &dev, &hol)?)?;
                }
                report["holonomy"] = serde_json::to_value(&hol)?;
            }
            Ok(Output::ok(to_json(&report)?))
        }
        Command::Hqd { form, field, rank_tol } => {
            let b = input()?;
            let s = b.surface()?;
            let field = match field {
                FieldArg::Real => Field::Real,
                FieldArg::Complex => Field::Complex,
            };
            let op = match form {
                FormArg::Cr => hqd_system_cr_form(&s, &b.cross_ratios()?, None, field)?,
                FormArg::Z => {
                    if let (false, Some(z)) = (s.is_torus(), &b.positions) {
                        let patch = sphere_patch(&s);
                        let pos: Vec<C64> = patch.vertices.iter().map(|l| z[l.vertex]).collect();
                        hqd_system_z_form(&s, &pos, &patch, None, field)?
                    } else {
                        let cr = b.cross_ratios()?;
                        let patch = if s.is_torus() { verification_patch(&s)? } else { sphere_patch(&s) };
                        let dev = develop(&s, &cr, &patch, &DevelopOptions::default())?;
                        let pos = match s.is_torus().then(|| holonomy(&dev, tol.parabolic)).transpose()? {
                            Some(h) if matches!(h.kind, HolonomyType::Translation | HolonomyType::StretchRotation) => {
                                normalized_positions(&dev, &h)?
                            }
                            _ => dev.finite_positions()?,
                        };
                        let lifts = star_lifts(&s, &patch)?;
                        hqd_system_z_form(&s, &pos, &patch, Some(&lifts), field)?
                    }
                }
            };
            let basis = kernel_basis(&op, rank_tol.unwrap_or(tol.rank));
            let mut report = serde_json::to_value(&basis)?;
            if let Some(q) = &b.q {
                let qc: Vec<C64> = q.iter().map(|&x| C64::new(x, 0.0)).collect();
                report["q_equation_residual"] = json!(op.residual(&qc));
                report["q_projection_residual"] = json!(basis.projection_residual(&qc));
            }
            Ok(Output::ok(to_json(&report)?))
        }
        Command::Solve { a } => {
            let b = input()?;
            let s = b.surface()?;
            let theta = b.angles()?;
            let opts = SolverOptions::default();
            if s.is_torus() {
                let init = b.point.as_ref().map(|p| &p.layout);
                let p = solve_pattern(&s, &theta, *a, init, &opts)?;
                Ok(Output::ok(b.with_point(p).to_json()?))
            } else {
                let cr = solve_sphere_pattern(&s, &theta, None, &opts)?;
                let mut out = b;
                out.cr = Some(cr.cr);
                out.theta = Some(theta.theta);
                out.positions = None;
                Ok(Output::ok(out.to_json()?))
            }
        }
        Command::Scan { grid, range } => {
            let b = input()?;
            let s = b.surface()?;
            if *grid == 0 || !(range.is_finite() && *range > 0.0) {
                return Err(Error::InvalidAngles("grid must be positive and range finite".into()));
            }
            let r = covering_scan(&s, &b.angles()?, *grid, *range, &SolverOptions::default())?;
            Ok(Output::ok(to_json(&r)?))
        }
        Command::Rigidity { a, trials, seed } => {
            let b = input()?;
            let s = b.surface()?;
            let r = rigidity_check(&s, &b.angles()?, *a, *trials, *seed, &SolverOptions::default())?;
            Ok(Output::ok(to_json(&r)?))
        }
        Command::Render(args) => {
            let b = input()?;
            let s = b.surface()?;
            let layout = match (&b.positions, &b.cr) {
                (Some(z), _) if !s.is_torus() => sphere_layout(&s, z)?,
                _ => layout_for_render(&s, &b.cross_ratios()?, args.copies)?,
            };
            let opts = RenderOptions {
                circles: matches!(args.circles, Toggle::On),
                stroke: args.stroke,
                width: args.width,
                copies: args.copies,
            };
            Ok(Output::ok(render_svg(&layout, &opts)?))
        }
    }
}

fn verify(b: &Bundle, cycle_bound: usize) -> Result<Output> {
    let tol = *tolerance::global();
    let s = b.surface()?;
    let mut report = serde_json::Map::new();
    let mut failure = None;
    report.insert("genus".into(), json!(s.genus()));
    report.insert("vertices".into(), json!(s.n_vertices()));
    report.insert("edges".into(), json!(s.n_edges()));
    report.insert("faces".into(), json!(s.n_faces()));
    if b.cr.is_some() {
        let cr = b.cross_ratios()?;
        let res = residual_norm(&s, &cr);
        report.insert("residual".into(), json!(res));
        if res > tol.algebraic {
            failure = Some(format!("closing conditions fail (residual {res:.3e})"));
        } else {
            match is_delaunay(&s, &cr, tol.zero_angle, tol.algebraic)? {
                Ok(()) => {
                    report.insert("delaunay".into(), json!(true));
                }
                Err(reason) => {
                    report.insert("delaunay".into(), json!(false));
                    report.insert("reason".into(), json!(reason.to_string()));
                    failure = Some(reason.to_string());
                }
            }
            let s_idx = ramification_index(&s, &cr)?;
            if failure.is_none() && s_idx.iter().any(|&k| k != 1) {
                failure = Some("branched vertices (ramification index differs from 1)".into());
            }
            report.insert("ramification".into(), json!(s_idx));
        }
    }
    if let Some(t) = &b.theta {
        let theta = AngleStructure { theta: t.clone() };
        match validate_angle_structure(&s, &theta, cycle_bound)? {
            Ok(()) => {
                report.insert("angles_valid".into(), json!(true));
            }
            Err(v) => {
                report.insert("angles_valid".into(), json!(false));
                report.insert("angle_violation".into(), json!(v.to_string()));
                failure.get_or_insert_with(|| format!("invalid angle structure: {v}"));
            }
        }
    }
    report.insert("valid".into(), json!(failure.is_none()));
    Ok(Output { text: to_json(&report)?, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_negative_pairs() {
        let cli = Cli::try_parse_from(["circle-pattern", "solve", "--A", "-0.5,0.25"]).unwrap();
        match cli.command {
            Command::Solve { a } => assert_eq!(a, [-0.5, 0.25]),
            _ => panic!(),
        }
        assert!(Cli::try_parse_from(["circle-pattern", "solve", "--A", "1"]).is_err());
        assert!(Cli::try_parse_from(["circle-pattern", "bogus"]).is_err());
    }
}
