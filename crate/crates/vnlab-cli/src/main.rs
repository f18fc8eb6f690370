//! Command-line front end for the vnlab toolkit.
//!
//! Every run prints a single JSON envelope to stdout:
//! `{"schema": "vnlab/1", "manifest": {...}, "report": {...}}`.
//! Scan suites additionally stream one NDJSON record per instance to
//! `--out` (or stdout). Exit codes: 0 success, 1 scan found violations,
//! 2 input problem, 3 internal tolerance/constraint failure.

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use vnlab::algebra::VnAlgebra;
use vnlab::matcore::{
    derive_seed, sample_density, sample_pure, ComplexMatrix, Cx, Density,
};
use vnlab::measures;
use vnlab::scenarios;
use vnlab::squares;
use vnlab::ucr;
use vnlab::Error as VnError;

const SCHEMA: &str = "vnlab/1";

#[derive(Parser)]
#[command(name = "vnlab", version, about = "finite-dimensional subalgebra toolkit")]
struct Cli {
    /// Master seed; defaults to the VNLAB_SEED environment variable, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Global tolerance override for pass/fail margins.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a pair of subalgebras as a (co-)commuting square.
    CheckSquare {
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        /// Ambient algebra; defaults to the join of s and t.
        #[arg(long)]
        within: Option<String>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Generalized conditional mutual information of a state.
    Cmi {
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        within: Option<String>,
        #[arg(long)]
        state: String,
    },
    /// Von Neumann / subalgebra entropy of a state.
    Entropy {
        #[arg(long)]
        state: String,
        /// Optional subalgebra; reports H(E_N(rho)) alongside H(rho).
        #[arg(long)]
        alg: Option<String>,
    },
    /// Uncertainty-relation checkers.
    Ucr {
        /// memory | maassen-uffink | coherence
        #[arg(long)]
        relation: String,
        /// System dimension (memory and coherence relations).
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        state: String,
        /// Algebra names for the maassen-uffink relation.
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long, default_value_t = 1)]
        b_dim: usize,
        #[arg(long, default_value_t = 1)]
        c_dim: usize,
    },
    /// Non-classicality measure estimators.
    Measure {
        /// isq | iconv | iext
        #[arg(long)]
        kind: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        t: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        ext_dim: Option<usize>,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
    },
    /// Property scans over generated instance families.
    Scan {
        /// ssa | ucr | mono | duality | recovery
        #[arg(long)]
        suite: String,
        /// Comma-separated dimensions, e.g. 2,3,4.
        #[arg(long, default_value = "2,3,4")]
        dims: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// NDJSON output path for per-instance records (default stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flagship demos.
    Demo {
        /// epr-ucr
        #[arg(long, default_value = "epr-ucr")]
        name: String,
    },
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

fn input_err(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn from_vn(err: VnError) -> Failure {
    let code = match err {
        VnError::InvalidInput(_)
        | VnError::ShapeMismatch(_)
        | VnError::NotNested(_)
        | VnError::NotCommutingSquare(_)
        | VnError::NotCoCommuting(_)
        | VnError::NotFactor(_)
        | VnError::NotUnbiased(_)
        | VnError::NotPrime(_)
        | VnError::NontrivialIntersection(_)
        | VnError::MalformedGate(_) => 2,
        _ => 3,
    };
    Failure { code, message: err.to_string() }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    seed: u64,
    tolerance: Option<f64>,
    inputs: Value,
    output_path: Option<String>,
}

fn emit(manifest: Manifest, report: Value) {
    let envelope = json!({
        "schema": SCHEMA,
        "manifest": manifest,
        "report": report,
    });
    println!("{envelope}");
}

/// Built-in state fixtures or a JSON file containing a density matrix.
fn load_state(spec: &str, seed: u64) -> Result<Density, Failure> {
    let fixture = |v: Vec<Cx>| Density::from_pure(&v).map_err(from_vn);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match spec {
        "up-y" => fixture(vec![Cx::new(h, 0.0), Cx::new(0.0, h)]),
        "bell" => fixture(vec![
            Cx::new(h, 0.0),
            Cx::new(0.0, 0.0),
            Cx::new(0.0, 0.0),
            Cx::new(h, 0.0),
        ]),
        "ghz" => {
            let mut v = vec![Cx::new(0.0, 0.0); 8];
            v[0] = Cx::new(h, 0.0);
            v[7] = Cx::new(h, 0.0);
            fixture(v)
        }
        "classical" => {
            let mut m = ComplexMatrix::zeros(4, 4);
            m[(0, 0)] = Cx::new(0.5, 0.0);
            m[(3, 3)] = Cx::new(0.5, 0.0);
            Density::new(m).map_err(from_vn)
        }
        other => {
            if let Some(d) = other.strip_prefix("mixed:") {
                let d: usize = d.parse().map_err(|_| input_err("bad dimension"))?;
                return Ok(Density::maximally_mixed(d));
            }
            if let Some(d) = other.strip_prefix("pure:") {
                let d: usize = d.parse().map_err(|_| input_err("bad dimension"))?;
                return sample_pure(d, seed).map_err(from_vn);
            }
            if let Some(d) = other.strip_prefix("random:") {
                let d: usize = d.parse().map_err(|_| input_err("bad dimension"))?;
                return sample_density(d, d, seed).map_err(from_vn);
            }
            let text = std::fs::read_to_string(other)
                .map_err(|e| input_err(format!("cannot read state '{other}': {e}")))?;
            serde_json::from_str::<Density>(&text)
                .map_err(|e| input_err(format!("malformed state JSON '{other}': {e}")))
        }
    }
}

fn load_algebra(spec: &str) -> Result<VnAlgebra, Failure> {
    if let Ok(alg) = VnAlgebra::by_name(spec) {
        return Ok(alg);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| input_err(format!("unknown algebra '{spec}' and not a readable file: {e}")))?;
    serde_json::from_str::<VnAlgebra>(&text)
        .map_err(|e| input_err(format!("malformed algebra JSON '{spec}': {e}")))
}

fn parse_dims(spec: &str) -> Result<Vec<usize>, Failure> {
    let dims: Vec<usize> = spec
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| input_err(format!("bad dims list '{spec}'")))?;
    if dims.is_empty() || dims.iter().any(|&d| d < 2 || d > 16) {
        return Err(input_err("dims must be a non-empty list within 2..=16"));
    }
    Ok(dims)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var("VNLAB_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    });
    match run(cli, seed) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli, seed: u64) -> Result<u8, Failure> {
    let tolerance = cli.tolerance;
    match cli.cmd {
        Cmd::CheckSquare { s, t, within, json_out } => {
            let s_alg = load_algebra(&s)?;
            let t_alg = load_algebra(&t)?;
            let m = match &within {
                Some(w) => load_algebra(w)?,
                None => VnAlgebra::join(&s_alg, &t_alg),
            };
            let square = VnAlgebra::classify_square(&s_alg, &t_alg, &m).map_err(from_vn)?;
            let report = json!({
                "ambient_dim": square.m().ambient_dim(),
                "s_dim": square.s().dim(),
                "t_dim": square.t().dim(),
                "c_dim": square.c().dim(),
                "commuting": square.is_commuting(),
                "co_commuting": square.is_co_commuting(),
                "commuting_residual": square.commuting_residual(),
                "co_commuting_residual": square.co_commuting_residual(),
            });
            if let Some(path) = &json_out {
                std::fs::write(path, serde_json::to_string_pretty(&report).unwrap())
                    .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))?;
            }
            emit(
                Manifest {
                    command: "check-square".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"s": s, "t": t, "within": within}),
                    output_path: json_out.map(|p| p.display().to_string()),
                },
                report,
            );
            Ok(0)
        }
        Cmd::Cmi { s, t, within, state } => {
            let s_alg = load_algebra(&s)?;
            let t_alg = load_algebra(&t)?;
            let m = match &within {
                Some(w) => load_algebra(w)?,
                None => VnAlgebra::join(&s_alg, &t_alg),
            };
            let rho = load_state(&state, seed)?;
            let rep = squares::gen_cmi(&s_alg, &t_alg, &m, &rho).map_err(from_vn)?;
            emit(
                Manifest {
                    command: "cmi".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"s": s, "t": t, "within": within, "state": state,
                                    "state_digest": rho.digest()}),
                    output_path: None,
                },
                serde_json::to_value(&rep).unwrap(),
            );
            Ok(0)
        }
        Cmd::Entropy { state, alg } => {
            let rho = load_state(&state, seed)?;
            let h = vnlab::entropy::vn_entropy(&rho).expect_finite();
            let mut report = json!({"state_entropy_bits": h, "dim": rho.dim()});
            if let Some(name) = &alg {
                let n = load_algebra(name)?;
                let ha = vnlab::entropy::algebra_entropy(&n, &rho)
                    .map_err(from_vn)?
                    .expect_finite();
                report["algebra_entropy_bits"] = json!(ha);
            }
            emit(
                Manifest {
                    command: "entropy".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"state": state, "alg": alg, "state_digest": rho.digest()}),
                    output_path: None,
                },
                report,
            );
            Ok(0)
        }
        Cmd::Ucr { relation, d, state, s, t, b_dim, c_dim } => {
            let rho = load_state(&state, seed)?;
            let rep = match relation.as_str() {
                "memory" => {
                    let fam = scenarios::mub_family(d).map_err(from_vn)?;
                    ucr::memory_ucr(d, &rho, fam.basis(0), fam.basis(1)).map_err(from_vn)?
                }
                "coherence" => {
                    let fam = scenarios::mub_family(d).map_err(from_vn)?;
                    ucr::coherence_ucr(fam.basis(0), fam.basis(1), &rho).map_err(from_vn)?
                }
                "maassen-uffink" => {
                    let s = s.ok_or_else(|| input_err("--s required for maassen-uffink"))?;
                    let t = t.ok_or_else(|| input_err("--t required for maassen-uffink"))?;
                    let s_alg = load_algebra(&s)?;
                    let t_alg = load_algebra(&t)?;
                    ucr::maassen_uffink_general(&s_alg, &t_alg, (b_dim, c_dim), &rho)
                        .map_err(from_vn)?
                }
                other => return Err(input_err(format!("unknown relation '{other}'"))),
            };
            let pass = rep.margin >= -tolerance.unwrap_or(1e-8);
            emit(
                Manifest {
                    command: "ucr".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"relation": relation, "d": d, "state": state,
                                    "state_digest": rho.digest()}),
                    output_path: None,
                },
                json!({"ucr": rep, "pass": pass}),
            );
            Ok(if pass { 0 } else { 1 })
        }
        Cmd::Measure { kind, s, t, state, ext_dim, restarts } => {
            let s_alg = load_algebra(&s)?;
            let t_alg = load_algebra(&t)?;
            let rho = load_state(&state, seed)?;
            let est = match kind.as_str() {
                "isq" => measures::isq_estimate(&s_alg, &t_alg, &rho, ext_dim, restarts, seed)
                    .map_err(from_vn)?,
                "iconv" => measures::iconv_estimate(&s_alg, &t_alg, &rho, ext_dim, restarts, seed)
                    .map_err(from_vn)?,
                "iext" => {
                    let join = VnAlgebra::join(&s_alg, &t_alg);
                    let square =
                        VnAlgebra::classify_square(&s_alg, &t_alg, &join).map_err(from_vn)?;
                    measures::iext_estimate(&[square], &rho, ext_dim.unwrap_or(2), seed)
                        .map_err(from_vn)?
                }
                other => return Err(input_err(format!("unknown measure kind '{other}'"))),
            };
            emit(
                Manifest {
                    command: "measure".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"kind": kind, "s": s, "t": t, "state": state,
                                    "state_digest": rho.digest(),
                                    "ext_dim": ext_dim, "restarts": restarts}),
                    output_path: None,
                },
                json!({
                    "exactness": est.exactness,
                    "estimate": est,
                }),
            );
            Ok(0)
        }
        Cmd::Scan { suite, dims, samples, out } => {
            let dims = parse_dims(&dims)?;
            if samples == 0 {
                return Err(input_err("samples must be positive"));
            }
            run_scan(&suite, &dims, samples, seed, tolerance, out)
        }
        Cmd::Demo { name } => {
            if name != "epr-ucr" {
                return Err(input_err(format!("unknown demo '{name}'")));
            }
            let transcript = scenarios::epr_ucr_demo(seed).map_err(from_vn)?;
            emit(
                Manifest {
                    command: "demo".into(),
                    version: env!("CARGO_PKG_VERSION").into(),
                    seed,
                    tolerance,
                    inputs: json!({"name": name}),
                    output_path: None,
                },
                serde_json::to_value(&transcript).unwrap(),
            );
            for step in &transcript.steps {
                let value = step
                    .value_bits
                    .map(|v| format!(" [{v:.6} bits]"))
                    .unwrap_or_default();
                eprintln!(
                    "{} {}{} — {}",
                    if step.pass { "PASS" } else { "FAIL" },
                    step.label,
                    value,
                    step.detail
                );
            }
            Ok(if transcript.all_pass { 0 } else { 3 })
        }
    }
}

/// One scan record; `margin ≥ −tolerance` decides `pass`.
#[derive(Serialize)]
struct ScanRecord {
    schema: &'static str,
    suite: String,
    index: usize,
    dim: usize,
    margin: f64,
    detail: String,
    pass: bool,
}

fn run_scan(
    suite: &str,
    dims: &[usize],
    samples: usize,
    seed: u64,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
) -> Result<u8, Failure> {
    let default_tol = match suite {
        "ssa" | "ucr" => 1e-9,
        "mono" => 1e-9,
        "duality" => 1e-7,
        "recovery" => 1e-8,
        other => return Err(input_err(format!("unknown suite '{other}'"))),
    };
    let tol = tolerance.unwrap_or(default_tol);
    let mut records = Vec::with_capacity(samples);
    for index in 0..samples {
        let dim = dims[index % dims.len()];
        let inst_seed = derive_seed(seed, index as u64);
        let (margin, detail) = scan_instance(suite, dim, inst_seed)?;
        records.push(ScanRecord {
            schema: SCHEMA,
            suite: suite.into(),
            index,
            dim,
            margin,
            detail,
            pass: margin >= -tol,
        });
    }
    let failures = records.iter().filter(|r| !r.pass).count();
    let min_margin = records.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let lines: Vec<String> = records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap())
        .collect();
    if let Some(path) = &out {
        let mut f = std::fs::File::create(path)
            .map_err(|e| input_err(format!("cannot create {}: {e}", path.display())))?;
        for line in &lines {
            writeln!(f, "{line}").map_err(|e| input_err(format!("write failed: {e}")))?;
        }
    } else {
        for line in &lines {
            println!("{line}");
        }
    }
    emit(
        Manifest {
            command: "scan".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            tolerance,
            inputs: json!({"suite": suite, "dims": dims, "samples": samples}),
            output_path: out.map(|p| p.display().to_string()),
        },
        json!({
            "suite": suite,
            "instances": samples,
            "failures": failures,
            "min_margin": min_margin,
            "tolerance": tol,
        }),
    );
    Ok(if failures > 0 { 1 } else { 0 })
}

/// Evaluates one scan instance; returns the margin that must be
/// ≥ −tolerance and a short description.
fn scan_instance(suite: &str, dim: usize, seed: u64) -> Result<(f64, String), Failure> {
    match suite {
        "ssa" => {
            let square = squares::sample_commuting_square(dim, seed).map_err(from_vn)?;
            let rho = sample_density(square.m().ambient_dim(), square.m().ambient_dim(), seed)
                .map_err(from_vn)?;
            let rep = squares::gen_cmi_classified(&square, &rho).map_err(from_vn)?;
            Ok((rep.value_bits, "gen-cmi non-negativity".into()))
        }
        "recovery" => {
            let square = squares::sample_commuting_square(dim, seed).map_err(from_vn)?;
            let d = square.m().ambient_dim();
            let rho = sample_density(d, d, seed).map_err(from_vn)?;
            let rep = squares::gen_cmi_classified(&square, &rho).map_err(from_vn)?;
            let gap = squares::recovery_gap(&square, &rho).map_err(from_vn)?;
            Ok((rep.value_bits - gap, "cmi ≥ recovery gap".into()))
        }
        "ucr" => {
            let d = if scenarios::is_prime(dim) { dim } else { 2 };
            let fam = scenarios::mub_family(d).map_err(from_vn)?;
            let rho = sample_density(2 * d, 2 * d, seed).map_err(from_vn)?;
            let rep = ucr::memory_ucr(d, &rho, fam.basis(0), fam.basis(1)).map_err(from_vn)?;
            Ok((rep.margin, "memory uncertainty relation".into()))
        }
        "duality" => {
            let (a, b) = if dim >= 4 && dim % 2 == 0 { (2, dim / 2) } else { (2, dim) };
            let square =
                squares::sample_cocommuting_factor_square(a, b, seed).map_err(from_vn)?;
            let psi = sample_pure(a * b, seed).map_err(from_vn)?;
            let (lhs, rhs) =
                squares::duality_check(square.s(), square.t(), square.m(), &psi)
                    .map_err(from_vn)?;
            Ok((1e-7 - (lhs - rhs).abs(), format!("|lhs−rhs| = {:.3e}", (lhs - rhs).abs())))
        }
        "mono" => {
            let square = squares::sample_commuting_square(dim, seed).map_err(from_vn)?;
            let d = square.m().ambient_dim();
            let rho = sample_density(d, d, seed).map_err(from_vn)?;
            let plan =
                vnlab::channels::sample_validated_plan(&square, 3, seed).map_err(from_vn)?;
            let op = vnlab::channels::build_s_operation(&plan, &square).map_err(from_vn)?;
            let stages = op.apply_traced(&rho).map_err(from_vn)?;
            let mut prev = squares::gen_cmi_classified(&square, &rho)
                .map_err(from_vn)?
                .value_bits;
            let mut min_drop = f64::INFINITY;
            for (state, sq) in &stages {
                let val = squares::gen_cmi_classified(sq, state)
                    .map_err(from_vn)?
                    .value_bits;
                min_drop = min_drop.min(prev - val);
                prev = val;
            }
            if !min_drop.is_finite() {
                // plan had no state-transforming step: trivially monotone
                min_drop = 0.0;
            }
            Ok((min_drop, "per-step cmi monotonicity".into()))
        }
        other => Err(input_err(format!("unknown suite '{other}'"))),
    }
}
