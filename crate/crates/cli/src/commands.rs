use std::fs;
use std::time::Instant;

use ccd_core::capacity::{
    capacity_probability, capacity_report, hull_contains_zero, HullVerdict, ANGLE_TOL,
};
use ccd_core::cartan::{is_in_K, k_membership_residual, symplectic_residual};
use ccd_core::ccd::{a_membership_residual, ccd};
use ccd_core::forms::{concurrence, make_state, StateKind};
use ccd_core::intertwiners::{certify, IntertwinerKind};
use ccd_core::linalg::{ComplexMatrix, C64};
use ccd_core::monotone::{mixed_concurrence, monotone_sweep, MonotoneReport};
use serde::Serialize;

use crate::args::{Command, Common, Format, Group, Settings};
use crate::error::{CliError, CliResult, EXIT_CHECK_FAILED, EXIT_OK};
use crate::matrix_file::{Kind, MatrixFile};
use crate::output::{sample_csv, to_json, SampleRow};

type Pair = [f64; 2];

fn pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn pairs(v: &[C64]) -> Vec<Pair> {
    v.iter().copied().map(pair).collect()
}

fn matrix_pairs(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.rows()).map(|r| pairs(m.row(r))).collect()
}

/// Text produced by a command together with its exit code.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

fn json_only(settings: &Settings) -> CliResult<()> {
    match settings.format {
        None | Some(Format::Json) => Ok(()),
        Some(Format::Csv) => Err(CliError::Usage("this command only writes JSON".into())),
    }
}

fn passing(pass: bool) -> i32 {
    if pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[derive(Serialize)]
struct DecomposeReport {
    n: usize,
    residual: f64,
    tolerance: f64,
    pass: bool,
    branch_flips: usize,
    k1_membership_residual: f64,
    k2_membership_residual: f64,
    d: Vec<Pair>,
    k1: Vec<Vec<Pair>>,
    a: Vec<Vec<Pair>>,
    k2: Vec<Vec<Pair>>,
}

fn decompose(file: &MatrixFile, settings: &Settings) -> CliResult<Outcome> {
    json_only(settings)?;
    let v = file.matrix()?;
    let f = ccd(&v, file.n)?;
    let tolerance = settings.tolerance("residual", 1e-8 * file.dim() as f64);
    let report = DecomposeReport {
        n: file.n,
        residual: f.residual,
        tolerance,
        pass: f.residual <= tolerance,
        branch_flips: f.branch_flips,
        k1_membership_residual: k_membership_residual(&f.k1)?,
        k2_membership_residual: k_membership_residual(&f.k2)?,
        d: pairs(&f.d),
        k1: matrix_pairs(&f.k1),
        a: matrix_pairs(&f.a),
        k2: matrix_pairs(&f.k2),
    };
    Ok(Outcome {
        text: to_json(&report)?,
        code: passing(report.pass),
    })
}

#[derive(Serialize)]
struct CapacityJson {
    n: usize,
    spectrum: Vec<Pair>,
    zero_in_hull: HullVerdict,
    max_gap: f64,
    kappa: f64,
    kappa_pairwise_lower: f64,
    argmax_witness: Vec<Pair>,
}

fn capacity(file: &MatrixFile, settings: &Settings) -> CliResult<Outcome> {
    json_only(settings)?;
    let v = file.matrix()?;
    let r = capacity_report(&v, file.n)?;
    let tol = settings.tolerance("angle", ANGLE_TOL);
    let verdict = hull_contains_zero(&r.spectrum, tol)?;
    let out = CapacityJson {
        n: file.n,
        spectrum: pairs(r.spectrum.points()),
        zero_in_hull: verdict,
        max_gap: r.max_gap,
        kappa: r.kappa,
        kappa_pairwise_lower: r.kappa_pairwise_lower,
        argmax_witness: pairs(&r.argmax_witness),
    };
    Ok(Outcome {
        text: to_json(&out)?,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct ConcurrenceJson {
    n: usize,
    source: String,
    concurrence: f64,
    tangle: f64,
}

fn concurrence_cmd(
    input: Option<&MatrixFile>,
    state: Option<&str>,
    n: Option<usize>,
    settings: &Settings,
) -> CliResult<Outcome> {
    json_only(settings)?;
    let (n, source, value) = match (input, state) {
        (Some(file), None) => match file.kind {
            Kind::Ket => (file.n, "ket".to_string(), concurrence(&file.ket()?)?),
            Kind::Density => (
                file.n,
                "density".to_string(),
                mixed_concurrence(&file.density()?)?,
            ),
            Kind::Unitary => {
                return Err(CliError::Parse(
                    "concurrence needs a ket or density file".into(),
                ))
            }
        },
        (None, Some(name)) => {
            let kind: StateKind = name.parse()?;
            let n = n.ok_or_else(|| CliError::Usage("--state needs --n".into()))?;
            (
                n,
                name.to_ascii_lowercase(),
                concurrence(&make_state(kind, n)?)?,
            )
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --input or --state".into(),
            ))
        }
    };
    let out = ConcurrenceJson {
        n,
        source,
        concurrence: value,
        tangle: value * value,
    };
    Ok(Outcome {
        text: to_json(&out)?,
        code: EXIT_OK,
    })
}

fn sample(
    n_flag: &[usize],
    trials: Option<u64>,
    seed: Option<u64>,
    no_wall_clock: bool,
    settings: &Settings,
) -> CliResult<Outcome> {
    let n_list = if n_flag.is_empty() {
        settings.n_list.clone()
    } else {
        n_flag.to_vec()
    };
    if n_list.is_empty() {
        return Err(CliError::Usage(
            "sample needs --n (or config n_list)".into(),
        ));
    }
    let trials = settings.require_trials(trials, None)?;
    let seed = settings.require_seed(seed)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in &n_list {
        let start = Instant::now();
        let est = capacity_probability(n, trials, seed)?;
        let wall_ms = if no_wall_clock {
            0
        } else {
            start.elapsed().as_millis() as u64
        };
        rows.push(SampleRow {
            n,
            trials,
            p_hat: est.p_hat,
            ci_lo: est.ci_lo,
            ci_hi: est.ci_hi,
            seed,
            wall_ms,
        });
    }
    let text = match settings.format.unwrap_or(Format::Csv) {
        Format::Csv => sample_csv(&rows)?,
        Format::Json => to_json(&rows)?,
    };
    Ok(Outcome {
        text,
        code: EXIT_OK,
    })
}

#[derive(Serialize)]
struct VerifyJson {
    group: &'static str,
    n: usize,
    member: bool,
    residual: f64,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<Pair>,
}

fn verify(file: &MatrixFile, group: Group, settings: &Settings) -> CliResult<Outcome> {
    json_only(settings)?;
    let m = file.matrix()?;
    let tol = settings.tolerance("membership", 1e-8);
    let mut xi = None;
    let (name, residual, member) = match group {
        Group::K => {
            let member = is_in_K(&m, tol)?;
            ("K", k_membership_residual(&m)?, member)
        }
        Group::SpBlock => {
            let r = symplectic_residual(&m)?;
            ("sp_block", r, r <= tol)
        }
        Group::Entangler | Group::Finagler => {
            let (name, kind) = if group == Group::Entangler {
                ("entangler", IntertwinerKind::Entangler)
            } else {
                ("finagler", IntertwinerKind::Finagler)
            };
            if group == Group::Entangler && file.n % 2 == 1 {
                return Err(ccd_core::Error::EntanglerNonexistent { n: file.n }.into());
            }
            if group == Group::Finagler && (file.n % 2 == 0 || file.n < 3) {
                return Err(ccd_core::Error::FinaglerArgument { n: file.n }.into());
            }
            let unit = m.unitarity_residual().unwrap_or(f64::INFINITY);
            let cert = certify(&m, kind)?;
            xi = Some(pair(cert.xi));
            let root = (cert.xi.powi(file.dim() as i32) - C64::new(1.0, 0.0)).norm();
            let member = cert.residual <= tol && root <= tol && unit <= tol;
            (name, cert.residual, member)
        }
        Group::AAlgebra => {
            let r = a_membership_residual(&m)?;
            ("a_algebra", r, r <= tol)
        }
    };
    let out = VerifyJson {
        group: name,
        n: file.n,
        member,
        residual,
        tolerance: tol,
        xi,
    };
    Ok(Outcome {
        text: to_json(&out)?,
        code: passing(member),
    })
}

fn monotone(
    n: Option<usize>,
    trials: Option<u64>,
    seed: Option<u64>,
    settings: &Settings,
) -> CliResult<Outcome> {
    json_only(settings)?;
    let n = n.or(settings.n_list.first().copied()).unwrap_or(2);
    let trials = settings.require_trials(trials, Some(1000))?;
    let seed = settings.require_seed(seed)?;
    let report: MonotoneReport = monotone_sweep(n, trials, seed)?;
    Ok(Outcome {
        text: to_json(&report)?,
        code: passing(report.pass),
    })
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Decompose { common, .. }
        | Command::Capacity { common, .. }
        | Command::Concurrence { common, .. }
        | Command::Sample { common, .. }
        | Command::Verify { common, .. }
        | Command::Monotone { common, .. } => common,
    }
}

/// Runs one parsed command and writes its output.
pub fn execute(cmd: &Command) -> CliResult<Outcome> {
    let settings = Settings::resolve(common(cmd))?;
    let outcome = match cmd {
        Command::Decompose { input, .. } => decompose(&MatrixFile::load(input)?, &settings)?,
        Command::Capacity { input, .. } => capacity(&MatrixFile::load(input)?, &settings)?,
        Command::Concurrence {
            input, state, n, ..
        } => {
            let file = input.as_deref().map(MatrixFile::load).transpose()?;
            concurrence_cmd(file.as_ref(), state.as_deref(), *n, &settings)?
        }
        Command::Sample {
            n,
            trials,
            seed,
            no_wall_clock,
            ..
        } => sample(n, *trials, *seed, *no_wall_clock, &settings)?,
        Command::Verify { input, group, .. } => {
            verify(&MatrixFile::load(input)?, *group, &settings)?
        }
        Command::Monotone {
            n, trials, seed, ..
        } => monotone(*n, *trials, *seed, &settings)?,
    };
    if let Some(path) = &settings.output {
        fs::write(path, &outcome.text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        return Ok(Outcome {
            text: String::new(),
            code: outcome.code,
        });
    }
    Ok(outcome)
}
