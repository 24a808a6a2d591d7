//! Scenario execution and artifact emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64 as C64;
use rigid_psido::corpus::Corpus;
use rigid_psido::dynamics::{integrate, FlowConfig, TrajectoryRecord};
use rigid_psido::spectral::format_complex;
use rigid_psido::{
    heat_dressed_identity, multiplication_operator, ModeBasis, RegularizedOperator, SpectralPolynomial, TrigPoly,
};
use serde_json::{json, Value};

use crate::config::{parse_config, InitialSpec, ScenarioConfig};
use crate::snapshot::{read_snapshot, write_snapshot};
use crate::LabError;

/// Sign and normalization conventions recorded in every manifest.
pub fn conventions() -> Value {
    json!({
        "ad": "ad_X Y = YX - XY",
        "ad_twisted": "A^-1((A(Z) Q0 X* - X* A(Z) Q0) Q0^-1), Q0 X* Q0^-1 entrywise",
        "pairing": "<A, B> = tr^Q(A Q0 A(B)*), conjugate-linear in B",
        "inertia": "right multiplication by base + bump exp(-k^2 / width)",
        "weight": "Q = Laplacian + orthogonal projection on constants",
        "trace": "tr^Q((Q)^m) = 1 + 2 zeta(-2m)",
        "curvature": "bracket_of_fields",
        "spray_sign": "theta_X X = -ad_twisted(X, X)",
        "functional_derivative": "k (P*)^(k-1) Q0^-1",
    })
}

/// Builds `X₀` for a configuration. `seed` feeds `random(..)`; `base_dir`
/// resolves relative `file:` paths.
pub fn initial_state(cfg: &ScenarioConfig, seed: u64, base_dir: &Path) -> Result<RegularizedOperator, LabError> {
    let basis = ModeBasis::new(cfg.cutoff)?;
    let one = C64::new(1.0, 0.0);
    Ok(match &cfg.initial {
        InitialSpec::Identity => RegularizedOperator::from_symbolic(SpectralPolynomial::identity(), basis),
        InitialSpec::Paper62(n) => heat_dressed_identity(&TrigPoly::monomial(*n, one), basis),
        InitialSpec::Smoothing(a) => heat_dressed_identity(a, basis),
        InitialSpec::Trig(l) => {
            let a = TrigPoly::from_pairs([(*l, C64::new(0.25, 0.0)), (-*l, C64::new(0.25, 0.0))]);
            RegularizedOperator::identity_plus(multiplication_operator(&a, basis).operator)
        }
        InitialSpec::Random(amplitude) => {
            let mut corpus = Corpus::new(basis, seed);
            RegularizedOperator::identity_plus(corpus.smoothing(*amplitude).kernel().clone())
        }
        InitialSpec::File(path) => {
            let path = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            let (x, _) = read_snapshot(&fs::read_to_string(&path)?)?;
            if x.basis() != basis {
                return Err(LabError::Snapshot(format!(
                    "{} has cutoff {}, configuration has {}",
                    path.display(),
                    x.basis().cutoff(),
                    cfg.cutoff
                )));
            }
            x
        }
    })
}

pub fn flow_config(cfg: &ScenarioConfig, allow_uncertified: bool) -> Result<FlowConfig, LabError> {
    let mut flow = FlowConfig::new(cfg.twist()?, ModeBasis::new(cfg.cutoff)?);
    flow.integrator = cfg.integrator;
    flow.step = cfg.step;
    flow.horizon = cfg.horizon;
    flow.stride = cfg.stride;
    flow.ks = cfg.ks.clone();
    flow.xis = cfg.xis.clone();
    flow.track_spectrum = cfg.track_spectrum;
    flow.step_tolerance = cfg.step_tolerance;
    flow.allow_uncertified = allow_uncertified;
    Ok(flow)
}

/// Options shared by `run` and `sweep`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: u64,
    pub allow_uncertified: bool,
    /// Directory against which relative `file:` initial states resolve.
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub record: TrajectoryRecord,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let first = &record.samples[0].integrals;
    let mut header = vec!["time".to_string()];
    for k in &first.ks {
        for xi in &first.xis {
            let tag = format!("I{k}({})", format_complex(*xi));
            header.push(format!("{tag}_re"));
            header.push(format!("{tag}_im"));
            header.push(format!("{tag}_drift"));
        }
    }
    for h in ["lax_residual", "spectrum_drift", "weak_residual", "truncation_estimate", "local_error", "boundary_mass"] {
        header.push(h.into());
    }
    let mut out = header.join(",");
    out.push('\n');
    for s in &record.samples {
        let mut row = vec![num(s.time)];
        for (a, vals) in s.integrals.values.iter().enumerate() {
            for (b, v) in vals.iter().enumerate() {
                let v0 = first.values[a][b];
                row.push(num(v.re));
                row.push(num(v.im));
                row.push(num((v - v0).norm() / v0.norm().max(1.0)));
            }
        }
        row.push(num(s.lax_residual));
        row.push(s.spectrum_drift.map(num).unwrap_or_default());
        row.push(num(s.weak_residual));
        row.push(num(s.truncation_estimate));
        row.push(num(s.local_error));
        row.push(num(s.boundary_mass));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn manifest(cfg: &ScenarioConfig, opts: &RunOptions, record: &TrajectoryRecord, snapshots: &[String]) -> Value {
    let config: serde_json::Map<String, Value> =
        cfg.to_pairs().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
    let drift = record.integral_drift();
    let first = &record.samples[0].integrals;
    let mut drifts = serde_json::Map::new();
    for (a, k) in first.ks.iter().enumerate() {
        for (b, xi) in first.xis.iter().enumerate() {
            drifts.insert(format!("I{k}({})", format_complex(*xi)), json!(drift[a][b]));
        }
    }
    json!({
        "library": {"name": "rigid-psido", "version": env!("CARGO_PKG_VERSION")},
        "config": config,
        "seed": opts.seed,
        "conventions": conventions(),
        "certification": {
            "certified": record.certified,
            "allow_uncertified": opts.allow_uncertified,
        },
        "summary": {
            "steps": record.steps,
            "step": record.step,
            "samples": record.samples.len(),
            "initial_min_singular": record.initial_min_singular,
            "lax_hypothesis_residuals": [record.hypothesis_residuals.0, record.hypothesis_residuals.1],
            "max_integral_drift": record.max_integral_drift(),
            "integral_drift": drifts,
            "max_lax_residual": record.max_lax_residual(),
            "max_spectrum_drift": record.max_spectrum_drift(),
            "max_weak_residual": record.samples.iter().map(|s| s.weak_residual).fold(0.0, f64::max),
            "max_truncation_estimate": record.samples.iter().map(|s| s.truncation_estimate).fold(0.0, f64::max),
            "max_local_error": record.samples.iter().map(|s| s.local_error).fold(0.0, f64::max),
        },
        "artifacts": {
            "csv": cfg.csv,
            "snapshots": snapshots,
        },
    })
}

/// Integrates a scenario and writes its CSV, manifest and optional snapshots
/// under `opts.out`.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome, LabError> {
    let x0 = initial_state(cfg, opts.seed, &opts.base_dir)?;
    let flow = flow_config(cfg, opts.allow_uncertified)?;
    let record = integrate(&x0, &flow)?;
    if !record.certified && !opts.allow_uncertified {
        return Err(LabError::Core(rigid_psido::Error::NotCertified("trajectory".into())));
    }
    fs::create_dir_all(&opts.out)?;
    let mut snapshots = Vec::new();
    if cfg.snapshots {
        let dir = opts.out.join("snapshots");
        fs::create_dir_all(&dir)?;
        for (i, (t, x)) in record.times.iter().zip(&record.states).enumerate() {
            let name = format!("snapshots/state_{i:04}.txt");
            fs::write(opts.out.join(&name), write_snapshot(x, *t))?;
            snapshots.push(name);
        }
    }
    let csv = opts.out.join(&cfg.csv);
    fs::write(&csv, trajectory_csv(&record))?;
    let manifest_path = opts.out.join(&cfg.manifest);
    let mut text = serde_json::to_string_pretty(&manifest(cfg, opts, &record, &snapshots))?;
    text.push('\n');
    fs::write(&manifest_path, text)?;
    Ok(RunOutcome {
        csv,
        manifest: manifest_path,
        record,
    })
}

/// Result of one sweep member.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub config: PathBuf,
    pub out: PathBuf,
    pub status: Result<(), String>,
}

/// Runs each configuration in its own subdirectory `out/<file stem>` on a pool
/// of `jobs` worker threads and writes `out/sweep.json`.
pub fn sweep(configs: &[PathBuf], opts: &RunOptions, jobs: usize) -> Result<Vec<SweepEntry>, LabError> {
    let mut stems = std::collections::BTreeSet::new();
    for c in configs {
        let stem = c.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
        if stem.is_empty() || !stems.insert(stem.clone()) {
            return Err(LabError::Usage(format!("duplicate or empty config name `{}`", c.display())));
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SweepEntry>>> = Mutex::new(vec![None; configs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, configs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = configs.get(i) else { break };
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                let member = RunOptions {
                    out: opts.out.join(stem),
                    base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
                    ..opts.clone()
                };
                let status = fs::read_to_string(path)
                    .map_err(LabError::from)
                    .and_then(|text| parse_config(&text).map_err(LabError::Config))
                    .and_then(|cfg| run_scenario(&cfg, &member).map(|_| ()))
                    .map_err(|e| e.to_string());
                results.lock().expect("sweep worker panicked")[i] = Some(SweepEntry {
                    config: path.clone(),
                    out: member.out,
                    status,
                });
            });
        }
    });
    let entries: Vec<SweepEntry> = results.into_inner().expect("sweep worker panicked").into_iter().flatten().collect();
    let summary: Vec<Value> = entries
        .iter()
        .map(|e| {
            json!({
                "config": e.config.display().to_string(),
                "out": e.out.display().to_string(),
                "ok": e.status.is_ok(),
                "error": e.status.as_ref().err(),
            })
        })
        .collect();
    fs::create_dir_all(&opts.out)?;
    let mut text = serde_json::to_string_pretty(&json!({ "runs": summary }))?;
    text.push('\n');
    fs::write(opts.out.join("sweep.json"), text)?;
    Ok(entries)
}

/// The `c_{k,j}` table of a configuration's initial state, as CSV.
pub fn trace_table(cfg: &ScenarioConfig, seed: u64, base_dir: &Path, allow_uncertified: bool) -> Result<String, LabError> {
    let x0 = initial_state(cfg, seed, base_dir)?;
    let flow = flow_config(cfg, allow_uncertified)?;
    let mi = rigid_psido::motion_integrals(&x0, &cfg.ks, &cfg.xis, &flow)?;
    let mut out = String::from("k,j,re,im\n");
    for (k, row) in mi.ks.iter().zip(&mi.table) {
        for (j, c) in row.iter().enumerate() {
            let _ = writeln!(out, "{k},{j},{},{}", num(c.re), num(c.im));
        }
    }
    Ok(out)
}
