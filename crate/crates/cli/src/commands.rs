use std::path::{Path, PathBuf};

use serde::Serialize;

use ibirm_core::dynamics::{theorem5_report, trajectory_rows, FlowSpec, Theorem5Report};
use ibirm_core::entropy::run_entropy_suite;
use ibirm_core::report::{
    aggregate, aggregate_report, dataset_to_csv, sweep_to_csv, trajectory_to_csv, write_atomic, Header,
};
use ibirm_core::sem::generate_benchmark;
use ibirm_core::trainer::{sweep as run_sweep, Protocol, SweepSettings};
use ibirm_core::{EnvParams, GeneratorSpec, RngStream, SUITE_VERSION};

use crate::config::RunConfig;
use crate::CliError;

/// Longest trajectory CSV written by `dynamics`.
const MAX_TRAJECTORY_ROWS: usize = 5000;

fn header(cfg: &RunConfig) -> Header {
    Header::now(cfg.seed, cfg.hash())
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Serialize)]
struct Manifest<'a> {
    suite: &'static str,
    version: &'static str,
    root_seed: u64,
    config_hash: String,
    timestamp: Option<String>,
    example: &'a str,
    spec: &'a GeneratorSpec,
    envs: &'a [EnvParams],
    files: Vec<String>,
}

pub fn generate(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spec().map_err(CliError::Validation)?;
    let (params, _, envs) = generate_benchmark(&spec, &RngStream::root(cfg.seed))?;
    let h = header(cfg);
    let mut files = Vec::new();
    for env in &envs {
        let name = format!("{}_env{}.csv", cfg.example, env.env_id);
        write(&cfg.out.join(&name), &dataset_to_csv(env, &h))?;
        files.push(name);
    }
    let manifest = Manifest {
        suite: ibirm_core::report::SUITE_NAME,
        version: SUITE_VERSION,
        root_seed: cfg.seed,
        config_hash: h.config_hash.clone(),
        timestamp: h.timestamp.clone(),
        example: &cfg.example,
        spec: &spec,
        envs: &params,
        files,
    };
    write(&cfg.out.join("manifest.json"), &to_json(&manifest))?;
    println!("wrote {} environment files to {}", envs.len(), cfg.out.display());
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spec().map_err(CliError::Validation)?;
    let methods = cfg.method_list().map_err(CliError::Validation)?;
    let protocol = Protocol {
        n_queries: cfg.queries,
        n_seeds: cfg.seeds,
    };
    let settings = SweepSettings {
        steps: cfg.steps,
        optimizer: cfg.optimizer_kind().map_err(CliError::Validation)?,
        ..Default::default()
    };
    let report = run_sweep(&spec, &methods, protocol, &settings, &RngStream::root(cfg.seed))?;
    let summary = aggregate(&report);
    let h = header(cfg);
    write(&cfg.out.join("sweep.csv"), &sweep_to_csv(&report, &h))?;
    write(&cfg.out.join("summary.csv"), &summary.to_csv(&h))?;
    print!("{}", summary.to_text());
    Ok(())
}

#[derive(Serialize)]
struct Bounds {
    t_ib: f64,
    eps: f64,
    erm_lower_bound: f64,
}

#[derive(Serialize)]
struct Verdict {
    t_ib: f64,
    crossing_time: Option<f64>,
    erm_ratio_at_tib: f64,
    bounds: Bounds,
    pass: bool,
    stable_under_half_dt: bool,
    report: Theorem5Report,
}

pub fn dynamics(cfg: &RunConfig) -> Result<(), CliError> {
    let rep = theorem5_report(cfg.p, cfg.gamma, cfg.eps, cfg.dt)?;
    let half = theorem5_report(cfg.p, cfg.gamma, cfg.eps, cfg.dt / 2.0)?;
    let stable = rep.ib_within_bound == half.ib_within_bound && rep.erm_above_bound == half.erm_above_bound;
    let h = header(cfg);
    let stride = ((rep.t_ib / cfg.dt) as usize / MAX_TRAJECTORY_ROWS).max(1);
    let flows = [
        ("trajectory.csv", FlowSpec::ib_erm(cfg.p, cfg.gamma)?),
        ("trajectory_erm.csv", FlowSpec::erm(cfg.p)?),
    ];
    for (name, spec) in flows {
        let rows = trajectory_rows(&spec, rep.t_ib, cfg.dt, stride)?;
        write(&cfg.out.join(name), &trajectory_to_csv(&rows, &h))?;
    }
    let verdict = Verdict {
        t_ib: rep.t_ib,
        crossing_time: rep.crossing_time,
        erm_ratio_at_tib: rep.erm_ratio_at_tib,
        bounds: Bounds {
            t_ib: rep.t_ib,
            eps: rep.eps,
            erm_lower_bound: rep.erm_lower_bound,
        },
        pass: rep.pass && stable,
        stable_under_half_dt: stable,
        report: rep,
    };
    write(&cfg.out.join("verdict.json"), &to_json(&verdict))?;
    let crossing = verdict
        .crossing_time
        .map_or_else(|| "none".to_string(), |t| format!("{t:.3}"));
    println!(
        "T_ib = {:.3}  IB-ERM crossing = {crossing}  ERM ratio at T_ib = {:.4} (bound {:.4})  pass = {}",
        verdict.t_ib, verdict.erm_ratio_at_tib, verdict.bounds.erm_lower_bound, verdict.pass
    );
    Ok(())
}

pub fn entropy(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = run_entropy_suite(1000, &RngStream::root(cfg.seed));
    println!("{:<42} {:>7} {:>12}  verdict", "check", "trials", "worst");
    for c in &checks {
        println!(
            "{:<42} {:>7} {:>12.4e}  {}",
            c.name,
            c.trials,
            c.worst,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
    if checks.iter().all(|c| c.pass) {
        Ok(())
    } else {
        Err(CliError::Validation("entropy checks failed".into()))
    }
}

pub fn report(cfg: &RunConfig, files: &[PathBuf]) -> Result<(), CliError> {
    let table = aggregate_report(files)?;
    write(&cfg.out.join("summary.csv"), &table.to_csv(&header(cfg)))?;
    print!("{}", table.to_text());
    Ok(())
}
