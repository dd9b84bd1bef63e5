//! Command-line front end: reproducible experiment runs that emit the
//! simulation, reconstruction, hypothesis-testing, bound, and trace tables.
//!
//! Configuration is a single flat JSON document; `--set key=value` overrides
//! config keys and the dedicated flags (`--seed`, `--out`, ...) override
//! both. Every run writes a `manifest.json` embedding the resolved config,
//! content hashes of the inputs, and the master seed; re-running a manifest
//! (`--config manifest.json`) reproduces the outputs byte-identically.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical inapplicability
//! (a bound queried outside its hypotheses).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use displace_learn::bounds::{
    acquisition_time, classical_lower, classical_success_bound, equivalent_classical_n,
    format_duration, hoeffding_upper,
};
use displace_learn::complex_vec::ComplexVec;
use displace_learn::error::Error;
use displace_learn::estimator::reconstruct_slice;
use displace_learn::hypothesis::{
    deal, sample_complexity_hypo, success_probability, GamePools, GameSpec, HypoWalk, Statistic,
};
use displace_learn::io;
use displace_learn::measurement::{
    inject_pilots, simulate_bell_batch, DriftModel, RecordBatch, SqueezingSpec,
};
use displace_learn::process::ProcessSpec;
use displace_learn::reconstruction::{
    complexity_uncertainty, direction_sweep, peak_direction, sample_complexity_recon, ReconSpec,
};
use displace_learn::seeding::{SIM_CHUNK, SUM_CHUNK};
use displace_learn::trace::{
    calibrate_crosstalk, calibrate_vacuum_scale, estimate_delay, extract_quadratures,
    synth_crosstalk_sweep, synth_trace, ModeFunctionSpec, Quadrature, TimeTrace,
};

#[derive(Parser)]
#[command(
    name = "displace-learn",
    version,
    about = "Displacement-process learning laboratory"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat JSON configuration (or a previous run's manifest.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; taken from the OS (and logged) when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap; output content is thread-count invariant.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Table format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Override a config key, e.g. --set records=100 (value parsed as JSON).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate Bell-measurement records and write CSV + metadata.
    Simulate,
    /// Slice reconstruction, sample-complexity search, or direction sweep.
    Reconstruct,
    /// Hypothesis-testing game: scoring or sample-complexity search.
    Hypotest,
    /// Closed-form complexity bounds over parameter sweeps.
    Bounds,
    /// Time-domain tooling: synthesize, extract, delay, crosstalk.
    Trace,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Inapplicable(_) => ExitCode::from(3),
                Error::InvalidInput(_) | Error::Serde(_) | Error::UnsupportedVariant(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: &Cli) -> displace_learn::Result<()> {
    std::fs::create_dir_all(&cli.out)?;
    let (config, input_hashes) = resolve_config(cli)?;
    match cli.cmd {
        Cmd::Simulate => cmd_simulate(cli, config, input_hashes),
        Cmd::Reconstruct => cmd_reconstruct(cli, config, input_hashes),
        Cmd::Hypotest => cmd_hypotest(cli, config, input_hashes),
        Cmd::Bounds => cmd_bounds(cli, config, input_hashes),
        Cmd::Trace => cmd_trace(cli, config, input_hashes),
    }
}

/// Loads the config document, unwraps manifests, applies `--set` overrides
/// and the `--seed` flag. Returns the resolved document plus input hashes.
fn resolve_config(cli: &Cli) -> displace_learn::Result<(serde_json::Value, Vec<io::FileHash>)> {
    let mut hashes = Vec::new();
    let mut value = match &cli.config {
        Some(path) => {
            hashes.push(io::FileHash {
                path: path.display().to_string(),
                sha256: io::sha256_hex(path)?,
            });
            let raw: serde_json::Value = io::read_json(path)?;
            match raw {
                serde_json::Value::Object(ref map)
                    if map.get("tool").and_then(|t| t.as_str()) == Some("displace-learn") =>
                {
                    map.get("config")
                        .cloned()
                        .ok_or_else(|| Error::invalid("manifest lacks a config section"))?
                }
                other => other,
            }
        }
        None => serde_json::Value::Object(serde_json::Map::new()),
    };
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::invalid("config must be a JSON object"))?;
    for entry in &cli.overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("--set needs KEY=VALUE, got {entry:?}")))?;
        let parsed = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        map.insert(key.to_string(), parsed);
    }
    if let Some(seed) = cli.seed {
        map.insert("seed".into(), serde_json::json!(seed));
    }
    Ok((value, hashes))
}

/// Draws a seed from the OS when the config does not pin one, and logs it.
fn ensure_seed(config: &mut serde_json::Value) -> displace_learn::Result<u64> {
    let map = config.as_object_mut().expect("validated object");
    match map.get("seed") {
        Some(serde_json::Value::Null) | None => {
            let seed: u64 = rand::random();
            eprintln!("no seed supplied; chose {seed}");
            map.insert("seed".into(), serde_json::json!(seed));
            Ok(seed)
        }
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::invalid("seed must be an unsigned integer")),
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(
    value: serde_json::Value,
) -> displace_learn::Result<T> {
    serde_json::from_value(value).map_err(|e| Error::invalid(format!("config: {e}")))
}

fn write_manifest(
    cli: &Cli,
    subcommand: &str,
    seed: u64,
    config: &serde_json::Value,
    input_hashes: Vec<io::FileHash>,
    outputs: Vec<String>,
) -> displace_learn::Result<()> {
    let manifest = io::Manifest {
        tool: "displace-learn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: subcommand.into(),
        master_seed: seed,
        config: config.clone(),
        input_hashes,
        outputs,
        sim_chunk: SIM_CHUNK,
        sum_chunk: SUM_CHUNK,
    };
    io::write_json(&cli.out.join("manifest.json"), &manifest)
}

fn identity() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

fn one() -> f64 {
    1.0
}

// --- simulate ----------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    process: ProcessSpec,
    records: usize,
    #[serde(default)]
    squeezing_db: f64,
    #[serde(default = "one")]
    transmissivity: f64,
    #[serde(default = "identity")]
    drift: [[f64; 2]; 2],
    #[serde(default = "one")]
    noise_scale: f64,
    /// 0 disables pilot injection; otherwise one pilot per `pilot_period`
    /// output records.
    #[serde(default)]
    pilot_period: usize,
    #[serde(default = "default_pilot_amplitude")]
    pilot_amplitude: f64,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_pilot_amplitude() -> f64 {
    10.0
}

fn cmd_simulate(
    cli: &Cli,
    mut config: serde_json::Value,
    input_hashes: Vec<io::FileHash>,
) -> displace_learn::Result<()> {
    let seed = ensure_seed(&mut config)?;
    let cfg: SimulateConfig = parse_config(config.clone())?;
    let squeezing = SqueezingSpec::new(cfg.squeezing_db, cfg.transmissivity)?;
    let drift = DriftModel::new(cfg.drift, cfg.noise_scale)?;
    let mut batch = simulate_bell_batch(&cfg.process, &squeezing, &drift, cfg.records, seed)?;
    if cfg.pilot_period > 0 {
        batch = inject_pilots(
            &batch,
            cfg.pilot_period,
            cfg.pilot_amplitude,
            seed,
            &squeezing,
            &drift,
        )?;
    }
    let records_path = cli.out.join("records.csv");
    io::write_records_csv(&records_path, &batch)?;
    let meta = io::RunMetadata {
        process: cfg.process.clone(),
        n: cfg.process.modes(),
        records: batch.len(),
        squeezing_db: cfg.squeezing_db,
        transmissivity: cfg.transmissivity,
        r_eff: squeezing.effective_squeezing(),
        drift: cfg.drift,
        noise_scale: cfg.noise_scale,
        master_seed: seed,
        sim_chunk: SIM_CHUNK,
        sum_chunk: SUM_CHUNK,
    };
    io::write_json(&cli.out.join("records.meta.json"), &meta)?;
    write_manifest(
        cli,
        "simulate",
        seed,
        &config,
        input_hashes,
        vec!["records.csv".into(), "records.meta.json".into()],
    )?;
    println!(
        "wrote {} records ({} modes) to {}",
        batch.len(),
        meta.n,
        records_path.display()
    );
    Ok(())
}

// --- reconstruct ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum ReconMode {
    Slice,
    Complexity,
    Sweep,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReconstructConfig {
    /// Input records; when absent, records are simulated inline from
    /// `process` + `records`.
    #[serde(default)]
    records_csv: Option<String>,
    /// Ground-truth process (three-peak for complexity/sweep).
    #[serde(default)]
    process: Option<ProcessSpec>,
    #[serde(default)]
    records: Option<usize>,
    #[serde(default)]
    squeezing_db: f64,
    #[serde(default = "one")]
    transmissivity: f64,
    #[serde(default = "identity")]
    drift: [[f64; 2]; 2],
    #[serde(default = "one")]
    noise_scale: f64,
    mode: ReconMode,
    /// Estimation-side drift correction matrix (defaults to identity).
    #[serde(default)]
    affine: Option<[[f64; 2]; 2]>,
    /// Slice output extent (the closeness radius stays `b_max`).
    #[serde(default = "default_slice_b_max")]
    slice_b_max: f64,
    #[serde(default)]
    direction: Option<ComplexVec>,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_b_max")]
    b_max: f64,
    #[serde(default = "default_grid_step")]
    grid_step: f64,
    #[serde(default = "default_repeats")]
    repeats: usize,
    #[serde(default = "default_max_rounds")]
    max_rounds: usize,
    #[serde(default = "default_repeats")]
    keep_last: usize,
    #[serde(default)]
    overlaps: Option<Vec<f64>>,
    #[serde(default)]
    sweep_samples: Option<usize>,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_slice_b_max() -> f64 {
    0.5
}
fn default_epsilon() -> f64 {
    0.24
}
fn default_delta() -> f64 {
    1.0 / 3.0
}
fn default_b_max() -> f64 {
    0.3
}
fn default_grid_step() -> f64 {
    0.01
}
fn default_repeats() -> usize {
    25
}
fn default_max_rounds() -> usize {
    35
}

/// Loads records from CSV (with r_eff from the metadata sidecar) or
/// simulates them inline.
fn load_or_simulate(
    cfg: &ReconstructConfig,
    seed: u64,
    hashes: &mut Vec<io::FileHash>,
) -> displace_learn::Result<(RecordBatch, f64)> {
    match &cfg.records_csv {
        Some(path) => {
            let path = Path::new(path);
            hashes.push(io::FileHash {
                path: path.display().to_string(),
                sha256: io::sha256_hex(path)?,
            });
            let batch = io::read_records_csv(path)?;
            let meta_path = path.with_extension("meta.json");
            let r_eff = if meta_path.exists() {
                hashes.push(io::FileHash {
                    path: meta_path.display().to_string(),
                    sha256: io::sha256_hex(&meta_path)?,
                });
                let meta: io::RunMetadata = io::read_json(&meta_path)?;
                meta.r_eff
            } else {
                SqueezingSpec::new(cfg.squeezing_db, cfg.transmissivity)?.effective_squeezing()
            };
            Ok((batch, r_eff))
        }
        None => {
            let process = cfg
                .process
                .as_ref()
                .ok_or_else(|| Error::invalid("missing process spec for inline simulation"))?;
            let count = cfg
                .records
                .ok_or_else(|| Error::invalid("missing record count for inline simulation"))?;
            let squeezing = SqueezingSpec::new(cfg.squeezing_db, cfg.transmissivity)?;
            let drift = DriftModel::new(cfg.drift, cfg.noise_scale)?;
            let batch = simulate_bell_batch(process, &squeezing, &drift, count, seed)?;
            Ok((batch, squeezing.effective_squeezing()))
        }
    }
}

fn cmd_reconstruct(
    cli: &Cli,
    mut config: serde_json::Value,
    mut input_hashes: Vec<io::FileHash>,
) -> displace_learn::Result<()> {
    let seed = ensure_seed(&mut config)?;
    let cfg: ReconstructConfig = parse_config(config.clone())?;
    let recon = ReconSpec {
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        b_max: cfg.b_max,
        grid_step: cfg.grid_step,
        repeats: cfg.repeats,
        max_rounds: cfg.max_rounds,
        keep_last: cfg.keep_last,
    };
    let (batch, r_eff) = load_or_simulate(&cfg, seed, &mut input_hashes)?;
    let affine = cfg.affine.unwrap_or_else(identity);
    let mut outputs = Vec::new();
    match cfg.mode {
        ReconMode::Slice => {
            let direction = match (&cfg.direction, &cfg.process) {
                (Some(d), _) => d.clone(),
                (None, Some(p)) => peak_direction(p, cfg.b_max)?,
                (None, None) => {
                    return Err(Error::invalid(
                        "slice needs a direction or a three-peak truth spec",
                    ))
                }
            };
            let grid: Vec<f64> = {
                let steps = (cfg.slice_b_max / cfg.grid_step).round() as usize;
                (0..=steps).map(|i| i as f64 * cfg.grid_step).collect()
            };
            let slice = reconstruct_slice(&batch, &direction, &grid, r_eff, &affine)?;
            io::write_slice_csv(&cli.out.join("slice.csv"), &slice)?;
            outputs.push("slice.csv".into());
            if let Some(process) = &cfg.process {
                let truth: Vec<Complex64> = grid
                    .iter()
                    .map(|&b| process.char_fn(&direction.scale(Complex64::new(b, 0.0))))
                    .collect::<displace_learn::Result<_>>()?;
                let rows: Vec<(f64, Complex64)> = grid.iter().copied().zip(truth).collect();
                io::write_slice_csv(&cli.out.join("truth.csv"), &rows)?;
                outputs.push("truth.csv".into());
            }
        }
        ReconMode::Complexity => {
            let process = cfg
                .process
                .as_ref()
                .ok_or_else(|| Error::invalid("complexity mode needs the truth process"))?;
            let estimate = sample_complexity_recon(&batch, &recon, process, r_eff, seed)?;
            let delta_n = complexity_uncertainty(&estimate.trail, batch.len()).ok();
            let report = serde_json::json!({
                "mean_n": estimate.mean_n,
                "std_n": estimate.std_n,
                "delta_n": delta_n,
                "trail": estimate.trail,
                "pool_exhausted": estimate.pool_exhausted,
                "pool_records": batch.len(),
                "r_eff": r_eff,
                "spec": recon,
                "seed": seed,
            });
            io::write_json(&cli.out.join("complexity.json"), &report)?;
            outputs.push("complexity.json".into());
            if estimate.pool_exhausted {
                eprintln!(
                    "warning: resample size exceeded the pool; resampling with replacement proceeded"
                );
            }
            println!(
                "mean_N = {:.4e} (std {:.3e})",
                estimate.mean_n, estimate.std_n
            );
        }
        ReconMode::Sweep => {
            let process = cfg
                .process
                .as_ref()
                .ok_or_else(|| Error::invalid("sweep mode needs the truth process"))?;
            let overlaps = cfg
                .overlaps
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95]);
            let n_samples = cfg
                .sweep_samples
                .ok_or_else(|| Error::invalid("sweep mode needs sweep_samples"))?;
            let sweep =
                direction_sweep(&batch, process, &overlaps, n_samples, &recon, r_eff, seed)?;
            io::write_sweep_csv(&cli.out.join("sweep.csv"), &sweep)?;
            outputs.push("sweep.csv".into());
            for p in &sweep {
                println!(
                    "overlap {:.2}: success {:.3} ± {:.3}",
                    p.overlap, p.success, p.stderr
                );
            }
        }
    }
    write_manifest(cli, "reconstruct", seed, &config, input_hashes, outputs)
}

// --- hypotest ------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum HypoMode {
    Score,
    Complexity,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypotestConfig {
    n: usize,
    #[serde(default = "default_k")]
    k_processes: usize,
    #[serde(default = "default_kappa")]
    kappa: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    #[serde(default = "default_epsilon0")]
    epsilon0: f64,
    #[serde(default = "default_epsilon0")]
    threshold: f64,
    #[serde(default)]
    statistic: Statistic,
    #[serde(default = "default_true")]
    balanced: bool,
    pool_records: usize,
    #[serde(default)]
    n_samples: Option<usize>,
    #[serde(default = "default_repeats")]
    repeats: usize,
    mode: HypoMode,
    #[serde(default = "default_p_target")]
    p_target: f64,
    #[serde(default = "default_max_rounds")]
    max_rounds: usize,
    #[serde(default = "default_repeats")]
    keep_last: usize,
    #[serde(default)]
    squeezing_db: f64,
    #[serde(default = "one")]
    transmissivity: f64,
    /// Omit the sealed hidden-type section from the transcript.
    #[serde(default)]
    blind: bool,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_k() -> usize {
    16
}
fn default_kappa() -> f64 {
    0.2
}
fn default_sigma() -> f64 {
    0.3
}
fn default_epsilon0() -> f64 {
    0.25
}
fn default_true() -> bool {
    true
}
fn default_p_target() -> f64 {
    2.0 / 3.0
}

fn cmd_hypotest(
    cli: &Cli,
    mut config: serde_json::Value,
    input_hashes: Vec<io::FileHash>,
) -> displace_learn::Result<()> {
    let seed = ensure_seed(&mut config)?;
    let cfg: HypotestConfig = parse_config(config.clone())?;
    let spec = GameSpec {
        k_processes: cfg.k_processes,
        n: cfg.n,
        kappa: cfg.kappa,
        sigma: cfg.sigma,
        epsilon0: cfg.epsilon0,
        threshold: cfg.threshold,
        n_samples: cfg.n_samples.unwrap_or(0),
        balanced: cfg.balanced,
        statistic: cfg.statistic,
    };
    let squeezing = SqueezingSpec::new(cfg.squeezing_db, cfg.transmissivity)?;
    let r_eff = squeezing.effective_squeezing();
    let instance = deal(&spec, seed)?;
    let pools = GamePools::simulate(
        &instance,
        &squeezing,
        &DriftModel::identity(),
        cfg.pool_records,
        seed,
    )?;
    let mut outputs = Vec::new();
    match cfg.mode {
        HypoMode::Score => {
            let n_samples = cfg
                .n_samples
                .ok_or_else(|| Error::invalid("score mode needs n_samples"))?;
            let score = success_probability(
                &instance, &pools, n_samples, cfg.repeats, &spec, r_eff, seed,
            )?;
            let transcript = io::GameTranscript {
                spec: spec.clone(),
                gammas: (0..instance.k())
                    .map(|m| instance.gamma(m).clone())
                    .collect(),
                n_samples,
                per_process: score.per_process.clone(),
                p_bar: score.p_bar,
                delta_p: score.delta_p,
                raw_success: score.raw_success,
                sealed_types: (!cfg.blind).then(|| instance.reveal_types().to_vec()),
            };
            io::write_json(&cli.out.join("transcript.json"), &transcript)?;
            outputs.push("transcript.json".into());
            let n_c = equivalent_classical_n(
                score.p_bar.max(0.5),
                cfg.epsilon0,
                cfg.kappa,
                cfg.sigma,
                cfg.n as u64,
            )?;
            let p_c = classical_success_bound(
                n_samples as f64,
                cfg.epsilon0,
                cfg.kappa,
                cfg.sigma,
                cfg.n as u64,
            )?;
            let summary = format!(
                "n,n_samples,p_bar,delta_p,raw_success,n_classical,p_classical\n{},{},{},{},{},{},{}\n",
                cfg.n,
                n_samples,
                score.p_bar,
                score.delta_p.map_or(String::new(), |d| d.to_string()),
                score.raw_success,
                n_c.value,
                p_c.p,
            );
            std::fs::write(cli.out.join("summary.csv"), &summary)?;
            outputs.push("summary.csv".into());
            println!(
                "P = {:.4} ± {} over {} processes (raw {:.4}); equivalent classical N = {:.3e}",
                score.p_bar,
                score.delta_p.map_or("n/a".into(), |d| format!("{d:.4}")),
                instance.k(),
                score.raw_success,
                n_c.value
            );
        }
        HypoMode::Complexity => {
            let walk = HypoWalk {
                repeats: cfg.repeats,
                max_rounds: cfg.max_rounds,
                keep_last: cfg.keep_last,
            };
            let estimate = sample_complexity_hypo(
                &instance, &pools, &spec, &walk, cfg.p_target, r_eff, seed,
            )?;
            let delta_n = complexity_uncertainty(&estimate.trail, cfg.pool_records).ok();
            let report = serde_json::json!({
                "mean_n": estimate.mean_n,
                "std_n": estimate.std_n,
                "delta_n": delta_n,
                "trail": estimate.trail,
                "pool_exhausted": estimate.pool_exhausted,
                "p_target": cfg.p_target,
                "r_eff": r_eff,
                "spec": spec,
                "walk": walk,
                "seed": seed,
            });
            io::write_json(&cli.out.join("complexity.json"), &report)?;
            outputs.push("complexity.json".into());
            println!(
                "mean_N = {:.4} (std {:.3})",
                estimate.mean_n, estimate.std_n
            );
        }
    }
    write_manifest(cli, "hypotest", seed, &config, input_hashes, outputs)
}

// --- bounds --------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsConfig {
    n: Vec<u64>,
    #[serde(default = "default_kappas")]
    kappa: Vec<f64>,
    #[serde(default = "default_dbs")]
    squeezing_db: Vec<f64>,
    #[serde(default = "one")]
    transmissivity: f64,
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_epsilon0")]
    epsilon0: f64,
    #[serde(default = "default_sigma")]
    sigma: f64,
    /// Multi-time factor: lower bounds use mn total modes.
    #[serde(default = "default_m")]
    m: u64,
    #[serde(default)]
    p_suc: Option<f64>,
    #[serde(default)]
    n_samples: Option<f64>,
    #[serde(default = "default_rate")]
    mode_rate_hz: f64,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_kappas() -> Vec<f64> {
    vec![0.2]
}
fn default_dbs() -> Vec<f64> {
    vec![0.0, 4.78]
}
fn default_m() -> u64 {
    1
}
fn default_rate() -> f64 {
    1e6
}

fn cmd_bounds(
    cli: &Cli,
    mut config: serde_json::Value,
    input_hashes: Vec<io::FileHash>,
) -> displace_learn::Result<()> {
    let seed = ensure_seed(&mut config)?;
    let cfg: BoundsConfig = parse_config(config.clone())?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &kappa in &cfg.kappa {
            for &db in &cfg.squeezing_db {
                let squeezing = SqueezingSpec::new(db, cfg.transmissivity)?;
                let r_eff = squeezing.effective_squeezing();
                let beta_sq = kappa * n as f64;
                let hoeffding = hoeffding_upper(r_eff, beta_sq, cfg.epsilon, cfg.delta)?;
                let narrow = classical_lower(cfg.m, n, kappa, cfg.epsilon, 0.0)?;
                let wide = classical_lower(cfg.m, n, kappa, cfg.epsilon, cfg.sigma)?;
                let n_c = cfg
                    .p_suc
                    .map(|p| equivalent_classical_n(p, cfg.epsilon0, kappa, cfg.sigma, n))
                    .transpose()?;
                let p_c = cfg
                    .n_samples
                    .map(|ns| classical_success_bound(ns, cfg.epsilon0, kappa, cfg.sigma, n))
                    .transpose()?;
                let acq = n_c
                    .as_ref()
                    .map(|nc| acquisition_time(nc.value, n, cfg.mode_rate_hz))
                    .transpose()?;
                rows.push(serde_json::json!({
                    "n": n,
                    "kappa": kappa,
                    "squeezing_db": db,
                    "r_eff": r_eff,
                    "hoeffding_n": hoeffding.value,
                    "hoeffding_log10": hoeffding.log10,
                    "lower_narrow": narrow.bound.value,
                    "lower_narrow_log10": narrow.bound.log10,
                    "lower_wide": wide.bound.value,
                    "lower_wide_log10": wide.bound.log10,
                    "wide_hypothesis_ok": wide.hypothesis_ok,
                    "n_classical": n_c.as_ref().map(|b| b.value),
                    "p_classical": p_c.as_ref().map(|b| b.p),
                    "p_classical_excess": p_c.as_ref().map(|b| b.excess),
                    "acq_seconds": acq,
                    "acq_human": acq.map(format_duration),
                }));
            }
        }
    }
    let header = [
        "n",
        "kappa",
        "squeezing_db",
        "r_eff",
        "hoeffding_n",
        "lower_narrow",
        "lower_wide",
        "wide_hypothesis_ok",
        "n_classical",
        "p_classical",
        "acq_seconds",
        "acq_human",
    ];
    let mut table = String::new();
    match cli.format {
        OutFormat::Json => {
            table = serde_json::to_string_pretty(&rows)? + "\n";
        }
        OutFormat::Csv | OutFormat::Text => {
            let sep = if matches!(cli.format, OutFormat::Csv) {
                ","
            } else {
                "\t"
            };
            table.push_str(&header.join(sep));
            table.push('\n');
            for row in &rows {
                let cells: Vec<String> = header
                    .iter()
                    .map(|key| match &row[*key] {
                        serde_json::Value::Null => String::new(),
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                table.push_str(&cells.join(sep));
                table.push('\n');
            }
        }
    }
    print!("{table}");
    std::fs::write(cli.out.join("bounds.csv"), &table)?;
    io::write_json(&cli.out.join("bounds.json"), &rows)?;
    write_manifest(
        cli,
        "bounds",
        seed,
        &config,
        input_hashes,
        vec!["bounds.csv".into(), "bounds.json".into()],
    )
}

// --- trace ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum TraceAction {
    Synth,
    Extract,
    Delay,
    Crosstalk,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceConfig {
    action: TraceAction,
    /// Commanded displacement per mode (synth).
    #[serde(default)]
    displacements: Option<ComplexVec>,
    #[serde(default = "default_which")]
    which: Quadrature,
    #[serde(default)]
    noise_std: f64,
    #[serde(default)]
    delay_s: f64,
    #[serde(default = "identity")]
    crosstalk: [[f64; 2]; 2],
    #[serde(default = "default_fs")]
    sample_rate_hz: f64,
    #[serde(default = "default_sideband")]
    sideband_hz: f64,
    #[serde(default = "default_kappa_rad")]
    envelope_kappa_rad_s: f64,
    #[serde(default = "default_tau")]
    mode_duration_s: f64,
    #[serde(default)]
    trace_in: Option<String>,
    /// Unit calibration for extraction; when absent and `calibrate_vacuum`
    /// is set, it is measured from the trace itself.
    #[serde(default)]
    vacuum_scale: Option<f64>,
    #[serde(default)]
    calibrate_vacuum: bool,
    /// Crosstalk sweep amplitudes.
    #[serde(default)]
    amplitudes: Option<Vec<f64>>,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_which() -> Quadrature {
    Quadrature::X
}
fn default_fs() -> f64 {
    displace_learn::trace::DEFAULT_SAMPLE_RATE_HZ
}
fn default_sideband() -> f64 {
    3.8e6
}
fn default_kappa_rad() -> f64 {
    2.0 * std::f64::consts::PI * 1e6
}
fn default_tau() -> f64 {
    1e-6
}

fn cmd_trace(
    cli: &Cli,
    mut config: serde_json::Value,
    mut input_hashes: Vec<io::FileHash>,
) -> displace_learn::Result<()> {
    let seed = ensure_seed(&mut config)?;
    let cfg: TraceConfig = parse_config(config.clone())?;
    let spec = ModeFunctionSpec {
        sideband_hz: cfg.sideband_hz,
        envelope_kappa_rad_s: cfg.envelope_kappa_rad_s,
        mode_duration_s: cfg.mode_duration_s,
    };
    let mut outputs = Vec::new();
    let load_trace = |hashes: &mut Vec<io::FileHash>| -> displace_learn::Result<TimeTrace> {
        let path = cfg
            .trace_in
            .as_ref()
            .ok_or_else(|| Error::invalid("this action needs trace_in"))?;
        let path = Path::new(path);
        hashes.push(io::FileHash {
            path: path.display().to_string(),
            sha256: io::sha256_hex(path)?,
        });
        io::read_trace(path)
    };
    match cfg.action {
        TraceAction::Synth => {
            let displacements = cfg
                .displacements
                .as_ref()
                .ok_or_else(|| Error::invalid("synth needs displacements"))?;
            let trace = synth_trace(
                displacements.as_slice(),
                cfg.which,
                &spec,
                cfg.noise_std,
                cfg.delay_s,
                &cfg.crosstalk,
                cfg.sample_rate_hz,
                seed,
            )?;
            io::write_trace(&cli.out.join("trace.bin"), &trace)?;
            outputs.push("trace.bin".into());
            let q =
                extract_quadratures(&trace, &spec, cfg.delay_s, cfg.vacuum_scale.unwrap_or(1.0))?;
            io::write_quadratures_csv(&cli.out.join("quadratures.csv"), &q)?;
            outputs.push("quadratures.csv".into());
            println!(
                "synthesized {} samples, extracted {} quadratures",
                trace.samples.len(),
                q.len()
            );
        }
        TraceAction::Extract => {
            let trace = load_trace(&mut input_hashes)?;
            let scale = match (cfg.vacuum_scale, cfg.calibrate_vacuum) {
                (Some(s), _) => s,
                (None, true) => calibrate_vacuum_scale(&trace, &spec, cfg.delay_s)?,
                (None, false) => 1.0,
            };
            let q = extract_quadratures(&trace, &spec, cfg.delay_s, scale)?;
            if q.is_empty() {
                eprintln!("warning: trace shorter than one mode window; no quadratures");
            }
            io::write_quadratures_csv(&cli.out.join("quadratures.csv"), &q)?;
            outputs.push("quadratures.csv".into());
            println!("extracted {} quadratures (vacuum_scale {scale})", q.len());
        }
        TraceAction::Delay => {
            let trace = load_trace(&mut input_hashes)?;
            let delay = estimate_delay(&trace, &spec)?;
            io::write_json(
                &cli.out.join("delay.json"),
                &serde_json::json!({ "delay_s": delay }),
            )?;
            outputs.push("delay.json".into());
            println!("delay = {delay:.3e} s");
        }
        TraceAction::Crosstalk => {
            let amplitudes = cfg
                .amplitudes
                .clone()
                .unwrap_or_else(|| (-9i32..=9).step_by(2).map(f64::from).collect());
            let sweep = synth_crosstalk_sweep(&cfg.crosstalk, &amplitudes, cfg.noise_std, seed);
            let measured = calibrate_crosstalk(&sweep)?;
            let correction = displace_learn::measurement::invert2(&measured)?;
            io::write_json(
                &cli.out.join("crosstalk.json"),
                &serde_json::json!({"measured": measured, "correction": correction}),
            )?;
            outputs.push("crosstalk.json".into());
            println!("measured crosstalk {measured:?}");
        }
    }
    write_manifest(cli, "trace", seed, &config, input_hashes, outputs)
}
