//! Command-line front end for the perfect sampler.

use std::io::Write as IoWrite;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

use pssim::assign::{finite_horizon_sample, perfect_sample, perfect_sample_capped};
use pssim::config::{ModelConfig, RunConfig};
use pssim::coupling::{decode_pair, estimate_dbar};
use pssim::diagnostics::{critical_beta, BoundsReport};
use pssim::models::kernel::Kernel;
use pssim::oracle::enumeration::EnumModel;
use pssim::oracle::transfer::TransferMatrix1D;
use pssim::sketch::ancestor_statistics;
use pssim::{RangeDecomposition, PssimError, Site, SparseConfiguration, SpinValue};

#[derive(Parser)]
#[command(name = "pssim", about = "Perfect sampling for interacting particle systems", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw replicas and emit one JSON line per replica.
    Sample {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output path from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the decomposition ladder and the rigorous bounds.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the stationary disagreement density of a coupled pair.
    Dbar {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a self-check suite against the independent oracles.
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// One of: ladder, law, bounds.
        #[arg(long)]
        suite: String,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}

fn exit_code(e: &PssimError) -> i32 {
    match e {
        PssimError::Config(_)
        | PssimError::Unsupported(_)
        | PssimError::OutsideStateSpace { .. }
        | PssimError::Json(_)
        | PssimError::MissingInitial(_) => 2,
        PssimError::Supercritical { .. } => 3,
        PssimError::InternalConsistency(_)
        | PssimError::DominationViolated { .. }
        | PssimError::Unspecified(_) => 4,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<i32, PssimError> {
    match cli.command {
        Command::Sample { config, seed, out } => cmd_sample(&config, seed, out),
        Command::Diagnose { config, out } => cmd_diagnose(&config, out),
        Command::Dbar { config, seed, out } => cmd_dbar(&config, seed, out),
        Command::Validate { config, suite } => cmd_validate(&config, &suite),
    }
}

fn num_threads() -> usize {
    std::env::var("PSSIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn write_output(out: Option<PathBuf>, cfg_path: &Option<String>, text: &str) -> Result<(), PssimError> {
    match out.or_else(|| cfg_path.clone().map(PathBuf::from)) {
        Some(path) => {
            std::fs::write(path, text)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// One replica worked into its output line. Streams are derived from the
/// seed and the replica index, so the result is independent of threading.
fn replica_line(
    cfg: &RunConfig,
    decomp: &RangeDecomposition,
    query: &[Site],
    seed: u64,
    replica: u64,
) -> Result<String, PssimError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(2 * replica);
    let result = if let Some(horizon) = cfg.sampler.horizon {
        let mut time_rng = ChaCha12Rng::seed_from_u64(seed);
        time_rng.set_stream(2 * replica + 1);
        let initial = cfg.sampler.initial.as_ref().unwrap();
        finite_horizon_sample(query, horizon, initial, decomp, &mut rng, &mut time_rng)?
    } else if let Some(cap) = cfg.sampler.step_cap {
        perfect_sample_capped(query, decomp, &mut rng, cap)?
    } else {
        perfect_sample(query, decomp, &mut rng)?
    };
    let value = if cfg.is_pair() {
        let mut lower = serde_json::Map::new();
        let mut upper = serde_json::Map::new();
        for (site, v) in &result.spins {
            let (lo, up) = decode_pair(*v);
            lower.insert(site.key(), json!(lo));
            upper.insert(site.key(), json!(up));
        }
        json!({
            "replica": replica,
            "n_stop": result.n_stop,
            "truncated": result.truncated,
            "lower": lower,
            "upper": upper,
        })
    } else {
        let sites: serde_json::Map<String, serde_json::Value> = result
            .spins
            .iter()
            .map(|(s, v)| (s.key(), json!(v)))
            .collect();
        json!({
            "replica": replica,
            "n_stop": result.n_stop,
            "truncated": result.truncated,
            "sites": sites,
        })
    };
    Ok(value.to_string())
}

fn cmd_sample(path: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<i32, PssimError> {
    let cfg = RunConfig::from_path(path)?;
    let seed = seed.unwrap_or(cfg.sampler.seed);
    let decomp = Arc::new(cfg.build_decomposition()?);
    // fail fast on supercritical decompositions when running to extinction
    if cfg.sampler.step_cap.is_none() && cfg.sampler.horizon.map_or(true, |h| !h.is_finite()) {
        let c = decomp.criticality()?;
        if !c.is_subcritical() {
            return Err(PssimError::Supercritical { gamma: c.gamma() });
        }
    }
    let query = cfg.query();
    let replicas = cfg.sampler.replicas;
    let threads = num_threads().min(replicas as usize).max(1);
    let mut lines: Vec<Option<String>> = vec![None; replicas as usize];
    let errors = std::sync::Mutex::new(Vec::<PssimError>::new());
    std::thread::scope(|scope| {
        let mut chunks: Vec<&mut [Option<String>]> = Vec::new();
        let per = (replicas as usize).div_ceil(threads);
        let mut rest = &mut lines[..];
        while !rest.is_empty() {
            let take = per.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            chunks.push(head);
            rest = tail;
        }
        for (ci, chunk) in chunks.into_iter().enumerate() {
            let decomp = Arc::clone(&decomp);
            let cfg = &cfg;
            let query = &query;
            let errors = &errors;
            scope.spawn(move || {
                let base = ci * per;
                for (off, slot) in chunk.iter_mut().enumerate() {
                    let r = (base + off) as u64;
                    match replica_line(cfg, &decomp, query, seed, r) {
                        Ok(line) => *slot = Some(line),
                        Err(e) => {
                            errors.lock().unwrap().push(e);
                            return;
                        }
                    }
                }
            });
        }
    });
    if let Some(e) = errors.into_inner().unwrap().into_iter().next() {
        return Err(e);
    }
    let mut text = String::new();
    let mut n_stop_sum = 0.0;
    let mut truncated = 0u64;
    for line in lines.iter().flatten() {
        text.push_str(line);
        text.push('\n');
        let v: serde_json::Value = serde_json::from_str(line)?;
        n_stop_sum += v["n_stop"].as_u64().unwrap_or(0) as f64;
        if v["truncated"].as_bool() == Some(true) {
            truncated += 1;
        }
    }
    write_output(out, &cfg.output.path, &text)?;
    eprintln!(
        "replicas: {replicas}  mean n_stop: {:.3}  truncated: {truncated}",
        n_stop_sum / replicas as f64
    );
    Ok(0)
}

fn cmd_diagnose(path: &PathBuf, out: Option<PathBuf>) -> Result<i32, PssimError> {
    let cfg = RunConfig::from_path(path)?;
    let decomp = cfg.build_decomposition()?;
    let bounds = BoundsReport::compute(&decomp)?;
    let k_show = decomp.max_range().min(16);
    let mut ladders = Vec::new();
    for orbit in 0..decomp.model().num_orbits() {
        let rows: Vec<serde_json::Value> = decomp
            .ladder_rows(orbit, k_show)?
            .into_iter()
            .map(|r| {
                json!({
                    "k": r.k,
                    "alpha": r.alpha,
                    "lambda": r.lambda,
                    "ball_volume": r.ball_volume,
                    "gamma_term": r.gamma_term,
                })
            })
            .collect();
        ladders.push(json!({"orbit": orbit, "rows": rows}));
    }
    let beta_c = match &cfg.model {
        ModelConfig::Ising {
            dimension, kernel, ..
        } => Kernel::new(*dimension, kernel.clone())
            .ok()
            .and_then(|k| critical_beta(&k).ok()),
        ModelConfig::Pair {
            dimension,
            upper_kernel,
            ..
        } => Kernel::new(*dimension, upper_kernel.clone())
            .ok()
            .and_then(|k| critical_beta(&k).ok()),
        _ => None,
    };
    let window = cfg.sampler.sites.len();
    let nstop_tail: Vec<serde_json::Value> = [5u64, 10, 20, 40]
        .iter()
        .map(|&n| json!({"n": n, "bound": bounds.nstop_tail(window, n)}))
        .collect();
    let convergence: Vec<serde_json::Value> = [0.5f64, 1.0, 2.0, 4.0]
        .iter()
        .map(|&t| json!({"t": t, "bound": bounds.convergence(window, t)}))
        .collect();
    let report = json!({
        "gamma": bounds.gamma,
        "subcritical": bounds.subcritical,
        "mass_min": bounds.mass_min,
        "mass_max": bounds.mass_max,
        "critical_beta": beta_c,
        "nstop_tail": nstop_tail,
        "convergence": convergence,
        "ladders": ladders,
    });
    write_output(out, &cfg.output.path, &(report.to_string() + "\n"))?;
    Ok(0)
}

fn cmd_dbar(path: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<i32, PssimError> {
    let cfg = RunConfig::from_path(path)?;
    if !cfg.is_pair() {
        return Err(PssimError::Config(
            "dbar needs a pair model configuration".into(),
        ));
    }
    let seed = seed.unwrap_or(cfg.sampler.seed);
    let decomp = cfg.build_decomposition()?;
    let query = cfg.query();
    let est = estimate_dbar(&query, &decomp, cfg.sampler.replicas, seed)?;
    let per_site: Vec<serde_json::Value> = est
        .per_site
        .iter()
        .map(|(s, (p, se))| json!({"site": s.key(), "freq": p, "se": se}))
        .collect();
    let report = json!({
        "replicas": est.replicas,
        "sup_disagreement": est.sup,
        "mean_lower": est.mean_lower,
        "mean_upper": est.mean_upper,
        "order_violations": est.order_violations,
        "per_site": per_site,
    });
    write_output(out, &cfg.output.path, &(report.to_string() + "\n"))?;
    Ok(0)
}

struct Suite {
    failures: u32,
}

impl Suite {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        if ok {
            println!("PASS {name}: {detail}");
        } else {
            println!("FAIL {name}: {detail}");
            self.failures += 1;
        }
    }
}

fn cmd_validate(path: &PathBuf, suite: &str) -> Result<i32, PssimError> {
    let cfg = RunConfig::from_path(path)?;
    let decomp = cfg.build_decomposition()?;
    let mut s = Suite { failures: 0 };
    match suite {
        "ladder" => validate_ladder(&cfg, &decomp, &mut s)?,
        "law" => validate_law(&cfg, &decomp, &mut s)?,
        "bounds" => validate_bounds(&cfg, &decomp, &mut s)?,
        other => {
            return Err(PssimError::Config(format!(
                "unknown suite '{other}' (expected ladder, law or bounds)"
            )))
        }
    }
    Ok(if s.failures == 0 { 0 } else { 1 })
}

/// Compare the engine ladder against brute-force enumeration, and the
/// reconstructed rate against the raw rate, over every boundary condition.
fn validate_ladder(
    cfg: &RunConfig,
    decomp: &RangeDecomposition,
    s: &mut Suite,
) -> Result<(), PssimError> {
    let (dimension, beta, kernel_spec, field) = match &cfg.model {
        ModelConfig::Ising {
            dimension,
            beta,
            kernel,
            field,
            state,
        } => {
            if state.is_some() {
                return Err(PssimError::Unsupported(
                    "the ladder suite covers the default two-spin alphabet".into(),
                ));
            }
            (*dimension, *beta, kernel.clone(), field.clone())
        }
        _ => {
            return Err(PssimError::Unsupported(
                "the ladder suite needs a finite-alphabet model".into(),
            ))
        }
    };
    let kernel = Kernel::new(dimension, kernel_spec)?;
    let l = kernel.range().ok_or_else(|| {
        PssimError::Unsupported("the ladder suite needs a truncated kernel".into())
    })?;
    let origin = Site::origin(dimension);
    let couplings: Vec<(Vec<i64>, f64)> = kernel
        .support_sites(&origin)?
        .iter()
        .map(|site| (origin.offset_to(site), kernel.eval(&origin, site)))
        .collect();
    let oracle = EnumModel {
        beta,
        couplings: couplings.clone(),
        field: field.orbit_value(0),
        values: vec![-1.0, 1.0],
        weights: vec![1.0, 1.0],
    };
    let oracle_alphas = oracle.ladder(l)?;
    let mut worst = 0.0f64;
    for (idx, want) in oracle_alphas.iter().enumerate() {
        let got = decomp.alpha(0, idx as i64 - 1)?;
        worst = worst.max((got - want).abs());
    }
    s.check("ladder-vs-enumeration", worst < 1e-9, format!("max |diff| = {worst:.3e}"));

    // reconstruction identity over every boundary configuration
    let mut worst = 0.0f64;
    let support = kernel.support_sites(&origin)?;
    let combos = 2usize.pow(support.len() as u32);
    for idx in 0..combos {
        let mut eta = SparseConfiguration::all_cemetery();
        eta.set(origin.clone(), SpinValue::Real(1.0));
        let mut boundary = Vec::new();
        for (bit, site) in support.iter().enumerate() {
            let v = if (idx >> bit) & 1 == 0 { -1.0 } else { 1.0 };
            eta.set(site.clone(), SpinValue::Real(v));
            boundary.push(v);
        }
        for a in [-1.0, 1.0] {
            let want = oracle.rate(a, &boundary);
            let got = decomp.reconstruct_rate(&origin, &SpinValue::Real(a), &eta)?;
            worst = worst.max((got - want).abs());
        }
    }
    s.check("rate-reconstruction", worst < 1e-9, format!("max |diff| = {worst:.3e}"));
    Ok(())
}

/// Compare perfect-sampler moments against the transfer matrix (1-d
/// nearest-neighbor two-spin models only).
fn validate_law(
    cfg: &RunConfig,
    decomp: &RangeDecomposition,
    s: &mut Suite,
) -> Result<(), PssimError> {
    let (beta, h) = match &cfg.model {
        ModelConfig::Ising {
            dimension: 1,
            beta,
            kernel: pssim::models::kernel::KernelSpec::Nn { value },
            field,
            state: None,
        } if (*value - 1.0).abs() < 1e-12 => (*beta, field.orbit_value(0)),
        _ => {
            return Err(PssimError::Unsupported(
                "the law suite needs the 1-d nearest-neighbor two-spin model".into(),
            ))
        }
    };
    let tm = TransferMatrix1D::new(beta, h);
    let query = [Site::at(0), Site::at(1)];
    let n = cfg.sampler.replicas.max(1000);
    let mut mags = Vec::with_capacity(n as usize);
    let mut corrs = Vec::with_capacity(n as usize);
    for r in 0..n {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.sampler.seed);
        rng.set_stream(2 * r);
        let res = perfect_sample(&query, decomp, &mut rng)?;
        let a = res.spins[&Site::at(0)];
        let b = res.spins[&Site::at(1)];
        mags.push(a);
        corrs.push(a * b);
    }
    let (m, m_se) = (pssim::stats::mean(&mags), pssim::stats::stderr_mean(&mags));
    let (c, c_se) = (pssim::stats::mean(&corrs), pssim::stats::stderr_mean(&corrs));
    let dm = (m - tm.magnetization()).abs();
    let dc = (c - tm.adjacent_correlation()).abs();
    s.check(
        "magnetization",
        dm <= 4.0 * m_se.max(1e-9),
        format!("|{m:.5} - {:.5}| = {dm:.5} (se {m_se:.5})", tm.magnetization()),
    );
    s.check(
        "adjacent-correlation",
        dc <= 4.0 * c_se.max(1e-9),
        format!(
            "|{c:.5} - {:.5}| = {dc:.5} (se {c_se:.5})",
            tm.adjacent_correlation()
        ),
    );
    Ok(())
}

/// Check the Monte-Carlo ancestor statistics against the rigorous bounds.
fn validate_bounds(
    cfg: &RunConfig,
    decomp: &RangeDecomposition,
    s: &mut Suite,
) -> Result<(), PssimError> {
    let bounds = BoundsReport::compute(decomp)?;
    if !bounds.subcritical {
        return Err(PssimError::Supercritical { gamma: bounds.gamma });
    }
    let query = cfg.query();
    let horizons = [0.5, 1.0, 2.0];
    let reps = cfg.sampler.replicas.max(1000);
    let stats = ancestor_statistics(&query, decomp, &horizons, reps, cfg.sampler.seed)?;
    for (i, &t) in horizons.iter().enumerate() {
        let bound = bounds.ancestor_decay(query.len(), t);
        let ok = stats.mean_size[i] <= bound + 3.0 * stats.se_size[i];
        s.check(
            &format!("ancestor-decay-t{t}"),
            ok,
            format!("mean {:.4} <= bound {:.4}", stats.mean_size[i], bound),
        );
    }
    for n in [5u64, 10, 20] {
        let emp = stats.survival(n);
        let bound = bounds.nstop_tail(query.len(), n);
        let se = pssim::stats::binomial_se(emp, stats.n_stops.len());
        s.check(
            &format!("nstop-tail-n{n}"),
            emp <= bound + 3.0 * se,
            format!("empirical {emp:.4} <= bound {bound:.4}"),
        );
    }
    Ok(())
}
