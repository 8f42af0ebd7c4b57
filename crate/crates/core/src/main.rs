//! Command-line entry point: config → sieve → witness → validation → reports.

use anyhow::Context;
use clap::{Parser, Subcommand};
use fracsieve::config::{ConfigError, RunConfig};
use fracsieve::params::ParamsError;
use fracsieve::report::{
    write_json, write_scores_csv, write_stats_csv, CertificateDoc, DeltaRow,
    ManifestBuilder, ParamsReportDoc, ReportError, SurvivorsDoc, ValidationReportDoc,
};
use fracsieve::sequence::format_rational;
use fracsieve::sieve::{sieve_range, SieveError};
use fracsieve::validate::{
    budget_check, eggleston_estimate, lemma1_check, lemma2_report, lemma3_report,
    retention_check, sample_lemma1_triples, ValidateError,
};
use fracsieve::witness::{certify, extract_witness, WitnessError};
use fracsieve::{CMode, HMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "fracsieve",
    version,
    about = "Dyadic interval sieve: construct and certify numbers whose \
             polynomial multiples stay far from integers"
)]
struct Cli {
    /// Flat key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key (repeatable): --set n_to=5000
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory (overrides config `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); never affects outputs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// RNG seed for window choice and sampling strategies.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parameter system: c, δ table, ladder, series report.
    Params,
    /// Run the sieve over [n_from, n_to] and emit survivor stats.
    Sieve,
    /// Sieve, extract a witness, certify it, and emit the certificate.
    Witness,
    /// Re-verify a certificate (or an alpha from config keys).
    Certify {
        /// Existing certificate JSON to re-verify.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Measure the retention lemmas and the removal budget.
    Validate,
    /// Dimension-count estimate along the gap ladder.
    Dimension,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Exit codes: 0 success, 2 config, 3 empty survivors, 4 capacity,
/// 5 verdict false, 6 io, 1 internal.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 2;
        }
        if let Some(s) = cause.downcast_ref::<SieveError>() {
            return match s {
                SieveError::EmptySurvivors { .. } => 3,
                SieveError::Capacity { .. } | SieveError::LevelOverflow(_) => 4,
                _ => 1,
            };
        }
        if let Some(p) = cause.downcast_ref::<ParamsError>() {
            return match p {
                ParamsError::IndexCap { .. } => 4,
                _ => 1,
            };
        }
        if let Some(w) = cause.downcast_ref::<WitnessError>() {
            return match w {
                WitnessError::EmptySurvivors => 3,
                _ => 1,
            };
        }
        if cause.downcast_ref::<ValidateError>().is_some() {
            return 1;
        }
        if cause.downcast_ref::<ReportError>().is_some() {
            return 6;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(threads) = cli.threads {
        config.threads = threads;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if config.threads > 0 {
        // Ignore failure: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }

    match cli.command {
        Command::Params => cmd_params(&config),
        Command::Sieve => cmd_sieve(&config),
        Command::Witness => cmd_witness(&config),
        Command::Certify { certificate } => cmd_certify(&config, certificate.as_deref()),
        Command::Validate => cmd_validate(&config),
        Command::Dimension => cmd_dimension(&config),
    }
}

fn cmd_params(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let ladder = params.build_ladder(&seq, config.n_start.max(seq.n_min()), config.ladder_depth)?;
    let ladder_report = params.check_ladder(&seq, &ladder)?;
    let series = params.series_report(&seq, &ladder, params.v())?;
    let mut delta_table = Vec::new();
    let mut n = config.n_start.max(2);
    while n <= config.n_to {
        delta_table.push(DeltaRow {
            n,
            delta: params.delta(n)?.to_f64(),
            level: params.dyadic_level(&seq, n)?,
        });
        n = (n * 2).min(config.n_to);
        if n == delta_table.last().map(|r| r.n).unwrap_or(0) {
            break;
        }
    }
    let c = params.c_enclosure(params.precision());
    let doc = ParamsReportDoc {
        log_convention: "natural",
        gamma: format_rational(params.gamma()),
        c_mode: mode_name(params.c_mode()),
        c_lo: c.lo().to_f64(),
        c_hi: c.hi().to_f64(),
        inv_c: params.inv_c_enclosure(params.precision()).to_f64(),
        h_mode: h_name(params.h_mode()),
        n_start: params.n_start(),
        eps2: format_rational(params.eps2()),
        v: format_rational(params.v()),
        ladder: ladder.entries.clone(),
        ladder_report,
        series,
        delta_table,
    };
    let path = config.out_dir.join("params_report.json");
    write_json(&path, &doc)?;
    println!(
        "params: c in [{:.6}, {:.6}], ladder {:?}",
        doc.c_lo, doc.c_hi, doc.ladder
    );
    finish_manifest(config, "params", started, &[path])?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sieve(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let window = config.resolve_window(&seq, &params)?;
    let state = sieve_range(
        &seq,
        &params,
        window,
        config.n_from.max(seq.n_min()),
        config.n_to,
        config.memory_budget,
    )?;
    let stats_path = config.out_dir.join("stats.csv");
    write_stats_csv(&stats_path, state.stats())?;
    let surv_path = config.out_dir.join("survivors.json");
    write_json(&surv_path, &SurvivorsDoc::from_state(&state))?;
    println!(
        "sieve: window {}:{}, survivors at level {} with {} runs, measure {:.6e} of window",
        window.level,
        window.index,
        state.level(),
        state.survivors().run_count(),
        state.stats().last().map(|s| {
            num_traits::ToPrimitive::to_f64(&s.survivor_measure).unwrap_or(f64::NAN)
        }).unwrap_or(1.0)
    );
    finish_manifest(config, "sieve", started, &[stats_path, surv_path])?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_witness(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let window = config.resolve_window(&seq, &params)?;
    let n_from = config.n_from.max(seq.n_min());
    let sieve_started = Instant::now();
    let state = sieve_range(&seq, &params, window, n_from, config.n_to, config.memory_budget)?;
    let sieve_secs = sieve_started.elapsed().as_secs_f64();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (alpha, chain) = extract_witness(&state, config.strategy, &mut rng)?;
    let certify_started = Instant::now();
    let cert = certify(&alpha, &seq, &params, n_from, config.n_to)?;
    let certify_secs = certify_started.elapsed().as_secs_f64();

    let stats_path = config.out_dir.join("stats.csv");
    write_stats_csv(&stats_path, state.stats())?;
    let surv_path = config.out_dir.join("survivors.json");
    write_json(&surv_path, &SurvivorsDoc::from_state(&state))?;
    let scores_path = config.out_dir.join("scores.csv");
    write_scores_csv(&scores_path, &cert.scores)?;
    let cert_path = config.out_dir.join("certificate.json");
    write_json(
        &cert_path,
        &CertificateDoc::from_certificate(&cert, Some("scores.csv".into())),
    )?;
    let chain_path = config.out_dir.join("witness_chain.json");
    let chain_doc: Vec<fracsieve::report::CellDoc> = chain.iter().map(Into::into).collect();
    write_json(&chain_path, &chain_doc)?;

    println!(
        "witness: alpha = {}/2^{} ≈ {:.12}, min score {:.8} at n = {}, verdict = {}",
        alpha.num(),
        alpha.level(),
        alpha.to_f64(),
        cert.min_score.numer().to_string().parse::<f64>().unwrap_or(f64::NAN)
            / cert.min_score.denom().to_string().parse::<f64>().unwrap_or(f64::NAN),
        cert.argmin_n,
        cert.verdict
    );
    let mut manifest = ManifestBuilder::new(config, "witness");
    manifest.timing("sieve", sieve_secs);
    manifest.timing("certify", certify_secs);
    manifest.timing("total", started.elapsed().as_secs_f64());
    for p in [&stats_path, &surv_path, &scores_path, &cert_path, &chain_path] {
        manifest.file(p)?;
    }
    manifest.write(&config.out_dir.join("manifest.txt"))?;
    Ok(if cert.verdict { ExitCode::SUCCESS } else { ExitCode::from(5) })
}

fn cmd_certify(config: &RunConfig, certificate: Option<&Path>) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let (alpha, n_from, n_to) = if let Some(path) = certificate {
        let doc = CertificateDoc::read(path)?;
        let alpha = doc.parse_alpha()?;
        (alpha, doc.n_from, doc.n_to)
    } else {
        let num = config
            .alpha_num
            .clone()
            .ok_or_else(|| ConfigError::Invalid("certify needs --certificate or alpha_num".into()))?;
        let level = config
            .alpha_level
            .ok_or_else(|| ConfigError::Invalid("certify needs alpha_level".into()))?;
        let num = num
            .parse()
            .map_err(|_| ConfigError::Invalid(format!("bad alpha_num `{num}`")))?;
        let alpha = fracsieve::witness::DyadicRational::new(num, level)
            .context("alpha out of range")?;
        (alpha, config.n_from, config.n_to)
    };
    let cert = certify(&alpha, &seq, &params, n_from.max(seq.n_min()), n_to)?;
    let scores_path = config.out_dir.join("scores.csv");
    write_scores_csv(&scores_path, &cert.scores)?;
    let cert_path = config.out_dir.join("certificate.json");
    write_json(
        &cert_path,
        &CertificateDoc::from_certificate(&cert, Some("scores.csv".into())),
    )?;
    println!(
        "certify: alpha = {}/2^{}, range [{}, {}], verdict = {}",
        cert.alpha.num(),
        cert.alpha.level(),
        cert.n_from,
        cert.n_to,
        cert.verdict
    );
    finish_manifest(config, "certify", started, &[scores_path, cert_path])?;
    Ok(if cert.verdict { ExitCode::SUCCESS } else { ExitCode::from(5) })
}

fn cmd_validate(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let n0 = config.n_start.max(seq.n_min());

    let t_l1 = Instant::now();
    let triples = sample_lemma1_triples(
        &seq,
        &params,
        config.lemma1_n_lo.max(n0),
        config.lemma1_n_hi,
        config.lemma1_samples,
        config.seed,
    )?;
    let lemma1 = lemma1_check(&seq, &params, &triples)?;
    let l1_secs = t_l1.elapsed().as_secs_f64();

    let ladder = params.build_ladder(&seq, n0, 2)?;
    let step = (ladder.entries[0], ladder.entries[1], ladder.entries[2]);
    let window = config.resolve_window(&seq, &params)?;
    let t_ret = Instant::now();
    let outcome = retention_check(
        &seq,
        &params,
        step,
        &window,
        config.retention_method,
        config.retention_samples,
        config.seed,
    )?;
    let lemma2 = lemma2_report(&outcome);
    let lemma3 = lemma3_report(&outcome);
    let ret_secs = t_ret.elapsed().as_secs_f64();

    let t_budget = Instant::now();
    let budget = budget_check(&params, step.0, step.1)?;
    let budget_secs = t_budget.elapsed().as_secs_f64();

    let full_ladder = params.build_ladder(&seq, n0, config.ladder_depth)?;
    let eggleston = eggleston_estimate(&seq, &params, &full_ladder)?;

    let doc = ValidationReportDoc { lemma1, lemma2, lemma3, budget, eggleston };
    let path = config.out_dir.join("validation_report.json");
    write_json(&path, &doc)?;
    println!(
        "validate: L1 worst {:.4} (bound 5, {} flagged of {}), L2 worst {:.4} (bound {:.4}), \
         L3 worst {:.4}, budget holds = {}",
        doc.lemma1.worst_ratio,
        doc.lemma1.flagged,
        doc.lemma1.samples,
        doc.lemma2.worst_ratio,
        doc.lemma2.bound,
        doc.lemma3.worst_ratio,
        doc.budget.integral_inequality_holds
    );
    let mut manifest = ManifestBuilder::new(config, "validate");
    manifest.timing("lemma1", l1_secs);
    manifest.timing("retention", ret_secs);
    manifest.timing("budget", budget_secs);
    manifest.timing("total", started.elapsed().as_secs_f64());
    manifest.file(&path)?;
    manifest.write(&config.out_dir.join("manifest.txt"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dimension(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let (seq, params) = config.build()?;
    let ladder =
        params.build_ladder(&seq, config.n_start.max(seq.n_min()), config.ladder_depth)?;
    let est = eggleston_estimate(&seq, &params, &ladder)?;
    let series = params.series_report(&seq, &ladder, params.v())?;
    let path = config.out_dir.join("dimension_report.json");
    #[derive(serde::Serialize)]
    struct DimensionDoc<'a> {
        estimate: &'a fracsieve::validate::DimensionEstimate,
        series: &'a fracsieve::params::SeriesReport,
    }
    write_json(&path, &DimensionDoc { estimate: &est, series: &series })?;
    println!(
        "dimension: ladder {:?}, levels {:?}, D_k {:?}",
        est.entries, est.levels, est.d_k
    );
    finish_manifest(config, "dimension", started, &[path])?;
    Ok(ExitCode::SUCCESS)
}

fn finish_manifest(
    config: &RunConfig,
    command: &str,
    started: Instant,
    files: &[PathBuf],
) -> Result<(), ReportError> {
    let mut manifest = ManifestBuilder::new(config, command);
    manifest.timing("total", started.elapsed().as_secs_f64());
    for f in files {
        manifest.file(f)?;
    }
    manifest.write(&config.out_dir.join("manifest.txt"))
}

fn mode_name(mode: CMode) -> String {
    match mode {
        CMode::Paper => "paper".into(),
        CMode::Custom => "custom".into(),
    }
}

fn h_name(mode: HMode) -> String {
    match mode {
        HMode::Paper => "paper".into(),
        HMode::Effective => "effective".into(),
    }
}
