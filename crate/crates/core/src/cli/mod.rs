//! Command-line front end: one subcommand per pipeline, a TOML config with
//! dotted-key overrides, and a manifest per run directory.

mod config;
mod manifest;

pub use config::{apply_override, load_config, RunConfig, SweepConfig, ZeroShotConfig};
pub use manifest::{create_run_dir, file_entry, unix_now, version_string, FileEntry, RunManifest};

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::adapt::{adapt_online, zero_shot_eval, AdaptConfig};
use crate::analysis::{direction_decoding, g_correlation, g_sweep, pca, write_pca_csv, GDataset};
use crate::envs::{fmt_f64, EpisodeLog, TaskDescriptor};
use crate::error::{Error, Result};
use crate::models::{Checkpoint, GatingMode, ModelConfig};
use crate::rng::{substream, Stream};
use crate::sac::gradcheck::{check_all, GRADCHECK_TOLERANCE};
use crate::sac::{
    evaluate_direction, evaluate_training_directions, random_policy_baseline, train, write_decoding_csv, TrainOutput,
};

#[derive(Debug, Parser)]
#[command(name = "bilinear-ac", version, about = "Bilinear co-decomposed soft actor-critic experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML (or .json) config document.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted-key override, e.g. `train.total_steps=20000`. Repeatable.
    #[arg(long = "override", value_name = "K=V")]
    pub overrides: Vec<String>,
    /// Parent directory for run directories.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Comma-separated seeds; replaces `seeds` from the config.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Args)]
pub struct WithCheckpoint {
    #[command(flatten)]
    pub common: Common,
    /// `checkpoint.json` written by `train`
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Comma-separated headings in degrees.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thetas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Run directory or episode-log CSV with G columns.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Evaluate this checkpoint on the training headings instead.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one agent per seed.
    Train(Common),
    /// Evaluate a checkpoint at new headings with frozen parameters.
    EvalZeroshot(WithCheckpoint),
    /// Adapt G online after a heading switch, bases frozen.
    AdaptOnline(WithCheckpoint),
    /// Sweep G over the top-two principal plane.
    SweepG(WithCheckpoint),
    /// PCA, direction decoding and actor-critic correlation of recorded G.
    Analyze(AnalyzeArgs),
    /// Finite-difference audit of every loss gradient.
    CheckGrads(Common),
    /// Train shared and independent gating with matched seeds.
    AblateGating(Common),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::EvalZeroshot(_) => "eval-zeroshot",
            Command::AdaptOnline(_) => "adapt-online",
            Command::SweepG(_) => "sweep-g",
            Command::Analyze(_) => "analyze",
            Command::CheckGrads(_) => "check-grads",
            Command::AblateGating(_) => "ablate-gating",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Train(c) | Command::CheckGrads(c) | Command::AblateGating(c) => c,
            Command::EvalZeroshot(w) | Command::AdaptOnline(w) | Command::SweepG(w) => &w.common,
            Command::Analyze(a) => &a.common,
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Numeric { .. } => 3,
        Error::Contract(_) => 4,
        _ => 1,
    }
}

/// What a finished command reports: run directories and whether every
/// check passed (only `check-grads` can fail softly).
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub run_dirs: Vec<PathBuf>,
    pub passed: bool,
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    let common = command.common();
    let mut cfg = load_config(common.config.as_deref(), &common.overrides)?;
    if let Some(s) = &common.seeds {
        if s.is_empty() {
            return Err(Error::Config("--seeds must not be empty".into()));
        }
        cfg.seeds = s.clone();
    }
    match command {
        Command::Train(c) => cmd_train(&cfg, &c.out),
        Command::EvalZeroshot(w) => cmd_eval_zeroshot(&cfg, w),
        Command::AdaptOnline(w) => cmd_adapt(&cfg, w),
        Command::SweepG(w) => cmd_sweep(&cfg, w),
        Command::Analyze(a) => cmd_analyze(&cfg, a),
        Command::CheckGrads(c) => cmd_check_grads(&cfg, &c.out),
        Command::AblateGating(c) => cmd_ablate(&cfg, &c.out),
    }
}

fn config_value(cfg: &RunConfig) -> toml::Value {
    toml::Value::try_from(cfg).expect("config serializes")
}

fn manifest(command: &str, cfg: &RunConfig, seeds: Vec<u64>, started_at: f64) -> RunManifest {
    RunManifest {
        command: command.into(),
        version: version_string(),
        seeds,
        config: config_value(cfg),
        started_at,
        finished_at: 0.0,
        status: "ok".into(),
        error: None,
        parameter_checksums: BTreeMap::new(),
        summary: serde_json::Value::Null,
        files: Vec::new(),
    }
}

/// Writes `config.toml` into the run directory and returns its name.
fn snapshot_config(dir: &Path, cfg: &RunConfig) -> Result<String> {
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    Ok("config.toml".into())
}

fn create(dir: &Path, name: &str) -> Result<File> {
    Ok(File::create(dir.join(name))?)
}

fn write_training_outputs(dir: &Path, prefix: &str, out: &TrainOutput) -> Result<Vec<String>> {
    let names: Vec<String> = [
        "learning_curve.csv",
        "checkpoint.json",
        "g_decoding.csv",
        "episode_log.csv",
        "episode_log_critic.csv",
    ]
    .iter()
    .map(|n| match prefix {
        "" => n.to_string(),
        p => {
            let (stem, ext) = n.rsplit_once('.').expect("extension");
            format!("{stem}_{p}.{ext}")
        }
    })
    .collect();
    out.curve.write_csv(create(dir, &names[0])?)?;
    out.checkpoint.save(&dir.join(&names[1]))?;
    write_decoding_csv(&out.decoding, create(dir, &names[2])?)?;
    out.final_eval.combined_log().write_csv(create(dir, &names[3])?)?;
    out.final_eval.combined_critic_log().write_csv(create(dir, &names[4])?)?;
    Ok(names)
}

fn training_summary(out: &TrainOutput, random_baseline: f64) -> serde_json::Value {
    let first_decode = out
        .decoding
        .iter()
        .find(|d| d.env_step * 10 >= out.curve.last().map_or(0, |p| p.env_step))
        .map(|d| d.actor_error);
    json!({
        "final_mean_return": out.final_eval.mean,
        "final_per_direction": out.final_eval.per_direction.to_vec(),
        "final_g_corr": out.final_eval.g_corr,
        "area_under_curve": out.curve.area_under_curve(),
        "random_baseline": random_baseline,
        "final_decode_error": out.decoding.last().map(|d| d.actor_error),
        "decode_error_at_10pct": first_decode,
        "updates": out.updates,
    })
}

fn cmd_train(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let mut outcome = Outcome {
        passed: true,
        ..Outcome::default()
    };
    for &seed in &cfg.seeds {
        let started = unix_now();
        let dir = create_run_dir(out_dir, "train", seed)?;
        let mut files = vec![snapshot_config(&dir, cfg)?];
        let mut m = manifest("train", cfg, vec![seed], started);
        match train(cfg.model.clone(), cfg.train.clone(), seed) {
            Ok(out) => {
                files.extend(write_training_outputs(&dir, "", &out)?);
                let baseline = random_policy_baseline(&mut substream(seed, Stream::Env))?;
                m.summary = training_summary(&out, baseline);
                m.parameter_checksums.insert("after".into(), out.checkpoint.agent.checksum());
                m.write(&dir, &files)?;
                println!("{}: final mean reward/step {:+.4}", dir.display(), out.final_eval.mean);
                outcome.run_dirs.push(dir);
            }
            Err(failure) => {
                failure.last_good.save(&dir.join("checkpoint_last_good.json"))?;
                files.push("checkpoint_last_good.json".into());
                m.status = "failed".into();
                m.error = Some(failure.error.to_string());
                m.write(&dir, &files)?;
                return Err(failure.error);
            }
        }
    }
    Ok(outcome)
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        return Err(Error::Config(format!("checkpoint {} does not exist", path.display())));
    }
    Checkpoint::load(path)
}

/// Runs `body` against a checkpoint in a fresh run directory and records
/// its parameter checksum before and after.
fn with_checkpoint_run<F>(cfg: &RunConfig, w: &WithCheckpoint, command: &str, body: F) -> Result<Outcome>
where
    F: FnOnce(&Checkpoint, &Path, u64) -> Result<(Vec<String>, serde_json::Value)>,
{
    let started = unix_now();
    let seed = cfg.seeds[0];
    let ckpt = load_checkpoint(&w.checkpoint)?;
    let before = ckpt.agent.checksum();
    let bases_before = ckpt.agent.bases_checksum();
    let dir = create_run_dir(&w.common.out, command, seed)?;
    let mut files = vec![snapshot_config(&dir, cfg)?];
    let mut m = manifest(command, cfg, vec![seed], started);
    let result = body(&ckpt, &dir, seed);
    let after = ckpt.agent.checksum();
    let on_disk = load_checkpoint(&w.checkpoint)?.agent.checksum();
    m.parameter_checksums.insert("before".into(), before.clone());
    m.parameter_checksums.insert("after".into(), after.clone());
    m.parameter_checksums.insert("bases_before".into(), bases_before);
    m.parameter_checksums.insert("bases_after".into(), ckpt.agent.bases_checksum());
    let result = result.and_then(|r| {
        if before != after || before != on_disk {
            Err(Error::Contract(format!("{command} changed checkpoint parameters")))
        } else {
            Ok(r)
        }
    });
    match result {
        Ok((more, summary)) => {
            files.extend(more);
            m.summary = summary;
            m.write(&dir, &files)?;
            println!("{}", dir.display());
            Ok(Outcome {
                run_dirs: vec![dir],
                passed: true,
            })
        }
        Err(e) => {
            m.status = "failed".into();
            m.error = Some(e.to_string());
            m.write(&dir, &files)?;
            Err(e)
        }
    }
}

fn cmd_eval_zeroshot(cfg: &RunConfig, w: &WithCheckpoint) -> Result<Outcome> {
    let thetas = w.thetas.clone().unwrap_or_else(|| cfg.zeroshot.thetas.clone());
    with_checkpoint_run(cfg, w, "eval-zeroshot", |ckpt, dir, _| {
        let agent = &ckpt.agent;
        let trained = evaluate_training_directions(agent)?;
        let mut wtr = csv::Writer::from_writer(create(dir, "zeroshot.csv")?);
        wtr.write_record(["theta_deg", "mean_reward", "heading_error_last400", "ratio_to_trained"])?;
        let mut total = 0.0;
        for &deg in &thetas {
            let task = TaskDescriptor::from_degrees(deg);
            let r = zero_shot_eval(agent, &task)?;
            let err = heading_error(&r.log, 400);
            total += r.mean_reward;
            wtr.write_record([
                fmt_f64(deg),
                fmt_f64(r.mean_reward),
                fmt_f64(err),
                fmt_f64(r.mean_reward / trained.mean),
            ])?;
            println!("θ = {deg:>7.2}°  mean reward/step {:+.4}  heading error {:.3} rad", r.mean_reward, err);
        }
        wtr.flush()?;
        let mean = total / thetas.len().max(1) as f64;
        Ok((
            vec!["zeroshot.csv".into()],
            json!({
                "trained_mean_return": trained.mean,
                "zeroshot_mean_return": mean,
                "ratio": mean / trained.mean,
            }),
        ))
    })
}

/// Absolute angle between the displacement over the last `window` steps
/// and the commanded heading.
pub fn heading_error(log: &EpisodeLog, window: usize) -> f64 {
    let n = log.rows.len();
    if n == 0 {
        return f64::NAN;
    }
    let end = log.rows[n - 1].position;
    let start = if n > window { log.rows[n - 1 - window].position } else { [0.0, 0.0] };
    let heading = (end[1] - start[1]).atan2(end[0] - start[0]);
    crate::envs::wrap_angle(heading - log.rows[n - 1].theta).abs()
}

fn deg_label(d: f64) -> String {
    format!("{d}").replace('-', "m").replace('.', "p")
}

fn cmd_adapt(cfg: &RunConfig, w: &WithCheckpoint) -> Result<Outcome> {
    let targets = w.thetas.clone().unwrap_or_else(|| cfg.adapt_targets.clone());
    with_checkpoint_run(cfg, w, "adapt-online", |ckpt, dir, seed| {
        let agent = &ckpt.agent;
        let from = TaskDescriptor::from_degrees(cfg.adapt.from_deg);
        let mut files = Vec::new();
        let mut rows = Vec::new();
        let mut sw = csv::Writer::from_writer(create(dir, "adapt_summary.csv")?);
        sw.write_record([
            "from_deg",
            "to_deg",
            "pretrained_reward",
            "window_mean_reward",
            "ratio",
            "negated_window_mean_env_reward",
            "negated_window_mean_received_reward",
        ])?;
        for &deg in &targets {
            let to = TaskDescriptor::from_degrees(deg);
            let reference = evaluate_direction(agent, &to)?.mean_reward;
            let run = adapt_online(agent, &from, &to, &cfg.adapt, seed)?;
            let neg_cfg = AdaptConfig {
                negate_reward: true,
                ..cfg.adapt.clone()
            };
            let neg = adapt_online(agent, &from, &to, &neg_cfg, seed)?;
            let label = deg_label(deg);
            for (name, f) in [
                (format!("adapt_trace_{label}.csv"), 0),
                (format!("adapt_rewards_{label}.csv"), 1),
                (format!("adapt_negated_rewards_{label}.csv"), 2),
            ] {
                let file = create(dir, &name)?;
                match f {
                    0 => run.write_trace_csv(file)?,
                    1 => run.write_rewards_csv(file)?,
                    _ => neg.write_rewards_csv(file)?,
                }
                files.push(name);
            }
            let n = cfg.adapt.steps as usize;
            let lo = n.saturating_sub(500);
            let win = run.window_mean(lo, n);
            let nwin = neg.window_mean(lo, n);
            let nrecv = neg.received_window_mean(lo, n);
            sw.write_record([
                fmt_f64(cfg.adapt.from_deg),
                fmt_f64(deg),
                fmt_f64(reference),
                fmt_f64(win),
                fmt_f64(win / reference),
                fmt_f64(nwin),
                fmt_f64(nrecv),
            ])?;
            println!(
                "{:.1}° -> {deg:.1}°: reward {win:+.4} over steps {lo}-{n} ({:.0}% of pretrained); negated-reward task receives {nrecv:+.4}",
                cfg.adapt.from_deg,
                100.0 * win / reference
            );
            rows.push(json!({"to_deg": deg, "pretrained": reference, "window_mean": win, "negated_env_window_mean": nwin, "negated_received_window_mean": nrecv}));
        }
        sw.flush()?;
        files.insert(0, "adapt_summary.csv".into());
        Ok((files, json!({ "targets": rows })))
    })
}

fn cmd_sweep(cfg: &RunConfig, w: &WithCheckpoint) -> Result<Outcome> {
    with_checkpoint_run(cfg, w, "sweep-g", |ckpt, dir, _| {
        let s = &cfg.sweep;
        let result = g_sweep(&ckpt.agent, &s.amplitudes, s.n_directions, s.episode_len)?;
        result.write_csv(create(dir, "g_sweep.csv")?)?;
        let mut lw = csv::Writer::from_writer(create(dir, "g_sweep_plane.csv")?);
        let mut header = vec!["row".to_string()];
        header.extend((0..result.plane.mean.len()).map(|i| format!("G_{i}")));
        lw.write_record(&header)?;
        for (name, v) in [
            ("mean", &result.plane.mean),
            ("axis_0", &result.plane.axes[0]),
            ("axis_1", &result.plane.axes[1]),
        ] {
            let mut rec = vec![name.to_string()];
            rec.extend(v.iter().map(|x| fmt_f64(*x)));
            lw.write_record(&rec)?;
        }
        lw.flush()?;
        Ok((
            vec!["g_sweep.csv".into(), "g_sweep_plane.csv".into()],
            json!({ "cells": result.cells.len(), "rms": result.plane.rms }),
        ))
    })
}

fn read_log(path: &Path) -> Result<EpisodeLog> {
    EpisodeLog::read_csv(File::open(path)?)
}

fn cmd_analyze(cfg: &RunConfig, a: &AnalyzeArgs) -> Result<Outcome> {
    let started = unix_now();
    let seed = cfg.seeds[0];
    let mut checksums = BTreeMap::new();
    let (actor, critic) = match (&a.input, &a.checkpoint) {
        (Some(input), _) if input.is_dir() => {
            let actor = read_log(&input.join("episode_log.csv"))?;
            let critic_path = input.join("episode_log_critic.csv");
            let critic = critic_path.exists().then(|| read_log(&critic_path)).transpose()?;
            (actor, critic)
        }
        (Some(input), _) => (read_log(input)?, None),
        (None, Some(ck)) => {
            let ckpt = load_checkpoint(ck)?;
            checksums.insert("before".to_string(), ckpt.agent.checksum());
            let eval = evaluate_training_directions(&ckpt.agent)?;
            checksums.insert("after".to_string(), ckpt.agent.checksum());
            (eval.combined_log(), Some(eval.combined_critic_log()))
        }
        (None, None) => return Err(Error::Config("analyze needs --input or --checkpoint".into())),
    };
    let ds = GDataset::from_log(&actor);
    if ds.is_empty() || ds.k() == 0 {
        return Err(Error::Protocol("input holds no G columns".into()));
    }
    let dir = create_run_dir(&a.common.out, "analyze", seed)?;
    let mut files = vec![snapshot_config(&dir, cfg)?];
    let p = pca(&ds, ds.k())?;
    write_pca_csv(&p, create(&dir, "pca.csv")?)?;
    let mut pw = csv::Writer::from_writer(create(&dir, "pca_projection.csv")?);
    pw.write_record(["episode", "step", "theta", "pc_0", "pc_1"])?;
    for i in 0..ds.len() {
        let z = p.project(&ds.rows[i]);
        pw.write_record([
            ds.episode[i].to_string(),
            ds.step[i].to_string(),
            fmt_f64(ds.theta[i]),
            fmt_f64(z.first().copied().unwrap_or(0.0)),
            fmt_f64(z.get(1).copied().unwrap_or(0.0)),
        ])?;
    }
    pw.flush()?;
    let decode = direction_decoding(&ds, seed)?;
    let corr = match &critic {
        Some(c) => Some(g_correlation(&ds, &GDataset::from_log(c))?),
        None => None,
    };
    let total_var: f64 = p.explained_variance.iter().sum();
    let top2: f64 = p.explained_variance.iter().take(2).sum();
    let mut sw = csv::Writer::from_writer(create(&dir, "analysis.csv")?);
    sw.write_record(["metric", "value"])?;
    sw.write_record(["rows", &ds.len().to_string()])?;
    sw.write_record(["decode_error_rad", &fmt_f64(decode)])?;
    sw.write_record(["top2_variance_fraction", &fmt_f64(top2 / total_var)])?;
    if let Some(c) = corr {
        sw.write_record(["g_correlation", &fmt_f64(c.value)])?;
        sw.write_record(["g_correlation_skipped", &c.skipped.to_string()])?;
    }
    sw.flush()?;
    files.extend(["pca.csv".into(), "pca_projection.csv".into(), "analysis.csv".into()]);
    let mut m = manifest("analyze", cfg, vec![seed], started);
    m.parameter_checksums = checksums;
    m.summary = json!({
        "decode_error_rad": decode,
        "top2_variance_fraction": top2 / total_var,
        "g_correlation": corr.map(|c| c.value),
    });
    m.write(&dir, &files)?;
    println!(
        "{}: decode error {decode:.4} rad, top-2 PCs {:.1}% of variance",
        dir.display(),
        100.0 * top2 / total_var
    );
    Ok(Outcome {
        run_dirs: vec![dir],
        passed: true,
    })
}

fn cmd_check_grads(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let started = unix_now();
    let seed = cfg.seeds[0];
    let results = check_all(seed)?;
    let dir = create_run_dir(out_dir, "check-grads", seed)?;
    let mut files = vec![snapshot_config(&dir, cfg)?];
    let mut wtr = csv::Writer::from_writer(create(&dir, "grad_check.csv")?);
    wtr.write_record(["variant", "loss", "group", "params", "max_rel_error", "passed"])?;
    let mut passed = true;
    for (variant, c) in &results {
        println!(
            "{variant:<18} {:<8} {:<15} {:>6} params  max rel err {:.3e}  {}",
            c.loss,
            c.group,
            c.params,
            c.max_rel_error,
            if c.passed() { "ok" } else { "FAIL" }
        );
        passed &= c.passed();
        wtr.write_record([
            variant.clone(),
            c.loss.clone(),
            c.group.clone(),
            c.params.to_string(),
            fmt_f64(c.max_rel_error),
            c.passed().to_string(),
        ])?;
    }
    wtr.flush()?;
    files.push("grad_check.csv".into());
    let mut m = manifest("check-grads", cfg, vec![seed], started);
    m.summary = json!({ "tolerance": GRADCHECK_TOLERANCE, "passed": passed });
    if !passed {
        m.status = "failed".into();
    }
    m.write(&dir, &files)?;
    Ok(Outcome {
        run_dirs: vec![dir],
        passed,
    })
}

fn cmd_ablate(cfg: &RunConfig, out_dir: &Path) -> Result<Outcome> {
    let mut outcome = Outcome {
        passed: true,
        ..Outcome::default()
    };
    for &seed in &cfg.seeds {
        let started = unix_now();
        let dir = create_run_dir(out_dir, "ablate-gating", seed)?;
        let mut files = vec![snapshot_config(&dir, cfg)?];
        let baseline = random_policy_baseline(&mut substream(seed, Stream::Env))?;
        let mut sw = csv::Writer::from_writer(create(&dir, "ablation_summary.csv")?);
        sw.write_record(["seed", "mode", "final_mean_return", "area_under_curve", "final_g_corr", "random_baseline"])?;
        let mut summary = serde_json::Map::new();
        for (label, mode) in [("shared", GatingMode::Shared), ("independent", GatingMode::Independent)] {
            let model = ModelConfig {
                gating_mode: mode,
                ..cfg.model.clone()
            };
            let out = train(model, cfg.train.clone(), seed)?;
            files.extend(write_training_outputs(&dir, label, &out)?);
            sw.write_record([
                seed.to_string(),
                label.to_string(),
                fmt_f64(out.final_eval.mean),
                fmt_f64(out.curve.area_under_curve()),
                fmt_f64(out.final_eval.g_corr),
                fmt_f64(baseline),
            ])?;
            println!("seed {seed} {label:<11}: final mean reward/step {:+.4}", out.final_eval.mean);
            summary.insert(label.into(), training_summary(&out, baseline));
        }
        sw.flush()?;
        files.insert(1, "ablation_summary.csv".into());
        summary.insert("config_diff".into(), json!(["model.gating_mode"]));
        let mut m = manifest("ablate-gating", cfg, vec![seed], started);
        m.summary = serde_json::Value::Object(summary);
        m.write(&dir, &files)?;
        outcome.run_dirs.push(dir);
    }
    Ok(outcome)
}
