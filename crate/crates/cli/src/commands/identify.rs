use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use camscout_core::liveness::{LivenessPolicy, PairRule};
use camscout_core::registry::Registry;
use camscout_core::IdentifyOptions;
use clap::Args;

use crate::config::resolve;
use crate::Global;

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Registry of candidates to sample and update [default: registry.jsonl]
    #[arg(long)]
    registry: Option<PathBuf>,

    /// Samples taken per candidate [default: 3]
    #[arg(long)]
    samples: Option<u32>,

    /// Seconds between samples [default: 20]
    #[arg(long)]
    interval_secs: Option<f64>,

    /// Fraction of pixels that must change to call a pair changed [default: 0.01]
    #[arg(long)]
    percent_threshold: Option<f64>,

    /// Mean luminance delta that counts as change [default: 1.0]
    #[arg(long)]
    luma_threshold: Option<f64>,

    /// Per-channel tolerance before a pixel counts as changed [default: 10]
    #[arg(long)]
    channel_tol: Option<u8>,

    /// How comparator votes combine: any | majority [default: majority]
    #[arg(long)]
    pair_rule: Option<String>,

    /// Fraction of changed pairs required for a Live verdict [default: 1.0]
    #[arg(long)]
    set_rule: Option<f64>,

    /// Candidates sampled concurrently [default: 16]
    #[arg(long)]
    concurrency: Option<usize>,
}

fn parse_pair_rule(s: &str) -> Result<PairRule> {
    match s.to_ascii_lowercase().as_str() {
        "any" => Ok(PairRule::AnyComparator),
        "majority" => Ok(PairRule::Majority),
        other => bail!("invalid pair rule {other:?}; expected `any` or `majority`"),
    }
}

pub async fn run(args: IdentifyArgs, global: &Global) -> Result<()> {
    let file = &global.file;
    let registry_path = resolve(
        args.registry,
        file.get_str("registry").map(PathBuf::from),
        PathBuf::from("registry.jsonl"),
    );

    let defaults = LivenessPolicy::default();
    let interval = resolve(
        args.interval_secs,
        file.get::<f64>("interval_secs")?,
        defaults.sample_interval.as_secs_f64(),
    );
    if interval <= 0.0 {
        bail!("interval_secs must be positive");
    }
    let pair_rule = match resolve(args.pair_rule, file.get_str("pair_rule"), String::new()) {
        s if s.is_empty() => defaults.pair_rule,
        s => parse_pair_rule(&s)?,
    };
    let policy = LivenessPolicy {
        n_samples: resolve(args.samples, file.get::<u32>("samples")?, defaults.n_samples),
        sample_interval: Duration::from_secs_f64(interval),
        channel_tolerance: resolve(
            args.channel_tol,
            file.get::<u8>("channel_tol")?,
            defaults.channel_tolerance,
        ),
        percent_threshold: resolve(
            args.percent_threshold,
            file.get::<f64>("percent_threshold")?,
            defaults.percent_threshold,
        ),
        luminance_threshold: resolve(
            args.luma_threshold,
            file.get::<f64>("luma_threshold")?,
            defaults.luminance_threshold,
        ),
        pair_rule,
        set_rule: resolve(args.set_rule, file.get::<f64>("set_rule")?, defaults.set_rule),
    };
    policy.validate().context("invalid liveness policy")?;

    if !registry_path.exists() {
        tracing::warn!(
            registry = %registry_path.display(),
            "registry does not exist; nothing to identify (run discover first)"
        );
        return Ok(());
    }
    let mut registry = Registry::open(&registry_path).context("opening registry")?;
    if registry.is_empty() {
        tracing::warn!(
            registry = %registry_path.display(),
            "registry is empty; nothing to identify (run discover first)"
        );
        return Ok(());
    }

    let options = IdentifyOptions {
        policy,
        concurrency: resolve(args.concurrency, file.get::<usize>("concurrency")?, 16),
    };
    let fetcher = super::fetcher_for(global, global.request_timeout)?;
    let outcome = camscout_core::identify_registry(&mut registry, &options, fetcher)
        .await
        .context("identification failed")?;

    tracing::info!(
        examined = outcome.examined,
        live = outcome.live,
        static_assets = outcome.static_assets,
        indeterminate = outcome.indeterminate,
        registry = %registry_path.display(),
        "identification finished"
    );
    Ok(())
}
