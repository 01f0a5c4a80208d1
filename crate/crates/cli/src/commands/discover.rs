use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use camscout_core::registry::{CameraRecord, Registry};
use camscout_core::urlnorm::normalize_url;
use camscout_core::CrawlConfig;
use chrono::Utc;
use clap::Args;

use crate::config::{resolve, resolve_flag};
use crate::Global;

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Seeds file: one URL per line, '#' comments allowed.
    #[arg(long)]
    seeds: Option<PathBuf>,

    /// Maximum crawl depth from the seeds [default: 1]
    #[arg(long)]
    depth: Option<u32>,

    /// Total page budget for the crawl [default: 100]
    #[arg(long)]
    max_pages: Option<usize>,

    /// Per-host politeness delay in milliseconds [default: 500]
    #[arg(long)]
    delay_ms: Option<u64>,

    /// Restrict the crawl to the seed hosts.
    #[arg(long)]
    same_host: bool,

    /// Registry file candidates are upserted into [default: registry.jsonl]
    #[arg(long)]
    out: Option<PathBuf>,

    /// Crawl report path, one record per fetched page
    /// [default: <out>.crawl-report.jsonl]
    #[arg(long)]
    report: Option<PathBuf>,

    /// Concurrent fetches across hosts [default: 8]
    #[arg(long)]
    fan_out: Option<usize>,

    /// Skip robots.txt checks.
    #[arg(long)]
    no_robots: bool,
}

fn load_seeds(path: &PathBuf) -> Result<Vec<url::Url>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading seeds file {}", path.display()))?;
    let mut seeds = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let url = normalize_url(line, None)
            .with_context(|| format!("{} line {}: bad seed URL", path.display(), idx + 1))?;
        seeds.push(url);
    }
    Ok(seeds)
}

pub async fn run(args: DiscoverArgs, global: &Global) -> Result<()> {
    let file = &global.file;
    let seeds_path = resolve(
        args.seeds,
        file.get_str("seeds").map(PathBuf::from),
        PathBuf::new(),
    );
    if seeds_path.as_os_str().is_empty() {
        bail!("--seeds <file> is required (or `seeds = <file>` in the config file)");
    }
    let seeds = load_seeds(&seeds_path)?;
    if seeds.is_empty() {
        bail!("{}: no seed URLs found", seeds_path.display());
    }

    let out = resolve(
        args.out,
        file.get_str("out").map(PathBuf::from),
        PathBuf::from("registry.jsonl"),
    );
    let report_path = resolve(
        args.report,
        file.get_str("report").map(PathBuf::from),
        PathBuf::from(format!("{}.crawl-report.jsonl", out.display())),
    );

    let config = CrawlConfig {
        seeds,
        max_depth: resolve(args.depth, file.get::<u32>("depth")?, 1),
        max_pages: resolve(args.max_pages, file.get::<usize>("max_pages")?, 100),
        same_host_only: resolve_flag(args.same_host, file.get_bool("same_host")?, false),
        per_host_min_delay: Duration::from_millis(resolve(
            args.delay_ms,
            file.get::<u64>("delay_ms")?,
            500,
        )),
        request_timeout: global.request_timeout,
        user_agent: global.user_agent.clone(),
        fan_out: resolve(args.fan_out, file.get::<usize>("fan_out")?, 8),
        respect_robots: !resolve_flag(args.no_robots, file.get_bool("no_robots")?, false),
    };

    let fetcher = super::fetcher_for(global, global.request_timeout)?;
    let outcome = camscout_core::crawl(&config, fetcher)
        .await
        .context("crawl failed")?;

    // Register candidates. Already-known endpoints keep their existing
    // verdicts; re-discovery must not downgrade an identified camera back to
    // pending.
    let mut registry = Registry::open(&out).context("opening registry")?;
    let mut fresh = 0usize;
    let mut known = 0usize;
    let now = Utc::now();
    for candidate in &outcome.candidates {
        let record = CameraRecord::from_candidate(candidate, now);
        if registry.get(&record.camera_id).is_some() {
            known += 1;
            continue;
        }
        registry.upsert(record).context("writing registry")?;
        fresh += 1;
    }

    let mut report_file = std::fs::File::create(&report_path)
        .with_context(|| format!("creating {}", report_path.display()))?;
    for page in &outcome.report.pages {
        let line = serde_json::to_string(page)?;
        writeln!(report_file, "{line}")?;
    }

    tracing::info!(
        pages = outcome.report.pages.len(),
        candidates = outcome.candidates.len(),
        new = fresh,
        known,
        registry = %out.display(),
        report = %report_path.display(),
        "discovery finished"
    );
    Ok(())
}
