use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::time::Duration;

use anyhow::{Context, Result};
use camscout_core::mockfleet::{start_fleet, FleetSpec};
use clap::Args;

use crate::config::resolve;
use crate::Global;

#[derive(Debug, Args)]
pub struct FleetArgs {
    /// Number of fixed-image endpoints [default: 0]
    #[arg(long = "static")]
    static_images: Option<usize>,

    /// Number of rotating-image endpoints [default: 0]
    #[arg(long)]
    rotating: Option<usize>,

    /// Number of MJPEG stream endpoints [default: 0]
    #[arg(long)]
    mjpeg: Option<usize>,

    /// Number of HLS stream endpoints [default: 0]
    #[arg(long)]
    hls: Option<usize>,

    /// Number of decoy HTML pages [default: 0]
    #[arg(long)]
    decoys: Option<usize>,

    /// Listen port; 0 picks a free one [default: 0]
    #[arg(long)]
    port: Option<u16>,

    /// Bind address [default: 127.0.0.1]
    #[arg(long)]
    bind: Option<IpAddr>,

    /// Seed for deterministic image generation [default: 42]
    #[arg(long)]
    seed: Option<u64>,

    /// Rotating-image refresh period in milliseconds [default: 5000]
    #[arg(long)]
    rotation_ms: Option<u64>,

    /// MJPEG frame period in milliseconds [default: 1000]
    #[arg(long)]
    frame_ms: Option<u64>,

    /// HLS media-sequence advance period in milliseconds [default: 4000]
    #[arg(long)]
    segment_ms: Option<u64>,

    /// Injected per-request delay on image endpoints, milliseconds [default: 0]
    #[arg(long)]
    delay_ms: Option<u64>,
}

pub async fn run(args: FleetArgs, global: &Global) -> Result<()> {
    let file = &global.file;
    let defaults = FleetSpec::default();
    let bind = resolve(
        args.bind,
        file.get::<IpAddr>("bind")?,
        "127.0.0.1".parse().expect("literal"),
    );
    let port = resolve(args.port, file.get::<u16>("port")?, 0);
    let spec = FleetSpec {
        static_images: resolve(args.static_images, file.get::<usize>("static")?, 0),
        rotating_images: resolve(args.rotating, file.get::<usize>("rotating")?, 0),
        rotation_period: Duration::from_millis(resolve(
            args.rotation_ms,
            file.get::<u64>("rotation_ms")?,
            defaults.rotation_period.as_millis() as u64,
        )),
        mjpeg_streams: resolve(args.mjpeg, file.get::<usize>("mjpeg")?, 0),
        frame_period: Duration::from_millis(resolve(
            args.frame_ms,
            file.get::<u64>("frame_ms")?,
            defaults.frame_period.as_millis() as u64,
        )),
        hls_streams: resolve(args.hls, file.get::<usize>("hls")?, 0),
        segment_period: Duration::from_millis(resolve(
            args.segment_ms,
            file.get::<u64>("segment_ms")?,
            defaults.segment_period.as_millis() as u64,
        )),
        decoy_pages: resolve(args.decoys, file.get::<usize>("decoys")?, 0),
        listen: SocketAddr::new(bind, port),
        seed: resolve(args.seed, file.get::<u64>("seed")?, defaults.seed),
        still_delay: Duration::from_millis(resolve(
            args.delay_ms,
            file.get::<u64>("delay_ms")?,
            0,
        )),
        ..FleetSpec::default()
    };

    let fleet = start_fleet(spec).await.context("starting fleet")?;
    // The index URL is the one piece of data consumers need; everything else
    // is queryable at /__manifest.
    println!("{}", fleet.index_url());
    std::io::stdout().flush().ok();
    tracing::info!(addr = %fleet.addr, "fleet serving; press ctrl-c to stop");

    tokio::signal::ctrl_c().await.context("waiting for ctrl-c")?;
    tracing::info!("shutting down");
    fleet.shutdown().await;
    Ok(())
}
