pub mod archive;
pub mod discover;
pub mod fleet;
pub mod identify;
pub mod stats;

use std::sync::Arc;
use std::time::Duration;

use camscout_core::fetch::{FetchConfig, Fetcher, HttpFetcher};

use crate::Global;

pub fn fetcher_for(global: &Global, timeout: Duration) -> anyhow::Result<Arc<dyn Fetcher>> {
    Ok(Arc::new(HttpFetcher::new(FetchConfig {
        user_agent: global.user_agent.clone(),
        request_timeout: timeout,
        ..FetchConfig::default()
    })?))
}
