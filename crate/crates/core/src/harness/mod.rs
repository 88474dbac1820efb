//! Monte Carlo experiments: BER, capacity and energy-efficiency sweeps with
//! deterministic seeding and CSV/JSON result files.
//!
//! Tones in configuration files and result flags are one-based; the library
//! below this module is zero-based throughout.

mod ber;
mod config;
mod results;
mod runner;
mod sweep;

use std::time::Instant;

pub use ber::{mean_direct_gain, noise_for_snr, run_ber};
pub use config::{
    dbm_to_watts, psd_to_power, CapacitySettings, CodecSettings, ConstellationSpec, DetectorName,
    PowerSetting, SimConfig, TrialSettings,
};
pub use results::{
    read_results, write_results, Record, RunKind, RunMeta, RunResult, CSV_FILE, CSV_HEADER,
    JSON_FILE, SCHEMA_VERSION,
};
pub use runner::{run_point, trial_rng, wilson_interval, FrameOutcome, PointTally};
pub use sweep::{run_capacity, run_energy};

use crate::channel::{load_channel, synth_binder, BinderChannel};
use crate::error::Result;

fn one_based_to_index(tones: &[usize]) -> Vec<usize> {
    tones.iter().map(|t| t - 1).collect()
}

/// One channel per configured loop length, or the configured channel file.
pub fn build_channels(config: &SimConfig) -> Result<Vec<BinderChannel>> {
    if let Some(path) = &config.channel_file {
        let ch = load_channel(path)?;
        if let Some(t) = config.tones.iter().find(|&&t| t > ch.grid().k_count) {
            return Err(crate::Error::ToneOutOfRange {
                tone: *t,
                k_count: ch.grid().k_count,
            });
        }
        return Ok(vec![ch]);
    }
    config
        .loop_lengths_m
        .iter()
        .map(|&l| synth_binder(config.grid, config.layout, l, &config.channel, config.channel_seed))
        .collect()
}

/// Runs `f` and stamps the wall time into the result metadata.
pub fn timed(f: impl FnOnce() -> Result<RunResult>) -> Result<RunResult> {
    let start = Instant::now();
    let mut r = f()?;
    r.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(r)
}
