use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::CapacityKind;
use crate::channel::{BinderLayout, ChannelParams, ToneGrid};
use crate::energy::LdParams;
use crate::error::{Error, Result};
use crate::smmod::{Constellation, ConstellationKind, Scheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorName {
    /// Uncoded joint ML.
    Ml,
    /// Uncoded line detection + ZF slicing.
    #[serde(alias = "line+zf")]
    Linezf,
    Sosd1,
    Sosd2,
    /// Coded vectoring with full ZF.
    VectoringZf,
}

impl DetectorName {
    pub const ALL: [DetectorName; 5] = [
        Self::Ml,
        Self::Linezf,
        Self::Sosd1,
        Self::Sosd2,
        Self::VectoringZf,
    ];

    pub fn scheme(self) -> Scheme {
        match self {
            Self::VectoringZf => Scheme::Vectoring,
            _ => Scheme::Sm,
        }
    }

    pub fn is_coded(self) -> bool {
        !matches!(self, Self::Ml | Self::Linezf)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ml => "ml",
            Self::Linezf => "linezf",
            Self::Sosd1 => "sosd1",
            Self::Sosd2 => "sosd2",
            Self::VectoringZf => "vectoring-zf",
        }
    }
}

impl std::fmt::Display for DetectorName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DetectorName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .or((s == "line+zf").then_some(Self::Linezf))
            .ok_or_else(|| Error::Config(format!("unknown detector {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationSpec {
    pub kind: ConstellationKind,
    pub order: usize,
}

impl ConstellationSpec {
    pub fn build(&self) -> Result<Constellation> {
        Constellation::new(self.kind, self.order)
    }
}

/// Transmit power per group: either a list of totals in dBm or one PSD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PowerSetting {
    Dbm(Vec<f64>),
    PsdDbmHz(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecSettings {
    /// Channel uses (tones × DMT symbols) spanned by one code block.
    pub block_uses: usize,
    pub iterations: usize,
    pub interleaver_seed: u64,
}

impl Default for CodecSettings {
    fn default() -> Self {
        Self {
            block_uses: 128,
            iterations: 4,
            interleaver_seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialSettings {
    /// Frame cap per point.
    pub max_frames: usize,
    /// Stop a point once this many bit errors have accumulated.
    pub max_errors: u64,
    /// Frames simulated between stopping checks.
    pub batch: usize,
}

impl Default for TrialSettings {
    fn default() -> Self {
        Self {
            max_frames: 10_000,
            max_errors: 200,
            batch: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacitySettings {
    pub kinds: Vec<CapacityKind>,
    /// Output draws per group for the sampled spatial CCMC term.
    pub ccmc_samples: usize,
    /// Noise draws per tone for DCMC.
    pub dcmc_draws: usize,
    /// One-based tones; empty means the whole grid.
    pub tones: Vec<usize>,
}

impl Default for CapacitySettings {
    fn default() -> Self {
        Self {
            kinds: vec![CapacityKind::Ccmc, CapacityKind::Dcmc],
            ccmc_samples: 100_000,
            dcmc_draws: 10_000,
            tones: Vec::new(),
        }
    }
}

/// Experiment description. Defaults follow the reference parameter table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub grid: ToneGrid,
    pub layout: BinderLayout,
    pub channel: ChannelParams,
    /// Seed of the synthetic channel; shared by every loop length.
    pub channel_seed: u64,
    /// Measured or saved channel used instead of synthesis.
    pub channel_file: Option<PathBuf>,
    pub loop_lengths_m: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub detectors: Vec<DetectorName>,
    pub sosd1_precancel: bool,
    pub sm_constellation: ConstellationSpec,
    pub vectoring_constellation: ConstellationSpec,
    pub power: PowerSetting,
    pub noise_psd_dbm_hz: f64,
    /// One-based tones for BER and per-tone energy runs.
    pub tones: Vec<usize>,
    /// Per-tone SNR points (dB); when set, BER is swept over SNR instead of loop length.
    pub snr_db: Vec<f64>,
    /// Bandwidths (MHz) from the band edge; when set, BER is swept over bandwidth.
    pub bandwidths_mhz: Vec<f64>,
    pub codec: CodecSettings,
    pub trials: TrialSettings,
    pub capacity: CapacitySettings,
    pub ld: LdParams,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            grid: ToneGrid::table_default(),
            layout: BinderLayout {
                n_groups: 2,
                m_lines: 2,
            },
            channel: ChannelParams::default(),
            channel_seed: 2024,
            channel_file: None,
            loop_lengths_m: vec![100.0],
            schemes: vec![Scheme::Sm, Scheme::Vectoring],
            detectors: vec![
                DetectorName::Sosd1,
                DetectorName::Sosd2,
                DetectorName::VectoringZf,
            ],
            sosd1_precancel: false,
            sm_constellation: ConstellationSpec {
                kind: ConstellationKind::Qam,
                order: 8,
            },
            vectoring_constellation: ConstellationSpec {
                kind: ConstellationKind::Qam,
                order: 4,
            },
            power: PowerSetting::PsdDbmHz(-70.0),
            noise_psd_dbm_hz: -140.0,
            tones: vec![500],
            snr_db: Vec::new(),
            bandwidths_mhz: Vec::new(),
            codec: CodecSettings::default(),
            trials: TrialSettings::default(),
            capacity: CapacitySettings::default(),
            ld: LdParams::default(),
            seed: 1,
        }
    }
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate().map_err(|e| cfg(e.to_string()))?;
        self.layout.validate().map_err(|e| cfg(e.to_string()))?;
        self.channel.validate().map_err(|e| cfg(e.to_string()))?;
        self.ld.validate().map_err(|e| cfg(e.to_string()))?;
        self.sm_constellation.build().map_err(|e| cfg(e.to_string()))?;
        self.vectoring_constellation.build().map_err(|e| cfg(e.to_string()))?;
        if self.loop_lengths_m.is_empty() && self.channel_file.is_none() {
            return Err(cfg("at least one loop length is required"));
        }
        if let Some(bad) = self.loop_lengths_m.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(cfg(format!("loop length {bad} is not positive")));
        }
        if self.schemes.is_empty() {
            return Err(cfg("at least one scheme is required"));
        }
        if self.detectors.is_empty() {
            return Err(cfg("at least one detector is required"));
        }
        match &self.power {
            PowerSetting::Dbm(list) if list.is_empty() => {
                return Err(cfg("power list is empty"));
            }
            PowerSetting::Dbm(list) if list.iter().any(|p| !p.is_finite()) => {
                return Err(cfg("power values must be finite"));
            }
            PowerSetting::PsdDbmHz(p) if !p.is_finite() => {
                return Err(cfg("transmit PSD must be finite"));
            }
            _ => {}
        }
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(cfg("noise PSD must be finite"));
        }
        if self.tones.is_empty() {
            return Err(cfg("at least one tone is required"));
        }
        self.check_tones(&self.tones)?;
        self.check_tones(&self.capacity.tones)?;
        if !self.snr_db.is_empty() && !self.bandwidths_mhz.is_empty() {
            return Err(cfg("sweep either SNR or bandwidth, not both"));
        }
        if let Some(bw) = self
            .bandwidths_mhz
            .iter()
            .find(|&&b| !(b > 0.0 && b * 1e6 <= self.grid.bandwidth_hz() + 1e-6))
        {
            return Err(cfg(format!("bandwidth {bw} MHz outside the grid")));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(cfg("SNR values must be finite"));
        }
        if self.codec.block_uses == 0 {
            return Err(cfg("code block must span at least one channel use"));
        }
        if !(1..=crate::softdet::MAX_ITERATIONS).contains(&self.codec.iterations) {
            return Err(cfg(format!(
                "iterations must lie in 1..={}",
                crate::softdet::MAX_ITERATIONS
            )));
        }
        if self.trials.max_frames == 0 || self.trials.batch == 0 || self.trials.max_errors == 0 {
            return Err(cfg("trial counts must be at least 1"));
        }
        if self.capacity.kinds.is_empty() {
            return Err(cfg("at least one capacity kind is required"));
        }
        for (name, n) in [
            ("ccmc_samples", self.capacity.ccmc_samples),
            ("dcmc_draws", self.capacity.dcmc_draws),
        ] {
            if n < crate::capacity::MIN_SAMPLES {
                return Err(cfg(format!(
                    "{name} must be at least {}",
                    crate::capacity::MIN_SAMPLES
                )));
            }
        }
        Ok(())
    }

    fn check_tones(&self, tones: &[usize]) -> Result<()> {
        if let Some(t) = tones.iter().find(|&&t| t == 0 || t > self.grid.k_count) {
            return Err(Error::ToneOutOfRange {
                tone: *t,
                k_count: self.grid.k_count,
            });
        }
        Ok(())
    }

    /// Per-group transmit powers in dBm.
    pub fn power_points_dbm(&self) -> Vec<f64> {
        match &self.power {
            PowerSetting::Dbm(list) => list.clone(),
            PowerSetting::PsdDbmHz(psd) => vec![psd_to_power(*psd, self.grid.bandwidth_hz())],
        }
    }

    /// Complex noise variance per tone in watts.
    pub fn noise_variance(&self) -> f64 {
        dbm_to_watts(self.noise_psd_dbm_hz) * self.grid.delta_f
    }
}

/// `psd + 10·log10(bandwidth)`.
pub fn psd_to_power(psd_dbm_hz: f64, bandwidth_hz: f64) -> f64 {
    psd_dbm_hz + 10.0 * bandwidth_hz.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = SimConfig::default();
        c.validate().unwrap();
        let back = SimConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn both_power_forms_are_rejected() {
        let r = SimConfig::from_json(r#"{"power": {"dbm": [3.0], "psd_dbm_hz": -70.0}}"#);
        assert!(matches!(r, Err(Error::Config(_))));
        let ok = SimConfig::from_json(r#"{"power": {"dbm": [3.0, 10.0]}}"#).unwrap();
        assert_eq!(ok.power_points_dbm(), vec![3.0, 10.0]);
    }

    #[test]
    fn bad_configs() {
        let mut c = SimConfig::default();
        c.tones = vec![2049];
        assert!(matches!(c.validate(), Err(Error::ToneOutOfRange { tone: 2049, .. })));
        let mut c = SimConfig::default();
        c.trials.max_frames = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        assert!(SimConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn psd_conversions() {
        assert!((psd_to_power(-70.0, 102.4e6) - 10.10).abs() < 0.01);
        assert!((psd_to_power(-140.0, 5e4) - (-93.0103)).abs() < 1e-4);
        assert_eq!(psd_to_power(-12.5, 1.0), -12.5);
        assert!((SimConfig::default().noise_variance() - 5e-13).abs() < 1e-25);
    }
}
