use rand::Rng;

use super::config::{DetectorName, SimConfig};
use super::results::{Record, RunKind, RunResult};
use super::runner::{run_point, trial_rng, wilson_interval, FrameOutcome};
use super::{build_channels, dbm_to_watts, one_based_to_index};
use crate::channel::BinderChannel;
use crate::detect::{line_zf_detect, ml_detect, observe, ToneObservation};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::smmod::{
    bits_to_index, demap_frame, map_frame, ActivationSet, Bit, Constellation, PowerPlan, Scheme,
};
use crate::softdet::{transmit_bits, turbo_loop, CodecConfig, DetectorKind};

/// Everything needed to simulate frames at one sweep point with one detector.
pub(crate) struct BerPoint<'a> {
    pub ch: &'a BinderChannel,
    pub tones: Vec<usize>,
    pub sigma_w2: f64,
    pub plan: PowerPlan,
    pub detector: DetectorName,
    pub precancel: bool,
    pub cons: &'a Constellation,
    pub act: &'a ActivationSet,
    pub uses: usize,
    pub codec: Option<CodecConfig>,
}

impl BerPoint<'_> {
    fn bits_per_use(&self) -> usize {
        let layout = self.ch.layout();
        match self.plan.scheme {
            Scheme::Sm => layout.n_groups * (layout.spatial_bits() + self.cons.bits()),
            Scheme::Vectoring => layout.l_total() * self.cons.bits(),
        }
    }

    fn transmit(&self, bits: &[Bit]) -> Result<CVector> {
        match self.plan.scheme {
            Scheme::Sm => Ok(map_frame(bits, self.ch.layout(), self.act, self.cons)?.x),
            Scheme::Vectoring => Ok(CVector::from_iterator(
                self.ch.layout().l_total(),
                bits.chunks(self.cons.bits())
                    .map(|c| self.cons.point(bits_to_index(c))),
            )),
        }
    }

    fn frame<R: Rng>(&self, trial: u64, rng: &mut R) -> Result<FrameOutcome> {
        let per_use = self.bits_per_use();
        let total = per_use * self.uses;
        let (info, tx) = match &self.codec {
            Some(codec) => {
                let info: Vec<Bit> = (0..codec.info_bits).map(|_| rng.random_range(0..2)).collect();
                let tx = transmit_bits(&info, codec, total)?;
                (info, tx)
            }
            None => {
                let tx: Vec<Bit> = (0..total).map(|_| rng.random_range(0..2)).collect();
                (tx.clone(), tx)
            }
        };
        let mut obs = Vec::with_capacity(self.uses);
        for (u, chunk) in tx.chunks(per_use).enumerate() {
            let tone = self.tones[(trial as usize * self.uses + u) % self.tones.len()];
            let x = self.transmit(chunk)?;
            obs.push(observe(self.ch, tone, &x, self.plan, self.sigma_w2, rng));
        }
        match &self.codec {
            Some(codec) => self.decode(&obs, codec, &info),
            None => self.detect_uncoded(&obs, &tx, per_use),
        }
    }

    fn decode(&self, obs: &[ToneObservation], codec: &CodecConfig, info: &[Bit]) -> Result<FrameOutcome> {
        let kind = match self.detector {
            DetectorName::Sosd1 if self.precancel => DetectorKind::Sosd1Precancel,
            DetectorName::Sosd1 => DetectorKind::Sosd1,
            DetectorName::Sosd2 => DetectorKind::Sosd2,
            DetectorName::VectoringZf => DetectorKind::VectoringZf,
            other => unreachable!("{other} is uncoded"),
        };
        match turbo_loop(obs, self.ch, self.cons, self.act, kind, codec) {
            Ok(out) => Ok(FrameOutcome {
                errors: count_errors(&out.info_hard, info),
                bits: info.len() as u64,
                skipped: 0,
            }),
            Err(Error::SingularChannel { .. }) => Ok(FrameOutcome {
                errors: 0,
                bits: 0,
                skipped: obs.len() as u64,
            }),
            Err(e) => Err(e),
        }
    }

    fn detect_uncoded(&self, obs: &[ToneObservation], tx: &[Bit], per_use: usize) -> Result<FrameOutcome> {
        let mut out = FrameOutcome::default();
        for (o, sent) in obs.iter().zip(tx.chunks(per_use)) {
            let decided = match self.detector {
                DetectorName::Ml => ml_detect(o, self.ch, self.cons, self.act).map(|d| d.groups),
                DetectorName::Linezf => line_zf_detect(o, self.ch, self.cons).map(|(d, _)| d.groups),
                other => unreachable!("{other} is coded"),
            };
            match decided {
                Ok(groups) => {
                    let bits = demap_frame(&groups, self.act, self.cons);
                    out.errors += count_errors(&bits, sent);
                    out.bits += sent.len() as u64;
                }
                Err(Error::SingularChannel { .. }) => out.skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

fn count_errors(a: &[Bit], b: &[Bit]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// Mean `|H[i,i]|²` over the given tones.
pub fn mean_direct_gain(ch: &BinderChannel, tones: &[usize]) -> f64 {
    let l = ch.layout().l_total();
    let sum: f64 = tones
        .iter()
        .map(|&t| (0..l).map(|i| ch.tone(t)[(i, i)].norm_sqr()).sum::<f64>())
        .sum();
    sum / (tones.len() * l) as f64
}

/// Noise variance giving `snr_db` for the per-group tone power over the mean direct gain.
pub fn noise_for_snr(ch: &BinderChannel, tones: &[usize], p_group_tone: f64, snr_db: f64) -> f64 {
    p_group_tone * mean_direct_gain(ch, tones) / 10f64.powf(snr_db / 10.0)
}

enum Sweep {
    Loop,
    Snr,
    Bandwidth,
}

/// BER sweep over loop length, SNR or bandwidth for each configured detector.
pub fn run_ber(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let power = config.power_points_dbm();
    if power.len() != 1 {
        return Err(Error::Config("a BER run takes exactly one power point".into()));
    }
    let p_group = dbm_to_watts(power[0]);
    let detectors: Vec<DetectorName> = config
        .detectors
        .iter()
        .copied()
        .filter(|d| config.schemes.contains(&d.scheme()))
        .collect();
    if detectors.is_empty() {
        return Err(Error::Config("no detector matches the selected schemes".into()));
    }
    let channels = build_channels(config)?;
    let sm_cons = config.sm_constellation.build()?;
    let vec_cons = config.vectoring_constellation.build()?;
    let act = ActivationSet::new(channels[0].layout().m_lines)?;
    let base_tones = one_based_to_index(&config.tones);

    let (sweep, name) = if !config.snr_db.is_empty() {
        (Sweep::Snr, "snr_db")
    } else if !config.bandwidths_mhz.is_empty() {
        (Sweep::Bandwidth, "bandwidth_mhz")
    } else {
        (Sweep::Loop, "loop_m")
    };
    let points: Vec<(f64, &BinderChannel, Vec<usize>, f64)> = match sweep {
        Sweep::Loop => channels
            .iter()
            .map(|ch| (ch.loop_length(), ch, base_tones.clone(), config.noise_variance()))
            .collect(),
        Sweep::Snr => {
            let ch = &channels[0];
            let p_tone = p_group / ch.grid().k_count as f64;
            config
                .snr_db
                .iter()
                .map(|&s| (s, ch, base_tones.clone(), noise_for_snr(ch, &base_tones, p_tone, s)))
                .collect()
        }
        Sweep::Bandwidth => {
            let ch = &channels[0];
            config
                .bandwidths_mhz
                .iter()
                .map(|&bw| {
                    let n = ((bw * 1e6 / ch.grid().delta_f).round() as usize).clamp(1, ch.grid().k_count);
                    (bw, ch, (0..n).collect(), config.noise_variance())
                })
                .collect()
        }
    };

    let mut records = Vec::new();
    for (pi, (swept, ch, tones, sigma_w2)) in points.iter().enumerate() {
        for (di, &detector) in detectors.iter().enumerate() {
            let scheme = detector.scheme();
            let cons = match scheme {
                Scheme::Sm => &sm_cons,
                Scheme::Vectoring => &vec_cons,
            };
            let layout = ch.layout();
            let mut point = BerPoint {
                ch,
                tones: tones.clone(),
                sigma_w2: *sigma_w2,
                plan: PowerPlan::new(p_group, scheme, ch.grid().k_count, layout.m_lines),
                detector,
                precancel: config.sosd1_precancel,
                cons,
                act: &act,
                uses: config.codec.block_uses,
                codec: None,
            };
            if detector.is_coded() {
                point.codec = Some(
                    CodecConfig::fitting(
                        point.bits_per_use() * point.uses,
                        config.codec.interleaver_seed,
                        config.codec.iterations,
                    )
                    .map_err(|e| Error::Config(e.to_string()))?,
                );
            }
            let point_id = ((pi as u64) << 8) | di as u64;
            let tally = run_point(
                config.trials.max_frames,
                config.trials.batch,
                config.trials.max_errors,
                |t| point.frame(t, &mut trial_rng(config.seed, point_id, t)),
            )?;
            records.push(ber_record(*swept, detector, &tally));
        }
    }
    Ok(RunResult::new(RunKind::Ber, name, config, records))
}

fn ber_record(swept: f64, detector: DetectorName, t: &super::runner::PointTally) -> Record {
    let ber = if t.bits == 0 { 0.0 } else { t.errors as f64 / t.bits as f64 };
    let std_err = if t.bits == 0 {
        0.0
    } else {
        (ber * (1.0 - ber) / t.bits as f64).sqrt()
    };
    let (lo, hi) = wilson_interval(t.errors, t.bits);
    let mut flags = format!("errors={};bits={};wilson={lo}:{hi}", t.errors, t.bits);
    if t.errors < 10 {
        flags.push_str(";low-confidence");
    }
    if t.skipped > 0 {
        flags.push_str(&format!(";singular-skipped={}", t.skipped));
    }
    Record {
        swept_var: swept,
        value: ber,
        metric: format!("ber/{detector}"),
        std_err,
        n_trials: t.frames,
        flags,
    }
}
