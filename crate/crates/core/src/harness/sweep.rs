use rayon::prelude::*;

use super::config::SimConfig;
use super::results::{Record, RunKind, RunResult};
use super::runner::trial_rng;
use super::{build_channels, dbm_to_watts, one_based_to_index};
use crate::capacity::{
    aggregate_band, ccmc_sm_tone, ccmc_vectoring_tone, dcmc_tone, Alphabet, CapacityEstimate,
    CapacityKind,
};
use crate::channel::BinderChannel;
use crate::energy::{energy_efficiency, group_ld_power};
use crate::error::Result;
use crate::smmod::{PowerPlan, Scheme};

struct Alphabets {
    sm: Option<Alphabet>,
    vectoring: Option<Alphabet>,
}

impl Alphabets {
    fn new(config: &SimConfig, ch: &BinderChannel) -> Result<Self> {
        let dcmc = config.capacity.kinds.contains(&CapacityKind::Dcmc);
        let want = |s: Scheme| dcmc && config.schemes.contains(&s);
        Ok(Self {
            sm: want(Scheme::Sm)
                .then(|| Alphabet::sm(ch.layout(), &config.sm_constellation.build()?))
                .transpose()?,
            vectoring: want(Scheme::Vectoring)
                .then(|| Alphabet::vectoring(ch.layout(), &config.vectoring_constellation.build()?))
                .transpose()?,
        })
    }

    fn get(&self, scheme: Scheme) -> &Alphabet {
        match scheme {
            Scheme::Sm => self.sm.as_ref(),
            Scheme::Vectoring => self.vectoring.as_ref(),
        }
        .expect("alphabet built for every configured scheme")
    }
}

#[allow(clippy::too_many_arguments)]
fn tone_capacity(
    config: &SimConfig,
    ch: &BinderChannel,
    alphabets: &Alphabets,
    tone: usize,
    plan: &PowerPlan,
    kind: CapacityKind,
    point_id: u64,
) -> Result<CapacityEstimate> {
    let sigma_w2 = config.noise_variance();
    let mut rng = trial_rng(config.seed, point_id, tone as u64);
    match (kind, plan.scheme) {
        (CapacityKind::Ccmc, Scheme::Sm) => Ok(ccmc_sm_tone(
            ch,
            tone,
            plan,
            sigma_w2,
            config.capacity.ccmc_samples,
            &mut rng,
        )?
        .estimate()),
        (CapacityKind::Ccmc, Scheme::Vectoring) => ccmc_vectoring_tone(ch, tone, plan, sigma_w2),
        (CapacityKind::Dcmc, scheme) => dcmc_tone(
            ch,
            tone,
            plan,
            sigma_w2,
            alphabets.get(scheme),
            config.capacity.dcmc_draws,
            &mut rng,
        ),
    }
}

fn point_id(loop_idx: usize, power_idx: usize, scheme: Scheme, kind: CapacityKind) -> u64 {
    let s = match scheme {
        Scheme::Sm => 0,
        Scheme::Vectoring => 1,
    };
    let k = match kind {
        CapacityKind::Ccmc => 0,
        CapacityKind::Dcmc => 1,
    };
    ((loop_idx as u64) << 24) | ((power_idx as u64) << 4) | (s << 1) | k
}

/// Band capacity and energy efficiency versus per-group transmit power.
pub fn run_capacity(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let channels = build_channels(config)?;
    let powers = config.power_points_dbm();
    let mut records = Vec::new();
    for (li, ch) in channels.iter().enumerate() {
        let alphabets = Alphabets::new(config, ch)?;
        let k = ch.grid().k_count;
        let m = ch.layout().m_lines;
        let n = ch.layout().n_groups;
        let tones: Vec<usize> = if config.capacity.tones.is_empty() {
            (0..k).collect()
        } else {
            one_based_to_index(&config.capacity.tones)
        };
        let flags = format!("loop_m={}", ch.loop_length());
        for (pi, &dbm) in powers.iter().enumerate() {
            let p = dbm_to_watts(dbm);
            for &scheme in &config.schemes {
                let plan = PowerPlan::new(p, scheme, k, m);
                let ld = group_ld_power(p, scheme, m, &config.ld)?;
                for &kind in &config.capacity.kinds {
                    let id = point_id(li, pi, scheme, kind);
                    let per_tone: Vec<(usize, CapacityEstimate)> = tones
                        .par_iter()
                        .map(|&t| tone_capacity(config, ch, &alphabets, t, &plan, kind, id).map(|e| (t, e)))
                        .collect::<Result<_>>()?;
                    let samples: u64 = per_tone.iter().map(|(_, e)| e.n_samples as u64).sum();
                    let band = aggregate_band(&per_tone, &tones)?;
                    let ee = energy_efficiency(scheme, band.total, n, ld, None)?;
                    records.push(Record {
                        swept_var: dbm,
                        value: band.total,
                        metric: format!("capacity/{scheme}/{kind}"),
                        std_err: band.std_err,
                        n_trials: samples,
                        flags: flags.clone(),
                    });
                    records.push(Record {
                        swept_var: dbm,
                        value: ee.efficiency,
                        metric: format!("ee/{scheme}/{kind}"),
                        std_err: band.std_err / (n as f64 * ld),
                        n_trials: samples,
                        flags: flags.clone(),
                    });
                }
            }
        }
    }
    Ok(RunResult::new(RunKind::Capacity, "power_dbm", config, records))
}

/// Per-tone capacity and energy efficiency on the configured tones versus power.
pub fn run_energy(config: &SimConfig) -> Result<RunResult> {
    config.validate()?;
    let channels = build_channels(config)?;
    let powers = config.power_points_dbm();
    let tones = one_based_to_index(&config.tones);
    let mut records = Vec::new();
    for (li, ch) in channels.iter().enumerate() {
        let alphabets = Alphabets::new(config, ch)?;
        let k = ch.grid().k_count;
        let m = ch.layout().m_lines;
        let n = ch.layout().n_groups;
        for (pi, &dbm) in powers.iter().enumerate() {
            let p = dbm_to_watts(dbm);
            for &scheme in &config.schemes {
                let plan = PowerPlan::new(p, scheme, k, m);
                let ld = group_ld_power(p, scheme, m, &config.ld)?;
                for &kind in &config.capacity.kinds {
                    let id = point_id(li, pi, scheme, kind);
                    let per_tone: Vec<CapacityEstimate> = tones
                        .par_iter()
                        .map(|&t| tone_capacity(config, ch, &alphabets, t, &plan, kind, id))
                        .collect::<Result<_>>()?;
                    for (&t, est) in tones.iter().zip(&per_tone) {
                        let flags = format!(
                            "tone={};f_mhz={};loop_m={}",
                            t + 1,
                            ch.grid().center_hz(t) / 1e6,
                            ch.loop_length()
                        );
                        let ee = energy_efficiency(scheme, est.value, n, ld, Some(k))?;
                        records.push(Record {
                            swept_var: dbm,
                            value: est.value,
                            metric: format!("capacity_tone/{scheme}/{kind}"),
                            std_err: est.std_err,
                            n_trials: est.n_samples as u64,
                            flags: flags.clone(),
                        });
                        records.push(Record {
                            swept_var: dbm,
                            value: ee.efficiency,
                            metric: format!("ee_tone/{scheme}/{kind}"),
                            std_err: est.std_err / (n as f64 * ee.ld_power),
                            n_trials: est.n_samples as u64,
                            flags,
                        });
                    }
                }
            }
        }
    }
    Ok(RunResult::new(RunKind::Energy, "power_dbm", config, records))
}
