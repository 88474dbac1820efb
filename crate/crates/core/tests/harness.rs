use num_complex::Complex64;
use rand::Rng;

use xsm_core::channel::{synth_binder, BinderChannel, ToneGrid};
use xsm_core::detect::observe;
use xsm_core::harness::{
    dbm_to_watts, psd_to_power, read_results, run_ber, run_capacity, run_energy, trial_rng,
    write_results, DetectorName, PowerSetting, Record, RunResult, SimConfig,
};
use xsm_core::linalg::CVector;
use xsm_core::smmod::{
    assemble_frame, demap_frame, map_frame, ActivationSet, Constellation, GroupSymbol, PowerPlan,
    Scheme,
};

fn flag<'a>(r: &'a Record, key: &str) -> Option<&'a str> {
    r.flags
        .split(';')
        .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
}

fn wilson(r: &Record) -> (f64, f64) {
    let (lo, hi) = flag(r, "wilson").unwrap().split_once(':').unwrap();
    (lo.parse().unwrap(), hi.parse().unwrap())
}

fn one(result: &RunResult, metric: &str) -> f64 {
    let rows: Vec<_> = result.series(metric).collect();
    assert_eq!(rows.len(), 1, "{metric}");
    rows[0].value
}

fn short_trials(config: &mut SimConfig, frames: usize) {
    config.trials.max_frames = frames;
    config.trials.batch = 4;
}

#[test]
fn noiseless_links_make_no_errors() {
    let mut config = SimConfig {
        loop_lengths_m: vec![300.0],
        detectors: DetectorName::ALL.to_vec(),
        noise_psd_dbm_hz: -400.0,
        ..SimConfig::default()
    };
    short_trials(&mut config, 8);
    let result = run_ber(&config).unwrap();
    assert_eq!(result.records.len(), 5);
    for r in &result.records {
        assert_eq!(r.value, 0.0, "{}", r.metric);
        assert!(r.flags.contains("low-confidence"), "{}", r.flags);
    }
}

#[test]
fn ber_does_not_rise_with_snr() {
    let mut config = SimConfig {
        loop_lengths_m: vec![300.0],
        schemes: vec![Scheme::Sm],
        detectors: vec![DetectorName::Ml],
        snr_db: vec![0.0, 4.0, 8.0, 12.0, 16.0],
        ..SimConfig::default()
    };
    short_trials(&mut config, 64);
    let result = run_ber(&config).unwrap();
    let rows: Vec<_> = result.series("ber/ml").collect();
    assert_eq!(rows.len(), 5);
    for w in rows.windows(2) {
        assert!(wilson(w[1]).0 <= wilson(w[0]).1, "{} -> {}", w[0].value, w[1].value);
    }
    assert!(rows[4].value < rows[0].value);
}

fn oracle_ml(
    y: &CVector,
    ch: &BinderChannel,
    tone: usize,
    amp: f64,
    act: &ActivationSet,
    cons: &Constellation,
) -> Vec<GroupSymbol> {
    let layout = ch.layout();
    let per_group = act.m_lines() * cons.order();
    let total = per_group.pow(layout.n_groups as u32);
    let mut best = (f64::INFINITY, Vec::new());
    for mut idx in 0..total {
        let mut groups = Vec::with_capacity(layout.n_groups);
        for _ in 0..layout.n_groups {
            let c = idx % per_group;
            idx /= per_group;
            groups.push(GroupSymbol {
                line: c / cons.order(),
                label: c % cons.order(),
            });
        }
        let x = assemble_frame(layout, &groups, cons).unwrap().x;
        let r = y - ch.tone(tone) * x * Complex64::new(amp, 0.0);
        let d = r.norm_squared();
        if d < best.0 {
            best = (d, groups);
        }
    }
    best.1
}

#[test]
fn ml_in_the_harness_matches_a_brute_force_replay() {
    let mut config = SimConfig {
        loop_lengths_m: vec![500.0],
        schemes: vec![Scheme::Sm],
        detectors: vec![DetectorName::Ml],
        ..SimConfig::default()
    };
    config.codec.block_uses = 32;
    config.trials.max_frames = 8;
    config.trials.batch = 4;
    config.trials.max_errors = u64::MAX;
    let result = run_ber(&config).unwrap();
    let reported: u64 = flag(&result.records[0], "errors").unwrap().parse().unwrap();

    let ch = synth_binder(config.grid, config.layout, 500.0, &config.channel, config.channel_seed).unwrap();
    let cons = config.sm_constellation.build().unwrap();
    let act = ActivationSet::new(2).unwrap();
    let p = dbm_to_watts(psd_to_power(-70.0, config.grid.bandwidth_hz()));
    let plan = PowerPlan::new(p, Scheme::Sm, config.grid.k_count, 2);
    let sigma_w2 = config.noise_variance();
    let per_use = 2 * (1 + cons.bits());
    let mut errors = 0u64;
    for trial in 0..8u64 {
        let mut rng = trial_rng(config.seed, 0, trial);
        let tx: Vec<u8> = (0..per_use * 32).map(|_| rng.random_range(0..2)).collect();
        for chunk in tx.chunks(per_use) {
            let x = map_frame(chunk, ch.layout(), &act, &cons).unwrap().x;
            let obs = observe(&ch, 499, &x, plan, sigma_w2, &mut rng);
            let decided = oracle_ml(&obs.y, &ch, 499, plan.per_line_tone_power().sqrt(), &act, &cons);
            let bits = demap_frame(&decided, &act, &cons);
            errors += bits.iter().zip(chunk).filter(|(a, b)| a != b).count() as u64;
        }
    }
    assert!(errors > 0);
    assert_eq!(reported, errors);
}

fn capacity_config() -> SimConfig {
    let mut config = SimConfig {
        loop_lengths_m: vec![300.0],
        power: PowerSetting::Dbm(vec![0.0, 20.0]),
        tones: vec![500, 1000, 1500, 2000],
        ..SimConfig::default()
    };
    config.capacity.tones = config.tones.clone();
    config.capacity.ccmc_samples = 1000;
    config.capacity.dcmc_draws = 1000;
    config
}

#[test]
fn per_tone_efficiency_reaggregates_to_the_band_value() {
    let config = capacity_config();
    let band = run_capacity(&config).unwrap();
    let tones = run_energy(&config).unwrap();
    let k = config.grid.k_count as f64;
    for scheme in ["sm", "vectoring"] {
        for kind in ["ccmc", "dcmc"] {
            for dbm in [0.0, 20.0] {
                let total = band
                    .series(&format!("ee/{scheme}/{kind}"))
                    .find(|r| r.swept_var == dbm)
                    .unwrap()
                    .value;
                let per_tone: Vec<f64> = tones
                    .series(&format!("ee_tone/{scheme}/{kind}"))
                    .filter(|r| r.swept_var == dbm)
                    .map(|r| r.value)
                    .collect();
                assert_eq!(per_tone.len(), 4);
                let summed = per_tone.iter().sum::<f64>() / k;
                assert!((summed - total).abs() <= 1e-9 * total, "{scheme}/{kind}: {summed} vs {total}");
            }
        }
    }
}

#[test]
fn sm_is_more_efficient_at_low_power() {
    let mut config = capacity_config();
    config.power = PowerSetting::Dbm(vec![0.0]);
    let result = run_capacity(&config).unwrap();
    for kind in ["ccmc", "dcmc"] {
        let sm = one(&result, &format!("ee/sm/{kind}"));
        let vec = one(&result, &format!("ee/vectoring/{kind}"));
        assert!(sm > vec, "{kind}: {sm} vs {vec}");
    }
}

#[test]
fn negligible_power_carries_nothing() {
    let mut config = capacity_config();
    config.power = PowerSetting::Dbm(vec![-300.0]);
    let result = run_capacity(&config).unwrap();
    assert_eq!(result.records.len(), 8);
    for r in &result.records {
        let scale = if r.metric.starts_with("ee/") { 1e3 } else { 1.0 };
        assert!(r.value >= 0.0 && r.value < 1e-3 * scale, "{} = {}", r.metric, r.value);
    }
}

#[test]
fn representative_tones_sit_at_their_center_frequencies() {
    let grid = ToneGrid::table_default();
    for (tone, mhz) in [(500, 26.975), (1000, 51.975), (1500, 76.975), (2000, 101.975)] {
        assert!((grid.center_hz(tone - 1) - mhz * 1e6).abs() < 1e-3);
    }
    let mut config = capacity_config();
    config.power = PowerSetting::Dbm(vec![0.0]);
    config.schemes = vec![Scheme::Sm];
    config.capacity.kinds = vec![xsm_core::capacity::CapacityKind::Dcmc];
    let result = run_energy(&config).unwrap();
    let freqs: Vec<f64> = result
        .series("ee_tone/sm/dcmc")
        .map(|r| flag(r, "f_mhz").unwrap().parse().unwrap())
        .collect();
    assert_eq!(freqs.len(), 4);
    for (f, want) in freqs.iter().zip([26.975, 51.975, 76.975, 101.975]) {
        assert!((f - want).abs() < 1e-9, "{f}");
    }
}

#[test]
fn sweep_results_survive_a_round_trip() {
    let mut config = capacity_config();
    config.power = PowerSetting::Dbm(vec![10.0]);
    let result = run_energy(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_results(&result, dir.path()).unwrap();
    assert_eq!(read_results(dir.path()).unwrap(), result);
}
