use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xsm_core::channel::{cwdd_margin, load_channel, save_channel, synth_binder, validate_cwdd};
use xsm_core::harness::{
    run_ber, run_capacity, run_energy, timed, write_results, DetectorName, PowerSetting,
    RunResult, SimConfig,
};
use xsm_core::smmod::Scheme;
use xsm_core::Error;

#[derive(Parser)]
#[command(name = "xsm", version, about = "Grouped spatial modulation over DSL binders")]
struct Cli {
    /// JSON configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (sweeps) or file (`channel gen`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or inspect channel files.
    #[command(subcommand)]
    Channel(ChannelCmd),
    /// BER versus loop length, SNR or bandwidth.
    Ber(SweepArgs),
    /// Band capacity and energy efficiency versus transmit power.
    Capacity(SweepArgs),
    /// Per-tone capacity and energy efficiency versus transmit power.
    Energy(SweepArgs),
    /// Print the version.
    Version,
}

#[derive(Subcommand)]
enum ChannelCmd {
    /// Synthesize a binder channel and save it.
    Gen {
        #[arg(long = "loop-m")]
        loop_m: Option<f64>,
    },
    /// Summarize a saved channel.
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    scheme: Vec<Scheme>,
    #[arg(long, value_delimiter = ',', value_parser = parse_detector)]
    detector: Vec<DetectorName>,
    #[arg(long = "loop-m", value_delimiter = ',')]
    loop_m: Vec<f64>,
    #[arg(long = "power-dbm", value_delimiter = ',', allow_negative_numbers = true)]
    power_dbm: Vec<f64>,
    #[arg(long = "psd-dbm-hz", allow_negative_numbers = true)]
    psd_dbm_hz: Option<f64>,
    #[arg(long = "bandwidth-mhz")]
    bandwidth_mhz: Option<f64>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "sm" => Ok(Scheme::Sm),
        "vectoring" => Ok(Scheme::Vectoring),
        _ => Err(format!("unknown scheme {s:?} (expected sm or vectoring)")),
    }
}

fn parse_detector(s: &str) -> Result<DetectorName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(cli: &Cli) -> Result<SimConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => SimConfig::load(path).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn apply_sweep_args(config: &mut SimConfig, args: &SweepArgs) -> Result<(), Error> {
    if !args.scheme.is_empty() {
        config.schemes = args.scheme.clone();
    }
    if !args.detector.is_empty() {
        config.detectors = args.detector.clone();
    }
    if !args.loop_m.is_empty() {
        config.loop_lengths_m = args.loop_m.clone();
    }
    match (args.power_dbm.is_empty(), args.psd_dbm_hz) {
        (false, Some(_)) => {
            return Err(Error::Config("give either --power-dbm or --psd-dbm-hz".into()));
        }
        (false, None) => config.power = PowerSetting::Dbm(args.power_dbm.clone()),
        (true, Some(psd)) => config.power = PowerSetting::PsdDbmHz(psd),
        (true, None) => {}
    }
    if let Some(bw) = args.bandwidth_mhz {
        config.bandwidths_mhz = vec![bw];
    }
    config.validate()
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Error> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::Config(e.to_string())),
    }
}

fn sweep(cli: &Cli, args: &SweepArgs, run: fn(&SimConfig) -> Result<RunResult, Error>) -> Result<(), Error> {
    let mut config = load_config(cli)?;
    apply_sweep_args(&mut config, args)?;
    let result = in_pool(cli.threads, || timed(|| run(&config)))??;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    write_results(&result, &dir)?;
    for r in &result.records {
        println!("{:<24} {:>12} {:>14.6e}  {}", r.metric, r.swept_var, r.value, r.flags);
    }
    println!(
        "wrote {} rows to {} in {:.1} s",
        result.records.len(),
        dir.display(),
        result.meta.wall_time_s
    );
    Ok(())
}

fn channel_gen(cli: &Cli, loop_m: Option<f64>) -> Result<(), Error> {
    let config = load_config(cli)?;
    config.validate()?;
    let loop_m = loop_m
        .or_else(|| config.loop_lengths_m.first().copied())
        .ok_or_else(|| Error::Config("no loop length given".into()))?;
    let ch = synth_binder(config.grid, config.layout, loop_m, &config.channel, config.channel_seed)?;
    let path = cli.out.clone().unwrap_or_else(|| PathBuf::from("channel.xsmch"));
    save_channel(&ch, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn channel_inspect(path: &Path) -> Result<(), Error> {
    let ch = load_channel(path)?;
    let g = ch.grid();
    let l = ch.layout();
    println!("tones      {} x {} kHz from {} MHz", g.k_count, g.delta_f / 1e3, g.f_start / 1e6);
    println!("layout     {} groups x {} lines", l.n_groups, l.m_lines);
    println!("loop       {} m", ch.loop_length());
    let report = validate_cwdd(&ch, g.center_hz(g.k_count - 1));
    let mut worst = f64::INFINITY;
    for tone in 0..g.k_count {
        worst = cwdd_margin(&ch, tone)?.into_iter().fold(worst, f64::min);
    }
    println!(
        "dominance  {} ({} violations over {} tones, worst margin {:.2} dB)",
        if report.holds { "holds" } else { "violated" },
        report.violations.len(),
        report.tones_checked,
        worst
    );
    if let Some(&(tone, col)) = report.violations.first() {
        println!("first violation at tone {} column {}", tone + 1, col + 1);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Version => {
            println!("xsm {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        Cmd::Channel(ChannelCmd::Gen { loop_m }) => channel_gen(&cli, *loop_m),
        Cmd::Channel(ChannelCmd::Inspect { path }) => channel_inspect(path),
        Cmd::Ber(args) => sweep(&cli, args, run_ber),
        Cmd::Capacity(args) => sweep(&cli, args, run_capacity),
        Cmd::Energy(args) => sweep(&cli, args, run_energy),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
