use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;

/// Word offset between consecutive trials on one stream; far beyond what any trial draws.
const TRIAL_STRIDE: u128 = 1 << 40;

/// Counter-based generator for `(point, trial)`: the master seed keys the
/// cipher, the point picks the stream and the trial picks the block offset.
pub fn trial_rng(master: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(point);
    rng.set_word_pos(trial as u128 * TRIAL_STRIDE);
    rng
}

/// Outcome of one simulated frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameOutcome {
    pub errors: u64,
    pub bits: u64,
    /// Channel uses dropped because the channel was singular there.
    pub skipped: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PointTally {
    pub errors: u64,
    pub bits: u64,
    pub frames: u64,
    pub skipped: u64,
}

/// Simulates frames in fixed batches, in parallel within a batch and in
/// index order across batches, stopping after the first batch that brings
/// the error count to `max_errors`. The stopping point depends only on the
/// batch size, never on scheduling.
pub fn run_point<F>(max_frames: usize, batch: usize, max_errors: u64, frame: F) -> Result<PointTally>
where
    F: Fn(u64) -> Result<FrameOutcome> + Sync,
{
    let mut tally = PointTally::default();
    let mut start = 0;
    while start < max_frames {
        let end = (start + batch).min(max_frames);
        let outcomes: Vec<FrameOutcome> = (start..end)
            .into_par_iter()
            .map(|t| frame(t as u64))
            .collect::<Result<_>>()?;
        for o in outcomes {
            tally.errors += o.errors;
            tally.bits += o.bits;
            tally.skipped += o.skipped;
            tally.frames += 1;
        }
        if tally.errors >= max_errors {
            break;
        }
        start = end;
    }
    Ok(tally)
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = trial_rng(7, 3, 11).random();
        let b: u64 = trial_rng(7, 3, 11).random();
        let c: u64 = trial_rng(7, 3, 12).random();
        let d: u64 = trial_rng(7, 4, 11).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn early_stop_lands_on_a_batch_boundary() {
        let t = run_point(1000, 10, 25, |_| {
            Ok(FrameOutcome {
                errors: 1,
                bits: 4,
                skipped: 0,
            })
        })
        .unwrap();
        assert_eq!(t.frames, 30);
        assert_eq!(t.errors, 30);
        let capped = run_point(15, 10, 1000, |_| Ok(FrameOutcome::default())).unwrap();
        assert_eq!(capped.frames, 15);
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(20, 1000);
        assert!(lo < 0.02 && 0.02 < hi);
        let (lo0, hi0) = wilson_interval(0, 100);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.05);
    }
}
