//! Hard detectors for one tone: exhaustive joint ML, CWDD line-activation
//! detection followed by a truncated ZF crosstalk canceller, and the full
//! `L×L` ZF receiver used for vectoring.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{BinderChannel, BinderLayout};
use crate::error::{Error, Result};
use crate::linalg::{checked_inverse, complex_gaussian, CMatrix, CVector};
use crate::smmod::{ActivationSet, Constellation, GroupSymbol, PowerPlan};

/// Largest joint candidate set `ml_detect` will enumerate.
pub const ML_CANDIDATE_LIMIT: u128 = 10_000_000;

/// Received vector on one tone together with the power and noise it was
/// observed under.
#[derive(Clone, Debug, PartialEq)]
pub struct ToneObservation {
    pub y: CVector,
    pub tone: usize,
    pub plan: PowerPlan,
    /// Noise variance per complex dimension.
    pub sigma_w2: f64,
}

impl ToneObservation {
    /// Per-line, per-tone transmit power `P_t/K`.
    pub fn p_tone(&self) -> f64 {
        self.plan.per_line_tone_power()
    }
}

/// `y = √P·H·x + w` with `w ~ CN(0, σ²I)`; `sigma_w2 = 0` gives a noiseless observation.
pub fn observe<R: Rng + ?Sized>(
    ch: &BinderChannel,
    tone: usize,
    x: &CVector,
    plan: PowerPlan,
    sigma_w2: f64,
    rng: &mut R,
) -> ToneObservation {
    let amp = plan.per_line_tone_power().sqrt();
    let mut y = ch.tone(tone) * x * Complex64::new(amp, 0.0);
    if sigma_w2 > 0.0 {
        for v in y.iter_mut() {
            *v += complex_gaussian(rng, sigma_w2);
        }
    }
    ToneObservation {
        y,
        tone,
        plan,
        sigma_w2,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardDecision {
    pub groups: Vec<GroupSymbol>,
    /// Squared residual of the decision, where the detector computes one.
    pub metric: f64,
}

fn check_dims(obs: &ToneObservation, ch: &BinderChannel) -> Result<()> {
    let l = ch.layout().l_total();
    if obs.y.len() != l {
        return Err(Error::Dimension(format!(
            "observation of length {} for L = {l}",
            obs.y.len()
        )));
    }
    ch.grid().check_tone(obs.tone)
}

/// Exhaustive ML search `argmin ‖y − √P·H·x‖²` over all `(JM)^N` frames.
///
/// Candidates are ordered lexicographically by group, then line, then symbol
/// label; among equal metrics the first candidate in that order wins.
pub fn ml_detect(
    obs: &ToneObservation,
    ch: &BinderChannel,
    cons: &Constellation,
    act: &ActivationSet,
) -> Result<HardDecision> {
    check_dims(obs, ch)?;
    let layout = ch.layout();
    let n = layout.n_groups;
    let per_group = act.m_lines() * cons.order();
    let total = (per_group as u128).pow(n as u32);
    if total > ML_CANDIDATE_LIMIT {
        return Err(Error::SearchTooLarge {
            candidates: total,
            limit: ML_CANDIDATE_LIMIT,
        });
    }
    let l = layout.l_total();
    let h = ch.tone(obs.tone);
    let amp = obs.p_tone().sqrt();

    // contributions[g][line * J + label] = √P·H[:, pos(g, line)]·s_label
    let contributions: Vec<Vec<Vec<Complex64>>> = (0..n)
        .map(|g| {
            (0..act.m_lines())
                .flat_map(|line| {
                    let col = h.column(layout.position(g, line));
                    cons.points()
                        .iter()
                        .map(move |&s| col.iter().map(|&c| c * s * amp).collect())
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect();

    let mut digits = vec![0usize; n];
    let mut best = (f64::INFINITY, digits.clone());
    let mut residual = vec![Complex64::new(0.0, 0.0); l];
    for _ in 0..total {
        residual.copy_from_slice(obs.y.as_slice());
        for (g, &d) in digits.iter().enumerate() {
            for (r, c) in residual.iter_mut().zip(&contributions[g][d]) {
                *r -= c;
            }
        }
        let metric: f64 = residual.iter().map(|r| r.norm_sqr()).sum();
        if metric < best.0 {
            best = (metric, digits.clone());
        }
        // Advance the mixed-radix counter, last group fastest.
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < per_group {
                break;
            }
            *d = 0;
        }
    }

    let j = cons.order();
    Ok(HardDecision {
        groups: best
            .1
            .iter()
            .map(|&d| GroupSymbol {
                line: d / j,
                label: d % j,
            })
            .collect(),
        metric: best.0,
    })
}

/// Per group, the line with the largest received power `|y|²`; ties go to the
/// lower line.
pub fn line_detect(obs: &ToneObservation, layout: &BinderLayout) -> Vec<usize> {
    (0..layout.n_groups)
        .map(|g| {
            let mut best = 0;
            let mut best_p = f64::NEG_INFINITY;
            for line in 0..layout.m_lines {
                let p = obs.y[layout.position(g, line)].norm_sqr();
                if p > best_p {
                    best_p = p;
                    best = line;
                }
            }
            best
        })
        .collect()
}

/// Rows of `y` and rows/columns of `H` at the active positions `(g, lines[g])`.
pub fn truncate(
    obs: &ToneObservation,
    ch: &BinderChannel,
    lines: &[usize],
) -> Result<(CVector, CMatrix)> {
    check_dims(obs, ch)?;
    let layout = ch.layout();
    if lines.len() != layout.n_groups {
        return Err(Error::Dimension(format!(
            "{} active lines for {} groups",
            lines.len(),
            layout.n_groups
        )));
    }
    let mut pos = Vec::with_capacity(lines.len());
    for (g, &line) in lines.iter().enumerate() {
        if line >= layout.m_lines {
            return Err(Error::LineOutOfRange {
                line,
                m_lines: layout.m_lines,
            });
        }
        pos.push(layout.position(g, line));
    }
    let h = ch.tone(obs.tone);
    let y = CVector::from_iterator(pos.len(), pos.iter().map(|&p| obs.y[p]));
    let ht = CMatrix::from_fn(pos.len(), pos.len(), |i, j| h[(pos[i], pos[j])]);
    Ok((y, ht))
}

/// Output of a ZF crosstalk canceller.
#[derive(Clone, Debug, PartialEq)]
pub struct ZfOutput {
    /// Soft symbol estimates `(1/√P)·H⁻¹·y`.
    pub s_soft: Vec<Complex64>,
    /// Noise variance of each estimate, `(σ²/P)·[H⁻¹H⁻ᴴ]_{nn}`.
    pub post_noise_var: Vec<f64>,
}

/// Linear ZF crosstalk canceller. `tone` labels a singular-channel error.
pub fn zf_cancel(
    y: &CVector,
    h: &CMatrix,
    p_tone: f64,
    sigma_w2: f64,
    tone: usize,
) -> Result<ZfOutput> {
    if y.len() != h.nrows() {
        return Err(Error::Dimension(format!(
            "{}-vector against {}x{} matrix",
            y.len(),
            h.nrows(),
            h.ncols()
        )));
    }
    let inv = checked_inverse(h, tone)?;
    let s = &inv * y / Complex64::new(p_tone.sqrt(), 0.0);
    let post_noise_var = inv
        .row_iter()
        .map(|row| sigma_w2 / p_tone * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    Ok(ZfOutput {
        s_soft: s.iter().copied().collect(),
        post_noise_var,
    })
}

/// Line detection, truncation, ZF cancellation and nearest-point slicing.
pub fn line_zf_detect(
    obs: &ToneObservation,
    ch: &BinderChannel,
    cons: &Constellation,
) -> Result<(HardDecision, ZfOutput)> {
    let lines = line_detect(obs, ch.layout());
    let (yt, ht) = truncate(obs, ch, &lines)?;
    let zf = zf_cancel(&yt, &ht, obs.p_tone(), obs.sigma_w2, obs.tone)?;
    let groups = lines
        .iter()
        .zip(&zf.s_soft)
        .map(|(&line, &s)| GroupSymbol {
            line,
            label: cons.nearest(s),
        })
        .collect();
    Ok((
        HardDecision {
            groups,
            metric: f64::NAN,
        },
        zf,
    ))
}

/// Full `L×L` ZF equalization, as used by vectoring where every line is active.
pub fn zf_vectoring_soft(obs: &ToneObservation, ch: &BinderChannel) -> Result<ZfOutput> {
    check_dims(obs, ch)?;
    zf_cancel(&obs.y, ch.tone(obs.tone), obs.p_tone(), obs.sigma_w2, obs.tone)
}

/// Nearest-point decisions on every line after full ZF equalization.
pub fn zf_vectoring(
    obs: &ToneObservation,
    ch: &BinderChannel,
    cons: &Constellation,
) -> Result<Vec<usize>> {
    let zf = zf_vectoring_soft(obs, ch)?;
    Ok(zf.s_soft.iter().map(|&s| cons.nearest(s)).collect())
}
