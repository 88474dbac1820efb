//! Bit-LLR calculators for one tone.

use num_complex::Complex64;

use super::BitLlrs;
use crate::channel::BinderChannel;
use crate::detect::{line_zf_detect, ToneObservation, ZfOutput};
use crate::error::{Error, Result};
use crate::linalg::{log_sum_exp, CVector};
use crate::smmod::{ActivationSet, Constellation};

const VAR_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy)]
enum Marginal {
    MaxLog,
    Exact,
}

/// `po_raw[j]` from candidate metrics indexed by their bit pattern (MSB first).
fn marginalize(metrics: &[f64], nbits: usize, pr: &[f64], how: Marginal) -> Vec<f64> {
    debug_assert_eq!(metrics.len(), 1 << nbits);
    let d: Vec<f64> = metrics
        .iter()
        .enumerate()
        .map(|(c, &m)| {
            m + (0..nbits)
                .filter(|&j| bit_of(c, j, nbits) == 1)
                .map(|j| pr[j])
                .sum::<f64>()
        })
        .collect();
    let half = d.len() / 2;
    let mut ones = Vec::with_capacity(half);
    let mut zeros = Vec::with_capacity(half);
    (0..nbits)
        .map(|j| {
            ones.clear();
            zeros.clear();
            for (c, &v) in d.iter().enumerate() {
                if bit_of(c, j, nbits) == 1 {
                    ones.push(v);
                } else {
                    zeros.push(v);
                }
            }
            match how {
                Marginal::MaxLog => max_of(&ones) - max_of(&zeros),
                Marginal::Exact => log_sum_exp(&ones) - log_sum_exp(&zeros),
            }
        })
        .collect()
}

fn bit_of(c: usize, j: usize, nbits: usize) -> usize {
    (c >> (nbits - 1 - j)) & 1
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn check_pr(pr: &[f64], expected: usize) -> Result<()> {
    if pr.len() != expected {
        return Err(Error::BitLength {
            expected,
            found: pr.len(),
        });
    }
    Ok(())
}

fn group_metrics(
    obs: &ToneObservation,
    ch: &BinderChannel,
    group: usize,
    cons: &Constellation,
    act: &ActivationSet,
) -> Result<Vec<f64>> {
    let layout = ch.layout();
    if obs.y.len() != layout.l_total() {
        return Err(Error::Dimension(format!(
            "observation of length {} for L = {}",
            obs.y.len(),
            layout.l_total()
        )));
    }
    if group >= layout.n_groups {
        return Err(Error::Dimension(format!(
            "group {group} of {}",
            layout.n_groups
        )));
    }
    ch.grid().check_tone(obs.tone)?;
    let m = layout.m_lines;
    let h = ch.block(obs.tone, group, group);
    let y = obs.y.rows(group * m, m);
    let amp = obs.p_tone().sqrt();
    let var = obs.sigma_w2.max(VAR_FLOOR);
    let q = cons.bits();
    let mut metrics = vec![0.0; m << q];
    for v in 0..m {
        let col = h.column(act.line_for_label(v));
        for (label, &s) in cons.points().iter().enumerate() {
            let a = s * amp;
            let dist: f64 = y
                .iter()
                .zip(col.iter())
                .map(|(&yi, &hi)| (yi - hi * a).norm_sqr())
                .sum();
            metrics[(v << q) | label] = -dist / var;
        }
    }
    Ok(metrics)
}

/// Max-log joint LLRs of group `group`'s `p + q` bits over its own `M×M`
/// block; FEXT from other groups is treated as noise.
pub fn sosd1_llr(
    obs: &ToneObservation,
    ch: &BinderChannel,
    group: usize,
    cons: &Constellation,
    act: &ActivationSet,
    pr: &[f64],
) -> Result<BitLlrs> {
    let nbits = act.bits() + cons.bits();
    check_pr(pr, nbits)?;
    let metrics = group_metrics(obs, ch, group, cons, act)?;
    let pr = clamped(pr);
    Ok(BitLlrs::from_posterior(
        &marginalize(&metrics, nbits, &pr, Marginal::MaxLog),
        &pr,
    ))
}

/// Exact MAP counterpart of [`sosd1_llr`] using log-sum-exp marginals.
pub fn exact_map_llr(
    obs: &ToneObservation,
    ch: &BinderChannel,
    group: usize,
    cons: &Constellation,
    act: &ActivationSet,
    pr: &[f64],
) -> Result<BitLlrs> {
    let nbits = act.bits() + cons.bits();
    check_pr(pr, nbits)?;
    let metrics = group_metrics(obs, ch, group, cons, act)?;
    let pr = clamped(pr);
    Ok(BitLlrs::from_posterior(
        &marginalize(&metrics, nbits, &pr, Marginal::Exact),
        &pr,
    ))
}

fn clamped(pr: &[f64]) -> Vec<f64> {
    pr.iter().map(|&x| super::clamp_llr(x)).collect()
}

/// Removes, from each group's receive rows, the FEXT of the other groups as
/// reconstructed from line-detection + ZF hard decisions.
pub fn precancel_inter_group(
    obs: &ToneObservation,
    ch: &BinderChannel,
    cons: &Constellation,
) -> Result<ToneObservation> {
    let (dec, _) = line_zf_detect(obs, ch, cons)?;
    let layout = ch.layout();
    let h = ch.tone(obs.tone);
    let amp = obs.p_tone().sqrt();
    let m = layout.m_lines;
    let mut y: CVector = obs.y.clone();
    for n in 0..layout.n_groups {
        for (g, sym) in dec.groups.iter().enumerate() {
            if g == n {
                continue;
            }
            let col = layout.position(g, sym.line);
            let a = cons.point(sym.label) * amp;
            for r in n * m..(n + 1) * m {
                y[r] -= h[(r, col)] * a;
            }
        }
    }
    Ok(ToneObservation { y, ..obs.clone() })
}

fn symbol_metrics(s_soft: Complex64, var: f64, cons: &Constellation) -> Vec<f64> {
    let var = var.max(VAR_FLOOR);
    cons.points()
        .iter()
        .map(|&s| -(s_soft - s).norm_sqr() / var)
        .collect()
}

/// Max-log LLRs of the `q` symbol bits from a soft estimate with noise variance `var`.
pub fn symbol_llr(s_soft: Complex64, var: f64, cons: &Constellation, pr: &[f64]) -> Result<BitLlrs> {
    check_pr(pr, cons.bits())?;
    let pr = clamped(pr);
    let m = symbol_metrics(s_soft, var, cons);
    Ok(BitLlrs::from_posterior(
        &marginalize(&m, cons.bits(), &pr, Marginal::MaxLog),
        &pr,
    ))
}

/// Exact MAP counterpart of [`symbol_llr`].
pub fn symbol_llr_exact(
    s_soft: Complex64,
    var: f64,
    cons: &Constellation,
    pr: &[f64],
) -> Result<BitLlrs> {
    check_pr(pr, cons.bits())?;
    let pr = clamped(pr);
    let m = symbol_metrics(s_soft, var, cons);
    Ok(BitLlrs::from_posterior(
        &marginalize(&m, cons.bits(), &pr, Marginal::Exact),
        &pr,
    ))
}

/// Separated soft detection of one group: the detected line fixes the
/// spatial extrinsic LLRs at `±1`, the ZF estimate gives the symbol LLRs.
pub fn sosd2_llr(
    line: usize,
    s_soft: Complex64,
    post_noise_var: f64,
    cons: &Constellation,
    act: &ActivationSet,
    pr: &[f64],
) -> Result<BitLlrs> {
    let p = act.bits();
    check_pr(pr, p + cons.bits())?;
    if line >= act.m_lines() {
        return Err(Error::LineOutOfRange {
            line,
            m_lines: act.m_lines(),
        });
    }
    let v = act.label_for_line(line);
    let mut e: Vec<f64> = (0..p)
        .map(|j| if (v >> (p - 1 - j)) & 1 == 1 { 1.0 } else { -1.0 })
        .collect();
    let sym = symbol_llr(s_soft, post_noise_var, cons, &pr[p..])?;
    e.extend(sym.e);
    Ok(BitLlrs::from_extrinsic(e, clamped(pr)))
}

/// Per-line symbol LLRs after full ZF equalization, concatenated in line order.
pub fn vectoring_llr(zf: &ZfOutput, cons: &Constellation, pr: &[f64]) -> Result<BitLlrs> {
    let q = cons.bits();
    check_pr(pr, q * zf.s_soft.len())?;
    let mut out = BitLlrs {
        pr: Vec::with_capacity(pr.len()),
        e: Vec::with_capacity(pr.len()),
        po: Vec::with_capacity(pr.len()),
    };
    for (i, (&s, &var)) in zf.s_soft.iter().zip(&zf.post_noise_var).enumerate() {
        let b = symbol_llr(s, var, cons, &pr[i * q..(i + 1) * q])?;
        out.pr.extend(b.pr);
        out.e.extend(b.e);
        out.po.extend(b.po);
    }
    Ok(out)
}
