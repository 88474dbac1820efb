//! Iterative exchange of extrinsic LLRs between a soft detector and the
//! BCJR decoder over one code block spread across several channel uses.

use serde::{Deserialize, Serialize};

use super::code::{encode, siso_decode, CodecConfig};
use super::llr::{precancel_inter_group, sosd1_llr, sosd2_llr, vectoring_llr};
use crate::channel::BinderChannel;
use crate::detect::{line_zf_detect, zf_vectoring_soft, ToneObservation, ZfOutput};
use crate::error::{Error, Result};
use crate::smmod::{ActivationSet, Bit, Constellation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    /// Joint max-log over each group's own block.
    Sosd1,
    /// As `Sosd1`, after subtracting other groups' FEXT reconstructed from hard decisions.
    Sosd1Precancel,
    /// Line detection + ZF with fixed spatial LLRs.
    Sosd2,
    /// Full ZF with per-line symbol LLRs; every line transmits.
    VectoringZf,
}

impl DetectorKind {
    /// Coded bits carried by one channel use.
    pub fn bits_per_use(self, ch: &BinderChannel, cons: &Constellation) -> usize {
        let layout = ch.layout();
        match self {
            Self::VectoringZf => layout.l_total() * cons.bits(),
            _ => layout.n_groups * (layout.spatial_bits() + cons.bits()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sosd1 => "sosd1",
            Self::Sosd1Precancel => "sosd1-precancel",
            Self::Sosd2 => "sosd2",
            Self::VectoringZf => "vectoring-zf",
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Channel-order bits for one code block: encode, interleave, zero-pad to `total_bits`.
pub fn transmit_bits(info: &[Bit], codec: &CodecConfig, total_bits: usize) -> Result<Vec<Bit>> {
    if info.len() != codec.info_bits {
        return Err(Error::BitLength {
            expected: codec.info_bits,
            found: info.len(),
        });
    }
    if total_bits < codec.coded_len() {
        return Err(Error::CodeLength {
            expected: codec.coded_len(),
            found: total_bits,
        });
    }
    let mut bits = codec.interleaver().interleave(&encode(info));
    bits.resize(total_bits, 0);
    Ok(bits)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub info_hard: Vec<Bit>,
    /// Mean magnitude of the detector's extrinsic LLRs in this iteration.
    pub detector_mean_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TurboOutput {
    pub info_hard: Vec<Bit>,
    pub trace: Vec<IterationTrace>,
}

enum Prepared {
    Joint(Vec<ToneObservation>),
    Separated(Vec<(Vec<usize>, ZfOutput)>),
    Vectoring(Vec<ZfOutput>),
}

/// Runs `codec.iterations` detector/decoder passes over the channel uses in `obs`.
pub fn turbo_loop(
    obs: &[ToneObservation],
    ch: &BinderChannel,
    cons: &Constellation,
    act: &ActivationSet,
    kind: DetectorKind,
    codec: &CodecConfig,
) -> Result<TurboOutput> {
    codec.validate()?;
    let per_use = kind.bits_per_use(ch, cons);
    let total = per_use * obs.len();
    if total < codec.coded_len() {
        return Err(Error::CodeLength {
            expected: codec.coded_len(),
            found: total,
        });
    }
    let prepared = match kind {
        DetectorKind::Sosd1 => Prepared::Joint(obs.to_vec()),
        DetectorKind::Sosd1Precancel => Prepared::Joint(
            obs.iter()
                .map(|o| precancel_inter_group(o, ch, cons))
                .collect::<Result<_>>()?,
        ),
        DetectorKind::Sosd2 => Prepared::Separated(
            obs.iter()
                .map(|o| {
                    line_zf_detect(o, ch, cons)
                        .map(|(d, zf)| (d.groups.iter().map(|g| g.line).collect(), zf))
                })
                .collect::<Result<_>>()?,
        ),
        DetectorKind::VectoringZf => Prepared::Vectoring(
            obs.iter()
                .map(|o| zf_vectoring_soft(o, ch))
                .collect::<Result<_>>()?,
        ),
    };
    let group_bits = act.bits() + cons.bits();
    let n_groups = ch.layout().n_groups;
    let il = codec.interleaver();
    let mut pr = vec![0.0; total];
    let mut det_e = vec![0.0; total];
    let mut trace = Vec::with_capacity(codec.iterations);
    for _ in 0..codec.iterations {
        for u in 0..obs.len() {
            let base = u * per_use;
            match &prepared {
                Prepared::Joint(o) => {
                    for g in 0..n_groups {
                        let r = base + g * group_bits..base + (g + 1) * group_bits;
                        let b = sosd1_llr(&o[u], ch, g, cons, act, &pr[r.clone()])?;
                        det_e[r].copy_from_slice(&b.e);
                    }
                }
                Prepared::Separated(v) => {
                    let (lines, zf) = &v[u];
                    for g in 0..n_groups {
                        let r = base + g * group_bits..base + (g + 1) * group_bits;
                        let b = sosd2_llr(
                            lines[g],
                            zf.s_soft[g],
                            zf.post_noise_var[g],
                            cons,
                            act,
                            &pr[r.clone()],
                        )?;
                        det_e[r].copy_from_slice(&b.e);
                    }
                }
                Prepared::Vectoring(v) => {
                    let r = base..base + per_use;
                    let b = vectoring_llr(&v[u], cons, &pr[r.clone()])?;
                    det_e[r].copy_from_slice(&b.e);
                }
            }
        }
        let coded = il.deinterleave(&det_e[..codec.coded_len()]);
        let out = siso_decode(&coded, codec.info_bits, None)?;
        let fed_back = il.interleave(&out.coded_e);
        pr[..codec.coded_len()].copy_from_slice(&fed_back);
        let mean_abs = det_e.iter().map(|x| x.abs()).sum::<f64>() / total as f64;
        trace.push(IterationTrace {
            info_hard: out.hard_info(),
            detector_mean_abs: mean_abs,
        });
    }
    let info_hard = trace.last().map(|t| t.info_hard.clone()).unwrap_or_default();
    Ok(TurboOutput { info_hard, trace })
}
