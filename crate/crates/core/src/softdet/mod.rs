//! Soft turbo detection.
//!
//! LLRs in this module are `ln P(bit = 1) / P(bit = 0)`: a positive value
//! favors a `1`. With that orientation the a-priori term of a candidate's
//! metric is `Σ c̃[j]·L_pr[j]` and the fixed spatial LLRs of the separated
//! detector are `+1` for a detected `1` and `−1` for a detected `0`.
//!
//! Every detector output is split as `po = e + pr`. The extrinsic part is
//! clamped to `±LLR_CLAMP` before the sum is formed, so the identity holds
//! exactly in floating point.

mod code;
mod llr;
mod turbo;

pub use code::{encode, siso_decode, CodecConfig, Interleaver, SisoOutput, MAX_ITERATIONS};
pub use llr::{
    exact_map_llr, precancel_inter_group, sosd1_llr, sosd2_llr, symbol_llr, symbol_llr_exact,
    vectoring_llr,
};
pub use turbo::{transmit_bits, turbo_loop, DetectorKind, IterationTrace, TurboOutput};

/// Magnitude limit applied to extrinsic and a-priori LLRs.
pub const LLR_CLAMP: f64 = 50.0;

pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// A-priori, extrinsic and a-posteriori LLRs of one group's `p + q` bits
/// (or any other block of bits).
#[derive(Clone, Debug, PartialEq)]
pub struct BitLlrs {
    pub pr: Vec<f64>,
    pub e: Vec<f64>,
    pub po: Vec<f64>,
}

impl BitLlrs {
    /// Forms `e = clamp(po_raw − pr)` and `po = e + pr`.
    pub fn from_posterior(po_raw: &[f64], pr: &[f64]) -> Self {
        debug_assert_eq!(po_raw.len(), pr.len());
        let pr: Vec<f64> = pr.iter().map(|&x| clamp_llr(x)).collect();
        let e: Vec<f64> = po_raw
            .iter()
            .zip(&pr)
            .map(|(&po, &pr)| clamp_llr(po - pr))
            .collect();
        Self::from_extrinsic(e, pr)
    }

    /// `po = e + pr` for an already-extrinsic output.
    pub fn from_extrinsic(e: Vec<f64>, pr: Vec<f64>) -> Self {
        let po = e.iter().zip(&pr).map(|(e, p)| e + p).collect();
        Self { pr, e, po }
    }

    pub fn len(&self) -> usize {
        self.po.len()
    }

    pub fn is_empty(&self) -> bool {
        self.po.is_empty()
    }

    /// Hard decisions from the a-posteriori values; zero decides `0`.
    pub fn hard(&self) -> Vec<u8> {
        self.po.iter().map(|&l| u8::from(l > 0.0)).collect()
    }
}
