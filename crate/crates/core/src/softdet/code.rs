//! Rate-1/2 recursive systematic convolutional code with generators
//! `(1, 5/7)` in octal, its BCJR decoder and a seeded block interleaver.
//!
//! The encoder is terminated with two tail steps, so `k` information bits
//! produce `2(k + 2)` coded bits, interleaved as `u₀ p₀ u₁ p₁ …`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clamp_llr;
use crate::error::{Error, Result};
use crate::linalg::log_sum_exp;
use crate::smmod::Bit;

const STATES: usize = 4;
const TAIL: usize = 2;
pub const MAX_ITERATIONS: usize = 32;

/// Feedback bit `a = u ⊕ s₁ ⊕ s₂` (polynomial 7) and parity `a ⊕ s₂` (polynomial 5).
fn step(state: usize, u: usize) -> (usize, usize) {
    let s1 = (state >> 1) & 1;
    let s2 = state & 1;
    let a = u ^ s1 ^ s2;
    let parity = a ^ s2;
    ((a << 1) | s1, parity)
}

/// Input that drives the feedback bit to zero, used for termination.
fn tail_input(state: usize) -> usize {
    ((state >> 1) & 1) ^ (state & 1)
}

/// Block code and interleaver parameters shared by transmitter and receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodecConfig {
    pub info_bits: usize,
    pub interleaver_seed: u64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_iterations() -> usize {
    4
}

impl CodecConfig {
    pub fn new(info_bits: usize, interleaver_seed: u64, iterations: usize) -> Result<Self> {
        let c = Self {
            info_bits,
            interleaver_seed,
            iterations,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_bits == 0 {
            return Err(Error::InvalidParameter("code block needs at least one information bit".into()));
        }
        if !(1..=MAX_ITERATIONS).contains(&self.iterations) {
            return Err(Error::InvalidParameter(format!(
                "iterations must lie in 1..={MAX_ITERATIONS}, got {}",
                self.iterations
            )));
        }
        Ok(())
    }

    pub fn coded_len(&self) -> usize {
        2 * (self.info_bits + TAIL)
    }

    pub fn interleaver(&self) -> Interleaver {
        Interleaver::new(self.coded_len(), self.interleaver_seed)
    }

    /// Largest code whose coded block fits in `capacity_bits`.
    pub fn fitting(capacity_bits: usize, interleaver_seed: u64, iterations: usize) -> Result<Self> {
        let info = (capacity_bits / 2).saturating_sub(TAIL);
        Self::new(info, interleaver_seed, iterations)
    }
}

/// Terminated `(1, 5/7)` encoding.
pub fn encode(info: &[Bit]) -> Vec<Bit> {
    let mut out = Vec::with_capacity(2 * (info.len() + TAIL));
    let mut state = 0;
    let inputs = info
        .iter()
        .map(|&b| Some(b as usize))
        .chain(std::iter::repeat_n(None, TAIL));
    for u in inputs {
        let u = u.unwrap_or_else(|| tail_input(state));
        let (next, parity) = step(state, u);
        out.push(u as Bit);
        out.push(parity as Bit);
        state = next;
    }
    debug_assert_eq!(state, 0);
    out
}

/// Uniform random permutation of a fixed length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut inverse = vec![0; len];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        Self { perm, inverse }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `out[i] = x[π(i)]`.
    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len());
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.perm.len());
        self.inverse.iter().map(|&i| x[i]).collect()
    }
}

/// Decoder output. Coded-bit vectors follow the `u₀ p₀ u₁ p₁ …` order.
#[derive(Clone, Debug, PartialEq)]
pub struct SisoOutput {
    pub info_po: Vec<f64>,
    pub info_e: Vec<f64>,
    pub coded_po: Vec<f64>,
    pub coded_e: Vec<f64>,
}

impl SisoOutput {
    pub fn hard_info(&self) -> Vec<Bit> {
        self.info_po.iter().map(|&l| Bit::from(l > 0.0)).collect()
    }
}

fn max_star(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + (-(a - b).abs()).exp().ln_1p()
}

/// Log-MAP BCJR over the terminated trellis.
///
/// `coded` holds channel LLRs (`ln P(1)/P(0)`) of all `2(k+2)` coded bits;
/// `info_pr` optionally adds a-priori LLRs on the `k` information bits.
pub fn siso_decode(coded: &[f64], info_bits: usize, info_pr: Option<&[f64]>) -> Result<SisoOutput> {
    let steps = info_bits + TAIL;
    if coded.len() != 2 * steps {
        return Err(Error::CodeLength {
            expected: 2 * steps,
            found: coded.len(),
        });
    }
    if let Some(pr) = info_pr {
        if pr.len() != info_bits {
            return Err(Error::BitLength {
                expected: info_bits,
                found: pr.len(),
            });
        }
    }
    let lc: Vec<f64> = coded.iter().map(|&x| clamp_llr(x)).collect();
    let la = |k: usize| -> f64 {
        match info_pr {
            Some(pr) if k < info_bits => clamp_llr(pr[k]),
            _ => 0.0,
        }
    };
    let allowed = |k: usize, state: usize, u: usize| k < info_bits || u == tail_input(state);
    let gamma = |k: usize, u: usize, parity: usize| {
        u as f64 * (la(k) + lc[2 * k]) + parity as f64 * lc[2 * k + 1]
    };

    let ninf = f64::NEG_INFINITY;
    let mut alpha = vec![[ninf; STATES]; steps + 1];
    alpha[0][0] = 0.0;
    for k in 0..steps {
        for s in 0..STATES {
            if alpha[k][s] == ninf {
                continue;
            }
            for u in 0..2 {
                if !allowed(k, s, u) {
                    continue;
                }
                let (next, parity) = step(s, u);
                alpha[k + 1][next] = max_star(alpha[k + 1][next], alpha[k][s] + gamma(k, u, parity));
            }
        }
        let norm = alpha[k + 1].iter().copied().fold(ninf, f64::max);
        for a in alpha[k + 1].iter_mut() {
            *a -= norm;
        }
    }
    let mut beta = vec![[ninf; STATES]; steps + 1];
    beta[steps][0] = 0.0;
    for k in (0..steps).rev() {
        for s in 0..STATES {
            for u in 0..2 {
                if !allowed(k, s, u) {
                    continue;
                }
                let (next, parity) = step(s, u);
                beta[k][s] = max_star(beta[k][s], beta[k + 1][next] + gamma(k, u, parity));
            }
        }
        let norm = beta[k].iter().copied().fold(ninf, f64::max);
        for b in beta[k].iter_mut() {
            *b -= norm;
        }
    }

    let mut info_po = Vec::with_capacity(info_bits);
    let mut info_e = Vec::with_capacity(info_bits);
    let mut coded_po = Vec::with_capacity(2 * steps);
    let mut terms = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for k in 0..steps {
        for t in terms.iter_mut() {
            t.clear();
        }
        for s in 0..STATES {
            for u in 0..2 {
                if !allowed(k, s, u) {
                    continue;
                }
                let (next, parity) = step(s, u);
                let v = alpha[k][s] + gamma(k, u, parity) + beta[k + 1][next];
                terms[u].push(v);
                terms[2 + parity].push(v);
            }
        }
        let sys = log_sum_exp(&terms[1]) - log_sum_exp(&terms[0]);
        let par = log_sum_exp(&terms[3]) - log_sum_exp(&terms[2]);
        let sys = if sys.is_nan() { 0.0 } else { sys };
        let par = if par.is_nan() { 0.0 } else { par };
        if k < info_bits {
            info_po.push(sys);
            info_e.push(sys - la(k) - lc[2 * k]);
        }
        coded_po.push(sys);
        coded_po.push(par);
    }
    let coded_e = coded_po
        .iter()
        .zip(&lc)
        .map(|(&po, &c)| clamp_llr(po - c))
        .collect();
    Ok(SisoOutput {
        info_po,
        info_e,
        coded_po,
        coded_e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn encoder_is_systematic_and_terminates() {
        let info = [1, 0, 1, 1, 0, 0, 1];
        let c = encode(&info);
        assert_eq!(c.len(), 2 * (info.len() + 2));
        let sys: Vec<Bit> = c.iter().step_by(2).copied().take(info.len()).collect();
        assert_eq!(sys, info);
    }

    #[test]
    fn impulse_response_matches_generators() {
        // feedback 1+D+D², feedforward 1+D²: parity of a single 1 is 1 1 1 0 1 1 0 1 1 ...
        let mut info = vec![0; 9];
        info[0] = 1;
        let c = encode(&info);
        let parity: Vec<Bit> = c.iter().skip(1).step_by(2).copied().take(9).collect();
        assert_eq!(parity, vec![1, 1, 1, 0, 1, 1, 0, 1, 1]);
    }

    #[test]
    fn interleaver_round_trips() {
        let il = Interleaver::new(37, 9);
        let x: Vec<usize> = (0..37).collect();
        let y = il.interleave(&x);
        assert_ne!(x, y);
        assert_eq!(il.deinterleave(&y), x);
        assert_eq!(il, Interleaver::new(37, 9));
    }

    #[test]
    fn decoder_recovers_a_clean_codeword() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let info: Vec<Bit> = (0..64).map(|_| rng.random_range(0..2)).collect();
        let llr: Vec<f64> = encode(&info).iter().map(|&b| if b == 1 { 4.0 } else { -4.0 }).collect();
        let out = siso_decode(&llr, info.len(), None).unwrap();
        assert_eq!(out.hard_info(), info);
        assert_eq!(out.coded_po.len(), llr.len());
    }

    #[test]
    fn wrong_block_length_is_rejected() {
        assert!(matches!(
            siso_decode(&[0.0; 10], 4, None),
            Err(Error::CodeLength { expected: 12, found: 10 })
        ));
    }

    #[test]
    fn coded_beats_uncoded_bpsk_at_4db() {
        let eb_n0 = 10f64.powf(0.4);
        let es_n0 = eb_n0 / 2.0;
        let sigma = (1.0 / (2.0 * es_n0)).sqrt();
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let block = 1000;
        let mut errors = 0usize;
        let mut total = 0usize;
        for _ in 0..20 {
            let info: Vec<Bit> = (0..block).map(|_| rng.random_range(0..2)).collect();
            let llr: Vec<f64> = encode(&info)
                .iter()
                .map(|&b| {
                    let x = 1.0 - 2.0 * b as f64;
                    let y = x + noise.sample(&mut rng);
                    -2.0 * y / (sigma * sigma)
                })
                .collect();
            let out = siso_decode(&llr, block, None).unwrap();
            errors += out.hard_info().iter().zip(&info).filter(|(a, b)| a != b).count();
            total += block;
        }
        // uncoded BPSK at 4 dB: Q(√(2·Eb/N0)) ≈ 1.25e-2
        let ber = errors as f64 / total as f64;
        assert!(ber < 1.25e-2 / 2.0, "coded BER {ber}");
    }
}
