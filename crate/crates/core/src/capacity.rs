//! CCMC and DCMC capacity estimators for one tone, plus band aggregation.
//!
//! Per-tone values are in bits/s (bits per channel use scaled by `Δf`).
//! Noise enters as the complex variance `σ²` of each receiver sample; the
//! signal power on an active line is `plan.per_line_tone_power()`.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{BinderChannel, BinderLayout};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, log_sum_exp, CMatrix, CVector};
use crate::smmod::{assemble_frame, Constellation, GroupSymbol, PowerPlan, Scheme};

/// Smallest accepted Monte Carlo budget.
pub const MIN_SAMPLES: usize = 100;
/// Largest DCMC alphabet that is enumerated.
pub const ALPHABET_LIMIT: u128 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityKind {
    Ccmc,
    Dcmc,
}

impl std::fmt::Display for CapacityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ccmc => "ccmc",
            Self::Dcmc => "dcmc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    /// bits/s
    pub value: f64,
    pub std_err: f64,
    pub n_samples: usize,
    pub scheme: Scheme,
    pub kind: CapacityKind,
}

fn check_noise(sigma_w2: f64) -> Result<()> {
    if !(sigma_w2 > 0.0 && sigma_w2.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be positive and finite, got {sigma_w2}"
        )));
    }
    Ok(())
}

fn check_budget(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::SampleBudget(samples));
    }
    Ok(())
}

fn mean_and_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `Δf·log2 det(I + (P/σ²)·HᴴH)` with `P` the per-line tone power
/// (the binder total spread over all `L` lines).
pub fn ccmc_vectoring_tone(
    ch: &BinderChannel,
    tone: usize,
    plan: &PowerPlan,
    sigma_w2: f64,
) -> Result<CapacityEstimate> {
    if plan.scheme != Scheme::Vectoring {
        return Err(Error::InvalidParameter("vectoring CCMC needs a vectoring power plan".into()));
    }
    check_noise(sigma_w2)?;
    let h = ch.try_tone(tone)?;
    let snr = plan.per_line_tone_power() / sigma_w2;
    let l = h.ncols();
    let a = CMatrix::identity(l, l) + h.adjoint() * h * Complex64::new(snr, 0.0);
    let ln_det = match a.clone().cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|z| z.re.ln()).sum::<f64>(),
        None => a.determinant().norm().ln(),
    };
    if !ln_det.is_finite() {
        return Err(Error::NonFinite("vectoring log-determinant"));
    }
    Ok(CapacityEstimate {
        value: ch.grid().delta_f * (ln_det / LN_2).max(0.0),
        std_err: 0.0,
        n_samples: 0,
        scheme: Scheme::Vectoring,
        kind: CapacityKind::Ccmc,
    })
}

/// SM CCMC split into its SIMO signal part and sampled spatial part, both in bits/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmCcmc {
    pub signal: f64,
    pub spatial: f64,
    pub spatial_std_err: f64,
    pub n_samples: usize,
}

impl SmCcmc {
    pub fn estimate(&self) -> CapacityEstimate {
        CapacityEstimate {
            value: self.signal + self.spatial,
            std_err: self.spatial_std_err,
            n_samples: self.n_samples,
            scheme: Scheme::Sm,
            kind: CapacityKind::Ccmc,
        }
    }
}

/// Mutual information in bits between the active column and `y = √P·h_m·s + w`
/// for Gaussian `s` and uniformly chosen `m`; returns `(mean, std_err)`.
///
/// Each draw picks `m`, samples `y`, and scores
/// `log2 M + log2 p(y|m) − log2 Σ_{m'} p(y|m')` under the exact
/// rank-one-plus-identity Gaussian likelihoods.
pub fn spatial_term<R: Rng + ?Sized>(
    h: &CMatrix,
    p_tone: f64,
    sigma_w2: f64,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_noise(sigma_w2)?;
    check_budget(samples)?;
    let m = h.ncols();
    if m <= 1 {
        return Ok((0.0, 0.0));
    }
    let cols: Vec<CVector> = (0..m).map(|j| h.column(j).into_owned()).collect();
    // ln p(y|m) + const = −ln(1+γ) + P|hᴴy|²/(σ²(σ²+P‖h‖²))
    let norms: Vec<f64> = cols.iter().map(|c| c.norm_squared()).collect();
    let amp = p_tone.sqrt();
    let cap = (m as f64).log2();
    let mut draws = Vec::with_capacity(samples);
    let mut ll = vec![0.0; m];
    for _ in 0..samples {
        let active = rng.random_range(0..m);
        let s = complex_gaussian(rng, 1.0) * amp;
        let y = CVector::from_fn(h.nrows(), |r, _| cols[active][r] * s + complex_gaussian(rng, sigma_w2));
        for j in 0..m {
            let proj = cols[j].dotc(&y).norm_sqr();
            let denom = sigma_w2 + p_tone * norms[j];
            ll[j] = -(p_tone * norms[j] / sigma_w2).ln_1p() + p_tone * proj / (sigma_w2 * denom);
        }
        let v = cap + (ll[active] - log_sum_exp(&ll)) / LN_2;
        if !v.is_finite() {
            return Err(Error::NonFinite("spatial likelihood"));
        }
        draws.push(v);
    }
    let (mean, err) = mean_and_err(&draws);
    Ok((mean.clamp(0.0, cap), err))
}

/// SM CCMC on one tone: per group, the SIMO signal term averaged over the
/// `M` lines plus the spatial term, both over the group's own `M×M` block.
pub fn ccmc_sm_tone<R: Rng + ?Sized>(
    ch: &BinderChannel,
    tone: usize,
    plan: &PowerPlan,
    sigma_w2: f64,
    samples: usize,
    rng: &mut R,
) -> Result<SmCcmc> {
    if plan.scheme != Scheme::Sm {
        return Err(Error::InvalidParameter("SM CCMC needs an SM power plan".into()));
    }
    check_noise(sigma_w2)?;
    check_budget(samples)?;
    ch.grid().check_tone(tone)?;
    let layout = ch.layout();
    let p = plan.per_line_tone_power();
    let df = ch.grid().delta_f;
    let mut signal = 0.0;
    let mut spatial = 0.0;
    let mut var = 0.0;
    for n in 0..layout.n_groups {
        let block = ch.block(tone, n, n);
        let m = block.ncols() as f64;
        signal += block
            .column_iter()
            .map(|c| (p * c.norm_squared() / sigma_w2).ln_1p() / LN_2)
            .sum::<f64>()
            / m;
        let (s, e) = spatial_term(&block, p, sigma_w2, samples, rng)?;
        spatial += s;
        var += e * e;
    }
    Ok(SmCcmc {
        signal: df * signal,
        spatial: df * spatial,
        spatial_std_err: df * var.sqrt(),
        n_samples: samples * layout.n_groups,
    })
}

/// Equiprobable set of unit-power transmit vectors of length `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    scheme: Scheme,
    vectors: Vec<CVector>,
}

fn checked_size(base: usize, exp: usize) -> Result<usize> {
    let size = (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX);
    if size > ALPHABET_LIMIT {
        return Err(Error::AlphabetTooLarge {
            size,
            limit: ALPHABET_LIMIT,
        });
    }
    Ok(size as usize)
}

impl Alphabet {
    /// All `(JM)^N` grouped-SM frames.
    pub fn sm(layout: &BinderLayout, cons: &Constellation) -> Result<Self> {
        let per_group = layout.m_lines * cons.order();
        let size = checked_size(per_group, layout.n_groups)?;
        let vectors = (0..size)
            .map(|mut idx| {
                let mut groups = vec![GroupSymbol { line: 0, label: 0 }; layout.n_groups];
                for g in groups.iter_mut().rev() {
                    let local = idx % per_group;
                    idx /= per_group;
                    *g = GroupSymbol {
                        line: local / cons.order(),
                        label: local % cons.order(),
                    };
                }
                assemble_frame(layout, &groups, cons).map(|f| f.x)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            scheme: Scheme::Sm,
            vectors,
        })
    }

    /// All `J^L` vectoring frames with every line active.
    pub fn vectoring(layout: &BinderLayout, cons: &Constellation) -> Result<Self> {
        let l = layout.l_total();
        let j = cons.order();
        let size = checked_size(j, l)?;
        let vectors = (0..size)
            .map(|mut idx| {
                let mut x = CVector::zeros(l);
                for r in (0..l).rev() {
                    x[r] = cons.point(idx % j);
                    idx /= j;
                }
                x
            })
            .collect();
        Ok(Self {
            scheme: Scheme::Vectoring,
            vectors,
        })
    }

    /// Arbitrary candidate set.
    pub fn custom(scheme: Scheme, vectors: Vec<CVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("empty alphabet".into()));
        }
        checked_size(vectors.len(), 1)?;
        let l = vectors[0].len();
        if vectors.iter().any(|v| v.len() != l) {
            return Err(Error::Dimension("alphabet vectors differ in length".into()));
        }
        Ok(Self { scheme, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    /// `log2 |S|` bits per channel use.
    pub fn entropy_bits(&self) -> f64 {
        (self.vectors.len() as f64).log2()
    }
}

/// Monte Carlo DCMC estimate with `draws` noise realizations per tone;
/// draw `t` uses candidate `t mod |S|`, so every candidate is visited evenly.
pub fn dcmc_tone<R: Rng + ?Sized>(
    ch: &BinderChannel,
    tone: usize,
    plan: &PowerPlan,
    sigma_w2: f64,
    alphabet: &Alphabet,
    draws: usize,
    rng: &mut R,
) -> Result<CapacityEstimate> {
    check_noise(sigma_w2)?;
    check_budget(draws)?;
    let h = ch.try_tone(tone)?;
    if alphabet.vectors[0].len() != h.ncols() {
        return Err(Error::Dimension(format!(
            "alphabet vectors of length {} for L = {}",
            alphabet.vectors[0].len(),
            h.ncols()
        )));
    }
    let df = ch.grid().delta_f;
    let estimate = |value: f64, std_err: f64| CapacityEstimate {
        value,
        std_err,
        n_samples: draws,
        scheme: alphabet.scheme,
        kind: CapacityKind::Dcmc,
    };
    let size = alphabet.len();
    if size == 1 {
        return Ok(estimate(0.0, 0.0));
    }
    let amp = Complex64::new(plan.per_line_tone_power().sqrt(), 0.0);
    let rx: Vec<CVector> = alphabet.vectors.iter().map(|x| h * x * amp).collect();
    let cap = alphabet.entropy_bits();
    let l = h.nrows();
    let mut samples = Vec::with_capacity(draws);
    let mut ll = vec![0.0; size];
    let mut w = CVector::zeros(l);
    for t in 0..draws {
        let i = t % size;
        for v in w.iter_mut() {
            *v = complex_gaussian(rng, sigma_w2);
        }
        let w2 = w.norm_squared();
        for (k, u) in rx.iter().enumerate() {
            let mut d = 0.0;
            for r in 0..l {
                d += (rx[i][r] - u[r] + w[r]).norm_sqr();
            }
            ll[k] = -(d - w2) / sigma_w2;
        }
        let v = cap - log_sum_exp(&ll) / LN_2;
        if !v.is_finite() {
            return Err(Error::NonFinite("DCMC likelihood"));
        }
        samples.push(v);
    }
    let (mean, err) = mean_and_err(&samples);
    Ok(estimate(df * mean.clamp(0.0, cap), df * err))
}

/// Band total with the per-tone values it was summed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCapacity {
    /// bits/s
    pub total: f64,
    pub std_err: f64,
    pub per_tone: Vec<(usize, f64)>,
}

/// Sums per-tone estimates over exactly the tones in `expected`, in ascending tone order.
pub fn aggregate_band(
    estimates: &[(usize, CapacityEstimate)],
    expected: &[usize],
) -> Result<BandCapacity> {
    let mut sorted: Vec<(usize, CapacityEstimate)> = estimates.to_vec();
    sorted.sort_by_key(|(t, _)| *t);
    if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::InvalidParameter(format!("tone {} estimated twice", w[0].0)));
    }
    let mut missing: Vec<usize> = expected
        .iter()
        .copied()
        .filter(|t| sorted.binary_search_by_key(t, |(k, _)| *k).is_err())
        .collect();
    missing.sort_unstable();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::MissingTones(missing));
    }
    let mut total = 0.0;
    let mut var = 0.0;
    let mut per_tone = Vec::with_capacity(sorted.len());
    for (t, e) in &sorted {
        total += e.value;
        var += e.std_err * e.std_err;
        per_tone.push((*t, e.value));
    }
    Ok(BandCapacity {
        total,
        std_err: var.sqrt(),
        per_tone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ToneGrid;
    use crate::smmod::ConstellationKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn channel(layout: BinderLayout, h: CMatrix) -> BinderChannel {
        BinderChannel::from_matrices(ToneGrid::new(1, 50e3, 2.025e6).unwrap(), layout, 100.0, vec![h]).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vectoring_ccmc_trivial_cases() {
        let layout = BinderLayout::new(1, 1).unwrap();
        let plan = PowerPlan::new(1.0, Scheme::Vectoring, 1, 1);
        let one = channel(layout, CMatrix::identity(1, 1));
        let v = ccmc_vectoring_tone(&one, 0, &plan, 0.01).unwrap();
        assert!((v.value - 50e3 * 101f64.log2()).abs() < 1e-6);
        let zero = channel(layout, CMatrix::zeros(1, 1));
        assert_eq!(ccmc_vectoring_tone(&zero, 0, &plan, 0.01).unwrap().value, 0.0);
    }

    #[test]
    fn vectoring_ccmc_matches_eigenvalues() {
        let layout = BinderLayout::new(2, 2).unwrap();
        let h = CMatrix::from_fn(4, 4, |r, k| c(((r * 7 + k * 3) % 5) as f64 * 0.3 - 0.5, (r as f64 - k as f64) * 0.1));
        let ch = channel(layout, h.clone());
        let plan = PowerPlan::new(2.0, Scheme::Vectoring, 1, 2);
        let got = ccmc_vectoring_tone(&ch, 0, &plan, 0.1).unwrap().value;
        let eig = (h.adjoint() * &h).symmetric_eigenvalues();
        let want: f64 = eig.iter().map(|&l| (1.0 + l * 1.0 / 0.1).log2()).sum::<f64>() * 50e3;
        assert!((got - want).abs() < 1e-6 * want, "{got} {want}");
    }

    #[test]
    fn sm_ccmc_single_line_has_no_spatial_term() {
        let layout = BinderLayout::new(2, 1).unwrap();
        let ch = channel(layout, CMatrix::identity(2, 2));
        let plan = PowerPlan::new(1.0, Scheme::Sm, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = ccmc_sm_tone(&ch, 0, &plan, 0.1, 100, &mut rng).unwrap();
        assert_eq!(r.spatial, 0.0);
        assert!((r.signal - 2.0 * 50e3 * 11f64.log2()).abs() < 1e-6);
    }

    #[test]
    fn identical_columns_carry_no_spatial_information() {
        let h = CMatrix::from_fn(2, 2, |r, _| c(1.0 + r as f64, 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (v, _) = spatial_term(&h, 1.0, 0.01, 2000, &mut rng).unwrap();
        assert!(v < 1e-9, "{v}");
    }

    #[test]
    fn small_budget_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            spatial_term(&CMatrix::identity(2, 2), 1.0, 1.0, 99, &mut rng),
            Err(Error::SampleBudget(99))
        ));
    }

    #[test]
    fn dcmc_limits() {
        let layout = BinderLayout::new(1, 2).unwrap();
        let ch = channel(layout, CMatrix::identity(2, 2));
        let cons = Constellation::new(ConstellationKind::Psk, 4).unwrap();
        let alphabet = Alphabet::sm(&layout, &cons).unwrap();
        assert_eq!(alphabet.len(), 8);
        let plan = PowerPlan::new(1.0, Scheme::Sm, 1, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hi = dcmc_tone(&ch, 0, &plan, 1e-4, &alphabet, 800, &mut rng).unwrap();
        assert!((hi.value - 3.0 * 50e3).abs() < 1e-6 * 50e3);
        let lo = dcmc_tone(&ch, 0, &plan, 1e9, &alphabet, 800, &mut rng).unwrap();
        assert!(lo.value <= 3.0 * lo.std_err + 1e-9, "{lo:?}");
        let single = Alphabet::custom(Scheme::Sm, vec![alphabet.vectors()[0].clone()]).unwrap();
        assert_eq!(dcmc_tone(&ch, 0, &plan, 1.0, &single, 100, &mut rng).unwrap().value, 0.0);
    }

    #[test]
    fn oversized_alphabet_is_rejected() {
        let layout = BinderLayout::new(4, 4).unwrap();
        let cons = Constellation::new(ConstellationKind::Qam, 16).unwrap();
        assert!(matches!(Alphabet::vectoring(&layout, &cons), Err(Error::AlphabetTooLarge { .. })));
        let small = BinderLayout::new(2, 2).unwrap();
        let qpsk = Constellation::new(ConstellationKind::Psk, 4).unwrap();
        assert_eq!(Alphabet::vectoring(&small, &qpsk).unwrap().len(), 256);
    }

    #[test]
    fn band_aggregation() {
        let e = |v: f64| CapacityEstimate {
            value: v,
            std_err: 3.0,
            n_samples: 1,
            scheme: Scheme::Sm,
            kind: CapacityKind::Dcmc,
        };
        let est = vec![(2, e(1.0)), (0, e(2.0)), (1, e(4.0))];
        let b = aggregate_band(&est, &[0, 1, 2]).unwrap();
        assert_eq!(b.total, 7.0);
        assert!((b.std_err - 27f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.per_tone[0], (0, 2.0));
        assert!(matches!(aggregate_band(&est, &[0, 3, 5]), Err(Error::MissingTones(t)) if t == vec![3, 5]));
    }
}
