//! Grouped spatial-modulation mapping.
//!
//! Each group of `M` lines carries `p = log2 M` spatial bits, which pick the
//! single active line, followed by `q = log2 J` symbol bits, which pick the
//! constellation point sent on it. Bit groups are read most-significant first.
//!
//! Spatial label `v` activates the pattern with its `1` at (zero-based) line
//! `M − 1 − v`; for `M = 2` bit `0` gives `[0, 1]ᵀ` and bit `1` gives `[1, 0]ᵀ`,
//! and for `M = 4` bits `00` give `[0, 0, 0, 1]ᵀ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::BinderLayout;
use crate::error::{Error, Result};
use crate::linalg::CVector;

pub type Bit = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstellationKind {
    Psk,
    Qam,
}

/// Unit-average-energy alphabet with points indexed by their bit label.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits: usize,
    /// Factor applied to the integer-grid (or unit-circle) geometry.
    scale: f64,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

/// Levels `−(n−1), …, n−1` addressed by Gray label, lowest level first.
fn gray_level_up(label: usize, n: usize) -> f64 {
    -(n as f64 - 1.0) + 2.0 * gray_inverse(label) as f64
}

/// Same levels, highest level first.
fn gray_level_down(label: usize, n: usize) -> f64 {
    (n as f64 - 1.0) - 2.0 * gray_inverse(label) as f64
}

/// Rectangular Gray grid: the leading `i_bits` pick the in-phase level
/// (ascending), the trailing `q_bits` the quadrature level (descending).
fn rectangular(i_bits: usize, q_bits: usize) -> Vec<Complex64> {
    let ni = 1 << i_bits;
    let nq = 1 << q_bits;
    (0..ni * nq)
        .map(|label| {
            let il = label >> q_bits;
            let ql = label & (nq - 1);
            Complex64::new(gray_level_up(il, ni), gray_level_down(ql, nq))
        })
        .collect()
}

/// 32-point cross: an 8×4 rectangular Gray grid whose `|I| = 7` columns are
/// folded onto the `|Q| = 5` rows, giving the usual 6×6-minus-corners shape.
fn cross32() -> Vec<Complex64> {
    rectangular(3, 2)
        .into_iter()
        .map(|p| {
            if p.re.abs() == 7.0 {
                let i = p.re.signum() * if p.im.abs() == 1.0 { 3.0 } else { 1.0 };
                Complex64::new(i, p.im.signum() * 5.0)
            } else {
                p
            }
        })
        .collect()
}

impl Constellation {
    /// Builds a Gray-labelled constellation of order `J ∈ {2, 4, 8, 16, 32, 64}`.
    ///
    /// PSK places label `gray(k)` at angle `2πk/J`, so QPSK is
    /// `{1 → 00, i → 01, −1 → 11, −i → 10}`. Square QAM uses the leading half of
    /// the label for the in-phase level and the trailing half for the quadrature
    /// level, so 16-QAM label `0000` sits at `(−3 + 3j)·scale`. 8-QAM is a 4×2
    /// rectangle and 32-QAM the standard cross. Order 2 is BPSK for both kinds.
    pub fn new(kind: ConstellationKind, order: usize) -> Result<Self> {
        if !matches!(order, 2 | 4 | 8 | 16 | 32 | 64) {
            return Err(Error::UnsupportedOrder(order));
        }
        let bits = order.trailing_zeros() as usize;
        let raw: Vec<Complex64> = match (kind, order) {
            (_, 2) | (ConstellationKind::Psk, _) => {
                let mut pts = vec![Complex64::new(0.0, 0.0); order];
                for k in 0..order {
                    let angle = 2.0 * std::f64::consts::PI * k as f64 / order as f64;
                    let mut p = Complex64::from_polar(1.0, angle);
                    // Keep the axis points exact.
                    p.re = round_tiny(p.re);
                    p.im = round_tiny(p.im);
                    pts[gray(k)] = p;
                }
                pts
            }
            (ConstellationKind::Qam, 8) => rectangular(2, 1),
            (ConstellationKind::Qam, 32) => cross32(),
            (ConstellationKind::Qam, _) => rectangular(bits / 2, bits / 2),
        };
        let energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        let scale = 1.0 / energy.sqrt();
        Ok(Self {
            kind,
            points: raw.into_iter().map(|p| p * scale).collect(),
            bits,
            scale,
        })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    /// `J`.
    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// `q = log2 J`.
    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Normalization factor from the unnormalized geometry.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Label of the closest point; ties go to the lower label.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

fn round_tiny(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else if (x.abs() - 1.0).abs() < 1e-12 {
        x.signum()
    } else {
        x
    }
}

/// Convenience wrapper matching the operation name used in configs.
pub fn build_constellation(kind: ConstellationKind, order: usize) -> Result<Constellation> {
    Constellation::new(kind, order)
}

/// The `M` single-line activation patterns of a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActivationSet {
    m_lines: usize,
}

impl ActivationSet {
    pub fn new(m_lines: usize) -> Result<Self> {
        if m_lines == 0 || !m_lines.is_power_of_two() {
            return Err(Error::InvalidLayout(format!(
                "lines per group must be a power of two, got {m_lines}"
            )));
        }
        Ok(Self { m_lines })
    }

    pub fn m_lines(&self) -> usize {
        self.m_lines
    }

    /// `p = log2 M`.
    pub fn bits(&self) -> usize {
        self.m_lines.trailing_zeros() as usize
    }

    /// Zero-based active line for spatial label `v`.
    pub fn line_for_label(&self, label: usize) -> usize {
        self.m_lines - 1 - label
    }

    pub fn label_for_line(&self, line: usize) -> usize {
        self.m_lines - 1 - line
    }

    /// Binary unit vector for spatial label `v`.
    pub fn pattern(&self, label: usize) -> Vec<u8> {
        let mut u = vec![0; self.m_lines];
        u[self.line_for_label(label)] = 1;
        u
    }
}

/// Most-significant-first bits to integer.
pub fn bits_to_index(bits: &[Bit]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

/// Integer to `width` most-significant-first bits.
pub fn index_to_bits(index: usize, width: usize) -> Vec<Bit> {
    (0..width)
        .map(|i| ((index >> (width - 1 - i)) & 1) as Bit)
        .collect()
}

/// One group's transmission: zero-based active line and symbol label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupSymbol {
    pub line: usize,
    pub label: usize,
}

/// Maps `p + q` bits to the active line and constellation label.
pub fn map_group_bits(
    bits: &[Bit],
    act: &ActivationSet,
    cons: &Constellation,
) -> Result<GroupSymbol> {
    let p = act.bits();
    let expected = p + cons.bits();
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            found: bits.len(),
        });
    }
    Ok(GroupSymbol {
        line: act.line_for_label(bits_to_index(&bits[..p])),
        label: bits_to_index(&bits[p..]),
    })
}

/// Inverse of [`map_group_bits`].
pub fn group_bits(sym: GroupSymbol, act: &ActivationSet, cons: &Constellation) -> Vec<Bit> {
    let mut bits = index_to_bits(act.label_for_line(sym.line), act.bits());
    bits.extend(index_to_bits(sym.label, cons.bits()));
    bits
}

/// One tone's SM transmission.
#[derive(Clone, Debug, PartialEq)]
pub struct SmFrame {
    pub groups: Vec<GroupSymbol>,
    /// Transmit vector of length `L` with one nonzero entry per group.
    pub x: CVector,
}

/// Places each group's symbol at its active line; every other entry is zero.
pub fn assemble_frame(
    layout: &BinderLayout,
    groups: &[GroupSymbol],
    cons: &Constellation,
) -> Result<SmFrame> {
    if groups.len() != layout.n_groups {
        return Err(Error::Dimension(format!(
            "{} group symbols for {} groups",
            groups.len(),
            layout.n_groups
        )));
    }
    let mut x = CVector::from_element(layout.l_total(), Complex64::new(0.0, 0.0));
    for (n, g) in groups.iter().enumerate() {
        if g.line >= layout.m_lines {
            return Err(Error::LineOutOfRange {
                line: g.line,
                m_lines: layout.m_lines,
            });
        }
        x[layout.position(n, g.line)] = cons.point(g.label);
    }
    Ok(SmFrame {
        groups: groups.to_vec(),
        x,
    })
}

/// Maps `N(p+q)` bits to a frame.
pub fn map_frame(
    bits: &[Bit],
    layout: &BinderLayout,
    act: &ActivationSet,
    cons: &Constellation,
) -> Result<SmFrame> {
    let per_group = act.bits() + cons.bits();
    if bits.len() != per_group * layout.n_groups {
        return Err(Error::BitLength {
            expected: per_group * layout.n_groups,
            found: bits.len(),
        });
    }
    let groups = bits
        .chunks(per_group)
        .map(|c| map_group_bits(c, act, cons))
        .collect::<Result<Vec<_>>>()?;
    assemble_frame(layout, &groups, cons)
}

/// Concatenates the bit labels of per-group decisions.
pub fn demap_frame(decisions: &[GroupSymbol], act: &ActivationSet, cons: &Constellation) -> Vec<Bit> {
    decisions
        .iter()
        .flat_map(|&d| group_bits(d, act, cons))
        .collect()
}

/// `η = N(log2 M + log2 J)`.
pub fn bits_per_tone(layout: &BinderLayout, cons: &Constellation) -> usize {
    layout.n_groups * (layout.spatial_bits() + cons.bits())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sm,
    Vectoring,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Sm => "sm",
            Scheme::Vectoring => "vectoring",
        })
    }
}

/// Per-group transmit power budget and its split over lines and tones.
///
/// SM puts the whole budget on its single active line; vectoring shares it
/// equally over the `M` lines. Either way each line spreads its power evenly
/// over the `K` tones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerPlan {
    /// Watts per group.
    pub p_total_per_group: f64,
    pub scheme: Scheme,
    pub k_count: usize,
    pub m_lines: usize,
}

impl PowerPlan {
    pub fn new(p_total_per_group: f64, scheme: Scheme, k_count: usize, m_lines: usize) -> Self {
        Self {
            p_total_per_group,
            scheme,
            k_count,
            m_lines,
        }
    }

    pub fn active_lines(&self) -> usize {
        match self.scheme {
            Scheme::Sm => 1,
            Scheme::Vectoring => self.m_lines,
        }
    }

    /// Power on each active line, summed over tones.
    pub fn per_line_power(&self) -> f64 {
        self.p_total_per_group / self.active_lines() as f64
    }

    /// Power on each active line on a single tone.
    pub fn per_line_tone_power(&self) -> f64 {
        self.per_line_power() / self.k_count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qpsk_labels() {
        let q = Constellation::new(ConstellationKind::Psk, 4).unwrap();
        assert_eq!(q.point(0b00), c(1.0, 0.0));
        assert_eq!(q.point(0b01), c(0.0, 1.0));
        assert_eq!(q.point(0b11), c(-1.0, 0.0));
        assert_eq!(q.point(0b10), c(0.0, -1.0));
    }

    #[test]
    fn qam16_origin_label() {
        let q = Constellation::new(ConstellationKind::Qam, 16).unwrap();
        let want = c(-3.0, 3.0) / 10f64.sqrt();
        assert!((q.point(0) - want).norm() < 1e-15);
        assert!((q.scale() - 1.0 / 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bpsk() {
        for kind in [ConstellationKind::Psk, ConstellationKind::Qam] {
            let b = Constellation::new(kind, 2).unwrap();
            assert_eq!(b.points(), &[c(1.0, 0.0), c(-1.0, 0.0)]);
        }
    }

    #[test]
    fn unsupported_orders() {
        for j in [0, 1, 3, 12, 128] {
            assert!(matches!(
                Constellation::new(ConstellationKind::Qam, j),
                Err(Error::UnsupportedOrder(_))
            ));
        }
    }

    #[test]
    fn every_constellation_has_unit_energy_and_distinct_points() {
        for kind in [ConstellationKind::Psk, ConstellationKind::Qam] {
            for j in [2, 4, 8, 16, 32, 64] {
                let cons = Constellation::new(kind, j).unwrap();
                let e = cons.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / j as f64;
                assert!((e - 1.0).abs() < 1e-12, "{kind:?} {j}: {e}");
                for a in 0..j {
                    assert_eq!(cons.nearest(cons.point(a)), a);
                    for b in a + 1..j {
                        assert!((cons.point(a) - cons.point(b)).norm() > 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn square_qam_neighbors_differ_in_one_bit() {
        for j in [4, 16, 64] {
            let cons = Constellation::new(ConstellationKind::Qam, j).unwrap();
            let dmin = 2.0 * cons.scale();
            for a in 0..j {
                for b in 0..j {
                    if ((cons.point(a) - cons.point(b)).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1);
                    }
                }
            }
        }
    }

    #[test]
    fn cross32_shape() {
        let cons = Constellation::new(ConstellationKind::Qam, 32).unwrap();
        let s = cons.scale();
        for p in cons.points() {
            let (i, q) = ((p.re / s).round(), (p.im / s).round());
            assert!(i.abs() <= 5.0 && q.abs() <= 5.0);
            assert!(!(i.abs() == 5.0 && q.abs() == 5.0));
        }
        assert!((s - 1.0 / 20f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn worked_mapping_examples() {
        let qpsk = Constellation::new(ConstellationKind::Psk, 4).unwrap();
        let m2 = ActivationSet::new(2).unwrap();
        let sym = map_group_bits(&[1, 0, 1], &m2, &qpsk).unwrap();
        assert_eq!(m2.pattern(1), vec![1, 0]);
        assert_eq!(m2.pattern(0), vec![0, 1]);
        assert_eq!(sym.line, 0);
        assert_eq!(qpsk.point(sym.label), c(0.0, 1.0));
        assert_eq!(group_bits(sym, &m2, &qpsk), vec![1, 0, 1]);

        let m1 = ActivationSet::new(1).unwrap();
        let sym = map_group_bits(&[0, 0], &m1, &qpsk).unwrap();
        assert_eq!(sym, GroupSymbol { line: 0, label: 0 });
        assert_eq!(qpsk.point(sym.label), c(1.0, 0.0));

        let m4 = ActivationSet::new(4).unwrap();
        let sym = map_group_bits(&[0, 0, 1, 1], &m4, &qpsk).unwrap();
        assert_eq!(m4.pattern(0), vec![0, 0, 0, 1]);
        assert_eq!(sym.line, 3);

        assert!(matches!(
            map_group_bits(&[0, 1], &m2, &qpsk),
            Err(Error::BitLength { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn four_bits_per_group_for_two_lines_and_eight_points() {
        let cons = Constellation::new(ConstellationKind::Qam, 8).unwrap();
        let act = ActivationSet::new(2).unwrap();
        let sym = GroupSymbol { line: 1, label: 5 };
        assert_eq!(group_bits(sym, &act, &cons).len(), 4);
        let layout = BinderLayout::new(2, 2).unwrap();
        assert_eq!(bits_per_tone(&layout, &cons), 8);
    }

    #[test]
    fn frame_assembly() {
        let bpsk = Constellation::new(ConstellationKind::Psk, 2).unwrap();
        let layout = BinderLayout::new(2, 2).unwrap();
        let frame = assemble_frame(
            &layout,
            &[GroupSymbol { line: 0, label: 0 }, GroupSymbol { line: 1, label: 1 }],
            &bpsk,
        )
        .unwrap();
        assert_eq!(
            frame.x.as_slice(),
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]
        );

        let layout = BinderLayout::new(3, 2).unwrap();
        let heads = assemble_frame(&layout, &[GroupSymbol { line: 0, label: 0 }; 3], &bpsk).unwrap();
        let ones: Vec<usize> = (0..6).filter(|&i| heads.x[i] == c(1.0, 0.0)).collect();
        assert_eq!(ones, vec![0, 2, 4]);

        assert!(matches!(
            assemble_frame(&layout, &[GroupSymbol { line: 2, label: 0 }; 3], &bpsk),
            Err(Error::LineOutOfRange { .. })
        ));
    }

    #[test]
    fn power_split() {
        let sm = PowerPlan::new(0.01, Scheme::Sm, 2048, 2);
        let vec = PowerPlan::new(0.01, Scheme::Vectoring, 2048, 2);
        assert_eq!(sm.per_line_power(), 0.01);
        assert_eq!(vec.per_line_power(), 0.005);
        assert_eq!(sm.per_line_tone_power(), 0.01 / 2048.0);
        assert_eq!(vec.per_line_tone_power(), 0.005 / 2048.0);
        for plan in [sm, vec] {
            let sum = plan.per_line_power() * plan.active_lines() as f64;
            assert!((sum - 0.01).abs() < 1e-18);
        }
    }
}
