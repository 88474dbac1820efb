//! Small dense complex linear-algebra helpers shared by the receivers and
//! capacity estimators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Inversions whose reciprocal condition estimate falls below this are refused.
pub const RCOND_MIN: f64 = 1e-12;

/// Maximum absolute column sum.
pub fn norm1(a: &CMatrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverts a square matrix, rejecting it when `1 / (‖A‖₁‖A⁻¹‖₁) < RCOND_MIN`.
/// `tone` only labels the error.
pub fn checked_inverse(a: &CMatrix, tone: usize) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::SingularChannel { tone, rcond: 0.0 })?;
    let rcond = 1.0 / (norm1(a) * norm1(&inv));
    if !rcond.is_finite() || rcond < RCOND_MIN {
        return Err(Error::SingularChannel {
            tone,
            rcond: if rcond.is_finite() { rcond } else { 0.0 },
        });
    }
    Ok(inv)
}

/// Draws a circularly-symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Numerically stable `ln Σ exp(x_i)`; returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_scaled_identity() {
        let a = CMatrix::identity(3, 3) * Complex64::new(0.0, 2.0);
        let inv = checked_inverse(&a, 0).unwrap();
        let prod = &a * &inv;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_is_rejected_with_tone() {
        let a = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        match checked_inverse(&a, 17) {
            Err(Error::SingularChannel { tone, .. }) => assert_eq!(tone, 17),
            other => panic!("unexpected {other:?}"),
        }
        let mut b = CMatrix::identity(2, 2);
        b[(1, 1)] = Complex64::new(1e-14, 0.0);
        assert!(matches!(
            checked_inverse(&b, 3),
            Err(Error::SingularChannel { tone: 3, .. })
        ));
    }

    #[test]
    fn log_sum_exp_matches_naive() {
        let xs = [0.1, -2.0, 1.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[-1e4, -1e4]) - (-1e4 + 2f64.ln())).abs() < 1e-9);
    }
}
