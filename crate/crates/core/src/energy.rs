//! Class-AB line-driver power and energy efficiency.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smmod::Scheme;

/// Line-driver constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdParams {
    /// Supply voltage, V.
    pub v_s: f64,
    /// Quiescent current, A.
    pub i_q: f64,
    /// Line impedance seen by the driver, Ω.
    pub r_line: f64,
    /// Hybrid power, W.
    pub p_hybrid: f64,
}

impl Default for LdParams {
    fn default() -> Self {
        Self {
            v_s: 4.0,
            i_q: 11.1e-3,
            r_line: 64.0,
            p_hybrid: 50e-3,
        }
    }
}

impl LdParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_s", self.v_s),
            ("i_q", self.i_q),
            ("r_line", self.r_line),
            ("p_hybrid", self.p_hybrid),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "line-driver {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `V_s·(I_Q + √((2/π)·P_t/R)) + P_hybrid` in watts.
pub fn ld_power(p_t: f64, params: &LdParams) -> Result<f64> {
    if p_t < 0.0 || p_t.is_nan() {
        return Err(Error::NegativePower(p_t));
    }
    Ok(params.v_s * (params.i_q + (2.0 / PI * p_t / params.r_line).sqrt()) + params.p_hybrid)
}

/// Driver power of one group: SM drives one line with the whole budget,
/// vectoring drives all `M` lines with `p_total/M` each.
pub fn group_ld_power(p_total: f64, scheme: Scheme, m_lines: usize, params: &LdParams) -> Result<f64> {
    match scheme {
        Scheme::Sm => ld_power(p_total, params),
        Scheme::Vectoring => {
            if p_total < 0.0 || p_total.is_nan() {
                return Err(Error::NegativePower(p_total));
            }
            Ok(m_lines as f64 * ld_power(p_total / m_lines as f64, params)?)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EeResult {
    pub scheme: Scheme,
    /// bits/s
    pub capacity_used: f64,
    /// Driver power charged per group, W.
    pub ld_power: f64,
    /// bits/J
    pub efficiency: f64,
}

/// `capacity / (N·P_LD)`. With `per_tone = Some(K)` the group power is split
/// evenly over `K` tones before dividing.
pub fn energy_efficiency(
    scheme: Scheme,
    capacity: f64,
    n_groups: usize,
    group_ld: f64,
    per_tone: Option<usize>,
) -> Result<EeResult> {
    let ld = match per_tone {
        Some(0) => return Err(Error::InvalidParameter("tone count must be positive".into())),
        Some(k) => group_ld / k as f64,
        None => group_ld,
    };
    if !(ld > 0.0) || n_groups == 0 {
        return Err(Error::ZeroPower);
    }
    Ok(EeResult {
        scheme,
        capacity_used: capacity,
        ld_power: ld,
        efficiency: capacity / (n_groups as f64 * ld),
    })
}
