//! Empirical bounds on τ and σ given the maximal Mermin / Svetlichny violation.
//!
//! Mermin:     max(1 − M²/4, 0, M²/8 − 1) ≲ τ, σ ≲ M²/16
//! Svetlichny: |M²/16 − 1| ≲ τ, σ ≲ M²/32

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

/// Allowed overshoot of a Bell value past its algebraic maximum.
pub const RANGE_TOL: f64 = 1e-6;

/// Slack used by the sweep and the bounds check unless overridden.
pub const DEFAULT_SLACK: f64 = 1e-4;

fn check_range(value: f64, lo: f64, hi: f64) -> Result<()> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(Error::OutOfRange { value, lo, hi });
    }
    Ok(())
}

/// (lower, upper) on τ and σ for a maximal Mermin value `m`.
pub fn mermin_bounds(m: f64) -> Result<(f64, f64)> {
    check_range(m, 0.0, 4.0 + RANGE_TOL)?;
    let m2 = m * m;
    let lower = (1.0 - m2 / 4.0).max(0.0).max(m2 / 8.0 - 1.0);
    Ok((lower, m2 / 16.0))
}

/// (lower, upper) on τ and σ for a maximal Svetlichny value `m`.
pub fn svetlichny_bounds(m: f64) -> Result<(f64, f64)> {
    check_range(m, 0.0, 4.0 * SQRT_2 + RANGE_TOL)?;
    let m2 = m * m;
    Ok(((m2 / 16.0 - 1.0).abs(), m2 / 32.0))
}

/// Approximate Mermin value of cos α|000⟩ + sin α|111⟩ with tangle τ = sin²2α.
pub fn scarani_gisin(tau: f64) -> Result<f64> {
    check_range(tau, 0.0, 1.0)?;
    Ok((4.0 * tau.sqrt()).max(2.0 * (1.0 - tau).sqrt()))
}

/// Which way a failed check points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Placement of one measure against one bound pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    /// min(value − lower, upper − value); negative when outside.
    pub margin: f64,
    pub ok: bool,
    /// Set when `ok` is false.
    pub failed_side: Option<Side>,
}

fn place(value: f64, lower: f64, upper: f64, slack: f64) -> Placement {
    let below = lower - value;
    let above = value - upper;
    let failed_side = if below > slack {
        Some(Side::Lower)
    } else if above > slack {
        Some(Side::Upper)
    } else {
        None
    };
    Placement { margin: -(below.max(above)), ok: failed_side.is_none(), failed_side }
}

/// Bound values for one record and whether τ and σ respect them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub mermin_lower: f64,
    pub mermin_upper: f64,
    pub svet_lower: f64,
    pub svet_upper: f64,
    pub tau_mermin: Placement,
    pub sigma_mermin: Placement,
    pub tau_svet: Placement,
    pub sigma_svet: Placement,
    pub slack: f64,
    m_mermin: f64,
    m_svet: f64,
}

impl BoundCheck {
    pub fn tau_ok_mermin(&self) -> bool {
        self.tau_mermin.ok
    }
    pub fn sigma_ok_mermin(&self) -> bool {
        self.sigma_mermin.ok
    }
    pub fn tau_ok_svet(&self) -> bool {
        self.tau_svet.ok
    }
    pub fn sigma_ok_svet(&self) -> bool {
        self.sigma_svet.ok
    }

    /// True when some failed check on a selected measure could disappear if
    /// the optimizer had found a larger M: an upper-bound failure, the Mermin
    /// lower bound while its 1 − M²/4 branch is active, or the Svetlichny
    /// lower bound below M_S = 4.
    pub fn undershoot_suspect(&self, include_tau: bool, include_sigma: bool) -> bool {
        let mermin_lower_falls = self.m_mermin < 2.0;
        let svet_lower_falls = self.m_svet < 4.0;
        let suspect = |p: &Placement, lower_falls: bool| match p.failed_side {
            Some(Side::Upper) => true,
            Some(Side::Lower) => lower_falls,
            None => false,
        };
        (include_tau && (suspect(&self.tau_mermin, mermin_lower_falls) || suspect(&self.tau_svet, svet_lower_falls)))
            || (include_sigma
                && (suspect(&self.sigma_mermin, mermin_lower_falls) || suspect(&self.sigma_svet, svet_lower_falls)))
    }
}

/// Places τ and σ against both bound pairs, widening every interval by `slack`.
pub fn check_record(tau: f64, sigma: f64, m_mermin: f64, m_svet: f64, slack: f64) -> Result<BoundCheck> {
    check_range(tau, 0.0, 1.0)?;
    check_range(sigma, 0.0, 1.0)?;
    if tau > sigma + 1e-10 {
        return Err(Error::Numerical(format!("τ = {tau} exceeds σ = {sigma}")));
    }
    if !(slack >= 0.0 && slack.is_finite()) {
        return Err(Error::OutOfRange { value: slack, lo: 0.0, hi: f64::INFINITY });
    }
    let (ml, mu) = mermin_bounds(m_mermin)?;
    let (sl, su) = svetlichny_bounds(m_svet)?;
    Ok(BoundCheck {
        mermin_lower: ml,
        mermin_upper: mu,
        svet_lower: sl,
        svet_upper: su,
        tau_mermin: place(tau, ml, mu, slack),
        sigma_mermin: place(sigma, ml, mu, slack),
        tau_svet: place(tau, sl, su, slack),
        sigma_svet: place(sigma, sl, su, slack),
        slack,
        m_mermin,
        m_svet,
    })
}
