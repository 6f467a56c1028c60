//! Information and secrecy rates, in nats per channel use.

use std::fmt;

use crate::error::{invalid, Result};
use crate::linalg::{self, ComplexMatrix};

/// Values in `(-RATE_SLACK, 0)` from round-off are snapped to zero.
const RATE_SLACK: f64 = 1e-9;

/// A non-negative, finite rate in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct RateNats(f64);

impl RateNats {
    pub const ZERO: RateNats = RateNats(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Self(value))
        } else {
            Err(invalid(format!("rate must be finite and >= 0, got {value}")))
        }
    }

    /// Snaps tiny negative round-off to zero.
    pub(crate) fn from_computed(value: f64) -> Result<Self> {
        if value < 0.0 && value > -RATE_SLACK {
            Ok(Self(0.0))
        } else {
            Self::new(value)
        }
    }

    pub fn from_bits(bits: f64) -> Result<Self> {
        Self::new(bits * std::f64::consts::LN_2)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn bits(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }
}

impl fmt::Display for RateNats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} nats", self.0)
    }
}

fn ensure_conformable(h: &ComplexMatrix, q: &ComplexMatrix, what: &str) -> Result<()> {
    linalg::ensure_square(q, what)?;
    if h.ncols() != q.nrows() {
        return Err(invalid(format!(
            "{what} is {}x{} but channel has {} columns",
            q.nrows(),
            q.ncols(),
            h.ncols()
        )));
    }
    Ok(())
}

/// `ln|I + H·Q·Hᴴ|`.
fn log_det_channel(h: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    linalg::log_det_i_plus(&(h * q * h.adjoint()))
}

/// Bob's rate on the jammed channel,
/// `ln|I + (I + H_bj·Q_j·H_bjᴴ)⁻¹·H_ba·Q_a·H_baᴴ|`.
///
/// Evaluated as `ln|K + S| − ln|K|`, which never forms `K⁻¹`.
pub fn rate_bob_raw(
    h_ba: &ComplexMatrix,
    h_bj: &ComplexMatrix,
    q_j: &ComplexMatrix,
    q_a: &ComplexMatrix,
) -> Result<RateNats> {
    ensure_conformable(h_ba, q_a, "input covariance")?;
    ensure_conformable(h_bj, q_j, "jammer covariance")?;
    if h_ba.nrows() != h_bj.nrows() {
        return Err(invalid("Alice and jammer channels disagree on Bob's antenna count"));
    }
    let k = linalg::identity(h_bj.nrows()) + h_bj * q_j * h_bj.adjoint();
    let signal = h_ba * q_a * h_ba.adjoint();
    let joint = linalg::log_det_i_plus(&(&k - linalg::identity(k.nrows()) + signal));
    let interference = linalg::log_det_i_plus(&(k - linalg::identity(h_bj.nrows())));
    RateNats::from_computed(joint - interference)
}

/// Bob's rate on the whitened channel, `ln|I + H̃·Q_a·H̃ᴴ|`.
pub fn rate_bob_equiv(h_tilde: &ComplexMatrix, q_a: &ComplexMatrix) -> Result<RateNats> {
    ensure_conformable(h_tilde, q_a, "input covariance")?;
    RateNats::from_computed(log_det_channel(h_tilde, q_a))
}

/// Eve's rate without artificial noise, `ln|I + H_ea·Q_a·H_eaᴴ|`.
pub fn rate_eve(h_ea: &ComplexMatrix, q_a: &ComplexMatrix) -> Result<RateNats> {
    ensure_conformable(h_ea, q_a, "input covariance")?;
    RateNats::from_computed(log_det_channel(h_ea, q_a))
}

/// Eve's rate when Alice also radiates artificial noise, `ln|I + Φ|` with
/// `Φ = (I + H·W_z·Q_z·W_zᴴ·Hᴴ)⁻¹·H·W_u·Q_u·W_uᴴ·Hᴴ`.
///
/// Evaluated as `ln|I + A_z + A_u| − ln|I + A_z|`.
pub fn rate_eve_with_an(
    h_eve: &ComplexMatrix,
    w_u: &ComplexMatrix,
    q_u: &ComplexMatrix,
    w_z: &ComplexMatrix,
    q_z: &ComplexMatrix,
) -> Result<RateNats> {
    if w_u.nrows() != h_eve.ncols() || w_z.nrows() != h_eve.ncols() {
        return Err(invalid("precoder rows must match the transmit antenna count"));
    }
    ensure_conformable(w_u, q_u, "information covariance")?;
    ensure_conformable(w_z, q_z, "artificial-noise covariance")?;
    let g_u = h_eve * w_u;
    let g_z = h_eve * w_z;
    let a_u = &g_u * q_u * g_u.adjoint();
    let a_z = &g_z * q_z * g_z.adjoint();
    let total = linalg::log_det_i_plus(&(&a_z + a_u));
    let noise = linalg::log_det_i_plus(&a_z);
    RateNats::from_computed(total - noise)
}

/// `[r_b − r_e]⁺`.
pub fn secrecy_rate(r_b: RateNats, r_e: RateNats) -> RateNats {
    RateNats((r_b.0 - r_e.0).max(0.0))
}
