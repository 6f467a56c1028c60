//! System configuration, channel realizations and the jammer covariance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{self, ComplexMatrix};

/// Antenna counts, power budgets and Monte Carlo sizes of one experiment.
///
/// Powers are linear with unit receiver noise variance. `target_rate` is in
/// nats per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub n_j: usize,
    pub p_total: f64,
    pub p_jam: f64,
    pub target_rate: f64,
    pub n_sim: usize,
    pub n_trials: usize,
    pub seed: u64,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [
            ("n_a", self.n_a),
            ("n_b", self.n_b),
            ("n_e", self.n_e),
            ("n_j", self.n_j),
        ] {
            if n == 0 {
                return Err(invalid(format!("{name} must be at least 1")));
            }
        }
        if self.n_a <= self.n_e {
            return Err(invalid(format!(
                "transmitter needs more antennas than the eavesdropper (n_a = {}, n_e = {})",
                self.n_a, self.n_e
            )));
        }
        for (name, v) in [
            ("p_total", self.p_total),
            ("p_jam", self.p_jam),
            ("target_rate", self.target_rate),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.n_sim == 0 {
            return Err(invalid("n_sim must be at least 1"));
        }
        if self.n_trials == 0 {
            return Err(invalid("n_trials must be at least 1"));
        }
        Ok(())
    }
}

/// The three channel matrices drawn for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Alice to Bob, `n_b × n_a`.
    pub h_ba: ComplexMatrix,
    /// Jammer to Bob, `n_b × n_j`.
    pub h_bj: ComplexMatrix,
    /// Alice to Eve, `n_e × n_a`.
    pub h_ea: ComplexMatrix,
}

/// Which matrix a random substream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MatrixRole {
    AliceBob = 0,
    JammerBob = 1,
    AliceEve = 2,
    SimulatedEve = 3,
}

/// Random substreams for one Monte Carlo trial.
///
/// Every `(seed, trial_index, role)` triple selects its own ChaCha stream, so a
/// trial's draws do not depend on which other trials ran or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStream {
    pub seed: u64,
    pub trial_index: u64,
}

impl TrialStream {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        Self { seed, trial_index }
    }

    pub fn rng(&self, role: MatrixRole) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((self.trial_index << 8) | role as u64);
        rng
    }
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries with unit
/// variance (real and imaginary parts each of variance 1/2).
pub fn generate_gaussian_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(invalid(format!("matrix dimensions must be positive, got {rows}x{cols}")));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill order, re before im.
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    }))
}

/// Omni-directional jamming covariance `(p_jam / n_j)·I`.
pub fn jammer_covariance(p_jam: f64, n_j: usize) -> Result<ComplexMatrix> {
    if n_j == 0 {
        return Err(invalid("n_j must be at least 1"));
    }
    if !(p_jam >= 0.0) || !p_jam.is_finite() {
        return Err(invalid(format!("jamming power must be finite and >= 0, got {p_jam}")));
    }
    Ok(linalg::identity(n_j).scale(p_jam / n_j as f64))
}

/// Draws the three channels of one trial from its substreams.
pub fn realize_system(config: &SystemConfig, stream: &TrialStream) -> Result<ChannelRealization> {
    let h_ba = generate_gaussian_matrix(&mut stream.rng(MatrixRole::AliceBob), config.n_b, config.n_a)?;
    let h_bj = generate_gaussian_matrix(&mut stream.rng(MatrixRole::JammerBob), config.n_b, config.n_j)?;
    let h_ea = generate_gaussian_matrix(&mut stream.rng(MatrixRole::AliceEve), config.n_e, config.n_a)?;
    Ok(ChannelRealization { h_ba, h_bj, h_ea })
}
