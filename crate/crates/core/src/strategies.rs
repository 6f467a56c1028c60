//! Transmit designs for the two eavesdropper-knowledge regimes.
//!
//! Both designs send information along the strongest right singular vectors
//! of the whitened channel and fill the remaining transmit dimensions with
//! uniform artificial noise (AN), which is invisible to Bob.
//!
//! * Unknown eavesdropper channel: fix a target rate, give AN as many
//!   dimensions as Eve has antennas, and spend the least power that meets the
//!   target. Dimensions move from AN to information only while the budget is
//!   exceeded; when none are left the link is in outage.
//! * Statistical eavesdropper channel: draw simulated eavesdropper channels and
//!   pick the information/AN power split `ρ` and information dimension `r`
//!   maximizing the mean secrecy rate over them.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::generate_gaussian_matrix;
use crate::error::{invalid, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::powalloc::{inverse_waterfill, power_ratio, waterfill, GainVector, PowerAllocation};
use crate::rates::{rate_eve_with_an, secrecy_rate, RateNats};
use crate::whitening::WhitenedChannel;

/// Absolute tolerance of the golden-section search over `ρ`.
pub const RHO_TOLERANCE: f64 = 1e-3;

/// Spacing of the bracketing scan that seeds the golden-section search.
const RHO_SCAN_STEP: f64 = 0.05;

/// Where the dimension search of the unknown-ECSI design starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialDimension {
    /// `d1 = min(n_a − n_e, c_rank)`: AN covers Eve's receive space.
    #[default]
    EveAntennas,
    /// `d1 = 1`, for when Eve's antenna count is unknown too.
    Single,
}

/// A complete transmit strategy: precoders, powers and the AN level.
#[derive(Debug, Clone)]
pub struct TransmitDesign {
    /// Information precoder, `n_a × d1`.
    pub w_u: ComplexMatrix,
    /// AN shaping matrix, `n_a × d2`.
    pub w_z: ComplexMatrix,
    /// Information power per stream.
    pub powers: PowerAllocation,
    /// Fraction of the budget carrying information.
    pub rho: f64,
    pub d1: usize,
    pub d2: usize,
    /// Power of each AN symbol, `(1 − ρ)·P / d2`.
    pub an_power: f64,
    /// Rate delivered to Bob on the whitened channel.
    pub bob_rate: RateNats,
    pub outage: bool,
}

impl TransmitDesign {
    fn from_basis(
        wch: &WhitenedChannel,
        d1: usize,
        powers: PowerAllocation,
        rho: f64,
        p_total: f64,
        bob_rate: RateNats,
        outage: bool,
    ) -> Self {
        let n_a = wch.n_a();
        let d2 = n_a - d1;
        let an_power = if d2 > 0 && !outage {
            ((1.0 - rho) * p_total / d2 as f64).max(0.0)
        } else {
            0.0
        };
        Self {
            w_u: wch.right_vectors.columns(0, d1).into_owned(),
            w_z: wch.right_vectors.columns(d1, d2).into_owned(),
            powers,
            rho,
            d1,
            d2,
            an_power,
            bob_rate,
            outage,
        }
    }

    /// `diag(P_1, …, P_d1)`.
    pub fn q_u(&self) -> ComplexMatrix {
        linalg::real_diagonal(&self.powers.powers)
    }

    /// `an_power · I_d2`.
    pub fn q_z(&self) -> ComplexMatrix {
        linalg::identity(self.d2).scale(self.an_power)
    }

    /// Transmit covariance `W_u·Q_u·W_uᴴ + W_z·Q_z·W_zᴴ`.
    pub fn transmit_covariance(&self) -> ComplexMatrix {
        &self.w_u * self.q_u() * self.w_u.adjoint() + &self.w_z * self.q_z() * self.w_z.adjoint()
    }

    /// Eve's rate on `h_eve` under this design's AN; zero in outage.
    pub fn eve_rate(&self, h_eve: &ComplexMatrix) -> Result<RateNats> {
        if self.outage {
            return Ok(RateNats::ZERO);
        }
        rate_eve_with_an(h_eve, &self.w_u, &self.q_u(), &self.w_z, &self.q_z())
    }

    /// Realized secrecy rate against the eavesdropper channel `h_eve`.
    pub fn secrecy_against(&self, h_eve: &ComplexMatrix) -> Result<RateNats> {
        if self.outage {
            return Ok(RateNats::ZERO);
        }
        Ok(secrecy_rate(self.bob_rate, self.eve_rate(h_eve)?))
    }
}

fn usable_gains(wch: &WhitenedChannel) -> Result<GainVector> {
    if wch.c_rank == 0 {
        return Err(invalid("whitened channel has no usable eigenmode"));
    }
    GainVector::new(wch.usable_gains())
}

/// Target-rate design when Alice knows nothing about Eve's channel.
///
/// Starts from `initial` information dimensions, solves the minimum-power
/// allocation for `target_rate`, and hands one AN dimension at a time to the
/// information streams while the required power exceeds `p_total`. If all
/// `c_rank` eigenmodes are in use and the budget still does not suffice, the
/// design is in outage and transmits nothing.
pub fn design_unknown_ecsi(
    wch: &WhitenedChannel,
    n_e: usize,
    p_total: f64,
    target_rate: RateNats,
    initial: InitialDimension,
) -> Result<TransmitDesign> {
    let n_a = wch.n_a();
    if n_a <= n_e {
        return Err(invalid(format!(
            "transmitter needs more antennas than the eavesdropper (n_a = {n_a}, n_e = {n_e})"
        )));
    }
    if !(p_total >= 0.0) || !p_total.is_finite() {
        return Err(invalid(format!("total power must be finite and >= 0, got {p_total}")));
    }
    let gains = usable_gains(wch)?;
    let c_rank = gains.len();

    let mut d1 = match initial {
        InitialDimension::EveAntennas => (n_a - n_e).min(c_rank),
        InitialDimension::Single => 1,
    };
    loop {
        let alloc = inverse_waterfill(&gains.top(d1)?, target_rate)?;
        let rho = if p_total > 0.0 {
            power_ratio(&alloc, p_total)?
        } else if alloc.total == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if rho <= 1.0 {
            return Ok(TransmitDesign::from_basis(wch, d1, alloc, rho, p_total, target_rate, false));
        }
        if d1 >= c_rank {
            return Ok(TransmitDesign::from_basis(
                wch,
                d1,
                PowerAllocation::zeros(d1),
                0.0,
                p_total,
                RateNats::ZERO,
                true,
            ));
        }
        d1 += 1;
    }
}

/// Eavesdropper channel law known to Alice: i.i.d. unit-variance circular
/// complex Gaussian entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EcsiDistribution {
    pub n_e: usize,
}

impl EcsiDistribution {
    pub fn new(n_e: usize) -> Result<Self> {
        if n_e == 0 {
            return Err(invalid("n_e must be at least 1"));
        }
        Ok(Self { n_e })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n_a: usize, count: usize) -> Result<Vec<ComplexMatrix>> {
        (0..count).map(|_| generate_gaussian_matrix(rng, self.n_e, n_a)).collect()
    }
}

/// Precomputed evaluator of the per-simulation secrecy rate
/// `R̂_s(r, ρ, i) = Σ_{k<r} ln(1 + g_k·P_k) − ln|I + Φ̂(i)|`.
///
/// For each simulated channel `Ĥ(i)` the outer products `g_k·g_kᴴ` of the
/// columns of `Ĥ(i)·V` are cached together with their suffix sums, so Eve's
/// two log-determinants cost one `n_e × n_e` assembly and Cholesky each.
pub struct SecrecyObjective {
    gains: GainVector,
    n_a: usize,
    n_e: usize,
    p_total: f64,
    /// `outer[i][k]`: column-major `n_e × n_e` block for sim `i`, column `k`.
    outer: Vec<Vec<Vec<Complex64>>>,
    /// `suffix[i][r] = Σ_{k ≥ r} outer[i][k]`, `r = 0..=n_a`.
    suffix: Vec<Vec<Vec<Complex64>>>,
}

impl SecrecyObjective {
    pub fn new(wch: &WhitenedChannel, sims: &[ComplexMatrix], p_total: f64) -> Result<Self> {
        let gains = usable_gains(wch)?;
        if sims.is_empty() {
            return Err(invalid("at least one simulated eavesdropper channel is required"));
        }
        if !(p_total >= 0.0) || !p_total.is_finite() {
            return Err(invalid(format!("total power must be finite and >= 0, got {p_total}")));
        }
        let n_a = wch.n_a();
        let n_e = sims[0].nrows();
        let mut outer = Vec::with_capacity(sims.len());
        let mut suffix = Vec::with_capacity(sims.len());
        for h in sims {
            if h.shape() != (n_e, n_a) {
                return Err(invalid(format!(
                    "simulated channel is {}x{}, expected {n_e}x{n_a}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let g = h * &wch.right_vectors;
            let blocks: Vec<Vec<Complex64>> = (0..n_a)
                .map(|k| {
                    let col = g.column(k);
                    let mut block = vec![Complex64::new(0.0, 0.0); n_e * n_e];
                    for c in 0..n_e {
                        for r in 0..n_e {
                            block[c * n_e + r] = col[r] * col[c].conj();
                        }
                    }
                    block
                })
                .collect();
            let mut sums = vec![vec![Complex64::new(0.0, 0.0); n_e * n_e]; n_a + 1];
            for k in (0..n_a).rev() {
                let (head, tail) = sums.split_at_mut(k + 1);
                for ((dst, a), b) in head[k].iter_mut().zip(&tail[0]).zip(&blocks[k]) {
                    *dst = a + b;
                }
            }
            outer.push(blocks);
            suffix.push(sums);
        }
        Ok(Self {
            gains,
            n_a,
            n_e,
            p_total,
            outer,
            suffix,
        })
    }

    pub fn c_rank(&self) -> usize {
        self.gains.len()
    }

    pub fn n_sim(&self) -> usize {
        self.outer.len()
    }

    fn check(&self, r: usize, rho: f64) -> Result<()> {
        if r == 0 || r > self.c_rank() {
            return Err(invalid(format!("r = {r} outside 1..={}", self.c_rank())));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("rho = {rho} outside [0, 1]")));
        }
        Ok(())
    }

    /// Information powers `waterfill(top-r gains, ρ·P)`.
    pub fn allocation(&self, r: usize, rho: f64) -> Result<PowerAllocation> {
        self.check(r, rho)?;
        waterfill(&self.gains.top(r)?, rho * self.p_total)
    }

    fn an_power(&self, r: usize, rho: f64) -> f64 {
        let d2 = self.n_a - r;
        if d2 == 0 {
            0.0
        } else {
            ((1.0 - rho) * self.p_total / d2 as f64).max(0.0)
        }
    }

    /// `R̂_s(r, ρ, i)` for every simulated channel, unclamped.
    pub fn per_simulation(&self, r: usize, rho: f64) -> Result<Vec<f64>> {
        let alloc = self.allocation(r, rho)?;
        let bob = alloc.achieved_rate.value();
        let q_z = self.an_power(r, rho);
        let n = self.n_e;
        let mut noise = vec![Complex64::new(0.0, 0.0); n * n];
        let mut total = vec![Complex64::new(0.0, 0.0); n * n];
        let mut out = Vec::with_capacity(self.n_sim());
        for (blocks, sums) in self.outer.iter().zip(&self.suffix) {
            for (dst, s) in noise.iter_mut().zip(&sums[r]) {
                *dst = s * q_z;
            }
            for d in 0..n {
                noise[d * n + d] += 1.0;
            }
            total.copy_from_slice(&noise);
            for (block, &p) in blocks.iter().zip(&alloc.powers) {
                if p > 0.0 {
                    for (dst, b) in total.iter_mut().zip(block) {
                        *dst += b * p;
                    }
                }
            }
            let eve = match (
                linalg::log_det_hpd_in_place(&mut total, n),
                linalg::log_det_hpd_in_place(&mut noise, n),
            ) {
                (Some(t), Some(z)) => (t - z).max(0.0),
                _ => self.eve_fallback(blocks, &alloc.powers, q_z, r),
            };
            out.push(bob - eve);
        }
        Ok(out)
    }

    fn eve_fallback(&self, blocks: &[Vec<Complex64>], powers: &[f64], q_z: f64, r: usize) -> f64 {
        let n = self.n_e;
        let assemble = |weight: &dyn Fn(usize) -> f64| {
            let mut m = linalg::zeros(n, n);
            for (k, block) in blocks.iter().enumerate() {
                let w = weight(k);
                for c in 0..n {
                    for row in 0..n {
                        m[(row, c)] += block[c * n + row] * w;
                    }
                }
            }
            m
        };
        let a_z = assemble(&|k| if k >= r { q_z } else { 0.0 });
        let a_all = assemble(&|k| if k >= r { q_z } else { powers.get(k).copied().unwrap_or(0.0) });
        (linalg::log_det_i_plus(&a_all) - linalg::log_det_i_plus(&a_z)).max(0.0)
    }

    /// Mean over simulations of `max(0, R̂_s(r, ρ, i))`.
    pub fn average(&self, r: usize, rho: f64) -> Result<f64> {
        let v = self.per_simulation(r, rho)?;
        Ok(v.iter().map(|x| x.max(0.0)).sum::<f64>() / v.len() as f64)
    }
}

/// Golden-section maximization of `f` on `[lo, hi]`.
pub fn golden_section_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximizes `f` over `ρ ∈ [0, 1]`: a coarse scan brackets the best region,
/// golden-section refines it, and the better of the two is returned.
fn maximize_rho<F>(mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let steps = (1.0 / RHO_SCAN_STEP).round() as usize;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=steps {
        let rho = i as f64 / steps as f64;
        let v = f(rho)?;
        if v > best.1 {
            best = (rho, v);
        }
    }
    let lo = (best.0 - RHO_SCAN_STEP).max(0.0);
    let hi = (best.0 + RHO_SCAN_STEP).min(1.0);
    let refined = golden_section_max(&mut f, lo, hi, RHO_TOLERANCE)?;
    Ok(if refined.1 > best.1 { refined } else { best })
}

/// Mean secrecy rate over `sims` for information dimension `r` and split `rho`.
pub fn average_secrecy_objective(
    wch: &WhitenedChannel,
    sims: &[ComplexMatrix],
    r: usize,
    rho: f64,
    p_total: f64,
) -> Result<RateNats> {
    RateNats::from_computed(SecrecyObjective::new(wch, sims, p_total)?.average(r, rho)?)
}

/// Statistical-ECSI design from already drawn eavesdropper channels.
///
/// For every information dimension `r` a golden-section search finds the
/// split `ρ` maximizing the mean secrecy rate over the simulations; the best
/// `(ρ*, r*)` pair wins, ties going to the smaller `r`.
pub fn design_from_simulations(
    wch: &WhitenedChannel,
    sims: &[ComplexMatrix],
    p_total: f64,
) -> Result<TransmitDesign> {
    let objective = SecrecyObjective::new(wch, sims, p_total)?;
    let mut best = (1, 0.0, f64::NEG_INFINITY);
    for r in 1..=objective.c_rank() {
        let (rho, v) = maximize_rho(|rho| objective.average(r, rho))?;
        if v > best.2 {
            best = (r, rho, v);
        }
    }
    let (r, rho, _) = best;
    let alloc = objective.allocation(r, rho)?;
    let bob = alloc.achieved_rate;
    Ok(TransmitDesign::from_basis(wch, r, alloc, rho, p_total, bob, false))
}

/// Statistical-ECSI design: draws `n_sim` eavesdropper channels from `dist`
/// and optimizes the power split and dimension against them.
pub fn design_statistical_ecsi<R: Rng + ?Sized>(
    wch: &WhitenedChannel,
    dist: &EcsiDistribution,
    p_total: f64,
    n_sim: usize,
    rng: &mut R,
) -> Result<TransmitDesign> {
    if n_sim == 0 {
        return Err(invalid("n_sim must be at least 1"));
    }
    let sims = dist.sample(rng, wch.n_a(), n_sim)?;
    design_from_simulations(wch, &sims, p_total)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::jammer_covariance;
    use crate::linalg::{fro_norm, identity, real_diagonal, zeros};
    use crate::rates::rate_bob_equiv;
    use crate::whitening::{whiten, whiten_with_jammer};

    fn nats(v: f64) -> RateNats {
        RateNats::new(v).unwrap()
    }

    /// Whitened channel with singular values `sigma` on `n_a` transmit antennas.
    fn diagonal_channel(sigma: &[f64], n_a: usize) -> WhitenedChannel {
        let n_b = sigma.len();
        let mut h = zeros(n_b, n_a);
        for (i, s) in sigma.iter().enumerate() {
            h[(i, i)] = Complex64::new(*s, 0.0);
        }
        whiten(&h, &identity(n_b)).unwrap()
    }

    fn random_channel(seed: u64, p_jam: f64) -> WhitenedChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h_ba = generate_gaussian_matrix(&mut rng, 4, 6).unwrap();
        let h_bj = generate_gaussian_matrix(&mut rng, 4, 4).unwrap();
        whiten_with_jammer(&h_ba, &h_bj, &jammer_covariance(p_jam, 4).unwrap()).unwrap()
    }

    #[test]
    fn unknown_zero_rate() {
        let wch = random_channel(1, 1.0);
        let d = design_unknown_ecsi(&wch, 4, 10.0, RateNats::ZERO, InitialDimension::EveAntennas).unwrap();
        assert_eq!(d.d1, 2);
        assert_eq!(d.d2, 4);
        assert_eq!(d.rho, 0.0);
        assert!(!d.outage);
        assert!(d.powers.powers.iter().all(|p| *p == 0.0));
        assert!((d.an_power - 2.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_single_gain() {
        let wch = diagonal_channel(&[1.0], 2);
        let d = design_unknown_ecsi(&wch, 1, 10.0, nats(2f64.ln()), InitialDimension::EveAntennas).unwrap();
        assert_eq!(d.d1, 1);
        assert!((d.powers.powers[0] - 1.0).abs() < 1e-12);
        assert!((d.rho - 0.1).abs() < 1e-12);
        assert!(!d.outage);

        let d = design_unknown_ecsi(&wch, 1, 10.0, nats(12f64.ln()), InitialDimension::EveAntennas).unwrap();
        assert!(d.outage);
        assert!(d.powers.powers.iter().all(|p| *p == 0.0));
        let h_eve = ComplexMatrix::from_element(1, 2, Complex64::new(1.0, 0.0));
        assert_eq!(d.secrecy_against(&h_eve).unwrap().value(), 0.0);
    }

    #[test]
    fn unknown_rejects_small_array() {
        let wch = random_channel(2, 1.0);
        assert!(design_unknown_ecsi(&wch, 6, 10.0, nats(1.0), InitialDimension::EveAntennas).is_err());
    }

    #[test]
    fn unknown_escalates_only_when_forced() {
        for seed in 0..200 {
            let wch = random_channel(seed, 10.0);
            let rate = nats(4.0);
            let d = design_unknown_ecsi(&wch, 4, 10.0, rate, InitialDimension::EveAntennas).unwrap();
            let start = 2.min(wch.c_rank);
            if !d.outage {
                let gains = GainVector::new(wch.usable_gains()).unwrap();
                let achieved = gains.top(d.d1).unwrap().sum_rate(&d.powers.powers);
                assert!((achieved - 4.0).abs() <= 1e-8);
                assert!(d.powers.total <= 10.0 + 1e-10);
                if d.d1 > start {
                    let smaller = inverse_waterfill(&gains.top(d.d1 - 1).unwrap(), rate).unwrap();
                    assert!(smaller.total > 10.0);
                }
            }
            assert_eq!(d.d1 + d.d2, 6);
        }
    }

    #[test]
    fn single_start_uses_fewer_dimensions() {
        let wch = random_channel(3, 0.0);
        let d = design_unknown_ecsi(&wch, 4, 10.0, nats(0.5), InitialDimension::Single).unwrap();
        assert_eq!(d.d1, 1);
    }

    #[test]
    fn an_is_orthogonal_at_bob() {
        for seed in 0..20 {
            let wch = random_channel(seed, 3.0);
            let d = design_unknown_ecsi(&wch, 4, 10.0, nats(2.0), InitialDimension::EveAntennas).unwrap();
            let cross = (&wch.h_tilde * &d.w_u).adjoint() * (&wch.h_tilde * &d.w_z);
            assert!(fro_norm(&cross) <= 1e-9 * fro_norm(&wch.h_tilde).powi(2));
            let mut full = zeros(6, 6);
            full.columns_mut(0, d.d1).copy_from(&d.w_u);
            full.columns_mut(d.d1, d.d2).copy_from(&d.w_z);
            assert!(fro_norm(&(full.adjoint() * &full - identity(6))) < 1e-10);
        }
    }

    #[test]
    fn objective_cases() {
        let wch = random_channel(4, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let sims = EcsiDistribution::new(4).unwrap().sample(&mut rng, 6, 5).unwrap();
        assert_eq!(average_secrecy_objective(&wch, &sims, 2, 0.0, 10.0).unwrap().value(), 0.0);
        assert!(average_secrecy_objective(&wch, &sims, 0, 0.5, 10.0).is_err());
        assert!(average_secrecy_objective(&wch, &sims, 5, 0.5, 10.0).is_err());
        assert!(average_secrecy_objective(&wch, &sims, 1, 1.5, 10.0).is_err());

        let null = vec![zeros(4, 6); 3];
        let obj = average_secrecy_objective(&wch, &null, 3, 0.7, 10.0).unwrap().value();
        let alloc = waterfill(&GainVector::new(wch.usable_gains()).unwrap().top(3).unwrap(), 7.0).unwrap();
        let w_u = wch.right_vectors.columns(0, 3).into_owned();
        let bob = rate_bob_equiv(&wch.h_tilde, &(&w_u * real_diagonal(&alloc.powers) * w_u.adjoint()))
            .unwrap()
            .value();
        assert!((obj - bob).abs() < 1e-10);
    }

    #[test]
    fn objective_scalar_hand_value() {
        let wch = diagonal_channel(&[1.0], 2);
        let sims = vec![ComplexMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        )];
        // AN is on the second transmit dimension, which this Eve cannot see.
        let v = average_secrecy_objective(&wch, &sims, 1, 0.5, 2.0).unwrap().value();
        assert!((v - (2f64.ln() - 2f64.ln())).abs() < 1e-14);

        // Unit gain to Eve on both dimensions, Q_u = 1 and Q_z = 1:
        // ln 2 − ln(1 + 1/(1 + 1)) = ln(4/3).
        let sims = vec![ComplexMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)])];
        let v = average_secrecy_objective(&wch, &sims, 1, 0.5, 2.0).unwrap().value();
        assert!((v - (4.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn objective_matches_general_rate_functions() {
        let wch = random_channel(5, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let sims = EcsiDistribution::new(4).unwrap().sample(&mut rng, 6, 4).unwrap();
        let obj = SecrecyObjective::new(&wch, &sims, 10.0).unwrap();
        for r in 1..=4 {
            for rho in [0.1, 0.5, 0.9, 1.0] {
                let fast = obj.per_simulation(r, rho).unwrap();
                let alloc = obj.allocation(r, rho).unwrap();
                let d = TransmitDesign::from_basis(&wch, r, alloc.clone(), rho, 10.0, alloc.achieved_rate, false);
                for (h, f) in sims.iter().zip(&fast) {
                    let bob = rate_bob_equiv(&wch.h_tilde, &(&d.w_u * d.q_u() * d.w_u.adjoint())).unwrap();
                    let slow = bob.value() - d.eve_rate(h).unwrap().value();
                    assert!((slow - f).abs() < 1e-10, "r={r} rho={rho}: {slow} vs {f}");
                }
            }
        }
    }

    #[test]
    fn statistical_null_eavesdropper_uses_all_power() {
        let wch = random_channel(6, 1.0);
        let d = design_from_simulations(&wch, &[zeros(4, 6)], 10.0).unwrap();
        assert_eq!(d.rho, 1.0);
        assert!(!d.outage);
    }

    #[test]
    fn statistical_is_deterministic_and_budgeted() {
        let wch = random_channel(7, 4.0);
        let dist = EcsiDistribution::new(4).unwrap();
        let a = design_statistical_ecsi(&wch, &dist, 10.0, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = design_statistical_ecsi(&wch, &dist, 10.0, 20, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.rho, b.rho);
        assert_eq!(a.d1, b.d1);
        assert_eq!(a.powers, b.powers);
        let spent = a.powers.total + a.an_power * a.d2 as f64;
        assert!((spent - 10.0).abs() < 1e-10);
        assert!(a.transmit_covariance().trace().re - 10.0 < 1e-9);
    }

    #[test]
    fn statistical_beats_grid() {
        let wch = random_channel(8, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let sims = EcsiDistribution::new(4).unwrap().sample(&mut rng, 6, 5).unwrap();
        let d = design_from_simulations(&wch, &sims, 10.0).unwrap();
        let obj = SecrecyObjective::new(&wch, &sims, 10.0).unwrap();
        let got = obj.average(d.d1, d.rho).unwrap();
        for i in 0..=100 {
            for r in 1..=obj.c_rank() {
                let v = obj.average(r, i as f64 / 100.0).unwrap();
                assert!(got >= v - 1e-3, "grid point rho={} r={r}: {v} > {got}", i as f64 / 100.0);
            }
        }
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| Ok(-(x - 0.3f64).powi(2)), 0.0, 1.0, 1e-6).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!(fx <= 0.0);
    }
}
