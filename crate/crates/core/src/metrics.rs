//! Link SNR/SINR, spectral efficiency and energy efficiency.
//!
//! The mmWave SINR needs expectations of the squared Fejér kernel over
//! angular offsets. Those are computed by fixed-grid quadrature; a seeded
//! Monte-Carlo engine over the same distributions serves as the cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

use crate::channel::fejer_kernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// MBSALA to BMAA beam.
    MacroBackhaul,
    /// MBSALA straight to an indoor user through the wall.
    MacroDirect,
    MmWaveAccess,
    LiFiAccess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnr {
    pub kind: LinkKind,
    pub value: f64,
}

impl LinkSnr {
    pub fn new(kind: LinkKind, value: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::Domain(format!("SINR must be finite and >= 0, got {value}")));
        }
        Ok(Self { kind, value })
    }

    pub fn db(&self) -> f64 {
        10.0 * self.value.log10()
    }
}

/// Expected SNR of a matched beam: `beta M_T P / (sigma2 / M_R)`.
pub fn snr_macro(beta: f64, m_t: usize, m_r: usize, p_sig: f64, sigma2: f64) -> LinkSnr {
    LinkSnr {
        kind: LinkKind::MacroBackhaul,
        value: beta * m_t as f64 * p_sig / (sigma2 / m_r as f64),
    }
}

/// Signal power a matched macro beam needs to reach `snr`.
pub fn macro_power_for_snr(snr: f64, beta: f64, m_t: usize, m_r: usize, sigma2: f64) -> f64 {
    snr * sigma2 / (beta * m_t as f64 * m_r as f64)
}

/// Distribution of an angular offset in sine space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleDist {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
    /// Symmetric triangle on `[center - half_width, center + half_width]`,
    /// i.e. the difference of two i.i.d. uniforms of width `half_width`.
    Triangular { center: f64, half_width: f64 },
}

impl AngleDist {
    pub fn shifted(self, by: f64) -> Self {
        match self {
            AngleDist::Fixed(x) => AngleDist::Fixed(x + by),
            AngleDist::Uniform { lo, hi } => AngleDist::Uniform {
                lo: lo + by,
                hi: hi + by,
            },
            AngleDist::Triangular { center, half_width } => AngleDist::Triangular {
                center: center + by,
                half_width,
            },
        }
    }

    fn is_degenerate(&self) -> bool {
        match *self {
            AngleDist::Fixed(_) => true,
            AngleDist::Uniform { lo, hi } => hi <= lo,
            AngleDist::Triangular { half_width, .. } => half_width <= 0.0,
        }
    }

    fn point(&self) -> f64 {
        match *self {
            AngleDist::Fixed(x) => x,
            AngleDist::Uniform { lo, hi } => 0.5 * (lo + hi),
            AngleDist::Triangular { center, .. } => center,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            AngleDist::Fixed(x) => x,
            AngleDist::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            AngleDist::Triangular { center, half_width } => {
                center + half_width * (rng.random::<f64>() - rng.random::<f64>())
            }
        }
    }
}

/// How expectations over [`AngleDist`] are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// Midpoint rule on a fixed grid.
    Quadrature { points: usize },
    /// Seeded Monte-Carlo average.
    MonteCarlo { draws: u64, seed: u64 },
}

impl Default for Expectation {
    fn default() -> Self {
        Expectation::Quadrature { points: 4096 }
    }
}

const MC_CHUNK: u64 = 1 << 16;

/// Seeded Monte-Carlo mean of `f(sample)`. Each chunk of draws uses its own
/// ChaCha stream, so the result does not depend on thread scheduling.
fn monte_carlo_mean<F>(draws: u64, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks = draws.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = MC_CHUNK.min(draws - c * MC_CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let v = f(&mut rng);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), &(s, q)| (a + s, b + q));
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// `E[F_M(X)^2]` for `X ~ dist`.
pub fn expected_kernel_sq(m: usize, dist: AngleDist, engine: Expectation) -> f64 {
    if dist.is_degenerate() {
        let f = fejer_kernel(m, dist.point());
        return f * f;
    }
    let f2 = |x: f64| {
        let f = fejer_kernel(m, x);
        f * f
    };
    match engine {
        Expectation::Quadrature { points } => {
            let n = points.max(2);
            match dist {
                AngleDist::Uniform { lo, hi } => {
                    let h = (hi - lo) / n as f64;
                    (0..n).map(|i| f2(lo + (i as f64 + 0.5) * h)).sum::<f64>() / n as f64
                }
                AngleDist::Triangular { center, half_width } => {
                    // Even point count puts the apex on a cell boundary.
                    let n = n + n % 2;
                    let lo = center - half_width;
                    let h = 2.0 * half_width / n as f64;
                    (0..n)
                        .map(|i| {
                            let x = lo + (i as f64 + 0.5) * h;
                            let pdf = (half_width - (x - center).abs()) / (half_width * half_width);
                            f2(x) * pdf * h
                        })
                        .sum()
                }
                AngleDist::Fixed(_) => unreachable!(),
            }
        }
        Expectation::MonteCarlo { draws, seed } => {
            monte_carlo_mean(draws.max(1), seed, |rng| f2(dist.sample(rng))).0
        }
    }
}

/// Angular offsets `theta_k - theta_{m_j}` for every user `k` and beam `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetModel {
    offsets: Vec<Vec<AngleDist>>,
}

impl OffsetModel {
    /// Fixed AoDs and beam angles: plug-in evaluation.
    pub fn plug_in(aods: &[f64], beams: &[f64]) -> Result<Self> {
        let dists: Vec<AngleDist> = aods.iter().map(|&a| AngleDist::Fixed(a)).collect();
        Self::from_aods(&dists, beams)
    }

    /// Random AoD per user, fixed beam angles.
    pub fn from_aods(aods: &[AngleDist], beams: &[f64]) -> Result<Self> {
        if aods.len() != beams.len() {
            return Err(Error::LengthMismatch(format!(
                "{} AoDs vs {} beam assignments",
                aods.len(),
                beams.len()
            )));
        }
        let offsets = aods
            .iter()
            .map(|aod| beams.iter().map(|&b| aod.shifted(-b)).collect())
            .collect();
        Ok(Self { offsets })
    }

    /// Beams matched to their own user (perfect CSI); users' AoDs i.i.d.
    /// uniform over `[-half_width, half_width]`, so cross offsets are
    /// triangular over twice that width.
    pub fn matched_uniform_sector(n: usize, half_width: f64) -> Self {
        let offsets = (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        if j == k {
                            AngleDist::Fixed(0.0)
                        } else {
                            AngleDist::Triangular {
                                center: 0.0,
                                half_width: 2.0 * half_width,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Self { offsets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `G[k][j] = E[F_M^2(theta_k - theta_{m_j})]`.
    pub fn gain_matrix(&self, m: usize, engine: Expectation) -> Vec<Vec<f64>> {
        self.offsets
            .iter()
            .map(|row| row.iter().map(|&d| expected_kernel_sq(m, d, engine)).collect())
            .collect()
    }
}

/// Expected SINR for user `k` given the kernel-gain matrix.
/// The interference term reuses `beta[k]`.
pub fn sinr_mmwave_from_gains(
    k: usize,
    gains: &[Vec<f64>],
    beta: &[f64],
    powers: &[f64],
    sigma2: f64,
) -> Result<LinkSnr> {
    let n = gains.len();
    if beta.len() != n || powers.len() != n || gains.iter().any(|r| r.len() != n) {
        return Err(Error::LengthMismatch(format!(
            "{} users, {} gains, {} powers",
            n,
            beta.len(),
            powers.len()
        )));
    }
    if k >= n {
        return Err(Error::LengthMismatch(format!("user {k} out of {n}")));
    }
    let desired = beta[k] * gains[k][k] * powers[k];
    let interference: f64 = (0..n)
        .filter(|&j| j != k)
        .map(|j| gains[k][j] * powers[j])
        .sum::<f64>()
        * beta[k];
    LinkSnr::new(LinkKind::MmWaveAccess, desired / (interference + sigma2))
}

/// Expected SINR of mmWave user `k` with AoD distributions and beam angles.
#[allow(clippy::too_many_arguments)]
pub fn sinr_mmwave(
    k: usize,
    aods: &[AngleDist],
    beams: &[f64],
    beta: &[f64],
    powers: &[f64],
    m_t_iap: usize,
    sigma2: f64,
    engine: Expectation,
) -> Result<LinkSnr> {
    if beta.len() != aods.len() || powers.len() != aods.len() {
        return Err(Error::LengthMismatch(format!(
            "{} AoDs, {} gains, {} powers",
            aods.len(),
            beta.len(),
            powers.len()
        )));
    }
    let gains = OffsetModel::from_aods(aods, beams)?.gain_matrix(m_t_iap, engine);
    sinr_mmwave_from_gains(k, &gains, beta, powers, sigma2)
}

/// Per-user transmit powers meeting every SINR target simultaneously, or
/// `None` when the targets are not jointly reachable.
pub fn mmwave_powers_for_targets(
    gains: &[Vec<f64>],
    beta: &[f64],
    targets: &[f64],
    sigma2: f64,
) -> Option<Vec<f64>> {
    let n = gains.len();
    if targets.iter().all(|&t| t == 0.0) {
        return Some(vec![0.0; n]);
    }
    let a = nalgebra::DMatrix::from_fn(n, n, |k, j| {
        if k == j {
            beta[k] * gains[k][k]
        } else {
            -targets[k] * beta[k] * gains[k][j]
        }
    });
    let b = nalgebra::DVector::from_fn(n, |k, _| targets[k] * sigma2);
    let p = a.lu().solve(&b)?;
    // A is a Z-matrix; a nonnegative solution with positive right-hand side
    // exists exactly when the targets are feasible.
    if p.iter().all(|&v| v.is_finite() && v >= 0.0) {
        Some(p.iter().copied().collect())
    } else {
        None
    }
}

/// One LiFi luminaire as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiFiLink {
    pub coeff: f64,
    /// Optical transmit power, W.
    pub p_t: f64,
    pub h_los: f64,
}

impl LiFiLink {
    fn received(&self) -> f64 {
        (self.coeff * self.p_t * self.h_los).powi(2)
    }
}

/// `c^2 P_t^2 H^2 / (N0 B + sum c_I^2 P_I^2 H_I^2)`.
pub fn sinr_lifi(serving: LiFiLink, interferers: &[LiFiLink], n0: f64, bandwidth: f64) -> Result<LinkSnr> {
    if !(bandwidth > 0.0) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let interference: f64 = interferers.iter().map(LiFiLink::received).sum();
    LinkSnr::new(LinkKind::LiFiAccess, serving.received() / (n0 * bandwidth + interference))
}

/// Optical power the serving luminaire needs for `sinr`.
pub fn lifi_power_for_sinr(
    sinr: f64,
    coeff: f64,
    h_los: f64,
    interferers: &[LiFiLink],
    n0: f64,
    bandwidth: f64,
) -> Option<f64> {
    if sinr == 0.0 {
        return Some(0.0);
    }
    if !(coeff * h_los > 0.0) {
        return None;
    }
    let floor = n0 * bandwidth + interferers.iter().map(LiFiLink::received).sum::<f64>();
    Some((sinr * floor).sqrt() / (coeff * h_los))
}

/// Small-scale variation used by the exact spectral-efficiency mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmallScale {
    /// No variation: exact and approximate modes coincide.
    None,
    /// Rayleigh fading combined over `diversity` branches: the SINR is scaled
    /// by a Gamma(diversity, 1/diversity) variate of unit mean.
    Hardening { diversity: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeMode {
    /// `gamma log2(1 + E[SINR])`.
    Approx,
    /// `gamma E[log2(1 + SINR)]` by Monte-Carlo.
    ExactMc {
        draws: u64,
        seed: u64,
        variation: SmallScale,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEff {
    /// bit/s/Hz.
    pub value: f64,
    pub gamma: f64,
    /// Monte-Carlo standard error, when applicable.
    pub std_error: Option<f64>,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

pub fn spectral_efficiency(sinr: &LinkSnr, gamma: f64, mode: SeMode) -> SpectralEff {
    match mode {
        SeMode::Approx
        | SeMode::ExactMc {
            variation: SmallScale::None,
            ..
        } => SpectralEff {
            value: gamma * log2_1p(sinr.value),
            gamma,
            std_error: match mode {
                SeMode::Approx => None,
                _ => Some(0.0),
            },
        },
        SeMode::ExactMc {
            draws,
            seed,
            variation: SmallScale::Hardening { diversity },
        } => {
            let n = diversity.max(1) as f64;
            let gamma_dist = Gamma::new(n, 1.0 / n).expect("shape and scale are positive");
            let mean_sinr = sinr.value;
            let (mean, se) = monte_carlo_mean(draws.max(1), seed, |rng| {
                log2_1p(mean_sinr * gamma_dist.sample(rng))
            });
            SpectralEff {
                value: gamma * mean,
                gamma,
                std_error: Some(gamma * se),
            }
        }
    }
}

/// Inverse of the approximate spectral efficiency: `2^(se/gamma) - 1`.
pub fn required_sinr(se_target: f64, gamma: f64) -> f64 {
    (se_target / gamma * std::f64::consts::LN_2).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEff {
    /// (bit/s/Hz)/W.
    pub value: f64,
    pub se: f64,
    pub total_power: f64,
}

impl EnergyEff {
    /// bit/J over `bandwidth` Hz.
    pub fn bits_per_joule(&self, bandwidth: f64) -> f64 {
        self.se * bandwidth / self.total_power
    }
}

pub fn energy_efficiency(se: &SpectralEff, total_power: f64) -> Result<EnergyEff> {
    if !(total_power > 0.0) {
        return Err(Error::ZeroPower(total_power));
    }
    Ok(EnergyEff {
        value: se.value / total_power,
        se: se.value,
        total_power,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn snr_macro_examples() {
        let s = snr_macro(1e-9, 64, 64, 1.0, 1e-12);
        assert_relative_eq!(s.value, 4.096e6, max_relative = 1e-12);
        assert!((s.db() - 66.12).abs() < 0.005);
        assert_relative_eq!(snr_macro(1.0, 1, 1, 2.5, 2.5).value, 1.0);
        let a = snr_macro(3e-10, 37, 9, 0.7, 2e-13).value;
        let b = snr_macro(3e-10, 74, 9, 0.7, 2e-13).value;
        assert_eq!(b, 2.0 * a);
        let p = macro_power_for_snr(a, 3e-10, 37, 9, 2e-13);
        assert_relative_eq!(p, 0.7, max_relative = 1e-12);
    }

    #[test]
    fn single_user_matched_beam() {
        let s = sinr_mmwave(
            0,
            &[AngleDist::Fixed(0.3)],
            &[0.3],
            &[1.0],
            &[1.0],
            16,
            1e-3,
            Expectation::default(),
        )
        .unwrap();
        assert_relative_eq!(s.value, 1000.0, max_relative = 1e-12);
    }

    #[test]
    fn interferer_on_kernel_null_is_invisible() {
        // F_4(0.5) = 0: the second beam sits on user 0's null.
        let aods = [AngleDist::Fixed(0.0), AngleDist::Fixed(0.5)];
        let beams = [0.0, 0.5];
        let s = sinr_mmwave(0, &aods, &beams, &[1.0, 1.0], &[1.0, 1.0], 4, 1e-3, Expectation::default())
            .unwrap();
        assert_relative_eq!(s.value, 1000.0, max_relative = 1e-9);
    }

    #[test]
    fn mismatched_lengths_error() {
        let e = sinr_mmwave(
            0,
            &[AngleDist::Fixed(0.0)],
            &[0.0, 0.5],
            &[1.0],
            &[1.0],
            4,
            1e-3,
            Expectation::default(),
        );
        assert!(matches!(e, Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn perturbed_interferer_matches_monte_carlo() {
        // Second user jittered around 0.4 so the expectation is non-trivial.
        let aods = [
            AngleDist::Fixed(0.0),
            AngleDist::Uniform { lo: 0.35, hi: 0.45 },
        ];
        let beams = [0.0, 0.4];
        let sigma2 = 1e-3;
        let quad = sinr_mmwave(1, &aods, &beams, &[1.0, 1.0], &[1.0, 1.0], 4, sigma2, Expectation::default())
            .unwrap()
            .value;
        let mc = sinr_mmwave(
            1,
            &aods,
            &beams,
            &[1.0, 1.0],
            &[1.0, 1.0],
            4,
            sigma2,
            Expectation::MonteCarlo {
                draws: 1_000_000,
                seed: 11,
            },
        )
        .unwrap()
        .value;
        assert!(quad.is_finite() && quad > 0.0);
        assert_relative_eq!(quad, mc, max_relative = 1e-2);
    }

    #[test]
    fn power_solution_hits_targets() {
        let model = OffsetModel::matched_uniform_sector(4, 0.866);
        let gains = model.gain_matrix(16, Expectation::default());
        let beta = [1e-6, 2e-6, 5e-7, 8e-7];
        let targets = [1.0, 2.0, 0.5, 1.5];
        let p = mmwave_powers_for_targets(&gains, &beta, &targets, 1e-11).unwrap();
        for k in 0..4 {
            let s = sinr_mmwave_from_gains(k, &gains, &beta, &p, 1e-11).unwrap();
            assert_relative_eq!(s.value, targets[k], max_relative = 1e-9);
        }
        // Above the interference ceiling nothing works.
        assert!(mmwave_powers_for_targets(&gains, &beta, &[1e3; 4], 1e-11).is_none());
        assert_eq!(mmwave_powers_for_targets(&gains, &beta, &[0.0; 4], 1e-11), Some(vec![0.0; 4]));
    }

    #[test]
    fn lifi_examples() {
        let serving = LiFiLink {
            coeff: 1.0,
            p_t: 1.0,
            h_los: 1e-5,
        };
        let s = sinr_lifi(serving, &[], 1e-13, 1.0).unwrap();
        assert_relative_eq!(s.value, 1000.0, max_relative = 1e-9);
        let s = sinr_lifi(serving, &[serving], 1e-13, 1.0).unwrap();
        assert!(s.value < 1.0);
        let dark = LiFiLink { h_los: 0.0, ..serving };
        assert_eq!(sinr_lifi(dark, &[], 1e-13, 1.0).unwrap().value, 0.0);
        assert!(sinr_lifi(serving, &[], 1e-13, 0.0).is_err());
        let p = lifi_power_for_sinr(1000.0, 1.0, 1e-5, &[], 1e-13, 1.0).unwrap();
        assert_relative_eq!(p, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn se_examples() {
        let one = LinkSnr::new(LinkKind::MacroBackhaul, 1.0).unwrap();
        assert_relative_eq!(spectral_efficiency(&one, 1.0, SeMode::Approx).value, 1.0);
        let three = LinkSnr::new(LinkKind::MacroBackhaul, 3.0).unwrap();
        assert_relative_eq!(spectral_efficiency(&three, 1.0, SeMode::Approx).value, 2.0);
        let flat = SeMode::ExactMc {
            draws: 10,
            seed: 0,
            variation: SmallScale::None,
        };
        assert_eq!(
            spectral_efficiency(&three, 0.8, flat).value,
            spectral_efficiency(&three, 0.8, SeMode::Approx).value
        );
    }

    #[test]
    fn required_sinr_examples() {
        assert_relative_eq!(required_sinr(1.0, 1.0), 1.0, max_relative = 1e-14);
        assert_relative_eq!(required_sinr(2.0, 1.0), 3.0, max_relative = 1e-14);
        let want = 2f64.powf(5.5 / 0.9) - 1.0;
        assert_relative_eq!(required_sinr(5.5, 0.9), want, max_relative = 1e-12);
        assert!((required_sinr(5.5, 0.9) - 68.1238).abs() < 5e-4);
    }

    #[test]
    fn ee_examples() {
        let se = |v| SpectralEff {
            value: v,
            gamma: 1.0,
            std_error: None,
        };
        assert_relative_eq!(energy_efficiency(&se(10.0), 100.0).unwrap().value, 0.1);
        assert_eq!(energy_efficiency(&se(0.0), 5.0).unwrap().value, 0.0);
        assert_relative_eq!(energy_efficiency(&se(7.2), 360.0).unwrap().value, 0.02);
        assert!(matches!(energy_efficiency(&se(1.0), 0.0), Err(Error::ZeroPower(_))));
        let ee = energy_efficiency(&se(2.0), 4.0).unwrap();
        assert_relative_eq!(ee.bits_per_joule(20e6), 1e7);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let d = AngleDist::Uniform { lo: -0.3, hi: 0.9 };
        let e = Expectation::MonteCarlo { draws: 200_000, seed: 42 };
        assert_eq!(expected_kernel_sq(8, d, e), expected_kernel_sq(8, d, e));
    }
}
