//! Device power ledger: baseband complexity, RF front ends, power amplifiers,
//! LiFi luminaires and the overhead-bearing aggregates.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;

use crate::config::{ComplexityParams, ConfigBundle, DeviceConstants, IapConstants, LedElectrical, ScenarioConfig};
use crate::error::{Error, Result};

const GIGA: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviceKind {
    Mbs,
    Mbsala,
    Bmaa,
    MmWaveIap,
    LiFiIap,
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeviceKind::Mbs => "mbs",
            DeviceKind::Mbsala => "mbsala",
            DeviceKind::Bmaa => "bmaa",
            DeviceKind::MmWaveIap => "mmwave-iap",
            DeviceKind::LiFiIap => "lifi-iap",
        })
    }
}

/// Baseband workload in GOPS, split by operation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexityLoad {
    pub fltr: f64,
    pub fft: f64,
    pub est: f64,
    pub bf: f64,
    pub pre: f64,
    /// Symbol mapping or de-mapping.
    pub map: f64,
    /// Channel encoding or decoding.
    pub code: f64,
    pub ctrl: f64,
    pub nw: f64,
    pub smpl: f64,
}

impl ComplexityLoad {
    pub fn parts(&self) -> [(&'static str, f64); 10] {
        [
            ("fltr", self.fltr),
            ("fft", self.fft),
            ("est", self.est),
            ("bf", self.bf),
            ("pre", self.pre),
            ("map", self.map),
            ("code", self.code),
            ("ctrl", self.ctrl),
            ("nw", self.nw),
            ("smpl", self.smpl),
        ]
    }

    pub fn total(&self) -> f64 {
        self.parts().iter().map(|(_, v)| v).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            fltr: self.fltr * k,
            fft: self.fft * k,
            est: self.est * k,
            bf: self.bf * k,
            pre: self.pre * k,
            map: self.map * k,
            code: self.code * k,
            ctrl: self.ctrl * k,
            nw: self.nw * k,
            smpl: self.smpl * k,
        }
    }
}

/// Decomposed power of one device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePower {
    pub kind: DeviceKind,
    pub p_bb: f64,
    pub p_rf: f64,
    pub p_pa: f64,
    /// LED illumination draw; zero for RF devices.
    pub p_light: f64,
    pub p_total: f64,
}

impl DevicePower {
    fn with_divisor(kind: DeviceKind, p_bb: f64, p_rf: f64, p_pa: f64, divisor: f64) -> Self {
        Self {
            kind,
            p_bb,
            p_rf,
            p_pa,
            p_light: 0.0,
            p_total: (p_bb + p_rf + p_pa) / divisor,
        }
    }

    /// Sum of the components before overhead.
    pub fn p_components(&self) -> f64 {
        self.p_bb + self.p_rf + self.p_pa + self.p_light
    }
}

/// (I)FFT operations per frame: `N_s N_fft log2 N_fft`.
pub fn ops_fft(n_symbols: usize, n_fft: usize) -> Result<f64> {
    if n_fft < 2 || !n_fft.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n_fft));
    }
    Ok(n_symbols as f64 * n_fft as f64 * n_fft.trailing_zeros() as f64)
}

pub fn gops_fft(n_symbols: usize, n_fft: usize, frames_per_s: f64) -> Result<f64> {
    Ok(ops_fft(n_symbols, n_fft)? * frames_per_s / GIGA)
}

/// Pilot-correlation operations per coherence block: `tau M_T N_ue`.
pub fn ops_estimation_pilots(tau: usize, m_t: usize, n_ue: usize) -> f64 {
    tau as f64 * m_t as f64 * n_ue as f64
}

/// Estimation operations per coherence block with `tau = N_ue`.
pub fn ops_estimation(m_t: usize, n_ue: usize) -> f64 {
    ops_estimation_pilots(n_ue, m_t, n_ue)
}

pub fn gops_estimation(m_t: usize, n_ue: usize, blocks_per_s: f64) -> f64 {
    ops_estimation(m_t, n_ue) * blocks_per_s / GIGA
}

/// `(N_ue + N_b L)(1 - tau/N_c)` in weight-1 units.
pub fn precoding_shape(n_ue: usize, n_b: usize, l_beams: usize, tau: usize, n_c: usize) -> Result<f64> {
    if tau > n_c || n_c == 0 {
        return Err(Error::Domain(format!("pilot length {tau} exceeds coherence block {n_c}")));
    }
    Ok((n_ue + n_b * l_beams) as f64 * (1.0 - tau as f64 / n_c as f64))
}

/// Precoding GOPS: the shape times `weight` operations per item per OFDM symbol.
pub fn gops_precoding(
    n_ue: usize,
    n_b: usize,
    l_beams: usize,
    tau: usize,
    n_c: usize,
    weight: f64,
    symbols_per_s: f64,
) -> Result<f64> {
    Ok(precoding_shape(n_ue, n_b, l_beams, tau, n_c)? * weight * symbols_per_s / GIGA)
}

pub fn bb_power(load: &ComplexityLoad, rho: f64) -> f64 {
    load.total() / rho
}

/// `M * per_antenna + sqrt(M) * clock`.
pub fn rf_power(m: usize, per_antenna: f64, clock: f64) -> f64 {
    m as f64 * per_antenna + (m as f64).sqrt() * clock
}

pub fn rf_power_mbsala(m_t: usize, k: &DeviceConstants) -> f64 {
    let c = &k.mbsala;
    rf_power(m_t, c.p_mod + c.p_mix + c.p_dac, c.p_clk)
}

pub fn rf_power_bmaa(m_r: usize, k: &DeviceConstants) -> f64 {
    let c = &k.bmaa;
    rf_power(m_r, c.p_mix + c.p_vga + c.p_adc + c.p_lna, c.p_clc)
}

pub fn rf_power_iap(m_t_iap: usize, k: &DeviceConstants) -> f64 {
    let c = &k.iap;
    rf_power(m_t_iap, c.p_mix + c.p_dac + c.p_bft + c.p_fs, c.p_clc)
}

fn check_pa(p_out: f64, p_max: f64) -> Result<()> {
    if !(p_out >= 0.0) {
        return Err(Error::Domain(format!("PA output must be >= 0, got {p_out}")));
    }
    if p_out > p_max {
        return Err(Error::Saturation { p_out, p_max });
    }
    Ok(())
}

/// Ideal class-B consumption `(2/pi) sqrt(P_o P_max)`.
pub fn pa_power_classb(p_out: f64, p_max: f64) -> Result<f64> {
    check_pa(p_out, p_max)?;
    Ok(FRAC_2_PI * (p_out * p_max).sqrt())
}

/// Two-branch Doherty model with the factor-3 step at `0.25 P_max`.
pub fn pa_power_doherty(p_out: f64, p_max: f64) -> Result<f64> {
    check_pa(p_out, p_max)?;
    let root = (p_out * p_max).sqrt();
    Ok(if p_out < 0.25 * p_max {
        FRAC_2_PI * root
    } else {
        3.0 * FRAC_2_PI * root
    })
}

/// Doherty variant whose upper branch is shifted down by `(2/pi) P_max`,
/// which makes it continuous at `0.25 P_max`.
pub fn pa_power_doherty_continuous(p_out: f64, p_max: f64) -> Result<f64> {
    check_pa(p_out, p_max)?;
    let root = (p_out * p_max).sqrt();
    Ok(if p_out < 0.25 * p_max {
        FRAC_2_PI * root
    } else {
        3.0 * FRAC_2_PI * root - FRAC_2_PI * p_max
    })
}

pub fn pa_power_iap(p_out: f64, c: &IapConstants) -> Result<f64> {
    if c.doherty_continuous {
        pa_power_doherty_continuous(p_out, c.pa_max)
    } else {
        pa_power_doherty(p_out, c.pa_max)
    }
}

/// MBSALA power before overhead; the divisor is applied by the MBS.
pub fn power_mbsala(
    cfg: &ScenarioConfig,
    k: &DeviceConstants,
    load: &ComplexityLoad,
    p_out_per_beam: &[f64],
) -> Result<DevicePower> {
    let p_pa = p_out_per_beam
        .iter()
        .map(|&p| pa_power_classb(p, k.mbsala.pa_max))
        .sum::<Result<f64>>()?;
    Ok(DevicePower::with_divisor(
        DeviceKind::Mbsala,
        bb_power(load, k.rho),
        rf_power_mbsala(cfg.m_t, k),
        p_pa,
        1.0,
    ))
}

/// Receive-only BMAA with overhead.
pub fn power_bmaa(cfg: &ScenarioConfig, k: &DeviceConstants, load: &ComplexityLoad) -> DevicePower {
    DevicePower::with_divisor(
        DeviceKind::Bmaa,
        bb_power(load, k.rho),
        rf_power_bmaa(cfg.m_r, k),
        0.0,
        k.overhead_divisor(),
    )
}

/// mmWave IAP with overhead. `p_out` is the output of each of the `M'_T`
/// per-antenna Doherty PAs.
pub fn power_iap_mmwave(
    cfg: &ScenarioConfig,
    k: &DeviceConstants,
    load: &ComplexityLoad,
    p_out: f64,
) -> Result<DevicePower> {
    let p_pa = cfg.m_t_iap as f64 * pa_power_iap(p_out, &k.iap)?;
    Ok(DevicePower::with_divisor(
        DeviceKind::MmWaveIap,
        bb_power(load, k.rho),
        rf_power_iap(cfg.m_t_iap, k),
        p_pa,
        k.overhead_divisor(),
    ))
}

/// LED illumination power `(n q V_T Phi)/(p_f eps) ln(q Phi/(p_f eps I_s) + 1)`.
pub fn lifi_light_power(led: &LedElectrical) -> f64 {
    let pe = led.p_f * led.epsilon;
    let scale = led.ideality * led.charge * led.thermal_voltage * led.photon_flux / pe;
    scale * (led.charge * led.photon_flux / (pe * led.sat_current)).ln_1p()
}

/// Extra drive power for modulation `n q V_T H^2 / (2 p_f eps mu_Phi)`.
pub fn lifi_comm_power(led: &LedElectrical, h_los: f64) -> f64 {
    led.ideality * led.charge * led.thermal_voltage * h_los * h_los
        / (2.0 * led.p_f * led.epsilon * led.mu_phi)
}

pub fn power_lifi_iap(led: &LedElectrical, h_los: f64) -> DevicePower {
    let p_light = lifi_light_power(led);
    let p_comm = lifi_comm_power(led, h_los);
    DevicePower {
        kind: DeviceKind::LiFiIap,
        p_bb: 0.0,
        p_rf: p_comm,
        p_pa: 0.0,
        p_light,
        p_total: p_light + p_comm,
    }
}

/// MBS: its own baseband plus every MBSALA, all under the overhead divisor.
pub fn power_mbs(
    cfg: &ScenarioConfig,
    k: &DeviceConstants,
    mbsala_powers: &[f64],
    mbs_load: &ComplexityLoad,
) -> Result<DevicePower> {
    if mbsala_powers.len() != cfg.n_arrays {
        return Err(Error::LengthMismatch(format!(
            "{} MBSALA powers for {} arrays",
            mbsala_powers.len(),
            cfg.n_arrays
        )));
    }
    let arrays: f64 = mbsala_powers.iter().sum();
    let p_bb = bb_power(mbs_load, k.rho);
    Ok(DevicePower {
        kind: DeviceKind::Mbs,
        p_bb,
        p_rf: 0.0,
        p_pa: 0.0,
        p_light: 0.0,
        p_total: (p_bb + arrays) / k.overhead_divisor(),
    })
}

/// Cell total: MBS plus every BMAA and IAP.
pub fn power_cell(mbs: &DevicePower, bmaa: &[DevicePower], iap: &[DevicePower]) -> f64 {
    mbs.p_total + bmaa.iter().map(|d| d.p_total).sum::<f64>() + iap.iter().map(|d| d.p_total).sum::<f64>()
}

fn sample_rate(c: &ComplexityParams) -> f64 {
    c.n_fft as f64 * c.symbols_per_s()
}

fn precoding_weight(c: &ComplexityParams, antennas: usize) -> f64 {
    c.precoding_weight.unwrap_or((antennas * c.n_fft) as f64)
}

/// MBS baseband per array: control, network and channel encoding.
pub fn mbs_load(b: &ConfigBundle, rate_bps: f64) -> ComplexityLoad {
    let c = &b.complexity;
    ComplexityLoad {
        ctrl: c.ctrl_gops,
        nw: c.nw_gops,
        code: c.code_ops_per_bit * rate_bps / GIGA,
        ..Default::default()
    }
    .scaled(b.scenario.n_arrays as f64)
}

/// MBSALA baseband. `direct_users` are single-antenna users served with
/// pilots of length `tau`; `backhaul_beams` go to BMAAs.
pub fn mbsala_load(
    b: &ConfigBundle,
    direct_users: usize,
    tau: usize,
    backhaul_buildings: usize,
    rate_bps: f64,
) -> Result<ComplexityLoad> {
    let s = &b.scenario;
    let c = &b.complexity;
    let sym = c.symbols_per_s();
    let weight = precoding_weight(c, s.m_t);
    Ok(ComplexityLoad {
        fltr: s.m_t as f64 * c.fltr_ops_per_sample * sample_rate(c) / GIGA,
        fft: s.m_t as f64 * gops_fft(c.n_symbols, c.n_fft, c.frames_per_s)?,
        est: ops_estimation_pilots(tau, s.m_t, direct_users) * c.blocks_per_s(s.coherence_block) / GIGA,
        bf: gops_precoding(0, backhaul_buildings, s.n_beams, tau, s.coherence_block, weight, sym)?,
        pre: gops_precoding(direct_users, 0, s.n_beams, tau, s.coherence_block, weight, sym)?,
        map: c.map_ops_per_bit * rate_bps / GIGA,
        ctrl: c.ctrl_gops,
        nw: c.nw_gops,
        ..Default::default()
    })
}

/// BMAA baseband: `L` times the per-beam receive chain.
pub fn bmaa_load(b: &ConfigBundle, rate_bps: f64) -> Result<ComplexityLoad> {
    let s = &b.scenario;
    let c = &b.complexity;
    if s.n_beams == 0 {
        return Ok(ComplexityLoad::default());
    }
    let l = s.n_beams as f64;
    let per_beam_rate = rate_bps / l;
    let per_beam = ComplexityLoad {
        fltr: c.fltr_ops_per_sample * sample_rate(c) / GIGA,
        bf: precoding_weight(c, s.m_r) * c.symbols_per_s() / GIGA,
        smpl: c.smpl_ops_per_sample * sample_rate(c) / GIGA,
        fft: gops_fft(c.n_symbols, c.n_fft, c.frames_per_s)?,
        map: c.map_ops_per_bit * per_beam_rate / GIGA,
        code: c.code_ops_per_bit * per_beam_rate / GIGA,
        ctrl: c.ctrl_gops,
        nw: c.nw_gops,
        ..Default::default()
    };
    Ok(per_beam.scaled(l))
}

/// mmWave IAP baseband serving `n_iue` users.
pub fn iap_load(b: &ConfigBundle, rate_bps: f64) -> Result<ComplexityLoad> {
    let s = &b.scenario;
    let c = &b.complexity;
    let m = s.m_t_iap as f64;
    Ok(ComplexityLoad {
        fltr: m * c.fltr_ops_per_sample * sample_rate(c) / GIGA,
        fft: m * gops_fft(c.n_symbols, c.n_fft, c.frames_per_s)?,
        bf: s.n_iue as f64 * precoding_weight(c, s.m_t_iap) * c.symbols_per_s() / GIGA,
        map: c.map_ops_per_bit * rate_bps / GIGA,
        code: c.code_ops_per_bit * rate_bps / GIGA,
        ctrl: c.ctrl_gops,
        nw: c.nw_gops,
        ..Default::default()
    })
}

/// Lower- and upper-branch Doherty values at `P_o = 0.25 P_max`.
pub fn doherty_branch_values(p_max: f64) -> (f64, f64) {
    let p = 0.25 * p_max;
    ((2.0 / PI) * (p * p_max).sqrt(), (6.0 / PI) * (p * p_max).sqrt())
}
