//! Scenario parameters, device constants and the `key = value` config format.
//!
//! A config file is a sequence of `[section]` headers followed by
//! `key = value` lines. `#` starts a comment. Keys match the field names of
//! the section's struct. Two suffixes are accepted on input and converted on
//! load:
//!
//! * `<key>_deg = v` sets the radian field `<key>` from degrees;
//! * `<key>_db = v` sets the linear field `<key>` from decibels, and
//!   `<key>_dbm = v` sets a field in watts from dBm.
//!
//! Fields that are themselves expressed in dB carry the suffix in their own
//! name (`penetration_loss_db`) and are stored as given.
//!
//! Environment variables named `E2E_<SECTION>_<KEY>` override file values,
//! which override the shipped defaults.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Prefix of environment overrides, e.g. `E2E_SCENARIO_M_T=256`.
pub const ENV_PREFIX: &str = "E2E_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IapKind {
    MmWave,
    LiFi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Separation {
    Separate,
    NonSeparate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Buildings at the configured distances, indoor users on a fixed grid.
    Grid,
    /// Seeded uniform placement inside the configured distance range and room.
    Random,
}

impl fmt::Display for IapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IapKind::MmWave => "mmwave",
            IapKind::LiFi => "lifi",
        })
    }
}

impl FromStr for IapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mmwave" => Ok(IapKind::MmWave),
            "lifi" => Ok(IapKind::LiFi),
            other => Err(format!("expected `mmwave` or `lifi`, got `{other}`")),
        }
    }
}

impl fmt::Display for Separation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Separation::Separate => "separate",
            Separation::NonSeparate => "non-separate",
        })
    }
}

impl FromStr for Separation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "separate" => Ok(Separation::Separate),
            "non-separate" | "nonseparate" => Ok(Separation::NonSeparate),
            other => Err(format!(
                "expected `separate` or `non-separate`, got `{other}`"
            )),
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layout::Grid => "grid",
            Layout::Random => "random",
        })
    }
}

impl FromStr for Layout {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "grid" => Ok(Layout::Grid),
            "random" => Ok(Layout::Random),
            other => Err(format!("expected `grid` or `random`, got `{other}`")),
        }
    }
}

/// Cell topology, bandwidths and link-level constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// MBSALAs per MBS.
    pub n_arrays: usize,
    /// BMAAs (buildings) per MBSALA.
    pub n_buildings: usize,
    /// Beamforming links per MBSALA-BMAA pair.
    pub n_beams: usize,
    pub m_t: usize,
    pub m_r: usize,
    pub m_t_iap: usize,
    /// Users served directly by an MBSALA (non-separate mode).
    pub n_ue: usize,
    /// Indoor users per IAP (separate mode).
    pub n_iue: usize,
    /// Outdoor carrier, GHz.
    pub carrier_freq_out: f64,
    /// Indoor mmWave carrier, GHz.
    pub carrier_freq_in: f64,
    /// Hz.
    pub bandwidth_out: f64,
    /// Hz, shared by the mmWave and LiFi access tiers.
    pub bandwidth_in: f64,
    pub penetration_loss_db: f64,
    pub gamma: f64,
    /// Receiver noise power over `bandwidth_out`, W.
    pub noise_variance: f64,
    /// Receiver noise power over `bandwidth_in` for mmWave users, W.
    pub noise_variance_in: f64,
    pub coherence_block: usize,
    pub pilot_len: usize,
    pub iap_kind: IapKind,
    pub separation: Separation,
    pub antenna_spacing: f64,
    /// MBSALA to building distances, m. One entry per building.
    pub building_distances: Vec<f64>,
    /// Relative traffic share per building; empty means equal.
    pub building_weights: Vec<f64>,
    pub layout: Layout,
    /// Indoor grid pitch, m.
    pub user_spacing: f64,
    /// Side of the square room used by the random layout, m.
    pub room_size: f64,
    /// Half-width of the IAP sector in sine space.
    pub sector_half_width: f64,
    /// Quadrature points for the beam-pattern expectations.
    pub quadrature_points: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_arrays: 1,
            n_buildings: 4,
            n_beams: 4,
            m_t: 64,
            m_r: 64,
            m_t_iap: 16,
            n_ue: 16,
            n_iue: 4,
            carrier_freq_out: 3.5,
            carrier_freq_in: 28.0,
            bandwidth_out: 20e6,
            bandwidth_in: 400e6,
            penetration_loss_db: 20.0,
            gamma: 1.0,
            noise_variance: 4.0e-13,
            noise_variance_in: 1.26e-11,
            coherence_block: 196,
            pilot_len: 16,
            iap_kind: IapKind::MmWave,
            separation: Separation::Separate,
            antenna_spacing: 0.5,
            building_distances: vec![100.0, 200.0, 300.0, 400.0],
            building_weights: Vec::new(),
            layout: Layout::Grid,
            user_spacing: 2.0,
            room_size: 6.0,
            sector_half_width: 0.866,
            quadrature_points: 4096,
        }
    }
}

/// Per-antenna RF draws and PA rating of an MBSALA, W.
#[derive(Debug, Clone, PartialEq)]
pub struct MbsalaConstants {
    pub p_mod: f64,
    pub p_mix: f64,
    pub p_dac: f64,
    pub p_clk: f64,
    /// Maximum class-B PA output per stream.
    pub pa_max: f64,
}

impl Default for MbsalaConstants {
    fn default() -> Self {
        Self {
            p_mod: 0.01,
            p_mix: 0.01,
            p_dac: 0.01,
            p_clk: 0.25,
            pa_max: 200.0,
        }
    }
}

/// Per-antenna RF draws of a BMAA receiver, W.
#[derive(Debug, Clone, PartialEq)]
pub struct BmaaConstants {
    pub p_mix: f64,
    pub p_vga: f64,
    pub p_adc: f64,
    pub p_lna: f64,
    pub p_clc: f64,
}

impl Default for BmaaConstants {
    fn default() -> Self {
        Self {
            p_mix: 0.05,
            p_vga: 0.04,
            p_adc: 0.08,
            p_lna: 0.03,
            p_clc: 0.5,
        }
    }
}

/// Per-antenna RF draws and Doherty PA rating of a mmWave IAP, W.
#[derive(Debug, Clone, PartialEq)]
pub struct IapConstants {
    pub p_mix: f64,
    pub p_dac: f64,
    pub p_bft: f64,
    pub p_fs: f64,
    pub p_clc: f64,
    /// Maximum Doherty PA output per antenna.
    pub pa_max: f64,
    /// Use the continuous Doherty variant instead of the two-branch law.
    pub doherty_continuous: bool,
}

impl Default for IapConstants {
    fn default() -> Self {
        Self {
            p_mix: 0.06,
            p_dac: 0.08,
            p_bft: 0.1,
            p_fs: 0.06,
            p_clc: 0.5,
            pa_max: 0.25,
            doherty_continuous: false,
        }
    }
}

/// Baseband conversion factor, overhead losses and the per-device RF sets.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConstants {
    /// GOP/W.
    pub rho: f64,
    pub eta_c: f64,
    pub eta_acdc: f64,
    pub eta_dcdc: f64,
    pub mbsala: MbsalaConstants,
    pub bmaa: BmaaConstants,
    pub iap: IapConstants,
}

impl Default for DeviceConstants {
    fn default() -> Self {
        Self {
            rho: 160.0,
            eta_c: 0.1,
            eta_acdc: 0.075,
            eta_dcdc: 0.06,
            mbsala: MbsalaConstants::default(),
            bmaa: BmaaConstants::default(),
            iap: IapConstants::default(),
        }
    }
}

impl DeviceConstants {
    /// `(1 - eta_c)(1 - eta_acdc)(1 - eta_dcdc)`.
    pub fn overhead_divisor(&self) -> f64 {
        (1.0 - self.eta_c) * (1.0 - self.eta_acdc) * (1.0 - self.eta_dcdc)
    }
}

/// LED driver parameters of the illumination/communication power law.
///
/// Units follow the diode model: `charge` in C, `thermal_voltage` in V,
/// `photon_flux` in 1/s, `sat_current` in A; `p_f`, `epsilon` and
/// `ideality` are dimensionless and `mu_phi` is in W^-1 scaled so that the
/// communication term comes out in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct LedElectrical {
    pub ideality: f64,
    pub charge: f64,
    pub thermal_voltage: f64,
    pub photon_flux: f64,
    pub p_f: f64,
    pub epsilon: f64,
    pub sat_current: f64,
    pub mu_phi: f64,
}

impl Default for LedElectrical {
    fn default() -> Self {
        Self {
            ideality: 2.0,
            charge: 1.602_176_634e-19,
            thermal_voltage: 0.025_85,
            photon_flux: 1.0e19,
            p_f: 1.0,
            epsilon: 0.8,
            sat_current: 1.0e-20,
            mu_phi: 1.0e-30,
        }
    }
}

/// Optical front end and room geometry of a LiFi attocell.
#[derive(Debug, Clone, PartialEq)]
pub struct LiFiDeviceParams {
    /// Photodetector area, m^2.
    pub area_pd: f64,
    /// LED half-intensity angle, rad.
    pub half_angle: f64,
    pub g_filter: f64,
    pub refr_index: f64,
    /// Receiver field of view, rad.
    pub fov: f64,
    /// Serving luminaire first, then any interfering luminaires, m.
    pub tx_positions: Vec<[f64; 3]>,
    /// Reference receiver position, m. Also sets the user plane height.
    pub rx_position: [f64; 3],
    pub normal_tx: [f64; 3],
    pub normal_rx: [f64; 3],
    /// Serving LED coefficient.
    pub led_coeff: f64,
    /// Interfering LED coefficient.
    pub led_coeff_interf: f64,
    /// Optical signal power budget per luminaire, W.
    pub p_opt: f64,
    /// Noise spectral density, W/Hz.
    pub n0: f64,
    pub led: LedElectrical,
}

impl Default for LiFiDeviceParams {
    fn default() -> Self {
        Self {
            area_pd: 1.0e-4,
            half_angle: 60f64.to_radians(),
            g_filter: 1.0,
            refr_index: 1.5,
            fov: 60f64.to_radians(),
            tx_positions: vec![[0.0, 0.0, 3.0]],
            rx_position: [0.0, 0.0, 0.85],
            normal_tx: [0.0, 0.0, -1.0],
            normal_rx: [0.0, 0.0, 1.0],
            led_coeff: 1.0,
            led_coeff_interf: 1.0,
            p_opt: 1.0,
            n0: 1.0e-21,
            led: LedElectrical::default(),
        }
    }
}

/// Operation-count accounting for the baseband complexity laws.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityParams {
    pub n_fft: usize,
    /// OFDM symbols per frame.
    pub n_symbols: usize,
    pub frames_per_s: f64,
    pub fltr_ops_per_sample: f64,
    pub smpl_ops_per_sample: f64,
    pub map_ops_per_bit: f64,
    pub code_ops_per_bit: f64,
    pub ctrl_gops: f64,
    pub nw_gops: f64,
    /// Operations per precoded stream item; `None` means `M_T * n_fft`.
    pub precoding_weight: Option<f64>,
}

impl Default for ComplexityParams {
    fn default() -> Self {
        Self {
            n_fft: 2048,
            n_symbols: 14,
            frames_per_s: 1000.0,
            fltr_ops_per_sample: 40.0,
            smpl_ops_per_sample: 10.0,
            map_ops_per_bit: 1.0,
            code_ops_per_bit: 10.0,
            ctrl_gops: 10.0,
            nw_gops: 10.0,
            precoding_weight: None,
        }
    }
}

impl ComplexityParams {
    pub fn symbols_per_s(&self) -> f64 {
        self.n_symbols as f64 * self.frames_per_s
    }

    /// Coherence blocks per second for a block of `n_c` resource elements.
    pub fn blocks_per_s(&self, n_c: usize) -> f64 {
        self.n_fft as f64 * self.symbols_per_s() / n_c as f64
    }
}

/// Everything one simulation run reads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigBundle {
    pub scenario: ScenarioConfig,
    pub constants: DeviceConstants,
    pub lifi: LiFiDeviceParams,
    pub complexity: ComplexityParams,
}

// ---------------------------------------------------------------------------
// Value codec

trait ConfigValue: Sized {
    fn parse_value(raw: &str) -> Result<Self, String>;
    fn render(&self) -> String;
}

impl ConfigValue for f64 {
    fn parse_value(raw: &str) -> Result<Self, String> {
        raw.parse::<f64>()
            .map_err(|_| format!("expected a number, got `{raw}`"))
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("expected a finite number, got `{raw}`"))
                }
            })
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

impl ConfigValue for usize {
    fn parse_value(raw: &str) -> Result<Self, String> {
        raw.parse::<usize>()
            .map_err(|_| format!("expected a non-negative integer, got `{raw}`"))
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for bool {
    fn parse_value(raw: &str) -> Result<Self, String> {
        match raw {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            _ => Err(format!("expected true/false, got `{raw}`")),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl ConfigValue for Option<f64> {
    fn parse_value(raw: &str) -> Result<Self, String> {
        if raw.eq_ignore_ascii_case("auto") {
            Ok(None)
        } else {
            f64::parse_value(raw).map(Some)
        }
    }
    fn render(&self) -> String {
        match self {
            Some(v) => v.render(),
            None => "auto".to_owned(),
        }
    }
}

impl ConfigValue for Vec<f64> {
    fn parse_value(raw: &str) -> Result<Self, String> {
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',').map(|s| f64::parse_value(s.trim())).collect()
    }
    fn render(&self) -> String {
        self.iter().map(ConfigValue::render).collect::<Vec<_>>().join(", ")
    }
}

impl ConfigValue for [f64; 3] {
    fn parse_value(raw: &str) -> Result<Self, String> {
        let v = Vec::<f64>::parse_value(raw)?;
        <[f64; 3]>::try_from(v.as_slice())
            .map_err(|_| format!("expected three comma-separated numbers, got `{raw}`"))
    }
    fn render(&self) -> String {
        self.to_vec().render()
    }
}

impl ConfigValue for Vec<[f64; 3]> {
    fn parse_value(raw: &str) -> Result<Self, String> {
        raw.split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| <[f64; 3]>::parse_value(s.trim()))
            .collect()
    }
    fn render(&self) -> String {
        self.iter().map(ConfigValue::render).collect::<Vec<_>>().join("; ")
    }
}

macro_rules! enum_value {
    ($($ty:ty),*) => {$(
        impl ConfigValue for $ty {
            fn parse_value(raw: &str) -> Result<Self, String> {
                raw.parse()
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
enum_value!(IapKind, Separation, Layout);

/// How a field is spelled in degrees or decibels at the file boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Plain,
    Angle,
    Linear,
    Watts,
}

trait Section {
    const NAME: &'static str;
    fn unit_of(key: &str) -> Option<Unit>;
    fn set(&mut self, key: &str, raw: &str) -> Result<(), String>;
    fn set_f64(&mut self, key: &str, v: f64) -> Result<(), String> {
        self.set(key, &v.render())
    }
    fn entries(&self) -> Vec<(&'static str, String)>;
}

macro_rules! section {
    ($ty:ty, $name:literal { $($field:ident : $unit:ident),* $(,)? }) => {
        impl Section for $ty {
            const NAME: &'static str = $name;
            fn unit_of(key: &str) -> Option<Unit> {
                match key {
                    $(stringify!($field) => Some(Unit::$unit),)*
                    _ => None,
                }
            }
            fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
                match key {
                    $(stringify!($field) => {
                        self.$field = ConfigValue::parse_value(raw)?;
                        Ok(())
                    })*
                    _ => Err(format!("unknown key `{}` in [{}]", key, $name)),
                }
            }
            fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($field), self.$field.render())),*]
            }
        }
    };
}

section!(ScenarioConfig, "scenario" {
    n_arrays: Plain, n_buildings: Plain, n_beams: Plain,
    m_t: Plain, m_r: Plain, m_t_iap: Plain, n_ue: Plain, n_iue: Plain,
    carrier_freq_out: Plain, carrier_freq_in: Plain,
    bandwidth_out: Plain, bandwidth_in: Plain,
    penetration_loss_db: Plain, gamma: Plain,
    noise_variance: Watts, noise_variance_in: Watts,
    coherence_block: Plain, pilot_len: Plain,
    iap_kind: Plain, separation: Plain, antenna_spacing: Plain,
    building_distances: Plain, building_weights: Plain, layout: Plain,
    user_spacing: Plain, room_size: Plain, sector_half_width: Plain,
    quadrature_points: Plain,
});

section!(DeviceConstants, "device" {
    rho: Plain, eta_c: Plain, eta_acdc: Plain, eta_dcdc: Plain,
});

section!(MbsalaConstants, "mbsala" {
    p_mod: Watts, p_mix: Watts, p_dac: Watts, p_clk: Watts, pa_max: Watts,
});

section!(BmaaConstants, "bmaa" {
    p_mix: Watts, p_vga: Watts, p_adc: Watts, p_lna: Watts, p_clc: Watts,
});

section!(IapConstants, "iap" {
    p_mix: Watts, p_dac: Watts, p_bft: Watts, p_fs: Watts, p_clc: Watts,
    pa_max: Watts, doherty_continuous: Plain,
});

section!(LiFiDeviceParams, "lifi" {
    area_pd: Plain, half_angle: Angle, g_filter: Linear, refr_index: Plain,
    fov: Angle, tx_positions: Plain, rx_position: Plain,
    normal_tx: Plain, normal_rx: Plain, led_coeff: Plain, led_coeff_interf: Plain,
    p_opt: Watts, n0: Plain,
});

section!(LedElectrical, "led" {
    ideality: Plain, charge: Plain, thermal_voltage: Plain, photon_flux: Plain,
    p_f: Plain, epsilon: Plain, sat_current: Plain, mu_phi: Plain,
});

section!(ComplexityParams, "complexity" {
    n_fft: Plain, n_symbols: Plain, frames_per_s: Plain,
    fltr_ops_per_sample: Plain, smpl_ops_per_sample: Plain,
    map_ops_per_bit: Plain, code_ops_per_bit: Plain,
    ctrl_gops: Plain, nw_gops: Plain, precoding_weight: Plain,
});

/// Section names in file order.
pub const SECTIONS: &[&str] = &[
    "scenario",
    "device",
    "mbsala",
    "bmaa",
    "iap",
    "lifi",
    "led",
    "complexity",
];

fn apply_to<S: Section>(section: &mut S, key: &str, raw: &str) -> Result<(), String> {
    if S::unit_of(key).is_some() {
        return section.set(key, raw);
    }
    let converted = [
        ("_deg", Unit::Angle),
        ("_dbm", Unit::Watts),
        ("_db", Unit::Linear),
    ]
    .into_iter()
    .find_map(|(suffix, unit)| {
        let base = key.strip_suffix(suffix)?;
        let declared = S::unit_of(base)?;
        let ok = match unit {
            Unit::Linear => matches!(declared, Unit::Linear | Unit::Watts),
            other => declared == other,
        };
        ok.then_some((base, unit))
    });
    match converted {
        Some((base, unit)) => {
            let v = f64::parse_value(raw)?;
            let v = match (unit, S::unit_of(base)) {
                (Unit::Angle, _) => v.to_radians(),
                (Unit::Watts, _) => 10f64.powf((v - 30.0) / 10.0),
                (Unit::Linear, _) => 10f64.powf(v / 10.0),
                _ => v,
            };
            section.set_f64(base, v)
        }
        None => Err(format!("unknown key `{}` in [{}]", key, S::NAME)),
    }
}

impl ConfigBundle {
    /// Sets `key` in `section` from its textual value.
    pub fn set(&mut self, section: &str, key: &str, raw: &str) -> Result<(), String> {
        match section {
            "scenario" => apply_to(&mut self.scenario, key, raw),
            "device" => apply_to(&mut self.constants, key, raw),
            "mbsala" => apply_to(&mut self.constants.mbsala, key, raw),
            "bmaa" => apply_to(&mut self.constants.bmaa, key, raw),
            "iap" => apply_to(&mut self.constants.iap, key, raw),
            "lifi" => apply_to(&mut self.lifi, key, raw),
            "led" => apply_to(&mut self.lifi.led, key, raw),
            "complexity" => apply_to(&mut self.complexity, key, raw),
            other => Err(format!("unknown section [{other}]")),
        }
    }

    /// All `(section, key, value)` triples in file order.
    pub fn entries(&self) -> Vec<(&'static str, &'static str, String)> {
        let mut out = Vec::new();
        let mut push = |name: &'static str, entries: Vec<(&'static str, String)>| {
            out.extend(entries.into_iter().map(|(k, v)| (name, k, v)));
        };
        push(ScenarioConfig::NAME, self.scenario.entries());
        push(DeviceConstants::NAME, self.constants.entries());
        push(MbsalaConstants::NAME, self.constants.mbsala.entries());
        push(BmaaConstants::NAME, self.constants.bmaa.entries());
        push(IapConstants::NAME, self.constants.iap.entries());
        push(LiFiDeviceParams::NAME, self.lifi.entries());
        push(LedElectrical::NAME, self.lifi.led.entries());
        push(ComplexityParams::NAME, self.complexity.entries());
        out
    }

    /// Renders the bundle in the config grammar; `parse_config` reads it back
    /// to an identical bundle.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (section, key, value) in self.entries() {
            if section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{section}]\n"));
                current = section;
            }
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        let counts = [
            ("scenario.n_arrays", s.n_arrays),
            ("scenario.n_buildings", s.n_buildings),
            ("scenario.n_beams", s.n_beams),
            ("scenario.m_t", s.m_t),
            ("scenario.m_r", s.m_r),
            ("scenario.m_t_iap", s.m_t_iap),
            ("scenario.n_ue", s.n_ue),
            ("scenario.n_iue", s.n_iue),
            ("scenario.coherence_block", s.coherence_block),
            ("scenario.quadrature_points", s.quadrature_points),
            ("complexity.n_symbols", self.complexity.n_symbols),
        ];
        for (key, v) in counts {
            if v < 1 {
                return Err(Error::validation(key, "must be >= 1"));
            }
        }
        let positive = [
            ("scenario.carrier_freq_out", s.carrier_freq_out),
            ("scenario.carrier_freq_in", s.carrier_freq_in),
            ("scenario.bandwidth_out", s.bandwidth_out),
            ("scenario.bandwidth_in", s.bandwidth_in),
            ("scenario.noise_variance", s.noise_variance),
            ("scenario.noise_variance_in", s.noise_variance_in),
            ("scenario.antenna_spacing", s.antenna_spacing),
            ("scenario.user_spacing", s.user_spacing),
            ("scenario.room_size", s.room_size),
            ("scenario.sector_half_width", s.sector_half_width),
            ("device.rho", self.constants.rho),
            ("mbsala.pa_max", self.constants.mbsala.pa_max),
            ("iap.pa_max", self.constants.iap.pa_max),
            ("lifi.area_pd", self.lifi.area_pd),
            ("lifi.refr_index", self.lifi.refr_index),
            ("lifi.p_opt", self.lifi.p_opt),
            ("lifi.n0", self.lifi.n0),
            ("lifi.led_coeff", self.lifi.led_coeff),
            ("complexity.frames_per_s", self.complexity.frames_per_s),
        ];
        for (key, v) in positive {
            if !(v > 0.0) {
                return Err(Error::validation(key, "must be > 0"));
            }
        }
        if !(s.gamma > 0.0 && s.gamma <= 1.0) {
            return Err(Error::validation("scenario.gamma", "must lie in (0, 1]"));
        }
        if s.pilot_len > s.coherence_block {
            return Err(Error::validation(
                "scenario.pilot_len",
                "must not exceed coherence_block",
            ));
        }
        if !(s.penetration_loss_db >= 0.0) {
            return Err(Error::validation("scenario.penetration_loss_db", "must be >= 0"));
        }
        if s.building_distances.len() != s.n_buildings {
            return Err(Error::validation(
                "scenario.building_distances",
                format!("expected {} entries, got {}", s.n_buildings, s.building_distances.len()),
            ));
        }
        if s.building_distances.iter().any(|&d| !(d >= 1.0)) {
            return Err(Error::validation(
                "scenario.building_distances",
                "distances must be >= 1 m",
            ));
        }
        if !s.building_weights.is_empty() {
            if s.building_weights.len() != s.n_buildings {
                return Err(Error::validation(
                    "scenario.building_weights",
                    format!("expected {} entries or none", s.n_buildings),
                ));
            }
            if s.building_weights.iter().any(|&w| !(w >= 0.0))
                || !(s.building_weights.iter().sum::<f64>() > 0.0)
            {
                return Err(Error::validation(
                    "scenario.building_weights",
                    "weights must be >= 0 with a positive sum",
                ));
            }
        }

        let k = &self.constants;
        for (key, eta) in [
            ("device.eta_c", k.eta_c),
            ("device.eta_acdc", k.eta_acdc),
            ("device.eta_dcdc", k.eta_dcdc),
        ] {
            if !(0.0..1.0).contains(&eta) {
                return Err(Error::validation(key, "must lie in [0, 1)"));
            }
        }
        let draws = [
            ("mbsala.p_mod", k.mbsala.p_mod),
            ("mbsala.p_mix", k.mbsala.p_mix),
            ("mbsala.p_dac", k.mbsala.p_dac),
            ("mbsala.p_clk", k.mbsala.p_clk),
            ("bmaa.p_mix", k.bmaa.p_mix),
            ("bmaa.p_vga", k.bmaa.p_vga),
            ("bmaa.p_adc", k.bmaa.p_adc),
            ("bmaa.p_lna", k.bmaa.p_lna),
            ("bmaa.p_clc", k.bmaa.p_clc),
            ("iap.p_mix", k.iap.p_mix),
            ("iap.p_dac", k.iap.p_dac),
            ("iap.p_bft", k.iap.p_bft),
            ("iap.p_fs", k.iap.p_fs),
            ("iap.p_clc", k.iap.p_clc),
            ("lifi.g_filter", self.lifi.g_filter),
            ("lifi.led_coeff_interf", self.lifi.led_coeff_interf),
            ("complexity.fltr_ops_per_sample", self.complexity.fltr_ops_per_sample),
            ("complexity.smpl_ops_per_sample", self.complexity.smpl_ops_per_sample),
            ("complexity.map_ops_per_bit", self.complexity.map_ops_per_bit),
            ("complexity.code_ops_per_bit", self.complexity.code_ops_per_bit),
            ("complexity.ctrl_gops", self.complexity.ctrl_gops),
            ("complexity.nw_gops", self.complexity.nw_gops),
        ];
        for (key, v) in draws {
            if !(v >= 0.0) {
                return Err(Error::validation(key, "must be >= 0"));
            }
        }
        if let Some(w) = self.complexity.precoding_weight {
            if !(w >= 0.0) {
                return Err(Error::validation("complexity.precoding_weight", "must be >= 0"));
            }
        }
        let n = self.complexity.n_fft;
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::validation("complexity.n_fft", "must be a power of two >= 2"));
        }

        let l = &self.lifi;
        if !(l.half_angle > 0.0 && l.half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::validation("lifi.half_angle", "must lie in (0, pi/2)"));
        }
        if !(l.fov > 0.0 && l.fov <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::validation("lifi.fov", "must lie in (0, pi/2]"));
        }
        if l.tx_positions.is_empty() {
            return Err(Error::validation("lifi.tx_positions", "needs a serving luminaire"));
        }
        for (key, nrm) in [("lifi.normal_tx", l.normal_tx), ("lifi.normal_rx", l.normal_rx)] {
            let len = nrm.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (len - 1.0).abs() > 1e-9 {
                return Err(Error::validation(key, "must be a unit vector"));
            }
        }
        let e = &l.led;
        for (key, v) in [
            ("led.ideality", e.ideality),
            ("led.charge", e.charge),
            ("led.thermal_voltage", e.thermal_voltage),
            ("led.p_f", e.p_f),
            ("led.epsilon", e.epsilon),
            ("led.sat_current", e.sat_current),
            ("led.mu_phi", e.mu_phi),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(key, "must be > 0"));
            }
        }
        if !(e.photon_flux >= 0.0) {
            return Err(Error::validation("led.photon_flux", "must be >= 0"));
        }
        Ok(())
    }
}

/// Parses config text on top of the shipped defaults. Does not validate.
pub fn parse_config(text: &str, origin: &str) -> Result<ConfigBundle> {
    let mut bundle = ConfigBundle::default();
    let mut section: Option<String> = None;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_owned(),
            line: line_no,
            msg,
        };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_err(format!("unterminated section header `{line}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(parse_err(format!("unknown section [{name}]")));
            }
            section = Some(name.to_owned());
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let sect = section
            .as_deref()
            .ok_or_else(|| parse_err("key outside of any [section]".to_owned()))?;
        bundle
            .set(sect, key.trim(), value.trim())
            .map_err(parse_err)?;
    }
    Ok(bundle)
}

/// Applies `E2E_<SECTION>_<KEY>` overrides from `vars`.
pub fn apply_env_overrides<I, K, V>(bundle: &mut ConfigBundle, vars: I) -> Result<Vec<String>>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let mut applied = Vec::new();
    let mut vars: Vec<(String, String)> = vars
        .into_iter()
        .map(|(k, v)| (k.as_ref().to_owned(), v.as_ref().to_owned()))
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (name, value) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let Some((section, key)) = rest.split_once('_') else {
            continue;
        };
        if !SECTIONS.contains(&section) {
            continue;
        }
        bundle
            .set(section, key, value.trim())
            .map_err(|msg| Error::Parse {
                path: format!("${name}"),
                line: 0,
                msg,
            })?;
        applied.push(format!("{name}={value}"));
    }
    Ok(applied)
}

/// Raw bytes, environment overrides and the resulting validated bundle.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub bundle: ConfigBundle,
    pub bytes: Vec<u8>,
    pub env_overrides: Vec<String>,
}

/// Reads, parses, applies process-environment overrides and validates.
pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigBundle> {
    load_config_with_env(path, std::env::vars()).map(|l| l.bundle)
}

pub fn load_config_with_env<I, K, V>(path: impl AsRef<Path>, vars: I) -> Result<LoadedConfig>
where
    I: IntoIterator<Item = (K, V)>,
    K: AsRef<str>,
    V: AsRef<str>,
{
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: "file is not valid UTF-8".to_owned(),
    })?;
    let mut bundle = parse_config(&text, &path.display().to_string())?;
    let env_overrides = apply_env_overrides(&mut bundle, vars)?;
    bundle.validate()?;
    Ok(LoadedConfig {
        bundle,
        bytes,
        env_overrides,
    })
}

/// Where a shipped default comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Stated for the reference deployment (array sizes, building count,
    /// penetration loss, conversion factor).
    Reference,
    /// EARTH-style component value or typical overhead fraction.
    EarthStyle,
    /// Computed from other defaults (e.g. kTB noise with a noise figure).
    Derived,
    /// Modelling convention or assumed geometry.
    Assumed,
    /// Chosen so the default deployment lands in the published operating
    /// regime; see README.
    Calibrated,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Reference => "reference",
            Provenance::EarthStyle => "earth-style",
            Provenance::Derived => "derived",
            Provenance::Assumed => "assumed",
            Provenance::Calibrated => "calibrated",
        })
    }
}

/// Provenance of every shipped default, keyed `section.key`.
pub const DEFAULT_PROVENANCE: &[(&str, Provenance, &str)] = {
    use Provenance::*;
    &[
        ("scenario.n_arrays", Assumed, "one MBSALA sector per cell"),
        ("scenario.n_buildings", Reference, "each MBSALA serves 4 buildings"),
        ("scenario.n_beams", Reference, "4 beamforming links per MBSALA-BMAA pair"),
        ("scenario.m_t", Reference, "smallest of the 64/128/256 MBSALA sizes"),
        ("scenario.m_r", Reference, "64 BMAA antennas"),
        ("scenario.m_t_iap", Assumed, "16-element indoor mmWave array"),
        ("scenario.n_ue", Assumed, "same indoor population as 4 buildings x 4 users"),
        ("scenario.n_iue", Assumed, "4 users per IAP"),
        ("scenario.carrier_freq_out", Assumed, "3.5 GHz sub-6 band"),
        ("scenario.carrier_freq_in", Assumed, "28 GHz indoor band"),
        ("scenario.bandwidth_out", Calibrated, "20 MHz outdoor carrier"),
        ("scenario.bandwidth_in", Assumed, "400 MHz indoor carrier"),
        ("scenario.penetration_loss_db", Reference, "20 dB wall penetration"),
        ("scenario.gamma", Assumed, "neutral channel usage efficiency"),
        ("scenario.noise_variance", Derived, "kTB at 290 K over 20 MHz with 7 dB NF"),
        ("scenario.noise_variance_in", Derived, "kTB at 290 K over 400 MHz with 9 dB NF"),
        ("scenario.coherence_block", Assumed, "196 resource elements"),
        ("scenario.pilot_len", Reference, "tau equals the number of users"),
        ("scenario.iap_kind", Assumed, "mmWave"),
        ("scenario.separation", Assumed, "separate"),
        ("scenario.antenna_spacing", Reference, "half-wavelength spacing"),
        ("scenario.building_distances", Assumed, "buildings at 100-400 m"),
        ("scenario.building_weights", Assumed, "equal traffic split"),
        ("scenario.layout", Assumed, "deterministic grid"),
        ("scenario.user_spacing", Assumed, "2 m indoor grid pitch"),
        ("scenario.room_size", Assumed, "6 m square room"),
        ("scenario.sector_half_width", Assumed, "+-60 deg sector in sine space"),
        ("scenario.quadrature_points", Assumed, "fixed-grid expectation resolution"),
        ("device.rho", Reference, "160 GOP/W"),
        ("device.eta_c", EarthStyle, "cooling loss"),
        ("device.eta_acdc", EarthStyle, "AC-DC conversion loss"),
        ("device.eta_dcdc", EarthStyle, "DC-DC conversion loss"),
        ("mbsala.p_mod", EarthStyle, "per-antenna modulator"),
        ("mbsala.p_mix", EarthStyle, "per-antenna mixer"),
        ("mbsala.p_dac", EarthStyle, "per-antenna DAC"),
        ("mbsala.p_clk", EarthStyle, "clock generation"),
        ("mbsala.pa_max", Calibrated, "class-B rating per stream"),
        ("bmaa.p_mix", EarthStyle, "per-antenna mixer"),
        ("bmaa.p_vga", EarthStyle, "per-antenna VGA"),
        ("bmaa.p_adc", EarthStyle, "per-antenna ADC"),
        ("bmaa.p_lna", EarthStyle, "per-antenna LNA"),
        ("bmaa.p_clc", EarthStyle, "clock generation"),
        ("iap.p_mix", EarthStyle, "per-antenna mixer"),
        ("iap.p_dac", EarthStyle, "per-antenna DAC"),
        ("iap.p_bft", EarthStyle, "per-antenna beamforming phase shifter"),
        ("iap.p_fs", EarthStyle, "per-antenna frequency synthesis"),
        ("iap.p_clc", EarthStyle, "clock generation"),
        ("iap.pa_max", Assumed, "Doherty rating per antenna"),
        ("iap.doherty_continuous", Assumed, "two-branch law as printed"),
        ("lifi.area_pd", Assumed, "1 cm^2 photodiode"),
        ("lifi.half_angle", Assumed, "60 deg, first-order Lambertian"),
        ("lifi.g_filter", Assumed, "ideal optical filter"),
        ("lifi.refr_index", Assumed, "concentrator refractive index 1.5"),
        ("lifi.fov", Assumed, "60 deg field of view"),
        ("lifi.tx_positions", Assumed, "ceiling luminaire at 3 m"),
        ("lifi.rx_position", Assumed, "desk height 0.85 m"),
        ("lifi.normal_tx", Reference, "luminaire faces down"),
        ("lifi.normal_rx", Reference, "receiver faces up"),
        ("lifi.led_coeff", Assumed, "unit LED coefficient"),
        ("lifi.led_coeff_interf", Assumed, "unit LED coefficient"),
        ("lifi.p_opt", Assumed, "optical signal budget"),
        ("lifi.n0", Assumed, "receiver noise density"),
        ("led.ideality", Assumed, "diode ideality factor"),
        ("led.charge", Derived, "elementary charge"),
        ("led.thermal_voltage", Derived, "kT/q at 300 K"),
        ("led.photon_flux", Calibrated, "drive level of a 2 A luminaire"),
        ("led.p_f", Assumed, "unit photon conversion factor"),
        ("led.epsilon", Assumed, "LED quantum efficiency"),
        ("led.sat_current", Assumed, "LED saturation current"),
        ("led.mu_phi", Assumed, "communication scaling"),
        ("complexity.n_fft", EarthStyle, "2048-point OFDM"),
        ("complexity.n_symbols", EarthStyle, "14 symbols per 1 ms frame"),
        ("complexity.frames_per_s", EarthStyle, "1 ms frames"),
        ("complexity.fltr_ops_per_sample", EarthStyle, "per-antenna filtering"),
        ("complexity.smpl_ops_per_sample", EarthStyle, "per-stream resampling"),
        ("complexity.map_ops_per_bit", EarthStyle, "symbol (de)mapping"),
        ("complexity.code_ops_per_bit", EarthStyle, "channel coding"),
        ("complexity.ctrl_gops", EarthStyle, "control processing"),
        ("complexity.nw_gops", EarthStyle, "network processing"),
        ("complexity.precoding_weight", Assumed, "M_T x n_fft operations per stream item"),
    ]
};

pub fn provenance_of(section: &str, key: &str) -> Option<(Provenance, &'static str)> {
    let full = format!("{section}.{key}");
    DEFAULT_PROVENANCE
        .iter()
        .find(|(k, _, _)| *k == full)
        .map(|&(_, p, note)| (p, note))
}

/// Lambertian emission order `m = -1 / log2(cos(half_angle))`.
pub fn lambertian_order(half_angle: f64) -> Result<f64> {
    if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "half-intensity angle {half_angle} rad outside (0, pi/2)"
        )));
    }
    Ok(-1.0 / half_angle.cos().log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ConfigBundle::default().validate().unwrap();
    }

    #[test]
    fn empty_text_gives_defaults() {
        let b = parse_config("", "empty").unwrap();
        assert_eq!(b, ConfigBundle::default());
        assert_eq!(b.constants.rho, 160.0);
    }

    #[test]
    fn echoes_reference_values() {
        let b = parse_config(
            "[scenario]\nm_t = 256\nn_buildings = 4\npenetration_loss_db = 20\n",
            "t",
        )
        .unwrap();
        assert_eq!(b.scenario.m_t, 256);
        assert_eq!(b.scenario.n_buildings, 4);
        assert_eq!(b.scenario.penetration_loss_db, 20.0);
    }

    #[test]
    fn eta_out_of_range_is_rejected() {
        let b = parse_config("[device]\neta_c = 1.2\n", "t").unwrap();
        match b.validate() {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "device.eta_c"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unit_suffixes_convert() {
        let b = parse_config(
            "[lifi]\nhalf_angle_deg = 45\nfov_deg = 90\ng_filter_db = 3\n[scenario]\nnoise_variance_dbm = -90\n",
            "t",
        )
        .unwrap();
        assert!((b.lifi.half_angle - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((b.lifi.fov - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((b.lifi.g_filter - 10f64.powf(0.3)).abs() < 1e-12);
        assert!((b.scenario.noise_variance - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_config("[scenario]\nm_t 64\n", "f.cfg") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("m_t = 64\n", "f").is_err());
        assert!(parse_config("[nope]\n", "f").is_err());
        assert!(parse_config("[scenario]\nbogus = 1\n", "f").is_err());
        assert!(parse_config("[scenario]\nm_t = -3\n", "f").is_err());
        // `_deg` only applies to angle fields.
        assert!(parse_config("[scenario]\nm_t_deg = 3\n", "f").is_err());
    }

    #[test]
    fn round_trip_is_identical() {
        let mut b = ConfigBundle::default();
        b.scenario.m_t = 256;
        b.scenario.building_weights = vec![1.0, 2.0, 3.0, 4.0];
        b.lifi.tx_positions.push([2.5, -1.0, 3.0]);
        b.complexity.precoding_weight = Some(1.0e5 / 3.0);
        b.constants.iap.doherty_continuous = true;
        let text = b.to_config_string();
        assert_eq!(parse_config(&text, "rt").unwrap(), b);
    }

    #[test]
    fn env_overrides_file() {
        let mut b = parse_config("[scenario]\nm_t = 128\n", "t").unwrap();
        let applied = apply_env_overrides(
            &mut b,
            [("E2E_SCENARIO_M_T", "256"), ("E2E_DEVICE_ETA_C", "0.2"), ("PATH", "/bin")],
        )
        .unwrap();
        assert_eq!(b.scenario.m_t, 256);
        assert_eq!(b.constants.eta_c, 0.2);
        assert_eq!(applied.len(), 2);
        assert!(apply_env_overrides(&mut b, [("E2E_SCENARIO_NOPE", "1")]).is_err());
    }

    #[test]
    fn every_default_has_provenance() {
        let b = ConfigBundle::default();
        let missing: Vec<String> = b
            .entries()
            .into_iter()
            .filter(|(s, k, _)| provenance_of(s, k).is_none())
            .map(|(s, k, _)| format!("{s}.{k}"))
            .collect();
        assert!(missing.is_empty(), "untagged defaults: {missing:?}");
        assert_eq!(DEFAULT_PROVENANCE.len(), b.entries().len());
    }

    #[test]
    fn lambertian_order_values() {
        assert!((lambertian_order(60f64.to_radians()).unwrap() - 1.0).abs() < 4.0 * f64::EPSILON);
        assert!((lambertian_order(45f64.to_radians()).unwrap() - 2.0).abs() < 1e-12);
        let m30 = lambertian_order(30f64.to_radians()).unwrap();
        assert!((m30 - 4.818841679306421).abs() < 1e-12, "{m30}");
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(std::f64::consts::FRAC_PI_2).is_err());
    }

    #[test]
    fn invariants_rejected() {
        let mut b = ConfigBundle::default();
        b.scenario.pilot_len = 500;
        assert!(b.validate().is_err());
        let mut b = ConfigBundle::default();
        b.scenario.gamma = 0.0;
        assert!(b.validate().is_err());
        let mut b = ConfigBundle::default();
        b.scenario.building_distances.pop();
        assert!(b.validate().is_err());
        let mut b = ConfigBundle::default();
        b.lifi.normal_rx = [0.0, 0.0, 2.0];
        assert!(b.validate().is_err());
        let mut b = ConfigBundle::default();
        b.complexity.n_fft = 1000;
        assert!(b.validate().is_err());
    }
}
