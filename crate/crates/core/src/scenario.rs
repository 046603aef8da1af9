//! End-to-end scenarios: rate-to-power inversion, sweeps, crossings and
//! EE-SE curves.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    apply_penetration, lifi_angles, lifi_los_gain, loss_db_to_gain, pathloss_free_space, pathloss_winner_b5a,
};
use crate::config::{ConfigBundle, IapKind, Layout, Separation};
use crate::error::{Error, Result};
use crate::metrics::{
    lifi_power_for_sinr, macro_power_for_snr, mmwave_powers_for_targets, required_sinr, Expectation, LiFiLink,
    OffsetModel,
};
use crate::power::{
    bmaa_load, iap_load, lifi_comm_power, lifi_light_power, mbs_load, mbsala_load, power_bmaa, power_iap_mmwave,
    power_lifi_iap, power_mbs, power_mbsala, DevicePower,
};

/// One scenario variant of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub separation: Separation,
    pub iap_kind: IapKind,
    pub m_t: usize,
}

impl Variant {
    pub fn separate(iap_kind: IapKind, m_t: usize) -> Self {
        Self {
            separation: Separation::Separate,
            iap_kind,
            m_t,
        }
    }

    pub fn non_separate(m_t: usize) -> Self {
        Self {
            separation: Separation::NonSeparate,
            iap_kind: IapKind::MmWave,
            m_t,
        }
    }

    /// Label without the antenna count.
    pub fn family(&self) -> &'static str {
        match (self.separation, self.iap_kind) {
            (Separation::NonSeparate, _) => "nonsep",
            (Separation::Separate, IapKind::MmWave) => "sep-mmwave",
            (Separation::Separate, IapKind::LiFi) => "sep-lifi",
        }
    }

    /// Parse `family[@m_t]`, taking `default_m_t` when the count is omitted.
    pub fn parse_with_default(s: &str, default_m_t: usize) -> Result<Self> {
        let (family, m_t) = match s.split_once('@') {
            Some((f, m)) => (
                f,
                m.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Sweep(format!("bad antenna count in variant `{s}`")))?,
            ),
            None => (s, default_m_t),
        };
        if m_t == 0 {
            return Err(Error::Sweep(format!("variant `{s}` has zero antennas")));
        }
        match family.trim() {
            "nonsep" | "non-separate" => Ok(Self::non_separate(m_t)),
            "sep-mmwave" | "separate-mmwave" => Ok(Self::separate(IapKind::MmWave, m_t)),
            "sep-lifi" | "separate-lifi" => Ok(Self::separate(IapKind::LiFi, m_t)),
            other => Err(Error::Sweep(format!("unknown variant `{other}`"))),
        }
    }

    pub fn apply(&self, bundle: &ConfigBundle) -> ConfigBundle {
        let mut b = bundle.clone();
        b.scenario.separation = self.separation;
        b.scenario.iap_kind = self.iap_kind;
        b.scenario.m_t = self.m_t;
        b
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.family(), self.m_t)
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if !s.contains('@') {
            return Err(Error::Sweep(format!("variant `{s}` needs an @M_T suffix")));
        }
        Self::parse_with_default(s, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub distance: f64,
    pub loss_db: f64,
    /// Outdoor path gain without penetration, linear.
    pub beta_out: f64,
    /// Share of the offered rate.
    pub weight: f64,
}

/// Indoor user position relative to its building's access point.
#[derive(Debug, Clone, PartialEq)]
pub struct IndoorUser {
    pub building: usize,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
enum Access {
    None,
    MmWave {
        /// Expected kernel gains between users of one IAP.
        gains: Vec<Vec<f64>>,
        /// Per building, per user `beta_k` including the IAP array gain.
        beta: Vec<Vec<f64>>,
    },
    LiFi {
        /// Per building, per user serving LoS gain.
        h: Vec<Vec<f64>>,
        /// Per building, per user interfering links at full optical power.
        interferers: Vec<Vec<Vec<LiFiLink>>>,
    },
}

/// A wired cell ready for rate points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioModel {
    pub bundle: ConfigBundle,
    pub buildings: Vec<Building>,
    pub users: Vec<IndoorUser>,
    access: Access,
}

impl ScenarioModel {
    pub fn separation(&self) -> Separation {
        self.bundle.scenario.separation
    }

    pub fn n_bmaa(&self) -> usize {
        match self.separation() {
            Separation::Separate => self.bundle.scenario.n_arrays * self.bundle.scenario.n_buildings,
            Separation::NonSeparate => 0,
        }
    }

    pub fn n_iap(&self) -> usize {
        self.n_bmaa()
    }

    pub fn users_in(&self, building: usize) -> impl Iterator<Item = (usize, &IndoorUser)> {
        self.users.iter().enumerate().filter(move |(_, u)| u.building == building)
    }
}

fn grid_positions(n: usize, spacing: f64, z: f64) -> Vec<[f64; 3]> {
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols);
    (0..n)
        .map(|i| {
            let (r, c) = (i / cols, i % cols);
            [
                (c as f64 - (cols as f64 - 1.0) / 2.0) * spacing,
                (r as f64 - (rows as f64 - 1.0) / 2.0) * spacing,
                z,
            ]
        })
        .collect()
}

/// Wire the cell described by `bundle`. `seed` drives the random layout.
pub fn build_scenario(bundle: &ConfigBundle, seed: u64) -> Result<ScenarioModel> {
    bundle.validate()?;
    let s = &bundle.scenario;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let distances: Vec<f64> = match s.layout {
        Layout::Grid => s.building_distances.clone(),
        Layout::Random => {
            let lo = s.building_distances.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.building_distances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (0..s.n_buildings)
                .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect()
        }
    };
    let weights: Vec<f64> = if s.building_weights.is_empty() {
        vec![1.0 / s.n_buildings as f64; s.n_buildings]
    } else {
        let sum: f64 = s.building_weights.iter().sum();
        s.building_weights.iter().map(|w| w / sum).collect()
    };
    let buildings = distances
        .iter()
        .zip(&weights)
        .map(|(&d, &w)| {
            let loss_db = pathloss_winner_b5a(d, s.carrier_freq_out)?;
            Ok(Building {
                distance: d,
                loss_db,
                beta_out: loss_db_to_gain(loss_db),
                weight: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rx_z = bundle.lifi.rx_position[2];
    let place = |rng: &mut ChaCha8Rng, n: usize| -> Vec<[f64; 3]> {
        match s.layout {
            Layout::Grid => grid_positions(n, s.user_spacing, rx_z),
            Layout::Random => (0..n)
                .map(|_| {
                    let h = s.room_size / 2.0;
                    [rng.random_range(-h..h), rng.random_range(-h..h), rx_z]
                })
                .collect(),
        }
    };

    let users: Vec<IndoorUser> = match s.separation {
        Separation::NonSeparate => {
            let per_building = (0..s.n_buildings)
                .map(|b| (0..s.n_ue).filter(|u| u % s.n_buildings == b).count())
                .collect::<Vec<_>>();
            let positions: Vec<Vec<[f64; 3]>> = per_building.iter().map(|&n| place(&mut rng, n)).collect();
            let mut next = vec![0; s.n_buildings];
            (0..s.n_ue)
                .map(|u| {
                    let b = u % s.n_buildings;
                    let p = positions[b][next[b]];
                    next[b] += 1;
                    IndoorUser {
                        building: b,
                        position: p,
                    }
                })
                .collect()
        }
        Separation::Separate => (0..s.n_buildings)
            .flat_map(|b| {
                place(&mut rng, s.n_iue)
                    .into_iter()
                    .map(move |p| IndoorUser {
                        building: b,
                        position: p,
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
    };

    let access = match (s.separation, s.iap_kind) {
        (Separation::NonSeparate, _) => Access::None,
        (Separation::Separate, IapKind::MmWave) => {
            let ap = bundle.lifi.tx_positions[0];
            let engine = Expectation::Quadrature {
                points: s.quadrature_points,
            };
            let gains = OffsetModel::matched_uniform_sector(s.n_iue, s.sector_half_width).gain_matrix(s.m_t_iap, engine);
            let beta = (0..s.n_buildings)
                .map(|b| {
                    users
                        .iter()
                        .filter(|u| u.building == b)
                        .map(|u| {
                            let d = distance(ap, u.position).max(1e-3);
                            Ok(loss_db_to_gain(pathloss_free_space(d, s.carrier_freq_in)?) * s.m_t_iap as f64)
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Access::MmWave { gains, beta }
        }
        (Separation::Separate, IapKind::LiFi) => {
            let l = &bundle.lifi;
            let mut h = Vec::with_capacity(s.n_buildings);
            let mut interferers = Vec::with_capacity(s.n_buildings);
            for b in 0..s.n_buildings {
                let mut hb = Vec::new();
                let mut ib = Vec::new();
                for u in users.iter().filter(|u| u.building == b) {
                    let gain = |tx: [f64; 3]| -> Result<f64> {
                        let g = lifi_angles(tx, u.position, l.normal_tx, l.normal_rx)?;
                        Ok(lifi_los_gain(&g, l))
                    };
                    hb.push(gain(l.tx_positions[0])?);
                    ib.push(
                        l.tx_positions[1..]
                            .iter()
                            .map(|&tx| {
                                Ok(LiFiLink {
                                    coeff: l.led_coeff_interf,
                                    p_t: l.p_opt,
                                    h_los: gain(tx)?,
                                })
                            })
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                h.push(hb);
                interferers.push(ib);
            }
            Access::LiFi { h, interferers }
        }
    };

    Ok(ScenarioModel {
        bundle: bundle.clone(),
        buildings,
        users,
        access,
    })
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Why a rate point could not be served.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// A PA would need more than its maximum output.
    Saturation { stage: &'static str, p_out: f64, p_max: f64 },
    /// Interference makes the access SINR targets unreachable.
    InterferenceLimited,
    /// A LiFi user is outside the serving field of view.
    NoCoverage,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::Saturation { stage, p_out, p_max } => {
                write!(f, "{stage} PA saturated: {p_out:.4e} W > {p_max:.4e} W")
            }
            Infeasibility::InterferenceLimited => f.write_str("access SINR targets unreachable"),
            Infeasibility::NoCoverage => f.write_str("LiFi user outside field of view"),
        }
    }
}

/// Per-device totals for one rate point.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub mbs: DevicePower,
    /// MBSALA before the MBS overhead divisor.
    pub mbsala: DevicePower,
    pub bmaa: Vec<DevicePower>,
    pub iap: Vec<DevicePower>,
    /// Largest `P_o / P_max` over every PA at this point.
    pub max_pa_load: f64,
    /// IAPs operating on the upper Doherty branch.
    pub doherty_upper: usize,
}

impl Breakdown {
    pub fn p_mbs(&self) -> f64 {
        self.mbs.p_total
    }

    pub fn p_bmaa(&self) -> f64 {
        self.bmaa.iter().map(|d| d.p_total).sum()
    }

    pub fn p_iap(&self) -> f64 {
        self.iap.iter().map(|d| d.p_total).sum()
    }

    pub fn total(&self) -> f64 {
        self.p_mbs() + self.p_bmaa() + self.p_iap()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub total_rate: f64,
    /// System SE over the outdoor bandwidth.
    pub se: f64,
    pub outcome: std::result::Result<Breakdown, Infeasibility>,
}

impl PointResult {
    pub fn feasible(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn total_power(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(Breakdown::total)
    }

    pub fn ee(&self) -> Option<f64> {
        self.total_power().map(|p| self.se / p)
    }
}

fn saturated(stage: &'static str, p_out: f64, p_max: f64) -> Infeasibility {
    Infeasibility::Saturation { stage, p_out, p_max }
}

/// Required SINR for `rate` bit/s over `bandwidth` Hz.
fn sinr_for_rate(rate: f64, bandwidth: f64, gamma: f64) -> f64 {
    required_sinr(rate / bandwidth, gamma)
}

/// Invert the whole gain chain for an offered cell rate.
pub fn solve_rate_point(model: &ScenarioModel, total_rate: f64) -> Result<PointResult> {
    if !(total_rate >= 0.0) || !total_rate.is_finite() {
        return Err(Error::Domain(format!("offered rate must be >= 0, got {total_rate}")));
    }
    let b = &model.bundle;
    let s = &b.scenario;
    let k = &b.constants;
    let se = total_rate / s.bandwidth_out;
    let per_array = total_rate / s.n_arrays as f64;
    let building_rate: Vec<f64> = model.buildings.iter().map(|bd| per_array * bd.weight).collect();
    let user_rate = |u: usize| -> f64 {
        let bd = model.users[u].building;
        let n = model.users_in(bd).count();
        building_rate[bd] / n as f64
    };
    let done = |outcome| Ok(PointResult {
        total_rate,
        se,
        outcome,
    });

    let mut max_pa_load: f64 = 0.0;
    let mut stream_powers = Vec::new();
    let mut bmaa = Vec::new();
    let mut iap = Vec::new();
    let mut doherty_upper = 0;

    let mbsala_l = match s.separation {
        Separation::NonSeparate => {
            for (u, user) in model.users.iter().enumerate() {
                let bd = &model.buildings[user.building];
                let beta = loss_db_to_gain(apply_penetration(bd.loss_db, s.penetration_loss_db));
                let snr = sinr_for_rate(user_rate(u), s.bandwidth_out, s.gamma);
                let p = macro_power_for_snr(snr, beta, s.m_t, 1, s.noise_variance);
                if p > k.mbsala.pa_max {
                    return done(Err(saturated("mbsala", p, k.mbsala.pa_max)));
                }
                max_pa_load = max_pa_load.max(p / k.mbsala.pa_max);
                stream_powers.push(p);
            }
            mbsala_load(b, s.n_ue, s.pilot_len, 0, per_array)?
        }
        Separation::Separate => {
            for (i, bd) in model.buildings.iter().enumerate() {
                let snr = sinr_for_rate(building_rate[i] / s.n_beams as f64, s.bandwidth_out, s.gamma);
                let p = macro_power_for_snr(snr, bd.beta_out, s.m_t, s.m_r, s.noise_variance);
                if p > k.mbsala.pa_max {
                    return done(Err(saturated("backhaul", p, k.mbsala.pa_max)));
                }
                max_pa_load = max_pa_load.max(p / k.mbsala.pa_max);
                stream_powers.extend(std::iter::repeat_n(p, s.n_beams));
            }

            for (i, _) in model.buildings.iter().enumerate() {
                let load = bmaa_load(b, building_rate[i])?;
                bmaa.push(power_bmaa(s, k, &load));
                let members: Vec<usize> = model.users_in(i).map(|(u, _)| u).collect();
                let rates: Vec<f64> = members.iter().map(|&u| user_rate(u)).collect();
                match &model.access {
                    Access::MmWave { gains, beta } => {
                        let targets: Vec<f64> = rates
                            .iter()
                            .map(|&r| sinr_for_rate(r, s.bandwidth_in, s.gamma))
                            .collect();
                        let Some(p) = mmwave_powers_for_targets(gains, &beta[i], &targets, s.noise_variance_in) else {
                            return done(Err(Infeasibility::InterferenceLimited));
                        };
                        let p_out = p.iter().sum::<f64>() / s.m_t_iap as f64;
                        if p_out > k.iap.pa_max {
                            return done(Err(saturated("mmwave-iap", p_out, k.iap.pa_max)));
                        }
                        max_pa_load = max_pa_load.max(p_out / k.iap.pa_max);
                        if p_out >= 0.25 * k.iap.pa_max {
                            doherty_upper += 1;
                        }
                        let load = iap_load(b, building_rate[i])?;
                        iap.push(power_iap_mmwave(s, k, &load, p_out)?);
                    }
                    Access::LiFi { h, interferers } => {
                        let l = &b.lifi;
                        // Users share the luminaire in time, so each link runs
                        // at `n` times the user's rate while active.
                        let n = members.len() as f64;
                        let mut comm = 0.0;
                        for (j, &r) in rates.iter().enumerate() {
                            if r == 0.0 {
                                continue;
                            }
                            let snr = sinr_for_rate(n * r, s.bandwidth_in, s.gamma);
                            let Some(p_t) =
                                lifi_power_for_sinr(snr, l.led_coeff, h[i][j], &interferers[i][j], l.n0, s.bandwidth_in)
                            else {
                                return done(Err(Infeasibility::NoCoverage));
                            };
                            if p_t > l.p_opt {
                                return done(Err(saturated("lifi-iap", p_t, l.p_opt)));
                            }
                            max_pa_load = max_pa_load.max(p_t / l.p_opt);
                            comm += lifi_comm_power(&l.led, h[i][j]) / n;
                        }
                        let mut dev = power_lifi_iap(&l.led, 0.0);
                        dev.p_rf = comm;
                        dev.p_total = lifi_light_power(&l.led) + comm;
                        iap.push(dev);
                    }
                    Access::None => unreachable!("separate mode always wires access"),
                }
            }
            mbsala_load(b, 0, 0, s.n_buildings, per_array)?
        }
    };

    let mbsala = power_mbsala(s, k, &mbsala_l, &stream_powers)?;
    let mbs = power_mbs(s, k, &vec![mbsala.p_total; s.n_arrays], &mbs_load(b, total_rate))?;
    // Every array serves an identical set of buildings.
    let replicate = |v: Vec<DevicePower>| -> Vec<DevicePower> {
        let n = v.len();
        v.into_iter().cycle().take(n * s.n_arrays).collect()
    };
    done(Ok(Breakdown {
        mbs,
        mbsala,
        bmaa: replicate(bmaa),
        iap: replicate(iap),
        max_pa_load,
        doherty_upper: doherty_upper * s.n_arrays,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    TotalRate,
    Se,
}

impl SweepVariable {
    /// Column value for `x_kind`.
    pub fn kind(&self) -> &'static str {
        match self {
            SweepVariable::TotalRate => "total_rate_bps",
            SweepVariable::Se => "se_bits_per_hz",
        }
    }

    pub fn from_kind(s: &str) -> Option<Self> {
        match s {
            "total_rate_bps" => Some(SweepVariable::TotalRate),
            "se_bits_per_hz" => Some(SweepVariable::Se),
            _ => None,
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rate" | "total_rate_bps" => Ok(SweepVariable::TotalRate),
            "se" | "se_bits_per_hz" => Ok(SweepVariable::Se),
            other => Err(Error::Sweep(format!("unknown sweep variable `{other}`"))),
        }
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + (max - min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

/// Parse `min:max:steps`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Sweep(format!("grid `{s}` must be min:max:steps"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Ok(linspace(min, max, steps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub variants: Vec<Variant>,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, grid: Vec<f64>, variants: Vec<Variant>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::Sweep("grid needs at least 2 points".into()));
        }
        if grid.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Sweep("grid values must be finite and >= 0".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Sweep("grid must be strictly increasing".into()));
        }
        if variants.is_empty() {
            return Err(Error::Sweep("no variants".into()));
        }
        Ok(Self {
            variable,
            grid,
            variants,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: Variant,
    pub x: f64,
    pub point: PointResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// Variant-major, grid order within each variant.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn variants(&self) -> Vec<Variant> {
        let mut out: Vec<Variant> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.variant) {
                out.push(r.variant);
            }
        }
        out
    }

    pub fn rows_of(&self, v: &Variant) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.variant == *v).collect()
    }

    /// `(x, total power)` per grid point; `None` where infeasible.
    pub fn curve(&self, v: &Variant) -> Vec<(f64, Option<f64>)> {
        self.rows_of(v).iter().map(|r| (r.x, r.point.total_power())).collect()
    }
}

/// Evaluate every variant on every grid point. Points run in parallel and
/// are merged in (variant, grid) order.
pub fn run_sweep(bundle: &ConfigBundle, spec: &SweepSpec, seed: u64) -> Result<SweepResult> {
    let models = spec
        .variants
        .iter()
        .map(|v| build_scenario(&v.apply(bundle), seed))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..models.len())
        .flat_map(|i| spec.grid.iter().map(move |&x| (i, x)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, x)| {
            let m = &models[i];
            let rate = match spec.variable {
                SweepVariable::TotalRate => x,
                SweepVariable::Se => x * m.bundle.scenario.bandwidth_out,
            };
            Ok(SweepRow {
                variant: spec.variants[i],
                x,
                point: solve_rate_point(m, rate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        variable: spec.variable,
        grid: spec.grid.clone(),
        rows,
    })
}

/// Every interpolated crossing of two power curves on a shared grid.
/// Only points where both curves are feasible take part.
pub fn crossings_of(a: &[(f64, Option<f64>)], b: &[(f64, Option<f64>)]) -> Result<Vec<f64>> {
    if a.len() != b.len() || a.iter().zip(b).any(|(p, q)| p.0 != q.0) {
        return Err(Error::GridMismatch(format!(
            "curves of {} and {} points do not share a grid",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .filter_map(|(p, q)| Some((p.0, p.1? - q.1?)))
        .collect();
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (i, &(_, d)) in diffs.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        if let Some(j) = last {
            let (xj, dj) = diffs[j];
            if dj.signum() != d.signum() {
                if i > j + 1 {
                    out.push(diffs[j + 1].0);
                } else {
                    let (xi, di) = diffs[i];
                    out.push(xj + (xi - xj) * dj / (dj - di));
                }
            }
        }
        last = Some(i);
    }
    Ok(out)
}

pub fn find_crossings(result: &SweepResult, a: &Variant, b: &Variant) -> Result<Vec<f64>> {
    let ca = result.curve(a);
    let cb = result.curve(b);
    if ca.is_empty() || cb.is_empty() {
        return Err(Error::GridMismatch(format!("variant {a} or {b} not in result")));
    }
    crossings_of(&ca, &cb)
}

/// First crossing, if any.
pub fn find_crossing(result: &SweepResult, a: &Variant, b: &Variant) -> Result<Option<f64>> {
    Ok(find_crossings(result, a, b)?.into_iter().next())
}

/// Total power as a function of SE; `None` marks an infeasible point.
pub trait PowerModel {
    fn total_power(&self, se: f64) -> Result<Option<f64>>;
}

impl<F: Fn(f64) -> Option<f64>> PowerModel for F {
    fn total_power(&self, se: f64) -> Result<Option<f64>> {
        Ok(self(se))
    }
}

impl PowerModel for ScenarioModel {
    fn total_power(&self, se: f64) -> Result<Option<f64>> {
        Ok(solve_rate_point(self, se * self.bundle.scenario.bandwidth_out)?.total_power())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EePeak {
    pub se: f64,
    pub ee: f64,
    /// Grid index of the maximum.
    pub index: usize,
    /// Neither the first nor the last feasible point.
    pub interior: bool,
    /// Vertex of the parabola through the maximum and its neighbours.
    pub refined_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EeCurve {
    pub points: Vec<(f64, Option<f64>)>,
    pub peak: Option<EePeak>,
    /// False when EE rises again after it started to fall.
    pub unimodal: bool,
}

pub fn ee_curve_from_points(points: Vec<(f64, Option<f64>)>) -> EeCurve {
    let feasible: Vec<(usize, f64, f64)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, &(x, e))| e.map(|e| (i, x, e)))
        .collect();
    let Some(best) = feasible
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .2.total_cmp(&b.1 .2).then(b.0.cmp(&a.0)))
        .map(|(j, _)| j)
    else {
        return EeCurve {
            points,
            peak: None,
            unimodal: true,
        };
    };
    let mut falling = false;
    let mut unimodal = true;
    for w in feasible.windows(2) {
        if w[1].2 < w[0].2 {
            falling = true;
        } else if falling && w[1].2 > w[0].2 {
            unimodal = false;
        }
    }
    let (index, se, ee) = feasible[best];
    let interior = best > 0 && best + 1 < feasible.len();
    let refined_se = if interior {
        let (_, x0, y0) = feasible[best - 1];
        let (_, x2, y2) = feasible[best + 1];
        let denom = (x0 - se) * (x0 - x2) * (se - x2);
        let a = (x2 * (ee - y0) + se * (y0 - y2) + x0 * (y2 - ee)) / denom;
        let bq = (x2 * x2 * (y0 - ee) + se * se * (y2 - y0) + x0 * x0 * (ee - y2)) / denom;
        if a < 0.0 {
            -bq / (2.0 * a)
        } else {
            se
        }
    } else {
        se
    };
    EeCurve {
        points,
        peak: Some(EePeak {
            se,
            ee,
            index,
            interior,
            refined_se,
        }),
        unimodal,
    }
}

/// EE = SE / P(SE) over `se_grid`, with the argmax and a unimodality check.
pub fn ee_se_curve<M: PowerModel + ?Sized>(model: &M, se_grid: &[f64]) -> Result<EeCurve> {
    if se_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Sweep("SE grid must be strictly increasing".into()));
    }
    let points = se_grid
        .iter()
        .map(|&se| {
            let p = model.total_power(se)?;
            Ok((se, p.map(|p| se / p)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ee_curve_from_points(points))
}
