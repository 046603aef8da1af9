//! Propagation and antenna quantities: ULA responses, the Fejér beam kernel,
//! beamformed gains, WINNER II B5a path loss, wall penetration and the LiFi
//! line-of-sight gain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::LiFiDeviceParams;
use crate::error::{Error, Result};

/// Below this |sin(pi x / 2)| the kernel is evaluated by its limit.
const KERNEL_SINGULAR_EPS: f64 = 1e-9;

/// Unit-norm uniform-linear-array response.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayResponse {
    pub spacing: f64,
    pub steering: f64,
    pub entries: Vec<Complex64>,
}

impl ArrayResponse {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian inner product `self^H other`.
    pub fn inner(&self, other: &ArrayResponse) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Entry `m` (0-based) is `exp(-j 2 pi spacing m steering) / sqrt(M)`.
pub fn array_response(m: usize, spacing: f64, steering: f64) -> Result<ArrayResponse> {
    if m == 0 {
        return Err(Error::Domain("array needs at least one antenna".into()));
    }
    let scale = 1.0 / (m as f64).sqrt();
    let entries = (0..m)
        .map(|idx| Complex64::from_polar(scale, -2.0 * PI * spacing * idx as f64 * steering))
        .collect();
    Ok(ArrayResponse {
        spacing,
        steering,
        entries,
    })
}

/// `F_M(x) = sin(pi M x / 2) / (M sin(pi x / 2))`.
///
/// At even integers `x = 2k` the removable singularity takes its limit
/// `(-1)^(k (M - 1))`.
pub fn fejer_kernel(m: usize, x: f64) -> f64 {
    let m = m.max(1);
    let den = (PI * x / 2.0).sin();
    if den.abs() < KERNEL_SINGULAR_EPS {
        let k = (x / 2.0).round() as i64;
        return if (k * (m as i64 - 1)).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        };
    }
    let v = (PI * m as f64 * x / 2.0).sin() / (m as f64 * den);
    v.clamp(-1.0, 1.0)
}

/// Rank-one beamformed link between an `m_t` transmitter and `m_r` receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamChannel {
    /// Linear path gain.
    pub beta: f64,
    pub m_t: usize,
    pub m_r: usize,
    pub aod: f64,
    pub aoa: f64,
}

/// Power gain `beta M_T M_R F^2_MT(tx - aod) F^2_MR(rx - aoa)`.
pub fn beam_gain(ch: &BeamChannel, tx_beam_angle: f64, rx_beam_angle: f64) -> f64 {
    let ft = fejer_kernel(ch.m_t, tx_beam_angle - ch.aod);
    let fr = fejer_kernel(ch.m_r, rx_beam_angle - ch.aoa);
    ch.beta * ch.m_t as f64 * ch.m_r as f64 * ft * ft * fr * fr
}

/// WINNER II B5a rooftop-to-rooftop LoS path loss in dB, `d` in m, `f_c`
/// in GHz. Valid for `d >= 1 m`.
pub fn pathloss_winner_b5a(d: f64, f_c: f64) -> Result<f64> {
    if !(d >= 1.0) {
        return Err(Error::Domain(format!("distance {d} m below the 1 m validity floor")));
    }
    if !(f_c > 0.0) {
        return Err(Error::Domain(format!("carrier {f_c} GHz must be positive")));
    }
    Ok(23.5 * d.log10() + 42.5 + 20.0 * (f_c / 5.0).log10())
}

/// Free-space path loss in dB, `d` in m, `f_c` in GHz.
pub fn pathloss_free_space(d: f64, f_c: f64) -> Result<f64> {
    if !(d > 0.0 && f_c > 0.0) {
        return Err(Error::Domain(format!("free-space loss needs d > 0 and f > 0 (d={d}, f={f_c})")));
    }
    Ok(20.0 * d.log10() + 20.0 * f_c.log10() + 32.45)
}

/// Adds a penetration loss to a path loss, both in dB.
pub fn apply_penetration(loss_db: f64, penetration_db: f64) -> f64 {
    loss_db + penetration_db
}

/// Linear power gain of a loss expressed in dB.
pub fn loss_db_to_gain(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Transmitter-to-receiver vector and the radiance / incidence angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiFiGeometry {
    pub d: [f64; 3],
    pub distance: f64,
    /// Radiance angle, rad.
    pub phi: f64,
    /// Incidence angle, rad.
    pub psi: f64,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `cos phi = d . n_tx / |d|`, `cos psi = -d . n_rx / |d|`, with `d` pointing
/// from the luminaire to the receiver.
pub fn lifi_angles(
    tx_pos: [f64; 3],
    rx_pos: [f64; 3],
    n_tx: [f64; 3],
    n_rx: [f64; 3],
) -> Result<LiFiGeometry> {
    let d = [rx_pos[0] - tx_pos[0], rx_pos[1] - tx_pos[1], rx_pos[2] - tx_pos[2]];
    let distance = dot(d, d).sqrt();
    if !(distance > 0.0) {
        return Err(Error::DegenerateGeometry);
    }
    let cos_phi = (dot(d, n_tx) / distance).clamp(-1.0, 1.0);
    let cos_psi = (-dot(d, n_rx) / distance).clamp(-1.0, 1.0);
    Ok(LiFiGeometry {
        d,
        distance,
        phi: cos_phi.acos(),
        psi: cos_psi.acos(),
    })
}

/// Optical concentrator gain `refr_index^2 / sin^2(fov)` inside the FoV.
pub fn concentrator_gain(psi: f64, params: &LiFiDeviceParams) -> f64 {
    if psi > params.fov {
        0.0
    } else {
        params.refr_index.powi(2) / params.fov.sin().powi(2)
    }
}

/// Lambertian LoS DC gain; zero outside the receiver field of view or
/// behind the luminaire.
pub fn lifi_los_gain(geom: &LiFiGeometry, params: &LiFiDeviceParams) -> f64 {
    if geom.psi > params.fov || !(geom.distance > 0.0) {
        return 0.0;
    }
    let cos_phi = geom.phi.cos();
    if cos_phi <= 0.0 {
        return 0.0;
    }
    let m = -1.0 / params.half_angle.cos().log2();
    let h = (m + 1.0) * params.area_pd / (2.0 * PI * geom.distance * geom.distance)
        * cos_phi.powf(m)
        * params.g_filter
        * concentrator_gain(geom.psi, params)
        * geom.psi.cos();
    h.max(0.0)
}
