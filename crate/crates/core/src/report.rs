//! Result tables, run manifests, SVG line charts, sweep analysis and golden
//! device-power snapshots.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{lifi_angles, lifi_los_gain};
use crate::config::{ConfigBundle, IapKind, Separation};
use crate::error::{Error, Result};
use crate::power::{
    bmaa_load, iap_load, mbs_load, mbsala_load, power_bmaa, power_iap_mmwave, power_lifi_iap, power_mbs,
    power_mbsala, DevicePower,
};
use crate::scenario::{crossings_of, ee_curve_from_points, EePeak, SweepResult, SweepVariable, Variant};

pub const CSV_HEADER: [&str; 9] = [
    "variant",
    "x_value",
    "x_kind",
    "total_power_w",
    "ee",
    "feasible",
    "p_mbs_w",
    "p_bmaa_w",
    "p_iap_w",
];

/// One line of `results.csv`. Infeasible rows leave the power columns empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub variant: String,
    pub x_value: f64,
    pub x_kind: String,
    pub total_power_w: Option<f64>,
    pub ee: Option<f64>,
    pub feasible: bool,
    pub p_mbs_w: Option<f64>,
    pub p_bmaa_w: Option<f64>,
    pub p_iap_w: Option<f64>,
}

pub fn csv_rows(result: &SweepResult) -> Vec<CsvRow> {
    result
        .rows
        .iter()
        .map(|r| {
            let b = r.point.outcome.as_ref().ok();
            CsvRow {
                variant: r.variant.to_string(),
                x_value: r.x,
                x_kind: result.variable.kind().to_string(),
                total_power_w: r.point.total_power(),
                ee: r.point.ee(),
                feasible: r.point.feasible(),
                p_mbs_w: b.map(|b| b.p_mbs()),
                p_bmaa_w: b.map(|b| b.p_bmaa()),
                p_iap_w: b.map(|b| b.p_iap()),
            }
        })
        .collect()
}

pub fn rows_to_csv(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Table(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Table(e.to_string()))
}

pub fn write_results_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let text = rows_to_csv(&csv_rows(result))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parse a results table, checking the header against [`CSV_HEADER`].
pub fn parse_results_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Table(format!(
            "unexpected header `{}`, want `{}`",
            header.join(","),
            CSV_HEADER.join(",")
        )));
    }
    let rows = r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?;
    for (i, row) in rows.iter().enumerate() {
        if SweepVariable::from_kind(&row.x_kind).is_none() {
            return Err(Error::Table(format!("row {}: unknown x_kind `{}`", i + 1, row.x_kind)));
        }
        if row.feasible != row.total_power_w.is_some() {
            return Err(Error::Table(format!("row {}: feasible flag disagrees with power", i + 1)));
        }
    }
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.x_kind != first.x_kind) {
            return Err(Error::Table("mixed x_kind values".into()));
        }
    }
    Ok(rows)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results_csv(&text)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Provenance of one result set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_sha256: String,
    pub config_path: String,
    pub env_overrides: Vec<String>,
    pub seed: u64,
    pub variable: String,
    pub grid: String,
    pub variants: Vec<String>,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tool=e2e-energy");
        let _ = writeln!(s, "tool_version={}", self.tool_version);
        let _ = writeln!(s, "config_path={}", self.config_path);
        let _ = writeln!(s, "config_sha256={}", self.config_sha256);
        let _ = writeln!(s, "env_overrides={}", self.env_overrides.join(","));
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "variable={}", self.variable);
        let _ = writeln!(s, "grid={}", self.grid);
        let _ = writeln!(s, "variants={}", self.variants.join(","));
        let _ = writeln!(s, "timestamp_unix={}", self.timestamp_unix);
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let map: BTreeMap<&str, &str> = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim(), v.trim()))
            .collect();
        let get = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| Error::Table(format!("manifest lacks `{k}`")))
        };
        let list = |v: &str| -> Vec<String> {
            v.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::Table(format!("manifest `{k}` is not an integer")))
        };
        Ok(Self {
            config_sha256: get("config_sha256")?.to_string(),
            config_path: get("config_path")?.to_string(),
            env_overrides: list(get("env_overrides")?),
            seed: num("seed")?,
            variable: get("variable")?.to_string(),
            grid: get("grid")?.to_string(),
            variants: list(get("variants")?),
            tool_version: get("tool_version")?.to_string(),
            timestamp_unix: num("timestamp_unix")?,
        })
    }
}

/// One polyline series; `None` breaks the line.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, Option<f64>)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= n as f64)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).ceil() * step;
    let mut out = Vec::new();
    let mut t = start;
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Minimal static line chart.
pub fn render_line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (80.0, 170.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series.iter().flat_map(|s| s.points.iter().filter_map(|p| p.1));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if !y0.is_finite() {
        (y0, y1) = (0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    for t in nice_ticks(x0, x1, 6) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#dddddd"/>"##,
            top,
            top + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            top + ph + 18.0,
            tick_label(t)
        );
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for &(x, y) in &ser.points {
            match y {
                Some(y) => runs.last_mut().expect("non-empty").push((x, y)),
                None => runs.push(Vec::new()),
            }
        }
        for run in runs.iter().filter(|r| !r.is_empty()) {
            let pts: Vec<String> = run.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                pts.join(" ")
            );
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 22.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn group_rows(rows: &[CsvRow]) -> Vec<(String, Vec<&CsvRow>)> {
    let mut out: Vec<(String, Vec<&CsvRow>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(v, _)| *v == r.variant) {
            Some((_, g)) => g.push(r),
            None => out.push((r.variant.clone(), vec![r])),
        }
    }
    out
}

/// Plot for a results table: power against rate, or EE against SE. Returns
/// the file name and the SVG text.
pub fn plot_from_rows(rows: &[CsvRow]) -> Option<(&'static str, String)> {
    let kind = SweepVariable::from_kind(&rows.first()?.x_kind)?;
    let groups = group_rows(rows);
    Some(match kind {
        SweepVariable::TotalRate => {
            let series: Vec<Series> = groups
                .iter()
                .map(|(v, g)| Series {
                    label: v.clone(),
                    points: g.iter().map(|r| (r.x_value / 1e9, r.total_power_w)).collect(),
                })
                .collect();
            (
                "power_vs_rate.svg",
                render_line_chart("System power consumption", "Total data rate (Gbit/s)", "Power (W)", &series),
            )
        }
        SweepVariable::Se => {
            let series: Vec<Series> = groups
                .iter()
                .map(|(v, g)| Series {
                    label: v.clone(),
                    points: g.iter().map(|r| (r.x_value, r.ee)).collect(),
                })
                .collect();
            (
                "ee_vs_se.svg",
                render_line_chart("EE-SE trade-off", "SE (bit/s/Hz)", "EE (bit/s/Hz/W)", &series),
            )
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub a: String,
    pub b: String,
    pub at: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub variant: String,
    pub peak: Option<EePeak>,
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiFiComparison {
    pub m_t: usize,
    pub lifi: String,
    pub mmwave: String,
    /// `(x, P_lifi / P_mmwave)` on common feasible points.
    pub ratios: Vec<(f64, f64)>,
}

impl LiFiComparison {
    pub fn mean_saving(&self) -> Option<f64> {
        if self.ratios.is_empty() {
            return None;
        }
        Some(self.ratios.iter().map(|(_, r)| 1.0 - r).sum::<f64>() / self.ratios.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub x_kind: String,
    pub crossings: Vec<Crossing>,
    pub peaks: Vec<PeakReport>,
    pub lifi: Vec<LiFiComparison>,
}

/// Crossings for every variant pair, EE peaks per variant and LiFi/mmWave
/// power ratios per antenna count.
pub fn analyze_rows(rows: &[CsvRow]) -> Result<Analysis> {
    let groups = group_rows(rows);
    let curves: Vec<(String, Vec<(f64, Option<f64>)>)> = groups
        .iter()
        .map(|(v, g)| (v.clone(), g.iter().map(|r| (r.x_value, r.total_power_w)).collect()))
        .collect();
    let mut crossings = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            crossings.push(Crossing {
                a: curves[i].0.clone(),
                b: curves[j].0.clone(),
                at: crossings_of(&curves[i].1, &curves[j].1)?,
            });
        }
    }
    let peaks = groups
        .iter()
        .map(|(v, g)| {
            let c = ee_curve_from_points(g.iter().map(|r| (r.x_value, r.ee)).collect());
            PeakReport {
                variant: v.clone(),
                peak: c.peak,
                unimodal: c.unimodal,
            }
        })
        .collect();
    let mut lifi = Vec::new();
    for (label, curve) in &curves {
        let Ok(v) = label.parse::<Variant>() else { continue };
        if v.separation != Separation::Separate || v.iap_kind != IapKind::LiFi {
            continue;
        }
        let twin = Variant::separate(IapKind::MmWave, v.m_t).to_string();
        let Some((_, other)) = curves.iter().find(|(l, _)| *l == twin) else { continue };
        if other.len() != curve.len() || other.iter().zip(curve).any(|(p, q)| p.0 != q.0) {
            return Err(Error::GridMismatch(format!("{label} and {twin} do not share a grid")));
        }
        let ratios = curve
            .iter()
            .zip(other)
            .filter_map(|(p, q)| Some((p.0, p.1? / q.1?)))
            .collect();
        lifi.push(LiFiComparison {
            m_t: v.m_t,
            lifi: label.clone(),
            mmwave: twin,
            ratios,
        });
    }
    Ok(Analysis {
        x_kind: rows.first().map(|r| r.x_kind.clone()).unwrap_or_default(),
        crossings,
        peaks,
        lifi,
    })
}

fn join_f64(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Analysis {
    /// Flat key=value summary for scripts.
    pub fn to_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "x_kind={}", self.x_kind);
        for c in &self.crossings {
            let _ = writeln!(s, "crossing.{}.{}={}", c.a, c.b, join_f64(c.at.iter().copied()));
        }
        for p in &self.peaks {
            if let Some(k) = &p.peak {
                let _ = writeln!(s, "ee_peak.{}.x={}", p.variant, k.se);
                let _ = writeln!(s, "ee_peak.{}.ee={}", p.variant, k.ee);
                let _ = writeln!(s, "ee_peak.{}.interior={}", p.variant, k.interior);
            }
            let _ = writeln!(s, "ee_peak.{}.unimodal={}", p.variant, p.unimodal);
        }
        for l in &self.lifi {
            let _ = writeln!(s, "lifi_ratio.{}={}", l.m_t, join_f64(l.ratios.iter().map(|r| r.1)));
            if let Some(m) = l.mean_saving() {
                let _ = writeln!(s, "lifi_saving.{}.mean={}", l.m_t, m);
            }
        }
        s
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.crossings.is_empty() {
            writeln!(f, "Crossings ({}):", self.x_kind)?;
            for c in &self.crossings {
                if c.at.is_empty() {
                    writeln!(f, "  {} vs {}: none", c.a, c.b)?;
                } else {
                    let at: Vec<String> = c.at.iter().map(|x| format!("{x:.4e}")).collect();
                    writeln!(f, "  {} vs {}: {}", c.a, c.b, at.join(", "))?;
                }
            }
        }
        writeln!(f, "EE peaks:")?;
        for p in &self.peaks {
            match &p.peak {
                Some(k) => writeln!(
                    f,
                    "  {}: EE {:.6} at x = {:.4e}{}{}",
                    p.variant,
                    k.ee,
                    k.se,
                    if k.interior { "" } else { " (boundary)" },
                    if p.unimodal { "" } else { " [warning: not unimodal]" }
                )?,
                None => writeln!(f, "  {}: no feasible points", p.variant)?,
            }
        }
        if !self.lifi.is_empty() {
            writeln!(f, "LiFi vs mmWave power:")?;
            for l in &self.lifi {
                match l.mean_saving() {
                    Some(m) => writeln!(
                        f,
                        "  M_T={}: mean saving {:.1}% over {} points",
                        l.m_t,
                        100.0 * m,
                        l.ratios.len()
                    )?,
                    None => writeln!(f, "  M_T={}: no common feasible points", l.m_t)?,
                }
                for (x, r) in &l.ratios {
                    writeln!(f, "    x = {x:.4e}: ratio {r:.4}")?;
                }
            }
        }
        Ok(())
    }
}

/// Device powers at fixed reference operating points under `bundle`.
pub fn golden_snapshot(bundle: &ConfigBundle) -> Result<Vec<(String, f64)>> {
    let b = bundle;
    let s = &b.scenario;
    let k = &b.constants;
    let mut out = Vec::new();
    let mut push = |name: &str, d: &DevicePower| {
        for (field, v) in [
            ("p_bb", d.p_bb),
            ("p_rf", d.p_rf),
            ("p_pa", d.p_pa),
            ("p_light", d.p_light),
            ("p_total", d.p_total),
        ] {
            out.push((format!("{name}.{field}"), v));
        }
    };
    let rate = 1e9;
    let streams = vec![0.5; s.n_buildings * s.n_beams];
    let mbsala = power_mbsala(s, k, &mbsala_load(b, 0, 0, s.n_buildings, rate)?, &streams)?;
    push("mbsala", &mbsala);
    let direct = vec![0.5; s.n_ue];
    let mbsala_direct = power_mbsala(s, k, &mbsala_load(b, s.n_ue, s.pilot_len, 0, rate)?, &direct)?;
    push("mbsala_direct", &mbsala_direct);
    let mbs = power_mbs(s, k, &vec![mbsala.p_total; s.n_arrays], &mbs_load(b, rate))?;
    push("mbs", &mbs);
    let building_rate = rate / s.n_buildings as f64;
    push("bmaa", &power_bmaa(s, k, &bmaa_load(b, building_rate)?));
    let iap = iap_load(b, building_rate)?;
    push("iap_low", &power_iap_mmwave(s, k, &iap, 0.04 * k.iap.pa_max)?);
    push("iap_high", &power_iap_mmwave(s, k, &iap, 0.4 * k.iap.pa_max)?);
    let l = &b.lifi;
    let g = lifi_angles(l.tx_positions[0], l.rx_position, l.normal_tx, l.normal_rx)?;
    push("lifi", &power_lifi_iap(&l.led, lifi_los_gain(&g, l)));
    Ok(out)
}

pub fn golden_text(entries: &[(String, f64)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}={v:?}\n")).collect()
}

pub fn parse_golden(text: &str) -> Result<Vec<(String, f64)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Table(format!("golden line `{l}` lacks `=`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Table(format!("golden value `{v}` is not a number")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &str, x: f64, p: Option<f64>) -> CsvRow {
        CsvRow {
            variant: v.into(),
            x_value: x,
            x_kind: "total_rate_bps".into(),
            total_power_w: p,
            ee: p.map(|p| x / p),
            feasible: p.is_some(),
            p_mbs_w: p,
            p_bmaa_w: p.map(|_| 0.0),
            p_iap_w: p.map(|_| 0.0),
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        let rows = vec![row("a", 0.0, Some(1.5)), row("a", 1.0, None)];
        let text = rows_to_csv(&rows).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        assert!(text.contains("a,1.0,total_rate_bps,,,false,,,") || text.contains("a,1,total_rate_bps,,,false,,,"));
        assert_eq!(parse_results_csv(&text).unwrap(), rows);
        assert!(parse_results_csv("variant,x\na,1\n").is_err());
    }

    #[test]
    fn synthetic_crossing_reported() {
        let rows: Vec<CsvRow> = [0.0, 1.0, 2.0]
            .iter()
            .map(|&x| row("a", x, Some(x)))
            .chain([0.0, 1.0, 2.0].iter().map(|&x| row("b", x, Some(2.0 - x))))
            .collect();
        let a = analyze_rows(&rows).unwrap();
        assert_eq!(a.crossings.len(), 1);
        assert_eq!(a.crossings[0].at, vec![1.0]);
        assert!(a.to_summary().contains("crossing.a.b=1\n"));
    }

    #[test]
    fn single_variant_has_no_crossings() {
        let rows = vec![row("a", 0.0, Some(1.0)), row("a", 1.0, Some(2.0))];
        let a = analyze_rows(&rows).unwrap();
        assert!(a.crossings.is_empty());
        assert!(!a.to_string().contains("Crossings"));
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            config_sha256: sha256_hex(b""),
            config_path: "<defaults>".into(),
            env_overrides: vec![],
            seed: 7,
            variable: "rate".into(),
            grid: "0:6e9:25".into(),
            variants: vec!["nonsep@64".into(), "sep-lifi@64".into()],
            tool_version: "0.1.0".into(),
            timestamp_unix: 1,
        };
        assert_eq!(RunManifest::parse(&m.to_text()).unwrap(), m);
        assert_eq!(
            m.config_sha256,
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn chart_is_stable_and_breaks_lines() {
        let s = [Series {
            label: "a<b".into(),
            points: vec![(0.0, Some(1.0)), (1.0, None), (2.0, Some(3.0)), (3.0, Some(2.0))],
        }];
        let one = render_line_chart("t", "x", "y", &s);
        assert_eq!(one, render_line_chart("t", "x", "y", &s));
        assert_eq!(one.matches("<polyline").count(), 2);
        assert!(one.contains("a&lt;b"));
    }
}
