//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Run with `cargo test -p e2e-energy --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use e2e_energy::channel::{fejer_kernel, pathloss_winner_b5a};
use e2e_energy::config::{lambertian_order, parse_config, DeviceConstants};
use e2e_energy::metrics::{
    expected_kernel_sq, required_sinr, snr_macro, spectral_efficiency, AngleDist, Expectation, LinkKind, LinkSnr,
    SeMode, SmallScale,
};
use e2e_energy::power::{doherty_branch_values, pa_power_doherty};
use e2e_energy::report::{golden_snapshot, parse_golden};
use e2e_energy::scenario::{
    crossings_of, ee_curve_from_points, linspace, run_sweep, SweepResult, SweepSpec, SweepVariable, Variant,
};
use e2e_energy::{ConfigBundle, IapKind};

const REL: f64 = 1e-9;
const M_TS: [usize; 3] = [64, 128, 256];
const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");

type Check = Result<String, String>;

struct Suite {
    failed: usize,
}

impl Suite {
    fn run(&mut self, name: &str, check: impl FnOnce() -> Check) {
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL {name}: {detail} [{:.2?}]", t.elapsed());
            }
        }
    }
}

fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

fn expect_close(what: &str, actual: f64, expected: f64, tol: f64) -> Result<(), String> {
    let e = rel_err(actual, expected);
    if e <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {actual:.12}, expected {expected:.12} (rel err {e:.3e} > {tol:e})"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pathloss() -> Check {
    expect_close("PL(100 m, 5 GHz)", pathloss_winner_b5a(100.0, 5.0).map_err(|e| e.to_string())?, 89.5, REL)?;
    expect_close("PL(1 m, 5 GHz)", pathloss_winner_b5a(1.0, 5.0).map_err(|e| e.to_string())?, 42.5, REL)?;
    Ok("89.5 dB and 42.5 dB".into())
}

fn lambertian() -> Check {
    let m60 = lambertian_order(60f64.to_radians()).map_err(|e| e.to_string())?;
    let m45 = lambertian_order(45f64.to_radians()).map_err(|e| e.to_string())?;
    expect_close("m(60 deg)", m60, 1.0, REL)?;
    expect_close("m(45 deg)", m45, 2.0, REL)?;
    Ok(format!("m(60)={m60}, m(45)={m45}"))
}

fn fejer() -> Check {
    for m in 1..=512 {
        expect_close(&format!("F_{m}(0)"), fejer_kernel(m, 0.0), 1.0, REL)?;
    }
    let f2 = fejer_kernel(2, 1.0);
    let f4 = fejer_kernel(4, 0.5);
    ensure(f2.abs() <= REL, || format!("F_2(1) = {f2:e}"))?;
    ensure(f4.abs() <= REL, || format!("F_4(0.5) = {f4:e}"))?;
    Ok(format!("F_M(0)=1 for M in 1..=512, |F_2(1)|={:.1e}, |F_4(0.5)|={:.1e}", f2.abs(), f4.abs()))
}

#[allow(clippy::approx_constant)]
fn doherty() -> Check {
    let d = |p: f64, pmax: f64| pa_power_doherty(p, pmax).map_err(|e| e.to_string());
    expect_close("P_PA(1, 1)", d(1.0, 1.0)?, 6.0 / PI, REL)?;
    expect_close("P_PA(0.01, 1)", d(0.01, 1.0)?, 2.0 / (PI * 10.0), REL)?;
    let (lo, hi) = doherty_branch_values(1.0);
    expect_close("lower branch at 0.25", lo, 0.31831, 1e-5)?;
    expect_close("upper branch at 0.25", hi, 0.95493, 1e-5)?;
    let below = d(0.25 * (1.0 - 1e-12), 1.0)?;
    expect_close("P_PA(0.25-, 1)", below, lo, 1e-9)?;
    expect_close("P_PA(0.25, 1)", d(0.25, 1.0)?, hi, REL)?;
    Ok(format!("6/pi, 1/(5 pi), branches {lo:.5}/{hi:.5}"))
}

fn overhead() -> Check {
    let k = DeviceConstants {
        eta_c: 0.1,
        eta_acdc: 0.075,
        eta_dcdc: 0.06,
        ..Default::default()
    };
    let p = 1.0 / k.overhead_divisor();
    expect_close("1 W / divisor", p, 1.0 / (0.9 * 0.925 * 0.94), REL)?;
    ensure((p - 1.27787).abs() < 5e-6, || format!("1 W maps to {p}, not 1.27787"))?;
    Ok(format!("1 W -> {p:.5} W"))
}

fn snr_linearity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let beta = 10f64.powf(-rng.random_range(6.0..14.0));
        let m_t = rng.random_range(1..=512);
        let m_r = rng.random_range(1..=128);
        let p = rng.random_range(1e-3..10.0);
        let s2 = 10f64.powf(-rng.random_range(10.0..15.0));
        let base = snr_macro(beta, m_t, m_r, p, s2).value;
        expect_close("2 M_T", snr_macro(beta, 2 * m_t, m_r, p, s2).value, 2.0 * base, REL)?;
        expect_close("2 M_R", snr_macro(beta, m_t, 2 * m_r, p, s2).value, 2.0 * base, REL)?;
    }
    Ok("100 random configs".into())
}

fn random_dist(rng: &mut ChaCha8Rng) -> AngleDist {
    let center = rng.random_range(-1.0..1.0);
    let width = rng.random_range(0.1..1.0);
    if rng.random_bool(0.5) {
        AngleDist::Uniform {
            lo: center - width,
            hi: center + width,
        }
    } else {
        AngleDist::Triangular {
            center,
            half_width: width,
        }
    }
}

fn quadrature_vs_mc() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for case in 0..20 {
        let m = rng.random_range(2..=16);
        let dist = random_dist(&mut rng);
        let q = expected_kernel_sq(m, dist, Expectation::default());
        let mc = expected_kernel_sq(
            m,
            dist,
            Expectation::MonteCarlo {
                draws: 1_000_000,
                seed: case,
            },
        );
        let e = rel_err(q, mc);
        worst = worst.max(e);
        ensure(e <= 0.01, || format!("case {case} M={m} {dist:?}: quadrature {q:.6e} vs MC {mc:.6e}"))?;
    }
    Ok(format!("20 cases, worst rel diff {:.3}%", 100.0 * worst))
}

fn se_approx_vs_exact() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for (i, m_t) in [64usize, 128, 256].into_iter().cycle().take(12).enumerate() {
        let m_r = 64;
        let d = rng.random_range(50.0..500.0);
        let beta = 10f64.powf(-pathloss_winner_b5a(d, 3.5).map_err(|e| e.to_string())? / 10.0);
        let p = 10f64.powf(rng.random_range(-6.0..0.0));
        let snr = LinkSnr::new(LinkKind::MacroBackhaul, snr_macro(beta, m_t, m_r, p, 4e-13).value)
            .map_err(|e| e.to_string())?;
        let approx = spectral_efficiency(&snr, 1.0, SeMode::Approx).value;
        let exact = spectral_efficiency(
            &snr,
            1.0,
            SeMode::ExactMc {
                draws: 100_000,
                seed: i as u64,
                variation: SmallScale::Hardening {
                    diversity: (m_t * m_r) as u64,
                },
            },
        )
        .value;
        let e = rel_err(approx, exact);
        worst = worst.max(e);
        ensure(e <= 0.02, || {
            format!("M_T={m_t} SNR={:.3e}: approx {approx} vs exact {exact}", snr.value)
        })?;
    }
    Ok(format!("12 links, worst rel diff {:.2e}", worst))
}

fn se_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let se = 10f64.powf(rng.random_range(-3.0..1.5));
        let gamma = rng.random_range(0.5..1.0);
        let sinr = LinkSnr::new(LinkKind::MacroBackhaul, required_sinr(se, gamma)).map_err(|e| e.to_string())?;
        let back = spectral_efficiency(&sinr, gamma, SeMode::Approx).value;
        let e = rel_err(back, se);
        worst = worst.max(e);
        ensure(e <= 1e-12, || format!("SE {se} gamma {gamma}: round trip {back}"))?;
    }
    Ok(format!("1000 values, worst rel err {worst:.2e}"))
}

fn variants() -> Vec<Variant> {
    M_TS.iter()
        .flat_map(|&m| {
            [
                Variant::separate(IapKind::MmWave, m),
                Variant::separate(IapKind::LiFi, m),
                Variant::non_separate(m),
            ]
        })
        .collect()
}

fn sweep(variable: SweepVariable, max: f64) -> Result<SweepResult, String> {
    let spec = SweepSpec::new(variable, linspace(0.0, max, 25), variants()).map_err(|e| e.to_string())?;
    run_sweep(&ConfigBundle::default(), &spec, 0).map_err(|e| e.to_string())
}

/// One crossing; separate is costlier below it and cheaper above it, with
/// points where only the separate variant is feasible counting as cheaper.
fn crossing_shape(rates: &SweepResult) -> Check {
    let mut found = Vec::new();
    for m in M_TS {
        let ns = rates.curve(&Variant::non_separate(m));
        for kind in [IapKind::MmWave, IapKind::LiFi] {
            let v = Variant::separate(kind, m);
            let sep = rates.curve(&v);
            let xs = crossings_of(&sep, &ns).map_err(|e| e.to_string())?;
            ensure(xs.len() == 1, || format!("{v} vs nonsep@{m}: {} crossings {xs:?}", xs.len()))?;
            let x0 = xs[0];
            for ((x, s), (_, n)) in sep.iter().zip(&ns) {
                let ok = match (s, n) {
                    (Some(s), Some(n)) if *x < x0 => s > n,
                    (Some(s), Some(n)) if *x > x0 => s < n,
                    (Some(_), None) => *x > x0,
                    (None, Some(_)) => *x < x0,
                    _ => true,
                };
                ensure(ok, || format!("{v} vs nonsep@{m} at {x:.3e}: {s:?} vs {n:?}, crossing {x0:.4e}"))?;
            }
            found.push(format!("{v}:{:.3}G", x0 / 1e9));
        }
    }
    Ok(found.join(" "))
}

fn monotone(rates: &SweepResult) -> Check {
    for v in variants() {
        let pts: Vec<(f64, f64)> = rates.curve(&v).into_iter().filter_map(|(x, p)| Some((x, p?))).collect();
        ensure(pts.len() >= 2, || format!("{v}: only {} feasible points", pts.len()))?;
        for w in pts.windows(2) {
            ensure(w[1].1 >= w[0].1, || {
                format!("{v}: P({:.3e})={} < P({:.3e})={}", w[1].0, w[1].1, w[0].0, w[0].1)
            })?;
        }
    }
    Ok("9 variants".into())
}

fn ee_shape(ses: &SweepResult) -> Check {
    let mut peaks = BTreeMap::new();
    for v in variants() {
        let pts = ses.curve(&v).into_iter().map(|(se, p)| (se, p.map(|p| se / p))).collect();
        let curve = ee_curve_from_points(pts);
        let peak = curve.peak.ok_or_else(|| format!("{v}: no feasible point"))?;
        if v.m_t >= 128 {
            ensure(peak.interior, || format!("{v}: EE peak at SE {} is on the boundary", peak.se))?;
        }
        peaks.insert((v.family(), v.m_t), peak.ee);
    }
    let mut detail = Vec::new();
    for fam in ["sep-mmwave", "sep-lifi", "nonsep"] {
        let (lo, hi) = (peaks[&(fam, 64)], peaks[&(fam, 256)]);
        ensure(hi >= lo, || format!("{fam}: peak EE {hi} at M_T=256 below {lo} at M_T=64"))?;
        detail.push(format!("{fam} {lo:.3}->{hi:.3}"));
    }
    Ok(format!("interior peaks at M_T 128/256; peak EE 64->256: {}", detail.join(", ")))
}

fn power_at(r: &SweepResult, v: &Variant, x: f64) -> Result<f64, String> {
    r.curve(v)
        .into_iter()
        .find(|(g, _)| (g - x).abs() < 1.0)
        .and_then(|(_, p)| p)
        .ok_or_else(|| format!("{v} infeasible or absent at {x:e}"))
}

fn ratio_at_5g(rates: &SweepResult) -> Check {
    let ns = power_at(rates, &Variant::non_separate(256), 5e9)?;
    let sep = power_at(rates, &Variant::separate(IapKind::MmWave, 256), 5e9)?;
    let ratio = ns / sep;
    ensure(ratio >= 2.0, || format!("ratio {ratio:.3} ({ns:.1} W / {sep:.1} W)"))?;
    Ok(format!("nonsep {ns:.1} W / sep-mmwave {sep:.1} W = {ratio:.2}"))
}

fn lifi_saving(rates: &SweepResult) -> Check {
    let mut detail = Vec::new();
    for m in M_TS {
        let mm = rates.curve(&Variant::separate(IapKind::MmWave, m));
        let li = rates.curve(&Variant::separate(IapKind::LiFi, m));
        let mut savings = Vec::new();
        for ((x, a), (_, b)) in mm.iter().zip(&li) {
            if let (Some(a), Some(b)) = (a, b) {
                ensure(b < a, || format!("M_T={m} at {x:.3e}: LiFi {b} W >= mmWave {a} W"))?;
                savings.push((a - b) / a);
            }
        }
        ensure(!savings.is_empty(), || format!("M_T={m}: no common feasible point"))?;
        let mean = savings.iter().sum::<f64>() / savings.len() as f64;
        ensure((0.05..=0.20).contains(&mean), || format!("M_T={m}: mean saving {:.2}%", 100.0 * mean))?;
        detail.push(format!("M_T={m} {:.1}% over {} points", 100.0 * mean, savings.len()));
    }
    Ok(detail.join(", "))
}

fn csv_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_e2e-energy"))
            .args(["sweep", "--seed", "0", "--plot", "off", "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || {
            format!("sweep failed: {}", String::from_utf8_lossy(&status.stderr))
        })?;
        std::fs::read(out.join("results.csv")).map_err(|e| e.to_string())
    };
    let a = run("a")?;
    let b = run("b")?;
    ensure(a == b, || "results.csv differs between identical runs".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn golden() -> Check {
    let defaults = std::fs::read_to_string(format!("{GOLDEN_DIR}/defaults.conf")).map_err(|e| e.to_string())?;
    let bundle = parse_config(&defaults, "defaults.conf").map_err(|e| e.to_string())?;
    ensure(bundle == ConfigBundle::default(), || {
        "tests/golden/defaults.conf no longer matches the built-in defaults".into()
    })?;
    let text = std::fs::read_to_string(format!("{GOLDEN_DIR}/device_power.txt")).map_err(|e| e.to_string())?;
    let expected = parse_golden(&text).map_err(|e| e.to_string())?;
    let actual: BTreeMap<String, f64> = golden_snapshot(&bundle).map_err(|e| e.to_string())?.into_iter().collect();
    ensure(actual.len() == expected.len(), || {
        format!("{} snapshot values, {} in the oracle file", actual.len(), expected.len())
    })?;
    let mut worst: f64 = 0.0;
    for (k, want) in &expected {
        let got = *actual.get(k).ok_or_else(|| format!("{k} missing from snapshot"))?;
        let e = rel_err(got, *want);
        worst = worst.max(e);
        ensure(e <= 1e-6, || format!("{k}: {got} vs oracle {want}"))?;
    }
    Ok(format!("{} values, worst rel diff {worst:.1e}", expected.len()))
}

fn main() -> ExitCode {
    let mut s = Suite { failed: 0 };
    s.run("1.pathloss", pathloss);
    s.run("1.lambertian", lambertian);
    s.run("1.fejer", fejer);
    s.run("1.doherty", doherty);
    s.run("1.overhead", overhead);
    s.run("1.snr_linearity", snr_linearity);
    s.run("2.quadrature_vs_monte_carlo", quadrature_vs_mc);
    s.run("2.se_approx_vs_exact", se_approx_vs_exact);
    s.run("2.se_round_trip", se_round_trip);

    let t = Instant::now();
    let sweeps = sweep(SweepVariable::TotalRate, 6e9).and_then(|r| Ok((r, sweep(SweepVariable::Se, 300.0)?)));
    let elapsed = t.elapsed();
    match &sweeps {
        Ok((rates, ses)) => {
            s.run("3.sweep_runtime", || {
                ensure(elapsed.as_secs_f64() <= 60.0, || format!("{elapsed:.2?}"))?;
                Ok(format!("rate and SE sweeps of 9 variants in {elapsed:.2?}"))
            });
            s.run("3.single_crossing", || crossing_shape(rates));
            s.run("3.monotone_power", || monotone(rates));
            s.run("3.ee_peaks", || ee_shape(ses));
            s.run("4.ratio_5gbps", || ratio_at_5g(rates));
            s.run("4.lifi_saving", || lifi_saving(rates));
        }
        Err(e) => {
            for name in [
                "3.sweep_runtime",
                "3.single_crossing",
                "3.monotone_power",
                "3.ee_peaks",
                "4.ratio_5gbps",
                "4.lifi_saving",
            ] {
                s.run(name, || Err(format!("sweep failed: {e}")));
            }
        }
    }
    s.run("5.csv_determinism", csv_determinism);
    s.run("5.golden_snapshot", golden);

    if s.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", s.failed);
        ExitCode::FAILURE
    }
}
