//! Acceptance suite. Prints one PASS/FAIL line per criterion, then fails
//! if any criterion failed.
//!
//! `cargo test -p pixel-modes --test acceptance -- --nocapture`

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pixel_modes::config::{ScenarioConfig, SweepAxis, SweepVariable};
use pixel_modes::etendue::{
    paraxial_etendue, paraxial_pupil_solid_angle, reduced_scene_factor, reduced_sensor_factor,
};
use pixel_modes::mc::{simulate_pixel, PhotonDistribution, SamplingSpec};
use pixel_modes::photon::{
    bose_einstein_occupancy, effective_modes, mode_count, occupancy_from_x, photon_number,
    shot_noise_sigma, snr_compact, snr_scene, snr_sensor, CoherencePolicy,
};
use pixel_modes::quadrature::{
    quadrature_etendue, FootprintPatch, FootprintShape, PupilDisc, QuadratureSpec,
};
use pixel_modes::quantities::{Angle, Area, Length, Temperature};
use pixel_modes::report::{reproduce_table1, run_sweep};
use pixel_modes::sensor::{effective_coherence_scale, RadiometricScenario, SensorGeometry};

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn worked_example() -> Outcome {
    let a = Length::from_micrometers(17.0);
    let etendue = reduced_sensor_factor(a, 1.0).map_err(|e| e.to_string())?;
    let geometry = SensorGeometry::new(a, 1.0).map_err(|e| e.to_string())?;
    let budget = mode_count(
        &etendue,
        Length::from_micrometers(10.0),
        &geometry,
        CoherencePolicy::RawMeasurementWavelength,
    )
    .map_err(|e| e.to_string())?;
    let e_f = rel(etendue.full.value(), 2.27e-10);
    let e_n = rel(budget.n_osc, 2.27);
    check(
        e_f <= 5e-3 && e_n <= 5e-3,
        format!(
            "F_full = {:.6e} (rel {e_f:.2e}), N_osc = {:.5} (rel {e_n:.2e}), tol 5e-3",
            etendue.full.value(),
            budget.n_osc
        ),
    )
}

fn table1() -> Outcome {
    let expected = [227.0, 25.2, 9.08, 2.27, 1.16];
    let rows = reproduce_table1();
    if rows.len() != expected.len() {
        return Err(format!("{} rows", rows.len()));
    }
    let worst = rows
        .iter()
        .zip(expected)
        .map(|(r, want)| rel(r.n_osc, want))
        .fold(0.0, f64::max);
    let got: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.n_osc)).collect();
    check(worst <= 5e-3, format!("[{}], worst rel {worst:.2e}, tol 5e-3", got.join(", ")))
}

fn quadrature_oracles() -> Outcome {
    let run = || -> pixel_modes::Result<(f64, f64)> {
        // 1 mm square, 1 m away, 10 mm pupil: half-angle 5e-3 rad
        let patch = FootprintPatch::new(
            FootprintShape::Rectangle { width: Length::new(1e-3), height: Length::new(1e-3) },
            Length::new(1.0),
            Angle::new(0.0),
        )?;
        let pupil = PupilDisc::on_axis(Length::new(0.01))?;
        let quad = quadrature_etendue(&patch, &pupil, &QuadratureSpec::gauss_legendre(8, 1e-8)?)?;
        let omega = paraxial_pupil_solid_angle(Length::new(0.01), Length::new(1.0))?;
        let parax = paraxial_etendue(Area::new(1e-6), omega)?;
        let on_axis = rel(quad.full.value(), parax.full.value());

        // point patch under a wide pupil
        let (r, d) = (0.5, 1.0);
        let side = 1e-6;
        let patch = FootprintPatch::new(
            FootprintShape::Rectangle { width: Length::new(side), height: Length::new(side) },
            Length::new(d),
            Angle::new(0.0),
        )?;
        let pupil = PupilDisc::on_axis(Length::new(2.0 * r))?;
        let quad = quadrature_etendue(&patch, &pupil, &QuadratureSpec::gauss_legendre(16, 1e-6)?)?;
        let analytic = PI * (f64::atan(r / d)).sin().powi(2);
        let point = rel(quad.full.value() / (side * side), analytic);
        Ok((on_axis, point))
    };
    let (on_axis, point) = run().map_err(|e| e.to_string())?;
    check(
        on_axis <= 1e-4 && point <= 1e-6,
        format!("on-axis rel {on_axis:.2e} (tol 1e-4), point patch rel {point:.2e} (tol 1e-6)"),
    )
}

fn formula_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = Length::from_micrometers(rng.random_range(2.0..60.0));
        let f_number = rng.random_range(0.7..8.0);
        let focal = Length::from_millimeters(rng.random_range(5.0..300.0));
        let lambda = Length::from_micrometers(rng.random_range(1.0..20.0));
        let temperature = Temperature::new(rng.random_range(50.0..2000.0));
        let eval = || -> pixel_modes::Result<f64> {
            let pupil = focal / f_number;
            let ifov = Angle::new(a / focal);
            let geometry = SensorGeometry::new(a, f_number)?;
            let lambda_pix = effective_coherence_scale(lambda, &geometry)?.lambda_pix;
            let occ = bose_einstein_occupancy(lambda, temperature)?;
            let etendue = reduced_sensor_factor(a, f_number)?;
            let compact = snr_compact(&etendue, lambda_pix, &occ)?.snr_fund;
            let sensor = snr_sensor(a, f_number, lambda_pix, &occ)?.snr_fund;
            let scene = snr_scene(pupil, ifov, lambda_pix, &occ)?.snr_fund;
            let scene_factor = reduced_scene_factor(pupil, ifov)?;

            let scenario = RadiometricScenario::new(lambda, temperature)?;
            let budget = effective_modes(
                &mode_count(&etendue, lambda, &geometry, CoherencePolicy::MaxRule)?,
                &scenario,
            );
            let pipeline = shot_noise_sigma(photon_number(&budget, &occ)?)?;
            Ok([
                rel(sensor, compact),
                rel(scene, compact),
                rel(pipeline, compact),
                rel(scene_factor.reduced.value(), etendue.reduced.value()),
            ]
            .into_iter()
            .fold(0.0, f64::max))
        };
        worst = worst.max(eval().map_err(|e| e.to_string())?);
    }
    check(worst <= 1e-12, format!("1000 random sets, worst rel {worst:.2e}, tol 1e-12"))
}

fn occupancy_properties() -> Outcome {
    let lambdas: Vec<f64> = (0..50).map(|i| 1.0 + 19.0 * i as f64 / 49.0).collect();
    let temps: Vec<f64> = (0..50).map(|i| 50.0 + 1950.0 * i as f64 / 49.0).collect();
    let n = |l: f64, t: f64| {
        bose_einstein_occupancy(Length::from_micrometers(l), Temperature::new(t))
            .map(|o| o.n_bar)
            .map_err(|e| e.to_string())
    };
    let mut violations = 0;
    for i in 0..50 {
        for j in 0..50 {
            let here = n(lambdas[i], temps[j])?;
            if j + 1 < 50 && n(lambdas[i], temps[j + 1])? <= here {
                violations += 1;
            }
            if i + 1 < 50 && n(lambdas[i + 1], temps[j])? <= here {
                violations += 1;
            }
        }
    }

    // 1e-6 ≤ x ≤ 1e-2, log-spaced. 1/x is carried as q + r (fma residual)
    // and n̄ − q is exact, so only the rounding of n̄ itself is measured.
    let mut rj_worst: f64 = f64::NEG_INFINITY;
    let mut rj_holds_from = 0.0;
    for k in 0..=400 {
        let x = 10f64.powf(-6.0 + 4.0 * k as f64 / 400.0);
        let q = 1.0 / x;
        let r = (-q).mul_add(x, 1.0) / x;
        let deviation = (occupancy_from_x(x).n_bar - q) - r + 0.5;
        let excess = deviation.abs() - (x / 12.0 + 1e-12);
        rj_worst = rj_worst.max(excess);
        if excess > 0.0 {
            rj_holds_from = 0.0;
        } else if rj_holds_from == 0.0 {
            rj_holds_from = x;
        }
    }

    let cold = bose_einstein_occupancy(Length::from_micrometers(10.0), Temperature::new(1e-3))
        .map_err(|e| e.to_string())?;
    check(
        violations == 0 && rj_worst <= 0.0 && cold.n_bar == 0.0 && cold.underflow,
        format!(
            "{violations} monotonicity violations on 50x50; RJ bound over x in [1e-6, 1e-2]: \
             worst excess {rj_worst:.2e}, holds for x >= {rj_holds_from:.2e}; T=1 mK n̄ = {} underflow = {}",
            cold.n_bar, cold.underflow
        ),
    )
}

fn monte_carlo() -> Outcome {
    let sim = |d, m, t, s| {
        SamplingSpec::new(d, m, t, s)
            .and_then(|spec| simulate_pixel(&spec))
            .map_err(|e| e.to_string())
    };
    let mut notes = Vec::new();
    let mut ok = true;

    let poisson = sim(PhotonDistribution::Coherent { mean: 100.0 }, 1, 100_000, 1)?;
    let (snr, se) = (poisson.empirical_snr.unwrap_or(0.0), poisson.standard_error_snr.unwrap_or(0.0));
    let z = (snr - 10.0).abs() / se;
    ok &= z <= 3.0;
    notes.push(format!("Poisson SNR {snr:.4} ({z:.2} SE)"));

    for (i, n_bar) in [0.01, 0.1, 1.0].into_iter().enumerate() {
        let s = sim(PhotonDistribution::Thermal { n_bar }, 1, 100_000, 10 + i as u64)?;
        let fano = s.empirical_fano().unwrap_or(f64::NAN);
        let z = (fano - (1.0 + n_bar)).abs() / s.standard_error_fano.unwrap_or(0.0);
        ok &= z <= 4.0;
        notes.push(format!("Fano(n̄={n_bar}) {z:.2} SE"));
    }

    let fock = sim(PhotonDistribution::Fock { n: 2 }, 3, 10_000, 3)?;
    let exact = fock.empirical_mean == 6.0 && fock.empirical_variance == 0.0;
    ok &= exact;
    notes.push(format!("Fock exact {exact}"));

    let n_bar = bose_einstein_occupancy(Length::from_micrometers(10.0), Temperature::new(300.0))
        .map_err(|e| e.to_string())?
        .n_bar;
    let s = sim(PhotonDistribution::Thermal { n_bar }, 100, 1_000_000, 4)?;
    let shot = rel(s.empirical_snr.unwrap_or(0.0), s.theory_mean.sqrt());
    ok &= shot <= 0.01;
    notes.push(format!("shot-noise SNR rel {shot:.2e} (tol 1e-2)"));

    check(ok, notes.join(", "))
}

fn trends() -> Outcome {
    let sweep = |variable: SweepVariable, values: Vec<f64>| {
        let mut config = ScenarioConfig::minimal(17e-6, 1.0, 10e-6, 300.0);
        config.sweep = Some(SweepAxis { variable, values });
        run_sweep(&config).map_err(|e| e.to_string())
    };
    let rising = |rows: &[pixel_modes::report::ReportRow]| {
        rows.windows(2).all(|w| w[1].snr_fund > w[0].snr_fund)
    };
    let lambda = sweep(SweepVariable::LambdaMeas, (0..40).map(|i| (2.0 + 0.5 * i as f64) * 1e-6).collect())?;
    let temp = sweep(SweepVariable::Temperature, (0..40).map(|i| 100.0 + 25.0 * i as f64).collect())?;
    let (l, t) = (rising(&lambda), rising(&temp));
    check(
        l && t,
        format!("SNR strictly rising over 40 λ points: {l}, over 40 T points: {t}"),
    )
}

fn cli_contract() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_pixel-modes");
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let run = |args: &[&str]| Command::new(bin).args(args).output().map_err(|e| e.to_string());

    let mc = configs.join("mc_thermal.toml");
    let mc = mc.to_str().unwrap_or_default();
    let a = run(&["--format", "json", "mc", mc])?;
    let b = run(&["--format", "json", "mc", mc])?;
    let identical = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();

    let dir = std::env::temp_dir().join(format!("pixel-modes-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let bad = dir.join("bad.toml");
    std::fs::write(
        &bad,
        "[sensor]\na_pix = 17e-6\nf_number = 0.0\n\n[scenario]\nlambda_meas = 10e-6\ntemperature = 300.0\n",
    )
    .map_err(|e| e.to_string())?;
    let invalid = run(&["run", bad.to_str().unwrap_or_default()])?;
    let named = String::from_utf8_lossy(&invalid.stderr).contains("sensor.f_number");
    let _ = std::fs::remove_dir_all(&dir);

    let ok_code = a.status.code() == Some(0);
    let bad_code = invalid.status.code() == Some(2) && invalid.stdout.is_empty();
    check(
        identical && ok_code && bad_code && named,
        format!(
            "byte-identical {identical}, exit 0 {ok_code}, invalid config exit 2 {bad_code}, key named {named}"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 worked example", worked_example),
        ("2 mode-count table", table1),
        ("3 quadrature oracles", quadrature_oracles),
        ("4 formula-chain identities", formula_chain),
        ("5 occupancy properties", occupancy_properties),
        ("6 Monte Carlo statistics", monte_carlo),
        ("7 wavelength/temperature trends", trends),
        ("8 CLI contract", cli_contract),
    ];
    let mut failed = Vec::new();
    for (name, criterion) in criteria {
        let start = Instant::now();
        let outcome = criterion();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{ms:.0} ms]"),
            Err(detail) => {
                println!("FAIL  {name}: {detail} [{ms:.0} ms]");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
